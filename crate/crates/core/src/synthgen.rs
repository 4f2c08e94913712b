//! Synthetic measuring-process logs with known decision logic.
//!
//! Each workpiece gets a drawing with one tolerance range per measure and a measurement per
//! measure. The label is `OK` exactly when every measure lies within its range.

use chrono::{DateTime, Duration, FixedOffset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::log_ingest::{AttrValue, Event, EventLog, Trace};
use crate::metrics::{synthetic_ground_truth, GroundTruth};
use crate::tabulate::{render_list, render_pairs};

pub const CHECK_DRAWING: &str = "Check technical drawing";
pub const MEASURE: &str = "Measure workpiece";
pub const OK_PILE: &str = "Put in OK Pile";
pub const NOK_PILE: &str = "Put in NOK Pile";
pub const RANGES_KEY: &str = "ranges";
pub const MEASURES_KEY: &str = "measured_values";
pub const RESULT_KEY: &str = "result";
pub const ID_KEY: &str = "uuid";

/// Column stems that give the generated lists the `range0..`, `meas0..` names.
pub const ALIASES: [(&str, &str); 2] = [(RANGES_KEY, "range"), (MEASURES_KEY, "meas")];

const START: &str = "2021-03-30T09:21:30.423+02:00";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub n_instances: usize,
    pub drawing_ranges: Vec<(f64, f64)>,
    /// Each range bound moves by up to this much per instance.
    pub range_jitter: f64,
    pub positive_fraction: f64,
    pub seed: u64,
    /// How far beyond a bound an out-of-range measure may fall.
    pub out_of_range_margin: f64,
    /// Draw bounds, offsets and measures as whole numbers.
    pub integer_values: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_instances: 2000,
            drawing_ranges: vec![(20.0, 80.0), (10.0, 20.0), (30.0, 70.0)],
            range_jitter: 2.0,
            positive_fraction: 0.5,
            seed: 42,
            out_of_range_margin: 5.0,
            integer_values: true,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n_instances == 0 {
            return fail("n_instances must be positive".into());
        }
        if self.drawing_ranges.is_empty() {
            return fail("at least one drawing range is required".into());
        }
        if !(self.range_jitter >= 0.0 && self.range_jitter.is_finite()) {
            return fail("range_jitter must be a non-negative number".into());
        }
        for &(lo, hi) in &self.drawing_ranges {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return fail(format!("range ({lo},{hi}) needs low < high"));
            }
            if self.range_jitter >= (hi - lo) / 2.0 {
                return fail(format!(
                    "range_jitter {} too large for range ({lo},{hi})",
                    self.range_jitter
                ));
            }
            if self.integer_values && (lo.fract() != 0.0 || hi.fract() != 0.0) {
                return fail(format!(
                    "range ({lo},{hi}) must be whole numbers when integer_values is set"
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.positive_fraction) {
            return fail("positive_fraction must lie in [0, 1]".into());
        }
        if !(self.out_of_range_margin > 0.0 && self.out_of_range_margin.is_finite()) {
            return fail("out_of_range_margin must be positive".into());
        }
        if self.integer_values && self.out_of_range_margin < 1.0 {
            return fail(
                "out_of_range_margin must be at least 1 when integer_values is set".into(),
            );
        }
        Ok(())
    }

    pub fn ground_truth(&self) -> GroundTruth {
        synthetic_ground_truth(self.drawing_ranges.len(), "OK")
    }
}

/// One generated workpiece before it becomes a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub ranges: Vec<(f64, f64)>,
    pub measures: Vec<f64>,
}

impl Instance {
    /// The ground-truth rule: every measure within its (inclusive) range.
    pub fn in_tolerance(&self) -> bool {
        self.ranges
            .iter()
            .zip(&self.measures)
            .all(|(&(lo, hi), &m)| lo <= m && m <= hi)
    }

    pub fn label(&self) -> &'static str {
        if self.in_tolerance() {
            "OK"
        } else {
            "NOK"
        }
    }

    pub fn to_trace(&self, case_id: i64, start: DateTime<FixedOffset>) -> Trace {
        let label = self.label();
        let pile = if label == "OK" { OK_PILE } else { NOK_PILE };
        let events = vec![
            Event::new(CHECK_DRAWING)
                .with_attr(RANGES_KEY, AttrValue::Text(render_pairs(&self.ranges)))
                .with_timestamp(start),
            Event::new(MEASURE)
                .with_attr(MEASURES_KEY, AttrValue::Text(render_list(&self.measures)))
                .with_timestamp(start + Duration::milliseconds(37)),
            Event::new(pile)
                .with_attr(RESULT_KEY, AttrValue::Text(label.into()))
                .with_timestamp(start + Duration::milliseconds(1250)),
        ];
        Trace {
            case_id: case_id.to_string(),
            events,
            trace_attributes: [(ID_KEY.to_string(), AttrValue::Integer(case_id))]
                .into_iter()
                .collect(),
        }
    }
}

fn draw(rng: &mut ChaCha8Rng, lo: f64, hi: f64, integer: bool) -> f64 {
    if integer {
        rng.gen_range(lo as i64..=hi as i64) as f64
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Draws instance `index`; its randomness depends only on the seed and the index.
pub fn draw_instance(config: &GeneratorConfig, index: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let int = config.integer_values;
    let j = if int {
        config.range_jitter.floor()
    } else {
        config.range_jitter
    };
    let ranges: Vec<(f64, f64)> = config
        .drawing_ranges
        .iter()
        .map(|&(lo, hi)| {
            (
                lo + draw(&mut rng, -j, j, int),
                hi + draw(&mut rng, -j, j, int),
            )
        })
        .collect();
    let mut measures: Vec<f64> = ranges
        .iter()
        .map(|&(lo, hi)| draw(&mut rng, lo, hi, int))
        .collect();
    if !rng.gen_bool(config.positive_fraction) {
        let k = rng.gen_range(0..ranges.len());
        let offset = if int {
            rng.gen_range(1..=config.out_of_range_margin.floor() as i64) as f64
        } else {
            // (0, margin]
            config.out_of_range_margin * (1.0 - rng.gen::<f64>())
        };
        let (lo, hi) = ranges[k];
        measures[k] = if rng.gen_bool(0.5) {
            lo - offset
        } else {
            hi + offset
        };
    }
    Instance { ranges, measures }
}

pub fn generate(config: &GeneratorConfig) -> Result<EventLog> {
    config.validate()?;
    let start = DateTime::parse_from_rfc3339(START).expect("valid start timestamp");
    let traces = (0..config.n_instances)
        .into_par_iter()
        .map(|i| {
            draw_instance(config, i).to_trace(i as i64 + 1, start + Duration::minutes(i as i64))
        })
        .collect();
    Ok(EventLog {
        traces,
        source: format!("synthetic seed={}", config.seed),
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log_ingest::TIMESTAMP;
    use crate::tabulate::{flatten, FlattenOptions};

    fn table1(meas: [f64; 3]) -> Instance {
        Instance {
            ranges: vec![(20.0, 25.0), (10.0, 15.0), (30.0, 35.0)],
            measures: meas.to_vec(),
        }
    }

    #[test]
    fn table_one_labels() {
        assert_eq!(table1([24.0, 12.0, 31.0]).label(), "OK");
        assert_eq!(table1([24.0, 10.0, 37.0]).label(), "NOK");
    }

    #[test]
    fn trace_shape() {
        let trace =
            table1([24.0, 12.0, 31.0]).to_trace(1, DateTime::parse_from_rfc3339(START).unwrap());
        let names: Vec<&str> = trace.events.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, [CHECK_DRAWING, MEASURE, OK_PILE]);
        assert_eq!(
            trace.events[0].attributes[RANGES_KEY],
            AttrValue::Text("[[20,25],[10,15],[30,35]]".into())
        );
        assert_eq!(
            trace.events[1].attributes[MEASURES_KEY],
            AttrValue::Text("[24,12,31]".into())
        );
        assert!(trace
            .events
            .iter()
            .all(|e| e.timestamp.is_some() && !e.attributes.contains_key(TIMESTAMP)));
    }

    fn flat(config: &GeneratorConfig) -> crate::tabulate::CaseTable {
        let mut opts = FlattenOptions::new(RESULT_KEY, "OK");
        for (k, s) in ALIASES {
            opts = opts.alias(k, s);
        }
        flatten(&generate(config).unwrap(), &opts).unwrap()
    }

    #[test]
    fn default_config_shape_and_labels() {
        let config = GeneratorConfig::default();
        let table = flat(&config);
        assert_eq!(table.n_rows(), 2000);
        let names: Vec<String> = table.columns().iter().map(|c| c.name()).collect();
        assert_eq!(
            names,
            [
                "range0", "range1", "range2", "range3", "range4", "range5", "meas0", "meas1",
                "meas2"
            ]
        );
        let gt = config.ground_truth();
        let mut positives = 0;
        for r in 0..table.n_rows() {
            let row = table.row(r);
            let truth = gt.conditions.iter().all(|c| c.eval(&row, 0.0).unwrap());
            assert_eq!(truth, table.is_positive(r));
            positives += usize::from(truth);
        }
        let frac = positives as f64 / 2000.0;
        assert!((frac - 0.5).abs() <= 0.03, "{frac}");
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let c = GeneratorConfig {
            n_instances: 50,
            ..Default::default()
        };
        assert_eq!(generate(&c).unwrap().traces, generate(&c).unwrap().traces);
        let d = GeneratorConfig {
            seed: 7,
            ..c.clone()
        };
        assert_ne!(generate(&c).unwrap().traces, generate(&d).unwrap().traces);
        // An instance does not depend on how many others are generated.
        let big = GeneratorConfig {
            n_instances: 80,
            ..c.clone()
        };
        assert_eq!(
            generate(&c).unwrap().traces[..],
            generate(&big).unwrap().traces[..50]
        );
    }

    #[test]
    fn continuous_values() {
        let c = GeneratorConfig {
            n_instances: 200,
            integer_values: false,
            ..Default::default()
        };
        let table = flat(&c);
        assert!(table
            .column("meas0")
            .unwrap()
            .values
            .iter()
            .any(|v| v.fract() != 0.0));
        for r in 0..table.n_rows() {
            let row = table.row(r);
            assert_eq!(
                c.ground_truth()
                    .conditions
                    .iter()
                    .all(|x| x.eval(&row, 0.0).unwrap()),
                table.is_positive(r)
            );
        }
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            GeneratorConfig {
                n_instances: 0,
                ..Default::default()
            },
            GeneratorConfig {
                drawing_ranges: vec![(5.0, 5.0)],
                ..Default::default()
            },
            GeneratorConfig {
                range_jitter: 5.0,
                ..Default::default()
            },
            GeneratorConfig {
                range_jitter: -1.0,
                ..Default::default()
            },
            GeneratorConfig {
                positive_fraction: 1.5,
                ..Default::default()
            },
            GeneratorConfig {
                out_of_range_margin: 0.0,
                ..Default::default()
            },
            GeneratorConfig {
                drawing_ranges: vec![(0.5, 9.0)],
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(matches!(generate(&c), Err(Error::Config(_))), "{c:?}");
        }
    }

    #[test]
    fn extreme_fractions() {
        for (p, want) in [(0.0, 0), (1.0, 100)] {
            let c = GeneratorConfig {
                n_instances: 100,
                positive_fraction: p,
                ..Default::default()
            };
            let ok = (0..100)
                .filter(|&i| draw_instance(&c, i).in_tolerance())
                .count();
            assert_eq!(ok, want);
        }
    }
}
