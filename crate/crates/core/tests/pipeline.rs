use edt_miner_core::cart::{fit, TrainConfig};
use edt_miner_core::latent::generate_latent;
use edt_miner_core::log_ingest::{parse_xes, to_xes_string};
use edt_miner_core::metrics::{evaluate, MatchOptions, F1};
use edt_miner_core::pipeline::{mine, MineConfig};
use edt_miner_core::rules::extract;
use edt_miner_core::synthgen::{self, GeneratorConfig};
use edt_miner_core::tabulate::{flatten, CaseTable, Column, FlattenOptions};
use edt_miner_core::Error;
use proptest::prelude::*;

fn synthetic_options() -> FlattenOptions {
    synthgen::ALIASES.iter().fold(
        FlattenOptions::new(synthgen::RESULT_KEY, "OK"),
        |o, (k, s)| o.alias(*k, *s),
    )
}

fn synthetic_table(n: usize, seed: u64) -> (CaseTable, GeneratorConfig) {
    let config = GeneratorConfig {
        n_instances: n,
        seed,
        ..GeneratorConfig::default()
    };
    let log = synthgen::generate(&config).unwrap();
    let xes = to_xes_string(&log);
    let parsed = parse_xes(xes.as_bytes(), synthgen::ID_KEY).unwrap();
    (flatten(&parsed, &synthetic_options()).unwrap(), config)
}

#[test]
fn xes_round_trip_preserves_the_flattened_table() {
    let config = GeneratorConfig {
        n_instances: 300,
        seed: 9,
        ..GeneratorConfig::default()
    };
    let log = synthgen::generate(&config).unwrap();
    let direct = flatten(&log, &synthetic_options()).unwrap();
    let text = to_xes_string(&log);
    let reparsed = parse_xes(text.as_bytes(), synthgen::ID_KEY).unwrap();
    assert_eq!(reparsed.len(), log.len());
    assert_eq!(to_xes_string(&reparsed), text);
    let table = flatten(&reparsed, &synthetic_options()).unwrap();
    assert_eq!(table.case_ids(), direct.case_ids());
    assert_eq!(table.labels(), direct.labels());
    assert_eq!(table.columns(), direct.columns());
}

#[test]
fn edt_recovers_the_synthetic_rule() {
    let (table, config) = synthetic_table(2000, 3);
    let out = mine(&table, &MineConfig::default()).unwrap();
    let report = evaluate(
        &out.rules,
        &config.ground_truth(),
        Some(&out.test),
        &MatchOptions::default(),
    )
    .unwrap();
    assert_eq!(report.recall, 1.0);
    assert_eq!(report.precision, 1.0);
    assert_eq!(report.f1, F1::Defined(1.0));
    assert!(report.accuracy.unwrap() >= 0.99);
    assert!(out
        .rules
        .rules
        .iter()
        .flat_map(|r| &r.conditions)
        .all(|c| c.is_binary()));
}

#[test]
fn bdt_finds_only_unary_conditions() {
    let (table, config) = synthetic_table(2000, 3);
    let mine_config = MineConfig {
        approach: "bdt".into(),
        ..MineConfig::default()
    };
    let out = mine(&table, &mine_config).unwrap();
    assert!(out
        .rules
        .rules
        .iter()
        .flat_map(|r| &r.conditions)
        .all(|c| c.is_unary()));
    let report = evaluate(
        &out.rules,
        &config.ground_truth(),
        None,
        &MatchOptions::default(),
    )
    .unwrap();
    assert_eq!((report.recall, report.precision), (0.0, 0.0));
    assert_eq!(report.f1, F1::Undefined);
}

#[test]
fn mining_is_deterministic() {
    let (table, _) = synthetic_table(500, 11);
    let a = mine(&table, &MineConfig::default()).unwrap();
    let b = mine(&table, &MineConfig::default()).unwrap();
    assert_eq!(a.rules.to_json(), b.rules.to_json());
    assert_eq!(a.tree.to_json(), b.tree.to_json());
    assert_eq!(a.test.case_ids(), b.test.case_ids());
}

#[test]
fn pipeline_rejects_bad_input() {
    let (table, _) = synthetic_table(100, 1);
    let unknown = MineConfig {
        approach: "xgb".into(),
        ..MineConfig::default()
    };
    assert!(matches!(mine(&table, &unknown), Err(Error::Config(_))));

    let single = table.clone().with_target_class("missing");
    assert!(matches!(
        mine(&single, &MineConfig::default()),
        Err(Error::DegenerateLabels(_))
    ));
}

fn small_table() -> impl Strategy<Value = CaseTable> {
    (4usize..40, 2usize..5).prop_flat_map(|(rows, cols)| {
        (
            prop::collection::vec(prop::collection::vec(0u8..6, rows), cols),
            prop::collection::vec(any::<bool>(), rows),
        )
            .prop_filter("two classes", |(_, l)| {
                l.contains(&true) && l.contains(&false)
            })
            .prop_map(move |(values, labels)| {
                CaseTable::new(
                    (0..rows).map(|i| format!("c{i}")).collect(),
                    values
                        .iter()
                        .enumerate()
                        .map(|(i, v)| {
                            Column::base(format!("v{i}"), v.iter().map(|&x| x as f64).collect())
                        })
                        .collect(),
                    Vec::new(),
                    labels
                        .iter()
                        .map(|&b| if b { "OK" } else { "NOK" }.to_string())
                        .collect(),
                    "OK",
                )
                .unwrap()
            })
    })
}

proptest! {
    #[test]
    fn rules_agree_with_the_tree(table in small_table(), depth in prop::option::of(1usize..5)) {
        let (table, _) = generate_latent(&table, &Default::default()).unwrap();
        let config = TrainConfig { max_depth: depth, ..TrainConfig::default() };
        let tree = fit(&table, &config).unwrap();
        let rules = extract(&tree, "OK");
        let predicted = tree.predict_table(&table).unwrap();
        let fired = rules.classify_table(&table).unwrap();
        for (p, f) in predicted.iter().zip(&fired) {
            prop_assert_eq!(*p == "OK", *f);
        }
    }
}
