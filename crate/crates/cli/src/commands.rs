use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use edt_miner_core::cart::{renderers, DecisionTree};
use edt_miner_core::log_ingest::{parse_csv, parse_xes, write_xes, CsvOptions};
use edt_miner_core::metrics::{
    evaluate as score_rules, GroundTruth, MatchOptions, Scope, TABLE_HEADER,
};
use edt_miner_core::pipeline::{self, MineConfig, MineOutput};
use edt_miner_core::rules::{RuleSet, RuleStyle};
use edt_miner_core::synthgen::{self, GeneratorConfig};
use edt_miner_core::tabulate::{flatten, CaseTable, FlattenOptions, CASE_ID_HEADER, LABEL_HEADER};
use edt_miner_core::Error;
use serde::de::DeserializeOwned;

use crate::{EvaluateArgs, GenerateArgs, InputFormat, MineArgs, RenderArgs, RunManifest};

pub const RULES_FILE: &str = "rules.json";
pub const TREE_FILE: &str = "tree.json";
pub const REPORT_FILE: &str = "report.txt";
pub const TRAIN_FILE: &str = "train.csv";
pub const TEST_FILE: &str = "test.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn write_table(path: &Path, table: &CaseTable) -> Result<()> {
    let mut w = create(path)?;
    table.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

fn synthetic_flatten_options() -> FlattenOptions {
    synthgen::ALIASES.iter().fold(
        FlattenOptions::new(synthgen::RESULT_KEY, "OK"),
        |o, (k, s)| o.alias(*k, *s),
    )
}

pub fn generate(args: &GenerateArgs) -> Result<()> {
    let mut manifest = RunManifest::new("generate");
    let mut config: GeneratorConfig = match &args.config {
        Some(p) => {
            manifest.inputs.push(p.clone());
            read_toml(p)?
        }
        None => GeneratorConfig::default(),
    };
    if let Some(n) = args.n {
        config.n_instances = n;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(j) = args.jitter {
        config.range_jitter = j;
    }
    if let Some(p) = args.positive_fraction {
        config.positive_fraction = p;
    }
    if let Some(m) = args.margin {
        config.out_of_range_margin = m;
    }
    if args.continuous {
        config.integer_values = false;
    }
    manifest.config(&config);
    manifest.seed = Some(config.seed);

    let log = manifest.time("generate", || synthgen::generate(&config))?;
    manifest.time("write", || -> Result<()> {
        let mut w = create(&args.out)?;
        write_xes(&log, &mut w)?;
        w.flush()?;
        Ok(())
    })?;
    manifest.outputs.push(args.out.clone());

    if let Some(csv) = &args.csv {
        let table = flatten(&log, &synthetic_flatten_options())?;
        write_table(csv, &table)?;
        manifest.outputs.push(csv.clone());
    }
    if let Some(gt) = &args.ground_truth {
        write_file(gt, &(config.ground_truth().to_json() + "\n"))?;
        manifest.outputs.push(gt.clone());
    }
    println!("wrote {} traces to {}", log.len(), args.out.display());
    manifest.write(&sibling(&args.out, ".manifest.json"))
}

fn mine_config(args: &MineArgs) -> Result<MineConfig> {
    let mut c: MineConfig = match &args.config {
        Some(p) => read_toml(p)?,
        None => MineConfig::default(),
    };
    if let Some(a) = &args.approach {
        c.approach = a.clone();
    }
    if let Some(s) = args.split {
        c.split = s;
    }
    if let Some(s) = args.seed {
        c.seed = s;
    }
    if args.max_depth.is_some() {
        c.tree.max_depth = args.max_depth;
    }
    if let Some(v) = args.min_samples_leaf {
        c.tree.min_samples_leaf = v;
    }
    if let Some(v) = args.min_samples_split {
        c.tree.min_samples_split = v;
    }
    if let Some(v) = args.min_impurity_decrease {
        c.tree.min_impurity_decrease = v;
    }
    if let Some(v) = args.eq_epsilon {
        c.eq_epsilon = v;
    }
    if let Some(v) = args.max_pairs {
        c.max_pairs = v;
    }
    Ok(c)
}

fn load_table(args: &MineArgs, manifest: &mut RunManifest) -> Result<CaseTable> {
    let format = args.format.unwrap_or_else(|| {
        let csv = args
            .log
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        if csv {
            InputFormat::Csv
        } else {
            InputFormat::Xes
        }
    });
    match format {
        InputFormat::Xes => {
            let bytes =
                fs::read(&args.log).with_context(|| format!("reading {}", args.log.display()))?;
            let log = manifest.time("parse", || parse_xes(&bytes, &args.id_key))?;
            manifest.warn_all(log.warnings.iter().cloned());
            let mut opts = FlattenOptions::new(&args.result_attr, &args.target_class);
            opts.id_key = args.id_key.clone();
            opts.first_write = args.first_write;
            for (k, s) in &args.aliases {
                opts = opts.alias(k, s);
            }
            Ok(manifest.time("flatten", || flatten(&log, &opts))?)
        }
        InputFormat::Csv => {
            if !args.delimiter.is_ascii() {
                bail!(Error::Config(format!(
                    "delimiter `{}` is not a single byte",
                    args.delimiter
                )));
            }
            let file =
                File::open(&args.log).with_context(|| format!("reading {}", args.log.display()))?;
            let mut opts =
                CsvOptions::new(&args.id_key).label(&args.result_attr, &args.target_class);
            opts.delimiter = args.delimiter as u8;
            Ok(manifest.time("parse", || parse_csv(file, &opts))?)
        }
    }
}

fn report_text(label: &str, out: &MineOutput) -> String {
    let rs = &out.rules;
    let mut s = format!(
        "Rule {label}:\n{},\nAccuracy: {}\n\n",
        rs.render(RuleStyle::Dominant),
        edt_miner_core::metrics::percent(out.test_accuracy)
    );
    s += &format!("approach: {}\n", rs.approach);
    s += &format!("target class: {}\n", rs.class);
    s += &format!(
        "rows: {} train, {} test, {} dropped as incomplete\n",
        out.train.n_rows(),
        out.test.n_rows(),
        out.dropped_rows
    );
    s += &format!(
        "tree: {} features, depth {}, {} leaves\n",
        out.tree.features.len(),
        out.tree.depth(),
        out.tree.n_leaves()
    );
    s += &format!("test accuracy: {:.4}\n", out.test_accuracy);
    s += &format!("rules for {}: {}\n", rs.class, rs.rules.len());
    for (i, r) in rs.rules.iter().enumerate() {
        s += &format!("  [{}] support {}/{}: {r}\n", i + 1, r.support, r.covered);
    }
    for w in &out.warnings {
        s += &format!("warning: {w}\n");
    }
    s
}

pub fn mine(args: &MineArgs) -> Result<()> {
    let mut manifest = RunManifest::new("mine");
    manifest.inputs.push(args.log.clone());
    if let Some(p) = &args.config {
        manifest.inputs.push(p.clone());
    }
    let config = mine_config(args)?;
    manifest.config(&config);
    manifest.seed = Some(config.seed);

    let table = load_table(args, &mut manifest)?;
    let out = manifest.time("mine", || pipeline::mine(&table, &config))?;
    manifest.warn_all(out.warnings.iter().cloned());

    let dir = &args.out_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let label = args
        .label
        .clone()
        .unwrap_or_else(|| config.approach.to_uppercase());
    let report = report_text(&label, &out);
    write_file(&dir.join(RULES_FILE), &(out.rules.to_json() + "\n"))?;
    write_file(&dir.join(TREE_FILE), &(out.tree.to_json() + "\n"))?;
    write_file(&dir.join(REPORT_FILE), &report)?;
    write_table(&dir.join(TRAIN_FILE), &out.train)?;
    write_table(&dir.join(TEST_FILE), &out.test)?;
    for f in [RULES_FILE, TREE_FILE, REPORT_FILE, TRAIN_FILE, TEST_FILE] {
        manifest.outputs.push(dir.join(f));
    }
    print!("{report}");
    manifest.write(&dir.join(MANIFEST_FILE))
}

/// Reads a case table written by `mine` (or any CSV with `__case_id` and `__label`).
pub fn read_case_table(path: &Path, target_class: &str) -> Result<CaseTable> {
    let file = File::open(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_csv(
        file,
        &CsvOptions::new(CASE_ID_HEADER).label(LABEL_HEADER, target_class),
    )?)
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let mut manifest = RunManifest::new("evaluate");
    let rules = RuleSet::from_json(&read_text(&args.rules)?)?;
    let truth = GroundTruth::from_json(&read_text(&args.ground_truth)?)?;
    manifest
        .inputs
        .extend([args.rules.clone(), args.ground_truth.clone()]);
    let test = match &args.test_table {
        Some(p) => {
            manifest.inputs.push(p.clone());
            Some(read_case_table(p, &rules.class)?)
        }
        None => None,
    };
    let opts = MatchOptions {
        const_eps: args.const_eps,
        strictness_tolerant: args.strictness_tolerant,
        scope: if args.all_rules {
            Scope::AllRules
        } else {
            Scope::Dominant
        },
    };
    manifest.config(&opts);
    let report = manifest.time("score", || {
        score_rules(&rules, &truth, test.as_ref(), &opts)
    })?;
    manifest.warn_all(report.warnings.iter().cloned());

    let label = args
        .label
        .clone()
        .unwrap_or_else(|| rules.approach.to_uppercase());
    println!("{}", TABLE_HEADER.join("  "));
    println!("{}", report.table_row(&label));
    for n in &report.notes {
        println!("note: {n}");
    }
    for w in &report.warnings {
        log::warn!("{w}");
    }
    if let Some(out) = &args.out {
        write_file(out, &(report.to_json() + "\n"))?;
        manifest.outputs.push(out.clone());
        manifest.write(&sibling(out, ".manifest.json"))?;
    }
    Ok(())
}

pub fn render(args: &RenderArgs) -> Result<()> {
    let tree = DecisionTree::from_json(&read_text(&args.tree)?)?;
    let registry = renderers();
    let Some(renderer) = registry.get(&args.format) else {
        bail!(Error::Config(format!(
            "unknown format `{}` (available: {})",
            args.format,
            registry.names().join(", ")
        )));
    };
    let text = renderer.render(&tree);
    match &args.out {
        Some(out) => {
            write_file(out, &text)?;
            let mut manifest = RunManifest::new("render");
            manifest.inputs.push(args.tree.clone());
            manifest.outputs.push(out.clone());
            manifest.config(&serde_json::json!({ "format": args.format }));
            manifest.write(&sibling(out, ".manifest.json"))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
