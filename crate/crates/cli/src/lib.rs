//! Library side of the `hellcor` command: argument types, input parsing,
//! result documents and the simulation suites.
//!
//! Exit codes are 0 on success, 2 for input or configuration errors and 3
//! for numerical or diagnostic failures.

pub mod args;
pub mod input;
pub mod reproduce;

use std::path::Path;

use hellcor::generators::{GeneratorKind, GeneratorSpec};
use hellcor::inference::{bootstrap_ci, null_table, NullTable};
use hellcor::{estimate, pearson, BivariateSample, Cutoffs, EstimatorConfig, TiePolicy, TransformKind};
use serde_json::{json, Value};

use args::{CiArgs, Cli, Command, EstimateArgs, FormatArg, PipelineArgs, PvalueArgs, RunArgs, SourceArgs, TransformArg};

/// Version of the JSON documents; see `schema/output.schema.json`.
pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Smallest null table built on request.
const MIN_NULL_DRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Input(String),
    Numeric(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Numeric(_) => EXIT_NUMERIC,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<hellcor::Error> for Failure {
    fn from(e: hellcor::Error) -> Self {
        use hellcor::Error as E;
        match e {
            E::Diagnostics(_) | E::DegenerateData(_) => Failure::Numeric(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

/// What a successful run prints.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Output {
    pub stdout: String,
    pub warnings: Vec<String>,
}

pub fn execute(cli: &Cli) -> Result<Output, Failure> {
    let threads = match &cli.command {
        Command::Estimate(a) => a.run.threads,
        Command::Pvalue(a) => a.run.threads,
        Command::Ci(a) => a.run.threads,
        Command::Reproduce(a) => a.run.threads,
    };
    match threads {
        Some(0) => Err(Failure::Input("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Failure::Numeric(format!("cannot start thread pool: {e}")))?
            .install(|| dispatch(&cli.command)),
        None => dispatch(&cli.command),
    }
}

fn dispatch(command: &Command) -> Result<Output, Failure> {
    match command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Pvalue(a) => cmd_pvalue(a),
        Command::Ci(a) => cmd_ci(a),
        Command::Reproduce(a) => {
            let report = reproduce::run_suite(a.suite, a.scale, a.run.seed)?;
            let stdout = match a.run.format {
                FormatArg::Json => render_json(&report.to_json()),
                FormatArg::Csv => report.to_csv(),
            };
            Ok(Output { stdout, warnings: Vec::new() })
        }
    }
}

pub fn pipeline_config(p: &PipelineArgs) -> Result<EstimatorConfig, Failure> {
    let cutoffs = match (p.k, p.l) {
        (Some(k), Some(l)) => Cutoffs::Fixed { k, l },
        _ => Cutoffs::CrossValidated { kmax: p.kmax, lmax: p.lmax },
    };
    let transform = match p.transform {
        TransformArg::None => TransformKind::None,
        TransformArg::Beta66 => TransformKind::Beta66,
    };
    let config = EstimatorConfig { cutoffs, transform, ties: TiePolicy::Stable };
    config.validate()?;
    Ok(config)
}

struct Loaded {
    sample: BivariateSample,
    description: Value,
}

fn load_source(source: &SourceArgs, run: &RunArgs) -> Result<Loaded, Failure> {
    let loaded = match (&source.input, &source.generator) {
        (Some(path), None) => Loaded {
            sample: input::read_sample(path).map_err(Failure::Input)?,
            description: json!({ "input": path.display().to_string() }),
        },
        (None, Some(spec)) => {
            let kind = GeneratorKind::parse(spec)?;
            let spec = GeneratorSpec { kind, n: source.n, seed: run.seed };
            Loaded {
                sample: spec.generate()?,
                description: json!({ "generator": kind.to_string(), "n": source.n, "seed": run.seed }),
            }
        }
        _ => return Err(Failure::Input("give exactly one of --input and --generator".into())),
    };
    if loaded.sample.len() < 3 {
        return Err(Failure::Input(format!(
            "need at least 3 observations, got {}",
            loaded.sample.len()
        )));
    }
    Ok(loaded)
}

fn config_json(config: &EstimatorConfig) -> Value {
    let mut v = serde_json::to_value(config).expect("configuration serialises");
    v["canonical"] = json!(config.canonical());
    v
}

fn check_level(level: f64) -> Result<(), Failure> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Failure::Input(format!("--level {level} must lie strictly between 0 and 1")))
    }
}

struct Base {
    doc: Value,
    warnings: Vec<String>,
    csv: Vec<(&'static str, String)>,
    eta: f64,
    sample: BivariateSample,
}

fn base_document(
    command: &str,
    source: &SourceArgs,
    pipeline: &PipelineArgs,
    run: &RunArgs,
) -> Result<(Base, EstimatorConfig), Failure> {
    let config = pipeline_config(pipeline)?;
    let loaded = load_source(source, run)?;
    let result = estimate(&loaded.sample, &config)?;
    let mut warnings = Vec::new();
    if result.tie_warning {
        warnings.push("ties present; broken by input order".to_string());
    }
    let rho = pearson(&loaded.sample)?;
    let n = loaded.sample.len();
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "source": loaded.description,
        "n": n,
        "config": config_json(&config),
        "estimate": {
            "eta": result.eta,
            "b_normalized": result.b_normalized,
            "b_raw": result.b_raw,
            "cutoffs": [result.cutoffs.0, result.cutoffs.1],
            "transform_used": result.transform_used,
            "tie_warning": result.tie_warning,
            "raw_mode": result.raw_mode,
        },
        "pearson": rho,
        "warnings": warnings,
    });
    let csv = vec![
        ("n", n.to_string()),
        ("eta", result.eta.to_string()),
        ("b_normalized", result.b_normalized.to_string()),
        ("b_raw", result.b_raw.to_string()),
        ("k", result.cutoffs.0.to_string()),
        ("l", result.cutoffs.1.to_string()),
        ("pearson", rho.to_string()),
        ("tie_warning", result.tie_warning.to_string()),
        ("config", config.canonical()),
    ];
    Ok((Base { doc, warnings, csv, eta: result.eta, sample: loaded.sample }, config))
}

fn finish(base: Base, format: FormatArg) -> Output {
    let stdout = match format {
        FormatArg::Json => render_json(&base.doc),
        FormatArg::Csv => render_csv_record(&base.csv),
    };
    Output { stdout, warnings: base.warnings }
}

fn cmd_estimate(a: &EstimateArgs) -> Result<Output, Failure> {
    let (base, _) = base_document("estimate", &a.source, &a.pipeline, &a.run)?;
    Ok(finish(base, a.run.format))
}

fn obtain_null(a: &PvalueArgs, n: usize, config: &EstimatorConfig) -> Result<(NullTable, &'static str), Failure> {
    if let Some(path) = a.null_cache.as_deref().filter(|p| p.exists()) {
        let table = NullTable::load(path)
            .map_err(|e| Failure::Input(format!("null cache {}: {e}", path.display())))?;
        if !table.matches(n, config) {
            return Err(Failure::Input(format!(
                "null cache {} was built for n={} with {}, not n={n} with {}",
                path.display(),
                table.n(),
                table.config().canonical(),
                config.canonical()
            )));
        }
        return Ok((table, "loaded"));
    }
    if a.m < MIN_NULL_DRAWS {
        return Err(Failure::Input(format!("--m must be at least {MIN_NULL_DRAWS}, got {}", a.m)));
    }
    let table = null_table(n, a.m, config, a.run.seed)?;
    match a.null_cache.as_deref() {
        Some(path) => {
            save_table(&table, path)?;
            Ok((table, "created"))
        }
        None => Ok((table, "none")),
    }
}

fn save_table(table: &NullTable, path: &Path) -> Result<(), Failure> {
    table
        .save(path)
        .map_err(|e| Failure::Input(format!("cannot write null cache {}: {e}", path.display())))
}

fn cmd_pvalue(a: &PvalueArgs) -> Result<Output, Failure> {
    check_level(a.level)?;
    let (mut base, config) = base_document("pvalue", &a.source, &a.pipeline, &a.run)?;
    let (table, cache) = obtain_null(a, base.sample.len(), &config)?;
    let alpha = 1.0 - a.level;
    let p = table.p_value(base.eta);
    let critical = table.critical_value(alpha)?;
    base.doc["pvalue"] = json!({
        "p_value": p,
        "level": a.level,
        "critical_value": critical,
        "significant": p < alpha,
        "m": table.m(),
        "null_seed": table.seed(),
        "null_hash": table.hash(),
        "cache": cache,
    });
    base.csv.extend([
        ("p_value", p.to_string()),
        ("level", a.level.to_string()),
        ("critical_value", critical.to_string()),
        ("m", table.m().to_string()),
    ]);
    Ok(finish(base, a.run.format))
}

fn cmd_ci(a: &CiArgs) -> Result<Output, Failure> {
    check_level(a.level)?;
    if a.b1 < 2 || a.b2 < 2 {
        return Err(Failure::Input(format!("--b1 and --b2 must be at least 2, got {} and {}", a.b1, a.b2)));
    }
    let (mut base, config) = base_document("ci", &a.source, &a.pipeline, &a.run)?;
    let ci = bootstrap_ci(&base.sample, a.level, a.b1, a.b2, &config, a.run.seed)?;
    if ci.dropped > 0 {
        base.warnings.push(format!("{} of {} outer replicates dropped (zero inner spread)", ci.dropped, ci.outer));
        base.doc["warnings"] = json!(base.warnings);
    }
    base.doc["ci"] = json!({
        "lower": ci.lower,
        "upper": ci.upper,
        "level": ci.level,
        "b1": ci.outer,
        "b2": ci.inner,
        "se": ci.se,
        "dropped": ci.dropped,
        "seed": a.run.seed,
    });
    base.csv.extend([
        ("lower", ci.lower.to_string()),
        ("upper", ci.upper.to_string()),
        ("level", ci.level.to_string()),
        ("b1", ci.outer.to_string()),
        ("b2", ci.inner.to_string()),
        ("se", ci.se.to_string()),
        ("dropped", ci.dropped.to_string()),
    ]);
    Ok(finish(base, a.run.format))
}

pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("documents serialise");
    s.push('\n');
    s
}

/// Quotes a CSV field when it contains a delimiter, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render_csv_record(pairs: &[(&str, String)]) -> String {
    let header: Vec<String> = pairs.iter().map(|(k, _)| csv_field(k)).collect();
    let values: Vec<String> = pairs.iter().map(|(_, v)| csv_field(v)).collect();
    format!("{}\n{}\n", header.join(","), values.join(","))
}
