//! Simulation suites compared against reference values.
//!
//! | suite | design | desk | full |
//! |-------|--------|------|------|
//! | table1 | Gaussian ρ ∈ {0.4, 0.8}, n = 500 | 200 replicates | 1000 replicates |
//! | table2 | 15 scenarios, n = 500, null at n = 500 | 100 replicates, M = 2000 | 1000 replicates, M = 10000 |
//! | figure2 | Peano approximants d = 1..5, ∞; n = 500 and 5000 | 100 replicates, M = 2000 / 500 | 1000 replicates, M = 10000 |
//! | figure3 | bisection expanding cross d = 1..4, ∞ | as figure2 | as figure2 |
//!
//! Replicate `r` of design `t` is drawn from `child_seed(child_seed(seed, t), r)`
//! so every number is reproducible from `--seed` alone.

use std::collections::BTreeMap;

use hellcor::generators::{gen_cross, gen_gaussian, gen_peano, gen_scenario, Resolution, Scenario};
use hellcor::inference::{null_table, NullTable};
use hellcor::rng::{child_seed, Stage};
use hellcor::{estimate, BivariateSample, EstimateResult, EstimatorConfig, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Scale, Suite};
use crate::{csv_field, SCHEMA_VERSION};

const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Obtained {
    Number(f64),
    Text(String),
}

impl std::fmt::Display for Obtained {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Obtained::Number(x) => write!(f, "{x}"),
            Obtained::Text(s) => f.write_str(s),
        }
    }
}

/// One compared quantity. `pass` is set only where a tolerance applies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub item: String,
    pub statistic: String,
    pub obtained: Obtained,
    pub reference: Option<f64>,
    pub criterion: Option<String>,
    pub pass: Option<bool>,
}

impl Row {
    fn info(item: impl Into<String>, statistic: &str, obtained: f64, reference: Option<f64>) -> Self {
        Row {
            item: item.into(),
            statistic: statistic.into(),
            obtained: Obtained::Number(obtained),
            reference,
            criterion: None,
            pass: None,
        }
    }

    fn checked(mut self, criterion: impl Into<String>, pass: bool) -> Self {
        self.criterion = Some(criterion.into());
        self.pass = Some(pass);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub suite: Suite,
    pub scale: Scale,
    pub seed: u64,
    pub design: BTreeMap<String, Value>,
    pub rows: Vec<Row>,
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Table1 => "table1",
        Suite::Table2 => "table2",
        Suite::Figure2 => "figure2",
        Suite::Figure3 => "figure3",
    }
}

impl Report {
    /// `None` when no row carries a tolerance.
    pub fn all_pass(&self) -> Option<bool> {
        let flags: Vec<bool> = self.rows.iter().filter_map(|r| r.pass).collect();
        (!flags.is_empty()).then(|| flags.iter().all(|&p| p))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": "reproduce",
            "suite": suite_name(self.suite),
            "scale": match self.scale { Scale::Desk => "desk", Scale::Full => "full" },
            "seed": self.seed,
            "design": self.design,
            "rows": self.rows,
            "all_pass": self.all_pass(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("item,statistic,obtained,reference,criterion,pass\n");
        for r in &self.rows {
            let fields = [
                r.item.clone(),
                r.statistic.clone(),
                r.obtained.to_string(),
                r.reference.map(|p| p.to_string()).unwrap_or_default(),
                r.criterion.clone().unwrap_or_default(),
                r.pass.map(|p| p.to_string()).unwrap_or_default(),
            ];
            let line: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

fn replicate_seed(seed: u64, design: u64, rep: u64) -> u64 {
    child_seed(child_seed(seed, Stage::Reproduce, design), Stage::Reproduce, rep)
}

fn replicates<F>(reps: usize, seed: u64, design: u64, draw: F) -> Result<Vec<EstimateResult>>
where
    F: Fn(u64) -> Result<BivariateSample> + Sync,
{
    let config = EstimatorConfig::default();
    (0..reps as u64)
        .into_par_iter()
        .map(|r| estimate(&draw(replicate_seed(seed, design, r))?, &config))
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)).sqrt()
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn rejection_rate(etas: &[f64], table: &NullTable) -> f64 {
    etas.iter().filter(|&&e| table.p_value(e) < ALPHA).count() as f64 / etas.len() as f64
}

fn etas_of(results: &[EstimateResult]) -> Vec<f64> {
    results.iter().map(|r| r.eta).collect()
}

pub fn run_suite(suite: Suite, scale: Scale, seed: u64) -> Result<Report> {
    let full = scale == Scale::Full;
    let (design, rows) = match suite {
        Suite::Table1 => table1(seed, if full { 1000 } else { 200 })?,
        Suite::Table2 => table2(seed, if full { 1000 } else { 100 }, if full { 10_000 } else { 2000 })?,
        Suite::Figure2 | Suite::Figure3 => {
            let null_m = if full { (10_000, 10_000) } else { (2000, 500) };
            figure(suite == Suite::Figure2, seed, if full { 1000 } else { 100 }, null_m)?
        }
    };
    Ok(Report { suite, scale, seed, design, rows })
}

fn table1(seed: u64, reps: usize) -> Result<(BTreeMap<String, Value>, Vec<Row>)> {
    const N: usize = 500;
    let mut rows = Vec::new();
    // (rho, reference bias, bias bound, reference mse, mse bound)
    let designs = [(0.4, 0.003, 0.03, 0.0023, 0.006), (0.8, 0.009, 0.03, 0.00051, 0.002)];
    for (tag, &(rho, ref_bias, bias_tol, ref_mse, mse_tol)) in designs.iter().enumerate() {
        let results = replicates(reps, seed, tag as u64, |s| gen_gaussian(N, rho, s))?;
        let etas = etas_of(&results);
        let bias = mean(&etas) - rho;
        let mse = etas.iter().map(|e| (e - rho).powi(2)).sum::<f64>() / etas.len() as f64;
        let item = format!("gaussian rho={rho}");
        rows.push(
            Row::info(&item, "bias", bias, Some(ref_bias))
                .checked(format!("|bias| <= {bias_tol}"), bias.abs() <= bias_tol),
        );
        rows.push(Row::info(&item, "mse", mse, Some(ref_mse)).checked(format!("mse <= {mse_tol}"), mse <= mse_tol));
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for r in &results {
            *counts.entry(r.cutoffs).or_default() += 1;
        }
        let modal = counts.iter().max_by_key(|(c, n)| (**n, std::cmp::Reverse(**c))).map(|(c, _)| *c).unwrap();
        rows.push(Row {
            item,
            statistic: "modal cutoffs".into(),
            obtained: Obtained::Text(format!("({},{})", modal.0, modal.1)),
            reference: None,
            criterion: None,
            pass: None,
        });
    }
    let design = BTreeMap::from([
        ("n".to_string(), json!(N)),
        ("replicates".to_string(), json!(reps)),
        ("estimator".to_string(), json!(EstimatorConfig::default().canonical())),
    ]);
    Ok((design, rows))
}

/// Reference mean, standard deviation and median per scenario.
fn table2_reference(s: Scenario) -> (f64, f64, f64) {
    match s {
        Scenario::W => (0.894, 0.007, 0.894),
        Scenario::Diamond => (0.599, 0.022, 0.599),
        Scenario::Parabola => (0.798, 0.018, 0.802),
        Scenario::TwoParabolae => (0.912, 0.008, 0.911),
        Scenario::Circle => (0.839, 0.019, 0.844),
        Scenario::FourClouds => (0.080, 0.034, 0.076),
        Scenario::Cubic => (0.746, 0.028, 0.747),
        Scenario::Sine => (0.920, 0.011, 0.923),
        Scenario::Wedge => (0.755, 0.024, 0.754),
        Scenario::Cross => (0.734, 0.018, 0.736),
        Scenario::Spiral => (0.957, 0.005, 0.957),
        Scenario::Circles => (0.914, 0.012, 0.918),
        Scenario::Heavysine => (0.964, 0.002, 0.964),
        Scenario::Doppler => (0.461, 0.146, 0.428),
        Scenario::FiveClouds => (0.136, 0.159, 0.092),
    }
}

fn table2(seed: u64, reps: usize, m: usize) -> Result<(BTreeMap<String, Value>, Vec<Row>)> {
    const N: usize = 500;
    let config = EstimatorConfig::default();
    let null = null_table(N, m, &config, child_seed(seed, Stage::Null, 0))?;
    let mut rows = Vec::new();
    for (tag, &sc) in Scenario::ALL.iter().enumerate() {
        let etas = etas_of(&replicates(reps, seed, tag as u64, |s| gen_scenario(sc, N, s))?);
        let (r_mean, r_sd, r_median) = table2_reference(sc);
        let m = mean(&etas);
        let mut mean_row = Row::info(sc.name(), "mean", m, Some(r_mean));
        match sc {
            Scenario::Circle => mean_row = mean_row.checked("|mean - 0.839| <= 0.10", (m - 0.839).abs() <= 0.10),
            Scenario::W => mean_row = mean_row.checked("mean >= 0.80", m >= 0.80),
            _ => {}
        }
        rows.push(mean_row);
        rows.push(Row::info(sc.name(), "sd", sd(&etas), Some(r_sd)));
        rows.push(Row::info(sc.name(), "median", median(&etas), Some(r_median)));
        let rate = rejection_rate(&etas, &null);
        let mut rate_row = Row::info(sc.name(), "rejection rate", rate, None);
        if sc.is_independent() {
            rate_row = rate_row.checked("|rate - 0.05| <= 0.03", (rate - 0.05).abs() <= 0.03);
        }
        rows.push(rate_row);
    }
    let design = BTreeMap::from([
        ("n".to_string(), json!(N)),
        ("replicates".to_string(), json!(reps)),
        ("null_m".to_string(), json!(m)),
        ("alpha".to_string(), json!(ALPHA)),
        ("estimator".to_string(), json!(config.canonical())),
    ]);
    Ok((design, rows))
}

fn figure(
    peano: bool,
    seed: u64,
    reps: usize,
    (m_small, m_large): (usize, usize),
) -> Result<(BTreeMap<String, Value>, Vec<Row>)> {
    const SMALL: usize = 500;
    const LARGE: usize = 5000;
    let config = EstimatorConfig::default();
    let max_depth = if peano { 5 } else { 4 };
    let depths: Vec<Resolution> = (1..=max_depth).map(Resolution::Finite).chain([Resolution::Infinite]).collect();
    let null_small = null_table(SMALL, m_small, &config, child_seed(seed, Stage::Null, 0))?;
    let null_large = null_table(LARGE, m_large, &config, child_seed(seed, Stage::Null, 1))?;
    let draw = |n: usize, d: Resolution, s: u64| if peano { gen_peano(n, d, s) } else { gen_cross(n, d, s) };
    let label = if peano { "peano" } else { "cross" };

    let mut rows = Vec::new();
    let mut medians = Vec::new();
    for (i, &d) in depths.iter().enumerate() {
        let tag = 2 * i as u64;
        let small = etas_of(&replicates(reps, seed, tag, |s| draw(SMALL, d, s))?);
        let large = etas_of(&replicates(reps, seed, tag + 1, |s| draw(LARGE, d, s))?);
        let (med_s, med_l) = (median(&small), median(&large));
        medians.push((d, med_s, med_l));
        let item = format!("{label} d={d}");
        rows.push(Row::info(&item, "median n=500", med_s, None));
        rows.push(Row::info(&item, "median n=5000", med_l, None));
        let rate = rejection_rate(&small, &null_small);
        let mut rate_row = Row::info(&item, "rejection rate n=500", rate, None);
        if matches!(d, Resolution::Finite(k) if k <= 3) {
            rate_row = rate_row.checked("rate >= 0.90", rate >= 0.90);
        }
        rows.push(rate_row);
        rows.push(Row::info(&item, "rejection rate n=5000", rejection_rate(&large, &null_large), None));
    }
    let monotone = medians.windows(2).all(|w| w[1].1 <= w[0].1);
    rows.push(Row {
        item: label.into(),
        statistic: "median n=500 non-increasing in d".into(),
        obtained: Obtained::Text(if monotone { "yes" } else { "no" }.into()),
        reference: None,
        criterion: Some(format!("non-increasing over d = 1..{max_depth}, inf")),
        pass: Some(monotone),
    });
    for &(d, s, l) in medians.iter().filter(|(d, _, _)| matches!(d, Resolution::Finite(k) if *k <= 3)) {
        rows.push(
            Row::info(format!("{label} d={d}"), "median gain n=5000 over n=500", l - s, None)
                .checked("gain > 0", l > s),
        );
    }
    let design = BTreeMap::from([
        ("n".to_string(), json!([SMALL, LARGE])),
        ("replicates".to_string(), json!(reps)),
        ("null_m".to_string(), json!([m_small, m_large])),
        ("alpha".to_string(), json!(ALPHA)),
        ("depths".to_string(), json!(depths.iter().map(|d| d.to_string()).collect::<Vec<_>>())),
        ("estimator".to_string(), json!(config.canonical())),
    ]);
    Ok((design, rows))
}
