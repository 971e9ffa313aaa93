//! Significance and uncertainty for the estimated correlation.
//!
//! Under independence the copula is uniform on the square whatever the
//! margins, so the sampling distribution of the estimate for a given `n`
//! can be tabulated once by simulation. Confidence intervals come from a
//! double bootstrap that resamples the empirical beta copula, which has no
//! repeated points (pair resampling would create zero neighbour distances).

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimator::{estimate, EstimatorConfig};
use crate::ranks_nn::{pseudo_observations_with, BivariateSample};
use crate::rng::{substream, Stage};

const NULL_MAGIC: &str = "HELLCOR-NULL v1";

/// Sorted Monte-Carlo draws of the estimate under independence.
#[derive(Debug, Clone, PartialEq)]
pub struct NullTable {
    n: usize,
    seed: u64,
    config: EstimatorConfig,
    draws: Vec<f64>,
}

/// Fingerprint of everything a null table depends on.
pub fn config_hash(n: usize, config: &EstimatorConfig) -> String {
    let mut h = Sha256::new();
    h.update(format!("n={n};{};v{}", config.canonical(), env!("CARGO_PKG_VERSION")));
    h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl NullTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.draws.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    pub fn hash(&self) -> String {
        config_hash(self.n, &self.config)
    }

    /// Whether this table was built for samples of size `n` estimated with
    /// `config`.
    pub fn matches(&self, n: usize, config: &EstimatorConfig) -> bool {
        self.n == n && self.hash() == config_hash(n, config)
    }

    /// The `⌈(1−α)M⌉`-th smallest draw.
    pub fn critical_value(&self, alpha: f64) -> Result<f64> {
        Ok(self.draws[self.order_index(alpha)?])
    }

    /// Monte-Carlo standard error of [`critical_value`](Self::critical_value),
    /// from the spread of the order statistics one binomial standard
    /// deviation either side.
    pub fn critical_value_se(&self, alpha: f64) -> Result<f64> {
        let k = self.order_index(alpha)?;
        let m = self.m() as f64;
        let j = (m * alpha * (1.0 - alpha)).sqrt().ceil() as usize;
        let lo = k.saturating_sub(j);
        let hi = (k + j).min(self.m() - 1);
        Ok((self.draws[hi] - self.draws[lo]) / 2.0)
    }

    fn order_index(&self, alpha: f64) -> Result<usize> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("level alpha = {alpha} outside (0, 1)")));
        }
        let k = ((1.0 - alpha) * self.m() as f64).ceil() as usize;
        Ok(k.clamp(1, self.m()) - 1)
    }

    /// Add-one Monte-Carlo p-value `(1 + #{draws ≥ eta}) / (M + 1)`.
    pub fn p_value(&self, eta: f64) -> f64 {
        let below = self.draws.partition_point(|&d| d < eta);
        let above = self.draws.len() - below;
        (1 + above) as f64 / (self.m() + 1) as f64
    }

    /// Versioned text form: a header block then one draw per line, printed
    /// with shortest round-trip precision.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{NULL_MAGIC}");
        let _ = writeln!(out, "n={}", self.n);
        let _ = writeln!(out, "m={}", self.m());
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "config={}", self.config.canonical());
        let _ = writeln!(out, "hash={}", self.hash());
        for d in &self.draws {
            let _ = writeln!(out, "{d}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::Format(format!("null table: {what}"));
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(NULL_MAGIC) {
            return Err(bad("missing or unsupported header"));
        }
        let mut field = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| bad("truncated header"))?;
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .map(str::to_string)
                .ok_or_else(|| bad(&format!("expected '{key}=' line")))
        };
        let n: usize = field("n")?.parse().map_err(|_| bad("bad n"))?;
        let m: usize = field("m")?.parse().map_err(|_| bad("bad m"))?;
        let seed: u64 = field("seed")?.parse().map_err(|_| bad("bad seed"))?;
        let config = EstimatorConfig::from_canonical(&field("config")?)?;
        let hash = field("hash")?;
        if hash != config_hash(n, &config) {
            return Err(bad("hash does not match n and configuration"));
        }
        let draws = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.trim().parse::<f64>().map_err(|_| bad(&format!("bad draw '{l}'"))))
            .collect::<Result<Vec<f64>>>()?;
        if draws.len() != m || m == 0 {
            return Err(bad(&format!("expected {m} draws, found {}", draws.len())));
        }
        if draws.windows(2).any(|w| w[0] > w[1]) {
            return Err(bad("draws not sorted"));
        }
        Ok(Self { n, seed, config, draws })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())
            .map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
        Self::from_text(&text)
    }
}

/// Estimates for `m` independent uniform samples of size `n`. Replicate `r`
/// draws from its own substream, so the table does not depend on the
/// number of threads.
pub fn null_table(n: usize, m: usize, config: &EstimatorConfig, seed: u64) -> Result<NullTable> {
    if n < 3 {
        return Err(Error::Size(format!("null table needs n >= 3, got {n}")));
    }
    if m == 0 {
        return Err(Error::Size("null table needs at least one draw".into()));
    }
    config.validate()?;
    let mut draws = (0..m as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, Stage::Null, r);
            let rows = (0..n).map(|_| [rng.random(), rng.random()]).collect();
            estimate(&BivariateSample::new(rows)?, config).map(|e| e.eta)
        })
        .collect::<Result<Vec<f64>>>()?;
    draws.sort_by(f64::total_cmp);
    Ok(NullTable { n, seed, config: *config, draws })
}

/// Free-function form of [`NullTable::p_value`].
pub fn p_value(eta: f64, table: &NullTable) -> f64 {
    table.p_value(eta)
}

/// Sampler for the empirical beta copula of a set of ranks: pick a donor
/// row uniformly, then draw each coordinate from `Beta(r, n + 1 − r)`.
#[derive(Debug, Clone)]
pub struct BetaCopula {
    ranks: Vec<[usize; 2]>,
    by_rank: Vec<Beta<f64>>,
}

impl BetaCopula {
    /// `ranks` are 1-based, one pair per original row.
    pub fn new(ranks: &[[usize; 2]]) -> Result<Self> {
        let n = ranks.len();
        if n < 2 {
            return Err(Error::Size(format!("beta copula needs n >= 2, got {n}")));
        }
        if ranks.iter().flatten().any(|&r| r == 0 || r > n) {
            return Err(Error::Domain(format!("ranks must lie in 1..={n}")));
        }
        let by_rank = (1..=n)
            .map(|r| Beta::new(r as f64, (n + 1 - r) as f64).expect("positive shape parameters"))
            .collect();
        Ok(Self { ranks: ranks.to_vec(), by_rank })
    }

    pub fn sample<R: Rng + ?Sized>(&self, n_out: usize, rng: &mut R) -> Result<BivariateSample> {
        let n = self.ranks.len();
        let rows = (0..n_out)
            .map(|_| {
                let donor = self.ranks[rng.random_range(0..n)];
                [
                    self.by_rank[donor[0] - 1].sample(rng),
                    self.by_rank[donor[1] - 1].sample(rng),
                ]
            })
            .collect();
        BivariateSample::new(rows)
    }
}

/// `n_out` rows from the empirical beta copula of `ranks`, seeded.
pub fn sample_beta_copula(ranks: &[[usize; 2]], n_out: usize, seed: u64) -> Result<BivariateSample> {
    BetaCopula::new(ranks)?.sample(n_out, &mut substream(seed, Stage::BetaCopula, 0))
}

/// Two-sided bootstrap-t interval, clipped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BootstrapCi {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub outer: usize,
    pub inner: usize,
    /// Point estimate on the original sample.
    pub eta: f64,
    /// Bootstrap standard error of `eta`.
    pub se: f64,
    /// Outer replicates discarded because their inner spread was zero.
    pub dropped: usize,
}

fn mean_sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn bootstrap_se(
    copula: &BetaCopula,
    n: usize,
    reps: usize,
    config: &EstimatorConfig,
    rng: &mut impl Rng,
) -> Result<f64> {
    let etas = (0..reps)
        .map(|_| estimate(&copula.sample(n, rng)?, config).map(|e| e.eta))
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_sd(&etas))
}

/// Double bootstrap from the empirical beta copula.
///
/// Each of the `outer` resamples is re-estimated and studentised by the
/// spread of `inner` second-level resamples drawn from its own beta copula.
/// The scale of the original estimate comes from one more inner loop on the
/// original sample. Outer replicates with zero inner spread are dropped;
/// more than 10% dropped is a diagnostics error.
pub fn bootstrap_ci(
    sample: &BivariateSample,
    level: f64,
    outer: usize,
    inner: usize,
    config: &EstimatorConfig,
    seed: u64,
) -> Result<BootstrapCi> {
    let n = sample.len();
    if n < 4 {
        return Err(Error::Size(format!("bootstrap needs n >= 4, got {n}")));
    }
    if outer < 2 || inner < 2 {
        return Err(Error::Config(format!(
            "bootstrap needs at least 2 outer and 2 inner replicates, got {outer} and {inner}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("confidence level {level} outside (0, 1)")));
    }
    config.validate()?;
    let eta = estimate(sample, config)?.eta;
    let pseudo = pseudo_observations_with(sample, config.ties)?;
    let copula = BetaCopula::new(pseudo.ranks())?;
    let se = bootstrap_se(&copula, n, inner, config, &mut substream(seed, Stage::BootstrapScale, 0))?;

    let pivots = (0..outer as u64)
        .into_par_iter()
        .map(|b| -> Result<Option<f64>> {
            let mut rng = substream(seed, Stage::BootstrapOuter, b);
            let star = copula.sample(n, &mut rng)?;
            let eta_star = estimate(&star, config)?.eta;
            let ranks = pseudo_observations_with(&star, config.ties)?;
            let inner_copula = BetaCopula::new(ranks.ranks())?;
            let mut rng = substream(seed, Stage::BootstrapInner, b);
            let se_star = bootstrap_se(&inner_copula, n, inner, config, &mut rng)?;
            Ok((se_star > 0.0).then(|| (eta_star - eta) / se_star))
        })
        .collect::<Result<Vec<Option<f64>>>>()?;
    let dropped = pivots.iter().filter(|p| p.is_none()).count();
    if dropped * 10 > outer {
        return Err(Error::Diagnostics(format!(
            "{dropped} of {outer} outer bootstrap replicates had zero inner standard error"
        )));
    }
    let mut t: Vec<f64> = pivots.into_iter().flatten().collect();
    t.sort_by(f64::total_cmp);
    let half = (1.0 - level) / 2.0;
    let lower = (eta - se * quantile(&t, 1.0 - half)).clamp(0.0, 1.0);
    let upper = (eta - se * quantile(&t, half)).clamp(0.0, 1.0);
    Ok(BootstrapCi { lower, upper, level, outer, inner, eta, se, dropped })
}
