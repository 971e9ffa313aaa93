//! Seeded synthetic samples: Gaussian pairs, fifteen benchmark shapes,
//! fractal curves that approach independence, and a block copula with known
//! mutual information.
//!
//! A draw depends only on `(kind, n, seed)`. Every generator reads from the
//! substream `(seed, Generate, 0)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranks_nn::{BivariateSample, Point};
use crate::rng::{substream, Stage};

pub const PEANO_MAX_DEPTH: u32 = 8;
pub const CROSS_MAX_DEPTH: u32 = 6;

/// Depth of a fractal approximant. `Infinite` is the independent limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Finite(u32),
    Infinite,
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resolution::Finite(d) => write!(f, "{d}"),
            Resolution::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Resolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Resolution::Infinite),
            t => t
                .parse()
                .map(Resolution::Finite)
                .map_err(|_| Error::Config(format!("invalid resolution '{s}'"))),
        }
    }
}

fn check_depth(d: Resolution, max: u32, what: &str) -> Result<()> {
    match d {
        Resolution::Finite(k) if k == 0 || k > max => Err(Error::Config(format!(
            "{what} resolution must be in 1..={max} or inf, got {k}"
        ))),
        _ => Ok(()),
    }
}

/// The fifteen benchmark shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    W,
    Diamond,
    Parabola,
    TwoParabolae,
    Circle,
    FourClouds,
    Cubic,
    Sine,
    Wedge,
    Cross,
    Spiral,
    Circles,
    Heavysine,
    Doppler,
    FiveClouds,
}

impl Scenario {
    pub const ALL: [Scenario; 15] = [
        Scenario::W,
        Scenario::Diamond,
        Scenario::Parabola,
        Scenario::TwoParabolae,
        Scenario::Circle,
        Scenario::FourClouds,
        Scenario::Cubic,
        Scenario::Sine,
        Scenario::Wedge,
        Scenario::Cross,
        Scenario::Spiral,
        Scenario::Circles,
        Scenario::Heavysine,
        Scenario::Doppler,
        Scenario::FiveClouds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::W => "W",
            Scenario::Diamond => "Diamond",
            Scenario::Parabola => "Parabola",
            Scenario::TwoParabolae => "Two Parabolae",
            Scenario::Circle => "Circle",
            Scenario::FourClouds => "4 clouds",
            Scenario::Cubic => "Cubic",
            Scenario::Sine => "Sine",
            Scenario::Wedge => "Wedge",
            Scenario::Cross => "Cross",
            Scenario::Spiral => "Spiral",
            Scenario::Circles => "Circles",
            Scenario::Heavysine => "Heavysine",
            Scenario::Doppler => "Doppler",
            Scenario::FiveClouds => "5 clouds",
        }
    }

    /// Whether the two coordinates are independent by construction.
    pub fn is_independent(self) -> bool {
        self == Scenario::FourClouds
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn squash(s: &str) -> String {
    s.chars()
        .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
        .flat_map(char::to_lowercase)
        .collect()
}

impl FromStr for Scenario {
    type Err = Error;

    /// Case-insensitive; spaces, `_` and `-` are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let key = squash(s);
        Scenario::ALL
            .into_iter()
            .find(|sc| squash(sc.name()) == key)
            .ok_or_else(|| Error::Config(format!("unknown scenario '{s}'")))
    }
}

/// Which distribution to sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    Gaussian { rho: f64 },
    Scenario { name: Scenario },
    Peano { d: Resolution },
    Cross { d: Resolution },
    BlockCopula { a: f64, m: u32 },
}

impl GeneratorKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GeneratorKind::Gaussian { rho } => check_rho(rho),
            GeneratorKind::Scenario { .. } => Ok(()),
            GeneratorKind::Peano { d } => check_depth(d, PEANO_MAX_DEPTH, "Peano"),
            GeneratorKind::Cross { d } => check_depth(d, CROSS_MAX_DEPTH, "cross"),
            GeneratorKind::BlockCopula { a, m } => check_block(a, m),
        }
    }

    /// Parses `kind=<name>,key=value,...`, e.g. `kind=peano,d=3`,
    /// `kind=gaussian,rho=0.4`, `kind=scenario,name=4 clouds`,
    /// `kind=block_copula,a=0.5,m=2`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut kind = None;
        let mut params: Vec<(String, String)> = Vec::new();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got '{part}'")))?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim().to_string();
            if key == "kind" {
                kind = Some(squash(&value));
            } else {
                params.push((key, value));
            }
        }
        let kind = kind.ok_or_else(|| Error::Config("generator spec lacks kind=".into()))?;
        let take = |key: &str| -> Result<String> {
            params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::Config(format!("generator '{kind}' needs {key}=")))
        };
        let num = |key: &str| -> Result<f64> {
            let v = take(key)?;
            v.parse()
                .map_err(|_| Error::Config(format!("{key}={v} is not a number")))
        };
        let allowed: &[&str] = match kind.as_str() {
            "gaussian" => &["rho"],
            "scenario" => &["name"],
            "peano" | "cross" => &["d"],
            "blockcopula" | "block" => &["a", "m"],
            _ => return Err(Error::Config(format!("unknown generator kind '{kind}'"))),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::Config(format!("unexpected parameter '{k}' for '{kind}'")));
        }
        let parsed = match kind.as_str() {
            "gaussian" => GeneratorKind::Gaussian { rho: num("rho")? },
            "scenario" => GeneratorKind::Scenario { name: take("name")?.parse()? },
            "peano" => GeneratorKind::Peano { d: take("d")?.parse()? },
            "cross" => GeneratorKind::Cross { d: take("d")?.parse()? },
            _ => {
                let m = take("m")?;
                GeneratorKind::BlockCopula {
                    a: num("a")?,
                    m: m.parse().map_err(|_| Error::Config(format!("m={m} is not a positive integer")))?,
                }
            }
        };
        parsed.validate()?;
        Ok(parsed)
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorKind::Gaussian { rho } => write!(f, "kind=gaussian,rho={rho}"),
            GeneratorKind::Scenario { name } => write!(f, "kind=scenario,name={name}"),
            GeneratorKind::Peano { d } => write!(f, "kind=peano,d={d}"),
            GeneratorKind::Cross { d } => write!(f, "kind=cross,d={d}"),
            GeneratorKind::BlockCopula { a, m } => write!(f, "kind=block_copula,a={a},m={m}"),
        }
    }
}

/// A fully specified draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<BivariateSample> {
        match self.kind {
            GeneratorKind::Gaussian { rho } => gen_gaussian(self.n, rho, self.seed),
            GeneratorKind::Scenario { name } => gen_scenario(name, self.n, self.seed),
            GeneratorKind::Peano { d } => gen_peano(self.n, d, self.seed),
            GeneratorKind::Cross { d } => gen_cross(self.n, d, self.seed),
            GeneratorKind::BlockCopula { a, m } => gen_block_copula(self.n, a, m, self.seed),
        }
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    substream(seed, Stage::Generate, 0)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("correlation {rho} outside (-1, 1)")))
    }
}

fn draw(n: usize, seed: u64, mut row: impl FnMut(&mut ChaCha8Rng) -> Point) -> Result<BivariateSample> {
    let mut rng = rng_for(seed);
    BivariateSample::new((0..n).map(|_| row(&mut rng)).collect())
}

/// Standard bivariate normal rows with correlation `rho`.
pub fn gen_gaussian(n: usize, rho: f64, seed: u64) -> Result<BivariateSample> {
    check_rho(rho)?;
    let c = (1.0 - rho * rho).sqrt();
    draw(n, seed, |rng| {
        let a = normal(rng);
        let b = normal(rng);
        [a, rho * a + c * b]
    })
}

fn sign(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

fn heavysine(x: f64) -> f64 {
    4.0 * (4.0 * PI * x).sin() - (x - 0.3).signum() - (0.72 - x).signum()
}

fn doppler(x: f64) -> f64 {
    (x * (1.0 - x)).sqrt() * (2.1 * PI / (x + 0.05)).sin()
}

/// One row of a benchmark shape. Noise is Gaussian throughout.
fn scenario_row(s: Scenario, rng: &mut ChaCha8Rng) -> Point {
    let ux = |rng: &mut ChaCha8Rng| rng.random_range(-1.0..1.0);
    match s {
        // y = 4(x² − ½)²
        Scenario::W => {
            let x = ux(rng);
            [x, 4.0 * (x * x - 0.5).powi(2) + 0.12 * normal(rng)]
        }
        // uniform square rotated by 45 degrees
        Scenario::Diamond => {
            let (u, v) = (ux(rng), ux(rng));
            [u + v + 0.15 * normal(rng), v - u + 0.15 * normal(rng)]
        }
        Scenario::Parabola => {
            let x = ux(rng);
            [x, x * x + 0.25 * normal(rng)]
        }
        Scenario::TwoParabolae => {
            let x = ux(rng);
            [x, sign(rng) * (x * x + 0.15 + 0.08 * normal(rng))]
        }
        Scenario::Circle => {
            let t = rng.random_range(0.0..2.0 * PI);
            [t.cos() + 0.12 * normal(rng), t.sin() + 0.12 * normal(rng)]
        }
        // cloud centres chosen independently per coordinate
        Scenario::FourClouds => [sign(rng) + 0.3 * normal(rng), sign(rng) + 0.3 * normal(rng)],
        Scenario::Cubic => {
            let x = rng.random_range(-1.3..1.1);
            [x, 4.0 * x.powi(3) + x * x - 4.0 * x + 1.0 * normal(rng)]
        }
        Scenario::Sine => {
            let x = rng.random_range(0.0..1.0);
            [x, (4.0 * PI * x).sin() + 0.1 * normal(rng)]
        }
        // filled triangle |y| ≤ x with a little jitter
        Scenario::Wedge => {
            let x: f64 = rng.random_range(0.0..1.0);
            [x, x * ux(rng) + 0.02 * normal(rng)]
        }
        Scenario::Cross => {
            let x = ux(rng);
            [x, sign(rng) * x + 0.27 * normal(rng)]
        }
        // two turns of an Archimedean spiral
        Scenario::Spiral => {
            let t = rng.random_range(0.0..4.0 * PI);
            let r = t / (4.0 * PI);
            [r * t.cos() + 0.005 * normal(rng), r * t.sin() + 0.005 * normal(rng)]
        }
        Scenario::Circles => {
            let r = if rng.random::<bool>() { 1.0 } else { 2.0 };
            let t = rng.random_range(0.0..2.0 * PI);
            [r * t.cos() + 0.01 * normal(rng), r * t.sin() + 0.01 * normal(rng)]
        }
        Scenario::Heavysine => {
            let x = rng.random_range(0.0..1.0);
            [x, heavysine(x) + 0.1 * normal(rng)]
        }
        Scenario::Doppler => {
            let x = rng.random_range(0.0..1.0);
            [x, doppler(x) + 0.3 * normal(rng)]
        }
        // four corner clouds plus a small central one
        Scenario::FiveClouds => {
            if rng.random_range(0.0..1.0) < 0.1 {
                [0.1 * normal(rng), 0.1 * normal(rng)]
            } else {
                [sign(rng) + 0.3 * normal(rng), sign(rng) + 0.3 * normal(rng)]
            }
        }
    }
}

/// A seeded draw from one of the benchmark shapes.
pub fn gen_scenario(name: Scenario, n: usize, seed: u64) -> Result<BivariateSample> {
    draw(n, seed, |rng| scenario_row(name, rng))
}

/// [`gen_scenario`] addressed by display name.
pub fn gen_scenario_named(name: &str, n: usize, seed: u64) -> Result<BivariateSample> {
    gen_scenario(name.parse()?, n, seed)
}

fn independent_uniforms(n: usize, seed: u64) -> Result<BivariateSample> {
    draw(n, seed, |rng| [rng.random(), rng.random()])
}

/// Grid of the Peano approximant with `digits` base-3 digits: the digits
/// alternate between the x and y axes, starting with x.
fn peano_grid(digits: u32) -> (u64, u64) {
    (3u64.pow(digits.div_ceil(2)), 3u64.pow(digits / 2))
}

/// Point at parameter `s ∈ [0, 1]` inside cell `cell` (in curve order,
/// `cell < 3^digits`) of the Peano approximant with `digits` base-3 digits.
/// The curve enters every cell at a corner and leaves by the opposite one;
/// the approximant joins them by the cell diagonal, so arc length is
/// proportional to `cell + s` and both margins are exactly uniform.
pub fn peano_point(cell: u64, s: f64, digits: u32) -> Point {
    let (wx, wy) = peano_grid(digits);
    let (mut odd, mut even) = (0u64, 0u64);
    let (mut xi, mut yi) = (0u64, 0u64);
    for pos in (0..digits).rev() {
        let t = (cell / 3u64.pow(pos)) % 3;
        if (digits - pos) % 2 == 1 {
            xi = 3 * xi + if even % 2 == 1 { 2 - t } else { t };
            odd += t;
        } else {
            yi = 3 * yi + if odd % 2 == 1 { 2 - t } else { t };
            even += t;
        }
    }
    let xl = if even % 2 == 1 { 1.0 - s } else { s };
    let yl = if odd % 2 == 1 { 1.0 - s } else { s };
    [(xi as f64 + xl) / wx as f64, (yi as f64 + yl) / wy as f64]
}

fn cell_of(v: f64, side: u64) -> (u64, f64) {
    let scaled = v * side as f64;
    let c = (scaled.floor().max(0.0) as u64).min(side - 1);
    (c, scaled - c as f64)
}

/// Distance, in unit-square coordinates, from `p` to the diagonal the
/// approximant with `digits` digits draws through the cell containing `p`.
pub fn peano_residual(p: Point, digits: u32) -> f64 {
    let (wx, wy) = peano_grid(digits);
    let (xc, xl) = cell_of(p[0], wx);
    let (yc, yl) = cell_of(p[1], wy);
    let (mut odd, mut even) = (0u64, 0u64);
    let (mut xpos, mut ypos) = (digits.div_ceil(2), digits / 2);
    for i in 0..digits {
        if i % 2 == 0 {
            xpos -= 1;
            let d = (xc / 3u64.pow(xpos)) % 3;
            odd += if even % 2 == 1 { 2 - d } else { d };
        } else {
            ypos -= 1;
            let d = (yc / 3u64.pow(ypos)) % 3;
            even += if odd % 2 == 1 { 2 - d } else { d };
        }
    }
    let sx = if even % 2 == 1 { 1.0 - xl } else { xl };
    let sy = if odd % 2 == 1 { 1.0 - yl } else { yl };
    (sx - sy).abs() / wx.max(wy) as f64
}

/// Points spread uniformly by arc length over the depth-`d` Peano
/// approximant, which resolves `d` base-3 digits (`3^d` cells, rectangles
/// of aspect 3 when `d` is odd).
pub fn gen_peano(n: usize, d: Resolution, seed: u64) -> Result<BivariateSample> {
    check_depth(d, PEANO_MAX_DEPTH, "Peano")?;
    let Resolution::Finite(d) = d else {
        return independent_uniforms(n, seed);
    };
    let cells = 3u64.pow(d);
    draw(n, seed, |rng| {
        let cell = rng.random_range(0..cells);
        peano_point(cell, rng.random(), d)
    })
}

/// Cell grid of the depth-`d` cross: `d − 1` bisections, alternating
/// between the x and y axes, starting with x.
fn cross_grid(d: u32) -> (u64, u64) {
    (1u64 << (d / 2), 1u64 << ((d - 1) / 2))
}

/// Depth-`d` bisection expanding cross: the square is bisected `d − 1`
/// times, alternately along x and y, a cell is chosen uniformly and the
/// point falls uniformly on one of the cell's two diagonals. In binary
/// terms the leading digits removed by the bisections are independent and
/// the remaining ones coincide up to complementation.
pub fn gen_cross(n: usize, d: Resolution, seed: u64) -> Result<BivariateSample> {
    check_depth(d, CROSS_MAX_DEPTH, "cross")?;
    let Resolution::Finite(d) = d else {
        return independent_uniforms(n, seed);
    };
    let (wx, wy) = cross_grid(d);
    draw(n, seed, |rng| {
        let (i, j) = (rng.random_range(0..wx), rng.random_range(0..wy));
        let s: f64 = rng.random();
        let t = if rng.random::<bool>() { s } else { 1.0 - s };
        [(i as f64 + s) / wx as f64, (j as f64 + t) / wy as f64]
    })
}

/// Distance from `p` to the cross drawn in its depth-`d` cell, in units of
/// the larger cell width.
pub fn cross_residual(p: Point, d: u32) -> f64 {
    let (wx, wy) = cross_grid(d);
    let (_, xl) = cell_of(p[0], wx);
    let (_, yl) = cell_of(p[1], wy);
    (xl - yl).abs().min((xl + yl - 1.0).abs()) / wx.max(wy) as f64
}

fn check_block(a: f64, m: u32) -> Result<()> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!("block weight a = {a} outside (0, 1)")));
    }
    if m == 0 {
        return Err(Error::Domain("block count m must be at least 1".into()));
    }
    Ok(())
}

/// Copula uniform on `[0, 1−a)²` with mass `1 − a`, plus `m` equal diagonal
/// blocks of side `a/m` filling the top-right corner.
pub fn gen_block_copula(n: usize, a: f64, m: u32, seed: u64) -> Result<BivariateSample> {
    check_block(a, m)?;
    let base = 1.0 - a;
    let w = a / m as f64;
    draw(n, seed, |rng| {
        let (u, v): (f64, f64) = (rng.random(), rng.random());
        if rng.random::<f64>() < base {
            [base * u, base * v]
        } else {
            let nu = rng.random_range(0..m) as f64;
            [base + (nu + u) * w, base + (nu + v) * w]
        }
    })
}

/// Index of the block containing `p`: `0` for the big square, `1..=m` for
/// the diagonal blocks, `None` off the support.
pub fn block_of(p: Point, a: f64, m: u32) -> Option<u32> {
    let base = 1.0 - a;
    if p[0] < base && p[1] < base {
        return Some(0);
    }
    if p[0] < base || p[1] < base {
        return None;
    }
    let w = a / m as f64;
    let i = (((p[0] - base) / w) as u32).min(m - 1);
    let j = (((p[1] - base) / w) as u32).min(m - 1);
    (i == j).then_some(i + 1)
}

/// Mutual information of the block copula,
/// `−(1−a) ln(1−a) − a ln a + a ln m`.
pub fn block_copula_mi(a: f64, m: u32) -> Result<f64> {
    check_block(a, m)?;
    Ok(-(1.0 - a) * (1.0 - a).ln() - a * a.ln() + a * (m as f64).ln())
}
