//! Batch experiment runner: parameter sweeps with numeric-vs-analytic
//! comparison records, golden-section squeezing minimization, scaling fits,
//! and deterministic CSV/JSON emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, AnalyticVariant, VariantRecord};
use crate::error::{Error, Result};
use crate::quad::QuadratureSpec;
use crate::steady::{self, Model, ModelParams, ObservableRecord};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Linear,
    Log,
}

/// Strictly increasing parameter grid, linear or logarithmic.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub scale: GridScale,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::InvalidConfig("grid needs at least one point".into()));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::InvalidConfig("grid bounds must be finite".into()));
        }
        if self.points > 1 && !(self.stop > self.start) {
            return Err(Error::InvalidConfig(
                "grid must be strictly increasing (start < stop)".into(),
            ));
        }
        if self.scale == GridScale::Log && !(self.start > 0.0) {
            return Err(Error::InvalidConfig(
                "log grid requires positive start".into(),
            ));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let n = self.points;
        Ok((0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.scale {
                    GridScale::Linear => self.start + t * (self.stop - self.start),
                    GridScale::Log => {
                        (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp()
                    }
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Versioned sweep description; the CLI can override individual fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub schema_version: u32,
    pub model: Model,
    pub n_values: Vec<u32>,
    pub grid: GridSpec,
    /// analytic variants to evaluate per point; None picks the model
    /// defaults
    #[serde(default)]
    pub analytics: Option<Vec<String>>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
    /// quadrature relative tolerance override for the analytic variants
    #[serde(default)]
    pub tolerance: Option<f64>,
}

fn default_format() -> OutputFormat {
    OutputFormat::Csv
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.n_values.is_empty() {
            return Err(Error::InvalidConfig("n_values is empty".into()));
        }
        if self.n_values.contains(&0) {
            return Err(Error::InvalidConfig("n_values must be positive".into()));
        }
        self.grid.values()?;
        if let Some(names) = &self.analytics {
            for name in names {
                if AnalyticVariant::parse(name).is_none() {
                    return Err(Error::InvalidConfig(format!(
                        "unknown analytic variant '{name}'"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: SweepConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    fn variants(&self, n: u32) -> Vec<AnalyticVariant> {
        match &self.analytics {
            Some(names) => names
                .iter()
                .filter_map(|s| AnalyticVariant::parse(s))
                .collect(),
            None => AnalyticVariant::defaults_for(self.model, n),
        }
    }
}

/// One grid point of a sweep: numeric observables plus the requested
/// analytic variants. Failures are recorded, not fatal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n: u32,
    pub parameter: f64,
    pub numeric: Option<ObservableRecord>,
    pub analytics: Vec<VariantRecord>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn all_succeeded(&self) -> bool {
        self.points.iter().all(|p| p.error.is_none())
    }

    /// Fixed-order CSV: one row per (point, source).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "model,n,parameter,source,sx,sy,sz,sx2,var_x,purity,xi2,contrast,valid,note"
        )?;
        let model = match self.config.model {
            Model::Sdm => "sdm",
            Model::DrivenSuperradiance => "crf",
        };
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for p in &self.points {
            if let Some(rec) = &p.numeric {
                writeln!(
                    w,
                    "{model},{},{},numeric,{},{},{},{},{},{},{},{},true,",
                    p.n,
                    p.parameter,
                    rec.sx,
                    rec.sy,
                    rec.sz,
                    rec.sx2,
                    rec.var_x,
                    rec.purity,
                    opt(rec.xi2),
                    rec.contrast,
                )?;
            }
            for a in &p.analytics {
                writeln!(
                    w,
                    "{model},{},{},{},{},{},{},{},,,{},,{},{}",
                    p.n,
                    p.parameter,
                    a.variant,
                    opt(a.sx),
                    opt(a.sy),
                    opt(a.sz),
                    opt(a.sx2),
                    opt(a.xi2),
                    a.valid,
                    a.note.clone().unwrap_or_default().replace(',', ";"),
                )?;
            }
            if let Some(err) = &p.error {
                writeln!(
                    w,
                    "{model},{},{},error,,,,,,,,,false,{}",
                    p.n,
                    p.parameter,
                    err.replace(',', ";"),
                )?;
            }
        }
        Ok(())
    }
}

/// Runs every (N, parameter) combination of the config. Points run in
/// parallel; each point is deterministic and failures are recorded per
/// point while the sweep continues.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let grid = config.grid.values()?;
    let quad = config
        .tolerance
        .map(QuadratureSpec::with_rel_tol)
        .unwrap_or_default();

    let mut jobs: Vec<(u32, f64)> = Vec::new();
    for &n in &config.n_values {
        for &p in &grid {
            jobs.push((n, p));
        }
    }

    let points: Vec<SweepPoint> = jobs
        .par_iter()
        .map(|&(n, parameter)| {
            let params = match config.model {
                Model::Sdm => ModelParams::sdm(n, parameter),
                Model::DrivenSuperradiance => ModelParams::crf(n, parameter),
            };
            let (numeric, error) = match params {
                Ok(p) => match steady::trace_observables(&p) {
                    Ok(rec) => (Some(rec), None),
                    Err(e) => (None, Some(e.to_string())),
                },
                Err(e) => (None, Some(e.to_string())),
            };
            let analytics = config
                .variants(n)
                .into_iter()
                .map(|v| {
                    analytic::evaluate_variant(v, n, parameter, &quad).unwrap_or_else(|e| {
                        VariantRecord {
                            variant: v.name().to_string(),
                            sx: None,
                            sy: None,
                            sz: None,
                            sx2: None,
                            xi2: None,
                            valid: false,
                            note: Some(e.to_string()),
                        }
                    })
                })
                .collect();
            SweepPoint {
                n,
                parameter,
                numeric,
                analytics,
                error,
            }
        })
        .collect();

    // par_iter preserves input order, but make the contract explicit
    let mut points = points;
    points.sort_by(|a, b| {
        let ka = jobs.iter().position(|&(n, p)| n == a.n && p == a.parameter);
        let kb = jobs.iter().position(|&(n, p)| n == b.n && p == b.parameter);
        ka.cmp(&kb)
    });

    Ok(SweepResult {
        config: config.clone(),
        points,
    })
}

/// Writes a sweep result in the requested format.
pub fn emit(result: &SweepResult, format: OutputFormat, path: &Path) -> Result<()> {
    let io_err = |source: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(io_err)?;
        }
    }
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut buf = std::io::BufWriter::new(file);
    match format {
        OutputFormat::Csv => result.write_csv(&mut buf).map_err(io_err)?,
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut buf, result)?;
            buf.write_all(b"\n").map_err(io_err)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// optimum scan
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct OptimumScan {
    pub model: Model,
    pub n: u32,
    pub parameter: f64,
    pub xi2: f64,
    pub evaluations: usize,
}

/// Golden-section minimization of the numeric squeezing parameter over a
/// log-spaced bracket, refined to relative parameter tolerance `rel_tol`.
pub fn scan_optimum(
    model: Model,
    n: u32,
    bracket: (f64, f64),
    rel_tol: f64,
) -> Result<OptimumScan> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::NoMinimumInBracket { lo, hi });
    }
    let mut evals = 0usize;
    let mut f = |param: f64| -> Result<f64> {
        evals += 1;
        let params = match model {
            Model::Sdm => ModelParams::sdm(n, param)?,
            Model::DrivenSuperradiance => ModelParams::crf(n, param)?,
        };
        let rec = steady::trace_observables(&params)?;
        rec.xi2.ok_or(Error::NoMinimumInBracket { lo, hi })
    };

    // bracket sanity: the interior must undercut both edges
    let mid = (lo * hi).sqrt();
    let (f_lo, f_mid, f_hi) = (f(lo)?, f(mid)?, f(hi)?);
    if f_mid >= f_lo.min(f_hi) {
        return Err(Error::NoMinimumInBracket { lo, hi });
    }

    // golden section on ln(parameter)
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c.exp())?;
    let mut fd = f(d.exp())?;
    while (b - a) > rel_tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c.exp())?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d.exp())?;
        }
    }
    let (x, fx) = if fc < fd { (c, fc) } else { (d, fd) };
    let parameter = x.exp();
    Ok(OptimumScan {
        model,
        n,
        parameter,
        xi2: fx,
        evaluations: evals,
    })
}

// ---------------------------------------------------------------------------
// scaling fits
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitFamily {
    /// xi2_min = a N^b
    PowerLaw,
    /// xi2_min = a g(s N) with g the exact Lambert-W optimum shape of the
    /// squeezed decay model; a enters linearly, s through a nonlinear
    /// refinement
    LogCorrectedSdm,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub family: FitFamily,
    /// PowerLaw: [amplitude, exponent]; LogCorrectedSdm: [amplitude, scale]
    pub coefficients: Vec<f64>,
    /// root-mean-square residual of ln(xi2) over the fit points
    pub residual: f64,
    pub n_window: (f64, f64),
    pub points: usize,
}

/// Exact-optimum shape for the log-corrected family, continued to real N.
fn sdm_optimum_shape(nf: f64) -> Result<f64> {
    let pi = core::f64::consts::PI;
    let e = core::f64::consts::E;
    let w = crate::special::lambert_w_minus1(-pi * e / (8.0 * nf))?;
    let zmn = 0.5 * (1.0 - w);
    Ok(zmn / nf * (1.0 + 1.0 / (2.0 * zmn - 1.0)))
}

/// Least-squares fit of minimum-squeezing data in log space.
pub fn fit_scaling(points: &[(f64, f64)], family: FitFamily) -> Result<FitResult> {
    if points.len() < 4 {
        return Err(Error::RankDeficient("need at least 4 points"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    if ys.iter().any(|y| !y.is_finite()) || xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::RankDeficient("nonpositive data"));
    }
    let n_window = (
        points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
    );

    match family {
        FitFamily::PowerLaw => {
            let n = xs.len() as f64;
            let sx: f64 = xs.iter().sum();
            let sy: f64 = ys.iter().sum();
            let sxx: f64 = xs.iter().map(|x| x * x).sum();
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
            let det = n * sxx - sx * sx;
            if det.abs() < 1e-10 {
                return Err(Error::RankDeficient("all N equal"));
            }
            let slope = (n * sxy - sx * sy) / det;
            let intercept = (sy - slope * sx) / n;
            let residual = (xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| {
                    let r = y - intercept - slope * x;
                    r * r
                })
                .sum::<f64>()
                / n)
                .sqrt();
            Ok(FitResult {
                family,
                coefficients: vec![intercept.exp(), slope],
                residual,
                n_window,
                points: points.len(),
            })
        }
        FitFamily::LogCorrectedSdm => {
            // for a fixed scale s the best amplitude is closed-form; the
            // scale itself is refined by golden section on ln s
            let profile = |log_s: f64| -> Result<(f64, f64)> {
                let s = log_s.exp();
                let gs: Vec<f64> = points
                    .iter()
                    .map(|p| sdm_optimum_shape(s * p.0).map(|g| g.ln()))
                    .collect::<Result<_>>()?;
                let n = gs.len() as f64;
                let log_a = ys.iter().zip(&gs).map(|(y, g)| y - g).sum::<f64>() / n;
                let rss = ys
                    .iter()
                    .zip(&gs)
                    .map(|(y, g)| {
                        let r = y - g - log_a;
                        r * r
                    })
                    .sum::<f64>();
                Ok((rss, log_a))
            };
            let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
            let (mut a, mut b) = ((0.02f64).ln(), (50.0f64).ln());
            let mut c = b - inv_phi * (b - a);
            let mut d = a + inv_phi * (b - a);
            let mut fc = profile(c)?.0;
            let mut fd = profile(d)?.0;
            for _ in 0..60 {
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - inv_phi * (b - a);
                    fc = profile(c)?.0;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + inv_phi * (b - a);
                    fd = profile(d)?.0;
                }
            }
            let log_s = if fc < fd { c } else { d };
            let (rss, log_a) = profile(log_s)?;
            Ok(FitResult {
                family,
                coefficients: vec![log_a.exp(), log_s.exp()],
                residual: (rss / points.len() as f64).sqrt(),
                n_window,
                points: points.len(),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// oracle verification
// ---------------------------------------------------------------------------

/// Small deterministic PRNG for reproducible verification sweeps.
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// uniform in [0, 1)
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub cases: usize,
    pub max_deviation: f64,
    pub failures: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Cross-validates every closed-form steady state against the vectorized
/// Liouvillian null space on random parameter points, entrywise to 1e-8.
pub fn verify_oracles(max_n: u32, points_per_model: usize, seed: u64) -> VerifyReport {
    let mut rng = SplitMix64(seed);
    let mut cases = 0usize;
    let mut max_dev: f64 = 0.0;
    let mut failures = Vec::new();

    let mut jobs: Vec<(Model, u32, f64)> = Vec::new();
    for n in 2..=max_n.min(60) {
        for _ in 0..points_per_model {
            jobs.push((Model::Sdm, n, rng.uniform(0.05, 1.0)));
            jobs.push((Model::DrivenSuperradiance, n, rng.uniform(0.05, 2.5)));
        }
    }

    let outcomes: Vec<(String, Option<f64>)> = jobs
        .par_iter()
        .map(|&(model, n, value)| {
            let label = format!("{model:?} N={n} param={value:.4}");
            let params = match model {
                Model::Sdm => ModelParams::sdm(n, value),
                Model::DrivenSuperradiance => ModelParams::crf(n, value),
            };
            let params = match params {
                Ok(p) => p,
                Err(e) => return (format!("{label}: {e}"), None),
            };
            let closed = match steady::steady_state(&params) {
                Ok(s) => s,
                Err(e) => return (format!("{label}: closed form failed: {e}"), None),
            };
            let null = match steady::liouvillian_null_state(&params) {
                Ok(s) => s,
                Err(e) => return (format!("{label}: null space failed: {e}"), None),
            };
            let a = closed.matrix();
            let b = null.matrix();
            let mut dev: f64 = 0.0;
            for i in 0..a.nrows() {
                for j in 0..a.ncols() {
                    dev = dev.max((a.read(i, j) - b.read(i, j)).abs());
                }
            }
            (label, Some(dev))
        })
        .collect();

    for (label, dev) in outcomes {
        match dev {
            Some(d) => {
                cases += 1;
                max_dev = max_dev.max(d);
                if d > 1e-8 {
                    failures.push(format!("{label}: deviation {d:.3e}"));
                }
            }
            None => failures.push(label),
        }
    }

    VerifyReport {
        cases,
        max_deviation: max_dev,
        failures,
    }
}
