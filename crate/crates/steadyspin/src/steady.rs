//! Exact steady states of the two collective-spin master equations.
//!
//! Both models relax onto states of the form (A^dag A)^{-1} (up to trace
//! normalization) for a banded jump operator A acting on the Dicke ladder:
//!
//! * squeezed decay (SDM): A = S_x - i zeta S_y, real with one sub- and one
//!   super-diagonal. A^T A is pentadiagonal and splits into two real
//!   symmetric tridiagonal blocks, one per parity of the ladder index. Even
//!   N makes A singular and the steady state is the pure dark state in its
//!   kernel; odd N makes (A^dag A)^{-1} a genuinely mixed state.
//! * driven superradiance (CRF): A = S^- + i N Upsilon / 2, complex
//!   bidiagonal. A^dag A is Hermitian tridiagonal and the diagonal phase
//!   rotation diag(i^j) turns it into a real symmetric tridiagonal matrix.
//!
//! The solvers work on those real tridiagonal forms, so a full spectral
//! construction costs one divide-and-conquer eigendecomposition and scalar
//! observables cost O(dim^2) through linear solves.

use faer::complex_native::c64;
use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::dicke::{self, DickeBasis, HusimiGrid, HusimiGridSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, TridiagSym};

/// Which master equation a state or sweep refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    /// squeezed decay, jump operator S_x - i zeta S_y
    #[serde(rename = "sdm")]
    Sdm,
    /// driven superradiance (cooperative resonance fluorescence):
    /// drive Omega S_x plus collective decay of S^-
    #[serde(rename = "crf")]
    DrivenSuperradiance,
}

impl Model {
    pub fn parameter_name(self) -> &'static str {
        match self {
            Model::Sdm => "zeta",
            Model::DrivenSuperradiance => "upsilon",
        }
    }
}

/// Model selector plus its control parameter. The decay rate scale is fixed
/// to 1; the steady state only depends on the dimensionless ratio.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModelParams {
    model: Model,
    n: u32,
    value: f64,
}

impl ModelParams {
    /// Squeezed decay at anisotropy `zeta` in (0, 1]. Negative anisotropy is
    /// covered by a pi rotation about S_x, and zeta = 0 has no unique steady
    /// state, so both are rejected.
    pub fn sdm(n: u32, zeta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParticleNumber(n as i64));
        }
        if !(zeta > 0.0 && zeta <= 1.0) {
            return Err(Error::ParameterRange {
                name: "zeta",
                value: zeta,
                range: "(0, 1]",
            });
        }
        Ok(Self {
            model: Model::Sdm,
            n,
            value: zeta,
        })
    }

    /// Driven superradiance at drive-to-decay ratio `upsilon` >= 0.
    /// `upsilon` = 0 is the trivial pure superradiant ground state.
    pub fn crf(n: u32, upsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParticleNumber(n as i64));
        }
        if !(upsilon >= 0.0 && upsilon.is_finite()) {
            return Err(Error::ParameterRange {
                name: "upsilon",
                value: upsilon,
                range: "[0, inf)",
            });
        }
        Ok(Self {
            model: Model::DrivenSuperradiance,
            n,
            value: upsilon,
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn zeta(&self) -> Option<f64> {
        (self.model == Model::Sdm).then_some(self.value)
    }

    pub fn upsilon(&self) -> Option<f64> {
        (self.model == Model::DrivenSuperradiance).then_some(self.value)
    }

    pub fn basis(&self) -> DickeBasis {
        DickeBasis::new(self.n).expect("validated at construction")
    }
}

/// How a density matrix was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    ClosedForm,
    DarkState,
    NullSpace,
    Synthetic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateMeta {
    pub model: Option<Model>,
    pub n: u32,
    pub parameter: Option<f64>,
    pub construction: Construction,
    /// Lindblad or kernel residual when cheaply available at build time.
    pub residual: Option<f64>,
    /// ln of the condition number of the factored Gram matrix.
    pub log_condition: Option<f64>,
}

/// Trace-one Hermitian positive semidefinite state, stored through its
/// spectral factors: rho = sum_k weights[k] |v_k><v_k|.
///
/// `log_raw` keeps the logarithms of the unnormalized resolvent eigenvalues
/// of the closed-form construction; they grow like exp(2 zeta N) and are
/// never materialized linearly.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    basis: DickeBasis,
    weights: Vec<f64>,
    vectors: Mat<c64>,
    log_raw: Option<Vec<f64>>,
    meta: StateMeta,
}

impl DensityMatrix {
    pub fn basis(&self) -> &DickeBasis {
        &self.basis
    }

    /// Normalized eigenvalues, descending.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Eigenvectors as columns, aligned with `weights`.
    pub fn vectors(&self) -> MatRef<'_, c64> {
        self.vectors.as_ref()
    }

    /// ln of the raw (unnormalized) spectral weights, when the state came
    /// from a closed-form resolvent factorization.
    pub fn log_raw(&self) -> Option<&[f64]> {
        self.log_raw.as_deref()
    }

    pub fn meta(&self) -> &StateMeta {
        &self.meta
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn purity(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    /// Pure state from an amplitude vector.
    pub fn pure(basis: DickeBasis, amplitudes: &[c64], meta: StateMeta) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                left: amplitudes.len(),
                right: basis.dim(),
            });
        }
        let norm = amplitudes
            .iter()
            .map(|a| a.abs() * a.abs())
            .sum::<f64>()
            .sqrt();
        let mut vectors = Mat::<c64>::zeros(basis.dim(), 1);
        for (i, a) in amplitudes.iter().enumerate() {
            vectors.write(i, 0, *a * c64::new(1.0 / norm, 0.0));
        }
        Ok(Self {
            basis,
            weights: vec![1.0],
            vectors,
            log_raw: None,
            meta,
        })
    }

    pub fn maximally_mixed(basis: DickeBasis) -> Self {
        let dim = basis.dim();
        let mut vectors = Mat::<c64>::zeros(dim, dim);
        for i in 0..dim {
            vectors.write(i, i, c64::new(1.0, 0.0));
        }
        let n = basis.n_particles();
        Self {
            basis,
            weights: vec![1.0 / dim as f64; dim],
            vectors,
            log_raw: None,
            meta: StateMeta {
                model: None,
                n,
                parameter: None,
                construction: Construction::Synthetic,
                residual: None,
                log_condition: None,
            },
        }
    }

    /// Spectral form of a dense Hermitian trace-class matrix. Rejects
    /// non-Hermitian input and eigenvalues below -1e-10.
    pub fn from_dense(basis: DickeBasis, mat: MatRef<'_, c64>, meta: StateMeta) -> Result<Self> {
        let dim = basis.dim();
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch {
                left: mat.nrows(),
                right: dim,
            });
        }
        let mut dev: f64 = 0.0;
        for i in 0..dim {
            for j in i..dim {
                dev = dev.max((mat.read(i, j) - mat.read(j, i).conj()).abs());
            }
        }
        if dev > 1e-9 {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let (vals, vecs) = linalg::hermitian_evd(mat)?;
        let trace: f64 = vals.iter().sum();
        let min = vals.first().copied().unwrap_or(0.0);
        if min < -1e-10 * trace.abs().max(1.0) {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        // descending, clipped, renormalized
        let mut weights: Vec<f64> = vals.iter().rev().map(|&v| v.max(0.0) / trace).collect();
        let wsum: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= wsum);
        let mut vectors = Mat::<c64>::zeros(dim, dim);
        for k in 0..dim {
            for r in 0..dim {
                vectors.write(r, k, vecs.read(r, dim - 1 - k));
            }
        }
        Ok(Self {
            basis,
            weights,
            vectors,
            log_raw: None,
            meta,
        })
    }

    /// Materializes the dense matrix sum_k w_k v_k v_k^dag.
    pub fn matrix(&self) -> Mat<c64> {
        let dim = self.dim();
        let r = self.weights.len();
        let mut scaled = Mat::<c64>::zeros(dim, r);
        for k in 0..r {
            let w = c64::new(self.weights[k], 0.0);
            for i in 0..dim {
                scaled.write(i, k, self.vectors.read(i, k) * w);
            }
        }
        &scaled * self.vectors.as_ref().adjoint()
    }

    /// Husimi distribution straight from the spectral factors:
    /// Q = sum_k w_k |<theta,phi|v_k>|^2 / 4 pi.
    pub fn husimi(&self, spec: &HusimiGridSpec) -> Result<HusimiGrid> {
        let dim = self.dim();
        let thetas: Vec<f64> = (0..spec.n_theta)
            .map(|i| (i as f64 + 0.5) * core::f64::consts::PI / spec.n_theta as f64)
            .collect();
        let phis: Vec<f64> = (0..spec.n_phi)
            .map(|j| j as f64 * 2.0 * core::f64::consts::PI / spec.n_phi as f64)
            .collect();
        let n_pts = thetas.len() * phis.len();
        let mut coh = Mat::<c64>::zeros(dim, n_pts);
        for (i, &theta) in thetas.iter().enumerate() {
            for (j, &phi) in phis.iter().enumerate() {
                let cs = dicke::coherent_state(&self.basis, theta, phi)?;
                for (r, a) in cs.amplitudes.iter().enumerate() {
                    coh.write(r, i * phis.len() + j, *a);
                }
            }
        }
        let overlaps = self.vectors.as_ref().adjoint() * coh.as_ref();
        let mut values = vec![0.0f64; n_pts];
        for (p, value) in values.iter_mut().enumerate() {
            let mut q = 0.0;
            for (k, &w) in self.weights.iter().enumerate() {
                let o = overlaps.read(k, p);
                q += w * (o.re * o.re + o.im * o.im);
            }
            *value = q / (4.0 * core::f64::consts::PI);
        }
        Ok(HusimiGrid {
            thetas,
            phis,
            values,
        })
    }

    /// Expectation value against a dense operator matrix.
    pub fn expect_dense(&self, op: MatRef<'_, c64>) -> Result<c64> {
        let dim = self.dim();
        if op.nrows() != dim || op.ncols() != dim {
            return Err(Error::DimensionMismatch {
                left: op.nrows(),
                right: dim,
            });
        }
        let mut acc = c64::new(0.0, 0.0);
        for (k, &w) in self.weights.iter().enumerate() {
            let col: Vec<c64> = (0..dim).map(|i| self.vectors.read(i, k)).collect();
            acc += dicke::expectation_vec(op, &col) * c64::new(w, 0.0);
        }
        Ok(acc)
    }

    /// Frobenius norm of the Lindblad generator applied to this state.
    pub fn lindblad_residual(&self, params: &ModelParams) -> f64 {
        let rho = self.matrix();
        let (jump, drive) = jump_and_drive(params);
        lindblad_rhs_norm(&rho, &jump, drive.as_ref(), params.n)
    }

    /// CSV of the dense entries: columns row, col, re, im.
    pub fn write_entries_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let rho = self.matrix();
        writeln!(w, "row,col,re,im")?;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let z = rho.read(i, j);
                writeln!(w, "{i},{j},{},{}", z.re, z.im)?;
            }
        }
        Ok(())
    }

    /// JSON metadata blob accompanying the CSV export.
    pub fn meta_json(&self) -> serde_json::Value {
        serde_json::json!({
            "model": self.meta.model,
            "n": self.meta.n,
            "parameter": self.meta.parameter,
            "construction": self.meta.construction,
            "residual": self.meta.residual,
            "log_condition": self.meta.log_condition,
        })
    }
}

// ---------------------------------------------------------------------------
// banded assembly
// ---------------------------------------------------------------------------

/// Parity-restricted tridiagonal block of A^T A for the SDM jump operator,
/// together with the global ladder offset it starts at (stride 2).
struct ParityBlock {
    tri: TridiagSym,
    offset: usize,
}

impl ParityBlock {
    fn global(&self, j: usize) -> usize {
        self.offset + 2 * j
    }
}

fn sdm_parity_blocks(basis: &DickeBasis, zeta: f64) -> [ParityBlock; 2] {
    let dim = basis.dim();
    let n = basis.n_particles() as usize;
    // A[g-1, g] (super) and A[g+1, g] (sub), zero outside the ladder
    let sup = |g: usize| {
        if g >= 1 && g <= n {
            0.5 * (1.0 + zeta) * basis.ladder(g)
        } else {
            0.0
        }
    };
    let sub = |g: usize| {
        if g < n {
            0.5 * (1.0 - zeta) * basis.ladder(g + 1)
        } else {
            0.0
        }
    };
    [0usize, 1].map(|parity| {
        let size = (dim - parity).div_ceil(2);
        let mut diag = Vec::with_capacity(size);
        let mut off = Vec::with_capacity(size.saturating_sub(1));
        for j in 0..size {
            let g = parity + 2 * j;
            diag.push(sup(g) * sup(g) + sub(g) * sub(g));
            if j + 1 < size {
                // <g| A^T A |g+2> routes through row g+1
                off.push(sub(g) * sup(g + 2));
            }
        }
        ParityBlock {
            tri: TridiagSym { diag, offdiag: off },
            offset: parity,
        }
    })
}

/// Real symmetric tridiagonal form of A^dag A for the CRF jump operator,
/// reached by the diagonal phase rotation U = diag(i^j).
fn crf_tridiag(basis: &DickeBasis, upsilon: f64) -> TridiagSym {
    let dim = basis.dim();
    let n = basis.n_particles() as usize;
    let c = 0.5 * basis.n_particles() as f64 * upsilon;
    let mut diag = Vec::with_capacity(dim);
    let mut off = Vec::with_capacity(dim - 1);
    for j in 0..dim {
        let l = if j >= 1 && j <= n { basis.ladder(j) } else { 0.0 };
        diag.push(c * c + l * l);
        if j + 1 < dim {
            off.push(c * basis.ladder(j + 1));
        }
    }
    TridiagSym {
        diag,
        offdiag: off,
    }
}

/// i^j phases translating rotated CRF eigenvectors back to the ladder basis.
fn crf_phase(j: usize) -> c64 {
    match j % 4 {
        0 => c64::new(1.0, 0.0),
        1 => c64::new(0.0, 1.0),
        2 => c64::new(-1.0, 0.0),
        _ => c64::new(0.0, -1.0),
    }
}

// sparse quadratic forms on the ladder --------------------------------------

fn sz_quadform(basis: &DickeBasis, v: &[c64]) -> f64 {
    basis
        .m_values()
        .iter()
        .zip(v)
        .map(|(m, a)| m * (a.re * a.re + a.im * a.im))
        .sum()
}

fn apply_sx(basis: &DickeBasis, v: &[c64], out: &mut [c64]) {
    let dim = v.len();
    for r in 0..dim {
        let mut acc = c64::new(0.0, 0.0);
        if r >= 1 {
            acc += c64::new(0.5 * basis.ladder(r), 0.0) * v[r - 1];
        }
        if r + 1 < dim {
            acc += c64::new(0.5 * basis.ladder(r + 1), 0.0) * v[r + 1];
        }
        out[r] = acc;
    }
}

fn apply_sy(basis: &DickeBasis, v: &[c64], out: &mut [c64]) {
    let dim = v.len();
    for r in 0..dim {
        let mut acc = c64::new(0.0, 0.0);
        if r + 1 < dim {
            acc += c64::new(0.0, 0.5 * basis.ladder(r + 1)) * v[r + 1];
        }
        if r >= 1 {
            acc -= c64::new(0.0, 0.5 * basis.ladder(r)) * v[r - 1];
        }
        out[r] = acc;
    }
}

fn dot_re(a: &[c64], b: &[c64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * *y)
        .fold(0.0, |s, z| s + z.re)
}

fn norm2(a: &[c64]) -> f64 {
    a.iter().map(|z| z.re * z.re + z.im * z.im).sum()
}

// ---------------------------------------------------------------------------
// observables
// ---------------------------------------------------------------------------

/// Which contrast enters the squeezing parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContrastKind {
    /// <S_z>^2 (squeezed decay)
    SzSquared,
    /// <S_z>^2 + <S_y>^2 (driven superradiance)
    Generalized,
}

/// First and second spin moments, purity and squeezing of one state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub model: Option<Model>,
    pub n: u32,
    pub parameter: Option<f64>,
    /// "numeric" for solver output, or the analytic-variant name.
    pub source: String,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    pub sx2: f64,
    pub var_x: f64,
    pub purity: f64,
    pub contrast: f64,
    pub contrast_kind: ContrastKind,
    /// None when the contrast is too small for the squeezing parameter to
    /// be defined.
    pub xi2: Option<f64>,
}

fn contrast_kind_for(model: Option<Model>) -> ContrastKind {
    match model {
        Some(Model::Sdm) => ContrastKind::SzSquared,
        _ => ContrastKind::Generalized,
    }
}

#[allow(clippy::too_many_arguments)]
fn finish_record(
    model: Option<Model>,
    n: u32,
    parameter: Option<f64>,
    sx: f64,
    sy: f64,
    sz: f64,
    sx2: f64,
    purity: f64,
) -> ObservableRecord {
    let kind = contrast_kind_for(model);
    let contrast = match kind {
        ContrastKind::SzSquared => sz * sz,
        ContrastKind::Generalized => sz * sz + sy * sy,
    };
    let var_x = sx2 - sx * sx;
    let xi2 = (contrast >= 1e-12 * n as f64).then(|| n as f64 * var_x / contrast);
    ObservableRecord {
        model,
        n,
        parameter,
        source: "numeric".into(),
        sx,
        sy,
        sz,
        sx2,
        var_x,
        purity,
        contrast,
        contrast_kind: kind,
        xi2,
    }
}

/// Spin moments, purity and squeezing of a spectral-form state.
pub fn observables(rho: &DensityMatrix) -> ObservableRecord {
    let basis = rho.basis().clone();
    let dim = rho.dim();
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sz = 0.0;
    let mut sx2 = 0.0;
    let mut col = vec![c64::new(0.0, 0.0); dim];
    let mut tmp = vec![c64::new(0.0, 0.0); dim];
    for (k, &w) in rho.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (i, c) in col.iter_mut().enumerate() {
            *c = rho.vectors().read(i, k);
        }
        sz += w * sz_quadform(&basis, &col);
        apply_sx(&basis, &col, &mut tmp);
        sx += w * dot_re(&col, &tmp);
        sx2 += w * norm2(&tmp);
        apply_sy(&basis, &col, &mut tmp);
        sy += w * dot_re(&col, &tmp);
    }
    finish_record(
        rho.meta.model,
        rho.meta.n,
        rho.meta.parameter,
        sx,
        sy,
        sz,
        sx2,
        rho.purity(),
    )
}

// ---------------------------------------------------------------------------
// solvers
// ---------------------------------------------------------------------------

/// Normalized weights (descending) and ln of raw resolvent eigenvalues from
/// the ascending eigenvalues of A^dag A.
fn weights_and_log_raw(eigs_ascending: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let neg_logs: Vec<f64> = eigs_ascending
        .iter()
        .map(|&e| -(e.max(f64::MIN_POSITIVE)).ln())
        .collect();
    let lse = linalg::log_sum_exp(&neg_logs);
    let weights = neg_logs.iter().map(|&nl| (nl - lse).exp()).collect();
    (weights, neg_logs)
}

/// Solves the dark-state condition A |D> = 0 for even N through the exact
/// two-term recursion the banded structure of A imposes on every second
/// ladder amplitude. Amplitudes are accumulated in the log domain, so large
/// zeta N poses no overflow risk.
pub fn sdm_dark_state_even(params: &ModelParams) -> Result<DensityMatrix> {
    let zeta = params.zeta().ok_or(Error::ParameterRange {
        name: "model",
        value: 0.0,
        range: "sdm",
    })?;
    let n = params.n();
    if n % 2 != 0 {
        return Err(Error::ParameterRange {
            name: "n",
            value: n as f64,
            range: "even",
        });
    }
    let basis = params.basis();
    let dim = basis.dim();

    // v[g+2] = -[(1-zeta) l_{g+1}] / [(1+zeta) l_{g+2}] v[g], g = 0, 2, ...
    let mut log_abs = vec![f64::NEG_INFINITY; dim];
    let mut sign = vec![0.0f64; dim];
    log_abs[0] = 0.0;
    sign[0] = 1.0;
    let mut g = 0usize;
    while g + 2 < dim {
        let ratio = (1.0 - zeta) * basis.ladder(g + 1) / ((1.0 + zeta) * basis.ladder(g + 2));
        log_abs[g + 2] = log_abs[g] + ratio.ln();
        sign[g + 2] = -sign[g];
        g += 2;
    }

    let peak = log_abs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut v = vec![c64::new(0.0, 0.0); dim];
    for i in 0..dim {
        if sign[i] != 0.0 {
            v[i] = c64::new(sign[i] * (log_abs[i] - peak).exp(), 0.0);
        }
    }
    let nrm = norm2(&v).sqrt();
    v.iter_mut().for_each(|z| *z *= c64::new(1.0 / nrm, 0.0));

    // || A v ||: row r of A reads (1-z)/2 l_r v_{r-1} + (1+z)/2 l_{r+1} v_{r+1}
    let mut res2 = 0.0;
    for r in 0..dim {
        let mut acc = 0.0;
        if r >= 1 {
            acc += 0.5 * (1.0 - zeta) * basis.ladder(r) * v[r - 1].re;
        }
        if r + 1 < dim {
            acc += 0.5 * (1.0 + zeta) * basis.ladder(r + 1) * v[r + 1].re;
        }
        res2 += acc * acc;
    }
    let residual = res2.sqrt();
    let tolerance = 1e-10;
    if residual > tolerance {
        return Err(Error::ResidualTooLarge {
            residual,
            tolerance,
        });
    }

    let meta = StateMeta {
        model: Some(Model::Sdm),
        n,
        parameter: Some(zeta),
        construction: Construction::DarkState,
        residual: Some(residual),
        log_condition: None,
    };
    DensityMatrix::pure(basis, &v, meta)
}

/// One inverse-iteration pass seeded by the divide-and-conquer vector, then
/// an exact quadratic form for the bottom eigenvalue. D&C only certifies
/// absolute accuracy relative to ||T||, far too coarse when the bottom
/// eigenvalue sits at exp(-2 zeta N).
fn refine_block_smallest(
    tri: &TridiagSym,
    u: &Mat<f64>,
    quadform: impl Fn(&[f64]) -> f64,
) -> (f64, Vec<f64>) {
    let nb = tri.n();
    let seed: Vec<f64> = (0..nb).map(|i| u.read(i, 0)).collect();
    let (_, w) = linalg::tridiag_smallest_pair(tri, Some(&seed), 1);
    let e = quadform(&w);
    (e, w)
}

struct BlockEig {
    eig: f64,
    block: usize,
    col: usize,
}

/// Exact mixed steady state of the SDM for odd N: the normalized spectral
/// inverse of A^dag A with A = S_x - i zeta S_y.
pub fn sdm_steady_state_odd(params: &ModelParams) -> Result<DensityMatrix> {
    let zeta = params.zeta().ok_or(Error::ParameterRange {
        name: "model",
        value: 0.0,
        range: "sdm",
    })?;
    let n = params.n();
    if n % 2 != 1 {
        return Err(Error::ParameterRange {
            name: "n",
            value: n as f64,
            range: "odd",
        });
    }
    let basis = params.basis();
    let dim = basis.dim();
    let blocks = sdm_parity_blocks(&basis, zeta);

    let mut decomps = Vec::new();
    let mut entries: Vec<BlockEig> = Vec::new();
    for (bi, block) in blocks.iter().enumerate() {
        let (mut eigs, u) = linalg::tridiag_evd(&block.tri)?;
        let (e0, w0) = refine_block_smallest(&block.tri, &u, |w| {
            let mut full = vec![0.0; dim];
            for (j, &x) in w.iter().enumerate() {
                full[block.global(j)] = x;
            }
            let mut res2 = 0.0;
            for r in 0..dim {
                let mut acc = 0.0;
                if r >= 1 {
                    acc += 0.5 * (1.0 - zeta) * basis.ladder(r) * full[r - 1];
                }
                if r + 1 < dim {
                    acc += 0.5 * (1.0 + zeta) * basis.ladder(r + 1) * full[r + 1];
                }
                res2 += acc * acc;
            }
            res2 / w.iter().map(|x| x * x).sum::<f64>()
        });
        eigs[0] = e0;
        for (col, &eig) in eigs.iter().enumerate() {
            entries.push(BlockEig {
                eig,
                block: bi,
                col,
            });
        }
        decomps.push((u, w0));
    }

    entries.sort_by(|a, b| a.eig.total_cmp(&b.eig));
    let eigs: Vec<f64> = entries.iter().map(|e| e.eig).collect();
    let (weights, log_raw) = weights_and_log_raw(&eigs);

    let mut vectors = Mat::<c64>::zeros(dim, dim);
    for (k, be) in entries.iter().enumerate() {
        let block = &blocks[be.block];
        let (u, w0) = &decomps[be.block];
        for j in 0..block.tri.n() {
            let x = if be.col == 0 { w0[j] } else { u.read(j, be.col) };
            vectors.write(block.global(j), k, c64::new(x, 0.0));
        }
    }

    let log_condition = eigs
        .last()
        .map(|&emax| emax.ln() - eigs[0].max(f64::MIN_POSITIVE).ln());
    Ok(DensityMatrix {
        basis,
        weights,
        vectors,
        log_raw: Some(log_raw),
        meta: StateMeta {
            model: Some(Model::Sdm),
            n,
            parameter: Some(zeta),
            construction: Construction::ClosedForm,
            residual: None,
            log_condition,
        },
    })
}

/// Exact steady state of driven superradiance: the normalized spectral
/// inverse of A^dag A with A = S^- + i N Upsilon / 2. Upsilon = 0 returns
/// the superradiant ground-state projector.
pub fn crf_steady_state(params: &ModelParams) -> Result<DensityMatrix> {
    let upsilon = params.upsilon().ok_or(Error::ParameterRange {
        name: "model",
        value: 0.0,
        range: "crf",
    })?;
    let n = params.n();
    let basis = params.basis();
    let dim = basis.dim();

    if upsilon == 0.0 {
        let mut v = vec![c64::new(0.0, 0.0); dim];
        v[0] = c64::new(1.0, 0.0);
        let meta = StateMeta {
            model: Some(Model::DrivenSuperradiance),
            n,
            parameter: Some(0.0),
            construction: Construction::ClosedForm,
            residual: Some(0.0),
            log_condition: None,
        };
        return DensityMatrix::pure(basis, &v, meta);
    }

    let tri = crf_tridiag(&basis, upsilon);
    let (mut eigs, u) = linalg::tridiag_evd(&tri)?;
    let c = 0.5 * n as f64 * upsilon;
    let (e0, w0) = refine_block_smallest(&tri, &u, |w| {
        // in the rotated basis |(A v)_r|^2 = (c w_r + l_{r+1} w_{r+1})^2
        let mut res2 = 0.0;
        for r in 0..dim {
            let mut row = c * w[r];
            if r + 1 < dim {
                row += basis.ladder(r + 1) * w[r + 1];
            }
            res2 += row * row;
        }
        res2 / w.iter().map(|x| x * x).sum::<f64>()
    });
    eigs[0] = e0;

    let (weights, log_raw) = weights_and_log_raw(&eigs);
    let mut vectors = Mat::<c64>::zeros(dim, dim);
    for k in 0..dim {
        for j in 0..dim {
            let x = if k == 0 { w0[j] } else { u.read(j, k) };
            vectors.write(j, k, crf_phase(j) * c64::new(x, 0.0));
        }
    }

    let log_condition = eigs
        .last()
        .map(|&emax| emax.ln() - eigs[0].max(f64::MIN_POSITIVE).ln());
    Ok(DensityMatrix {
        basis,
        weights,
        vectors,
        log_raw: Some(log_raw),
        meta: StateMeta {
            model: Some(Model::DrivenSuperradiance),
            n,
            parameter: Some(upsilon),
            construction: Construction::ClosedForm,
            residual: None,
            log_condition,
        },
    })
}

/// Steady state through whichever exact construction the parameters call
/// for: dark state (even-N SDM), mixed resolvent (odd-N SDM), or the CRF
/// resolvent.
pub fn steady_state(params: &ModelParams) -> Result<DensityMatrix> {
    match (params.model(), params.n() % 2) {
        (Model::Sdm, 0) => sdm_dark_state_even(params),
        (Model::Sdm, _) => sdm_steady_state_odd(params),
        (Model::DrivenSuperradiance, _) => crf_steady_state(params),
    }
}

// ---------------------------------------------------------------------------
// Liouvillian oracle
// ---------------------------------------------------------------------------

fn jump_and_drive(params: &ModelParams) -> (Mat<c64>, Option<Mat<c64>>) {
    let basis = params.basis();
    let ops = dicke::build_operators(&basis);
    match params.model() {
        Model::Sdm => {
            let zeta = params.value();
            let dim = basis.dim();
            let mut jump = Mat::<c64>::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    let v = ops.sx.matrix.read(i, j)
                        - c64::i() * c64::new(zeta, 0.0) * ops.sy.matrix.read(i, j);
                    jump.write(i, j, v);
                }
            }
            (jump, None)
        }
        Model::DrivenSuperradiance => {
            let upsilon = params.value();
            let dim = basis.dim();
            let mut drive = Mat::<c64>::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    drive.write(i, j, ops.sx.matrix.read(i, j) * c64::new(0.5 * upsilon, 0.0));
                }
            }
            (ops.sminus.matrix.clone(), Some(drive))
        }
    }
}

/// || -i[H, rho] + (1/N)(J rho J^dag - {J^dag J, rho}/2) ||_F
fn lindblad_rhs_norm(rho: &Mat<c64>, jump: &Mat<c64>, drive: Option<&Mat<c64>>, n: u32) -> f64 {
    let jd = jump.as_ref().adjoint().to_owned();
    let jdj = &jd * jump;
    let gamma = c64::new(1.0 / n as f64, 0.0);
    let half = c64::new(0.5, 0.0);
    let sandwich = (jump * rho) * jd.as_ref();
    let left = &jdj * rho;
    let right = rho * &jdj;
    let mut rhs = Mat::<c64>::zeros(rho.nrows(), rho.ncols());
    for i in 0..rhs.nrows() {
        for j in 0..rhs.ncols() {
            let v = (sandwich.read(i, j) - half * (left.read(i, j) + right.read(i, j))) * gamma;
            rhs.write(i, j, v);
        }
    }
    if let Some(h) = drive {
        let comm = h * rho - rho * h;
        for i in 0..rhs.nrows() {
            for j in 0..rhs.ncols() {
                rhs.write(i, j, rhs.read(i, j) - c64::i() * comm.read(i, j));
            }
        }
    }
    let mut acc = 0.0f64;
    for i in 0..rhs.nrows() {
        for j in 0..rhs.ncols() {
            let z = rhs.read(i, j);
            acc += z.re * z.re + z.im * z.im;
        }
    }
    acc.sqrt()
}

/// Dense vectorized Liouvillian in the column-major convention
/// vec(rho)_(i + d j) = rho_ij, so vec(A rho B) = (B^T kron A) vec(rho).
///
/// Parameter ranges are not validated here so the verification suite can
/// probe the symmetry-related branches (negative zeta).
pub fn liouvillian_matrix(model: Model, n: u32, value: f64) -> Result<Mat<c64>> {
    if n == 0 {
        return Err(Error::InvalidParticleNumber(0));
    }
    if n > 60 {
        return Err(Error::ParameterRange {
            name: "n",
            value: n as f64,
            range: "<= 60 (superoperator is (N+1)^2 x (N+1)^2)",
        });
    }
    let params = ModelParams { model, n, value };
    let (jump, drive) = jump_and_drive(&params);
    let d = n as usize + 1;
    let gamma = c64::new(1.0 / n as f64, 0.0);
    let half = c64::new(0.5, 0.0);

    let jd = jump.as_ref().adjoint().to_owned();
    let jdj = &jd * &jump;

    let mut l = Mat::<c64>::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let row = i + d * j;
            for k in 0..d {
                for m in 0..d {
                    let col = k + d * m;
                    // J rho J^dag -> conj(J)[j, m] J[i, k]
                    let mut val = jump.read(j, m).conj() * jump.read(i, k);
                    if j == m {
                        val -= half * jdj.read(i, k); // -(1/2) J^dag J rho
                    }
                    if i == k {
                        val -= half * jdj.read(m, j); // -(1/2) rho J^dag J
                    }
                    let mut val = val * gamma;
                    if let Some(h) = &drive {
                        if j == m {
                            val -= c64::i() * h.read(i, k); // -i H rho
                        }
                        if i == k {
                            val += c64::i() * h.read(m, j); // +i rho H
                        }
                    }
                    l.write(row, col, val);
                }
            }
        }
    }
    Ok(l)
}

/// Brute-force steady state: the right null vector of the vectorized
/// Liouvillian, reshaped, hermitized and trace-normalized. N <= 60.
pub fn liouvillian_null_state(params: &ModelParams) -> Result<DensityMatrix> {
    let l = liouvillian_matrix(params.model(), params.n(), params.value())?;
    let d = params.n() as usize + 1;
    let svd = linalg::svd_complex(l.as_ref(), false)?;
    let sigma = &svd.s;
    let scale = sigma[0].max(f64::MIN_POSITIVE);
    let second_smallest = sigma[sigma.len() - 2];
    if second_smallest <= 1e-10 * scale {
        return Err(Error::DegenerateNullSpace {
            second: second_smallest,
        });
    }

    let mut rho = Mat::<c64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            rho.write(i, j, svd.v.read(i + d * j, d * d - 1));
        }
    }
    // fix the arbitrary global phase via the trace, then hermitize
    let mut tr = c64::new(0.0, 0.0);
    for i in 0..d {
        tr += rho.read(i, i);
    }
    if tr.abs() < 1e-12 {
        return Err(Error::DegenerateNullSpace { second: tr.abs() });
    }
    let inv_tr = tr.conj() * c64::new(1.0 / (tr.abs() * tr.abs()), 0.0);
    let mut herm = Mat::<c64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            herm.write(i, j, rho.read(i, j) * inv_tr);
        }
    }
    for i in 0..d {
        for j in 0..d {
            let z = (herm.read(i, j) + herm.read(j, i).conj()) * c64::new(0.5, 0.0);
            rho.write(i, j, z);
        }
    }

    let basis = params.basis();
    let meta = StateMeta {
        model: Some(params.model()),
        n: params.n(),
        parameter: Some(params.value()),
        construction: Construction::NullSpace,
        residual: None,
        log_condition: None,
    };
    let mut state = DensityMatrix::from_dense(basis, rho.as_ref(), meta)?;
    let residual = state.lindblad_residual(params);
    if residual > 1e-10 {
        return Err(Error::ResidualTooLarge {
            residual,
            tolerance: 1e-10,
        });
    }
    state.meta.residual = Some(residual);
    Ok(state)
}

// ---------------------------------------------------------------------------
// fast trace-route observables
// ---------------------------------------------------------------------------

/// Symmetric operator stored by diagonals: main, first and second band.
/// Bands are indexed by the leftmost global row they touch.
struct Bands {
    diag: Vec<f64>,
    band2: Vec<f64>,
}

fn sx2_bands(basis: &DickeBasis, sign2: f64) -> Bands {
    let dim = basis.dim();
    let n = basis.n_particles() as usize;
    let l = |i: usize| {
        if i >= 1 && i <= n {
            basis.ladder(i)
        } else {
            0.0
        }
    };
    let diag = (0..dim)
        .map(|g| 0.25 * (l(g) * l(g) + l(g + 1) * l(g + 1)))
        .collect();
    let band2 = (0..dim.saturating_sub(2))
        .map(|g| sign2 * 0.25 * l(g + 1) * l(g + 2))
        .collect();
    Bands { diag, band2 }
}

struct TraceAccumulator {
    z: f64,
    z2: f64,
    sz: f64,
    sy: f64,
    sx2: f64,
}

/// Accumulates Tr(B^{-1}), Tr(B^{-2}) and Tr(B^{-1} G) for banded G over one
/// tridiagonal block, one unit-column solve at a time.
#[allow(clippy::too_many_arguments)]
fn accumulate_traces(
    ldl: &linalg::TridiagLdl,
    nb: usize,
    stride: usize,
    global: impl Fn(usize) -> usize,
    m_values: &[f64],
    sx2: &Bands,
    sy1: Option<&[f64]>,
    acc: &mut TraceAccumulator,
) {
    // band-2 couplings sit two global steps away: one block step in the
    // stride-2 parity blocks, two block steps in the stride-1 CRF chain
    let step2 = if stride == 2 { 1 } else { 2 };
    let mut x = vec![0.0f64; nb];
    for j in 0..nb {
        x.iter_mut().for_each(|v| *v = 0.0);
        x[j] = 1.0;
        ldl.solve_in_place(&mut x);

        let g = global(j);
        acc.z += x[j];
        acc.z2 += x.iter().map(|v| v * v).sum::<f64>();
        acc.sz += x[j] * m_values[g];
        acc.sx2 += x[j] * sx2.diag[g];
        if j >= step2 {
            acc.sx2 += x[j - step2] * sx2.band2[g - 2];
        }
        if j + step2 < nb {
            acc.sx2 += x[j + step2] * sx2.band2[g];
        }
        if let Some(sy) = sy1 {
            if j >= 1 {
                acc.sy += x[j - 1] * sy[g - 1];
            }
            if j + 1 < nb {
                acc.sy += x[j + 1] * sy[g];
            }
        }
    }
}

/// Observables of the steady state evaluated through tridiagonal linear
/// solves, without any eigendecomposition: O(dim^2) per parameter point.
///
/// Falls back to the dominant-eigenvector (pure-state) evaluation when the
/// resolvent is too ill-conditioned for the solves; that only happens deep
/// in the polarized phase, where the bulk weight is below ~1e-9 anyway.
pub fn trace_observables(params: &ModelParams) -> Result<ObservableRecord> {
    let n = params.n();
    let basis = params.basis();
    let dim = basis.dim();

    match params.model() {
        Model::Sdm if n % 2 == 0 => {
            let state = sdm_dark_state_even(params)?;
            return Ok(observables(&state));
        }
        Model::DrivenSuperradiance if params.value() == 0.0 => {
            let state = crf_steady_state(params)?;
            return Ok(observables(&state));
        }
        _ => {}
    }

    let blocks: Vec<(TridiagSym, usize)> = match params.model() {
        Model::Sdm => sdm_parity_blocks(&basis, params.value())
            .into_iter()
            .map(|b| (b.tri, b.offset))
            .collect(),
        Model::DrivenSuperradiance => vec![(crf_tridiag(&basis, params.value()), 0)],
    };
    let stride = if blocks.len() == 2 { 2 } else { 1 };

    // conditioning probe: smallest eigenvalue across blocks
    let mut e0 = f64::INFINITY;
    let mut scale: f64 = 0.0;
    for (tri, _) in &blocks {
        let (rq, _) = linalg::tridiag_smallest_pair(tri, None, 4);
        e0 = e0.min(rq.abs());
        scale = scale.max(tri.max_abs());
    }
    if !(e0 > scale * 1e-13) {
        return trace_observables_pure(params, &basis, &blocks, stride);
    }

    let sign2 = match params.model() {
        Model::Sdm => 1.0,
        Model::DrivenSuperradiance => -1.0,
    };
    let sx2 = sx2_bands(&basis, sign2);
    let sy1: Option<Vec<f64>> = match params.model() {
        Model::Sdm => None,
        Model::DrivenSuperradiance => Some(
            (0..dim.saturating_sub(1))
                .map(|g| -0.5 * basis.ladder(g + 1))
                .collect(),
        ),
    };

    let mut acc = TraceAccumulator {
        z: 0.0,
        z2: 0.0,
        sz: 0.0,
        sy: 0.0,
        sx2: 0.0,
    };
    for (tri, offset) in &blocks {
        let ldl = match linalg::tridiag_ldl(tri, 0.0) {
            Some(l) => l,
            None => return trace_observables_pure(params, &basis, &blocks, stride),
        };
        accumulate_traces(
            &ldl,
            tri.n(),
            stride,
            |j| offset + stride * j,
            basis.m_values(),
            &sx2,
            sy1.as_deref(),
            &mut acc,
        );
    }

    let z = acc.z;
    Ok(finish_record(
        Some(params.model()),
        n,
        Some(params.value()),
        0.0,
        acc.sy / z,
        acc.sz / z,
        acc.sx2 / z,
        acc.z2 / (z * z),
    ))
}

fn trace_observables_pure(
    params: &ModelParams,
    basis: &DickeBasis,
    blocks: &[(TridiagSym, usize)],
    stride: usize,
) -> Result<ObservableRecord> {
    let dim = basis.dim();
    let mut best: Option<(f64, Vec<f64>, usize)> = None;
    for (tri, offset) in blocks {
        let (rq, w) = linalg::tridiag_smallest_pair(tri, None, 6);
        if best.as_ref().is_none_or(|b| rq < b.0) {
            best = Some((rq, w, *offset));
        }
    }
    let (_, w, offset) = best.expect("at least one block");

    let mut v = vec![c64::new(0.0, 0.0); dim];
    for (j, &x) in w.iter().enumerate() {
        let g = offset + stride * j;
        let phase = match params.model() {
            Model::Sdm => c64::new(1.0, 0.0),
            Model::DrivenSuperradiance => crf_phase(g),
        };
        v[g] = phase * c64::new(x, 0.0);
    }
    let meta = StateMeta {
        model: Some(params.model()),
        n: params.n(),
        parameter: Some(params.value()),
        construction: Construction::ClosedForm,
        residual: None,
        log_condition: None,
    };
    let state = DensityMatrix::pure(basis.clone(), &v, meta)?;
    Ok(observables(&state))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entrywise_close(a: &Mat<c64>, b: &Mat<c64>, tol: f64) -> bool {
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if (a.read(i, j) - b.read(i, j)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::sdm(10, 0.0).is_err());
        assert!(ModelParams::sdm(10, -0.3).is_err());
        assert!(ModelParams::sdm(10, 1.5).is_err());
        assert!(ModelParams::sdm(0, 0.5).is_err());
        assert!(ModelParams::crf(10, -0.1).is_err());
        assert!(ModelParams::crf(10, 0.0).is_ok());
        assert!(ModelParams::sdm(10, 1.0).is_ok());
    }

    #[test]
    fn dark_state_at_unit_zeta_is_south_pole() {
        let params = ModelParams::sdm(8, 1.0).unwrap();
        let state = sdm_dark_state_even(&params).unwrap();
        assert!((state.vectors().read(0, 0).abs() - 1.0).abs() < 1e-12);
        for i in 1..state.dim() {
            assert!(state.vectors().read(i, 0).abs() < 1e-12);
        }
        assert_eq!(state.weights(), &[1.0]);
    }

    #[test]
    fn dark_state_small_zeta_squeezes_sx() {
        let params = ModelParams::sdm(4, 1e-6).unwrap();
        let state = sdm_dark_state_even(&params).unwrap();
        let rec = observables(&state);
        assert!(rec.sx2 < 1e-3, "sx2 = {}", rec.sx2);
        assert!(rec.sx.abs() < 1e-12);
    }

    #[test]
    fn dark_state_rejects_odd_n() {
        let params = ModelParams::sdm(5, 0.4).unwrap();
        assert!(sdm_dark_state_even(&params).is_err());
    }

    #[test]
    fn dark_state_matches_bessel_regime() {
        // N = 1000, zeta N = 5: <S_z> close to the modified-Bessel ratio form
        let params = ModelParams::sdm(1000, 5.0 / 1000.0).unwrap();
        let state = sdm_dark_state_even(&params).unwrap();
        let rec = observables(&state);
        let ratio = crate::special::bessel_ratio_i1_i0(5.0).unwrap();
        let want = -500.0 * ratio;
        assert!(
            (rec.sz - want).abs() <= 0.01 * want.abs(),
            "sz {} vs {}",
            rec.sz,
            want
        );
    }

    #[test]
    fn odd_state_matches_two_by_two_oracle() {
        // N = 1, zeta = 0.5: A = S_x - i zeta S_y is 2x2; the oracle inverts
        // A^dag A by hand
        let zeta = 0.5;
        let params = ModelParams::sdm(1, zeta).unwrap();
        let state = sdm_steady_state_odd(&params).unwrap();
        let rho = state.matrix();

        // off-diagonals of A: super (1+zeta)/2 l_1, sub (1-zeta)/2 l_1, l_1 = 1
        let sup = 0.5 * (1.0 + zeta);
        let sub = 0.5 * (1.0 - zeta);
        // A^T A = diag(sub^2, sup^2) for N = 1
        let inv = [1.0 / (sub * sub), 1.0 / (sup * sup)];
        let tr = inv[0] + inv[1];
        assert!((rho.read(0, 0).re - inv[0] / tr).abs() < 1e-12);
        assert!((rho.read(1, 1).re - inv[1] / tr).abs() < 1e-12);
        assert!(rho.read(0, 1).abs() < 1e-12);
    }

    #[test]
    fn odd_state_purity_profile() {
        let pure = sdm_steady_state_odd(&ModelParams::sdm(101, 1.0).unwrap()).unwrap();
        assert!(pure.purity() > 1.0 - 1e-6, "purity {}", pure.purity());

        let mixed = sdm_steady_state_odd(&ModelParams::sdm(101, 1e-3).unwrap()).unwrap();
        assert!(mixed.purity() < 0.9, "purity {}", mixed.purity());
    }

    #[test]
    fn crf_limits() {
        let state = crf_steady_state(&ModelParams::crf(100, 0.0).unwrap()).unwrap();
        assert!((state.vectors().read(0, 0).abs() - 1.0).abs() < 1e-12);

        let rec = observables(&state);
        assert!((rec.sz + 50.0).abs() < 1e-10);
        assert!((rec.xi2.unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn crf_above_threshold_sy() {
        // Upsilon = 2, N = 1000: <S_y> approaches the classical closed form
        let params = ModelParams::crf(1000, 2.0).unwrap();
        let rec = trace_observables(&params).unwrap();
        let upsilon: f64 = 2.0;
        let want = 1000.0 / (2.0 * upsilon)
            * (upsilon * upsilon - (upsilon * upsilon - 1.0).sqrt() / (1.0 / upsilon).asin());
        assert!(
            (rec.sy - want).abs() <= 0.01 * want.abs(),
            "sy {} vs {}",
            rec.sy,
            want
        );
    }

    #[test]
    fn trace_route_matches_spectral_route() {
        for params in [
            ModelParams::sdm(101, 0.03).unwrap(),
            ModelParams::sdm(101, 0.3).unwrap(),
            ModelParams::crf(100, 0.8).unwrap(),
            ModelParams::crf(100, 1.7).unwrap(),
        ] {
            let fast = trace_observables(&params).unwrap();
            let full = observables(&steady_state(&params).unwrap());
            for (a, b, name) in [
                (fast.sz, full.sz, "sz"),
                (fast.sy, full.sy, "sy"),
                (fast.sx2, full.sx2, "sx2"),
                (fast.purity, full.purity, "purity"),
            ] {
                let scale = b.abs().max(1.0);
                assert!(
                    (a - b).abs() <= 1e-6 * scale,
                    "{name}: {a} vs {b} at {params:?}"
                );
            }
        }
    }

    #[test]
    fn null_state_matches_closed_forms() {
        // even SDM
        let p = ModelParams::sdm(2, 0.5).unwrap();
        let null = liouvillian_null_state(&p).unwrap();
        let dark = sdm_dark_state_even(&p).unwrap();
        assert!(entrywise_close(&null.matrix(), &dark.matrix(), 1e-8));

        // odd SDM
        let p = ModelParams::sdm(3, 0.3).unwrap();
        let null = liouvillian_null_state(&p).unwrap();
        let closed = sdm_steady_state_odd(&p).unwrap();
        assert!(entrywise_close(&null.matrix(), &closed.matrix(), 1e-8));

        // CRF
        let p = ModelParams::crf(3, 0.8).unwrap();
        let null = liouvillian_null_state(&p).unwrap();
        let closed = crf_steady_state(&p).unwrap();
        assert!(entrywise_close(&null.matrix(), &closed.matrix(), 1e-8));
    }

    #[test]
    fn null_state_rejects_large_n() {
        let p = ModelParams::sdm(61, 0.5).unwrap();
        assert!(liouvillian_null_state(&p).is_err());
    }

    #[test]
    fn maximally_mixed_purity() {
        let basis = DickeBasis::new(9).unwrap();
        let mm = DensityMatrix::maximally_mixed(basis);
        assert!((mm.purity() - 0.1).abs() < 1e-14);
        let rec = observables(&mm);
        assert!(rec.sx.abs() < 1e-12 && rec.sy.abs() < 1e-12 && rec.sz.abs() < 1e-12);
    }

    #[test]
    fn south_pole_projector_xi2_is_one() {
        let basis = DickeBasis::new(40).unwrap();
        let dim = basis.dim();
        let mut v = vec![c64::new(0.0, 0.0); dim];
        v[0] = c64::new(1.0, 0.0);
        let meta = StateMeta {
            model: Some(Model::Sdm),
            n: 40,
            parameter: None,
            construction: Construction::Synthetic,
            residual: None,
            log_condition: None,
        };
        let state = DensityMatrix::pure(basis, &v, meta).unwrap();
        let rec = observables(&state);
        assert!((rec.xi2.unwrap() - 1.0).abs() < 1e-12);
        assert!((rec.var_x - 10.0).abs() < 1e-10); // N/4
    }

    #[test]
    fn xi2_flagged_when_contrast_vanishes() {
        let basis = DickeBasis::new(4).unwrap();
        let mm = DensityMatrix::maximally_mixed(basis);
        let rec = observables(&mm);
        assert!(rec.xi2.is_none());
    }

    #[test]
    fn even_n_xi2_reaches_two_over_n() {
        let params = ModelParams::sdm(1000, 1e-7).unwrap();
        let rec = trace_observables(&params).unwrap();
        let xi2 = rec.xi2.unwrap();
        assert!((xi2 - 0.002).abs() < 1e-5, "xi2 = {xi2}, want ~ 2/N = 0.002");
    }
}
