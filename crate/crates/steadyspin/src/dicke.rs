//! Collective spin algebra on the Dicke manifold: basis bookkeeping, dense
//! collective operators, spin coherent states and Husimi distributions.
//!
//! The basis is the ladder of S_z eigenstates |m>, m = -N/2 .. N/2, stored in
//! ascending m order. Every other module shares this ordering.

use faer::complex_native::c64;
use faer::{Mat, MatRef};

use crate::error::{Error, Result};

/// The (N+1)-dimensional permutation-symmetric sector of N spin-1/2
/// particles with maximal total spin S = N/2.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeBasis {
    n_particles: u32,
    m_values: Vec<f64>,
}

impl DickeBasis {
    pub fn new(n_particles: u32) -> Result<Self> {
        if n_particles == 0 {
            return Err(Error::InvalidParticleNumber(0));
        }
        let s = n_particles as f64 / 2.0;
        let m_values = (0..=n_particles).map(|i| -s + i as f64).collect();
        Ok(Self {
            n_particles,
            m_values,
        })
    }

    pub fn n_particles(&self) -> u32 {
        self.n_particles
    }

    pub fn dim(&self) -> usize {
        self.n_particles as usize + 1
    }

    pub fn spin(&self) -> f64 {
        self.n_particles as f64 / 2.0
    }

    /// S_z eigenvalues in ascending order (integers for even N,
    /// half-integers for odd N).
    pub fn m_values(&self) -> &[f64] {
        &self.m_values
    }

    /// Lowering-operator matrix element between index i and i-1:
    /// <m_{i-1}| S^- |m_i> = sqrt(i (N - i + 1)), for i = 1..=N.
    pub fn ladder(&self, i: usize) -> f64 {
        let n = self.n_particles as f64;
        let i = i as f64;
        (i * (n - i + 1.0)).sqrt()
    }
}

/// A dense operator acting on the Dicke sector.
#[derive(Debug, Clone)]
pub struct CollectiveOperator {
    pub basis: DickeBasis,
    pub matrix: Mat<c64>,
}

impl CollectiveOperator {
    fn zeros(basis: &DickeBasis) -> Self {
        Self {
            basis: basis.clone(),
            matrix: Mat::zeros(basis.dim(), basis.dim()),
        }
    }
}

/// The operator family entering both master equations.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub sx: CollectiveOperator,
    pub sy: CollectiveOperator,
    pub sz: CollectiveOperator,
    pub sminus: CollectiveOperator,
    pub splus: CollectiveOperator,
}

/// Builds S_x, S_y, S_z, S^-, S^+ in the ascending-m basis.
///
/// S_z is diagonal, S^- carries the ladder elements sqrt(S(S+1) - m(m-1)),
/// S^+ is its conjugate transpose, S_x = (S^+ + S^-)/2 and
/// S_y = (S^+ - S^-)/(2i).
pub fn build_operators(basis: &DickeBasis) -> SpinOperators {
    let dim = basis.dim();
    let mut sz = CollectiveOperator::zeros(basis);
    let mut sminus = CollectiveOperator::zeros(basis);
    let mut splus = CollectiveOperator::zeros(basis);
    let mut sx = CollectiveOperator::zeros(basis);
    let mut sy = CollectiveOperator::zeros(basis);

    for i in 0..dim {
        sz.matrix.write(i, i, c64::new(basis.m_values[i], 0.0));
    }
    for i in 1..dim {
        let l = basis.ladder(i);
        sminus.matrix.write(i - 1, i, c64::new(l, 0.0));
        splus.matrix.write(i, i - 1, c64::new(l, 0.0));
        sx.matrix.write(i - 1, i, c64::new(0.5 * l, 0.0));
        sx.matrix.write(i, i - 1, c64::new(0.5 * l, 0.0));
        sy.matrix.write(i - 1, i, c64::new(0.0, 0.5 * l));
        sy.matrix.write(i, i - 1, c64::new(0.0, -0.5 * l));
    }

    SpinOperators {
        sx,
        sy,
        sz,
        sminus,
        splus,
    }
}

/// |theta, phi>: the spin coherent state concentrated along the (theta, phi)
/// direction of the collective Bloch sphere.
#[derive(Debug, Clone)]
pub struct SpinCoherentState {
    pub theta: f64,
    pub phi: f64,
    /// amplitudes over the ascending-m basis
    pub amplitudes: Vec<c64>,
}

/// Expands |theta,phi> over the Dicke ladder. Log-binomial construction, so
/// the amplitudes stay finite up to N ~ 1e5 and beyond.
pub fn coherent_state(basis: &DickeBasis, theta: f64, phi: f64) -> Result<SpinCoherentState> {
    if !(0.0..=core::f64::consts::PI).contains(&theta) {
        return Err(Error::ParameterRange {
            name: "theta",
            value: theta,
            range: "[0, pi]",
        });
    }
    if !theta.is_finite() || !phi.is_finite() {
        return Err(Error::ParameterRange {
            name: "phi",
            value: phi,
            range: "finite",
        });
    }

    let n = basis.n_particles as usize;
    let nf = n as f64;
    let log_cos = (theta / 2.0).cos().ln(); // -inf at theta = pi
    let log_sin = (theta / 2.0).sin().ln(); // -inf at theta = 0
    let lg_n1 = libm::lgamma(nf + 1.0);

    let mut amplitudes = vec![c64::new(0.0, 0.0); n + 1];
    for k in 0..=n {
        let kf = k as f64;
        let mut log_amp = 0.5 * (lg_n1 - libm::lgamma(kf + 1.0) - libm::lgamma(nf - kf + 1.0));
        // skip vanishing factors so the poles avoid 0 * (-inf)
        if k < n {
            log_amp += (nf - kf) * log_cos;
        }
        if k > 0 {
            log_amp += kf * log_sin;
        }
        let r = log_amp.exp();
        // amplitude of m = S - k lives at index N - k
        amplitudes[n - k] = c64::cis(kf * phi) * c64::new(r, 0.0);
    }

    // normalization is exact up to rounding; tidy it up
    let norm = amplitudes
        .iter()
        .map(|a| a.abs() * a.abs())
        .sum::<f64>()
        .sqrt();
    for a in &mut amplitudes {
        *a *= c64::new(1.0 / norm, 0.0);
    }

    Ok(SpinCoherentState {
        theta,
        phi,
        amplitudes,
    })
}

/// Tr(rho * op) for dense rho.
pub fn expectation(op: &CollectiveOperator, rho: MatRef<'_, c64>) -> Result<c64> {
    let dim = op.basis.dim();
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch {
            left: rho.nrows(),
            right: dim,
        });
    }
    let mut tr = c64::new(0.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            tr += rho.read(i, j) * op.matrix.read(j, i);
        }
    }
    Ok(tr)
}

/// <v| op |v> for a pure state.
pub fn expectation_vec(op: MatRef<'_, c64>, v: &[c64]) -> c64 {
    let n = v.len();
    let mut acc = c64::new(0.0, 0.0);
    for i in 0..n {
        let mut row = c64::new(0.0, 0.0);
        for j in 0..n {
            row += op.read(i, j) * v[j];
        }
        acc += v[i].conj() * row;
    }
    acc
}

/// Midpoint-in-theta, periodic-in-phi sampling grid for Husimi functions.
#[derive(Debug, Clone, Copy)]
pub struct HusimiGridSpec {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for HusimiGridSpec {
    fn default() -> Self {
        Self {
            n_theta: 200,
            n_phi: 400,
        }
    }
}

/// Husimi distribution sampled on a sphere grid. `values` is row-major in
/// theta: `values[i * n_phi + j] = Q(thetas[i], phis[j])`, in 1/steradian.
#[derive(Debug, Clone)]
pub struct HusimiGrid {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    pub values: Vec<f64>,
}

impl HusimiGrid {
    /// Integral of Q over the sphere; 1/(N+1) for a trace-1 state.
    pub fn sphere_integral(&self) -> f64 {
        let d_theta = core::f64::consts::PI / self.thetas.len() as f64;
        let d_phi = 2.0 * core::f64::consts::PI / self.phis.len() as f64;
        let mut acc = 0.0;
        for (i, &theta) in self.thetas.iter().enumerate() {
            let sin_t = theta.sin();
            for j in 0..self.phis.len() {
                acc += self.values[i * self.phis.len() + j] * sin_t;
            }
        }
        acc * d_theta * d_phi
    }

    /// Location (theta, phi) of the maximum value.
    pub fn argmax(&self) -> (f64, f64) {
        let (mut best, mut arg) = (f64::NEG_INFINITY, (0usize, 0usize));
        for i in 0..self.thetas.len() {
            for j in 0..self.phis.len() {
                let v = self.values[i * self.phis.len() + j];
                if v > best {
                    best = v;
                    arg = (i, j);
                }
            }
        }
        (self.thetas[arg.0], self.phis[arg.1])
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn median(&self) -> f64 {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    }

    /// CSV emission: columns theta, phi, q; row-major in theta.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "theta,phi,q")?;
        for (i, &theta) in self.thetas.iter().enumerate() {
            for (j, &phi) in self.phis.iter().enumerate() {
                writeln!(w, "{theta},{phi},{}", self.values[i * self.phis.len() + j])?;
            }
        }
        Ok(())
    }
}

fn hermiticity_deviation(rho: MatRef<'_, c64>) -> f64 {
    let n = rho.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let d = rho.read(i, j) - rho.read(j, i).conj();
            dev = dev.max(d.abs());
        }
    }
    dev
}

/// Q(theta, phi) = <theta,phi| rho |theta,phi> / (4 pi) at a single point.
pub fn husimi_point(basis: &DickeBasis, rho: MatRef<'_, c64>, theta: f64, phi: f64) -> Result<f64> {
    let cs = coherent_state(basis, theta, phi)?;
    let q = expectation_vec(rho, &cs.amplitudes);
    Ok(q.re / (4.0 * core::f64::consts::PI))
}

/// Husimi distribution of a dense density matrix over a sphere grid.
///
/// Rejects inputs whose Hermiticity deviation exceeds 1e-9.
pub fn husimi(basis: &DickeBasis, rho: MatRef<'_, c64>, spec: &HusimiGridSpec) -> Result<HusimiGrid> {
    let dim = basis.dim();
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch {
            left: rho.nrows(),
            right: dim,
        });
    }
    let dev = hermiticity_deviation(rho);
    if dev > 1e-9 {
        return Err(Error::NotHermitian { deviation: dev });
    }

    let thetas: Vec<f64> = (0..spec.n_theta)
        .map(|i| (i as f64 + 0.5) * core::f64::consts::PI / spec.n_theta as f64)
        .collect();
    let phis: Vec<f64> = (0..spec.n_phi)
        .map(|j| j as f64 * 2.0 * core::f64::consts::PI / spec.n_phi as f64)
        .collect();

    // batch the coherent states into a matrix and use one GEMM pass:
    // Q = diag(C^H rho C) / 4pi with C holding coherent columns
    let n_pts = thetas.len() * phis.len();
    let mut coh = Mat::<c64>::zeros(dim, n_pts);
    for (i, &theta) in thetas.iter().enumerate() {
        for (j, &phi) in phis.iter().enumerate() {
            let cs = coherent_state(basis, theta, phi)?;
            let col = i * phis.len() + j;
            for (r, a) in cs.amplitudes.iter().enumerate() {
                coh.write(r, col, *a);
            }
        }
    }
    let rho_c = rho * coh.as_ref();
    let mut values = vec![0.0f64; n_pts];
    for (col, value) in values.iter_mut().enumerate() {
        let mut q = c64::new(0.0, 0.0);
        for r in 0..dim {
            q += coh.read(r, col).conj() * rho_c.read(r, col);
        }
        let v = q.re / (4.0 * core::f64::consts::PI);
        // clamp the rounding fuzz of physical states, reject anything real
        if v < -1e-12 {
            return Err(Error::NotHermitian { deviation: -v });
        }
        *value = v.max(0.0);
    }

    Ok(HusimiGrid {
        thetas,
        phis,
        values,
    })
}
