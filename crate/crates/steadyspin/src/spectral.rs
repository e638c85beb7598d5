//! Spectral decomposition of steady states (dominant eigenstate vs bulk),
//! bulk sums, log-log tail exponents, and the rescaled anharmonic-oscillator
//! eigenproblem that governs the critical region of driven superradiance.

use faer::complex_native::c64;
use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::steady::DensityMatrix;

/// Eigenvalue ladder of a steady state, ordered by decreasing weight.
#[derive(Debug, Clone)]
pub struct SteadyStateSpectrum {
    /// normalized eigenvalues (sum to 1), descending
    pub weights: Vec<f64>,
    /// ln of the raw resolvent eigenvalues, present for closed-form states
    pub log_raw: Option<Vec<f64>>,
    /// eigenvectors as columns, aligned with `weights`
    pub vectors: Mat<c64>,
    /// weight of the dominant eigenstate
    pub dominant_weight: f64,
}

/// Spectral decomposition of a state. States built from the closed-form
/// resolvent factorizations already carry their exact spectral factors and
/// raw eigenvalue logarithms; this hands them out without degrading them
/// through a second diagonalization.
pub fn spectrum(rho: &DensityMatrix) -> SteadyStateSpectrum {
    SteadyStateSpectrum {
        weights: rho.weights().to_vec(),
        log_raw: rho.log_raw().map(|l| l.to_vec()),
        vectors: rho.vectors().to_owned(),
        dominant_weight: rho.weights().first().copied().unwrap_or(0.0),
    }
}

impl SteadyStateSpectrum {
    /// CSV emission: k, lambda_k_raw (ln), lambda_k_norm, diagonal
    /// expectations of S_z and S_x^2 per eigenstate.
    pub fn write_csv<W: std::io::Write>(
        &self,
        basis: &crate::dicke::DickeBasis,
        mut w: W,
    ) -> std::io::Result<()> {
        let ops = crate::dicke::build_operators(basis);
        let sx2 = &ops.sx.matrix * &ops.sx.matrix;
        writeln!(w, "k,log_lambda_raw,lambda_norm,sz_k,sx2_k")?;
        let dim = self.vectors.nrows();
        for k in 0..self.weights.len() {
            let col: Vec<c64> = (0..dim).map(|i| self.vectors.read(i, k)).collect();
            let sz_k = crate::dicke::expectation_vec(ops.sz.matrix.as_ref(), &col).re;
            let sx2_k = crate::dicke::expectation_vec(sx2.as_ref(), &col).re;
            let raw = self
                .log_raw
                .as_ref()
                .map(|l| l[k])
                .unwrap_or(f64::NAN);
            writeln!(w, "{k},{raw},{},{sz_k},{sx2_k}", self.weights[k])?;
        }
        Ok(())
    }
}

/// Everything-but-dominant contribution sum_{k >= 1} lambda_k <v_k|op|v_k>
/// in raw (unnormalized resolvent) units.
pub fn bulk_sum(spectrum: &SteadyStateSpectrum, op: MatRef<'_, c64>) -> Result<f64> {
    let log_raw = spectrum.log_raw.as_ref().ok_or(Error::RankDeficient(
        "raw spectrum unavailable: state was not built from a resolvent factorization",
    ))?;
    let dim = spectrum.vectors.nrows();
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::DimensionMismatch {
            left: op.nrows(),
            right: dim,
        });
    }
    // one GEMM for all quadratic forms
    let w = op * spectrum.vectors.as_ref();
    let mut acc = 0.0;
    for k in 1..spectrum.weights.len() {
        let mut quad = c64::new(0.0, 0.0);
        for i in 0..dim {
            quad += spectrum.vectors.read(i, k).conj() * w.read(i, k);
        }
        acc += log_raw[k].exp() * quad.re;
    }
    Ok(acc)
}

/// Log-log least-squares fit over a k-window.
#[derive(Debug, Clone, Copy)]
pub struct TailFit {
    pub exponent: f64,
    pub log_amplitude: f64,
    /// root-mean-square residual in log space
    pub residual: f64,
    pub window: (usize, usize),
}

/// Fits ln y_k ~ log_amplitude + exponent * ln k over k in
/// [window.0, window.1] (inclusive, 1-based index into `log_values`).
pub fn tail_exponent_from_logs(log_values: &[f64], window: (usize, usize)) -> Result<TailFit> {
    let (lo, hi) = window;
    if lo < 1 || hi >= log_values.len() || hi < lo + 3 {
        return Err(Error::RankDeficient("tail window too small"));
    }
    let xs: Vec<f64> = (lo..=hi).map(|k| (k as f64).ln()).collect();
    let ys: Vec<f64> = (lo..=hi).map(|k| log_values[k]).collect();
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-12 {
        return Err(Error::RankDeficient("degenerate abscissae"));
    }
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / n;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(TailFit {
        exponent: slope,
        log_amplitude: intercept,
        residual,
        window,
    })
}

/// Same fit on linear values.
pub fn tail_exponent(values: &[f64], window: (usize, usize)) -> Result<TailFit> {
    let logs: Vec<f64> = values.iter().map(|&v| v.ln()).collect();
    tail_exponent_from_logs(&logs, window)
}

/// Default fitting window [10, min(50, dim/4)].
pub fn default_tail_window(len: usize) -> (usize, usize) {
    (10, 50.min(len / 4).max(14))
}

// ---------------------------------------------------------------------------
// critical-region oscillator
// ---------------------------------------------------------------------------

/// Grid for the rescaled oscillator eigenproblem.
#[derive(Debug, Clone, Copy)]
pub struct OscillatorGrid {
    /// half-width of the q domain; None picks max(3 + 2 sqrt|eta|, 9)
    pub q_max: Option<f64>,
    /// number of grid points (even)
    pub points: usize,
    /// relative change of 1/mu0 allowed under halving the resolution
    pub convergence_tol: f64,
}

impl Default for OscillatorGrid {
    fn default() -> Self {
        Self {
            q_max: None,
            points: 512,
            convergence_tol: 0.01,
        }
    }
}

/// Solution of the rescaled eigenproblem
/// (y - i q^2 - i eta)(y + i q^2 + i eta) |mu_k> = (1/mu_k) |mu_k>.
#[derive(Debug, Clone)]
pub struct OscillatorSolution {
    pub eta: f64,
    /// ln of the dominant raw eigenvalue
    pub log_mu0: f64,
    /// linear value (f64::INFINITY if out of range)
    pub mu0: f64,
    /// <mu_0| y^2 |mu_0>
    pub y_variance: f64,
    /// raw eigenvalues, descending
    pub mu: Vec<f64>,
    /// per-eigenstate <y^2> and <q^2>, aligned with `mu`
    pub y2: Vec<f64>,
    pub q2: Vec<f64>,
    pub q_max: f64,
    pub points: usize,
    /// relative change of 1/mu0 when the grid resolution is halved
    pub refinement_change: f64,
}

/// Periodic spectral differentiation matrix on n (even) points covering a
/// domain of total length `span`.
fn spectral_derivative(n: usize, span: f64) -> Mat<f64> {
    let mut d = Mat::<f64>::zeros(n, n);
    let scale = 2.0 * core::f64::consts::PI / span;
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let diff = j as isize - k as isize;
            let sign = if diff % 2 == 0 { 1.0 } else { -1.0 };
            let angle = core::f64::consts::PI * diff as f64 / n as f64;
            d.write(j, k, scale * 0.5 * sign / angle.tan());
        }
    }
    d
}

struct OscillatorFactors {
    /// singular values of the discretized factor, descending
    sigma: Vec<f64>,
    /// right singular vectors, aligned with `sigma`
    vectors: Mat<f64>,
    derivative: Mat<f64>,
    qs: Vec<f64>,
}

fn oscillator_solve_at(eta: f64, q_max: f64, n: usize) -> Result<OscillatorFactors> {
    // M = i (D + diag(q^2 + eta)) so M^dag M = R^T R with real R
    let span = 2.0 * q_max;
    let d = spectral_derivative(n, span);
    let qs: Vec<f64> = (0..n).map(|j| -q_max + span * j as f64 / n as f64).collect();
    let mut r = d.clone();
    for j in 0..n {
        r.write(j, j, r.read(j, j) + qs[j] * qs[j] + eta);
    }
    let svd = r.as_ref().svd();
    let k = n;
    let mut sigma: Vec<f64> = (0..k).map(|i| svd.s_diagonal().read(i).abs()).collect();
    // descending from faer; keep vector columns aligned after reversal
    let v = svd.v().to_owned();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    sigma.sort_by(|a, b| b.total_cmp(a));
    let mut vv = Mat::<f64>::zeros(n, k);
    for (dst, &src) in order.iter().enumerate() {
        for row in 0..n {
            vv.write(row, dst, v.read(row, src));
        }
    }
    Ok(OscillatorFactors {
        sigma,
        vectors: vv,
        derivative: d,
        qs,
    })
}

/// Solves the discretized oscillator problem: dominant eigenvalue (in log
/// form), its y-variance, the full raw eigenvalue ladder and per-state
/// second moments, plus a halved-resolution convergence check.
pub fn solve_oscillator(eta: f64, grid: &OscillatorGrid) -> Result<OscillatorSolution> {
    let min_q = 3.0 + 2.0 * eta.abs().sqrt();
    let q_max = grid.q_max.unwrap_or_else(|| min_q.max(9.0));
    if q_max < min_q {
        return Err(Error::ParameterRange {
            name: "q_max",
            value: q_max,
            range: "must reach 3 + 2 sqrt|eta|",
        });
    }
    let n = grid.points.max(32) & !1usize;

    let f = oscillator_solve_at(eta, q_max, n)?;
    let (sigma, v, d, qs) = (f.sigma, f.vectors, f.derivative, f.qs);
    // sigma descending; mu = 1/sigma^2 ascending -> reverse to descending mu
    let mu: Vec<f64> = sigma
        .iter()
        .rev()
        .map(|&s| 1.0 / (s * s).max(f64::MIN_POSITIVE))
        .collect();
    let log_mu0 = -2.0 * sigma[n - 1].max(f64::MIN_POSITIVE).ln();

    // per-state moments, aligned with mu (descending): column n-1-k of v
    let mut y2 = Vec::with_capacity(n);
    let mut q2 = Vec::with_capacity(n);
    let mut col = vec![0.0f64; n];
    let mut dcol = vec![0.0f64; n];
    for k in 0..n {
        let src = n - 1 - k;
        for i in 0..n {
            col[i] = v.read(i, src);
        }
        // y^2 = -d^2/dq^2: <psi| y^2 |psi> = ||D psi||^2
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += d.read(i, j) * col[j];
            }
            dcol[i] = acc;
        }
        y2.push(dcol.iter().map(|x| x * x).sum());
        q2.push(col.iter().zip(&qs).map(|(x, q)| x * x * q * q).sum());
    }
    let y_variance = y2[0];

    // halve the resolution, same domain
    let sigma_half = oscillator_solve_at(eta, q_max, n / 2)?.sigma;
    let inv_full = sigma[n - 1] * sigma[n - 1];
    let inv_half = sigma_half[n / 2 - 1] * sigma_half[n / 2 - 1];
    let refinement_change = if inv_full > 0.0 {
        ((inv_half - inv_full) / inv_full).abs()
    } else {
        0.0
    };
    if refinement_change > grid.convergence_tol {
        return Err(Error::GridConvergence {
            quantity: "1/mu0",
            change: refinement_change,
        });
    }

    Ok(OscillatorSolution {
        eta,
        log_mu0,
        mu0: log_mu0.exp(),
        y_variance,
        mu,
        y2,
        q2,
        q_max,
        points: n,
        refinement_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::QuadratureSpec;
    use crate::special;
    use crate::steady::{self, ModelParams};

    #[test]
    fn spectrum_of_pure_state() {
        let params = ModelParams::sdm(8, 0.7).unwrap();
        let state = steady::sdm_dark_state_even(&params).unwrap();
        let spec = spectrum(&state);
        assert_eq!(spec.weights.len(), 1);
        assert!((spec.dominant_weight - 1.0).abs() < 1e-14);
    }

    #[test]
    fn spectrum_reconstructs_state() {
        let params = ModelParams::sdm(41, 0.2).unwrap();
        let state = steady::sdm_steady_state_odd(&params).unwrap();
        let spec = spectrum(&state);
        let dim = state.dim();
        let mut rebuilt = Mat::<c64>::zeros(dim, dim);
        for k in 0..spec.weights.len() {
            for i in 0..dim {
                for j in 0..dim {
                    let add = spec.vectors.read(i, k)
                        * spec.vectors.read(j, k).conj()
                        * c64::new(spec.weights[k], 0.0);
                    rebuilt.write(i, j, rebuilt.read(i, j) + add);
                }
            }
        }
        let rho = state.matrix();
        let mut frob = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                frob += (rebuilt.read(i, j) - rho.read(i, j)).abs().powi(2);
            }
        }
        assert!(frob.sqrt() < 1e-8, "reconstruction error {}", frob.sqrt());
    }

    #[test]
    fn spectrum_vectors_unitary() {
        let params = ModelParams::crf(30, 0.9).unwrap();
        let state = steady::crf_steady_state(&params).unwrap();
        let spec = spectrum(&state);
        let g = spec.vectors.as_ref().adjoint() * spec.vectors.as_ref();
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g.read(i, j).abs() - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn lambda0_matches_bessel_form() {
        // raw dominant eigenvalue vs pi^2 I0(zeta N)^2; the deviation is a
        // finite-size effect, ~13% at N = 101 and below 5% at N = 1001
        let n = 1001u32;
        for zn in [3.0f64, 6.0] {
            let params = ModelParams::sdm(n, zn / n as f64).unwrap();
            let state = steady::sdm_steady_state_odd(&params).unwrap();
            let spec = spectrum(&state);
            let log_raw = spec.log_raw.as_ref().unwrap();
            let want = 2.0 * core::f64::consts::PI.ln() + 2.0 * special::log_bessel_i0(zn).unwrap();
            let got = log_raw[0];
            assert!(
                (got - want).abs() < 1.05f64.ln(),
                "ln lambda0 {got} vs {want} at zeta N = {zn}"
            );
        }
    }

    #[test]
    fn bulk_sum_against_semiclassical_form() {
        // single moderate-size point; the production-size comparison lives in
        // the acceptance suite
        let n = 301u32;
        let zeta = 0.5;
        let params = ModelParams::sdm(n, zeta).unwrap();
        let state = steady::sdm_steady_state_odd(&params).unwrap();
        let spec = spectrum(&state);
        let basis = state.basis().clone();
        let ops = crate::dicke::build_operators(&basis);
        let sx2 = &ops.sx.matrix * &ops.sx.matrix;
        let got = bulk_sum(&spec, sx2.as_ref()).unwrap();
        let want = n as f64 / (1.0 + zeta);
        assert!(
            (got - want).abs() < 0.05 * want,
            "bulk {got} vs semiclassical {want}"
        );
    }

    #[test]
    fn bulk_sum_requires_raw_spectrum() {
        let basis = crate::dicke::DickeBasis::new(5).unwrap();
        let mm = steady::DensityMatrix::maximally_mixed(basis.clone());
        let spec = spectrum(&mm);
        let ops = crate::dicke::build_operators(&basis);
        assert!(bulk_sum(&spec, ops.sx.matrix.as_ref()).is_err());
    }

    #[test]
    fn tail_fit_recovers_exact_power() {
        let vals: Vec<f64> = (0..80).map(|k| 3.0 * ((k as f64).max(1.0)).powf(-2.0)).collect();
        let fit = tail_exponent(&vals, (10, 50)).unwrap();
        assert!((fit.exponent + 2.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn oscillator_mu0_matches_quadrature() {
        let sol = solve_oscillator(-2.0, &OscillatorGrid::default()).unwrap();
        let quad = special::mu0_integral(-2.0, &QuadratureSpec::default()).unwrap();
        let want = quad.quadrature.unwrap();
        assert!(
            (sol.mu0 - want).abs() < 0.05 * want,
            "mu0 {} vs quadrature {want}",
            sol.mu0
        );
        // y variance ~ sqrt|eta|
        let want_y = 2.0f64.sqrt();
        assert!(
            (sol.y_variance - want_y).abs() < 0.1 * want_y,
            "y2 {} vs sqrt|eta| {want_y}",
            sol.y_variance
        );
    }

    #[test]
    fn oscillator_tail_exponents() {
        let sol = solve_oscillator(0.0, &OscillatorGrid::default()).unwrap();
        let window = (10, 50);
        let mu_logs: Vec<f64> = sol.mu.iter().map(|&m| m.ln()).collect();
        let fit = tail_exponent_from_logs(&mu_logs, window).unwrap();
        assert!(
            (fit.exponent + 4.0 / 3.0).abs() <= 0.15,
            "mu tail exponent {}",
            fit.exponent
        );

        let y_fit = tail_exponent(&sol.y2, window).unwrap();
        assert!(
            (y_fit.exponent - 4.0 / 3.0).abs() <= 0.15,
            "y2 exponent {}",
            y_fit.exponent
        );
        let q_fit = tail_exponent(&sol.q2, window).unwrap();
        assert!(
            (q_fit.exponent - 2.0 / 3.0).abs() <= 0.15,
            "q2 exponent {}",
            q_fit.exponent
        );
    }

    #[test]
    fn oscillator_rejects_small_domain() {
        let grid = OscillatorGrid {
            q_max: Some(2.0),
            ..OscillatorGrid::default()
        };
        assert!(solve_oscillator(-3.0, &grid).is_err());
    }
}
