//! Thin wrappers over the dense/tridiagonal factorizations used by the
//! solvers. Eigenvalues always come back sorted ascending; singular values
//! descending.

use faer::complex_native::c64;
use faer::dyn_stack::{GlobalPodBuffer, PodStack};
use faer::linalg::evd::tridiag_real_evd;
use faer::linalg::svd::{compute_svd, compute_svd_req, ComputeVectors, SvdParams};
use faer::{Mat, MatRef, Parallelism, Side};

use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix: `diag` of length n, `offdiag` of
/// length n-1.
#[derive(Debug, Clone)]
pub struct TridiagSym {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl TridiagSym {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// y = T x
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n();
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.offdiag[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.offdiag[i] * x[i + 1];
            }
            y[i] = acc;
        }
    }

    pub fn max_abs(&self) -> f64 {
        let d = self.diag.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let e = self.offdiag.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        d.max(e)
    }
}

fn parallelism() -> Parallelism<'static> {
    Parallelism::Rayon(0)
}

/// Full eigendecomposition of a real symmetric tridiagonal matrix
/// (divide and conquer). Ascending eigenvalues.
pub fn tridiag_evd(t: &TridiagSym) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = t.n();
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    if n == 1 {
        let mut u = Mat::zeros(1, 1);
        u.write(0, 0, 1.0);
        return Ok((vec![t.diag[0]], u));
    }

    let mut diag = t.diag.clone();
    let mut offdiag = t.offdiag.clone();
    let mut u = Mat::<f64>::zeros(n, n);
    let req = tridiag_real_evd::compute_tridiag_real_evd_req::<f64>(n, parallelism())
        .map_err(|_| Error::RankDeficient("tridiagonal eigensolver workspace overflow"))?;
    let mut buffer = GlobalPodBuffer::new(req);
    tridiag_real_evd::compute_tridiag_real_evd(
        &mut diag,
        &mut offdiag,
        u.as_mut(),
        f64::EPSILON,
        f64::MIN_POSITIVE,
        parallelism(),
        PodStack::new(&mut buffer),
    );

    // defensively sort ascending, permuting the eigenvector columns along
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
    let sorted_vals: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut sorted_u = Mat::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            sorted_u.write(r, dst, u.read(r, src));
        }
    }
    Ok((sorted_vals, sorted_u))
}

/// LDL^T factorization of a shifted SPD tridiagonal matrix T - shift*I.
/// Returns None if a pivot is not strictly positive.
pub struct TridiagLdl {
    d: Vec<f64>,
    l: Vec<f64>,
}

pub fn tridiag_ldl(t: &TridiagSym, shift: f64) -> Option<TridiagLdl> {
    let n = t.n();
    let mut d = vec![0.0; n];
    let mut l = vec![0.0; n.saturating_sub(1)];
    let mut prev = 0.0f64;
    for i in 0..n {
        let mut di = t.diag[i] - shift;
        if i > 0 {
            di -= prev * prev * d[i - 1];
        }
        if !(di > 0.0) || !di.is_finite() {
            return None;
        }
        d[i] = di;
        if i + 1 < n {
            prev = t.offdiag[i] / di;
            l[i] = prev;
        }
    }
    Some(TridiagLdl { d, l })
}

impl TridiagLdl {
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.d.len();
        for i in 1..n {
            x[i] -= self.l[i - 1] * x[i - 1];
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            x[i] -= self.l[i] * x[i + 1];
        }
    }

    /// log(det(T - shift I)) of the factored matrix.
    pub fn log_det(&self) -> f64 {
        self.d.iter().map(|&d| d.ln()).sum()
    }
}

/// Inverse iteration for the eigenpair closest to zero of an SPD
/// tridiagonal matrix. Returns the Rayleigh quotient and the vector.
///
/// A tiny diagonal shift is applied if the unshifted factorization breaks
/// down (numerically singular matrix); the returned quotient still refers
/// to the original matrix.
pub fn tridiag_smallest_pair(t: &TridiagSym, seed: Option<&[f64]>, iters: usize) -> (f64, Vec<f64>) {
    let n = t.n();
    let scale = t.max_abs();
    let ldl = tridiag_ldl(t, 0.0)
        .or_else(|| tridiag_ldl(t, -scale * 1e-15))
        .or_else(|| tridiag_ldl(t, -scale * 1e-12))
        .expect("SPD tridiagonal with large negative shift must factor");

    let mut x: Vec<f64> = match seed {
        Some(s) => s.to_vec(),
        None => (0..n)
            .map(|i| 1.0 + 0.3 * ((i * 2654435761) % 97) as f64 / 97.0)
            .collect(),
    };
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nx = norm(&x);
    x.iter_mut().for_each(|a| *a /= nx);

    for _ in 0..iters.max(1) {
        ldl.solve_in_place(&mut x);
        let nx = norm(&x);
        if !nx.is_finite() || nx == 0.0 {
            break;
        }
        x.iter_mut().for_each(|a| *a /= nx);
    }

    let mut tx = vec![0.0; n];
    t.apply(&x, &mut tx);
    let rq = x.iter().zip(&tx).map(|(a, b)| a * b).sum::<f64>();
    (rq, x)
}

fn sort_pairs_ascending<E: faer::Entity + faer::ComplexField>(
    vals: &mut Vec<f64>,
    vecs: &mut Mat<E>,
) {
    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        return;
    }
    let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut sorted = Mat::<E>::zeros(vecs.nrows(), n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..vecs.nrows() {
            sorted.write(r, dst, vecs.read(r, src));
        }
    }
    *vals = sorted_vals;
    *vecs = sorted;
}

/// Eigendecomposition of a complex Hermitian matrix (ascending eigenvalues).
pub fn hermitian_evd(mat: MatRef<'_, c64>) -> Result<(Vec<f64>, Mat<c64>)> {
    let evd = mat.selfadjoint_eigendecomposition(Side::Lower);
    let n = mat.nrows();
    let mut vals: Vec<f64> = (0..n).map(|i| evd.s().column_vector().read(i).re).collect();
    let mut vecs = evd.u().to_owned();
    sort_pairs_ascending(&mut vals, &mut vecs);
    Ok((vals, vecs))
}

/// Eigendecomposition of a real symmetric matrix (ascending eigenvalues).
pub fn sym_evd(mat: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = mat.selfadjoint_eigendecomposition(Side::Lower);
    let n = mat.nrows();
    let mut vals: Vec<f64> = (0..n).map(|i| evd.s().column_vector().read(i)).collect();
    let mut vecs = evd.u().to_owned();
    sort_pairs_ascending(&mut vals, &mut vecs);
    Ok((vals, vecs))
}

pub struct SvdParts {
    /// singular values, descending
    pub s: Vec<f64>,
    pub u: Option<Mat<c64>>,
    pub v: Mat<c64>,
}

/// Singular value decomposition of a square complex matrix; U is optional
/// to halve the memory traffic when only right vectors are needed.
pub fn svd_complex(mat: MatRef<'_, c64>, want_u: bool) -> Result<SvdParts> {
    let n = mat.nrows();
    let m = mat.ncols();
    let k = n.min(m);
    let compute_u = if want_u {
        ComputeVectors::Full
    } else {
        ComputeVectors::No
    };
    let req = compute_svd_req::<c64>(
        n,
        m,
        compute_u,
        ComputeVectors::Full,
        parallelism(),
        SvdParams::default(),
    )
    .map_err(|_| Error::RankDeficient("svd workspace overflow"))?;
    let mut buffer = GlobalPodBuffer::new(req);

    let mut s = Mat::<c64>::zeros(k, 1);
    let mut u = want_u.then(|| Mat::<c64>::zeros(n, n));
    let mut v = Mat::<c64>::zeros(m, m);
    compute_svd(
        mat,
        s.as_mut().col_mut(0),
        u.as_mut().map(|u| u.as_mut()),
        Some(v.as_mut()),
        parallelism(),
        PodStack::new(&mut buffer),
        SvdParams::default(),
    );

    let sv: Vec<f64> = (0..k).map(|i| s.read(i, 0).re).collect();
    Ok(SvdParts { s: sv, u, v })
}

/// log(sum(exp(x))) over a slice, stable against large magnitudes.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mx = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !mx.is_finite() {
        return mx;
    }
    mx + xs.iter().map(|x| (x - mx).exp()).sum::<f64>().ln()
}
