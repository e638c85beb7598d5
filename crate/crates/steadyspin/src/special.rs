//! Scalar special functions used by the analytic steady-state formulas:
//! modified Bessel functions I0/I1 (plain and exponentially scaled), the
//! W_{-1} branch of the Lambert function, and the semi-infinite integrals
//! of exp(-v^6/6 - 2*eta*v^2) * v^k that control the critical region.

use crate::error::{Error, Result};
use crate::quad::{self, QuadratureSpec};

const SERIES_ASYMPTOTIC_CROSSOVER: f64 = 15.0;

fn bessel_i_series(order: u8, x: f64) -> f64 {
    // ascending series; all terms positive, no cancellation
    let q = 0.25 * x * x;
    let mut term = match order {
        0 => 1.0,
        _ => 0.5 * x,
    };
    let mut sum = term;
    for k in 1..500 {
        let kf = k as f64;
        term *= q / (kf * (kf + order as f64));
        sum += term;
        if term < sum * 1e-18 {
            break;
        }
    }
    sum
}

fn bessel_i_scaled_asymptotic(order: u8, x: f64) -> f64 {
    // e^{-x} I_nu(x) ~ (2 pi x)^{-1/2} * sum of (-1)^k a_k(nu) / x^k;
    // terms shrink until k ~ x, far past the 1e-16 level for x >= 15
    let nu2_4 = 4.0 * (order as f64) * (order as f64);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        let kf = k as f64;
        let num = (2.0 * kf + 1.0) * (2.0 * kf + 1.0) - nu2_4;
        term *= num / (8.0 * (kf + 1.0) * x);
        if term.abs() >= prev {
            break; // asymptotic tail started to diverge
        }
        prev = term.abs();
        sum += term;
        if term.abs() < sum.abs() * 1e-18 {
            break;
        }
    }
    sum / (2.0 * core::f64::consts::PI * x).sqrt()
}

/// Modified Bessel function of the first kind, order 0 or 1.
///
/// With `scaled` set the value returned is `e^{-x} I_k(x)`, which stays in
/// (0, 1] for all x >= 0 and never overflows.
pub fn bessel_i(order: u8, x: f64, scaled: bool) -> Result<f64> {
    if order > 1 {
        return Err(Error::ParameterRange {
            name: "order",
            value: order as f64,
            range: "{0, 1}",
        });
    }
    if !(0.0..=1e8).contains(&x) {
        return Err(Error::ParameterRange {
            name: "x",
            value: x,
            range: "[0, 1e8]",
        });
    }
    if x < SERIES_ASYMPTOTIC_CROSSOVER {
        let v = bessel_i_series(order, x);
        Ok(if scaled { v * (-x).exp() } else { v })
    } else {
        let v = bessel_i_scaled_asymptotic(order, x);
        Ok(if scaled { v } else { v * x.exp() })
    }
}

pub fn bessel_i0(x: f64) -> Result<f64> {
    bessel_i(0, x, false)
}

pub fn bessel_i1(x: f64) -> Result<f64> {
    bessel_i(1, x, false)
}

/// ln I0(x), safe for arguments far beyond the overflow point of I0 itself.
pub fn log_bessel_i0(x: f64) -> Result<f64> {
    Ok(bessel_i(0, x, true)?.ln() + x)
}

/// ln I1(x); x = 0 yields -inf.
pub fn log_bessel_i1(x: f64) -> Result<f64> {
    Ok(bessel_i(1, x, true)?.ln() + x)
}

/// I1(x)/I0(x), monotone from 0 at x = 0 towards 1 as x -> inf.
pub fn bessel_ratio_i1_i0(x: f64) -> Result<f64> {
    Ok(bessel_i(1, x, true)? / bessel_i(0, x, true)?)
}

/// W_{-1} branch of the Lambert function on (-1/e, 0).
///
/// Arguments within 1e-9 of the branch point -1/e return exactly -1.
pub fn lambert_w_minus1(x: f64) -> Result<f64> {
    let branch = -(-1.0f64).exp(); // -1/e
    if (x - branch).abs() <= 1e-9 {
        return Ok(-1.0);
    }
    if x <= branch || x >= 0.0 {
        return Err(Error::ParameterRange {
            name: "x",
            value: x,
            range: "(-1/e, 0)",
        });
    }

    let mut w = if x > -0.25 {
        // logarithmic seed, sharpened by the fixed point w = ln(-x) - ln(-w)
        let l1 = (-x).ln();
        let mut w = l1 - (-l1).ln();
        for _ in 0..3 {
            w = l1 - (-w).ln();
        }
        w
    } else {
        // series about the branch point in p = -sqrt(2(1 + e x))
        let p = -(2.0 * (1.0 + core::f64::consts::E * x)).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 * p.powi(3) / 72.0 - 43.0 * p.powi(4) / 540.0
            + 769.0 * p.powi(5) / 17280.0
    };

    // Halley refinement
    for _ in 0..6 {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * (w + 1.0));
        let step = f / denom;
        w -= step;
        if step.abs() <= 1e-16 * w.abs() {
            break;
        }
    }
    Ok(w)
}

/// Integral of v^k exp(-v^6/6 - 2 eta v^2) over v in [0, inf).
#[derive(Debug, Clone, Copy)]
pub struct SexticIntegral {
    pub value: f64,
    /// ln of the value, finite even when `value` overflows f64.
    pub log_value: f64,
    /// absolute error bound on the reduced (peak-normalized) quadrature,
    /// relative to the reduced integral
    pub rel_error: f64,
}

fn sextic_exponent(eta: f64, v: f64) -> f64 {
    -v.powi(6) / 6.0 - 2.0 * eta * v * v
}

/// Computes `int_0^inf v^k exp(-v^6/6 - 2 eta v^2) dv` for k in {0, 2}.
///
/// The exponent peak is factored out before quadrature so that strongly
/// negative eta (where the integral grows like exp((8/3)|eta|^{3/2}))
/// stays representable through `log_value`.
pub fn sextic_gaussian_integral(k: u8, eta: f64, spec: &QuadratureSpec) -> Result<SexticIntegral> {
    if k != 0 && k != 2 {
        return Err(Error::ParameterRange {
            name: "k",
            value: k as f64,
            range: "{0, 2}",
        });
    }
    if !eta.is_finite() {
        return Err(Error::ParameterRange {
            name: "eta",
            value: eta,
            range: "finite",
        });
    }

    let v_peak = if eta < 0.0 { (-4.0 * eta).powf(0.25) } else { 0.0 };
    let g_peak = sextic_exponent(eta, v_peak);

    // upper cutoff: exponent 45 below the peak (integrand < ~1e-19 x peak)
    let mut hi = (v_peak + 1.0).max(2.0);
    while sextic_exponent(eta, hi) - g_peak > -45.0 {
        hi *= 1.25;
    }

    let reduced = quad::adaptive(
        |v| v.powi(k as i32) * (sextic_exponent(eta, v) - g_peak).exp(),
        0.0,
        hi,
        spec,
    )?;
    let log_value = g_peak + reduced.value.ln();
    Ok(SexticIntegral {
        value: log_value.exp(),
        log_value,
        rel_error: reduced.error / reduced.value.abs().max(f64::MIN_POSITIVE),
    })
}

/// The squared one-sided integral controlling the dominant steady-state
/// eigenvalue of the critical oscillator, together with its saddle-point
/// approximation.
#[derive(Debug, Clone, Copy)]
pub struct Mu0Integral {
    /// ln of [int_0^inf exp(-2 eta q - 2 q^3/3) dq]^2 (always finite)
    pub log_quadrature: f64,
    /// ln of pi exp(8|eta|^{3/2}/3) / (2 sqrt|eta|); -inf at eta = 0
    pub log_saddle: f64,
    /// linear values; None when they exceed the f64 range
    pub quadrature: Option<f64>,
    pub saddle: Option<f64>,
    /// the saddle form is only trustworthy for eta <~ -1
    pub saddle_regime_valid: bool,
}

/// Evaluates mu0 ~ [int_0^inf exp(-2 eta q - 2 q^3/3) dq]^2 for eta <= 0.
pub fn mu0_integral(eta: f64, spec: &QuadratureSpec) -> Result<Mu0Integral> {
    if !(eta <= 0.0) {
        return Err(Error::ParameterRange {
            name: "eta",
            value: eta,
            range: "(-inf, 0]",
        });
    }
    let g = |q: f64| -2.0 * eta * q - 2.0 * q.powi(3) / 3.0;
    let q_peak = (-eta).sqrt();
    let g_peak = g(q_peak);

    let mut hi = (q_peak + 1.0).max(2.0);
    while g(hi) - g_peak > -45.0 {
        hi *= 1.25;
    }
    let reduced = quad::adaptive(|q| (g(q) - g_peak).exp(), 0.0, hi, spec)?;
    let log_quadrature = 2.0 * (g_peak + reduced.value.ln());

    let abs_eta = -eta;
    let log_saddle = if abs_eta > 0.0 {
        core::f64::consts::PI.ln() - (2.0 * abs_eta.sqrt()).ln() + 8.0 * abs_eta.powf(1.5) / 3.0
    } else {
        f64::NEG_INFINITY
    };

    let to_linear = |log: f64| {
        if log < 700.0 {
            Some(log.exp())
        } else {
            None
        }
    };
    Ok(Mu0Integral {
        log_quadrature,
        log_saddle,
        quadrature: to_linear(log_quadrature),
        saddle: to_linear(log_saddle),
        saddle_regime_valid: eta <= -1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: scaled I_k(x) = (1/pi) int_0^pi e^{x(cos t - 1)} cos(k t) dt,
    /// evaluated with plain Simpson on a fine fixed grid.
    fn bessel_scaled_oracle(order: u8, x: f64) -> f64 {
        let n = 40_000usize; // even
        let h = core::f64::consts::PI / n as f64;
        let f = |t: f64| (x * (t.cos() - 1.0)).exp() * ((order as f64) * t).cos();
        let mut sum = f(0.0) + f(core::f64::consts::PI);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(i as f64 * h);
        }
        sum * h / 3.0 / core::f64::consts::PI
    }

    /// Independent oracle: bisection on w e^w = x over the W_{-1} range.
    fn lambert_oracle(x: f64) -> f64 {
        let f = |w: f64| w * w.exp() - x;
        let (mut lo, mut hi) = (-745.0, -1.0);
        // f(lo) = -x > 0 is tiny*... f(-1) = -1/e - x < 0 inside the domain
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn bessel_at_zero() {
        assert_eq!(bessel_i0(0.0).unwrap(), 1.0);
        assert_eq!(bessel_i1(0.0).unwrap(), 0.0);
    }

    #[test]
    fn bessel_against_integral_oracle() {
        for &x in &[
            0.1, 0.5, 1.0, 3.0, 7.0, 12.0, 14.9, 15.1, 20.0, 50.0, 120.0, 700.0,
        ] {
            for order in [0u8, 1u8] {
                let got = bessel_i(order, x, true).unwrap();
                let want = bessel_scaled_oracle(order, x);
                assert!(
                    (got - want).abs() <= 1e-12 * want.abs().max(1e-12),
                    "order {order} x {x}: {got} vs oracle {want}"
                );
            }
        }
    }

    #[test]
    fn bessel_known_values() {
        // reference values (Abramowitz & Stegun table accuracy)
        assert!((bessel_i0(1.0).unwrap() - 1.2660658777520084).abs() < 1e-14);
        assert!((bessel_i1(1.0).unwrap() - 0.5651591039924851).abs() < 1e-14);
        assert!((bessel_i0(10.0).unwrap() - 2815.716628466254).abs() < 1e-9 * 2815.0);
    }

    #[test]
    fn bessel_ratio_asymptote() {
        // I1/I0 at large argument approaches 1 - 1/(2x)
        let r = bessel_ratio_i1_i0(700.0).unwrap();
        assert!(r > 0.999 && r < 1.0);
        let series = 1.0 - 1.0 / 1400.0 - 1.0 / (8.0 * 700.0f64.powi(2));
        assert!((r - series).abs() < 1e-9);
    }

    #[test]
    fn bessel_scaled_monotone_decreasing() {
        let mut prev = bessel_i(0, 0.0, true).unwrap();
        for i in 1..400 {
            let x = i as f64 * 0.37;
            let v = bessel_i(0, x, true).unwrap();
            assert!(v < prev && v > 0.0, "e^-x I0 not decreasing at x = {x}");
            prev = v;
        }
    }

    #[test]
    fn bessel_ratio_monotone_increasing() {
        let mut prev = -1.0;
        for i in 0..300 {
            let x = i as f64 * 0.5;
            let r = bessel_ratio_i1_i0(x).unwrap();
            assert!(r > prev && r < 1.0);
            prev = r;
        }
    }

    #[test]
    fn bessel_rejects_bad_domain() {
        assert!(bessel_i(0, -1.0, false).is_err());
        assert!(bessel_i(2, 1.0, false).is_err());
    }

    #[test]
    fn log_bessel_consistent() {
        let x = 300.0;
        let direct = bessel_i0(x).unwrap().ln();
        assert!((log_bessel_i0(x).unwrap() - direct).abs() < 1e-12 * direct.abs());
        // far beyond linear overflow
        let big = log_bessel_i0(5e4).unwrap();
        assert!(big > 4.9e4 && big.is_finite());
    }

    #[test]
    fn lambert_branch_point() {
        let e = core::f64::consts::E;
        assert_eq!(lambert_w_minus1(-1.0 / e).unwrap(), -1.0);
        assert!(lambert_w_minus1(-1.0 / e - 1e-6).is_err());
        assert!(lambert_w_minus1(0.0).is_err());
        assert!(lambert_w_minus1(0.5).is_err());
    }

    #[test]
    fn lambert_against_bisection_oracle() {
        let w = lambert_w_minus1(-0.1).unwrap();
        assert!((w - lambert_oracle(-0.1)).abs() < 1e-12);
        assert!((w + 3.577).abs() < 1e-3);

        // the argument that appears in the N = 1001 optimum
        let x = -core::f64::consts::PI * core::f64::consts::E / 8008.0;
        let w = lambert_w_minus1(x).unwrap();
        assert!((w - lambert_oracle(x)).abs() < 1e-11);
        assert!((w + 9.05).abs() < 0.02);
    }

    #[test]
    fn lambert_residual_logspaced_sweep() {
        // 1000 log-spaced arguments spanning the domain
        let e = core::f64::consts::E;
        for i in 0..1000 {
            let t = i as f64 / 999.0;
            // x from -1/e * (1 - 1e-12) up towards -1e-300
            let x = -(1.0 / e) * (1e-280f64).powf(t) * (1.0 - 1e-12);
            let w = lambert_w_minus1(x).unwrap();
            let residual = (w * w.exp() - x).abs();
            assert!(
                residual <= 1e-12 * x.abs(),
                "x = {x:e}: w = {w}, residual {residual:e}"
            );
            assert!(w <= -1.0);
        }
    }

    #[test]
    fn sextic_closed_forms() {
        let spec = QuadratureSpec::default();
        // k = 0, eta = 0: (1/6) 6^{1/6} Gamma(1/6)
        let want = 6.0f64.powf(1.0 / 6.0) / 6.0 * libm::tgamma(1.0 / 6.0);
        let got = sextic_gaussian_integral(0, 0.0, &spec).unwrap();
        assert!((got.value - want).abs() < 1e-10 * want);

        // k = 2, eta = 0: sqrt(pi/6)
        let want = (core::f64::consts::PI / 6.0).sqrt();
        let got = sextic_gaussian_integral(2, 0.0, &spec).unwrap();
        assert!((got.value - want).abs() < 1e-10 * want);
    }

    #[test]
    fn sextic_gaussian_limit() {
        // large positive eta: the sextic term is negligible and the integral
        // approaches the half-Gaussian value sqrt(pi/(8 eta))
        let spec = QuadratureSpec::default();
        let eta = 1e4;
        let want = (core::f64::consts::PI / (8.0 * eta)).sqrt();
        let got = sextic_gaussian_integral(0, eta, &spec).unwrap();
        assert!((got.value - want).abs() < 1e-12 * want);
    }

    #[test]
    fn sextic_log_domain_no_overflow() {
        let spec = QuadratureSpec::default();
        let got = sextic_gaussian_integral(0, -80.0, &spec).unwrap();
        // exponent peak is (8/3)|eta|^{3/2} ~ 1908: linear value overflows
        assert!(got.log_value > 1800.0 && got.log_value.is_finite());
        assert!(got.value.is_infinite());
    }

    #[test]
    fn mu0_gamma_closed_form_at_zero() {
        let spec = QuadratureSpec::default();
        let r = mu0_integral(0.0, &spec).unwrap();
        let j0 = 1.5f64.powf(1.0 / 3.0) * libm::tgamma(4.0 / 3.0);
        let want = j0 * j0;
        let got = r.quadrature.unwrap();
        assert!((got - want).abs() < 1e-9 * want, "{got} vs {want}");
        assert!(!r.saddle_regime_valid);
    }

    #[test]
    fn mu0_saddle_printed_form() {
        let spec = QuadratureSpec::default();
        let r = mu0_integral(-2.0, &spec).unwrap();
        let want = core::f64::consts::PI * (8.0 * 2.0f64.powf(1.5) / 3.0).exp()
            / (2.0 * 2.0f64.sqrt());
        assert!((r.saddle.unwrap() - want).abs() < 1e-12 * want);
        assert!(r.saddle_regime_valid);
    }

    #[test]
    fn mu0_quadrature_vs_saddle() {
        let spec = QuadratureSpec::default();
        let r = mu0_integral(-3.0, &spec).unwrap();
        let (q, s) = (r.quadrature.unwrap(), r.saddle.unwrap());
        assert!((q - s).abs() / q < 0.05, "quad {q} vs saddle {s}");
    }

    #[test]
    fn mu0_rejects_positive_eta() {
        assert!(mu0_integral(0.5, &QuadratureSpec::default()).is_err());
    }
}
