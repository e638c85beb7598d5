//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured numbers (run with `--nocapture` to see them all).
//!
//! Three criteria are known-red because their tolerances sit below the
//! genuine accuracy of the closed forms at the edge of their validity
//! windows (the numerics themselves are cross-validated to 1e-8 by the
//! null-space oracle of criterion 1):
//!
//! * criterion 3: the dominant-eigenvalue form pi^2 I0(zeta N)^2 carries an
//!   N-independent -22% error at zeta N = 1 (converges into 5% only for
//!   zeta N >~ 2);
//! * criterion 5: the one-sided-integral form of mu0 is 38% high at
//!   eta = -0.5 (5% holds for eta <~ -1.5);
//! * criterion 8: the subtracted critical-region formulas carry
//!   O(N^{-1/3}) corrections, ~18% worst-point at N = 1e3 in the eta ~ -1
//!   crossover pocket against the stated 10% (medians pass and improve
//!   with N).
//!
//! Each red test prints the per-point table before asserting the stated
//! tolerance.
//!
//! `STEADYSPIN_ACCEPTANCE_MAX_N` caps the largest particle number used by
//! the heavy criteria (default 10000).

use std::time::Instant;

use steadyspin::analytic;
use steadyspin::quad::QuadratureSpec;
use steadyspin::special;
use steadyspin::spectral::{self, OscillatorGrid};
use steadyspin::steady::{self, Model, ModelParams};
use steadyspin::sweep::{self, FitFamily};

fn max_n_cap() -> u32 {
    std::env::var("STEADYSPIN_ACCEPTANCE_MAX_N")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(10_000)
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn criterion_01_oracle_equivalence() {
    let start = Instant::now();
    let report = sweep::verify_oracles(12, 20, 0x5eed);
    let elapsed = start.elapsed().as_secs_f64();
    let pass = report.passed() && elapsed < 60.0;
    println!(
        "criterion 1: {} — {} closed-form vs null-space cases, max deviation {:.3e} (tol 1e-8), {:.1} s (budget 60 s)",
        if pass { "PASS" } else { "FAIL" },
        report.cases,
        report.max_deviation,
        elapsed
    );
    assert!(report.passed(), "failures: {:?}", report.failures);
    assert!(elapsed < 60.0, "runtime {elapsed:.1} s exceeds 1 min");
}

#[test]
fn criterion_02_sdm_observable_curves() {
    // numeric <S_z> and Var(S_x) against the Bessel-ratio forms over
    // zeta in [1e-3, 1] for the even/odd pair N = 1000 / 1001
    let mut worst_sz = 0.0f64;
    let mut worst_var = 0.0f64;
    for zeta in log_grid(1e-3, 1.0, 25) {
        for n in [1000u32, 1001] {
            let rec = steady::trace_observables(&ModelParams::sdm(n, zeta).unwrap()).unwrap();
            let (sz_a, sx2_a) = if n % 2 == 0 {
                let v = analytic::sdm_even(n, zeta).unwrap();
                (v.sz, v.sx2)
            } else {
                let v = analytic::sdm_odd(n, zeta).unwrap();
                (v.sz, v.sx2)
            };
            worst_sz = worst_sz.max(rel(rec.sz, sz_a));
            worst_var = worst_var.max(rel(rec.var_x, sx2_a));
        }
    }

    // squeezing near the odd-N minimum against the dominant+bulk form
    let opt = analytic::sdm_optimum(1001).unwrap();
    let mut worst_xi2 = 0.0f64;
    for f in [0.7, 0.85, 1.0, 1.2, 1.5] {
        let zeta = f * opt.zeta_min;
        let rec = steady::trace_observables(&ModelParams::sdm(1001, zeta).unwrap()).unwrap();
        let v = analytic::sdm_odd(1001, zeta).unwrap();
        worst_xi2 = worst_xi2.max(rel(rec.xi2.unwrap(), v.xi2));
    }

    let pass = worst_sz <= 0.02 && worst_var <= 0.02 && worst_xi2 <= 0.05;
    println!(
        "criterion 2: {} — N=1000/1001 curves: worst dSz {:.2}% / dVar {:.2}% (tol 2%), near-minimum dXi2 {:.2}% (tol 5%)",
        if pass { "PASS" } else { "FAIL" },
        100.0 * worst_sz,
        100.0 * worst_var,
        100.0 * worst_xi2
    );
    assert!(worst_sz <= 0.02, "Sz deviation {worst_sz:.4}");
    assert!(worst_var <= 0.02, "Var(Sx) deviation {worst_var:.4}");
    assert!(worst_xi2 <= 0.05, "xi2 deviation {worst_xi2:.4}");
}

#[test]
fn criterion_03_dominant_eigenvalue() {
    let n = 1001u32;
    let mut worst = 0.0f64;
    let mut table = String::new();
    for zn in [1.0f64, 2.5, 4.0, 5.5, 7.0, 8.5, 10.0] {
        let state = steady::sdm_steady_state_odd(&ModelParams::sdm(n, zn / n as f64).unwrap())
            .unwrap();
        let got = state.log_raw().unwrap()[0];
        let want =
            2.0 * core::f64::consts::PI.ln() + 2.0 * special::log_bessel_i0(zn).unwrap();
        // |lambda0 / (pi^2 I0^2) - 1| through the log difference
        let dev = ((got - want).exp() - 1.0).abs();
        table += &format!(" zn={zn}: {:.1}%", 100.0 * dev);
        worst = worst.max(dev);
    }
    let pass = worst <= 0.05;
    println!(
        "criterion 3: {} — raw lambda0 vs pi^2 I0(zeta N)^2 at N=1001, zeta N in [1, 10]: worst {:.2}% (tol 5%); per point:{}",
        if pass { "PASS" } else { "FAIL" },
        100.0 * worst,
        table
    );
    assert!(
        pass,
        "lambda0 deviation {worst:.4}: the closed form has an intrinsic, \
         N-independent deviation at the zeta N = 1 edge (exact/formula -> 0.781 \
         as N grows); it enters the 5% band only for zeta N >~ 2. per point:{table}"
    );
}

#[test]
fn criterion_04_bulk_sums() {
    let n = 1001u32;
    let basis = steadyspin::dicke::DickeBasis::new(n).unwrap();
    let ops = steadyspin::dicke::build_operators(&basis);
    let sx2 = &ops.sx.matrix * &ops.sx.matrix;

    let mut worst_sdm = 0.0f64;
    for zeta in [0.05f64, 0.1, 0.25, 0.5, 0.75, 1.0] {
        let state = steady::sdm_steady_state_odd(&ModelParams::sdm(n, zeta).unwrap()).unwrap();
        let spec = spectral::spectrum(&state);
        let got = spectral::bulk_sum(&spec, sx2.as_ref()).unwrap();
        let want = n as f64 / (1.0 + zeta);
        worst_sdm = worst_sdm.max(rel(got, want));
    }

    let mut worst_crf = 0.0f64;
    for upsilon in [0.1f64, 0.25, 0.5, 0.75, 0.9, 1.0] {
        let state = steady::crf_steady_state(&ModelParams::crf(n, upsilon).unwrap()).unwrap();
        let spec = spectral::spectrum(&state);
        let got = spectral::bulk_sum(&spec, sx2.as_ref()).unwrap();
        let want = n as f64 / 3.0 * (1.0 - (1.0 - upsilon * upsilon).powf(1.5))
            / (upsilon * upsilon);
        worst_crf = worst_crf.max(rel(got, want));
    }

    let pass = worst_sdm <= 0.02 && worst_crf <= 0.02;
    println!(
        "criterion 4: {} — bulk sums at N=1001: SDM vs N/(1+zeta) worst {:.2}%, CRF vs (N/3)[1-(1-Y^2)^(3/2)]/Y^2 worst {:.2}% (tol 2%)",
        if pass { "PASS" } else { "FAIL" },
        100.0 * worst_sdm,
        100.0 * worst_crf
    );
    assert!(worst_sdm <= 0.02, "SDM bulk deviation {worst_sdm:.4}");
    assert!(worst_crf <= 0.02, "CRF bulk deviation {worst_crf:.4}");
}

#[test]
fn criterion_05_oscillator() {
    let quad = QuadratureSpec::default();
    let mut worst = 0.0f64;
    let mut table = String::new();
    for eta in [-3.0f64, -2.5, -2.0, -1.5, -1.0, -0.5] {
        let sol = spectral::solve_oscillator(eta, &OscillatorGrid::default()).unwrap();
        let integral = special::mu0_integral(eta, &quad).unwrap();
        let dev = ((sol.log_mu0 - integral.log_quadrature).exp() - 1.0).abs();
        table += &format!(" eta={eta}: {:.1}%", 100.0 * dev);
        worst = worst.max(dev);
    }

    let sol = spectral::solve_oscillator(0.0, &OscillatorGrid::default()).unwrap();
    let logs: Vec<f64> = sol.mu.iter().map(|m| m.ln()).collect();
    let fit = spectral::tail_exponent_from_logs(&logs, (10, 50)).unwrap();
    let tail_err = (fit.exponent + 4.0 / 3.0).abs();

    let pass = worst <= 0.05 && tail_err <= 0.15;
    println!(
        "criterion 5: {} — grid mu0 vs quadrature over eta in [-3, -0.5]: worst {:.2}% (tol 5%); mu_k tail exponent {:.3} (want -4/3 +- 0.15); per point:{}",
        if pass { "PASS" } else { "FAIL" },
        100.0 * worst,
        fit.exponent,
        table
    );
    assert!(tail_err <= 0.15, "tail exponent {}", fit.exponent);
    assert!(
        worst <= 0.05,
        "mu0 deviation {worst:.4}: the one-sided-integral form degrades smoothly \
         towards the eta = -0.5 edge (where the eigenvalue it expands around is \
         no longer large); 5% holds for eta <~ -1.5. per point:{table}"
    );
}

#[test]
fn criterion_06_crf_squeezing_convergence() {
    let quad = QuadratureSpec::default();
    let cap = max_n_cap();
    let ns: Vec<u32> = [100u32, 1000, 10_000]
        .into_iter()
        .filter(|&n| n <= cap.max(1000))
        .collect();

    let mut discrepancies = Vec::new();
    for &n in &ns {
        let opt = analytic::crf_optimum(n).unwrap();
        let mut best: Option<(f64, f64)> = None; // (xi2_numeric, xi2_analytic)
        for i in 0..9 {
            let eta = -opt.abs_eta_min * (0.5 + 1.5 * i as f64 / 8.0);
            let upsilon = 1.0 + analytic::delta_upsilon_from_eta(n, eta);
            if upsilon <= 0.0 {
                continue;
            }
            let rec = steady::trace_observables(&ModelParams::crf(n, upsilon).unwrap()).unwrap();
            let ana = analytic::crf_critical(n, eta, &quad).unwrap();
            let xi2 = rec.xi2.unwrap();
            if best.is_none() || xi2 < best.unwrap().0 {
                best = Some((xi2, ana.xi2_saddle));
            }
        }
        let (num, ana) = best.unwrap();
        discrepancies.push(rel(num, ana));
    }

    let monotone = discrepancies.windows(2).all(|w| w[1] < w[0]);
    let final_ok = *discrepancies.last().unwrap() <= 0.15;
    let pass = monotone && final_ok;
    println!(
        "criterion 6: {} — near-minimum xi2 discrepancy vs saddle form at N={ns:?}: {:?}% (monotone decreasing, <= 15% at N={})",
        if pass { "PASS" } else { "FAIL" },
        discrepancies
            .iter()
            .map(|d| (100.0 * d * 100.0).round() / 100.0)
            .collect::<Vec<_>>(),
        ns.last().unwrap()
    );
    assert!(monotone, "discrepancies not decreasing: {discrepancies:?}");
    assert!(final_ok, "final discrepancy {:.4}", discrepancies.last().unwrap());
}

#[test]
fn criterion_07_effective_exponent() {
    let cap = max_n_cap();
    let ns: Vec<u32> = [101u32, 215, 465, 1001, 2155, 4641, 10_001]
        .into_iter()
        .filter(|&n| n <= cap.max(2155) + 1)
        .collect();

    let mut points = Vec::new();
    for &n in &ns {
        let opt = analytic::sdm_optimum(n).unwrap();
        let scan = sweep::scan_optimum(
            Model::Sdm,
            n,
            (0.3 * opt.zeta_min, 3.0 * opt.zeta_min),
            1e-4,
        )
        .unwrap();
        points.push((n as f64, scan.xi2));
    }
    let power = sweep::fit_scaling(&points, FitFamily::PowerLaw).unwrap();
    let logc = sweep::fit_scaling(&points, FitFamily::LogCorrectedSdm).unwrap();

    let exponent = power.coefficients[1];
    let in_band = (-0.95..=-0.85).contains(&exponent);
    let logc_wins = logc.residual < power.residual;
    let pass = in_band && logc_wins;
    println!(
        "criterion 7: {} — numeric xi2_min over odd N in [1e2, 1e4]: power exponent {:.4} (want [-0.95, -0.85]); residuals: log-corrected {:.3e} < power {:.3e}: {}",
        if pass { "PASS" } else { "FAIL" },
        exponent,
        logc.residual,
        power.residual,
        logc_wins
    );
    assert!(in_band, "exponent {exponent}");
    assert!(
        logc_wins,
        "log-corrected residual {} not below power residual {}",
        logc.residual, power.residual
    );
}

#[test]
fn criterion_08_uniform_critical_formulas() {
    // KNOWN RED: the subtracted formulas carry O(N^{-1/3}) corrections that
    // exceed 10% at N = 1e3 (and still ~16% for <S_x^2> at N = 1e4) in the
    // eta ~ -1 crossover pocket. The improvement clause holds; the 10%
    // per-point clause does not. Numbers below are printed for the record.
    let quad = QuadratureSpec::default();
    let cap = max_n_cap();
    let ns: Vec<u32> = [1000u32, 10_000]
        .into_iter()
        .filter(|&n| n <= cap.max(1000))
        .collect();

    let mut per_n_max = Vec::new();
    let mut per_n_median = Vec::new();
    for &n in &ns {
        let mut devs = Vec::new();
        for du in log_grid(1e-3, 1e-1, 7) {
            let eta = analytic::eta_from_delta_upsilon(n, -du);
            let rec = steady::trace_observables(&ModelParams::crf(n, 1.0 - du).unwrap()).unwrap();
            let ana = analytic::crf_critical(n, eta, &quad).unwrap();
            devs.push(rel(rec.sz.abs(), ana.sz_uniform));
            devs.push(rel(0.5 * n as f64 - rec.sy, -ana.sy_deficit_uniform));
            devs.push(rel(rec.sx2, ana.sx2_uniform));
        }
        let max = devs.iter().cloned().fold(0.0f64, f64::max);
        let mut sorted = devs.clone();
        sorted.sort_by(f64::total_cmp);
        per_n_max.push(max);
        per_n_median.push(sorted[sorted.len() / 2]);
    }

    let improving = per_n_max.len() < 2
        || (per_n_max[1] < per_n_max[0] && per_n_median[1] < per_n_median[0]);
    let within_10pct = per_n_max[0] <= 0.10;
    let pass = within_10pct && improving;
    println!(
        "criterion 8: {} — uniform |Sz|, N/2-Sy, Sx^2 vs numerics over -dY in [1e-3, 1e-1]: worst per N {:?}%, median {:?}% (tol 10% at N=1e3; improving at N=1e4: {})",
        if pass { "PASS" } else { "FAIL" },
        per_n_max
            .iter()
            .map(|d| (d * 1e4).round() / 1e2)
            .collect::<Vec<_>>(),
        per_n_median
            .iter()
            .map(|d| (d * 1e4).round() / 1e2)
            .collect::<Vec<_>>(),
        improving
    );
    assert!(
        improving,
        "agreement did not improve with N: max {per_n_max:?}, median {per_n_median:?}"
    );
    assert!(
        within_10pct,
        "worst-point deviation at N=1e3 is {:.1}%, above the stated 10%: the subtracted \
         forms have genuine ~20% corrections in the eta ~ -1 crossover at this size \
         (medians {:.1}% -> {:.1}% do satisfy the improvement clause)",
        100.0 * per_n_max[0],
        100.0 * per_n_median[0],
        100.0 * per_n_median.get(1).copied().unwrap_or(f64::NAN)
    );
}

#[test]
fn criterion_09_parity_dichotomy() {
    // (a) even N: pure steady state. Dark-state residual across zeta N plus
    // brute-force purity at accessible sizes.
    let mut worst_residual = 0.0f64;
    for zn in log_grid(0.01, 20.0, 9) {
        let params = ModelParams::sdm(1000, zn / 1000.0).unwrap();
        let state = steady::sdm_dark_state_even(&params).unwrap();
        worst_residual = worst_residual.max(state.meta().residual.unwrap());
        assert_eq!(state.purity(), 1.0);
    }
    let mut worst_purity_gap = 0.0f64;
    for (n, zeta) in [(4u32, 0.0025f64), (12, 0.08), (40, 0.5)] {
        let state = steady::liouvillian_null_state(&ModelParams::sdm(n, zeta).unwrap()).unwrap();
        worst_purity_gap = worst_purity_gap.max((state.purity() - 1.0).abs());
    }

    // (b) odd N mixes near zeta = 0
    let mut worst_odd_purity = 0.0f64;
    for n in [101u32, 1001] {
        for zn in [0.05f64, 0.1, 0.19] {
            let state =
                steady::sdm_steady_state_odd(&ModelParams::sdm(n, zn / n as f64).unwrap())
                    .unwrap();
            worst_odd_purity = worst_odd_purity.max(state.purity());
        }
    }

    // (c) <S_z> profiles agree between N = 1000 and 1001
    let mut worst_sz = 0.0f64;
    for zn in log_grid(0.01, 20.0, 13) {
        let even = steady::trace_observables(&ModelParams::sdm(1000, zn / 1000.0).unwrap())
            .unwrap();
        let odd = steady::trace_observables(&ModelParams::sdm(1001, zn / 1001.0).unwrap())
            .unwrap();
        worst_sz = worst_sz.max(rel(odd.sz, even.sz));
    }

    let pass = worst_residual <= 1e-10
        && worst_purity_gap <= 1e-8
        && worst_odd_purity < 0.9
        && worst_sz <= 0.01;
    println!(
        "criterion 9: {} — even purity 1 (dark residual {:.1e}, null-space gap {:.1e}); odd purity < 0.9 for zeta N < 0.2 (worst {:.3}); even/odd Sz profiles within {:.2}% (tol 1%)",
        if pass { "PASS" } else { "FAIL" },
        worst_residual,
        worst_purity_gap,
        worst_odd_purity,
        100.0 * worst_sz
    );
    assert!(worst_residual <= 1e-10);
    assert!(worst_purity_gap <= 1e-8);
    assert!(worst_odd_purity < 0.9);
    assert!(worst_sz <= 0.01);
}

#[test]
fn criterion_10_above_threshold() {
    let n = 1000u32;
    let rec = steady::trace_observables(&ModelParams::crf(n, 2.0).unwrap()).unwrap();
    let upsilon: f64 = 2.0;
    let want = n as f64 / (2.0 * upsilon)
        * (upsilon * upsilon - (upsilon * upsilon - 1.0).sqrt() / (1.0 / upsilon).asin());
    let sy_dev = rel(rec.sy, want);

    let grid_spec = steadyspin::dicke::HusimiGridSpec {
        n_theta: 50,
        n_phi: 100,
    };
    let ratio = |upsilon: f64| {
        let state = steady::crf_steady_state(&ModelParams::crf(n, upsilon).unwrap()).unwrap();
        let grid = state.husimi(&grid_spec).unwrap();
        grid.max() / grid.median()
    };
    let lobed = ratio(0.75);
    let diffuse = ratio(2.0);
    let separation = lobed / diffuse;

    let pass = sy_dev <= 0.01 && separation >= 10.0;
    println!(
        "criterion 10: {} — <S_y> at Y=2, N=1000: {:.3} vs closed form {:.3} ({:.2}%, tol 1%); Husimi max/median: lobe {:.1} vs diffuse {:.1} (separation {:.0}x >= 10x)",
        if pass { "PASS" } else { "FAIL" },
        rec.sy,
        want,
        100.0 * sy_dev,
        lobed,
        diffuse,
        separation
    );
    assert!(sy_dev <= 0.01, "Sy deviation {sy_dev:.4}");
    assert!(separation >= 10.0, "Husimi separation {separation:.2}");
}
