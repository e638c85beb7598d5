//! Closed-form finite-size predictions for both models: linearized
//! fluctuations, Bessel-function observables of the squeezed-decay steady
//! state, the Lambert-W optima, mean-field and classical results for driven
//! superradiance, and the critical-region formulas built from the sextic
//! integrals.
//!
//! Every entry point returns its validity regime alongside the numbers;
//! nothing silently extrapolates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::QuadratureSpec;
use crate::special;
use crate::steady::Model;

/// Validity regime attached to every closed-form evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValidityLevel {
    Valid,
    /// usable, but approaching the edge of its derivation regime
    Marginal,
    Invalid,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Validity {
    pub level: ValidityLevel,
    pub note: Option<String>,
}

impl Validity {
    fn valid() -> Self {
        Self {
            level: ValidityLevel::Valid,
            note: None,
        }
    }

    fn marginal(note: impl Into<String>) -> Self {
        Self {
            level: ValidityLevel::Marginal,
            note: Some(note.into()),
        }
    }

    fn invalid(note: impl Into<String>) -> Self {
        Self {
            level: ValidityLevel::Invalid,
            note: Some(note.into()),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.level == ValidityLevel::Valid
    }

    pub fn is_usable(&self) -> bool {
        self.level != ValidityLevel::Invalid
    }
}

/// Critical-region rescaling shared by all modules:
/// delta Upsilon = Upsilon - 1 = (2N)^{-2/3} (2 eta).
pub fn delta_upsilon_from_eta(n: u32, eta: f64) -> f64 {
    2.0 * eta * (2.0 * n as f64).powf(-2.0 / 3.0)
}

pub fn eta_from_delta_upsilon(n: u32, delta_upsilon: f64) -> f64 {
    0.5 * delta_upsilon * (2.0 * n as f64).powf(2.0 / 3.0)
}

// ---------------------------------------------------------------------------
// squeezed decay
// ---------------------------------------------------------------------------

/// Linearized (strong-polarization) fluctuations of the SDM dark state.
#[derive(Debug, Clone, Serialize)]
pub struct SdmLinearized {
    pub x_var: f64,
    pub p_var: f64,
    pub xi2: f64,
    pub validity: Validity,
}

/// 2<x^2> = 1/(2<p^2>) = zeta, squeezing xi^2 = zeta.
pub fn sdm_linearized(zeta: f64) -> Result<SdmLinearized> {
    if !(zeta > 0.0 && zeta <= 1.0) {
        return Err(Error::ParameterRange {
            name: "zeta",
            value: zeta,
            range: "(0, 1]",
        });
    }
    let p_var = 0.5 / zeta;
    let validity = if zeta < 1e-2 {
        Validity::invalid(format!(
            "linearization invalid: transverse variance {p_var:.1e} diverges as zeta -> 0"
        ))
    } else {
        Validity::valid()
    };
    Ok(SdmLinearized {
        x_var: 0.5 * zeta,
        p_var,
        xi2: zeta,
        validity,
    })
}

/// Bessel-ratio observables of the even-N dark state.
#[derive(Debug, Clone, Serialize)]
pub struct SdmEven {
    pub sz: f64,
    pub sx2: f64,
    pub xi2: f64,
    pub validity: Validity,
}

/// <S_z> = -(N/2) I1(zeta N)/I0(zeta N), <S_x^2> = (zeta N/4) I1/I0,
/// xi^2 = zeta I0/I1; xi^2 -> 2/N as zeta -> 0.
pub fn sdm_even(n: u32, zeta: f64) -> Result<SdmEven> {
    if n < 2 {
        return Err(Error::InvalidParticleNumber(n as i64));
    }
    if !(zeta > 0.0 && zeta <= 1.0) {
        return Err(Error::ParameterRange {
            name: "zeta",
            value: zeta,
            range: "(0, 1]",
        });
    }
    let x = zeta * n as f64;
    let ratio = special::bessel_ratio_i1_i0(x)?;
    Ok(SdmEven {
        sz: -(n as f64 / 2.0) * ratio,
        sx2: 0.25 * x * ratio,
        xi2: zeta / ratio,
        validity: Validity::valid(),
    })
}

/// Odd-N observables: dominant eigenstate plus the bulk of the spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct SdmOdd {
    /// ln of the dominant raw eigenvalue pi^2 I0(zeta N)^2
    pub log_lambda0: f64,
    pub sz: f64,
    pub sx2: f64,
    /// dominant eigenstate part of xi^2 (zeta I0/I1)
    pub xi2_dominant: f64,
    /// bulk part of xi^2 (4 / (pi^2 I1(zeta N)^2))
    pub xi2_bulk: f64,
    pub xi2: f64,
    /// minimum-capturing simplification zeta + (8 zeta N / pi) e^{-2 zeta N}
    pub xi2_approx: f64,
    pub validity: Validity,
}

pub fn sdm_odd(n: u32, zeta: f64) -> Result<SdmOdd> {
    if n % 2 != 1 {
        return Err(Error::ParameterRange {
            name: "n",
            value: n as f64,
            range: "odd",
        });
    }
    if !(zeta > 0.0 && zeta <= 1.0) {
        return Err(Error::ParameterRange {
            name: "zeta",
            value: zeta,
            range: "(0, 1]",
        });
    }
    let nf = n as f64;
    let x = zeta * nf;
    let ratio = special::bessel_ratio_i1_i0(x)?;
    let log_i0 = special::log_bessel_i0(x)?;
    let log_i1 = special::log_bessel_i1(x)?;
    let pi = core::f64::consts::PI;

    let log_lambda0 = 2.0 * pi.ln() + 2.0 * log_i0;
    // bulk of <S_x^2>: (N / (1 + zeta)) / lambda0, formed in the log domain
    let bulk_sx2 = ((nf / (1.0 + zeta)).ln() - log_lambda0).exp();
    let sx2 = 0.25 * x * ratio + bulk_sx2;
    let xi2_dominant = zeta / ratio;
    let xi2_bulk = (4.0f64.ln() - 2.0 * pi.ln() - 2.0 * log_i1).exp();
    let xi2 = xi2_dominant + xi2_bulk;
    let xi2_approx = zeta + ((8.0 * x / pi).ln() - 2.0 * x).exp();

    let validity = if x < 0.5 {
        Validity::marginal("dominant-eigenvalue form degrades for zeta N below ~1")
    } else {
        Validity::valid()
    };
    Ok(SdmOdd {
        log_lambda0,
        sz: -(nf / 2.0) * ratio,
        sx2,
        xi2_dominant,
        xi2_bulk,
        xi2,
        xi2_approx,
        validity,
    })
}

/// Optimal squeezing of the odd-N SDM: exact Lambert-W forms and their
/// large-N logarithmic expansions.
#[derive(Debug, Clone, Serialize)]
pub struct SdmOptimum {
    pub zeta_min: f64,
    pub xi2_min: f64,
    pub zeta_min_expanded: f64,
    pub xi2_min_expanded: f64,
}

/// zeta_min N = [1 - W_{-1}(-pi e / 8N)] / 2 and
/// xi2_min = zeta_min (1 + 1/(2 zeta_min N - 1)).
pub fn sdm_optimum(n: u32) -> Result<SdmOptimum> {
    if n < 11 || n % 2 != 1 {
        return Err(Error::ParameterRange {
            name: "n",
            value: n as f64,
            range: "odd, >= 11",
        });
    }
    let nf = n as f64;
    let pi = core::f64::consts::PI;
    let e = core::f64::consts::E;
    let w = special::lambert_w_minus1(-pi * e / (8.0 * nf))?;
    let zmn = 0.5 * (1.0 - w);
    let zeta_min = zmn / nf;
    let xi2_min = zeta_min * (1.0 + 1.0 / (2.0 * zmn - 1.0));

    let zmn_expanded = 0.5 * ((8.0 * nf / pi).ln() + (8.0 * nf / (pi * e)).ln().ln());
    let xi2_min_expanded =
        ((8.0 * nf * e / pi).ln() + (8.0 * nf / (pi * e)).ln().ln()) / (2.0 * nf);
    Ok(SdmOptimum {
        zeta_min,
        xi2_min,
        zeta_min_expanded: zmn_expanded / nf,
        xi2_min_expanded,
    })
}

// ---------------------------------------------------------------------------
// driven superradiance
// ---------------------------------------------------------------------------

/// Mean-field Bloch vector in the polarized phase.
#[derive(Debug, Clone, Serialize)]
pub struct CrfMeanField {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    pub validity: Validity,
}

/// [<S_x>, <S_y>, <S_z>] = (N/2) [0, Upsilon, -sqrt(1 - Upsilon^2)].
pub fn crf_mean_field(n: u32, upsilon: f64) -> Result<CrfMeanField> {
    if !(0.0..=1.0).contains(&upsilon) {
        return Err(Error::ParameterRange {
            name: "upsilon",
            value: upsilon,
            range: "[0, 1]",
        });
    }
    let nf = n as f64;
    Ok(CrfMeanField {
        sx: 0.0,
        sy: 0.5 * nf * upsilon,
        sz: -0.5 * nf * (1.0 - upsilon * upsilon).sqrt(),
        validity: Validity::valid(),
    })
}

/// Classical moments of the diffuse above-threshold steady state.
#[derive(Debug, Clone, Serialize)]
pub struct CrfAboveThreshold {
    /// closed-form <S_y>
    pub sy: f64,
    /// numerically integrated moments of the classical distribution
    pub sx_classical: f64,
    pub sy_classical: f64,
    pub sz_classical: f64,
    pub sx2_classical: f64,
    pub validity: Validity,
}

/// <S_y> = (N / 2 Upsilon) [Upsilon^2 - sqrt(Upsilon^2 - 1)/asin(1/Upsilon)]
/// plus the sphere-measure moments of the classical weight
/// 1 / |sin(theta) e^{-i phi} + i Upsilon|^2.
pub fn crf_above_threshold(n: u32, upsilon: f64) -> Result<CrfAboveThreshold> {
    if !(upsilon > 1.0) {
        return Err(Error::ParameterRange {
            name: "upsilon",
            value: upsilon,
            range: "(1, inf)",
        });
    }
    let nf = n as f64;
    let sy = nf / (2.0 * upsilon)
        * (upsilon * upsilon - (upsilon * upsilon - 1.0).sqrt() / (1.0 / upsilon).asin());

    // classical weight over the sphere measure sin(theta) dtheta dphi;
    // periodic in phi, so the midpoint product rule converges fast
    let nt = 512usize;
    let np = 512usize;
    let mut z = 0.0; // normalization
    let mut mx = 0.0;
    let mut my = 0.0;
    let mut mz = 0.0;
    let mut mx2 = 0.0;
    for i in 0..nt {
        let theta = (i as f64 + 0.5) * core::f64::consts::PI / nt as f64;
        let st = theta.sin();
        let ct = theta.cos();
        for j in 0..np {
            let phi = j as f64 * 2.0 * core::f64::consts::PI / np as f64;
            let denom = st * st + upsilon * upsilon - 2.0 * upsilon * st * phi.sin();
            let w = st / denom;
            z += w;
            mx += w * 0.5 * nf * st * phi.cos();
            my += w * 0.5 * nf * st * phi.sin();
            mz += w * 0.5 * nf * ct;
            mx2 += w * 0.25 * nf * nf * st * st * phi.cos() * phi.cos();
        }
    }
    let validity = if upsilon < 1.02 {
        Validity::marginal("classical description blurs into the critical region near threshold")
    } else {
        Validity::valid()
    };
    Ok(CrfAboveThreshold {
        sy,
        sx_classical: mx / z,
        sy_classical: my / z,
        sz_classical: mz / z,
        sx2_classical: mx2 / z,
        validity,
    })
}

/// Linearized below-threshold fluctuations.
#[derive(Debug, Clone, Serialize)]
pub struct CrfBelowThreshold {
    pub x_var: f64,
    pub p_var: f64,
    pub xi2: f64,
    pub validity: Validity,
}

/// 2<x^2> = 1/(2<p^2>) = cos(alpha) = sqrt(1 - Upsilon^2), xi^2 = cos(alpha).
pub fn crf_below_threshold(upsilon: f64) -> Result<CrfBelowThreshold> {
    if !(0.0..1.0).contains(&upsilon) {
        return Err(Error::ParameterRange {
            name: "upsilon",
            value: upsilon,
            range: "[0, 1)",
        });
    }
    let cos_alpha = (1.0 - upsilon * upsilon).sqrt();
    let validity = if cos_alpha < 1e-2 {
        Validity::invalid(format!(
            "linearization invalid: transverse variance {:.1e} diverges at threshold",
            0.5 / cos_alpha
        ))
    } else {
        Validity::valid()
    };
    Ok(CrfBelowThreshold {
        x_var: 0.5 * cos_alpha,
        p_var: 0.5 / cos_alpha,
        xi2: cos_alpha,
        validity,
    })
}

/// Critical-region observables at rescaled detuning eta <= 0.
#[derive(Debug, Clone, Serialize)]
pub struct CrfCritical {
    pub eta: f64,
    /// ln mu0 from the one-sided integral and from its saddle form
    pub log_mu0_quadrature: f64,
    pub log_mu0_saddle: f64,
    /// saddle-point <S_x^2> = (N/4)^{2/3} sqrt|eta| (1 + (2N/3pi) e^{-(8/3)|eta|^{3/2}})
    pub sx2_saddle: f64,
    /// subtracted form of <S_x^2>, valid down to eta = 0
    pub sx2_uniform: f64,
    /// |<S_z>| = (N/4)^{2/3} F2(eta)/F0(eta); the Bloch vector points to -z
    pub sz_uniform: f64,
    /// <S_y> - N/2 (negative)
    pub sy_deficit_uniform: f64,
    pub xi2_saddle: f64,
    pub xi2_uniform: f64,
    pub validity: Validity,
}

/// Evaluates the critical-region forms from the sextic integrals
/// F_k(eta) = int_0^inf v^k exp(-v^6/6 - 2 eta v^2) dv.
pub fn crf_critical(n: u32, eta: f64, spec: &QuadratureSpec) -> Result<CrfCritical> {
    if !(eta <= 0.0) {
        return Err(Error::ParameterRange {
            name: "eta",
            value: eta,
            range: "(-inf, 0]",
        });
    }
    let nf = n as f64;
    let pi = core::f64::consts::PI;
    let n_quarter_23 = (0.25 * nf).powf(2.0 / 3.0);

    let mu0 = special::mu0_integral(eta, spec)?;

    let abs_eta = -eta;
    let sx2_saddle = n_quarter_23
        * abs_eta.sqrt()
        * (1.0 + ((2.0 * nf / (3.0 * pi)).ln() - 8.0 / 3.0 * abs_eta.powf(1.5)).exp());

    let f0 = special::sextic_gaussian_integral(0, eta, spec)?;
    let f2 = special::sextic_gaussian_integral(2, eta, spec)?;
    let f2_at_zero = special::sextic_gaussian_integral(2, 0.0, spec)?;

    let sz_uniform = n_quarter_23 * (f2.log_value - f0.log_value).exp();
    let sy_deficit_uniform = 0.5 * (2.0 * nf).powf(1.0 / 3.0) * eta
        - ((2.0 / pi).sqrt().ln() + n_quarter_23.ln() - f0.log_value).exp();
    // (F2(eta) - F2(0)) / (2 F0) + (N/3) / (sqrt(2 pi) F0), all through ratios
    let sx2_uniform = n_quarter_23
        * (0.5 * ((f2.log_value - f0.log_value).exp() - (f2_at_zero.log_value - f0.log_value).exp())
            + ((nf / 3.0).ln() - 0.5 * (2.0 * pi).ln() - f0.log_value).exp());

    let quarter_n = 0.25 * nf;
    let validity = if eta > -1.0 {
        Validity::marginal("saddle-point variants need eta <~ -1; uniform forms remain usable")
    } else {
        Validity::valid()
    };
    Ok(CrfCritical {
        eta,
        log_mu0_quadrature: mu0.log_quadrature,
        log_mu0_saddle: mu0.log_saddle,
        sx2_saddle,
        sx2_uniform,
        sz_uniform,
        sy_deficit_uniform,
        xi2_saddle: sx2_saddle / quarter_n,
        xi2_uniform: sx2_uniform / quarter_n,
        validity,
    })
}

/// Optimal squeezing of driven superradiance.
#[derive(Debug, Clone, Serialize)]
pub struct CrfOptimum {
    /// |eta| at the squeezing minimum
    pub abs_eta_min: f64,
    pub xi2_min: f64,
    pub abs_eta_min_expanded: f64,
    pub xi2_min_expanded: f64,
}

/// |eta|_min = [1/8 - (3/8) W_{-1}(-pi e^{1/3} / 2N)]^{2/3} and
/// xi2_min = (N/4)^{-1/3} sqrt|eta| 8|eta|^{3/2} / (8|eta|^{3/2} - 1).
pub fn crf_optimum(n: u32) -> Result<CrfOptimum> {
    if n < 10 {
        return Err(Error::ParameterRange {
            name: "n",
            value: n as f64,
            range: ">= 10",
        });
    }
    let nf = n as f64;
    let pi = core::f64::consts::PI;
    let w = special::lambert_w_minus1(-pi * (1.0f64 / 3.0).exp() / (2.0 * nf))?;
    let abs_eta_min = (0.125 - 0.375 * w).powf(2.0 / 3.0);
    let t32 = 8.0 * abs_eta_min.powf(1.5);
    let xi2_min = (0.25 * nf).powf(-1.0 / 3.0) * abs_eta_min.sqrt() * (t32 / (t32 - 1.0));

    let abs_eta_min_expanded = (0.375 * (2.0 * nf / pi).ln()).powf(2.0 / 3.0);
    let xi2_min_expanded = (1.5 / nf * (2.0 * nf / pi).ln()).powf(1.0 / 3.0);
    Ok(CrfOptimum {
        abs_eta_min,
        xi2_min,
        abs_eta_min_expanded,
        xi2_min_expanded,
    })
}

// ---------------------------------------------------------------------------
// sweep-facing variant evaluation
// ---------------------------------------------------------------------------

/// Named analytic variants that a sweep can evaluate per parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalyticVariant {
    SdmLinearized,
    SdmEven,
    SdmOdd,
    CrfMeanField,
    CrfAboveThreshold,
    CrfBelowThreshold,
    CrfCritical,
}

impl AnalyticVariant {
    pub fn name(self) -> &'static str {
        match self {
            AnalyticVariant::SdmLinearized => "sdm-linearized",
            AnalyticVariant::SdmEven => "sdm-even",
            AnalyticVariant::SdmOdd => "sdm-odd",
            AnalyticVariant::CrfMeanField => "crf-mean-field",
            AnalyticVariant::CrfAboveThreshold => "crf-above-threshold",
            AnalyticVariant::CrfBelowThreshold => "crf-below-threshold",
            AnalyticVariant::CrfCritical => "crf-critical",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sdm-linearized" => Some(Self::SdmLinearized),
            "sdm-even" => Some(Self::SdmEven),
            "sdm-odd" => Some(Self::SdmOdd),
            "crf-mean-field" => Some(Self::CrfMeanField),
            "crf-above-threshold" => Some(Self::CrfAboveThreshold),
            "crf-below-threshold" => Some(Self::CrfBelowThreshold),
            "crf-critical" => Some(Self::CrfCritical),
            _ => None,
        }
    }

    /// Variants that make sense for a model, used as the sweep default.
    pub fn defaults_for(model: Model, n: u32) -> Vec<Self> {
        match model {
            Model::Sdm => {
                if n % 2 == 0 {
                    vec![Self::SdmEven, Self::SdmLinearized]
                } else {
                    vec![Self::SdmOdd, Self::SdmLinearized]
                }
            }
            Model::DrivenSuperradiance => vec![
                Self::CrfMeanField,
                Self::CrfBelowThreshold,
                Self::CrfAboveThreshold,
                Self::CrfCritical,
            ],
        }
    }
}

/// One analytic variant evaluated at one sweep point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariantRecord {
    pub variant: String,
    pub sx: Option<f64>,
    pub sy: Option<f64>,
    pub sz: Option<f64>,
    pub sx2: Option<f64>,
    pub xi2: Option<f64>,
    pub valid: bool,
    pub note: Option<String>,
}

/// Evaluates a variant at a sweep point (`param` is zeta or Upsilon).
pub fn evaluate_variant(
    variant: AnalyticVariant,
    n: u32,
    param: f64,
    spec: &QuadratureSpec,
) -> Result<VariantRecord> {
    let rec = |sx: Option<f64>,
               sy: Option<f64>,
               sz: Option<f64>,
               sx2: Option<f64>,
               xi2: Option<f64>,
               validity: &Validity| VariantRecord {
        variant: variant.name().to_string(),
        sx,
        sy,
        sz,
        sx2,
        xi2,
        valid: validity.is_valid(),
        note: validity.note.clone(),
    };
    match variant {
        AnalyticVariant::SdmLinearized => {
            let v = sdm_linearized(param)?;
            Ok(rec(None, None, None, None, Some(v.xi2), &v.validity))
        }
        AnalyticVariant::SdmEven => {
            let v = sdm_even(n, param)?;
            Ok(rec(
                Some(0.0),
                Some(0.0),
                Some(v.sz),
                Some(v.sx2),
                Some(v.xi2),
                &v.validity,
            ))
        }
        AnalyticVariant::SdmOdd => {
            let v = sdm_odd(n, param)?;
            Ok(rec(
                Some(0.0),
                Some(0.0),
                Some(v.sz),
                Some(v.sx2),
                Some(v.xi2),
                &v.validity,
            ))
        }
        AnalyticVariant::CrfMeanField => {
            let v = crf_mean_field(n, param.min(1.0))?;
            let validity = if param > 1.0 {
                Validity::invalid("mean-field polarized phase requires Upsilon <= 1")
            } else {
                v.validity.clone()
            };
            Ok(rec(Some(v.sx), Some(v.sy), Some(v.sz), None, None, &validity))
        }
        AnalyticVariant::CrfAboveThreshold => {
            if param <= 1.0 {
                return Ok(rec(
                    None,
                    None,
                    None,
                    None,
                    None,
                    &Validity::invalid("above-threshold forms require Upsilon > 1"),
                ));
            }
            let v = crf_above_threshold(n, param)?;
            Ok(rec(
                Some(v.sx_classical),
                Some(v.sy),
                Some(v.sz_classical),
                Some(v.sx2_classical),
                None,
                &v.validity,
            ))
        }
        AnalyticVariant::CrfBelowThreshold => {
            if !(0.0..1.0).contains(&param) {
                return Ok(rec(
                    None,
                    None,
                    None,
                    None,
                    None,
                    &Validity::invalid("below-threshold forms require Upsilon < 1"),
                ));
            }
            let v = crf_below_threshold(param)?;
            Ok(rec(None, None, None, None, Some(v.xi2), &v.validity))
        }
        AnalyticVariant::CrfCritical => {
            if param > 1.0 {
                return Ok(rec(
                    None,
                    None,
                    None,
                    None,
                    None,
                    &Validity::invalid("critical forms cover Upsilon <= 1 (eta <= 0)"),
                ));
            }
            let eta = eta_from_delta_upsilon(n, param - 1.0);
            let v = crf_critical(n, eta, spec)?;
            // the uniform |<S_z>| form carries the magnitude; the state sits
            // on the southern hemisphere
            Ok(rec(
                Some(0.0),
                Some(0.5 * n as f64 + v.sy_deficit_uniform),
                Some(-v.sz_uniform),
                Some(v.sx2_uniform),
                Some(v.xi2_uniform),
                &v.validity,
            ))
        }
    }
}
