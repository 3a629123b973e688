//! Closed-form two-photon correlation functions.
//!
//! For the factorized sources (A–D) the correlation reads
//! `C = 1 + λ·T(Δω)·Φ(q)` with λ = ½, where `T` is the squared normalized
//! temporal transform and `Φ` the squared normalized spatial transform.
//!
//! The expanding shock front (E) does not factorize. With `μ = Ṙτq` and
//! `z± = (Δω ± Ṙq)τ/2` its excess is `(9/8μ⁶)|I|²` where
//! `I = -i√π[(1 + μz⁺)W(z⁺) − (1 − μz⁻)W(z⁻)] − 2μ`. That expression already
//! carries the factor ½ (it equals ½|F(q,Δω)/F(0,0)|²), so it is written
//! here as `λ·(9/4μ⁶)|I|²`. It is 0/0 as μ → 0; below [`CASE_E_SERIES_MU`]
//! a power series in μ² is used instead.

use crate::error::{HbtError, Result};
use crate::sources::{SourceCase, SourceSpec};
use crate::special::{faddeeva, sinc};
use crate::Complex;

/// Chaoticity factor: the excess at zero relative momentum for a chaotic source.
pub const CHAOTICITY: f64 = 0.5;

/// Case E switches from the Faddeeva form to the μ series below this μ.
pub const CASE_E_SERIES_MU: f64 = 0.1;
const CASE_E_SERIES_TERMS: usize = 10;

/// Below this qR the sphere form factor uses its Taylor series.
const SPHERE_SERIES_LIMIT: f64 = 0.1;

const SQRT_PI: f64 = 1.772_453_850_905_516;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationValue {
    /// C(q, Δω).
    pub c: f64,
    /// C − 1, computed directly (not by subtraction).
    pub excess: f64,
}

impl CorrelationValue {
    pub fn from_excess(excess: f64) -> Self {
        Self { c: 1.0 + excess, excess }
    }

    pub fn uncorrelated() -> Self {
        Self { c: 1.0, excess: 0.0 }
    }
}

/// `T(Δω)` and `Φ(q)` of a factorized source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizedForm {
    pub t_factor: f64,
    pub phi: f64,
}

impl FactorizedForm {
    pub fn correlation(&self) -> CorrelationValue {
        CorrelationValue::from_excess(CHAOTICITY * self.t_factor * self.phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseEAuxiliaries {
    pub mu: f64,
    pub z_plus: Complex,
    pub z_minus: Complex,
}

impl CaseEAuxiliaries {
    pub fn new(spec: &SourceSpec, q: f64, d_omega: f64) -> Self {
        let mu = spec.r_dot * spec.tau * q;
        let w = d_omega * spec.tau;
        Self {
            mu,
            z_plus: Complex::new((w + mu) / 2.0, 0.0),
            z_minus: Complex::new((w - mu) / 2.0, 0.0),
        }
    }
}

fn check_q(q: f64) -> Result<()> {
    if q >= 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(HbtError::invalid("q", format!("must be finite and non-negative, got {q}")))
    }
}

fn check_d_omega(d_omega: f64) -> Result<()> {
    if d_omega.is_finite() {
        Ok(())
    } else {
        Err(HbtError::invalid("d_omega", "must be finite"))
    }
}

/// C(q, Δω) for any source. Coherent emission gives C = 1.
pub fn correlation(spec: &SourceSpec, q: f64, d_omega: f64) -> Result<CorrelationValue> {
    check_q(q)?;
    check_d_omega(d_omega)?;
    spec.validate()?;
    if spec.is_coherent() {
        return Ok(CorrelationValue::uncorrelated());
    }
    if spec.case == SourceCase::ExpandingShock {
        return Ok(CorrelationValue::from_excess(CHAOTICITY * case_e_normalized(spec, q, d_omega)));
    }
    Ok(factorized(spec, q, d_omega)?.correlation())
}

/// The `T(Δω)·Φ(q)` decomposition of a factorized source.
pub fn factorized(spec: &SourceSpec, q: f64, d_omega: f64) -> Result<FactorizedForm> {
    check_q(q)?;
    check_d_omega(d_omega)?;
    Ok(FactorizedForm {
        t_factor: time_factor(spec, d_omega)?,
        phi: form_factor(spec.case, q * spec.radius)?,
    })
}

/// Temporal factor T(Δω) of cases A–D, with T(0) = 1.
pub fn time_factor(spec: &SourceSpec, d_omega: f64) -> Result<f64> {
    let wt = d_omega * spec.tau;
    match spec.case {
        SourceCase::Gaussian | SourceCase::Shell | SourceCase::Sphere => Ok((-wt * wt).exp()),
        SourceCase::Exponential => {
            let s = sinc(3.0f64.sqrt() * wt);
            Ok(s * s)
        }
        SourceCase::ExpandingShock => Err(HbtError::NonFactorized { case: 'E' }),
    }
}

/// Spatial form factor Φ as a function of `x = qR`, with Φ(0) = 1.
pub fn form_factor(case: SourceCase, x: f64) -> Result<f64> {
    match case {
        SourceCase::Gaussian => Ok((-x * x).exp()),
        SourceCase::Shell => {
            let s = sinc(x);
            Ok(s * s)
        }
        SourceCase::Sphere => {
            let g = if x.abs() < SPHERE_SERIES_LIMIT {
                // 3(sin x − x cos x)/x³
                let x2 = x * x;
                1.0 - x2 / 10.0 * (1.0 - x2 / 28.0 * (1.0 - x2 / 54.0 * (1.0 - x2 / 88.0)))
            } else {
                3.0 * (sinc(x) - x.cos()) / (x * x)
            };
            Ok(g * g)
        }
        SourceCase::Exponential => Ok((1.0 + x * x).powi(-4)),
        SourceCase::ExpandingShock => Err(HbtError::NonFactorized { case: 'E' }),
    }
}

/// Coefficient `a` of the small-q expansion `Φ = 1 − a q² + …`.
pub fn small_q_coefficient(case: SourceCase, radius: f64) -> Result<f64> {
    let r2 = radius * radius;
    match case {
        SourceCase::Gaussian => Ok(r2),
        SourceCase::Shell => Ok(r2 / 3.0),
        SourceCase::Sphere => Ok(r2 / 5.0),
        SourceCase::Exponential => Ok(4.0 * r2),
        SourceCase::ExpandingShock => Err(HbtError::NonFactorized { case: 'E' }),
    }
}

/// Curvature κ = −Φ''(0) = 2·[`small_q_coefficient`].
pub fn analytic_kappa(case: SourceCase, radius: f64) -> Result<f64> {
    Ok(2.0 * small_q_coefficient(case, radius)?)
}

/// Source radius implied by a curvature κ under the given shape hypothesis.
pub fn kappa_to_radius(case: SourceCase, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(HbtError::invalid("kappa", format!("must be positive, got {kappa}")));
    }
    match case {
        SourceCase::Gaussian => Ok((kappa / 2.0).sqrt()),
        SourceCase::Shell => Ok((3.0 * kappa / 2.0).sqrt()),
        SourceCase::Sphere => Ok((5.0 * kappa / 2.0).sqrt()),
        SourceCase::Exponential => Ok((kappa / 8.0).sqrt()),
        SourceCase::ExpandingShock => Err(HbtError::NonFactorized { case: 'E' }),
    }
}

/// Φ as a function of the scale-free variable `X = √(κ/2)·q`, so that every
/// shape starts as `1 − X² + O(X⁴)`.
pub fn phi_of_x(case: SourceCase, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(HbtError::invalid("X", format!("must be non-negative, got {x}")));
    }
    let scale = (analytic_kappa(case, 1.0)? / 2.0).sqrt();
    form_factor(case, x / scale)
}

/// The auxiliary integral `I` of the expanding-shock correlator.
pub fn case_e_i(aux: &CaseEAuxiliaries) -> Complex {
    let mu = aux.mu;
    let (zp, zm) = (aux.z_plus, aux.z_minus);
    let bracket = (1.0 + mu * zp) * faddeeva(zp) - (1.0 - mu * zm) * faddeeva(zm);
    Complex::new(0.0, -SQRT_PI) * bracket - 2.0 * mu
}

/// |F(q,Δω)/F(0,0)|² for case E.
fn case_e_normalized(spec: &SourceSpec, q: f64, d_omega: f64) -> f64 {
    // The correlator is even in Δω; evaluating at |Δω| makes that exact.
    let w = d_omega.abs() * spec.tau;
    let mu = spec.r_dot * spec.tau * q;
    if mu < CASE_E_SERIES_MU {
        case_e_series(mu, w)
    } else {
        case_e_direct(mu, w)
    }
}

pub(crate) fn case_e_direct(mu: f64, w: f64) -> f64 {
    let aux = CaseEAuxiliaries {
        mu,
        z_plus: Complex::new((w + mu) / 2.0, 0.0),
        z_minus: Complex::new((w - mu) / 2.0, 0.0),
    };
    let i = case_e_i(&aux);
    2.25 * i.norm_sqr() / mu.powi(6)
}

/// Series in μ: with `M_n(w) = ∫₀^∞ sⁿ e^{iws − s²} ds`,
/// `I/(4μ³) = Σ_{k≥1} (−1)^{k+1} 2k/(2k+1)! · μ^{2k−2} · M_{2k+1}(w)`.
pub(crate) fn case_e_series(mu: f64, w: f64) -> f64 {
    let moments = half_gaussian_moments(w, 2 * CASE_E_SERIES_TERMS + 1);
    let mu2 = mu * mu;
    let mut sum = Complex::new(0.0, 0.0);
    let mut power = 1.0;
    // 2k/(2k+1)! for k = 1, built incrementally.
    let mut factorial = 6.0;
    for k in 1..=CASE_E_SERIES_TERMS {
        if k > 1 {
            factorial *= (2 * k) as f64 * (2 * k + 1) as f64;
            power *= -mu2;
        }
        sum += moments[2 * k + 1] * (power * 2.0 * k as f64 / factorial);
    }
    36.0 * sum.norm_sqr()
}

/// `M_n(w)` for n = 0..=n_max by upward recurrence
/// `M_{n+1} = (n/2) M_{n−1} + (iw/2) M_n`.
fn half_gaussian_moments(w: f64, n_max: usize) -> Vec<Complex> {
    let half_iw = Complex::new(0.0, w / 2.0);
    let mut m = Vec::with_capacity(n_max + 1);
    m.push(faddeeva(Complex::new(w / 2.0, 0.0)) * (SQRT_PI / 2.0));
    m.push(0.5 + half_iw * m[0]);
    for n in 1..n_max {
        let next = m[n - 1] * (n as f64 / 2.0) + half_iw * m[n];
        m.push(next);
    }
    m
}
