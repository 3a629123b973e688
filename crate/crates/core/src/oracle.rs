//! Brute-force correlations by direct quadrature of the source density.
//!
//! `C − 1 = λ·|F(q,Δω)/F(0,0)|²` with `F` the Fourier transform of ρ(r,t).
//! Factorized cases split into a time transform and a radial transform
//! `4π∫r²ρ(r) sinc(qr) dr`; the expanding shock uses the closed-form sphere
//! integral `∫₀^a r² sinc(qr) dr` inside a one-dimensional time quadrature.

use crate::correlators::{CorrelationValue, CHAOTICITY};
use crate::error::{HbtError, Result};
use crate::quadrature::{integrate, merge_breakpoints, periodic_breakpoints};
use crate::sources::{radial_support, spatial_profile, temporal_profile, time_support, SourceCase, SourceSpec};
use crate::special::sinc;
use crate::Complex;

const MAX_BREAKPOINTS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(HbtError::invalid("rel_tol", "must be positive"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(HbtError::invalid("abs_tol", "must be positive"));
        }
        if self.max_subdivisions < 10 {
            return Err(HbtError::invalid("max_subdivisions", "must be at least 10"));
        }
        Ok(())
    }
}

/// Value and error estimate of a Richardson-extrapolated curvature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureEstimate {
    pub kappa: f64,
    pub error: f64,
}

fn quad<F: Fn(f64) -> Complex>(f: F, pts: &[f64], s: &QuadratureSettings, scale: f64) -> Result<Complex> {
    // abs_tol is relative to the transform at the origin, so that it is
    // independent of the arbitrary density normalization.
    Ok(integrate(f, pts, s.rel_tol, s.abs_tol * scale, s.max_subdivisions)?.value)
}

fn half_period(k: f64) -> f64 {
    if k == 0.0 {
        f64::INFINITY
    } else {
        std::f64::consts::PI / k.abs()
    }
}

/// Time transform of a factorized density: ∫ρ_t(t)e^{iΔωt}dt.
fn time_transform(spec: &SourceSpec, d_omega: f64, s: &QuadratureSettings, scale: f64) -> Result<Complex> {
    let sup = time_support(spec);
    let pts = periodic_breakpoints(sup.lo, sup.hi, half_period(d_omega), MAX_BREAKPOINTS);
    let pts = merge_breakpoints(&pts, &[0.0]);
    quad(
        |t| {
            let rho = temporal_profile(spec, t).unwrap_or(0.0);
            Complex::from_polar(rho, d_omega * t)
        },
        &pts,
        s,
        scale,
    )
}

/// Radial transform of a factorized density: ∫r²ρ_s(r)sinc(qr)dr (4π dropped).
fn radial_transform(spec: &SourceSpec, q: f64, s: &QuadratureSettings, scale: f64) -> Result<f64> {
    if spec.case == SourceCase::Shell {
        // δ(r − R): the measure puts everything at r = R.
        return Ok(spec.radius * spec.radius * sinc(q * spec.radius));
    }
    let sup = radial_support(spec, 0.0).expect("t = 0 lies inside the support");
    let pts = periodic_breakpoints(sup.lo, sup.hi, half_period(q), MAX_BREAKPOINTS);
    let v = quad(
        |r| Complex::new(r * r * spatial_profile(spec, r).unwrap_or(0.0) * sinc(q * r), 0.0),
        &pts,
        s,
        scale,
    )?;
    Ok(v.re)
}

/// `3(sin x − x cos x)/x³`, so that ∫₀^a r² sinc(qr) dr = (a³/3)·g(qa).
fn sphere_amplitude(x: f64) -> f64 {
    if x.abs() < 0.05 {
        let x2 = x * x;
        1.0 - x2 / 10.0 + x2 * x2 / 280.0 - x2 * x2 * x2 / 15120.0
    } else {
        3.0 * (x.sin() - x * x.cos()) / (x * x * x)
    }
}

/// Case E transform with the constant 4πṘ³/3 dropped.
fn shock_transform(spec: &SourceSpec, q: f64, d_omega: f64, s: &QuadratureSettings, scale: f64) -> Result<Complex> {
    let sup = time_support(spec);
    let tau2 = spec.tau * spec.tau;
    let qv = q * spec.r_dot;
    let a = periodic_breakpoints(sup.lo, sup.hi, half_period(d_omega), MAX_BREAKPOINTS);
    let b = periodic_breakpoints(sup.lo, sup.hi, half_period(qv), MAX_BREAKPOINTS);
    let pts = merge_breakpoints(&a, &b);
    quad(
        |t| {
            let amp = t * t * t * sphere_amplitude(qv * t) * (-t * t / tau2).exp();
            Complex::from_polar(amp, d_omega * t)
        },
        &pts,
        s,
        scale,
    )
}

/// C(q, Δω) by quadrature of the source density.
pub fn numeric_correlation(
    spec: &SourceSpec,
    q: f64,
    d_omega: f64,
    settings: &QuadratureSettings,
) -> Result<CorrelationValue> {
    spec.validate()?;
    settings.validate()?;
    if !(q >= 0.0 && q.is_finite()) {
        return Err(HbtError::invalid("q", format!("must be finite and non-negative, got {q}")));
    }
    if !d_omega.is_finite() {
        return Err(HbtError::invalid("d_omega", "must be finite"));
    }
    if spec.is_coherent() {
        return Ok(CorrelationValue::uncorrelated());
    }
    let ratio = if spec.case == SourceCase::ExpandingShock {
        let f0 = shock_transform(spec, 0.0, 0.0, settings, 1.0)?.re;
        shock_transform(spec, q, d_omega, settings, f0)?.norm() / f0
    } else {
        let t0 = time_transform(spec, 0.0, settings, 1.0)?.re;
        let s0 = radial_transform(spec, 0.0, settings, 1.0)?;
        let t = time_transform(spec, d_omega, settings, t0)?.norm() / t0;
        let sp = radial_transform(spec, q, settings, s0)? / s0;
        t * sp
    };
    Ok(CorrelationValue::from_excess(CHAOTICITY * ratio * ratio))
}

/// κ = −Φ''(0) from `Φ(h)`, `Φ(h/2)` and `Φ(0)` of an even function, with
/// one Richardson step. The error estimate is the size of that correction.
pub fn numeric_curvature<F: Fn(f64) -> f64>(phi: F, h: f64) -> Result<CurvatureEstimate> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(HbtError::invalid("h", format!("must be positive, got {h}")));
    }
    let p0 = phi(0.0);
    let d2 = |step: f64| 2.0 * (phi(step) - p0) / (step * step);
    let coarse = d2(h);
    let fine = d2(h / 2.0);
    Ok(CurvatureEstimate {
        kappa: -(4.0 * fine - coarse) / 3.0,
        error: (fine - coarse).abs() / 3.0,
    })
}
