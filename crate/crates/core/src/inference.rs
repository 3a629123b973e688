//! Recovery of source parameters from a correlation surface.
//!
//! - τ from the slope of `ln(C − 1)` against `(Δω)²` at fixed q.
//! - A parallelism score for the slices (factorization diagnostic).
//! - κ from the curvature of the renormalized form factor at q = 0, and the
//!   radius each shape hypothesis implies.
//! - A ranking of the four shapes on the `X = √(κ/2)·q` axis.
//! - A chaotic / coherent / indeterminate verdict from the origin excess.
//!
//! Every fit is weighted linear least squares.

use std::fmt::Write as _;
use std::io::Write;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::correlators::{correlation, kappa_to_radius, phi_of_x};
use crate::error::{HbtError, Result};
use crate::lsq::{polyfit, weighted_least_squares};
use crate::sources::{Emission, SourceCase};
use crate::surface_io::{fmt_f64, write_table};
use crate::synth::{renormalize_at_origin, smeared_correlation, CorrelationSurface, FormFactorSamples};

/// Uncertainty assigned to noiseless form-factor samples when ranking shapes:
/// data "precise to three orders of magnitude".
pub const NOISELESS_PHI_PRECISION: f64 = 1e-3;

/// Relative systematic floor on slice slopes in the parallelism test.
pub const SLOPE_SYSTEMATIC: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// Slice fits use `τ̂²(Δω)² ≤ slope_window`.
    pub slope_window: f64,
    /// Degree of the local polynomial in `(Δω)²`; the slope is its linear term.
    pub slope_degree: usize,
    /// κ fits use `X = √(κ/2)·q ≤ kappa_window`.
    pub kappa_window: f64,
    /// A point is significant when its excess exceeds this many σ.
    pub significance: f64,
    pub chaotic_sigma: f64,
    pub coherent_sigma: f64,
    /// Time scale used by the chaoticity resolution gate and the origin
    /// coverage check; defaults to the surface's recorded τ.
    pub tau_assumed: Option<f64>,
    /// Rough source size for the origin coverage check; defaults to the
    /// surface's recorded length scale.
    pub radius_rough: Option<f64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            slope_window: 0.5,
            slope_degree: 3,
            kappa_window: 0.5,
            significance: 3.0,
            chaotic_sigma: 5.0,
            coherent_sigma: 3.0,
            tau_assumed: None,
            radius_rough: None,
        }
    }
}

/// One `(Δω, C − 1, σ)` measurement at fixed q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicePoint {
    pub d_omega: f64,
    pub excess: f64,
    pub sigma: f64,
}

/// Fit of `ln(C − 1)` against `(Δω)²` at one q.
///
/// `slope` is `d ln(C − 1)/d(Δω)²` at the origin (−τ² for a Gaussian time
/// factor); `intercept` is `ln(½Φ(q))` up to the resolution factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceFit {
    pub q: f64,
    pub slope: f64,
    pub slope_err: f64,
    pub intercept: f64,
    pub intercept_err: f64,
    pub residual_rms: f64,
    pub n_points: usize,
}

impl SliceFit {
    pub fn tau(&self) -> f64 {
        (-self.slope).sqrt()
    }

    pub fn tau_err(&self) -> f64 {
        self.slope_err / (2.0 * self.tau())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauEstimate {
    pub tau_hat: f64,
    pub tau_err: f64,
    pub slices: Vec<SliceFit>,
}

impl SlicePoint {
    fn is_significant(&self, nsigma: f64) -> bool {
        self.excess > 0.0 && self.excess > nsigma * self.sigma && self.excess.is_finite()
    }

    fn log_sigma(&self) -> f64 {
        let s = self.sigma.max(f64::EPSILON * (1.0 + self.excess));
        s / self.excess
    }
}

/// Groups the surface into fixed-q slices.
pub fn surface_slices(surface: &CorrelationSurface) -> Vec<(f64, Vec<SlicePoint>)> {
    (0..surface.n_q())
        .map(|i| {
            let pts = surface
                .row(i)
                .iter()
                .map(|r| SlicePoint { d_omega: r.d_omega, excess: r.excess(), sigma: r.sigma })
                .collect();
            (surface.grid.q_values[i], pts)
        })
        .collect()
}

pub fn fit_tau_slices(surface: &CorrelationSurface, config: &FitConfig) -> Result<TauEstimate> {
    fit_tau_points(&surface_slices(surface), config)
}

fn distinct_u(points: &[SlicePoint]) -> usize {
    let mut u: Vec<f64> = points.iter().map(|p| p.d_omega * p.d_omega).collect();
    u.sort_by(f64::total_cmp);
    u.dedup();
    u.len()
}

/// Straight line through the points within one e-fold of the origin value.
fn rough_slope(points: &[SlicePoint], nsigma: f64) -> Option<f64> {
    let mut sig: Vec<SlicePoint> = points.iter().copied().filter(|p| p.is_significant(nsigma)).collect();
    sig.sort_by(|a, b| a.d_omega.abs().total_cmp(&b.d_omega.abs()));
    let reference = sig.first()?.excess;
    let near: Vec<SlicePoint> = sig.into_iter().filter(|p| (p.excess / reference).ln() >= -1.0).collect();
    if distinct_u(&near) < 2 {
        return None;
    }
    let u: Vec<f64> = near.iter().map(|p| p.d_omega * p.d_omega).collect();
    let y: Vec<f64> = near.iter().map(|p| p.excess.ln()).collect();
    let s: Vec<f64> = near.iter().map(|p| p.log_sigma()).collect();
    polyfit(&u, &y, Some(&s), 1).ok().map(|f| f.coefficients[1])
}

fn slice_fit(q: f64, points: &[SlicePoint], tau: f64, config: &FitConfig) -> Option<SliceFit> {
    let u_max = config.slope_window / (tau * tau);
    let inside: Vec<SlicePoint> =
        points.iter().copied().filter(|p| p.d_omega * p.d_omega <= u_max * (1.0 + 1e-12)).collect();
    // A slice enters only if its whole window is significant; dropping single
    // low points would bias the slope.
    if inside.iter().any(|p| !p.is_significant(config.significance)) {
        return None;
    }
    let n_u = distinct_u(&inside);
    if n_u < 3 {
        return None;
    }
    let degree = config.slope_degree.min(n_u - 2).max(1);
    let u: Vec<f64> = inside.iter().map(|p| p.d_omega * p.d_omega).collect();
    let y: Vec<f64> = inside.iter().map(|p| p.excess.ln()).collect();
    let s: Vec<f64> = inside.iter().map(|p| p.log_sigma()).collect();
    let fit = polyfit(&u, &y, Some(&s), degree).ok()?;
    let rms = (u
        .iter()
        .zip(&y)
        .map(|(u, y)| {
            let model: f64 = fit.coefficients.iter().rev().fold(0.0, |acc, c| acc * u + c);
            (y - model).powi(2)
        })
        .sum::<f64>()
        / u.len() as f64)
        .sqrt();
    Some(SliceFit {
        q,
        slope: fit.coefficients[1],
        slope_err: fit.std_err(1),
        intercept: fit.coefficients[0],
        intercept_err: fit.std_err(0),
        residual_rms: rms,
        n_points: inside.len(),
    })
}

fn pool(slices: &[SliceFit]) -> (f64, f64) {
    let errs: Vec<f64> = slices.iter().map(SliceFit::tau_err).collect();
    if errs.iter().all(|e| *e > 0.0 && e.is_finite()) {
        let (sw, swx) = slices
            .iter()
            .zip(&errs)
            .fold((0.0, 0.0), |(sw, swx), (s, e)| (sw + 1.0 / (e * e), swx + s.tau() / (e * e)));
        (swx / sw, 1.0 / sw.sqrt())
    } else {
        let n = slices.len() as f64;
        (slices.iter().map(SliceFit::tau).sum::<f64>() / n, 0.0)
    }
}

/// τ̂ from fixed-q slices, pooled by inverse variance.
///
/// The window `τ̂²(Δω)² ≤ slope_window` is set from a rough one-e-fold fit and
/// refined twice. Within it `ln(C − 1)` is fitted by a low-degree polynomial in
/// `(Δω)²` whose linear coefficient is the origin derivative.
pub fn fit_tau_points(slices: &[(f64, Vec<SlicePoint>)], config: &FitConfig) -> Result<TauEstimate> {
    let rough: Vec<f64> = slices.iter().filter_map(|(_, p)| rough_slope(p, config.significance)).collect();
    let mut taus: Vec<f64> = rough.iter().filter(|s| **s < 0.0).map(|s| (-s).sqrt()).collect();
    if taus.is_empty() {
        return Err(match rough.first() {
            Some(&slope) => HbtError::NegativeSlopeVariance { slope, err: 0.0 },
            None => HbtError::InsufficientSignificantPoints(
                "no fixed-q slice has two significant points near Δω = 0".into(),
            ),
        });
    }
    taus.sort_by(f64::total_cmp);
    let mut tau = taus[taus.len() / 2];

    let mut estimate = None;
    for _ in 0..3 {
        let fits: Vec<SliceFit> = slices.iter().filter_map(|(q, p)| slice_fit(*q, p, tau, config)).collect();
        let (good, bad): (Vec<SliceFit>, Vec<SliceFit>) = fits.into_iter().partition(|f| f.slope < 0.0);
        if good.len() < 2 {
            if let Some(b) = bad.first() {
                return Err(HbtError::NegativeSlopeVariance { slope: b.slope, err: b.slope_err });
            }
            return Err(HbtError::InsufficientSignificantPoints(format!(
                "{} slice(s) with a fully significant window of at least 3 points; 2 required",
                good.len()
            )));
        }
        let (t, e) = pool(&good);
        tau = t;
        estimate = Some(TauEstimate { tau_hat: t, tau_err: e, slices: good });
    }
    Ok(estimate.expect("loop runs"))
}

/// Probability that all slice slopes share one value (χ² test, k − 1 d.o.f.).
pub fn factorization_test(slices: &[SliceFit]) -> Result<f64> {
    if slices.len() < 2 {
        return Err(HbtError::InsufficientSignificantPoints("parallelism needs at least 2 slices".into()));
    }
    let w: Vec<f64> = slices
        .iter()
        .map(|s| 1.0 / (s.slope_err.powi(2) + (SLOPE_SYSTEMATIC * s.slope).powi(2)))
        .collect();
    let sw: f64 = w.iter().sum();
    let mean = slices.iter().zip(&w).map(|(s, w)| w * s.slope).sum::<f64>() / sw;
    let chi2: f64 = slices.iter().zip(&w).map(|(s, w)| w * (s.slope - mean).powi(2)).sum();
    let dist = ChiSquared::new((slices.len() - 1) as f64).map_err(|_| HbtError::SingularFit)?;
    Ok(dist.sf(chi2).clamp(0.0, 1.0))
}

/// Φ(q)/Φ(q₀) from the slice intercepts, q₀ the first slice.
pub fn intercept_form_factor(slices: &[SliceFit]) -> Vec<(f64, f64)> {
    match slices.first() {
        Some(first) => slices.iter().map(|s| (s.q, (s.intercept - first.intercept).exp())).collect(),
        None => vec![],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaEstimate {
    pub kappa: f64,
    pub err: f64,
    pub n_points: usize,
}

fn effective_errors(err: &[f64]) -> Option<Vec<f64>> {
    let floor = err.iter().copied().filter(|e| *e > 0.0).fold(f64::INFINITY, f64::min);
    if !floor.is_finite() {
        return None;
    }
    Some(err.iter().map(|e| if *e > 0.0 { *e } else { floor }).collect())
}

fn kappa_fit(q: &[f64], phi: &[f64], err: &[f64], x_scale: f64, window: f64) -> Result<KappaEstimate> {
    let idx: Vec<usize> = (0..q.len()).filter(|&i| q[i] * x_scale <= window * (1.0 + 1e-12)).collect();
    const NEEDED: usize = 4;
    if idx.len() < NEEDED {
        return Err(HbtError::WindowTooNarrow { found: idx.len(), needed: NEEDED });
    }
    let qs: Vec<f64> = idx.iter().map(|&i| q[i]).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| phi[i]).collect();
    let es: Vec<f64> = idx.iter().map(|&i| err[i]).collect();
    let sig = effective_errors(&es);
    // Φ = a − b q² + c q⁴ − d q⁶ with a free intercept.
    let n_par = (idx.len() - 2).clamp(2, 4);
    let fit = weighted_least_squares(&qs, &ys, sig.as_deref(), n_par, |q, j| q.powi(2 * j as i32))?;
    let (a, c1) = (fit.coefficients[0], fit.coefficients[1]);
    let kappa = -2.0 * c1 / a;
    let ja = 2.0 * c1 / (a * a);
    let jc = -2.0 / a;
    let cov = &fit.covariance;
    let var = ja * ja * cov[0][0] + 2.0 * ja * jc * cov[0][1] + jc * jc * cov[1][1];
    Ok(KappaEstimate {
        kappa,
        err: if sig.is_some() { var.max(0.0).sqrt() } else { 0.0 },
        n_points: idx.len(),
    })
}

/// κ̂ = −Φ''(0) from form-factor samples, fitted within `X ≤ window`.
pub fn estimate_kappa(samples: &FormFactorSamples, window: f64) -> Result<KappaEstimate> {
    if !(window > 0.0) {
        return Err(HbtError::invalid("window", "must be positive"));
    }
    let q = samples.q();
    let phi = samples.phi();
    let err = samples.err();
    // Rough κ from the points still close to 1, one-parameter 1 − Φ = (κ/2)q².
    let rough = |min_phi: f64| {
        let (num, den) = q.iter().zip(&phi).filter(|(q, p)| **q > 0.0 && **p >= min_phi).fold(
            (0.0, 0.0),
            |(n, d), (q, p)| (n + q * q * (1.0 - p), d + q.powi(4)),
        );
        if den > 0.0 { 2.0 * num / den } else { 0.0 }
    };
    let mut kappa = rough(0.6);
    if !(kappa > 0.0) {
        kappa = rough(f64::NEG_INFINITY);
    }
    let scale = |k: f64| if k > 0.0 { (k / 2.0).sqrt() } else { 0.0 };
    let first = kappa_fit(&q, &phi, &err, scale(kappa), window)?;
    if first.kappa > 0.0 {
        kappa_fit(&q, &phi, &err, scale(first.kappa), window)
    } else {
        Ok(first)
    }
}

/// R̂ implied by κ̂ under each factorized shape, in case order A–D.
pub fn radii_from_kappa(kappa: f64) -> Result<Vec<(SourceCase, f64)>> {
    SourceCase::FACTORIZED.iter().map(|&c| Ok((c, kappa_to_radius(c, kappa)?))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeScore {
    pub case: SourceCase,
    pub chi2_per_dof: f64,
    /// Fitted overall scale of the data relative to the shape's Φ(X).
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeRanking {
    /// Ascending χ²/d.o.f.; exact ties broken by case id.
    pub scores: Vec<ShapeScore>,
    /// All four shapes lie within 1 unit of χ²/d.o.f. of each other, or the
    /// data do not reach X = 1.
    pub indistinguishable: bool,
    pub max_x: f64,
}

impl ShapeRanking {
    pub fn best(&self) -> SourceCase {
        self.scores[0].case
    }
}

/// Ranks the four shapes against Φ̂ sampled at known `X` values.
///
/// Each hypothesis gets a free overall scale; d.o.f. = n − 2 (scale and κ).
/// Samples with zero uncertainty get [`NOISELESS_PHI_PRECISION`].
pub fn rank_shapes_at_x(x: &[f64], phi: &[f64], err: &[f64]) -> Result<ShapeRanking> {
    if x.len() != phi.len() || x.len() != err.len() {
        return Err(HbtError::invalid("samples", "length mismatch"));
    }
    if x.len() < 3 {
        return Err(HbtError::InsufficientSignificantPoints("shape ranking needs at least 3 samples".into()));
    }
    let sig: Vec<f64> = err.iter().map(|e| if *e > 0.0 { *e } else { NOISELESS_PHI_PRECISION }).collect();
    let dof = (x.len() - 2) as f64;
    let mut scores = Vec::with_capacity(4);
    for case in SourceCase::FACTORIZED {
        let m: Vec<f64> = x.iter().map(|&x| phi_of_x(case, x)).collect::<Result<_>>()?;
        let (num, den) = (0..x.len()).fold((0.0, 0.0), |(n, d), i| {
            let w = 1.0 / (sig[i] * sig[i]);
            (n + w * phi[i] * m[i], d + w * m[i] * m[i])
        });
        let scale = num / den;
        let chi2: f64 = (0..x.len()).map(|i| ((phi[i] - scale * m[i]) / sig[i]).powi(2)).sum();
        scores.push(ShapeScore { case, chi2_per_dof: chi2 / dof, scale });
    }
    scores.sort_by(|a, b| a.chi2_per_dof.total_cmp(&b.chi2_per_dof).then(a.case.id().cmp(&b.case.id())));
    let spread = scores[3].chi2_per_dof - scores[0].chi2_per_dof;
    let max_x = x.iter().copied().fold(0.0, f64::max);
    Ok(ShapeRanking { scores, indistinguishable: spread <= 1.0, max_x })
}

/// Ranks shapes with X = √(κ̂/2)·q from a κ̂ fitted to the same samples.
///
/// When the samples stop short of X = 1 the ranking is still returned but
/// flagged indistinguishable.
pub fn shape_discrimination(samples: &FormFactorSamples, kappa_window: f64) -> Result<ShapeRanking> {
    let k = estimate_kappa(samples, kappa_window)?;
    if !(k.kappa > 0.0) {
        return Err(HbtError::InsufficientXRange { max_x: 0.0 });
    }
    let s = (k.kappa / 2.0).sqrt();
    let x: Vec<f64> = samples.records.iter().map(|r| r.q * s).collect();
    let mut ranking = rank_shapes_at_x(&x, &samples.phi(), &samples.err())?;
    if ranking.max_x < 1.0 {
        ranking.indistinguishable = true;
    }
    Ok(ranking)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Chaotic,
    Coherent,
    Indeterminate,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Chaotic => "chaotic",
            Verdict::Coherent => "coherent",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaoticityResult {
    pub verdict: Verdict,
    /// Origin excess in units of its σ.
    pub significance: f64,
    pub excess: f64,
    pub sigma: f64,
    /// Excess a chaotic source with the recorded parameters and smearing would give.
    pub expected_chaotic: f64,
    /// `(excess − expected_chaotic)/σ`.
    pub z_vs_chaotic: f64,
    /// δω·τ of the recorded resolution window.
    pub resolution_product: f64,
}

/// Chaotic / coherent verdict from the excess at the point nearest the origin.
///
/// A recorded resolution window with δω·τ ≥ 1 makes the verdict
/// indeterminate: the smeared chaotic excess is suppressed by ⟨T⟩ and no
/// longer tells the two scenarios apart reliably.
pub fn chaoticity_test(surface: &CorrelationSurface, config: &FitConfig) -> Result<ChaoticityResult> {
    let tau = config.tau_assumed.unwrap_or(surface.spec.tau);
    let radius = config.radius_rough.unwrap_or(surface.spec.length_scale());
    let q0 = surface.grid.q_values[0];
    let j0 = (0..surface.n_d_omega())
        .min_by(|&a, &b| {
            let w = &surface.grid.d_omega_values;
            w[a].abs().total_cmp(&w[b].abs())
        })
        .expect("grid is non-empty");
    let r = surface.at(0, j0);
    if q0 * radius > 0.5 || r.d_omega.abs() * tau > 0.5 {
        return Err(HbtError::NoOriginCoverage(format!(
            "nearest point q·R = {:.3}, |Δω|·τ = {:.3}; both must be ≤ 0.5",
            q0 * radius,
            r.d_omega.abs() * tau
        )));
    }
    let sigma = if r.sigma > 0.0 { r.sigma } else { f64::EPSILON };
    let excess = r.excess();
    let significance = excess / sigma;
    let chaotic = surface.spec.with_emission(Emission::Chaotic);
    let expected_chaotic = match surface.smear_dw {
        Some(w) => smeared_correlation(&chaotic, r.q, r.d_omega, w)?.excess,
        None => correlation(&chaotic, r.q, r.d_omega)?.excess,
    };
    let resolution_product = surface.smear_dw.unwrap_or(0.0) * tau;
    let verdict = if resolution_product >= 1.0 {
        Verdict::Indeterminate
    } else if significance > config.chaotic_sigma {
        Verdict::Chaotic
    } else if significance.abs() <= config.coherent_sigma {
        Verdict::Coherent
    } else {
        Verdict::Indeterminate
    };
    Ok(ChaoticityResult {
        verdict,
        significance,
        excess,
        sigma,
        expected_chaotic,
        z_vs_chaotic: (excess - expected_chaotic) / sigma,
        resolution_product,
    })
}

/// Everything [`analyze`] recovers from a surface. Stages that fail leave
/// their fields empty and add a line to `notes`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitReport {
    pub tau_hat: Option<(f64, f64)>,
    pub tau_per_q: Vec<SliceFit>,
    pub factorization_score: Option<f64>,
    pub kappa_hat: Option<(f64, f64)>,
    /// `(case, R̂, σ_R)` for each factorized shape.
    pub radius_by_shape: Vec<(SourceCase, f64, f64)>,
    pub shape_ranking: Option<ShapeRanking>,
    pub chaoticity: Option<ChaoticityResult>,
    pub form_factor: FormFactorSamples,
    /// Φ(q) from the slice intercepts, as a cross-check of `form_factor`.
    pub form_factor_from_intercepts: Vec<(f64, f64)>,
    pub notes: Vec<String>,
}

pub fn analyze(surface: &CorrelationSurface, config: &FitConfig) -> FitReport {
    let mut report = FitReport::default();
    match chaoticity_test(surface, config) {
        Ok(c) => report.chaoticity = Some(c),
        Err(e) => report.notes.push(format!("chaoticity: {e}")),
    }
    match fit_tau_slices(surface, config) {
        Ok(t) => {
            report.tau_hat = Some((t.tau_hat, t.tau_err));
            match factorization_test(&t.slices) {
                Ok(s) => report.factorization_score = Some(s),
                Err(e) => report.notes.push(format!("factorization: {e}")),
            }
            report.form_factor_from_intercepts = intercept_form_factor(&t.slices);
            report.tau_per_q = t.slices;
        }
        Err(e) => report.notes.push(format!("tau: {e}")),
    }
    let samples = match renormalize_at_origin(surface) {
        Ok(s) => s,
        Err(e) => {
            report.notes.push(format!("form factor: {e}"));
            return report;
        }
    };
    match estimate_kappa(&samples, config.kappa_window) {
        Ok(k) if k.kappa > 0.0 => {
            report.kappa_hat = Some((k.kappa, k.err));
            if let Ok(radii) = radii_from_kappa(k.kappa) {
                report.radius_by_shape =
                    radii.into_iter().map(|(c, r)| (c, r, r * k.err / (2.0 * k.kappa))).collect();
            }
        }
        Ok(k) => report.notes.push(format!("kappa: non-positive curvature {:.6e}", k.kappa)),
        Err(e) => report.notes.push(format!("kappa: {e}")),
    }
    if report.kappa_hat.is_some() {
        match shape_discrimination(&samples, config.kappa_window) {
            Ok(r) => report.shape_ranking = Some(r),
            Err(e) => report.notes.push(format!("shape: {e}")),
        }
    }
    report.form_factor = samples;
    report
}

impl FitReport {
    pub fn radius(&self, case: SourceCase) -> Option<(f64, f64)> {
        self.radius_by_shape.iter().find(|(c, _, _)| *c == case).map(|(_, r, e)| (*r, *e))
    }

    /// `key = value` text.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let opt = |v: Option<(f64, f64)>| v.map_or("none".to_string(), |(a, b)| format!("{} +- {}", fmt_f64(a), fmt_f64(b)));
        let _ = writeln!(s, "tau_hat = {}", opt(self.tau_hat));
        for f in &self.tau_per_q {
            let _ = writeln!(
                s,
                "slice q={} slope = {} +- {} intercept = {} rms = {} n = {}",
                fmt_f64(f.q),
                fmt_f64(f.slope),
                fmt_f64(f.slope_err),
                fmt_f64(f.intercept),
                fmt_f64(f.residual_rms),
                f.n_points
            );
        }
        let _ = writeln!(
            s,
            "factorization_score = {}",
            self.factorization_score.map_or("none".into(), fmt_f64)
        );
        let _ = writeln!(s, "kappa_hat = {}", opt(self.kappa_hat));
        for (c, r, e) in &self.radius_by_shape {
            let _ = writeln!(s, "radius_{} = {} +- {}", c.id(), fmt_f64(*r), fmt_f64(*e));
        }
        match &self.shape_ranking {
            Some(r) => {
                let order: Vec<String> =
                    r.scores.iter().map(|s| format!("{}:{}", s.case.id(), fmt_f64(s.chi2_per_dof))).collect();
                let _ = writeln!(s, "shape_ranking = {}", order.join(" "));
                let _ = writeln!(s, "shape_indistinguishable = {}", r.indistinguishable);
                let _ = writeln!(s, "shape_max_x = {}", fmt_f64(r.max_x));
            }
            None => {
                let _ = writeln!(s, "shape_ranking = none");
            }
        }
        match &self.chaoticity {
            Some(c) => {
                let _ = writeln!(s, "chaoticity = {}", c.verdict);
                let _ = writeln!(s, "chaoticity_significance = {}", fmt_f64(c.significance));
                let _ = writeln!(s, "origin_excess = {} +- {}", fmt_f64(c.excess), fmt_f64(c.sigma));
                let _ = writeln!(s, "expected_chaotic_excess = {}", fmt_f64(c.expected_chaotic));
                let _ = writeln!(s, "resolution_product = {}", fmt_f64(c.resolution_product));
            }
            None => {
                let _ = writeln!(s, "chaoticity = none");
            }
        }
        for n in &self.notes {
            let _ = writeln!(s, "note = {n}");
        }
        s
    }

    /// Machine-readable CSV: `quantity,case,q,value,error`.
    pub fn write_csv<W: Write>(&self, out: W, metadata: &[(String, String)]) -> std::io::Result<()> {
        let mut rows: Vec<Vec<String>> = Vec::new();
        let nan = f64::NAN;
        // Quantities without a q or an error leave the cell empty.
        let cell = |x: f64| if x.is_nan() { String::new() } else { fmt_f64(x) };
        let mut push = |quantity: &str, case: &str, q: f64, v: f64, e: f64| {
            rows.push(vec![quantity.to_string(), case.to_string(), cell(q), fmt_f64(v), cell(e)]);
        };
        if let Some((t, e)) = self.tau_hat {
            push("tau_hat", "", nan, t, e);
        }
        for f in &self.tau_per_q {
            push("slice_slope", "", f.q, f.slope, f.slope_err);
            push("slice_intercept", "", f.q, f.intercept, f.intercept_err);
        }
        if let Some(s) = self.factorization_score {
            push("factorization_score", "", nan, s, nan);
        }
        if let Some((k, e)) = self.kappa_hat {
            push("kappa_hat", "", nan, k, e);
        }
        for (c, r, e) in &self.radius_by_shape {
            push("radius", &c.id().to_string(), nan, *r, *e);
        }
        if let Some(r) = &self.shape_ranking {
            // Rows come out best first.
            for s in &r.scores {
                push("shape_chi2_per_dof", &s.case.id().to_string(), nan, s.chi2_per_dof, nan);
            }
            push("shape_indistinguishable", "", nan, if r.indistinguishable { 1.0 } else { 0.0 }, nan);
        }
        if let Some(c) = &self.chaoticity {
            let code = match c.verdict {
                Verdict::Chaotic => 1.0,
                Verdict::Coherent => 0.0,
                Verdict::Indeterminate => -1.0,
            };
            push("chaoticity_verdict", &c.verdict.to_string(), nan, code, nan);
            push("origin_excess", "", nan, c.excess, c.sigma);
        }
        for r in &self.form_factor.records {
            push("phi_hat", "", r.q, r.phi_hat, r.phi_err);
        }
        for (q, p) in &self.form_factor_from_intercepts {
            push("phi_intercept", "", *q, *p, nan);
        }
        write_table(out, metadata, &["quantity", "case", "q", "value", "error"], rows)
    }
}
