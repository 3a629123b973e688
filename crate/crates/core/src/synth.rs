//! Synthetic correlation surfaces: exact, resolution-smeared and noisy.
//!
//! Noise model: the coincidence count in a bin is `n ~ Poisson(N·C)` against
//! a fixed singles normalization `N`, so `c_obs = n/N` and `σ = √(C/N)`.
//! The RNG is ChaCha8 seeded with the user seed; every grid point draws from
//! its own stream (stream number = flat grid index), so results do not depend
//! on evaluation order.
//!
//! Smearing uses a box kernel of full width δω centred on each Δω.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::correlators::{correlation, form_factor, time_factor, CorrelationValue, CHAOTICITY};
use crate::error::{HbtError, Result};
use crate::quadrature::integrate;
use crate::sources::{SourceCase, SourceSpec};
use crate::Complex;

const SMEARING_REL_TOL: f64 = 1e-13;
const SIGNIFICANCE: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub q_values: Vec<f64>,
    pub d_omega_values: Vec<f64>,
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

impl GridSpec {
    pub fn new(q_values: Vec<f64>, d_omega_values: Vec<f64>) -> Result<Self> {
        let g = Self { q_values, d_omega_values };
        g.validate()?;
        Ok(g)
    }

    /// `n` evenly spaced values from `min` to `max` inclusive.
    pub fn linspace(min: f64, max: f64, n: usize) -> Vec<f64> {
        match n {
            0 => vec![],
            1 => vec![min],
            _ => (0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q_values.is_empty() || self.d_omega_values.is_empty() {
            return Err(HbtError::invalid("grid", "needs at least one q and one Δω value"));
        }
        if self.q_values.iter().chain(&self.d_omega_values).any(|v| !v.is_finite()) {
            return Err(HbtError::invalid("grid", "values must be finite"));
        }
        if self.q_values[0] < 0.0 {
            return Err(HbtError::invalid("q", "must be non-negative"));
        }
        if !strictly_increasing(&self.q_values) || !strictly_increasing(&self.d_omega_values) {
            return Err(HbtError::invalid("grid", "values must be strictly increasing"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.q_values.len() * self.d_omega_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseSpec {
    /// Expected coincidence count per bin at C = 1.
    pub pairs_per_bin: u64,
    pub seed: u64,
}

impl NoiseSpec {
    pub const MIN_PAIRS: u64 = 100;

    pub fn new(pairs_per_bin: u64, seed: u64) -> Result<Self> {
        let n = Self { pairs_per_bin, seed };
        n.validate()?;
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pairs_per_bin < Self::MIN_PAIRS {
            return Err(HbtError::invalid(
                "pairs_per_bin",
                format!("must be at least {}, got {}", Self::MIN_PAIRS, self.pairs_per_bin),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceRecord {
    pub q: f64,
    pub d_omega: f64,
    pub c_true: f64,
    pub c_obs: f64,
    /// Standard error of `c_obs`; zero for noiseless surfaces.
    pub sigma: f64,
}

impl SurfaceRecord {
    pub fn excess(&self) -> f64 {
        self.c_obs - 1.0
    }
}

/// Records are stored q-major: index `i·n_dω + j` for `(q_i, Δω_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSurface {
    pub spec: SourceSpec,
    pub grid: GridSpec,
    pub noise: Option<NoiseSpec>,
    /// Full width of the box energy-resolution window, if any.
    pub smear_dw: Option<f64>,
    pub records: Vec<SurfaceRecord>,
}

impl CorrelationSurface {
    pub fn n_q(&self) -> usize {
        self.grid.q_values.len()
    }

    pub fn n_d_omega(&self) -> usize {
        self.grid.d_omega_values.len()
    }

    pub fn at(&self, i: usize, j: usize) -> &SurfaceRecord {
        &self.records[i * self.n_d_omega() + j]
    }

    /// All records at the i-th q value.
    pub fn row(&self, i: usize) -> &[SurfaceRecord] {
        let n = self.n_d_omega();
        &self.records[i * n..(i + 1) * n]
    }

    pub fn is_noisy(&self) -> bool {
        self.noise.is_some()
    }
}

/// One renormalized form-factor point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormFactorSample {
    pub q: f64,
    pub phi_hat: f64,
    pub phi_err: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FormFactorSamples {
    pub records: Vec<FormFactorSample>,
}

impl FormFactorSamples {
    pub fn from_exact<F: Fn(f64) -> f64>(q: &[f64], phi: F) -> Self {
        Self {
            records: q.iter().map(|&q| FormFactorSample { q, phi_hat: phi(q), phi_err: 0.0 }).collect(),
        }
    }

    pub fn q(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.q).collect()
    }

    pub fn phi(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.phi_hat).collect()
    }

    pub fn err(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.phi_err).collect()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Surface with `c_true` from [`correlation`], optionally Poisson-noisy.
pub fn generate(spec: &SourceSpec, grid: &GridSpec, noise: Option<&NoiseSpec>) -> Result<CorrelationSurface> {
    build(spec, grid, noise, None, |q, w| correlation(spec, q, w))
}

/// As [`generate`], with `c_true` averaged over a box window of width `smear_dw`.
pub fn generate_smeared(
    spec: &SourceSpec,
    grid: &GridSpec,
    noise: Option<&NoiseSpec>,
    smear_dw: f64,
) -> Result<CorrelationSurface> {
    check_window(smear_dw)?;
    if spec.case == SourceCase::ExpandingShock {
        return Err(HbtError::NonFactorized { case: 'E' });
    }
    build(spec, grid, noise, Some(smear_dw), |q, w| smeared_correlation(spec, q, w, smear_dw))
}

fn build<F>(
    spec: &SourceSpec,
    grid: &GridSpec,
    noise: Option<&NoiseSpec>,
    smear_dw: Option<f64>,
    truth: F,
) -> Result<CorrelationSurface>
where
    F: Fn(f64, f64) -> Result<CorrelationValue>,
{
    spec.validate()?;
    grid.validate()?;
    if let Some(n) = noise {
        n.validate()?;
    }
    let mut records = Vec::with_capacity(grid.len());
    for &q in &grid.q_values {
        for &w in &grid.d_omega_values {
            let c_true = truth(q, w)?.c;
            let index = records.len() as u64;
            let (c_obs, sigma) = match noise {
                Some(n) => sample(c_true, n, index)?,
                None => (c_true, 0.0),
            };
            records.push(SurfaceRecord { q, d_omega: w, c_true, c_obs, sigma });
        }
    }
    Ok(CorrelationSurface {
        spec: *spec,
        grid: grid.clone(),
        noise: noise.copied(),
        smear_dw,
        records,
    })
}

fn sample(c_true: f64, noise: &NoiseSpec, index: u64) -> Result<(f64, f64)> {
    let n = noise.pairs_per_bin as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    rng.set_stream(index);
    let poisson = Poisson::new(n * c_true)
        .map_err(|e| HbtError::invalid("pairs_per_bin", format!("Poisson rate: {e}")))?;
    let count: f64 = poisson.sample(&mut rng);
    Ok((count / n, (c_true / n).sqrt()))
}

fn check_window(window: f64) -> Result<()> {
    if window > 0.0 && window.is_finite() {
        Ok(())
    } else {
        Err(HbtError::invalid("smear_dw", format!("must be positive, got {window}")))
    }
}

/// Box average `(1/δω)∫T(Δω′)dΔω′` over `[Δω − δω/2, Δω + δω/2]`.
pub fn averaged_time_factor(spec: &SourceSpec, d_omega: f64, window: f64) -> Result<f64> {
    check_window(window)?;
    if spec.case == SourceCase::ExpandingShock {
        return Err(HbtError::NonFactorized { case: 'E' });
    }
    let lo = d_omega - window / 2.0;
    let hi = d_omega + window / 2.0;
    let mut pts = vec![lo];
    // Split at Δω′ = 0 (the peak) and at zeros of sinc² for the box source.
    let mut marks = vec![0.0];
    if spec.case == SourceCase::Exponential {
        let spacing = std::f64::consts::PI / (3.0f64.sqrt() * spec.tau);
        let k_lo = (lo / spacing).ceil() as i64;
        let k_hi = (hi / spacing).floor() as i64;
        if k_hi - k_lo < 400 {
            marks.extend((k_lo..=k_hi).map(|k| k as f64 * spacing));
        }
    }
    marks.sort_by(f64::total_cmp);
    pts.extend(marks.into_iter().filter(|&m| m > lo && m < hi));
    pts.push(hi);
    let r = integrate(
        |w| Complex::new(time_factor(spec, w).unwrap_or(0.0), 0.0),
        &pts,
        SMEARING_REL_TOL,
        1e-300,
        2000,
    )?;
    Ok(r.value.re / window)
}

/// `C̄ = 1 + ½⟨T⟩Φ(q)` with the window centred on `d_omega`.
pub fn smeared_correlation(spec: &SourceSpec, q: f64, d_omega: f64, window: f64) -> Result<CorrelationValue> {
    spec.validate()?;
    if !(q >= 0.0 && q.is_finite()) {
        return Err(HbtError::invalid("q", format!("must be finite and non-negative, got {q}")));
    }
    if !d_omega.is_finite() {
        return Err(HbtError::invalid("d_omega", "must be finite"));
    }
    let t = averaged_time_factor(spec, d_omega, window)?;
    if spec.is_coherent() {
        return Ok(CorrelationValue::uncorrelated());
    }
    let phi = form_factor(spec.case, q * spec.radius)?;
    Ok(CorrelationValue::from_excess(CHAOTICITY * t * phi))
}

/// `C̄(q)` measured around Δω = 0 with a box resolution window.
pub fn apply_energy_smearing(spec: &SourceSpec, q: f64, window: f64) -> Result<f64> {
    Ok(smeared_correlation(spec, q, 0.0, window)?.c)
}

/// Φ̂(q) = excess(q)/excess(q₀) with q₀ the first grid row.
///
/// The ratio is taken between sums over the Δω columns whose origin excess is
/// significant (> 3σ; > 0 for noiseless data). `phi_err` holds the
/// point's own uncertainty; the common normalization uncertainty is reported
/// on the q₀ point only, since downstream fits carry a free overall scale.
pub fn renormalize_at_origin(surface: &CorrelationSurface) -> Result<FormFactorSamples> {
    let origin = surface.row(0);
    let cols: Vec<usize> = (0..origin.len())
        .filter(|&j| {
            let r = &origin[j];
            r.excess() > SIGNIFICANCE * r.sigma && r.excess() > 0.0
        })
        .collect();
    if cols.is_empty() {
        let r = origin
            .iter()
            .min_by(|a, b| a.d_omega.abs().total_cmp(&b.d_omega.abs()))
            .expect("grid is non-empty");
        return Err(HbtError::CannotRenormalize { excess: r.excess(), sigma: r.sigma });
    }
    let sums = |i: usize| {
        let row = surface.row(i);
        cols.iter().fold((0.0, 0.0), |(s, v), &j| (s + row[j].excess(), v + row[j].sigma * row[j].sigma))
    };
    let (s0, v0) = sums(0);
    let records = (0..surface.n_q())
        .map(|i| {
            let (s, v) = if i == 0 { (s0, v0) } else { sums(i) };
            FormFactorSample {
                q: surface.grid.q_values[i],
                phi_hat: if i == 0 { 1.0 } else { s / s0 },
                phi_err: v.sqrt() / s0,
            }
        })
        .collect();
    Ok(FormFactorSamples { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::Emission;

    fn spec(case: SourceCase) -> SourceSpec {
        SourceSpec::factorized(case, 1.0, 1.0).unwrap()
    }

    fn single() -> GridSpec {
        GridSpec::new(vec![0.0], vec![0.0]).unwrap()
    }

    #[test]
    fn generate_examples() {
        let a = spec(SourceCase::Gaussian);
        let s = generate(&a, &single(), None).unwrap();
        assert_eq!(s.records[0].c_true, 1.5);
        assert_eq!(s.records[0].c_obs, 1.5);
        let n = NoiseSpec::new(1_000_000, 1).unwrap();
        let s = generate(&a, &single(), Some(&n)).unwrap();
        assert!((s.records[0].sigma - 1.5e-6f64.sqrt()).abs() < 1e-15);
        assert!((s.records[0].sigma - 1.22e-3).abs() < 5e-6);
    }

    #[test]
    fn coherent_surface_is_flat() {
        let c = spec(SourceCase::Sphere).with_emission(Emission::Coherent);
        let g = GridSpec::new(GridSpec::linspace(0.0, 3.0, 5), GridSpec::linspace(0.0, 2.0, 4)).unwrap();
        let s = generate(&c, &g, None).unwrap();
        assert!(s.records.iter().all(|r| r.c_true == 1.0));
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(vec![0.0, 0.0], vec![0.0]).is_err());
        assert!(GridSpec::new(vec![-1.0, 0.0], vec![0.0]).is_err());
        assert!(GridSpec::new(vec![], vec![0.0]).is_err());
        assert!(NoiseSpec::new(99, 0).is_err());
        assert_eq!(GridSpec::linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn generation_is_deterministic() {
        let g = GridSpec::new(GridSpec::linspace(0.0, 2.0, 7), GridSpec::linspace(0.0, 2.0, 5)).unwrap();
        let n = NoiseSpec::new(10_000, 42).unwrap();
        let a = generate(&spec(SourceCase::Exponential), &g, Some(&n)).unwrap();
        let b = generate(&spec(SourceCase::Exponential), &g, Some(&n)).unwrap();
        assert_eq!(a, b);
        let other = generate(&spec(SourceCase::Exponential), &g, Some(&NoiseSpec::new(10_000, 43).unwrap())).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn noise_statistics() {
        let a = spec(SourceCase::Gaussian);
        let g = GridSpec::new(vec![0.5], vec![0.3]).unwrap();
        let n_pairs = 10_000u64;
        let obs: Vec<f64> = (0..1000)
            .map(|seed| {
                let n = NoiseSpec::new(n_pairs, seed).unwrap();
                generate(&a, &g, Some(&n)).unwrap().records[0].c_obs
            })
            .collect();
        let c_true = correlation(&a, 0.5, 0.3).unwrap().c;
        let sigma = (c_true / n_pairs as f64).sqrt();
        let mean = obs.iter().sum::<f64>() / obs.len() as f64;
        let var = obs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (obs.len() - 1) as f64;
        assert!((mean - c_true).abs() < 3.0 * sigma / 1000f64.sqrt());
        assert!((var / (c_true / n_pairs as f64) - 1.0).abs() < 0.1);
    }

    #[test]
    fn smearing_examples() {
        let a = spec(SourceCase::Gaussian);
        assert!((apply_energy_smearing(&a, 0.0, 1e-8).unwrap() - 1.5).abs() < 1e-12);
        let c = apply_energy_smearing(&a, 0.0, 2.0).unwrap();
        // (1/2)∫_{-1}^{1} e^{-x²} dx = 0.746824132812427
        assert!((c - (1.0 + 0.5 * 0.746_824_132_812_427)).abs() < 1e-13);
        assert!((c - 1.373412).abs() < 5e-7);
        let c1 = apply_energy_smearing(&a, 1.0, 2.0).unwrap();
        assert!((c1 - 1.0 - 0.137365).abs() < 1e-5);
        assert!(((c1 - 1.0) / (c - 1.0) - (-1.0f64).exp()).abs() < 1e-14);
        let e = SourceSpec::expanding_shock(0.06, 1.0).unwrap();
        assert!(apply_energy_smearing(&e, 0.0, 1.0).is_err());
        assert!(apply_energy_smearing(&a, 0.0, 0.0).is_err());
    }

    #[test]
    fn smearing_is_monotone() {
        for case in [SourceCase::Gaussian, SourceCase::Shell, SourceCase::Sphere] {
            let s = spec(case);
            let mut prev = 1.0;
            for k in 1..=60 {
                let t = averaged_time_factor(&s, 0.0, 0.25 * k as f64).unwrap();
                assert!(t <= prev + 1e-15);
                prev = t;
            }
        }
    }

    #[test]
    fn exponential_smearing_matches_sinc_integral() {
        let d = spec(SourceCase::Exponential);
        // Wide window: ∫ sinc²(√3 x) dx over ℝ = π/√3.
        let t = averaged_time_factor(&d, 0.0, 400.0).unwrap();
        let expected = (std::f64::consts::PI / 3.0f64.sqrt()) / 400.0;
        assert!((t / expected - 1.0).abs() < 2e-3);
    }

    #[test]
    fn renormalization_is_exact_for_noiseless_surfaces() {
        let g = GridSpec::new(GridSpec::linspace(0.0, 3.0, 13), GridSpec::linspace(0.0, 2.0, 5)).unwrap();
        for case in SourceCase::FACTORIZED {
            let s = spec(case);
            for surface in [generate(&s, &g, None).unwrap(), generate_smeared(&s, &g, None, 1.5).unwrap()] {
                let samples = renormalize_at_origin(&surface).unwrap();
                assert_eq!(samples.records[0].phi_hat, 1.0);
                for r in &samples.records {
                    let phi = form_factor(case, r.q).unwrap();
                    assert!((r.phi_hat - phi).abs() < 1e-12, "{case} q={}: {} vs {phi}", r.q, r.phi_hat);
                }
            }
        }
    }

    #[test]
    fn coherent_surface_cannot_be_renormalized() {
        let c = spec(SourceCase::Gaussian).with_emission(Emission::Coherent);
        let g = GridSpec::new(GridSpec::linspace(0.0, 1.0, 3), vec![0.0]).unwrap();
        let s = generate(&c, &g, None).unwrap();
        assert!(matches!(renormalize_at_origin(&s), Err(HbtError::CannotRenormalize { .. })));
    }
}
