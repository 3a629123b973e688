//! Space-time emission densities ρ(r, t) of spherically symmetric sources.
//!
//! | case | ρ(r, t)                          |
//! |------|----------------------------------|
//! | A    | e^{-r²/2R²} e^{-t²/2τ²}          |
//! | B    | δ(r − R) e^{-t²/2τ²}             |
//! | C    | Θ(R − r) e^{-t²/2τ²}             |
//! | D    | e^{-r/R} Θ(3τ² − t²)             |
//! | E    | Θ(Ṙt − r) e^{-t²/τ²} Θ(t)        |
//!
//! Densities are unnormalized; every correlator works with `F(q,Δω)/F(0,0)`.
//! Case E keeps `e^{-t²/τ²}` rather than `e^{-t²/2τ²}`.

use std::fmt;
use std::str::FromStr;

use crate::error::{HbtError, Result};
use crate::kinematics::SPEED_OF_LIGHT;

/// Density cutoff (relative to peak) that defines an effectively compact support.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// Largest allowed shock-front speed, as a fraction of `c`.
pub const MAX_SHOCK_SPEED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SourceCase {
    /// A: Gaussian in space and time.
    Gaussian,
    /// B: thin spherical shell of radius R.
    Shell,
    /// C: homogeneous sphere of radius R.
    Sphere,
    /// D: exponential radial profile, box in time.
    Exponential,
    /// E: sphere behind a shock front expanding at Ṙ.
    ExpandingShock,
}

impl SourceCase {
    pub const ALL: [SourceCase; 5] = [
        SourceCase::Gaussian,
        SourceCase::Shell,
        SourceCase::Sphere,
        SourceCase::Exponential,
        SourceCase::ExpandingShock,
    ];

    /// The four cases whose density factorizes into space × time.
    pub const FACTORIZED: [SourceCase; 4] = [
        SourceCase::Gaussian,
        SourceCase::Shell,
        SourceCase::Sphere,
        SourceCase::Exponential,
    ];

    pub fn id(self) -> char {
        match self {
            SourceCase::Gaussian => 'A',
            SourceCase::Shell => 'B',
            SourceCase::Sphere => 'C',
            SourceCase::Exponential => 'D',
            SourceCase::ExpandingShock => 'E',
        }
    }

    pub fn is_factorized(self) -> bool {
        self != SourceCase::ExpandingShock
    }

    pub fn name(self) -> &'static str {
        match self {
            SourceCase::Gaussian => "gaussian",
            SourceCase::Shell => "shell",
            SourceCase::Sphere => "sphere",
            SourceCase::Exponential => "exponential",
            SourceCase::ExpandingShock => "expanding_shock",
        }
    }
}

impl fmt::Display for SourceCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

impl FromStr for SourceCase {
    type Err = HbtError;

    fn from_str(s: &str) -> Result<Self> {
        let found = SourceCase::ALL
            .into_iter()
            .find(|c| s.eq_ignore_ascii_case(&c.id().to_string()) || s.eq_ignore_ascii_case(c.name()));
        found.ok_or_else(|| HbtError::invalid("case", format!("unknown source case `{s}` (expected A-E)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Emission {
    Chaotic,
    Coherent,
}

impl fmt::Display for Emission {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Emission::Chaotic => "chaotic",
            Emission::Coherent => "coherent",
        })
    }
}

impl FromStr for Emission {
    type Err = HbtError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chaotic" => Ok(Emission::Chaotic),
            "coherent" => Ok(Emission::Coherent),
            other => Err(HbtError::invalid("emission", format!("unknown emission `{other}`"))),
        }
    }
}

/// A source case with its parameters.
///
/// `radius` (μm) is ignored by case E; `r_dot` (μm/ps) is only used by case E.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    pub case: SourceCase,
    pub radius: f64,
    pub tau: f64,
    pub r_dot: f64,
    pub emission: Emission,
}

impl SourceSpec {
    pub fn new(case: SourceCase, radius: f64, tau: f64, r_dot: f64, emission: Emission) -> Result<Self> {
        let spec = Self {
            case,
            radius,
            tau,
            r_dot,
            emission,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// A chaotic factorized source (cases A–D).
    pub fn factorized(case: SourceCase, radius: f64, tau: f64) -> Result<Self> {
        if !case.is_factorized() {
            return Err(HbtError::NonFactorized { case: case.id() });
        }
        Self::new(case, radius, tau, 0.0, Emission::Chaotic)
    }

    /// A chaotic expanding-shock source (case E).
    pub fn expanding_shock(r_dot: f64, tau: f64) -> Result<Self> {
        Self::new(SourceCase::ExpandingShock, 0.0, tau, r_dot, Emission::Chaotic)
    }

    pub fn with_emission(mut self, emission: Emission) -> Self {
        self.emission = emission;
        self
    }

    pub fn is_coherent(&self) -> bool {
        self.emission == Emission::Coherent
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(HbtError::invalid("tau", format!("must be positive, got {}", self.tau)));
        }
        if self.case.is_factorized() {
            if !(self.radius > 0.0 && self.radius.is_finite()) {
                return Err(HbtError::invalid("R", format!("must be positive, got {}", self.radius)));
            }
        } else {
            let limit = MAX_SHOCK_SPEED_FRACTION * SPEED_OF_LIGHT;
            if !(self.r_dot > 0.0 && self.r_dot < limit) {
                return Err(HbtError::invalid(
                    "r_dot",
                    format!("must lie in (0, {limit}) μm/ps, got {}", self.r_dot),
                ));
            }
        }
        Ok(())
    }

    /// A length scale of the emission region: R for A–D, Ṙτ for E.
    pub fn length_scale(&self) -> f64 {
        if self.case.is_factorized() {
            self.radius
        } else {
            self.r_dot * self.tau
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimePoint {
    pub r: f64,
    pub t: f64,
}

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

fn gaussian_cutoff() -> f64 {
    // e^{-x²/2} = cutoff
    (-2.0 * SUPPORT_CUTOFF.ln()).sqrt()
}

pub fn density(spec: &SourceSpec, p: SpaceTimePoint) -> Result<f64> {
    if p.r < 0.0 {
        return Err(HbtError::invalid("r", format!("must be non-negative, got {}", p.r)));
    }
    match spec.case {
        SourceCase::Shell => Err(HbtError::DistributionalDensity { case: 'B' }),
        SourceCase::ExpandingShock => {
            let inside = p.t > 0.0 && p.r <= spec.r_dot * p.t;
            Ok(if inside { (-(p.t * p.t) / (spec.tau * spec.tau)).exp() } else { 0.0 })
        }
        _ => Ok(spatial_profile(spec, p.r)? * temporal_profile(spec, p.t)?),
    }
}

/// Spatial factor of a factorized density (cases A, C, D).
pub fn spatial_profile(spec: &SourceSpec, r: f64) -> Result<f64> {
    let rr = spec.radius;
    match spec.case {
        SourceCase::Gaussian => Ok((-(r * r) / (2.0 * rr * rr)).exp()),
        SourceCase::Sphere => Ok(if r <= rr { 1.0 } else { 0.0 }),
        SourceCase::Exponential => Ok((-r / rr).exp()),
        SourceCase::Shell => Err(HbtError::DistributionalDensity { case: 'B' }),
        SourceCase::ExpandingShock => Err(HbtError::NonFactorized { case: 'E' }),
    }
}

/// Temporal factor of a factorized density (cases A–D).
pub fn temporal_profile(spec: &SourceSpec, t: f64) -> Result<f64> {
    let tau = spec.tau;
    match spec.case {
        SourceCase::Gaussian | SourceCase::Shell | SourceCase::Sphere => {
            Ok((-(t * t) / (2.0 * tau * tau)).exp())
        }
        SourceCase::Exponential => Ok(if t * t <= 3.0 * tau * tau { 1.0 } else { 0.0 }),
        SourceCase::ExpandingShock => Err(HbtError::NonFactorized { case: 'E' }),
    }
}

/// Time interval outside which the density vanishes (or is below the cutoff).
pub fn time_support(spec: &SourceSpec) -> Interval {
    let tau = spec.tau;
    match spec.case {
        SourceCase::Gaussian | SourceCase::Shell | SourceCase::Sphere => {
            let t = gaussian_cutoff() * tau;
            Interval { lo: -t, hi: t }
        }
        SourceCase::Exponential => {
            let t = 3.0f64.sqrt() * tau;
            Interval { lo: -t, hi: t }
        }
        SourceCase::ExpandingShock => Interval {
            lo: 0.0,
            hi: (-SUPPORT_CUTOFF.ln()).sqrt() * tau,
        },
    }
}

/// Radial support of the density at time `t`; `None` when it is empty.
pub fn radial_support(spec: &SourceSpec, t: f64) -> Option<Interval> {
    let ts = time_support(spec);
    if spec.case == SourceCase::ExpandingShock {
        return (t > 0.0).then_some(Interval {
            lo: 0.0,
            hi: spec.r_dot * t,
        });
    }
    if t < ts.lo || t > ts.hi {
        return None;
    }
    let rr = spec.radius;
    Some(match spec.case {
        SourceCase::Gaussian => Interval {
            lo: 0.0,
            hi: gaussian_cutoff() * rr,
        },
        SourceCase::Shell => Interval { lo: rr, hi: rr },
        SourceCase::Sphere => Interval { lo: 0.0, hi: rr },
        SourceCase::Exponential => Interval {
            lo: 0.0,
            hi: -SUPPORT_CUTOFF.ln() * rr,
        },
        SourceCase::ExpandingShock => unreachable!(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(case: SourceCase) -> SourceSpec {
        match case {
            SourceCase::ExpandingShock => SourceSpec::expanding_shock(0.06, 1.0).unwrap(),
            c => SourceSpec::factorized(c, 1.0, 1.0).unwrap(),
        }
    }

    #[test]
    fn density_examples() {
        let a = spec(SourceCase::Gaussian);
        assert_eq!(density(&a, SpaceTimePoint { r: 0.0, t: 0.0 }).unwrap(), 1.0);
        let c = spec(SourceCase::Sphere);
        assert_eq!(density(&c, SpaceTimePoint { r: 1.5, t: 0.0 }).unwrap(), 0.0);
        let e = spec(SourceCase::ExpandingShock);
        let v = density(&e, SpaceTimePoint { r: 0.5 * 0.06, t: 1.0 }).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-16);
        let d = spec(SourceCase::Exponential);
        for r in [0.0, 0.3, 5.0] {
            assert_eq!(density(&d, SpaceTimePoint { r, t: 2.0 }).unwrap(), 0.0);
        }
    }

    #[test]
    fn shell_density_is_distributional() {
        let b = spec(SourceCase::Shell);
        assert_eq!(
            density(&b, SpaceTimePoint { r: 1.0, t: 0.0 }),
            Err(HbtError::DistributionalDensity { case: 'B' })
        );
    }

    #[test]
    fn support_examples() {
        let c = spec(SourceCase::Sphere);
        for t in [-5.9, 0.0, 3.0, 5.99] {
            assert_eq!(radial_support(&c, t), Some(Interval { lo: 0.0, hi: 1.0 }));
        }
        let e = spec(SourceCase::ExpandingShock);
        assert_eq!(radial_support(&e, -1.0), None);
        let a = spec(SourceCase::Gaussian);
        let rmax = radial_support(&a, 0.0).unwrap().hi;
        assert!((rmax - 7.43).abs() < 5e-3);
        assert!((-(rmax * rmax) / 2.0).exp() <= SUPPORT_CUTOFF * (1.0 + 1e-9));
    }

    #[test]
    fn time_supports() {
        for case in [SourceCase::Gaussian, SourceCase::Shell, SourceCase::Sphere] {
            let ts = time_support(&spec(case));
            assert!((ts.hi - 7.43).abs() < 5e-3);
            assert!(temporal_profile(&spec(case), ts.hi * 1.0001).unwrap() < SUPPORT_CUTOFF);
        }
        let d = spec(SourceCase::Exponential);
        assert_eq!(temporal_profile(&d, 3.0f64.sqrt() * 1.0001).unwrap(), 0.0);
        let e = spec(SourceCase::ExpandingShock);
        assert_eq!(density(&e, SpaceTimePoint { r: 0.0, t: -0.1 }).unwrap(), 0.0);
    }

    #[test]
    fn validation() {
        assert!(SourceSpec::factorized(SourceCase::Gaussian, 0.0, 1.0).is_err());
        assert!(SourceSpec::factorized(SourceCase::Gaussian, 1.0, -1.0).is_err());
        assert!(SourceSpec::expanding_shock(0.0, 1.0).is_err());
        assert!(SourceSpec::expanding_shock(0.011 * SPEED_OF_LIGHT, 1.0).is_err());
        assert!(SourceSpec::expanding_shock(2e-4 * SPEED_OF_LIGHT, 1.0).is_ok());
        assert_eq!("c".parse::<SourceCase>().unwrap(), SourceCase::Sphere);
        assert!("F".parse::<SourceCase>().is_err());
    }

    proptest! {
        #[test]
        fn densities_are_non_negative(r in 0.0f64..30.0, t in -10.0f64..10.0, ci in 0usize..5) {
            let case = SourceCase::ALL[ci];
            if case != SourceCase::Shell {
                let rho = density(&spec(case), SpaceTimePoint { r, t }).unwrap();
                prop_assert!(rho >= 0.0);
            }
        }

        #[test]
        fn shock_support_grows_linearly(t in 1e-3f64..10.0) {
            let e = spec(SourceCase::ExpandingShock);
            let one = radial_support(&e, t).unwrap();
            let two = radial_support(&e, 2.0 * t).unwrap();
            prop_assert!((two.hi - 2.0 * one.hi).abs() <= 1e-15 * two.hi);
        }
    }
}
