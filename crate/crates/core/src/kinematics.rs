//! Unit system and the relative pair variables `(q, Δω)`.
//!
//! Lengths are in μm and times in ps, so wavenumbers are in μm⁻¹ and angular
//! frequencies in ps⁻¹. With ħ = 1 a photon of wavenumber `k` has `ω = c·k`.
//! Blue light (k ≈ 4×10⁷ m⁻¹) sits at k ≈ 40 μm⁻¹.

use crate::error::{HbtError, Result};

/// Speed of light in μm/ps. The only hard-coded physical constant.
pub const SPEED_OF_LIGHT: f64 = 299.792_458;

/// Two photons with wavenumbers `k1`, `k2` (μm⁻¹) and opening angle `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonPair {
    pub k1: f64,
    pub k2: f64,
    pub theta: f64,
}

impl PhotonPair {
    pub fn new(k1: f64, k2: f64, theta: f64) -> Result<Self> {
        let pair = Self { k1, k2, theta };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k1 > 0.0 && self.k1.is_finite()) {
            return Err(HbtError::invalid("k1", format!("must be positive, got {}", self.k1)));
        }
        if !(self.k2 > 0.0 && self.k2.is_finite()) {
            return Err(HbtError::invalid("k2", format!("must be positive, got {}", self.k2)));
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.theta) {
            return Err(HbtError::invalid(
                "theta",
                format!("must lie in [0, π], got {}", self.theta),
            ));
        }
        Ok(())
    }
}

/// Momentum-difference magnitude `q` (μm⁻¹) and energy difference `Δω` (ps⁻¹).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeKinematics {
    pub q: f64,
    pub d_omega: f64,
}

pub fn relative_kinematics(pair: &PhotonPair) -> Result<RelativeKinematics> {
    pair.validate()?;
    let PhotonPair { k1, k2, theta } = *pair;
    // (k1 - k2)² + 4 k1 k2 sin²(θ/2) is the law of cosines without the
    // cancellation of k1² + k2² - 2 k1 k2 cos θ at small θ.
    let dk = k1 - k2;
    let s = (theta / 2.0).sin();
    let q2 = dk * dk + 4.0 * k1 * k2 * s * s;
    Ok(RelativeKinematics {
        q: q2.max(0.0).sqrt(),
        d_omega: SPEED_OF_LIGHT * dk,
    })
}

/// Fractional energy resolution `(1/τ)/(c·k)` needed to resolve the time factor.
pub fn resolution_ratio(tau: f64, k: f64) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(HbtError::invalid("tau", format!("must be positive, got {tau}")));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(HbtError::invalid("k", format!("must be positive, got {k}")));
    }
    Ok(1.0 / (tau * SPEED_OF_LIGHT * k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_photons() {
        let rk = relative_kinematics(&PhotonPair::new(40.0, 40.0, 0.0).unwrap()).unwrap();
        assert_eq!(rk, RelativeKinematics { q: 0.0, d_omega: 0.0 });
    }

    #[test]
    fn opening_angle_at_equal_energy() {
        let rk = relative_kinematics(&PhotonPair::new(40.0, 40.0, 0.05).unwrap()).unwrap();
        let expected = 80.0 * (0.025f64).sin();
        assert!((rk.q - expected).abs() < 1e-12);
        assert!((rk.q - 1.99979).abs() < 5e-6);
        assert_eq!(rk.d_omega, 0.0);
    }

    #[test]
    fn collinear_energy_difference() {
        let rk = relative_kinematics(&PhotonPair::new(40.0, 39.9967, 0.0).unwrap()).unwrap();
        assert!((rk.q - 0.0033).abs() < 1e-12);
        assert!((rk.d_omega - 0.989_315_111_4).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_pairs() {
        assert!(PhotonPair::new(0.0, 1.0, 0.0).is_err());
        assert!(PhotonPair::new(1.0, -1.0, 0.0).is_err());
        assert!(PhotonPair::new(1.0, 1.0, 3.2).is_err());
        assert!(PhotonPair::new(1.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn resolution_examples() {
        let r = resolution_ratio(1.0, 40.0).unwrap();
        assert!((r - 1.0 / (SPEED_OF_LIGHT * 40.0)).abs() < 1e-20);
        assert!((r - 8.34e-5).abs() < 1e-7);
        assert!(r < 1e-4);
        assert!((resolution_ratio(0.1, 40.0).unwrap() - 8.34e-4).abs() < 1e-6);
        assert!((resolution_ratio(1.0, 80.0).unwrap() - 4.17e-5).abs() < 1e-7);
        assert!(resolution_ratio(0.0, 40.0).is_err());
        assert!(resolution_ratio(1.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn exchange_and_triangle(k1 in 1e-3f64..100.0, k2 in 1e-3f64..100.0, theta in 0.0f64..std::f64::consts::PI) {
            let a = relative_kinematics(&PhotonPair::new(k1, k2, theta).unwrap()).unwrap();
            let b = relative_kinematics(&PhotonPair::new(k2, k1, theta).unwrap()).unwrap();
            prop_assert_eq!(a.q, b.q);
            prop_assert_eq!(a.d_omega, -b.d_omega);
            prop_assert!(a.q >= 0.0);
            prop_assert!(a.d_omega.abs() <= SPEED_OF_LIGHT * a.q * (1.0 + 1e-12));
        }
    }
}
