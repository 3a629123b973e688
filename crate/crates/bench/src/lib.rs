//! Fixtures shared by the benchmarks in `benches/`.

use hbt_core::synth::generate;
use hbt_core::{CorrelationSurface, GridSpec, NoiseSpec, SourceCase, SourceSpec};

/// R = 1 μm, τ = 1 ps source of the given shape.
pub fn unit_source(case: SourceCase) -> SourceSpec {
    SourceSpec::factorized(case, 1.0, 1.0).expect("unit source is valid")
}

/// The end-to-end recovery grid (161 × 41) with 10⁶ pairs per bin.
pub fn recovery_surface(case: SourceCase, seed: u64) -> CorrelationSurface {
    let grid = GridSpec::new(GridSpec::linspace(0.0, 8.0, 161), GridSpec::linspace(0.0, 2.0, 41)).expect("valid grid");
    let noise = NoiseSpec::new(1_000_000, seed).expect("valid noise");
    generate(&unit_source(case), &grid, Some(&noise)).expect("surface generation")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_shape() {
        let s = recovery_surface(SourceCase::Gaussian, 0);
        assert_eq!((s.n_q(), s.n_d_omega()), (161, 41));
    }
}
