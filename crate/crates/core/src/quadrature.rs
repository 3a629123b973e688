//! Globally adaptive Gauss–Kronrod (10/21) quadrature for complex integrands.
//!
//! Real and imaginary parts share one subdivision; the error estimate of a
//! panel is the modulus of the complex Kronrod−Gauss difference.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{HbtError, Result};
use crate::Complex;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_643_474_262,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const ROUNDOFF_FACTOR: f64 = 50.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex,
    pub error: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> Complex>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut k = fc * WGK[10];
    let mut g = Complex::new(0.0, 0.0);
    let mut abs_sum = fc.norm() * WGK[10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let s = f1 + f2;
        k += s * WGK[j];
        abs_sum += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    Panel {
        a,
        b,
        value: k * half,
        error: ((k - g) * half).norm(),
        abs_value: abs_sum * half.abs(),
    }
}

/// Integrates `f` over `[points[0], points[last]]`, starting from the panels
/// delimited by `points` (which must be non-decreasing).
///
/// Stops once the summed error estimate is below
/// `max(abs_tol, rel_tol·|I|)` or below the round-off floor of the integrand.
pub fn integrate<F: Fn(f64) -> Complex>(
    f: F,
    points: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<QuadratureResult> {
    if points.len() < 2 {
        return Err(HbtError::invalid("points", "need at least two points"));
    }
    if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[1] < w[0]) {
        return Err(HbtError::invalid("points", "must be finite and non-decreasing"));
    }
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod(&f, w[0], w[1]));
        }
    }
    let mut subdivisions = 0;
    loop {
        let (value, error, abs_value) = heap.iter().fold(
            (Complex::new(0.0, 0.0), 0.0, 0.0),
            |(v, e, m), p| (v + p.value, e + p.error, m + p.abs_value),
        );
        let target = abs_tol.max(rel_tol * value.norm()).max(ROUNDOFF_FACTOR * abs_value);
        if error <= target {
            return Ok(QuadratureResult { value, error, subdivisions });
        }
        if subdivisions >= max_subdivisions {
            return Err(HbtError::NonConvergence { subdivisions, error });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in floating point.
            return Err(HbtError::NonConvergence { subdivisions, error });
        }
        heap.push(kronrod(&f, worst.a, mid));
        heap.push(kronrod(&f, mid, worst.b));
        subdivisions += 1;
    }
}

/// `[lo, lo + p, lo + 2p, …, hi]`, capped at `max_points` interior points.
pub fn periodic_breakpoints(lo: f64, hi: f64, period: f64, max_points: usize) -> Vec<f64> {
    let mut pts = vec![lo];
    if period.is_finite() && period > 0.0 {
        let n = ((hi - lo) / period).floor() as usize;
        let step = if n > max_points { (hi - lo) / (max_points + 1) as f64 } else { period };
        let mut x = lo + step;
        while x < hi - 1e-12 * step {
            pts.push(x);
            x += step;
        }
    }
    pts.push(hi);
    pts
}

/// Merge two sorted breakpoint lists, dropping duplicates.
pub fn merge_breakpoints(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}
