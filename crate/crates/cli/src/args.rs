use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use hbt_core::{Emission, SourceCase, SourceSpec, SPEED_OF_LIGHT};

/// Two-photon (HBT) correlation functions of small chaotic light sources.
///
/// Units: lengths in μm, times in ps, q in μm⁻¹, Δω in ps⁻¹ (ħ = 1,
/// c = 299.792458 μm/ps). Shock speeds are given as a fraction of c.
#[derive(Debug, Parser)]
#[command(name = "hbt", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print C(q, Δω) for one source and one point.
    Eval {
        #[command(flatten)]
        source: SourceArgs,
        /// Momentum difference q [μm⁻¹].
        #[arg(long, allow_hyphen_values = true)]
        q: f64,
        /// Energy difference Δω [ps⁻¹].
        #[arg(long = "dw", allow_hyphen_values = true)]
        d_omega: f64,
    },
    /// Compare the closed form against the quadrature oracle over a grid.
    Check {
        #[command(flatten)]
        source: SourceArgs,
        /// Grid size NxM (q points x Δω points) over the default ranges.
        #[arg(long, default_value = "20x20")]
        grid: GridSize,
        /// Explicit q grid min:max:n [μm⁻¹].
        #[arg(long = "q-grid")]
        q_grid: Option<Range>,
        /// Explicit Δω grid min:max:n [ps⁻¹].
        #[arg(long = "dw-grid")]
        dw_grid: Option<Range>,
        /// Maximum tolerated relative deviation of C (default 1e-6; 1e-4 for case E).
        #[arg(long)]
        tol: Option<f64>,
        /// Write the per-point comparison as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic correlation surface as CSV.
    Synth {
        #[command(flatten)]
        source: SourceArgs,
        /// q grid min:max:n [μm⁻¹].
        #[arg(long = "q-grid", default_value = "0:4:81")]
        q_grid: Range,
        /// Δω grid min:max:n [ps⁻¹].
        #[arg(long = "dw-grid", default_value = "0:2:41")]
        dw_grid: Range,
        /// Expected coincidences per bin at C = 1; enables Poisson noise.
        #[arg(long = "pairs-per-bin")]
        pairs_per_bin: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Full width δω [ps⁻¹] of a box energy-resolution window.
        #[arg(long = "smear-dw")]
        smear_dw: Option<f64>,
        /// Output path (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a surface CSV and report τ̂, κ̂, R̂, shape ranking and chaoticity.
    Fit {
        /// Surface CSV written by `synth`.
        input: PathBuf,
        /// Report path (key = value text; stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Machine-readable CSV report path.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// κ fit window in X = √(κ/2)·q.
        #[arg(long = "kappa-window", default_value_t = 0.5)]
        kappa_window: f64,
        /// τ used by the chaoticity resolution gate (defaults to the recorded τ).
        #[arg(long = "tau-assumed")]
        tau_assumed: Option<f64>,
    },
    /// ln-slope plot data: log10(C − 1) against (Δω)² for cases A, D, E.
    Figure1 {
        #[arg(long = "R", default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        /// Shock speed as a fraction of c.
        #[arg(long, default_value_t = 2e-4)]
        rdot: f64,
        /// Photon wavenumber k [μm⁻¹], recorded with the resolution requirement.
        #[arg(long, default_value_t = 40.0)]
        k: f64,
        /// Comma-separated q values [μm⁻¹].
        #[arg(long, value_delimiter = ',', default_value = "0.5,1.0,1.5")]
        q: Vec<f64>,
        #[arg(long = "dw-grid", default_value = "0:2.5:51")]
        dw_grid: Range,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Φ(X) for the four factorized shapes, X = √(κ/2)·q.
    Figure2 {
        /// X grid min:max:n.
        #[arg(long = "x-grid", default_value = "0:3:301")]
        x_grid: Range,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Source case: A (Gaussian), B (shell), C (sphere), D (exponential), E (expanding shock).
    #[arg(long, default_value = "A")]
    pub case: SourceCase,
    /// Spatial extension R [μm] (cases A-D).
    #[arg(long = "R", default_value_t = 1.0, allow_hyphen_values = true)]
    pub radius: f64,
    /// Time span τ [ps].
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub tau: f64,
    /// Shock-front speed as a fraction of c (case E).
    #[arg(long, default_value_t = 2e-4, allow_hyphen_values = true)]
    pub rdot: f64,
    /// Coherent emission (C ≡ 1).
    #[arg(long)]
    pub coherent: bool,
}

impl SourceArgs {
    pub fn spec(&self) -> hbt_core::Result<SourceSpec> {
        let emission = if self.coherent { Emission::Coherent } else { Emission::Chaotic };
        let (radius, r_dot) = if self.case.is_factorized() {
            (self.radius, 0.0)
        } else {
            (0.0, self.rdot * SPEED_OF_LIGHT)
        };
        SourceSpec::new(self.case, radius, self.tau, r_dot, emission)
    }
}

/// `min:max:n`, n evenly spaced values including both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        hbt_core::GridSpec::linspace(self.min, self.max, self.n)
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected min:max:n, got `{s}`"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number"));
        let (min, max) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| format!("`{}` is not a count", parts[2]))?;
        if n == 0 || (n > 1 && !(max > min)) {
            return Err(format!("need n ≥ 1 and max > min, got `{s}`"));
        }
        Ok(Range { min, max, n })
    }
}

/// `NxM`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSize {
    pub n_q: usize,
    pub n_dw: usize,
}

impl FromStr for GridSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected NxM, got `{s}`"))?;
        let n = |p: &str| match p.trim().parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v),
            _ => Err(format!("`{p}` is not a positive count")),
        };
        Ok(GridSize { n_q: n(a)?, n_dw: n(b)? })
    }
}
