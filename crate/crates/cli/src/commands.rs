use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hbt_core::correlators::{correlation, phi_of_x};
use hbt_core::inference::{analyze, FitConfig};
use hbt_core::kinematics::resolution_ratio;
use hbt_core::oracle::{numeric_correlation, QuadratureSettings};
use hbt_core::surface_io::{fmt_f64, read_surface, spec_metadata, surface_metadata, write_surface, write_table};
use hbt_core::synth::{generate, generate_smeared};
use hbt_core::{GridSpec, NoiseSpec, SourceCase, SourceSpec, SPEED_OF_LIGHT};

use crate::args::{Command, GridSize, Range, SourceArgs};

/// A numerical check that ran but did not meet its tolerance.
#[derive(Debug)]
pub struct ToleranceExceeded {
    pub max_rel_dev: f64,
    pub tol: f64,
}

impl std::error::Error for ToleranceExceeded {}

impl std::fmt::Display for ToleranceExceeded {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "max relative deviation {:.3e} exceeds tolerance {:.3e}", self.max_rel_dev, self.tol)
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Eval { source, q, d_omega } => eval(&source, q, d_omega),
        Command::Check { source, grid, q_grid, dw_grid, tol, out } => {
            check(&source, grid, q_grid, dw_grid, tol, out.as_deref())
        }
        Command::Synth { source, q_grid, dw_grid, pairs_per_bin, seed, smear_dw, out } => {
            synth(&source, q_grid, dw_grid, pairs_per_bin, seed, smear_dw, out.as_deref())
        }
        Command::Fit { input, out, csv, kappa_window, tau_assumed } => {
            fit(&input, out.as_deref(), csv, kappa_window, tau_assumed)
        }
        Command::Figure1 { radius, tau, rdot, k, q, dw_grid, out } => {
            figure1(radius, tau, rdot, k, &q, dw_grid, out.as_deref())
        }
        Command::Figure2 { x_grid, out } => figure2(x_grid, out.as_deref()),
    }
}

fn eval(source: &SourceArgs, q: f64, d_omega: f64) -> Result<()> {
    let spec = source.spec()?;
    let v = correlation(&spec, q, d_omega)?;
    let mut out = io::stdout().lock();
    writeln!(out, "C = {}", v.c)?;
    writeln!(out, "C - 1 = {}", v.excess)?;
    Ok(())
}

fn check(
    source: &SourceArgs,
    grid: GridSize,
    q_grid: Option<Range>,
    dw_grid: Option<Range>,
    tol: Option<f64>,
    out: Option<&Path>,
) -> Result<()> {
    let spec = source.spec()?;
    let q_values = match q_grid {
        Some(r) => r.values(),
        None if spec.case == SourceCase::ExpandingShock => GridSpec::linspace(0.2, 2.0, grid.n_q),
        None => GridSpec::linspace(0.0, 6.0 / spec.radius, grid.n_q),
    };
    let dw_values = match dw_grid {
        Some(r) => r.values(),
        None => GridSpec::linspace(0.0, 6.0 / spec.tau, grid.n_dw),
    };
    let tol = tol.unwrap_or(if spec.case == SourceCase::ExpandingShock { 1e-4 } else { 1e-6 });
    let settings = QuadratureSettings::default();

    let mut rows = Vec::new();
    let mut max_dev: f64 = 0.0;
    let mut max_excess_dev: f64 = 0.0;
    for &q in &q_values {
        for &w in &dw_values {
            let a = correlation(&spec, q, w)?;
            let n = numeric_correlation(&spec, q, w, &settings)?;
            let dev = (a.c - n.c).abs() / n.c.abs();
            let excess_dev = if n.excess > 0.0 { (a.excess - n.excess).abs() / n.excess } else { 0.0 };
            max_dev = max_dev.max(dev);
            max_excess_dev = max_excess_dev.max(excess_dev);
            rows.push(vec![fmt_f64(q), fmt_f64(w), fmt_f64(a.c), fmt_f64(n.c), fmt_f64(dev), fmt_f64(excess_dev)]);
        }
    }
    let columns = ["q", "d_omega", "c_analytic", "c_oracle", "rel_dev", "excess_rel_dev"];
    let mut meta = vec![("format".to_string(), "hbt-check".to_string())];
    meta.extend(spec_metadata(&spec));
    meta.push(("rel_tol".into(), fmt_f64(settings.rel_tol)));
    meta.push(("abs_tol".into(), fmt_f64(settings.abs_tol)));
    meta.push(("max_subdivisions".into(), settings.max_subdivisions.to_string()));
    let mut stdout = io::stdout().lock();
    match out {
        Some(p) => write_table(output(Some(p))?, &meta, &columns, rows)?,
        None => write_table(&mut stdout, &meta, &columns, rows)?,
    }
    let pass = max_dev <= tol;
    writeln!(stdout, "points = {}", q_values.len() * dw_values.len())?;
    writeln!(stdout, "max_rel_dev = {max_dev:.6e}")?;
    writeln!(stdout, "max_excess_rel_dev = {max_excess_dev:.6e}")?;
    writeln!(stdout, "tolerance = {tol:.3e}")?;
    writeln!(stdout, "status = {}", if pass { "pass" } else { "fail" })?;
    stdout.flush()?;
    if !pass {
        return Err(ToleranceExceeded { max_rel_dev: max_dev, tol }.into());
    }
    Ok(())
}

fn synth(
    source: &SourceArgs,
    q_grid: Range,
    dw_grid: Range,
    pairs_per_bin: Option<u64>,
    seed: u64,
    smear_dw: Option<f64>,
    out: Option<&Path>,
) -> Result<()> {
    let spec = source.spec()?;
    let grid = GridSpec::new(q_grid.values(), dw_grid.values())?;
    let noise = pairs_per_bin.map(|n| NoiseSpec::new(n, seed)).transpose()?;
    let surface = match smear_dw {
        Some(w) => generate_smeared(&spec, &grid, noise.as_ref(), w)?,
        None => generate(&spec, &grid, noise.as_ref())?,
    };
    write_surface(output(out)?, &surface)?;
    Ok(())
}

fn fit(input: &Path, out: Option<&Path>, csv: Option<PathBuf>, kappa_window: f64, tau_assumed: Option<f64>) -> Result<()> {
    let file = File::open(input).with_context(|| format!("cannot open {}", input.display()))?;
    let surface = read_surface(BufReader::new(file))?;
    if !(kappa_window > 0.0) {
        bail!(hbt_core::HbtError::InvalidParameter {
            name: "kappa-window",
            reason: "must be positive".into()
        });
    }
    let config = FitConfig { kappa_window, tau_assumed, ..FitConfig::default() };
    let report = analyze(&surface, &config);
    let mut w = output(out)?;
    w.write_all(report.to_text().as_bytes())?;
    w.flush()?;
    if let Some(p) = csv {
        let mut meta = vec![("format".to_string(), "hbt-fit".to_string())];
        meta.push(("source_file".into(), input.display().to_string()));
        meta.extend(surface_metadata(&surface).into_iter().filter(|(k, _)| k != "format"));
        report.write_csv(output(Some(&p))?, &meta)?;
    }
    Ok(())
}

fn figure1(radius: f64, tau: f64, rdot: f64, k: f64, q: &[f64], dw_grid: Range, out: Option<&Path>) -> Result<()> {
    let specs = [
        SourceSpec::factorized(SourceCase::Gaussian, radius, tau)?,
        SourceSpec::factorized(SourceCase::Exponential, radius, tau)?,
        SourceSpec::expanding_shock(rdot * SPEED_OF_LIGHT, tau)?,
    ];
    if q.is_empty() || q.iter().any(|q| !(*q >= 0.0)) {
        bail!(hbt_core::HbtError::InvalidParameter { name: "q", reason: "need non-negative values".into() });
    }
    let mut rows = Vec::new();
    for spec in &specs {
        for &qv in q {
            for w in dw_grid.values() {
                let v = correlation(spec, qv, w)?;
                if v.excess > 0.0 {
                    rows.push(vec![
                        spec.case.id().to_string(),
                        fmt_f64(qv),
                        fmt_f64(w),
                        fmt_f64(w * w),
                        fmt_f64(v.excess.log10()),
                    ]);
                }
            }
        }
    }
    let meta = vec![
        ("format".to_string(), "hbt-figure1".to_string()),
        ("units".into(), "q[um^-1] d_omega[ps^-1] d_omega_sq[ps^-2]".into()),
        ("cases".into(), "A;D;E".into()),
        ("R".into(), fmt_f64(radius)),
        ("tau".into(), fmt_f64(tau)),
        ("rdot_fraction_of_c".into(), fmt_f64(rdot)),
        ("r_dot".into(), fmt_f64(rdot * SPEED_OF_LIGHT)),
        ("k".into(), fmt_f64(k)),
        ("resolution_ratio".into(), fmt_f64(resolution_ratio(tau, k)?)),
        ("q_values".into(), q.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(";")),
        ("dw_grid".into(), format!("{}:{}:{}", dw_grid.min, dw_grid.max, dw_grid.n)),
    ];
    write_table(output(out)?, &meta, &["case", "q", "d_omega", "d_omega_sq", "log10_excess"], rows)?;
    Ok(())
}

fn figure2(x_grid: Range, out: Option<&Path>) -> Result<()> {
    if x_grid.min < 0.0 {
        bail!(hbt_core::HbtError::InvalidParameter { name: "x-grid", reason: "X must be non-negative".into() });
    }
    let mut rows = Vec::new();
    for case in SourceCase::FACTORIZED {
        for x in x_grid.values() {
            rows.push(vec![case.id().to_string(), fmt_f64(x), fmt_f64(phi_of_x(case, x)?)]);
        }
    }
    let meta = vec![
        ("format".to_string(), "hbt-figure2".to_string()),
        ("x_definition".into(), "X = sqrt(kappa/2) q".into()),
        ("x_grid".into(), format!("{}:{}:{}", x_grid.min, x_grid.max, x_grid.n)),
    ];
    write_table(output(out)?, &meta, &["case", "x", "phi"], rows)?;
    Ok(())
}
