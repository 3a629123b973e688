//! CSV serialization of correlation surfaces.
//!
//! Layout: `#key=value` metadata lines, one column-header line, then data rows.
//! Floats are written with 17 significant digits so that a write/read cycle
//! is lossless.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::error::{HbtError, Result};
use crate::sources::{Emission, SourceCase, SourceSpec};
use crate::synth::{CorrelationSurface, GridSpec, NoiseSpec, SurfaceRecord};

pub const SURFACE_COLUMNS: [&str; 5] = ["q", "d_omega", "c_true", "c_obs", "sigma"];
pub const UNITS: &str = "q[um^-1] d_omega[ps^-1] R[um] tau[ps] r_dot[um/ps]";

/// Round-trip float formatting (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";")
}

/// Metadata echoing a source specification.
pub fn spec_metadata(spec: &SourceSpec) -> Vec<(String, String)> {
    vec![
        ("case".into(), spec.case.id().to_string()),
        ("R".into(), fmt_f64(spec.radius)),
        ("tau".into(), fmt_f64(spec.tau)),
        ("r_dot".into(), fmt_f64(spec.r_dot)),
        ("emission".into(), spec.emission.to_string()),
    ]
}

/// Writes `#key=value` lines, a header and rows of floats.
pub fn write_table<W: Write>(
    mut out: W,
    metadata: &[(String, String)],
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> std::io::Result<()> {
    for (k, v) in metadata {
        writeln!(out, "#{k}={v}")?;
    }
    writeln!(out, "{}", columns.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()
}

pub fn surface_metadata(surface: &CorrelationSurface) -> Vec<(String, String)> {
    let mut meta = vec![("format".to_string(), "hbt-surface".to_string()), ("units".into(), UNITS.into())];
    meta.extend(spec_metadata(&surface.spec));
    meta.push(("q_values".into(), fmt_list(&surface.grid.q_values)));
    meta.push(("d_omega_values".into(), fmt_list(&surface.grid.d_omega_values)));
    match &surface.noise {
        Some(n) => {
            meta.push(("pairs_per_bin".into(), n.pairs_per_bin.to_string()));
            meta.push(("seed".into(), n.seed.to_string()));
            meta.push(("noise".into(), "poisson".into()));
        }
        None => meta.push(("noise".into(), "none".into())),
    }
    match surface.smear_dw {
        Some(w) => {
            meta.push(("smear_dw".into(), fmt_f64(w)));
            meta.push(("smear_kernel".into(), "box".into()));
        }
        None => meta.push(("smear_dw".into(), "none".into())),
    }
    meta
}

pub fn write_surface<W: Write>(out: W, surface: &CorrelationSurface) -> std::io::Result<()> {
    let rows = surface.records.iter().map(|r| {
        [r.q, r.d_omega, r.c_true, r.c_obs, r.sigma].iter().map(|x| fmt_f64(*x)).collect()
    });
    write_table(out, &surface_metadata(surface), &SURFACE_COLUMNS, rows)
}

/// A parsed CSV table: metadata map, column names and raw fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Column `name` parsed as floats.
    pub fn f64_column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.column(name).ok_or_else(|| HbtError::Parse(format!("missing column `{name}`")))?;
        self.rows.iter().map(|r| parse_f64(&r[j], name)).collect()
    }

    /// Column `name` as raw strings.
    pub fn str_column(&self, name: &str) -> Result<Vec<&str>> {
        let j = self.column(name).ok_or_else(|| HbtError::Parse(format!("missing column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[j].as_str()).collect())
    }

    fn meta(&self, key: &str) -> Result<&str> {
        self.metadata
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| HbtError::Parse(format!("missing metadata `{key}`")))
    }

    fn meta_f64(&self, key: &str) -> Result<f64> {
        parse_f64(self.meta(key)?, key)
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| HbtError::Parse(format!("`{what}`: not a number: `{s}`")))
}

pub fn read_table<R: BufRead>(input: R) -> Result<Table> {
    let mut metadata = BTreeMap::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| HbtError::Parse(format!("read error: {e}")))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.split_once('=') {
                metadata.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        match &columns {
            None => columns = Some(line.split(',').map(|c| c.trim().to_string()).collect()),
            Some(cols) => {
                let row: Vec<String> = line.split(',').map(|v| v.trim().to_string()).collect();
                if row.len() != cols.len() {
                    return Err(HbtError::Parse(format!(
                        "line {}: {} fields, expected {}",
                        n + 1,
                        row.len(),
                        cols.len()
                    )));
                }
                rows.push(row);
            }
        }
    }
    let columns = columns.ok_or_else(|| HbtError::Parse("no column header".into()))?;
    Ok(Table { metadata, columns, rows })
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(';').filter(|v| !v.trim().is_empty()).map(|v| parse_f64(v, what)).collect()
}

pub fn read_surface<R: BufRead>(input: R) -> Result<CorrelationSurface> {
    let table = read_table(input)?;
    let cols: Vec<Vec<f64>> = SURFACE_COLUMNS.iter().map(|c| table.f64_column(c)).collect::<Result<_>>()?;
    let records: Vec<SurfaceRecord> = (0..table.rows.len())
        .map(|k| SurfaceRecord {
            q: cols[0][k],
            d_omega: cols[1][k],
            c_true: cols[2][k],
            c_obs: cols[3][k],
            sigma: cols[4][k],
        })
        .collect();

    let case: SourceCase = table.meta("case")?.parse().map_err(|e: HbtError| HbtError::Parse(e.to_string()))?;
    let emission: Emission =
        table.meta("emission")?.parse().map_err(|e: HbtError| HbtError::Parse(e.to_string()))?;
    let spec = SourceSpec {
        case,
        radius: table.meta_f64("R")?,
        tau: table.meta_f64("tau")?,
        r_dot: table.meta_f64("r_dot")?,
        emission,
    };
    spec.validate().map_err(|e| HbtError::Parse(e.to_string()))?;

    let grid = match (table.metadata.get("q_values"), table.metadata.get("d_omega_values")) {
        (Some(q), Some(w)) => GridSpec {
            q_values: parse_list(q, "q_values")?,
            d_omega_values: parse_list(w, "d_omega_values")?,
        },
        _ => grid_from_records(&records)?,
    };
    grid.validate().map_err(|e| HbtError::Parse(e.to_string()))?;
    if grid.len() != records.len() {
        return Err(HbtError::Parse(format!("{} rows for a {}-point grid", records.len(), grid.len())));
    }
    let nw = grid.d_omega_values.len();
    for (k, r) in records.iter().enumerate() {
        if r.q != grid.q_values[k / nw] || r.d_omega != grid.d_omega_values[k % nw] {
            return Err(HbtError::Parse(format!("row {} is out of q-major grid order", k + 1)));
        }
    }

    let noise = match table.metadata.get("pairs_per_bin") {
        Some(n) => Some(NoiseSpec {
            pairs_per_bin: n.parse().map_err(|_| HbtError::Parse(format!("bad pairs_per_bin `{n}`")))?,
            seed: table.meta("seed")?.parse().map_err(|_| HbtError::Parse("bad seed".into()))?,
        }),
        None => None,
    };
    let smear_dw = match table.metadata.get("smear_dw").map(String::as_str) {
        None | Some("none") => None,
        Some(v) => Some(parse_f64(v, "smear_dw")?),
    };
    Ok(CorrelationSurface { spec, grid, noise, smear_dw, records })
}

fn grid_from_records(records: &[SurfaceRecord]) -> Result<GridSpec> {
    let mut q: Vec<f64> = records.iter().map(|r| r.q).collect();
    let mut w: Vec<f64> = records.iter().map(|r| r.d_omega).collect();
    for v in [&mut q, &mut w] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    Ok(GridSpec { q_values: q, d_omega_values: w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, generate_smeared};

    fn grid() -> GridSpec {
        GridSpec::new(GridSpec::linspace(0.0, 2.0, 5), GridSpec::linspace(0.0, 1.5, 4)).unwrap()
    }

    fn round_trip(s: &CorrelationSurface) -> CorrelationSurface {
        let mut buf = Vec::new();
        write_surface(&mut buf, s).unwrap();
        read_surface(buf.as_slice()).unwrap()
    }

    #[test]
    fn noisy_surface_round_trips_exactly() {
        let spec = SourceSpec::factorized(SourceCase::Sphere, 1.3, 0.7).unwrap();
        let s = generate(&spec, &grid(), Some(&NoiseSpec::new(5000, 9).unwrap())).unwrap();
        assert_eq!(round_trip(&s), s);
    }

    #[test]
    fn smeared_and_shock_surfaces_round_trip() {
        let spec = SourceSpec::factorized(SourceCase::Gaussian, 1.0, 1.0).unwrap();
        let s = generate_smeared(&spec, &grid(), None, 0.3).unwrap();
        assert_eq!(round_trip(&s), s);
        let e = SourceSpec::expanding_shock(0.06, 1.0).unwrap();
        let s = generate(&e, &grid(), None).unwrap();
        assert_eq!(round_trip(&s), s);
    }

    #[test]
    fn header_layout() {
        let spec = SourceSpec::factorized(SourceCase::Gaussian, 1.0, 1.0).unwrap();
        let s = generate(&spec, &grid(), None).unwrap();
        let mut buf = Vec::new();
        write_surface(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("#format=hbt-surface\n"));
        assert!(text.contains("\nq,d_omega,c_true,c_obs,sigma\n"));
        assert!(text.contains("#case=A\n"));
        assert_eq!(fmt_f64(1.5), "1.5000000000000000e0");
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(read_surface("".as_bytes()).is_err());
        assert!(read_surface("#case=A\nq,d_omega\n1,2\n".as_bytes()).is_err());
        let bad = "#case=Z\n#R=1\n#tau=1\n#r_dot=0\n#emission=chaotic\nq,d_omega,c_true,c_obs,sigma\n0,0,1.5,1.5,0\n";
        assert!(matches!(read_surface(bad.as_bytes()), Err(HbtError::Parse(_))));
        let short = "#case=A\n#R=1\n#tau=1\n#r_dot=0\n#emission=chaotic\nq,d_omega,c_true,c_obs,sigma\n0,0,1.5\n";
        assert!(read_surface(short.as_bytes()).is_err());
    }

    #[test]
    fn grid_is_inferred_without_metadata_lists() {
        let text = "#case=A\n#R=1\n#tau=1\n#r_dot=0\n#emission=chaotic\nq,d_omega,c_true,c_obs,sigma\n\
                    0,0,1.5,1.5,0\n0,1,1.2,1.2,0\n1,0,1.2,1.2,0\n1,1,1.1,1.1,0\n";
        let s = read_surface(text.as_bytes()).unwrap();
        assert_eq!(s.grid.q_values, vec![0.0, 1.0]);
        assert_eq!(s.noise, None);
    }
}
