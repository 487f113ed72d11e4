//! Serialization of fields, trajectories, and reports.
//!
//! Spectral fields are dumped either as JSON or as a small binary format;
//! both carry `(N, grid, coefficients)` with the coefficients in the
//! lattice's canonical ordering (lexicographic in `(k1, k2)`). Trajectory
//! CSVs embed the seed and trajectory id in comment lines so any output can
//! be regenerated bit-for-bit.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::experiments::RateReport;
use crate::noise::NoiseStream;
use crate::nonlinear::Trajectory;
use crate::spectral::{FrequencyLattice, SpectralField};
use crate::Result;

const FIELD_MAGIC: &[u8; 6] = b"SDKGF1";

/// JSON schema of a spectral field dump.
#[derive(Debug, Serialize, Deserialize)]
pub struct FieldDump {
    pub format: String,
    pub n_max: u32,
    pub grid_size: usize,
    /// `[re, im]` pairs in lexicographic `(k1, k2)` order.
    pub coeffs: Vec<[f64; 2]>,
}

pub fn field_to_json(f: &SpectralField) -> FieldDump {
    FieldDump {
        format: "sdkg-field-v1".into(),
        n_max: f.lattice().n_max(),
        grid_size: f.lattice().grid_size(),
        coeffs: f.coeffs().iter().map(|c| [c.re, c.im]).collect(),
    }
}

pub fn field_from_json(dump: &FieldDump) -> Result<SpectralField> {
    let lattice = FrequencyLattice::new(dump.n_max, dump.grid_size)?;
    if dump.coeffs.len() != lattice.len() {
        return Err(CoreError::InvalidParams(format!(
            "{} coefficients for a lattice of {} modes",
            dump.coeffs.len(),
            lattice.len()
        )));
    }
    SpectralField::from_coeffs(
        &lattice,
        dump.coeffs
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect(),
    )
}

pub fn write_field_json<W: Write>(w: W, f: &SpectralField) -> Result<()> {
    serde_json::to_writer_pretty(w, &field_to_json(f))?;
    Ok(())
}

pub fn read_field_json<R: Read>(r: R) -> Result<SpectralField> {
    let dump: FieldDump = serde_json::from_reader(r)?;
    field_from_json(&dump)
}

pub fn write_field_binary<W: Write>(mut w: W, f: &SpectralField) -> Result<()> {
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&f.lattice().n_max().to_le_bytes())?;
    w.write_all(&(f.lattice().grid_size() as u64).to_le_bytes())?;
    w.write_all(&(f.coeffs().len() as u64).to_le_bytes())?;
    for c in f.coeffs() {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field_binary<R: Read>(mut r: R) -> Result<SpectralField> {
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)?;
    if &magic != FIELD_MAGIC {
        return Err(CoreError::InvalidParams("not a field binary dump".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let n_max = u32::from_le_bytes(b4);
    r.read_exact(&mut b8)?;
    let grid = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let count = u64::from_le_bytes(b8) as usize;
    let lattice = FrequencyLattice::new(n_max, grid)?;
    if count != lattice.len() {
        return Err(CoreError::InvalidParams(
            "coefficient count does not match the lattice".into(),
        ));
    }
    let mut coeffs = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let im = f64::from_le_bytes(b8);
        coeffs.push(Complex64::new(re, im));
    }
    SpectralField::from_coeffs(&lattice, coeffs)
}

/// Writes a pair trajectory as CSV with seed metadata in `#` comment lines.
/// Columns: `t, k1, k2, psi_re, psi_im, phi_re, phi_im`.
pub fn write_trajectory_csv<W: Write>(
    mut w: W,
    traj: &Trajectory,
    stream: &NoiseStream,
) -> Result<()> {
    writeln!(w, "# seed={}", stream.seed())?;
    writeln!(w, "# trajectory={}", stream.trajectory_id())?;
    if let Some(b) = traj.blowup {
        writeln!(w, "# blowup_step={} blowup_time={}", b.step, b.time)?;
    }
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["t", "k1", "k2", "psi_re", "psi_im", "phi_re", "phi_im"])
        .map_err(|e| CoreError::Numerical(format!("csv: {e}")))?;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        for (i, &(k1, k2)) in state.psi.lattice().modes().iter().enumerate() {
            let p = state.psi.coeffs()[i];
            let q = state.phi.coeffs()[i];
            csv.write_record(&[
                t.to_string(),
                k1.to_string(),
                k2.to_string(),
                p.re.to_string(),
                p.im.to_string(),
                q.re.to_string(),
                q.im.to_string(),
            ])
            .map_err(|e| CoreError::Numerical(format!("csv: {e}")))?;
        }
    }
    csv.flush()?;
    Ok(())
}

/// Writes a rate report as CSV: `param, error, se, paths, blowups`.
pub fn write_rate_csv<W: Write>(w: W, report: &RateReport) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["param", "error", "se", "paths", "blowups"])
        .map_err(|e| CoreError::Numerical(format!("csv: {e}")))?;
    for (i, &p) in report.param_values.iter().enumerate() {
        let (paths, blowups) = report.survival.get(i).copied().unwrap_or((0, 0));
        csv.write_record(&[
            p.to_string(),
            report.errors[i].to_string(),
            report.ses[i].to_string(),
            paths.to_string(),
            blowups.to_string(),
        ])
        .map_err(|e| CoreError::Numerical(format!("csv: {e}")))?;
    }
    csv.flush()?;
    Ok(())
}

/// Generic pretty-JSON report writer.
pub fn write_json_report<W: Write, T: Serialize>(w: W, report: &T) -> Result<()> {
    serde_json::to_writer_pretty(w, report)?;
    Ok(())
}

/// Convenience: lattice reconstruction helper shared by readers.
pub fn lattice_of(n_max: u32, grid_size: usize) -> Result<Arc<FrequencyLattice>> {
    FrequencyLattice::new(n_max, grid_size)
}
