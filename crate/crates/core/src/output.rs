//! Deterministic file emission: CSV with fixed 17-significant-digit floats,
//! JSON sidecars, and the per-run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bpm::Trajectory;
use crate::config::MediumBeamConfig;
use crate::dispersion::DispersionTable;
use crate::eigensolver::TransverseMode;
use crate::error::Result;

/// Fixed float rendering: 17 significant digits, deterministic across runs.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Per-channel mode table: header (r_m, psi_<m><n>, ...), one row per radius.
pub fn write_mode_channel_csv(path: &Path, modes: &[TransverseMode]) -> Result<()> {
    assert!(!modes.is_empty());
    let grid = &modes[0].grid;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    let mut header = String::from("r_m");
    for mode in modes {
        header.push_str(&format!(",psi_{}{}", mode.m.unsigned_abs(), mode.n));
    }
    writeln!(w, "{header}")?;
    for j in 0..grid.n_points() {
        let mut row = fmt_float(grid.r_at(j + 1));
        for mode in modes {
            row.push(',');
            row.push_str(&fmt_float(mode.psi[j]));
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ModeSummary {
    n: u32,
    beta_m2: f64,
    nodes: usize,
}

#[derive(Serialize)]
struct ChannelSidecar<'a> {
    m: i32,
    delta_s: f64,
    grid: GridMeta,
    psi_unit: &'a str,
    config_hash: String,
    modes: Vec<ModeSummary>,
}

#[derive(Serialize)]
struct GridMeta {
    n_points: usize,
    dr_m: f64,
    r_max_m: f64,
}

/// JSON sidecar with the eigenvalues and grid metadata of one channel.
pub fn write_mode_sidecar_json(
    path: &Path,
    modes: &[TransverseMode],
    config: &MediumBeamConfig,
) -> Result<()> {
    assert!(!modes.is_empty());
    let grid = &modes[0].grid;
    let sidecar = ChannelSidecar {
        m: modes[0].m,
        delta_s: modes[0].delta.s_inv(),
        grid: GridMeta { n_points: grid.n_points(), dr_m: grid.dr(), r_max_m: grid.r_max() },
        psi_unit: "m^-1",
        config_hash: config.content_hash(),
        modes: modes
            .iter()
            .map(|md| ModeSummary { n: md.n, beta_m2: md.beta, nodes: md.nodes })
            .collect(),
    };
    write_json(path, &sidecar)
}

/// Dispersion sweep table, one row per (delta, m, n).
pub fn write_dispersion_csv(path: &Path, table: &DispersionTable) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "delta_s,m,n,beta_m2,slope_hf,slope_fd,vg_mps,vg_over_c")?;
    for e in &table.entries {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            fmt_float(e.delta),
            e.m,
            e.n,
            fmt_float(e.beta),
            fmt_float(e.slope_hf),
            fmt_float(e.slope_fd),
            fmt_float(e.vg),
            fmt_float(e.vg / crate::config::SPEED_OF_LIGHT),
        )?;
    }
    Ok(())
}

/// Propagation diagnostics, one row per record.
pub fn write_diagnostics_csv(path: &Path, trajectory: &Trajectory) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "z_m,power,rms_radius_m,overlap,phase_rad")?;
    for r in &trajectory.records {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_float(r.z),
            fmt_float(r.power),
            fmt_float(r.rms_radius),
            fmt_float(r.overlap),
            fmt_float(r.phase),
        )?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    let text = serde_json::to_string_pretty(value).expect("serializable");
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Everything needed to reproduce a run; the CSV outputs of two runs with the
/// same manifest are byte-identical (wall time is informational only).
#[derive(Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub parameters: serde_json::Value,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(command: Vec<String>, config: &MediumBeamConfig) -> Self {
        Self {
            tool: "slowlight".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            config: serde_json::to_value(config).expect("config serializes"),
            parameters: serde_json::Value::Null,
            outputs: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join("manifest.json");
        write_json(&path, self)?;
        Ok(path)
    }
}
