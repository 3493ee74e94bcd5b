//! Eigenvalue dispersion beta_mn(delta) and per-mode group velocities.
//!
//! The primary slope comes from the Hellmann–Feynman identity (delta enters
//! the potential linearly, so d(beta)/d(delta) is the expectation value of
//! dV/d(delta)); a central finite difference of beta(delta) is kept as an
//! independent cross-check column.
//!
//! Verified trend: deepening the well (larger |delta|) contracts every mode,
//! so beta rises while <Omega^-2> falls — each group velocity climbs toward,
//! but never reaches, the transverse-free limit c/(1 + g^2 N / Omega0^2).

use crate::config::{Detuning, MediumBeamConfig, SPEED_OF_LIGHT};
use crate::eigensolver::{solve_spectrum, SpectrumRequest, TransverseMode};
use crate::error::{Result, SlowlightError};

/// Relative finite-difference step for the cross-check column.
pub const FD_RELATIVE_STEP: f64 = 1e-3;

/// d(beta)/d(delta) from the Hellmann–Feynman identity, m^-2 s:
/// -integral of r psi^2 * 2 k0 g^2 N / (c Omega(r)^2) dr. Always negative.
pub fn hellmann_feynman_slope(mode: &TransverseMode, config: &MediumBeamConfig) -> Result<f64> {
    let k0 = config.wavenumber();
    let g2n = config.g2n();
    let grid = &mode.grid;
    let mut weighted = Vec::with_capacity(mode.psi.len());
    for (i, &p) in mode.psi.iter().enumerate() {
        let omega = config.rabi(grid.r_at(i + 1))?;
        weighted.push(p * p * 2.0 * k0 * g2n / (SPEED_OF_LIGHT * omega * omega));
    }
    Ok(-grid.integrate_r_weighted(&weighted))
}

/// Group velocity from an eigenvalue slope: c / (1 - (c / 2 k0) * slope), m/s.
///
/// Requires slope < 0; a non-negative slope can only come from a solver
/// defect and is rejected rather than propagated into a superluminal result.
pub fn group_velocity(slope: f64, config: &MediumBeamConfig) -> Result<f64> {
    if !(slope < 0.0) {
        return Err(SlowlightError::NonNegativeSlope { slope });
    }
    Ok(SPEED_OF_LIGHT / (1.0 - SPEED_OF_LIGHT / (2.0 * config.wavenumber()) * slope))
}

/// One sampled point of a dispersion sweep.
#[derive(Debug, Clone)]
pub struct DispersionEntry {
    pub delta: f64,
    pub m: i32,
    pub n: u32,
    pub beta: f64,
    pub slope_hf: f64,
    pub slope_fd: f64,
    pub vg: f64,
}

/// beta_mn and V_g^mn sampled over a detuning grid for a set of channels.
///
/// Entries are ordered delta-major (ascending detuning value), channel-minor
/// (the caller's channel order). Both slope columns are stored.
#[derive(Debug, Clone)]
pub struct DispersionTable {
    pub channels: Vec<(i32, u32)>,
    pub deltas: Vec<f64>,
    pub entries: Vec<DispersionEntry>,
}

impl DispersionTable {
    pub fn get(&self, delta: f64, m: i32, n: u32) -> Option<&DispersionEntry> {
        self.entries
            .iter()
            .find(|e| e.delta == delta && e.m == m && e.n == n)
    }

    /// All entries of one channel, in delta order.
    pub fn channel(&self, m: i32, n: u32) -> Vec<&DispersionEntry> {
        self.entries.iter().filter(|e| e.m == m && e.n == n).collect()
    }
}

/// Channels grouped per |m|-independent m value with the largest n needed.
fn group_by_m(channels: &[(i32, u32)]) -> Vec<(i32, u32)> {
    let mut groups: Vec<(i32, u32)> = Vec::new();
    for &(m, n) in channels {
        match groups.iter_mut().find(|(gm, _)| *gm == m) {
            Some((_, gn)) => *gn = (*gn).max(n),
            None => groups.push((m, n)),
        }
    }
    groups
}

/// Modes of one channel keyed by node count; continuation across the sweep
/// matches (m, node count) rather than raw eigenvalue order.
fn mode_with_nodes(modes: &[TransverseMode], m: i32, nodes: usize) -> Result<&TransverseMode> {
    modes
        .iter()
        .find(|md| md.m == m && md.nodes == nodes)
        .ok_or_else(|| SlowlightError::ConvergenceFailed {
            m,
            n: nodes as u32 + 1,
            reason: format!("no converged mode with {nodes} nodes in channel m={m}"),
        })
}

/// Sweep the requested channels over a detuning grid.
///
/// Every delta must be negative. Each point stores the Hellmann–Feynman
/// slope, a central finite-difference slope at relative step 1e-3, and the
/// group velocity from the Hellmann–Feynman value.
pub fn sweep(
    channels: &[(i32, u32)],
    delta_grid: &[f64],
    config: &MediumBeamConfig,
) -> Result<DispersionTable> {
    if channels.is_empty() {
        return Err(SlowlightError::InvalidConfig("channel list must be nonempty".into()));
    }
    let mut deltas = delta_grid.to_vec();
    deltas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for &d in &deltas {
        Detuning(d).require_negative()?;
    }

    let groups = group_by_m(channels);
    let mut entries = Vec::with_capacity(deltas.len() * channels.len());
    for &delta in &deltas {
        let mut per_m: Vec<(i32, SweepPoint)> = Vec::with_capacity(groups.len());
        for &(m, n_max) in &groups {
            let point = solve_channel_point(m, n_max, delta, config).map_err(|e| annotate(e, m, delta))?;
            per_m.push((m, point));
        }
        for &(m, n) in channels {
            let point = &per_m.iter().find(|(gm, _)| *gm == m).unwrap().1;
            let mode = mode_with_nodes(&point.center, m, (n - 1) as usize)
                .map_err(|e| annotate(e, m, delta))?;
            let plus = mode_with_nodes(&point.plus, m, (n - 1) as usize)
                .map_err(|e| annotate(e, m, delta))?;
            let minus = mode_with_nodes(&point.minus, m, (n - 1) as usize)
                .map_err(|e| annotate(e, m, delta))?;
            let slope_hf = hellmann_feynman_slope(mode, config)?;
            let slope_fd = (plus.beta - minus.beta) / (2.0 * point.h);
            let vg = group_velocity(slope_hf, config)?;
            entries.push(DispersionEntry { delta, m, n, beta: mode.beta, slope_hf, slope_fd, vg });
        }
    }
    Ok(DispersionTable { channels: channels.to_vec(), deltas, entries })
}

struct SweepPoint {
    center: Vec<TransverseMode>,
    plus: Vec<TransverseMode>,
    minus: Vec<TransverseMode>,
    h: f64,
}

/// Solve one (m, delta) group at delta and delta +/- h on a shared truncation
/// radius so the finite difference sees a fixed discretization.
fn solve_channel_point(
    m: i32,
    n_max: u32,
    delta: f64,
    config: &MediumBeamConfig,
) -> Result<SweepPoint> {
    let h = FD_RELATIVE_STEP * delta.abs();
    let mut request = SpectrumRequest::new(vec![m], n_max, Detuning(delta))?;
    let r_max = crate::eigensolver::auto_truncation_radius_for(
        config,
        Detuning(delta),
        None,
        n_max,
        m,
    )?;
    request.r_max = Some(r_max);
    let center = solve_spectrum(&request, config)?.modes;
    let solve_at = |d: f64| -> Result<Vec<TransverseMode>> {
        let mut req = SpectrumRequest::new(vec![m], n_max, Detuning(d))?;
        req.r_max = Some(r_max);
        Ok(solve_spectrum(&req, config)?.modes)
    };
    let plus = solve_at(delta + h)?;
    let minus = solve_at(delta - h)?;
    Ok(SweepPoint { center, plus, minus, h })
}

fn annotate(e: SlowlightError, m: i32, delta: f64) -> SlowlightError {
    match e {
        SlowlightError::ConvergenceFailed { n, reason, .. } => SlowlightError::ConvergenceFailed {
            m,
            n,
            reason: format!("{reason} (delta = {delta:.6e} s^-1)"),
        },
        other => other,
    }
}

/// Group velocity of one channel as the control-beam width grows.
///
/// Returns (a, vg) pairs for an ascending width grid; vg rises monotonically
/// toward the transverse-free limit as the beam widens.
pub fn beam_size_asymptotics(
    channel: (i32, u32),
    delta: Detuning,
    a_grid: &[f64],
    config: &MediumBeamConfig,
) -> Result<Vec<(f64, f64)>> {
    let delta = delta.require_negative()?;
    if !a_grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(SlowlightError::InvalidConfig(
            "beam-width grid must be strictly ascending".into(),
        ));
    }
    let (m, n) = channel;
    let mut out = Vec::with_capacity(a_grid.len());
    for &a in a_grid {
        let cfg = config.with_beam_radius(a)?;
        let request = SpectrumRequest::new(vec![m], n, delta)?;
        let modes = solve_spectrum(&request, &cfg)?.modes;
        let mode = mode_with_nodes(&modes, m, (n - 1) as usize)?;
        let vg = group_velocity(hellmann_feynman_slope(mode, &cfg)?, &cfg)?;
        out.push((a, vg));
    }
    Ok(out)
}

/// Log-spaced negative detuning grid between two negative endpoints.
pub fn log_delta_grid(delta_min: f64, delta_max: f64, steps: usize) -> Result<Vec<f64>> {
    Detuning(delta_min).require_negative()?;
    Detuning(delta_max).require_negative()?;
    if steps < 2 {
        return Err(SlowlightError::InvalidConfig("need at least 2 sweep steps".into()));
    }
    let (lo, hi) = (delta_min.abs().min(delta_max.abs()), delta_min.abs().max(delta_max.abs()));
    let mut grid: Vec<f64> = (0..steps)
        .map(|i| {
            let t = i as f64 / (steps - 1) as f64;
            -(lo.ln() + t * (hi.ln() - lo.ln())).exp()
        })
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(grid)
}
