//! Independent split-step Fourier propagation of monochromatic probe fields.
//!
//! Evolves dE/dz = i [ grad_T^2 / (2 k0) + delta/c + g^2 N delta / (c Omega(r)^2) ] E
//! with Strang splitting: half kinetic step in Fourier space, full potential
//! step in real space, half kinetic step (second order in dz). Cartesian FFT
//! stepping shares no discretization machinery with the radial eigensolver,
//! which is what makes the cross-checks meaningful.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::config::{Detuning, MediumBeamConfig, SPEED_OF_LIGHT};
use crate::error::{Result, SlowlightError};
use crate::field::Field2D;

/// Kinetic phase per step above which a run refuses to start or continue.
pub const PHASE_GUARD_RAD: f64 = 0.1;

/// Power fraction allowed beyond the occupied bandwidth when the step size is
/// chosen at plan build.
const BUILD_POWER_TAIL: f64 = 1e-7;

/// Looser mid-run tail: the steep potential annulus continuously winds the
/// field's far skirt up to high local wavenumbers at the 1e-5..1e-7 power
/// level before the absorber collects it; a run only aborts when a
/// non-negligible power fraction actually outruns the step.
const MIDRUN_POWER_TAIL: f64 = 1e-4;

/// How a propagation run is stepped, recorded, and bounded.
#[derive(Debug, Clone)]
pub struct PropagationPlan {
    /// Step size, m; None picks half the stability guard for the input field.
    pub dz: Option<f64>,
    /// Total distance, m.
    pub z_total: f64,
    /// Absorbing boundary layer width as a fraction of the extent.
    pub absorber_width_fraction: f64,
    /// Super-Gaussian order of the absorber ramp.
    pub absorber_order: u32,
    /// Amplitude attenuation rate at full ramp, 1/m; 0 disables the absorber.
    pub absorber_strength: f64,
    /// Diagnostics interval in steps; None records ~100 times per run.
    pub record_every: Option<usize>,
}

impl PropagationPlan {
    pub fn new(z_total: f64) -> Result<Self> {
        if !(z_total > 0.0) || !z_total.is_finite() {
            return Err(SlowlightError::InvalidConfig(format!(
                "propagation distance must be positive, got {z_total}"
            )));
        }
        Ok(Self {
            dz: None,
            z_total,
            absorber_width_fraction: 0.1,
            absorber_order: 8,
            absorber_strength: 2e4,
            record_every: None,
        })
    }

    pub fn with_dz(mut self, dz: f64) -> Self {
        self.dz = Some(dz);
        self
    }

    pub fn with_record_every(mut self, steps: usize) -> Self {
        self.record_every = Some(steps.max(1));
        self
    }

    pub fn without_absorber(mut self) -> Self {
        self.absorber_strength = 0.0;
        self
    }
}

/// The monochromatic evolution operator, exposed term by term.
///
/// Kinetic factor: multiply the Fourier transform by exp(-i k_T^2 dz/(2 k0));
/// potential factor: multiply pointwise by
/// exp(i [delta/c + g^2 N delta/(c Omega(r)^2)] dz).
pub struct StepEquation<'a> {
    config: &'a MediumBeamConfig,
    delta: Detuning,
}

impl<'a> StepEquation<'a> {
    pub fn new(config: &'a MediumBeamConfig, delta: Detuning) -> Self {
        Self { config, delta }
    }

    /// Phase rate of the kinetic factor at squared transverse wavenumber, rad/m.
    pub fn kinetic_phase_rate(&self, k_sq: f64) -> f64 {
        -k_sq / (2.0 * self.config.wavenumber())
    }

    /// Phase rate of the potential factor at radius r, rad/m.
    pub fn potential_phase_rate(&self, r: f64) -> Result<f64> {
        let d = self.delta.s_inv();
        if d == 0.0 {
            return Ok(0.0); // resonant probe: the medium term vanishes
        }
        let omega = self.config.rabi(r)?;
        Ok(d / SPEED_OF_LIGHT * (1.0 + self.config.g2n() / (omega * omega)))
    }
}

/// One diagnostics row of a propagation run.
#[derive(Debug, Clone)]
pub struct PropagationRecord {
    pub step: usize,
    pub z: f64,
    /// Total power, same units as the input field's |E|^2 integral.
    pub power: f64,
    /// Power-weighted rms radius, m.
    pub rms_radius: f64,
    /// Overlap correlation with the input field.
    pub overlap: f64,
    /// Accumulated (unwrapped) on-axis phase, rad.
    pub phase: f64,
}

/// Diagnostics of a completed run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<PropagationRecord>,
    /// Step size actually used, m.
    pub dz: f64,
    /// Cumulative power removed by the absorber, as a fraction of the input.
    pub absorbed_fraction: f64,
}

/// Propagate and collect diagnostics; the final field is returned alongside.
pub fn propagate(
    field: &Field2D,
    plan: &PropagationPlan,
    config: &MediumBeamConfig,
    delta: Detuning,
) -> Result<(Trajectory, Field2D)> {
    propagate_with(field, plan, config, delta, |_, _| Ok(()))
}

/// Propagate, invoking `on_record(record, field)` at every diagnostics point
/// (including z = 0 and the final step).
pub fn propagate_with<F>(
    field: &Field2D,
    plan: &PropagationPlan,
    config: &MediumBeamConfig,
    delta: Detuning,
    mut on_record: F,
) -> Result<(Trajectory, Field2D)>
where
    F: FnMut(&PropagationRecord, &Field2D) -> Result<()>,
{
    let mut stepper = Stepper::new(field, plan, config, delta)?;
    let initial_power = field.power();
    let mut work = field.clone();

    let mut records = Vec::new();
    let mut last_axis = work.on_axis();
    let mut phase_acc = 0.0;
    let record_initial = PropagationRecord {
        step: 0,
        z: 0.0,
        power: initial_power,
        rms_radius: work.rms_radius(),
        overlap: 1.0,
        phase: 0.0,
    };
    on_record(&record_initial, &work)?;
    records.push(record_initial);

    // merged Strang sweep: K/2 (P K)^{steps-1} P K/2, opening the merged
    // kinetic factor into two halves wherever a record falls
    stepper.half_kinetic(&mut work.values);
    for step in 1..=stepper.steps {
        stepper.potential_and_absorb(&mut work.values);
        let at_record = step % stepper.record_every == 0 || step == stepper.steps;
        if at_record {
            stepper.half_kinetic(&mut work.values);
        } else {
            stepper.full_kinetic(&mut work.values);
        }
        // unwrapped on-axis phase, accumulated every step; per-step changes
        // are guard-bounded well below pi, so the winding count is exact
        let axis = work.on_axis();
        if axis.norm_sqr() > 0.0 && last_axis.norm_sqr() > 0.0 {
            phase_acc += (axis * last_axis.conj()).arg();
        }
        last_axis = axis;
        if at_record {
            let z = step as f64 * stepper.dz;
            let record = PropagationRecord {
                step,
                z,
                power: work.power(),
                rms_radius: work.rms_radius(),
                overlap: work.overlap(field),
                phase: phase_acc,
            };
            if stepper.absorbed / initial_power > 0.01 {
                return Err(SlowlightError::PowerLoss {
                    lost_fraction: stepper.absorbed / initial_power,
                    context: format!("z = {z:.6e} m"),
                });
            }
            stepper.check_bandwidth(&work.values, z)?;
            on_record(&record, &work)?;
            records.push(record);
            if step < stepper.steps {
                stepper.half_kinetic(&mut work.values);
            }
        }
    }

    let trajectory = Trajectory {
        records,
        dz: stepper.dz,
        absorbed_fraction: stepper.absorbed / initial_power,
    };
    Ok((trajectory, work))
}

/// Precomputed phase factors and scratch for one run geometry.
struct Stepper {
    n: usize,
    k0: f64,
    dz: f64,
    steps: usize,
    record_every: usize,
    half_kin: Vec<Complex64>,
    full_kin: Vec<Complex64>,
    potential: Vec<Complex64>,
    mask: Option<Vec<f64>>,
    k_sq: Vec<f64>,
    absorbed: f64,
    cell: f64,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    transpose_buf: Vec<Complex64>,
}

impl Stepper {
    fn new(
        field: &Field2D,
        plan: &PropagationPlan,
        config: &MediumBeamConfig,
        delta: Detuning,
    ) -> Result<Self> {
        let n = field.n();
        let k0 = config.wavenumber();
        let equation = StepEquation::new(config, delta);

        // squared transverse wavenumber per FFT bin
        let dk = std::f64::consts::PI / field.extent();
        let freq = |i: usize| -> f64 {
            if i <= n / 2 { i as f64 * dk } else { (i as f64 - n as f64) * dk }
        };
        let mut k_sq = vec![0.0; n * n];
        for iy in 0..n {
            let ky = freq(iy);
            for ix in 0..n {
                let kx = freq(ix);
                k_sq[iy * n + ix] = kx * kx + ky * ky;
            }
        }

        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(n);
        let fft_inv = planner.plan_fft_inverse(n);
        let scratch_len = fft_fwd
            .get_inplace_scratch_len()
            .max(fft_inv.get_inplace_scratch_len());
        let mut stepper = Self {
            n,
            k0,
            dz: 0.0,
            steps: 0,
            record_every: 1,
            half_kin: Vec::new(),
            full_kin: Vec::new(),
            potential: Vec::new(),
            mask: None,
            k_sq,
            absorbed: 0.0,
            cell: field.dx() * field.dx(),
            fft_fwd,
            fft_inv,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            transpose_buf: vec![Complex64::new(0.0, 0.0); n * n],
        };

        // stability guard from the occupied spectrum of the input
        let mut spectrum = field.values.clone();
        stepper.fft2(&mut spectrum, true);
        let k_band_sq = occupied_bandwidth(&spectrum, &stepper.k_sq, BUILD_POWER_TAIL);
        let guard_rate = k_band_sq / (2.0 * k0);

        let dz_requested = match plan.dz {
            Some(dz) if dz > 0.0 && dz.is_finite() => dz,
            Some(dz) => {
                return Err(SlowlightError::InvalidConfig(format!(
                    "step size must be positive, got {dz}"
                )))
            }
            None => (0.5 * PHASE_GUARD_RAD / guard_rate.max(1e-12)).min(plan.z_total),
        };
        let steps = (plan.z_total / dz_requested).round().max(1.0) as usize;
        let dz = plan.z_total / steps as f64;
        if dz * guard_rate >= PHASE_GUARD_RAD {
            return Err(SlowlightError::UnstableStep { z: 0.0, phase: dz * guard_rate });
        }
        stepper.dz = dz;
        stepper.steps = steps;
        stepper.record_every = plan.record_every.unwrap_or((steps / 100).max(1)).max(1);

        // phase factors; the 1/n^2 inverse-FFT normalization rides on the
        // kinetic multipliers (exactly one per round trip)
        let norm = 1.0 / (n * n) as f64;
        stepper.half_kin = stepper
            .k_sq
            .iter()
            .map(|&ks| Complex64::from_polar(norm, equation.kinetic_phase_rate(ks) * dz * 0.5))
            .collect();
        stepper.full_kin = stepper
            .k_sq
            .iter()
            .map(|&ks| Complex64::from_polar(norm, equation.kinetic_phase_rate(ks) * dz))
            .collect();

        let mut potential = Vec::with_capacity(n * n);
        for iy in 0..n {
            let y = field.coord(iy);
            for ix in 0..n {
                let x = field.coord(ix);
                let rate = equation.potential_phase_rate((x * x + y * y).sqrt())?;
                potential.push(Complex64::from_polar(1.0, rate * dz));
            }
        }
        stepper.potential = potential;

        if plan.absorber_strength > 0.0 && plan.absorber_width_fraction > 0.0 {
            let extent = field.extent();
            let width = plan.absorber_width_fraction * extent;
            let start = extent - width;
            let order = plan.absorber_order as i32;
            let ramp = |coord: f64| -> f64 {
                let d = coord.abs() - start;
                if d <= 0.0 { 0.0 } else { (d / width).powi(order) }
            };
            let mut mask = Vec::with_capacity(n * n);
            for iy in 0..n {
                let y = field.coord(iy);
                for ix in 0..n {
                    let x = field.coord(ix);
                    mask.push((-plan.absorber_strength * dz * (ramp(x) + ramp(y))).exp());
                }
            }
            // precondition: the input must essentially live outside the layer
            let mut clear = 0.0;
            let mut total = 0.0;
            for (v, m) in field.values.iter().zip(&mask) {
                let p = v.norm_sqr();
                total += p;
                if *m >= 1.0 {
                    clear += p;
                }
            }
            if total > 0.0 && clear / total < 0.99 {
                return Err(SlowlightError::PowerLoss {
                    lost_fraction: 1.0 - clear / total,
                    context: "input field overlaps the absorbing boundary layer".into(),
                });
            }
            stepper.mask = Some(mask);
        }

        Ok(stepper)
    }

    /// In-place 2D FFT via row FFTs and transposes.
    fn fft2(&mut self, values: &mut [Complex64], forward: bool) {
        let n = self.n;
        let fft = if forward { self.fft_fwd.clone() } else { self.fft_inv.clone() };
        for row in values.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut self.scratch);
        }
        transpose_square(values, &mut self.transpose_buf, n);
        for row in values.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut self.scratch);
        }
        transpose_square(values, &mut self.transpose_buf, n);
    }

    fn apply_kinetic(&mut self, values: &mut [Complex64], half: bool) {
        self.fft2(values, true);
        {
            let factors = if half { &self.half_kin } else { &self.full_kin };
            for (v, f) in values.iter_mut().zip(factors) {
                *v *= f;
            }
        }
        self.fft2(values, false);
    }

    fn half_kinetic(&mut self, values: &mut [Complex64]) {
        self.apply_kinetic(values, true);
    }

    fn full_kinetic(&mut self, values: &mut [Complex64]) {
        self.apply_kinetic(values, false);
    }

    fn potential_and_absorb(&mut self, values: &mut [Complex64]) {
        match &self.mask {
            Some(mask) => {
                let mut removed = 0.0;
                for ((v, p), m) in values.iter_mut().zip(&self.potential).zip(mask) {
                    *v *= p;
                    if *m < 1.0 {
                        let before = v.norm_sqr();
                        *v *= *m;
                        removed += before - v.norm_sqr();
                    }
                }
                self.absorbed += removed * self.cell;
            }
            None => {
                for (v, p) in values.iter_mut().zip(&self.potential) {
                    *v *= p;
                }
            }
        }
    }

    /// Mid-run guard: the occupied bandwidth must keep the per-step kinetic
    /// phase under the limit.
    fn check_bandwidth(&mut self, values: &[Complex64], z: f64) -> Result<()> {
        let mut spectrum = values.to_vec();
        self.fft2(&mut spectrum, true);
        let k_band_sq = occupied_bandwidth(&spectrum, &self.k_sq, MIDRUN_POWER_TAIL);
        let phase = self.dz * k_band_sq / (2.0 * self.k0);
        if phase >= PHASE_GUARD_RAD {
            return Err(SlowlightError::UnstableStep { z, phase });
        }
        Ok(())
    }
}

/// Smallest k^2 containing all but the given power tail of the spectrum,
/// bucketed radially in k^2.
fn occupied_bandwidth(spectrum: &[Complex64], k_sq: &[f64], tail: f64) -> f64 {
    const BUCKETS: usize = 1024;
    let k2_max = k_sq.iter().fold(0.0_f64, |m, &k| m.max(k));
    if k2_max == 0.0 {
        return 0.0;
    }
    let mut power = [0.0_f64; BUCKETS];
    let mut total = 0.0;
    for (v, &ks) in spectrum.iter().zip(k_sq) {
        let p = v.norm_sqr();
        let b = ((ks / k2_max) * (BUCKETS as f64 - 1.0)) as usize;
        power[b.min(BUCKETS - 1)] += p;
        total += p;
    }
    if total == 0.0 {
        return 0.0;
    }
    let target = (1.0 - tail) * total;
    let mut acc = 0.0;
    for (b, p) in power.iter().enumerate() {
        acc += p;
        if acc >= target {
            return k2_max * (b + 1) as f64 / BUCKETS as f64;
        }
    }
    k2_max
}

fn transpose_square(values: &mut [Complex64], buf: &mut [Complex64], n: usize) {
    buf.copy_from_slice(values);
    for iy in 0..n {
        for ix in 0..n {
            values[ix * n + iy] = buf[iy * n + ix];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn paper() -> MediumBeamConfig {
        MediumBeamConfig::paper_defaults()
    }

    #[test]
    fn step_equation_rates() {
        let cfg = paper();
        let delta = Detuning(-1e6);
        let eq = StepEquation::new(&cfg, delta);
        // potential term at r = 0 is delta/c + g2N delta / (c Omega0^2)
        let expect = -1e6 / SPEED_OF_LIGHT * (1.0 + 1e22 / 1e16);
        assert_relative_eq!(eq.potential_phase_rate(0.0).unwrap(), expect, max_relative = 1e-14);
        // resonant probe sees no medium
        let eq0 = StepEquation::new(&cfg, Detuning(0.0));
        assert_eq!(eq0.potential_phase_rate(0.0).unwrap(), 0.0);
        // kinetic rate is -k^2/(2 k0)
        let k = 1e5;
        assert_relative_eq!(
            eq.kinetic_phase_rate(k * k),
            -k * k / (2.0 * cfg.wavenumber()),
            max_relative = 1e-15
        );
    }

    #[test]
    fn free_space_gaussian_spread_law() {
        // delta = 0: pure paraxial diffraction of a Gaussian of waist w:
        // w^2(z) = w^2 (1 + (z/(k0 w^2))^2), doubling the area at z = k0 w^2
        let cfg = paper();
        let w = 20e-6;
        let field = Field2D::from_fn(128, 150e-6, |x, y| {
            Complex64::new((-(x * x + y * y) / (2.0 * w * w)).exp(), 0.0)
        })
        .unwrap();
        let rayleigh = cfg.wavenumber() * w * w;
        // dz left on automatic: the guard picks it from the occupied spectrum
        let plan = PropagationPlan::new(rayleigh).unwrap().with_record_every(64);
        let (traj, final_field) = propagate(&field, &plan, &cfg, Detuning(0.0)).unwrap();
        for rec in &traj.records {
            let expect = w * w * (1.0 + (rec.z / rayleigh).powi(2));
            assert_relative_eq!(rec.rms_radius * rec.rms_radius, expect, max_relative = 1e-3);
        }
        assert_relative_eq!(
            final_field.rms_radius().powi(2),
            2.0 * w * w,
            max_relative = 1e-3
        );
    }

    #[test]
    fn uniform_medium_plane_wave_phase_is_exact() {
        // constant Omega = Omega0: a plane wave only picks up the uniform
        // potential phase (delta/c)(1 + g2N/Omega0^2) z
        let r: Vec<f64> = (0..=4).map(|i| i as f64 * 200e-6).collect();
        let profile = crate::profile::ControlProfile::user_table(r, vec![1e8; 5]).unwrap();
        let cfg = MediumBeamConfig::with_profile(50e-6, 1e22, 780e-9, profile).unwrap();
        let field = Field2D::from_fn(64, 150e-6, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let delta = Detuning(-1e6);
        let z_total = 1e-3;
        let plan = PropagationPlan::new(z_total)
            .unwrap()
            .with_dz(1e-5)
            .with_record_every(10)
            .without_absorber();
        let (traj, _) = propagate(&field, &plan, &cfg, delta).unwrap();
        let expect = -1e6 / SPEED_OF_LIGHT * (1.0 + 1e6) * z_total;
        let got = traj.records.last().unwrap().phase;
        assert_relative_eq!(got, expect, max_relative = 1e-12);
        // and the shape never changes
        assert!(traj.records.iter().all(|r2| r2.overlap > 1.0 - 1e-12));
    }

    #[test]
    fn power_is_conserved_without_absorber() {
        // mildly mismatched beam: breathes in the well without outrunning
        // the step guard at this resolution
        let cfg = paper();
        let field = Field2D::from_fn(128, 150e-6, |x, y| {
            Complex64::new((-(x * x + y * y) / (2.0 * 12e-6_f64.powi(2))).exp(), 0.0)
        })
        .unwrap();
        let plan = PropagationPlan::new(2e-3)
            .unwrap()
            .with_dz(2e-6)
            .with_record_every(250)
            .without_absorber();
        let (traj, _) = propagate(&field, &plan, &cfg, Detuning(-1e6)).unwrap();
        let p0 = traj.records[0].power;
        for rec in &traj.records {
            assert_relative_eq!(rec.power, p0, max_relative = 1e-8);
        }
        assert_eq!(traj.absorbed_fraction, 0.0);
    }

    #[test]
    fn guard_rejects_coarse_steps() {
        let cfg = paper();
        // sharp feature: tight Gaussian has broad occupied spectrum
        let field = Field2D::from_fn(128, 150e-6, |x, y| {
            Complex64::new((-(x * x + y * y) / (2.0 * 2e-6_f64.powi(2))).exp(), 0.0)
        })
        .unwrap();
        let plan = PropagationPlan::new(1e-2).unwrap().with_dz(1e-4);
        assert!(matches!(
            propagate(&field, &plan, &cfg, Detuning(-1e6)),
            Err(SlowlightError::UnstableStep { .. })
        ));
    }

    #[test]
    fn absorber_overlap_precondition() {
        let cfg = paper();
        // plane wave fills the absorber layer
        let field = Field2D::from_fn(64, 150e-6, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let plan = PropagationPlan::new(1e-3).unwrap().with_dz(1e-5);
        assert!(matches!(
            propagate(&field, &plan, &cfg, Detuning(-1e6)),
            Err(SlowlightError::PowerLoss { .. })
        ));
    }

    #[test]
    fn strang_order_in_step_size() {
        // self-Richardson on the accumulated phase: halving dz scales the
        // splitting error by ~4
        let cfg = paper();
        let w = 15e-6;
        let field = Field2D::from_fn(128, 100e-6, |x, y| {
            Complex64::new((-(x * x + y * y) / (2.0 * w * w)).exp(), 0.0)
        })
        .unwrap();
        let z = 1e-3;
        let phase_at = |dz: f64| -> f64 {
            let plan = PropagationPlan::new(z)
                .unwrap()
                .with_dz(dz)
                .with_record_every(((z / dz) as usize / 10).max(1));
            let (traj, _) = propagate(&field, &plan, &cfg, Detuning(-1e6)).unwrap();
            traj.records.last().unwrap().phase
        };
        let p1 = phase_at(2e-6);
        let p2 = phase_at(1e-6);
        let p3 = phase_at(5e-7);
        let ratio = (p1 - p2) / (p2 - p3);
        assert!((2.0..8.0).contains(&ratio), "order ratio {ratio}");
    }
}
