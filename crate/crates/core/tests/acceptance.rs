//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured numbers (visible with `--nocapture`).
//!
//! Criterion 4 asserts the trend pair exactly as specified (beta strictly
//! increasing and V_g strictly decreasing in |delta|). The beta half holds;
//! the V_g half contradicts the Hellmann-Feynman identity
//! V_g = c / (1 + g^2 N <Omega^-2>): deepening the well contracts every mode,
//! so <Omega^-2> falls and V_g *rises* toward the transverse-free limit. The
//! test reports the measured endpoints and fails honestly rather than
//! asserting the opposite of what the physics (and this solver) produce.

use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;

use slowlight::bpm::{propagate, PropagationPlan};
use slowlight::config::{Detuning, MediumBeamConfig, SPEED_OF_LIGHT};
use slowlight::dispersion::{
    beam_size_asymptotics, group_velocity, hellmann_feynman_slope, log_delta_grid, sweep,
};
use slowlight::eigensolver::{
    assemble_with_potential, solve_spectrum, SpectrumRequest, TransverseMode,
};
use slowlight::field::{synthesize_mode_field, Field2D};
use slowlight::grid::RadialGrid;

fn paper() -> MediumBeamConfig {
    MediumBeamConfig::paper_defaults()
}

fn solve_channel(cfg: &MediumBeamConfig, m: i32, n_max: u32, delta: f64) -> Vec<TransverseMode> {
    let request = SpectrumRequest::new(vec![m], n_max, Detuning(delta)).unwrap();
    solve_spectrum(&request, cfg).unwrap().modes
}

const FIG35_CHANNELS: [(i32, u32); 7] = [(0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (2, 1), (2, 2)];

#[test]
fn criterion_01_transverse_free_limit() {
    let cfg = paper();
    let started = Instant::now();
    let vg = cfg.transverse_free_vg();
    let elapsed = started.elapsed();
    let closed_form = SPEED_OF_LIGHT / (1.0 + 1e6);
    assert_eq!(vg.to_bits(), closed_form.to_bits(), "closed form must be exact");
    // the quoted 1e-6 c is that closed form rounded at the 1e-6 level
    let rel = (vg - 1e-6 * SPEED_OF_LIGHT).abs() / (1e-6 * SPEED_OF_LIGHT);
    assert!(rel < 2e-6, "vg {vg} vs 1e-6 c: rel {rel}");
    assert!(elapsed.as_secs_f64() < 1e-3, "took {elapsed:?}");
    println!(
        "criterion 01 transverse-free-limit: PASS (vg = {vg:.6} m/s, rel to 1e-6c = {rel:.2e}, {elapsed:?})"
    );
}

#[test]
fn criterion_02_universal_slowdown() {
    let cfg = paper();
    let started = Instant::now();
    let bound = 1e-6 * SPEED_OF_LIGHT;
    let mut worst: f64 = 0.0;
    for delta in [-1e5, -1e6, -1e7] {
        for &(m, n) in &FIG35_CHANNELS {
            let modes = solve_channel(&cfg, m, n, delta);
            let mode = modes.iter().find(|md| md.n == n).unwrap();
            let vg = group_velocity(hellmann_feynman_slope(mode, &cfg).unwrap(), &cfg).unwrap();
            assert!(
                vg < bound,
                "V_g({m},{n}) at delta {delta:e} is {vg} m/s, not below 1e-6 c"
            );
            worst = worst.max(vg);
        }
    }
    println!(
        "criterion 02 universal-slowdown: PASS (max vg = {worst:.4} m/s < {bound:.4} m/s, {:?})",
        started.elapsed()
    );
}

#[test]
fn criterion_03_group_velocity_ordering() {
    let cfg = paper();
    let delta = -1e6;
    let mut vg = std::collections::BTreeMap::new();
    for &(m, n) in &FIG35_CHANNELS {
        let modes = solve_channel(&cfg, m, n, delta);
        let mode = modes.iter().find(|md| md.n == n).unwrap();
        vg.insert((m, n), group_velocity(hellmann_feynman_slope(mode, &cfg).unwrap(), &cfg).unwrap());
    }
    let ordered = [
        ((1, 1), (2, 1)),
        ((2, 1), (1, 2)),
        ((1, 2), (2, 2)),
        ((0, 1), (0, 2)),
        ((0, 2), (0, 3)),
    ];
    let mut min_margin = f64::MAX;
    for (hi, lo) in ordered {
        let margin = (vg[&hi] - vg[&lo]) / vg[&hi];
        assert!(
            margin > 1e-9,
            "ordering V_g{hi:?} > V_g{lo:?} violated: {} vs {}",
            vg[&hi],
            vg[&lo]
        );
        min_margin = min_margin.min(margin);
    }
    println!(
        "criterion 03 ordering: PASS (V11>V21>V12>V22 and V01>V02>V03, min rel margin {min_margin:.3e})"
    );
}

#[test]
fn criterion_04_monotone_trends() {
    let cfg = paper();
    let grid = log_delta_grid(-1e7, -1e5, 20).unwrap();
    let table = sweep(&[(0, 1), (0, 2), (0, 3)], &grid, &cfg).unwrap();
    for &(m, n) in table.channels.clone().iter() {
        // entries ascend in delta, so |delta| descends along the channel
        let entries = table.channel(m, n);
        for pair in entries.windows(2) {
            assert!(
                pair[1].beta < pair[0].beta,
                "beta({m},{n}) not strictly increasing in |delta|"
            );
        }
    }
    println!("criterion 04 monotone-trends: beta strictly increasing in |delta|: OK");
    // V_g strictly decreasing in |delta|, asserted as specified
    for &(m, n) in table.channels.clone().iter() {
        let entries = table.channel(m, n);
        let first = entries.first().unwrap(); // most negative delta
        let last = entries.last().unwrap();
        for pair in entries.windows(2) {
            assert!(
                pair[1].vg > pair[0].vg,
                "criterion 04 monotone-trends: FAIL - V_g({m},{n}) is not decreasing in |delta|: \
                 vg = {:.4} m/s at |delta| = {:.3e} vs {:.4} m/s at |delta| = {:.3e} \
                 (V_g increases with |delta|, consistent with \
                 V_g = c/(1 + g^2N <Omega^-2>) and mode contraction in the deeper well)",
                first.vg,
                first.delta.abs(),
                last.vg,
                last.delta.abs(),
            );
        }
    }
    println!("criterion 04 monotone-trends: PASS");
}

#[test]
fn criterion_05_node_structure() {
    let cfg = paper();
    for m in 0..=2 {
        let modes = solve_channel(&cfg, m, 3, -1e6);
        for mode in &modes {
            assert_eq!(
                mode.nodes,
                (mode.n - 1) as usize,
                "psi_({m},{}) has {} nodes",
                mode.n,
                mode.nodes
            );
        }
    }
    println!("criterion 05 node-structure: PASS (psi_mn has n-1 interior nodes for m<=2, n<=3)");
}

#[test]
fn criterion_06_m_sign_degeneracy() {
    let cfg = paper();
    for m in [1i32, 2] {
        let plus = solve_channel(&cfg, m, 2, -1e6);
        let minus = solve_channel(&cfg, -m, 2, -1e6);
        for (p, q) in plus.iter().zip(&minus) {
            assert_eq!(p.beta.to_bits(), q.beta.to_bits(), "beta(+-{m}) differ");
            assert_eq!(p.psi.len(), q.psi.len());
            for (x, y) in p.psi.iter().zip(&q.psi) {
                assert_eq!(x.to_bits(), y.to_bits(), "psi(+-{m}) differ");
            }
        }
    }
    println!("criterion 06 m-sign-degeneracy: PASS (beta and psi bitwise identical for m = +-1, +-2)");
}

#[test]
fn criterion_07_slope_cross_check() {
    let cfg = paper();
    let started = Instant::now();
    let grid = log_delta_grid(-1e7, -1e5, 20).unwrap();
    let table = sweep(&FIG35_CHANNELS, &grid, &cfg).unwrap();
    let mut worst: f64 = 0.0;
    for e in &table.entries {
        let rel = ((e.slope_hf - e.slope_fd) / e.slope_fd).abs();
        assert!(
            rel <= 1e-5,
            "HF vs FD slope at (m={}, n={}, delta={:.3e}): rel {rel:.3e}",
            e.m,
            e.n,
            e.delta
        );
        worst = worst.max(rel);
    }
    println!(
        "criterion 07 slope-cross-check: PASS (max rel discrepancy {worst:.3e} over {} entries, {:?})",
        table.entries.len(),
        started.elapsed()
    );
}

#[test]
fn criterion_08_harmonic_well_oracle() {
    let cfg = paper();
    // deep-well point: quadratic-expansion validity confirmed by the
    // first-order anharmonic shifts staying under the tolerance itself
    let delta = -1e7;
    let v0 = cfg.well_floor(Detuning(delta));
    let a = cfg.beam_radius();
    let spacing = 2.0 * v0.sqrt() / a;
    let gate_m0 = 1.0 / (2.0 * a * v0.sqrt());
    let gate_m1 = 3.0 / (4.0 * a * v0.sqrt());
    assert!(gate_m0 < 0.05 && gate_m1 < 0.05, "anharmonicity gates {gate_m0:.3} {gate_m1:.3}");

    let beta01 = solve_channel(&cfg, 0, 1, delta)[0].beta;
    let beta11 = solve_channel(&cfg, 1, 1, delta)[0].beta;
    let rel0 = ((beta01 - v0) - spacing).abs() / spacing;
    let rel1 = ((beta11 - v0) - 2.0 * spacing).abs() / (2.0 * spacing);
    assert!(rel0 < 0.05, "beta01 - V0 off harmonic by {rel0:.3}");
    assert!(rel1 < 0.05, "beta11 - V0 off harmonic by {rel1:.3}");
    println!(
        "criterion 08 harmonic-well-oracle: PASS (rel dev {rel0:.4} for (0,1), {rel1:.4} for (1,1); \
         anharmonic gates {gate_m0:.4}, {gate_m1:.4})"
    );
}

#[test]
fn criterion_09_hard_wall_bessel_oracle() {
    const J01_QUOTED: f64 = 2.404826;
    let exact = J01_QUOTED * J01_QUOTED;
    let lowest = |n_points: usize| -> f64 {
        let grid = RadialGrid::with_radius(n_points, 1.0, 0).unwrap();
        let t = assemble_with_potential(&grid, |_| Ok(0.0)).unwrap();
        t.lowest_eigenvalues(1)[0]
    };
    let ev = lowest(4000);
    let rel = ((ev - exact) / exact).abs();
    assert!(rel < 1e-4, "hard-wall eigenvalue off by {rel:.3e}");
    // observed order of accuracy on a dyadic refinement, via Richardson
    // differences (insensitive to the rounding of the quoted zero)
    let (b1, b2, b3, b4) = (lowest(500), lowest(1000), lowest(2000), lowest(4000));
    let r1 = (b1 - b2) / (b2 - b3);
    let r2 = (b2 - b3) / (b3 - b4);
    assert!((2.0..8.0).contains(&r1), "convergence ratio {r1:.2}");
    assert!((2.0..8.0).contains(&r2), "convergence ratio {r2:.2}");
    println!(
        "criterion 09 hard-wall-bessel: PASS (rel err {rel:.3e} at n=4000, refinement ratios {r1:.2}, {r2:.2})"
    );
}

struct StationarityRun {
    beta01: f64,
    min_overlap: f64,
    rms_drift: f64,
    phase_slope: f64,
    elapsed_s: f64,
}

static STATIONARITY: OnceLock<StationarityRun> = OnceLock::new();

fn stationarity_run() -> &'static StationarityRun {
    STATIONARITY.get_or_init(|| {
        let cfg = paper();
        let delta = -1e6;
        let mode = solve_channel(&cfg, 0, 1, delta).remove(0);
        let beta01 = mode.beta;
        let field = synthesize_mode_field(&mode, Complex64::new(1.0, 0.0), 512, 150e-6).unwrap();
        let plan = PropagationPlan::new(1e-2).unwrap().with_record_every(40);
        let started = Instant::now();
        let (traj, _) = propagate(&field, &plan, &cfg, Detuning(delta)).unwrap();
        let elapsed_s = started.elapsed().as_secs_f64();
        let min_overlap = traj.records.iter().map(|r| r.overlap).fold(f64::MAX, f64::min);
        let rms0 = traj.records[0].rms_radius;
        let rms_drift = traj
            .records
            .iter()
            .map(|r| ((r.rms_radius - rms0) / rms0).abs())
            .fold(0.0, f64::max);
        // least-squares phase slope through the records
        let n = traj.records.len() as f64;
        let (mut sz, mut sp, mut szz, mut szp) = (0.0, 0.0, 0.0, 0.0);
        for r in &traj.records {
            sz += r.z;
            sp += r.phase;
            szz += r.z * r.z;
            szp += r.z * r.phase;
        }
        let phase_slope = (n * szp - sz * sp) / (n * szz - sz * sz);
        StationarityRun { beta01, min_overlap, rms_drift, phase_slope, elapsed_s }
    })
}

#[test]
fn criterion_10_diffraction_free_stationarity() {
    let run = stationarity_run();
    assert!(run.min_overlap >= 0.999, "overlap dropped to {}", run.min_overlap);
    assert!(run.rms_drift < 5e-3, "rms radius drifted {:.3e}", run.rms_drift);
    assert!(run.elapsed_s < 60.0, "eigenmode run took {:.1} s", run.elapsed_s);

    // contrast case: a mismatched Gaussian (waist a/2, 1/e^2 intensity
    // radius) loses shape quickly; one full two-mode beat shows it
    let cfg = paper();
    let delta = -1e6;
    let w0 = cfg.beam_radius() / 2.0;
    let gaussian = Field2D::from_fn(512, 150e-6, |x, y| {
        Complex64::new((-(x * x + y * y) / (w0 * w0)).exp(), 0.0)
    })
    .unwrap();
    let plan = PropagationPlan::new(2.5e-3).unwrap().with_dz(1e-6).with_record_every(100);
    let (traj, _) = propagate(&gaussian, &plan, &cfg, Detuning(delta)).unwrap();
    let min_overlap = traj.records.iter().map(|r| r.overlap).fold(f64::MAX, f64::min);
    assert!(min_overlap < 0.99, "mismatched Gaussian kept overlap {min_overlap}");
    println!(
        "criterion 10 diffraction-free-stationarity: PASS (eigenmode overlap >= {:.6}, rms drift {:.2e}, \
         {:.1} s at N=512; mismatched Gaussian dropped to {:.3})",
        run.min_overlap, run.rms_drift, run.elapsed_s, min_overlap
    );
}

#[test]
fn criterion_11_dispersion_cross_check() {
    let run = stationarity_run();
    let cfg = paper();
    let expected = -1e6 / SPEED_OF_LIGHT - run.beta01 / (2.0 * cfg.wavenumber());
    let rel = ((run.phase_slope - expected) / expected).abs();
    assert!(rel <= 1e-4, "phase slope {} vs eigen-predicted {expected}: rel {rel:.3e}", run.phase_slope);
    println!(
        "criterion 11 dispersion-cross-check: PASS (BPM slope {:.6} rad/m vs {:.6} rad/m, rel {rel:.3e})",
        run.phase_slope, expected
    );
}

#[test]
fn criterion_12_beam_size_asymptotics() {
    let cfg = paper();
    let a_grid: Vec<f64> = [10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0]
        .iter()
        .map(|um| um * 1e-6)
        .collect();
    let out = beam_size_asymptotics((0, 1), Detuning(-1e6), &a_grid, &cfg).unwrap();
    for pair in out.windows(2) {
        assert!(
            pair[1].1 > pair[0].1,
            "vg not monotone: {} m/s at a={} then {} m/s at a={}",
            pair[0].1,
            pair[0].0,
            pair[1].1,
            pair[1].0
        );
    }
    let last = out.last().unwrap();
    let rel = ((last.1 - 1e-6 * SPEED_OF_LIGHT) / (1e-6 * SPEED_OF_LIGHT)).abs();
    assert!(rel < 0.01, "vg at a = 1 mm is {:.4} m/s, {rel:.3e} from 1e-6 c", last.1);
    println!(
        "criterion 12 beam-size-asymptotics: PASS (monotone over {} widths, final gap {rel:.3e})",
        out.len()
    );
}
