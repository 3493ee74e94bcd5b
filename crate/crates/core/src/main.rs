//! Command-line front end: config ingestion, the four workflows (modes,
//! dispersion, decompose, propagate), and reproducible CSV/JSON emission.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use slowlight::bpm::{propagate_with, PropagationPlan};
use slowlight::config::{load_config, Detuning, MediumBeamConfig};
use slowlight::decompose::{decompose, synthesize, ModeBasis};
use slowlight::dispersion::{log_delta_grid, sweep};
use slowlight::eigensolver::{solve_spectrum, SpectrumRequest};
use slowlight::error::{Result, SlowlightError};
use slowlight::field::Field2D;
use slowlight::output::{
    write_diagnostics_csv, write_dispersion_csv, write_json, write_mode_channel_csv,
    write_mode_sidecar_json, RunManifest,
};

#[derive(Parser)]
#[command(
    name = "slowlight",
    version,
    about = "Localized transverse modes and slow-light dispersion of a probe field under a finite control beam",
    after_help = "Exit codes: 0 success, 2 usage or file error, 3 physics precondition, 4 numerical failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve transverse eigenmodes and export per-channel radial profiles
    Modes(ModesArgs),
    /// Sweep eigenvalues and group velocities over a detuning grid
    Dispersion(DispersionArgs),
    /// Expand a field file in the eigenmode basis
    Decompose(DecomposeArgs),
    /// Propagate a field file with the split-step oracle
    Propagate(PropagateArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Config file (TOML: omega0_s, beam_radius_m, g2N_s2, lambda0_m,
    /// optional [profile] with kind/table_path); defaults to the built-in
    /// example system when omitted
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override the control-beam width a, m
    #[arg(long, value_name = "M")]
    a: Option<f64>,

    /// Radial grid points for the eigensolver
    #[arg(long, value_name = "INT")]
    grid_points: Option<usize>,

    /// Output directory (created if missing)
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ModesArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Probe detuning, s^-1 (must be negative)
    #[arg(long, value_name = "S", default_value_t = -1e6, allow_hyphen_values = true)]
    delta: f64,

    /// Orbital channels, comma-separated (e.g. 0,1,2)
    #[arg(long, value_name = "LIST", value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
    m: Vec<i32>,

    /// Modes per channel
    #[arg(long, value_name = "INT", default_value_t = 3)]
    nmax: u32,
}

#[derive(Args)]
struct DispersionArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Most negative detuning of the sweep, s^-1
    #[arg(long, value_name = "S", default_value_t = -1e7, allow_hyphen_values = true)]
    delta_min: f64,

    /// Least negative detuning of the sweep, s^-1
    #[arg(long, value_name = "S", default_value_t = -1e5, allow_hyphen_values = true)]
    delta_max: f64,

    /// Number of sweep points (log-spaced in |delta|)
    #[arg(long, value_name = "INT", default_value_t = 20)]
    delta_steps: usize,

    /// Orbital channels, comma-separated
    #[arg(long, value_name = "LIST", value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
    m: Vec<i32>,

    /// Modes per channel
    #[arg(long, value_name = "INT", default_value_t = 3)]
    nmax: u32,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Probe detuning, s^-1 (must be negative)
    #[arg(long, value_name = "S", default_value_t = -1e6, allow_hyphen_values = true)]
    delta: f64,

    /// Input field file (slowlight field2d binary)
    #[arg(long, value_name = "PATH")]
    field: PathBuf,

    /// Orbital channels to project on, comma-separated
    #[arg(long, value_name = "LIST", value_delimiter = ',', default_value = "0,1,2", allow_hyphen_values = true)]
    m: Vec<i32>,

    /// Modes per channel
    #[arg(long, value_name = "INT", default_value_t = 3)]
    nmax: u32,

    /// Also emit the resynthesized field at this propagation distance, m
    #[arg(long, value_name = "M")]
    z_total: Option<f64>,
}

#[derive(Args)]
struct PropagateArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Probe detuning, s^-1
    #[arg(long, value_name = "S", default_value_t = -1e6, allow_hyphen_values = true)]
    delta: f64,

    /// Input field file (slowlight field2d binary)
    #[arg(long, value_name = "PATH")]
    field: PathBuf,

    /// Step size, m (default: picked from the stability guard)
    #[arg(long, value_name = "M")]
    dz: Option<f64>,

    /// Propagation distance, m
    #[arg(long, value_name = "M", default_value_t = 1e-2)]
    z_total: f64,
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = match cli.command {
        Command::Modes(args) => cmd_modes(args, started),
        Command::Dispersion(args) => cmd_dispersion(args, started),
        Command::Decompose(args) => cmd_decompose(args, started),
        Command::Propagate(args) => cmd_propagate(args, started),
    };
    match result {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if let Some(hint) = remediation(&err) {
                eprintln!("hint: {hint}");
            }
            std::process::ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn remediation(err: &SlowlightError) -> Option<&'static str> {
    match err {
        SlowlightError::UnstableStep { .. } => {
            Some("reduce --dz, or leave it unset to pick a stable step automatically")
        }
        SlowlightError::PowerLoss { .. } => Some(
            "the input is not a bound mode on this domain; enlarge the field extent or \
             decompose the input first to check its residual",
        ),
        SlowlightError::NotNegativeDetuning { .. } => {
            Some("localized transverse modes require --delta < 0")
        }
        _ => None,
    }
}

fn resolve_config(common: &CommonArgs) -> Result<MediumBeamConfig> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => MediumBeamConfig::paper_defaults(),
    };
    if let Some(a) = common.a {
        cfg = cfg.with_beam_radius(a)?;
    }
    Ok(cfg)
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn argv() -> Vec<String> {
    std::env::args().collect()
}

fn cmd_modes(args: ModesArgs, started: Instant) -> Result<()> {
    let cfg = resolve_config(&args.common)?;
    prepare_out_dir(&args.common.out)?;
    let mut manifest = RunManifest::new(argv(), &cfg);
    manifest.parameters = serde_json::json!({
        "delta_s": args.delta,
        "m": args.m,
        "nmax": args.nmax,
        "grid_points": args.common.grid_points,
    });

    let mut request = SpectrumRequest::new(args.m.clone(), args.nmax, Detuning(args.delta))?;
    request.n_points = args.common.grid_points;
    let solution = solve_spectrum(&request, &cfg)?;
    for rejection in &solution.rejected {
        eprintln!(
            "warning: mode (m={}, n={}) rejected: beta {:.6e} not below the barrier {:.6e}",
            rejection.m, rejection.n, rejection.beta, rejection.barrier
        );
    }

    for &m in &args.m {
        let channel: Vec<_> = solution.modes.iter().filter(|md| md.m == m).cloned().collect();
        if channel.is_empty() {
            continue;
        }
        let label = if m < 0 { format!("m-{}", m.unsigned_abs()) } else { format!("m{m}") };
        let csv_path = args.common.out.join(format!("modes_{label}.csv"));
        write_mode_channel_csv(&csv_path, &channel)?;
        manifest.record_output(&csv_path);
        let json_path = args.common.out.join(format!("modes_{label}.json"));
        write_mode_sidecar_json(&json_path, &channel, &cfg)?;
        manifest.record_output(&json_path);
        println!(
            "m={m}: {} modes, beta = [{}] m^-2",
            channel.len(),
            channel
                .iter()
                .map(|md| format!("{:.6e}", md.beta))
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    manifest.write(&args.common.out)?;
    Ok(())
}

fn cmd_dispersion(args: DispersionArgs, started: Instant) -> Result<()> {
    let cfg = resolve_config(&args.common)?;
    prepare_out_dir(&args.common.out)?;
    let mut manifest = RunManifest::new(argv(), &cfg);
    manifest.parameters = serde_json::json!({
        "delta_min_s": args.delta_min,
        "delta_max_s": args.delta_max,
        "delta_steps": args.delta_steps,
        "m": args.m,
        "nmax": args.nmax,
    });

    if args.m.is_empty() {
        return Err(SlowlightError::InvalidConfig("channel list must be nonempty".into()));
    }
    let channels: Vec<(i32, u32)> = args
        .m
        .iter()
        .flat_map(|&m| (1..=args.nmax).map(move |n| (m, n)))
        .collect();
    let grid = log_delta_grid(args.delta_min, args.delta_max, args.delta_steps)?;
    let table = sweep(&channels, &grid, &cfg)?;
    let csv_path = args.common.out.join("dispersion.csv");
    write_dispersion_csv(&csv_path, &table)?;
    manifest.record_output(&csv_path);
    println!(
        "swept {} channels over {} detunings -> {}",
        channels.len(),
        grid.len(),
        csv_path.display()
    );
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    manifest.write(&args.common.out)?;
    Ok(())
}

fn cmd_decompose(args: DecomposeArgs, started: Instant) -> Result<()> {
    let cfg = resolve_config(&args.common)?;
    prepare_out_dir(&args.common.out)?;
    let mut manifest = RunManifest::new(argv(), &cfg);
    manifest.parameters = serde_json::json!({
        "delta_s": args.delta,
        "field": args.field.display().to_string(),
        "m": args.m,
        "nmax": args.nmax,
        "z_total_m": args.z_total,
    });

    let field = Field2D::read(&args.field)?;
    let mut request = SpectrumRequest::new(args.m.clone(), args.nmax, Detuning(args.delta))?;
    request.n_points = args.common.grid_points;
    let solution = solve_spectrum(&request, &cfg)?;
    let basis = ModeBasis::new(&cfg, solution.modes)?;
    let expansion = decompose(&field, &basis)?;

    let json_path = args.common.out.join("expansion.json");
    write_json(&json_path, &expansion)?;
    manifest.record_output(&json_path);
    println!(
        "decomposed {}: {} terms, residual power fraction {:.3e}",
        args.field.display(),
        expansion.terms.len(),
        expansion.residual_power_fraction
    );
    for term in &expansion.terms {
        let c = Complex64::new(term.coeff_re, term.coeff_im);
        println!("  (m={}, n={}): |c| = {:.6e}", term.m, term.n, c.norm());
    }

    if let Some(z) = args.z_total {
        let resynth = synthesize(&expansion, &basis, z)?;
        let field_path = args.common.out.join("resynthesized.f2d");
        resynth.write(&field_path)?;
        manifest.record_output(&field_path);
        println!("resynthesized field at z = {z:.6e} m -> {}", field_path.display());
    }
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    manifest.write(&args.common.out)?;
    Ok(())
}

fn cmd_propagate(args: PropagateArgs, started: Instant) -> Result<()> {
    let cfg = resolve_config(&args.common)?;
    prepare_out_dir(&args.common.out)?;
    let mut manifest = RunManifest::new(argv(), &cfg);
    manifest.parameters = serde_json::json!({
        "delta_s": args.delta,
        "field": args.field.display().to_string(),
        "dz_m": args.dz,
        "z_total_m": args.z_total,
    });

    let field = Field2D::read(&args.field)?;
    let mut plan = PropagationPlan::new(args.z_total)?;
    plan.dz = args.dz;

    let out_dir = args.common.out.clone();
    let mut snapshots = Vec::new();
    let (trajectory, _final_field) =
        propagate_with(&field, &plan, &cfg, Detuning(args.delta), |record, snapshot| {
            let path = out_dir.join(format!("field_{:06}.f2d", record.step));
            snapshot.write(&path)?;
            snapshots.push(path);
            Ok(())
        })?;

    let csv_path = args.common.out.join("diagnostics.csv");
    write_diagnostics_csv(&csv_path, &trajectory)?;
    for path in &snapshots {
        manifest.record_output(path);
    }
    manifest.record_output(&csv_path);
    let last = trajectory.records.last().expect("at least the initial record");
    println!(
        "propagated {:.6e} m in {} steps (dz = {:.6e} m): overlap {:.6}, rms {:.6e} m, phase {:.6} rad",
        args.z_total,
        last.step,
        trajectory.dz,
        last.overlap,
        last.rms_radius,
        last.phase
    );
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    manifest.write(&args.common.out)?;
    Ok(())
}
