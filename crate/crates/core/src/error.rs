//! Error type shared by every solver stage.

use thiserror::Error;

/// Any failure a solver call can surface.
#[derive(Debug, Error)]
pub enum SlowlightError {
    /// Bound transverse modes only exist for negative probe detuning; for
    /// delta >= 0 the effective potential has no quantized spectrum.
    #[error("detuning must be negative for bound transverse modes, got {delta} s^-1")]
    NotNegativeDetuning { delta: f64 },

    /// The control profile dropped below the evaluation floor; the medium
    /// response divides by Omega^2 and would silently overflow.
    #[error("control Rabi frequency underflow at r = {r} m: {omega} s^-1 is below the floor {floor} s^-1")]
    ProfileZero { r: f64, omega: f64, floor: f64 },

    /// No truncation radius in the allowed window puts the potential barrier
    /// safely above the requested eigenvalue range.
    #[error("no truncation radius in [{r_min} m, {r_max} m] reaches the barrier target {target} m^-2")]
    TruncationFailed { r_min: f64, r_max: f64, target: f64 },

    /// Eigenpair iteration failed to converge or produced an inconsistent mode.
    #[error("eigensolver failed for (m={m}, n={n}): {reason}")]
    ConvergenceFailed { m: i32, n: u32, reason: String },

    /// A non-negative eigenvalue slope would mean superluminal group velocity;
    /// it can only come from a solver defect.
    #[error("d(beta)/d(delta) must be negative, got {slope} m^-2 s")]
    NonNegativeSlope { slope: f64 },

    /// Projection inputs do not share the same (m, delta, grid, config) basis.
    #[error("mode basis mismatch: {0}")]
    BasisMismatch(String),

    /// Too much input power lies outside the largest inscribed circle, so the
    /// polar resampling would silently truncate it.
    #[error("{outside_fraction:.3}% of the input power lies outside the inscribed circle (limit 5%)")]
    OffAxisField { outside_fraction: f64 },

    /// Step-size guard violated: the kinetic phase advance per step over the
    /// occupied spectrum exceeds 0.1 rad.
    #[error("unstable propagation step at z = {z} m: kinetic phase {phase:.3} rad per step exceeds 0.1 rad")]
    UnstableStep { z: f64, phase: f64 },

    /// The boundary absorber removed more than 1% of a supposedly bound
    /// input, which signals an unconverged or non-bound field.
    #[error("absorber removed {lost_fraction:.3e} of the field power ({context})")]
    PowerLoss { lost_fraction: f64, context: String },

    /// A configuration value violates its invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A config or field file could not be parsed.
    #[error("parse error in {path}: {reason}")]
    Parse { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SlowlightError {
    /// CLI exit code class: 2 usage/file, 3 physics precondition, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        use SlowlightError::*;
        match self {
            Parse { .. } | Io(_) => 2,
            NotNegativeDetuning { .. } | ProfileZero { .. } | InvalidConfig(_)
            | BasisMismatch(_) | OffAxisField { .. } => 3,
            TruncationFailed { .. } | ConvergenceFailed { .. } | NonNegativeSlope { .. }
            | UnstableStep { .. } | PowerLoss { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, SlowlightError>;
