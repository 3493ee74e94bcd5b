//! Physical parameters of the EIT system and the derived scalar quantities
//! every other module consumes. SI units throughout.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SlowlightError};
use crate::profile::ControlProfile;

/// Vacuum light speed, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Fraction of omega0 below which profile evaluation is treated as underflow
/// rather than silently dividing by an astronomically small Omega^2.
pub const OMEGA_FLOOR_FRACTION: f64 = 1e-12;

/// Probe detuning delta = omega_s - omega_02, s^-1 (signed).
///
/// Bound-state computations require a negative value; solvers enforce this at
/// entry rather than returning an empty spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detuning(pub f64);

impl Detuning {
    pub fn s_inv(self) -> f64 {
        self.0
    }

    /// Error unless delta < 0.
    pub fn require_negative(self) -> Result<Self> {
        if self.0 < 0.0 && self.0.is_finite() {
            Ok(self)
        } else {
            Err(SlowlightError::NotNegativeDetuning { delta: self.0 })
        }
    }
}

/// Physical constants of the EIT system plus the control-beam radial profile.
///
/// - `omega0`: control Rabi-frequency peak Omega0, s^-1
/// - `beam_radius`: control-beam width a, m
/// - `g2n`: atom-field coupling density product g^2 N, s^-2 (only the product
///   enters the equations, so only the product is configured)
/// - `lambda0`: probe transition wavelength, m
#[derive(Debug, Clone, Serialize)]
pub struct MediumBeamConfig {
    omega0: f64,
    beam_radius: f64,
    g2n: f64,
    lambda0: f64,
    profile: ControlProfile,
}

impl MediumBeamConfig {
    /// Gaussian control beam: Omega(r) = omega0 * exp(-r^2/(2 a^2)).
    pub fn gaussian(omega0: f64, beam_radius: f64, g2n: f64, lambda0: f64) -> Result<Self> {
        let profile = ControlProfile::gaussian(omega0, beam_radius)?;
        Self::with_profile(beam_radius, g2n, lambda0, profile)
    }

    /// Any strictly positive radial profile; omega0 is taken from profile(0).
    pub fn with_profile(
        beam_radius: f64,
        g2n: f64,
        lambda0: f64,
        profile: ControlProfile,
    ) -> Result<Self> {
        let omega0 = profile.peak();
        for (name, v) in [
            ("omega0", omega0),
            ("beam_radius_m", beam_radius),
            ("g2N_s2", g2n),
            ("lambda0_m", lambda0),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SlowlightError::InvalidConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self { omega0, beam_radius, g2n, lambda0, profile })
    }

    /// The paper's example system: Omega0 = 1e8 s^-1, a = 50 um,
    /// g^2 N = 1e22 s^-2, lambda = 780 nm, Gaussian beam.
    pub fn paper_defaults() -> Self {
        Self::gaussian(1e8, 50e-6, 1e22, 780e-9).expect("default constants are valid")
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn beam_radius(&self) -> f64 {
        self.beam_radius
    }

    pub fn g2n(&self) -> f64 {
        self.g2n
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn profile(&self) -> &ControlProfile {
        &self.profile
    }

    /// Probe carrier wavenumber k0 = 2 pi / lambda0, m^-1.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.lambda0
    }

    /// Control Rabi frequency at radius r, guarded by the underflow floor.
    pub fn rabi(&self, r: f64) -> Result<f64> {
        let omega = self.profile.evaluate(r);
        let floor = OMEGA_FLOOR_FRACTION * self.omega0;
        if omega < floor {
            return Err(SlowlightError::ProfileZero { r, omega, floor });
        }
        Ok(omega)
    }

    /// Effective radial potential V(r) = -2 k0 g^2 N delta / (c Omega(r)^2), m^-2.
    ///
    /// For delta < 0 this is positive, equals the well floor
    /// 2 k0 g^2 N |delta| / (c Omega0^2) at r = 0, and is non-decreasing in r
    /// for any non-increasing profile.
    pub fn potential(&self, delta: Detuning, r: f64) -> Result<f64> {
        let omega = self.rabi(r)?;
        Ok(-2.0 * self.wavenumber() * self.g2n * delta.s_inv()
            / (SPEED_OF_LIGHT * omega * omega))
    }

    /// Well-floor constant V0 = potential at r = 0, m^-2.
    pub fn well_floor(&self, delta: Detuning) -> f64 {
        -2.0 * self.wavenumber() * self.g2n * delta.s_inv()
            / (SPEED_OF_LIGHT * self.omega0 * self.omega0)
    }

    /// Group velocity with the transverse profile neglected:
    /// c / (1 + g^2 N / Omega0^2), m/s. Upper bound for every mode velocity.
    pub fn transverse_free_vg(&self) -> f64 {
        SPEED_OF_LIGHT / (1.0 + self.g2n / (self.omega0 * self.omega0))
    }

    /// Same medium with the control-beam width set to `a` (the profile is
    /// rescaled radially, preserving its shape).
    pub fn with_beam_radius(&self, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(SlowlightError::InvalidConfig(format!(
                "beam radius must be positive, got {a}"
            )));
        }
        let factor = a / self.beam_radius;
        Ok(Self {
            omega0: self.omega0,
            beam_radius: a,
            g2n: self.g2n,
            lambda0: self.lambda0,
            profile: self.profile.rescaled(factor),
        })
    }

    /// FNV-1a 64 hash of the canonical parameter rendering; identifies the
    /// basis a mode expansion was computed against.
    pub fn content_hash(&self) -> String {
        let mut s = format!(
            "omega0={:.17e};a={:.17e};g2n={:.17e};lambda0={:.17e};",
            self.omega0, self.beam_radius, self.g2n, self.lambda0
        );
        match &self.profile {
            ControlProfile::Gaussian { omega0, a } => {
                s.push_str(&format!("gaussian:{omega0:.17e}:{a:.17e}"));
            }
            ControlProfile::UserTable { r, omega, .. } => {
                s.push_str("table");
                for (x, o) in r.iter().zip(omega) {
                    s.push_str(&format!(":{x:.17e},{o:.17e}"));
                }
            }
        }
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in s.as_bytes() {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
        format!("{h:016x}")
    }
}

/// On-disk config schema: key-value TOML with an optional `[profile]` table.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    omega0_s: f64,
    beam_radius_m: f64,
    #[serde(rename = "g2N_s2")]
    g2n_s2: f64,
    lambda0_m: f64,
    profile: Option<ProfileFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    kind: String,
    table_path: Option<String>,
}

/// Load a config file (TOML): omega0_s, beam_radius_m, g2N_s2, lambda0_m and
/// an optional profile.kind of "gaussian" (default) or "user-table" with
/// profile.table_path pointing at a two-column CSV (r_m, omega_s) with header.
pub fn load_config(path: &Path) -> Result<MediumBeamConfig> {
    let text = std::fs::read_to_string(path)?;
    let raw: ConfigFile = toml::from_str(&text).map_err(|e| SlowlightError::Parse {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let kind = raw.profile.as_ref().map(|p| p.kind.as_str()).unwrap_or("gaussian");
    match kind {
        "gaussian" => MediumBeamConfig::gaussian(
            raw.omega0_s,
            raw.beam_radius_m,
            raw.g2n_s2,
            raw.lambda0_m,
        ),
        "user-table" => {
            let rel = raw
                .profile
                .as_ref()
                .and_then(|p| p.table_path.as_deref())
                .ok_or_else(|| SlowlightError::InvalidConfig(
                    "profile.kind = \"user-table\" requires profile.table_path".into(),
                ))?;
            // table paths resolve relative to the config file
            let table_path = path.parent().unwrap_or(Path::new(".")).join(rel);
            let (r, omega) = load_profile_table(&table_path)?;
            let profile = ControlProfile::user_table(r, omega)?;
            MediumBeamConfig::with_profile(raw.beam_radius_m, raw.g2n_s2, raw.lambda0_m, profile)
        }
        other => Err(SlowlightError::InvalidConfig(format!(
            "unknown profile.kind {other:?} (expected \"gaussian\" or \"user-table\")"
        ))),
    }
}

/// Two-column CSV (r_m, omega_s) with a header line.
fn load_profile_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let mut r = Vec::new();
    let mut omega = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 || line.trim().is_empty() {
            continue; // header
        }
        let mut cols = line.split(',');
        let parse = |field: Option<&str>| -> Result<f64> {
            field
                .map(str::trim)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| SlowlightError::Parse {
                    path: path.display().to_string(),
                    reason: format!("line {}: expected two numeric columns", lineno + 1),
                })
        };
        r.push(parse(cols.next())?);
        omega.push(parse(cols.next())?);
    }
    Ok((r, omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wavenumber_examples() {
        let cfg = MediumBeamConfig::paper_defaults();
        assert_relative_eq!(cfg.wavenumber(), 8.0553e6, max_relative = 1e-4);
        let unit = MediumBeamConfig::gaussian(1e8, 50e-6, 1e22, 2.0 * std::f64::consts::PI)
            .unwrap();
        assert_relative_eq!(unit.wavenumber(), 1.0, max_relative = 1e-15);
        let half = MediumBeamConfig::gaussian(1e8, 50e-6, 1e22, 390e-9).unwrap();
        assert_relative_eq!(half.wavenumber(), 2.0 * cfg.wavenumber(), max_relative = 1e-15);
    }

    #[test]
    fn potential_at_origin_is_well_floor() {
        let cfg = MediumBeamConfig::paper_defaults();
        let delta = Detuning(-1e6);
        let v0 = cfg.potential(delta, 0.0).unwrap();
        let expected = 2.0 * cfg.wavenumber() * cfg.g2n() * 1e6
            / (SPEED_OF_LIGHT * cfg.omega0() * cfg.omega0());
        assert_relative_eq!(v0, expected, max_relative = 1e-15);
        assert_relative_eq!(v0, cfg.well_floor(delta), max_relative = 1e-15);
    }

    #[test]
    fn potential_zero_detuning_vanishes() {
        let cfg = MediumBeamConfig::paper_defaults();
        for r in [0.0, 25e-6, 100e-6] {
            assert_eq!(cfg.potential(Detuning(0.0), r).unwrap(), 0.0);
        }
    }

    #[test]
    fn gaussian_potential_ratio_identity() {
        let cfg = MediumBeamConfig::paper_defaults();
        let delta = Detuning(-1e6);
        let a = cfg.beam_radius();
        let v0 = cfg.potential(delta, 0.0).unwrap();
        for r in [10e-6, 50e-6, 120e-6] {
            let v = cfg.potential(delta, r).unwrap();
            assert_relative_eq!(v / v0, (r * r / (a * a)).exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn transverse_free_vg_examples() {
        let cfg = MediumBeamConfig::paper_defaults();
        assert_relative_eq!(
            cfg.transverse_free_vg(),
            SPEED_OF_LIGHT / (1.0 + 1e6),
            max_relative = 1e-15
        );
        let empty = MediumBeamConfig::gaussian(1e8, 50e-6, f64::MIN_POSITIVE, 780e-9).unwrap();
        assert_relative_eq!(empty.transverse_free_vg(), SPEED_OF_LIGHT, max_relative = 1e-12);
        let quarter = MediumBeamConfig::gaussian(1e8, 50e-6, 3e16, 780e-9).unwrap();
        assert_relative_eq!(
            quarter.transverse_free_vg(),
            SPEED_OF_LIGHT / 4.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn profile_floor_is_diagnosed() {
        let cfg = MediumBeamConfig::paper_defaults();
        // exp(-r^2/(2a^2)) < 1e-12 for r > a*sqrt(2 ln 1e12) ~ 7.43a
        let err = cfg.potential(Detuning(-1e6), 50e-6 * 8.0).unwrap_err();
        assert!(matches!(err, SlowlightError::ProfileZero { .. }));
    }

    #[test]
    fn detuning_sign_gate() {
        assert!(Detuning(-1.0).require_negative().is_ok());
        assert!(Detuning(0.0).require_negative().is_err());
        assert!(Detuning(1e6).require_negative().is_err());
        assert!(Detuning(f64::NAN).require_negative().is_err());
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(MediumBeamConfig::gaussian(0.0, 50e-6, 1e22, 780e-9).is_err());
        assert!(MediumBeamConfig::gaussian(1e8, -1.0, 1e22, 780e-9).is_err());
        assert!(MediumBeamConfig::gaussian(1e8, 50e-6, 0.0, 780e-9).is_err());
        assert!(MediumBeamConfig::gaussian(1e8, 50e-6, 1e22, 0.0).is_err());
    }
}
