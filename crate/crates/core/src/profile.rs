//! Radial shape of the control-beam Rabi frequency.

use serde::Serialize;

use crate::error::{Result, SlowlightError};

/// Radial profile Omega(r) of the control beam, in s^-1.
///
/// The Gaussian kind evaluates Omega0 * exp(-r^2 / (2 a^2)) exactly. A user
/// table is strictly positive, defined on [0, R_table], interpolated with a
/// monotone cubic (Fritsch–Carlson), and clamps to its last value beyond
/// R_table.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ControlProfile {
    Gaussian {
        /// Peak Rabi frequency Omega0, s^-1.
        omega0: f64,
        /// Beam width a, m.
        a: f64,
    },
    UserTable {
        /// Sample radii, m; strictly increasing, starting at 0.
        r: Vec<f64>,
        /// Rabi frequencies at the sample radii, s^-1; strictly positive.
        omega: Vec<f64>,
        /// Interpolant slopes; rebuilt on construction.
        #[serde(skip)]
        slopes: Vec<f64>,
    },
}

impl ControlProfile {
    pub fn gaussian(omega0: f64, a: f64) -> Result<Self> {
        if !(omega0 > 0.0) || !(a > 0.0) {
            return Err(SlowlightError::InvalidConfig(format!(
                "gaussian profile needs omega0 > 0 and a > 0, got omega0={omega0}, a={a}"
            )));
        }
        Ok(ControlProfile::Gaussian { omega0, a })
    }

    /// Build a table profile from (r, omega) samples.
    pub fn user_table(r: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        if r.len() != omega.len() || r.len() < 2 {
            return Err(SlowlightError::InvalidConfig(
                "profile table needs at least two (r, omega) rows".into(),
            ));
        }
        if r[0] != 0.0 {
            return Err(SlowlightError::InvalidConfig(
                "profile table must start at r = 0".into(),
            ));
        }
        if !r.windows(2).all(|w| w[1] > w[0]) {
            return Err(SlowlightError::InvalidConfig(
                "profile table radii must be strictly increasing".into(),
            ));
        }
        if !omega.iter().all(|&o| o > 0.0 && o.is_finite()) {
            return Err(SlowlightError::InvalidConfig(
                "profile table Rabi frequencies must be strictly positive".into(),
            ));
        }
        let slopes = fritsch_carlson_slopes(&r, &omega);
        Ok(ControlProfile::UserTable { r, omega, slopes })
    }

    /// Omega(0), the peak value used as the configuration's omega0.
    pub fn peak(&self) -> f64 {
        match self {
            ControlProfile::Gaussian { omega0, .. } => *omega0,
            ControlProfile::UserTable { omega, .. } => omega[0],
        }
    }

    /// Evaluate Omega(r) for r >= 0.
    pub fn evaluate(&self, r: f64) -> f64 {
        match self {
            ControlProfile::Gaussian { omega0, a } => omega0 * (-r * r / (2.0 * a * a)).exp(),
            ControlProfile::UserTable { r: xs, omega, slopes } => {
                if r <= 0.0 {
                    return omega[0];
                }
                if r >= *xs.last().unwrap() {
                    return *omega.last().unwrap();
                }
                let k = match xs.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
                    Ok(i) => return omega[i],
                    Err(i) => i - 1,
                };
                let h = xs[k + 1] - xs[k];
                let t = (r - xs[k]) / h;
                let (y0, y1) = (omega[k], omega[k + 1]);
                let (d0, d1) = (slopes[k], slopes[k + 1]);
                // cubic Hermite basis
                let t2 = t * t;
                let t3 = t2 * t;
                y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
                    + d0 * h * (t3 - 2.0 * t2 + t)
                    + y1 * (-2.0 * t3 + 3.0 * t2)
                    + d1 * h * (t3 - t2)
            }
        }
    }

    /// Same shape with every radius scaled by `factor` (wider beam for
    /// factor > 1); used by the beam-size sweep.
    pub fn rescaled(&self, factor: f64) -> Self {
        match self {
            ControlProfile::Gaussian { omega0, a } => ControlProfile::Gaussian {
                omega0: *omega0,
                a: a * factor,
            },
            ControlProfile::UserTable { r, omega, slopes } => ControlProfile::UserTable {
                r: r.iter().map(|x| x * factor).collect(),
                omega: omega.clone(),
                slopes: slopes.iter().map(|s| s / factor).collect(),
            },
        }
    }

    /// Characteristic width, m: the Gaussian `a`, or the table extent for
    /// user profiles (used only for truncation-window defaults).
    pub fn width(&self) -> f64 {
        match self {
            ControlProfile::Gaussian { a, .. } => *a,
            ControlProfile::UserTable { r, .. } => *r.last().unwrap() / 3.0,
        }
    }
}

/// Monotone cubic slopes (Fritsch–Carlson). Preserves monotone segments and
/// never overshoots, so a positive table interpolates positively.
fn fritsch_carlson_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut delta = vec![0.0; n - 1];
    for i in 0..n - 1 {
        delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    }
    let mut d = vec![0.0; n];
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            d[i] = 0.0;
        } else {
            // harmonic mean weighted by interval widths
            let w1 = 2.0 * (x[i + 1] - x[i]) + (x[i] - x[i - 1]);
            let w2 = (x[i + 1] - x[i]) + 2.0 * (x[i] - x[i - 1]);
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    // clamp endpoint slopes to keep the first/last segments monotone
    for (i, seg) in [(0usize, 0usize), (n - 1, n - 2)] {
        if d[i] * delta[seg] < 0.0 {
            d[i] = 0.0;
        } else if delta[seg] != 0.0 && (d[i] / delta[seg]).abs() > 3.0 {
            d[i] = 3.0 * delta[seg];
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_matches_closed_form() {
        let p = ControlProfile::gaussian(1e8, 50e-6).unwrap();
        assert_eq!(p.evaluate(0.0), 1e8);
        let r = 75e-6;
        assert_relative_eq!(
            p.evaluate(r),
            1e8 * (-r * r / (2.0 * 50e-6_f64.powi(2))).exp(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn table_interpolates_and_clamps() {
        let r: Vec<f64> = (0..=10).map(|i| i as f64 * 1e-5).collect();
        let om: Vec<f64> = r.iter().map(|&x| 1e8 * (-x * x / 2e-9).exp()).collect();
        let p = ControlProfile::user_table(r.clone(), om.clone()).unwrap();
        // exact at nodes
        for (x, o) in r.iter().zip(&om) {
            assert_relative_eq!(p.evaluate(*x), *o, max_relative = 1e-12);
        }
        // clamps beyond the table
        assert_eq!(p.evaluate(1.0), *om.last().unwrap());
        // stays positive between nodes of a decaying table
        for i in 0..200 {
            let x = i as f64 * 5.5e-7;
            assert!(p.evaluate(x) > 0.0, "negative interpolant at {x}");
        }
    }

    #[test]
    fn table_rejects_nonpositive_and_unsorted() {
        assert!(ControlProfile::user_table(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
        assert!(ControlProfile::user_table(vec![0.0, 2.0, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(ControlProfile::user_table(vec![1e-6, 2e-6], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn rescaled_gaussian_shifts_width() {
        let p = ControlProfile::gaussian(1e8, 50e-6).unwrap();
        let q = p.rescaled(2.0);
        assert_relative_eq!(q.evaluate(100e-6), p.evaluate(50e-6), max_relative = 1e-14);
    }
}
