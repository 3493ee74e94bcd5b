//! Uniform radial grid with the per-channel boundary conventions.

use serde::Serialize;

use crate::error::{Result, SlowlightError};

/// Minimum number of radial points accepted by the discretization.
pub const MIN_POINTS: usize = 200;

/// Uniform discretization of r in (0, R].
///
/// Nodes sit at r_j = j * dr for j = 1..=n_points with R = n_points * dr.
/// r = 0 is handled by the channel's small-r convention and r = R by a
/// Dirichlet wall, so the eigensystem unknowns are j = 1..n_points-1 and the
/// stored sample at r = R is exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGrid {
    n_points: usize,
    dr: f64,
    m_channel: i32,
}

impl RadialGrid {
    pub fn new(n_points: usize, dr: f64, m_channel: i32) -> Result<Self> {
        if n_points < MIN_POINTS {
            return Err(SlowlightError::InvalidConfig(format!(
                "radial grid needs at least {MIN_POINTS} points, got {n_points}"
            )));
        }
        if !(dr > 0.0) || !dr.is_finite() {
            return Err(SlowlightError::InvalidConfig(format!(
                "radial spacing must be positive, got {dr}"
            )));
        }
        Ok(Self { n_points, dr, m_channel })
    }

    /// Grid with a prescribed truncation radius R = n_points * dr.
    pub fn with_radius(n_points: usize, r_max: f64, m_channel: i32) -> Result<Self> {
        Self::new(n_points, r_max / n_points as f64, m_channel)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    /// Truncation radius R, m.
    pub fn r_max(&self) -> f64 {
        self.n_points as f64 * self.dr
    }

    pub fn m_channel(&self) -> i32 {
        self.m_channel
    }

    /// Radius of node j (1-based).
    pub fn r_at(&self, j: usize) -> f64 {
        j as f64 * self.dr
    }

    /// All node radii r_1..r_{n_points}.
    pub fn radii(&self) -> Vec<f64> {
        (1..=self.n_points).map(|j| self.r_at(j)).collect()
    }

    /// Composite trapezoid of sampled node values against weight r:
    /// integral of r * f(r) dr over [0, R], with f(0) entering only through
    /// the vanishing r factor and f(R) = samples[n_points-1].
    pub fn integrate_r_weighted(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.n_points);
        let mut acc = 0.0;
        for (j, &f) in samples.iter().enumerate() {
            let w = if j + 1 == self.n_points { 0.5 } else { 1.0 };
            acc += w * self.r_at(j + 1) * f;
        }
        acc * self.dr
    }
}
