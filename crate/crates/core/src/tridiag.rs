//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for selected
//! eigenvalues, inverse iteration for eigenvectors.
//!
//! Deterministic and selective; never forms a dense matrix, so grids of 1e4
//! points stay cheap.

use crate::error::{Result, SlowlightError};

/// Symmetric tridiagonal matrix: main diagonal `diag` (n entries) and
/// sub/super-diagonal `off` (n-1 entries).
#[derive(Debug, Clone)]
pub struct SymmetricTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymmetricTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length mismatch");
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Infinity-norm scale used for pivot and convergence thresholds.
    fn scale(&self) -> f64 {
        let mut s = 0.0_f64;
        for i in 0..self.len() {
            let e_l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let e_r = if i < self.off.len() { self.off[i].abs() } else { 0.0 };
            s = s.max(self.diag[i].abs() + e_l + e_r);
        }
        s.max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `lambda` (Sturm sequence via the
    /// LDL^T pivots; the count of negative pivots).
    pub fn count_below(&self, lambda: f64) -> usize {
        let guard = f64::MIN_POSITIVE.max(f64::EPSILON * self.scale() * 1e-6);
        let mut count = 0;
        let mut q = self.diag[0] - lambda;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let q_safe = if q.abs() < guard {
                if q >= 0.0 { guard } else { -guard }
            } else {
                q
            };
            q = (self.diag[i] - lambda) - self.off[i - 1] * self.off[i - 1] / q_safe;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn spectrum_bounds(&self) -> (f64, f64) {
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for i in 0..self.len() {
            let e_l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let e_r = if i < self.off.len() { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - e_l - e_r);
            hi = hi.max(self.diag[i] + e_l + e_r);
        }
        let pad = (hi - lo).abs() * f64::EPSILON + f64::MIN_POSITIVE;
        (lo - pad, hi + pad)
    }

    /// The `count` smallest eigenvalues, ascending, by bisection on the Sturm
    /// count. Converges to machine precision for well-separated eigenvalues.
    pub fn lowest_eigenvalues(&self, count: usize) -> Vec<f64> {
        let n = self.len();
        let count = count.min(n);
        let (lo0, hi0) = self.spectrum_bounds();
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            // previously found eigenvalue is a valid lower bracket for the next
            let mut a = if k == 0 { lo0 } else { out[k - 1] };
            let mut b = hi0;
            for _ in 0..160 {
                let mid = 0.5 * (a + b);
                if (b - a) <= 2.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
                    break;
                }
                if self.count_below(mid) <= k {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            out.push(0.5 * (a + b));
        }
        out
    }

    /// Eigenvector for an eigenvalue estimate, by inverse iteration on the
    /// shifted matrix with partial pivoting. Returns a unit 2-norm vector with
    /// deterministic start, or an error when the residual refuses to drop.
    pub fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>> {
        let n = self.len();
        let scale = self.scale();
        // nudge the shift off exact singularity
        let shift = lambda + scale * f64::EPSILON * 4.0;
        let lu = FactorizedShift::new(self, shift);

        let mut v = vec![1.0; n];
        normalize(&mut v);
        let mut converged = false;
        for _ in 0..12 {
            let prev = v.clone();
            lu.solve_in_place(&mut v);
            normalize(&mut v);
            // sign-align with the previous iterate to measure the change
            let dot: f64 = v.iter().zip(&prev).map(|(a, b)| a * b).sum();
            if dot < 0.0 {
                for x in v.iter_mut() {
                    *x = -*x;
                }
            }
            let change: f64 = v
                .iter()
                .zip(&prev)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if change < 1e-15 {
                converged = true;
                break;
            }
        }
        let residual = self.residual_norm(&v, lambda);
        if !converged && residual > 1e-8 * scale {
            return Err(SlowlightError::ConvergenceFailed {
                m: 0,
                n: 0,
                reason: format!(
                    "inverse iteration stalled: residual {residual:.3e} vs scale {scale:.3e}"
                ),
            });
        }
        Ok(v)
    }

    /// || (T - lambda I) v ||_2 for a unit vector v.
    fn residual_norm(&self, v: &[f64], lambda: f64) -> f64 {
        let n = self.len();
        let mut acc = 0.0;
        for i in 0..n {
            let mut y = (self.diag[i] - lambda) * v[i];
            if i > 0 {
                y += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                y += self.off[i] * v[i + 1];
            }
            acc += y * y;
        }
        acc.sqrt()
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// LU factorization of (T - shift I) with partial pivoting; tridiagonal plus
/// one fill-in superdiagonal.
struct FactorizedShift {
    lower: Vec<f64>,   // multipliers
    d0: Vec<f64>,      // U main diagonal
    d1: Vec<f64>,      // U first superdiagonal
    d2: Vec<f64>,      // U second superdiagonal (pivot fill-in)
    swapped: Vec<bool>,
}

impl FactorizedShift {
    fn new(t: &SymmetricTridiagonal, shift: f64) -> Self {
        let n = t.len();
        let mut d0: Vec<f64> = (0..n).map(|i| t.diag[i] - shift).collect();
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        for i in 0..n - 1 {
            d1[i] = t.off[i];
        }
        let mut lower = vec![0.0; n];
        let mut swapped = vec![false; n];
        let tiny = f64::MIN_POSITIVE / f64::EPSILON;
        for i in 0..n - 1 {
            let sub = t.off[i];
            if sub.abs() > d0[i].abs() {
                // swap row i with row i+1
                swapped[i] = true;
                let (a, b, c) = (d0[i], d1[i], d2[i]);
                d0[i] = sub;
                d1[i] = d0[i + 1];
                d2[i] = d1[i + 1];
                d0[i + 1] = b - (a / sub) * d1[i];
                d1[i + 1] = c - (a / sub) * d2[i];
                lower[i] = a / sub;
            } else {
                let piv = if d0[i].abs() < tiny {
                    if d0[i] >= 0.0 { tiny } else { -tiny }
                } else {
                    d0[i]
                };
                let mult = sub / piv;
                lower[i] = mult;
                d0[i + 1] -= mult * d1[i];
                d1[i + 1] -= mult * d2[i];
            }
        }
        if d0[n - 1].abs() < tiny {
            d0[n - 1] = if d0[n - 1] >= 0.0 { tiny } else { -tiny };
        }
        Self { lower, d0, d1, d2, swapped }
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let n = b.len();
        // forward pass mirroring the pivoted elimination
        for i in 0..n - 1 {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.lower[i] * b[i];
        }
        // back substitution
        for i in (0..n).rev() {
            let mut x = b[i];
            if i + 1 < n {
                x -= self.d1[i] * b[i + 1];
            }
            if i + 2 < n {
                x -= self.d2[i] * b[i + 2];
            }
            b[i] = x / self.d0[i];
        }
        // keep iterates finite even for a nearly singular shift
        let max = b.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if !max.is_finite() {
            for x in b.iter_mut() {
                if !x.is_finite() {
                    *x = 0.0;
                }
            }
        }
    }
}
