//! Complex transverse field samples on a square Cartesian grid, with the
//! binary interchange format shared by the decomposition front-end and the
//! propagation oracle.
//!
//! File layout: magic `SLF2`, little-endian u32 header length, a JSON header
//! carrying (n, extent_m, center_m, dtype, layout), then n*n complex samples
//! as interleaved little-endian f64 pairs (re, im), row-major with y as the
//! slow index and x as the fast one.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SlowlightError};

const MAGIC: &[u8; 4] = b"SLF2";

/// Complex field sample grid. `extent` is the physical half-width, m; sample
/// (ix, iy) sits at x = (ix - n/2) dx + cx, y = (iy - n/2) dx + cy with
/// dx = 2 extent / n, stored at index iy * n + ix.
#[derive(Debug, Clone)]
pub struct Field2D {
    n: usize,
    extent: f64,
    center: (f64, f64),
    pub values: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct FieldHeader {
    format: String,
    version: u32,
    n: usize,
    extent_m: f64,
    center_m: [f64; 2],
    dtype: String,
    layout: String,
}

impl Field2D {
    pub fn zeros(n: usize, extent: f64) -> Result<Self> {
        if !n.is_power_of_two() || n < 2 {
            return Err(SlowlightError::InvalidConfig(format!(
                "field grid size must be a power of two, got {n}"
            )));
        }
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(SlowlightError::InvalidConfig(format!(
                "field extent must be positive, got {extent}"
            )));
        }
        Ok(Self { n, extent, center: (0.0, 0.0), values: vec![Complex64::new(0.0, 0.0); n * n] })
    }

    /// Fill from a function of beam-centered coordinates (x, y).
    pub fn from_fn<F>(n: usize, extent: f64, mut f: F) -> Result<Self>
    where
        F: FnMut(f64, f64) -> Complex64,
    {
        let mut field = Self::zeros(n, extent)?;
        let dx = field.dx();
        let half = (n / 2) as isize;
        for iy in 0..n {
            let y = (iy as isize - half) as f64 * dx;
            for ix in 0..n {
                let x = (ix as isize - half) as f64 * dx;
                field.values[iy * n + ix] = f(x, y);
            }
        }
        Ok(field)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn center(&self) -> (f64, f64) {
        self.center
    }

    /// Grid spacing, m.
    pub fn dx(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    /// Beam-centered coordinate of column/row index i.
    pub fn coord(&self, i: usize) -> f64 {
        (i as isize - (self.n / 2) as isize) as f64 * self.dx()
    }

    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[iy * self.n + ix]
    }

    /// Sample at the beam axis (the exact grid-center pixel).
    pub fn on_axis(&self) -> Complex64 {
        self.at(self.n / 2, self.n / 2)
    }

    /// Total power: integral of |E|^2 dx dy.
    pub fn power(&self) -> f64 {
        let cell = self.dx() * self.dx();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * cell
    }

    /// Power-weighted rms radius about the beam axis, m.
    pub fn rms_radius(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for iy in 0..self.n {
            let y = self.coord(iy);
            for ix in 0..self.n {
                let x = self.coord(ix);
                let p = self.at(ix, iy).norm_sqr();
                num += (x * x + y * y) * p;
                den += p;
            }
        }
        if den == 0.0 { 0.0 } else { (num / den).sqrt() }
    }

    /// Normalized overlap correlation |<self, other>| / (||self|| ||other||).
    pub fn overlap(&self, other: &Field2D) -> f64 {
        let mut dot = Complex64::new(0.0, 0.0);
        let mut na = 0.0;
        let mut nb = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            dot += a.conj() * b;
            na += a.norm_sqr();
            nb += b.norm_sqr();
        }
        if na == 0.0 || nb == 0.0 { 0.0 } else { dot.norm() / (na * nb).sqrt() }
    }

    /// Complex inner product <self, other> including the cell area.
    pub fn inner_product(&self, other: &Field2D) -> Complex64 {
        let cell = self.dx() * self.dx();
        let mut dot = Complex64::new(0.0, 0.0);
        for (a, b) in self.values.iter().zip(&other.values) {
            dot += a.conj() * b;
        }
        dot * cell
    }

    /// Fraction of the power outside the largest inscribed circle.
    pub fn power_outside_inscribed(&self) -> f64 {
        let r_in = self.extent - self.dx();
        let r_in2 = r_in * r_in;
        let mut outside = 0.0;
        let mut total = 0.0;
        for iy in 0..self.n {
            let y = self.coord(iy);
            for ix in 0..self.n {
                let x = self.coord(ix);
                let p = self.at(ix, iy).norm_sqr();
                total += p;
                if x * x + y * y > r_in2 {
                    outside += p;
                }
            }
        }
        if total == 0.0 { 0.0 } else { outside / total }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let header = FieldHeader {
            format: "slowlight-field2d".into(),
            version: 1,
            n: self.n,
            extent_m: self.extent,
            center_m: [self.center.0, self.center.1],
            dtype: "complex128-le".into(),
            layout: "row-major-y-slow".into(),
        };
        let header_bytes = serde_json::to_vec(&header).expect("header serializes");
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&(header_bytes.len() as u32).to_le_bytes())?;
        w.write_all(&header_bytes)?;
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let parse_err = |reason: &str| SlowlightError::Parse {
            path: path.display().to_string(),
            reason: reason.to_string(),
        };
        let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(parse_err("not a slowlight field file (bad magic)"));
        }
        let mut len_bytes = [0u8; 4];
        r.read_exact(&mut len_bytes)?;
        let header_len = u32::from_le_bytes(len_bytes) as usize;
        if header_len > 1 << 20 {
            return Err(parse_err("unreasonable header length"));
        }
        let mut header_bytes = vec![0u8; header_len];
        r.read_exact(&mut header_bytes)?;
        let header: FieldHeader = serde_json::from_slice(&header_bytes)
            .map_err(|e| parse_err(&format!("bad JSON header: {e}")))?;
        if header.dtype != "complex128-le" {
            return Err(parse_err(&format!("unsupported dtype {:?}", header.dtype)));
        }
        let mut field = Self::zeros(header.n, header.extent_m)?;
        field.center = (header.center_m[0], header.center_m[1]);
        let mut buf = vec![0u8; header.n * header.n * 16];
        r.read_exact(&mut buf)?;
        for (i, chunk) in buf.chunks_exact(16).enumerate() {
            let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
            let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
            field.values[i] = Complex64::new(re, im);
        }
        Ok(field)
    }
}

/// Cubic interpolation of radial mode samples (r_j = (j+1) dr), with the
/// channel's small-r behavior below the first node and zero beyond R.
pub struct RadialSampler<'a> {
    values: &'a [f64],
    dr: f64,
    m_abs: u32,
}

impl<'a> RadialSampler<'a> {
    pub fn new(values: &'a [f64], dr: f64, m: i32) -> Self {
        Self { values, dr, m_abs: m.unsigned_abs() }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let v = self.values;
        let n = v.len();
        let dr = self.dr;
        if r >= n as f64 * dr {
            return 0.0;
        }
        if r < dr {
            // below the first sample: psi ~ A + B r^2 for m = 0 (regular,
            // psi'(0) = 0), psi ~ r^|m| otherwise
            if self.m_abs == 0 {
                if n < 2 {
                    return v[0];
                }
                let (r1, r2) = (dr, 2.0 * dr);
                let b = (v[1] - v[0]) / (r2 * r2 - r1 * r1);
                let a = v[0] - b * r1 * r1;
                return a + b * r * r;
            }
            return v[0] * (r / dr).powi(self.m_abs as i32);
        }
        // cubic Hermite with central-difference slopes on nodes k..k+1
        let t_full = r / dr - 1.0;
        let k = (t_full.floor() as usize).min(n - 2);
        let t = t_full - k as f64;
        let y0 = v[k];
        let y1 = v[k + 1];
        let d0 = if k == 0 { (v[1] - v[0]) / dr } else { (v[k + 1] - v[k - 1]) / (2.0 * dr) };
        let d1 = if k + 2 < n { (v[k + 2] - v[k]) / (2.0 * dr) } else { (v[k + 1] - v[k]) / dr };
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + d0 * dr * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * dr * (t3 - t2)
    }
}

/// Sample a radial mode onto a Cartesian grid as psi(r) e^{i m theta} scaled
/// by `amplitude`; the unit-power convention divides by sqrt(2 pi).
pub fn synthesize_mode_field(
    mode: &crate::eigensolver::TransverseMode,
    amplitude: Complex64,
    n: usize,
    extent: f64,
) -> Result<Field2D> {
    let sampler = RadialSampler::new(&mode.psi, mode.grid.dr(), mode.m);
    let m = mode.m;
    let scale = amplitude / (2.0 * std::f64::consts::PI).sqrt();
    Field2D::from_fn(n, extent, |x, y| {
        let r = (x * x + y * y).sqrt();
        let psi = sampler.eval(r);
        if m == 0 {
            scale * psi
        } else {
            let theta = y.atan2(x);
            scale * psi * Complex64::new(0.0, m as f64 * theta).exp()
        }
    })
}
