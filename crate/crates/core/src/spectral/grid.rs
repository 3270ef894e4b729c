use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform periodic grid on `[0, 2π)^d` with spectral bookkeeping.
///
/// Nodes are stored row-major: axis 0 (x₁) varies slowest. Wavenumbers per
/// axis are `{-n/2+1, ..., n/2}`; index `i` maps to `i` for `i <= n/2` and
/// `i - n` above.
pub struct TorusGrid {
    dim: usize,
    n: usize,
    axis_wavenumbers: Vec<i64>,
    dealias_mask: Vec<bool>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n
    }
}

pub const AXIS_LENGTH: f64 = 2.0 * PI;

/// Build a grid with `n` points per axis in `d` dimensions.
pub fn make_grid(d: usize, n: usize) -> Result<Arc<TorusGrid>> {
    TorusGrid::new(d, n).map(Arc::new)
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and >= 8, got {n}"
            )));
        }
        let axis_wavenumbers: Vec<i64> = (0..n)
            .map(|i| {
                if i <= n / 2 {
                    i as i64
                } else {
                    i as i64 - n as i64
                }
            })
            .collect();
        let cutoff = n as f64 / 3.0;
        let total = n.pow(dim as u32);
        let mut dealias_mask = Vec::with_capacity(total);
        for flat in 0..total {
            let keep = (0..dim).all(|a| {
                let i = axis_index(flat, a, dim, n);
                (axis_wavenumbers[i].abs() as f64) <= cutoff
            });
            dealias_mask.push(keep);
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            dim,
            n,
            axis_wavenumbers,
            dealias_mask,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        AXIS_LENGTH / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        AXIS_LENGTH.powi(self.dim as i32)
    }

    pub fn nyquist(&self) -> i64 {
        (self.n / 2) as i64
    }

    /// Index along `axis` of the node/mode with flat index `flat`.
    pub fn axis_index(&self, flat: usize, axis: usize) -> usize {
        axis_index(flat, axis, self.dim, self.n)
    }

    /// Wavenumber along `axis` of the mode with flat index `flat`.
    pub fn wavenumber(&self, flat: usize, axis: usize) -> i64 {
        self.axis_wavenumbers[self.axis_index(flat, axis)]
    }

    /// Integer wavenumber vector of a mode (unused axes are 0).
    pub fn wavevector(&self, flat: usize) -> [i64; 3] {
        let mut k = [0; 3];
        for (a, slot) in k.iter_mut().enumerate().take(self.dim) {
            *slot = self.wavenumber(flat, a);
        }
        k
    }

    pub fn k_squared(&self, flat: usize) -> f64 {
        (0..self.dim)
            .map(|a| (self.wavenumber(flat, a) as f64).powi(2))
            .sum()
    }

    pub fn dealias_mask(&self) -> &[bool] {
        &self.dealias_mask
    }

    /// Coordinate of node `flat` along `axis`.
    pub fn coordinate(&self, flat: usize, axis: usize) -> f64 {
        self.axis_index(flat, axis) as f64 * self.spacing()
    }

    pub fn coordinates(&self, flat: usize) -> [f64; 3] {
        let mut x = [0.0; 3];
        for (a, slot) in x.iter_mut().enumerate().take(self.dim) {
            *slot = self.coordinate(flat, a);
        }
        x
    }

    /// In-place unnormalised multidimensional transform.
    pub(crate) fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let plan = if inverse {
            &self.inverse
        } else {
            &self.forward
        };
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let block = stride * n;
            for outer in (0..data.len()).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = data[base + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (j, v) in line.iter().enumerate() {
                        data[base + j * stride] = *v;
                    }
                }
            }
        }
    }
}

fn axis_index(flat: usize, axis: usize, dim: usize, n: usize) -> usize {
    (flat / n.pow((dim - 1 - axis) as u32)) % n
}
