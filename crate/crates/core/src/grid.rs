//! Uniform one-dimensional transverse lattice.
//!
//! Every continuum integral is replaced by a Riemann sum with uniform weight
//! `dx`, so the discrete integral of a constant `c` is exactly `c * n * dx`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform lattice of `n` transverse sample points spaced `dx` apart and
/// centered on `center` (all lengths in meters).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    dx: f64,
    center: f64,
}

impl Grid {
    pub fn new(n: usize, dx: f64, center: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::validation("grid.n", format!("need at least 2 points, got {n}")));
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::validation("grid.dx", format!("spacing must be positive, got {dx}")));
        }
        if !center.is_finite() {
            return Err(Error::validation("grid.center", "must be finite"));
        }
        Ok(Grid { n, dx, center })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// Coordinate of lattice point `i`.
    pub fn point(&self, i: usize) -> f64 {
        self.center + (i as f64 - (self.n as f64 - 1.0) / 2.0) * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Full extent `n * dx` covered by the lattice cells.
    pub fn width(&self) -> f64 {
        self.n as f64 * self.dx
    }

    /// Index of the lattice point nearest `x`; exact ties go to the lower index.
    pub fn nearest_index(&self, x: f64) -> Result<usize> {
        let first = self.point(0);
        let last = self.point(self.n - 1);
        let slack = 1e-9 * self.dx;
        if !x.is_finite() || x < first - 0.5 * self.dx - slack || x > last + 0.5 * self.dx + slack {
            return Err(Error::validation(
                "position",
                format!("{x} lies outside the lattice [{first}, {last}] +/- dx/2"),
            ));
        }
        let t = (x - first) / self.dx;
        let i = (t - 0.5).ceil().max(0.0) as usize;
        Ok(i.min(self.n - 1))
    }

    /// Discrete integral of sampled values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.dx
    }

    /// True when two grids describe the same lattice to round-off.
    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx
            && (self.center - other.center).abs() <= 1e-12 * self.dx.max(self.center.abs())
    }
}

pub(crate) fn ensure_same(a: &Grid, b: &Grid, what: &str) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "{what}: ({} pts, dx {}, center {}) vs ({} pts, dx {}, center {})",
            a.n, a.dx, a.center, b.n, b.dx, b.center
        )))
    }
}
