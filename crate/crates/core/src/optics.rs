//! Discrete impulse-response kernels for linear optical systems.
//!
//! A [`Kernel`] stores `H[x_out, x_in]` in units of 1/length. Applying it to a
//! sampled field uses the input quadrature weight, `out = H * f * dx_in`, so
//! thin (diagonal) elements carry a `1/dx` factor and reproduce pointwise
//! multiplication exactly.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ensure_same, Grid};

pub type CMatrix = DMatrix<Complex64>;

/// Linear optical system sampled between two lattices.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    grid_in: Grid,
    grid_out: Grid,
    matrix: CMatrix,
}

impl Kernel {
    pub fn new(grid_in: Grid, grid_out: Grid, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != grid_out.n() || matrix.ncols() != grid_in.n() {
            return Err(Error::validation(
                "kernel",
                format!(
                    "matrix is {}x{}, grids need {}x{}",
                    matrix.nrows(),
                    matrix.ncols(),
                    grid_out.n(),
                    grid_in.n()
                ),
            ));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation("kernel", "non-finite entry"));
        }
        Ok(Kernel {
            grid_in,
            grid_out,
            matrix,
        })
    }

    pub fn identity(grid: Grid) -> Self {
        let m = CMatrix::from_diagonal_element(grid.n(), grid.n(), Complex64::new(1.0 / grid.dx(), 0.0));
        Kernel {
            grid_in: grid,
            grid_out: grid,
            matrix: m,
        }
    }

    /// Fully absorbing system.
    pub fn zeros(grid_in: Grid, grid_out: Grid) -> Self {
        Kernel {
            grid_in,
            grid_out,
            matrix: CMatrix::zeros(grid_out.n(), grid_in.n()),
        }
    }

    pub fn grid_in(&self) -> &Grid {
        &self.grid_in
    }

    pub fn grid_out(&self) -> &Grid {
        &self.grid_out
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Output field `sum_x H(x1, x) f(x) dx`.
    pub fn apply(&self, field: &[Complex64]) -> Result<Vec<Complex64>> {
        if field.len() != self.grid_in.n() {
            return Err(Error::GridMismatch(format!(
                "field has {} samples, kernel input grid has {}",
                field.len(),
                self.grid_in.n()
            )));
        }
        let dx = self.grid_in.dx();
        let v = nalgebra::DVector::from_iterator(field.len(), field.iter().map(|z| z * dx));
        Ok((&self.matrix * v).iter().copied().collect())
    }
}

/// Catalogue of optical elements that can be sampled into a [`Kernel`].
#[derive(Clone, Debug, PartialEq)]
pub enum ElementSpec {
    Identity,
    /// Paraxial free-space propagation over `distance`.
    FreeSpace { distance: f64, wavelength: f64 },
    ThinLens { focal_length: f64, wavelength: f64 },
    /// Complex amplitude transmittance sampled on the lattice.
    Mask(Vec<Complex64>),
    /// Front-to-back focal-plane system of a lens with focal length `focal_length`.
    FourierSystem { focal_length: f64, wavelength: f64 },
    /// Raw `H` matrix in units of 1/length.
    Custom(CMatrix),
}

/// Weak point scatterer inside an inaccessible system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scatterer {
    pub position: f64,
    pub strength: Complex64,
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be positive and finite, got {v}")))
    }
}

fn nonzero(field: &str, v: f64) -> Result<()> {
    if v != 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be finite and non-zero, got {v}")))
    }
}

// exp(i 2 pi frac) with the integer part of `cycles` removed first.
fn cis_cycles(cycles: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * cycles.rem_euclid(1.0))
}

/// Sample an element into a kernel from `grid_in` to `grid_out`.
pub fn kernel_of(element: &ElementSpec, grid_in: &Grid, grid_out: &Grid) -> Result<Kernel> {
    let diagonal = |what: &str| ensure_same(grid_in, grid_out, &format!("{what} needs equal input and output grids"));
    let n_in = grid_in.n();
    let n_out = grid_out.n();
    let matrix = match element {
        ElementSpec::Identity => {
            diagonal("identity")?;
            return Ok(Kernel::identity(*grid_in));
        }
        ElementSpec::Mask(t) => {
            diagonal("mask")?;
            if t.len() != n_in {
                return Err(Error::validation(
                    "mask",
                    format!("transmittance has {} samples, grid has {n_in}", t.len()),
                ));
            }
            if let Some(bad) = t.iter().find(|z| !(z.norm() <= 1.0 + 1e-12)) {
                return Err(Error::validation("mask", format!("|t| must not exceed 1, found {bad}")));
            }
            let inv = 1.0 / grid_in.dx();
            CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n_in, t.iter().map(|z| z * inv)))
        }
        ElementSpec::ThinLens { focal_length, wavelength } => {
            diagonal("thin lens")?;
            nonzero("focal_length", *focal_length)?;
            positive("wavelength", *wavelength)?;
            let inv = 1.0 / grid_in.dx();
            let diag = (0..n_in).map(|i| {
                let x = grid_in.point(i);
                cis_cycles(-x * x / (2.0 * wavelength * focal_length)) * inv
            });
            CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n_in, diag))
        }
        ElementSpec::FreeSpace { distance, wavelength } => {
            positive("distance", *distance)?;
            positive("wavelength", *wavelength)?;
            let ld = wavelength * distance;
            let amp = Complex64::from_polar(1.0 / ld.sqrt(), -PI / 4.0) * cis_cycles(distance / wavelength);
            CMatrix::from_fn(n_out, n_in, |r, c| {
                let s = grid_out.point(r) - grid_in.point(c);
                amp * cis_cycles(s * s / (2.0 * ld))
            })
        }
        ElementSpec::FourierSystem { focal_length, wavelength } => {
            nonzero("focal_length", *focal_length)?;
            positive("wavelength", *wavelength)?;
            let lf = wavelength * focal_length;
            let amp = Complex64::from_polar(1.0 / lf.abs().sqrt(), if lf > 0.0 { -PI / 4.0 } else { PI / 4.0 });
            CMatrix::from_fn(n_out, n_in, |r, c| amp * cis_cycles(-grid_out.point(r) * grid_in.point(c) / lf))
        }
        ElementSpec::Custom(m) => m.clone(),
    };
    Kernel::new(*grid_in, *grid_out, matrix)
}

/// Cascade: `first` then `second`, `H = H2 * H1 * dx_mid`.
pub fn compose(second: &Kernel, first: &Kernel) -> Result<Kernel> {
    ensure_same(&first.grid_out, &second.grid_in, "compose")?;
    let mut m = &second.matrix * &first.matrix;
    m *= Complex64::new(first.grid_out.dx(), 0.0);
    Ok(Kernel {
        grid_in: first.grid_in,
        grid_out: second.grid_out,
        matrix: m,
    })
}

/// Compose a chain of kernels applied in order (first element acts first).
pub fn cascade<'a>(grid: Grid, stages: impl IntoIterator<Item = &'a Kernel>) -> Result<Kernel> {
    let mut acc: Option<Kernel> = None;
    for k in stages {
        acc = Some(match acc {
            None => k.clone(),
            Some(prev) => compose(k, &prev)?,
        });
    }
    Ok(acc.unwrap_or_else(|| Kernel::identity(grid)))
}

/// Correlation kernel of a system seen through a bucket detector,
/// `g(x, x') = sum_x'' h(x'', x) h*(x'', x') dx''`.
///
/// This is `(H^T conj(H)) dx_out`, the complex conjugate of `H^dagger H dx_out`.
pub fn g_kernel(k: &Kernel) -> CMatrix {
    let h = &k.matrix;
    let mut g = h.transpose() * h.conjugate();
    g *= Complex64::new(k.grid_out.dx(), 0.0);
    g
}

/// Embed weak point scatterers in a system with background response `h_o`.
///
/// Each scatterer at `x_j` (snapped to the nearest intermediate lattice point)
/// contributes `eps_j * h_after(x1, x_j) * h_before(x_j, x) * dx_mid`.
pub fn with_scatterers(
    h_before: &Kernel,
    h_after: &Kernel,
    scatterers: &[Scatterer],
    h_o: &Kernel,
) -> Result<Kernel> {
    ensure_same(&h_before.grid_out, &h_after.grid_in, "scatterer plane")?;
    ensure_same(&h_o.grid_in, &h_before.grid_in, "background input")?;
    ensure_same(&h_o.grid_out, &h_after.grid_out, "background output")?;
    let mid = h_before.grid_out;
    let mut m = h_o.matrix.clone();
    for s in scatterers {
        let j = mid.nearest_index(s.position).map_err(|e| match e {
            Error::Validation { message, .. } => Error::validation("scatterer.position", message),
            other => other,
        })?;
        let w = s.strength * mid.dx();
        let col = h_after.matrix.column(j);
        let row = h_before.matrix.row(j);
        m.ger(w, &col, &row.transpose(), Complex64::new(1.0, 0.0));
    }
    Ok(Kernel {
        grid_in: h_o.grid_in,
        grid_out: h_o.grid_out,
        matrix: m,
    })
}

/// Largest entry of `|H^dagger H dx_out dx_in - I|`.
pub fn unitarity_defect(k: &Kernel) -> Result<f64> {
    if k.grid_in.n() != k.grid_out.n() {
        return Err(Error::validation(
            "kernel",
            format!("unitarity needs a square kernel, got {}x{}", k.grid_out.n(), k.grid_in.n()),
        ));
    }
    let mut p = k.matrix.adjoint() * &k.matrix;
    p *= Complex64::new(k.grid_out.dx() * k.grid_in.dx(), 0.0);
    for i in 0..p.nrows() {
        p[(i, i)] -= Complex64::new(1.0, 0.0);
    }
    Ok(p.iter().map(|z| z.norm()).fold(0.0, f64::max))
}
