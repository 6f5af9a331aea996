//! Named transverse profiles used for pump fields, source amplitudes and
//! object transmittances.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// A complex function of the transverse coordinate, sampled on a [`Grid`].
///
/// Widths follow the beam convention: `gaussian { waist }` is
/// `exp(-(x - center)^2 / waist^2)` in amplitude.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Uniform {},
    Gaussian {
        waist: f64,
        #[serde(default)]
        center: f64,
    },
    /// A single lattice point (nearest to `at`).
    Delta {
        #[serde(default)]
        at: f64,
    },
    /// Single lattice point transmitting fully; same shape as `delta`.
    Pinhole {
        #[serde(default)]
        at: f64,
    },
    Slit {
        width: f64,
        #[serde(default)]
        center: f64,
    },
    DoubleSlit {
        width: f64,
        separation: f64,
        #[serde(default)]
        center: f64,
    },
    GaussianAperture {
        w: f64,
        #[serde(default)]
        center: f64,
    },
    /// Opaque for `x < x0`, clear for `x >= x0`.
    StepEdge { x0: f64 },
    Opaque {},
    /// Inline samples; `im` defaults to zero.
    Array {
        re: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<Vec<f64>>,
    },
}

fn width_ok(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be positive, got {v}")))
    }
}

impl Profile {
    /// Range-check parameters; `field` names the profile in error messages.
    pub fn validate(&self, field: &str, grid: &Grid) -> Result<()> {
        match self {
            Profile::Gaussian { waist, .. } => width_ok(&format!("{field}.waist"), *waist),
            Profile::GaussianAperture { w, .. } => width_ok(&format!("{field}.w"), *w),
            Profile::Slit { width, .. } => width_ok(&format!("{field}.width"), *width),
            Profile::DoubleSlit { width, separation, .. } => {
                width_ok(&format!("{field}.width"), *width)?;
                width_ok(&format!("{field}.separation"), *separation)?;
                if separation <= width {
                    return Err(Error::validation(
                        format!("{field}.separation"),
                        "slits overlap: separation must exceed width",
                    ));
                }
                Ok(())
            }
            Profile::Delta { at } | Profile::Pinhole { at } => grid
                .nearest_index(*at)
                .map(|_| ())
                .map_err(|e| Error::validation(format!("{field}.at"), e.to_string())),
            Profile::Array { re, im } => {
                if re.len() != grid.n() {
                    return Err(Error::validation(
                        format!("{field}.re"),
                        format!("{} samples for a {}-point grid", re.len(), grid.n()),
                    ));
                }
                if let Some(im) = im {
                    if im.len() != re.len() {
                        return Err(Error::validation(format!("{field}.im"), "length differs from re"));
                    }
                }
                if re.iter().chain(im.iter().flatten()).any(|v| !v.is_finite()) {
                    return Err(Error::validation(field, "non-finite sample"));
                }
                Ok(())
            }
            Profile::Uniform {} | Profile::Opaque {} | Profile::StepEdge { .. } => Ok(()),
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<Vec<Complex64>> {
        self.validate("profile", grid)?;
        let tol = 1e-9 * grid.dx();
        let inside = |x: f64, c: f64, w: f64| (x - c).abs() <= 0.5 * w + tol;
        let real = |f: &dyn Fn(f64) -> f64| -> Vec<Complex64> {
            grid.points().into_iter().map(|x| Complex64::new(f(x), 0.0)).collect()
        };
        Ok(match self {
            Profile::Uniform {} => vec![Complex64::new(1.0, 0.0); grid.n()],
            Profile::Opaque {} => vec![Complex64::new(0.0, 0.0); grid.n()],
            Profile::Gaussian { waist, center } => real(&|x| (-((x - center) / waist).powi(2)).exp()),
            Profile::GaussianAperture { w, center } => real(&|x| (-((x - center) / w).powi(2)).exp()),
            Profile::Delta { at } | Profile::Pinhole { at } => {
                let mut v = vec![Complex64::new(0.0, 0.0); grid.n()];
                v[grid.nearest_index(*at)?] = Complex64::new(1.0, 0.0);
                v
            }
            Profile::Slit { width, center } => real(&|x| if inside(x, *center, *width) { 1.0 } else { 0.0 }),
            Profile::DoubleSlit { width, separation, center } => real(&|x| {
                let a = inside(x, center - separation / 2.0, *width);
                let b = inside(x, center + separation / 2.0, *width);
                if a || b {
                    1.0
                } else {
                    0.0
                }
            }),
            Profile::StepEdge { x0 } => real(&|x| if x >= *x0 - tol { 1.0 } else { 0.0 }),
            Profile::Array { re, im } => re
                .iter()
                .enumerate()
                .map(|(i, r)| Complex64::new(*r, im.as_ref().map_or(0.0, |v| v[i])))
                .collect(),
        })
    }
}
