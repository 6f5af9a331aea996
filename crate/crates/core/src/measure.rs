//! Detection densities for one- and two-photon systems.
//!
//! Every density is returned normalized to unit integral on its output
//! lattice; detector efficiencies and other constant factors are dropped.
//! The unnormalized `*_raw` helpers keep the exact quadrature factors so that
//! mixtures can be averaged with a single proportionality convention.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ensure_same, Grid};
use crate::optics::{g_kernel, CMatrix, Kernel};
use crate::sources::{
    hermitian_defect, max_abs, reduced_coherence, Arm, BiphotonMixture, BiphotonPure, CorrelatedPairSource,
    SinglePhotonMixed, SinglePhotonPure,
};

/// One-dimensional detection density (units 1/length).
#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    grid: Grid,
    values: Vec<f64>,
}

impl Density {
    /// Clip round-off negatives and normalize to unit integral.
    pub fn from_unnormalized(grid: Grid, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.n()
            )));
        }
        for v in values.iter_mut() {
            if !v.is_finite() {
                return Err(Error::Physics("non-finite density value".into()));
            }
            *v = v.max(0.0);
        }
        let total = grid.integrate(&values);
        if !(total > 0.0) {
            return Err(Error::Physics("detection probability is zero everywhere".into()));
        }
        values.iter_mut().for_each(|v| *v /= total);
        Ok(Density { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Joint coincidence density `p(x1, x2)` (units 1/length^2); rows index arm 1.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDensity {
    grid1: Grid,
    grid2: Grid,
    values: DMatrix<f64>,
}

impl JointDensity {
    pub fn from_unnormalized(grid1: Grid, grid2: Grid, mut values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != grid1.n() || values.ncols() != grid2.n() {
            return Err(Error::GridMismatch(format!(
                "joint values are {}x{}, grids are {}x{}",
                values.nrows(),
                values.ncols(),
                grid1.n(),
                grid2.n()
            )));
        }
        for v in values.iter_mut() {
            if !v.is_finite() {
                return Err(Error::Physics("non-finite density value".into()));
            }
            *v = v.max(0.0);
        }
        let total = values.sum() * grid1.dx() * grid2.dx();
        if !(total > 0.0) {
            return Err(Error::Physics("coincidence probability is zero everywhere".into()));
        }
        values /= total;
        Ok(JointDensity { grid1, grid2, values })
    }

    pub fn grid1(&self) -> &Grid {
        &self.grid1
    }

    pub fn grid2(&self) -> &Grid {
        &self.grid2
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn integral(&self) -> f64 {
        self.values.sum() * self.grid1.dx() * self.grid2.dx()
    }
}

// p(x1) = sum_x sum_x' gamma(x, x') H(x1, x) H*(x1, x') dx^2, before normalization.
fn partially_coherent_raw(coherence: &CMatrix, k: &Kernel) -> Result<Vec<f64>> {
    let scale = max_abs(coherence);
    let defect = hermitian_defect(coherence);
    if !(defect <= 1e-10 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::validation("coherence", format!("not Hermitian (defect {defect:e})")));
    }
    let h = k.matrix();
    let hg = h * coherence;
    let dx = k.grid_in().dx();
    let w = dx * dx;
    Ok((0..h.nrows())
        .map(|r| {
            let s: Complex64 = hg.row(r).iter().zip(h.row(r).iter()).map(|(a, b)| a * b.conj()).sum();
            s.re * w
        })
        .collect())
}

fn intensity_raw(k: &Kernel, weights: &[f64]) -> Vec<f64> {
    let h = k.matrix();
    let dx = k.grid_in().dx();
    (0..h.nrows())
        .map(|r| h.row(r).iter().zip(weights).map(|(z, g)| z.norm_sqr() * g).sum::<f64>() * dx)
        .collect()
}

/// Coherent single-photon imaging: `p(x1) ~ |sum_x phi(x) H(x1, x) dx|^2`.
pub fn single_coherent(s: &SinglePhotonPure, k: &Kernel) -> Result<Density> {
    ensure_same(s.grid(), k.grid_in(), "single-photon source vs system input")?;
    let out = k.apply(s.amplitude())?;
    Density::from_unnormalized(*k.grid_out(), out.iter().map(|z| z.norm_sqr()).collect())
}

/// Partially coherent single-photon imaging through the coherence matrix.
pub fn single_partially_coherent(s: &SinglePhotonMixed, k: &Kernel) -> Result<Density> {
    ensure_same(s.grid(), k.grid_in(), "mixed source vs system input")?;
    Density::from_unnormalized(*k.grid_out(), partially_coherent_raw(s.coherence(), k)?)
}

fn check_pair(s: &BiphotonPure, k1: &Kernel, k2: &Kernel) -> Result<()> {
    ensure_same(s.grid1(), k1.grid_in(), "arm 1 source vs system input")?;
    ensure_same(s.grid2(), k2.grid_in(), "arm 2 source vs system input")
}

/// Unnormalized `|A|^2` with `A = H1 phi H2^T dx dx'`.
pub fn biphoton_joint_raw(s: &BiphotonPure, k1: &Kernel, k2: &Kernel) -> Result<DMatrix<f64>> {
    check_pair(s, k1, k2)?;
    let mut a = k1.matrix() * s.amplitude() * k2.matrix().transpose();
    a *= Complex64::new(s.grid1().dx() * s.grid2().dx(), 0.0);
    Ok(a.map(|z| z.norm_sqr()))
}

/// Joint coincidence density of a pure biphoton sent through two systems.
pub fn biphoton_joint(s: &BiphotonPure, k1: &Kernel, k2: &Kernel) -> Result<JointDensity> {
    JointDensity::from_unnormalized(*k1.grid_out(), *k2.grid_out(), biphoton_joint_raw(s, k1, k2)?)
}

fn singles_raw(s: &BiphotonPure, k: &Kernel, arm: Arm) -> Result<Vec<f64>> {
    ensure_same(s.grid(arm), k.grid_in(), "source vs system input")?;
    partially_coherent_raw(reduced_coherence(s, arm).coherence(), k)
}

/// Singles rate at arm `arm`, regardless of the other photon.
pub fn biphoton_singles(s: &BiphotonPure, k: &Kernel, arm: Arm) -> Result<Density> {
    Density::from_unnormalized(*k.grid_out(), singles_raw(s, k, arm)?)
}

fn marginal_raw(joint: &DMatrix<f64>, g1: &Grid, g2: &Grid, arm: Arm) -> Vec<f64> {
    match arm {
        Arm::One => joint.row_iter().map(|r| r.sum() * g2.dx()).collect(),
        Arm::Two => joint.column_iter().map(|c| c.sum() * g1.dx()).collect(),
    }
}

/// Bucket-gated marginal: integrate the joint density over the other arm.
pub fn marginal_from_joint(p: &JointDensity, arm: Arm) -> Result<Density> {
    let grid = match arm {
        Arm::One => p.grid1,
        Arm::Two => p.grid2,
    };
    Density::from_unnormalized(grid, marginal_raw(&p.values, &p.grid1, &p.grid2, arm))
}

/// Gated marginal of a pure biphoton at `arm`, computed through the full joint.
pub fn biphoton_marginal(s: &BiphotonPure, k1: &Kernel, k2: &Kernel, arm: Arm) -> Result<Density> {
    marginal_from_joint(&biphoton_joint(s, k1, k2)?, arm)
}

/// Closed-form gated marginal for `phi(x) delta(x - x')` observed through
/// `k_obs` while the other photon crosses `k_other` into a bucket detector.
///
/// The effective coherence is `phi(x) phi*(x') g(x, x')` with `g` the
/// bucket correlation kernel of `k_other`.
pub fn entangled_marginal_closed(phi: &SinglePhotonPure, k_obs: &Kernel, k_other: &Kernel) -> Result<Density> {
    ensure_same(phi.grid(), k_obs.grid_in(), "source vs observed system")?;
    ensure_same(phi.grid(), k_other.grid_in(), "source vs gating system")?;
    let g = g_kernel(k_other);
    let a = phi.amplitude();
    let gamma = CMatrix::from_fn(a.len(), a.len(), |i, j| a[i] * a[j].conj() * g[(i, j)]);
    Density::from_unnormalized(*k_obs.grid_out(), partially_coherent_raw(&gamma, k_obs)?)
        .map_err(|e| e.context("entangled marginal"))
}

fn check_correlated(c: &CorrelatedPairSource, k: &Kernel, what: &str) -> Result<()> {
    ensure_same(c.grid(), k.grid_in(), what)
}

/// Joint density of the classically correlated source,
/// `sum_x gamma(x) |H1(x1, x)|^2 |H2(x2, x)|^2 dx`.
pub fn correlated_joint(c: &CorrelatedPairSource, k1: &Kernel, k2: &Kernel) -> Result<JointDensity> {
    check_correlated(c, k1, "correlated source vs arm 1")?;
    check_correlated(c, k2, "correlated source vs arm 2")?;
    let a = k1.matrix().map(|z| z.norm_sqr());
    let b = k2.matrix().map(|z| z.norm_sqr());
    let dx = c.grid().dx();
    let w = DMatrix::from_diagonal(&DVector::from_iterator(c.gamma().len(), c.gamma().iter().map(|g| g * dx)));
    JointDensity::from_unnormalized(*k1.grid_out(), *k2.grid_out(), a * w * b.transpose())
}

/// Singles rate of the correlated source: incoherent imaging of `gamma`.
pub fn correlated_singles(c: &CorrelatedPairSource, k: &Kernel, arm: Arm) -> Result<Density> {
    check_correlated(c, k, &format!("correlated source vs arm {}", arm.index()))?;
    Density::from_unnormalized(*k.grid_out(), intensity_raw(k, c.gamma()))
}

/// Gated marginal of the correlated source: incoherent imaging of
/// `gamma(x) * sum_x' |H_other(x', x)|^2 dx'`.
pub fn correlated_marginal(c: &CorrelatedPairSource, k_obs: &Kernel, k_other: &Kernel) -> Result<Density> {
    check_correlated(c, k_obs, "correlated source vs observed system")?;
    check_correlated(c, k_other, "correlated source vs gating system")?;
    let h = k_other.matrix();
    let dxo = k_other.grid_out().dx();
    let gbar: Vec<f64> = c
        .gamma()
        .iter()
        .enumerate()
        .map(|(i, g)| g * h.column(i).iter().map(|z| z.norm_sqr()).sum::<f64>() * dxo)
        .collect();
    if !gbar.iter().any(|v| *v > 0.0) {
        return Err(Error::Physics(
            "gating arm absorbs every photon: coincidence rate is zero".into(),
        ));
    }
    Density::from_unnormalized(*k_obs.grid_out(), intensity_raw(k_obs, &gbar))
}

/// Weighted joint density of a mixture.
pub fn mixture_joint(m: &BiphotonMixture, k1: &Kernel, k2: &Kernel) -> Result<JointDensity> {
    let mut acc = DMatrix::<f64>::zeros(k1.grid_out().n(), k2.grid_out().n());
    for (w, s) in m.components() {
        acc += biphoton_joint_raw(s, k1, k2)? * *w;
    }
    JointDensity::from_unnormalized(*k1.grid_out(), *k2.grid_out(), acc)
}

/// Weighted singles rate of a mixture at `arm`.
pub fn mixture_singles(m: &BiphotonMixture, k: &Kernel, arm: Arm) -> Result<Density> {
    let mut acc = vec![0.0; k.grid_out().n()];
    for (w, s) in m.components() {
        for (a, v) in acc.iter_mut().zip(singles_raw(s, k, arm)?) {
            *a += w * v;
        }
    }
    Density::from_unnormalized(*k.grid_out(), acc)
}

/// Weighted gated marginal of a mixture at `arm`; `k1`/`k2` are the arm 1 and
/// arm 2 systems.
pub fn mixture_marginal(m: &BiphotonMixture, k1: &Kernel, k2: &Kernel, arm: Arm) -> Result<Density> {
    let grid = match arm {
        Arm::One => *k1.grid_out(),
        Arm::Two => *k2.grid_out(),
    };
    let mut acc = vec![0.0; grid.n()];
    for (w, s) in m.components() {
        let raw = biphoton_joint_raw(s, k1, k2)?;
        for (a, v) in acc.iter_mut().zip(marginal_raw(&raw, k1.grid_out(), k2.grid_out(), arm)) {
            *a += w * v;
        }
    }
    Density::from_unnormalized(grid, acc).map_err(|e| e.context("mixture marginal"))
}

/// Scalar figures of merit for a one-dimensional image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImageMetrics {
    /// `(max - min) / (max + min)` over the region.
    pub visibility: f64,
    /// Full width at half maximum around the peak, by linear interpolation.
    /// A side with no half-maximum crossing inside the region extends to the
    /// region boundary, so the value is then a lower bound.
    pub fwhm: f64,
    pub peak_position: f64,
}

pub fn image_metrics(p: &Density, region: Range<usize>) -> Result<ImageMetrics> {
    let v = p.values();
    if region.start >= region.end || region.end > v.len() {
        return Err(Error::validation(
            "region",
            format!("{}..{} is empty or exceeds {} samples", region.start, region.end, v.len()),
        ));
    }
    let slice = &v[region.clone()];
    let (mut peak, mut hi) = (region.start, f64::NEG_INFINITY);
    let mut lo = f64::INFINITY;
    for (i, &x) in slice.iter().enumerate() {
        if x > hi {
            hi = x;
            peak = region.start + i;
        }
        lo = lo.min(x);
    }
    if !(hi > 0.0) {
        return Err(Error::validation("region", "density is zero over the region"));
    }
    let g = p.grid();
    let half = hi / 2.0;
    let mut left = g.point(region.start);
    for i in (region.start..peak).rev() {
        if v[i] < half {
            left = g.point(i) + (half - v[i]) / (v[i + 1] - v[i]) * g.dx();
            break;
        }
    }
    let mut right = g.point(region.end - 1);
    for i in peak + 1..region.end {
        if v[i] < half {
            right = g.point(i - 1) + (v[i - 1] - half) / (v[i - 1] - v[i]) * g.dx();
            break;
        }
    }
    Ok(ImageMetrics {
        visibility: (hi - lo) / (hi + lo),
        fwhm: right - left,
        peak_position: g.point(peak),
    })
}

/// `max |a - b| / max |b|`.
pub fn relative_linf(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let d = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    d / scale
}

/// Total-variation distance `0.5 * sum |a - b| dx` between two densities.
pub fn total_variation(a: &Density, b: &Density) -> f64 {
    0.5 * a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).sum::<f64>() * a.grid().dx()
}
