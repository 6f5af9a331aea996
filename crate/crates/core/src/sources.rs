//! Source states: single photons (pure and mixed), pure biphotons, finite
//! mixtures of biphotons and the classically correlated pair source.
//!
//! Amplitudes are stored as samples of the continuum functions. Dirac deltas
//! become Kronecker deltas scaled by `1/sqrt(dx)` (amplitudes) so that every
//! normalization integral is exact on the lattice.

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ensure_same, Grid};
use crate::optics::CMatrix;


/// Which photon of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arm {
    One,
    Two,
}

impl Arm {
    pub fn other(self) -> Arm {
        match self {
            Arm::One => Arm::Two,
            Arm::Two => Arm::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Arm::One => 1,
            Arm::Two => 2,
        }
    }
}

/// Single photon in a pure state, amplitude in units of 1/sqrt(length).
#[derive(Clone, Debug, PartialEq)]
pub struct SinglePhotonPure {
    grid: Grid,
    amp: Vec<Complex64>,
}

impl SinglePhotonPure {
    /// Normalize `amp` to unit probability on `grid`.
    pub fn from_amplitude(grid: Grid, amp: Vec<Complex64>) -> Result<Self> {
        if amp.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "amplitude has {} samples, grid has {}",
                amp.len(),
                grid.n()
            )));
        }
        let norm: f64 = amp.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dx();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::validation("amplitude", "must be finite and not identically zero"));
        }
        let s = 1.0 / norm.sqrt();
        Ok(SinglePhotonPure {
            grid,
            amp: amp.into_iter().map(|z| z * s).collect(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitude(&self) -> &[Complex64] {
        &self.amp
    }

    /// `|phi(x)|^2`, a unit-integral intensity.
    pub fn intensity(&self) -> Vec<f64> {
        self.amp.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Single photon in a mixed state with coherence matrix `gamma(x, x')`
/// (units 1/length, unit trace `sum gamma(x_i, x_i) dx = 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct SinglePhotonMixed {
    grid: Grid,
    coherence: CMatrix,
}

impl SinglePhotonMixed {
    /// Validate hermiticity and positivity, then normalize the trace.
    pub fn from_coherence(grid: Grid, coherence: CMatrix) -> Result<Self> {
        let n = grid.n();
        if coherence.nrows() != n || coherence.ncols() != n {
            return Err(Error::GridMismatch(format!(
                "coherence is {}x{}, grid has {n} points",
                coherence.nrows(),
                coherence.ncols()
            )));
        }
        let defect = hermitian_defect(&coherence);
        let scale = max_abs(&coherence);
        if !(defect <= 1e-10 * scale) {
            return Err(Error::validation("coherence", format!("not Hermitian (defect {defect:e})")));
        }
        let trace: f64 = (0..n).map(|i| coherence[(i, i)].re).sum::<f64>() * grid.dx();
        if !(trace > 0.0) || !trace.is_finite() {
            return Err(Error::validation("coherence", "trace must be positive"));
        }
        let rho = &coherence * Complex64::new(grid.dx() / trace, 0.0);
        let lo = min_eigenvalue(&rho);
        if lo < -1e-10 {
            return Err(Error::validation("coherence", format!("not positive semidefinite (eigenvalue {lo:e})")));
        }
        Ok(SinglePhotonMixed {
            grid,
            coherence: coherence / Complex64::new(trace, 0.0),
        })
    }

    /// Coherent limit `gamma = phi phi^dagger`.
    pub fn pure(state: &SinglePhotonPure) -> Self {
        let v = DVector::from_column_slice(state.amplitude());
        SinglePhotonMixed {
            grid: state.grid,
            coherence: &v * v.adjoint(),
        }
    }

    /// Incoherent limit: diagonal coherence with the given non-negative
    /// intensity, normalized so the trace is one.
    pub fn incoherent(grid: Grid, intensity: &[f64]) -> Result<Self> {
        let c = CorrelatedPairSource::from_intensity(grid, intensity)?;
        let diag = DVector::from_iterator(grid.n(), c.gamma.iter().map(|&g| Complex64::new(g, 0.0)));
        Ok(SinglePhotonMixed {
            grid,
            coherence: CMatrix::from_diagonal(&diag),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coherence(&self) -> &CMatrix {
        &self.coherence
    }

    /// Discrete density matrix `gamma * dx` (dimensionless, unit trace).
    pub fn density_matrix(&self) -> CMatrix {
        &self.coherence * Complex64::new(self.grid.dx(), 0.0)
    }
}

/// Pure two-photon state with joint amplitude `phi(x, x')` (units 1/length);
/// rows index photon 1, columns photon 2.
#[derive(Clone, Debug, PartialEq)]
pub struct BiphotonPure {
    grid1: Grid,
    grid2: Grid,
    amp: CMatrix,
}

impl BiphotonPure {
    /// Normalize a joint amplitude to unit probability.
    pub fn from_amplitude(grid1: Grid, grid2: Grid, amp: CMatrix) -> Result<Self> {
        if amp.nrows() != grid1.n() || amp.ncols() != grid2.n() {
            return Err(Error::GridMismatch(format!(
                "joint amplitude is {}x{}, grids are {}x{}",
                amp.nrows(),
                amp.ncols(),
                grid1.n(),
                grid2.n()
            )));
        }
        let norm = amp.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid1.dx() * grid2.dx();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::validation("amplitude", "must be finite and not identically zero"));
        }
        Ok(BiphotonPure {
            grid1,
            grid2,
            amp: amp / Complex64::new(norm.sqrt(), 0.0),
        })
    }

    pub fn grid1(&self) -> &Grid {
        &self.grid1
    }

    pub fn grid2(&self) -> &Grid {
        &self.grid2
    }

    pub fn grid(&self, arm: Arm) -> &Grid {
        match arm {
            Arm::One => &self.grid1,
            Arm::Two => &self.grid2,
        }
    }

    pub fn amplitude(&self) -> &CMatrix {
        &self.amp
    }

    pub fn norm(&self) -> f64 {
        self.amp.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid1.dx() * self.grid2.dx()
    }
}

/// Finite convex mixture of pure biphotons.
#[derive(Clone, Debug, PartialEq)]
pub struct BiphotonMixture {
    components: Vec<(f64, BiphotonPure)>,
}

impl BiphotonMixture {
    /// Weights are rescaled to sum to one; all components must share grids.
    pub fn new(components: Vec<(f64, BiphotonPure)>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::validation("mixture", "needs at least one component"))?;
        let (g1, g2) = (first.1.grid1, first.1.grid2);
        let mut total = 0.0;
        for (w, s) in &components {
            if !(*w >= 0.0) || !w.is_finite() {
                return Err(Error::validation("mixture.weight", format!("must be non-negative, got {w}")));
            }
            ensure_same(&g1, &s.grid1, "mixture component arm 1")?;
            ensure_same(&g2, &s.grid2, "mixture component arm 2")?;
            total += w;
        }
        if !(total > 0.0) {
            return Err(Error::validation("mixture.weight", "weights sum to zero"));
        }
        Ok(BiphotonMixture {
            components: components.into_iter().map(|(w, s)| (w / total, s)).collect(),
        })
    }

    pub fn components(&self) -> &[(f64, BiphotonPure)] {
        &self.components
    }

    /// Convex blend `w * a + (1 - w) * b`.
    pub fn blend(w: f64, a: &BiphotonMixture, b: &BiphotonMixture) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::validation("mixture.weight", format!("blend weight {w} outside [0, 1]")));
        }
        let comps = a
            .components
            .iter()
            .map(|(v, s)| (w * v, s.clone()))
            .chain(b.components.iter().map(|(v, s)| ((1.0 - w) * v, s.clone())))
            .filter(|(v, _)| *v > 0.0)
            .collect();
        BiphotonMixture::new(comps)
    }
}

impl From<BiphotonPure> for BiphotonMixture {
    fn from(s: BiphotonPure) -> Self {
        BiphotonMixture {
            components: vec![(1.0, s)],
        }
    }
}

/// Mixture of co-located photon pairs with emission density `gamma(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatedPairSource {
    grid: Grid,
    gamma: Vec<f64>,
}

impl CorrelatedPairSource {
    pub fn from_intensity(grid: Grid, gamma: &[f64]) -> Result<Self> {
        if gamma.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "gamma has {} samples, grid has {}",
                gamma.len(),
                grid.n()
            )));
        }
        if let Some(bad) = gamma.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
            return Err(Error::validation("gamma", format!("entries must be non-negative and finite, found {bad}")));
        }
        let total = grid.integrate(gamma);
        if !(total > 0.0) {
            return Err(Error::validation("gamma", "must not be identically zero"));
        }
        Ok(CorrelatedPairSource {
            grid,
            gamma: gamma.iter().map(|g| g / total).collect(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }
}

/// Gaussian phase-matching model for the down-conversion amplitude.
#[derive(Clone, Debug, PartialEq)]
pub struct SpdcParams {
    /// Pump field at the crystal input, sampled on the lattice.
    pub pump: Vec<Complex64>,
    /// Width `b` of the isotropic Gaussian `exp(-(u^2 + v^2) / (2 b^2))`.
    pub pm_width: f64,
}

/// `phi(x, x') = phi1(x) phi2(x')`.
pub fn factorizable(phi1: &SinglePhotonPure, phi2: &SinglePhotonPure) -> BiphotonPure {
    let a = DVector::from_column_slice(&phi1.amp);
    let b = DVector::from_column_slice(&phi2.amp);
    BiphotonPure {
        grid1: phi1.grid,
        grid2: phi2.grid,
        amp: &a * b.transpose(),
    }
}

/// `phi(x, x') = phi(x) delta(x - x')` on the lattice.
pub fn entangled_delta(phi: &SinglePhotonPure) -> BiphotonPure {
    let s = 1.0 / phi.grid.dx().sqrt();
    let diag = DVector::from_iterator(phi.amp.len(), phi.amp.iter().map(|z| z * s));
    BiphotonPure {
        grid1: phi.grid,
        grid2: phi.grid,
        amp: CMatrix::from_diagonal(&diag),
    }
}

/// Down-conversion amplitude `sum_k E_p(x_k) zeta(x - x_k, x' - x_k) dx`,
/// renormalized.
pub fn spdc_amplitude(params: &SpdcParams, grid: &Grid) -> Result<BiphotonPure> {
    let n = grid.n();
    if params.pump.len() != n {
        return Err(Error::GridMismatch(format!(
            "pump has {} samples, grid has {n}",
            params.pump.len()
        )));
    }
    let b = params.pm_width;
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::validation("pm_width", format!("must be positive, got {b}")));
    }
    if params.pump.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::validation("pump", "pump field is identically zero"));
    }
    // zeta separates: exp(-(x - x_k)^2 / 2b^2) * exp(-(x' - x_k)^2 / 2b^2)
    let z = CMatrix::from_fn(n, n, |i, k| {
        let u = grid.point(i) - grid.point(k);
        Complex64::new((-u * u / (2.0 * b * b)).exp(), 0.0)
    });
    let weights = DVector::from_iterator(n, params.pump.iter().map(|e| e * grid.dx()));
    let amp = &z * CMatrix::from_diagonal(&weights) * z.transpose();
    BiphotonPure::from_amplitude(*grid, *grid, amp).map_err(|_| {
        Error::Physics("down-conversion amplitude vanishes on the lattice (phase-matching width too small?)".into())
    })
}

/// Reduced coherence of one photon, tracing out the other.
pub fn reduced_coherence(s: &BiphotonPure, arm: Arm) -> SinglePhotonMixed {
    let (grid, coherence) = match arm {
        Arm::One => (s.grid1, &s.amp * s.amp.adjoint() * Complex64::new(s.grid2.dx(), 0.0)),
        Arm::Two => (
            s.grid2,
            s.amp.transpose() * s.amp.conjugate() * Complex64::new(s.grid1.dx(), 0.0),
        ),
    };
    SinglePhotonMixed { grid, coherence }
}

/// Schmidt decomposition summary of a pure biphoton.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtSpectrum {
    /// Schmidt coefficients in descending order, `sum sigma^2 = 1`.
    pub singular_values: Vec<f64>,
    /// Entanglement entropy `-sum sigma^2 ln sigma^2` (nats).
    pub entropy: f64,
    /// Participation number `1 / sum sigma^4`.
    pub participation: f64,
}

pub fn schmidt_spectrum(s: &BiphotonPure) -> SchmidtSpectrum {
    let scaled = &s.amp * Complex64::new((s.grid1.dx() * s.grid2.dx()).sqrt(), 0.0);
    let mut sv: Vec<f64> = scaled.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let entropy = sv
        .iter()
        .map(|v| v * v)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum::<f64>();
    let purity: f64 = sv.iter().map(|v| v.powi(4)).sum();
    SchmidtSpectrum {
        singular_values: sv,
        entropy,
        participation: 1.0 / purity,
    }
}

/// Normalized classically correlated source from a non-negative emission density.
pub fn correlated_from_intensity(gamma: &[f64], grid: &Grid) -> Result<CorrelatedPairSource> {
    CorrelatedPairSource::from_intensity(*grid, gamma)
}

/// The correlated source as an explicit mixture of localized pair states
/// `e_i e_i^T / dx`, weighted by `gamma(x_i) dx`.
pub fn localized_pair_mixture(c: &CorrelatedPairSource) -> BiphotonMixture {
    let n = c.grid.n();
    let dx = c.grid.dx();
    let components = c
        .gamma
        .iter()
        .enumerate()
        .filter(|(_, g)| **g > 0.0)
        .map(|(i, g)| {
            let mut amp = CMatrix::zeros(n, n);
            amp[(i, i)] = Complex64::new(1.0 / dx, 0.0);
            (
                g * dx,
                BiphotonPure {
                    grid1: c.grid,
                    grid2: c.grid,
                    amp,
                },
            )
        })
        .collect();
    BiphotonMixture { components }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of `|A - A^dagger|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.adjoint()))
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn unit(n: usize) -> Grid {
        Grid::new(n, 1.0, 0.0).unwrap()
    }

    #[test]
    fn outer_product() {
        let g = unit(2);
        let a = SinglePhotonPure::from_amplitude(g, vec![c(1.0), c(0.0)]).unwrap();
        let b = SinglePhotonPure::from_amplitude(g, vec![c(0.0), c(1.0)]).unwrap();
        let s = factorizable(&a, &b);
        assert_eq!(s.amplitude(), &CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]));
        let sv = schmidt_spectrum(&s);
        assert!((sv.singular_values[0] - 1.0).abs() < 1e-12);
        assert!(sv.singular_values[1].abs() < 1e-12);
        assert!(sv.entropy.abs() < 1e-12 && (sv.participation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delta_state() {
        let h = 1.0 / 2f64.sqrt();
        let phi = SinglePhotonPure::from_amplitude(unit(2), vec![c(h), c(h)]).unwrap();
        let s = entangled_delta(&phi);
        assert!((s.amplitude()[(0, 0)] - c(h)).norm() < 1e-15);
        assert_eq!(s.amplitude()[(0, 1)], c(0.0));
        assert!((s.norm() - 1.0).abs() < 1e-12);

        let g = Grid::new(4, 0.3, 0.0).unwrap();
        let phi = SinglePhotonPure::from_amplitude(g, vec![c(1.0); 4]).unwrap();
        let sp = schmidt_spectrum(&entangled_delta(&phi));
        for v in &sp.singular_values {
            assert!((v * v - 0.25).abs() < 1e-12);
        }
        assert!((sp.entropy - 4f64.ln()).abs() < 1e-12);
        assert!((sp.participation - 4.0).abs() < 1e-10);
    }

    #[test]
    fn delta_reduced_coherence_is_intensity() {
        let g = Grid::new(5, 0.2, 0.0).unwrap();
        let amp = vec![c(0.3), Complex64::new(0.1, 0.7), c(-1.0), c(0.0), Complex64::new(0.0, 0.4)];
        let phi = SinglePhotonPure::from_amplitude(g, amp).unwrap();
        for arm in [Arm::One, Arm::Two] {
            let r = reduced_coherence(&entangled_delta(&phi), arm);
            let int = phi.intensity();
            for i in 0..5 {
                for j in 0..5 {
                    let expect = if i == j { int[i] } else { 0.0 };
                    assert!((r.coherence()[(i, j)] - c(expect)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn factorizable_reduced_coherence() {
        let g = Grid::new(3, 0.5, 0.0).unwrap();
        let a = SinglePhotonPure::from_amplitude(g, vec![c(1.0), Complex64::new(0.0, 2.0), c(0.5)]).unwrap();
        let b = SinglePhotonPure::from_amplitude(g, vec![c(0.2), c(1.0), Complex64::new(1.0, -1.0)]).unwrap();
        let r = reduced_coherence(&factorizable(&a, &b), Arm::One);
        let expect = SinglePhotonMixed::pure(&a);
        assert!(max_abs(&(r.coherence() - expect.coherence())) < 1e-12);
        let r2 = reduced_coherence(&factorizable(&a, &b), Arm::Two);
        assert!(max_abs(&(r2.coherence() - SinglePhotonMixed::pure(&b).coherence())) < 1e-12);
    }

    #[test]
    fn correlated_normalization() {
        let g = unit(2);
        assert_eq!(correlated_from_intensity(&[1.0, 1.0], &g).unwrap().gamma(), &[0.5, 0.5]);
        assert!(correlated_from_intensity(&[1.0, -0.1], &g).is_err());
        assert!(correlated_from_intensity(&[0.0, 0.0], &g).is_err());
        let point = correlated_from_intensity(&[1.0, 0.0], &g).unwrap();
        let m = localized_pair_mixture(&point);
        assert_eq!(m.components().len(), 1);
        assert_eq!(m.components()[0].0, 1.0);
        assert_eq!(m.components()[0].1.amplitude(), &CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]));

        let half = localized_pair_mixture(&correlated_from_intensity(&[1.0, 1.0], &g).unwrap());
        assert_eq!(half.components().len(), 2);
        assert!(half.components().iter().all(|(w, _)| (*w - 0.5).abs() < 1e-15));
    }

    #[test]
    fn spdc_point_pump() {
        let g = Grid::new(9, 0.5, 0.0).unwrap();
        let mut pump = vec![c(0.0); 9];
        pump[4] = c(1.0);
        let b = 0.8;
        let s = spdc_amplitude(&SpdcParams { pump, pm_width: b }, &g).unwrap();
        let zeta = CMatrix::from_fn(9, 9, |i, j| {
            let (x, y) = (g.point(i), g.point(j));
            c((-(x * x + y * y) / (2.0 * b * b)).exp())
        });
        let zeta = BiphotonPure::from_amplitude(g, g, zeta).unwrap();
        assert!(max_abs(&(s.amplitude() - zeta.amplitude())) < 1e-12);
    }

    #[test]
    fn spdc_rejects_bad_input() {
        let g = unit(3);
        assert!(spdc_amplitude(&SpdcParams { pump: vec![c(0.0); 3], pm_width: 1.0 }, &g).is_err());
        assert!(spdc_amplitude(&SpdcParams { pump: vec![c(1.0); 3], pm_width: 0.0 }, &g).is_err());
    }

    #[test]
    fn mixed_state_validation() {
        let g = unit(2);
        let bad = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        assert!(SinglePhotonMixed::from_coherence(g, bad).is_err());
        let neg = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(1.0)]);
        assert!(SinglePhotonMixed::from_coherence(g, neg).is_err());
        let ok = SinglePhotonMixed::from_coherence(g, CMatrix::identity(2, 2)).unwrap();
        assert!((ok.coherence()[(0, 0)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mixture_weights_normalize() {
        let g = unit(2);
        let a = entangled_delta(&SinglePhotonPure::from_amplitude(g, vec![c(1.0), c(1.0)]).unwrap());
        let m = BiphotonMixture::new(vec![(2.0, a.clone()), (6.0, a.clone())]).unwrap();
        assert_eq!(m.components()[0].0, 0.25);
        assert!(BiphotonMixture::new(vec![]).is_err());
        assert!(BiphotonMixture::new(vec![(-1.0, a)]).is_err());
    }
}
