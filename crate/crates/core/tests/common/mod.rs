#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use twophoton::optics::Kernel;
use twophoton::{CMatrix, Complex64, Grid, SinglePhotonPure};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cnormal(r: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))
}

pub fn grid(n: usize) -> Grid {
    Grid::new(n, 1.0 / n as f64, 0.0).unwrap()
}

/// Dense kernel with iid complex Gaussian entries.
pub fn random_kernel(r: &mut ChaCha8Rng, g: Grid) -> Kernel {
    let n = g.n();
    Kernel::new(g, g, CMatrix::from_fn(n, n, |_, _| cnormal(r))).unwrap()
}

pub fn random_state(r: &mut ChaCha8Rng, g: Grid) -> SinglePhotonPure {
    SinglePhotonPure::from_amplitude(g, (0..g.n()).map(|_| cnormal(r)).collect()).unwrap()
}

/// Kernel `U / dx` for a Haar-like unitary `U`, so that `H dx` is unitary.
pub fn random_lossless(r: &mut ChaCha8Rng, g: Grid) -> Kernel {
    let n = g.n();
    let m = CMatrix::from_fn(n, n, |_, _| cnormal(r));
    let q = m.qr().q();
    Kernel::new(g, g, q / Complex64::new(g.dx(), 0.0)).unwrap()
}

/// Periodic shift-invariant kernel with a random response.
pub fn random_circulant(r: &mut ChaCha8Rng, g: Grid) -> Kernel {
    let n = g.n();
    let resp: Vec<Complex64> = (0..n).map(|_| cnormal(r)).collect();
    Kernel::new(g, g, CMatrix::from_fn(n, n, |i, j| resp[(i + n - j) % n])).unwrap()
}

pub fn random_intensity(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.random::<f64>() + 0.05).collect()
}

/// `|H a|^2` by direct summation, unnormalized.
pub fn coherent_image(h: &CMatrix, a: &[Complex64]) -> Vec<f64> {
    (0..h.nrows())
        .map(|r| a.iter().enumerate().map(|(c, v)| h[(r, c)] * v).sum::<Complex64>().norm_sqr())
        .collect()
}

pub fn normalize(g: &Grid, v: &[f64]) -> Vec<f64> {
    let s = g.integrate(v);
    v.iter().map(|x| x / s).collect()
}

pub fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

pub fn real_matrix_max_rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    max_rel(a.as_slice(), b.as_slice())
}
