//! Monte Carlo coincidence counting from a computed joint density.
//!
//! Draws use inverse-CDF lookup over the flattened cell array. The generator
//! is ChaCha8 (`rand_chacha` 0.9). Draws are split into fixed blocks of
//! [`BLOCK_DRAWS`]; block `b` uses the stream `b` of the generator seeded with
//! the user seed, so counts do not depend on how many threads run the blocks.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::measure::{marginal_from_joint, Density, JointDensity};
use crate::sources::Arm;

pub const BLOCK_DRAWS: u64 = 1 << 16;

/// Histogram of simulated coincidence events.
#[derive(Clone, Debug, PartialEq)]
pub struct CoincidenceCounts {
    grid1: Grid,
    grid2: Grid,
    counts: DMatrix<u64>,
    total: u64,
}

impl CoincidenceCounts {
    pub fn new(grid1: Grid, grid2: Grid, counts: DMatrix<u64>) -> Result<Self> {
        if counts.nrows() != grid1.n() || counts.ncols() != grid2.n() {
            return Err(Error::GridMismatch("count matrix does not match grids".into()));
        }
        let total = counts.iter().sum();
        if total == 0 {
            return Err(Error::validation("counts", "no events recorded"));
        }
        Ok(CoincidenceCounts { grid1, grid2, counts, total })
    }

    pub fn grid1(&self) -> &Grid {
        &self.grid1
    }

    pub fn grid2(&self) -> &Grid {
        &self.grid2
    }

    pub fn counts(&self) -> &DMatrix<u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// Draw `n` independent coincidence events from `p`.
pub fn sample_joint(p: &JointDensity, n: u64, seed: u64) -> Result<CoincidenceCounts> {
    if n == 0 {
        return Err(Error::validation("sample.n", "must be at least 1"));
    }
    let (rows, cols) = p.values().shape();
    // column-major flattening, same as nalgebra storage
    let mut cdf = Vec::with_capacity(rows * cols);
    let mut acc = 0.0;
    for v in p.values().iter() {
        acc += v.max(0.0);
        cdf.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::Physics("cannot sample a density that is zero everywhere".into()));
    }
    let last_nonzero = p.values().iter().rposition(|v| *v > 0.0).unwrap_or(0);
    let blocks = n.div_ceil(BLOCK_DRAWS);
    let hist = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let draws = BLOCK_DRAWS.min(n - b * BLOCK_DRAWS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let mut h = vec![0u64; cdf.len()];
            for _ in 0..draws {
                let u = rng.random::<f64>() * acc;
                let k = cdf.partition_point(|c| *c <= u).min(last_nonzero);
                h[k] += 1;
            }
            h
        })
        .reduce(
            || vec![0u64; rows * cols],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    CoincidenceCounts::new(*p.grid1(), *p.grid2(), DMatrix::from_vec(rows, cols, hist))
}

/// Empirical joint and gated marginal densities from counts.
pub fn empirical_densities(c: &CoincidenceCounts) -> Result<(JointDensity, Density, Density)> {
    let joint = JointDensity::from_unnormalized(c.grid1, c.grid2, c.counts.map(|v| v as f64))?;
    let m1 = marginal_from_joint(&joint, Arm::One)?;
    let m2 = marginal_from_joint(&joint, Arm::Two)?;
    Ok((joint, m1, m2))
}

/// Pearson goodness-of-fit of counts against a density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    /// 99.9th percentile of the chi-square distribution with `dof` degrees.
    pub critical_999: f64,
}

impl ChiSquareTest {
    pub fn passes(&self) -> bool {
        self.statistic <= self.critical_999
    }
}

/// Pearson chi-square of `c` against `p`. Cells expecting fewer than five
/// events are pooled into one extra cell.
pub fn chi_square(c: &CoincidenceCounts, p: &JointDensity) -> Result<ChiSquareTest> {
    if c.counts.shape() != p.values().shape() {
        return Err(Error::GridMismatch("counts and density differ in shape".into()));
    }
    let cell = p.grid1().dx() * p.grid2().dx();
    let total = c.total as f64;
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pooled_exp, mut pooled_obs) = (0.0, 0.0);
    for (obs, prob) in c.counts.iter().zip(p.values().iter()) {
        let e = prob * cell * total;
        let o = *obs as f64;
        if e >= 5.0 {
            stat += (o - e) * (o - e) / e;
            cells += 1;
        } else {
            pooled_exp += e;
            pooled_obs += o;
        }
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        cells += 1;
    }
    if cells < 2 {
        return Err(Error::Physics("too few populated cells for a chi-square test".into()));
    }
    let dof = cells - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Physics(e.to_string()))?;
    Ok(ChiSquareTest {
        statistic: stat,
        dof,
        critical_999: dist.inverse_cdf(0.999),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit2() -> Grid {
        Grid::new(2, 1.0, 0.0).unwrap()
    }

    #[test]
    fn point_mass() {
        let g = unit2();
        let p = JointDensity::from_unnormalized(g, g, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 3.0, 0.0])).unwrap();
        let c = sample_joint(&p, 1000, 7).unwrap();
        assert_eq!(c.counts()[(1, 0)], 1000);
        assert_eq!(c.total(), 1000);
    }

    #[test]
    fn uniform_within_five_sigma() {
        let g = unit2();
        let p = JointDensity::from_unnormalized(g, g, DMatrix::from_element(2, 2, 1.0)).unwrap();
        let c = sample_joint(&p, 4000, 2024).unwrap();
        let sigma = (4000.0f64 * 0.25 * 0.75).sqrt();
        for v in c.counts().iter() {
            assert!((*v as f64 - 1000.0).abs() <= 5.0 * sigma, "{v}");
        }
        assert_eq!(c.counts().iter().sum::<u64>(), 4000);
    }

    #[test]
    fn deterministic_for_seed() {
        let g = Grid::new(5, 0.5, 0.0).unwrap();
        let p = JointDensity::from_unnormalized(g, g, DMatrix::from_fn(5, 5, |i, j| (i * 3 + j) as f64)).unwrap();
        let a = sample_joint(&p, 200_000, 11).unwrap();
        let b = sample_joint(&p, 200_000, 11).unwrap();
        assert_eq!(a, b);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = single.install(|| sample_joint(&p, 200_000, 11).unwrap());
        assert_eq!(a, c);
        let d = sample_joint(&p, 200_000, 12).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn empirical_normalization() {
        let g = unit2();
        let c = CoincidenceCounts::new(g, g, DMatrix::from_row_slice(2, 2, &[4, 0, 0, 0])).unwrap();
        let (j, m1, m2) = empirical_densities(&c).unwrap();
        assert_eq!(j.values(), &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(m1.values(), &[1.0, 0.0]);
        assert_eq!(m2.values(), &[1.0, 0.0]);
        assert_eq!(marginal_from_joint(&j, Arm::One).unwrap(), m1);
    }

    #[test]
    fn rejects_degenerate() {
        let g = unit2();
        let p = JointDensity::from_unnormalized(g, g, DMatrix::from_element(2, 2, 1.0)).unwrap();
        assert!(sample_joint(&p, 0, 1).is_err());
        assert!(CoincidenceCounts::new(g, g, DMatrix::zeros(2, 2)).is_err());
    }
}
