//! Draw coincidence events from a joint density and test them against it.

use twophoton::measure::{biphoton_joint, marginal_from_joint, total_variation};
use twophoton::optics::{kernel_of, ElementSpec};
use twophoton::sampling::{chi_square, empirical_densities, sample_joint};
use twophoton::sources::{spdc_amplitude, SpdcParams};
use twophoton::{Arm, Grid, Profile};

fn main() -> twophoton::Result<()> {
    let grid = Grid::new(64, 2e-6, 0.0)?;
    let state = spdc_amplitude(
        &SpdcParams { pump: Profile::Gaussian { waist: 2e-5, center: 0.0 }.sample(&grid)?, pm_width: 4e-6 },
        &grid,
    )?;
    let drift = kernel_of(&ElementSpec::FreeSpace { distance: 5e-4, wavelength: 5e-7 }, &grid, &grid)?;
    let joint = biphoton_joint(&state, &drift, &drift)?;
    for n in [10_000u64, 100_000, 1_000_000] {
        let counts = sample_joint(&joint, n, 7)?;
        let (_, m1, _) = empirical_densities(&counts)?;
        let chi = chi_square(&counts, &joint)?;
        println!(
            "n = {n:>8}: TV(marginal 1) = {:.4}, chi2 = {:.1} on {} dof (99.9% point {:.1})",
            total_variation(&m1, &marginal_from_joint(&joint, Arm::One)?),
            chi.statistic,
            chi.dof,
            chi.critical_999
        );
    }
    Ok(())
}
