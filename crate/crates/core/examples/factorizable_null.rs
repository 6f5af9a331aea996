//! A product state: the bucket in one arm does not change the other arm.

use twophoton::measure::{biphoton_marginal, biphoton_singles, relative_linf};
use twophoton::optics::{cascade, kernel_of, ElementSpec};
use twophoton::sources::{factorizable, schmidt_spectrum};
use twophoton::{Arm, Grid, Profile, SinglePhotonPure};

fn main() -> twophoton::Result<()> {
    let lambda = 5e-7;
    let grid = Grid::new(128, 5e-6, 0.0)?;
    let k = |e: ElementSpec| kernel_of(&e, &grid, &grid);
    let arm1 = cascade(
        grid,
        &[
            k(ElementSpec::FreeSpace { distance: 0.05, wavelength: lambda })?,
            k(ElementSpec::Mask(Profile::StepEdge { x0: 0.0 }.sample(&grid)?))?,
        ],
    )?;
    let arm2 = k(ElementSpec::ThinLens { focal_length: 0.1, wavelength: lambda })?;
    let a = SinglePhotonPure::from_amplitude(grid, Profile::Gaussian { waist: 1e-4, center: 0.0 }.sample(&grid)?)?;
    let b = SinglePhotonPure::from_amplitude(grid, Profile::Gaussian { waist: 2e-4, center: 3e-5 }.sample(&grid)?)?;
    let state = factorizable(&a, &b);
    println!("Schmidt number {:.6}", schmidt_spectrum(&state).participation);
    for (arm, sys) in [(Arm::One, &arm1), (Arm::Two, &arm2)] {
        let p = biphoton_singles(&state, sys, arm)?;
        let pbar = biphoton_marginal(&state, &arm1, &arm2, arm)?;
        println!("arm {}: max |pbar - p| / max p = {:.2e}", arm.index(), relative_linf(pbar.values(), p.values()));
    }
    Ok(())
}
