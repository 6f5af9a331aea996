//! Entangled versus classically correlated pairs in a ghost-diffraction
//! layout: slits and a far-field pinhole before the bucket in arm 1, the far
//! field scanned in arm 2.

use twophoton::measure::{correlated_marginal, entangled_marginal_closed, image_metrics};
use twophoton::optics::{cascade, kernel_of, ElementSpec};
use twophoton::sources::{correlated_from_intensity, entangled_delta};
use twophoton::{Arm, Grid, Profile, SinglePhotonPure};

fn main() -> twophoton::Result<()> {
    let lambda = 5e-7;
    let grid = Grid::new(256, 1e-5, 0.0)?;
    let f = grid.dx() * grid.dx() * grid.n() as f64 / lambda;
    let k = |e: ElementSpec| kernel_of(&e, &grid, &grid);
    let slits = k(ElementSpec::Mask(
        Profile::DoubleSlit { width: 4e-5, separation: 1.6e-4, center: 0.0 }.sample(&grid)?,
    ))?;
    let fourier = k(ElementSpec::FourierSystem { focal_length: f, wavelength: lambda })?;
    let pinhole = k(ElementSpec::Mask(Profile::Pinhole { at: 5e-6 }.sample(&grid)?))?;
    let arm1 = cascade(grid, [&slits, &fourier, &pinhole])?;
    let arm2 = fourier.clone();

    let phi = SinglePhotonPure::from_amplitude(grid, Profile::Gaussian { waist: 5e-4, center: 0.0 }.sample(&grid)?)?;
    let entangled = entangled_marginal_closed(&phi, &arm2, &arm1)?;
    let correlated = correlated_marginal(&correlated_from_intensity(&phi.intensity(), &grid)?, &arm2, &arm1)?;

    let region = 112..144;
    let ve = image_metrics(&entangled, region.clone())?.visibility;
    let vc = image_metrics(&correlated, region)?.visibility;
    println!("gated far-field fringe visibility, entangled:  {ve:.4}");
    println!("gated far-field fringe visibility, correlated: {vc:.2e}");
    let singles = twophoton::measure::biphoton_singles(&entangled_delta(&phi), &arm2, Arm::Two)?;
    println!("ungated singles visibility, entangled:         {:.2e}", image_metrics(&singles, 112..144)?.visibility);
    Ok(())
}
