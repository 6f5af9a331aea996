//! Two weak scatterers at different depths of a dark-field arm read out by a
//! bucket; an arm-2 lens focused on either plane images that scatterer.

use num_complex::Complex64;
use twophoton::measure::{correlated_marginal, entangled_marginal_closed, image_metrics};
use twophoton::optics::{cascade, kernel_of, with_scatterers, ElementSpec, Kernel, Scatterer};
use twophoton::sources::correlated_from_intensity;
use twophoton::{Grid, Profile, SinglePhotonPure};

fn main() -> twophoton::Result<()> {
    let lambda = 5e-7;
    let grid = Grid::new(256, 4e-6, 0.0)?;
    let k = |e: ElementSpec| kernel_of(&e, &grid, &grid);
    let drift = |d: f64| k(ElementSpec::FreeSpace { distance: d, wavelength: lambda });
    let eps = Complex64::new(0.05, 0.0);

    let dark = Kernel::zeros(grid, grid);
    let arm1 = with_scatterers(&drift(0.01)?, &drift(0.03)?, &[Scatterer { position: -2e-4, strength: eps }], &dark)?;
    let arm1 = with_scatterers(&drift(0.04)?, &Kernel::identity(grid), &[Scatterer { position: 2e-4, strength: eps }], &arm1)?;

    let waist = 8e-5;
    let phi = SinglePhotonPure::from_amplitude(grid, Profile::Gaussian { waist, center: 0.0 }.sample(&grid)?)?;
    let corr = correlated_from_intensity(&phi.intensity(), &grid)?;

    for (depth, region) in [(0.01, 128..256), (0.04, 0..128)] {
        let focus = cascade(grid, &[k(ElementSpec::ThinLens { focal_length: depth / 2.0, wavelength: lambda })?, drift(depth)?])?;
        let e = image_metrics(&entangled_marginal_closed(&phi, &focus, &arm1)?, region.clone())?;
        let c = image_metrics(&correlated_marginal(&corr, &focus, &arm1)?, region)?;
        let limit = 2.0 * (2.0 * 2f64.ln()).sqrt() * lambda * depth / (2.0 * std::f64::consts::PI * waist);
        println!(
            "focus at {:>4.0} mm: entangled FWHM {:6.1} um at {:+.0} um, correlated FWHM {:6.1} um, limit {:5.1} um",
            depth * 1e3,
            e.fwhm * 1e6,
            e.peak_position * 1e6,
            c.fwhm * 1e6,
            limit * 1e6
        );
    }
    Ok(())
}
