//! Double-slit fringes of a single photon as its coherence length shrinks.

use twophoton::measure::{image_metrics, single_coherent, single_partially_coherent};
use twophoton::optics::{compose, kernel_of, ElementSpec};
use twophoton::{CMatrix, Grid, Profile, SinglePhotonMixed, SinglePhotonPure};

fn main() -> twophoton::Result<()> {
    let lambda = 5e-7;
    let grid = Grid::new(256, 1e-5, 0.0)?;
    let f = grid.dx() * grid.dx() * grid.n() as f64 / lambda;
    let slits = Profile::DoubleSlit { width: 4e-5, separation: 1.6e-4, center: 0.0 }.sample(&grid)?;
    let system = compose(
        &kernel_of(&ElementSpec::FourierSystem { focal_length: f, wavelength: lambda }, &grid, &grid)?,
        &kernel_of(&ElementSpec::Mask(slits), &grid, &grid)?,
    )?;
    let amp = Profile::Gaussian { waist: 5e-4, center: 0.0 }.sample(&grid)?;

    let pure = SinglePhotonPure::from_amplitude(grid, amp.clone())?;
    let p = single_coherent(&pure, &system)?;
    println!("coherent           visibility {:.3}", image_metrics(&p, 112..144)?.visibility);

    let x = grid.points();
    for l in [4e-4, 2e-4, 1e-4, 5e-5, 2e-5] {
        let gamma = CMatrix::from_fn(x.len(), x.len(), |i, j| {
            amp[i] * amp[j].conj() * (-(x[i] - x[j]).powi(2) / (2.0 * l * l)).exp()
        });
        let mixed = SinglePhotonMixed::from_coherence(grid, gamma)?;
        let p = single_partially_coherent(&mixed, &system)?;
        println!("l = {:>6.1} um   visibility {:.3}", l * 1e6, image_metrics(&p, 112..144)?.visibility);
    }
    Ok(())
}
