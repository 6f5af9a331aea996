//! Build optical kernels, cascade them and check a Gaussian beam against the
//! paraxial spreading law.

use twophoton::optics::{cascade, kernel_of, unitarity_defect, ElementSpec};
use twophoton::{Grid, Profile};

fn main() -> twophoton::Result<()> {
    let lambda = 5e-7;
    let grid = Grid::new(256, 2e-6, 0.0)?;
    let w0 = 2e-5;
    let beam = Profile::Gaussian { waist: w0, center: 0.0 }.sample(&grid)?;
    let zr = std::f64::consts::PI * w0 * w0 / lambda;

    println!("{:>10} {:>14} {:>14}", "d (mm)", "w numeric", "w paraxial");
    for d in [2.5e-3, 5e-3, 1e-2, 2e-2] {
        let k = kernel_of(&ElementSpec::FreeSpace { distance: d, wavelength: lambda }, &grid, &grid)?;
        let out = k.apply(&beam)?;
        let i: Vec<f64> = out.iter().map(|z| z.norm_sqr()).collect();
        let total: f64 = i.iter().sum();
        let var = grid.points().iter().zip(&i).map(|(x, v)| x * x * v).sum::<f64>() / total;
        let w = 2.0 * var.sqrt();
        println!("{:>10.2} {:>14.4e} {:>14.4e}", d * 1e3, w, w0 * (1.0 + (d / zr).powi(2)).sqrt());
    }

    // A 4f relay: two Fourier systems in a row flip the field.
    let f = grid.dx() * grid.dx() * grid.n() as f64 / lambda;
    let fourier = kernel_of(&ElementSpec::FourierSystem { focal_length: f, wavelength: lambda }, &grid, &grid)?;
    let relay = cascade(grid, [&fourier, &fourier])?;
    println!("fourier system f = {f:.4e} m, unitarity defect {:.2e}", unitarity_defect(&fourier)?);
    println!("relay unitarity defect {:.2e}", unitarity_defect(&relay)?);
    Ok(())
}
