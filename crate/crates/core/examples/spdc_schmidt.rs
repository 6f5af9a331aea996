//! Schmidt number of the down-conversion amplitude across phase-matching widths.

use twophoton::sources::{schmidt_spectrum, spdc_amplitude, SpdcParams};
use twophoton::{Grid, Profile};

fn main() -> twophoton::Result<()> {
    let grid = Grid::new(192, 1e-6, 0.0)?;
    let w = 12e-6;
    let pump = Profile::Gaussian { waist: w, center: 0.0 }.sample(&grid)?;
    println!("{:>10} {:>10} {:>10} {:>10}", "b / w", "K", "K model", "entropy");
    for k in 0..8 {
        let b = 4.0 * w / 2f64.powi(k);
        let s = schmidt_spectrum(&spdc_amplitude(&SpdcParams { pump: pump.clone(), pm_width: b }, &grid)?);
        let r = ((w * w + b * b) / (b * b)).sqrt();
        println!("{:>10.4} {:>10.4} {:>10.4} {:>10.4}", b / w, s.participation, 0.5 * (r + 1.0 / r), s.entropy);
    }
    Ok(())
}
