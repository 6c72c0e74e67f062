//! Inverting the linearised operator with zero Cauchy data for a forcing that
//! is localised in time, then writing the trajectory as CSV.

use std::f64::consts::PI;

use num_rational::Ratio;
use zakharov_lab::dispersion::spectrum_for;
use zakharov_lab::linear::{Forcing, LkInverse, TimeGrid};
use zakharov_lab::spectral::{l2_norm, FourierField};
use zakharov_lab::Complex64;

fn main() -> zakharov_lab::Result<()> {
    let k = 32;
    let truncation = 3;
    let spectrum = spectrum_for(k, Complex64::new(1.0, 0.0), Ratio::from_integer(1))?;
    let grid = TimeGrid::with_max_step(1.0, 1e-3);

    // a Schrödinger pulse in harmonics 1 and 2, switched off after t = 0.2
    let pulse = |t: f64| if t < 0.2 { (PI * t / 0.2).sin().powi(2) } else { 0.0 };
    let f: Vec<FourierField> = grid
        .times()
        .map(|t| {
            FourierField::from_fn(truncation, false, |p| match p {
                1 => Complex64::new(pulse(t), 0.0),
                2 => Complex64::new(0.0, 0.5 * pulse(t)),
                _ => Complex64::new(0.0, 0.0),
            })
        })
        .collect();
    let g = vec![FourierField::zeros(truncation, true); grid.len()];
    let forcing = Forcing::new(grid, f, g)?;

    let lk = LkInverse::new(&spectrum, truncation)?;
    let u = lk.apply(&forcing)?;
    for j in (0..grid.len()).step_by(grid.steps / 5) {
        let s = &u.states[j];
        println!("t = {:.2}: ‖e‖ = {:.4e}, ‖n‖ = {:.4e}", s.t, l2_norm(&s.e), l2_norm(&s.n));
    }
    println!("reality drift of n: {:.1e}", u.reality_drift());

    let path = std::env::temp_dir().join("linear_solve.csv");
    u.write_csv(std::fs::File::create(&path).map_err(|e| zakharov_lab::Error::Io {
        path: path.clone(),
        source: e,
    })?)?;
    println!("trajectory written to {}", path.display());
    Ok(())
}
