//! The exponentially growing solution of the linearised system: its density
//! grows like √π sinh(σt) and its Schrödinger coefficients scale like 1/σ.

use std::f64::consts::PI;

use num_rational::Ratio;
use zakharov_lab::linear::build_unstable_mode;
use zakharov_lab::spectral::l2_norm;
use zakharov_lab::Complex64;

fn main() -> zakharov_lab::Result<()> {
    let k = 128;
    let mode = build_unstable_mode(k, Complex64::new(1.0, 0.0), Ratio::from_integer(1))?;
    let sigma = mode.sigma();
    println!("k = {k}, σ = {sigma:.6}, frequency = {:.6}", mode.spectrum().frequency());

    let co = mode.coefficients();
    println!("e₊₁ = {:.5} e^(iλ₄t) + {:.5} e^(iλ₃t)", co[0][0], co[0][1]);
    println!("e₋₁ = {:.5} e^(-i conj(λ₄)t) + {:.5} e^(-i conj(λ₃)t)", co[1][0], co[1][1]);
    println!("−i/(4σ) = {:.5}", Complex64::new(0.0, -0.25 / sigma));

    println!("\n{:>8} {:>16} {:>16}", "σt", "‖n‖_L²", "√π sinh σt");
    for j in 0..=6 {
        let t = j as f64 * 0.5 / sigma;
        let n = l2_norm(&mode.state(t, 2).n);
        println!("{:>8.2} {n:>16.10} {:>16.10}", sigma * t, PI.sqrt() * (sigma * t).sinh());
    }
    Ok(())
}
