//! Eigenvalues of the first-harmonic mode matrix as k grows, next to the
//! τ-roots of the dispersion polynomial and the √k growth law.

use num_rational::Ratio;
use zakharov_lab::dispersion::{find_k0, spectrum_for, tau_roots};
use zakharov_lab::Complex64;

fn main() -> zakharov_lab::Result<()> {
    let e_bar = Complex64::new(1.0, 0.0);
    let z = Ratio::from_integer(1);
    if let Some(k0) = find_k0(e_bar, z, 1000) {
        println!("first unstable k: {k0}");
    }
    println!("{:>6} {:>14} {:>12} {:>24} {:>10} {:>10}", "k", "λ₁", "λ₂", "λ₃", "σ", "σ/√(k/2)");
    for k in [16u64, 64, 256, 1024, 4096] {
        let rep = spectrum_for(k, e_bar, z)?;
        let l = rep.lambdas;
        println!(
            "{k:>6} {:>14.3} {:>12.3} {:>24.5} {:>10.5} {:>10.6}",
            l[0].re,
            l[1].re,
            l[2],
            rep.sigma,
            rep.sigma / (k as f64 / 2.0).sqrt()
        );
        for w in &rep.warnings {
            println!("       warning: {w}");
        }
    }

    let k = 64;
    let rep = spectrum_for(k, e_bar, z)?;
    println!("\nτ-roots at k = {k}, m = {}:", rep.m);
    for r in tau_roots(-rep.m, k as f64, e_bar.norm_sqr())? {
        println!("  {r:.8}");
    }
    Ok(())
}
