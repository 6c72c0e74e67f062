//! Fitted growth rate of the density, for the exact mode and for the full
//! evolution from δ·Uᵃ(0), at two field strengths.

use zakharov_lab::experiments::{run_growth_fit, ExperimentConfig};
use zakharov_lab::Complex64;

fn main() -> zakharov_lab::Result<()> {
    let cfg = ExperimentConfig::default();
    for amp in [1.0, 2.0] {
        for k in [64u64, 256] {
            let g = run_growth_fit(&cfg, k, Complex64::new(amp, 0.0))?;
            println!(
                "|Ē| = {amp}, k = {k:3}: σ = {:8.4}, σ/√k = {:.4}, linear γ/σ = {:.6}, full γ/σ = {}",
                g.sigma,
                g.sigma / (k as f64).sqrt(),
                g.linear_ratio(),
                g.nonlinear_ratio().map_or("n/a".into(), |r| format!("{r:.6}"))
            );
        }
    }
    Ok(())
}
