//! Fixed point of u ↦ δ L⁻¹ N(Uᵃ + u) around the unstable mode, for a few
//! values of δ: the contraction ratio follows δ k^(-1/4) e^(σT).

use num_rational::Ratio;
use zakharov_lab::linear::{build_unstable_mode, LkInverse, TimeGrid};
use zakharov_lab::nonlinear::{e1_norm, picard_solve, PicardConfig};
use zakharov_lab::Complex64;

fn main() -> zakharov_lab::Result<()> {
    let k = 64;
    let mode = build_unstable_mode(k, Complex64::new(1.0, 0.0), Ratio::from_integer(1))?;
    let sigma = mode.sigma();
    let grid = TimeGrid::with_max_step(3.0 / sigma, 0.005 / k as f64);
    let ua = mode.trajectory(grid, 4);
    let lk = LkInverse::new(mode.spectrum(), 4)?;
    println!("k = {k}, T = 3/σ = {:.4}, {} steps, E¹(Uᵃ) = {:.4}", grid.t_end(), grid.steps, e1_norm(&ua, k, 1.0, sigma));

    for delta in [1e-6, 1e-4, 1e-2] {
        let cfg = PicardConfig {
            delta,
            ..PicardConfig::default()
        };
        let res = picard_solve(&lk, &ua, sigma, &cfg)?;
        println!("\nδ = {delta:e}, smallness δk^(-1/4)e^(σT) = {:.3e}", res.smallness);
        for w in &res.warnings {
            println!("  warning: {w}");
        }
        for r in &res.log {
            println!(
                "  iteration {}: E¹(u) = {:.6e}, increment = {:.2e}, ratio = {}",
                r.iteration,
                r.e1_norm,
                r.relative_increment,
                r.contraction_ratio.map_or("-".into(), |x| format!("{x:.2e}"))
            );
        }
    }
    Ok(())
}
