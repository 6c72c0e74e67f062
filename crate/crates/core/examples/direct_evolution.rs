//! Split-step evolution of the full system from a small multiple of the
//! unstable mode, with a sinh fit of the density and a norm trace on stdout.

use num_rational::Ratio;
use zakharov_lab::linear::build_unstable_mode;
use zakharov_lab::nonlinear::{evolve_direct, fit_sinh_rate, norm_trace, write_norm_trace};
use zakharov_lab::spectral::l2_norm;
use zakharov_lab::Complex64;

fn main() -> zakharov_lab::Result<()> {
    let k = 64;
    let delta = 1e-4;
    let mode = build_unstable_mode(k, Complex64::new(1.0, 0.0), Ratio::from_integer(1))?;
    let sigma = mode.sigma();
    let state0 = mode.state(0.0, 4).scale(delta);
    let traj = evolve_direct(mode.spectrum(), &state0, 4.0 / sigma, 0.005 / k as f64, 1e6)?;

    let (t, y): (Vec<f64>, Vec<f64>) = traj
        .states
        .iter()
        .filter(|s| s.t >= 1.0 / sigma && s.t <= 3.0 / sigma)
        .map(|s| (s.t, l2_norm(&s.n)))
        .unzip();
    let fit = fit_sinh_rate(&t, &y, 0.1 * sigma, 10.0 * sigma);
    if let Some(f) = &fit {
        println!("σ = {sigma:.6}, fitted rate = {:.6} on [1/σ, 3/σ], rms = {:.1e}", f.gamma, f.rms);
    }

    let rows = norm_trace(&traj, k, 1.0, sigma, fit.as_ref());
    let every = rows.len() / 20;
    let sampled: Vec<_> = rows.iter().step_by(every).copied().collect();
    write_norm_trace(&sampled, std::io::stdout())?;
    Ok(())
}
