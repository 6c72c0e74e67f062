//! Truncated Fourier fields in θ: products without aliasing, Sobolev norms and
//! the Parseval normalisation.

use std::f64::consts::PI;

use zakharov_lab::spectral::{dealiased_grid_size, l2_norm, product, sobolev_norm, FourierField};
use zakharov_lab::Complex64;

fn main() -> zakharov_lab::Result<()> {
    let p = 8;
    // cos θ + ½ sin 3θ
    let a = FourierField::from_fn(p, true, |q| match q {
        1 | -1 => Complex64::new(0.5, 0.0),
        3 => Complex64::new(0.0, -0.25),
        -3 => Complex64::new(0.0, 0.25),
        _ => Complex64::new(0.0, 0.0),
    });
    let b = FourierField::from_fn(p, false, |q| if q == 2 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });

    println!("product grid for P = {p}: {} points", dealiased_grid_size(p));
    let ab = product(&a, &b)?;
    for (q, c) in ab.modes().filter(|(_, c)| c.norm() > 1e-14) {
        println!("  (a·b)^[{q:+}] = {c:.4}");
    }

    let l2 = l2_norm(&a);
    let mean_square = (0..1000).map(|j| a.eval(2.0 * PI * j as f64 / 1000.0).norm_sqr()).sum::<f64>() / 1000.0;
    println!("‖a‖_L² = {l2:.12}, √(2π · mean |a|²) = {:.12}", (2.0 * PI * mean_square).sqrt());
    for s in 0..=3 {
        println!("‖a‖_H^{s} = {:.6}", sobolev_norm(&a, s as f64));
    }
    Ok(())
}
