//! Reference computations that share no code path with the library: an
//! adaptive Dormand–Prince integrator, a plain scaling-and-squaring matrix
//! exponential, direct-sum Fourier quadrature, closed-form symbols and
//! manufactured solutions.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zakharov_lab::dispersion::spectrum_for;
use zakharov_lab::linalg::{Mat4, Vec4};
use zakharov_lab::linear::{
    apply_lk_inverse, build_unstable_mode, choose_m, solve_p1_duhamel, solve_pge2, Forcing, ForcingBlock, TimeGrid,
};
use zakharov_lab::nonlinear::{bilinear_n, DirectIntegrator};
use zakharov_lab::spectral::{l2_norm, FourierField, StateU};

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_c(r: &mut impl Rng, amp: f64) -> C {
    c(r.random_range(-amp..amp), r.random_range(-amp..amp))
}

/// Random field with coefficients decaying like `(1+|p|)^{-decay}`.
pub fn random_field(r: &mut impl Rng, truncation: usize, is_real: bool, decay: f64) -> FourierField {
    let coeffs: Vec<C> = (-(truncation as i64)..=truncation as i64)
        .map(|p| random_c(r, 1.0) * (1.0 + p.abs() as f64).powf(-decay))
        .collect();
    FourierField::from_coeffs(coeffs, is_real).unwrap()
}

pub fn random_state(r: &mut impl Rng, truncation: usize) -> StateU {
    StateU::new(
        random_field(r, truncation, false, 1.0),
        random_field(r, truncation, true, 1.0),
        random_field(r, truncation, true, 1.0),
        0.0,
    )
    .unwrap()
}

/// Dormand–Prince 5(4) with step-size control; the returned states are at
/// `outputs` (increasing, starting at or after `t0`), reached exactly by
/// shortening the step.
pub fn dopri5<F>(f: F, t0: f64, y0: &[C], outputs: &[f64], rtol: f64, atol: f64) -> Vec<Vec<C>>
where
    F: Fn(f64, &[C]) -> Vec<C>,
{
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const CS: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const BH: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = 1e-4;
    let mut out = Vec::with_capacity(outputs.len());
    for &target in outputs {
        while t < target {
            let last = t + h >= target;
            let step = if last { target - t } else { h };
            let mut k: Vec<Vec<C>> = Vec::with_capacity(7);
            k.push(f(t, &y));
            for s in 1..7 {
                let mut ys = y.clone();
                for (j, kj) in k.iter().enumerate() {
                    let a = A[s - 1][j];
                    if a != 0.0 {
                        for i in 0..n {
                            ys[i] += kj[i] * (step * a);
                        }
                    }
                }
                k.push(f(t + CS[s] * step, &ys));
            }
            let mut ynew = y.clone();
            let mut err: f64 = 0.0;
            for i in 0..n {
                let mut hi = C::new(0.0, 0.0);
                let mut lo = C::new(0.0, 0.0);
                for s in 0..7 {
                    hi += k[s][i] * B[s];
                    lo += k[s][i] * BH[s];
                }
                ynew[i] += hi * step;
                let sc = atol + rtol * y[i].norm().max(ynew[i].norm());
                err = err.max(((hi - lo) * step).norm() / sc);
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = ynew;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !(last && err <= 1.0) {
                h = step * fac;
            }
        }
        out.push(y.clone());
    }
    out
}

/// Largest eigenvalue modulus proxy: the 1-norm.
fn norm1(m: &Mat4) -> f64 {
    (0..4)
        .map(|j| m.column(j).iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(M)` from a 30-term Taylor series of `M / 2^q` with `‖M‖/2^q ≤ 2⁻⁸`.
pub fn expm_series(m: &Mat4) -> Mat4 {
    let mut q = 0;
    while norm1(m) / 2f64.powi(q) > 2f64.powi(-8) {
        q += 1;
    }
    let a = m.map(|x| x / 2f64.powi(q));
    let mut sum = Mat4::identity();
    let mut term = Mat4::identity();
    for j in 1..=30 {
        term = term * a / C::new(j as f64, 0.0);
        sum += term;
    }
    for _ in 0..q {
        sum = sum * sum;
    }
    sum
}

/// Coefficient `p` of the function sampled by `values` on `θ_j = 2πj/M`, by
/// direct summation.
pub fn dft_coeff(values: &[C], p: i64) -> C {
    let m = values.len() as f64;
    values
        .iter()
        .enumerate()
        .map(|(j, v)| v * C::from_polar(1.0, -2.0 * PI * p as f64 * j as f64 / m))
        .sum::<C>()
        / m
}

/// Values of a field on `M` equispaced points by direct summation.
pub fn sample(v: &FourierField, m: usize) -> Vec<C> {
    (0..m).map(|j| v.eval(2.0 * PI * j as f64 / m as f64)).collect()
}

/// `P(τ, ζ, ξ) = ((τ + ζ)² − ξ⁴)(τ² − ξ²) − 2|Ē|²ξ⁴`, multiplied out as
/// written rather than factored.
pub fn symbol_direct(tau: C, zeta: f64, xi: f64, e2: f64) -> C {
    let a = (tau + zeta) * (tau + zeta) - xi.powi(4);
    let b = tau * tau - xi * xi;
    a * b - 2.0 * e2 * xi.powi(4)
}

/// `A_p` written out entry by entry.
pub fn block_matrix_direct(k: f64, m: f64, e: C, p: f64) -> Mat4 {
    let z = C::new(0.0, 0.0);
    let kp = k * p;
    Mat4::new(
        C::new(m * p - k * k * p * p, 0.0),
        z,
        -e,
        z,
        z,
        C::new(m * p + k * k * p * p, 0.0),
        e.conj(),
        z,
        z,
        z,
        z,
        C::new(kp, 0.0),
        e.conj() * kp,
        e * kp,
        C::new(kp, 0.0),
        z,
    )
}

pub fn vec_to_slice(v: &Vec4) -> Vec<C> {
    v.iter().copied().collect()
}

pub fn sup_rel(a: &[Vec<C>], b: &[Vec<C>]) -> f64 {
    let scale = b.iter().flat_map(|v| v.iter().map(|x| x.norm())).fold(0.0, f64::max);
    let diff = a
        .iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).norm()))
        .fold(0.0, f64::max);
    diff / scale
}

/// Prints and returns whether a criterion passed.
pub fn report(name: &str, ok: bool, detail: String) -> bool {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

/// `Σ_j a_j e^{iω_j t} + b t`.
#[derive(Clone)]
pub struct Signal {
    terms: Vec<(C, f64)>,
    slope: C,
}

impl Signal {
    pub fn random(r: &mut impl Rng) -> Self {
        Signal {
            terms: (0..3).map(|_| (random_c(r, 1.0), r.random_range(-2.0..2.0))).collect(),
            slope: random_c(r, 1.0),
        }
    }

    pub fn at(&self, t: f64) -> C {
        self.terms.iter().map(|(a, w)| a * C::from_polar(1.0, w * t)).sum::<C>() + self.slope * t
    }
}

/// Compares one block solve against the adaptive Runge–Kutta reference. The
/// reference error is about `100 · rtol` for the fast `p ≥ 2` blocks.
pub fn block_vs_rk(k: u64, p: u64, seed: u64) -> f64 {
    block_vs_rk_with(k, p, seed, 4000, 1e-13)
}

pub fn block_vs_rk_with(k: u64, p: u64, seed: u64, steps: usize, rtol: f64) -> f64 {
    let mut r = rng(seed);
    let rep = spectrum_for(k, c(1.0, 0.0), Ratio::from_integer(1)).unwrap();
    let (f, ft, g) = (Signal::random(&mut r), Signal::random(&mut r), Signal::random(&mut r));
    let grid = TimeGrid::new(1.0, steps);
    let block = ForcingBlock {
        p,
        f_hat: grid.times().map(|t| f.at(t)).collect(),
        f_tilde: grid.times().map(|t| ft.at(t)).collect(),
        g_hat: grid.times().map(|t| g.at(t)).collect(),
    };
    let got = if p == 1 {
        solve_p1_duhamel(&rep, &block, &grid).unwrap()
    } else {
        solve_pge2(k, rep.m, rep.e_bar, p, &block, &grid).unwrap()
    };
    let a = block_matrix_direct(k as f64, rep.m, rep.e_bar, p as f64);
    let kp = (k * p) as f64;
    let rhs = |t: f64, y: &[C]| -> Vec<C> {
        let force = [f.at(t), ft.at(t), c(0.0, 0.0), g.at(t) / kp];
        (0..4)
            .map(|i| {
                let av: C = (0..4).map(|j| a[(i, j)] * y[j]).sum();
                c(0.0, 1.0) * (av - force[i])
            })
            .collect()
    };
    let stride = steps / 40;
    let outputs: Vec<f64> = grid.times().skip(1).step_by(stride).collect();
    let want = dopri5(rhs, 0.0, &[c(0.0, 0.0); 4], &outputs, rtol, rtol * 1e-3);
    let got: Vec<Vec<C>> = (1..grid.len()).step_by(stride).map(|j| vec_to_slice(&got.states[j])).collect();
    sup_rel(&got, &want)
}

/// A prescribed `U` with vanishing Cauchy data and its image `L_k U`.
pub struct Manufactured {
    k: u64,
    m: f64,
    e: C,
    a: Vec<(C, f64)>,
    b: Vec<(C, f64)>,
}

impl Manufactured {
    pub fn new(k: u64, m: f64, e: C, truncation: usize, r: &mut impl Rng) -> Self {
        let n = 2 * truncation + 1;
        Manufactured {
            k,
            m,
            e,
            a: (0..n).map(|_| (random_c(r, 1.0), r.random_range(-3.0..3.0))).collect(),
            b: (0..truncation).map(|_| (random_c(r, 1.0), r.random_range(-3.0..3.0))).collect(),
        }
    }

    fn p_max(&self) -> i64 {
        self.b.len() as i64
    }

    /// `ê_p = a t e^{iωt}` and its derivative.
    pub fn e_hat(&self, p: i64, t: f64) -> (C, C) {
        let (a, w) = self.a[(p + self.p_max()) as usize];
        let ph = C::from_polar(1.0, w * t);
        (a * t * ph, a * ph * (1.0 + c(0.0, w * t)))
    }

    /// `n̂_p` (p ≥ 1) `= b t² cos(νt)` with first and second derivatives.
    pub fn n_hat(&self, p: i64, t: f64) -> (C, C, C) {
        if p == 0 {
            return (c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        }
        let (b, nu) = self.b[(p.abs() - 1) as usize];
        let (cs, sn) = ((nu * t).cos(), (nu * t).sin());
        let v = (b * t * t * cs, b * (2.0 * t * cs - nu * t * t * sn), b * (2.0 * cs - 4.0 * nu * t * sn - nu * nu * t * t * cs));
        if p > 0 {
            v
        } else {
            (v.0.conj(), v.1.conj(), v.2.conj())
        }
    }

    pub fn forcing_at(&self, t: f64) -> (FourierField, FourierField) {
        let pm = self.p_max() as usize;
        let k2 = (self.k * self.k) as f64;
        let f = FourierField::from_fn(pm, false, |p| {
            let (e, et) = self.e_hat(p, t);
            let pf = p as f64;
            c(0.0, 1.0) * et + (self.m * pf - k2 * pf * pf) * e - self.e * self.n_hat(p, t).0
        });
        let g = FourierField::from_fn(pm, true, |p| {
            let pf = p as f64;
            let (n, _, ntt) = self.n_hat(p, t);
            let coupling = self.e.conj() * self.e_hat(p, t).0 + self.e * self.e_hat(-p, t).0.conj();
            ntt + k2 * pf * pf * (n + coupling)
        });
        (f, g)
    }
}

/// Relative sup-norm error of `L_k⁻¹` on a random manufactured solution with
/// harmonics up to 3, over `t ∈ [0, 1]` on `steps` steps.
pub fn manufactured_error(k: u64, steps: usize, r: &mut impl Rng) -> f64 {
    let pt = 3usize;
    let rep = spectrum_for(k, c(0.8, 0.3), Ratio::from_integer(1)).unwrap();
    let ms = Manufactured::new(k, rep.m, rep.e_bar, pt, r);
    let grid = TimeGrid::new(1.0, steps);
    let (f, g): (Vec<_>, Vec<_>) = grid.times().map(|t| ms.forcing_at(t)).unzip();
    let u = apply_lk_inverse(&rep, &Forcing::new(grid, f, g).unwrap()).unwrap();
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (j, s) in u.states.iter().enumerate() {
        let t = grid.t(j);
        for p in -(pt as i64)..=pt as i64 {
            let (e, et) = ms.e_hat(p, t);
            let (n, nt, _) = ms.n_hat(p, t);
            for (got, want) in [(s.e.coeff(p), e), (u.e_t[j].coeff(p), et), (s.n.coeff(p), n), (s.n_t.coeff(p), nt)] {
                err = err.max((got - want).norm());
                scale = scale.max(want.norm());
            }
        }
    }
    err / scale
}

/// Largest relative residual of the unstable mode in the first-harmonic
/// equations on 61 points of `[0, 3/σ]`, and of `v = −i k⁻¹ ∂t n̂₁`.
pub fn unstable_mode_residual(k: u64) -> (f64, f64) {
    let mode = build_unstable_mode(k, c(1.0, 0.0), Ratio::from_integer(1)).unwrap();
    let rep = mode.spectrum();
    let (m, e, kf) = (rep.m, rep.e_bar, k as f64);
    let sigma = mode.sigma();
    let mut worst: f64 = 0.0;
    let mut worst_v: f64 = 0.0;
    for j in 0..=60 {
        let t = 3.0 / sigma * j as f64 / 60.0;
        let v = mode.v1(t);
        let dv = mode.v1_rate(t);
        let ddv = mode.v1_accel(t);
        // harmonic +1 and −1 of the Schrödinger equation, harmonic 1 of the wave equation
        let (e1, e1t, n1) = (v[0], dv[0], v[2]);
        let (em1, em1t) = (v[1].conj(), dv[1].conj());
        let r1 = c(0.0, 1.0) * e1t + (m - kf * kf) * e1 - e * n1;
        let rm1 = c(0.0, 1.0) * em1t + (-m - kf * kf) * em1 - e * n1.conj();
        let rw = ddv[2] + kf * kf * (n1 + e.conj() * e1 + e * em1.conj());
        let scale = (kf * kf * (e1.norm() + em1.norm()) + n1.norm() + e1t.norm()).max(kf * kf * n1.norm() + ddv[2].norm());
        for res in [r1, rm1, rw] {
            worst = worst.max(res.norm() / scale);
        }
        if v[3].norm() > 0.0 {
            worst_v = worst_v.max((v[3] - c(0.0, -1.0) * dv[2] / kf).norm() / v[3].norm());
        }
    }
    (worst, worst_v)
}

/// Closed form of `P` on the resonant curve `ζ = −ξ − ξ²`, `τ = ξ(1 + s)`.
pub fn resonant_form(xi: f64, s: f64, e2: f64) -> f64 {
    -xi.powi(5) * (s * s * (2.0 - s / xi) * (2.0 + s) + 2.0 * e2 / xi)
}

/// Sample point on the resonant curve with `ξ` a multiple of 1/64 in
/// `[2, 1000]` and `s` a multiple of 1/1024 in `[−1, 1]`, so that `ζ` and `τ`
/// are exact in binary.
pub fn resonant_sample(r: &mut impl Rng) -> (f64, f64, f64) {
    let xi = r.random_range(128..=64_000) as f64 / 64.0;
    let s = r.random_range(-1024..=1024) as f64 / 1024.0;
    let e2 = r.random_range(0.0..4.0);
    (xi, s, e2)
}

/// Relative error of `𝒩_k(U, V)` against pointwise products on a grid that
/// resolves every product exactly, followed by direct Fourier sums.
pub fn bilinear_quadrature_error(u: &StateU, v: &StateU, k: u64) -> f64 {
    let p = u.truncation();
    let m = 4 * p + 5;
    let (f, g) = bilinear_n(u, v, k).unwrap();
    let (eu, nu, ev, nv) = (sample(&u.e, m), sample(&u.n, m), sample(&v.e, m), sample(&v.n, m));
    let fq: Vec<C> = (0..m).map(|j| 0.5 * (nu[j] * ev[j] + nv[j] * eu[j])).collect();
    let rq: Vec<C> = (0..m).map(|j| c((eu[j].conj() * ev[j]).re, 0.0)).collect();
    let k2 = (k * k) as f64;
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for q in -(p as i64)..=p as i64 {
        let want_f = dft_coeff(&fq, q);
        let want_g = dft_coeff(&rq, q) * (-((k as i64 * q).pow(2) as f64));
        err = err.max((f.coeff(q) - want_f).norm()).max((g.coeff(q) - want_g).norm() / k2);
        scale = scale.max(want_f.norm()).max(want_g.norm() / k2);
    }
    err / scale
}

fn m_of(k: u64) -> f64 {
    let m = choose_m(k, Ratio::from_integer(1)).m;
    *m.numer() as f64 / *m.denom() as f64
}

/// Terminal errors of the split-step integrator at `k = 3`, `Ē = 1` from a
/// moderate random state on `[0, 1]` for each step count, against a run with
/// `reference` steps; also the worst reality drift seen.
pub fn splitting_errors(step_counts: &[usize], reference: usize) -> (Vec<f64>, f64) {
    let mut r = rng(405);
    let (k, truncation) = (3, 4);
    let s0 = random_state(&mut r, truncation).scale(0.3);
    let mut drift: f64 = 0.0;
    let mut terminal = |steps: usize| {
        let integ = DirectIntegrator::new(k, m_of(k), c(1.0, 0.0), truncation, 1.0 / steps as f64);
        let run = integ.run(&s0, steps, 1e6).unwrap();
        drift = drift.max(run.trajectory.reality_drift());
        run.trajectory.last().clone()
    };
    let reference = terminal(reference);
    let errs = step_counts
        .iter()
        .map(|&n| {
            let s = terminal(n);
            s.e.sub(&reference.e).unwrap().max_abs() + s.n.sub(&reference.n).unwrap().max_abs()
        })
        .collect();
    (errs, drift)
}

/// Largest relative change of `‖e‖_{L²}` per unit time at `Ē = 0` from random
/// Schrödinger data and zero density, `k = 4`, over `[0, 2]`; also the
/// largest density reached and the worst reality drift.
pub fn mass_drift() -> (f64, f64, f64) {
    let mut r = rng(404);
    let k = 4;
    let integ = DirectIntegrator::new(k, m_of(k), c(0.0, 0.0), 6, 1e-3);
    let e = random_field(&mut r, 6, false, 2.0).scale_real(0.5);
    let s0 = StateU::new(e, FourierField::zeros(6, true), FourierField::zeros(6, true), 0.0).unwrap();
    let run = integ.run(&s0, 2000, 1e6).unwrap();
    let mass0 = l2_norm(&s0.e);
    let drift = run
        .trajectory
        .states
        .iter()
        .map(|st| (l2_norm(&st.e) - mass0).abs() / mass0)
        .fold(0.0, f64::max);
    let n_max = run.trajectory.states.iter().map(|st| st.n.max_abs()).fold(0.0, f64::max);
    (drift / run.trajectory.grid.t_end(), n_max, run.trajectory.reality_drift())
}
