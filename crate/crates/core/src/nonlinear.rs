//! Quadratic nonlinearity, weighted trajectory norms, the Picard iteration
//! `u ↦ δ L_k⁻¹ N_k(Uᵃ + u)` and a split-step integrator of the full system.
//!
//! The nonlinearity is `N_k(U) = (n e, k²∂θ²|e|²)` and its symmetric bilinear
//! form is
//!
//! ```text
//! 𝒩_k(U, V) = (½(n_U e_V + n_V e_U), k²∂θ² Re(ē_U e_V)).
//! ```

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::{build_block_matrix, SpectrumReport};
use crate::error::{Error, Result};
use crate::experiments::fmt_float;
use crate::linalg::{expm, Mat4, Vec4};
use crate::linear::{Forcing, LkInverse, TimeGrid, Trajectory};
use crate::spectral::{l2_norm, product, second_theta_derivative, sobolev_norm, FourierField, StateU};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn half_sum(a: &FourierField, b: &FourierField) -> Result<FourierField> {
    a.axpy(Complex64::new(1.0, 0.0), b).map(|x| x.scale_real(0.5))
}

/// `Re(ē_u e_v)` as a real field.
fn real_inner(eu: &FourierField, ev: &FourierField) -> Result<FourierField> {
    let a = product(&eu.conj_field(), ev)?;
    let b = product(&ev.conj_field(), eu)?;
    let mut s = half_sum(&a, &b)?.into_real()?;
    s.symmetrize();
    Ok(s)
}

fn wave_forcing(k: u64, density: &FourierField) -> FourierField {
    let mut g = second_theta_derivative(density).scale_real((k * k) as f64);
    g.set(0, ZERO);
    g
}

/// `𝒩_k(U, V) = (f, g)`.
pub fn bilinear_n(u: &StateU, v: &StateU, k: u64) -> Result<(FourierField, FourierField)> {
    let f = half_sum(&product(&u.n, &v.e)?, &product(&v.n, &u.e)?)?;
    let g = wave_forcing(k, &real_inner(&u.e, &v.e)?);
    Ok((f, g))
}

/// `N_k(U) = (n e, k²∂θ²|e|²)`. Coincides bit for bit with `𝒩_k(U, U)`.
pub fn nonlinearity(u: &StateU, k: u64) -> Result<(FourierField, FourierField)> {
    bilinear_n(u, u, k)
}

/// `∂t f` for `f = ½(n_U e_V + n_V e_U)`, given `∂t e` of both arguments.
pub fn bilinear_f_rate(u: &StateU, u_et: &FourierField, v: &StateU, v_et: &FourierField) -> Result<FourierField> {
    let a = half_sum(&product(&u.n_t, &v.e)?, &product(&v.n_t, &u.e)?)?;
    let b = half_sum(&product(&u.n, v_et)?, &product(&v.n, u_et)?)?;
    a.add(&b)
}

/// Samples `𝒩_k(U(t_j), V(t_j))` on the shared grid, including `∂t f`.
pub fn bilinear_forcing(u: &Trajectory, v: &Trajectory, k: u64) -> Result<Forcing> {
    if u.grid != v.grid {
        return Err(Error::GridMismatch("bilinear arguments on different grids".into()));
    }
    let n = u.grid.len();
    let mut f = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    let mut f_t = Vec::with_capacity(n);
    for j in 0..n {
        let (a, b) = bilinear_n(&u.states[j], &v.states[j], k)?;
        f.push(a);
        g.push(b);
        f_t.push(bilinear_f_rate(&u.states[j], &u.e_t[j], &v.states[j], &v.e_t[j])?);
    }
    Forcing::new(u.grid, f, g)?.with_rate(f_t)
}

/// `N_k(U)` along a trajectory, without `∂t f` (what the Picard map needs).
fn nonlinear_forcing(w: &Trajectory, k: u64) -> Result<Forcing> {
    let mut f = Vec::with_capacity(w.grid.len());
    let mut g = Vec::with_capacity(w.grid.len());
    for s in &w.states {
        let (a, b) = nonlinearity(s, k)?;
        f.push(a);
        g.push(b);
    }
    Forcing::new(w.grid, f, g)
}

/// The time-weighted norms `E¹(T)`, `E²(T)` of a trajectory and `F²(T)` of its
/// nonlinearity `N_k(U)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorms {
    pub e1: f64,
    pub e2: f64,
    pub f2: f64,
    pub sigma: f64,
    pub k: u64,
    pub s: f64,
}

/// The six ingredients of `E¹`/`E²` at one time.
#[derive(Clone, Copy, Debug, Default)]
struct NormTerms {
    e1_hat: f64,
    e1_hat_t: f64,
    e_prime: f64,
    e_prime_t: f64,
    n: f64,
    n_t: f64,
}

fn split_first(e: &FourierField) -> (Complex64, FourierField) {
    let mut rest = e.clone();
    let c = rest.coeff(1);
    rest.set(1, ZERO);
    (c, rest)
}

fn norm_terms(state: &StateU, e_t: &FourierField, s: f64) -> NormTerms {
    let (e1, ep) = split_first(&state.e);
    let (e1t, ept) = split_first(e_t);
    NormTerms {
        e1_hat: e1.norm(),
        e1_hat_t: e1t.norm(),
        e_prime: sobolev_norm(&ep, s + 2.0),
        e_prime_t: sobolev_norm(&ept, s),
        n: sobolev_norm(&state.n, s),
        n_t: sobolev_norm(&state.n_t, s),
    }
}

fn e1_integrand(x: &NormTerms, k: f64) -> f64 {
    k.sqrt() * x.e1_hat + x.e1_hat_t / k.sqrt() + k.powf(0.75) * x.e_prime + x.e_prime_t / k.sqrt() + x.n + x.n_t / k
}

fn e2_integrand(x: &NormTerms, k: f64) -> f64 {
    k * x.e1_hat + x.e1_hat_t + k * x.e_prime + x.e_prime_t / k.powf(0.25) + k.sqrt() * x.n + x.n_t / k.sqrt()
}

/// `sup_t e^{−σt}{k^{1/2}|ê₁| + k^{−1/2}|∂t ê₁| + k^{3/4}‖e′‖_{H^{s+2}}
/// + k^{−1/2}‖∂t e′‖_{H^s} + ‖n‖_{H^s} + k^{−1}‖∂t n‖_{H^s}}`
/// with `e = ê₁e^{iθ} + e′`.
pub fn e1_norm(traj: &Trajectory, k: u64, s: f64, sigma: f64) -> f64 {
    let kf = k as f64;
    traj.states
        .iter()
        .zip(&traj.e_t)
        .map(|(st, et)| (-sigma * st.t).exp() * e1_integrand(&norm_terms(st, et, s), kf))
        .fold(0.0, f64::max)
}

/// `sup_t e^{−2σt}{k|ê₁| + |∂t ê₁| + k‖e′‖_{H^{s+2}} + k^{−1/4}‖∂t e′‖_{H^s}
/// + k^{1/2}‖n‖_{H^s} + k^{−1/2}‖∂t n‖_{H^s}}`.
pub fn e2_norm(traj: &Trajectory, k: u64, s: f64, sigma: f64) -> f64 {
    let kf = k as f64;
    traj.states
        .iter()
        .zip(&traj.e_t)
        .map(|(st, et)| (-2.0 * sigma * st.t).exp() * e2_integrand(&norm_terms(st, et, s), kf))
        .fold(0.0, f64::max)
}

/// `sup_t e^{−2σt}{k^{1/2}‖f‖_{H^s} + k^{−1/2}‖∂t f‖_{H^s} + k^{−3/4}‖g‖_{H^s}}`.
///
/// The `∂t f` term is skipped when the forcing carries no rate.
pub fn f2_norm(forcing: &Forcing, k: u64, s: f64, sigma: f64) -> f64 {
    let kf = k as f64;
    (0..forcing.grid.len())
        .map(|j| {
            let t = forcing.grid.t(j);
            let ft = forcing.f_t.as_ref().map_or(0.0, |v| sobolev_norm(&v[j], s));
            (-2.0 * sigma * t).exp()
                * (kf.sqrt() * sobolev_norm(&forcing.f[j], s)
                    + ft / kf.sqrt()
                    + kf.powf(-0.75) * sobolev_norm(&forcing.g[j], s))
        })
        .fold(0.0, f64::max)
}

pub fn weighted_norms(traj: &Trajectory, k: u64, s: f64, sigma: f64) -> Result<WeightedNorms> {
    let forcing = bilinear_forcing(traj, traj, k)?;
    Ok(WeightedNorms {
        e1: e1_norm(traj, k, s, sigma),
        e2: e2_norm(traj, k, s, sigma),
        f2: f2_norm(&forcing, k, s, sigma),
        sigma,
        k,
        s,
    })
}

/// Settings of [`picard_solve`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardConfig {
    pub delta: f64,
    /// Stop once `E¹(u_{j+1} − u_j) < tol · E¹(u_{j+1})`.
    pub tol: f64,
    pub max_iter: usize,
    /// Smallness constant in `δ k^{−1/4} e^{σT} ≤ c₀`.
    pub c0: f64,
    pub s: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            delta: 1e-6,
            tol: 1e-8,
            max_iter: 50,
            c0: 0.05,
            s: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `E¹(u_j)`.
    pub e1_norm: f64,
    /// `E¹(u_j − u_{j−1})`.
    pub increment: f64,
    pub relative_increment: f64,
    /// Ratio of successive increments.
    pub contraction_ratio: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct PicardResult {
    pub u: Trajectory,
    pub log: Vec<IterationRecord>,
    /// `δ k^{−1/4} e^{σT}`.
    pub smallness: f64,
    pub warnings: Vec<String>,
}

/// `δ k^{−1/4} e^{σT}`.
pub fn smallness_parameter(delta: f64, k: u64, sigma: f64, t_end: f64) -> f64 {
    (delta.ln() - 0.25 * (k as f64).ln() + sigma * t_end).exp()
}

/// Fixed point of `u ↦ δ L_k⁻¹ N_k(Uᵃ + u)` on the grid of `ua`, starting from
/// `u = 0`.
pub fn picard_solve(lk: &LkInverse, ua: &Trajectory, sigma: f64, cfg: &PicardConfig) -> Result<PicardResult> {
    if !(cfg.delta > 0.0 && cfg.delta <= 1.0) {
        return Err(Error::Config(format!("δ = {} outside (0, 1]", cfg.delta)));
    }
    let k = lk.k;
    let smallness = smallness_parameter(cfg.delta, k, sigma, ua.grid.t_end());
    let mut warnings = Vec::new();
    if smallness > cfg.c0 {
        warnings.push(format!(
            "δ k^(-1/4) e^(σT) = {smallness:.3e} exceeds c0 = {}; contraction is not guaranteed",
            cfg.c0
        ));
    }
    let mut u = Trajectory::zeros(ua.grid, ua.truncation());
    let mut log = Vec::new();
    let mut last_inc: Option<f64> = None;
    for it in 1..=cfg.max_iter {
        let w = ua.add(&u)?;
        let next = lk.apply(&nonlinear_forcing(&w, k)?)?.scale(cfg.delta);
        let norm = e1_norm(&next, k, cfg.s, sigma);
        let inc = e1_norm(&next.sub(&u)?, k, cfg.s, sigma);
        if !norm.is_finite() || !inc.is_finite() {
            return Err(Error::NonFinite("picard iterate"));
        }
        let rel = if norm > 0.0 { inc / norm } else { 0.0 };
        log.push(IterationRecord {
            iteration: it,
            e1_norm: norm,
            increment: inc,
            relative_increment: rel,
            contraction_ratio: last_inc.filter(|&p| p > 0.0).map(|p| inc / p),
        });
        last_inc = Some(inc);
        u = next;
        if rel < cfg.tol {
            return Ok(PicardResult {
                u,
                log,
                smallness,
                warnings,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iter,
        increment: log.last().map_or(f64::NAN, |r| r.relative_increment),
    })
}

/// `ln sinh(x)` for `x > 0` without overflow.
pub fn ln_sinh(x: f64) -> f64 {
    if x > 1.0 {
        x + (-(-2.0 * x).exp()).ln_1p() - std::f64::consts::LN_2
    } else {
        x.sinh().ln()
    }
}

/// Least-squares fit `ln y ≈ c + ln sinh(γ t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinhFit {
    pub gamma: f64,
    pub offset: f64,
    /// Root-mean-square residual in `ln y`.
    pub rms: f64,
    pub samples: usize,
}

impl SinhFit {
    pub fn eval_ln(&self, t: f64) -> f64 {
        self.offset + ln_sinh(self.gamma * t)
    }
}

fn sinh_residual(times: &[f64], logs: &[f64], gamma: f64) -> (f64, f64) {
    let n = times.len() as f64;
    let c = times.iter().zip(logs).map(|(&t, &y)| y - ln_sinh(gamma * t)).sum::<f64>() / n;
    let sse = times
        .iter()
        .zip(logs)
        .map(|(&t, &y)| (y - c - ln_sinh(gamma * t)).powi(2))
        .sum::<f64>();
    (sse, c)
}

/// Fits `values(t) ≈ A sinh(γt)` on samples with `t > 0` and positive values,
/// searching `γ ∈ [lo, hi]` by golden section.
pub fn fit_sinh_rate(times: &[f64], values: &[f64], lo: f64, hi: f64) -> Option<SinhFit> {
    let (t, y): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(&t, &v)| t > 0.0 && v > 0.0 && v.is_finite())
        .map(|(&t, &v)| (t, v.ln()))
        .unzip();
    if t.len() < 3 || !(lo > 0.0 && hi > lo) {
        return None;
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = sinh_residual(&t, &y, x1).0;
    let mut f2 = sinh_residual(&t, &y, x2).0;
    for _ in 0..200 {
        if (b - a) < 1e-13 * b {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = sinh_residual(&t, &y, x1).0;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = sinh_residual(&t, &y, x2).0;
        }
    }
    let gamma = 0.5 * (a + b);
    let (sse, offset) = sinh_residual(&t, &y, gamma);
    Some(SinhFit {
        gamma,
        offset,
        rms: (sse / t.len() as f64).sqrt(),
        samples: t.len(),
    })
}

/// Split-step integrator of the full reduced system.
///
/// Each step is the symmetric composition `L(h/2) A(h/2) B(h) A(h/2) L(h/2)`:
/// `L` is the exact linear flow of every harmonic block, `A` solves
/// `∂t e = −i n e` with `n` frozen, `B` solves `∂t(∂t n) = k²∂θ²|e|²` with `e`
/// frozen.
#[derive(Clone, Debug)]
pub struct DirectIntegrator {
    pub k: u64,
    pub m: f64,
    pub e_bar: Complex64,
    pub truncation: usize,
    pub dt: f64,
    /// `exp(i (h/2) A_p)` for `p = 1, …, P`.
    half_steps: Vec<Mat4>,
}

/// Outcome of [`DirectIntegrator::run`]; a blow-up stops the run early.
#[derive(Clone, Debug)]
pub struct DirectRun {
    pub trajectory: Trajectory,
    pub blowup: Option<Blowup>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Blowup {
    pub time: f64,
    pub norm: f64,
    pub ceiling: f64,
}

impl DirectIntegrator {
    pub fn new(k: u64, m: f64, e_bar: Complex64, truncation: usize, dt: f64) -> Self {
        assert!(dt > 0.0 && truncation >= 1);
        let half_steps = (1..=truncation as u64)
            .map(|p| expm(&(build_block_matrix(k, m, e_bar, p) * Complex64::new(0.0, 0.5 * dt))))
            .collect();
        DirectIntegrator {
            k,
            m,
            e_bar,
            truncation,
            dt,
            half_steps,
        }
    }

    pub fn for_spectrum(spectrum: &SpectrumReport, truncation: usize, dt: f64) -> Self {
        DirectIntegrator::new(spectrum.k, spectrum.m, spectrum.e_bar, truncation, dt)
    }

    fn linear_half_step(&self, s: &mut StateU) {
        let tau = 0.5 * self.dt;
        let n0 = s.n.coeff(0);
        let nt0 = s.n_t.coeff(0);
        s.e.set(0, s.e.coeff(0) - I * self.e_bar * (n0 * tau + nt0 * (0.5 * tau * tau)));
        s.n.set(0, n0 + nt0 * tau);
        for (i, prop) in self.half_steps.iter().enumerate() {
            let p = i as i64 + 1;
            let kp = (self.k as i64 * p) as f64;
            let v = Vec4::new(s.e.coeff(p), s.e.coeff(-p).conj(), s.n.coeff(p), -I * s.n_t.coeff(p) / kp);
            let w = prop * v;
            s.e.set(p, w[0]);
            s.e.set(-p, w[1].conj());
            s.n.set(p, w[2]);
            s.n_t.set(p, I * kp * w[3]);
        }
    }

    /// `e ← exp(−iτ Π n) e` by its Taylor series (`Π` = dealiased truncation).
    fn potential_step(&self, s: &mut StateU, tau: f64) -> Result<()> {
        let scale = s.e.max_abs();
        if scale == 0.0 {
            return Ok(());
        }
        let mut term = s.e.clone();
        let mut sum = s.e.clone();
        for j in 1..80 {
            term = product(&s.n, &term)?.scale(Complex64::new(0.0, -tau / j as f64));
            sum = sum.add(&term)?;
            if term.max_abs() <= 1e-17 * scale {
                break;
            }
        }
        s.e = sum;
        Ok(())
    }

    /// `∂t n ← ∂t n + τ k²∂θ²|e|²`.
    fn density_kick(&self, s: &mut StateU, tau: f64) -> Result<()> {
        let g = wave_forcing(self.k, &real_inner(&s.e, &s.e)?);
        s.n_t = s.n_t.axpy(Complex64::new(tau, 0.0), &g)?;
        s.n_t.symmetrize();
        Ok(())
    }

    pub fn step(&self, s: &mut StateU) -> Result<()> {
        self.linear_half_step(s);
        self.potential_step(s, 0.5 * self.dt)?;
        self.density_kick(s, self.dt)?;
        self.potential_step(s, 0.5 * self.dt)?;
        self.linear_half_step(s);
        s.n.symmetrize();
        s.t += self.dt;
        if !(s.e.is_finite() && s.n.is_finite() && s.n_t.is_finite()) {
            return Err(Error::NonFinite("direct step"));
        }
        Ok(())
    }

    /// `∂t e` from the equation:
    /// `∂t ê_p = i(mp − k²p²)ê_p − iĒ n̂_p − i(n e)_p`.
    pub fn e_rate(&self, s: &StateU) -> Result<FourierField> {
        let ne = product(&s.n, &s.e)?;
        let k2 = (self.k * self.k) as f64;
        Ok(FourierField::from_fn(self.truncation, false, |p| {
            let pf = p as f64;
            I * (self.m * pf - k2 * pf * pf) * s.e.coeff(p) - I * self.e_bar * s.n.coeff(p) - I * ne.coeff(p)
        }))
    }

    /// Integrates `steps` steps from `state0`, recording every step. Stops
    /// early (without error) when `‖e‖_{L²} + ‖n‖_{L²}` exceeds `ceiling`.
    pub fn run(&self, state0: &StateU, steps: usize, ceiling: f64) -> Result<DirectRun> {
        if state0.truncation() != self.truncation {
            return Err(Error::TruncationMismatch(self.truncation, state0.truncation()));
        }
        let mut s = state0.clone();
        s.t = 0.0;
        let mut states = vec![s.clone()];
        let mut e_t = vec![self.e_rate(&s)?];
        let mut blowup = None;
        for _ in 0..steps {
            self.step(&mut s)?;
            let size = l2_norm(&s.e) + l2_norm(&s.n);
            if size > ceiling {
                blowup = Some(Blowup {
                    time: s.t,
                    norm: size,
                    ceiling,
                });
                break;
            }
            e_t.push(self.e_rate(&s)?);
            states.push(s.clone());
        }
        let grid = TimeGrid {
            dt: self.dt,
            steps: states.len() - 1,
        };
        Ok(DirectRun {
            trajectory: Trajectory { grid, states, e_t },
            blowup,
        })
    }
}

/// Full nonlinear evolution from `state0` over `[0, t_end]` with step at most
/// `dt`; fails with [`Error::BlowupDetected`] if the norm ceiling is crossed.
pub fn evolve_direct(
    spectrum: &SpectrumReport,
    state0: &StateU,
    t_end: f64,
    dt: f64,
    ceiling: f64,
) -> Result<Trajectory> {
    let grid = TimeGrid::with_max_step(t_end, dt);
    let run = DirectIntegrator::for_spectrum(spectrum, state0.truncation(), grid.dt).run(state0, grid.steps, ceiling)?;
    match run.blowup {
        Some(b) => Err(Error::BlowupDetected {
            time: b.time,
            norm: b.norm,
            ceiling: b.ceiling,
        }),
        None => Ok(run.trajectory),
    }
}

/// One row of a norm trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormTraceRow {
    pub t: f64,
    pub l2_n: f64,
    pub hs_n: f64,
    pub hs_e: f64,
    /// `ln(A sinh(γt))` of the fit, if any.
    pub log_sinh_fit: Option<f64>,
    /// Running `E¹` supremum up to `t`.
    pub e1_partial: f64,
}

pub fn norm_trace(traj: &Trajectory, k: u64, s: f64, sigma: f64, fit: Option<&SinhFit>) -> Vec<NormTraceRow> {
    let kf = k as f64;
    let mut sup: f64 = 0.0;
    traj.states
        .iter()
        .zip(&traj.e_t)
        .map(|(st, et)| {
            sup = sup.max((-sigma * st.t).exp() * e1_integrand(&norm_terms(st, et, s), kf));
            NormTraceRow {
                t: st.t,
                l2_n: l2_norm(&st.n),
                hs_n: sobolev_norm(&st.n, s),
                hs_e: sobolev_norm(&st.e, s),
                log_sinh_fit: fit.filter(|_| st.t > 0.0).map(|f| f.eval_ln(st.t)),
                e1_partial: sup,
            }
        })
        .collect()
}

pub fn write_norm_trace<W: Write>(rows: &[NormTraceRow], w: W) -> Result<()> {
    let mut wr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    wr.write_record(["t", "l2_n", "hs_n", "hs_e", "log_sinh_fit", "E1_partial"])?;
    for r in rows {
        wr.write_record([
            fmt_float(r.t),
            fmt_float(r.l2_n),
            fmt_float(r.hs_n),
            fmt_float(r.hs_e),
            r.log_sinh_fit.map(fmt_float).unwrap_or_default(),
            fmt_float(r.e1_partial),
        ])?;
    }
    wr.flush().map_err(|e| Error::Io {
        path: "<csv>".into(),
        source: e,
    })?;
    Ok(())
}
