//! The linear operator `L_k` of the reduced system
//!
//! ```text
//! i(∂t − m∂θ)e + k²∂θ²e − Ē n = f
//! (∂t² − k²∂θ²)n − k²∂θ²(conj(Ē) e + Ē ē) = g
//! ```
//!
//! solved in Fourier with vanishing Cauchy data. Harmonics `p` and `−p` couple
//! through `ẽ_p = conj(ê_{−p})`, `f̃_p = −conj(f̂_{−p})`; every block `p ≥ 1` is
//! the constant-coefficient system `i∂t V + A_p V = F_p` with
//! `V = (ê_p, ẽ_p, n̂_p, v_p)`, `v_p = −i(kp)⁻¹∂t n̂_p` and
//! `F_p = (f̂_p, f̃_p, 0, (kp)⁻¹ĝ_p)`. Its solution is
//!
//! ```text
//! V(t) = −i Σ_j ∫₀ᵗ e^{i(t−s)λ_j} (l_j·F(s))/(l_j·r_j) r_j ds,
//! ```
//!
//! evaluated with an exponential quadrature that is exact for forcing
//! cubic between grid samples. The mean mode reduces to `∂t ê₀ = −i f̂₀`,
//! `n̂₀ = 0` as long as `ĝ₀ = 0`.

use std::io::Write;

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{self, build_block_matrix, BlockDecomposition, SpectrumReport};
use crate::error::{Error, Result};
use crate::experiments::fmt_float;
use crate::linalg::{dot, Mat4, Vec4};
use crate::spectral::{FourierField, StateU};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative size of `ĝ₀` (against the overall forcing scale) tolerated as zero.
pub const MEAN_FORCING_TOL: f64 = 1e-12;

/// The longitudinal mode number `m` next to `k² + k` and the offset
/// `m′ = m − k² − k ∈ (−1/Z, 0]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeNumber {
    pub m: Ratio<i64>,
    pub m_prime: Ratio<i64>,
}

impl ModeNumber {
    pub fn m_f64(&self) -> f64 {
        *self.m.numer() as f64 / *self.m.denom() as f64
    }

    pub fn m_prime_f64(&self) -> f64 {
        *self.m_prime.numer() as f64 / *self.m_prime.denom() as f64
    }
}

/// Largest `m ∈ ℕ/Z` with `(k² + k) − 1/Z < m ≤ k² + k`.
pub fn choose_m(k: u64, z: Ratio<i64>) -> ModeNumber {
    assert!(k >= 1, "k must be positive");
    assert!(z > Ratio::from_integer(0), "Z must be positive");
    let target = Ratio::from_integer((k * k + k) as i64);
    // m = j / Z with j = ⌊(k² + k) Z⌋
    let j = (target * z).floor();
    let m = j / z;
    ModeNumber {
        m,
        m_prime: m - target,
    }
}

/// Largest multiple of `1/Z` not exceeding `upper`.
pub fn largest_multiple_at_most(upper: f64, z: Ratio<i64>) -> Ratio<i64> {
    let zf = *z.numer() as f64 / *z.denom() as f64;
    let mut j = (upper * zf).floor() as i64;
    // guard against rounding in the product
    while (j + 1) as f64 / zf <= upper {
        j += 1;
    }
    while j as f64 / zf > upper {
        j -= 1;
    }
    Ratio::from_integer(j) / z
}

/// Uniform grid `t_j = j·dt`, `j = 0, …, steps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, steps: usize) -> Self {
        assert!(steps >= 1 && t_end > 0.0);
        TimeGrid {
            dt: t_end / steps as f64,
            steps,
        }
    }

    /// Grid on `[0, t_end]` with spacing at most `max_dt`.
    pub fn with_max_step(t_end: f64, max_dt: f64) -> Self {
        TimeGrid::new(t_end, ((t_end / max_dt).ceil() as usize).max(1))
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.steps)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|j| self.t(j))
    }
}

/// Right-hand side `F = (f, g)` sampled on a time grid; `∂t f` is optional and
/// only used by the forcing norm.
#[derive(Clone, Debug)]
pub struct Forcing {
    pub grid: TimeGrid,
    pub f: Vec<FourierField>,
    pub g: Vec<FourierField>,
    pub f_t: Option<Vec<FourierField>>,
}

impl Forcing {
    pub fn new(grid: TimeGrid, f: Vec<FourierField>, g: Vec<FourierField>) -> Result<Self> {
        if f.len() != grid.len() || g.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} f samples and {} g samples for a grid of {} points",
                f.len(),
                g.len(),
                grid.len()
            )));
        }
        let p = f[0].truncation();
        for x in f.iter().chain(&g) {
            if x.truncation() != p {
                return Err(Error::TruncationMismatch(p, x.truncation()));
            }
        }
        let g = g.into_iter().map(|x| x.into_real()).collect::<Result<Vec<_>>>()?;
        Ok(Forcing { grid, f, g, f_t: None })
    }

    pub fn with_rate(mut self, f_t: Vec<FourierField>) -> Result<Self> {
        if f_t.len() != self.grid.len() {
            return Err(Error::GridMismatch("∂t f samples".into()));
        }
        self.f_t = Some(f_t);
        Ok(self)
    }

    pub fn zeros(grid: TimeGrid, truncation: usize) -> Self {
        Forcing {
            grid,
            f: vec![FourierField::zeros(truncation, false); grid.len()],
            g: vec![FourierField::zeros(truncation, true); grid.len()],
            f_t: None,
        }
    }

    pub fn truncation(&self) -> usize {
        self.f[0].truncation()
    }

    /// Largest coefficient magnitude over `f` and `g`.
    pub fn scale(&self) -> f64 {
        self.f
            .iter()
            .chain(&self.g)
            .map(|x| x.max_abs())
            .fold(0.0, f64::max)
    }

    /// `α·self + β·other` (the rate is kept only if both carry one).
    pub fn combine(&self, alpha: f64, other: &Forcing, beta: f64) -> Result<Forcing> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("forcing grids differ".into()));
        }
        let lin = |a: &[FourierField], b: &[FourierField]| -> Result<Vec<FourierField>> {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.scale_real(alpha).axpy(Complex64::new(beta, 0.0), y))
                .collect()
        };
        let f_t = match (&self.f_t, &other.f_t) {
            (Some(a), Some(b)) => Some(lin(a, b)?),
            _ => None,
        };
        Ok(Forcing {
            grid: self.grid,
            f: lin(&self.f, &other.f)?,
            g: lin(&self.g, &other.g)?,
            f_t,
        })
    }

    /// Samples of `(f̂_p, f̃_p = −conj f̂_{−p}, ĝ_p)`.
    pub fn block(&self, p: u64) -> ForcingBlock {
        let pi = p as i64;
        ForcingBlock {
            p,
            f_hat: self.f.iter().map(|x| x.coeff(pi)).collect(),
            f_tilde: self.f.iter().map(|x| -x.coeff(-pi).conj()).collect(),
            g_hat: self.g.iter().map(|x| x.coeff(pi)).collect(),
        }
    }
}

/// Time samples of the forcing of harmonic block `p`.
#[derive(Clone, Debug)]
pub struct ForcingBlock {
    pub p: u64,
    pub f_hat: Vec<Complex64>,
    pub f_tilde: Vec<Complex64>,
    pub g_hat: Vec<Complex64>,
}

impl ForcingBlock {
    pub fn zeros(p: u64, len: usize) -> Self {
        ForcingBlock {
            p,
            f_hat: vec![ZERO; len],
            f_tilde: vec![ZERO; len],
            g_hat: vec![ZERO; len],
        }
    }

    fn len(&self) -> usize {
        self.f_hat.len()
    }

    /// First-order forcing vector `(f̂, f̃, 0, (kp)⁻¹ ĝ)` at sample `j`.
    fn vector(&self, j: usize, kp: f64) -> Vec4 {
        Vec4::new(self.f_hat[j], self.f_tilde[j], ZERO, self.g_hat[j] / kp)
    }
}

/// Trajectory of one harmonic block `p ≥ 1` in first-order variables.
#[derive(Clone, Debug)]
pub struct BlockTrajectory {
    pub p: u64,
    pub kp: f64,
    /// `(ê_p, ẽ_p, n̂_p, v_p)` per sample.
    pub states: Vec<Vec4>,
    /// `∂t` of the above, from the equation.
    pub rates: Vec<Vec4>,
}

impl BlockTrajectory {
    pub fn e_hat(&self, j: usize) -> Complex64 {
        self.states[j][0]
    }

    pub fn e_tilde(&self, j: usize) -> Complex64 {
        self.states[j][1]
    }

    pub fn n_hat(&self, j: usize) -> Complex64 {
        self.states[j][2]
    }

    /// `∂t n̂_p = i kp v_p`.
    pub fn n_hat_t(&self, j: usize) -> Complex64 {
        I * self.kp * self.states[j][3]
    }

    /// `∂t² n̂_p = i kp ∂t v_p`.
    pub fn n_hat_tt(&self, j: usize) -> Complex64 {
        I * self.kp * self.rates[j][3]
    }
}

/// `φ_j(z) = Σₙ zⁿ/(n+j)!` for `j = 1..=4`.
fn phi_functions(z: Complex64) -> [Complex64; 4] {
    let mut out = [ZERO; 4];
    if z.norm() < 1.0 {
        for (j, o) in out.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0 / factorial(j + 1), 0.0);
            for n in 0..30 {
                *o += term;
                term = term * z / (n + j + 2) as f64;
            }
        }
    } else {
        let mut prev = z.exp();
        for (j, o) in out.iter_mut().enumerate() {
            *o = (prev - 1.0 / factorial(j)) / z;
            prev = *o;
        }
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Monomial coefficients of the Lagrange basis on the nodes `offsets`.
fn lagrange_monomials(offsets: &[f64]) -> Vec<Vec<f64>> {
    offsets
        .iter()
        .enumerate()
        .map(|(q, &oq)| {
            let mut poly = vec![1.0];
            for (r, &or) in offsets.iter().enumerate() {
                if r == q {
                    continue;
                }
                let d = oq - or;
                let mut next = vec![0.0; poly.len() + 1];
                for (i, c) in poly.iter().enumerate() {
                    next[i + 1] += c / d;
                    next[i] -= c * or / d;
                }
                poly = next;
            }
            poly
        })
        .collect()
}

/// Weights of `∫₀ʰ e^{z(1−s/h)} φ(s) ds ≈ Σ_q w_q φ(q-th node)` when `φ` is
/// interpolated on nodes at `offsets·h`.
fn exp_weights(z: Complex64, h: f64, offsets: &[f64]) -> Vec<Complex64> {
    let phis = phi_functions(z);
    lagrange_monomials(offsets)
        .iter()
        .map(|poly| {
            poly.iter()
                .enumerate()
                .map(|(j, c)| phis[j] * (c * factorial(j) * h))
                .sum()
        })
        .collect()
}

/// Interpolation stencils for the intervals of an `n`-point grid: cubic where
/// four points are available, centred where possible.
struct Stencils {
    degree: usize,
    last_start: usize,
}

impl Stencils {
    fn new(points: usize) -> Self {
        let intervals = points.saturating_sub(1);
        let degree = intervals.min(3);
        Self {
            degree,
            last_start: intervals - degree,
        }
    }

    /// First node of the stencil for interval `[t_i, t_{i+1}]`.
    fn start(&self, i: usize) -> usize {
        i.saturating_sub(1).min(self.last_start)
    }

    /// The distinct node-offset sets, indexed by `i − start(i)`.
    fn offsets(&self) -> Vec<Vec<f64>> {
        (0..=self.degree.min(2))
            .map(|shift| (0..=self.degree).map(|q| q as f64 - shift as f64).collect())
            .collect()
    }
}

/// Duhamel solution of `i∂t V + A V = F`, `V(0) = 0`, for one block.
///
/// Each eigen-component is advanced exactly across a step with the forcing
/// replaced by its cubic interpolant.
pub fn solve_block(
    a: &Mat4,
    dec: &BlockDecomposition,
    kp: f64,
    block: &ForcingBlock,
    grid: &TimeGrid,
) -> Result<BlockTrajectory> {
    if block.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "forcing block has {} samples, grid {}",
            block.len(),
            grid.len()
        )));
    }
    let h = grid.dt;
    let n = grid.len();
    let stencils = Stencils::new(n);
    let offsets = stencils.offsets();
    let mut prop = [ZERO; 4];
    let mut weights: [Vec<Vec<Complex64>>; 4] = Default::default();
    let mut coef = [Vec4::zeros(); 4];
    for j in 0..4 {
        let z = I * dec.lambdas[j] * h;
        prop[j] = z.exp();
        weights[j] = offsets.iter().map(|o| exp_weights(z, h, o)).collect();
        coef[j] = dec.r[j] * (-I / dec.lr[j]);
    }
    let forcing: Vec<Vec4> = (0..n).map(|s| block.vector(s, kp)).collect();
    let phi: Vec<[Complex64; 4]> = forcing
        .iter()
        .map(|fv| [0, 1, 2, 3].map(|j| dot(&dec.l[j], fv)))
        .collect();
    let mut states = Vec::with_capacity(n);
    let mut rates = Vec::with_capacity(n);
    let mut psi = [ZERO; 4];
    for s in 0..n {
        if s > 0 {
            let i = s - 1;
            let start = stencils.start(i);
            for j in 0..4 {
                let w = &weights[j][i - start];
                let quad: Complex64 = w.iter().enumerate().map(|(q, wq)| wq * phi[start + q][j]).sum();
                psi[j] = prop[j] * psi[j] + quad;
            }
        }
        let mut v = Vec4::zeros();
        for j in 0..4 {
            v += coef[j] * psi[j];
        }
        let rate = (a * v - forcing[s]) * I;
        states.push(v);
        rates.push(rate);
    }
    if states.iter().any(|v| v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite())) {
        return Err(Error::NonFinite("solve_block"));
    }
    Ok(BlockTrajectory {
        p: block.p,
        kp,
        states,
        rates,
    })
}

/// First harmonic with vanishing initial data, through the eigen-decomposition
/// of `A` stored in `rep`.
pub fn solve_p1_duhamel(rep: &SpectrumReport, block: &ForcingBlock, grid: &TimeGrid) -> Result<BlockTrajectory> {
    solve_block(&rep.a(), &rep.decomposition(), rep.k as f64, block, grid)
}

/// Mean mode in the normalisation `∂t ê₀ = φ₀`, `∂t² n̂₀ = ĝ₀`:
/// `ê₀(t) = ∫₀ᵗ φ₀`, `n̂₀ = 0`, by cumulative piecewise-cubic quadrature.
///
/// Fails with [`Error::NonzeroMeanForcing`] when `ĝ₀` does not vanish
/// (relative to `max(1, sup|φ₀|)`).
pub fn solve_p0(phi0: &[Complex64], g0: &[Complex64], grid: &TimeGrid) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let scale = phi0.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let gmax = g0.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if gmax > MEAN_FORCING_TOL * scale {
        return Err(Error::NonzeroMeanForcing(gmax));
    }
    if phi0.len() != grid.len() {
        return Err(Error::GridMismatch("mean-mode forcing".into()));
    }
    let stencils = Stencils::new(phi0.len());
    let weights: Vec<Vec<Complex64>> = stencils
        .offsets()
        .iter()
        .map(|o| exp_weights(ZERO, grid.dt, o))
        .collect();
    let mut e0 = Vec::with_capacity(phi0.len());
    let mut acc = ZERO;
    e0.push(acc);
    for i in 0..phi0.len().saturating_sub(1) {
        let start = stencils.start(i);
        acc += weights[i - start]
            .iter()
            .enumerate()
            .map(|(q, w)| w * phi0[start + q])
            .sum::<Complex64>();
        e0.push(acc);
    }
    Ok((e0, vec![ZERO; phi0.len()]))
}

/// Harmonic `p ≥ 2` with vanishing initial data.
///
/// The block is integrated exactly in its own eigenbasis, with the same
/// exponential quadrature as `p = 1`.
pub fn solve_pge2(
    k: u64,
    m: f64,
    e_bar: Complex64,
    p: u64,
    block: &ForcingBlock,
    grid: &TimeGrid,
) -> Result<BlockTrajectory> {
    assert!(p >= 2, "solve_pge2 handles harmonics p ≥ 2");
    let a = build_block_matrix(k, m, e_bar, p);
    let dec = dispersion::decompose(&a)?;
    solve_block(&a, &dec, (k * p) as f64, block, grid)
}

/// Solution of `L_k U = F` on a time grid: states plus `∂t e`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<StateU>,
    pub e_t: Vec<FourierField>,
}

impl Trajectory {
    pub fn zeros(grid: TimeGrid, truncation: usize) -> Self {
        Trajectory {
            grid,
            states: grid.times().map(|t| StateU::zeros(truncation, t)).collect(),
            e_t: vec![FourierField::zeros(truncation, false); grid.len()],
        }
    }

    pub fn truncation(&self) -> usize {
        self.states[0].truncation()
    }

    pub fn last(&self) -> &StateU {
        self.states.last().expect("trajectory is never empty")
    }

    /// `α·self + β·other`, sample by sample.
    pub fn combine(&self, alpha: f64, other: &Trajectory, beta: f64) -> Result<Trajectory> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("trajectory grids differ".into()));
        }
        let states = self
            .states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| a.scale(alpha).axpy(beta, b))
            .collect::<Result<Vec<_>>>()?;
        let e_t = self
            .e_t
            .iter()
            .zip(&other.e_t)
            .map(|(a, b)| a.scale_real(alpha).axpy(Complex64::new(beta, 0.0), b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Trajectory {
            grid: self.grid,
            states,
            e_t,
        })
    }

    pub fn sub(&self, other: &Trajectory) -> Result<Trajectory> {
        self.combine(1.0, other, -1.0)
    }

    pub fn add(&self, other: &Trajectory) -> Result<Trajectory> {
        self.combine(1.0, other, 1.0)
    }

    pub fn scale(&self, a: f64) -> Trajectory {
        Trajectory {
            grid: self.grid,
            states: self.states.iter().map(|s| s.scale(a)).collect(),
            e_t: self.e_t.iter().map(|x| x.scale_real(a)).collect(),
        }
    }

    /// Largest reality drift of `n` and `∂t n` over the trajectory.
    pub fn reality_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|s| s.n.reality_drift().max(s.n_t.reality_drift()))
            .fold(0.0, f64::max)
    }

    /// CSV with one row per `(t, p)`: `t,p,e_re,e_im,n_re,n_im,nt_re,nt_im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        wr.write_record(["t", "p", "e_re", "e_im", "n_re", "n_im", "nt_re", "nt_im"])?;
        let pt = self.truncation() as i64;
        for s in &self.states {
            for p in -pt..=pt {
                let (e, n, nt) = (s.e.coeff(p), s.n.coeff(p), s.n_t.coeff(p));
                wr.write_record([
                    fmt_float(s.t),
                    p.to_string(),
                    fmt_float(e.re),
                    fmt_float(e.im),
                    fmt_float(n.re),
                    fmt_float(n.im),
                    fmt_float(nt.re),
                    fmt_float(nt.im),
                ])?;
            }
        }
        wr.flush().map_err(|e| Error::Io {
            path: "<csv>".into(),
            source: e,
        })?;
        Ok(())
    }
}

/// `L_k⁻¹` with every harmonic block pre-decomposed.
#[derive(Clone, Debug)]
pub struct LkInverse {
    pub k: u64,
    pub m: f64,
    pub e_bar: Complex64,
    pub truncation: usize,
    blocks: Vec<(Mat4, BlockDecomposition)>,
}

impl LkInverse {
    pub fn new(spectrum: &SpectrumReport, truncation: usize) -> Result<Self> {
        let mut blocks = Vec::with_capacity(truncation);
        if truncation >= 1 {
            blocks.push((spectrum.a(), spectrum.decomposition()));
        }
        for p in 2..=truncation as u64 {
            let a = build_block_matrix(spectrum.k, spectrum.m, spectrum.e_bar, p);
            let dec = dispersion::decompose(&a)?;
            blocks.push((a, dec));
        }
        Ok(LkInverse {
            k: spectrum.k,
            m: spectrum.m,
            e_bar: spectrum.e_bar,
            truncation,
            blocks,
        })
    }

    /// Solution of `L_k U = F` with `e = n = ∂t n = 0` at `t = 0`.
    pub fn apply(&self, forcing: &Forcing) -> Result<Trajectory> {
        let pt = self.truncation;
        if forcing.truncation() != pt {
            return Err(Error::TruncationMismatch(pt, forcing.truncation()));
        }
        let grid = forcing.grid;
        let g0: Vec<Complex64> = forcing.g.iter().map(|g| g.coeff(0)).collect();
        let gmax = g0.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if gmax > MEAN_FORCING_TOL * forcing.scale().max(f64::MIN_POSITIVE) {
            return Err(Error::NonzeroMeanForcing(gmax));
        }
        let phi0: Vec<Complex64> = forcing.f.iter().map(|f| -I * f.coeff(0)).collect();
        let (e0, _) = solve_p0(&phi0, &vec![ZERO; phi0.len()], &grid)?;

        let blocks: Vec<BlockTrajectory> = self
            .blocks
            .par_iter()
            .enumerate()
            .map(|(i, (a, dec))| {
                let p = i as u64 + 1;
                solve_block(a, dec, (self.k * p) as f64, &forcing.block(p), &grid)
            })
            .collect::<Result<Vec<_>>>()?;

        let mut states = Vec::with_capacity(grid.len());
        let mut e_t = Vec::with_capacity(grid.len());
        for j in 0..grid.len() {
            let mut e = FourierField::zeros(pt, false);
            let mut n = FourierField::zeros(pt, true);
            let mut nt = FourierField::zeros(pt, true);
            let mut et = FourierField::zeros(pt, false);
            e.set(0, e0[j]);
            et.set(0, phi0[j]);
            for b in &blocks {
                let p = b.p as i64;
                let (v, r) = (&b.states[j], &b.rates[j]);
                e.set(p, v[0]);
                e.set(-p, v[1].conj());
                et.set(p, r[0]);
                et.set(-p, r[1].conj());
                n.set(p, v[2]);
                nt.set(p, b.n_hat_t(j));
            }
            states.push(StateU {
                e,
                n,
                n_t: nt,
                t: grid.t(j),
            });
            e_t.push(et);
        }
        Ok(Trajectory { grid, states, e_t })
    }
}

/// One-shot `L_k⁻¹ F`.
pub fn apply_lk_inverse(spectrum: &SpectrumReport, forcing: &Forcing) -> Result<Trajectory> {
    LkInverse::new(spectrum, forcing.truncation())?.apply(forcing)
}

/// The unstable solution of `L_k U = 0` carried by harmonics `±1`:
/// `V₁(t) = ¼(e^{itλ₄} r₄ − e^{itλ₃} r₃)`, so that
/// `n(t, θ) = sinh(σt) cos(t Re λ₃ + θ)`.
#[derive(Clone, Debug)]
pub struct UnstableMode {
    spectrum: SpectrumReport,
}

impl UnstableMode {
    pub fn new(spectrum: SpectrumReport) -> Self {
        UnstableMode { spectrum }
    }

    pub fn spectrum(&self) -> &SpectrumReport {
        &self.spectrum
    }

    pub fn sigma(&self) -> f64 {
        self.spectrum.sigma
    }

    pub fn k(&self) -> u64 {
        self.spectrum.k
    }

    fn exps(&self, t: f64) -> (Complex64, Complex64) {
        let l3 = self.spectrum.lambdas[2];
        let l4 = self.spectrum.lambdas[3];
        ((I * t * l3).exp(), (I * t * l4).exp())
    }

    /// `(ê₁, ẽ₁, n̂₁, v₁)` at time `t`.
    pub fn v1(&self, t: f64) -> Vec4 {
        let (x3, x4) = self.exps(t);
        (self.spectrum.right(3) * x4 - self.spectrum.right(2) * x3) * Complex64::new(0.25, 0.0)
    }

    /// `∂t V₁`.
    pub fn v1_rate(&self, t: f64) -> Vec4 {
        let (x3, x4) = self.exps(t);
        let (l3, l4) = (self.spectrum.lambdas[2], self.spectrum.lambdas[3]);
        (self.spectrum.right(3) * (I * l4 * x4) - self.spectrum.right(2) * (I * l3 * x3)) * Complex64::new(0.25, 0.0)
    }

    /// `∂t² V₁`.
    pub fn v1_accel(&self, t: f64) -> Vec4 {
        let (x3, x4) = self.exps(t);
        let (l3, l4) = (self.spectrum.lambdas[2], self.spectrum.lambdas[3]);
        (self.spectrum.right(3) * (-l4 * l4 * x4) - self.spectrum.right(2) * (-l3 * l3 * x3)) * Complex64::new(0.25, 0.0)
    }

    pub fn state(&self, t: f64, truncation: usize) -> StateU {
        assert!(truncation >= 1);
        let v = self.v1(t);
        let k = self.spectrum.k as f64;
        let mut s = StateU::zeros(truncation, t);
        s.e.set(1, v[0]);
        s.e.set(-1, v[1].conj());
        s.n.set(1, v[2]);
        s.n_t.set(1, I * k * v[3]);
        s
    }

    pub fn e_t(&self, t: f64, truncation: usize) -> FourierField {
        let r = self.v1_rate(t);
        let mut f = FourierField::zeros(truncation, false);
        f.set(1, r[0]);
        f.set(-1, r[1].conj());
        f
    }

    pub fn trajectory(&self, grid: TimeGrid, truncation: usize) -> Trajectory {
        Trajectory {
            grid,
            states: grid.times().map(|t| self.state(t, truncation)).collect(),
            e_t: grid.times().map(|t| self.e_t(t, truncation)).collect(),
        }
    }

    /// `[[e_{+1,+}, e_{+1,−}], [e_{−1,+}, e_{−1,−}]]` in
    /// `ê_{±1}(t) = (e_{±1,+} e^{σt} + e_{±1,−} e^{−σt}) e^{±it Re λ₃}`.
    pub fn coefficients(&self) -> [[Complex64; 2]; 2] {
        let r3 = self.spectrum.right(2);
        let r4 = self.spectrum.right(3);
        [
            [0.25 * r4[0], -0.25 * r3[0]],
            [0.25 * r4[1].conj(), -0.25 * r3[1].conj()],
        ]
    }
}

/// Unstable first-harmonic mode for `m` chosen next to `k² + k`.
pub fn build_unstable_mode(k: u64, e_bar: Complex64, z: Ratio<i64>) -> Result<UnstableMode> {
    Ok(UnstableMode::new(dispersion::spectrum_for(k, e_bar, z)?))
}
