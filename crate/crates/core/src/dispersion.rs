//! Dispersion relation of the Zakharov system linearised around `(Ē, 0)` and
//! the eigenstructure of the first-harmonic mode matrix.
//!
//! For frequencies `(τ, ζ, ξ)` dual to `(t, z, x)` the determinant of the
//! symbol is
//!
//! ```text
//! P(τ, ζ, ξ) = (|ξ|² − τ²)(|ξ|⁴ − (τ + ζ)²) − 2|Ē|²|ξ|⁴ = P₀ − 2|Ē|²|ξ|⁴.
//! ```
//!
//! After the reduction `E = Ē + e(kx − mz, t)`, harmonic `p` of the linear
//! system is the first-order system `i ∂t V + A_p V = F` with
//! `V = (ê_p, ẽ_p, n̂_p, −i (kp)⁻¹ ∂t n̂_p)`. The eigenvalues of `A_p` are the
//! τ-roots of `P(·, −mp, kp)`; for `p = 1` and `k` large two of them form a
//! conjugate pair whose imaginary part `σ ≈ |Ē| √(k/2)` drives the instability.
//!
//! Note: the growth-rate asymptotics are sometimes printed as `√(k^/2)`; this
//! module reads that as `√(k/2)`, which is what the eigenvalues show.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, dot, Mat4, Vec4};
use crate::linear::choose_m;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tolerance below which `|Im λ| / max(|λ|, 1)` counts as real.
const REAL_TOL: f64 = 1e-9;
/// Tolerance above which `|Im λ| / max(|λ|, 1)` counts as genuinely complex.
const COMPLEX_TOL: f64 = 1e-7;
/// `|l·r| < NEAR_DEFECTIVE · ‖l‖‖r‖` flags a nearly defective eigenpair.
pub const NEAR_DEFECTIVE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolPoint {
    pub tau: Complex64,
    pub zeta: f64,
    pub xi: f64,
    /// `|Ē|²`, non-negative.
    pub e_amp2: f64,
}

impl SymbolPoint {
    pub fn new(tau: Complex64, zeta: f64, xi: f64, e_amp2: f64) -> Self {
        assert!(e_amp2 >= 0.0, "|E|² must be non-negative");
        SymbolPoint { tau, zeta, xi, e_amp2 }
    }
}

/// `P₀ = (|ξ|² − τ²)(|ξ|⁴ − (τ+ζ)²)`, evaluated in factored form.
pub fn eval_p0(pt: &SymbolPoint) -> Complex64 {
    let a = pt.xi.abs();
    let a2 = a * a;
    let shifted = pt.tau + pt.zeta;
    (a - pt.tau) * (a + pt.tau) * (a2 - shifted) * (a2 + shifted)
}

/// `P = P₀ − 2|Ē|²|ξ|⁴`.
pub fn eval_p(pt: &SymbolPoint) -> Complex64 {
    let x2 = pt.xi * pt.xi;
    eval_p0(pt) - 2.0 * pt.e_amp2 * x2 * x2
}

/// `∂P/∂τ`.
pub fn eval_dp_dtau(pt: &SymbolPoint) -> Complex64 {
    let x2 = pt.xi * pt.xi;
    let shifted = pt.tau + pt.zeta;
    let f = x2 - pt.tau * pt.tau;
    let g = x2 * x2 - shifted * shifted;
    -2.0 * pt.tau * g - 2.0 * shifted * f
}

/// Coefficients `[c0, c1, c2, c3]` of the monic quartic `τ⁴ + c3 τ³ + … + c0 = P(τ)`.
pub fn quartic_coefficients(zeta: f64, xi: f64, e_amp2: f64) -> [f64; 4] {
    let a = xi * xi;
    let b = a * a;
    let z2 = zeta * zeta;
    [
        -a * (z2 - b) - 2.0 * e_amp2 * b,
        -2.0 * a * zeta,
        z2 - b - a,
        2.0 * zeta,
    ]
}

/// The four τ-roots of `P(·, ζ, ξ)` from the eigenvalues of the companion
/// matrix, each polished by Newton steps on the factored polynomial.
///
/// Real roots come first in ascending order, followed by a conjugate pair
/// (positive imaginary part first) when present.
pub fn tau_roots(zeta: f64, xi: f64, e_amp2: f64) -> Result<[Complex64; 4]> {
    assert!(xi != 0.0, "tau_roots needs ξ ≠ 0 (the quartic degenerates)");
    let c = quartic_coefficients(zeta, xi, e_amp2);
    let mut comp = DMatrix::from_element(4, 4, ZERO);
    for j in 0..4 {
        comp[(0, j)] = Complex64::new(-c[3 - j], 0.0);
    }
    for i in 1..4 {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    let raw = linalg::eigenvalues(&comp)?;
    let mut roots: Vec<Complex64> = raw
        .into_iter()
        .map(|t| newton_polish(t, zeta, xi, e_amp2))
        .collect();
    pair_conjugates(&mut roots);
    Ok([roots[0], roots[1], roots[2], roots[3]])
}

fn newton_polish(mut tau: Complex64, zeta: f64, xi: f64, e_amp2: f64) -> Complex64 {
    let mut pt = SymbolPoint::new(tau, zeta, xi, e_amp2);
    let mut val = eval_p(&pt).norm();
    for _ in 0..3 {
        pt.tau = tau;
        let d = eval_dp_dtau(&pt);
        if d.norm() == 0.0 {
            break;
        }
        let cand = tau - eval_p(&pt) / d;
        let cand_val = eval_p(&SymbolPoint { tau: cand, ..pt }).norm();
        if !(cand_val < val) {
            break;
        }
        tau = cand;
        val = cand_val;
    }
    tau
}

/// Snaps near-real roots onto the real axis and makes complex ones exact
/// conjugates, then orders them.
fn pair_conjugates(roots: &mut Vec<Complex64>) {
    let mut real: Vec<f64> = Vec::new();
    let mut complex: Vec<Complex64> = Vec::new();
    for &r in roots.iter() {
        if r.im.abs() <= COMPLEX_TOL * r.norm().max(1.0) {
            real.push(r.re);
        } else {
            complex.push(r);
        }
    }
    real.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<Complex64> = real.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    complex.sort_by(|a, b| b.im.partial_cmp(&a.im).unwrap());
    while !complex.is_empty() {
        let top = complex.remove(0);
        // partner: closest to conj(top)
        let idx = complex
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (**a - top.conj()).norm().partial_cmp(&(**b - top.conj()).norm()).unwrap()
            })
            .map(|(i, _)| i);
        match idx {
            Some(i) => {
                let other = complex.remove(i);
                let avg = 0.5 * (top + other.conj());
                let avg = Complex64::new(avg.re, avg.im.abs());
                out.push(avg);
                out.push(avg.conj());
            }
            None => out.push(top),
        }
    }
    *roots = out;
}

/// Mode matrix `A_p` of harmonic `p ≥ 1`:
///
/// ```text
/// [ mp − k²p²   0           −Ē      0  ]
/// [ 0           mp + k²p²   conj Ē  0  ]
/// [ 0           0           0       kp ]
/// [ kp conj Ē   kp Ē        kp      0  ]
/// ```
pub fn build_block_matrix(k: u64, m: f64, e_bar: Complex64, p: u64) -> Mat4 {
    assert!(k >= 1 && p >= 1);
    let kp = (k * p) as f64;
    let mp = m * p as f64;
    let c = |x: f64| Complex64::new(x, 0.0);
    Mat4::from_row_slice(&[
        c(mp - kp * kp), ZERO, -e_bar, ZERO,
        ZERO, c(mp + kp * kp), e_bar.conj(), ZERO,
        ZERO, ZERO, ZERO, c(kp),
        e_bar.conj() * kp, e_bar * kp, c(kp), ZERO,
    ])
}

/// The first-harmonic matrix `A = A_1`.
pub fn build_a(k: u64, m: f64, e_bar: Complex64) -> Mat4 {
    build_block_matrix(k, m, e_bar, 1)
}

/// Spectral decomposition of a diagonalisable 4×4 matrix.
#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    pub lambdas: [Complex64; 4],
    pub r: [Vec4; 4],
    pub l: [Vec4; 4],
    /// `l_j · r_j`.
    pub lr: [Complex64; 4],
}

impl BlockDecomposition {
    /// `e^{itA} Φ = Σ_j e^{itλ_j} (l_j·Φ)/(l_j·r_j) r_j`.
    pub fn propagate(&self, t: f64, phi: &Vec4) -> Vec4 {
        let mut out = Vec4::zeros();
        for j in 0..4 {
            let w = (Complex64::new(0.0, t) * self.lambdas[j]).exp() * dot(&self.l[j], phi) / self.lr[j];
            out += self.r[j] * w;
        }
        out
    }

    /// Largest relative eigen-residual `‖A r − λ r‖ / (‖A‖‖r‖)` over both sides.
    pub fn residual(&self, a: &Mat4) -> f64 {
        let an = a.norm();
        (0..4)
            .map(|j| {
                let rr = (a * self.r[j] - self.r[j] * self.lambdas[j]).norm() / (an * self.r[j].norm());
                let lr = (a.transpose() * self.l[j] - self.l[j] * self.lambdas[j]).norm() / (an * self.l[j].norm());
                rr.max(lr)
            })
            .fold(0.0, f64::max)
    }
}

fn rayleigh(a: &Mat4, r: &Vec4, l: &Vec4, fallback: Complex64) -> Complex64 {
    let den = dot(l, r);
    if den.norm() == 0.0 {
        return fallback;
    }
    dot(l, &(a * r)) / den
}

/// Eigenvalues and right/left eigenvectors without any classification.
/// Fails with [`Error::NearDefective`] if some `|l·r|` is tiny.
pub fn decompose(a: &Mat4) -> Result<BlockDecomposition> {
    let raw = linalg::eigenvalues(&linalg::to_dmatrix(a))?;
    let lambdas: Vec<Complex64> = raw
        .into_iter()
        .map(|lam| {
            let (r, l) = linalg::eigenpair_vectors(a, lam);
            rayleigh(a, &r, &l, lam)
        })
        .collect();
    build_decomposition(a, [lambdas[0], lambdas[1], lambdas[2], lambdas[3]], [None; 4])
}

fn build_decomposition(
    a: &Mat4,
    lambdas: [Complex64; 4],
    normalize_at: [Option<usize>; 4],
) -> Result<BlockDecomposition> {
    let mut r = [Vec4::zeros(); 4];
    let mut l = [Vec4::zeros(); 4];
    let mut lr = [ZERO; 4];
    let mut worst = f64::INFINITY;
    for j in 0..4 {
        let (mut rj, mut lj) = linalg::eigenpair_vectors(a, lambdas[j]);
        if let Some(idx) = normalize_at[j] {
            if rj[idx].norm() > 0.0 {
                rj /= rj[idx];
            }
            if lj[idx].norm() > 0.0 {
                lj /= lj[idx];
            }
        }
        lr[j] = dot(&lj, &rj);
        worst = worst.min(lr[j].norm() / (lj.norm() * rj.norm()));
        r[j] = rj;
        l[j] = lj;
    }
    if !(worst >= NEAR_DEFECTIVE) {
        return Err(Error::NearDefective(worst));
    }
    Ok(BlockDecomposition { lambdas, r, l, lr })
}

/// Eigenstructure of the first-harmonic matrix `A`, classified as
/// `λ₁ ≈ 2k²` and `λ₂ ≈ −k` real, `λ₃` with positive imaginary part and
/// `λ₄ = conj λ₃`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub k: u64,
    pub m: f64,
    pub e_bar: Complex64,
    pub matrix: [[Complex64; 4]; 4],
    pub lambdas: [Complex64; 4],
    /// Right eigenvectors; `r₁` is scaled to second component 1, `r₂`, `r₃`, `r₄`
    /// to third component 1.
    pub r: [[Complex64; 4]; 4],
    /// Left eigenvectors (row vectors, `l A = λ l`), scaled like `r`.
    pub l: [[Complex64; 4]; 4],
    /// `Im λ₃`.
    pub sigma: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

fn arr(v: &Vec4) -> [Complex64; 4] {
    [v[0], v[1], v[2], v[3]]
}

fn vec4(a: &[Complex64; 4]) -> Vec4 {
    Vec4::new(a[0], a[1], a[2], a[3])
}

impl SpectrumReport {
    pub fn a(&self) -> Mat4 {
        Mat4::from_fn(|i, j| self.matrix[i][j])
    }

    pub fn right(&self, j: usize) -> Vec4 {
        vec4(&self.r[j])
    }

    pub fn left(&self, j: usize) -> Vec4 {
        vec4(&self.l[j])
    }

    pub fn decomposition(&self) -> BlockDecomposition {
        let r = [self.right(0), self.right(1), self.right(2), self.right(3)];
        let l = [self.left(0), self.left(1), self.left(2), self.left(3)];
        let lr = [dot(&l[0], &r[0]), dot(&l[1], &r[1]), dot(&l[2], &r[2]), dot(&l[3], &r[3])];
        BlockDecomposition {
            lambdas: self.lambdas,
            r,
            l,
            lr,
        }
    }

    /// `Re λ₃`.
    pub fn frequency(&self) -> f64 {
        self.lambdas[2].re
    }

    pub fn propagate(&self, t: f64, phi: &Vec4) -> Vec4 {
        self.decomposition().propagate(t, phi)
    }
}

/// Classifies and decomposes the first-harmonic matrix built by [`build_a`].
///
/// Fails with [`Error::Classification`] when the spectrum is not two distinct
/// real eigenvalues plus one non-real conjugate pair, which is what happens
/// below the instability threshold and for `Ē = 0`.
pub fn eig4(a: &Mat4) -> Result<SpectrumReport> {
    let k = a[(2, 3)].re.round() as u64;
    let m = a[(0, 0)].re + (k * k) as f64;
    let e_bar = -a[(0, 2)];

    let raw = linalg::eigenvalues(&linalg::to_dmatrix(a))?;
    let refined: Vec<Complex64> = raw
        .into_iter()
        .map(|lam| {
            let (r, l) = linalg::eigenpair_vectors(a, lam);
            rayleigh(a, &r, &l, lam)
        })
        .collect();

    let mut real = Vec::new();
    let mut complex = Vec::new();
    for lam in refined {
        let rel = lam.im.abs() / lam.norm().max(1.0);
        if rel <= REAL_TOL {
            real.push(lam.re);
        } else if rel > COMPLEX_TOL {
            complex.push(lam);
        } else {
            return Err(Error::Classification(format!(
                "eigenvalue {lam} is neither clearly real nor clearly complex"
            )));
        }
    }
    if real.len() != 2 || complex.len() != 2 {
        return Err(Error::Classification(format!(
            "expected two real eigenvalues and one conjugate pair, found {} real and {} complex",
            real.len(),
            complex.len()
        )));
    }
    let (c1, c2) = (complex[0], complex[1]);
    if (c1 - c2.conj()).norm() > 1e-6 * c1.norm().max(1.0) {
        return Err(Error::Classification(format!(
            "complex eigenvalues {c1} and {c2} are not conjugate"
        )));
    }
    real.sort_by(|x, y| y.abs().partial_cmp(&x.abs()).unwrap());
    if (real[0].abs() - real[1].abs()).abs() <= 1e-12 * real[0].abs() {
        return Err(Error::Classification(format!(
            "real eigenvalues {} and {} tie in magnitude",
            real[0], real[1]
        )));
    }
    let top = if c1.im > 0.0 { c1 } else { c2 };
    let bottom = if c1.im > 0.0 { c2 } else { c1 };
    let avg = 0.5 * (top + bottom.conj());
    let lambdas = [
        Complex64::new(real[0], 0.0),
        Complex64::new(real[1], 0.0),
        avg,
        avg.conj(),
    ];

    let mut warnings = Vec::new();
    let dec = match build_decomposition(a, lambdas, [Some(1), Some(2), Some(2), Some(2)]) {
        Ok(d) => d,
        Err(Error::NearDefective(w)) => {
            warnings.push(format!("near-defective eigenpair: min |l·r|/(|l||r|) = {w:e}"));
            build_decomposition_unchecked(a, lambdas)
        }
        Err(e) => return Err(e),
    };
    let res = dec.residual(a);
    if res > 1e-9 {
        warnings.push(format!("eigen-residual {res:e} exceeds 1e-9"));
    }
    let matrix = [0, 1, 2, 3].map(|i| [0, 1, 2, 3].map(|j| a[(i, j)]));
    Ok(SpectrumReport {
        k,
        m,
        e_bar,
        matrix,
        lambdas,
        r: dec.r.each_ref().map(arr),
        l: dec.l.each_ref().map(arr),
        sigma: lambdas[2].im,
        warnings,
    })
}

fn build_decomposition_unchecked(a: &Mat4, lambdas: [Complex64; 4]) -> BlockDecomposition {
    let norm_idx = [1, 2, 2, 2];
    let mut r = [Vec4::zeros(); 4];
    let mut l = [Vec4::zeros(); 4];
    let mut lr = [ZERO; 4];
    for j in 0..4 {
        let (mut rj, mut lj) = linalg::eigenpair_vectors(a, lambdas[j]);
        if rj[norm_idx[j]].norm() > 0.0 {
            rj /= rj[norm_idx[j]];
        }
        if lj[norm_idx[j]].norm() > 0.0 {
            lj /= lj[norm_idx[j]];
        }
        lr[j] = dot(&lj, &rj);
        r[j] = rj;
        l[j] = lj;
    }
    BlockDecomposition { lambdas, r, l, lr }
}

/// `e^{itA} Φ` through the spectral decomposition of `rep`.
pub fn propagate(rep: &SpectrumReport, t: f64, phi: &Vec4) -> Vec4 {
    rep.propagate(t, phi)
}

/// Spectrum of the first harmonic for `m` chosen next to `k² + k`.
pub fn spectrum_for(k: u64, e_bar: Complex64, z: Ratio<i64>) -> Result<SpectrumReport> {
    let modes = choose_m(k, z);
    eig4(&build_a(k, modes.m_f64(), e_bar))
}

/// Growth rate `σ = Im λ₃`.
pub fn sigma_of(k: u64, e_bar: Complex64, z: Ratio<i64>) -> Result<f64> {
    Ok(spectrum_for(k, e_bar, z)?.sigma)
}

/// Smallest `k ≤ k_max` at which [`eig4`] classifies the first-harmonic
/// spectrum (two real eigenvalues and an unstable conjugate pair).
pub fn find_k0(e_bar: Complex64, z: Ratio<i64>, k_max: u64) -> Option<u64> {
    (1..=k_max).find(|&k| spectrum_for(k, e_bar, z).is_ok())
}
