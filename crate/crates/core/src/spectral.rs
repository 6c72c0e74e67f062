//! Truncated Fourier series on the circle `θ ∈ [0, 2π)`.
//!
//! A [`FourierField`] stores the coefficients `v̂_p` of
//! `v(θ) = Σ_{|p| ≤ P} v̂_p e^{ipθ}`. Real fields carry the Hermitian
//! symmetry `v̂_{−p} = conj(v̂_p)`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum tolerated relative violation of `v̂_{−p} = conj(v̂_p)` before a
/// real field is considered corrupted.
pub const REALITY_TOLERANCE: f64 = 1e-8;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Grid size used by [`product`]: the 2/3 rule applied to `2P+1` modes.
pub fn dealiased_grid_size(truncation: usize) -> usize {
    (3 * (2 * truncation + 1)).div_ceil(2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldRepr", into = "FieldRepr")]
pub struct FourierField {
    coeffs: Vec<Complex64>,
    truncation: usize,
    is_real: bool,
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    truncation: usize,
    is_real: bool,
    coeffs: Vec<Complex64>,
}

impl From<FourierField> for FieldRepr {
    fn from(f: FourierField) -> Self {
        FieldRepr {
            truncation: f.truncation,
            is_real: f.is_real,
            coeffs: f.coeffs,
        }
    }
}

impl TryFrom<FieldRepr> for FourierField {
    type Error = Error;

    fn try_from(r: FieldRepr) -> Result<Self> {
        let f = FourierField::from_coeffs(r.coeffs, r.is_real)?;
        if f.truncation != r.truncation {
            return Err(Error::TruncationMismatch(f.truncation, r.truncation));
        }
        Ok(f)
    }
}

impl FourierField {
    pub fn zeros(truncation: usize, is_real: bool) -> Self {
        FourierField {
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * truncation + 1],
            truncation,
            is_real,
        }
    }

    /// Builds a field from coefficients ordered `p = −P, …, P`.
    ///
    /// Real fields are symmetrised on construction.
    pub fn from_coeffs(coeffs: Vec<Complex64>, is_real: bool) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::BadLength(coeffs.len()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("FourierField::from_coeffs"));
        }
        let truncation = coeffs.len() / 2;
        let mut f = FourierField {
            coeffs,
            truncation,
            is_real,
        };
        if is_real {
            f.symmetrize();
        }
        Ok(f)
    }

    pub fn from_fn(truncation: usize, is_real: bool, mut coeff: impl FnMut(i64) -> Complex64) -> Self {
        let p = truncation as i64;
        let coeffs = (-p..=p).map(&mut coeff).collect();
        let mut f = FourierField {
            coeffs,
            truncation,
            is_real,
        };
        if is_real {
            f.symmetrize();
        }
        f
    }

    /// The constant field `c`.
    pub fn constant(truncation: usize, c: Complex64) -> Self {
        let mut f = FourierField::zeros(truncation, c.im == 0.0);
        f.coeffs[truncation] = c;
        f
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `v̂_p`, or zero outside the stored band.
    pub fn coeff(&self, p: i64) -> Complex64 {
        if p.unsigned_abs() as usize > self.truncation {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(p + self.truncation as i64) as usize]
        }
    }

    /// Sets `v̂_p`; for real fields the mirror coefficient is set as well.
    ///
    /// # Panics
    ///
    /// If `|p| > P`.
    pub fn set(&mut self, p: i64, c: Complex64) {
        let off = self.truncation as i64;
        assert!(p.abs() <= off, "mode {p} outside truncation {off}");
        self.coeffs[(p + off) as usize] = c;
        if self.is_real {
            self.coeffs[(off - p) as usize] = c.conj();
            if p == 0 {
                self.coeffs[off as usize] = Complex64::new(c.re, 0.0);
            }
        }
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let off = self.truncation as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - off, c))
    }

    /// Marks the field as complex; coefficients are untouched.
    pub fn into_complex(mut self) -> Self {
        self.is_real = false;
        self
    }

    /// Declares the field real, symmetrising it. Fails if the drift exceeds
    /// [`REALITY_TOLERANCE`].
    pub fn into_real(mut self) -> Result<Self> {
        self.is_real = true;
        let drift = self.symmetrize();
        if drift > REALITY_TOLERANCE {
            return Err(Error::RealityDrift {
                drift,
                tolerance: REALITY_TOLERANCE,
            });
        }
        Ok(self)
    }

    /// Relative violation of the Hermitian symmetry, `max |v̂_{−p} − conj v̂_p| / max |v̂|`.
    pub fn reality_drift(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let p = self.truncation as i64;
        (0..=p)
            .map(|q| (self.coeff(-q) - self.coeff(q).conj()).norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// Replaces `v̂_p` by the average of `v̂_p` and `conj(v̂_{−p})`. Returns the
    /// relative drift measured before symmetrisation.
    pub fn symmetrize(&mut self) -> f64 {
        let drift = self.reality_drift();
        let off = self.truncation;
        for q in 1..=off {
            let avg = 0.5 * (self.coeffs[off + q] + self.coeffs[off - q].conj());
            self.coeffs[off + q] = avg;
            self.coeffs[off - q] = avg.conj();
        }
        self.coeffs[off].im = 0.0;
        drift
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn scale(&self, a: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= a);
        out.is_real = self.is_real && a.im == 0.0;
        out
    }

    pub fn scale_real(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= a);
        out
    }

    /// `self + a · other`.
    pub fn axpy(&self, a: Complex64, other: &FourierField) -> Result<Self> {
        check_same(self, other)?;
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *c += a * o;
        }
        out.is_real = self.is_real && other.is_real && a.im == 0.0;
        Ok(out)
    }

    pub fn add(&self, other: &FourierField) -> Result<Self> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &FourierField) -> Result<Self> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// Coefficients of the pointwise complex conjugate: `(v̄)^_p = conj(v̂_{−p})`.
    pub fn conj_field(&self) -> Self {
        let p = self.truncation as i64;
        FourierField {
            coeffs: (-p..=p).map(|q| self.coeff(-q).conj()).collect(),
            truncation: self.truncation,
            is_real: self.is_real,
        }
    }

    /// Coefficients of `Re v`.
    pub fn real_part(&self) -> Self {
        let c = self.conj_field();
        let mut out = FourierField {
            coeffs: self
                .coeffs
                .iter()
                .zip(&c.coeffs)
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
            truncation: self.truncation,
            is_real: true,
        };
        out.symmetrize();
        out
    }

    /// Same field with a different truncation (zero padded or cut).
    pub fn with_truncation(&self, truncation: usize) -> Self {
        FourierField::from_fn(truncation, self.is_real, |p| self.coeff(p))
    }

    /// Values `v(θ_j)` on the uniform grid `θ_j = 2πj/n`, `n ≥ 2P+1`.
    pub fn synthesize(&self, n: usize) -> Vec<Complex64> {
        assert!(n > 2 * self.truncation, "grid of {n} points cannot carry {} modes", 2 * self.truncation + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (p, c) in self.modes() {
            buf[p.rem_euclid(n as i64) as usize] = c;
        }
        plan(n, true).process(&mut buf);
        buf
    }

    /// Coefficients `|p| ≤ P` of grid values on `θ_j = 2πj/n`.
    pub fn analyze(values: &[Complex64], truncation: usize, is_real: bool) -> Self {
        let n = values.len();
        assert!(n > 2 * truncation, "grid of {n} points cannot resolve {} modes", 2 * truncation + 1);
        let mut buf = values.to_vec();
        plan(n, false).process(&mut buf);
        let inv = 1.0 / n as f64;
        FourierField::from_fn(truncation, is_real, |p| buf[p.rem_euclid(n as i64) as usize] * inv)
    }

    /// Pointwise evaluation at a single θ.
    pub fn eval(&self, theta: f64) -> Complex64 {
        self.modes()
            .map(|(p, c)| c * Complex64::from_polar(1.0, p as f64 * theta))
            .sum()
    }
}

fn check_same(a: &FourierField, b: &FourierField) -> Result<()> {
    if a.truncation != b.truncation {
        return Err(Error::TruncationMismatch(a.truncation, b.truncation));
    }
    Ok(())
}

/// `(Σ_p (1+p²)^s |v̂_p|²)^{1/2}`.
pub fn sobolev_norm(v: &FourierField, s: f64) -> f64 {
    debug_assert!(s >= 0.0);
    v.modes()
        .map(|(p, c)| (1.0 + (p * p) as f64).powf(s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `‖v‖_{L²(0, 2π)} = √(2π) · (Σ |v̂_p|²)^{1/2}`.
pub fn l2_norm(v: &FourierField) -> f64 {
    (2.0 * PI).sqrt() * sobolev_norm(v, 0.0)
}

/// Dealiased pointwise product, truncated back to `P`.
pub fn product(a: &FourierField, b: &FourierField) -> Result<FourierField> {
    check_same(a, b)?;
    let p = a.truncation;
    let n = dealiased_grid_size(p);
    let av = a.synthesize(n);
    let bv = b.synthesize(n);
    let prod: Vec<Complex64> = av.iter().zip(&bv).map(|(x, y)| x * y).collect();
    let mut out = FourierField::analyze(&prod, p, false);
    if a.is_real && b.is_real {
        out = out.into_real()?;
    }
    if !out.is_finite() {
        return Err(Error::NonFinite("product"));
    }
    Ok(out)
}

/// `∂θ² v`: coefficient `p` is multiplied by `−p²`.
pub fn second_theta_derivative(v: &FourierField) -> FourierField {
    let mut out = v.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        let p = i as f64 - v.truncation as f64;
        *c *= -p * p;
    }
    out
}

/// `∂θ v`.
pub fn theta_derivative(v: &FourierField) -> FourierField {
    let mut out = v.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        let p = i as f64 - v.truncation as f64;
        *c *= Complex64::new(0.0, p);
    }
    out
}

/// State `(e, n, ∂t n)` at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateU {
    pub e: FourierField,
    pub n: FourierField,
    pub n_t: FourierField,
    pub t: f64,
}

impl StateU {
    pub fn zeros(truncation: usize, t: f64) -> Self {
        StateU {
            e: FourierField::zeros(truncation, false),
            n: FourierField::zeros(truncation, true),
            n_t: FourierField::zeros(truncation, true),
            t,
        }
    }

    /// Validates the shared truncation and the reality of `n`, `∂t n`.
    pub fn new(e: FourierField, n: FourierField, n_t: FourierField, t: f64) -> Result<Self> {
        check_same(&e, &n)?;
        check_same(&e, &n_t)?;
        Ok(StateU {
            e: e.into_complex(),
            n: n.into_real()?,
            n_t: n_t.into_real()?,
            t,
        })
    }

    pub fn truncation(&self) -> usize {
        self.e.truncation()
    }

    pub fn axpy(&self, a: f64, other: &StateU) -> Result<StateU> {
        let ca = Complex64::new(a, 0.0);
        Ok(StateU {
            e: self.e.axpy(ca, &other.e)?,
            n: self.n.axpy(ca, &other.n)?,
            n_t: self.n_t.axpy(ca, &other.n_t)?,
            t: self.t,
        })
    }

    pub fn scale(&self, a: f64) -> StateU {
        StateU {
            e: self.e.scale_real(a),
            n: self.n.scale_real(a),
            n_t: self.n_t.scale_real(a),
            t: self.t,
        }
    }
}
