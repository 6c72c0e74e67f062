//! Small dense complex linear algebra: balancing, a shifted QR eigenvalue
//! iteration, inverse iteration for eigenvectors and a scaling-and-squaring
//! matrix exponential.

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat4 = Matrix4<Complex64>;
pub type Vec4 = Vector4<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Bilinear (non-conjugating) product `Σ a_i b_i`.
pub fn dot(a: &Vec4, b: &Vec4) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn norm1(m: &DMatrix<Complex64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Parlett–Reinsch balancing by powers of two. Returns the diagonal scaling
/// `D` such that the balanced matrix is `D⁻¹ M D`.
pub fn balance(m: &mut DMatrix<Complex64>) -> DVector<f64> {
    let n = m.nrows();
    let mut d = DVector::from_element(n, 1.0);
    let radix = 2.0f64;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].norm();
                    r += m[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= radix * radix;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                d[i] *= f;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
    d
}

/// Householder reduction to upper Hessenberg form (similarity, in place).
fn hessenberg(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    for j in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (j + 1..n).map(|i| m[(i, j)]).collect();
        let xnorm = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { ONE } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|c| *c /= vnorm);
        // M ← (I − 2vv*) M
        for col in 0..n {
            let s: Complex64 = (0..v.len()).map(|i| v[i].conj() * m[(j + 1 + i, col)]).sum();
            for i in 0..v.len() {
                m[(j + 1 + i, col)] -= 2.0 * v[i] * s;
            }
        }
        // M ← M (I − 2vv*)
        for row in 0..n {
            let s: Complex64 = (0..v.len()).map(|i| m[(row, j + 1 + i)] * v[i]).sum();
            for i in 0..v.len() {
                m[(row, j + 1 + i)] -= 2.0 * s * v[i].conj();
            }
        }
        for i in j + 2..n {
            m[(i, j)] = ZERO;
        }
    }
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = 0.5 * (a - d);
    let disc = (half * half + b * c).sqrt();
    let mu1 = 0.5 * (a + d) + disc;
    let mu2 = 0.5 * (a + d) - disc;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

/// Eigenvalues of a general complex matrix: balancing, Hessenberg reduction
/// and single-shift QR with deflation.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let mut h = m.clone();
    balance(&mut h);
    hessenberg(&mut h);
    let mut eig = vec![ZERO; n];
    let mut hi = n as isize - 1;
    let mut its = 0usize;
    while hi >= 0 {
        let hiu = hi as usize;
        // locate the start of the active unreduced block
        let mut lo = hiu;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let s = if s == 0.0 { norm1(&h) } else { s };
            if h[(lo, lo - 1)].norm() <= f64::EPSILON * s {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hiu {
            eig[hiu] = h[(hiu, hiu)];
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        if its > 60 {
            return Err(Error::EigenNoConvergence);
        }
        let mu = if its % 11 == 10 {
            // exceptional shift
            h[(hiu, hiu)] + Complex64::new(0.75 * h[(hiu, hiu - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(
                h[(hiu - 1, hiu - 1)],
                h[(hiu - 1, hiu)],
                h[(hiu, hiu - 1)],
                h[(hiu, hiu)],
            )
        };
        for i in lo..=hiu {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hiu - lo);
        for j in lo..hiu {
            let x = h[(j, j)];
            let y = h[(j + 1, j)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 { (ONE, ZERO) } else { (x / r, y / r) };
            for col in j..=hiu {
                let a = h[(j, col)];
                let b = h[(j + 1, col)];
                h[(j, col)] = c.conj() * a + s.conj() * b;
                h[(j + 1, col)] = -s * a + c * b;
            }
            rots.push((c, s));
        }
        for (idx, j) in (lo..hiu).enumerate() {
            let (c, s) = rots[idx];
            for row in lo..=(j + 1).min(hiu) {
                let a = h[(row, j)];
                let b = h[(row, j + 1)];
                h[(row, j)] = a * c + b * s;
                h[(row, j + 1)] = -a * s.conj() + b * c.conj();
            }
        }
        for i in lo..=hiu {
            h[(i, i)] += mu;
        }
    }
    if eig.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::EigenNoConvergence);
    }
    Ok(eig)
}

pub fn to_dmatrix(m: &Mat4) -> DMatrix<Complex64> {
    DMatrix::from_fn(4, 4, |i, j| m[(i, j)])
}

/// Null vector of `M − λI` by inverse iteration.
pub fn inverse_iteration(m: &Mat4, lambda: Complex64) -> Vec4 {
    let scale = m.iter().map(|c| c.norm()).fold(0.0, f64::max).max(lambda.norm()).max(1e-300);
    let mut shift = lambda;
    let mut x = Vec4::new(
        Complex64::new(1.0, 0.1),
        Complex64::new(0.7, -0.3),
        Complex64::new(-0.4, 0.9),
        Complex64::new(0.5, 0.25),
    );
    for attempt in 0..4 {
        let shifted = m - Mat4::identity() * shift;
        let lu = shifted.lu();
        let mut ok = true;
        for _ in 0..3 {
            match lu.solve(&x) {
                Some(y) if y.iter().all(|c| c.re.is_finite() && c.im.is_finite()) => {
                    let nrm = y.norm();
                    if nrm == 0.0 {
                        ok = false;
                        break;
                    }
                    x = y / Complex64::new(nrm, 0.0);
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return x;
        }
        // exactly singular pivot: nudge the shift off the eigenvalue
        shift = lambda + Complex64::new(scale * 1e-14 * (attempt + 1) as f64, scale * 1e-14);
    }
    x
}

/// Right and left eigenvectors `(r, l)` with `M r = λ r`, `l M = λ l`.
pub fn eigenpair_vectors(m: &Mat4, lambda: Complex64) -> (Vec4, Vec4) {
    let r = inverse_iteration(m, lambda);
    let l = inverse_iteration(&m.transpose(), lambda);
    (r, l)
}

/// `exp(M)` by scaling and squaring of a Taylor series.
pub fn expm(m: &Mat4) -> Mat4 {
    let norm = (0..4)
        .map(|j| m.column(j).iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let scaled = m / Complex64::new(2f64.powi(squarings as i32), 0.0);
    let mut sum = Mat4::identity();
    let mut term = Mat4::identity();
    for j in 1..40 {
        term = term * scaled / Complex64::new(j as f64, 0.0);
        sum += term;
        if term.iter().map(|c| c.norm()).fold(0.0, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}
