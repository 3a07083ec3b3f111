//! Dense nonsymmetric eigenvalue problem: balancing, Householder reduction to
//! Hessenberg form and Francis double-shift QR, plus inverse iteration for
//! individual eigenvectors.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative size below which a subdiagonal entry is treated as zero.
pub const DEFLATION_TOL: f64 = 1e-10;

/// Total QR sweeps allowed per matrix dimension.
pub const SWEEPS_PER_DIM: usize = 40;

/// Diagonal similarity scaling (powers of two) so that row and column norms
/// are comparable. Returns the scaling vector `d` with `B = D⁻¹ A D`.
pub fn balance(a: &mut DMatrix<f64>) -> Vec<f64> {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let mut scale = vec![1.0; n];
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                scale[i] *= f;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
    }
    scale
}

/// Orthogonal similarity reduction to upper Hessenberg form, in place.
pub fn hessenberg(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    let mut ort = vec![0.0; n];
    for m in 1..n - 1 {
        let scale: f64 = (m..n).map(|i| a[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut h = 0.0;
        for i in (m..n).rev() {
            ort[i] = a[(i, m - 1)] / scale;
            h += ort[i] * ort[i];
        }
        let mut g = h.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        h -= ort[m] * g;
        ort[m] -= g;
        // (I − u uᵀ/h) A (I − u uᵀ/h)
        for j in m..n {
            let f = (m..n).rev().map(|i| ort[i] * a[(i, j)]).sum::<f64>() / h;
            for i in m..n {
                a[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..n {
            let f = (m..n).rev().map(|j| ort[j] * a[(i, j)]).sum::<f64>() / h;
            for j in m..n {
                a[(i, j)] -= f * ort[j];
            }
        }
        a[(m, m - 1)] = scale * g;
        for i in m + 1..n {
            a[(i, m - 1)] = 0.0;
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by shifted double-step QR with
/// deflation. The matrix is overwritten.
pub fn hessenberg_eigenvalues(h: &mut DMatrix<f64>, tol: f64) -> Result<Vec<Complex64>> {
    let n = h.nrows();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(out);
    }
    let max_sweeps = SWEEPS_PER_DIM * n;
    let mut sweeps = 0usize;
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += h[(i, j)].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut shift = 0.0;
    let mut its = 0usize;
    let (mut p, mut q, mut r);
    while nn >= 0 {
        let top = nn as usize;
        let mut l = top;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = anorm;
            }
            if h[(l, l - 1)].abs() <= tol * s {
                h[(l, l - 1)] = 0.0;
                break;
            }
            l -= 1;
        }
        let mut x = h[(top, top)];
        if l == top {
            out[top] = Complex64::new(x + shift, 0.0);
            nn -= 1;
            its = 0;
            continue;
        }
        let mut y = h[(top - 1, top - 1)];
        let mut w = h[(top, top - 1)] * h[(top - 1, top)];
        if l == top - 1 {
            let pp = 0.5 * (y - x);
            let qq = pp * pp + w;
            let z = qq.abs().sqrt();
            x += shift;
            if qq >= 0.0 {
                let z = pp + z.copysign(pp);
                out[top - 1] = Complex64::new(x + z, 0.0);
                out[top] = out[top - 1];
                if z != 0.0 {
                    out[top] = Complex64::new(x - w / z, 0.0);
                }
            } else {
                out[top] = Complex64::new(x + pp, -z);
                out[top - 1] = out[top].conj();
            }
            nn -= 2;
            its = 0;
            continue;
        }
        if sweeps >= max_sweeps {
            return Err(Error::QrNotConverged { sweeps });
        }
        if its > 0 && its.is_multiple_of(10) {
            // exceptional shift
            shift += x;
            for i in 0..=top {
                h[(i, i)] -= x;
            }
            let s = h[(top, top - 1)].abs() + h[(top - 1, top - 2)].abs();
            x = 0.75 * s;
            y = x;
            w = -0.4375 * s * s;
        }
        its += 1;
        sweeps += 1;
        // look for two consecutive small subdiagonal elements
        let mut m = top - 2;
        loop {
            let z = h[(m, m)];
            let rr = x - z;
            let ss = y - z;
            p = (rr * ss - w) / h[(m + 1, m)] + h[(m, m + 1)];
            q = h[(m + 1, m + 1)] - z - rr - ss;
            r = h[(m + 2, m + 1)];
            let s = p.abs() + q.abs() + r.abs();
            p /= s;
            q /= s;
            r /= s;
            if m == l {
                break;
            }
            let u = h[(m, m - 1)].abs() * (q.abs() + r.abs());
            let v = p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs());
            if u <= f64::EPSILON * v {
                break;
            }
            m -= 1;
        }
        for i in m..top - 1 {
            h[(i + 2, i)] = 0.0;
            if i != m {
                h[(i + 2, i - 1)] = 0.0;
            }
        }
        // double QR step on rows l..=top, columns m..=top
        for k in m..top {
            if k != m {
                p = h[(k, k - 1)];
                q = h[(k + 1, k - 1)];
                r = if k + 1 != top { h[(k + 2, k - 1)] } else { 0.0 };
                x = p.abs() + q.abs() + r.abs();
                if x != 0.0 {
                    p /= x;
                    q /= x;
                    r /= x;
                }
            }
            let s = (p * p + q * q + r * r).sqrt().copysign(p);
            if s == 0.0 {
                continue;
            }
            if k == m {
                if l != m {
                    h[(k, k - 1)] = -h[(k, k - 1)];
                }
            } else {
                h[(k, k - 1)] = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            let z = r / s;
            q /= p;
            r /= p;
            for j in k..=top {
                let mut pj = h[(k, j)] + q * h[(k + 1, j)];
                if k + 1 != top {
                    pj += r * h[(k + 2, j)];
                    h[(k + 2, j)] -= pj * z;
                }
                h[(k + 1, j)] -= pj * y;
                h[(k, j)] -= pj * x;
            }
            let mmin = top.min(k + 3);
            for i in l..=mmin {
                let mut pi = x * h[(i, k)] + y * h[(i, k + 1)];
                if k + 1 != top {
                    pi += z * h[(i, k + 2)];
                    h[(i, k + 2)] -= pi * r;
                }
                h[(i, k + 1)] -= pi * q;
                h[(i, k)] -= pi;
            }
        }
    }
    Ok(out)
}

/// All eigenvalues of a general real matrix, sorted by descending modulus.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    assert!(a.is_square(), "matrix must be square");
    let mut work = a.clone();
    balance(&mut work);
    hessenberg(&mut work);
    let mut values = hessenberg_eigenvalues(&mut work, DEFLATION_TOL)?;
    sort_by_modulus(&mut values);
    Ok(values)
}

/// Descending modulus; ties by real part, then imaginary part.
pub fn sort_by_modulus(values: &mut [Complex64]) {
    values.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
}

/// Right eigenvector of `a` for the eigenvalue nearest `lambda`, normalised
/// to unit 2-norm with its largest entry real and positive.
pub fn inverse_iteration(a: &DMatrix<f64>, lambda: Complex64, iterations: usize) -> Vec<Complex64> {
    let n = a.nrows();
    // nudge the shift off the computed eigenvalue so the factorization is regular
    let nudge = 1e-10 * lambda.norm().max(1.0);
    let mu = lambda + Complex64::new(nudge, 0.0);
    let shifted = DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { mu } else { Complex64::new(0.0, 0.0) };
        Complex64::new(a[(i, j)], 0.0) - d
    });
    let lu = shifted.lu();
    let mut v = nalgebra::DVector::from_fn(n, |i, _| {
        Complex64::new(1.0 + 0.5 * ((i as f64) * 0.7548776662).fract(), 0.0)
    });
    v /= Complex64::new(v.norm(), 0.0);
    for _ in 0..iterations.max(1) {
        let Some(next) = lu.solve(&v) else {
            break;
        };
        let norm = next.norm();
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        v = next / Complex64::new(norm, 0.0);
    }
    let mut out: Vec<Complex64> = v.iter().copied().collect();
    normalize_phase(&mut out);
    out
}

/// Scales so the largest-modulus entry is real and positive.
pub fn normalize_phase(v: &mut [Complex64]) {
    let Some(pivot) = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
    else {
        return;
    };
    if pivot.norm() == 0.0 {
        return;
    }
    let phase = pivot.conj() / pivot.norm();
    for x in v.iter_mut() {
        *x *= phase;
    }
}
