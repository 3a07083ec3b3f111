//! Transfer operator on polynomials: triangular matrix, eigenvalues and
//! monic eigenpolynomials.
//!
//! On the monomial basis `b_k = x^k` the operator `Th = Σ p_i h∘f_i` is upper
//! triangular with entries `C(k,l) Σ_i p_i t_i^l v_i^(k−l)`, so the diagonal
//! `λ_k = Σ p_i t_i^k` is the spectrum and the eigenvectors follow by
//! back-substitution.

use crate::error::{Error, Result};
use crate::ifs::IfsModel;
use crate::poly::Polynomial;
use crate::scalar::{binomial_row, Scalar};

/// Minimum eigenvalue gap accepted by float back-substitution.
pub const FLOAT_GAP_GUARD: f64 = 1e-10;

/// `(n+1)×(n+1)` upper-triangular matrix of `T` on `b_0..b_n`; column `k`
/// holds the coefficients of `T b_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularRep<T> {
    entries: Vec<Vec<T>>,
}

impl<T: Scalar> TriangularRep<T> {
    pub fn degree(&self) -> usize {
        self.entries.len() - 1
    }

    /// Entry in row `l`, column `k`.
    pub fn get(&self, l: usize, k: usize) -> &T {
        &self.entries[l][k]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.entries
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.entries.len())
            .map(|k| self.entries[k][k].clone())
            .collect()
    }

    /// Matrix–vector product on a coefficient vector of length ≤ n+1.
    pub fn apply(&self, coeffs: &[T]) -> Vec<T> {
        self.entries
            .iter()
            .map(|row| {
                row.iter()
                    .zip(coeffs)
                    .fold(T::zero(), |acc, (a, c)| acc + a.clone() * c.clone())
            })
            .collect()
    }
}

/// Eigenvalues `λ_0..λ_n` with monic eigenpolynomials `q_0..q_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem<T> {
    pub eigenvalues: Vec<T>,
    pub eigenpolys: Vec<Polynomial<T>>,
}

impl<T: Scalar> EigenSystem<T> {
    pub fn degree(&self) -> usize {
        self.eigenvalues.len() - 1
    }

    /// Coefficient `a_{n,k}` of `x^k` in `q_n`.
    pub fn coeff(&self, n: usize, k: usize) -> T {
        self.eigenpolys[n].coeff(k)
    }
}

pub(crate) fn check_degree<T: Scalar>(n: usize) -> Result<()> {
    match T::max_degree() {
        Some(max) if n > max => Err(Error::DegreeTooLarge { degree: n, max }),
        _ => Ok(()),
    }
}

/// Pascal's triangle rows `0..=n` in the target backend.
pub(crate) fn pascal<T: Scalar>(n: usize) -> Vec<Vec<T>> {
    (0..=n).map(binomial_row).collect()
}

fn powers<T: Scalar>(x: &T, n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(T::one());
    for j in 1..=n {
        out.push(out[j - 1].clone() * x.clone());
    }
    out
}

/// `λ_k = Σ_i p_i t_i^k` for `k = 0..=n`.
pub fn eigenvalues<T: Scalar>(model: &IfsModel<T>, n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n + 1];
    for (map, p) in model.maps().iter().zip(model.probs()) {
        for (k, tk) in powers(&map.t, n).into_iter().enumerate() {
            out[k] = out[k].clone() + p.clone() * tk;
        }
    }
    out
}

pub fn build_triangular<T: Scalar>(model: &IfsModel<T>, n: usize) -> Result<TriangularRep<T>> {
    check_degree::<T>(n)?;
    let binom = pascal::<T>(n);
    let per_map: Vec<(Vec<T>, Vec<T>)> = model
        .maps()
        .iter()
        .map(|m| (powers(&m.t, n), powers(&m.v, n)))
        .collect();
    let mut entries = vec![vec![T::zero(); n + 1]; n + 1];
    for (k, binom_k) in binom.iter().enumerate() {
        for l in 0..=k {
            let mixed = per_map.iter().zip(model.probs()).fold(
                T::zero(),
                |acc, ((tp, vp), p)| acc + p.clone() * tp[l].clone() * vp[k - l].clone(),
            );
            entries[l][k] = binom_k[l].clone() * mixed;
        }
    }
    Ok(TriangularRep { entries })
}

/// Eigenpolynomials of an arbitrary affine IFS by back-substitution on the
/// triangular representation.
pub fn eigenpolys_general<T: Scalar>(model: &IfsModel<T>, n: usize) -> Result<EigenSystem<T>> {
    let rep = build_triangular(model, n)?;
    let lambda = rep.diagonal();
    if !T::EXACT && n > 0 {
        let gap = lambda
            .windows(2)
            .map(|w| (w[0].clone() - w[1].clone()).to_f64())
            .fold(f64::INFINITY, f64::min);
        if gap <= FLOAT_GAP_GUARD {
            return Err(Error::NearDegenerateSpectrum { gap });
        }
    }
    let eigenpolys = (0..=n)
        .map(|k| {
            let mut a = vec![T::zero(); k + 1];
            a[k] = T::one();
            // row l of (T − λ_k) a = 0, solved for a_l from the rows below
            for l in (0..k).rev() {
                let rhs = (l + 1..=k).fold(T::zero(), |acc, j| {
                    acc + rep.get(l, j).clone() * a[j].clone()
                });
                a[l] = rhs / (lambda[k].clone() - lambda[l].clone());
            }
            Polynomial::new(a)
        })
        .collect();
    Ok(EigenSystem {
        eigenvalues: lambda,
        eigenpolys,
    })
}

/// Closed recursion for the Bernoulli convolution `tx ∓ (1−t)`.
///
/// `a_{n,n} = 1`, `a_{n,n−1} = 0` and for `k ≤ n−2`
/// `a_{n,k} = (t^(n−k) − 1)^(−1) Σ_{s≥1} C(k+2s, k) (1−t)^(2s) a_{n,k+2s}`.
pub fn eigenpolys_bernoulli<T: Scalar>(t: T, n: usize) -> Result<EigenSystem<T>> {
    if t <= T::zero() || t >= T::one() {
        return Err(Error::ContractionOutOfRange {
            index: 0,
            value: t.to_text(),
        });
    }
    check_degree::<T>(n)?;
    let binom = pascal::<T>(n);
    let t_pow = powers(&t, n);
    let gap_sq = powers(&((T::one() - t.clone()) * (T::one() - t)), n / 2);
    let eigenpolys = (0..=n)
        .map(|deg| {
            let mut a = vec![T::zero(); deg + 1];
            a[deg] = T::one();
            for k in (0..deg.saturating_sub(1)).rev() {
                let sum = (1..=(deg - k) / 2).fold(T::zero(), |acc, s| {
                    acc + binom[k + 2 * s][k].clone() * gap_sq[s].clone() * a[k + 2 * s].clone()
                });
                a[k] = sum / (t_pow[deg - k].clone() - T::one());
            }
            Polynomial::new(a)
        })
        .collect();
    Ok(EigenSystem {
        eigenvalues: t_pow,
        eigenpolys,
    })
}

/// `Σ_i p_i · p(t_i x + v_i)`, expanded in the monomial basis.
pub fn apply_transfer<T: Scalar>(model: &IfsModel<T>, p: &Polynomial<T>) -> Polynomial<T> {
    model
        .maps()
        .iter()
        .zip(model.probs())
        .fold(Polynomial::zero(), |acc, (map, prob)| {
            &acc + &p.compose_affine(&map.t, &map.v).scale(prob)
        })
}
