//! Symmetric positive definite solves: fraction-free elimination for exact
//! input, Cholesky with a condition estimate for floats.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::common_denominator;

/// Float solves refuse systems whose 1-norm condition estimate exceeds this.
pub const MAX_CONDITION: f64 = 1e14;

/// Solves `A x = b` exactly.
///
/// Each row is scaled to integers, then Bareiss' fraction-free elimination
/// keeps every intermediate entry an integer (each step divides exactly by the
/// previous pivot). Only the final back-substitution forms fractions.
pub fn solve_fraction_free(a: &[Vec<BigRational>], b: &[BigRational]) -> Result<Vec<BigRational>> {
    let n = a.len();
    assert_eq!(b.len(), n, "right-hand side length");
    let mut rows: Vec<Vec<BigInt>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), n, "matrix must be square");
            let scale = common_denominator(row.iter().chain(std::iter::once(rhs)));
            row.iter()
                .chain(std::iter::once(rhs))
                .map(|x| (x * BigRational::from_integer(scale.clone())).to_integer())
                .collect()
        })
        .collect();
    let mut prev_pivot = BigInt::from(1);
    for k in 0..n {
        let pivot_row = (k..n)
            .find(|&i| !rows[i][k].is_zero())
            .ok_or(Error::IllConditioned {
                estimate: f64::INFINITY,
            })?;
        rows.swap(k, pivot_row);
        let (upper, lower) = rows.split_at_mut(k + 1);
        let pivot_line = &upper[k];
        for row in lower.iter_mut() {
            for j in k + 1..=n {
                row[j] = (&pivot_line[k] * &row[j] - &row[k] * &pivot_line[j]) / &prev_pivot;
            }
            row[k] = BigInt::zero();
        }
        prev_pivot = rows[k][k].clone();
    }
    let mut x = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = BigRational::from_integer(rows[i][n].clone());
        for j in i + 1..n {
            acc -= BigRational::from_integer(rows[i][j].clone()) * &x[j];
        }
        x[i] = acc / BigRational::from_integer(rows[i][i].clone());
    }
    Ok(x)
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Cholesky solve with the 1-norm condition number `‖A‖₁‖A⁻¹‖₁`.
///
/// Fails with `IllConditioned` when the factorization breaks down or the
/// estimate exceeds [`MAX_CONDITION`].
pub fn solve_spd_f64(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let chol = m.clone().cholesky().ok_or(Error::IllConditioned {
        estimate: f64::INFINITY,
    })?;
    let estimate = norm1(&m) * norm1(&chol.inverse());
    if !estimate.is_finite() || estimate > MAX_CONDITION {
        return Err(Error::IllConditioned { estimate });
    }
    let x = chol.solve(&DVector::from_column_slice(b));
    Ok(x.iter().copied().collect())
}

/// Largest absolute entry of `A x − b`, evaluated exactly.
pub fn exact_residual(a: &[Vec<BigRational>], x: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter()
        .zip(b)
        .map(|(row, rhs)| {
            let lhs = row
                .iter()
                .zip(x)
                .fold(BigRational::zero(), |acc, (r, v)| acc + r * v);
            (lhs - rhs).abs()
        })
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a })
}
