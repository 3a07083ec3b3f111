//! Dense univariate polynomials in ascending coefficient order.

use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::{from_usize, Scalar};

/// `coeffs[j]` multiplies `x^j`. The last stored coefficient is nonzero; the
/// zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// `x^k`
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k + 1];
        coeffs[k] = T::one();
        Polynomial { coeffs }
    }

    /// `a·x + b`
    pub fn linear(a: T, b: T) -> Self {
        Self::new(vec![b, a])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Coefficient of `x^j`, zero beyond the degree.
    pub fn coeff(&self, j: usize) -> T {
        self.coeffs.get(j).cloned().unwrap_or_else(T::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    /// `p(a·x + b)`, expanded by Horner's scheme in polynomial arithmetic.
    pub fn compose_affine(&self, a: &T, b: &T) -> Self {
        let inner = Polynomial::linear(a.clone(), b.clone());
        self.coeffs
            .iter()
            .rev()
            .fold(Polynomial::zero(), |acc, c| {
                &(&acc * &inner) + &Polynomial::constant(c.clone())
            })
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| c.clone() * from_usize::<T>(j))
                .collect(),
        )
    }

    /// Largest absolute coefficient, as a float.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> Polynomial<f64> {
        Polynomial::new(self.coeffs.iter().map(Scalar::to_f64).collect())
    }

    pub fn convert<U: Scalar>(&self) -> Polynomial<U> {
        Polynomial::new(
            self.coeffs
                .iter()
                .map(|c| U::from_exact(&c.to_exact()))
                .collect(),
        )
    }
}

impl Polynomial<f64> {
    /// Horner evaluation at many points.
    pub fn eval_many(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|x| self.eval(x)).collect()
    }
}

impl<T: Scalar> Add for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn add(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|j| self.coeff(j) + rhs.coeff(j)).collect())
    }
}

impl<T: Scalar> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn sub(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|j| self.coeff(j) - rhs.coeff(j)).collect())
    }
}

impl<T: Scalar> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn mul(self, rhs: Self) -> Polynomial<T> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Polynomial::new(out)
    }
}

impl<T: Scalar> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn neg(self) -> Polynomial<T> {
        Polynomial::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn trims_trailing_zeros() {
        let p = Polynomial::new(vec![1.0, 0.0, 0.0]);
        assert_eq!(p.degree(), Some(0));
        assert!(Polynomial::<f64>::new(vec![0.0]).is_zero());
        assert_eq!(Polynomial::<f64>::zero().degree(), None);
    }

    #[test]
    fn horner() {
        let v = Polynomial::new(vec![q(-1, 9), q(0, 1), q(1, 1)]);
        assert_eq!(v.eval(&q(1, 1)), q(8, 9));
        assert_eq!(Polynomial::constant(0.5).eval(&0.3), 0.5);
    }

    #[test]
    fn affine_composition() {
        // (2x + 1)^2 = 4x^2 + 4x + 1
        let p = Polynomial::<BigRational>::monomial(2).compose_affine(&q(2, 1), &q(1, 1));
        assert_eq!(p.coeffs(), &[q(1, 1), q(4, 1), q(4, 1)]);
    }

    #[test]
    fn derivative_of_cubic() {
        let p = Polynomial::new(vec![q(5, 1), q(0, 1), q(-1, 3), q(1, 1)]);
        assert_eq!(p.derivative().coeffs(), &[q(0, 1), q(-2, 3), q(3, 1)]);
    }

    proptest! {
        #[test]
        fn composition_agrees_with_pointwise(
            coeffs in prop::collection::vec(-5i64..5, 0..7),
            a in -3i64..4, b in -3i64..4, x in -4i64..5,
        ) {
            let p = Polynomial::new(coeffs.iter().map(|&c| q(c, 1)).collect());
            let (a, b, x) = (q(a, 2), q(b, 3), q(x, 5));
            let composed = p.compose_affine(&a, &b);
            prop_assert_eq!(composed.eval(&x), p.eval(&(a * x.clone() + b)));
        }

        #[test]
        fn product_evaluates_as_product(
            c1 in prop::collection::vec(-5i64..5, 0..6),
            c2 in prop::collection::vec(-5i64..5, 0..6),
            x in -4i64..5,
        ) {
            let p = Polynomial::new(c1.iter().map(|&c| q(c, 1)).collect());
            let r = Polynomial::new(c2.iter().map(|&c| q(c, 1)).collect());
            let x = q(x, 3);
            prop_assert_eq!((&p * &r).eval(&x), p.eval(&x) * r.eval(&x));
            prop_assert_eq!((&p - &r).eval(&x), p.eval(&x) - r.eval(&x));
        }
    }
}
