//! Moments `m_j = ∫ x^j dν` of the invariant measure, by two independent routes.

use crate::error::Result;
use crate::ifs::IfsModel;
use crate::poly::Polynomial;
use crate::scalar::{binomial_row, Scalar};
use crate::spectral::{check_degree, EigenSystem};

#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector<T> {
    values: Vec<T>,
}

impl<T: Scalar> MomentVector<T> {
    pub fn new(values: Vec<T>) -> Self {
        MomentVector { values }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, j: usize) -> &T {
        &self.values[j]
    }

    /// First `n+1` moments.
    pub fn truncate(&self, n: usize) -> Self {
        MomentVector::new(self.values[..=n].to_vec())
    }

    /// `ν(p) = Σ_j c_j m_j`. Panics if `p` has degree above the stored moments.
    pub fn pair(&self, p: &Polynomial<T>) -> T {
        assert!(
            p.coeffs().len() <= self.values.len(),
            "polynomial degree exceeds available moments"
        );
        p.coeffs()
            .iter()
            .zip(&self.values)
            .fold(T::zero(), |acc, (c, m)| acc + c.clone() * m.clone())
    }

    /// Largest entrywise absolute difference, as a float.
    pub fn max_discrepancy(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a.clone() - b.clone()).abs().to_f64())
            .fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> MomentVector<f64> {
        MomentVector::new(self.values.iter().map(Scalar::to_f64).collect())
    }
}

/// `m_n = −a_{n,0} − a_{n,1} m_1 − … − a_{n,n−1} m_{n−1}`, from `ν(q_n) = 0`.
pub fn moments_via_eigenpolys<T: Scalar>(eig: &EigenSystem<T>) -> MomentVector<T> {
    let mut values: Vec<T> = Vec::with_capacity(eig.eigenpolys.len());
    values.push(T::one());
    for q in eig.eigenpolys.iter().skip(1) {
        let n = values.len();
        let partial = (0..n).fold(T::zero(), |acc, j| acc + q.coeff(j) * values[j].clone());
        values.push(-partial);
    }
    MomentVector::new(values)
}

/// Moments straight from self-similarity `ν(b_n) = ν(T b_n)`:
/// `m_n (1 − λ_n) = Σ_{l<n} C(n,l) (Σ_i p_i t_i^l v_i^(n−l)) m_l`.
pub fn moments_direct<T: Scalar>(model: &IfsModel<T>, n: usize) -> Result<MomentVector<T>> {
    check_degree::<T>(n)?;
    let maps = model.maps();
    let probs = model.probs();
    let mut t_pow: Vec<Vec<T>> = vec![vec![T::one()]; maps.len()];
    let mut v_pow: Vec<Vec<T>> = vec![vec![T::one()]; maps.len()];
    for (i, map) in maps.iter().enumerate() {
        for j in 1..=n {
            let tp = t_pow[i][j - 1].clone() * map.t.clone();
            let vp = v_pow[i][j - 1].clone() * map.v.clone();
            t_pow[i].push(tp);
            v_pow[i].push(vp);
        }
    }
    let mut values = vec![T::one()];
    for deg in 1..=n {
        let binom = binomial_row::<T>(deg);
        let mut rhs = T::zero();
        for (l, m_l) in values.iter().enumerate() {
            let weight = (0..maps.len()).fold(T::zero(), |acc, i| {
                acc + probs[i].clone() * t_pow[i][l].clone() * v_pow[i][deg - l].clone()
            });
            rhs = rhs + binom[l].clone() * weight * m_l.clone();
        }
        let lambda = (0..maps.len()).fold(T::zero(), |acc, i| {
            acc + probs[i].clone() * t_pow[i][deg].clone()
        });
        values.push(rhs / (T::one() - lambda));
    }
    Ok(MomentVector::new(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::{make_bernoulli, AffineMap};
    use crate::spectral::{eigenpolys_bernoulli, eigenpolys_general};
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn uniform_measure_at_half() {
        let eig = eigenpolys_bernoulli(q(1, 2), 4).unwrap();
        let m = moments_via_eigenpolys(&eig);
        assert_eq!(m.values(), &[q(1, 1), q(0, 1), q(1, 3), q(0, 1), q(1, 5)]);
        let direct = moments_direct(&make_bernoulli(q(1, 2)).unwrap(), 4).unwrap();
        assert_eq!(direct, m);
    }

    #[test]
    fn second_moment_formula() {
        for t in [q(3, 5), q(4, 5), q(9, 10)] {
            let expected = (q(1, 1) - t.clone()) / (q(1, 1) + t.clone());
            let model = make_bernoulli(t).unwrap();
            let direct = moments_direct(&model, 3).unwrap();
            assert_eq!(direct.get(2), &expected);
            assert_eq!(direct.get(1), &q(0, 1));
            assert_eq!(direct.get(3), &q(0, 1));
        }
    }

    #[test]
    fn unit_interval_uniform() {
        let model = IfsModel::new(
            vec![
                AffineMap::new(q(1, 2), q(0, 1)).unwrap(),
                AffineMap::new(q(1, 2), q(1, 2)).unwrap(),
            ],
            vec![q(1, 2), q(1, 2)],
        )
        .unwrap();
        let m = moments_via_eigenpolys(&eigenpolys_general(&model, 5).unwrap());
        let expected: Vec<_> = (0..=5).map(|j| q(1, j + 1)).collect();
        assert_eq!(m.values(), expected.as_slice());
    }

    #[test]
    fn pairing_annihilates_eigenpolys() {
        let eig = eigenpolys_bernoulli(q(7, 10), 8).unwrap();
        let m = moments_via_eigenpolys(&eig);
        assert_eq!(m.pair(&eig.eigenpolys[0]), q(1, 1));
        for qk in &eig.eigenpolys[1..] {
            assert_eq!(m.pair(qk), q(0, 1));
        }
    }

    #[test]
    fn float_routes_track_exact() {
        let model = make_bernoulli(0.8).unwrap();
        let exact = moments_direct(&make_bernoulli(q(4, 5)).unwrap(), 30).unwrap().to_f64();
        let a = moments_via_eigenpolys(&eigenpolys_general(&model, 30).unwrap());
        let b = moments_direct(&model, 30).unwrap();
        for (j, ((x, y), e)) in a.values().iter().zip(b.values()).zip(exact.values()).enumerate() {
            // the eigenpolynomial route cancels heavily past degree 20
            if j <= 20 {
                assert!((x - e).abs() <= 1e-8 * e.abs().max(1e-300), "{x} vs {e}");
            }
            assert!((y - e).abs() <= 1e-12 * e.abs().max(1e-300), "{y} vs {e}");
        }
    }
}
