//! Best-L² polynomial densities for the invariant measure.
//!
//! The degree-`n` approximation `v_n = Σ u_j x^j` reproduces the moments,
//! `⟨v_n, x^k⟩ = m_k` for `k ≤ n`, which is the linear system `G u = m` with
//! `G_ij = ∫_X x^(i+j) dx` over the support interval.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::ifs::{make_bernoulli, IfsModel, Support};
use crate::moments::{moments_direct, MomentVector};
use crate::poly::Polynomial;
use crate::scalar::{from_usize, Scalar};
use crate::spectral::check_degree;

/// `G` together with the moment vector it is paired with.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertSystem<T> {
    pub support: Support<T>,
    pub gram: Arc<Vec<Vec<T>>>,
    pub moments: MomentVector<T>,
}

impl<T: Scalar> HilbertSystem<T> {
    pub fn degree(&self) -> usize {
        self.gram.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Re-solve in exact arithmetic when the float system is ill-conditioned.
    pub escalate: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { escalate: true }
    }
}

/// `v_n` with its squared norm `uᵀGu` (which also equals `ν(v_n)`).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityApprox<T> {
    /// `u_0..u_n`, zeros kept so the length is always `n + 1`.
    pub coeffs: Vec<T>,
    pub norm_sq: T,
    pub l2_norm: f64,
    /// Set when the float solve was redone in exact arithmetic.
    pub escalated: bool,
}

impl<T: Scalar> DensityApprox<T> {
    fn from_solution(coeffs: Vec<T>, gram: &[Vec<T>]) -> Self {
        let norm_sq = quadratic_form(gram, &coeffs, &coeffs);
        DensityApprox {
            l2_norm: norm_sq.to_f64().sqrt(),
            coeffs,
            norm_sq,
            escalated: false,
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn polynomial(&self) -> Polynomial<T> {
        Polynomial::new(self.coeffs.clone())
    }

    /// Pointwise values by Horner's rule in `f64`.
    pub fn evaluate(&self, xs: &[f64]) -> Vec<f64> {
        self.polynomial().to_f64().eval_many(xs)
    }

    pub fn convert<U: Scalar>(&self) -> DensityApprox<U> {
        DensityApprox {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| U::from_exact(&c.to_exact()))
                .collect(),
            norm_sq: U::from_exact(&self.norm_sq.to_exact()),
            l2_norm: self.l2_norm,
            escalated: self.escalated,
        }
    }
}

/// `aᵀ G b` over the leading block of `G`.
pub fn quadratic_form<T: Scalar>(gram: &[Vec<T>], a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            acc = acc + ai.clone() * gram[i][j].clone() * bj.clone();
        }
    }
    acc
}

/// `∫_lo^hi x^k dx` for `k = 0..=max_power`.
fn power_integrals<T: Scalar>(lo: &T, hi: &T, max_power: usize) -> Vec<T> {
    let (mut lo_pow, mut hi_pow) = (lo.clone(), hi.clone());
    (0..=max_power)
        .map(|k| {
            let value = (hi_pow.clone() - lo_pow.clone()) / from_usize::<T>(k + 1);
            lo_pow = lo_pow.clone() * lo.clone();
            hi_pow = hi_pow.clone() * hi.clone();
            value
        })
        .collect()
}

/// `G_ij = (hi^(i+j+1) − lo^(i+j+1)) / (i+j+1)`.
pub fn hilbert_matrix<T: Scalar>(support: &Support<T>, n: usize) -> Result<Vec<Vec<T>>> {
    if !support.is_interval {
        return Err(Error::NotAnInterval);
    }
    let integrals = power_integrals(&support.lo, &support.hi, 2 * n);
    Ok((0..=n)
        .map(|i| (0..=n).map(|j| integrals[i + j].clone()).collect())
        .collect())
}

/// `⟨p, q⟩ = ∫_lo^hi p q dx`, exact in the rational backend.
pub fn l2_inner<T: Scalar>(support: &Support<T>, p: &Polynomial<T>, q: &Polynomial<T>) -> T {
    let (Some(dp), Some(dq)) = (p.degree(), q.degree()) else {
        return T::zero();
    };
    let integrals = power_integrals(&support.lo, &support.hi, dp + dq);
    let mut acc = T::zero();
    for (i, a) in p.coeffs().iter().enumerate() {
        for (j, b) in q.coeffs().iter().enumerate() {
            acc = acc + a.clone() * b.clone() * integrals[i + j].clone();
        }
    }
    acc
}

pub fn l2_norm<T: Scalar>(support: &Support<T>, p: &Polynomial<T>) -> f64 {
    l2_inner(support, p, p).to_f64().sqrt()
}

type GramMap<T> = HashMap<(String, String, usize), Arc<Vec<Vec<T>>>>;

/// Gram matrices keyed by support and degree only; they do not depend on the
/// contraction parameters, so a scan over a model family shares them.
/// Safe for concurrent use: entries are built once and then only read.
#[derive(Debug, Default)]
pub struct HilbertCache<T> {
    entries: RwLock<GramMap<T>>,
}

impl<T: Scalar> HilbertCache<T> {
    pub fn new() -> Self {
        HilbertCache {
            entries: RwLock::new(HashMap::new()),
        }
    }

    pub fn get_or_build(&self, support: &Support<T>, n: usize) -> Result<Arc<Vec<Vec<T>>>> {
        let key = (support.lo.to_text(), support.hi.to_text(), n);
        if let Some(g) = self.entries.read().expect("cache lock").get(&key) {
            return Ok(Arc::clone(g));
        }
        let gram = Arc::new(hilbert_matrix(support, n)?);
        let mut entries = self.entries.write().expect("cache lock");
        Ok(Arc::clone(entries.entry(key).or_insert(gram)))
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn gram_for<T: Scalar>(
    support: &Support<T>,
    n: usize,
    cache: Option<&HilbertCache<T>>,
) -> Result<Arc<Vec<Vec<T>>>> {
    match cache {
        Some(c) => c.get_or_build(support, n),
        None => hilbert_matrix(support, n).map(Arc::new),
    }
}

/// Assembles `G` and `m` for degree `n`.
pub fn hilbert_system<T: Scalar>(
    model: &IfsModel<T>,
    n: usize,
    cache: Option<&HilbertCache<T>>,
) -> Result<HilbertSystem<T>> {
    let support = model.support();
    if !support.is_interval {
        return Err(Error::NotAnInterval);
    }
    check_degree::<T>(n)?;
    let gram = gram_for(&support, n, cache)?;
    let moments = moments_direct(model, n)?;
    Ok(HilbertSystem {
        support,
        gram,
        moments,
    })
}

/// Solves `G u = m` for an assembled system.
pub fn solve_system<T: Scalar>(system: &HilbertSystem<T>) -> Result<DensityApprox<T>> {
    let u = T::solve_spd(&system.gram, system.moments.values())?;
    Ok(DensityApprox::from_solution(u, &system.gram))
}

pub fn solve_vn<T: Scalar>(model: &IfsModel<T>, n: usize) -> Result<DensityApprox<T>> {
    solve_vn_with(model, n, SolveOptions::default(), None)
}

pub fn solve_vn_with<T: Scalar>(
    model: &IfsModel<T>,
    n: usize,
    opts: SolveOptions,
    cache: Option<&HilbertCache<T>>,
) -> Result<DensityApprox<T>> {
    let system = hilbert_system(model, n, cache)?;
    match solve_system(&system) {
        Err(Error::IllConditioned { .. }) if !T::EXACT && opts.escalate => {
            escalate(|| solve_vn_with(&exact_model(model)?, n, opts, None))
        }
        other => other,
    }
}

/// Exact counterpart of a float model. A Bernoulli model is rebuilt from its
/// parameter so the translations stay `±(1 − t)` exactly.
fn exact_model<T: Scalar>(model: &IfsModel<T>) -> Result<IfsModel<BigRational>> {
    match model.bernoulli_parameter() {
        Some(t) => make_bernoulli(t.to_exact()),
        None => Ok(model.convert::<BigRational>()),
    }
}

fn escalate<T: Scalar>(
    exact: impl FnOnce() -> Result<DensityApprox<BigRational>>,
) -> Result<DensityApprox<T>> {
    let mut out = exact()?.convert::<T>();
    out.escalated = true;
    Ok(out)
}

/// Symmetric Bernoulli systems only need the even block
/// `G*_ij = 2/(2i+2j+1)` against `(m_0, m_2, …)`; odd coefficients vanish.
pub fn solve_vn_split<T: Scalar>(model: &IfsModel<T>, n: usize) -> Result<DensityApprox<T>> {
    solve_vn_split_with(model, n, SolveOptions::default())
}

pub fn solve_vn_split_with<T: Scalar>(
    model: &IfsModel<T>,
    n: usize,
    opts: SolveOptions,
) -> Result<DensityApprox<T>> {
    if model.bernoulli_parameter().is_none() {
        return Err(Error::NotSymmetricBernoulli);
    }
    let support = model.support();
    if !support.is_interval {
        return Err(Error::NotAnInterval);
    }
    check_degree::<T>(n)?;
    let moments = moments_direct(model, n)?;
    let half = n / 2;
    let even_gram: Vec<Vec<T>> = (0..=half)
        .map(|i| {
            (0..=half)
                .map(|j| T::ratio(2, (2 * i + 2 * j + 1) as i64))
                .collect()
        })
        .collect();
    let even_rhs: Vec<T> = (0..=half).map(|i| moments.get(2 * i).clone()).collect();
    let even = match T::solve_spd(&even_gram, &even_rhs) {
        Err(Error::IllConditioned { .. }) if !T::EXACT && opts.escalate => {
            return escalate(|| solve_vn_split_with(&exact_model(model)?, n, opts));
        }
        other => other?,
    };
    let mut coeffs = vec![T::zero(); n + 1];
    for (i, c) in even.into_iter().enumerate() {
        coeffs[2 * i] = c;
    }
    let gram = hilbert_matrix(&support, n)?;
    Ok(DensityApprox::from_solution(coeffs, &gram))
}

/// `‖v_k‖` for `k = 0..=n_max`; non-decreasing since `v_k` is the projection
/// of `v_{k+1}` onto polynomials of degree `k`.
pub fn norm_growth<T: Scalar>(model: &IfsModel<T>, n_max: usize) -> Result<Vec<(usize, f64)>> {
    norm_growth_with(model, n_max, SolveOptions::default())
}

pub fn norm_growth_with<T: Scalar>(
    model: &IfsModel<T>,
    n_max: usize,
    opts: SolveOptions,
) -> Result<Vec<(usize, f64)>> {
    let full = hilbert_system(model, n_max, None)?;
    (0..=n_max)
        .map(|n| {
            let sub = HilbertSystem {
                support: full.support.clone(),
                gram: Arc::new(
                    full.gram[..=n]
                        .iter()
                        .map(|row| row[..=n].to_vec())
                        .collect(),
                ),
                moments: full.moments.truncate(n),
            };
            let approx = match solve_system(&sub) {
                Err(Error::IllConditioned { .. }) if !T::EXACT && opts.escalate => {
                    escalate::<T>(|| solve_vn_with(&exact_model(model)?, n, opts, None))?
                }
                other => other?,
            };
            Ok((n, approx.l2_norm))
        })
        .collect()
}

/// `ν(q)/‖q‖`, the quantity `v_n` maximises over polynomials of degree ≤ n.
pub fn nu_ratio<T: Scalar>(
    moments: &MomentVector<T>,
    support: &Support<T>,
    q: &Polynomial<T>,
) -> f64 {
    moments.pair(q).to_f64() / l2_norm(support, q)
}

/// Grid resolution for maximising a polynomial over the support.
pub const MAX_GRID: usize = 10_000;
const REFINE_TOL: f64 = 1e-10;

/// `(argmax, max)` of `p` over `[lo, hi]`: a 10⁴-point grid plus endpoints,
/// then each grid-local maximum is refined by bisection on the derivative.
pub fn max_on_interval(p: &Polynomial<f64>, lo: f64, hi: f64) -> (f64, f64) {
    let dp = p.derivative();
    let step = (hi - lo) / MAX_GRID as f64;
    let xs: Vec<f64> = (0..=MAX_GRID)
        .map(|i| if i == MAX_GRID { hi } else { lo + step * i as f64 })
        .collect();
    let ys = p.eval_many(&xs);
    let mut best = (xs[0], ys[0]);
    for i in 0..=MAX_GRID {
        if ys[i] > best.1 {
            best = (xs[i], ys[i]);
        }
        let interior = i > 0 && i < MAX_GRID;
        if interior && ys[i] >= ys[i - 1] && ys[i] >= ys[i + 1] {
            let (mut a, mut b) = (xs[i - 1], xs[i + 1]);
            if dp.eval(&a) >= 0.0 && dp.eval(&b) <= 0.0 {
                while b - a > REFINE_TOL {
                    let mid = 0.5 * (a + b);
                    if dp.eval(&mid) > 0.0 {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                let x = 0.5 * (a + b);
                let y = p.eval(&x);
                if y > best.1 {
                    best = (x, y);
                }
            }
        }
    }
    best
}

/// Diagnostics for approximations of possibly singular measures.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SingularityReport {
    pub degree: usize,
    pub norm_sq: f64,
    /// `M = max_X v_n`.
    pub max_value: f64,
    pub argmax: f64,
    /// Grid estimate of the length of `{x : v_n(x) ≥ M/2}`.
    pub high_set_measure: f64,
    /// `4/M`, an upper bound for that length.
    pub high_set_bound: f64,
}

impl SingularityReport {
    /// `‖v_n‖² ≤ max v_n`, up to float rounding in the evaluation.
    pub fn norm_bound_holds(&self) -> bool {
        self.norm_sq <= self.max_value * (1.0 + 1e-9) + 1e-12
    }
}

pub fn singularity_report<T: Scalar>(
    approx: &DensityApprox<T>,
    support: &Support<T>,
) -> SingularityReport {
    let p = approx.polynomial().to_f64();
    let (lo, hi) = (support.lo.to_f64(), support.hi.to_f64());
    let (argmax, max_value) = max_on_interval(&p, lo, hi);
    let cells = MAX_GRID;
    let width = (hi - lo) / cells as f64;
    let high = (0..cells)
        .filter(|&i| p.eval(&(lo + width * (i as f64 + 0.5))) >= 0.5 * max_value)
        .count();
    SingularityReport {
        degree: approx.degree(),
        norm_sq: approx.norm_sq.to_f64(),
        max_value,
        argmax,
        high_set_measure: high as f64 * width,
        high_set_bound: 4.0 / max_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::{make_bernoulli, AffineMap};
    use crate::spectral::eigenpolys_general;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn sym() -> Support<BigRational> {
        Support {
            lo: q(-1, 1),
            hi: q(1, 1),
            is_interval: true,
        }
    }

    #[test]
    fn gram_entries() {
        let g = hilbert_matrix(&sym(), 3).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if (i + j) % 2 == 0 {
                    q(2, (i + j + 1) as i64)
                } else {
                    q(0, 1)
                };
                assert_eq!(g[i][j], want);
            }
        }
        let unit = Support {
            lo: q(0, 1),
            hi: q(1, 1),
            is_interval: true,
        };
        let g = hilbert_matrix(&unit, 2).unwrap();
        assert_eq!(g[1][2], q(1, 4));
        let odd = Support {
            lo: q(-1, 3),
            hi: q(5, 2),
            is_interval: true,
        };
        assert_eq!(hilbert_matrix(&odd, 0).unwrap()[0][0], q(17, 6));
        let cantor = Support {
            is_interval: false,
            ..sym()
        };
        assert_eq!(hilbert_matrix(&cantor, 2), Err(Error::NotAnInterval));
    }

    #[test]
    fn uniform_case_is_constant_half() {
        for n in [0, 1, 2, 5] {
            let v = solve_vn(&make_bernoulli(q(1, 2)).unwrap(), n).unwrap();
            let mut want = vec![q(0, 1); n + 1];
            want[0] = q(1, 2);
            assert_eq!(v.coeffs, want);
            assert_eq!(v.norm_sq, q(1, 2));
        }
    }

    #[test]
    fn split_solution_two_by_two() {
        // hand inversion of 2[[1, 1/3], [1/3, 1/5]] against (1, 1/9)
        let model = make_bernoulli(q(4, 5)).unwrap();
        let v = solve_vn_split(&model, 2).unwrap();
        assert_eq!(v.coeffs, vec![q(11, 12), q(0, 1), q(-5, 4)]);
        assert_eq!(solve_vn(&model, 2).unwrap(), v);
        assert_eq!(solve_vn_split(&model, 0).unwrap().coeffs, vec![q(1, 2)]);
        let not_bc = IfsModel::new(
            vec![
                AffineMap::new(q(1, 2), q(0, 1)).unwrap(),
                AffineMap::new(q(1, 2), q(1, 2)).unwrap(),
            ],
            vec![q(1, 2), q(1, 2)],
        )
        .unwrap();
        assert_eq!(solve_vn_split(&not_bc, 2), Err(Error::NotSymmetricBernoulli));
    }

    #[test]
    fn degree_zero_normalisation() {
        let model = IfsModel::new(
            vec![
                AffineMap::new(q(2, 3), q(0, 1)).unwrap(),
                AffineMap::new(q(2, 3), q(1, 1)).unwrap(),
            ],
            vec![q(1, 3), q(2, 3)],
        )
        .unwrap();
        // hull [0, 3]
        let v = solve_vn(&model, 0).unwrap();
        assert_eq!(v.coeffs, vec![q(1, 3)]);
        assert!((v.l2_norm - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_to_eigenpolys() {
        let model = make_bernoulli(q(7, 10)).unwrap();
        let n = 8;
        let v = solve_vn(&model, n).unwrap();
        let eig = eigenpolys_general(&model, n).unwrap();
        let s = model.support();
        assert_eq!(l2_inner(&s, &v.polynomial(), &eig.eigenpolys[0]), q(1, 1));
        for qk in &eig.eigenpolys[1..] {
            assert_eq!(l2_inner(&s, &v.polynomial(), qk), q(0, 1));
        }
        for j in (1..=n).step_by(2) {
            assert_eq!(v.coeffs[j], q(0, 1));
        }
    }

    #[test]
    fn cantor_support_rejected() {
        let model = make_bernoulli(q(2, 5)).unwrap();
        assert_eq!(solve_vn(&model, 3), Err(Error::NotAnInterval));
    }

    #[test]
    fn float_solve_escalates() {
        let model = make_bernoulli(0.8).unwrap();
        let strict = solve_vn_with(&model, 20, SolveOptions { escalate: false }, None);
        assert!(matches!(strict, Err(Error::IllConditioned { .. })));
        let v = solve_vn(&model, 20).unwrap();
        assert!(v.escalated);
        let exact = solve_vn(&make_bernoulli(q(4, 5)).unwrap(), 20).unwrap();
        assert_eq!(v.coeffs, exact.convert::<f64>().coeffs);
        let low = solve_vn(&model, 4).unwrap();
        assert!(!low.escalated);
    }

    #[test]
    fn cache_shares_across_parameters() {
        let cache = HilbertCache::new();
        for t in [q(3, 5), q(7, 10), q(4, 5)] {
            solve_vn_with(&make_bernoulli(t).unwrap(), 6, SolveOptions::default(), Some(&cache))
                .unwrap();
        }
        assert_eq!(cache.len(), 1);
    }

    #[test]
    fn half_norms_constant() {
        let norms = norm_growth(&make_bernoulli(q(1, 2)).unwrap(), 6).unwrap();
        for (_, norm) in norms {
            assert!((norm - 0.5f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn maximiser_refines_between_grid_points() {
        // -(x - c)^2 + 3 with c off-grid
        let c = 0.123456789;
        let p = Polynomial::new(vec![3.0 - c * c, 2.0 * c, -1.0]);
        let (x, y) = max_on_interval(&p, -1.0, 1.0);
        assert!((x - c).abs() < 1e-9);
        assert!((y - 3.0).abs() < 1e-15);
        // monotone: maximum at the right endpoint
        let (x, _) = max_on_interval(&Polynomial::new(vec![0.0, 1.0]), -1.0, 1.0);
        assert_eq!(x, 1.0);
    }
}
