//! Ulam discretisation of the transfer operator: the Markov chain on the
//! cells of a partition of the support.
//!
//! Row `k`, column `j` holds `Σ_i p_i |f_i⁻¹(I_j) ∩ I_k| / |I_k|`, the
//! probability that a point uniform in cell `k` lands in cell `j` after one
//! random map. Acting on column vectors it approximates `T`, on row vectors the
//! Hutchinson operator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_core::RngCore;
use serde::Serialize;

use crate::eig;
use crate::error::{Error, Result};
use crate::ifs::{IfsModel, Support};
use crate::par::Execution;
use crate::sampler::{seeded_rng, unit_f64};

/// Eigenpairs with modulus above this are extracted by default.
pub const DEFAULT_CUTOFF: f64 = 0.55;
/// Largest dimension accepted by [`full_spectrum`].
pub const MAX_DENSE_DIM: usize = 2000;
const INVERSE_ITERATIONS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    boundaries: Vec<f64>,
    jitter_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jitter {
    pub seed: u64,
    /// Absolute perturbation bound for interior boundaries.
    pub amplitude: f64,
}

impl Partition {
    /// Checks that boundaries are strictly increasing.
    pub fn new(boundaries: Vec<f64>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::InvalidConfig(
                "a partition needs at least two boundaries".into(),
            ));
        }
        if let Some(index) = boundaries.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::EmptyCell { index });
        }
        Ok(Partition {
            boundaries,
            jitter_seed: None,
        })
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn jitter_seed(&self) -> Option<u64> {
        self.jitter_seed
    }

    pub fn cells(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.boundaries
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.boundaries.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// `n` equal cells over the support, interior boundaries optionally moved by
/// uniform noise in `[−amplitude, amplitude]`.
pub fn make_partition(support: &Support<f64>, n: usize, jitter: Option<Jitter>) -> Result<Partition> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "partition needs at least 2 cells, got {n}"
        )));
    }
    let (lo, hi) = (support.lo, support.hi);
    let width = (hi - lo) / n as f64;
    let mut boundaries: Vec<f64> = (0..=n)
        .map(|i| match i {
            0 => lo,
            i if i == n => hi,
            i => lo + width * i as f64,
        })
        .collect();
    if let Some(j) = jitter {
        let half_width = 0.5 * width;
        if !(j.amplitude >= 0.0 && j.amplitude < half_width) {
            return Err(Error::JitterTooLarge {
                amplitude: j.amplitude,
                half_width,
            });
        }
        let mut rng = seeded_rng(j.seed);
        for b in boundaries.iter_mut().take(n).skip(1) {
            *b += j.amplitude * (2.0 * unit_f64(rng.next_u64()) - 1.0);
        }
    }
    let mut partition = Partition::new(boundaries)?;
    partition.jitter_seed = jitter.map(|j| j.seed);
    Ok(partition)
}

/// Row-stochastic cell transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UlamOperator {
    pub partition: Partition,
    pub matrix: DMatrix<f64>,
}

impl UlamOperator {
    pub fn dim(&self) -> usize {
        self.partition.cells()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.matrix.row_iter().map(|r| r.sum()).collect()
    }
}

pub fn build_ulam(model: &IfsModel<f64>, partition: &Partition) -> Result<UlamOperator> {
    build_ulam_with(model, partition, Execution::default())
}

/// Builds the transition matrix row by row (rows are independent).
pub fn build_ulam_with(
    model: &IfsModel<f64>,
    partition: &Partition,
    exec: Execution,
) -> Result<UlamOperator> {
    let bounds = partition.boundaries();
    if let Some(index) = bounds.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::EmptyCell { index });
    }
    let n = partition.cells();
    let rows = exec.map_range(n, |k| transition_row(model, bounds, k));
    let matrix = DMatrix::from_fn(n, n, |k, j| rows[k][j]);
    Ok(UlamOperator {
        partition: partition.clone(),
        matrix,
    })
}

fn transition_row(model: &IfsModel<f64>, bounds: &[f64], k: usize) -> Vec<f64> {
    let n = bounds.len() - 1;
    let mut row = vec![0.0; n];
    let (a, b) = (bounds[k], bounds[k + 1]);
    for (map, p) in model.maps().iter().zip(model.probs()) {
        // |f⁻¹(I_j) ∩ I_k| = |I_j ∩ f(I_k)| / t, and |f(I_k)| = t |I_k|
        let (img_lo, img_hi) = (map.apply(&a), map.apply(&b));
        let scale = p / (map.t * (b - a));
        let first = bounds.partition_point(|x| *x <= img_lo).saturating_sub(1);
        for j in first..n {
            if bounds[j] >= img_hi {
                break;
            }
            let overlap = bounds[j + 1].min(img_hi) - bounds[j].max(img_lo);
            if overlap > 0.0 {
                row[j] += overlap * scale;
            }
        }
    }
    row
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryResult {
    pub distribution: Vec<f64>,
    pub iterations: usize,
    /// L1 norm of the last update.
    pub last_step: f64,
    pub converged: bool,
}

impl StationaryResult {
    /// The distribution, or `NotConverged` if the tolerance was not met.
    pub fn into_converged(self) -> Result<Vec<f64>> {
        if self.converged {
            Ok(self.distribution)
        } else {
            Err(Error::NotConverged {
                iterations: self.iterations,
                residual: self.last_step,
            })
        }
    }
}

/// Left fixed vector `π P = π` by power iteration from the uniform vector.
/// Stops once an update moves less than `tol` in L1.
pub fn stationary(op: &UlamOperator, max_iters: usize, tol: f64) -> StationaryResult {
    let n = op.dim();
    let mut pi = vec![1.0 / n as f64; n];
    let mut last_step = f64::INFINITY;
    for it in 1..=max_iters {
        let row = nalgebra::DVector::from_column_slice(&pi);
        let mut next: Vec<f64> = op.matrix.tr_mul(&row).iter().copied().collect();
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        last_step = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if last_step < tol {
            return StationaryResult {
                distribution: pi,
                iterations: it,
                last_step,
                converged: true,
            };
        }
    }
    StationaryResult {
        distribution: pi,
        iterations: max_iters,
        last_step,
        converged: false,
    }
}

/// `(cell midpoint, π_k / |I_k|)`: the stationary vector as a density.
pub fn stationary_density(partition: &Partition, pi: &[f64]) -> Vec<(f64, f64)> {
    partition
        .midpoints()
        .into_iter()
        .zip(partition.widths())
        .zip(pi)
        .map(|((x, w), p)| (x, p / w))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda: Complex64,
    pub left: Vec<Complex64>,
    pub right: Vec<Complex64>,
}

impl EigenPair {
    pub fn left_re(&self) -> Vec<f64> {
        self.left.iter().map(|z| z.re).collect()
    }

    pub fn right_re(&self) -> Vec<f64> {
        self.right.iter().map(|z| z.re).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// All eigenvalues, by descending modulus.
    pub eigenvalues: Vec<Complex64>,
    /// Left/right eigenvectors for every eigenvalue with modulus above the cutoff.
    pub leading_pairs: Vec<EigenPair>,
}

pub fn full_spectrum(op: &UlamOperator) -> Result<SpectrumResult> {
    full_spectrum_with_cutoff(op, DEFAULT_CUTOFF)
}

pub fn full_spectrum_with_cutoff(op: &UlamOperator, cutoff: f64) -> Result<SpectrumResult> {
    if op.dim() > MAX_DENSE_DIM {
        return Err(Error::InvalidConfig(format!(
            "dense spectrum limited to N <= {MAX_DENSE_DIM}, got {}",
            op.dim()
        )));
    }
    let eigenvalues = eig::eigenvalues(&op.matrix)?;
    let transposed = op.matrix.transpose();
    let leading_pairs = eigenvalues
        .iter()
        .filter(|l| l.norm() > cutoff)
        .map(|&lambda| EigenPair {
            lambda,
            left: eig::inverse_iteration(&transposed, lambda, INVERSE_ITERATIONS),
            right: eig::inverse_iteration(&op.matrix, lambda, INVERSE_ITERATIONS),
        })
        .collect();
    Ok(SpectrumResult {
        eigenvalues,
        leading_pairs,
    })
}

/// Left and right eigenvectors for the eigenvalue nearest `lambda`.
pub fn eigenpair_near(op: &UlamOperator, spectrum: &[Complex64], lambda: Complex64) -> Option<EigenPair> {
    let nearest = spectrum
        .iter()
        .copied()
        .min_by(|a, b| (a - lambda).norm().total_cmp(&(b - lambda).norm()))?;
    Some(EigenPair {
        lambda: nearest,
        left: eig::inverse_iteration(&op.matrix.transpose(), nearest, INVERSE_ITERATIONS),
        right: eig::inverse_iteration(&op.matrix, nearest, INVERSE_ITERATIONS),
    })
}

/// Cumulative sums applied `times` times, centring after each pass, then
/// scaled to unit 2-norm.
pub fn eigenvector_integrate(v: &[f64], times: usize) -> Vec<f64> {
    let mut out = v.to_vec();
    for _ in 0..times {
        let mut acc = 0.0;
        for x in out.iter_mut() {
            acc += *x;
            *x = acc;
        }
        let mean = crate::stats::mean(&out);
        out.iter_mut().for_each(|x| *x -= mean);
    }
    let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        out.iter_mut().for_each(|x| *x /= norm);
    }
    out
}

/// Greedy pairing: each eigenvalue of `a` above `cutoff` (in descending
/// modulus) is matched to the nearest unused eigenvalue of `b`.
/// Returns `(from a, from b, distance)`.
pub fn match_eigenvalues(a: &[Complex64], b: &[Complex64], cutoff: f64) -> Vec<(Complex64, Complex64, f64)> {
    let mut used = vec![false; b.len()];
    let mut out = Vec::new();
    for &x in a.iter().filter(|x| x.norm() > cutoff) {
        let best = b
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, y)| (i, *y, (x - y).norm()))
            .min_by(|p, q| p.2.total_cmp(&q.2));
        if let Some((i, y, d)) = best {
            used[i] = true;
            out.push((x, y, d));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::make_bernoulli;

    fn sym() -> Support<f64> {
        Support {
            lo: -1.0,
            hi: 1.0,
            is_interval: true,
        }
    }

    #[test]
    fn equal_partition() {
        let p = make_partition(&sym(), 4, None).unwrap();
        assert_eq!(p.boundaries(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
        let zero = make_partition(&sym(), 4, Some(Jitter { seed: 3, amplitude: 0.0 })).unwrap();
        assert_eq!(zero.boundaries(), p.boundaries());
        assert!(matches!(
            make_partition(&sym(), 4, Some(Jitter { seed: 3, amplitude: 0.25 })),
            Err(Error::JitterTooLarge { .. })
        ));
        assert!(make_partition(&sym(), 1, None).is_err());
    }

    #[test]
    fn jitter_is_reproducible() {
        let j = Some(Jitter { seed: 17, amplitude: 0.01 });
        let a = make_partition(&sym(), 50, j).unwrap();
        let b = make_partition(&sym(), 50, j).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.boundaries(), make_partition(&sym(), 50, None).unwrap().boundaries());
        assert_eq!(a.jitter_seed(), Some(17));
    }

    #[test]
    fn two_cell_uniform_case() {
        let model = make_bernoulli(0.5).unwrap();
        let op = build_ulam(&model, &make_partition(&sym(), 2, None).unwrap()).unwrap();
        assert_eq!(op.matrix, DMatrix::from_element(2, 2, 0.5));
        let st = stationary(&op, 100, 1e-14);
        assert!(st.converged);
        assert_eq!(st.distribution, vec![0.5, 0.5]);
        let spec = full_spectrum(&op).unwrap();
        assert!((spec.eigenvalues[0].re - 1.0).abs() < 1e-12);
        assert!(spec.eigenvalues[1].norm() < 1e-12);
    }

    #[test]
    fn rows_are_stochastic() {
        let model = make_bernoulli(0.7).unwrap();
        let part = make_partition(&sym(), 300, Some(Jitter { seed: 5, amplitude: 0.002 })).unwrap();
        let op = build_ulam(&model, &part).unwrap();
        for s in op.row_sums() {
            assert!((s - 1.0).abs() < 1e-12, "{s}");
        }
        assert!(op.matrix.iter().all(|x| *x >= 0.0));
        let n = op.dim();
        assert!(op.matrix[(0, 0)] > 0.0 && op.matrix[(n - 1, n - 1)] > 0.0);
    }

    #[test]
    fn zero_width_cell_rejected() {
        assert!(matches!(
            Partition::new(vec![-1.0, 0.0, 0.0, 1.0]),
            Err(Error::EmptyCell { index: 1 })
        ));
    }

    #[test]
    fn sequential_and_parallel_builds_agree() {
        let model = make_bernoulli(0.8).unwrap();
        let part = make_partition(&sym(), 200, None).unwrap();
        let a = build_ulam_with(&model, &part, Execution::Sequential).unwrap();
        let b = build_ulam_with(&model, &part, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn integrating_a_constant_gives_a_ramp() {
        let r = eigenvector_integrate(&[1.0; 5], 1);
        let norm = (4.0f64 + 1.0 + 0.0 + 1.0 + 4.0).sqrt();
        for (x, want) in r.iter().zip([-2.0, -1.0, 0.0, 1.0, 2.0]) {
            assert!((x - want / norm).abs() < 1e-15);
        }
    }

    #[test]
    fn stationary_reports_non_convergence() {
        let model = make_bernoulli(0.9).unwrap();
        let op = build_ulam(&model, &make_partition(&sym(), 100, None).unwrap()).unwrap();
        let st = stationary(&op, 3, 1e-15);
        assert!(!st.converged);
        assert!((st.distribution.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(matches!(st.into_converged(), Err(Error::NotConverged { .. })));
    }
}
