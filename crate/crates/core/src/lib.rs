//! Spectral data of the transfer operator for affine iterated function systems
//! on the real line.
//!
//! An IFS `f_i(x) = t_i x + v_i` with weights `p_i` has a unique invariant
//! probability measure `ν`. The transfer operator `T h = Σ p_i h∘f_i` keeps the
//! space of polynomials of each degree invariant, which yields explicit
//! eigenvalues `λ_k = Σ p_i t_i^k`, monic eigenpolynomials `q_k`, the moments
//! of `ν`, and best-L² polynomial densities via a Hilbert-matrix system. The
//! crate also carries the Ulam (cell-to-cell Markov chain) discretization, a
//! dense nonsymmetric eigensolver for it, and a seeded chaos-game sampler for
//! Monte Carlo cross-checks.
//!
//! Most routines are generic over [`Scalar`], implemented for `f64` and for
//! exact [`BigRational`] arithmetic.

pub mod density;
pub mod eig;
pub mod error;
pub mod family;
pub mod ifs;
pub mod linalg;
pub mod moments;
pub mod par;
pub mod poly;
pub mod sampler;
pub mod scalar;
pub mod spectral;
pub mod stats;
pub mod ulam;

pub use density::{DensityApprox, HilbertCache, HilbertSystem, SolveOptions};
pub use error::{Error, Result};
pub use family::{FamilyGrid, FamilyRow, FamilySpec};
pub use ifs::{AffineMap, IfsModel, Support};
pub use moments::MomentVector;
pub use num_complex::Complex64;
pub use num_rational::BigRational;
pub use par::Execution;
pub use poly::Polynomial;
pub use sampler::SampleConfig;
pub use scalar::{Backend, Scalar};
pub use spectral::{EigenSystem, TriangularRep};
pub use ulam::{Partition, SpectrumResult, UlamOperator};
