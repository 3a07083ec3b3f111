//! Scan of `v_n` over a grid of Bernoulli parameters.
//!
//! Grid values of `t` are exact rationals `lo + i (hi − lo)/(steps − 1)`, so a
//! row uses the same model as a single-`t` solve with that parameter. Rows are
//! independent and may run in parallel; a failed row is kept and marked.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::density::{solve_vn_with, HilbertCache, SolveOptions};
use crate::error::{Error, Result};
use crate::ifs::make_bernoulli;
use crate::par::Execution;
use crate::scalar::{rational_to_f64, Scalar, MAX_FLOAT_DEGREE};

#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub t_range: (BigRational, BigRational),
    pub t_steps: usize,
    pub x_range: (f64, f64),
    pub x_steps: usize,
    pub degree: usize,
    pub exact: bool,
}

impl FamilySpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = &self.t_range;
        let half = BigRational::new(1.into(), 2.into());
        if *lo < half || *hi >= BigRational::one() || lo > hi {
            return Err(Error::InvalidConfig(format!(
                "t range [{lo}, {hi}] must lie in [1/2, 1)"
            )));
        }
        if self.t_steps == 0 || self.x_steps == 0 {
            return Err(Error::InvalidConfig("grid steps must be at least 1".into()));
        }
        if self.t_steps == 1 && lo != hi {
            return Err(Error::InvalidConfig("a single t step needs lo = hi".into()));
        }
        let (xlo, xhi) = self.x_range;
        if !xlo.is_finite() || !xhi.is_finite() || xlo > xhi {
            return Err(Error::InvalidConfig("x range must be finite and ordered".into()));
        }
        if self.degree > MAX_FLOAT_DEGREE {
            return Err(Error::DegreeTooLarge {
                degree: self.degree,
                max: MAX_FLOAT_DEGREE,
            });
        }
        Ok(())
    }

    pub fn t_values(&self) -> Vec<BigRational> {
        let (lo, hi) = &self.t_range;
        if self.t_steps == 1 {
            return vec![lo.clone()];
        }
        let step = (hi - lo) / BigRational::from_integer((self.t_steps - 1).into());
        (0..self.t_steps)
            .map(|i| lo + &step * BigRational::from_integer(i.into()))
            .collect()
    }

    pub fn x_values(&self) -> Vec<f64> {
        let (lo, hi) = self.x_range;
        if self.x_steps == 1 {
            return vec![lo];
        }
        let last = (self.x_steps - 1) as f64;
        (0..self.x_steps)
            .map(|i| if i + 1 == self.x_steps { hi } else { lo + (hi - lo) * i as f64 / last })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyRow {
    /// `t` as written by [`Scalar::to_text`] on the exact value.
    pub t: String,
    pub t_f64: f64,
    pub beta: f64,
    /// Coefficients as text in the solving backend; empty for a failed row.
    pub coefficients: Vec<String>,
    pub values: Vec<f64>,
    pub l2_norm: Option<f64>,
    pub escalated: bool,
    pub error: Option<String>,
}

impl FamilyRow {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyGrid {
    pub degree: usize,
    pub exact: bool,
    pub x_values: Vec<f64>,
    pub rows: Vec<FamilyRow>,
}

impl FamilyGrid {
    pub fn t_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t_f64).collect()
    }

    /// Norm per row; NaN marks a failed row.
    pub fn norms(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.l2_norm.unwrap_or(f64::NAN)).collect()
    }
}

fn solve_row<T: Scalar>(
    t: T,
    degree: usize,
    xs: &[f64],
    cache: &HilbertCache<T>,
) -> Result<(Vec<String>, Vec<f64>, f64, bool)> {
    let model = make_bernoulli(t)?;
    let approx = solve_vn_with(&model, degree, SolveOptions::default(), Some(cache))?;
    Ok((
        approx.coeffs.iter().map(Scalar::to_text).collect(),
        approx.evaluate(xs),
        approx.l2_norm,
        approx.escalated,
    ))
}

pub fn scan(spec: &FamilySpec, exec: Execution) -> Result<FamilyGrid> {
    spec.validate()?;
    let ts = spec.t_values();
    let xs = spec.x_values();
    let exact_cache = HilbertCache::<BigRational>::new();
    let float_cache = HilbertCache::<f64>::new();
    let rows = exec.map_slice(&ts, |t| {
        let t_f64 = rational_to_f64(t);
        let solved = if spec.exact {
            solve_row(t.clone(), spec.degree, &xs, &exact_cache)
        } else {
            solve_row(t_f64, spec.degree, &xs, &float_cache)
        };
        let text = t.to_text();
        match solved {
            Ok((coefficients, values, norm, escalated)) => FamilyRow {
                t: text,
                t_f64,
                beta: 1.0 / t_f64,
                coefficients,
                values,
                l2_norm: Some(norm),
                escalated,
                error: None,
            },
            Err(e) => FamilyRow {
                t: text,
                t_f64,
                beta: 1.0 / t_f64,
                coefficients: Vec::new(),
                values: vec![f64::NAN; xs.len()],
                l2_norm: None,
                escalated: false,
                error: Some(e.to_string()),
            },
        }
    });
    debug_assert!(ts.iter().all(|t| !t.is_zero()));
    Ok(FamilyGrid {
        degree: spec.degree,
        exact: spec.exact,
        x_values: xs,
        rows,
    })
}

/// Median of the finite entries.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::parse_exact;

    fn spec(lo: &str, hi: &str, steps: usize, degree: usize, exact: bool) -> FamilySpec {
        FamilySpec {
            t_range: (parse_exact(lo).unwrap(), parse_exact(hi).unwrap()),
            t_steps: steps,
            x_range: (0.1, 0.5),
            x_steps: 5,
            degree,
            exact,
        }
    }

    #[test]
    fn grid_shape_and_half_row() {
        let grid = scan(&spec("0.5", "0.6", 3, 6, true), Execution::Parallel).unwrap();
        assert_eq!(grid.rows.len(), 3);
        assert_eq!(grid.rows[1].t, "11/20");
        assert!(grid.rows.iter().all(|r| r.values.len() == 5));
        assert!(grid.rows[0].values.iter().all(|v| *v == 0.5));
        assert_eq!(grid.rows[0].coefficients, vec!["1/2", "0", "0", "0", "0", "0", "0"]);
        assert!(grid.norms().iter().all(|n| n.is_finite()));
    }

    #[test]
    fn sequential_matches_parallel() {
        let s = spec("0.6", "0.8", 5, 10, false);
        assert_eq!(
            scan(&s, Execution::Sequential).unwrap(),
            scan(&s, Execution::Parallel).unwrap()
        );
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(scan(&spec("0.4", "0.6", 3, 4, false), Execution::Sequential).is_err());
        assert!(scan(&spec("0.6", "1", 3, 4, false), Execution::Sequential).is_err());
        assert!(scan(&spec("0.6", "0.7", 3, 65, false), Execution::Sequential).is_err());
    }

    #[test]
    fn median_ignores_nan() {
        assert_eq!(median(&[3.0, f64::NAN, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
