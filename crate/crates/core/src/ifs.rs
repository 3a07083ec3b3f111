//! The IFS problem instance: affine maps, weights, and the support hull.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{Backend, Scalar};

/// `x ↦ t·x + v` with `0 < t < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap<T> {
    pub t: T,
    pub v: T,
}

impl<T: Scalar> AffineMap<T> {
    pub fn new(t: T, v: T) -> Result<Self> {
        let map = AffineMap { t, v };
        map.check(0)?;
        Ok(map)
    }

    fn check(&self, index: usize) -> Result<()> {
        if self.t <= T::zero() || self.t >= T::one() {
            return Err(Error::ContractionOutOfRange {
                index,
                value: self.t.to_text(),
            });
        }
        Ok(())
    }

    pub fn apply(&self, x: &T) -> T {
        self.t.clone() * x.clone() + self.v.clone()
    }

    pub fn fixed_point(&self) -> T {
        self.v.clone() / (T::one() - self.t.clone())
    }
}

/// Maps and probabilities defining a self-similar measure.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsModel<T> {
    maps: Vec<AffineMap<T>>,
    probs: Vec<T>,
}

/// Convex hull `[lo, hi]` of the attractor.
#[derive(Debug, Clone, PartialEq)]
pub struct Support<T> {
    pub lo: T,
    pub hi: T,
    /// Whether the images `f_i([lo, hi])` cover the hull without gaps.
    pub is_interval: bool,
}

impl<T: Scalar> Support<T> {
    pub fn width(&self) -> T {
        self.hi.clone() - self.lo.clone()
    }

    pub fn midpoint(&self) -> T {
        (self.lo.clone() + self.hi.clone()) / T::from_int(2)
    }

    pub fn to_f64(&self) -> Support<f64> {
        Support {
            lo: self.lo.to_f64(),
            hi: self.hi.to_f64(),
            is_interval: self.is_interval,
        }
    }
}

const FLOAT_PROB_TOL: f64 = 1e-12;
const FLOAT_COVER_TOL: f64 = 1e-12;

impl<T: Scalar> IfsModel<T> {
    /// Builds and validates a model.
    pub fn new(maps: Vec<AffineMap<T>>, probs: Vec<T>) -> Result<Self> {
        IfsModel { maps, probs }.validate()
    }

    /// Returns the model unchanged if every invariant holds.
    pub fn validate(self) -> Result<Self> {
        if self.maps.len() < 2 {
            return Err(Error::InvalidModel(format!(
                "need at least two maps, got {}",
                self.maps.len()
            )));
        }
        if self.maps.len() != self.probs.len() {
            return Err(Error::InvalidModel(format!(
                "{} maps but {} probabilities",
                self.maps.len(),
                self.probs.len()
            )));
        }
        for (i, map) in self.maps.iter().enumerate() {
            map.check(i)?;
        }
        if let Some(p) = self.probs.iter().find(|p| **p <= T::zero()) {
            return Err(Error::NonStochastic(format!(
                "probability {} is not positive",
                p.to_text()
            )));
        }
        let total = self.probs.iter().fold(T::zero(), |acc, p| acc + p.clone());
        let sums_to_one = if T::EXACT {
            total == T::one()
        } else {
            (total.to_f64() - 1.0).abs() <= FLOAT_PROB_TOL
        };
        if !sums_to_one {
            return Err(Error::NonStochastic(format!(
                "probabilities sum to {}",
                total.to_text()
            )));
        }
        let first = self.maps[0].fixed_point();
        if self.maps.iter().all(|m| m.fixed_point() == first) {
            return Err(Error::DegenerateAttractor);
        }
        Ok(self)
    }

    pub fn maps(&self) -> &[AffineMap<T>] {
        &self.maps
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn backend(&self) -> Backend {
        T::BACKEND
    }

    /// Largest contraction factor.
    pub fn max_contraction(&self) -> T {
        self.maps
            .iter()
            .map(|m| m.t.clone())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// Hull of the attractor and the gap-free coverage flag.
    pub fn support(&self) -> Support<T> {
        let mut fixed = self.maps.iter().map(AffineMap::fixed_point);
        let first = fixed.next().expect("validated model has maps");
        let (lo, hi) = fixed.fold((first.clone(), first), |(lo, hi), x| {
            let lo = if x < lo { x.clone() } else { lo };
            let hi = if x > hi { x } else { hi };
            (lo, hi)
        });
        let mut images: Vec<(T, T)> = self
            .maps
            .iter()
            .map(|m| (m.apply(&lo), m.apply(&hi)))
            .collect();
        images.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite endpoints"));
        let slack = if T::EXACT {
            T::zero()
        } else {
            (hi.clone() - lo.clone()) * T::from_exact(&FLOAT_COVER_TOL.to_exact())
        };
        let mut reach = lo.clone();
        let mut gap = false;
        for (a, b) in images {
            // touching images count as covering
            if a > reach.clone() + slack.clone() {
                gap = true;
                break;
            }
            if b > reach {
                reach = b;
            }
        }
        let is_interval = !gap && reach.clone() + slack >= hi;
        Support { lo, hi, is_interval }
    }

    /// Re-expresses the model in another backend.
    ///
    /// Floats become the shortest rationals that round to them.
    pub fn convert<U: Scalar>(&self) -> IfsModel<U> {
        let conv = |x: &T| U::from_exact(&x.to_exact());
        IfsModel {
            maps: self
                .maps
                .iter()
                .map(|m| AffineMap {
                    t: conv(&m.t),
                    v: conv(&m.v),
                })
                .collect(),
            probs: self.probs.iter().map(conv).collect(),
        }
    }

    pub fn to_f64(&self) -> IfsModel<f64> {
        IfsModel {
            maps: self
                .maps
                .iter()
                .map(|m| AffineMap {
                    t: m.t.to_f64(),
                    v: m.v.to_f64(),
                })
                .collect(),
            probs: self.probs.iter().map(Scalar::to_f64).collect(),
        }
    }

    /// The contraction `t` if this is the symmetric Bernoulli system
    /// `tx ∓ (1−t)` with weights `(½, ½)` (maps in either order).
    pub fn bernoulli_parameter(&self) -> Option<T> {
        if self.maps.len() != 2 {
            return None;
        }
        let close = |a: &T, b: &T| {
            if T::EXACT {
                a == b
            } else {
                (a.to_f64() - b.to_f64()).abs() <= FLOAT_PROB_TOL
            }
        };
        let half = T::ratio(1, 2);
        let t = self.maps[0].t.clone();
        if !close(&self.maps[1].t, &t) || !self.probs.iter().all(|p| close(p, &half)) {
            return None;
        }
        let offset = T::one() - t.clone();
        let (a, b) = (&self.maps[0].v, &self.maps[1].v);
        let symmetric = (close(a, &-offset.clone()) && close(b, &offset))
            || (close(b, &-offset.clone()) && close(a, &offset));
        symmetric.then_some(t)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: IfsFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.into_model()
    }

    /// JSON in the input schema; exact values are written as `"p/q"` strings.
    pub fn to_json(&self) -> Value {
        let val = |x: &T| {
            if T::EXACT {
                Value::String(x.to_text())
            } else {
                serde_json::json!(x.to_f64())
            }
        };
        serde_json::json!({
            "maps": self.maps.iter().map(|m| serde_json::json!({"t": val(&m.t), "v": val(&m.v)})).collect::<Vec<_>>(),
            "probs": self.probs.iter().map(val).collect::<Vec<_>>(),
        })
    }
}

/// Bernoulli convolution `f_1(x) = tx − (1−t)`, `f_2(x) = tx + (1−t)`, weights `(½, ½)`.
pub fn make_bernoulli<T: Scalar>(t: T) -> Result<IfsModel<T>> {
    let offset = T::one() - t.clone();
    let maps = vec![
        AffineMap::new(t.clone(), -offset.clone())?,
        AffineMap::new(t, offset)?,
    ];
    IfsModel::new(maps, vec![T::ratio(1, 2), T::ratio(1, 2)])
}

#[derive(Debug, Serialize, Deserialize)]
struct IfsFile {
    maps: Vec<MapEntry>,
    probs: Vec<Value>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MapEntry {
    t: Value,
    v: Value,
}

fn scalar_from_json<T: Scalar>(value: &Value) -> Result<T> {
    let text = match value {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => return Err(Error::Parse(format!("expected a number, got {other}"))),
    };
    T::parse_text(&text).ok_or_else(|| Error::Parse(format!("not a real number: {text:?}")))
}

impl IfsFile {
    fn into_model<T: Scalar>(self) -> Result<IfsModel<T>> {
        let maps = self
            .maps
            .iter()
            .map(|m| {
                Ok(AffineMap {
                    t: scalar_from_json(&m.t)?,
                    v: scalar_from_json(&m.v)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let probs = self
            .probs
            .iter()
            .map(scalar_from_json)
            .collect::<Result<Vec<_>>>()?;
        IfsModel::new(maps, probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn halves<T: Scalar>() -> IfsModel<T> {
        IfsModel::new(
            vec![
                AffineMap::new(T::ratio(1, 2), T::zero()).unwrap(),
                AffineMap::new(T::ratio(1, 2), T::ratio(1, 2)).unwrap(),
            ],
            vec![T::ratio(1, 2), T::ratio(1, 2)],
        )
        .unwrap()
    }

    #[test]
    fn bernoulli_maps() {
        let m = make_bernoulli(0.8).unwrap();
        assert_eq!(m.maps()[0].t, 0.8);
        assert!((m.maps()[0].v + 0.2).abs() < 1e-15);
        assert!((m.maps()[1].v - 0.2).abs() < 1e-15);
        let m = make_bernoulli(q(1, 2)).unwrap();
        assert_eq!(m.maps()[0].v, q(-1, 2));
        assert_eq!(m.maps()[1].v, q(1, 2));
        assert!(matches!(
            make_bernoulli(1.0),
            Err(Error::ContractionOutOfRange { .. })
        ));
        assert!(make_bernoulli(0.0).is_err());
    }

    #[test]
    fn validation_errors() {
        let same = IfsModel::new(
            vec![
                AffineMap::new(0.5, 0.1).unwrap(),
                AffineMap::new(0.5, 0.1).unwrap(),
            ],
            vec![0.5, 0.5],
        );
        assert_eq!(same, Err(Error::DegenerateAttractor));
        let bad_p = IfsModel::new(
            vec![
                AffineMap::new(0.5, 0.0).unwrap(),
                AffineMap::new(0.5, 0.5).unwrap(),
            ],
            vec![0.6, 0.6],
        );
        assert!(matches!(bad_p, Err(Error::NonStochastic(_))));
        let negative = IfsModel::new(
            vec![
                AffineMap::new(0.5, 0.0).unwrap(),
                AffineMap::new(0.5, 0.5).unwrap(),
            ],
            vec![1.5, -0.5],
        );
        assert!(matches!(negative, Err(Error::NonStochastic(_))));
        assert!(matches!(
            AffineMap::new(-0.5, 0.0),
            Err(Error::ContractionOutOfRange { .. })
        ));
        let one_map = IfsModel::new(vec![AffineMap::new(0.5, 0.0).unwrap()], vec![1.0]);
        assert!(matches!(one_map, Err(Error::InvalidModel(_))));
    }

    #[test]
    fn float_probability_tolerance() {
        let maps = || {
            vec![
                AffineMap::new(0.5, 0.0).unwrap(),
                AffineMap::new(0.5, 0.5).unwrap(),
            ]
        };
        assert!(IfsModel::new(maps(), vec![0.5, 0.5 + 1e-13]).is_ok());
        assert!(IfsModel::new(maps(), vec![0.5, 0.5 + 1e-11]).is_err());
    }

    #[test]
    fn supports() {
        let s = make_bernoulli(q(4, 5)).unwrap().support();
        assert_eq!((s.lo, s.hi, s.is_interval), (q(-1, 1), q(1, 1), true));
        let s = make_bernoulli(q(2, 5)).unwrap().support();
        assert_eq!((s.lo, s.hi, s.is_interval), (q(-1, 1), q(1, 1), false));
        let s = halves::<BigRational>().support();
        assert_eq!((s.lo, s.hi, s.is_interval), (q(0, 1), q(1, 1), true));
        // tangent images at t = 1/2 count as covering
        assert!(make_bernoulli(0.5).unwrap().support().is_interval);
        assert!(!make_bernoulli(0.4999).unwrap().support().is_interval);
    }

    #[test]
    fn validate_is_idempotent() {
        let m = halves::<BigRational>();
        assert_eq!(m.clone().validate().unwrap().validate().unwrap(), m);
    }

    #[test]
    fn json_round_trip_and_rationals() {
        let text = r#"{"maps":[{"t":0.8,"v":-0.2},{"t":"4/5","v":"1/5"}],"probs":[0.5,"1/2"]}"#;
        let exact = IfsModel::<BigRational>::from_json_str(text).unwrap();
        assert_eq!(exact.maps()[0].t, q(4, 5));
        assert_eq!(exact.maps()[0].v, q(-1, 5));
        assert_eq!(exact.bernoulli_parameter(), Some(q(4, 5)));
        let float = IfsModel::<f64>::from_json_str(text).unwrap();
        assert_eq!(float.maps()[1].t, 0.8);
        assert_eq!(float.bernoulli_parameter(), Some(0.8));
        let back = IfsModel::<BigRational>::from_json_str(&exact.to_json().to_string()).unwrap();
        assert_eq!(back, exact);
        assert!(IfsModel::<f64>::from_json_str(r#"{"maps":[],"probs":[]}"#).is_err());
        assert!(matches!(
            IfsModel::<f64>::from_json_str(r#"{"maps":[{"t":"x","v":0}],"probs":[1]}"#),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn float_models_convert_to_short_rationals() {
        let m = make_bernoulli(0.8).unwrap().convert::<BigRational>();
        assert_eq!(m.maps()[0].t, q(4, 5));
        assert_eq!(m.probs()[0], q(1, 2));
    }
}
