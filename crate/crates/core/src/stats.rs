//! Small vector statistics used to compare discretised functions.

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// `|⟨a, b⟩| / (‖a‖ ‖b‖)`; invariant under scaling either vector.
pub fn abs_cosine(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).abs()
}

/// Pearson correlation; zero when either side is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let ca: Vec<f64> = a.iter().map(|x| x - ma).collect();
    let cb: Vec<f64> = b.iter().map(|x| x - mb).collect();
    let dot: f64 = ca.iter().zip(&cb).map(|(x, y)| x * y).sum();
    let na = ca.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = cb.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na * nb)
}

/// `∫ |f − g|` for two functions sampled at the midpoints of equal cells of width `h`.
pub fn l1_distance(f: &[f64], g: &[f64], h: f64) -> f64 {
    assert_eq!(f.len(), g.len(), "length mismatch");
    f.iter().zip(g).map(|(x, y)| (x - y).abs()).sum::<f64>() * h
}

/// Value at `x` of a step function with the given cell boundaries.
pub fn step_value(boundaries: &[f64], values: &[f64], x: f64) -> f64 {
    let idx = boundaries.partition_point(|b| *b <= x);
    values[idx.clamp(1, values.len()) - 1]
}
