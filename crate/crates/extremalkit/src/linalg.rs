//! Small dense vector helpers over `&[f64]`.
//!
//! Dimensions stay below ~20 in every planned instance, so plain slices
//! beat a matrix library here. All functions panic on dimension mismatch
//! in debug builds only.

/// Dot product.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `a - b` as a new vector.
#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + b` as a new vector.
#[inline]
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `c * a` as a new vector.
#[inline]
pub fn scale(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|x| c * x).collect()
}

/// `a + c * b` as a new vector.
#[inline]
pub fn axpy(a: &[f64], c: f64, b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + c * y).collect()
}

/// Euclidean distance between two points.
#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Zero vector of dimension `n`.
#[inline]
pub fn zeros(n: usize) -> Vec<f64> {
    vec![0.0; n]
}

/// Returns `a / ||a||`, or `None` when `||a|| <= eps`.
pub fn normalize(a: &[f64], eps: f64) -> Option<Vec<f64>> {
    let n = norm(a);
    if n <= eps {
        None
    } else {
        Some(scale(a, 1.0 / n))
    }
}

/// Angle in radians between two nonzero vectors, clamped into `[0, pi]`.
pub fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot(a, b) / (na * nb)).clamp(-1.0, 1.0).acos()
}

/// Lexicographic comparison used to pick a canonical point among
/// projection ties.
pub fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// True when all entries are finite.
pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Standard basis vector `e_k` in dimension `n`.
pub fn basis(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}
