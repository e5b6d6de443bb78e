use super::{AtomizerError, Result};
use crate::scalar::Scalar;

pub fn norm<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Cosine similarity `(u·v)/(‖u‖‖v‖)`, clamped to `[-1, 1]`.
pub fn cosine<T: Scalar>(u: &[T], v: &[T]) -> Result<T> {
    cosine_with_norms(u, norm(u), v, norm(v))
}

/// Same arithmetic as [`cosine`] with the norms supplied by the caller, so
/// repeated comparisons against fixed centers stay bit-identical to it.
pub fn cosine_with_norms<T: Scalar>(u: &[T], norm_u: T, v: &[T], norm_v: T) -> Result<T> {
    if u.len() != v.len() {
        return Err(AtomizerError::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    if !(norm_u > T::zero() && norm_v > T::zero()) {
        return Err(AtomizerError::ZeroVector);
    }
    let dot: T = u.iter().zip(v).map(|(&a, &b)| a * b).sum();
    let c = dot / (norm_u * norm_v);
    Ok(c.max(-T::one()).min(T::one()))
}
