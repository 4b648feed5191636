//! The flat unit torus `[-1/2, 1/2)^d` with the wrapped ℓ∞ norm.

use crate::error::{Error, Result};

/// Wraps a real into the fundamental domain `[-1/2, 1/2)`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    let y = x - x.round();
    // `round` sends exact halves away from zero, so +1/2 lands on -1/2 already;
    // the guard covers the remaining floating-point edge.
    if y >= 0.5 {
        y - 1.0
    } else {
        y
    }
}

/// A point (or displacement) on the torus, coordinates reduced into `[-1/2, 1/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusVector {
    coords: Vec<f64>,
}

impl TorusVector {
    pub fn new(coords: impl Into<Vec<f64>>) -> Result<Self> {
        let mut coords = coords.into();
        if coords.is_empty() {
            return Err(Error::invalid("torus vector needs at least one coordinate"));
        }
        for c in coords.iter_mut() {
            if !c.is_finite() {
                return Err(Error::invalid(format!("non-finite torus coordinate {c}")));
            }
            *c = wrap(*c);
        }
        Ok(TorusVector { coords })
    }

    pub fn zero(dim: usize) -> Self {
        TorusVector { coords: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `max_j |x_j|`; never exceeds 1/2.
    pub fn norm(&self) -> f64 {
        linf(&self.coords)
    }
}

pub(crate) fn linf(coords: &[f64]) -> f64 {
    coords.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
}

/// Coordinate-wise `x - y`, wrapped back into the fundamental domain.
pub fn torus_displacement(x: &TorusVector, y: &TorusVector) -> Result<TorusVector> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), got: y.dim() });
    }
    let coords = x.coords.iter().zip(&y.coords).map(|(a, b)| wrap(a - b)).collect();
    Ok(TorusVector { coords })
}

/// Wrapped ℓ∞ distance for raw coordinate slices of equal length.
#[inline]
pub(crate) fn torus_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).fold(0.0_f64, |m, (a, b)| m.max(wrap(a - b).abs()))
}
