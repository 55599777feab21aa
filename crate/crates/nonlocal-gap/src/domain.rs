//! Product domains: finite products of unit intervals, each factor carrying an
//! optional constant drift coefficient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One axis of the product domain: the open unit interval (0,1) with a
/// constant drift coefficient `b` (the operator on this axis is ½u″ + b u′).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalFactor {
    pub drift: f64,
}

impl IntervalFactor {
    pub fn new(drift: f64) -> Self {
        Self { drift }
    }
}

/// A product of axis-aligned unit-interval factors. The dimension is the
/// number of factors; zero drift on every axis gives ½Δ on (0,1)^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub factors: Vec<IntervalFactor>,
}

impl DomainSpec {
    pub fn new(factors: Vec<IntervalFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument(
                "domain must have at least one factor".into(),
            ));
        }
        if let Some(f) = factors.iter().find(|f| !f.drift.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "drift must be finite, got {}",
                f.drift
            )));
        }
        Ok(Self { factors })
    }

    /// The zero-drift cube (0,1)^d.
    pub fn cube(dim: usize) -> Result<Self> {
        Self::new(vec![IntervalFactor::new(0.0); dim])
    }

    /// Unit interval with constant drift, possibly different per axis.
    pub fn with_drifts(drifts: &[f64]) -> Result<Self> {
        Self::new(drifts.iter().map(|&b| IntervalFactor::new(b)).collect())
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn is_zero_drift(&self) -> bool {
        self.factors.iter().all(|f| f.drift == 0.0)
    }

    /// Strict interior test for a point of matching dimension.
    pub fn contains_interior(&self, point: &[f64]) -> bool {
        point.len() == self.dim() && point.iter().all(|&x| x > 0.0 && x < 1.0)
    }

    pub fn check_interior(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "point dimension {} does not match domain dimension {}",
                point.len(),
                self.dim()
            )));
        }
        if self.contains_interior(point) {
            Ok(())
        } else {
            Err(Error::OutsideDomain)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_domain() {
        assert!(DomainSpec::new(vec![]).is_err());
    }

    #[test]
    fn rejects_nonfinite_drift() {
        assert!(DomainSpec::with_drifts(&[f64::NAN]).is_err());
        assert!(DomainSpec::with_drifts(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn interior_test_is_strict() {
        let d = DomainSpec::cube(2).unwrap();
        assert!(d.contains_interior(&[0.5, 0.25]));
        assert!(!d.contains_interior(&[0.0, 0.5]));
        assert!(!d.contains_interior(&[0.5, 1.0]));
        assert!(!d.contains_interior(&[0.5]));
    }
}
