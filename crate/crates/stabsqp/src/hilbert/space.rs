use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// The operator defining the inner product (u, v) = u' M v.
#[derive(Debug, Clone, PartialEq)]
pub enum Gram {
    Identity,
    Diagonal(DVector<f64>),
    Dense(DMatrix<f64>),
}

/// A finite-dimensional real inner-product space, optionally weighted by a
/// symmetric positive-definite Gram operator.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerProductSpace {
    dim: usize,
    gram: Gram,
}

impl InnerProductSpace {
    /// The standard Euclidean space of the given dimension.
    pub fn euclidean(dim: usize) -> Arc<Self> {
        assert!(dim > 0, "space dimension must be positive");
        Arc::new(Self {
            dim,
            gram: Gram::Identity,
        })
    }

    /// A space weighted by a diagonal Gram operator; all weights must be
    /// strictly positive.
    pub fn diagonal(weights: DVector<f64>) -> Result<Arc<Self>> {
        assert!(!weights.is_empty(), "space dimension must be positive");
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Arc::new(Self {
            dim: weights.len(),
            gram: Gram::Diagonal(weights),
        }))
    }

    /// A space weighted by a dense symmetric positive-definite Gram operator.
    /// Definiteness is checked by attempting a Cholesky factorization.
    pub fn dense(gram: DMatrix<f64>) -> Result<Arc<Self>> {
        let dim = gram.nrows();
        assert!(dim > 0, "space dimension must be positive");
        if gram.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: gram.ncols(),
            });
        }
        let sym_err = (&gram - gram.transpose()).abs().max();
        if sym_err > 1e-12 * (1.0 + gram.abs().max()) {
            return Err(Error::NotPositiveDefinite);
        }
        if gram.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Arc::new(Self {
            dim,
            gram: Gram::Dense(gram),
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gram(&self) -> &Gram {
        &self.gram
    }

    /// True when the Gram operator is identity or diagonal, so that
    /// coordinatewise-separable sets keep separable projections.
    pub fn is_separable(&self) -> bool {
        !matches!(self.gram, Gram::Dense(_))
    }

    /// Diagonal Gram weights, when the Gram is identity or diagonal.
    pub fn diagonal_weights(&self) -> Option<DVector<f64>> {
        match &self.gram {
            Gram::Identity => Some(DVector::from_element(self.dim, 1.0)),
            Gram::Diagonal(w) => Some(w.clone()),
            Gram::Dense(_) => None,
        }
    }

    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        debug_assert_eq!(u.len(), self.dim);
        debug_assert_eq!(v.len(), self.dim);
        match &self.gram {
            Gram::Identity => u.dot(v),
            Gram::Diagonal(w) => u.iter().zip(v.iter()).zip(w.iter()).map(|((a, b), m)| a * b * m).sum(),
            Gram::Dense(m) => u.dot(&(m * v)),
        }
    }

    pub fn norm(&self, u: &DVector<f64>) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    /// M u, the Gram operator applied to a coordinate vector.
    pub fn apply_gram(&self, u: &DVector<f64>) -> DVector<f64> {
        match &self.gram {
            Gram::Identity => u.clone(),
            Gram::Diagonal(w) => u.component_mul(w),
            Gram::Dense(m) => m * u,
        }
    }

    /// M^{-1} u.
    pub fn solve_gram(&self, u: &DVector<f64>) -> DVector<f64> {
        match &self.gram {
            Gram::Identity => u.clone(),
            Gram::Diagonal(w) => u.component_div(w),
            Gram::Dense(m) => m
                .clone()
                .cholesky()
                .expect("gram checked SPD at construction")
                .solve(u),
        }
    }
}

/// An element of an [`InnerProductSpace`], carrying a handle to its space so
/// that norms and inner products use the right weights.
#[derive(Debug, Clone)]
pub struct Vector {
    coords: DVector<f64>,
    space: Arc<InnerProductSpace>,
}

impl Vector {
    pub fn new(space: Arc<InnerProductSpace>, coords: DVector<f64>) -> Result<Self> {
        if coords.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: coords.len(),
            });
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { coords, space })
    }

    pub fn from_slice(space: Arc<InnerProductSpace>, coords: &[f64]) -> Result<Self> {
        Self::new(space, DVector::from_column_slice(coords))
    }

    pub fn zeros(space: Arc<InnerProductSpace>) -> Self {
        let dim = space.dim();
        Self {
            coords: DVector::zeros(dim),
            space,
        }
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.coords
    }

    pub fn space(&self) -> &Arc<InnerProductSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn inner(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.space.inner(&self.coords, &other.coords)
    }

    pub fn norm(&self) -> f64 {
        self.space.norm(&self.coords)
    }

    /// self + t * other.
    pub fn axpy(&self, t: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector {
            coords: &self.coords + t * &other.coords,
            space: self.space.clone(),
        }
    }

    pub(crate) fn with_coords(&self, coords: DVector<f64>) -> Vector {
        debug_assert_eq!(coords.len(), self.space.dim());
        Vector {
            coords,
            space: self.space.clone(),
        }
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, t: f64) -> Vector {
        Vector {
            coords: t * &self.coords,
            space: self.space.clone(),
        }
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self * -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_norm() {
        let s = InnerProductSpace::euclidean(2);
        let v = Vector::from_slice(s, &[3.0, 4.0]).unwrap();
        assert_eq!(v.norm(), 5.0);
    }

    #[test]
    fn diagonal_gram_weights_inner_product() {
        let s = InnerProductSpace::diagonal(DVector::from_vec(vec![2.0, 0.5])).unwrap();
        let u = Vector::from_slice(s.clone(), &[1.0, 2.0]).unwrap();
        let v = Vector::from_slice(s, &[3.0, 4.0]).unwrap();
        // 2*1*3 + 0.5*2*4 = 10
        assert_eq!(u.inner(&v), 10.0);
    }

    #[test]
    fn diagonal_gram_rejects_nonpositive_weight() {
        assert!(InnerProductSpace::diagonal(DVector::from_vec(vec![1.0, 0.0])).is_err());
        assert!(InnerProductSpace::diagonal(DVector::from_vec(vec![1.0, -2.0])).is_err());
    }

    #[test]
    fn dense_gram_rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(InnerProductSpace::dense(m).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert!(InnerProductSpace::dense(m).is_ok());
    }

    #[test]
    fn vector_rejects_nan_and_bad_dim() {
        let s = InnerProductSpace::euclidean(2);
        assert!(matches!(
            Vector::from_slice(s.clone(), &[1.0, f64::NAN]),
            Err(Error::NonFinite(1))
        ));
        assert!(Vector::from_slice(s, &[1.0]).is_err());
    }

    #[test]
    fn norm_zero_iff_zero_vector() {
        let s = InnerProductSpace::diagonal(DVector::from_vec(vec![0.25, 4.0])).unwrap();
        assert_eq!(Vector::zeros(s.clone()).norm(), 0.0);
        let v = Vector::from_slice(s, &[1e-120, 0.0]).unwrap();
        assert!(v.norm() > 0.0);
    }
}
