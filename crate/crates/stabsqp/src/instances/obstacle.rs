//! Discretized 1-D obstacle problem:
//! `min 1/2 a(u, u) - (b, u)_h  s.t.  u <= psi` on (0, 1) with zero boundary
//! values, where `a` is the Dirichlet form of -u'' on a uniform interior grid
//! and the space carries the L2-like Gram weight h per node.
//!
//! The default load 10 sin(pi t) pushes the membrane against the constant
//! obstacle psi = 0.5 over a contact region in the middle of the interval, so
//! the solution has active and inactive coordinates with comfortable
//! strict-complementarity margins.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hilbert::{ConvexSet, InnerProductSpace};
use crate::problem::ProblemOracles;

use super::boxqp::solve_box_qp;

/// Largest grid for which a reference solution is computed by the dense
/// box-QP oracle.
const REFERENCE_MAX_N: usize = 128;

pub fn make_obstacle_1d(n: usize) -> Result<ProblemOracles> {
    make_obstacle_1d_with(n, |t| 10.0 * (PI * t).sin(), |_| 0.5)
}

/// Obstacle problem with a custom load and obstacle profile; `n` interior
/// grid nodes, `n >= 4`.
pub fn make_obstacle_1d_with(
    n: usize,
    load: impl Fn(f64) -> f64,
    obstacle: impl Fn(f64) -> f64,
) -> Result<ProblemOracles> {
    if n < 4 {
        return Err(Error::BadGrid(n));
    }
    let h = 1.0 / (n as f64 + 1.0);
    let t = |i: usize| (i as f64 + 1.0) * h;
    let b = DVector::from_fn(n, |i, _| load(t(i)));
    let psi = DVector::from_fn(n, |i, _| obstacle(t(i)));

    // stiffness matrix of -u'' with zero Dirichlet boundary values
    let a = Arc::new(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 / (h * h)
        } else if i.abs_diff(j) == 1 {
            -1.0 / (h * h)
        } else {
            0.0
        }
    }));

    let space = InnerProductSpace::diagonal(DVector::from_element(n, h))?;
    let set = ConvexSet::boxed(DVector::from_element(n, f64::NEG_INFINITY), psi.clone())?;

    let a1 = a.clone();
    let a2 = a.clone();
    let a3 = a.clone();
    let b1 = b.clone();
    let b2 = b.clone();
    let p = ProblemOracles::new(
        space.clone(),
        space,
        set,
        Box::new(move |u| {
            let au = &*a1 * u;
            0.5 * h * u.dot(&au) - h * b1.dot(u)
        }),
        Box::new(move |u| &*a2 * u - &b2),
        Box::new(|u| u.clone()),
        Box::new(|_, d| d.clone()),
        // X and Y share the same Gram, so the adjoint of the identity is the
        // identity on coordinates.
        Box::new(|_, l| l.clone()),
        Some(Box::new(move |_, _, d| &*a3 * d)),
    )?;

    if n <= REFERENCE_MAX_N {
        let lower = DVector::from_element(n, f64::NEG_INFINITY);
        let u_ref = solve_box_qp(&a, &b, &lower, &psi)?;
        // stationarity (Au - b) + lambda = 0
        let lambda = &b - &*a * &u_ref;
        let reference = p.point(u_ref.as_slice(), lambda.as_slice())?;
        Ok(p.with_reference(reference))
    } else {
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_tiny_grids() {
        assert!(matches!(make_obstacle_1d(3), Err(Error::BadGrid(3))));
    }

    #[test]
    fn reference_is_symmetric_and_touches_obstacle() {
        let p = make_obstacle_1d(31).unwrap();
        let v = p.reference_kkt().unwrap();
        let u = v.x.coords();
        let n = u.len();
        // symmetric data: u(t) = u(1 - t)
        for i in 0..n {
            assert!((u[i] - u[n - 1 - i]).abs() <= 1e-8);
        }
        // contact in the middle, free near the boundary
        assert!((u[n / 2] - 0.5).abs() <= 1e-10);
        assert!(u[0] < 0.5 - 1e-3);
        // multiplier positive on the contact set (upper bound active)
        assert!(v.lambda.coords()[n / 2] > 1e-3);
    }

    #[test]
    fn reference_is_kkt() {
        for n in [16, 32, 64] {
            let p = make_obstacle_1d(n).unwrap();
            let v = p.reference_kkt().unwrap().clone();
            let sigma = p.sigma(&v).unwrap();
            assert!(sigma <= 1e-10 * (1.0 + v.norm()), "n={n}: sigma={sigma}");
        }
    }

    #[test]
    fn strict_complementarity_margins() {
        let p = make_obstacle_1d(64).unwrap();
        let v = p.reference_kkt().unwrap();
        let u = v.x.coords();
        let l = v.lambda.coords();
        for i in 0..u.len() {
            let gap = 0.5 - u[i];
            // every coordinate is clearly active or clearly inactive
            assert!(
                gap > 1e-6 || l[i] > 1e-6,
                "weak complementarity at node {i}: gap={gap}, mult={}",
                l[i]
            );
            assert!(gap >= -1e-9);
        }
    }
}
