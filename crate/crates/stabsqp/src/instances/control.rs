//! Discretized linear-quadratic control problem with control bounds:
//! `min 1/2 ||y - y_d||_h^2 + alpha/2 ||u||_h^2  s.t.  A y = u, a <= u <= b`
//! where A is the Dirichlet stiffness matrix of -y'' on n interior nodes and
//! z = (y, u) is optimized jointly. The constraint image splits into an
//! equality block (the state equation) and a box block (control bounds), so
//! the set is a product of a zero set and a box.
//!
//! The reference solution comes from the reduced control problem
//! `min 1/2 u' (A^{-1}A^{-1} + alpha I) u - (A^{-1} y_d)' u` over the box,
//! solved by the independent dense box-QP oracle; state and multipliers are
//! recovered from the reduced solution.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hilbert::{ConvexSet, InnerProductSpace};
use crate::problem::ProblemOracles;

use super::boxqp::solve_box_qp;

pub fn make_control_lq(n: usize) -> Result<ProblemOracles> {
    make_control_lq_with(n, 1e-3, (-6.0, 6.0), |t| (2.0 * PI * t).sin())
}

pub fn make_control_lq_with(
    n: usize,
    alpha: f64,
    bounds: (f64, f64),
    target: impl Fn(f64) -> f64,
) -> Result<ProblemOracles> {
    if n < 4 {
        return Err(Error::BadGrid(n));
    }
    if !(alpha > 0.0) {
        return Err(Error::BadAlpha(alpha));
    }
    let (lo, hi) = bounds;
    if !(lo < hi) {
        return Err(Error::InvalidBounds(0));
    }
    let h = 1.0 / (n as f64 + 1.0);
    let yd = DVector::from_fn(n, |i, _| target((i as f64 + 1.0) * h));

    let a = Arc::new(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 / (h * h)
        } else if i.abs_diff(j) == 1 {
            -1.0 / (h * h)
        } else {
            0.0
        }
    }));

    // z = (y, u) and constraint image (Ay - u, u), both weighted by h
    let x_space = InnerProductSpace::diagonal(DVector::from_element(2 * n, h))?;
    let y_space = InnerProductSpace::diagonal(DVector::from_element(2 * n, h))?;
    let set = ConvexSet::product(vec![
        ConvexSet::zero(n),
        ConvexSet::boxed_uniform(n, lo, hi)?,
    ])?;

    let split = move |z: &DVector<f64>| (z.rows(0, n).into_owned(), z.rows(n, n).into_owned());
    let join = move |top: DVector<f64>, bot: DVector<f64>| {
        let mut out = DVector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&top);
        out.rows_mut(n, n).copy_from(&bot);
        out
    };

    let yd1 = yd.clone();
    let yd2 = yd.clone();
    let a1 = a.clone();
    let a2 = a.clone();
    let p = ProblemOracles::new(
        x_space,
        y_space,
        set,
        Box::new(move |z| {
            let (y, u) = split(z);
            let dy = &y - &yd1;
            0.5 * h * (dy.dot(&dy) + alpha * u.dot(&u))
        }),
        Box::new(move |z| {
            let (y, u) = split(z);
            join(&y - &yd2, alpha * &u)
        }),
        Box::new(move |z| {
            let (y, u) = split(z);
            join(&*a1 * &y - &u, u)
        }),
        Box::new(move |z, dz| {
            let (dy, du) = split(dz);
            let _ = z;
            join(&*a2 * &dy - &du, du)
        }),
        // adjoint: (l1, l2) -> (A l1, l2 - l1); A is symmetric and the Grams
        // on X and Y coincide, so coordinate transposes are exact adjoints.
        Box::new({
            let a = a.clone();
            move |_, l| {
                let (l1, l2) = split(l);
                join(&*a * &l1, &l2 - &l1)
            }
        }),
        Some(Box::new(move |_, _, dz| {
            let (dy, du) = split(dz);
            join(dy, alpha * du)
        })),
    )?;

    // Reference by the reduced problem over u.
    let a_dense = (*a).clone();
    let a_inv = a_dense
        .lu()
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite)?;
    let p_red = &a_inv * &a_inv + DMatrix::identity(n, n) * alpha;
    let q_red = &a_inv * &yd;
    let lower = DVector::from_element(n, lo);
    let upper = DVector::from_element(n, hi);
    let u_ref = solve_box_qp(&p_red, &q_red, &lower, &upper)?;
    let y_ref = &a_inv * &u_ref;
    let l1 = -(&a_inv * &(&y_ref - &yd));
    let l2 = &l1 - alpha * &u_ref;
    let reference = p.point(
        join(y_ref, u_ref).as_slice(),
        join(l1, l2).as_slice(),
    )?;
    Ok(p.with_reference(reference))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argument_validation() {
        assert!(matches!(make_control_lq(2), Err(Error::BadGrid(2))));
        assert!(matches!(
            make_control_lq_with(8, 0.0, (-1.0, 1.0), |_| 0.0),
            Err(Error::BadAlpha(_))
        ));
        assert!(make_control_lq_with(8, 1e-2, (1.0, -1.0), |_| 0.0).is_err());
    }

    #[test]
    fn reference_is_kkt() {
        for n in [8, 16, 32] {
            let p = make_control_lq(n).unwrap();
            let v = p.reference_kkt().unwrap().clone();
            let sigma = p.sigma(&v).unwrap();
            assert!(sigma <= 1e-10 * (1.0 + v.norm()), "n={n}: sigma={sigma}");
        }
    }

    #[test]
    fn control_bounds_are_active_with_margin() {
        let p = make_control_lq(32).unwrap();
        let v = p.reference_kkt().unwrap();
        let n = 32;
        let u = v.x.coords().rows(n, n).into_owned();
        let l2 = v.lambda.coords().rows(n, n).into_owned();
        let at_hi = (0..n).filter(|&i| (u[i] - 6.0).abs() < 1e-9).count();
        let at_lo = (0..n).filter(|&i| (u[i] + 6.0).abs() < 1e-9).count();
        assert!(at_hi > 0 && at_lo > 0, "hi={at_hi}, lo={at_lo}");
        for i in 0..n {
            let interior = u[i] > -6.0 + 1e-6 && u[i] < 6.0 - 1e-6;
            // strict complementarity: active bounds carry nonzero multipliers
            assert!(
                interior || l2[i].abs() > 1e-6,
                "weak complementarity at control node {i}"
            );
        }
    }

    #[test]
    fn state_equation_holds_at_reference() {
        let p = make_control_lq(16).unwrap();
        let v = p.reference_kkt().unwrap();
        let g = p.g_at(&v.x);
        // first block of G is Ay - u = 0
        let eq_res = g.coords().rows(0, 16).amax();
        assert!(eq_res <= 1e-8, "state residual {eq_res}");
    }
}
