//! Problem definition via oracles, primal-dual points, the Lagrangian
//! derivative, and the stabilization/KKT residual `sigma(v)`.
//!
//! All dual objects are identified with primal-space vectors through the Gram
//! operator (Riesz representation): `grad_f` returns the vector `g` with
//! `(g, d)_X = f'(x)d`, and the adjoint oracle returns the representative of
//! `d -> (lambda, G'(x)d)_Y` in X. Dual norms are then plain space norms.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::hilbert::{ConvexSet, InnerProductSpace, Vector};

type ScalarFn = Box<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
type VecFn = Box<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type BiVecFn = Box<dyn Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync>;
type HessFn =
    Box<dyn Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync>;

/// A primal-dual point v = (x, lambda) with the product norm
/// `||v|| = ||x||_X + ||lambda||_Y`.
#[derive(Debug, Clone)]
pub struct PrimalDualPoint {
    pub x: Vector,
    pub lambda: Vector,
}

impl PrimalDualPoint {
    pub fn new(x: Vector, lambda: Vector) -> Self {
        Self { x, lambda }
    }

    /// The product norm, a sum of the component norms (never a Euclidean
    /// combination).
    pub fn norm(&self) -> f64 {
        self.x.norm() + self.lambda.norm()
    }

    /// Distance to another point in the product norm.
    pub fn dist(&self, other: &PrimalDualPoint) -> f64 {
        (&self.x - &other.x).norm() + (&self.lambda - &other.lambda).norm()
    }
}

/// Callable bundle for f, f', G, G' (apply and adjoint-apply) and the
/// Hessian-of-the-Lagrangian apply.
///
/// Oracles must be pure; every operation here is a pure function of its
/// arguments and safe for concurrent evaluation.
pub struct ProblemOracles {
    x_space: Arc<InnerProductSpace>,
    y_space: Arc<InnerProductSpace>,
    constraint_set: ConvexSet,
    f: ScalarFn,
    grad_f: VecFn,
    g: VecFn,
    jac_apply: BiVecFn,
    jac_adjoint_apply: BiVecFn,
    hess_l_apply: Option<HessFn>,
    reference_kkt: Option<PrimalDualPoint>,
}

impl ProblemOracles {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        x_space: Arc<InnerProductSpace>,
        y_space: Arc<InnerProductSpace>,
        constraint_set: ConvexSet,
        f: ScalarFn,
        grad_f: VecFn,
        g: VecFn,
        jac_apply: BiVecFn,
        jac_adjoint_apply: BiVecFn,
        hess_l_apply: Option<HessFn>,
    ) -> Result<Self> {
        if constraint_set.dim() != y_space.dim() {
            return Err(Error::DimensionMismatch {
                expected: y_space.dim(),
                got: constraint_set.dim(),
            });
        }
        Ok(Self {
            x_space,
            y_space,
            constraint_set,
            f,
            grad_f,
            g,
            jac_apply,
            jac_adjoint_apply,
            hess_l_apply,
            reference_kkt: None,
        })
    }

    pub fn with_reference(mut self, reference: PrimalDualPoint) -> Self {
        self.reference_kkt = Some(reference);
        self
    }

    pub fn x_space(&self) -> &Arc<InnerProductSpace> {
        &self.x_space
    }

    pub fn y_space(&self) -> &Arc<InnerProductSpace> {
        &self.y_space
    }

    pub fn constraint_set(&self) -> &ConvexSet {
        &self.constraint_set
    }

    /// Cached reference KKT point, when the instance ships one. Used only for
    /// certification, never by the solver itself.
    pub fn reference_kkt(&self) -> Option<&PrimalDualPoint> {
        self.reference_kkt.as_ref()
    }

    pub fn x_vector(&self, coords: &[f64]) -> Result<Vector> {
        Vector::from_slice(self.x_space.clone(), coords)
    }

    pub fn y_vector(&self, coords: &[f64]) -> Result<Vector> {
        Vector::from_slice(self.y_space.clone(), coords)
    }

    pub fn point(&self, x: &[f64], lambda: &[f64]) -> Result<PrimalDualPoint> {
        Ok(PrimalDualPoint::new(
            self.x_vector(x)?,
            self.y_vector(lambda)?,
        ))
    }

    pub fn f_at(&self, x: &Vector) -> f64 {
        (self.f)(x.coords())
    }

    pub fn grad_f_at(&self, x: &Vector) -> Vector {
        Vector::new(self.x_space.clone(), (self.grad_f)(x.coords()))
            .expect("grad_f oracle returned a malformed vector")
    }

    pub fn g_at(&self, x: &Vector) -> Vector {
        Vector::new(self.y_space.clone(), (self.g)(x.coords()))
            .expect("G oracle returned a malformed vector")
    }

    /// G'(x) d.
    pub fn jac_apply_at(&self, x: &Vector, d: &Vector) -> Vector {
        Vector::new(self.y_space.clone(), (self.jac_apply)(x.coords(), d.coords()))
            .expect("G' oracle returned a malformed vector")
    }

    /// G'(x)* lambda, as a Riesz representative in X.
    pub fn jac_adjoint_at(&self, x: &Vector, lambda: &Vector) -> Vector {
        Vector::new(
            self.x_space.clone(),
            (self.jac_adjoint_apply)(x.coords(), lambda.coords()),
        )
        .expect("adjoint oracle returned a malformed vector")
    }

    /// L_xx(v) d, exact when supplied by the instance, otherwise a central
    /// finite difference of the Lagrangian gradient with step
    /// h = 1e-5 * (1 + ||x||) along the normalized direction.
    pub fn hess_l_apply_at(&self, v: &PrimalDualPoint, d: &Vector) -> Vector {
        if let Some(h) = &self.hess_l_apply {
            return Vector::new(
                self.x_space.clone(),
                h(v.x.coords(), v.lambda.coords(), d.coords()),
            )
            .expect("Hessian oracle returned a malformed vector");
        }
        let dn = d.norm();
        if dn == 0.0 {
            return Vector::zeros(self.x_space.clone());
        }
        let h = 1e-5 * (1.0 + v.x.norm());
        let unit = d * (1.0 / dn);
        let plus = PrimalDualPoint::new(v.x.axpy(h, &unit), v.lambda.clone());
        let minus = PrimalDualPoint::new(v.x.axpy(-h, &unit), v.lambda.clone());
        let diff = &self.lagrangian_grad(&plus) - &self.lagrangian_grad(&minus);
        &diff * (dn / (2.0 * h))
    }

    /// L(v) = f(x) + (lambda, G(x))_Y.
    pub fn lagrangian(&self, v: &PrimalDualPoint) -> f64 {
        self.f_at(&v.x) + v.lambda.inner(&self.g_at(&v.x))
    }

    /// L_x(v) = f'(x) + G'(x)* lambda, as a Riesz representative in X.
    pub fn lagrangian_grad(&self, v: &PrimalDualPoint) -> Vector {
        &self.grad_f_at(&v.x) + &self.jac_adjoint_at(&v.x, &v.lambda)
    }

    /// The stabilization parameter and KKT residual
    /// `sigma(v) = ||f'(x) + G'(x)* lambda||_X + ||G(x) - P_K(G(x) + lambda)||_Y`.
    /// Zero exactly at KKT points.
    pub fn sigma(&self, v: &PrimalDualPoint) -> Result<f64> {
        let stationarity = self.lagrangian_grad(v).norm();
        let gx = self.g_at(&v.x);
        let proj = self.constraint_set.project(&(&gx + &v.lambda))?;
        Ok(stationarity + (&gx - &proj).norm())
    }

    /// First-order optimality check with tolerances scaled by (1 + ||v||).
    pub fn kkt_check(&self, v: &PrimalDualPoint, tol: f64) -> Result<KktReport> {
        if !(tol > 0.0) {
            return Err(Error::InvalidOption(format!(
                "kkt tolerance must be positive, got {tol}"
            )));
        }
        let stationarity = self.lagrangian_grad(v).norm();
        let complementarity = self
            .constraint_set
            .normal_cone_residual(&self.g_at(&v.x), &v.lambda)?;
        let scale = tol * (1.0 + v.norm());
        Ok(KktReport {
            is_kkt: stationarity <= scale && complementarity <= scale,
            stationarity,
            complementarity,
        })
    }

    /// Relative adjoint-consistency error
    /// `|(lambda, G'(x)d)_Y - (G'(x)* lambda, d)_X| / (1 + |(lambda, G'(x)d)_Y|)`.
    pub fn adjoint_consistency_error(&self, x: &Vector, d: &Vector, lambda: &Vector) -> f64 {
        let lhs = lambda.inner(&self.jac_apply_at(x, d));
        let rhs = self.jac_adjoint_at(x, lambda).inner(d);
        (lhs - rhs).abs() / (1.0 + lhs.abs())
    }

    /// Relative symmetry error of the Hessian-of-the-Lagrangian apply.
    pub fn hessian_symmetry_error(&self, v: &PrimalDualPoint, d: &Vector, e: &Vector) -> f64 {
        let lhs = self.hess_l_apply_at(v, d).inner(e);
        let rhs = self.hess_l_apply_at(v, e).inner(d);
        (lhs - rhs).abs() / (1.0 + lhs.abs())
    }

    /// Relative error between grad_f and a central finite difference of f in
    /// the direction `d`, with step h = 1e-6 * (1 + ||x||).
    pub fn gradient_fd_error(&self, x: &Vector, d: &Vector) -> f64 {
        let dn = d.norm();
        if dn == 0.0 {
            return 0.0;
        }
        let unit = d * (1.0 / dn);
        let h = 1e-6 * (1.0 + x.norm());
        let fp = self.f_at(&x.axpy(h, &unit));
        let fm = self.f_at(&x.axpy(-h, &unit));
        let fd = (fp - fm) / (2.0 * h);
        let an = self.grad_f_at(x).inner(&unit);
        (fd - an).abs() / (1.0 + an.abs())
    }
}

/// Result of [`ProblemOracles::kkt_check`].
#[derive(Debug, Clone, Copy)]
pub struct KktReport {
    pub is_kkt: bool,
    pub stationarity: f64,
    pub complementarity: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::make_scalar_toy;
    use approx::assert_abs_diff_eq;

    // f = x^2/2, G = x, K = [1, inf)
    fn toy() -> ProblemOracles {
        make_scalar_toy()
    }

    #[test]
    fn lagrangian_hand_values() {
        let p = toy();
        let v = p.point(&[2.0], &[-1.0]).unwrap();
        // f(2) = 2, (-1)(2) = -2
        assert_eq!(p.lagrangian(&v), 0.0);
        let v0 = p.point(&[2.0], &[0.0]).unwrap();
        assert_eq!(p.lagrangian(&v0), p.f_at(&v0.x));
        // zero of both f and G with arbitrary multiplier
        let vz = p.point(&[0.0], &[7.0]).unwrap();
        assert_eq!(p.lagrangian(&vz), 0.0);
    }

    #[test]
    fn lagrangian_grad_hand_values() {
        let p = toy();
        let v = p.point(&[2.0], &[-1.0]).unwrap();
        assert_eq!(p.lagrangian_grad(&v).coords()[0], 1.0);
        let vbar = p.reference_kkt().unwrap();
        assert!(p.lagrangian_grad(vbar).norm() <= 1e-12 * (1.0 + vbar.norm()));
        let v0 = p.point(&[2.0], &[0.0]).unwrap();
        assert_eq!(
            p.lagrangian_grad(&v0).coords()[0],
            p.grad_f_at(&v0.x).coords()[0]
        );
    }

    #[test]
    fn sigma_hand_values() {
        let p = toy();
        let kkt = p.point(&[1.0], &[-1.0]).unwrap();
        assert_eq!(p.sigma(&kkt).unwrap(), 0.0);
        // |2 - 1| + |2 - P_K(1)| = 1 + 1
        let v = p.point(&[2.0], &[-1.0]).unwrap();
        assert_abs_diff_eq!(p.sigma(&v).unwrap(), 2.0, epsilon = 1e-15);
        // |2| + |2 - P_K(2)| = 2 + 0
        let v = p.point(&[2.0], &[0.0]).unwrap();
        assert_abs_diff_eq!(p.sigma(&v).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn kkt_check_examples() {
        let p = toy();
        let kkt = p.point(&[1.0], &[-1.0]).unwrap();
        assert!(p.kkt_check(&kkt, 1e-10).unwrap().is_kkt);

        let v = p.point(&[2.0], &[-1.0]).unwrap();
        let rep = p.kkt_check(&v, 1e-10).unwrap();
        assert!(!rep.is_kkt);
        assert_abs_diff_eq!(rep.stationarity, 1.0, epsilon = 1e-15);

        // vacuous tolerance accepts anything
        assert!(p.kkt_check(&v, f64::INFINITY).unwrap().is_kkt);
        assert!(p.kkt_check(&v, 0.0).is_err());
    }

    #[test]
    fn product_norm_is_a_sum() {
        let p = toy();
        let v = p.point(&[3.0], &[4.0]).unwrap();
        assert_eq!(v.norm(), 7.0);
    }

    #[test]
    fn fd_hessian_fallback_matches_exact_on_quadratic() {
        let p = toy();
        let q = ProblemOracles::new(
            p.x_space().clone(),
            p.y_space().clone(),
            p.constraint_set().clone(),
            Box::new(|x| 0.5 * x[0] * x[0]),
            Box::new(|x| x.clone()),
            Box::new(|x| x.clone()),
            Box::new(|_, d| d.clone()),
            Box::new(|_, l| l.clone()),
            None, // finite-difference fallback
        )
        .unwrap();
        let v = q.point(&[0.3], &[-0.7]).unwrap();
        let d = q.x_vector(&[2.0]).unwrap();
        let hd = q.hess_l_apply_at(&v, &d);
        assert_abs_diff_eq!(hd.coords()[0], 2.0, epsilon = 1e-7);
    }
}
