//! Seeded random convex QPs with linear constraints into a box-like set,
//! used to cross-check the subproblem solver against the brute-force
//! active-set oracle. Kept deterministic: the same seed always produces the
//! same instance.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hilbert::{ConvexSet, InnerProductSpace};
use crate::problem::ProblemOracles;

/// `min 1/2 x' Q x + g' x  s.t.  A x in K`, with Q = R'R + I/2 convex and K
/// a box whose coordinates mix two-sided, one-sided, and equality bounds.
pub fn make_quadratic_box(n: usize, m: usize, seed: u64) -> Result<ProblemOracles> {
    if n == 0 || m == 0 {
        return Err(Error::BadGrid(n.min(m)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
    let q = r.transpose() * &r + DMatrix::identity(n, n) * 0.5;
    let g = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..=1.0));
    let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..=1.0));

    let mut lower = DVector::zeros(m);
    let mut upper = DVector::zeros(m);
    for i in 0..m {
        let base: f64 = rng.gen_range(-1.0..=0.0);
        let width: f64 = rng.gen_range(0.5..=2.0);
        match rng.gen_range(0..4) {
            0 => {
                lower[i] = base;
                upper[i] = base + width;
            }
            1 => {
                lower[i] = base;
                upper[i] = f64::INFINITY;
            }
            2 => {
                lower[i] = f64::NEG_INFINITY;
                upper[i] = base + width;
            }
            _ => {
                lower[i] = base;
                upper[i] = base; // equality coordinate
            }
        }
    }
    let set = ConvexSet::boxed(lower, upper)?;

    let xs = InnerProductSpace::euclidean(n);
    let ys = InnerProductSpace::euclidean(m);
    let q1 = q.clone();
    let q2 = q.clone();
    let q3 = q;
    let g1 = g.clone();
    let g2 = g;
    let a1 = a.clone();
    let a2 = a;
    ProblemOracles::new(
        xs,
        ys,
        set,
        Box::new(move |x| 0.5 * x.dot(&(&q1 * x)) + g1.dot(x)),
        Box::new(move |x| &q2 * x + &g2),
        Box::new({
            let a = a1.clone();
            move |x| &a * x
        }),
        Box::new(move |_, d| &a1 * d),
        Box::new(move |_, l| a2.transpose() * l),
        Some(Box::new(move |_, _, d| &q3 * d)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_generation_is_reproducible() {
        let p1 = make_quadratic_box(4, 3, 42).unwrap();
        let p2 = make_quadratic_box(4, 3, 42).unwrap();
        let x = p1.x_vector(&[0.3, -0.7, 1.1, 0.0]).unwrap();
        assert_eq!(p1.f_at(&x), p2.f_at(&x));
        assert_eq!(p1.g_at(&x).coords(), p2.g_at(&x).coords());
    }

    #[test]
    fn different_seeds_differ() {
        let p1 = make_quadratic_box(4, 3, 1).unwrap();
        let p2 = make_quadratic_box(4, 3, 2).unwrap();
        let x = p1.x_vector(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_ne!(p1.f_at(&x), p2.f_at(&x));
    }

    #[test]
    fn oracles_are_mutually_consistent() {
        let p = make_quadratic_box(5, 4, 7).unwrap();
        let x = p.x_vector(&[0.1, -0.2, 0.3, -0.4, 0.5]).unwrap();
        let d = p.x_vector(&[1.0, 0.5, -0.5, 0.2, -1.0]).unwrap();
        let l = p.y_vector(&[0.3, -0.6, 0.9, -1.2]).unwrap();
        assert!(p.adjoint_consistency_error(&x, &d, &l) <= 1e-12);
        assert!(p.gradient_fd_error(&x, &d) <= 1e-8);
        let v = p.point(&[0.0; 5], &[0.0; 4]).unwrap();
        let e = p.x_vector(&[0.0, 1.0, 0.0, -1.0, 0.0]).unwrap();
        assert!(p.hessian_symmetry_error(&v, &d, &e) <= 1e-12);
    }
}
