//! Degenerate equality-constrained instance with non-unique multipliers:
//! `min 1/2 ||x||^2 - x_1  s.t.  c(x) = 0 and c(x) + c(x)^2 = 0` where
//! `c(x) = x_1 - 1`. Both constraints cut out the same manifold and their
//! gradients are parallel at the solution, so the multiplier set is the whole
//! line `l1 + l2 = 0` and the constraint Jacobian never has full row rank
//! there. Away from the solution the two linearizations are inconsistent,
//! which defeats ordinary SQP while the stabilized subproblem stays feasible.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::hilbert::{ConvexSet, InnerProductSpace};
use crate::problem::ProblemOracles;

pub fn make_redundant_equality(n: usize) -> Result<ProblemOracles> {
    if n < 2 {
        return Err(Error::BadGrid(n));
    }
    let xs = InnerProductSpace::euclidean(n);
    let ys = InnerProductSpace::euclidean(2);
    let set = ConvexSet::zero(2);

    let p = ProblemOracles::new(
        xs,
        ys,
        set,
        Box::new(|x| 0.5 * x.dot(x) - x[0]),
        Box::new(|x| {
            let mut g = x.clone();
            g[0] -= 1.0;
            g
        }),
        Box::new(|x| {
            let c = x[0] - 1.0;
            DVector::from_vec(vec![c, c + c * c])
        }),
        Box::new(|x, d| {
            let c = x[0] - 1.0;
            DVector::from_vec(vec![d[0], (1.0 + 2.0 * c) * d[0]])
        }),
        Box::new(move |x, l| {
            let c = x[0] - 1.0;
            let mut out = DVector::zeros(n);
            out[0] = l[0] + (1.0 + 2.0 * c) * l[1];
            out
        }),
        Some(Box::new(move |_, l, d| {
            let mut out = d.clone();
            out[0] += 2.0 * l[1] * d[0];
            out
        })),
    )?;
    let mut xbar = vec![0.0; n];
    xbar[0] = 1.0;
    let reference = p.point(&xbar, &[0.0, 0.0])?;
    Ok(p.with_reference(reference))
}
