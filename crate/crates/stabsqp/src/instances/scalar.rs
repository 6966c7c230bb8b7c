//! One-dimensional sanity instance: `min x^2/2  s.t.  x >= 1`.
//!
//! The unique solution is x = 1 with multiplier -1 (sign convention: the
//! stationarity residual is `f'(x) + G'(x)* lambda`, so the active lower
//! bound carries a nonpositive multiplier). Every quantity along the solve
//! is hand-checkable, which makes this the anchor for unit tests.

use nalgebra::DVector;

use crate::hilbert::{ConvexSet, InnerProductSpace};
use crate::problem::ProblemOracles;

pub fn make_scalar_toy() -> ProblemOracles {
    let xs = InnerProductSpace::euclidean(1);
    let ys = InnerProductSpace::euclidean(1);
    let set = ConvexSet::boxed(
        DVector::from_element(1, 1.0),
        DVector::from_element(1, f64::INFINITY),
    )
    .unwrap();

    let p = ProblemOracles::new(
        xs,
        ys,
        set,
        Box::new(|x| 0.5 * x[0] * x[0]),
        Box::new(|x| x.clone()),
        Box::new(|x| x.clone()),
        Box::new(|_x, d| d.clone()),
        Box::new(|_x, l| l.clone()),
        Some(Box::new(|_x, _l, d| d.clone())),
    )
    .unwrap();
    let reference = p.point(&[1.0], &[-1.0]).unwrap();
    p.with_reference(reference)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_point_is_kkt() {
        let p = make_scalar_toy();
        let v = p.reference_kkt().unwrap().clone();
        assert_eq!(p.sigma(&v).unwrap(), 0.0);
    }
}
