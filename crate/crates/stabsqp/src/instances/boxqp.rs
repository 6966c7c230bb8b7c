//! Dense box-constrained QP solver used only to compute reference solutions:
//! `min 1/2 x' P x - q' x  s.t.  l <= x <= u` with P symmetric positive
//! definite. Projected SOR sweeps localize the active set, then an
//! active-set polish solves the reduced system exactly and verifies the KKT
//! sign conditions. Deliberately independent of the SQP machinery so that
//! references cross-check the solver rather than echo it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const SOR_MAX_SWEEPS: usize = 20_000;
const SOR_TOL: f64 = 1e-11;
const POLISH_ROUNDS: usize = 200;
const KKT_TOL: f64 = 1e-10;

pub fn solve_box_qp(
    p: &DMatrix<f64>,
    q: &DVector<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n = p.nrows();
    if p.ncols() != n || q.len() != n || lower.len() != n || upper.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: q.len().max(lower.len()).max(upper.len()).max(p.ncols()),
        });
    }
    if (0..n).any(|i| !(p[(i, i)] > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }

    let clamp = |x: f64, i: usize| x.max(lower[i]).min(upper[i]);

    // Phase 1: projected SOR to localize the active set.
    let mut x = DVector::from_fn(n, |i, _| clamp(0.0, i));
    for _ in 0..SOR_MAX_SWEEPS {
        let mut change: f64 = 0.0;
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                if j != i {
                    s += p[(i, j)] * x[j];
                }
            }
            let xi = clamp((q[i] - s) / p[(i, i)], i);
            change = change.max((xi - x[i]).abs());
            x[i] = xi;
        }
        if change <= SOR_TOL * (1.0 + x.amax()) {
            break;
        }
    }

    // Phase 2: active-set polish with exact reduced solves.
    let mut at_lower: Vec<bool> = (0..n).map(|i| x[i] <= lower[i] + 1e-7).collect();
    let mut at_upper: Vec<bool> = (0..n)
        .map(|i| !at_lower[i] && x[i] >= upper[i] - 1e-7)
        .collect();
    for _ in 0..POLISH_ROUNDS {
        let free: Vec<usize> = (0..n).filter(|&i| !at_lower[i] && !at_upper[i]).collect();
        let mut xt = DVector::zeros(n);
        for i in 0..n {
            if at_lower[i] {
                xt[i] = lower[i];
            } else if at_upper[i] {
                xt[i] = upper[i];
            }
        }
        if !free.is_empty() {
            let nf = free.len();
            let mut pf = DMatrix::zeros(nf, nf);
            let mut rf = DVector::zeros(nf);
            for (a, &i) in free.iter().enumerate() {
                rf[a] = q[i];
                for j in 0..n {
                    if at_lower[j] || at_upper[j] {
                        rf[a] -= p[(i, j)] * xt[j];
                    }
                }
                for (b, &j) in free.iter().enumerate() {
                    pf[(a, b)] = p[(i, j)];
                }
            }
            let sol = pf
                .cholesky()
                .ok_or(Error::NotPositiveDefinite)?
                .solve(&rf);
            for (a, &i) in free.iter().enumerate() {
                xt[i] = sol[a];
            }
        }

        // KKT verification: free coordinates within bounds, bound
        // multipliers with the right signs.
        let grad = p * &xt - q;
        let scale = 1.0 + xt.amax() + grad.amax();
        let mut worst_violation = 0.0;
        let mut fix: Option<(usize, u8)> = None;
        for i in 0..n {
            if at_lower[i] && !(lower[i] == upper[i]) {
                // multiplier for an active lower bound must be >= 0
                if grad[i] < -KKT_TOL * scale && grad[i].abs() > worst_violation {
                    worst_violation = grad[i].abs();
                    fix = Some((i, 0)); // release to free
                }
            } else if at_upper[i] {
                if grad[i] > KKT_TOL * scale && grad[i].abs() > worst_violation {
                    worst_violation = grad[i].abs();
                    fix = Some((i, 0));
                }
            } else {
                if xt[i] < lower[i] - KKT_TOL * scale
                    && (lower[i] - xt[i]) > worst_violation
                {
                    worst_violation = lower[i] - xt[i];
                    fix = Some((i, 1)); // pin to lower
                }
                if xt[i] > upper[i] + KKT_TOL * scale
                    && (xt[i] - upper[i]) > worst_violation
                {
                    worst_violation = xt[i] - upper[i];
                    fix = Some((i, 2)); // pin to upper
                }
            }
        }
        match fix {
            None => return Ok(xt),
            Some((i, 0)) => {
                at_lower[i] = false;
                at_upper[i] = false;
            }
            Some((i, 1)) => {
                at_lower[i] = true;
                at_upper[i] = false;
            }
            Some((i, _)) => {
                at_lower[i] = false;
                at_upper[i] = true;
            }
        }
    }
    Err(Error::InsufficientData)
}
