//! The stabilized SQP subproblem P(v), its ordinary-SQP counterpart P0(v),
//! and an active-set enumeration oracle for small instances.
//!
//! P(v) minimizes `<f'(x), d> + 1/2 <L_xx(v) d, d> + sigma(v)/2 ||mu||^2`
//! subject to `G(x) + G'(x) d - sigma(v) (mu - lambda) in K`. Its KKT system
//! is solved as a projected residual map by semismooth Newton: for box-like
//! sets the generalized derivative of the projection is a diagonal 0/1
//! active-mask operator, so Newton is locally exact on the piecewise-linear
//! system. The ordinary subproblem is the sigma = 0 specialization plus a
//! phase-1 feasibility check (its linearized constraint set can be empty).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hilbert::Vector;
use crate::problem::{PrimalDualPoint, ProblemOracles};

/// Outcome classification of a subproblem solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubStatus {
    Converged,
    MaxIter,
    Singular,
    Infeasible,
}

impl SubStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SubStatus::Converged => "converged",
            SubStatus::MaxIter => "max_iter",
            SubStatus::Singular => "singular",
            SubStatus::Infeasible => "infeasible",
        }
    }
}

/// Solution (or best effort) for a subproblem solve.
#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub d: Vector,
    pub mu: Vector,
    /// Constraint multiplier estimate; stationarity in mu of P(v) forces
    /// rho = mu exactly, reported separately for diagnostics.
    pub rho: Vector,
    pub residual: f64,
    pub iterations: usize,
    pub hit_ball: bool,
    pub status: SubStatus,
}

const NEWTON_MAX_ITER: usize = 100;
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-12;
const REGULARIZATION_LADDER: [f64; 4] = [0.0, 1e-8, 1e-6, 1e-4];
const PHASE1_TOL: f64 = 1e-6;

/// The stabilized subproblem P(v), with optional safeguard ball radius `nu`
/// (the localized variant) and target residual tolerance `epsilon`.
pub struct StabilizedSubproblem<'a> {
    oracles: &'a ProblemOracles,
    v: PrimalDualPoint,
    sigma_v: f64,
    nu: Option<f64>,
    epsilon: f64,
    data: SubproblemData,
}

/// Dense coordinate data assembled once per subproblem.
struct SubproblemData {
    gx: DVector<f64>,
    grad_f: DVector<f64>,
    /// m x n, d -> G'(x) d.
    amat: DMatrix<f64>,
    /// n x m, lambda -> G'(x)* lambda (Riesz form).
    bmat: DMatrix<f64>,
    /// n x n, d -> L_xx(v) d (Riesz form).
    hmat: DMatrix<f64>,
}

impl<'a> StabilizedSubproblem<'a> {
    /// Builds P(v). Rejected at KKT points where sigma(v) = 0.
    pub fn new(
        oracles: &'a ProblemOracles,
        v: PrimalDualPoint,
        epsilon: f64,
        nu: Option<f64>,
    ) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidOption(format!(
                "epsilon must be nonnegative, got {epsilon}"
            )));
        }
        if let Some(nu) = nu {
            if !(nu > 0.0) {
                return Err(Error::InvalidOption(format!(
                    "safeguard radius must be positive, got {nu}"
                )));
            }
        }
        let sigma_v = oracles.sigma(&v)?;
        if sigma_v == 0.0 {
            return Err(Error::AtKktPoint);
        }
        let data = SubproblemData::assemble(oracles, &v);
        Ok(Self {
            oracles,
            v,
            sigma_v,
            nu,
            epsilon,
            data,
        })
    }

    pub fn sigma_v(&self) -> f64 {
        self.sigma_v
    }

    pub fn point(&self) -> &PrimalDualPoint {
        &self.v
    }

    /// The always-feasible starting pair
    /// `d = 0, mu = (1/sigma) G(x) + lambda - (1/sigma) P_K(G(x) + sigma lambda)`;
    /// the constraint value then equals `P_K(G(x) + sigma lambda) in K`.
    pub fn feasible_init(&self) -> Result<(Vector, Vector)> {
        let gx = self.oracles.y_vector(self.data.gx.as_slice())?;
        let shifted = gx.axpy(self.sigma_v, &self.v.lambda);
        let proj = self.oracles.constraint_set().project(&shifted)?;
        let mu = (&(&gx - &proj) * (1.0 / self.sigma_v)).axpy(1.0, &self.v.lambda);
        Ok((Vector::zeros(self.oracles.x_space().clone()), mu))
    }

    /// The projected KKT residual map of P(v):
    /// `F1 = f'(x) + L_xx(v) d + G'(x)* mu`,
    /// `F2 = w - P_K(w + mu)` with `w = G(x) + G'(x) d - sigma (mu - lambda)`.
    /// (d, mu) is a KKT point of P(v) iff the residual vanishes.
    pub fn kkt_residual_map(&self, d: &Vector, mu: &Vector) -> Result<(Vector, Vector)> {
        let (f1, f2) = residual_coords(
            self.oracles,
            &self.data,
            self.sigma_v,
            self.v.lambda.coords(),
            d.coords(),
            mu.coords(),
        )?;
        Ok((
            self.oracles.x_vector(f1.as_slice())?,
            self.oracles.y_vector(f2.as_slice())?,
        ))
    }

    /// Residual norm `||F1||_X + ||F2||_Y`.
    pub fn residual_norm(&self, d: &Vector, mu: &Vector) -> Result<f64> {
        let (f1, f2) = self.kkt_residual_map(d, mu)?;
        Ok(f1.norm() + f2.norm())
    }

    /// Semismooth Newton on the projected KKT residual, globalized by
    /// backtracking on `1/2 ||F||^2` and restarted through a Tikhonov
    /// regularization ladder on line-search stalls.
    pub fn solve(&self) -> Result<SubproblemSolution> {
        let (d0, mu0) = self.feasible_init()?;
        let out = newton_solve(
            self.oracles,
            &self.data,
            self.sigma_v,
            self.v.lambda.coords(),
            d0.coords(),
            mu0.coords(),
            self.epsilon,
        )?;
        Ok(self.finish(out))
    }

    fn finish(&self, out: NewtonOutcome) -> SubproblemSolution {
        let d = Vector::new(self.oracles.x_space().clone(), out.d)
            .expect("newton iterate stays finite");
        let mu = Vector::new(self.oracles.y_space().clone(), out.mu)
            .expect("newton iterate stays finite");
        let hit_ball = match self.nu {
            Some(nu) => d.norm() >= 0.999 * nu,
            None => false,
        };
        SubproblemSolution {
            rho: mu.clone(),
            d,
            mu,
            residual: out.residual,
            iterations: out.iterations,
            hit_ball,
            status: out.status,
        }
    }

    /// Independent verification oracle: enumerates all active sets of a
    /// box-like K (total dimension <= 12), solves each equality-constrained
    /// KKT system of P(v), filters by multiplier signs and feasibility, and
    /// returns the feasible stationary point with the lowest objective.
    pub fn brute_force_oracle(&self) -> Result<SubproblemSolution> {
        let set = self.oracles.constraint_set();
        let (lower, upper) = set.box_bounds().ok_or(Error::UnsupportedSet)?;
        let m = lower.len();
        if m > 12 {
            return Err(Error::TooLarge(m));
        }
        let n = self.oracles.x_space().dim();
        let data = &self.data;
        let sigma = self.sigma_v;
        let lambda = self.v.lambda.coords();

        #[derive(Clone, Copy, PartialEq)]
        enum St {
            Inactive,
            AtLower,
            AtUpper,
        }
        let mut states: Vec<Vec<St>> = Vec::with_capacity(m);
        for i in 0..m {
            if lower[i] == upper[i] {
                states.push(vec![St::AtLower]); // equality coordinate
            } else {
                let mut s = vec![St::Inactive];
                if lower[i].is_finite() {
                    s.push(St::AtLower);
                }
                if upper[i].is_finite() {
                    s.push(St::AtUpper);
                }
                states.push(s);
            }
        }

        let tol = 1e-9;
        let mut best: Option<(f64, DVector<f64>, DVector<f64>)> = None;
        let mut any_nonsingular = false;

        // odometer over the per-coordinate state lists
        let mut idx = vec![0usize; m];
        'outer: loop {
            let assignment: Vec<St> = (0..m).map(|i| states[i][idx[i]]).collect();
            let active: Vec<usize> = (0..m)
                .filter(|&i| assignment[i] != St::Inactive)
                .collect();
            let a = active.len();

            // unknowns: d (n), mu on active coordinates (a)
            let mut sys = DMatrix::zeros(n + a, n + a);
            let mut rhs = DVector::zeros(n + a);
            sys.view_mut((0, 0), (n, n)).copy_from(&data.hmat);
            for (j, &i) in active.iter().enumerate() {
                sys.view_mut((0, n + j), (n, 1)).copy_from(&data.bmat.column(i));
                for k in 0..n {
                    sys[(n + j, k)] = data.amat[(i, k)];
                }
                sys[(n + j, n + j)] = -sigma;
                let b_i = match assignment[i] {
                    St::AtLower => lower[i],
                    St::AtUpper => upper[i],
                    St::Inactive => unreachable!(),
                };
                rhs[n + j] = b_i - data.gx[i] - sigma * lambda[i];
            }
            for k in 0..n {
                rhs[k] = -data.grad_f[k];
            }

            let lu = sys.full_piv_lu();
            if let Some(sol) = lu.solve(&rhs) {
                if sol.iter().all(|x| x.is_finite()) {
                    any_nonsingular = true;
                    let d = DVector::from_iterator(n, sol.iter().take(n).copied());
                    let mut mu = DVector::zeros(m);
                    for (j, &i) in active.iter().enumerate() {
                        mu[i] = sol[n + j];
                    }
                    if self.candidate_ok(&lower, &upper, &d, &mu, tol) {
                        let q = self.objective(&d, &mu);
                        if best.as_ref().is_none_or(|(bq, _, _)| q < *bq) {
                            best = Some((q, d, mu));
                        }
                    }
                }
            }

            // advance odometer
            let mut i = 0;
            loop {
                if i == m {
                    break 'outer;
                }
                idx[i] += 1;
                if idx[i] < states[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
        let _ = any_nonsingular;

        match best {
            Some((_, d, mu)) => {
                let dv = self.oracles.x_vector(d.as_slice())?;
                let muv = self.oracles.y_vector(mu.as_slice())?;
                let residual = self.residual_norm(&dv, &muv)?;
                let hit_ball = match self.nu {
                    Some(nu) => dv.norm() >= 0.999 * nu,
                    None => false,
                };
                Ok(SubproblemSolution {
                    rho: muv.clone(),
                    d: dv,
                    mu: muv,
                    residual,
                    iterations: 0,
                    hit_ball,
                    status: SubStatus::Converged,
                })
            }
            None => {
                let (d0, mu0) = self.feasible_init()?;
                let residual = self.residual_norm(&d0, &mu0)?;
                Ok(SubproblemSolution {
                    rho: mu0.clone(),
                    d: d0,
                    mu: mu0,
                    residual,
                    iterations: 0,
                    hit_ball: false,
                    status: SubStatus::Singular,
                })
            }
        }
    }

    fn candidate_ok(
        &self,
        lower: &DVector<f64>,
        upper: &DVector<f64>,
        d: &DVector<f64>,
        mu: &DVector<f64>,
        tol: f64,
    ) -> bool {
        // w = G(x) + G'(x)d - sigma (mu - lambda)
        let lambda = self.v.lambda.coords();
        let w = &self.data.gx + &self.data.amat * d - self.sigma_v * (mu - lambda);
        let scale = 1.0 + w.amax();
        for i in 0..lower.len() {
            // feasibility for every coordinate
            if w[i] < lower[i] - tol * scale || w[i] > upper[i] + tol * scale {
                return false;
            }
            if lower[i] == upper[i] {
                continue; // equality coordinate: multiplier sign free
            }
            // sign conditions from the normal cone of the box
            if mu[i] < -tol && (w[i] - lower[i]).abs() > tol * scale {
                return false;
            }
            if mu[i] > tol && (upper[i] - w[i]).abs() > tol * scale {
                return false;
            }
        }
        true
    }

    /// Objective of P(v) at (d, mu):
    /// `<f'(x), d> + 1/2 <L_xx(v) d, d> + sigma(v)/2 ||mu||^2`.
    pub fn objective_at(&self, d: &Vector, mu: &Vector) -> f64 {
        self.objective(d.coords(), mu.coords())
    }

    fn objective(&self, d: &DVector<f64>, mu: &DVector<f64>) -> f64 {
        let xs = self.oracles.x_space();
        let ys = self.oracles.y_space();
        let hd = &self.data.hmat * d;
        xs.inner(&self.data.grad_f, d)
            + 0.5 * xs.inner(&hd, d)
            + 0.5 * self.sigma_v * ys.inner(mu, mu)
    }
}

impl SubproblemData {
    fn assemble(oracles: &ProblemOracles, v: &PrimalDualPoint) -> Self {
        let n = oracles.x_space().dim();
        let m = oracles.y_space().dim();
        let gx = oracles.g_at(&v.x).into_coords();
        let grad_f = oracles.grad_f_at(&v.x).into_coords();

        let mut amat = DMatrix::zeros(m, n);
        let mut hmat = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            let ev = Vector::new(oracles.x_space().clone(), e).unwrap();
            amat.set_column(j, &oracles.jac_apply_at(&v.x, &ev).into_coords());
            hmat.set_column(j, &oracles.hess_l_apply_at(v, &ev).into_coords());
        }
        let mut bmat = DMatrix::zeros(n, m);
        for j in 0..m {
            let mut e = DVector::zeros(m);
            e[j] = 1.0;
            let ev = Vector::new(oracles.y_space().clone(), e).unwrap();
            bmat.set_column(j, &oracles.jac_adjoint_at(&v.x, &ev).into_coords());
        }
        Self {
            gx,
            grad_f,
            amat,
            bmat,
            hmat,
        }
    }
}

fn residual_coords(
    oracles: &ProblemOracles,
    data: &SubproblemData,
    sigma: f64,
    lambda: &DVector<f64>,
    d: &DVector<f64>,
    mu: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = oracles.x_space().dim();
    let m = oracles.y_space().dim();
    if d.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: d.len(),
        });
    }
    if mu.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: mu.len(),
        });
    }
    let f1 = &data.grad_f + &data.hmat * d + &data.bmat * mu;
    let w = &data.gx + &data.amat * d - sigma * (mu - lambda);
    let wv = oracles.y_vector(w.as_slice())?;
    let muv = oracles.y_vector(mu.as_slice())?;
    let proj = oracles.constraint_set().project(&(&wv + &muv))?;
    let f2 = &w - proj.coords();
    Ok((f1, f2))
}

struct NewtonOutcome {
    d: DVector<f64>,
    mu: DVector<f64>,
    residual: f64,
    iterations: usize,
    status: SubStatus,
}

/// Shared semismooth Newton core for P(v) (sigma > 0) and P0(v) (sigma = 0).
fn newton_solve(
    oracles: &ProblemOracles,
    data: &SubproblemData,
    sigma: f64,
    lambda: &DVector<f64>,
    d0: &DVector<f64>,
    mu0: &DVector<f64>,
    epsilon: f64,
) -> Result<NewtonOutcome> {
    let set = oracles.constraint_set();
    if !set.is_box_like() {
        return Err(Error::UnsupportedSet);
    }
    let xs = oracles.x_space();
    let ys = oracles.y_space();
    let n = xs.dim();
    let m = ys.dim();

    let res_pair = |d: &DVector<f64>, mu: &DVector<f64>| -> Result<(f64, f64)> {
        let (f1, f2) = residual_coords(oracles, data, sigma, lambda, d, mu)?;
        let nx = xs.norm(&f1);
        let ny = ys.norm(&f2);
        Ok((nx + ny, 0.5 * (nx * nx + ny * ny)))
    };

    let mut best: Option<NewtonOutcome> = None;
    let mut saw_singular = false;

    for &tau in &REGULARIZATION_LADDER {
        let mut d = d0.clone();
        let mut mu = mu0.clone();
        let (mut res, mut theta) = res_pair(&d, &mu)?;
        let mut iterations = 0;
        let mut failed = false;

        while iterations < NEWTON_MAX_ITER {
            if res <= epsilon {
                return Ok(NewtonOutcome {
                    d,
                    mu,
                    residual: res,
                    iterations,
                    status: SubStatus::Converged,
                });
            }
            // active mask at w + mu
            let w = &data.gx + &data.amat * &d - sigma * (&mu - lambda);
            let s = &w + &mu;
            let mask = set.projection_mask(&s)?;

            let mut jac = DMatrix::zeros(n + m, n + m);
            jac.view_mut((0, 0), (n, n)).copy_from(&data.hmat);
            for k in 0..n {
                jac[(k, k)] += tau;
            }
            jac.view_mut((0, n), (n, m)).copy_from(&data.bmat);
            for i in 0..m {
                let inactive = mask[i];
                for k in 0..n {
                    jac[(n + i, k)] = (1.0 - inactive) * data.amat[(i, k)];
                }
                jac[(n + i, n + i)] = -inactive - (1.0 - inactive) * sigma;
            }

            let (f1, f2) = residual_coords(oracles, data, sigma, lambda, &d, &mu)?;
            let mut rhs = DVector::zeros(n + m);
            rhs.rows_mut(0, n).copy_from(&(-&f1));
            rhs.rows_mut(n, m).copy_from(&(-&f2));

            let lu = jac.clone().full_piv_lu();
            let step = match lu.solve(&rhs) {
                Some(p) if p.iter().all(|x| x.is_finite()) => {
                    // guard against a numerically rank-deficient factorization
                    let lin_res = (&jac * &p - &rhs).norm();
                    if lin_res > 1e-6 * (1.0 + rhs.norm()) {
                        saw_singular = true;
                        failed = true;
                        break;
                    }
                    p
                }
                _ => {
                    saw_singular = true;
                    failed = true;
                    break;
                }
            };

            // Armijo backtracking on 1/2 ||F||^2
            let pd = DVector::from_iterator(n, step.iter().take(n).copied());
            let pmu = DVector::from_iterator(m, step.iter().skip(n).copied());
            let mut t = 1.0;
            let mut accepted = false;
            while t >= MIN_STEP {
                let dt = &d + t * &pd;
                let mt = &mu + t * &pmu;
                let (rt, tt) = res_pair(&dt, &mt)?;
                if tt <= (1.0 - 2.0 * ARMIJO * t) * theta {
                    d = dt;
                    mu = mt;
                    res = rt;
                    theta = tt;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            iterations += 1;
            if !accepted {
                failed = true;
                break;
            }
        }

        let status = if failed {
            if saw_singular {
                SubStatus::Singular
            } else {
                SubStatus::MaxIter
            }
        } else if res <= epsilon {
            return Ok(NewtonOutcome {
                d,
                mu,
                residual: res,
                iterations,
                status: SubStatus::Converged,
            });
        } else {
            SubStatus::MaxIter
        };
        let candidate = NewtonOutcome {
            d,
            mu,
            residual: res,
            iterations,
            status,
        };
        if best.as_ref().is_none_or(|b| candidate.residual < b.residual) {
            best = Some(candidate);
        }
    }

    let mut out = best.expect("ladder ran at least once");
    if saw_singular && out.status != SubStatus::Converged {
        out.status = SubStatus::Singular;
    }
    Ok(out)
}

/// Ordinary (Josephy-Newton / standard SQP) subproblem P0(v): same quadratic
/// model, constraint `G(x) + G'(x) d in K`, no multiplier regularization.
/// Returns `Infeasible` when a phase-1 Gauss-Newton minimization of
/// `dist(G(x) + G'(x) d, K)^2` stalls above tolerance.
pub fn solve_ordinary(
    oracles: &ProblemOracles,
    v: &PrimalDualPoint,
    epsilon: f64,
) -> Result<SubproblemSolution> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidOption(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let data = SubproblemData::assemble(oracles, v);
    let set = oracles.constraint_set();
    if !set.is_box_like() {
        return Err(Error::UnsupportedSet);
    }

    let (d_feas, feas_dist) = phase1(oracles, &data)?;
    let make = |out: NewtonOutcome| -> SubproblemSolution {
        let d = Vector::new(oracles.x_space().clone(), out.d).expect("finite iterate");
        let mu = Vector::new(oracles.y_space().clone(), out.mu).expect("finite iterate");
        SubproblemSolution {
            rho: mu.clone(),
            d,
            mu,
            residual: out.residual,
            iterations: out.iterations,
            hit_ball: false,
            status: out.status,
        }
    };
    if feas_dist > PHASE1_TOL {
        let out = NewtonOutcome {
            d: d_feas,
            mu: v.lambda.coords().clone(),
            residual: f64::INFINITY,
            iterations: 0,
            status: SubStatus::Infeasible,
        };
        return Ok(make(out));
    }

    let out = newton_solve(
        oracles,
        &data,
        0.0,
        v.lambda.coords(),
        &d_feas,
        v.lambda.coords(),
        epsilon,
    )?;
    Ok(make(out))
}

/// Gauss-Newton minimization of `1/2 dist^2(G(x) + G'(x) d, K)`.
/// Returns the best direction found and the achieved distance.
fn phase1(oracles: &ProblemOracles, data: &SubproblemData) -> Result<(DVector<f64>, f64)> {
    let set = oracles.constraint_set();
    let ys = oracles.y_space();
    let n = oracles.x_space().dim();
    let mut d = DVector::zeros(n);

    let dist_at = |d: &DVector<f64>| -> Result<(f64, DVector<f64>)> {
        let w = &data.gx + &data.amat * d;
        let wv = oracles.y_vector(w.as_slice())?;
        let p = set.project(&wv)?;
        let r = &w - p.coords();
        Ok((ys.norm(&r), r))
    };

    let (mut dist, mut r) = dist_at(&d)?;
    for _ in 0..100 {
        if dist <= 1e-12 {
            break;
        }
        let w = &data.gx + &data.amat * &d;
        let mask = set.projection_mask(&w)?;
        let myr = ys.apply_gram(&r);
        let grad = data.amat.transpose() * &myr;
        if grad.norm() <= 1e-14 * (1.0 + dist) {
            break; // stationary: linearization genuinely infeasible
        }
        // Gauss-Newton matrix A' M (I - D) A + reg
        let mut gn = DMatrix::zeros(n, n);
        for i in 0..mask.len() {
            if mask[i] == 0.0 {
                let wi = ys.diagonal_weights().map_or(1.0, |dw| dw[i]);
                let row = data.amat.row(i);
                for a in 0..n {
                    for b in 0..n {
                        gn[(a, b)] += wi * row[a] * row[b];
                    }
                }
            }
        }
        for k in 0..n {
            gn[(k, k)] += 1e-10;
        }
        let step = match gn.full_piv_lu().solve(&(-&grad)) {
            Some(s) if s.iter().all(|x| x.is_finite()) => s,
            _ => break,
        };
        let mut t = 1.0;
        let mut improved = false;
        while t >= MIN_STEP {
            let dt = &d + t * &step;
            let (dist_t, r_t) = dist_at(&dt)?;
            if dist_t < dist * (1.0 - 1e-8) {
                d = dt;
                dist = dist_t;
                r = r_t;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok((d, dist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::make_scalar_toy;
    use approx::assert_abs_diff_eq;

    fn toy_sub(
        oracles: &ProblemOracles,
        x: f64,
        l: f64,
        eps: f64,
    ) -> StabilizedSubproblem<'_> {
        let v = oracles.point(&[x], &[l]).unwrap();
        StabilizedSubproblem::new(oracles, v, eps, None).unwrap()
    }

    #[test]
    fn rejects_kkt_points() {
        let p = make_scalar_toy();
        let v = p.point(&[1.0], &[-1.0]).unwrap();
        assert!(matches!(
            StabilizedSubproblem::new(&p, v, 1e-8, None),
            Err(Error::AtKktPoint)
        ));
    }

    #[test]
    fn feasible_init_hand_values() {
        // v = (2, -1), sigma = 2: G + sigma*lambda = 0, P_K = 1,
        // mu = (2 - 1)/2 - 1 = -0.5, constraint value 2 - 2(-0.5 + 1) = 1 in K.
        let p = make_scalar_toy();
        let sub = toy_sub(&p, 2.0, -1.0, 1e-10);
        assert_abs_diff_eq!(sub.sigma_v(), 2.0, epsilon = 1e-15);
        let (d, mu) = sub.feasible_init().unwrap();
        assert_eq!(d.coords()[0], 0.0);
        assert_abs_diff_eq!(mu.coords()[0], -0.5, epsilon = 1e-14);
        let w = 2.0 + 0.0 - 2.0 * (mu.coords()[0] - (-1.0));
        assert_abs_diff_eq!(w, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn residual_map_vanishes_at_hand_solution() {
        // candidate (d, mu) = (-1, -1): F1 = 2 - 1 - 1 = 0;
        // w = 2 - 1 - 2(-1 + 1) = 1, w + mu = 0, P_K(0) = 1, F2 = 0.
        let p = make_scalar_toy();
        let sub = toy_sub(&p, 2.0, -1.0, 1e-10);
        let d = p.x_vector(&[-1.0]).unwrap();
        let mu = p.y_vector(&[-1.0]).unwrap();
        assert!(sub.residual_norm(&d, &mu).unwrap() <= 1e-14);
    }

    #[test]
    fn newton_solves_scalar_subproblem() {
        let p = make_scalar_toy();
        let sub = toy_sub(&p, 2.0, -1.0, 1e-12);
        let sol = sub.solve().unwrap();
        assert_eq!(sol.status, SubStatus::Converged);
        assert_abs_diff_eq!(sol.d.coords()[0], -1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(sol.mu.coords()[0], -1.0, epsilon = 1e-10);
        // rho = mu exactly on converged output
        assert_eq!(sol.rho.coords()[0], sol.mu.coords()[0]);
    }

    #[test]
    fn oracle_matches_hand_solution() {
        let p = make_scalar_toy();
        let sub = toy_sub(&p, 2.0, -1.0, 1e-12);
        let sol = sub.brute_force_oracle().unwrap();
        assert_eq!(sol.status, SubStatus::Converged);
        assert_abs_diff_eq!(sol.d.coords()[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.mu.coords()[0], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn ordinary_subproblem_scalar() {
        let p = make_scalar_toy();
        let v = p.point(&[2.0], &[-1.0]).unwrap();
        let sol = solve_ordinary(&p, &v, 1e-12).unwrap();
        assert_eq!(sol.status, SubStatus::Converged);
        assert_abs_diff_eq!(sol.d.coords()[0], -1.0, epsilon = 1e-10);
        assert!(sol.mu.coords()[0] <= 1e-10);
    }

    #[test]
    fn stabilized_constraint_feasible_at_solution() {
        let p = make_scalar_toy();
        let sub = toy_sub(&p, 1.7, -0.4, 1e-11);
        let sol = sub.solve().unwrap();
        assert_eq!(sol.status, SubStatus::Converged);
        let w = p
            .g_at(&sub.point().x)
            .axpy(1.0, &p.jac_apply_at(&sub.point().x, &sol.d))
            .axpy(-sub.sigma_v(), &(&sol.mu - &sub.point().lambda));
        assert!(p.constraint_set().dist(&w).unwrap() <= 10.0 * 1e-11);
    }
}
