//! Outer iteration for the stabilized and ordinary SQP methods, iteration
//! traces with deterministic CSV/JSON serialization, convergence-rate
//! estimation, and seeded perturbation of primal-dual points.

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::problem::{PrimalDualPoint, ProblemOracles};
use crate::subproblem::{solve_ordinary, StabilizedSubproblem, SubStatus};

/// Outer-loop configuration. The subproblem tolerance at iterate v is
/// `clamp(sigma(v)^subproblem_power, epsilon_floor, epsilon_cap)`, tying
/// inner accuracy to the outer KKT residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Stop when `sigma(v) <= tol_kkt * (1 + ||v||)`.
    pub tol_kkt: f64,
    pub max_outer: usize,
    /// Exponent p in the inner tolerance `sigma^p`.
    pub subproblem_power: f64,
    pub epsilon_cap: f64,
    pub epsilon_floor: f64,
    /// Diagnostic trust radius: steps with `||d|| >= 0.999 nu` set a flag on
    /// the subproblem solution but are never truncated.
    pub ball_nu: Option<f64>,
    /// Populate wall_ms in traces. Off by default so that repeated runs are
    /// bit-identical.
    pub record_timing: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_kkt: 1e-10,
            max_outer: 50,
            subproblem_power: 6.0,
            epsilon_cap: 1e-2,
            epsilon_floor: 1e-14,
            ball_nu: None,
            record_timing: false,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol_kkt > 0.0) {
            return Err(Error::InvalidOption(format!(
                "tol_kkt must be positive, got {}",
                self.tol_kkt
            )));
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidOption("max_outer must be positive".into()));
        }
        if !(self.subproblem_power > 0.0) {
            return Err(Error::InvalidOption(format!(
                "subproblem_power must be positive, got {}",
                self.subproblem_power
            )));
        }
        if !(self.epsilon_floor > 0.0 && self.epsilon_cap >= self.epsilon_floor) {
            return Err(Error::InvalidOption(
                "need 0 < epsilon_floor <= epsilon_cap".into(),
            ));
        }
        if let Some(nu) = self.ball_nu {
            if !(nu > 0.0) {
                return Err(Error::InvalidOption(format!(
                    "ball_nu must be positive, got {nu}"
                )));
            }
        }
        Ok(())
    }

    fn epsilon_for(&self, sigma: f64) -> f64 {
        sigma
            .powf(self.subproblem_power)
            .clamp(self.epsilon_floor, self.epsilon_cap)
    }
}

/// Terminal status of an outer solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    KktReached,
    MaxOuter,
    SubproblemFailure,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::KktReached => "kkt_reached",
            SolveStatus::MaxOuter => "max_outer",
            SolveStatus::SubproblemFailure => "subproblem_failure",
        }
    }
}

/// One outer iteration. The terminal record (where the stopping test fired
/// or the run was cut off) has no subproblem fields and zero step norms.
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    pub sigma: f64,
    /// `||d||_X + ||mu - lambda||_Y`, the full primal-dual step.
    pub step_norm: f64,
    pub d_norm: f64,
    pub mu_step_norm: f64,
    pub sub_residual: Option<f64>,
    pub sub_iters: Option<usize>,
    pub sub_status: Option<String>,
    /// Distance to the instance reference point, when one is known.
    pub err_to_ref: Option<f64>,
    pub wall_ms: f64,
}

/// Full record of one outer solve.
#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub status: SolveStatus,
    pub iterations: Vec<IterationRecord>,
    pub final_point: PrimalDualPoint,
    pub final_sigma: f64,
    pub hit_ball: bool,
}

const CSV_HEADER: &str =
    "k,sigma,step_norm,d_norm,mu_step_norm,sub_residual,sub_iters,sub_status,err_to_ref,wall_ms";

impl SolveTrace {
    /// Deterministic CSV rendering with a fixed column order. Floats use the
    /// shortest round-trip representation; absent fields are empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.iterations {
            let opt_f = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v}"));
            let opt_u = |x: Option<usize>| x.map_or(String::new(), |v| format!("{v}"));
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.k,
                r.sigma,
                r.step_norm,
                r.d_norm,
                r.mu_step_norm,
                opt_f(r.sub_residual),
                opt_u(r.sub_iters),
                r.sub_status.clone().unwrap_or_default(),
                opt_f(r.err_to_ref),
                r.wall_ms,
            ));
        }
        out
    }

    /// JSON rendering mirroring the CSV content, plus the terminal point and
    /// the options used.
    pub fn to_json(&self, options: &SolverOptions) -> serde_json::Value {
        json!({
            "status": self.status.as_str(),
            "final_sigma": self.final_sigma,
            "final_x": self.final_point.x.coords().as_slice(),
            "final_lambda": self.final_point.lambda.coords().as_slice(),
            "hit_ball": self.hit_ball,
            "iterations": self.iterations,
            "options": options,
        })
    }

    /// Error sequence for rate estimation: distance to the reference point
    /// when every record carries one, otherwise the KKT residual sigma as a
    /// proxy (both vanish at the same rate near a regular solution).
    pub fn error_sequence(&self) -> Vec<f64> {
        if self.iterations.iter().all(|r| r.err_to_ref.is_some()) {
            self.iterations
                .iter()
                .map(|r| r.err_to_ref.unwrap())
                .collect()
        } else {
            self.iterations.iter().map(|r| r.sigma).collect()
        }
    }
}

fn now_ms(enabled: bool) -> Option<std::time::Instant> {
    enabled.then(std::time::Instant::now)
}

fn elapsed_ms(start: Option<std::time::Instant>) -> f64 {
    start.map_or(0.0, |t| t.elapsed().as_secs_f64() * 1e3)
}

/// Stabilized SQP: at each iterate solve P(v) inexactly to tolerance
/// `sigma(v)^p` and take the unit step `v <- v + (d, mu - lambda)`.
pub fn run_stabilized_sqp(
    oracles: &ProblemOracles,
    start: &PrimalDualPoint,
    options: &SolverOptions,
) -> Result<SolveTrace> {
    options.validate()?;
    let reference = oracles.reference_kkt();
    let mut v = start.clone();
    let mut iterations = Vec::new();
    let mut hit_ball = false;
    let mut status = SolveStatus::MaxOuter;
    let mut sigma = oracles.sigma(&v)?;

    for k in 0..=options.max_outer {
        let err = reference.map(|r| v.dist(r));
        if sigma <= options.tol_kkt * (1.0 + v.norm()) {
            iterations.push(terminal_record(k, sigma, err));
            status = SolveStatus::KktReached;
            break;
        }
        if k == options.max_outer {
            iterations.push(terminal_record(k, sigma, err));
            status = SolveStatus::MaxOuter;
            break;
        }
        let timer = now_ms(options.record_timing);
        let sub = StabilizedSubproblem::new(
            oracles,
            v.clone(),
            options.epsilon_for(sigma),
            options.ball_nu,
        )?;
        let sol = sub.solve()?;
        hit_ball |= sol.hit_ball;
        let mu_step = &sol.mu - &v.lambda;
        let d_norm = sol.d.norm();
        let mu_step_norm = mu_step.norm();
        iterations.push(IterationRecord {
            k,
            sigma,
            step_norm: d_norm + mu_step_norm,
            d_norm,
            mu_step_norm,
            sub_residual: Some(sol.residual),
            sub_iters: Some(sol.iterations),
            sub_status: Some(sol.status.as_str().to_string()),
            err_to_ref: err,
            wall_ms: elapsed_ms(timer),
        });
        if sol.status != SubStatus::Converged {
            status = SolveStatus::SubproblemFailure;
            break;
        }
        v = PrimalDualPoint::new(v.x.axpy(1.0, &sol.d), sol.mu);
        sigma = oracles.sigma(&v)?;
    }

    Ok(SolveTrace {
        status,
        iterations,
        final_sigma: sigma,
        final_point: v,
        hit_ball,
    })
}

/// Ordinary SQP baseline: same outer loop with the unstabilized subproblem
/// P0(v). Fails with `subproblem_failure` when the linearized constraints
/// are infeasible or the inner Newton breaks down.
pub fn run_ordinary_sqp(
    oracles: &ProblemOracles,
    start: &PrimalDualPoint,
    options: &SolverOptions,
) -> Result<SolveTrace> {
    options.validate()?;
    let reference = oracles.reference_kkt();
    let mut v = start.clone();
    let mut iterations = Vec::new();
    let mut status = SolveStatus::MaxOuter;
    let mut sigma = oracles.sigma(&v)?;

    for k in 0..=options.max_outer {
        let err = reference.map(|r| v.dist(r));
        if sigma <= options.tol_kkt * (1.0 + v.norm()) {
            iterations.push(terminal_record(k, sigma, err));
            status = SolveStatus::KktReached;
            break;
        }
        if k == options.max_outer {
            iterations.push(terminal_record(k, sigma, err));
            status = SolveStatus::MaxOuter;
            break;
        }
        let timer = now_ms(options.record_timing);
        let sol = solve_ordinary(oracles, &v, options.epsilon_for(sigma))?;
        let mu_step = &sol.mu - &v.lambda;
        let d_norm = sol.d.norm();
        let mu_step_norm = mu_step.norm();
        iterations.push(IterationRecord {
            k,
            sigma,
            step_norm: d_norm + mu_step_norm,
            d_norm,
            mu_step_norm,
            sub_residual: Some(sol.residual),
            sub_iters: Some(sol.iterations),
            sub_status: Some(sol.status.as_str().to_string()),
            err_to_ref: err,
            wall_ms: elapsed_ms(timer),
        });
        if sol.status != SubStatus::Converged {
            status = SolveStatus::SubproblemFailure;
            break;
        }
        v = PrimalDualPoint::new(v.x.axpy(1.0, &sol.d), sol.mu);
        sigma = oracles.sigma(&v)?;
    }

    Ok(SolveTrace {
        status,
        iterations,
        final_sigma: sigma,
        final_point: v,
        hit_ball: false,
    })
}

fn terminal_record(k: usize, sigma: f64, err: Option<f64>) -> IterationRecord {
    IterationRecord {
        k,
        sigma,
        step_norm: 0.0,
        d_norm: 0.0,
        mu_step_norm: 0.0,
        sub_residual: None,
        sub_iters: None,
        sub_status: None,
        err_to_ref: err,
        wall_ms: 0.0,
    }
}

/// Convergence-order estimate from an error sequence.
#[derive(Debug, Clone)]
pub struct RateEstimate {
    /// Least-squares slope of `log e_{k+1}` against `log e_k`; near 2 for
    /// quadratic convergence.
    pub order: f64,
    /// Quadratic-convergence ratios `e_{k+1} / e_k^2`.
    pub ratios: Vec<f64>,
    /// Number of consecutive (e_k, e_{k+1}) pairs used.
    pub pairs: usize,
}

/// Estimates the convergence order from consecutive errors. Pairs where
/// either entry is below 100x machine epsilon (noise floor) or nonpositive
/// are discarded; at least two usable pairs are required.
pub fn estimate_rate(errors: &[f64]) -> Result<RateEstimate> {
    let floor = 100.0 * f64::EPSILON;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ratios = Vec::new();
    for w in errors.windows(2) {
        let (e0, e1) = (w[0], w[1]);
        if e0 > floor && e1 > floor && e0.is_finite() && e1.is_finite() {
            xs.push(e0.ln());
            ys.push(e1.ln());
            ratios.push(e1 / (e0 * e0));
        }
    }
    let pairs = xs.len();
    if pairs < 2 {
        return Err(Error::InsufficientData);
    }
    let xbar = xs.iter().sum::<f64>() / pairs as f64;
    let ybar = ys.iter().sum::<f64>() / pairs as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..pairs {
        num += (xs[i] - xbar) * (ys[i] - ybar);
        den += (xs[i] - xbar) * (xs[i] - xbar);
    }
    if den <= 0.0 {
        return Err(Error::InsufficientData);
    }
    Ok(RateEstimate {
        order: num / den,
        ratios,
        pairs,
    })
}

/// A point at product-norm distance exactly `radius` from `v`, with a
/// direction drawn from the given RNG (uniform coordinates in [-1, 1]).
pub fn perturb_point<R: Rng>(v: &PrimalDualPoint, radius: f64, rng: &mut R) -> PrimalDualPoint {
    assert!(radius > 0.0, "perturbation radius must be positive");
    loop {
        let dx = DVector::from_fn(v.x.dim(), |_, _| rng.gen_range(-1.0..=1.0));
        let dl = DVector::from_fn(v.lambda.dim(), |_, _| rng.gen_range(-1.0..=1.0));
        let dxv = v.x.with_coords(dx);
        let dlv = v.lambda.with_coords(dl);
        let total = dxv.norm() + dlv.norm();
        if total > 0.0 {
            let t = radius / total;
            return PrimalDualPoint::new(v.x.axpy(t, &dxv), v.lambda.axpy(t, &dlv));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::make_scalar_toy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scalar_toy_converges_quadratically() {
        let p = make_scalar_toy();
        let start = p.point(&[2.0], &[0.5]).unwrap();
        let trace = run_stabilized_sqp(&p, &start, &SolverOptions::default()).unwrap();
        assert_eq!(trace.status, SolveStatus::KktReached);
        assert!(trace.iterations.len() <= 9);
        let reference = p.reference_kkt().unwrap();
        assert!(trace.final_point.dist(reference) <= 1e-9);
        // unit steps: each iterate is exactly the previous plus the step
        let sigmas: Vec<f64> = trace.iterations.iter().map(|r| r.sigma).collect();
        assert!(sigmas.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn terminal_record_has_no_subproblem_fields() {
        let p = make_scalar_toy();
        let start = p.point(&[2.0], &[0.5]).unwrap();
        let trace = run_stabilized_sqp(&p, &start, &SolverOptions::default()).unwrap();
        let last = trace.iterations.last().unwrap();
        assert!(last.sub_status.is_none());
        assert_eq!(last.step_norm, 0.0);
    }

    #[test]
    fn csv_has_fixed_header_and_is_deterministic() {
        let p = make_scalar_toy();
        let start = p.point(&[1.8], &[-0.2]).unwrap();
        let opts = SolverOptions::default();
        let t1 = run_stabilized_sqp(&p, &start, &opts).unwrap();
        let t2 = run_stabilized_sqp(&p, &start, &opts).unwrap();
        assert!(t1.to_csv().starts_with(CSV_HEADER));
        assert_eq!(t1.to_csv(), t2.to_csv());
        assert_eq!(
            serde_json::to_string(&t1.to_json(&opts)).unwrap(),
            serde_json::to_string(&t2.to_json(&opts)).unwrap()
        );
        // timing disabled by default: wall_ms column is exactly zero
        assert!(t1.iterations.iter().all(|r| r.wall_ms == 0.0));
    }

    #[test]
    fn rate_estimate_recovers_quadratic_order() {
        // e_{k+1} = e_k^2
        let errs = [1e-1, 1e-2, 1e-4, 1e-8];
        let est = estimate_rate(&errs).unwrap();
        assert!((est.order - 2.0).abs() < 1e-12);
        assert!(est.ratios.iter().all(|&r| (r - 1.0).abs() < 1e-12));
        // linear sequence has order ~1
        let lin = [1.0, 0.5, 0.25, 0.125, 0.0625];
        assert!((estimate_rate(&lin).unwrap().order - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rate_estimate_needs_two_pairs() {
        assert!(matches!(
            estimate_rate(&[1e-3, 1e-6]),
            Err(Error::InsufficientData)
        ));
        assert!(matches!(
            estimate_rate(&[1e-3, 1e-20, 1e-22]),
            Err(Error::InsufficientData)
        ));
    }

    #[test]
    fn perturbation_has_exact_radius() {
        let p = make_scalar_toy();
        let v = p.point(&[1.0], &[-1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let w = perturb_point(&v, 1e-3, &mut rng);
            assert!((v.dist(&w) - 1e-3).abs() <= 1e-12);
        }
    }

    #[test]
    fn options_validation() {
        let p = make_scalar_toy();
        let v = p.point(&[2.0], &[0.0]).unwrap();
        let bad = SolverOptions {
            tol_kkt: 0.0,
            ..Default::default()
        };
        assert!(run_stabilized_sqp(&p, &v, &bad).is_err());
        let bad = SolverOptions {
            epsilon_cap: 1e-20,
            ..Default::default()
        };
        assert!(run_stabilized_sqp(&p, &v, &bad).is_err());
    }

    #[test]
    fn starting_at_kkt_point_stops_immediately() {
        let p = make_scalar_toy();
        let v = p.reference_kkt().unwrap().clone();
        let trace = run_stabilized_sqp(&p, &v, &SolverOptions::default()).unwrap();
        assert_eq!(trace.status, SolveStatus::KktReached);
        assert_eq!(trace.iterations.len(), 1);
    }
}
