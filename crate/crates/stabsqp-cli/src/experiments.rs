//! The experiment commands: single solve, rate study, error-bound study, and
//! the stabilized-vs-ordinary contrast. Each writes CSV and/or JSON reports
//! stamped with the config hash and tool version, and returns a process exit
//! code.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use stabsqp::driver::perturb_point;
use stabsqp::{
    estimate_rate, run_ordinary_sqp, run_stabilized_sqp, PrimalDualPoint, ProblemOracles,
    SolveStatus, SolveTrace, Vector,
};

use crate::config::ExperimentConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    fn csv(&self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
    fn json(&self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

pub struct Context {
    pub config: ExperimentConfig,
    pub out: PathBuf,
    pub format: Format,
    pub jobs: usize,
    pub timing: bool,
}

impl Context {
    fn write(&self, stem: &str, ext: &str, content: &str) -> Result<(), String> {
        std::fs::create_dir_all(&self.out)
            .map_err(|e| format!("cannot create {}: {e}", self.out.display()))?;
        let path = self.out.join(format!("{stem}.{ext}"));
        std::fs::write(&path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))
    }

    fn options(&self) -> stabsqp::SolverOptions {
        let mut o = self.config.solver.clone();
        o.record_timing = self.timing;
        o
    }

    fn pool(&self) -> Result<rayon::ThreadPool, String> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.max(1))
            .build()
            .map_err(|e| e.to_string())
    }
}

fn build(config: &ExperimentConfig) -> Result<ProblemOracles, String> {
    config
        .instance
        .build()
        .map_err(|e| format!("instance {}: {e}", config.instance.name()))
}

/// Default start: the reference KKT point when one is shipped, otherwise the
/// origin of the primal-dual space.
fn base_point(p: &ProblemOracles) -> PrimalDualPoint {
    match p.reference_kkt() {
        Some(v) => v.clone(),
        None => PrimalDualPoint::new(
            Vector::zeros(p.x_space().clone()),
            Vector::zeros(p.y_space().clone()),
        ),
    }
}

fn seeded_start(p: &ProblemOracles, radius: f64, seed: u64) -> PrimalDualPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perturb_point(&base_point(p), radius, &mut rng)
}

fn status_exit(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::KktReached => 0,
        SolveStatus::MaxOuter => 2,
        SolveStatus::SubproblemFailure => 3,
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| format!("{v}"))
}

// --- solve -----------------------------------------------------------------

pub fn cmd_solve(ctx: &Context) -> Result<u8, String> {
    let cfg = &ctx.config;
    let p = build(cfg)?;
    let start = if let Some(s) = &cfg.solve.start {
        p.point(&s.x, &s.lambda).map_err(|e| e.to_string())?
    } else if let Some(r) = cfg.solve.start_radius {
        seeded_start(&p, r, cfg.seed)
    } else {
        base_point(&p)
    };
    let opts = ctx.options();
    log::info!("solving {} from start norm {}", cfg.instance.name(), start.norm());
    let trace = run_stabilized_sqp(&p, &start, &opts).map_err(|e| e.to_string())?;
    println!(
        "{}: status={} outer_iters={} sigma={:e}",
        cfg.instance.name(),
        trace.status.as_str(),
        trace.iterations.len() - 1,
        trace.final_sigma
    );
    let stem = format!("{}_solve", cfg.instance.name());
    if ctx.format.csv() {
        ctx.write(&stem, "csv", &trace.to_csv())?;
    }
    if ctx.format.json() {
        let mut doc = trace.to_json(&opts);
        doc["instance"] = json!(cfg.instance);
        doc["config_hash"] = json!(cfg.hash());
        doc["version"] = json!(VERSION);
        ctx.write(&stem, "json", &serde_json::to_string_pretty(&doc).unwrap())?;
    }
    Ok(status_exit(trace.status))
}

// --- rate study -------------------------------------------------------------

struct RateRow {
    radius: f64,
    run: usize,
    status: SolveStatus,
    outer_iters: usize,
    final_sigma: f64,
    order: Option<f64>,
    max_ratio: f64,
    error_proxy: bool,
}

fn max_sigma_ratio(trace: &SolveTrace) -> f64 {
    trace
        .iterations
        .iter()
        .map(|r| r.sigma)
        .collect::<Vec<_>>()
        .windows(2)
        .filter(|w| w[0] >= 1e-7 && w[0] <= 1e-2)
        .map(|w| w[1] / (w[0] * w[0]))
        .fold(0.0, f64::max)
}

pub fn cmd_rate_study(ctx: &Context) -> Result<u8, String> {
    let cfg = &ctx.config;
    let p = build(cfg)?;
    let opts = ctx.options();
    let proxy = p.reference_kkt().is_none();
    let samples = cfg.rate_study.samples;

    let mut rows: Vec<RateRow> = Vec::new();
    for (ri, &radius) in cfg.rate_study.radii.iter().enumerate() {
        let radius_rows: Vec<Result<RateRow, String>> = ctx.pool()?.install(|| {
            (0..samples)
                .into_par_iter()
                .map(|run| {
                    let seed = cfg
                        .seed
                        .wrapping_add(ri as u64 * 10_000)
                        .wrapping_add(run as u64);
                    let start = seeded_start(&p, radius, seed);
                    let trace =
                        run_stabilized_sqp(&p, &start, &opts).map_err(|e| e.to_string())?;
                    Ok(RateRow {
                        radius,
                        run,
                        status: trace.status,
                        outer_iters: trace.iterations.len() - 1,
                        final_sigma: trace.final_sigma,
                        order: estimate_rate(&trace.error_sequence())
                            .ok()
                            .map(|e| e.order),
                        max_ratio: max_sigma_ratio(&trace),
                        error_proxy: proxy,
                    })
                })
                .collect()
        });
        for r in radius_rows {
            rows.push(r?);
        }
    }

    let all_kkt = rows.iter().all(|r| r.status == SolveStatus::KktReached);
    let hash = cfg.hash();
    let mut csv = String::from(
        "radius,run,status,outer_iters,final_sigma,order,max_ratio,error_proxy,config_hash,version\n",
    );
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.radius,
            r.run,
            r.status.as_str(),
            r.outer_iters,
            r.final_sigma,
            fmt_opt(r.order),
            r.max_ratio,
            r.error_proxy,
            hash,
            VERSION
        ));
    }

    // per-radius aggregate: median order, max ratio
    let mut summary = Vec::new();
    for &radius in &cfg.rate_study.radii {
        let mut orders: Vec<f64> = rows
            .iter()
            .filter(|r| r.radius == radius)
            .filter_map(|r| r.order)
            .collect();
        orders.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median_order = if orders.is_empty() {
            None
        } else {
            Some(orders[orders.len() / 2])
        };
        let max_ratio = rows
            .iter()
            .filter(|r| r.radius == radius)
            .map(|r| r.max_ratio)
            .fold(0.0, f64::max);
        println!(
            "radius {radius:e}: median_order={} max_ratio={max_ratio:e}",
            fmt_opt(median_order)
        );
        summary.push(json!({
            "radius": radius,
            "median_order": median_order,
            "max_ratio": max_ratio,
        }));
    }

    let stem = format!("{}_rate_study", cfg.instance.name());
    if ctx.format.csv() {
        ctx.write(&stem, "csv", &csv)?;
    }
    if ctx.format.json() {
        let doc = json!({
            "instance": cfg.instance,
            "rows": rows.iter().map(|r| json!({
                "radius": r.radius,
                "run": r.run,
                "status": r.status.as_str(),
                "outer_iters": r.outer_iters,
                "final_sigma": r.final_sigma,
                "order": r.order,
                "max_ratio": r.max_ratio,
                "error_proxy": r.error_proxy,
                "config_hash": hash,
                "version": VERSION,
            })).collect::<Vec<_>>(),
            "summary": summary,
            "all_kkt": all_kkt,
            "config_hash": hash,
            "version": VERSION,
        });
        ctx.write(&stem, "json", &serde_json::to_string_pretty(&doc).unwrap())?;
    }
    Ok(if all_kkt { 0 } else { 2 })
}

// --- error-bound study -------------------------------------------------------

pub fn cmd_error_bound(ctx: &Context) -> Result<u8, String> {
    let cfg = &ctx.config;
    let p = build(cfg)?;
    let vref = p
        .reference_kkt()
        .ok_or_else(|| {
            format!(
                "instance {} has no reference point",
                cfg.instance.name()
            )
        })?
        .clone();
    let radius = cfg.error_bound.radius;
    let samples = cfg.error_bound.samples;

    let ratios: Vec<(usize, f64, f64, f64)> = ctx.pool()?.install(|| {
        (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
                let v = perturb_point(&vref, radius, &mut rng);
                let sigma = p.sigma(&v).expect("sigma computable");
                let dist = v.dist(&vref);
                (i, sigma, dist, sigma / dist)
            })
            .collect()
    });

    let min = ratios.iter().map(|r| r.3).fold(f64::MAX, f64::min);
    let max = ratios.iter().map(|r| r.3).fold(f64::MIN, f64::max);
    let mut sorted: Vec<f64> = ratios.iter().map(|r| r.3).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let spread = max / min;
    let ok = min > 0.0 && max.is_finite() && spread <= cfg.error_bound.max_spread;
    println!(
        "{}: ratio sigma/dist min={min:e} median={median:e} max={max:e} spread={spread:e} ({})",
        cfg.instance.name(),
        if ok { "within bound" } else { "EXCEEDS bound" }
    );

    let hash = cfg.hash();
    let stem = format!("{}_error_bound", cfg.instance.name());
    if ctx.format.csv() {
        let mut csv = String::from("sample,sigma,dist,ratio,config_hash,version\n");
        for (i, s, d, r) in &ratios {
            csv.push_str(&format!("{i},{s},{d},{r},{hash},{VERSION}\n"));
        }
        ctx.write(&stem, "csv", &csv)?;
    }
    if ctx.format.json() {
        let doc = json!({
            "instance": cfg.instance,
            "radius": radius,
            "rows": ratios.iter().map(|(i, s, d, r)| json!({
                "sample": i, "sigma": s, "dist": d, "ratio": r,
                "config_hash": hash, "version": VERSION,
            })).collect::<Vec<_>>(),
            "summary": {
                "min": min, "median": median, "max": max,
                "spread": spread, "max_spread": cfg.error_bound.max_spread,
                "within_bound": ok,
            },
            "config_hash": hash,
            "version": VERSION,
        });
        ctx.write(&stem, "json", &serde_json::to_string_pretty(&doc).unwrap())?;
    }
    Ok(if ok { 0 } else { 2 })
}

// --- contrast -----------------------------------------------------------------

pub fn cmd_contrast(ctx: &Context) -> Result<u8, String> {
    let cfg = &ctx.config;
    let p = build(cfg)?;
    let opts = ctx.options();
    let start = seeded_start(&p, cfg.contrast.start_radius, cfg.seed);

    let stab = run_stabilized_sqp(&p, &start, &opts).map_err(|e| e.to_string())?;
    let ord = run_ordinary_sqp(&p, &start, &opts).map_err(|e| e.to_string())?;

    let hash = cfg.hash();
    let row = |name: &str, t: &SolveTrace| {
        let mult = start.lambda.norm().max(t.final_point.lambda.norm());
        (
            format!(
                "{},{},{},{},{},{},{}\n",
                name,
                t.status.as_str(),
                t.iterations.len() - 1,
                t.final_sigma,
                mult,
                hash,
                VERSION
            ),
            json!({
                "method": name,
                "status": t.status.as_str(),
                "outer_iters": t.iterations.len() - 1,
                "final_sigma": t.final_sigma,
                "max_multiplier_norm": mult,
                "config_hash": hash,
                "version": VERSION,
            }),
        )
    };
    let (csv_s, json_s) = row("stabilized", &stab);
    let (csv_o, json_o) = row("ordinary", &ord);
    println!(
        "{}: stabilized={} ({} iters), ordinary={} ({} iters)",
        cfg.instance.name(),
        stab.status.as_str(),
        stab.iterations.len() - 1,
        ord.status.as_str(),
        ord.iterations.len() - 1
    );

    let stem = format!("{}_contrast", cfg.instance.name());
    if ctx.format.csv() {
        let mut csv = String::from(
            "method,status,outer_iters,final_sigma,max_multiplier_norm,config_hash,version\n",
        );
        csv.push_str(&csv_s);
        csv.push_str(&csv_o);
        ctx.write(&stem, "csv", &csv)?;
    }
    if ctx.format.json() {
        let doc = json!({
            "instance": cfg.instance,
            "rows": [json_s, json_o],
            "config_hash": hash,
            "version": VERSION,
        });
        ctx.write(&stem, "json", &serde_json::to_string_pretty(&doc).unwrap())?;
    }
    Ok(if stab.status == SolveStatus::KktReached {
        0
    } else {
        2
    })
}

// --- list-instances -------------------------------------------------------------

pub fn cmd_list_instances() -> u8 {
    for spec in stabsqp::instances::InstanceSpec::catalog() {
        println!("{}\t{}", spec.name(), serde_json::to_string(&spec).unwrap());
    }
    0
}
