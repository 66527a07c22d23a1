//! Online-time comparison against the PRM baseline on scaled scene variants.

use std::time::{Duration, Instant};

use serde::Serialize;

use super::fixtures::Fixture;
use super::prm::{prm_build, PrmParams};
use super::validate::{validate_steps, Pose};
use crate::decompose::{decompose, DecomposeReport};
use crate::densegraph::{build_dense_graph, DenseGraph};
use crate::error::Result;
use crate::query::{Planner, QueryOptions};

/// Offline phase for a fixture: decomposition and dense graph.
pub struct Offline {
    pub coarse: DecomposeReport,
    pub dense: DenseGraph,
    pub elapsed: Duration,
}

pub fn build_offline(fx: &Fixture) -> Result<Offline> {
    let t0 = Instant::now();
    let coarse = decompose(&fx.scene, &fx.decompose)?;
    let dense = build_dense_graph(&coarse.graph, &fx.object, &fx.dense)?;
    Ok(Offline {
        coarse,
        dense,
        elapsed: t0.elapsed(),
    })
}

#[derive(Debug, Clone)]
pub struct ScalingConfig {
    pub factors: Vec<f64>,
    /// Extra variants with the corridor narrowed by this factor.
    pub corridor_shrink: Option<f64>,
    pub prm: PrmParams,
    /// PRM trials per variant (distinct seeds) and timed queries for ours.
    pub trials: usize,
    pub prm_online_budget: Duration,
    pub validate_samples: usize,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            factors: vec![1.0, 2.0],
            corridor_shrink: Some(0.6),
            prm: PrmParams::default(),
            trials: 5,
            prm_online_budget: Duration::from_secs(40),
            validate_samples: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub variant: String,
    pub factor: f64,
    pub shrink: f64,
    pub offline_s: f64,
    pub ours_online_ms: f64,
    pub ours_success: bool,
    pub ours_valid: bool,
    pub prm_online_ms: f64,
    pub prm_success: usize,
    /// PRM paths that pass the validator.
    pub prm_valid: usize,
    pub trials: usize,
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Runs both planners on every `(factor, shrink)` variant built by `make`.
/// Our online time is the median over `trials` timed queries after one
/// discarded warmup; PRM builds a fresh roadmap per trial and its online
/// time includes any sampling needed to answer the query.
pub fn scaling_suite(make: impl Fn(f64, f64) -> Result<Fixture>, cfg: &ScalingConfig) -> Result<Vec<ScalingRow>> {
    let mut variants: Vec<(f64, f64)> = cfg.factors.iter().map(|&f| (f, 1.0)).collect();
    if let Some(s) = cfg.corridor_shrink {
        variants.extend(cfg.factors.iter().map(|&f| (f, s)));
    }
    let mut rows = Vec::new();
    for (factor, shrink) in variants {
        let fx = make(factor, shrink)?;
        let off = build_offline(&fx)?;
        let opts = QueryOptions {
            validate_samples: 0,
            ..QueryOptions::default()
        };
        let planner = Planner::new(&fx.scene, &off.coarse.graph, &off.dense, &fx.object, opts)?;
        let warm = planner.plan(&fx.start, &fx.goal);
        let mut times = Vec::new();
        for _ in 0..cfg.trials.max(1) {
            let t0 = Instant::now();
            let _ = planner.plan(&fx.start, &fx.goal);
            times.push(t0.elapsed().as_secs_f64() * 1e3);
        }
        let (ours_success, ours_valid) = match &warm {
            Ok(plan) => {
                let rep = super::validate_plan(plan, &fx.scene, &fx.object, planner.table(), cfg.validate_samples, 1e-6);
                (true, rep.pass)
            }
            Err(e) => {
                log::warn!("{}: no plan ({e})", fx.name);
                (false, false)
            }
        };

        let (s, g) = (Pose::from_config(&fx.start, planner.table()), Pose::from_config(&fx.goal, planner.table()));
        let mut prm_times = Vec::new();
        let (mut prm_success, mut prm_valid) = (0, 0);
        for trial in 0..cfg.trials.max(1) {
            let params = PrmParams {
                seed: cfg.prm.seed.wrapping_add(trial as u64),
                ..cfg.prm.clone()
            };
            let mut rm = prm_build(&fx.scene, &fx.object, &params);
            let t0 = Instant::now();
            let path = rm.query(&fx.scene, &fx.object, s, g, cfg.prm_online_budget);
            prm_times.push(t0.elapsed().as_secs_f64() * 1e3);
            if let Some(path) = path {
                prm_success += 1;
                let steps: Vec<(Pose, Pose)> = path.windows(2).map(|w| (w[0], w[1])).collect();
                if validate_steps(&steps, &fx.scene, &fx.object, cfg.validate_samples, 1e-6).1.pass {
                    prm_valid += 1;
                }
            }
        }
        let row = ScalingRow {
            variant: fx.name.clone(),
            factor,
            shrink,
            offline_s: off.elapsed.as_secs_f64(),
            ours_online_ms: median(times),
            ours_success,
            ours_valid,
            prm_online_ms: median(prm_times),
            prm_success,
            prm_valid,
            trials: cfg.trials.max(1),
        };
        log::info!("{row:?}");
        rows.push(row);
    }
    Ok(rows)
}

/// Tab-separated table, one row per variant.
pub fn format_table(rows: &[ScalingRow]) -> String {
    let mut out = String::from("variant\tfactor\tshrink\toffline_s\tours_ms\tours_ok\tprm_ms\tprm_ok\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{:.2}\t{:.2}\t{}\t{:.2}\t{}/{} ({} valid)\n",
            r.variant,
            r.factor,
            r.shrink,
            r.offline_s,
            r.ours_online_ms,
            if r.ours_success && r.ours_valid { "yes" } else { "no" },
            r.prm_online_ms,
            r.prm_success,
            r.trials,
            r.prm_valid
        ));
    }
    out
}

#[derive(Serialize)]
struct ResultsFile<'a> {
    rows: &'a [ScalingRow],
}

/// Machine-readable results (TOML).
pub fn results_toml(rows: &[ScalingRow]) -> String {
    toml::to_string(&ResultsFile { rows }).expect("rows serialize")
}
