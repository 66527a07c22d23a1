use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use log::warn;

use polytraverse::bench::{self, fixtures, PrmParams, ScalingConfig};
use polytraverse::decompose::{decompose, DecomposeParams};
use polytraverse::densegraph::{build_dense_graph, DenseParams};
use polytraverse::geometry::{Configuration, Vec3};
use polytraverse::io::{self, RoadmapFile};
use polytraverse::query::{MotionPlan, Planner, QueryOptions};
use polytraverse::render::{render_mesh, render_svg, RenderInput};
use polytraverse::Error;

#[derive(Parser)]
#[command(name = "polytraverse", version, about = "Rigid-body motion planning over a convex cover of free space")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Log progress (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cover a scene's free space with convex polytopes and write a roadmap.
    Decompose {
        scene: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        n_v: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        n_s: Option<usize>,
    },
    /// Certify traversals for an object and store them in the roadmap.
    Build {
        roadmap: PathBuf,
        object: PathBuf,
        #[command(flatten)]
        dense: DenseArgs,
    },
    /// Answer a start/goal query with a stored roadmap.
    Plan {
        roadmap: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        object: PathBuf,
        /// `x,y,rot` or `x,y,z,rot`.
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        #[arg(long, allow_hyphen_values = true)]
        goal: String,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Draw a scene with an optional cover and plan (.svg in 2D, .mesh in 3D).
    Render {
        scene: PathBuf,
        #[arg(long)]
        roadmap: Option<PathBuf>,
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Needed to draw plan sweeps and poses.
        #[arg(long)]
        object: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Online-time scaling study against the PRM baseline on the bugtrap scenes.
    Bench {
        /// Object to plan for (default: the built-in L shape).
        #[arg(long)]
        object: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0])]
        factors: Vec<f64>,
        /// Narrow-corridor width factor; `none` skips the narrow variants.
        #[arg(long, default_value = "0.6")]
        shrink: String,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 500)]
        prm_samples: usize,
        /// PRM edge-check spacing as a fraction of the object length.
        #[arg(long, default_value_t = 0.05)]
        prm_resolution: f64,
        #[arg(long, default_value_t = 40.0)]
        prm_budget_s: f64,
        /// Results file (TOML).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Summarize a roadmap file.
    Info { roadmap: PathBuf },
}

#[derive(Args)]
struct DenseArgs {
    #[arg(long)]
    n_r: Option<usize>,
    #[arg(long)]
    n_t: Option<usize>,
    /// Facet grid spacing (3D).
    #[arg(long)]
    h: Option<f64>,
    /// Intermediate waypoints per traversal.
    #[arg(long)]
    waypoints: Option<usize>,
    /// Retry failed pairs with one more waypoint.
    #[arg(long, action = clap::ArgAction::Set)]
    retry: Option<bool>,
    #[arg(long)]
    eps: Option<f64>,
    /// Branch-and-bound nodes per traversal MILP; 0 skips the MILP stage.
    #[arg(long)]
    node_limit: Option<usize>,
}

impl DenseArgs {
    fn params(&self, dim: usize) -> DenseParams {
        let mut p = DenseParams::defaults_for_dim(dim);
        if let Some(x) = self.n_r {
            p.n_r = x;
        }
        if let Some(x) = self.n_t {
            p.n_t = x;
        }
        if self.h.is_some() {
            p.h = self.h;
        }
        if let Some(x) = self.waypoints {
            p.n_waypoints = x;
        }
        if let Some(x) = self.retry {
            p.retry = x;
        }
        if let Some(x) = self.eps {
            p.eps = x;
        }
        if let Some(x) = self.node_limit {
            p.node_limit = x;
        }
        p
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(Error::CoverageStall(_)) => 2,
        Some(Error::FingerprintCollision) => 3,
        Some(Error::NoPath | Error::Disconnected) => 4,
        Some(Error::InvalidQuery(_)) => 5,
        _ => 1,
    }
}

fn parse_config(s: &str, dim: usize) -> anyhow::Result<Configuration> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != dim + 1 {
        bail!("expected {} comma-separated values (coordinates then rotation index), got `{s}`", dim + 1);
    }
    let mut p = Vec3::zeros();
    for (k, t) in parts[..dim].iter().enumerate() {
        p[k] = t.parse().with_context(|| format!("bad coordinate `{t}`"))?;
    }
    let rot = parts[dim].parse().with_context(|| format!("bad rotation index `{}`", parts[dim]))?;
    Ok(Configuration::new(p, rot))
}

fn read_roadmap(path: &Path) -> anyhow::Result<RoadmapFile> {
    RoadmapFile::read(path).with_context(|| format!("reading roadmap {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::Decompose { scene, out, n_v, alpha, n_s } => {
            let sc = io::read_scene(&scene).with_context(|| format!("reading scene {}", scene.display()))?;
            let d = DecomposeParams::default();
            let params = DecomposeParams {
                n_v: n_v.unwrap_or(d.n_v),
                alpha: alpha.unwrap_or(d.alpha),
                n_s: n_s.unwrap_or(d.n_s),
                seed: cli.seed,
                ..d
            };
            let t = Instant::now();
            let rep = decompose(&sc, &params)?;
            let elapsed = t.elapsed();
            RoadmapFile::new(rep.graph.clone(), params, rep.coverage)
                .write(&out)
                .with_context(|| format!("writing {}", out.display()))?;
            println!("coverage {:.4}", rep.coverage);
            println!("polytopes {}", rep.graph.polytopes.len());
            println!("adjacencies {}", rep.graph.edges.len());
            println!("elapsed_s {:.3}", elapsed.as_secs_f64());
        }
        Cmd::Build { roadmap, object, dense } => {
            let mut rm = read_roadmap(&roadmap)?;
            let obj = io::read_object(&object).with_context(|| format!("reading object {}", object.display()))?;
            if obj.dim() != rm.coarse.dim {
                bail!("object is {}D but the roadmap is {}D", obj.dim(), rm.coarse.dim);
            }
            rm.dense_for(&obj)?;
            if rm.coarse.edges.is_empty() {
                warn!("the cover has no overlapping polytopes; the dense graph is empty");
            }
            let params = dense.params(rm.coarse.dim);
            let t = Instant::now();
            let dg = build_dense_graph(&rm.coarse, &obj, &params)?;
            let elapsed = t.elapsed();
            println!("patches {}", dg.patches.len());
            println!("milp_count {}", dg.stats.milp_count);
            println!("certified {}", dg.edges.len());
            println!("unverified {}", dg.stats.unverified);
            println!("elapsed_s {:.3}", elapsed.as_secs_f64());
            rm.insert_dense(&obj, dg)?;
            rm.write(&roadmap).with_context(|| format!("writing {}", roadmap.display()))?;
        }
        Cmd::Plan {
            roadmap,
            scene,
            object,
            start,
            goal,
            out,
        } => {
            let rm = read_roadmap(&roadmap)?;
            let sc = io::read_scene(&scene).with_context(|| format!("reading scene {}", scene.display()))?;
            let obj = io::read_object(&object).with_context(|| format!("reading object {}", object.display()))?;
            let dg = rm
                .dense_for(&obj)?
                .ok_or_else(|| anyhow!("no dense graph for this object; run `build` first"))?;
            let dim = rm.coarse.dim;
            let (s, g) = (
                parse_config(&start, dim).map_err(|e| Error::InvalidQuery(e.to_string()))?,
                parse_config(&goal, dim).map_err(|e| Error::InvalidQuery(e.to_string()))?,
            );
            let planner = Planner::new(&sc, &rm.coarse, dg, &obj, QueryOptions::default())?;
            let t = Instant::now();
            let plan = planner.plan(&s, &g)?;
            let ms = t.elapsed().as_secs_f64() * 1e3;
            io::write_plan(&out, &plan, dim, dg.params.n_r).with_context(|| format!("writing {}", out.display()))?;
            println!("online_ms {ms:.3}");
            println!("waypoints {}", plan.waypoints().len());
            println!("segments {}", plan.segments.len());
            println!("cost {:.4}", plan.total);
        }
        Cmd::Render {
            scene,
            roadmap,
            plan,
            object,
            out,
        } => {
            let sc = io::read_scene(&scene).with_context(|| format!("reading scene {}", scene.display()))?;
            let rm = roadmap.as_deref().map(read_roadmap).transpose()?;
            let plan: Option<(MotionPlan, usize, usize)> = plan
                .as_deref()
                .map(|p| io::read_plan(p).with_context(|| format!("reading plan {}", p.display())))
                .transpose()?;
            let obj = object
                .as_deref()
                .map(|p| io::read_object(p).with_context(|| format!("reading object {}", p.display())))
                .transpose()?;
            let table = match &plan {
                Some((_, dim, n_r)) => Some(polytraverse::geometry::RotationTable::for_dim(*dim, *n_r)?),
                None => None,
            };
            let waypoints = plan.as_ref().map(|p| p.0.waypoints()).unwrap_or_default();
            let input = RenderInput {
                coarse: rm.as_ref().map(|r| &r.coarse),
                plan: plan.as_ref().map(|p| &p.0),
                object: obj.as_ref(),
                table: table.as_ref(),
                start: waypoints.first().copied(),
                goal: waypoints.last().copied(),
            };
            let text = if sc.dim == 2 { render_svg(&sc, &input) } else { render_mesh(&sc, &input) };
            std::fs::write(&out, text).with_context(|| format!("writing {}", out.display()))?;
        }
        Cmd::Bench {
            object,
            factors,
            shrink,
            trials,
            prm_samples,
            prm_resolution,
            prm_budget_s,
            out,
        } => {
            let obj = object
                .as_deref()
                .map(|p| io::read_object(p).with_context(|| format!("reading object {}", p.display())))
                .transpose()?;
            let corridor_shrink = match shrink.as_str() {
                "none" => None,
                s => Some(s.parse::<f64>().with_context(|| format!("bad --shrink `{s}`"))?),
            };
            let cfg = ScalingConfig {
                factors,
                corridor_shrink,
                prm: PrmParams {
                    n_samples: prm_samples,
                    resolution: prm_resolution,
                    seed: cli.seed,
                    ..PrmParams::default()
                },
                trials,
                prm_online_budget: Duration::from_secs_f64(prm_budget_s),
                ..ScalingConfig::default()
            };
            let rows = bench::scaling_suite(
                |f, s| {
                    let mut fx = fixtures::bugtrap(f, s)?;
                    if let Some(o) = &obj {
                        fx.object = o.clone();
                    }
                    Ok(fx)
                },
                &cfg,
            )?;
            print!("{}", bench::format_table(&rows));
            if let Some(out) = out {
                std::fs::write(&out, bench::results_toml(&rows)).with_context(|| format!("writing {}", out.display()))?;
            }
        }
        Cmd::Info { roadmap } => {
            let rm = read_roadmap(&roadmap)?;
            let g = &rm.coarse;
            println!("dim {}", g.dim);
            println!("polytopes {}", g.polytopes.len());
            println!("adjacencies {}", g.edges.len());
            println!("coverage {:.4}", rm.coverage);
            println!("seed {}", rm.decompose.seed);
            println!("objects {}", rm.objects.len());
            for e in &rm.objects {
                let fp: String = e.fingerprint.iter().take(8).map(|b| format!("{b:02x}")).collect();
                let d = &e.dense;
                println!(
                    "object {fp} patches {} milp_count {} certified {} unverified {} n_r {} n_t {}",
                    d.patches.len(),
                    d.stats.milp_count,
                    d.edges.len(),
                    d.stats.unverified,
                    d.params.n_r,
                    d.params.n_t
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            warn!("could not size the worker pool: {e}");
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
