use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lehopp_core::lehopp::{Fill, Scope};
use lehopp_core::pipeline::{self, BaselineSpec, RunConfig, SceneSource};
use lehopp_core::pruning::PrunerOptions;
use lehopp_core::scenegen::SceneSpec;

#[derive(Parser)]
#[command(name = "lehopp", version, about = "Gradient-based pixel pruning for multi-view rendering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SceneArgs {
    /// Scene spec JSON; without it a seeded desk scene is generated.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    scene_seed: u64,
    #[arg(long, default_value_t = 64)]
    width: usize,
    #[arg(long, default_value_t = 64)]
    height: usize,
    #[arg(long, default_value_t = 8)]
    views: usize,
    #[arg(long, default_value_t = 1)]
    frames: usize,
}

impl SceneArgs {
    fn spec(&self) -> Result<SceneSpec> {
        match &self.spec {
            Some(path) => Ok(pipeline::read_spec(path)?),
            None => Ok(SceneSpec::desk(self.scene_seed, self.width, self.height, self.views, self.frames)),
        }
    }
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Pruning fraction; repeat for several.
    #[arg(long = "gamma", default_values_t = [0.05, 0.10, 0.20])]
    gammas: Vec<f64>,
    #[arg(long, default_value = "per-view")]
    scope: Scope,
    #[arg(long, default_value_t = 16)]
    intra_period: usize,
    #[arg(long, default_value_t = 9)]
    n_src: usize,
    #[arg(long, default_value = "inpaint")]
    fill: Fill,
    /// Leave-one-out target view; repeat for several, omit for all views.
    #[arg(long = "target")]
    targets: Vec<usize>,
    /// Seed of the random baselines (and of oracle pixel sampling).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record wall-clock runtimes in the report.
    #[arg(long)]
    timing: bool,
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        let mut cfg = RunConfig {
            targets: self.targets.clone(),
            gammas: self.gammas.clone(),
            scope: self.scope,
            intra_period: self.intra_period,
            fill: self.fill,
            timing: self.timing,
            ..RunConfig::default()
        };
        cfg.render.n_src = self.n_src;
        for b in &mut cfg.baselines {
            b.seed = self.seed;
        }
        cfg
    }
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic scene to PPM/PFM files and a manifest.
    Synth {
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-view importance maps and their histogram.
    Importance {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Masks plus pruned and filled source images, one directory per gamma.
    Prune {
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory of `importance`; required for lehopp.
        #[arg(long)]
        importance: Option<PathBuf>,
        /// lehopp, base1, base2 or random-block.
        #[arg(long, default_value = "lehopp")]
        method: String,
        /// Cell size for random-block.
        #[arg(long)]
        block: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Leave-one-out report for the anchor and the given variants.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long = "variant")]
        variants: Vec<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthesis (or an existing manifest), importance, pruning, baselines, evaluation.
    Pipeline {
        #[arg(long, conflicts_with = "spec")]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        scene: SceneArgs,
        /// Extra random-block baseline with this cell size.
        #[arg(long)]
        block: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Importance against brute-force loss changes at sampled pixels.
    Oracle {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 100)]
        pixels: usize,
        /// Run on views above the size guard.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bjontegaard delta rate of TEST against ANCHOR (CSV: label,rate_kbps,psnr_db).
    Bdrate { anchor: PathBuf, test: PathBuf },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Synth { scene, out } => {
            let manifest = pipeline::cmd_synth(&scene.spec()?, &out)?;
            println!("{}", manifest.display());
        }
        Command::Importance { manifest, run, out } => {
            let result = pipeline::cmd_importance(&manifest, &run.config(), &out)?;
            println!("{} intra-period(s) written to {}", result.periods.len(), out.display());
        }
        Command::Prune {
            manifest,
            importance,
            method,
            block,
            run,
            out,
        } => {
            let opts = PrunerOptions {
                scope: run.scope,
                seed: run.seed,
                block,
            };
            for dir in pipeline::cmd_prune(&manifest, importance.as_deref(), &method, &opts, &run.config(), &out)? {
                println!("{}", dir.display());
            }
        }
        Command::Eval {
            manifest,
            variants,
            run,
            out,
        } => {
            let records = pipeline::cmd_eval(&manifest, &variants, &run.config(), &out)?;
            print_aggregates(&records);
        }
        Command::Pipeline {
            manifest,
            scene,
            block,
            run,
            out,
        } => {
            let mut cfg = run.config();
            if let Some(block) = block {
                cfg.baselines.push(BaselineSpec {
                    name: "random-block".into(),
                    block: Some(block),
                    seed: run.seed,
                });
            }
            let source = match manifest {
                Some(path) => SceneSource::Manifest(path),
                None => SceneSource::Spec(scene.spec()?),
            };
            let records = pipeline::cmd_pipeline(&source, &cfg, &out)?;
            print_aggregates(&records);
        }
        Command::Oracle {
            manifest,
            pixels,
            force,
            run,
            out,
        } => {
            let summary = pipeline::cmd_oracle(&manifest, pixels, run.seed, force, &run.config(), &out)?;
            if summary.zero_variance {
                println!("rho = nan (zero variance) over {} pixels", summary.n_pixels);
            } else {
                println!("rho = {} over {} pixels", summary.rho, summary.n_pixels);
            }
        }
        Command::Bdrate { anchor, test } => {
            let r = pipeline::cmd_bdrate(&anchor, &test)
                .with_context(|| format!("BD-rate of {} against {}", test.display(), anchor.display()))?;
            if !r.is_finite() {
                bail!("BD-rate is not finite");
            }
            println!("{r:.4}%");
        }
    }
    Ok(())
}

fn print_aggregates(records: &[pipeline::ReportRecord]) {
    println!("{:<16} {:>6} {:>10} {:>8}", "method", "gamma", "psnr_db", "ssim");
    for r in pipeline::aggregate(records) {
        println!(
            "{:<16} {:>6} {:>10} {:>8.4}",
            r.method,
            r.gamma,
            pipeline::format_db(r.psnr_db),
            r.ssim
        );
    }
}
