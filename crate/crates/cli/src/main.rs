use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stefan_pddl::io::{
    export_tables, infer_tables, load_triplet, oracle1d_series, parse_config, parse_grid, run_oracle1d, run_oracle2d,
    run_pretrain, run_train, save_json, validate_model, IoError, ModelView, Profile, RunConfig, COMPARISON_TIMES,
};
use stefan_pddl::oracles::{read_oracle1d_csv, targets_from_rows};

#[derive(Parser)]
#[command(name = "stefan", version, about = "Finned phase-change cell: training, inference and reference solvers")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Size preset: fast or full.
    #[arg(long, global = true)]
    profile: Option<Profile>,
    /// Directory receiving every output file.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Pre-train on 1D solutions (or a given table), then train and write the checkpoint.
    Train {
        /// Start from this checkpoint instead of fresh networks.
        #[arg(long)]
        init: Option<PathBuf>,
        /// `oracle1d.csv` used for pre-training instead of fresh 1D solutions.
        #[arg(long)]
        targets: Option<PathBuf>,
        /// Aspect ratio of the targets table.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Fit the interface and fin networks to an `oracle1d.csv` table.
    Pretrain {
        #[arg(long)]
        targets: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        init: Option<PathBuf>,
    },
    /// Contour, interface and solid-fraction tables of a trained model.
    Infer {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        p: f64,
        /// Dimensionless instants; repeat for several.
        #[arg(long = "t-star", required = true)]
        t_star: Vec<f64>,
        /// Output grid as NXxNY.
        #[arg(long, default_value = "201x101")]
        grid: String,
    },
    /// Compare a trained model with the 1D solution; exits non-zero when a threshold fails.
    Validate {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long = "t-star")]
        t_star: Vec<f64>,
    },
    /// Write `oracle1d.csv` from the 1D two-region solver.
    Oracle1d {
        #[arg(long)]
        p: f64,
        #[arg(long = "t-star-max")]
        t_star_max: Option<f64>,
    },
    /// Write `oracle2d.csv` from the 2D enthalpy solver.
    Oracle2d {
        #[arg(long)]
        p: f64,
        #[arg(long = "t-star-max")]
        t_star_max: Option<f64>,
        /// Replace the fin by melt.
        #[arg(long)]
        slab: bool,
    },
    /// Parametric tables across aspect ratios.
    Export {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Aspect ratios, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 3.0, 4.0, 5.0])]
        p: Vec<f64>,
        #[arg(long, default_value = "101x51")]
        grid: String,
    },
}

fn config(g: &Global) -> Result<RunConfig, IoError> {
    let mut cfg = match &g.config {
        Some(path) => parse_config(path, g.profile)?,
        None => RunConfig::for_profile(g.profile.unwrap_or_default()),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn checkpoint_path(g: &Global, given: &Option<PathBuf>) -> PathBuf {
    given.clone().unwrap_or_else(|| g.out_dir.join("ckpt.json"))
}

fn read_targets(cfg: &RunConfig, path: &Path, p: f64) -> Result<Vec<stefan_pddl::training::PretrainTarget>, IoError> {
    let rows = read_oracle1d_csv(fs::File::open(path)?)?;
    let scaling = cfg.scaling()?;
    let p_star = scaling.p_star(p)?;
    Ok(targets_from_rows(&rows, p_star, scaling.groups().delta_star))
}

fn run(cli: Cli) -> Result<ExitCode, IoError> {
    let g = &cli.global;
    let mut cfg = config(g)?;
    fs::create_dir_all(&g.out_dir)?;
    match cli.command {
        Command::Train { init, targets, p } => {
            let init = init.map(|path| load_triplet(&path)).transpose()?;
            let targets = targets.map(|path| read_targets(&cfg, &path, p)).transpose()?;
            let run = run_train(&cfg, init, targets, &g.out_dir)?;
            for f in &run.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Pretrain { targets, p, init } => {
            let init = init.map(|path| load_triplet(&path)).transpose()?;
            let targets = read_targets(&cfg, &targets, p)?;
            let losses = run_pretrain(&cfg, init, &targets, &g.out_dir)?;
            println!("pre-trained on {} targets, loss {:.3e} -> {:.3e}", targets.len(), losses[0], losses[losses.len() - 1]);
        }
        Command::Infer { checkpoint, p, t_star, grid } => {
            let grid = parse_grid(&grid)?;
            let triplet = load_triplet(&checkpoint_path(g, &checkpoint))?;
            let view = ModelView::new(&triplet, &cfg)?;
            for t in infer_tables(&view, p, &t_star, grid)? {
                println!("wrote {}", t.save(&g.out_dir)?.display());
            }
        }
        Command::Validate { checkpoint, p, t_star } => {
            let triplet = load_triplet(&checkpoint_path(g, &checkpoint))?;
            let view = ModelView::new(&triplet, &cfg)?;
            let series = oracle1d_series(&cfg, p)?;
            let times = if t_star.is_empty() { COMPARISON_TIMES.to_vec() } else { t_star };
            let (summary, tables) = validate_model(&view, &series, &cfg, p, &times)?;
            for t in &tables {
                t.save(&g.out_dir)?;
            }
            save_json(&g.out_dir.join("validate_summary.json"), &summary)?;
            for s in &summary.instants {
                println!(
                    "t* = {}: interface mean {:.4} max {:.4}; fin max rel {:.4} (reference {:.3}); fraction {:.4} vs {:.4}",
                    s.t_star,
                    s.interface.mean_abs,
                    s.interface.max_abs,
                    s.fin_temp.max_rel,
                    summary.reference_fin_max_rel,
                    s.fraction_model,
                    s.fraction_oracle
                );
            }
            for v in &summary.violations {
                eprintln!("threshold violated: {v}");
            }
            if !summary.passed {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Oracle1d { p, t_star_max } => {
            if let Some(t) = t_star_max {
                cfg.t_star_max = t;
            }
            cfg.validate()?;
            println!("wrote {}", run_oracle1d(&cfg, p, &g.out_dir)?.display());
        }
        Command::Oracle2d { p, t_star_max, slab } => {
            if let Some(t) = t_star_max {
                cfg.t_star_max = t;
            }
            cfg.validate()?;
            println!("wrote {}", run_oracle2d(&cfg, p, slab, &g.out_dir)?.display());
        }
        Command::Export { checkpoint, p, grid } => {
            let grid = parse_grid(&grid)?;
            let triplet = load_triplet(&checkpoint_path(g, &checkpoint))?;
            let view = ModelView::new(&triplet, &cfg)?;
            for t in export_tables(&view, &cfg, &p, grid)? {
                println!("wrote {}", t.save(&g.out_dir)?.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
