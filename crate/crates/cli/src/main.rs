//! Command-line driver. Each subcommand reproduces one experiment at a
//! configurable scale; every run leaves a JSON manifest beside its outputs.
//!
//! Exit codes: 0 success, 2 usage or bad input, 3 numerical non-convergence
//! or rejection-sampler starvation, 4 missing or unreadable data files.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::Ctx;
use config::{resolve, resolve_required, Config};

#[derive(Parser, Debug)]
#[command(
    name = "twistzeros",
    version,
    about = "Low-lying zeros and central values of quadratic twists vs Haar-random matrix models"
)]
struct Cli {
    /// Flat `key = value` defaults file; explicit flags win over it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Master seed; every draw is addressed as (seed, draw index).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Cache directory (default: <out>/cache). Caches are append-only.
    #[arg(long, global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Numerical tolerance recorded in the manifest.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Draw Haar samples and dump lowest phases and |det(I - A)|.
    SampleEnsemble {
        /// U, SO or USp.
        #[arg(long)]
        group: Option<String>,
        /// Matrix size (even for SO and USp).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        count: Option<usize>,
        /// Also dump every eigenphase of every draw.
        #[arg(long)]
        full_phases: bool,
    },
    /// First zeros of every admissible twist with discriminant up to --x-max.
    ComputeZeros {
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        x_max: Option<i64>,
        /// Zeros per twist.
        #[arg(long)]
        count: Option<usize>,
        /// Search window on the critical line (default grows with count).
        #[arg(long)]
        t_max: Option<f64>,
        /// Family parameter: ignored for principal forms, +-1 for the
        /// self-CM family, the residue class mod M for the non-self-dual one.
        #[arg(long)]
        family_param: Option<i64>,
    },
    /// Central values L(1/2) of every admissible twist.
    CentralValues {
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        x_max: Option<i64>,
        /// direct (approximate functional equation) or kz (theta lift).
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        family_param: Option<i64>,
    },
    /// Grid search for the excised-model cutoff constant c_std.
    EstimateCutoff {
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        x_max: Option<i64>,
        /// Comma-separated ascending candidate values.
        #[arg(long)]
        grid: Option<String>,
        /// zeros (vs excised eigenphases) or values (vs char polys).
        #[arg(long)]
        mode: Option<String>,
        /// Pool of SO(2 n_std) draws shared by all candidates.
        #[arg(long)]
        matrices: Option<usize>,
        /// Candidates keeping fewer samples than this are infeasible.
        #[arg(long)]
        min_kept: Option<usize>,
        #[arg(long)]
        family_param: Option<i64>,
    },
    /// Normalized lowest-zero vs lowest-eigenphase distributions, with the
    /// small/large conductor split and a gnuplot script.
    Compare {
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        x_max: Option<i64>,
        #[arg(long)]
        matrices: Option<usize>,
        /// Histogram bins for the density files.
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        family_param: Option<i64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    use twistzeros::Error;
    if let Some(e) = err.downcast_ref::<Error>() {
        return match e {
            Error::NonConvergence { .. } | Error::RejectionStarved { .. } => 3,
            Error::Io(_) | Error::CoefficientFile { .. } | Error::CoefficientsExhausted { .. } => 4,
            _ => 2,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 4;
    }
    2
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = Config::load(cli.config.as_deref())?;
    let jobs = resolve(cli.jobs, &cfg, "jobs", 0)?;
    if jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let out = resolve(cli.out, &cfg, "out", PathBuf::from("out"))?;
    let cache = match cli.cache_dir {
        Some(c) => c,
        None => cfg.get::<PathBuf>("cache-dir")?.unwrap_or_else(|| out.join("cache")),
    };
    let ctx = Ctx {
        seed: resolve(cli.seed, &cfg, "seed", 1)?,
        out,
        cache,
        tolerance: resolve(cli.tolerance, &cfg, "tolerance", 1e-8)?,
    };
    ctx.prepare()?;

    let started = Instant::now();
    let mut manifest = match cli.cmd {
        Cmd::SampleEnsemble { group, n, count, full_phases } => {
            let group = resolve_required::<String>(group, &cfg, "group")?;
            let n = resolve(n, &cfg, "n", 0_usize)?;
            let count = resolve(count, &cfg, "count", 100)?;
            commands::sample_ensemble(&ctx, &group, n, count, full_phases)?
        }
        Cmd::ComputeZeros { label, x_max, count, t_max, family_param } => {
            let label = resolve_required::<String>(label, &cfg, "label")?;
            let x_max = resolve(x_max, &cfg, "x-max", 1000)?;
            let count = resolve(count, &cfg, "count", 1)?;
            let t_max = match t_max {
                Some(t) => Some(t),
                None => cfg.get("t-max")?,
            };
            let param = resolve(family_param, &cfg, "family-param", 1)?;
            commands::compute_zeros(&ctx, &label, x_max, count, t_max, param)?
        }
        Cmd::CentralValues { label, x_max, method, family_param } => {
            let label = resolve_required::<String>(label, &cfg, "label")?;
            let x_max = resolve(x_max, &cfg, "x-max", 1000)?;
            let method = resolve(method, &cfg, "method", "direct".into())?;
            let param = resolve(family_param, &cfg, "family-param", 1)?;
            commands::central_values(&ctx, &label, x_max, &method, param)?
        }
        Cmd::EstimateCutoff { label, x_max, grid, mode, matrices, min_kept, family_param } => {
            let label = resolve_required::<String>(label, &cfg, "label")?;
            let x_max = resolve(x_max, &cfg, "x-max", 1000)?;
            let grid = resolve_required::<String>(grid, &cfg, "grid")?;
            let mode = resolve(mode, &cfg, "mode", "zeros".into())?;
            let matrices = resolve(matrices, &cfg, "matrices", 1000)?;
            let min_kept = resolve(min_kept, &cfg, "min-kept", 50)?;
            let param = resolve(family_param, &cfg, "family-param", 1)?;
            commands::estimate_cutoff(&ctx, &label, x_max, &grid, &mode, matrices, min_kept, param)?
        }
        Cmd::Compare { label, x_max, matrices, bins, family_param } => {
            let label = resolve_required::<String>(label, &cfg, "label")?;
            let x_max = resolve(x_max, &cfg, "x-max", 1000)?;
            let matrices = resolve(matrices, &cfg, "matrices", 1000)?;
            let bins = resolve(bins, &cfg, "bins", 30)?;
            let param = resolve(family_param, &cfg, "family-param", 1)?;
            commands::compare(&ctx, &label, x_max, matrices, bins, param)?
        }
    };
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    let path = manifest.write(&ctx.out)?;
    println!("manifest: {}", path.display());
    Ok(())
}
