//! Batch command-line front-end shared by the `osmofuse` binary and tests.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::baselines::{
    linear_osmosis, osmosis_fuse, osmosis_fuse_from, poisson_edit, Mask, OsmosisEvolutionConfig, OsmosisRun,
    PoissonResult, SolverConfig, TimeScheme, POISSON_DEFAULT,
};
use crate::error::{FusionError, Result};
use crate::image::{AlphaMap, ModelWeights};
use crate::io::{blur_alpha, load_alpha, load_image, save_png};
use crate::metrics::{chroma_error_norm, write_metrics_csv, ChromaNorm};
use crate::solvers::{ipiano_fuse, FusionResult, IPianoConfig, InitChoice, PdConfig};

#[derive(Debug, Parser)]
#[command(name = "osmofuse", version, about = "Variational osmosis image fusion and baselines")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fuse a foreground into a background with the joint osmosis model
    Fuse(FuseArgs),
    /// Run linear osmosis (steady state or alpha-blended drift fusion)
    Osmosis(OsmosisArgs),
    /// Poisson seamless cloning of the masked foreground region
    Poisson(PoissonArgs),
    /// Chromaticity error report between two RGB images
    Metrics(MetricsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    F,
    Convex,
    Average,
}

impl From<InitArg> for InitChoice {
    fn from(a: InitArg) -> Self {
        match a {
            InitArg::F => InitChoice::Foreground,
            InitArg::Convex => InitChoice::Convex,
            InitArg::Average => InitChoice::Average,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Explicit,
    Implicit,
}

#[derive(Debug, Clone, Args)]
pub struct FuseArgs {
    /// Foreground image f
    #[arg(long = "fg")]
    pub foreground: PathBuf,
    /// Background image b
    #[arg(long = "bg")]
    pub background: PathBuf,
    /// Alpha map (grayscale, white selects the foreground)
    #[arg(long)]
    pub alpha: PathBuf,
    /// Output fused image (8-bit PNG)
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    #[arg(long, default_value_t = 100.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Huber threshold
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.4)]
    pub beta1: f64,
    #[arg(long, default_value_t = 0.4)]
    pub beta2: f64,
    /// Relative energy change at which the outer loop stops
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub maxiter: usize,
    /// Relative primal-dual gap of the inner solver
    #[arg(long, default_value_t = 1e-4)]
    pub inner_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub inner_maxiter: usize,
    /// Positivity floor applied to the inputs
    #[arg(long, default_value_t = 1.0)]
    pub offset: f64,
    #[arg(long, value_enum, default_value_t = InitArg::F)]
    pub init: InitArg,
    /// Gaussian blur sigma for the alpha map (0 disables)
    #[arg(long, default_value_t = 0.0)]
    pub alpha_blur: f64,
    /// Energy trace CSV
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Save the estimated guide image v
    #[arg(long)]
    pub save_v: Option<PathBuf>,
    /// Chromaticity error of the result against the foreground (RGB only)
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

impl FuseArgs {
    pub fn weights(&self) -> ModelWeights {
        ModelWeights { eta: self.eta, mu: self.mu, gamma: self.gamma, eps: self.eps, offset: self.offset }
    }

    pub fn ipiano(&self) -> IPianoConfig {
        IPianoConfig {
            beta1: self.beta1,
            beta2: self.beta2,
            tol: self.tol,
            maxiter: self.maxiter,
            ..IPianoConfig::default()
        }
    }

    pub fn primal_dual(&self) -> PdConfig {
        PdConfig { inner_tol: self.inner_tol, inner_maxiter: self.inner_maxiter, ..PdConfig::default() }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OsmosisArgs {
    /// Initial image u0 (default: alpha-convex combination of fg and bg)
    #[arg(long)]
    pub u0: Option<PathBuf>,
    /// Guide image v whose drift drives the evolution
    #[arg(long, conflicts_with_all = ["foreground", "background", "alpha"])]
    pub guide: Option<PathBuf>,
    /// Foreground for drift blending
    #[arg(long = "fg", requires_all = ["background", "alpha"])]
    pub foreground: Option<PathBuf>,
    /// Background for drift blending
    #[arg(long = "bg")]
    pub background: Option<PathBuf>,
    /// Alpha map blending the two drifts
    #[arg(long)]
    pub alpha: Option<PathBuf>,
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1000.0)]
    pub time_step: f64,
    #[arg(long, default_value_t = 10_000.0)]
    pub final_time: f64,
    #[arg(long, value_enum, default_value_t = SchemeArg::Implicit)]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 1e-5)]
    pub solver_tol: f64,
    #[arg(long, default_value_t = 500)]
    pub solver_maxiter: usize,
    #[arg(long, default_value_t = 1.0)]
    pub offset: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha_blur: f64,
}

impl OsmosisArgs {
    pub fn evolution(&self) -> OsmosisEvolutionConfig {
        OsmosisEvolutionConfig {
            time_step: self.time_step,
            final_time: self.final_time,
            scheme: match self.scheme {
                SchemeArg::Explicit => TimeScheme::Explicit,
                SchemeArg::Implicit => TimeScheme::Implicit,
            },
            solver: SolverConfig { tol: self.solver_tol, maxiter: self.solver_maxiter },
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PoissonArgs {
    #[arg(long = "fg")]
    pub foreground: PathBuf,
    #[arg(long = "bg")]
    pub background: PathBuf,
    /// Region to clone; pixels above half intensity are inside
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub offset: f64,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    /// First RGB image (e.g. the fused result)
    pub first: PathBuf,
    /// Second RGB image (e.g. the foreground)
    pub second: PathBuf,
    /// Output CSV (stdout when omitted)
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub offset: f64,
}

fn load_alpha_blurred(path: &PathBuf, sigma: f64) -> Result<AlphaMap> {
    blur_alpha(&load_alpha(path)?, sigma)
}

pub fn run_fuse(args: &FuseArgs) -> Result<FusionResult> {
    let weights = args.weights();
    weights.validate()?;
    let f = load_image(&args.foreground, weights.offset)?;
    let b = load_image(&args.background, weights.offset)?;
    let alpha = load_alpha_blurred(&args.alpha, args.alpha_blur)?;
    let result =
        ipiano_fuse(&f, &b, &alpha, &weights, &args.ipiano(), &args.primal_dual(), args.init.into())?;
    log::info!(
        "fuse: {} iterations, converged = {}, E = {:.6e}",
        result.trace.rows.len(),
        result.trace.converged,
        result.trace.last_energy().total
    );
    save_png(&result.u.clamp(0.0, 255.0), &args.out)?;
    if let Some(p) = &args.save_v {
        save_png(&result.v.clamp(0.0, 255.0), p)?;
    }
    if let Some(p) = &args.trace {
        result.trace.write_csv(BufWriter::new(File::create(p)?))?;
    }
    if let Some(p) = &args.metrics {
        let norm = chroma_error_norm(&result.u, &f)?;
        write_metrics_csv(&norm, BufWriter::new(File::create(p)?))?;
    }
    Ok(result)
}

pub fn run_osmosis(args: &OsmosisArgs) -> Result<OsmosisRun> {
    let cfg = args.evolution();
    let run = if let Some(g) = &args.guide {
        let v = load_image(g, args.offset)?;
        let u0 = match &args.u0 {
            Some(p) => load_image(p, args.offset)?,
            None => v.map_channels(|c| c.map(|_| c.mean())),
        };
        linear_osmosis(&u0, &v, &cfg)?
    } else {
        let (Some(fp), Some(bp), Some(ap)) = (&args.foreground, &args.background, &args.alpha) else {
            return Err(FusionError::InvalidParameter {
                name: "osmosis inputs",
                reason: "give either --guide or all of --fg, --bg and --alpha".into(),
            });
        };
        let f = load_image(fp, args.offset)?;
        let b = load_image(bp, args.offset)?;
        let alpha = load_alpha_blurred(ap, args.alpha_blur)?;
        match &args.u0 {
            Some(p) => osmosis_fuse_from(&load_image(p, args.offset)?, &f, &b, &alpha, &cfg)?,
            None => osmosis_fuse(&f, &b, &alpha, &cfg)?,
        }
    };
    save_png(&run.image.clamp(0.0, 255.0), &args.out)?;
    Ok(run)
}

pub fn run_poisson(args: &PoissonArgs) -> Result<PoissonResult> {
    let f = load_image(&args.foreground, args.offset)?;
    let b = load_image(&args.background, args.offset)?;
    let mask = Mask::threshold(load_alpha(&args.mask)?.field(), 0.5);
    let result = poisson_edit(&f, &b, &mask, &POISSON_DEFAULT)?;
    save_png(&result.image.clamp(0.0, 255.0), &args.out)?;
    Ok(result)
}

pub fn run_metrics(args: &MetricsArgs) -> Result<ChromaNorm> {
    let a = load_image(&args.first, args.offset)?;
    let b = load_image(&args.second, args.offset)?;
    let norm = chroma_error_norm(&a, &b)?;
    match &args.out {
        Some(p) => write_metrics_csv(&norm, BufWriter::new(File::create(p)?))?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_metrics_csv(&norm, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(norm)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Fuse(a) => run_fuse(a).map(drop),
        Command::Osmosis(a) => run_osmosis(a).map(drop),
        Command::Poisson(a) => run_poisson(a).map(drop),
        Command::Metrics(a) => run_metrics(a).map(drop),
    }
}

/// Process exit status for an error: 2 for numerical failures, 1 otherwise.
pub fn exit_code(err: &FusionError) -> i32 {
    if err.is_numeric() {
        2
    } else {
        1
    }
}
