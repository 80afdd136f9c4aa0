use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod error;
mod frame;
mod norms;
mod output;
mod report;

use config::{parse_list, Format, RunConfig};
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "lagnet", version, about = "Laguerre needlet frames on the positive orthant")]
struct Cli {
    /// Worker threads for parallel library calls.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand that produces one artifact.
#[derive(Args, Clone, Default)]
struct Common {
    /// Base run configuration; flags override its values.
    #[arg(long, visible_alias = "system")]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Clone, Default)]
struct SystemArgs {
    /// Comma-separated list, one entry per axis or a single broadcast value.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "J", visible_alias = "levels")]
    levels: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    c_star: Option<f64>,
    /// `type_a:v`, `type_b:u,v`, `window:r0,r1,f0,f1` or `frame-default`.
    #[arg(long)]
    cutoff: Option<String>,
    #[arg(long, conflicts_with = "dual")]
    tight: bool,
    #[arg(long)]
    dual: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    j_int: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KernelKind {
    Lambda,
    LambdaTilde,
    LambdaStar,
    LambdaDeriv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SpaceKind {
    #[value(name = "f-seq")]
    FSeq,
    #[value(name = "b-seq")]
    BSeq,
    #[value(name = "F-cont")]
    FCont,
    #[value(name = "B-cont")]
    BCont,
}

#[derive(Args, Clone)]
pub struct NormArgs {
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    #[arg(long, allow_hyphen_values = true)]
    rho: f64,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Gauss-Laguerre rule with cubature coefficients.
    Quadrature {
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Level-j cubature grid with its tiles.
    Grid {
        #[arg(long)]
        level: u32,
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Kernel values on a grid of `x` and `y` points.
    KernelEval {
        #[arg(long, value_enum, default_value = "lambda")]
        kernel: KernelKind,
        #[arg(long)]
        n: usize,
        /// Points separated by `;`, coordinates by `,`.
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Differentiated axis for `lambda-deriv`, counted from 0.
        #[arg(long, default_value_t = 0)]
        axis: usize,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long)]
        cutoff: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Localization diagnostics of the kernel in one dimension.
    KernelDecay {
        /// Comma-separated degrees.
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        cutoff: Option<String>,
        /// Measure the first-axis derivative instead.
        #[arg(long)]
        derivative: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Normalized diagonal sum on the oscillatory range.
    LowerBound {
        #[arg(long)]
        n: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        cutoff: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Reconstruction and Parseval checks of a needlet system.
    FrameVerify {
        #[command(flatten)]
        sys: SystemArgs,
        /// Scale the synthesis cut-off to break reconstruction.
        #[arg(long)]
        corrupt: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Needlet analysis and synthesis.
    Transform {
        #[command(subcommand)]
        op: TransformOp,
    },
    /// Sequence or continuous Triebel-Lizorkin and Besov norms.
    Norms {
        #[arg(long, value_enum)]
        space: SpaceKind,
        #[command(flatten)]
        params: NormArgs,
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Continuous-to-sequence norm ratios over the built-in corpus.
    EquivalenceReport {
        #[command(flatten)]
        params: NormArgs,
        /// Besov norms instead of Triebel-Lizorkin.
        #[arg(long)]
        besov: bool,
        #[arg(long, default_value_t = laguerre_needlets::spaces::DEFAULT_BRACKET_BOUND)]
        bound: f64,
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Runs the diagnostic suites into a bundle directory.
    Report {
        config: PathBuf,
        /// Comma-separated suite names.
        #[arg(long)]
        only: Option<String>,
        #[arg(long, default_value = "report")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum TransformOp {
    /// Function coefficients to needlet coefficients.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Needlet coefficients back to function coefficients.
    Synthesize {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        common: Common,
    },
}

impl Common {
    fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        Ok(cfg)
    }
}

impl SystemArgs {
    fn apply(&self, cfg: &mut RunConfig) -> CliResult<()> {
        if let Some(a) = &self.alpha {
            cfg.alpha = parse_list(a)?;
            if self.d.is_none() && cfg.alpha.len() > 1 {
                cfg.d = cfg.alpha.len();
            }
        }
        if let Some(d) = self.d {
            cfg.d = d;
        }
        if let Some(j) = self.levels {
            cfg.levels = j;
        }
        if let Some(x) = self.delta {
            cfg.delta = x;
        }
        if let Some(x) = self.c_star {
            cfg.c_star = x;
        }
        if let Some(c) = &self.cutoff {
            cfg.cutoff = c.parse()?;
        }
        if self.tight {
            cfg.tight = true;
        }
        if self.dual {
            cfg.tight = false;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if self.j_int.is_some() {
            cfg.j_int = self.j_int;
        }
        Ok(())
    }
}

fn resolve(common: &Common, sys: &SystemArgs) -> CliResult<RunConfig> {
    let mut cfg = common.resolve()?;
    sys.apply(&mut cfg)?;
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure {t} threads: {e}")))?;
    }
    match cli.command {
        Command::Quadrature { n, alpha, common } => commands::quadrature(&common.resolve()?, n, alpha),
        Command::Grid { level, sys, common } => commands::grid(&resolve(&common, &sys)?, level),
        Command::KernelEval { kernel, n, x, y, axis, alpha, cutoff, common } => {
            let mut cfg = common.resolve()?;
            if let Some(a) = alpha {
                cfg.alpha = parse_list(&a)?;
            }
            if let Some(c) = cutoff {
                cfg.kernel_cutoff = c.parse()?;
            }
            commands::kernel_eval(&cfg, kernel, n, &x, &y, axis)
        }
        Command::KernelDecay { n, alpha, sigma, cutoff, derivative, common } => {
            let mut cfg = common.resolve()?;
            if let Some(n) = n {
                cfg.decay_degrees = parse_list(&n)?;
            }
            if let Some(a) = alpha {
                cfg.alpha = vec![a];
                cfg.d = 1;
            }
            if let Some(s) = sigma {
                cfg.sigma = s;
            }
            if let Some(c) = cutoff {
                cfg.kernel_cutoff = c.parse()?;
            }
            commands::kernel_decay(&cfg, derivative)
        }
        Command::LowerBound { n, alpha, delta, points, cutoff, common } => {
            let mut cfg = common.resolve()?;
            if let Some(n) = n {
                cfg.lower_bound_degrees = parse_list(&n)?;
            }
            if let Some(a) = alpha {
                cfg.alpha = parse_list(&a)?;
                cfg.d = cfg.alpha.len();
            }
            if let Some(x) = delta {
                cfg.lower_bound_delta = x;
            }
            if let Some(p) = points {
                cfg.lower_bound_points = p;
            }
            if let Some(c) = cutoff {
                cfg.kernel_cutoff = c.parse()?;
            }
            commands::lower_bound(&cfg)
        }
        Command::FrameVerify { sys, corrupt, common } => frame::frame_verify(&resolve(&common, &sys)?, corrupt),
        Command::Transform { op: TransformOp::Analyze { input, sys, common } } => {
            frame::analyze(&resolve(&common, &sys)?, &input)
        }
        Command::Transform { op: TransformOp::Synthesize { input, sys, common } } => {
            frame::synthesize(&resolve(&common, &sys)?, &input)
        }
        Command::Norms { space, params, input, sys, common } => {
            norms::norms(&resolve(&common, &sys)?, space, &params, &input)
        }
        Command::EquivalenceReport { params, besov, bound, sys, common } => {
            norms::equivalence(&resolve(&common, &sys)?, &params, besov, bound)
        }
        Command::Report { config, only, out } => report::report(&config, only.as_deref(), &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", CliError::Usage(e.render().to_string().trim().to_string()).to_json());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
