use std::path::Path;

use laguerre_needlets::needlets::{CoeffFn, NeedletCoeffs, NeedletSystem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde_json::json;

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{canonical, config_json, emit};

pub const RECONSTRUCTION_TOL: f64 = 1e-9;
pub const PARSEVAL_TOL: f64 = 1e-10;
pub const TIGHT_BOUNDS_TOL: f64 = 1e-8;
/// Factor applied to the synthesis cut-off by `--corrupt`.
pub const CORRUPTION: f64 = 1.5;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::File { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub struct FrameOutcome {
    pub report: serde_json::Value,
    pub pass: bool,
}

fn corrupted_system(cfg: &RunConfig) -> CliResult<NeedletSystem> {
    let mut pair = cfg.pair()?;
    pair.b_hat = pair.b_hat.scaled(CORRUPTION);
    pair.tight = false;
    cfg.system_with(pair)
}

pub fn frame_check(cfg: &RunConfig, corrupt: bool) -> CliResult<FrameOutcome> {
    let sys = if corrupt { corrupted_system(cfg)? } else { cfg.system()? };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut rec, mut pars) = (0.0f64, 0.0f64);
    for _ in 0..cfg.trials {
        let f = CoeffFn::random_complex(sys.alpha(), sys.reconstruction_degree(), &mut rng)?;
        let h = sys.analyze(&f)?;
        let norm = f.norm_l2();
        rec = rec.max(sys.synthesize(&h)?.max_coeff_diff(&f)? / norm);
        pars = pars.max((h.energy() - norm * norm).abs() / (norm * norm));
    }
    let bounds = sys.frame_bounds(cfg.trials.max(1), cfg.seed)?;
    let tight = sys.tight();
    let mut pass = rec < RECONSTRUCTION_TOL;
    if tight {
        pass &= pars < PARSEVAL_TOL
            && (bounds.a_est - 1.0).abs() < TIGHT_BOUNDS_TOL
            && (bounds.b_est - 1.0).abs() < TIGHT_BOUNDS_TOL;
    }
    let report = json!({
        "config": config_json(cfg),
        "corrupt": corrupt,
        "system_hash": sys.hash(),
        "tight": tight,
        "trials": cfg.trials,
        "reconstruction_degree": sys.reconstruction_degree(),
        "reconstruction_max_err": rec,
        "parseval_max_err": if tight { Some(pars) } else { None },
        "frame_bounds": {"a_est": bounds.a_est, "b_est": bounds.b_est, "trials": bounds.trials},
        "tolerances": {
            "reconstruction": RECONSTRUCTION_TOL,
            "parseval": PARSEVAL_TOL,
            "tight_bounds": TIGHT_BOUNDS_TOL,
        },
        "pass": pass,
    });
    Ok(FrameOutcome { report, pass })
}

pub fn frame_verify(cfg: &RunConfig, corrupt: bool) -> CliResult<()> {
    let out = frame_check(cfg, corrupt)?;
    emit(cfg, &canonical(&out.report)?)?;
    if !out.pass {
        return Err(CliError::Tolerance(format!(
            "frame identities violated: reconstruction {}, parseval {}",
            out.report["reconstruction_max_err"], out.report["parseval_max_err"]
        )));
    }
    Ok(())
}

pub fn analyze(cfg: &RunConfig, input: &Path) -> CliResult<()> {
    let f: CoeffFn = read_json(input)?;
    let sys = cfg.system()?;
    let h = sys.analyze(&f)?;
    let body = match cfg.format {
        Format::Json => canonical(&h)?,
        Format::Csv => h.to_csv(&sys)?,
    };
    emit(cfg, &body)
}

pub fn synthesize(cfg: &RunConfig, input: &Path) -> CliResult<()> {
    let h: NeedletCoeffs = read_json(input)?;
    let f = cfg.system()?.synthesize(&h)?;
    emit(cfg, &canonical(&f)?)
}
