use std::path::Path;

use laguerre_needlets::needlets::{CoeffFn, NeedletCoeffs};
use laguerre_needlets::spaces::corpus::default_corpus;
use laguerre_needlets::spaces::{
    b_cont_per_level, b_norm_cont, b_norm_seq, equivalence_report, f_norm_cont, f_norm_seq, seq_per_level,
    EquivalenceReport, NormParams,
};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{usage, CliError, CliResult};
use crate::frame::read_json;
use crate::output::{canonical, csv_row, emit, g};
use crate::{NormArgs, SpaceKind};

impl NormArgs {
    pub fn params(&self) -> CliResult<NormParams> {
        Ok(NormParams::new(self.s, self.rho, self.p, self.q)?)
    }
}

enum Input {
    Function(CoeffFn),
    Needlet(NeedletCoeffs),
}

fn read_input(path: &Path) -> CliResult<Input> {
    let v: Value = read_json(path)?;
    let bad = |e: serde_json::Error| CliError::Usage(format!("{}: {e}", path.display()));
    if v.get("provenance").is_some() {
        Ok(Input::Needlet(serde_json::from_value(v).map_err(bad)?))
    } else {
        Ok(Input::Function(serde_json::from_value(v).map_err(bad)?))
    }
}

pub fn norms(cfg: &RunConfig, space: SpaceKind, args: &NormArgs, input: &Path) -> CliResult<()> {
    let params = args.params()?;
    let sys = cfg.system()?;
    let input = read_input(input)?;
    let (norm, per_level) = match space {
        SpaceKind::FSeq | SpaceKind::BSeq => {
            let h = match input {
                Input::Needlet(h) => h,
                Input::Function(f) => sys.analyze(&f)?,
            };
            let norm = if space == SpaceKind::FSeq { f_norm_seq(&h, &params, &sys)? } else { b_norm_seq(&h, &params, &sys)? };
            (norm, seq_per_level(&h, &params, &sys)?)
        }
        SpaceKind::FCont | SpaceKind::BCont => {
            let Input::Function(f) = input else {
                return usage("continuous norms need function coefficients, not needlet coefficients");
            };
            let j = cfg.integration_level();
            let norm = if space == SpaceKind::FCont {
                f_norm_cont(&f, &params, &sys, j)?
            } else {
                b_norm_cont(&f, &params, &sys, j)?
            };
            (norm, b_cont_per_level(&f, &params, &sys, j)?)
        }
    };
    emit(cfg, &canonical(&json!({ "norm": norm, "per_level": per_level }))?)
}

pub fn equivalence_run(cfg: &RunConfig, params: &NormParams, besov: bool, bound: f64) -> CliResult<EquivalenceReport> {
    let sys = cfg.system()?;
    let corpus = default_corpus(sys.alpha(), sys.reconstruction_degree())?;
    Ok(equivalence_report(&sys, params, besov, &corpus, cfg.integration_level(), bound)?)
}

pub fn equivalence_csv(rep: &EquivalenceReport) -> String {
    let mut s = csv_row(["function_id", "cont_norm", "seq_norm", "ratio"].map(String::from));
    for r in &rep.rows {
        s += &csv_row([r.function_id.clone(), g(r.cont_norm), g(r.seq_norm), g(r.ratio)]);
    }
    s
}

pub fn equivalence(cfg: &RunConfig, args: &NormArgs, besov: bool, bound: f64) -> CliResult<()> {
    let rep = equivalence_run(cfg, &args.params()?, besov, bound)?;
    emit(cfg, &equivalence_csv(&rep))?;
    if !rep.pass {
        return Err(CliError::Tolerance(format!("bracket width {} exceeds {bound}", rep.width)));
    }
    Ok(())
}
