//! Diagnostic suites bundled into one directory.

use std::path::Path;

use laguerre_needlets::kernels::{lambda_deriv, lambda_kernel, CutoffPair};
use laguerre_needlets::needlets::{CoeffFn, NeedletCoeffs};
use laguerre_needlets::quadrature::cubature_grid;
use laguerre_needlets::spaces::{b_norm_seq, f_norm_seq, nikolskii_report, NormParams, DEFAULT_BRACKET_BOUND};
use laguerre_needlets::special_fn::{laguerre_fn_batch, laguerre_fn_f, laguerre_fn_f_deriv};
use laguerre_needlets::LaguerreFamily;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::commands::{cached_rule, decay_table, lower_bound_json, DECAY_RATIO_TOL};
use crate::config::{CutoffParam, RunConfig};
use crate::error::{usage, CliError, CliResult};
use crate::frame::frame_check;
use crate::norms::equivalence_run;
use crate::output::{canonical, config_json, csv_row, g, metadata_json, write_file};

pub const SUITES: [&str; 10] = [
    "quadrature",
    "orthonormality",
    "cubature",
    "frame",
    "kernel-decay",
    "lower-bound",
    "nikolskii",
    "equivalence",
    "derivatives",
    "degenerate-norms",
];

struct Suite {
    pass: bool,
    tolerance: String,
    files: Vec<(String, String)>,
    detail: Value,
}

fn distinct_alphas(cfg: &RunConfig) -> Vec<f64> {
    let mut v = cfg.alpha.clone();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn quadrature_suite(cfg: &RunConfig) -> CliResult<Suite> {
    const TOL: f64 = 1e-10;
    let mut csv = csv_row(["n", "alpha", "max_rel_err"].map(String::from));
    let mut worst = 0.0f64;
    for &n in &cfg.quadrature_degrees {
        for &alpha in &distinct_alphas(cfg) {
            let rule = cached_rule(n, alpha)?;
            let mut ln_gamma = statrs::function::gamma::ln_gamma(alpha + 1.0);
            let mut err = 0.0f64;
            for k in 0..2 * n {
                if k > 0 {
                    ln_gamma += (k as f64 + alpha).ln();
                }
                let logs: Vec<f64> =
                    rule.nodes.iter().zip(&rule.log_weights).map(|(t, lw)| lw + k as f64 * t.ln()).collect();
                let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lse = m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
                err = err.max((lse - ln_gamma).exp_m1().abs());
            }
            worst = worst.max(err);
            csv += &csv_row([n.to_string(), g(alpha), g(err)]);
        }
    }
    Ok(Suite {
        pass: worst < TOL,
        tolerance: format!("relative moment error < {}", g(TOL)),
        files: vec![("quadrature.csv".into(), csv)],
        detail: json!({ "max_rel_err": worst }),
    })
}

fn orthonormality_suite(cfg: &RunConfig) -> CliResult<Suite> {
    const TOL: f64 = 1e-8;
    const N: usize = 64;
    let alpha = cfg.alpha_vector()?;
    // per-axis Gram matrices; the tensor Gram is their Kronecker product
    let grams: Vec<Vec<Vec<f64>>> = alpha
        .as_slice()
        .iter()
        .map(|&a| {
            let rule = cached_rule(N + 1, a)?;
            let tables: Vec<Vec<f64>> = rule
                .sqrt_nodes
                .iter()
                .map(|&x| laguerre_fn_batch(N as i64, a, x, LaguerreFamily::F))
                .collect::<Result<_, _>>()?;
            Ok((0..=N)
                .map(|k| {
                    (0..=N)
                        .map(|l| tables.iter().zip(&rule.cub_coeffs).map(|(t, c)| c * t[k] * t[l]).sum())
                        .collect()
                })
                .collect())
        })
        .collect::<CliResult<_>>()?;
    let mut csv = csv_row(["axis", "alpha", "max_dev"].map(String::from));
    let mut axis_dev = Vec::new();
    let mut axis_max = Vec::new();
    for (l, gm) in grams.iter().enumerate() {
        let mut dev = 0.0f64;
        let mut big = 0.0f64;
        for (k, row) in gm.iter().enumerate() {
            for (m, v) in row.iter().enumerate() {
                dev = dev.max((v - if k == m { 1.0 } else { 0.0 }).abs());
                big = big.max(v.abs());
            }
        }
        csv += &csv_row([l.to_string(), g(alpha.as_slice()[l]), g(dev)]);
        axis_dev.push(dev);
        axis_max.push(big);
    }
    // |G1 (x) G2 - I| <= sum over axes of the per-axis defect times the other factors' sup
    let bound: f64 = (0..grams.len())
        .map(|l| axis_dev[l] * axis_max.iter().enumerate().filter(|(m, _)| *m != l).map(|(_, b)| b).product::<f64>())
        .sum();
    Ok(Suite {
        pass: bound < TOL,
        tolerance: format!("max |G - I| < {} for degrees <= {N}", g(TOL)),
        files: vec![("orthonormality.csv".into(), csv)],
        detail: json!({ "max_dev": bound }),
    })
}

fn cubature_suite(cfg: &RunConfig) -> CliResult<Suite> {
    const TOL: f64 = 1e-9;
    let alpha = cfg.alpha_vector()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut csv = csv_row(["trial", "level", "l", "m", "rel_err"].map(String::from));
    let mut worst = 0.0f64;
    let top_level = cfg.levels.min(3) as u32;
    for trial in 0..cfg.trials {
        let j = trial as u32 % (top_level + 1);
        let grid = cubature_grid(j, &alpha, cfg.delta, cfg.c_star)?;
        let top = 2 * grid.n - 1;
        let l = rng.random_range(0..=top);
        let m = rng.random_range(0..=top - l);
        let f = CoeffFn::random_complex(&alpha, l, &mut rng)?;
        let h = CoeffFn::random_complex(&alpha, m, &mut rng)?;
        let (fv, hv) = (f.evaluate_on_grid(&grid)?, h.evaluate_on_grid(&grid)?);
        let cub: Complex64 = fv.iter().zip(&hv).zip(grid.coeffs()).map(|((a, b), c)| a * b.conj() * c).sum();
        let exact: Complex64 = f.entries().iter().map(|(nu, v)| v * h.get(nu.as_slice()).conj()).sum();
        let err = (cub - exact).norm() / (f.norm_l2() * h.norm_l2());
        worst = worst.max(err);
        csv += &csv_row([trial.to_string(), j.to_string(), l.to_string(), m.to_string(), g(err)]);
    }
    Ok(Suite {
        pass: worst < TOL,
        tolerance: format!("|cubature - exact| / (||f|| ||g||) < {}", g(TOL)),
        files: vec![("cubature.csv".into(), csv)],
        detail: json!({ "max_rel_err": worst }),
    })
}

fn frame_suite(cfg: &RunConfig) -> CliResult<Suite> {
    let out = frame_check(cfg, false)?;
    Ok(Suite {
        pass: out.pass,
        tolerance: "see tolerances in frame.json".into(),
        detail: json!({
            "reconstruction_max_err": out.report["reconstruction_max_err"],
            "parseval_max_err": out.report["parseval_max_err"],
        }),
        files: vec![("frame.json".into(), canonical(&out.report)?)],
    })
}

fn decay_suite(cfg: &RunConfig) -> CliResult<Suite> {
    let out = decay_table(cfg, false)?;
    Ok(Suite {
        pass: out.ratio < DECAY_RATIO_TOL && out.bounded,
        tolerance: format!("fitted constants within x{DECAY_RATIO_TOL}, envelope bounds every sample"),
        detail: json!({ "ratio": out.ratio, "bounded": out.bounded }),
        files: vec![("kernel-decay.csv".into(), out.csv)],
    })
}

fn lower_bound_suite(cfg: &RunConfig) -> CliResult<Suite> {
    let (v, pass) = lower_bound_json(cfg)?;
    Ok(Suite {
        pass,
        tolerance: "minimum > 0, minima within [0.5, 1.5] of the first degree".into(),
        detail: json!({ "min_ratios": v["min_ratios"] }),
        files: vec![("lower-bound.json".into(), canonical(&v)?)],
    })
}

fn nikolskii_suite(cfg: &RunConfig) -> CliResult<Suite> {
    let rep = nikolskii_report(&cfg.nikolskii_degrees, &cfg.alpha_vector()?, 4.0, 2.0, 0.0, cfg.trials, cfg.seed)?;
    let finite = rep.rows.iter().all(|r| r.ratio_plain.is_finite() && r.ratio_weighted.is_finite());
    Ok(Suite {
        pass: finite,
        tolerance: "measured exponents are reported, not asserted".into(),
        detail: json!({ "exponent_plain": rep.exponent_plain, "exponent_weighted": rep.exponent_weighted }),
        files: vec![("nikolskii.json".into(), canonical(&rep)?)],
    })
}

/// Second admissible cut-off used for the stability check.
fn alternate_cutoff(cfg: &RunConfig) -> CutoffParam {
    let alt = CutoffParam::Window { r0: 0.25, r1: 0.3, f0: 2.5, f1: 4.0 };
    if cfg.cutoff == alt {
        CutoffParam::frame_default()
    } else {
        alt
    }
}

fn equivalence_suite(cfg: &RunConfig) -> CliResult<Suite> {
    const DRIFT: f64 = 2.0;
    let sets = [
        (0.0, 0.0, 2.0, 2.0, false),
        (1.0, 1.0, 2.0, 2.0, false),
        (0.5, 0.5, 1.5, 1.0, false),
        (0.0, 0.0, 2.0, 2.0, true),
        (1.0, 1.0, 2.0, 2.0, true),
        (0.5, 0.5, 1.5, 1.0, true),
        (0.0, 0.0, 3.0, f64::INFINITY, true),
    ];
    let alt = RunConfig { cutoff: alternate_cutoff(cfg), ..cfg.clone() };
    let mut csv = csv_row(
        ["space", "s", "rho", "p", "q", "cutoff", "function_id", "cont_norm", "seq_norm", "ratio"].map(String::from),
    );
    let mut pass = true;
    let mut widest = 0.0f64;
    let mut drift = 1.0f64;
    for (s, rho, p, q, besov) in sets {
        let params = NormParams::new(s, rho, p, q)?;
        let reps = [cfg, &alt]
            .iter()
            .map(|c| equivalence_run(c, &params, besov, DEFAULT_BRACKET_BOUND))
            .collect::<CliResult<Vec<_>>>()?;
        for (c, rep) in [cfg, &alt].iter().zip(&reps) {
            pass &= rep.pass && rep.skipped.is_empty();
            widest = widest.max(rep.width);
            for r in &rep.rows {
                csv += &csv_row([
                    if besov { "B" } else { "F" }.to_string(),
                    g(s),
                    g(rho),
                    g(p),
                    g(q),
                    c.cutoff.to_string(),
                    r.function_id.clone(),
                    g(r.cont_norm),
                    g(r.seq_norm),
                    g(r.ratio),
                ]);
            }
        }
        for x in [reps[0].min_ratio / reps[1].min_ratio, reps[0].max_ratio / reps[1].max_ratio] {
            drift = drift.max(x.max(1.0 / x));
        }
    }
    pass &= drift <= DRIFT;
    Ok(Suite {
        pass,
        tolerance: format!("bracket width <= {DEFAULT_BRACKET_BOUND}, endpoints within x{DRIFT} across cut-offs"),
        detail: json!({ "widest": widest, "drift": drift }),
        files: vec![("equivalence.csv".into(), csv)],
    })
}

fn derivatives_suite(cfg: &RunConfig) -> CliResult<Suite> {
    const TOL: f64 = 1e-5;
    const H: f64 = 1e-5;
    let alpha = cfg.alpha_vector()?;
    let a_hat = cfg.kernel_cutoff.spec()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut csv = csv_row(["probe", "kind", "value", "finite_difference", "rel_err"].map(String::from));
    let mut worst = 0.0f64;
    for probe in 0..200 {
        let (kind, d, fd) = if probe % 2 == 0 {
            let n = rng.random_range(1..=200usize);
            let a = alpha.as_slice()[rng.random_range(0..alpha.dim())];
            let x = rng.random_range(0.05..1.8 * (n as f64).sqrt());
            let d = laguerre_fn_f_deriv(n as i64, a, x)?;
            (format!("F_{n}'"), d, (laguerre_fn_f(n, a, x + H)? - laguerre_fn_f(n, a, x - H)?) / (2.0 * H))
        } else {
            let axis = rng.random_range(0..alpha.dim());
            let x: Vec<f64> = (0..alpha.dim()).map(|_| rng.random_range(0.05..10.0)).collect();
            let y: Vec<f64> = (0..alpha.dim()).map(|_| rng.random_range(0.05..10.0)).collect();
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[axis] += H;
            xm[axis] -= H;
            let d = lambda_deriv(64, &alpha, &a_hat, &x, &y, axis)?;
            let fd = (lambda_kernel(64, &alpha, &a_hat, &xp, &y)? - lambda_kernel(64, &alpha, &a_hat, &xm, &y)?) / (2.0 * H);
            (format!("dLambda_64/dx_{axis}"), d, fd)
        };
        let err = (d - fd).abs() / d.abs();
        worst = worst.max(err);
        csv += &csv_row([probe.to_string(), kind, g(d), g(fd), g(err)]);
    }
    Ok(Suite {
        pass: worst < TOL,
        tolerance: format!("relative error against central differences (h = {}) < {}", g(H), g(TOL)),
        files: vec![("derivatives.csv".into(), csv)],
        detail: json!({ "max_rel_err": worst }),
    })
}

fn degenerate_suite(cfg: &RunConfig) -> CliResult<Suite> {
    const TOL: f64 = 1e-12;
    let sys = cfg.system()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut csv = csv_row(["trial", "s", "rho", "p", "f_norm", "b_norm", "rel_diff"].map(String::from));
    let mut worst = 0.0f64;
    for trial in 0..cfg.trials {
        let mut h: NeedletCoeffs = sys.zero_coeffs();
        for v in h.levels.iter_mut().flatten() {
            *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let (s, rho, p) = (rng.random_range(-1.0..2.0), rng.random_range(-1.0..1.0), rng.random_range(0.5..4.0));
        let params = NormParams::new(s, rho, p, p)?;
        let (f, b) = (f_norm_seq(&h, &params, &sys)?, b_norm_seq(&h, &params, &sys)?);
        let err = (f - b).abs() / b;
        worst = worst.max(err);
        csv += &csv_row([trial.to_string(), g(s), g(rho), g(p), g(f), g(b), g(err)]);
    }
    Ok(Suite {
        pass: worst < TOL,
        tolerance: format!("relative difference < {}", g(TOL)),
        files: vec![("degenerate-norms.csv".into(), csv)],
        detail: json!({ "max_rel_diff": worst }),
    })
}

fn run_suite(name: &str, cfg: &RunConfig) -> CliResult<Suite> {
    match name {
        "quadrature" => quadrature_suite(cfg),
        "orthonormality" => orthonormality_suite(cfg),
        "cubature" => cubature_suite(cfg),
        "frame" => frame_suite(cfg),
        "kernel-decay" => decay_suite(cfg),
        "lower-bound" => lower_bound_suite(cfg),
        "nikolskii" => nikolskii_suite(cfg),
        "equivalence" => equivalence_suite(cfg),
        "derivatives" => derivatives_suite(cfg),
        "degenerate-norms" => degenerate_suite(cfg),
        _ => usage(format!("unknown suite `{name}`")),
    }
}

/// The pair a config resolves to, validated before any suite runs.
fn check_pair(cfg: &RunConfig) -> CliResult<CutoffPair> {
    cfg.alpha_vector()?;
    cfg.kernel_cutoff.spec()?;
    cfg.pair()
}

pub fn report(config: &Path, only: Option<&str>, out: &Path) -> CliResult<()> {
    let cfg = RunConfig::load(config)?;
    let names: Vec<String> = match only {
        Some(list) => {
            let v: Vec<String> = list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            if let Some(bad) = v.iter().find(|s| !SUITES.contains(&s.as_str())) {
                return usage(format!("unknown suite `{bad}`; known: {}", SUITES.join(", ")));
            }
            v
        }
        None => SUITES.iter().map(|s| s.to_string()).collect(),
    };
    check_pair(&cfg)?;
    let mut entries = Vec::new();
    let mut all_pass = true;
    for name in &names {
        let entry = match run_suite(name, &cfg) {
            Ok(suite) => {
                for (file, body) in &suite.files {
                    write_file(&out.join(file), body)?;
                }
                all_pass &= suite.pass;
                json!({
                    "name": name,
                    "status": if suite.pass { "pass" } else { "fail" },
                    "tolerance": suite.tolerance,
                    "files": suite.files.iter().map(|f| f.0.clone()).collect::<Vec<_>>(),
                    "detail": suite.detail,
                })
            }
            Err(e) => {
                all_pass = false;
                json!({ "name": name, "status": "error", "message": e.to_string(), "files": [] })
            }
        };
        entries.push(entry);
    }
    let summary = json!({ "config": config_json(&cfg), "suites": entries, "pass": all_pass });
    write_file(&out.join("summary.json"), &canonical(&summary)?)?;
    write_file(&out.join("config.txt"), &cfg.to_text())?;
    write_file(&out.join("meta.json"), &metadata_json()?)?;
    if !all_pass {
        return Err(CliError::Tolerance(format!("one or more suites failed; see {}", out.join("summary.json").display())));
    }
    Ok(())
}
