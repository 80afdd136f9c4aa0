use std::path::PathBuf;

use laguerre_needlets::kernels::{
    kernel_decay as decay, lambda_deriv, lambda_kernel, lambda_star, lambda_tilde, lower_bound_check, DecaySpec,
};
use laguerre_needlets::quadrature::{cubature_grid_with, gauss_laguerre, GridOptions, QuadratureRule};
use laguerre_needlets::AlphaVector;
use serde_json::json;

use crate::config::{parse_list, Format, RunConfig};
use crate::error::{usage, CliError, CliResult};
use crate::output::{canonical, config_json, csv_row, emit, g, write_file};
use crate::KernelKind;

pub const CACHE_ENV: &str = "LAGNET_CACHE_DIR";

/// Rule for `(n, alpha)`, read from and stored in the cache directory when one is set.
pub fn cached_rule(n: usize, alpha: f64) -> CliResult<QuadratureRule> {
    let Some(dir) = std::env::var_os(CACHE_ENV).map(PathBuf::from) else {
        return Ok(gauss_laguerre(n, alpha)?);
    };
    let path = dir.join(format!("rule-n{n}-alpha{:016x}.json", alpha.to_bits()));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(rule) = serde_json::from_str::<QuadratureRule>(&text) {
            if rule.n == n && rule.alpha.to_bits() == alpha.to_bits() {
                return Ok(rule);
            }
        }
    }
    let rule = gauss_laguerre(n, alpha)?;
    write_file(&path, &serde_json::to_string(&rule).map_err(laguerre_needlets::Error::from)?)?;
    Ok(rule)
}

pub fn quadrature(cfg: &RunConfig, n: i64, alpha: f64) -> CliResult<()> {
    if n < 1 {
        return usage("n must be ≥ 1");
    }
    let rule = cached_rule(n as usize, alpha)?;
    let body = match cfg.format {
        Format::Json => canonical(&json!({
            "n": rule.n,
            "alpha": rule.alpha,
            "nodes": rule.nodes,
            "log_weights": rule.log_weights,
            "cub_coeffs": rule.cub_coeffs,
        }))?,
        Format::Csv => {
            let mut s = csv_row(["nu", "t", "log_w", "c"].map(String::from));
            for i in 0..rule.n {
                s += &csv_row([
                    (i + 1).to_string(),
                    g(rule.nodes[i]),
                    g(rule.log_weights[i]),
                    g(rule.cub_coeffs[i]),
                ]);
            }
            s
        }
    };
    emit(cfg, &body)
}

pub fn grid(cfg: &RunConfig, level: u32) -> CliResult<()> {
    let alpha = cfg.alpha_vector()?;
    let opts = GridOptions { max_points: cfg.max_points, ..GridOptions::default() };
    let grid = cubature_grid_with(level, &alpha, cfg.delta, cfg.c_star, &opts)?;
    let tiles: Vec<_> = (0..grid.len()).map(|i| grid.tile(i)).collect();
    let body = match cfg.format {
        Format::Json => canonical(&json!({
            "level": grid.level,
            "n": grid.n,
            "alpha": alpha.as_slice(),
            "points": (0..grid.len()).map(|i| grid.point(i)).collect::<Vec<_>>(),
            "coeffs": grid.coeffs(),
            "tiles": tiles.iter().map(|t| json!({"lower": t.lower, "upper": t.upper})).collect::<Vec<_>>(),
            "measures": grid.tile_measures(),
        }))?,
        Format::Csv => {
            let d = grid.dim();
            let mut header = vec!["index".to_string()];
            header.extend((1..=d).map(|l| format!("xi_{l}")));
            header.extend(["c".to_string(), "measure".to_string()]);
            header.extend((1..=d).map(|l| format!("lower_{l}")));
            header.extend((1..=d).map(|l| format!("upper_{l}")));
            let mut s = csv_row(header);
            let (coeffs, mu) = (grid.coeffs(), grid.tile_measures());
            for (i, t) in tiles.iter().enumerate() {
                let mut row = vec![i.to_string()];
                row.extend(grid.point(i).into_iter().map(g));
                row.extend([g(coeffs[i]), g(mu[i])]);
                row.extend(t.lower.iter().map(|&x| g(x)));
                row.extend(t.upper.iter().map(|&x| g(x)));
                s += &csv_row(row);
            }
            s
        }
    };
    emit(cfg, &body)
}

fn parse_points(s: &str) -> CliResult<Vec<Vec<f64>>> {
    let pts: Vec<Vec<f64>> = s.split(';').filter(|p| !p.trim().is_empty()).map(parse_list).collect::<CliResult<_>>()?;
    if pts.is_empty() {
        return usage("no points given");
    }
    if pts.iter().any(|p| p.len() != pts[0].len()) {
        return usage("points have different dimensions");
    }
    Ok(pts)
}

pub fn kernel_eval(cfg: &RunConfig, kind: KernelKind, n: usize, x: &str, y: &str, axis: usize) -> CliResult<()> {
    let (xs, ys) = (parse_points(x)?, parse_points(y)?);
    let d = xs[0].len();
    if ys[0].len() != d {
        return usage(format!("x points have dimension {d}, y points {}", ys[0].len()));
    }
    let cfg = RunConfig { d, ..cfg.clone() };
    let alpha = cfg.alpha_vector()?;
    let a_hat = cfg.kernel_cutoff.spec()?;
    let eval = |x: &[f64], y: &[f64]| -> CliResult<f64> {
        Ok(match kind {
            KernelKind::Lambda => lambda_kernel(n, &alpha, &a_hat, x, y)?,
            KernelKind::LambdaTilde => lambda_tilde(n, &alpha, &a_hat, x, y)?,
            KernelKind::LambdaStar => lambda_star(n, &alpha, &a_hat, x, y)?,
            KernelKind::LambdaDeriv => lambda_deriv(n, &alpha, &a_hat, x, y, axis)?,
        })
    };
    let values: Vec<Vec<f64>> =
        xs.iter().map(|x| ys.iter().map(|y| eval(x, y)).collect::<CliResult<_>>()).collect::<CliResult<_>>()?;
    let name = match kind {
        KernelKind::Lambda => "lambda",
        KernelKind::LambdaTilde => "lambda-tilde",
        KernelKind::LambdaStar => "lambda-star",
        KernelKind::LambdaDeriv => "lambda-deriv",
    };
    let body = canonical(&json!({
        "kernel": name,
        "n": n,
        "alpha": alpha.as_slice(),
        "cutoff": a_hat.label(),
        "axis": if kind == KernelKind::LambdaDeriv { Some(axis) } else { None },
        "x": xs,
        "y": ys,
        "values": values,
    }))?;
    emit(&cfg, &body)
}

/// Largest tolerated spread of fitted constants across degrees.
pub const DECAY_RATIO_TOL: f64 = 2.0;

pub struct DecayOutcome {
    pub csv: String,
    pub ratio: f64,
    pub bounded: bool,
}

pub fn decay_table(cfg: &RunConfig, derivative: bool) -> CliResult<DecayOutcome> {
    if cfg.decay_degrees.is_empty() {
        return usage("no degrees given");
    }
    let alpha = AlphaVector::new(vec![cfg.alpha[0]])?;
    let a_hat = cfg.kernel_cutoff.spec()?;
    let spec = DecaySpec { sigma: cfg.sigma, derivative, ..DecaySpec::default() };
    let reports = cfg.decay_degrees.iter().map(|&n| decay(n, &alpha, &a_hat, &spec)).collect::<Result<Vec<_>, _>>()?;
    let hi = reports.iter().map(|r| r.fitted_c).fold(0.0, f64::max);
    let lo = reports.iter().map(|r| r.fitted_c).fold(f64::INFINITY, f64::min);
    let mut csv = csv_row(["n", "sigma", "separation", "normalized_value", "bound_value", "fitted_c"].map(String::from));
    for r in &reports {
        for s in &r.samples {
            csv += &csv_row([r.n.to_string(), g(r.sigma), g(s.separation), g(s.normalized), g(s.bound), g(r.fitted_c)]);
        }
    }
    Ok(DecayOutcome { csv, ratio: hi / lo, bounded: reports.iter().all(|r| r.bounded_by(hi)) })
}

pub fn kernel_decay(cfg: &RunConfig, derivative: bool) -> CliResult<()> {
    let out = decay_table(cfg, derivative)?;
    emit(cfg, &out.csv)?;
    if !(out.ratio < DECAY_RATIO_TOL && out.bounded) {
        return Err(CliError::Tolerance(format!(
            "fitted constants vary by x{:.3} (tolerance x{DECAY_RATIO_TOL}), envelope holds: {}",
            out.ratio, out.bounded
        )));
    }
    Ok(())
}

/// Relative band within which minima across degrees must stay.
pub const LOWER_BOUND_BAND: (f64, f64) = (0.5, 1.5);

pub fn lower_bound_json(cfg: &RunConfig) -> CliResult<(serde_json::Value, bool)> {
    if cfg.lower_bound_degrees.is_empty() {
        return usage("no degrees given");
    }
    let alpha = cfg.alpha_vector()?;
    let a_hat = cfg.kernel_cutoff.spec()?;
    let rows = cfg
        .lower_bound_degrees
        .iter()
        .map(|&n| lower_bound_check(n, &alpha, &a_hat, cfg.lower_bound_points, cfg.lower_bound_delta))
        .collect::<Result<Vec<_>, _>>()?;
    let first = rows[0].min;
    let ratios: Vec<f64> = rows.iter().map(|r| r.min / first).collect();
    let pass = rows.iter().all(|r| r.min > 0.0) && ratios.iter().all(|r| (LOWER_BOUND_BAND.0..=LOWER_BOUND_BAND.1).contains(r));
    let v = json!({
        "config": config_json(cfg),
        "rows": rows,
        "min_ratios": ratios,
        "tolerance": {"min_positive": true, "ratio_band": [LOWER_BOUND_BAND.0, LOWER_BOUND_BAND.1]},
        "pass": pass,
    });
    Ok((v, pass))
}

pub fn lower_bound(cfg: &RunConfig) -> CliResult<()> {
    let (v, pass) = lower_bound_json(cfg)?;
    emit(cfg, &canonical(&v)?)?;
    if !pass {
        return Err(CliError::Tolerance("lower bound not positive or not stable across degrees".into()));
    }
    Ok(())
}
