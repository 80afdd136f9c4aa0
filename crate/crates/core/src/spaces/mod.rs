//! Triebel-Lizorkin and Besov norms, sequence and continuous.
//!
//! Sequence norms act on needlet coefficients. The F-norm integrates a
//! level-wise combination of normalized tile indicators; since tiles of one
//! level are disjoint the integrand is constant on every cell of the merged
//! tile arrangement and the integral is a finite sum of closed-form cell
//! measures. Continuous norms evaluate `Phi_j * f` on a finer cubature grid
//! and apply the cubature sum to `|.|^p`, which is an approximation.

pub mod cells;
pub mod corpus;
pub mod nikolskii;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use cells::{
    fefferman_stein_ratio, maximal_fn, maximal_fn_with, CellGrid, MaximalOptions, PiecewiseCellFn,
};
pub use nikolskii::{nikolskii_report, NikolskiiReport, NikolskiiRow};

use crate::error::{domain, Error, Result};
use crate::kernels::level_filter;
use crate::needlets::{CoeffFn, NeedletCoeffs, NeedletSystem};
use crate::quadrature::{cubature_grid_with, weight_w_unchecked, GridOptions};
use crate::summation::CompensatedSum;
use cells::for_each_cell;

/// Smoothness `s`, weight exponent `rho` and integrability `p`, `q` (either may be infinite).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub s: f64,
    pub rho: f64,
    pub p: f64,
    pub q: f64,
}

impl NormParams {
    pub fn new(s: f64, rho: f64, p: f64, q: f64) -> Result<Self> {
        if !(s.is_finite() && rho.is_finite()) {
            return domain("s and rho must be finite");
        }
        if !(p > 0.0) || !(q > 0.0) {
            return domain(format!("p and q must be > 0, got p = {p}, q = {q}"));
        }
        Ok(NormParams { s, rho, p, q })
    }

    fn check_f(&self) -> Result<()> {
        if self.p.is_infinite() {
            return domain("F-norms need p < inf");
        }
        Ok(())
    }
}

/// Which of the four norms to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Space {
    FSeq,
    BSeq,
    FCont,
    BCont,
}

/// `(sum v^q)^(1/q)`, or `max v` for `q = inf`.
pub(crate) fn lq(values: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        let s: CompensatedSum = values.map(|v| v.powf(q)).collect();
        s.value().powf(1.0 / q)
    }
}

fn check_system(coeffs: &NeedletCoeffs, system: &NeedletSystem) -> Result<()> {
    if coeffs.provenance != system.hash() {
        return Err(Error::ProvenanceMismatch {
            expected: system.hash().to_string(),
            found: coeffs.provenance.clone(),
        });
    }
    for (j, l) in coeffs.levels.iter().enumerate() {
        if l.len() != system.grid(j)?.len() {
            return Err(Error::UnknownNode { level: j, index: l.len() });
        }
    }
    Ok(())
}

/// `2^(sj) W(4^j; xi)^(-rho/d) mu(R_xi)^(-1/2) |h_xi|` per node of level `j`.
fn tile_heights(coeffs: &NeedletCoeffs, params: &NormParams, system: &NeedletSystem, j: usize) -> Result<Vec<f64>> {
    let grid = system.grid(j)?;
    let d = grid.dim() as f64;
    let alpha = grid.alpha.as_slice();
    let mu = grid.tile_measures();
    let scale = 2f64.powf(params.s * j as f64);
    let nw = 4f64.powi(j as i32);
    Ok(coeffs.levels[j]
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let w = weight_w_unchecked(nw, alpha, &grid.point(i)).powf(-params.rho / d);
            scale * w * mu[i].powf(-0.5) * h.norm()
        })
        .collect())
}

/// Level-wise values `2^(sj) W^(-rho/d) mu^(1/p - 1/2) |h_xi|` combined by `l_p` over nodes.
fn level_b_terms(coeffs: &NeedletCoeffs, params: &NormParams, system: &NeedletSystem) -> Result<Vec<f64>> {
    (0..coeffs.levels.len())
        .map(|j| {
            let heights = tile_heights(coeffs, params, system, j)?;
            let mu = system.grid(j)?.tile_measures();
            let inv_p = if params.p.is_infinite() { 0.0 } else { 1.0 / params.p };
            Ok(lq(heights.iter().zip(&mu).map(|(h, m)| h * m.powf(inv_p)), params.p))
        })
        .collect()
}

/// Sequence Triebel-Lizorkin (quasi-)norm.
pub fn f_norm_seq(coeffs: &NeedletCoeffs, params: &NormParams, system: &NeedletSystem) -> Result<f64> {
    params.check_f()?;
    check_system(coeffs, system)?;
    if coeffs.levels.iter().flatten().all(|h| *h == Complex64::new(0.0, 0.0)) {
        return Ok(0.0);
    }
    let cells = CellGrid::arrangement(system)?;
    let shape = cells.shape();
    let axis_mu: Vec<Vec<f64>> = (0..cells.dim()).map(|l| cells.axis_measures(l)).collect();
    let mut levels = Vec::new();
    for j in 0..coeffs.levels.len() {
        let heights = tile_heights(coeffs, params, system, j)?;
        if heights.iter().all(|h| *h == 0.0) {
            continue;
        }
        levels.push((cells.level_maps(system, j)?, system.grid(j)?.n, heights));
    }
    let mut acc = CompensatedSum::new();
    let mut vals = Vec::with_capacity(levels.len());
    for_each_cell(&shape, |_, k| {
        vals.clear();
        for (maps, n, heights) in &levels {
            let mut idx = 0;
            let mut inside = true;
            for (l, &kl) in k.iter().enumerate() {
                match maps[l][kl] {
                    Some(t) => idx = idx * n + t,
                    None => {
                        inside = false;
                        break;
                    }
                }
            }
            if inside {
                vals.push(heights[idx]);
            }
        }
        if !vals.is_empty() {
            let v = lq(vals.iter().copied(), params.q);
            if v > 0.0 {
                let mu: f64 = k.iter().enumerate().map(|(l, &kl)| axis_mu[l][kl]).product();
                acc.add(mu * v.powf(params.p));
            }
        }
    });
    Ok(acc.value().powf(1.0 / params.p))
}

/// Sequence Besov (quasi-)norm.
pub fn b_norm_seq(coeffs: &NeedletCoeffs, params: &NormParams, system: &NeedletSystem) -> Result<f64> {
    check_system(coeffs, system)?;
    Ok(lq(level_b_terms(coeffs, params, system)?.into_iter(), params.q))
}

/// Per-level contributions `2^(sj) ||{...}_{xi in X_j}||`, identical for the F and B sequence norms.
pub fn seq_per_level(coeffs: &NeedletCoeffs, params: &NormParams, system: &NeedletSystem) -> Result<Vec<f64>> {
    check_system(coeffs, system)?;
    level_b_terms(coeffs, params, system)
}

/// `|2^(sj) W(4^j; x)^(-rho/d) (Phi_j * f)(x)|` on the integration grid, per level.
fn band_values(
    f: &CoeffFn,
    params: &NormParams,
    system: &NeedletSystem,
    j_int: usize,
    opts: &GridOptions,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if f.alpha() != system.alpha() {
        return Err(Error::AlphaMismatch);
    }
    let eff = f.effective_degree();
    if eff > system.top_degree() {
        return Err(Error::DegreeOverflow { degree: eff, max: system.top_degree() });
    }
    if j_int <= system.max_level() {
        return domain(format!("integration level {j_int} must exceed J = {}", system.max_level()));
    }
    let cfg = system.config();
    let grid = cubature_grid_with(j_int as u32, &cfg.alpha, cfg.delta, cfg.c_star, opts)?;
    let d = grid.dim() as f64;
    let points: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.point(i)).collect();
    let mut out = Vec::new();
    for j in 0..=system.max_level() {
        let band = f.map_by_degree(|m| Complex64::new(level_filter(&cfg.pair.a_hat, j, m), 0.0));
        let vals = band.evaluate_on_grid(&grid)?;
        let scale = 2f64.powf(params.s * j as f64);
        let nw = 4f64.powi(j as i32);
        out.push(
            vals.iter()
                .zip(&points)
                .map(|(v, x)| scale * weight_w_unchecked(nw, cfg.alpha.as_slice(), x).powf(-params.rho / d) * v.norm())
                .collect(),
        );
    }
    Ok((out, grid.coeffs()))
}

fn cubature_lp(values: impl Iterator<Item = f64>, weights: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.fold(0.0, f64::max);
    }
    let s: CompensatedSum = values.zip(weights).map(|(v, w)| w * v.powf(p)).collect();
    s.value().powf(1.0 / p)
}

/// Continuous Triebel-Lizorkin norm on the level-`j_int` cubature grid.
pub fn f_norm_cont(f: &CoeffFn, params: &NormParams, system: &NeedletSystem, j_int: usize) -> Result<f64> {
    params.check_f()?;
    let (bands, w) = band_values(f, params, system, j_int, &GridOptions::default())?;
    let combined = (0..w.len()).map(|i| lq(bands.iter().map(|b| b[i]), params.q));
    Ok(cubature_lp(combined, &w, params.p))
}

/// Continuous Besov norm on the level-`j_int` cubature grid.
pub fn b_norm_cont(f: &CoeffFn, params: &NormParams, system: &NeedletSystem, j_int: usize) -> Result<f64> {
    Ok(lq(b_cont_per_level(f, params, system, j_int)?.into_iter(), params.q))
}

/// `2^(sj) ||W^(-rho/d) Phi_j * f||_p` per level.
pub fn b_cont_per_level(f: &CoeffFn, params: &NormParams, system: &NeedletSystem, j_int: usize) -> Result<Vec<f64>> {
    let (bands, w) = band_values(f, params, system, j_int, &GridOptions::default())?;
    Ok(bands.iter().map(|b| cubature_lp(b.iter().copied(), &w, params.p)).collect())
}

/// `sum_n (n + 1)^r (sum_{|nu| = n} |f_nu|^2)^(1/2)`.
pub fn seminorm_p_star(f: &CoeffFn, r: u32) -> f64 {
    f.degree_energies()
        .iter()
        .enumerate()
        .map(|(n, e)| ((n + 1) as f64).powi(r as i32) * e.sqrt())
        .sum()
}

/// `f_nu -> m(|nu|) f_nu`.
pub fn multiplier_apply(m: impl Fn(usize) -> Complex64, f: &CoeffFn) -> CoeffFn {
    f.map_by_degree(m)
}

/// One row of an equivalence report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivalenceRow {
    pub function_id: String,
    pub cont_norm: f64,
    pub seq_norm: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub params: NormParams,
    pub besov: bool,
    pub rows: Vec<EquivalenceRow>,
    pub skipped: Vec<String>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub width: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Default bound on `max ratio / min ratio`.
pub const DEFAULT_BRACKET_BOUND: f64 = 50.0;

/// Continuous norm versus sequence norm of the analysis coefficients for every test function.
pub fn equivalence_report(
    system: &NeedletSystem,
    params: &NormParams,
    besov: bool,
    test_set: &[(String, CoeffFn)],
    j_int: usize,
    bound: f64,
) -> Result<EquivalenceReport> {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (id, f) in test_set {
        let h = system.analyze(f)?;
        let (cont, seq) = if besov {
            (b_norm_cont(f, params, system, j_int)?, b_norm_seq(&h, params, system)?)
        } else {
            (f_norm_cont(f, params, system, j_int)?, f_norm_seq(&h, params, system)?)
        };
        if cont == 0.0 || seq == 0.0 {
            skipped.push(id.clone());
            continue;
        }
        rows.push(EquivalenceRow { function_id: id.clone(), cont_norm: cont, seq_norm: seq, ratio: cont / seq });
    }
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let width = if rows.is_empty() { 1.0 } else { max_ratio / min_ratio };
    Ok(EquivalenceReport {
        params: *params,
        besov,
        rows,
        skipped,
        min_ratio,
        max_ratio,
        width,
        bound,
        pass: width.is_finite() && width <= bound,
    })
}
