//! Piecewise constant functions on the arrangement of tile boundaries.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::needlets::NeedletSystem;
use crate::quadrature::interval_measure;
use crate::special_fn::AlphaVector;
use crate::summation::CompensatedSum;

/// Cells cut out by axis-wise breakpoints `0 = b_0 < b_1 < ... < b_K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellGrid {
    pub alpha: AlphaVector,
    pub breakpoints: Vec<Vec<f64>>,
}

impl CellGrid {
    pub fn new(alpha: &AlphaVector, breakpoints: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.len() != alpha.dim() {
            return Err(Error::DimensionMismatch { expected: alpha.dim(), got: breakpoints.len() });
        }
        for b in &breakpoints {
            if b.len() < 2 || b[0] < 0.0 || b.windows(2).any(|w| !(w[0] < w[1])) {
                return domain("breakpoints must be increasing, nonnegative and at least two per axis");
            }
        }
        Ok(CellGrid { alpha: alpha.clone(), breakpoints })
    }

    /// Union of tile boundaries of levels `0..=J` of the system.
    pub fn arrangement(system: &NeedletSystem) -> Result<Self> {
        let d = system.alpha().dim();
        let mut axes = Vec::with_capacity(d);
        for l in 0..d {
            let mut b = vec![0.0];
            for j in 0..=system.max_level() {
                for &(lo, hi) in system.grid(j)?.axis_intervals(l) {
                    b.push(lo);
                    b.push(hi);
                }
            }
            b.sort_by(f64::total_cmp);
            b.dedup();
            axes.push(b);
        }
        CellGrid::new(system.alpha(), axes)
    }

    pub fn dim(&self) -> usize {
        self.breakpoints.len()
    }

    /// Cells per axis.
    pub fn shape(&self) -> Vec<usize> {
        self.breakpoints.iter().map(|b| b.len() - 1).collect()
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis_measures(&self, l: usize) -> Vec<f64> {
        let a = self.alpha.as_slice()[l];
        self.breakpoints[l].windows(2).map(|w| interval_measure(w[0], w[1], a)).collect()
    }

    /// `mu(cell)` for every cell, row-major.
    pub fn measures(&self) -> Vec<f64> {
        crate::quadrature::grid_tensor_product(&(0..self.dim()).map(|l| self.axis_measures(l)).collect::<Vec<_>>())
    }

    pub fn axis_centers(&self, l: usize) -> Vec<f64> {
        self.breakpoints[l].windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Centre of a cell given its flat index.
    pub fn center(&self, mut idx: usize) -> Vec<f64> {
        let shape = self.shape();
        let mut x = vec![0.0; self.dim()];
        for l in (0..self.dim()).rev() {
            let k = idx % shape[l];
            idx /= shape[l];
            x[l] = 0.5 * (self.breakpoints[l][k] + self.breakpoints[l][k + 1]);
        }
        x
    }

    /// For each axis and cell interval, the tile interval of grid level `j` containing it.
    pub(crate) fn level_maps(&self, system: &NeedletSystem, j: usize) -> Result<Vec<Vec<Option<usize>>>> {
        let grid = system.grid(j)?;
        Ok((0..self.dim())
            .map(|l| {
                let iv = grid.axis_intervals(l);
                self.axis_centers(l)
                    .into_iter()
                    .map(|c| {
                        let k = iv.partition_point(|(_, hi)| *hi < c);
                        (k < iv.len() && iv[k].0 <= c && c <= iv[k].1).then_some(k)
                    })
                    .collect()
            })
            .collect())
    }
}

/// Calls `f(flat, per_axis_index)` for every cell in row-major order.
pub(crate) fn for_each_cell(shape: &[usize], mut f: impl FnMut(usize, &[usize])) {
    let total: usize = shape.iter().product();
    let mut k = vec![0usize; shape.len()];
    for flat in 0..total {
        f(flat, &k);
        for l in (0..shape.len()).rev() {
            k[l] += 1;
            if k[l] < shape[l] {
                break;
            }
            k[l] = 0;
        }
    }
}

/// A function constant on each cell of a [`CellGrid`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseCellFn {
    pub cells: CellGrid,
    pub values: Vec<f64>,
}

impl PiecewiseCellFn {
    pub fn new(cells: CellGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != cells.len() {
            return Err(Error::DimensionMismatch { expected: cells.len(), got: values.len() });
        }
        Ok(PiecewiseCellFn { cells, values })
    }

    pub fn constant(cells: CellGrid, c: f64) -> Self {
        let n = cells.len();
        PiecewiseCellFn { cells, values: vec![c; n] }
    }

    /// Samples `f` at cell centres.
    pub fn from_fn(cells: CellGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..cells.len()).map(|i| f(&cells.center(i))).collect();
        PiecewiseCellFn { cells, values }
    }

    /// `(int |f|^p w_alpha)^(1/p)`, or the essential sup for `p = inf`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        }
        let mu = self.cells.measures();
        let s: CompensatedSum = self.values.iter().zip(&mu).map(|(v, m)| m * v.abs().powf(p)).collect();
        s.value().powf(1.0 / p)
    }
}

/// Options for [`maximal_fn_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalOptions {
    /// Largest number of cells per side of a box; `None` allows every box.
    pub max_span: Option<usize>,
}

impl MaximalOptions {
    /// Every box in one dimension, spans of at most 8 cells otherwise.
    pub fn for_dim(d: usize) -> Self {
        MaximalOptions { max_span: if d == 1 { None } else { Some(8) } }
    }
}

/// `M_t f` over cell-aligned boxes, evaluated at cell centres.
pub fn maximal_fn(f: &PiecewiseCellFn, t: f64) -> Result<PiecewiseCellFn> {
    maximal_fn_with(f, t, MaximalOptions::for_dim(f.cells.dim()))
}

pub fn maximal_fn_with(f: &PiecewiseCellFn, t: f64, opts: MaximalOptions) -> Result<PiecewiseCellFn> {
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("t must be > 0, got {t}"));
    }
    let shape = f.cells.shape();
    let mu = f.cells.measures();
    let mass: Vec<f64> = f.values.iter().zip(&mu).map(|(v, m)| m * v.abs().powf(t)).collect();
    let out = if shape.len() == 1 && opts.max_span.is_none() {
        maximal_1d(&mass, &mu)
    } else {
        maximal_boxes(&shape, &mass, &mu, opts.max_span.unwrap_or(usize::MAX))
    };
    Ok(PiecewiseCellFn {
        cells: f.cells.clone(),
        values: out.into_iter().map(|a| a.max(0.0).powf(1.0 / t)).collect(),
    })
}

/// All intervals `[i, k]`: the best average containing `c` is
/// `max_{i <= c} max_{k >= c} A(i, k)`, computed with a running suffix maximum.
fn maximal_1d(mass: &[f64], mu: &[f64]) -> Vec<f64> {
    let n = mass.len();
    let mut pm = vec![0.0; n + 1];
    let mut pw = vec![0.0; n + 1];
    for i in 0..n {
        pm[i + 1] = pm[i] + mass[i];
        pw[i + 1] = pw[i] + mu[i];
    }
    let mut best = vec![0.0f64; n];
    let mut suffix = vec![0.0f64; n];
    for i in 0..n {
        // suffix[c] = max_{k >= c} A(i, k) for c >= i
        let mut run = 0.0f64;
        for k in (i..n).rev() {
            let w = pw[k + 1] - pw[i];
            let a = if w > 0.0 { (pm[k + 1] - pm[i]) / w } else { 0.0 };
            run = run.max(a);
            suffix[k] = run;
        }
        for c in i..n {
            best[c] = best[c].max(suffix[c]);
        }
    }
    best
}

fn maximal_boxes(shape: &[usize], mass: &[f64], mu: &[f64], max_span: usize) -> Vec<f64> {
    let d = shape.len();
    let pshape: Vec<usize> = shape.iter().map(|s| s + 1).collect();
    let pm = prefix_sums(shape, &pshape, mass);
    let pw = prefix_sums(shape, &pshape, mu);
    let pflat = |k: &[usize]| k.iter().zip(&pshape).fold(0, |a, (i, s)| a * s + i);
    let mut best = vec![0.0f64; mass.len()];
    let spans: Vec<usize> = shape.iter().map(|s| (*s).min(max_span)).collect();
    for_each_cell(shape, |_, lo| {
        for_each_cell(&spans, |_, sp| {
            let hi: Vec<usize> = lo.iter().zip(sp).map(|(a, b)| a + b + 1).collect();
            if hi.iter().zip(shape).any(|(h, s)| h > s) {
                return;
            }
            let mut sm = 0.0;
            let mut sw = 0.0;
            for corner in 0..(1usize << d) {
                let k: Vec<usize> = (0..d).map(|l| if corner >> l & 1 == 1 { lo[l] } else { hi[l] }).collect();
                let sign = if corner.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                sm += sign * pm[pflat(&k)];
                sw += sign * pw[pflat(&k)];
            }
            let a = if sw > 0.0 { sm / sw } else { 0.0 };
            let inner: Vec<usize> = sp.iter().map(|s| s + 1).collect();
            for_each_cell(&inner, |_, off| {
                let idx = lo.iter().zip(off).zip(shape).fold(0, |acc, ((a0, o), s)| acc * s + a0 + o);
                if a > best[idx] {
                    best[idx] = a;
                }
            });
        });
    });
    best
}

fn prefix_sums(shape: &[usize], pshape: &[usize], v: &[f64]) -> Vec<f64> {
    let total: usize = pshape.iter().product();
    let mut p = vec![0.0; total];
    let pflat = |k: &[usize]| k.iter().zip(pshape).fold(0, |a, (i, s)| a * s + i);
    for_each_cell(shape, |flat, k| {
        let shifted: Vec<usize> = k.iter().map(|i| i + 1).collect();
        p[pflat(&shifted)] = v[flat];
    });
    for l in 0..shape.len() {
        let stride: usize = pshape[l + 1..].iter().product();
        for i in 0..total {
            if (i / stride) % pshape[l] > 0 {
                p[i] += p[i - stride];
            }
        }
    }
    p
}

/// `||(sum_j (M_t f_j)^q)^(1/q)||_p / ||(sum_j |f_j|^q)^(1/q)||_p` on a common cell grid.
pub fn fefferman_stein_ratio(family: &[PiecewiseCellFn], t: f64, p: f64, q: f64) -> Result<f64> {
    let first = family.first().ok_or_else(|| Error::Domain("empty family".into()))?;
    if family.iter().any(|f| f.cells != first.cells) {
        return domain("all functions must share the cell grid");
    }
    let combine = |fs: &[Vec<f64>]| -> PiecewiseCellFn {
        let values = (0..first.values.len())
            .map(|i| super::lq(fs.iter().map(|v| v[i].abs()), q))
            .collect();
        PiecewiseCellFn { cells: first.cells.clone(), values }
    };
    let plain: Vec<Vec<f64>> = family.iter().map(|f| f.values.clone()).collect();
    let maxed: Vec<Vec<f64>> = family
        .iter()
        .map(|f| maximal_fn(f, t).map(|m| m.values))
        .collect::<Result<_>>()?;
    let den = combine(&plain).lp_norm(p);
    if den == 0.0 {
        return domain("family is identically zero");
    }
    Ok(combine(&maxed).lp_norm(p) / den)
}
