use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::{cached_rule, QuadratureRule};
use crate::error::{domain, Error, Result};
use crate::special_fn::AlphaVector;
use crate::summation::CompensatedSum;

pub const DEFAULT_MAX_POINTS: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct GridOptions {
    pub max_points: u64,
    /// Right extension of the last tile; `None` uses `2^(j/3)`.
    pub extension: Option<f64>,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            max_points: DEFAULT_MAX_POINTS,
            extension: None,
        }
    }
}

/// `n_j = floor((1 + 11 delta) sqrt(6) 4^j / c_star) + 1`.
pub fn level_node_count(j: u32, delta: f64, c_star: f64) -> usize {
    ((1.0 + 11.0 * delta) * 6f64.sqrt() * 4f64.powi(j as i32) / c_star).floor() as usize + 1
}

/// An axis-aligned box `prod [lower_l, upper_l]` around a cubature node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tile {
    pub center: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tile {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (a, b))| *a <= *v && *v <= *b)
    }
}

/// `mu(R) = prod_l (b_l^(2 alpha_l + 2) - a_l^(2 alpha_l + 2)) / (2 alpha_l + 2)`.
pub fn tile_measure(tile: &Tile, alpha: &AlphaVector) -> Result<f64> {
    if tile.lower.len() != alpha.dim() || tile.upper.len() != alpha.dim() {
        return Err(Error::DimensionMismatch {
            expected: alpha.dim(),
            got: tile.lower.len(),
        });
    }
    let mut m = 1.0;
    for ((a, b), al) in tile.lower.iter().zip(&tile.upper).zip(alpha.as_slice()) {
        if !(0.0 <= *a && a < b) {
            return domain(format!("inverted or negative box side [{a}, {b}]"));
        }
        m *= interval_measure(*a, *b, *al);
    }
    Ok(m)
}

/// `int_a^b x^(2 alpha + 1) dx`, written as `a^p expm1(p ln(b / a)) / p` to keep
/// full relative accuracy on thin intervals.
pub(crate) fn interval_measure(a: f64, b: f64, alpha: f64) -> f64 {
    let p = 2.0 * alpha + 2.0;
    if a <= 0.0 {
        return b.powf(p) / p;
    }
    a.powf(p) * (p * ((b - a) / a).ln_1p()).exp_m1() / p
}

/// Tensor cubature grid `X_j` with coefficients `c_xi` and tiles `R_xi`.
///
/// Points are indexed row-major over `(gamma_1, ..., gamma_d)` with the first
/// axis varying slowest.
#[derive(Clone, Debug)]
pub struct CubatureGrid {
    pub level: u32,
    pub alpha: AlphaVector,
    pub n: usize,
    pub delta: f64,
    pub c_star: f64,
    axes: Vec<Arc<QuadratureRule>>,
    /// Per-axis tile intervals `I_1..I_n`.
    intervals: Vec<Vec<(f64, f64)>>,
}

type GridKey = (u32, Vec<u64>, u64, u64, u64, u64);

fn grid_cache() -> &'static Mutex<HashMap<GridKey, Arc<CubatureGrid>>> {
    static CACHE: OnceLock<Mutex<HashMap<GridKey, Arc<CubatureGrid>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Level-`j` grid with default options (10^7 point cap, `2^(j/3)` extension).
pub fn cubature_grid(j: u32, alpha: &AlphaVector, delta: f64, c_star: f64) -> Result<Arc<CubatureGrid>> {
    cubature_grid_with(j, alpha, delta, c_star, &GridOptions::default())
}

pub fn cubature_grid_with(
    j: u32,
    alpha: &AlphaVector,
    delta: f64,
    c_star: f64,
    opts: &GridOptions,
) -> Result<Arc<CubatureGrid>> {
    if !(delta > 0.0 && delta < 1.0 / 26.0) {
        return domain(format!("delta must lie in (0, 1/26), got {delta}"));
    }
    if !(c_star > 0.0 && c_star <= 1.0) {
        return domain(format!("c_star must lie in (0, 1], got {c_star}"));
    }
    let n = level_node_count(j, delta, c_star);
    let extension = opts.extension.unwrap_or_else(|| 2f64.powf(j as f64 / 3.0));
    let key = (
        j,
        alpha.as_slice().iter().map(|a| a.to_bits()).collect(),
        delta.to_bits(),
        c_star.to_bits(),
        extension.to_bits(),
        opts.max_points,
    );
    if let Some(g) = grid_cache().lock().unwrap().get(&key) {
        return Ok(g.clone());
    }
    let grid = Arc::new(CubatureGrid::with_nodes(n, alpha, extension, opts.max_points, j, delta, c_star)?);
    grid_cache().lock().unwrap().insert(key, grid.clone());
    Ok(grid)
}

impl CubatureGrid {
    /// A tensor grid with `n` nodes per axis, independent of the level formula.
    pub fn with_nodes(
        n: usize,
        alpha: &AlphaVector,
        extension: f64,
        max_points: u64,
        level: u32,
        delta: f64,
        c_star: f64,
    ) -> Result<Self> {
        let d = alpha.dim() as u32;
        let count = (n as u64).checked_pow(d).unwrap_or(u64::MAX);
        if count > max_points {
            return Err(Error::ResourceCap {
                what: "cubature grid points",
                requested: count,
                cap: max_points,
            });
        }
        if !(extension > 0.0) {
            return domain("tile extension must be > 0");
        }
        let mut axes = Vec::with_capacity(alpha.dim());
        let mut intervals = Vec::with_capacity(alpha.dim());
        for &a in alpha.as_slice() {
            let rule = cached_rule(n, a)?;
            intervals.push(axis_intervals(&rule.sqrt_nodes, extension));
            axes.push(rule);
        }
        Ok(Self {
            level,
            alpha: alpha.clone(),
            n,
            delta,
            c_star,
            axes,
            intervals,
        })
    }

    pub fn dim(&self) -> usize {
        self.alpha.dim()
    }

    /// `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis_rule(&self, axis: usize) -> &QuadratureRule {
        &self.axes[axis]
    }

    /// Node coordinates `xi_{gamma, n}` along one axis.
    pub fn axis_nodes(&self, axis: usize) -> &[f64] {
        &self.axes[axis].sqrt_nodes
    }

    pub fn axis_coeffs(&self, axis: usize) -> &[f64] {
        &self.axes[axis].cub_coeffs
    }

    pub fn axis_intervals(&self, axis: usize) -> &[(f64, f64)] {
        &self.intervals[axis]
    }

    /// Per-axis indices of a flat point index.
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let d = self.dim();
        let mut g = vec![0; d];
        for l in (0..d).rev() {
            g[l] = idx % self.n;
            idx /= self.n;
        }
        g
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .enumerate()
            .map(|(l, &g)| self.axes[l].sqrt_nodes[g])
            .collect()
    }

    /// `c_gamma = prod_l c_{gamma_l, n}`.
    pub fn coeff(&self, idx: usize) -> f64 {
        self.multi_index(idx)
            .iter()
            .enumerate()
            .map(|(l, &g)| self.axes[l].cub_coeffs[g])
            .product()
    }

    pub fn tile(&self, idx: usize) -> Tile {
        let g = self.multi_index(idx);
        let (lower, upper) = g
            .iter()
            .enumerate()
            .map(|(l, &gl)| self.intervals[l][gl])
            .unzip();
        Tile {
            center: self.point(idx),
            lower,
            upper,
        }
    }

    pub fn tile_measure(&self, idx: usize) -> f64 {
        self.multi_index(idx)
            .iter()
            .enumerate()
            .map(|(l, &g)| {
                let (a, b) = self.intervals[l][g];
                interval_measure(a, b, self.alpha.as_slice()[l])
            })
            .product()
    }

    /// All coefficients, in index order.
    pub fn coeffs(&self) -> Vec<f64> {
        tensor_product(&(0..self.dim()).map(|l| self.axis_coeffs(l).to_vec()).collect::<Vec<_>>())
    }

    /// All tile measures, in index order.
    pub fn tile_measures(&self) -> Vec<f64> {
        let per_axis: Vec<Vec<f64>> = (0..self.dim())
            .map(|l| {
                self.intervals[l]
                    .iter()
                    .map(|(a, b)| interval_measure(*a, *b, self.alpha.as_slice()[l]))
                    .collect()
            })
            .collect();
        tensor_product(&per_axis)
    }

    /// `mu(Q_j)` for the union of all tiles.
    pub fn union_measure(&self) -> f64 {
        (0..self.dim())
            .map(|l| interval_measure(0.0, self.intervals[l][self.n - 1].1, self.alpha.as_slice()[l]))
            .product()
    }

    /// Index of the tile containing `x`, if `x` lies in `Q_j`.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let mut idx = 0;
        for (l, &v) in x.iter().enumerate() {
            let iv = &self.intervals[l];
            if v < 0.0 || v > iv[self.n - 1].1 {
                return None;
            }
            let pos = iv.partition_point(|(_, b)| *b < v);
            idx = idx * self.n + pos.min(self.n - 1);
        }
        Some(idx)
    }
}

fn axis_intervals(xi: &[f64], extension: f64) -> Vec<(f64, f64)> {
    let n = xi.len();
    let next = |k: usize| if k + 1 < n { xi[k + 1] } else { xi[n - 1] + extension };
    (0..n)
        .map(|k| {
            let lo = if k == 0 { 0.0 } else { 0.5 * (xi[k - 1] + xi[k]) };
            (lo, 0.5 * (xi[k] + next(k)))
        })
        .collect()
}

pub(crate) fn tensor_product(per_axis: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![1.0];
    for axis in per_axis {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for o in &out {
            for a in axis {
                next.push(o * a);
            }
        }
        out = next;
    }
    out
}

/// `sum_xi c_xi f(xi) g(xi)` in index order with compensated accumulation.
pub fn cubature_integrate(
    grid: &CubatureGrid,
    f: impl Fn(&[f64]) -> f64,
    g: impl Fn(&[f64]) -> f64,
) -> f64 {
    let coeffs = grid.coeffs();
    let mut acc = CompensatedSum::new();
    for (idx, c) in coeffs.iter().enumerate() {
        let x = grid.point(idx);
        acc.add(c * f(&x) * g(&x));
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::{multivariate_f, MultiIndex};
    use approx::assert_relative_eq;

    #[test]
    fn level_zero_count() {
        assert_eq!(level_node_count(0, 0.03, 1.0), 4);
        let a = AlphaVector::uniform(0.0, 1).unwrap();
        let g = cubature_grid(0, &a, 0.03, 1.0).unwrap();
        assert_eq!(g.len(), 4);
    }

    #[test]
    fn point_count_is_tensor() {
        let a = AlphaVector::new(vec![0.0, 0.5]).unwrap();
        let g = cubature_grid(1, &a, 0.03, 1.0).unwrap();
        assert_eq!(g.len(), g.n * g.n);
        assert_eq!(g.coeffs().len(), g.len());
        assert_relative_eq!(g.coeff(7), g.coeffs()[7], max_relative = 1e-15);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        let a = AlphaVector::uniform(0.0, 1).unwrap();
        assert!(cubature_grid(0, &a, 0.05, 1.0).is_err());
        assert!(cubature_grid(0, &a, 0.03, 1.5).is_err());
        let a3 = AlphaVector::uniform(0.0, 3).unwrap();
        let opts = GridOptions { max_points: 1000, extension: None };
        assert!(matches!(
            cubature_grid_with(2, &a3, 0.03, 1.0, &opts),
            Err(Error::ResourceCap { .. })
        ));
    }

    #[test]
    fn basis_orthonormal_under_cubature() {
        let a = AlphaVector::new(vec![0.5, 2.0]).unwrap();
        let g = cubature_grid(0, &a, 0.03, 1.0).unwrap();
        // 2n - 1 = 7: per-axis degree sums up to 7 are exact
        for nu in [vec![0, 0], vec![1, 2], vec![3, 0]] {
            for mu in [vec![0, 0], vec![1, 2], vec![2, 4]] {
                let (nu, mu) = (MultiIndex::new(nu.clone()), MultiIndex::new(mu.clone()));
                let v = cubature_integrate(
                    &g,
                    |x| multivariate_f(&nu, &a, x).unwrap(),
                    |x| multivariate_f(&mu, &a, x).unwrap(),
                );
                let expected = if nu == mu { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-12, "{nu:?} {mu:?}: {v}");
            }
        }
    }

    #[test]
    fn tile_measure_examples() {
        let a1 = AlphaVector::uniform(0.0, 1).unwrap();
        let t = Tile { center: vec![0.5], lower: vec![0.0], upper: vec![1.0] };
        assert_relative_eq!(tile_measure(&t, &a1).unwrap(), 0.5);
        let a2 = AlphaVector::uniform(0.0, 2).unwrap();
        let t2 = Tile { center: vec![0.5; 2], lower: vec![0.0; 2], upper: vec![1.0; 2] };
        assert_relative_eq!(tile_measure(&t2, &a2).unwrap(), 0.25);
        let bad = Tile { center: vec![0.5], lower: vec![1.0], upper: vec![0.5] };
        assert!(tile_measure(&bad, &a1).is_err());
    }

    #[test]
    fn tile_measure_matches_composite_rule() {
        // composite Gauss-Legendre (5 points) on 200 panels per side
        let gl = [
            (0.0, 128.0 / 225.0),
            (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let integrate = |a: f64, b: f64, alpha: f64| {
            let panels = 200;
            let h = (b - a) / panels as f64;
            let mut s = 0.0;
            for p in 0..panels {
                let mid = a + (p as f64 + 0.5) * h;
                for (z, w) in gl {
                    let x: f64 = mid + 0.5 * h * z;
                    s += 0.5 * h * w * x.powf(2.0 * alpha + 1.0);
                }
            }
            s
        };
        let alpha = AlphaVector::new(vec![0.0, 0.75]).unwrap();
        for (lo, hi) in [([0.1, 0.3], [0.9, 2.0]), ([1.5, 0.0], [2.25, 0.5])] {
            let t = Tile { center: vec![0.0; 2], lower: lo.to_vec(), upper: hi.to_vec() };
            let expected = integrate(lo[0], hi[0], 0.0) * integrate(lo[1], hi[1], 0.75);
            assert_relative_eq!(tile_measure(&t, &alpha).unwrap(), expected, max_relative = 1e-10);
        }
    }

    #[test]
    fn tiles_partition_the_union() {
        let a = AlphaVector::new(vec![0.0, 1.0]).unwrap();
        let g = cubature_grid(1, &a, 0.03, 1.0).unwrap();
        let total = crate::summation::sum(g.tile_measures());
        assert_relative_eq!(total, g.union_measure(), max_relative = 1e-10);
        for l in 0..2 {
            let iv = g.axis_intervals(l);
            assert_eq!(iv[0].0, 0.0);
            assert!(iv.windows(2).all(|w| w[0].1 == w[1].0));
            for (k, (lo, hi)) in iv.iter().enumerate() {
                let xi = g.axis_nodes(l)[k];
                assert!(*lo < xi && xi < *hi);
            }
        }
        let x = g.point(9);
        assert_eq!(g.locate(&x), Some(9));
        assert!(g.tile(9).contains(&x));
    }
}
