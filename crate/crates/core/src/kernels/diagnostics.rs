//! Measurements of kernel localization and of the diagonal lower bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cutoff::CutoffSpec;
use super::{filter_weights, filtered_kernel, filtered_kernel_deriv, truncation_degree};
use crate::error::{domain, Result};
use crate::quadrature::weight_w_unchecked;
use crate::special_fn::{degree_kernels, AlphaVector, LaguerreFamily};

/// Sampling plan for the decay fit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecaySpec {
    pub sigma: f64,
    /// Anchor positions as fractions of the oscillatory range `sqrt(4n)`.
    pub anchors: Vec<f64>,
    /// Separations in units of `n^(-1/2)`, log-spaced between these bounds.
    pub min_separation: f64,
    /// Defaults to `3n`, which reaches past the oscillatory range from every anchor.
    pub max_separation: Option<f64>,
    pub separations: usize,
    /// Measure `d/dx_1 Lambda_n` (with an extra `n^(-1/2)`) instead of the kernel.
    pub derivative: bool,
}

impl Default for DecaySpec {
    fn default() -> Self {
        DecaySpec {
            sigma: 6.0,
            anchors: (0..=16).map(|i| 0.05 * i as f64).collect(),
            min_separation: 0.01,
            max_separation: None,
            separations: 512,
            derivative: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecaySample {
    pub x: f64,
    pub y: f64,
    /// `n^(1/2) |x - y|`.
    pub separation: f64,
    /// `|Lambda_n(x, y)| sqrt(W(n; x) W(n; y)) / n^(d/2)`.
    pub normalized: f64,
    /// `fitted_c (1 + separation)^(-sigma)`.
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayReport {
    pub n: usize,
    pub sigma: f64,
    pub fitted_c: f64,
    pub samples: Vec<DecaySample>,
}

impl DecayReport {
    /// Whether every sample lies under `c (1 + s)^(-sigma)`; `c` defaults to the fit.
    pub fn bounded_by(&self, c: f64) -> bool {
        self.samples
            .iter()
            .all(|s| s.normalized <= c * (1.0 + s.separation).powf(-self.sigma) * (1.0 + 1e-12))
    }
}

/// One-dimensional decay fit of `Lambda_n` along the first axis.
///
/// For `d > 1` the remaining coordinates of both points are fixed at the anchor.
pub fn kernel_decay(
    n: usize,
    alpha: &AlphaVector,
    a_hat: &CutoffSpec,
    spec: &DecaySpec,
) -> Result<DecayReport> {
    if n == 0 {
        return domain("n must be >= 1");
    }
    let max_sep = spec.max_separation.unwrap_or(3.0 * n as f64);
    if !(spec.min_separation > 0.0 && max_sep > spec.min_separation && spec.separations >= 2) {
        return domain("invalid separation range");
    }
    let d = alpha.dim();
    let rn = (n as f64).sqrt();
    let range = (4.0 * n as f64).sqrt();
    let ratio = (max_sep / spec.min_separation).ln();
    let mut probes = Vec::new();
    for &theta in &spec.anchors {
        let x = theta * range;
        probes.push((x, x));
        for i in 0..spec.separations {
            let s = spec.min_separation * (ratio * i as f64 / (spec.separations - 1) as f64).exp();
            for y in [x + s / rn, x - s / rn] {
                if y >= 0.0 {
                    probes.push((x, y));
                }
            }
        }
    }
    let weights = filter_weights(n, a_hat);
    let norm = (n as f64).powf(0.5 * d as f64 + if spec.derivative { 0.5 } else { 0.0 });
    let values: Vec<Result<DecaySample>> = probes
        .par_iter()
        .map(|&(x, y)| {
            let mut px = vec![x; d];
            let mut py = vec![x; d];
            px[0] = x;
            py[0] = y;
            let v = if spec.derivative {
                filtered_kernel_deriv(alpha, &weights, &px, &py, 0)?
            } else {
                filtered_kernel(alpha, &weights, &px, &py)?
            };
            let w = (weight_w_unchecked(n as f64, alpha.as_slice(), &px)
                * weight_w_unchecked(n as f64, alpha.as_slice(), &py))
            .sqrt();
            Ok(DecaySample {
                x,
                y,
                separation: rn * (x - y).abs(),
                normalized: v.abs() * w / norm,
                bound: 0.0,
            })
        })
        .collect();
    let mut samples = values.into_iter().collect::<Result<Vec<_>>>()?;
    let fitted_c = samples
        .iter()
        .map(|s| s.normalized * (1.0 + s.separation).powf(spec.sigma))
        .fold(0.0f64, f64::max);
    for s in &mut samples {
        s.bound = fitted_c * (1.0 + s.separation).powf(-spec.sigma);
    }
    Ok(DecayReport { n, sigma: spec.sigma, fitted_c, samples })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub n: usize,
    pub delta: f64,
    pub points_per_axis: usize,
    pub min: f64,
    pub argmin: Vec<f64>,
    pub max: f64,
}

/// `sum_m |a(m/n)|^2 F_m(x, x) W(n; x) / n^(d/2)` minimized over the tensor grid
/// of `points_per_axis` equispaced points per axis in `[0, sqrt((4 - delta) n)]`.
pub fn lower_bound_check(
    n: usize,
    alpha: &AlphaVector,
    a_hat: &CutoffSpec,
    points_per_axis: usize,
    delta: f64,
) -> Result<LowerBoundReport> {
    if n == 0 {
        return domain("n must be >= 1");
    }
    if !(delta > 0.0 && delta < 4.0) || points_per_axis < 2 {
        return domain("need 0 < delta < 4 and at least two points per axis");
    }
    let d = alpha.dim();
    let top = ((4.0 - delta) * n as f64).sqrt();
    let m_max = truncation_degree(n, a_hat);
    let filt: Vec<f64> = (0..=m_max).map(|m| a_hat.value(m as f64 / n as f64).powi(2)).collect();
    let total = points_per_axis.pow(d as u32);
    let scale = (n as f64).powf(0.5 * d as f64);
    let vals: Vec<(f64, Vec<f64>)> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut x = vec![0.0; d];
            for slot in x.iter_mut().rev() {
                *slot = top * (idx % points_per_axis) as f64 / (points_per_axis - 1) as f64;
                idx /= points_per_axis;
            }
            let k = degree_kernels(alpha, &x, &x, m_max, LaguerreFamily::F)?;
            let s: f64 = k.iter().zip(&filt).map(|(a, b)| a * b).sum();
            Ok((s * weight_w_unchecked(n as f64, alpha.as_slice(), &x) / scale, x))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut min = f64::INFINITY;
    let mut max = 0.0f64;
    let mut argmin = Vec::new();
    for (v, x) in vals {
        if v < min {
            min = v;
            argmin = x;
        }
        max = max.max(v);
    }
    Ok(LowerBoundReport { n, delta, points_per_axis, min, argmin, max })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decay_report_is_bounded_by_its_fit() {
        let alpha = AlphaVector::uniform(0.0, 1).unwrap();
        let a = CutoffSpec::type_a(1.0).unwrap();
        let r = kernel_decay(64, &alpha, &a, &DecaySpec::default()).unwrap();
        assert!(r.fitted_c > 0.0 && r.fitted_c.is_finite());
        assert!(r.bounded_by(r.fitted_c));
        assert!(!r.bounded_by(0.5 * r.fitted_c));
    }

    #[test]
    fn lower_bound_is_quadratic_in_amplitude() {
        let alpha = AlphaVector::uniform(0.0, 1).unwrap();
        let a = CutoffSpec::type_a(1.0).unwrap();
        let r1 = lower_bound_check(64, &alpha, &a, 65, 0.5).unwrap();
        let r2 = lower_bound_check(64, &alpha, &a.scaled(2.0), 65, 0.5).unwrap();
        assert!(r1.min > 0.0);
        assert!((r2.min - 4.0 * r1.min).abs() <= 1e-14 * r2.min);
    }

    #[test]
    fn lower_bound_tensor_matches_per_axis_product() {
        // For d = 2 the diagonal sum with a(t) = 1 on [0, 2] and degrees up to n
        // reduces at each point to a sum over a triangle of per-axis products.
        let a = CutoffSpec::type_a(1.0).unwrap();
        let alpha2 = AlphaVector::new(vec![0.0, 0.5]).unwrap();
        let r = lower_bound_check(8, &alpha2, &a, 5, 0.5).unwrap();
        let x = r.argmin.clone();
        let m_max = truncation_degree(8, &a);
        let t0 = crate::special_fn::laguerre_fn_batch(m_max as i64, 0.0, x[0], LaguerreFamily::F).unwrap();
        let t1 = crate::special_fn::laguerre_fn_batch(m_max as i64, 0.5, x[1], LaguerreFamily::F).unwrap();
        let mut s = 0.0;
        for i in 0..=m_max {
            for j in 0..=(m_max - i) {
                s += a.value((i + j) as f64 / 8.0).powi(2) * (t0[i] * t1[j]).powi(2);
            }
        }
        let expect = s * weight_w_unchecked(8.0, alpha2.as_slice(), &x) / 8.0;
        assert!((r.min - expect).abs() < 1e-12 * expect);
    }
}
