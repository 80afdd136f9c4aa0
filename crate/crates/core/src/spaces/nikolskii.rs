//! Empirical constants in the Nikolskii-type inequalities on `V_n`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::needlets::{for_each_index, CoeffFn};
use crate::quadrature::{cubature_grid, level_node_count, weight_w_unchecked, CubatureGrid};
use crate::special_fn::{axis_tables, AlphaVector, LaguerreFamily};
use crate::summation::CompensatedSum;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NikolskiiRow {
    pub n: usize,
    /// `max ||g||_p / ||g||_q`.
    pub ratio_plain: f64,
    /// `max ||W(n)^s g||_p / ||W(n)^(s + 1/p - 1/q) g||_q`.
    pub ratio_weighted: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NikolskiiReport {
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub rows: Vec<NikolskiiRow>,
    /// `(d + |alpha|)(1/q - 1/p)`.
    pub exponent_plain_bound: f64,
    /// `(d/2)(1/q - 1/p)`.
    pub exponent_weighted_bound: f64,
    /// Largest log-log slope between consecutive `n`.
    pub exponent_plain: f64,
    pub exponent_weighted: f64,
}

struct Sampler {
    grid: std::sync::Arc<CubatureGrid>,
    points: Vec<Vec<f64>>,
    coeffs: Vec<f64>,
    extra: Vec<Vec<f64>>,
}

impl Sampler {
    fn new(alpha: &AlphaVector, n: usize) -> Result<Self> {
        let mut j = 0;
        while level_node_count(j, 0.03, 1.0) < 2 * n + 2 {
            j += 1;
        }
        let grid = cubature_grid(j, alpha, 0.03, 1.0)?;
        let points = (0..grid.len()).map(|i| grid.point(i)).collect();
        let coeffs = grid.coeffs();
        let d = alpha.dim();
        // the origin and, in one dimension, a dense uniform sweep for the sup
        let mut extra = vec![vec![0.0; d]];
        if d == 1 {
            let top = *grid.axis_nodes(0).last().unwrap();
            let m = 4 * grid.n;
            extra.extend((0..=m).map(|i| vec![top * i as f64 / m as f64]));
        }
        Ok(Sampler { grid, points, coeffs, extra })
    }

    fn norm(&self, g: &CoeffFn, weight_exp: f64, n: usize, p: f64) -> Result<f64> {
        let a = g.alpha().as_slice();
        let w = |x: &[f64]| weight_w_unchecked(n as f64, a, x).powf(weight_exp);
        let vals = g.evaluate_on_grid(&self.grid)?;
        if p.is_infinite() {
            let mut m = vals
                .iter()
                .zip(&self.points)
                .map(|(v, x)| v.norm() * w(x))
                .fold(0.0, f64::max);
            for x in &self.extra {
                m = m.max(g.evaluate(x)?.norm() * w(x));
            }
            return Ok(m);
        }
        let s: CompensatedSum = vals
            .iter()
            .zip(&self.points)
            .zip(&self.coeffs)
            .map(|((v, x), c)| c * (v.norm() * w(x)).powf(p))
            .collect();
        Ok(s.value().powf(1.0 / p))
    }
}

/// `sum_{|nu| <= n} F_nu(0) F_nu`, the extremal function for sup-norms at the origin.
fn peak_at_origin(alpha: &AlphaVector, n: usize) -> Result<CoeffFn> {
    let d = alpha.dim();
    let tables = axis_tables(alpha, &vec![0.0; d], n, LaguerreFamily::F);
    let mut out = CoeffFn::zeros(alpha, n)?;
    let data = out.data_mut();
    for_each_index(n + 1, d, |flat, nu, deg| {
        if deg <= n {
            let v: f64 = nu.iter().enumerate().map(|(l, &k)| tables[l][k]).product();
            data[flat] = Complex64::new(v, 0.0);
        }
    });
    Ok(out)
}

/// Both sides of the Nikolskii inequalities over random `g` in `V_n` and the
/// peak function, for every `n` in `ns`.
pub fn nikolskii_report(
    ns: &[usize],
    alpha: &AlphaVector,
    p: f64,
    q: f64,
    s: f64,
    trials: usize,
    seed: u64,
) -> Result<NikolskiiReport> {
    if !(q > 0.0 && q <= p) {
        return domain(format!("need 0 < q <= p, got q = {q}, p = {p}"));
    }
    if ns.is_empty() || ns.contains(&0) {
        return domain("degrees must be >= 1");
    }
    let d = alpha.dim() as f64;
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    let gap = inv(q) - inv(p);
    let mut rows = Vec::new();
    for &n in ns {
        let sampler = Sampler::new(alpha, n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
        let mut trial_fns = vec![peak_at_origin(alpha, n)?];
        for _ in 0..trials {
            trial_fns.push(CoeffFn::random_real(alpha, n, &mut rng)?);
        }
        let mut plain = 0.0f64;
        let mut weighted = 0.0f64;
        for g in &trial_fns {
            plain = plain.max(sampler.norm(g, 0.0, n, p)? / sampler.norm(g, 0.0, n, q)?);
            weighted = weighted.max(sampler.norm(g, s, n, p)? / sampler.norm(g, s - gap, n, q)?);
        }
        rows.push(NikolskiiRow { n, ratio_plain: plain, ratio_weighted: weighted });
    }
    let slope = |f: fn(&NikolskiiRow) -> f64| -> f64 {
        rows.windows(2)
            .map(|w| (f(&w[1]) / f(&w[0])).ln() / (w[1].n as f64 / w[0].n as f64).ln())
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let exponent_plain = if rows.len() > 1 { slope(|r| r.ratio_plain) } else { 0.0 };
    let exponent_weighted = if rows.len() > 1 { slope(|r| r.ratio_weighted) } else { 0.0 };
    Ok(NikolskiiReport {
        p,
        q,
        s,
        exponent_plain_bound: (d + alpha.sum()) * gap,
        exponent_weighted_bound: 0.5 * d * gap,
        exponent_plain,
        exponent_weighted,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_exponents_give_unit_ratios() {
        let alpha = AlphaVector::uniform(0.0, 1).unwrap();
        let r = nikolskii_report(&[8, 16], &alpha, 2.0, 2.0, 0.0, 3, 1).unwrap();
        for row in &r.rows {
            assert!((row.ratio_plain - 1.0).abs() < 1e-12);
            assert!((row.ratio_weighted - 1.0).abs() < 1e-12);
        }
        assert_eq!(r.exponent_plain_bound, 0.0);
        assert!(nikolskii_report(&[8], &alpha, 1.0, 2.0, 0.0, 1, 1).is_err());
    }

    #[test]
    fn sup_versus_l2_exponent() {
        let alpha = AlphaVector::uniform(0.0, 1).unwrap();
        let r = nikolskii_report(&[16, 64, 256], &alpha, f64::INFINITY, 2.0, 0.0, 4, 3).unwrap();
        assert!(r.rows.iter().all(|row| row.ratio_plain.is_finite() && row.ratio_plain > 0.0));
        assert!(r.exponent_plain <= r.exponent_plain_bound + 0.1, "{r:?}");
        assert!(r.exponent_weighted <= r.exponent_weighted_bound + 0.1, "{r:?}");
    }
}
