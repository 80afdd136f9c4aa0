//! Gauss-Laguerre quadrature, Christoffel functions and the rescaled
//! tensor cubature on the positive orthant.

mod grid;
pub mod tridiag;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::special_fn::{damped_batch, AlphaVector};

pub(crate) use grid::{interval_measure, tensor_product as grid_tensor_product};
pub use grid::{
    cubature_grid, cubature_grid_with, cubature_integrate, level_node_count, tile_measure,
    CubatureGrid, GridOptions, Tile, DEFAULT_MAX_POINTS,
};

/// A Gauss-Laguerre rule for the weight `t^alpha e^(-t)` on `(0, inf)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub n: usize,
    pub alpha: f64,
    /// Zeros `t_1 < ... < t_n` of `L_n^alpha`.
    pub nodes: Vec<f64>,
    /// `log w_nu` with `w_nu = lambda_n(t_nu)`.
    pub log_weights: Vec<f64>,
    /// `c_nu = lambda_n(t_nu) e^(t_nu) / 2`.
    pub cub_coeffs: Vec<f64>,
    /// `xi_nu = sqrt(t_nu)`.
    pub sqrt_nodes: Vec<f64>,
}

impl QuadratureRule {
    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.log_weights.iter().map(|w| w.exp())
    }

    /// `sum_nu w_nu f(t_nu)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        crate::summation::sum(
            self.nodes
                .iter()
                .zip(&self.log_weights)
                .map(|(t, lw)| lw.exp() * f(*t)),
        )
    }
}

const NEWTON_STEPS: usize = 3;

/// Gauss-Laguerre rule with `n` nodes.
///
/// Nodes come from the Jacobi matrix eigenvalues followed by Newton polishing
/// on `L_n^alpha` (derivative `-L_{n-1}^{alpha+1}`); the cubature coefficients
/// use the Christoffel sum of damped orthonormal functions, which does not
/// underflow for the far nodes.
pub fn gauss_laguerre(n: usize, alpha: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return domain("n must be >= 1");
    }
    if !(alpha.is_finite() && alpha >= 0.0) {
        return domain(format!("alpha must be finite and >= 0, got {alpha}"));
    }
    let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    let off: Vec<f64> = (1..n).map(|k| (k as f64 * (k as f64 + alpha)).sqrt()).collect();
    let mut nodes = tridiag::symmetric_tridiagonal_eigenvalues(&diag, &off)?;

    let sqrt_n = (n as f64).sqrt();
    for i in 0..n {
        let left = if i > 0 { nodes[i] - nodes[i - 1] } else { nodes[i] };
        let right = if i + 1 < n { nodes[i + 1] - nodes[i] } else { left };
        let limit = 0.25 * left.min(right);
        for _ in 0..NEWTON_STEPS {
            let t = nodes[i];
            let q = damped_batch(n, alpha, t)?[n];
            let dq = damped_batch(n - 1, alpha + 1.0, t)?[n - 1];
            if dq == 0.0 {
                break;
            }
            let step = q / (sqrt_n * dq);
            if !step.is_finite() || step.abs() > limit {
                break;
            }
            nodes[i] = t + step;
            if step.abs() <= 1e-16 * t {
                break;
            }
        }
    }

    let mut cub_coeffs = Vec::with_capacity(n);
    let mut log_weights = Vec::with_capacity(n);
    for &t in &nodes {
        let c = 0.5 / christoffel_sum(n, alpha, t)?;
        cub_coeffs.push(c);
        log_weights.push((2.0 * c).ln() - t);
    }
    let sqrt_nodes = nodes.iter().map(|t| t.sqrt()).collect();
    Ok(QuadratureRule {
        n,
        alpha,
        nodes,
        log_weights,
        cub_coeffs,
        sqrt_nodes,
    })
}

/// `sum_{j < n} q_j(t)^2 = 1 / (lambda_n(t) e^t)`.
fn christoffel_sum(n: usize, alpha: f64, t: f64) -> Result<f64> {
    let q = damped_batch(n - 1, alpha, t)?;
    Ok(crate::summation::sum(q.iter().map(|v| v * v)))
}

/// Christoffel function of `t^alpha e^(-t)` with respect to polynomials of degree `< n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Christoffel {
    /// `log lambda_n(x)`.
    pub log_lambda: f64,
    /// `lambda_n(x) e^x`.
    pub lambda_times_exp_x: f64,
}

pub fn christoffel(n: usize, alpha: f64, x: f64) -> Result<Christoffel> {
    if n == 0 {
        return domain("n must be >= 1");
    }
    let s = christoffel_sum(n, alpha, x)?;
    Ok(Christoffel {
        log_lambda: -x - s.ln(),
        lambda_times_exp_x: 1.0 / s,
    })
}

/// `min_nu t_nu n / nu^2` of the `n`-point rule, clamped to `(0, 1]`.
pub fn calibrate_c_star(n: usize, alpha: f64) -> Result<f64> {
    let rule = gauss_laguerre(n, alpha)?;
    let c = rule
        .nodes
        .iter()
        .enumerate()
        .map(|(i, t)| t * n as f64 / ((i + 1) as f64).powi(2))
        .fold(f64::INFINITY, f64::min);
    Ok(c.min(1.0))
}

/// `W_alpha(n; x) = prod_j (x_j + n^(-1/2))^(2 alpha_j + 1)`.
pub fn weight_w(n: f64, alpha: &AlphaVector, x: &[f64]) -> Result<f64> {
    if !(n > 0.0 && n.is_finite()) {
        return domain(format!("n must be > 0, got {n}"));
    }
    alpha.check_point(x)?;
    Ok(weight_w_unchecked(n, alpha.as_slice(), x))
}

pub(crate) fn weight_w_unchecked(n: f64, alpha: &[f64], x: &[f64]) -> f64 {
    let shift = n.powf(-0.5);
    alpha
        .iter()
        .zip(x)
        .map(|(a, xi)| (xi + shift).powf(2.0 * a + 1.0))
        .product()
}

type RuleKey = (usize, u64);

fn rule_cache() -> &'static Mutex<HashMap<RuleKey, Arc<QuadratureRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Shared rule keyed by `(n, alpha)`.
pub fn cached_rule(n: usize, alpha: f64) -> Result<Arc<QuadratureRule>> {
    let key = (n, alpha.to_bits());
    if let Some(r) = rule_cache().lock().unwrap().get(&key) {
        return Ok(r.clone());
    }
    let rule = Arc::new(gauss_laguerre(n, alpha)?);
    rule_cache().lock().unwrap().insert(key, rule.clone());
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::function::gamma::ln_gamma;

    fn log_sum_exp(v: impl Iterator<Item = f64>) -> f64 {
        let v: Vec<f64> = v.collect();
        let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + crate::summation::sum(v.iter().map(|x| (x - m).exp())).ln()
    }

    #[test]
    fn one_node() {
        let r = gauss_laguerre(1, 0.0).unwrap();
        assert_relative_eq!(r.nodes[0], 1.0, max_relative = 1e-15);
        assert_relative_eq!(r.log_weights[0].exp(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(r.cub_coeffs[0], std::f64::consts::E / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn two_nodes() {
        let r = gauss_laguerre(2, 0.0).unwrap();
        let s2 = std::f64::consts::SQRT_2;
        assert_relative_eq!(r.nodes[0], 2.0 - s2, max_relative = 1e-14);
        assert_relative_eq!(r.nodes[1], 2.0 + s2, max_relative = 1e-14);
        let w: Vec<f64> = r.weights().collect();
        assert_relative_eq!(w[0], (2.0 + s2) / 4.0, max_relative = 1e-14);
        assert_relative_eq!(w[1], (2.0 - s2) / 4.0, max_relative = 1e-14);
    }

    #[test]
    fn moments_are_exact() {
        for &n in &[8usize, 32, 128] {
            for &a in &[0.0, 0.5, 2.0] {
                let r = gauss_laguerre(n, a).unwrap();
                for k in 0..2 * n {
                    let lhs = log_sum_exp(
                        r.nodes.iter().zip(&r.log_weights).map(|(t, lw)| lw + k as f64 * t.ln()),
                    );
                    let rhs = ln_gamma(k as f64 + a + 1.0);
                    assert!((lhs - rhs).abs() < 1e-10, "n={n} a={a} k={k}: {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn rule_invariants() {
        for &(n, a) in &[(10usize, 0.0), (64, 0.5), (200, 3.0)] {
            let r = gauss_laguerre(n, a).unwrap();
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(r.nodes[0] > 0.0 && r.nodes[n - 1] < 4.0 * n as f64 + 2.0 * a + 2.0);
            assert!(r.cub_coeffs.iter().all(|c| *c > 0.0));
            let total = crate::summation::sum(r.weights());
            assert_relative_eq!(total, ln_gamma(a + 1.0).exp(), max_relative = 1e-10);
            for (i, t) in r.sqrt_nodes.iter().enumerate() {
                assert_eq!(*t, r.nodes[i].sqrt());
            }
        }
    }

    #[test]
    fn zero_estimate_bracket() {
        // t_nu n / nu^2 stays in a fixed positive bracket
        for &n in &[16usize, 64, 256] {
            let r = gauss_laguerre(n, 0.5).unwrap();
            for (i, t) in r.nodes.iter().enumerate() {
                let ratio = t * n as f64 / ((i + 1) as f64).powi(2);
                assert!(ratio > 0.5 && ratio < 12.0, "n={n} nu={} ratio={ratio}", i + 1);
            }
        }
        let c = calibrate_c_star(256, 0.0).unwrap();
        assert!(c > 0.0 && c <= 1.0);
    }

    #[test]
    fn interlacing() {
        for &a in &[0.0, 1.5] {
            let mut prev = gauss_laguerre(1, a).unwrap().nodes;
            for n in 2..=64 {
                let cur = gauss_laguerre(n, a).unwrap().nodes;
                for i in 0..n - 1 {
                    assert!(cur[i] < prev[i] && prev[i] < cur[i + 1]);
                }
                prev = cur;
            }
        }
    }

    #[test]
    fn christoffel_consistency() {
        for x in [0.0, 0.5, 3.0, 10.0] {
            // p_0 = 1, so lambda_1 = 1 and lambda_1 e^x = e^x
            let c = christoffel(1, 0.0, x).unwrap();
            assert!(c.log_lambda.abs() < 1e-14);
            assert_relative_eq!(c.lambda_times_exp_x, f64::exp(x), max_relative = 1e-14);
        }
        let r = gauss_laguerre(40, 0.5).unwrap();
        for (t, c) in r.nodes.iter().zip(&r.cub_coeffs) {
            let ch = christoffel(40, 0.5, *t).unwrap();
            assert_relative_eq!(ch.lambda_times_exp_x, 2.0 * c, max_relative = 1e-12);
        }
        assert!(christoffel(0, 0.0, 1.0).is_err());
    }

    #[test]
    fn weight_examples() {
        let a0 = AlphaVector::uniform(0.0, 1).unwrap();
        assert_eq!(weight_w(1.0, &a0, &[0.0]).unwrap(), 1.0);
        let a = AlphaVector::uniform(0.5, 1).unwrap();
        assert_relative_eq!(weight_w(4.0, &a, &[1.0]).unwrap(), 2.25, max_relative = 1e-15);
        assert!(weight_w(0.0, &a, &[1.0]).is_err());
        assert!(weight_w(1.0, &a, &[-1.0]).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(gauss_laguerre(0, 0.0).is_err());
        assert!(gauss_laguerre(3, -0.2).is_err());
    }
}
