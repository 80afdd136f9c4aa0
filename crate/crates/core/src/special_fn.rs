//! Laguerre polynomials and the three families of Laguerre functions.
//!
//! All function families are produced by one pass of the orthonormal
//! three-term recurrence applied to already damped values,
//!
//! ```text
//! b(n+1) q(n+1) = (2n + alpha + 1 - u) q(n) - b(n) q(n-1),   b(n) = sqrt(n (n + alpha)),
//! ```
//!
//! where `u = x^2` for the `F`/`M` families and `u = x` for `L`. The running
//! value is kept as a mantissa times `exp(log_scale)` so that neither the
//! `exp(-u/2)` seed nor the growth through the exponential region can leave
//! the binary64 range.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};

/// Laguerre parameters, one per axis. Every component is `>= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct AlphaVector(Vec<f64>);

impl AlphaVector {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return domain("alpha vector must have at least one component");
        }
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return domain(format!("alpha components must be finite and >= 0, got {a}"));
        }
        Ok(Self(alpha))
    }

    /// The same `alpha` on every one of `d` axes.
    pub fn uniform(alpha: f64, d: usize) -> Result<Self> {
        Self::new(vec![alpha; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `|alpha| = sum of components`.
    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        check_nonneg_point(x)
    }
}

impl TryFrom<Vec<f64>> for AlphaVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<AlphaVector> for Vec<f64> {
    fn from(a: AlphaVector) -> Self {
        a.0
    }
}

/// A multi-index `nu` in `N_0^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(nu: Vec<usize>) -> Self {
        Self(nu)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|nu|`.
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// The three univariate Laguerre function families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LaguerreFamily {
    /// Orthonormal in `L^2(R_+, x^(2 alpha + 1))`.
    F,
    /// Orthonormal in `L^2(R_+)`, argument `x`.
    L,
    /// Orthonormal in `L^2(R_+)`, argument `x^2`.
    M,
}

pub(crate) fn check_nonneg_point(x: &[f64]) -> Result<()> {
    match x.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        Some(v) => domain(format!("coordinates must be finite and >= 0, got {v}")),
        None => Ok(()),
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        domain(format!("alpha must be finite and >= 0, got {alpha}"))
    }
}

fn check_arg(x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        domain(format!("argument must be finite and >= 0, got {x}"))
    }
}

/// `L_n^alpha(x)` by the plain (unnormalized) forward recurrence.
///
/// Intended for moderate `n x`; the raw polynomial overflows near `x ~ 4n`
/// for large `n`, which is why the function families never go through it.
pub fn laguerre_poly(n: i64, alpha: f64, x: f64) -> Result<f64> {
    if n < 0 {
        return domain(format!("degree must be >= 0, got {n}"));
    }
    check_alpha(alpha)?;
    check_arg(x)?;
    let n = n as usize;
    if n == 0 {
        return Ok(1.0);
    }
    let mut prev = 1.0;
    let mut cur = alpha + 1.0 - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + alpha + 1.0 - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

const RESCALE: f64 = 1e200;

/// Orthonormal recurrence seeded with `exp(log_seed)` at `n = 0`.
///
/// Returns `q_0..=q_n_max` where `q_0 = exp(log_seed)`.
fn scaled_recurrence(n_max: usize, alpha: f64, u: f64, log_seed: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if log_seed == f64::NEG_INFINITY {
        return out;
    }
    let mut log_scale = log_seed;
    let mut scale = log_scale.exp();
    let emit = |v: f64, log_scale: f64, scale: f64| -> f64 {
        if scale > 0.0 && scale.is_finite() {
            v * scale
        } else if v == 0.0 {
            0.0
        } else {
            v.signum() * (v.abs().ln() + log_scale).exp()
        }
    };
    let mut prev = 0.0;
    let mut cur = 1.0;
    out[0] = emit(cur, log_scale, scale);
    let mut b_cur = 0.0; // b_n
    for n in 0..n_max {
        let nf = n as f64;
        let b_next = ((nf + 1.0) * (nf + 1.0 + alpha)).sqrt();
        let mut next = ((2.0 * nf + alpha + 1.0 - u) * cur - b_cur * prev) / b_next;
        let mut c = cur;
        if next.abs() > RESCALE {
            next /= RESCALE;
            c /= RESCALE;
            log_scale += RESCALE.ln();
            scale = log_scale.exp();
        }
        prev = c;
        cur = next;
        b_cur = b_next;
        out[n + 1] = emit(cur, log_scale, scale);
    }
    out
}

/// Damped orthonormal Laguerre functions in the `t` variable,
/// `q_n(t) = (n! / Gamma(n + alpha + 1))^(1/2) e^(-t/2) L_n^alpha(t)` for `n = 0..=n_max`.
///
/// `sum_n q_n(t)^2` is the reciprocal of `lambda(t) e^t` for the
/// Christoffel function of the weight `t^alpha e^(-t)`.
pub fn damped_batch(n_max: usize, alpha: f64, t: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    check_arg(t)?;
    let log_seed = -0.5 * ln_gamma(alpha + 1.0);
    Ok(scaled_recurrence(n_max, alpha, t, log_seed - 0.5 * t))
}

/// Values of one Laguerre function family for `n = 0..=n_max` at `x`.
pub fn laguerre_fn_batch(
    n_max: i64,
    alpha: f64,
    x: f64,
    family: LaguerreFamily,
) -> Result<Vec<f64>> {
    if n_max < 0 {
        return domain(format!("max degree must be >= 0, got {n_max}"));
    }
    check_alpha(alpha)?;
    check_arg(x)?;
    Ok(batch_unchecked(n_max as usize, alpha, x, family))
}

pub(crate) fn batch_unchecked(n_max: usize, alpha: f64, x: f64, family: LaguerreFamily) -> Vec<f64> {
    let norm = -0.5 * ln_gamma(alpha + 1.0);
    let ln_x = x.ln();
    // x^p with the convention 0^0 = 1
    let pow_log = |p: f64| if p == 0.0 { 0.0 } else { p * ln_x };
    let (u, log_pref) = match family {
        LaguerreFamily::F => (x * x, 0.5 * std::f64::consts::LN_2),
        LaguerreFamily::L => (x, pow_log(0.5 * alpha)),
        LaguerreFamily::M => (
            x * x,
            0.5 * (std::f64::consts::LN_2 + ln_x) + pow_log(alpha),
        ),
    };
    scaled_recurrence(n_max, alpha, u, norm + log_pref - 0.5 * u)
}

/// Univariate `F_n^alpha(x)` for a single `n`.
pub fn laguerre_fn_f(n: usize, alpha: f64, x: f64) -> Result<f64> {
    Ok(laguerre_fn_batch(n as i64, alpha, x, LaguerreFamily::F)?[n])
}

/// `d/dx F_n^alpha(x) = -x [F_n^alpha(x) + 2 sqrt(n) F_{n-1}^{alpha+1}(x)]`.
pub fn laguerre_fn_f_deriv(n: i64, alpha: f64, x: f64) -> Result<f64> {
    if n < 0 {
        return domain(format!("degree must be >= 0, got {n}"));
    }
    check_alpha(alpha)?;
    check_arg(x)?;
    Ok(f_deriv_batch(n as usize, alpha, x)[n as usize])
}

/// Derivatives `d/dx F_n^alpha(x)` for `n = 0..=n_max`.
pub(crate) fn f_deriv_batch(n_max: usize, alpha: f64, x: f64) -> Vec<f64> {
    let base = batch_unchecked(n_max, alpha, x, LaguerreFamily::F);
    let shifted = if n_max > 0 {
        batch_unchecked(n_max - 1, alpha + 1.0, x, LaguerreFamily::F)
    } else {
        Vec::new()
    };
    (0..=n_max)
        .map(|n| {
            let tail = if n == 0 {
                0.0
            } else {
                2.0 * (n as f64).sqrt() * shifted[n - 1]
            };
            -x * (base[n] + tail)
        })
        .collect()
}

/// `F_nu^alpha(x) = prod_i F_{nu_i}^{alpha_i}(x_i)`.
pub fn multivariate_f(nu: &MultiIndex, alpha: &AlphaVector, x: &[f64]) -> Result<f64> {
    if nu.dim() != alpha.dim() {
        return Err(Error::DimensionMismatch {
            expected: alpha.dim(),
            got: nu.dim(),
        });
    }
    alpha.check_point(x)?;
    Ok(nu
        .as_slice()
        .iter()
        .zip(alpha.as_slice())
        .zip(x)
        .map(|((&n, &a), &xi)| batch_unchecked(n, a, xi, LaguerreFamily::F)[n])
        .product())
}

/// Per-axis tables `F_k^{alpha_i}(x_i)` for `k = 0..=m_max`.
pub(crate) fn axis_tables(alpha: &AlphaVector, x: &[f64], m_max: usize, family: LaguerreFamily) -> Vec<Vec<f64>> {
    alpha
        .as_slice()
        .iter()
        .zip(x)
        .map(|(&a, &xi)| batch_unchecked(m_max, a, xi, family))
        .collect()
}

/// Degree-kernels `sum_{|nu| = m} prod_i A_i[nu_i]` for `m = 0..=m_max`,
/// by successive convolution of the per-axis sequences.
pub(crate) fn convolve_axes(per_axis: &[Vec<f64>], m_max: usize) -> Vec<f64> {
    let mut acc = per_axis[0][..=m_max].to_vec();
    for axis in &per_axis[1..] {
        let mut next = vec![0.0; m_max + 1];
        for (m, slot) in next.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in 0..=m {
                s += acc[m - k] * axis[k];
            }
            *slot = s;
        }
        acc = next;
    }
    acc
}

/// Projection kernels `F_m^alpha(x, y)` for every `m = 0..=m_max` of the given family.
pub fn degree_kernels(
    alpha: &AlphaVector,
    x: &[f64],
    y: &[f64],
    m_max: usize,
    family: LaguerreFamily,
) -> Result<Vec<f64>> {
    alpha.check_point(x)?;
    alpha.check_point(y)?;
    let tx = axis_tables(alpha, x, m_max, family);
    let ty = axis_tables(alpha, y, m_max, family);
    let per_axis: Vec<Vec<f64>> = tx
        .iter()
        .zip(&ty)
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u * v).collect())
        .collect();
    Ok(convolve_axes(&per_axis, m_max))
}

/// The degree-`m` projection kernel `F_m^alpha(x, y) = sum_{|nu| = m} F_nu(x) F_nu(y)`.
pub fn kernel_f_m(m: i64, alpha: &AlphaVector, x: &[f64], y: &[f64]) -> Result<f64> {
    if m < 0 {
        return domain(format!("degree must be >= 0, got {m}"));
    }
    let m = m as usize;
    Ok(degree_kernels(alpha, x, y, m, LaguerreFamily::F)?[m])
}
