//! Cut-off functions and the localized kernels built from them.
//!
//! `Lambda_n(x, y) = sum_m a(m / n) F_m(x, y)` where `F_m` is the degree-`m`
//! projection kernel. The related kernels for the `L` and `M` families are
//! obtained from it by the change of variable `x -> x^(1/2)` and by weight
//! factors respectively.

pub mod cutoff;
pub mod diagnostics;
pub mod jet;

pub use cutoff::{
    dual_default_pair, level_filter, level_max_degree, make_dual_pair, tight_default_pair,
    CutoffKind, CutoffPair, CutoffSpec, Profile, DEFAULT_DERIVATIVE_ORDER,
};
pub use diagnostics::{
    kernel_decay, lower_bound_check, DecayReport, DecaySample, DecaySpec, LowerBoundReport,
};

use crate::error::{domain, Error, Result};
use crate::special_fn::{
    axis_tables, check_nonneg_point, convolve_axes, degree_kernels, f_deriv_batch, AlphaVector,
    LaguerreFamily,
};

/// Largest degree `m` with `a(m / n)` possibly nonzero.
pub fn truncation_degree(n: usize, a_hat: &CutoffSpec) -> usize {
    (a_hat.support().1 * n as f64).floor() as usize
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return domain("n must be >= 1");
    }
    Ok(())
}

fn filtered(kernels: &[f64], weight: impl Fn(usize) -> f64) -> f64 {
    kernels
        .iter()
        .enumerate()
        .map(|(m, k)| {
            let w = weight(m);
            if w == 0.0 { 0.0 } else { w * k }
        })
        .sum()
}

/// `a(m / n)` for `m = 0..=truncation_degree(n, a_hat)`.
pub fn filter_weights(n: usize, a_hat: &CutoffSpec) -> Vec<f64> {
    (0..=truncation_degree(n, a_hat))
        .map(|m| a_hat.value(m as f64 / n as f64))
        .collect()
}

/// `sum_m weights[m] F_m(x, y)`.
pub fn filtered_kernel(alpha: &AlphaVector, weights: &[f64], x: &[f64], y: &[f64]) -> Result<f64> {
    let k = degree_kernels(alpha, x, y, weights.len() - 1, LaguerreFamily::F)?;
    Ok(filtered(&k, |m| weights[m]))
}

/// `d/dx_axis sum_m weights[m] F_m(x, y)`.
pub fn filtered_kernel_deriv(
    alpha: &AlphaVector,
    weights: &[f64],
    x: &[f64],
    y: &[f64],
    axis: usize,
) -> Result<f64> {
    alpha.check_point(x)?;
    alpha.check_point(y)?;
    if axis >= alpha.dim() {
        return Err(Error::Domain(format!(
            "axis {axis} out of range for dimension {}",
            alpha.dim()
        )));
    }
    let m_max = weights.len() - 1;
    let mut tx = axis_tables(alpha, x, m_max, LaguerreFamily::F);
    tx[axis] = f_deriv_batch(m_max, alpha.as_slice()[axis], x[axis]);
    let ty = axis_tables(alpha, y, m_max, LaguerreFamily::F);
    let per_axis: Vec<Vec<f64>> = tx
        .iter()
        .zip(&ty)
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u * v).collect())
        .collect();
    let k = convolve_axes(&per_axis, m_max);
    Ok(filtered(&k, |m| weights[m]))
}

/// `Lambda_n(x, y)`.
pub fn lambda_kernel(
    n: usize,
    alpha: &AlphaVector,
    a_hat: &CutoffSpec,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    check_n(n)?;
    filtered_kernel(alpha, &filter_weights(n, a_hat), x, y)
}

fn check_positive_for_alpha(alpha: &AlphaVector, x: &[f64]) -> Result<()> {
    alpha.check_point(x)?;
    check_nonneg_point(x)?;
    for (a, xi) in alpha.as_slice().iter().zip(x) {
        if *a > 0.0 && *xi == 0.0 {
            return domain("coordinates must be > 0 when alpha > 0");
        }
    }
    Ok(())
}

/// Kernel of the `L` family, from `Lambda_n` by `x -> x^(1/2)`:
/// `2^-d Lambda_n(x^(1/2), y^(1/2)) prod_i (x_i y_i)^(alpha_i / 2)`.
pub fn lambda_tilde(
    n: usize,
    alpha: &AlphaVector,
    a_hat: &CutoffSpec,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    check_positive_for_alpha(alpha, x)?;
    check_positive_for_alpha(alpha, y)?;
    let sx: Vec<f64> = x.iter().map(|v| v.sqrt()).collect();
    let sy: Vec<f64> = y.iter().map(|v| v.sqrt()).collect();
    let base = lambda_kernel(n, alpha, a_hat, &sx, &sy)?;
    let factor: f64 = alpha
        .as_slice()
        .iter()
        .zip(x.iter().zip(y))
        .map(|(a, (xi, yi))| 0.5 * if *a == 0.0 { 1.0 } else { (xi * yi).powf(0.5 * a) })
        .product();
    Ok(base * factor)
}

/// Direct sum of the `L`-family projection kernels.
pub fn lambda_tilde_direct(
    n: usize,
    alpha: &AlphaVector,
    a_hat: &CutoffSpec,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    check_n(n)?;
    check_positive_for_alpha(alpha, x)?;
    check_positive_for_alpha(alpha, y)?;
    let m_max = truncation_degree(n, a_hat);
    let k = degree_kernels(alpha, x, y, m_max, LaguerreFamily::L)?;
    Ok(filtered(&k, |m| a_hat.value(m as f64 / n as f64)))
}

/// Kernel of the `M` family: `Lambda_n(x, y) prod_i (x_i y_i)^(alpha_i + 1/2)`.
pub fn lambda_star(
    n: usize,
    alpha: &AlphaVector,
    a_hat: &CutoffSpec,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let base = lambda_kernel(n, alpha, a_hat, x, y)?;
    let factor: f64 = alpha
        .as_slice()
        .iter()
        .zip(x.iter().zip(y))
        .map(|(a, (xi, yi))| (xi * yi).powf(a + 0.5))
        .product();
    Ok(base * factor)
}

/// Direct sum of the `M`-family projection kernels.
pub fn lambda_star_direct(
    n: usize,
    alpha: &AlphaVector,
    a_hat: &CutoffSpec,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    check_n(n)?;
    let m_max = truncation_degree(n, a_hat);
    let k = degree_kernels(alpha, x, y, m_max, LaguerreFamily::M)?;
    Ok(filtered(&k, |m| a_hat.value(m as f64 / n as f64)))
}

/// `d/dx_r Lambda_n(x, y)` with `axis` counted from 0.
pub fn lambda_deriv(
    n: usize,
    alpha: &AlphaVector,
    a_hat: &CutoffSpec,
    x: &[f64],
    y: &[f64],
    axis: usize,
) -> Result<f64> {
    check_n(n)?;
    filtered_kernel_deriv(alpha, &filter_weights(n, a_hat), x, y, axis)
}

/// Level-`j` kernel `sum_m g_j(m) F_m(x, y)` with the level filter of `g`.
pub fn band_kernel(
    j: usize,
    alpha: &AlphaVector,
    g: &CutoffSpec,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let m_max = level_max_degree(g, j);
    let k = degree_kernels(alpha, x, y, m_max, LaguerreFamily::F)?;
    Ok(filtered(&k, |m| level_filter(g, j, m)))
}

/// `(Phi_j(x, y), Psi_j(x, y))`.
pub fn band_kernels(
    j: usize,
    alpha: &AlphaVector,
    pair: &CutoffPair,
    x: &[f64],
    y: &[f64],
) -> Result<(f64, f64)> {
    let m_max = level_max_degree(&pair.a_hat, j).max(level_max_degree(&pair.b_hat, j));
    let k = degree_kernels(alpha, x, y, m_max, LaguerreFamily::F)?;
    Ok((
        filtered(&k, |m| pair.a_level(j, m)),
        filtered(&k, |m| pair.b_level(j, m)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::cubature_grid;
    use crate::special_fn::{laguerre_fn_f, multivariate_f, MultiIndex};

    fn a1() -> AlphaVector {
        AlphaVector::uniform(0.0, 1).unwrap()
    }

    #[test]
    fn symmetry() {
        let al = AlphaVector::new(vec![0.5, 1.0]).unwrap();
        let a = CutoffSpec::type_a(1.0).unwrap();
        let x = [0.7, 1.9];
        let y = [1.3, 0.4];
        let u = lambda_kernel(16, &al, &a, &x, &y).unwrap();
        let v = lambda_kernel(16, &al, &a, &y, &x).unwrap();
        assert!((u - v).abs() < 1e-14 * u.abs().max(1.0));
        let u = lambda_tilde(16, &al, &a, &x, &y).unwrap();
        let v = lambda_tilde(16, &al, &a, &y, &x).unwrap();
        assert!((u - v).abs() < 1e-14 * u.abs().max(1.0));
    }

    #[test]
    fn tilde_and_star_relations_match_direct_sums() {
        let a = CutoffSpec::type_b(0.5, 1.0).unwrap();
        for &al in &[0.0, 0.5, 2.0] {
            let alpha = AlphaVector::uniform(al, 1).unwrap();
            for &(x, y) in &[(0.3, 0.9), (2.0, 2.5), (5.0, 0.8), (31.0, 30.0)] {
                let r = lambda_tilde(32, &alpha, &a, &[x], &[y]).unwrap();
                let d = lambda_tilde_direct(32, &alpha, &a, &[x], &[y]).unwrap();
                assert!((r - d).abs() <= 1e-10 * d.abs().max(1e-300), "tilde {al} {x} {y}: {r} {d}");
                let r = lambda_star(32, &alpha, &a, &[x.sqrt()], &[y.sqrt()]).unwrap();
                let d = lambda_star_direct(32, &alpha, &a, &[x.sqrt()], &[y.sqrt()]).unwrap();
                assert!((r - d).abs() <= 1e-10 * d.abs().max(1e-300), "star {al} {x} {y}: {r} {d}");
            }
        }
        let alpha = AlphaVector::new(vec![0.5, 1.5]).unwrap();
        let r = lambda_tilde(8, &alpha, &a, &[0.5, 1.5], &[2.0, 0.7]).unwrap();
        let d = lambda_tilde_direct(8, &alpha, &a, &[0.5, 1.5], &[2.0, 0.7]).unwrap();
        assert!((r - d).abs() <= 1e-10 * d.abs());
    }

    #[test]
    fn tilde_rejects_zero_coordinate_for_positive_alpha() {
        let alpha = AlphaVector::uniform(1.0, 1).unwrap();
        let a = CutoffSpec::type_a(1.0).unwrap();
        assert!(lambda_tilde(4, &alpha, &a, &[0.0], &[1.0]).is_err());
        assert!(lambda_tilde(4, &a1(), &a, &[0.0], &[1.0]).is_ok());
    }

    #[test]
    fn derivative_against_finite_differences() {
        let alpha = AlphaVector::new(vec![0.0, 1.0]).unwrap();
        let a = CutoffSpec::type_a(1.0).unwrap();
        let h = 1e-5;
        let x = [1.3, 2.2];
        let y = [1.1, 2.6];
        for axis in 0..2 {
            let d = lambda_deriv(64, &alpha, &a, &x, &y, axis).unwrap();
            let mut xp = x;
            let mut xm = x;
            xp[axis] += h;
            xm[axis] -= h;
            let fd = (lambda_kernel(64, &alpha, &a, &xp, &y).unwrap()
                - lambda_kernel(64, &alpha, &a, &xm, &y).unwrap())
                / (2.0 * h);
            assert!((d - fd).abs() < 1e-5 * d.abs().max(1.0), "axis {axis}: {d} vs {fd}");
        }
        assert!(lambda_deriv(64, &alpha, &a, &x, &y, 2).is_err());
    }

    #[test]
    fn band_zero_is_single_term() {
        let alpha = AlphaVector::uniform(0.5, 1).unwrap();
        let pair = tight_default_pair();
        let (phi, psi) = band_kernels(0, &alpha, &pair, &[0.8], &[1.7]).unwrap();
        let e = laguerre_fn_f(0, 0.5, 0.8).unwrap() * laguerre_fn_f(0, 0.5, 1.7).unwrap();
        assert!((phi - e).abs() < 1e-15 && (psi - e).abs() < 1e-15);
    }

    #[test]
    fn reproducing_property_via_cubature() {
        // Lambda_n * g = g for g in V_N when a(m/n) = 1 for m <= N.
        let alpha = a1();
        let a = CutoffSpec::type_a(1.0).unwrap();
        let n = 16;
        let grid = cubature_grid(3, &alpha, 0.03, 1.0).unwrap();
        let coeffs: Vec<f64> = (0..=n).map(|k| ((k * 7 + 3) % 11) as f64 / 11.0 - 0.5).collect();
        let g = |x: f64| -> f64 {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * multivariate_f(&MultiIndex::new(vec![k]), &alpha, &[x]).unwrap())
                .sum()
        };
        for &x in &[0.2, 1.1, 2.9, 4.4] {
            let mut acc = 0.0;
            for i in 0..grid.len() {
                let xi = grid.point(i);
                acc += grid.coeff(i) * lambda_kernel(n, &alpha, &a, &[x], &xi).unwrap() * g(xi[0]);
            }
            assert!((acc - g(x)).abs() < 1e-9 * g(x).abs().max(1.0), "x={x}");
        }
    }
}
