//! Mode products of row-major tensors with per-axis matrices.

use ndarray::{Array2, ArrayView2, ArrayView3, Axis};
use num_complex::Complex64;

use crate::quadrature::CubatureGrid;
use crate::special_fn::{batch_unchecked, LaguerreFamily};

/// `T[gamma][k] = F_k(xi_gamma)` for the nodes of one grid axis, `k = 0..=max_degree`.
pub fn node_table(grid: &CubatureGrid, axis: usize, max_degree: usize) -> Array2<f64> {
    let alpha = grid.alpha.as_slice()[axis];
    let nodes = grid.axis_nodes(axis);
    let mut t = Array2::zeros((nodes.len(), max_degree + 1));
    for (g, &x) in nodes.iter().enumerate() {
        let row = batch_unchecked(max_degree, alpha, x, LaguerreFamily::F);
        for (k, v) in row.into_iter().enumerate() {
            t[(g, k)] = v;
        }
    }
    t
}

/// Contracts axis `axis` of `data` (row-major, `shape`) with `m` (`rows x shape[axis]`).
pub fn mode_product(data: &[f64], shape: &[usize], axis: usize, m: ArrayView2<f64>) -> Vec<f64> {
    let before: usize = shape[..axis].iter().product();
    let cols = shape[axis];
    let after: usize = shape[axis + 1..].iter().product();
    assert_eq!(m.ncols(), cols, "matrix does not match tensor axis");
    let rows = m.nrows();
    let x = ArrayView3::from_shape((before, cols, after), data).expect("tensor shape");
    let mut out = Vec::with_capacity(before * rows * after);
    for a in 0..before {
        let block = m.dot(&x.index_axis(Axis(0), a));
        out.extend(block.iter());
    }
    out
}

/// Applies `mats[l]` along every axis `l` in turn.
pub fn apply_all_modes(data: &[f64], shape: &[usize], mats: &[Array2<f64>]) -> Vec<f64> {
    let mut cur = data.to_vec();
    let mut shape = shape.to_vec();
    for (l, m) in mats.iter().enumerate() {
        cur = mode_product(&cur, &shape, l, m.view());
        shape[l] = m.nrows();
    }
    cur
}

/// [`apply_all_modes`] applied to real and imaginary parts separately.
pub fn apply_all_modes_complex(data: &[Complex64], shape: &[usize], mats: &[Array2<f64>]) -> Vec<Complex64> {
    let re: Vec<f64> = data.iter().map(|c| c.re).collect();
    let re_out = apply_all_modes(&re, shape, mats);
    if data.iter().all(|c| c.im == 0.0) {
        return re_out.into_iter().map(|r| Complex64::new(r, 0.0)).collect();
    }
    let im: Vec<f64> = data.iter().map(|c| c.im).collect();
    let im_out = apply_all_modes(&im, shape, mats);
    re_out
        .into_iter()
        .zip(im_out)
        .map(|(r, i)| Complex64::new(r, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn mode_products_against_loops() {
        // X has shape (2, 3); A is 4 x 2 on axis 0, B is 1 x 3 on axis 1.
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let a = array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, -1.0]];
        let b = array![[1.0, 10.0, 100.0]];
        let y = apply_all_modes(&x, &[2, 3], &[a.clone(), b.clone()]);
        assert_eq!(y.len(), 4);
        for r in 0..4 {
            let mut s = 0.0;
            for i in 0..2 {
                for k in 0..3 {
                    s += a[(r, i)] * x[i * 3 + k] * b[(0, k)];
                }
            }
            assert_eq!(y[r], s);
        }
    }
}
