//! A fixed, deterministic set of test functions in `V_N`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::needlets::CoeffFn;
use crate::quadrature::{cubature_grid, level_node_count};
use crate::special_fn::{AlphaVector, MultiIndex};

fn axis_index(d: usize, m: usize, spread: bool) -> MultiIndex {
    let mut nu = vec![0; d];
    if spread && d > 1 {
        nu[0] = m - m / 2;
        nu[1] = m / 2;
    } else {
        nu[0] = m;
    }
    MultiIndex::new(nu)
}

/// Twenty functions of `V_N`: basis elements, random spectra with algebraic
/// decay, flat bands and projections of Gaussian bumps. `N >= 4`.
pub fn default_corpus(alpha: &AlphaVector, max_degree: usize) -> Result<Vec<(String, CoeffFn)>> {
    let d = alpha.dim();
    let n = max_degree.max(4);
    let mut out = Vec::with_capacity(20);
    for (k, m) in [0, 1, 3, n / 4, n / 2, n].into_iter().enumerate() {
        let f = CoeffFn::basis(alpha, &axis_index(d, m, k % 2 == 1))?.with_max_degree(n)?;
        out.push((format!("basis_{m}"), f));
    }
    for seed in 1..=2u64 {
        for decay in [0, 1, 2] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = CoeffFn::random_real(alpha, n, &mut rng)?;
            let f = f.map_by_degree(|m| Complex64::new(((m + 1) as f64).powi(-decay), 0.0));
            out.push((format!("random_s{seed}_decay{decay}"), f));
        }
    }
    for (lo, hi) in [(0, 1), (n / 8, n / 4), (n / 4, n / 2), (n / 2, n)] {
        let f = CoeffFn::random_real(alpha, n, &mut ChaCha8Rng::seed_from_u64(100 + lo as u64))?;
        let f = f.map_by_degree(|m| Complex64::new(if (lo..=hi).contains(&m) { 1.0 } else { 0.0 }, 0.0));
        out.push((format!("band_{lo}_{hi}"), f));
    }
    let mut j = 0;
    while level_node_count(j, 0.03, 1.0) < 2 * n + 2 {
        j += 1;
    }
    let grid = cubature_grid(j, alpha, 0.03, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..4 {
        let centre: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..2.0 + k as f64)).collect();
        let width = 0.3 + 0.4 * k as f64;
        let values: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                let x = grid.point(i);
                let r2: f64 = x.iter().zip(&centre).map(|(a, b)| (a - b).powi(2)).sum();
                Complex64::new((-r2 / (2.0 * width * width)).exp(), 0.0)
            })
            .collect();
        out.push((format!("bump_{k}"), CoeffFn::from_samples(&grid, &values, n)?));
    }
    Ok(out)
}
