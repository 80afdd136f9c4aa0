//! Functions of `V_N` represented by their Laguerre coefficients.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::CubatureGrid;
use crate::special_fn::{axis_tables, AlphaVector, LaguerreFamily, MultiIndex};

/// Largest coefficient box accepted, in entries.
pub const MAX_COEFF_ENTRIES: usize = 1 << 26;

/// `f = sum_{|nu| <= N} f_nu F_nu` stored densely over the box `[0, N]^d`,
/// row-major with the first axis slowest. Entries with `|nu| > N` are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffFn {
    alpha: AlphaVector,
    max_degree: usize,
    data: Vec<Complex64>,
}

pub(crate) fn box_len(side: usize, d: usize) -> Result<usize> {
    side.checked_pow(d as u32)
        .filter(|n| *n <= MAX_COEFF_ENTRIES)
        .ok_or(Error::ResourceCap {
            what: "coefficient entries",
            requested: (side as f64).powi(d as i32).min(u64::MAX as f64) as u64,
            cap: MAX_COEFF_ENTRIES as u64,
        })
}

/// Calls `f(flat, nu, |nu|)` for every multi-index of the box `[0, side)^d`.
pub(crate) fn for_each_index(side: usize, d: usize, mut f: impl FnMut(usize, &[usize], usize)) {
    let mut nu = vec![0usize; d];
    let total = side.pow(d as u32);
    let mut deg = 0;
    for flat in 0..total {
        f(flat, &nu, deg);
        for l in (0..d).rev() {
            nu[l] += 1;
            deg += 1;
            if nu[l] < side {
                break;
            }
            deg -= side;
            nu[l] = 0;
        }
    }
}

impl CoeffFn {
    pub fn zeros(alpha: &AlphaVector, max_degree: usize) -> Result<Self> {
        let len = box_len(max_degree + 1, alpha.dim())?;
        Ok(CoeffFn {
            alpha: alpha.clone(),
            max_degree,
            data: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    /// The basis function `F_nu`.
    pub fn basis(alpha: &AlphaVector, nu: &MultiIndex) -> Result<Self> {
        let mut f = Self::zeros(alpha, nu.degree())?;
        f.set(nu.as_slice(), Complex64::new(1.0, 0.0))?;
        Ok(f)
    }

    /// Independent standard normal real coefficients for every `|nu| <= N`.
    pub fn random_real(alpha: &AlphaVector, max_degree: usize, rng: &mut impl Rng) -> Result<Self> {
        let mut f = Self::zeros(alpha, max_degree)?;
        let side = max_degree + 1;
        let d = alpha.dim();
        let data = &mut f.data;
        for_each_index(side, d, |flat, _, deg| {
            if deg <= max_degree {
                data[flat] = Complex64::new(rng.sample(StandardNormal), 0.0);
            }
        });
        Ok(f)
    }

    /// Independent complex normal coefficients for every `|nu| <= N`.
    pub fn random_complex(alpha: &AlphaVector, max_degree: usize, rng: &mut impl Rng) -> Result<Self> {
        let mut f = Self::zeros(alpha, max_degree)?;
        let data = &mut f.data;
        for_each_index(max_degree + 1, alpha.dim(), |flat, _, deg| {
            if deg <= max_degree {
                data[flat] = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            }
        });
        Ok(f)
    }

    pub fn alpha(&self) -> &AlphaVector {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.alpha.dim()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Side length `N + 1` of the storage box.
    pub fn side(&self) -> usize {
        self.max_degree + 1
    }

    /// Dense storage over the box `[0, N]^d`.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    fn flat(&self, nu: &[usize]) -> Option<usize> {
        if nu.len() != self.dim() || nu.iter().sum::<usize>() > self.max_degree {
            return None;
        }
        Some(nu.iter().fold(0, |acc, &k| acc * self.side() + k))
    }

    /// `f_nu`; zero for indices outside `V_N`.
    pub fn get(&self, nu: &[usize]) -> Complex64 {
        self.flat(nu).map_or(Complex64::new(0.0, 0.0), |i| self.data[i])
    }

    pub fn set(&mut self, nu: &[usize], value: Complex64) -> Result<()> {
        if nu.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: nu.len() });
        }
        let idx = self.flat(nu).ok_or(Error::DegreeOverflow {
            degree: nu.iter().sum(),
            max: self.max_degree,
        })?;
        self.data[idx] = value;
        Ok(())
    }

    /// Nonzero coefficients in index order.
    pub fn entries(&self) -> Vec<(MultiIndex, Complex64)> {
        let mut out = Vec::new();
        let md = self.max_degree;
        for_each_index(self.side(), self.dim(), |flat, nu, deg| {
            let v = self.data[flat];
            if deg <= md && v != Complex64::new(0.0, 0.0) {
                out.push((MultiIndex::new(nu.to_vec()), v));
            }
        });
        out
    }

    pub fn from_entries(
        alpha: &AlphaVector,
        max_degree: usize,
        entries: &[(MultiIndex, Complex64)],
    ) -> Result<Self> {
        let mut f = Self::zeros(alpha, max_degree)?;
        for (nu, v) in entries {
            f.set(nu.as_slice(), *v)?;
        }
        Ok(f)
    }

    /// Largest `|nu|` with a nonzero coefficient (0 for the zero function).
    pub fn effective_degree(&self) -> usize {
        let mut best = 0;
        let md = self.max_degree;
        for_each_index(self.side(), self.dim(), |flat, _, deg| {
            if deg <= md && self.data[flat] != Complex64::new(0.0, 0.0) {
                best = best.max(deg);
            }
        });
        best
    }

    /// Copy with storage box `[0, n]^d`; fails if a nonzero coefficient would be lost.
    pub fn with_max_degree(&self, n: usize) -> Result<Self> {
        if n < self.max_degree && self.effective_degree() > n {
            return Err(Error::DegreeOverflow { degree: self.effective_degree(), max: n });
        }
        let mut out = Self::zeros(&self.alpha, n)?;
        let md = self.max_degree.min(n);
        let src_side = self.side();
        let dst_side = n + 1;
        let d = self.dim();
        for_each_index(md + 1, d, |_, nu, deg| {
            if deg <= md {
                let s = nu.iter().fold(0, |a, &k| a * src_side + k);
                let t = nu.iter().fold(0, |a, &k| a * dst_side + k);
                out.data[t] = self.data[s];
            }
        });
        Ok(out)
    }

    /// `(sum |f_nu|^2)^(1/2)`, which is `||f||_2`.
    pub fn norm_l2(&self) -> f64 {
        crate::summation::sum(self.data.iter().map(|c| c.norm_sqr())).sqrt()
    }

    /// `sum_{|nu| = n} |f_nu|^2` for `n = 0..=N`.
    pub fn degree_energies(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.max_degree + 1];
        let md = self.max_degree;
        for_each_index(self.side(), self.dim(), |flat, _, deg| {
            if deg <= md {
                out[deg] += self.data[flat].norm_sqr();
            }
        });
        out
    }

    /// `f_nu -> m(|nu|) f_nu`.
    pub fn map_by_degree(&self, m: impl Fn(usize) -> Complex64) -> Self {
        let mut out = self.clone();
        let md = self.max_degree;
        let data = &mut out.data;
        for_each_index(self.side(), self.dim(), |flat, _, deg| {
            if deg <= md {
                data[flat] *= m(deg);
            }
        });
        out
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.alpha != other.alpha {
            return Err(Error::AlphaMismatch);
        }
        Ok(())
    }

    /// `a f + b g` with storage box the larger of the two.
    pub fn linear_combination(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.max_degree.max(other.max_degree);
        let mut x = self.with_max_degree(n)?;
        let y = other.with_max_degree(n)?;
        for (u, v) in x.data.iter_mut().zip(&y.data) {
            *u = a * *u + b * v;
        }
        Ok(x)
    }

    /// `||f - g||_2`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        let one = Complex64::new(1.0, 0.0);
        Ok(self.linear_combination(one, other, -one)?.norm_l2())
    }

    /// Largest `|f_nu - g_nu|`.
    pub fn max_coeff_diff(&self, other: &Self) -> Result<f64> {
        let one = Complex64::new(1.0, 0.0);
        let diff = self.linear_combination(one, other, -one)?;
        Ok(diff.data.iter().map(|c| c.norm()).fold(0.0, f64::max))
    }

    /// `f(x) = sum_nu f_nu F_nu(x)`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        self.alpha.check_point(x)?;
        let tables = axis_tables(&self.alpha, x, self.max_degree, LaguerreFamily::F);
        let md = self.max_degree;
        let mut acc = Complex64::new(0.0, 0.0);
        for_each_index(self.side(), self.dim(), |flat, nu, deg| {
            if deg <= md {
                let w: f64 = nu.iter().enumerate().map(|(l, &k)| tables[l][k]).product();
                acc += self.data[flat] * w;
            }
        });
        Ok(acc)
    }

    /// Values at every grid point, in grid index order.
    pub fn evaluate_on_grid(&self, grid: &CubatureGrid) -> Result<Vec<Complex64>> {
        if grid.alpha != self.alpha {
            return Err(Error::AlphaMismatch);
        }
        let d = self.dim();
        let tables: Vec<ndarray::Array2<f64>> =
            (0..d).map(|l| super::tensor::node_table(grid, l, self.max_degree)).collect();
        let mut masked = self.data.clone();
        let md = self.max_degree;
        for_each_index(self.side(), d, |flat, _, deg| {
            if deg > md {
                masked[flat] = Complex64::new(0.0, 0.0);
            }
        });
        Ok(super::tensor::apply_all_modes_complex(&masked, &vec![self.side(); d], &tables))
    }

    /// Coefficients `f_nu = sum_xi c_xi f(xi) F_nu(xi)` from samples at the grid
    /// points (index order). Exact for `f` in `V_M` when `M + N <= 2n - 1`.
    pub fn from_samples(grid: &CubatureGrid, values: &[Complex64], max_degree: usize) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        let d = grid.dim();
        let coeffs = grid.coeffs();
        let weighted: Vec<Complex64> = values.iter().zip(&coeffs).map(|(v, c)| v * c).collect();
        let tables: Vec<ndarray::Array2<f64>> = (0..d)
            .map(|l| super::tensor::node_table(grid, l, max_degree).reversed_axes())
            .collect();
        let shape = vec![grid.n; d];
        let out = super::tensor::apply_all_modes_complex(&weighted, &shape, &tables);
        let mut f = Self::zeros(&grid.alpha, max_degree)?;
        let data = &mut f.data;
        for_each_index(max_degree + 1, d, |flat, _, deg| {
            if deg <= max_degree {
                data[flat] = out[flat];
            }
        });
        Ok(f)
    }
}

#[derive(Serialize, Deserialize)]
struct EntryRepr {
    nu: Vec<usize>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct CoeffFnRepr {
    alpha: Vec<f64>,
    #[serde(rename = "N")]
    n: usize,
    coeffs: Vec<EntryRepr>,
}

impl Serialize for CoeffFn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CoeffFnRepr {
            alpha: self.alpha.as_slice().to_vec(),
            n: self.max_degree,
            coeffs: self
                .entries()
                .into_iter()
                .map(|(nu, v)| EntryRepr { nu: nu.as_slice().to_vec(), re: v.re, im: v.im })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoeffFn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = CoeffFnRepr::deserialize(d)?;
        let alpha = AlphaVector::new(r.alpha).map_err(D::Error::custom)?;
        let mut f = CoeffFn::zeros(&alpha, r.n).map_err(D::Error::custom)?;
        for e in r.coeffs {
            f.set(&e.nu, Complex64::new(e.re, e.im)).map_err(D::Error::custom)?;
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::cubature_grid;
    use crate::special_fn::multivariate_f;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn storage_and_degree_rules() {
        let alpha = AlphaVector::uniform(0.0, 2).unwrap();
        let mut f = CoeffFn::zeros(&alpha, 3).unwrap();
        f.set(&[1, 2], c(2.0)).unwrap();
        assert!(f.set(&[2, 2], c(1.0)).is_err());
        assert_eq!(f.get(&[1, 2]), c(2.0));
        assert_eq!(f.get(&[3, 3]), c(0.0));
        assert_eq!(f.entries().len(), 1);
        assert_eq!(f.effective_degree(), 3);
        assert!(f.with_max_degree(2).is_err());
        let g = f.with_max_degree(5).unwrap();
        assert_eq!(g.get(&[1, 2]), c(2.0));
        assert_eq!(g.norm_l2(), 2.0);
    }

    #[test]
    fn index_walk_matches_degrees() {
        let mut seen = Vec::new();
        for_each_index(3, 2, |flat, nu, deg| {
            assert_eq!(deg, nu.iter().sum::<usize>());
            seen.push((flat, nu.to_vec()));
        });
        assert_eq!(seen.len(), 9);
        assert_eq!(seen[5], (5, vec![1, 2]));
    }

    #[test]
    fn evaluation_matches_basis_product() {
        let alpha = AlphaVector::new(vec![0.5, 1.0]).unwrap();
        let f = CoeffFn::basis(&alpha, &MultiIndex::new(vec![2, 1])).unwrap();
        let x = [0.7, 1.2];
        let v = f.evaluate(&x).unwrap();
        let e = multivariate_f(&MultiIndex::new(vec![2, 1]), &alpha, &x).unwrap();
        assert!((v.re - e).abs() < 1e-15 && v.im == 0.0);
    }

    #[test]
    fn samples_round_trip() {
        let alpha = AlphaVector::new(vec![0.0, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = CoeffFn::random_complex(&alpha, 6, &mut rng).unwrap();
        let grid = cubature_grid(0, &alpha, 0.03, 1.0).unwrap();
        assert!(grid.n >= 4);
        let g1 = cubature_grid(1, &alpha, 0.03, 1.0).unwrap();
        let values: Vec<Complex64> = (0..g1.len()).map(|i| f.evaluate(&g1.point(i)).unwrap()).collect();
        let fast = f.evaluate_on_grid(&g1).unwrap();
        for (a, b) in fast.iter().zip(&values) {
            assert!((a - b).norm() < 1e-13);
        }
        let back = CoeffFn::from_samples(&g1, &values, 6).unwrap();
        assert!(back.max_coeff_diff(&f).unwrap() < 1e-12);
    }

    #[test]
    fn json_shape() {
        let alpha = AlphaVector::uniform(0.0, 1).unwrap();
        let f = CoeffFn::basis(&alpha, &MultiIndex::new(vec![2])).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"alpha":[0.0],"N":2,"coeffs":[{"nu":[2],"re":1.0,"im":0.0}]}"#);
        let back: CoeffFn = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<CoeffFn>(r#"{"alpha":[0],"N":1,"coeffs":[{"nu":[2],"re":1,"im":0}]}"#).is_err());
    }

    #[test]
    fn linearity_helpers() {
        let alpha = AlphaVector::uniform(0.0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = CoeffFn::random_real(&alpha, 4, &mut rng).unwrap();
        let g = CoeffFn::random_real(&alpha, 7, &mut rng).unwrap();
        let h = f.linear_combination(c(2.0), &g, c(-1.0)).unwrap();
        assert_eq!(h.max_degree(), 7);
        assert_eq!(h.get(&[6]), -g.get(&[6]));
        assert!((h.get(&[1]) - (2.0 * f.get(&[1]) - g.get(&[1]))).norm() < 1e-15);
        let other = CoeffFn::zeros(&AlphaVector::uniform(1.0, 1).unwrap(), 2).unwrap();
        assert!(matches!(f.distance(&other), Err(Error::AlphaMismatch)));
    }
}
