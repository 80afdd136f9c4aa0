//! Needlet systems and their analysis and synthesis operators.
//!
//! Functions are handled through their Laguerre coefficients, so
//! `<f, phi_xi> = c_xi^(1/2) sum_nu a(|nu| / 4^(j-1)) f_nu F_nu(xi)` is computed
//! exactly as a tensor contraction with per-axis node tables. Reconstruction
//! `synthesize(analyze(f)) = f` holds for `f` in `V_{4^(J-1)}`: above that
//! degree the dyadic partition of unity is no longer complete at the top level.

mod coeff;
pub mod tensor;

use std::sync::Arc;

use ndarray::{s, Array2};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use coeff::{CoeffFn, MAX_COEFF_ENTRIES};

use crate::error::{Error, Result};
use crate::kernels::{filtered_kernel, level_filter, level_max_degree, CutoffPair};
use crate::quadrature::{cubature_grid_with, CubatureGrid, GridOptions};
use crate::special_fn::AlphaVector;
pub(crate) use coeff::for_each_index;
use tensor::{apply_all_modes_complex, node_table};

/// Default cap on the memory held by a system's tables, in bytes.
pub const DEFAULT_MEMORY_CAP: u64 = 2 << 30;

/// Everything that determines a system; its hash is the system identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub levels: usize,
    pub alpha: AlphaVector,
    pub pair: CutoffPair,
    pub delta: f64,
    pub c_star: f64,
}

impl SystemConfig {
    /// Hex SHA-256 of the JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Phi,
    Psi,
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub memory_cap: u64,
    pub grid: GridOptions,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { memory_cap: DEFAULT_MEMORY_CAP, grid: GridOptions::default() }
    }
}

#[derive(Clone, Debug)]
struct Level {
    grid: Arc<CubatureGrid>,
    degree: usize,
    tables: Vec<Array2<f64>>,
    sqrt_coeffs: Vec<f64>,
    a_filter: Vec<f64>,
    b_filter: Vec<f64>,
}

/// Levels `0..=J` of needlets on their cubature grids.
#[derive(Clone, Debug)]
pub struct NeedletSystem {
    config: SystemConfig,
    hash: String,
    levels: Vec<Level>,
}

/// `J = 0` keeps only the constant band.
fn top_degree(levels: usize) -> usize {
    4usize.pow(levels as u32)
}

/// Builds all grids and node tables for levels `0..=levels`.
pub fn build_system(
    levels: usize,
    alpha: &AlphaVector,
    pair: &CutoffPair,
    delta: f64,
    c_star: f64,
) -> Result<NeedletSystem> {
    build_system_with(
        SystemConfig { levels, alpha: alpha.clone(), pair: pair.clone(), delta, c_star },
        &BuildOptions::default(),
    )
}

pub fn build_system_with(config: SystemConfig, opts: &BuildOptions) -> Result<NeedletSystem> {
    if config.levels > 12 {
        return Err(Error::ResourceCap { what: "levels", requested: config.levels as u64, cap: 12 });
    }
    let d = config.alpha.dim();
    let cap_degree = top_degree(config.levels);
    let mut plan = Vec::new();
    let mut bytes: u64 = 0;
    for j in 0..=config.levels {
        let grid = cubature_grid_with(j as u32, &config.alpha, config.delta, config.c_star, &opts.grid)?;
        let degree = level_max_degree(&config.pair.a_hat, j)
            .max(level_max_degree(&config.pair.b_hat, j))
            .min(cap_degree);
        bytes += 8 * (d * grid.n * (degree + 1) + 3 * grid.len()) as u64;
        plan.push((grid, degree));
    }
    if bytes > opts.memory_cap {
        return Err(Error::ResourceCap { what: "needlet table bytes", requested: bytes, cap: opts.memory_cap });
    }
    let mut levels = Vec::with_capacity(plan.len());
    for (j, (grid, degree)) in plan.into_iter().enumerate() {
        let tables: Vec<Array2<f64>> = (0..d).map(|l| node_table(&grid, l, degree)).collect();
        spot_check(&grid, &tables, j)?;
        let sqrt_coeffs = grid.coeffs().into_iter().map(f64::sqrt).collect();
        let a_filter = (0..=degree).map(|m| level_filter(&config.pair.a_hat, j, m)).collect();
        let b_filter = (0..=degree).map(|m| level_filter(&config.pair.b_hat, j, m)).collect();
        levels.push(Level { grid, degree, tables, sqrt_coeffs, a_filter, b_filter });
    }
    let hash = config.hash();
    Ok(NeedletSystem { config, hash, levels })
}

/// Checks discrete orthonormality of the lowest and highest table columns.
fn spot_check(grid: &CubatureGrid, tables: &[Array2<f64>], j: usize) -> Result<()> {
    for (l, t) in tables.iter().enumerate() {
        let c = grid.axis_coeffs(l);
        let top = t.ncols() - 1;
        let gram = |a: usize, b: usize| -> f64 { (0..t.nrows()).map(|g| c[g] * t[(g, a)] * t[(g, b)]).sum() };
        let err = (gram(0, 0) - 1.0).abs().max((gram(top, top) - 1.0).abs()).max(if top > 0 { gram(0, top).abs() } else { 0.0 });
        if !(err < 1e-9) {
            return Err(Error::Convergence(format!(
                "cubature spot test failed at level {j}, axis {l}: error {err:e}"
            )));
        }
    }
    Ok(())
}

impl NeedletSystem {
    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    /// Identity shared by every coefficient set this system produces.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    /// `J`.
    pub fn max_level(&self) -> usize {
        self.config.levels
    }

    pub fn alpha(&self) -> &AlphaVector {
        &self.config.alpha
    }

    pub fn pair(&self) -> &CutoffPair {
        &self.config.pair
    }

    pub fn tight(&self) -> bool {
        self.config.pair.tight
    }

    pub fn grid(&self, j: usize) -> Result<&Arc<CubatureGrid>> {
        self.level(j).map(|l| &l.grid)
    }

    /// Largest degree touched by level `j`.
    pub fn level_degree(&self, j: usize) -> Result<usize> {
        self.level(j).map(|l| l.degree)
    }

    /// Largest degree accepted by [`analyze`], `4^J`.
    pub fn top_degree(&self) -> usize {
        top_degree(self.config.levels)
    }

    /// Degree up to which reconstruction is exact, `4^(J-1)` (0 when `J = 0`).
    pub fn reconstruction_degree(&self) -> usize {
        if self.config.levels == 0 { 0 } else { 4usize.pow(self.config.levels as u32 - 1) }
    }

    fn level(&self, j: usize) -> Result<&Level> {
        self.levels.get(j).ok_or(Error::UnknownLevel { level: j, max: self.config.levels })
    }

    /// `c_xi^(1/2) Phi_j(x, xi)` or `c_xi^(1/2) Psi_j(x, xi)`.
    pub fn evaluate_needlet(&self, j: usize, index: usize, x: &[f64], which: Which) -> Result<f64> {
        let level = self.level(j)?;
        if index >= level.grid.len() {
            return Err(Error::UnknownNode { level: j, index });
        }
        let xi = level.grid.point(index);
        let filter = match which {
            Which::Phi => &level.a_filter,
            Which::Psi => &level.b_filter,
        };
        Ok(level.sqrt_coeffs[index] * filtered_kernel(self.alpha(), filter, x, &xi)?)
    }

    fn analyze_level(&self, level: &Level, f: &CoeffFn) -> Vec<Complex64> {
        let d = self.alpha().dim();
        let deg = level.degree.min(f.max_degree());
        let side = deg + 1;
        let src_side = f.side();
        let mut g = vec![Complex64::new(0.0, 0.0); side.pow(d as u32)];
        for_each_index(side, d, |flat, nu, m| {
            if m <= deg {
                let w = level.a_filter[m];
                if w != 0.0 {
                    let src = nu.iter().fold(0, |a, &k| a * src_side + k);
                    g[flat] = f.data()[src] * w;
                }
            }
        });
        let mats: Vec<Array2<f64>> = level.tables.iter().map(|t| t.slice(s![.., ..=deg]).to_owned()).collect();
        let mut out = apply_all_modes_complex(&g, &vec![side; d], &mats);
        for (v, c) in out.iter_mut().zip(&level.sqrt_coeffs) {
            *v *= *c;
        }
        out
    }

    /// `S_phi f = {<f, phi_xi>}`.
    pub fn analyze(&self, f: &CoeffFn) -> Result<NeedletCoeffs> {
        if f.alpha() != self.alpha() {
            return Err(Error::AlphaMismatch);
        }
        let eff = f.effective_degree();
        if eff > self.top_degree() {
            return Err(Error::DegreeOverflow { degree: eff, max: self.top_degree() });
        }
        let levels: Vec<Vec<Complex64>> = self.levels.par_iter().map(|l| self.analyze_level(l, f)).collect();
        Ok(NeedletCoeffs { provenance: self.hash.clone(), levels })
    }

    fn synthesize_level(&self, level: &Level, h: &[Complex64]) -> Vec<Complex64> {
        let d = self.alpha().dim();
        let u: Vec<Complex64> = h.iter().zip(&level.sqrt_coeffs).map(|(v, c)| v * c).collect();
        let mats: Vec<Array2<f64>> = level.tables.iter().map(|t| t.t().to_owned()).collect();
        let mut g = apply_all_modes_complex(&u, &vec![level.grid.n; d], &mats);
        for_each_index(level.degree + 1, d, |flat, _, m| {
            g[flat] *= if m <= level.degree { level.b_filter[m] } else { 0.0 };
        });
        g
    }

    /// `T_psi h = sum_xi h_xi psi_xi`.
    pub fn synthesize(&self, coeffs: &NeedletCoeffs) -> Result<CoeffFn> {
        self.check_coeffs(coeffs)?;
        let d = self.alpha().dim();
        let top = self.levels.iter().map(|l| l.degree).max().unwrap_or(0);
        let parts: Vec<Vec<Complex64>> = self
            .levels
            .par_iter()
            .zip(&coeffs.levels)
            .map(|(l, h)| self.synthesize_level(l, h))
            .collect();
        let mut out = CoeffFn::zeros(self.alpha(), top)?;
        let dst_side = top + 1;
        for (level, part) in self.levels.iter().zip(&parts) {
            let side = level.degree + 1;
            let data = out.data_mut();
            for_each_index(side, d, |flat, nu, m| {
                if m <= level.degree {
                    let t = nu.iter().fold(0, |a, &k| a * dst_side + k);
                    data[t] += part[flat];
                }
            });
        }
        Ok(out)
    }

    fn check_coeffs(&self, coeffs: &NeedletCoeffs) -> Result<()> {
        if coeffs.provenance != self.hash {
            return Err(Error::ProvenanceMismatch { expected: self.hash.clone(), found: coeffs.provenance.clone() });
        }
        if coeffs.levels.len() != self.levels.len() {
            return Err(Error::UnknownLevel { level: coeffs.levels.len().saturating_sub(1), max: self.config.levels });
        }
        for (j, (l, h)) in self.levels.iter().zip(&coeffs.levels).enumerate() {
            if h.len() != l.grid.len() {
                return Err(Error::UnknownNode { level: j, index: h.len() });
            }
        }
        Ok(())
    }

    /// All-zero coefficients carrying this system's identity.
    pub fn zero_coeffs(&self) -> NeedletCoeffs {
        NeedletCoeffs {
            provenance: self.hash.clone(),
            levels: self.levels.iter().map(|l| vec![Complex64::new(0.0, 0.0); l.grid.len()]).collect(),
        }
    }

    /// Min and max of `sum_xi |<f, phi_xi>|^2` over random unit-norm `f` in `V_{4^(J-1)}`.
    pub fn frame_bounds(&self, trials: usize, seed: u64) -> Result<FrameBounds> {
        if trials == 0 {
            return Err(Error::Domain("trials must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for _ in 0..trials {
            let f = CoeffFn::random_real(self.alpha(), self.reconstruction_degree(), &mut rng)?;
            let nf = f.norm_l2();
            let f = f.map_by_degree(|_| Complex64::new(1.0 / nf, 0.0));
            let e = self.analyze(&f)?.energy();
            lo = lo.min(e);
            hi = hi.max(e);
        }
        Ok(FrameBounds { a_est: lo, b_est: hi, trials })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub a_est: f64,
    pub b_est: f64,
    pub trials: usize,
}

/// Needlet coefficients `h_xi`, per level in grid index order.
#[derive(Clone, Debug, PartialEq)]
pub struct NeedletCoeffs {
    pub provenance: String,
    pub levels: Vec<Vec<Complex64>>,
}

impl NeedletCoeffs {
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn get(&self, j: usize, index: usize) -> Result<Complex64> {
        let max = self.levels.len().saturating_sub(1);
        let l = self.levels.get(j).ok_or(Error::UnknownLevel { level: j, max })?;
        l.get(index).copied().ok_or(Error::UnknownNode { level: j, index })
    }

    pub fn set(&mut self, j: usize, index: usize, value: Complex64) -> Result<()> {
        let max = self.levels.len().saturating_sub(1);
        let l = self.levels.get_mut(j).ok_or(Error::UnknownLevel { level: j, max })?;
        let slot = l.get_mut(index).ok_or(Error::UnknownNode { level: j, index })?;
        *slot = value;
        Ok(())
    }

    /// `sum_xi |h_xi|^2`.
    pub fn energy(&self) -> f64 {
        crate::summation::sum(self.levels.iter().flatten().map(|c| c.norm_sqr()))
    }

    /// Per-level `sum_xi |h_xi|^2`.
    pub fn level_energies(&self) -> Vec<f64> {
        self.levels
            .iter()
            .map(|l| crate::summation::sum(l.iter().map(|c| c.norm_sqr())))
            .collect()
    }

    /// CSV with columns `level,node_index,xi_1..xi_d,re,im`.
    pub fn to_csv(&self, system: &NeedletSystem) -> Result<String> {
        system.check_coeffs(self)?;
        let d = system.alpha().dim();
        let mut out = String::from("level,node_index");
        for l in 1..=d {
            out.push_str(&format!(",xi_{l}"));
        }
        out.push_str(",re,im\n");
        for (j, level) in self.levels.iter().enumerate() {
            let grid = system.grid(j)?;
            for (i, v) in level.iter().enumerate() {
                out.push_str(&format!("{j},{i}"));
                for x in grid.point(i) {
                    out.push_str(&format!(",{}", crate::io::format_g17(x)));
                }
                out.push_str(&format!(",{},{}\n", crate::io::format_g17(v.re), crate::io::format_g17(v.im)));
            }
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct LevelRepr {
    level: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CoeffsRepr {
    provenance: String,
    levels: Vec<LevelRepr>,
}

impl Serialize for NeedletCoeffs {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CoeffsRepr {
            provenance: self.provenance.clone(),
            levels: self
                .levels
                .iter()
                .enumerate()
                .map(|(j, l)| LevelRepr {
                    level: j,
                    re: l.iter().map(|c| c.re).collect(),
                    im: l.iter().map(|c| c.im).collect(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NeedletCoeffs {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = CoeffsRepr::deserialize(d)?;
        let mut levels = Vec::with_capacity(r.levels.len());
        for (j, l) in r.levels.into_iter().enumerate() {
            if l.level != j || l.re.len() != l.im.len() {
                return Err(D::Error::custom(format!("malformed level entry {j}")));
            }
            levels.push(l.re.into_iter().zip(l.im).map(|(a, b)| Complex64::new(a, b)).collect());
        }
        Ok(NeedletCoeffs { provenance: r.provenance, levels })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{band_kernels, dual_default_pair, tight_default_pair};
    use crate::quadrature::level_node_count;
    use crate::special_fn::{multivariate_f, MultiIndex};

    fn one(alpha: f64) -> AlphaVector {
        AlphaVector::uniform(alpha, 1).unwrap()
    }

    #[test]
    fn level_zero_needlets_are_multiples_of_the_ground_state() {
        let sys = build_system(0, &one(0.5), &tight_default_pair(), 0.03, 1.0).unwrap();
        let g = sys.grid(0).unwrap().clone();
        for i in 0..g.len() {
            let x = [1.3];
            let v = sys.evaluate_needlet(0, i, &x, Which::Phi).unwrap();
            let f0x = multivariate_f(&MultiIndex::new(vec![0]), sys.alpha(), &x).unwrap();
            let f0xi = multivariate_f(&MultiIndex::new(vec![0]), sys.alpha(), &g.point(i)).unwrap();
            assert!((v - g.coeff(i).sqrt() * f0xi * f0x).abs() < 1e-15);
        }
        assert!(matches!(sys.evaluate_needlet(0, g.len(), &[1.0], Which::Phi), Err(Error::UnknownNode { .. })));
        assert!(matches!(sys.evaluate_needlet(1, 0, &[1.0], Which::Phi), Err(Error::UnknownLevel { .. })));
    }

    #[test]
    fn node_counts_follow_the_level_formula() {
        let sys = build_system(3, &one(0.0), &tight_default_pair(), 0.03, 1.0).unwrap();
        for j in 0..=3 {
            let expect = ((1.0 + 11.0 * 0.03) * 6f64.sqrt() * 4f64.powi(j as i32)).floor() as usize + 1;
            assert_eq!(sys.grid(j).unwrap().len(), expect);
            assert_eq!(level_node_count(j as u32, 0.03, 1.0), expect);
        }
    }

    #[test]
    fn hash_is_deterministic_and_sensitive() {
        let a = build_system(1, &one(0.0), &tight_default_pair(), 0.03, 1.0).unwrap();
        let b = build_system(1, &one(0.0), &tight_default_pair(), 0.03, 1.0).unwrap();
        let c = build_system(1, &one(0.0), &dual_default_pair(), 0.03, 1.0).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn analysis_bands_and_zero() {
        let sys = build_system(3, &one(0.0), &tight_default_pair(), 0.03, 1.0).unwrap();
        let z = CoeffFn::zeros(sys.alpha(), 8).unwrap();
        assert_eq!(sys.analyze(&z).unwrap().energy(), 0.0);
        // a(8 / 4^(j-1)) is nonzero only for j = 2, 3
        let f = CoeffFn::basis(sys.alpha(), &MultiIndex::new(vec![8])).unwrap();
        let e = sys.analyze(&f).unwrap().level_energies();
        assert_eq!(e[0], 0.0);
        assert_eq!(e[1], 0.0);
        assert!(e[2] > 0.0 && e[3] > 0.0);
        let big = CoeffFn::basis(sys.alpha(), &MultiIndex::new(vec![65])).unwrap();
        assert!(matches!(sys.analyze(&big), Err(Error::DegreeOverflow { .. })));
        let other = CoeffFn::zeros(&one(1.0), 2).unwrap();
        assert!(matches!(sys.analyze(&other), Err(Error::AlphaMismatch)));
    }

    #[test]
    fn reconstruction_tight_and_dual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for pair in [tight_default_pair(), dual_default_pair()] {
            for alpha in [AlphaVector::uniform(0.5, 1).unwrap(), AlphaVector::new(vec![0.5, 1.0]).unwrap()] {
                let sys = build_system(2, &alpha, &pair, 0.03, 1.0).unwrap();
                let f = CoeffFn::random_complex(&alpha, sys.reconstruction_degree(), &mut rng).unwrap();
                let h = sys.analyze(&f).unwrap();
                let g = sys.synthesize(&h).unwrap();
                assert!(g.distance(&f).unwrap() < 1e-11 * f.norm_l2());
                if pair.tight {
                    assert!((h.energy() - f.norm_l2().powi(2)).abs() < 1e-11 * f.norm_l2().powi(2));
                }
            }
        }
    }

    #[test]
    fn single_coefficient_synthesis_is_a_needlet() {
        let sys = build_system(2, &one(0.0), &dual_default_pair(), 0.03, 1.0).unwrap();
        let mut h = sys.zero_coeffs();
        let j = 2;
        let idx = 7;
        h.set(j, idx, Complex64::new(1.0, 0.0)).unwrap();
        let g = sys.synthesize(&h).unwrap();
        for i in 0..20 {
            let x = [0.37 * i as f64];
            let direct = sys.evaluate_needlet(j, idx, &x, Which::Psi).unwrap();
            assert!((g.evaluate(&x).unwrap().re - direct).abs() < 1e-10);
        }
        let grid = sys.grid(j).unwrap();
        let (_, psi) = band_kernels(j, sys.alpha(), sys.pair(), &[1.1], &grid.point(idx)).unwrap();
        let v = sys.evaluate_needlet(j, idx, &[1.1], Which::Psi).unwrap();
        assert!((v - grid.coeff(idx).sqrt() * psi).abs() < 1e-14);
    }

    #[test]
    fn provenance_is_enforced() {
        let a = build_system(1, &one(0.0), &tight_default_pair(), 0.03, 1.0).unwrap();
        let b = build_system(1, &one(0.0), &dual_default_pair(), 0.03, 1.0).unwrap();
        let h = a.zero_coeffs();
        assert!(matches!(b.synthesize(&h), Err(Error::ProvenanceMismatch { .. })));
        let mut bad = h.clone();
        bad.levels[1].pop();
        assert!(a.synthesize(&bad).is_err());
        assert!(h.get(5, 0).is_err());
    }

    #[test]
    fn frame_bounds_tight_and_single_trial_brute_force() {
        let sys = build_system(2, &one(0.0), &tight_default_pair(), 0.03, 1.0).unwrap();
        let fb = sys.frame_bounds(5, 1).unwrap();
        assert!((fb.a_est - 1.0).abs() < 1e-8 && (fb.b_est - 1.0).abs() < 1e-8);
        let dual = build_system(2, &one(0.0), &dual_default_pair(), 0.03, 1.0).unwrap();
        let fb = dual.frame_bounds(5, 1).unwrap();
        assert!(0.0 < fb.a_est && fb.a_est <= fb.b_est && fb.b_est.is_finite());
        // f = F_0: only levels 0 and 1 contribute; brute force via the needlet values at x
        let f = CoeffFn::basis(sys.alpha(), &MultiIndex::new(vec![0])).unwrap();
        let h = sys.analyze(&f).unwrap();
        let mut brute = 0.0;
        for j in 0..=1 {
            let grid = sys.grid(j).unwrap();
            for i in 0..grid.len() {
                let xi = grid.point(i);
                let f0 = multivariate_f(&MultiIndex::new(vec![0]), sys.alpha(), &xi).unwrap();
                let w = level_filter(&sys.pair().a_hat, j, 0);
                brute += (grid.coeff(i).sqrt() * w * f0).powi(2);
            }
        }
        assert!((h.energy() - brute).abs() < 1e-13);
    }

    #[test]
    fn coeffs_json_round_trip() {
        let sys = build_system(1, &one(0.0), &tight_default_pair(), 0.03, 1.0).unwrap();
        let mut h = sys.zero_coeffs();
        h.set(1, 3, Complex64::new(0.5, -2.0)).unwrap();
        let s = serde_json::to_string(&h).unwrap();
        let back: NeedletCoeffs = serde_json::from_str(&s).unwrap();
        assert_eq!(back, h);
        let csv = h.to_csv(&sys).unwrap();
        assert!(csv.starts_with("level,node_index,xi_1,re,im\n"));
        assert_eq!(csv.lines().count(), 1 + sys.grid(0).unwrap().len() + sys.grid(1).unwrap().len());
    }

    #[test]
    fn memory_cap_is_enforced() {
        let cfg = SystemConfig {
            levels: 2,
            alpha: one(0.0),
            pair: tight_default_pair(),
            delta: 0.03,
            c_star: 1.0,
        };
        let opts = BuildOptions { memory_cap: 1000, ..Default::default() };
        assert!(matches!(build_system_with(cfg, &opts), Err(Error::ResourceCap { .. })));
    }
}
