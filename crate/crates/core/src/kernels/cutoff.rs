//! Smooth compactly supported cut-off functions and dual pairs.

use serde::{Deserialize, Serialize};

use super::jet::{smooth_step, Jet};
use crate::error::{Error, Result};

/// Default number of derivatives exposed by [`CutoffSpec::derivatives`].
pub const DEFAULT_DERIVATIVE_ORDER: usize = 12;

/// Shape of a cut-off profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum Profile {
    /// `1 - s((t - 1) / v)`.
    TypeA { v: f64 },
    /// `s((t - u) / (1 - u)) * (1 - s((t - 1) / v))`.
    TypeB { u: f64, v: f64 },
    /// Rises on `[r0, r1]`, equals 1 on `[r1, f0]`, falls on `[f0, f1]`.
    Window { r0: f64, r1: f64, f0: f64, f1: f64 },
    /// `g / sqrt(sum_k g(4^k t)^2)`.
    TightNormalized { inner: Box<Profile> },
    /// `g / sum_k g(4^k t)^2` on the support of `g`.
    Dual { inner: Box<Profile> },
    /// `factor * g`.
    Scaled { factor: f64, inner: Box<Profile> },
}

/// Classification of a cut-off.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffKind {
    TypeA,
    TypeB,
    Raw,
}

fn ramp_up(t: f64, lo: f64, hi: f64, order: usize) -> Jet {
    let w = hi - lo;
    smooth_step(&Jet::affine(t, 1.0 / w, -lo / w, order))
}

fn ramp_down(t: f64, lo: f64, hi: f64, order: usize) -> Jet {
    ramp_up(t, lo, hi, order).one_minus()
}

impl Profile {
    /// Closed interval outside of which the profile vanishes identically.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Profile::TypeA { v } => (0.0, 1.0 + v),
            Profile::TypeB { u, v } => (*u, 1.0 + v),
            Profile::Window { r0, f1, .. } => (*r0, *f1),
            Profile::TightNormalized { inner }
            | Profile::Dual { inner }
            | Profile::Scaled { inner, .. } => inner.support(),
        }
    }

    /// Taylor jet of order `order` at `t`.
    pub fn jet(&self, t: f64, order: usize) -> Jet {
        match self {
            Profile::TypeA { v } => {
                if t <= 1.0 {
                    Jet::constant(1.0, order)
                } else {
                    ramp_down(t, 1.0, 1.0 + v, order)
                }
            }
            Profile::TypeB { u, v } => {
                if t <= *u || t >= 1.0 + v {
                    return Jet::constant(0.0, order);
                }
                ramp_up(t, *u, 1.0, order).mul(&ramp_down(t, 1.0, 1.0 + v, order))
            }
            Profile::Window { r0, r1, f0, f1 } => {
                if t <= *r0 || t >= *f1 {
                    return Jet::constant(0.0, order);
                }
                ramp_up(t, *r0, *r1, order).mul(&ramp_down(t, *f0, *f1, order))
            }
            Profile::TightNormalized { inner } => {
                let g = inner.jet(t, order);
                if g.is_zero() {
                    return g;
                }
                g.div(&inner.dilation_square_sum(t, order).sqrt())
            }
            Profile::Dual { inner } => {
                let g = inner.jet(t, order);
                if g.is_zero() {
                    return g;
                }
                g.div(&inner.dilation_square_sum(t, order))
            }
            Profile::Scaled { factor, inner } => inner.jet(t, order).scale(*factor),
        }
    }

    /// `sum_{k in {-1,0,1}} g(4^k t)^2` as a jet in `t`; complete for supports inside `[1/4, 4]`.
    pub fn dilation_square_sum(&self, t: f64, order: usize) -> Jet {
        let mut acc = Jet::constant(0.0, order);
        for k in -1..=1 {
            let c = 4f64.powi(k);
            let g = self.jet(c * t, order).dilate(c);
            acc = acc.add(&g.mul(&g));
        }
        acc
    }

    pub fn value(&self, t: f64) -> f64 {
        self.jet(t, 0).value()
    }
}

/// An admissible cut-off function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub kind: CutoffKind,
    pub profile: Profile,
}

impl CutoffSpec {
    /// Identically 1 on `[0, 1]`, supported in `[0, 1 + v]`.
    pub fn type_a(v: f64) -> Result<Self> {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidCutoff(format!("v must be positive, got {v}")));
        }
        Ok(CutoffSpec { kind: CutoffKind::TypeA, profile: Profile::TypeA { v } })
    }

    /// Supported in `[u, 1 + v]` with `0 < u < 1`.
    pub fn type_b(u: f64, v: f64) -> Result<Self> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::InvalidCutoff(format!("u must lie in (0, 1), got {u}")));
        }
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidCutoff(format!("v must be positive, got {v}")));
        }
        Ok(CutoffSpec { kind: CutoffKind::TypeB, profile: Profile::TypeB { u, v } })
    }

    /// Plateau `[r1, f0]` with smooth ramps on `[r0, r1]` and `[f0, f1]`.
    pub fn window(r0: f64, r1: f64, f0: f64, f1: f64) -> Result<Self> {
        let ok = [r0, r1, f0, f1].iter().all(|x| x.is_finite()) && 0.0 < r0 && r0 < r1 && r1 <= f0 && f0 < f1;
        if !ok {
            return Err(Error::InvalidCutoff(format!(
                "window needs 0 < r0 < r1 <= f0 < f1, got ({r0}, {r1}, {f0}, {f1})"
            )));
        }
        Ok(CutoffSpec { kind: CutoffKind::Raw, profile: Profile::Window { r0, r1, f0, f1 } })
    }

    /// Frame cut-off supported in `[1/4, 4]`, equal to 1 on `[1/3, 3]`.
    pub fn frame_default() -> Self {
        CutoffSpec {
            kind: CutoffKind::Raw,
            profile: Profile::Window { r0: 0.25, r1: 0.25 + 1.0 / 12.0, f0: 3.0, f1: 4.0 },
        }
    }

    pub fn from_profile(profile: Profile) -> Self {
        let kind = match profile {
            Profile::TypeA { .. } => CutoffKind::TypeA,
            Profile::TypeB { .. } => CutoffKind::TypeB,
            _ => CutoffKind::Raw,
        };
        CutoffSpec { kind, profile }
    }

    /// Normalizes so the squared dilates form a partition of unity.
    pub fn tight_normalized(&self) -> Self {
        CutoffSpec {
            kind: CutoffKind::Raw,
            profile: Profile::TightNormalized { inner: Box::new(self.profile.clone()) },
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CutoffSpec {
            kind: self.kind,
            profile: Profile::Scaled { factor, inner: Box::new(self.profile.clone()) },
        }
    }

    pub fn support(&self) -> (f64, f64) {
        self.profile.support()
    }

    pub fn value(&self, t: f64) -> f64 {
        self.profile.value(t)
    }

    /// `[g(t), g'(t), ..., g^(order)(t)]`.
    pub fn derivatives(&self, t: f64, order: usize) -> Vec<f64> {
        self.profile.jet(t, order).derivatives()
    }

    /// Largest `|g^(l)|` for `l <= order`, sampled on `samples` points of the support.
    pub fn derivative_sup_norms(&self, order: usize, samples: usize) -> Vec<f64> {
        let (lo, hi) = self.support();
        let mut out = vec![0.0f64; order + 1];
        for i in 0..=samples {
            let t = lo + (hi - lo) * i as f64 / samples as f64;
            for (o, d) in out.iter_mut().zip(self.derivatives(t, order)) {
                *o = o.max(d.abs());
            }
        }
        out
    }

    /// Short textual label used in reports.
    pub fn label(&self) -> String {
        fn lab(p: &Profile) -> String {
            match p {
                Profile::TypeA { v } => format!("type_a(v={v})"),
                Profile::TypeB { u, v } => format!("type_b(u={u},v={v})"),
                Profile::Window { r0, r1, f0, f1 } => format!("window({r0},{r1},{f0},{f1})"),
                Profile::TightNormalized { inner } => format!("tight[{}]", lab(inner)),
                Profile::Dual { inner } => format!("dual[{}]", lab(inner)),
                Profile::Scaled { factor, inner } => format!("{factor}*{}", lab(inner)),
            }
        }
        lab(&self.profile)
    }
}

/// Analysis and synthesis cut-offs satisfying the dyadic partition of unity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffPair {
    pub a_hat: CutoffSpec,
    pub b_hat: CutoffSpec,
    pub tight: bool,
}

const SAMPLES: usize = 4096;

fn sample_points(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..=SAMPLES).map(move |i| lo + (hi - lo) * i as f64 / SAMPLES as f64)
}

/// Builds `b = a / D` with `D(t) = sum_m a(4^-m t)^2`; returns the pair unchanged
/// (flagged tight) when `a >= 0` already satisfies `D = 1`.
pub fn make_dual_pair(a_hat: &CutoffSpec) -> Result<CutoffPair> {
    let (lo, hi) = a_hat.support();
    if lo < 0.25 - 1e-15 || hi > 4.0 + 1e-15 {
        return Err(Error::InvalidCutoff(format!(
            "support [{lo}, {hi}] is not contained in [1/4, 4]"
        )));
    }
    for t in sample_points(1.0 / 3.0, 3.0) {
        if a_hat.value(t).abs() == 0.0 {
            return Err(Error::InvalidCutoff(format!("cut-off vanishes at t = {t} inside [1/3, 3]")));
        }
    }
    let mut tight = true;
    for t in sample_points(1.0, 4.0) {
        let d = a_hat.profile.dilation_square_sum(t, 0).value();
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::DegenerateCutoff { t });
        }
        if (d - 1.0).abs() > 1e-12 {
            tight = false;
        }
    }
    if tight {
        tight = sample_points(lo, hi).all(|t| a_hat.value(t) >= 0.0);
    }
    let b_hat = if tight {
        a_hat.clone()
    } else {
        CutoffSpec {
            kind: CutoffKind::Raw,
            profile: Profile::Dual { inner: Box::new(a_hat.profile.clone()) },
        }
    };
    Ok(CutoffPair { a_hat: a_hat.clone(), b_hat, tight })
}

/// Tight pair built from the normalized default frame cut-off.
pub fn tight_default_pair() -> CutoffPair {
    make_dual_pair(&CutoffSpec::frame_default().tight_normalized())
        .expect("default cut-off is admissible")
}

/// Dual pair built from the (non-normalized) default frame cut-off.
pub fn dual_default_pair() -> CutoffPair {
    make_dual_pair(&CutoffSpec::frame_default()).expect("default cut-off is admissible")
}

impl CutoffPair {
    /// Filter multiplying degree `m` at level `j` on the analysis side.
    pub fn a_level(&self, j: usize, m: usize) -> f64 {
        level_filter(&self.a_hat, j, m)
    }

    /// Filter multiplying degree `m` at level `j` on the synthesis side.
    pub fn b_level(&self, j: usize, m: usize) -> f64 {
        level_filter(&self.b_hat, j, m)
    }

    /// Largest `|sum_{m>=0} a(4^-m t) b(4^-m t) - 1|` over dense samples of `[1, t_max]`.
    pub fn partition_error(&self, t_max: f64) -> f64 {
        let n = (SAMPLES as f64 * t_max.log(4.0).max(1.0)) as usize;
        let mut worst = 0.0f64;
        for i in 0..=n {
            let t = (t_max.ln() * i as f64 / n as f64).exp();
            let mut acc = 0.0;
            let mut s = t;
            while s >= 0.25 {
                acc += self.a_hat.value(s) * self.b_hat.value(s);
                s /= 4.0;
            }
            worst = worst.max((acc - 1.0).abs());
        }
        worst
    }
}

/// Level-`j` filter value at degree `m`: `[m == 0]` for `j = 0`, else `g(m / 4^(j-1))`.
pub fn level_filter(g: &CutoffSpec, j: usize, m: usize) -> f64 {
    if j == 0 {
        if m == 0 { 1.0 } else { 0.0 }
    } else {
        g.value(m as f64 / 4f64.powi(j as i32 - 1))
    }
}

/// Largest degree at which the level-`j` filter can be nonzero.
pub fn level_max_degree(g: &CutoffSpec, j: usize) -> usize {
    if j == 0 {
        0
    } else {
        (g.support().1 * 4f64.powi(j as i32 - 1)).floor() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type_a_values() {
        let a = CutoffSpec::type_a(1.0).unwrap();
        assert_eq!(a.value(0.5), 1.0);
        assert_eq!(a.value(2.5), 0.0);
        assert!(a.value(1.5) > 0.0 && a.value(1.5) < 1.0);
    }

    #[test]
    fn type_b_values() {
        let b = CutoffSpec::type_b(0.25, 3.0).unwrap();
        assert_eq!(b.value(0.2), 0.0);
        assert_eq!(b.value(4.1), 0.0);
        assert!(b.value(1.0) > 0.99);
    }

    #[test]
    fn invalid_parameters() {
        assert!(CutoffSpec::type_a(0.0).is_err());
        assert!(CutoffSpec::type_b(1.0, 1.0).is_err());
        assert!(CutoffSpec::type_b(0.5, -1.0).is_err());
        assert!(CutoffSpec::window(1.0, 0.5, 2.0, 3.0).is_err());
    }

    #[test]
    fn frame_default_plateau_and_support() {
        let a = CutoffSpec::frame_default();
        assert_eq!(a.support(), (0.25, 4.0));
        for &t in &[1.0 / 3.0, 1.0, 2.0, 3.0] {
            assert!((a.value(t) - 1.0).abs() < 1e-15);
        }
        assert_eq!(a.value(0.25), 0.0);
        assert_eq!(a.value(4.0), 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let a = CutoffSpec::type_b(0.25, 3.0).unwrap();
        let h = 1e-5;
        for &t in &[0.4, 0.8, 1.7, 3.2] {
            let d = a.derivatives(t, 2);
            let fd1 = (a.value(t + h) - a.value(t - h)) / (2.0 * h);
            let d1 = a.derivatives(t + h, 1)[1] - a.derivatives(t - h, 1)[1];
            assert!((d[1] - fd1).abs() < 1e-7 * (1.0 + d[1].abs()), "t={t}");
            assert!((d[2] - d1 / (2.0 * h)).abs() < 1e-5 * (1.0 + d[2].abs()), "t={t}");
        }
    }

    #[test]
    fn endpoint_flatness() {
        // Derivatives at support endpoints, estimated by one-sided finite-difference
        // stencils on the open side, vanish.
        let a = CutoffSpec::type_b(0.25, 3.0).unwrap();
        let (lo, hi) = a.support();
        let h = 1e-3;
        for &(e, dir) in &[(lo, 1.0), (hi, -1.0)] {
            let f: Vec<f64> = (0..8).map(|i| a.value(e + dir * h * i as f64)).collect();
            let mut diffs = f.clone();
            for k in 1..=6 {
                diffs = diffs.windows(2).map(|w| w[1] - w[0]).collect();
                let deriv = diffs[0] / h.powi(k);
                assert!(deriv.abs() < 1e-9, "order {k} at {e}: {deriv}");
            }
        }
        for k in 1..=6 {
            assert!(a.derivatives(lo, 6)[k].abs() < 1e-9);
        }
    }

    #[test]
    fn tight_pair_is_detected() {
        let p = tight_default_pair();
        assert!(p.tight);
        assert_eq!(p.a_hat, p.b_hat);
        assert!(p.partition_error(4096.0) < 1e-12);
        let t = 1.0;
        let s = p.a_hat.value(t) * p.b_hat.value(t) + p.a_hat.value(4.0) * p.b_hat.value(4.0);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dual_pair_partition() {
        let p = dual_default_pair();
        assert!(!p.tight);
        assert!(p.partition_error(4096.0) < 1e-12);
        // outside the contract domain the synthesis cut-off still obeys the support
        assert_eq!(p.b_hat.value(0.1), 0.0);
    }

    #[test]
    fn rejects_bad_support_and_degenerate() {
        assert!(make_dual_pair(&CutoffSpec::type_a(1.0).unwrap()).is_err());
        let narrow = CutoffSpec::window(1.0, 1.5, 2.0, 2.5).unwrap();
        assert!(make_dual_pair(&narrow).is_err());
    }

    #[test]
    fn level_filters() {
        let a = CutoffSpec::frame_default();
        assert_eq!(level_filter(&a, 0, 0), 1.0);
        assert_eq!(level_filter(&a, 0, 1), 0.0);
        assert_eq!(level_max_degree(&a, 3), 64);
        assert_eq!(level_filter(&a, 3, 64), 0.0);
    }
}
