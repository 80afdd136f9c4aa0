//! Truncated Taylor arithmetic used to differentiate cut-off profiles exactly.

/// Taylor coefficients `f^(k)(t) / k!` for `k = 0..=order`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet(pub Vec<f64>);

impl Jet {
    pub fn constant(c: f64, order: usize) -> Self {
        let mut v = vec![0.0; order + 1];
        v[0] = c;
        Jet(v)
    }

    /// The jet of `t -> scale * t + shift` evaluated at `t`.
    pub fn affine(t: f64, scale: f64, shift: f64, order: usize) -> Self {
        let mut v = vec![0.0; order + 1];
        v[0] = scale * t + shift;
        if order > 0 {
            v[1] = scale;
        }
        Jet(v)
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| *c == 0.0)
    }

    /// Derivatives `f^(k)(t)`.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.0
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k > 0 {
                    fact *= k as f64;
                }
                c * fact
            })
            .collect()
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet(self.0.iter().map(|a| a * c).collect())
    }

    /// `1 - self`.
    pub fn one_minus(&self) -> Jet {
        let mut v: Vec<f64> = self.0.iter().map(|a| -a).collect();
        v[0] += 1.0;
        Jet(v)
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.0.len();
        let mut v = vec![0.0; n];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = (0..=k).map(|i| self.0[i] * o.0[k - i]).sum();
        }
        Jet(v)
    }

    pub fn div(&self, o: &Jet) -> Jet {
        let n = self.0.len();
        let mut c = vec![0.0; n];
        for k in 0..n {
            let s: f64 = (1..=k).map(|i| o.0[i] * c[k - i]).sum();
            c[k] = (self.0[k] - s) / o.0[0];
        }
        Jet(c)
    }

    pub fn exp(&self) -> Jet {
        let n = self.0.len();
        let mut e = vec![0.0; n];
        e[0] = self.0[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|i| i as f64 * self.0[i] * e[k - i]).sum();
            e[k] = s / k as f64;
        }
        Jet(e)
    }

    pub fn sqrt(&self) -> Jet {
        let n = self.0.len();
        let mut s = vec![0.0; n];
        s[0] = self.0[0].sqrt();
        for k in 1..n {
            let acc: f64 = (1..k).map(|i| s[i] * s[k - i]).sum();
            s[k] = (self.0[k] - acc) / (2.0 * s[0]);
        }
        Jet(s)
    }

    /// Jet of `t -> f(c t)` given the jet of `f` at `c t`.
    pub fn dilate(&self, c: f64) -> Jet {
        let mut p = 1.0;
        Jet(self
            .0
            .iter()
            .map(|a| {
                let r = a * p;
                p *= c;
                r
            })
            .collect())
    }
}

/// `exp(-1/t)` for `t > 0`, zero otherwise.
pub fn mollifier(t: &Jet) -> Jet {
    if t.value() <= 0.0 {
        return Jet::constant(0.0, t.order());
    }
    Jet::constant(-1.0, t.order()).div(t).exp()
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`, `m(t) / (m(t) + m(1 - t))` between.
pub fn smooth_step(t: &Jet) -> Jet {
    let x = t.value();
    if x <= 0.0 {
        return Jet::constant(0.0, t.order());
    }
    if x >= 1.0 {
        return Jet::constant(1.0, t.order());
    }
    let a = mollifier(t);
    let b = mollifier(&t.one_minus());
    a.div(&a.add(&b))
}
