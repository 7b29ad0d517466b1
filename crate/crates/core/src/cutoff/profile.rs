//! Radial bump profiles and their derivatives via truncated Taylor series.

use serde::{Deserialize, Serialize};

/// Highest derivative order tabulated.
pub const MAX_ORDER: usize = 12;
const LEN: usize = MAX_ORDER + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `exp(1 − 1/(1 − t²))` on `|t| < 1`.
    Plain,
    /// `1` on `|t| ≤ 1/2`, then the smooth step
    /// `S(s) = f(s) / (f(s) + f(1 − s))`, `f(s) = e^{−1/s}`, at
    /// `s = 2(1 − |t|)`.
    Plateau,
}

impl std::str::FromStr for Profile {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "plain" => Ok(Profile::Plain),
            "plateau" => Ok(Profile::Plateau),
            _ => Err(crate::error::Error::Argument(format!(
                "unknown profile `{s}` (expected plain or plateau)"
            ))),
        }
    }
}

/// Truncated Taylor series `Σ c_k ε^k` about a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub c: [f64; LEN],
}

impl Jet {
    pub fn constant(v: f64) -> Jet {
        let mut c = [0.0; LEN];
        c[0] = v;
        Jet { c }
    }

    /// The identity `t` expanded about `t0`.
    pub fn variable(t0: f64) -> Jet {
        let mut j = Jet::constant(t0);
        j.c[1] = 1.0;
        j
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let mut c = [0.0; LEN];
        for k in 0..LEN {
            c[k] = self.c[k] + o.c[k];
        }
        Jet { c }
    }

    pub fn scale(&self, a: f64) -> Jet {
        let mut c = self.c;
        c.iter_mut().for_each(|x| *x *= a);
        Jet { c }
    }

    pub fn offset(&self, a: f64) -> Jet {
        let mut j = *self;
        j.c[0] += a;
        j
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let mut c = [0.0; LEN];
        for i in 0..LEN {
            for j in 0..LEN - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Jet { c }
    }

    pub fn recip(&self) -> Jet {
        let mut c = [0.0; LEN];
        c[0] = 1.0 / self.c[0];
        for k in 1..LEN {
            let s: f64 = (1..=k).map(|j| self.c[j] * c[k - j]).sum();
            c[k] = -s / self.c[0];
        }
        Jet { c }
    }

    pub fn exp(&self) -> Jet {
        let mut c = [0.0; LEN];
        c[0] = self.c[0].exp();
        for k in 1..LEN {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * c[k - j]).sum();
            c[k] = s / k as f64;
        }
        Jet { c }
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.c[k] * fact
    }
}

/// `f(s) = e^{−1/s}` for `s > 0`, zero otherwise, as a jet.
fn smooth_zero(s: &Jet) -> Jet {
    if s.c[0] <= 0.0 {
        Jet::constant(0.0)
    } else {
        s.recip().scale(-1.0).exp()
    }
}

/// Taylor jet of the profile at `t`.
pub fn bump_jet(profile: Profile, t: f64) -> Jet {
    let a = t.abs();
    if a >= 1.0 {
        return Jet::constant(0.0);
    }
    match profile {
        Profile::Plain => {
            let x = Jet::variable(t);
            let u = x.mul(&x).scale(-1.0).offset(1.0);
            u.recip().scale(-1.0).offset(1.0).exp()
        }
        Profile::Plateau => {
            if a <= 0.5 {
                return Jet::constant(1.0);
            }
            // s = 2(1 − |t|), with the sign of t folded into the derivative.
            let sign = if t >= 0.0 { 1.0 } else { -1.0 };
            let x = Jet::variable(t);
            let s = x.scale(-2.0 * sign).offset(2.0);
            let f = smooth_zero(&s);
            let g = smooth_zero(&s.scale(-1.0).offset(1.0));
            f.mul(&f.add(&g).recip())
        }
    }
}

/// `χ(t)`: value 1 at 0, support `[−1, 1]`, range `[0, 1]`.
pub fn bump(profile: Profile, t: f64) -> f64 {
    let a = t.abs();
    if a >= 1.0 {
        return 0.0;
    }
    match profile {
        Profile::Plain => (1.0 - 1.0 / (1.0 - t * t)).exp(),
        Profile::Plateau => {
            if a <= 0.5 {
                return 1.0;
            }
            let s = 2.0 * (1.0 - a);
            let f = |s: f64| if s <= 0.0 { 0.0 } else { (-1.0 / s).exp() };
            let fs = f(s);
            fs / (fs + f(1.0 - s))
        }
    }
}

/// `sup_t |χ^{(k)}(t)|` for `k = 0..=order`, sampled on `samples` points of
/// `(−1, 1)`.
pub fn derivative_table(profile: Profile, order: usize, samples: usize) -> Vec<f64> {
    let order = order.min(MAX_ORDER);
    let mut sup = vec![0.0f64; order + 1];
    for i in 1..samples {
        let t = -1.0 + 2.0 * i as f64 / samples as f64;
        let jet = bump_jet(profile, t);
        for (k, s) in sup.iter_mut().enumerate() {
            *s = s.max(jet.derivative(k).abs());
        }
    }
    sup
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        for p in [Profile::Plain, Profile::Plateau] {
            assert_eq!(bump(p, 0.0), 1.0);
            assert_eq!(bump(p, 1.0), 0.0);
            assert_eq!(bump(p, -1.5), 0.0);
            for k in 0..200 {
                let v = bump(p, -1.0 + k as f64 / 100.0);
                assert!((0.0..=1.0).contains(&v));
            }
        }
        assert_eq!(bump(Profile::Plateau, 0.4), 1.0);
        assert!(bump(Profile::Plain, 0.4) < 1.0);
        assert!(bump(Profile::Plateau, 0.75) > 0.0 && bump(Profile::Plateau, 0.75) < 1.0);
    }

    #[test]
    fn jets_agree_with_values_and_finite_differences() {
        for p in [Profile::Plain, Profile::Plateau] {
            for &t in &[-0.9, -0.7, -0.55, 0.3, 0.6, 0.8, 0.95] {
                let j = bump_jet(p, t);
                assert!((j.derivative(0) - bump(p, t)).abs() < 1e-14);
                let e = 1e-5;
                let fd = (bump(p, t + e) - bump(p, t - e)) / (2.0 * e);
                assert!((j.derivative(1) - fd).abs() < 1e-6 * (1.0 + fd.abs()), "{p:?} t={t}");
                let fd2 = (bump_jet(p, t + e).derivative(3) - bump_jet(p, t - e).derivative(3)) / (2.0 * e);
                assert!((j.derivative(4) - fd2).abs() < 1e-4 * (1.0 + fd2.abs()), "{p:?} t={t}");
            }
        }
    }

    #[test]
    fn derivative_tables_are_finite() {
        for p in [Profile::Plain, Profile::Plateau] {
            let tab = derivative_table(p, 12, 4000);
            assert_eq!(tab.len(), 13);
            assert!((tab[0] - 1.0).abs() < 1e-12);
            assert!(tab.iter().all(|v| v.is_finite() && *v >= 0.0));
            assert!(tab[12] > tab[2]);
        }
    }
}
