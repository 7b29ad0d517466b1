//! Sums of squares: exact `r_d(n)` tables, partial sums of
//! `ζ_d(s) = Σ r_d(n) n^{−s}`, and the singular-series formula for `r_d(n)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{isqrt, unit_ball_volume};

/// `d · N` must not exceed this.
pub const TABLE_BUDGET: u64 = 10_000_000;

/// `r_d(0..=N)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquaresTable {
    pub d: usize,
    pub n_max: u64,
    pub counts: Vec<u128>,
}

impl SquaresTable {
    pub fn get(&self, n: u64) -> Option<u128> {
        self.counts.get(n as usize).copied()
    }

    /// `Σ_{n ≤ m} r_d(n)`, the number of lattice points with `|ξ|² ≤ m`.
    pub fn cumulative(&self, m: u64) -> u128 {
        self.counts[..=(m.min(self.n_max) as usize)].iter().sum()
    }

    /// Exact Cauchy product truncated at `min(N₁, N₂)`.
    pub fn convolve(&self, other: &SquaresTable) -> Result<SquaresTable> {
        let n = self.n_max.min(other.n_max) as usize;
        let a = &self.counts;
        let b = &other.counts;
        let counts = (0..=n)
            .into_par_iter()
            .map(|k| {
                let mut acc: u128 = 0;
                for i in 0..=k {
                    if a[i] == 0 || b[k - i] == 0 {
                        continue;
                    }
                    let t = a[i].checked_mul(b[k - i]).ok_or_else(overflow)?;
                    acc = acc.checked_add(t).ok_or_else(overflow)?;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<u128>>>()?;
        Ok(SquaresTable {
            d: self.d + other.d,
            n_max: n as u64,
            counts,
        })
    }

    /// `max_{1 ≤ n ≤ N} r_d(n) / n^{d/2 − 1 + ε}`.
    pub fn growth_constant(&self, eps: f64) -> f64 {
        let e = self.d as f64 / 2.0 - 1.0 + eps;
        self.counts
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, &r)| r as f64 / (n as f64).powf(e))
            .fold(0.0, f64::max)
    }
}

fn overflow() -> Error {
    Error::Overflow("r_d(n) exceeds 128-bit range".into())
}

/// `r_d(n)` for `n ≤ N` by `d`-fold convolution with the one-square
/// indicator `r_1`.
pub fn rdn_table(d: usize, n_max: u64) -> Result<SquaresTable> {
    if d == 0 {
        return Err(Error::Argument("dimension must be >= 1".into()));
    }
    if (d as u64).saturating_mul(n_max) > TABLE_BUDGET {
        return Err(Error::Resource(format!(
            "d * N = {} exceeds the table budget {TABLE_BUDGET}",
            (d as u128) * (n_max as u128)
        )));
    }
    let len = n_max as usize + 1;
    let root = isqrt(n_max);
    let mut cur = vec![0u128; len];
    cur[0] = 1;
    for x in 1..=root {
        cur[(x * x) as usize] = 2;
    }
    for _ in 1..d {
        // cur ← cur * r_1: out[n] = cur[n] + 2 Σ_{x ≥ 1} cur[n − x²].
        let prev = cur;
        cur = (0..len)
            .into_par_iter()
            .map(|n| {
                let mut acc = prev[n];
                let mut x = 1usize;
                while x * x <= n {
                    let t = prev[n - x * x].checked_mul(2).ok_or_else(overflow)?;
                    acc = acc.checked_add(t).ok_or_else(overflow)?;
                    x += 1;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<u128>>>()?;
    }
    Ok(SquaresTable {
        d,
        n_max,
        counts: cur,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaPartial {
    pub d: usize,
    pub s: f64,
    pub n_max: u64,
    pub partial: f64,
    /// Proven upper bound on `Σ_{n > N} r_d(n) n^{−s}`.
    pub tail_bound: f64,
}

/// Upper bound on `Σ_{n > N} r_d(n) n^{−s}`.
///
/// With `A(x) = #{1 ≤ |ξ|² ≤ x} ≤ V_d (√x + √d/2)^d`, partial summation
/// gives `tail ≤ s ∫_N^∞ A(x) x^{−s−1} dx
/// ≤ s V_d (1 + √d/(2√N))^d N^{d/2−s} / (s − d/2)`.
pub fn zeta_tail_bound(d: usize, s: f64, n_max: u64) -> f64 {
    let df = d as f64;
    let n = (n_max.max(1)) as f64;
    let widen = (1.0 + df.sqrt() / (2.0 * n.sqrt())).powi(d as i32);
    s * unit_ball_volume(d) * widen * n.powf(df / 2.0 - s) / (s - df / 2.0)
}

/// Partial sum of `ζ_d(s)` over `1 ≤ n ≤ N` with a rigorous tail bound.
pub fn zeta_d_partial(d: usize, s: f64, n_max: u64) -> Result<ZetaPartial> {
    if !(s > d as f64 / 2.0) {
        return Err(Error::Domain(format!(
            "divergent: Re s <= d/2 (s = {s}, d = {d})"
        )));
    }
    if n_max == 0 {
        return Err(Error::Argument("N must be >= 1".into()));
    }
    let table = rdn_table(d, n_max)?;
    // Neumaier summation in increasing n.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (n, &r) in table.counts.iter().enumerate().skip(1) {
        if r == 0 {
            continue;
        }
        let t = r as f64 * (n as f64).powf(-s);
        let next = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - next) + t;
        } else {
            comp += (t - next) + sum;
        }
        sum = next;
    }
    Ok(ZetaPartial {
        d,
        s,
        n_max,
        partial: sum + comp,
        tail_bound: zeta_tail_bound(d, s, n_max),
    })
}

/// `η(h,k)` for `1 ≤ h ≤ 2k`, `1 ≤ k ≤ K`.
#[derive(Debug, Clone)]
pub struct GaussSumTable {
    pub k_max: usize,
    eta: Vec<Vec<Complex64>>,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `e^{πi t/k}` for `t = 0..2k`.
fn phases(k: usize) -> Vec<Complex64> {
    (0..2 * k)
        .map(|t| Complex64::from_polar(1.0, std::f64::consts::PI * t as f64 / k as f64))
        .collect()
}

fn eta_row(k: usize) -> Vec<Complex64> {
    let q = 2 * k;
    let ph = phases(k);
    // Multiplicity of each residue j² mod 2k for j = 1..2k.
    let mut mult = vec![0u32; q];
    for j in 1..=q {
        mult[(j * j) % q] += 1;
    }
    let residues: Vec<(usize, f64)> = mult
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(r, &c)| (r, c as f64))
        .collect();
    let scale = 0.5 / (k as f64).sqrt();
    (1..=q)
        .map(|h| {
            if gcd(h as u64, k as u64) > 1 {
                return Complex64::new(0.0, 0.0);
            }
            let g: Complex64 = residues.iter().map(|&(r, c)| ph[(h * r) % q] * c).sum();
            g * scale
        })
        .collect()
}

impl GaussSumTable {
    pub fn new(k_max: usize) -> Self {
        let eta = (1..=k_max).into_par_iter().map(eta_row).collect();
        GaussSumTable { k_max, eta }
    }

    /// `η(h,k) = ½ k^{−1/2} Σ_{j=1}^{2k} e^{πi h j²/k}` if `gcd(h,k) = 1`,
    /// else 0.
    pub fn eta(&self, h: usize, k: usize) -> Complex64 {
        self.eta[k - 1][h - 1]
    }
}

/// Direct summation of `η(h,k)`, independent of the table.
pub fn eta_direct(h: u64, k: u64) -> Complex64 {
    if gcd(h, k) > 1 {
        return Complex64::new(0.0, 0.0);
    }
    let mut g = Complex64::new(0.0, 0.0);
    for j in 1..=2 * k {
        let t = ((h as u128 * (j as u128) * (j as u128)) % (2 * k as u128)) as f64;
        g += Complex64::from_polar(1.0, std::f64::consts::PI * t / k as f64);
    }
    g * (0.5 / (k as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSeriesValue {
    pub d: usize,
    pub n: u64,
    pub k_max: usize,
    pub value: f64,
    /// Imaginary part of the truncated sum, zero up to rounding.
    pub imag_residual: f64,
    /// Magnitude of the `k = K` term.
    pub last_term: f64,
    /// `2 K^{2−d/2}/(d/2 − 2)` from `|η| ≤ 1`; only for `d ≥ 5`.
    pub tail_bound: Option<f64>,
}

fn check_hardy_dim(d: usize) -> Result<()> {
    if !(3..=8).contains(&d) {
        return Err(Error::Domain(format!(
            "the singular-series formula is exact only for 3 <= d <= 8, got d = {d}"
        )));
    }
    Ok(())
}

/// `S_d(n) ≈ Σ_{k ≤ K} k^{−d/2} Σ_{h=1}^{2k} η(h,k)^d e^{−πi hn/k}`.
pub fn singular_series_with(table: &GaussSumTable, d: usize, n: u64, k_max: usize) -> Result<SingularSeriesValue> {
    check_hardy_dim(d)?;
    if k_max < 16 {
        return Err(Error::Argument(format!("K must be >= 16, got {k_max}")));
    }
    if k_max > table.k_max {
        return Err(Error::Argument(format!(
            "K = {k_max} exceeds the Gauss-sum table size {}",
            table.k_max
        )));
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut last = 0.0;
    for k in 1..=k_max {
        let q = 2 * k as u64;
        let ph = phases(k);
        let mut inner = Complex64::new(0.0, 0.0);
        for h in 1..=2 * k {
            let e = table.eta(h, k);
            if e.norm() == 0.0 {
                continue;
            }
            let idx = ((h as u64 % q) * (n % q)) % q;
            inner += e.powu(d as u32) * ph[idx as usize].conj();
        }
        let term = inner * (k as f64).powf(-(d as f64) / 2.0);
        last = term.norm();
        total += term;
    }
    let tail_bound = (d >= 5).then(|| {
        let e = d as f64 / 2.0 - 2.0;
        2.0 * (k_max as f64).powf(-e) / e
    });
    Ok(SingularSeriesValue {
        d,
        n,
        k_max,
        value: total.re,
        imag_residual: total.im,
        last_term: last,
        tail_bound,
    })
}

pub fn singular_series(d: usize, n: u64, k_max: usize) -> Result<SingularSeriesValue> {
    check_hardy_dim(d)?;
    singular_series_with(&GaussSumTable::new(k_max), d, n, k_max)
}

/// `π^{d/2}/Γ(d/2)`, the surface measure of the unit sphere divided by 2.
pub fn half_sphere_constant(d: usize) -> f64 {
    d as f64 / 2.0 * unit_ball_volume(d)
}

/// `π^{d/2} Γ(d/2)^{−1} n^{d/2−1} S_d(n)` truncated at `K`.
pub fn hardy_rdn_with(table: &GaussSumTable, d: usize, n: u64, k_max: usize) -> Result<f64> {
    let s = singular_series_with(table, d, n, k_max)?;
    Ok(half_sphere_constant(d) * (n as f64).powf(d as f64 / 2.0 - 1.0) * s.value)
}

pub fn hardy_rdn(d: usize, n: u64, k_max: usize) -> Result<f64> {
    check_hardy_dim(d)?;
    hardy_rdn_with(&GaussSumTable::new(k_max), d, n, k_max)
}
