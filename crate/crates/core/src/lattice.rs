//! Exact lattice point counts in balls and in the diophantine set
//! `{ξ ∈ ℤ^d : |P(ξ) − λ| ≤ |ξ|^{m−1+δ}}`, plus the continuum annulus
//! prediction the counts are compared against.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbol::{proven_margin, Symbol};

/// Largest `R` accepted by [`count_ball`] per dimension (index `d − 1`).
pub const BALL_RADIUS_CAP: [f64; 6] = [1e12, 1e6, 1e4, 300.0, 60.0, 30.0];

/// Upper limit on the estimated number of enumerated points in
/// [`count_diophantine`].
pub const ENUMERATION_BUDGET: f64 = 2e8;

/// Relative slack on `|P(ξ) − λ|² ≤ |ξ|^{2(m−1+δ)}` when `P(ξ)` is exact.
pub const EXACT_SLACK: f64 = 1e-12;
/// Relative slack when `P(ξ)` is evaluated in floating point.
pub const FLOAT_SLACK: f64 = 1e-9;

/// Volume of the unit ball in `ℝ^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// `⌊√n⌋` exactly.
pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).map_or(true, |s| s > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

/// `⌊R²⌋` exactly, using a fused multiply-add to decide the sign of
/// `R² − n` without rounding.
pub fn floor_square(r: f64) -> u64 {
    let mut n = (r * r).floor() as u64;
    while n > 0 && r.mul_add(r, -(n as f64)) < 0.0 {
        n -= 1;
    }
    while r.mul_add(r, -((n + 1) as f64)) >= 0.0 {
        n += 1;
    }
    n
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > 6 {
        return Err(Error::Argument(format!(
            "dimension must be in 1..=6 for exhaustive enumeration, got {d}"
        )));
    }
    Ok(())
}

fn count_sq_le(d: usize, n: u64) -> u64 {
    if d == 1 {
        return 2 * isqrt(n) + 1;
    }
    let top = isqrt(n);
    let mut total = count_sq_le(d - 1, n);
    for x in 1..=top {
        total += 2 * count_sq_le(d - 1, n - x * x);
    }
    total
}

/// `#{ξ ∈ ℤ^d : |ξ|² ≤ n}`.
pub fn count_norm_le(d: usize, n: u64) -> Result<u64> {
    check_dim(d)?;
    if d == 1 {
        return Ok(2 * isqrt(n) + 1);
    }
    let top = isqrt(n);
    let rest: u64 = (1..=top)
        .into_par_iter()
        .map(|x| 2 * count_sq_le(d - 1, n - x * x))
        .sum();
    Ok(count_sq_le(d - 1, n) + rest)
}

/// `#{ξ ∈ ℤ^d : |ξ| ≤ R}`, exact.
pub fn count_ball(d: usize, r: f64) -> Result<u64> {
    check_dim(d)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Argument(format!("radius must be finite and >= 0, got {r}")));
    }
    let cap = BALL_RADIUS_CAP[d - 1];
    if r > cap {
        return Err(Error::Resource(format!(
            "radius {r} exceeds the d={d} enumeration cap {cap}"
        )));
    }
    count_norm_le(d, floor_square(r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiophantineReport {
    pub lambda: Complex64,
    pub delta: f64,
    pub cap: f64,
    pub count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solutions: Option<Vec<Vec<i64>>>,
    /// A solution lies within `√d` of the cap, so the cap may truncate.
    pub saturated: bool,
    pub max_solution_norm: f64,
    /// Radius beyond which no solution can exist, for elliptic symbols.
    pub r_star: Option<f64>,
    /// `cap ≥ R*`: the count is the full `F_δ`.
    pub complete: bool,
    pub exact_arithmetic: bool,
    /// Relative slack used in the comparison.
    pub slack: f64,
    /// Points whose comparison fell inside the slack band (counted).
    pub near_ties: u64,
}

#[derive(Default)]
struct Partial {
    count: u64,
    max_n2: u64,
    near_ties: u64,
    solutions: Vec<Vec<i64>>,
}

impl Partial {
    fn merge(mut self, other: Partial) -> Partial {
        self.count += other.count;
        self.max_n2 = self.max_n2.max(other.max_n2);
        self.near_ties += other.near_ties;
        self.solutions.extend(other.solutions);
        self
    }
}

struct Tester<'a> {
    sym: &'a Symbol,
    lambda: Complex64,
    exponent: f64,
    exact: bool,
    slack: f64,
    keep: bool,
}

impl Tester<'_> {
    fn test(&self, xi: &[i64], n2: u64, acc: &mut Partial) -> Result<()> {
        let p = if self.exact {
            let (re, im) = self.sym.eval_exact_unchecked(xi)?;
            Complex64::new(re as f64, im as f64)
        } else {
            let x: Vec<f64> = xi.iter().map(|&v| v as f64).collect();
            self.sym.eval_unchecked(&x)
        };
        let lhs = (p - self.lambda).norm_sqr();
        let rhs = (n2 as f64).powf(self.exponent);
        let band = self.slack * rhs.max(lhs);
        if lhs <= rhs + band {
            if lhs > rhs - band {
                acc.near_ties += 1;
            }
            acc.count += 1;
            acc.max_n2 = acc.max_n2.max(n2);
            if self.keep {
                acc.solutions.push(xi.to_vec());
            }
        }
        Ok(())
    }

    /// Enumerates coordinates `k..d` with `|ξ|² ≤ limit` given the prefix.
    fn walk(&self, xi: &mut Vec<i64>, k: usize, used: u64, limit: u64, acc: &mut Partial) -> Result<()> {
        let left = limit - used;
        let top = isqrt(left) as i64;
        for x in -top..=top {
            xi[k] = x;
            let n2 = used + (x * x) as u64;
            if k + 1 == xi.len() {
                self.test(xi, n2, acc)?;
            } else {
                self.walk(xi, k + 1, n2, limit, acc)?;
            }
        }
        Ok(())
    }
}

/// Sorts by `(|ξ|², lexicographic)`.
fn shell_order(a: &[i64], b: &[i64]) -> std::cmp::Ordering {
    let na: i128 = a.iter().map(|&x| (x as i128) * (x as i128)).sum();
    let nb: i128 = b.iter().map(|&x| (x as i128) * (x as i128)).sum();
    na.cmp(&nb).then_with(|| a.cmp(b))
}

/// Radius `R*` beyond which `μ|ξ|^m − Σ_{|α|<m}|c_α||ξ|^{|α|} − |λ| >
/// |ξ|^{m−1+δ}`, with `μ` a proven lower bound on `|σ|` over the sphere.
pub fn self_sufficiency_radius(sym: &Symbol, mu: f64, lambda: Complex64, delta: f64) -> f64 {
    let m = sym.order() as f64;
    let lower: Vec<(f64, f64)> = sym
        .lower_order_terms()
        .map(|t| (t.coef.norm(), t.alpha.order() as f64))
        .collect();
    let lam = lambda.norm();
    // Divided by ρ^m, the margin is increasing in ρ.
    let h = |rho: f64| {
        mu - lower.iter().map(|(c, a)| c * rho.powf(a - m)).sum::<f64>()
            - lam * rho.powf(-m)
            - rho.powf(delta - 1.0)
    };
    let mut hi = 1.0f64;
    while h(hi) <= 0.0 {
        hi *= 2.0;
    }
    if hi == 1.0 {
        return 1.0;
    }
    let mut lo = hi / 2.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    hi
}

/// Enumerates every `ξ` with `|ξ| ≤ cap` and counts those with
/// `|P(ξ) − λ| ≤ |ξ|^{m−1+δ}` (ties included).
pub fn count_diophantine(
    sym: &Symbol,
    lambda: Complex64,
    delta: f64,
    cap: f64,
    keep_solutions: bool,
) -> Result<DiophantineReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Argument(format!("delta must lie in (0,1), got {delta}")));
    }
    if !(cap >= 1.0) || !cap.is_finite() {
        return Err(Error::Argument(format!("cap must be finite and >= 1, got {cap}")));
    }
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(Error::Argument("lambda must be finite".into()));
    }
    let d = sym.dim();
    check_dim(d)?;
    let estimate = unit_ball_volume(d) * (cap + d as f64).powi(d as i32);
    if estimate > ENUMERATION_BUDGET {
        return Err(Error::Resource(format!(
            "enumerating |xi| <= {cap} in d={d} visits about {estimate:.3e} points (budget {ENUMERATION_BUDGET:.0e})"
        )));
    }
    let exact = sym.has_gaussian_integer_coefficients();
    let tester = Tester {
        sym,
        lambda,
        exponent: sym.order() as f64 - 1.0 + delta,
        exact,
        slack: if exact { EXACT_SLACK } else { FLOAT_SLACK },
        keep: keep_solutions,
    };
    let limit = floor_square(cap);
    let top = isqrt(limit) as i64;
    let merged = (-top..=top)
        .into_par_iter()
        .map(|x0| -> Result<Partial> {
            let mut acc = Partial::default();
            let mut xi = vec![0i64; d];
            xi[0] = x0;
            let used = (x0 * x0) as u64;
            if d == 1 {
                tester.test(&xi, used, &mut acc)?;
            } else {
                tester.walk(&mut xi, 1, used, limit, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<Partial>>>()?
        .into_iter()
        .fold(Partial::default(), Partial::merge);

    let max_norm = (merged.max_n2 as f64).sqrt();
    let saturated = merged.count > 0 && max_norm > cap - (d as f64).sqrt();
    let r_star = proven_margin(sym).map(|mu| self_sufficiency_radius(sym, mu, lambda, delta));
    let solutions = keep_solutions.then(|| {
        let mut s = merged.solutions;
        s.sort_by(|a, b| shell_order(a, b));
        s
    });
    Ok(DiophantineReport {
        lambda,
        delta,
        cap,
        count: merged.count,
        solutions,
        saturated,
        max_solution_norm: max_norm,
        r_star,
        complete: r_star.is_some_and(|r| cap >= r),
        exact_arithmetic: exact,
        slack: tester.slack,
        near_ties: merged.near_ties,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusPrediction {
    pub a: f64,
    pub beta: f64,
    pub x_minus: f64,
    pub x_plus: f64,
    pub c_d: f64,
    pub predicted: f64,
    /// Validity floor `c_β` on `a`.
    pub floor: f64,
}

/// Continuum volume of the annulus `x_− ≤ |ξ| ≤ x_+` that contains the
/// diophantine set, with `β = (m−1+δ)/m`. For `m = 2`,
/// `x_± = √(a ± (2a)^β)`; otherwise `x_± = (a ± a^β)^{1/m}`.
pub fn annulus_prediction(d: usize, m: u32, re_lambda: f64, delta: f64) -> Result<AnnulusPrediction> {
    if d == 0 {
        return Err(Error::Argument("dimension must be >= 1".into()));
    }
    if m == 0 {
        return Err(Error::Argument("order must be >= 1".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Argument(format!("delta must lie in (0,1), got {delta}")));
    }
    let mf = m as f64;
    let beta = (mf - 1.0 + delta) / mf;
    let floor = 2f64.powf((2.0 - beta) / (1.0 - beta));
    let a = re_lambda;
    if !(a >= floor) {
        return Err(Error::Domain(format!(
            "Re lambda = {a} is below the validity floor c_beta = {floor} (beta = {beta})"
        )));
    }
    let (x_minus, x_plus) = if m == 2 {
        let w = (2.0 * a).powf(beta);
        ((a - w).sqrt(), (a + w).sqrt())
    } else {
        let w = a.powf(beta);
        ((a - w).powf(1.0 / mf), (a + w).powf(1.0 / mf))
    };
    let c_d = unit_ball_volume(d);
    let di = d as i32;
    Ok(AnnulusPrediction {
        a,
        beta,
        x_minus,
        x_plus,
        c_d,
        predicted: c_d * (x_plus.powi(di) - x_minus.powi(di)),
        floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_ball(d: usize, r: f64) -> u64 {
        let b = r.floor() as i64;
        let mut count = 0;
        let mut xi = vec![-b; d];
        loop {
            let n2: i64 = xi.iter().map(|x| x * x).sum();
            if (n2 as f64) <= r * r {
                count += 1;
            }
            let mut k = 0;
            loop {
                if k == d {
                    return count;
                }
                xi[k] += 1;
                if xi[k] > b {
                    xi[k] = -b;
                    k += 1;
                } else {
                    break;
                }
            }
        }
    }

    #[test]
    fn ball_examples() {
        assert_eq!(count_ball(3, 1.0).unwrap(), 7);
        assert_eq!(count_ball(2, 0.0).unwrap(), 1);
        assert_eq!(count_ball(2, 2.0).unwrap(), brute_ball(2, 2.0));
        assert_eq!(count_ball(2, 2.0).unwrap(), 13);
        assert!(matches!(count_ball(2, 2e6), Err(Error::Resource(_))));
        assert!(matches!(count_ball(7, 1.0), Err(Error::Argument(_))));
    }

    #[test]
    fn ball_matches_brute_force() {
        for d in 1..=4 {
            for r in [0.5, 1.0, 1.5, 2.0_f64.sqrt(), 3.7, 5.0, 7.1] {
                assert_eq!(count_ball(d, r).unwrap(), brute_ball(d, r), "d={d} r={r}");
            }
        }
    }

    #[test]
    fn floor_square_is_exact_near_integers() {
        let r = 5f64.sqrt();
        let n = floor_square(r);
        assert!(n == 4 || n == 5);
        assert_eq!(n == 5, r.mul_add(r, -5.0) >= 0.0);
        assert_eq!(floor_square(3.0), 9);
        assert_eq!(floor_square(1e6), 1_000_000_000_000);
    }

    #[test]
    fn isqrt_edges() {
        for n in 0..2000u64 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
        assert_eq!(isqrt(u64::MAX), 4_294_967_295);
    }

    #[test]
    fn diophantine_laplacian_at_zero() {
        // |ξ|² ≤ |ξ|^{1.5} holds at the origin and, as a tie, on the unit
        // vectors; nowhere else.
        let rep = count_diophantine(&Symbol::laplacian(2), Complex64::new(0.0, 0.0), 0.5, 10.0, true).unwrap();
        assert_eq!(rep.count, 5);
        assert_eq!(
            rep.solutions,
            Some(vec![vec![0, 0], vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]])
        );
        assert_eq!(rep.near_ties, 4);
        assert!(!rep.saturated);
        assert!(rep.complete);
    }

    #[test]
    fn diophantine_wave_saturates() {
        let wave = Symbol::real(2, &[(&[2, 0], 1.0), (&[0, 2], -1.0)]).unwrap();
        let a = count_diophantine(&wave, Complex64::new(0.0, 0.0), 0.5, 50.0, false).unwrap();
        let b = count_diophantine(&wave, Complex64::new(0.0, 0.0), 0.5, 100.0, false).unwrap();
        assert!(a.saturated && b.saturated);
        assert!(b.count > a.count);
        assert!(a.r_star.is_none());
    }

    #[test]
    fn diophantine_matches_double_loop() {
        let rep = count_diophantine(&Symbol::laplacian(2), Complex64::new(100.0, 0.0), 0.5, 20.0, true).unwrap();
        let mut oracle = Vec::new();
        for x in -20i64..=20 {
            for y in -20i64..=20 {
                let n2 = x * x + y * y;
                if n2 > 400 {
                    continue;
                }
                let lhs = ((n2 - 100) as f64).abs();
                if lhs <= (n2 as f64).powf(0.75) {
                    oracle.push(vec![x, y]);
                }
            }
        }
        assert_eq!(rep.count as usize, oracle.len());
        let mut sols = rep.solutions.unwrap();
        sols.sort();
        oracle.sort();
        assert_eq!(sols, oracle);
    }

    #[test]
    fn diophantine_rejects_bad_delta() {
        for delta in [0.0, 1.0, -0.3, f64::NAN] {
            assert!(matches!(
                count_diophantine(&Symbol::laplacian(2), Complex64::new(1.0, 0.0), delta, 5.0, false),
                Err(Error::Argument(_))
            ));
        }
    }

    #[test]
    fn elliptic_count_is_stable_past_r_star() {
        let sym = Symbol::real(2, &[(&[2, 0], 2.0), (&[1, 1], 1.0), (&[0, 2], 1.0), (&[1, 0], 3.0)]).unwrap();
        let lam = Complex64::new(500.0, 0.0);
        let probe = count_diophantine(&sym, lam, 0.3, 1.0, false).unwrap();
        let r = probe.r_star.unwrap();
        let a = count_diophantine(&sym, lam, 0.3, r.ceil(), false).unwrap();
        let b = count_diophantine(&sym, lam, 0.3, 2.0 * r.ceil(), false).unwrap();
        assert!(a.complete && b.complete);
        assert_eq!(a.count, b.count);
        assert!(a.count > 0);
    }

    #[test]
    fn complex_lambda_uses_full_modulus() {
        // λ = 25 + 3i: ξ = (3,4) has |P−λ| = 3 ≤ 5^{1.5}.
        let rep = count_diophantine(&Symbol::laplacian(2), Complex64::new(25.0, 3.0), 0.5, 10.0, true).unwrap();
        assert!(rep.solutions.unwrap().contains(&vec![3, 4]));
        // With a large imaginary part nothing small qualifies.
        let rep = count_diophantine(&Symbol::laplacian(2), Complex64::new(25.0, 1e4), 0.5, 10.0, false).unwrap();
        assert_eq!(rep.count, 0);
    }

    #[test]
    fn annulus_example() {
        let p = annulus_prediction(2, 2, 1e4, 0.5).unwrap();
        let w = 2e4f64.powf(0.75);
        assert!((p.x_minus - (1e4 - w).sqrt()).abs() < 1e-12);
        assert!((p.x_minus - 91.20).abs() < 0.01, "{}", p.x_minus);
        assert!((p.x_plus - 108.08).abs() < 0.01, "{}", p.x_plus);
        assert!((p.predicted - std::f64::consts::PI * 2.0 * w).abs() < 1e-6);
        assert!((p.floor - 32.0).abs() < 1e-12);
        let p1 = annulus_prediction(1, 2, 500.0, 0.5).unwrap();
        assert_eq!(p1.c_d, 2.0);
        assert!((p1.predicted - 2.0 * (p1.x_plus - p1.x_minus)).abs() < 1e-12);
        assert!(matches!(annulus_prediction(2, 2, 10.0, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn annulus_three_dimensions_matches_enumeration() {
        let p = annulus_prediction(3, 2, 1e4, 0.5).unwrap();
        let rep = count_diophantine(&Symbol::laplacian(3), Complex64::new(1e4, 0.0), 0.5, 120.0, false).unwrap();
        assert!(rep.complete && !rep.saturated);
        let ratio = p.predicted / rep.count as f64;
        assert!((0.5..=2.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn shell_additivity(r1 in 0.0f64..40.0, dr in 0.0f64..40.0, d in 2usize..=3) {
            let r2 = r1 + dr;
            let diff = count_ball(d, r2).unwrap() - count_ball(d, r1).unwrap();
            let b = r2.floor() as i64;
            let mut shell = 0u64;
            if d == 2 {
                for x in -b..=b { for y in -b..=b {
                    let n = ((x * x + y * y) as f64).sqrt();
                    if n > r1 && n <= r2 { shell += 1; }
                }}
            } else {
                for x in -b..=b { for y in -b..=b { for z in -b..=b {
                    let n = ((x * x + y * y + z * z) as f64).sqrt();
                    if n > r1 && n <= r2 { shell += 1; }
                }}}
            }
            prop_assert_eq!(diff, shell);
        }
    }
}
