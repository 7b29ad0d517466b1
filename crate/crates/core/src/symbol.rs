//! Constant-coefficient symbols `P(ξ) = Σ c_α ξ^α`.
//!
//! A [`Symbol`] stores its terms sorted by multi-index with complex
//! coefficients. Evaluation at integer points goes through exact Gaussian
//! integer arithmetic whenever every coefficient is a Gaussian integer, so
//! that the lattice counter never sees rounding in `P(ξ)` itself.
//!
//! Ellipticity is certified numerically: `|σ|` is minimized over a
//! cube-projected grid on the unit sphere, then refined by coordinate
//! descent. The same grid also yields a rigorous lower bound on
//! `min |σ(ω)|` through a Lipschitz estimate, which is what the lattice
//! module uses to prove that no solutions lie beyond its enumeration cap.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest magnitude for which an `f64` holds every integer exactly.
const EXACT_F64_INT: f64 = 9_007_199_254_740_992.0;

/// Multi-index `α = (α_1, …, α_d)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Argument("multi-index must have d >= 1 entries".into()));
        }
        Ok(MultiIndex(entries))
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|α| = Σ α_i`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// `ξ^α` for a real point.
    pub fn monomial(&self, xi: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(xi)
            .map(|(&a, &x)| x.powi(a as i32))
            .product()
    }

    /// `ξ^α` for an integer point, exactly, or an overflow error.
    pub fn monomial_exact(&self, xi: &[i64]) -> Result<i128> {
        let mut acc: i128 = 1;
        for (&a, &x) in self.0.iter().zip(xi) {
            for _ in 0..a {
                acc = acc.checked_mul(x as i128).ok_or_else(|| {
                    Error::Overflow(format!("monomial {:?} at {:?} exceeds 128-bit range", self.0, xi))
                })?;
            }
        }
        Ok(acc)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub alpha: MultiIndex,
    pub coef: Complex64,
}

/// A constant-coefficient symbol of order `m` in `d` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    dim: usize,
    order: u32,
    terms: Vec<Term>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    alpha: Vec<u32>,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SymbolJson {
    dim: usize,
    terms: Vec<TermJson>,
}

impl Symbol {
    /// Builds a symbol, merging repeated multi-indices and dropping zero
    /// coefficients.
    pub fn new<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Complex64)>,
    {
        if dim == 0 {
            return Err(Error::Argument("symbol dimension must be >= 1".into()));
        }
        let mut map: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (alpha, c) in terms {
            if alpha.len() != dim {
                return Err(Error::Argument(format!(
                    "multi-index {alpha:?} has length {} but symbol dimension is {dim}",
                    alpha.len()
                )));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::Argument(format!("non-finite coefficient for {alpha:?}")));
            }
            *map.entry(MultiIndex(alpha)).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let terms: Vec<Term> = map
            .into_iter()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(alpha, coef)| Term { alpha, coef })
            .collect();
        if terms.is_empty() {
            return Err(Error::Degenerate("symbol has no nonzero term".into()));
        }
        let order = terms.iter().map(|t| t.alpha.order()).max().unwrap_or(0);
        Ok(Symbol { dim, order, terms })
    }

    /// Convenience constructor for real coefficients.
    pub fn real(dim: usize, terms: &[(&[u32], f64)]) -> Result<Self> {
        Symbol::new(
            dim,
            terms
                .iter()
                .map(|(a, c)| (a.to_vec(), Complex64::new(*c, 0.0))),
        )
    }

    /// `|ξ|²`, the symbol of `-Δ`.
    pub fn laplacian(dim: usize) -> Self {
        let terms = (0..dim).map(|i| {
            let mut a = vec![0; dim];
            a[i] = 2;
            (a, Complex64::new(1.0, 0.0))
        });
        Symbol::new(dim, terms).expect("laplacian symbol is valid")
    }

    /// `|ξ|^{2k}` expanded into monomials.
    pub fn laplacian_power(dim: usize, k: u32) -> Self {
        let mut poly: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        poly.insert(vec![0; dim], 1.0);
        for _ in 0..k {
            let mut next: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
            for (a, c) in &poly {
                for i in 0..dim {
                    let mut b = a.clone();
                    b[i] += 2;
                    *next.entry(b).or_insert(0.0) += c;
                }
            }
            poly = next;
        }
        Symbol::new(dim, poly.into_iter().map(|(a, c)| (a, Complex64::new(c, 0.0))))
            .expect("laplacian power is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Order `m = max |α|` over nonzero terms.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// True if every coefficient is a Gaussian integer representable exactly.
    pub fn has_gaussian_integer_coefficients(&self) -> bool {
        self.terms.iter().all(|t| {
            let ok = |x: f64| x.fract() == 0.0 && x.abs() < EXACT_F64_INT;
            ok(t.coef.re) && ok(t.coef.im)
        })
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::Argument(format!(
                "point has length {len} but symbol dimension is {}",
                self.dim
            )));
        }
        Ok(())
    }

    /// `P(ξ)` at a real point.
    pub fn eval(&self, xi: &[f64]) -> Result<Complex64> {
        self.check_dim(xi.len())?;
        Ok(self.eval_unchecked(xi))
    }

    pub(crate) fn eval_unchecked(&self, xi: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coef * t.alpha.monomial(xi))
            .sum()
    }

    /// Exact `P(ξ)` as a Gaussian integer `(re, im)`, or `None` when the
    /// coefficients are not Gaussian integers.
    pub fn eval_exact(&self, xi: &[i64]) -> Result<Option<(i128, i128)>> {
        self.check_dim(xi.len())?;
        if !self.has_gaussian_integer_coefficients() {
            return Ok(None);
        }
        self.eval_exact_unchecked(xi).map(Some)
    }

    pub(crate) fn eval_exact_unchecked(&self, xi: &[i64]) -> Result<(i128, i128)> {
        let overflow = || Error::Overflow(format!("P({xi:?}) exceeds 128-bit range"));
        let mut re: i128 = 0;
        let mut im: i128 = 0;
        for t in &self.terms {
            let mono = t.alpha.monomial_exact(xi)?;
            let cr = t.coef.re as i128;
            let ci = t.coef.im as i128;
            re = cr
                .checked_mul(mono)
                .and_then(|v| re.checked_add(v))
                .ok_or_else(overflow)?;
            im = ci
                .checked_mul(mono)
                .and_then(|v| im.checked_add(v))
                .ok_or_else(overflow)?;
        }
        Ok((re, im))
    }

    /// `P(ξ)` at an integer point, through the exact path when available.
    pub fn eval_lattice(&self, xi: &[i64]) -> Result<Complex64> {
        match self.eval_exact(xi)? {
            Some((re, im)) => Ok(Complex64::new(re as f64, im as f64)),
            None => {
                let x: Vec<f64> = xi.iter().map(|&v| v as f64).collect();
                Ok(self.eval_unchecked(&x))
            }
        }
    }

    /// The principal symbol `σ`: the terms with `|α| = m`.
    pub fn principal(&self) -> Symbol {
        let terms: Vec<Term> = self
            .terms
            .iter()
            .filter(|t| t.alpha.order() == self.order)
            .cloned()
            .collect();
        Symbol {
            dim: self.dim,
            order: self.order,
            terms,
        }
    }

    /// Terms with `|α| < m`.
    pub fn lower_order_terms(&self) -> impl Iterator<Item = &Term> {
        self.terms.iter().filter(move |t| t.alpha.order() < self.order)
    }

    /// `Σ |c_α|` over the principal part.
    pub fn principal_coefficient_mass(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.alpha.order() == self.order)
            .map(|t| t.coef.norm())
            .sum()
    }

    /// Parses the whitespace text format: one term per line,
    /// `alpha_1 … alpha_d re im`, `#` starting a comment.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut dim: Option<usize> = None;
        let mut terms = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() < 3 {
                return Err(Error::Parse(format!(
                    "line {}: expected `alpha_1 .. alpha_d re im`",
                    lineno + 1
                )));
            }
            let d = tokens.len() - 2;
            match dim {
                None => dim = Some(d),
                Some(prev) if prev != d => {
                    return Err(Error::Parse(format!(
                        "line {}: {d} exponents but earlier lines had {prev}",
                        lineno + 1
                    )))
                }
                _ => {}
            }
            let alpha = tokens[..d]
                .iter()
                .map(|t| {
                    t.parse::<u32>()
                        .map_err(|e| Error::Parse(format!("line {}: exponent `{t}`: {e}", lineno + 1)))
                })
                .collect::<Result<Vec<u32>>>()?;
            let num = |t: &str| {
                t.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: number `{t}`: {e}", lineno + 1)))
            };
            let re = num(tokens[d])?;
            let im = num(tokens[d + 1])?;
            terms.push((alpha, Complex64::new(re, im)));
        }
        let dim = dim.ok_or_else(|| Error::Parse("no terms found".into()))?;
        Symbol::new(dim, terms)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            let exps: Vec<String> = t.alpha.entries().iter().map(|a| a.to_string()).collect();
            out.push_str(&format!("{} {:?} {:?}\n", exps.join(" "), t.coef.re, t.coef.im));
        }
        out
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        let js: SymbolJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("symbol JSON: {e}")))?;
        Symbol::new(
            js.dim,
            js.terms
                .into_iter()
                .map(|t| (t.alpha, Complex64::new(t.re, t.im))),
        )
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let js = SymbolJson {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    alpha: t.alpha.entries().to_vec(),
                    re: t.coef.re,
                    im: t.coef.im,
                })
                .collect(),
        };
        serde_json::to_value(js).expect("symbol serializes")
    }

    /// Accepts either format, deciding on the first non-blank character.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Symbol::parse_json(text)
        } else {
            Symbol::parse_text(text)
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| format!("({}{:+}i)ξ^{}", t.coef.re, t.coef.im, t.alpha))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Elliptic,
    NonElliptic,
    Inconclusive,
}

/// Result of minimizing `|σ|` over the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticityCertificate {
    /// Refined estimate of `min_{|ω|=1} |σ(ω)|`.
    pub margin: f64,
    /// Unit vector attaining `margin`.
    pub witness: Vec<f64>,
    pub verdict: Verdict,
    pub grid_density: usize,
    pub tolerance: f64,
    /// Grid minimum minus Lipschitz constant times covering radius: a proven
    /// lower bound on `min |σ|` (may be negative, i.e. uninformative).
    pub lower_bound: f64,
    pub grid_min: f64,
    pub lipschitz: f64,
}

/// Refined minima below `SEPARATION * tolerance` but above `tolerance` are
/// reported as inconclusive.
pub const SEPARATION: f64 = 1e3;

/// Coordinate descent on the sphere stops below this step.
const REFINE_STEP_FLOOR: f64 = 1e-10;

/// Default tolerance `1e-9 · Σ|c_α|` over the principal part.
pub fn default_tolerance(sym: &Symbol) -> f64 {
    1e-9 * sym.principal_coefficient_mass()
}

/// Flips `v` so that its first non-negligible coordinate is positive.
fn canonical_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// Orders candidate minimizers: smaller value first, then the
/// lexicographically larger sign-canonical direction.
fn better(val: f64, vec: &[f64], best_val: f64, best_vec: &[f64], tie: f64) -> bool {
    if val < best_val - tie {
        return true;
    }
    if (val - best_val).abs() <= tie {
        for (a, b) in vec.iter().zip(best_vec) {
            if (a - b).abs() > 1e-12 {
                return a > b;
            }
        }
    }
    false
}

/// Visits every point of the cube-projected sphere grid: on each face
/// `x_axis = ±1` the remaining coordinates run over `density + 1` values
/// in `[-1, 1]`, then the point is projected radially onto the sphere.
fn for_each_sphere_point(dim: usize, density: usize, mut f: impl FnMut(&[f64])) {
    let free = dim - 1;
    let per_axis = density + 1;
    let count = per_axis.pow(free as u32);
    let mut p = vec![0.0; dim];
    for axis in 0..dim {
        for sign in [1.0, -1.0] {
            for idx in 0..count {
                let mut rem = idx;
                let mut k = 0;
                for (i, slot) in p.iter_mut().enumerate() {
                    if i == axis {
                        *slot = sign;
                    } else {
                        let g = rem % per_axis;
                        rem /= per_axis;
                        *slot = -1.0 + 2.0 * g as f64 / density as f64;
                        k += 1;
                    }
                }
                debug_assert_eq!(k, free);
                let mut q = p.clone();
                normalize(&mut q);
                f(&q);
            }
        }
    }
}

/// Upper bound on `|∇σ|` over the closed unit ball.
fn lipschitz_bound(principal: &Symbol) -> f64 {
    let mut grad = vec![0.0; principal.dim()];
    for t in principal.terms() {
        for (g, &a) in grad.iter_mut().zip(t.alpha.entries()) {
            *g += t.coef.norm() * a as f64;
        }
    }
    grad.iter().map(|g| g * g).sum::<f64>().sqrt()
}

/// Covering radius (chordal) of the cube-projected grid.
fn covering_radius(dim: usize, density: usize) -> f64 {
    ((dim - 1) as f64).sqrt() / density as f64
}

struct GridScan {
    best: Vec<(f64, Vec<f64>)>,
    min: f64,
}

fn scan_grid(principal: &Symbol, density: usize, keep: usize, tie: f64) -> GridScan {
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut min = f64::INFINITY;
    for_each_sphere_point(principal.dim(), density, |w| {
        let val = principal.eval_unchecked(w).norm();
        min = min.min(val);
        let mut v = w.to_vec();
        canonical_sign(&mut v);
        if best.iter().any(|(_, b)| {
            b.iter().zip(&v).all(|(x, y)| (x - y).abs() < 1e-12)
        }) {
            return;
        }
        let pos = best
            .iter()
            .position(|(bv, bw)| better(val, &v, *bv, bw, tie))
            .unwrap_or(best.len());
        if pos < keep {
            best.insert(pos, (val, v));
            best.truncate(keep);
        }
    });
    GridScan { best, min }
}

/// Coordinate descent on the sphere, halving the step when a full sweep
/// brings no improvement.
fn refine(principal: &Symbol, start: &[f64], initial_step: f64) -> (f64, Vec<f64>) {
    let dim = start.len();
    let f = |w: &[f64]| principal.eval_unchecked(w).norm();
    let mut w = start.to_vec();
    let mut val = f(&w);
    let mut step = initial_step;
    let mut cand = vec![0.0; dim];
    let mut sweeps = 0usize;
    while step >= REFINE_STEP_FLOOR && sweeps < 100_000 {
        sweeps += 1;
        let mut improved = false;
        for i in 0..dim {
            for s in [1.0, -1.0] {
                cand.copy_from_slice(&w);
                cand[i] += s * step;
                normalize(&mut cand);
                let v = f(&cand);
                if v < val {
                    val = v;
                    w.copy_from_slice(&cand);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    canonical_sign(&mut w);
    (val, w)
}

/// Estimates `min_{|ω|=1} |σ(ω)|` and classifies the symbol.
pub fn ellipticity_certificate(
    sym: &Symbol,
    grid_density: usize,
    tolerance: f64,
) -> Result<EllipticityCertificate> {
    if grid_density < 8 {
        return Err(Error::Argument(format!(
            "grid density must be >= 8, got {grid_density}"
        )));
    }
    if !(tolerance > 0.0) {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    let principal = sym.principal();
    let scale = principal.principal_coefficient_mass();
    if scale == 0.0 {
        return Err(Error::Degenerate("principal symbol vanishes identically".into()));
    }
    let dim = sym.dim();
    let lipschitz = lipschitz_bound(&principal);
    if dim == 1 {
        // The sphere is {-1, +1}.
        let v = principal.eval_unchecked(&[1.0]).norm();
        let verdict = classify(v, tolerance);
        return Ok(EllipticityCertificate {
            margin: v,
            witness: vec![1.0],
            verdict,
            grid_density,
            tolerance,
            lower_bound: v,
            grid_min: v,
            lipschitz,
        });
    }
    let tie = 1e-15 * scale;
    let scan = scan_grid(&principal, grid_density, 4, tie);
    let mut best_val = f64::INFINITY;
    let mut best_vec = scan.best[0].1.clone();
    for (_, start) in &scan.best {
        let (v, w) = refine(&principal, start, 2.0 / grid_density as f64);
        if better(v, &w, best_val, &best_vec, tie) {
            best_val = v;
            best_vec = w;
        }
    }
    let lower_bound = scan.min - lipschitz * covering_radius(dim, grid_density);
    Ok(EllipticityCertificate {
        margin: best_val,
        witness: best_vec,
        verdict: classify(best_val, tolerance),
        grid_density,
        tolerance,
        lower_bound,
        grid_min: scan.min,
        lipschitz,
    })
}

fn classify(margin: f64, tolerance: f64) -> Verdict {
    if margin <= tolerance {
        Verdict::NonElliptic
    } else if margin <= SEPARATION * tolerance {
        Verdict::Inconclusive
    } else {
        Verdict::Elliptic
    }
}

/// A proven positive lower bound on `min_{|ω|=1} |σ(ω)|`, found by
/// densifying the sphere grid until the Lipschitz bound separates from zero
/// and is within 5% of the grid minimum. Returns `None` if no density within
/// the point budget separates.
pub fn proven_margin(sym: &Symbol) -> Option<f64> {
    let principal = sym.principal();
    let dim = sym.dim();
    if dim == 1 {
        let v = principal.eval_unchecked(&[1.0]).norm();
        return (v > 0.0).then_some(v);
    }
    let lipschitz = lipschitz_bound(&principal);
    let budget: usize = 4_000_000;
    let mut density = 8usize;
    let mut best: Option<f64> = None;
    loop {
        let points = 2 * dim * (density + 1).pow(dim as u32 - 1);
        if points > budget {
            return best;
        }
        let mut min = f64::INFINITY;
        for_each_sphere_point(dim, density, |w| {
            min = min.min(principal.eval_unchecked(w).norm());
        });
        let lb = min - lipschitz * covering_radius(dim, density);
        if lb > 0.0 {
            best = Some(best.map_or(lb, |b: f64| b.max(lb)));
            if lb >= 0.95 * min {
                return best;
            }
        }
        if min == 0.0 {
            return None;
        }
        density *= 2;
    }
}

/// Lattice points tracking the zero line of a non-elliptic principal symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSequence {
    pub points: Vec<Vec<i64>>,
    /// Stride `T` with `ξ_j = round(j T ζ)`.
    pub stride: f64,
    /// Achieved `max_j dist(ξ_j, ℝζ)`.
    pub max_distance: f64,
    /// Achieved `max_j |σ(ξ_j)| / |ξ_j|^{m-1}`.
    pub growth_constant: f64,
    pub direction: Vec<f64>,
}

/// Builds `count` lattice points near the line `ℝζ`, `ζ` the certificate
/// witness, with strictly increasing norms.
pub fn witness_sequence(
    sym: &Symbol,
    cert: &EllipticityCertificate,
    count: usize,
) -> Result<WitnessSequence> {
    if cert.verdict != Verdict::NonElliptic {
        return Err(Error::Logic(format!(
            "witness sequence requires a non-elliptic certificate, got {:?}",
            cert.verdict
        )));
    }
    if cert.witness.len() != sym.dim() {
        return Err(Error::Argument("certificate dimension does not match symbol".into()));
    }
    let principal = sym.principal();
    let zeta = &cert.witness;
    let max_abs = zeta.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let stride = 1.0 / max_abs;
    let m = principal.order() as i32;
    let mut points: Vec<Vec<i64>> = Vec::with_capacity(count);
    let mut last_norm2: i128 = 0;
    let mut max_distance = 0.0f64;
    let mut growth_constant = 0.0f64;
    let mut j: u64 = 0;
    while points.len() < count {
        j += 1;
        if j > 1000 * (count as u64 + 1) {
            return Err(Error::Logic("witness stride produced no new lattice points".into()));
        }
        let p: Vec<i64> = zeta
            .iter()
            .map(|z| (j as f64 * stride * z).round() as i64)
            .collect();
        let n2: i128 = p.iter().map(|&x| (x as i128) * (x as i128)).sum();
        if n2 <= last_norm2 {
            continue;
        }
        last_norm2 = n2;
        let pf: Vec<f64> = p.iter().map(|&x| x as f64).collect();
        let along: f64 = pf.iter().zip(zeta).map(|(a, b)| a * b).sum();
        let dist = pf
            .iter()
            .zip(zeta)
            .map(|(a, b)| (a - along * b).powi(2))
            .sum::<f64>()
            .sqrt();
        max_distance = max_distance.max(dist);
        let norm = (n2 as f64).sqrt();
        let sigma = principal.eval_lattice(&p)?.norm();
        growth_constant = growth_constant.max(sigma / norm.powi(m - 1));
        points.push(p);
    }
    Ok(WitnessSequence {
        points,
        stride,
        max_distance,
        growth_constant,
        direction: zeta.clone(),
    })
}
