//! Cutoff fields on the torus `𝕋² = ℝ²/2πℤ²` and their Fourier
//! coefficients `Ψ̂(ξ) = (2π)^{−2} ∫ Ψ e^{−iξ·x} dx`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::profile::{bump, Profile};
use crate::eigen::{DomainMask, EigenPair};
use crate::error::{Error, Result};
use crate::lattice::{count_diophantine, EXACT_SLACK, FLOAT_SLACK};
use crate::numtheory::zeta_d_partial;
use crate::symbol::{MultiIndex, Symbol};

/// Relative Parseval defect tolerated on construction.
pub const PARSEVAL_TOLERANCE: f64 = 1e-10;

/// Coefficients below this fraction of the largest one are treated as
/// transform round-off and left out of the fitted constant.
pub const NOISE_FLOOR: f64 = 1e-12;

/// `χ_r(x) = χ(|x − x₀| / r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub center: [f64; 2],
    pub radius: f64,
    pub profile: Profile,
}

impl Cutoff {
    pub fn new(center: [f64; 2], radius: f64, profile: Profile) -> Result<Cutoff> {
        if !(radius > 0.0) || !radius.is_finite() || !center.iter().all(|c| c.is_finite()) {
            return Err(Error::Argument(format!("cutoff needs finite center and radius > 0, got r = {radius}")));
        }
        Ok(Cutoff { center, radius, profile })
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        bump(self.profile, dx.hypot(dy) / self.radius)
    }

    fn require_small(&self) -> Result<()> {
        if self.radius >= 1.0 {
            return Err(Error::Precondition(format!(
                "cutoff radius must be < 1 so translates stay disjoint, got {}",
                self.radius
            )));
        }
        Ok(())
    }
}

/// `Ψ` on an `nt × nt` grid of spacing `2π/nt` starting at `corner`, and its
/// Fourier coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusField {
    pub nt: usize,
    pub spacing: f64,
    pub corner: [f64; 2],
    /// Torus coordinates are `scale ×` mask coordinates; eigenvalues of the
    /// rescaled field are `λ / scale²`.
    pub scale: f64,
    /// Cutoff in torus coordinates.
    pub cutoff: Option<Cutoff>,
    /// Row-major, `values[b·nt + a]` at `corner + spacing·(a, b)`.
    pub values: Vec<Complex64>,
    /// `Ψ̂` in transform order: index `k` holds frequency [`TorusField::frequency`]`(k)`.
    pub spectrum: Vec<Complex64>,
    /// `‖ψ‖_{L²(B(x₀,r))}` in torus coordinates, or the full-torus norm of
    /// the uncut field when there is no cutoff.
    pub local_l2: f64,
    pub parseval_defect: f64,
    /// Raster cell `(i, j)` of the source mask sits at torus index
    /// `(i − offset₀, j − offset₁)`.
    pub raster_offset: Option<[isize; 2]>,
}

fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    fft.process(data);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for a in 0..n {
        for b in 0..n {
            col[b] = data[b * n + a];
        }
        fft.process(&mut col);
        for b in 0..n {
            data[b * n + a] = col[b];
        }
    }
}

impl TorusField {
    /// Frequency stored at transform index `k`.
    pub fn frequency(&self, k: usize) -> i64 {
        frequency(self.nt, k)
    }

    /// Largest `|ξ_i|` represented.
    pub fn nyquist(&self) -> i64 {
        (self.nt / 2) as i64
    }

    pub fn point(&self, a: usize, b: usize) -> [f64; 2] {
        [self.corner[0] + a as f64 * self.spacing, self.corner[1] + b as f64 * self.spacing]
    }

    pub fn coefficient(&self, xi: [i64; 2]) -> Option<Complex64> {
        let idx = |x: i64| -> Option<usize> {
            let k = x.rem_euclid(self.nt as i64) as usize;
            (frequency(self.nt, k) == x).then_some(k)
        };
        Some(self.spectrum[idx(xi[1])? * self.nt + idx(xi[0])?])
    }

    /// `(ξ, Ψ̂(ξ))` in transform order.
    pub fn coefficients(&self) -> impl Iterator<Item = ([i64; 2], Complex64)> + '_ {
        let nt = self.nt;
        self.spectrum
            .iter()
            .enumerate()
            .map(move |(idx, &c)| ([frequency(nt, idx % nt), frequency(nt, idx / nt)], c))
    }

    /// `(2π)^{−2} ‖Ψ‖₂²` by grid quadrature.
    pub fn mean_square(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / (self.nt * self.nt) as f64
    }

    /// Builds a field from grid values; computes the spectrum and checks
    /// Parseval.
    pub fn from_values(
        nt: usize,
        corner: [f64; 2],
        values: Vec<Complex64>,
        scale: f64,
        cutoff: Option<Cutoff>,
        local_l2: f64,
    ) -> Result<TorusField> {
        if nt < 4 || values.len() != nt * nt {
            return Err(Error::Argument(format!("torus grid needs nt >= 4 and nt² values, got nt = {nt}")));
        }
        let mut spectrum = values.clone();
        fft2(&mut spectrum, nt, false);
        let norm = 1.0 / (nt * nt) as f64;
        for (idx, c) in spectrum.iter_mut().enumerate() {
            let xi = [frequency(nt, idx % nt) as f64, frequency(nt, idx / nt) as f64];
            let phase = -(xi[0] * corner[0] + xi[1] * corner[1]);
            *c *= Complex64::from_polar(norm, phase);
        }
        let mut field = TorusField {
            nt,
            spacing: 2.0 * PI / nt as f64,
            corner,
            scale,
            cutoff,
            values,
            spectrum,
            local_l2,
            parseval_defect: 0.0,
            raster_offset: None,
        };
        let lhs: f64 = field.spectrum.iter().map(|z| z.norm_sqr()).sum();
        let rhs = field.mean_square();
        field.parseval_defect = if rhs > 0.0 { (lhs - rhs).abs() / rhs } else { lhs };
        if field.parseval_defect > PARSEVAL_TOLERANCE {
            return Err(Error::Logic(format!(
                "Parseval defect {:.3e} exceeds {PARSEVAL_TOLERANCE:e}",
                field.parseval_defect
            )));
        }
        Ok(field)
    }

    /// `Ψ = χ_r · f` sampled on the grid of spacing `2π/nt` with corner
    /// `x₀ − (π, π)`; without a cutoff `Ψ = f`.
    pub fn from_function(
        nt: usize,
        center: [f64; 2],
        cutoff: Option<Cutoff>,
        f: impl Fn([f64; 2]) -> Complex64,
    ) -> Result<TorusField> {
        if let Some(c) = &cutoff {
            c.require_small()?;
        }
        let corner = [center[0] - PI, center[1] - PI];
        let dx = 2.0 * PI / nt as f64;
        let mut values = Vec::with_capacity(nt * nt);
        let mut local = 0.0;
        for b in 0..nt {
            for a in 0..nt {
                let x = [corner[0] + a as f64 * dx, corner[1] + b as f64 * dx];
                let v = f(x);
                let w = match &cutoff {
                    Some(c) => {
                        if (x[0] - c.center[0]).hypot(x[1] - c.center[1]) < c.radius {
                            local += v.norm_sqr();
                        }
                        c.eval(x)
                    }
                    None => {
                        local += v.norm_sqr();
                        1.0
                    }
                };
                values.push(v * w);
            }
        }
        TorusField::from_values(nt, corner, values, 1.0, cutoff, (local * dx * dx).sqrt())
    }

    /// Field with the given coefficients (others zero), by inverse transform.
    pub fn from_spectrum(nt: usize, corner: [f64; 2], coeffs: &[([i64; 2], Complex64)]) -> Result<TorusField> {
        if nt < 4 {
            return Err(Error::Argument("torus grid needs nt >= 4".into()));
        }
        let mut data = vec![Complex64::new(0.0, 0.0); nt * nt];
        for &(xi, c) in coeffs {
            let k0 = xi[0].rem_euclid(nt as i64) as usize;
            let k1 = xi[1].rem_euclid(nt as i64) as usize;
            if frequency(nt, k0) != xi[0] || frequency(nt, k1) != xi[1] {
                return Err(Error::Argument(format!("frequency {xi:?} is not representable on nt = {nt}")));
            }
            let phase = xi[0] as f64 * corner[0] + xi[1] as f64 * corner[1];
            data[k1 * nt + k0] += c * Complex64::from_polar(1.0, phase);
        }
        fft2(&mut data, nt, true);
        let local = (data.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt() * 2.0 * PI / nt as f64;
        TorusField::from_values(nt, corner, data, 1.0, None, local)
    }

    /// Grid samples of `D^γ Ψ`, `D = −i∂`, by spectral differentiation.
    pub fn spectral_derivative(&self, gamma: &MultiIndex) -> Result<Vec<Complex64>> {
        if gamma.dim() != 2 {
            return Err(Error::Argument(format!("derivative index must have 2 entries, got {}", gamma.dim())));
        }
        let nt = self.nt;
        let mut data: Vec<Complex64> = self
            .spectrum
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                let xi = [frequency(nt, idx % nt) as f64, frequency(nt, idx / nt) as f64];
                let phase = xi[0] * self.corner[0] + xi[1] * self.corner[1];
                c * gamma.monomial(&xi) * Complex64::from_polar(1.0, phase)
            })
            .collect();
        fft2(&mut data, nt, true);
        Ok(data)
    }
}

fn frequency(nt: usize, k: usize) -> i64 {
    if k <= (nt - 1) / 2 {
        k as i64
    } else {
        k as i64 - nt as i64
    }
}

/// Periodizes `χ_r ψ` for an eigenpair sampled on `mask`.
///
/// The torus grid reuses the mask grid: `nt = ⌈2π/h⌉` points per side, with
/// coordinates rescaled by `2π/(nt·h)` so that the period is exactly `2π`.
/// The window is centered on the cell nearest `x₀`; since `r < 1 < π` no
/// translate of the ball overlaps another.
pub fn periodize(pair: &EigenPair, mask: &DomainMask, cutoff: &Cutoff) -> Result<TorusField> {
    cutoff.require_small()?;
    if pair.nx != mask.nx || pair.ny != mask.ny || (pair.h - mask.h).abs() > 1e-12 * mask.h {
        return Err(Error::Argument("eigenpair raster does not match the mask".into()));
    }
    if !mask.contains_ball(cutoff.center, cutoff.radius) {
        return Err(Error::Geometry(format!(
            "ball of radius {} at ({}, {}) leaves the domain",
            cutoff.radius, cutoff.center[0], cutoff.center[1]
        )));
    }
    let h = mask.h;
    let nt = ((2.0 * PI / h) - 1e-9).ceil() as usize;
    let scale = 2.0 * PI / (nt as f64 * h);
    let ic = ((cutoff.center[0] - mask.origin[0]) / h).round() as isize;
    let jc = ((cutoff.center[1] - mask.origin[1]) / h).round() as isize;
    let i0 = ic - (nt / 2) as isize;
    let j0 = jc - (nt / 2) as isize;
    let psi = pair.psi_complex();
    let mut values = vec![Complex64::new(0.0, 0.0); nt * nt];
    let mut local = 0.0;
    for b in 0..nt {
        let j = j0 + b as isize;
        if j < 0 || j >= mask.ny as isize {
            continue;
        }
        for a in 0..nt {
            let i = i0 + a as isize;
            if !mask.is_inside(i, j) {
                continue;
            }
            let x = mask.point(i as usize, j as usize);
            let v = psi[j as usize * mask.nx + i as usize];
            if (x[0] - cutoff.center[0]).hypot(x[1] - cutoff.center[1]) < cutoff.radius {
                local += v.norm_sqr();
            }
            values[b * nt + a] = v * cutoff.eval(x);
        }
    }
    let corner = [
        scale * (mask.origin[0] + i0 as f64 * h),
        scale * (mask.origin[1] + j0 as f64 * h),
    ];
    let torus_cut = Cutoff {
        center: [scale * cutoff.center[0], scale * cutoff.center[1]],
        radius: scale * cutoff.radius,
        profile: cutoff.profile,
    };
    // h² Σ|ψ|² in mask units; lengths scale by `scale`.
    let local_l2 = scale * (local * h * h).sqrt();
    let mut field = TorusField::from_values(nt, corner, values, scale, Some(torus_cut), local_l2)?;
    field.raster_offset = Some([i0, j0]);
    Ok(field)
}

/// Smallest integer `α` with `α > d/δ`.
pub fn default_alpha(d: usize, delta: f64) -> u32 {
    (d as f64 / delta).floor() as u32 + 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    /// Eigenvalue in torus units (`λ / scale²`).
    pub lambda: Complex64,
    pub lambda_input: Complex64,
    pub scale: f64,
    pub alpha: u32,
    pub delta: f64,
    pub nyquist: i64,
    /// Frequencies in the annulus `|P(ξ) − λ| ≤ |ξ|^{m−1+δ}` inside the box.
    #[serde(rename = "partI_count")]
    pub part_i_count: u64,
    /// Lattice-module count of the same annulus restricted to the box.
    pub fdelta_count: u64,
    /// Full `F_δ` when the lattice enumeration is complete.
    pub fdelta_total: Option<u64>,
    #[serde(rename = "partI_sum")]
    pub part_i_sum: f64,
    /// `√(#I · Σ_I |Ψ̂|²)`.
    #[serde(rename = "partI_cauchy_schwarz")]
    pub part_i_cauchy_schwarz: f64,
    /// `max_{II} |Ψ̂(ξ)| |P(ξ) − λ|^α / (|ξ|^{(m−1)α} ‖ψ‖_{L²(B)})`.
    #[serde(rename = "C_obs")]
    pub c_obs: f64,
    #[serde(rename = "C_obs_at")]
    pub c_obs_at: [i64; 2],
    pub local_l2: f64,
    pub below_noise_floor: u64,
    pub tail_sum: f64,
    /// `ζ₂(αδ/2)` as partial sum plus rigorous tail.
    pub zeta_ref: f64,
    /// `C_obs ‖ψ‖_{L²(B)} ζ_ref` plus the noise-floor allowance.
    pub tail_bound: f64,
    pub tail_within_bound: bool,
}

fn check_alpha(d: usize, alpha: u32, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Argument(format!("delta must lie in (0,1), got {delta}")));
    }
    if !(alpha as f64 > d as f64 / delta) {
        return Err(Error::Argument(format!("alpha = {alpha} must exceed d/delta = {}", d as f64 / delta)));
    }
    Ok(())
}

/// Splits the observed spectrum into the annulus (Part I) and its
/// complement (Part II) and measures the coefficient decay constant.
pub fn coefficient_bound_report(
    field: &TorusField,
    sym: &Symbol,
    lambda: Complex64,
    alpha: Option<u32>,
    delta: f64,
) -> Result<CoefficientReport> {
    if sym.dim() != 2 {
        return Err(Error::Argument(format!("torus fields are two-dimensional; symbol has d = {}", sym.dim())));
    }
    let alpha = alpha.unwrap_or_else(|| default_alpha(2, delta));
    check_alpha(2, alpha, delta)?;
    if !(field.local_l2 > 0.0) {
        return Err(Error::Degenerate("field vanishes on the cutoff ball".into()));
    }
    let m = sym.order() as f64;
    let lam_in = lambda;
    let lambda = lambda / (field.scale * field.scale);
    let nyq = field.nyquist();
    let annulus = lambda.re.max(0.0).powf(1.0 / m);
    if !(nyq as f64 > 2.0 * annulus) {
        return Err(Error::Resolution(format!(
            "Nyquist frequency {nyq} does not exceed 2 (Re lambda)^(1/m) = {:.3}; refine the grid",
            2.0 * annulus
        )));
    }
    let exponent = m - 1.0 + delta;
    let slack = if sym.has_gaussian_integer_coefficients() { EXACT_SLACK } else { FLOAT_SLACK };
    let peak = field.spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let floor = NOISE_FLOOR * peak;

    let mut part_i_count = 0u64;
    let mut part_i_sum = 0.0;
    let mut part_i_sq = 0.0;
    let mut tail_sum = 0.0;
    let mut c_obs = 0.0f64;
    let mut c_obs_at = [0i64, 0];
    let mut below = 0u64;
    for (xi, c) in field.coefficients() {
        let xf = [xi[0] as f64, xi[1] as f64];
        let n2 = xf[0] * xf[0] + xf[1] * xf[1];
        let diff = sym.eval(&xf)? - lambda;
        let lhs = diff.norm_sqr();
        let rhs = n2.powf(exponent);
        let a = c.norm();
        if lhs <= rhs + slack * rhs.max(lhs) {
            part_i_count += 1;
            part_i_sum += a;
            part_i_sq += a * a;
            continue;
        }
        tail_sum += a;
        if n2 == 0.0 {
            continue;
        }
        if a < floor {
            below += 1;
            continue;
        }
        // |Ψ̂| |P − λ|^α / |ξ|^{(m−1)α}, in logs to avoid overflow.
        let log_c = a.ln() + 0.5 * alpha as f64 * (lhs.ln() - (m - 1.0) * n2.ln());
        let v = (log_c - field.local_l2.ln()).exp();
        if v > c_obs {
            c_obs = v;
            c_obs_at = xi;
        }
    }

    let box_cap = (2.0f64).sqrt() * nyq as f64;
    let lat = count_diophantine(sym, lambda, delta, box_cap, true)?;
    let in_box = |x: i64| frequency(field.nt, x.rem_euclid(field.nt as i64) as usize) == x;
    let fdelta_count = lat
        .solutions
        .as_ref()
        .map(|s| s.iter().filter(|xi| in_box(xi[0]) && in_box(xi[1])).count() as u64)
        .unwrap_or(0);
    let fdelta_total = lat.complete.then_some(lat.count);

    let s = alpha as f64 * delta / 2.0;
    let zeta = zeta_d_partial(2, s, (nyq * nyq) as u64)?;
    let zeta_ref = zeta.partial + zeta.tail_bound;
    let tail_bound = c_obs * field.local_l2 * zeta_ref + floor * below as f64;
    Ok(CoefficientReport {
        lambda,
        lambda_input: lam_in,
        scale: field.scale,
        alpha,
        delta,
        nyquist: nyq,
        part_i_count,
        fdelta_count,
        fdelta_total,
        part_i_sum,
        part_i_cauchy_schwarz: (part_i_count as f64 * part_i_sq).sqrt(),
        c_obs,
        c_obs_at,
        local_l2: field.local_l2,
        below_noise_floor: below,
        tail_sum,
        zeta_ref,
        tail_bound,
        tail_within_bound: tail_sum <= tail_bound * (1.0 + 1e-9),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeBound {
    pub gamma: Vec<u32>,
    /// `Σ_ξ |ξ|^{|γ|} |Ψ̂(ξ)|`.
    pub bound: f64,
    /// Grid max of `|D^γ Ψ|` from the spectral derivative.
    pub sampled_sup: f64,
    /// Grid max of `|D^γ Ψ|` over `B(x₀, r/2)`, where a plateau cutoff is `1`.
    pub inner_sup: Option<f64>,
}

pub fn derivative_sup_bound(field: &TorusField, gamma: &MultiIndex) -> Result<DerivativeBound> {
    let k = gamma.order() as f64;
    let bound: f64 = field
        .coefficients()
        .map(|(xi, c)| {
            let n = (xi[0] as f64).hypot(xi[1] as f64);
            if k == 0.0 {
                c.norm()
            } else {
                n.powf(k) * c.norm()
            }
        })
        .sum();
    let deriv = field.spectral_derivative(gamma)?;
    let sampled_sup = deriv.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let inner_sup = field.cutoff.map(|c| {
        let mut best = 0.0f64;
        for b in 0..field.nt {
            for a in 0..field.nt {
                let x = field.point(a, b);
                if (x[0] - c.center[0]).hypot(x[1] - c.center[1]) <= 0.5 * c.radius {
                    best = best.max(deriv[b * field.nt + a].norm());
                }
            }
        }
        best
    });
    Ok(DerivativeBound { gamma: gamma.entries().to_vec(), bound, sampled_sup, inner_sup })
}
