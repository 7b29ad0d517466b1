//! Interior sup-norm ratios of eigenfunctions, log-log exponent fits, and
//! the growth of the annulus count `F_δ(λ)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutoff::{periodize, Cutoff, Profile};
use crate::eigen::{DomainMask, EigenPair, PairSource};
use crate::error::{Error, Result};
use crate::lattice::count_diophantine;
use crate::symbol::{proven_margin, MultiIndex, Symbol};

/// Minimum spread of `λ` (in decades) accepted by [`fit_exponent`].
pub const DEFAULT_MIN_DECADES: f64 = 1.5;

/// Discrete pairs above `ACCURACY_WINDOW / h²` are refused.
pub const ACCURACY_WINDOW: f64 = 0.05;

/// Minimum `r/h` for spectral derivatives; the plateau cutoff's transition
/// band must span enough cells for the transform to resolve it.
pub const MIN_CELLS_PER_RADIUS: f64 = 16.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub lambda_re: f64,
    /// `max_{Ω_{−r}} |D^γψ| / ‖ψ‖_{L²(Ω)}`.
    pub ratio: f64,
    pub r: f64,
    pub mask_id: String,
    pub gamma: Vec<u32>,
    pub sup: f64,
    pub l2: f64,
    /// `max_{x ∈ Ω_{−r}} ‖ψ‖_{L²(B(x, r))}`.
    pub c_a: f64,
    /// Where the sup is attained.
    pub argmax: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub n: usize,
    /// Smallest and largest `λ` used.
    pub window: [f64; 2],
}

/// Cells `(di, dj)` with `di² + dj² ≤ ρ²`, as `(dj, half width)` rows.
fn disk_rows(rho: f64) -> Vec<(isize, isize)> {
    let rho2 = rho * rho * (1.0 + 1e-12);
    let top = rho2.sqrt().floor() as isize;
    (-top..=top)
        .map(|dj| {
            let rem = rho2 - (dj * dj) as f64;
            let mut w = rem.max(0.0).sqrt().floor() as isize;
            while ((w + 1) * (w + 1)) as f64 <= rem {
                w += 1;
            }
            while w > 0 && (w * w) as f64 > rem {
                w -= 1;
            }
            (dj, w)
        })
        .collect()
}

/// `max_{x ∈ A} (h² Σ_{B(x,r)} |ψ|²)^{1/2}` using row prefix sums.
fn local_l2_sup(mask: &DomainMask, modsq: &[f64], interior: &DomainMask, r: f64) -> f64 {
    let nx = mask.nx;
    let mut prefix = vec![0.0f64; (nx + 1) * mask.ny];
    for j in 0..mask.ny {
        for i in 0..nx {
            prefix[j * (nx + 1) + i + 1] = prefix[j * (nx + 1) + i] + modsq[j * nx + i];
        }
    }
    let rows = disk_rows(r / mask.h);
    let mut best = 0.0f64;
    for j in 0..mask.ny {
        for i in 0..nx {
            if !interior.inside[j * nx + i] {
                continue;
            }
            let mut s = 0.0;
            for &(dj, w) in &rows {
                let jj = j as isize + dj;
                if jj < 0 || jj >= mask.ny as isize {
                    continue;
                }
                let lo = (i as isize - w).max(0) as usize;
                let hi = ((i as isize + w) as usize).min(nx - 1);
                let base = jj as usize * (nx + 1);
                s += prefix[base + hi + 1] - prefix[base + lo];
            }
            best = best.max(s);
        }
    }
    (best * mask.h * mask.h).sqrt()
}

/// Greedy cover of the interior by balls of radius `ρ` centered at interior
/// cells, in raster order.
fn greedy_cover(interior: &DomainMask, rho: f64) -> Vec<(usize, usize)> {
    let nx = interior.nx;
    let rows = disk_rows(rho / interior.h);
    let mut covered = vec![false; nx * interior.ny];
    let mut centers = Vec::new();
    for j in 0..interior.ny {
        for i in 0..nx {
            let k = j * nx + i;
            if !interior.inside[k] || covered[k] {
                continue;
            }
            centers.push((i, j));
            for &(dj, w) in &rows {
                let jj = j as isize + dj;
                if jj < 0 || jj >= interior.ny as isize {
                    continue;
                }
                let lo = (i as isize - w).max(0) as usize;
                let hi = ((i as isize + w) as usize).min(nx - 1);
                for c in &mut covered[jj as usize * nx + lo..=jj as usize * nx + hi] {
                    *c = true;
                }
            }
        }
    }
    centers
}

/// `max |D^γψ|` over the interior: each cover ball of radius `r/2` is the
/// plateau of a cutoff of radius `r`, where the periodized field equals `ψ`
/// and its spectral derivative equals `D^γψ`.
fn spectral_sup(
    pair: &EigenPair,
    mask: &DomainMask,
    interior: &DomainMask,
    r: f64,
    gamma: &MultiIndex,
) -> Result<(f64, [f64; 2])> {
    let centers = greedy_cover(interior, 0.5 * r);
    let nx = mask.nx;
    let reach = disk_rows(0.5 * r / mask.h);
    let best = centers
        .par_iter()
        .map(|&(ci, cj)| -> Result<(f64, usize)> {
            let cut = Cutoff::new(mask.point(ci, cj), r, Profile::Plateau)?;
            let field = periodize(pair, mask, &cut)?;
            let deriv = field.spectral_derivative(gamma)?;
            let [oi, oj] = field.raster_offset.expect("periodized fields carry an offset");
            let unit = field.scale.powi(gamma.order() as i32);
            let mut best = (0.0f64, usize::MAX);
            for &(dj, w) in &reach {
                let j = cj as isize + dj;
                for i in ci as isize - w..=ci as isize + w {
                    if !interior.is_inside(i, j) {
                        continue;
                    }
                    let a = (i - oi) as usize;
                    let b = (j - oj) as usize;
                    let v = deriv[b * field.nt + a].norm() * unit;
                    let k = j as usize * nx + i as usize;
                    if v > best.0 || (v == best.0 && k < best.1) {
                        best = (v, k);
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((0.0f64, usize::MAX), |acc, b| {
            if b.0 > acc.0 || (b.0 == acc.0 && b.1 < acc.1) {
                b
            } else {
                acc
            }
        });
    let k = if best.1 == usize::MAX { 0 } else { best.1 };
    Ok((best.0, mask.point(k % nx, k / nx)))
}

/// Interior sup of `|D^γψ|` over `Ω_{−r}` relative to `‖ψ‖_{L²(Ω)}`.
pub fn interior_ratio(pair: &EigenPair, mask: &DomainMask, r: f64, gamma: &MultiIndex) -> Result<RatioPoint> {
    if pair.nx != mask.nx || pair.ny != mask.ny {
        return Err(Error::Argument("eigenpair raster does not match the mask".into()));
    }
    if gamma.dim() != 2 {
        return Err(Error::Argument(format!("derivative index must have 2 entries, got {}", gamma.dim())));
    }
    let interior = mask.erode(r).map_err(|e| match e {
        Error::EmptyInterior(m) => Error::Geometry(m),
        other => other,
    })?;
    let modulus = pair.modulus();
    let modsq: Vec<f64> = modulus.iter().map(|v| v * v).collect();
    let l2 = (modsq.iter().sum::<f64>() * mask.h * mask.h).sqrt();
    if !(l2 > 0.0) {
        return Err(Error::Degenerate("eigenfunction vanishes on the mask".into()));
    }
    let (sup, argmax) = if gamma.order() == 0 {
        let mut best = (0.0f64, 0usize);
        for (k, &v) in modulus.iter().enumerate() {
            if interior.inside[k] && v > best.0 {
                best = (v, k);
            }
        }
        (best.0, mask.point(best.1 % mask.nx, best.1 / mask.nx))
    } else {
        if r / mask.h < MIN_CELLS_PER_RADIUS {
            return Err(Error::Resolution(format!(
                "r/h = {:.1} is below {MIN_CELLS_PER_RADIUS} cells; refine the grid for derivatives",
                r / mask.h
            )));
        }
        spectral_sup(pair, mask, &interior, r, gamma)?
    };
    Ok(RatioPoint {
        lambda_re: pair.lambda.re,
        ratio: sup / l2,
        r,
        mask_id: String::new(),
        gamma: gamma.entries().to_vec(),
        sup,
        l2,
        c_a: local_l2_sup(mask, &modsq, &interior, r),
        argmax,
    })
}

/// Ratio points for a batch of pairs on one mask, refusing discrete pairs
/// outside the accuracy window.
pub fn ratio_series(
    pairs: &[EigenPair],
    mask: &DomainMask,
    r: f64,
    gamma: &MultiIndex,
    mask_id: &str,
) -> Result<Vec<RatioPoint>> {
    let ceiling = ACCURACY_WINDOW / (mask.h * mask.h);
    for p in pairs {
        if p.source == PairSource::DiscreteSolver && p.lambda.re > ceiling {
            return Err(Error::Resolution(format!(
                "eigenvalue {} exceeds the accuracy window {ACCURACY_WINDOW}/h^2 = {ceiling:.3}; refine the grid",
                p.lambda.re
            )));
        }
    }
    pairs
        .par_iter()
        .map(|p| {
            let mut pt = interior_ratio(p, mask, r, gamma)?;
            pt.mask_id = mask_id.to_string();
            Ok(pt)
        })
        .collect()
}

/// Ordinary least squares of `log y` on `log x`.
pub fn fit_loglog(xs: &[f64], ys: &[f64], min_decades: f64) -> Result<ExponentFit> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::Argument("x and y lengths differ".into()));
    }
    if n < 4 {
        return Err(Error::Argument(format!("a fit needs at least 4 points, got {n}")));
    }
    if xs.iter().chain(ys).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Argument("fit values must be finite and positive".into()));
    }
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(0.0, f64::max);
    let span = (hi / lo).log10();
    if span < min_decades {
        return Err(Error::Argument(format!(
            "points span {span:.3} decades in lambda; at least {min_decades} required"
        )));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n as f64;
    let my = ly.iter().sum::<f64>() / n as f64;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (ssr / (n - 2) as f64 / sxx).sqrt();
    Ok(ExponentFit { slope, intercept, stderr, n, window: [lo, hi] })
}

/// Slope of `log ratio` against `log λ`.
pub fn fit_exponent(points: &[RatioPoint], min_decades: f64) -> Result<ExponentFit> {
    let xs: Vec<f64> = points.iter().map(|p| p.lambda_re).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.ratio).collect();
    fit_loglog(&xs, &ys, min_decades)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdeltaPoint {
    pub lambda: f64,
    pub count: u64,
    pub cap: f64,
    pub saturated: bool,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdeltaScaling {
    pub fit: ExponentFit,
    pub points: Vec<FdeltaPoint>,
    /// `(d − 1 + δ)/m`.
    pub target: f64,
}

/// Growth exponent of `F_δ(λ)` in `Re λ`, from complete enumerations.
pub fn fdelta_scaling(sym: &Symbol, delta: f64, lambdas: &[f64], min_decades: f64) -> Result<FdeltaScaling> {
    let mu = proven_margin(sym).ok_or_else(|| {
        Error::Precondition("symbol is not certified elliptic; F_delta may be infinite".into())
    })?;
    let d = sym.dim() as f64;
    let mut points = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let lambda = Complex64::new(lam, 0.0);
        let r_star = crate::lattice::self_sufficiency_radius(sym, mu, lambda, delta);
        let cap = r_star + d.sqrt() + 1.0;
        let rep = count_diophantine(sym, lambda, delta, cap, false)?;
        if rep.saturated || !rep.complete {
            return Err(Error::Precondition(format!(
                "count at lambda = {lam} is not certified complete (saturated: {}, cap {cap:.3}, R* {:?})",
                rep.saturated, rep.r_star
            )));
        }
        points.push(FdeltaPoint { lambda: lam, count: rep.count, cap, saturated: rep.saturated, complete: rep.complete });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.lambda).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.count as f64).collect();
    if ys.contains(&0.0) {
        return Err(Error::Precondition("an annulus count is zero; the log fit is undefined".into()));
    }
    let fit = fit_loglog(&xs, &ys, min_decades)?;
    Ok(FdeltaScaling { fit, points, target: (d - 1.0 + delta) / sym.order() as f64 })
}
