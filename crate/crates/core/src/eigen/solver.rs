//! Shift-invert Lanczos with full reorthogonalization, locking, and
//! spectrum slicing verified by Sylvester inertia.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mask::DomainMask;
use super::operator::{assemble, Operator, ProblemSpec, Skyline};
use super::{EigenPair, PairSource, Scalar};
use crate::error::{Error, Result};

/// Seed of the start vectors; fixed so solves are reproducible.
pub const DEFAULT_SEED: u64 = 0x1a2c_3e5f;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Window {
    /// The lowest `k` eigenvalues in `[a, b]` (real potentials only).
    Interval(f64, f64),
    /// The `k` eigenvalues nearest the shift.
    Shift(Complex64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub seed: u64,
    /// Required `‖(A − λ)x‖ / ‖x‖ ≤ tol · max(|λ|, 1)`.
    pub tol: f64,
    /// Lanczos restarts allowed per slice before giving up.
    pub max_restarts: usize,
    /// Largest Krylov dimension of a single Lanczos run.
    pub max_krylov: usize,
    /// Target number of eigenvalues per spectrum slice.
    pub slice_size: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            seed: DEFAULT_SEED,
            tol: 1e-8,
            max_restarts: 30,
            max_krylov: 320,
            slice_size: 40,
        }
    }
}

struct Found<T: Scalar> {
    lambda: T,
    x: Vec<T>,
    residual: f64,
}

fn residual<T: Scalar>(op: &Operator<T>, lambda: T, x: &[T], work: &mut [T]) -> f64 {
    op.apply(x, work);
    for (w, &xi) in work.iter_mut().zip(x) {
        *w -= lambda * xi;
    }
    T::norm(work) / T::norm(x)
}

/// Projects `w` off the locked vectors (bilinear, `lᵀl = 1`).
fn deflate<T: Scalar>(w: &mut [T], locked: &[&[T]]) {
    for l in locked {
        let c = T::dot(l, w);
        for (wi, &li) in w.iter_mut().zip(l.iter()) {
            *wi -= c * li;
        }
    }
}

/// Lanczos on `(A − σ)^{-1}`, deflated against `locked`. Returns converged
/// Ritz pairs satisfying `want`, at most `need` of them, preferring the
/// largest `|θ|` (eigenvalues nearest `σ`).
#[allow(clippy::too_many_arguments)]
fn lanczos_run<T: Scalar>(
    op: &Operator<T>,
    fac: &Skyline<T>,
    locked: &[&[T]],
    start: Vec<T>,
    want: &dyn Fn(Complex64) -> bool,
    need: usize,
    opts: &SolveOptions,
    best_residual: &mut f64,
) -> Vec<Found<T>> {
    let n = op.dim();
    let m_max = opts.max_krylov.min(n.saturating_sub(locked.len())).max(1);
    let sigma = fac.sigma;
    let mut q: Vec<Vec<T>> = Vec::new();
    let mut alpha: Vec<T> = Vec::new();
    let mut beta: Vec<T> = Vec::new();
    let mut w = start;
    deflate(&mut w, locked);
    let b0 = T::dot(&w, &w).sqrt();
    w.iter_mut().for_each(|x| *x = *x / b0);
    q.push(w);
    let mut work = vec![T::zero(); n];
    let mut next_check = (2 * need + 30).min(m_max);
    let mut last_count = usize::MAX;
    let mut stagnant = 0;
    let mut result = Vec::new();
    loop {
        let j = q.len() - 1;
        let mut w = q[j].clone();
        fac.solve(&mut w);
        deflate(&mut w, locked);
        let a = T::dot(&q[j], &w);
        for (wi, &qi) in w.iter_mut().zip(&q[j]) {
            *wi -= a * qi;
        }
        if j > 0 {
            let b = beta[j - 1];
            for (wi, &qi) in w.iter_mut().zip(&q[j - 1]) {
                *wi -= b * qi;
            }
        }
        for _ in 0..2 {
            for qi in &q {
                let c = T::dot(qi, &w);
                for (wk, &qk) in w.iter_mut().zip(qi) {
                    *wk -= c * qk;
                }
            }
            deflate(&mut w, locked);
        }
        alpha.push(a);
        let b = T::dot(&w, &w).sqrt();
        let size = alpha.len();
        let exhausted = b.modulus() <= 1e-13 * a.modulus().max(1e-300) || size >= m_max;
        if size >= next_check || exhausted {
            let ritz = T::tridiagonal_eigen(&alpha, &beta);
            // Nearest-to-σ first.
            let mut order: Vec<usize> = (0..ritz.len()).filter(|&i| ritz[i].0.modulus() > 0.0).collect();
            order.sort_by(|&x, &y| {
                ritz[y].0.modulus().partial_cmp(&ritz[x].0.modulus()).unwrap_or(std::cmp::Ordering::Equal)
            });
            let mut converged = Vec::new();
            let mut pending = 0usize;
            for &i in &order {
                let (theta, s) = &ritz[i];
                let lambda = sigma + T::from_re(1.0) / *theta;
                if !want(lambda.to_c64()) {
                    continue;
                }
                if converged.len() + pending >= need {
                    break;
                }
                let est = (b * s[size - 1]).modulus() / theta.modulus();
                if est > 1e-6 && !exhausted {
                    pending += 1;
                    continue;
                }
                let mut x = vec![T::zero(); n];
                for (qk, &sk) in q.iter().zip(s) {
                    for (xi, &qi) in x.iter_mut().zip(qk) {
                        *xi += sk * qi;
                    }
                }
                let nx = T::dot(&x, &x).sqrt();
                x.iter_mut().for_each(|v| *v = *v / nx);
                // Rayleigh quotient under A.
                op.apply(&x, &mut work);
                let rq = T::dot(&x, &work) / T::dot(&x, &x);
                let res = residual(op, rq, &x, &mut work);
                *best_residual = best_residual.min(res / rq.modulus().max(1.0));
                if res <= opts.tol * rq.modulus().max(1.0) {
                    converged.push(Found { lambda: rq, x, residual: res });
                } else {
                    pending += 1;
                }
            }
            let count = converged.len();
            if count >= need || exhausted || (pending == 0 && count > 0 && stagnant >= 2) {
                result = converged;
                break;
            }
            if pending == 0 && count == last_count {
                stagnant += 1;
            } else {
                stagnant = 0;
            }
            last_count = count;
            result = converged;
            next_check = (size + 20).min(m_max);
            if pending == 0 && stagnant >= 2 {
                break;
            }
        }
        if exhausted {
            break;
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x = *x / b);
        q.push(w);
    }
    result
}

fn random_vector<T: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<T> {
    (0..n).map(|_| T::from_re(rng.gen::<f64>() - 0.5)).collect()
}

fn is_duplicate<T: Scalar>(found: &[Found<T>], cand: &Found<T>) -> bool {
    found.iter().any(|f| T::dot(&f.x, &cand.x).modulus() > 0.5)
}

/// Factors `A − σ`, nudging `σ` off an eigenvalue if a pivot vanishes.
fn factor_near<T: Scalar>(op: &Operator<T>, sigma: T) -> Result<Skyline<T>> {
    let scale = op.off.abs();
    let mut s = sigma;
    for attempt in 0..8 {
        match op.factor_shifted(s) {
            Ok(f) => return Ok(f),
            Err(Error::Degenerate(_)) => {
                s = sigma + T::from_re(scale * 1e-9 * (attempt + 1) as f64);
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::Convergence {
        iterations: 8,
        best_residual: f64::NAN,
        message: "could not factor A − σ away from an eigenvalue".into(),
    })
}

/// Collects exactly `count` eigenpairs with `Re λ ∈ [lo, hi)`.
#[allow(clippy::too_many_arguments)]
fn fill_slice<T: Scalar>(
    op: &Operator<T>,
    fac: &Skyline<T>,
    lo: f64,
    hi: f64,
    count: usize,
    opts: &SolveOptions,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Found<T>>> {
    let mut found: Vec<Found<T>> = Vec::new();
    let mut best = f64::INFINITY;
    let mut restarts = 0;
    while found.len() < count {
        if restarts >= opts.max_restarts {
            return Err(Error::Convergence {
                iterations: restarts,
                best_residual: best,
                message: format!(
                    "found {} of {} eigenvalues in [{lo}, {hi})",
                    found.len(),
                    count
                ),
            });
        }
        restarts += 1;
        let locked: Vec<&[T]> = found.iter().map(|f| f.x.as_slice()).collect();
        let start = random_vector(rng, op.dim());
        let want = |l: Complex64| l.re >= lo && l.re < hi;
        let got = lanczos_run(op, fac, &locked, start, &want, count - found.len(), opts, &mut best);
        for g in got {
            if !is_duplicate(&found, &g) {
                found.push(g);
            }
        }
    }
    if found.len() > count {
        return Err(Error::Logic(format!(
            "found {} eigenvalues in [{lo}, {hi}) but inertia counts {count}",
            found.len()
        )));
    }
    Ok(found)
}

fn solve_interval(op: &Operator<f64>, a: f64, b: f64, k: usize, opts: &SolveOptions) -> Result<Vec<Found<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let fa = factor_near(op, a)?;
    let fb = factor_near(op, b)?;
    let nu_a = fa.negative_pivots();
    let nu_b = fb.negative_pivots();
    drop(fa);
    let total = nu_b - nu_a;
    let target = total.min(k);
    let mut out: Vec<Found<f64>> = Vec::new();
    if target == 0 {
        return Ok(out);
    }
    let mut width = (b - a) * opts.slice_size as f64 / total as f64;
    let mut lo = a;
    let mut nu_lo = nu_a;
    while out.len() < target && lo < b {
        let hi = (lo + width).min(b);
        let nu_hi = if hi == b { nu_b } else { factor_near(op, hi)?.negative_pivots() };
        let count = nu_hi - nu_lo;
        if count > 2 * opts.slice_size && hi - lo > 1e-9 * b.abs().max(1.0) {
            width *= 0.5;
            continue;
        }
        if count > 0 {
            let fac = factor_near(op, 0.5 * (lo + hi))?;
            let found = fill_slice(op, &fac, lo, hi, count, opts, &mut rng)?;
            out.extend(found);
        }
        let ratio = opts.slice_size as f64 / count.max(1) as f64;
        width *= ratio.clamp(0.5, 2.0);
        lo = hi;
        nu_lo = nu_hi;
    }
    out.sort_by(|x, y| x.lambda.partial_cmp(&y.lambda).unwrap_or(std::cmp::Ordering::Equal));
    out.truncate(target);
    Ok(out)
}

fn solve_shift<T: Scalar>(op: &Operator<T>, sigma: T, k: usize, opts: &SolveOptions) -> Result<Vec<Found<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let fac = factor_near(op, sigma)?;
    let k = k.min(op.dim());
    let mut found: Vec<Found<T>> = Vec::new();
    let mut best = f64::INFINITY;
    let mut restarts = 0;
    while found.len() < k {
        if restarts >= opts.max_restarts {
            return Err(Error::Convergence {
                iterations: restarts,
                best_residual: best,
                message: format!("found {} of {k} eigenvalues near the shift", found.len()),
            });
        }
        restarts += 1;
        let locked: Vec<&[T]> = found.iter().map(|f| f.x.as_slice()).collect();
        let start = random_vector(&mut rng, op.dim());
        let got = lanczos_run(op, &fac, &locked, start, &|_| true, k - found.len(), opts, &mut best);
        for g in got {
            if !is_duplicate(&found, &g) && found.len() < k {
                found.push(g);
            }
        }
    }
    Ok(found)
}

fn into_pairs<T: Scalar>(op: &Operator<T>, found: Vec<Found<T>>) -> Vec<EigenPair> {
    let mut pairs: Vec<EigenPair> = found
        .into_iter()
        .map(|f| {
            let raster = op.to_raster(&f.x);
            let mut z: Vec<Complex64> = raster.iter().map(|v| v.to_c64()).collect();
            // Unit grid L² norm; largest entry made real and positive.
            let norm = (z.iter().map(|v| v.norm_sqr()).sum::<f64>() * op.h * op.h).sqrt();
            let peak = z
                .iter()
                .copied()
                .fold(Complex64::new(0.0, 0.0), |acc, v| if v.norm() > acc.norm() { v } else { acc });
            let phase = if peak.norm() > 0.0 { peak.conj() / peak.norm() } else { Complex64::new(1.0, 0.0) };
            z.iter_mut().for_each(|v| *v = *v * phase / norm);
            let lambda = f.lambda.to_c64();
            let psi = z.iter().map(|v| v.re).collect();
            let psi_im = (!T::IS_REAL).then(|| z.iter().map(|v| v.im).collect());
            EigenPair {
                lambda: if T::IS_REAL { Complex64::new(lambda.re, 0.0) } else { lambda },
                nx: op.nx,
                ny: op.ny,
                h: op.h,
                psi,
                psi_im,
                residual: f.residual,
                source: PairSource::DiscreteSolver,
                l2_norm: None,
                sup_norm: None,
            }
        })
        .collect();
    pairs.sort_by(|a, b| {
        (a.lambda.re, a.lambda.im)
            .partial_cmp(&(b.lambda.re, b.lambda.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    pairs
}

/// Computes `k` eigenpairs of the Dirichlet operator in the window.
///
/// Interval windows return the lowest `min(k, #λ ∈ [a, b])` eigenvalues of
/// the interval, with the count verified by inertia. Shift windows return
/// the `k` eigenvalues nearest the shift. Pairs are sorted by `Re λ`.
pub fn solve(spec: &ProblemSpec, k: usize, window: Window, opts: &SolveOptions) -> Result<Vec<EigenPair>> {
    if k == 0 {
        return Err(Error::Argument("k must be >= 1".into()));
    }
    if spec.is_real() {
        let op: Operator<f64> = assemble(spec);
        let (glo, ghi) = op.spectral_bounds();
        match window {
            Window::Interval(a, b) => {
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    return Err(Error::Argument(format!("window [{a}, {b}] is empty or not finite")));
                }
                if b < glo || a > ghi {
                    return Err(Error::Argument(format!(
                        "window [{a}, {b}] misses the spectral bounds [{glo}, {ghi}]"
                    )));
                }
                let found = solve_interval(&op, a, b, k, opts)?;
                Ok(into_pairs(&op, found))
            }
            Window::Shift(s) => {
                let found = solve_shift(&op, s.re, k, opts)?;
                Ok(into_pairs(&op, found))
            }
        }
    } else {
        let op: Operator<Complex64> = assemble(spec);
        match window {
            Window::Interval(..) => Err(Error::Argument(
                "interval windows need a real potential (inertia is undefined otherwise); use a shift".into(),
            )),
            Window::Shift(s) => {
                let found = solve_shift(&op, s, k, opts)?;
                Ok(into_pairs(&op, found))
            }
        }
    }
}

/// `ψ = sin(m x) sin(n y)` sampled on the `grid × grid` interior nodes of
/// `(0, π)²`, with `λ = m² + n²`, continuum `‖ψ‖_{L²} = π/2` and
/// `‖ψ‖_∞ = 1`. The residual is measured under the discrete operator.
pub fn rectangle_oracle(m: u32, n: u32, grid: usize) -> Result<(DomainMask, EigenPair)> {
    if m == 0 || n == 0 {
        return Err(Error::Argument("mode numbers must be >= 1".into()));
    }
    let mask = DomainMask::square(grid)?;
    let h = mask.h;
    let mut psi = vec![0.0; grid * grid];
    for j in 0..grid {
        for i in 0..grid {
            let [x, y] = mask.point(i, j);
            psi[j * grid + i] = (m as f64 * x).sin() * (n as f64 * y).sin();
        }
    }
    let lambda = (m * m + n * n) as f64;
    let op: Operator<f64> = assemble(&ProblemSpec::laplacian(mask.clone()));
    let x = op.from_raster(&psi);
    let mut work = vec![0.0; x.len()];
    let res = residual(&op, lambda, &x, &mut work);
    Ok((
        mask,
        EigenPair {
            lambda: Complex64::new(lambda, 0.0),
            nx: grid,
            ny: grid,
            h,
            psi,
            psi_im: None,
            residual: res,
            source: PairSource::ClosedForm,
            l2_norm: Some(std::f64::consts::FRAC_PI_2),
            sup_norm: Some(1.0),
        },
    ))
}

/// Discrete spectrum of the five-point Laplacian on the `n × n` square,
/// `(4/h²)(sin²(ph/2) + sin²(qh/2))`, sorted.
pub fn square_discrete_spectrum(n: usize) -> Vec<f64> {
    let h = std::f64::consts::PI / (n as f64 + 1.0);
    let s = |k: usize| (k as f64 * h / 2.0).sin().powi(2);
    let mut out: Vec<f64> = (1..=n)
        .flat_map(|p| (1..=n).map(move |q| 4.0 / (h * h) * (s(p) + s(q))))
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}
