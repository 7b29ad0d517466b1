//! Small checks with known answers, one or more per library module.

use num_complex::Complex64;
use serde::Serialize;

use dioph_core::bounds::{fit_loglog, interior_ratio};
use dioph_core::cutoff::{bump, derivative_sup_bound, Profile, TorusField};
use dioph_core::eigen::solver::square_discrete_spectrum;
use dioph_core::eigen::{rectangle_oracle, solve, DomainMask, ProblemSpec, SolveOptions, Window};
use dioph_core::lattice::count_ball;
use dioph_core::numtheory::{rdn_table, zeta_d_partial};
use dioph_core::symbol::{default_tolerance, ellipticity_certificate, proven_margin, MultiIndex, Symbol, Verdict};
use dioph_core::Result;

#[derive(Debug, Clone, Serialize)]
pub struct Case {
    pub name: &'static str,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub cases: Vec<Case>,
    pub passed: usize,
    pub failed: usize,
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn verdict(sym: &Symbol) -> Result<Verdict> {
    Ok(ellipticity_certificate(sym, 64, default_tolerance(sym))?.verdict)
}

fn checks() -> Vec<(&'static str, Box<dyn Fn() -> Result<bool>>)> {
    vec![
        ("symbol/laplacian-elliptic", Box::new(|| Ok(verdict(&Symbol::laplacian(2))? == Verdict::Elliptic))),
        (
            "symbol/wave-non-elliptic",
            Box::new(|| {
                let wave = Symbol::real(2, &[(&[2, 0], 1.0), (&[0, 2], -1.0)])?;
                Ok(verdict(&wave)? == Verdict::NonElliptic && proven_margin(&wave).is_none())
            }),
        ),
        (
            "symbol/quartic-margin",
            Box::new(|| {
                let q = Symbol::real(2, &[(&[4, 0], 1.0), (&[0, 4], 1.0)])?;
                let cert = ellipticity_certificate(&q, 64, default_tolerance(&q))?;
                Ok(close(cert.margin, 0.5, 1e-9))
            }),
        ),
        ("lattice/ball-2-2", Box::new(|| Ok(count_ball(2, 2.0)? == 13))),
        ("numtheory/r3-1", Box::new(|| Ok(rdn_table(3, 1)?.get(1) == Some(6)))),
        ("numtheory/zeta-divergent", Box::new(|| Ok(zeta_d_partial(2, 1.0, 10).is_err()))),
        (
            "eigen/oracle-norm",
            Box::new(|| {
                let (mask, pair) = rectangle_oracle(1, 2, 63)?;
                let h2 = mask.h * mask.h;
                let l2 = (pair.psi.iter().map(|v| v * v).sum::<f64>() * h2).sqrt();
                Ok(close(l2, std::f64::consts::FRAC_PI_2, 1e-9))
            }),
        ),
        (
            "eigen/square-spectrum",
            Box::new(|| {
                let n = 15;
                let spec = ProblemSpec::laplacian(DomainMask::square(n)?);
                let found = solve(&spec, 6, Window::Interval(0.0, 1e3), &SolveOptions::default())?;
                let exact = square_discrete_spectrum(n);
                Ok(found.len() == 6
                    && found.iter().zip(&exact).all(|(p, e)| close(p.lambda.re, *e, 1e-8)))
            }),
        ),
        (
            "cutoff/bump-values",
            Box::new(|| {
                Ok(bump(Profile::Plain, 0.0) == 1.0
                    && bump(Profile::Plain, 1.0) == 0.0
                    && bump(Profile::Plateau, 0.4) == 1.0)
            }),
        ),
        (
            "cutoff/plane-wave-derivative",
            Box::new(|| {
                let coeff = [([3, -2], Complex64::new(0.25, 0.0))];
                let field = TorusField::from_spectrum(32, [0.0, 0.0], &coeff)?;
                let ok_parseval = field.parseval_defect < 1e-10;
                let b = derivative_sup_bound(&field, &MultiIndex::new(vec![1, 0])?)?;
                Ok(ok_parseval && close(b.bound, 0.25 * 13f64.sqrt(), 1e-12) && close(b.sampled_sup, 0.75, 1e-10))
            }),
        ),
        (
            "bounds/ground-state-ratio",
            Box::new(|| {
                let (mask, pair) = rectangle_oracle(1, 1, 63)?;
                let p = interior_ratio(&pair, &mask, 0.3, &MultiIndex::zero(2))?;
                Ok(close(p.ratio, 2.0 / std::f64::consts::PI, 1e-12))
            }),
        ),
        (
            "bounds/fit-slope",
            Box::new(|| {
                let xs = [1.0, 10.0, 100.0, 1000.0];
                let ys: Vec<f64> = xs.iter().map(|x: &f64| x.powf(0.25)).collect();
                let f = fit_loglog(&xs, &ys, 1.5)?;
                Ok(close(f.slope, 0.25, 1e-12) && f.intercept.abs() < 1e-12)
            }),
        ),
    ]
}

/// Runs every check; a check that errors counts as a failure.
pub fn run_all() -> Report {
    let cases: Vec<Case> = checks()
        .into_iter()
        .map(|(name, f)| match f() {
            Ok(pass) => Case { name, pass, detail: None },
            Err(e) => Case { name, pass: false, detail: Some(e.to_string()) },
        })
        .collect();
    let passed = cases.iter().filter(|c| c.pass).count();
    Report { failed: cases.len() - passed, passed, cases }
}
