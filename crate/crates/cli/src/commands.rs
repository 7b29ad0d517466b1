use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};

use dioph_core::bounds::{fdelta_scaling, fit_loglog, ratio_series};
use dioph_core::cutoff::{coefficient_bound_report, derivative_sup_bound, periodize, Cutoff, Profile};
use dioph_core::eigen::io::{read_pairs, read_pgm, sidecar, write_pairs, write_pgm, MaskSidecar};
use dioph_core::eigen::{rectangle_oracle, solve, DomainMask, EigenPair, ProblemSpec, SolveOptions, Window};
use dioph_core::lattice::{annulus_prediction, count_ball, count_diophantine};
use dioph_core::numtheory::{hardy_rdn_with, rdn_table, zeta_d_partial, GaussSumTable};
use dioph_core::symbol::{
    default_tolerance, ellipticity_certificate, proven_margin, witness_sequence, MultiIndex, Symbol,
};
use dioph_core::{Error, Result};

use crate::args::*;
use crate::selftest;

pub struct Outcome {
    pub bytes: Vec<u8>,
    pub code: i32,
    /// `--out` was consumed by the command itself; print `bytes` to stdout.
    pub stdout: bool,
}

impl Outcome {
    fn ok(bytes: Vec<u8>) -> Self {
        Outcome { bytes, code: crate::EXIT_OK, stdout: false }
    }
}

pub fn dispatch(cli: &Cli) -> Result<Outcome> {
    if cli.selftest {
        return Ok(run_selftest());
    }
    let Some(command) = &cli.command else {
        return Err(Error::Argument("no subcommand given (try --help)".into()));
    };
    let config = serde_json::to_value(command).map_err(|e| Error::Logic(e.to_string()))?;
    match command {
        Command::Selftest => Ok(run_selftest()),
        Command::Symbol(c) => symbol_cmd(c, config),
        Command::Lattice(c) => lattice_cmd(c, config),
        Command::Nt(c) => nt_cmd(c, config),
        Command::Eigen(c) => eigen_cmd(c, config, cli.out.as_deref()),
        Command::Cutoff(c) => cutoff_cmd(c, config),
        Command::Bounds(c) => bounds_cmd(c, config),
    }
}

fn run_selftest() -> Outcome {
    let report = selftest::run_all();
    let code = if report.failed == 0 { crate::EXIT_OK } else { crate::EXIT_SELFTEST_FAILED };
    let mut bytes = serde_json::to_vec_pretty(&report).expect("self-test report serializes");
    bytes.push(b'\n');
    Outcome { bytes, code, stdout: false }
}

/// `{"config": ..., <fields of body>}`.
fn json_report(config: Value, body: impl Serialize) -> Result<Outcome> {
    let mut map = Map::new();
    map.insert("config".into(), config);
    match serde_json::to_value(body).map_err(|e| Error::Logic(e.to_string()))? {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("result".into(), other);
        }
    }
    let mut bytes = serde_json::to_vec_pretty(&Value::Object(map)).map_err(|e| Error::Logic(e.to_string()))?;
    bytes.push(b'\n');
    Ok(Outcome::ok(bytes))
}

fn numbers(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Argument(format!("{what}: cannot parse `{t}`: {e}")))
        })
        .collect()
}

fn pair(s: &str, what: &str) -> Result<[f64; 2]> {
    match numbers(s, what)?.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err(Error::Argument(format!("{what}: expected two comma-separated numbers, got `{s}`"))),
    }
}

fn complex(s: &str, what: &str) -> Result<Complex64> {
    match numbers(s, what)?.as_slice() {
        [a] => Ok(Complex64::new(*a, 0.0)),
        [a, b] => Ok(Complex64::new(*a, *b)),
        _ => Err(Error::Argument(format!("{what}: expected `re` or `re,im`, got `{s}`"))),
    }
}

fn gamma(s: &str) -> Result<MultiIndex> {
    let entries = s
        .split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|e| Error::Argument(format!("gamma: `{t}`: {e}"))))
        .collect::<Result<Vec<u32>>>()?;
    MultiIndex::new(entries)
}

fn profile(s: &str) -> Result<Profile> {
    s.parse()
}

fn load_symbol(arg: &SymbolArg) -> Result<Symbol> {
    match arg.symbol.as_str() {
        "laplacian" => Ok(Symbol::laplacian(arg.dim)),
        "wave" => {
            if arg.dim != 2 {
                return Err(Error::Argument("the named wave symbol is two-dimensional".into()));
            }
            Symbol::real(2, &[(&[2, 0], 1.0), (&[0, 2], -1.0)])
        }
        text => {
            let path = Path::new(text);
            if path.is_file() {
                Symbol::parse(&std::fs::read_to_string(path)?)
            } else {
                Symbol::parse(&text.replace(';', "\n"))
            }
        }
    }
}

fn sidecar_path(mask: &Path) -> PathBuf {
    let mut s = mask.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn load_mask(path: &Path) -> Result<DomainMask> {
    let side_text = std::fs::read_to_string(sidecar_path(path))?;
    let side: MaskSidecar =
        serde_json::from_str(&side_text).map_err(|e| Error::Parse(format!("mask sidecar: {e}")))?;
    read_pgm(&std::fs::read_to_string(path)?, &side)
}

fn load_fields(source: &FieldSource) -> Result<Vec<(DomainMask, EigenPair)>> {
    if let Some(spec) = &source.oracle {
        let v = numbers(spec, "oracle")?;
        let ok = v.len() == 3 && v.iter().all(|x| x.fract() == 0.0 && *x >= 1.0);
        if !ok {
            return Err(Error::Argument(format!("oracle: expected `m,n,N` positive integers, got `{spec}`")));
        }
        let (mask, pair) = rectangle_oracle(v[0] as u32, v[1] as u32, v[2] as usize)?;
        return Ok(vec![(mask, pair)]);
    }
    let Some(path) = &source.pairs else {
        return Err(Error::Argument("give --pairs or --oracle".into()));
    };
    let pairs = read_pairs(&mut std::fs::File::open(path)?)?;
    let first = pairs.first().ok_or_else(|| Error::Argument("pairs file holds no eigenpairs".into()))?;
    let mask = match &source.mask {
        Some(m) => load_mask(m)?,
        None => DomainMask::rectangle(first.nx, first.ny, first.h)?,
    };
    Ok(pairs.into_iter().map(|p| (mask.clone(), p)).collect())
}

fn symbol_cmd(c: &SymbolCmd, config: Value) -> Result<Outcome> {
    match c {
        SymbolCmd::Check { symbol, density, tol } => {
            let sym = load_symbol(symbol)?;
            let tol = tol.unwrap_or_else(|| default_tolerance(&sym));
            let cert = ellipticity_certificate(&sym, *density, tol)?;
            #[derive(Serialize)]
            struct Body {
                certificate: dioph_core::symbol::EllipticityCertificate,
                proven_margin: Option<f64>,
            }
            json_report(config, Body { certificate: cert, proven_margin: proven_margin(&sym) })
        }
        SymbolCmd::Witness { symbol, density, count } => {
            let sym = load_symbol(symbol)?;
            let cert = ellipticity_certificate(&sym, *density, default_tolerance(&sym))?;
            json_report(config, witness_sequence(&sym, &cert, *count)?)
        }
    }
}

fn lattice_cmd(c: &LatticeCmd, config: Value) -> Result<Outcome> {
    match c {
        LatticeCmd::CountBall { dim, radius } => {
            json_report(config, serde_json::json!({ "count": count_ball(*dim, *radius)?, "saturated": false }))
        }
        LatticeCmd::Fdelta { symbol, lambda, delta, cap, solutions } => {
            let sym = load_symbol(symbol)?;
            let lambda = complex(lambda, "lambda")?;
            let cap = match cap {
                Some(c) => *c,
                None => {
                    let mu = proven_margin(&sym).ok_or_else(|| {
                        Error::Argument("symbol is not certified elliptic; pass --cap".into())
                    })?;
                    dioph_core::lattice::self_sufficiency_radius(&sym, mu, lambda, *delta)
                        + (sym.dim() as f64).sqrt()
                        + 1.0
                }
            };
            let report = count_diophantine(&sym, lambda, *delta, cap, solutions.is_some())?;
            if let (Some(path), Some(sols)) = (solutions, &report.solutions) {
                let mut csv = String::new();
                let header: Vec<String> = (1..=sym.dim()).map(|k| format!("xi{k}")).collect();
                let _ = writeln!(csv, "{}", header.join(","));
                for s in sols {
                    let row: Vec<String> = s.iter().map(|v| v.to_string()).collect();
                    let _ = writeln!(csv, "{}", row.join(","));
                }
                std::fs::write(path, csv)?;
            }
            let mut report = report;
            report.solutions = None;
            json_report(config, report)
        }
        LatticeCmd::Predict { dim, order, lambda, delta } => {
            json_report(config, annulus_prediction(*dim, *order, *lambda, *delta)?)
        }
    }
}

fn to_u64(v: u128) -> Result<u64> {
    u64::try_from(v).map_err(|_| Error::Overflow(format!("count {v} does not fit in 64 bits")))
}

fn nt_cmd(c: &NtCmd, config: Value) -> Result<Outcome> {
    match c {
        NtCmd::Rdn { dim, n, upto } => {
            if let Some(top) = upto {
                let table = rdn_table(*dim, *top)?;
                let mut csv = String::from("n,count\n");
                for k in 0..=*top {
                    let _ = writeln!(csv, "{k},{}", table.get(k).unwrap_or(0));
                }
                return Ok(Outcome::ok(csv.into_bytes()));
            }
            let n = n.expect("clap requires n without upto");
            let table = rdn_table(*dim, n)?;
            let count = to_u64(table.get(n).unwrap_or(0))?;
            json_report(config, serde_json::json!({ "count": count }))
        }
        NtCmd::Zeta { dim, s, terms } => json_report(config, zeta_d_partial(*dim, *s, *terms)?),
        NtCmd::Hardy { dim, n, upto, k_max } => {
            let top = upto.or(*n).expect("clap requires n or upto");
            let exact = rdn_table(*dim, top)?;
            let gauss = GaussSumTable::new(*k_max);
            let row = |k: u64| -> Result<(u128, f64, f64)> {
                let e = exact.get(k).unwrap_or(0);
                let h = hardy_rdn_with(&gauss, *dim, k, *k_max)?;
                let rel = if e > 0 { (h - e as f64).abs() / e as f64 } else { h.abs() };
                Ok((e, h, rel))
            };
            if let Some(top) = upto {
                let rows = (1..=*top).into_par_iter().map(row).collect::<Result<Vec<_>>>()?;
                let mut csv = String::from("n,exact,hardy,rel_err\n");
                for (k, (e, h, rel)) in rows.into_iter().enumerate() {
                    let _ = writeln!(csv, "{},{e},{h},{rel}", k + 1);
                }
                return Ok(Outcome::ok(csv.into_bytes()));
            }
            let n = n.expect("clap requires n without upto");
            let (e, h, rel) = row(n)?;
            json_report(config, serde_json::json!({ "n": n, "exact": to_u64(e)?, "hardy": h, "rel_err": rel }))
        }
    }
}

fn make_mask(shape: &str, grid: usize, level: u32, p: f64, seed: u64) -> Result<DomainMask> {
    match shape {
        "square" => DomainMask::square(grid),
        "lshape" | "l-shape" => DomainMask::l_shape(grid),
        "disk" => DomainMask::disk(grid),
        "koch" => DomainMask::koch(grid, level),
        "percolation" => DomainMask::percolation(grid, level, p, seed),
        _ => Err(Error::Argument(format!(
            "unknown shape `{shape}` (square, lshape, disk, koch, percolation)"
        ))),
    }
}

fn eigen_cmd(c: &EigenCmd, config: Value, out: Option<&Path>) -> Result<Outcome> {
    match c {
        EigenCmd::MakeMask { shape, grid, level, p, seed, mask } => {
            let m = make_mask(shape, *grid, *level, *p, *seed)?;
            let mut pgm = Vec::new();
            write_pgm(&m, &mut pgm)?;
            std::fs::write(mask, pgm)?;
            let side = serde_json::to_string_pretty(&sidecar(&m)).map_err(|e| Error::Logic(e.to_string()))?;
            std::fs::write(sidecar_path(mask), side + "\n")?;
            json_report(
                config,
                serde_json::json!({
                    "nx": m.nx, "ny": m.ny, "h": m.h, "origin": m.origin,
                    "interior": m.interior_count(), "extent": m.extent(),
                }),
            )
        }
        EigenCmd::Solve { mask, k, window, shift, potential, seed, tol, pairs } => {
            let m = load_mask(mask)?;
            let spec = match potential {
                Some(v) => ProblemSpec::constant_potential(m.clone(), complex(v, "potential")?),
                None => ProblemSpec::laplacian(m.clone()),
            };
            let win = match (window, shift) {
                (Some(w), None) => {
                    let [a, b] = pair(w, "window")?;
                    Window::Interval(a, b)
                }
                (None, Some(s)) => Window::Shift(complex(s, "shift")?),
                _ => return Err(Error::Argument("give exactly one of --window or --shift".into())),
            };
            let opts = SolveOptions { seed: *seed, tol: *tol, ..SolveOptions::default() };
            let found = solve(&spec, *k, win, &opts)?;
            let mut buf = Vec::new();
            write_pairs(&found, m.nx, m.ny, m.h, &mut buf)?;
            let (dest, stdout) = match (pairs, out) {
                (Some(p), _) => (p.as_path(), false),
                (None, Some(o)) => (o, true),
                (None, None) => return Err(Error::Argument("give --pairs or --out for the eigenpair dump".into())),
            };
            std::fs::write(dest, buf)?;
            let list: Vec<Value> = found
                .iter()
                .map(|p| serde_json::json!({ "re": p.lambda.re, "im": p.lambda.im, "residual": p.residual }))
                .collect();
            let mut outcome =
                json_report(config, serde_json::json!({ "count": found.len(), "eigenvalues": list }))?;
            outcome.stdout = stdout;
            Ok(outcome)
        }
    }
}

fn cutoff_cmd(c: &CutoffCmd, config: Value) -> Result<Outcome> {
    match c {
        CutoffCmd::Verify { source, x0, r, delta, alpha, profile: prof, symbol } => {
            let sym = load_symbol(symbol)?;
            let alpha = match alpha.as_str() {
                "auto" => None,
                a => Some(a.parse::<u32>().map_err(|e| Error::Argument(format!("alpha `{a}`: {e}")))?),
            };
            let cut = Cutoff::new(pair(x0, "x0")?, *r, profile(prof)?)?;
            let fields = load_fields(source)?;
            let reports = fields
                .par_iter()
                .map(|(mask, p)| {
                    let field = periodize(p, mask, &cut)?;
                    coefficient_bound_report(&field, &sym, p.lambda, alpha, *delta)
                })
                .collect::<Result<Vec<_>>>()?;
            json_report(config, serde_json::json!({ "reports": reports }))
        }
        CutoffCmd::Deriv { source, x0, r, gamma: g, profile: prof } => {
            let g = gamma(g)?;
            let cut = Cutoff::new(pair(x0, "x0")?, *r, profile(prof)?)?;
            let fields = load_fields(source)?;
            let reports = fields
                .par_iter()
                .map(|(mask, p)| -> Result<Value> {
                    let field = periodize(p, mask, &cut)?;
                    let b = derivative_sup_bound(&field, &g)?;
                    Ok(serde_json::json!({
                        "lambda": p.lambda.re,
                        "local_l2": field.local_l2,
                        "bound": b.bound,
                        "sampled_sup": b.sampled_sup,
                        "inner_sup": b.inner_sup,
                    }))
                })
                .collect::<Result<Vec<_>>>()?;
            json_report(config, serde_json::json!({ "reports": reports }))
        }
    }
}

fn read_ratio_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Parse("ratios CSV is empty".into()))?
        .split(',')
        .map(str::trim)
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Error::Parse(format!("ratios CSV lacks a `{name}` column")))
    };
    let (li, ri) = (col("lambda")?, col("ratio")?);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (k, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |i: usize| -> Result<f64> {
            cells
                .get(i)
                .ok_or_else(|| Error::Parse(format!("ratios CSV row {} is short", k + 2)))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("ratios CSV row {}: {e}", k + 2)))
        };
        xs.push(get(li)?);
        ys.push(get(ri)?);
    }
    Ok((xs, ys))
}

fn lambda_grid(lambdas: &Option<String>, grid: &Option<String>) -> Result<Vec<f64>> {
    match (lambdas, grid) {
        (Some(l), None) => numbers(l, "lambdas"),
        (None, Some(g)) => match numbers(g, "grid")?.as_slice() {
            [a, b, n] if *a > 0.0 && *b > *a && n.fract() == 0.0 && *n >= 2.0 => {
                let steps = *n as usize;
                Ok((0..steps)
                    .map(|k| a * (b / a).powf(k as f64 / (steps - 1) as f64))
                    .collect())
            }
            _ => Err(Error::Argument(format!("grid: expected `from,to,steps` with 0 < from < to, got `{g}`"))),
        },
        _ => Err(Error::Argument("give --lambdas or --grid".into())),
    }
}

fn bounds_cmd(c: &BoundsCmd, config: Value) -> Result<Outcome> {
    match c {
        BoundsCmd::Ratios { source, r, gamma: g, id } => {
            let g = gamma(g)?;
            let fields = load_fields(source)?;
            let mask = fields[0].0.clone();
            let pairs: Vec<EigenPair> = fields.into_iter().map(|(_, p)| p).collect();
            let points = ratio_series(&pairs, &mask, *r, &g, id)?;
            let mut csv = String::from("lambda,ratio,r,c_a\n");
            for p in &points {
                let _ = writeln!(csv, "{},{},{},{}", p.lambda_re, p.ratio, p.r, p.c_a);
            }
            Ok(Outcome::ok(csv.into_bytes()))
        }
        BoundsCmd::Fit { csv, min_decades } => {
            let (xs, ys) = read_ratio_csv(csv)?;
            json_report(config, fit_loglog(&xs, &ys, *min_decades)?)
        }
        BoundsCmd::FdeltaScaling { symbol, delta, lambdas, grid, min_decades } => {
            let sym = load_symbol(symbol)?;
            let lams = lambda_grid(lambdas, grid)?;
            json_report(config, fdelta_scaling(&sym, *delta, &lams, *min_decades)?)
        }
    }
}
