use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "dioph", version, about = "Lattice counts, symbols, sums of squares and eigenfunction bounds")]
pub struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, default_value_t = 1)]
    #[serde(skip)]
    pub workers: usize,

    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,

    /// Write `{"elapsed_ms": ...}` to this file.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub timing: Option<PathBuf>,

    /// Run the built-in self checks and exit.
    #[arg(long)]
    #[serde(skip)]
    pub selftest: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    #[command(subcommand)]
    Symbol(SymbolCmd),
    #[command(subcommand)]
    Lattice(LatticeCmd),
    #[command(subcommand)]
    Nt(NtCmd),
    #[command(subcommand)]
    Eigen(EigenCmd),
    #[command(subcommand)]
    Cutoff(CutoffCmd),
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Run the built-in self checks.
    Selftest,
}

#[derive(Debug, Args, Serialize)]
pub struct SymbolArg {
    /// `laplacian`, `wave`, a file path, or inline text with `;` between
    /// lines (`alpha_1 .. alpha_d re im`).
    #[arg(long, default_value = "laplacian")]
    pub symbol: String,
    /// Dimension for the named symbols.
    #[arg(short = 'd', long = "dim", default_value_t = 2)]
    pub dim: usize,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolCmd {
    /// Certify ellipticity of the principal symbol.
    Check {
        #[command(flatten)]
        symbol: SymbolArg,
        #[arg(long, default_value_t = 64)]
        density: usize,
        /// Verdict tolerance (default scales with the coefficients).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Integer points along a characteristic direction.
    Witness {
        #[command(flatten)]
        symbol: SymbolArg,
        #[arg(long, default_value_t = 64)]
        density: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeCmd {
    /// `#{ξ ∈ ℤ^d : |ξ| ≤ R}`.
    CountBall {
        #[arg(short = 'd', long = "dim")]
        dim: usize,
        #[arg(short = 'R', long = "radius")]
        radius: f64,
    },
    /// `#{ξ : |P(ξ) − λ| ≤ |ξ|^{m−1+δ}}`.
    Fdelta {
        #[command(flatten)]
        symbol: SymbolArg,
        /// `re` or `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long)]
        delta: f64,
        /// Enumeration radius (default: past the self-sufficiency radius).
        #[arg(long)]
        cap: Option<f64>,
        /// Also write the solutions as CSV to this file.
        #[arg(long)]
        #[serde(skip)]
        solutions: Option<PathBuf>,
    },
    /// Annulus count predicted from the ball volume.
    Predict {
        #[arg(short = 'd', long = "dim")]
        dim: usize,
        #[arg(short = 'm', long = "order", default_value_t = 2)]
        order: u32,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        delta: f64,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NtCmd {
    /// `r_d(n)`; with `--upto`, CSV of `n, count`.
    Rdn {
        #[arg(short = 'd', long = "dim")]
        dim: usize,
        #[arg(short = 'n', long = "n", required_unless_present = "upto")]
        n: Option<u64>,
        #[arg(long)]
        upto: Option<u64>,
    },
    /// Partial sum of `ζ_d(s)` with a tail bound.
    Zeta {
        #[arg(short = 'd', long = "dim")]
        dim: usize,
        #[arg(short = 's', long)]
        s: f64,
        #[arg(short = 'N', long = "terms")]
        terms: u64,
    },
    /// Singular-series formula for `r_d(n)`; with `--upto`, CSV of
    /// `n, exact, hardy, rel_err`.
    Hardy {
        #[arg(short = 'd', long = "dim")]
        dim: usize,
        #[arg(short = 'n', long = "n", required_unless_present = "upto")]
        n: Option<u64>,
        #[arg(long)]
        upto: Option<u64>,
        #[arg(short = 'K', long = "k-max", default_value_t = 512)]
        k_max: usize,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenCmd {
    /// Write a mask as PGM plus a `<file>.json` sidecar.
    MakeMask {
        /// square, lshape, disk, koch, percolation
        #[arg(long)]
        shape: String,
        #[arg(short = 'N', long = "grid", default_value_t = 256)]
        grid: usize,
        /// Koch level or percolation depth.
        #[arg(long, default_value_t = 3)]
        level: u32,
        /// Percolation keep probability.
        #[arg(long, default_value_t = 0.8)]
        p: f64,
        #[arg(long, default_value_t = dioph_core::eigen::mask::DEFAULT_PERCOLATION_SEED)]
        seed: u64,
        #[arg(long)]
        #[serde(skip)]
        mask: PathBuf,
    },
    /// Eigenpairs of `−Δ + V` with Dirichlet data.
    Solve {
        #[arg(long)]
        mask: PathBuf,
        #[arg(short = 'k', long = "k")]
        k: usize,
        /// `a,b`: lowest eigenvalues in the interval (real potentials).
        #[arg(long, allow_hyphen_values = true, conflicts_with = "shift")]
        window: Option<String>,
        /// `re,im`: eigenvalues nearest the shift.
        #[arg(long, allow_hyphen_values = true)]
        shift: Option<String>,
        /// Constant potential `re[,im]`.
        #[arg(long, allow_hyphen_values = true)]
        potential: Option<String>,
        #[arg(long, default_value_t = dioph_core::eigen::solver::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Binary eigenpair dump (default: the global `--out`, in which
        /// case the summary goes to stdout).
        #[arg(long)]
        #[serde(skip)]
        pairs: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct FieldSource {
    /// Eigenpair dump from `eigen solve`.
    #[arg(long, conflicts_with = "oracle")]
    pub pairs: Option<PathBuf>,
    /// Mask for the dump (default: the whole raster with origin `(h, h)`).
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Closed-form pair `m,n,N`: `sin(m x) sin(n y)` on an `N × N` grid.
    #[arg(long)]
    pub oracle: Option<String>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffCmd {
    /// Annulus split and coefficient constant for each pair.
    Verify {
        #[command(flatten)]
        source: FieldSource,
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long, default_value_t = 0.4)]
        r: f64,
        #[arg(long, default_value_t = 0.4)]
        delta: f64,
        /// Integer or `auto` (smallest integer above `2/δ`).
        #[arg(long, default_value = "auto")]
        alpha: String,
        #[arg(long, default_value = "plain")]
        profile: String,
        #[command(flatten)]
        symbol: SymbolArg,
    },
    /// `Σ|ξ|^{|γ|}|Ψ̂(ξ)|` and the sampled sup of `D^γΨ` for each pair.
    Deriv {
        #[command(flatten)]
        source: FieldSource,
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long, default_value_t = 0.4)]
        r: f64,
        #[arg(long, default_value = "1,0")]
        gamma: String,
        #[arg(long, default_value = "plateau")]
        profile: String,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsCmd {
    /// CSV of `lambda, ratio, r, c_a` for each pair.
    Ratios {
        #[command(flatten)]
        source: FieldSource,
        #[arg(long, default_value_t = 0.3)]
        r: f64,
        #[arg(long, default_value = "0,0")]
        gamma: String,
        #[arg(long, default_value = "")]
        id: String,
    },
    /// Log-log slope of a ratios CSV.
    Fit {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value_t = dioph_core::bounds::DEFAULT_MIN_DECADES)]
        min_decades: f64,
    },
    /// Growth exponent of `F_δ(λ)`.
    FdeltaScaling {
        #[command(flatten)]
        symbol: SymbolArg,
        #[arg(long)]
        delta: f64,
        /// Comma-separated `λ` values.
        #[arg(long)]
        lambdas: Option<String>,
        /// Log-spaced grid `from,to,steps`.
        #[arg(long, conflicts_with = "lambdas")]
        grid: Option<String>,
        #[arg(long, default_value_t = dioph_core::bounds::DEFAULT_MIN_DECADES)]
        min_decades: f64,
    },
}
