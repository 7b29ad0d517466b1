//! Eigenpairs of `−Δ + V` with Dirichlet data on rasterized planar
//! domains, and closed-form pairs on the square `(0, π)²`.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub mod io;
pub mod mask;
pub mod operator;
pub mod solver;

pub use mask::DomainMask;
pub use operator::{assemble, Operator, ProblemSpec, Skyline};
pub use solver::{rectangle_oracle, solve, SolveOptions, Window};

/// Field of matrix entries: `f64` for real potentials, `Complex64`
/// otherwise. All inner products are bilinear (`xᵀy`, no conjugation), so
/// complex-symmetric operators keep their symmetry.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    const IS_REAL: bool;
    fn zero() -> Self;
    fn from_re(x: f64) -> Self;
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(self) -> Complex64;
    fn re(self) -> f64;
    fn modulus(self) -> f64;
    fn sqrt(self) -> Self;

    fn dot(a: &[Self], b: &[Self]) -> Self {
        let mut s = Self::zero();
        for (&x, &y) in a.iter().zip(b) {
            s += x * y;
        }
        s
    }

    /// Euclidean (Hermitian) norm.
    fn norm(a: &[Self]) -> f64 {
        a.iter().map(|x| x.modulus().powi(2)).sum::<f64>().sqrt()
    }

    /// Eigenpairs of the symmetric tridiagonal matrix with diagonal `alpha`
    /// and off-diagonal `beta`; vectors normalized so `sᵀs = 1`.
    fn tridiagonal_eigen(alpha: &[Self], beta: &[Self]) -> Vec<(Self, Vec<Self>)>;
}

impl Scalar for f64 {
    const IS_REAL: bool = true;
    fn zero() -> Self {
        0.0
    }
    fn from_re(x: f64) -> Self {
        x
    }
    fn from_c64(z: Complex64) -> Self {
        z.re
    }
    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn re(self) -> f64 {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> Vec<(f64, Vec<f64>)> {
        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = t.symmetric_eigen();
        (0..m)
            .map(|c| (eig.eigenvalues[c], eig.eigenvectors.column(c).iter().copied().collect()))
            .collect()
    }
}

impl Scalar for Complex64 {
    const IS_REAL: bool = false;
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn to_c64(self) -> Complex64 {
        self
    }
    fn re(self) -> f64 {
        self.re
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }

    fn tridiagonal_eigen(alpha: &[Complex64], beta: &[Complex64]) -> Vec<(Complex64, Vec<Complex64>)> {
        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let values: DVector<Complex64> = match t.clone().schur().eigenvalues() {
            Some(v) => v,
            None => return Vec::new(),
        };
        let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        values
            .iter()
            .map(|&theta| {
                let vec = tridiagonal_inverse_iteration(alpha, beta, theta, scale);
                (theta, vec)
            })
            .collect()
    }
}

/// Eigenvector of a complex-symmetric tridiagonal matrix for a known
/// eigenvalue, by three steps of inverse iteration with a perturbed shift.
fn tridiagonal_inverse_iteration(
    alpha: &[Complex64],
    beta: &[Complex64],
    theta: Complex64,
    scale: f64,
) -> Vec<Complex64> {
    let m = alpha.len();
    let shift = theta + Complex64::new(1e-13 * scale, 1e-13 * scale);
    let mut x: Vec<Complex64> = (0..m)
        .map(|i| Complex64::new(1.0 + 0.1 * (i % 7) as f64, 0.05 * (i % 3) as f64))
        .collect();
    for _ in 0..3 {
        // Thomas algorithm on (T − shift) y = x.
        let mut c = vec![Complex64::new(0.0, 0.0); m];
        let mut d = vec![Complex64::new(0.0, 0.0); m];
        let tiny = Complex64::new(1e-300, 0.0);
        let mut denom = alpha[0] - shift;
        if denom.norm() == 0.0 {
            denom = tiny;
        }
        if m > 1 {
            c[0] = beta[0] / denom;
        }
        d[0] = x[0] / denom;
        for i in 1..m {
            let mut den = alpha[i] - shift - beta[i - 1] * c[i - 1];
            if den.norm() == 0.0 {
                den = tiny;
            }
            if i + 1 < m {
                c[i] = beta[i] / den;
            }
            d[i] = (x[i] - beta[i - 1] * d[i - 1]) / den;
        }
        for i in (0..m.saturating_sub(1)).rev() {
            d[i] = d[i] - c[i] * d[i + 1];
        }
        let n = d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        x = d.into_iter().map(|z| z / n).collect();
    }
    let b = Complex64::dot(&x, &x).sqrt();
    if b.norm() > 1e-8 {
        x.iter_mut().for_each(|z| *z /= b);
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairSource {
    DiscreteSolver,
    ClosedForm,
}

/// An eigenvalue and its eigenfunction sampled on the mask raster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda: Complex64,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    /// Real part of `ψ` on the raster, row-major, zero outside the mask.
    pub psi: Vec<f64>,
    /// Imaginary part, present only for complex potentials.
    pub psi_im: Option<Vec<f64>>,
    /// `‖(A − λ)ψ‖₂ / ‖ψ‖₂` under the discrete operator.
    pub residual: f64,
    pub source: PairSource,
    /// Continuum `L²` norm, for closed-form pairs.
    pub l2_norm: Option<f64>,
    /// Continuum sup norm, for closed-form pairs.
    pub sup_norm: Option<f64>,
}

impl EigenPair {
    pub fn psi_complex(&self) -> Vec<Complex64> {
        match &self.psi_im {
            None => self.psi.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Some(im) => self
                .psi
                .iter()
                .zip(im)
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect(),
        }
    }

    /// `|ψ|` on the raster.
    pub fn modulus(&self) -> Vec<f64> {
        match &self.psi_im {
            None => self.psi.iter().map(|x| x.abs()).collect(),
            Some(im) => self.psi.iter().zip(im).map(|(a, b)| a.hypot(*b)).collect(),
        }
    }

    /// Grid quadrature `(h² Σ |ψ|²)^{1/2}`.
    pub fn grid_l2(&self) -> f64 {
        (self.modulus().iter().map(|x| x * x).sum::<f64>() * self.h * self.h).sqrt()
    }

    /// Multiplies `ψ` by a real constant.
    pub fn scaled(&self, c: f64) -> EigenPair {
        let mut out = self.clone();
        out.psi.iter_mut().for_each(|x| *x *= c);
        if let Some(im) = out.psi_im.as_mut() {
            im.iter_mut().for_each(|x| *x *= c);
        }
        out.l2_norm = out.l2_norm.map(|v| v * c.abs());
        out.sup_norm = out.sup_norm.map(|v| v * c.abs());
        out
    }
}
