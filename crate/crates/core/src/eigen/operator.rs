//! Five-point Dirichlet discretization of `−Δ + V` and an envelope
//! (skyline) `LDLᵀ` factorization used for shift-invert solves and
//! Sylvester inertia counts.

use num_complex::Complex64;

use super::mask::DomainMask;
use super::Scalar;
use crate::error::{Error, Result};

/// Sentinel for a missing neighbor.
const NONE: u32 = u32::MAX;

/// A problem on a mask: the potential is sampled on every raster cell.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub mask: DomainMask,
    /// `V` on the raster (`nx · ny` values), or `None` for `V ≡ 0`.
    pub potential: Option<Vec<Complex64>>,
}

impl ProblemSpec {
    pub fn laplacian(mask: DomainMask) -> Self {
        ProblemSpec { mask, potential: None }
    }

    pub fn with_potential(mask: DomainMask, v: Vec<Complex64>) -> Result<Self> {
        if v.len() != mask.nx * mask.ny {
            return Err(Error::Argument(format!(
                "potential has {} samples, expected {}",
                v.len(),
                mask.nx * mask.ny
            )));
        }
        for (k, z) in v.iter().enumerate() {
            if mask.inside[k] && !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::Argument(format!("potential is not finite at cell {k}")));
            }
        }
        Ok(ProblemSpec { mask, potential: Some(v) })
    }

    pub fn constant_potential(mask: DomainMask, c: Complex64) -> Self {
        let n = mask.nx * mask.ny;
        ProblemSpec { mask, potential: Some(vec![c; n]) }
    }

    /// True when `V` is real on every interior cell.
    pub fn is_real(&self) -> bool {
        match &self.potential {
            None => true,
            Some(v) => v
                .iter()
                .zip(&self.mask.inside)
                .all(|(z, &inside)| !inside || z.im == 0.0),
        }
    }
}

/// The assembled operator. Unknowns are the interior cells in raster
/// order; row `k` has diagonal `4/h² + V` and `−1/h²` for each interior
/// neighbor.
#[derive(Debug, Clone)]
pub struct Operator<T: Scalar> {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    /// Raster index of each unknown.
    pub cells: Vec<usize>,
    /// Unknown index of each raster cell, `u32::MAX` outside.
    pub unknown: Vec<u32>,
    pub diag: Vec<T>,
    /// Left, right, down, up neighbors (unknown indices).
    pub neighbors: Vec<[u32; 4]>,
    pub off: f64,
}

pub fn assemble<T: Scalar>(spec: &ProblemSpec) -> Operator<T> {
    let m = &spec.mask;
    let inv_h2 = 1.0 / (m.h * m.h);
    let mut unknown = vec![NONE; m.nx * m.ny];
    let mut cells = Vec::with_capacity(m.interior_count());
    for (idx, &inside) in m.inside.iter().enumerate() {
        if inside {
            unknown[idx] = cells.len() as u32;
            cells.push(idx);
        }
    }
    let at = |i: isize, j: isize| -> u32 {
        if m.is_inside(i, j) {
            unknown[j as usize * m.nx + i as usize]
        } else {
            NONE
        }
    };
    let mut neighbors = Vec::with_capacity(cells.len());
    let mut diag = Vec::with_capacity(cells.len());
    for &idx in &cells {
        let i = (idx % m.nx) as isize;
        let j = (idx / m.nx) as isize;
        neighbors.push([at(i - 1, j), at(i + 1, j), at(i, j - 1), at(i, j + 1)]);
        let v = spec
            .potential
            .as_ref()
            .map_or(Complex64::new(0.0, 0.0), |p| p[idx]);
        diag.push(T::from_c64(v) + T::from_re(4.0 * inv_h2));
    }
    Operator {
        nx: m.nx,
        ny: m.ny,
        h: m.h,
        cells,
        unknown,
        diag,
        neighbors,
        off: -inv_h2,
    }
}

impl<T: Scalar> Operator<T> {
    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        for k in 0..self.dim() {
            let mut s = self.diag[k] * x[k];
            for &nb in &self.neighbors[k] {
                if nb != NONE {
                    s += x[nb as usize] * T::from_re(self.off);
                }
            }
            y[k] = s;
        }
    }

    /// All nonzero entries `(row, col, value)` in row-major order.
    pub fn entries(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        for k in 0..self.dim() {
            let mut row: Vec<(usize, T)> = vec![(k, self.diag[k])];
            for &nb in &self.neighbors[k] {
                if nb != NONE {
                    row.push((nb as usize, T::from_re(self.off)));
                }
            }
            row.sort_by_key(|e| e.0);
            out.extend(row.into_iter().map(|(c, v)| (k, c, v)));
        }
        out
    }

    /// Gershgorin interval containing the real parts of the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..self.dim() {
            let radius = self.neighbors[k].iter().filter(|&&n| n != NONE).count() as f64 * self.off.abs();
            let c = self.diag[k].re();
            lo = lo.min(c - radius);
            hi = hi.max(c + radius);
        }
        (lo, hi)
    }

    /// Scatters an unknown vector onto the raster (zero outside).
    pub fn to_raster(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.nx * self.ny];
        for (k, &idx) in self.cells.iter().enumerate() {
            out[idx] = x[k];
        }
        out
    }

    /// Gathers a raster field onto the unknowns.
    pub fn from_raster(&self, field: &[T]) -> Vec<T> {
        self.cells.iter().map(|&idx| field[idx]).collect()
    }

    /// First column of the envelope of row `k` (lowest-index neighbor).
    fn envelope_start(&self, k: usize) -> usize {
        self.neighbors[k]
            .iter()
            .filter(|&&n| n != NONE && (n as usize) < k)
            .map(|&n| n as usize)
            .min()
            .unwrap_or(k)
    }

    /// `LDLᵀ` of `A − σI` (no pivoting).
    pub fn factor_shifted(&self, sigma: T) -> Result<Skyline<T>> {
        Skyline::factor(self, sigma)
    }
}

/// Envelope `LDLᵀ` factorization. Row `k` of `L` is stored densely from
/// column `start[k]` to `k − 1`.
#[derive(Debug, Clone)]
pub struct Skyline<T: Scalar> {
    n: usize,
    start: Vec<usize>,
    offset: Vec<usize>,
    lower: Vec<T>,
    d: Vec<T>,
    pub sigma: T,
}

impl<T: Scalar> Skyline<T> {
    fn factor(op: &Operator<T>, sigma: T) -> Result<Self> {
        let n = op.dim();
        let start: Vec<usize> = (0..n).map(|k| op.envelope_start(k)).collect();
        let mut offset = Vec::with_capacity(n + 1);
        let mut total = 0usize;
        for k in 0..n {
            offset.push(total);
            total += k - start[k];
        }
        offset.push(total);
        let mut lower = vec![T::zero(); total];
        let mut d = vec![T::zero(); n];
        let scale = op.diag.iter().map(|v| v.modulus()).fold(0.0, f64::max) + op.off.abs() * 4.0;
        for k in 0..n {
            let sk = start[k];
            let row_off = offset[k];
            // Scatter A's strictly lower row k.
            for &nb in &op.neighbors[k] {
                if nb != NONE && (nb as usize) < k {
                    lower[row_off + nb as usize - sk] = T::from_re(op.off);
                }
            }
            // u_kj = a_kj − Σ_{i<j} u_ki L_ji, stored in place.
            for j in sk..k {
                let sj = start[j];
                let lo = sk.max(sj);
                let mut s = lower[row_off + j - sk];
                if lo < j {
                    let (row_k, row_j) = (
                        &lower[row_off + lo - sk..row_off + j - sk],
                        &lower[offset[j] + lo - sj..offset[j] + j - sj],
                    );
                    s -= T::dot(row_k, row_j);
                }
                lower[row_off + j - sk] = s;
            }
            // d_k = a_kk − Σ u_kj² / d_j; L_kj = u_kj / d_j.
            let mut dk = op.diag[k] - sigma;
            for j in sk..k {
                let u = lower[row_off + j - sk];
                let l = u / d[j];
                dk -= u * l;
                lower[row_off + j - sk] = l;
            }
            if dk.modulus() <= 1e-14 * scale {
                return Err(Error::Degenerate(format!(
                    "zero pivot at row {k}: shift {} is (numerically) an eigenvalue",
                    sigma.to_c64()
                )));
            }
            d[k] = dk;
        }
        Ok(Skyline { n, start, offset, lower, d, sigma })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of negative pivots: eigenvalues of a real `A` below `σ`.
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|v| v.re() < 0.0).count()
    }

    /// Solves `(A − σI) x = b` in place.
    pub fn solve(&self, x: &mut [T]) {
        for k in 0..self.n {
            let sk = self.start[k];
            if sk < k {
                let row = &self.lower[self.offset[k]..self.offset[k + 1]];
                let s = T::dot(row, &x[sk..k]);
                x[k] -= s;
            }
        }
        for k in 0..self.n {
            x[k] = x[k] / self.d[k];
        }
        for k in (0..self.n).rev() {
            let sk = self.start[k];
            if sk < k {
                let xk = x[k];
                let row = &self.lower[self.offset[k]..self.offset[k + 1]];
                for (xi, &l) in x[sk..k].iter_mut().zip(row) {
                    *xi -= l * xk;
                }
            }
        }
    }

    /// Stored entries of `L`.
    pub fn stored(&self) -> usize {
        self.lower.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cell() -> DomainMask {
        DomainMask::new(2, 1, 0.5, [0.5, 0.5], vec![true, true]).unwrap()
    }

    #[test]
    fn single_cell_entry() {
        let m = DomainMask::new(1, 1, 0.25, [0.25, 0.25], vec![true]).unwrap();
        let op: Operator<f64> = assemble(&ProblemSpec::laplacian(m));
        assert_eq!(op.entries(), vec![(0, 0, 4.0 / 0.0625)]);
    }

    #[test]
    fn two_cell_matrix_and_inertia() {
        let op: Operator<f64> = assemble(&ProblemSpec::laplacian(two_cell()));
        let h2 = 0.25;
        assert_eq!(
            op.entries(),
            vec![(0, 0, 4.0 / h2), (0, 1, -1.0 / h2), (1, 0, -1.0 / h2), (1, 1, 4.0 / h2)]
        );
        // Eigenvalues 3/h² = 12 and 5/h² = 20.
        assert_eq!(op.factor_shifted(11.0).unwrap().negative_pivots(), 0);
        assert_eq!(op.factor_shifted(13.0).unwrap().negative_pivots(), 1);
        assert_eq!(op.factor_shifted(21.0).unwrap().negative_pivots(), 2);
    }

    #[test]
    fn factor_solves_against_matvec() {
        let m = DomainMask::l_shape(20).unwrap();
        let op: Operator<f64> = assemble(&ProblemSpec::laplacian(m));
        let n = op.dim();
        let x: Vec<f64> = (0..n).map(|k| ((k * 7919) % 13) as f64 - 6.0).collect();
        let mut b = vec![0.0; n];
        op.apply(&x, &mut b);
        for k in 0..n {
            b[k] -= 3.5 * x[k];
        }
        let f = op.factor_shifted(3.5).unwrap();
        f.solve(&mut b);
        for k in 0..n {
            assert!((b[k] - x[k]).abs() < 1e-9, "{k}");
        }
    }

    #[test]
    fn complex_factor_solves() {
        let m = DomainMask::disk(16).unwrap();
        let v: Vec<Complex64> = (0..256).map(|k| Complex64::new(0.1 * (k % 5) as f64, 0.3)).collect();
        let op: Operator<Complex64> = assemble(&ProblemSpec::with_potential(m, v).unwrap());
        let n = op.dim();
        let x: Vec<Complex64> = (0..n).map(|k| Complex64::new(k as f64, 1.0 - k as f64)).collect();
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        op.apply(&x, &mut b);
        let sigma = Complex64::new(2.0, 0.5);
        for k in 0..n {
            b[k] -= sigma * x[k];
        }
        op.factor_shifted(sigma).unwrap().solve(&mut b);
        for k in 0..n {
            assert!((b[k] - x[k]).norm() < 1e-8 * (k as f64 + 1.0));
        }
    }

    #[test]
    fn inertia_matches_closed_form_count() {
        let n = 15;
        let m = DomainMask::square(n).unwrap();
        let h = m.h;
        let op: Operator<f64> = assemble(&ProblemSpec::laplacian(m));
        let mut closed = Vec::new();
        for p in 1..=n {
            for q in 1..=n {
                let s = |k: usize| (k as f64 * h / 2.0).sin().powi(2);
                closed.push(4.0 / (h * h) * (s(p) + s(q)));
            }
        }
        for sigma in [3.0, 10.3, 27.1, 60.7] {
            let expect = closed.iter().filter(|&&l| l < sigma).count();
            assert_eq!(op.factor_shifted(sigma).unwrap().negative_pivots(), expect);
        }
    }
}
