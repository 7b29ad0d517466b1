//! Rasterized planar domains and their erosion `Ω_{−r}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seed used by [`DomainMask::percolation`] when none is given.
pub const DEFAULT_PERCOLATION_SEED: u64 = 0x5eed_2024;

/// Boolean raster over an `nx × ny` grid with spacing `h`. Cell `(i, j)`
/// sits at `origin + (i h, j h)` and is stored at `j * nx + i`. Cells off
/// the raster are exterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainMask {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: [f64; 2],
    pub inside: Vec<bool>,
}

impl DomainMask {
    pub fn new(nx: usize, ny: usize, h: f64, origin: [f64; 2], inside: Vec<bool>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Argument("mask dimensions must be positive".into()));
        }
        if inside.len() != nx * ny {
            return Err(Error::Argument(format!(
                "raster has {} cells, expected {}",
                inside.len(),
                nx * ny
            )));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Argument(format!("grid spacing must be positive, got {h}")));
        }
        let mask = DomainMask { nx, ny, h, origin, inside };
        if mask.interior_count() == 0 {
            return Err(Error::EmptyInterior("mask has no interior cells".into()));
        }
        Ok(mask)
    }

    /// Rasterizes a predicate on the `n × n` interior nodes of `(0, π)²`,
    /// `h = π/(n+1)`.
    pub fn from_predicate(n: usize, pred: impl Fn(f64, f64) -> bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("grid size must be positive".into()));
        }
        let h = std::f64::consts::PI / (n as f64 + 1.0);
        let mut inside = vec![false; n * n];
        for j in 0..n {
            for i in 0..n {
                inside[j * n + i] = pred((i + 1) as f64 * h, (j + 1) as f64 * h);
            }
        }
        DomainMask::new(n, n, h, [h, h], inside)
    }

    /// The square `(0, π)²`.
    pub fn square(n: usize) -> Result<Self> {
        DomainMask::from_predicate(n, |_, _| true)
    }

    /// The rectangle `(0, (nx+1)h) × (0, (ny+1)h)`.
    pub fn rectangle(nx: usize, ny: usize, h: f64) -> Result<Self> {
        DomainMask::new(nx, ny, h, [h, h], vec![true; nx * ny])
    }

    /// `(0, π)²` with the quadrant `(π/2, π)²` removed.
    pub fn l_shape(n: usize) -> Result<Self> {
        let half = std::f64::consts::FRAC_PI_2;
        DomainMask::from_predicate(n, |x, y| !(x > half && y > half))
    }

    /// Disk of radius `π/2` centered at `(π/2, π/2)`.
    pub fn disk(n: usize) -> Result<Self> {
        let c = std::f64::consts::FRAC_PI_2;
        DomainMask::from_predicate(n, |x, y| (x - c).hypot(y - c) < c)
    }

    /// Koch snowflake prefractal of the given level, centered at
    /// `(π/2, π/2)` with circumradius `0.49 π`.
    pub fn koch(n: usize, level: u32) -> Result<Self> {
        if level > 4 {
            return Err(Error::Argument(format!("Koch level must be <= 4, got {level}")));
        }
        let c = std::f64::consts::FRAC_PI_2;
        let poly = koch_polygon(level, [c, c], 0.49 * std::f64::consts::PI);
        DomainMask::from_predicate(n, |x, y| point_in_polygon(&poly, x, y))
    }

    /// Fractal percolation: the square is split 3×3 `levels` times and each
    /// sub-square survives with probability `p` (the central one always
    /// survives, so the interior is never empty).
    pub fn percolation(n: usize, levels: u32, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Argument(format!("survival probability must be in [0,1], got {p}")));
        }
        if levels == 0 || 3usize.pow(levels) > n {
            return Err(Error::Argument(format!(
                "levels must satisfy 1 <= 3^levels <= n (n = {n}, levels = {levels})"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Surviving squares as (x0, y0, side) in units of the finest block.
        let finest = 3usize.pow(levels);
        let mut alive = vec![(0usize, 0usize, finest)];
        for _ in 0..levels {
            let mut next = Vec::new();
            for &(x0, y0, side) in &alive {
                let s = side / 3;
                for by in 0..3 {
                    for bx in 0..3 {
                        let keep = (bx == 1 && by == 1) || rng.gen::<f64>() < p;
                        if keep {
                            next.push((x0 + bx * s, y0 + by * s, s));
                        }
                    }
                }
            }
            alive = next;
        }
        let mut block = vec![false; finest * finest];
        for (x0, y0, _) in alive {
            block[y0 * finest + x0] = true;
        }
        let pi = std::f64::consts::PI;
        DomainMask::from_predicate(n, |x, y| {
            let bx = ((x / pi * finest as f64) as usize).min(finest - 1);
            let by = ((y / pi * finest as f64) as usize).min(finest - 1);
            block[by * finest + bx]
        })
    }

    pub fn interior_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn is_inside(&self, i: isize, j: isize) -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < self.nx
            && (j as usize) < self.ny
            && self.inside[j as usize * self.nx + i as usize]
    }

    /// Physical coordinates of cell `(i, j)`.
    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [self.origin[0] + i as f64 * self.h, self.origin[1] + j as f64 * self.h]
    }

    /// Physical width and height spanned by the raster plus one cell of
    /// exterior on each side.
    pub fn extent(&self) -> [f64; 2] {
        [(self.nx + 1) as f64 * self.h, (self.ny + 1) as f64 * self.h]
    }

    /// Offsets `(di, dj)` with `di² + dj² ≤ (r/h)²`, as per-row half widths.
    fn disk_rows(&self, r: f64) -> Vec<(isize, isize)> {
        let rc = r / self.h;
        let rc2 = rc * rc * (1.0 + 1e-12);
        let top = rc2.sqrt().floor() as isize;
        (-top..=top)
            .map(|dj| {
                let rem = rc2 - (dj * dj) as f64;
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

    /// Keeps a cell iff every cell within distance `r` (measured in cells
    /// as `r/h`) is inside.
    pub fn erode(&self, r: f64) -> Result<DomainMask> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Argument(format!("erosion radius must be finite and >= 0, got {r}")));
        }
        let rows = self.disk_rows(r);
        // prefix[j][i] = number of inside cells in row j with column < i.
        let nx = self.nx;
        let mut prefix = vec![0u32; (nx + 1) * self.ny];
        for j in 0..self.ny {
            for i in 0..nx {
                prefix[j * (nx + 1) + i + 1] =
                    prefix[j * (nx + 1) + i] + self.inside[j * nx + i] as u32;
            }
        }
        let mut out = vec![false; nx * self.ny];
        for j in 0..self.ny {
            for i in 0..nx {
                if !self.inside[j * nx + i] {
                    continue;
                }
                out[j * nx + i] = rows.iter().all(|&(dj, w)| {
                    let jj = j as isize + dj;
                    let lo = i as isize - w;
                    let hi = i as isize + w;
                    if jj < 0 || jj >= self.ny as isize || lo < 0 || hi >= nx as isize {
                        return false;
                    }
                    let base = jj as usize * (nx + 1);
                    let count = prefix[base + hi as usize + 1] - prefix[base + lo as usize];
                    count as isize == hi - lo + 1
                });
            }
        }
        if !out.iter().any(|&b| b) {
            return Err(Error::EmptyInterior(format!("erosion by r = {r} leaves no interior cell")));
        }
        Ok(DomainMask {
            nx,
            ny: self.ny,
            h: self.h,
            origin: self.origin,
            inside: out,
        })
    }

    /// True if every cell within distance `r` of the physical point `c` is
    /// an interior cell, and the disk does not leave the raster.
    pub fn contains_ball(&self, c: [f64; 2], r: f64) -> bool {
        let fi = (c[0] - self.origin[0]) / self.h;
        let fj = (c[1] - self.origin[1]) / self.h;
        let rc = r / self.h;
        let i0 = (fi - rc).floor() as isize - 1;
        let i1 = (fi + rc).ceil() as isize + 1;
        let j0 = (fj - rc).floor() as isize - 1;
        let j1 = (fj + rc).ceil() as isize + 1;
        for j in j0..=j1 {
            for i in i0..=i1 {
                let dx = i as f64 - fi;
                let dy = j as f64 - fj;
                if dx * dx + dy * dy <= rc * rc && !self.is_inside(i, j) {
                    return false;
                }
            }
        }
        // The boundary of the raster itself is exterior.
        fi - rc > -1.0 && fj - rc > -1.0 && fi + rc < self.nx as f64 && fj + rc < self.ny as f64
    }
}

/// Vertices of the Koch snowflake prefractal, counter-clockwise.
pub fn koch_polygon(level: u32, center: [f64; 2], circumradius: f64) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = (0..3)
        .map(|k| {
            let a = std::f64::consts::FRAC_PI_2 + k as f64 * 2.0 * std::f64::consts::PI / 3.0;
            [center[0] + circumradius * a.cos(), center[1] + circumradius * a.sin()]
        })
        .collect();
    let s3 = 3f64.sqrt() / 2.0;
    for _ in 0..level {
        let mut next = Vec::with_capacity(pts.len() * 4);
        for idx in 0..pts.len() {
            let a = pts[idx];
            let b = pts[(idx + 1) % pts.len()];
            let d = [(b[0] - a[0]) / 3.0, (b[1] - a[1]) / 3.0];
            let p1 = [a[0] + d[0], a[1] + d[1]];
            let p3 = [a[0] + 2.0 * d[0], a[1] + 2.0 * d[1]];
            // Outward bump: rotate d by −60° for a counter-clockwise polygon.
            let tip = [
                p1[0] + 0.5 * d[0] + s3 * d[1],
                p1[1] + 0.5 * d[1] - s3 * d[0],
            ];
            next.extend_from_slice(&[a, p1, tip, p3]);
        }
        pts = next;
    }
    pts
}

/// Even-odd ray casting.
pub fn point_in_polygon(poly: &[[f64; 2]], x: f64, y: f64) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = (poly[i][0], poly[i][1]);
        let (xj, yj) = (poly[j][0], poly[j][1]);
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erosion_by_zero_is_identity() {
        let m = DomainMask::koch(64, 2).unwrap();
        assert_eq!(m.erode(0.0).unwrap(), m);
    }

    #[test]
    fn square_erodes_to_centered_square() {
        let m = DomainMask::rectangle(11, 11, 0.1).unwrap();
        let e = m.erode(0.2).unwrap();
        for j in 0..11 {
            for i in 0..11 {
                let expect = (2..=8).contains(&i) && (2..=8).contains(&j);
                assert_eq!(e.inside[j * 11 + i], expect, "({i},{j})");
            }
        }
        assert_eq!(e.interior_count(), 49);
    }

    #[test]
    fn koch_erosion_matches_double_loop() {
        let m = DomainMask::koch(96, 3).unwrap();
        let e = m.erode(4.0 * m.h).unwrap();
        let mut count = 0;
        for j in 0..m.ny as isize {
            for i in 0..m.nx as isize {
                let mut ok = m.is_inside(i, j);
                for dj in -4isize..=4 {
                    for di in -4isize..=4 {
                        if di * di + dj * dj <= 16 && !m.is_inside(i + di, j + dj) {
                            ok = false;
                        }
                    }
                }
                count += ok as usize;
            }
        }
        assert_eq!(e.interior_count(), count);
    }

    #[test]
    fn erosion_to_nothing_is_error() {
        let m = DomainMask::square(10).unwrap();
        assert!(matches!(m.erode(10.0), Err(Error::EmptyInterior(_))));
    }

    #[test]
    fn generators_have_expected_areas() {
        let n = 200;
        let area = |m: &DomainMask| m.interior_count() as f64 * m.h * m.h;
        let pi = std::f64::consts::PI;
        let full = DomainMask::square(n).unwrap();
        assert!((area(&DomainMask::l_shape(n).unwrap()) / area(&full) - 0.75).abs() < 0.01);
        assert!((area(&DomainMask::disk(n).unwrap()) / (pi * (pi / 2.0).powi(2)) - 1.0).abs() < 0.01);
        // Snowflake area = (8/5) × triangle area.
        let rc = 0.49 * pi;
        let tri = 3f64.sqrt() * 3.0 / 4.0 * rc * rc;
        let k = area(&DomainMask::koch(n, 4).unwrap());
        assert!((k / (1.6 * tri) - 1.0).abs() < 0.02, "{k}");
        let k0 = area(&DomainMask::koch(n, 0).unwrap());
        assert!((k0 / tri - 1.0).abs() < 0.02);
    }

    #[test]
    fn percolation_is_seeded() {
        let a = DomainMask::percolation(81, 3, 0.7, 1).unwrap();
        let b = DomainMask::percolation(81, 3, 0.7, 1).unwrap();
        let c = DomainMask::percolation(81, 3, 0.7, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.interior_count() < 81 * 81);
    }

    #[test]
    fn ball_containment() {
        let m = DomainMask::square(63).unwrap();
        let c = std::f64::consts::FRAC_PI_2;
        assert!(m.contains_ball([c, c], 0.4));
        assert!(!m.contains_ball([0.2, c], 0.4));
    }
}
