//! Mask files (ASCII PGM plus a JSON sidecar) and the binary eigenpair dump.
//!
//! `pairs.bin` layout, all little-endian:
//!
//! ```text
//! header: nx u64, ny u64, h f64, k u64
//! k times: λ_re f64, λ_im f64, residual f64, ψ f64 × (nx · ny), row-major
//! ```
//!
//! Only the real part of `ψ` is stored.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mask::DomainMask;
use super::{EigenPair, PairSource};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSidecar {
    pub h: f64,
    pub origin: [f64; 2],
}

/// P2 image, row `j` of the image is raster row `j`; 255 marks interior.
pub fn write_pgm(mask: &DomainMask, out: &mut impl Write) -> Result<()> {
    writeln!(out, "P2")?;
    writeln!(out, "{} {}", mask.nx, mask.ny)?;
    writeln!(out, "255")?;
    for j in 0..mask.ny {
        let row: Vec<&str> = (0..mask.nx)
            .map(|i| if mask.inside[j * mask.nx + i] { "255" } else { "0" })
            .collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn sidecar(mask: &DomainMask) -> MaskSidecar {
    MaskSidecar { h: mask.h, origin: mask.origin }
}

/// Parses a P2 image; values above half the maximum are interior.
pub fn read_pgm(text: &str, side: &MaskSidecar) -> Result<DomainMask> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace());
    let magic = tokens.next().ok_or_else(|| Error::Parse("empty PGM".into()))?;
    if magic != "P2" {
        return Err(Error::Parse(format!("expected P2 magic, got `{magic}`")));
    }
    let mut num = |what: &str| -> Result<usize> {
        let t = tokens.next().ok_or_else(|| Error::Parse(format!("PGM ended before {what}")))?;
        t.parse::<usize>().map_err(|e| Error::Parse(format!("PGM {what} `{t}`: {e}")))
    };
    let nx = num("width")?;
    let ny = num("height")?;
    let maxval = num("maxval")?;
    if maxval == 0 {
        return Err(Error::Parse("PGM maxval must be positive".into()));
    }
    let mut inside = Vec::with_capacity(nx * ny);
    for _ in 0..nx * ny {
        let v = num("pixel")?;
        inside.push(2 * v > maxval);
    }
    DomainMask::new(nx, ny, side.h, side.origin, inside)
}

fn put(out: &mut impl Write, x: f64) -> Result<()> {
    out.write_all(&x.to_le_bytes())?;
    Ok(())
}

pub fn write_pairs(pairs: &[EigenPair], nx: usize, ny: usize, h: f64, out: &mut impl Write) -> Result<()> {
    out.write_all(&(nx as u64).to_le_bytes())?;
    out.write_all(&(ny as u64).to_le_bytes())?;
    put(out, h)?;
    out.write_all(&(pairs.len() as u64).to_le_bytes())?;
    for p in pairs {
        if p.nx != nx || p.ny != ny || p.psi.len() != nx * ny {
            return Err(Error::Argument("eigenpair raster does not match the header".into()));
        }
        put(out, p.lambda.re)?;
        put(out, p.lambda.im)?;
        put(out, p.residual)?;
        let mut buf = Vec::with_capacity(8 * p.psi.len());
        for &v in &p.psi {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_pairs(input: &mut impl Read) -> Result<Vec<EigenPair>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut pos = 0usize;
    let mut word = || -> Result<[u8; 8]> {
        let b: [u8; 8] = bytes
            .get(pos..pos + 8)
            .ok_or_else(|| Error::Parse("pairs file is truncated".into()))?
            .try_into()
            .expect("8-byte slice");
        pos += 8;
        Ok(b)
    };
    let nx = u64::from_le_bytes(word()?) as usize;
    let ny = u64::from_le_bytes(word()?) as usize;
    let h = f64::from_le_bytes(word()?);
    let k = u64::from_le_bytes(word()?) as usize;
    if nx.checked_mul(ny).is_none() || nx * ny > 1 << 28 {
        return Err(Error::Parse(format!("implausible raster {nx} x {ny}")));
    }
    let mut pairs = Vec::with_capacity(k.min(4096));
    for _ in 0..k {
        let re = f64::from_le_bytes(word()?);
        let im = f64::from_le_bytes(word()?);
        let residual = f64::from_le_bytes(word()?);
        let mut psi = Vec::with_capacity(nx * ny);
        for _ in 0..nx * ny {
            psi.push(f64::from_le_bytes(word()?));
        }
        pairs.push(EigenPair {
            lambda: Complex64::new(re, im),
            nx,
            ny,
            h,
            psi,
            psi_im: None,
            residual,
            source: PairSource::DiscreteSolver,
            l2_norm: None,
            sup_norm: None,
        });
    }
    Ok(pairs)
}
