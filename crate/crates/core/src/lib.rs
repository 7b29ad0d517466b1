//! Lattice counting, ellipticity certificates, sums of squares, discrete
//! eigenpairs on rough planar domains, and the cutoff/periodization/Fourier
//! pipeline that turns those pieces into sup-norm bounds.

pub mod bounds;
pub mod cutoff;
pub mod eigen;
pub mod error;
pub mod lattice;
pub mod numtheory;
pub mod symbol;

pub use error::{Error, Result};
