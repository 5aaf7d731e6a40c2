//! Exact construction and verification of complete sets of mutually unbiased
//! bases from symplectic spreads, spread sets, semifields and planar functions.
//!
//! All arithmetic is exact: finite fields in [`gf`], cyclotomic integers in
//! [`cyclo`], spreads in [`geometry`], the explicit families in [`families`],
//! frames and their verifiers in [`frames`], affine planes in [`planes`] and
//! inequivalence witnesses in [`equiv`]. [`cli`] drives them from the command line.

pub mod cli;
pub mod cyclo;
pub mod equiv;
pub mod families;
pub mod frames;
pub mod geometry;
pub mod gf;
pub mod linalg;
pub mod planes;
pub mod report;

pub use cyclo::{CycInt, Root};
pub use frames::{MubSet, Orthoframe, VerifyMode};
pub use geometry::{SpreadSet, SymplecticSpread};
pub use gf::{Field, GFElement};
pub use report::CheckReport;
