//! Exact-arithmetic machinery for derived nonhomogeneous Koszul duality at
//! finite truncation scale: graded linear algebra over Q and F_p,
//! bar/cobar constructions, quadratic duality, curved DG structures,
//! comodules and contramodules, twisting cochains, and second-kind
//! acyclicity certificates.

pub mod error;
pub mod field;
pub mod matrix;
pub mod par;
pub mod graded;
pub mod functional;
pub mod homology;
pub mod algebra;
pub mod coalgebra;
pub mod cocontra;
pub mod cdg;
pub mod barcobar;
pub mod quad;
pub mod twist;
pub mod skind;
pub mod fixtures;

pub use error::Error;
pub use field::{Field, Scalar};
