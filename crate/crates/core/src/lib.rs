//! p-adic arithmetic, the Bruhat-Tits tree of PGL₂ over ℚ_{p^f}, harmonic
//! measures, multiplicative integrals, Schottky periods and ordinary
//! distribution-valued forms.

pub mod error;
pub mod hida;
pub mod integral;
pub mod measure;
pub mod mumford;
pub mod padic;
pub mod tree;

pub use error::{Error, Result};
pub use padic::{FieldDesc, FieldEmbedding, Mat2, OrdNorm, P1Point, PadicScalar};
