//! Ordinary distribution-valued forms on 𝒯_Γ and their θ-functions.
//!
//! Everything is a series in w = s − 2; α′ means d/dw at w = 0. Forms are
//! taken over K = ℚ_p.

pub mod eigendata;
pub mod embedding;
pub mod form;
pub mod germ;
pub mod slice;
pub mod theta;

pub use eigendata::EigendataJson;
pub use embedding::{embedding_lattices, fixed_point_of_embedding, fixed_point_of_int_matrix, partial_lp};
pub use form::{classical_action, frame, ordinary_lift, ClassicalForm, DistForm, FormSpace, LiftOptions, LiftedForm};
pub use germ::{Germ, GermJson};
pub use slice::{SliceCtx, SliceDist, Weight};
pub use theta::{
    check_identities, decomposition_check, measure_from_forms, DecompositionReport, EdgeDistributions,
    IdentityCheck, Lattice, LatticePair, NuModel, Theta,
};
