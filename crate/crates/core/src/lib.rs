//! Numerical toolkit for developable surfaces: tangent developables of
//! space curves, their isometric unfolding, the direction-cosine frame of
//! the rulings, shadow-cone surfaces built from families of plane sections,
//! and numerical developability checks.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve_model;
pub mod development;
pub mod error;
pub mod expr;
pub mod frame_sextet;
pub mod geom_io;
pub mod numeric;
pub mod selftest;
pub mod shadow_cone;
mod specdoc;
pub mod tangent_dev;
pub mod verify;

pub use error::{Error, SpecError};
