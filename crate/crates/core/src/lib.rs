//! Finite-difference laboratory for conformally generalized Klein-Gordon and
//! vacuum-coupled Dirac field equations on flat diagonal-metric grids.
//!
//! Layout:
//! - [`grid`]: spacetime grids, sampled fields and stencils
//! - [`fields`]: polar decomposition, quantum potential, conformal factor
//! - [`kgops`]: D-operators, Klein-Gordon residuals, discrete action
//! - [`vacuum`]: the vacuum field constraint, its static solver and the vacuum mass
//! - [`dirac`]: gamma matrices, spinor residuals, dispersion

pub mod derivatives;
pub mod dirac;
pub mod error;
pub mod fields;
pub mod grid;
pub mod kgops;
pub mod manufactured;
pub mod vacuum;

pub use derivatives::{DerivativeMode, DerivativePack};
pub use error::{Error, Result};
pub use fields::{ConformalState, PolarDecomposition};
pub use grid::{Axis, Boundary, ComplexField, Covector, Field, RealField, SpacetimeGrid, StencilOrder};
