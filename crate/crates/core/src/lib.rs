//! Numerical certification of curvature-dimension bounds for (K,N)-cones and
//! N-warped products over finite or discretized metric measure spaces.
//!
//! The crate is split along the objects it manipulates:
//!
//! * [`model_fns`]: `sin_K`, `cos_K`, the distortion coefficients σ and τ and
//!   the Bonnet–Myers bound.
//! * [`mms`]: finite metric measure spaces and the cone / warped-product /
//!   suspension constructions on them.
//! * [`transport`]: exact discrete optimal transport and the CD*, CD and MCP
//!   midpoint checks.
//! * [`spectral1d`]: the weighted 1-D fiber operators, their spectra, the
//!   Weyl limit-point classification and the heat semigroup.
//! * [`gamma`]: Γ-calculus, exact on weighted graphs and finite-difference on
//!   tensor grids.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gamma;
pub mod mms;
pub mod model_fns;
pub mod spectral1d;
pub mod transport;

pub use error::{Error, Result};
pub use mms::FiniteMMS;
pub use model_fns::{CurvatureDimension, ExtendedValue};
