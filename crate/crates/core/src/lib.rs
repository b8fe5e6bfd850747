//! Numerics for Lorentz sequence spaces, nuclear representations of operators
//! on finite `l_p^n` spaces, and audits of the identity
//! `nuclear trace = sum of eigenvalues`.

// `!(x > 0.0)` is the idiom for rejecting NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ambient;
pub mod approx;
pub mod error;
pub mod experiment;
pub mod lorentz;
pub mod spectral;
pub mod tensor_rep;
pub mod tol;

pub use error::{Error, Result};
