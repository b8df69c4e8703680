//! Densities, tail probabilities and tail asymptotics of multistable
//! integrals `I(f)` whose characteristic function is
//! `exp(-∫ |θ f(x)|^{α(x)} dx)`, for piecewise-constant `f` and `α`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod asymptote;
pub mod charfn;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod function_space;
pub mod inversion;
pub mod prooflab;
pub mod quadrature;
pub mod sampler;

pub use error::{Error, Result};
