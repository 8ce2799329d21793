//! Exact-arithmetic toolkit for deciding whether quadruples of 4-point
//! permutations force quasirandomness.
//!
//! The crate builds, entirely over arbitrary-precision rationals:
//!
//! * pattern densities in finite permutations and in step permutons,
//! * the deviation function of grid perturbations with its exact gradient
//!   and Hessian at the origin,
//! * non-forcing certificates for every quadruple with linearly dependent
//!   gradients (eigenvalue counts by exact inertia, or explicit witness
//!   directions on the gradient-orthogonal subspace),
//! * the two special permuton families whose parameters are pinned by a
//!   nested exact-sign bisection, and
//! * a Monte Carlo sampler used only for statistical cross-checks of the
//!   exact results.
//!
//! With the default `parallel` feature the heavy enumerations run on rayon;
//! disabling it leaves a dependency-free sequential build with identical
//! outputs.

pub mod certify;
pub mod error;
pub mod exceptional;
pub mod fixtures;
pub mod matrix;
mod par;
pub mod perm;
pub mod permuton;
pub mod perturb;
pub mod poly;
pub mod rat;

pub use error::{Error, Result};
pub use matrix::{Inertia, RatMatrix};
pub use perm::Permutation;
pub use permuton::StepPermuton;
pub use rat::Rat;
