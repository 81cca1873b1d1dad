//! Cumulative-link (ordinal) regression by maximum likelihood, binary models
//! as the two-category special case, and the penalized likelihood-ratio
//! goodness-of-fit family, together with a deterministic latent-variable
//! simulation engine.
//!
//! The crate is `no_std` (allocation required). File formats, CSV/JSON IO and
//! the command-line front end live in the companion `ordr2` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dataset;
pub mod error;
pub mod estimation;
pub mod gof;
mod linalg;
pub mod links;
pub mod matrix;
pub mod sim;

pub use dataset::{Column, Dataset, Response};
pub use error::Error;
pub use estimation::{
    fit_clm, fit_clm_with, fit_null, fit_ols, loglik_grad_hess, predict_probs, FitOptions,
    FittedModel, LinearFit,
};
pub use gof::{gof_report, GofReport, PenaltySpec};
pub use links::LinkKind;
pub use matrix::Matrix;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
