//! Error type shared across the crate.

use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use crate::estimation::FittedModel;

#[derive(Debug)]
pub enum Error {
    /// A distribution function was evaluated at a non-finite point.
    NonFiniteInput(f64),
    /// A quantile was requested outside the open interval (0, 1).
    ProbabilityOutOfRange(f64),
    /// Column or response lengths disagree.
    LengthMismatch { expected: usize, found: usize },
    /// A dataset with zero observations.
    EmptyData,
    /// A non-finite cell value.
    NonFiniteValue { column: String, row: usize },
    /// An ordinal code outside 1..=r.
    InvalidOrdinalCode { row: usize, code: u32, n_categories: u32 },
    /// Continuous response required but the dataset holds an ordinal one, or
    /// vice versa.
    WrongResponseKind,
    /// Too few observations for the requested fit.
    TooFewObservations { n: usize, required: usize },
    /// The design matrix (including the implicit intercept) is rank deficient.
    SingularDesign,
    /// The response has zero variance.
    DegenerateResponse,
    /// An ordinal category with zero observed count.
    EmptyCategory { category: u32 },
    /// Thresholds not strictly increasing at an evaluation point.
    ThresholdOrder,
    /// Prediction data does not match the columns the model was fitted on.
    SchemaMismatch { detail: String },
    /// Newton iteration exhausted without meeting the gradient tolerance.
    /// Carries the last iterate so callers can still inspect or report it.
    NotConverged(Box<FittedModel>),
    /// A goodness-of-fit measure is undefined for the given inputs.
    UndefinedMeasure(&'static str),
    /// A measure that does not apply to the model at hand (e.g. Tjur with
    /// more than two categories).
    InapplicableMeasure(&'static str),
    /// Penalty evaluated outside its domain (r < 2 or non-positive constant).
    PenaltyDomain,
    /// Unrecognised penalty identifier.
    UnknownPenalty(String),
    /// Discretization produced an empty category.
    DegenerateDiscretization { category: u32 },
    /// Invalid simulation configuration.
    InvalidConfig(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFiniteInput(z) => write!(f, "non-finite input {z}"),
            Error::ProbabilityOutOfRange(p) => {
                write!(f, "probability {p} outside open interval (0, 1)")
            }
            Error::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            Error::EmptyData => write!(f, "dataset has no observations"),
            Error::NonFiniteValue { column, row } => {
                write!(f, "non-finite value in column '{column}' at row {row}")
            }
            Error::InvalidOrdinalCode { row, code, n_categories } => write!(
                f,
                "ordinal code {code} at row {row} outside 1..={n_categories}"
            ),
            Error::WrongResponseKind => write!(f, "response kind does not match the operation"),
            Error::TooFewObservations { n, required } => {
                write!(f, "{n} observations, at least {required} required")
            }
            Error::SingularDesign => write!(f, "design matrix is rank deficient"),
            Error::DegenerateResponse => write!(f, "response has zero variance"),
            Error::EmptyCategory { category } => {
                write!(f, "category {category} has no observations")
            }
            Error::ThresholdOrder => write!(f, "thresholds are not strictly increasing"),
            Error::SchemaMismatch { detail } => write!(f, "schema mismatch: {detail}"),
            Error::NotConverged(m) => write!(
                f,
                "no convergence after {} iterations (gradient norm {:.3e})",
                m.iterations, m.gradient_norm
            ),
            Error::UndefinedMeasure(why) => write!(f, "measure undefined: {why}"),
            Error::InapplicableMeasure(why) => write!(f, "measure inapplicable: {why}"),
            Error::PenaltyDomain => write!(f, "penalty undefined: need r >= 2 and lambda > 0"),
            Error::UnknownPenalty(s) => write!(f, "unknown penalty '{s}'"),
            Error::DegenerateDiscretization { category } => {
                write!(f, "discretization left category {category} empty")
            }
            Error::InvalidConfig(why) => write!(f, "invalid configuration: {why}"),
        }
    }
}

impl core::error::Error for Error {}
