//! Maximum-likelihood fitting: cumulative-link models for ordinal responses
//! (binary models are the r = 2 case), closed-form thresholds-only null
//! models, and ordinary least squares for the latent reference.

mod clm;

pub use clm::{fit_clm, fit_clm_with, loglik_grad_hess, FitOptions};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::linalg;
use crate::links::LinkKind;
use crate::matrix::Matrix;
use crate::{Error, Result};

/// Ordinary least squares fit of a continuous response.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearFit {
    /// Term names, `(Intercept)` first.
    pub names: Vec<String>,
    /// Estimated coefficients in the same order as `names`.
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residual_ss: f64,
    pub total_ss: f64,
    /// Coefficient of determination, 1 - residual_ss/total_ss.
    pub r_squared: f64,
}

/// A fitted cumulative-link model.
///
/// Orientation: P(y <= j) = F(tau_j - x'beta), so a positive coefficient
/// moves probability mass toward higher categories. For r = 2 the single
/// threshold is the negated intercept of the equivalent binary GLM.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FittedModel {
    pub link: LinkKind,
    pub predictor_names: Vec<String>,
    /// One coefficient per predictor; no intercept (absorbed by thresholds).
    pub coefficients: Vec<f64>,
    /// Strictly increasing thresholds, length r - 1.
    pub thresholds: Vec<f64>,
    pub n_categories: u32,
    pub loglik: f64,
    /// Closed-form log-likelihood of the thresholds-only model on the same
    /// response.
    pub null_loglik: f64,
    pub linear_predictors: Vec<f64>,
    /// n x r matrix of fitted category probabilities.
    pub fitted_probs: Matrix,
    /// Training response codes, kept for response-dependent measures.
    pub response: Vec<u32>,
    pub converged: bool,
    pub iterations: u32,
    /// Sup norm of the score vector at the final iterate.
    pub gradient_norm: f64,
    /// Set when the coefficient norm diverged past the separation heuristic.
    pub separation: bool,
}

impl FittedModel {
    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn category_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_categories as usize];
        for &c in &self.response {
            counts[(c - 1) as usize] += 1;
        }
        counts
    }
}

/// Least-squares fit with intercept. Errors on rank-deficient designs and
/// constant responses.
pub fn fit_ols(data: &Dataset) -> Result<LinearFit> {
    let y = data.continuous_response()?;
    let n = data.n();
    let p = data.n_predictors();
    if n < p + 2 {
        return Err(Error::TooFewObservations { n, required: p + 2 });
    }

    let ybar = y.iter().sum::<f64>() / n as f64;
    let total_ss: f64 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum();
    if total_ss == 0.0 {
        return Err(Error::DegenerateResponse);
    }

    let x = data.design_matrix(true);
    let d = p + 1;
    let mut gram = vec![0.0f64; d * d];
    let mut xty = vec![0.0f64; d];
    for i in 0..n {
        let row = x.row(i);
        for a in 0..d {
            xty[a] += row[a] * y[i];
            for b in 0..=a {
                gram[a * d + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..d {
        for b in (a + 1)..d {
            gram[a * d + b] = gram[b * d + a];
        }
    }

    let mut factor = gram.clone();
    linalg::cholesky(&mut factor, d).map_err(|_| Error::SingularDesign)?;
    let mut beta = xty.clone();
    linalg::cholesky_solve(&factor, d, &mut beta);

    // One step of iterative refinement tightens the normal equations enough
    // for residual orthogonality checks.
    let mut resid = xty;
    for a in 0..d {
        for b in 0..d {
            resid[a] -= gram[a * d + b] * beta[b];
        }
    }
    linalg::cholesky_solve(&factor, d, &mut resid);
    for a in 0..d {
        beta[a] += resid[a];
    }

    let fitted: Vec<f64> = (0..n)
        .map(|i| x.row(i).iter().zip(&beta).map(|(xv, b)| xv * b).sum())
        .collect();
    let residual_ss: f64 = y
        .iter()
        .zip(&fitted)
        .map(|(yi, fi)| (yi - fi) * (yi - fi))
        .sum();

    let mut names = Vec::with_capacity(d);
    names.push(String::from("(Intercept)"));
    names.extend(data.column_names());

    Ok(LinearFit {
        names,
        coefficients: beta,
        fitted,
        residual_ss,
        total_ss,
        r_squared: 1.0 - residual_ss / total_ss,
    })
}

/// Thresholds-only model in closed form: with category counts n_j, the
/// maximized log-likelihood is sum_j n_j ln(n_j/n) and the thresholds are the
/// link quantiles of the cumulative proportions.
pub fn fit_null(codes: &[u32], n_categories: u32, link: LinkKind) -> Result<FittedModel> {
    if n_categories < 2 {
        return Err(Error::InvalidConfig("need at least 2 response categories"));
    }
    let n = codes.len();
    if n == 0 {
        return Err(Error::EmptyData);
    }
    let r = n_categories as usize;
    let mut counts = vec![0usize; r];
    for (row, &c) in codes.iter().enumerate() {
        if c < 1 || c > n_categories {
            return Err(Error::InvalidOrdinalCode { row, code: c, n_categories });
        }
        counts[(c - 1) as usize] += 1;
    }
    if let Some(j) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyCategory { category: (j + 1) as u32 });
    }

    let nf = n as f64;
    let loglik: f64 = counts
        .iter()
        .map(|&c| c as f64 * libm::log(c as f64 / nf))
        .sum();

    let mut thresholds = Vec::with_capacity(r - 1);
    let mut cum = 0usize;
    for &c in counts.iter().take(r - 1) {
        cum += c;
        thresholds.push(link.quantile(cum as f64 / nf)?);
    }

    let mut fitted_probs = Matrix::zeros(n, r);
    for i in 0..n {
        for (j, &c) in counts.iter().enumerate() {
            fitted_probs.set(i, j, c as f64 / nf);
        }
    }

    let x = Matrix::zeros(n, 0);
    let gradient_norm = clm::gradient_sup_norm(link, &x, codes, n_categories, &thresholds, &[]);

    Ok(FittedModel {
        link,
        predictor_names: Vec::new(),
        coefficients: Vec::new(),
        thresholds,
        n_categories,
        loglik,
        null_loglik: loglik,
        linear_predictors: vec![0.0; n],
        fitted_probs,
        response: codes.to_vec(),
        converged: true,
        iterations: 0,
        gradient_norm,
        separation: false,
    })
}

/// Category probabilities for new data under a fitted model. The column
/// names and order must match the fit.
pub fn predict_probs(model: &FittedModel, data: &Dataset) -> Result<Matrix> {
    let names = data.column_names();
    if names.len() != model.predictor_names.len()
        || names.iter().zip(&model.predictor_names).any(|(a, b)| a != b)
    {
        return Err(Error::SchemaMismatch {
            detail: alloc::format!(
                "fitted on columns {:?}, given {:?}",
                model.predictor_names,
                names
            ),
        });
    }
    let x = data.design_matrix(false);
    Ok(clm::probs_matrix(
        model.link,
        &x,
        &model.thresholds,
        &model.coefficients,
    ))
}
