//! Newton fitting of the cumulative-link likelihood.
//!
//! The optimizer works on a transformed parameter vector
//! (tau_1, ln(tau_2 - tau_1), ..., ln(tau_{r-1} - tau_{r-2}), beta) so that
//! unconstrained steps cannot cross thresholds; gradients and Hessians are
//! evaluated in the natural (tau, beta) space and mapped through the chain
//! rule.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::linalg;
use crate::links::{clamp_loglik_prob, LinkKind};
use crate::matrix::Matrix;
use crate::{Error, Result};

use super::{fit_null, FittedModel};

/// Stopping rules and safeguards for [`fit_clm_with`].
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub max_iterations: u32,
    /// Sup-norm tolerance on the score vector.
    pub gradient_tol: f64,
    /// Alternative stop on the log-likelihood improvement.
    pub loglik_tol: f64,
    /// Maximum number of step halvings per Newton iteration.
    pub max_halvings: u32,
    /// Coefficient norm beyond which complete separation is suspected.
    pub separation_norm: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 100,
            gradient_tol: 1e-6,
            loglik_tol: 1e-10,
            max_halvings: 30,
            separation_norm: 1e3,
        }
    }
}

/// Fit a cumulative-link model with default options.
pub fn fit_clm(data: &Dataset, link: LinkKind) -> Result<FittedModel> {
    fit_clm_with(data, link, &FitOptions::default())
}

/// Fit a cumulative-link model by full Newton iteration with step halving,
/// falling back to Fisher scoring when the observed information is not
/// positive definite.
///
/// Non-convergence yields [`Error::NotConverged`] carrying the last iterate;
/// a fit that trips the separation heuristic is returned as `Ok` with the
/// `separation` flag set, since the likelihood-based summary measures remain
/// usable.
pub fn fit_clm_with(data: &Dataset, link: LinkKind, opts: &FitOptions) -> Result<FittedModel> {
    let (codes, n_categories) = data.ordinal_response()?;
    let n = data.n();
    let p = data.n_predictors();
    let r = n_categories as usize;
    let dim = r - 1 + p;
    if n < dim + 1 {
        return Err(Error::TooFewObservations { n, required: dim + 1 });
    }
    check_full_rank(data)?;

    let null = fit_null(codes, n_categories, link)?;
    let x = data.design_matrix(false);
    let ws = Workspace { link, x: &x, codes, r };

    let mut tau = null.thresholds.clone();
    let mut beta = vec![0.0f64; p];
    let mut eval = ws.eval(&tau, &beta);
    // The start point is the null MLE, whose likelihood has the closed form
    // already computed; use that sharper value so loglik >= null_loglik
    // holds exactly even when no step improves on the null.
    eval.loglik = null.loglik;
    let mut iterations = 0u32;
    // Best iterate seen (ties keep the latest point); restored at the end so
    // tolerated-equal line-search steps can never push the fit below the
    // null likelihood it starts from.
    let mut best = (eval.loglik, tau.clone(), beta.clone());
    let mut stalled_steps = 0u32;

    while iterations < opts.max_iterations && sup_norm(&eval.grad) >= opts.gradient_tol {
        iterations += 1;

        let theta = pack_transformed(&tau, &beta);
        let jac = transform_jacobian(&theta, r, p);
        let grad_t = mat_t_vec(&jac, dim, &eval.grad);

        // Newton direction from the observed information; Fisher scoring
        // (with an escalating ridge as a last resort) when that is not
        // negative definite.
        let step = newton_step(&ws, &tau, &beta, &eval, &jac, &grad_t, &theta, r, p);
        let Some(step) = step else { break };

        // Halve until the likelihood increases. Close to the optimum the
        // true improvement of a Newton step sits below f64 resolution of
        // the log-likelihood, so a step whose value ties up to rounding is
        // kept as a fallback: it still drives the gradient down.
        let slack = 1e-12 * (1.0 + eval.loglik.abs());
        let mut alpha = 1.0f64;
        let mut accepted = None;
        let mut fallback: Option<(Vec<f64>, Vec<f64>, f64)> = None;
        for _ in 0..=opts.max_halvings {
            let mut theta_try = theta.clone();
            for (t, s) in theta_try.iter_mut().zip(&step) {
                *t += alpha * s;
            }
            let (tau_try, beta_try) = unpack_transformed(&theta_try, r);
            let ll_try = ws.loglik(&tau_try, &beta_try);
            if ll_try.is_finite() && ll_try > eval.loglik {
                accepted = Some((tau_try, beta_try, ll_try));
                break;
            }
            if ll_try.is_finite() && ll_try >= eval.loglik - slack && fallback.is_none() {
                fallback = Some((tau_try, beta_try, ll_try));
            }
            alpha *= 0.5;
        }
        let Some((tau_new, beta_new, ll_new)) = accepted.or(fallback) else { break };
        let improvement = ll_new - eval.loglik;
        tau = tau_new;
        beta = beta_new;
        eval = ws.eval(&tau, &beta);
        if eval.loglik >= best.0 {
            best = (eval.loglik, tau.clone(), beta.clone());
        }
        // Two consecutive iterations without measurable improvement mean the
        // likelihood has genuinely flattened out; a single one is routinely
        // the second-to-last step of quadratic convergence.
        if improvement.abs() < opts.loglik_tol {
            stalled_steps += 1;
            if stalled_steps >= 2 {
                break;
            }
        } else {
            stalled_steps = 0;
        }
    }

    if best.0 > eval.loglik {
        tau = best.1;
        beta = best.2;
        eval = ws.eval(&tau, &beta);
        // Same point, best known value.
        eval.loglik = best.0;
    }

    let gradient_norm = sup_norm(&eval.grad);
    let converged = gradient_norm < opts.gradient_tol;
    let separation = l2_norm(&beta) > opts.separation_norm;

    let linear_predictors: Vec<f64> = (0..n).map(|i| dot(ws.x.row(i), &beta)).collect();
    let fitted_probs = probs_matrix(link, &x, &tau, &beta);

    let model = FittedModel {
        link,
        predictor_names: data.column_names(),
        coefficients: beta,
        thresholds: tau,
        n_categories,
        loglik: eval.loglik,
        null_loglik: null.loglik,
        linear_predictors,
        fitted_probs,
        response: codes.to_vec(),
        converged,
        iterations,
        gradient_norm,
        separation,
    };

    if converged || separation {
        Ok(model)
    } else {
        Err(Error::NotConverged(Box::new(model)))
    }
}

/// Log-likelihood, score and observed Hessian of the cumulative model at
/// (thresholds, coefficients), in that parameter order. Thresholds must be
/// strictly increasing.
pub fn loglik_grad_hess(
    data: &Dataset,
    link: LinkKind,
    thresholds: &[f64],
    coefficients: &[f64],
) -> Result<(f64, Vec<f64>, Matrix)> {
    let (codes, n_categories) = data.ordinal_response()?;
    let r = n_categories as usize;
    if thresholds.len() != r - 1 {
        return Err(Error::LengthMismatch { expected: r - 1, found: thresholds.len() });
    }
    if coefficients.len() != data.n_predictors() {
        return Err(Error::LengthMismatch {
            expected: data.n_predictors(),
            found: coefficients.len(),
        });
    }
    if let Some(bad) = thresholds.iter().chain(coefficients).find(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput(*bad));
    }
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::ThresholdOrder);
    }
    let x = data.design_matrix(false);
    let ws = Workspace { link, x: &x, codes, r };
    let eval = ws.eval(thresholds, coefficients);
    let dim = r - 1 + coefficients.len();
    Ok((
        eval.loglik,
        eval.grad,
        Matrix::from_row_major(dim, dim, eval.hess),
    ))
}

/// Sup norm of the score at the given parameters (used by the closed-form
/// null fit to report an honest gradient norm).
pub(crate) fn gradient_sup_norm(
    link: LinkKind,
    x: &Matrix,
    codes: &[u32],
    n_categories: u32,
    thresholds: &[f64],
    coefficients: &[f64],
) -> f64 {
    let ws = Workspace { link, x, codes, r: n_categories as usize };
    sup_norm(&ws.eval(thresholds, coefficients).grad)
}

/// Fitted category probabilities from consecutive CDF differences, so each
/// row telescopes to one up to rounding.
pub(crate) fn probs_matrix(link: LinkKind, x: &Matrix, tau: &[f64], beta: &[f64]) -> Matrix {
    let n = x.rows();
    let r = tau.len() + 1;
    let mut probs = Matrix::zeros(n, r);
    for i in 0..n {
        let eta = dot(x.row(i), beta);
        let mut lower = 0.0f64;
        for j in 0..r {
            let upper = if j + 1 < r { link.cdf_raw(tau[j] - eta) } else { 1.0 };
            probs.set(i, j, (upper - lower).max(0.0));
            lower = upper;
        }
    }
    probs
}

// The design must have full column rank jointly with the implicit intercept;
// a constant column would be aliased with the thresholds.
fn check_full_rank(data: &Dataset) -> Result<()> {
    let x = data.design_matrix(true);
    let d = x.cols();
    let n = x.rows();
    let mut gram = vec![0.0f64; d * d];
    for i in 0..n {
        let row = x.row(i);
        for a in 0..d {
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
    linalg::cholesky(&mut gram, d).map_err(|_| Error::SingularDesign)
}

struct Workspace<'a> {
    link: LinkKind,
    x: &'a Matrix,
    codes: &'a [u32],
    r: usize,
}

struct EvalResult {
    loglik: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

impl Workspace<'_> {
    fn dim(&self) -> usize {
        self.r - 1 + self.x.cols()
    }

    fn loglik(&self, tau: &[f64], beta: &[f64]) -> f64 {
        let mut ll = 0.0f64;
        for i in 0..self.x.rows() {
            let eta = dot(self.x.row(i), beta);
            let j = self.codes[i] as usize;
            let z1 = if j < self.r { tau[j - 1] - eta } else { f64::INFINITY };
            let z0 = if j > 1 { tau[j - 2] - eta } else { f64::NEG_INFINITY };
            ll += libm::log(clamp_loglik_prob(self.link.interval_prob(z0, z1)));
        }
        ll
    }

    /// Log-likelihood, score and observed Hessian in the natural
    /// (tau, beta) parameterization.
    fn eval(&self, tau: &[f64], beta: &[f64]) -> EvalResult {
        let p = self.x.cols();
        let d = self.dim();
        let mut ll = 0.0f64;
        let mut grad = vec![0.0f64; d];
        let mut hess = vec![0.0f64; d * d];

        for i in 0..self.x.rows() {
            let row = self.x.row(i);
            let eta = dot(row, beta);
            let j = self.codes[i] as usize;

            let (z1, f1, d1, up) = if j < self.r {
                let z = tau[j - 1] - eta;
                (z, self.link.pdf_raw(z), self.link.pdf_deriv_raw(z), true)
            } else {
                (f64::INFINITY, 0.0, 0.0, false)
            };
            let (z0, f0, d0, lo) = if j > 1 {
                let z = tau[j - 2] - eta;
                (z, self.link.pdf_raw(z), self.link.pdf_deriv_raw(z), true)
            } else {
                (f64::NEG_INFINITY, 0.0, 0.0, false)
            };

            let pi = clamp_loglik_prob(self.link.interval_prob(z0, z1));
            ll += libm::log(pi);

            let a1 = f1 / pi;
            let a0 = f0 / pi;
            let u = a1 - a0;

            if up {
                grad[j - 1] += a1;
            }
            if lo {
                grad[j - 2] -= a0;
            }
            for m in 0..p {
                grad[self.r - 1 + m] -= u * row[m];
            }

            // Observed Hessian, lower triangle.
            if up {
                hess[(j - 1) * d + (j - 1)] += d1 / pi - a1 * a1;
            }
            if lo {
                hess[(j - 2) * d + (j - 2)] += -d0 / pi - a0 * a0;
            }
            if up && lo {
                hess[(j - 1) * d + (j - 2)] += a1 * a0;
            }
            for m in 0..p {
                let bm = self.r - 1 + m;
                if up {
                    hess[bm * d + (j - 1)] -= row[m] * (d1 / pi - a1 * u);
                }
                if lo {
                    hess[bm * d + (j - 2)] += row[m] * (d0 / pi - a0 * u);
                }
                let w = (d1 - d0) / pi - u * u;
                for l in 0..=m {
                    hess[bm * d + (self.r - 1 + l)] += row[m] * row[l] * w;
                }
            }
        }

        for a in 0..d {
            for b in (a + 1)..d {
                hess[a * d + b] = hess[b * d + a];
            }
        }
        EvalResult { loglik: ll, grad, hess }
    }

    /// Expected (Fisher) information, positive semidefinite by construction.
    fn expected_info(&self, tau: &[f64], beta: &[f64]) -> Vec<f64> {
        let p = self.x.cols();
        let d = self.dim();
        let r = self.r;
        let mut info = vec![0.0f64; d * d];
        let mut dvec = vec![0.0f64; d];
        let mut cum = vec![0.0f64; r + 1];
        let mut dens = vec![0.0f64; r + 1];

        for i in 0..self.x.rows() {
            let row = self.x.row(i);
            let eta = dot(row, beta);
            cum[0] = 0.0;
            dens[0] = 0.0;
            cum[r] = 1.0;
            dens[r] = 0.0;
            for j in 1..r {
                let z = tau[j - 1] - eta;
                cum[j] = self.link.cdf_raw(z);
                dens[j] = self.link.pdf_raw(z);
            }
            for j in 1..=r {
                let pi = cum[j] - cum[j - 1];
                if pi < 1e-12 {
                    continue;
                }
                for v in dvec.iter_mut() {
                    *v = 0.0;
                }
                if j < r {
                    dvec[j - 1] = dens[j];
                }
                if j > 1 {
                    dvec[j - 2] -= dens[j - 1];
                }
                let df = dens[j] - dens[j - 1];
                for m in 0..p {
                    dvec[r - 1 + m] = -row[m] * df;
                }
                let w = 1.0 / pi;
                for a in 0..d {
                    if dvec[a] == 0.0 {
                        continue;
                    }
                    for b in 0..=a {
                        info[a * d + b] += w * dvec[a] * dvec[b];
                    }
                }
            }
        }
        for a in 0..d {
            for b in (a + 1)..d {
                info[a * d + b] = info[b * d + a];
            }
        }
        info
    }
}

fn newton_step(
    ws: &Workspace<'_>,
    tau: &[f64],
    beta: &[f64],
    eval: &EvalResult,
    jac: &[f64],
    grad_t: &[f64],
    theta: &[f64],
    r: usize,
    p: usize,
) -> Option<Vec<f64>> {
    let dim = r - 1 + p;

    // Observed information in the transformed space, including the
    // curvature of the exp reparameterization.
    let mut h_t = congruence(jac, &eval.hess, dim);
    for k in 2..r {
        let e = libm::exp(theta[k - 1]);
        let gsum: f64 = ((k - 1)..(r - 1)).map(|j| eval.grad[j]).sum();
        h_t[(k - 1) * dim + (k - 1)] += e * gsum;
    }
    let neg_h: Vec<f64> = h_t.iter().map(|v| -v).collect();
    if let Some(step) = linalg::solve_spd(&neg_h, dim, grad_t) {
        return Some(step);
    }

    // Fisher scoring fallback.
    let info = ws.expected_info(tau, beta);
    let info_t = congruence(jac, &info, dim);
    if let Some(step) = linalg::solve_spd(&info_t, dim, grad_t) {
        return Some(step);
    }

    // Escalating ridge on the expected information.
    let max_diag = (0..dim)
        .map(|a| info_t[a * dim + a].abs())
        .fold(f64::MIN_POSITIVE, f64::max);
    let mut ridge = 1e-8 * max_diag;
    for _ in 0..20 {
        let mut damped = info_t.clone();
        for a in 0..dim {
            damped[a * dim + a] += ridge;
        }
        if let Some(step) = linalg::solve_spd(&damped, dim, grad_t) {
            return Some(step);
        }
        ridge *= 10.0;
    }
    None
}

/// (tau, beta) -> (tau_1, ln increments, beta).
fn pack_transformed(tau: &[f64], beta: &[f64]) -> Vec<f64> {
    let mut theta = Vec::with_capacity(tau.len() + beta.len());
    theta.push(tau[0]);
    for w in tau.windows(2) {
        theta.push(libm::log(w[1] - w[0]));
    }
    theta.extend_from_slice(beta);
    theta
}

fn unpack_transformed(theta: &[f64], r: usize) -> (Vec<f64>, Vec<f64>) {
    let mut tau = Vec::with_capacity(r - 1);
    let mut t = theta[0];
    tau.push(t);
    for k in 2..r {
        t += libm::exp(theta[k - 1]);
        tau.push(t);
    }
    let beta = theta[r - 1..].to_vec();
    (tau, beta)
}

/// Jacobian d(tau, beta)/d(theta), row-major dim x dim.
fn transform_jacobian(theta: &[f64], r: usize, p: usize) -> Vec<f64> {
    let dim = r - 1 + p;
    let mut jac = vec![0.0f64; dim * dim];
    for j in 0..(r - 1) {
        jac[j * dim] = 1.0;
        for k in 2..=(j + 1) {
            jac[j * dim + (k - 1)] = libm::exp(theta[k - 1]);
        }
    }
    for m in 0..p {
        let idx = r - 1 + m;
        jac[idx * dim + idx] = 1.0;
    }
    jac
}

/// J^T A J for square row-major matrices.
fn congruence(jac: &[f64], a: &[f64], d: usize) -> Vec<f64> {
    let mut aj = vec![0.0f64; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..d {
                aj[i * d + j] += aik * jac[k * d + j];
            }
        }
    }
    let mut out = vec![0.0f64; d * d];
    for i in 0..d {
        for k in 0..d {
            let jki = jac[k * d + i];
            if jki == 0.0 {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += jki * aj[k * d + j];
            }
        }
    }
    out
}

fn mat_t_vec(jac: &[f64], d: usize, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0f64; d];
    for k in 0..d {
        let vk = v[k];
        if vk == 0.0 {
            continue;
        }
        for j in 0..d {
            out[j] += jac[k * d + j] * vk;
        }
    }
    out
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(libm::fabs(*x)))
}

fn l2_norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}
