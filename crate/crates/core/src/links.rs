//! Standard-normal and standard-logistic distribution functions used as
//! inverse links of the cumulative model.

use crate::{Error, Result};

const INV_SQRT_2PI: f64 = 0.39894228040143267793994605993438;
const SQRT_2PI: f64 = 2.5066282746310005024157652848110;
const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// Error distribution of the latent variable: probit (standard normal) or
/// logit (standard logistic).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum LinkKind {
    Probit,
    Logit,
}

impl LinkKind {
    /// Cumulative distribution function F(z).
    pub fn cdf(self, z: f64) -> Result<f64> {
        if !z.is_finite() {
            return Err(Error::NonFiniteInput(z));
        }
        Ok(self.cdf_raw(z))
    }

    /// Density f(z).
    pub fn pdf(self, z: f64) -> Result<f64> {
        if !z.is_finite() {
            return Err(Error::NonFiniteInput(z));
        }
        Ok(self.pdf_raw(z))
    }

    /// Quantile function F^{-1}(p) for p in the open interval (0, 1).
    pub fn quantile(self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        Ok(match self {
            LinkKind::Probit => normal_quantile(p),
            // log(p) - log1p(-p) keeps precision at both ends.
            LinkKind::Logit => libm::log(p) - libm::log1p(-p),
        })
    }

    /// Variance of the link's error distribution: 1 for probit, pi^2/3 for
    /// logit. Used by the McKelvey & Zavoina measure.
    pub fn error_variance(self) -> f64 {
        match self {
            LinkKind::Probit => 1.0,
            LinkKind::Logit => core::f64::consts::PI * core::f64::consts::PI / 3.0,
        }
    }

    /// CDF without the finiteness check; tolerates +/-inf.
    pub(crate) fn cdf_raw(self, z: f64) -> f64 {
        match self {
            LinkKind::Probit => 0.5 * libm::erfc(-z * FRAC_1_SQRT_2),
            LinkKind::Logit => {
                if z >= 0.0 {
                    1.0 / (1.0 + libm::exp(-z))
                } else {
                    let e = libm::exp(z);
                    e / (1.0 + e)
                }
            }
        }
    }

    /// Survival function 1 - F(z), computed directly for tail accuracy.
    pub(crate) fn sf_raw(self, z: f64) -> f64 {
        match self {
            LinkKind::Probit => 0.5 * libm::erfc(z * FRAC_1_SQRT_2),
            LinkKind::Logit => self.cdf_raw(-z),
        }
    }

    pub(crate) fn pdf_raw(self, z: f64) -> f64 {
        match self {
            LinkKind::Probit => INV_SQRT_2PI * libm::exp(-0.5 * z * z),
            LinkKind::Logit => {
                // exp(-|z|)/(1+exp(-|z|))^2 avoids overflow in either tail.
                let e = libm::exp(-libm::fabs(z));
                let d = 1.0 + e;
                e / (d * d)
            }
        }
    }

    /// Derivative of the density, f'(z). Needed for observed information.
    pub(crate) fn pdf_deriv_raw(self, z: f64) -> f64 {
        match self {
            LinkKind::Probit => -z * self.pdf_raw(z),
            LinkKind::Logit => self.pdf_raw(z) * (1.0 - 2.0 * self.cdf_raw(z)),
        }
    }

    /// P(z0 < Z <= z1) evaluated to high relative accuracy in both tails.
    /// Accepts infinite endpoints; `z0 <= z1` is assumed.
    pub(crate) fn interval_prob(self, z0: f64, z1: f64) -> f64 {
        // Difference the side where the CDF is far from 1, otherwise the
        // survival functions, so neither operand is a rounded-up 1.0.
        let p = if z0 + z1 > 0.0 {
            self.sf_raw(z0) - self.sf_raw(z1)
        } else {
            self.cdf_raw(z1) - self.cdf_raw(z0)
        };
        if p > 0.0 {
            p
        } else {
            0.0
        }
    }
}

/// Clamp applied to interval probabilities before taking logs in the
/// likelihood; keeps early Newton steps away from log(0).
pub(crate) fn clamp_loglik_prob(p: f64) -> f64 {
    p.clamp(1e-300, 1.0 - 1e-16)
}

/// Inverse standard-normal CDF: rational initial guess refined by Halley
/// steps against the erfc-based CDF, giving close to full f64 accuracy.
fn normal_quantile(p: f64) -> f64 {
    // Coefficients of the Acklam approximation (relative error < 1.2e-9).
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let mut x = if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = libm::sqrt(-2.0 * libm::log1p(-p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Two Halley refinements; skipped in the extreme tails where
    // exp(x^2/2) would overflow and the start value is already at the
    // limit of what the CDF can resolve.
    if libm::fabs(x) < 30.0 {
        for _ in 0..2 {
            let err = LinkKind::Probit.cdf_raw(x) - p;
            let u = err * SQRT_2PI * libm::exp(0.5 * x * x);
            x -= u / (1.0 + 0.5 * x * u);
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logit_closed_forms() {
        assert_eq!(LinkKind::Logit.cdf(0.0).unwrap(), 0.5);
        assert_eq!(LinkKind::Logit.pdf(0.0).unwrap(), 0.25);
        assert_eq!(LinkKind::Logit.quantile(0.5).unwrap(), 0.0);
        let ln3 = LinkKind::Logit.quantile(0.75).unwrap();
        assert!((ln3 - 1.0986122886681098).abs() < 1e-15, "got {ln3}");
    }

    #[test]
    fn probit_center_and_tail() {
        assert_eq!(LinkKind::Probit.cdf(0.0).unwrap(), 0.5);
        let d = LinkKind::Probit.pdf(0.0).unwrap();
        assert!((d - 0.3989422804014327).abs() < 1e-6);
        // Tail density underflows cleanly to zero.
        let tail = LinkKind::Probit.pdf(50.0).unwrap();
        assert_eq!(tail, 0.0);
        assert!(!tail.is_nan());
    }

    #[test]
    fn domain_errors() {
        assert!(LinkKind::Probit.cdf(f64::NAN).is_err());
        assert!(LinkKind::Logit.cdf(f64::INFINITY).is_err());
        assert!(LinkKind::Probit.pdf(f64::NEG_INFINITY).is_err());
        assert!(LinkKind::Probit.quantile(0.0).is_err());
        assert!(LinkKind::Probit.quantile(1.0).is_err());
        assert!(LinkKind::Logit.quantile(-0.25).is_err());
        assert!(LinkKind::Logit.quantile(f64::NAN).is_err());
    }

    #[test]
    fn interval_prob_tails() {
        // Both endpoints deep in the upper tail: survival differencing keeps
        // relative accuracy where naive CDF differencing returns 0.
        let p = LinkKind::Probit.interval_prob(10.0, 11.0);
        assert!(p > 0.0 && p < 1e-20);
        let q = LinkKind::Probit.interval_prob(-11.0, -10.0);
        assert!((p - q).abs() <= 1e-18 * p.max(q));
        assert_eq!(LinkKind::Probit.interval_prob(f64::NEG_INFINITY, f64::INFINITY), 1.0);
    }
}
