//! Summary measures of predictive strength: the penalized likelihood-ratio
//! index and the comparison pseudo-R-squared family.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;

use crate::estimation::FittedModel;
use crate::links::LinkKind;
use crate::{Error, Result};

/// Numerical slack admitted before the likelihood ordering is treated as
/// violated rather than rounded.
const ORDER_SLACK: f64 = 1e-12;

/// Penalty function lambda(r) applied as an exponent to the likelihood
/// ratio. `L0` is the constant 1 (collapsing the modified measure to the
/// plain likelihood-ratio index); `Constant` is a user-chosen value.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PenaltySpec {
    L0,
    L1,
    L2,
    L3,
    L4,
    L5,
    L6,
    Constant(f64),
}

impl PenaltySpec {
    /// All six candidate penalties.
    pub const CANDIDATES: [PenaltySpec; 6] = [
        PenaltySpec::L1,
        PenaltySpec::L2,
        PenaltySpec::L3,
        PenaltySpec::L4,
        PenaltySpec::L5,
        PenaltySpec::L6,
    ];

    /// Evaluate lambda(r) for r >= 2 response categories.
    pub fn evaluate(&self, n_categories: u32) -> Result<f64> {
        if n_categories < 2 {
            return Err(Error::PenaltyDomain);
        }
        let r = n_categories as f64;
        Ok(match self {
            PenaltySpec::L0 => 1.0,
            PenaltySpec::L1 => r,
            PenaltySpec::L2 => libm::sqrt(2.0 * r),
            PenaltySpec::L3 => 2.0 + libm::sqrt(r - 2.0),
            PenaltySpec::L4 => 1.0 + libm::log2(r),
            PenaltySpec::L5 => 2.0 + libm::log2(r - 1.0),
            PenaltySpec::L6 => 2.0 + libm::pow(r - 2.0, 1.5),
            PenaltySpec::Constant(c) => {
                if !(*c > 0.0) {
                    return Err(Error::PenaltyDomain);
                }
                *c
            }
        })
    }

    /// Stable measure identifier used in JSON/CSV outputs.
    pub fn measure_id(&self) -> String {
        match self {
            PenaltySpec::L0 => String::from("ug:l0"),
            PenaltySpec::L1 => String::from("ug:l1"),
            PenaltySpec::L2 => String::from("ug:l2"),
            PenaltySpec::L3 => String::from("ug:l3"),
            PenaltySpec::L4 => String::from("ug:l4"),
            PenaltySpec::L5 => String::from("ug:l5"),
            PenaltySpec::L6 => String::from("ug:l6"),
            PenaltySpec::Constant(c) => format!("ug:const:{c}"),
        }
    }
}

impl core::str::FromStr for PenaltySpec {
    type Err = Error;

    /// Parses `l0`..`l6` and `const:<value>` (value > 0).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l0" => Ok(PenaltySpec::L0),
            "l1" => Ok(PenaltySpec::L1),
            "l2" => Ok(PenaltySpec::L2),
            "l3" => Ok(PenaltySpec::L3),
            "l4" => Ok(PenaltySpec::L4),
            "l5" => Ok(PenaltySpec::L5),
            "l6" => Ok(PenaltySpec::L6),
            other => {
                if let Some(v) = other.strip_prefix("const:") {
                    let c: f64 = v.parse().map_err(|_| Error::UnknownPenalty(other.into()))?;
                    if c > 0.0 && c.is_finite() {
                        Ok(PenaltySpec::Constant(c))
                    } else {
                        Err(Error::PenaltyDomain)
                    }
                } else {
                    Err(Error::UnknownPenalty(other.into()))
                }
            }
        }
    }
}

/// Evaluate a penalty; free-function form of [`PenaltySpec::evaluate`].
pub fn penalty(spec: &PenaltySpec, n_categories: u32) -> Result<f64> {
    spec.evaluate(n_categories)
}

fn check_logliks(loglik_full: f64, loglik_null: f64) -> Result<()> {
    if !loglik_full.is_finite() || !loglik_null.is_finite() {
        return Err(Error::UndefinedMeasure("non-finite log-likelihood"));
    }
    if loglik_null >= 0.0 {
        return Err(Error::UndefinedMeasure(
            "null log-likelihood must be negative (degenerate single-category response)",
        ));
    }
    if loglik_full > 0.0 {
        return Err(Error::UndefinedMeasure("positive full log-likelihood"));
    }
    Ok(())
}

/// Likelihood ratio gamma_r = loglik_full / loglik_null in [0, 1].
fn likelihood_ratio(loglik_full: f64, loglik_null: f64) -> Result<f64> {
    check_logliks(loglik_full, loglik_null)?;
    let gamma = loglik_full / loglik_null;
    if gamma < -ORDER_SLACK || gamma > 1.0 + ORDER_SLACK {
        return Err(Error::UndefinedMeasure(
            "log-likelihoods violate the nesting order",
        ));
    }
    Ok(gamma.clamp(0.0, 1.0))
}

/// McFadden's likelihood ratio index, 1 - loglik_full/loglik_null.
pub fn r2_mcfadden(loglik_full: f64, loglik_null: f64) -> Result<f64> {
    Ok(1.0 - likelihood_ratio(loglik_full, loglik_null)?)
}

/// The penalized likelihood-ratio index 1 - gamma_r^lambda(r). With the
/// `L0` penalty this equals [`r2_mcfadden`] exactly.
pub fn r2_modified(
    loglik_full: f64,
    loglik_null: f64,
    n_categories: u32,
    spec: &PenaltySpec,
) -> Result<f64> {
    let gamma = likelihood_ratio(loglik_full, loglik_null)?;
    let lambda = spec.evaluate(n_categories)?;
    // pow(x, 1.0) == x on every libm, but keep the exponent-1 collapse
    // bit-exact by construction.
    let powed = if lambda == 1.0 { gamma } else { libm::pow(gamma, lambda) };
    Ok((1.0 - powed).clamp(0.0, 1.0))
}

/// Cox & Snell R-squared, 1 - exp(2(loglik_null - loglik_full)/n).
pub fn r2_cox_snell(loglik_full: f64, loglik_null: f64, n: usize) -> Result<f64> {
    check_logliks(loglik_full, loglik_null)?;
    if n == 0 {
        return Err(Error::UndefinedMeasure("empty sample"));
    }
    let value = 1.0 - libm::exp(2.0 * (loglik_null - loglik_full) / n as f64);
    Ok(value.clamp(0.0, 1.0))
}

/// Nagelkerke's correction, Cox & Snell rescaled by its attainable maximum.
pub fn r2_nagelkerke(loglik_full: f64, loglik_null: f64, n: usize) -> Result<f64> {
    let cs = r2_cox_snell(loglik_full, loglik_null, n)?;
    let max = 1.0 - libm::exp(2.0 * loglik_null / n as f64);
    if max <= 0.0 {
        return Err(Error::UndefinedMeasure("null likelihood at its maximum"));
    }
    Ok((cs / max).clamp(0.0, 1.0))
}

/// McKelvey & Zavoina's latent-variance ratio Var(eta)/(Var(eta) + s2),
/// where s2 is the link error variance and Var uses denominator n.
pub fn r2_mckelvey_zavoina(linear_predictors: &[f64], link: LinkKind) -> Result<f64> {
    let n = linear_predictors.len();
    if n < 2 {
        return Err(Error::UndefinedMeasure("need at least 2 observations"));
    }
    let mean = linear_predictors.iter().sum::<f64>() / n as f64;
    let var = linear_predictors
        .iter()
        .map(|e| (e - mean) * (e - mean))
        .sum::<f64>()
        / n as f64;
    Ok(var / (var + link.error_variance()))
}

/// Tjur's coefficient of discrimination for binary responses coded 1/2:
/// mean fitted event probability among events minus among non-events.
/// The raw value lies in [-1, 1]; clamping of negative values is the
/// report's concern.
pub fn r2_tjur(event_probs: &[f64], codes: &[u32]) -> Result<f64> {
    if event_probs.len() != codes.len() {
        return Err(Error::UndefinedMeasure("probability/response length mismatch"));
    }
    if codes.iter().any(|&c| c != 1 && c != 2) {
        return Err(Error::InapplicableMeasure("binary responses only"));
    }
    let (mut s1, mut n1, mut s0, mut n0) = (0.0f64, 0usize, 0.0f64, 0usize);
    for (&p, &c) in event_probs.iter().zip(codes) {
        if c == 2 {
            s1 += p;
            n1 += 1;
        } else {
            s0 += p;
            n0 += 1;
        }
    }
    if n1 == 0 || n0 == 0 {
        return Err(Error::UndefinedMeasure("single-class response"));
    }
    Ok(s1 / n1 as f64 - s0 / n0 as f64)
}

/// Everything the measures need, keyed by the stable measure identifiers.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GofReport {
    pub n: usize,
    pub n_categories: u32,
    pub loglik_full: f64,
    pub loglik_null: f64,
    /// Likelihood ratio loglik_full/loglik_null in [0, 1].
    pub gamma_r: f64,
    /// Model chi-square -2(loglik_null - loglik_full).
    pub g_statistic: f64,
    pub measures: BTreeMap<String, f64>,
    /// Measures that could not be computed, with reason codes.
    pub skipped: BTreeMap<String, String>,
    /// Diagnostics, e.g. `mz -> extended` beyond the binary case or
    /// `tj -> clamped-negative`.
    pub notes: BTreeMap<String, String>,
}

/// Assemble the full report for a fitted model: McFadden, Cox & Snell,
/// Nagelkerke and McKelvey & Zavoina always, Tjur for binary fits, and the
/// modified measure for each requested penalty. Undefined measures become
/// skipped entries with reason codes rather than failures.
pub fn gof_report(model: &FittedModel, penalties: &[PenaltySpec]) -> GofReport {
    let n = model.n();
    let r = model.n_categories;
    let lp = model.loglik;
    let l0 = model.null_loglik;

    let mut measures = BTreeMap::new();
    let mut skipped = BTreeMap::new();
    let mut notes = BTreeMap::new();

    let put = |key: &str,
                   result: Result<f64>,
                   measures: &mut BTreeMap<String, f64>,
                   skipped: &mut BTreeMap<String, String>| {
        match result {
            Ok(v) => {
                measures.insert(String::from(key), v);
            }
            Err(e) => {
                skipped.insert(String::from(key), format!("{e}"));
            }
        }
    };

    put("mf", r2_mcfadden(lp, l0), &mut measures, &mut skipped);
    put("cs", r2_cox_snell(lp, l0, n), &mut measures, &mut skipped);
    put("nk", r2_nagelkerke(lp, l0, n), &mut measures, &mut skipped);
    put(
        "mz",
        r2_mckelvey_zavoina(&model.linear_predictors, model.link),
        &mut measures,
        &mut skipped,
    );
    if r > 2 {
        notes.insert(String::from("mz"), String::from("extended"));
    }

    if r == 2 {
        let event_probs = model.fitted_probs.column(1);
        match r2_tjur(&event_probs, &model.response) {
            Ok(v) => {
                if v < 0.0 {
                    notes.insert(String::from("tj"), String::from("clamped-negative"));
                    measures.insert(String::from("tj"), 0.0);
                } else {
                    measures.insert(String::from("tj"), v);
                }
            }
            Err(e) => {
                skipped.insert(String::from("tj"), format!("{e}"));
            }
        }
    } else {
        skipped.insert(
            String::from("tj"),
            String::from("inapplicable: more than 2 categories"),
        );
    }

    for spec in penalties {
        put(
            &spec.measure_id(),
            r2_modified(lp, l0, r, spec),
            &mut measures,
            &mut skipped,
        );
    }

    let gamma_r = likelihood_ratio(lp, l0).unwrap_or(f64::NAN);
    GofReport {
        n,
        n_categories: r,
        loglik_full: lp,
        loglik_null: l0,
        gamma_r,
        g_statistic: (2.0 * (lp - l0)).max(0.0),
        measures,
        skipped,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn penalty_formulas() {
        for spec in PenaltySpec::CANDIDATES {
            let v = spec.evaluate(2).unwrap();
            assert!((v - 2.0).abs() < 1e-15, "{spec:?} at r=2 gave {v}");
        }
        assert_eq!(PenaltySpec::L1.evaluate(5).unwrap(), 5.0);
        let l6 = PenaltySpec::L6.evaluate(10).unwrap();
        assert!((l6 - 24.627416997969522).abs() < 1e-12);
        assert!(PenaltySpec::L2.evaluate(1).is_err());
        assert!(PenaltySpec::Constant(0.0).evaluate(3).is_err());
    }

    #[test]
    fn penalty_parsing() {
        assert_eq!("l2".parse::<PenaltySpec>().unwrap(), PenaltySpec::L2);
        assert_eq!(
            "const:3".parse::<PenaltySpec>().unwrap(),
            PenaltySpec::Constant(3.0)
        );
        assert_eq!(PenaltySpec::Constant(3.0).measure_id(), "ug:const:3");
        assert!("const:-1".parse::<PenaltySpec>().is_err());
        assert!("l7".parse::<PenaltySpec>().is_err());
    }

    #[test]
    fn mcfadden_basics() {
        assert_eq!(r2_mcfadden(-100.0, -100.0).unwrap(), 0.0);
        let v = r2_mcfadden(-80.0, -100.0).unwrap();
        assert!((v - 0.2).abs() < 1e-15);
        assert!(r2_mcfadden(-80.0, 0.0).is_err());
        // Full model cannot be worse than the null beyond slack.
        assert!(r2_mcfadden(-100.1, -100.0).is_err());
    }

    #[test]
    fn modified_binary_identity() {
        // gamma = 0.841 at r = 2: every candidate penalty gives 1 - gamma^2.
        let (lp, l0) = (-84.1, -100.0);
        let mf = r2_mcfadden(lp, l0).unwrap();
        for spec in PenaltySpec::CANDIDATES {
            let v = r2_modified(lp, l0, 2, &spec).unwrap();
            assert!((v - (1.0 - (1.0 - mf) * (1.0 - mf))).abs() < 1e-15);
            assert!((v - 0.292719).abs() < 5e-7);
        }
        // L0 collapse is exact.
        assert_eq!(r2_modified(lp, l0, 2, &PenaltySpec::L0).unwrap(), mf);
        // gamma = 1 gives 0 under every spec.
        for spec in PenaltySpec::CANDIDATES {
            assert_eq!(r2_modified(-50.0, -50.0, 4, &spec).unwrap(), 0.0);
        }
    }

    #[test]
    fn modified_ordinal_value() {
        // gamma = 0.861 at r = 5 under the square-root penalty.
        let (lp, l0) = (-86.1, -100.0);
        let v = r2_modified(lp, l0, 5, &PenaltySpec::L2).unwrap();
        let expect = 1.0 - libm::pow(0.861, libm::sqrt(10.0));
        assert!((v - expect).abs() < 1e-12);
        assert!((v - 0.377).abs() < 5e-4);
    }

    #[test]
    fn cox_snell_and_nagelkerke() {
        assert_eq!(r2_cox_snell(-100.0, -100.0, 50).unwrap(), 0.0);
        let cs = r2_cox_snell(-80.0, -100.0, 100).unwrap();
        assert!((cs - 0.3296799539643607).abs() < 1e-15);
        let nk = r2_nagelkerke(-80.0, -100.0, 100).unwrap();
        assert!(nk >= cs);
        assert_eq!(r2_nagelkerke(-100.0, -100.0, 100).unwrap(), 0.0);
    }

    #[test]
    fn mckelvey_zavoina_values() {
        assert_eq!(
            r2_mckelvey_zavoina(&[0.3, 0.3, 0.3], LinkKind::Probit).unwrap(),
            0.0
        );
        // Var = 1 under probit gives 1/2: predictors (-1, 1) have n-variance 1.
        let v = r2_mckelvey_zavoina(&[-1.0, 1.0], LinkKind::Probit).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert!(r2_mckelvey_zavoina(&[0.1], LinkKind::Logit).is_err());
    }

    #[test]
    fn tjur_values() {
        let v = r2_tjur(&[0.8, 0.2], &[2, 1]).unwrap();
        assert!((v - 0.6).abs() < 1e-15);
        assert_eq!(r2_tjur(&[1.0, 0.0, 1.0], &[2, 1, 2]).unwrap(), 1.0);
        assert!(matches!(
            r2_tjur(&[0.5, 0.5], &[2, 2]),
            Err(Error::UndefinedMeasure(_))
        ));
        assert!(matches!(
            r2_tjur(&[0.5, 0.5], &[1, 3]),
            Err(Error::InapplicableMeasure(_))
        ));
    }

    #[test]
    fn countervailing_direction() {
        // For fixed gamma < 1 the modified measure increases with r under
        // every monotone penalty.
        let (lp, l0) = (-70.0, -100.0);
        for spec in PenaltySpec::CANDIDATES {
            let mut prev = r2_modified(lp, l0, 2, &spec).unwrap();
            for r in 3..=10 {
                let next = r2_modified(lp, l0, r, &spec).unwrap();
                assert!(next > prev, "{spec:?} not increasing at r={r}");
                prev = next;
            }
        }
    }

    #[test]
    fn order_preservation() {
        // Monotone transform of gamma: ranking by mf matches ranking by the
        // modified measure at fixed r and penalty.
        let l0 = -200.0;
        let pairs = vec![(-150.0, -120.0), (-199.0, -60.0), (-180.0, -179.0)];
        for (a, b) in pairs {
            for spec in PenaltySpec::CANDIDATES {
                let mf_a = r2_mcfadden(a, l0).unwrap();
                let mf_b = r2_mcfadden(b, l0).unwrap();
                let mod_a = r2_modified(a, l0, 6, &spec).unwrap();
                let mod_b = r2_modified(b, l0, 6, &spec).unwrap();
                assert_eq!(mf_a > mf_b, mod_a > mod_b);
            }
        }
    }
}
