//! Acceptance suite: one test per criterion, each printing a PASS/SKIP line.
//!
//! The sensory-data reproduction needs the real dataset CSV (columns for the
//! average panel rating, androstenone and skatole); point ORDR2_SENSORY_CSV
//! at it or place it at data/sensory.csv under the workspace root. Column
//! names can be overridden via ORDR2_SENSORY_{RATING,AN,SK}_COL.

use std::path::PathBuf;
use std::sync::OnceLock;

use ordr2::runner::run_experiment_parallel;
use ordr2::sensory::{preprocess_sensory, SensoryPipelineSpec};
use ordr2::table::read_table;
use ordr2_core::gof::{gof_report, PenaltySpec};
use ordr2_core::sim::{AggRow, SimConfig, SimSetting};
use ordr2_core::{
    fit_clm, fit_null, fit_ols, loglik_grad_hess, Column, Dataset, Error, FittedModel, LinkKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const ACCEPT_SEED: u64 = 20230149;

fn mean_of(table: &[AggRow], sigma: f64, r: u32, measure: &str) -> f64 {
    table
        .iter()
        .find(|a| a.sigma == sigma && a.r == r && a.measure == measure)
        .unwrap_or_else(|| panic!("missing aggregate for sigma={sigma} r={r} {measure}"))
        .mean
}

/// Setting (a), n = 1000, sigma = 1, r = 2..10, probit, 200 replications.
fn category_grid_study() -> &'static Vec<AggRow> {
    static TABLE: OnceLock<Vec<AggRow>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut config = SimConfig::new(SimSetting::SingleDistribution, ACCEPT_SEED);
        config.n_grid = vec![1000];
        config.sigma_grid = vec![1.0];
        config.r_grid = (2..=10).collect();
        config.replications = 200;
        run_experiment_parallel(&config).expect("experiment").1
    })
}

/// Setting (a), n = 500, sigma in {1, 4}, r = 2, probit, 200 replications.
fn binary_delta_study(noise: u32) -> Vec<AggRow> {
    let mut config = SimConfig::new(SimSetting::SingleDistribution, ACCEPT_SEED);
    config.n_grid = vec![500];
    config.sigma_grid = vec![1.0, 4.0];
    config.r_grid = vec![2];
    config.replications = 200;
    config.noise_covariates = noise;
    run_experiment_parallel(&config).expect("experiment").1
}

fn sensory_csv_path() -> Option<PathBuf> {
    if let Ok(path) = std::env::var("ORDR2_SENSORY_CSV") {
        let path = PathBuf::from(path);
        return path.exists().then_some(path);
    }
    let fallback = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/sensory.csv");
    fallback.exists().then_some(fallback)
}

fn env_or(name: &str, default: &str) -> String {
    std::env::var(name).unwrap_or_else(|_| default.to_owned())
}

#[test]
fn sensory_reproduction() {
    let Some(path) = sensory_csv_path() else {
        println!(
            "ACCEPTANCE sensory_reproduction: SKIP — sensory CSV not found; \
             set ORDR2_SENSORY_CSV or place data/sensory.csv at the workspace root"
        );
        return;
    };
    let table = read_table(&path).expect("readable sensory CSV");
    let spec = SensoryPipelineSpec {
        rating_column: env_or("ORDR2_SENSORY_RATING_COL", "rating"),
        androstenone_column: env_or("ORDR2_SENSORY_AN_COL", "androstenone"),
        skatole_column: env_or("ORDR2_SENSORY_SK_COL", "skatole"),
        ..Default::default()
    };
    let out = preprocess_sensory(&table, &spec).expect("pipeline");

    // Linear model.
    let linear = fit_ols(&out.linear).expect("linear fit");
    assert!((linear.r_squared - 0.379).abs() <= 0.001, "ols r2 {}", linear.r_squared);
    for (name, expect) in [("AN", 0.179), ("SK", 0.403), ("AN:SK", 0.092)] {
        let idx = linear.names.iter().position(|n| n == name).unwrap();
        let got = linear.coefficients[idx];
        assert!((got - expect).abs() <= 0.002, "linear {name}: {got} vs {expect}");
    }

    let penalties = [
        PenaltySpec::L1,
        PenaltySpec::L2,
        PenaltySpec::L3,
        PenaltySpec::L4,
        PenaltySpec::L5,
        PenaltySpec::L6,
    ];

    // Binary probit model.
    let binary = fit_clm(&out.binary, LinkKind::Probit).expect("binary fit");
    let report = gof_report(&binary, &penalties);
    for (key, expect) in [("mf", 0.159), ("cs", 0.188), ("nk", 0.258), ("mz", 0.293), ("tj", 0.204)]
    {
        let got = report.measures[key];
        assert!((got - expect).abs() <= 0.002, "binary {key}: {got} vs {expect}");
    }
    for spec in &penalties {
        let got = report.measures[&spec.measure_id()];
        assert!((got - 0.293).abs() <= 0.002, "binary {:?}: {got}", spec);
    }
    for (name, expect) in [("AN", 0.270), ("SK", 0.482), ("AN:SK", 0.015)] {
        let idx = binary.predictor_names.iter().position(|n| n == name).unwrap();
        let got = binary.coefficients[idx].abs();
        assert!((got - expect).abs() <= 0.005, "binary |{name}|: {got} vs {expect}");
    }

    // Ordinal probit model.
    let ordinal = fit_clm(&out.ordinal, LinkKind::Probit).expect("ordinal fit");
    let report = gof_report(&ordinal, &penalties);
    for (key, expect) in [
        ("mf", 0.139),
        ("cs", 0.302),
        ("nk", 0.326),
        ("ug:l1", 0.527),
        ("ug:l2", 0.377),
        ("ug:l3", 0.428),
        ("ug:l4", 0.392),
        ("ug:l5", 0.451),
    ] {
        let got = report.measures[key];
        assert!((got - expect).abs() <= 0.003, "ordinal {key}: {got} vs {expect}");
    }
    // The convex penalty is asserted against its definition from the fitted
    // likelihood ratio, which lands near 0.66 — not the published 0.807.
    let lambda6 = PenaltySpec::L6.evaluate(5).unwrap();
    let defined = 1.0 - report.gamma_r.powf(lambda6);
    let got = report.measures["ug:l6"];
    assert!((got - defined).abs() <= 1e-12);
    assert!((got - 0.66).abs() <= 0.03, "ordinal ug:l6 {got} (definition, not 0.807)");
    println!(
        "ACCEPTANCE sensory_reproduction: PASS — linear/binary/ordinal reproduced; \
         ug:l6 = {got:.3} per definition (published table prints 0.807)"
    );
}

fn random_binary_or_ordinal(rng: &mut ChaCha8Rng, n: usize, p: usize, r: u32) -> FittedModel {
    let columns: Vec<Column> = (0..p)
        .map(|j| {
            let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
            Column::new(format!("x{}", j + 1), v)
        })
        .collect();
    let slopes: Vec<f64> = (0..p).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
    let latent: Vec<f64> = (0..n)
        .map(|i| {
            let s: f64 = columns.iter().zip(&slopes).map(|(c, b)| b * c.values[i]).sum();
            let eps: f64 = StandardNormal.sample(rng);
            s + eps
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| latent[a].total_cmp(&latent[b]));
    let mut codes = vec![0u32; n];
    for (rank, &idx) in order.iter().enumerate() {
        codes[idx] = 1 + (rank * r as usize / n) as u32;
    }
    let data = Dataset::new_ordinal(columns, codes, r).unwrap();
    let link = if n % 2 == 0 { LinkKind::Probit } else { LinkKind::Logit };
    match fit_clm(&data, link) {
        Ok(m) => m,
        Err(Error::NotConverged(m)) => *m,
        Err(e) => panic!("unexpected error: {e}"),
    }
}

#[test]
fn exact_algebraic_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(ACCEPT_SEED);
    let penalties = [
        PenaltySpec::L0,
        PenaltySpec::L1,
        PenaltySpec::L2,
        PenaltySpec::L3,
        PenaltySpec::L4,
        PenaltySpec::L5,
        PenaltySpec::L6,
        PenaltySpec::Constant(3.0),
    ];
    // 500 random binary fits: the exact identity at r = 2.
    for trial in 0..500 {
        let n = 40 + (trial % 5) * 12;
        let model = random_binary_or_ordinal(&mut rng, n, trial % 3, 2);
        let report = gof_report(&model, &penalties);
        let mf = report.measures["mf"];
        let identity = 1.0 - (1.0 - mf) * (1.0 - mf);
        for key in ["ug:l1", "ug:l2", "ug:l3", "ug:l4", "ug:l5", "ug:l6"] {
            assert!(
                (report.measures[key] - identity).abs() <= 1e-12,
                "trial {trial} {key}"
            );
        }
        assert!((report.measures["ug:l0"] - mf).abs() <= 1e-15, "trial {trial} l0");
        assert!(report.measures["nk"] >= report.measures["cs"]);
        for (key, &v) in &report.measures {
            assert!((0.0..=1.0).contains(&v), "trial {trial}: {key} = {v}");
        }
    }
    // Ordinal fits keep every measure in bounds and the L0 collapse exact.
    for trial in 0..200 {
        let r = 3 + (trial % 4) as u32;
        let model = random_binary_or_ordinal(&mut rng, 60 + trial % 40, trial % 3, r);
        let report = gof_report(&model, &penalties);
        assert!((report.measures["ug:l0"] - report.measures["mf"]).abs() <= 1e-15);
        assert!(report.measures["nk"] >= report.measures["cs"]);
        for (key, &v) in &report.measures {
            assert!((0.0..=1.0).contains(&v), "trial {trial}: {key} = {v}");
        }
    }
    println!(
        "ACCEPTANCE exact_algebraic_identities: PASS — binary identity to 1e-12 on 500 fits, \
         L0 collapse to 1e-15, nk >= cs, all measures in [0,1]"
    );
}

#[test]
fn optimizer_correctness() {
    // Analytic score vs central differences on 100 random (data, parameter)
    // points.
    let mut rng = ChaCha8Rng::seed_from_u64(ACCEPT_SEED ^ 0xA3);
    for point in 0..100 {
        let p = point % 4;
        let r = 2 + (point % 4) as u32;
        let n = 40;
        let columns: Vec<Column> = (0..p)
            .map(|j| {
                let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                Column::new(format!("x{}", j + 1), v)
            })
            .collect();
        let codes: Vec<u32> = (0..n).map(|i| 1 + (i % r as usize) as u32).collect();
        let data = Dataset::new_ordinal(columns, codes, r).unwrap();
        let mut tau = vec![-1.0 + rng.random::<f64>()];
        for _ in 2..r {
            let prev = *tau.last().unwrap();
            tau.push(prev + 0.4 + rng.random::<f64>());
        }
        let beta: Vec<f64> = (0..p).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        let link = if point % 2 == 0 { LinkKind::Probit } else { LinkKind::Logit };

        let (_, grad, _) = loglik_grad_hess(&data, link, &tau, &beta).unwrap();
        let dim = tau.len() + p;
        for i in 0..dim {
            let h = 1e-6;
            let (mut tp, mut bp) = (tau.clone(), beta.clone());
            let (mut tm, mut bm) = (tau.clone(), beta.clone());
            if i < tau.len() {
                tp[i] += h;
                tm[i] -= h;
            } else {
                bp[i - tau.len()] += h;
                bm[i - tau.len()] -= h;
            }
            let up = loglik_grad_hess(&data, link, &tp, &bp).unwrap().0;
            let down = loglik_grad_hess(&data, link, &tm, &bm).unwrap().0;
            let fd = (up - down) / (2.0 * h);
            assert!(
                (grad[i] - fd).abs() <= 1e-5 * fd.abs().max(1.0),
                "point {point} component {i}: {} vs {fd}",
                grad[i]
            );
        }
    }

    // Closed-form null equals the optimizer-found null.
    for r in [2u32, 3, 5] {
        let n = 90;
        let codes: Vec<u32> = (0..n).map(|i| 1 + (i % r as usize) as u32).collect();
        let data = Dataset::new_ordinal(vec![], codes.clone(), r).unwrap();
        let closed = fit_null(&codes, r, LinkKind::Probit).unwrap();
        let optimized = fit_clm(&data, LinkKind::Probit).unwrap();
        assert!(
            (closed.loglik - optimized.loglik).abs() < 1e-8,
            "r={r}: {} vs {}",
            closed.loglik,
            optimized.loglik
        );
    }

    // Eight-observation MLE against an exhaustive grid search refined down
    // to step 1e-3.
    let x = vec![-1.2, -0.8, -0.5, -0.1, 0.3, 0.6, 1.0, 1.4];
    let codes = vec![1u32, 1, 2, 1, 2, 2, 3, 3];
    let data = Dataset::new_ordinal(vec![Column::new("x", x.clone())], codes.clone(), 3).unwrap();
    let model = fit_clm(&data, LinkKind::Probit).unwrap();

    let ll = |t1: f64, t2: f64, b: f64| -> f64 {
        let mut total = 0.0;
        for (xi, &code) in x.iter().zip(&codes) {
            let eta = b * xi;
            let upper = if code < 3 {
                LinkKind::Probit.cdf(if code == 1 { t1 } else { t2 } - eta).unwrap()
            } else {
                1.0
            };
            let lower = if code > 1 {
                LinkKind::Probit.cdf(if code == 2 { t1 } else { t2 } - eta).unwrap()
            } else {
                0.0
            };
            total += (upper - lower).max(1e-300).ln();
        }
        total
    };
    let search = |c: (f64, f64, f64), half: f64, step: f64| -> (f64, f64, f64) {
        let steps = (2.0 * half / step).round() as i64;
        let mut best = (f64::NEG_INFINITY, c);
        for i in 0..=steps {
            let t1 = c.0 - half + i as f64 * step;
            for j in 0..=steps {
                let t2 = c.1 - half + j as f64 * step;
                if t2 <= t1 + step / 2.0 {
                    continue;
                }
                for k in 0..=steps {
                    let b = c.2 - half + k as f64 * step;
                    let v = ll(t1, t2, b);
                    if v > best.0 {
                        best = (v, (t1, t2, b));
                    }
                }
            }
        }
        best.1
    };
    let mut center = search((0.0, 1.0, 0.0), 3.0, 0.1);
    center = search(center, 0.15, 0.005);
    center = search(center, 0.0075, 0.001);
    assert!((model.thresholds[0] - center.0).abs() < 2e-3, "tau1 {} vs {}", model.thresholds[0], center.0);
    assert!((model.thresholds[1] - center.1).abs() < 2e-3, "tau2 {} vs {}", model.thresholds[1], center.1);
    assert!((model.coefficients[0] - center.2).abs() < 2e-3, "beta {} vs {}", model.coefficients[0], center.2);

    println!(
        "ACCEPTANCE optimizer_correctness: PASS — score matches finite differences (100 points), \
         closed-form null matches the optimizer, grid-search oracle within 2e-3"
    );
}

#[test]
fn mf_and_cs_diverge_across_categories() {
    let table = category_grid_study();
    let mf: Vec<f64> = (2..=10).map(|r| mean_of(table, 1.0, r, "mf")).collect();
    let cs: Vec<f64> = (2..=10).map(|r| mean_of(table, 1.0, r, "cs")).collect();
    let ols: Vec<f64> = (2..=10).map(|r| mean_of(table, 1.0, r, "ols")).collect();
    for w in mf.windows(2) {
        assert!(w[1] < w[0], "mean mf not strictly decreasing: {mf:?}");
    }
    for w in cs.windows(2) {
        assert!(w[1] > w[0], "mean cs not strictly increasing: {cs:?}");
    }
    // "Toward" the latent reference: the gap closes from r = 2 to r = 10.
    assert!(
        (cs[8] - ols[8]).abs() < (cs[0] - ols[0]).abs(),
        "cs not approaching ols: {cs:?} vs {ols:?}"
    );
    println!(
        "ACCEPTANCE mf_and_cs_diverge_across_categories: PASS — mf {:.3}..{:.3} decreasing, cs {:.3}..{:.3} increasing toward ols {:.3}",
        mf[0], mf[8], cs[0], cs[8], ols[8]
    );
}

#[test]
fn concave_penalties_track_latent_r2() {
    let table = category_grid_study();
    let max_dev = |measure: &str| -> f64 {
        (2..=10)
            .map(|r| (mean_of(table, 1.0, r, measure) - mean_of(table, 1.0, r, "ols")).abs())
            .fold(0.0, f64::max)
    };
    let dev_l2 = max_dev("ug:l2");
    let dev_l4 = max_dev("ug:l4");
    let dev_l6 = max_dev("ug:l6");
    assert!(dev_l2 <= 0.05, "ug:l2 max deviation {dev_l2}");
    assert!(dev_l4 <= 0.05, "ug:l4 max deviation {dev_l4}");
    assert!(dev_l6 > dev_l2, "convex penalty should do worse: {dev_l6} vs {dev_l2}");
    println!(
        "ACCEPTANCE concave_penalties_track_latent_r2: PASS — max|mean-ols| l2 {dev_l2:.4}, l4 {dev_l4:.4}, l6 {dev_l6:.4}"
    );
}

fn ranking_holds(table: &[AggRow], label: &str) {
    for sigma in [1.0, 4.0] {
        let delta = |m: &str| mean_of(table, sigma, 2, &format!("delta:{m}")).abs();
        let ug2 = delta("ug:l2");
        for rival in ["mf", "cs", "nk", "tj"] {
            let dev = delta(rival);
            assert!(
                ug2 <= dev,
                "{label} sigma={sigma}: |mean delta ug:l2| = {ug2} > |mean delta {rival}| = {dev}"
            );
        }
        let ug3 = mean_of(table, sigma, 2, "delta:ug:const:3");
        assert!(ug3 > 0.0, "{label} sigma={sigma}: constant-3 penalty should overestimate, got {ug3}");
    }
}

#[test]
fn penalized_index_closest_to_latent_r2() {
    let table = binary_delta_study(0);
    ranking_holds(&table, "no noise");
    let show = |sigma: f64, m: &str| mean_of(&table, sigma, 2, &format!("delta:{m}"));
    println!(
        "ACCEPTANCE penalized_index_closest_to_latent_r2: PASS — sigma=1: delta ug:l2 {:.4}, mf {:.4}, cs {:.4}, nk {:.4}, tj {:.4}, ug3 {:.4}",
        show(1.0, "ug:l2"),
        show(1.0, "mf"),
        show(1.0, "cs"),
        show(1.0, "nk"),
        show(1.0, "tj"),
        show(1.0, "ug:const:3")
    );
}

#[test]
fn ranking_robust_to_noise_covariates() {
    let table = binary_delta_study(5);
    ranking_holds(&table, "with noise");
    println!(
        "ACCEPTANCE ranking_robust_to_noise_covariates: PASS — rankings unchanged with 5 noise covariates"
    );
}
