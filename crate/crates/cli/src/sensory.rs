//! The sensory-data preprocessing pipeline: log-transform and standardize
//! the two compound measurements, build their interaction, and derive the
//! binary, ordinal and continuous response variants of the panel rating.

use ordr2_core::{Column, Dataset};

use crate::error::CliError;
use crate::table::Table;

/// Constant column appended to emitted datasets so a second standardization
/// pass is refused instead of silently applied.
pub const MARKER_COLUMN: &str = "ordr2_preprocessed";

#[derive(Debug, Clone)]
pub struct SensoryPipelineSpec {
    pub androstenone_column: String,
    pub skatole_column: String,
    pub rating_column: String,
    /// Ratings at or above this value count as tainted (binary category 2).
    pub dichotomy_cutpoint: f64,
    /// Half-open rating bins; the last bin is closed on the right.
    pub ordinal_bins: Vec<(f64, f64)>,
}

impl Default for SensoryPipelineSpec {
    fn default() -> Self {
        SensoryPipelineSpec {
            androstenone_column: "androstenone".into(),
            skatole_column: "skatole".into(),
            rating_column: "rating".into(),
            dichotomy_cutpoint: 2.0,
            ordinal_bins: vec![(0.0, 1.0), (1.0, 2.0), (2.0, 3.0), (3.0, 4.0), (4.0, 5.0)],
        }
    }
}

impl SensoryPipelineSpec {
    fn validate(&self) -> Result<(), CliError> {
        if self.ordinal_bins.is_empty() {
            return Err(CliError::InvalidArg("ordinal bins must be non-empty".into()));
        }
        for (lo, hi) in &self.ordinal_bins {
            if !(lo < hi) {
                return Err(CliError::InvalidArg(format!("bad bin [{lo}, {hi})")));
            }
        }
        for w in self.ordinal_bins.windows(2) {
            if w[0].1 != w[1].0 {
                return Err(CliError::InvalidArg(
                    "ordinal bins must be ordered and contiguous".into(),
                ));
            }
        }
        Ok(())
    }

    /// 1-based bin code; the last bin includes its right edge.
    fn bin_code(&self, rating: f64) -> Option<u32> {
        let last = self.ordinal_bins.len() - 1;
        for (idx, (lo, hi)) in self.ordinal_bins.iter().enumerate() {
            let inside = if idx == last {
                rating >= *lo && rating <= *hi
            } else {
                rating >= *lo && rating < *hi
            };
            if inside {
                return Some((idx + 1) as u32);
            }
        }
        None
    }
}

#[derive(Debug)]
pub struct SensoryOutputs {
    pub binary: Dataset,
    pub ordinal: Dataset,
    pub linear: Dataset,
    pub n_input: usize,
    pub n_kept: usize,
    pub excluded_zero_androstenone: usize,
    pub excluded_zero_skatole: usize,
}

/// Run the pipeline: drop rows with a zero compound measurement, transform
/// the compounds by natural log and standardize (sample sd, denominator
/// n - 1, computed after the exclusions), append the interaction column and
/// produce the three response variants.
pub fn preprocess_sensory(
    table: &Table,
    spec: &SensoryPipelineSpec,
) -> Result<SensoryOutputs, CliError> {
    spec.validate()?;
    if table.names.iter().any(|n| n == MARKER_COLUMN) {
        return Err(CliError::AlreadyPreprocessed(MARKER_COLUMN.into()));
    }
    let need = |name: &str| {
        table.column(name).ok_or_else(|| CliError::MissingColumn {
            path: "<input>".into(),
            column: name.to_owned(),
        })
    };
    let an = need(&spec.androstenone_column)?;
    let sk = need(&spec.skatole_column)?;
    let rating = need(&spec.rating_column)?;
    let n_input = rating.len();

    let lo = spec.ordinal_bins.first().expect("validated").0;
    let hi = spec.ordinal_bins.last().expect("validated").1;
    for i in 0..n_input {
        if an[i] < 0.0 || sk[i] < 0.0 {
            return Err(CliError::InvalidArg(format!(
                "negative compound measurement at data row {}",
                i + 1
            )));
        }
        if rating[i] < lo || rating[i] > hi {
            return Err(CliError::InvalidArg(format!(
                "rating {} at data row {} outside [{lo}, {hi}]",
                rating[i],
                i + 1
            )));
        }
    }

    let mut kept = Vec::new();
    let mut excluded_zero_androstenone = 0usize;
    let mut excluded_zero_skatole = 0usize;
    for i in 0..n_input {
        if an[i] == 0.0 {
            excluded_zero_androstenone += 1;
        } else if sk[i] == 0.0 {
            excluded_zero_skatole += 1;
        } else {
            kept.push(i);
        }
    }
    if kept.is_empty() {
        return Err(CliError::InvalidArg(
            "all rows excluded by the zero-measurement rule".into(),
        ));
    }

    let ln_an: Vec<f64> = kept.iter().map(|&i| an[i].ln()).collect();
    let ln_sk: Vec<f64> = kept.iter().map(|&i| sk[i].ln()).collect();
    let an_std = standardize(&ln_an)?;
    let sk_std = standardize(&ln_sk)?;
    let interaction: Vec<f64> = an_std.iter().zip(&sk_std).map(|(a, s)| a * s).collect();

    let columns = vec![
        Column::new("AN", an_std),
        Column::new("SK", sk_std),
        Column::new("AN:SK", interaction),
    ];

    let ratings: Vec<f64> = kept.iter().map(|&i| rating[i]).collect();
    let binary_codes: Vec<u32> = ratings
        .iter()
        .map(|&v| if v >= spec.dichotomy_cutpoint { 2 } else { 1 })
        .collect();
    let ordinal_codes: Vec<u32> = ratings
        .iter()
        .map(|&v| spec.bin_code(v).expect("range checked above"))
        .collect();

    let r = spec.ordinal_bins.len() as u32;
    Ok(SensoryOutputs {
        binary: Dataset::new_ordinal(columns.clone(), binary_codes, 2)?,
        ordinal: Dataset::new_ordinal(columns.clone(), ordinal_codes, r)?,
        linear: Dataset::new_continuous(columns, ratings)?,
        n_input,
        n_kept: kept.len(),
        excluded_zero_androstenone,
        excluded_zero_skatole,
    })
}

fn standardize(values: &[f64]) -> Result<Vec<f64>, CliError> {
    let n = values.len();
    if n < 2 {
        return Err(CliError::InvalidArg(
            "need at least 2 rows to standardize".into(),
        ));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    if sd == 0.0 {
        return Err(CliError::InvalidArg("zero variance after exclusion".into()));
    }
    Ok(values.iter().map(|v| (v - mean) / sd).collect())
}

/// Dataset plus response codes as an emittable table, marker column included.
pub fn to_table(dataset: &Dataset, response_name: &str) -> Table {
    let mut names: Vec<String> = dataset.column_names();
    let mut columns: Vec<Vec<f64>> = dataset.columns().iter().map(|c| c.values.clone()).collect();
    names.push(response_name.to_owned());
    match dataset.response() {
        ordr2_core::Response::Continuous(v) => columns.push(v.clone()),
        ordr2_core::Response::Ordinal { codes, .. } => {
            columns.push(codes.iter().map(|&c| f64::from(c)).collect());
        }
    }
    names.push(MARKER_COLUMN.to_owned());
    columns.push(vec![1.0; dataset.n()]);
    Table { names, columns }
}
