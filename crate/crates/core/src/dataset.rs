//! Named-column datasets with a continuous or ordinal response.

use alloc::string::String;
use alloc::vec::Vec;

use crate::matrix::Matrix;
use crate::{Error, Result};

/// A named predictor column.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

impl Column {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column { name: name.into(), values }
    }
}

/// Response vector: continuous for linear fits, ordinal codes 1..=r for
/// cumulative models (r = 2 is the binary case).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Response {
    Continuous(Vec<f64>),
    Ordinal { codes: Vec<u32>, n_categories: u32 },
}

impl Response {
    pub fn len(&self) -> usize {
        match self {
            Response::Continuous(v) => v.len(),
            Response::Ordinal { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Design columns plus response, validated on construction: equal lengths,
/// finite cells, ordinal codes within 1..=r.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dataset {
    columns: Vec<Column>,
    response: Response,
}

impl Dataset {
    pub fn new_continuous(columns: Vec<Column>, response: Vec<f64>) -> Result<Self> {
        for (row, y) in response.iter().enumerate() {
            if !y.is_finite() {
                return Err(Error::NonFiniteValue { column: "<response>".into(), row });
            }
        }
        let ds = Dataset { columns, response: Response::Continuous(response) };
        ds.validate()?;
        Ok(ds)
    }

    pub fn new_ordinal(columns: Vec<Column>, codes: Vec<u32>, n_categories: u32) -> Result<Self> {
        if n_categories < 2 {
            return Err(Error::InvalidConfig("need at least 2 response categories"));
        }
        for (row, &code) in codes.iter().enumerate() {
            if code < 1 || code > n_categories {
                return Err(Error::InvalidOrdinalCode { row, code, n_categories });
            }
        }
        let ds = Dataset { columns, response: Response::Ordinal { codes, n_categories } };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        let n = self.response.len();
        if n == 0 {
            return Err(Error::EmptyData);
        }
        for col in &self.columns {
            if col.values.len() != n {
                return Err(Error::LengthMismatch { expected: n, found: col.values.len() });
            }
            for (row, v) in col.values.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue { column: col.name.clone(), row });
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.response.len()
    }

    /// Number of predictor columns.
    pub fn n_predictors(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn response(&self) -> &Response {
        &self.response
    }

    pub fn continuous_response(&self) -> Result<&[f64]> {
        match &self.response {
            Response::Continuous(v) => Ok(v),
            Response::Ordinal { .. } => Err(Error::WrongResponseKind),
        }
    }

    pub fn ordinal_response(&self) -> Result<(&[u32], u32)> {
        match &self.response {
            Response::Ordinal { codes, n_categories } => Ok((codes, *n_categories)),
            Response::Continuous(_) => Err(Error::WrongResponseKind),
        }
    }

    /// Observed count of each ordinal category 1..=r.
    pub fn category_counts(&self) -> Result<Vec<usize>> {
        let (codes, r) = self.ordinal_response()?;
        let mut counts = alloc::vec![0usize; r as usize];
        for &c in codes {
            counts[(c - 1) as usize] += 1;
        }
        Ok(counts)
    }

    /// Row-major design matrix; prepends a column of ones when asked.
    pub fn design_matrix(&self, with_intercept: bool) -> Matrix {
        let n = self.n();
        let p = self.columns.len() + usize::from(with_intercept);
        let mut m = Matrix::zeros(n, p);
        for i in 0..n {
            let mut j = 0;
            if with_intercept {
                m.set(i, 0, 1.0);
                j = 1;
            }
            for col in &self.columns {
                m.set(i, j, col.values[i]);
                j += 1;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_bad_inputs() {
        let c = Column::new("x", vec![1.0, 2.0]);
        assert!(matches!(
            Dataset::new_continuous(vec![c.clone()], vec![1.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            Dataset::new_continuous(vec![c.clone()], vec![1.0, f64::NAN]),
            Err(Error::NonFiniteValue { .. })
        ));
        assert!(matches!(
            Dataset::new_ordinal(vec![c.clone()], vec![1, 3], 2),
            Err(Error::InvalidOrdinalCode { row: 1, code: 3, .. })
        ));
        assert!(matches!(
            Dataset::new_continuous(vec![], vec![]),
            Err(Error::EmptyData)
        ));
    }

    #[test]
    fn category_counts_and_design() {
        let c = Column::new("x", vec![0.5, 1.5, 2.5, 3.5]);
        let ds = Dataset::new_ordinal(vec![c], vec![1, 2, 2, 3], 3).unwrap();
        assert_eq!(ds.category_counts().unwrap(), vec![1, 2, 1]);
        let x = ds.design_matrix(true);
        assert_eq!((x.rows(), x.cols()), (4, 2));
        assert_eq!(x.get(2, 0), 1.0);
        assert_eq!(x.get(2, 1), 2.5);
    }
}
