//! JSON descriptors for the shipped targets.
//!
//! ```json
//! {"type": "quadratic", "mean": [0, 0], "precision": [[4, 0], [0, 5]]}
//! {"type": "logistic", "X": [[1, 0.5], [0, 1]], "y": [1, 0], "lambda": 0.5}
//! ```

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{LangevinError, Result};
use crate::targets::{logistic_target, quadratic_target, TargetPotential};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TargetDescriptor {
    Quadratic {
        mean: Vec<f64>,
        precision: Vec<Vec<f64>>,
    },
    Logistic {
        #[serde(rename = "X")]
        features: Vec<Vec<f64>>,
        y: Vec<f64>,
        lambda: f64,
    },
}

fn dense(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(LangevinError::Descriptor(format!("{what} is empty")));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != ncols) {
        return Err(LangevinError::Descriptor(format!(
            "{what} row {i} has {} entries, expected {ncols}",
            rows[i].len()
        )));
    }
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        ncols,
        rows.iter().flatten().copied(),
    ))
}

impl TargetDescriptor {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self) -> Result<TargetPotential> {
        match self {
            TargetDescriptor::Quadratic { mean, precision } => {
                quadratic_target(DVector::from_column_slice(mean), dense(precision, "precision")?)
            }
            TargetDescriptor::Logistic {
                features,
                y,
                lambda,
            } => logistic_target(dense(features, "X")?, DVector::from_column_slice(y), *lambda),
        }
    }
}
