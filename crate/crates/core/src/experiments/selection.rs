//! Greedy CMI-driven feature selection (CMIM and CMIM-2).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimator::Estimator;
use crate::measures::{cmi, mi};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    /// Score a candidate by its smallest CMI given any selected feature.
    Cmim,
    /// Score a candidate by the sum of its CMIs given the selected features.
    #[default]
    Cmim2,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cmim" => Ok(Self::Cmim),
            "cmim2" => Ok(Self::Cmim2),
            other => Err(Error::InvalidArgument(format!("unknown selection variant {other:?}"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cmim => "cmim",
            Self::Cmim2 => "cmim2",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Picked columns, first pick first.
    pub order: Vec<usize>,
    /// Criterion value at the moment each column was picked.
    pub scores: Vec<f64>,
    /// The candidate columns, in column order.
    pub features: Vec<usize>,
}

impl Selection {
    /// One score per candidate for ranking: earlier picks score higher and
    /// every unpicked candidate ties at zero.
    pub fn ranking_scores(&self) -> Vec<f64> {
        let picks = self.order.len();
        self.features
            .iter()
            .map(|f| match self.order.iter().position(|o| o == f) {
                Some(r) => (picks - r) as f64,
                None => 0.0,
            })
            .collect()
    }
}

/// Greedy selection of `budget` columns for `target_col`. The first pick
/// maximizes I(X_i; Y); later picks maximize the variant's criterion over
/// I(X_i; Y | X_j). Ties go to the lowest column.
pub fn cmim_select<T: Scalar>(
    dataset: &Dataset<T>,
    target_col: usize,
    budget: usize,
    est: &Estimator,
    variant: Variant,
) -> Result<Selection> {
    if target_col >= dataset.n_cols() {
        return Err(Error::InvalidArgument(format!("target column {target_col} out of range")));
    }
    let features: Vec<usize> = (0..dataset.n_cols()).filter(|&c| c != target_col).collect();
    if budget > features.len() {
        return Err(Error::InvalidArgument(format!(
            "budget {budget} exceeds {} features",
            features.len()
        )));
    }
    let y = [target_col];
    let mut conditional: HashMap<(usize, usize), f64> = HashMap::new();
    let mut order = Vec::with_capacity(budget);
    let mut scores = Vec::with_capacity(budget);
    let mut remaining = features.clone();
    for round in 0..budget {
        let mut best: Option<(usize, f64)> = None;
        for (slot, &i) in remaining.iter().enumerate() {
            let score = if round == 0 {
                mi(dataset, &[i], &y, est)?.to_f64().unwrap_or(f64::NAN)
            } else {
                let mut terms = Vec::with_capacity(order.len());
                for &j in &order {
                    let v = match conditional.get(&(i, j)) {
                        Some(&v) => v,
                        None => {
                            let v = cmi(dataset, &[i], &y, &[j], est)?.to_f64().unwrap_or(f64::NAN);
                            conditional.insert((i, j), v);
                            v
                        }
                    };
                    terms.push(v);
                }
                match variant {
                    Variant::Cmim => terms.into_iter().fold(f64::INFINITY, f64::min),
                    Variant::Cmim2 => terms.into_iter().sum(),
                }
            };
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((slot, score));
            }
        }
        let (slot, score) = best.ok_or_else(|| Error::Internal("no candidate left".into()))?;
        order.push(remaining.remove(slot));
        scores.push(score);
    }
    Ok(Selection { order, scores, features })
}
