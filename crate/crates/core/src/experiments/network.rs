//! Pairwise causal scoring of multivariate time series.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimator::{estimate_all, Estimator};
use crate::measures::{rdi_sample, TimeSeries};
use crate::scalar::Scalar;

use super::auroc::auroc;
use super::generators::Adjacency;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum InferenceMode {
    Rdi,
    /// Each pair is conditioned on the strongest other driver of the target.
    #[default]
    Crdi,
}

impl FromStr for InferenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rdi" => Ok(Self::Rdi),
            "crdi" => Ok(Self::Crdi),
            other => Err(Error::InvalidArgument(format!("unknown inference mode {other:?}"))),
        }
    }
}

impl fmt::Display for InferenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rdi => "rdi",
            Self::Crdi => "crdi",
        })
    }
}

/// `scores[i][j]` rates the edge `i -> j`; the diagonal is `None`.
pub type ScoreMatrix = Vec<Vec<Option<f64>>>;

fn to_f64<T: Scalar>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

pub fn grn_infer<T: Scalar>(ts: &TimeSeries<T>, est: &Estimator, mode: InferenceMode) -> Result<ScoreMatrix> {
    let mut all = grn_infer_many(ts, std::slice::from_ref(est), mode)?;
    Ok(all.remove(0))
}

/// One score matrix per estimator. Estimators that can share neighbor
/// counts on a pair's sample do.
pub fn grn_infer_many<T: Scalar>(ts: &TimeSeries<T>, ests: &[Estimator], mode: InferenceMode) -> Result<Vec<ScoreMatrix>> {
    let d = ts.n_vars();
    let blank = vec![vec![None; d]; d];
    let mut plain = vec![blank.clone(); ests.len()];
    for i in 0..d {
        for j in (0..d).filter(|&j| j != i) {
            let (data, dag) = rdi_sample(ts, i, j, &[])?;
            for (e, v) in estimate_all(ests, &data, &dag)?.into_iter().enumerate() {
                plain[e][i][j] = Some(to_f64(v));
            }
        }
    }
    if mode == InferenceMode::Rdi || d < 3 {
        return Ok(plain);
    }
    let mut out = vec![blank; ests.len()];
    for j in 0..d {
        for i in (0..d).filter(|&i| i != j) {
            let picks: Vec<usize> = plain.iter().map(|m| strongest_driver(m, i, j)).collect::<Result<_>>()?;
            let mut choices = picks.clone();
            choices.sort_unstable();
            choices.dedup();
            for k in choices {
                let members: Vec<usize> = (0..ests.len()).filter(|&e| picks[e] == k).collect();
                let subset: Vec<Estimator> = members.iter().map(|&e| ests[e]).collect();
                let (data, dag) = rdi_sample(ts, i, j, &[k])?;
                for (&e, v) in members.iter().zip(estimate_all(&subset, &data, &dag)?) {
                    out[e][i][j] = Some(to_f64(v));
                }
            }
        }
    }
    Ok(out)
}

/// `argmax_{k ∉ {i, j}} rdi(k → j)`, lowest index on ties.
fn strongest_driver(plain: &ScoreMatrix, i: usize, j: usize) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for k in (0..plain.len()).filter(|&k| k != i && k != j) {
        let v = plain[k][j].unwrap_or(f64::NEG_INFINITY);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((k, v));
        }
    }
    best.map(|(k, _)| k).ok_or_else(|| Error::Internal("no conditioning node".into()))
}

/// AUROC of the off-diagonal scores against the true edges.
pub fn network_auroc(scores: &ScoreMatrix, truth: &Adjacency) -> Result<f64> {
    let d = truth.len();
    if scores.len() != d {
        return Err(Error::InvalidArgument("score and truth sizes differ".into()));
    }
    let mut s = Vec::with_capacity(d * d);
    let mut labels = Vec::with_capacity(d * d);
    for i in 0..d {
        if scores[i].len() != d || truth[i].len() != d {
            return Err(Error::InvalidArgument("score and truth sizes differ".into()));
        }
        for j in (0..d).filter(|&j| j != i) {
            s.push(scores[i][j].unwrap_or(f64::NEG_INFINITY));
            labels.push(truth[i][j]);
        }
    }
    auroc(&s, &labels)
}
