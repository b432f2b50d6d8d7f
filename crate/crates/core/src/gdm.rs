//! Coupled k-nearest-neighbor estimator of the graph divergence measure,
//! and the exact plug-in value on finite alphabets.
//!
//! For each sample the k-NN radius is taken once in the joint space of all
//! node columns and reused, unchanged, to count neighbors in every
//! parent and node-plus-parent projection. Discrete atoms collapse the radius
//! to zero, at which point the counts become plug-in mass estimates; in
//! continuous regions the radius terms cancel between projections.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::dag::{DagSpec, ResolvedDag};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::knn::{Backend, SubspaceIndex};
use crate::scalar::{compensated_mean, Scalar};
use crate::special::digamma_count;

/// Neighbor count used by the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KChoice {
    /// `clamp(floor(sqrt(N) / 5), 3, N - 1)`.
    #[default]
    Auto,
    Fixed(usize),
}

/// Estimator settings. Balls are always closed and the query sample is
/// never counted as its own neighbor; means use compensated summation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EstimatorConfig {
    pub k: KChoice,
    pub backend: Backend,
}

impl EstimatorConfig {
    pub fn auto() -> Self {
        Self::default()
    }

    pub fn with_k(k: usize) -> Self {
        Self {
            k: KChoice::Fixed(k),
            ..Self::default()
        }
    }

    pub fn backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }
}

/// Resolves the neighbor count for `n` samples.
pub fn resolve_k(config: &EstimatorConfig, n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples to pick a neighbor count, got {n}"
        )));
    }
    match config.k {
        KChoice::Fixed(k) if (1..n).contains(&k) => Ok(k),
        KChoice::Fixed(k) => Err(Error::KOutOfRange { k, n }),
        KChoice::Auto => Ok((n.isqrt() / 5).max(3).min(n - 1)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult<T> {
    /// Estimate in nats: `mean(zeta) + correction`.
    pub value: T,
    /// Per-sample terms.
    pub zeta: Vec<T>,
    /// Additive constant applied after the mean, e.g. `(roots - 1) ln N`.
    pub correction: T,
    pub k_used: usize,
    pub n_used: usize,
}

impl<T: Scalar> EstimateResult<T> {
    fn from_zeta(zeta: Vec<T>, correction: T, k_used: usize) -> Self {
        let n_used = zeta.len();
        Self {
            value: compensated_mean(&zeta) + correction,
            zeta,
            correction,
            k_used,
            n_used,
        }
    }

    /// Recomputes `value` from the stored fields.
    pub fn recomputed_value(&self) -> T {
        compensated_mean(&self.zeta) + self.correction
    }
}

/// Neighbor counts at each sample's joint-space k-NN radius.
#[derive(Debug, Clone)]
pub struct CountBundle<T> {
    k: usize,
    n: usize,
    rho: Vec<T>,
    /// `n x slots`; slot 0 is the joint space itself.
    counts: Vec<usize>,
    slots: usize,
    parent_slot: Vec<Option<usize>>,
    joint_slot: Vec<usize>,
}

impl<T: Scalar> CountBundle<T> {
    /// Runs the query and inquire passes for every sample.
    pub fn compute(dataset: &Dataset<T>, dag: &ResolvedDag, k: usize, backend: Backend) -> Result<Self> {
        let n = dataset.n_rows();
        if k == 0 || k >= n {
            return Err(Error::KOutOfRange { k, n });
        }
        let mut spaces: Vec<Vec<usize>> = vec![dag.all_columns.clone()];
        let mut slot_of: HashMap<Vec<usize>, usize> = HashMap::new();
        slot_of.insert(dag.all_columns.clone(), 0);
        let mut slot = |cols: &Vec<usize>, spaces: &mut Vec<Vec<usize>>| {
            *slot_of.entry(cols.clone()).or_insert_with(|| {
                spaces.push(cols.clone());
                spaces.len() - 1
            })
        };
        let parent_slot: Vec<Option<usize>> = dag
            .nodes
            .iter()
            .map(|node| node.has_parents().then(|| slot(&node.parent_columns, &mut spaces)))
            .collect();
        let joint_slot: Vec<usize> = dag
            .nodes
            .iter()
            .map(|node| slot(&node.joint_columns, &mut spaces))
            .collect();
        let indexes = spaces
            .iter()
            .map(|cols| SubspaceIndex::build(dataset, cols, backend))
            .collect::<Result<Vec<_>>>()?;

        let slots = indexes.len();
        let mut rho = vec![T::zero(); n];
        let mut counts = vec![0usize; n * slots];
        counts
            .par_chunks_mut(slots)
            .zip(rho.par_iter_mut())
            .enumerate()
            .for_each(|(i, (row, r))| {
                let radius = indexes[0].knn_distance_unchecked(i, k);
                *r = radius;
                for (c, index) in row.iter_mut().zip(&indexes) {
                    *c = index.count_within_unchecked(i, radius);
                }
            });
        let bundle = Self {
            k,
            n,
            rho,
            counts,
            slots,
            parent_slot,
            joint_slot,
        };
        debug_assert!(bundle.check_invariants().is_ok());
        Ok(bundle)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn node_count(&self) -> usize {
        self.joint_slot.len()
    }

    pub fn rho(&self, i: usize) -> T {
        self.rho[i]
    }

    /// Neighbors within the radius in the joint space of all node columns.
    pub fn k_tilde(&self, i: usize) -> usize {
        self.counts[i * self.slots]
    }

    /// Neighbors in node `l`'s parent projection; `None` for root nodes.
    pub fn n_parents(&self, l: usize, i: usize) -> Option<usize> {
        self.parent_slot[l].map(|s| self.counts[i * self.slots + s])
    }

    /// Neighbors in node `l`'s node-plus-parents projection.
    pub fn n_joint(&self, l: usize, i: usize) -> usize {
        self.counts[i * self.slots + self.joint_slot[l]]
    }

    pub fn check_invariants(&self) -> Result<()> {
        for i in 0..self.n {
            let kt = self.k_tilde(i);
            let bad = |what: String| Err(Error::Internal(format!("sample {i}: {what}")));
            if kt < self.k || kt > self.n - 1 {
                return bad(format!("k_tilde {kt} outside [{}, {}]", self.k, self.n - 1));
            }
            for l in 0..self.node_count() {
                let joint = self.n_joint(l, i);
                if joint < kt || joint > self.n - 1 {
                    return bad(format!("node {l} joint count {joint} < k_tilde {kt}"));
                }
                if let Some(pa) = self.n_parents(l, i) {
                    if pa < joint || pa > self.n - 1 {
                        return bad(format!("node {l} parent count {pa} < joint count {joint}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Per-sample sum `Σ_l 1{Pa_l≠∅} f(n_pa + 1) − f(n_joint + 1)`.
    ///
    /// Terms are accumulated in sorted count order so the result does not
    /// depend on how nodes are listed.
    pub(crate) fn node_terms(&self, i: usize, f: impl Fn(usize) -> T) -> T {
        let mut plus: Vec<usize> = (0..self.node_count())
            .filter_map(|l| self.n_parents(l, i))
            .collect();
        let mut minus: Vec<usize> = (0..self.node_count()).map(|l| self.n_joint(l, i)).collect();
        plus.sort_unstable();
        minus.sort_unstable();
        let p = plus.iter().fold(T::zero(), |acc, &c| acc + f(c + 1));
        let m = minus.iter().fold(T::zero(), |acc, &c| acc + f(c + 1));
        p - m
    }
}

fn ln_count<T: Scalar>(c: usize) -> T {
    T::of_usize(c).ln()
}

/// ζ_i = ψ(k̃_i) + Σ_l (1{Pa_l≠∅} ln(n_pa+1) − ln(n_joint+1)).
pub fn gdm_from_counts<T: Scalar>(bundle: &CountBundle<T>, dag: &ResolvedDag) -> EstimateResult<T> {
    let zeta: Vec<T> = (0..bundle.len())
        .into_par_iter()
        .map(|i| digamma_count::<T>(bundle.k_tilde(i)) + bundle.node_terms(i, ln_count))
        .collect();
    let roots = dag.parentless_count() as i64 - 1;
    let correction = T::of(roots as f64) * ln_count(bundle.len());
    EstimateResult::from_zeta(zeta, correction, bundle.k())
}

/// Estimates `GDM(X, G)` in nats from the rows of `dataset`.
pub fn estimate_gdm<T: Scalar>(
    dataset: &Dataset<T>,
    dag: &DagSpec,
    config: &EstimatorConfig,
) -> Result<EstimateResult<T>> {
    let resolved = dag.resolve(dataset)?;
    let k = resolve_k(config, dataset.n_rows())?;
    let bundle = CountBundle::compute(dataset, &resolved, k, config.backend)?;
    Ok(gdm_from_counts(&bundle, &resolved))
}

/// Assigns each row an integer code for its projection onto `cols`, with
/// equal codes exactly when the projected rows are bit-identical.
fn atom_codes<T: Scalar>(dataset: &Dataset<T>, cols: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut ids: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut tally = Vec::new();
    let codes = (0..dataset.n_rows())
        .map(|r| {
            let row = dataset.row(r);
            let key: Vec<u64> = cols.iter().map(|&c| row[c].atom_key()).collect();
            let next = ids.len();
            let code = *ids.entry(key).or_insert(next);
            if code == tally.len() {
                tally.push(0);
            }
            tally[code] += 1;
            code
        })
        .collect();
    (codes, tally)
}

/// Exact `D(P̂ ‖ Q̂)` for the empirical distribution of the rows, treating
/// every distinct bit pattern as an atom.
pub fn plug_in_gdm_discrete<T: Scalar>(dataset: &Dataset<T>, dag: &DagSpec) -> Result<T> {
    let resolved = dag.resolve(dataset)?;
    let n = dataset.n_rows();
    let full = atom_codes(dataset, &resolved.all_columns);
    let per_node: Vec<_> = resolved
        .nodes
        .iter()
        .map(|node| {
            let joint = atom_codes(dataset, &node.joint_columns);
            let parents = node
                .has_parents()
                .then(|| atom_codes(dataset, &node.parent_columns));
            (joint, parents)
        })
        .collect();
    let roots = resolved.parentless_count() as f64;
    let ln_n: T = ln_count(n);
    let terms: Vec<T> = (0..n)
        .map(|r| {
            // ln(c_full / N) − Σ_l ln(c_joint / c_pa), with c_pa = N for roots
            let mut plus: Vec<usize> = per_node
                .iter()
                .filter_map(|(_, pa)| pa.as_ref().map(|(codes, tally)| tally[codes[r]]))
                .collect();
            let mut minus: Vec<usize> = per_node
                .iter()
                .map(|((codes, tally), _)| tally[codes[r]])
                .collect();
            plus.sort_unstable();
            minus.sort_unstable();
            let p = plus.iter().fold(T::zero(), |acc, &c| acc + ln_count(c));
            let m = minus.iter().fold(T::zero(), |acc, &c| acc + ln_count(c));
            ln_count::<T>(full.1[full.0[r]]) + p - m + T::of(roots - 1.0) * ln_n
        })
        .collect();
    Ok(compensated_mean(&terms).max(T::zero()))
}
