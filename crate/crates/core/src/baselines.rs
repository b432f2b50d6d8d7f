//! Comparison estimators: the KSG-style digamma estimator generalized to
//! arbitrary graphs, equal-width binning with a plug-in divergence, and the
//! entropy-sum (ΣH) construction over Kozachenko–Leonenko entropies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dag::{DagSpec, ResolvedDag};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::gdm::{plug_in_gdm_discrete, resolve_k, CountBundle, EstimateResult, EstimatorConfig};
use crate::knn::{Backend, SubspaceIndex};
use crate::scalar::{CompensatedSum, Scalar};
use crate::special::digamma_count;

/// KSG-style estimator from an existing count bundle:
/// ζ_i = ψ(k) + Σ_l (1{Pa_l≠∅} ψ(n_pa+1) − ψ(n_joint+1)), plus (roots − 1) ψ(N).
pub fn ksg_from_counts<T: Scalar>(bundle: &CountBundle<T>, dag: &ResolvedDag) -> EstimateResult<T> {
    let psi_k = digamma_count::<T>(bundle.k());
    let zeta: Vec<T> = (0..bundle.len())
        .into_par_iter()
        .map(|i| psi_k + bundle.node_terms(i, digamma_count))
        .collect();
    let roots = dag.parentless_count() as f64 - 1.0;
    let correction = T::of(roots) * digamma_count::<T>(bundle.len());
    let mut res = EstimateResult {
        value: T::zero(),
        zeta,
        correction,
        k_used: bundle.k(),
        n_used: bundle.len(),
    };
    res.value = res.recomputed_value();
    res
}

pub fn ksg_gdm<T: Scalar>(
    dataset: &Dataset<T>,
    dag: &DagSpec,
    config: &EstimatorConfig,
) -> Result<EstimateResult<T>> {
    let resolved = dag.resolve(dataset)?;
    let k = resolve_k(config, dataset.n_rows())?;
    let bundle = CountBundle::compute(dataset, &resolved, k, config.backend)?;
    Ok(ksg_from_counts(&bundle, &resolved))
}

/// Equal-width binning aiming at `target_per_bin` samples per cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinningRule {
    pub target_per_bin: usize,
}

impl Default for BinningRule {
    fn default() -> Self {
        Self { target_per_bin: 20 }
    }
}

impl BinningRule {
    /// Largest `B >= 1` with `B^d <= N / m`.
    pub fn bins_per_dim(&self, n: usize, d_total: usize) -> usize {
        let m = self.target_per_bin.max(1) as f64;
        let cells = n as f64 / m;
        let d = d_total.max(1) as i32;
        let mut b = cells.powf(1.0 / f64::from(d)).floor().max(1.0) as usize;
        while ((b + 1) as f64).powi(d) <= cells {
            b += 1;
        }
        while b > 1 && (b as f64).powi(d) > cells {
            b -= 1;
        }
        b
    }
}

/// Quantizes every graph-spanned column and returns the plug-in divergence
/// of the bin indices.
pub fn binning_gdm<T: Scalar>(dataset: &Dataset<T>, dag: &DagSpec, rule: &BinningRule) -> Result<T> {
    let resolved = dag.resolve(dataset)?;
    let bins = rule.bins_per_dim(dataset.n_rows(), resolved.all_columns.len());
    let b = T::of_usize(bins);
    let mut ranges = vec![None; dataset.n_cols()];
    for &c in &resolved.all_columns {
        let col = dataset.column(c);
        let lo = col.iter().copied().fold(T::infinity(), T::min);
        let hi = col.iter().copied().fold(T::neg_infinity(), T::max);
        let span = hi - lo;
        ranges[c] = Some((lo, span + T::of(1e-12) * (span + T::one())));
    }
    let binned = dataset.map_values(|c, v| match ranges[c] {
        Some((lo, width)) => (b * (v - lo) / width).floor(),
        None => v,
    })?;
    plug_in_gdm_discrete(&binned, dag)
}

/// Uniform jitter on `[-a, a]` per coordinate, `a = amplitude * range` of
/// the column (or of `max(|v|, 1)` for a constant column).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseRule {
    pub amplitude: f64,
    pub seed: u64,
}

impl Default for NoiseRule {
    fn default() -> Self {
        Self {
            amplitude: 1e-8,
            seed: 0,
        }
    }
}

impl NoiseRule {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn apply<T: Scalar>(&self, dataset: &Dataset<T>) -> Result<Dataset<T>> {
        if !(self.amplitude > 0.0) {
            return Err(Error::InvalidArgument("noise amplitude must be > 0".into()));
        }
        let scales: Vec<f64> = (0..dataset.n_cols())
            .map(|c| {
                let col = dataset.column(c);
                let lo = col.iter().copied().fold(T::infinity(), T::min).to_f64().unwrap_or(0.0);
                let hi = col.iter().copied().fold(T::neg_infinity(), T::max).to_f64().unwrap_or(0.0);
                let range = hi - lo;
                let scale = if range > 0.0 { range } else { lo.abs().max(1.0) };
                self.amplitude * scale
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        dataset.map_values(|c, v| v + T::of(rng.gen_range(-scales[c]..=scales[c])))
    }
}

/// Kozachenko–Leonenko entropy of the projection onto `cols` under ℓ∞:
/// −ψ(k) + ψ(N) + d ln 2 + (d / N) Σ ln ρ_{k,i}.
pub fn kl_entropy<T: Scalar>(dataset: &Dataset<T>, cols: &[usize], k: usize, backend: Backend) -> Result<T> {
    let n = dataset.n_rows();
    if k == 0 || k >= n {
        return Err(Error::KOutOfRange { k, n });
    }
    let index = SubspaceIndex::build(dataset, cols, backend)?;
    let log_rho: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| index.knn_distance_unchecked(i, k).ln())
        .collect();
    if log_rho.iter().any(|v| !v.is_finite()) {
        return Err(Error::Internal(
            "zero k-NN distance in entropy estimate; jitter did not break ties".into(),
        ));
    }
    let total: CompensatedSum<T> = log_rho.into_iter().collect();
    let d = T::of_usize(cols.len());
    Ok(digamma_count::<T>(n) - digamma_count::<T>(k)
        + d * T::of(std::f64::consts::LN_2)
        + d * total.total() / T::of_usize(n))
}

/// ΣH estimator: Σ_l [ĥ(X_l, Pa_l) − 1{Pa_l≠∅} ĥ(Pa_l)] − ĥ(X) on jittered data.
pub fn sigma_h_gdm<T: Scalar>(
    dataset: &Dataset<T>,
    dag: &DagSpec,
    config: &EstimatorConfig,
    noise: &NoiseRule,
) -> Result<T> {
    let resolved = dag.resolve(dataset)?;
    let k = resolve_k(config, dataset.n_rows())?;
    let noisy = noise.apply(dataset)?;
    let h = |cols: &[usize]| kl_entropy(&noisy, cols, k, config.backend);
    let mut acc = CompensatedSum::new();
    for node in &resolved.nodes {
        acc.add(h(&node.joint_columns)?);
        if node.has_parents() {
            acc.add(-h(&node.parent_columns)?);
        }
    }
    acc.add(-h(&resolved.all_columns)?);
    Ok(acc.total())
}
