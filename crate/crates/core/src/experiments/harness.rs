//! Repeated-trial runs of the benchmark experiments and their CSV reports.

use std::io::Write;
use std::path::Path;

use rand::RngCore;
use rayon::prelude::*;

use crate::baselines::BinningRule;
use crate::error::{Error, Result};
use crate::dag::{cmi_dag, tc_dag};
use crate::estimator::{estimate_all, Estimator, EstimatorKind};
use crate::gdm::EstimatorConfig;

use super::generators::{
    gen_awgn_bsc, gen_dynamics_network, gen_feature_selection, gen_indep_mixture_tc, gen_markov_clip,
    gen_zero_inflated, random_dag_adjacency, ChannelParams, NoiseScale, FEATURE_COUNT, RELEVANT_FEATURES,
};
use super::network::{grn_infer_many, network_auroc, InferenceMode};
use super::rng::{child, ExpRng};
use super::selection::{cmim_select, Variant};
use super::theory::{awgn_bsc_theory_cmi, zero_inflated_theory_tc};

pub const MARKOV_THRESHOLDS: (f64, f64, f64) = (0.9, 0.8, 0.7);
pub const MIXTURE_ATOMS: [f64; 3] = [1.0, 0.5, 0.25];
pub const ZERO_INFLATION: (f64, f64) = (0.6, 0.6);
pub const NETWORK_NODES: usize = 12;
pub const NETWORK_DENSITY: f64 = 0.2;
pub const NETWORK_ERASURE: f64 = 0.5;

/// Settings shared by every trial of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub config: EstimatorConfig,
    pub binning: BinningRule,
    pub noise: NoiseScale,
    pub mode: InferenceMode,
    pub variant: Variant,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            config: EstimatorConfig::auto(),
            binning: BinningRule::default(),
            noise: NoiseScale::default(),
            mode: InferenceMode::Crdi,
            variant: Variant::Cmim2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub experiment: u8,
    pub estimator: EstimatorKind,
    pub n: usize,
    pub trials: usize,
    pub mean: f64,
    pub std: f64,
    pub theory: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AurocRow {
    pub experiment: u8,
    pub estimator: EstimatorKind,
    pub n: usize,
    pub trials: usize,
    pub auroc_mean: f64,
    pub auroc_std: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AurocReport {
    pub rows: Vec<AurocRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Convergence(ConvergenceReport),
    Auroc(AurocReport),
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

impl ConvergenceReport {
    pub const HEADER: [&'static str; 7] = ["experiment", "estimator", "n", "trials", "mean", "std", "theory"];

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::HEADER).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.experiment.to_string(),
                r.estimator.id().to_string(),
                r.n.to_string(),
                r.trials.to_string(),
                num(r.mean),
                num(r.std),
                num(r.theory),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn row(&self, estimator: EstimatorKind, n: usize) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.estimator == estimator && r.n == n)
    }
}

impl AurocReport {
    pub const HEADER: [&'static str; 6] = ["experiment", "estimator", "n", "trials", "auroc_mean", "auroc_std"];

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::HEADER).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.experiment.to_string(),
                r.estimator.id().to_string(),
                r.n.to_string(),
                r.trials.to_string(),
                num(r.auroc_mean),
                num(r.auroc_std),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn row(&self, estimator: EstimatorKind, n: usize) -> Option<&AurocRow> {
        self.rows.iter().find(|r| r.estimator == estimator && r.n == n)
    }
}

impl Report {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        match self {
            Self::Convergence(r) => r.write_csv(out),
            Self::Auroc(r) => r.write_csv(out),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = crate::scalar::compensated_mean(values);
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: crate::scalar::CompensatedSum<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    (mean, (ss.total() / (n - 1.0)).sqrt())
}

/// Stream index of trial `trial` at the `n_index`-th sample size.
pub fn trial_stream(n_index: usize, trial: usize) -> u64 {
    ((n_index as u64) << 32) | trial as u64
}

fn check_run(n_list: &[usize], trials: usize, estimators: &[EstimatorKind]) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("sample sizes must be ascending".into()));
    }
    if estimators.is_empty() {
        return Err(Error::InvalidArgument("no estimators given".into()));
    }
    Ok(())
}

fn estimator_for(kind: EstimatorKind, opts: &RunOptions, rng: &mut ExpRng) -> Estimator {
    Estimator::from_kind(kind, opts.config, opts.binning, rng.next_u64())
}

/// Runs every (N, trial) cell in parallel and returns per-cell results in
/// (N, trial) order.
fn run_cells<F>(base_seed: u64, n_list: &[usize], trials: usize, cell: F) -> Result<Vec<Vec<Vec<f64>>>>
where
    F: Fn(usize, &mut ExpRng) -> Result<Vec<f64>> + Sync,
{
    let jobs: Vec<(usize, usize)> = (0..n_list.len()).flat_map(|a| (0..trials).map(move |t| (a, t))).collect();
    let results: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(a, t)| cell(n_list[a], &mut child(base_seed, trial_stream(a, t))))
        .collect::<Result<_>>()?;
    Ok(results.chunks(trials).map(|c| c.to_vec()).collect())
}

pub fn theory_value(experiment: u8) -> Result<f64> {
    match experiment {
        1 | 3 => Ok(0.0),
        2 => awgn_bsc_theory_cmi(&ChannelParams::default()),
        4 => Ok(zero_inflated_theory_tc(ZERO_INFLATION.0, ZERO_INFLATION.1)),
        other => Err(Error::InvalidArgument(format!("experiment {other} has no convergence target"))),
    }
}

fn convergence_trial(experiment: u8, n: usize, kinds: &[EstimatorKind], opts: &RunOptions, rng: &mut ExpRng) -> Result<Vec<f64>> {
    let (a1, a2, a3) = MARKOV_THRESHOLDS;
    let data = match experiment {
        1 => gen_markov_clip(n, a1, a2, a3, rng)?,
        2 => gen_awgn_bsc(n, &ChannelParams::default(), rng, true)?,
        3 => gen_indep_mixture_tc(n, &MIXTURE_ATOMS, rng)?,
        4 => gen_zero_inflated(n, ZERO_INFLATION.0, ZERO_INFLATION.1, rng)?,
        other => return Err(Error::InvalidArgument(format!("unknown experiment {other}"))),
    };
    let dag = match experiment {
        1 => cmi_dag(&[0], &[2], &[1])?,
        2 => cmi_dag(&[0], &[1], &[2, 3, 4])?,
        3 => tc_dag(&[vec![0], vec![1], vec![2]])?,
        _ => tc_dag(&[vec![0], vec![1], vec![2], vec![3]])?,
    };
    let ests: Vec<Estimator> = kinds.iter().map(|&kind| estimator_for(kind, opts, rng)).collect();
    estimate_all(&ests, &data, &dag)
}

/// Mean and spread of each estimator's value across trials, for the
/// estimation experiments 1 to 4.
pub fn run_convergence(
    experiment: u8,
    n_list: &[usize],
    trials: usize,
    estimators: &[EstimatorKind],
    base_seed: u64,
    opts: &RunOptions,
) -> Result<ConvergenceReport> {
    let theory = theory_value(experiment)?;
    check_run(n_list, trials, estimators)?;
    let cells = run_cells(base_seed, n_list, trials, |n, rng| convergence_trial(experiment, n, estimators, opts, rng))?;
    let mut rows = Vec::new();
    for (&n, per_trial) in n_list.iter().zip(&cells) {
        for (e, &kind) in estimators.iter().enumerate() {
            let values: Vec<f64> = per_trial.iter().map(|t| t[e]).collect();
            let (mean, std) = mean_std(&values);
            rows.push(ConvergenceRow { experiment, estimator: kind, n, trials, mean, std, theory });
        }
    }
    Ok(ConvergenceReport { rows })
}

fn auroc_trial(experiment: u8, n: usize, kinds: &[EstimatorKind], opts: &RunOptions, rng: &mut ExpRng) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(kinds.len());
    if experiment == 5 {
        let mut adjacency = random_dag_adjacency(NETWORK_NODES, NETWORK_DENSITY, rng)?;
        while !adjacency.iter().flatten().any(|&e| e) {
            adjacency = random_dag_adjacency(NETWORK_NODES, NETWORK_DENSITY, rng)?;
        }
        let (ts, truth) = gen_dynamics_network(n, &adjacency, opts.noise, NETWORK_ERASURE, rng)?;
        let ests: Vec<Estimator> = kinds.iter().map(|&kind| estimator_for(kind, opts, rng)).collect();
        for scores in grn_infer_many(&ts, &ests, opts.mode)? {
            out.push(network_auroc(&scores, &truth)?);
        }
    } else {
        let fs = gen_feature_selection(n, rng)?;
        for &kind in kinds {
            let est = estimator_for(kind, opts, rng);
            let sel = cmim_select(&fs.data, fs.target_col, RELEVANT_FEATURES, &est, opts.variant)?;
            let labels: Vec<bool> = sel.features.iter().map(|&f| f < RELEVANT_FEATURES).collect();
            debug_assert_eq!(sel.features.len(), FEATURE_COUNT);
            out.push(super::auroc::auroc(&sel.ranking_scores(), &labels)?);
        }
    }
    Ok(out)
}

/// AUROC of network inference (experiment 5) or feature selection
/// (experiment 6) across trials.
pub fn run_auroc(
    experiment: u8,
    n_list: &[usize],
    trials: usize,
    estimators: &[EstimatorKind],
    base_seed: u64,
    opts: &RunOptions,
) -> Result<AurocReport> {
    if !matches!(experiment, 5 | 6) {
        return Err(Error::InvalidArgument(format!("experiment {experiment} is not an AUROC experiment")));
    }
    check_run(n_list, trials, estimators)?;
    if experiment == 5 && n_list[0] < 3 {
        return Err(Error::InvalidArgument("series need at least three steps".into()));
    }
    let cells = run_cells(base_seed, n_list, trials, |n, rng| auroc_trial(experiment, n, estimators, opts, rng))?;
    let mut rows = Vec::new();
    for (&n, per_trial) in n_list.iter().zip(&cells) {
        for (e, &kind) in estimators.iter().enumerate() {
            let values: Vec<f64> = per_trial.iter().map(|t| t[e]).collect();
            let (auroc_mean, auroc_std) = mean_std(&values);
            rows.push(AurocRow { experiment, estimator: kind, n, trials, auroc_mean, auroc_std });
        }
    }
    Ok(AurocReport { rows })
}

pub fn run_experiment(
    experiment: u8,
    n_list: &[usize],
    trials: usize,
    estimators: &[EstimatorKind],
    base_seed: u64,
    opts: &RunOptions,
) -> Result<Report> {
    match experiment {
        1..=4 => run_convergence(experiment, n_list, trials, estimators, base_seed, opts).map(Report::Convergence),
        5 | 6 => run_auroc(experiment, n_list, trials, estimators, base_seed, opts).map(Report::Auroc),
        other => Err(Error::InvalidArgument(format!("unknown experiment {other}"))),
    }
}
