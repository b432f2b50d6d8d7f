//! Uniform dispatch over every estimator, keyed by short string ids.

use std::fmt;
use std::str::FromStr;

use crate::baselines::{binning_gdm, ksg_from_counts, ksg_gdm, sigma_h_gdm, BinningRule, NoiseRule};
use crate::dag::DagSpec;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::gdm::{estimate_gdm, gdm_from_counts, plug_in_gdm_discrete, resolve_k, CountBundle, EstimatorConfig};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    Gdm,
    Ksg,
    Binning,
    SigmaH,
    PlugIn,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [Self::Gdm, Self::Ksg, Self::Binning, Self::SigmaH, Self::PlugIn];

    pub fn id(self) -> &'static str {
        match self {
            Self::Gdm => "gdm",
            Self::Ksg => "ksg",
            Self::Binning => "bin",
            Self::SigmaH => "sigma_h",
            Self::PlugIn => "oracle",
        }
    }

    pub fn uses_k(self) -> bool {
        matches!(self, Self::Gdm | Self::Ksg | Self::SigmaH)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown estimator id {s:?}")))
    }
}

/// A fully configured estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    Gdm(EstimatorConfig),
    Ksg(EstimatorConfig),
    Binning(BinningRule),
    SigmaH(EstimatorConfig, NoiseRule),
    PlugIn,
}

impl Default for Estimator {
    fn default() -> Self {
        Self::Gdm(EstimatorConfig::auto())
    }
}

impl From<EstimatorConfig> for Estimator {
    fn from(config: EstimatorConfig) -> Self {
        Self::Gdm(config)
    }
}

/// Scalar estimate plus the sample and neighbor counts it used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub k: Option<usize>,
    pub n: usize,
}

impl Estimator {
    /// Default configuration for `kind` with the given neighbor rule and seed.
    pub fn from_kind(kind: EstimatorKind, config: EstimatorConfig, rule: BinningRule, seed: u64) -> Self {
        match kind {
            EstimatorKind::Gdm => Self::Gdm(config),
            EstimatorKind::Ksg => Self::Ksg(config),
            EstimatorKind::Binning => Self::Binning(rule),
            EstimatorKind::SigmaH => Self::SigmaH(config, NoiseRule::with_seed(seed)),
            EstimatorKind::PlugIn => Self::PlugIn,
        }
    }

    pub fn kind(&self) -> EstimatorKind {
        match self {
            Self::Gdm(_) => EstimatorKind::Gdm,
            Self::Ksg(_) => EstimatorKind::Ksg,
            Self::Binning(_) => EstimatorKind::Binning,
            Self::SigmaH(..) => EstimatorKind::SigmaH,
            Self::PlugIn => EstimatorKind::PlugIn,
        }
    }

    pub fn estimate<T: Scalar>(&self, dataset: &Dataset<T>, dag: &DagSpec) -> Result<Estimate<T>> {
        let n = dataset.n_rows();
        let k = |config: &EstimatorConfig| crate::gdm::resolve_k(config, n);
        Ok(match self {
            Self::Gdm(config) => {
                let r = estimate_gdm(dataset, dag, config)?;
                Estimate {
                    value: r.value,
                    k: Some(r.k_used),
                    n,
                }
            }
            Self::Ksg(config) => {
                let r = ksg_gdm(dataset, dag, config)?;
                Estimate {
                    value: r.value,
                    k: Some(r.k_used),
                    n,
                }
            }
            Self::Binning(rule) => Estimate {
                value: binning_gdm(dataset, dag, rule)?,
                k: None,
                n,
            },
            Self::SigmaH(config, noise) => Estimate {
                value: sigma_h_gdm(dataset, dag, config, noise)?,
                k: Some(k(config)?),
                n,
            },
            Self::PlugIn => Estimate {
                value: plug_in_gdm_discrete(dataset, dag)?,
                k: None,
                n,
            },
        })
    }

    pub fn value<T: Scalar>(&self, dataset: &Dataset<T>, dag: &DagSpec) -> Result<T> {
        Ok(self.estimate(dataset, dag)?.value)
    }
}

/// Values of several estimators on one dataset. GDM and KSG entries that
/// resolve to the same `k` and backend share one set of neighbor counts;
/// the values equal those of separate `value` calls.
pub fn estimate_all<T: Scalar>(estimators: &[Estimator], dataset: &Dataset<T>, dag: &DagSpec) -> Result<Vec<T>> {
    let mut out: Vec<Option<T>> = vec![None; estimators.len()];
    let mut resolved = None;
    for (e, est) in estimators.iter().enumerate() {
        if out[e].is_some() {
            continue;
        }
        let config = match est {
            Estimator::Gdm(c) | Estimator::Ksg(c) => c,
            other => {
                out[e] = Some(other.value(dataset, dag)?);
                continue;
            }
        };
        let res = match &resolved {
            Some(r) => r,
            None => resolved.insert(dag.resolve(dataset)?),
        };
        let k = resolve_k(config, dataset.n_rows())?;
        let bundle = CountBundle::compute(dataset, res, k, config.backend)?;
        for (f, other) in estimators.iter().enumerate().skip(e) {
            let value = match other {
                Estimator::Gdm(c) if c.backend == config.backend && resolve_k(c, dataset.n_rows())? == k => {
                    gdm_from_counts(&bundle, res).value
                }
                Estimator::Ksg(c) if c.backend == config.backend && resolve_k(c, dataset.n_rows())? == k => {
                    ksg_from_counts(&bundle, res).value
                }
                _ => continue,
            };
            out[f] = Some(value);
        }
    }
    out.into_iter()
        .map(|v| v.ok_or_else(|| Error::Internal("estimator left unevaluated".into())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for kind in EstimatorKind::ALL {
            assert_eq!(kind.id().parse::<EstimatorKind>().unwrap(), kind);
        }
        assert!("kde".parse::<EstimatorKind>().is_err());
    }

    #[test]
    fn dispatch_reports_k_only_for_neighbor_estimators() {
        let ds = Dataset::new((0..200).map(|i| f64::from(i % 7) + f64::from(i) * 1e-3).collect(), 2, None).unwrap();
        let dag = crate::dag::mi_dag(&[0], &[1]).unwrap();
        for kind in EstimatorKind::ALL {
            let est = Estimator::from_kind(kind, EstimatorConfig::with_k(4), BinningRule::default(), 1);
            let e = est.estimate(&ds, &dag).unwrap();
            assert_eq!(e.n, 100);
            assert_eq!(e.k.is_some(), kind.uses_k(), "{kind}");
        }
    }
}
