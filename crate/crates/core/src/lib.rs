//! Graph divergence measures estimated from samples.
//!
//! A graph divergence is the KL divergence between the joint law of some
//! column groups and its factorization along a Bayesian network over those
//! groups. Mutual information, conditional mutual information, total
//! correlation and directed information are all special cases.
//!
//! The central estimator ([`gdm::estimate_gdm`]) couples k-nearest-neighbor
//! radii across subspaces so that it stays consistent when the data mixes
//! atoms, continuous parts and low-dimensional manifolds.
//!
//! ```
//! use graphdiv::{measures, Dataset64, Estimator};
//!
//! let rows: Vec<Vec<f64>> = (0..2000).map(|i| {
//!     let x = (i % 2) as f64;
//!     vec![x, x]
//! }).collect();
//! let data = Dataset64::from_rows(&rows).unwrap();
//! let value = measures::mi(&data, &[0], &[1], &Estimator::default()).unwrap();
//! assert!((value - std::f64::consts::LN_2).abs() < 0.01);
//! ```
//!
//! Everything numeric is generic over [`Scalar`] (`f64` or `f32`).

pub mod baselines;
pub mod dag;
pub mod dataset;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod gdm;
pub mod knn;
pub mod measures;
pub mod scalar;
pub mod special;

pub use dag::{DagSpec, NodeSpec, ResolvedDag};
pub use dataset::{load_dataset, parse_dataset, sniff_header, Dataset};
pub use error::{Error, Result};
pub use estimator::{Estimate, Estimator, EstimatorKind};
pub use gdm::{estimate_gdm, CountBundle, EstimateResult, EstimatorConfig, KChoice};
pub use knn::Backend;
pub use measures::TimeSeries;
pub use scalar::Scalar;

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type TimeSeries64 = TimeSeries<f64>;
pub type TimeSeries32 = TimeSeries<f32>;
pub type EstimateResult64 = EstimateResult<f64>;
pub type EstimateResult32 = EstimateResult<f32>;
