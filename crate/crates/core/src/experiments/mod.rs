//! Data generators, reference values and evaluation harness for the
//! benchmark experiments.

pub mod auroc;
pub mod generators;
pub mod harness;
pub mod network;
pub mod rng;
pub mod selection;
pub mod theory;

pub use auroc::auroc;
pub use generators::*;
pub use harness::{run_auroc, run_convergence, run_experiment, AurocReport, ConvergenceReport, Report, RunOptions};
pub use network::{grn_infer, grn_infer_many, network_auroc, InferenceMode, ScoreMatrix};
pub use rng::{child, rng, ExpRng};
pub use selection::{cmim_select, Selection, Variant};
pub use theory::{awgn_bsc_theory_cmi, binary_entropy, zero_inflated_theory_tc};
