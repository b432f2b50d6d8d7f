//! Synthetic data for the benchmark experiments.

use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Normal, Uniform};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::measures::TimeSeries;

use super::rng::ExpRng;

fn names(list: &[&str]) -> Option<Vec<String>> {
    Some(list.iter().map(|s| s.to_string()).collect())
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn bernoulli(p: f64) -> Result<Bernoulli> {
    Bernoulli::new(p).map_err(|e| bad(format!("probability {p}: {e}")))
}

/// Clipped-uniform Markov chain: X = min(α1, U), Z = min(X, α2), Y = min(Z, α3).
/// Columns are `[X, Z, Y]`.
pub fn gen_markov_clip(n: usize, a1: f64, a2: f64, a3: f64, rng: &mut ExpRng) -> Result<Dataset<f64>> {
    if !(0.0 < a3 && a3 < a2 && a2 < a1 && a1 < 1.0) {
        return Err(bad("need 0 < a3 < a2 < a1 < 1"));
    }
    let mut values = Vec::with_capacity(3 * n);
    for _ in 0..n {
        let x = rng.gen::<f64>().min(a1);
        let z = x.min(a2);
        let y = z.min(a3);
        values.extend([x, z, y]);
    }
    Dataset::new(values, 3, names(&["X", "Z", "Y"]))
}

/// Parameters of the switched AWGN / binary symmetric channel pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub sigma_x: f64,
    pub sigma_n: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            alpha: 0.3,
            beta: 0.2,
            p: 0.5,
            sigma_x: 1.0,
            sigma_n: 0.1,
        }
    }
}

impl ChannelParams {
    pub(crate) fn validate(&self, strict: bool) -> Result<()> {
        let order_ok = if strict {
            0.0 < self.beta && self.beta < self.alpha
        } else {
            0.0 <= self.beta && self.beta <= self.alpha
        };
        if !(order_ok && self.alpha < 1.0) {
            return Err(bad("need 0 < beta < alpha < 1"));
        }
        if !(self.sigma_x > 0.0 && self.sigma_n > 0.0) {
            return Err(bad("channel deviations must be positive"));
        }
        if !(0.0 < self.p && self.p < 1.0) {
            return Err(bad("need 0 < p < 1"));
        }
        Ok(())
    }
}

/// Z = min(α, U). Below β, X ~ N(0, σx²) and Y = X + N(0, σn²); otherwise
/// X ~ Bern(p) and Y = X xor Bern(Z). Columns `[X, Y, Z]`, plus `Z², Z³` when
/// `powers` is set.
pub fn gen_awgn_bsc(n: usize, params: &ChannelParams, rng: &mut ExpRng, powers: bool) -> Result<Dataset<f64>> {
    params.validate(true)?;
    let input = Normal::new(0.0, params.sigma_x).map_err(|e| bad(e.to_string()))?;
    let noise = Normal::new(0.0, params.sigma_n).map_err(|e| bad(e.to_string()))?;
    let bit = bernoulli(params.p)?;
    let width = if powers { 5 } else { 3 };
    let mut values = Vec::with_capacity(width * n);
    for _ in 0..n {
        let z = rng.gen::<f64>().min(params.alpha);
        let (x, y) = if z < params.beta {
            let x = input.sample(rng);
            (x, x + noise.sample(rng))
        } else {
            let x = bit.sample(rng);
            let flip = rng.gen::<f64>() < z;
            (f64::from(u8::from(x)), f64::from(u8::from(x ^ flip)))
        };
        values.extend([x, y, z]);
        if powers {
            values.extend([z * z, z * z * z]);
        }
    }
    let cols: &[&str] = if powers { &["X", "Y", "Z", "Z2", "Z3"] } else { &["X", "Y", "Z"] };
    Dataset::new(values, width, names(cols))
}

/// Independent columns; each entry is the atom `alphas[c]` on heads of a
/// fair coin, else U(0, 1).
pub fn gen_indep_mixture_tc(n: usize, alphas: &[f64], rng: &mut ExpRng) -> Result<Dataset<f64>> {
    if alphas.is_empty() || alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(bad("atoms must lie in [0, 1]"));
    }
    let mut values = Vec::with_capacity(alphas.len() * n);
    for _ in 0..n {
        for &a in alphas {
            values.push(if rng.gen::<bool>() { a } else { rng.gen::<f64>() });
        }
    }
    Dataset::new(values, alphas.len(), None)
}

/// Two independent pairs of U(0.5, 1.5) variables, each pair zeroed
/// together unless its Bern(p) mask is 1. Columns `[X1, X2, X3, X4]`.
pub fn gen_zero_inflated(n: usize, p1: f64, p2: f64, rng: &mut ExpRng) -> Result<Dataset<f64>> {
    if !(0.0 < p1 && p1 < 1.0 && 0.0 < p2 && p2 < 1.0) {
        return Err(bad("mask probabilities must lie in (0, 1)"));
    }
    let (m1, m2) = (bernoulli(p1)?, bernoulli(p2)?);
    let u = Uniform::new(0.5, 1.5);
    let mut values = Vec::with_capacity(4 * n);
    for _ in 0..n {
        for mask in [&m1, &m2] {
            let keep = mask.sample(rng);
            let (a, b) = (u.sample(rng), u.sample(rng));
            if keep {
                values.extend([a, b]);
            } else {
                values.extend([0.0, 0.0]);
            }
        }
    }
    Dataset::new(values, 4, names(&["X1", "X2", "X3", "X4"]))
}

/// How the dynamics noise parameter is read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseScale {
    Variance(f64),
    StdDev(f64),
}

impl NoiseScale {
    pub fn std_dev(self) -> f64 {
        match self {
            Self::Variance(v) => v.sqrt(),
            Self::StdDev(s) => s,
        }
    }
}

impl Default for NoiseScale {
    fn default() -> Self {
        Self::Variance(0.03)
    }
}

/// Square boolean matrix; `adj[i][j]` means an edge `i -> j`.
pub type Adjacency = Vec<Vec<bool>>;

/// Random DAG on `n` nodes: a random order with each forward pair joined
/// with probability `density`.
pub fn random_dag_adjacency(n: usize, density: f64, rng: &mut ExpRng) -> Result<Adjacency> {
    let coin = bernoulli(density)?;
    let mut order: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), rng);
    let mut adj = vec![vec![false; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            if coin.sample(rng) {
                adj[order[a]][order[b]] = true;
            }
        }
    }
    Ok(adj)
}

/// `X_l(t) = tanh(Σ_j w_jl X_j(t−1)) + ε`, weights `±U(0.5, 1.5)`, followed
/// by independent erasure of each observation to `0.0`.
pub fn gen_dynamics_network(
    steps: usize,
    adjacency: &Adjacency,
    noise: NoiseScale,
    erase_p: f64,
    rng: &mut ExpRng,
) -> Result<(TimeSeries<f64>, Adjacency)> {
    let n = adjacency.len();
    if n == 0 || adjacency.iter().any(|row| row.len() != n) {
        return Err(bad("adjacency must be a non-empty square matrix"));
    }
    let sd = noise.std_dev();
    if !(sd > 0.0) {
        return Err(bad("noise must be positive"));
    }
    if !(0.0..1.0).contains(&erase_p) {
        return Err(bad("erasure probability must lie in [0, 1)"));
    }
    let eps = Normal::new(0.0, sd).map_err(|e| bad(e.to_string()))?;
    let magnitude = Uniform::new(0.5, 1.5);
    let mut weights = vec![vec![0.0; n]; n];
    for (j, row) in adjacency.iter().enumerate() {
        for (l, &edge) in row.iter().enumerate() {
            if edge && j != l {
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                weights[j][l] = sign * magnitude.sample(rng);
            }
        }
    }
    let mut state: Vec<f64> = (0..n).map(|_| eps.sample(rng)).collect();
    let mut clean = Vec::with_capacity(steps * n);
    clean.extend_from_slice(&state);
    for _ in 1..steps {
        let next: Vec<f64> = (0..n)
            .map(|l| {
                let drive: f64 = (0..n).map(|j| weights[j][l] * state[j]).sum();
                drive.tanh() + eps.sample(rng)
            })
            .collect();
        clean.extend_from_slice(&next);
        state = next;
    }
    let erase = bernoulli(erase_p)?;
    let observed = clean
        .into_iter()
        .map(|v| if erase.sample(rng) { 0.0 } else { v })
        .collect();
    let ts = TimeSeries::new(Dataset::new(observed, n, None)?)?;
    Ok((ts, adjacency.clone()))
}

/// Fifteen clipped standard normals and the target `cos(X1 + … + X5)`.
#[derive(Debug, Clone)]
pub struct FeatureSelectionData {
    /// Columns `X1..X15` followed by `Y`.
    pub data: Dataset<f64>,
    pub target_col: usize,
    pub clip: Vec<f64>,
    pub relevant: Vec<bool>,
}

pub const FEATURE_COUNT: usize = 15;
pub const RELEVANT_FEATURES: usize = 5;

pub fn gen_feature_selection(n: usize, rng: &mut ExpRng) -> Result<FeatureSelectionData> {
    if n == 0 {
        return Err(bad("need at least one sample"));
    }
    let clip_dist = Uniform::new(0.25, 0.3);
    let clip: Vec<f64> = (0..FEATURE_COUNT).map(|_| clip_dist.sample(rng)).collect();
    let normal: Normal<f64> = Normal::new(0.0, 1.0).expect("unit normal");
    let mut values = Vec::with_capacity(n * (FEATURE_COUNT + 1));
    for _ in 0..n {
        let row: Vec<f64> = clip.iter().map(|&a| normal.sample(rng).min(a)).collect();
        let y = row[..RELEVANT_FEATURES].iter().sum::<f64>().cos();
        values.extend(row);
        values.push(y);
    }
    let mut cols: Vec<String> = (1..=FEATURE_COUNT).map(|i| format!("X{i}")).collect();
    cols.push("Y".into());
    Ok(FeatureSelectionData {
        data: Dataset::new(values, FEATURE_COUNT + 1, Some(cols))?,
        target_col: FEATURE_COUNT,
        clip,
        relevant: (0..FEATURE_COUNT).map(|i| i < RELEVANT_FEATURES).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::rng::rng;

    fn three_sigma(n: usize, p: f64) -> f64 {
        3.0 * (p * (1.0 - p) / n as f64).sqrt()
    }

    #[test]
    fn markov_clip_atoms_are_exact() {
        let ds = gen_markov_clip(10_000, 0.9, 0.8, 0.7, &mut rng(1)).unwrap();
        let y_atoms = ds.column(2).iter().filter(|&&y| y == 0.7).count() as f64 / 1e4;
        assert!((y_atoms - 0.3).abs() <= three_sigma(10_000, 0.3));
        let x_atoms = ds.column(0).iter().filter(|&&x| x == 0.9).count() as f64 / 1e4;
        assert!((x_atoms - 0.1).abs() <= three_sigma(10_000, 0.1));
        for (c, cap) in [(0, 0.9), (1, 0.8), (2, 0.7)] {
            assert!(ds.column(c).iter().all(|&v| v > 0.0 && v <= cap));
        }
        assert!(gen_markov_clip(10, 0.9, 0.7, 0.8, &mut rng(1)).is_err());
    }

    #[test]
    fn awgn_bsc_shares() {
        let ds = gen_awgn_bsc(10_000, &ChannelParams::default(), &mut rng(2), true).unwrap();
        let z = ds.column(2);
        let discrete = z.iter().filter(|&&z| z >= 0.2).count() as f64 / 1e4;
        assert!((discrete - 0.8).abs() <= three_sigma(10_000, 0.8));
        let atom = z.iter().filter(|&&z| z == 0.3).count() as f64 / 1e4;
        assert!((atom - 0.7).abs() <= three_sigma(10_000, 0.7));
        for r in 0..100 {
            let z = ds.get(r, 2);
            assert_eq!(ds.get(r, 3), z * z);
            assert_eq!(ds.get(r, 4), z * z * z);
            if z >= 0.2 {
                assert!(ds.get(r, 0) == 0.0 || ds.get(r, 0) == 1.0);
            }
        }
        let bad = ChannelParams { beta: 0.4, ..ChannelParams::default() };
        assert!(gen_awgn_bsc(10, &bad, &mut rng(2), false).is_err());
    }

    #[test]
    fn mixture_atoms_near_half() {
        let ds = gen_indep_mixture_tc(10_000, &[1.0, 0.5, 0.25], &mut rng(3)).unwrap();
        for (c, a) in [1.0, 0.5, 0.25].into_iter().enumerate() {
            let f = ds.column(c).iter().filter(|&&v| v == a).count() as f64 / 1e4;
            assert!((f - 0.5).abs() <= three_sigma(10_000, 0.5));
        }
    }

    #[test]
    fn zero_inflation_is_shared_within_pairs() {
        let ds = gen_zero_inflated(10_000, 0.6, 0.6, &mut rng(4)).unwrap();
        for r in 0..ds.n_rows() {
            assert_eq!(ds.get(r, 0) == 0.0, ds.get(r, 1) == 0.0);
            assert_eq!(ds.get(r, 2) == 0.0, ds.get(r, 3) == 0.0);
        }
        let zeros = ds.column(0).iter().filter(|&&v| v == 0.0).count() as f64 / 1e4;
        assert!((zeros - 0.4).abs() <= three_sigma(10_000, 0.4));
    }

    #[test]
    fn dynamics_erasure_rate() {
        let adj = random_dag_adjacency(5, 0.3, &mut rng(5)).unwrap();
        let (ts, truth) = gen_dynamics_network(4000, &adj, NoiseScale::default(), 0.5, &mut rng(6)).unwrap();
        assert_eq!(truth, adj);
        for v in 0..5 {
            let zeros = ts.data().column(v).iter().filter(|&&x| x == 0.0).count() as f64 / 4000.0;
            assert!((zeros - 0.5).abs() <= three_sigma(4000, 0.5));
        }
        assert!(gen_dynamics_network(10, &vec![vec![false; 2]; 3], NoiseScale::default(), 0.5, &mut rng(1)).is_err());
    }

    #[test]
    fn random_dag_is_acyclic() {
        let adj = random_dag_adjacency(12, 0.2, &mut rng(7)).unwrap();
        let edges: Vec<(usize, usize)> = (0..12)
            .flat_map(|i| (0..12).map(move |j| (i, j)))
            .filter(|&(i, j)| adj[i][j])
            .collect();
        let nodes = (0..12).map(|i| crate::dag::NodeSpec { id: i.to_string(), columns: vec![i] }).collect();
        let parents = (0..12)
            .map(|j| edges.iter().filter(|e| e.1 == j).map(|e| e.0.to_string()).collect())
            .collect();
        assert!(crate::dag::DagSpec::new(nodes, parents).is_ok());
    }

    #[test]
    fn feature_selection_layout() {
        let fs = gen_feature_selection(10_000, &mut rng(8)).unwrap();
        assert_eq!(fs.relevant, [true, true, true, true, true, false, false, false, false, false, false, false, false, false, false]);
        assert!(fs.data.column(fs.target_col).iter().all(|y| (-1.0..=1.0).contains(y)));
        for (i, &a) in fs.clip.iter().enumerate() {
            assert!((0.25..0.3).contains(&a));
            let mass = fs.data.column(i).iter().filter(|&&v| v == a).count() as f64 / 1e4;
            assert!((0.38 - 0.015..=0.40 + 0.015).contains(&mass), "{mass}");
        }
    }
}
