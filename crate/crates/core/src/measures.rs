//! Named information measures expressed as graph divergences.

use crate::dag::{cmi_dag, mi_dag, tc_dag, DagSpec};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimator::Estimator;
use crate::scalar::Scalar;

/// Largest group count accepted by [`mmi`]; Bell(10) − 1 = 115974 partitions.
pub const MAX_MMI_GROUPS: usize = 10;

/// Longest series accepted by [`directed_information_full_history`].
pub const MAX_FULL_HISTORY_STEPS: usize = 30;

/// `I(A; B)`.
pub fn mi<T: Scalar>(dataset: &Dataset<T>, a: &[usize], b: &[usize], est: &Estimator) -> Result<T> {
    est.value(dataset, &mi_dag(a, b)?)
}

/// `I(A; B | C)`.
pub fn cmi<T: Scalar>(dataset: &Dataset<T>, a: &[usize], b: &[usize], c: &[usize], est: &Estimator) -> Result<T> {
    est.value(dataset, &cmi_dag(a, b, c)?)
}

/// Total correlation of the column groups.
pub fn total_correlation<T: Scalar>(dataset: &Dataset<T>, groups: &[Vec<usize>], est: &Estimator) -> Result<T> {
    est.value(dataset, &tc_dag(groups)?)
}

/// A set partition of group indices, with its restricted growth string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    rgs: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn from_rgs(rgs: Vec<usize>) -> Result<Self> {
        let mut max = None;
        for (i, &b) in rgs.iter().enumerate() {
            let limit = max.map_or(0, |m| m + 1);
            if b > limit || (i == 0 && b != 0) {
                return Err(Error::InvalidArgument(format!("{rgs:?} is not a restricted growth string")));
            }
            max = Some(max.map_or(b, |m: usize| m.max(b)));
        }
        let count = max.map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); count];
        for (g, &b) in rgs.iter().enumerate() {
            blocks[b].push(g);
        }
        Ok(Self { rgs, blocks })
    }

    pub fn rgs(&self) -> &[usize] {
        &self.rgs
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Restricted growth string as text, e.g. `"0011"`.
    pub fn rgs_string(&self) -> String {
        self.rgs
            .iter()
            .map(|&b| std::char::from_digit(b as u32, 36).unwrap_or('?'))
            .collect()
    }

    /// Edgeless graph with one node per block, agglomerating the groups.
    pub fn dag(&self, groups: &[Vec<usize>]) -> Result<DagSpec> {
        let merged: Vec<Vec<usize>> = self
            .blocks
            .iter()
            .map(|b| b.iter().flat_map(|&g| groups[g].iter().copied()).collect())
            .collect();
        tc_dag(&merged)
    }
}

/// All partitions of `n` items into at least two blocks, in lexicographic
/// order of their restricted growth strings.
pub fn partitions(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut rgs = vec![0usize; n];
    loop {
        if rgs.iter().any(|&b| b > 0) {
            out.push(Partition::from_rgs(rgs.clone()).expect("valid rgs"));
        }
        // advance to the next restricted growth string
        let mut i = n - 1;
        loop {
            let prefix_max = rgs[..i].iter().copied().max().unwrap_or(0);
            if i > 0 && rgs[i] <= prefix_max {
                rgs[i] += 1;
                rgs[i + 1..].iter_mut().for_each(|b| *b = 0);
                break;
            }
            if i <= 1 {
                return out;
            }
            i -= 1;
        }
    }
}

/// Divergence of a partition divided by `blocks − 1`.
pub fn partition_information<T: Scalar>(
    dataset: &Dataset<T>,
    groups: &[Vec<usize>],
    partition: &Partition,
    est: &Estimator,
) -> Result<T> {
    let divergence = est.value(dataset, &partition.dag(groups)?)?;
    Ok(divergence / T::of_usize(partition.blocks().len() - 1))
}

/// Multivariate mutual information: the minimum normalized divergence over
/// all partitions into two or more blocks. Ties go to the smallest
/// restricted growth string.
pub fn mmi<T: Scalar>(dataset: &Dataset<T>, groups: &[Vec<usize>], est: &Estimator) -> Result<(T, Partition)> {
    if !(2..=MAX_MMI_GROUPS).contains(&groups.len()) {
        return Err(Error::InvalidArgument(format!(
            "mmi needs 2..={MAX_MMI_GROUPS} groups, got {}",
            groups.len()
        )));
    }
    tc_dag(groups)?.resolve(dataset)?;
    let mut best: Option<(T, Partition)> = None;
    for p in partitions(groups.len()) {
        let v = partition_information(dataset, groups, &p, est)?;
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, p));
        }
    }
    Ok(best.expect("at least one partition"))
}

/// A multivariate series; row `t` holds every variable at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    data: Dataset<T>,
}

impl<T: Scalar> TimeSeries<T> {
    pub fn new(data: Dataset<T>) -> Result<Self> {
        if data.n_rows() < 2 {
            return Err(Error::InvalidArgument("time series needs at least 2 steps".into()));
        }
        Ok(Self { data })
    }

    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self> {
        Self::new(Dataset::from_columns(columns, None)?)
    }

    pub fn n_steps(&self) -> usize {
        self.data.n_rows()
    }

    pub fn n_vars(&self) -> usize {
        self.data.n_cols()
    }

    pub fn data(&self) -> &Dataset<T> {
        &self.data
    }

    #[inline]
    pub fn at(&self, t: usize, var: usize) -> T {
        self.data.get(t, var)
    }

    fn check_var(&self, v: usize) -> Result<()> {
        if v >= self.n_vars() {
            return Err(Error::InvalidArgument(format!("variable {v} out of range")));
        }
        Ok(())
    }
}

/// Pools lagged rows `(x_{t−m..t−1}, y_t, y_{t−m..t−1}, z_{t−m..t−1}...)`
/// for `t = m..T−1` and returns the dataset with the column groups
/// `(source lags, target now, conditioning lags)`.
fn pooled_lags<T: Scalar>(
    ts: &TimeSeries<T>,
    source: usize,
    target: usize,
    extra: &[usize],
    order: usize,
) -> Result<(Dataset<T>, Vec<usize>, Vec<usize>, Vec<usize>)> {
    if order == 0 {
        return Err(Error::InvalidArgument("order must be positive".into()));
    }
    if order >= ts.n_steps() {
        return Err(Error::InvalidArgument(format!(
            "order {order} needs more than {} steps",
            ts.n_steps()
        )));
    }
    let conditioning: Vec<usize> = std::iter::once(target).chain(extra.iter().copied()).collect();
    let width = order * (1 + conditioning.len()) + 1;
    let mut values = Vec::with_capacity((ts.n_steps() - order) * width);
    for t in order..ts.n_steps() {
        values.extend((t - order..t).map(|s| ts.at(s, source)));
        values.push(ts.at(t, target));
        for &v in &conditioning {
            values.extend((t - order..t).map(|s| ts.at(s, v)));
        }
    }
    let dataset = Dataset::new(values, width, None)?;
    Ok((dataset, (0..order).collect(), vec![order], (order + 1..width).collect()))
}

/// Order-`m` directed information rate `I(x_{t−m..t−1}; y_t | y_{t−m..t−1})`
/// estimated from lagged tuples pooled over time.
pub fn directed_information<T: Scalar>(
    ts: &TimeSeries<T>,
    x: usize,
    y: usize,
    order: usize,
    est: &Estimator,
) -> Result<T> {
    ts.check_var(x)?;
    ts.check_var(y)?;
    let (data, a, b, c) = pooled_lags(ts, x, y, &[], order)?;
    cmi(&data, &a, &b, &c, est)
}

/// Exact-history directed information `(1/T) Σ_t I(X^t; Y_t | Y^{t−1})` from
/// independent realizations of the same process. Each realization
/// contributes one sample to every term.
pub fn directed_information_full_history<T: Scalar>(
    runs: &[TimeSeries<T>],
    x: usize,
    y: usize,
    est: &Estimator,
) -> Result<T> {
    let first = runs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no realizations".into()))?;
    let steps = first.n_steps();
    if steps > MAX_FULL_HISTORY_STEPS {
        return Err(Error::InvalidArgument(format!(
            "full-history mode supports at most {MAX_FULL_HISTORY_STEPS} steps, got {steps}"
        )));
    }
    if runs.iter().any(|r| r.n_steps() != steps) {
        return Err(Error::InvalidArgument("realizations differ in length".into()));
    }
    first.check_var(x)?;
    first.check_var(y)?;
    let mut total = T::zero();
    for t in 1..=steps {
        // columns: x_1..x_t, y_t, y_1..y_{t−1}
        let width = 2 * t;
        let mut values = Vec::with_capacity(runs.len() * width);
        for run in runs {
            values.extend((0..t).map(|s| run.at(s, x)));
            values.push(run.at(t - 1, y));
            values.extend((0..t - 1).map(|s| run.at(s, y)));
        }
        let data = Dataset::new(values, width, None)?;
        let a: Vec<usize> = (0..t).collect();
        let term = if t == 1 {
            mi(&data, &a, &[t], est)?
        } else {
            cmi(&data, &a, &[t], &(t + 1..width).collect::<Vec<_>>(), est)?
        };
        total = total + term;
    }
    Ok(total / T::of_usize(steps))
}

/// Restricted directed information `I(X_i(t−1); X_j(t) | X_j(t−1))`.
pub fn rdi<T: Scalar>(ts: &TimeSeries<T>, source: usize, target: usize, est: &Estimator) -> Result<T> {
    rdi_conditioned(ts, source, target, &[], est)
}

/// Conditional RDI `I(X_i(t−1); X_j(t) | X_j(t−1), Z(t−1))`.
pub fn crdi<T: Scalar>(ts: &TimeSeries<T>, source: usize, target: usize, cond: usize, est: &Estimator) -> Result<T> {
    rdi_conditioned(ts, source, target, &[cond], est)
}

fn rdi_conditioned<T: Scalar>(
    ts: &TimeSeries<T>,
    source: usize,
    target: usize,
    cond: &[usize],
    est: &Estimator,
) -> Result<T> {
    let (data, dag) = rdi_sample(ts, source, target, cond)?;
    est.value(&data, &dag)
}

/// The pooled first-order sample `(X_i(t−1), X_j(t), X_j(t−1), Z(t−1))` and
/// the graph whose divergence on it is the (conditional) RDI.
pub fn rdi_sample<T: Scalar>(
    ts: &TimeSeries<T>,
    source: usize,
    target: usize,
    cond: &[usize],
) -> Result<(Dataset<T>, DagSpec)> {
    for &v in [source, target].iter().chain(cond) {
        ts.check_var(v)?;
    }
    if source == target {
        return Err(Error::InvalidArgument("source and target must differ".into()));
    }
    if cond.contains(&source) {
        return Err(Error::InvalidArgument("conditioning variable equals the source".into()));
    }
    let (data, a, b, c) = pooled_lags(ts, source, target, cond, 1)?;
    let dag = cmi_dag(&a, &b, &c)?;
    Ok((data, dag))
}
