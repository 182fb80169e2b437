//! Finite metrics, probability vectors and election instances.

use alloc::format;
use alloc::vec::Vec;

use crate::sum;
use crate::{Error, Result};

/// Absolute tolerance on `Σ p_i = 1`.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Relative triangle-inequality slack used by [`validate`]: `τ = 1e-9 · max distance`.
pub const TRIANGLE_TOLERANCE: f64 = 1e-9;

/// Symmetric `n × n` distance table, stored row-major.
///
/// Construction only checks shape and finiteness; metric axioms are checked
/// by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetric {
    n: usize,
    dist: Vec<f64>,
}

impl FiniteMetric {
    pub fn from_flat(n: usize, dist: Vec<f64>) -> Result<Self> {
        if dist.len() != n * n {
            return Err(Error::DimensionMismatch {
                field: "distances",
                expected: n * n,
                found: dist.len(),
            });
        }
        if let Some(pos) = dist.iter().position(|d| !d.is_finite()) {
            return Err(Error::InvalidField {
                field: "distances",
                reason: format!("non-finite entry at ({}, {})", pos / n, pos % n),
            });
        }
        Ok(Self { n, dist })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut dist = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    field: "distances",
                    expected: n,
                    found: row.len(),
                });
            }
            dist.extend_from_slice(row);
        }
        Self::from_flat(n, dist)
    }

    /// Metric induced by points on the line: `d(i, j) = |x_i − x_j|`.
    pub fn from_positions(positions: &[f64]) -> Self {
        let n = positions.len();
        let mut dist = Vec::with_capacity(n * n);
        for &xi in positions {
            dist.extend(positions.iter().map(|&xj| libm::fabs(xi - xj)));
        }
        Self { n, dist }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.dist
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.dist.chunks(self.n.max(1)).take(self.n)
    }

    pub fn max_distance(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Multiplies every distance by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            dist: self.dist.iter().map(|d| d * factor).collect(),
        }
    }

    /// Relabels points: point `k` of the result is point `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n;
        let mut dist = Vec::with_capacity(n * n);
        for &a in perm {
            dist.extend(perm.iter().map(|&b| self.get(a, b)));
        }
        Self { n, dist }
    }
}

/// Probability vector over the points of a metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Checks that entries are finite, nonnegative and sum to one within [`SUM_TOLERANCE`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::named("probabilities", probs)
    }

    /// Same as [`Distribution::new`], reporting errors against `field`.
    pub fn named(field: &'static str, probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidField {
                field,
                reason: "empty probability vector".into(),
            });
        }
        if let Some((i, v)) = probs
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidField {
                field,
                reason: format!("entry {i} is {v}, expected a finite nonnegative number"),
            });
        }
        let total = sum::sum(probs.iter().copied());
        if libm::fabs(total - 1.0) > SUM_TOLERANCE {
            return Err(Error::InvalidField {
                field,
                reason: format!("entries sum to {total}, expected 1"),
            });
        }
        Ok(Self { probs })
    }

    /// Normalizes nonnegative weights with a positive total.
    pub fn from_weights(field: &'static str, mut weights: Vec<f64>) -> Result<Self> {
        let total = sum::sum(weights.iter().copied());
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidField {
                field,
                reason: format!("weights sum to {total}"),
            });
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Self::named(field, weights)
    }

    /// All mass on one point.
    pub fn point_mass(n: usize, at: usize) -> Self {
        let mut probs = alloc::vec![0.0; n];
        probs[at] = 1.0;
        Self { probs }
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: alloc::vec![1.0 / n as f64; n],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// Total mass on a set of indices.
    pub fn mass_of<I: IntoIterator<Item = usize>>(&self, indices: I) -> f64 {
        sum::sum(indices.into_iter().map(|i| self.probs[i]))
    }

    /// Number of points carrying positive mass.
    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            probs: perm.iter().map(|&k| self.probs[k]).collect(),
        }
    }
}

/// A metric together with a candidate distribution `p` and a voter distribution `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    metric: FiniteMetric,
    p: Distribution,
    q: Distribution,
}

impl Instance {
    pub fn new(metric: FiniteMetric, p: Distribution, q: Distribution) -> Result<Self> {
        let n = metric.len();
        for (field, len) in [("p", p.len()), ("q", q.len())] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    field,
                    expected: n,
                    found: len,
                });
            }
        }
        Ok(Self { metric, p, q })
    }

    /// Instance with candidates drawn from the voter distribution.
    pub fn representative(metric: FiniteMetric, p: Distribution) -> Result<Self> {
        let q = p.clone();
        Self::new(metric, p, q)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.metric.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.metric.is_empty()
    }

    #[inline]
    pub fn metric(&self) -> &FiniteMetric {
        &self.metric
    }

    #[inline]
    pub fn candidates(&self) -> &Distribution {
        &self.p
    }

    #[inline]
    pub fn voters(&self) -> &Distribution {
        &self.q
    }

    /// Whether `p` and `q` are identical.
    pub fn is_representative(&self) -> bool {
        self.p == self.q
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            metric: self.metric.scaled(factor),
            p: self.p.clone(),
            q: self.q.clone(),
        }
    }

    /// Relabels points: point `k` of the result is point `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            metric: self.metric.permuted(perm),
            p: self.p.permuted(perm),
            q: self.q.permuted(perm),
        }
    }

    pub fn into_parts(self) -> (FiniteMetric, Distribution, Distribution) {
        (self.metric, self.p, self.q)
    }
}

/// Points on the line with one distribution serving as both `p` and `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineInstance {
    positions: Vec<f64>,
    p: Distribution,
}

impl LineInstance {
    pub fn new(positions: Vec<f64>, p: Distribution) -> Result<Self> {
        if positions.len() != p.len() {
            return Err(Error::DimensionMismatch {
                field: "p",
                expected: positions.len(),
                found: p.len(),
            });
        }
        if let Some(i) = positions.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidField {
                field: "positions",
                reason: format!("entry {i} is not finite"),
            });
        }
        if let Some(i) = positions.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::NonIncreasingPositions { index: i + 1 });
        }
        Ok(Self { positions, p })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    #[inline]
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    #[inline]
    pub fn distribution(&self) -> &Distribution {
        &self.p
    }

    pub fn support_size(&self) -> usize {
        self.p.support_size()
    }

    /// Drops points with zero mass.
    pub fn compacted(&self) -> Self {
        let (positions, probs): (Vec<f64>, Vec<f64>) = self
            .positions
            .iter()
            .zip(self.p.as_slice())
            .filter(|(_, &p)| p > 0.0)
            .map(|(&x, &p)| (x, p))
            .unzip();
        Self {
            positions,
            p: Distribution { probs },
        }
    }

    /// Reflection `x ↦ −x`, with points relabeled left to right.
    pub fn mirrored(&self) -> Self {
        Self {
            positions: self.positions.iter().rev().map(|x| -x).collect(),
            p: Distribution {
                probs: self.p.as_slice().iter().rev().copied().collect(),
            },
        }
    }

    pub fn into_parts(self) -> (Vec<f64>, Distribution) {
        (self.positions, self.p)
    }

    /// Builds a line instance from `(position, mass)` pairs that are already sorted
    /// and whose masses already form a distribution.
    pub(crate) fn from_sorted_parts(positions: Vec<f64>, probs: Vec<f64>) -> Self {
        debug_assert!(positions.windows(2).all(|w| w[0] < w[1]));
        Self {
            positions,
            p: Distribution { probs },
        }
    }
}

/// `dist[i][j] = |x_i − x_j|` and `p = q`.
pub fn line_to_instance(line: &LineInstance) -> Instance {
    Instance {
        metric: FiniteMetric::from_positions(&line.positions),
        p: line.p.clone(),
        q: line.p.clone(),
    }
}

/// One violated invariant found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DimensionMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    NonzeroDiagonal {
        i: usize,
        value: f64,
    },
    NegativeDistance {
        i: usize,
        j: usize,
        value: f64,
    },
    Asymmetric {
        i: usize,
        j: usize,
        forward: f64,
        backward: f64,
    },
    /// `d(i, k) > d(i, j) + d(j, k) + τ`.
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        direct: f64,
        detour: f64,
    },
    NegativeMass {
        field: &'static str,
        i: usize,
        value: f64,
    },
    MassSum {
        field: &'static str,
        total: f64,
    },
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match *self {
            Violation::DimensionMismatch {
                field,
                expected,
                found,
            } => write!(f, "{field}: expected {expected} entries, found {found}"),
            Violation::NonzeroDiagonal { i, value } => write!(f, "d({i},{i}) = {value} != 0"),
            Violation::NegativeDistance { i, j, value } => write!(f, "d({i},{j}) = {value} < 0"),
            Violation::Asymmetric {
                i,
                j,
                forward,
                backward,
            } => write!(f, "asymmetric at ({i},{j}): {forward} vs {backward}"),
            Violation::Triangle {
                i,
                j,
                k,
                direct,
                detour,
            } => write!(
                f,
                "triangle ({i},{j},{k}): d({i},{k}) = {direct} > {detour} = d({i},{j}) + d({j},{k})"
            ),
            Violation::NegativeMass { field, i, value } => write!(f, "{field}[{i}] = {value} < 0"),
            Violation::MassSum { field, total } => write!(f, "{field} sums to {total}"),
        }
    }
}

/// Outcome of [`validate`]; empty means every invariant holds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every invariant of the instance with the default triangle slack.
pub fn validate(instance: &Instance) -> ValidationReport {
    validate_with_tolerance(instance, TRIANGLE_TOLERANCE)
}

/// Checks every invariant; the triangle slack is `relative_slack · max distance`.
pub fn validate_with_tolerance(instance: &Instance, relative_slack: f64) -> ValidationReport {
    let mut violations = Vec::new();
    let metric = &instance.metric;
    let n = metric.len();
    for (field, dist) in [("p", &instance.p), ("q", &instance.q)] {
        if dist.len() != n {
            violations.push(Violation::DimensionMismatch {
                field,
                expected: n,
                found: dist.len(),
            });
            continue;
        }
        for (i, &value) in dist.as_slice().iter().enumerate() {
            if value < 0.0 {
                violations.push(Violation::NegativeMass { field, i, value });
            }
        }
        let total = sum::sum(dist.as_slice().iter().copied());
        if libm::fabs(total - 1.0) > SUM_TOLERANCE {
            violations.push(Violation::MassSum { field, total });
        }
    }
    violations.extend(metric_violations(metric, relative_slack));
    ValidationReport { violations }
}

/// Metric-axiom violations of a distance table.
pub fn metric_violations(metric: &FiniteMetric, relative_slack: f64) -> Vec<Violation> {
    let mut violations = Vec::new();
    let n = metric.len();
    for i in 0..n {
        let value = metric.get(i, i);
        if value != 0.0 {
            violations.push(Violation::NonzeroDiagonal { i, value });
        }
        for j in 0..n {
            let value = metric.get(i, j);
            if value < 0.0 {
                violations.push(Violation::NegativeDistance { i, j, value });
            }
            if i < j && value != metric.get(j, i) {
                violations.push(Violation::Asymmetric {
                    i,
                    j,
                    forward: value,
                    backward: metric.get(j, i),
                });
            }
        }
    }
    let slack = relative_slack * metric.max_distance();
    for i in 0..n {
        let row_i = metric.row(i);
        for k in (i + 1)..n {
            let direct = row_i[k];
            let row_k = metric.row(k);
            for j in 0..n {
                let detour = row_i[j] + row_k[j];
                if direct > detour + slack {
                    violations.push(Violation::Triangle {
                        i,
                        j,
                        k,
                        direct,
                        detour,
                    });
                }
            }
        }
    }
    violations
}

/// All-pairs shortest-path closure of a symmetric, zero-diagonal table.
///
/// Floyd-Warshall passes are repeated until a pass changes nothing, so the
/// result satisfies the triangle inequality exactly in floating point.
pub fn metric_closure(table: &FiniteMetric) -> Result<FiniteMetric> {
    let n = table.len();
    for i in 0..n {
        if table.get(i, i) != 0.0 {
            return Err(Error::Precondition(format!(
                "diagonal entry ({i}, {i}) is {}",
                table.get(i, i)
            )));
        }
        for j in 0..n {
            let v = table.get(i, j);
            if v < 0.0 {
                return Err(Error::NegativeDistance { i, j, value: v });
            }
            if v != table.get(j, i) {
                return Err(Error::Precondition(format!("table not symmetric at ({i}, {j})")));
            }
        }
    }
    let mut d = table.dist.clone();
    loop {
        let mut changed = false;
        for k in 0..n {
            for i in 0..n {
                let dik = d[i * n + k];
                for j in 0..n {
                    let via = dik + d[k * n + j];
                    if via < d[i * n + j] {
                        d[i * n + j] = via;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok(FiniteMetric { n, dist: d })
}
