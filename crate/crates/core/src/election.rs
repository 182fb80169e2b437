//! Social costs, pairwise majority elections and expected distortion.
//!
//! Ties are resolved deterministically. A voter equidistant from both
//! candidates votes for the lower index, an exactly even split elects the
//! lower index, and equal social costs make the lower index the optimum.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::metric::Instance;
use crate::sum::Accumulator;
use crate::{Error, Result};

/// Result of the election between candidates `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOutcome {
    pub i: usize,
    pub j: usize,
    pub winner: usize,
    pub opt: usize,
    /// `cost(winner) / cost(opt)`; `+∞` when only the optimum has zero cost.
    pub ratio: f64,
}

/// Costs, pairwise outcomes and the aggregate expected distortion.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionReport {
    pub costs: Vec<f64>,
    /// Every pair `i < j` with `p_i p_j > 0`, in lexicographic order.
    pub pairs: Vec<PairOutcome>,
    /// `+∞` when some pair with positive probability has an infinite ratio.
    pub expected: f64,
    /// Largest ratio over sampled pairs, `1` when no such pair exists.
    pub max_pairwise: f64,
}

impl DistortionReport {
    pub fn is_infinite(&self) -> bool {
        self.expected.is_infinite()
    }
}

/// Distortion ratio for a winner cost and an optimum cost.
#[inline]
pub fn ratio_of(winner_cost: f64, opt_cost: f64) -> f64 {
    if winner_cost == opt_cost {
        1.0
    } else if opt_cost == 0.0 {
        f64::INFINITY
    } else {
        winner_cost / opt_cost
    }
}

fn check_index(i: usize, n: usize) -> Result<()> {
    if i >= n {
        Err(Error::IndexOutOfRange { index: i, n })
    } else {
        Ok(())
    }
}

fn check_pair(i: usize, j: usize, n: usize) -> Result<()> {
    check_index(i, n)?;
    check_index(j, n)?;
    if i == j {
        return Err(Error::SameCandidate(i));
    }
    Ok(())
}

/// Social cost of every point, `c_i = Σ_j q_j d(i, j)`.
pub fn costs(instance: &Instance) -> Vec<f64> {
    let q = instance.voters().as_slice();
    instance
        .metric()
        .rows()
        .map(|row| {
            let mut acc = Accumulator::new();
            for (&qj, &d) in q.iter().zip(row) {
                if qj > 0.0 {
                    acc.add(qj * d);
                }
            }
            acc.total()
        })
        .collect()
}

/// Social cost of point `i`.
pub fn cost(instance: &Instance, i: usize) -> Result<f64> {
    check_index(i, instance.len())?;
    let q = instance.voters().as_slice();
    let mut acc = Accumulator::new();
    for (&qj, &d) in q.iter().zip(instance.metric().row(i)) {
        if qj > 0.0 {
            acc.add(qj * d);
        }
    }
    Ok(acc.total())
}

/// Precomputed costs and voter support for repeated pairwise queries.
#[derive(Debug, Clone)]
pub struct Election<'a> {
    instance: &'a Instance,
    costs: Vec<f64>,
    voters: Vec<usize>,
}

impl<'a> Election<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        let voters = instance
            .voters()
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, &q)| q > 0.0)
            .map(|(k, _)| k)
            .collect();
        Self {
            instance,
            costs: costs(instance),
            voters,
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    /// Majority winner between distinct `i` and `j` (unchecked).
    pub fn winner_unchecked(&self, i: usize, j: usize) -> usize {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let metric = self.instance.metric();
        let q = self.instance.voters().as_slice();
        let row_lo = metric.row(lo);
        let row_hi = metric.row(hi);
        let mut for_lo = Accumulator::new();
        let mut for_hi = Accumulator::new();
        for &k in &self.voters {
            if row_lo[k] <= row_hi[k] {
                for_lo.add(q[k]);
            } else {
                for_hi.add(q[k]);
            }
        }
        if for_lo.total() >= for_hi.total() {
            lo
        } else {
            hi
        }
    }

    /// Socially better of distinct `i` and `j`, lower index on ties.
    pub fn opt_unchecked(&self, i: usize, j: usize) -> usize {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        if self.costs[lo] <= self.costs[hi] {
            lo
        } else {
            hi
        }
    }

    pub fn outcome_unchecked(&self, i: usize, j: usize) -> PairOutcome {
        let winner = self.winner_unchecked(i, j);
        let opt = self.opt_unchecked(i, j);
        PairOutcome {
            i: i.min(j),
            j: i.max(j),
            winner,
            opt,
            ratio: ratio_of(self.costs[winner], self.costs[opt]),
        }
    }

    /// Distortion of the election between `i` and `j`, `1` when `i == j`.
    pub fn ratio_unchecked(&self, i: usize, j: usize) -> f64 {
        if i == j {
            1.0
        } else {
            self.outcome_unchecked(i, j).ratio
        }
    }

    pub fn winner(&self, i: usize, j: usize) -> Result<usize> {
        check_pair(i, j, self.instance.len())?;
        Ok(self.winner_unchecked(i, j))
    }

    pub fn outcome(&self, i: usize, j: usize) -> Result<PairOutcome> {
        check_pair(i, j, self.instance.len())?;
        Ok(self.outcome_unchecked(i, j))
    }

    /// Ratios `r(i, j)` for `j > i`; entries whose pair has zero probability are `1`.
    pub fn ratio_row(&self, i: usize) -> Vec<f64> {
        let p = self.instance.candidates().as_slice();
        let n = p.len();
        if p[i] == 0.0 {
            return alloc::vec![1.0; n - i - 1];
        }
        ((i + 1)..n)
            .map(|j| {
                if p[j] > 0.0 {
                    self.outcome_unchecked(i, j).ratio
                } else {
                    1.0
                }
            })
            .collect()
    }

    /// Sampled pairs of row `i`, in increasing `j`.
    pub fn outcome_row(&self, i: usize) -> Vec<PairOutcome> {
        let p = self.instance.candidates().as_slice();
        if p[i] == 0.0 {
            return Vec::new();
        }
        ((i + 1)..p.len())
            .filter(|&j| p[j] > 0.0)
            .map(|j| self.outcome_unchecked(i, j))
            .collect()
    }

    /// Conditional distortion `Σ_j p_j r(i, j)` given that `i` is one of the candidates.
    pub fn conditional(&self, i: usize) -> f64 {
        let p = self.instance.candidates().as_slice();
        let mut acc = Accumulator::new();
        for (j, &pj) in p.iter().enumerate() {
            if pj > 0.0 {
                acc.add(pj * self.ratio_unchecked(i, j));
            }
        }
        acc.total()
    }
}

/// Majority winner of the election between `i` and `j`.
pub fn winner(instance: &Instance, i: usize, j: usize) -> Result<usize> {
    Election::new(instance).winner(i, j)
}

/// Winner, optimum and ratio of the election between `i` and `j`.
pub fn pair_outcome(instance: &Instance, i: usize, j: usize) -> Result<PairOutcome> {
    Election::new(instance).outcome(i, j)
}

/// Accumulates `Σ p_i² + 2 Σ_{i<j} p_i p_j r_ij` from per-row ratios, in lexicographic order.
///
/// `rows[i]` holds `r(i, j)` for `j > i`, as produced by [`Election::ratio_row`].
pub fn accumulate_rows<R: AsRef<[f64]>>(p: &[f64], rows: &[R]) -> f64 {
    let mut acc = Accumulator::new();
    for (i, row) in rows.iter().enumerate() {
        let pi = p[i];
        if pi == 0.0 {
            continue;
        }
        acc.add(pi * pi);
        for (offset, &r) in row.as_ref().iter().enumerate() {
            let pj = p[i + 1 + offset];
            if pj == 0.0 {
                continue;
            }
            if r.is_infinite() {
                return f64::INFINITY;
            }
            acc.add(2.0 * pi * pj * r);
        }
    }
    acc.total()
}

/// Builds a report from costs and sampled pair outcomes in lexicographic order.
pub fn assemble_report(p: &[f64], costs: Vec<f64>, pairs: Vec<PairOutcome>) -> DistortionReport {
    let mut acc = Accumulator::new();
    let mut infinite = false;
    let mut max_pairwise: f64 = 1.0;
    let mut next = 0;
    for (i, &pi) in p.iter().enumerate() {
        if pi == 0.0 {
            continue;
        }
        acc.add(pi * pi);
        while next < pairs.len() && pairs[next].i == i {
            let pair = pairs[next];
            next += 1;
            max_pairwise = max_pairwise.max(pair.ratio);
            if pair.ratio.is_infinite() {
                infinite = true;
            } else {
                acc.add(2.0 * pi * p[pair.j] * pair.ratio);
            }
        }
    }
    DistortionReport {
        costs,
        pairs,
        expected: if infinite { f64::INFINITY } else { acc.total() },
        max_pairwise,
    }
}

/// Full report: costs, every sampled pair and the expected distortion.
pub fn expected_distortion(instance: &Instance) -> DistortionReport {
    let election = Election::new(instance);
    let pairs = (0..instance.len())
        .flat_map(|i| election.outcome_row(i))
        .collect();
    assemble_report(
        instance.candidates().as_slice(),
        election.costs().to_vec(),
        pairs,
    )
}

/// Expected distortion alone; same arithmetic as [`expected_distortion`].
pub fn expected_value(instance: &Instance) -> f64 {
    let election = Election::new(instance);
    let rows: Vec<Vec<f64>> = (0..instance.len()).map(|i| election.ratio_row(i)).collect();
    accumulate_rows(instance.candidates().as_slice(), &rows)
}

/// Sample mean of pairwise distortion with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Draws `samples` independent candidate pairs from `p` and averages their distortion.
pub fn monte_carlo_distortion(
    instance: &Instance,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples == 0 {
        return Err(Error::Precondition("samples must be at least 1".into()));
    }
    let p = instance.candidates().as_slice();
    let mut cdf = Vec::with_capacity(p.len());
    let mut acc = Accumulator::new();
    for &pi in p {
        acc.add(pi);
        cdf.push(acc.total());
    }
    let total = acc.total();
    if total <= 0.0 {
        return Err(Error::Precondition("candidate distribution has no support".into()));
    }
    let last_support = p.iter().rposition(|&x| x > 0.0).unwrap_or(0);
    let draw = |rng: &mut ChaCha8Rng| -> usize {
        let u = rng.random::<f64>() * total;
        let k = cdf.partition_point(|&c| c <= u);
        k.min(last_support)
    };

    let election = Election::new(instance);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for t in 1..=samples {
        let i = draw(&mut rng);
        let j = draw(&mut rng);
        let r = election.ratio_unchecked(i, j);
        let delta = r - mean;
        mean += delta / t as f64;
        m2 += delta * (r - mean);
    }
    let std_error = if samples > 1 {
        libm::sqrt(m2 / (samples - 1) as f64 / samples as f64)
    } else {
        0.0
    };
    Ok(MonteCarloEstimate {
        mean,
        std_error,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{line_to_instance, Distribution, FiniteMetric, LineInstance};
    use alloc::vec;

    fn line(xs: &[f64], p: &[f64]) -> Instance {
        line_to_instance(
            &LineInstance::new(xs.to_vec(), Distribution::new(p.to_vec()).unwrap()).unwrap(),
        )
    }

    /// Voters 0.49 at −1 and 0.51 at 0.01; candidates at −1 and 1.
    fn example_one() -> Instance {
        let xs = [-1.0, 0.01, 1.0];
        let metric = FiniteMetric::from_positions(&xs);
        Instance::new(
            metric,
            Distribution::new(vec![0.5, 0.0, 0.5]).unwrap(),
            Distribution::new(vec![0.49, 0.51, 0.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn example_one_costs() {
        let inst = example_one();
        let c = costs(&inst);
        assert!((c[0] - 0.51 * 1.01).abs() < 1e-15);
        assert!((c[2] - (0.49 * 2.0 + 0.51 * 0.99)).abs() < 1e-15);
        assert_eq!(winner(&inst, 0, 2).unwrap(), 2);
        let out = pair_outcome(&inst, 0, 2).unwrap();
        assert_eq!(out.opt, 0);
        assert!((out.ratio - 1.4849 / 0.5151).abs() < 1e-12);
    }

    #[test]
    fn zero_cost_when_all_voters_at_candidate() {
        let inst = Instance::new(
            FiniteMetric::from_positions(&[0.0, 1.0]),
            Distribution::uniform(2),
            Distribution::point_mass(2, 1),
        )
        .unwrap();
        assert_eq!(cost(&inst, 1).unwrap(), 0.0);
        let out = pair_outcome(&inst, 0, 1).unwrap();
        assert_eq!((out.winner, out.opt, out.ratio), (1, 1, 1.0));
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(ratio_of(0.0, 0.0), 1.0);
        assert_eq!(ratio_of(2.0, 2.0), 1.0);
        assert_eq!(ratio_of(1.0, 0.0), f64::INFINITY);
        assert_eq!(ratio_of(3.0, 1.5), 2.0);
    }

    #[test]
    fn infinite_pairs_poison_the_total() {
        let p = [0.5, 0.5];
        let rows = [vec![f64::INFINITY], vec![]];
        assert_eq!(accumulate_rows(&p, &rows), f64::INFINITY);
        let pairs = vec![PairOutcome {
            i: 0,
            j: 1,
            winner: 1,
            opt: 0,
            ratio: f64::INFINITY,
        }];
        let report = assemble_report(&p, vec![0.0, 1.0], pairs);
        assert!(report.is_infinite());
        assert_eq!(report.max_pairwise, f64::INFINITY);
    }

    #[test]
    fn even_split_goes_to_lower_index() {
        let inst = line(&[0.0, 1.0], &[0.5, 0.5]);
        assert_eq!(winner(&inst, 0, 1).unwrap(), 0);
        assert_eq!(winner(&inst, 1, 0).unwrap(), 0);
    }

    #[test]
    fn same_candidate_is_rejected() {
        let inst = line(&[0.0, 1.0], &[0.5, 0.5]);
        assert_eq!(winner(&inst, 1, 1), Err(Error::SameCandidate(1)));
        assert!(matches!(
            pair_outcome(&inst, 0, 7),
            Err(Error::IndexOutOfRange { index: 7, n: 2 })
        ));
    }

    #[test]
    fn singleton_distortion_is_one() {
        let inst = line(&[3.0], &[1.0]);
        let report = expected_distortion(&inst);
        assert_eq!(report.expected, 1.0);
        assert_eq!(report.max_pairwise, 1.0);
        assert!(report.pairs.is_empty());
    }

    #[test]
    fn three_point_line_value() {
        let inst = line(&[0.0, 0.6, 1.0], &[0.45, 0.30, 0.25]);
        let report = expected_distortion(&inst);
        let r13 = 0.57 / 0.43;
        let expected = 0.45 * 0.45 + 0.3 * 0.3 + 0.25 * 0.25 + 2.0 * (0.45 * 0.3 + 0.3 * 0.25 + 0.45 * 0.25 * r13);
        assert!((report.expected - expected).abs() < 1e-14);
        assert_eq!(report.pairs[1].winner, 2);
        assert_eq!(expected_value(&inst), report.expected);
    }

    #[test]
    fn monte_carlo_singleton_is_exact() {
        let inst = line(&[0.0, 1.0], &[1.0, 0.0]);
        let est = monte_carlo_distortion(&inst, 1000, 7).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.std_error, 0.0);
        assert!(monte_carlo_distortion(&inst, 0, 7).is_err());
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let inst = line(&[0.0, 0.6, 1.0], &[0.45, 0.30, 0.25]);
        let a = monte_carlo_distortion(&inst, 5000, 11).unwrap();
        let b = monte_carlo_distortion(&inst, 5000, 11).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        let exact = expected_value(&inst);
        assert!((a.mean - exact).abs() < 4.0 * a.std_error);
    }
}
