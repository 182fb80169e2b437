//! Adversarial search for instances with high expected distortion.
//!
//! [`search`] runs independent simulated-annealing restarts; restart `k`
//! draws from ChaCha stream `k` of the configured seed, so restarts can run
//! in any order or in parallel and [`merge_restarts`] still produces the same
//! result. [`brute_force_small`] scans a grid exhaustively and serves as an
//! independent check on the annealer for tiny supports.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::election::{expected_value, Election};
use crate::error::check_range;
use crate::generators::{
    dirichlet_uniform, gen_diff_dist, gen_example2_line_iid, gen_simplex_metric, Generated,
};
use crate::metric::{metric_closure, Distribution, FiniteMetric, Instance, LineInstance};
use crate::{line, Error, Result};

/// Grid scans refuse to run above this many evaluations.
pub const EVALUATION_CAP: u128 = 100_000_000;

/// Every `SEEDED_EVERY`-th restart starts from a known near-extremal family.
pub const SEEDED_EVERY: usize = 4;

const MIN_DISTANCE: f64 = 1e-6;
const MIN_MOVE_SCALE: f64 = 1e-3;
const INITIAL_MOVE_SCALE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SearchSpace {
    /// Points on the line, candidates drawn from the voter distribution.
    LinePqEqual,
    /// Arbitrary finite metrics, candidates drawn from the voter distribution.
    MetricPqEqual,
    /// Arbitrary finite metrics with independent candidate and voter distributions.
    MetricPqFree,
}

impl SearchSpace {
    pub fn name(self) -> &'static str {
        match self {
            SearchSpace::LinePqEqual => "line_pq_equal",
            SearchSpace::MetricPqEqual => "metric_pq_equal",
            SearchSpace::MetricPqFree => "metric_pq_free",
        }
    }

    /// Proven supremum of the expected distortion over the space.
    pub fn proven_bound(self) -> f64 {
        match self {
            SearchSpace::LinePqEqual => crate::LINE_WORST_CASE,
            SearchSpace::MetricPqEqual => crate::METRIC_UPPER_BOUND,
            SearchSpace::MetricPqFree => crate::DIFFERENT_DISTRIBUTIONS_BOUND,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub space: SearchSpace,
    pub n: usize,
    pub restarts: usize,
    pub steps_per_restart: usize,
    pub init_temp: f64,
    /// Per-step multiplicative temperature decay.
    pub cooling: f64,
    pub seed: u64,
}

impl SearchConfig {
    /// 64 restarts of 20 000 steps with the default schedule.
    pub fn new(space: SearchSpace, n: usize, seed: u64) -> Self {
        Self {
            space,
            n,
            restarts: 64,
            steps_per_restart: 20_000,
            init_temp: 0.05,
            cooling: 0.999,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_range("n", self.n as f64, 2.0, f64::INFINITY, false, true, "n >= 2")?;
        check_range("restarts", self.restarts as f64, 1.0, f64::INFINITY, false, true, ">= 1")?;
        check_range(
            "steps_per_restart",
            self.steps_per_restart as f64,
            1.0,
            f64::INFINITY,
            false,
            true,
            ">= 1",
        )?;
        check_range("init_temp", self.init_temp, 0.0, f64::INFINITY, true, true, "(0, inf)")?;
        check_range("cooling", self.cooling, 0.0, 1.0, true, true, "(0, 1)")
    }
}

/// Best instance of a single restart.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartOutcome {
    pub restart: usize,
    pub best: Generated,
    pub value: f64,
    pub evaluations: u64,
    pub accepted: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub space: SearchSpace,
    pub best_instance: Generated,
    pub best_value: f64,
    pub best_restart: usize,
    /// Best value of each restart, indexed by restart.
    pub per_restart_bests: Vec<f64>,
    pub evaluations: u64,
}

/// Mutable search state; evaluation converts it into a proper instance.
#[derive(Debug, Clone)]
enum State {
    /// `(position, mass)` slots; slots may coincide and carry zero mass.
    Line(Vec<(f64, f64)>),
    Metric {
        n: usize,
        dist: Vec<f64>,
        p: Vec<f64>,
        /// `None` when voters follow `p`.
        q: Option<Vec<f64>>,
    },
}

impl State {
    fn build(&self) -> Result<Generated> {
        match self {
            State::Line(slots) => {
                let mut sorted: Vec<(f64, f64)> =
                    slots.iter().copied().filter(|s| s.1 > 0.0).collect();
                sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut positions: Vec<f64> = Vec::with_capacity(sorted.len());
                let mut mass: Vec<f64> = Vec::with_capacity(sorted.len());
                for (x, p) in sorted {
                    match positions.last() {
                        Some(&last) if last == x => *mass.last_mut().unwrap() += p,
                        _ => {
                            positions.push(x);
                            mass.push(p);
                        }
                    }
                }
                let p = Distribution::from_weights("p", mass)?;
                Ok(Generated::Line(LineInstance::new(positions, p)?))
            }
            State::Metric { n, dist, p, q } => {
                let metric = FiniteMetric::from_flat(*n, dist.clone())?;
                let p = Distribution::from_weights("p", p.clone())?;
                let q = match q {
                    Some(q) => Distribution::from_weights("q", q.clone())?,
                    None => p.clone(),
                };
                Ok(Generated::Metric(Instance::new(metric, p, q)?))
            }
        }
    }
}

fn evaluate(instance: &Generated) -> f64 {
    match instance {
        Generated::Line(l) => line::distortion(l),
        Generated::Metric(m) => expected_value(m),
    }
}

/// Closure followed by rescaling so that the largest distance is 1.
fn project(n: usize, dist: Vec<f64>) -> Result<Vec<f64>> {
    let closed = metric_closure(&FiniteMetric::from_flat(n, dist)?)?;
    let max = closed.max_distance();
    let mut out = closed.as_flat().to_vec();
    if max > 0.0 {
        out.iter_mut().for_each(|d| *d /= max);
    }
    Ok(out)
}

fn random_state(space: SearchSpace, n: usize, rng: &mut ChaCha8Rng) -> Result<State> {
    match space {
        SearchSpace::LinePqEqual => {
            let p = dirichlet_uniform(rng, n);
            Ok(State::Line(p.into_iter().map(|m| (rng.random::<f64>(), m)).collect()))
        }
        SearchSpace::MetricPqEqual | SearchSpace::MetricPqFree => {
            let mut dist = vec![0.0; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = MIN_DISTANCE + (1.0 - rng.random::<f64>());
                    dist[i * n + j] = v;
                    dist[j * n + i] = v;
                }
            }
            let dist = project(n, dist)?;
            let p = dirichlet_uniform(rng, n);
            let q = (space == SearchSpace::MetricPqFree).then(|| dirichlet_uniform(rng, n));
            Ok(State::Metric { n, dist, p, q })
        }
    }
}

/// Near-extremal starting point for the space, padded with massless points.
fn seeded_state(space: SearchSpace, n: usize, rng: &mut ChaCha8Rng) -> Result<State> {
    let eps = 1e-3;
    if n < 3 && space != SearchSpace::MetricPqEqual {
        return random_state(space, n, rng);
    }
    match space {
        SearchSpace::LinePqEqual => {
            let line = gen_example2_line_iid(eps)?;
            let mut slots: Vec<(f64, f64)> = line
                .positions()
                .iter()
                .map(|x| (x + 1.0) / 2.0)
                .zip(line.distribution().as_slice().iter().copied())
                .collect();
            while slots.len() < n {
                slots.push((rng.random::<f64>(), 0.0));
            }
            Ok(State::Line(slots))
        }
        SearchSpace::MetricPqEqual => {
            let (metric, p, _) = gen_simplex_metric(n - 1, eps)?.into_parts();
            Ok(State::Metric {
                n,
                dist: metric.as_flat().to_vec(),
                p: p.into_vec(),
                q: None,
            })
        }
        SearchSpace::MetricPqFree => {
            let (_, p, q) = gen_diff_dist(eps)?.into_parts();
            let mut xs = vec![-1.0, eps, 1.0];
            while xs.len() < n {
                xs.push(2.0 * rng.random::<f64>() - 1.0);
            }
            let mut p = p.into_vec();
            let mut q = q.into_vec();
            p.resize(n, 0.0);
            q.resize(n, 0.0);
            Ok(State::Metric {
                n,
                dist: FiniteMetric::from_positions(&xs).scaled(0.5).as_flat().to_vec(),
                p,
                q: Some(q),
            })
        }
    }
}

/// Moves up to `amount` of mass from a random slot to another one.
fn transfer(weights: &mut [f64], rng: &mut ChaCha8Rng, scale: f64) {
    let n = weights.len();
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    let amount = (scale * rng.random::<f64>()).min(weights[i]);
    weights[i] -= amount;
    weights[j] += amount;
}

fn propose(state: &State, rng: &mut ChaCha8Rng, scale: f64) -> Result<State> {
    let mut next = state.clone();
    match &mut next {
        State::Line(slots) => {
            let n = slots.len();
            match rng.random_range(0..4u8) {
                0 => {
                    let i = rng.random_range(0..n);
                    let x = slots[i].0 + scale * (2.0 * rng.random::<f64>() - 1.0);
                    slots[i].0 = x.clamp(0.0, 1.0);
                }
                1 => {
                    let mut w: Vec<f64> = slots.iter().map(|s| s.1).collect();
                    transfer(&mut w, rng, scale);
                    slots.iter_mut().zip(w).for_each(|(s, m)| s.1 = m);
                }
                2 => {
                    // Split: part of one point's mass moves to the lightest other slot,
                    // placed close by.
                    let i = rng.random_range(0..n);
                    let k = (0..n)
                        .filter(|&k| k != i)
                        .min_by(|&a, &b| slots[a].1.total_cmp(&slots[b].1))
                        .unwrap_or(i);
                    if k != i {
                        let share = rng.random::<f64>() * slots[i].1;
                        let x = slots[i].0 + scale * (2.0 * rng.random::<f64>() - 1.0);
                        slots[k].1 += share;
                        slots[i].1 -= share;
                        slots[k].0 = x.clamp(0.0, 1.0);
                    }
                }
                _ => {
                    // Merge two slots at the position of the second.
                    let i = rng.random_range(0..n);
                    let j = rng.random_range(0..n);
                    if i != j {
                        slots[j].1 += slots[i].1;
                        slots[i].1 = 0.0;
                    }
                }
            }
        }
        State::Metric { n, dist, p, q } => {
            let n = *n;
            let moves = if q.is_some() { 3 } else { 2 };
            match rng.random_range(0..moves) {
                0 => {
                    let i = rng.random_range(0..n);
                    let mut j = rng.random_range(0..n - 1);
                    if j >= i {
                        j += 1;
                    }
                    let v = (dist[i * n + j] + scale * (2.0 * rng.random::<f64>() - 1.0))
                        .max(MIN_DISTANCE);
                    dist[i * n + j] = v;
                    dist[j * n + i] = v;
                    *dist = project(n, core::mem::take(dist))?;
                }
                1 => transfer(p, rng, scale),
                _ => {
                    if let Some(q) = q {
                        transfer(q, rng, scale);
                    }
                }
            }
        }
    }
    Ok(next)
}

/// Runs restart `k` of the search described by `config`.
pub fn run_restart(config: &SearchConfig, k: usize) -> Result<RestartOutcome> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(k as u64);
    let mut state = if k % SEEDED_EVERY == 0 {
        seeded_state(config.space, config.n, &mut rng)?
    } else {
        random_state(config.space, config.n, &mut rng)?
    };
    let mut built = state.build()?;
    let mut value = evaluate(&built);
    let mut best = (built.clone(), value);
    let mut evaluations = 1;
    let mut accepted = 0;
    let mut temp = config.init_temp;
    let mut scale = INITIAL_MOVE_SCALE;
    for _ in 0..config.steps_per_restart {
        let candidate = propose(&state, &mut rng, scale)?;
        let candidate_built = candidate.build()?;
        let candidate_value = evaluate(&candidate_built);
        evaluations += 1;
        let u = rng.random::<f64>();
        if candidate_value >= value || u < libm::exp((candidate_value - value) / temp) {
            state = candidate;
            built = candidate_built;
            value = candidate_value;
            accepted += 1;
            if value > best.1 {
                best = (built.clone(), value);
            }
        }
        temp *= config.cooling;
        scale = (scale * config.cooling).max(MIN_MOVE_SCALE);
    }
    Ok(RestartOutcome {
        restart: k,
        best: best.0,
        value: best.1,
        evaluations,
        accepted,
    })
}

fn flatten(instance: &Generated) -> Vec<f64> {
    match instance {
        Generated::Line(l) => l
            .positions()
            .iter()
            .chain(l.distribution().as_slice())
            .copied()
            .collect(),
        Generated::Metric(m) => m
            .metric()
            .as_flat()
            .iter()
            .chain(m.candidates().as_slice())
            .chain(m.voters().as_slice())
            .copied()
            .collect(),
    }
}

fn lexicographic(a: &Generated, b: &Generated) -> Ordering {
    let (fa, fb) = (flatten(a), flatten(b));
    for (x, y) in fa.iter().zip(&fb) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    fa.len().cmp(&fb.len())
}

/// Combines restart outcomes: highest value wins, then the lexicographically
/// smallest instance, then the lowest restart index.
pub fn merge_restarts(space: SearchSpace, mut outcomes: Vec<RestartOutcome>) -> SearchResult {
    assert!(!outcomes.is_empty(), "at least one restart is required");
    outcomes.sort_by_key(|o| o.restart);
    let per_restart_bests = outcomes.iter().map(|o| o.value).collect();
    let evaluations = outcomes.iter().map(|o| o.evaluations).sum();
    let best = outcomes
        .iter()
        .min_by(|a, b| {
            b.value
                .total_cmp(&a.value)
                .then_with(|| lexicographic(&a.best, &b.best))
                .then(a.restart.cmp(&b.restart))
        })
        .unwrap();
    SearchResult {
        space,
        best_instance: best.best.clone(),
        best_value: best.value,
        best_restart: best.restart,
        per_restart_bests,
        evaluations,
    }
}

/// Runs every restart sequentially.
pub fn search(config: &SearchConfig) -> Result<SearchResult> {
    config.validate()?;
    let outcomes = (0..config.restarts)
        .map(|k| run_restart(config, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_restarts(config.space, outcomes))
}

/// Grid optimum found by [`brute_force_small`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridOptimum {
    pub best_instance: Generated,
    pub value: f64,
    pub evaluations: u64,
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// All ways to write `total` as an ordered sum of `parts` nonnegative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0; parts];
    fn rec(k: usize, left: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k + 1 == current.len() {
            current[k] = left;
            out.push(current.clone());
            return;
        }
        for v in 0..=left {
            current[k] = v;
            rec(k + 1, left - v, current, out);
        }
    }
    if parts > 0 {
        rec(0, total, &mut current, &mut out);
    }
    out
}

/// Strictly increasing `k`-subsets of `1..limit`.
fn increasing(k: usize, limit: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn rec(start: usize, limit: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..limit {
            cur.push(v);
            rec(v + 1, limit, k, cur, out);
            cur.pop();
        }
    }
    rec(1, limit, k, &mut Vec::new(), &mut out);
    out
}

/// Integer distance tables on `{1, …, res}` with `d(0, n−1) = res` satisfying the triangle inequality.
fn grid_metrics(n: usize, res: usize) -> Vec<Vec<usize>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !(i == 0 && j == n - 1))
        .collect();
    let mut out = Vec::new();
    let mut table = vec![0usize; n * n];
    table[n - 1] = res;
    table[(n - 1) * n] = res;
    let mut digits = vec![1usize; pairs.len()];
    loop {
        for (&(i, j), &v) in pairs.iter().zip(&digits) {
            table[i * n + j] = v;
            table[j * n + i] = v;
        }
        let ok = (0..n).all(|i| {
            (0..n).all(|j| (0..n).all(|k| table[i * n + j] <= table[i * n + k] + table[k * n + j]))
        });
        if ok {
            out.push(table.clone());
        }
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return out;
            }
            if digits[pos] < res {
                digits[pos] += 1;
                break;
            }
            digits[pos] = 1;
            pos += 1;
        }
    }
}

/// Exhaustive grid scan over supports of at most four points.
///
/// Line: `x_0 = 0`, `x_{n−1} = 1`, interior points on multiples of `1/res`.
/// Metric: `d(0, n−1) = 1` and every other distance a multiple of `1/res` in
/// `(0, 1]`. Masses range over multiples of `1/res` on the simplex; with
/// independent voters both `p` and `q` do.
pub fn brute_force_small(space: SearchSpace, n: usize, res: usize) -> Result<GridOptimum> {
    check_range("n", n as f64, 2.0, 4.0, false, false, "[2, 4]")?;
    check_range("resolution", res as f64, 8.0, f64::INFINITY, false, true, ">= 8")?;
    let simplex = binomial((res + n - 1) as u128, (n - 1) as u128);
    let required = match space {
        SearchSpace::LinePqEqual => binomial((res - 1) as u128, (n - 2) as u128) * simplex,
        SearchSpace::MetricPqEqual | SearchSpace::MetricPqFree => {
            let free = (n * (n - 1) / 2 - 1) as u32;
            (res as u128).pow(free) * simplex
        }
    };
    if required > EVALUATION_CAP {
        return Err(Error::TooManyEvaluations {
            required,
            cap: EVALUATION_CAP,
        });
    }
    let masses: Vec<Vec<f64>> = compositions(res, n)
        .into_iter()
        .map(|c| c.into_iter().map(|k| k as f64 / res as f64).collect())
        .collect();
    let scale = res as f64;
    let mut best: Option<(Generated, f64)> = None;
    let mut evaluations = 0u64;
    let mut consider = |candidate: &dyn Fn() -> Result<Generated>, value: f64| -> Result<()> {
        if best.as_ref().map_or(true, |b| value > b.1) {
            best = Some((candidate()?, value));
        }
        Ok(())
    };

    match space {
        SearchSpace::LinePqEqual => {
            for interior in increasing(n - 2, res) {
                let mut xs = vec![0.0];
                xs.extend(interior.iter().map(|&k| k as f64 / scale));
                xs.push(1.0);
                for p in &masses {
                    let line = LineInstance::new(xs.clone(), Distribution::from_weights("p", p.clone())?)?;
                    let value = line::distortion(&line);
                    evaluations += 1;
                    consider(&|| Ok(Generated::Line(line.clone())), value)?;
                }
            }
        }
        SearchSpace::MetricPqEqual => {
            for table in grid_metrics(n, res) {
                let metric =
                    FiniteMetric::from_flat(n, table.iter().map(|&k| k as f64 / scale).collect())?;
                for p in &masses {
                    let dist = Distribution::from_weights("p", p.clone())?;
                    let inst = Instance::representative(metric.clone(), dist)?;
                    let value = expected_value(&inst);
                    evaluations += 1;
                    consider(&|| Ok(Generated::Metric(inst.clone())), value)?;
                }
            }
        }
        SearchSpace::MetricPqFree => {
            for table in grid_metrics(n, res) {
                let metric =
                    FiniteMetric::from_flat(n, table.iter().map(|&k| k as f64 / scale).collect())?;
                for q in &masses {
                    let qd = Distribution::from_weights("q", q.clone())?;
                    let base = Instance::new(metric.clone(), qd.clone(), qd.clone())?;
                    let election = Election::new(&base);
                    let rows: Vec<Vec<f64>> = (0..n)
                        .map(|i| ((i + 1)..n).map(|j| election.ratio_unchecked(i, j)).collect())
                        .collect();
                    evaluations += 1;
                    for p in &masses {
                        let value = crate::election::accumulate_rows(p, &rows);
                        consider(
                            &|| {
                                Ok(Generated::Metric(Instance::new(
                                    metric.clone(),
                                    Distribution::from_weights("p", p.clone())?,
                                    qd.clone(),
                                )?))
                            },
                            value,
                        )?;
                    }
                }
            }
        }
    }
    let (best_instance, value) = best.expect("the grid is never empty");
    Ok(GridOptimum {
        best_instance,
        value,
        evaluations,
    })
}
