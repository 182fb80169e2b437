//! Named instance families and seeded random instances.

use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::check_range;
use crate::metric::{metric_closure, Distribution, FiniteMetric, Instance, LineInstance};
use crate::Result;

/// Smallest gap between consecutive positions of [`random_line_instance`].
pub const MIN_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Two candidates at ±1, voters split between −1 and just right of 0.
    Example1,
    /// Three points at `−1, ε, 1` carrying the worst distribution on the line.
    Example2LineIid,
    /// One heavy point at distance 1 from `n` light points that are `1 − ε` apart.
    SimplexMetric,
    /// [`Family::Example1`] with the smaller `ε` range used for the different-distribution bound.
    DiffDist,
    RandomLine,
    RandomMetric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyParams {
    pub family: Family,
    pub eps: f64,
    pub n: usize,
    pub seed: u64,
}

/// Output of [`generate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Generated {
    Metric(Instance),
    Line(LineInstance),
}

impl Generated {
    pub fn to_instance(&self) -> Instance {
        match self {
            Generated::Metric(inst) => inst.clone(),
            Generated::Line(line) => crate::metric::line_to_instance(line),
        }
    }
}

pub fn generate(params: &FamilyParams) -> Result<Generated> {
    Ok(match params.family {
        Family::Example1 => Generated::Metric(gen_example1(params.eps)?),
        Family::Example2LineIid => Generated::Line(gen_example2_line_iid(params.eps)?),
        Family::SimplexMetric => Generated::Metric(gen_simplex_metric(params.n, params.eps)?),
        Family::DiffDist => Generated::Metric(gen_diff_dist(params.eps)?),
        Family::RandomLine => Generated::Line(random_line_instance(params.n, params.seed)?),
        Family::RandomMetric => {
            Generated::Metric(random_metric_instance(params.n, params.seed, false)?)
        }
    })
}

fn two_candidate_instance(eps: f64) -> Result<Instance> {
    let metric = FiniteMetric::from_positions(&[-1.0, eps, 1.0]);
    let p = Distribution::named("p", vec![0.5, 0.0, 0.5])?;
    let q = Distribution::named("q", vec![0.5 - eps, 0.5 + eps, 0.0])?;
    Instance::new(metric, p, q)
}

/// Points `−1, ε, 1`; candidates `1/2` at each of `±1`; voters `1/2 − ε` at `−1` and `1/2 + ε` at `ε`.
pub fn gen_example1(eps: f64) -> Result<Instance> {
    check_range("eps", eps, 0.0, 0.1, true, false, "(0, 0.1]")?;
    two_candidate_instance(eps)
}

/// Positions `(−1, ε, 1)` with masses `(1/2 − ε, 1 − 1/√2, 1/√2 − 1/2 + ε)`.
pub fn gen_example2_line_iid(eps: f64) -> Result<LineInstance> {
    check_range("eps", eps, 0.0, 0.01, true, false, "(0, 0.01]")?;
    let p = vec![0.5 - eps, 1.0 - FRAC_1_SQRT_2, FRAC_1_SQRT_2 - 0.5 + eps];
    LineInstance::new(vec![-1.0, eps, 1.0], Distribution::named("p", p)?)
}

/// `n + 1` points: point 0 has mass `(1 − ε)/2` and distance 1 to the rest,
/// which share `(1 + ε)/2` equally and are `1 − ε` apart.
pub fn gen_simplex_metric(n: usize, eps: f64) -> Result<Instance> {
    check_range("eps", eps, 0.0, 0.1, true, true, "(0, 0.1)")?;
    check_range("n", n as f64, 2.0, f64::INFINITY, false, true, "n >= 2")?;
    let size = n + 1;
    let mut dist = vec![1.0 - eps; size * size];
    for i in 0..size {
        dist[i * size + i] = 0.0;
        dist[i] = if i == 0 { 0.0 } else { 1.0 };
        dist[i * size] = if i == 0 { 0.0 } else { 1.0 };
    }
    let mut p = vec![(1.0 + eps) / (2.0 * n as f64); size];
    p[0] = (1.0 - eps) / 2.0;
    Instance::representative(FiniteMetric::from_flat(size, dist)?, Distribution::named("p", p)?)
}

/// Candidates `1/2` at each of `±1`; voters `1/2 − ε` at `−1` and `1/2 + ε` at `ε`.
pub fn gen_diff_dist(eps: f64) -> Result<Instance> {
    check_range("eps", eps, 0.0, 0.01, true, false, "(0, 0.01]")?;
    two_candidate_instance(eps)
}

/// A pair with ratio exactly 3: `y = 0` without mass, `k` points of mass
/// `1/(2k)` at distance 1 from both `x` and `y`, and `x = k + 1` with mass `1/2`.
///
/// Distances among the `k` middle points are drawn from `[3/4, 3/2]`, which
/// keeps every triangle inequality exact in floating point.
pub fn gen_half_mass_configuration(k: usize, seed: u64) -> Result<Instance> {
    check_range("k", k as f64, 1.0, f64::INFINITY, false, true, "k >= 1")?;
    let n = k + 2;
    let x = k + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dist = vec![0.0; n * n];
    let mut set = |i: usize, j: usize, v: f64| {
        dist[i * n + j] = v;
        dist[j * n + i] = v;
    };
    set(0, x, 2.0);
    for a in 1..=k {
        set(a, 0, 1.0);
        set(a, x, 1.0);
        for b in (a + 1)..=k {
            set(a, b, 0.75 + 0.75 * rng.random::<f64>());
        }
    }
    let mut p = vec![1.0 / (2.0 * k as f64); n];
    p[0] = 0.0;
    p[x] = 0.5;
    Instance::representative(FiniteMetric::from_flat(n, dist)?, Distribution::named("p", p)?)
}

/// Uniform point on the simplex: normalized standard exponentials.
pub fn dirichlet_uniform<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| -libm::log(1.0 - rng.random::<f64>())).collect();
    let total: f64 = crate::sum::sum(w.iter().copied());
    if total > 0.0 {
        w.iter_mut().for_each(|v| *v /= total);
    } else {
        w.iter_mut().for_each(|v| *v = 1.0 / n as f64);
    }
    w
}

/// Sorted uniform positions in `[0, 1]` with gaps of at least [`MIN_GAP`], Dirichlet-uniform masses.
pub fn random_line_instance(n: usize, seed: u64) -> Result<LineInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_line_with(&mut rng, n)
}

pub fn random_line_with<R: Rng>(rng: &mut R, n: usize) -> Result<LineInstance> {
    check_range("n", n as f64, 1.0, f64::INFINITY, false, true, "n >= 1")?;
    let mut u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    u.sort_by(f64::total_cmp);
    let shrink = 1.0 - (n - 1) as f64 * MIN_GAP;
    let positions = u
        .iter()
        .enumerate()
        .map(|(i, &v)| v * shrink + i as f64 * MIN_GAP)
        .collect();
    let p = dirichlet_uniform(rng, n);
    LineInstance::new(positions, Distribution::named("p", p)?)
}

/// Shortest-path closure of a symmetric table with entries uniform in `(0, 1]`.
///
/// `q` equals `p` unless `independent_q` is set.
pub fn random_metric_instance(n: usize, seed: u64, independent_q: bool) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_metric_with(&mut rng, n, independent_q)
}

pub fn random_metric_with<R: Rng>(rng: &mut R, n: usize, independent_q: bool) -> Result<Instance> {
    check_range("n", n as f64, 1.0, f64::INFINITY, false, true, "n >= 1")?;
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 1.0 - rng.random::<f64>();
            dist[i * n + j] = v;
            dist[j * n + i] = v;
        }
    }
    let metric = metric_closure(&FiniteMetric::from_flat(n, dist)?)?;
    let p = Distribution::named("p", dirichlet_uniform(rng, n))?;
    let q = if independent_q {
        Distribution::named("q", dirichlet_uniform(rng, n))?
    } else {
        p.clone()
    };
    Instance::new(metric, p, q)
}

/// `(1 − δ) p + δ w` for a Dirichlet-uniform `w`; every entry moves by at most `δ`.
pub fn perturb_probabilities(p: &Distribution, delta: f64, seed: u64) -> Result<Distribution> {
    check_range("delta", delta, 0.0, 1.0, false, false, "[0, 1]")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = dirichlet_uniform(&mut rng, p.len());
    let mixed = p
        .as_slice()
        .iter()
        .zip(&w)
        .map(|(&pi, &wi)| (1.0 - delta) * pi + delta * wi)
        .collect();
    Distribution::named("p", mixed)
}
