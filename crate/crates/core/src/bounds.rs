//! Upper-bound machinery for expected distortion in general metrics.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::election::{Election, PairOutcome};
use crate::error::check_range;
use crate::metric::Instance;
use crate::sum::Accumulator;
use crate::{Error, Result};

/// Relative slack of the cost cap `c_W ≤ 3 c_O`.
pub const COST_CAP_TOLERANCE: f64 = 1e-9;

/// Largest `δ` for which the near-extremal structure bounds apply.
pub const DELTA_REGIME: f64 = 0.01;

/// A named numeric inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`; negative when violated.
    pub slack: f64,
    pub pass: bool,
    /// `false` when the hypotheses of the inequality do not hold, so a
    /// failure does not contradict anything proven.
    pub applicable: bool,
}

impl InequalityCheck {
    /// `lhs ≤ rhs + tolerance`.
    pub fn at_most(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            pass: lhs <= rhs + tolerance,
            applicable: true,
        }
    }

    pub fn informational(mut self) -> Self {
        self.applicable = false;
        self
    }

    /// A failing check whose hypotheses hold.
    pub fn is_violation(&self) -> bool {
        self.applicable && !self.pass
    }
}

/// Pairs whose winner costs more than three times the optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct CostCapReport {
    pub checked_pairs: usize,
    pub max_ratio: f64,
    /// First pair attaining `max_ratio` with a winner other than the optimum.
    pub worst: Option<PairOutcome>,
    pub violations: Vec<PairOutcome>,
}

/// Checks `c(W(i, j)) ≤ (3 + 1e−9) c(O(i, j))` for every pair of points.
pub fn check_cost_cap(instance: &Instance) -> CostCapReport {
    let election = Election::new(instance);
    let n = instance.len();
    let mut report = CostCapReport {
        checked_pairs: 0,
        max_ratio: 1.0,
        worst: None,
        violations: Vec::new(),
    };
    for i in 0..n {
        for j in (i + 1)..n {
            let out = election.outcome_unchecked(i, j);
            report.checked_pairs += 1;
            if out.ratio > report.max_ratio {
                report.max_ratio = out.ratio;
                report.worst = Some(out);
            }
            let c = election.costs();
            if c[out.winner] > (3.0 + COST_CAP_TOLERANCE) * c[out.opt] {
                report.violations.push(out);
            }
        }
    }
    report
}

fn sorted_support(p: &[f64], costs: &[f64]) -> Result<Vec<(f64, f64)>> {
    if p.len() != costs.len() {
        return Err(Error::DimensionMismatch {
            field: "costs",
            expected: p.len(),
            found: costs.len(),
        });
    }
    let mut support = Vec::with_capacity(p.len());
    for (index, (&pi, &ci)) in p.iter().zip(costs).enumerate() {
        if !(pi >= 0.0) || !pi.is_finite() {
            return Err(Error::InvalidField {
                field: "p",
                reason: format!("entry {index} is {pi}"),
            });
        }
        if pi == 0.0 {
            continue;
        }
        if !(ci > 0.0) || !ci.is_finite() {
            return Err(Error::NonPositiveCost { index, value: ci });
        }
        support.push((ci, pi));
    }
    support.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(support)
}

/// `2 Σ_{i<j≤last(i)} p_i p_j (c_j/c_i − 1)` over points sorted by cost.
fn csoc_sorted(support: &[(f64, f64)], alpha: f64) -> f64 {
    let mut acc = Accumulator::new();
    for (k, &(ci, pi)) in support.iter().enumerate() {
        let limit = alpha * ci;
        for &(cj, pj) in &support[k + 1..] {
            if cj > limit {
                break;
            }
            acc.add(2.0 * pi * pj * (cj / ci - 1.0));
        }
    }
    acc.total()
}

/// Upper bound on `expected − 1` assuming every election within cost factor `alpha`
/// elects the worse candidate.
///
/// Points with zero mass are ignored; every other point needs a positive cost.
pub fn csoc(p: &[f64], costs: &[f64], alpha: f64) -> Result<f64> {
    check_range("alpha", alpha, 1.0, 3.0, false, false, "[1, 3]")?;
    let support = sorted_support(p, costs)?;
    Ok(csoc_sorted(&support, alpha))
}

/// Outcome of [`csoc_merge_maximize`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsocMerge {
    pub start: f64,
    pub value: f64,
    /// Value after each mass move or merge, in order.
    pub steps: Vec<f64>,
    /// Remaining `(cost, mass)` points, ascending by cost.
    pub support: Vec<(f64, f64)>,
}

/// Applies the mass moves that never decrease [`csoc`] until two points remain.
///
/// Pairs more than `alpha` apart lose one endpoint (whichever gives the larger
/// value, the functional being linear in the transferred mass). Afterwards
/// equal costs are merged and the second-cheapest point is moved onto a
/// neighbour's cost (the functional being convex in that cost).
pub fn csoc_merge_maximize(p: &[f64], costs: &[f64], alpha: f64) -> Result<CsocMerge> {
    check_range("alpha", alpha, 1.0, 3.0, false, false, "[1, 3]")?;
    let mut support = sorted_support(p, costs)?;
    let start = csoc_sorted(&support, alpha);
    let mut steps = Vec::new();

    let merged = |support: &[(f64, f64)], from: usize, into: usize| {
        let mut next = support.to_vec();
        next[into].1 += next[from].1;
        next.remove(from);
        next
    };

    while let Some((i, j)) = far_pair(&support, alpha) {
        let up = merged(&support, i, j);
        let down = merged(&support, j, i);
        let (vu, vd) = (csoc_sorted(&up, alpha), csoc_sorted(&down, alpha));
        support = if vu >= vd { up } else { down };
        steps.push(vu.max(vd));
    }

    let mut k = 1;
    while k < support.len() {
        if support[k].0 == support[k - 1].0 {
            support = merged(&support, k, k - 1);
            steps.push(csoc_sorted(&support, alpha));
        } else {
            k += 1;
        }
    }

    while support.len() > 2 {
        let down = merged(&support, 1, 0);
        let mut up = support.clone();
        up[1].0 = up[2].0;
        let up = merged(&up, 1, 2);
        let (vu, vd) = (csoc_sorted(&up, alpha), csoc_sorted(&down, alpha));
        support = if vu >= vd { up } else { down };
        steps.push(vu.max(vd));
    }

    Ok(CsocMerge {
        start,
        value: csoc_sorted(&support, alpha),
        steps,
        support,
    })
}

fn far_pair(support: &[(f64, f64)], alpha: f64) -> Option<(usize, usize)> {
    for i in 0..support.len() {
        let limit = alpha * support[i].0;
        if let Some(j) = (i + 1..support.len()).find(|&j| support[j].0 > limit) {
            return Some((i, j));
        }
    }
    None
}

/// `(1 + α)/2`: expected distortion cap when no pair exceeds ratio `α`.
pub fn diff_with_cap_bound(alpha: f64) -> Result<f64> {
    check_range("alpha", alpha, 1.0, 3.0, false, false, "[1, 3]")?;
    Ok((1.0 + alpha) / 2.0)
}

/// `3/2 + 9√δ`: expected distortion cap when the largest pair ratio is `3 − δ`.
pub fn two_minus_eps_bound(delta: f64) -> Result<f64> {
    check_range("delta", delta, 0.0, DELTA_REGIME, false, false, "[0, 1/100]")?;
    Ok(1.5 + 9.0 * libm::sqrt(delta))
}

/// `(1 − p + ρ + pρ) / (p(1 − ρ))`, shared by the Δ bounds.
fn spread(p: f64, rho: f64) -> f64 {
    (1.0 - p + rho + p * rho) / (p * (1.0 - rho))
}

fn check_delta_domain(p: f64, rho: f64) -> Result<()> {
    check_range("p", p, 0.0, 0.5, true, false, "(0, 1/2]")?;
    check_range("rho", rho, 0.0, 1.0, false, true, "[0, 1)")
}

/// `1 + 2 · (2/(1 − ρ)) · (1 − p + ρ + pρ)/(p(1 − ρ))`, the cap on `Δ_{i,j,b}`.
pub fn delta_cap(p: f64, rho: f64) -> Result<f64> {
    check_delta_domain(p, rho)?;
    Ok(1.0 + 2.0 * (2.0 / (1.0 - rho)) * spread(p, rho))
}

/// The three case bounds on `Δ_{i,j,b}`; the last one equals [`delta_cap`].
pub fn delta_case_bounds(p: f64, rho: f64, delta: f64) -> Result<[f64; 3]> {
    check_delta_domain(p, rho)?;
    let f = spread(p, rho);
    Ok([
        2.0 * f + 3.0 - delta,
        1.0 + 4.0 / (1.0 - rho),
        1.0 + 4.0 * f / (1.0 - rho),
    ])
}

/// `δ / ((2 − δ)(1 − 2p))`, the cap on `ρ_A + ρ_B`.
pub fn rho_cap(delta: f64, p: f64) -> f64 {
    if delta == 0.0 {
        return 0.0;
    }
    let denom = (2.0 - delta) * (1.0 - 2.0 * p);
    if denom == 0.0 {
        f64::INFINITY
    } else {
        delta / denom
    }
}

/// Default mass parameter `(1 − √δ)/2`.
pub fn default_p_target(delta: f64) -> f64 {
    (1.0 - libm::sqrt(delta)) / 2.0
}

/// `2(1 − 2p)(3 − δ) + p²(1 − ρ)/(1 − 2ρ) + p² · delta_cap(p, ρ)` with `ρ = rho_cap(δ, p)`.
pub fn structured_bound(p: f64, delta: f64) -> Result<f64> {
    check_range("delta", delta, 0.0, DELTA_REGIME, false, false, "[0, 1/100]")?;
    let rho = rho_cap(delta, p);
    check_range("rho", rho, 0.0, 0.5, false, true, "[0, 1/2)")?;
    let cap = delta_cap(p, rho)?;
    Ok(2.0 * (1.0 - 2.0 * p) * (3.0 - delta)
        + p * p * (1.0 - rho) / (1.0 - 2.0 * rho)
        + p * p * cap)
}

/// `r(i, b) + r(j, b) + r(i, j)` for distinct points.
pub fn delta_ijb(instance: &Instance, i: usize, j: usize, b: usize) -> Result<f64> {
    let n = instance.len();
    for k in [i, j, b] {
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, n });
        }
    }
    if i == j || i == b || j == b {
        return Err(Error::IndicesNotDistinct);
    }
    let e = Election::new(instance);
    Ok(e.ratio_unchecked(i, b) + e.ratio_unchecked(j, b) + e.ratio_unchecked(i, j))
}

/// A point, or the part of a split point, belonging to one set of the partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Member {
    pub index: usize,
    pub mass: f64,
}

/// Decomposition around a pair `(x, y)` where `y` wins but `x` is socially better.
///
/// Distances are measured after scaling so that `d(x, y) = 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbcPartition {
    pub x: usize,
    pub y: usize,
    /// Factor applied to distances, `2 / d(x, y)`.
    pub scale: f64,
    /// `3 − r(x, y)`.
    pub delta: f64,
    /// Whether `δ ≤ 1/100`, the regime of the proven inequalities.
    pub applicable: bool,
    pub p_target: f64,
    pub rho_cap: f64,
    /// Nearly equidistant points weakly preferring `y`.
    pub a: Vec<Member>,
    /// Points close to `x` among those preferring `x`.
    pub b: Vec<Member>,
    pub c: Vec<Member>,
    /// Indices whose mass was divided between two sets.
    pub split: Vec<usize>,
    pub mass_a: f64,
    pub mass_b: f64,
    pub rho_a: f64,
    pub rho_b: f64,
    pub checks: Vec<InequalityCheck>,
}

/// Takes a `target`-mass prefix of `order`, splitting the boundary point.
fn mass_prefix(
    order: &[usize],
    p: &[f64],
    target: f64,
    taken: &mut Vec<Member>,
    rest: &mut Vec<Member>,
    split: &mut Vec<usize>,
) -> f64 {
    let mut acc = Accumulator::new();
    for &i in order {
        let remaining = target - acc.total();
        if remaining <= 0.0 {
            rest.push(Member { index: i, mass: p[i] });
        } else if p[i] <= remaining {
            acc.add(p[i]);
            taken.push(Member { index: i, mass: p[i] });
        } else {
            acc.add(remaining);
            taken.push(Member {
                index: i,
                mass: remaining,
            });
            rest.push(Member {
                index: i,
                mass: p[i] - remaining,
            });
            split.push(i);
        }
    }
    acc.total()
}

/// Builds the A/B/C partition for the pair `(x, y)` and evaluates its inequalities.
///
/// `p_target` defaults to `(1 − √δ)/2` with `δ` clamped to `[0, 1/100]`.
pub fn partition_abc(
    instance: &Instance,
    x: usize,
    y: usize,
    p_target: Option<f64>,
) -> Result<AbcPartition> {
    if !instance.is_representative() {
        return Err(Error::Precondition(
            "partition requires identical candidate and voter distributions".into(),
        ));
    }
    let n = instance.len();
    for k in [x, y] {
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, n });
        }
    }
    if x == y {
        return Err(Error::SameCandidate(x));
    }
    let election = Election::new(instance);
    let outcome = election.outcome_unchecked(x, y);
    if outcome.winner != y || outcome.opt != x || outcome.ratio <= 1.0 {
        return Err(Error::Precondition(format!(
            "{y} must beat {x} while costing more"
        )));
    }
    let metric = instance.metric();
    let dxy = metric.get(x, y);
    if !(dxy > 0.0) {
        return Err(Error::Precondition(format!("d({x}, {y}) must be positive")));
    }
    let scale = 2.0 / dxy;
    let delta = (3.0 - outcome.ratio).max(0.0);
    let applicable = delta <= DELTA_REGIME;
    let delta_used = delta.min(DELTA_REGIME);
    let p_target = match p_target {
        Some(t) => {
            check_range("p_target", t, 0.0, 0.5, true, false, "(0, 1/2]")?;
            t
        }
        None => default_p_target(delta_used),
    };
    let cap = rho_cap(delta_used, p_target);

    let p = instance.candidates().as_slice();
    let dx: Vec<f64> = (0..n).map(|i| scale * metric.get(i, x)).collect();
    let dy: Vec<f64> = (0..n).map(|i| scale * metric.get(i, y)).collect();
    let by_distance_to_x = |set: &mut Vec<usize>| {
        set.sort_by(|&i, &j| dx[i].total_cmp(&dx[j]).then(i.cmp(&j)));
    };
    let (mut side_y, mut side_x): (Vec<usize>, Vec<usize>) =
        (0..n).filter(|&i| p[i] > 0.0).partition(|&i| dy[i] <= dx[i]);
    by_distance_to_x(&mut side_y);
    by_distance_to_x(&mut side_x);

    let (mut a, mut b, mut c, mut split) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mass_a = mass_prefix(&side_y, p, p_target, &mut a, &mut c, &mut split);
    let mass_b = mass_prefix(&side_x, p, p_target, &mut b, &mut c, &mut split);
    c.sort_by_key(|m| m.index);

    let radius = |set: &[Member]| set.iter().map(|m| dx[m.index]).fold(0.0, f64::max);
    let rho_a = (radius(&a) - 1.0).max(0.0);
    let rho_b = radius(&b);

    let mut checks = Vec::new();
    let mut push = |check: InequalityCheck| {
        checks.push(if applicable {
            check
        } else {
            check.informational()
        })
    };
    push(InequalityCheck::at_most(
        "radius_sum",
        rho_a + rho_b,
        cap,
        1e-9,
    ));
    let cost_x = scale * election.costs()[x];
    let cost_x_cap = if applicable {
        1.0 / (2.0 - delta_used)
    } else {
        1.0 / (2.0 - delta)
    };
    push(InequalityCheck::at_most("cost_x", cost_x, cost_x_cap, 1e-12));

    if cap < 1.0 && !a.is_empty() && !b.is_empty() {
        let worst = max_delta_ijb(&election, &a, &b);
        push(InequalityCheck::at_most(
            "delta_ijb",
            worst,
            delta_cap(p_target, cap)?,
            1e-12,
        ));
    }

    Ok(AbcPartition {
        x,
        y,
        scale,
        delta,
        applicable,
        p_target,
        rho_cap: cap,
        a,
        b,
        c,
        split,
        mass_a,
        mass_b,
        rho_a,
        rho_b,
        checks,
    })
}

/// Largest `r(i, b) + r(j, b) + r(i, j)` over `i, j ∈ A` and `b ∈ B`.
fn max_delta_ijb(election: &Election<'_>, a: &[Member], b: &[Member]) -> f64 {
    let to_b: Vec<Vec<f64>> = a
        .iter()
        .map(|i| b.iter().map(|bb| election.ratio_unchecked(i.index, bb.index)).collect())
        .collect();
    let mut worst: f64 = 0.0;
    for (ia, i) in a.iter().enumerate() {
        for (ja, j) in a.iter().enumerate().skip(ia) {
            let rij = election.ratio_unchecked(i.index, j.index);
            for kb in 0..b.len() {
                worst = worst.max(to_b[ia][kb] + to_b[ja][kb] + rij);
            }
        }
    }
    worst
}
