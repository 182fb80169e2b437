//! Structure of elections on the line when candidates and voters share one distribution.
//!
//! Every operation here drops zero-mass points before working, so indices in
//! results refer to the compacted instance.

use alloc::format;
use alloc::vec::Vec;

use crate::election::{expected_value, Election};
use crate::metric::{line_to_instance, Distribution, LineInstance};
use crate::sum::Accumulator;
use crate::{Error, Result};

/// Cumulative mass within this distance of `1/2` at a point boundary makes the median degenerate.
pub const MEDIAN_TOLERANCE: f64 = 1e-12;

/// Median index, the support points on either side, and conditional distortions.
#[derive(Debug, Clone, PartialEq)]
pub struct LineStructure {
    pub median: usize,
    /// Positive-mass indices left of the median, ascending.
    pub left: Vec<usize>,
    /// Positive-mass indices right of the median, ascending.
    pub right: Vec<usize>,
    /// `r_i = Σ_j p_j r(i, j)` for every index.
    pub conditional: Vec<f64>,
}

impl LineStructure {
    /// Index in `left` with the largest conditional distortion, the leftmost on ties.
    pub fn worst_left(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for &i in &self.left {
            if best.map_or(true, |b| self.conditional[i] > self.conditional[b]) {
                best = Some(i);
            }
        }
        best
    }

    /// Index in `right` with the largest conditional distortion, the rightmost on ties.
    pub fn worst_right(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for &i in &self.right {
            if best.map_or(true, |b| self.conditional[i] >= self.conditional[b]) {
                best = Some(i);
            }
        }
        best
    }
}

/// Index of the median: mass strictly before it is below `1/2`, mass through it above.
pub fn median(line: &LineInstance) -> Result<usize> {
    let mut acc = Accumulator::new();
    for (i, &pi) in line.distribution().as_slice().iter().enumerate() {
        acc.add(pi);
        let through = acc.total();
        if libm::fabs(through - 0.5) <= MEDIAN_TOLERANCE {
            return Err(Error::DegenerateMedian { index: i });
        }
        if through > 0.5 {
            return Ok(i);
        }
    }
    Err(Error::DegenerateMedian {
        index: line.len().saturating_sub(1),
    })
}

pub fn structure(line: &LineInstance) -> Result<LineStructure> {
    let median = median(line)?;
    let p = line.distribution().as_slice();
    let instance = line_to_instance(line);
    let election = Election::new(&instance);
    let conditional = (0..line.len()).map(|i| election.conditional(i)).collect();
    Ok(LineStructure {
        median,
        left: (0..median).filter(|&i| p[i] > 0.0).collect(),
        right: ((median + 1)..line.len()).filter(|&i| p[i] > 0.0).collect(),
        conditional,
    })
}

/// Expected distortion of a line instance.
pub fn distortion(line: &LineInstance) -> f64 {
    expected_value(&line_to_instance(line))
}

/// A pair whose election or cost comparison contradicts the median ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderViolation {
    /// The candidate closer to the median did not win.
    Vote {
        i: usize,
        j: usize,
        expected: usize,
        actual: usize,
    },
    /// On one side of the median, the candidate closer to it has the larger cost.
    Social {
        closer: usize,
        farther: usize,
        closer_cost: f64,
        farther_cost: f64,
    },
}

/// Checks that every election is won by the candidate nearer the median (lower index on ties).
pub fn check_vote_order(line: &LineInstance) -> Result<Vec<OrderViolation>> {
    let m = median(line)?;
    let x = line.positions();
    let instance = line_to_instance(line);
    let election = Election::new(&instance);
    let mut violations = Vec::new();
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let expected = if libm::fabs(x[i] - x[m]) <= libm::fabs(x[j] - x[m]) {
                i
            } else {
                j
            };
            let actual = election.winner_unchecked(i, j);
            if actual != expected {
                violations.push(OrderViolation::Vote {
                    i,
                    j,
                    expected,
                    actual,
                });
            }
        }
    }
    Ok(violations)
}

/// Checks that on each side of the median (median included) cost grows with distance to it.
pub fn check_social_order(line: &LineInstance) -> Result<Vec<OrderViolation>> {
    let m = median(line)?;
    let instance = line_to_instance(line);
    let costs = crate::election::costs(&instance);
    let slack = 1e-12 * costs.iter().copied().fold(0.0, f64::max);
    let mut violations = Vec::new();
    let mut check = |closer: usize, farther: usize| {
        if costs[closer] > costs[farther] + slack {
            violations.push(OrderViolation::Social {
                closer,
                farther,
                closer_cost: costs[closer],
                farther_cost: costs[farther],
            });
        }
    };
    for a in 0..=m {
        for b in (a + 1)..=m {
            check(b, a);
        }
    }
    for a in m..line.len() {
        for b in (a + 1)..line.len() {
            check(a, b);
        }
    }
    Ok(violations)
}

/// Moves the mass of every index in `from` onto `to` and drops emptied points.
fn move_mass(line: &LineInstance, from: &[usize], to: usize) -> LineInstance {
    let mut probs = line.distribution().as_slice().to_vec();
    for &k in from {
        if k != to {
            probs[to] += probs[k];
            probs[k] = 0.0;
        }
    }
    LineInstance::from_sorted_parts(line.positions().to_vec(), probs).compacted()
}

fn require_sides(s: &LineStructure) -> Result<()> {
    if s.left.is_empty() || s.right.is_empty() {
        return Err(Error::Precondition(
            "both sides of the median must carry mass".into(),
        ));
    }
    Ok(())
}

/// Whether the extremal point of a side attains the side's maximal conditional distortion.
fn extremal_is_worst(s: &LineStructure, side: &[usize], extremal: usize) -> bool {
    side.iter()
        .all(|&i| s.conditional[extremal] >= s.conditional[i])
}

/// Moves all mass right of the worst right-side point onto it.
pub fn merge_worst_right(line: &LineInstance) -> Result<LineInstance> {
    let line = line.compacted();
    let s = structure(&line)?;
    let y_star = s
        .worst_right()
        .ok_or_else(|| Error::Precondition("right side of the median is empty".into()))?;
    let beyond: Vec<usize> = ((y_star + 1)..line.len()).collect();
    Ok(move_mass(&line, &beyond, y_star))
}

/// Moves all mass left of the worst left-side point onto it.
pub fn merge_worst_left(line: &LineInstance) -> Result<LineInstance> {
    let line = line.compacted();
    let s = structure(&line)?;
    let x_star = s
        .worst_left()
        .ok_or_else(|| Error::Precondition("left side of the median is empty".into()))?;
    let before: Vec<usize> = (0..x_star).collect();
    Ok(move_mass(&line, &before, x_star))
}

/// Collapses the right side onto its rightmost point.
///
/// Requires the leftmost and rightmost points to be the worst on their sides
/// and the rightmost point to lose their election.
pub fn reduce_right(line: &LineInstance) -> Result<LineInstance> {
    let line = line.compacted();
    let s = structure(&line)?;
    require_sides(&s)?;
    let last = line.len() - 1;
    if !extremal_is_worst(&s, &s.left, 0) || !extremal_is_worst(&s, &s.right, last) {
        return Err(Error::Precondition(
            "extremal points are not the worst on their sides".into(),
        ));
    }
    let instance = line_to_instance(&line);
    if Election::new(&instance).winner_unchecked(0, last) != 0 {
        return Err(Error::Precondition(
            "rightmost point must lose to the leftmost point".into(),
        ));
    }
    let right = s.right.clone();
    Ok(move_mass(&line, &right, last))
}

/// Which move [`reduce_left`] makes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShrinkChoice {
    /// Some left point is no worse than the rightmost point: move the left
    /// point nearest the median onto the median.
    IntoMedian { from: usize },
    /// Every left point is worse than the rightmost: move the second point
    /// onto the neighbour `to` (index 0 or 2).
    MoveSecond { to: usize },
}

/// Decides how [`reduce_left`] shrinks the left side.
pub fn shrink_left_choice(line: &LineInstance) -> Result<ShrinkChoice> {
    let line = line.compacted();
    let s = structure(&line)?;
    require_sides(&s)?;
    let n = line.len();
    let last = n - 1;
    if s.right.len() != 1 {
        return Err(Error::Precondition(format!(
            "right side must be a single point, found {}",
            s.right.len()
        )));
    }
    if s.left.len() < 2 {
        return Err(Error::Precondition(
            "left side must contain at least two points".into(),
        ));
    }
    if !extremal_is_worst(&s, &s.left, 0) {
        return Err(Error::Precondition(
            "leftmost point is not the worst on its side".into(),
        ));
    }
    let instance = line_to_instance(&line);
    let election = Election::new(&instance);
    if election.winner_unchecked(0, last) != 0 {
        return Err(Error::Precondition(
            "rightmost point must lose to the leftmost point".into(),
        ));
    }
    let c = election.costs();
    let m = s.median;
    if s.left.iter().any(|&i| c[i] <= c[last]) {
        return Ok(ShrinkChoice::IntoMedian { from: m - 1 });
    }

    // Every left point is socially worse than the rightmost one, so the
    // distortion is an affine function of Σ_{i∈L} p_i c_i / c_last. Moving
    // point 1 inside [x_0, x_2] turns that quotient into (B + βt)/(A − t).
    let x = line.positions();
    let p = line.distribution().as_slice();
    let without_second = |i: usize| {
        let mut acc = Accumulator::new();
        for j in (0..n).filter(|&j| j != 1) {
            acc.add(p[j] * libm::fabs(x[i] - x[j]));
        }
        acc.total()
    };
    let y = without_second(last);
    let mut constant = Accumulator::new();
    for &i in s.left.iter().filter(|&&i| i != 1) {
        constant.add(p[i] * without_second(i));
    }
    let mut slope = Accumulator::new();
    // Distances from the other left points to point 1.
    constant.add(-p[1] * p[0] * x[0]);
    slope.add(p[1] * p[0]);
    for i in 2..m {
        constant.add(p[1] * p[i] * x[i]);
        slope.add(-p[1] * p[i]);
    }
    // Cost of point 1 itself.
    constant.add(-p[1] * p[0] * x[0]);
    slope.add(p[1] * p[0]);
    for j in 2..n {
        constant.add(p[1] * p[j] * x[j]);
        slope.add(-p[1] * p[j]);
    }
    let a = y / p[1] + x[last];
    let b = constant.total() / p[1];
    let beta = slope.total() / p[1];
    let to = if beta * a + b > 0.0 { 2 } else { 0 };
    Ok(ShrinkChoice::MoveSecond { to })
}

/// Removes one point from the left side when the right side is a single losing point.
pub fn reduce_left(line: &LineInstance) -> Result<LineInstance> {
    let line = line.compacted();
    Ok(match shrink_left_choice(&line)? {
        ShrinkChoice::IntoMedian { from } => move_mass(&line, &[from], from + 1),
        ShrinkChoice::MoveSecond { to } => move_mass(&line, &[1], to),
    })
}

/// Whether the rightmost point loses to the leftmost one.
fn right_is_far(line: &LineInstance) -> bool {
    let instance = line_to_instance(line);
    Election::new(&instance).winner_unchecked(0, line.len() - 1) == 0
}

/// [`reduce_right`] applied to whichever side holds the losing extremal point.
pub fn reduce_far_side(line: &LineInstance) -> Result<LineInstance> {
    let line = line.compacted();
    if right_is_far(&line) {
        reduce_right(&line)
    } else {
        Ok(reduce_right(&line.mirrored())?.mirrored())
    }
}

/// [`reduce_left`] applied to the side holding the winning extremal point.
pub fn reduce_near_side(line: &LineInstance) -> Result<LineInstance> {
    let line = line.compacted();
    if right_is_far(&line) {
        reduce_left(&line)
    } else {
        Ok(reduce_left(&line.mirrored())?.mirrored())
    }
}

/// One applied step of [`reduce_to_three`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    MergeWorstRight,
    MergeWorstLeft,
    ReduceFarSide,
    ReduceNearSide,
    /// One side of the median was empty; all mass moves onto the median.
    CollapseToMedian,
}

impl StepKind {
    pub fn name(self) -> &'static str {
        match self {
            StepKind::MergeWorstRight => "merge_worst_right",
            StepKind::MergeWorstLeft => "merge_worst_left",
            StepKind::ReduceFarSide => "reduce_far_side",
            StepKind::ReduceNearSide => "reduce_near_side",
            StepKind::CollapseToMedian => "collapse_to_median",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub kind: StepKind,
    pub support: usize,
    pub distortion: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub result: LineInstance,
    pub initial_distortion: f64,
    pub trace: Vec<TraceStep>,
}

/// Shrinks the support to at most three points without lowering the distortion.
pub fn reduce_to_three(line: &LineInstance) -> Result<Reduction> {
    let mut current = line.compacted();
    let initial_distortion = distortion(&current);
    let mut trace = Vec::new();
    while current.len() > 3 {
        let s = structure(&current)?;
        let (kind, next) = if s.left.is_empty() || s.right.is_empty() {
            let m = s.median;
            let n = current.len();
            let probs = (0..n).map(|i| if i == m { 1.0 } else { 0.0 }).collect();
            let next = LineInstance::from_sorted_parts(current.positions().to_vec(), probs);
            (StepKind::CollapseToMedian, next.compacted())
        } else if s.worst_right() != Some(current.len() - 1) {
            (StepKind::MergeWorstRight, merge_worst_right(&current)?)
        } else if s.worst_left() != Some(0) {
            (StepKind::MergeWorstLeft, merge_worst_left(&current)?)
        } else {
            let far_len = if right_is_far(&current) {
                s.right.len()
            } else {
                s.left.len()
            };
            if far_len > 1 {
                (StepKind::ReduceFarSide, reduce_far_side(&current)?)
            } else {
                (StepKind::ReduceNearSide, reduce_near_side(&current)?)
            }
        };
        if next.len() >= current.len() {
            return Err(Error::Precondition(format!(
                "{} did not shrink the support",
                kind.name()
            )));
        }
        current = next;
        trace.push(TraceStep {
            kind,
            support: current.len(),
            distortion: distortion(&current),
        });
    }
    Ok(Reduction {
        result: current,
        initial_distortion,
        trace,
    })
}

/// Value of the normalized three-point instance `x = (0, x2, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreePointValue {
    pub value: f64,
    /// `false` when the parameters fall outside the regime of the closed form
    /// and the value was computed by evaluating the elections directly.
    pub closed_form: bool,
}

/// Distortion of three points at `0, x2, 1` with masses `p1, p2, p3`.
///
/// The closed form applies when `x2 ∈ (1/2, 1)` is the median and the left
/// point is socially better than the right one.
pub fn three_point_social(p1: f64, p2: f64, p3: f64, x2: f64) -> Result<ThreePointValue> {
    let dist = Distribution::new(alloc::vec![p1, p2, p3])?;
    if p1 * p3 == 0.0 {
        return Ok(ThreePointValue {
            value: 1.0,
            closed_form: true,
        });
    }
    let cost1 = p2 * x2 + p3;
    let cost3 = p1 + p2 * (1.0 - x2);
    let in_regime = x2 > 0.5 && x2 < 1.0 && p1 < 0.5 && p3 < 0.5 && cost1 < cost3;
    if in_regime {
        let w = 2.0 * p1 * p3;
        return Ok(ThreePointValue {
            value: (1.0 - w) + w * cost3 / cost1,
            closed_form: true,
        });
    }
    let line = LineInstance::new(alloc::vec![0.0, x2, 1.0], dist)?;
    Ok(ThreePointValue {
        value: distortion(&line),
        closed_form: false,
    })
}

/// Upper envelope of the three-point family after the limits `x2 → 1/2`, `p1 → 1/2`.
pub fn three_point_envelope(p3: f64) -> f64 {
    (1.0 - p3) + p3 * (3.0 - 2.0 * p3) / (1.0 + 2.0 * p3)
}

fn envelope_slope_numerator(p3: f64) -> f64 {
    2.0 - 8.0 * p3 - 8.0 * p3 * p3
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreePointOptimum {
    pub p3: f64,
    pub value: f64,
    /// Largest gap between the numerical optimum and the closed-form maximizer.
    pub closed_form_gap: f64,
}

/// Maximizes [`three_point_envelope`] over `p3 ∈ (0, 1/2)`.
///
/// Golden-section search brackets the maximizer, bisection on the sign of the
/// derivative refines it, and the result is compared with `(√2 − 1)/2`.
pub fn maximize_three_point() -> ThreePointOptimum {
    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (three_point_envelope(c), three_point_envelope(d));
    while hi - lo > 1e-6 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = three_point_envelope(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = three_point_envelope(d);
        }
    }
    // The slope numerator is decreasing on the bracket.
    while hi - lo > 4.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if envelope_slope_numerator(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p3 = 0.5 * (lo + hi);
    let exact = (core::f64::consts::SQRT_2 - 1.0) / 2.0;
    ThreePointOptimum {
        p3,
        value: three_point_envelope(p3),
        closed_form_gap: libm::fabs(p3 - exact),
    }
}
