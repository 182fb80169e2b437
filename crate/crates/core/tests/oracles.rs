//! Independent reimplementations used as oracles for the library's numbers.

use distortion_core::election::{cost, expected_distortion, monte_carlo_distortion, pair_outcome};
use distortion_core::generators::{
    gen_example1, gen_example2_line_iid, gen_simplex_metric, random_metric_instance,
};
use distortion_core::metric::{line_to_instance, metric_closure, validate_with_tolerance};
use distortion_core::{Distribution, FiniteMetric, Instance, LineInstance};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = Ratio<i128>;

fn q(num: i128, den: i128) -> Q {
    Q::new(num, den)
}

/// Exact distortion of a line instance, enumerating every ordered pair.
fn exact_line_distortion(x: &[Q], p: &[Q]) -> Q {
    let n = x.len();
    let dist = |a: usize, b: usize| if x[a] > x[b] { x[a] - x[b] } else { x[b] - x[a] };
    let costs: Vec<Q> = (0..n)
        .map(|i| (0..n).fold(q(0, 1), |acc, j| acc + p[j] * dist(i, j)))
        .collect();
    let mut total = q(0, 1);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                total += p[i] * p[j];
                continue;
            }
            let (lo, hi) = (i.min(j), i.max(j));
            let votes_lo = (0..n)
                .filter(|&k| dist(lo, k) <= dist(hi, k))
                .fold(q(0, 1), |acc, k| acc + p[k]);
            let winner = if votes_lo * 2 >= q(1, 1) { lo } else { hi };
            let opt = if costs[hi] < costs[lo] { hi } else { lo };
            let ratio = if costs[winner] == costs[opt] {
                q(1, 1)
            } else {
                costs[winner] / costs[opt]
            };
            total += p[i] * p[j] * ratio;
        }
    }
    total
}

fn to_f64(v: Q) -> f64 {
    *v.numer() as f64 / *v.denom() as f64
}

#[test]
fn three_point_line_matches_exact_arithmetic() {
    let x = [q(0, 1), q(3, 5), q(1, 1)];
    let p = [q(45, 100), q(30, 100), q(25, 100)];
    let exact = exact_line_distortion(&x, &p);
    let line = LineInstance::new(vec![0.0, 0.6, 1.0], Distribution::new(vec![0.45, 0.30, 0.25]).unwrap())
        .unwrap();
    let report = expected_distortion(&line_to_instance(&line));
    assert!((report.expected - to_f64(exact)).abs() < 1e-12);
    assert!((report.expected - 1.07326).abs() < 1e-5);
    // Point 3 wins the outer election with ratio 0.57/0.43.
    let outer = pair_outcome(&line_to_instance(&line), 0, 2).unwrap();
    assert_eq!((outer.winner, outer.opt), (2, 0));
    assert!((outer.ratio - 0.57 / 0.43).abs() < 1e-12);
}

#[test]
fn random_rational_lines_match_exact_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let n = rng.random_range(2..7);
        let mut grid: Vec<i128> = (0..=32).collect();
        for k in (1..grid.len()).rev() {
            grid.swap(k, rng.random_range(0..=k));
        }
        let mut xs: Vec<i128> = grid[..n].to_vec();
        xs.sort();
        let mut cuts: Vec<i128> = (0..n - 1).map(|_| rng.random_range(0..=32)).collect();
        cuts.push(0);
        cuts.push(32);
        cuts.sort();
        let weights: Vec<i128> = cuts.windows(2).map(|w| w[1] - w[0]).collect();
        let xq: Vec<Q> = xs.iter().map(|&v| q(v, 32)).collect();
        let pq: Vec<Q> = weights.iter().map(|&w| q(w, 32)).collect();
        let exact = to_f64(exact_line_distortion(&xq, &pq));
        let line = LineInstance::new(
            xq.iter().map(|&v| to_f64(v)).collect(),
            Distribution::new(pq.iter().map(|&v| to_f64(v)).collect()).unwrap(),
        )
        .unwrap();
        let got = expected_distortion(&line_to_instance(&line)).expected;
        assert!((got - exact).abs() < 1e-9, "{xs:?} {weights:?}: {got} vs {exact}");
    }
}

/// Straightforward floating-point evaluation with no shared code.
fn naive_expected(inst: &Instance) -> f64 {
    let n = inst.len();
    let d = inst.metric();
    let p = inst.candidates().as_slice();
    let qv = inst.voters().as_slice();
    let c: Vec<f64> = (0..n).map(|i| (0..n).map(|j| qv[j] * d.get(i, j)).sum()).collect();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let w = p[i] * p[j];
            if w == 0.0 {
                continue;
            }
            let r = if i == j {
                1.0
            } else {
                let (lo, hi) = (i.min(j), i.max(j));
                let lo_votes: f64 = (0..n).filter(|&k| d.get(lo, k) <= d.get(hi, k)).map(|k| qv[k]).sum();
                let hi_votes: f64 = (0..n).filter(|&k| d.get(lo, k) > d.get(hi, k)).map(|k| qv[k]).sum();
                let winner = if lo_votes >= hi_votes { lo } else { hi };
                let opt = if c[hi] < c[lo] { hi } else { lo };
                if c[winner] == c[opt] { 1.0 } else { c[winner] / c[opt] }
            };
            total += w * r;
        }
    }
    total
}

#[test]
fn random_metrics_match_naive_evaluation() {
    for seed in 0..500 {
        let n = 1 + (seed as usize % 9);
        let inst = random_metric_instance(n, seed, seed % 2 == 0).unwrap();
        let got = expected_distortion(&inst).expected;
        assert!((got - naive_expected(&inst)).abs() < 1e-12, "seed {seed}");
    }
}

#[test]
fn example1_costs_follow_the_weighted_sum() {
    let inst = gen_example1(0.01).unwrap();
    let left = 0.51 * 1.01;
    let right = 0.49 * 2.0 + 0.51 * 0.99;
    assert!((cost(&inst, 0).unwrap() - left).abs() < 1e-15);
    assert!((cost(&inst, 2).unwrap() - right).abs() < 1e-15);
    let out = pair_outcome(&inst, 0, 2).unwrap();
    assert_eq!((out.winner, out.opt), (2, 0));
    assert!((out.ratio - right / left).abs() < 1e-12);
}

fn relax_to_fixpoint(n: usize, mut d: Vec<f64>) -> Vec<f64> {
    // Bellman-Ford style: keep relaxing single edges until nothing changes.
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let via = d[i * n + k] + d[k * n + j];
                    if via < d[i * n + j] {
                        d[i * n + j] = via;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return d;
        }
    }
}

#[test]
fn closure_agrees_with_triple_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..500 {
        let n = 6;
        let mut table = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = rng.random_range(0.0..3.0);
                table[i * n + j] = v;
                table[j * n + i] = v;
            }
        }
        let input = FiniteMetric::from_flat(n, table.clone()).unwrap();
        let closed = metric_closure(&input).unwrap();
        let oracle = relax_to_fixpoint(n, table.clone());
        for i in 0..n {
            for j in 0..n {
                assert!(closed.get(i, j) <= input.get(i, j));
                assert!((closed.get(i, j) - oracle[i * n + j]).abs() < 1e-12);
                for k in 0..n {
                    assert!(closed.get(i, j) <= closed.get(i, k) + closed.get(k, j));
                }
            }
        }
        assert_eq!(metric_closure(&closed).unwrap(), closed);
        let inst = Instance::representative(closed, Distribution::uniform(n)).unwrap();
        assert!(validate_with_tolerance(&inst, 0.0).is_ok());
    }
}

fn within_three_se(inst: &Instance, seed: u64) {
    let exact = expected_distortion(inst).expected;
    let mc = monte_carlo_distortion(inst, 200_000, seed).unwrap();
    assert!(
        (mc.mean - exact).abs() <= 3.0 * mc.std_error,
        "{} vs {} (se {})",
        mc.mean,
        exact,
        mc.std_error
    );
}

#[test]
fn monte_carlo_tracks_exact_values() {
    within_three_se(&gen_example1(1e-3).unwrap(), 1);
    within_three_se(&line_to_instance(&gen_example2_line_iid(1e-4).unwrap()), 2);
    within_three_se(&gen_simplex_metric(100, 1e-3).unwrap(), 3);
}

#[test]
fn monte_carlo_is_reproducible() {
    let inst = gen_simplex_metric(20, 1e-3).unwrap();
    assert_eq!(
        monte_carlo_distortion(&inst, 10_000, 9).unwrap(),
        monte_carlo_distortion(&inst, 10_000, 9).unwrap()
    );
}
