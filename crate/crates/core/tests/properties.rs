use distortion_core::bounds::{
    check_cost_cap, csoc, csoc_merge_maximize, delta_cap, delta_case_bounds, diff_with_cap_bound,
    structured_bound, two_minus_eps_bound,
};
use distortion_core::election::{costs, expected_distortion, pair_outcome, Election};
use distortion_core::generators::{random_line_instance, random_metric_instance};
use distortion_core::line::{check_social_order, check_vote_order, reduce_to_three, structure};
use distortion_core::metric::line_to_instance;
use distortion_core::{Error, LINE_WORST_CASE};
use proptest::prelude::*;

fn line_median_ok(seed: u64, n: usize) -> Option<distortion_core::LineInstance> {
    let line = random_line_instance(n, seed).unwrap();
    match structure(&line) {
        Ok(_) => Some(line),
        Err(Error::DegenerateMedian { .. }) => None,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn scaling_leaves_distortion_unchanged(seed in any::<u64>(), n in 1usize..9, lambda in 0.01f64..100.0) {
        let inst = random_metric_instance(n, seed, seed % 3 == 0).unwrap();
        let a = expected_distortion(&inst).expected;
        let b = expected_distortion(&inst.scaled(lambda)).expected;
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn relabeling_leaves_distortion_unchanged(seed in any::<u64>(), n in 1usize..9, shuffle in any::<u64>()) {
        let inst = random_metric_instance(n, seed, seed % 3 == 0).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = shuffle;
        for k in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(k, (s >> 33) as usize % (k + 1));
        }
        let a = expected_distortion(&inst).expected;
        let b = expected_distortion(&inst.permuted(&perm)).expected;
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn pair_ratios_stay_within_three(seed in any::<u64>(), n in 2usize..10) {
        let inst = random_metric_instance(n, seed, true).unwrap();
        for i in 0..n {
            for j in (i + 1)..n {
                let r = pair_outcome(&inst, i, j).unwrap().ratio;
                prop_assert!((1.0..=3.0 + 1e-12).contains(&r));
            }
        }
        prop_assert!(check_cost_cap(&inst).violations.is_empty());
    }

    #[test]
    fn line_identities_hold(seed in any::<u64>(), n in 1usize..11) {
        let Some(line) = line_median_ok(seed, n) else { return Ok(()) };
        let s = structure(&line).unwrap();
        let inst = line_to_instance(&line);
        let e = Election::new(&inst);
        let p = line.distribution().as_slice();
        let expected = expected_distortion(&inst).expected;

        let mut cross = 1.0;
        for &i in &s.left {
            for &j in &s.right {
                cross += 2.0 * p[i] * p[j] * (e.ratio_unchecked(i, j) - 1.0);
            }
        }
        prop_assert!((expected - cross).abs() < 1e-10);

        for side in [&s.left, &s.right] {
            let mass: f64 = side.iter().map(|&i| p[i]).sum();
            let weighted: f64 = side.iter().map(|&i| p[i] * s.conditional[i]).sum();
            prop_assert!((expected - (1.0 - 2.0 * mass + 2.0 * weighted)).abs() < 1e-10);
        }
        prop_assert!(s.conditional.iter().all(|&r| r >= 1.0 - 1e-12));
        prop_assert!(check_vote_order(&line).unwrap().is_empty());
        prop_assert!(check_social_order(&line).unwrap().is_empty());
        prop_assert!(expected <= LINE_WORST_CASE + 1e-9);
    }

    #[test]
    fn reduction_never_loses_distortion(seed in any::<u64>(), n in 4usize..13) {
        let Some(line) = line_median_ok(seed, n) else { return Ok(()) };
        let red = reduce_to_three(&line).unwrap();
        prop_assert!(red.result.len() <= 3);
        let mut last = red.initial_distortion;
        for step in &red.trace {
            prop_assert!(step.distortion >= last - 1e-12, "{:?}", step);
            last = step.distortion;
        }
        let s = structure(&red.result).unwrap();
        let m = structure(&line.compacted()).unwrap().median;
        prop_assert_eq!(red.result.positions()[s.median], line.compacted().positions()[m]);
    }

    #[test]
    fn csoc_caps_expected_distortion(seed in any::<u64>(), n in 2usize..10) {
        let inst = random_metric_instance(n, seed, false).unwrap();
        let c = costs(&inst);
        let p = inst.candidates().as_slice();
        let bound = csoc(p, &c, 3.0).unwrap() + 1.0;
        prop_assert!(expected_distortion(&inst).expected <= bound + 1e-9);
    }

    #[test]
    fn merging_only_raises_csoc(
        weights in prop::collection::vec(0.01f64..1.0, 2..9),
        costs in prop::collection::vec(0.1f64..10.0, 9),
        alpha in 1.0f64..3.0,
    ) {
        let total: f64 = weights.iter().sum();
        let p: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let c = &costs[..p.len()];
        let m = csoc_merge_maximize(&p, c, alpha).unwrap();
        let mut last = m.start;
        for &v in &m.steps {
            prop_assert!(v >= last - 1e-12);
            last = v;
        }
        prop_assert!(m.value <= (alpha - 1.0) / 2.0 + 1e-12);
        prop_assert!(m.support.len() <= 2);
    }

    #[test]
    fn capped_pairs_cap_the_expectation(seed in any::<u64>(), n in 2usize..9) {
        let inst = random_metric_instance(n, seed, true).unwrap();
        let report = expected_distortion(&inst);
        let alpha = report.max_pairwise.max(1.0);
        prop_assert!(report.expected <= diff_with_cap_bound(alpha).unwrap() + 1e-9);
    }

    #[test]
    fn structured_bound_is_below_the_sqrt_delta_cap(delta in 0.0f64..=0.01) {
        let p = (1.0 - delta.sqrt()) / 2.0;
        let v = structured_bound(p, delta).unwrap();
        prop_assert!(v <= two_minus_eps_bound(delta).unwrap() + 1e-12, "{delta}: {v}");
    }
}

fn grid() -> impl Iterator<Item = (f64, f64)> {
    (30..=50).flat_map(|a| (0..=20).map(move |b| (a as f64 / 100.0, b as f64 * 0.005)))
}

#[test]
fn delta_cap_is_monotone_on_the_grid() {
    for (p, rho) in grid() {
        let here = delta_cap(p, rho).unwrap();
        if p + 0.01 <= 0.5 + 1e-12 {
            assert!(delta_cap((p + 0.01).min(0.5), rho).unwrap() <= here);
        }
        if rho + 0.005 <= 0.1 + 1e-12 {
            assert!(delta_cap(p, rho + 0.005).unwrap() >= here);
        }
    }
    assert_eq!(delta_cap(0.5, 0.0).unwrap(), 5.0);
    assert!(delta_cap(0.5, 0.999_999).unwrap() > 1e6);
}

#[test]
fn third_case_bound_dominates_on_the_grid() {
    for (p, rho) in grid() {
        for delta in [0.0, 0.005, 0.01] {
            let [first, second, third] = delta_case_bounds(p, rho, delta).unwrap();
            assert!(third >= first && third >= second, "p={p} rho={rho} delta={delta}");
        }
    }
}

#[test]
fn closed_form_caps() {
    assert_eq!(two_minus_eps_bound(0.0).unwrap(), 1.5);
    assert!(two_minus_eps_bound(1.0 / 326.0).unwrap() <= 2.0 - 1.0 / 652.0);
    assert!((two_minus_eps_bound(0.01).unwrap() - 2.4).abs() < 1e-12);
    assert_eq!(diff_with_cap_bound(3.0).unwrap(), 2.0);
    assert_eq!(diff_with_cap_bound(1.0).unwrap(), 1.0);
    assert!((diff_with_cap_bound(3.0 - 1.0 / 326.0).unwrap() - (2.0 - 1.0 / 652.0)).abs() < 1e-15);
    assert!(two_minus_eps_bound(0.02).is_err());
}
