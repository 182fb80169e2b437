use distortion_core::bounds::{check_cost_cap, delta_ijb, partition_abc};
use distortion_core::election::{cost, expected_distortion, pair_outcome};
use distortion_core::generators::{
    gen_diff_dist, gen_example1, gen_example2_line_iid, gen_half_mass_configuration,
    gen_simplex_metric,
};
use distortion_core::line::{distortion, reduce_to_three, structure};
use distortion_core::metric::{line_to_instance, validate_with_tolerance};
use distortion_core::{Distribution, LineInstance, LINE_WORST_CASE};

#[test]
fn families_are_exact_metrics() {
    for inst in [
        gen_example1(0.01).unwrap(),
        gen_diff_dist(0.01).unwrap(),
        gen_simplex_metric(50, 0.05).unwrap(),
        line_to_instance(&gen_example2_line_iid(1e-3).unwrap()),
        gen_half_mass_configuration(6, 1).unwrap(),
    ] {
        assert!(validate_with_tolerance(&inst, 0.0).is_ok());
    }
}

#[test]
fn example2_approaches_the_line_constant_from_below() {
    let values: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&eps| distortion(&gen_example2_line_iid(eps).unwrap()))
        .collect();
    assert!(values[0] < values[1] && values[1] < values[2]);
    assert!(values[2] < LINE_WORST_CASE && LINE_WORST_CASE - values[2] < 1e-3);

    let line = gen_example2_line_iid(1e-6).unwrap();
    let inst = line_to_instance(&line);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((cost(&inst, 0).unwrap() - h).abs() < 1e-5);
    assert!((cost(&inst, 2).unwrap() - (2.0 - h)).abs() < 1e-5);
    assert_eq!(structure(&line).unwrap().median, 1);
    assert_eq!(pair_outcome(&inst, 0, 2).unwrap().winner, 2);
}

#[test]
fn simplex_family_grows_with_n() {
    let values: Vec<f64> = [10, 100, 1000]
        .iter()
        .map(|&n| expected_distortion(&gen_simplex_metric(n, 1e-3).unwrap()).expected)
        .collect();
    assert!(values[0] < values[1] && values[1] < values[2]);
    assert!(values[2] >= 1.49 && values[2] < 1.5);
    let inst = gen_simplex_metric(1000, 1e-3).unwrap();
    assert!((cost(&inst, 0).unwrap() - 0.5).abs() < 2e-3);
}

#[test]
fn diff_dist_reaches_two() {
    let report = expected_distortion(&gen_diff_dist(1e-4).unwrap());
    assert!((report.expected - 2.0).abs() < 1e-3);
    assert!(report.max_pairwise < 3.0);
    let cap = check_cost_cap(&gen_example1(1e-4).unwrap());
    assert!(cap.violations.is_empty());
    assert!(cap.max_ratio > 3.0 - 2e-3 && cap.max_ratio < 3.0);
}

#[test]
fn padded_example2_reduces_back() {
    let base = gen_example2_line_iid(1e-3).unwrap();
    let xs = vec![-1.0, -0.9, -0.5, 1e-3, 0.3, 0.6, 1.0, 1.2];
    let p = Distribution::new(vec![
        base.distribution().get(0) - 2e-4,
        1e-4,
        1e-4,
        base.distribution().get(1),
        1e-4,
        1e-4,
        base.distribution().get(2) - 2e-4,
        0.0,
    ])
    .unwrap();
    let padded = LineInstance::new(xs, p).unwrap();
    let red = reduce_to_three(&padded).unwrap();
    assert!(red.result.len() <= 3);
    assert!(distortion(&red.result) >= distortion(&padded) - 1e-9);
    let three = reduce_to_three(&base).unwrap();
    assert!(three.trace.is_empty());
    assert_eq!(three.result, base);
}

#[test]
fn half_mass_configuration_diagnostics() {
    for seed in 0..5 {
        let k = 3 + seed as usize;
        let inst = gen_half_mass_configuration(k, seed).unwrap();
        let x = k + 1;
        let out = pair_outcome(&inst, 0, x).unwrap();
        assert_eq!((out.winner, out.opt, out.ratio), (0, x, 3.0));
        assert!(expected_distortion(&inst).expected <= 1.5 + 1e-12);
        for i in 1..=k {
            for j in 1..=k {
                if i != j {
                    assert!(delta_ijb(&inst, i, j, x).unwrap() <= 5.0 + 1e-12);
                }
            }
        }
        for target in [None, Some(0.5)] {
            let part = partition_abc(&inst, x, 0, target).unwrap();
            assert!(part.applicable);
            assert_eq!((part.rho_a, part.rho_b), (0.0, 0.0));
            assert!(part.checks.iter().all(|c| c.pass), "{:?}", part.checks);
        }
    }
}

#[test]
fn simplex_partition_is_informational() {
    let inst = gen_simplex_metric(200, 1e-3).unwrap();
    let part = partition_abc(&inst, 0, 1, None).unwrap();
    assert!(part.delta > 0.01);
    assert!(!part.applicable);
    assert!(part.checks.iter().all(|c| !c.is_violation()));
}
