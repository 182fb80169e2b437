//! Every proven inequality that applies to a given instance, as named checks.

use distortion_core::bounds::{
    check_cost_cap, csoc, diff_with_cap_bound, partition_abc, InequalityCheck,
};
use distortion_core::generators::Generated;
use distortion_core::line::{check_social_order, check_vote_order};
use distortion_core::{
    Error, DIFFERENT_DISTRIBUTIONS_BOUND, LINE_WORST_CASE, METRIC_UPPER_BOUND,
};
use rayon::ThreadPool;

use crate::parallel::par_expected_distortion;

const TOLERANCE: f64 = 1e-9;

fn count(name: &str, violations: usize) -> InequalityCheck {
    InequalityCheck::at_most(name, violations as f64, 0.0, 0.0)
}

fn skipped(name: &str) -> InequalityCheck {
    InequalityCheck::at_most(name, f64::NAN, f64::NAN, 0.0).informational()
}

pub fn verify(pool: &ThreadPool, instance: &Generated) -> Vec<InequalityCheck> {
    let mut checks = Vec::new();
    let general = instance.to_instance();
    let report = par_expected_distortion(pool, &general);

    if let Generated::Line(line) = instance {
        match (check_vote_order(line), check_social_order(line)) {
            (Ok(votes), Ok(social)) => {
                checks.push(count("vote_order", votes.len()));
                checks.push(count("social_order", social.len()));
            }
            _ => {
                checks.push(skipped("vote_order"));
                checks.push(skipped("social_order"));
            }
        }
        checks.push(InequalityCheck::at_most(
            "line_bound",
            report.expected,
            LINE_WORST_CASE,
            TOLERANCE,
        ));
    }

    let cap = check_cost_cap(&general);
    checks.push(InequalityCheck::at_most(
        "cost_cap",
        cap.max_ratio,
        3.0,
        TOLERANCE * 3.0,
    ));

    let p = general.candidates().as_slice();
    match csoc(p, &report.costs, 3.0) {
        Ok(value) => checks.push(InequalityCheck::at_most(
            "csoc_cap",
            report.expected,
            value + 1.0,
            TOLERANCE,
        )),
        Err(Error::NonPositiveCost { .. }) => checks.push(skipped("csoc_cap")),
        Err(e) => unreachable!("csoc at alpha = 3 cannot fail with {e}"),
    }
    let alpha = report.max_pairwise.clamp(1.0, 3.0);
    checks.push(InequalityCheck::at_most(
        "pairwise_cap",
        report.expected,
        diff_with_cap_bound(alpha).expect("alpha is clamped"),
        TOLERANCE,
    ));

    if general.is_representative() {
        checks.push(InequalityCheck::at_most(
            "equal_distribution_bound",
            report.expected,
            METRIC_UPPER_BOUND,
            TOLERANCE,
        ));
        if let Some(pair) = cap.worst {
            if let Ok(part) = partition_abc(&general, pair.opt, pair.winner, None) {
                checks.extend(part.checks.into_iter().map(|mut c| {
                    c.name = format!("partition_{}", c.name);
                    c
                }));
            }
        }
    } else {
        checks.push(InequalityCheck::at_most(
            "different_distribution_bound",
            report.expected,
            DIFFERENT_DISTRIBUTIONS_BOUND,
            TOLERANCE,
        ));
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parallel::pool;
    use distortion_core::generators::{
        gen_diff_dist, gen_example2_line_iid, gen_half_mass_configuration, gen_simplex_metric,
        random_line_instance,
    };

    #[test]
    fn generator_outputs_pass() {
        let pool = pool(2);
        for g in [
            Generated::Line(gen_example2_line_iid(1e-4).unwrap()),
            Generated::Line(random_line_instance(9, 3).unwrap()),
            Generated::Metric(gen_simplex_metric(30, 1e-3).unwrap()),
            Generated::Metric(gen_diff_dist(1e-3).unwrap()),
            Generated::Metric(gen_half_mass_configuration(5, 2).unwrap()),
        ] {
            let checks = verify(&pool, &g);
            assert!(checks.iter().all(|c| !c.is_violation()), "{checks:?}");
        }
    }

    #[test]
    fn half_mass_partition_is_checked() {
        let g = Generated::Metric(gen_half_mass_configuration(4, 1).unwrap());
        let checks = verify(&pool(1), &g);
        let radius = checks.iter().find(|c| c.name == "partition_radius_sum").unwrap();
        assert!(radius.applicable && radius.pass);
    }
}
