//! Evaluating a family over a grid of one parameter.

use std::io::Write;

use distortion_core::generators::{generate, FamilyParams};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::parallel::par_expected_distortion;
use crate::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Eps,
    N,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub expected: f64,
    pub max_pairwise: f64,
}

/// Evaluates `base` with the swept parameter replaced by each value, in input order.
pub fn sweep(
    pool: &ThreadPool,
    base: FamilyParams,
    param: SweepParam,
    values: &[f64],
) -> Result<Vec<SweepRow>, LabError> {
    let params: Vec<FamilyParams> = values
        .iter()
        .map(|&v| {
            let mut p = base;
            match param {
                SweepParam::Eps => p.eps = v,
                SweepParam::N => {
                    if !(v >= 1.0 && v.fract() == 0.0) {
                        return Err(LabError::Usage(format!("n must be a positive integer, got {v}")));
                    }
                    p.n = v as usize;
                }
            }
            Ok(p)
        })
        .collect::<Result<_, _>>()?;
    let instances = pool.install(|| {
        params
            .par_iter()
            .map(|p| generate(p).map(|g| g.to_instance()))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(values
        .iter()
        .zip(&instances)
        .map(|(&param, inst)| {
            let report = par_expected_distortion(pool, inst);
            SweepRow {
                param,
                expected: report.expected,
                max_pairwise: report.max_pairwise,
            }
        })
        .collect())
}

/// CSV with the header `param,expected,max_pairwise`.
pub fn write_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<(), LabError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["param", "expected", "max_pairwise"])?;
    for r in rows {
        w.write_record([r.param.to_string(), r.expected.to_string(), r.max_pairwise.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
