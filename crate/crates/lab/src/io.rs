//! JSON encoding of instances.
//!
//! A general instance is `{"distances": [[..], ..], "p": [..], "q": [..]}` with `q`
//! optional (absent means `q = p`). A line instance is `{"positions": [..], "p": [..]}`.
//! Floats are written in shortest round-trip form, so `read(write(x)) == x`.

use std::fs;
use std::io::Read;
use std::path::Path;

use distortion_core::generators::Generated;
use distortion_core::metric::{validate, Violation};
use distortion_core::{Distribution, FiniteMetric, Instance, LineInstance};
use serde::{Deserialize, Serialize};

use crate::LabError;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distances: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    positions: Option<Vec<f64>>,
    p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<Vec<f64>>,
}

fn violation_field(v: &Violation) -> &'static str {
    match v {
        Violation::DimensionMismatch { field, .. }
        | Violation::NegativeMass { field, .. }
        | Violation::MassSum { field, .. } => field,
        _ => "distances",
    }
}

/// Parses either encoding. General instances must pass [`validate`].
pub fn read_instance(text: &str) -> Result<Generated, LabError> {
    read_instance_with(text, true)
}

/// Like [`read_instance`]; with `triangle` off, triangle-inequality violations are accepted.
pub fn read_instance_with(text: &str, triangle: bool) -> Result<Generated, LabError> {
    let raw: RawInstance = serde_json::from_str(text)?;
    match (raw.distances, raw.positions) {
        (Some(rows), None) => {
            let metric = FiniteMetric::from_rows(&rows)?;
            let p = Distribution::named("p", raw.p)?;
            let q = match raw.q {
                Some(q) => Distribution::named("q", q)?,
                None => p.clone(),
            };
            let instance = Instance::new(metric, p, q)?;
            let report = validate(&instance);
            let blocking = report
                .violations
                .iter()
                .find(|v| triangle || !matches!(v, Violation::Triangle { .. }));
            if let Some(v) = blocking {
                return Err(LabError::Invalid {
                    field: violation_field(v),
                    message: v.to_string(),
                });
            }
            Ok(Generated::Metric(instance))
        }
        (None, Some(positions)) => {
            if raw.q.is_some() {
                return Err(LabError::Invalid {
                    field: "q",
                    message: "line instances carry a single distribution".into(),
                });
            }
            if let Some(i) = positions.iter().position(|x| !x.is_finite()) {
                return Err(LabError::Invalid {
                    field: "positions",
                    message: format!("non-finite entry at {i}"),
                });
            }
            let p = Distribution::named("p", raw.p)?;
            Ok(Generated::Line(LineInstance::new(positions, p)?))
        }
        (Some(_), Some(_)) => Err(LabError::Invalid {
            field: "positions",
            message: "give either distances or positions, not both".into(),
        }),
        (None, None) => Err(LabError::Invalid {
            field: "distances",
            message: "missing distances (or positions for a line instance)".into(),
        }),
    }
}

/// Parses either encoding and returns the general instance.
pub fn read_metric_instance(text: &str) -> Result<Instance, LabError> {
    Ok(read_instance(text)?.to_instance())
}

pub fn write_instance(instance: &Instance) -> String {
    let metric = instance.metric();
    let raw = RawInstance {
        distances: Some(metric.rows().map(<[f64]>::to_vec).collect()),
        positions: None,
        p: instance.candidates().as_slice().to_vec(),
        q: (!instance.is_representative()).then(|| instance.voters().as_slice().to_vec()),
    };
    serde_json::to_string(&raw).expect("finite floats always serialize")
}

pub fn write_line(line: &LineInstance) -> String {
    let raw = RawInstance {
        distances: None,
        positions: Some(line.positions().to_vec()),
        p: line.distribution().as_slice().to_vec(),
        q: None,
    };
    serde_json::to_string(&raw).expect("finite floats always serialize")
}

pub fn write_generated(g: &Generated) -> String {
    match g {
        Generated::Metric(inst) => write_instance(inst),
        Generated::Line(line) => write_line(line),
    }
}

/// Reads a file, or standard input when `path` is `None` or `-`.
pub fn read_input(path: Option<&Path>, stdin: &mut dyn Read) -> Result<String, LabError> {
    match path {
        Some(p) if p.as_os_str() != "-" => fs::read_to_string(p).map_err(|e| LabError::File {
            path: p.display().to_string(),
            source: e,
        }),
        _ => {
            let mut text = String::new();
            stdin.read_to_string(&mut text).map_err(|e| LabError::File {
                path: "<stdin>".into(),
                source: e,
            })?;
            Ok(text)
        }
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), LabError> {
    fs::write(path, contents).map_err(|e| LabError::File {
        path: path.display().to_string(),
        source: e,
    })
}
