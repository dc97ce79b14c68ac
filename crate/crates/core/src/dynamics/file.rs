//! JSON scheme files: `{"phi": [[...]], "provenance": "..."}` or the
//! deterministic shorthand `{"accept": [[j, ...], ...]}` with 1-based `j`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{check_shape, ActionScheme, DeterministicScheme, Provenance};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::{format_rational, parse_rational};

/// Window of an interval scheme, 0-based start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalWindow {
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeFile {
    pub scheme: ActionScheme,
    /// Present for history-dependent interval schemes, which abort on silence.
    pub interval: Option<IntervalWindow>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWindow {
    start: usize,
    length: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    #[serde(skip_serializing_if = "Option::is_none")]
    phi: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    accept: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    interval: Option<RawWindow>,
}

pub fn scheme_to_json(file: &SchemeFile) -> String {
    let raw = RawScheme {
        phi: Some(
            file.scheme
                .phi
                .iter()
                .map(|row| row.iter().map(format_rational).collect())
                .collect(),
        ),
        accept: None,
        provenance: file.scheme.provenance,
        interval: file.interval.map(|w| RawWindow {
            start: w.start + 1,
            length: w.len,
        }),
    };
    let mut s = serde_json::to_string_pretty(&raw).expect("scheme serializes");
    s.push('\n');
    s
}

/// Parses a scheme file and checks it against `inst`.
pub fn scheme_from_json(text: &str, inst: &Instance) -> Result<SchemeFile> {
    let raw: RawScheme = serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let mut scheme = match (raw.phi, raw.accept) {
        (Some(phi), None) => {
            let mut rows = Vec::with_capacity(phi.len());
            for (i, row) in phi.iter().enumerate() {
                let mut out = Vec::with_capacity(row.len());
                for (j, x) in row.iter().enumerate() {
                    out.push(parse_rational(x).map_err(|e| Error::Parse {
                        location: format!("phi round {}, option {}", i + 1, j + 1),
                        message: e.to_string(),
                    })?);
                }
                rows.push(out);
            }
            ActionScheme {
                phi: rows,
                provenance: Provenance::Conscious,
            }
        }
        (None, Some(accept)) => {
            let mut sets = Vec::with_capacity(accept.len());
            for (i, row) in accept.iter().enumerate() {
                let mut set = BTreeSet::new();
                for &j in row {
                    if j == 0 {
                        return Err(Error::Parse {
                            location: format!("accept round {}", i + 1),
                            message: "option indices are 1-based".into(),
                        });
                    }
                    set.insert(j - 1);
                }
                sets.push(set);
            }
            DeterministicScheme::new(sets).to_scheme(&inst.shape())?
        }
        _ => {
            return Err(Error::Parse {
                location: "top level".into(),
                message: "exactly one of \"phi\" and \"accept\" is required".into(),
            })
        }
    };
    scheme.provenance = raw.provenance;
    check_shape(inst, &scheme)?;
    let interval = match raw.interval {
        None => None,
        Some(w) if w.start >= 1 && w.length >= 1 && w.start - 1 + w.length <= inst.n() => Some(IntervalWindow {
            start: w.start - 1,
            len: w.length,
        }),
        Some(_) => return Err(Error::ShapeMismatch("interval window outside the instance".into())),
    };
    Ok(SchemeFile { scheme, interval })
}
