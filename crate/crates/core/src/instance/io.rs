//! JSON instance files. Rationals are stored as strings (`"3/4"`, `"16"`)
//! so a save/load cycle is exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{validate, Instance, Meta, OptionOutcome, RoundDistribution};
use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOption {
    p: String,
    a: String,
    b: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRound {
    options: Vec<RawOption>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    rounds: Vec<RawRound>,
    #[serde(default)]
    meta: Meta,
}

pub fn instance_to_json(inst: &Instance) -> String {
    let raw = RawInstance {
        rounds: inst
            .rounds
            .iter()
            .map(|r| RawRound {
                options: r
                    .options
                    .iter()
                    .map(|o| RawOption {
                        p: format_rational(&o.p),
                        a: format_rational(&o.a),
                        b: format_rational(&o.b),
                    })
                    .collect(),
            })
            .collect(),
        meta: inst.meta.clone(),
    };
    let mut s = serde_json::to_string_pretty(&raw).expect("instance serializes");
    s.push('\n');
    s
}

/// Parses and validates an instance document.
pub fn instance_from_json(text: &str) -> Result<Instance> {
    let raw: RawInstance = serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let mut rounds = Vec::with_capacity(raw.rounds.len());
    for (i, r) in raw.rounds.into_iter().enumerate() {
        let mut options = Vec::with_capacity(r.options.len());
        for (j, o) in r.options.into_iter().enumerate() {
            let field = |name: &str, s: &str| {
                parse_rational(s).map_err(|e| Error::Parse {
                    location: format!("round {}, option {}, field {name}", i + 1, j + 1),
                    message: e.to_string(),
                })
            };
            options.push(OptionOutcome::new(
                field("p", &o.p)?,
                field("a", &o.a)?,
                field("b", &o.b)?,
            ));
        }
        rounds.push(RoundDistribution::new(options));
    }
    let inst = Instance::new(rounds).with_meta(raw.meta);
    validate(&inst).map_err(|e| Error::Validation(Box::new(e)))?;
    Ok(inst)
}

pub fn save(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, instance_to_json(inst))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    instance_from_json(&text)
}
