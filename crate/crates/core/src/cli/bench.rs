//! Batch experiments: a grid of generated instances crossed with a list of
//! schemes, written as one CSV row per (instance, scheme).

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::Value;

use super::{csv_err, GenSpec};
use crate::benchmarks::{brute_force_optimal_capped, offline_opt, online_opt, ratio};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::{format_rational, Rational};
use crate::schemes::{solve, Algo};

pub const BENCH_HEADER: [&str; 12] = [
    "family",
    "params",
    "seed",
    "scheme",
    "principal_value",
    "agent_value",
    "offline_opt",
    "online_opt",
    "ratio_offline",
    "ratio_online",
    "guarantee_bound",
    "guarantee_met",
];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub family: String,
    /// Each key takes every listed value; points are the cartesian product.
    #[serde(default)]
    pub grid: BTreeMap<String, Vec<Value>>,
    /// Empty means one run with the default seed.
    #[serde(default)]
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default)]
    pub prune_zero_b: bool,
    #[serde(default = "default_oracle_bits")]
    pub max_candidates: u32,
}

fn default_oracle_bits() -> u32 {
    16
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub families: Vec<FamilyConfig>,
    /// Algorithm names; `interval-k:K` fixes the window length.
    #[serde(default)]
    pub schemes: Vec<String>,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub output: Option<String>,
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: BenchConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("config line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        config.scheme_specs()?;
        config.jobs()?;
        Ok(config)
    }

    fn scheme_specs(&self) -> Result<Vec<(String, Algo, Option<usize>)>> {
        self.schemes
            .iter()
            .map(|s| {
                let (name, k) = match s.split_once(':') {
                    Some((name, k)) => {
                        let k = k
                            .parse::<usize>()
                            .map_err(|_| Error::bad_param("schemes", format!("bad window length in {s:?}")))?;
                        (name, Some(k))
                    }
                    None => (s.as_str(), None),
                };
                let algo: Algo = name.parse()?;
                if (algo == Algo::IntervalK) != k.is_some() {
                    return Err(Error::bad_param(
                        "schemes",
                        format!("{s:?}: only interval-k takes :K, and it needs one"),
                    ));
                }
                Ok((s.clone(), algo, k))
            })
            .collect()
    }

    /// Every (family, params, seed) point in config order.
    fn jobs(&self) -> Result<Vec<Job>> {
        let mut jobs = Vec::new();
        for fam in &self.families {
            let mut points: Vec<Vec<(String, String)>> = vec![Vec::new()];
            for (key, values) in &fam.grid {
                if values.is_empty() {
                    return Err(Error::bad_param(key, "grid axis has no values"));
                }
                let mut next = Vec::with_capacity(points.len() * values.len());
                for p in &points {
                    for v in values {
                        let mut q = p.clone();
                        q.push((key.clone(), scalar(key, v)?));
                        next.push(q);
                    }
                }
                points = next;
            }
            if fam.family == "random" && fam.seeds.is_empty() {
                return Err(Error::bad_param("seeds", "random families need at least one seed"));
            }
            let seeds: Vec<Option<u64>> = if fam.seeds.is_empty() {
                vec![None]
            } else {
                fam.seeds.iter().copied().map(Some).collect()
            };
            for point in &points {
                let mut spec = GenSpec::new(&fam.family);
                for (k, v) in point {
                    apply(&mut spec, k, v)?;
                }
                if !matches!(
                    spec.family.as_str(),
                    "table1" | "thm2" | "oblivious-lb" | "semi-lb" | "zero-lb" | "random"
                ) {
                    return Err(Error::bad_param("family", format!("unknown family {:?}", spec.family)));
                }
                let params = point
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(";");
                for &seed in &seeds {
                    let mut spec = spec.clone();
                    if let Some(s) = seed {
                        spec.seed = s;
                    }
                    jobs.push(Job {
                        spec,
                        params: params.clone(),
                        seed,
                    });
                }
            }
        }
        Ok(jobs)
    }
}

fn scalar(key: &str, v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(Error::bad_param(
            key,
            "grid values must be strings, numbers or booleans",
        )),
    }
}

fn apply(spec: &mut GenSpec, key: &str, v: &str) -> Result<()> {
    fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
        v.parse()
            .map_err(|_| Error::bad_param(key, format!("cannot parse {v:?}")))
    }
    match key {
        "n" => spec.n = num(key, v)?,
        "alpha" => spec.alpha = v.to_string(),
        "istar" => spec.istar = num(key, v)?,
        "support" => spec.support = num(key, v)?,
        "scale" => spec.scale = num(key, v)?,
        "seed" => spec.seed = num(key, v)?,
        "law" => spec.law = v.to_string(),
        "positive" => spec.positive = num(key, v)?,
        "positive_agent" => spec.positive_agent = num(key, v)?,
        _ => return Err(Error::bad_param(key, "unknown generator parameter")),
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct Job {
    spec: GenSpec,
    params: String,
    seed: Option<u64>,
}

/// Errors that depend on the instance rather than the run: the scheme is
/// reported as skipped instead of aborting the batch.
fn skippable(e: &Error) -> bool {
    matches!(e.exit_code(), 2 | 3 | 5)
}

struct RowBase<'a> {
    job: &'a Job,
    offline: Rational,
    online: Rational,
}

impl RowBase<'_> {
    fn row(&self, scheme: &str, values: Option<(&Rational, &Rational)>, bound: &str, met: &str) -> Vec<String> {
        let mut r = vec![
            self.job.spec.family.clone(),
            self.job.params.clone(),
            self.job.seed.map(|s| s.to_string()).unwrap_or_default(),
            scheme.to_string(),
        ];
        match values {
            Some((p, a)) => {
                r.push(format_rational(p));
                r.push(format_rational(a));
            }
            None => r.extend([String::new(), String::new()]),
        }
        r.push(format_rational(&self.offline));
        r.push(format_rational(&self.online));
        match values {
            Some((p, _)) => {
                r.push(format_rational(&ratio(p, &self.offline)));
                r.push(format_rational(&ratio(p, &self.online)));
            }
            None => r.extend([String::new(), String::new()]),
        }
        r.push(bound.to_string());
        r.push(met.to_string());
        r
    }

    fn skipped(&self, scheme: &str, e: &Error) -> Vec<String> {
        let mut r = self.row(scheme, None, "", "");
        r[4] = format!("skipped({})", e.name());
        r
    }
}

fn run_job(
    job: &Job,
    schemes: &[(String, Algo, Option<usize>)],
    oracle: Option<&OracleConfig>,
) -> Result<Vec<Vec<String>>> {
    let inst: Instance = job.spec.generate()?;
    let base = RowBase {
        job,
        offline: offline_opt(&inst),
        online: online_opt(&inst),
    };
    let mut rows = Vec::new();
    if schemes.is_empty() && oracle.is_none() {
        rows.push(base.row("benchmark", None, "", ""));
    }
    for (label, algo, k) in schemes {
        let outcome = solve(&inst, *algo, *k).and_then(|s| s.evaluate(&inst).map(|e| (s, e)));
        match outcome {
            Ok((solved, eval)) => {
                let (bound, met) = match &solved.guarantee {
                    Some(g) => (g.describe(), g.holds(&eval.principal_value, &base.offline).to_string()),
                    None => (String::new(), String::new()),
                };
                rows.push(base.row(label, Some((&eval.principal_value, &eval.agent_value)), &bound, &met));
            }
            Err(e) if skippable(&e) => rows.push(base.skipped(label, &e)),
            Err(e) => return Err(e),
        }
    }
    if let Some(o) = oracle {
        match brute_force_optimal_capped(&inst, o.prune_zero_b, o.max_candidates) {
            Ok(bf) => rows.push(base.row("oracle", Some((&bf.value, &agent_value_of(&inst, &bf)?)), "", "")),
            Err(e) if skippable(&e) => rows.push(base.skipped("oracle", &e)),
            Err(e) => return Err(e),
        }
    }
    Ok(rows)
}

fn agent_value_of(inst: &Instance, bf: &crate::benchmarks::BruteForce) -> Result<Rational> {
    let scheme = bf.scheme.to_scheme(&inst.shape())?;
    Ok(crate::dynamics::agent_best_response(inst, &scheme)?.1.agent_value)
}

/// Runs every job on `jobs` threads and writes the CSV in config order. On
/// the first hard failure the rows before it are written, followed by a
/// status row naming the error, and the error is returned.
pub fn run_bench(config: &BenchConfig, jobs: usize, out: &mut dyn Write) -> Result<()> {
    let specs = config.scheme_specs()?;
    let work = config.jobs()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    let results: Vec<Result<Vec<Vec<String>>>> = pool.install(|| {
        work.par_iter()
            .map(|j| run_job(j, &specs, config.oracle.as_ref()))
            .collect()
    });
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCH_HEADER).map_err(csv_err)?;
    let mut failure = None;
    for r in results {
        match r {
            Ok(rows) => {
                for row in rows {
                    w.write_record(&row).map_err(csv_err)?;
                }
            }
            Err(e) => {
                let mut status = vec![String::new(); BENCH_HEADER.len()];
                status[0] = "#status".into();
                status[1] = format!("error({})", e.name());
                status[3] = e.to_string();
                w.write_record(&status).map_err(csv_err)?;
                failure = Some(e);
                break;
            }
        }
    }
    w.flush()?;
    failure.map_or(Ok(()), Err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bench(config: &str, jobs: usize) -> (String, Result<()>) {
        let c = BenchConfig::from_json(config).unwrap();
        let mut buf = Vec::new();
        let r = run_bench(&c, jobs, &mut buf);
        (String::from_utf8(buf).unwrap(), r)
    }

    #[test]
    fn table1_rows() {
        let (csv, r) = bench(r#"{"families":[{"family":"table1"}],"schemes":["beta","binning"]}"#, 1);
        r.unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "table1,,,beta,17/4,15/8,5,5,17/20,17/20,1/4,true");
        assert!(lines[2].starts_with("table1,,,binning,4,"));
    }

    #[test]
    fn empty_scheme_list_gives_benchmark_rows() {
        let (csv, r) = bench(r#"{"families":[{"family":"thm2","grid":{"n":[2,3]}}]}"#, 2);
        r.unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("thm2,n=2,,benchmark,,,3/4,"));
        assert!(lines[2].starts_with("thm2,n=3,,benchmark,"));
    }

    #[test]
    fn preconditions_skip() {
        let (csv, r) = bench(
            r#"{"families":[{"family":"zero-lb","grid":{"n":[3]}}],"schemes":["beta"]}"#,
            1,
        );
        r.unwrap();
        assert!(csv.lines().nth(1).unwrap().contains(",beta,skipped(ZeroUtility),"));
    }

    #[test]
    fn jobs_do_not_change_output() {
        let c = r#"{"families":[{"family":"random","grid":{"n":[2,3],"support":[2]},"seeds":[1,2,3]}],
                   "schemes":["binning","best-round","interval-k:1"],"oracle":{"prune_zero_b":true}}"#;
        let (one, r1) = bench(c, 1);
        let (four, r4) = bench(c, 4);
        r1.unwrap();
        r4.unwrap();
        assert_eq!(one, four);
        assert_eq!(one.lines().count(), 1 + 2 * 3 * 4);
    }

    #[test]
    fn failure_flushes_with_status_row() {
        let (csv, r) = bench(
            r#"{"families":[{"family":"thm2","grid":{"n":[2,0,3]}}],"schemes":["best-round"]}"#,
            1,
        );
        assert_eq!(r.unwrap_err().name(), "BadParam");
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("#status,error(BadParam),"));
    }

    #[test]
    fn config_errors() {
        for bad in [
            r#"{"families":[{"family":"nope"}]}"#,
            r#"{"families":[{"family":"thm2","grid":{"q":[1]}}]}"#,
            r#"{"families":[],"schemes":["interval-k"]}"#,
            r#"{"families":[],"schemes":["beta:2"]}"#,
            r#"{"families":[], "extra": 1}"#,
            r#"{"families":[{"family":"random"}]}"#,
        ] {
            assert!(BenchConfig::from_json(bad).is_err(), "{bad}");
        }
    }
}
