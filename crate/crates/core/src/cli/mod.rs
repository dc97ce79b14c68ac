//! Command-line front end. Exit codes: 0 ok, 2 bad parameters or input,
//! 3 scheme preconditions, 4 information-model validity, 5 oracle cap,
//! 1 anything else.

mod bench;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::benchmarks::{brute_force_optimal_capped, offline_opt, online_opt, ratio, BRUTE_FORCE_MAX_BITS};
use crate::dynamics::{scheme_from_json, scheme_info_validity, scheme_to_json, SchemeFile};
use crate::error::{Error, Result};
use crate::extensions::{evaluate_k_proposal, interval_scheme_for_window, lookahead_best_response, LookaheadConfig};
use crate::instance::{
    gen_oblivious_lb, gen_random_with, gen_semioblivious_lb, gen_table1, gen_thm2, gen_zero_agent_lb, instance_to_json,
    load, InfoModel, Instance, RandomParams, UtilityLaw,
};
use crate::rational::{display_exact, format_rational, parse_rational, Rational};
use crate::schemes::{solve, Algo};

pub use bench::{run_bench, BenchConfig};

#[derive(Parser, Debug)]
#[command(name = "delegation", version, about = "Exact delegated online search experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated instance.
    Gen(GenArgs),
    /// Build a principal scheme for an instance.
    Solve(SolveArgs),
    /// Evaluate a scheme against the agent's best response.
    Eval(EvalArgs),
    /// Search all deterministic schemes for the best one.
    Oracle(OracleArgs),
    /// Run a batch experiment described by a JSON config.
    Bench(BenchArgs),
}

/// Generator family and parameters.
#[derive(Args, Debug, Clone, PartialEq, Eq)]
pub struct GenSpec {
    /// table1 | thm2 | oblivious-lb | semi-lb | zero-lb | random
    #[arg(long)]
    pub family: String,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Agent utility spread, integer or `num/den`.
    #[arg(long, default_value = "4")]
    pub alpha: String,
    /// Special round of the oblivious family, 1-based.
    #[arg(long, default_value_t = 1)]
    pub istar: usize,
    /// Maximum options per round (random family).
    #[arg(long, default_value_t = 3)]
    pub support: usize,
    /// Utility scale (random family).
    #[arg(long, default_value_t = 10)]
    pub scale: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// uniform | log
    #[arg(long, default_value = "uniform")]
    pub law: String,
    /// Make every utility positive (random family).
    #[arg(long)]
    pub positive: bool,
    /// Make every agent utility positive (random family).
    #[arg(long)]
    pub positive_agent: bool,
}

impl GenSpec {
    pub fn new(family: &str) -> Self {
        Self {
            family: family.to_string(),
            n: 3,
            alpha: "4".into(),
            istar: 1,
            support: 3,
            scale: 10,
            seed: 0,
            law: "uniform".into(),
            positive: false,
            positive_agent: false,
        }
    }

    fn alpha(&self) -> Result<Rational> {
        parse_rational(&self.alpha).map_err(|e| Error::bad_param("alpha", e.to_string()))
    }

    pub fn generate(&self) -> Result<Instance> {
        match self.family.as_str() {
            "table1" => Ok(gen_table1()),
            "thm2" => gen_thm2(self.n),
            "oblivious-lb" => gen_oblivious_lb(self.n, &self.alpha()?, self.istar),
            "semi-lb" => gen_semioblivious_lb(self.n, &self.alpha()?),
            "zero-lb" => gen_zero_agent_lb(self.n),
            "random" => {
                let law = match self.law.as_str() {
                    "uniform" => UtilityLaw::Uniform,
                    "log" => UtilityLaw::LogUniform,
                    other => return Err(Error::bad_param("law", format!("unknown law {other:?}"))),
                };
                let mut p = RandomParams::new(self.n, self.support, self.scale, self.seed).law(law);
                if self.positive {
                    p = p.positive();
                } else if self.positive_agent {
                    p = p.positive_agent();
                }
                gen_random_with(&p)
            }
            other => Err(Error::bad_param("family", format!("unknown family {other:?}"))),
        }
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(flatten)]
    spec: GenSpec,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// binning | binning-z | best-round | accept-all | oblivious | semi |
    /// algo-low | algo-high | beta | interval-k
    #[arg(long)]
    algo: String,
    /// Window length for interval-k.
    #[arg(long)]
    k: Option<usize>,
    /// Scheme output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plan sidecar; defaults to `<out stem>.plan.json` next to `--out`.
    #[arg(long)]
    plan: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    scheme: PathBuf,
    /// conscious | semi | oblivious
    #[arg(long, default_value = "conscious")]
    info: String,
    /// Rounds of agent lookahead.
    #[arg(long)]
    lookahead: Option<usize>,
    /// Also write a one-row CSV report.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Only options with positive principal utility are candidates.
    #[arg(long)]
    prune_zero_b: bool,
    /// Cap on candidates (search space `2^cap`).
    #[arg(long, default_value_t = BRUTE_FORCE_MAX_BITS)]
    max_candidates: u32,
    /// Write the best scheme here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// CSV output; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match dispatch(cli.command, &mut stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = stdout.flush();
            eprintln!("error: {}: {}", e.name(), e);
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Solve(a) => cmd_solve(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    }
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> Result<()> {
    let inst = a.spec.generate()?;
    emit(&instance_to_json(&inst), a.out.as_deref(), out)
}

fn plan_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.plan.json"))
}

fn cmd_solve(a: SolveArgs, out: &mut dyn Write) -> Result<()> {
    let inst = load(&a.instance)?;
    let algo: Algo = a.algo.parse()?;
    let solved = solve(&inst, algo, a.k)?;
    let file = SchemeFile {
        scheme: solved.scheme.clone(),
        interval: solved.window(),
    };
    emit(&scheme_to_json(&file), a.out.as_deref(), out)?;
    let plan_target = a.plan.or_else(|| a.out.as_deref().map(plan_path));
    if let Some(p) = plan_target {
        let doc = serde_json::json!({
            "algo": algo.name(),
            "guarantee": solved.guarantee.as_ref().map(|g| g.describe()),
            "plan": solved.plan,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("plan serializes");
        text.push('\n');
        std::fs::write(p, text)?;
    }
    Ok(())
}

fn cmd_eval(a: EvalArgs, out: &mut dyn Write) -> Result<()> {
    let inst = load(&a.instance)?;
    let text = std::fs::read_to_string(&a.scheme)?;
    let file = scheme_from_json(&text, &inst)?;
    let model: InfoModel = a.info.parse()?;
    scheme_info_validity(&inst, &file.scheme, model)?;
    let eval = match (file.interval, a.lookahead) {
        (Some(_), Some(_)) => {
            return Err(Error::bad_param("lookahead", "not defined for interval schemes"));
        }
        (Some(w), None) => evaluate_k_proposal(&inst, &interval_scheme_for_window(&inst, w)?)?,
        (None, Some(k)) => lookahead_best_response(&inst, &file.scheme, LookaheadConfig { k })?,
        (None, None) => crate::dynamics::agent_best_response(&inst, &file.scheme)?.1,
    };
    let off = offline_opt(&inst);
    let on = online_opt(&inst);
    let r_off = ratio(&eval.principal_value, &off);
    let r_on = ratio(&eval.principal_value, &on);
    let lines = [
        ("principal_value", &eval.principal_value),
        ("agent_value", &eval.agent_value),
        ("offline_opt", &off),
        ("online_opt", &on),
        ("ratio_offline", &r_off),
        ("ratio_online", &r_on),
    ];
    for (name, q) in lines {
        writeln!(out, "{name} {}", display_exact(q))?;
    }
    if let Some(path) = a.csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = std::iter::once("scheme").chain(lines.iter().map(|(n, _)| *n)).collect();
        let name = a
            .scheme
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let row: Vec<String> = std::iter::once(name)
            .chain(lines.iter().map(|(_, q)| format_rational(q)))
            .collect();
        w.write_record(&header).map_err(csv_err)?;
        w.write_record(&row).map_err(csv_err)?;
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(path, bytes)?;
    }
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn cmd_oracle(a: OracleArgs, out: &mut dyn Write) -> Result<()> {
    let inst = load(&a.instance)?;
    let bf = brute_force_optimal_capped(&inst, a.prune_zero_b, a.max_candidates)?;
    writeln!(
        out,
        "searched {} schemes (2^{} candidates)",
        bf.searched,
        bf.candidates.len()
    )?;
    writeln!(out, "best {}", bf.scheme.describe())?;
    writeln!(out, "value {}", display_exact(&bf.value))?;
    let off = offline_opt(&inst);
    writeln!(out, "ratio_offline {}", display_exact(&ratio(&bf.value, &off)))?;
    if let Some(path) = a.out {
        let scheme = bf.scheme.to_scheme(&inst.shape())?;
        std::fs::write(path, scheme_to_json(&SchemeFile { scheme, interval: None }))?;
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> Result<()> {
    let text = std::fs::read_to_string(&a.config)?;
    let config = BenchConfig::from_json(&text)?;
    let target = a.out.or_else(|| config.output.clone().map(PathBuf::from));
    if a.jobs == 0 {
        return Err(Error::bad_param("jobs", "must be at least 1"));
    }
    let mut buf = Vec::new();
    let outcome = run_bench(&config, a.jobs, &mut buf);
    emit(&String::from_utf8(buf).expect("csv is utf-8"), target.as_deref(), out)?;
    outcome
}
