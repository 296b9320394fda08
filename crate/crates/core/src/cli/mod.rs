//! Command-line driver: constructions, transforms, checks and the built-in recipes.
//!
//! Exit status is 0 when every check passes, 1 when a check fails and 2 for usage or internal
//! errors.

mod config;
mod output;
mod recipes;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

pub use config::{read_config_file, read_pairs, Recipe, RunConfig, KEYS};
pub use output::{read_points_csv, sample_points};
pub use recipes::{run_recipe, w1_passes, Item, RecipeOutcome, W1_MAX_LAST_CHANGE};

use crate::construct::basic::point_mass;
use crate::construct::nomoc::{build_nomoc, verify_moc_bound};
use crate::construct::nosupp::build_nosupp;
use crate::construct::riesz::build_riesz;
use crate::criteria::{carleson_sum, cyclicity_constant, exp_zygmund_constant, w1_report, zygmund_seminorm, QuadOptions};
use crate::dyadic::{load_measure, measure_dump, DyadicClosedSet, DyadicMeasure};
use crate::error::{BlochError, Result};
use crate::majorant::Majorant;
use crate::rational::{fmt_f64, json_f64, parse, to_f64, to_json_pair};
use crate::transform::{singular_inner, transform, AtomizeOptions, Kernel};
use output::{pair_json, read_json, value_row, write_json, VALUE_HEADER};

#[derive(Parser, Debug)]
#[command(name = "blochlab", version, about = "Singular measures, Herglotz transforms and Bloch-space criteria")]
pub struct Cli {
    /// Worker threads (0: one per core).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a measure and write its dump.
    Construct(ConstructArgs),
    /// Evaluate S, H, H' or P of a dumped measure at points read from a CSV file.
    Transform(TransformArgs),
    /// Run one criterion on a dumped measure or closed set.
    Check(CheckArgs),
    /// Run a built-in recipe from a key=value config file and/or flags (flags win).
    Run(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConstructKind {
    Nomoc,
    Nosupp,
    Riesz,
    Atom,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    pub kind: ConstructKind,
    /// Majorant for nomoc: power:<a>, tlog, loginv:<a> or table:<path>.
    #[arg(long, default_value = "power:1/2")]
    pub majorant: String,
    /// Generations of the nomoc construction.
    #[arg(long, default_value_t = 3)]
    pub levels: u32,
    /// Closed-set dump for nosupp.
    #[arg(long)]
    pub set: Option<PathBuf>,
    /// Level of the dumped arcs.
    #[arg(long)]
    pub depth: Option<u32>,
    /// Right-child bias of the riesz measure.
    #[arg(long, default_value = "1/2")]
    pub eta: String,
    /// Position of the atom, in turns.
    #[arg(long, default_value = "0")]
    pub theta: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TransformKind {
    #[value(name = "S")]
    S,
    #[value(name = "H")]
    H,
    #[value(name = "H'")]
    Hprime,
    #[value(name = "P")]
    P,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long)]
    pub kind: TransformKind,
    /// CSV of `re,im` rows.
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Spread each dumped arc's mass uniformly below the dump depth instead of failing there.
    #[arg(long)]
    pub extend_uniform: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Zygmund,
    Expzyg,
    Cyclic,
    W1,
    Carleson,
    Moc,
}

impl CheckKind {
    fn stem(self) -> &'static str {
        match self {
            CheckKind::Zygmund => "zygmund",
            CheckKind::Expzyg => "expzyg",
            CheckKind::Cyclic => "cyclic",
            CheckKind::W1 => "w1_report",
            CheckKind::Carleson => "carleson",
            CheckKind::Moc => "moc_bound",
        }
    }
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub kind: CheckKind,
    #[arg(long)]
    pub measure: Option<PathBuf>,
    #[arg(long)]
    pub set: Option<PathBuf>,
    #[arg(long)]
    pub depth: u32,
    /// Midpoint nodes per direction for the box integrals.
    #[arg(long, default_value_t = 8)]
    pub quad: usize,
    /// Majorant for the moc check.
    #[arg(long)]
    pub majorant: Option<String>,
    #[arg(long)]
    pub extend_uniform: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// key=value file; keys are the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub recipe: Option<String>,
    #[arg(long)]
    pub majorant: Option<String>,
    #[arg(long)]
    pub levels: Option<String>,
    #[arg(long)]
    pub eta: Option<String>,
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub depth: Option<String>,
    #[arg(long)]
    pub quad: Option<String>,
    #[arg(long)]
    pub points: Option<String>,
    #[arg(long)]
    pub out_dir: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
}

impl RunArgs {
    fn pairs(&self) -> Vec<(String, String)> {
        let flags = [
            ("recipe", &self.recipe),
            ("majorant", &self.majorant),
            ("levels", &self.levels),
            ("eta", &self.eta),
            ("set", &self.set),
            ("depth", &self.depth),
            ("quad", &self.quad),
            ("points", &self.points),
            ("out-dir", &self.out_dir),
            ("seed", &self.seed),
        ];
        flags.into_iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect()
    }
}

/// Whether every check of a command passed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// Parses the process arguments, runs the command and maps the outcome to an exit code.
pub fn main() -> ExitCode {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

pub fn execute(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::Run(args) => {
            let mut pairs = match &args.config {
                Some(p) => read_config_file(p)?,
                None => Vec::new(),
            };
            pairs.extend(args.pairs());
            if let Some(w) = cli.workers {
                pairs.push(("workers".into(), w.to_string()));
            }
            let cfg = RunConfig::from_pairs(pairs)?;
            let outcome = run_recipe(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&outcome.summary())?);
            Ok(Status::from_bool(outcome.passed()))
        }
        command => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cli.workers.unwrap_or(0))
                .build()
                .map_err(|e| BlochError::InvalidArgument(format!("workers: {e}")))?;
            pool.install(|| match command {
                Command::Construct(a) => construct(&a),
                Command::Transform(a) => transform_points(&a),
                Command::Check(a) => check(&a),
                Command::Run(_) => unreachable!("handled above"),
            })
        }
    }
}

fn construct(a: &ConstructArgs) -> Result<Status> {
    let (measure, default_depth) = match a.kind {
        ConstructKind::Nomoc => {
            let w = Majorant::parse(&a.majorant)?;
            let (mu, rule) = build_nomoc(&w, a.levels)?;
            let top = rule.generation_level(a.levels).unwrap_or(0);
            (mu, top.min(16))
        }
        ConstructKind::Nosupp => {
            let path = a.set.as_ref().ok_or_else(|| BlochError::InvalidArgument("set: nosupp needs --set".into()))?;
            let set = DyadicClosedSet::from_json(&read_json(path)?)?;
            let depth = a.depth.unwrap_or(set.depth());
            (build_nosupp(&set, depth)?.measure, depth)
        }
        ConstructKind::Riesz => (build_riesz(parse(&a.eta)?)?.0, 16),
        ConstructKind::Atom => (point_mass(parse(&a.theta)?, crate::rational::int(1)), 10),
    };
    write_json(&a.out, &measure_dump(&measure, a.depth.unwrap_or(default_depth))?)?;
    Ok(Status::Pass)
}

fn load(path: &Path, extend_uniform: bool) -> Result<DyadicMeasure> {
    load_measure(&read_json(path)?, extend_uniform)
}

fn transform_points(a: &TransformArgs) -> Result<Status> {
    let mu = load(&a.measure, a.extend_uniform)?;
    let pts = read_points_csv(&a.points)?;
    let opts = AtomizeOptions::default();
    let rows = pts
        .par_iter()
        .map(|z| match a.kind {
            TransformKind::S => Ok(singular_inner(&mu, z, &opts)?.0),
            TransformKind::H => transform(&mu, z, Kernel::Herglotz, &opts),
            TransformKind::Hprime => transform(&mu, z, Kernel::HerglotzPrime, &opts),
            TransformKind::P => transform(&mu, z, Kernel::Poisson, &opts),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = String::from(VALUE_HEADER);
    for (z, v) in pts.iter().zip(rows) {
        csv.push_str(&value_row(z.value(), v.value, v.error_bound));
    }
    std::fs::write(&a.out, csv)?;
    Ok(Status::Pass)
}

fn check(a: &CheckArgs) -> Result<Status> {
    std::fs::create_dir_all(&a.out_dir)?;
    let need_measure = || -> Result<DyadicMeasure> {
        let p = a.measure.as_ref().ok_or_else(|| BlochError::InvalidArgument("measure: this check needs --measure".into()))?;
        load(p, a.extend_uniform)
    };
    let need_set = || -> Result<DyadicClosedSet> {
        let p = a.set.as_ref().ok_or_else(|| BlochError::InvalidArgument("set: this check needs --set".into()))?;
        DyadicClosedSet::from_json(&read_json(p)?)
    };
    let stem = a.kind.stem();
    let (csv, verdict, status) = match a.kind {
        CheckKind::Zygmund => {
            let z = zygmund_seminorm(&need_measure()?, a.depth)?;
            let mut csv = String::from("level,value,value_f64\n");
            for (n, v) in z.per_level.iter().enumerate() {
                csv.push_str(&format!("{n},{v},{}\n", fmt_f64(to_f64(v))));
            }
            let best = z.per_level.iter().enumerate().max_by(|x, y| x.1.cmp(y.1)).map(|(i, _)| i);
            let v = json!({ "sup": to_json_pair(&z.sup()), "worst_pair": pair_json(best.and_then(|i| z.worst[i])) });
            (csv, v, Status::Pass)
        }
        CheckKind::Expzyg | CheckKind::Cyclic => {
            let mu = need_measure()?;
            let r = if a.kind == CheckKind::Expzyg { exp_zygmund_constant(&mu, a.depth)? } else { cyclicity_constant(&mu, a.depth)? };
            let mut csv = String::from("level,ln_constant\n");
            for (n, v) in r.per_level_ln.iter().enumerate() {
                csv.push_str(&format!("{n},{}\n", fmt_f64(*v)));
            }
            let best = r.per_level_ln.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).map(|(i, _)| i);
            let v = json!({
                "verdict": r.trend.as_str(),
                "ln_constant": json_f64(r.ln_constant()),
                "worst_pair": pair_json(best.and_then(|i| r.worst[i])),
            });
            (csv, v, Status::Pass)
        }
        CheckKind::W1 => {
            let quad = QuadOptions { nodes: a.quad, ..QuadOptions::default() };
            let w1 = w1_report(&need_measure()?, &need_set()?, a.depth, &quad)?;
            let mut v = w1.report.to_json();
            v["last_relative_change"] = json_f64(w1.report.last_relative_change());
            v["worst_pair"] = Value::Null;
            (w1.report.to_csv(), v, Status::from_bool(w1_passes(&w1.report)))
        }
        CheckKind::Carleson => {
            let r = carleson_sum(&need_set()?, a.depth)?;
            let mut v = r.to_json();
            v["worst_pair"] = Value::Null;
            (r.to_csv(), v, Status::Pass)
        }
        CheckKind::Moc => {
            let name = a.majorant.as_deref().ok_or_else(|| BlochError::InvalidArgument("majorant: moc needs --majorant".into()))?;
            let r = verify_moc_bound(&need_measure()?, &Majorant::parse(name)?, a.depth)?;
            let v = json!({
                "verdict": if r.passed() { "pass" } else { "fail" },
                "worst_ratio": json_f64(r.worst_ratio),
                "worst_regime_ratio": json_f64(r.worst_regime_ratio),
                "regime_start": r.regime_start,
                "worst_pair": Value::Null,
            });
            (String::new(), v, Status::from_bool(r.passed()))
        }
    };
    if !csv.is_empty() {
        std::fs::write(a.out_dir.join(format!("{stem}.csv")), csv)?;
    }
    write_json(&a.out_dir.join(format!("{stem}.json")), &verdict)?;
    println!("{}", serde_json::to_string_pretty(&verdict)?);
    Ok(status)
}
