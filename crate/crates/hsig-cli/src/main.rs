//! Command-line surface for the tree-signature library.
//!
//! Subcommands: `phi`, `dist`, `dims`, `experiment`, `fixtures`.
//! Exit codes: 0 success, 2 parse error (arguments or input files),
//! 3 validation/config error, 4 resource error.

use hsig::dp::{brute_force_phi, phi, DpError, PhiResult, DEFAULT_LEAF_CAP};
use hsig::experiment::{run_experiment, ExperimentConfig, ExperimentError};
use hsig::graded::{graded_dim, graded_dim_cumulative, tensor_to_json};
use hsig::metrics::{adapted_distance, MetricError};
use hsig::process::{tree_to_json, FiltrationTree, ProcessTree};
use hsig::sig::SignatureConfig;
use hsig::tensor::NormMode;
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

enum CliError {
    Usage(String),
    Parse(String),
    Validation(String),
    Resource(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Resource(_) => 4,
            CliError::Io(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Parse(m)
            | CliError::Validation(m)
            | CliError::Resource(m)
            | CliError::Io(m) => m,
        }
    }
}

impl From<DpError> for CliError {
    fn from(e: DpError) -> Self {
        match e {
            DpError::Resource { .. } | DpError::LeafCap { .. } => CliError::Resource(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Dp(inner) => inner.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Config(m) => CliError::Validation(m),
            ExperimentError::Dp(inner) => inner.into(),
        }
    }
}

const USAGE: &str = "usage:
  hsig phi --input FILE --rank R --trunc M [--normalize] [--oracle]
  hsig dist --a FILE --b FILE --rank R --trunc M [--normalize] [--norm hilbert|level-l1]
  hsig dims --rank R --dim D --max-degree K
  hsig experiment [--epsilon E] [--n-samples N] [--train N] [--test N]
                  [--trunc0 M] [--trunc1 M] [--epochs N] [--l2 V]
                  [--seed S] [--output FILE]
  hsig fixtures appendix-a [--out-dir DIR]
  hsig fixtures figure-1 --n N [--out-dir DIR]

environment:
  HSIG_THREADS  caps worker threads for feature computation

exit codes: 0 ok, 2 parse error, 3 validation error, 4 resource error";

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}", e.message());
            std::process::exit(e.exit_code());
        }
    }
}

fn dispatch(args: &[String]) -> Result<(), CliError> {
    match args.first().map(String::as_str) {
        Some("phi") => cmd_phi(&args[1..]),
        Some("dist") => cmd_dist(&args[1..]),
        Some("dims") => cmd_dims(&args[1..]),
        Some("experiment") => cmd_experiment(&args[1..]),
        Some("fixtures") => cmd_fixtures(&args[1..]),
        Some("--help") | Some("-h") | None => {
            println!("{USAGE}");
            Ok(())
        }
        Some(other) => Err(CliError::Usage(format!(
            "unknown command {other:?}\n{USAGE}"
        ))),
    }
}

/// Minimal flag scanner: `--key value` pairs plus boolean switches.
struct Flags<'a> {
    pairs: Vec<(&'a str, Option<&'a str>)>,
}

impl<'a> Flags<'a> {
    fn parse(args: &'a [String], switches: &[&str]) -> Result<Self, CliError> {
        let mut pairs = Vec::new();
        let mut i = 0;
        while i < args.len() {
            let key = args[i].as_str();
            if !key.starts_with("--") {
                return Err(CliError::Usage(format!("unexpected argument {key:?}")));
            }
            if switches.contains(&key) {
                pairs.push((key, None));
                i += 1;
            } else {
                let value = args
                    .get(i + 1)
                    .ok_or_else(|| CliError::Usage(format!("{key} needs a value")))?;
                pairs.push((key, Some(value.as_str())));
                i += 2;
            }
        }
        Ok(Flags { pairs })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.pairs
            .iter()
            .find(|(k, _)| *k == key)
            .and_then(|(_, v)| *v)
    }

    fn has(&self, key: &str) -> bool {
        self.pairs.iter().any(|(k, _)| *k == key)
    }

    fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| CliError::Usage(format!("missing {key}")))
    }

    fn parse_num<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("{key} got invalid value {raw:?}"))),
        }
    }

    fn require_num<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|_| CliError::Usage(format!("{key} got invalid value {raw:?}")))
    }
}

fn load_tree(path: &str) -> Result<FiltrationTree<f64>, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {path}: {e}")))?;
    let mut tree =
        ProcessTree::from_json_str(&raw).map_err(|e| CliError::Parse(format!("{path}: {e}")))?;
    tree.validate().map_err(|issues| {
        let lines: Vec<String> = issues.iter().map(|d| d.to_string()).collect();
        CliError::Validation(format!("{path}: {}", lines.join("; ")))
    })?;
    Ok(tree.to_float())
}

fn norm_flag(flags: &Flags) -> Result<NormMode, CliError> {
    match flags.get("--norm") {
        None | Some("hilbert") => Ok(NormMode::Hilbert),
        Some("level-l1") => Ok(NormMode::LevelL1),
        Some(other) => Err(CliError::Usage(format!(
            "--norm must be hilbert or level-l1, got {other:?}"
        ))),
    }
}

fn phi_to_json(result: &PhiResult, oracle_deviation: Option<f64>) -> serde_json::Value {
    let mut out = json!({
        "rank": result.rank,
        "max_degree": result.max_degree,
        "provenance": result.provenance,
        "counters": {
            "node_visits": result.counters.node_visits,
            "peak_stack_depth": result.counters.peak_stack_depth,
            "elapsed_ms": result.counters.elapsed.as_secs_f64() * 1e3,
        },
        "tensor": tensor_to_json(&result.value),
    });
    if let Some(dev) = oracle_deviation {
        out["oracle_max_deviation"] = json!(dev);
    }
    out
}

fn cmd_phi(args: &[String]) -> Result<(), CliError> {
    let flags = Flags::parse(args, &["--normalize", "--oracle"])?;
    let tree = load_tree(flags.require("--input")?)?;
    let rank: usize = flags.require_num("--rank")?;
    let trunc: usize = flags.require_num("--trunc")?;
    let robust = flags.has("--normalize").then_some(NormMode::Hilbert);
    let result = phi(&tree, rank, trunc, robust)?;
    let oracle_deviation = if flags.has("--oracle") {
        let oracle = brute_force_phi(&tree, rank, trunc, robust, DEFAULT_LEAF_CAP)?;
        Some(
            result
                .value
                .max_abs_diff(&oracle.value)
                .expect("oracle shares the algebra"),
        )
    } else {
        None
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&phi_to_json(&result, oracle_deviation)).unwrap()
    );
    Ok(())
}

fn cmd_dist(args: &[String]) -> Result<(), CliError> {
    let flags = Flags::parse(args, &["--normalize"])?;
    let a = load_tree(flags.require("--a")?)?;
    let b = load_tree(flags.require("--b")?)?;
    let rank: usize = flags.require_num("--rank")?;
    let config = SignatureConfig {
        max_degree: flags.require_num("--trunc")?,
        normalize: flags.has("--normalize"),
        norm: norm_flag(&flags)?,
    };
    let report = adapted_distance(&a, &b, rank, &config)?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(())
}

fn cmd_dims(args: &[String]) -> Result<(), CliError> {
    let flags = Flags::parse(args, &[])?;
    let rank: usize = flags.require_num("--rank")?;
    let dim: usize = flags.require_num("--dim")?;
    let max_degree: usize = flags.require_num("--max-degree")?;
    if rank == 0 || dim == 0 {
        return Err(CliError::Validation("rank and dim must be positive".into()));
    }
    let mut out = String::from("degree\tcount\tcumulative\n");
    let mut cumulative: u128 = 0;
    for k in 0..=max_degree {
        let count = graded_dim(rank, dim, k);
        cumulative += count;
        writeln!(out, "{k}\t{count}\t{cumulative}").unwrap();
    }
    debug_assert_eq!(cumulative, graded_dim_cumulative(rank, dim, max_degree));
    print!("{out}");
    Ok(())
}

fn cmd_experiment(args: &[String]) -> Result<(), CliError> {
    let flags = Flags::parse(args, &[])?;
    let mut cfg = ExperimentConfig::reference(1e-4, 42);
    if let Some(v) = flags.parse_num("--epsilon")? {
        cfg.epsilon = v;
    }
    if let Some(v) = flags.parse_num("--n-samples")? {
        cfg.n_samples = v;
        // keep an even split unless overridden below
        cfg.train_size = cfg.n_samples / 2;
        cfg.test_size = cfg.n_samples - cfg.train_size;
    }
    if let Some(v) = flags.parse_num("--train")? {
        cfg.train_size = v;
    }
    if let Some(v) = flags.parse_num("--test")? {
        cfg.test_size = v;
    }
    if let Some(v) = flags.parse_num("--trunc0")? {
        cfg.trunc_phi0 = v;
    }
    if let Some(v) = flags.parse_num("--trunc1")? {
        cfg.trunc_phi1 = v;
    }
    if let Some(v) = flags.parse_num("--epochs")? {
        cfg.epochs = v;
    }
    if let Some(v) = flags.parse_num("--l2")? {
        cfg.l2_reg = v;
    }
    if let Some(v) = flags.parse_num("--seed")? {
        cfg.seed = v;
    }
    if let Ok(raw) = std::env::var("HSIG_THREADS") {
        let cap: usize = raw
            .parse()
            .map_err(|_| CliError::Validation(format!("HSIG_THREADS got {raw:?}")))?;
        cfg.threads = cap.max(1);
    }
    let result = run_experiment(&cfg)?;
    let csv = result.to_csv();
    match flags.get("--output") {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| CliError::Io(format!("cannot write {path}: {e}")))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn write_tree(dir: &Path, name: &str, tree: ProcessTree) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let body = serde_json::to_string_pretty(&tree_to_json(&tree)).unwrap();
    std::fs::write(&path, body + "\n")
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn cmd_fixtures(args: &[String]) -> Result<(), CliError> {
    let which = args
        .first()
        .ok_or_else(|| CliError::Usage("fixtures needs a name: appendix-a | figure-1".into()))?;
    let flags = Flags::parse(&args[1..], &[])?;
    let dir = PathBuf::from(flags.get("--out-dir").unwrap_or("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    match which.as_str() {
        "appendix-a" => {
            let x = write_tree(
                &dir,
                "appendix-a-x.json",
                ProcessTree::Exact(hsig::fixtures::appendix_a_x()),
            )?;
            let y = write_tree(
                &dir,
                "appendix-a-y.json",
                ProcessTree::Exact(hsig::fixtures::appendix_a_y()),
            )?;
            println!("{}", x.display());
            println!("{}", y.display());
            Ok(())
        }
        "figure-1" => {
            let n: u32 = flags.require_num("--n")?;
            if n == 0 {
                return Err(CliError::Validation("--n must be positive".into()));
            }
            let left = write_tree(
                &dir,
                &format!("figure-1-left-n{n}.json"),
                ProcessTree::Exact(hsig::fixtures::figure1_left(n)),
            )?;
            let right = write_tree(
                &dir,
                "figure-1-right.json",
                ProcessTree::Exact(hsig::fixtures::figure1_right()),
            )?;
            println!("{}", left.display());
            println!("{}", right.display());
            Ok(())
        }
        other => Err(CliError::Usage(format!(
            "unknown fixture {other:?}: expected appendix-a or figure-1"
        ))),
    }
}
