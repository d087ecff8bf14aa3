use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use optiroute::engine::{EngineConfig, EngineState, Solver};
use optiroute::export::{self, ExportFormat};
use optiroute::oracle::{self, verify_policy, WeightedView};
use optiroute::qlearning::Hyperparams;
use optiroute::route::diff_tables;
use optiroute::telemetry::{parse_event_stream, RewardModel, TelemetrySnapshot};
use optiroute::{NodeId, Topology};

use crate::{EXIT_CONVERGENCE, EXIT_OK, EXIT_VERIFICATION};

#[derive(Parser, Debug)]
#[command(
    name = "optiroute",
    version,
    about = "Telemetry-driven routing policies for packet-optical networks"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a topology document and print its connected components.
    Validate { topology: PathBuf },
    /// Compute a route table for every ordered node pair.
    Solve(SolveArgs),
    /// Exact shortest-penalty routes, or verification of a saved route table.
    Oracle(OracleArgs),
    /// Compare two saved route tables.
    Diff {
        old: PathBuf,
        new: PathBuf,
        /// Emit the diff as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print path and reward for selected pairs of a saved route table.
    Report {
        table: PathBuf,
        /// Pair as SRC:DST; repeatable. All pairs when omitted.
        #[arg(long = "pair", value_parser = parse_pair)]
        pairs: Vec<(NodeId, NodeId)>,
    },
    /// Re-solve after each telemetry event (or batch) and print the diffs.
    Replay(ReplayArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SolverArg {
    Q,
    Oracle,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Q => Solver::QLearning,
            SolverArg::Oracle => Solver::Oracle,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FormatArg {
    MatrixTable,
    FlatCsv,
    Structured,
}

impl From<FormatArg> for ExportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::MatrixTable => ExportFormat::MatrixTable,
            FormatArg::FlatCsv => ExportFormat::FlatCsv,
            FormatArg::Structured => ExportFormat::Structured,
        }
    }
}

/// Learner settings. Flags override the config document, which overrides
/// the built-in defaults.
#[derive(Args, Debug, Clone)]
struct LearnArgs {
    #[arg(long, value_enum, default_value = "q")]
    solver: SolverArg,
    /// JSON document with any subset of the hyperparameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    epsilon_start: Option<f64>,
    #[arg(long)]
    epsilon_end: Option<f64>,
    #[arg(long)]
    epsilon_decay: Option<f64>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    max_steps: Option<usize>,
}

impl LearnArgs {
    fn hyperparams(&self) -> Result<Hyperparams> {
        let mut hp = match &self.config {
            Some(p) => serde_json::from_str(&read(p)?).with_context(|| format!("config {}", p.display()))?,
            None => Hyperparams::default(),
        };
        if let Some(v) = self.seed {
            hp.seed = v;
        }
        if let Some(v) = self.alpha {
            hp.alpha = v;
        }
        if let Some(v) = self.gamma {
            hp.gamma = v;
        }
        if let Some(v) = self.epsilon_start {
            hp.epsilon_start = v;
        }
        if let Some(v) = self.epsilon_end {
            hp.epsilon_end = v;
        }
        if let Some(v) = self.epsilon_decay {
            hp.epsilon_decay = v;
        }
        if let Some(v) = self.episodes {
            hp.episodes = v;
        }
        if let Some(v) = self.max_steps {
            hp.max_steps_per_episode = Some(v);
        }
        hp.validate()?;
        Ok(hp)
    }

    fn engine_config(&self) -> Result<EngineConfig> {
        Ok(EngineConfig {
            solver: self.solver.into(),
            hyperparams: self.hyperparams()?,
            ..EngineConfig::default()
        })
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(required_unless_present = "show_config")]
    topology: Option<PathBuf>,
    #[arg(required_unless_present = "show_config")]
    telemetry: Option<PathBuf>,
    #[command(flatten)]
    learn: LearnArgs,
    #[arg(long, value_enum, default_value = "matrix-table")]
    format: FormatArg,
    /// Write the table here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Text of the `Path` column in matrix-table output.
    #[arg(long, default_value = "primary")]
    label: String,
    /// Print the effective configuration and exit.
    #[arg(long)]
    show_config: bool,
}

#[derive(Args, Debug)]
struct OracleArgs {
    topology: PathBuf,
    telemetry: PathBuf,
    #[arg(long, requires = "dst", conflicts_with_all = ["all", "verify"])]
    src: Option<u32>,
    #[arg(long, requires = "src")]
    dst: Option<u32>,
    #[arg(long, conflicts_with = "verify")]
    all: bool,
    /// Saved structured route table to check against the optimum.
    #[arg(long)]
    verify: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    topology: PathBuf,
    telemetry: PathBuf,
    events: PathBuf,
    #[command(flatten)]
    learn: LearnArgs,
    /// Coalesce events this many seconds after the first of a batch.
    #[arg(long, default_value_t = 0.0)]
    batch_window: f64,
    /// Initialize each re-solve from the previous Q-tables.
    #[arg(long)]
    warm_start: bool,
    /// Also write one JSON record per re-solve to this file.
    #[arg(long)]
    diff_log: Option<PathBuf>,
}

fn parse_pair(s: &str) -> std::result::Result<(NodeId, NodeId), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected SRC:DST, got {s:?}"))?;
    let id = |x: &str| x.trim().parse::<u32>().map(NodeId).map_err(|e| format!("{x:?}: {e}"));
    Ok((id(a)?, id(b)?))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_inputs(topology: &Path, telemetry: &Path) -> Result<(Topology, TelemetrySnapshot)> {
    let topo = Topology::from_json(&read(topology)?).with_context(|| format!("topology {}", topology.display()))?;
    let snap = TelemetrySnapshot::from_json(&read(telemetry)?)
        .with_context(|| format!("telemetry {}", telemetry.display()))?;
    snap.check_covers(&topo)
        .with_context(|| format!("telemetry {}", telemetry.display()))?;
    Ok((topo, snap))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Validate { topology } => validate(&topology),
        Command::Solve(args) => solve(args),
        Command::Oracle(args) => oracle_cmd(args),
        Command::Diff { old, new, json } => diff(&old, &new, json),
        Command::Report { table, pairs } => report(&table, &pairs),
        Command::Replay(args) => replay(args),
    }
}

fn validate(path: &Path) -> Result<u8> {
    let topo = Topology::from_json(&read(path)?).with_context(|| format!("topology {}", path.display()))?;
    let comps = topo.connectivity_report();
    println!(
        "nodes {} links {} components {}",
        topo.node_count(),
        topo.link_count(),
        comps.len()
    );
    for (i, c) in comps.iter().enumerate() {
        let members: Vec<String> = c.iter().map(|n| n.to_string()).collect();
        println!("component {} size {}: {}", i + 1, c.len(), members.join(" "));
    }
    Ok(EXIT_OK)
}

fn solve(args: SolveArgs) -> Result<u8> {
    let config = args.learn.engine_config()?;
    if args.show_config {
        let doc = json!({
            "solver": config.solver,
            "hyperparams": config.hyperparams,
            "reward_model": config.model,
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
        return Ok(EXIT_OK);
    }
    let (Some(topo_path), Some(tel_path)) = (&args.topology, &args.telemetry) else {
        bail!("topology and telemetry files are required");
    };
    let (topo, snap) = load_inputs(topo_path, tel_path)?;
    let (table, _) = optiroute::engine::solve(&topo, &snap, &config, None)?;
    let text = export::render(&table, args.format.into(), &args.label)?;
    emit(args.output.as_deref(), &text)?;
    let failures = table.failures();
    if failures.is_empty() {
        Ok(EXIT_OK)
    } else {
        for (s, d) in &failures {
            eprintln!("no convergence: {s}->{d}");
        }
        Ok(EXIT_CONVERGENCE)
    }
}

fn oracle_cmd(args: OracleArgs) -> Result<u8> {
    let (topo, snap) = load_inputs(&args.topology, &args.telemetry)?;
    let view = WeightedView::new(&topo, &snap, &RewardModel::default())?;
    if let Some(path) = &args.verify {
        let table = export::from_structured(&read(path)?).with_context(|| format!("route table {}", path.display()))?;
        if table.topology != topo.fingerprint() {
            bail!("route table {} was computed on a different topology", path.display());
        }
        let rep = verify_policy(&table, &view);
        for f in &rep.failures {
            println!(
                "FAIL {}->{}: learned {} ({}) optimal {} ({})",
                f.src,
                f.dst,
                f.learned,
                f.learned_reward.map_or("-".into(), export::fmt_reward),
                f.optimal,
                f.optimal_reward.map_or("-".into(), export::fmt_reward),
            );
        }
        for t in &rep.ties {
            println!("TIE  {}->{}: learned {} optimal {}", t.src, t.dst, t.learned, t.optimal);
        }
        println!(
            "checked {} failures {} ties {}",
            rep.checked,
            rep.failures.len(),
            rep.ties.len()
        );
        return Ok(if rep.is_ok() { EXIT_OK } else { EXIT_VERIFICATION });
    }
    if let (Some(s), Some(d)) = (args.src, args.dst) {
        match oracle::shortest_path(&view, NodeId(s), NodeId(d))? {
            Some(r) => println!("{}  {}", r.display_path(), export::fmt_reward(r.total_reward)),
            None => println!("unreachable"),
        }
        return Ok(EXIT_OK);
    }
    let table = oracle::solve_all(&view);
    let pairs: Vec<_> = table.iter().map(|(k, _)| k).collect();
    for ((s, d), line) in pairs.iter().zip(export::report_lines(&table, &pairs)?) {
        println!("{s}->{d}  {line}");
    }
    Ok(EXIT_OK)
}

fn load_table(path: &Path) -> Result<optiroute::RouteTable> {
    export::from_structured(&read(path)?).with_context(|| format!("route table {}", path.display()))
}

fn diff(old: &Path, new: &Path, as_json: bool) -> Result<u8> {
    let d = diff_tables(&load_table(old)?, &load_table(new)?)?;
    if as_json {
        println!("{}", serde_json::to_string_pretty(&d)?);
    } else {
        print!("{}", export::render_diff(&d));
    }
    Ok(EXIT_OK)
}

fn report(path: &Path, pairs: &[(NodeId, NodeId)]) -> Result<u8> {
    let table = load_table(path)?;
    let pairs: Vec<_> = if pairs.is_empty() {
        table.iter().map(|(k, _)| k).collect()
    } else {
        pairs.to_vec()
    };
    for line in export::report_lines(&table, &pairs)? {
        println!("{line}");
    }
    Ok(EXIT_OK)
}

fn replay(args: ReplayArgs) -> Result<u8> {
    let (topo, snap) = load_inputs(&args.topology, &args.telemetry)?;
    let events =
        parse_event_stream(&read(&args.events)?).with_context(|| format!("events {}", args.events.display()))?;
    let config = EngineConfig {
        warm_start: args.warm_start,
        ..args.learn.engine_config()?
    };
    let mut state = EngineState::new(Arc::new(topo), snap, config)?;
    let out = state.replay(&events, args.batch_window);
    for (i, step) in out.steps.iter().enumerate() {
        println!("# re-solve {} at t={} ({} event(s))", i + 1, step.time, step.events);
        print!("{}", export::render_diff(&step.diff));
    }
    if let Some(path) = &args.diff_log {
        let mut log = String::new();
        for step in &out.steps {
            log.push_str(&serde_json::to_string(step)?);
            log.push('\n');
        }
        fs::write(path, log).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some((idx, err)) = out.aborted {
        bail!(
            "event {} rejected after {} re-solve(s): {err}",
            idx + 1,
            out.steps.len()
        );
    }
    let failures = state.table().failures();
    Ok(if failures.is_empty() { EXIT_OK } else { EXIT_CONVERGENCE })
}
