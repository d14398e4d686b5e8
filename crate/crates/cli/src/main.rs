//! `ringcheck`: simulate ring algorithms, build their tables, and check
//! specifications up to a round bound.
//!
//! Exit codes: 0 holds, 1 violated, 3 unknown (bounded search exhausted), 2 usage,
//! parse or internal errors.

use clap::{Parser, Subcommand, ValueEnum};
use ringcheck_core::compile::{compile, dummy_extend};
use ringcheck_core::corpus::{self, parse_tuples};
use ringcheck_core::dataspec::{check_fragment, parse_spec, Spec};
use ringcheck_core::decide::{self, CheckOptions, DecideError, Mode, Outcome};
use ringcheck_core::model::{
    blocking_process, enumerate_runs, parse_algorithm, Algorithm, Configuration, Pid, Ring, Run, TransId,
};
use ringcheck_core::oracle::oracle_check;
use ringcheck_core::table::{emit, eval_lcpdl, parse_lcpdl, table_of_run, Store, Table};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use thiserror::Error;

#[derive(Parser)]
#[command(name = "ringcheck", version = concat!(env!("CARGO_PKG_VERSION"), " (", env!("RINGCHECK_BUILD"), ")"))]
#[command(about = "Round-bounded checking of distributed algorithms on rings")]
struct Cli {
    /// Worker threads for the search [default: available parallelism]
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Automaton,
    BoundedWidth,
}

#[derive(Subcommand)]
enum Command {
    /// Check a specification for every ring and every run up to a round bound
    Check {
        #[arg(long)]
        algo: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        bound: u32,
        #[arg(long, value_enum, default_value = "automaton")]
        mode: ModeArg,
        /// Widest table tried by the bounded search
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
        width_cap: u32,
        #[arg(long)]
        json: bool,
        /// Print the compiled formulas to stderr
        #[arg(long)]
        emit_lcpdl: bool,
        /// Accept order guards whose paths are not recognised as unambiguous
        #[arg(long)]
        waive_unambiguity: bool,
    },
    /// Check a specification explicitly on every ring up to a size
    Oracle {
        #[arg(long)]
        algo: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        bound: u32,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..=8))]
        n_max: u32,
        #[arg(long)]
        json: bool,
    },
    /// Run an algorithm on a ring
    Simulate {
        #[arg(long)]
        algo: PathBuf,
        /// Comma-separated pids, one per process
        #[arg(long)]
        ring: String,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        rounds: u32,
        /// Transitions to fire, one round per line; without it every run is enumerated
        #[arg(long)]
        tuples: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Print the table of a replayed run as JSON
    Table {
        #[arg(long)]
        algo: PathBuf,
        #[arg(long)]
        ring: String,
        #[arg(long)]
        tuples: PathBuf,
    },
    /// Evaluate a formula in the text format at a table position
    EvalLcpdl {
        #[arg(long)]
        table: PathBuf,
        /// Column (from 1) and row (from 0)
        #[arg(long)]
        pos: String,
        #[arg(long)]
        formula: String,
        /// Algorithm the table belongs to [default: the bundled one matching its transitions]
        #[arg(long)]
        algo: Option<PathBuf>,
    },
    /// Write the bundled algorithms, specifications and tuples to a directory
    Corpus {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", .path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Decide(#[from] DecideError),
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load_algo(path: &Path) -> Result<Algorithm> {
    parse_algorithm(&read(path)?).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
}

fn load_spec(path: &Path, algo: &Algorithm) -> Result<Spec> {
    let spec = parse_spec(&read(path)?).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
    let missing = spec.undeclared(algo);
    if !missing.is_empty() {
        let message = format!("not declared by algorithm {}: {}", algo.name, missing.join(", "));
        return Err(CliError::Parse { path: path.to_path_buf(), message });
    }
    Ok(spec)
}

fn load_tuples(path: &Path, algo: &Algorithm) -> Result<Vec<Vec<TransId>>> {
    parse_tuples(algo, &read(path)?).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
}

fn parse_ring(csv: &str) -> Result<Ring> {
    let pids = csv
        .split(',')
        .map(|p| p.trim().parse::<Pid>().map_err(|_| CliError::Usage(format!("--ring: {:?} is not a pid", p.trim()))))
        .collect::<Result<Vec<Pid>>>()?;
    Ring::new(pids).map_err(|e| CliError::Usage(format!("--ring: {e}")))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json values serialise"));
}

/// Replays `tuples`, naming the round and process that block.
fn replay(algo: &Algorithm, ring: Ring, tuples: &[Vec<TransId>]) -> Result<Run> {
    if let Some(t) = tuples.iter().find(|t| t.len() != ring.size()) {
        return Err(CliError::Usage(format!("tuples have {} entries but the ring has {} processes", t.len(), ring.size())));
    }
    let mut run = Run::start(algo, ring);
    for (j, t) in tuples.iter().enumerate() {
        if !run.push(algo, t) {
            let i = blocking_process(algo, run.last(), t).unwrap_or(0);
            return Err(CliError::Usage(format!(
                "round {}: process {} (pid {}) cannot fire {}",
                j + 1,
                i + 1,
                run.ring.pid(i),
                algo.trans(t[i]).name
            )));
        }
    }
    Ok(run)
}

fn config_json(algo: &Algorithm, c: &Configuration) -> Value {
    let regs: Vec<BTreeMap<&str, Pid>> =
        c.regs.iter().map(|rs| algo.registers.iter().map(String::as_str).zip(rs.iter().copied()).collect()).collect();
    json!({ "states": c.states.iter().map(|&s| algo.state_name(s)).collect::<Vec<_>>(), "registers": regs })
}

fn run_json(algo: &Algorithm, run: &Run) -> Value {
    let tuples: Vec<Vec<&str>> = run.tuples.iter().map(|t| t.iter().map(|&x| algo.trans(x).name.as_str()).collect()).collect();
    json!({
        "ring": run.ring.pids(),
        "tuples": tuples,
        "configurations": run.configs.iter().map(|c| config_json(algo, c)).collect::<Vec<_>>(),
    })
}

fn print_run(algo: &Algorithm, run: &Run) {
    let pids: Vec<String> = run.ring.pids().iter().map(|p| p.to_string()).collect();
    println!("ring ({}: {})", run.size(), pids.join(","));
    for (j, c) in run.configs.iter().enumerate() {
        match j {
            0 => println!("C_0"),
            _ => {
                let names: Vec<&str> = run.tuples[j - 1].iter().map(|&t| algo.trans(t).name.as_str()).collect();
                println!("C_{j}  after ({})", names.join(", "));
            }
        }
        for (i, (s, rs)) in c.states.iter().zip(&c.regs).enumerate() {
            let regs: Vec<String> = algo.registers.iter().zip(rs).map(|(r, v)| format!("{r}={v}")).collect();
            println!("  {:>3}  {:<10} {}", i + 1, algo.state_name(*s), regs.join(" "));
        }
    }
}

fn cmd_check(algo: &Path, spec: &Path, bound: usize, opts: CheckOptions, as_json: bool, emit_lcpdl: bool) -> Result<ExitCode> {
    let algo = load_algo(algo)?;
    let spec = load_spec(spec, &algo)?;
    if emit_lcpdl {
        let report = check_fragment(&spec, opts.waive_unambiguity);
        if report.admissible() {
            let mut c = compile(&algo);
            let phi = c.translate_local(&spec.body).map_err(DecideError::from)?;
            eprintln!("# psi_D\n{}", emit(&c.store, &c.dummy_extended, c.psi_d));
            eprintln!("# phi\n{}", emit(&c.store, &c.dummy_extended, phi));
        }
    }
    let v = decide::check(&algo, &spec, bound, &opts)?;
    if as_json {
        print_json(&v.to_json(&algo));
    } else {
        match v.result {
            Outcome::Holds => println!("holds for every run of at most {bound} rounds ({})", v.mode.name()),
            Outcome::Violated => println!("violated within {bound} rounds ({})", v.mode.name()),
            Outcome::Unknown => println!("unknown: no counterexample up to width {} ({})", opts.width_cap, v.mode.name()),
        }
        for n in &v.notes {
            println!("note: {n}");
        }
        if let Some(cx) = &v.counterexample {
            println!("marked process: {}", cx.marked + 1);
            print!("{}", cx.table.render(&dummy_extend(&algo)));
            print_run(&algo, &cx.run);
        }
    }
    Ok(ExitCode::from(match v.result {
        Outcome::Holds => 0,
        Outcome::Violated => 1,
        Outcome::Unknown => 3,
    }))
}

fn cmd_oracle(algo: &Path, spec: &Path, bound: usize, n_max: usize, as_json: bool) -> Result<ExitCode> {
    let algo = load_algo(algo)?;
    let spec = load_spec(spec, &algo)?;
    let v = oracle_check(&algo, &spec, bound, n_max);
    if as_json {
        print_json(&v.to_json(&algo));
    } else if let Some(cx) = &v.counterexample {
        println!("violated on a ring of {} processes, marked process {}", cx.ring.size(), cx.marked + 1);
        print_run(&algo, &cx.run);
    } else {
        println!("holds for every ring of at most {n_max} processes and every run of at most {bound} rounds");
    }
    Ok(ExitCode::from(if v.holds() { 0 } else { 1 }))
}

fn cmd_simulate(algo: &Path, ring: &str, rounds: usize, tuples: Option<&Path>, as_json: bool) -> Result<ExitCode> {
    let ring = parse_ring(ring)?;
    let algo = load_algo(algo)?;
    match tuples {
        Some(path) => {
            let tuples = load_tuples(path, &algo)?;
            if tuples.len() < rounds {
                return Err(CliError::Usage(format!("{} lists only {} rounds", path.display(), tuples.len())));
            }
            let run = replay(&algo, ring, &tuples[..rounds])?;
            if as_json {
                print_json(&run_json(&algo, &run));
            } else {
                print_run(&algo, &run);
            }
        }
        None => {
            let mut count = 0usize;
            let mut sample = None;
            for run in enumerate_runs(&algo, &ring, rounds).filter(|r| r.len() == rounds) {
                count += 1;
                sample.get_or_insert(run);
            }
            if as_json {
                print_json(&json!({ "runs": count, "sample": sample.map(|r| run_json(&algo, &r)) }));
            } else {
                println!("{count} runs of {rounds} rounds");
                if let Some(run) = &sample {
                    print_run(&algo, run);
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_table(algo: &Path, ring: &str, tuples: &Path) -> Result<ExitCode> {
    let ring = parse_ring(ring)?;
    let algo = load_algo(algo)?;
    let tuples = load_tuples(tuples, &algo)?;
    let run = replay(&algo, ring, &tuples)?;
    let ext = dummy_extend(&algo);
    let table = table_of_run(&ext, &run).map_err(DecideError::from)?;
    print_json(&serde_json::to_value(table.to_json(&ext)).expect("table json"));
    Ok(ExitCode::SUCCESS)
}

/// Column from 1, row from 0.
fn parse_pos(s: &str) -> Result<(usize, usize)> {
    let bad = || CliError::Usage(format!("--pos: expected COLUMN,ROW, found {s:?}"));
    let (i, j) = s.split_once(',').ok_or_else(bad)?;
    let i: usize = i.trim().parse().map_err(|_| bad())?;
    let j: usize = j.trim().parse().map_err(|_| bad())?;
    if i == 0 {
        return Err(CliError::Usage("--pos: columns are numbered from 1".into()));
    }
    Ok((i - 1, j))
}

fn cmd_eval(table: &Path, pos: &str, formula: &str, algo: Option<&Path>) -> Result<ExitCode> {
    let (i, j) = parse_pos(pos)?;
    let text = read(table)?;
    let parse_err = |e: &dyn std::fmt::Display| CliError::Parse { path: table.to_path_buf(), message: e.to_string() };
    let (ext, t) = match algo {
        Some(p) => {
            let ext = dummy_extend(&load_algo(p)?);
            let t = Table::parse_json(&ext, &text).map_err(|e| parse_err(&e))?;
            (ext, t)
        }
        None => [corpus::DKR, corpus::FRANKLIN]
            .iter()
            .map(|src| dummy_extend(&parse_algorithm(src).expect("bundled algorithms parse")))
            .find_map(|ext| Table::parse_json(&ext, &text).ok().map(|t| (ext, t)))
            .ok_or_else(|| parse_err(&"no bundled algorithm has these transitions; pass --algo"))?,
    };
    if i >= t.width() || j >= t.rows() {
        return Err(CliError::Usage(format!("--pos: the table has {} columns and {} rows", t.width(), t.rows())));
    }
    let mut store = Store::new();
    let f = parse_lcpdl(&mut store, &ext, formula).map_err(|e| CliError::Usage(format!("--formula: {e}")))?;
    println!("{}", eval_lcpdl(&store, &ext, &t, f, (i, j)));
    Ok(ExitCode::SUCCESS)
}

fn cmd_corpus(out: &Path) -> Result<ExitCode> {
    fs::create_dir_all(out).map_err(|source| CliError::Io { path: out.to_path_buf(), source })?;
    for (name, contents) in corpus::FILES {
        let path = out.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Check { algo, spec, bound, mode, width_cap, json, emit_lcpdl, waive_unambiguity } => {
            let mode = match mode {
                ModeArg::Automaton => Mode::Automaton,
                ModeArg::BoundedWidth => Mode::BoundedWidth,
            };
            let opts = CheckOptions { mode, width_cap: width_cap as usize, waive_unambiguity, ..CheckOptions::default() };
            cmd_check(&algo, &spec, bound as usize, opts, json, emit_lcpdl)
        }
        Command::Oracle { algo, spec, bound, n_max, json } => cmd_oracle(&algo, &spec, bound as usize, n_max as usize, json),
        Command::Simulate { algo, ring, rounds, tuples, json } => {
            cmd_simulate(&algo, &ring, rounds as usize, tuples.as_deref(), json)
        }
        Command::Table { algo, ring, tuples } => cmd_table(&algo, &ring, &tuples),
        Command::EvalLcpdl { table, pos, formula, algo } => cmd_eval(&table, &pos, &formula, algo.as_deref()),
        Command::Corpus { out } => cmd_corpus(&out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
