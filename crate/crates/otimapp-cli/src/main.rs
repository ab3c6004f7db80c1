//! Command-line front end: plan paths for a scenario, check or execute a
//! solution file, sweep benchmark instances, and generate scenarios.
//!
//! Exit codes: `solve` 0 solved / 1 failure certified / 2 deadline or cap
//! hit; `verify` 0 feasible or static pass / 1 infeasible or static fail /
//! 3 unknown (budget exhausted); `exec` 0 terminated / 1 stuck / 3 budget
//! exhausted; any usage problem 64. Witness lines printed by `verify` use
//! 1-based agent indices; the `exec` log uses 0-based solution row indices.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use otimapp::graph::{parse_edge_list, parse_grid_map, write_edge_list};
use otimapp::instance::{
    generate_random, import_movingai_scen, parse_scenario, reduce_3sat, write_scenario,
    Formula3Sat,
};
use otimapp::mapfdp::{
    plan_mapf_prioritized, run_mcp, run_with_delays, sum_of_costs, DelayProfile, DpStatus, DpTrace,
};
use otimapp::solver::{
    parse_solution, solve_cp, solve_pp, solve_pp_restarts, solve_pp_with_ties, validate_solution,
    write_solution, CpOutcome, CP_DEFAULT_NODE_LIMIT,
};
use otimapp::verify::{
    check_relaxed, oracle_feasibility, simulate_random_traced, DeadlockKind, ExecStatus,
    FeasibilityVerdict, RelaxedViolation, DEFAULT_STATE_BUDGET,
};
use otimapp::{Graph, Instance, Solution, Vertex};

#[derive(Parser)]
#[command(
    name = "otimapp",
    version,
    about = "Plan, check, and execute time-independent multi-agent paths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan paths for a scenario and write them to a solution file.
    Solve(SolveArgs),
    /// Check a solution file statically and, optionally, exhaustively.
    Verify(VerifyArgs),
    /// Run one random execution of a solution file, logging every step.
    Exec(ExecArgs),
    /// Sweep seeded instances and emit one CSV row per run.
    Bench(BenchArgs),
    /// Generate scenario files (random instances or 3-SAT reductions).
    Gen(GenArgs),
}

/// Cycle-size bound: a number of at least 2, or `inf` for unbounded.
#[derive(Clone, Copy, Debug)]
struct Bound(Option<usize>);

impl FromStr for Bound {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "inf" {
            return Ok(Bound(None));
        }
        let k: usize = s
            .parse()
            .map_err(|_| "expected a positive integer or `inf`".to_string())?;
        if k < 2 {
            return Err("a cycle needs at least 2 agents".to_string());
        }
        Ok(Bound(Some(k)))
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(k) => write!(f, "{k}"),
            None => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SolverKind {
    Pp,
    Cp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TieBreak {
    /// Deterministic: breadth-first search with vertex-id neighbor order.
    Adjacency,
    /// Random among hop-minimal paths, driven by --seed.
    Seeded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PolicyKind {
    /// Plan delay-tolerant paths, execute them asynchronously.
    Pp,
    /// Plan a timed MAPF plan, execute it preserving per-vertex order.
    Mcp,
}

#[derive(Args)]
struct SolveArgs {
    /// Map file (grid or edge list); defaults to the scenario's map= field.
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long)]
    scen: PathBuf,
    #[arg(long, value_enum, default_value_t = SolverKind::Pp)]
    solver: SolverKind,
    /// Cycle-size bound: a number or `inf`.
    #[arg(long, default_value = "inf")]
    m: Bound,
    /// Time limit in seconds.
    #[arg(long, default_value_t = 30.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed 1-based priority order for pp, e.g. `2,1`; omit to retry
    /// shuffled orders until the deadline.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<usize>>,
    /// Shortest-path tie-breaking for pp.
    #[arg(long, value_enum, default_value_t = TieBreak::Adjacency)]
    tie_break: TieBreak,
    /// Node expansion cap for cp.
    #[arg(long, default_value_t = CP_DEFAULT_NODE_LIMIT)]
    node_limit: usize,
    /// Solution output path; defaults to the scenario path with `.sol`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Map file; defaults to the scenario's map= field.
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long)]
    scen: PathBuf,
    /// Solution file to check.
    #[arg(long)]
    sol: PathBuf,
    /// Cycle-size bound for the static check.
    #[arg(long, default_value = "inf")]
    m: Bound,
    /// Also run the exhaustive feasibility check; its verdict then decides
    /// the exit code.
    #[arg(long)]
    oracle: bool,
    /// Visited-configuration cap for the exhaustive check.
    #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
    state_budget: usize,
}

#[derive(Args)]
struct ExecArgs {
    #[arg(long)]
    sol: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Activation budget before giving up.
    #[arg(long, default_value_t = 10_000_000)]
    state_budget: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    map: PathBuf,
    /// Agents per instance.
    #[arg(long)]
    n: usize,
    /// Seeded instances to generate.
    #[arg(long, default_value_t = 10)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "pp")]
    policy: Vec<PolicyKind>,
    /// Cycle-size bound for the pp policy.
    #[arg(long, default_value = "inf")]
    m: Bound,
    /// Per-solve time limit in seconds.
    #[arg(long, default_value_t = 30.0)]
    time_limit: f64,
    /// Execute each solved instance under delays.
    #[arg(long)]
    exec: bool,
    /// Executions per solved instance and delay bound.
    #[arg(long, default_value_t = 10)]
    runs: u64,
    /// Delay-probability upper bounds, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pbar: Vec<f64>,
    /// Timestep cap per execution.
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: usize,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    what: GenCommand,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Sample distinct starts and goals on a map.
    Random {
        #[arg(long)]
        map: PathBuf,
        /// Number of agents.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scenario output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce a DIMACS 3-CNF formula to a map and scenario.
    Sat {
        /// DIMACS CNF input.
        #[arg(long)]
        formula: PathBuf,
        #[arg(long)]
        out_map: PathBuf,
        #[arg(long)]
        out_scen: PathBuf,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Exec(a) => cmd_exec(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(64);
        }
    }
}

/// Reads a map file, sniffing the format from its first token: `graph`
/// starts an edge list, anything else is parsed as a grid.
fn load_graph(path: &Path) -> Result<Graph> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let g = if text.trim_start().starts_with("graph") {
        parse_edge_list(&text)
    } else {
        parse_grid_map(&text)
    }
    .with_context(|| format!("parsing {}", path.display()))?;
    Ok(g)
}

fn load_instance(map: Option<&Path>, scen: &Path) -> Result<Instance> {
    let text =
        fs::read_to_string(scen).with_context(|| format!("reading {}", scen.display()))?;
    let (g, pairs) = if text.starts_with("otimapp-scen") {
        let s = parse_scenario(&text).with_context(|| format!("parsing {}", scen.display()))?;
        let map_path = match map {
            Some(p) => p.to_path_buf(),
            None => scen
                .parent()
                .unwrap_or_else(|| Path::new("."))
                .join(&s.map_name),
        };
        (load_graph(&map_path)?, s.pairs)
    } else {
        // MovingAI scenarios carry coordinates, so the grid must come first.
        let map_path = map.ok_or_else(|| anyhow!("--map is required with MovingAI scenarios"))?;
        let g = load_graph(map_path)?;
        let pairs = import_movingai_scen(&text, &g)
            .with_context(|| format!("parsing {}", scen.display()))?;
        (g, pairs)
    };
    let (starts, goals) = pairs.into_iter().unzip();
    Instance::new(g, starts, goals).map_err(|e| anyhow!("invalid scenario: {e}"))
}

fn parse_order(order: &[usize], n: usize) -> Result<Vec<usize>> {
    if order.len() != n {
        bail!("--order must list all {n} agents");
    }
    let mut seen = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for &i in order {
        if i == 0 || i > n || seen[i - 1] {
            bail!("--order must be a permutation of 1..={n}");
        }
        seen[i - 1] = true;
        out.push(i - 1);
    }
    Ok(out)
}

fn paren(items: impl IntoIterator<Item = usize>) -> String {
    let parts: Vec<String> = items.into_iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Witness line with 1-based agent indices.
fn cycle_line(agents: &[usize], clocks: &[usize]) -> String {
    format!(
        "cycle agents={} clocks={}",
        paren(agents.iter().map(|&i| i + 1)),
        paren(clocks.iter().copied())
    )
}

fn cmd_solve(a: SolveArgs) -> Result<i32> {
    let inst = load_instance(a.map.as_deref(), &a.scen)?;
    let limit = Duration::from_secs_f64(a.time_limit);
    let started = Instant::now();
    let (solved, code): (Option<Solution>, i32) = match a.solver {
        SolverKind::Pp => {
            if let Some(order) = &a.order {
                let order = parse_order(order, inst.agent_count())?;
                let result = match a.tie_break {
                    TieBreak::Adjacency => solve_pp(&inst, &order, a.m.0),
                    TieBreak::Seeded => {
                        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
                        solve_pp_with_ties(&inst, &order, a.m.0, &mut rng)
                    }
                };
                match result {
                    Ok(paths) => (Some(paths), 0),
                    Err(f) => {
                        eprintln!(
                            "agent {} has no admissible path under this order",
                            f.agent + 1
                        );
                        (None, 1)
                    }
                }
            } else {
                let report = solve_pp_restarts(&inst, a.m.0, a.seed, limit);
                eprintln!("{} restart attempt(s)", report.attempts);
                match report.solution {
                    Some(paths) => (Some(paths), 0),
                    None => (None, 2),
                }
            }
        }
        SolverKind::Cp => {
            let report = solve_cp(&inst, a.m.0, limit, a.node_limit);
            eprintln!(
                "expanded {} node(s), generated {}",
                report.expanded, report.generated
            );
            match report.outcome {
                CpOutcome::Solved(paths) => (Some(paths), 0),
                CpOutcome::Failure => (None, 1),
                CpOutcome::Timeout => (None, 2),
            }
        }
    };
    match solved {
        Some(paths) => {
            debug_assert_eq!(validate_solution(&inst, &paths), Ok(()));
            let out = a.out.unwrap_or_else(|| a.scen.with_extension("sol"));
            fs::write(&out, write_solution(&paths))
                .with_context(|| format!("writing {}", out.display()))?;
            println!(
                "status=solved out={} elapsed={:.3}s",
                out.display(),
                started.elapsed().as_secs_f64()
            );
        }
        None => println!("status={}", if code == 1 { "failure" } else { "timeout" }),
    }
    Ok(code)
}

fn cmd_verify(a: VerifyArgs) -> Result<i32> {
    let inst = load_instance(a.map.as_deref(), &a.scen)?;
    let text =
        fs::read_to_string(&a.sol).with_context(|| format!("reading {}", a.sol.display()))?;
    let paths =
        parse_solution(&text).with_context(|| format!("parsing {}", a.sol.display()))?;
    validate_solution(&inst, &paths)
        .map_err(|e| anyhow!("solution does not fit the scenario: {e}"))?;

    let static_result = check_relaxed(&inst, &paths, a.m.0);
    match &static_result {
        Ok(()) => println!("static pass"),
        Err(RelaxedViolation::ForeignGoal {
            agent,
            owner,
            vertex,
            clock,
        }) => {
            println!(
                "static fail foreign-goal agent={} owner={} vertex={} clock={}",
                agent + 1,
                owner + 1,
                vertex,
                clock
            );
        }
        Err(RelaxedViolation::PotentialCycle(f)) => {
            println!("static fail");
            println!("{}", cycle_line(&f.agents, &f.clocks));
        }
    }
    if !a.oracle {
        return Ok(if static_result.is_ok() { 0 } else { 1 });
    }

    match oracle_feasibility(&paths, a.state_budget) {
        FeasibilityVerdict::Feasible { explored } => {
            if static_result.is_err() {
                eprintln!("warning: static check failed, yet every execution terminates");
            }
            eprintln!("explored {explored} configuration(s)");
            println!("feasible");
            Ok(0)
        }
        FeasibilityVerdict::Infeasible {
            kind,
            activations,
            clocks,
            explored,
        } => {
            eprintln!("explored {explored} configuration(s)");
            let kind_name = match &kind {
                DeadlockKind::Cyclic { .. } => "cyclic",
                DeadlockKind::Terminal { .. } => "terminal",
            };
            println!(
                "infeasible kind={} witness={}",
                kind_name,
                paren(activations.iter().map(|&i| i + 1))
            );
            match kind {
                DeadlockKind::Cyclic { ring } => {
                    let ring_clocks: Vec<usize> = ring.iter().map(|&i| clocks[i]).collect();
                    println!("{}", cycle_line(&ring, &ring_clocks));
                }
                DeadlockKind::Terminal { blocked, occupant } => {
                    println!("terminal blocked={} occupant={}", blocked + 1, occupant + 1);
                }
            }
            Ok(1)
        }
        FeasibilityVerdict::BudgetExhausted { explored } => {
            eprintln!("explored {explored} configuration(s)");
            println!("unknown budget-exhausted");
            Ok(3)
        }
    }
}

fn cmd_exec(a: ExecArgs) -> Result<i32> {
    let text =
        fs::read_to_string(&a.sol).with_context(|| format!("reading {}", a.sol.display()))?;
    let paths =
        parse_solution(&text).with_context(|| format!("parsing {}", a.sol.display()))?;
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let report = simulate_random_traced(
        &paths,
        a.seed,
        a.state_budget,
        |step, agent, moved, vertex| {
            writeln!(out, "step={step} agent={agent} moved={moved} vertex={vertex}")
                .expect("writing to stdout");
        },
    );
    let outcome = match report.status {
        ExecStatus::Terminated => "terminated",
        ExecStatus::Stuck => "stuck",
        ExecStatus::BudgetExhausted => "budget",
    };
    writeln!(out, "outcome={} activations={}", outcome, report.activations)?;
    out.flush()?;
    if !report.stuck.is_empty() {
        eprintln!(
            "stuck agents: {}",
            paren(report.stuck.iter().copied())
        );
    }
    Ok(match report.status {
        ExecStatus::Terminated => 0,
        ExecStatus::Stuck => 1,
        ExecStatus::BudgetExhausted => 3,
    })
}

struct BenchRow {
    instance: String,
    seed: u64,
    policy: String,
    pbar: Option<f64>,
    n: usize,
    sum_of_costs: Option<u64>,
    timesteps: Option<usize>,
    status: &'static str,
}

/// Aggregates per (policy, pbar): finished runs, total runs, cost sum.
type ExecStats = BTreeMap<(String, String), (u64, u64, u64)>;

#[allow(clippy::too_many_arguments)]
fn exec_rows(
    rows: &mut Vec<BenchRow>,
    stats: &mut ExecStats,
    name: &str,
    policy: &str,
    n: usize,
    inst_seed: u64,
    a: &BenchArgs,
    mut run_one: impl FnMut(&DelayProfile, u64, usize) -> DpTrace,
) {
    for (pi, &pbar) in a.pbar.iter().enumerate() {
        for run in 0..a.runs {
            // Seed stream: disjoint per instance, delay bound, and run.
            let run_seed = inst_seed
                .wrapping_mul(1_000_000)
                .wrapping_add((pi as u64).wrapping_mul(10_000))
                .wrapping_add(run);
            let delays = DelayProfile::uniform(n, pbar, run_seed);
            let trace = run_one(&delays, run_seed ^ 0x5eed, a.max_steps);
            let status = match trace.status {
                DpStatus::Finished => "ok",
                DpStatus::Stuck => "stuck",
                DpStatus::StepLimit => "budget",
            };
            let soc = sum_of_costs(&trace);
            let timesteps = (trace.status == DpStatus::Finished).then_some(trace.timesteps);
            let entry = stats
                .entry((policy.to_string(), format!("{pbar}")))
                .or_insert((0, 0, 0));
            entry.1 += 1;
            if let Some(c) = soc {
                entry.0 += 1;
                entry.2 += c;
            }
            rows.push(BenchRow {
                instance: name.to_string(),
                seed: run_seed,
                policy: policy.to_string(),
                pbar: Some(pbar),
                n,
                sum_of_costs: soc,
                timesteps,
                status,
            });
        }
    }
}

fn solve_row(name: &str, seed: u64, policy: String, n: usize, status: &'static str) -> BenchRow {
    BenchRow {
        instance: name.to_string(),
        seed,
        policy,
        pbar: None,
        n,
        sum_of_costs: None,
        timesteps: None,
        status,
    }
}

fn cmd_bench(a: BenchArgs) -> Result<i32> {
    let g = load_graph(&a.map)?;
    let stem = a
        .map
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "map".to_string());
    let limit = Duration::from_secs_f64(a.time_limit);
    let mut rows: Vec<BenchRow> = Vec::new();
    let mut solved: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut stats: ExecStats = BTreeMap::new();
    if a.n > 0 {
        for idx in 0..a.instances {
            let inst_seed = a.seed.wrapping_add(idx as u64);
            let name = format!("{stem}-{idx:03}");
            let inst = generate_random(&g, a.n, inst_seed)
                .map_err(|e| anyhow!("generating {name}: {e}"))?;
            for &policy in &a.policy {
                match policy {
                    PolicyKind::Pp => {
                        let policy_name = format!("otimapp-pp{}", a.m);
                        let tally = solved.entry(policy_name.clone()).or_insert((0, 0));
                        tally.1 += 1;
                        match solve_pp_restarts(&inst, a.m.0, inst_seed, limit).solution {
                            // Restart planning stops only at the deadline.
                            None => rows.push(solve_row(
                                &name,
                                inst_seed,
                                policy_name,
                                a.n,
                                "timeout",
                            )),
                            Some(paths) => {
                                tally.0 += 1;
                                if a.exec {
                                    exec_rows(
                                        &mut rows,
                                        &mut stats,
                                        &name,
                                        &policy_name,
                                        a.n,
                                        inst_seed,
                                        &a,
                                        |delays, seed, max_steps| {
                                            run_with_delays(&paths, delays, seed, max_steps)
                                        },
                                    );
                                } else {
                                    rows.push(solve_row(
                                        &name,
                                        inst_seed,
                                        policy_name,
                                        a.n,
                                        "ok",
                                    ));
                                }
                            }
                        }
                    }
                    PolicyKind::Mcp => {
                        let tally = solved.entry("mcp".to_string()).or_insert((0, 0));
                        tally.1 += 1;
                        match plan_mapf_prioritized(&inst, inst_seed) {
                            // The timed planner gives up after a fixed
                            // attempt count, not a deadline.
                            None => rows.push(solve_row(
                                &name,
                                inst_seed,
                                "mcp".to_string(),
                                a.n,
                                "unsolved",
                            )),
                            Some(plan) => {
                                tally.0 += 1;
                                if a.exec {
                                    exec_rows(
                                        &mut rows,
                                        &mut stats,
                                        &name,
                                        "mcp",
                                        a.n,
                                        inst_seed,
                                        &a,
                                        |delays, seed, max_steps| {
                                            run_mcp(&inst.graph, &plan, delays, seed, max_steps)
                                        },
                                    );
                                } else {
                                    rows.push(solve_row(
                                        &name,
                                        inst_seed,
                                        "mcp".to_string(),
                                        a.n,
                                        "ok",
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    rows.sort_by(|x, y| {
        (x.instance.as_str(), x.seed, x.policy.as_str(), x.pbar.map(f64::to_bits))
            .cmp(&(y.instance.as_str(), y.seed, y.policy.as_str(), y.pbar.map(f64::to_bits)))
    });
    let writer: Box<dyn io::Write> = match &a.out {
        Some(p) => Box::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        ),
        None => Box::new(io::stdout()),
    };
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "instance",
        "seed",
        "policy",
        "pbar",
        "n",
        "sum_of_costs",
        "timesteps",
        "status",
    ])?;
    for r in &rows {
        w.write_record([
            r.instance.clone(),
            r.seed.to_string(),
            r.policy.clone(),
            r.pbar.map(|p| p.to_string()).unwrap_or_default(),
            r.n.to_string(),
            r.sum_of_costs.map(|v| v.to_string()).unwrap_or_default(),
            r.timesteps.map(|v| v.to_string()).unwrap_or_default(),
            r.status.to_string(),
        ])?;
    }
    w.flush()?;
    for (policy, (s, total)) in &solved {
        eprintln!("policy={policy} solved={s}/{total}");
    }
    for ((policy, pbar), (ok, total, soc)) in &stats {
        let mean = if *ok > 0 {
            format!("{:.1}", *soc as f64 / *ok as f64)
        } else {
            "-".to_string()
        };
        eprintln!("policy={policy} pbar={pbar} ok={ok}/{total} mean_soc={mean}");
    }
    Ok(0)
}

fn cmd_gen(a: GenArgs) -> Result<i32> {
    match a.what {
        GenCommand::Random { map, n, seed, out } => {
            let g = load_graph(&map)?;
            let inst = generate_random(&g, n, seed).map_err(|e| anyhow!("{e}"))?;
            let pairs: Vec<(Vertex, Vertex)> = inst
                .starts
                .iter()
                .copied()
                .zip(inst.goals.iter().copied())
                .collect();
            let map_name = map
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| map.display().to_string());
            let text = write_scenario(&map_name, &pairs);
            match out {
                Some(p) => {
                    fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
                    eprintln!("wrote {}", p.display());
                }
                None => print!("{text}"),
            }
        }
        GenCommand::Sat {
            formula,
            out_map,
            out_scen,
        } => {
            let text = fs::read_to_string(&formula)
                .with_context(|| format!("reading {}", formula.display()))?;
            let f = Formula3Sat::parse_dimacs(&text)
                .with_context(|| format!("parsing {}", formula.display()))?;
            let (inst, _) = reduce_3sat(&f);
            fs::write(&out_map, write_edge_list(&inst.graph))
                .with_context(|| format!("writing {}", out_map.display()))?;
            let map_name = out_map
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| out_map.display().to_string());
            let pairs: Vec<(Vertex, Vertex)> = inst
                .starts
                .iter()
                .copied()
                .zip(inst.goals.iter().copied())
                .collect();
            fs::write(&out_scen, write_scenario(&map_name, &pairs))
                .with_context(|| format!("writing {}", out_scen.display()))?;
            eprintln!(
                "wrote {} and {} ({} vertices, {} agents)",
                out_map.display(),
                out_scen.display(),
                inst.graph.vertex_count(),
                inst.agent_count()
            );
        }
    }
    Ok(0)
}
