//! Planners that output one fixed path per agent, chosen so the paths stay
//! deadlock-free under any activation order.
//!
//! Both planners route agents around other agents' goals and use the
//! fragment tables to steer clear of potential cyclic deadlocks; they
//! differ in how they recover when that is not directly possible.
//! Prioritized planning commits to paths one agent at a time and fails
//! fast (optionally retrying under shuffled priorities); the branching
//! planner keeps a frontier of joint plans and splits on each detected
//! cycle, which makes its failures certificates: no assignment of simple
//! paths avoiding foreign goals is deadlock-free.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fragment::{detect, FragmentTables};
use crate::graph::{
    shortest_path, shortest_path_ranked, EdgeConstraintSet, FileParseError, Graph, Path,
    Vertex,
};
use crate::instance::Instance;

pub type Solution = Vec<Path>;

/// Solution file: `otimapp-sol v1 n=<count>` then `i: v0,v1,...` per agent.
pub fn write_solution(paths: &[Path]) -> String {
    let mut out = format!("otimapp-sol v1 n={}\n", paths.len());
    for (i, p) in paths.iter().enumerate() {
        let row: Vec<String> = p.iter().map(ToString::to_string).collect();
        writeln!(out, "{i}: {}", row.join(",")).unwrap();
    }
    out
}

pub fn parse_solution(text: &str) -> Result<Solution, FileParseError> {
    let malformed = |line: usize, what: String| FileParseError::Malformed { line, what };
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r'));
    let header = lines
        .next()
        .ok_or_else(|| malformed(1, "empty file".to_string()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "otimapp-sol" || parts[1] != "v1" {
        return Err(malformed(1, "expected `otimapp-sol v1 n=<count>`".to_string()));
    }
    let n: usize = parts[2]
        .strip_prefix("n=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| malformed(1, "bad n= field".to_string()))?;
    let mut paths = Vec::with_capacity(n);
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 2;
        let (label, rest) = line
            .split_once(':')
            .ok_or_else(|| malformed(line_no, "expected `<agent>: v0,v1,...`".to_string()))?;
        let agent: usize = label
            .trim()
            .parse()
            .map_err(|_| malformed(line_no, format!("bad agent label {label:?}")))?;
        if agent != paths.len() {
            return Err(malformed(
                line_no,
                format!("expected agent {}, found {agent}", paths.len()),
            ));
        }
        let mut path = Vec::new();
        for tok in rest.split(',') {
            let v: Vertex = tok
                .trim()
                .parse()
                .map_err(|_| malformed(line_no, format!("bad vertex {tok:?}")))?;
            path.push(v);
        }
        paths.push(path);
    }
    if paths.len() != n {
        return Err(malformed(
            1,
            format!("header says n={n} but found {} paths", paths.len()),
        ));
    }
    Ok(paths)
}

/// Checks a solution against its instance: one path per agent, each a walk
/// from start to goal.
pub fn validate_solution(inst: &Instance, paths: &[Path]) -> Result<(), String> {
    if paths.len() != inst.agent_count() {
        return Err(format!(
            "expected {} paths, found {}",
            inst.agent_count(),
            paths.len()
        ));
    }
    for (i, p) in paths.iter().enumerate() {
        if !inst.graph.is_walk(p) {
            return Err(format!("agent {i}: path is not a walk in the graph"));
        }
        if p[0] != inst.starts[i] {
            return Err(format!(
                "agent {i}: path starts at {} instead of {}",
                p[0], inst.starts[i]
            ));
        }
        if *p.last().unwrap() != inst.goals[i] {
            return Err(format!(
                "agent {i}: path ends at {} instead of {}",
                p.last().unwrap(),
                inst.goals[i]
            ));
        }
    }
    Ok(())
}

/// Number of ordered vertex pairs some agent traverses one way and another
/// agent traverses the opposite way. Head-on traversals are where pairwise
/// blocking starts, so this makes a useful conflict estimate.
pub fn count_head_on(paths: &[Path]) -> usize {
    let edge_sets: Vec<HashSet<(Vertex, Vertex)>> = paths
        .iter()
        .map(|p| p.windows(2).map(|w| (w[0], w[1])).collect())
        .collect();
    let mut count = 0;
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            count += edge_sets[i]
                .iter()
                .filter(|&&(u, v)| edge_sets[j].contains(&(v, u)))
                .count();
        }
    }
    count
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("agent {agent}: no path avoids other goals, committed paths, and cycle-closing edges")]
pub struct PpFailure {
    pub agent: usize,
}

/// Prioritized planning: agents plan in the given priority order, each
/// taking a shortest path that avoids other goals and every edge that
/// would close a cycle with already-committed paths. The single-edge
/// `closes_cycle` test is complete thanks to the tables' concatenation
/// closure, so committed plans never contain a potential cycle of size
/// within the bound. Incomplete: an unlucky order can fail on solvable
/// instances.
pub fn solve_pp(
    inst: &Instance,
    order: &[usize],
    m: Option<usize>,
) -> Result<Solution, PpFailure> {
    solve_pp_impl(inst, order, m, None)
}

/// `solve_pp` with randomized tie-breaking among equal-length paths.
pub fn solve_pp_with_ties(
    inst: &Instance,
    order: &[usize],
    m: Option<usize>,
    rng: &mut ChaCha8Rng,
) -> Result<Solution, PpFailure> {
    solve_pp_impl(inst, order, m, Some(rng))
}

fn solve_pp_impl(
    inst: &Instance,
    order: &[usize],
    m: Option<usize>,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<Solution, PpFailure> {
    let n = inst.agent_count();
    assert_eq!(order.len(), n, "order must be a permutation of the agents");
    debug_assert_eq!(
        order.iter().copied().collect::<HashSet<_>>().len(),
        n,
        "order must be a permutation of the agents"
    );
    let mut tables = FragmentTables::new(m);
    let mut solution: Vec<Path> = vec![Vec::new(); n];
    for &agent in order {
        let mut cons = inst.other_goals(agent);
        for (u, v) in tables.closing_pairs() {
            cons.forbid_edge(u, v);
        }
        let ranks: Option<Vec<u32>> = rng.as_deref_mut().map(|r| {
            let mut ranks: Vec<u32> = (0..inst.graph.vertex_count() as u32).collect();
            ranks.shuffle(r);
            ranks
        });
        let path = shortest_path_ranked(
            &inst.graph,
            inst.starts[agent],
            inst.goals[agent],
            &cons,
            ranks.as_deref(),
        )
        .ok_or(PpFailure { agent })?;
        let witness = tables
            .register_path(&inst.graph, agent, &path)
            .expect("each agent registers once");
        debug_assert!(witness.is_none(), "planned path closed a cycle");
        solution[agent] = path;
    }
    Ok(solution)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestartReport {
    pub solution: Option<Solution>,
    pub attempts: u64,
}

/// Retries prioritized planning under seeded random priority orders until
/// one succeeds or the deadline passes. Always runs at least one attempt.
pub fn solve_pp_restarts(
    inst: &Instance,
    m: Option<usize>,
    seed: u64,
    time_limit: Duration,
) -> RestartReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let deadline = Instant::now() + time_limit;
    let mut order: Vec<usize> = (0..inst.agent_count()).collect();
    let mut attempts = 0;
    loop {
        attempts += 1;
        order.shuffle(&mut rng);
        if let Ok(solution) = solve_pp(inst, &order, m) {
            return RestartReport {
                solution: Some(solution),
                attempts,
            };
        }
        if Instant::now() >= deadline {
            return RestartReport {
                solution: None,
                attempts,
            };
        }
    }
}

pub const CP_DEFAULT_NODE_LIMIT: usize = 100_000;
pub const CP_DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CpOutcome {
    Solved(Solution),
    /// The search space is exhausted: no assignment of simple paths that
    /// avoid foreign goals is free of potential cycles within the bound.
    Failure,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpReport {
    pub outcome: CpOutcome,
    /// High-level nodes popped and checked.
    pub expanded: usize,
    /// High-level nodes created, root included.
    pub generated: usize,
}

/// Branching planner. The root plans each agent in turn by a penalized
/// shortest path: cycle-closing edges (against the root paths planned so
/// far) cost an extra |V|, which minimizes closures first and hops second
/// without making any edge illegal. Each search node re-detects cycles in
/// its joint plan; a found cycle spawns one child per participating agent,
/// forbidding that agent's blocked edge and replanning it from scratch.
/// Constraint sets only grow, so the tree is finite and exhausting it
/// certifies unsolvability (over simple paths avoiding foreign goals).
pub fn solve_cp(
    inst: &Instance,
    m: Option<usize>,
    time_limit: Duration,
    node_limit: usize,
) -> CpReport {
    let n = inst.agent_count();
    let deadline = Instant::now() + time_limit;

    let mut root_tables = FragmentTables::new(m);
    let mut root_paths: Solution = vec![Vec::new(); n];
    for agent in 0..n {
        let cons = inst.other_goals(agent);
        match penalized_shortest_path(
            &inst.graph,
            inst.starts[agent],
            inst.goals[agent],
            &cons,
            &root_tables,
        ) {
            // No path even without constraints: no node can ever hold one.
            None => {
                return CpReport {
                    outcome: CpOutcome::Failure,
                    expanded: 0,
                    generated: 0,
                }
            }
            Some(path) => {
                root_tables
                    .register_path_full(&inst.graph, agent, &path)
                    .expect("each agent registers once");
                root_paths[agent] = path;
            }
        }
    }

    struct Node {
        paths: Solution,
        /// Forbidden directed edges per agent; grows down the tree.
        constraints: Vec<Vec<(Vertex, Vertex)>>,
    }
    let mut nodes = vec![Node {
        paths: root_paths,
        constraints: vec![Vec::new(); n],
    }];
    let mut open: BinaryHeap<Reverse<(usize, u64)>> = BinaryHeap::new();
    let mut by_seq: HashMap<u64, usize> = HashMap::new();
    let root_key = count_head_on(&nodes[0].paths);
    open.push(Reverse((root_key, 0)));
    by_seq.insert(0, 0);
    let mut next_seq = 1u64;
    let mut expanded = 0usize;

    while let Some(Reverse((_, seq))) = open.pop() {
        if Instant::now() >= deadline {
            return CpReport {
                outcome: CpOutcome::Timeout,
                expanded,
                generated: nodes.len(),
            };
        }
        let id = by_seq[&seq];
        expanded += 1;
        let witness = detect(&inst.graph, &nodes[id].paths, m);
        let frag = match witness {
            None => {
                return CpReport {
                    outcome: CpOutcome::Solved(nodes[id].paths.clone()),
                    expanded,
                    generated: nodes.len(),
                }
            }
            Some(f) => f,
        };
        for (x, &agent) in frag.agents.iter().enumerate() {
            let clock = frag.clocks[x];
            let blocked = (
                nodes[id].paths[agent][clock],
                nodes[id].paths[agent][clock + 1],
            );
            let mut constraints = nodes[id].constraints.clone();
            debug_assert!(!constraints[agent].contains(&blocked));
            constraints[agent].push(blocked);
            let mut cons = inst.other_goals(agent);
            for &(u, v) in &constraints[agent] {
                cons.forbid_edge(u, v);
            }
            let replanned = shortest_path(
                &inst.graph,
                inst.starts[agent],
                inst.goals[agent],
                &cons,
            );
            let path = match replanned {
                None => continue, // this branch is a dead end
                Some(p) => p,
            };
            if nodes.len() >= node_limit {
                return CpReport {
                    outcome: CpOutcome::Timeout,
                    expanded,
                    generated: nodes.len(),
                };
            }
            let mut paths = nodes[id].paths.clone();
            paths[agent] = path;
            let key = count_head_on(&paths);
            nodes.push(Node { paths, constraints });
            open.push(Reverse((key, next_seq)));
            by_seq.insert(next_seq, nodes.len() - 1);
            next_seq += 1;
        }
    }
    CpReport {
        outcome: CpOutcome::Failure,
        expanded,
        generated: nodes.len(),
    }
}

/// Dijkstra where traversing a cycle-closing edge costs `1 + |V|` instead
/// of 1: since simple paths have fewer than |V| hops, the result closes as
/// few cycles as possible and is hop-minimal among those.
fn penalized_shortest_path(
    g: &Graph,
    from: Vertex,
    to: Vertex,
    cons: &EdgeConstraintSet,
    tables: &FragmentTables,
) -> Option<Path> {
    if from == to {
        return Some(vec![from]);
    }
    if cons.vertex_forbidden(to) {
        return None;
    }
    let big = g.vertex_count() as u64;
    let n = g.vertex_count();
    let mut dist: Vec<u64> = vec![u64::MAX; n];
    let mut parent: Vec<usize> = vec![usize::MAX; n];
    let mut heap: BinaryHeap<Reverse<(u64, Vertex)>> = BinaryHeap::new();
    dist[from] = 0;
    heap.push(Reverse((0, from)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if u == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &v in g.neighbors(u) {
            if cons.vertex_forbidden(v) || cons.edge_forbidden(u, v) {
                continue;
            }
            let step = 1 + if tables.closes_cycle(u, v) { big } else { 0 };
            let nd = d + step;
            if nd < dist[v] {
                dist[v] = nd;
                parent[v] = u;
                heap.push(Reverse((nd, v)));
            }
        }
    }
    None
}
