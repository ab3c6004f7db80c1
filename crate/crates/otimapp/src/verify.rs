//! Execution semantics and feasibility analysis for planned paths.
//!
//! A configuration assigns each agent a clock into its path; the agent
//! stands at `paths[i][clock]`. Activating an agent advances its clock iff
//! it is not finished and the next vertex is vacant; otherwise nothing
//! happens. A solution is feasible when every fair activation sequence
//! terminates, which holds exactly when no reachable configuration
//! contains a stuck agent: clocks never decrease, so the total remaining
//! step count only ever goes down, and from any deadlock-free
//! configuration some agent can always move.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fragment::{detect, Fragment};
use crate::graph::{Path, Vertex};
use crate::instance::Instance;

/// Largest number of distinct configurations the exhaustive checks will
/// touch before giving up.
pub const DEFAULT_STATE_BUDGET: usize = 5_000_000;

pub fn positions(clocks: &[usize], paths: &[Path]) -> Vec<Vertex> {
    clocks.iter().zip(paths).map(|(&t, p)| p[t]).collect()
}

pub fn is_terminated(clocks: &[usize], paths: &[Path]) -> bool {
    clocks
        .iter()
        .zip(paths)
        .all(|(&t, p)| t + 1 == p.len())
}

/// Total steps left across all agents. Strictly decreases on every move
/// and never otherwise; zero exactly at termination.
pub fn total_remaining(clocks: &[usize], paths: &[Path]) -> usize {
    clocks
        .iter()
        .zip(paths)
        .map(|(&t, p)| p.len() - 1 - t)
        .sum()
}

/// One activation: returns the successor clocks and whether agent moved.
pub fn activate(clocks: &[usize], paths: &[Path], agent: usize) -> (Vec<usize>, bool) {
    let mut next = clocks.to_vec();
    if clocks[agent] + 1 < paths[agent].len() {
        let target = paths[agent][clocks[agent] + 1];
        let vacant = !clocks
            .iter()
            .zip(paths)
            .enumerate()
            .any(|(j, (&t, p))| j != agent && p[t] == target);
        if vacant {
            next[agent] += 1;
            return (next, true);
        }
    }
    (next, false)
}

/// Agents that can never move again from this configuration: each waits,
/// directly or through a chain of waiting agents, on a finished agent or
/// into a waiting ring. Since every agent waits on at most one occupant,
/// chains are walked once with memoized verdicts. Positions must be
/// pairwise distinct (true for every reachable configuration).
pub fn stuck_set(clocks: &[usize], paths: &[Path]) -> BTreeSet<usize> {
    let n = paths.len();
    let mut occupant: HashMap<Vertex, usize> = HashMap::with_capacity(n);
    for (i, (&t, p)) in clocks.iter().zip(paths).enumerate() {
        let prev = occupant.insert(p[t], i);
        debug_assert!(prev.is_none(), "two agents share a vertex");
    }
    let finished = |i: usize| clocks[i] + 1 == paths[i].len();
    const UNKNOWN: u8 = 0;
    const ON_CHAIN: u8 = 1;
    const STUCK: u8 = 2;
    const FREE: u8 = 3;
    let mut state = vec![UNKNOWN; n];
    for s in 0..n {
        if state[s] != UNKNOWN || finished(s) {
            continue;
        }
        let mut chain = Vec::new();
        let mut cur = s;
        let verdict = loop {
            state[cur] = ON_CHAIN;
            chain.push(cur);
            match occupant.get(&paths[cur][clocks[cur] + 1]) {
                None => break FREE,
                Some(&b) if finished(b) => break STUCK,
                Some(&b) => match state[b] {
                    UNKNOWN => cur = b,
                    ON_CHAIN => break STUCK, // the chain closed into a ring
                    decided => break decided,
                },
            }
        };
        for &a in &chain {
            state[a] = verdict;
        }
    }
    (0..n).filter(|&i| state[i] == STUCK).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeadlockKind {
    /// Agents waiting on each other around a ring, in waits-on order,
    /// lowest agent first.
    Cyclic { ring: Vec<usize> },
    /// An unfinished agent waiting on an agent parked at its goal.
    Terminal { blocked: usize, occupant: usize },
}

/// Names the deadlock in a configuration with a nonempty stuck set,
/// preferring a waiting ring over a terminal block.
pub fn classify_deadlock(clocks: &[usize], paths: &[Path]) -> Option<DeadlockKind> {
    let n = paths.len();
    let mut occupant: HashMap<Vertex, usize> = HashMap::with_capacity(n);
    for (i, (&t, p)) in clocks.iter().zip(paths).enumerate() {
        occupant.insert(p[t], i);
    }
    let finished = |i: usize| clocks[i] + 1 == paths[i].len();
    let waits_on = |i: usize| -> Option<usize> {
        if finished(i) {
            return None;
        }
        occupant.get(&paths[i][clocks[i] + 1]).copied()
    };
    for s in 0..n {
        if finished(s) {
            continue;
        }
        let mut trail: Vec<usize> = Vec::new();
        let mut seen: HashMap<usize, usize> = HashMap::new();
        let mut cur = s;
        loop {
            if finished(cur) {
                break; // chain ends at a parked agent: terminal, not cyclic
            }
            if let Some(&at) = seen.get(&cur) {
                let mut ring = trail[at..].to_vec();
                let lead = ring
                    .iter()
                    .enumerate()
                    .min_by_key(|&(_, a)| a)
                    .map(|(i, _)| i)
                    .unwrap();
                ring.rotate_left(lead);
                return Some(DeadlockKind::Cyclic { ring });
            }
            seen.insert(cur, trail.len());
            trail.push(cur);
            match waits_on(cur) {
                Some(b) => cur = b,
                None => break, // chain ends at a free move
            }
        }
    }
    for s in 0..n {
        if !finished(s) {
            if let Some(b) = waits_on(s) {
                if finished(b) {
                    return Some(DeadlockKind::Terminal {
                        blocked: s,
                        occupant: b,
                    });
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityVerdict {
    Feasible {
        explored: usize,
    },
    Infeasible {
        kind: DeadlockKind,
        /// Agents to activate, in order, to reach the deadlocked
        /// configuration from the start; shortest such sequence.
        activations: Vec<usize>,
        clocks: Vec<usize>,
        explored: usize,
    },
    BudgetExhausted {
        explored: usize,
    },
}

/// Exhaustive feasibility check: breadth-first search over reachable
/// configurations, reporting the first one (fewest moves from the start)
/// whose stuck set is nonempty. Exact but exponential in the worst case,
/// hence the state budget.
pub fn oracle_feasibility(paths: &[Path], state_budget: usize) -> FeasibilityVerdict {
    let n = paths.len();
    assert!(
        paths.iter().all(|p| !p.is_empty() && p.len() <= u16::MAX as usize),
        "paths must be non-empty and fit 16-bit clocks"
    );
    let start: Box<[u16]> = vec![0u16; n].into_boxed_slice();
    let mut index: HashMap<Box<[u16]>, u32> = HashMap::new();
    index.insert(start.clone(), 0);
    // (parent node, agent moved to get here); the root points at itself.
    let mut links: Vec<(u32, u16)> = vec![(0, 0)];
    let mut queue: VecDeque<(u32, Box<[u16]>)> = VecDeque::new();
    queue.push_back((0, start));
    while let Some((at, key)) = queue.pop_front() {
        let clocks: Vec<usize> = key.iter().map(|&t| t as usize).collect();
        let stuck = stuck_set(&clocks, paths);
        if !stuck.is_empty() {
            let kind = classify_deadlock(&clocks, paths).expect("stuck set is nonempty");
            let mut activations = Vec::new();
            let mut cur = at;
            while cur != 0 {
                let (parent, via) = links[cur as usize];
                activations.push(via as usize);
                cur = parent;
            }
            activations.reverse();
            return FeasibilityVerdict::Infeasible {
                kind,
                activations,
                clocks,
                explored: index.len(),
            };
        }
        let occupied: HashSet<Vertex> = positions(&clocks, paths).into_iter().collect();
        for agent in 0..n {
            if clocks[agent] + 1 >= paths[agent].len() {
                continue;
            }
            if occupied.contains(&paths[agent][clocks[agent] + 1]) {
                continue;
            }
            let mut child = key.clone();
            child[agent] += 1;
            if index.contains_key(&child) {
                continue;
            }
            if index.len() >= state_budget {
                return FeasibilityVerdict::BudgetExhausted {
                    explored: index.len(),
                };
            }
            let id = links.len() as u32;
            index.insert(child.clone(), id);
            links.push((at, agent as u16));
            queue.push_back((id, child));
        }
    }
    FeasibilityVerdict::Feasible {
        explored: index.len(),
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("state budget of {budget} configurations exhausted")]
pub struct BudgetExceeded {
    pub budget: usize,
}

/// Fewest moves in any terminating activation sequence, `None` when no
/// sequence terminates. Clocks never decrease, so when termination is
/// reachable at all this equals the total path length; the search also
/// serves as an independent check of that identity.
pub fn optimal_activation_count(
    paths: &[Path],
    state_budget: usize,
) -> Result<Option<u64>, BudgetExceeded> {
    let n = paths.len();
    assert!(
        paths.iter().all(|p| !p.is_empty() && p.len() <= u16::MAX as usize),
        "paths must be non-empty and fit 16-bit clocks"
    );
    let start: Box<[u16]> = vec![0u16; n].into_boxed_slice();
    if is_terminated(&vec![0; n], paths) {
        return Ok(Some(0));
    }
    let mut depth: HashMap<Box<[u16]>, u64> = HashMap::new();
    depth.insert(start.clone(), 0);
    let mut queue: VecDeque<Box<[u16]>> = VecDeque::new();
    queue.push_back(start);
    while let Some(key) = queue.pop_front() {
        let clocks: Vec<usize> = key.iter().map(|&t| t as usize).collect();
        let d = depth[&key];
        let occupied: HashSet<Vertex> = positions(&clocks, paths).into_iter().collect();
        for agent in 0..n {
            if clocks[agent] + 1 >= paths[agent].len()
                || occupied.contains(&paths[agent][clocks[agent] + 1])
            {
                continue;
            }
            let mut child = key.clone();
            child[agent] += 1;
            if depth.contains_key(&child) {
                continue;
            }
            let child_clocks: Vec<usize> = child.iter().map(|&t| t as usize).collect();
            if is_terminated(&child_clocks, paths) {
                return Ok(Some(d + 1));
            }
            if depth.len() >= state_budget {
                return Err(BudgetExceeded {
                    budget: state_budget,
                });
            }
            depth.insert(child.clone(), d + 1);
            queue.push_back(child);
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecStatus {
    Terminated,
    Stuck,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionReport {
    pub status: ExecStatus,
    /// Activations issued, moving or not.
    pub activations: u64,
    pub moves: u64,
    pub final_clocks: Vec<usize>,
    /// Agents that can never move again; empty unless status is Stuck.
    pub stuck: BTreeSet<usize>,
}

/// Runs one random execution: agents are activated uniformly at random
/// until all finish, a deadlock is reached, or the activation budget runs
/// out. Deterministic per seed.
pub fn simulate_random(paths: &[Path], seed: u64, max_activations: u64) -> ExecutionReport {
    simulate_random_traced(paths, seed, max_activations, |_, _, _, _| {})
}

/// `simulate_random` with a step callback `(step, agent, moved, vertex)`;
/// `vertex` is where the agent stands after the activation.
pub fn simulate_random_traced(
    paths: &[Path],
    seed: u64,
    max_activations: u64,
    mut on_step: impl FnMut(u64, usize, bool, Vertex),
) -> ExecutionReport {
    let n = paths.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clocks = vec![0usize; n];
    let mut occupied: HashSet<Vertex> = paths.iter().map(|p| p[0]).collect();
    assert_eq!(occupied.len(), n, "start vertices must be distinct");
    let mut unfinished = (0..n).filter(|&i| paths[i].len() > 1).count();
    let mut activations = 0u64;
    let mut moves = 0u64;
    let mut status = ExecStatus::Terminated;
    let mut stuck = BTreeSet::new();
    while unfinished > 0 {
        if activations == max_activations {
            status = ExecStatus::BudgetExhausted;
            break;
        }
        let agent = rng.gen_range(0..n);
        activations += 1;
        let at_goal = clocks[agent] + 1 == paths[agent].len();
        let target = if at_goal {
            None
        } else {
            Some(paths[agent][clocks[agent] + 1]).filter(|t| !occupied.contains(t))
        };
        match target {
            Some(t) => {
                occupied.remove(&paths[agent][clocks[agent]]);
                occupied.insert(t);
                clocks[agent] += 1;
                moves += 1;
                if clocks[agent] + 1 == paths[agent].len() {
                    unfinished -= 1;
                }
                on_step(activations, agent, true, t);
            }
            None => {
                on_step(activations, agent, false, paths[agent][clocks[agent]]);
                // Deadlocks only arise from moves, and once present every
                // blocked activation sees them, so checking here is both
                // sufficient and cheap.
                if !at_goal {
                    let s = stuck_set(&clocks, paths);
                    if !s.is_empty() {
                        status = ExecStatus::Stuck;
                        stuck = s;
                        break;
                    }
                }
            }
        }
    }
    ExecutionReport {
        status,
        activations,
        moves,
        final_clocks: clocks,
        stuck,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RelaxedViolation {
    /// `agent` steps on `owner`'s goal at position `clock` in its path.
    ForeignGoal {
        agent: usize,
        owner: usize,
        vertex: Vertex,
        clock: usize,
    },
    PotentialCycle(Fragment),
}

/// Static sufficient conditions for feasibility: no path uses another
/// agent's goal (its own start excepted), and no potential cyclic
/// deadlock exists among the paths. Solutions passing both are feasible;
/// failing either proves nothing, since some feasible solutions violate
/// each condition.
pub fn check_relaxed(
    inst: &Instance,
    paths: &[Path],
    m: Option<usize>,
) -> Result<(), RelaxedViolation> {
    let mut owner: HashMap<Vertex, usize> = HashMap::new();
    for (j, &goal) in inst.goals.iter().enumerate() {
        owner.insert(goal, j);
    }
    for (i, path) in paths.iter().enumerate() {
        for (clock, &v) in path.iter().enumerate().skip(1) {
            if let Some(&j) = owner.get(&v) {
                if j != i {
                    return Err(RelaxedViolation::ForeignGoal {
                        agent: i,
                        owner: j,
                        vertex: v,
                        clock,
                    });
                }
            }
        }
    }
    if let Some(frag) = detect(&inst.graph, paths, m) {
        return Err(RelaxedViolation::PotentialCycle(frag));
    }
    Ok(())
}
