//! Execution under per-agent delay probabilities, and the baselines it is
//! measured against.
//!
//! The model runs in discrete timesteps. An agent is either contracted
//! (standing on one vertex) or extended (mid-move, occupying both its
//! vertex and its target). Each timestep has two phases: first every
//! extended agent completes its move with probability `1 - p_i`, then
//! contracted agents whose next vertex is unoccupied start moving, chosen
//! one at a time uniformly at random. Plans that stay deadlock-free under
//! any activation order need no coordination here; time-stamped plans are
//! executed through a minimal-communication policy that pins, per vertex,
//! the order in which agents may visit it.

use std::collections::{HashMap, HashSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, Path, Vertex};
use crate::instance::Instance;

#[derive(Debug, Clone, PartialEq)]
pub struct DelayProfile {
    /// Per-agent probability that an in-flight move fails to complete in a
    /// given timestep.
    pub p: Vec<f64>,
}

impl DelayProfile {
    pub fn zero(n: usize) -> Self {
        DelayProfile { p: vec![0.0; n] }
    }

    pub fn constant(n: usize, p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p));
        DelayProfile { p: vec![p; n] }
    }

    /// Each agent's delay probability drawn uniformly from [0, pbar].
    pub fn uniform(n: usize, pbar: f64, seed: u64) -> Self {
        assert!((0.0..=1.0).contains(&pbar));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DelayProfile {
            p: (0..n).map(|_| rng.gen::<f64>() * pbar).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpStatus {
    Finished,
    /// No agent is moving and none can start; the run can never finish.
    Stuck,
    StepLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentPose {
    pub at: Vertex,
    /// Occupied second vertex while mid-move.
    pub target: Option<Vertex>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpTrace {
    pub status: DpStatus,
    pub timesteps: usize,
    /// Timestep at which each agent reached its final vertex.
    pub arrivals: Vec<Option<usize>>,
    /// Pose per agent at start and after every timestep.
    pub history: Vec<Vec<AgentPose>>,
}

/// Sum over agents of the arrival timestep; defined only for finished
/// runs, where agents reach their goals and stay.
pub fn sum_of_costs(trace: &DpTrace) -> Option<u64> {
    match trace.status {
        DpStatus::Finished => Some(
            trace
                .arrivals
                .iter()
                .map(|a| a.expect("finished runs have all arrivals") as u64)
                .sum(),
        ),
        _ => None,
    }
}

/// Executes deadlock-tolerant paths under the delay model: agents simply
/// follow their own path whenever the next vertex is free.
pub fn run_with_delays(
    paths: &[Path],
    delays: &DelayProfile,
    seed: u64,
    max_steps: usize,
) -> DpTrace {
    run_two_phase(paths, delays, seed, max_steps, None)
}

/// Per-vertex visit order extracted from a timed plan. An agent may enter
/// a vertex only when it is that vertex's next scheduled visitor, so the
/// execution preserves the plan's orderings exactly even when delays
/// reshuffle the timing.
struct VisitGate {
    /// vertex -> (agent, stop index) in scheduled arrival order.
    schedule: HashMap<Vertex, Vec<(usize, usize)>>,
    cursor: HashMap<Vertex, usize>,
}

impl VisitGate {
    fn allows(&self, agent: usize, stop: usize, v: Vertex) -> bool {
        let c = self.cursor.get(&v).copied().unwrap_or(0);
        self.schedule
            .get(&v)
            .and_then(|s| s.get(c))
            .is_some_and(|&head| head == (agent, stop))
    }

    /// The visit of `v` just departed (its occupant completed a move off
    /// of it); admit the next scheduled visitor.
    fn depart(&mut self, v: Vertex) {
        *self.cursor.entry(v).or_insert(0) += 1;
    }
}

fn run_two_phase(
    routes: &[Path],
    delays: &DelayProfile,
    seed: u64,
    max_steps: usize,
    mut gate: Option<VisitGate>,
) -> DpTrace {
    let n = routes.len();
    assert_eq!(delays.p.len(), n);
    assert!(routes.iter().all(|r| !r.is_empty()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Stop index per agent, plus the move target while extended.
    let mut at: Vec<usize> = vec![0; n];
    let mut extended: Vec<bool> = vec![false; n];
    let mut occupied: HashSet<Vertex> = routes.iter().map(|r| r[0]).collect();
    assert_eq!(occupied.len(), n, "initial vertices must be distinct");
    let mut arrivals: Vec<Option<usize>> = routes
        .iter()
        .map(|r| if r.len() == 1 { Some(0) } else { None })
        .collect();
    let pose = |at: &[usize], extended: &[bool]| -> Vec<AgentPose> {
        (0..n)
            .map(|i| AgentPose {
                at: routes[i][at[i]],
                target: extended[i].then(|| routes[i][at[i] + 1]),
            })
            .collect()
    };
    let mut history = vec![pose(&at, &extended)];
    let mut in_flight = 0usize;
    let mut t = 0usize;
    let status = loop {
        if t == max_steps {
            break DpStatus::StepLimit;
        }
        // Phase one: in-flight moves complete unless delayed.
        for i in 0..n {
            if !extended[i] {
                continue;
            }
            if rng.gen_bool(1.0 - delays.p[i]) {
                let from = routes[i][at[i]];
                occupied.remove(&from);
                if let Some(gate) = gate.as_mut() {
                    gate.depart(from);
                }
                extended[i] = false;
                in_flight -= 1;
                at[i] += 1;
                if at[i] + 1 == routes[i].len() {
                    arrivals[i] = Some(t);
                }
            }
        }
        if arrivals.iter().all(Option::is_some) && in_flight == 0 {
            history.push(pose(&at, &extended));
            break DpStatus::Finished;
        }
        // Phase two: contracted agents start moves one at a time, chosen
        // uniformly among those whose next vertex is free (and, under a
        // gate, whose turn it is). Later picks revalidate since earlier
        // extensions occupy targets.
        let mut candidates: Vec<usize> = (0..n)
            .filter(|&i| {
                !extended[i] && at[i] + 1 < routes[i].len() && {
                    let next = routes[i][at[i] + 1];
                    !occupied.contains(&next)
                        && gate
                            .as_ref()
                            .map_or(true, |g| g.allows(i, at[i] + 1, next))
                }
            })
            .collect();
        while !candidates.is_empty() {
            let pick = rng.gen_range(0..candidates.len());
            let i = candidates.swap_remove(pick);
            let next = routes[i][at[i] + 1];
            if occupied.contains(&next) {
                continue;
            }
            occupied.insert(next);
            extended[i] = true;
            in_flight += 1;
        }
        history.push(pose(&at, &extended));
        if in_flight == 0 {
            break DpStatus::Stuck;
        }
        t += 1;
    };
    DpTrace {
        status,
        timesteps: t,
        arrivals,
        history,
    }
}

/// One row of vertices per agent, one entry per timestep; rows end at the
/// goal, where the agent is considered parked forever after.
pub type TimedPlan = Vec<Vec<Vertex>>;

/// Checks timed-plan validity: each row walks or waits along the graph,
/// no vertex is held by two agents at the same timestep, and no vertex is
/// used at consecutive timesteps by different agents (covering swaps and
/// trains).
pub fn validate_timed_plan(g: &Graph, plan: &TimedPlan) -> Result<(), String> {
    for (i, row) in plan.iter().enumerate() {
        if row.is_empty() {
            return Err(format!("agent {i}: empty row"));
        }
        for (t, w) in row.windows(2).enumerate() {
            if w[0] != w[1] && !g.has_edge(w[0], w[1]) {
                return Err(format!(
                    "agent {i}: no edge {} -> {} at timestep {t}",
                    w[0], w[1]
                ));
            }
        }
    }
    let horizon = plan.iter().map(Vec::len).max().unwrap_or(0);
    let cell = |i: usize, t: usize| -> Vertex { plan[i][t.min(plan[i].len() - 1)] };
    for t in 0..horizon {
        let mut seen: HashMap<Vertex, usize> = HashMap::new();
        for i in 0..plan.len() {
            if let Some(j) = seen.insert(cell(i, t), i) {
                return Err(format!(
                    "agents {j} and {i} share vertex {} at timestep {t}",
                    cell(i, t)
                ));
            }
        }
        if t + 1 < horizon {
            for i in 0..plan.len() {
                for j in 0..plan.len() {
                    if i != j && cell(i, t) == cell(j, t + 1) {
                        return Err(format!(
                            "vertex {} used by agent {i} at {t} and agent {j} at {}",
                            cell(i, t),
                            t + 1
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Prioritized time-stamped planning: agents plan space-time shortest
/// paths one at a time under seeded random priority orders, avoiding
/// reserved cells and their one-timestep neighborhoods; up to 100 orders
/// are tried. Returns rows ending at each agent's goal.
pub fn plan_mapf_prioritized(inst: &Instance, seed: u64) -> Option<TimedPlan> {
    const ATTEMPTS: usize = 100;
    let n = inst.agent_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..ATTEMPTS {
        order.shuffle(&mut rng);
        if let Some(plan) = plan_timed_once(inst, &order) {
            debug_assert_eq!(validate_timed_plan(&inst.graph, &plan), Ok(()));
            return Some(plan);
        }
    }
    None
}

fn plan_timed_once(inst: &Instance, order: &[usize]) -> Option<TimedPlan> {
    let g = &inst.graph;
    let n = inst.agent_count();
    let mut rows: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    let mut cells: HashSet<(Vertex, usize)> = HashSet::new();
    let mut settled: HashMap<Vertex, usize> = HashMap::new();
    let mut latest = 0usize;
    for &agent in order {
        let (start, goal) = (inst.starts[agent], inst.goals[agent]);
        let blocked = |v: Vertex, t: usize| -> bool {
            (t > 0 && cells.contains(&(v, t - 1)))
                || cells.contains(&(v, t))
                || cells.contains(&(v, t + 1))
                || settled.get(&v).is_some_and(|&s| t + 1 >= s)
        };
        let last_use = (0..=latest)
            .rev()
            .find(|&t| cells.contains(&(goal, t)));
        let min_arrival = last_use.map_or(0, |t| t + 2);
        let horizon = latest + g.vertex_count() + 2;
        if blocked(start, 0) {
            return None;
        }
        // Space-time BFS; states (vertex, timestep), waiting allowed.
        let mut parent: HashMap<(Vertex, usize), (Vertex, usize)> = HashMap::new();
        let mut queue = std::collections::VecDeque::new();
        parent.insert((start, 0), (start, 0));
        queue.push_back((start, 0));
        let mut found: Option<(Vertex, usize)> = None;
        'search: while let Some((v, t)) = queue.pop_front() {
            if t == horizon {
                continue;
            }
            let stay = std::iter::once(v);
            for w in stay.chain(g.neighbors(v).iter().copied()) {
                let state = (w, t + 1);
                if parent.contains_key(&state) || blocked(w, t + 1) {
                    continue;
                }
                parent.insert(state, (v, t));
                if w == goal && t + 1 >= min_arrival {
                    found = Some(state);
                    break 'search;
                }
                queue.push_back(state);
            }
        }
        // An agent already at its goal still needs the parking slot free.
        if start == goal && min_arrival == 0 {
            found = Some((start, 0));
        }
        let mut state = found?;
        let mut row = vec![state.0];
        while state != (start, 0) {
            state = parent[&state];
            row.push(state.0);
        }
        row.reverse();
        for (t, &v) in row.iter().enumerate() {
            cells.insert((v, t));
        }
        settled.insert(goal, row.len() - 1);
        latest = latest.max(row.len() - 1);
        rows[agent] = row;
    }
    Some(rows)
}

/// Executes a timed plan under delays by enforcing, per vertex, the plan's
/// visit order. Conflict-free plans stay conflict-free at run time because
/// an agent enters a vertex only once every earlier visitor has left.
pub fn run_mcp(
    g: &Graph,
    plan: &TimedPlan,
    delays: &DelayProfile,
    seed: u64,
    max_steps: usize,
) -> DpTrace {
    debug_assert_eq!(validate_timed_plan(g, plan), Ok(()));
    // Compress waits away: the policy tracks stops, not timestamps.
    let routes: Vec<Path> = plan
        .iter()
        .map(|row| {
            let mut r: Path = Vec::with_capacity(row.len());
            for &v in row {
                if r.last() != Some(&v) {
                    r.push(v);
                }
            }
            r
        })
        .collect();
    let mut schedule: HashMap<Vertex, Vec<(usize, usize, usize)>> = HashMap::new();
    for (i, row) in plan.iter().enumerate() {
        let mut stop = 0usize;
        for (t, &v) in row.iter().enumerate() {
            if t == 0 || row[t - 1] != v {
                schedule.entry(v).or_default().push((t, i, stop));
                stop += 1;
            }
        }
    }
    let schedule: HashMap<Vertex, Vec<(usize, usize)>> = schedule
        .into_iter()
        .map(|(v, mut visits)| {
            visits.sort_unstable();
            (v, visits.into_iter().map(|(_, i, k)| (i, k)).collect())
        })
        .collect();
    let gate = VisitGate {
        schedule,
        cursor: HashMap::new(),
    };
    run_two_phase(&routes, delays, seed, max_steps, Some(gate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::instance::Instance;

    fn corridor(n: usize) -> Graph {
        let edges: Vec<(Vertex, Vertex)> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::build(n, &edges, false).unwrap()
    }

    #[test]
    fn zero_delay_cost_is_edge_count() {
        let paths = vec![vec![0, 1, 2, 3]];
        let trace = run_with_delays(&paths, &DelayProfile::zero(1), 9, 1000);
        assert_eq!(trace.status, DpStatus::Finished);
        assert_eq!(trace.arrivals, vec![Some(3)]);
        assert_eq!(sum_of_costs(&trace), Some(3));
        assert_eq!(trace.timesteps, 3);
    }

    #[test]
    fn delays_only_stretch_the_run() {
        let paths = vec![vec![0, 1, 2, 3]];
        let slow = run_with_delays(&paths, &DelayProfile::constant(1, 0.5), 4, 100_000);
        assert_eq!(slow.status, DpStatus::Finished);
        assert!(slow.arrivals[0].unwrap() >= 3);
    }

    #[test]
    fn head_on_paths_go_stuck_immediately() {
        let paths = vec![vec![0, 1], vec![1, 0]];
        let trace = run_with_delays(&paths, &DelayProfile::zero(2), 1, 1000);
        assert_eq!(trace.status, DpStatus::Stuck);
        assert_eq!(trace.timesteps, 0);
        assert_eq!(sum_of_costs(&trace), None);
    }

    #[test]
    fn safe_paths_finish_under_heavy_delays() {
        let f = fixtures::detour();
        for seed in 0..10 {
            let delays = DelayProfile::uniform(2, 0.9, seed);
            let trace = run_with_delays(&f.safe, &delays, seed, 1_000_000);
            assert_eq!(trace.status, DpStatus::Finished);
        }
    }

    #[test]
    fn step_limit_is_reported() {
        let paths = vec![vec![0, 1, 2, 3]];
        let trace = run_with_delays(&paths, &DelayProfile::zero(1), 0, 2);
        assert_eq!(trace.status, DpStatus::StepLimit);
        assert_eq!(trace.timesteps, 2);
    }

    #[test]
    fn history_tracks_extended_footprints() {
        let paths = vec![vec![0, 1]];
        let trace = run_with_delays(&paths, &DelayProfile::zero(1), 0, 10);
        // Initial pose, extended pose after timestep 0, final pose.
        assert_eq!(trace.history.len(), 3);
        assert_eq!(trace.history[1][0].target, Some(1));
        assert_eq!(trace.history[2][0], AgentPose { at: 1, target: None });
    }

    #[test]
    fn timed_plan_validation_catches_conflicts() {
        let g = corridor(3);
        // Vertex collision at t=1.
        let bad = vec![vec![0, 1], vec![2, 1]];
        assert!(validate_timed_plan(&g, &bad).is_err());
        // Follow conflict: 1 is used at t=0 by one and t=1 by the other.
        let follow = vec![vec![1, 2], vec![0, 1]];
        assert!(validate_timed_plan(&g, &follow).is_err());
        let ok = vec![vec![1, 2], vec![0, 0, 1]];
        assert_eq!(validate_timed_plan(&g, &ok), Ok(()));
    }

    #[test]
    fn timed_planner_solves_the_junction() {
        // Fixed paths cannot solve this instance, but timed waits can.
        let inst = fixtures::junction_trap();
        let plan = plan_mapf_prioritized(&inst, 0).expect("timed plan exists");
        assert_eq!(validate_timed_plan(&inst.graph, &plan), Ok(()));
        for (i, row) in plan.iter().enumerate() {
            assert_eq!(row[0], inst.starts[i]);
            assert_eq!(*row.last().unwrap(), inst.goals[i]);
        }
    }

    #[test]
    fn mcp_preserves_plan_orderings_under_delays() {
        let inst = fixtures::junction_trap();
        let plan = plan_mapf_prioritized(&inst, 0).unwrap();
        for seed in 0..20 {
            let delays = DelayProfile::uniform(2, 0.7, seed);
            let trace = run_mcp(&inst.graph, &plan, &delays, seed, 1_000_000);
            assert_eq!(trace.status, DpStatus::Finished);
        }
    }

    #[test]
    fn mcp_zero_delay_matches_plan_arrival_order() {
        let g = corridor(4);
        let inst = Instance::new(g, vec![0, 3], vec![1, 2]).unwrap();
        let plan = plan_mapf_prioritized(&inst, 1).expect("corridor plan");
        let trace = run_mcp(
            &inst.graph,
            &plan,
            &DelayProfile::zero(2),
            3,
            1_000_000,
        );
        assert_eq!(trace.status, DpStatus::Finished);
        for (i, row) in plan.iter().enumerate() {
            assert_eq!(
                trace.arrivals[i].unwrap(),
                row.len() - 1,
                "zero-delay MCP should track the plan's schedule"
            );
        }
    }

    #[test]
    fn delay_profile_is_seed_deterministic() {
        let a = DelayProfile::uniform(5, 0.5, 42);
        let b = DelayProfile::uniform(5, 0.5, 42);
        assert_eq!(a, b);
        assert!(a.p.iter().all(|&p| (0.0..=0.5).contains(&p)));
    }
}
