//! Problem instances: a graph plus per-agent start and goal vertices.
//!
//! Also home to scenario file I/O, random instance generation, and the
//! 3-SAT reduction that produces instances whose solvability encodes
//! formula satisfiability.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{
    shortest_path, EdgeConstraintSet, FileParseError, Graph, Path, Vertex,
};

#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: Graph,
    pub starts: Vec<Vertex>,
    pub goals: Vec<Vertex>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("agent count mismatch: {starts} starts, {goals} goals")]
    CountMismatch { starts: usize, goals: usize },
    #[error("vertex {0} out of range")]
    OutOfRange(Vertex),
    #[error("agents {0} and {1} share a start vertex")]
    StartCollision(usize, usize),
    #[error("agents {0} and {1} share a goal vertex")]
    GoalCollision(usize, usize),
}

impl Instance {
    /// Starts must be pairwise distinct, and likewise goals; a start of one
    /// agent may coincide with a goal of another.
    pub fn new(
        graph: Graph,
        starts: Vec<Vertex>,
        goals: Vec<Vertex>,
    ) -> Result<Instance, InstanceError> {
        if starts.len() != goals.len() {
            return Err(InstanceError::CountMismatch {
                starts: starts.len(),
                goals: goals.len(),
            });
        }
        for &v in starts.iter().chain(goals.iter()) {
            if v >= graph.vertex_count() {
                return Err(InstanceError::OutOfRange(v));
            }
        }
        for (set, err) in [
            (&starts, InstanceError::StartCollision as fn(usize, usize) -> _),
            (&goals, InstanceError::GoalCollision as fn(usize, usize) -> _),
        ] {
            let mut seen: Vec<Option<usize>> = vec![None; graph.vertex_count()];
            for (i, &v) in set.iter().enumerate() {
                if let Some(j) = seen[v] {
                    return Err(err(j, i));
                }
                seen[v] = Some(i);
            }
        }
        Ok(Instance {
            graph,
            starts,
            goals,
        })
    }

    pub fn agent_count(&self) -> usize {
        self.starts.len()
    }

    /// Constraint set forbidding every goal except agent `i`'s own. The
    /// search source stays admissible even when it is someone's goal.
    pub fn other_goals(&self, i: usize) -> EdgeConstraintSet {
        let mut cons = EdgeConstraintSet::new();
        for (j, &g) in self.goals.iter().enumerate() {
            if j != i {
                cons.forbid_vertex(g);
            }
        }
        cons
    }
}

/// Informational diagnostics: one message per agent that cannot reach its
/// goal while avoiding every other goal. Such instances are well-formed but
/// out of reach for the solvers here, which never route through a foreign
/// goal.
pub fn diagnose(inst: &Instance) -> Vec<String> {
    let mut issues = Vec::new();
    for i in 0..inst.agent_count() {
        let cons = inst.other_goals(i);
        if shortest_path(&inst.graph, inst.starts[i], inst.goals[i], &cons).is_none() {
            issues.push(format!(
                "agent {} has no route from {} to {} that avoids other goals",
                i, inst.starts[i], inst.goals[i]
            ));
        }
    }
    issues
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error("need {requested} agents but the graph has {available} vertices")]
    TooManyAgents { requested: usize, available: usize },
    #[error("gave up after {0} resamples without a valid instance")]
    BudgetExhausted(usize),
}

/// Draws an instance with injective starts and injective goals where every
/// agent can reach its goal while avoiding all other goals. Offending
/// agents are resampled one at a time; the total resample budget is
/// `100 * n`.
pub fn generate_random(
    graph: &Graph,
    n: usize,
    seed: u64,
) -> Result<Instance, GenerateError> {
    let v = graph.vertex_count();
    if n > v {
        return Err(GenerateError::TooManyAgents {
            requested: n,
            available: v,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |used: &HashSet<Vertex>, rng: &mut ChaCha8Rng| -> Vertex {
        loop {
            let c = rng.gen_range(0..v);
            if !used.contains(&c) {
                return c;
            }
        }
    };
    let mut used_starts: HashSet<Vertex> = HashSet::new();
    let mut used_goals: HashSet<Vertex> = HashSet::new();
    let mut starts = Vec::with_capacity(n);
    let mut goals = Vec::with_capacity(n);
    for _ in 0..n {
        let s = draw(&used_starts, &mut rng);
        used_starts.insert(s);
        starts.push(s);
        let g = draw(&used_goals, &mut rng);
        used_goals.insert(g);
        goals.push(g);
    }
    let budget = 100 * n.max(1);
    let reachable = |starts: &[Vertex], goals: &[Vertex], i: usize| -> bool {
        let mut cons = EdgeConstraintSet::new();
        for (j, &g) in goals.iter().enumerate() {
            if j != i {
                cons.forbid_vertex(g);
            }
        }
        shortest_path(graph, starts[i], goals[i], &cons).is_some()
    };
    for spent in 0..=budget {
        match (0..n).find(|&i| !reachable(&starts, &goals, i)) {
            None => {
                let inst = Instance::new(graph.clone(), starts, goals)
                    .expect("sampled injectively");
                return Ok(inst);
            }
            Some(i) if spent < budget => {
                used_starts.remove(&starts[i]);
                used_goals.remove(&goals[i]);
                starts[i] = draw(&used_starts, &mut rng);
                used_starts.insert(starts[i]);
                goals[i] = draw(&used_goals, &mut rng);
                used_goals.insert(goals[i]);
            }
            Some(_) => break,
        }
    }
    Err(GenerateError::BudgetExhausted(budget))
}

/// Scenario file: `otimapp-scen v1 map=<mapfile> n=<count>` followed by one
/// `<start> <goal>` line per agent (vertex ids).
pub fn write_scenario(map_name: &str, pairs: &[(Vertex, Vertex)]) -> String {
    let mut out = format!("otimapp-scen v1 map={} n={}\n", map_name, pairs.len());
    for &(s, g) in pairs {
        writeln!(out, "{s}\t{g}").unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub map_name: String,
    pub pairs: Vec<(Vertex, Vertex)>,
}

pub fn parse_scenario(text: &str) -> Result<Scenario, FileParseError> {
    let malformed = |line: usize, what: &str| FileParseError::Malformed {
        line,
        what: what.to_string(),
    };
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r'));
    let header = lines.next().ok_or_else(|| malformed(1, "empty file"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "otimapp-scen" || parts[1] != "v1" {
        return Err(malformed(1, "expected `otimapp-scen v1 map=<file> n=<count>`"));
    }
    let map_name = parts[2]
        .strip_prefix("map=")
        .ok_or_else(|| malformed(1, "bad map= field"))?
        .to_string();
    let n: usize = parts[3]
        .strip_prefix("n=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| malformed(1, "bad n= field"))?;
    let mut pairs = Vec::with_capacity(n);
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let s = it.next().and_then(|t| t.parse().ok());
        let g = it.next().and_then(|t| t.parse().ok());
        match (s, g) {
            (Some(s), Some(g)) if it.next().is_none() => pairs.push((s, g)),
            _ => return Err(malformed(idx + 2, "expected `<start> <goal>`")),
        }
    }
    if pairs.len() != n {
        return Err(malformed(
            1,
            &format!("header says n={} but found {} pairs", n, pairs.len()),
        ));
    }
    Ok(Scenario { map_name, pairs })
}

/// Imports start/goal pairs from the MovingAI benchmark scenario format
/// (`version 1` header, then tab-separated rows with start x,y and goal
/// x,y in columns 4-7). Requires a grid-born graph for the coordinate
/// lookup; x is the column, y the row.
pub fn import_movingai_scen(
    text: &str,
    g: &Graph,
) -> Result<Vec<(Vertex, Vertex)>, FileParseError> {
    let malformed = |line: usize, what: String| FileParseError::Malformed { line, what };
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if idx == 0 && line.starts_with("version") {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() < 8 {
            return Err(malformed(idx + 1, "expected 8+ columns".to_string()));
        }
        let field = |i: usize| -> Result<usize, FileParseError> {
            cols[i]
                .parse()
                .map_err(|_| malformed(idx + 1, format!("bad integer {:?}", cols[i])))
        };
        let (sx, sy, gx, gy) = (field(4)?, field(5)?, field(6)?, field(7)?);
        let lookup = |row: usize, col: usize| -> Result<Vertex, FileParseError> {
            g.vertex_at(row, col).ok_or_else(|| {
                malformed(idx + 1, format!("cell (x={col}, y={row}) is not passable"))
            })
        };
        pairs.push((lookup(sy, sx)?, lookup(gy, gx)?));
    }
    Ok(pairs)
}

/// A 3-CNF literal; `var` is 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lit {
    pub var: usize,
    pub negated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula3Sat {
    pub vars: usize,
    pub clauses: Vec<[Lit; 3]>,
}

impl Formula3Sat {
    /// DIMACS CNF with exactly three literals per clause, one clause per
    /// line terminated by 0.
    pub fn parse_dimacs(text: &str) -> Result<Formula3Sat, FileParseError> {
        let malformed = |line: usize, what: String| FileParseError::Malformed { line, what };
        let mut vars: Option<usize> = None;
        let mut declared_clauses = 0usize;
        let mut clauses = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let line_no = idx + 1;
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("p cnf") {
                let nums: Vec<&str> = rest.split_whitespace().collect();
                if vars.is_some() || nums.len() != 2 {
                    return Err(malformed(line_no, "bad problem line".to_string()));
                }
                vars = nums[0].parse().ok();
                declared_clauses = nums[1]
                    .parse()
                    .map_err(|_| malformed(line_no, "bad clause count".to_string()))?;
                if vars.is_none() {
                    return Err(malformed(line_no, "bad variable count".to_string()));
                }
                continue;
            }
            let v = vars
                .ok_or_else(|| malformed(line_no, "clause before problem line".to_string()))?;
            let mut lits = Vec::new();
            let mut terminated = false;
            for tok in line.split_whitespace() {
                let l: i64 = tok
                    .parse()
                    .map_err(|_| malformed(line_no, format!("bad literal {tok:?}")))?;
                if l == 0 {
                    terminated = true;
                    break;
                }
                let var = l.unsigned_abs() as usize - 1;
                if var >= v {
                    return Err(malformed(line_no, format!("literal {l} out of range")));
                }
                lits.push(Lit {
                    var,
                    negated: l < 0,
                });
            }
            if !terminated || lits.len() != 3 {
                return Err(malformed(
                    line_no,
                    "expected exactly 3 literals terminated by 0".to_string(),
                ));
            }
            clauses.push([lits[0], lits[1], lits[2]]);
        }
        let vars = vars.ok_or_else(|| malformed(1, "missing problem line".to_string()))?;
        if clauses.len() != declared_clauses {
            return Err(malformed(
                1,
                format!(
                    "problem line declares {declared_clauses} clauses, found {}",
                    clauses.len()
                ),
            ));
        }
        Ok(Formula3Sat { vars, clauses })
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                let sign = if lit.negated { -1 } else { 1 };
                write!(out, "{} ", sign * (lit.var as i64 + 1)).unwrap();
            }
            out.push_str("0\n");
        }
        out
    }

    /// Random formula: each clause picks three distinct variables and
    /// independent signs. Requires `vars >= 3`.
    pub fn random(vars: usize, clauses: usize, seed: u64) -> Formula3Sat {
        assert!(vars >= 3, "need at least 3 variables per clause");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(clauses);
        for _ in 0..clauses {
            let mut pool: Vec<usize> = (0..vars).collect();
            pool.shuffle(&mut rng);
            let clause = [0, 1, 2].map(|k| Lit {
                var: pool[k],
                negated: rng.gen_bool(0.5),
            });
            out.push(clause);
        }
        Formula3Sat {
            vars,
            clauses: out,
        }
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| {
            clause
                .iter()
                .any(|lit| assignment[lit.var] != lit.negated)
        })
    }
}

/// Both admissible routes for every agent of a reduced instance, in agent
/// order: for a variable agent the polarity routes, for a clause agent the
/// decider route (through its variable gadget) and the clause route
/// (through its clause triangle).
#[derive(Debug, Clone)]
pub struct ReductionLayout {
    /// Per variable: [route taken when the variable is false,
    /// route taken when it is true].
    pub variable_routes: Vec<[Path; 2]>,
    /// Per clause, per literal slot: [decider route, clause route].
    pub clause_routes: Vec<Vec<[Path; 2]>>,
}

/// Builds an instance that is solvable iff the formula is satisfiable.
///
/// Each variable gets a directed two-lane gadget: a start and a goal vertex
/// joined by one lane per polarity. The lane for polarity b is a chain of
/// (M, T) vertex pairs, one pair per occurrence of the literal that is
/// false under b, zigzagging start -> M_1 -> T_1 -> ... -> T_p -> goal; a
/// polarity with no occurrences is a single start -> goal arc. The clause
/// agent of such an occurrence starts at a private S with an arc into T and
/// exits M into a private G, so its decider route S -> T -> M -> G weaves
/// against the lane. A variable agent parked mid-lane and a clause agent on
/// the interleaved decider route block each other in a two-cycle, so a
/// clause agent can only take its decider route if the variable agent took
/// the other lane, i.e. if its literal is true.
///
/// Each clause gets a fully-connected directed triangle; slot k enters at
/// triangle vertex k and exits at vertex (k+2) mod 3, giving the clause
/// route S -> Y_k -> Y_(k+2 mod 3) -> G. Any three clause agents inside one
/// triangle deadlock, so at most two may fall back on the triangle and at
/// least one literal per clause must be true.
pub fn reduce_3sat(f: &Formula3Sat) -> (Instance, ReductionLayout) {
    let mut vertex_count = 0usize;
    let mut fresh = || {
        vertex_count += 1;
        vertex_count - 1
    };
    let mut edges: Vec<(Vertex, Vertex)> = Vec::new();

    let var_start: Vec<Vertex> = (0..f.vars).map(|_| fresh()).collect();
    let var_goal: Vec<Vertex> = (0..f.vars).map(|_| fresh()).collect();

    // occurrences[var][polarity]: (clause, slot) pairs whose literal is
    // false when the variable takes that polarity, in clause order.
    let mut occurrences: Vec<[Vec<(usize, usize)>; 2]> =
        vec![[Vec::new(), Vec::new()]; f.vars];
    for (j, clause) in f.clauses.iter().enumerate() {
        for (k, lit) in clause.iter().enumerate() {
            let polarity = usize::from(lit.negated);
            occurrences[lit.var][polarity].push((j, k));
        }
    }

    // Weave stations per clause slot: (M, T) vertex pair on its variable's
    // lane, filled in while laying out the lanes.
    let mut station: Vec<Vec<(Vertex, Vertex)>> = vec![Vec::new(); f.clauses.len()];
    for slots in &mut station {
        slots.resize(3, (usize::MAX, usize::MAX));
    }

    let mut variable_routes: Vec<[Path; 2]> = Vec::with_capacity(f.vars);
    for i in 0..f.vars {
        let mut routes: [Path; 2] = [Vec::new(), Vec::new()];
        for polarity in 0..2 {
            let mut route = vec![var_start[i]];
            let mut prev = var_start[i];
            for &(j, k) in &occurrences[i][polarity] {
                let m = fresh();
                let t = fresh();
                station[j][k] = (m, t);
                edges.push((prev, m));
                edges.push((m, t));
                edges.push((t, m));
                route.push(m);
                route.push(t);
                prev = t;
            }
            edges.push((prev, var_goal[i]));
            route.push(var_goal[i]);
            routes[polarity] = route;
        }
        variable_routes.push(routes);
    }

    let triangle: Vec<[Vertex; 3]> = (0..f.clauses.len())
        .map(|_| [fresh(), fresh(), fresh()])
        .collect();
    for y in &triangle {
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    edges.push((y[a], y[b]));
                }
            }
        }
    }

    let mut starts: Vec<Vertex> = var_start.clone();
    let mut goals: Vec<Vertex> = var_goal.clone();
    let mut clause_routes: Vec<Vec<[Path; 2]>> = Vec::with_capacity(f.clauses.len());
    for (j, _) in f.clauses.iter().enumerate() {
        let mut slots = Vec::with_capacity(3);
        for k in 0..3 {
            let s = fresh();
            let g = fresh();
            let (m, t) = station[j][k];
            edges.push((s, t));
            edges.push((m, g));
            let enter = triangle[j][k];
            let exit = triangle[j][(k + 2) % 3];
            edges.push((s, enter));
            edges.push((exit, g));
            starts.push(s);
            goals.push(g);
            slots.push([vec![s, t, m, g], vec![s, enter, exit, g]]);
        }
        clause_routes.push(slots);
    }

    let graph = Graph::build(vertex_count, &edges, true).expect("gadget edges are valid");
    let inst = Instance::new(graph, starts, goals).expect("gadget endpoints are injective");
    (
        inst,
        ReductionLayout {
            variable_routes,
            clause_routes,
        },
    )
}
