//! Reference implementations for cross-checking the library. Everything
//! here is deliberately brute-force and shares no code with the main
//! algorithms: cycles are found by enumerating chains, satisfiability by
//! truth tables, distances by a locally written search.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use otimapp::instance::Formula3Sat;
use otimapp::{Graph, Path, Vertex};

/// Every potential cyclic deadlock among `paths` with at most `max_agents`
/// participants (all of them when `None`), as (agents, clocks) pairs
/// rotated so the smallest agent id leads. Exhaustive search over waiting
/// chains: each link's next vertex must be the following link's position,
/// and the last link must point back at the first position.
pub fn enumerate_cycles(
    paths: &[Path],
    max_agents: Option<usize>,
) -> BTreeSet<(Vec<usize>, Vec<usize>)> {
    let n = paths.len();
    let cap = max_agents.unwrap_or(n).min(n);
    let mut found = BTreeSet::new();
    if cap < 2 {
        return found;
    }
    fn grow(
        paths: &[Path],
        chain: &mut Vec<(usize, usize)>,
        cap: usize,
        found: &mut BTreeSet<(Vec<usize>, Vec<usize>)>,
    ) {
        let (a0, c0) = chain[0];
        let (al, cl) = *chain.last().unwrap();
        let next_v = paths[al][cl + 1];
        if chain.len() >= 2 && next_v == paths[a0][c0] {
            found.insert((
                chain.iter().map(|&(a, _)| a).collect(),
                chain.iter().map(|&(_, c)| c).collect(),
            ));
        }
        if chain.len() == cap {
            return;
        }
        for a in (a0 + 1)..paths.len() {
            if chain.iter().any(|&(b, _)| b == a) {
                continue;
            }
            for c in 0..paths[a].len().saturating_sub(1) {
                if paths[a][c] == next_v {
                    chain.push((a, c));
                    grow(paths, chain, cap, found);
                    chain.pop();
                }
            }
        }
    }
    // Canonical rotation has the smallest agent first, so chains only ever
    // extend with larger agent ids.
    for a0 in 0..n {
        for c0 in 0..paths[a0].len().saturating_sub(1) {
            let mut chain = vec![(a0, c0)];
            grow(paths, &mut chain, cap, &mut found);
        }
    }
    found
}

pub fn has_cycle(paths: &[Path], max_agents: Option<usize>) -> bool {
    !enumerate_cycles(paths, max_agents).is_empty()
}

/// All simple paths from `from` to `to`, by depth-first search.
pub fn all_simple_paths(g: &Graph, from: Vertex, to: Vertex) -> Vec<Path> {
    let mut out = Vec::new();
    let mut trail = vec![from];
    let mut on_trail = vec![false; g.vertex_count()];
    on_trail[from] = true;
    fn dfs(
        g: &Graph,
        to: Vertex,
        trail: &mut Vec<Vertex>,
        on_trail: &mut Vec<bool>,
        out: &mut Vec<Path>,
    ) {
        let v = *trail.last().unwrap();
        if v == to {
            out.push(trail.clone());
            return;
        }
        for &w in g.neighbors(v) {
            if !on_trail[w] {
                on_trail[w] = true;
                trail.push(w);
                dfs(g, to, trail, on_trail, out);
                trail.pop();
                on_trail[w] = false;
            }
        }
    }
    dfs(g, to, &mut trail, &mut on_trail, &mut out);
    out
}

/// Truth-table satisfiability.
pub fn truth_table_sat(f: &Formula3Sat) -> bool {
    (0..1u32 << f.vars).any(|mask| {
        let assignment: Vec<bool> = (0..f.vars).map(|i| mask & (1 << i) != 0).collect();
        f.eval(&assignment)
    })
}

/// Hop count of a shortest path honoring forbidden vertices and directed
/// edges, written as a plain queue search so it can referee the library's
/// constrained search. The source vertex itself is always admissible.
pub fn ref_distance(
    g: &Graph,
    from: Vertex,
    to: Vertex,
    forbidden_vertices: &HashSet<Vertex>,
    forbidden_edges: &HashSet<(Vertex, Vertex)>,
) -> Option<usize> {
    if from != to && forbidden_vertices.contains(&to) {
        return None;
    }
    let mut dist = vec![None; g.vertex_count()];
    dist[from] = Some(0);
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            return dist[v];
        }
        for &w in g.neighbors(v) {
            if dist[w].is_none()
                && !forbidden_vertices.contains(&w)
                && !forbidden_edges.contains(&(v, w))
            {
                dist[w] = Some(dist[v].unwrap() + 1);
                queue.push_back(w);
            }
        }
    }
    None
}

/// Every clock configuration reachable from all-zeros under the activation
/// semantics, up to `budget` configurations. Plain breadth-first walk used
/// to referee reachability claims.
pub fn reachable_clock_sets(paths: &[Path], budget: usize) -> HashSet<Vec<usize>> {
    let n = paths.len();
    let start = vec![0usize; n];
    let mut seen: HashSet<Vec<usize>> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(clocks) = queue.pop_front() {
        let occupied: HashSet<Vertex> =
            (0..n).map(|i| paths[i][clocks[i]]).collect();
        for i in 0..n {
            if clocks[i] + 1 < paths[i].len() && !occupied.contains(&paths[i][clocks[i] + 1]) {
                let mut child = clocks.clone();
                child[i] += 1;
                if seen.len() < budget && seen.insert(child.clone()) {
                    queue.push_back(child);
                }
            }
        }
    }
    seen
}

/// Random undirected graph plus random walks over it: the fuzz input for
/// detector/oracle agreement. Sizes stay small enough for the brute-force
/// referees. Starts are distinct; walks may otherwise wander freely.
pub fn random_solution(rng: &mut ChaCha8Rng) -> (Graph, Vec<Path>) {
    loop {
        let v = rng.gen_range(3..=12);
        let mut edges = Vec::new();
        for a in 0..v {
            for b in (a + 1)..v {
                if rng.gen_bool(0.35) {
                    edges.push((a, b));
                }
            }
        }
        let g = Graph::build(v, &edges, false).unwrap();
        let agents = rng.gen_range(2..=4.min(v));
        let mut starts: Vec<Vertex> = (0..v).collect();
        starts.shuffle(rng);
        starts.truncate(agents);
        let paths: Vec<Path> = starts
            .iter()
            .map(|&s| {
                let mut p = vec![s];
                let hops = rng.gen_range(0..=6);
                for _ in 0..hops {
                    let nb = g.neighbors(*p.last().unwrap());
                    if nb.is_empty() {
                        break;
                    }
                    p.push(nb[rng.gen_range(0..nb.len())]);
                }
                p
            })
            .collect();
        if paths.iter().any(|p| p.len() > 1) {
            return (g, paths);
        }
    }
}

/// Fully open grid graph, 4-connected.
pub fn open_grid(height: usize, width: usize) -> Graph {
    let row = ".".repeat(width);
    let mut text = format!("type octile\nheight {height}\nwidth {width}\nmap\n");
    for _ in 0..height {
        text.push_str(&row);
        text.push('\n');
    }
    otimapp::graph::parse_grid_map(&text).unwrap()
}
