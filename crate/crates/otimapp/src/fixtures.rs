//! Small hand-built scenarios with known planning behavior, shared by unit
//! tests, integration tests, and benchmarks. Each constructor documents the
//! property that makes it interesting; vertex ids are chosen so paths read
//! naturally in the source.

use crate::graph::{Graph, Path};
use crate::instance::Instance;

/// Three paths braided through a six-vertex graph so that registering them
/// one by one grows fragments at several vertices and the third path closes
/// a three-agent cycle. The closure involves every agent, yet no two paths
/// are head-on, so it only appears once chains are concatenated.
pub fn braided_paths() -> (Graph, Vec<Path>) {
    let g = Graph::build(6, &[(0, 1), (1, 2), (1, 3), (3, 4), (5, 3), (3, 0)], false).unwrap();
    let paths = vec![vec![0, 1, 2], vec![1, 3, 4], vec![5, 3, 0]];
    for p in &paths {
        debug_assert!(g.is_walk(p));
    }
    (g, paths)
}

pub struct DetourFixture {
    pub instance: Instance,
    /// Both agents reach their goals under every activation order; the
    /// second agent takes a detour that stays out of the first one's lane.
    pub safe: Vec<Path>,
    /// Same endpoints, but the second agent cuts through the first agent's
    /// lane against its direction, creating a reachable two-agent cycle.
    pub risky: Vec<Path>,
}

/// Two agents whose shortest paths conflict head-on in a corridor, while a
/// slightly longer detour for the second agent is conflict-free.
pub fn detour() -> DetourFixture {
    let g = Graph::build(
        7,
        &[(0, 1), (1, 2), (2, 3), (3, 4), (6, 3), (2, 5), (2, 6)],
        false,
    )
    .unwrap();
    let instance = Instance::new(g, vec![0, 3], vec![4, 5]).unwrap();
    let lane = vec![0, 1, 2, 3, 4];
    let safe = vec![lane.clone(), vec![3, 6, 2, 5]];
    let risky = vec![lane, vec![3, 2, 5]];
    for p in safe.iter().chain(risky.iter()) {
        debug_assert!(instance.graph.is_walk(p));
    }
    DetourFixture {
        instance,
        safe,
        risky,
    }
}

/// Two agents marching the same direction down a path graph. The trailing
/// agent's path runs through the leader's goal, which the static relaxed
/// check refuses, yet every activation order still terminates because the
/// leader only parks after the trailer has passed or the trailer simply
/// waits behind it.
pub fn convoy() -> (Instance, Vec<Path>) {
    let g = Graph::build(4, &[(0, 1), (1, 2), (2, 3)], false).unwrap();
    let inst = Instance::new(g, vec![0, 1], vec![2, 3]).unwrap();
    let paths = vec![vec![0, 1, 2], vec![1, 2, 3]];
    (inst, paths)
}

/// Three paths that admit a potential cyclic deadlock which no execution
/// can actually assemble: the agents would have to pass through each other
/// to take up the deadlock positions. The static check rejects the plan,
/// the exhaustive oracle accepts it.
pub fn latent_cycle() -> (Instance, Vec<Path>) {
    let g = Graph::build(
        8,
        &[
            (0, 1),
            (1, 2),
            (2, 3),
            (1, 4),
            (2, 4),
            (4, 5),
            (4, 6),
            (1, 7),
        ],
        false,
    )
    .unwrap();
    let inst = Instance::new(g, vec![0, 1, 6], vec![5, 3, 7]).unwrap();
    let paths = vec![vec![0, 1, 2, 4, 5], vec![1, 2, 3], vec![6, 4, 1, 7]];
    for p in &paths {
        debug_assert!(inst.graph.is_walk(p));
    }
    (inst, paths)
}

/// A junction where one agent must cross the other's only exit: no fixed
/// pair of paths survives every activation order, though a time-stamped
/// plan with a wait solves it easily.
pub fn junction_trap() -> Instance {
    let g = Graph::build(4, &[(0, 1), (1, 2), (1, 3)], false).unwrap();
    Instance::new(g, vec![0, 2], vec![3, 1]).unwrap()
}

pub struct OrderTrapFixture {
    pub instance: Instance,
    /// Agent 0's only sensible route along the top row.
    pub top_row: Path,
    /// Agent 1's shortest route, cutting through the top row against
    /// agent 0's direction.
    pub direct: Path,
    /// Agent 1's longer route around the bottom row, compatible with the
    /// top row under every activation order.
    pub loop_around: Path,
}

/// An instance where planning order decides success for the greedy
/// prioritized solver: planned first, agent 1 grabs the direct route and
/// strands agent 0; planned second, it is pushed onto the loop.
pub fn order_trap() -> OrderTrapFixture {
    let g = Graph::build(
        8,
        &[
            (0, 1),
            (1, 2),
            (2, 3),
            (1, 4),
            (2, 5),
            (4, 6),
            (5, 7),
            (6, 7),
        ],
        false,
    )
    .unwrap();
    let instance = Instance::new(g, vec![0, 5], vec![3, 4]).unwrap();
    let fixture = OrderTrapFixture {
        instance,
        top_row: vec![0, 1, 2, 3],
        direct: vec![5, 2, 1, 4],
        loop_around: vec![5, 7, 6, 4],
    };
    for p in [&fixture.top_row, &fixture.direct, &fixture.loop_around] {
        debug_assert!(fixture.instance.graph.is_walk(p));
    }
    fixture
}

/// Three paths admitting exactly two potential cyclic deadlocks over the
/// same three agents: one the agents can actually reach from the start
/// configuration and one they cannot. Useful for separating the static
/// detector (which reports both) from the reachability oracle (which
/// convicts only one).
pub fn twin_cycles() -> (Instance, Vec<Path>) {
    let g = Graph::build(
        9,
        &[
            (0, 1),
            (1, 2),
            (2, 3),
            (1, 4),
            (2, 4),
            (4, 5),
            (4, 6),
            (1, 7),
            (2, 8),
        ],
        false,
    )
    .unwrap();
    let inst = Instance::new(g, vec![0, 5, 8], vec![6, 3, 7]).unwrap();
    let paths = vec![
        vec![0, 1, 2, 4, 6],
        vec![5, 4, 1, 2, 3],
        vec![8, 2, 4, 1, 7],
    ];
    for p in &paths {
        debug_assert!(inst.graph.is_walk(p));
    }
    (inst, paths)
}

/// A convoy of `agents` marching the full length of a shared corridor, each
/// with a private approach and exit vertex. All motion is one-way, so no
/// cycle exists, but fragment tables grow combinatorially with the number
/// of overlapping paths: a stress case for registration and for bound
/// pruning.
pub fn corridor_stress(agents: usize, length: usize) -> (Graph, Vec<Path>) {
    assert!(length >= 1 && agents >= 1);
    let mut edges: Vec<(usize, usize)> = (1..length).map(|i| (i - 1, i)).collect();
    for i in 0..agents {
        let start = length + i;
        let goal = length + agents + i;
        edges.push((start, 0));
        edges.push((length - 1, goal));
    }
    let g = Graph::build(length + 2 * agents, &edges, false).unwrap();
    let paths: Vec<Path> = (0..agents)
        .map(|i| {
            let mut p = Vec::with_capacity(length + 2);
            p.push(length + i);
            p.extend(0..length);
            p.push(length + agents + i);
            p
        })
        .collect();
    (g, paths)
}
