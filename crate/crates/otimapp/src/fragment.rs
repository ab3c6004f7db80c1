//! Fragments: chains of agents that can block one another, and the tables
//! that grow them path by path until a chain bites its own tail.
//!
//! A fragment `<agents | clocks>` records, link by link, agents parked at
//! `paths[agent][clock]` each waiting to enter the position of the next
//! link. Its start is the first link's position; its end is the vertex the
//! last link wants to enter. A fragment whose end equals its start is a
//! potential cyclic deadlock: every agent in it waits on the next, around a
//! ring. Whether such a configuration is actually reachable is a separate
//! question (see `verify::oracle_feasibility`); planners that refuse all
//! potential cycles trade completeness for a cheap static guarantee.
//!
//! Registration keeps the stored set closed under concatenation: each new
//! edge forms every product of the new link with fragments ending at the
//! edge's tail and fragments starting at its head. Closed products are
//! reported, never stored. Because of the closure property, a single
//! lookup `closes_cycle(u, v)` (is there a stored fragment ending at u and
//! starting at v?) is a complete one-edge test, which is what the planners
//! use to steer around cycles.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::graph::{distance_avoiding, Graph, Path, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fragment {
    pub agents: Vec<usize>,
    pub clocks: Vec<usize>,
}

impl Fragment {
    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    /// (start, end) relative to the paths the fragment indexes into.
    pub fn endpoints(&self, paths: &[Path]) -> (Vertex, Vertex) {
        let first = (self.agents[0], self.clocks[0]);
        let last = (*self.agents.last().unwrap(), *self.clocks.last().unwrap());
        (paths[first.0][first.1], paths[last.0][last.1 + 1])
    }

    /// Rotates the ring so the smallest agent id leads. Closed fragments
    /// are rotation-invariant as deadlocks; reporting them in this form
    /// makes witnesses comparable.
    fn canonical_rotation(mut self) -> Fragment {
        let lead = self
            .agents
            .iter()
            .enumerate()
            .min_by_key(|&(_, a)| a)
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.agents.rotate_left(lead);
        self.clocks.rotate_left(lead);
        self
    }
}

/// Replays a fragment against paths: every link must exist, agents must be
/// distinct, consecutive links must chain (each link's next vertex is the
/// following link's position), and the last link must point back at the
/// first position. True only for a genuine potential cyclic deadlock.
pub fn verify_cycle_witness(paths: &[Path], frag: &Fragment) -> bool {
    let k = frag.len();
    if k == 0 || frag.clocks.len() != k {
        return false;
    }
    let mut seen = HashSet::new();
    for x in 0..k {
        let (a, t) = (frag.agents[x], frag.clocks[x]);
        if a >= paths.len() || t + 1 >= paths[a].len() || !seen.insert(a) {
            return false;
        }
        let next = paths[a][t + 1];
        let (na, nt) = (frag.agents[(x + 1) % k], frag.clocks[(x + 1) % k]);
        if next != paths[na][nt] {
            return false;
        }
    }
    true
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegisterError {
    #[error("agent {0} is already registered")]
    DuplicateAgent(usize),
    #[error("agent {0}: path is empty")]
    EmptyPath(usize),
    #[error("agent {0}: path is not a walk in the graph")]
    NotAWalk(usize),
}

struct Stored {
    frag: Fragment,
    start: Vertex,
    end: Vertex,
}

/// Fragment tables under an optional ring-size bound `m`: with
/// `m = Some(k)`, only cycles of at most k agents are reported, and open
/// fragments provably unable to close within k agents are dropped early.
/// `m = None` keeps everything.
pub struct FragmentTables {
    m: Option<usize>,
    frags: Vec<Stored>,
    from: HashMap<Vertex, Vec<u32>>,
    to: HashMap<Vertex, Vec<u32>>,
    closing: HashSet<(Vertex, Vertex)>,
    paths: HashMap<usize, Path>,
}

impl FragmentTables {
    pub fn new(m: Option<usize>) -> Self {
        FragmentTables {
            m,
            frags: Vec::new(),
            from: HashMap::new(),
            to: HashMap::new(),
            closing: HashSet::new(),
            paths: HashMap::new(),
        }
    }

    pub fn bound(&self) -> Option<usize> {
        self.m
    }

    pub fn fragment_count(&self) -> usize {
        self.frags.len()
    }

    pub fn path(&self, agent: usize) -> Option<&Path> {
        self.paths.get(&agent)
    }

    /// Stored fragments starting at `v`, oldest first.
    pub fn fragments_from(&self, v: Vertex) -> Vec<&Fragment> {
        self.from
            .get(&v)
            .map(|ids| ids.iter().map(|&i| &self.frags[i as usize].frag).collect())
            .unwrap_or_default()
    }

    /// Stored fragments ending at `v`, oldest first.
    pub fn fragments_to(&self, v: Vertex) -> Vec<&Fragment> {
        self.to
            .get(&v)
            .map(|ids| ids.iter().map(|&i| &self.frags[i as usize].frag).collect())
            .unwrap_or_default()
    }

    /// Start vertices that have at least one stored fragment, for table
    /// inspection.
    pub fn start_vertices(&self) -> Vec<Vertex> {
        let mut keys: Vec<Vertex> = self
            .from
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(&k, _)| k)
            .collect();
        keys.sort_unstable();
        keys
    }

    /// True iff an agent stepping from `u` to `v` would complete a cycle
    /// with already-registered paths. Thanks to the concatenation closure
    /// of the stored set, this single lookup is a complete test.
    pub fn closes_cycle(&self, u: Vertex, v: Vertex) -> bool {
        self.closing.contains(&(u, v))
    }

    /// Every (u, v) for which `closes_cycle(u, v)` holds.
    pub fn closing_pairs(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.closing.iter().copied()
    }

    /// Registers a path edge by edge. If an edge completes one or more
    /// cycles, the first one found (in scan order) is returned and the
    /// remaining edges are skipped; the interrupted tables remain valid
    /// for inspection but are no longer suitable for further planning.
    pub fn register_path(
        &mut self,
        g: &Graph,
        agent: usize,
        path: &[Vertex],
    ) -> Result<Option<Fragment>, RegisterError> {
        self.register_impl(g, agent, path, true)
    }

    /// Registers every edge of the path even when cycles appear, still
    /// reporting the first witness. Used when later paths must be checked
    /// against the complete table regardless of earlier conflicts.
    pub fn register_path_full(
        &mut self,
        g: &Graph,
        agent: usize,
        path: &[Vertex],
    ) -> Result<Option<Fragment>, RegisterError> {
        self.register_impl(g, agent, path, false)
    }

    fn register_impl(
        &mut self,
        g: &Graph,
        agent: usize,
        path: &[Vertex],
        stop_on_witness: bool,
    ) -> Result<Option<Fragment>, RegisterError> {
        if path.is_empty() {
            return Err(RegisterError::EmptyPath(agent));
        }
        if !g.is_walk(path) {
            return Err(RegisterError::NotAWalk(agent));
        }
        if self.paths.contains_key(&agent) {
            return Err(RegisterError::DuplicateAgent(agent));
        }
        self.paths.insert(agent, path.to_vec());

        // Distances are pruning-only and depend on (end, start, occupied);
        // identical queries recur across products of one pass.
        let mut memo: HashMap<(Vertex, Vertex, Vec<Vertex>), Option<usize>> = HashMap::new();
        let mut witness: Option<Fragment> = None;
        for j in 0..path.len() - 1 {
            let (u, v) = (path[j], path[j + 1]);
            // Snapshots: products of this edge must not feed its own scans.
            let to_snap: Vec<u32> = self.to.get(&u).cloned().unwrap_or_default();
            let from_snap: Vec<u32> = self.from.get(&v).cloned().unwrap_or_default();

            let link = Fragment {
                agents: vec![agent],
                clocks: vec![j],
            };
            self.consider(g, link, u, v, &mut witness, &mut memo);

            for &fi in &to_snap {
                let (mut agents, mut clocks, start) = {
                    let s = &self.frags[fi as usize];
                    if s.frag.agents.contains(&agent) {
                        continue;
                    }
                    (s.frag.agents.clone(), s.frag.clocks.clone(), s.start)
                };
                agents.push(agent);
                clocks.push(j);
                self.consider(g, Fragment { agents, clocks }, start, v, &mut witness, &mut memo);
            }

            for &fi in &from_snap {
                let (tail_agents, tail_clocks, end) = {
                    let s = &self.frags[fi as usize];
                    if s.frag.agents.contains(&agent) {
                        continue;
                    }
                    (s.frag.agents.clone(), s.frag.clocks.clone(), s.end)
                };
                let mut agents = vec![agent];
                agents.extend(tail_agents);
                let mut clocks = vec![j];
                clocks.extend(tail_clocks);
                self.consider(g, Fragment { agents, clocks }, u, end, &mut witness, &mut memo);
            }

            for &ai in &to_snap {
                for &bi in &from_snap {
                    let (agents, clocks, start, end) = {
                        let a = &self.frags[ai as usize];
                        let b = &self.frags[bi as usize];
                        if a.frag.agents.contains(&agent)
                            || b.frag.agents.contains(&agent)
                            || a.frag.agents.iter().any(|x| b.frag.agents.contains(x))
                        {
                            continue;
                        }
                        let mut agents = a.frag.agents.clone();
                        agents.push(agent);
                        agents.extend(&b.frag.agents);
                        let mut clocks = a.frag.clocks.clone();
                        clocks.push(j);
                        clocks.extend(&b.frag.clocks);
                        (agents, clocks, a.start, b.end)
                    };
                    self.consider(g, Fragment { agents, clocks }, start, end, &mut witness, &mut memo);
                }
            }

            if stop_on_witness && witness.is_some() {
                return Ok(witness);
            }
        }
        Ok(witness)
    }

    /// Routes one candidate product: report it if closed, store it unless
    /// the bound proves it can never close small enough.
    fn consider(
        &mut self,
        g: &Graph,
        frag: Fragment,
        start: Vertex,
        end: Vertex,
        witness: &mut Option<Fragment>,
        memo: &mut HashMap<(Vertex, Vertex, Vec<Vertex>), Option<usize>>,
    ) {
        if start == end {
            let within = self.m.map_or(true, |m| frag.len() <= m);
            if within && witness.is_none() {
                debug_assert!({
                    let paths: Vec<Path> = (0..=*frag.agents.iter().max().unwrap())
                        .map(|a| self.paths.get(&a).cloned().unwrap_or_default())
                        .collect();
                    verify_cycle_witness(&paths, &frag)
                });
                *witness = Some(frag.canonical_rotation());
            }
            return;
        }
        if let Some(m) = self.m {
            if frag.len() >= m {
                return;
            }
            let mut occupied: Vec<Vertex> = frag
                .agents
                .iter()
                .zip(&frag.clocks)
                .map(|(&a, &t)| self.paths[&a][t])
                .collect();
            occupied.sort_unstable();
            occupied.dedup();
            let key = (end, start, occupied);
            let dist = *memo.entry(key.clone()).or_insert_with(|| {
                let avoid: HashSet<Vertex> = key.2.iter().copied().collect();
                distance_avoiding(g, end, start, &avoid)
            });
            match dist {
                None => return,
                Some(d) if frag.len() + d > m => return,
                _ => {}
            }
        }
        let idx = self.frags.len() as u32;
        self.from.entry(start).or_default().push(idx);
        self.to.entry(end).or_default().push(idx);
        self.closing.insert((end, start));
        self.frags.push(Stored { frag, start, end });
    }
}

/// One-shot detection: registers the paths in order into fresh tables and
/// returns the first potential cyclic deadlock of at most `m` agents
/// (any size when `m` is `None`). Panics on malformed input.
pub fn detect(g: &Graph, paths: &[Path], m: Option<usize>) -> Option<Fragment> {
    let mut tables = FragmentTables::new(m);
    for (i, p) in paths.iter().enumerate() {
        let found = tables
            .register_path(g, i, p)
            .expect("paths must be non-empty walks with one entry per agent");
        if found.is_some() {
            return found;
        }
    }
    None
}
