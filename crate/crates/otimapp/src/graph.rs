//! Graph representation, grid-map ingestion, and constrained breadth-first
//! search.
//!
//! Graphs are simple (no self-loops, no duplicate edges) and either directed
//! or undirected; undirected edges appear in both adjacency lists. Vertices
//! are dense indices `0..vertex_count`. Adjacency lists are kept sorted by
//! vertex id, which makes every search deterministic: among equal-length
//! paths, the one discovered first under id-ordered neighbor expansion wins.

use std::collections::HashSet;

use thiserror::Error;

pub type Vertex = usize;
pub type Path = Vec<Vertex>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    directed: bool,
    adj: Vec<Vec<Vertex>>,
    /// (row, col) per vertex when the graph came from a grid map.
    coords: Option<Vec<(usize, usize)>>,
    /// (height, width) of the originating grid map, when any.
    grid: Option<(usize, usize)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("edge endpoint {0} out of range (vertex count {1})")]
    OutOfRange(Vertex, usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FileParseError {
    #[error("line {line}: {what}")]
    Malformed { line: usize, what: String },
}

impl FileParseError {
    fn at(line: usize, what: impl Into<String>) -> Self {
        FileParseError::Malformed {
            line,
            what: what.into(),
        }
    }
}

impl Graph {
    /// Builds a graph from an edge list. Undirected input inserts each edge
    /// in both adjacency lists. Duplicate edges are ignored.
    pub fn build(
        vertex_count: usize,
        edges: &[(Vertex, Vertex)],
        directed: bool,
    ) -> Result<Graph, GraphError> {
        let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); vertex_count];
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(GraphError::OutOfRange(w, vertex_count));
                }
            }
            if !adj[u].contains(&v) {
                adj[u].push(v);
            }
            if !directed && !adj[v].contains(&u) {
                adj[v].push(u);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph {
            directed,
            adj,
            coords: None,
            grid: None,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    /// Out-neighbors of `v`, ordered by vertex id.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Number of arcs for directed graphs, edges for undirected ones.
    pub fn edge_count(&self) -> usize {
        let arcs: usize = self.adj.iter().map(Vec::len).sum();
        if self.directed {
            arcs
        } else {
            arcs / 2
        }
    }

    /// Grid coordinates (row, col) of `v`, when the graph came from a map.
    pub fn coord(&self, v: Vertex) -> Option<(usize, usize)> {
        self.coords.as_ref().map(|c| c[v])
    }

    /// Vertex at grid cell (row, col), when the graph came from a map.
    pub fn vertex_at(&self, row: usize, col: usize) -> Option<Vertex> {
        let coords = self.coords.as_ref()?;
        coords.iter().position(|&c| c == (row, col))
    }

    pub fn grid_size(&self) -> Option<(usize, usize)> {
        self.grid
    }

    /// Checks that `path` is non-empty and follows arcs of the graph.
    pub fn is_walk(&self, path: &[Vertex]) -> bool {
        !path.is_empty()
            && path.iter().all(|&v| v < self.vertex_count())
            && path.windows(2).all(|w| self.has_edge(w[0], w[1]))
    }
}

/// Vertices and directed edges a single-agent search must not use. The
/// search source is always admissible even when listed as forbidden.
#[derive(Debug, Clone, Default)]
pub struct EdgeConstraintSet {
    forbidden_vertices: HashSet<Vertex>,
    forbidden_edges: HashSet<(Vertex, Vertex)>,
}

impl EdgeConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn forbid_vertex(&mut self, v: Vertex) {
        self.forbidden_vertices.insert(v);
    }

    pub fn forbid_edge(&mut self, from: Vertex, to: Vertex) {
        self.forbidden_edges.insert((from, to));
    }

    pub fn vertex_forbidden(&self, v: Vertex) -> bool {
        self.forbidden_vertices.contains(&v)
    }

    pub fn edge_forbidden(&self, from: Vertex, to: Vertex) -> bool {
        self.forbidden_edges.contains(&(from, to))
    }
}

/// Minimum-hop path from `from` to `to` that visits no forbidden vertex
/// (other than the source) and traverses no forbidden directed edge.
/// Ties between equal-length paths go to the id-ordered neighbor expansion.
/// Hop-minimal paths never repeat a vertex, so the result is always simple.
pub fn shortest_path(
    g: &Graph,
    from: Vertex,
    to: Vertex,
    cons: &EdgeConstraintSet,
) -> Option<Path> {
    shortest_path_ranked(g, from, to, cons, None)
}

/// `shortest_path` with an optional tie-break permutation: when `ranks` is
/// given, neighbors are expanded in ascending rank order instead of id
/// order, so a seeded shuffle of ranks draws a random shortest path.
pub fn shortest_path_ranked(
    g: &Graph,
    from: Vertex,
    to: Vertex,
    cons: &EdgeConstraintSet,
    ranks: Option<&[u32]>,
) -> Option<Path> {
    if from == to {
        return Some(vec![from]);
    }
    if cons.vertex_forbidden(to) {
        return None;
    }
    let n = g.vertex_count();
    let mut parent: Vec<usize> = vec![usize::MAX; n];
    parent[from] = from;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(from);
    let mut scratch: Vec<Vertex> = Vec::new();
    while let Some(u) = queue.pop_front() {
        let neighbors: &[Vertex] = match ranks {
            None => g.neighbors(u),
            Some(r) => {
                scratch.clear();
                scratch.extend_from_slice(g.neighbors(u));
                scratch.sort_unstable_by_key(|&v| r[v]);
                &scratch
            }
        };
        for &v in neighbors {
            if parent[v] != usize::MAX
                || cons.vertex_forbidden(v)
                || cons.edge_forbidden(u, v)
            {
                continue;
            }
            parent[v] = u;
            if v == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = parent[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(v);
        }
    }
    None
}

/// Minimum hop count from `from` to `to` using no vertex in `avoid`;
/// endpoints are exempt even if listed. `None` means unreachable.
pub fn distance_avoiding(
    g: &Graph,
    from: Vertex,
    to: Vertex,
    avoid: &HashSet<Vertex>,
) -> Option<usize> {
    if from == to {
        return Some(0);
    }
    let n = g.vertex_count();
    let mut dist: Vec<usize> = vec![usize::MAX; n];
    dist[from] = 0;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(from);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if dist[v] != usize::MAX {
                continue;
            }
            if v != to && avoid.contains(&v) {
                continue;
            }
            dist[v] = dist[u] + 1;
            if v == to {
                return Some(dist[v]);
            }
            queue.push_back(v);
        }
    }
    None
}

/// Hop distances from `from` to every vertex, ignoring constraints.
pub fn bfs_distances(g: &Graph, from: Vertex) -> Vec<Option<usize>> {
    let mut dist: Vec<Option<usize>> = vec![None; g.vertex_count()];
    dist[from] = Some(0);
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(from);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(dist[u].unwrap() + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

const OBSTACLES: [char; 2] = ['@', 'T'];
const PASSABLE: [char; 2] = ['.', 'G'];

/// Parses a grid map: `type octile`, `height <H>`, `width <W>`, `map`, then
/// H rows of exactly W characters from {., G, @, T}. Passable cells ('.'
/// and 'G') become vertices in row-major order with 4-connectivity; '@' and
/// 'T' are obstacles. Maps are read as 4-connected regardless of the header.
pub fn parse_grid_map(text: &str) -> Result<Graph, FileParseError> {
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r'));
    let mut line_no = 0usize;
    let mut next = |expect: &str| -> Result<String, FileParseError> {
        line_no += 1;
        lines
            .next()
            .map(|s| s.to_string())
            .ok_or_else(|| FileParseError::at(line_no, format!("missing {expect}")))
    };

    let header = next("`type` header")?;
    if header != "type octile" {
        return Err(FileParseError::at(1, "expected `type octile`"));
    }
    let height: usize = parse_header_field(&next("`height` header")?, "height", 2)?;
    let width: usize = parse_header_field(&next("`width` header")?, "width", 3)?;
    let map_line = next("`map` header")?;
    if map_line != "map" {
        return Err(FileParseError::at(4, "expected `map`"));
    }

    let mut passable = vec![vec![false; width]; height];
    for row in 0..height {
        let line = next("map row")?;
        let line_no = 5 + row;
        if line.chars().count() != width {
            return Err(FileParseError::at(
                line_no,
                format!("row has {} cells, expected {width}", line.chars().count()),
            ));
        }
        for (col, ch) in line.chars().enumerate() {
            if PASSABLE.contains(&ch) {
                passable[row][col] = true;
            } else if !OBSTACLES.contains(&ch) {
                return Err(FileParseError::at(
                    line_no,
                    format!("unknown cell character {ch:?}"),
                ));
            }
        }
    }

    let mut id = vec![vec![usize::MAX; width]; height];
    let mut coords = Vec::new();
    for row in 0..height {
        for col in 0..width {
            if passable[row][col] {
                id[row][col] = coords.len();
                coords.push((row, col));
            }
        }
    }
    let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); coords.len()];
    for &(row, col) in &coords {
        let u = id[row][col];
        if row + 1 < height && passable[row + 1][col] {
            let v = id[row + 1][col];
            adj[u].push(v);
            adj[v].push(u);
        }
        if col + 1 < width && passable[row][col + 1] {
            let v = id[row][col + 1];
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    Ok(Graph {
        directed: false,
        adj,
        coords: Some(coords),
        grid: Some((height, width)),
    })
}

fn parse_header_field(
    line: &str,
    field: &str,
    line_no: usize,
) -> Result<usize, FileParseError> {
    let rest = line
        .strip_prefix(field)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| FileParseError::at(line_no, format!("expected `{field} <n>`")))?;
    rest.trim()
        .parse()
        .map_err(|_| FileParseError::at(line_no, format!("bad {field} value {rest:?}")))
}

/// Serializes a grid-born graph back to the map format. Obstacle flavor is
/// not preserved ('.' and '@' only); vertex and edge counts round-trip.
pub fn write_grid_map(g: &Graph) -> Option<String> {
    let (height, width) = g.grid?;
    let coords = g.coords.as_ref()?;
    let mut rows = vec![vec!['@'; width]; height];
    for &(r, c) in coords {
        rows[r][c] = '.';
    }
    let mut out = format!("type octile\nheight {height}\nwidth {width}\nmap\n");
    for row in rows {
        out.extend(row);
        out.push('\n');
    }
    Some(out)
}

/// Parses the plain edge-list format used for non-grid graphs:
/// `graph v=<count> directed=<true|false>`, then one `u v` arc per line.
pub fn parse_edge_list(text: &str) -> Result<Graph, FileParseError> {
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r')).enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| FileParseError::at(1, "empty file"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "graph" {
        return Err(FileParseError::at(1, "expected `graph v=<n> directed=<bool>`"));
    }
    let vertex_count: usize = parts[1]
        .strip_prefix("v=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| FileParseError::at(1, "bad v= field"))?;
    let directed: bool = parts[2]
        .strip_prefix("directed=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| FileParseError::at(1, "bad directed= field"))?;
    let mut edges = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let (u, v) = (it.next(), it.next());
        match (u.and_then(|s| s.parse().ok()), v.and_then(|s| s.parse().ok())) {
            (Some(u), Some(v)) if it.next().is_none() => edges.push((u, v)),
            _ => return Err(FileParseError::at(idx + 1, "expected `u v`")),
        }
    }
    Graph::build(vertex_count, &edges, directed)
        .map_err(|e| FileParseError::at(1, e.to_string()))
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!(
        "graph v={} directed={}\n",
        g.vertex_count(),
        g.directed()
    );
    for u in 0..g.vertex_count() {
        for &v in g.neighbors(u) {
            if g.directed() || u < v {
                out.push_str(&format!("{u} {v}\n"));
            }
        }
    }
    out
}
