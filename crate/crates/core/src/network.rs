//! Finite weighted networks, the standard generators (lattice balls, binary
//! trees, Cartesian products), exhaustions of infinite networks and the wired
//! collapse of a truncation.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::ops::{Deref, DerefMut};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = usize;

/// Label given to the vertex that absorbs everything outside a wired truncation.
pub const WIRED_LABEL: &str = "ω";

/// Largest vertex count for the brute-force expansion constant.
pub const EXACT_EXPANSION_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub conductance: f64,
}

impl Edge {
    pub fn new(u: VertexId, v: VertexId, conductance: f64) -> Self {
        Edge { u, v, conductance }
    }
}

/// A connected, locally finite network with symmetric positive conductances.
///
/// Vertex ids are dense (`0..n`). External identities such as lattice
/// coordinates or tree words live in the optional labels so that the same
/// vertex can be found across truncations of different depth.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n: usize,
    edges: Vec<Edge>,
    origin: VertexId,
    ground: Option<VertexId>,
    labels: Option<Vec<String>>,
    adjacency: Vec<Vec<(VertexId, f64)>>,
}

/// Builds a network on the vertices `0..=max id` of the edge list.
pub fn build_network(edges: Vec<Edge>, origin: VertexId) -> Result<Network> {
    let n = edges
        .iter()
        .map(|e| e.u.max(e.v) + 1)
        .max()
        .ok_or(Error::EmptyEdgeList)?;
    Network::new(n, edges, origin)
}

impl Network {
    pub fn new(n: usize, edges: Vec<Edge>, origin: VertexId) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::EmptyEdgeList);
        }
        if origin >= n {
            return Err(Error::UnknownVertex(origin));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); n];
        for e in &edges {
            if e.u >= n {
                return Err(Error::UnknownVertex(e.u));
            }
            if e.v >= n {
                return Err(Error::UnknownVertex(e.v));
            }
            if e.u == e.v {
                return Err(Error::SelfLoop(e.u));
            }
            if !(e.conductance > 0.0 && e.conductance.is_finite()) {
                return Err(Error::NonpositiveConductance {
                    u: e.u,
                    v: e.v,
                    conductance: e.conductance,
                });
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(Error::DuplicateEdge(e.u, e.v));
            }
            adjacency[e.u].push((e.v, e.conductance));
            adjacency[e.v].push((e.u, e.conductance));
        }
        let net = Network {
            n,
            edges,
            origin,
            ground: None,
            labels: None,
            adjacency,
        };
        let reached = net.reachable_from(origin, |_| true);
        if reached < n {
            return Err(Error::DisconnectedGraph { reached, total: n });
        }
        Ok(net)
    }

    fn reachable_from(&self, start: VertexId, allowed: impl Fn(VertexId) -> bool) -> usize {
        let mut visited = vec![false; self.n];
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &self.adjacency[x] {
                if !visited[y] && allowed(y) {
                    visited[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count
    }

    /// The one-vertex network `P_1`, useful as an identity factor in products.
    pub fn single_vertex() -> Self {
        Network {
            n: 1,
            edges: Vec::new(),
            origin: 0,
            ground: None,
            labels: None,
            adjacency: vec![Vec::new()],
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: labels.len(),
            });
        }
        let distinct: HashSet<&String> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(Error::InvalidParameter("labels must be unique".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_ground(mut self, ground: VertexId) -> Result<Self> {
        self.check_vertex(ground)?;
        self.ground = Some(ground);
        Ok(self)
    }

    pub fn without_ground(mut self) -> Self {
        self.ground = None;
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn origin(&self) -> VertexId {
        self.origin
    }

    pub fn ground(&self) -> Option<VertexId> {
        self.ground
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// The label of `x`, falling back to its decimal id.
    pub fn label(&self, x: VertexId) -> String {
        match &self.labels {
            Some(l) => l[x].clone(),
            None => x.to_string(),
        }
    }

    /// Looks a vertex up by label; unlabelled networks accept decimal ids.
    pub fn vertex_by_label(&self, label: &str) -> Result<VertexId> {
        match &self.labels {
            Some(l) => l
                .iter()
                .position(|s| s == label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string())),
            None => label
                .trim()
                .parse::<VertexId>()
                .ok()
                .filter(|&x| x < self.n)
                .ok_or_else(|| Error::UnknownLabel(label.to_string())),
        }
    }

    pub fn check_vertex(&self, x: VertexId) -> Result<()> {
        if x < self.n {
            Ok(())
        } else {
            Err(Error::UnknownVertex(x))
        }
    }

    pub fn neighbors(&self, x: VertexId) -> &[(VertexId, f64)] {
        &self.adjacency[x]
    }

    /// Conductance of the edge `x ~ y`, or zero when they are not adjacent.
    pub fn conductance(&self, x: VertexId, y: VertexId) -> f64 {
        self.adjacency[x]
            .iter()
            .find(|&&(z, _)| z == y)
            .map_or(0.0, |&(_, c)| c)
    }

    /// Net conductance `c(x)`: the sum of conductances of edges at `x`.
    pub fn net_conductance(&self, x: VertexId) -> Result<f64> {
        self.check_vertex(x)?;
        Ok(self.adjacency[x].iter().map(|&(_, c)| c).sum())
    }

    pub(crate) fn net_conductances(&self) -> Vec<f64> {
        self.adjacency
            .iter()
            .map(|row| row.iter().map(|&(_, c)| c).sum())
            .collect()
    }

    /// Returns a copy with every conductance replaced by `f(edge)`.
    pub fn map_conductances(&self, f: impl Fn(&Edge) -> f64) -> Result<Network> {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge::new(e.u, e.v, f(e)))
            .collect();
        let mut out = Network::new(self.n, edges, self.origin)?;
        out.ground = self.ground;
        out.labels = self.labels.clone();
        Ok(out)
    }

    pub fn to_file(&self) -> NetworkFile {
        NetworkFile {
            vertices: self.n,
            origin: self.origin,
            ground: self.ground,
            edges: self
                .edges
                .iter()
                .map(|e| (e.u, e.v, e.conductance))
                .collect(),
            labels: self.labels.as_ref().map(|l| {
                l.iter()
                    .enumerate()
                    .map(|(i, s)| (i.to_string(), s.clone()))
                    .collect()
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("network serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Network> {
        let file: NetworkFile =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        file.into_network()
    }
}

/// On-disk network schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub vertices: usize,
    pub origin: VertexId,
    pub ground: Option<VertexId>,
    pub edges: Vec<(VertexId, VertexId, f64)>,
    pub labels: Option<BTreeMap<String, String>>,
}

impl NetworkFile {
    pub fn into_network(self) -> Result<Network> {
        let edges = self
            .edges
            .iter()
            .map(|&(u, v, c)| Edge::new(u, v, c))
            .collect();
        let mut net = Network::new(self.vertices, edges, self.origin)?;
        if let Some(map) = self.labels {
            let mut labels = vec![None; self.vertices];
            for (k, v) in map {
                let id: usize = k
                    .parse()
                    .map_err(|_| Error::Format(format!("label key {k:?} is not a vertex id")))?;
                net.check_vertex(id)?;
                labels[id] = Some(v);
            }
            let labels = labels
                .into_iter()
                .enumerate()
                .map(|(i, l)| l.unwrap_or_else(|| i.to_string()))
                .collect();
            net = net.with_labels(labels)?;
        }
        if let Some(g) = self.ground {
            net = net.with_ground(g)?;
        }
        Ok(net)
    }
}

/// A real function on the vertex set, indexed by vertex id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VertexFunction(Vec<f64>);

impl VertexFunction {
    pub fn new(values: Vec<f64>) -> Self {
        VertexFunction(values)
    }

    pub fn zeros(n: usize) -> Self {
        VertexFunction(vec![0.0; n])
    }

    pub fn constant(n: usize, value: f64) -> Self {
        VertexFunction(vec![value; n])
    }

    /// The Dirac mass `δ_x`.
    pub fn delta(n: usize, x: VertexId) -> Self {
        let mut v = vec![0.0; n];
        v[x] = 1.0;
        VertexFunction(v)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn add(&self, other: &VertexFunction) -> VertexFunction {
        VertexFunction(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &VertexFunction) -> VertexFunction {
        VertexFunction(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> VertexFunction {
        VertexFunction(self.0.iter().map(|a| a * s).collect())
    }

    pub fn shifted(&self, s: f64) -> VertexFunction {
        VertexFunction(self.0.iter().map(|a| a + s).collect())
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.0.len() == n {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: n,
                found: self.0.len(),
            })
        }
    }
}

impl Deref for VertexFunction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for VertexFunction {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for VertexFunction {
    fn from(v: Vec<f64>) -> Self {
        VertexFunction(v)
    }
}

/// Unit-conductance path on `n` vertices, origin at vertex 0.
/// Random connected network on `n` vertices: a random recursive tree plus
/// `extra` further random edges, conductances uniform in `[c_min, c_max]`.
pub fn random_connected(n: usize, extra: usize, c_min: f64, c_max: f64, seed: u64) -> Result<Network> {
    if n < 2 || !(c_min > 0.0) || c_max < c_min {
        return Err(Error::InvalidParameter(
            "need n >= 2 and 0 < c_min <= c_max".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut edges = Vec::with_capacity(n - 1 + extra);
    for v in 1..n {
        let u = rng.random_range(0..v);
        seen.insert((u, v));
        edges.push(Edge::new(u, v, rng.random_range(c_min..=c_max)));
    }
    let max_edges = n * (n - 1) / 2;
    let target = (n - 1 + extra).min(max_edges);
    while edges.len() < target {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let key = (a.min(b), a.max(b));
        if a == b || !seen.insert(key) {
            continue;
        }
        edges.push(Edge::new(key.0, key.1, rng.random_range(c_min..=c_max)));
    }
    Network::new(n, edges, 0)
}

pub fn path_graph(n: usize) -> Result<Network> {
    if n < 2 {
        return Err(Error::InvalidParameter("a path needs at least 2 vertices".into()));
    }
    build_network((0..n - 1).map(|i| Edge::new(i, i + 1, 1.0)).collect(), 0)
}

/// Unit-conductance complete graph `K_n`, origin at vertex 0.
pub fn complete_graph(n: usize) -> Result<Network> {
    if n < 2 {
        return Err(Error::InvalidParameter("K_n needs n >= 2".into()));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push(Edge::new(i, j, 1.0));
        }
    }
    build_network(edges, 0)
}

pub fn lattice_label(p: &[i64]) -> String {
    p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

/// Parses a lattice label such as `"1,0,-2"`. The empty string is the origin
/// of `Z^1` only when `dim == 1` would be ambiguous, so it is rejected.
pub fn parse_lattice_point(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|c| {
            c.trim()
                .parse::<i64>()
                .map_err(|_| Error::InvalidParameter(format!("bad lattice point {s:?}")))
        })
        .collect()
}

/// The l1 ball `{x in Z^d : |x|_1 <= k}` with unit nearest-neighbour edges.
///
/// Vertices are numbered shell by shell, so ball `k` occupies a prefix of the
/// ids of ball `k + 1`.
pub fn lattice_ball(dim: usize, radius: usize) -> Result<Network> {
    if dim == 0 || radius == 0 {
        return Err(Error::InvalidParameter("lattice ball needs d >= 1 and k >= 1".into()));
    }
    let mut points = Vec::new();
    let mut current = vec![0i64; dim];
    enumerate_ball(&mut current, 0, radius as i64, &mut points);
    points.sort_by(|a, b| {
        let na: i64 = a.iter().map(|c| c.abs()).sum();
        let nb: i64 = b.iter().map(|c| c.abs()).sum();
        na.cmp(&nb).then_with(|| a.cmp(b))
    });
    let index: HashMap<&[i64], usize> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_slice(), i))
        .collect();
    let mut edges = Vec::new();
    let mut q = vec![0i64; dim];
    for (i, p) in points.iter().enumerate() {
        for axis in 0..dim {
            q.copy_from_slice(p);
            q[axis] += 1;
            if let Some(&j) = index.get(q.as_slice()) {
                edges.push(Edge::new(i, j, 1.0));
            }
        }
    }
    let labels = points.iter().map(|p| lattice_label(p)).collect();
    Network::new(points.len(), edges, 0)?.with_labels(labels)
}

fn enumerate_ball(current: &mut Vec<i64>, axis: usize, budget: i64, out: &mut Vec<Vec<i64>>) {
    if axis == current.len() {
        out.push(current.clone());
        return;
    }
    for c in -budget..=budget {
        current[axis] = c;
        enumerate_ball(current, axis + 1, budget - c.abs(), out);
    }
    current[axis] = 0;
}

/// Binary word of the vertex with heap index `id` (root is the empty word).
pub fn tree_word(mut id: usize) -> String {
    let mut bits = Vec::new();
    while id > 0 {
        bits.push(if id % 2 == 1 { '0' } else { '1' });
        id = (id - 1) / 2;
    }
    bits.iter().rev().collect()
}

/// Heap index of a binary word.
pub fn tree_index(word: &str) -> Result<usize> {
    word.chars().try_fold(0usize, |id, ch| match ch {
        '0' => Ok(2 * id + 1),
        '1' => Ok(2 * id + 2),
        _ => Err(Error::InvalidParameter(format!("bad tree word {word:?}"))),
    })
}

/// The binary tree truncated at words of length `depth`, unit conductances.
pub fn binary_tree(depth: usize) -> Result<Network> {
    if depth == 0 {
        return Err(Error::InvalidParameter("binary tree needs depth >= 1".into()));
    }
    let n = (1usize << (depth + 1)) - 1;
    let edges = (1..n).map(|i| Edge::new((i - 1) / 2, i, 1.0)).collect();
    let labels = (0..n).map(tree_word).collect();
    Network::new(n, edges, 0)?.with_labels(labels)
}

/// Cartesian product network; vertex `(x, y)` has id `x * |b| + y` and label `"lx|ly"`.
pub fn cartesian_product(a: &Network, b: &Network) -> Result<Network> {
    let nb = b.vertex_count();
    let id = |x: usize, y: usize| x * nb + y;
    let mut edges = Vec::with_capacity(a.vertex_count() * b.edges().len() + a.edges().len() * nb);
    for x in 0..a.vertex_count() {
        for e in b.edges() {
            edges.push(Edge::new(id(x, e.u), id(x, e.v), e.conductance));
        }
    }
    for e in a.edges() {
        for y in 0..nb {
            edges.push(Edge::new(id(e.u, y), id(e.v, y), e.conductance));
        }
    }
    let mut labels = Vec::with_capacity(a.vertex_count() * nb);
    for x in 0..a.vertex_count() {
        for y in 0..nb {
            labels.push(format!("{}|{}", a.label(x), b.label(y)));
        }
    }
    Network::new(a.vertex_count() * nb, edges, id(a.origin(), b.origin()))?.with_labels(labels)
}

/// Result of collapsing everything outside a kept vertex set to one vertex.
#[derive(Debug, Clone)]
pub struct WiredCollapse {
    pub network: Network,
    /// Map from host ids to ids in the collapsed network (`None` for absorbed vertices).
    pub old_to_new: Vec<Option<VertexId>>,
    /// Set when nothing lies outside the kept set; the host is returned unchanged
    /// and carries no ground.
    pub boundary_empty: bool,
    /// Total conductance of the cut edges, i.e. `c(ω)`.
    pub cut_conductance: f64,
}

impl WiredCollapse {
    pub fn ground(&self) -> Option<VertexId> {
        self.network.ground()
    }
}

/// Identifies every vertex of `net` outside `keep` with a single ground
/// vertex `ω`, merging parallel edges to `ω` by adding conductances.
pub fn wired_collapse(net: &Network, keep: &[VertexId]) -> Result<WiredCollapse> {
    let n = net.vertex_count();
    let mut kept = vec![false; n];
    for &x in keep {
        net.check_vertex(x)?;
        kept[x] = true;
    }
    if !kept[net.origin()] {
        return Err(Error::OriginOutsideKeep);
    }
    let keep_count = kept.iter().filter(|&&k| k).count();
    let reached = net.reachable_from(net.origin(), |y| kept[y]);
    if reached < keep_count {
        return Err(Error::DisconnectedGraph {
            reached,
            total: keep_count,
        });
    }
    if keep_count == n {
        return Ok(WiredCollapse {
            network: net.clone().without_ground(),
            old_to_new: (0..n).map(Some).collect(),
            boundary_empty: true,
            cut_conductance: 0.0,
        });
    }
    let mut old_to_new = vec![None; n];
    let mut next = 0;
    for (x, slot) in old_to_new.iter_mut().enumerate() {
        if kept[x] {
            *slot = Some(next);
            next += 1;
        }
    }
    let omega = next;
    let mut edges = Vec::new();
    let mut to_omega = vec![0.0; omega];
    for e in net.edges() {
        match (old_to_new[e.u], old_to_new[e.v]) {
            (Some(a), Some(b)) => edges.push(Edge::new(a, b, e.conductance)),
            (Some(a), None) => to_omega[a] += e.conductance,
            (None, Some(b)) => to_omega[b] += e.conductance,
            (None, None) => {}
        }
    }
    let mut cut = 0.0;
    for (x, &c) in to_omega.iter().enumerate() {
        if c > 0.0 {
            edges.push(Edge::new(x, omega, c));
            cut += c;
        }
    }
    let mut labels: Vec<String> = (0..n)
        .filter(|&x| kept[x])
        .map(|x| net.label(x))
        .collect();
    labels.push(WIRED_LABEL.to_string());
    let origin = old_to_new[net.origin()].expect("origin is kept");
    let network = Network::new(omega + 1, edges, origin)?
        .with_labels(labels)?
        .with_ground(omega)?;
    Ok(WiredCollapse {
        network,
        old_to_new,
        boundary_empty: false,
        cut_conductance: cut,
    })
}

/// Exact expansion constant `min |∂S| / |S|` over nonempty proper subsets.
pub fn expansion_constant(net: &Network) -> Result<f64> {
    let n = net.vertex_count();
    if n > EXACT_EXPANSION_CAP {
        return Err(Error::TooLargeForExact {
            n,
            cap: EXACT_EXPANSION_CAP,
        });
    }
    let full = (1u64 << n) - 1;
    let mut best = f64::INFINITY;
    for mask in 1..full {
        let boundary: f64 = net
            .edges()
            .iter()
            .filter(|e| ((mask >> e.u) & 1) != ((mask >> e.v) & 1))
            .map(|e| e.conductance)
            .sum();
        best = best.min(boundary / mask.count_ones() as f64);
    }
    Ok(best)
}

/// Upper estimate of the expansion constant from caller-supplied subsets.
pub fn expansion_upper_estimate<I>(net: &Network, subsets: I) -> Result<f64>
where
    I: IntoIterator<Item = Vec<VertexId>>,
{
    let mut best = f64::INFINITY;
    let mut inside = vec![false; net.vertex_count()];
    for s in subsets {
        inside.iter_mut().for_each(|b| *b = false);
        for &x in &s {
            net.check_vertex(x)?;
            inside[x] = true;
        }
        let size = inside.iter().filter(|&&b| b).count();
        if size == 0 || size == net.vertex_count() {
            continue;
        }
        let boundary: f64 = net
            .edges()
            .iter()
            .filter(|e| inside[e.u] != inside[e.v])
            .map(|e| e.conductance)
            .sum();
        best = best.min(boundary / size as f64);
    }
    Ok(best)
}

/// An infinite network presented through nested finite truncations.
#[derive(Debug, Clone, PartialEq)]
pub enum Exhaustion {
    /// `(Z^d, 1)` exhausted by l1 balls.
    Lattice { dim: usize },
    /// The rooted binary tree exhausted by word length.
    BinaryTree,
    /// Cartesian product; truncation `k` is the product of the factors' truncations.
    Product(Box<Exhaustion>, Box<Exhaustion>),
    /// A finite network, which is its own truncation at every depth.
    Finite(Network),
}

impl Exhaustion {
    /// Parses `lattice:D`, `tree`, `path:N`, `complete:N` or `A*B` for products.
    pub fn parse(spec: &str) -> Result<Exhaustion> {
        let spec = spec.trim();
        if let Some((a, b)) = spec.split_once('*') {
            return Ok(Exhaustion::Product(
                Box::new(Exhaustion::parse(a)?),
                Box::new(Exhaustion::parse(b)?),
            ));
        }
        let bad = || Error::InvalidParameter(format!("unknown network family {spec:?}"));
        let (name, arg) = match spec.split_once(':') {
            Some((n, a)) => (n, Some(a.parse::<usize>().map_err(|_| bad())?)),
            None => (spec, None),
        };
        match (name, arg) {
            ("lattice", Some(dim)) if dim >= 1 => Ok(Exhaustion::Lattice { dim }),
            ("tree", None) => Ok(Exhaustion::BinaryTree),
            ("path", Some(n)) => Ok(Exhaustion::Finite(path_graph(n)?)),
            ("complete", Some(n)) => Ok(Exhaustion::Finite(complete_graph(n)?)),
            _ => Err(bad()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Exhaustion::Lattice { dim } => format!("lattice:{dim}"),
            Exhaustion::BinaryTree => "tree".into(),
            Exhaustion::Product(a, b) => format!("{}*{}", a.name(), b.name()),
            Exhaustion::Finite(net) => format!("finite:{}", net.vertex_count()),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Exhaustion::Finite(_) => true,
            Exhaustion::Product(a, b) => a.is_finite() && b.is_finite(),
            _ => false,
        }
    }

    pub fn truncation(&self, depth: usize) -> Result<Network> {
        match self {
            Exhaustion::Lattice { dim } => lattice_ball(*dim, depth),
            Exhaustion::BinaryTree => binary_tree(depth),
            Exhaustion::Product(a, b) => {
                cartesian_product(&a.truncation(depth)?, &b.truncation(depth)?)
            }
            Exhaustion::Finite(net) => Ok(net.clone()),
        }
    }

    /// Truncation `depth` wired inside truncation `depth + 1`. Every neighbour
    /// of the depth-`k` truncation already lies in truncation `k + 1`, so the
    /// conductances to `ω` are exact.
    pub fn wired_truncation(&self, depth: usize) -> Result<WiredCollapse> {
        let inner = self.truncation(depth)?;
        let outer = self.truncation(depth + 1)?;
        let keep = (0..inner.vertex_count())
            .map(|x| outer.vertex_by_label(&inner.label(x)))
            .collect::<Result<Vec<_>>>()?;
        wired_collapse(&outer, &keep)
    }

    /// Vertices of truncation `depth` having a neighbour outside it.
    pub fn boundary(&self, depth: usize) -> Result<Vec<VertexId>> {
        let inner = self.truncation(depth)?;
        if self.is_finite() {
            return Ok(Vec::new());
        }
        let outer = self.truncation(depth + 1)?;
        (0..inner.vertex_count())
            .filter_map(|x| {
                let y = match outer.vertex_by_label(&inner.label(x)) {
                    Ok(y) => y,
                    Err(e) => return Some(Err(e)),
                };
                (outer.neighbors(y).len() > inner.neighbors(x).len()).then_some(Ok(x))
            })
            .collect()
    }
}

/// A generator together with a truncation depth.
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustionSpec {
    pub family: Exhaustion,
    pub depth: usize,
}

impl ExhaustionSpec {
    pub fn new(family: Exhaustion, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidParameter("depth must be positive".into()));
        }
        Ok(ExhaustionSpec { family, depth })
    }

    pub fn build(&self) -> Result<Network> {
        self.family.truncation(self.depth)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> Network {
        build_network(vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0)], 0).unwrap()
    }

    #[test]
    fn build_rejects_bad_input() {
        assert_eq!(p3().vertex_count(), 3);
        let disconnected = build_network(
            vec![
                Edge::new(0, 1, 1.0),
                Edge::new(1, 2, 1.0),
                Edge::new(3, 4, 1.0),
            ],
            0,
        );
        assert!(matches!(disconnected, Err(Error::DisconnectedGraph { .. })));
        assert_eq!(
            build_network(vec![Edge::new(0, 0, 1.0)], 0),
            Err(Error::SelfLoop(0))
        );
        assert!(matches!(
            build_network(vec![Edge::new(0, 1, 0.0)], 0),
            Err(Error::NonpositiveConductance { .. })
        ));
        assert!(matches!(
            build_network(vec![Edge::new(0, 1, 1.0), Edge::new(1, 0, 2.0)], 0),
            Err(Error::DuplicateEdge(1, 0))
        ));
    }

    #[test]
    fn net_conductance_examples() {
        let net = p3();
        assert_eq!(net.net_conductance(1).unwrap(), 2.0);
        assert_eq!(net.net_conductance(0).unwrap(), 1.0);
        assert_eq!(net.net_conductance(7), Err(Error::UnknownVertex(7)));
        let z2 = lattice_ball(2, 2).unwrap();
        let interior = z2.vertex_by_label("1,0").unwrap();
        assert_eq!(z2.net_conductance(interior).unwrap(), 4.0);
    }

    #[test]
    fn lattice_ball_sizes() {
        let l = lattice_ball(1, 2).unwrap();
        assert_eq!((l.vertex_count(), l.edges().len()), (5, 4));
        let l = lattice_ball(2, 1).unwrap();
        assert_eq!((l.vertex_count(), l.edges().len()), (5, 4));
        let l = lattice_ball(3, 1).unwrap();
        assert_eq!((l.vertex_count(), l.edges().len()), (7, 6));
        assert_eq!(l.label(l.origin()), "0,0,0");
    }

    #[test]
    fn tree_sizes_and_words() {
        for (k, n) in [(1, 3), (2, 7), (3, 15)] {
            let t = binary_tree(k).unwrap();
            assert_eq!(t.vertex_count(), n);
            assert_eq!(t.edges().len(), n - 1);
        }
        assert_eq!(tree_word(0), "");
        assert_eq!(tree_word(1), "0");
        assert_eq!(tree_word(2), "1");
        assert_eq!(tree_word(5), "10");
        for id in 0..31 {
            assert_eq!(tree_index(&tree_word(id)).unwrap(), id);
        }
    }

    #[test]
    fn products() {
        let p2 = path_graph(2).unwrap();
        let sq = cartesian_product(&p2, &p2).unwrap();
        assert_eq!((sq.vertex_count(), sq.edges().len()), (4, 4));
        assert!((0..4).all(|x| sq.neighbors(x).len() == 2));
        // 3 tree vertices x 2 path vertices; 2 tree edges per copy of P2's
        // vertex (4) plus one P2 edge per tree vertex (3).
        let tp = cartesian_product(&binary_tree(1).unwrap(), &p2).unwrap();
        assert_eq!((tp.vertex_count(), tp.edges().len()), (6, 7));
        let p3 = p3();
        let p1 = Network::single_vertex();
        let same = cartesian_product(&p3, &p1).unwrap();
        assert_eq!(same.vertex_count(), 3);
        assert_eq!(same.edges().len(), 2);
    }

    #[test]
    fn collapse_of_z1_ball() {
        let outer = lattice_ball(1, 3).unwrap();
        let keep: Vec<_> = ["-1", "0", "1"]
            .iter()
            .map(|l| outer.vertex_by_label(l).unwrap())
            .collect();
        let w = wired_collapse(&outer, &keep).unwrap();
        let net = &w.network;
        assert_eq!(net.vertex_count(), 4);
        let id = |l: &str| net.vertex_by_label(l).unwrap();
        assert_eq!(net.conductance(id("-1"), id("0")), 1.0);
        assert_eq!(net.conductance(id("0"), id("1")), 1.0);
        assert_eq!(net.conductance(id("-1"), id(WIRED_LABEL)), 1.0);
        assert_eq!(net.conductance(id("1"), id(WIRED_LABEL)), 1.0);
        assert_eq!(net.edges().len(), 4);
        assert_eq!(w.ground(), Some(id(WIRED_LABEL)));
    }

    #[test]
    fn collapse_of_tree() {
        let w = Exhaustion::BinaryTree.wired_truncation(1).unwrap();
        let net = &w.network;
        let omega = w.ground().unwrap();
        for leaf in ["0", "1"] {
            assert_eq!(net.conductance(net.vertex_by_label(leaf).unwrap(), omega), 2.0);
        }
        assert_eq!(w.cut_conductance, 4.0);
    }

    #[test]
    fn collapse_full_set_is_flagged() {
        let net = p3();
        let w = wired_collapse(&net, &[0, 1, 2]).unwrap();
        assert!(w.boundary_empty);
        assert_eq!(w.network, net);
        assert_eq!(
            wired_collapse(&net, &[1, 2]).unwrap_err(),
            Error::OriginOutsideKeep
        );
        assert!(matches!(
            wired_collapse(&path_graph(5).unwrap(), &[0, 2]),
            Err(Error::DisconnectedGraph { .. })
        ));
    }

    #[test]
    fn expansion_examples() {
        assert!((expansion_constant(&complete_graph(3).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        assert!((expansion_constant(&p3()).unwrap() - 0.5).abs() < 1e-15);
        assert!((expansion_constant(&path_graph(2).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            expansion_constant(&path_graph(21).unwrap()),
            Err(Error::TooLargeForExact { .. })
        ));
        for n in 3..7 {
            let k = expansion_constant(&complete_graph(n).unwrap()).unwrap();
            let p = expansion_constant(&path_graph(n).unwrap()).unwrap();
            assert!(k >= p);
        }
        let est = expansion_upper_estimate(&p3(), vec![vec![0], vec![0, 1]]).unwrap();
        assert_eq!(est, 0.5);
    }

    #[test]
    fn json_round_trip() {
        let t = binary_tree(2).unwrap().with_ground(3).unwrap();
        let back = Network::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
        assert!(matches!(
            Network::from_json("{\"vertices\": 2}"),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn exhaustion_parsing() {
        assert_eq!(Exhaustion::parse("lattice:2").unwrap(), Exhaustion::Lattice { dim: 2 });
        assert_eq!(Exhaustion::parse("tree").unwrap(), Exhaustion::BinaryTree);
        let prod = Exhaustion::parse("tree*lattice:1").unwrap();
        assert_eq!(prod.name(), "tree*lattice:1");
        assert!(Exhaustion::parse("blob").is_err());
        assert!(Exhaustion::parse("path:4").unwrap().is_finite());
    }

    #[test]
    fn boundary_of_lattice_ball_is_outer_shell() {
        let b = Exhaustion::Lattice { dim: 2 }.boundary(2).unwrap();
        let net = lattice_ball(2, 2).unwrap();
        for x in 0..net.vertex_count() {
            let p = parse_lattice_point(&net.label(x)).unwrap();
            let norm: i64 = p.iter().map(|c| c.abs()).sum();
            assert_eq!(b.contains(&x), norm == 2);
        }
    }
}
