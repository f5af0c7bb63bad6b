//! ℜ₁ by Stephen's expansion and by folding a tree of copies of 𝔘,
//! exact Cayley-graph balls, and the strong-component structure of the
//! Cayley graph.

use std::collections::{HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{rooted_iso, GraphError, Label, LabelledGraph, VertexId};
use crate::pieces::PieceTable;
use crate::presentations::{Letter, SpecialPresentation, Word};
use crate::rewriting::{Oracle, RewritingSystem};
use crate::units::UnitsGraph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchutzError {
    #[error("a complete rewriting system is required")]
    NeedsCompleteSystem,
    #[error("graph exceeds {0} vertices")]
    TooLarge(usize),
    #[error("host graph too small: {0}")]
    HorizonTooSmall(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    StephenExpansion,
    TreeFold,
    CayleyRestriction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Saturation {
    Certified,
    Heuristic,
}

#[derive(Debug, Clone)]
pub struct SchutzBall {
    pub graph: LabelledGraph,
    pub radius: usize,
    pub method: Method,
    pub saturation: Saturation,
    /// Expansion rounds or margins tried.
    pub rounds: usize,
}

impl SchutzBall {
    pub fn to_json(&self) -> serde_json::Value {
        let mut j = self.graph.to_json();
        j["radius"] = self.radius.into();
        j["method"] = serde_json::to_value(self.method).unwrap();
        j["saturation"] = serde_json::to_value(self.saturation).unwrap();
        j
    }
}

fn letter_names(p: &SpecialPresentation) -> Vec<String> {
    p.alphabet.names().to_vec()
}

/// Reads as much of `w` as possible from `v`: (vertex reached, letters read).
fn read_prefix(g: &LabelledGraph, v: VertexId, w: &[Letter]) -> (VertexId, usize) {
    let mut cur = v;
    for (i, &a) in w.iter().enumerate() {
        match g.target(cur, a) {
            Some(t) => cur = t,
            None => return (cur, i),
        }
    }
    (cur, w.len())
}

/// Stephen's procedure from the trivial graph: at every vertex near the
/// ball, attach a loop for each relator that cannot be read as a loop and
/// identify the ends of relator paths, then fold. Stops once ball(radius)
/// is unchanged for `stabilization_rounds` rounds or nothing changes.
pub fn stephen_ball(p: &SpecialPresentation, radius: usize, stabilization_rounds: usize) -> Result<SchutzBall, SchutzError> {
    let reach = radius + p.max_relator_len();
    let mut g = LabelledGraph::with_vertices(letter_names(p), 1);
    g.root = Some(0);
    let mut prev: Option<LabelledGraph> = None;
    let mut stable = 0;
    let mut rounds = 0;
    loop {
        rounds += 1;
        let d = g.root_distances().expect("rooted");
        let mut pairs = Vec::new();
        let mut changed = false;
        for v in 0..g.num_vertices() {
            if d[v].is_none_or(|x| x > reach) {
                continue;
            }
            if g.num_vertices() > VERTEX_LIMIT {
                return Err(SchutzError::TooLarge(VERTEX_LIMIT));
            }
            for r in &p.relators {
                let (u, k) = read_prefix(&g, v, r);
                if k == r.len() {
                    if u != v {
                        pairs.push((u, v));
                        changed = true;
                    }
                    continue;
                }
                changed = true;
                let mut cur = u;
                for (i, &a) in r.iter().enumerate().skip(k) {
                    let next = if i + 1 == r.len() { v } else { g.add_vertex() };
                    g.add_edge(cur, a, next);
                    cur = next;
                }
            }
        }
        if !changed {
            break;
        }
        g = g.fold_identifying(&pairs).0;
        let (b, _) = g.ball(radius).expect("rooted");
        match &prev {
            Some(pb) if rooted_iso(pb, &b).is_some() => stable += 1,
            _ => stable = 0,
        }
        prev = Some(b);
        if stable >= stabilization_rounds {
            break;
        }
    }
    let (b, _) = g.ball(radius).expect("rooted");
    Ok(SchutzBall { graph: b, radius, method: Method::StephenExpansion, saturation: Saturation::Heuristic, rounds })
}

/// Vertex budget for every graph built here.
pub const VERTEX_LIMIT: usize = 1_000_000;

/// Tree(𝔘, N(𝔘)) folded, with copies attached only at vertices within
/// `bound` of the root. Copies are attached a round at a time and folded
/// after each round; two copies rooted at one vertex fold together, so
/// each vertex needs at most one.
pub fn folded_copies(u: &UnitsGraph, bound: usize) -> Result<LabelledGraph, SchutzError> {
    let base = &u.graph;
    let root = base.root.ok_or(GraphError::NoRoot)?;
    let base_n = base.num_vertices();
    let mut in_n = vec![false; base_n];
    for v in u.n_set() {
        in_n[v] = true;
    }
    let mut g = base.clone();
    let mut attach = in_n.clone();
    let mut done = vec![false; base_n];
    done[root] = true;
    loop {
        let d = g.root_distances()?;
        let pending: Vec<VertexId> =
            (0..g.num_vertices()).filter(|&v| attach[v] && !done[v] && d[v].is_some_and(|x| x <= bound)).collect();
        if pending.is_empty() {
            return Ok(g);
        }
        for v in pending {
            done[v] = true;
            let offset = g.num_vertices();
            let id = |x: VertexId| if x == root { v } else { offset + x - usize::from(x > root) };
            for x in 0..base_n {
                if x != root {
                    let y = g.add_vertex();
                    g.horizon[y] = base.horizon[x];
                    attach.push(in_n[x]);
                    done.push(false);
                }
            }
            for (x, a, y) in base.edges() {
                g.add_edge(id(x), a, id(y));
            }
        }
        if g.num_vertices() > VERTEX_LIMIT {
            return Err(SchutzError::TooLarge(VERTEX_LIMIT));
        }
        let (f, map) = g.fold();
        let mut attach2 = vec![false; f.num_vertices()];
        let mut done2 = vec![false; f.num_vertices()];
        for (x, &y) in map.iter().enumerate() {
            attach2[y] |= attach[x];
            done2[y] |= done[x];
        }
        (g, attach, done) = (f, attach2, done2);
    }
}

/// Ball of ℜ₁ from the folded tree of copies of 𝔘, widening the bound
/// beyond `radius` until ball(radius) agrees for two consecutive bounds.
pub fn r1_via_tree(u: &UnitsGraph, p: &SpecialPresentation, radius: usize) -> Result<SchutzBall, SchutzError> {
    let max_margin = 2 * p.max_relator_len() + 2;
    let mut prev: Option<LabelledGraph> = None;
    for margin in 0..=max_margin {
        let f = folded_copies(u, radius + margin)?;
        let d = f.root_distances()?;
        if (0..f.num_vertices()).any(|v| f.horizon[v] && d[v].is_some_and(|x| x <= radius)) {
            return Err(SchutzError::HorizonTooSmall("units graph too small for the requested radius".into()));
        }
        let (b, _) = f.ball(radius)?;
        if let Some(pb) = &prev {
            if rooted_iso(pb, &b).is_some() {
                return Ok(SchutzBall { graph: b, radius, method: Method::TreeFold, saturation: Saturation::Heuristic, rounds: margin });
            }
        }
        prev = Some(b);
    }
    Err(SchutzError::HorizonTooSmall("tree-of-copies balls did not stabilize".into()))
}

/// Unit-ball radius that keeps 𝔘's horizon clear of a ball of ℜ₁ of the
/// given radius.
pub fn units_radius_for(p: &SpecialPresentation, radius: usize) -> usize {
    radius + 2 * p.max_relator_len() + 2
}

/// Exact ball of the Cayley graph under undirected distance, with normal
/// forms as vertices.
#[derive(Debug, Clone)]
pub struct CayleyBall {
    pub graph: LabelledGraph,
    pub elements: Vec<Word>,
    pub index: HashMap<Word, VertexId>,
    pub distance: Vec<usize>,
    pub radius: usize,
}

/// For irreducible `v` with `|v| ≤ bound`, `v` listed under `(nf(v·a), a)`.
struct PredTable {
    map: HashMap<(Word, Letter), Vec<Word>>,
    longest: usize,
}

impl PredTable {
    fn new(rs: &RewritingSystem, bound: usize) -> Self {
        let n = rs.num_letters() as Letter;
        let mut map: HashMap<(Word, Letter), Vec<Word>> = HashMap::new();
        let mut longest = 0;
        let mut layer = vec![Word::new()];
        for len in 0..=bound {
            let mut next = Vec::new();
            for v in &layer {
                for a in 0..n {
                    let mut va = v.clone();
                    va.push(a);
                    let z = rs.normalize(&va).expect("complete system terminates");
                    longest = longest.max(z.len());
                    map.entry((z, a)).or_default().push(v.clone());
                    if len < bound && rs.suffix_irreducible(&va) {
                        next.push(va);
                    }
                }
            }
            layer = next;
        }
        PredTable { map, longest }
    }

    /// Irreducible `x` with `nf(x·a) = y`.
    fn preds(&self, rs: &RewritingSystem, y: &[Letter], a: Letter) -> Vec<Word> {
        let mut out: Vec<Word> = Vec::new();
        for k in 0..=y.len().min(self.longest) {
            let (head, z) = y.split_at(y.len() - k);
            if let Some(vs) = self.map.get(&(z.to_vec(), a)) {
                for v in vs {
                    let mut x = head.to_vec();
                    x.extend_from_slice(v);
                    if !out.contains(&x) && rs.is_irreducible(&x) && rs.append(&x, &[a]) == y {
                        out.push(x);
                    }
                }
            }
        }
        out
    }
}

/// Default bound on the length of the rewritten suffix searched when
/// looking for predecessors.
pub fn default_pred_bound(p: &SpecialPresentation) -> usize {
    (2 * p.max_relator_len()).saturating_sub(2).max(2)
}

pub fn cayley_ball(oracle: &Oracle, radius: usize) -> Result<CayleyBall, SchutzError> {
    cayley_ball_with_bound(oracle, radius, default_pred_bound(&oracle.presentation))
}

pub fn cayley_ball_with_bound(oracle: &Oracle, radius: usize, pred_bound: usize) -> Result<CayleyBall, SchutzError> {
    let rs = oracle.system().ok_or(SchutzError::NeedsCompleteSystem)?;
    let table = PredTable::new(rs, pred_bound);
    let n = rs.num_letters() as Letter;
    let mut elements = vec![Word::new()];
    let mut index = HashMap::from([(Word::new(), 0)]);
    let mut distance = vec![0];
    let mut i = 0;
    while i < elements.len() {
        if distance[i] < radius {
            let y = elements[i].clone();
            let mut found = Vec::new();
            for a in 0..n {
                found.push(rs.append(&y, &[a]));
                found.extend(table.preds(rs, &y, a));
            }
            if elements.len() > VERTEX_LIMIT {
                return Err(SchutzError::TooLarge(VERTEX_LIMIT));
            }
            for w in found {
                if !index.contains_key(&w) {
                    index.insert(w.clone(), elements.len());
                    elements.push(w);
                    distance.push(distance[i] + 1);
                }
            }
        }
        i += 1;
    }
    let mut g = LabelledGraph::with_vertices(letter_names(&oracle.presentation), elements.len());
    for (v, y) in elements.iter().enumerate() {
        for a in 0..n {
            if let Some(&t) = index.get(&rs.append(y, &[a])) {
                g.add_edge(v, a, t);
            }
        }
        g.horizon[v] = distance[v] == radius;
    }
    g.root = Some(0);
    Ok(CayleyBall { graph: g, elements, index, distance, radius })
}

#[derive(Debug, Clone)]
pub struct RightInvertibleSubgraph {
    /// Ball of the requested radius around 1 inside the induced subgraph.
    pub graph: LabelledGraph,
    /// Cayley-ball vertex of each vertex.
    pub map: Vec<VertexId>,
    /// Vertices neither certified nor refuted.
    pub uncertified: Vec<VertexId>,
}

/// Whether some word of length at most `depth` sends `y` into `good`,
/// exploring at most `cap` normal forms.
fn reaches_good(rs: &RewritingSystem, y: &[Letter], good: &HashSet<Word>, depth: usize, cap: usize) -> bool {
    let n = rs.num_letters() as Letter;
    let mut seen = HashSet::from([y.to_vec()]);
    let mut layer = vec![y.to_vec()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &layer {
            for a in 0..n {
                let x = rs.append(w, &[a]);
                if good.contains(&x) {
                    return true;
                }
                if seen.insert(x.clone()) {
                    if seen.len() > cap {
                        return false;
                    }
                    next.push(x);
                }
            }
        }
        layer = next;
    }
    false
}

/// The subgraph of a Cayley ball induced on right-invertible vertices,
/// re-balled around 1. If `y·w` is right invertible then so is `y`, so
/// certificates spread from 1 backwards along edges and through short
/// words into certified elements; vertices whose first letter starts no
/// piece, closed under out-edges, are refuted. `cap` bounds each short-word
/// search.
pub fn right_invertible_subgraph(ball: &CayleyBall, oracle: &Oracle, pt: &PieceTable, cap: usize) -> Result<RightInvertibleSubgraph, SchutzError> {
    let rs = oracle.system().ok_or(SchutzError::NeedsCompleteSystem)?;
    let g = &ball.graph;
    let n = g.num_vertices();
    let firsts: HashSet<Letter> = pt.pieces.iter().map(|x| x.word[0]).collect();
    let mut bad = vec![false; n];
    let mut stack: Vec<VertexId> = (0..n).filter(|&v| ball.elements[v].first().is_some_and(|a| !firsts.contains(a))).collect();
    for &v in &stack {
        bad[v] = true;
    }
    while let Some(v) = stack.pop() {
        for &(_, u) in g.out_edges(v) {
            if !bad[u] {
                bad[u] = true;
                stack.push(u);
            }
        }
    }
    let depth = oracle.presentation.max_relator_len();
    let mut good = vec![false; n];
    let mut good_words: HashSet<Word> = HashSet::new();
    let mut tried = vec![false; n];
    let mut fresh = vec![0usize];
    loop {
        while let Some(v) = fresh.pop() {
            if good[v] {
                continue;
            }
            good[v] = true;
            good_words.insert(ball.elements[v].clone());
            fresh.extend(g.in_edges(v).iter().map(|&(_, u)| u).filter(|&u| !good[u]));
        }
        let candidates: Vec<VertexId> = (0..n)
            .filter(|&y| !good[y] && !bad[y] && !tried[y] && g.in_edges(y).iter().any(|&(_, x)| good[x]))
            .collect();
        if candidates.is_empty() {
            break;
        }
        for y in candidates {
            tried[y] = true;
            if reaches_good(rs, &ball.elements[y], &good_words, depth, cap) {
                fresh.push(y);
            }
        }
        if fresh.is_empty() {
            break;
        }
    }
    debug_assert!((0..n).all(|v| !(good[v] && bad[v])));
    let keep: Vec<VertexId> = (0..n).filter(|&v| good[v]).collect();
    let uncertified = (0..n).filter(|&v| !good[v] && !bad[v]).collect();
    let (sub, map1) = g.induced(&keep);
    let (b, map2) = sub.ball(ball.radius)?;
    let map = map2.iter().map(|&i| map1[i]).collect();
    Ok(RightInvertibleSubgraph { graph: b, map, uncertified })
}

#[derive(Debug, Clone, Serialize)]
pub struct CondensationReport {
    pub component_of: Vec<usize>,
    pub num_components: usize,
    /// Edges between distinct components, deduplicated.
    pub dag_edges: Vec<(usize, usize)>,
    pub acyclic: bool,
    pub root_component: usize,
    pub inner_radius: usize,
    /// (component, entering edges) for non-root components meeting the
    /// inner ball, counting edges with both ends in the inner ball.
    pub entering: Vec<(usize, usize)>,
}

impl CondensationReport {
    pub fn unique_entering(&self) -> bool {
        self.entering.iter().all(|&(_, k)| k == 1)
    }
}

/// Strong components of a Cayley ball. Components far out are fragments
/// of larger ones, so entering edges are only counted inside
/// `inner_radius`, which should leave room for the detours that close
/// cycles within a component.
pub fn condensation(ball: &CayleyBall, inner_radius: usize) -> CondensationReport {
    let g = &ball.graph;
    let comp = g.scc();
    let k = comp.iter().copied().max().map_or(0, |m| m + 1);
    let inside = |v: VertexId| ball.distance[v] <= inner_radius;
    let mut dag: HashSet<(usize, usize)> = HashSet::new();
    let mut entering = vec![0usize; k];
    for (u, _, v) in g.edges() {
        if comp[u] != comp[v] {
            dag.insert((comp[u], comp[v]));
            if inside(u) && inside(v) {
                entering[comp[v]] += 1;
            }
        }
    }
    let mut dag_edges: Vec<_> = dag.into_iter().collect();
    dag_edges.sort_unstable();
    // Tarjan numbers components in reverse topological order.
    let acyclic = dag_edges.iter().all(|&(a, b)| a > b);
    let root_component = comp[0];
    let mut inner = vec![false; k];
    for v in 0..g.num_vertices() {
        if inside(v) {
            inner[comp[v]] = true;
        }
    }
    let entering = (0..k).filter(|&c| c != root_component && inner[c]).map(|c| (c, entering[c])).collect();
    CondensationReport { component_of: comp, num_components: k, dag_edges, acyclic, root_component, inner_radius, entering }
}

/// Edge label as a letter, for readability in tests.
pub fn label_of(p: &SpecialPresentation, s: &str) -> Label {
    p.alphabet.index(s).expect("letter")
}
