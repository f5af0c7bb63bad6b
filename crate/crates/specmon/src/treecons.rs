//! Trees of copies Tree(Γ, S) and the checks behind the bounded folding
//! condition: S-overlap-freeness, S-fullness and class uniformity.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{rooted_iso, Label, LabelledGraph, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("graph has no root")]
    NoRoot,
    #[error("the root may not be an attachment point")]
    RootInAttachSet,
}

/// A vertex of Tree(Γ, S): `(u_0, …, u_k)` with `u_i ∈ V_S` for `i < k`
/// and `u_k ≠ 1` when `k > 0`.
pub type Tuple = Vec<VertexId>;

pub fn depth_of(t: &Tuple) -> usize {
    t.len() - 1
}

#[derive(Debug, Clone)]
pub struct TreeOfCopies {
    pub graph: LabelledGraph,
    pub tuples: Vec<Tuple>,
    pub index: HashMap<Tuple, VertexId>,
}

struct Ctx<'a> {
    base: &'a LabelledGraph,
    root: VertexId,
    attach: &'a [bool],
}

impl Ctx<'_> {
    /// The tuple of vertex `y` of the copy attached at `prefix`.
    fn embed(&self, prefix: &[VertexId], y: VertexId) -> Tuple {
        if y == self.root && !prefix.is_empty() {
            prefix.to_vec()
        } else {
            let mut t = prefix.to_vec();
            t.push(y);
            t
        }
    }

    /// Directed edges at `t` as (outgoing?, label, other end).
    fn edges(&self, t: &Tuple) -> Vec<(bool, Label, Tuple)> {
        let (prefix, y) = t.split_at(t.len() - 1);
        let y = y[0];
        let mut out = Vec::new();
        for &(a, w) in self.base.out_edges(y) {
            out.push((true, a, self.embed(prefix, w)));
        }
        for &(a, w) in self.base.in_edges(y) {
            out.push((false, a, self.embed(prefix, w)));
        }
        if self.attach[y] {
            for &(a, w) in self.base.out_edges(self.root) {
                out.push((true, a, self.embed(t, w)));
            }
            for &(a, w) in self.base.in_edges(self.root) {
                out.push((false, a, self.embed(t, w)));
            }
        }
        out
    }
}

/// Materializes the vertices of Tree(Γ, S) within undirected distance
/// `max_radius` of the root and of depth at most `max_depth`. Vertices
/// with a neighbour left out are flagged as horizon.
pub fn tree_of_copies(g: &LabelledGraph, v_s: &[VertexId], max_depth: usize, max_radius: usize) -> Result<TreeOfCopies, TreeError> {
    let root = g.root.ok_or(TreeError::NoRoot)?;
    let mut attach = vec![false; g.num_vertices()];
    for &v in v_s {
        attach[v] = true;
    }
    if attach[root] {
        return Err(TreeError::RootInAttachSet);
    }
    let ctx = Ctx { base: g, root, attach: &attach };
    let mut tg = LabelledGraph::new(g.labels().to_vec());
    let mut tuples: Vec<Tuple> = Vec::new();
    let mut index: HashMap<Tuple, VertexId> = HashMap::new();
    let mut dist = Vec::new();
    let start = vec![root];
    index.insert(start.clone(), tg.add_vertex());
    tuples.push(start);
    dist.push(0);
    let mut q = VecDeque::from([0usize]);
    while let Some(v) = q.pop_front() {
        let t = tuples[v].clone();
        for (_, _, u) in ctx.edges(&t) {
            if index.contains_key(&u) {
                continue;
            }
            if dist[v] + 1 > max_radius || depth_of(&u) > max_depth {
                tg.horizon[v] = true;
                continue;
            }
            let id = tg.add_vertex();
            index.insert(u.clone(), id);
            tuples.push(u);
            dist.push(dist[v] + 1);
            q.push_back(id);
        }
    }
    for (v, t) in tuples.iter().enumerate() {
        if g.horizon[*t.last().unwrap()] {
            tg.horizon[v] = true;
        }
        for (outgoing, a, u) in ctx.edges(t) {
            if let (true, Some(&w)) = (outgoing, index.get(&u)) {
                tg.add_edge(v, a, w);
            }
        }
    }
    tg.root = Some(0);
    Ok(TreeOfCopies { graph: tg, tuples, index })
}

/// Two equally labelled nonempty walks: `p1` from the root and `p2` from a
/// vertex of V_S to a vertex outside V_S.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OverlapWitness {
    pub word: Vec<Label>,
    pub p1: Vec<VertexId>,
    pub p2: Vec<VertexId>,
}

/// Searches all label words up to `max_path_len` by walking pairs of
/// vertices in step.
pub fn check_overlap_free(g: &LabelledGraph, v_s: &[VertexId], max_path_len: usize) -> Result<(), OverlapWitness> {
    let root = g.root.expect("rooted graph");
    let in_s: HashSet<VertexId> = v_s.iter().copied().collect();
    let mut parent: HashMap<(VertexId, VertexId), Option<((VertexId, VertexId), Label)>> = HashMap::new();
    let mut q = VecDeque::new();
    for &s in v_s {
        parent.insert((root, s), None);
        q.push_back(((root, s), 0usize));
    }
    while let Some(((x, y), len)) = q.pop_front() {
        if len == max_path_len {
            continue;
        }
        for &(a, x2) in g.out_edges(x) {
            for y2 in g.targets(y, a) {
                let st = (x2, y2);
                if parent.contains_key(&st) {
                    continue;
                }
                parent.insert(st, Some(((x, y), a)));
                if !in_s.contains(&y2) {
                    let mut word = Vec::new();
                    let (mut p1, mut p2) = (vec![x2], vec![y2]);
                    let mut cur = st;
                    while let Some(Some((prev, a))) = parent.get(&cur) {
                        word.push(*a);
                        p1.push(prev.0);
                        p2.push(prev.1);
                        cur = *prev;
                    }
                    word.reverse();
                    p1.reverse();
                    p2.reverse();
                    return Err(OverlapWitness { word, p1, p2 });
                }
                q.push_back((st, len + 1));
            }
        }
    }
    Ok(())
}

/// Edges between distinct classes whose terminus lies in V_S.
pub fn check_fullness(g: &LabelledGraph, class_of: &[usize], v_s: &[VertexId]) -> Vec<(VertexId, Label, VertexId)> {
    let in_s: HashSet<VertexId> = v_s.iter().copied().collect();
    g.edges().filter(|&(u, _, v)| class_of[u] != class_of[v] && in_s.contains(&v)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct FoldingReport {
    /// All classes induce pairwise label-isomorphic subgraphs.
    pub classes_uniform: bool,
    pub full: bool,
    pub fullness_violations: Vec<(VertexId, Label, VertexId)>,
    pub overlap_free: bool,
    pub overlap_witness: Option<OverlapWitness>,
    pub max_path_len: usize,
    /// Size of a class, i.e. the folding constant when the others hold.
    pub omega: usize,
}

impl FoldingReport {
    pub fn holds(&self) -> bool {
        self.classes_uniform && self.full && self.overlap_free
    }
}

pub fn check_bounded_folding(g: &LabelledGraph, class_of: &[usize], v_s: &[VertexId], max_path_len: usize) -> FoldingReport {
    let mut classes: Vec<Vec<VertexId>> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for (v, &c) in class_of.iter().enumerate() {
        let k = *slot.entry(c).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[k].push(v);
    }
    let shape = |vs: &[VertexId]| {
        let (mut h, _) = g.induced(vs);
        h.root = None;
        h
    };
    let first = classes.first().map(|c| shape(c));
    let classes_uniform = match &first {
        None => true,
        Some(f) => classes[1..].iter().all(|c| rooted_iso(f, &shape(c)).is_some()),
    };
    let fullness_violations = check_fullness(g, class_of, v_s);
    let overlap = check_overlap_free(g, v_s, max_path_len);
    FoldingReport {
        classes_uniform,
        full: fullness_violations.is_empty(),
        fullness_violations,
        overlap_free: overlap.is_ok(),
        overlap_witness: overlap.err(),
        max_path_len,
        omega: classes.iter().map(Vec::len).max().unwrap_or(0),
    }
}
