//! Rooted edge-labelled digraphs: folding, undirected distances, balls,
//! ends and end-isomorphism classes.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

pub type Label = u16;
pub type VertexId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has no root")]
    NoRoot,
    #[error("end of vertex {vertex} at level {level} reaches the horizon of the host ball")]
    IncompleteEnd { vertex: VertexId, level: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct LabelledGraph {
    labels: Vec<String>,
    /// When set, labels from this index on are the reversals of the labels
    /// below it.
    bar_base: Option<usize>,
    out: Vec<Vec<(Label, VertexId)>>,
    inc: Vec<Vec<(Label, VertexId)>>,
    pub root: Option<VertexId>,
    pub horizon: Vec<bool>,
}

impl LabelledGraph {
    pub fn new(labels: Vec<String>) -> Self {
        LabelledGraph { labels, bar_base: None, out: Vec::new(), inc: Vec::new(), root: None, horizon: Vec::new() }
    }

    pub fn with_vertices(labels: Vec<String>, n: usize) -> Self {
        let mut g = Self::new(labels);
        for _ in 0..n {
            g.add_vertex();
        }
        g
    }

    pub fn from_edges(labels: Vec<String>, n: usize, edges: &[(VertexId, Label, VertexId)], root: Option<VertexId>) -> Self {
        let mut g = Self::with_vertices(labels, n);
        for &(u, a, v) in edges {
            g.add_edge(u, a, v);
        }
        g.root = root;
        g
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn add_vertex(&mut self) -> VertexId {
        self.out.push(Vec::new());
        self.inc.push(Vec::new());
        self.horizon.push(false);
        self.out.len() - 1
    }

    /// Adds an edge; returns false if it was already present.
    pub fn add_edge(&mut self, u: VertexId, a: Label, v: VertexId) -> bool {
        assert!((a as usize) < self.labels.len(), "label out of range");
        match self.out[u].binary_search(&(a, v)) {
            Ok(_) => false,
            Err(i) => {
                self.out[u].insert(i, (a, v));
                let j = self.inc[v].binary_search(&(a, u)).unwrap_err();
                self.inc[v].insert(j, (a, u));
                true
            }
        }
    }

    pub fn has_edge(&self, u: VertexId, a: Label, v: VertexId) -> bool {
        self.out[u].binary_search(&(a, v)).is_ok()
    }

    pub fn num_vertices(&self) -> usize {
        self.out.len()
    }

    pub fn num_edges(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn out_edges(&self, v: VertexId) -> &[(Label, VertexId)] {
        &self.out[v]
    }

    pub fn in_edges(&self, v: VertexId) -> &[(Label, VertexId)] {
        &self.inc[v]
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, Label, VertexId)> + '_ {
        self.out.iter().enumerate().flat_map(|(u, es)| es.iter().map(move |&(a, v)| (u, a, v)))
    }

    pub fn targets(&self, v: VertexId, a: Label) -> impl Iterator<Item = VertexId> + '_ {
        let lo = self.out[v].partition_point(|&(b, _)| b < a);
        self.out[v][lo..].iter().take_while(move |&&(b, _)| b == a).map(|&(_, t)| t)
    }

    pub fn target(&self, v: VertexId, a: Label) -> Option<VertexId> {
        self.targets(v, a).next()
    }

    /// Follows a word along outgoing edges, taking the first choice.
    pub fn read(&self, from: VertexId, w: &[Label]) -> Option<VertexId> {
        w.iter().try_fold(from, |v, &a| self.target(v, a))
    }

    /// Undirected neighbours with multiplicity.
    pub fn neighbours(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.out[v].iter().chain(&self.inc[v]).map(|&(_, u)| u)
    }

    /// `Err((v, a, t1, t2))` for a vertex with two distinct `a`-successors.
    pub fn is_deterministic(&self) -> Result<(), (VertexId, Label, VertexId, VertexId)> {
        for (v, es) in self.out.iter().enumerate() {
            for w in es.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err((v, w[0].0, w[0].1, w[1].1));
                }
            }
        }
        Ok(())
    }

    /// Quotient by the least congruence making the graph deterministic.
    /// Returns the folded graph and the map from old to new vertices.
    pub fn fold(&self) -> (LabelledGraph, Vec<VertexId>) {
        self.fold_identifying(&[])
    }

    /// Like [`fold`](Self::fold), after first identifying the given pairs.
    pub fn fold_identifying(&self, pairs: &[(VertexId, VertexId)]) -> (LabelledGraph, Vec<VertexId>) {
        let n = self.num_vertices();
        let mut parent: Vec<usize> = (0..n).collect();
        let mut size = vec![1usize; n];
        let mut maps: Vec<BTreeMap<Label, VertexId>> = vec![BTreeMap::new(); n];
        let mut work: Vec<(VertexId, VertexId)> = pairs.to_vec();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (u, a, v) in self.edges() {
            match maps[u].get(&a) {
                Some(&t) => work.push((t, v)),
                None => {
                    maps[u].insert(a, v);
                }
            }
        }
        while let Some((x, y)) = work.pop() {
            let (mut rx, mut ry) = (find(&mut parent, x), find(&mut parent, y));
            if rx == ry {
                continue;
            }
            if size[rx] < size[ry] {
                std::mem::swap(&mut rx, &mut ry);
            }
            parent[ry] = rx;
            size[rx] += size[ry];
            let moved = std::mem::take(&mut maps[ry]);
            for (a, t) in moved {
                match maps[rx].get(&a) {
                    Some(&t2) => work.push((t, t2)),
                    None => {
                        maps[rx].insert(a, t);
                    }
                }
            }
        }
        let mut new_id = vec![usize::MAX; n];
        let mut map = vec![0; n];
        let mut g = LabelledGraph::new(self.labels.clone());
        g.bar_base = self.bar_base;
        for v in 0..n {
            let r = find(&mut parent, v);
            if new_id[r] == usize::MAX {
                new_id[r] = g.add_vertex();
            }
            map[v] = new_id[r];
            g.horizon[map[v]] |= self.horizon[v];
        }
        for r in 0..n {
            if find(&mut parent, r) != r {
                continue;
            }
            let es: Vec<(Label, VertexId)> = maps[r].iter().map(|(&a, &t)| (a, t)).collect();
            for (a, t) in es {
                let tt = find(&mut parent, t);
                g.add_edge(new_id[r], a, new_id[tt]);
            }
        }
        g.root = self.root.map(|r| map[r]);
        (g, map)
    }

    /// The graph over Σ ⊔ Σ̄ with a reversed, barred edge for every edge.
    /// Idempotent.
    pub fn lud(&self) -> LabelledGraph {
        if self.bar_base.is_some() {
            return self.clone();
        }
        let n = self.labels.len();
        let mut labels = self.labels.clone();
        labels.extend(self.labels.iter().map(|l| format!("{l}\u{304}")));
        let mut g = LabelledGraph::with_vertices(labels, self.num_vertices());
        g.bar_base = Some(n);
        for (u, a, v) in self.edges() {
            g.add_edge(u, a, v);
            g.add_edge(v, a + n as Label, u);
        }
        g.root = self.root;
        g.horizon = self.horizon.clone();
        g
    }

    /// Undirected breadth-first distances.
    pub fn distances(&self, from: VertexId) -> Vec<Option<usize>> {
        let mut d = vec![None; self.num_vertices()];
        d[from] = Some(0);
        let mut q = VecDeque::from([from]);
        while let Some(v) = q.pop_front() {
            let dv = d[v].unwrap();
            for u in self.neighbours(v) {
                if d[u].is_none() {
                    d[u] = Some(dv + 1);
                    q.push_back(u);
                }
            }
        }
        d
    }

    pub fn root_distances(&self) -> Result<Vec<Option<usize>>, GraphError> {
        Ok(self.distances(self.root.ok_or(GraphError::NoRoot)?))
    }

    /// Induced subgraph on `vs` (in that order) with the map from new to
    /// old ids. Root and horizon flags carry over.
    pub fn induced(&self, vs: &[VertexId]) -> (LabelledGraph, Vec<VertexId>) {
        let mut idx = HashMap::with_capacity(vs.len());
        let mut g = LabelledGraph::with_vertices(self.labels.clone(), vs.len());
        g.bar_base = self.bar_base;
        for (i, &v) in vs.iter().enumerate() {
            idx.insert(v, i);
            g.horizon[i] = self.horizon[v];
        }
        for (i, &v) in vs.iter().enumerate() {
            for &(a, t) in &self.out[v] {
                if let Some(&j) = idx.get(&t) {
                    g.add_edge(i, a, j);
                }
            }
        }
        g.root = self.root.and_then(|r| idx.get(&r).copied());
        (g, vs.to_vec())
    }

    /// Vertices at undirected distance at most `r` from the root, in
    /// breadth-first order. A vertex is flagged as horizon when it was
    /// flagged in the host or has a neighbour outside the ball.
    pub fn ball(&self, r: usize) -> Result<(LabelledGraph, Vec<VertexId>), GraphError> {
        let d = self.root_distances()?;
        let mut vs: Vec<VertexId> = (0..self.num_vertices()).filter(|&v| d[v].is_some_and(|x| x <= r)).collect();
        vs.sort_by_key(|&v| (d[v], v));
        let (mut g, map) = self.induced(&vs);
        for (i, &v) in map.iter().enumerate() {
            if d[v] == Some(r) && self.neighbours(v).any(|u| d[u].is_none_or(|x| x > r)) {
                g.horizon[i] = true;
            }
        }
        Ok((g, map))
    }

    /// Strongly connected components (iterative Tarjan). Component ids are
    /// in reverse topological order of the condensation.
    pub fn scc(&self) -> Vec<usize> {
        let n = self.num_vertices();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on = vec![false; n];
        let mut comp = vec![usize::MAX; n];
        let mut stack = Vec::new();
        let mut next = 0;
        let mut ncomp = 0;
        for s in 0..n {
            if index[s] != usize::MAX {
                continue;
            }
            let mut call: Vec<(usize, usize)> = vec![(s, 0)];
            index[s] = next;
            low[s] = next;
            next += 1;
            stack.push(s);
            on[s] = true;
            while let Some(&mut (v, ref mut i)) = call.last_mut() {
                if *i < self.out[v].len() {
                    let w = self.out[v][*i].1;
                    *i += 1;
                    if index[w] == usize::MAX {
                        index[w] = next;
                        low[w] = next;
                        next += 1;
                        stack.push(w);
                        on[w] = true;
                        call.push((w, 0));
                    } else if on[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(&(u, _)) = call.last() {
                        low[u] = low[u].min(low[v]);
                    }
                    if low[v] == index[v] {
                        loop {
                            let w = stack.pop().unwrap();
                            on[w] = false;
                            comp[w] = ncomp;
                            if w == v {
                                break;
                            }
                        }
                        ncomp += 1;
                    }
                }
            }
        }
        comp
    }

    pub fn to_dot(&self, names: Option<&[String]>) -> String {
        let mut s = String::from("digraph G {\n  node [shape=circle];\n");
        for v in 0..self.num_vertices() {
            let name = names.map_or_else(|| v.to_string(), |n| n[v].clone());
            let mut attrs = vec![format!("label=\"{}\"", name.replace('"', "\\\""))];
            if Some(v) == self.root {
                attrs.push("shape=doublecircle".into());
            }
            if self.horizon[v] {
                attrs.push("color=red".into());
            }
            s += &format!("  v{v} [{}];\n", attrs.join(", "));
        }
        for (u, a, v) in self.edges() {
            s += &format!("  v{u} -> v{v} [label=\"{}\"];\n", self.labels[a as usize]);
        }
        s + "}\n"
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "labels": self.labels,
            "vertices": self.num_vertices(),
            "edges": self.edges().map(|(u, a, v)| json!([u, self.labels[a as usize], v])).collect::<Vec<_>>(),
            "root": self.root,
            "horizon": (0..self.num_vertices()).filter(|&v| self.horizon[v]).collect::<Vec<_>>(),
        })
    }
}

/// Γ(v): the component of the vertices at distance ≥ |v| containing `v`,
/// with its frontier points at distance exactly |v|.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndSpace {
    pub base: VertexId,
    pub level: usize,
    pub component: Vec<VertexId>,
    pub frontier: Vec<VertexId>,
    pub complete: bool,
}

fn component_at_level(g: &LabelledGraph, d: &[Option<usize>], v: VertexId, level: usize) -> Vec<VertexId> {
    let keep = |u: VertexId| d[u].is_some_and(|x| x >= level);
    let mut seen = vec![false; g.num_vertices()];
    seen[v] = true;
    let mut comp = vec![v];
    let mut i = 0;
    while i < comp.len() {
        let x = comp[i];
        i += 1;
        for u in g.neighbours(x) {
            if keep(u) && !seen[u] {
                seen[u] = true;
                comp.push(u);
            }
        }
    }
    comp.sort_unstable();
    comp
}

pub fn end_space(g: &LabelledGraph, v: VertexId) -> Result<EndSpace, GraphError> {
    let d = g.root_distances()?;
    let level = d[v].ok_or(GraphError::NoRoot)?;
    let component = component_at_level(g, &d, v, level);
    let frontier = component.iter().copied().filter(|&u| d[u] == Some(level)).collect();
    let complete = !component.iter().any(|&u| g.horizon[u]);
    Ok(EndSpace { base: v, level, component, frontier, complete })
}

/// Compact adjacency for isomorphism testing, with initial vertex colours.
#[derive(Debug, Clone)]
struct Sub {
    out: Vec<Vec<(Label, usize)>>,
    inc: Vec<Vec<(Label, usize)>>,
    init: Vec<u64>,
}

impl Sub {
    fn from_graph(g: &LabelledGraph, vs: &[VertexId], init: impl Fn(VertexId) -> u64) -> Sub {
        let mut idx = HashMap::with_capacity(vs.len());
        for (i, &v) in vs.iter().enumerate() {
            idx.insert(v, i);
        }
        let mut out = vec![Vec::new(); vs.len()];
        let mut inc = vec![Vec::new(); vs.len()];
        for (i, &v) in vs.iter().enumerate() {
            for &(a, t) in g.out_edges(v) {
                if let Some(&j) = idx.get(&t) {
                    out[i].push((a, j));
                    inc[j].push((a, i));
                }
            }
        }
        for x in inc.iter_mut() {
            x.sort_unstable();
        }
        Sub { out, inc, init: vs.iter().map(|&v| init(v)).collect() }
    }

    fn n(&self) -> usize {
        self.out.len()
    }

    fn edges(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    fn has(&self, u: usize, a: Label, v: usize) -> bool {
        self.out[u].binary_search(&(a, v)).is_ok()
    }
}

/// Colour refinement with colours interned across graphs, so isomorphic
/// graphs receive identical colourings.
#[derive(Default)]
pub struct Interner {
    ids: HashMap<(u64, Vec<(u8, Label, u32)>), u32>,
    init: HashMap<u64, u32>,
}

impl Interner {
    fn refine(&mut self, s: &Sub) -> Vec<u32> {
        let n = s.n();
        let mut col: Vec<u32> = s.init.iter().map(|&c| {
            let k = self.init.len() as u32;
            *self.init.entry(c).or_insert(k)
        }).collect();
        let mut classes = count_distinct(&col);
        loop {
            let mut next = Vec::with_capacity(n);
            for v in 0..n {
                let mut sig: Vec<(u8, Label, u32)> = s.out[v].iter().map(|&(a, t)| (0, a, col[t])).chain(s.inc[v].iter().map(|&(a, t)| (1, a, col[t]))).collect();
                sig.sort_unstable();
                let key = (col[v] as u64, sig);
                let k = self.ids.len() as u32;
                next.push(*self.ids.entry(key).or_insert(k));
            }
            let c = count_distinct(&next);
            col = next;
            if c == classes {
                return col;
            }
            classes = c;
        }
    }
}

fn count_distinct(c: &[u32]) -> usize {
    let mut v = c.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

fn signature(c: &[u32]) -> Vec<u32> {
    let mut v = c.to_vec();
    v.sort_unstable();
    v
}

/// Backtracking search for a colour- and label-preserving isomorphism.
fn find_iso(a: &Sub, b: &Sub, ca: &[u32], cb: &[u32]) -> Option<Vec<usize>> {
    let n = a.n();
    if n != b.n() || a.edges() != b.edges() || signature(ca) != signature(cb) {
        return None;
    }
    if n == 0 {
        return Some(Vec::new());
    }
    // Visit order: rarest colour first, then breadth-first so most vertices
    // have an already mapped neighbour.
    let mut freq: HashMap<u32, usize> = HashMap::new();
    for &c in ca {
        *freq.entry(c).or_default() += 1;
    }
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    let mut starts: Vec<usize> = (0..n).collect();
    starts.sort_by_key(|&v| (freq[&ca[v]], v));
    for s in starts {
        if placed[s] {
            continue;
        }
        placed[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            order.push(v);
            for &(_, u) in a.out[v].iter().chain(&a.inc[v]) {
                if !placed[u] {
                    placed[u] = true;
                    q.push_back(u);
                }
            }
        }
    }
    let mut by_colour: HashMap<u32, Vec<usize>> = HashMap::new();
    for (v, &c) in cb.iter().enumerate() {
        by_colour.entry(c).or_default().push(v);
    }
    const NONE: usize = usize::MAX;
    let mut ma = vec![NONE; n];
    let mut mb = vec![NONE; n];
    let candidates = |x: usize, ma: &[usize]| -> Vec<usize> {
        for &(lab, u) in &a.out[x] {
            if ma[u] != NONE {
                return b.inc[ma[u]].iter().filter(|&&(l, _)| l == lab).map(|&(_, y)| y).collect();
            }
        }
        for &(lab, u) in &a.inc[x] {
            if ma[u] != NONE {
                return b.out[ma[u]].iter().filter(|&&(l, _)| l == lab).map(|&(_, y)| y).collect();
            }
        }
        by_colour.get(&ca[x]).cloned().unwrap_or_default()
    };
    let consistent = |x: usize, y: usize, ma: &[usize], mb: &[usize]| -> bool {
        if mb[y] != NONE || ca[x] != cb[y] {
            return false;
        }
        for &(lab, u) in &a.out[x] {
            let t = if u == x { y } else { ma[u] };
            if t != NONE && !b.has(y, lab, t) {
                return false;
            }
        }
        for &(lab, u) in &a.inc[x] {
            if u != x && ma[u] != NONE && !b.has(ma[u], lab, y) {
                return false;
            }
        }
        true
    };
    let mut cands: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pos = vec![0usize; n];
    cands[0] = candidates(order[0], &ma);
    let mut level = 0;
    loop {
        if level == n {
            return Some(ma);
        }
        let x = order[level];
        if pos[level] < cands[level].len() {
            let y = cands[level][pos[level]];
            pos[level] += 1;
            if consistent(x, y, &ma, &mb) {
                ma[x] = y;
                mb[y] = x;
                level += 1;
                if level < n {
                    cands[level] = candidates(order[level], &ma);
                    pos[level] = 0;
                }
            }
        } else {
            if level == 0 {
                return None;
            }
            level -= 1;
            let x = order[level];
            mb[ma[x]] = NONE;
            ma[x] = NONE;
        }
    }
}

/// Root- and label-preserving isomorphism `g1 → g2` as a vertex map.
pub fn rooted_iso(g1: &LabelledGraph, g2: &LabelledGraph) -> Option<Vec<VertexId>> {
    if g1.labels != g2.labels || g1.root.is_some() != g2.root.is_some() {
        return None;
    }
    let all1: Vec<_> = (0..g1.num_vertices()).collect();
    let all2: Vec<_> = (0..g2.num_vertices()).collect();
    let a = Sub::from_graph(g1, &all1, |v| (Some(v) == g1.root) as u64);
    let b = Sub::from_graph(g2, &all2, |v| (Some(v) == g2.root) as u64);
    let mut it = Interner::default();
    let (ca, cb) = (it.refine(&a), it.refine(&b));
    find_iso(&a, &b, &ca, &cb)
}

/// A truncated end prepared for comparison.
struct Truncation {
    sub: Sub,
    colours: Vec<u32>,
}

fn truncate(g: &LabelledGraph, comp: &[VertexId], frontier: &[VertexId], depth: usize) -> (Vec<VertexId>, Vec<usize>) {
    let inside: HashMap<VertexId, ()> = comp.iter().map(|&v| (v, ())).collect();
    let mut dist: HashMap<VertexId, usize> = frontier.iter().map(|&v| (v, 0)).collect();
    let mut q: VecDeque<VertexId> = frontier.iter().copied().collect();
    let mut order = frontier.to_vec();
    while let Some(v) = q.pop_front() {
        let dv = dist[&v];
        if dv == depth {
            continue;
        }
        for u in g.neighbours(v) {
            if inside.contains_key(&u) && !dist.contains_key(&u) {
                dist.insert(u, dv + 1);
                order.push(u);
                q.push_back(u);
            }
        }
    }
    let ds = order.iter().map(|v| dist[v]).collect();
    (order, ds)
}

/// Classes of ends Γ(v) for |v| ≤ radius, compared after truncation to
/// vertices within `depth` of the frontier.
#[derive(Debug, Clone, Serialize)]
pub struct EndClassReport {
    pub radius: usize,
    pub depth: usize,
    /// Class per host vertex, `None` beyond the radius.
    pub class_of: Vec<Option<usize>>,
    /// `counts[r]`: number of classes met by vertices with |v| ≤ r.
    pub counts: Vec<usize>,
    /// Frontier size of each new class's first representative.
    pub class_frontiers: Vec<usize>,
    /// Counts constant over the last `window` radii.
    pub stabilized: bool,
    pub window: usize,
}

impl EndClassReport {
    pub fn num_classes(&self) -> usize {
        self.class_frontiers.len()
    }
}

/// Shared state to classify ends from several graphs into common classes.
#[derive(Default)]
pub struct EndClassifier {
    interner: Interner,
    reps: HashMap<Vec<u32>, Vec<(usize, Truncation)>>,
    pub frontier_sizes: Vec<usize>,
}

impl EndClassifier {
    fn classify(&mut self, t: Truncation, frontier: usize) -> usize {
        let sig = signature(&t.colours);
        let bucket = self.reps.entry(sig).or_default();
        for (c, r) in bucket.iter() {
            if find_iso(&r.sub, &t.sub, &r.colours, &t.colours).is_some() {
                return *c;
            }
        }
        let c = self.frontier_sizes.len();
        self.frontier_sizes.push(frontier);
        bucket.push((c, t));
        c
    }

    /// Class of every vertex with |v| ≤ radius in `g`.
    pub fn run(&mut self, g: &LabelledGraph, radius: usize, depth: usize) -> Result<Vec<Option<usize>>, GraphError> {
        let d = g.root_distances()?;
        let n = g.num_vertices();
        let mut class_of = vec![None; n];
        for level in 0..=radius {
            // components of {u : |u| ≥ level}
            let mut comp_id = vec![usize::MAX; n];
            for v in 0..n {
                if d[v] != Some(level) || comp_id[v] != usize::MAX {
                    continue;
                }
                let comp = component_at_level(g, &d, v, level);
                let frontier: Vec<VertexId> = comp.iter().copied().filter(|&u| d[u] == Some(level)).collect();
                let (vs, ds) = truncate(g, &comp, &frontier, depth);
                if vs.iter().any(|&u| g.horizon[u]) {
                    return Err(GraphError::IncompleteEnd { vertex: v, level });
                }
                let pos: HashMap<VertexId, usize> = vs.iter().enumerate().map(|(i, &u)| (u, i)).collect();
                let sub = Sub::from_graph(g, &vs, |u| ds[pos[&u]] as u64);
                let colours = self.interner.refine(&sub);
                let c = self.classify(Truncation { sub, colours }, frontier.len());
                for &u in &frontier {
                    comp_id[u] = 0;
                    class_of[u] = Some(c);
                }
            }
        }
        Ok(class_of)
    }
}

pub fn classify_ends(g: &LabelledGraph, radius: usize, depth: usize) -> Result<EndClassReport, GraphError> {
    let mut cl = EndClassifier::default();
    let class_of = cl.run(g, radius, depth)?;
    let d = g.root_distances()?;
    let mut counts = Vec::with_capacity(radius + 1);
    let mut seen = std::collections::HashSet::new();
    for r in 0..=radius {
        for v in 0..g.num_vertices() {
            if d[v] == Some(r) {
                if let Some(c) = class_of[v] {
                    seen.insert(c);
                }
            }
        }
        counts.push(seen.len());
    }
    let window = 3.min(radius / 2);
    let stabilized = counts.len() > window && counts[counts.len() - 1 - window..].windows(2).all(|w| w[0] == w[1]);
    Ok(EndClassReport { radius, depth, class_of, counts, class_frontiers: cl.frontier_sizes, stabilized, window })
}

/// Whether Γ(u) and Γ(v), truncated to `depth`, are isomorphic by a
/// label-preserving map sending frontier onto frontier.
pub fn end_isomorphic(g1: &LabelledGraph, e1: &EndSpace, g2: &LabelledGraph, e2: &EndSpace, depth: usize) -> Result<bool, GraphError> {
    let mut it = Interner::default();
    let mut prep = |g: &LabelledGraph, e: &EndSpace| -> Result<Truncation, GraphError> {
        let (vs, ds) = truncate(g, &e.component, &e.frontier, depth);
        if vs.iter().any(|&u| g.horizon[u]) {
            return Err(GraphError::IncompleteEnd { vertex: e.base, level: e.level });
        }
        let pos: HashMap<VertexId, usize> = vs.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let sub = Sub::from_graph(g, &vs, |u| ds[pos[&u]] as u64);
        let colours = it.refine(&sub);
        Ok(Truncation { sub, colours })
    };
    let (a, b) = (prep(g1, e1)?, prep(g2, e2)?);
    Ok(g1.labels == g2.labels && find_iso(&a.sub, &b.sub, &a.colours, &b.colours).is_some())
}
