//! The Schützenberger graph of the units 𝔘: a Cayley ball of the group of
//! units over 𝔅, subdivided along pieces, quotiented by prefix equality
//! and completed with the missing edges.

use std::collections::HashMap;

use serde_json::json;
use thiserror::Error;

use crate::graph::{GraphError, Label, LabelledGraph, VertexId};
use crate::pieces::{compute_unit_presentation, PieceTable};
use crate::presentations::{Letter, SpecialPresentation, Word};
use crate::rewriting::{Decision, Oracle, RewritingSystem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnitsError {
    #[error("cannot decide whether {0:?} and {1:?} are equal")]
    UndecidedEquality(Word, Word),
    #[error("host graph too small: {0}")]
    HorizonTooSmall(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Lookup of unit elements. Keys are normal forms in M when the oracle
/// has a complete system, else normal forms over 𝔅 when the unit
/// presentation completes, else pairwise decisions bucketed by ℤ-images.
struct ElementStore<'a> {
    oracle: &'a Oracle,
    units: Option<RewritingSystem>,
    deletions: RewritingSystem,
    by_key: HashMap<Word, usize>,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
    reps: Vec<Word>,
}

impl<'a> ElementStore<'a> {
    fn new(oracle: &'a Oracle, pt: &PieceTable) -> Self {
        let units = match oracle.system() {
            Some(_) => None,
            None => compute_unit_presentation(pt).complete_system(200, 12).complete(),
        };
        let deletions = RewritingSystem::special(&oracle.presentation);
        ElementStore { oracle, units, deletions, by_key: HashMap::new(), buckets: HashMap::new(), reps: Vec::new() }
    }

    /// Deletes relator occurrences, which never changes the element.
    fn shorten(&self, w: &[Letter]) -> Word {
        self.deletions.normalize(w).expect("deletions terminate")
    }

    fn image(&self, w: &[Letter]) -> Vec<i64> {
        self.oracle.presentation.images.iter().map(|i| i.of(w)).collect()
    }

    fn key(&self, w: &[Letter], bw: &[Letter]) -> Option<Word> {
        match &self.units {
            Some(us) => Some(us.normalize(bw).expect("complete system terminates")),
            None => self.oracle.canonical(w),
        }
    }

    fn find(&self, w: &[Letter], bw: &[Letter]) -> Result<Option<usize>, UnitsError> {
        if let Some(k) = self.key(w, bw) {
            return Ok(self.by_key.get(&k).copied());
        }
        let w = &self.shorten(w);
        for &id in self.buckets.get(&self.image(w)).map(Vec::as_slice).unwrap_or(&[]) {
            match self.oracle.decide(&self.reps[id], w) {
                Decision::Equal => return Ok(Some(id)),
                Decision::NotEqual => {}
                Decision::Unknown => return Err(UnitsError::UndecidedEquality(self.reps[id].clone(), w.to_vec())),
            }
        }
        Ok(None)
    }

    fn find_or_insert(&mut self, w: &[Letter], bw: &[Letter]) -> Result<(usize, bool), UnitsError> {
        if let Some(id) = self.find(w, bw)? {
            return Ok((id, false));
        }
        let id = self.reps.len();
        match self.key(w, bw) {
            Some(k) => {
                self.by_key.insert(k, id);
                self.reps.push(self.oracle.canonical(w).unwrap_or_else(|| self.shorten(w)));
            }
            None => {
                self.buckets.entry(self.image(w)).or_default().push(id);
                self.reps.push(self.shorten(w));
            }
        }
        Ok((id, true))
    }
}

/// Ball of radius `radius` in the undirected Cayley graph of U(M) over 𝔅.
#[derive(Debug, Clone)]
pub struct UnitBall {
    pub graph: LabelledGraph,
    /// Representative word over A for each vertex.
    pub elements: Vec<Word>,
    pub distance: Vec<usize>,
    pub radius: usize,
}

pub fn build_unit_ball(oracle: &Oracle, pt: &PieceTable, radius: usize) -> Result<UnitBall, UnitsError> {
    let p = &oracle.presentation;
    // (λ, λ⁻¹) over A and over 𝔅
    let gens: Vec<[(Word, Word); 2]> = (0..pt.pieces.len())
        .map(|k| [(pt.pieces[k].word.clone(), vec![k as Letter]), (pt.inverse_word(k, p), pt.inverse_b_word(k))])
        .collect();
    let names: Vec<String> = (0..pt.pieces.len()).map(|k| pt.b_name(k)).collect();
    let mut store = ElementStore::new(oracle, pt);
    store.find_or_insert(&[], &[])?;
    let mut bwords: Vec<Word> = vec![Word::new()];
    let mut distance = vec![0];
    let mut i = 0;
    while i < store.reps.len() {
        if distance[i] < radius {
            for pair in &gens {
                for (g, bg) in pair {
                    let mut w = store.reps[i].clone();
                    w.extend_from_slice(g);
                    let mut bw = bwords[i].clone();
                    bw.extend_from_slice(bg);
                    if store.find_or_insert(&w, &bw)?.1 {
                        distance.push(distance[i] + 1);
                        bwords.push(bw);
                    }
                }
            }
        }
        i += 1;
    }
    let mut graph = LabelledGraph::with_vertices(names, store.reps.len());
    for v in 0..store.reps.len() {
        for (k, [(lam, bl), _]) in gens.iter().enumerate() {
            let mut w = store.reps[v].clone();
            w.extend_from_slice(lam);
            let mut bw = bwords[v].clone();
            bw.extend_from_slice(bl);
            if let Some(t) = store.find(&w, &bw)? {
                graph.add_edge(v, k as Label, t);
            }
        }
        graph.horizon[v] = distance[v] == radius;
    }
    graph.root = Some(0);
    Ok(UnitBall { graph, elements: store.reps, distance, radius })
}

/// 𝔘₀, its quotient, or 𝔘 itself: vertex `v` stands for `m·ξ` with
/// `m = element[v]` and `ξ = prefix[v]`.
#[derive(Debug, Clone)]
pub struct UnitsGraph {
    pub graph: LabelledGraph,
    pub element: Vec<usize>,
    pub prefix: Vec<Word>,
    /// The piece a subdivision vertex came from; dropped by the quotient.
    pub piece: Vec<Option<usize>>,
    pub ball: UnitBall,
}

impl UnitsGraph {
    pub fn locally_invertible(&self) -> Vec<VertexId> {
        (0..self.prefix.len()).filter(|&v| self.prefix[v].is_empty()).collect()
    }

    /// The non-locally-invertible vertices.
    pub fn n_set(&self) -> Vec<VertexId> {
        (0..self.prefix.len()).filter(|&v| !self.prefix[v].is_empty()).collect()
    }

    /// ∼_i class of each vertex.
    pub fn class_of(&self) -> &[usize] {
        &self.element
    }

    pub fn vertex_names(&self, p: &SpecialPresentation) -> Vec<String> {
        (0..self.prefix.len()).map(|v| format!("({} ; {})", p.fmt_word(&self.ball.elements[self.element[v]]), p.fmt_word(&self.prefix[v]))).collect()
    }

    pub fn to_json(&self, p: &SpecialPresentation) -> serde_json::Value {
        let mut j = self.graph.to_json();
        j["payload"] = json!((0..self.prefix.len())
            .map(|v| json!({"element": p.fmt_word(&self.ball.elements[self.element[v]]), "prefix": p.fmt_word(&self.prefix[v])}))
            .collect::<Vec<_>>());
        j
    }

    pub fn to_dot(&self, p: &SpecialPresentation) -> String {
        let dot = self.graph.to_dot(Some(&self.vertex_names(p)));
        let mut out = String::new();
        for line in dot.lines() {
            let marked = self.locally_invertible().iter().any(|v| line.starts_with(&format!("  v{v} [")));
            if marked {
                out += &line.replacen('[', "[style=filled, fillcolor=gray, ", 1);
            } else {
                out += line;
            }
            out.push('\n');
        }
        out
    }
}

/// Replaces each 𝔅-edge by a path spelling its piece.
pub fn build_u0(ball: &UnitBall, pt: &PieceTable, letters: Vec<String>) -> UnitsGraph {
    let n = ball.graph.num_vertices();
    let mut g = LabelledGraph::with_vertices(letters, n);
    let mut element: Vec<usize> = (0..n).collect();
    let mut prefix = vec![Word::new(); n];
    let mut piece = vec![None; n];
    for m in 0..n {
        for (k, pc) in pt.pieces.iter().enumerate() {
            let lam = &pc.word;
            let mut cur = m;
            for i in 1..lam.len() {
                let v = g.add_vertex();
                element.push(m);
                prefix.push(lam[..i].to_vec());
                piece.push(Some(k));
                g.add_edge(cur, lam[i - 1], v);
                cur = v;
            }
            if let Some(t) = ball.graph.target(m, k as Label) {
                g.add_edge(cur, *lam.last().unwrap(), t);
            }
        }
    }
    for v in 0..g.num_vertices() {
        g.horizon[v] = ball.graph.horizon[element[v]];
    }
    g.root = Some(0);
    UnitsGraph { graph: g, element, prefix, piece, ball: ball.clone() }
}

fn decide(oracle: &Oracle, u: &[Letter], v: &[Letter]) -> Result<bool, UnitsError> {
    match oracle.decide(u, v) {
        Decision::Equal => Ok(true),
        Decision::NotEqual => Ok(false),
        Decision::Unknown => Err(UnitsError::UndecidedEquality(u.to_vec(), v.to_vec())),
    }
}

/// Classes of 𝔓_ε under equality in M, as (class per word, class leaders).
fn prefix_classes(oracle: &Oracle, pt: &PieceTable) -> Result<(Vec<Word>, Vec<usize>, Vec<usize>), UnitsError> {
    let words = pt.frak_p_eps();
    let mut class = Vec::with_capacity(words.len());
    let mut leaders: Vec<usize> = Vec::new();
    for (i, w) in words.iter().enumerate() {
        let mut found = None;
        for (c, &l) in leaders.iter().enumerate() {
            if decide(oracle, &words[l], w)? {
                found = Some(c);
                break;
            }
        }
        class.push(found.unwrap_or_else(|| {
            leaders.push(i);
            leaders.len() - 1
        }));
    }
    Ok((words, class, leaders))
}

/// Identifies vertices `(m, ξ)` and `(m, ζ)` with ξ and ζ equal in M.
pub fn quotient_sim_m(u0: &UnitsGraph, oracle: &Oracle, pt: &PieceTable) -> Result<UnitsGraph, UnitsError> {
    let (words, class, leaders) = prefix_classes(oracle, pt)?;
    let class_of_word = |w: &Word| class[words.iter().position(|x| x == w).expect("prefix of a piece")];
    let mut g = LabelledGraph::new(u0.graph.labels().to_vec());
    let mut id: HashMap<(usize, usize), VertexId> = HashMap::new();
    let mut map = Vec::with_capacity(u0.prefix.len());
    let (mut element, mut prefix) = (Vec::new(), Vec::new());
    for v in 0..u0.prefix.len() {
        let key = (u0.element[v], class_of_word(&u0.prefix[v]));
        let nv = *id.entry(key).or_insert_with(|| {
            element.push(key.0);
            prefix.push(words[leaders[key.1]].clone());
            g.add_vertex()
        });
        g.horizon[nv] |= u0.graph.horizon[v];
        map.push(nv);
    }
    for (a, l, b) in u0.graph.edges() {
        g.add_edge(map[a], l, map[b]);
    }
    g.root = u0.graph.root.map(|r| map[r]);
    let n = prefix.len();
    Ok(UnitsGraph { graph: g, element, prefix, piece: vec![None; n], ball: u0.ball.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Prefix(usize),
    Piece(usize),
}

/// Adds `(m, ξ) —a→ (m, ζ)` whenever `ξa = ζ` in M for ζ ∈ 𝔓, and
/// `(m, ξ) —a→ (m·λ, ε)` whenever `ξa = λ` for a piece λ. The rule is the
/// same in every ∼_i class.
pub fn add_missing_edges(u: &UnitsGraph, oracle: &Oracle, pt: &PieceTable) -> Result<UnitsGraph, UnitsError> {
    let nletters = oracle.presentation.alphabet.len();
    let mut reps: Vec<Word> = Vec::new();
    for w in &u.prefix {
        if !reps.contains(w) {
            reps.push(w.clone());
        }
    }
    let mut table: HashMap<(usize, Letter), Step> = HashMap::new();
    for (c, xi) in reps.iter().enumerate() {
        for a in 0..nletters as Letter {
            let mut w = xi.clone();
            w.push(a);
            let mut step = None;
            for (c2, zeta) in reps.iter().enumerate() {
                if !zeta.is_empty() && decide(oracle, &w, zeta)? {
                    step = Some(Step::Prefix(c2));
                    break;
                }
            }
            if step.is_none() {
                for (k, pc) in pt.pieces.iter().enumerate() {
                    if decide(oracle, &w, &pc.word)? {
                        step = Some(Step::Piece(k));
                        break;
                    }
                }
            }
            if let Some(s) = step {
                table.insert((c, a), s);
            }
        }
    }
    let mut out = u.clone();
    let index: HashMap<(usize, usize), VertexId> =
        (0..u.prefix.len()).map(|v| ((u.element[v], reps.iter().position(|x| x == &u.prefix[v]).unwrap()), v)).collect();
    for v in 0..u.prefix.len() {
        let c = reps.iter().position(|x| x == &u.prefix[v]).unwrap();
        for a in 0..nletters as Letter {
            match table.get(&(c, a)) {
                Some(Step::Prefix(c2)) => {
                    if let Some(&t) = index.get(&(u.element[v], *c2)) {
                        out.graph.add_edge(v, a, t);
                    }
                }
                Some(Step::Piece(k)) => {
                    if let Some(m2) = u.ball.graph.target(u.element[v], *k as Label) {
                        out.graph.add_edge(v, a, index[&(m2, 0)]);
                    }
                }
                None => {}
            }
        }
    }
    Ok(out)
}

/// 𝔘 over the unit ball of the given radius.
pub fn build_units_graph(oracle: &Oracle, pt: &PieceTable, unit_radius: usize) -> Result<UnitsGraph, UnitsError> {
    let ball = build_unit_ball(oracle, pt, unit_radius)?;
    let u0 = build_u0(&ball, pt, oracle.presentation.alphabet.names().to_vec());
    let q = quotient_sim_m(&u0, oracle, pt)?;
    add_missing_edges(&q, oracle, pt)
}

/// 𝔘 with a hair `a` to a fresh tip wherever a vertex away from the
/// horizon has no outgoing `a`-edge. Returns the graph and the tip flags.
pub fn hairy(u: &UnitsGraph) -> (LabelledGraph, Vec<bool>) {
    let mut g = u.graph.clone();
    let n = g.num_vertices();
    let nletters = g.labels().len();
    let mut tip = vec![false; n];
    for v in 0..n {
        if u.graph.horizon[v] {
            continue;
        }
        for a in 0..nletters as Label {
            if u.graph.target(v, a).is_none() {
                let t = g.add_vertex();
                tip.push(true);
                g.add_edge(v, a, t);
            }
        }
    }
    (g, tip)
}

/// Checks that `(m, ξ) ↦ m·ξ` maps 𝔘 injectively onto an induced subgraph
/// of a ball of ℜ₁. The map is found by walking edges from the root; a
/// backward step needs a unique predecessor in the ball.
pub fn embed_in_r1_check(u: &UnitsGraph, r1: &LabelledGraph) -> Result<bool, UnitsError> {
    embed_graph_check(&u.graph, r1)
}

/// [`embed_in_r1_check`] for any rooted graph over the letters, such as a
/// ball of 𝔘.
pub fn embed_graph_check(ug: &LabelledGraph, r1: &LabelledGraph) -> Result<bool, UnitsError> {
    let (ur, rr) = match (ug.root, r1.root) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(UnitsError::Graph(GraphError::NoRoot)),
    };
    let n = ug.num_vertices();
    let mut map = vec![usize::MAX; n];
    map[ur] = rr;
    let mut q = std::collections::VecDeque::from([ur]);
    while let Some(v) = q.pop_front() {
        let x = map[v];
        for &(a, w) in ug.out_edges(v) {
            if map[w] == usize::MAX {
                if let Some(y) = r1.target(x, a) {
                    map[w] = y;
                    q.push_back(w);
                }
            }
        }
        for &(a, w) in ug.in_edges(v) {
            if map[w] == usize::MAX {
                let preds: Vec<_> = r1.in_edges(x).iter().filter(|&&(l, _)| l == a).collect();
                if preds.len() == 1 {
                    map[w] = preds[0].1;
                    q.push_back(w);
                }
            }
        }
    }
    if let Some(v) = (0..n).find(|&v| map[v] == usize::MAX && !ug.horizon[v]) {
        return Err(UnitsError::HorizonTooSmall(format!("vertex {v} of the units graph has no image")));
    }
    let mut inverse: HashMap<usize, VertexId> = HashMap::new();
    for v in 0..n {
        if map[v] != usize::MAX && inverse.insert(map[v], v).is_some() {
            return Ok(false);
        }
    }
    for (a, l, b) in ug.edges() {
        if map[a] != usize::MAX && map[b] != usize::MAX && !r1.has_edge(map[a], l, map[b]) {
            return Ok(false);
        }
    }
    for v in 0..n {
        if map[v] == usize::MAX || ug.horizon[v] || r1.horizon[map[v]] {
            continue;
        }
        for &(l, y) in r1.out_edges(map[v]) {
            if let Some(&w) = inverse.get(&y) {
                if !ug.has_edge(v, l, w) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
