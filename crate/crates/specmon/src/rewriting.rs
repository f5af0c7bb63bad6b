//! String rewriting for special presentations: shortlex reduction,
//! Knuth–Bendix completion with derivation tracking, bounded congruence
//! search, the word problem, and common ancestors of derivations.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presentations::{Letter, SpecialPresentation, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("normalization exceeded {0} steps")]
    StepOverflow(usize),
    #[error("derivation longer than {0} steps")]
    DerivationTooLong(usize),
    #[error("strategy requires a complete rewriting system")]
    NotComplete,
    #[error("invalid derivation at step {step}: {reason}")]
    InvalidDerivation { step: usize, reason: String },
}

pub const DEFAULT_STEP_LIMIT: usize = 1_000_000;

/// Longest derivation built while normalizing or completing.
pub const WITNESS_STEP_LIMIT: usize = 20_000;

/// Shortlex comparison under a letter ranking.
pub fn shortlex_cmp(u: &[Letter], v: &[Letter], rank: &[usize]) -> Ordering {
    u.len().cmp(&v.len()).then_with(|| {
        for (a, b) in u.iter().zip(v) {
            match rank[*a as usize].cmp(&rank[*b as usize]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    })
}

pub fn contains_factor(w: &[Letter], f: &[Letter]) -> bool {
    f.is_empty() || w.windows(f.len()).any(|x| x == f)
}

pub fn find_factor(w: &[Letter], f: &[Letter], from: usize) -> Option<usize> {
    if f.len() > w.len() {
        return None;
    }
    (from..=w.len() - f.len()).find(|&i| &w[i..i + f.len()] == f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Rewrites the right side of a relation into its left side
    /// (inserts the relator for special relations).
    Insert,
    /// Rewrites the left side into the right side (deletes the relator).
    Delete,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Insert => Direction::Delete,
            Direction::Delete => Direction::Insert,
        }
    }
}

/// One elementary step; `word` is the word after the step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub word: Word,
    pub direction: Direction,
    pub relator: usize,
    pub position: usize,
}

/// A chain of elementary steps witnessing `start ↔* end`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub start: Word,
    pub steps: Vec<Step>,
}

/// Relations of a special presentation as (R_i, ε) pairs.
pub fn special_relations(p: &SpecialPresentation) -> Vec<(Word, Word)> {
    p.relators.iter().map(|r| (r.clone(), Word::new())).collect()
}

fn apply_step(w: &[Letter], dir: Direction, rel: &(Word, Word), pos: usize) -> Option<Word> {
    let (from, to) = match dir {
        Direction::Delete => (&rel.0, &rel.1),
        Direction::Insert => (&rel.1, &rel.0),
    };
    if pos + from.len() > w.len() || &w[pos..pos + from.len()] != from.as_slice() {
        return None;
    }
    let mut out = Vec::with_capacity(w.len() + to.len() - from.len().min(w.len() + to.len()));
    out.extend_from_slice(&w[..pos]);
    out.extend_from_slice(to);
    out.extend_from_slice(&w[pos + from.len()..]);
    Some(out)
}

impl Derivation {
    pub fn trivial(w: &[Letter]) -> Self {
        Derivation { start: w.to_vec(), steps: Vec::new() }
    }

    pub fn end(&self) -> &Word {
        self.steps.last().map(|s| &s.word).unwrap_or(&self.start)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Words visited, start included.
    pub fn words(&self) -> impl Iterator<Item = &Word> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.word))
    }

    pub fn replay(&self, relations: &[(Word, Word)]) -> Result<(), RewriteError> {
        let mut cur = self.start.clone();
        for (k, s) in self.steps.iter().enumerate() {
            let rel = relations.get(s.relator).ok_or_else(|| RewriteError::InvalidDerivation {
                step: k,
                reason: format!("no relation {}", s.relator),
            })?;
            let next = apply_step(&cur, s.direction, rel, s.position).ok_or_else(|| RewriteError::InvalidDerivation {
                step: k,
                reason: format!("relation {} does not occur at position {}", s.relator, s.position),
            })?;
            if next != s.word {
                return Err(RewriteError::InvalidDerivation { step: k, reason: "recorded word differs from replay".into() });
            }
            cur = next;
        }
        Ok(())
    }

    pub fn replay_in(&self, p: &SpecialPresentation) -> Result<(), RewriteError> {
        self.replay(&special_relations(p))
    }

    pub fn reversed(&self) -> Derivation {
        let words: Vec<&Word> = self.words().collect();
        let mut steps = Vec::with_capacity(self.steps.len());
        for k in (0..self.steps.len()).rev() {
            let s = &self.steps[k];
            steps.push(Step { word: words[k].clone(), direction: s.direction.flip(), relator: s.relator, position: s.position });
        }
        Derivation { start: self.end().clone(), steps }
    }

    pub fn then(mut self, other: Derivation) -> Derivation {
        assert_eq!(self.end(), &other.start, "derivations do not compose");
        self.steps.extend(other.steps);
        self
    }

    /// The same steps performed inside `prefix · _ · suffix`.
    pub fn lifted(&self, prefix: &[Letter], suffix: &[Letter]) -> Derivation {
        let wrap = |w: &Word| {
            let mut x = Vec::with_capacity(prefix.len() + w.len() + suffix.len());
            x.extend_from_slice(prefix);
            x.extend_from_slice(w);
            x.extend_from_slice(suffix);
            x
        };
        Derivation {
            start: wrap(&self.start),
            steps: self
                .steps
                .iter()
                .map(|s| Step { word: wrap(&s.word), direction: s.direction, relator: s.relator, position: s.position + prefix.len() })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rule {
    pub lhs: Word,
    pub rhs: Word,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Completeness {
    Yes,
    No,
    Unknown,
}

/// Ordered rules plus, for each rule, a derivation `lhs ↔* rhs` over the
/// base relations.
#[derive(Debug, Clone)]
pub struct RewritingSystem {
    rules: Vec<Rule>,
    witnesses: Vec<Derivation>,
    relations: Vec<(Word, Word)>,
    rank: Vec<usize>,
    by_last: Vec<Vec<usize>>,
    pub complete: Completeness,
    pub step_limit: usize,
}

impl RewritingSystem {
    /// The special system {R_i → ε} under the alphabet order.
    pub fn special(p: &SpecialPresentation) -> Self {
        Self::from_relations(p.alphabet.len(), special_relations(p), None)
    }

    /// Orients each relation (ℓ, r) under shortlex. `order` lists the
    /// letters from smallest to largest; `None` means alphabet order.
    pub fn from_relations(num_letters: usize, relations: Vec<(Word, Word)>, order: Option<&[Letter]>) -> Self {
        let rank = match order {
            Some(o) => {
                let mut rank = vec![0; num_letters];
                for (i, &l) in o.iter().enumerate() {
                    rank[l as usize] = i;
                }
                rank
            }
            None => (0..num_letters).collect(),
        };
        let mut rs = RewritingSystem {
            rules: Vec::new(),
            witnesses: Vec::new(),
            relations: relations.clone(),
            rank,
            by_last: vec![Vec::new(); num_letters],
            complete: Completeness::Unknown,
            step_limit: DEFAULT_STEP_LIMIT,
        };
        for (i, (l, r)) in relations.iter().enumerate() {
            let step = Step { word: r.clone(), direction: Direction::Delete, relator: i, position: 0 };
            let d = Derivation { start: l.clone(), steps: vec![step] };
            match shortlex_cmp(l, r, &rs.rank) {
                Ordering::Greater => rs.rules.push(Rule { lhs: l.clone(), rhs: r.clone() }),
                Ordering::Less => {
                    rs.rules.push(Rule { lhs: r.clone(), rhs: l.clone() });
                    rs.witnesses.push(d.reversed());
                    continue;
                }
                Ordering::Equal => continue,
            }
            rs.witnesses.push(d);
        }
        rs.reindex();
        rs
    }

    fn reindex(&mut self) {
        for v in &mut self.by_last {
            v.clear();
        }
        for (i, r) in self.rules.iter().enumerate() {
            self.by_last[*r.lhs.last().expect("nonempty lhs") as usize].push(i);
        }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn witness(&self, i: usize) -> &Derivation {
        &self.witnesses[i]
    }

    pub fn relations(&self) -> &[(Word, Word)] {
        &self.relations
    }

    pub fn rank(&self) -> &[usize] {
        &self.rank
    }

    pub fn num_letters(&self) -> usize {
        self.rank.len()
    }

    pub fn is_complete(&self) -> bool {
        self.complete == Completeness::Yes
    }

    pub fn is_irreducible(&self, w: &[Letter]) -> bool {
        (1..=w.len()).all(|end| {
            self.by_last[w[end - 1] as usize].iter().all(|&ri| !w[..end].ends_with(&self.rules[ri].lhs))
        })
    }

    /// True if appending nothing to an irreducible `w[..n-1]` keeps it
    /// irreducible, i.e. no lhs is a suffix of `w`.
    pub fn suffix_irreducible(&self, w: &[Letter]) -> bool {
        match w.last() {
            None => true,
            Some(&x) => self.by_last[x as usize].iter().all(|&ri| !w.ends_with(&self.rules[ri].lhs)),
        }
    }

    /// Normal form by a stack-based strategy: the prefix already scanned is
    /// kept irreducible, so any new redex is a suffix.
    pub fn normalize(&self, w: &[Letter]) -> Result<Word, RewriteError> {
        let mut out: Word = Vec::with_capacity(w.len());
        let mut input: Word = w.iter().rev().copied().collect();
        let mut steps = 0usize;
        while let Some(x) = input.pop() {
            out.push(x);
            for &ri in &self.by_last[x as usize] {
                let r = &self.rules[ri];
                if out.ends_with(&r.lhs) {
                    out.truncate(out.len() - r.lhs.len());
                    input.extend(r.rhs.iter().rev());
                    steps += 1;
                    if steps > self.step_limit {
                        return Err(RewriteError::StepOverflow(self.step_limit));
                    }
                    break;
                }
            }
        }
        Ok(out)
    }

    /// `nf(u · x)` for an irreducible `u`.
    pub fn append(&self, u: &[Letter], x: &[Letter]) -> Word {
        let mut w = u.to_vec();
        w.extend_from_slice(x);
        self.normalize(&w).expect("normalization within step limit")
    }

    /// Leftmost reduction to normal form with the relation-level derivation.
    pub fn normalize_with_derivation(&self, w: &[Letter]) -> Result<(Word, Derivation), RewriteError> {
        let mut d = Derivation::trivial(w);
        let mut cur = w.to_vec();
        let mut steps = 0;
        while let Some((next, pos, ri)) = reduce_once(&cur, self) {
            if d.len() + self.witnesses[ri].len() > WITNESS_STEP_LIMIT {
                return Err(RewriteError::DerivationTooLong(WITNESS_STEP_LIMIT));
            }
            let lhs_len = self.rules[ri].lhs.len();
            let piece = self.witnesses[ri].lifted(&cur[..pos], &cur[pos + lhs_len..]);
            debug_assert_eq!(piece.end(), &next);
            d = d.then(piece);
            cur = next;
            steps += 1;
            if steps > self.step_limit {
                return Err(RewriteError::StepOverflow(self.step_limit));
            }
        }
        Ok((cur, d))
    }

    pub fn to_json(&self, p: &SpecialPresentation) -> serde_json::Value {
        serde_json::json!({
            "complete": self.complete,
            "rules": self.rules.iter().map(|r| serde_json::json!([p.fmt_word(&r.lhs), p.fmt_word(&r.rhs)])).collect::<Vec<_>>(),
        })
    }
}

/// Rewrites the leftmost redex (lowest rule index on ties). Returns the new
/// word, the position and the rule index.
pub fn reduce_once(w: &[Letter], rs: &RewritingSystem) -> Option<(Word, usize, usize)> {
    for pos in 0..w.len() {
        for (ri, r) in rs.rules.iter().enumerate() {
            if w[pos..].starts_with(&r.lhs) {
                let mut out = w[..pos].to_vec();
                out.extend_from_slice(&r.rhs);
                out.extend_from_slice(&w[pos + r.lhs.len()..]);
                return Some((out, pos, ri));
            }
        }
    }
    None
}

pub fn normalize(w: &[Letter], rs: &RewritingSystem) -> Result<Word, RewriteError> {
    rs.normalize(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OverlapKind {
    /// A suffix of the first lhs of this length is a prefix of the second.
    Overlap { shared: usize },
    /// The second lhs occurs in the first at this position.
    Inclusion { position: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriticalPair {
    pub overlap: Word,
    pub left: Word,
    pub right: Word,
    pub first_rule: usize,
    pub second_rule: usize,
    pub kind: OverlapKind,
}

pub fn critical_pairs(rs: &RewritingSystem) -> Vec<CriticalPair> {
    let mut out = Vec::new();
    let rules = &rs.rules;
    for (i, ri) in rules.iter().enumerate() {
        for (j, rj) in rules.iter().enumerate() {
            let (li, lj) = (&ri.lhs, &rj.lhs);
            for k in 1..li.len().min(lj.len()) {
                if li[li.len() - k..] == lj[..k] {
                    let mut overlap = li.clone();
                    overlap.extend_from_slice(&lj[k..]);
                    let mut left = ri.rhs.clone();
                    left.extend_from_slice(&lj[k..]);
                    let mut right = li[..li.len() - k].to_vec();
                    right.extend_from_slice(&rj.rhs);
                    out.push(CriticalPair { overlap, left, right, first_rule: i, second_rule: j, kind: OverlapKind::Overlap { shared: k } });
                }
            }
            if i != j && lj.len() <= li.len() {
                let mut from = 0;
                while let Some(pos) = find_factor(li, lj, from) {
                    let mut right = li[..pos].to_vec();
                    right.extend_from_slice(&rj.rhs);
                    right.extend_from_slice(&li[pos + lj.len()..]);
                    out.push(CriticalPair {
                        overlap: li.clone(),
                        left: ri.rhs.clone(),
                        right,
                        first_rule: i,
                        second_rule: j,
                        kind: OverlapKind::Inclusion { position: pos },
                    });
                    from = pos + 1;
                }
            }
        }
    }
    out
}

fn pair_derivation(rs: &RewritingSystem, cp: &CriticalPair) -> Derivation {
    let (li, lj) = (&rs.rules[cp.first_rule].lhs, &rs.rules[cp.second_rule].lhs);
    let (dl, dr) = match cp.kind {
        OverlapKind::Overlap { shared } => (
            rs.witnesses[cp.first_rule].lifted(&[], &lj[shared..]),
            rs.witnesses[cp.second_rule].lifted(&li[..li.len() - shared], &[]),
        ),
        OverlapKind::Inclusion { position } => (
            rs.witnesses[cp.first_rule].clone(),
            rs.witnesses[cp.second_rule].lifted(&li[..position], &li[position + lj.len()..]),
        ),
    };
    dl.reversed().then(dr)
}

#[derive(Debug, Clone)]
pub enum CompletionResult {
    Complete(RewritingSystem),
    Partial { system: RewritingSystem, unresolved: Vec<(Word, Word)> },
}

impl CompletionResult {
    pub fn system(&self) -> &RewritingSystem {
        match self {
            CompletionResult::Complete(s) => s,
            CompletionResult::Partial { system, .. } => system,
        }
    }

    pub fn complete(self) -> Option<RewritingSystem> {
        match self {
            CompletionResult::Complete(s) => Some(s),
            CompletionResult::Partial { .. } => None,
        }
    }
}

/// Knuth–Bendix completion under the system's shortlex order. Every rule
/// produced keeps a derivation over the original relations. Gives up with
/// a partial system once a derivation would exceed [`WITNESS_STEP_LIMIT`].
pub fn knuth_bendix(rs: &RewritingSystem, max_rules: usize, max_lhs_len: usize) -> CompletionResult {
    let mut sys = rs.clone();
    let mut pending: VecDeque<(Word, Word, Derivation)> = VecDeque::new();
    for (r, w) in sys.rules.drain(..).zip(sys.witnesses.drain(..)) {
        pending.push_back((r.lhs, r.rhs, w));
    }
    sys.reindex();
    let mut unresolved: Vec<(Word, Word)> = Vec::new();
    let partial = |mut sys: RewritingSystem, unresolved: Vec<(Word, Word)>| {
        sys.complete = Completeness::Unknown;
        CompletionResult::Partial { system: sys, unresolved }
    };
    loop {
        let mut new_rules = 0;
        while let Some((u, v, d)) = pending.pop_front() {
            let (Ok((nu, du)), Ok((nv, dv))) = (sys.normalize_with_derivation(&u), sys.normalize_with_derivation(&v)) else {
                unresolved.push((u, v));
                unresolved.extend(pending.into_iter().map(|(a, b, _)| (a, b)));
                return partial(sys, unresolved);
            };
            if nu == nv {
                continue;
            }
            let d2 = du.reversed().then(d).then(dv);
            let (lhs, rhs, w) = match shortlex_cmp(&nu, &nv, &sys.rank) {
                Ordering::Greater => (nu, nv, d2),
                Ordering::Less => (nv, nu, d2.reversed()),
                Ordering::Equal => unreachable!("shortlex is total on distinct words"),
            };
            if lhs.len() > max_lhs_len {
                unresolved.push((lhs, rhs));
                continue;
            }
            if w.len() > WITNESS_STEP_LIMIT {
                unresolved.push((lhs, rhs));
                unresolved.extend(pending.into_iter().map(|(a, b, _)| (a, b)));
                return partial(sys, unresolved);
            }
            let mut keep_rules = Vec::new();
            let mut keep_w = Vec::new();
            for (r, wi) in sys.rules.drain(..).zip(sys.witnesses.drain(..)) {
                if contains_factor(&r.lhs, &lhs) {
                    pending.push_back((r.lhs, r.rhs, wi));
                } else {
                    keep_rules.push(r);
                    keep_w.push(wi);
                }
            }
            sys.rules = keep_rules;
            sys.witnesses = keep_w;
            sys.rules.push(Rule { lhs, rhs });
            sys.witnesses.push(w);
            new_rules += 1;
            sys.reindex();
            for k in 0..sys.rules.len() {
                if !sys.is_irreducible(&sys.rules[k].rhs) {
                    let Ok((nr, dr)) = sys.normalize_with_derivation(&sys.rules[k].rhs) else {
                        unresolved.extend(pending.into_iter().map(|(a, b, _)| (a, b)));
                        return partial(sys, unresolved);
                    };
                    let wk = sys.witnesses[k].clone().then(dr);
                    sys.rules[k].rhs = nr;
                    sys.witnesses[k] = wk;
                }
            }
            if sys.witnesses.iter().any(|w| w.len() > WITNESS_STEP_LIMIT) {
                unresolved.extend(pending.into_iter().map(|(a, b, _)| (a, b)));
                return partial(sys, unresolved);
            }
            if sys.rules.len() > max_rules {
                unresolved.extend(pending.into_iter().map(|(a, b, _)| (a, b)));
                return partial(sys, unresolved);
            }
        }
        // Only over-long pairs left: their critical pairs would recur.
        if new_rules == 0 && !unresolved.is_empty() {
            return partial(sys, unresolved);
        }
        let mut added = false;
        for cp in critical_pairs(&sys) {
            let l = sys.normalize(&cp.left).expect("terminating system");
            let r = sys.normalize(&cp.right).expect("terminating system");
            if l != r {
                let d = pair_derivation(&sys, &cp);
                pending.push_back((cp.left, cp.right, d));
                added = true;
            }
        }
        if !added {
            break;
        }
    }
    if unresolved.is_empty() {
        sys.complete = Completeness::Yes;
        CompletionResult::Complete(sys)
    } else {
        partial(sys, unresolved)
    }
}

/// Budget for bounded congruence search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_len: usize,
    pub max_steps: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_len: 12, max_steps: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Refutation {
    NormalForms(Word, Word),
    Image { image: usize, left: i64, right: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum EqualityVerdict {
    Equal(Derivation),
    NotEqual(Refutation),
    Unknown { explored: usize },
}

impl EqualityVerdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, EqualityVerdict::Equal(_))
    }
}

const SEARCH_STATE_CAP: usize = 4_000_000;

struct SearchSide {
    nodes: Vec<(Word, usize, Direction, usize, usize)>,
    index: HashMap<Word, usize>,
    frontier: Vec<usize>,
}

impl SearchSide {
    fn new(w: &[Letter]) -> Self {
        let mut index = HashMap::new();
        index.insert(w.to_vec(), 0);
        SearchSide { nodes: vec![(w.to_vec(), usize::MAX, Direction::Delete, 0, 0)], index, frontier: vec![0] }
    }

    /// Steps from the root to node `i`.
    fn path_to(&self, mut i: usize) -> Vec<usize> {
        let mut path = Vec::new();
        while i != 0 {
            path.push(i);
            i = self.nodes[i].1;
        }
        path.reverse();
        path
    }
}

fn for_each_neighbor(w: &[Letter], p: &SpecialPresentation, max_len: usize, mut f: impl FnMut(Word, Direction, usize, usize)) {
    for (i, r) in p.relators.iter().enumerate() {
        let mut from = 0;
        while let Some(pos) = find_factor(w, r, from) {
            let mut x = w[..pos].to_vec();
            x.extend_from_slice(&w[pos + r.len()..]);
            f(x, Direction::Delete, i, pos);
            from = pos + 1;
        }
    }
    for (i, r) in p.relators.iter().enumerate() {
        if w.len() + r.len() > max_len {
            continue;
        }
        for pos in 0..=w.len() {
            let mut x = Vec::with_capacity(w.len() + r.len());
            x.extend_from_slice(&w[..pos]);
            x.extend_from_slice(r);
            x.extend_from_slice(&w[pos..]);
            f(x, Direction::Insert, i, pos);
        }
    }
}

/// Bidirectional breadth-first search over relator insertions and
/// deletions. Words longer than `max_len` are pruned and derivations are at
/// most `max_steps` long. Never reports `NotEqual`.
pub fn congruence_search(u: &[Letter], v: &[Letter], p: &SpecialPresentation, max_len: usize, max_steps: usize) -> EqualityVerdict {
    if u == v {
        return EqualityVerdict::Equal(Derivation::trivial(u));
    }
    let mut sides = [SearchSide::new(u), SearchSide::new(v)];
    let mut depth = [0usize; 2];
    while depth[0] + depth[1] < max_steps {
        let s = if sides[0].frontier.is_empty() || sides[1].frontier.is_empty() {
            break;
        } else if sides[0].frontier.len() <= sides[1].frontier.len() {
            0
        } else {
            1
        };
        let frontier = std::mem::take(&mut sides[s].frontier);
        let mut next = Vec::new();
        let mut meet = None;
        'outer: for &ni in &frontier {
            let w = sides[s].nodes[ni].0.clone();
            let mut found = Vec::new();
            for_each_neighbor(&w, p, max_len, |x, dir, rel, pos| found.push((x, dir, rel, pos)));
            for (x, dir, rel, pos) in found {
                if sides[s].index.contains_key(&x) {
                    continue;
                }
                let id = sides[s].nodes.len();
                sides[s].index.insert(x.clone(), id);
                sides[s].nodes.push((x.clone(), ni, dir, rel, pos));
                next.push(id);
                if let Some(&other) = sides[1 - s].index.get(&x) {
                    meet = Some((id, other));
                    break 'outer;
                }
            }
        }
        if let Some((mine, other)) = meet {
            let (ia, ib) = if s == 0 { (mine, other) } else { (other, mine) };
            let mut d = Derivation::trivial(u);
            for k in sides[0].path_to(ia) {
                let (w, _, dir, rel, pos) = &sides[0].nodes[k];
                d.steps.push(Step { word: w.clone(), direction: *dir, relator: *rel, position: *pos });
            }
            let mut k = ib;
            while k != 0 {
                let (_, parent, dir, rel, pos) = sides[1].nodes[k].clone();
                let pw = sides[1].nodes[parent].0.clone();
                d.steps.push(Step { word: pw, direction: dir.flip(), relator: rel, position: pos });
                k = parent;
            }
            return EqualityVerdict::Equal(d);
        }
        sides[s].frontier = next;
        depth[s] += 1;
        if sides[0].nodes.len() + sides[1].nodes.len() > SEARCH_STATE_CAP {
            break;
        }
    }
    EqualityVerdict::Unknown { explored: sides[0].nodes.len() + sides[1].nodes.len() }
}

#[derive(Debug, Clone)]
pub enum Strategy {
    Complete(RewritingSystem),
    Bounded(Budget),
}

pub fn word_problem(u: &[Letter], v: &[Letter], p: &SpecialPresentation, strategy: &Strategy) -> Result<EqualityVerdict, RewriteError> {
    match strategy {
        Strategy::Complete(rs) => {
            if !rs.is_complete() {
                return Err(RewriteError::NotComplete);
            }
            let (nu, du) = rs.normalize_with_derivation(u)?;
            let (nv, dv) = rs.normalize_with_derivation(v)?;
            if nu == nv {
                Ok(EqualityVerdict::Equal(du.then(dv.reversed())))
            } else {
                Ok(EqualityVerdict::NotEqual(Refutation::NormalForms(nu, nv)))
            }
        }
        Strategy::Bounded(b) => Ok(congruence_search(u, v, p, b.max_len, b.max_steps)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Decision {
    Equal,
    NotEqual,
    Unknown,
}

/// Equality decisions for one presentation: normal forms when a complete
/// system is at hand, otherwise bounded search backed by ℤ-image refutation.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub presentation: SpecialPresentation,
    pub strategy: Strategy,
}

impl Oracle {
    pub fn new(p: &SpecialPresentation, strategy: Strategy) -> Self {
        Oracle { presentation: p.clone(), strategy }
    }

    /// Runs completion within the given limits and falls back to bounded
    /// search when it does not finish.
    /// Letter orders tried: alphabet order, reversed, and the two halves
    /// of the alphabet interleaved (`a,b,ā,b̄` becomes `a,ā,b,b̄`). All
    /// orders are tried with small limits before the given ones.
    pub fn auto(p: &SpecialPresentation, max_rules: usize, max_lhs_len: usize, fallback: Budget) -> Self {
        let n = p.alphabet.len();
        let id: Vec<Letter> = (0..n as Letter).collect();
        let rev: Vec<Letter> = id.iter().rev().copied().collect();
        let half = n.div_ceil(2);
        let inter: Vec<Letter> = (0..half).flat_map(|i| [i, i + half]).filter(|&i| i < n).map(|i| i as Letter).collect();
        let mut orders = vec![id];
        for o in [rev, inter] {
            if !orders.contains(&o) {
                orders.push(o);
            }
        }
        let small = (max_rules.min(40), max_lhs_len.min(8));
        for (rules, lhs) in [small, (max_rules, max_lhs_len)] {
            for o in &orders {
                let rs = RewritingSystem::from_relations(n, special_relations(p), Some(o));
                if let CompletionResult::Complete(rs) = knuth_bendix(&rs, rules, lhs) {
                    return Oracle::new(p, Strategy::Complete(rs));
                }
            }
            if (rules, lhs) == (max_rules, max_lhs_len) {
                break;
            }
        }
        Oracle::new(p, Strategy::Bounded(fallback))
    }

    pub fn bounded(p: &SpecialPresentation, budget: Budget) -> Self {
        Oracle::new(p, Strategy::Bounded(budget))
    }

    pub fn system(&self) -> Option<&RewritingSystem> {
        match &self.strategy {
            Strategy::Complete(rs) if rs.is_complete() => Some(rs),
            _ => None,
        }
    }

    /// Canonical representative, available only with a complete system.
    pub fn canonical(&self, w: &[Letter]) -> Option<Word> {
        self.system().map(|rs| rs.normalize(w).expect("complete system terminates"))
    }

    pub fn decide(&self, u: &[Letter], v: &[Letter]) -> Decision {
        if let Some(rs) = self.system() {
            return if rs.normalize(u) == rs.normalize(v) { Decision::Equal } else { Decision::NotEqual };
        }
        if self.presentation.separating_image(u, v).is_some() {
            return Decision::NotEqual;
        }
        match &self.strategy {
            Strategy::Bounded(b) => match congruence_search(u, v, &self.presentation, b.max_len, b.max_steps) {
                EqualityVerdict::Equal(_) => Decision::Equal,
                _ => Decision::Unknown,
            },
            Strategy::Complete(_) => Decision::Unknown,
        }
    }

    /// Like [`word_problem`], with image refutation added after an
    /// inconclusive bounded search.
    pub fn verdict(&self, u: &[Letter], v: &[Letter]) -> EqualityVerdict {
        let strategy = match (&self.strategy, self.system()) {
            (Strategy::Complete(_), None) => Strategy::Bounded(Budget::default()),
            (s, _) => s.clone(),
        };
        let v0 = match word_problem(u, v, &self.presentation, &strategy) {
            Ok(x) => x,
            // equal normal forms whose derivation is too long to keep
            Err(_) => match (self.canonical(u), self.canonical(v)) {
                (Some(nu), Some(nv)) if nu != nv => EqualityVerdict::NotEqual(Refutation::NormalForms(nu, nv)),
                _ => {
                    let b = Budget::default();
                    congruence_search(u, v, &self.presentation, b.max_len, b.max_steps)
                }
            },
        };
        if let EqualityVerdict::Unknown { .. } = v0 {
            if let Some((image, left, right)) = self.presentation.separating_image(u, v) {
                return EqualityVerdict::NotEqual(Refutation::Image { image, left, right });
            }
        }
        v0
    }
}

/// Builds a word W that reduces to both ends of `d` by relator deletions:
/// every inserted relator is spliced into W, and deletions only drop letters
/// from the tracked embedding of the current word into W.
pub fn common_ancestor(d: &Derivation, p: &SpecialPresentation) -> Result<Word, RewriteError> {
    d.replay_in(p)?;
    let mut big = d.start.clone();
    let mut emb: Vec<usize> = (0..big.len()).collect();
    for (k, s) in d.steps.iter().enumerate() {
        let r = &p.relators[s.relator];
        match s.direction {
            Direction::Insert => {
                let at = if s.position < emb.len() { emb[s.position] } else { big.len() };
                big.splice(at..at, r.iter().copied());
                for e in emb.iter_mut() {
                    if *e >= at {
                        *e += r.len();
                    }
                }
                let fresh: Vec<usize> = (at..at + r.len()).collect();
                emb.splice(s.position..s.position, fresh);
            }
            Direction::Delete => {
                if s.position + r.len() > emb.len() {
                    return Err(RewriteError::InvalidDerivation { step: k, reason: "deletion out of range".into() });
                }
                emb.drain(s.position..s.position + r.len());
            }
        }
        debug_assert_eq!(emb.iter().map(|&i| big[i]).collect::<Word>(), s.word);
    }
    Ok(big)
}

/// Searches for a deletion-only derivation `from →* to`.
pub fn deletion_path(from: &[Letter], to: &[Letter], p: &SpecialPresentation) -> Option<Derivation> {
    let mut parent: HashMap<Word, (Word, usize, usize)> = HashMap::new();
    let mut seen: HashSet<Word> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(from.to_vec());
    queue.push_back(from.to_vec());
    while let Some(w) = queue.pop_front() {
        if w == to {
            let mut steps = Vec::new();
            let mut cur = w;
            while let Some((prev, rel, pos)) = parent.get(&cur) {
                steps.push(Step { word: cur.clone(), direction: Direction::Delete, relator: *rel, position: *pos });
                cur = prev.clone();
            }
            steps.reverse();
            return Some(Derivation { start: from.to_vec(), steps });
        }
        if w.len() <= to.len() {
            continue;
        }
        for (i, r) in p.relators.iter().enumerate() {
            let mut at = 0;
            while let Some(pos) = find_factor(&w, r, at) {
                let mut x = w[..pos].to_vec();
                x.extend_from_slice(&w[pos + r.len()..]);
                if x.len() >= to.len() && seen.insert(x.clone()) {
                    parent.insert(x.clone(), (w.clone(), i, pos));
                    queue.push_back(x);
                }
                at = pos + 1;
            }
        }
    }
    None
}
