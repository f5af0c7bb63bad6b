//! Rational-subset membership, the context-freeness probe and conversion
//! of group presentations to special monoid presentations.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::graph::{classify_ends, EndClassReport, LabelledGraph};
use crate::pieces::PieceTable;
use crate::presentations::{is_combining, Alphabet, Letter, SpecialPresentation, Word};
use crate::rewriting::{Derivation, EqualityVerdict, Oracle};
use crate::schutz::{cayley_ball, stephen_ball};
use crate::units::build_units_graph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("automaton: {0}")]
    Nfa(String),
    #[error("regular expression, offset {pos}: {msg}")]
    Regex { pos: usize, msg: String },
    #[error("group presentation, offset {pos}: {msg}")]
    Group { pos: usize, msg: String },
}

/// Nondeterministic automaton without ε-transitions over letter indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    pub num_states: usize,
    pub transitions: Vec<(usize, Letter, usize)>,
    pub initial: Vec<usize>,
    pub accepting: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct NfaJson {
    alphabet: Vec<String>,
    states: usize,
    initial: Vec<usize>,
    accepting: Vec<usize>,
    transitions: Vec<(usize, String, usize)>,
}

impl Nfa {
    pub fn new(num_states: usize, transitions: Vec<(usize, Letter, usize)>, initial: Vec<usize>, accepting: Vec<usize>) -> Result<Self, AnalysisError> {
        let bad = |s: usize| s >= num_states;
        if transitions.iter().any(|&(p, _, q)| bad(p) || bad(q)) || initial.iter().copied().any(bad) || accepting.iter().copied().any(bad) {
            return Err(AnalysisError::Nfa("state out of range".into()));
        }
        Ok(Nfa { num_states, transitions, initial, accepting })
    }

    /// Letters are matched by name against `alphabet`; the automaton's
    /// own alphabet list must be a subset of it.
    pub fn from_json(text: &str, alphabet: &Alphabet) -> Result<Self, AnalysisError> {
        let j: NfaJson = serde_json::from_str(text).map_err(|e| AnalysisError::Nfa(e.to_string()))?;
        let look = |n: &str| alphabet.index(n).ok_or_else(|| AnalysisError::Nfa(format!("unknown letter `{n}`")));
        for a in &j.alphabet {
            look(a)?;
        }
        let mut ts = Vec::new();
        for (p, a, q) in &j.transitions {
            if !j.alphabet.contains(a) {
                return Err(AnalysisError::Nfa(format!("letter `{a}` not declared")));
            }
            ts.push((*p, look(a)?, *q));
        }
        Nfa::new(j.states, ts, j.initial, j.accepting)
    }

    pub fn to_json(&self, alphabet: &Alphabet) -> serde_json::Value {
        let mut used: Vec<Letter> = self.transitions.iter().map(|t| t.1).collect();
        used.sort_unstable();
        used.dedup();
        let j = NfaJson {
            alphabet: used.iter().map(|&a| alphabet.name(a).to_string()).collect(),
            states: self.num_states,
            initial: self.initial.clone(),
            accepting: self.accepting.clone(),
            transitions: self.transitions.iter().map(|&(p, a, q)| (p, alphabet.name(a).to_string(), q)).collect(),
        };
        serde_json::to_value(j).unwrap()
    }

    fn delta(&self) -> HashMap<(usize, Letter), Vec<usize>> {
        let mut m: HashMap<(usize, Letter), Vec<usize>> = HashMap::new();
        for &(p, a, q) in &self.transitions {
            m.entry((p, a)).or_default().push(q);
        }
        m
    }

    pub fn accepts(&self, w: &[Letter]) -> bool {
        let delta = self.delta();
        let mut cur: HashSet<usize> = self.initial.iter().copied().collect();
        for &a in w {
            cur = cur.iter().flat_map(|&p| delta.get(&(p, a)).into_iter().flatten().copied()).collect();
        }
        self.accepting.iter().any(|q| cur.contains(q))
    }

    /// Compiles concatenation, `|`, `*`, parentheses and `ε` over the
    /// letters of `alphabet`.
    pub fn from_regex(re: &str, alphabet: &Alphabet) -> Result<Self, AnalysisError> {
        let toks = lex_regex(re, alphabet)?;
        let mut b = Thompson { eps: Vec::new(), sym: Vec::new(), n: 0 };
        let mut i = 0;
        let (s, f) = b.alt(&toks, &mut i)?;
        if i < toks.len() {
            return Err(AnalysisError::Regex { pos: toks[i].1, msg: "unbalanced `)`".into() });
        }
        Ok(b.remove_eps(s, f))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RTok {
    Letter(Letter),
    Eps,
    Open,
    Close,
    Bar,
    Star,
}

fn lex_regex(s: &str, alphabet: &Alphabet) -> Result<Vec<(RTok, usize)>, AnalysisError> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        let tok = match c {
            _ if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => RTok::Open,
            ')' => RTok::Close,
            '|' => RTok::Bar,
            '*' => RTok::Star,
            'ε' => RTok::Eps,
            '[' => {
                let end = cs[i..].iter().position(|&d| d == ']').ok_or(AnalysisError::Regex { pos: i, msg: "unterminated `[`".into() })?;
                let name: String = cs[i + 1..i + end].iter().collect();
                let l = alphabet.index(&name).ok_or(AnalysisError::Regex { pos: i, msg: format!("unknown letter `{name}`") })?;
                out.push((RTok::Letter(l), i));
                i += end + 1;
                continue;
            }
            _ => {
                let mut j = i + 1;
                while j < cs.len() && is_combining(cs[j]) {
                    j += 1;
                }
                let name: String = cs[i..j].iter().collect();
                let l = alphabet.index(&name).ok_or(AnalysisError::Regex { pos: i, msg: format!("unknown letter `{name}`") })?;
                out.push((RTok::Letter(l), i));
                i = j;
                continue;
            }
        };
        out.push((tok, i));
        i += 1;
    }
    Ok(out)
}

struct Thompson {
    eps: Vec<(usize, usize)>,
    sym: Vec<(usize, Letter, usize)>,
    n: usize,
}

impl Thompson {
    fn state(&mut self) -> usize {
        self.n += 1;
        self.n - 1
    }

    fn alt(&mut self, t: &[(RTok, usize)], i: &mut usize) -> Result<(usize, usize), AnalysisError> {
        let mut parts = vec![self.concat(t, i)?];
        while t.get(*i).map(|x| x.0) == Some(RTok::Bar) {
            *i += 1;
            parts.push(self.concat(t, i)?);
        }
        if parts.len() == 1 {
            return Ok(parts[0]);
        }
        let (s, f) = (self.state(), self.state());
        for (ps, pf) in parts {
            self.eps.push((s, ps));
            self.eps.push((pf, f));
        }
        Ok((s, f))
    }

    fn concat(&mut self, t: &[(RTok, usize)], i: &mut usize) -> Result<(usize, usize), AnalysisError> {
        let s = self.state();
        let mut cur = s;
        while let Some(&(tok, pos)) = t.get(*i) {
            let (fs, ff) = match tok {
                RTok::Bar | RTok::Close => break,
                RTok::Star => return Err(AnalysisError::Regex { pos, msg: "`*` without operand".into() }),
                RTok::Eps => {
                    *i += 1;
                    continue;
                }
                RTok::Letter(a) => {
                    *i += 1;
                    let (x, y) = (self.state(), self.state());
                    self.sym.push((x, a, y));
                    (x, y)
                }
                RTok::Open => {
                    *i += 1;
                    let fr = self.alt(t, i)?;
                    if t.get(*i).map(|x| x.0) != Some(RTok::Close) {
                        return Err(AnalysisError::Regex { pos, msg: "unclosed `(`".into() });
                    }
                    *i += 1;
                    fr
                }
            };
            let (mut fs, mut ff) = (fs, ff);
            while t.get(*i).map(|x| x.0) == Some(RTok::Star) {
                *i += 1;
                let (s2, f2) = (self.state(), self.state());
                self.eps.extend([(s2, fs), (ff, f2), (s2, f2), (ff, fs)]);
                (fs, ff) = (s2, f2);
            }
            self.eps.push((cur, fs));
            cur = ff;
        }
        Ok((s, cur))
    }

    fn remove_eps(&self, start: usize, fin: usize) -> Nfa {
        let mut eps_out: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for &(p, q) in &self.eps {
            eps_out[p].push(q);
        }
        let closure = |p: usize| {
            let mut seen = vec![false; self.n];
            let mut st = vec![p];
            seen[p] = true;
            while let Some(x) = st.pop() {
                for &y in &eps_out[x] {
                    if !seen[y] {
                        seen[y] = true;
                        st.push(y);
                    }
                }
            }
            seen
        };
        // Keep only the start state and targets of letter transitions.
        let mut keep: Vec<usize> = vec![start];
        keep.extend(self.sym.iter().map(|t| t.2));
        keep.sort_unstable();
        keep.dedup();
        let id: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut transitions = Vec::new();
        let mut accepting = Vec::new();
        for &p in &keep {
            let cl = closure(p);
            if cl[fin] {
                accepting.push(id[&p]);
            }
            for &(x, a, y) in &self.sym {
                if cl[x] {
                    transitions.push((id[&p], a, id[&y]));
                }
            }
        }
        transitions.sort_unstable();
        transitions.dedup();
        Nfa { num_states: keep.len(), transitions, initial: vec![id[&start]], accepting }
    }
}

#[derive(Debug, Clone)]
pub enum MembershipResult {
    /// `witness` is accepted and `derivation` leads from it to the query.
    Yes { witness: Word, derivation: Derivation },
    /// Nothing found among elements within `radius`; elements further
    /// out are unexplored.
    NoWithinBound { radius: usize },
    Aborted { left: Word, right: Word },
}

impl MembershipResult {
    pub fn to_json(&self, p: &SpecialPresentation) -> serde_json::Value {
        match self {
            MembershipResult::Yes { witness, derivation } => serde_json::json!({
                "status": "Yes",
                "witness": p.fmt_word(witness),
                "derivation": derivation.words().map(|w| p.fmt_word(w)).collect::<Vec<_>>(),
            }),
            MembershipResult::NoWithinBound { radius } => serde_json::json!({ "status": "NoWithinBound", "radius": radius }),
            MembershipResult::Aborted { left, right } => serde_json::json!({
                "status": "Aborted", "undecided": [p.fmt_word(left), p.fmt_word(right)],
            }),
        }
    }
}

/// Searches π(L) ∋ π(w) over pairs (element, automaton state). With a
/// complete system the elements are the vertices of the Cayley ball of the
/// given radius; otherwise words of length at most `radius` are compared
/// with the oracle one by one.
pub fn rational_member(oracle: &Oracle, nfa: &Nfa, w: &[Letter], radius: usize) -> MembershipResult {
    let delta = nfa.delta();
    let accepting: HashSet<usize> = nfa.accepting.iter().copied().collect();
    let Some(rs) = oracle.system() else {
        return bounded_member(oracle, nfa, &delta, &accepting, w, radius);
    };
    let ball = cayley_ball(oracle, radius).expect("complete system");
    let target = rs.normalize(w).expect("complete system terminates");
    let Some(&tv) = ball.index.get(&target) else {
        return MembershipResult::NoWithinBound { radius };
    };
    let g = &ball.graph;
    let mut parent: HashMap<(usize, usize), Option<((usize, usize), Letter)>> = HashMap::new();
    let mut q = VecDeque::new();
    for &s in &nfa.initial {
        if parent.insert((0, s), None).is_none() {
            q.push_back((0, s));
        }
    }
    while let Some((v, s)) = q.pop_front() {
        if v == tv && accepting.contains(&s) {
            let mut witness = Vec::new();
            let mut cur = (v, s);
            while let Some(Some((prev, a))) = parent.get(&cur) {
                witness.push(*a);
                cur = *prev;
            }
            witness.reverse();
            return match (rs.normalize_with_derivation(&witness), rs.normalize_with_derivation(w)) {
                (Ok((_, d1)), Ok((_, d2))) => MembershipResult::Yes { witness, derivation: d1.then(d2.reversed()) },
                // no derivation within the step limit to show for it
                _ => MembershipResult::Aborted { left: witness, right: w.to_vec() },
            };
        }
        for &(a, t) in g.out_edges(v) {
            for &s2 in delta.get(&(s, a)).into_iter().flatten() {
                if let std::collections::hash_map::Entry::Vacant(e) = parent.entry((t, s2)) {
                    e.insert(Some(((v, s), a)));
                    q.push_back((t, s2));
                }
            }
        }
    }
    MembershipResult::NoWithinBound { radius }
}

fn bounded_member(
    oracle: &Oracle,
    nfa: &Nfa,
    delta: &HashMap<(usize, Letter), Vec<usize>>,
    accepting: &HashSet<usize>,
    w: &[Letter],
    radius: usize,
) -> MembershipResult {
    let mut seen: HashSet<(Word, usize)> = HashSet::new();
    let mut layer: Vec<(Word, usize)> = nfa.initial.iter().map(|&s| (Vec::new(), s)).collect();
    let mut undecided = None;
    let mut checked: HashSet<Word> = HashSet::new();
    for len in 0..=radius {
        for (x, s) in &layer {
            if accepting.contains(s) && checked.insert(x.clone()) {
                match oracle.verdict(x, w) {
                    EqualityVerdict::Equal(d) => return MembershipResult::Yes { witness: x.clone(), derivation: d },
                    EqualityVerdict::NotEqual(_) => {}
                    EqualityVerdict::Unknown { .. } => {
                        undecided.get_or_insert((x.clone(), w.to_vec()));
                    }
                }
            }
        }
        if len == radius {
            break;
        }
        let mut next = Vec::new();
        for (x, s) in &layer {
            for (&(p, a), ts) in delta {
                if p != *s {
                    continue;
                }
                for &t in ts {
                    let mut y = x.clone();
                    y.push(a);
                    if seen.insert((y.clone(), t)) {
                        next.push((y, t));
                    }
                }
            }
        }
        layer = next;
    }
    match undecided {
        Some((left, right)) => MembershipResult::Aborted { left, right },
        None => MembershipResult::NoWithinBound { radius },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SubProbe {
    pub graph: &'static str,
    pub report: Option<EndClassReport>,
    pub error: Option<String>,
}

impl SubProbe {
    fn new(graph: &'static str, r: Result<EndClassReport, String>) -> Self {
        match r {
            Ok(report) => SubProbe { graph, report: Some(report), error: None },
            Err(e) => SubProbe { graph, report: None, error: Some(e) },
        }
    }

    pub fn stabilized(&self) -> Option<bool> {
        self.report.as_ref().map(|r| r.stabilized)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProbeVerdict {
    ConsistentWithContextFree,
    InconsistentAtThisScale,
    /// The graphs disagree on stabilization.
    Disagreement,
    /// No sub-probe could run.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub radius: usize,
    pub depth: usize,
    pub probes: Vec<SubProbe>,
    pub verdict: ProbeVerdict,
}

fn probe_graph(g: &LabelledGraph, radius: usize, depth: usize) -> Result<EndClassReport, String> {
    classify_ends(g, radius, depth).map_err(|e| e.to_string())
}

/// End classes of the Cayley graph, of 𝔘 and of ℜ₁ up to `radius`, each
/// host built far enough out that truncations to `depth` are complete.
pub fn context_free_probe(oracle: &Oracle, pt: &PieceTable, radius: usize, depth: usize) -> ProbeReport {
    let host = radius + depth + 1;
    let p = &oracle.presentation;
    let cay = cayley_ball(oracle, host).map_err(|e| e.to_string()).and_then(|b| probe_graph(&b.graph, radius, depth));
    let units = build_units_graph(oracle, pt, host)
        .map_err(|e| e.to_string())
        .and_then(|u| probe_graph(&u.graph, radius, depth));
    let st = stephen_ball(p, host, 2).map_err(|e| e.to_string()).and_then(|b| probe_graph(&b.graph, radius, depth));
    let probes = vec![SubProbe::new("cayley", cay), SubProbe::new("units", units), SubProbe::new("schutzenberger", st)];
    let s: Vec<bool> = probes.iter().filter_map(SubProbe::stabilized).collect();
    let verdict = if s.is_empty() {
        ProbeVerdict::Inconclusive
    } else if s.iter().all(|&x| x) {
        ProbeVerdict::ConsistentWithContextFree
    } else if s.iter().all(|&x| !x) {
        ProbeVerdict::InconsistentAtThisScale
    } else {
        ProbeVerdict::Disagreement
    };
    ProbeReport { radius, depth, probes, verdict }
}

/// Name of the formal inverse of a generator.
pub fn inverse_name(name: &str) -> String {
    format!("{name}\u{0304}").nfc().collect()
}

struct GroupParser<'a> {
    cs: Vec<char>,
    i: usize,
    gens: &'a [String],
}

type GWord = Vec<(usize, bool)>;

fn g_inverse(w: &GWord) -> GWord {
    w.iter().rev().map(|&(g, inv)| (g, !inv)).collect()
}

impl GroupParser<'_> {
    fn err(&self, msg: impl Into<String>) -> AnalysisError {
        AnalysisError::Group { pos: self.i, msg: msg.into() }
    }

    fn peek(&self) -> Option<char> {
        self.cs.get(self.i).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.i += 1;
        }
    }

    /// Word up to one of `stop` or the end.
    fn word(&mut self, stop: &[char]) -> Result<GWord, AnalysisError> {
        let mut w = GWord::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None => return Ok(w),
                Some(c) if stop.contains(&c) => return Ok(w),
                Some('1') | Some('ε') => {
                    self.i += 1;
                }
                Some(_) => {
                    let a = self.atom()?;
                    let a = self.suffixes(a)?;
                    w.extend(a);
                }
            }
        }
    }

    fn atom(&mut self) -> Result<GWord, AnalysisError> {
        match self.peek() {
            Some('(') => {
                self.i += 1;
                let w = self.word(&[')'])?;
                self.expect(')')?;
                Ok(w)
            }
            Some('[') => {
                let close = self.cs[self.i..].iter().position(|&c| c == ']').ok_or_else(|| self.err("unterminated `[`"))?;
                if self.cs[self.i..self.i + close].contains(&',') {
                    self.i += 1;
                    let u = self.word(&[','])?;
                    self.expect(',')?;
                    let v = self.word(&[']'])?;
                    self.expect(']')?;
                    let mut w = u.clone();
                    w.extend(v.iter().copied());
                    w.extend(g_inverse(&u));
                    w.extend(g_inverse(&v));
                    Ok(w)
                } else {
                    let name: String = self.cs[self.i + 1..self.i + close].iter().collect();
                    self.i += close + 1;
                    self.generator(&name)
                }
            }
            Some(c) => {
                let mut name = c.to_string();
                self.i += 1;
                while self.peek().is_some_and(is_combining) {
                    name.push(self.cs[self.i]);
                    self.i += 1;
                }
                self.generator(&name)
            }
            None => Err(self.err("unexpected end")),
        }
    }

    fn generator(&self, name: &str) -> Result<GWord, AnalysisError> {
        let g = self.gens.iter().position(|x| x == name).ok_or_else(|| self.err(format!("unknown generator `{name}`")))?;
        Ok(vec![(g, false)])
    }

    fn suffixes(&mut self, mut w: GWord) -> Result<GWord, AnalysisError> {
        loop {
            match self.peek() {
                Some('⁻') => {
                    self.i += 1;
                    self.expect('¹')?;
                    w = g_inverse(&w);
                }
                Some('^') => {
                    self.i += 1;
                    let neg = self.peek() == Some('-');
                    if neg {
                        self.i += 1;
                    }
                    let start = self.i;
                    while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        self.i += 1;
                    }
                    let n: usize = self.cs[start..self.i].iter().collect::<String>().parse().map_err(|_| self.err("expected exponent"))?;
                    let base = if neg { g_inverse(&w) } else { w.clone() };
                    w = base.iter().copied().cycle().take(base.len() * n).collect();
                }
                _ => return Ok(w),
            }
        }
    }

    fn expect(&mut self, c: char) -> Result<(), AnalysisError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.i += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }
}

/// `Gp<a, b | r₁, r₂, …>` to the special presentation over the generators
/// and their formal inverses with relators `xx̄, x̄x` followed by the
/// rewritten relators. Accepts `x^-1`, `x⁻¹`, `x^n`, `[u,v]` and `u = v`.
pub fn group_to_special(text: &str) -> Result<SpecialPresentation, AnalysisError> {
    let t = text.trim();
    let body = t
        .strip_prefix("Gp")
        .map(str::trim_start)
        .and_then(|s| s.strip_prefix('<'))
        .and_then(|s| s.trim_end().strip_suffix('>'))
        .ok_or(AnalysisError::Group { pos: 0, msg: "expected `Gp<…>`".into() })?;
    let (gen_part, rel_part) = body.split_once('|').unwrap_or((body, ""));
    let gens: Vec<String> = gen_part.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
    let mut names = gens.clone();
    names.extend(gens.iter().map(|g| inverse_name(g)));
    let alphabet = Alphabet::new(names).map_err(|e| AnalysisError::Group { pos: 0, msg: e.to_string() })?;
    let k = gens.len();
    let letter = |(g, inv): (usize, bool)| (if inv { g + k } else { g }) as Letter;
    let mut relators: Vec<Word> = Vec::new();
    for g in 0..k {
        relators.push(vec![g as Letter, (g + k) as Letter]);
        relators.push(vec![(g + k) as Letter, g as Letter]);
    }
    let mut parser = GroupParser { cs: rel_part.chars().collect(), i: 0, gens: &gens };
    loop {
        parser.skip_ws();
        if parser.peek().is_none() {
            break;
        }
        let mut w = parser.word(&[',', '='])?;
        if parser.peek() == Some('=') {
            parser.i += 1;
            let v = parser.word(&[','])?;
            w.extend(g_inverse(&v));
        }
        // free reduction
        let mut red: GWord = Vec::new();
        for x in w {
            if red.last().is_some_and(|&(g, inv)| g == x.0 && inv != x.1) {
                red.pop();
            } else {
                red.push(x);
            }
        }
        if !red.is_empty() {
            relators.push(red.into_iter().map(letter).collect());
        }
        if parser.peek() == Some(',') {
            parser.i += 1;
        }
    }
    SpecialPresentation::new(alphabet, relators, None).map_err(|e| AnalysisError::Group { pos: 0, msg: e.to_string() })
}
