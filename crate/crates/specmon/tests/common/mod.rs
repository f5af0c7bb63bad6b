#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};
use std::path::PathBuf;

use specmon::analysis::group_to_special;
use specmon::{parse_presentation, Budget, Oracle, SpecialPresentation, Word};

pub const FIXTURES: &[&str] = &[
    "bicyclic.mon",
    "abc-ac.mon",
    "babcb.mon",
    "apa-aqa.mon",
    "abc-def.mon",
    "zxz.mon",
    "babcb-bd.mon",
    "b-abc.mon",
    "one-letter.mon",
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn load(name: &str) -> SpecialPresentation {
    let t = fixture_text(name);
    if t.trim_start().starts_with("Gp") {
        group_to_special(&t).unwrap()
    } else {
        parse_presentation(&t).unwrap()
    }
}

pub fn oracle(p: &SpecialPresentation) -> Oracle {
    Oracle::auto(p, 200, 20, Budget::default())
}

/// Plain breadth-first search over relator insertions and deletions,
/// words capped at `max_len`. Shares no code with the library search.
pub fn thue_equal(p: &SpecialPresentation, u: &[u16], v: &[u16], max_len: usize) -> bool {
    if u == v {
        return true;
    }
    let mut seen: HashSet<Word> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(u.to_vec());
    queue.push_back(u.to_vec());
    while let Some(w) = queue.pop_front() {
        for r in &p.relators {
            let mut next = Vec::new();
            if w.len() >= r.len() {
                for i in 0..=w.len() - r.len() {
                    if &w[i..i + r.len()] == r.as_slice() {
                        next.push([&w[..i], &w[i + r.len()..]].concat());
                    }
                }
            }
            if w.len() + r.len() <= max_len {
                for i in 0..=w.len() {
                    next.push([&w[..i], r.as_slice(), &w[i..]].concat());
                }
            }
            for x in next {
                if x == v {
                    return true;
                }
                if seen.insert(x.clone()) {
                    queue.push_back(x);
                }
            }
        }
    }
    false
}

/// `w` is right invertible iff `w·x ↔* ε` for some `x`; tried over all
/// `x` up to `max_x`.
pub fn right_invertible_by_search(p: &SpecialPresentation, w: &[u16], max_x: usize, max_len: usize) -> bool {
    let n = p.alphabet.len() as u16;
    let mut layer: Vec<Word> = vec![Vec::new()];
    for _ in 0..=max_x {
        for x in &layer {
            if thue_equal(p, &[w, x.as_slice()].concat(), &[], max_len) {
                return true;
            }
        }
        layer = layer.iter().flat_map(|x| (0..n).map(move |a| [x.as_slice(), &[a]].concat())).collect();
    }
    false
}

/// Minimal factorisation of a relator into invertible factors: cut after
/// every prefix `u` with suffix `v` such that `v·u ↔* ε`.
pub fn pieces_by_search(p: &SpecialPresentation, max_len: usize) -> Vec<Vec<Word>> {
    p.relators
        .iter()
        .map(|r| {
            let mut cuts = vec![0];
            for k in 1..r.len() {
                let rotated = [&r[k..], &r[..k]].concat();
                if thue_equal(p, &rotated, &[], max_len) {
                    cuts.push(k);
                }
            }
            cuts.push(r.len());
            cuts.windows(2).map(|c| r[c[0]..c[1]].to_vec()).collect()
        })
        .collect()
}

/// `from →* to` using relator deletions only.
pub fn deletes_to(p: &SpecialPresentation, from: &[u16], to: &[u16]) -> bool {
    let mut seen: HashSet<Word> = HashSet::from([from.to_vec()]);
    let mut stack = vec![from.to_vec()];
    while let Some(w) = stack.pop() {
        if w == to {
            return true;
        }
        for r in &p.relators {
            if w.len() < r.len() {
                continue;
            }
            for i in 0..=w.len() - r.len() {
                if &w[i..i + r.len()] == r.as_slice() {
                    let x = [&w[..i], &w[i + r.len()..]].concat();
                    if x.len() >= to.len() && seen.insert(x.clone()) {
                        stack.push(x);
                    }
                }
            }
        }
    }
    false
}

/// Every relator occurrence in `w` as (relator, position).
pub fn occurrences(p: &SpecialPresentation, w: &[u16]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (k, r) in p.relators.iter().enumerate() {
        if w.len() >= r.len() {
            for i in 0..=w.len() - r.len() {
                if &w[i..i + r.len()] == r.as_slice() {
                    out.push((k, i));
                }
            }
        }
    }
    out
}

/// Product of `factors` picked by index, then relator insertions at
/// (relator, position) picks, then deletions of picked occurrences. The
/// result equals the product in M.
pub fn scrambled_product(p: &SpecialPresentation, factors: &[Word], picks: &[usize], inserts: &[(usize, usize)], deletes: &[usize]) -> Word {
    let mut w: Word = picks.iter().flat_map(|&i| factors[i % factors.len()].clone()).collect();
    for &(r, pos) in inserts {
        let r = &p.relators[r % p.relators.len()];
        let at = pos % (w.len() + 1);
        w.splice(at..at, r.iter().copied());
    }
    for &d in deletes {
        let occ = occurrences(p, &w);
        if occ.is_empty() {
            break;
        }
        let (r, i) = occ[d % occ.len()];
        w.drain(i..i + p.relators[r].len());
    }
    w
}
