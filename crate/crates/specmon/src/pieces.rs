//! Invertible pieces of relators, their Δ-classes, prefix sets and the
//! induced presentation of the group of units.

use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::presentations::{Alphabet, Letter, SpecialPresentation, Word};
use crate::rewriting::{knuth_bendix, CompletionResult, Derivation, Direction, EqualityVerdict, Oracle, Refutation, RewritingSystem, Step};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PieceError {
    #[error("cannot decide invertibility of the prefix of relator {relator} of length {position}")]
    UndecidedCut { relator: usize, position: usize },
    #[error("cannot decide whether pieces {first} and {second} are equal")]
    UndecidedClass { first: usize, second: usize },
    #[error("pieces are not a biprefix code: {0:?} and {1:?}")]
    BiprefixViolation(Word, Word),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum InvertibilityVerdict {
    /// `u·inverse ↔* ε` by `right` and `inverse·u ↔* ε` by `left`.
    Invertible { inverse: Word, right: Derivation, left: Derivation },
    NotInvertible(Refutation),
    NotCertified,
}

fn deletion_of(p: &SpecialPresentation, w: &[Letter]) -> Option<Derivation> {
    let i = p.relators.iter().position(|r| r == w)?;
    Some(Derivation { start: w.to_vec(), steps: vec![Step { word: Word::new(), direction: Direction::Delete, relator: i, position: 0 }] })
}

fn to_empty(oracle: &Oracle, w: &[Letter]) -> EqualityVerdict {
    match deletion_of(&oracle.presentation, w) {
        Some(d) => EqualityVerdict::Equal(d),
        None if w.is_empty() => EqualityVerdict::Equal(Derivation::trivial(w)),
        None => oracle.verdict(w, &[]),
    }
}

/// Decides whether `relator[..cut]` is invertible. Writing the relator as
/// `u·s`, `u` is invertible exactly when `s·u ↔* ε`.
pub fn is_invertible_prefix(relator: &[Letter], cut: usize, oracle: &Oracle) -> InvertibilityVerdict {
    assert!(cut >= 1 && cut <= relator.len(), "cut out of range");
    let (u, s) = relator.split_at(cut);
    let right = match to_empty(oracle, relator) {
        EqualityVerdict::Equal(d) => d,
        EqualityVerdict::NotEqual(r) => return InvertibilityVerdict::NotInvertible(r),
        EqualityVerdict::Unknown { .. } => return InvertibilityVerdict::NotCertified,
    };
    let su: Word = s.iter().chain(u).copied().collect();
    match to_empty(oracle, &su) {
        EqualityVerdict::Equal(left) => InvertibilityVerdict::Invertible { inverse: s.to_vec(), right, left },
        EqualityVerdict::NotEqual(r) => InvertibilityVerdict::NotInvertible(r),
        EqualityVerdict::Unknown { .. } => InvertibilityVerdict::NotCertified,
    }
}

/// Splits relator `i` into its minimal invertible factors, taking the
/// shortest invertible prefix of what remains at each stage.
pub fn factor_relator(i: usize, oracle: &Oracle) -> Result<Vec<Word>, PieceError> {
    let r = &oracle.presentation.relators[i];
    let mut out = Vec::new();
    let mut start = 0;
    while start < r.len() {
        let mut next = None;
        for end in start + 1..=r.len() {
            match is_invertible_prefix(r, end, oracle) {
                InvertibilityVerdict::Invertible { .. } => {
                    next = Some(end);
                    break;
                }
                InvertibilityVerdict::NotInvertible(_) => {}
                InvertibilityVerdict::NotCertified => return Err(PieceError::UndecidedCut { relator: i, position: end }),
            }
        }
        let end = next.expect("the whole relator is invertible");
        out.push(r[start..end].to_vec());
        start = end;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Piece {
    pub word: Word,
    /// (relator, factor) positions, both 0-based.
    pub occurrences: Vec<(usize, usize)>,
    /// Δ-class, 0-based.
    pub class: usize,
    /// Position inside its class, 0-based.
    pub index: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PieceTable {
    pub factorizations: Vec<Vec<Word>>,
    /// Λ in order of first appearance.
    pub pieces: Vec<Piece>,
    pub classes: Vec<Vec<usize>>,
    /// For each non-leading member of a class, a derivation from the
    /// class leader to it.
    pub class_witnesses: Vec<(usize, usize, Derivation)>,
    /// Ξ ordered by piece, then by prefix length.
    pub xi: Vec<Word>,
    /// 𝔓 = Ξ \ Λ in the same order.
    pub frak_p: Vec<Word>,
}

pub fn compute_piece_table(oracle: &Oracle) -> Result<PieceTable, PieceError> {
    let p = &oracle.presentation;
    let mut factorizations = Vec::new();
    let mut pieces: Vec<Piece> = Vec::new();
    for i in 0..p.relators.len() {
        let f = factor_relator(i, oracle)?;
        for (j, w) in f.iter().enumerate() {
            match pieces.iter_mut().find(|x| &x.word == w) {
                Some(x) => x.occurrences.push((i, j)),
                None => pieces.push(Piece { word: w.clone(), occurrences: vec![(i, j)], class: 0, index: 0 }),
            }
        }
        factorizations.push(f);
    }
    let words: Vec<Word> = pieces.iter().map(|x| x.word.clone()).collect();
    if let Err((a, b)) = check_biprefix(&words) {
        return Err(PieceError::BiprefixViolation(a, b));
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut class_witnesses = Vec::new();
    for k in 0..pieces.len() {
        let mut placed = false;
        for (c, members) in classes.iter_mut().enumerate() {
            let lead = members[0];
            match oracle.verdict(&pieces[lead].word, &pieces[k].word) {
                EqualityVerdict::Equal(d) => {
                    pieces[k].class = c;
                    pieces[k].index = members.len();
                    members.push(k);
                    class_witnesses.push((lead, k, d));
                    placed = true;
                    break;
                }
                EqualityVerdict::NotEqual(_) => {}
                EqualityVerdict::Unknown { .. } => return Err(PieceError::UndecidedClass { first: lead, second: k }),
            }
        }
        if !placed {
            pieces[k].class = classes.len();
            pieces[k].index = 0;
            classes.push(vec![k]);
        }
    }
    let mut xi: Vec<Word> = Vec::new();
    for w in &words {
        for n in 1..=w.len() {
            if !xi.iter().any(|x| x.as_slice() == &w[..n]) {
                xi.push(w[..n].to_vec());
            }
        }
    }
    let frak_p = xi.iter().filter(|x| !words.contains(x)).cloned().collect();
    Ok(PieceTable { factorizations, pieces, classes, class_witnesses, xi, frak_p })
}

impl PieceTable {
    pub fn kappa(&self) -> usize {
        self.classes.len()
    }

    pub fn piece_words(&self) -> Vec<Word> {
        self.pieces.iter().map(|x| x.word.clone()).collect()
    }

    pub fn piece_index(&self, w: &[Letter]) -> Option<usize> {
        self.pieces.iter().position(|x| x.word == w)
    }

    pub fn prefix_index(&self, w: &[Letter]) -> Option<usize> {
        self.frak_p.iter().position(|x| x == w)
    }

    /// 𝔓 with ε in front.
    pub fn frak_p_eps(&self) -> Vec<Word> {
        std::iter::once(Word::new()).chain(self.frak_p.iter().cloned()).collect()
    }

    /// Name of the 𝔅 generator for piece `k`, 1-based as `b{class}_{index}`.
    pub fn b_name(&self, k: usize) -> String {
        format!("b{}_{}", self.pieces[k].class + 1, self.pieces[k].index + 1)
    }

    /// For a piece λ occurring as `R = PλQ`, the word `QP`.
    pub fn inverse_word(&self, k: usize, p: &SpecialPresentation) -> Word {
        let (i, j) = self.pieces[k].occurrences[0];
        let f = &self.factorizations[i];
        let start: usize = f[..j].iter().map(Vec::len).sum();
        let r = &p.relators[i];
        r[start + f[j].len()..].iter().chain(&r[..start]).copied().collect()
    }

    /// The inverse word of piece `k` as a product of generators.
    pub fn inverse_b_word(&self, k: usize) -> Word {
        let (i, j) = self.pieces[k].occurrences[0];
        let f = &self.factorizations[i];
        f[j + 1..].iter().chain(&f[..j]).map(|w| self.piece_index(w).unwrap() as Letter).collect()
    }

    /// For ξ a prefix of a piece λ = ξη, the right inverse η·λ⁻¹. Takes the
    /// first piece having ξ as a prefix.
    pub fn right_inverse(&self, xi: &[Letter], p: &SpecialPresentation) -> Option<Word> {
        let k = self.pieces.iter().position(|x| x.word.starts_with(xi))?;
        let mut w = self.pieces[k].word[xi.len()..].to_vec();
        w.extend(self.inverse_word(k, p));
        Some(w)
    }

    /// Whether `w` parses as a product of elements of Ξ.
    pub fn in_xi_star(&self, w: &[Letter]) -> bool {
        let mut ok = vec![false; w.len() + 1];
        ok[0] = true;
        for i in 0..w.len() {
            if !ok[i] {
                continue;
            }
            for x in &self.xi {
                if w[i..].starts_with(x) {
                    ok[i + x.len()] = true;
                }
            }
        }
        ok[w.len()]
    }

    pub fn to_json(&self, p: &SpecialPresentation) -> serde_json::Value {
        json!({
            "pieces": self.pieces.iter().enumerate().map(|(k, x)| json!({
                "word": p.fmt_word(&x.word),
                "name": self.b_name(k),
                "class": x.class + 1,
                "index": x.index + 1,
                "occurrences": x.occurrences.iter().map(|(i, j)| [i + 1, j + 1]).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "factorizations": self.factorizations.iter().map(|f| f.iter().map(|w| p.fmt_word(w)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "classes": self.classes.iter().map(|c| c.iter().map(|&k| p.fmt_word(&self.pieces[k].word)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "kappa": self.kappa(),
            "xi": self.xi.iter().map(|w| p.fmt_word(w)).collect::<Vec<_>>(),
            "frak_p": self.frak_p.iter().map(|w| p.fmt_word(w)).collect::<Vec<_>>(),
        })
    }
}

/// Presentation of the group of units over 𝔅: one generator per piece,
/// equalities inside each Δ-class, and every 𝔅-word over a cyclic
/// permutation of a relator's class word set equal to 1.
#[derive(Debug, Clone, Serialize)]
pub struct UnitPresentation {
    pub alphabet: Alphabet,
    pub class_of: Vec<usize>,
    pub equalities: Vec<(Letter, Letter)>,
    pub relators: Vec<Word>,
    /// Generator to piece word.
    pub chi: Vec<Word>,
}

pub fn compute_unit_presentation(pt: &PieceTable) -> UnitPresentation {
    let names: Vec<String> = (0..pt.pieces.len()).map(|k| pt.b_name(k)).collect();
    let alphabet = Alphabet::new(names).expect("distinct generator names");
    let class_of = pt.pieces.iter().map(|x| x.class).collect();
    let mut equalities = Vec::new();
    for c in &pt.classes {
        for &k in &c[1..] {
            equalities.push((c[0] as Letter, k as Letter));
        }
    }
    let mut relators: Vec<Word> = Vec::new();
    let mut seen = BTreeSet::new();
    for f in &pt.factorizations {
        let phi: Vec<usize> = f.iter().map(|w| pt.pieces[pt.piece_index(w).unwrap()].class).collect();
        for rot in 0..phi.len() {
            let s: Vec<usize> = phi[rot..].iter().chain(&phi[..rot]).copied().collect();
            let mut words: Vec<Word> = vec![Word::new()];
            for &c in &s {
                words = words.iter().flat_map(|w| pt.classes[c].iter().map(move |&k| {
                    let mut x = w.clone();
                    x.push(k as Letter);
                    x
                })).collect();
            }
            for w in words {
                if seen.insert(w.clone()) {
                    relators.push(w);
                }
            }
        }
    }
    UnitPresentation { alphabet, class_of, equalities, relators, chi: pt.piece_words() }
}

impl UnitPresentation {
    pub fn relations(&self) -> Vec<(Word, Word)> {
        self.equalities
            .iter()
            .map(|&(a, b)| (vec![b], vec![a]))
            .chain(self.relators.iter().map(|r| (r.clone(), Word::new())))
            .collect()
    }

    pub fn complete_system(&self, max_rules: usize, max_lhs_len: usize) -> CompletionResult {
        knuth_bendix(&RewritingSystem::from_relations(self.alphabet.len(), self.relations(), None), max_rules, max_lhs_len)
    }

    /// `χ(w)` as a word over the original alphabet.
    pub fn chi_word(&self, w: &[Letter]) -> Word {
        w.iter().flat_map(|&b| self.chi[b as usize].iter().copied()).collect()
    }

    pub fn to_text(&self) -> String {
        let f = |w: &Word| self.alphabet.format_word(w);
        let mut rel: Vec<String> = self.equalities.iter().map(|&(a, b)| format!("{}={}", f(&vec![a]), f(&vec![b]))).collect();
        rel.extend(self.relators.iter().map(f));
        format!("Gp<{} | {}>", self.alphabet.names().iter().map(|n| self.alphabet.display_letter(self.alphabet.index(n).unwrap())).collect::<Vec<_>>().join(","), rel.join(", "))
    }
}

/// `Err((x, y))` when `x` is a proper prefix or suffix of `y`.
pub fn check_biprefix(words: &[Word]) -> Result<(), (Word, Word)> {
    for x in words {
        for y in words {
            if x.len() < y.len() && (y.starts_with(x) || y.ends_with(x)) {
                return Err((x.clone(), y.clone()));
            }
        }
    }
    Ok(())
}

/// `Err((x, y, k))` when the prefix of `x` of length `k` (nonempty, proper)
/// is a suffix of `y`; `x = y` is allowed.
pub fn check_cross_bifix_free(words: &[Word]) -> Result<(), (Word, Word, usize)> {
    for x in words {
        for y in words {
            for k in 1..x.len() {
                if k <= y.len() && y.ends_with(&x[..k]) {
                    return Err((x.clone(), y.clone(), k));
                }
            }
        }
    }
    Ok(())
}
