//! Special monoid presentations `Mon<A | R_1, ..., R_n>` and plain words.
//!
//! Text format:
//!
//! ```text
//! # comments run to end of line
//! name: bicyclic
//! image: b=1, c=-1
//! Mon< b, c | bc >
//! ```
//!
//! Letters are single characters (a trailing run of combining marks is part
//! of the letter, so `ā` is one letter) or bracketed names like `[x1]`.
//! Parentheses inside relators are grouping only and are dropped.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rewriting::{congruence_search, Budget, Derivation, EqualityVerdict};

pub type Letter = u16;
pub type Word = Vec<Letter>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("empty relator at line {line}, column {col}")]
    EmptyRelator { line: usize, col: usize },
    #[error("letter `{letter}` at line {line}, column {col} is not in the alphabet")]
    UnknownLetter { letter: String, line: usize, col: usize },
    #[error("duplicate alphabet letter `{letter}` at line {line}, column {col}")]
    DuplicateLetter { letter: String, line: usize, col: usize },
    #[error("bad image declaration: {0}")]
    BadImage(String),
    #[error("bad JSON presentation: {0}")]
    Json(String),
}

pub(crate) fn is_combining(c: char) -> bool {
    matches!(c as u32, 0x0300..=0x036F | 0x1AB0..=0x1AFF | 0x20D0..=0x20FF)
}

const RESERVED: &[char] = &[',', '|', '<', '>', '[', ']', '(', ')', '#', ':', '=', 'ε', '*', '^'];

/// Ordered list of distinct generator names.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Alphabet {
    letters: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, PresentationError> {
        let letters: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, l) in letters.iter().enumerate() {
            if l.is_empty() || l.contains(']') {
                return Err(PresentationError::Syntax { line: 0, col: 0, msg: format!("bad letter name `{l}`") });
            }
            if letters[..i].contains(l) {
                return Err(PresentationError::DuplicateLetter { letter: l.clone(), line: 0, col: 0 });
            }
        }
        Ok(Alphabet { letters })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.letters
    }

    pub fn name(&self, l: Letter) -> &str {
        &self.letters[l as usize]
    }

    pub fn index(&self, name: &str) -> Option<Letter> {
        self.letters.iter().position(|x| x == name).map(|i| i as Letter)
    }

    /// Name as it must be written in the text format.
    pub fn display_letter(&self, l: Letter) -> String {
        let n = self.name(l);
        let mut cs = n.chars();
        let first = cs.next();
        let bare = match first {
            Some(c) => !c.is_whitespace() && !RESERVED.contains(&c) && !is_combining(c) && cs.all(is_combining),
            None => false,
        };
        if bare {
            n.to_string()
        } else {
            format!("[{n}]")
        }
    }

    pub fn format_word(&self, w: &[Letter]) -> String {
        if w.is_empty() {
            return "ε".to_string();
        }
        w.iter().map(|&l| self.display_letter(l)).collect()
    }

    /// Parses a word; `ε` or the empty string is the empty word.
    pub fn parse_word(&self, s: &str) -> Result<Word, PresentationError> {
        let chars: Vec<(char, usize, usize)> = s.chars().enumerate().map(|(i, c)| (c, 1, i + 1)).collect();
        let toks = tokenize_word(&chars)?;
        let mut w = Vec::new();
        for t in toks {
            match t {
                WordTok::Epsilon(..) => {}
                WordTok::Letter(name, line, col) => {
                    w.push(self.index(&name).ok_or(PresentationError::UnknownLetter { letter: name, line, col })?)
                }
            }
        }
        Ok(w)
    }
}

enum WordTok {
    Letter(String, usize, usize),
    Epsilon(usize, usize),
}

/// Splits a run of positioned characters into letters. Parentheses and
/// whitespace are skipped.
fn tokenize_word(chars: &[(char, usize, usize)]) -> Result<Vec<WordTok>, PresentationError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (c, line, col) = chars[i];
        if c.is_whitespace() || c == '(' || c == ')' {
            i += 1;
            continue;
        }
        if c == 'ε' {
            out.push(WordTok::Epsilon(line, col));
            i += 1;
            continue;
        }
        if c == '[' {
            let mut name = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(PresentationError::Syntax { line, col, msg: "unterminated `[`".into() }),
                    Some((']', ..)) => break,
                    Some((d, ..)) => name.push(*d),
                }
                i += 1;
            }
            i += 1;
            if name.is_empty() {
                return Err(PresentationError::Syntax { line, col, msg: "empty bracketed letter".into() });
            }
            out.push(WordTok::Letter(name, line, col));
            continue;
        }
        if RESERVED.contains(&c) || is_combining(c) {
            return Err(PresentationError::Syntax { line, col, msg: format!("unexpected `{c}`") });
        }
        let mut name = c.to_string();
        i += 1;
        while let Some((d, ..)) = chars.get(i) {
            if is_combining(*d) {
                name.push(*d);
                i += 1;
            } else {
                break;
            }
        }
        out.push(WordTok::Letter(name, line, col));
    }
    Ok(out)
}

/// A homomorphism to (ℤ,+) given by letter weights; every relator maps to 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Image {
    pub weights: Vec<i64>,
}

impl Image {
    pub fn of(&self, w: &[Letter]) -> i64 {
        w.iter().map(|&l| self.weights[l as usize]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialPresentation {
    pub name: Option<String>,
    pub alphabet: Alphabet,
    pub relators: Vec<Word>,
    pub images: Vec<Image>,
}

#[derive(Serialize, Deserialize)]
struct PresentationJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    alphabet: Vec<String>,
    relators: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    images: Vec<HashMap<String, i64>>,
}

impl SpecialPresentation {
    pub fn new(alphabet: Alphabet, relators: Vec<Word>, name: Option<String>) -> Result<Self, PresentationError> {
        for (i, r) in relators.iter().enumerate() {
            if r.is_empty() {
                return Err(PresentationError::EmptyRelator { line: 0, col: i + 1 });
            }
            if r.iter().any(|&l| l as usize >= alphabet.len()) {
                return Err(PresentationError::UnknownLetter { letter: format!("#{i}"), line: 0, col: 0 });
            }
        }
        Ok(SpecialPresentation { name, alphabet, relators, images: Vec::new() })
    }

    /// Adds a ℤ-image; fails unless every relator has weight 0.
    pub fn add_image(&mut self, weights: Vec<i64>) -> Result<(), PresentationError> {
        if weights.len() != self.alphabet.len() {
            return Err(PresentationError::BadImage("one weight per letter required".into()));
        }
        let img = Image { weights };
        for r in &self.relators {
            if img.of(r) != 0 {
                return Err(PresentationError::BadImage(format!(
                    "relator {} has weight {}",
                    self.alphabet.format_word(r),
                    img.of(r)
                )));
            }
        }
        self.images.push(img);
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, PresentationError> {
        parse_presentation(text)
    }

    pub fn word(&self, s: &str) -> Result<Word, PresentationError> {
        self.alphabet.parse_word(s)
    }

    pub fn fmt_word(&self, w: &[Letter]) -> String {
        self.alphabet.format_word(w)
    }

    pub fn max_relator_len(&self) -> usize {
        self.relators.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// First image separating `u` and `v`, as (index, image of u, image of v).
    pub fn separating_image(&self, u: &[Letter], v: &[Letter]) -> Option<(usize, i64, i64)> {
        self.images.iter().enumerate().find_map(|(i, img)| {
            let (a, b) = (img.of(u), img.of(v));
            (a != b).then_some((i, a, b))
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(n) = &self.name {
            s.push_str(&format!("name: {n}\n"));
        }
        for img in &self.images {
            let parts: Vec<String> = (0..self.alphabet.len())
                .map(|l| format!("{}={}", self.alphabet.display_letter(l as Letter), img.weights[l]))
                .collect();
            s.push_str(&format!("image: {}\n", parts.join(", ")));
        }
        let letters: Vec<String> = (0..self.alphabet.len()).map(|l| self.alphabet.display_letter(l as Letter)).collect();
        let rels: Vec<String> = self.relators.iter().map(|r| self.alphabet.format_word(r)).collect();
        s.push_str(&format!("Mon<{} | {}>\n", letters.join(", "), rels.join(", ")));
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let j = PresentationJson {
            name: self.name.clone(),
            alphabet: self.alphabet.names().to_vec(),
            relators: self.relators.iter().map(|r| self.alphabet.format_word(r)).collect(),
            images: self
                .images
                .iter()
                .map(|img| self.alphabet.names().iter().cloned().zip(img.weights.iter().copied()).collect())
                .collect(),
        };
        serde_json::to_value(j).expect("presentation serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, PresentationError> {
        let j: PresentationJson = serde_json::from_str(text).map_err(|e| PresentationError::Json(e.to_string()))?;
        let alphabet = Alphabet::new(j.alphabet)?;
        let mut relators = Vec::new();
        for (i, r) in j.relators.iter().enumerate() {
            let w = alphabet.parse_word(r)?;
            if w.is_empty() {
                return Err(PresentationError::EmptyRelator { line: 0, col: i + 1 });
            }
            relators.push(w);
        }
        let mut p = SpecialPresentation::new(alphabet, relators, j.name)?;
        for m in j.images {
            let mut weights = vec![0; p.alphabet.len()];
            for (k, v) in m {
                let l = p.alphabet.index(&k).ok_or_else(|| PresentationError::BadImage(format!("unknown letter {k}")))?;
                weights[l as usize] = v;
            }
            p.add_image(weights)?;
        }
        Ok(p)
    }
}

impl fmt::Display for SpecialPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letters: Vec<String> = (0..self.alphabet.len()).map(|l| self.alphabet.display_letter(l as Letter)).collect();
        let rels: Vec<String> = self.relators.iter().map(|r| self.alphabet.format_word(r)).collect();
        write!(f, "Mon<{} | {}>", letters.join(", "), rels.join(", "))
    }
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> PresentationError {
    PresentationError::Syntax { line, col, msg: msg.into() }
}

/// Characters of the body with their (line, column), comments stripped.
type Positioned = Vec<(char, usize, usize)>;

pub fn parse_presentation(text: &str) -> Result<SpecialPresentation, PresentationError> {
    let mut name = None;
    let mut image_lines: Vec<(String, usize)> = Vec::new();
    let mut body: Positioned = Vec::new();
    let mut in_body = false;
    for (li, raw) in text.lines().enumerate() {
        let line = li + 1;
        let content = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        };
        let trimmed = content.trim();
        if !in_body {
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix("name:") {
                name = Some(rest.trim().to_string());
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix("image:") {
                image_lines.push((rest.trim().to_string(), line));
                continue;
            }
            in_body = true;
        }
        for (ci, c) in content.chars().enumerate() {
            body.push((c, line, ci + 1));
        }
        body.push(('\n', line, content.chars().count() + 1));
    }
    let mut p = parse_body(&body)?;
    p.name = name;
    for (spec, line) in image_lines {
        let mut weights = vec![0i64; p.alphabet.len()];
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (l, v) = part
                .split_once('=')
                .ok_or_else(|| syntax(line, 1, format!("image entry `{part}` lacks `=`")))?;
            let l = l.trim();
            let l = l.strip_prefix('[').and_then(|x| x.strip_suffix(']')).unwrap_or(l);
            let idx = p.alphabet.index(l).ok_or(PresentationError::UnknownLetter { letter: l.to_string(), line, col: 1 })?;
            weights[idx as usize] = v.trim().parse().map_err(|_| syntax(line, 1, format!("bad weight in `{part}`")))?;
        }
        p.add_image(weights)?;
    }
    Ok(p)
}

fn skip_ws(body: &Positioned, mut i: usize) -> usize {
    while i < body.len() && body[i].0.is_whitespace() {
        i += 1;
    }
    i
}

fn parse_body(body: &Positioned) -> Result<SpecialPresentation, PresentationError> {
    let end_pos = body.last().map(|&(_, l, c)| (l, c)).unwrap_or((1, 1));
    let at = |i: usize| body.get(i).map(|&(_, l, c)| (l, c)).unwrap_or(end_pos);
    let mut i = skip_ws(body, 0);
    let kw: String = body[i.min(body.len())..].iter().take(3).map(|t| t.0).collect();
    if kw != "Mon" {
        let (l, c) = at(i);
        return Err(syntax(l, c, "expected `Mon<`"));
    }
    i = skip_ws(body, i + 3);
    if body.get(i).map(|t| t.0) != Some('<') {
        let (l, c) = at(i);
        return Err(syntax(l, c, "expected `<`"));
    }
    i += 1;
    // Section boundaries, honouring brackets.
    let find = |from: usize, stop: &[char]| -> Option<usize> {
        let mut depth = 0;
        for (k, t) in body.iter().enumerate().skip(from) {
            match t.0 {
                '[' => depth += 1,
                ']' => depth -= 1,
                c if depth == 0 && stop.contains(&c) => return Some(k),
                _ => {}
            }
        }
        None
    };
    let bar = find(i, &['|', '>']).ok_or_else(|| {
        let (l, c) = end_pos;
        syntax(l, c, "expected `|`")
    })?;
    let mut letters: Vec<String> = Vec::new();
    for item in split_commas(&body[i..bar]) {
        let toks = tokenize_word(&item)?;
        let first = item.iter().find(|t| !t.0.is_whitespace()).map(|t| (t.1, t.2)).unwrap_or(at(bar));
        match toks.as_slice() {
            [WordTok::Letter(n, l, c)] => {
                if letters.contains(n) {
                    return Err(PresentationError::DuplicateLetter { letter: n.clone(), line: *l, col: *c });
                }
                letters.push(n.clone());
            }
            [] if item.iter().all(|t| t.0.is_whitespace()) && letters.is_empty() && split_commas(&body[i..bar]).len() == 1 => {}
            _ => return Err(syntax(first.0, first.1, "each alphabet entry must be a single letter")),
        }
    }
    let alphabet = Alphabet { letters };
    let mut relators = Vec::new();
    let close;
    if body[bar].0 == '|' {
        close = find(bar + 1, &['>']).ok_or_else(|| {
            let (l, c) = end_pos;
            syntax(l, c, "expected `>`")
        })?;
        let items = split_commas(&body[bar + 1..close]);
        let all_blank = items.len() == 1 && items[0].iter().all(|t| t.0.is_whitespace());
        if !all_blank {
            for item in items {
                let pos = item.iter().find(|t| !t.0.is_whitespace()).map(|t| (t.1, t.2));
                let toks = tokenize_word(&item)?;
                let mut w = Word::new();
                for t in toks {
                    match t {
                        WordTok::Epsilon(l, c) => return Err(PresentationError::EmptyRelator { line: l, col: c }),
                        WordTok::Letter(n, l, c) => w.push(
                            alphabet.index(&n).ok_or(PresentationError::UnknownLetter { letter: n, line: l, col: c })?,
                        ),
                    }
                }
                if w.is_empty() {
                    let (l, c) = pos.unwrap_or_else(|| at(close));
                    return Err(PresentationError::EmptyRelator { line: l, col: c });
                }
                relators.push(w);
            }
        }
    } else {
        close = bar;
    }
    let rest = skip_ws(body, close + 1);
    if rest < body.len() {
        let (l, c) = at(rest);
        return Err(syntax(l, c, "trailing input after `>`"));
    }
    SpecialPresentation::new(alphabet, relators, None)
}

fn split_commas(chars: &[(char, usize, usize)]) -> Vec<Positioned> {
    let mut out = vec![Vec::new()];
    let mut depth = 0;
    for &t in chars {
        match t.0 {
            '[' => depth += 1,
            ']' => depth -= 1,
            _ => {}
        }
        if t.0 == ',' && depth == 0 {
            out.push(Vec::new());
        } else {
            out.last_mut().unwrap().push(t);
        }
    }
    out
}

/// A relator with a proper nonempty subword found equal to 1.
#[derive(Debug, Clone, Serialize)]
pub struct UnitSubwordViolation {
    pub relator: usize,
    pub start: usize,
    pub end: usize,
    pub witness: Derivation,
}

/// Searches every proper nonempty subword of every relator for a derivation
/// to ε. An empty result only means nothing was found within the budget.
pub fn check_no_unit_proper_subword(p: &SpecialPresentation, budget: Budget) -> Vec<UnitSubwordViolation> {
    let mut out = Vec::new();
    for (i, r) in p.relators.iter().enumerate() {
        for start in 0..r.len() {
            for end in start + 1..=r.len() {
                if end - start == r.len() {
                    continue;
                }
                if let EqualityVerdict::Equal(d) = congruence_search(&r[start..end], &[], p, budget.max_len, budget.max_steps) {
                    out.push(UnitSubwordViolation { relator: i, start, end, witness: d });
                }
            }
        }
    }
    out
}
