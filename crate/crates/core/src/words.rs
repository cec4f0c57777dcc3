//! Free-group words, finite presentations and Fox free differential calculus.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("unknown generator at {position} in {text:?}")]
    UnknownGenerator { text: String, position: usize },
    #[error("malformed exponent at {position} in {text:?}")]
    MalformedExponent { text: String, position: usize },
    #[error("invalid generator name {0:?}")]
    InvalidName(String),
    #[error("duplicate generator name {0:?}")]
    DuplicateGenerator(String),
    #[error("relator {relator} references generator #{generator}, but only {count} are declared")]
    UndeclaredGenerator {
        relator: usize,
        generator: usize,
        count: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneratorId(pub usize);

/// One letter `g^{±1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub generator: GeneratorId,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: GeneratorId, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub fn inv(self) -> Self {
        Letter {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }

    pub fn exponent(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }
}

/// A word in the free group, stored exactly as written.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn generator(g: GeneratorId) -> Self {
        Word(vec![Letter::new(g, false)])
    }

    /// `g^e` as `|e|` letters.
    pub fn power(g: GeneratorId, e: i64) -> Self {
        Word(vec![Letter::new(g, e < 0); e.unsigned_abs() as usize])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    /// Free reduction: cancels adjacent `g g⁻¹` pairs until none remain.
    pub fn reduced(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1].inv())
    }

    pub fn max_generator(&self) -> Option<GeneratorId> {
        self.0.iter().map(|l| l.generator).max()
    }

    /// Exponent sum of each generator.
    pub fn exponent_sums(&self, generators: usize) -> Vec<i64> {
        let mut sums = vec![0; generators];
        for l in &self.0 {
            sums[l.generator.0] += l.exponent();
        }
        sums
    }
}

/// Finite presentation `⟨generators | relators⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPresentation {
    generators: Vec<String>,
    relators: Vec<Word>,
}

impl GroupPresentation {
    pub fn new(generators: Vec<String>, relators: Vec<Word>) -> Result<Self, WordError> {
        for (i, name) in generators.iter().enumerate() {
            if !valid_name(name) {
                return Err(WordError::InvalidName(name.clone()));
            }
            if generators[..i].contains(name) {
                return Err(WordError::DuplicateGenerator(name.clone()));
            }
        }
        for (r, w) in relators.iter().enumerate() {
            if let Some(g) = w.max_generator() {
                if g.0 >= generators.len() {
                    return Err(WordError::UndeclaredGenerator {
                        relator: r,
                        generator: g.0,
                        count: generators.len(),
                    });
                }
            }
        }
        Ok(GroupPresentation {
            generators,
            relators,
        })
    }

    /// Builds a presentation from generator names and relator strings in the word grammar.
    pub fn parse<G: AsRef<str>, R: AsRef<str>>(generators: &[G], relators: &[R]) -> Result<Self, WordError> {
        let pres = GroupPresentation::new(
            generators.iter().map(|s| s.as_ref().to_string()).collect(),
            Vec::new(),
        )?;
        let relators = relators
            .iter()
            .map(|r| parse_word(r.as_ref(), &pres))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GroupPresentation { relators, ..pres })
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn generator_id(&self, name: &str) -> Option<GeneratorId> {
        self.generators.iter().position(|g| g == name).map(GeneratorId)
    }

    pub fn name(&self, g: GeneratorId) -> &str {
        &self.generators[g.0]
    }

    /// Prints a word with runs collapsed, e.g. `Q3^5 H`.
    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".into();
        }
        let mut parts = Vec::new();
        let letters = w.letters();
        let mut i = 0;
        while i < letters.len() {
            let g = letters[i].generator;
            let mut e = 0i64;
            while i < letters.len() && letters[i].generator == g && (e == 0 || (letters[i].inverse == (e < 0))) {
                e += letters[i].exponent();
                i += 1;
            }
            let name = self.name(g);
            parts.push(if e == 1 { name.to_string() } else { format!("{name}^{e}") });
        }
        parts.join(" ")
    }
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// Parses a word: generator names, whitespace-separated or juxtaposed, each with an optional
/// `^<signed integer>` exponent. Names are matched greedily, longest first. The empty string
/// (or `"1"`) is the identity.
pub fn parse_word(text: &str, pres: &GroupPresentation) -> Result<Word, WordError> {
    let mut names: Vec<(usize, &str)> = pres.generators.iter().map(String::as_str).enumerate().collect();
    names.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));

    let bytes = text.as_bytes();
    let mut pos = 0;
    let mut word = Word::identity();
    if text.trim() == "1" {
        return Ok(word);
    }
    while pos < bytes.len() {
        if bytes[pos].is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        let rest = &text[pos..];
        let Some(&(id, name)) = names.iter().find(|(_, n)| rest.starts_with(n)) else {
            return Err(WordError::UnknownGenerator {
                text: text.to_string(),
                position: pos,
            });
        };
        pos += name.len();
        let mut exponent = 1i64;
        if bytes.get(pos) == Some(&b'^') {
            let start = pos;
            pos += 1;
            let digits_from = if matches!(bytes.get(pos), Some(b'-') | Some(b'+')) { pos + 1 } else { pos };
            let mut end = digits_from;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            let malformed = || WordError::MalformedExponent {
                text: text.to_string(),
                position: start,
            };
            if end == digits_from {
                return Err(malformed());
            }
            exponent = text[pos..end].parse().map_err(|_| malformed())?;
            pos = end;
        }
        for l in Word::power(GeneratorId(id), exponent).letters() {
            word.push(*l);
        }
    }
    Ok(word)
}

/// Element of the integral group ring of the free group: a finite sum of `coefficient · word`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroupRingElement {
    terms: BTreeMap<Word, i64>,
}

impl GroupRingElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        let mut e = Self::zero();
        e.add_term(1, Word::identity());
        e
    }

    /// Adds `c · w`, merging with any freely equal word already present.
    pub fn add_term(&mut self, c: i64, w: Word) {
        if c == 0 {
            return;
        }
        let key = w.reduced();
        let entry = self.terms.entry(key.clone()).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, i64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Augmentation: the sum of coefficients.
    pub fn augmentation(&self) -> i64 {
        self.terms.values().sum()
    }

    pub fn add(&self, other: &GroupRingElement) -> GroupRingElement {
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add_term(c, w.clone());
        }
        out
    }

    /// Left multiplication by a word.
    pub fn left_mul(&self, w: &Word) -> GroupRingElement {
        let mut out = GroupRingElement::zero();
        for (v, c) in self.terms() {
            out.add_term(c, w.concat(v));
        }
        out
    }

    pub fn format(&self, pres: &GroupPresentation) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (n, (w, c)) in self.terms().enumerate() {
            let body = pres.format_word(w);
            let (sign, mag) = if c < 0 { ("-", -c) } else { ("+", c) };
            if n == 0 {
                if c < 0 {
                    s.push('-');
                }
            } else {
                s.push_str(&format!(" {sign} "));
            }
            if mag != 1 {
                s.push_str(&format!("{mag}"));
                if !w.is_empty() {
                    s.push('·');
                    s.push_str(&body);
                }
            } else {
                s.push_str(&body);
            }
        }
        s
    }
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms()
            .map(|(w, c)| {
                let letters: Vec<String> = w
                    .letters()
                    .iter()
                    .map(|l| format!("g{}{}", l.generator.0, if l.inverse { "'" } else { "" }))
                    .collect();
                format!("{c}[{}]", letters.join(""))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Fox derivative `∂w/∂g` of the literal (unreduced) word.
///
/// Built letter by letter from `∂(uv) = ∂u + u·∂v`, `∂g/∂g = 1`, `∂g⁻¹/∂g = −g⁻¹`.
pub fn fox_derivative(w: &Word, g: GeneratorId) -> GroupRingElement {
    let mut out = GroupRingElement::zero();
    let mut prefix = Word::identity();
    for &l in w.letters() {
        if l.generator == g {
            if l.inverse {
                let mut p = prefix.clone();
                p.push(l);
                out.add_term(-1, p);
            } else {
                out.add_term(1, prefix.clone());
            }
        }
        prefix.push(l);
    }
    out
}

/// Exponent-sum matrix: row per relator, column per generator.
pub fn abelianized_boundary(pres: &GroupPresentation) -> Vec<Vec<i64>> {
    pres.relators
        .iter()
        .map(|r| r.exponent_sums(pres.generator_count()))
        .collect()
}
