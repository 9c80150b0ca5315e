//! Exact combinatorics of free groups: reduced words, translation length,
//! conjugacy-class enumeration and abelianization.
//!
//! Conjugacy classes of a free group are in bijection with cyclic-rotation
//! classes of cyclically reduced words, so class enumeration is exact here.

use crate::{Error, Result};
use serde::Serialize;
use std::fmt;

/// A signed generator: generator index plus an inverse flag.
///
/// The internal code `2 * index + inverse` makes the derived ordering
/// `a < a^-1 < b < b^-1 < ...`, which fixes the canonical representative
/// chosen by [`enumerate_classes`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Letter(u32);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter((generator as u32) << 1 | inverse as u32)
    }

    pub fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }
}

/// A freely reduced word in a free group.
///
/// The letter sequence never contains an adjacent pair `x x^-1`; all
/// constructors reduce their input.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    /// The empty word (group identity).
    pub fn identity() -> Self {
        Word::default()
    }

    /// A single-generator word.
    pub fn generator(index: usize) -> Self {
        Word {
            letters: vec![Letter::new(index, false)],
        }
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last().is_some_and(|p| *p == l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word { letters: out }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Group product with free reduction.
    pub fn multiply(&self, other: &Word) -> Word {
        Word::reduce(self.letters.iter().chain(other.letters.iter()).copied())
    }

    /// Reverses the letters and flips every exponent.
    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Word {
        let mut out = Word::identity();
        for _ in 0..n {
            out = out.multiply(self);
        }
        out
    }

    /// True when the first and last letters are not mutually inverse.
    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(a), Some(b)) => *a != b.inverse(),
            _ => true,
        }
    }

    /// Strips mutually inverse first/last letter pairs.
    pub fn cyclic_reduction(&self) -> Word {
        let mut lo = 0;
        let mut hi = self.letters.len();
        while hi - lo >= 2 && self.letters[lo] == self.letters[hi - 1].inverse() {
            lo += 1;
            hi -= 1;
        }
        Word {
            letters: self.letters[lo..hi].to_vec(),
        }
    }

    /// Minimal word length over the conjugacy class; exact in free groups.
    pub fn translation_length(&self) -> usize {
        self.cyclic_reduction().len()
    }

    /// Exponent-sum vector of length `rank`.
    pub fn abelianize(&self, rank: usize) -> Vec<i64> {
        let mut v = vec![0i64; rank];
        for l in &self.letters {
            v[l.generator()] += if l.is_inverse() { -1 } else { 1 };
        }
        v
    }

    /// Rotation by `i` positions (cyclic words only make sense when
    /// cyclically reduced, but the operation itself is defined always).
    pub fn rotated(&self, i: usize) -> Word {
        if self.letters.is_empty() {
            return self.clone();
        }
        let n = self.letters.len();
        let i = i % n;
        let letters = self.letters[i..]
            .iter()
            .chain(self.letters[..i].iter())
            .copied()
            .collect();
        Word { letters }
    }

    /// Lexicographically least rotation.
    pub fn canonical_rotation(&self) -> Word {
        (0..self.letters.len().max(1))
            .map(|i| self.rotated(i))
            .min()
            .unwrap_or_else(Word::identity)
    }

    fn max_generator(&self) -> Option<usize> {
        self.letters.iter().map(|l| l.generator()).max()
    }
}

/// A free group of rank `n >= 2` with named generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FreeGroup {
    rank: usize,
    names: Vec<String>,
}

fn default_names(rank: usize) -> Vec<String> {
    (0..rank)
        .map(|i| {
            let c = (b'a' + (i % 26) as u8) as char;
            if i < 26 {
                c.to_string()
            } else {
                format!("{}{}", c, i / 26)
            }
        })
        .collect()
}

impl FreeGroup {
    pub fn new(rank: usize) -> Result<Self> {
        Self::with_names(default_names(rank))
    }

    pub fn with_names(names: Vec<String>) -> Result<Self> {
        let rank = names.len();
        if rank < 2 {
            return Err(Error::RankTooSmall(rank));
        }
        let ok = names.iter().all(|n| {
            !n.is_empty()
                && n.chars().all(|c| c.is_ascii_alphanumeric())
                && n.chars().next().is_some_and(|c| c.is_ascii_lowercase())
        });
        let mut uniq: Vec<&String> = names.iter().collect();
        uniq.sort();
        uniq.dedup();
        if !ok || uniq.len() != rank {
            return Err(Error::BadGeneratorNames);
        }
        Ok(FreeGroup { rank, names })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generator_names(&self) -> &[String] {
        &self.names
    }

    /// Validates letter indices against the rank and freely reduces.
    pub fn reduce(&self, letters: &[(usize, bool)]) -> Result<Word> {
        for &(index, _) in letters {
            if index >= self.rank {
                return Err(Error::UnknownGenerator {
                    index,
                    rank: self.rank,
                });
            }
        }
        Ok(Word::reduce(
            letters.iter().map(|&(i, inv)| Letter::new(i, inv)),
        ))
    }

    pub fn contains(&self, word: &Word) -> bool {
        word.max_generator().is_none_or(|g| g < self.rank)
    }

    /// Parses the space-separated form, e.g. `"a b A b"`; the uppercased
    /// generator name denotes its inverse.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            let mut found = None;
            for (i, name) in self.names.iter().enumerate() {
                if tok == name {
                    found = Some(Letter::new(i, false));
                    break;
                }
                if tok == name.to_uppercase() {
                    found = Some(Letter::new(i, true));
                    break;
                }
            }
            letters.push(found.ok_or_else(|| Error::BadWordToken(tok.to_string()))?);
        }
        Ok(Word::reduce(letters))
    }

    pub fn format_word(&self, word: &Word) -> String {
        word.letters()
            .iter()
            .map(|l| {
                let name = &self.names[l.generator()];
                if l.is_inverse() {
                    name.to_uppercase()
                } else {
                    name.clone()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for Word {
    /// Display with default names; groups with custom names should use
    /// [`FreeGroup::format_word`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        let names = default_names(self.max_generator().map_or(0, |g| g + 1));
        let text = self
            .letters
            .iter()
            .map(|l| {
                let n = &names[l.generator()];
                if l.is_inverse() {
                    n.to_uppercase()
                } else {
                    n.clone()
                }
            })
            .collect::<Vec<_>>()
            .join(" ");
        write!(f, "{}", text)
    }
}

/// Canonical representative of a conjugacy class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassRep {
    /// Cyclically reduced, lexicographically least rotation.
    pub word: Word,
    /// Primitive root, so that `word = root^power`.
    pub root: Word,
    pub power: u32,
}

impl ClassRep {
    pub fn is_primitive(&self) -> bool {
        self.power == 1
    }

    pub fn length(&self) -> usize {
        self.word.len()
    }

    fn from_canonical(word: Word) -> Self {
        let n = word.len();
        let mut period = n;
        for p in 1..n {
            if n.is_multiple_of(p) && word.rotated(p) == word {
                period = p;
                break;
            }
        }
        let root = Word {
            letters: word.letters()[..period].to_vec(),
        };
        ClassRep {
            power: (n / period) as u32,
            root,
            word,
        }
    }
}

/// Streams one representative per cyclic-rotation class of cyclically
/// reduced words of length `1..=max_len`, in deterministic order: by
/// length, then lexicographically.
pub fn enumerate_classes(group: &FreeGroup, max_len: usize) -> ClassIter {
    ClassIter {
        rank: group.rank(),
        max_len,
        next_len: 1,
        buffer: Vec::new(),
        pos: 0,
    }
}

pub struct ClassIter {
    rank: usize,
    max_len: usize,
    next_len: usize,
    buffer: Vec<ClassRep>,
    pos: usize,
}

impl Iterator for ClassIter {
    type Item = ClassRep;

    fn next(&mut self) -> Option<ClassRep> {
        loop {
            if self.pos < self.buffer.len() {
                let item = self.buffer[self.pos].clone();
                self.pos += 1;
                return Some(item);
            }
            if self.next_len > self.max_len {
                return None;
            }
            self.buffer = classes_of_length(self.rank, self.next_len);
            self.pos = 0;
            self.next_len += 1;
        }
    }
}

/// All canonical class representatives of exactly this length, in
/// lexicographic order.
fn classes_of_length(rank: usize, len: usize) -> Vec<ClassRep> {
    let alphabet: Vec<Letter> = (0..rank)
        .flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
        .collect();
    let mut out = Vec::new();
    let mut stack = Vec::with_capacity(len);
    dfs(&alphabet, len, &mut stack, &mut out);
    out
}

fn dfs(alphabet: &[Letter], len: usize, prefix: &mut Vec<Letter>, out: &mut Vec<ClassRep>) {
    if prefix.len() == len {
        let word = Word {
            letters: prefix.clone(),
        };
        if word.is_cyclically_reduced() && is_least_rotation(&word) {
            out.push(ClassRep::from_canonical(word));
        }
        return;
    }
    for &l in alphabet {
        // A letter below the first letter would start a smaller rotation.
        if let Some(&first) = prefix.first() {
            if l < first {
                continue;
            }
        }
        if prefix.last().is_some_and(|p| *p == l.inverse()) {
            continue;
        }
        prefix.push(l);
        dfs(alphabet, len, prefix, out);
        prefix.pop();
    }
}

fn is_least_rotation(word: &Word) -> bool {
    let n = word.len();
    let ls = word.letters();
    'rot: for i in 1..n {
        for j in 0..n {
            let a = ls[(i + j) % n];
            let b = ls[j];
            if a < b {
                return false;
            }
            if a > b {
                continue 'rot;
            }
        }
        // Equal rotation: word is periodic; the original is still least.
    }
    true
}
