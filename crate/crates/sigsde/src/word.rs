//! Words (multi-indices) over a finite alphabet and the shuffle product.
//!
//! A word indexes one coefficient of a truncated tensor-algebra element.
//! Letter 0 conventionally denotes the time coordinate, so an alphabet of
//! size `a + 1` covers the letters `{0, ..., a}`.

use std::collections::HashMap;
use std::fmt;

/// A multi-index: an ordered sequence of letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: &[u8]) -> Self {
        Word(letters.to_vec())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// First `len - 1` letters (the prefix `I⁻`). Panics on the empty word.
    pub fn prefix(&self) -> Word {
        Word(self.0[..self.0.len() - 1].to_vec())
    }

    /// Final letter `I^f`. Panics on the empty word.
    pub fn last(&self) -> u8 {
        *self.0.last().expect("last letter of empty word")
    }

    /// Subword at the given (0-based, increasing) positions.
    pub fn subword(&self, positions: &[usize]) -> Word {
        Word(positions.iter().map(|&p| self.0[p]).collect())
    }

    /// Word with `letter` appended.
    pub fn append(&self, letter: u8) -> Word {
        let mut v = self.0.clone();
        v.push(letter);
        Word(v)
    }

    pub fn max_letter(&self) -> Option<u8> {
        self.0.iter().copied().max()
    }

    /// Renders as dot-separated letters, the empty word as `e`.
    pub fn render(&self) -> String {
        if self.0.is_empty() {
            "e".to_string()
        } else {
            self.0
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(".")
        }
    }

    /// Parses the `render` format: `e` or dot-separated letters like `0.1.1`.
    pub fn parse(s: &str) -> Result<Word, String> {
        let s = s.trim();
        if s == "e" || s.is_empty() {
            return Ok(Word::empty());
        }
        let letters = s
            .split('.')
            .map(|part| {
                part.trim()
                    .parse::<u8>()
                    .map_err(|_| format!("invalid letter {part:?} in word {s:?}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Word(letters))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// All words of length at most `max_len` over letters `{0, ..., alphabet_size - 1}`,
/// sorted by (length, lexicographic). This order defines the flat coordinate
/// layout used everywhere else.
pub fn enumerate_words(alphabet_size: usize, max_len: usize) -> Vec<Word> {
    assert!(alphabet_size >= 1, "alphabet must be non-empty");
    let mut out = vec![Word::empty()];
    let mut current: Vec<Word> = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(current.len() * alphabet_size);
        for w in &current {
            for letter in 0..alphabet_size {
                next.push(w.append(letter as u8));
            }
        }
        out.extend(next.iter().cloned());
        current = next;
    }
    out
}

/// Shuffle product of two words as a multiset (word -> multiplicity).
///
/// Every element interleaves the letters of `a` and `b` while preserving
/// their internal orders; multiplicities are kept because identical
/// interleavings can arise from distinct shuffles.
pub fn shuffle(a: &Word, b: &Word) -> HashMap<Word, u64> {
    let mut out = HashMap::new();
    let mut buf = Vec::with_capacity(a.len() + b.len());
    shuffle_rec(&a.0, &b.0, &mut buf, &mut out);
    out
}

fn shuffle_rec(a: &[u8], b: &[u8], buf: &mut Vec<u8>, out: &mut HashMap<Word, u64>) {
    if a.is_empty() && b.is_empty() {
        *out.entry(Word(buf.clone())).or_insert(0) += 1;
        return;
    }
    if let Some((&h, rest)) = a.split_first() {
        buf.push(h);
        shuffle_rec(rest, b, buf, out);
        buf.pop();
    }
    if let Some((&h, rest)) = b.split_first() {
        buf.push(h);
        shuffle_rec(a, rest, buf, out);
        buf.pop();
    }
}
