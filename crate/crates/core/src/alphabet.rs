//! Finite alphabets and words over them.
//!
//! Symbols are addressed by index. The terminal symbol `$` is implicit: its
//! index is always `alphabet.len()`, so it sorts after every ordinary symbol.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Name of the implicit terminal symbol.
pub const TERMINAL: &str = "$";

/// A word over an alphabet, as a sequence of symbol indices.
pub type Word = Vec<usize>;

/// Ordered set of distinct non-terminal symbols.
#[derive(Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if s == TERMINAL {
                return Err(Error::InvalidAlphabet(format!(
                    "`{TERMINAL}` is reserved for the terminal symbol"
                )));
            }
            if s.is_empty() {
                return Err(Error::InvalidAlphabet("empty symbol".into()));
            }
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol `{s}`")));
            }
        }
        Ok(Alphabet { symbols, index })
    }

    /// Number of non-terminal symbols.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Number of symbols including the terminal.
    pub fn extended_len(&self) -> usize {
        self.symbols.len() + 1
    }

    pub fn terminal(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    /// Name of a symbol of the extended alphabet.
    pub fn name(&self, index: usize) -> &str {
        if index == self.symbols.len() {
            TERMINAL
        } else {
            &self.symbols[index]
        }
    }

    /// Index of a symbol of the extended alphabet (`$` included).
    pub fn extended_index(&self, name: &str) -> Option<usize> {
        if name == TERMINAL {
            Some(self.symbols.len())
        } else {
            self.index.get(name).copied()
        }
    }

    /// Index of a non-terminal symbol.
    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    fn single_char_symbols(&self) -> bool {
        self.symbols.iter().all(|s| s.chars().count() == 1)
    }

    /// Parses a word. Whitespace separates symbols; without whitespace and
    /// with single-character symbols every character is a symbol.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Vec::new());
        }
        if text.contains(char::is_whitespace) || !self.single_char_symbols() {
            text.split_whitespace().map(|s| self.index_of(s)).collect()
        } else {
            let mut buf = [0u8; 4];
            text.chars()
                .map(|c| self.index_of(c.encode_utf8(&mut buf)))
                .collect()
        }
    }

    /// Inverse of [`Alphabet::parse_word`]. The empty word renders as `""`.
    pub fn format_word(&self, word: &[usize]) -> String {
        let sep = if self.single_char_symbols() { "" } else { " " };
        word.iter()
            .map(|&s| self.name(s))
            .collect::<Vec<_>>()
            .join(sep)
    }

    pub fn check_word(&self, word: &[usize]) -> Result<()> {
        match word.iter().find(|&&s| s >= self.symbols.len()) {
            Some(&s) => Err(Error::SymbolOutOfRange(s)),
            None => Ok(()),
        }
    }

    /// All words of length at most `max_len`, in length-lexicographic order.
    pub fn words_up_to(&self, max_len: usize) -> WordsUpTo {
        WordsUpTo {
            k: self.symbols.len(),
            max_len,
            next: Some(Vec::new()),
        }
    }

    /// Number of words of length at most `max_len`, saturating.
    pub fn count_words_up_to(&self, max_len: usize) -> u64 {
        let k = self.symbols.len() as u64;
        let mut total: u64 = 0;
        let mut layer: u64 = 1;
        for _ in 0..=max_len {
            total = total.saturating_add(layer);
            layer = layer.saturating_mul(k);
        }
        total
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.symbols).finish()
    }
}

/// Iterator behind [`Alphabet::words_up_to`].
pub struct WordsUpTo {
    k: usize,
    max_len: usize,
    next: Option<Word>,
}

impl Iterator for WordsUpTo {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        // odometer increment; overflow grows the length
        let mut i = succ.len();
        loop {
            if i == 0 {
                if self.k == 0 || succ.len() == self.max_len {
                    self.next = None;
                } else {
                    self.next = Some(vec![0; succ.len() + 1]);
                }
                break;
            }
            i -= 1;
            succ[i] += 1;
            if succ[i] < self.k {
                self.next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(current)
    }
}

/// Length-lexicographic order on words.
pub fn length_lex(a: &[usize], b: &[usize]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}
