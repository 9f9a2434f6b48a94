//! Interned letter names shared by all programs over one alphabet.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Index of a letter inside an [`Alphabet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LetterId(pub u32);

impl LetterId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for LetterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("duplicate letter name `{0}`")]
    Duplicate(String),
    #[error("unknown letter `{0}`")]
    Unknown(String),
    #[error("invalid letter name `{0}`")]
    InvalidName(String),
}

/// An ordered set of letter names. The order is the letter order used for
/// shortlex comparisons.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    index: HashMap<String, LetterId>,
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an alphabet from names in order; names must be distinct.
    pub fn from_names<I, S>(names: I) -> Result<Self, AlphabetError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut alphabet = Self::new();
        for name in names {
            let name = name.into();
            if alphabet.index.contains_key(&name) {
                return Err(AlphabetError::Duplicate(name));
            }
            alphabet.push(name)?;
        }
        Ok(alphabet)
    }

    fn push(&mut self, name: String) -> Result<LetterId, AlphabetError> {
        if name.is_empty() || name.contains('\'') || name.chars().any(char::is_whitespace) {
            return Err(AlphabetError::InvalidName(name));
        }
        let id = LetterId(self.names.len() as u32);
        self.index.insert(name.clone(), id);
        self.names.push(name);
        Ok(id)
    }

    /// Returns the id of `name`, adding it at the end if it is new.
    pub fn intern(&mut self, name: &str) -> Result<LetterId, AlphabetError> {
        match self.index.get(name) {
            Some(&id) => Ok(id),
            None => self.push(name.to_string()),
        }
    }

    pub fn get(&self, name: &str) -> Option<LetterId> {
        self.index.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Result<LetterId, AlphabetError> {
        self.get(name).ok_or_else(|| AlphabetError::Unknown(name.to_string()))
    }

    pub fn name(&self, id: LetterId) -> &str {
        &self.names[id.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn letters(&self) -> impl Iterator<Item = LetterId> + '_ {
        (0..self.names.len() as u32).map(LetterId)
    }

    /// Parses a whitespace-separated word of letter names.
    pub fn parse_word(&self, text: &str) -> Result<Vec<LetterId>, AlphabetError> {
        text.split_whitespace()
            .map(|tok| self.lookup(tok.trim_matches('\'')))
            .collect()
    }

    /// Formats a word as space-separated quoted letters.
    pub fn format_word(&self, word: &[LetterId]) -> String {
        word.iter()
            .map(|&l| format!("'{}'", self.name(l)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Formats a word as space-separated bare letter names.
    pub fn spell(&self, word: &[LetterId]) -> String {
        word.iter()
            .map(|&l| self.name(l))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_stable() {
        let mut a = Alphabet::new();
        let x = a.intern("a").unwrap();
        let y = a.intern("b").unwrap();
        assert_eq!(a.intern("a").unwrap(), x);
        assert_ne!(x, y);
        assert_eq!(a.name(y), "b");
        assert_eq!(a.len(), 2);
    }

    #[test]
    fn duplicates_and_bad_names_rejected() {
        assert!(matches!(
            Alphabet::from_names(["a", "a"]),
            Err(AlphabetError::Duplicate(_))
        ));
        assert!(matches!(
            Alphabet::from_names(["a b"]),
            Err(AlphabetError::InvalidName(_))
        ));
    }

    #[test]
    fn word_round_trip() {
        let a = Alphabet::from_names(["x", "y"]).unwrap();
        let w = a.parse_word("x y 'x'").unwrap();
        assert_eq!(a.format_word(&w), "'x' 'y' 'x'");
    }
}
