use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Word,
    Syllable,
}

/// A normalised lyric token: lowercase, non-empty, no whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    text: String,
    kind: TokenKind,
}

impl Token {
    pub fn new(text: impl Into<String>, kind: TokenKind) -> Result<Self> {
        let text = text.into();
        if text.is_empty() {
            return Err(invalid("empty token"));
        }
        if text.chars().any(|c| c.is_whitespace() || c.is_uppercase()) {
            return Err(invalid(format!("token {text:?} is not normalised")));
        }
        Ok(Self { text, kind })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn kind(&self) -> TokenKind {
        self.kind
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// A syllable together with the word it belongs to. Serialised as
/// `[word, syllable]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "(String, String)", into = "(String, String)")]
pub struct SyllablePair {
    pub word: String,
    pub syllable: String,
}

impl SyllablePair {
    pub fn new(word: impl Into<String>, syllable: impl Into<String>) -> Self {
        Self {
            word: word.into(),
            syllable: syllable.into(),
        }
    }

    pub fn word_token(&self) -> Result<Token> {
        Token::new(self.word.clone(), TokenKind::Word)
    }

    pub fn syllable_token(&self) -> Result<Token> {
        Token::new(self.syllable.clone(), TokenKind::Syllable)
    }
}

impl From<(String, String)> for SyllablePair {
    fn from((word, syllable): (String, String)) -> Self {
        Self { word, syllable }
    }
}

impl From<SyllablePair> for (String, String) {
    fn from(p: SyllablePair) -> Self {
        (p.word, p.syllable)
    }
}

/// Lowercases a lyric fragment and strips punctuation.
///
/// Returns `None` when nothing is left, or when the fragment contains
/// non-ASCII letters (the English-only heuristic).
pub fn normalize_fragment(raw: &str) -> Option<String> {
    if raw.chars().any(|c| c.is_alphabetic() && !c.is_ascii()) {
        return None;
    }
    let text: String = raw
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect();
    if text.chars().any(|c| c.is_ascii_alphabetic()) {
        Some(text)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalisation() {
        assert_eq!(normalize_fragment(" Lis-").as_deref(), Some("lis"));
        assert_eq!(normalize_fragment("Don't!").as_deref(), Some("dont"));
        assert_eq!(normalize_fragment("\\"), None);
        assert_eq!(normalize_fragment("42"), None);
        assert_eq!(normalize_fragment("café"), None);
    }

    #[test]
    fn token_validation() {
        assert!(Token::new("", TokenKind::Word).is_err());
        assert!(Token::new("two words", TokenKind::Word).is_err());
        assert!(Token::new("Upper", TokenKind::Word).is_err());
        assert_eq!(Token::new("ten", TokenKind::Syllable).unwrap().kind(), TokenKind::Syllable);
    }

    #[test]
    fn pair_serialises_as_array() {
        let p = SyllablePair::new("listen", "lis");
        assert_eq!(serde_json::to_string(&p).unwrap(), r#"["listen","lis"]"#);
        let back: SyllablePair = serde_json::from_str(r#"["listen","lis"]"#).unwrap();
        assert_eq!(back, p);
    }
}
