//! Label codec: conversions between plain restored text, aligned token
//! sequences, and the 6-class encoded format.
//!
//! Every word of a restoration hypothesis carries two labels: a case label
//! (`U` for a word whose surface form starts uppercase, `L` otherwise) and a
//! trailing-punctuation label (`.`, `,`, `?`, or `$` for "nothing follows").
//! The encoded wire format is the 2-character concatenation of the two, e.g.
//! `U$` or `L,`, one label per word, space separated.

use std::fmt;

use thiserror::Error;

/// Case label of a word: uppercase-initial or lowercase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseLabel {
    Upper,
    Lower,
}

impl CaseLabel {
    /// The single-character wire symbol, `U` or `L`.
    pub fn symbol(self) -> char {
        match self {
            CaseLabel::Upper => 'U',
            CaseLabel::Lower => 'L',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'U' => Some(CaseLabel::Upper),
            'L' => Some(CaseLabel::Lower),
            _ => None,
        }
    }

    /// The other case value.
    pub fn flipped(self) -> Self {
        match self {
            CaseLabel::Upper => CaseLabel::Lower,
            CaseLabel::Lower => CaseLabel::Upper,
        }
    }

    /// Case label of a surface word: `Upper` iff its first character is
    /// uppercase. A word like `mcDonald` is `Lower`.
    pub fn of_word(word: &str) -> Self {
        if word.chars().next().is_some_and(char::is_uppercase) {
            CaseLabel::Upper
        } else {
            CaseLabel::Lower
        }
    }
}

/// Trailing-punctuation label of a word. `None` (wire symbol `$`) means no
/// punctuation follows the word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PunctLabel {
    None,
    FullStop,
    Comma,
    Question,
}

impl PunctLabel {
    /// All labels, in the fixed tie-breaking priority order used by
    /// frequency models: `None > FullStop > Comma > Question`.
    pub const ALL: [PunctLabel; 4] = [
        PunctLabel::None,
        PunctLabel::FullStop,
        PunctLabel::Comma,
        PunctLabel::Question,
    ];

    /// The single-character wire symbol: `$`, `.`, `,` or `?`.
    pub fn symbol(self) -> char {
        match self {
            PunctLabel::None => '$',
            PunctLabel::FullStop => '.',
            PunctLabel::Comma => ',',
            PunctLabel::Question => '?',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '$' => Some(PunctLabel::None),
            '.' => Some(PunctLabel::FullStop),
            ',' => Some(PunctLabel::Comma),
            '?' => Some(PunctLabel::Question),
            _ => None,
        }
    }

    /// The mark rendered after the word in plain text, if any.
    pub fn surface(self) -> Option<char> {
        match self {
            PunctLabel::None => None,
            other => Some(other.symbol()),
        }
    }

    /// Index into [`PunctLabel::ALL`].
    pub fn priority_index(self) -> usize {
        match self {
            PunctLabel::None => 0,
            PunctLabel::FullStop => 1,
            PunctLabel::Comma => 2,
            PunctLabel::Question => 3,
        }
    }
}

/// Text formats a restoration model may produce and the pipeline may emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextFormat {
    /// Restored text with capitalization and attached punctuation marks.
    Plain,
    /// One 2-character label per word, words themselves dropped.
    Encoded,
}

impl TextFormat {
    pub fn name(self) -> &'static str {
        match self {
            TextFormat::Plain => "plain",
            TextFormat::Encoded => "encoded",
        }
    }
}

/// A single labeled word: the lowercase word plus its case and punctuation
/// labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// Lowercase word, free of punctuation characters.
    pub word: String,
    pub case: CaseLabel,
    pub punct: PunctLabel,
}

impl Token {
    pub fn new(word: impl Into<String>, case: CaseLabel, punct: PunctLabel) -> Self {
        Token {
            word: word.into(),
            case,
            punct,
        }
    }

    /// The 2-character encoded label, e.g. `U$`.
    pub fn label(&self) -> String {
        let mut s = String::with_capacity(2);
        s.push(self.case.symbol());
        s.push(self.punct.symbol());
        s
    }

    /// The surface form: first letter uppercased for `U` tokens, trailing
    /// mark attached for punctuated tokens.
    pub fn surface(&self) -> String {
        let mut out = String::with_capacity(self.word.len() + 1);
        match self.case {
            CaseLabel::Upper => {
                let mut chars = self.word.chars();
                if let Some(first) = chars.next() {
                    out.extend(first.to_uppercase());
                    out.push_str(chars.as_str());
                }
            }
            CaseLabel::Lower => out.push_str(&self.word),
        }
        if let Some(mark) = self.punct.surface() {
            out.push(mark);
        }
        out
    }
}

/// An aligned sequence of labeled tokens: one restoration hypothesis or
/// reference, usually covering one chunk or one document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabeledSequence {
    pub tokens: Vec<Token>,
}

impl LabeledSequence {
    pub fn new(tokens: Vec<Token>) -> Self {
        LabeledSequence { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// The lowercase words of the sequence, in order.
    pub fn words(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.word.clone()).collect()
    }

    /// A cloned sub-sequence of `len` tokens starting at `start`.
    pub fn slice(&self, start: usize, len: usize) -> LabeledSequence {
        LabeledSequence::new(self.tokens[start..start + len].to_vec())
    }

    /// Space-separated 2-character labels, one per token; words are dropped.
    pub fn encode(&self) -> String {
        self.tokens
            .iter()
            .map(Token::label)
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Restored plain text: surface forms joined by single spaces. Inverse
    /// of [`LabeledSequence::parse_plain`].
    pub fn render_plain(&self) -> String {
        self.tokens
            .iter()
            .map(Token::surface)
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses a line of plain restored text. Each whitespace-separated
    /// surface word may carry at most one trailing mark from `. , ?`; a
    /// bare mark or extra marks are malformed.
    pub fn parse_plain(line: &str) -> Result<Self, CodecError> {
        let mut tokens = Vec::new();
        for (position, surface) in line.split_whitespace().enumerate() {
            let malformed = || CodecError::MalformedPlainText {
                position,
                token: surface.to_string(),
            };
            let (stem, punct) = match surface.chars().last().and_then(PunctLabel::from_symbol) {
                Some(p) if p != PunctLabel::None => {
                    (&surface[..surface.len() - p.symbol().len_utf8()], p)
                }
                // '$' is not punctuation in plain text; treat it as word material.
                _ => (surface, PunctLabel::None),
            };
            if stem.is_empty() {
                return Err(malformed()); // mark not attached to a word
            }
            if stem.chars().any(|c| matches!(c, '.' | ',' | '?')) {
                return Err(malformed()); // multiple or interior marks
            }
            let case = CaseLabel::of_word(stem);
            tokens.push(Token::new(stem.to_lowercase(), case, punct));
        }
        Ok(LabeledSequence::new(tokens))
    }

    /// Zips an encoded label line onto the chunk's input words.
    pub fn decode<S: AsRef<str>>(encoded: &str, words: &[S]) -> Result<Self, CodecError> {
        let labels = parse_encoded(encoded)?;
        if labels.len() != words.len() {
            return Err(CodecError::LengthMismatch {
                expected: words.len(),
                got: labels.len(),
            });
        }
        let tokens = words
            .iter()
            .zip(labels)
            .map(|(w, (case, punct))| Token::new(w.as_ref(), case, punct))
            .collect();
        Ok(LabeledSequence::new(tokens))
    }

}

impl FromIterator<Token> for LabeledSequence {
    fn from_iter<I: IntoIterator<Item = Token>>(iter: I) -> Self {
        LabeledSequence::new(iter.into_iter().collect())
    }
}

impl IntoIterator for LabeledSequence {
    type Item = Token;
    type IntoIter = std::vec::IntoIter<Token>;
    fn into_iter(self) -> Self::IntoIter {
        self.tokens.into_iter()
    }
}

impl fmt::Display for LabeledSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_plain())
    }
}

/// Parses an encoded label line into `(case, punct)` pairs without needing
/// the underlying words.
pub fn parse_encoded(encoded: &str) -> Result<Vec<(CaseLabel, PunctLabel)>, CodecError> {
    let mut labels = Vec::new();
    for (position, raw) in encoded.split_whitespace().enumerate() {
        let mut chars = raw.chars();
        let parsed = match (chars.next(), chars.next(), chars.next()) {
            (Some(c), Some(p), None) => {
                CaseLabel::from_symbol(c).zip(PunctLabel::from_symbol(p))
            }
            _ => None,
        };
        match parsed {
            Some(pair) => labels.push(pair),
            None => {
                return Err(CodecError::UnknownLabel {
                    label: raw.to_string(),
                    position,
                })
            }
        }
    }
    Ok(labels)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("malformed plain text at word {position}: {token:?}")]
    MalformedPlainText { position: usize, token: String },
    #[error("label count mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("unknown label {label:?} at position {position}")]
    UnknownLabel { label: String, position: usize },
}
