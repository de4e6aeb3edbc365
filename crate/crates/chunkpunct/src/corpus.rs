//! Corpus preparation: clean raw text down to the restricted alphabet
//! (letters plus `. , ?`), simulate ASR input by lowercasing and stripping
//! punctuation, and emit aligned (input, target) chunk pairs for training
//! and evaluation.

use crate::chunker::{self, ChunkConfig};
use crate::codec::{CaseLabel, LabeledSequence, PunctLabel, TextFormat, Token};

/// A cleaned sentence: words with their original casing plus one
/// trailing-punctuation label per word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanSentence {
    pub words: Vec<String>,
    pub puncts: Vec<PunctLabel>,
}

impl CleanSentence {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// The sentence as restored plain text, marks attached to their words.
    pub fn render(&self) -> String {
        self.words
            .iter()
            .zip(&self.puncts)
            .map(|(w, p)| match p.surface() {
                Some(mark) => format!("{w}{mark}"),
                None => w.clone(),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// The reference token sequence: lowercase words with case labels taken
    /// from the original surface forms.
    pub fn to_labeled(&self) -> LabeledSequence {
        self.words
            .iter()
            .zip(&self.puncts)
            .map(|(w, p)| Token::new(w.to_lowercase(), CaseLabel::of_word(w), *p))
            .collect()
    }
}

/// Cleanup options. The default keeps any Unicode-alphabetic character;
/// `ascii_only` restricts words to ASCII letters.
#[derive(Debug, Clone, Copy, Default)]
pub struct CleanOptions {
    pub ascii_only: bool,
}

/// Cleans raw text into sentences over the restricted alphabet.
///
/// Only letters and the three marks `. , ?` survive. Digits, symbols,
/// apostrophes and hyphens are deleted in place, so `don't` becomes `dont`.
/// A surviving mark labels the nearest preceding word that survived
/// cleanup; when several marks pile up on one word the last one wins.
/// Sentences end after a word labeled `.` or `?`, and at end of input.
pub fn clean_text(raw: &str) -> Vec<CleanSentence> {
    clean_text_opts(raw, CleanOptions::default())
}

pub fn clean_text_opts(raw: &str, opts: CleanOptions) -> Vec<CleanSentence> {
    let keep = |c: char| {
        if opts.ascii_only {
            c.is_ascii_alphabetic()
        } else {
            c.is_alphabetic()
        }
    };

    let mut tokens: Vec<(String, PunctLabel)> = Vec::new();
    let mut current = String::new();
    let flush = |current: &mut String, tokens: &mut Vec<(String, PunctLabel)>| {
        if !current.is_empty() {
            tokens.push((std::mem::take(current), PunctLabel::None));
        }
    };

    for c in raw.chars() {
        if c.is_whitespace() {
            flush(&mut current, &mut tokens);
        } else if let Some(label) = PunctLabel::from_symbol(c).filter(|p| *p != PunctLabel::None) {
            flush(&mut current, &mut tokens);
            if let Some(last) = tokens.last_mut() {
                last.1 = label;
            }
            // A mark with no preceding word is dropped.
        } else if keep(c) {
            current.push(c);
        }
        // Everything else (digits, symbols, apostrophes, hyphens) is deleted.
    }
    flush(&mut current, &mut tokens);

    let mut sentences = Vec::new();
    let mut words = Vec::new();
    let mut puncts = Vec::new();
    for (word, punct) in tokens {
        words.push(word);
        puncts.push(punct);
        if matches!(punct, PunctLabel::FullStop | PunctLabel::Question) {
            sentences.push(CleanSentence {
                words: std::mem::take(&mut words),
                puncts: std::mem::take(&mut puncts),
            });
        }
    }
    if !words.is_empty() {
        sentences.push(CleanSentence { words, puncts });
    }
    sentences
}

/// The ASR-simulated form of a sentence: lowercase words, labels dropped.
pub fn to_asr_input(sentence: &CleanSentence) -> Vec<String> {
    sentence.words.iter().map(|w| w.to_lowercase()).collect()
}

/// Concatenates the reference tokens of all sentences into one document
/// stream, the unit that chunking operates on.
pub fn reference_stream(sentences: &[CleanSentence]) -> LabeledSequence {
    sentences
        .iter()
        .flat_map(|s| s.to_labeled().into_iter())
        .collect()
}

/// Splits the document stream into aligned (input, target) chunk line
/// pairs. Inputs are lowercase unpunctuated chunk lines; targets are the
/// matching reference chunks in the requested format.
pub fn make_pairs(
    sentences: &[CleanSentence],
    cfg: &ChunkConfig,
    format: TextFormat,
) -> Vec<(String, String)> {
    let reference = reference_stream(sentences);
    let words = reference.words();
    chunker::split(&words, cfg)
        .into_iter()
        .map(|chunk| {
            let target = reference.slice(chunk.start, chunk.words.len());
            let input = chunk.words.join(" ");
            let target = match format {
                TextFormat::Plain => target.render_plain(),
                TextFormat::Encoded => target.encode(),
            };
            (input, target)
        })
        .collect()
}

/// Label instance counts over a cleaned corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorpusStats {
    pub upper: u64,
    pub lower: u64,
    pub full_stop: u64,
    pub comma: u64,
    pub question: u64,
    pub none: u64,
}

impl CorpusStats {
    pub fn total_words(&self) -> u64 {
        self.upper + self.lower
    }
}

/// Counts every case and punctuation label once per word.
pub fn stats(sentences: &[CleanSentence]) -> CorpusStats {
    let mut out = CorpusStats::default();
    for sentence in sentences {
        for (word, punct) in sentence.words.iter().zip(&sentence.puncts) {
            match CaseLabel::of_word(word) {
                CaseLabel::Upper => out.upper += 1,
                CaseLabel::Lower => out.lower += 1,
            }
            match punct {
                PunctLabel::None => out.none += 1,
                PunctLabel::FullStop => out.full_stop += 1,
                PunctLabel::Comma => out.comma += 1,
                PunctLabel::Question => out.question += 1,
            }
        }
    }
    out
}
