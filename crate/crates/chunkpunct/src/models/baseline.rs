//! Word-frequency baseline: a deterministic stand-in for a trained neural
//! model, good enough to exercise the whole pipeline at desk scale.
//!
//! Case is predicted per word from unigram counts; punctuation from bigram
//! counts `(word, next_word)` inside a chunk and from chunk-final counts
//! for the last word. Unknown words fall back to `L$`.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use crate::chunker::Chunk;
use crate::codec::{CaseLabel, LabeledSequence, PunctLabel, Token};
use crate::models::{ModelError, Restorer};

type PunctCounts = [u64; 4]; // indexed by PunctLabel::priority_index

/// Accumulated label frequencies. Lookups with missing keys fall back to
/// lowercase with no punctuation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BaselineTable {
    /// word -> (upper count, lower count)
    case_freq: HashMap<String, (u64, u64)>,
    /// (word, next word) -> punctuation counts for the first word
    punct_bigram: HashMap<(String, String), PunctCounts>,
    /// word -> punctuation counts when the word ends a chunk
    punct_final: HashMap<String, PunctCounts>,
}

impl BaselineTable {
    pub fn is_empty(&self) -> bool {
        self.case_freq.is_empty() && self.punct_bigram.is_empty() && self.punct_final.is_empty()
    }

    /// Folds one reference chunk into the counts.
    pub fn observe(&mut self, chunk: &LabeledSequence) {
        let n = chunk.len();
        for (i, token) in chunk.tokens.iter().enumerate() {
            let case = self.case_freq.entry(token.word.clone()).or_default();
            match token.case {
                CaseLabel::Upper => case.0 += 1,
                CaseLabel::Lower => case.1 += 1,
            }
            let slot = token.punct.priority_index();
            if i + 1 < n {
                let key = (token.word.clone(), chunk.tokens[i + 1].word.clone());
                self.punct_bigram.entry(key).or_default()[slot] += 1;
            } else {
                self.punct_final.entry(token.word.clone()).or_default()[slot] += 1;
            }
        }
    }

    pub fn predict_case(&self, word: &str) -> CaseLabel {
        match self.case_freq.get(word) {
            Some((upper, lower)) if upper > lower => CaseLabel::Upper,
            _ => CaseLabel::Lower,
        }
    }

    /// Punctuation for an interior word given its successor.
    pub fn predict_punct(&self, word: &str, next: &str) -> PunctLabel {
        self.punct_bigram
            .get(&(word.to_string(), next.to_string()))
            .map_or(PunctLabel::None, argmax_punct)
    }

    /// Punctuation for the last word of a chunk.
    pub fn predict_final_punct(&self, word: &str) -> PunctLabel {
        self.punct_final
            .get(word)
            .map_or(PunctLabel::None, argmax_punct)
    }

    /// Writes the table as sectioned TSV, sorted for stable diffs.
    pub fn save<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "#case")?;
        let mut case: Vec<_> = self.case_freq.iter().collect();
        case.sort_by(|a, b| a.0.cmp(b.0));
        for (word, (upper, lower)) in case {
            writeln!(out, "{word}\t{upper}\t{lower}")?;
        }
        writeln!(out, "#punct_bigram")?;
        let mut bigram: Vec<_> = self.punct_bigram.iter().collect();
        bigram.sort_by(|a, b| a.0.cmp(b.0));
        for ((word, next), counts) in bigram {
            writeln!(
                out,
                "{word}\t{next}\t{}\t{}\t{}\t{}",
                counts[0], counts[1], counts[2], counts[3]
            )?;
        }
        writeln!(out, "#punct_final")?;
        let mut fin: Vec<_> = self.punct_final.iter().collect();
        fin.sort_by(|a, b| a.0.cmp(b.0));
        for (word, counts) in fin {
            writeln!(
                out,
                "{word}\t{}\t{}\t{}\t{}",
                counts[0], counts[1], counts[2], counts[3]
            )?;
        }
        Ok(())
    }

    pub fn load<R: BufRead>(input: R) -> Result<Self, ModelError> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Case,
            Bigram,
            Final,
        }
        let bad = |line: usize, reason: &str| ModelError::TableFormat {
            line,
            reason: reason.to_string(),
        };
        let parse_count = |line: usize, field: &str| {
            field
                .parse::<u64>()
                .map_err(|_| bad(line, "expected a count"))
        };

        let mut table = BaselineTable::default();
        let mut section = Section::None;
        for (number, line) in input.lines().enumerate() {
            let line = line.map_err(|e| bad(number + 1, &e.to_string()))?;
            let line = line.trim_end_matches('\n');
            if line.is_empty() {
                continue;
            }
            match line {
                "#case" => section = Section::Case,
                "#punct_bigram" => section = Section::Bigram,
                "#punct_final" => section = Section::Final,
                _ => {
                    let fields: Vec<&str> = line.split('\t').collect();
                    let n = number + 1;
                    match section {
                        Section::None => return Err(bad(n, "entry before a section header")),
                        Section::Case => {
                            if fields.len() != 3 {
                                return Err(bad(n, "case entries need 3 columns"));
                            }
                            table.case_freq.insert(
                                fields[0].to_string(),
                                (parse_count(n, fields[1])?, parse_count(n, fields[2])?),
                            );
                        }
                        Section::Bigram => {
                            if fields.len() != 6 {
                                return Err(bad(n, "bigram entries need 6 columns"));
                            }
                            let mut counts = PunctCounts::default();
                            for (slot, field) in fields[2..].iter().enumerate() {
                                counts[slot] = parse_count(n, field)?;
                            }
                            table
                                .punct_bigram
                                .insert((fields[0].to_string(), fields[1].to_string()), counts);
                        }
                        Section::Final => {
                            if fields.len() != 5 {
                                return Err(bad(n, "final entries need 5 columns"));
                            }
                            let mut counts = PunctCounts::default();
                            for (slot, field) in fields[1..].iter().enumerate() {
                                counts[slot] = parse_count(n, field)?;
                            }
                            table.punct_final.insert(fields[0].to_string(), counts);
                        }
                    }
                }
            }
        }
        Ok(table)
    }
}

/// Ties resolve to the earliest label in priority order
/// (`$` over `.` over `,` over `?`).
fn argmax_punct(counts: &PunctCounts) -> PunctLabel {
    let mut best = PunctLabel::None;
    let mut best_count = counts[0];
    for label in PunctLabel::ALL {
        let count = counts[label.priority_index()];
        if count > best_count {
            best = label;
            best_count = count;
        }
    }
    best
}

impl Restorer for BaselineTable {
    fn restore_chunk(&self, chunk: &Chunk) -> Result<LabeledSequence, ModelError> {
        let n = chunk.words.len();
        let tokens = chunk
            .words
            .iter()
            .enumerate()
            .map(|(i, word)| {
                let punct = if i + 1 < n {
                    self.predict_punct(word, &chunk.words[i + 1])
                } else {
                    self.predict_final_punct(word)
                };
                Token::new(word.clone(), self.predict_case(word), punct)
            })
            .collect();
        Ok(LabeledSequence::new(tokens))
    }
}

/// Trains a table from (input, target) chunk pairs in the plain format, as
/// produced by corpus preparation. Only the target side is consulted.
pub fn train_baseline<I, A, B>(pairs: I) -> Result<BaselineTable, crate::codec::CodecError>
where
    I: IntoIterator<Item = (A, B)>,
    A: AsRef<str>,
    B: AsRef<str>,
{
    let mut table = BaselineTable::default();
    for (_, target) in pairs {
        let chunk = LabeledSequence::parse_plain(target.as_ref())?;
        table.observe(&chunk);
    }
    Ok(table)
}
