//! Merging overlapped per-chunk hypotheses into one document sequence.
//!
//! Consecutive chunks share `overlap` words, so their hypotheses disagree
//! only on which labels to keep in the shared region. The `min_words_cut`
//! parameter decides: it is the number of words cut from the end of the
//! first chunk, equivalently the number of words at the end of the shared
//! region that are kept from the second chunk. `0` keeps the whole shared
//! region from the first chunk; the overlap size keeps it all from the
//! second. Selection is purely positional; no label is ever blended and no
//! post-editing is applied across seams.
//!
//! [`merge`] works on a complete in-order slice; [`MergeStream`] accepts
//! results in any arrival order and buffers only chunks that arrive ahead
//! of the next needed index, keeping total work linear in the word count.

use std::collections::HashMap;

use thiserror::Error;

use crate::chunker::{Chunk, ChunkConfig};
use crate::codec::{CaseLabel, LabeledSequence, PunctLabel, Token};

/// Merge parameter: how many of the shared words take their labels from
/// the later chunk. Valid values range from 0 to the overlap in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergeConfig {
    pub min_words_cut: usize,
}

impl MergeConfig {
    pub fn new(min_words_cut: usize) -> Self {
        MergeConfig { min_words_cut }
    }

    pub fn validate_against(&self, cfg: &ChunkConfig) -> Result<(), MergeError> {
        if self.min_words_cut > cfg.overlap() {
            return Err(MergeError::CutExceedsOverlap {
                min_words_cut: self.min_words_cut,
                overlap: cfg.overlap(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MergeError {
    #[error("min_words_cut {min_words_cut} exceeds the overlap {overlap}")]
    CutExceedsOverlap { min_words_cut: usize, overlap: usize },
    #[error("chunk {chunk_index}: hypothesis has {got} tokens for {expected} words")]
    LengthMismatch {
        chunk_index: usize,
        expected: usize,
        got: usize,
    },
    #[error(
        "chunks {chunk_index} and {} disagree in the shared region at offset {offset}: {first:?} vs {second:?}",
        chunk_index + 1
    )]
    OverlapMismatch {
        chunk_index: usize,
        offset: usize,
        first: String,
        second: String,
    },
    #[error("chunk {index} never arrived")]
    MissingChunk { index: usize },
    #[error("chunk {index} arrived twice")]
    DuplicateChunk { index: usize },
}

/// Repairs a model hypothesis whose length drifted from the chunk it was
/// asked to restore.
///
/// The output always has exactly one token per chunk word, with the word
/// fields equal to the chunk words. Words matched by a longest common
/// subsequence keep the model's labels; unmatched words get no punctuation
/// and the case of the nearest matched token to their left (lowercase when
/// there is none). A hypothesis that already mirrors the chunk words passes
/// through unchanged.
pub fn align<S: AsRef<str>>(chunk_words: &[S], output: &LabeledSequence) -> LabeledSequence {
    let n = chunk_words.len();
    let m = output.len();
    if n == m
        && chunk_words
            .iter()
            .zip(&output.tokens)
            .all(|(w, t)| w.as_ref() == t.word)
    {
        return output.clone();
    }

    // Classic LCS table over word equality.
    let mut table = vec![0usize; (n + 1) * (m + 1)];
    let idx = |i: usize, j: usize| i * (m + 1) + j;
    for i in 1..=n {
        for j in 1..=m {
            table[idx(i, j)] = if chunk_words[i - 1].as_ref() == output.tokens[j - 1].word {
                table[idx(i - 1, j - 1)] + 1
            } else {
                table[idx(i - 1, j)].max(table[idx(i, j - 1)])
            };
        }
    }

    // matched[i] = model token aligned to input word i, if any.
    let mut matched: Vec<Option<usize>> = vec![None; n];
    let (mut i, mut j) = (n, m);
    while i > 0 && j > 0 {
        if chunk_words[i - 1].as_ref() == output.tokens[j - 1].word
            && table[idx(i, j)] == table[idx(i - 1, j - 1)] + 1
        {
            matched[i - 1] = Some(j - 1);
            i -= 1;
            j -= 1;
        } else if table[idx(i - 1, j)] >= table[idx(i, j - 1)] {
            i -= 1;
        } else {
            j -= 1;
        }
    }

    let mut last_case = CaseLabel::Lower;
    let tokens = chunk_words
        .iter()
        .zip(&matched)
        .map(|(word, hit)| match hit {
            Some(j) => {
                let t = &output.tokens[*j];
                last_case = t.case;
                Token::new(word.as_ref(), t.case, t.punct)
            }
            None => Token::new(word.as_ref(), last_case, PunctLabel::None),
        })
        .collect();
    LabeledSequence::new(tokens)
}

/// Merges aligned chunk hypotheses, given in index order, into one
/// document sequence. Runs in time linear in the total word count.
///
/// The chunks must be split-consistent (see `chunker::coverage_check`);
/// hypotheses whose overlap words disagree or whose lengths drifted are
/// rejected.
pub fn merge(
    items: &[(Chunk, LabeledSequence)],
    cfg: &ChunkConfig,
    mcfg: &MergeConfig,
) -> Result<LabeledSequence, MergeError> {
    mcfg.validate_against(cfg)?;
    let mut out = Vec::with_capacity(items.last().map_or(0, |(c, _)| c.end()));
    for (position, (chunk, seq)) in items.iter().enumerate() {
        check_aligned(chunk, seq)?;
        let keep_from = if position == 0 {
            0
        } else {
            shared_len(cfg, chunk) - cut_of(cfg, mcfg, chunk)
        };
        let drop_right = match items.get(position + 1) {
            Some((next_chunk, _)) => {
                check_overlap(chunk, next_chunk, cfg)?;
                cut_of(cfg, mcfg, next_chunk)
            }
            None => 0,
        };
        out.extend_from_slice(&seq.tokens[keep_from..seq.len() - drop_right]);
    }
    Ok(LabeledSequence::new(out))
}

/// Number of words cut from the end of the earlier chunk of a pair,
/// clamped to the actual shared region of a short final chunk.
fn cut_of(cfg: &ChunkConfig, mcfg: &MergeConfig, second: &Chunk) -> usize {
    mcfg.min_words_cut.min(shared_len(cfg, second))
}

fn shared_len(cfg: &ChunkConfig, second: &Chunk) -> usize {
    cfg.overlap().min(second.words.len())
}

fn check_aligned(chunk: &Chunk, seq: &LabeledSequence) -> Result<(), MergeError> {
    if seq.len() != chunk.words.len() {
        return Err(MergeError::LengthMismatch {
            chunk_index: chunk.index,
            expected: chunk.words.len(),
            got: seq.len(),
        });
    }
    Ok(())
}

fn check_overlap(first: &Chunk, second: &Chunk, cfg: &ChunkConfig) -> Result<(), MergeError> {
    let shared = shared_len(cfg, second);
    debug_assert!(shared <= first.words.len(), "split emits no subset chunks");
    let tail = &first.words[first.words.len() - shared..];
    for (offset, (a, b)) in tail.iter().zip(&second.words[..shared]).enumerate() {
        if a != b {
            return Err(MergeError::OverlapMismatch {
                chunk_index: first.index,
                offset,
                first: a.clone(),
                second: b.clone(),
            });
        }
    }
    Ok(())
}

/// Streaming merge accepting `(chunk, hypothesis)` results in any arrival
/// order. Results ahead of the next needed index are buffered; everything
/// else is appended to the output as soon as its right edge is resolved
/// against the following chunk, so total work stays linear.
#[derive(Debug)]
pub struct MergeStream {
    cfg: ChunkConfig,
    mcfg: MergeConfig,
    next_index: usize,
    pending: Option<(Chunk, LabeledSequence, usize)>,
    buffered: HashMap<usize, (Chunk, LabeledSequence)>,
    out: Vec<Token>,
}

impl MergeStream {
    pub fn new(cfg: &ChunkConfig, mcfg: &MergeConfig) -> Result<Self, MergeError> {
        mcfg.validate_against(cfg)?;
        Ok(MergeStream {
            cfg: *cfg,
            mcfg: *mcfg,
            next_index: 0,
            pending: None,
            buffered: HashMap::new(),
            out: Vec::new(),
        })
    }

    pub fn push(&mut self, chunk: Chunk, seq: LabeledSequence) -> Result<(), MergeError> {
        check_aligned(&chunk, &seq)?;
        let index = chunk.index;
        if index < self.next_index || self.buffered.contains_key(&index) {
            return Err(MergeError::DuplicateChunk { index });
        }
        self.buffered.insert(index, (chunk, seq));
        while let Some((chunk, seq)) = self.buffered.remove(&self.next_index) {
            self.advance(chunk, seq)?;
            self.next_index += 1;
        }
        Ok(())
    }

    fn advance(&mut self, chunk: Chunk, seq: LabeledSequence) -> Result<(), MergeError> {
        match self.pending.take() {
            None => {
                self.pending = Some((chunk, seq, 0));
            }
            Some((prev_chunk, prev_seq, prev_from)) => {
                check_overlap(&prev_chunk, &chunk, &self.cfg)?;
                let cut = cut_of(&self.cfg, &self.mcfg, &chunk);
                let shared = shared_len(&self.cfg, &chunk);
                // The previous hypothesis is owned, so its kept tokens move
                // into the output without cloning.
                let mut tokens = prev_seq.tokens;
                let keep = tokens.len() - cut;
                tokens.truncate(keep);
                self.out.extend(tokens.drain(prev_from..));
                self.pending = Some((chunk, seq, shared - cut));
            }
        }
        Ok(())
    }

    /// Finishes the stream, failing if any chunk index never arrived.
    pub fn finish(mut self) -> Result<LabeledSequence, MergeError> {
        if !self.buffered.is_empty() {
            return Err(MergeError::MissingChunk {
                index: self.next_index,
            });
        }
        if let Some((_, seq, from)) = self.pending.take() {
            let mut tokens = seq.tokens;
            self.out.extend(tokens.drain(from..));
        }
        Ok(LabeledSequence::new(self.out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chunker::split;
    use proptest::prelude::*;

    const SAMPLE_REF: &str =
        "The bill does not become law, unless houses of Congress vote to override the veto.";

    fn sample_items(cfg: &ChunkConfig) -> (LabeledSequence, Vec<(Chunk, LabeledSequence)>) {
        let reference = LabeledSequence::parse_plain(SAMPLE_REF).unwrap();
        let words = reference.words();
        let items = split(&words, cfg)
            .into_iter()
            .map(|c| {
                let seq = reference.slice(c.start, c.words.len());
                (c, seq)
            })
            .collect();
        (reference, items)
    }

    #[test]
    fn align_is_identity_on_matching_output() {
        let seq = LabeledSequence::parse_plain("The bill does not become law,").unwrap();
        let words = seq.words();
        assert_eq!(align(&words, &seq), seq);
    }

    #[test]
    fn align_reinserts_dropped_word() {
        // LCS by hand: model output lost "of"; it comes back with no mark
        // and the case of its left neighbour "houses" (lowercase).
        let full = LabeledSequence::parse_plain(
            "The bill does not become law, unless houses of Congress",
        )
        .unwrap();
        let words = full.words();
        let mut dropped = full.clone();
        dropped.tokens.remove(8);
        let repaired = align(&words, &dropped);
        assert_eq!(repaired.len(), 10);
        assert_eq!(repaired.tokens[8].word, "of");
        assert_eq!(repaired.tokens[8].case, CaseLabel::Lower);
        assert_eq!(repaired.tokens[8].punct, PunctLabel::None);
        assert_eq!(repaired.tokens[9], full.tokens[9]);
        assert_eq!(&repaired.tokens[..8], &full.tokens[..8]);
    }

    #[test]
    fn align_with_no_common_words_defaults_everything() {
        let words = ["alpha", "beta", "gamma"];
        let output = LabeledSequence::parse_plain("Delta? Epsilon.").unwrap();
        let repaired = align(&words, &output);
        for (token, word) in repaired.tokens.iter().zip(words) {
            assert_eq!(token.word, word);
            assert_eq!(token.case, CaseLabel::Lower);
            assert_eq!(token.punct, PunctLabel::None);
        }
    }

    #[test]
    fn align_inserted_word_takes_nearest_left_case() {
        let words = ["congress", "vote", "to"];
        // "vote" missing; nearest matched token to its left is "Congress" (U).
        let output = LabeledSequence::parse_plain("Congress to").unwrap();
        let repaired = align(&words, &output);
        assert_eq!(repaired.tokens[1].word, "vote");
        assert_eq!(repaired.tokens[1].case, CaseLabel::Upper);
        assert_eq!(repaired.tokens[1].punct, PunctLabel::None);
    }

    #[test]
    fn merge_reconstructs_reference_for_any_cut() {
        let cfg = ChunkConfig::new(10, 5).unwrap();
        let (reference, items) = sample_items(&cfg);
        for m in 0..=cfg.overlap() {
            let merged = merge(&items, &cfg, &MergeConfig::new(m)).unwrap();
            assert_eq!(merged, reference, "min_words_cut={m}");
            assert_eq!(merged.render_plain(), SAMPLE_REF);
        }
    }

    #[test]
    fn merge_takes_corrupted_overlap_from_second_chunk_when_cut_is_full() {
        let cfg = ChunkConfig::new(10, 5).unwrap();
        let (reference, mut items) = sample_items(&cfg);
        // Corrupt the labels of chunk 0's shared tail; with the full cut the
        // merged labels must all come from chunk 1, restoring the reference.
        for token in &mut items[0].1.tokens[5..] {
            token.case = token.case.flipped();
            token.punct = PunctLabel::Question;
        }
        let merged = merge(&items, &cfg, &MergeConfig::new(5)).unwrap();
        assert_eq!(merged, reference);
        // With no cut, the corrupted labels survive instead.
        let merged = merge(&items, &cfg, &MergeConfig::new(0)).unwrap();
        assert_ne!(merged, reference);
        assert_eq!(merged.tokens[..5], reference.tokens[..5]);
        assert_eq!(merged.tokens[10..], reference.tokens[10..]);
    }

    #[test]
    fn merge_rejects_cut_beyond_overlap() {
        let cfg = ChunkConfig::new(10, 5).unwrap();
        let (_, items) = sample_items(&cfg);
        let err = merge(&items, &cfg, &MergeConfig::new(6)).unwrap_err();
        assert_eq!(
            err,
            MergeError::CutExceedsOverlap {
                min_words_cut: 6,
                overlap: 5
            }
        );
    }

    #[test]
    fn merge_rejects_unaligned_hypothesis() {
        let cfg = ChunkConfig::new(10, 5).unwrap();
        let (_, mut items) = sample_items(&cfg);
        items[1].1.tokens.pop();
        let err = merge(&items, &cfg, &MergeConfig::new(0)).unwrap_err();
        assert_eq!(
            err,
            MergeError::LengthMismatch {
                chunk_index: 1,
                expected: 10,
                got: 9
            }
        );
    }

    #[test]
    fn merge_rejects_disagreeing_overlap_words() {
        let cfg = ChunkConfig::new(10, 5).unwrap();
        let (_, mut items) = sample_items(&cfg);
        items[1].0.words[0] = "edited".to_string();
        items[1].1.tokens[0].word = "edited".to_string();
        let err = merge(&items, &cfg, &MergeConfig::new(0)).unwrap_err();
        assert!(matches!(
            err,
            MergeError::OverlapMismatch {
                chunk_index: 0,
                offset: 0,
                ..
            }
        ));
    }

    #[test]
    fn stream_matches_merge_in_any_order() {
        let cfg = ChunkConfig::new(6, 3).unwrap();
        let words: Vec<String> = (0..25).map(|i| format!("w{}", i % 4)).collect();
        let reference: LabeledSequence = words
            .iter()
            .enumerate()
            .map(|(i, w)| {
                Token::new(
                    w.clone(),
                    if i % 3 == 0 { CaseLabel::Upper } else { CaseLabel::Lower },
                    PunctLabel::ALL[i % 4],
                )
            })
            .collect();
        let items: Vec<(Chunk, LabeledSequence)> = split(&words, &cfg)
            .into_iter()
            .map(|c| {
                let seq = reference.slice(c.start, c.words.len());
                (c, seq)
            })
            .collect();
        let mcfg = MergeConfig::new(2);
        let expected = merge(&items, &cfg, &mcfg).unwrap();

        let mut in_order = MergeStream::new(&cfg, &mcfg).unwrap();
        for (c, s) in items.clone() {
            in_order.push(c, s).unwrap();
        }
        assert_eq!(in_order.finish().unwrap(), expected);

        let mut reversed = MergeStream::new(&cfg, &mcfg).unwrap();
        for (c, s) in items.into_iter().rev() {
            reversed.push(c, s).unwrap();
        }
        assert_eq!(reversed.finish().unwrap(), expected);
    }

    #[test]
    fn stream_reports_missing_chunk() {
        let cfg = ChunkConfig::new(10, 5).unwrap();
        let words: Vec<String> = (0..20).map(|i| format!("w{i}")).collect();
        let all_lower: LabeledSequence = words
            .iter()
            .map(|w| Token::new(w.clone(), CaseLabel::Lower, PunctLabel::None))
            .collect();
        let items: Vec<(Chunk, LabeledSequence)> = split(&words, &cfg)
            .into_iter()
            .map(|c| {
                let seq = all_lower.slice(c.start, c.words.len());
                (c, seq)
            })
            .collect();
        assert_eq!(items.len(), 3);
        let mut stream = MergeStream::new(&cfg, &MergeConfig::new(0)).unwrap();
        for (c, s) in items.into_iter().enumerate().filter(|(i, _)| *i != 1).map(|(_, x)| x) {
            stream.push(c, s).unwrap();
        }
        assert_eq!(
            stream.finish().unwrap_err(),
            MergeError::MissingChunk { index: 1 }
        );
    }

    #[test]
    fn stream_rejects_duplicate_chunk() {
        let cfg = ChunkConfig::new(10, 5).unwrap();
        let chunk = Chunk {
            index: 0,
            start: 0,
            words: vec!["a".into()],
        };
        let seq = LabeledSequence::parse_plain("a").unwrap();
        let mut stream = MergeStream::new(&cfg, &MergeConfig::new(0)).unwrap();
        stream.push(chunk.clone(), seq.clone()).unwrap();
        assert_eq!(
            stream.push(chunk, seq).unwrap_err(),
            MergeError::DuplicateChunk { index: 0 }
        );
    }

    /// Independent re-statement of the merge rule via truncate/extend, used
    /// as a provenance oracle for the positional selection.
    fn naive_merge(
        items: &[(Chunk, LabeledSequence)],
        cfg: &ChunkConfig,
        m: usize,
    ) -> Vec<Token> {
        let mut out: Vec<Token> = Vec::new();
        for (i, (chunk, seq)) in items.iter().enumerate() {
            if i == 0 {
                out.extend(seq.tokens.iter().cloned());
            } else {
                let shared = cfg.overlap().min(chunk.words.len());
                let cut = m.min(shared);
                out.truncate(out.len() - cut);
                out.extend(seq.tokens[shared - cut..].iter().cloned());
            }
        }
        out
    }

    fn arb_case() -> impl Strategy<Value = CaseLabel> {
        prop_oneof![Just(CaseLabel::Upper), Just(CaseLabel::Lower)]
    }

    proptest! {
        #[test]
        fn reconstruction_identity(
            n in 1usize..150,
            k in 2usize..20,
            seed_words in prop::collection::vec("[a-z]{1,4}", 1..8),
        ) {
            let cfg = ChunkConfig::with_default_overlap(k).unwrap();
            let words: Vec<String> = (0..n).map(|i| seed_words[i % seed_words.len()].clone()).collect();
            let reference: LabeledSequence = words
                .iter()
                .enumerate()
                .map(|(i, w)| Token::new(
                    w.clone(),
                    if i % 5 == 0 { CaseLabel::Upper } else { CaseLabel::Lower },
                    PunctLabel::ALL[i % 4],
                ))
                .collect();
            let items: Vec<(Chunk, LabeledSequence)> = split(&words, &cfg)
                .into_iter()
                .map(|c| {
                    let seq = reference.slice(c.start, c.words.len());
                    (c, seq)
                })
                .collect();
            for m in 0..=cfg.overlap() {
                let merged = merge(&items, &cfg, &MergeConfig::new(m)).unwrap();
                prop_assert_eq!(&merged, &reference, "m={}", m);
            }
        }

        #[test]
        fn positional_provenance_and_length(
            n in 1usize..120,
            k in 2usize..16,
            m_frac in 0.0f64..=1.0,
            labels in prop::collection::vec((any::<bool>(), 0usize..4), 1..2048),
        ) {
            let cfg = ChunkConfig::with_default_overlap(k).unwrap();
            let m = (m_frac * cfg.overlap() as f64).round() as usize;
            let words: Vec<String> = (0..n).map(|i| format!("w{}", i % 3)).collect();
            // Per-chunk hypotheses with arbitrary labels, so the shared
            // regions genuinely disagree and selection provenance shows.
            let mut label_iter = labels.into_iter().cycle();
            let items: Vec<(Chunk, LabeledSequence)> = split(&words, &cfg)
                .into_iter()
                .map(|c| {
                    let seq: LabeledSequence = c
                        .words
                        .iter()
                        .map(|w| {
                            let (upper, p) = label_iter.next().unwrap();
                            Token::new(
                                w.clone(),
                                if upper { CaseLabel::Upper } else { CaseLabel::Lower },
                                PunctLabel::ALL[p],
                            )
                        })
                        .collect();
                    (c, seq)
                })
                .collect();
            let merged = merge(&items, &cfg, &MergeConfig::new(m)).unwrap();
            prop_assert_eq!(merged.len(), n);
            prop_assert_eq!(merged.tokens, naive_merge(&items, &cfg, m));
        }

        #[test]
        fn stream_is_arrival_order_independent(
            n in 1usize..100,
            k in 2usize..12,
            order_seed in any::<u64>(),
            case_flips in prop::collection::vec(arb_case(), 1..512),
        ) {
            let cfg = ChunkConfig::with_default_overlap(k).unwrap();
            let m = cfg.overlap() / 2;
            let words: Vec<String> = (0..n).map(|i| format!("w{}", i % 5)).collect();
            let mut cases = case_flips.into_iter().cycle();
            let items: Vec<(Chunk, LabeledSequence)> = split(&words, &cfg)
                .into_iter()
                .map(|c| {
                    let seq: LabeledSequence = c
                        .words
                        .iter()
                        .map(|w| Token::new(w.clone(), cases.next().unwrap(), PunctLabel::None))
                        .collect();
                    (c, seq)
                })
                .collect();
            let expected = merge(&items, &cfg, &MergeConfig::new(m)).unwrap();

            // Deterministic pseudo-shuffle of arrival order.
            let mut shuffled = items;
            let len = shuffled.len();
            let mut state = order_seed | 1;
            for i in (1..len).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (state as usize) % (i + 1));
            }
            let mut stream = MergeStream::new(&cfg, &MergeConfig::new(m)).unwrap();
            for (c, s) in shuffled {
                stream.push(c, s).unwrap();
            }
            prop_assert_eq!(stream.finish().unwrap(), expected);
        }
    }
}
