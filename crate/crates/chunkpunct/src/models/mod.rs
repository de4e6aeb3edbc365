//! Restoration models: the per-chunk contract plus deterministic built-ins
//! (oracle, boundary noise, frequency baseline) and a subprocess adapter
//! for external neural models.
//!
//! Every model maps a lowercase unpunctuated chunk to a
//! [`LabeledSequence`]. Built-in models are length- and word-preserving by
//! construction; the external adapter repairs length drift through
//! `merger::align` before its output enters the pipeline.

mod baseline;
mod external;

pub use baseline::{train_baseline, BaselineTable};
pub use external::ExternalModel;

use std::sync::Arc;

use thiserror::Error;

use crate::chunker::{self, Chunk, ChunkConfig};
use crate::codec::{LabeledSequence, PunctLabel};

/// A restoration model usable concurrently across chunks. Outputs must
/// depend only on the chunk, never on call order.
pub trait Restorer: Send + Sync {
    fn restore_chunk(&self, chunk: &Chunk) -> Result<LabeledSequence, ModelError>;

    /// Restores several chunks in one request. The default forwards to
    /// [`Restorer::restore_chunk`]; batching models override this.
    fn restore_batch(&self, chunks: &[Chunk]) -> Result<Vec<LabeledSequence>, ModelError> {
        chunks.iter().map(|c| self.restore_chunk(c)).collect()
    }

    /// How many chunks the model prefers per `restore_batch` call.
    fn preferred_batch_size(&self) -> usize {
        1
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("oracle has no reference for chunk {chunk_index}")]
    MissingReference { chunk_index: usize },
    #[error("oracle reference disagrees with chunk {chunk_index} at word {position}")]
    ReferenceMismatch { chunk_index: usize, position: usize },
    #[error("corruption probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("oracle and boundary-noise models require a reference document")]
    ReferenceRequired,
    #[error("failed to start external model `{command}`: {reason}")]
    ExternalSpawn { command: String, reason: String },
    #[error("external model failed on chunk {chunk_index}: {reason}")]
    External { chunk_index: usize, reason: String },
    #[error("model table line {line}: {reason}")]
    TableFormat { line: usize, reason: String },
}

/// Declarative model selection, instantiated per document (the oracle
/// variants need the document's reference) or shared (baseline, external).
#[derive(Clone)]
pub enum RestorerSpec {
    /// Returns the reference labels themselves; the pipeline identity probe.
    Oracle,
    /// Oracle labels corrupted near chunk edges: within `boundary` words of
    /// either edge, with probability `prob`, the case label flips and the
    /// punctuation label is erased.
    BoundaryNoise {
        boundary: usize,
        prob: f64,
        seed: u64,
    },
    /// Word-frequency baseline backed by a trained [`BaselineTable`].
    Baseline(Arc<BaselineTable>),
    /// Line-protocol subprocess.
    External(Arc<ExternalModel>),
}

impl RestorerSpec {
    /// Instantiates the model for one document. `reference` is required by
    /// the oracle variants and ignored by the others.
    pub fn for_document(
        &self,
        reference: Option<&LabeledSequence>,
        cfg: &ChunkConfig,
    ) -> Result<Arc<dyn Restorer>, ModelError> {
        match self {
            RestorerSpec::Oracle => {
                let reference = reference.ok_or(ModelError::ReferenceRequired)?;
                Ok(Arc::new(Oracle::from_reference(reference, cfg)))
            }
            RestorerSpec::BoundaryNoise {
                boundary,
                prob,
                seed,
            } => {
                if !(0.0..=1.0).contains(prob) {
                    return Err(ModelError::InvalidProbability(*prob));
                }
                let reference = reference.ok_or(ModelError::ReferenceRequired)?;
                Ok(Arc::new(BoundaryNoise {
                    oracle: Oracle::from_reference(reference, cfg),
                    boundary: *boundary,
                    prob: *prob,
                    seed: *seed,
                }))
            }
            RestorerSpec::Baseline(table) => Ok(table.clone()),
            RestorerSpec::External(model) => Ok(model.clone()),
        }
    }
}

/// Test model answering every chunk with its reference labels, keyed by
/// chunk index.
pub struct Oracle {
    chunks: Vec<LabeledSequence>,
}

impl Oracle {
    /// Oracle keyed by chunk index over pre-split reference chunks.
    pub fn from_chunks(chunks: Vec<LabeledSequence>) -> Self {
        Oracle { chunks }
    }

    /// Splits a reference document stream with the chunk geometry in force.
    pub fn from_reference(reference: &LabeledSequence, cfg: &ChunkConfig) -> Self {
        let words = reference.words();
        let chunks = chunker::split(&words, cfg)
            .into_iter()
            .map(|c| reference.slice(c.start, c.words.len()))
            .collect();
        Oracle { chunks }
    }
}

impl Restorer for Oracle {
    fn restore_chunk(&self, chunk: &Chunk) -> Result<LabeledSequence, ModelError> {
        let seq = self
            .chunks
            .get(chunk.index)
            .filter(|seq| seq.len() == chunk.words.len())
            .ok_or(ModelError::MissingReference {
                chunk_index: chunk.index,
            })?;
        for (position, (token, word)) in seq.tokens.iter().zip(&chunk.words).enumerate() {
            if &token.word != word {
                return Err(ModelError::ReferenceMismatch {
                    chunk_index: chunk.index,
                    position,
                });
            }
        }
        Ok(seq.clone())
    }
}

/// Oracle wrapped with deterministic boundary corruption, simulating the
/// degraded predictions real models produce near chunk edges.
pub struct BoundaryNoise {
    oracle: Oracle,
    boundary: usize,
    prob: f64,
    seed: u64,
}

impl BoundaryNoise {
    pub fn new(oracle: Oracle, boundary: usize, prob: f64, seed: u64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&prob) {
            return Err(ModelError::InvalidProbability(prob));
        }
        Ok(BoundaryNoise {
            oracle,
            boundary,
            prob,
            seed,
        })
    }
}

impl Restorer for BoundaryNoise {
    fn restore_chunk(&self, chunk: &Chunk) -> Result<LabeledSequence, ModelError> {
        let reference = self.oracle.restore_chunk(chunk)?;
        Ok(corrupt_boundary(
            &reference,
            chunk.index,
            self.boundary,
            self.prob,
            self.seed,
        ))
    }
}

/// Corrupts the labels of positions within `boundary` words of either chunk
/// edge: with probability `prob`, keyed deterministically by
/// `(seed, chunk_index, position)`, the case label flips and the
/// punctuation label becomes `$`. Interior positions are untouched.
pub fn corrupt_boundary(
    reference: &LabeledSequence,
    chunk_index: usize,
    boundary: usize,
    prob: f64,
    seed: u64,
) -> LabeledSequence {
    let len = reference.len();
    let mut out = reference.clone();
    for (position, token) in out.tokens.iter_mut().enumerate() {
        let near_edge = position < boundary || position >= len.saturating_sub(boundary);
        if near_edge && position_draw(seed, chunk_index, position) < prob {
            token.case = token.case.flipped();
            token.punct = PunctLabel::None;
        }
    }
    out
}

/// Uniform draw in [0, 1) that is a pure function of its key, so the noise
/// model is reproducible across runs, threads and platforms.
fn position_draw(seed: u64, chunk_index: usize, position: usize) -> f64 {
    let mut h = mix64(seed ^ 0x9E37_79B9_7F4A_7C15);
    h = mix64(h.wrapping_add(chunk_index as u64));
    h = mix64(h.wrapping_add(position as u64));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{CaseLabel, Token};

    const SAMPLE_REF: &str =
        "The bill does not become law, unless houses of Congress vote to override the veto.";

    fn sample_setup() -> (LabeledSequence, ChunkConfig, Vec<Chunk>) {
        let reference = LabeledSequence::parse_plain(SAMPLE_REF).unwrap();
        let cfg = ChunkConfig::new(10, 5).unwrap();
        let chunks = chunker::split(&reference.words(), &cfg);
        (reference, cfg, chunks)
    }

    #[test]
    fn oracle_returns_reference_chunk_labels() {
        let (reference, cfg, chunks) = sample_setup();
        let oracle = Oracle::from_reference(&reference, &cfg);
        let restored = oracle.restore_chunk(&chunks[0]).unwrap();
        assert_eq!(
            restored.render_plain(),
            "The bill does not become law, unless houses of Congress"
        );
        assert_eq!(restored.encode(), "U$ L$ L$ L$ L$ L, L$ L$ L$ U$");
    }

    #[test]
    fn oracle_rejects_unknown_chunk_index() {
        let (reference, cfg, mut chunks) = sample_setup();
        let oracle = Oracle::from_reference(&reference, &cfg);
        chunks[0].index = 9;
        assert_eq!(
            oracle.restore_chunk(&chunks[0]).unwrap_err(),
            ModelError::MissingReference { chunk_index: 9 }
        );
    }

    #[test]
    fn oracle_rejects_disagreeing_words() {
        let (reference, cfg, mut chunks) = sample_setup();
        let oracle = Oracle::from_reference(&reference, &cfg);
        chunks[1].words[3] = "edited".to_string();
        assert_eq!(
            oracle.restore_chunk(&chunks[1]).unwrap_err(),
            ModelError::ReferenceMismatch {
                chunk_index: 1,
                position: 3
            }
        );
    }

    #[test]
    fn zero_boundary_or_zero_probability_is_the_oracle() {
        let (reference, cfg, chunks) = sample_setup();
        let oracle = Oracle::from_reference(&reference, &cfg);
        let no_width = BoundaryNoise::new(Oracle::from_reference(&reference, &cfg), 0, 1.0, 7).unwrap();
        let no_prob = BoundaryNoise::new(Oracle::from_reference(&reference, &cfg), 4, 0.0, 7).unwrap();
        for chunk in &chunks {
            let expected = oracle.restore_chunk(chunk).unwrap();
            assert_eq!(no_width.restore_chunk(chunk).unwrap(), expected);
            assert_eq!(no_prob.restore_chunk(chunk).unwrap(), expected);
        }
    }

    #[test]
    fn full_corruption_flips_every_label() {
        let seq = LabeledSequence::parse_plain("The bill becomes law, right?").unwrap();
        let corrupted = corrupt_boundary(&seq, 0, seq.len(), 1.0, 42);
        for (before, after) in seq.tokens.iter().zip(&corrupted.tokens) {
            assert_eq!(after.case, before.case.flipped());
            assert_eq!(after.punct, PunctLabel::None);
            assert_eq!(after.word, before.word);
        }
    }

    #[test]
    fn corruption_touches_exactly_the_edge_positions() {
        // b=2, p=1 on a 10-token chunk: positions {0, 1, 8, 9}.
        let tokens: Vec<Token> = (0..10)
            .map(|i| Token::new(format!("w{i}"), CaseLabel::Lower, PunctLabel::Comma))
            .collect();
        let seq = LabeledSequence::new(tokens);
        let corrupted = corrupt_boundary(&seq, 3, 2, 1.0, 99);
        let altered: Vec<usize> = corrupted
            .tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.case != CaseLabel::Lower || t.punct != PunctLabel::Comma)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(altered, vec![0, 1, 8, 9]);
        for i in altered {
            assert_eq!(corrupted.tokens[i].case, CaseLabel::Upper);
            assert_eq!(corrupted.tokens[i].punct, PunctLabel::None);
        }
    }

    #[test]
    fn corruption_is_deterministic_per_key() {
        let seq = LabeledSequence::parse_plain("a b c d e f g h").unwrap();
        let one = corrupt_boundary(&seq, 5, 3, 0.5, 1234);
        let two = corrupt_boundary(&seq, 5, 3, 0.5, 1234);
        assert_eq!(one, two);
        // A different chunk index or seed changes the pattern eventually.
        let other_chunk = corrupt_boundary(&seq, 6, 3, 0.5, 1234);
        let other_seed = corrupt_boundary(&seq, 5, 3, 0.5, 4321);
        assert!(one != other_chunk || one != other_seed);
    }

    #[test]
    fn probability_is_validated() {
        let (reference, cfg, _) = sample_setup();
        assert!(matches!(
            BoundaryNoise::new(Oracle::from_reference(&reference, &cfg), 1, 1.5, 0),
            Err(ModelError::InvalidProbability(_))
        ));
        let spec = RestorerSpec::BoundaryNoise {
            boundary: 1,
            prob: -0.1,
            seed: 0,
        };
        assert!(matches!(
            spec.for_document(Some(&reference), &cfg),
            Err(ModelError::InvalidProbability(_))
        ));
    }

    #[test]
    fn oracle_spec_requires_reference() {
        let cfg = ChunkConfig::new(10, 5).unwrap();
        assert_eq!(
            RestorerSpec::Oracle.for_document(None, &cfg).err(),
            Some(ModelError::ReferenceRequired)
        );
    }
}
