//! Punctuation and capitalization restoration for long ASR-style
//! transcripts.
//!
//! ASR output is a bare stream of lowercase words. This crate restores the
//! missing structure with a three-stage pipeline: the stream is split into
//! overlapped chunks (so every word sees context on both sides), a
//! per-chunk restoration model labels each word with its case and trailing
//! punctuation, and the overlapped hypotheses are merged back into one
//! document by a linear-time positional rule controlled by a single
//! `min_words_cut` parameter.
//!
//! ```
//! use chunkpunct::chunker::ChunkConfig;
//! use chunkpunct::codec::LabeledSequence;
//! use chunkpunct::models::{Oracle, Restorer};
//! use chunkpunct::pipeline::{restore_document, PipelineConfig};
//!
//! let reference = LabeledSequence::parse_plain(
//!     "The bill does not become law, unless houses of Congress vote to override the veto.",
//! ).unwrap();
//! let words = reference.words();
//! let cfg = PipelineConfig {
//!     chunking: ChunkConfig::new(10, 5).unwrap(),
//!     min_words_cut: 2,
//!     workers: 4,
//! };
//! let oracle = Oracle::from_reference(&reference, &cfg.chunking);
//! let restored = restore_document(&words, &oracle, &cfg).unwrap();
//! assert_eq!(restored.render_plain(),
//!     "The bill does not become law, unless houses of Congress vote to override the veto.");
//! ```
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`corpus`] | Raw-text cleanup, ASR simulation, training pairs, label statistics |
//! | [`codec`] | Plain-text and 6-class encoded label formats |
//! | [`chunker`] | Overlapped window splitting |
//! | [`models`] | The restoration-model contract, built-ins, subprocess adapter |
//! | [`merger`] | Hypothesis alignment and the `min_words_cut` merge |
//! | [`eval`] | Precision/recall/F1, confusion matrix, parameter sweeps |
//! | [`pipeline`] | Deterministic parallel end-to-end restoration |

pub mod chunker;
pub mod codec;
pub mod corpus;
pub mod eval;
pub mod merger;
pub mod models;
pub mod pipeline;

pub use chunker::{Chunk, ChunkConfig};
pub use codec::{CaseLabel, LabeledSequence, PunctLabel, TextFormat, Token};
pub use merger::MergeConfig;
pub use models::{Restorer, RestorerSpec};
pub use pipeline::PipelineConfig;
