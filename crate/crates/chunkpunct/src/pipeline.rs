//! End-to-end document restoration: split, fan the chunks out over a
//! worker pool, and merge the indexed results as they arrive.
//!
//! Output is a pure function of `(words, model, config)`. Workers only
//! decide *when* a chunk result is produced, never *what* it contains, and
//! the streaming merge reorders by chunk index, so any worker count yields
//! identical output.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use thiserror::Error;

use crate::chunker::{self, Chunk, ChunkConfig, ChunkError};
use crate::codec::LabeledSequence;
use crate::merger::{MergeConfig, MergeError, MergeStream};
use crate::models::{ModelError, Restorer};

#[derive(Debug, Clone, Copy)]
pub struct PipelineConfig {
    pub chunking: ChunkConfig,
    pub min_words_cut: usize,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Chunk(#[from] ChunkError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Merge(#[from] MergeError),
}

/// Restores one document: split → restore (parallel) → merge.
pub fn restore_document(
    words: &[String],
    model: &dyn Restorer,
    cfg: &PipelineConfig,
) -> Result<LabeledSequence, PipelineError> {
    let chunks = chunker::split(words, &cfg.chunking);
    let mut stream = MergeStream::new(&cfg.chunking, &MergeConfig::new(cfg.min_words_cut))?;

    let batch_size = model.preferred_batch_size().max(1);
    let batches: Vec<Vec<Chunk>> = chunks
        .chunks(batch_size)
        .map(|batch| batch.to_vec())
        .collect();

    if cfg.workers <= 1 || batches.len() <= 1 {
        for batch in batches {
            let outputs = model.restore_batch(&batch)?;
            for (chunk, seq) in batch.into_iter().zip(outputs) {
                stream.push(chunk, seq)?;
            }
        }
        return Ok(stream.finish()?);
    }

    let workers = cfg.workers.min(batches.len());
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    let mut failures: Vec<(usize, ModelError)> = Vec::new();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            let batches = &batches;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= batches.len() {
                    break;
                }
                let result = model.restore_batch(&batches[i]);
                if tx.send((i, result)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        // Consume indexed results as they arrive, in any order. A push can
        // only fail for a model that violates the length contract, in which
        // case the first detection aborts the run.
        for (batch_index, result) in rx {
            match result {
                Ok(outputs) => {
                    for (chunk, seq) in batches[batch_index].iter().zip(outputs) {
                        stream.push(chunk.clone(), seq)?;
                    }
                }
                Err(e) => failures.push((batches[batch_index][0].index, e)),
            }
        }
        Ok::<(), PipelineError>(())
    })?;

    // Model errors are deterministic per chunk; report the lowest-indexed
    // one so the outcome does not depend on scheduling.
    if let Some((_, error)) = failures.into_iter().min_by_key(|(index, _)| *index) {
        return Err(error.into());
    }
    Ok(stream.finish()?)
}
