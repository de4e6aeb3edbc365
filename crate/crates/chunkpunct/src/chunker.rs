//! Overlapped chunk splitting: a long word stream becomes windows of
//! `chunk_size` words advancing by `chunk_size - overlap`, so consecutive
//! chunks share `overlap` words and every word keeps two-sided context.

use thiserror::Error;

/// Chunking parameters: window size `k` and the number of words shared
/// between consecutive windows.
///
/// `overlap == 0` is the degenerate non-overlapping mode (disjoint windows,
/// plain concatenation on merge).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkConfig {
    chunk_size: usize,
    overlap: usize,
}

impl ChunkConfig {
    pub fn new(chunk_size: usize, overlap: usize) -> Result<Self, ChunkError> {
        if chunk_size == 0 {
            return Err(ChunkError::ChunkSizeTooSmall { chunk_size });
        }
        if overlap >= chunk_size {
            return Err(ChunkError::OverlapOutOfRange {
                overlap,
                chunk_size,
            });
        }
        Ok(ChunkConfig {
            chunk_size,
            overlap,
        })
    }

    /// Config with the standard overlap of half the chunk size (rounded
    /// down for odd sizes).
    pub fn with_default_overlap(chunk_size: usize) -> Result<Self, ChunkError> {
        if chunk_size < 2 {
            return Err(ChunkError::ChunkSizeTooSmall { chunk_size });
        }
        ChunkConfig::new(chunk_size, chunk_size / 2)
    }

    pub fn chunk_size(&self) -> usize {
        self.chunk_size
    }

    pub fn overlap(&self) -> usize {
        self.overlap
    }

    /// Distance between consecutive window starts.
    pub fn stride(&self) -> usize {
        self.chunk_size - self.overlap
    }

    /// Number of chunks `split` emits for an `n`-word input.
    pub fn chunk_count(&self, n: usize) -> usize {
        if n == 0 {
            0
        } else if n <= self.chunk_size {
            1
        } else {
            (n - self.chunk_size).div_ceil(self.stride()) + 1
        }
    }
}

/// One window of the input stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    /// Ordinal position in the stream of chunks.
    pub index: usize,
    /// Global offset of the first word.
    pub start: usize,
    pub words: Vec<String>,
}

impl Chunk {
    /// Global offset one past the last word.
    pub fn end(&self) -> usize {
        self.start + self.words.len()
    }
}

/// Splits a word stream into overlapped chunks.
///
/// Window `i` covers `[i*stride, i*stride + k)`. The final window may be
/// shorter than `k`; a window whose words are all already covered by its
/// predecessor is not emitted.
pub fn split<S: AsRef<str>>(words: &[S], cfg: &ChunkConfig) -> Vec<Chunk> {
    let n = words.len();
    let stride = cfg.stride();
    let mut chunks = Vec::with_capacity(cfg.chunk_count(n));
    let mut index = 0;
    loop {
        let start = index * stride;
        // A window past the first adds nothing once the previous window's
        // coverage (start + overlap) reaches the end of the input.
        if start >= n || (index > 0 && start + cfg.overlap() >= n) {
            break;
        }
        let end = usize::min(start + cfg.chunk_size(), n);
        chunks.push(Chunk {
            index,
            start,
            words: words[start..end].iter().map(|w| w.as_ref().to_string()).collect(),
        });
        index += 1;
    }
    chunks
}

/// First violation found when checking a chunk list against the split
/// invariants for an `n`-word input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverageError {
    #[error("chunk at position {position} has index {found}, expected {expected}")]
    IndexMismatch {
        position: usize,
        expected: usize,
        found: usize,
    },
    #[error("chunk {chunk_index} starts at {found}, expected {expected}")]
    StartMismatch {
        chunk_index: usize,
        expected: usize,
        found: usize,
    },
    #[error("chunk {chunk_index} has {len} words, more than the chunk size {max}")]
    TooLong {
        chunk_index: usize,
        len: usize,
        max: usize,
    },
    #[error("non-final chunk {chunk_index} has {len} words instead of {expected}")]
    TooShort {
        chunk_index: usize,
        len: usize,
        expected: usize,
    },
    #[error("chunks {chunk_index} and {} disagree at shared offset {offset}", chunk_index + 1)]
    OverlapMismatch { chunk_index: usize, offset: usize },
    #[error("words [{from}, {to}) are not covered by any chunk")]
    Gap { from: usize, to: usize },
    #[error("chunk {chunk_index} adds no words beyond the previous chunk")]
    RedundantChunk { chunk_index: usize },
}

/// Verifies that `chunks` look like the output of [`split`] over an
/// `n_words`-long input: contiguous indices, stride-aligned starts, agreeing
/// overlap words, and full coverage with no redundant tail.
pub fn coverage_check(
    chunks: &[Chunk],
    n_words: usize,
    cfg: &ChunkConfig,
) -> Result<(), CoverageError> {
    if chunks.is_empty() {
        return if n_words == 0 {
            Ok(())
        } else {
            Err(CoverageError::Gap {
                from: 0,
                to: n_words,
            })
        };
    }
    let stride = cfg.stride();
    let mut covered = 0;
    for (position, chunk) in chunks.iter().enumerate() {
        if chunk.index != position {
            return Err(CoverageError::IndexMismatch {
                position,
                expected: position,
                found: chunk.index,
            });
        }
        let expected_start = position * stride;
        if chunk.start != expected_start {
            return Err(CoverageError::StartMismatch {
                chunk_index: chunk.index,
                expected: expected_start,
                found: chunk.start,
            });
        }
        if chunk.words.len() > cfg.chunk_size() {
            return Err(CoverageError::TooLong {
                chunk_index: chunk.index,
                len: chunk.words.len(),
                max: cfg.chunk_size(),
            });
        }
        // Only the final chunk may fall short of the window size; a short
        // interior chunk would make the merge assume a wrong overlap.
        if position + 1 < chunks.len() && chunk.words.len() < cfg.chunk_size() {
            return Err(CoverageError::TooShort {
                chunk_index: chunk.index,
                len: chunk.words.len(),
                expected: cfg.chunk_size(),
            });
        }
        if chunk.start > covered {
            return Err(CoverageError::Gap {
                from: covered,
                to: chunk.start,
            });
        }
        if position > 0 && chunk.end() <= covered {
            return Err(CoverageError::RedundantChunk {
                chunk_index: chunk.index,
            });
        }
        covered = chunk.end();
    }
    for (position, pair) in chunks.windows(2).enumerate() {
        let (first, second) = (&pair[0], &pair[1]);
        let shared = first.end().saturating_sub(second.start);
        for offset in 0..shared.min(second.words.len()) {
            let from_first = &first.words[second.start + offset - first.start];
            if from_first != &second.words[offset] {
                return Err(CoverageError::OverlapMismatch {
                    chunk_index: position,
                    offset,
                });
            }
        }
    }
    if covered < n_words {
        return Err(CoverageError::Gap {
            from: covered,
            to: n_words,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChunkError {
    #[error("chunk size {chunk_size} is too small")]
    ChunkSizeTooSmall { chunk_size: usize },
    #[error("overlap {overlap} must be smaller than the chunk size {chunk_size}")]
    OverlapOutOfRange { overlap: usize, chunk_size: usize },
}
