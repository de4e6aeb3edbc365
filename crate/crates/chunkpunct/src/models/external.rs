//! Line-protocol adapter for external restoration models.
//!
//! The subprocess is spawned once and reused: the adapter writes one chunk
//! per input line, flushes once per batch, and expects exactly one output
//! line per input line, in order. The environment variable
//! `CHUNKPUNCT_MODEL_FORMAT` tells the subprocess whether `plain` or
//! `encoded` output is expected. A nonzero exit, a short read, a timeout or
//! a malformed output line is an error carrying the offending chunk index.
//!
//! Access to the single subprocess is serialized, so the adapter can be
//! shared by a worker pool; results depend only on the input lines.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::chunker::Chunk;
use crate::codec::{LabeledSequence, TextFormat};
use crate::merger;
use crate::models::{ModelError, Restorer};

/// Name of the environment variable announcing the expected output format.
pub const MODEL_FORMAT_ENV: &str = "CHUNKPUNCT_MODEL_FORMAT";

pub struct ExternalModel {
    io: Mutex<Io>,
    command: String,
    format: TextFormat,
    batch_size: usize,
    timeout: Duration,
}

struct Io {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    broken: bool,
}

impl ExternalModel {
    /// Spawns the model subprocess. `command` is the argv; the first
    /// element is the program.
    pub fn spawn(
        command: &[String],
        format: TextFormat,
        batch_size: usize,
        timeout: Duration,
    ) -> Result<Self, ModelError> {
        let display = command.join(" ");
        let spawn_err = |reason: String| ModelError::ExternalSpawn {
            command: display.clone(),
            reason,
        };
        let (program, args) = command
            .split_first()
            .ok_or_else(|| spawn_err("empty command".to_string()))?;
        let mut child = Command::new(program)
            .args(args)
            .env(MODEL_FORMAT_ENV, format.name())
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| spawn_err(e.to_string()))?;
        let stdin = child.stdin.take();
        let stdout = child
            .stdout
            .take()
            .ok_or_else(|| spawn_err("no stdout pipe".to_string()))?;

        // A dedicated reader keeps stdout drained, so writing a whole batch
        // before reading cannot deadlock on a full pipe.
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });

        Ok(ExternalModel {
            io: Mutex::new(Io {
                child,
                stdin,
                lines: rx,
                broken: false,
            }),
            command: display,
            format,
            batch_size: batch_size.max(1),
            timeout,
        })
    }

    fn exchange(&self, inputs: &[String]) -> Result<Vec<String>, String> {
        let mut io = self.io.lock().unwrap_or_else(|poison| poison.into_inner());
        if io.broken {
            return Err("subprocess previously failed".to_string());
        }
        let result = Self::exchange_locked(&mut io, inputs, self.timeout);
        if result.is_err() {
            io.broken = true;
            let _ = io.child.kill();
        }
        result
    }

    fn exchange_locked(
        io: &mut Io,
        inputs: &[String],
        timeout: Duration,
    ) -> Result<Vec<String>, String> {
        let stdin = io.stdin.as_mut().ok_or("stdin closed")?;
        let mut request = String::new();
        for line in inputs {
            request.push_str(line);
            request.push('\n');
        }
        stdin
            .write_all(request.as_bytes())
            .and_then(|_| stdin.flush())
            .map_err(|e| format!("write failed: {e}"))?;

        let deadline = Instant::now() + timeout;
        let mut outputs = Vec::with_capacity(inputs.len());
        while outputs.len() < inputs.len() {
            let remaining = deadline.saturating_duration_since(Instant::now());
            match io.lines.recv_timeout(remaining) {
                Ok(Ok(line)) => outputs.push(line),
                Ok(Err(e)) => return Err(format!("read failed: {e}")),
                Err(RecvTimeoutError::Timeout) => {
                    return Err(format!("timed out after {timeout:?}"))
                }
                Err(RecvTimeoutError::Disconnected) => {
                    let status = io
                        .child
                        .try_wait()
                        .ok()
                        .flatten()
                        .map(|s| s.to_string())
                        .unwrap_or_else(|| "still running".to_string());
                    return Err(format!(
                        "short read: got {} of {} lines (process {status})",
                        outputs.len(),
                        inputs.len()
                    ));
                }
            }
        }
        Ok(outputs)
    }

    fn parse_output(&self, chunk: &Chunk, line: &str) -> Result<LabeledSequence, ModelError> {
        let fail = |reason: String| ModelError::External {
            chunk_index: chunk.index,
            reason,
        };
        match self.format {
            TextFormat::Plain => {
                let parsed = LabeledSequence::parse_plain(line)
                    .map_err(|e| fail(format!("malformed output line: {e}")))?;
                // Length drift is repaired; built-ins never need this.
                Ok(merger::align(&chunk.words, &parsed))
            }
            TextFormat::Encoded => LabeledSequence::decode(line, &chunk.words)
                .map_err(|e| fail(format!("malformed output line: {e}"))),
        }
    }
}

impl Restorer for ExternalModel {
    fn restore_chunk(&self, chunk: &Chunk) -> Result<LabeledSequence, ModelError> {
        Ok(self.restore_batch(std::slice::from_ref(chunk))?.remove(0))
    }

    fn restore_batch(&self, chunks: &[Chunk]) -> Result<Vec<LabeledSequence>, ModelError> {
        if chunks.is_empty() {
            return Ok(Vec::new());
        }
        let inputs: Vec<String> = chunks.iter().map(|c| c.words.join(" ")).collect();
        let outputs = self.exchange(&inputs).map_err(|reason| ModelError::External {
            chunk_index: chunks[0].index,
            reason: format!("{reason} (command: {})", self.command),
        })?;
        chunks
            .iter()
            .zip(&outputs)
            .map(|(chunk, line)| self.parse_output(chunk, line))
            .collect()
    }

    fn preferred_batch_size(&self) -> usize {
        self.batch_size
    }
}

impl Drop for ExternalModel {
    fn drop(&mut self) {
        if let Ok(mut io) = self.io.lock() {
            io.stdin.take(); // close stdin so well-behaved models exit
            let _ = io.child.kill();
            let _ = io.child.wait();
        }
    }
}
