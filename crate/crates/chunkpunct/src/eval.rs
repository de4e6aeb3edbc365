//! Scoring: per-class precision/recall/F1 over the six slot symbols, a
//! unified confusion matrix, merge-parameter sweeps, and side-by-side
//! report comparison.
//!
//! A token contributes two slots to the unified sequence: its case slot
//! (`U`/`L`) and its punctuation slot (`.`/`,`/`?`/blank). Hypothesis and
//! reference are compared position by position on those slots, so a
//! document of `n` tokens yields `2n` classified slots. Aggregation across
//! documents is micro: count matrices are summed before any ratio is
//! taken.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chunker::ChunkConfig;
use crate::codec::{CaseLabel, LabeledSequence, PunctLabel};
use crate::models::RestorerSpec;
use crate::pipeline::{self, PipelineError};

/// The unified slot alphabet: case slots hold `U`/`L`, punctuation slots
/// hold `.`/`,`/`?`/`$`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlotSymbol {
    Upper,
    Lower,
    FullStop,
    Comma,
    Question,
    Blank,
}

impl SlotSymbol {
    /// Fixed class order used by reports and confusion-matrix rows.
    pub const ALL: [SlotSymbol; 6] = [
        SlotSymbol::Upper,
        SlotSymbol::Lower,
        SlotSymbol::FullStop,
        SlotSymbol::Comma,
        SlotSymbol::Question,
        SlotSymbol::Blank,
    ];

    /// The three punctuation mark classes.
    pub const PUNCT_MARKS: [SlotSymbol; 3] =
        [SlotSymbol::FullStop, SlotSymbol::Comma, SlotSymbol::Question];

    pub fn name(self) -> &'static str {
        match self {
            SlotSymbol::Upper => "U",
            SlotSymbol::Lower => "L",
            SlotSymbol::FullStop => ".",
            SlotSymbol::Comma => ",",
            SlotSymbol::Question => "?",
            SlotSymbol::Blank => "$",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        SlotSymbol::ALL.into_iter().find(|s| s.name() == name)
    }

    fn index(self) -> usize {
        match self {
            SlotSymbol::Upper => 0,
            SlotSymbol::Lower => 1,
            SlotSymbol::FullStop => 2,
            SlotSymbol::Comma => 3,
            SlotSymbol::Question => 4,
            SlotSymbol::Blank => 5,
        }
    }

    fn of_case(case: CaseLabel) -> Self {
        match case {
            CaseLabel::Upper => SlotSymbol::Upper,
            CaseLabel::Lower => SlotSymbol::Lower,
        }
    }

    fn of_punct(punct: PunctLabel) -> Self {
        match punct {
            PunctLabel::None => SlotSymbol::Blank,
            PunctLabel::FullStop => SlotSymbol::FullStop,
            PunctLabel::Comma => SlotSymbol::Comma,
            PunctLabel::Question => SlotSymbol::Question,
        }
    }
}

/// Expands a token sequence into its unified slot sequence: per token the
/// case slot followed by the punctuation slot, `2 × len` symbols in all.
pub fn unify(seq: &LabeledSequence) -> Vec<SlotSymbol> {
    let mut slots = Vec::with_capacity(seq.len() * 2);
    for token in &seq.tokens {
        slots.push(SlotSymbol::of_case(token.case));
        slots.push(SlotSymbol::of_punct(token.punct));
    }
    slots
}

fn unify_labels(labels: &[(CaseLabel, PunctLabel)]) -> Vec<SlotSymbol> {
    let mut slots = Vec::with_capacity(labels.len() * 2);
    for (case, punct) in labels {
        slots.push(SlotSymbol::of_case(*case));
        slots.push(SlotSymbol::of_punct(*punct));
    }
    slots
}

/// 6×6 count matrix over the unified slot symbols; rows are reference,
/// columns are hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    counts: [[u64; 6]; 6],
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, reference: SlotSymbol, hypothesis: SlotSymbol) {
        self.counts[reference.index()][hypothesis.index()] += 1;
    }

    pub fn get(&self, reference: SlotSymbol, hypothesis: SlotSymbol) -> u64 {
        self.counts[reference.index()][hypothesis.index()]
    }

    /// Adds another matrix in place; the micro-aggregation step.
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for r in 0..6 {
            for c in 0..6 {
                self.counts[r][c] += other.counts[r][c];
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Reference support of one class (its row sum).
    pub fn support(&self, class: SlotSymbol) -> u64 {
        self.counts[class.index()].iter().sum()
    }

    fn predicted(&self, class: SlotSymbol) -> u64 {
        self.counts.iter().map(|row| row[class.index()]).sum()
    }

    pub fn transposed(&self) -> ConfusionMatrix {
        let mut out = ConfusionMatrix::new();
        for r in 0..6 {
            for c in 0..6 {
                out.counts[c][r] = self.counts[r][c];
            }
        }
        out
    }

    /// Raw counts in class order, row-major.
    pub fn rows(&self) -> [[u64; 6]; 6] {
        self.counts
    }

    /// Row-normalized view: each row divided by its reference support
    /// (zero rows stay zero).
    pub fn row_normalized(&self) -> [[f64; 6]; 6] {
        let mut out = [[0.0; 6]; 6];
        for (row, counts) in out.iter_mut().zip(&self.counts) {
            let total: u64 = counts.iter().sum();
            if total > 0 {
                for (cell, count) in row.iter_mut().zip(counts) {
                    *cell = *count as f64 / total as f64;
                }
            }
        }
        out
    }

    /// One-vs-rest metrics of a single class.
    pub fn class_metrics(&self, class: SlotSymbol) -> ClassMetrics {
        let tp = self.get(class, class);
        let support = self.support(class);
        let predicted = self.predicted(class);
        ClassMetrics::from_counts(tp, predicted - tp, support - tp, support)
    }

    /// Micro-averaged metrics pooled over a subset of classes.
    pub fn micro_metrics(&self, classes: &[SlotSymbol]) -> ClassMetrics {
        let (mut tp, mut fp, mut fnn, mut support) = (0, 0, 0, 0);
        for class in classes {
            let class_tp = self.get(*class, *class);
            tp += class_tp;
            fp += self.predicted(*class) - class_tp;
            fnn += self.support(*class) - class_tp;
            support += self.support(*class);
        }
        ClassMetrics::from_counts(tp, fp, fnn, support)
    }
}

/// Precision, recall and F1 of one class (or one pooled class set), with
/// its reference support. Divisions by zero yield 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

impl ClassMetrics {
    pub fn from_counts(tp: u64, fp: u64, fnn: u64, support: u64) -> Self {
        let ratio = |num: u64, denom: u64| {
            if denom == 0 {
                0.0
            } else {
                num as f64 / denom as f64
            }
        };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fnn);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        ClassMetrics {
            precision,
            recall,
            f1,
            support,
        }
    }

    pub fn from_values(precision: f64, recall: f64, f1: f64) -> Self {
        ClassMetrics {
            precision,
            recall,
            f1,
            support: 0,
        }
    }
}

/// Per-class metrics over the six slot symbols plus the macro summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    classes: [ClassMetrics; 6],
}

impl MetricsReport {
    pub fn from_confusion(matrix: &ConfusionMatrix) -> Self {
        let mut classes = [ClassMetrics::from_counts(0, 0, 0, 0); 6];
        for symbol in SlotSymbol::ALL {
            classes[symbol.index()] = matrix.class_metrics(symbol);
        }
        MetricsReport { classes }
    }

    pub fn from_parts(parts: &BTreeMap<String, ClassMetrics>) -> Self {
        let mut classes = [ClassMetrics::from_counts(0, 0, 0, 0); 6];
        for (name, metrics) in parts {
            if let Some(symbol) = SlotSymbol::from_name(name) {
                classes[symbol.index()] = *metrics;
            }
        }
        MetricsReport { classes }
    }

    pub fn class(&self, symbol: SlotSymbol) -> ClassMetrics {
        self.classes[symbol.index()]
    }

    /// Unweighted mean of the six per-class values.
    pub fn macro_summary(&self) -> ClassMetrics {
        let n = self.classes.len() as f64;
        ClassMetrics {
            precision: self.classes.iter().map(|c| c.precision).sum::<f64>() / n,
            recall: self.classes.iter().map(|c| c.recall).sum::<f64>() / n,
            f1: self.classes.iter().map(|c| c.f1).sum::<f64>() / n,
            support: self.classes.iter().map(|c| c.support).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("length mismatch: reference has {expected} tokens, hypothesis {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("word mismatch at position {position}: reference {reference:?}, hypothesis {hypothesis:?}")]
    WordMismatch {
        position: usize,
        reference: String,
        hypothesis: String,
    },
}

/// Builds the confusion matrix of one (reference, hypothesis) pair without
/// computing any ratios, so matrices from many documents can be pooled.
pub fn confusion(
    reference: &LabeledSequence,
    hypothesis: &LabeledSequence,
) -> Result<ConfusionMatrix, EvalError> {
    if reference.len() != hypothesis.len() {
        return Err(EvalError::LengthMismatch {
            expected: reference.len(),
            got: hypothesis.len(),
        });
    }
    for (position, (r, h)) in reference.tokens.iter().zip(&hypothesis.tokens).enumerate() {
        if r.word != h.word {
            return Err(EvalError::WordMismatch {
                position,
                reference: r.word.clone(),
                hypothesis: h.word.clone(),
            });
        }
    }
    Ok(confusion_of_slots(&unify(reference), &unify(hypothesis)))
}

/// Confusion matrix over bare label pairs, for the encoded format where no
/// words are available to cross-check.
pub fn confusion_of_labels(
    reference: &[(CaseLabel, PunctLabel)],
    hypothesis: &[(CaseLabel, PunctLabel)],
) -> Result<ConfusionMatrix, EvalError> {
    if reference.len() != hypothesis.len() {
        return Err(EvalError::LengthMismatch {
            expected: reference.len(),
            got: hypothesis.len(),
        });
    }
    Ok(confusion_of_slots(
        &unify_labels(reference),
        &unify_labels(hypothesis),
    ))
}

fn confusion_of_slots(reference: &[SlotSymbol], hypothesis: &[SlotSymbol]) -> ConfusionMatrix {
    let mut matrix = ConfusionMatrix::new();
    for (r, h) in reference.iter().zip(hypothesis) {
        matrix.record(*r, *h);
    }
    matrix
}

/// Scores a hypothesis against its reference: per-class one-vs-rest
/// precision/recall/F1 on the unified slots plus the confusion matrix.
/// Sequences must be aligned (merged) first.
pub fn score(
    reference: &LabeledSequence,
    hypothesis: &LabeledSequence,
) -> Result<(MetricsReport, ConfusionMatrix), EvalError> {
    let matrix = confusion(reference, hypothesis)?;
    Ok((MetricsReport::from_confusion(&matrix), matrix))
}

/// One sweep entry: the merge parameter and the micro-aggregated scores of
/// the whole evaluation set under it.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub min_words_cut: usize,
    pub report: MetricsReport,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, Default)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("min_words_cut {min_words_cut} exceeds the overlap {overlap}")]
    CutOutOfRange { min_words_cut: usize, overlap: usize },
    #[error("pipeline failed at min_words_cut {min_words_cut} on document {document}: {source}")]
    Pipeline {
        min_words_cut: usize,
        document: usize,
        source: PipelineError,
    },
    #[error("scoring failed at min_words_cut {min_words_cut} on document {document}: {source}")]
    Score {
        min_words_cut: usize,
        document: usize,
        source: EvalError,
    },
}

/// Runs split → restore → merge → score over every document for each
/// requested `min_words_cut` value. Values are deduplicated and evaluated
/// in ascending order; counts are pooled across documents before any
/// precision/recall is computed.
pub fn sweep(
    documents: &[LabeledSequence],
    model: &RestorerSpec,
    cfg: &ChunkConfig,
    cut_values: &[usize],
    workers: usize,
) -> Result<SweepReport, SweepError> {
    let mut values: Vec<usize> = cut_values.to_vec();
    values.sort_unstable();
    values.dedup();

    let mut entries = Vec::with_capacity(values.len());
    for &min_words_cut in &values {
        if min_words_cut > cfg.overlap() {
            return Err(SweepError::CutOutOfRange {
                min_words_cut,
                overlap: cfg.overlap(),
            });
        }
        let mut pooled = ConfusionMatrix::new();
        for (document, reference) in documents.iter().enumerate() {
            let words = reference.words();
            let restorer = model
                .for_document(Some(reference), cfg)
                .map_err(|e| SweepError::Pipeline {
                    min_words_cut,
                    document,
                    source: e.into(),
                })?;
            let merged = pipeline::restore_document(
                &words,
                restorer.as_ref(),
                &pipeline::PipelineConfig {
                    chunking: *cfg,
                    min_words_cut,
                    workers,
                },
            )
            .map_err(|source| SweepError::Pipeline {
                min_words_cut,
                document,
                source,
            })?;
            let matrix = confusion(reference, &merged).map_err(|source| SweepError::Score {
                min_words_cut,
                document,
                source,
            })?;
            pooled.merge(&matrix);
        }
        entries.push(SweepEntry {
            min_words_cut,
            report: MetricsReport::from_confusion(&pooled),
            confusion: pooled,
        });
    }
    Ok(SweepReport { entries })
}

/// One row of a report comparison; deltas are `a - b`.
#[derive(Debug, Clone, Copy)]
pub struct CompareRow {
    pub class: SlotSymbol,
    pub a: ClassMetrics,
    pub b: ClassMetrics,
    pub delta_precision: f64,
    pub delta_recall: f64,
    pub delta_f1: f64,
}

/// Side-by-side per-class comparison of two reports.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
}

/// Compares two reports class by class. By default the `L` and `$` rows
/// are hidden, since every model predicts them well; `all_classes` shows
/// them.
pub fn compare(a: &MetricsReport, b: &MetricsReport, all_classes: bool) -> Comparison {
    let classes: &[SlotSymbol] = if all_classes {
        &SlotSymbol::ALL
    } else {
        &[
            SlotSymbol::Upper,
            SlotSymbol::FullStop,
            SlotSymbol::Comma,
            SlotSymbol::Question,
        ]
    };
    let rows = classes
        .iter()
        .map(|&class| {
            let ca = a.class(class);
            let cb = b.class(class);
            CompareRow {
                class,
                a: ca,
                b: cb,
                delta_precision: ca.precision - cb.precision,
                delta_recall: ca.recall - cb.recall,
                delta_f1: ca.f1 - cb.f1,
            }
        })
        .collect();
    Comparison { rows }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<6} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}",
            "class", "P(a)", "R(a)", "F1(a)", "P(b)", "R(b)", "F1(b)", "dP", "dR", "dF1"
        )?;
        for row in &self.rows {
            writeln!(
                f,
                "{:<6} {:>7.2} {:>7.2} {:>7.2} {:>7.2} {:>7.2} {:>7.2} {:>+7.2} {:>+7.2} {:>+7.2}",
                row.class.name(),
                row.a.precision,
                row.a.recall,
                row.a.f1,
                row.b.precision,
                row.b.recall,
                row.b.f1,
                row.delta_precision,
                row.delta_recall,
                row.delta_f1,
            )?;
        }
        Ok(())
    }
}

/// JSON form of a scored report:
/// `{"classes": {name: {precision, recall, f1, support}}, "confusion": [[int]]}`.
/// Confusion rows and columns follow the class order `U L . , ? $`.
pub fn report_to_json(report: &MetricsReport, matrix: &ConfusionMatrix) -> serde_json::Value {
    let classes: BTreeMap<&str, ClassMetrics> = SlotSymbol::ALL
        .into_iter()
        .map(|s| (s.name(), report.class(s)))
        .collect();
    let confusion: Vec<Vec<u64>> = matrix.rows().iter().map(|row| row.to_vec()).collect();
    serde_json::json!({
        "classes": classes,
        "confusion": confusion,
    })
}

/// Parses a report produced by [`report_to_json`].
pub fn report_from_json(value: &serde_json::Value) -> Option<MetricsReport> {
    let classes: BTreeMap<String, ClassMetrics> =
        serde_json::from_value(value.get("classes")?.clone()).ok()?;
    Some(MetricsReport::from_parts(&classes))
}

/// TSV form: one `class precision recall f1 support` row per class.
pub fn report_to_tsv(report: &MetricsReport) -> String {
    let mut out = String::from("class\tprecision\trecall\tf1\tsupport\n");
    for symbol in SlotSymbol::ALL {
        let c = report.class(symbol);
        out.push_str(&format!(
            "{}\t{:.6}\t{:.6}\t{:.6}\t{}\n",
            symbol.name(),
            c.precision,
            c.recall,
            c.f1,
            c.support
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::Token;

    fn seq(plain: &str) -> LabeledSequence {
        LabeledSequence::parse_plain(plain).unwrap()
    }

    fn from_encoded(encoded: &str) -> LabeledSequence {
        let labels = crate::codec::parse_encoded(encoded).unwrap();
        labels
            .into_iter()
            .enumerate()
            .map(|(i, (case, punct))| Token::new(format!("w{i}"), case, punct))
            .collect()
    }

    #[test]
    fn unify_expands_case_then_punct() {
        let s = LabeledSequence::new(vec![
            Token::new("the", CaseLabel::Upper, PunctLabel::None),
            Token::new("bill", CaseLabel::Lower, PunctLabel::Comma),
        ]);
        assert_eq!(
            unify(&s),
            vec![
                SlotSymbol::Upper,
                SlotSymbol::Blank,
                SlotSymbol::Lower,
                SlotSymbol::Comma
            ]
        );
        assert!(unify(&LabeledSequence::default()).is_empty());
    }

    #[test]
    fn unify_of_the_sample_chunk() {
        let s = seq("The bill does not become law, unless houses of Congress");
        let slots = unify(&s);
        assert_eq!(slots.len(), 20);
        let uppers: Vec<usize> = slots
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == SlotSymbol::Upper)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(uppers, vec![0, 18]);
        assert_eq!(slots[11], SlotSymbol::Comma);
    }

    #[test]
    fn perfect_hypothesis_scores_ones() {
        let reference = seq("The bill does not become law, unless houses of Congress");
        let (report, matrix) = score(&reference, &reference).unwrap();
        for symbol in SlotSymbol::ALL {
            let c = report.class(symbol);
            if c.support > 0 {
                assert_eq!((c.precision, c.recall, c.f1), (1.0, 1.0, 1.0), "{symbol:?}");
            }
        }
        for r in SlotSymbol::ALL {
            for h in SlotSymbol::ALL {
                if r != h {
                    assert_eq!(matrix.get(r, h), 0);
                }
            }
        }
        assert_eq!(matrix.total(), 20);
    }

    #[test]
    fn hand_counted_three_token_example() {
        // ref U$ L, L$ vs hyp U$ L$ L$: the comma is missed, one blank is
        // spuriously predicted in its place.
        let reference = from_encoded("U$ L, L$");
        let hypothesis = from_encoded("U$ L$ L$");
        let (report, matrix) = score(&reference, &hypothesis).unwrap();
        let comma = report.class(SlotSymbol::Comma);
        assert_eq!((comma.precision, comma.recall, comma.f1), (0.0, 0.0, 0.0));
        assert_eq!(comma.support, 1);
        let upper = report.class(SlotSymbol::Upper);
        assert_eq!((upper.precision, upper.recall), (1.0, 1.0));
        let blank = report.class(SlotSymbol::Blank);
        assert!((blank.precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(blank.recall, 1.0);
        assert_eq!(matrix.get(SlotSymbol::Comma, SlotSymbol::Blank), 1);
        assert_eq!(matrix.total(), 6);
    }

    #[test]
    fn length_and_word_mismatches_are_errors() {
        let reference = seq("a b c");
        assert_eq!(
            score(&reference, &seq("a b")).unwrap_err(),
            EvalError::LengthMismatch {
                expected: 3,
                got: 2
            }
        );
        assert_eq!(
            score(&reference, &seq("a x c")).unwrap_err(),
            EvalError::WordMismatch {
                position: 1,
                reference: "b".into(),
                hypothesis: "x".into()
            }
        );
    }

    #[test]
    fn swapping_arguments_transposes_and_swaps_precision_recall() {
        let reference = from_encoded("U. L, L$ U$ L? L$ U, L.");
        let hypothesis = from_encoded("L. L$ U$ U, L? L, U$ L$");
        let (fwd_report, fwd_matrix) = score(&reference, &hypothesis).unwrap();
        let (rev_report, rev_matrix) = score(&hypothesis, &reference).unwrap();
        assert_eq!(rev_matrix, fwd_matrix.transposed());
        for symbol in SlotSymbol::ALL {
            let f = fwd_report.class(symbol);
            let r = rev_report.class(symbol);
            assert!((f.precision - r.recall).abs() < 1e-15, "{symbol:?}");
            assert!((f.recall - r.precision).abs() < 1e-15, "{symbol:?}");
        }
    }

    #[test]
    fn pooling_matches_scoring_the_concatenation() {
        let ref_a = from_encoded("U. L, L$");
        let hyp_a = from_encoded("U$ L, L.");
        let ref_b = from_encoded("L? U$ L, U.");
        let hyp_b = from_encoded("L? L$ U, U,");
        let mut pooled = confusion(&ref_a, &hyp_a).unwrap();
        pooled.merge(&confusion(&ref_b, &hyp_b).unwrap());

        let mut ref_cat = ref_a.clone();
        ref_cat.tokens.extend(ref_b.tokens.iter().cloned());
        // Renumber hypothesis words to match the concatenated reference.
        let mut hyp_cat = ref_cat.clone();
        for (t, src) in hyp_cat
            .tokens
            .iter_mut()
            .zip(hyp_a.tokens.iter().chain(&hyp_b.tokens))
        {
            t.case = src.case;
            t.punct = src.punct;
        }
        let whole = confusion(&ref_cat, &hyp_cat).unwrap();
        assert_eq!(pooled, whole);
        assert_eq!(
            MetricsReport::from_confusion(&pooled),
            MetricsReport::from_confusion(&whole)
        );
    }

    #[test]
    fn matrix_total_is_twice_the_token_count() {
        let reference = from_encoded("U. L, L$ U$ L?");
        let hypothesis = from_encoded("L. L$ L$ U, L?");
        let (_, matrix) = score(&reference, &hypothesis).unwrap();
        assert_eq!(matrix.total(), 10);
    }

    #[test]
    fn zero_division_yields_zero_not_nan() {
        let metrics = ClassMetrics::from_counts(0, 0, 0, 0);
        assert_eq!((metrics.precision, metrics.recall, metrics.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn macro_summary_averages_all_six_classes() {
        let reference = from_encoded("U. L, L$ U$");
        let (report, _) = score(&reference, &reference).unwrap();
        let summary = report.macro_summary();
        // Five classes are present and score 1.0; the absent `?` scores 0.
        assert!((summary.f1 - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(summary.support, 8);
    }

    #[test]
    fn sweep_with_oracle_is_perfect_for_every_cut() {
        let documents: Vec<LabeledSequence> = vec![
            seq("The bill does not become law, unless houses of Congress vote to override the veto."),
            seq("Why? Because the houses said so."),
        ];
        let cfg = ChunkConfig::new(6, 3).unwrap();
        let report = sweep(&documents, &RestorerSpec::Oracle, &cfg, &[0, 1, 2, 3], 1).unwrap();
        assert_eq!(report.entries.len(), 4);
        for entry in &report.entries {
            for symbol in SlotSymbol::ALL {
                let c = entry.report.class(symbol);
                if c.support > 0 {
                    assert_eq!(c.f1, 1.0, "m={} {symbol:?}", entry.min_words_cut);
                }
            }
        }
    }

    #[test]
    fn sweep_with_no_values_is_empty() {
        let cfg = ChunkConfig::new(6, 3).unwrap();
        let report = sweep(&[], &RestorerSpec::Oracle, &cfg, &[], 1).unwrap();
        assert!(report.entries.is_empty());
    }

    #[test]
    fn sweep_rejects_cut_beyond_overlap() {
        let cfg = ChunkConfig::new(6, 3).unwrap();
        let err = sweep(&[seq("a b c")], &RestorerSpec::Oracle, &cfg, &[4], 1).unwrap_err();
        assert!(matches!(err, SweepError::CutOutOfRange { min_words_cut: 4, overlap: 3 }));
    }

    fn fixture(rows: &[(SlotSymbol, f64, f64, f64)]) -> MetricsReport {
        let parts: BTreeMap<String, ClassMetrics> = rows
            .iter()
            .map(|(s, p, r, f)| (s.name().to_string(), ClassMetrics::from_values(*p, *r, *f)))
            .collect();
        MetricsReport::from_parts(&parts)
    }

    /// Published evolved-transformer scores with and without chunk merging.
    fn et_fixtures() -> (MetricsReport, MetricsReport) {
        let with_merge = fixture(&[
            (SlotSymbol::Upper, 0.90, 0.84, 0.87),
            (SlotSymbol::FullStop, 0.74, 0.72, 0.73),
            (SlotSymbol::Comma, 0.61, 0.51, 0.56),
            (SlotSymbol::Question, 0.82, 0.63, 0.71),
        ]);
        let without = fixture(&[
            (SlotSymbol::Upper, 0.84, 0.79, 0.81),
            (SlotSymbol::FullStop, 0.56, 0.66, 0.61),
            (SlotSymbol::Comma, 0.40, 0.42, 0.41),
            (SlotSymbol::Question, 0.70, 0.46, 0.56),
        ]);
        (with_merge, without)
    }

    /// Published seq2seq LSTM scores with and without chunk merging.
    fn lstm_fixtures() -> (MetricsReport, MetricsReport) {
        let with_merge = fixture(&[
            (SlotSymbol::Upper, 0.74, 0.53, 0.62),
            (SlotSymbol::FullStop, 0.43, 0.41, 0.42),
            (SlotSymbol::Comma, 0.10, 0.87, 0.19),
            (SlotSymbol::Question, 0.49, 0.22, 0.30),
        ]);
        let without = fixture(&[
            (SlotSymbol::Upper, 0.70, 0.53, 0.61),
            (SlotSymbol::FullStop, 0.40, 0.41, 0.41),
            (SlotSymbol::Comma, 0.10, 0.85, 0.18),
            (SlotSymbol::Question, 0.45, 0.20, 0.28),
        ]);
        (with_merge, without)
    }

    #[test]
    fn comparing_identical_reports_gives_zero_deltas() {
        let (report, _) = et_fixtures();
        let diff = compare(&report, &report, true);
        assert_eq!(diff.rows.len(), 6);
        for row in diff.rows {
            assert_eq!(row.delta_f1, 0.0);
            assert_eq!(row.delta_precision, 0.0);
            assert_eq!(row.delta_recall, 0.0);
        }
    }

    #[test]
    fn evolved_transformer_fixture_deltas() {
        let (with_merge, without) = et_fixtures();
        let diff = compare(&with_merge, &without, false);
        assert_eq!(diff.rows.len(), 4);
        let upper = &diff.rows[0];
        assert_eq!(upper.class, SlotSymbol::Upper);
        assert!((upper.delta_f1 - 0.06).abs() < 1e-12);
        let question = &diff.rows[3];
        assert!((question.delta_f1 - 0.15).abs() < 1e-12);
    }

    #[test]
    fn lstm_fixture_deltas() {
        let (with_merge, without) = lstm_fixtures();
        let diff = compare(&with_merge, &without, false);
        let question = &diff.rows[3];
        assert_eq!(question.class, SlotSymbol::Question);
        assert!((question.delta_f1 - 0.02).abs() < 1e-12);
    }

    #[test]
    fn comparison_display_hides_stable_classes_by_default() {
        let (with_merge, without) = et_fixtures();
        let table = compare(&with_merge, &without, false).to_string();
        assert!(table.contains('U'));
        assert!(!table.lines().any(|l| l.starts_with('L')));
        assert!(!table.lines().any(|l| l.starts_with('$')));
        let full = compare(&with_merge, &without, true).to_string();
        assert!(full.lines().any(|l| l.starts_with('L')));
    }

    #[test]
    fn json_report_round_trips() {
        let reference = from_encoded("U. L, L$ U$ L? L$");
        let hypothesis = from_encoded("U. L$ L$ U, L? L$");
        let (report, matrix) = score(&reference, &hypothesis).unwrap();
        let json = report_to_json(&report, &matrix);
        assert!(json["classes"]["U"]["precision"].is_number());
        assert_eq!(json["confusion"].as_array().unwrap().len(), 6);
        let parsed = report_from_json(&json).unwrap();
        for symbol in SlotSymbol::ALL {
            assert_eq!(parsed.class(symbol), report.class(symbol));
        }
    }

    #[test]
    fn row_normalized_rows_sum_to_one_or_zero() {
        let reference = from_encoded("U. L, L$ U$");
        let hypothesis = from_encoded("L. L$ U$ U,");
        let (_, matrix) = score(&reference, &hypothesis).unwrap();
        for row in matrix.row_normalized() {
            let sum: f64 = row.iter().sum();
            assert!(sum.abs() < 1e-12 || (sum - 1.0).abs() < 1e-12);
        }
    }
}
