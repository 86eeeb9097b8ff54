use std::collections::HashMap;

use crate::ltl::{self, lexer::token_strings};

/// Fraction of pairs whose canonical forms are equal. A prediction or
/// reference that fails to parse counts as a mismatch.
pub fn ltl_match_accuracy<P: AsRef<str>, R: AsRef<str>>(predictions: &[P], references: &[R]) -> f64 {
    assert_eq!(
        predictions.len(),
        references.len(),
        "predictions and references differ in length"
    );
    if predictions.is_empty() {
        return 0.0;
    }
    let hits = predictions
        .iter()
        .zip(references)
        .filter(|(p, r)| ltl_match(p.as_ref(), r.as_ref()))
        .count();
    hits as f64 / predictions.len() as f64
}

pub fn ltl_match(prediction: &str, reference: &str) -> bool {
    match (ltl::parse(prediction), ltl::parse(reference)) {
        (Ok(p), Ok(r)) => ltl::canonicalize(&p) == ltl::canonicalize(&r),
        _ => false,
    }
}

fn ngram_counts<T: AsRef<str>>(tokens: &[T], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts
                .entry(w.iter().map(AsRef::as_ref).collect())
                .or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram matches and candidate n-gram totals for n = 1..=4, plus
/// candidate and reference lengths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [usize; 4],
    pub totals: [usize; 4],
    pub candidate_len: usize,
    pub reference_len: usize,
}

impl BleuStats {
    pub fn of<T: AsRef<str>, U: AsRef<str>>(prediction: &[T], reference: &[U]) -> Self {
        let mut s = BleuStats {
            candidate_len: prediction.len(),
            reference_len: reference.len(),
            ..Default::default()
        };
        for n in 1..=4 {
            let cand = ngram_counts(prediction, n);
            let refc = ngram_counts(reference, n);
            s.totals[n - 1] = prediction.len().saturating_sub(n - 1);
            s.matches[n - 1] = cand
                .iter()
                .map(|(g, c)| (*c).min(refc.get(g).copied().unwrap_or(0)))
                .sum();
        }
        s
    }

    pub fn add(&mut self, other: &BleuStats) {
        for i in 0..4 {
            self.matches[i] += other.matches[i];
            self.totals[i] += other.totals[i];
        }
        self.candidate_len += other.candidate_len;
        self.reference_len += other.reference_len;
    }

    /// BLEU-4: geometric mean of precisions, unigram unsmoothed and
    /// add-one smoothing for n >= 2, times the brevity penalty.
    pub fn score(&self) -> f64 {
        if self.candidate_len == 0 || self.matches[0] == 0 {
            return 0.0;
        }
        let mut log_sum = (self.matches[0] as f64 / self.totals[0] as f64).ln();
        for i in 1..4 {
            log_sum += ((self.matches[i] + 1) as f64 / (self.totals[i] + 1) as f64).ln();
        }
        let c = self.candidate_len as f64;
        let r = self.reference_len as f64;
        let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
        bp * (log_sum / 4.0).exp()
    }
}

/// Sentence-level BLEU-4 over token sequences.
pub fn bleu<T: AsRef<str>, U: AsRef<str>>(prediction: &[T], reference: &[U]) -> f64 {
    BleuStats::of(prediction, reference).score()
}

/// BLEU-4 of two formulas, tokenized with the LTL lexer.
pub fn ltl_bleu(prediction: &str, reference: &str) -> f64 {
    bleu(&token_strings(prediction), &token_strings(reference))
}

/// Corpus BLEU-4: n-gram statistics are pooled before scoring.
pub fn corpus_bleu<P: AsRef<str>, R: AsRef<str>>(predictions: &[P], references: &[R]) -> f64 {
    assert_eq!(predictions.len(), references.len());
    let mut total = BleuStats::default();
    for (p, r) in predictions.iter().zip(references) {
        total.add(&BleuStats::of(
            &token_strings(p.as_ref()),
            &token_strings(r.as_ref()),
        ));
    }
    total.score()
}
