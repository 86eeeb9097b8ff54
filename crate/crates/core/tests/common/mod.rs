//! Independent reference computations and random inputs shared by the
//! integration and acceptance tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use cogform::ltl::{Formula, Literal, Verdict};
use cogform::rules::{
    Comparator, Condition, Effect, Effects, HashedTrigramEmbedder, ProductionRule, RuleBody,
};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Deserialize;

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(path: &str) -> PathBuf {
    manifest_dir().join("fixtures").join(path)
}

const ATOMS: [&str; 6] = ["a", "b", "c", "cut_in_ahead", "brake", "x_1"];

/// Random formula of depth at most `depth`.
pub fn random_formula<R: Rng>(rng: &mut R, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.1) {
            Formula::True
        } else {
            Formula::Atom(ATOMS.choose(rng).unwrap().to_string())
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..8) {
        0 => Formula::not(random_formula(rng, d)),
        1 => Formula::next(random_formula(rng, d)),
        2 => Formula::finally(random_formula(rng, d)),
        3 => Formula::globally(random_formula(rng, d)),
        4 => Formula::and(random_formula(rng, d), random_formula(rng, d)),
        5 => Formula::or(random_formula(rng, d), random_formula(rng, d)),
        6 => Formula::implies(random_formula(rng, d), random_formula(rng, d)),
        _ => Formula::until(random_formula(rng, d), random_formula(rng, d)),
    }
}

#[derive(Debug, Deserialize)]
pub struct TaxonomyCase {
    pub formula: String,
    #[serde(default)]
    pub antecedent: Option<Vec<String>>,
    #[serde(default)]
    pub consequent: Option<Vec<String>>,
    #[serde(default)]
    pub error: Option<String>,
}

impl TaxonomyCase {
    pub fn expected(&self) -> Verdict {
        let lits = |xs: &Vec<String>| -> Vec<Literal> {
            xs.iter()
                .map(|x| match x.strip_prefix('!') {
                    Some(a) => Literal::neg(a),
                    None => Literal::pos(x.as_str()),
                })
                .collect()
        };
        match (&self.antecedent, &self.consequent, &self.error) {
            (Some(a), Some(c), None) => Verdict::Convertible {
                antecedent: lits(a),
                consequent: lits(c),
            },
            (None, None, Some(reason)) => Verdict::InferenceError {
                reason: reason.clone(),
            },
            _ => panic!("malformed taxonomy case {}", self.formula),
        }
    }
}

#[derive(Debug, Deserialize)]
struct Taxonomy {
    cases: Vec<TaxonomyCase>,
}

pub fn taxonomy() -> Vec<TaxonomyCase> {
    let text = std::fs::read_to_string(fixture("taxonomy.json")).unwrap();
    serde_json::from_str::<Taxonomy>(&text).unwrap().cases
}

/// Jensen-Shannon divergence in bits by direct summation over the support.
pub fn js_oracle(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..p.len() {
        let m = (p[i] + q[i]) / 2.0;
        if p[i] > 0.0 {
            total += p[i] / 2.0 * (p[i].ln() - m.ln());
        }
        if q[i] > 0.0 {
            total += q[i] / 2.0 * (q[i].ln() - m.ln());
        }
    }
    total / std::f64::consts::LN_2
}

/// Random probability vector of length `n`, with some exact zeros.
pub fn random_distribution<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen::<f64>() })
        .collect();
    if v.iter().all(|x| *x == 0.0) {
        v[0] = 1.0;
    }
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn count_ngram(tokens: &[String], gram: &[String]) -> usize {
    (0..tokens.len().saturating_sub(gram.len() - 1))
        .filter(|&i| tokens.len() >= gram.len() && tokens[i..i + gram.len()] == *gram)
        .count()
}

/// Sentence BLEU-4: unigram precision unsmoothed, add-one smoothing for
/// bigrams and up, brevity penalty `exp(1 - r/c)` when `c <= r`.
pub fn bleu_oracle(candidate: &[String], reference: &[String]) -> f64 {
    let c = candidate.len();
    if c == 0 {
        return 0.0;
    }
    let mut product = 1.0;
    for n in 1..=4 {
        let total = c.saturating_sub(n - 1);
        let mut matched = 0;
        let mut seen: Vec<&[String]> = Vec::new();
        for i in 0..total {
            let gram = &candidate[i..i + n];
            if seen.contains(&gram) {
                continue;
            }
            seen.push(gram);
            matched += count_ngram(candidate, gram).min(count_ngram(reference, gram));
        }
        let p = if n == 1 {
            matched as f64 / total as f64
        } else {
            (matched + 1) as f64 / (total + 1) as f64
        };
        if p == 0.0 {
            return 0.0;
        }
        product *= p;
    }
    let r = reference.len() as f64;
    let bp = if c as f64 > r { 1.0 } else { (1.0 - r / c as f64).exp() };
    bp * product.powf(0.25)
}

const TOKENS: [&str; 10] = ["G", "F", "(", ")", "->", "&", "!", "a", "b", "c"];

pub fn random_tokens<R: Rng>(rng: &mut R, max_len: usize) -> Vec<String> {
    let n = rng.gen_range(0..=max_len);
    (0..n).map(|_| TOKENS.choose(rng).unwrap().to_string()).collect()
}

const FEATURES: [&str; 5] = [
    "front_gap_closing",
    "right_vehicle_signaling",
    "left_lane_free",
    "pedestrian_crossing",
    "green_light",
];
const LONG: [&str; 4] = ["accelerate", "keep", "decelerate", "brake"];
const LAT: [&str; 3] = ["keep_lane", "change_left", "change_right"];

/// Random rule over a small highway-like vocabulary; small enough that
/// bodies and names repeat.
pub fn random_rule<R: Rng>(rng: &mut R) -> ProductionRule {
    let n = rng.gen_range(1..=2);
    let preconditions = FEATURES
        .choose_multiple(rng, n)
        .map(|f| {
            let cmp = if rng.gen_bool(0.8) { Comparator::Eq } else { Comparator::Ne };
            Condition::new(*f, cmp, true)
        })
        .collect();
    let lateral = if rng.gen_bool(0.5) {
        Effect::Pass
    } else {
        Effect::Act(LAT.choose(rng).unwrap().to_string())
    };
    ProductionRule::from_body(
        RuleBody {
            preconditions,
            effects: Effects {
                longitudinal: Effect::Act(LONG.choose(rng).unwrap().to_string()),
                lateral,
                sets: vec![],
            },
        },
        rng.gen_range(-1.0..1.0),
    )
}

fn oracle_cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..a.len() {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na.sqrt() * nb.sqrt())
    }
}

/// Brute force over every stored rule: the name of the first stored rule
/// with the same canonical body, else of the most similar name when that
/// similarity reaches `threshold`.
pub fn dedup_oracle(
    candidate: &ProductionRule,
    store: &[ProductionRule],
    embedder: &HashedTrigramEmbedder,
    threshold: f64,
) -> Option<String> {
    let body = candidate.body().canonical();
    if let Some(r) = store.iter().find(|r| r.body().canonical() == body) {
        return Some(r.name.clone());
    }
    let v = embedder.vector(&candidate.name);
    let mut best: Option<(f64, &ProductionRule)> = None;
    for r in store {
        let s = oracle_cosine(&v, &embedder.vector(&r.name));
        if best.map_or(true, |(b, _)| s > b) {
            best = Some((s, r));
        }
    }
    best.filter(|(s, _)| *s >= threshold).map(|(_, r)| r.name.clone())
}

/// Copies the replay fixture into `dir` so runs cannot touch the
/// repository.
pub fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            std::fs::copy(entry.path(), target).unwrap();
        }
    }
}
