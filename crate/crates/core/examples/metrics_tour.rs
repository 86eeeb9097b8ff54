// The evaluation metrics on small hand-made inputs: formula match, BLEU
// over formula tokens, and Jensen-Shannon divergence between decision
// distributions.

use std::collections::BTreeMap;

use cogform::metrics::{corpus_bleu, js_divergence_maps, js_divergence_vec, ltl_bleu, ltl_match, ltl_match_accuracy};

#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    pub matches: Vec<(String, String, bool)>,
    pub accuracy: f64,
    pub bleu: Vec<f64>,
    pub corpus_bleu: f64,
    pub js: Vec<f64>,
}

pub const PAIRS: [(&str, &str); 4] = [
    ("G (a & b -> c)", "G (b & a -> c)"),
    ("F a", "true U a"),
    ("G (a -> F b)", "G (a -> b)"),
    ("G (cut_in_ahead -> brake)", "G (cut_in_ahead -> decelerate)"),
];

fn dist(entries: &[(&str, f64)]) -> BTreeMap<String, f64> {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub fn run_example() -> Tour {
    let matches: Vec<_> = PAIRS
        .iter()
        .map(|(p, r)| (p.to_string(), r.to_string(), ltl_match(p, r)))
        .collect();
    let predictions: Vec<&str> = PAIRS.iter().map(|p| p.0).collect();
    let references: Vec<&str> = PAIRS.iter().map(|p| p.1).collect();
    let accuracy = ltl_match_accuracy(&predictions, &references);
    let bleu: Vec<f64> = PAIRS.iter().map(|(p, r)| ltl_bleu(p, r)).collect();
    let corpus = corpus_bleu(&predictions, &references);
    for ((p, r, m), b) in matches.iter().zip(&bleu) {
        println!("{p:<28} vs {r:<32} match {m:<5} BLEU {b:.3}");
    }
    println!("accuracy {accuracy:.2}, corpus BLEU {corpus:.3}");

    let js = vec![
        js_divergence_vec(&[0.5, 0.5], &[0.5, 0.5]),
        js_divergence_vec(&[1.0, 0.0], &[0.0, 1.0]),
        js_divergence_maps(
            &dist(&[("brake|keep_lane", 0.7), ("decelerate|keep_lane", 0.3)]),
            &dist(&[("brake|keep_lane", 0.4), ("keep|change_left", 0.6)]),
        ),
    ];
    println!("JS: identical {:.3}, disjoint {:.3}, partial overlap {:.3}", js[0], js[1], js[2]);
    Tour {
        matches,
        accuracy,
        bleu,
        corpus_bleu: corpus,
        js,
    }
}

fn main() {
    run_example();
}
