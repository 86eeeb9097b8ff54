// Parse LTL, print the canonical form and decide which formulas can become
// production rules.

use cogform::ltl::{self, Verdict};

const FORMULAS: [&str; 6] = [
    "G (cut_in_ahead -> brake & keep_lane)",
    "G (!(a | b) -> c)",
    "G ((b & a) -> (d & c))",
    "F cut_in_ahead",
    "G (cut_in_ahead -> X brake)",
    "brake U green_light",
];

/// Returns `(formula, canonical text, convertible)` for each sample.
pub fn run_example() -> Result<Vec<(String, String, bool)>, ltl::ParseError> {
    let mut rows = Vec::new();
    for text in FORMULAS {
        let f = ltl::parse(text)?;
        let canon = ltl::to_text(&ltl::canonicalize(&f));
        let verdict = ltl::classify(&f);
        match &verdict {
            Verdict::Convertible {
                antecedent,
                consequent,
            } => println!(
                "{text:<40} canonical {canon:<36} rule: {} condition(s), {} effect(s)",
                antecedent.len(),
                consequent.len()
            ),
            Verdict::InferenceError { reason } => {
                println!("{text:<40} canonical {canon:<36} not a rule: {reason}")
            }
        }
        rows.push((text.to_string(), canon, verdict.is_convertible()));
    }
    Ok(rows)
}

fn main() -> Result<(), ltl::ParseError> {
    run_example().map(|_| ())
}
