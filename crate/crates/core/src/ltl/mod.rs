//! LTL formulas: syntax tree, text syntax, canonical forms and the
//! production-rule convertibility check.
//!
//! The text syntax uses `G`, `F`, `X` (next), `U` (until), `!`, `&`, `|`,
//! `->`, `true`, `false` and parentheses. Operators are case-sensitive,
//! whitespace is insignificant.
//!
//! ```
//! use cogform::ltl::{self, Verdict};
//!
//! let f = ltl::parse("G ((a & !c) -> b)").unwrap();
//! assert_eq!(f.to_string(), "G ((a & !c) -> b)");
//! assert!(ltl::classify(&f).is_convertible());
//! assert!(!ltl::classify(&ltl::parse("F a").unwrap()).is_convertible());
//! ```

mod ast;
mod canon;
mod classify;
mod json;
pub mod lexer;
mod parser;
mod print;

use std::fmt;

pub use ast::{is_atom_name, Formula};
pub use canon::canonicalize;
pub use classify::{classify, Literal, Verdict};
pub use json::{from_json, to_json};
pub use parser::parse;
pub use print::to_text;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    /// Byte offset into the input.
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "at byte {}: expected one of [{}], found {:?}",
            self.offset,
            self.expected.join(", "),
            self.found
        )
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::True),
            "[a-e][a-z0-9_]{0,2}".prop_map(Formula::Atom),
        ];
        leaf.prop_recursive(8, 64, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                inner.clone().prop_map(Formula::next),
                inner.clone().prop_map(Formula::finally),
                inner.clone().prop_map(Formula::globally),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::implies(l, r)),
                (inner.clone(), inner).prop_map(|(l, r)| Formula::until(l, r)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(f in formula()) {
            prop_assert_eq!(parse(&to_text(&f)).unwrap(), f);
        }

        #[test]
        fn canonicalize_is_idempotent(f in formula()) {
            let once = canonicalize(&f);
            prop_assert_eq!(canonicalize(&once), once);
        }

        #[test]
        fn convertible_means_single_root_globally(f in formula()) {
            if classify(&f).is_convertible() {
                let mut globals = 0;
                let mut temporal = 0;
                f.walk(&mut |g| match g {
                    Formula::Globally(_) => globals += 1,
                    Formula::Next(_) | Formula::Until(..) | Formula::Finally(_) => temporal += 1,
                    _ => {}
                });
                prop_assert!(matches!(f, Formula::Globally(_)));
                prop_assert_eq!(globals, 1);
                prop_assert_eq!(temporal, 0);
            }
        }

        #[test]
        fn json_round_trip(f in formula()) {
            prop_assert_eq!(from_json(&to_json(&f)).unwrap(), f);
        }
    }
}
