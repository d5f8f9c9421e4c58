//! Small automata used throughout the docs and tests.
//!
//! * `fig2a`: `q0 {a:.6} → q1 {a:.4} → q2 {a:.6}`, `q2` loops.
//! * `fig2b`: one state `{a:.5}` looping on `a`.
//! * `fig3a`: `q0 {a:.4} → q1 {a:.5} → q2 {a:.6}`, `q2` loops.

use std::sync::Arc;

use serde_json::Value;

use crate::alphabet::{Alphabet, TERMINAL};
use crate::automaton::{DistMap, Pdfa};
use crate::distribution::Distribution;
use crate::error::{Error, Result};

pub const FIG2A_JSON: &str = include_str!("../fixtures/fig2a.json");
pub const FIG2B_JSON: &str = include_str!("../fixtures/fig2b.json");
pub const FIG3A_JSON: &str = include_str!("../fixtures/fig3a.json");
pub const FIG3_DISTS_JSON: &str = include_str!("../fixtures/fig3-dists.json");

pub fn fig2a() -> Pdfa {
    Pdfa::from_json(FIG2A_JSON).expect("bundled fixture")
}

pub fn fig2b() -> Pdfa {
    Pdfa::from_json(FIG2B_JSON).expect("bundled fixture")
}

pub fn fig3a() -> Pdfa {
    Pdfa::from_json(FIG3A_JSON).expect("bundled fixture")
}

/// The three distinct state distributions of `fig3a`, in state order.
pub fn fig3_dists() -> Vec<Distribution> {
    parse_distribution_list(FIG3_DISTS_JSON).expect("bundled fixture")
}

/// Looks up a bundled PDFA by name (`fig2a`, `fig2b`, `fig3a`).
pub fn builtin_pdfa(name: &str) -> Option<Pdfa> {
    match name {
        "fig2a" => Some(fig2a()),
        "fig2b" => Some(fig2b()),
        "fig3a" => Some(fig3a()),
        _ => None,
    }
}

/// Parses a list of distributions, either a bare JSON array of
/// symbol→probability maps (alphabet = sorted non-`$` keys) or an object
/// `{"alphabet": [...], "distributions": [...]}`.
pub fn parse_distribution_list(text: &str) -> Result<Vec<Distribution>> {
    let value: Value = serde_json::from_str(text)?;
    let (alphabet, items) = match value {
        Value::Array(items) => {
            let mut symbols: Vec<String> = Vec::new();
            for item in &items {
                let map = item
                    .as_object()
                    .ok_or_else(|| Error::Format("expected a map per distribution".into()))?;
                for key in map.keys() {
                    if key != TERMINAL && !symbols.contains(key) {
                        symbols.push(key.clone());
                    }
                }
            }
            symbols.sort();
            (Alphabet::new(symbols)?, items)
        }
        Value::Object(mut obj) => {
            let alphabet: Vec<String> = serde_json::from_value(
                obj.remove("alphabet")
                    .ok_or_else(|| Error::Format("missing `alphabet`".into()))?,
            )?;
            let items = match obj.remove("distributions") {
                Some(Value::Array(items)) => items,
                _ => return Err(Error::Format("missing `distributions` array".into())),
            };
            (Alphabet::new(alphabet)?, items)
        }
        _ => return Err(Error::Format("expected an array or an object".into())),
    };
    let alphabet = Arc::new(alphabet);
    items
        .into_iter()
        .map(|item| serde_json::from_value::<DistMap>(item)?.to_distribution(&alphabet))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_load() {
        assert_eq!(fig2a().num_states(), 3);
        assert_eq!(fig2b().num_states(), 1);
        assert_eq!(fig3a().num_states(), 3);
        let ds = fig3_dists();
        assert_eq!(ds.len(), 3);
        for (q, d) in ds.iter().enumerate() {
            assert_eq!(d, fig3a().dist(q));
        }
    }

    #[test]
    fn distribution_list_forms() {
        let ds = parse_distribution_list(
            r#"{"alphabet":["b","a"],"distributions":[{"a":0.2,"b":0.3,"$":0.5}]}"#,
        )
        .unwrap();
        assert_eq!(ds[0].probs(), &[0.3, 0.2, 0.5]);
        assert!(parse_distribution_list(r#"[{"a":0.5}]"#).is_err());
        assert!(parse_distribution_list("3").is_err());
    }
}
