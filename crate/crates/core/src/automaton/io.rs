//! JSON and Graphviz formats for automata.
//!
//! ```json
//! {"alphabet": ["a"], "initial": 0,
//!  "states": [{"id": 0, "dist": {"a": 0.6, "$": 0.4}}],
//!  "transitions": [{"from": 0, "symbol": "a", "to": 0}]}
//! ```
//!
//! Quotient files add `"equivalence"` and a hex `"signature"` per state;
//! `"dist"` then holds the representative.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::alphabet::Alphabet;
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::relation::{ClassSignature, EquivalenceSpec};

use super::{Pdfa, QuotientPdfa};

/// Symbol → probability entries, kept in file (or alphabet) order.
#[derive(Clone, Debug, PartialEq)]
pub struct DistMap(pub Vec<(String, f64)>);

impl Serialize for DistMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for DistMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct DistVisitor;

        impl<'de> Visitor<'de> for DistVisitor {
            type Value = DistMap;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from symbols to probabilities")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<DistMap, A::Error> {
                let mut entries = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, f64>()? {
                    entries.push((k, v));
                }
                Ok(DistMap(entries))
            }
        }

        deserializer.deserialize_map(DistVisitor)
    }
}

impl DistMap {
    pub fn from_distribution(d: &Distribution) -> Self {
        let ab = d.alphabet();
        DistMap(
            d.probs()
                .iter()
                .enumerate()
                .map(|(i, &p)| (ab.name(i).to_string(), p))
                .collect(),
        )
    }

    pub fn to_distribution(&self, alphabet: &Arc<Alphabet>) -> Result<Distribution> {
        Distribution::from_pairs(alphabet, self.0.iter().map(|(k, v)| (k.as_str(), *v)))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateRecord {
    id: u64,
    dist: DistMap,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    signature: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionRecord {
    from: u64,
    symbol: String,
    to: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AutomatonFile {
    alphabet: Vec<String>,
    initial: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    equivalence: Option<String>,
    states: Vec<StateRecord>,
    transitions: Vec<TransitionRecord>,
}

/// Loading options.
#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Drop unreachable states instead of rejecting the file.
    pub prune: bool,
}

struct Decoded {
    alphabet: Arc<Alphabet>,
    initial: usize,
    dists: Vec<Distribution>,
    successors: Vec<Vec<usize>>,
    signatures: Vec<Option<String>>,
    equivalence: Option<String>,
}

fn decode(text: &str) -> Result<Decoded> {
    let file: AutomatonFile = serde_json::from_str(text)?;
    let alphabet = Arc::new(Alphabet::new(file.alphabet)?);
    let mut index: HashMap<u64, usize> = HashMap::new();
    for (i, s) in file.states.iter().enumerate() {
        if index.insert(s.id, i).is_some() {
            return Err(Error::Format(format!("duplicate state id {}", s.id)));
        }
    }
    let lookup = |id: u64| {
        index
            .get(&id)
            .copied()
            .ok_or_else(|| Error::Format(format!("unknown state id {id}")))
    };
    let initial = lookup(file.initial)?;
    let k = alphabet.len();
    let mut successors = vec![vec![usize::MAX; k]; file.states.len()];
    for t in &file.transitions {
        let from = lookup(t.from)?;
        let to = lookup(t.to)?;
        let sym = alphabet.index_of(&t.symbol)?;
        if successors[from][sym] != usize::MAX {
            return Err(Error::InvalidAutomaton(format!(
                "duplicate transition from {} on `{}`",
                t.from, t.symbol
            )));
        }
        successors[from][sym] = to;
    }
    if successors.iter().flatten().any(|&t| t == usize::MAX) {
        return Err(Error::InvalidAutomaton("tau not total".into()));
    }
    let dists = file
        .states
        .iter()
        .map(|s| s.dist.to_distribution(&alphabet))
        .collect::<Result<Vec<_>>>()?;
    Ok(Decoded {
        alphabet,
        initial,
        dists,
        successors,
        signatures: file.states.into_iter().map(|s| s.signature).collect(),
        equivalence: file.equivalence,
    })
}

fn encode(
    alphabet: &Alphabet,
    initial: usize,
    dists: &[Distribution],
    successors: &[Vec<usize>],
    signatures: Option<&[ClassSignature]>,
    equivalence: Option<&str>,
) -> String {
    let file = AutomatonFile {
        alphabet: alphabet.symbols().to_vec(),
        initial: initial as u64,
        equivalence: equivalence.map(str::to_string),
        states: dists
            .iter()
            .enumerate()
            .map(|(q, d)| StateRecord {
                id: q as u64,
                dist: DistMap::from_distribution(d),
                signature: signatures.map(|s| s[q].to_hex()),
            })
            .collect(),
        transitions: successors
            .iter()
            .enumerate()
            .flat_map(|(q, row)| {
                row.iter().enumerate().map(move |(s, &t)| TransitionRecord {
                    from: q as u64,
                    symbol: alphabet.name(s).to_string(),
                    to: t as u64,
                })
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("serializable");
    text.push('\n');
    text
}

impl Pdfa {
    pub fn to_json(&self) -> String {
        encode(
            self.alphabet(),
            self.initial(),
            self.dists(),
            &self.successors(),
            None,
            None,
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_with(text, LoadOptions::default())
    }

    pub fn from_json_with(text: &str, options: LoadOptions) -> Result<Self> {
        let d = decode(text)?;
        if d.equivalence.is_some() || d.signatures.iter().any(Option::is_some) {
            return Err(Error::Format("this is a quotient PDFA file".into()));
        }
        if options.prune {
            Pdfa::new_pruned(d.alphabet, d.initial, d.dists, d.successors)
        } else {
            Pdfa::new(d.alphabet, d.initial, d.dists, d.successors)
        }
    }

    pub fn to_dot(&self) -> String {
        let labels: Vec<String> = (0..self.num_states())
            .map(|q| format!("q{q}\\n{}", self.dist(q).terminal_prob()))
            .collect();
        render_dot("pdfa", self.alphabet(), self.initial(), &labels, &self.successors(), |q| {
            self.dist(q).clone()
        })
    }
}

impl QuotientPdfa {
    pub fn to_json(&self) -> String {
        encode(
            self.alphabet(),
            self.initial(),
            self.representatives(),
            &self.successors(),
            Some(self.classes()),
            Some(self.equivalence()),
        )
    }

    /// Loads a quotient file. The equivalence must be in the spec grammar so
    /// that stored signatures can be checked against the representatives.
    pub fn from_json(text: &str) -> Result<Self> {
        let d = decode(text)?;
        let label = d
            .equivalence
            .ok_or_else(|| Error::Format("missing `equivalence`".into()))?;
        let spec: EquivalenceSpec = label.parse()?;
        let classes: Vec<ClassSignature> = d.dists.iter().map(|x| spec.signature_of(x)).collect();
        for (q, stored) in d.signatures.iter().enumerate() {
            match stored {
                Some(hex) if ClassSignature::from_hex(hex)? == classes[q] => {}
                Some(_) => {
                    return Err(Error::InvalidAutomaton(format!(
                        "signature of state {q} does not match its representative"
                    )))
                }
                None => return Err(Error::Format(format!("state {q} lacks `signature`"))),
            }
        }
        QuotientPdfa::from_parts(d.alphabet, d.initial, d.successors, classes, d.dists, spec.to_string())
    }

    pub fn to_dot(&self) -> String {
        let labels: Vec<String> = (0..self.num_states())
            .map(|q| format!("q{q}\\n{}", self.representative(q).terminal_prob()))
            .collect();
        render_dot("quotient", self.alphabet(), self.initial(), &labels, &self.successors(), |q| {
            self.representative(q).clone()
        })
    }
}

fn quote(text: &str) -> String {
    // labels carry intentional `\n` escapes, so only quotes are escaped
    format!("\"{}\"", text.replace('"', "\\\""))
}

fn render_dot(
    name: &str,
    alphabet: &Alphabet,
    initial: usize,
    labels: &[String],
    successors: &[Vec<usize>],
    dist: impl Fn(usize) -> Distribution,
) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {name} {{").unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    writeln!(out, "  node [shape=circle];").unwrap();
    writeln!(out, "  __start [shape=point];").unwrap();
    for (q, label) in labels.iter().enumerate() {
        writeln!(out, "  q{q} [label={}];", quote(label)).unwrap();
    }
    writeln!(out, "  __start -> q{initial};").unwrap();
    for (q, row) in successors.iter().enumerate() {
        let d = dist(q);
        for (s, &t) in row.iter().enumerate() {
            let label = format!("{}/{}", alphabet.name(s), d.prob(s));
            writeln!(out, "  q{q} -> q{t} [label={}];", quote(&label)).unwrap();
        }
    }
    writeln!(out, "}}").unwrap();
    out
}

/// Free-function form of the JSON/DOT entry points for either automaton kind.
pub fn to_dot(a: &Pdfa) -> String {
    a.to_dot()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::quotient;
    use crate::fixtures;

    #[test]
    fn pdfa_round_trip() {
        let a = fixtures::fig2a();
        let back = Pdfa::from_json(&a.to_json()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn quotient_round_trip() {
        let h = quotient(&fixtures::fig3a(), &EquivalenceSpec::Quant(7)).unwrap();
        let text = h.to_json();
        assert!(text.contains("\"equivalence\": \"quant:7\""));
        assert_eq!(QuotientPdfa::from_json(&text).unwrap(), h);
        // tampered signature
        let bad = text.replacen("\"signature\": \"01", "\"signature\": \"02", 1);
        assert!(QuotientPdfa::from_json(&bad).is_err());
    }

    #[test]
    fn missing_transition_is_rejected() {
        let text = r#"{"alphabet":["a"],"initial":0,
            "states":[{"id":0,"dist":{"a":0.5,"$":0.5}},{"id":1,"dist":{"a":0.5,"$":0.5}}],
            "transitions":[{"from":0,"symbol":"a","to":1}]}"#;
        let err = Pdfa::from_json(text).unwrap_err();
        assert!(err.to_string().contains("tau not total"), "{err}");
    }

    #[test]
    fn unreachable_requires_prune() {
        let text = r#"{"alphabet":["a"],"initial":0,
            "states":[{"id":0,"dist":{"a":0.5,"$":0.5}},{"id":7,"dist":{"a":0.1,"$":0.9}}],
            "transitions":[{"from":0,"symbol":"a","to":0},{"from":7,"symbol":"a","to":0}]}"#;
        assert!(Pdfa::from_json(text).is_err());
        let a = Pdfa::from_json_with(text, LoadOptions { prune: true }).unwrap();
        assert_eq!(a.num_states(), 1);
    }

    #[test]
    fn rejects_malformed() {
        assert!(Pdfa::from_json("{").is_err());
        assert!(Pdfa::from_json(r#"{"alphabet":["a"],"initial":3,"states":[],"transitions":[]}"#).is_err());
        let bad_sum = r#"{"alphabet":["a"],"initial":0,
            "states":[{"id":0,"dist":{"a":0.5,"$":0.6}}],
            "transitions":[{"from":0,"symbol":"a","to":0}]}"#;
        assert!(matches!(Pdfa::from_json(bad_sum), Err(Error::InvalidDistribution(_))));
    }

    #[test]
    fn dot_mirrors_figures() {
        let dot = fixtures::fig2b().to_dot();
        assert!(dot.contains("q0 -> q0 [label=\"a/0.5\"]"), "{dot}");
        assert!(dot.contains("q0 [label=\"q0\\n0.5\"]"), "{dot}");
        let dot = fixtures::fig3a().to_dot();
        assert!(dot.contains("q0 -> q1 [label=\"a/0.4\"]"));
        assert!(dot.contains("q2 -> q2 [label=\"a/0.6\"]"));
    }
}
