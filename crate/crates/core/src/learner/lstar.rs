use log::{debug, info};
use serde::Serialize;

use crate::automaton::{QuotientPdfa, Verdict};
use crate::error::Result;
use crate::model::{CachedModel, LanguageModel};
use crate::relation::Equivalence;
use crate::teacher::EqOracle;

use super::table::{Inconsistency, ObservationTable};

/// Guards for targets that are not regular under the chosen equivalence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LearnerLimits {
    /// Maximum number of equivalence queries.
    pub max_rounds: usize,
    /// Maximum logical table size `|RED ∪ BLUE| · |Suf|`.
    pub max_cells: usize,
}

impl Default for LearnerLimits {
    fn default() -> Self {
        LearnerLimits {
            max_rounds: 64,
            max_cells: 100_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Converged,
    RoundLimit,
    CellLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Close,
    Consistent,
    Hypothesis,
    Counterexample,
}

/// One line of the learner trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub event: EventKind,
    pub red: usize,
    pub blue: usize,
    pub suffixes: usize,
    pub classes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub word: Option<String>,
}

/// Table size when a hypothesis was built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TableDims {
    pub red: usize,
    pub blue: usize,
    pub suffixes: usize,
    pub cells: usize,
    pub classes: usize,
}

/// What the learner just did; passed to observers with the table after the
/// step was applied.
#[derive(Debug)]
pub enum Step<'s> {
    Close(&'s [usize]),
    Consistent(&'s Inconsistency),
    Hypothesis(&'s QuotientPdfa),
    Counterexample(&'s [usize]),
}

impl Step<'_> {
    pub fn kind(&self) -> EventKind {
        match self {
            Step::Close(_) => EventKind::Close,
            Step::Consistent(_) => EventKind::Consistent,
            Step::Hypothesis(_) => EventKind::Hypothesis,
            Step::Counterexample(_) => EventKind::Counterexample,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LearnerReport {
    /// Last hypothesis built; `None` only if a limit hit before the first.
    pub hypothesis: Option<QuotientPdfa>,
    pub outcome: Outcome,
    /// Number of equivalence queries.
    pub rounds: usize,
    /// Distinct membership queries sent to the model.
    pub mq_count: u64,
    pub cache_hits: u64,
    pub history: Vec<TableDims>,
    pub trace: Vec<TraceRecord>,
    pub equivalence: String,
    /// Oracle that accepted the final hypothesis.
    pub certified_by: Option<String>,
}

impl LearnerReport {
    pub fn converged(&self) -> bool {
        self.outcome == Outcome::Converged
    }

    /// The trace as line-delimited JSON.
    pub fn trace_jsonl(&self) -> String {
        self.trace
            .iter()
            .map(|r| serde_json::to_string(r).expect("trace record") + "\n")
            .collect()
    }

    /// Machine-readable summary without the hypothesis itself.
    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "converged": self.converged(),
            "outcome": self.outcome,
            "rounds": self.rounds,
            "mq_count": self.mq_count,
            "cache_hits": self.cache_hits,
            "states": self.hypothesis.as_ref().map(QuotientPdfa::num_states),
            "equivalence": self.equivalence,
            "certified_by": self.certified_by,
            "history": self.history,
        })
    }
}

/// Runs the learner; see [`learn_observed`].
pub fn learn(
    m: &dyn LanguageModel,
    e: &dyn Equivalence,
    teacher: &dyn EqOracle,
    limits: LearnerLimits,
) -> Result<LearnerReport> {
    learn_observed(m, e, teacher, limits, &mut |_, _| {})
}

/// Runs the learner, calling `observer` after every table step.
///
/// Membership queries go through a private cache, so `mq_count` counts
/// distinct words.
pub fn learn_observed(
    m: &dyn LanguageModel,
    e: &dyn Equivalence,
    teacher: &dyn EqOracle,
    limits: LearnerLimits,
    observer: &mut dyn FnMut(&ObservationTable<'_>, &Step<'_>),
) -> Result<LearnerReport> {
    let cache = CachedModel::new(m);
    let mut ot = ObservationTable::init(&cache, e)?;
    let alphabet = m.alphabet().clone();
    let mut trace = Vec::new();
    let mut history = Vec::new();
    let mut hypothesis = None;
    let mut rounds = 0;
    let mut certified_by = None;

    let mut record = |ot: &ObservationTable<'_>, step: &Step<'_>, trace: &mut Vec<TraceRecord>| {
        let word = match step {
            Step::Close(w) | Step::Counterexample(w) => Some(alphabet.format_word(w)),
            Step::Consistent(w) => Some(alphabet.format_word(&w.new_suffix())),
            Step::Hypothesis(_) => None,
        };
        trace.push(TraceRecord {
            event: step.kind(),
            red: ot.red().len(),
            blue: ot.blue().len(),
            suffixes: ot.suffixes().len(),
            classes: ot.num_classes(),
            word,
        });
        observer(ot, step);
    };

    let outcome = 'outer: loop {
        loop {
            if ot.num_cells() > limits.max_cells {
                break 'outer Outcome::CellLimit;
            }
            if let Some(p) = ot.is_closed() {
                ot.close_step(&p)?;
                record(&ot, &Step::Close(&p), &mut trace);
            } else if let Some(w) = ot.is_consistent() {
                ot.consistent_step(&w)?;
                record(&ot, &Step::Consistent(&w), &mut trace);
            } else {
                break;
            }
        }
        let h = ot.build_hypothesis()?;
        debug!("hypothesis with {} states", h.num_states());
        history.push(TableDims {
            red: ot.red().len(),
            blue: ot.blue().len(),
            suffixes: ot.suffixes().len(),
            cells: ot.num_cells(),
            classes: ot.num_classes(),
        });
        record(&ot, &Step::Hypothesis(&h), &mut trace);
        let h = hypothesis.insert(h);
        if rounds >= limits.max_rounds {
            break Outcome::RoundLimit;
        }
        rounds += 1;
        match teacher.check(h)? {
            Verdict::Equivalent => {
                certified_by = Some(teacher.describe());
                break Outcome::Converged;
            }
            Verdict::Counterexample(v) => {
                ot.update_with_counterexample(&v)?;
                record(&ot, &Step::Counterexample(&v), &mut trace);
            }
        }
    };
    info!(
        "learner stopped ({outcome:?}) after {rounds} rounds, {} queries",
        cache.misses()
    );
    Ok(LearnerReport {
        hypothesis,
        outcome,
        rounds,
        mq_count: cache.misses(),
        cache_hits: cache.hits(),
        history,
        trace,
        equivalence: e.label(),
        certified_by,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{isomorphic, lm_equivalent, quotient, realize};
    use crate::fixtures;
    use crate::model::SyntheticModel;
    use crate::relation::EquivalenceSpec;
    use crate::teacher::{exact_oracle, SamplingConfig, SamplingOracle};
    use std::sync::Arc;

    #[test]
    fn learns_fig2a_under_quant3() {
        let a = fixtures::fig2a();
        let q3 = EquivalenceSpec::Quant(3);
        let teacher = exact_oracle(a.clone(), q3.clone());
        let report = learn(&a, &q3, &teacher, LearnerLimits::default()).unwrap();
        assert!(report.converged());
        assert_eq!(report.rounds, 1);
        let h = report.hypothesis.unwrap();
        assert_eq!(h.num_states(), 1);
        assert!(lm_equivalent(&realize(&h), &a, &q3).unwrap().is_equivalent());
        assert_eq!(report.certified_by.as_deref(), Some("exact"));
    }

    #[test]
    fn learns_fig3a_under_quant7() {
        let a = fixtures::fig3a();
        let q7 = EquivalenceSpec::Quant(7);
        let teacher = exact_oracle(a.clone(), q7.clone());
        let report = learn(&a, &q7, &teacher, LearnerLimits::default()).unwrap();
        let h = report.hypothesis.unwrap();
        assert_eq!(h.num_states(), 3);
        assert!(isomorphic(&h, &quotient(&a, &q7).unwrap()).unwrap().is_some());
    }

    #[test]
    fn mq_count_is_cache_misses() {
        let a = fixtures::fig3a();
        let q7 = EquivalenceSpec::Quant(7);
        let teacher = exact_oracle(a.clone(), q7.clone());
        let counted = CachedModel::new(&a);
        let report = learn(&counted, &q7, &teacher, LearnerLimits::default()).unwrap();
        assert_eq!(report.mq_count, counted.misses());
        assert!(report.rounds >= 1);
    }

    #[test]
    fn non_regular_target_hits_round_limit() {
        let m1: Arc<dyn LanguageModel> = Arc::new(SyntheticModel::m1());
        let exact: Arc<dyn Equivalence> = Arc::new(EquivalenceSpec::Exact);
        let teacher = SamplingOracle::new(Arc::clone(&m1), Arc::clone(&exact), SamplingConfig::new(1000, 40, 7)).unwrap();
        let limits = LearnerLimits {
            max_rounds: 3,
            ..LearnerLimits::default()
        };
        let report = learn(m1.as_ref(), exact.as_ref(), &teacher, limits).unwrap();
        assert_eq!(report.outcome, Outcome::RoundLimit);
        assert_eq!(report.rounds, 3);
        assert!(report.hypothesis.is_some());
    }

    #[test]
    fn cell_limit_stops_early() {
        let m1 = SyntheticModel::m1();
        let exact = EquivalenceSpec::Exact;
        let teacher = SamplingOracle::new(Arc::new(SyntheticModel::m1()), Arc::new(EquivalenceSpec::Exact), SamplingConfig::new(100, 40, 1)).unwrap();
        let limits = LearnerLimits {
            max_rounds: 1000,
            max_cells: 50,
        };
        let report = learn(&m1, &exact, &teacher, limits).unwrap();
        assert_eq!(report.outcome, Outcome::CellLimit);
    }

    #[test]
    fn trace_lines() {
        let a = fixtures::fig3a();
        let q7 = EquivalenceSpec::Quant(7);
        let teacher = exact_oracle(a.clone(), q7.clone());
        let report = learn(&a, &q7, &teacher, LearnerLimits::default()).unwrap();
        let lines: Vec<serde_json::Value> = report
            .trace_jsonl()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines[0]["event"], "close");
        assert_eq!(lines.last().unwrap()["event"], "hypothesis");
        assert_eq!(lines.last().unwrap()["classes"], 3);
        assert_eq!(report.summary()["states"], 3);
    }
}
