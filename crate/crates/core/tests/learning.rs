mod common;

use std::sync::Arc;

use pdfa_forge::automaton::{isomorphic, quotient, realize, Verdict};
use pdfa_forge::learner::{learn, learn_observed, LearnerLimits};
use pdfa_forge::relation::EquivalenceSpec;
use pdfa_forge::teacher::{
    bounded_exhaustive_oracle, exact_oracle, is_counterexample, EqOracle, SamplingConfig, SamplingOracle,
};
use pdfa_forge::tolerance::string_tolerant;
use pdfa_forge::{Equivalence, LanguageModel, SimilaritySpec};
use proptest::prelude::*;
use rand::Rng;

use common::{alphabet, pooled, random_pdfa_pooled, rng, LemmaChecker};

fn quant(rng: &mut impl Rng) -> EquivalenceSpec {
    EquivalenceSpec::Quant([2, 4, 8][rng.gen_range(0..3)])
}

fn any_equivalence(rng: &mut impl Rng) -> EquivalenceSpec {
    let specs = ["quant:2", "quant:4", "rank:2", "top:1", "supp", "exact"];
    specs[rng.gen_range(0..specs.len())].parse().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn learner_recovers_the_quotient(seed in any::<u64>()) {
        let mut g = rng(seed);
        let target = pooled(&mut g, 3, 8, 3);
        let e = any_equivalence(&mut g);
        let expected = quotient(&target, &e).unwrap();
        let teacher = exact_oracle(target.clone(), e.clone());
        let mut checker = LemmaChecker::new(Some(expected.num_states()));
        let report = learn_observed(&target, &e, &teacher, LearnerLimits::default(), &mut |ot, step| {
            checker.observe(ot, step)
        })
        .unwrap();
        prop_assert!(report.converged());
        prop_assert!(report.rounds >= 1);
        let h = report.hypothesis.unwrap();
        prop_assert!(isomorphic(&h, &expected).unwrap().is_some());
        prop_assert!(h.num_states() <= target.num_states());
        prop_assert!(checker.violations.is_empty(), "{:?}", checker.violations);
        prop_assert_eq!(checker.hypotheses_checked, report.rounds);
    }

    #[test]
    fn exact_oracle_accepts_the_quotient(seed in any::<u64>()) {
        let mut g = rng(seed);
        let target = pooled(&mut g, 3, 8, 4);
        let e = any_equivalence(&mut g);
        let oracle = exact_oracle(target.clone(), e.clone());
        prop_assert_eq!(oracle.check(&quotient(&target, &e).unwrap()).unwrap(), Verdict::Equivalent);
    }

    #[test]
    fn exact_and_exhaustive_oracles_agree(seed in any::<u64>()) {
        let mut g = rng(seed);
        // keep |Σ|^(|Q_target|·|Q_hyp|) enumerable
        let (k, limit) = [(1, 64), (2, 12), (3, 8)][g.gen_range(0..3)];
        let sigma = alphabet(k);
        let nt = g.gen_range(1..=limit.min(8));
        let nh = g.gen_range(1..=(limit / nt).clamp(1, 8));
        let target = random_pdfa_pooled(&mut g, &sigma, nt, 3);
        let e = quant(&mut g);
        let h = quotient(&random_pdfa_pooled(&mut g, &sigma, nh, 3), &e).unwrap();
        let max_len = target.num_states() * h.num_states();
        let exact = exact_oracle(target.clone(), e.clone()).check(&h).unwrap();
        let exhaustive = bounded_exhaustive_oracle(Arc::new(target.clone()), Arc::new(e.clone()), max_len)
            .check(&h)
            .unwrap();
        prop_assert_eq!(&exact, &exhaustive);
        if let Verdict::Counterexample(v) = &exact {
            prop_assert!(is_counterexample(&target, &e, &h, v).unwrap());
        }
    }

    #[test]
    fn sampled_counterexamples_are_genuine_and_minimal(seed in any::<u64>()) {
        let mut g = rng(seed);
        let sigma = alphabet(g.gen_range(1..=3));
        let (nt, nh) = (g.gen_range(1..=8), g.gen_range(1..=8));
        let target = random_pdfa_pooled(&mut g, &sigma, nt, 3);
        let e = quant(&mut g);
        let h = quotient(&random_pdfa_pooled(&mut g, &sigma, nh, 3), &e).unwrap();
        let oracle = SamplingOracle::new(
            Arc::new(target.clone()),
            Arc::new(e.clone()),
            SamplingConfig::new(50, 12, seed),
        )
        .unwrap();
        if let Verdict::Counterexample(v) = oracle.check(&h).unwrap() {
            prop_assert!(is_counterexample(&target, &e, &h, &v).unwrap());
            for end in 0..v.len() {
                prop_assert!(!is_counterexample(&target, &e, &h, &v[..end]).unwrap());
            }
        }
    }

    #[test]
    fn learned_models_are_tolerant(seed in any::<u64>()) {
        let mut g = rng(seed);
        let kappa = [2u32, 4, 8][g.gen_range(0..3)];
        let target = pooled(&mut g, 2, 8, 4);
        let e = EquivalenceSpec::Quant(kappa);
        let teacher = exact_oracle(target.clone(), e.clone());
        let report = learn(&target, &e, &teacher, LearnerLimits::default()).unwrap();
        let realized = realize(report.hypothesis.as_ref().unwrap());
        let s = SimilaritySpec::vd(1.0 / kappa as f64);
        prop_assert!(string_tolerant(&realized, &target, &s, 12).unwrap().holds());
    }
}

#[test]
fn sampling_teacher_learns_regular_targets() {
    let mut g = rng(11);
    for _ in 0..20 {
        let target = pooled(&mut g, 2, 5, 3);
        let e = quant(&mut g);
        let model: Arc<dyn LanguageModel> = Arc::new(target.clone());
        let eq: Arc<dyn Equivalence> = Arc::new(e.clone());
        let teacher = SamplingOracle::new(model, eq, SamplingConfig::new(300, 20, 5)).unwrap();
        let report = learn(&target, &e, &teacher, LearnerLimits::default()).unwrap();
        assert!(report.converged());
        assert_eq!(report.certified_by.as_deref(), Some("sample:300:20:5"));
        let h = report.hypothesis.unwrap();
        assert!(isomorphic(&h, &quotient(&target, &e).unwrap()).unwrap().is_some());
    }
}

#[test]
fn learning_is_deterministic() {
    let mut g = rng(5);
    let target = pooled(&mut g, 3, 8, 3);
    let e = EquivalenceSpec::Quant(4);
    let run = || {
        let teacher = exact_oracle(target.clone(), e.clone());
        let r = learn(&target, &e, &teacher, LearnerLimits::default()).unwrap();
        (r.hypothesis.as_ref().unwrap().to_json(), r.trace_jsonl(), r.summary().to_string())
    };
    assert_eq!(run(), run());
}
