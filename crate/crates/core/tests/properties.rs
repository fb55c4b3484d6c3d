use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cep_core::difftest::{check_case, generate};
use cep_core::{
    build_for_mode, build_lazy_chain, oracle_matches, parse_pattern, to_dnf, Chain64, Event64, EventType, MatchKey,
    Mode, NegationStrategy, Nfa64, Runtime,
};

const PATTERNS: [&str; 5] = [
    "PATTERN SEQ(A a, B b, C c) WHERE { a.x <= c.x } WITHIN 8 ms",
    "PATTERN AND(A a, B b, C c) WHERE { a.x != b.x } WITHIN 6 ms",
    "PATTERN AND(SEQ(A a, B b), C c) WITHIN 7 ms",
    "PATTERN SEQ(A a, NOT(D d), B b, C c) WHERE { d.x > a.x } WITHIN 9 ms",
    "PATTERN SEQ(A a, B+ b[], C c) WHERE { b[i].x >= a.x } WITHIN 6 ms",
];

fn chains(text: &str) -> Vec<Chain64> {
    to_dnf(&parse_pattern(text).unwrap()).unwrap()
}

fn events() -> impl Strategy<Value = Vec<Arc<Event64>>> {
    prop::collection::vec((0usize..5, 0i64..3, 0i32..4), 0..16).prop_map(|raw| {
        let mut ts = 0;
        raw.into_iter()
            .enumerate()
            .map(|(i, (t, gap, x))| {
                ts += gap;
                let name = ["A", "B", "C", "D", "Z"][t];
                Arc::new(Event64::new(name, ts, i as u64).with_num("x", x as f64))
            })
            .collect()
    })
}

fn keys(nfa: &Nfa64, events: &[Arc<Event64>]) -> Vec<MatchKey> {
    let mut k: Vec<MatchKey> = Runtime::new(nfa)
        .run(events.iter().cloned())
        .unwrap()
        .iter()
        .map(|m| m.key())
        .collect();
    k.sort();
    k
}

fn orders(n: usize) -> Vec<Vec<EventType>> {
    let all = [["A", "B", "C"], ["A", "C", "B"], ["B", "A", "C"], ["B", "C", "A"], ["C", "A", "B"], ["C", "B", "A"]];
    all.iter()
        .map(|o| o[..n].iter().map(|t| EventType::from(*t)).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_order_gives_the_oracle_matches(p in 0usize..PATTERNS.len(), ev in events()) {
        let cs = chains(PATTERNS[p]);
        let mut expected = oracle_matches(&cs, &ev, 30).unwrap();
        expected.sort();
        prop_assert_eq!(&keys(&build_for_mode(&cs, Mode::Eager, None).unwrap(), &ev), &expected);
        for order in orders(3) {
            for s in [NegationStrategy::PostProcess, NegationStrategy::FirstChance] {
                let nfa = build_lazy_chain(&cs[0], &order, s).unwrap();
                prop_assert_eq!(&keys(&nfa, &ev), &expected);
            }
        }
    }

    #[test]
    fn runs_are_deterministic(p in 0usize..PATTERNS.len(), ev in events()) {
        let cs = chains(PATTERNS[p]);
        let order: Vec<EventType> = ["C", "A", "B"].iter().map(|t| EventType::from(*t)).collect();
        let nfa = build_lazy_chain(&cs[0], &order, NegationStrategy::PostProcess).unwrap();
        let once = |nfa: &Nfa64| {
            let mut rt = Runtime::new(nfa);
            let m: Vec<_> = rt.run(ev.iter().cloned()).unwrap().iter().map(|m| (m.key(), m.detected)).collect();
            (m, rt.counters().clone())
        };
        prop_assert_eq!(once(&nfa), once(&nfa));
    }

    #[test]
    fn shared_buffer_matches_private_buffers(p in 0usize..PATTERNS.len(), ev in events()) {
        let cs = chains(PATTERNS[p]);
        for order in orders(3) {
            let nfa = build_lazy_chain(&cs[0], &order, NegationStrategy::FirstChance).unwrap();
            let mut rt = Runtime::with_audit(&nfa);
            rt.run(ev.iter().cloned()).unwrap();
            prop_assert_eq!(rt.counters().audit_mismatches, 0);
        }
    }

    #[test]
    fn wider_window_keeps_positive_matches(ev in events(), w in 1i64..6) {
        let narrow = chains(&format!("PATTERN AND(SEQ(A a, B b), C c) WITHIN {w} ms"));
        let wide = chains(&format!("PATTERN AND(SEQ(A a, B b), C c) WITHIN {} ms", w + 3));
        let small = oracle_matches(&narrow, &ev, 30).unwrap();
        let big = oracle_matches(&wide, &ev, 30).unwrap();
        prop_assert!(small.iter().all(|k| big.contains(k)));
    }

    #[test]
    fn random_cases_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let case = generate(&mut rng, 16);
        let (divergences, _, _) = check_case(0, &case).unwrap();
        if let Some(d) = divergences.first() {
            prop_assert!(false, "{}", d);
        }
    }
}
