//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cep_bench::{csv_io, execute, generate_stream, load_pattern, write_matches, RunConfig, StreamSpec};
use cep_core::difftest::{self, FEATURES};
use cep_core::{
    build_eager, build_for_mode, build_lazy_chain, oracle_matches, Chain64, Event64, EventType, MatchKey, Mode,
    NegationStrategy, Nfa64, Rates, Runtime,
};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn types(ts: &[&str]) -> Vec<EventType> {
    ts.iter().map(|t| EventType::from(*t)).collect()
}

fn rates(pairs: &[(&str, f64)]) -> Rates {
    pairs.iter().map(|(t, r)| (EventType::from(*t), *r)).collect()
}

fn permutations(xs: &[EventType]) -> Vec<Vec<EventType>> {
    if xs.len() <= 1 {
        return vec![xs.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..xs.len() {
        let mut rest = xs.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head.clone());
            out.push(p);
        }
    }
    out
}

fn keys(nfa: &Nfa64, events: &[Arc<Event64>]) -> Vec<MatchKey> {
    let mut k: Vec<MatchKey> = Runtime::new(nfa)
        .run(events.iter().cloned())
        .expect("run")
        .iter()
        .map(|m| m.key())
        .collect();
    k.sort();
    k
}

fn named_stream(names: &[&str]) -> Vec<Arc<Event64>> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let t = n[..1].to_uppercase();
            Arc::new(Event64::new(t.as_str(), i as i64 + 1, i as u64).with_num("price", 10.0))
        })
        .collect()
}

/// Every applicable construction must produce `want` exactly.
fn all_constructions(chains: &[Chain64], events: &[Arc<Event64>], want: &[MatchKey]) -> Result<usize, String> {
    let mut n = 0;
    let mut oracle = oracle_matches(chains, events, 30).map_err(|e| e.to_string())?;
    oracle.sort();
    ensure(oracle == want, format!("oracle gave {} matches", oracle.len()))?;
    let eager = build_for_mode(chains, Mode::Eager, None).map_err(|e| e.to_string())?;
    ensure(keys(&eager, events) == want, "eager differs")?;
    let pos = chains[0].positive_types();
    for order in permutations(&pos) {
        let nfa = build_lazy_chain(&chains[0], &order, NegationStrategy::PostProcess).map_err(|e| e.to_string())?;
        ensure(keys(&nfa, events) == want, format!("lazy order {order:?} differs"))?;
        n += 1;
    }
    Ok(n)
}

fn ac1() -> Check {
    let seq3 = load_pattern(
        "PATTERN SEQ(A a, B b, C c) WHERE skip_till_any_match { a.price > 5 AND b.price > 5 AND c.price > 5 } WITHIN 1 hour.",
        None,
    )
    .map_err(|e| e.to_string())?;
    let ev = named_stream(&["a1", "a2", "b1", "b2", "c"]);
    let k = |a: usize, b: usize| {
        let mut k: MatchKey = [("a", a), ("b", b), ("c", 4)]
            .iter()
            .map(|&(r, i)| (r.to_string(), ev[i].ts, ev[i].seq))
            .collect();
        k.sort();
        k
    };
    let mut want = vec![k(0, 2), k(1, 2), k(0, 3), k(1, 3)];
    want.sort();
    let orders = all_constructions(&seq3, &ev, &want)?;
    let lazy = build_for_mode(&seq3, Mode::Lazy, Some(&rates(&[("A", 3.0), ("B", 2.0), ("C", 1.0)]))).map_err(|e| e.to_string())?;
    ensure(keys(&lazy, &ev) == want, "lazy mode differs")?;

    let kleene = load_pattern("PATTERN SEQ(A a, B+ b[], C c) WITHIN 1 hour", None).map_err(|e| e.to_string())?;
    let kev = named_stream(&["a", "b1", "b2", "b3", "c"]);
    let mut kgot = oracle_matches(&kleene, &kev, 30).map_err(|e| e.to_string())?;
    kgot.sort();
    ensure(kgot.len() == 7, format!("Kleene oracle gave {}", kgot.len()))?;
    all_constructions(&kleene, &kev, &kgot)?;
    Ok(format!("SEQ3: 4/4 exact matches under oracle, eager, lazy and {orders} orders; Kleene: 7 matches"))
}

fn ac2() -> Check {
    let s = difftest::run(600, 2024, 25).map_err(|e| e.to_string())?;
    if let Some(d) = s.divergences.first() {
        return Err(format!("{} divergences, first:\n{d}", s.divergences.len()));
    }
    for f in FEATURES {
        ensure(s.features.get(f).copied().unwrap_or(0) > 0, format!("feature {f} not covered"))?;
    }
    let cov: Vec<String> = s.features.iter().map(|(f, n)| format!("{f}={n}")).collect();
    Ok(format!(
        "{} cases, {} automaton runs, {} oracle matches, 0 divergences [{}]",
        s.cases,
        s.runs,
        s.matches,
        cov.join(" ")
    ))
}

fn ac3() -> Check {
    let patterns = [
        "PATTERN A a WITHIN 1 hour",
        "PATTERN SEQ(A a, B b) WITHIN 1 hour",
        "PATTERN SEQ(A a, B b, C c) WITHIN 1 hour",
        "PATTERN SEQ(A a, B b, C c, D d) WITHIN 1 hour",
        "PATTERN AND(A a, B b, C c) WITHIN 1 hour",
        "PATTERN AND(A a, B b, C c, D d) WITHIN 1 hour",
        "PATTERN AND(SEQ(A a, B b), SEQ(C c, D d)) WITHIN 1 hour",
        "PATTERN SEQ(A a, AND(B b, C c), D d) WITHIN 1 hour",
        "PATTERN SEQ(A a, B+ b[], C c) WITHIN 1 hour",
        "PATTERN AND(A a, B{2,3} b[]) WITHIN 1 hour",
    ];
    let mut chains_checked = 0;
    for p in patterns {
        let cs = load_pattern(p, None).map_err(|e| e.to_string())?;
        let c = &cs[0];
        let n = c.positives.len();
        for order in permutations(&c.positive_types()) {
            let nfa = build_lazy_chain(c, &order, NegationStrategy::PostProcess).map_err(|e| e.to_string())?;
            ensure(nfa.states.len() == n + 2, format!("{p} under {order:?}: {} states", nfa.states.len()))?;
            chains_checked += 1;
        }
    }
    let and3 = load_pattern("PATTERN AND(A a, B b, C c) WITHIN 1 hour", None).map_err(|e| e.to_string())?;
    let eager = build_eager(&and3[0]).map_err(|e| e.to_string())?;
    ensure(eager.states.len() == 8 + 1, format!("eager AND3 has {} states", eager.states.len()))?;
    let lazy = build_lazy_chain(&and3[0], &types(&["A", "B", "C"]), NegationStrategy::PostProcess).map_err(|e| e.to_string())?;
    ensure(lazy.states.len() == 5, format!("lazy AND3 has {} states", lazy.states.len()))?;
    Ok(format!(
        "{chains_checked} lazy chains with n+2 states; eager AND3 = {} (2^3 + R), lazy AND3 = {}",
        eager.states.len(),
        lazy.states.len()
    ))
}

const CORR_SEQ3: &str = "PATTERN SEQ(A a, B b, C c) WHERE skip_till_any_match {
    corr(a.history, b.history) > 0.9 AND corr(b.history, c.history) > 0.9 AND corr(c.history, a.history) > 0.9
} WITHIN 1 sec";

struct Pair {
    eager: cep_bench::RunResult,
    lazy: cep_bench::RunResult,
}

impl Pair {
    fn advantage(&self) -> f64 {
        self.lazy.report.throughput / self.eager.report.throughput
    }
}

/// Eager and lazy over the same SEQ3 stream where C is `ratio` times rarer
/// than A and B, with the window covering about 200 events.
fn seq3_pair(ratio: f64, count: usize, seed: u64) -> Result<Pair, String> {
    let c_rate = 100.0 / ratio;
    let spec = StreamSpec::new(&[("A", 100.0), ("B", 100.0), ("C", c_rate)], count, seed);
    let events = generate_stream(&spec).map_err(|e| e.to_string())?;
    let window_ms = (200.0 / (200.0 + c_rate) * 1000.0).round() as i64;
    let window = cep_core::Window::new(window_ms).map_err(|e| e.to_string())?;
    let chains = load_pattern(CORR_SEQ3, Some(window)).map_err(|e| e.to_string())?;
    let r = rates(&[("A", 100.0), ("B", 100.0), ("C", c_rate)]);
    let run = |mode: Mode| {
        let mut cfg = RunConfig::new(mode, Some(r.clone()));
        cfg.repeat = 3;
        execute(&chains, &events, &cfg).map_err(|e| e.to_string())
    };
    let pair = Pair {
        eager: run(Mode::Eager)?,
        lazy: run(Mode::Lazy)?,
    };
    ensure(pair.eager.matches == pair.lazy.matches, format!("ratio 1:{ratio}: match sets differ"))?;
    Ok(pair)
}

fn ac4() -> Check {
    let p = seq3_pair(100.0, 100_000, 41)?;
    let tp = p.advantage();
    let live = p.lazy.report.peak_live_instances as f64 / p.eager.report.peak_live_instances as f64;
    let detail = format!(
        "throughput lazy/eager = {tp:.2} (need >= 5), peak live lazy/eager = {live:.3} (need <= 0.2); eager {:.0} ev/s, lazy {:.0} ev/s, {} matches",
        p.eager.report.throughput,
        p.lazy.report.throughput,
        p.lazy.matches.len()
    );
    ensure(tp >= 5.0 && live <= 0.2, detail.clone())?;
    Ok(detail)
}

fn ac5() -> Check {
    let mut adv = Vec::new();
    for ratio in [1.0, 10.0, 100.0] {
        adv.push((ratio, seq3_pair(ratio, 50_000, 43)?.advantage()));
    }
    let detail = adv
        .iter()
        .map(|(r, a)| format!("1:{r}: {a:.2}"))
        .collect::<Vec<_>>()
        .join(", ");
    let monotone = adv.windows(2).all(|w| w[0].1 <= w[1].1);
    ensure(monotone && adv[0].1 >= 0.5, format!("lazy/eager throughput {detail} (need non-increasing toward 1:1, >= 0.5 at 1:1)"))?;
    Ok(format!("lazy/eager throughput {detail}"))
}

fn ac6() -> Check {
    let text = "PATTERN SEQ(A a, NOT(B b), C c, D d, E e)
        WHERE { a.price < c.price AND d.price > a.price AND e.price > c.price AND b.price > a.price }
        WITHIN 500 msec";
    let r = rates(&[("A", 10.0), ("B", 100.0), ("C", 2.0), ("D", 5.0), ("E", 20.0)]);
    let spec = StreamSpec::new(&[("A", 10.0), ("B", 100.0), ("C", 2.0), ("D", 5.0), ("E", 20.0)], 40_000, 47);
    let events = generate_stream(&spec).map_err(|e| e.to_string())?;
    let chains = load_pattern(text, None).map_err(|e| e.to_string())?;
    let run = |mode: Mode| execute(&chains, &events, &RunConfig::new(mode, Some(r.clone()))).map_err(|e| e.to_string());
    let pp = run(Mode::Lazy)?;
    let fc = run(Mode::LazyFc)?;
    ensure(pp.matches == fc.matches, "match sets differ")?;
    let (p, f) = (pp.counters.predicate_evaluations, fc.counters.predicate_evaluations);
    let detail = format!("predicate evaluations FC {f} vs PP {p} (need FC <= PP), {} matches", fc.matches.len());
    ensure(f <= p, detail.clone())?;
    Ok(detail)
}

/// `a`, the given b events (ts 2.., `g` from `groups`), then `c`.
fn grouped_stream(groups: &[i64]) -> Vec<Arc<Event64>> {
    let mut ev = vec![Arc::new(Event64::new("A", 1, 0))];
    for (i, g) in groups.iter().enumerate() {
        ev.push(Arc::new(Event64::new("B", i as i64 + 2, i as u64 + 1).with_num("g", *g as f64)));
    }
    let n = ev.len() as u64;
    ev.push(Arc::new(Event64::new("C", n as i64 + 1, n)));
    ev
}

fn ac7() -> Check {
    let grouped = load_pattern("PATTERN SEQ(A a, B+ b[], C c) WITHIN 1 hour GROUPBY b.g", None).map_err(|e| e.to_string())?;
    let r = rates(&[("A", 1.0), ("B", 10.0), ("C", 1.0)]);
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let mut total = 0;
    for _ in 0..20 {
        let n = rng.random_range(1..=12);
        let groups: Vec<i64> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let ev = grouped_stream(&groups);
        let mut sizes: BTreeMap<i64, u32> = BTreeMap::new();
        for g in &groups {
            *sizes.entry(*g).or_default() += 1;
        }
        let expected: u64 = sizes.values().map(|&m| (1u64 << m) - 1).sum();
        for mode in [Mode::Eager, Mode::Lazy] {
            let nfa = build_for_mode(&grouped, mode, Some(&r)).map_err(|e| e.to_string())?;
            let found = Runtime::new(&nfa).run(ev.iter().cloned()).map_err(|e| e.to_string())?;
            ensure(found.len() as u64 == expected, format!("{mode}: {} subsets, expected {expected}", found.len()))?;
            for m in &found {
                let bs = &m.bindings.iter().find(|(r, _)| r == "b").ok_or("no b binding")?.1;
                let g0 = bs[0].attr("g");
                ensure(bs.iter().all(|e| e.attr("g") == g0), format!("{mode}: mixed-group subset"))?;
            }
        }
        total += expected;
    }

    // ten groups of two, subsets of at most two events
    let groups: Vec<i64> = (0..20).map(|i| i % 10).collect();
    let ev = grouped_stream(&groups);
    let mut subsets = Vec::new();
    for text in [
        "PATTERN SEQ(A a, B{1,2} b[], C c) WITHIN 1 hour GROUPBY b.g",
        "PATTERN SEQ(A a, B{1,2} b[], C c) WITHIN 1 hour",
    ] {
        let cs = load_pattern(text, None).map_err(|e| e.to_string())?;
        let nfa = build_for_mode(&cs, Mode::Lazy, Some(&r)).map_err(|e| e.to_string())?;
        let mut rt = Runtime::new(&nfa);
        rt.run(ev.iter().cloned()).map_err(|e| e.to_string())?;
        subsets.push(rt.counters().subsets);
    }
    ensure(subsets[0] < subsets[1], format!("grouped {} vs ungrouped {} subsets", subsets[0], subsets[1]))?;
    Ok(format!(
        "20 random streams: {total} homogeneous subsets, counts equal sum(2^|g| - 1); k=10: grouped {} < ungrouped {} subsets",
        subsets[0], subsets[1]
    ))
}

fn ac8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    let (mut searches, mut runs) = (0u64, 0);
    for i in 0..100 {
        let kind = if i % 2 == 0 { "seq" } else { "not-fc" };
        let case = difftest::generate_kind(&mut rng, 25, kind);
        let chains = load_pattern(&case.pattern, None).map_err(|e| e.to_string())?;
        let c = &chains[0];
        let negs: Vec<EventType> = c.negations.iter().map(|h| h.etype.clone()).collect();
        for order in permutations(&c.positive_types()) {
            let mut full = order.clone();
            full.extend(negs.iter().cloned());
            for s in [NegationStrategy::PostProcess, NegationStrategy::FirstChance] {
                let nfa = build_lazy_chain(c, &full, s).map_err(|e| e.to_string())?;
                let mut rt = Runtime::with_audit(&nfa);
                rt.run(case.events.iter().cloned()).map_err(|e| e.to_string())?;
                let k = rt.counters();
                ensure(k.audit_mismatches == 0, format!("case {i}: {} mismatching searches\n{}", k.audit_mismatches, case.pattern))?;
                searches += k.audit_searches;
                runs += 1;
            }
        }
    }
    ensure(searches > 0, "no buffer searches were audited")?;
    Ok(format!("100 sequence cases, {runs} lazy runs, {searches} audited searches, 0 mismatches"))
}

fn ac9() -> Check {
    let spec = StreamSpec::new(&[("A", 50.0), ("B", 50.0), ("C", 5.0)], 20_000, 61);
    let mut csvs = Vec::new();
    for _ in 0..2 {
        let mut buf = Vec::new();
        csv_io::write_events(&mut buf, &generate_stream(&spec).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        csvs.push(buf);
    }
    ensure(csvs[0] == csvs[1], "generated CSV differs")?;
    let events = csv_io::read_events(csvs[0].as_slice()).map_err(|e| e.to_string())?;
    let chains = load_pattern(
        "PATTERN SEQ(A a, B b, C c) WHERE { corr(a.history, c.history) > 0.5 AND b.price > a.price } WITHIN 400 msec",
        None,
    )
    .map_err(|e| e.to_string())?;
    let r = rates(&[("A", 50.0), ("B", 50.0), ("C", 5.0)]);
    let mut matches = 0;
    for mode in Mode::ALL {
        let mut outs = Vec::new();
        for _ in 0..2 {
            let res = execute(&chains, &events, &RunConfig::new(mode, Some(r.clone()))).map_err(|e| e.to_string())?;
            let mut file = Vec::new();
            write_matches(&mut file, &res.matches).map_err(|e| e.to_string())?;
            outs.push((file, res.counters));
        }
        ensure(outs[0].0 == outs[1].0, format!("{mode}: match files differ"))?;
        ensure(outs[0].1 == outs[1].1, format!("{mode}: counters differ"))?;
        matches = outs[0].0.iter().filter(|&&b| b == b'\n').count();
    }
    Ok(format!("4 modes x 2 runs: identical match files ({matches} matches) and counters"))
}

fn main() {
    let checks: [(&str, &str, Duration, fn() -> Check); 9] = [
        ("AC1", "golden examples", Duration::from_secs(1), ac1),
        ("AC2", "differential suite", Duration::from_secs(300), ac2),
        ("AC3", "structural counts", Duration::from_secs(10), ac3),
        ("AC4", "lazy vs eager at 1:100", Duration::from_secs(120), ac4),
        ("AC5", "ratio sweep", Duration::from_secs(300), ac5),
        ("AC6", "first-chance vs post-processing", Duration::from_secs(60), ac6),
        ("AC7", "group-by subsets", Duration::from_secs(60), ac7),
        ("AC8", "shared buffer equivalence", Duration::from_secs(120), ac8),
        ("AC9", "determinism", Duration::from_secs(120), ac9),
    ];
    let mut failed = 0;
    for (id, name, limit, check) in checks {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if took <= limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{id} {} {name}: {detail} ({:.2}s, limit {}s)",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
