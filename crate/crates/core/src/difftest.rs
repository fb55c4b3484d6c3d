//! Randomized differential testing: small random patterns and streams are
//! matched by the brute-force oracle and by every automaton construction,
//! and the match multisets are compared.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eager::build_eager;
use crate::error::{BuildError, OracleError, PatternError, RuntimeError};
use crate::event::{Event, EventType};
use crate::lazy::{build_lazy_chain, build_multi_chain, merge_chains, NegationStrategy, Rates};
use crate::nfa::{MatchKey, Nfa, Runtime};
use crate::oracle::{oracle_matches, DEFAULT_CAP};
use crate::pattern::{parse_pattern, to_dnf, ChainPattern};

const POSITIVE: [&str; 4] = ["A", "B", "C", "D"];
const NEGATED: [&str; 2] = ["N", "M"];
const NOISE: &str = "Z";

/// Pattern features a generated case exercises.
pub const FEATURES: [&str; 8] = [
    "seq", "and", "partial", "not-pp", "not-fc", "kleene", "repeat", "or",
];

/// One generated case.
#[derive(Debug, Clone)]
pub struct Case {
    pub pattern: String,
    pub events: Vec<Arc<Event<f64>>>,
    pub rates: Rates,
    pub features: Vec<&'static str>,
}

/// Automaton configuration compared against the oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum Config {
    Eager,
    Lazy {
        order: Vec<EventType>,
        strategy: NegationStrategy,
    },
    Multi {
        strategy: NegationStrategy,
    },
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strat = |s: &NegationStrategy| match s {
            NegationStrategy::PostProcess => "pp",
            NegationStrategy::FirstChance => "fc",
        };
        match self {
            Config::Eager => f.write_str("eager"),
            Config::Lazy { order, strategy } => {
                let o: Vec<&str> = order.iter().map(|t| t.as_str()).collect();
                write!(f, "lazy-{}[{}]", strat(strategy), o.join(","))
            }
            Config::Multi { strategy } => write!(f, "multi-{}", strat(strategy)),
        }
    }
}

impl Config {
    fn build(&self, chains: &[ChainPattern], rates: &Rates) -> Result<Nfa, BuildError> {
        match self {
            Config::Eager => merge_chains(chains.iter().map(build_eager).collect::<Result<_, _>>()?),
            Config::Lazy { order, strategy } => build_lazy_chain(&chains[0], order, *strategy),
            Config::Multi { strategy } => build_multi_chain(chains, rates, *strategy),
        }
    }
}

/// A configuration whose matches differ from the oracle's, or whose shared
/// buffer disagreed with per-instance buffers.
#[derive(Debug, Clone)]
pub struct Divergence {
    pub case: usize,
    pub config: String,
    pub pattern: String,
    pub events: Vec<Arc<Event<f64>>>,
    pub expected: Vec<MatchKey>,
    pub got: Vec<MatchKey>,
    pub audit_mismatches: u64,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "case {} config {}", self.case, self.config)?;
        writeln!(f, "{}", self.pattern.trim_end())?;
        for e in &self.events {
            let x = e.attr("x").and_then(|v| v.as_num()).unwrap_or(0.0);
            let g = e.attr("g").and_then(|v| v.as_num()).unwrap_or(0.0);
            writeln!(f, "  {} ts={} seq={} x={x} g={g}", e.etype, e.ts, e.seq)?;
        }
        writeln!(f, "expected {:?}", self.expected)?;
        writeln!(f, "got      {:?}", self.got)?;
        write!(f, "audit mismatches {}", self.audit_mismatches)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DiffError {
    #[error("generated pattern does not parse: {0}\n{1}")]
    Pattern(PatternError, String),
    #[error("building {0} failed: {1}")]
    Build(String, BuildError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

#[derive(Debug, Default)]
pub struct Summary {
    pub cases: usize,
    /// Automaton runs compared against the oracle.
    pub runs: usize,
    pub matches: usize,
    pub features: BTreeMap<&'static str, usize>,
    pub divergences: Vec<Divergence>,
}

/// Generates a random case. Events carry numeric attributes `x` (0..=4) and
/// `g` (0..=2).
pub fn generate(rng: &mut impl Rng, max_events: usize) -> Case {
    let primary = *FEATURES.choose(rng).unwrap();
    generate_kind(rng, max_events, primary)
}

/// Like [`generate`], with the main feature fixed to one of [`FEATURES`].
pub fn generate_kind(rng: &mut impl Rng, max_events: usize, primary: &'static str) -> Case {
    assert!(FEATURES.contains(&primary), "unknown feature {primary}");
    let mut features = vec![primary];
    let k = rng.random_range(if primary == "not-fc" || primary == "partial" { 2 } else { 1 }..=4);
    let mut types: Vec<&str> = POSITIVE.to_vec();
    types.shuffle(rng);
    types.truncate(k);

    let iterated = match primary {
        "kleene" | "repeat" => Some(*types.choose(rng).unwrap()),
        _ => None,
    };
    let repeat = if primary == "repeat" {
        let lo = rng.random_range(1..=2);
        Some((lo, rng.random_range(lo..=3)))
    } else {
        None
    };
    let leaf = |t: &str| -> String {
        let r = t.to_lowercase();
        match (iterated == Some(t), repeat) {
            (true, Some((lo, hi))) => format!("{t}{{{lo},{hi}}} {r}[]"),
            (true, None) => format!("{t}+ {r}[]"),
            _ => format!("{t} {r}"),
        }
    };

    let mut negated: Vec<&str> = Vec::new();
    let root = if primary == "or" {
        let mut subs = Vec::new();
        for _ in 0..2 {
            let mut sub = types.clone();
            sub.shuffle(rng);
            sub.truncate(rng.random_range(1..=types.len()));
            subs.push(sub);
        }
        types.retain(|t| subs.iter().any(|s| s.contains(t)));
        let mut branches = subs.into_iter().map(|sub| {
            let leaves: Vec<String> = sub.iter().map(|t| leaf(t)).collect();
            tree(rng, leaves)
        });
        let (x, y) = (branches.next().unwrap(), branches.next().unwrap());
        format!("OR({x}, {y})")
    } else {
        let leaves: Vec<String> = types.iter().map(|t| leaf(t)).collect();
        let mut children = match primary {
            "seq" | "and" | "not-fc" => leaves,
            _ => split(rng, leaves),
        };
        let op = match primary {
            "seq" | "not-fc" => "SEQ",
            "and" => "AND",
            _ if rng.random_bool(0.5) => "SEQ",
            _ => "AND",
        };
        let nnot = match primary {
            "not-pp" | "not-fc" => rng.random_range(1..=2),
            "kleene" | "repeat" | "partial" if rng.random_bool(0.25) => 1,
            _ => 0,
        };
        for &n in NEGATED.iter().take(nnot) {
            let at = if primary == "not-fc" {
                rng.random_range(0..children.len())
            } else {
                rng.random_range(0..=children.len())
            };
            children.insert(at, format!("NOT({n} {})", n.to_lowercase()));
            negated.push(n);
        }
        if children.len() == 1 {
            children.pop().unwrap()
        } else {
            format!("{op}({})", children.join(", "))
        }
    };
    if !negated.is_empty() && primary != "not-pp" && primary != "not-fc" {
        features.push("not-pp");
    }

    let mut atoms = Vec::new();
    let plain: Vec<String> = types
        .iter()
        .filter(|&&t| iterated != Some(t))
        .map(|t| t.to_lowercase())
        .collect();
    for _ in 0..rng.random_range(0..=2) {
        if plain.len() >= 2 {
            let p = plain.choose(rng).unwrap();
            let q = plain.choose(rng).unwrap();
            if p != q {
                let op = ["<", "<=", "!=", ">="].choose(rng).unwrap();
                atoms.push(format!("{p}.x {op} {q}.x"));
            }
        } else if let Some(p) = plain.first() {
            atoms.push(format!("{p}.x <= {}", rng.random_range(1..=4)));
        }
    }
    if atoms.len() >= 2 && rng.random_bool(0.2) {
        let y = atoms.pop().unwrap();
        let x = atoms.pop().unwrap();
        atoms.push(format!("({x} OR {y})"));
    }
    for n in &negated {
        if rng.random_bool(0.5) {
            let n = n.to_lowercase();
            match plain.choose(rng) {
                Some(p) => atoms.push(format!("{n}.x >= {p}.x")),
                None => atoms.push(format!("{n}.x > 1")),
            }
        }
    }
    if let Some(t) = iterated {
        let b = t.to_lowercase();
        match rng.random_range(0..4) {
            0 => atoms.push(format!("{b}[i].x >= {}", rng.random_range(0..=2))),
            1 => atoms.push(format!("{b}[i].x >= {b}[i-1].x")),
            2 => atoms.push(format!("AVG({b}[i].x) <= 2.5")),
            _ => {
                if let Some(p) = plain.choose(rng) {
                    atoms.push(format!("{b}[i].x != {p}.x"));
                }
            }
        }
    }
    let window = rng.random_range(3..=15);
    let mut pattern = format!("PATTERN {root}\n");
    if !atoms.is_empty() {
        pattern.push_str(&format!("WHERE {{ {} }}\n", atoms.join(" AND ")));
    }
    pattern.push_str(&format!("WITHIN {window} ms\n"));
    if let Some(t) = iterated {
        if rng.random_bool(0.4) {
            pattern.push_str(&format!("GROUPBY {}.g\n", t.to_lowercase()));
        }
    }

    let mut pool: Vec<&str> = types.clone();
    pool.extend(&negated);
    pool.push(NOISE);
    let weights: Vec<f64> = pool.iter().map(|_| rng.random_range(0.2..1.0)).collect();
    let rates: Rates = pool
        .iter()
        .map(|t| (EventType::from(*t), rng.random_range(0.5..10.0)))
        .collect();
    let total: f64 = weights.iter().sum();
    let n = rng.random_range(1..=max_events.max(1));
    let mut ts = rng.random_range(0..3);
    let mut events = Vec::with_capacity(n);
    for seq in 0..n {
        let mut pick = rng.random_range(0.0..total);
        let mut t = pool[pool.len() - 1];
        for (i, w) in weights.iter().enumerate() {
            if pick < *w {
                t = pool[i];
                break;
            }
            pick -= w;
        }
        events.push(Arc::new(
            Event::new(t, ts, seq as u64)
                .with_num("x", rng.random_range(0..=4) as f64)
                .with_num("g", rng.random_range(0..=2) as f64),
        ));
        ts += rng.random_range(0..=3);
    }
    Case {
        pattern,
        events,
        rates,
        features,
    }
}

fn split(rng: &mut (impl Rng + ?Sized), leaves: Vec<String>) -> Vec<String> {
    if leaves.len() < 2 {
        return leaves;
    }
    let mut groups: Vec<Vec<String>> = vec![Vec::new()];
    for (i, l) in leaves.into_iter().enumerate() {
        if i > 0 && rng.random_bool(0.5) {
            groups.push(Vec::new());
        }
        groups.last_mut().unwrap().push(l);
    }
    if groups.len() == 1 {
        let g = groups.pop().unwrap();
        let (x, y) = g.split_at(g.len() / 2);
        groups = vec![x.to_vec(), y.to_vec()];
    }
    groups.into_iter().map(|g| tree(rng, g)).collect()
}

/// Random series-parallel tree over the leaves.
fn tree(rng: &mut (impl Rng + ?Sized), leaves: Vec<String>) -> String {
    if leaves.len() == 1 {
        return leaves.into_iter().next().unwrap();
    }
    let op = if rng.random_bool(0.5) { "SEQ" } else { "AND" };
    let children = split(rng, leaves);
    format!("{op}({})", children.join(", "))
}

/// All configurations applicable to the branches.
pub fn configs(chains: &[ChainPattern]) -> Vec<Config> {
    let mut out = vec![Config::Eager];
    let strategies = [NegationStrategy::PostProcess, NegationStrategy::FirstChance];
    if chains.len() == 1 {
        let c = &chains[0];
        let negs: Vec<EventType> = c.negations.iter().map(|h| h.etype.clone()).collect();
        for perm in permutations(&c.positive_types()) {
            for s in strategies {
                let mut order = perm.clone();
                order.extend(negs.iter().cloned());
                out.push(Config::Lazy { order, strategy: s });
            }
        }
    }
    for s in strategies {
        out.push(Config::Multi { strategy: s });
    }
    out
}

fn permutations<T: Clone>(xs: &[T]) -> Vec<Vec<T>> {
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

/// Sorted match keys and audit mismatch count of one automaton run.
pub fn run_keys(nfa: &Nfa, events: &[Arc<Event<f64>>]) -> Result<(Vec<MatchKey>, u64), RuntimeError> {
    let mut rt = Runtime::with_audit(nfa);
    let mut keys: Vec<MatchKey> = rt.run(events.iter().cloned())?.iter().map(|m| m.key()).collect();
    keys.sort();
    Ok((keys, rt.counters().audit_mismatches))
}

fn oracle_keys(chains: &[ChainPattern], events: &[Arc<Event<f64>>]) -> Result<Vec<MatchKey>, OracleError> {
    let mut k = oracle_matches(chains, events, DEFAULT_CAP.max(events.len()))?;
    k.sort();
    Ok(k)
}

/// Compares every configuration on one case. Returns the divergences found
/// (with shrunk streams) and the number of runs and oracle matches.
pub fn check_case(index: usize, case: &Case) -> Result<(Vec<Divergence>, usize, usize), DiffError> {
    let ast = parse_pattern::<f64>(&case.pattern).map_err(|e| DiffError::Pattern(e, case.pattern.clone()))?;
    let chains = to_dnf(&ast).map_err(|e| DiffError::Pattern(e, case.pattern.clone()))?;
    let expected = oracle_keys(&chains, &case.events)?;
    let mut divergences = Vec::new();
    let mut runs = 0;
    for cfg in configs(&chains) {
        let nfa = match cfg.build(&chains, &case.rates) {
            Ok(n) => n,
            Err(BuildError::NegationAtEnd(_)) => continue,
            Err(e) => return Err(DiffError::Build(cfg.to_string(), e)),
        };
        runs += 1;
        let (got, audit) = run_keys(&nfa, &case.events)?;
        if got != expected || audit > 0 {
            let events = shrink(&chains, &nfa, case.events.clone())?;
            let expected = oracle_keys(&chains, &events)?;
            let (got, audit_mismatches) = run_keys(&nfa, &events)?;
            divergences.push(Divergence {
                case: index,
                config: cfg.to_string(),
                pattern: case.pattern.clone(),
                events,
                expected,
                got,
                audit_mismatches,
            });
        }
    }
    Ok((divergences, runs, expected.len()))
}

/// Greedily drops events while the automaton still disagrees with the oracle.
fn shrink(
    chains: &[ChainPattern],
    nfa: &Nfa,
    mut events: Vec<Arc<Event<f64>>>,
) -> Result<Vec<Arc<Event<f64>>>, DiffError> {
    let fails = |evs: &[Arc<Event<f64>>]| -> Result<bool, DiffError> {
        let (got, audit) = run_keys(nfa, evs)?;
        Ok(audit > 0 || got != oracle_keys(chains, evs)?)
    };
    let mut i = 0;
    while i < events.len() {
        let mut fewer = events.clone();
        fewer.remove(i);
        if fails(&fewer)? {
            events = fewer;
        } else {
            i += 1;
        }
    }
    Ok(events)
}

/// Runs `cases` random cases from `seed`.
pub fn run(cases: usize, seed: u64, max_events: usize) -> Result<Summary, DiffError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = Summary::default();
    for i in 0..cases {
        let case = generate(&mut rng, max_events);
        let (divs, runs, matches) = check_case(i, &case)?;
        summary.cases += 1;
        summary.runs += runs;
        summary.matches += matches;
        for f in &case.features {
            *summary.features.entry(f).or_default() += 1;
        }
        summary.divergences.extend(divs);
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_patterns_parse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let case = generate(&mut rng, 10);
            let ast = parse_pattern::<f64>(&case.pattern).unwrap_or_else(|e| panic!("{e}\n{}", case.pattern));
            to_dnf(&ast).unwrap_or_else(|e| panic!("{e}\n{}", case.pattern));
        }
    }

    #[test]
    fn permutations_are_complete() {
        let p = permutations(&[1, 2, 3]);
        assert_eq!(p.len(), 6);
        let mut q = p.clone();
        q.sort();
        q.dedup();
        assert_eq!(q.len(), 6);
    }

    #[test]
    fn small_run_has_no_divergence() {
        let s = run(60, 11, 12).unwrap();
        if let Some(d) = s.divergences.first() {
            panic!("{d}");
        }
        assert_eq!(s.cases, 60);
    }
}
