//! Building and timing one automaton over one stream.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use cep_core::{build_for_mode, parse_pattern, to_dnf, Chain64, Event64, EventType, MatchKey, Mode, Rates, Runtime, Window};

use crate::error::BenchError;
use crate::metrics::MetricsReport;

/// Parses a pattern and normalizes it, optionally replacing its window.
pub fn load_pattern(text: &str, window: Option<Window>) -> Result<Vec<Chain64>, BenchError> {
    let mut ast = parse_pattern::<f64>(text)?;
    if let Some(w) = window {
        ast.window = w;
    }
    Ok(to_dnf(&ast)?)
}

/// Reads a JSON object mapping type names to rates.
pub fn read_rates(path: &Path) -> Result<Rates, BenchError> {
    let text = std::fs::read_to_string(path).map_err(BenchError::io(path))?;
    let raw: BTreeMap<String, f64> = serde_json::from_str(&text).map_err(|source| BenchError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rates = Rates::new();
    for (t, r) in raw {
        if !(r.is_finite() && r > 0.0) {
            return Err(BenchError::Rates(format!("rate of {t} must be positive, got {r}")));
        }
        let t = EventType::new(&t).map_err(|e| BenchError::Rates(e.to_string()))?;
        rates.insert(t, r);
    }
    Ok(rates)
}

/// Rates (per simulated second) counted over the first `n` events. Types of
/// `wanted` that do not occur get half an occurrence, ranking them rarest.
pub fn measure_rates(events: &[Arc<Event64>], n: usize, wanted: &[EventType]) -> Rates {
    let prefix = &events[..n.min(events.len())];
    let span_ms = match (prefix.first(), prefix.last()) {
        (Some(a), Some(b)) => (b.ts - a.ts).max(1),
        _ => 1,
    };
    let secs = span_ms as f64 / 1000.0;
    let mut counts: BTreeMap<EventType, f64> = BTreeMap::new();
    for e in prefix {
        *counts.entry(e.etype.clone()).or_default() += 1.0;
    }
    for t in wanted {
        counts.entry(t.clone()).or_insert(0.5);
    }
    counts.into_iter().map(|(t, c)| (t, c / secs)).collect()
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub rates: Option<Rates>,
    /// Keep one copy of matches with equal canonical keys.
    pub dedup: bool,
    /// Timed runs; with more than one, a discarded warm-up run comes first
    /// and the median wall time is reported.
    pub repeat: usize,
}

impl RunConfig {
    pub fn new(mode: Mode, rates: Option<Rates>) -> Self {
        RunConfig {
            mode,
            rates,
            dedup: false,
            repeat: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// Canonical keys, sorted.
    pub matches: Vec<MatchKey>,
    pub report: MetricsReport,
    pub counters: cep_core::Counters,
}

/// Builds the automaton for `cfg.mode` and runs it over `events`.
pub fn execute(chains: &[Chain64], events: &[Arc<Event64>], cfg: &RunConfig) -> Result<RunResult, BenchError> {
    let nfa = build_for_mode(chains, cfg.mode, cfg.rates.as_ref())?;
    let once = || -> Result<(Vec<MatchKey>, cep_core::Counters, f64), BenchError> {
        let mut rt = Runtime::new(&nfa);
        let mut found = Vec::new();
        let start = Instant::now();
        for e in events {
            found.extend(rt.step(e.clone())?);
        }
        found.extend(rt.flush()?);
        let wall = start.elapsed().as_secs_f64();
        let keys = found.iter().map(|m| m.key()).collect();
        Ok((keys, rt.counters().clone(), wall))
    };
    let runs = cfg.repeat.max(1);
    if runs > 1 {
        once()?;
    }
    let mut times = Vec::with_capacity(runs);
    let mut last = None;
    for _ in 0..runs {
        let (keys, counters, wall) = once()?;
        times.push(wall);
        last = Some((keys, counters));
    }
    let (mut matches, counters) = last.expect("at least one run");
    times.sort_by(f64::total_cmp);
    let wall = times[times.len() / 2];
    matches.sort();
    if cfg.dedup {
        matches.dedup();
    }
    Ok(RunResult {
        report: MetricsReport::new(cfg.mode.name(), &counters, wall),
        matches,
        counters,
    })
}

/// One line per match: `role=seq@ts` entries separated by spaces.
pub fn write_matches<W: Write>(mut out: W, matches: &[MatchKey]) -> std::io::Result<()> {
    for m in matches {
        let line: Vec<String> = m.iter().map(|(r, ts, seq)| format!("{r}={seq}@{ts}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    out.flush()
}
