//! Synthetic stock-quote streams.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use cep_core::{Event64, EventType};

use crate::error::BenchError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamSpec {
    /// Events per simulated second, per type.
    pub rates: BTreeMap<String, f64>,
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_start")]
    pub price_start: f64,
    #[serde(default = "default_step")]
    pub price_step: f64,
    /// Length of the `history` list carried by every event.
    #[serde(default = "default_history")]
    pub history: usize,
    /// Distinct stock identifiers per type.
    #[serde(default = "default_stocks")]
    pub stocks: usize,
}

fn default_start() -> f64 {
    100.0
}
fn default_step() -> f64 {
    1.0
}
fn default_history() -> usize {
    8
}
fn default_stocks() -> usize {
    10
}

impl StreamSpec {
    pub fn new(rates: &[(&str, f64)], count: usize, seed: u64) -> Self {
        StreamSpec {
            rates: rates.iter().map(|(t, r)| (t.to_string(), *r)).collect(),
            count,
            seed,
            price_start: default_start(),
            price_step: default_step(),
            history: default_history(),
            stocks: default_stocks(),
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.rates.is_empty() {
            return Err(BenchError::Spec("no event types".into()));
        }
        for (t, r) in &self.rates {
            EventType::new(t).map_err(|e| BenchError::Spec(e.to_string()))?;
            if !(r.is_finite() && *r > 0.0) {
                return Err(BenchError::Spec(format!("rate of {t} must be positive, got {r}")));
            }
        }
        if !(self.price_step.is_finite() && self.price_step >= 0.0) {
            return Err(BenchError::Spec(format!("price step must be non-negative, got {}", self.price_step)));
        }
        if self.stocks == 0 {
            return Err(BenchError::Spec("stocks must be at least 1".into()));
        }
        Ok(())
    }
}

/// Generates the stream: per-type exponential inter-arrival times merged in
/// time order, millisecond timestamps, sequence numbers from 0.
///
/// Every event has `stock` (e.g. `A3`), `region` (its type), `price` (a
/// random walk per stock) and `history` (the stock's last prices, oldest
/// first, ending with the current one).
pub fn generate_stream(spec: &StreamSpec) -> Result<Vec<Arc<Event64>>, BenchError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let types: Vec<(&String, Exp<f64>)> = spec
        .rates
        .iter()
        .map(|(t, r)| (t, Exp::new(*r).expect("validated rate")))
        .collect();
    let step = Normal::new(0.0, spec.price_step).expect("validated step");
    let mut next: Vec<f64> = types.iter().map(|(_, d)| d.sample(&mut rng)).collect();
    let mut walks: BTreeMap<String, VecDeque<f64>> = BTreeMap::new();
    let hist = spec.history.max(1);

    let mut out = Vec::with_capacity(spec.count);
    for seq in 0..spec.count {
        let (i, _) = next
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("at least one type");
        let at = next[i];
        next[i] += types[i].1.sample(&mut rng);
        let etype = types[i].0;
        let stock = format!("{etype}{}", rng.random_range(0..spec.stocks));
        let walk = walks.entry(stock.clone()).or_insert_with(|| {
            let mut p = spec.price_start;
            let mut w = VecDeque::with_capacity(hist + 1);
            for _ in 0..hist {
                p += step.sample(&mut rng);
                w.push_back(p);
            }
            w
        });
        let price = walk.back().copied().unwrap_or(spec.price_start) + step.sample(&mut rng);
        walk.push_back(price);
        while walk.len() > hist {
            walk.pop_front();
        }
        let history: Vec<f64> = walk.iter().copied().collect();
        let history = &history[history.len().saturating_sub(spec.history)..];
        out.push(Arc::new(
            Event64::new(etype.as_str(), (at * 1000.0).floor() as i64, seq as u64)
                .with_str("stock", &stock)
                .with_str("region", etype)
                .with_num("price", price)
                .with_list("history", history),
        ));
    }
    Ok(out)
}
