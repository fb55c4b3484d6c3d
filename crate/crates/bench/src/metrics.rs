//! Run metrics and their JSON / long-CSV forms.

use std::io::Write;

use serde::Serialize;

use cep_core::Counters;

/// A counter with its per-event and per-match rates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rated {
    pub total: u64,
    pub per_event: f64,
    /// Absent when there were no matches.
    pub per_match: Option<f64>,
}

impl Rated {
    fn new(total: u64, events: u64, matches: u64) -> Self {
        Rated {
            total,
            per_event: if events == 0 { 0.0 } else { total as f64 / events as f64 },
            per_match: (matches > 0).then(|| total as f64 / matches as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemoryOps {
    pub instance_create: Rated,
    pub instance_retire: Rated,
    pub buffer_insert: Rated,
    pub buffer_search: Rated,
    pub buffer_remove: Rated,
    pub total: Rated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub mode: String,
    pub events_processed: u64,
    /// Seconds spent in the step loop (median over timed runs).
    pub wall_time: f64,
    /// Events per second.
    pub throughput: f64,
    pub matches: u64,
    pub peak_live_instances: u64,
    pub peak_buffered: u64,
    pub predicate_evaluations: Rated,
    pub memory_ops: MemoryOps,
    pub subsets: u64,
    /// Peak resident set size of the process in KiB, where the platform
    /// reports it.
    pub peak_rss_kib: Option<u64>,
}

impl MetricsReport {
    pub fn new(mode: &str, c: &Counters, wall_time: f64) -> Self {
        let (ev, m) = (c.events, c.matches);
        let mem = c.instance_create + c.instance_retire + c.buffer_insert + c.buffer_search + c.buffer_remove;
        MetricsReport {
            mode: mode.to_string(),
            events_processed: ev,
            wall_time,
            throughput: if wall_time > 0.0 { ev as f64 / wall_time } else { f64::INFINITY },
            matches: m,
            peak_live_instances: c.peak_live_instances,
            peak_buffered: c.peak_buffered,
            predicate_evaluations: Rated::new(c.predicate_evaluations, ev, m),
            memory_ops: MemoryOps {
                instance_create: Rated::new(c.instance_create, ev, m),
                instance_retire: Rated::new(c.instance_retire, ev, m),
                buffer_insert: Rated::new(c.buffer_insert, ev, m),
                buffer_search: Rated::new(c.buffer_search, ev, m),
                buffer_remove: Rated::new(c.buffer_remove, ev, m),
                total: Rated::new(mem, ev, m),
            },
            subsets: c.subsets,
            peak_rss_kib: peak_rss_kib(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `(metric, value)` pairs in report order, flattened.
    pub fn flat(&self) -> Vec<(String, f64)> {
        let mut out = vec![
            ("events_processed".to_string(), self.events_processed as f64),
            ("wall_time".into(), self.wall_time),
            ("throughput".into(), self.throughput),
            ("matches".into(), self.matches as f64),
            ("peak_live_instances".into(), self.peak_live_instances as f64),
            ("peak_buffered".into(), self.peak_buffered as f64),
        ];
        let mut rated = |name: &str, r: &Rated| {
            out.push((name.to_string(), r.total as f64));
            out.push((format!("{name}_per_event"), r.per_event));
            if let Some(pm) = r.per_match {
                out.push((format!("{name}_per_match"), pm));
            }
        };
        rated("predicate_evaluations", &self.predicate_evaluations);
        let m = &self.memory_ops;
        rated("instance_create", &m.instance_create);
        rated("instance_retire", &m.instance_retire);
        rated("buffer_insert", &m.buffer_insert);
        rated("buffer_search", &m.buffer_search);
        rated("buffer_remove", &m.buffer_remove);
        rated("memory_ops", &m.total);
        out.push(("subsets".into(), self.subsets as f64));
        if let Some(kib) = self.peak_rss_kib {
            out.push(("peak_rss_kib".into(), kib as f64));
        }
        out
    }
}

/// Writes reports as long-format CSV rows `mode,metric,x,value`.
pub fn write_long_csv<W: Write>(out: W, rows: &[(String, &MetricsReport)]) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["mode", "metric", "x", "value"])?;
    for (x, r) in rows {
        for (metric, v) in r.flat() {
            w.write_record([r.mode.as_str(), metric.as_str(), x.as_str(), v.to_string().as_str()])?;
        }
    }
    w.flush()
}

#[cfg(target_os = "linux")]
fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

#[cfg(not(target_os = "linux"))]
fn peak_rss_kib() -> Option<u64> {
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_divide_by_events_and_matches() {
        let c = Counters {
            events: 10,
            matches: 0,
            predicate_evaluations: 25,
            ..Counters::default()
        };
        let r = MetricsReport::new("eager", &c, 0.5);
        assert_eq!(r.predicate_evaluations.per_event, 2.5);
        assert_eq!(r.predicate_evaluations.per_match, None);
        assert_eq!(r.throughput, 20.0);
        let json = r.to_json();
        let keys: Vec<usize> = ["\"mode\"", "\"events_processed\"", "\"wall_time\"", "\"throughput\""]
            .iter()
            .map(|k| json.find(k).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn long_csv_has_one_row_per_metric() {
        let c = Counters {
            events: 4,
            matches: 2,
            ..Counters::default()
        };
        let r = MetricsReport::new("lazy", &c, 1.0);
        let mut buf = Vec::new();
        write_long_csv(&mut buf, &[("100".into(), &r)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("mode,metric,x,value\n"));
        assert!(text.contains("lazy,matches,100,2\n"));
        assert_eq!(text.lines().count(), 1 + r.flat().len());
    }
}
