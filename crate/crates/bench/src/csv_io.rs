//! Event CSV format: `seq,ts,type,stock,region,price,history`, history as
//! semicolon-joined numbers.

use std::io::{Read, Write};
use std::sync::Arc;

use cep_core::{Event64, Value64};

use crate::error::BenchError;

pub const HEADER: [&str; 7] = ["seq", "ts", "type", "stock", "region", "price", "history"];

fn csv_err(line: u64) -> impl Fn(csv::Error) -> BenchError {
    move |e| BenchError::Csv {
        line,
        msg: e.to_string(),
    }
}

pub fn write_events<W: Write>(out: W, events: &[Arc<Event64>]) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER).map_err(csv_err(1))?;
    for (i, e) in events.iter().enumerate() {
        let text = |name: &str| e.attr(name).map(|v| v.to_string()).unwrap_or_default();
        w.write_record([
            e.seq.to_string(),
            e.ts.to_string(),
            e.etype.to_string(),
            text("stock"),
            text("region"),
            text("price"),
            text("history"),
        ])
        .map_err(csv_err(i as u64 + 2))?;
    }
    w.flush().map_err(|e| BenchError::Csv {
        line: events.len() as u64 + 1,
        msg: e.to_string(),
    })
}

pub fn read_events<R: Read>(input: R) -> Result<Vec<Arc<Event64>>, BenchError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(csv_err(1))?.clone();
    if header.iter().ne(HEADER) {
        return Err(BenchError::Csv {
            line: 1,
            msg: format!("expected header `{}`", HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(csv_err(line))?;
        let bad = |msg: String| BenchError::Csv { line, msg };
        let num = |field: &str, name: &str| -> Result<f64, BenchError> {
            field
                .trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("{name} `{field}` is not a number")))
        };
        let seq: u64 = rec[0].parse().map_err(|_| bad(format!("seq `{}` is not an integer", &rec[0])))?;
        let ts: i64 = rec[1].parse().map_err(|_| bad(format!("ts `{}` is not an integer", &rec[1])))?;
        if rec[2].is_empty() {
            return Err(bad("empty event type".into()));
        }
        let mut e = Event64::new(&rec[2], ts, seq)
            .with_str("stock", &rec[3])
            .with_str("region", &rec[4]);
        if !rec[5].is_empty() {
            e = e.with_num("price", num(&rec[5], "price")?);
        }
        let history: Vec<f64> = if rec[6].is_empty() {
            Vec::new()
        } else {
            rec[6].split(';').map(|x| num(x, "history entry")).collect::<Result<_, _>>()?
        };
        e.attrs.insert("history".into(), Value64::List(history.into()));
        out.push(Arc::new(e));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{generate_stream, StreamSpec};

    #[test]
    fn round_trip_is_exact() {
        let ev = generate_stream(&StreamSpec::new(&[("A", 2.0), ("B", 1.0)], 200, 4)).unwrap();
        let mut buf = Vec::new();
        write_events(&mut buf, &ev).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("seq,ts,type,stock,region,price,history\n"));
        assert!(!text.contains('\r'));
        let back = read_events(buf.as_slice()).unwrap();
        assert_eq!(back, ev);
        let mut again = Vec::new();
        write_events(&mut again, &back).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn malformed_rows_report_their_line() {
        let text = "seq,ts,type,stock,region,price,history\n0,1,A,A1,A,2.5,1;2\n1,x,A,A1,A,2.5,1\n";
        match read_events(text.as_bytes()) {
            Err(BenchError::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(read_events("a,b\n".as_bytes()).is_err());
    }
}
