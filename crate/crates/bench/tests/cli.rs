use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cep")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SPEC: &str = r#"{ "rates": { "A": 20, "B": 20, "C": 2 }, "count": 3000, "seed": 7 }"#;
const PATTERN: &str = "PATTERN SEQ(A a, B b, C c) WHERE { a.price < c.price } WITHIN 500 msec";

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", SPEC);
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    for out in [&out1, &out2] {
        let o = cep(&["gen", "--spec", &spec, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = fs::read(&out1).unwrap();
    assert_eq!(a, fs::read(&out2).unwrap());
    assert!(a.starts_with(b"seq,ts,type,stock,region,price,history\n"));
}

#[test]
fn modes_write_identical_match_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", SPEC);
    let pattern = write(dir.path(), "p.txt", PATTERN);
    let csv = dir.path().join("s.csv");
    assert!(cep(&["gen", "--spec", &spec, "--out", csv.to_str().unwrap()]).status.success());
    let rates = write(dir.path(), "rates.json", r#"{ "A": 20, "B": 20, "C": 2 }"#);
    let mut files = Vec::new();
    for mode in ["eager", "lazy", "lazy-fc", "multi"] {
        let m = dir.path().join(format!("{mode}.txt"));
        let j = dir.path().join(format!("{mode}.json"));
        let o = cep(&[
            "run", "--pattern", &pattern, "--input", csv.to_str().unwrap(), "--mode", mode, "--rates", &rates,
            "--matches-out", m.to_str().unwrap(), "--metrics-out", j.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&j).unwrap()).unwrap();
        assert_eq!(report["mode"], mode.trim_end_matches("-pp"));
        assert_eq!(report["events_processed"], 3000);
        files.push(fs::read(&m).unwrap());
    }
    assert!(!files[0].is_empty());
    assert!(files.iter().all(|f| *f == files[0]));
}

#[test]
fn generate_source_and_long_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", SPEC);
    let pattern = write(dir.path(), "p.txt", PATTERN);
    let long = dir.path().join("m.csv");
    let o = cep(&[
        "run", "--pattern", &pattern, "--generate", &spec, "--mode", "lazy", "--measure-rates", "500",
        "--window", "1s", "--seed", "3", "--metrics-csv", long.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(json["throughput"].as_f64().unwrap() > 0.0);
    let text = fs::read_to_string(long).unwrap();
    assert!(text.starts_with("mode,metric,x,value\n"));
    assert!(text.contains("lazy,events_processed,1000,3000\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", SPEC);
    let trailing = write(dir.path(), "neg.txt", "PATTERN SEQ(A a, B b, NOT(C c)) WITHIN 1 sec");
    let o = cep(&["run", "--pattern", &trailing, "--generate", &spec, "--mode", "lazy-fc"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("post-processing"));

    let bad = write(dir.path(), "bad.txt", "PATTERN SEQ(A a, B b WITHIN 1 sec");
    assert_eq!(cep(&["run", "--pattern", &bad, "--generate", &spec, "--mode", "eager"]).status.code(), Some(2));

    let pattern = write(dir.path(), "p.txt", PATTERN);
    let data = write(dir.path(), "d.csv", "seq,ts,type,stock,region,price,history\n0,5,A,A1,A,1,\n1,4,B,B1,B,1,\n");
    assert_eq!(cep(&["run", "--pattern", &pattern, "--input", &data, "--mode", "eager"]).status.code(), Some(3));
    let data = write(dir.path(), "e.csv", "seq,ts,type,stock,region,price,history\n0,x,A,A1,A,1,\n");
    assert_eq!(cep(&["run", "--pattern", &pattern, "--input", &data, "--mode", "eager"]).status.code(), Some(3));

    assert_eq!(cep(&["run", "--pattern", &pattern, "--mode", "eager"]).status.code(), Some(2));
    assert_eq!(cep(&["run", "--pattern", &pattern, "--generate", &spec, "--mode", "fast"]).status.code(), Some(2));
}

#[test]
fn difftest_reports_no_divergence() {
    let o = cep(&["difftest", "--cases", "40", "--seed", "5", "--max-events", "12"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("40 cases"));
}
