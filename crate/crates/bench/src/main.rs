use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cep_bench::{
    csv_io, execute, generate_stream, load_pattern, measure_rates, read_rates, write_long_csv, write_matches,
    BenchError, RunConfig, StreamSpec,
};
use cep_core::{difftest, parse_duration, Mode};

/// Pattern detection over event streams with eager and lazy automata.
#[derive(Parser)]
#[command(name = "cep", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a pattern over a stream and report matches and metrics.
    Run(RunArgs),
    /// Write a synthetic stream as CSV.
    Gen {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare every construction against the brute-force oracle on random
    /// cases.
    Difftest {
        #[arg(long, default_value_t = 500)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 25)]
        max_events: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    pattern: PathBuf,
    /// Event CSV file.
    #[arg(long, group = "source", required = true)]
    input: Option<PathBuf>,
    /// Stream spec (JSON) to generate the input from.
    #[arg(long, group = "source")]
    generate: Option<PathBuf>,
    /// eager, lazy (lazy-pp), lazy-fc or multi.
    #[arg(long)]
    mode: Mode,
    /// Overrides the pattern's WITHIN clause, e.g. `30s` or `1 hour`.
    #[arg(long)]
    window: Option<String>,
    /// JSON object of per-type arrival rates.
    #[arg(long, conflicts_with = "measure_rates")]
    rates: Option<PathBuf>,
    /// Measure rates over the first N events (default when --rates is absent: 1000).
    #[arg(long)]
    measure_rates: Option<usize>,
    /// Overrides the seed of a --generate spec.
    #[arg(long)]
    seed: Option<u64>,
    /// Report each canonical match once.
    #[arg(long)]
    dedup: bool,
    /// Timed runs after one warm-up run; the median time is reported.
    #[arg(long, default_value_t = 1)]
    repeat: usize,
    #[arg(long)]
    matches_out: Option<PathBuf>,
    /// Metrics JSON; printed to stdout when absent.
    #[arg(long)]
    metrics_out: Option<PathBuf>,
    /// Metrics as long-format CSV (`mode,metric,x,value`).
    #[arg(long)]
    metrics_csv: Option<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>, BenchError> {
    File::create(path).map(BufWriter::new).map_err(BenchError::io(path))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, BenchError> {
    let text = std::fs::read_to_string(path).map_err(BenchError::io(path))?;
    serde_json::from_str(&text).map_err(|source| BenchError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn run(args: RunArgs) -> Result<(), BenchError> {
    let text = std::fs::read_to_string(&args.pattern).map_err(BenchError::io(&args.pattern))?;
    let window = args.window.as_deref().map(parse_duration).transpose()?;
    let chains = load_pattern(&text, window)?;

    let events = match (&args.input, &args.generate) {
        (Some(p), _) => csv_io::read_events(BufReader::new(File::open(p).map_err(BenchError::io(p))?))?,
        (None, Some(p)) => {
            let mut spec: StreamSpec = read_json(p)?;
            if let Some(s) = args.seed {
                spec.seed = s;
            }
            generate_stream(&spec)?
        }
        (None, None) => unreachable!("clap requires a source"),
    };

    let rates = if !args.mode.needs_rates() {
        None
    } else if let Some(p) = &args.rates {
        Some(read_rates(p)?)
    } else {
        let wanted: Vec<_> = chains.iter().flat_map(|c| c.all_types()).collect();
        Some(measure_rates(&events, args.measure_rates.unwrap_or(1000), &wanted))
    };

    let mut cfg = RunConfig::new(args.mode, rates);
    cfg.dedup = args.dedup;
    cfg.repeat = args.repeat;
    let result = execute(&chains, &events, &cfg)?;

    if let Some(p) = &args.matches_out {
        write_matches(create(p)?, &result.matches).map_err(BenchError::io(p))?;
    }
    let json = result.report.to_json();
    match &args.metrics_out {
        Some(p) => create(p)?.write_all(json.as_bytes()).map_err(BenchError::io(p))?,
        None => print!("{json}"),
    }
    if let Some(p) = &args.metrics_csv {
        let x = chains[0].window.millis().to_string();
        write_long_csv(create(p)?, &[(x, &result.report)]).map_err(BenchError::io(p))?;
    }
    eprintln!(
        "{}: {} events, {} matches, {:.0} events/s",
        args.mode,
        result.report.events_processed,
        result.matches.len(),
        result.report.throughput
    );
    Ok(())
}

fn gen(spec: &Path, out: &Path) -> Result<(), BenchError> {
    let spec: StreamSpec = read_json(spec)?;
    let events = generate_stream(&spec)?;
    csv_io::write_events(create(out)?, &events)?;
    eprintln!("wrote {} events to {}", events.len(), out.display());
    Ok(())
}

/// Returns whether a divergence was found.
fn diff(cases: usize, seed: u64, max_events: usize) -> Result<bool, BenchError> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (mut runs, mut matches) = (0, 0);
    let mut features = std::collections::BTreeMap::new();
    for i in 0..cases {
        let case = difftest::generate(&mut rng, max_events);
        let (divs, r, m) = difftest::check_case(i, &case)?;
        if let Some(d) = divs.first() {
            println!("divergence\n{d}");
            return Ok(true);
        }
        runs += r;
        matches += m;
        for f in case.features {
            *features.entry(f).or_insert(0usize) += 1;
        }
    }
    println!("{cases} cases, {runs} automaton runs, {matches} oracle matches, no divergence");
    for (f, n) in features {
        println!("  {f}: {n}");
    }
    Ok(false)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Run(args) => run(args).map(|_| false),
        Cmd::Gen { spec, out } => gen(&spec, &out).map(|_| false),
        Cmd::Difftest {
            cases,
            seed,
            max_events,
        } => diff(cases, seed, max_events),
    };
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
