//! Batch CLI over the library: shift bounds, admissibility certificates,
//! witness search and re-verification, simultaneous-prime scans.
//!
//! Exit codes: 0 success/verified, 1 verification or admissibility
//! negative, 2 invalid input, 3 inconclusive (coprimality-only), 4 search
//! budget exhausted.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use totient_shift::admissibility::{
    build_family, check_admissible_coprimality, check_admissible_residue, scan_simultaneous_primes,
    AdmissibilityReport, LinearPolynomial, Method, PolynomialFamily, Verdict,
};
use totient_shift::kappa::{kappa, kappa_table, KappaRow};
use totient_shift::report::{kappa_rows_to_csv, kappa_rows_to_table, KappaRowOut, OutputEnvelope};
use totient_shift::witness::{stream_witnesses_with, PairStrategy, SearchBudget, WitnessRecord};
use totient_shift::Error;

#[derive(Parser)]
#[command(
    name = "totient-shift",
    version,
    about = "Shift bounds, admissibility certificates and exactly verified witnesses for totient coincidences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Embed elapsed milliseconds in the output envelope (off by default so
    /// identical arguments produce identical bytes).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the shift bound for a single d.
    Kappa(KappaArgs),
    /// Tabulate the shift bound over a range of d.
    Table(TableArgs),
    /// Certify admissibility of a polynomial family.
    Admissible(AdmissibleArgs),
    /// Search for witnesses and emit them as verified JSON.
    Witness(WitnessArgs),
    /// Re-verify a stored witness file from scratch.
    Verify(VerifyArgs),
    /// List n where several family members are simultaneously prime.
    Scan(ScanArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Args)]
struct KappaArgs {
    #[arg(long)]
    d: u64,
    #[arg(long, default_value_t = 50)]
    family_size: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Apostrophe thousands separators in the human-readable table.
    #[arg(long)]
    grouped: bool,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    from: u64,
    #[arg(long)]
    to: u64,
    #[arg(long, default_value_t = 50)]
    family_size: u64,
    /// Worker count; affects runtime only, never output bytes.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    grouped: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Residue,
    Coprimality,
    Both,
}

#[derive(Args)]
struct AdmissibleArgs {
    /// Build the family {(kd+1)x+1} for this d.
    #[arg(long, conflicts_with = "coeffs")]
    d: Option<u64>,
    #[arg(long, default_value_t = 50)]
    family_size: u64,
    /// Custom family as colon-separated a,b pairs, e.g. "1,0:1,1".
    #[arg(long)]
    coeffs: Option<String>,
    #[arg(long, value_enum, default_value_t = MethodArg::Residue)]
    method: MethodArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Argmax,
    ScanBest,
}

#[derive(Args)]
struct WitnessArgs {
    #[arg(long)]
    d: u64,
    #[arg(long)]
    l: u64,
    /// Fixed pair: larger index (requires --k2, conflicts with --strategy).
    #[arg(long, requires = "k2", conflicts_with = "strategy")]
    k1: Option<u64>,
    #[arg(long, requires = "k1")]
    k2: Option<u64>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    r_start: u64,
    #[arg(long, default_value_t = 50)]
    family_size: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the r-search candidate budget.
    #[arg(long)]
    max_candidates: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    file: PathBuf,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    d: u64,
    #[arg(long, default_value_t = 50)]
    family_size: u64,
    #[arg(long)]
    n_limit: u64,
    #[arg(long, default_value_t = 2)]
    min_hits: usize,
}

#[derive(Serialize)]
struct AdmissibleRow {
    method: String,
    verdict: String,
    obstruction_prime: Option<u64>,
    cert_p_of_one: Option<String>,
    cert_p_of_p_of_one: Option<String>,
    cert_gcd: Option<String>,
}

impl AdmissibleRow {
    fn from_report(report: &AdmissibilityReport) -> Self {
        let verdict = match report.verdict {
            Verdict::Admissible => "admissible",
            Verdict::NotAdmissible => "not_admissible",
            Verdict::Inconclusive => "inconclusive",
        };
        let method = match report.method {
            Method::Residue => "residue",
            Method::Coprimality => "coprimality",
            Method::Both => "both",
        };
        AdmissibleRow {
            method: method.to_string(),
            verdict: verdict.to_string(),
            obstruction_prime: report.obstruction_prime,
            cert_p_of_one: report.certificate.as_ref().map(|c| c.p_of_one.to_string()),
            cert_p_of_p_of_one: report
                .certificate
                .as_ref()
                .map(|c| c.p_of_p_of_one.to_string()),
            cert_gcd: report.certificate.as_ref().map(|c| c.gcd.to_string()),
        }
    }
}

#[derive(Serialize)]
struct ScanRow {
    n: u64,
    prime_indices: Vec<usize>,
    prime_values: Vec<u64>,
}

#[derive(Serialize)]
struct VerifyRow {
    index: usize,
    d: u64,
    l: u64,
    k1: u64,
    k2: u64,
    r: u64,
    ok: bool,
    error: Option<String>,
}

fn main() {
    let cli = Cli::parse();
    // Worker-count environment variable, read once at startup; a --jobs
    // flag overrides it.
    let env_jobs = std::env::var("TOTIENT_SHIFT_JOBS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1);
    let timings = cli.timings;
    let code = match dispatch(cli.command, env_jobs, timings) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    };
    std::process::exit(code);
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::Overflow(_) => 2,
        Error::Verification(_) => 1,
        Error::ResourceLimit(_) => 4,
    }
}

fn run_in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Error> {
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::InvalidArgument(format!("cannot write to stdout: {e}")))
        }
    }
}

fn elapsed_field(timings: bool, start: Instant) -> Option<u64> {
    timings.then(|| start.elapsed().as_millis() as u64)
}

fn dispatch(command: Command, env_jobs: Option<usize>, timings: bool) -> Result<i32, Error> {
    match command {
        Command::Kappa(args) => cmd_kappa(args, env_jobs, timings),
        Command::Table(args) => cmd_table(args, env_jobs, timings),
        Command::Admissible(args) => cmd_admissible(args, timings),
        Command::Witness(args) => cmd_witness(args, env_jobs, timings),
        Command::Verify(args) => cmd_verify(args, timings),
        Command::Scan(args) => cmd_scan(args, env_jobs, timings),
    }
}

fn render_kappa_rows(
    command: &str,
    parameters: BTreeMap<String, serde_json::Value>,
    rows: &[KappaRow],
    format: Format,
    grouped: bool,
    elapsed_ms: Option<u64>,
) -> String {
    let out_rows: Vec<KappaRowOut> = rows.iter().map(KappaRowOut::from).collect();
    match format {
        Format::Json => OutputEnvelope::new(command, parameters, out_rows)
            .with_elapsed(elapsed_ms)
            .to_json(),
        Format::Csv => kappa_rows_to_csv(&out_rows),
        Format::Table => kappa_rows_to_table(&out_rows, grouped),
    }
}

fn cmd_kappa(args: KappaArgs, env_jobs: Option<usize>, timings: bool) -> Result<i32, Error> {
    let start = Instant::now();
    let row = run_in_pool(env_jobs, || kappa(args.d, args.family_size))??;
    let mut params = BTreeMap::new();
    params.insert("d".into(), json!(args.d));
    params.insert("family_size".into(), json!(args.family_size));
    let text = render_kappa_rows(
        "kappa",
        params,
        std::slice::from_ref(&row),
        args.format,
        args.grouped,
        elapsed_field(timings, start),
    );
    emit(&text, None)?;
    Ok(0)
}

fn cmd_table(args: TableArgs, env_jobs: Option<usize>, timings: bool) -> Result<i32, Error> {
    let start = Instant::now();
    if args.jobs == Some(0) {
        return Err(Error::invalid("--jobs must be >= 1"));
    }
    let jobs = args.jobs.or(env_jobs);
    let rows = run_in_pool(jobs, || kappa_table(args.from, args.to, args.family_size))??;
    let mut params = BTreeMap::new();
    params.insert("from".into(), json!(args.from));
    params.insert("to".into(), json!(args.to));
    params.insert("family_size".into(), json!(args.family_size));
    let text = render_kappa_rows(
        "table",
        params,
        &rows,
        args.format,
        args.grouped,
        elapsed_field(timings, start),
    );
    emit(&text, args.out.as_deref())?;
    Ok(0)
}

fn parse_coeffs(arg: &str) -> Result<PolynomialFamily, Error> {
    let polys = arg
        .split(':')
        .map(|part| {
            let (a, b) = part
                .split_once(',')
                .ok_or_else(|| Error::invalid(format!("bad coefficient pair '{part}'")))?;
            let a: u64 = a
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad leading coefficient '{a}'")))?;
            let b: i64 = b
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad constant term '{b}'")))?;
            LinearPolynomial::new(a, b)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    PolynomialFamily::from_polys(polys)
}

fn cmd_admissible(args: AdmissibleArgs, timings: bool) -> Result<i32, Error> {
    let start = Instant::now();
    let fam = match (&args.coeffs, args.d) {
        (Some(coeffs), None) => parse_coeffs(coeffs)?,
        (None, Some(d)) => build_family(d, args.family_size)?,
        (None, None) => return Err(Error::invalid("pass either --d or --coeffs")),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };

    let mut rows = Vec::new();
    let mut residue_verdict = None;
    let mut coprimality_verdict = None;
    if matches!(args.method, MethodArg::Residue | MethodArg::Both) {
        let report = check_admissible_residue(&fam);
        residue_verdict = Some(report.verdict);
        rows.push(AdmissibleRow::from_report(&report));
    }
    if matches!(args.method, MethodArg::Coprimality | MethodArg::Both) {
        let report = check_admissible_coprimality(&fam)?;
        coprimality_verdict = Some(report.verdict);
        rows.push(AdmissibleRow::from_report(&report));
    }

    let mut params = BTreeMap::new();
    match (&args.coeffs, args.d) {
        (Some(coeffs), _) => {
            params.insert("coeffs".into(), json!(coeffs));
        }
        (None, Some(d)) => {
            params.insert("d".into(), json!(d));
            params.insert("family_size".into(), json!(args.family_size));
        }
        _ => unreachable!(),
    }
    params.insert(
        "method".into(),
        json!(match args.method {
            MethodArg::Residue => "residue",
            MethodArg::Coprimality => "coprimality",
            MethodArg::Both => "both",
        }),
    );
    let text = OutputEnvelope::new("admissible", params, rows)
        .with_elapsed(elapsed_field(timings, start))
        .to_json();
    emit(&text, None)?;

    let code = match (residue_verdict, coprimality_verdict) {
        (Some(Verdict::NotAdmissible), _) => 1,
        (Some(Verdict::Admissible), _) => 0,
        (None, Some(Verdict::Admissible)) => 0,
        (None, Some(Verdict::Inconclusive)) => 3,
        _ => 0,
    };
    Ok(code)
}

fn cmd_witness(args: WitnessArgs, env_jobs: Option<usize>, timings: bool) -> Result<i32, Error> {
    let start = Instant::now();
    let strategy = match (args.k1, args.k2, args.strategy) {
        (Some(k1), Some(k2), None) => PairStrategy::Fixed { k1, k2 },
        (None, None, Some(StrategyArg::ScanBest)) => PairStrategy::ScanBest,
        (None, None, Some(StrategyArg::Argmax)) | (None, None, None) => PairStrategy::Argmax,
        _ => unreachable!("clap requires/conflicts"),
    };
    let mut budget = SearchBudget::default();
    if let Some(cap) = args.max_candidates {
        if cap == 0 {
            return Err(Error::invalid("--max-candidates must be >= 1"));
        }
        budget.max_candidates = cap;
    }
    let witnesses = run_in_pool(env_jobs, || {
        stream_witnesses_with(
            args.d,
            args.l,
            args.count,
            strategy,
            args.family_size,
            args.r_start,
            &budget,
        )
    })??;
    let rows: Vec<WitnessRecord> = witnesses
        .iter()
        .map(|w| WitnessRecord::new(w, args.family_size, strategy))
        .collect();
    let mut params = BTreeMap::new();
    params.insert("d".into(), json!(args.d));
    params.insert("l".into(), json!(args.l));
    params.insert("family_size".into(), json!(args.family_size));
    params.insert("strategy".into(), json!(strategy.to_string()));
    params.insert("count".into(), json!(args.count));
    params.insert("r_start".into(), json!(args.r_start));
    let text = OutputEnvelope::new("witness", params, rows)
        .with_elapsed(elapsed_field(timings, start))
        .to_json();
    emit(&text, args.out.as_deref())?;
    Ok(0)
}

fn cmd_verify(args: VerifyArgs, timings: bool) -> Result<i32, Error> {
    let start = Instant::now();
    let data = std::fs::read_to_string(&args.file)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", args.file.display())))?;
    let envelope: OutputEnvelope<WitnessRecord> = serde_json::from_str(&data)
        .map_err(|e| Error::invalid(format!("not a witness envelope: {e}")))?;
    if envelope.rows.is_empty() {
        return Err(Error::invalid("witness file contains no rows"));
    }
    let mut rows = Vec::with_capacity(envelope.rows.len());
    let mut all_ok = true;
    for (index, record) in envelope.rows.iter().enumerate() {
        let result = record.verify();
        let ok = result.is_ok();
        all_ok &= ok;
        rows.push(VerifyRow {
            index,
            d: record.d,
            l: record.l,
            k1: record.pair.k1,
            k2: record.pair.k2,
            r: record.r,
            ok,
            error: result.err().map(|e| e.to_string()),
        });
    }
    let mut params = BTreeMap::new();
    params.insert("file".into(), json!(args.file.display().to_string()));
    let text = OutputEnvelope::new("verify", params, rows)
        .with_elapsed(elapsed_field(timings, start))
        .to_json();
    emit(&text, None)?;
    Ok(if all_ok { 0 } else { 1 })
}

fn cmd_scan(args: ScanArgs, env_jobs: Option<usize>, timings: bool) -> Result<i32, Error> {
    let start = Instant::now();
    let fam = build_family(args.d, args.family_size)?;
    let hits = run_in_pool(env_jobs, || {
        scan_simultaneous_primes(&fam, args.n_limit, args.min_hits)
    })??;
    let rows: Vec<ScanRow> = hits
        .into_iter()
        .map(|(n, prime_indices)| {
            let prime_values = prime_indices
                .iter()
                .map(|&i| fam.polys()[i].eval(n).expect("certified hit") as u64)
                .collect();
            ScanRow {
                n,
                prime_indices,
                prime_values,
            }
        })
        .collect();
    let mut params = BTreeMap::new();
    params.insert("d".into(), json!(args.d));
    params.insert("family_size".into(), json!(args.family_size));
    params.insert("n_limit".into(), json!(args.n_limit));
    params.insert("min_hits".into(), json!(args.min_hits));
    let text = OutputEnvelope::new("scan", params, rows)
        .with_elapsed(elapsed_field(timings, start))
        .to_json();
    emit(&text, None)?;
    Ok(0)
}
