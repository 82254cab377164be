use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use specdiff::generator::{DEFAULT_MAX_SIZE, DEFAULT_SEQ_PROBABILITY};
use specdiff::harness::{ImplFactory, DEFAULT_TRIAL_CAP};
use specdiff::report::{self, render_failure_table, FailureStats};
use specdiff::suite::{self, SuiteEntry};
use specdiff::{
    bench_trials_to_failure, gen_expr, parse_signature, validate_signature, Campaign, CampaignOptions, GenConfig, Rng,
    Signature, Ty,
};

#[derive(Parser, Debug)]
#[command(
    name = "specdiff",
    version,
    about = "Differential property-based testing of two implementations of a signature"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
struct SigSource {
    /// Bundled suite name (finite_set, bst_map, counter).
    #[arg(long)]
    suite: Option<String>,
    /// Path to a signature file.
    #[arg(long)]
    sig: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct GenArgs {
    /// Campaign seed.
    #[arg(long, env = "SPECDIFF_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_SIZE)]
    max_size: u64,
    /// Probability of generating `seq` in mutable signatures.
    #[arg(long, default_value_t = DEFAULT_SEQ_PROBABILITY)]
    seq_prob: f64,
}

impl GenArgs {
    fn config(&self) -> Result<GenConfig, String> {
        if !(0.0..=1.0).contains(&self.seq_prob) {
            return Err(format!("--seq-prob must lie in [0, 1], got {}", self.seq_prob));
        }
        Ok(GenConfig { max_size: self.max_size, seq_probability: self.seq_prob, seed: self.seed })
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compare two implementations on random expressions.
    Check {
        #[command(flatten)]
        source: SigSource,
        #[arg(long)]
        impl_a: String,
        #[arg(long)]
        impl_b: String,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[command(flatten)]
        gen: GenArgs,
        /// Write a JSON Lines report here (`-` for standard output).
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        stop_on_failure: bool,
        /// Report failing expressions as generated, without shrinking.
        #[arg(long)]
        no_shrink: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print random well-typed expressions.
    Sample {
        #[command(flatten)]
        source: SigSource,
        /// Target type, e.g. `bool`, `int list` or `t`.
        #[arg(long = "type")]
        ty: String,
        #[arg(long, default_value_t = 10)]
        count: u64,
        #[arg(long, default_value_t = 10)]
        size: u64,
        #[command(flatten)]
        gen: GenArgs,
    },
    /// Parse and validate a signature, printing its observable types.
    Validate {
        #[command(flatten)]
        source: SigSource,
    },
    /// Measure trials to first failure for every bug variant of a suite.
    Bench {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 1000)]
        runs: u64,
        #[arg(long, default_value_t = DEFAULT_TRIAL_CAP)]
        trial_cap: u64,
        #[command(flatten)]
        gen: GenArgs,
        /// Restrict to these bug variants (comma separated).
        #[arg(long, value_delimiter = ',')]
        bugs: Vec<String>,
        /// Write one JSON summary line per run here.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Summarize a JSON Lines report.
    Summarize { report: PathBuf },
}

/// Exit with a diagnostic and code 2.
struct Fatal(String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Fatal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load(source: &SigSource) -> Result<(Signature, Option<&'static SuiteEntry>), Fatal> {
    match (&source.suite, &source.sig) {
        (Some(name), _) => {
            let entry = suite::find_suite(name)?;
            Ok((entry.signature(), Some(entry)))
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))?;
            let sig = parse_signature(&text).map_err(|e| Fatal(format!("{}:{e}", path.display())))?;
            let entry = suite::find_suite(&sig.name).ok();
            Ok((sig, entry))
        }
        (None, None) => Err(Fatal("one of --suite or --sig is required".into())),
    }
}

fn run(command: Command) -> Result<u8, Fatal> {
    match command {
        Command::Check { source, impl_a, impl_b, trials, gen, report, stop_on_failure, no_shrink, jobs } => {
            let (sig, entry) = load(&source)?;
            let entry =
                entry.ok_or_else(|| Fatal(format!("no bundled implementations for signature `{}`", sig.name)))?;
            let campaign = Campaign::new(sig)?;
            let cfg = gen.config()?;
            // Fail early on unknown names.
            suite::get_implementation(entry.name, &impl_a)?;
            suite::get_implementation(entry.name, &impl_b)?;
            let make_a = || suite::get_implementation(entry.name, &impl_a).expect("checked above");
            let make_b = || suite::get_implementation(entry.name, &impl_b).expect("checked above");
            let opts = CampaignOptions { stop_on_failure, shrink: !no_shrink, jobs };
            let result = if jobs > 1 {
                campaign.run_parallel(&make_a, &make_b, trials, &cfg, &opts)
            } else {
                campaign.run(&mut *make_a(), &mut *make_b(), trials, &cfg, &opts)
            };

            let stdout = io::stdout();
            let mut out = stdout.lock();
            if let Some(path) = &report {
                if path.as_os_str() == "-" {
                    report::emit_campaign(&result, &mut out)?;
                } else {
                    let file = File::create(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))?;
                    report::emit_campaign(&result, BufWriter::new(file))?;
                }
            }
            // Human-readable output goes to stderr when the report occupies stdout.
            let human: &mut dyn Write =
                if report.as_deref().is_some_and(|p| p.as_os_str() == "-") { &mut io::stderr() } else { &mut out };
            writeln!(human, "{}: {} trials, seed {}", result.label, result.total_trials, result.seed)?;
            for f in &result.failures {
                let r = &f.record;
                writeln!(human, "FAIL trial {} at {}: {}", r.trial_index, r.observable_type, r.expr_text)?;
                writeln!(human, "  {impl_a}: {}", r.outcome_a.as_deref().unwrap_or(""))?;
                writeln!(human, "  {impl_b}: {}", r.outcome_b.as_deref().unwrap_or(""))?;
                writeln!(human, "  shrunk: {}", f.shrunk_text)?;
            }
            for r in result.records.iter().filter(|r| r.status == specdiff::TrialStatus::HarnessBug) {
                writeln!(human, "HARNESS BUG trial {}: {}", r.trial_index, r.expr_text)?;
                writeln!(human, "  {impl_a}: {}", r.outcome_a.as_deref().unwrap_or(""))?;
                writeln!(human, "  {impl_b}: {}", r.outcome_b.as_deref().unwrap_or(""))?;
            }
            if result.passed() {
                writeln!(human, "ok: all {} trials passed", result.total_trials)?;
                Ok(0)
            } else {
                let first = result.trials_to_first_failure.map_or_else(|| "-".to_string(), |n| n.to_string());
                writeln!(
                    human,
                    "FAILED: {} failures, {} harness bugs, first failure after {first} trials",
                    result.failures.len(),
                    result.harness_bugs
                )?;
                Ok(1)
            }
        }
        Command::Sample { source, ty, count, size, gen } => {
            let (sig, _) = load(&source)?;
            let report = validate_signature(&sig)?;
            let target = Ty::parse(&ty)?;
            if !target.is_abstract() && !report.observable.contains(&target) {
                let shown: Vec<String> = report.observable.iter().map(Ty::to_string).collect();
                return Err(Fatal(format!("`{target}` is not t or an observable type ({})", shown.join(", "))));
            }
            let cfg = gen.config()?;
            let mut rng = Rng::new(cfg.seed);
            let mut out = io::stdout().lock();
            for _ in 0..count {
                writeln!(out, "{}", gen_expr(&target, size, &sig, &cfg, &mut rng))?;
            }
            Ok(0)
        }
        Command::Validate { source } => {
            let (sig, _) = load(&source)?;
            let report = validate_signature(&sig)?;
            let shown: Vec<String> = report.observable.iter().map(Ty::to_string).collect();
            println!("{}: {} operations; observable types: {}", sig.name, sig.ops.len(), shown.join(", "));
            Ok(0)
        }
        Command::Bench { suite: name, runs, trial_cap, gen, bugs, output, jobs } => {
            if runs == 0 || trial_cap == 0 {
                return Err(Fatal("--runs and --trial-cap must be at least 1".into()));
            }
            let entry = suite::find_suite(&name)?;
            let campaign = Campaign::new(entry.signature())?;
            let cfg = gen.config()?;
            let variants: Vec<&str> = if bugs.is_empty() {
                entry.bug_variants.iter().map(|b| b.name).collect()
            } else {
                for b in &bugs {
                    suite::get_implementation(entry.name, b)?;
                }
                bugs.iter().map(String::as_str).collect()
            };
            let reference = entry.reference();
            let make_ref = || suite::get_implementation(entry.name, reference).expect("bundled reference");
            let mut columns = Vec::new();
            let mut lines = Vec::new();
            for bug in &variants {
                let make_bug = || suite::get_implementation(entry.name, bug).expect("checked variant");
                let stats = bench_trials_to_failure(
                    &campaign,
                    &make_ref as &ImplFactory<'_>,
                    &make_bug,
                    runs,
                    trial_cap,
                    &cfg,
                    jobs,
                );
                let label = format!("{}:{reference}~{bug}", entry.name);
                let hits: Vec<u64> = stats.runs.iter().filter_map(|r| r.trials_to_first_failure).collect();
                let fs = FailureStats::from_hits(&label, runs, &hits);
                columns.push((bug.to_string(), fs.min, fs.mean, fs.max, stats.detection_rate));
                if output.is_some() {
                    let mut buf = Vec::new();
                    report::emit_summaries(&label, &stats.runs, &mut buf)?;
                    lines.extend(buf);
                }
            }
            if let Some(path) = &output {
                fs::write(path, &lines).map_err(|e| Fatal(format!("{}: {e}", path.display())))?;
            }
            println!(
                "{}: {reference} vs bug variants, {runs} runs, trial cap {trial_cap}, seed {}",
                entry.name, cfg.seed
            );
            let table: Vec<_> = columns.iter().map(|(h, a, b, c, _)| (h.clone(), *a, *b, *c)).collect();
            print!("{}", render_failure_table(&table));
            let rates: Vec<String> = columns.iter().map(|(h, .., r)| format!("{h} {:.1}%", r * 100.0)).collect();
            println!("detected: {}", rates.join(", "));
            Ok(0)
        }
        Command::Summarize { report: path } => {
            let text = fs::read_to_string(&path).map_err(|e| Fatal(format!("{}: {e}", path.display())))?;
            let summary = report::summarize(&text).map_err(|e| Fatal(format!("{}: {e}", path.display())))?;
            print!("{summary}");
            Ok(0)
        }
    }
}
