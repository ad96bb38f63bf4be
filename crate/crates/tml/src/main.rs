use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use tml::campaign::{run_suite, summarize, CampaignConfig, CampaignError, Suite, DEFAULT_ASSERT_TOL};
use tml::io::{read_space_with_tol, write_report, write_space, IoError, LoadedSpace};
use tml::report::ReportFormat;
use tml::sequence::{default_kinds, render_table, run_sequence_experiment, SequenceError};
use tml_core::construct::{random_metric_space, random_time_function, MetricModel, SequenceFamily, SequenceSpec, TimeModel};
use tml_core::engine::{distance, earliest, local_search_upper, pointed_gh};
use tml_core::{structure_report, DistanceKind, DistanceResult, TimedMetricSpace, DEFAULT_BUDGET, DEFAULT_TOL};

const EXIT_INVALID: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_ASSERTION: u8 = 3;

#[derive(Parser)]
#[command(name = "tml", version, about = "Distances between finite timed metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Euclidean,
    Graph,
}

#[derive(Clone, Copy, ValueEnum)]
enum TimeArg {
    Cone,
    SetCone,
    Mcshane,
    None,
}

#[derive(Subcommand)]
enum Command {
    /// Check a space file; violations go to standard error.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Print the time class and structure defects of a space file.
    Classify {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Compute a distance interval between two space files.
    Dist {
        #[arg(long)]
        kind: DistanceKind,
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        json: bool,
        /// Basepoint label in A for pt-gh (default: first point of least time).
        #[arg(long)]
        base_a: Option<String>,
        /// Basepoint label in B for pt-gh.
        #[arg(long)]
        base_b: Option<String>,
        /// Use seeded local search with this many iterations instead of
        /// exhaustive search.
        #[arg(long)]
        local_search: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate a random space file.
    Gen {
        #[arg(long)]
        model: ModelArg,
        /// Dimension of the Euclidean model.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value = "none")]
        time: TimeArg,
        /// Size of the zero set for set-cone.
        #[arg(long, default_value_t = 2)]
        s: usize,
        /// Number of anchors for mcshane.
        #[arg(long, default_value_t = 2)]
        anchors: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
        #[arg(long)]
        name: Option<String>,
    },
    /// Run a verification campaign and write its report.
    Campaign {
        #[arg(long)]
        suite: Suite,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        nmax: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: ReportFormat,
        #[arg(long, default_value_t = DEFAULT_ASSERT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Measure a generated sequence against its limit.
    Sequence {
        #[arg(long)]
        family: SequenceFamily,
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        length: usize,
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated kinds to report.
        #[arg(long, value_delimiter = ',')]
        kinds: Vec<DistanceKind>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = DEFAULT_ASSERT_TOL)]
        tol: f64,
    },
}

enum Failure {
    Invalid(String),
    Usage(String),
    Assertion(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn load(path: &Path, tol: f64) -> Result<LoadedSpace, Failure> {
    read_space_with_tol(path, tol).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(m)) => {
            eprintln!("{m}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Assertion(m)) => {
            eprintln!("{m}");
            ExitCode::from(EXIT_ASSERTION)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { file, tol } => match read_space_with_tol(&file, tol) {
            Ok(s) => {
                let timed = if s.is_timed() { "timed" } else { "untimed" };
                println!("valid: {} points, {timed}", s.metric().n());
                Ok(())
            }
            Err(IoError::Validation(e)) => {
                for v in &e.violations {
                    eprintln!("{v}");
                }
                Err(Failure::Invalid(format!("{}: {} violation(s)", file.display(), e.violations.len())))
            }
            Err(e) => Err(e.into()),
        },
        Command::Classify { file, tol } => {
            let s = load(&file, tol)?;
            if !s.is_timed() {
                println!("note: no time function, using tau = 0");
            }
            let t = s.into_timed();
            let r = structure_report(&t, tol);
            let zero: Vec<&str> = r.zero_set.iter().map(|&i| t.base().label(i)).collect();
            println!("class: {}", tml_core::classify(&t, tol));
            println!("zero_set: [{}]", zero.join(", "));
            println!("zero_diam: {}", r.zero_diam);
            println!("fd_defect: {}", r.fd_defect);
            println!("bb_defect: {}", r.bb_defect);
            println!("min_tau: {}", r.min_tau);
            Ok(())
        }
        Command::Dist { kind, a, b, budget, tol, json, base_a, base_b, local_search, seed } => {
            let (a, b) = (load(&a, tol)?.into_timed(), load(&b, tol)?.into_timed());
            let pick = |t: &TimedMetricSpace, label: Option<String>| match label {
                None => Ok(earliest(t)),
                Some(l) => t.base().index_of(&l).ok_or_else(|| Failure::Usage(format!("no point labeled `{l}`"))),
            };
            let result = match (kind, local_search) {
                (_, Some(iterations)) => local_search_upper(kind, &a, &b, seed, iterations),
                (DistanceKind::PtGh, None) => {
                    pointed_gh(a.base(), pick(&a, base_a)?, b.base(), pick(&b, base_b)?, budget)
                }
                _ => distance(kind, &a, &b, budget, tol),
            }
            .map_err(|e| Failure::Invalid(e.to_string()))?;
            print_result(&result, &a, &b, json);
            Ok(())
        }
        Command::Gen { model, dim, time, s, anchors, n, seed, out, name } => {
            if n == 0 {
                return Err(Failure::Usage("--n must be at least 1".into()));
            }
            let metric = match model {
                ModelArg::Euclidean => MetricModel::Euclidean(dim.max(1)),
                ModelArg::Graph => MetricModel::Graph,
            };
            let x = random_metric_space(seed, n, metric);
            let time_seed = seed.wrapping_add(1);
            let name = name.unwrap_or_else(|| format!("gen-{seed}"));
            let space = match time {
                TimeArg::None => LoadedSpace::Metric { name, space: x },
                TimeArg::Cone => LoadedSpace::Timed { name, space: random_time_function(time_seed, &x, TimeModel::Cone) },
                TimeArg::SetCone => {
                    LoadedSpace::Timed { name, space: random_time_function(time_seed, &x, TimeModel::SetCone(s)) }
                }
                TimeArg::Mcshane => {
                    LoadedSpace::Timed { name, space: random_time_function(time_seed, &x, TimeModel::McShane(anchors)) }
                }
            };
            write_space(&space, &out)?;
            Ok(())
        }
        Command::Campaign { suite, trials, nmax, seed, out, format, tol, budget, threads } => {
            let cfg = CampaignConfig { suite, trials, nmax, seed, tol, budget, threads };
            let rows = run_suite(&cfg).map_err(|e| match e {
                CampaignError::InvalidConfig(m) => Failure::Usage(m),
                other => Failure::Assertion(other.to_string()),
            })?;
            write_report(&rows, &out, format)?;
            let summary = summarize(&rows);
            for line in &summary.lines {
                println!("{line}");
            }
            for r in rows.iter().filter(|r| r.failed()) {
                eprintln!(
                    "FAIL {} trial {}: seed {} n {} {} model {}: {} (slack {})",
                    r.suite, r.trial, r.seed, r.n1, r.n2, r.model, r.inequality, r.slack
                );
            }
            if summary.failures > 0 {
                return Err(Failure::Assertion(format!("{} failing row(s)", summary.failures)));
            }
            Ok(())
        }
        Command::Sequence { family, base, length, rate, seed, out, kinds, budget, tol } => {
            let base = load(&base, DEFAULT_TOL)?.into_timed();
            let spec = SequenceSpec { family, base, length, rate, seed };
            let kinds = if kinds.is_empty() { default_kinds(&spec) } else { kinds };
            let rows = run_sequence_experiment(&spec, &kinds, budget, tol).map_err(|e| match e {
                SequenceError::InvalidSpec(e) => Failure::Usage(e.to_string()),
                other => Failure::Assertion(other.to_string()),
            })?;
            fs::write(&out, render_table(&rows, &kinds))
                .map_err(|e| Failure::Invalid(format!("{}: {e}", out.display())))?;
            let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
            println!("{}: {}/{} elements pass", family.as_str(), rows.len() - failed.len(), rows.len());
            for r in &failed {
                eprintln!("FAIL j {}: {} (slack {}, class {})", r.j, r.checks.join("; "), r.slack, r.class);
            }
            if !failed.is_empty() {
                return Err(Failure::Assertion(format!("{} failing element(s)", failed.len())));
            }
            Ok(())
        }
    }
}

fn print_result(r: &DistanceResult, a: &TimedMetricSpace, b: &TimedMetricSpace, as_json: bool) {
    let la = |i: usize| a.base().label(i).to_string();
    let lb = |i: usize| b.base().label(i).to_string();
    let pairs: Vec<(String, String)> = r.certificate.correspondence.pairs().iter().map(|&(x, y)| (la(x), lb(y))).collect();
    let basepoints = r.certificate.basepoints.map(|(p, q)| (la(p), lb(q)));
    let zero_sets = r
        .certificate
        .zero_sets
        .as_ref()
        .map(|(y1, y2)| (y1.iter().map(|&i| la(i)).collect::<Vec<_>>(), y2.iter().map(|&i| lb(i)).collect::<Vec<_>>()));
    if as_json {
        let v = json!({
            "kind": r.kind.as_str(),
            "lower": r.lower,
            "upper": r.upper,
            "exact": r.is_exact,
            "explored": r.explored,
            "budget_exhausted": r.budget_exhausted,
            "certificate": pairs,
            "basepoints": basepoints,
            "zero_sets": zero_sets,
        });
        println!("{v}");
        return;
    }
    println!("kind: {}", r.kind);
    println!("lower: {}", r.lower);
    println!("upper: {}", r.upper);
    println!("exact: {}", r.is_exact);
    println!("explored: {}", r.explored);
    println!("budget_exhausted: {}", r.budget_exhausted);
    let cert: Vec<String> = pairs.iter().map(|(x, y)| format!("({x}, {y})")).collect();
    println!("certificate: {}", cert.join(" "));
    if let Some((p, q)) = basepoints {
        println!("basepoints: ({p}, {q})");
    }
    if let Some((y1, y2)) = zero_sets {
        println!("zero_sets: [{}] [{}]", y1.join(", "), y2.join(", "));
    }
}
