//! `indexmap`: scans of multiplicative orders and indices over primes,
//! closed-form index-map images, Kummer degrees, congruence-system
//! solving, density reports, and the acceptance-suite reproduction harness.
//!
//! Exit codes: 0 success, 1 assertion or runtime failure, 2 usage error.

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use indexmap_core::acceptance::{run_all, AcceptanceConfig};
use indexmap_core::consolve::{self, CongruenceSystem, SolveConfig};
use indexmap_core::density::{self, Target};
use indexmap_core::gaussidx;
use indexmap_core::kummerdeg::{self, KummerQuery};
use indexmap_core::psidecide::{self, MaximalFamily};
use indexmap_core::rank1image;
use indexmap_core::ratmul::{self, SubgroupLattice};
use indexmap_core::resindex::{self, CongruenceFilter};

#[derive(Parser)]
#[command(
    name = "indexmap",
    version,
    about = "index map toolkit for multiplicative groups of rationals"
)]
struct Cli {
    /// Worker threads for scans (default: all cores, or INDEXMAP_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan index tuples of one or more groups over primes up to a bound.
    Scan(ScanArgs),
    /// Scan the Gaussian four-group valuation tuples over sites.
    GaussScan(GaussScanArgs),
    /// Closed-form image of p -> Ind_p(a): exceptional sets and descriptor.
    Image(ImageArgs),
    /// Check whether a value is attained by p -> Ind_p(a).
    ImageCheck(ImageCheckArgs),
    /// Decide membership of a valuation tuple in the image of Psi_ell.
    DecideEll(DecideEllArgs),
    /// Decide solvability of a congruence/incongruence system from JSON.
    Solve(SolveArgs),
    /// Exact cyclotomic-Kummer degree, optionally with the statistical oracle.
    Kummer(KummerArgs),
    /// Truncated and empirical density report.
    Density(DensityArgs),
    /// Run the acceptance suite and print one line per criterion.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct ScanArgs {
    /// Group generators, comma separated; repeat for several groups.
    #[arg(long = "group", required = true)]
    groups: Vec<String>,
    #[arg(long)]
    bound: u64,
    /// Congruence condition on scanned primes, e.g. "1 mod 4".
    #[arg(long)]
    filter: Option<String>,
    /// CSV output path for the records.
    #[arg(long)]
    out: Option<String>,
    /// JSON output path for the tuple histogram.
    #[arg(long)]
    histogram: Option<String>,
    /// Histogram cap: larger entries are binned as "large".
    #[arg(long, default_value_t = resindex::DEFAULT_HISTOGRAM_CAP)]
    cap: u64,
}

#[derive(Args)]
struct GaussScanArgs {
    /// Odd prime q for the valuation tuples.
    #[arg(long)]
    q: u64,
    /// Norm bound for the scanned sites.
    #[arg(long)]
    bound: u64,
    /// Use the conjugate (larger) root at split primes.
    #[arg(long)]
    conjugate: bool,
    /// CSV output path for per-site records (moderate bounds).
    #[arg(long)]
    out: Option<String>,
    /// JSON output path for the tuple histogram.
    #[arg(long)]
    histogram: Option<String>,
}

#[derive(Args)]
struct ImageArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: String,
}

#[derive(Args)]
struct ImageCheckArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    #[arg(long)]
    h: u128,
}

#[derive(Args)]
struct DecideEllArgs {
    /// Distinct odd prime generators, one per group; or use --gaussian.
    #[arg(long = "group")]
    groups: Vec<u64>,
    /// Use the built-in Gaussian four-group family.
    #[arg(long)]
    gaussian: bool,
    #[arg(long)]
    ell: u64,
    /// Valuation tuple, comma separated.
    #[arg(long)]
    tuple: String,
    /// Omit the generated systems from the JSON verdict.
    #[arg(long)]
    brief: bool,
}

#[derive(Args)]
struct SolveArgs {
    /// JSON file holding the system {q, dim, rows: [{v, c, e, strict}], ...}.
    #[arg(long)]
    file: String,
    #[arg(long, default_value_t = 100_000_000)]
    budget: u64,
}

#[derive(Args)]
struct KummerArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    m: u64,
    /// Also run the statistical splitting oracle.
    #[arg(long)]
    statistical: bool,
    #[arg(long, default_value_t = 1_000_000)]
    bound: u64,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    #[arg(long)]
    h: u64,
    /// Cut for the truncated product.
    #[arg(long, default_value_t = 50)]
    t: u64,
    /// Prime bound for the empirical ratio; 0 skips the scan.
    #[arg(long, default_value_t = 0)]
    bound: u64,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Cap all scan bounds of the suite (default: full-scale bounds).
    #[arg(long)]
    bound: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli.workers.or_else(|| {
        std::env::var("INDEXMAP_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = workers {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(1)
        }
    }
}

fn parse_group(text: &str) -> Result<SubgroupLattice, String> {
    let gens = text
        .split(',')
        .map(|s| ratmul::parse_rational(s).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SubgroupLattice::new(gens))
}

fn write_or_print(path: &Option<String>, content: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, content).map_err(|e| e.to_string()),
        None => {
            println!("{}", content);
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Scan(args) => {
            let groups = args
                .groups
                .iter()
                .map(|g| parse_group(g))
                .collect::<Result<Vec<_>, _>>()?;
            let filter = args
                .filter
                .as_deref()
                .map(CongruenceFilter::parse)
                .transpose()
                .map_err(|e| e.to_string())?;
            if let Some(out) = &args.out {
                let records = resindex::scan_records(&groups, args.bound, filter)
                    .map_err(|e| e.to_string())?;
                let mut file = fs::File::create(out).map_err(|e| e.to_string())?;
                resindex::write_csv(&mut file, groups.len(), &records)
                    .map_err(|e| e.to_string())?;
                file.flush().map_err(|e| e.to_string())?;
            }
            let hist = resindex::scan_histogram(&groups, args.bound, filter, args.cap)
                .map_err(|e| e.to_string())?;
            let json = serde_json::to_string_pretty(&hist.to_json()).unwrap();
            match &args.histogram {
                Some(p) => fs::write(p, &json).map_err(|e| e.to_string())?,
                None if args.out.is_none() => println!("{}", json),
                None => {}
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::GaussScan(args) => {
            let scan = gaussidx::psi_q_scan(args.q, args.bound, args.conjugate)
                .map_err(|e| e.to_string())?;
            if let Some(out) = &args.out {
                let records = gaussidx::site_records(args.bound, args.conjugate);
                let mut file = fs::File::create(out).map_err(|e| e.to_string())?;
                gaussidx::write_site_csv(&mut file, &records).map_err(|e| e.to_string())?;
            }
            let json = serde_json::to_string_pretty(&scan.to_json()).unwrap();
            write_or_print(&args.histogram, &json)?;
            if scan.violations.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("pattern violations observed: {:?}", scan.violations);
                Ok(ExitCode::from(1))
            }
        }
        Command::Image(args) => {
            let a = ratmul::parse_rational(&args.a).map_err(|e| e.to_string())?;
            let dec = ratmul::canonical_decompose(&a).map_err(|e| e.to_string())?;
            let sets = rank1image::exceptional_sets_from(&a, &dec);
            let desc = rank1image::image_descriptor(&sets);
            let json = rank1image::image_json(&a, &dec, &desc);
            println!("{}", serde_json::to_string_pretty(&json).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        Command::ImageCheck(args) => {
            let a = ratmul::parse_rational(&args.a).map_err(|e| e.to_string())?;
            let sets = rank1image::exceptional_sets(&a).map_err(|e| e.to_string())?;
            let verdict = rank1image::in_image(&sets, args.h);
            println!(
                "{}",
                serde_json::json!({ "a": args.a, "h": args.h.to_string(), "in_image": verdict })
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::DecideEll(args) => {
            let fam = if args.gaussian {
                MaximalFamily::gaussian_four_group()
            } else if !args.groups.is_empty() {
                MaximalFamily::from_distinct_odd_primes(&args.groups).map_err(|e| e.to_string())?
            } else {
                return Err("supply --gaussian or at least one --group".into());
            };
            let tuple = args
                .tuple
                .split(',')
                .map(|s| s.trim().parse::<u32>().map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            let mut report = psidecide::psi_ell_membership_maximal(&fam, &tuple, args.ell)
                .map_err(|e| e.to_string())?;
            if args.brief {
                report.systems.clear();
            }
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve(args) => {
            let text = fs::read_to_string(&args.file).map_err(|e| e.to_string())?;
            let sys: CongruenceSystem = serde_json::from_str(&text).map_err(|e| e.to_string())?;
            let cfg = SolveConfig {
                budget: args.budget,
                ..SolveConfig::default()
            };
            let structured = consolve::solvable_structured(&sys);
            let witness = consolve::solvable_bruteforce(&sys, &cfg).map_err(|e| e.to_string())?;
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "solvable": witness.is_some(),
                    "witness": witness,
                    "structured": structured,
                }))
                .unwrap()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Kummer(args) => {
            let a = ratmul::parse_rational(&args.a).map_err(|e| e.to_string())?;
            let query = KummerQuery::new(a, args.n, args.m).map_err(|e| e.to_string())?;
            let rel = kummerdeg::degree(&query).map_err(|e| e.to_string())?;
            let full = kummerdeg::full_degree(&query).map_err(|e| e.to_string())?;
            let stat = if args.statistical {
                Some(kummerdeg::degree_statistical(&query, args.bound).map_err(|e| e.to_string())?)
            } else {
                None
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "a": args.a,
                    "n": args.n,
                    "m": args.m,
                    "relative_degree": rel,
                    "full_degree": full,
                    "statistical": stat,
                }))
                .unwrap()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Density(args) => {
            let a = ratmul::parse_rational(&args.a).map_err(|e| e.to_string())?;
            let trunc =
                density::truncated_density(&a, args.h, args.t).map_err(|e| e.to_string())?;
            let empirical = if args.bound > 0 {
                Some(
                    density::empirical_density(
                        &[SubgroupLattice::new(vec![a.clone()])],
                        &Target::Tuple(vec![args.h]),
                        args.bound,
                        None,
                    )
                    .map_err(|e| e.to_string())?,
                )
            } else {
                None
            };
            let report = density::DensityReport {
                a: args.a.clone(),
                h: args.h,
                t: args.t,
                truncated_exact: trunc.to_string(),
                truncated_decimal: density::to_decimal(&trunc, 8),
                empirical,
            };
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        Command::Reproduce(args) => {
            let cfg = match args.bound {
                Some(b) => AcceptanceConfig::capped(b),
                None => AcceptanceConfig::default(),
            };
            let results = run_all(&cfg);
            let mut all_pass = true;
            for r in &results {
                println!("{}", r.line());
                all_pass &= r.passed;
            }
            println!(
                "{} of {} criteria passed",
                results.iter().filter(|r| r.passed).count(),
                results.len()
            );
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
