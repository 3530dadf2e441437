//! Command-line front end: census generation, verification suites, the
//! worked-example catalog, and the full selfcheck battery.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage or guard error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use prym_kit::abelian::{make_group, AbelianError, DEFAULT_GUARD};
use prym_kit::gl_fixed::GlError;
use prym_kit::report::{self, TaskParams};
use prym_kit::sp_fixed::SpError;

#[derive(Parser)]
#[command(
    name = "prym-kit",
    version,
    about = "Exact fixed-point classification toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the discrete census of fixed-point components.
    Census(CensusArgs),
    /// Run one named verification task.
    Verify(VerifyArgs),
    /// Print a worked example with all identities re-verified.
    Catalog(CatalogArgs),
    /// Run the complete verification battery.
    Selfcheck,
}

#[derive(Args)]
struct CensusArgs {
    /// Group type: gl or sp.
    group: String,
    /// Rank parameter (GL acts on C^n; Sp matrices are 2n×2n).
    #[arg(long)]
    n: usize,
    /// Invariant factors of Λ, comma separated, e.g. 2,2.
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<u64>,
    /// Deduplicate pairings by the automorphism group of Λ.
    #[arg(long)]
    dedup_aut: bool,
    /// Write the JSON report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Enumeration guard (maximal |Λ| handled).
    #[arg(long)]
    guard: Option<u64>,
    /// Worker threads for row construction (output is order-independent).
    #[arg(long)]
    threads: Option<usize>,
    /// Append a human-readable table to stderr.
    #[arg(long)]
    table: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Task id, e.g. spin-4m, cor-6.4, remark-7.6.
    task: String,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<u64>>,
    #[arg(long)]
    max_lambda: Option<u64>,
    #[arg(long)]
    max_n: Option<usize>,
}

#[derive(Args)]
struct CatalogArgs {
    /// Example id: narasimhan-ramanan, sp-order2, spin-order2.
    example: String,
    #[arg(long)]
    n: usize,
    /// Order of the line bundle (narasimhan-ramanan only).
    #[arg(long)]
    r: Option<u64>,
    /// Split parameter (spin-order2 only; defaults to the even half).
    #[arg(long)]
    p: Option<usize>,
}

/// Optional config file, located through the environment only.
#[derive(Deserialize, Default)]
struct Config {
    guard: Option<u64>,
    threads: Option<usize>,
}

fn load_config() -> Config {
    match std::env::var("PRYM_KIT_CONFIG") {
        Ok(path) => match std::fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text).unwrap_or_default(),
            Err(_) => Config::default(),
        },
        Err(_) => Config::default(),
    }
}

fn emit(out: &Option<PathBuf>, payload: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, payload),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(payload.as_bytes())?;
            stdout.write_all(b"\n")
        }
    }
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn is_guard_error_gl(e: &GlError) -> bool {
    matches!(e, GlError::Abelian(AbelianError::GuardExceeded { .. }))
}

fn is_guard_error_sp(e: &SpError) -> bool {
    matches!(e, SpError::Abelian(AbelianError::GuardExceeded { .. }))
        || matches!(
            e,
            SpError::Gl(GlError::Abelian(AbelianError::GuardExceeded { .. }))
        )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = load_config();
    match cli.command {
        Command::Census(args) => {
            let guard = args.guard.or(config.guard).unwrap_or(DEFAULT_GUARD);
            let threads = args.threads.or(config.threads).unwrap_or(1).max(1);
            let lambda = make_group(&args.lambda);
            match args.group.as_str() {
                "gl" => {
                    match report::run_gl_census(args.n, &lambda, guard, args.dedup_aut, threads) {
                        Ok(rep) => {
                            let json = serde_json::to_string_pretty(&rep).expect("serializable");
                            if emit(&args.out, &json).is_err() {
                                return usage_error("could not write the report");
                            }
                            if args.table {
                                eprint!("{}", report::gl_report_table(&rep));
                            }
                            ExitCode::SUCCESS
                        }
                        Err(e) if is_guard_error_gl(&e) => usage_error(&e.to_string()),
                        Err(e) => {
                            eprintln!("census failed: {e}");
                            ExitCode::from(1)
                        }
                    }
                }
                "sp" => {
                    match report::run_sp_census(args.n, &lambda, guard, args.dedup_aut, threads) {
                        Ok(rep) => {
                            let json = serde_json::to_string_pretty(&rep).expect("serializable");
                            if emit(&args.out, &json).is_err() {
                                return usage_error("could not write the report");
                            }
                            if args.table {
                                eprint!("{}", report::sp_report_table(&rep));
                            }
                            ExitCode::SUCCESS
                        }
                        Err(SpError::NotExponentTwo(e)) => {
                            usage_error(&format!("Λ must have exponent 2, got {e}"))
                        }
                        Err(e) if is_guard_error_sp(&e) => usage_error(&e.to_string()),
                        Err(e) => {
                            eprintln!("census failed: {e}");
                            ExitCode::from(1)
                        }
                    }
                }
                other => usage_error(&format!("unknown group type '{other}' (use gl or sp)")),
            }
        }
        Command::Verify(args) => {
            let params = TaskParams {
                m: args.m,
                lambda: args.lambda,
                max_lambda: args.max_lambda,
                max_n: args.max_n,
            };
            match report::run_task(&args.task, &params) {
                Some(outcome) => {
                    let json = serde_json::to_string_pretty(&outcome).expect("serializable");
                    println!("{json}");
                    if outcome.pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                None => usage_error(&format!(
                    "unknown task '{}'; known tasks: {}",
                    args.task,
                    report::TASK_IDS.join(", ")
                )),
            }
        }
        Command::Catalog(args) => match args.example.as_str() {
            "narasimhan-ramanan" => {
                let r = match args.r {
                    Some(r) => r,
                    None => return usage_error("narasimhan-ramanan needs --r"),
                };
                match report::narasimhan_ramanan_catalog(args.n, r) {
                    Ok(cat) => {
                        println!(
                            "{}",
                            serde_json::to_string_pretty(&cat).expect("serializable")
                        );
                        ExitCode::SUCCESS
                    }
                    Err(e) => usage_error(&e),
                }
            }
            "sp-order2" => match report::sp_order2_catalog(args.n) {
                Ok(cat) => {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&cat).expect("serializable")
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => usage_error(&e),
            },
            "spin-order2" => {
                let p = args.p.unwrap_or_else(|| {
                    let half = args.n / 2;
                    if half % 2 == 0 {
                        half
                    } else {
                        half + 1
                    }
                });
                match report::spin_order2_catalog(args.n, p) {
                    Ok(cat) => {
                        println!(
                            "{}",
                            serde_json::to_string_pretty(&cat).expect("serializable")
                        );
                        ExitCode::SUCCESS
                    }
                    Err(e) => usage_error(&e),
                }
            }
            other => usage_error(&format!(
                "unknown example '{other}' (use narasimhan-ramanan, sp-order2, spin-order2)"
            )),
        },
        Command::Selfcheck => {
            let outcomes = report::run_all_tasks();
            let mut all_pass = true;
            for o in &outcomes {
                println!("[{}] {}", if o.pass { "PASS" } else { "FAIL" }, o.task);
                all_pass &= o.pass;
            }
            let json = serde_json::to_string_pretty(&outcomes).expect("serializable");
            eprintln!("{json}");
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
