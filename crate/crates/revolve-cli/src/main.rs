//! Command-line front end: schedules, cost tables, slot-count selection,
//! schedule validation, and the wave-equation adjoint demo.
//!
//! Exit codes: 0 success, 2 usage/configuration error, 3 validation failure,
//! 4 numerical failure.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use revolve::wave::report::{run_demo, DemoConfig, DemoMode, DemoReport};
use revolve::{
    adjust, adjust_objective, generate_schedule, min_advances, validate_schedule, Action, Error,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "revolve",
    version,
    about = "Binomial checkpointing schedules for adjoint computations",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Print the action sequence and summary for a (steps, snaps) pair.
    Schedule {
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        snaps: usize,
        /// text: one compact line; json: one action object per line;
        /// csv: kind,oldCapo,capo,check rows.
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Minimal total forward steps for one slot count, or a CSV table over
    /// a slot-count range.
    Cost {
        #[arg(long)]
        steps: u64,
        #[arg(long, conflicts_with = "max_snaps")]
        snaps: Option<u64>,
        /// Emit the table for snaps = 1..=MAX as CSV.
        #[arg(long)]
        max_snaps: Option<u64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Slot count minimizing memory x runtime, with the objective value.
    Adjust {
        #[arg(long)]
        steps: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Check a JSON-lines schedule file against the abstract machine.
    Validate {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        snaps: usize,
    },
    /// Run the 1D wave-equation adjoint demo and print its JSON report.
    Demo {
        #[arg(long, default_value_t = 201)]
        nx: usize,
        #[arg(long, default_value_t = 500)]
        nt: usize,
        #[arg(long, default_value_t = 20)]
        snaps: usize,
        /// Store the complete forward history instead of checkpointing.
        #[arg(long, conflicts_with = "online")]
        full_storage: bool,
        /// Treat the step count as unknown (online checkpointing).
        #[arg(long)]
        online: bool,
        /// Also write the report to this path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Numerical(_) => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

fn fail(err: Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(exit_for(&err))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Schedule {
            steps,
            snaps,
            format,
        } => cmd_schedule(steps, snaps, format),
        Command::Cost {
            steps,
            snaps,
            max_snaps,
            format,
        } => cmd_cost(steps, snaps, max_snaps, format),
        Command::Adjust { steps, format } => cmd_adjust(steps, format),
        Command::Validate { file, steps, snaps } => cmd_validate(&file, steps, snaps),
        Command::Demo {
            nx,
            nt,
            snaps,
            full_storage,
            online,
            report,
        } => cmd_demo(nx, nt, snaps, full_storage, online, report.as_deref()),
    }
}

fn cmd_schedule(steps: usize, snaps: usize, format: Format) -> ExitCode {
    let report = match generate_schedule(steps, snaps) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    match format {
        Format::Text => {
            println!("{}", report.compact_line());
            println!(
                "steps={steps} snaps={snaps} advances={} takeshots={} restores={} peak_slots={}",
                report.advance_count,
                report.takeshot_count,
                report.restore_count,
                report.peak_slots_used
            );
        }
        Format::Json => {
            let mut out = std::io::stdout().lock();
            for action in &report.actions {
                let line = serde_json::to_string(action).expect("action serializes");
                if writeln!(out, "{line}").is_err() {
                    return ExitCode::from(EXIT_CONFIG);
                }
            }
            eprintln!(
                "steps={steps} snaps={snaps} advances={} takeshots={} restores={}",
                report.advance_count, report.takeshot_count, report.restore_count
            );
        }
        Format::Csv => {
            println!("kind,oldCapo,capo,check");
            for a in &report.actions {
                let check = a.check.map_or(String::new(), |c| c.to_string());
                println!("{},{},{},{check}", a.kind.as_str(), a.old_capo, a.capo);
            }
        }
    }
    ExitCode::SUCCESS
}

fn cmd_cost(steps: u64, snaps: Option<u64>, max_snaps: Option<u64>, format: Format) -> ExitCode {
    match (snaps, max_snaps) {
        (Some(s), None) => {
            let advances = match min_advances(steps, s) {
                Ok(v) => v,
                Err(e) => return fail(e),
            };
            match format {
                Format::Json => println!(
                    r#"{{"steps":{steps},"snaps":{s},"advances":{advances},"recompute_factor":{}}}"#,
                    advances as f64 / steps as f64
                ),
                _ => println!("{advances}"),
            }
            ExitCode::SUCCESS
        }
        (None, max) => {
            let max = max.unwrap_or(steps);
            println!("snaps,advances,recompute_factor");
            for s in 1..=max {
                let advances = match min_advances(steps, s) {
                    Ok(v) => v,
                    Err(e) => return fail(e),
                };
                println!("{s},{advances},{}", advances as f64 / steps as f64);
            }
            ExitCode::SUCCESS
        }
        (Some(_), Some(_)) => unreachable!("clap forbids combining --snaps and --max-snaps"),
    }
}

fn cmd_adjust(steps: u64, format: Format) -> ExitCode {
    let snaps = match adjust(steps) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let objective = match adjust_objective(steps, snaps) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    match format {
        Format::Json => {
            println!(r#"{{"steps":{steps},"snaps":{snaps},"objective":{objective}}}"#)
        }
        _ => println!("snaps={snaps} objective={objective}"),
    }
    ExitCode::SUCCESS
}

fn cmd_validate(file: &std::path::Path, steps: usize, snaps: usize) -> ExitCode {
    let reader = match fs::File::open(file) {
        Ok(f) => BufReader::new(f),
        Err(e) => {
            eprintln!("error: cannot open {}: {e}", file.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut actions: Vec<Action> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", file.display());
                return ExitCode::from(EXIT_CONFIG);
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(a) => actions.push(a),
            Err(e) => {
                println!("FAIL line {}: unparseable action: {e}", lineno + 1);
                return ExitCode::from(EXIT_VALIDATION);
            }
        }
    }
    let report = validate_schedule(&actions, steps, snaps);
    if report.valid {
        println!(
            "PASS: {} actions, {} advances, {} adjoint steps",
            actions.len(),
            report.advance_count,
            report.adjoint_count
        );
        ExitCode::SUCCESS
    } else {
        let v = report
            .violation
            .expect("invalid report carries a violation");
        println!("FAIL at action {}: {}", v.index, v.message);
        ExitCode::from(EXIT_VALIDATION)
    }
}

fn cmd_demo(
    nx: usize,
    nt: usize,
    snaps: usize,
    full_storage: bool,
    online: bool,
    report_path: Option<&std::path::Path>,
) -> ExitCode {
    let mode = if full_storage {
        DemoMode::FullStorage
    } else if online {
        DemoMode::Online
    } else {
        DemoMode::Checkpointed
    };
    let report: DemoReport = match run_demo(DemoConfig {
        nx,
        nt,
        snaps,
        mode,
    }) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{json}");
    if let Some(path) = report_path {
        if let Err(e) = fs::write(path, &json) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    ExitCode::SUCCESS
}
