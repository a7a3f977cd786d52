mod args;
mod commands;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use rayon::prelude::*;
use serde_json::json;

use args::Cli;
use output::{render_json, CliError, Report, EXIT_FAIL, EXIT_USAGE};

fn out_root(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os("SIP_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("sip-out"))
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn failure_report(e: &CliError) -> Report {
    Report {
        text: format!("error: {}\n", e.message()),
        json: json!({"error": e.message(), "exit_code": e.code()}),
        code: e.code(),
    }
}

fn run_one(cli: &Cli, root: &Path) -> Report {
    match &cli.command {
        Some(cmd) => commands::run(cmd, &root.to_path_buf()).unwrap_or_else(|e| failure_report(&e)),
        None => failure_report(&CliError::Usage("no command given (see --help)".into())),
    }
}

/// One job per non-empty, non-comment line; jobs run concurrently and
/// their outputs are printed in file order. The batch exits with the most
/// severe job code: usage, then failure, then truncation.
fn run_batch(path: &Path, json: bool, root: &Path) -> i32 {
    let content = match std::fs::read_to_string(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return EXIT_USAGE;
        }
    };
    let jobs: Vec<&str> =
        content.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
    let reports: Vec<Report> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, line)| {
            let Some(words) = shlex::split(line) else {
                return failure_report(&CliError::Usage(format!("unbalanced quotes in `{line}`")));
            };
            let argv = std::iter::once("sip".to_string()).chain(words);
            match Cli::try_parse_from(argv) {
                Ok(job) if job.batch.is_some() => failure_report(&CliError::Usage("nested --batch".into())),
                Ok(job) => {
                    let root = job.out.clone().unwrap_or_else(|| root.join(format!("job-{:03}", i + 1)));
                    run_one(&job, &root)
                }
                Err(e) => failure_report(&CliError::Usage(e.to_string().trim_end().to_string())),
            }
        })
        .collect();
    if json {
        let items: Vec<_> = jobs
            .iter()
            .zip(&reports)
            .map(|(line, r)| json!({"job": line, "exit_code": r.code, "result": r.json}))
            .collect();
        emit(&format!("{}\n", render_json(&json!(items))));
    } else {
        for (i, (line, r)) in jobs.iter().zip(&reports).enumerate() {
            emit(&format!("== job {} (exit {}): {line}\n{}", i + 1, r.code, r.text));
        }
    }
    let severity = |c: i32| match c {
        EXIT_USAGE => 3,
        EXIT_FAIL => 2,
        0 => 0,
        _ => 1,
    };
    reports.iter().map(|r| r.code).max_by_key(|c| severity(*c)).unwrap_or(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let root = out_root(&cli);
    let code = match &cli.batch {
        Some(_) if cli.command.is_some() => {
            eprintln!("error: --batch cannot be combined with a command");
            EXIT_USAGE
        }
        Some(path) => run_batch(path, cli.json, &root),
        None => {
            let report = run_one(&cli, &root);
            if cli.json {
                emit(&format!("{}\n", render_json(&report.json)));
            } else if report.json.get("error").is_some() {
                eprint!("{}", report.text);
            } else {
                emit(&report.text);
            }
            report.code
        }
    };
    ExitCode::from(code as u8)
}
