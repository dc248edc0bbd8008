//! `tscalc` command-line entry point.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use tscalc_cli::{run, CliError, JobSpec, EXIT_OK, EXIT_PARSE};

/// Time-scale calculus: partitions, exponentials and diamond-alpha solutions as CSV.
#[derive(Debug, Parser)]
#[command(name = "tscalc", version, allow_negative_numbers = true)]
struct Args {
    /// partition, eval-exp, solve, verify or regress-check.
    command: Option<String>,
    /// Command, as an alternative to the positional argument.
    #[arg(long)]
    cmd: Option<String>,
    /// Spec file of key=value lines; flags override its values.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Time scale clauses, e.g. "interval(-1,0); qgrid(2,+)".
    #[arg(long, allow_hyphen_values = true)]
    ts: Option<String>,
    /// Weight alpha in [0, 1].
    #[arg(long)]
    alpha: Option<String>,
    /// Coefficient p(t).
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    /// Forcing f(t).
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    /// Anchor point t0.
    #[arg(long)]
    t0: Option<String>,
    /// Value y(t0).
    #[arg(long)]
    y0: Option<String>,
    /// Value y(rho(t0)), the second condition.
    #[arg(long)]
    yrho: Option<String>,
    /// Targets: "a,b,c", "a..b" or "a..b:n".
    #[arg(long, allow_hyphen_values = true)]
    targets: Option<String>,
    /// Relative tolerance.
    #[arg(long)]
    tol: Option<String>,
    /// Output file instead of standard output.
    #[arg(long)]
    out: Option<String>,
}

fn execute(args: Args) -> Result<i32, CliError> {
    let file = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
            JobSpec::parse_file(&text)?
        }
        None => JobSpec::default(),
    };
    if args.command.is_some() && args.cmd.is_some() && args.command != args.cmd {
        return Err(CliError::parse("command", "positional command and --cmd disagree"));
    }
    let flags = JobSpec {
        cmd: args.command.or(args.cmd),
        ts: args.ts,
        alpha: args.alpha,
        p: args.p,
        f: args.f,
        t0: args.t0,
        y0: args.y0,
        yrho: args.yrho,
        targets: args.targets,
        tol: args.tol,
        out: args.out,
    };
    let job = file.overridden_by(&flags).resolve()?;
    let outcome = run(&job)?;
    match &job.out {
        Some(path) => std::fs::write(path, &outcome.text)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?,
        None => print!("{}", outcome.text),
    }
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    match execute(args) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
