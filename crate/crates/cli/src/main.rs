mod commands;
mod job;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use serde_json::{json, Value};

use commands::{run, Command};
use job::Job;

const SCHEMA_VERSION: u32 = 1;

/// Exact checks for polynomial functions on commutative semigroups.
///
/// Every run prints a JSON report. Exit status is 0 when all checks hold,
/// 1 when one fails, 2 on an operational error.
#[derive(Debug, Parser)]
#[command(name = "genpoly", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// JSON job file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    job: Option<String>,
    /// Write the report here (atomically) instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    #[command(flatten)]
    options: Job,
}

fn load(cli: &Cli) -> Result<(Command, Job)> {
    let (file_command, file_job) = match &cli.job {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read job `{path}`"))?;
            let mut value: Value = serde_json::from_str(&text).with_context(|| format!("invalid job file `{path}`"))?;
            let command = value
                .as_object_mut()
                .and_then(|o| o.remove("command"))
                .and_then(|c| c.as_str().map(str::to_string));
            let job: Job = serde_json::from_value(value).with_context(|| format!("invalid job file `{path}`"))?;
            (command, job)
        }
        None => (None, Job::default()),
    };
    let command = match (cli.command, file_command) {
        (Some(c), _) => c,
        (None, Some(name)) => match Command::from_name(&name) {
            Some(c) => c,
            None => bail!("unknown command `{name}` in job file"),
        },
        (None, None) => bail!("no command given"),
    };
    Ok((command, cli.options.clone().merge(file_job)))
}

fn error_kind(e: &anyhow::Error) -> String {
    match e.downcast_ref::<genpoly::Error>() {
        Some(inner) => {
            let debug = format!("{inner:?}");
            debug
                .split(|c: char| !c.is_alphanumeric())
                .next()
                .unwrap_or("Error")
                .to_string()
        }
        None => "InvalidInput".to_string(),
    }
}

/// A failed precondition that means "not a polynomial of this degree" rather
/// than a broken invocation.
fn is_negative_result(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<genpoly::Error>(),
        Some(genpoly::Error::NotPolynomial(_) | genpoly::Error::NotMultiadditive(_))
    )
}

fn report(cli: &Cli) -> (Value, u8) {
    let (command, job) = match load(cli) {
        Ok(x) => x,
        Err(e) => {
            let body = json!({
                "schema_version": SCHEMA_VERSION,
                "command": cli.command.map(Command::name),
                "job": Value::Null,
                "status": "error",
                "result": Value::Null,
                "error": {"kind": error_kind(&e), "message": format!("{e:#}")},
            });
            return (body, 2);
        }
    };
    let resolved = job.resolved().unwrap_or_else(|_| job.clone());
    let job_json = serde_json::to_value(&resolved).unwrap_or(Value::Null);
    let (status, code, result, error) = match run(command, &resolved) {
        Ok(o) if o.holds => ("holds", 0, o.result, Value::Null),
        Ok(o) => ("fails", 1, o.result, Value::Null),
        Err(e) => {
            let err = json!({"kind": error_kind(&e), "message": format!("{e:#}")});
            if is_negative_result(&e) {
                ("fails", 1, Value::Null, err)
            } else {
                ("error", 2, Value::Null, err)
            }
        }
    };
    let mut body = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command.name(),
        "job": job_json,
        "status": status,
        "result": result,
        "error": error,
    });
    if code == 1 {
        let mut replay = job_json.clone();
        if let Some(o) = replay.as_object_mut() {
            o.insert("command".into(), json!(command.name()));
        }
        body["replay"] = replay;
    }
    (body, code)
}

fn write_atomically(path: &Path, text: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().context("output path has no file name")?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let mut file = std::fs::File::create(&tmp).with_context(|| format!("cannot create {}", tmp.display()))?;
    file.write_all(text.as_bytes())?;
    file.sync_all()?;
    std::fs::rename(&tmp, path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (body, mut code) = report(&cli);
    let text = format!("{}\n", serde_json::to_string_pretty(&body).expect("report serializes"));
    match &cli.out {
        Some(path) => {
            if let Err(e) = write_atomically(Path::new(path), &text) {
                eprintln!("genpoly: {e:#}");
                code = 2;
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code)
}
