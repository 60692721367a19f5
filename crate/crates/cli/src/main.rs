mod commands;
mod report;
mod session;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};

use commands::{Command, Options};
use reldiff::dvariety::Verdict;
use report::Report;
use session::{Object, Session};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

/// Exact checks for relative D-varieties, relative D-groups and Kolchin
/// polynomials.
#[derive(Debug, Parser)]
#[command(name = "reldiff", version)]
struct Cli {
    /// Session file declaring the field and the objects.
    #[arg(long, global = true)]
    session: Option<PathBuf>,
    /// Largest order (or h) examined by enumerations.
    #[arg(long, global = true, default_value_t = 6)]
    max_order: u32,
    /// Treat the presentation of this variety or group as prime.
    #[arg(long, global = true)]
    assert_prime: Vec<String>,
    /// Also check associativity of group laws.
    #[arg(long, global = true)]
    check_assoc: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

/// Lines of a batch file reuse the subcommand grammar.
#[derive(Debug, Parser)]
#[command(no_binary_name = true)]
struct BatchLine {
    #[command(subcommand)]
    command: Command,
}

const EXIT_ERROR: u8 = 3;

fn exit_code(v: Verdict) -> u8 {
    match v {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
        Verdict::Inconclusive => 2,
    }
}

fn emit(rep: &Report, format: Format) {
    match format {
        Format::Text => print!("{}", rep.render_text()),
        Format::Structured => match serde_json::to_string_pretty(rep) {
            Ok(s) => println!("{s}"),
            Err(e) => eprintln!("error: {e}"),
        },
    }
}

fn load(cli: &Cli) -> Result<Session, String> {
    let path = cli
        .session
        .as_ref()
        .ok_or_else(|| "--session <file> is required".to_string())?;
    let src = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut s = session::parse_session(&src).map_err(|e| format!("{}: {e}", path.display()))?;
    for name in &cli.assert_prime {
        match s.get_mut(name) {
            Some(Object::Variety(v)) => v.prime = true,
            Some(Object::Group(g)) => g.variety.prime = true,
            Some(o) => return Err(format!("--assert-prime: `{name}` is a {}", o.kind())),
            None => return Err(format!("--assert-prime: no object named `{name}`")),
        }
    }
    Ok(s)
}

/// A field with non-commuting derivations is reported, not rejected, by
/// `field-check`.
fn field_failure(cli: &Cli) -> Option<Report> {
    let path = cli.session.as_ref()?;
    let src = std::fs::read_to_string(path).ok()?;
    match session::parse_session(&src) {
        Err(session::SessionError::Field { line, source }) => {
            let mut rep = Report::new("field-check");
            rep.section("commutativity").check(
                format!("line {line}"),
                source.to_string(),
                Verdict::Fail,
            );
            rep.merge_verdict(Verdict::Fail);
            Some(rep)
        }
        _ => None,
    }
}

fn run_one(s: &Session, cmd: &Command, opts: &Options, format: Format) -> Result<Verdict, String> {
    let start = Instant::now();
    let mut rep = commands::run(s, cmd, opts).map_err(|e| e.to_string())?;
    rep.timing_ms = start.elapsed().as_millis();
    emit(&rep, format);
    Ok(rep.outcome)
}

fn run_batch(
    s: &Session,
    file: &PathBuf,
    opts: &Options,
    format: Format,
) -> Result<Verdict, String> {
    let src = std::fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    let mut worst = Verdict::Pass;
    for (n, line) in src.lines().enumerate() {
        let text = line.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let parsed = BatchLine::try_parse_from(text.split_whitespace())
            .map_err(|e| format!("{}:{}: {}", file.display(), n + 1, e.to_string().trim()))?;
        if matches!(parsed.command, Command::Batch { .. }) {
            return Err(format!("{}:{}: nested batch", file.display(), n + 1));
        }
        worst = worst.combine(run_one(s, &parsed.command, opts, format)?);
    }
    Ok(worst)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = Options {
        max_order: cli.max_order,
        check_assoc: cli.check_assoc,
    };
    if matches!(cli.command, Command::FieldCheck) {
        if let Some(rep) = field_failure(&cli) {
            emit(&rep, cli.format);
            return ExitCode::from(exit_code(Verdict::Fail));
        }
    }
    let s = match load(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let result = match &cli.command {
        Command::Batch { file } => run_batch(&s, file, &opts, cli.format),
        cmd => run_one(&s, cmd, &opts, cli.format),
    };
    match result {
        Ok(v) => ExitCode::from(exit_code(v)),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
