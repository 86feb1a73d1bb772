use clap::Parser;
use pep_core::dsl::{parse_job, Format, JobSpec, COMMANDS};
use pep_core::error::{Error, ErrorClass};
use pep_core::jobs::{error_json, run, Report};
use serde::Deserialize;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

/// Run one job over a number field and write a TSV or JSON report.
///
/// Exit status: 0 on success, 2 on parse errors, 3 on math-domain errors,
/// 4 when a resource cap is exceeded.
#[derive(Parser, Debug)]
#[command(name = "pep", version)]
struct Cli {
    /// Operation to run.
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(COMMANDS))]
    command: String,

    /// Job file (`-` reads standard input).
    job: Option<PathBuf>,

    /// Exponent box bound.
    #[arg(long = "box", value_name = "N")]
    box_bound: Option<String>,

    /// Comma-separated thresholds, e.g. `10^2,10^3`.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    thresholds: Option<String>,

    /// Tolerance on logarithmic heights, an exact rational such as `1/10^9`.
    #[arg(long, value_name = "Q")]
    tolerance: Option<String>,

    #[arg(long, value_enum)]
    format: Option<FormatArg>,

    /// Cap on the number of scanned cells.
    #[arg(long, value_name = "N")]
    max_cells: Option<String>,

    /// Leave the generation time out of JSON reports.
    #[arg(long)]
    no_timestamp: bool,

    /// Write the report here instead of standard output.
    #[arg(long, short, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Field line used when the job has none, e.g. `x^2-2 as s`.
    #[arg(long, value_name = "POLY")]
    field: Option<String>,

    /// Point for `height`, e.g. `3,-2`.
    #[arg(long, value_name = "TUPLE", allow_hyphen_values = true)]
    point: Option<String>,

    /// Matrix such as `[[2,1],[0,2]]`; may be repeated.
    #[arg(long, value_name = "ROWS")]
    matrix: Vec<String>,

    /// TOML file with default caps.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Tsv,
    Json,
}

/// Defaults applied when neither the job nor a flag sets a value.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct Config {
    max_cells: Option<u64>,
    precision_cap: Option<u32>,
    relation_bound: Option<i64>,
    tolerance: Option<String>,
    value_box: Option<i64>,
}

enum Failure {
    Input(String),
    Job(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Job(e)
    }
}

fn read_job(path: &Option<PathBuf>) -> Result<String, Failure> {
    match path {
        None => Ok(String::new()),
        Some(p) if p.as_os_str() == "-" => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Input(format!("stdin: {e}")))?;
            Ok(s)
        }
        Some(p) => std::fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
    }
}

/// Settings given on the command line, as job lines.
fn flag_lines(cli: &Cli, cfg: &Config, job: &JobSpec) -> Vec<String> {
    let mut lines = Vec::new();
    let s = &job.settings;
    let mut put = |key: &str, flag: &Option<String>, config: Option<String>, present: bool| {
        if let Some(v) = flag {
            lines.push(format!("{key} {v}"));
        } else if let (Some(v), false) = (config, present) {
            lines.push(format!("{key} {v}"));
        }
    };
    put("box", &cli.box_bound, None, s.box_bound.is_some());
    put("thresholds", &cli.thresholds, None, s.thresholds.is_some());
    put("tolerance", &cli.tolerance, cfg.tolerance.clone(), s.tolerance.is_some());
    put("max-cells", &cli.max_cells, cfg.max_cells.map(|x| x.to_string()), s.max_cells.is_some());
    put("point", &cli.point, None, s.point.is_some());
    put("precision-cap", &None, cfg.precision_cap.map(|x| x.to_string()), s.precision_cap.is_some());
    put("relation-bound", &None, cfg.relation_bound.map(|x| x.to_string()), s.relation_bound.is_some());
    put("value-box", &None, cfg.value_box.map(|x| x.to_string()), s.value_box.is_some());
    lines
}

fn build_job(cli: &Cli) -> Result<JobSpec, Failure> {
    let cfg: Config = match &cli.config {
        None => Config::default(),
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?
        }
    };
    let text = read_job(&cli.job)?;
    let mut job = parse_job(&text)?;
    if job.field.is_none() {
        if let Some(f) = &cli.field {
            job.field = Some(pep_core::dsl::parse_field_text(f)?);
        }
    }
    // Flag values are parsed in a scratch job that shares the field line.
    let mut scratch = String::new();
    if let Some(f) = &job.field {
        scratch.push_str(&JobSpec { field: Some(f.clone()), ..JobSpec::default() }.to_string());
    }
    for line in flag_lines(cli, &cfg, &job) {
        scratch.push_str(&line);
        scratch.push('\n');
    }
    for (i, m) in cli.matrix.iter().enumerate() {
        scratch.push_str(&format!("matrix cli{} = {m}\n", i + 1));
    }
    let extra = parse_job(&scratch)?;
    let (s, e) = (&mut job.settings, extra.settings);
    macro_rules! take {
        ($($f:ident),*) => { $( if e.$f.is_some() { s.$f = e.$f; } )* };
    }
    take!(box_bound, thresholds, tolerance, max_cells, point, precision_cap, relation_bound, value_box);
    if let Some(fmt) = cli.format {
        s.format = Some(match fmt {
            FormatArg::Tsv => Format::Tsv,
            FormatArg::Json => Format::Json,
        });
    }
    if !extra.matrices.is_empty() {
        job.matrices = extra.matrices;
        job.settings.target = None;
    }
    job.command = Some(cli.command.clone());
    Ok(job)
}

fn render(report: &Report, format: Format, timestamp: bool) -> String {
    match format {
        Format::Tsv => report.tsv.clone(),
        Format::Json => {
            let mut v = serde_json::json!({ "command": report.command, "result": report.json });
            if timestamp {
                let now = std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0);
                v["generated_at"] = now.into();
            }
            let mut s = serde_json::to_string_pretty(&v).expect("serializable");
            s.push('\n');
            s
        }
    }
}

fn emit(text: &str, path: Option<&PathBuf>) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Input(format!("stdout: {e}"))),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Parse => 2,
        ErrorClass::MathDomain => 3,
        ErrorClass::CapExceeded => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json_errors = matches!(cli.format, Some(FormatArg::Json));
    let outcome = build_job(&cli).and_then(|job| {
        let format = job.settings.format.unwrap_or(Format::Tsv);
        let out = cli.output.clone().or_else(|| job.settings.output.clone().map(PathBuf::from));
        let report = run(&job)?;
        emit(&render(&report, format, !cli.no_timestamp), out.as_ref())
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Job(e)) => {
            eprintln!("error[{}]: {e}", e.code());
            if json_errors {
                println!("{}", error_json(&e));
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
