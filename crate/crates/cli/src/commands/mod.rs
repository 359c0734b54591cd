mod check;
mod constants;
mod eval;
mod scan;
mod search;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use lcnorm::density::LoadedDensity;
use lcnorm::inequality::report::{write_csv, VerdictRow};
use lcnorm::DensitySpec;
use serde::Serialize;

use crate::args::{Command, OutFormat, Output};
use crate::error::{CliError, CliResult};

/// How a command finished when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Violation,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Violation => 2,
        }
    }
}

pub fn run(command: Command) -> CliResult<Status> {
    match command {
        Command::Constants(a) => constants::run(a),
        Command::Eval(a) => eval::run(a),
        Command::Check(a) => check::run(a),
        Command::Search(a) => search::run(a),
        Command::Scan(a) => scan::run(a),
    }
}

/// Reads a density argument: a path to a JSON spec, inline JSON, or one of
/// the catalog shorthands `family:key=value,...` and `family(a,b)`.
pub fn parse_density(arg: &str) -> CliResult<DensitySpec> {
    let trimmed = arg.trim();
    if trimmed.starts_with('{') {
        return Ok(DensitySpec::from_json(trimmed)?);
    }
    let path = Path::new(trimmed);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        return DensitySpec::from_json(&text)
            .map_err(|e| CliError::Core(lcnorm::Error::Parse(format!("{}: {e}", path.display()))));
    }
    if let Some(spec) = parse_positional(trimmed)? {
        return Ok(spec);
    }
    let (family, rest) = trimmed.split_once(':').unwrap_or((trimmed, ""));
    if family.is_empty() || family.contains(['/', '.', '\\']) {
        return Err(CliError::usage(format!("no such density file `{arg}`")));
    }
    let mut params = BTreeMap::new();
    for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("expected key=value in `{item}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("`{}` is not a number in `{item}`", v.trim())))?;
        params.insert(k.trim().to_string(), v);
    }
    Ok(DensitySpec {
        family: Some(family.to_string()),
        params: Some(params),
        ..DensitySpec::default()
    })
}

fn positional_names(family: &str) -> Option<&'static [&'static str]> {
    Some(match family {
        "gaussian" | "normal" => &["mean", "sd"],
        "exponential" => &["rate"],
        "laplace" | "logistic" => &["location", "scale"],
        "uniform" => &["low", "high"],
        "gamma" => &["shape", "rate"],
        _ => return None,
    })
}

// `gaussian(0,1)`; a single argument for a two-parameter family is the scale
fn parse_positional(arg: &str) -> CliResult<Option<DensitySpec>> {
    let Some((family, rest)) = arg.split_once('(') else {
        return Ok(None);
    };
    let inner = rest
        .strip_suffix(')')
        .ok_or_else(|| CliError::usage(format!("missing `)` in `{arg}`")))?;
    let family = family.trim();
    let names =
        positional_names(family).ok_or_else(|| CliError::usage(format!("unknown density family `{family}`")))?;
    let values = inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| CliError::usage(format!("`{v}` is not a number in `{arg}`")))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    let names: &[&str] = match (names.len(), values.len()) {
        (n, k) if n == k => names,
        (2, 1) if family != "uniform" && family != "gamma" => &names[1..],
        (1, 1) | (2, 1) => &names[..1],
        _ => {
            return Err(CliError::usage(format!(
                "{family} takes {} parameters, got {}",
                names.len(),
                values.len()
            )))
        }
    };
    let params = names.iter().map(|k| k.to_string()).zip(values).collect();
    Ok(Some(DensitySpec {
        family: Some(family.to_string()),
        params: Some(params),
        ..DensitySpec::default()
    }))
}

pub fn load_density(arg: &str) -> CliResult<(DensitySpec, LoadedDensity)> {
    let spec = parse_density(arg)?;
    let loaded = spec.load()?;
    Ok((spec, loaded))
}

/// Opens the report destination.
pub fn sink(output: &Output) -> CliResult<Box<dyn Write>> {
    Ok(match &output.output {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

pub fn format_or(output: &Output, default: OutFormat) -> OutFormat {
    output.format.unwrap_or(default)
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::Json {
        context: "writing report".into(),
        source: e,
    })?;
    writeln!(out).map_err(|e| CliError::io("<output>", e))?;
    out.flush().map_err(|e| CliError::io("<output>", e))
}

pub fn write_rows_csv(out: &mut dyn Write, rows: &[VerdictRow]) -> CliResult<()> {
    write_csv(rows, &mut *out)?;
    out.flush().map_err(|e| CliError::io("<output>", e))
}

/// Verdict report with its manifest embedded.
#[derive(Serialize)]
pub struct VerdictReport<'a, M: Serialize> {
    pub manifest: &'a M,
    pub verdicts: usize,
    pub violations: usize,
    pub rows: &'a [VerdictRow],
}
