use std::io::Write;

use serde::Serialize;

use lcnorm::special::{c_alpha, c_n, d_alpha, d_n};

use super::{format_or, sink, write_json, Status};
use crate::args::{ConstantsArgs, OutFormat};
use crate::error::{CliError, CliResult};
use crate::format::{sig, write_table};

#[derive(Serialize)]
struct AlphaRow {
    alpha: f64,
    c_alpha: f64,
    d_alpha: f64,
}

#[derive(Serialize)]
struct DimRow {
    n: usize,
    c_n: f64,
    d_n: f64,
}

#[derive(Serialize)]
struct Report {
    alpha: Vec<AlphaRow>,
    dimension: Vec<DimRow>,
}

pub fn run(args: ConstantsArgs) -> CliResult<Status> {
    let mut report = Report {
        alpha: Vec::new(),
        dimension: Vec::new(),
    };
    for &alpha in &args.alpha {
        report.alpha.push(AlphaRow {
            alpha,
            c_alpha: c_alpha(alpha)?,
            d_alpha: d_alpha(alpha)?,
        });
    }
    for &n in &args.n {
        report.dimension.push(DimRow {
            n,
            c_n: c_n(n)?,
            d_n: d_n(n)?,
        });
    }

    let mut out = sink(&args.output)?;
    let err = |e| CliError::io("<output>", e);
    match format_or(&args.output, OutFormat::Text) {
        OutFormat::Json => write_json(&mut out, &report)?,
        OutFormat::Csv => {
            writeln!(out, "kind,param,c,d").map_err(err)?;
            for r in &report.alpha {
                writeln!(out, "alpha,{},{},{}", r.alpha, r.c_alpha, r.d_alpha).map_err(err)?;
            }
            for r in &report.dimension {
                writeln!(out, "n,{},{},{}", r.n, r.c_n, r.d_n).map_err(err)?;
            }
        }
        OutFormat::Text => {
            let rows: Vec<Vec<String>> = report
                .alpha
                .iter()
                .map(|r| vec![sig(r.alpha), sig(r.c_alpha), sig(r.d_alpha)])
                .collect();
            write_table(&mut out, &["alpha", "C_alpha", "D_alpha"], &rows)?;
            writeln!(out).map_err(err)?;
            let rows: Vec<Vec<String>> = report
                .dimension
                .iter()
                .map(|r| vec![r.n.to_string(), sig(r.c_n), sig(r.d_n)])
                .collect();
            write_table(&mut out, &["n", "C(n)", "D(n)"], &rows)?;
        }
    }
    Ok(Status::Ok)
}
