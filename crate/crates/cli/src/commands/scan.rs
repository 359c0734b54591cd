use serde::{Deserialize, Serialize};

use lcnorm::search::tightness_landscape;
use lcnorm::{ClaimId, DensitySpec, Exponent};

use super::{format_or, parse_density, sink, write_json, write_rows_csv, Status, VerdictReport};
use crate::args::{OutFormat, ScanArgs};
use crate::error::{CliError, CliResult};
use crate::format::{sig, write_table};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanInputs {
    pub claim: ClaimId,
    pub density: DensitySpec,
    pub ps: Vec<Exponent>,
    pub qs: Vec<Exponent>,
    pub alphas: Vec<f64>,
}

pub fn run(args: ScanArgs) -> CliResult<Status> {
    let manifest = match &args.replay.replay {
        Some(path) => RunManifest::<ScanInputs>::read(path, "scan")?,
        None => {
            let claim = args
                .claim
                .ok_or_else(|| CliError::usage("scan needs a claim and a density"))?;
            let density = args
                .density
                .as_deref()
                .ok_or_else(|| CliError::usage("scan needs a density after the claim"))?;
            let inputs = ScanInputs {
                claim,
                density: parse_density(density)?,
                ps: args.p.clone(),
                qs: args.q.clone(),
                alphas: args.alpha.clone(),
            };
            RunManifest::new("scan", 0, None, inputs)
        }
    };
    if let Some(path) = &args.replay.manifest {
        manifest.write(path)?;
    }
    let inputs = &manifest.inputs;
    if inputs.claim.is_multivariate() {
        return Err(CliError::usage(format!(
            "`{}` is multivariate; use `check --family`",
            inputs.claim
        )));
    }
    for p in inputs.ps.iter().chain(&inputs.qs) {
        p.validate()?;
    }
    let f = inputs.density.load()?.handle;
    let rows = tightness_landscape(inputs.claim, &f, &inputs.ps, &inputs.qs, &inputs.alphas)?;
    let violations = rows.iter().filter(|r| !r.verdict.holds).count();

    let mut out = sink(&args.output)?;
    match format_or(&args.output, OutFormat::Csv) {
        OutFormat::Json => write_json(
            &mut out,
            &VerdictReport {
                manifest: &manifest,
                verdicts: rows.len(),
                violations,
                rows: &rows,
            },
        )?,
        OutFormat::Csv => write_rows_csv(&mut out, &rows)?,
        OutFormat::Text => {
            let opt = |e: Option<Exponent>| e.map(|e| e.to_string()).unwrap_or_default();
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let v = &r.verdict;
                    vec![
                        opt(v.inputs.p),
                        opt(v.inputs.q),
                        v.inputs.alpha.map(sig).unwrap_or_default(),
                        sig(v.tightness),
                        sig(v.margin),
                        v.holds.to_string(),
                    ]
                })
                .collect();
            write_table(&mut out, &["p", "q", "alpha", "tightness", "margin", "holds"], &table)?;
        }
    }
    Ok(if violations == 0 { Status::Ok } else { Status::Violation })
}
