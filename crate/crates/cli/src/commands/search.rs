use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use lcnorm::inequality::VerdictRow;
use lcnorm::{maximize_tightness, ClaimParams, SearchOutcome, SearchProblem};

use super::{format_or, sink, write_json, write_rows_csv, Status};
use crate::args::{OutFormat, SearchArgs};
use crate::error::{CliError, CliResult};
use crate::format::sig;
use crate::manifest::RunManifest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchInputs {
    pub problem: SearchProblem,
}

#[derive(Serialize)]
struct Report<'a> {
    manifest: &'a RunManifest<SearchInputs>,
    outcome: &'a SearchOutcome,
}

fn write_witness(path: &PathBuf, value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Json {
        context: "serializing witness".into(),
        source: e,
    })?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

pub fn run(args: SearchArgs) -> CliResult<Status> {
    let manifest = match &args.replay.replay {
        Some(path) => RunManifest::<SearchInputs>::read(path, "search")?,
        None => {
            let claim = args
                .claim
                .ok_or_else(|| CliError::usage("search needs a claim, e.g. `lcnorm search lemma4`"))?;
            let params = ClaimParams {
                p: args.p,
                q: args.q,
                alpha: args.alpha,
                interval: None,
            };
            let problem = SearchProblem {
                budget: args.budget,
                restarts: args.restarts,
                counterexample_tol: args.tol,
                ..SearchProblem::new(claim, args.family, params)
            };
            RunManifest::new("search", args.seed, Some(args.tol), SearchInputs { problem })
        }
    };
    if let Some(path) = &args.replay.manifest {
        manifest.write(path)?;
    }
    let problem = &manifest.inputs.problem;
    if problem.budget == 0 || problem.restarts == 0 {
        return Err(CliError::usage("--budget and --restarts must be positive"));
    }

    let outcome = match maximize_tightness(problem, manifest.seed) {
        Ok(o) => o,
        Err(lcnorm::Error::Counterexample {
            claim,
            ratio,
            tol,
            witness,
        }) => {
            let path = args
                .witness
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("counterexample-{claim}.json")));
            write_witness(&path, &witness)?;
            eprintln!("witness written to {}", path.display());
            return Err(lcnorm::Error::Counterexample {
                claim,
                ratio,
                tol,
                witness,
            }
            .into());
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = &args.witness {
        write_witness(path, &outcome.witness)?;
    }
    if outcome.budget_exhausted {
        log::warn!("every restart used its full budget without converging");
    }

    let mut out = sink(&args.output)?;
    let err = |e| CliError::io("<output>", e);
    match format_or(&args.output, OutFormat::Text) {
        OutFormat::Json => write_json(
            &mut out,
            &Report {
                manifest: &manifest,
                outcome: &outcome,
            },
        )?,
        OutFormat::Csv => {
            let row = VerdictRow::new(
                Arc::from(outcome.family.to_string()),
                Arc::from(outcome.witness.digest()),
                outcome.verdict,
            );
            write_rows_csv(&mut out, &[row])?;
        }
        OutFormat::Text => {
            writeln!(out, "claim        {}", outcome.claim).map_err(err)?;
            writeln!(out, "family       {}", outcome.family).map_err(err)?;
            writeln!(out, "best ratio   {}", sig(outcome.best_ratio)).map_err(err)?;
            writeln!(out, "margin       {}", sig(outcome.verdict.margin)).map_err(err)?;
            writeln!(out, "evaluations  {}", outcome.evaluations).map_err(err)?;
            let params: Vec<String> = outcome.best_params.iter().map(|v| sig(*v)).collect();
            writeln!(out, "parameters   [{}]", params.join(", ")).map_err(err)?;
            writeln!(out, "witness      {}", outcome.witness.to_json()).map_err(err)?;
        }
    }
    out.flush().map_err(err)?;
    Ok(Status::Ok)
}
