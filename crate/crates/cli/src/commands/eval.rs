use std::io::Write;

use serde::{Deserialize, Serialize};

use lcnorm::functionals::{
    adaptive, diff_entropy, lp_norm, mean, renyi_entropy, riemann, sigma_alpha, FunctionalKind, FunctionalValue,
};
use lcnorm::{DensityHandle, DensitySpec, Exponent};

use super::{format_or, load_density, sink, write_json, Status};
use crate::args::{EvalArgs, Method, OutFormat};
use crate::error::{CliError, CliResult};
use crate::format::{sig, write_table};
use crate::manifest::RunManifest;

#[derive(Debug, Serialize, Deserialize)]
struct EvalInputs {
    density: DensitySpec,
    lp: Vec<Exponent>,
    sigma: Vec<f64>,
    renyi: Vec<Exponent>,
    entropy: bool,
    supnorm: bool,
    mean: bool,
    method: Method,
    points: usize,
}

#[derive(Serialize)]
struct Report<'a> {
    manifest: &'a RunManifest<EvalInputs>,
    family: &'static str,
    params_digest: String,
    log_normalization: f64,
    values: Vec<FunctionalValue>,
}

fn renyi_from_norm(p: Exponent, norm: FunctionalValue) -> FunctionalValue {
    let (value, err) = match p {
        Exponent::Infinity => (-norm.value.ln(), norm.error_estimate / norm.value),
        Exponent::Finite(v) => {
            let factor = v / (1.0 - v);
            (
                factor * norm.value.ln(),
                factor.abs() * norm.error_estimate / norm.value,
            )
        }
    };
    FunctionalValue {
        kind: FunctionalKind::RenyiEntropy { p },
        value,
        error_estimate: err,
        method: norm.method,
    }
}

fn evaluate(f: &DensityHandle, inputs: &EvalInputs) -> CliResult<Vec<FunctionalValue>> {
    let n = inputs.points;
    let mut out = Vec::new();
    let mut lp_list = inputs.lp.clone();
    if inputs.supnorm && !lp_list.contains(&Exponent::Infinity) {
        lp_list.push(Exponent::Infinity);
    }
    let norm = |p: Exponent| -> CliResult<FunctionalValue> {
        Ok(match inputs.method {
            Method::Auto => lp_norm(f, p)?,
            Method::Adaptive => adaptive::lp_norm(f, p)?,
            Method::Riemann => riemann::lp_norm(f, p, n)?,
        })
    };
    if inputs.mean {
        out.push(match inputs.method {
            Method::Auto => mean(f)?,
            Method::Adaptive => adaptive::mean(f)?,
            Method::Riemann => riemann::mean(f, n)?,
        });
    }
    for &p in &lp_list {
        out.push(norm(p)?);
    }
    for &alpha in &inputs.sigma {
        out.push(match inputs.method {
            Method::Auto => sigma_alpha(f, alpha)?,
            Method::Adaptive => adaptive::sigma_alpha(f, alpha, adaptive::mean(f)?.value)?,
            Method::Riemann => riemann::sigma_alpha(f, alpha, n)?,
        });
    }
    if inputs.entropy {
        out.push(match inputs.method {
            Method::Auto => diff_entropy(f)?,
            Method::Adaptive => adaptive::diff_entropy(f)?,
            Method::Riemann => riemann::diff_entropy(f, n)?,
        });
    }
    for &p in &inputs.renyi {
        out.push(match inputs.method {
            Method::Auto => renyi_entropy(f, p)?,
            _ => {
                if let Exponent::Finite(v) = p.validate()? {
                    if v <= 1.0 {
                        return Err(lcnorm::Error::Domain(format!("Rényi entropy needs p > 1, got {v}")).into());
                    }
                }
                renyi_from_norm(p, norm(p)?)
            }
        });
    }
    Ok(out)
}

pub fn run(args: EvalArgs) -> CliResult<Status> {
    let (spec, loaded) = load_density(&args.density)?;
    let inputs = EvalInputs {
        density: spec.clone(),
        lp: args.lp,
        sigma: args.sigma,
        renyi: args.renyi,
        entropy: args.entropy,
        supnorm: args.supnorm,
        mean: args.mean,
        method: args.method,
        points: args.points,
    };
    if inputs.lp.is_empty()
        && inputs.sigma.is_empty()
        && inputs.renyi.is_empty()
        && !(inputs.entropy || inputs.supnorm || inputs.mean)
    {
        return Err(CliError::usage(
            "nothing to evaluate; pass --lp, --sigma, --renyi, --entropy, --supnorm or --mean",
        ));
    }
    let f = &loaded.handle;
    let values = evaluate(f, &inputs)?;
    let manifest = RunManifest::new("eval", 0, None, inputs);

    let mut out = sink(&args.output)?;
    match format_or(&args.output, OutFormat::Json) {
        OutFormat::Json => write_json(
            &mut out,
            &Report {
                manifest: &manifest,
                family: f.family(),
                params_digest: spec.digest(),
                log_normalization: loaded.log_normalization,
                values,
            },
        )?,
        OutFormat::Csv => {
            let err = |e| CliError::io("<output>", e);
            writeln!(out, "functional,value,error_estimate,method").map_err(err)?;
            for v in &values {
                writeln!(out, "{},{},{},{}", v.kind, v.value, v.error_estimate, v.method).map_err(err)?;
            }
        }
        OutFormat::Text => {
            let rows: Vec<Vec<String>> = values
                .iter()
                .map(|v| {
                    vec![
                        v.kind.to_string(),
                        sig(v.value),
                        sig(v.error_estimate),
                        v.method.to_string(),
                    ]
                })
                .collect();
            write_table(&mut out, &["functional", "value", "error", "method"], &rows)?;
            if loaded.log_normalization != 0.0 {
                writeln!(out, "input mass was e^{}", sig(loaded.log_normalization))
                    .map_err(|e| CliError::io("<output>", e))?;
            }
        }
    }
    Ok(Status::Ok)
}
