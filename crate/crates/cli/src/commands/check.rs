use serde::{Deserialize, Serialize};

use lcnorm::generator::generate_batch;
use lcnorm::inequality::{sweep_1d, SweepGrid, VerdictRow};
use lcnorm::multivariate::{default_families, sweep_nd};
use lcnorm::{catalog_members, ClaimId, DensityHandle, DensitySpec, GeneratorConfig};

use super::{format_or, parse_density, sink, write_json, write_rows_csv, Status, VerdictReport};
use crate::args::{CheckArgs, NdFamily, OutFormat};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomInputs {
    pub generator: GeneratorConfig,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultivariateInputs {
    pub families: Vec<NdFamily>,
    pub dims: Vec<usize>,
}

/// Everything a check run depends on besides the tolerance and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckInputs {
    pub densities: Vec<DensitySpec>,
    pub catalog: bool,
    pub random: Option<RandomInputs>,
    pub multivariate: Option<MultivariateInputs>,
    pub claims: Vec<ClaimId>,
    pub grid: SweepGrid,
}

fn inputs_from_args(args: &CheckArgs) -> CliResult<CheckInputs> {
    let nd = !args.family.is_empty();
    let mut claims = match &args.claims {
        Some(list) => ClaimId::parse_list(&list.join(","))?,
        None if nd => ClaimId::all_nd(),
        None => ClaimId::all_1d(),
    };
    if args.tightened {
        let mut mapped = Vec::new();
        for c in claims {
            let t = c.tightened().unwrap_or(c);
            if !mapped.contains(&t) {
                mapped.push(t);
            }
        }
        claims = mapped;
    }

    let default = SweepGrid::default();
    let grid = SweepGrid {
        ps: args.p.clone().unwrap_or(default.ps),
        qs: args.q.clone().unwrap_or(default.qs),
        alphas: args.alpha.clone().unwrap_or(default.alphas),
    };

    let densities = args
        .densities
        .iter()
        .map(|d| parse_density(d))
        .collect::<CliResult<Vec<_>>>()?;
    let random = args.random.map(|count| RandomInputs {
        generator: GeneratorConfig::with_seed(args.seed),
        count,
    });
    let multivariate = nd.then(|| MultivariateInputs {
        families: args.family.clone(),
        dims: args.n.clone(),
    });

    let has_1d = !densities.is_empty() || args.catalog || random.is_some();
    if !has_1d && !nd {
        return Err(CliError::usage(
            "nothing to check; give density specs, --catalog, --random N or --family",
        ));
    }
    if claims.iter().any(|c| c.is_multivariate()) && !nd {
        return Err(CliError::usage(
            "multivariate claims need --family gaussian-nd and/or product",
        ));
    }
    if claims.iter().all(|c| c.is_multivariate()) && has_1d {
        return Err(CliError::usage(
            "densities on the line were given but every claim is multivariate",
        ));
    }
    Ok(CheckInputs {
        densities,
        catalog: args.catalog,
        random,
        multivariate,
        claims,
        grid,
    })
}

/// Runs the checks described by a manifest.
pub fn execute(manifest: &RunManifest<CheckInputs>) -> CliResult<Vec<VerdictRow>> {
    let inputs = &manifest.inputs;
    let tol = manifest.tolerances.verdict;
    let mut rows = Vec::new();

    let mut densities: Vec<DensityHandle> = inputs
        .densities
        .iter()
        .map(|s| s.load().map(|l| l.handle))
        .collect::<lcnorm::Result<_>>()?;
    if inputs.catalog {
        densities.extend(catalog_members());
    }
    if let Some(r) = &inputs.random {
        densities.extend(generate_batch(&r.generator, r.count)?);
    }
    let claims_1d: Vec<ClaimId> = inputs.claims.iter().copied().filter(|c| !c.is_multivariate()).collect();
    if !densities.is_empty() && !claims_1d.is_empty() {
        rows.extend(sweep_1d(&densities, &inputs.grid, &claims_1d, tol)?);
    }

    if let Some(m) = &inputs.multivariate {
        let claims_nd: Vec<ClaimId> = inputs.claims.iter().copied().filter(|c| c.is_multivariate()).collect();
        for &n in &m.dims {
            let fams: Vec<_> = default_families(n, manifest.seed)?
                .into_iter()
                .filter(|f| {
                    let name = f.family();
                    m.families.iter().any(|fam| match fam {
                        NdFamily::GaussianNd => name.starts_with("gaussian"),
                        NdFamily::Product => name.starts_with("product"),
                    })
                })
                .collect();
            rows.extend(sweep_nd(&fams, &inputs.grid.ps, &inputs.grid.qs, &claims_nd, tol)?);
        }
    }
    Ok(rows)
}

pub fn run(args: CheckArgs) -> CliResult<Status> {
    let manifest = match &args.replay.replay {
        Some(path) => RunManifest::<CheckInputs>::read(path, "check")?,
        None => RunManifest::new("check", args.seed, args.tol, inputs_from_args(&args)?),
    };
    if let Some(path) = &args.replay.manifest {
        manifest.write(path)?;
    }
    let rows = execute(&manifest)?;
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
        OutFormat::Csv | OutFormat::Text => write_rows_csv(&mut out, &rows)?,
    }
    eprintln!("{} verdicts, {violations} violations", rows.len());
    for r in rows.iter().filter(|r| !r.verdict.holds).take(10) {
        let v = &r.verdict;
        eprintln!(
            "violation: {} on {} [{}] margin {:e} tightness {}",
            v.claim, r.family, r.params_digest, v.margin, v.tightness
        );
    }
    Ok(if violations == 0 { Status::Ok } else { Status::Violation })
}
