use criterion::{criterion_group, criterion_main, Criterion};

use lcnorm::{maximize_tightness, ClaimId, ClaimParams, SearchFamily, SearchProblem};

fn bench_search(c: &mut Criterion) {
    let mut g = c.benchmark_group("search");
    g.sample_size(10);
    for (claim, family) in [
        (ClaimId::SupNormL2, SearchFamily::Pll(3)),
        (ClaimId::EntropyUpper, SearchFamily::Gaussian),
        (ClaimId::NormRatio, SearchFamily::Catalog),
    ] {
        let problem = SearchProblem::new(claim, family, ClaimParams::default());
        g.bench_function(format!("{claim}/{family}"), |b| {
            b.iter(|| maximize_tightness(&problem, 0).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench_search);
criterion_main!(benches);
