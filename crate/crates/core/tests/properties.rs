use proptest::prelude::*;

use lcnorm::functionals::{lp_norm, renyi_entropy};
use lcnorm::generator::generate;
use lcnorm::inequality::{check_finite_measure_inequality, check_lemma3, GaussianMixture};
use lcnorm::{check_claim, ClaimId, ClaimParams, DensityHandle, DensitySpec, Exponent, GeneratorConfig};

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![
        4 => (1.0f64..80.0).prop_map(Exponent::Finite),
        1 => Just(Exponent::Infinity),
    ]
}

fn pll() -> impl Strategy<Value = DensityHandle> {
    (any::<u64>(), 0u64..10_000).prop_map(|(seed, i)| generate(&GeneratorConfig::with_seed(seed), i).unwrap())
}

fn mixture() -> impl Strategy<Value = GaussianMixture> {
    prop::collection::vec((0.1f64..1.0, -6.0f64..6.0, 0.2f64..3.0), 1..4).prop_map(|parts| {
        let (w, rest): (Vec<f64>, Vec<(f64, f64)>) = parts.into_iter().map(|(w, m, s)| (w, (m, s))).unzip();
        let (m, s) = rest.into_iter().unzip();
        GaussianMixture::new(w, m, s).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn one_dimensional_claims_hold(f in pll(), p in exponent(), q in exponent(), alpha in 1.0f64..5.0) {
        let params = ClaimParams { p, q, alpha, interval: None };
        for claim in ClaimId::all_1d() {
            let needs_symmetry = matches!(claim, ClaimId::SymmetricNormRatio | ClaimId::SymmetricCenterValue);
            if claim == ClaimId::FiniteMeasure || (needs_symmetry && f.symmetry_center().is_none()) {
                continue;
            }
            let v = check_claim(claim, &f, &params).unwrap();
            prop_assert!(v.holds, "{claim} failed: {v:?}");
            prop_assert!(v.tightness <= 1.0 + v.tol);
        }
    }

    #[test]
    fn tightness_is_scale_and_shift_invariant(f in pll(), c in 0.05f64..20.0, t in -50.0f64..50.0, p in exponent(), q in exponent()) {
        let g = f.affine_image(c, t).unwrap();
        let params = ClaimParams { p, q, alpha: 2.0, interval: None };
        let a = check_claim(ClaimId::NormRatio, &f, &params).unwrap().tightness;
        let b = check_claim(ClaimId::NormRatio, &g, &params).unwrap().tightness;
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn reflection_keeps_every_functional(f in pll(), p in exponent()) {
        let g = f.affine_image(-1.0, 0.0).unwrap();
        let (a, b) = (lp_norm(&f, p).unwrap().value, lp_norm(&g, p).unwrap().value);
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn renyi_entropy_decreases_in_order(f in pll(), p in 1.01f64..40.0, dp in 0.01f64..20.0) {
        let lo = renyi_entropy(&f, Exponent::Finite(p)).unwrap().value;
        let hi = renyi_entropy(&f, Exponent::Finite(p + dp)).unwrap().value;
        prop_assert!(hi <= lo + 1e-12 * lo.abs().max(1.0));
    }

    #[test]
    fn spec_json_round_trips(f in pll()) {
        let spec = f.to_spec();
        let back = DensitySpec::from_json(&spec.to_json()).unwrap();
        prop_assert_eq!(back.digest(), spec.digest());
        // loading renormalizes, which may move log values by rounding
        let loaded = back.load().unwrap().handle;
        for x in [-8.0, -1.0, 0.0, 0.3, 2.0, 9.0] {
            prop_assert!((loaded.log_density(x) - f.log_density(x)).abs() <= 1e-12 * f.log_density(x).abs().max(1.0));
        }
    }

    #[test]
    fn exponent_text_round_trips(p in exponent()) {
        let back: Exponent = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    // these two bounds need no log-concavity
    #[test]
    fn general_density_bounds_hold_for_mixtures(m in mixture(), p in exponent(), a in -5.0f64..5.0, w in 0.1f64..6.0) {
        prop_assert!(check_lemma3(&m, p).unwrap().holds);
        let q = match p {
            Exponent::Finite(v) => Exponent::Finite(v * 1.5),
            Exponent::Infinity => Exponent::Infinity,
        };
        prop_assert!(check_finite_measure_inequality(&m, (a, a + w), p, q).unwrap().holds);
    }
}
