//! Functionals and constants against values computed independently with
//! mpmath at 30 significant digits.

use lcnorm::functionals::{adaptive, diff_entropy, lp_norm, mean, riemann, sigma_alpha};
use lcnorm::special::{c_alpha, c_n, d_alpha, d_n};
use lcnorm::{AnalyticDensity, DensityHandle, Exponent, PiecewiseLogLinear};

fn close(got: f64, want: f64, rel: f64) {
    assert!(
        (got - want).abs() <= rel * want.abs(),
        "got {got}, want {want} (relative error {:.2e})",
        (got - want).abs() / want.abs()
    );
}

#[test]
fn constants_match_reference() {
    close(c_alpha(1.0).unwrap(), 5.436_563_656_918_09, 1e-14);
    close(c_alpha(1.5).unwrap(), 4.608_069_871_377_939, 1e-13);
    close(c_alpha(3.0).unwrap(), 3.594_816_577_722_851, 1e-13);
    close(d_alpha(1.5).unwrap(), 1.208_993_965_512_352, 1e-13);
    close(d_alpha(3.0).unwrap(), 1.817_120_592_832_14, 1e-13);
    close(c_n(3).unwrap(), 70.584_854_755_831_85, 1e-13);
    close(d_n(3).unwrap(), 10.197_053_857_751_47, 1e-13);
}

#[test]
fn catalog_functionals_match_reference() {
    let logistic: DensityHandle = AnalyticDensity::logistic(0.0, 1.0).unwrap().into();
    close(
        lp_norm(&logistic, Exponent::Finite(3.0)).unwrap().value,
        0.321_829_794_868_543_3,
        1e-10,
    );
    close(sigma_alpha(&logistic, 3.0).unwrap().value, 2.211_681_127_607_628, 1e-8);

    let gamma: DensityHandle = AnalyticDensity::gamma(3.0, 2.0).unwrap().into();
    close(
        lp_norm(&gamma, Exponent::Finite(2.0)).unwrap().value,
        0.612_372_435_695_794_5,
        1e-12,
    );
    close(diff_entropy(&gamma).unwrap().value, 1.154_431_329_803_066, 1e-12);
    close(sigma_alpha(&gamma, 3.0).unwrap().value, 1.071_161_276_724_977, 1e-8);

    let exp: DensityHandle = AnalyticDensity::exponential(1.0).unwrap().into();
    close(sigma_alpha(&exp, 1.5).unwrap().value, 0.859_011_298_213_252_3, 1e-8);
}

#[test]
fn piecewise_log_linear_functionals_match_reference() {
    let f: DensityHandle = PiecewiseLogLinear::new(vec![-1.0, 0.5], vec![0.0, 0.3], 2.0, -0.7)
        .unwrap()
        .into();
    close(
        lp_norm(&f, Exponent::Finite(2.0)).unwrap().value,
        0.454_598_685_219_673_8,
        1e-13,
    );
    close(
        lp_norm(&f, Exponent::Infinity).unwrap().value,
        0.323_113_319_825_995_1,
        1e-13,
    );
    close(mean(&f).unwrap().value, 0.621_681_334_940_301_1, 1e-13);
    close(sigma_alpha(&f, 2.0).unwrap().value, 1.633_601_812_139_719, 1e-13);
    close(sigma_alpha(&f, 3.0).unwrap().value, 2.096_963_064_161_832, 1e-8);
    close(diff_entropy(&f).unwrap().value, 1.806_605_065_105_946, 1e-13);

    // the two quadratures reach the same values independently
    close(
        adaptive::lp_norm(&f, Exponent::Finite(2.0)).unwrap().value,
        0.454_598_685_219_673_8,
        1e-9,
    );
    close(adaptive::diff_entropy(&f).unwrap().value, 1.806_605_065_105_946, 1e-9);
    close(
        riemann::lp_norm(&f, Exponent::Finite(2.0), 200_000).unwrap().value,
        0.454_598_685_219_673_8,
        1e-7,
    );
    close(
        riemann::sigma_alpha(&f, 3.0, 200_000).unwrap().value,
        2.096_963_064_161_832,
        1e-6,
    );
}
