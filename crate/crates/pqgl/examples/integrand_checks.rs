// integrand_checks.rs
//
// Builds the three catalog densities — the power law, the variable
// power law, and the double-phase density with a log-perturbed second
// phase — and verifies the structural assumptions each must satisfy:
// ellipticity ratios, the growth envelope, the mixed-derivative bound,
// and the fitted approximation constants.
//
//     cargo run --example integrand_checks

use pqgl::exponents::ExponentSet;
use pqgl::integrand::{
    fit_approx_bounds, orlicz_norm_h, verify_ellipticity, verify_growth, verify_mixed_bound,
    Integrand, Profile, SampleOpts,
};
use pqgl::rational::Rational;

fn check(label: &str, i: &Integrand) {
    let opts = SampleOpts { count: 4000, seed: 7 };
    println!("== {label} ==");
    let (lo, hi) = verify_ellipticity(i, &opts).unwrap();
    println!("  ellipticity ratio within [{lo:.6}, {hi:.6}]");
    let (lower, upper) = verify_growth(i, &opts).unwrap();
    println!("  growth envelope margins: lower {lower:.3e}, upper {upper:.3e}");
    let mixed = verify_mixed_bound(i, &opts).unwrap();
    println!("  mixed-derivative margin: {mixed:.3e}");
    let bounds = fit_approx_bounds(i, &opts).unwrap();
    println!(
        "  fitted constants: ell = {:.6}, lambda~ = {:.6}, Lambda~ = {:.6}, c_mix = {:.6}",
        bounds.ell, bounds.lambda_tilde, bounds.big_lambda_tilde, bounds.c_mix
    );
    println!();
}

fn main() {
    // Shared exponents for the x-dependent members: a borderline set.
    let e = ExponentSet::new(
        2,
        Rational::from_int(2),
        "5/2".parse().unwrap(),
        Rational::from_int(4),
        Rational::from_int(1),
    )
    .unwrap();

    // Pure power law: autonomous, so the mixed bound is trivial.
    let e1 = ExponentSet::new(
        2,
        Rational::from_int(3),
        Rational::from_int(3),
        Rational::from_int(2),
        "25".parse().unwrap(),
    )
    .unwrap();
    let k1 = Integrand::k1(e1, 2).unwrap();
    check("power law, p = 3", &k1);

    // Weighted single-phase member driven by a smooth sine profile;
    // the weight demands equal growth exponents.
    let e2 = ExponentSet::new(
        2,
        Rational::from_int(2),
        Rational::from_int(2),
        Rational::from_int(2),
        Rational::from_int(9),
    )
    .unwrap();
    let k2 = Integrand::k2(e2, 2, Profile::Sine { mid: 1.5, amp: 0.5 }).unwrap();
    check("weighted single-phase", &k2);

    // Double phase: p-phase plus a log-perturbed q-phase with a smooth
    // modulating coefficient.
    let k3 = Integrand::k3(e.clone(), 2, Profile::Sine { mid: 1.5, amp: 0.5 }).unwrap();
    check("double phase with log-perturbed q-phase", &k3);

    // The coefficient's Orlicz norm over the inner half-ball feeds the
    // constants of the energy estimates; its square is reported too.
    println!("== coefficient norm of the double-phase member ==");
    let norm = orlicz_norm_h(&k3, [0.0; 3], 0.5).unwrap();
    println!(
        "  ||h|| = {:.9}, squared {:.9} (quadrature drift {:.2e})",
        norm.value, norm.h_squared, norm.rel_change
    );

    // Truncating the q-phase and mollifying the coefficient produces the
    // regularized members the approximation ladder climbs.
    println!();
    println!("== regularized members ==");
    let truncated = k3.truncate(4.0).unwrap();
    println!("  truncation level k = {:?}", truncated.truncation_level());
    let mollified = truncated.mollify(0.1, &Default::default()).unwrap();
    println!("  mollification radius eps = {:?}", mollified.mollification_radius());
    let opts = SampleOpts { count: 2000, seed: 11 };
    let (lower, upper) = verify_growth(&mollified, &opts).unwrap();
    println!("  regularized growth margins: lower {lower:.3e}, upper {upper:.3e}");
}
