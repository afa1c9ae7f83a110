// orlicz_toolkit.rs
//
// The scalar toolkit behind the gradient estimates: the logarithmically
// perturbed weight and its inverse, the asymptotic bound for that
// inverse, submultiplicativity of the log-power profile, the Fenchel
// conjugate on a finite horizon, the polar sandwich, and the fitted
// constant of the elementary splitting inequality.
//
//     cargo run --example orlicz_toolkit

use pqgl::orlicz::{
    eq_elem_check, fenchel_conjugate, ggp_sandwich_check, hat_inverse_bound,
    l_inverse_asymptotics_check, phi_submultiplicative_check, HatWeight, OrliczWeight,
    PhiFunction,
};
use pqgl::quadrature::logspace;
use pqgl::rational::Rational;
use pqgl::exponents::ExponentSet;

fn main() {
    // L(h) = h^(r-n) log^alpha(e + h), here with r = 6, n = 3, alpha = 2.
    let w = OrliczWeight::new(6.0, 3.0, 2.0).unwrap();
    println!("-- weight and inverse --");
    for h in [0.5, 1.0, 4.0, 100.0] {
        println!("L({h:>5}) = {:.9e}", w.eval(h));
    }
    let mut worst = 0.0f64;
    for tau in logspace(1e-3, 1e9, 400) {
        let t = w.inverse(tau).unwrap();
        worst = worst.max((w.eval(t) - tau).abs() / tau.max(1.0));
    }
    println!("inversion residual over 400 log-spaced targets: {worst:.3e}");

    // Borderline weight r = n: the inverse grows at most exponentially,
    // with an explicit admissibility threshold for the argument.
    println!();
    println!("-- inverse asymptotics on the borderline --");
    let border = OrliczWeight::new(3.0, 3.0, 5.0).unwrap();
    let threshold = (std::f64::consts::E + 1.0).ln().powf(5.0);
    let grid = logspace(threshold * 1.0001, 1e6, 50);
    let report = l_inverse_asymptotics_check(&border, &grid).unwrap();
    println!("admissible above tau = {threshold:.6}");
    println!("worst margin of the exponential bound: {:.3e}", report.worst_margin);

    // phi(t) = t^beta log^alpha(e + t) is submultiplicative up to the
    // explicit constant; the margin stays nonnegative.
    println!();
    println!("-- submultiplicativity of the log-power profile --");
    let phi = PhiFunction::new(3.0, 2.0).unwrap();
    let grid = logspace(1.001, 1e4, 60);
    let mut min_margin = f64::INFINITY;
    for &s in &grid {
        for &t in &grid {
            min_margin = min_margin.min(phi_submultiplicative_check(&phi, s, t).unwrap());
        }
    }
    println!("minimum margin over a 60 x 60 grid: {min_margin:.6e}");

    // Fenchel conjugate of t -> t^3 on a finite horizon, checked against
    // the Young inequality and the closed form 2 (s/3)^(3/2).
    println!();
    println!("-- Fenchel conjugate --");
    let cube = |t: f64| t * t * t;
    for s in [0.3, 1.0, 3.0, 12.0] {
        let star = fenchel_conjugate(cube, s, 1e4).unwrap();
        let exact = 2.0 * (s / 3.0_f64).powf(1.5);
        println!("phi*(s = {s:>4}) = {star:.9}   closed form {exact:.9}");
    }

    // The polar sandwich: from which point onward the polar-style bound
    // traps the conjugate from both sides.
    println!();
    println!("-- polar sandwich --");
    let rep = ggp_sandwich_check(|s| s * s, &logspace(1.0, 100.0, 40)).unwrap();
    println!("quadratic profile: sandwich valid from s0 = {}", rep.s0);
    let rep = ggp_sandwich_check(|s| s, &logspace(1.0, 100.0, 40)).unwrap();
    println!("linear profile:    sandwich valid from s0 = {}", rep.s0);

    // The hat weight of a borderline exponent set and its closed-form
    // inverse bound, against the numeric inverse.
    println!();
    println!("-- hat-weight inverse bound --");
    let e = ExponentSet::new(
        3,
        Rational::from_int(2),
        "7/3".parse().unwrap(),
        Rational::from_int(6),
        Rational::from_int(2),
    )
    .unwrap();
    let hat = HatWeight::from_exponents(&e).unwrap();
    for sigma in [1.0, 2.0, 5.0, 10.0] {
        let bound = hat_inverse_bound(&hat, sigma).unwrap();
        let numeric = hat.inverse(sigma).unwrap();
        println!("sigma = {sigma:>4}: closed form {bound:.6e} >= numeric {numeric:.6e}");
    }

    // The elementary splitting inequality: fitted smallest constant over
    // two sample grids (its sharp value depends on the sampling set).
    println!();
    println!("-- elementary splitting inequality --");
    let ints: Vec<f64> = (0..=10).map(|k| k as f64).collect();
    println!("integers 0..10:   fitted constant {:.12}", eq_elem_check(&w, 2.0, &ints).unwrap());
    let logs: Vec<f64> = (-60..=60).map(|k| 10f64.powf(k as f64 / 20.0)).collect();
    println!("log grid 1e-3..1e3: fitted constant {:.12}", eq_elem_check(&w, 2.0, &logs).unwrap());
}
