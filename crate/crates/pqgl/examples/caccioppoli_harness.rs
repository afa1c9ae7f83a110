// caccioppoli_harness.rs
//
// Solves a double-phase problem, then tests the weighted energy
// inequality on the discrete minimizer: second derivatives against the
// cutoff on the left, coefficient-gradient and cutoff-gradient terms on
// the right, for a family of stabilization exponents gamma. The fitted
// constant should neither explode nor collapse as gamma grows or the
// grid refines.
//
//     cargo run --example caccioppoli_harness

use pqgl::estimates::{caccioppoli_check, Cutoff};
use pqgl::exponents::ExponentSet;
use pqgl::integrand::{Integrand, Profile};
use pqgl::rational::Rational;
use pqgl::solver::{minimize, BoundaryData, Grid, SolverOptions};

fn main() {
    let e = ExponentSet::new(
        2,
        Rational::from_int(2),
        "11/5".parse().unwrap(),
        Rational::from_int(4),
        Rational::zero(),
    )
    .unwrap();
    let integrand = Integrand::k3(e, 2, Profile::Sine { mid: 1.5, amp: 0.5 }).unwrap();
    let cutoff = Cutoff::new(0.25, 0.5).unwrap();
    let opts = SolverOptions { tol: 1e-7, ..Default::default() };

    for m in [33usize, 65] {
        let grid = Grid::new(2, 1.0, m).unwrap();
        let (field, report) =
            minimize(grid, &integrand, &BoundaryData::HarmonicQuartic, &opts).unwrap();
        println!(
            "== m = {m} (iterations {}, gradient sup {:.2e}) ==",
            report.iterations, report.grad_sup
        );
        println!(
            "{:>6} {:>14} {:>14} {:>14} {:>14} {:>10}",
            "gamma", "lhs", "rhs[coeff]", "rhs[cut,p]", "rhs[cut,q]", "fitted C"
        );
        for gamma in [0.0, 2.0, 4.0] {
            let rep = caccioppoli_check(&field, &integrand, &cutoff, gamma).unwrap();
            println!(
                "{:>6} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>10.6}",
                gamma, rep.lhs, rep.rhs[0], rep.rhs[1], rep.rhs[2], rep.fitted_c
            );
        }
        println!();
    }

    // With affine boundary data the minimizer of the autonomous power
    // law is itself affine: second derivatives vanish identically and
    // the left side of the inequality is exactly zero.
    let e1 = ExponentSet::new(
        2,
        Rational::from_int(2),
        Rational::from_int(2),
        Rational::from_int(2),
        Rational::from_int(9),
    )
    .unwrap();
    let k1 = Integrand::k1(e1, 2).unwrap();
    let grid = Grid::new(2, 1.0, 33).unwrap();
    let (field, _) = minimize(
        grid,
        &k1,
        &BoundaryData::Linear { b: [0.75, -0.5, 0.0] },
        &SolverOptions::default(),
    )
    .unwrap();
    let rep = caccioppoli_check(&field, &k1, &Cutoff::new(0.25, 0.5).unwrap(), 0.0).unwrap();
    println!("affine data on the power law: lhs = {:?} (exactly zero)", rep.lhs);
    assert_eq!(rep.lhs, 0.0);
}
