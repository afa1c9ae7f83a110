// approximation_ladder.rs
//
// Climbs the regularization ladder for a double-phase density: the
// q-phase is truncated at increasing levels while the coefficient is
// mollified at decreasing radii, each rung is minimized, and every
// minimizer is checked against the defining minimality property of the
// shifted energy. The inner sup of the gradient modulus stays bounded
// along the ladder — the discrete shadow of the uniform estimate.
//
//     cargo run --example approximation_ladder

use pqgl::exponents::ExponentSet;
use pqgl::integrand::{Integrand, MollifierSpec, Profile};
use pqgl::rational::Rational;
use pqgl::solver::{solve_sequence, BoundaryData, Grid, SolverOptions};

fn main() {
    // Borderline exponents with a smooth sine coefficient.
    let e = ExponentSet::new(
        2,
        Rational::from_int(2),
        "5/2".parse().unwrap(),
        Rational::from_int(4),
        Rational::from_int(1),
    )
    .unwrap();
    let base = Integrand::k3(e, 2, Profile::Sine { mid: 1.5, amp: 0.5 }).unwrap();

    let grid = Grid::new(2, 1.0, 33).unwrap();
    let opts = SolverOptions { tol: 1e-6, ..Default::default() };
    let k_list = [2.0, 4.0, 8.0, 16.0];
    let eps_list = [0.3, 0.15, 0.075];
    let spec = MollifierSpec::default();

    let rungs = solve_sequence(
        grid,
        &base,
        &BoundaryData::HarmonicQuartic,
        &k_list,
        &eps_list,
        &spec,
        &opts,
    )
    .unwrap();

    println!("{:>6} {:>7} {:>16} {:>14} {:>14} {:>12}", "k", "eps", "energy", "lhs", "rhs", "sup V");
    for rung in &rungs {
        println!(
            "{:>6} {:>7} {:>16.9e} {:>14.6e} {:>14.6e} {:>12.6}",
            rung.k, rung.eps, rung.report.energy, rung.minimality_lhs, rung.minimality_rhs,
            rung.sup_v_inner
        );
        assert!(
            rung.minimality_lhs <= rung.minimality_rhs * (1.0 + 1e-9),
            "minimality violated on a rung"
        );
    }

    let sup_min = rungs.iter().map(|r| r.sup_v_inner).fold(f64::INFINITY, f64::min);
    let sup_max = rungs.iter().map(|r| r.sup_v_inner).fold(0.0f64, f64::max);
    println!();
    println!(
        "inner sup V across {} rungs stays within [{:.6}, {:.6}] (spread {:.2}%)",
        rungs.len(),
        sup_min,
        sup_max,
        100.0 * (sup_max - sup_min) / sup_min
    );
}
