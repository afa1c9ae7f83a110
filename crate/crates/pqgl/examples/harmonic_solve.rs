// harmonic_solve.rs
//
// Minimizes the quadratic Dirichlet energy on the simplicial grid with
// harmonic boundary data. The saddle product x1*x2 is discretely
// harmonic here, so its nodal interpolant is the exact minimizer and
// the solver accepts it without a single iteration; the quartic
// harmonic polynomial is not, and exhibits the mesh-refinement order
// of the scheme instead.
//
//     cargo run --example harmonic_solve

use pqgl::exponents::ExponentSet;
use pqgl::integrand::Integrand;
use pqgl::rational::Rational;
use pqgl::solver::{minimize, BoundaryData, Grid, GridField, SolverOptions};

fn quadratic_energy_setup() -> Integrand {
    // p = q = 2 with a strong log weight on the coefficient scale; with
    // mu = 0 the density is exactly |Du|^2 / 2 up to normalization.
    let e = ExponentSet::new(
        2,
        Rational::from_int(2),
        Rational::from_int(2),
        Rational::from_int(2),
        Rational::from_int(9),
    )
    .unwrap()
    .with_mu(0.0)
    .unwrap();
    Integrand::k1(e, 2).unwrap()
}

fn main() {
    let integrand = quadratic_energy_setup();
    let opts = SolverOptions::default();

    println!("-- saddle data: the interpolant is already optimal --");
    let grid = Grid::new(2, 1.0, 33).unwrap();
    let (field, report) = minimize(grid, &integrand, &BoundaryData::HarmonicQuadratic, &opts).unwrap();
    println!(
        "m = 33: iterations = {}, gradient sup = {:.3e}, energy = {:.12}",
        report.iterations, report.grad_sup, report.energy
    );
    let exact = GridField::from_boundary(grid, &BoundaryData::HarmonicQuadratic);
    let max_diff = field
        .values
        .iter()
        .zip(&exact.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("maximum nodal deviation from the interpolated product: {max_diff:.3e}");

    println!();
    println!("-- quartic data: refinement drives the error --");
    // u(x) = x1^4 - 6 x1^2 x2^2 + x2^4 is harmonic but not piecewise
    // linear, so each grid carries a genuine discretization error.
    let mut errors = Vec::new();
    for m in [17usize, 33, 65] {
        let grid = Grid::new(2, 1.0, m).unwrap();
        let (field, report) =
            minimize(grid, &integrand, &BoundaryData::HarmonicQuartic, &opts).unwrap();
        let mut err = 0.0f64;
        for idx in 0..grid.node_count() {
            let x = grid.node_coord(idx);
            let exact = x[0].powi(4) - 6.0 * x[0] * x[0] * x[1] * x[1] + x[1].powi(4);
            err = err.max((field.values[idx] - exact).abs());
        }
        println!(
            "m = {m:>3}: iterations = {:>4}, sup error = {err:.6e}",
            report.iterations
        );
        errors.push(err);
    }
    let order_a = (errors[0] / errors[1]).log2();
    let order_b = (errors[1] / errors[2]).log2();
    println!("observed convergence order: {order_a:.3} then {order_b:.3}");
}
