// regimes.rs
//
// Tour of the exponent-regime classifier: which (n, p, q, r, alpha)
// combinations fall under standard growth, a strict gap, or the
// borderline gap, and what gain function each regime earns.
//
//     cargo run --example regimes

use pqgl::exponents::{classify, classify_permissive, g_eval, ExponentSet, GrowthCase};
use pqgl::rational::Rational;

fn name(case: GrowthCase) -> &'static str {
    match case {
        GrowthCase::StandardGrowth => "standard growth",
        GrowthCase::StrictGap => "strict gap",
        GrowthCase::LimitGap => "limit gap",
    }
}

fn show(label: &str, n: u32, p: &str, q: &str, r: &str, alpha: &str) {
    let e = ExponentSet::new(
        n,
        p.parse::<Rational>().unwrap(),
        q.parse::<Rational>().unwrap(),
        r.parse::<Rational>().unwrap(),
        alpha.parse::<Rational>().unwrap(),
    );
    print!("{label:<34} n={n} p={p:<4} q={q:<4} r={r:<3} alpha={alpha:<3} -> ");
    match e.and_then(|e| classify(&e).map(|c| (e, c))) {
        Ok((e, case)) => {
            let g2 = g_eval(&e, case, 2.0).unwrap();
            println!("{} (q/p = {}, bound {}, G(2) = {:.6})", name(case), e.q_over_p(), e.gap_bound(), g2);
        }
        Err(err) => println!("rejected: {err}"),
    }
}

fn main() {
    println!("-- the three admissible regimes --");
    // Equal exponents need a strong logarithmic weight: alpha > 4n.
    show("equal exponents, strong log weight", 3, "2", "2", "3", "13");
    // A gap strictly inside the bound with differentiable coefficients.
    show("gap strictly inside the bound", 2, "2", "11/5", "4", "0");
    // Exactly on the bound: admissible only with a positive log weight.
    show("gap exactly on the bound", 2, "2", "5/2", "4", "1");

    println!();
    println!("-- rejected combinations --");
    // Beyond the bound nothing helps.
    show("gap beyond the bound", 2, "2", "3", "4", "1");
    // Equal exponents with a weak weight fail the borderline counting.
    show("equal exponents, weak log weight", 3, "2", "2", "3", "12");
    // A strict gap with r = n leaves no differentiability to spend.
    show("strict gap without smoothness", 2, "2", "11/5", "2", "0");

    println!();
    println!("-- permissive mode --");
    // A log weight on a strictly-inside gap is wasteful but admissible
    // when classification is permissive.
    let e = ExponentSet::new(
        2,
        Rational::from_int(2),
        "11/5".parse().unwrap(),
        Rational::from_int(4),
        Rational::from_int(1),
    )
    .unwrap();
    match classify(&e) {
        Err(err) => println!("strict classifier: {err}"),
        Ok(case) => println!("strict classifier unexpectedly accepted: {}", name(case)),
    }
    let case = classify_permissive(&e).unwrap();
    println!("permissive classifier: {}", name(case));

    println!();
    println!("-- gain growth along the borderline family --");
    // On the borderline the gain function steepens as the weight fades.
    for alpha in ["4", "2", "1", "1/2"] {
        let e = ExponentSet::new(
            2,
            Rational::from_int(2),
            "5/2".parse().unwrap(),
            Rational::from_int(4),
            alpha.parse().unwrap(),
        )
        .unwrap();
        let case = classify(&e).unwrap();
        println!(
            "alpha = {:<3}  G(1) = {:>18.6}  G(3/2) = {:>18.6e}",
            alpha,
            g_eval(&e, case, 1.0).unwrap(),
            g_eval(&e, case, 1.5).unwrap(),
        );
    }
}
