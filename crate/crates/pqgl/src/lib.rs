//! Numerical laboratory for energy functionals with (p,q)-growth.
//!
//! The crate studies minimizers of integral functionals
//! `v -> integral of F(x, Dv)` whose integrand grows like `|Dv|^p` from below
//! and `|Dv|^q` from above, with coefficients of limited Sobolev regularity in
//! `x`. Everything revolves around one question: when is the gradient of a
//! minimizer locally bounded, and with which constant?
//!
//! The pieces, bottom up:
//!
//! * [`rational`] — exact rational scalars; regime boundaries are decided
//!   exactly, never by float comparison.
//! * [`exponents`] — exponent sets, the gap condition
//!   `q/p <= 1 + 1/n - 1/r`, classification into the three supported growth
//!   regimes, gain functions, Sobolev/iteration exponent ladders, radius
//!   schedules.
//! * [`quadrature`] — Gauss-Legendre and disk/ball rules used by the scalar
//!   toolkit and the coefficient mollifier.
//! * [`orlicz`] — the scalar toolkit: the weight `L(h) = h^{r-n} log^alpha(e+h)`
//!   and its inverse, sub-multiplicativity of power-log functions, sampled
//!   Fenchel conjugates, a generalized-three-primes sandwich check, and the
//!   hole-filling iteration lemma.
//! * [`integrand`] — the model integrand catalog (p-power, weighted p-power,
//!   double phase), pointwise derivative evaluation, empirical verification
//!   of ellipticity/growth/mixed-derivative assumptions, truncation of the
//!   q-phase and mollification of coefficients.
//! * [`solver`] — Kuhn-simplex P1 grids, energy assembly, a monotone descent
//!   minimizer, and the truncate-then-mollify approximation ladder.
//! * [`estimates`] — the inequality harnesses: Caccioppoli-type checks on
//!   second derivatives, the sup-gradient estimate with its fitted constant,
//!   iteration traces, and the regime scan that drives the CSV reports.
//! * [`cli`] — configuration parsing and the six subcommands exposed by the
//!   `pqgl` binary (`classify`, `toolkit-selftest`, `check-integrand`,
//!   `solve`, `estimate`, `scan`).
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod cli;
pub mod estimates;
pub mod exponents;
pub mod integrand;
pub mod orlicz;
pub mod quadrature;
pub mod rational;
pub mod solver;
