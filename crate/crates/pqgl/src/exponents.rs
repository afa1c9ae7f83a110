//! Exponent sets, the gap condition, and growth-regime classification.
//!
//! A functional with (p,q)-growth and an x-dependence of Sobolev class
//! `W^{1,r}` weighted by `log^alpha` admits interior gradient bounds in three
//! regimes, separated exactly:
//!
//! * **StandardGrowth** — `p = q`, `r = n`, `alpha > 4n`;
//! * **StrictGap** — `p < q`, `q/p` strictly below `1 + 1/n - 1/r`, `r > n`,
//!   `alpha = 0`;
//! * **LimitGap** — `q/p` equal to `1 + 1/n - 1/r`, `r > n`, `alpha > 0`.
//!
//! Each regime has its own gain function `G` turning the averaged energy into
//! a sup-gradient bound; see [`g_eval`]. Classification is performed with
//! exact rational arithmetic so the boundaries are decided, not guessed.

use crate::rational::{Rational, RationalError};
use serde::Serialize;

/// Errors from exponent validation and classification.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExponentError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("gap violated: q/p = {q_over_p} exceeds 1 + 1/n - 1/r = {bound}")]
    GapViolation { q_over_p: Rational, bound: Rational },
    #[error("hypotheses not met: {0}")]
    HypothesisNotMet(String),
    #[error("degenerate exponent: {0}")]
    DegenerateExponent(String),
}

impl From<RationalError> for ExponentError {
    fn from(e: RationalError) -> Self {
        ExponentError::Domain(e.to_string())
    }
}

/// Upper bound `1 + 1/n - 1/r` for the admissible ratio `q/p`.
pub fn gap_bound(n: u32, r: Rational) -> Result<Rational, ExponentError> {
    if n < 2 {
        return Err(ExponentError::Domain(format!("dimension n = {n} must be >= 2")));
    }
    let n_rat = Rational::from_int(n as i64);
    if r < n_rat {
        return Err(ExponentError::Domain(format!(
            "integrability exponent r = {r} below dimension n = {n}"
        )));
    }
    Ok(Rational::one() + n_rat.recip() - r.recip())
}

/// The regime a validated exponent set falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GrowthCase {
    /// `p = q`, coefficient differentiability `r = n` with `alpha > 4n`.
    StandardGrowth,
    /// `p < q` strictly inside the gap, `r > n`, no log weight.
    StrictGap,
    /// `q/p` exactly on the gap boundary, `r > n`, log weight `alpha > 0`.
    LimitGap,
}

/// Validated exponent data for one functional.
///
/// `p, q, r, alpha` are exact rationals; `mu` is the ellipticity shift in
/// `[0, 1]`; `lambda_ell <= big_lambda_ell` are the declared ellipticity
/// constants the verification harness checks empirical ratios against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentSet {
    pub n: u32,
    pub p: Rational,
    pub q: Rational,
    pub r: Rational,
    pub alpha: Rational,
    pub mu: f64,
    pub lambda_ell: f64,
    pub big_lambda_ell: f64,
    /// Replacement for the Sobolev exponent `2n/(n-2)`, mandatory meaning in
    /// dimension 2 where the formula degenerates (defaults to 4 there).
    pub sobolev_override: Option<f64>,
    exact: bool,
}

impl ExponentSet {
    /// Validates the ordering and gap invariants; `mu = 1` and unit
    /// ellipticity constants are defaults the builders below can replace.
    pub fn new(
        n: u32,
        p: Rational,
        q: Rational,
        r: Rational,
        alpha: Rational,
    ) -> Result<Self, ExponentError> {
        if n < 2 {
            return Err(ExponentError::Domain(format!("dimension n = {n} must be >= 2")));
        }
        if p <= Rational::one() {
            return Err(ExponentError::Domain(format!("p = {p} must exceed 1")));
        }
        if q < p {
            return Err(ExponentError::Domain(format!("q = {q} below p = {p}")));
        }
        if alpha < Rational::zero() {
            return Err(ExponentError::Domain(format!("alpha = {alpha} must be >= 0")));
        }
        let bound = gap_bound(n, r)?;
        let q_over_p = q / p;
        if q_over_p > bound {
            return Err(ExponentError::GapViolation { q_over_p, bound });
        }
        Ok(ExponentSet {
            n,
            p,
            q,
            r,
            alpha,
            mu: 1.0,
            lambda_ell: 1.0,
            big_lambda_ell: 1.0,
            sobolev_override: None,
            exact: true,
        })
    }

    /// Same validation, parameters approximated from floats (tolerance 1e-12).
    /// The result is flagged inexact so front ends can warn that boundary
    /// classifications reflect the approximation, not the float input.
    pub fn from_f64(n: u32, p: f64, q: f64, r: f64, alpha: f64) -> Result<Self, ExponentError> {
        let tol = 1e-12;
        let mut e = ExponentSet::new(
            n,
            Rational::approx_from_f64(p, tol)?,
            Rational::approx_from_f64(q, tol)?,
            Rational::approx_from_f64(r, tol)?,
            Rational::approx_from_f64(alpha, tol)?,
        )?;
        e.exact = false;
        Ok(e)
    }

    pub fn with_mu(mut self, mu: f64) -> Result<Self, ExponentError> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(ExponentError::Domain(format!("mu = {mu} outside [0, 1]")));
        }
        self.mu = mu;
        Ok(self)
    }

    pub fn with_ellipticity(mut self, lambda: f64, big_lambda: f64) -> Result<Self, ExponentError> {
        if !(lambda > 0.0 && lambda <= big_lambda) {
            return Err(ExponentError::Domain(format!(
                "need 0 < lambda <= Lambda, got {lambda}, {big_lambda}"
            )));
        }
        self.lambda_ell = lambda;
        self.big_lambda_ell = big_lambda;
        Ok(self)
    }

    pub fn with_sobolev_override(mut self, s: f64) -> Result<Self, ExponentError> {
        if s <= 2.0 {
            return Err(ExponentError::Domain(format!(
                "sobolev override {s} must exceed 2"
            )));
        }
        self.sobolev_override = Some(s);
        Ok(self)
    }

    /// Whether the rational parameters are the caller's exact inputs (true)
    /// or float approximations (false).
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn p_f64(&self) -> f64 {
        self.p.to_f64()
    }

    pub fn q_f64(&self) -> f64 {
        self.q.to_f64()
    }

    pub fn r_f64(&self) -> f64 {
        self.r.to_f64()
    }

    pub fn alpha_f64(&self) -> f64 {
        self.alpha.to_f64()
    }

    pub fn q_over_p(&self) -> Rational {
        self.q / self.p
    }

    pub fn gap_bound(&self) -> Rational {
        // Constructor already validated r >= n, so this cannot fail.
        gap_bound(self.n, self.r).expect("validated at construction")
    }

    /// `2n/(n-2)` for n >= 3; in dimension 2 the override (default 4).
    pub fn sobolev_exponent(&self) -> Result<f64, ExponentError> {
        sobolev_exponent(self.n, self.sobolev_override)
    }
}

/// Sobolev conjugate of 2: `2n/(n-2)` when that is finite, otherwise the
/// supplied override (any value > 2 is admissible in dimension 2; default 4).
pub fn sobolev_exponent(n: u32, override_2d: Option<f64>) -> Result<f64, ExponentError> {
    if let Some(s) = override_2d {
        if s <= 2.0 {
            return Err(ExponentError::Domain(format!(
                "sobolev exponent override {s} must exceed 2"
            )));
        }
        return Ok(s);
    }
    match n {
        0 | 1 => Err(ExponentError::Domain(format!("dimension n = {n} must be >= 2"))),
        2 => Ok(4.0),
        _ => Ok(2.0 * n as f64 / (n as f64 - 2.0)),
    }
}

/// Strict classification into the three supported regimes.
///
/// Anything that lies inside the gap but matches no regime's side conditions
/// is rejected with [`ExponentError::HypothesisNotMet`]; a ratio beyond the
/// gap is a [`ExponentError::GapViolation`].
pub fn classify(e: &ExponentSet) -> Result<GrowthCase, ExponentError> {
    classify_with(e, false)
}

/// Like [`classify`], but tolerates a positive log weight in the strict-gap
/// regime (the weight strengthens the assumptions, so the strict-gap gain
/// function still applies). Off by default because the strict reading keeps
/// each regime's hypotheses minimal.
pub fn classify_permissive(e: &ExponentSet) -> Result<GrowthCase, ExponentError> {
    classify_with(e, true)
}

fn classify_with(e: &ExponentSet, permissive: bool) -> Result<GrowthCase, ExponentError> {
    let bound = e.gap_bound();
    let ratio = e.q_over_p();
    if ratio > bound {
        return Err(ExponentError::GapViolation { q_over_p: ratio, bound });
    }
    let n_rat = Rational::from_int(e.n as i64);
    let four_n = Rational::from_int(4 * e.n as i64);
    if e.p == e.q {
        if e.r == n_rat && e.alpha > four_n {
            return Ok(GrowthCase::StandardGrowth);
        }
        return Err(ExponentError::HypothesisNotMet(format!(
            "p = q needs r = n and alpha > 4n; got r = {}, alpha = {} (4n = {})",
            e.r, e.alpha, four_n
        )));
    }
    // Here p < q, which forces r > n (otherwise the gap bound is 1 and the
    // constructor would have rejected the set).
    if ratio == bound {
        if e.alpha > Rational::zero() {
            return Ok(GrowthCase::LimitGap);
        }
        return Err(ExponentError::HypothesisNotMet(
            "q/p on the gap boundary needs a positive log weight alpha".into(),
        ));
    }
    if e.alpha == Rational::zero() {
        return Ok(GrowthCase::StrictGap);
    }
    if permissive {
        return Ok(GrowthCase::StrictGap);
    }
    Err(ExponentError::HypothesisNotMet(format!(
        "strict gap with alpha = {} > 0 matches no regime exactly; \
         permissive classification would use StrictGap",
        e.alpha
    )))
}

/// Gain function `G` of the regime: the sup-gradient bound is
/// `G(C/(R-rho)^n * average energy)`.
///
/// * StandardGrowth: `G(t) = t^{1/p}`.
/// * StrictGap: `G(t) = t^{(r-n)/(p(r-n) - rn(q-p))} + t^{1/p}`.
/// * LimitGap: `G(t) = exp((r/2p) t^{2p(r-n)/(alpha n)}) t^{r/n} + t^{1/p}`.
pub fn g_eval(e: &ExponentSet, case: GrowthCase, t: f64) -> Result<f64, ExponentError> {
    if !(t >= 0.0) {
        return Err(ExponentError::Domain(format!("G argument t = {t} must be >= 0")));
    }
    let p = e.p_f64();
    let tail = t.powf(1.0 / p);
    match case {
        GrowthCase::StandardGrowth => Ok(tail),
        GrowthCase::StrictGap => {
            let n_rat = Rational::from_int(e.n as i64);
            let num = e.r - n_rat;
            let den = e.p * (e.r - n_rat) - e.r * n_rat * (e.q - e.p);
            if den <= Rational::zero() {
                return Err(ExponentError::DegenerateExponent(format!(
                    "strict-gap gain exponent denominator p(r-n) - rn(q-p) = {den} is not positive"
                )));
            }
            let expo = (num / den).to_f64();
            Ok(t.powf(expo) + tail)
        }
        GrowthCase::LimitGap => {
            let n = e.n as f64;
            let r = e.r_f64();
            let alpha = e.alpha_f64();
            if alpha <= 0.0 || r <= n {
                return Err(ExponentError::DegenerateExponent(format!(
                    "limit-gap gain needs r > n and alpha > 0; got r = {r}, alpha = {alpha}"
                )));
            }
            let inner = 2.0 * p * (r - n) / (alpha * n);
            Ok((r / (2.0 * p) * t.powf(inner)).exp() * t.powf(r / n) + tail)
        }
    }
}

/// The exponent ladder `p_j = p (2^*/2)^j` driving the iteration, together
/// with the partial and limiting sums its products are controlled by.
#[derive(Debug, Clone)]
pub struct MoserExponentSeq {
    pub p0: f64,
    /// Step ratio `2^*/2` (> 1).
    pub ratio: f64,
}

impl MoserExponentSeq {
    pub fn new(e: &ExponentSet) -> Result<Self, ExponentError> {
        let two_star = e.sobolev_exponent()?;
        Ok(MoserExponentSeq { p0: e.p_f64(), ratio: two_star / 2.0 })
    }

    pub fn exponent(&self, j: u32) -> f64 {
        self.p0 * self.ratio.powi(j as i32)
    }

    /// Partial sum of reciprocals `sum_{j<=J} 1/p_j`.
    pub fn reciprocal_sum(&self, j_max: u32) -> f64 {
        (0..=j_max).map(|j| 1.0 / self.exponent(j)).sum()
    }

    /// Limit of the reciprocal sum: `(1/p) ratio/(ratio-1)`; equals `n/(2p)`
    /// in dimensions where `2^* = 2n/(n-2)`.
    pub fn reciprocal_sum_limit(&self) -> f64 {
        1.0 / self.p0 * self.ratio / (self.ratio - 1.0)
    }

    /// Limit of `sum (j+1)/p_j = 1/(p (1-1/ratio)^2)`; `n^2/(4p)` in the
    /// unoverridden case.
    pub fn weighted_reciprocal_sum_limit(&self) -> f64 {
        let t = 1.0 / self.ratio;
        1.0 / (self.p0 * (1.0 - t) * (1.0 - t))
    }

    /// Limit of `sum log(p_j)/p_j`.
    pub fn log_weighted_sum_limit(&self) -> f64 {
        let t = 1.0 / self.ratio;
        self.p0.ln() / self.p0 / (1.0 - t)
            + self.ratio.ln() / self.p0 * t / ((1.0 - t) * (1.0 - t))
    }
}

/// Nested radii `rho0 <= rho0~ <= rho < R <= R0~ <= R0 <= 1` used by the
/// cutoff pairs and the shrinking-radius iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusSchedule {
    pub rho0: f64,
    pub rho0_tilde: f64,
    pub rho: f64,
    /// Outer radius of the working pair (written `R` in display output).
    pub r: f64,
    pub r0_tilde: f64,
    pub r0: f64,
}

impl RadiusSchedule {
    pub fn new(
        rho0: f64,
        rho0_tilde: f64,
        rho: f64,
        r: f64,
        r0_tilde: f64,
        r0: f64,
    ) -> Result<Self, ExponentError> {
        let chain = [rho0, rho0_tilde, rho, r, r0_tilde, r0];
        if !(rho0 > 0.0) || !(r0 <= 1.0) {
            return Err(ExponentError::Domain(format!(
                "radius chain must sit inside (0, 1]; got rho0 = {rho0}, R0 = {r0}"
            )));
        }
        if chain.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(ExponentError::Domain(format!(
                "radii must increase strictly: {chain:?}"
            )));
        }
        Ok(RadiusSchedule { rho0, rho0_tilde, rho, r, r0_tilde, r0 })
    }

    /// Embeds a working pair `(rho, R)` into a full valid chain.
    pub fn from_pair(rho: f64, r: f64) -> Result<Self, ExponentError> {
        if !(0.0 < rho && rho < r && r < 1.0) {
            return Err(ExponentError::Domain(format!(
                "need 0 < rho < R < 1, got ({rho}, {r})"
            )));
        }
        let r0 = (1.5 * r).min(1.0);
        RadiusSchedule::new(0.5 * rho, 0.75 * rho, rho, r, 0.5 * (r + r0), r0)
    }

    /// Shrinking radius `rho~0 + (R~0 - rho~0)/2^i`; starts at `R0~` and
    /// decreases to `rho0~`.
    pub fn radius(&self, i: u32) -> f64 {
        self.rho0_tilde + (self.r0_tilde - self.rho0_tilde) / (1u64 << i.min(62)) as f64
    }
}
