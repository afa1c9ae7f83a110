//! Scalar analytic toolkit: power-log weights, Fenchel conjugation, and the
//! elementary lemmas behind the gradient estimates, as runnable routines.
//!
//! The central object is the weight
//!
//! ```text
//! L(t) = t^(r-n) * log^alpha(e + t),
//! ```
//!
//! strictly increasing whenever `r > n`, or `r = n` with `alpha > 0`. Its
//! inverse (computed by bracketed bisection, also in the log domain where the
//! iteration products overflow `f64`), the derived weight `Lhat`, the
//! power-log functions `phi(t) = t^beta / log^alpha t`, sampled Fenchel
//! conjugates, a sandwich construction for increasing diverging functions,
//! and the hole-filling iteration lemma all live here as pure functions over
//! immutable parameter bundles — concurrent callers need no synchronization.

use crate::exponents::ExponentSet;
use crate::quadrature::logspace;
use serde::Serialize;
use std::f64::consts::E;

/// Errors from the scalar toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OrliczError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate weight: {0}")]
    DegenerateWeight(String),
    #[error("search horizon {horizon} too small: arg-max on the boundary; enlarge the horizon")]
    Horizon { horizon: f64 },
    #[error("sandwich never established on the grid: {0}; enlarge the grid")]
    S0NotFound(String),
    #[error("iteration constant blows up: {0}")]
    ConstantBlowup(String),
    #[error("iteration hypothesis failed: {0}")]
    Hypothesis(String),
    #[error("parameters outside the required case: {0}")]
    CaseError(String),
}

/// Solves `g(t) = target` for nondecreasing `g` on `[0, inf)` by bracketed
/// bisection: the upper bracket doubles from `hi0` until it encloses the
/// target, then 200 bisection steps drive the bracket below relative width
/// 1e-13. Returns 0 when the target sits at or below `g(0)`.
fn bisect_increasing(
    g: impl Fn(f64) -> f64,
    target: f64,
    hi0: f64,
) -> Result<f64, OrliczError> {
    let mut lo = 0.0;
    if g(lo) >= target {
        return Ok(0.0);
    }
    let mut hi = hi0.max(1e-300);
    let mut expansions = 0;
    while g(hi) < target {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 1100 || !hi.is_finite() {
            return Err(OrliczError::Domain(format!(
                "no bracket below 1e300 reaches target {target}"
            )));
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The weight `L(t) = t^(r-n) log^alpha(e+t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrliczWeight {
    pub r: f64,
    pub n: f64,
    pub alpha: f64,
}

impl OrliczWeight {
    pub fn new(r: f64, n: f64, alpha: f64) -> Result<Self, OrliczError> {
        if !(n >= 1.0 && r >= n && alpha >= 0.0) {
            return Err(OrliczError::Domain(format!(
                "need r >= n >= 1 and alpha >= 0; got r = {r}, n = {n}, alpha = {alpha}"
            )));
        }
        Ok(OrliczWeight { r, n, alpha })
    }

    pub fn from_exponents(e: &ExponentSet) -> Self {
        OrliczWeight { r: e.r_f64(), n: e.n as f64, alpha: e.alpha_f64() }
    }

    /// Constant weight (`r = n`, `alpha = 0`) has no inverse.
    pub fn is_degenerate(&self) -> bool {
        self.r == self.n && self.alpha == 0.0
    }

    /// `L(t)`; exactly 0 at `t = 0` when `r > n`, and 1 when `r = n`
    /// (the convention `0^0 = 1` matches `f64::powf`).
    pub fn eval(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        t.powf(self.r - self.n) * (E + t).ln().powf(self.alpha)
    }

    /// `log L(e^y)` evaluated stably for any `y` (including `y` far beyond
    /// the overflow range of `L` itself).
    pub fn log_eval_of_log(&self, y: f64) -> f64 {
        // ln(e + e^y) = y + ln(1 + e^(1-y)) for large y, direct otherwise.
        let inner = if y > 40.0 { y + (1.0 - y).exp().ln_1p() } else { (E + y.exp()).ln() };
        (self.r - self.n) * y + self.alpha * inner.ln()
    }

    /// Inverse of `L` with round-trip accuracy `1e-12 * max(1, tau)`.
    pub fn inverse(&self, tau: f64) -> Result<f64, OrliczError> {
        if self.is_degenerate() {
            return Err(OrliczError::DegenerateWeight(
                "L is constant for r = n, alpha = 0".into(),
            ));
        }
        if tau < 0.0 {
            return Err(OrliczError::Domain(format!("tau = {tau} below range of L")));
        }
        if self.r == self.n && tau < 1.0 {
            return Err(OrliczError::Domain(format!(
                "tau = {tau} below L(0) = 1 for r = n"
            )));
        }
        bisect_increasing(|t| self.eval(t), tau, 1.0)
    }

    /// `log L^{-1}(tau)` given `log tau`, entirely in the log domain; this is
    /// what iteration traces use once `tau` exceeds the `f64` range.
    pub fn log_inverse_of_log(&self, log_tau: f64) -> Result<f64, OrliczError> {
        if self.is_degenerate() {
            return Err(OrliczError::DegenerateWeight(
                "L is constant for r = n, alpha = 0".into(),
            ));
        }
        let f = |y: f64| self.log_eval_of_log(y);
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut k = 0;
        while f(hi) < log_tau {
            hi *= 2.0;
            k += 1;
            if k > 100 {
                return Err(OrliczError::Domain(format!(
                    "log tau = {log_tau} unreachable"
                )));
            }
        }
        if f(lo) > log_tau {
            lo = -1.0;
            k = 0;
            while f(lo) > log_tau {
                lo *= 2.0;
                k += 1;
                if k > 100 {
                    return Err(OrliczError::Domain(format!(
                        "log tau = {log_tau} below the range of log L"
                    )));
                }
            }
        }
        for _ in 0..200 {
            if hi - lo <= 1e-13 * hi.abs().max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if f(mid) < log_tau {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// One row of the inverse-asymptotics report.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsRow {
    pub tau: f64,
    pub inverse: f64,
    pub bound: f64,
    pub margin: f64,
}

/// Report of [`l_inverse_asymptotics_check`].
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsReport {
    pub rows: Vec<AsymptoticsRow>,
    /// Most negative `bound - inverse` over the grid; `>= -1e-10` expected.
    pub worst_margin: f64,
}

/// Verifies the closed-form upper bounds for `L^{-1}`:
/// `r = n, alpha > 0` gives `L^{-1}(tau) <= exp(tau^{1/alpha})`; `r > n`
/// gives `L^{-1}(tau) <= tau^{1/(r-n)} / log^{alpha/(r-n)}(e + L^{-1}(tau))`
/// (an identity up to rounding, so its margins hover at zero).
pub fn l_inverse_asymptotics_check(
    w: &OrliczWeight,
    tau_grid: &[f64],
) -> Result<AsymptoticsReport, OrliczError> {
    let threshold = (E + 1.0).ln().powf(w.alpha);
    let mut rows = Vec::with_capacity(tau_grid.len());
    let mut worst = f64::INFINITY;
    for &tau in tau_grid {
        if tau < threshold {
            return Err(OrliczError::Domain(format!(
                "tau = {tau} below the admissible threshold log^alpha(e+1) = {threshold}"
            )));
        }
        let inv = w.inverse(tau)?;
        let bound = if w.r == w.n {
            (tau.powf(1.0 / w.alpha)).exp()
        } else {
            tau.powf(1.0 / (w.r - w.n)) / (E + inv).ln().powf(w.alpha / (w.r - w.n))
        };
        let margin = bound - inv;
        worst = worst.min(margin);
        rows.push(AsymptoticsRow { tau, inverse: inv, bound, margin });
    }
    Ok(AsymptoticsReport { rows, worst_margin: worst })
}

/// The derived weight `Lhat(s) = log^k(e + L^{-1}(s^{2n(q-p)}))` with
/// `k = alpha*n / (2p(r-n))`; strictly increasing for `r > n`, `q > p`,
/// `alpha > 0`.
#[derive(Debug, Clone, Copy)]
pub struct HatWeight {
    pub w: OrliczWeight,
    pub p: f64,
    pub q: f64,
    limit_case: bool,
}

impl HatWeight {
    pub fn new(r: f64, n: f64, alpha: f64, p: f64, q: f64) -> Result<Self, OrliczError> {
        if !(r > n && q > p && p > 1.0) {
            return Err(OrliczError::Domain(format!(
                "hat weight needs r > n, q > p > 1; got r = {r}, n = {n}, p = {p}, q = {q}"
            )));
        }
        let w = OrliczWeight::new(r, n, alpha)?;
        let limit_case = (q / p - (1.0 + 1.0 / n - 1.0 / r)).abs() <= 1e-12;
        Ok(HatWeight { w, p, q, limit_case })
    }

    /// Builds from an exponent set, deciding the limit case exactly.
    pub fn from_exponents(e: &ExponentSet) -> Result<Self, OrliczError> {
        let mut h = HatWeight::new(e.r_f64(), e.n as f64, e.alpha_f64(), e.p_f64(), e.q_f64())?;
        h.limit_case = e.q_over_p() == e.gap_bound();
        Ok(h)
    }

    /// Whether `q/p` equals `1 + 1/n - 1/r` (decided exactly when built from
    /// an [`ExponentSet`], to float tolerance otherwise).
    pub fn is_limit_case(&self) -> bool {
        self.limit_case
    }

    fn log_exponent(&self) -> f64 {
        self.w.alpha * self.w.n / (2.0 * self.p * (self.w.r - self.w.n))
    }

    pub fn eval(&self, s: f64) -> Result<f64, OrliczError> {
        if s < 0.0 {
            return Err(OrliczError::Domain(format!("Lhat argument s = {s} negative")));
        }
        let inner = self.w.inverse(s.powf(2.0 * self.w.n * (self.q - self.p)))?;
        Ok((E + inner).ln().powf(self.log_exponent()))
    }

    /// Numeric inverse of `Lhat` (bisection); needs `alpha > 0` and
    /// `sigma >= Lhat(0) = 1`.
    pub fn inverse(&self, sigma: f64) -> Result<f64, OrliczError> {
        if self.w.alpha == 0.0 {
            return Err(OrliczError::DegenerateWeight(
                "Lhat is constant for alpha = 0".into(),
            ));
        }
        if sigma < 1.0 {
            return Err(OrliczError::Domain(format!(
                "sigma = {sigma} below Lhat(0) = 1"
            )));
        }
        bisect_increasing(|s| self.eval(s).unwrap_or(f64::NAN), sigma, 1.0)
    }
}

/// Closed-form upper bound `exp((r/2p) sigma^(2p(r-n)/(alpha n))) sigma^(r/n)`
/// for `Lhat^{-1}(sigma)`, valid exactly in the limit case `q/p = 1+1/n-1/r`
/// (where `(r-n)/n = r(q-p)/p` turns the implicit inverse into this formula).
pub fn hat_inverse_bound(h: &HatWeight, sigma: f64) -> Result<f64, OrliczError> {
    if !h.is_limit_case() {
        return Err(OrliczError::CaseError(format!(
            "q/p = {} is not the gap bound; the closed-form inverse bound only \
             holds on the boundary",
            h.q / h.p
        )));
    }
    if sigma < 0.0 {
        return Err(OrliczError::Domain(format!("sigma = {sigma} negative")));
    }
    if h.w.alpha == 0.0 {
        return Err(OrliczError::DegenerateWeight("alpha = 0 in the limit case".into()));
    }
    let (r, n, alpha, p) = (h.w.r, h.w.n, h.w.alpha, h.p);
    let inner = 2.0 * p * (r - n) / (alpha * n);
    Ok((r / (2.0 * p) * sigma.powf(inner)).exp() * sigma.powf(r / n))
}

/// `phi(t) = t^beta / log^alpha(t)` on `[1 + delta, inf)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhiFunction {
    pub beta: f64,
    pub alpha: f64,
    /// Working-domain guard keeping `log t` away from 0 (default 1e-6).
    pub delta: f64,
}

impl PhiFunction {
    pub fn new(beta: f64, alpha: f64) -> Result<Self, OrliczError> {
        if !(beta > 0.0 && alpha >= 0.0) {
            return Err(OrliczError::Domain(format!(
                "need beta > 0 and alpha >= 0; got beta = {beta}, alpha = {alpha}"
            )));
        }
        Ok(PhiFunction { beta, alpha, delta: 1e-6 })
    }

    pub fn eval(&self, t: f64) -> Result<f64, OrliczError> {
        if t < 1.0 + self.delta {
            return Err(OrliczError::Domain(format!(
                "t = {t} below the working domain [1 + {}, inf)",
                self.delta
            )));
        }
        Ok(t.powf(self.beta) / t.ln().powf(self.alpha))
    }
}

/// Margin of the sub-multiplicativity bound
/// `phi(st) <= 2^alpha sqrt(phi(s^2) phi(t^2))`: returns the right side minus
/// the left side, which is nonnegative on the working domain (the proof is
/// the arithmetic-geometric mean inequality applied to `log s, log t`).
pub fn phi_submultiplicative_check(
    phi: &PhiFunction,
    s: f64,
    t: f64,
) -> Result<f64, OrliczError> {
    let lhs = phi.eval(s * t)?;
    let rhs = 2.0f64.powf(phi.alpha) * (phi.eval(s * s)? * phi.eval(t * t)?).sqrt();
    Ok(rhs - lhs)
}

/// Golden-section maximization of `f` on `[a, b]`; returns the best value.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut best = f1.max(f2);
    for _ in 0..200 {
        if b - a <= 1e-12 * b.abs().max(1.0) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
        best = best.max(f1.max(f2));
    }
    best
}

/// Fenchel conjugate `Phi*(s) = sup_t (s t - Phi(t))`, the sup taken over
/// `[0, horizon]`: a 4096-point log grid plus one golden-section refinement
/// around the grid arg-max (the catalog integrands are unimodal there).
///
/// An arg-max on the right boundary means the true sup lies beyond the
/// horizon and yields [`OrliczError::Horizon`].
pub fn fenchel_conjugate(
    phi: impl Fn(f64) -> f64,
    s: f64,
    horizon: f64,
) -> Result<f64, OrliczError> {
    if !(horizon > 0.0) {
        return Err(OrliczError::Domain(format!("horizon {horizon} must be positive")));
    }
    let obj = |t: f64| s * t - phi(t);
    let mut ts = vec![0.0];
    ts.extend(logspace(horizon * 1e-9, horizon, 4096));
    let (mut best_i, mut best_v) = (0, obj(0.0));
    for (i, &t) in ts.iter().enumerate().skip(1) {
        let v = obj(t);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    if best_i == ts.len() - 1 {
        return Err(OrliczError::Horizon { horizon });
    }
    let left = if best_i == 0 { 0.0 } else { ts[best_i - 1] };
    let right = ts[best_i + 1];
    Ok(best_v.max(golden_max(obj, left, right)))
}

/// Polar of `phi^{-1}` sampled on `[0, x_hi]`; the backbone of
/// [`ggp_sandwich_check`]. The cap at `x_hi` makes the polar finite even for
/// superlinear `phi` (whose exact polar is infinite), which is what lets the
/// sandwich be tested on a bounded grid.
struct SampledPolar {
    xs: Vec<f64>,
    gs: Vec<f64>,
}

impl SampledPolar {
    fn build(phi: &impl Fn(f64) -> f64, x_hi: f64) -> Result<Self, OrliczError> {
        let mut xs = vec![0.0];
        xs.extend(logspace(x_hi * 1e-12, x_hi, 4096));
        let mut gs = Vec::with_capacity(xs.len());
        let mut seed = 1.0;
        for &x in &xs {
            let g = bisect_increasing(phi, x, seed)?;
            seed = g.max(1.0);
            gs.push(g);
        }
        Ok(SampledPolar { xs, gs })
    }

    /// `(phi^{-1})*(y) = max_x (x y - phi^{-1}(x))` over the sampled grid.
    fn conj(&self, y: f64) -> f64 {
        self.xs
            .iter()
            .zip(&self.gs)
            .map(|(&x, &g)| x * y - g)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `psi(s)`: the `y` with `conj(y) = s` (bisection; conj is convex
    /// increasing past its zero plateau).
    fn psi(&self, s: f64) -> Result<f64, OrliczError> {
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut k = 0;
        while self.conj(hi) < s {
            lo = hi;
            hi *= 2.0;
            k += 1;
            if k > 200 {
                return Err(OrliczError::Domain(format!("psi({s}) out of reach")));
            }
        }
        for _ in 0..200 {
            if hi - lo <= 1e-12 * hi.max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.conj(mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// One grid row of the sandwich report.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichRow {
    pub s: f64,
    pub psi: f64,
    /// `phi(s) - s/psi(s)`, nonnegative where the sandwich holds.
    pub lower_margin: f64,
    /// `2 s/psi(s) - phi(s)`, nonnegative where the sandwich holds.
    pub upper_margin: f64,
}

/// Report of [`ggp_sandwich_check`].
#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    /// Smallest grid point beyond which the sandwich held at every larger one.
    pub s0: f64,
    pub rows: Vec<SandwichRow>,
}

/// For increasing diverging `phi`, builds `psi = [(phi^{-1})*]^{-1}`
/// numerically and finds the smallest grid point `s0` past which
/// `s/psi(s) <= phi(s) <= 2 s/psi(s)` holds for every larger grid point.
///
/// The polar is sampled on the finite horizon `[0, (1.5 max(s_grid))^2]`, so
/// `s0` is a property of this numeric construction; no explicit formula for
/// it exists.
pub fn ggp_sandwich_check(
    phi: impl Fn(f64) -> f64,
    s_grid: &[f64],
) -> Result<SandwichReport, OrliczError> {
    if s_grid.is_empty() || s_grid.windows(2).any(|w| w[0] >= w[1]) || s_grid[0] <= 0.0 {
        return Err(OrliczError::Domain(
            "s_grid must be strictly increasing and positive".into(),
        ));
    }
    let s_max = *s_grid.last().unwrap();
    let polar = SampledPolar::build(&phi, (1.5 * s_max) * (1.5 * s_max))?;
    let mut rows = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let psi = polar.psi(s)?;
        let ratio = s / psi;
        let value = phi(s);
        rows.push(SandwichRow {
            s,
            psi,
            lower_margin: value - ratio,
            upper_margin: 2.0 * ratio - value,
        });
    }
    let mut s0_index = rows.len();
    for (i, row) in rows.iter().enumerate().rev() {
        if row.lower_margin >= -1e-10 && row.upper_margin >= -1e-10 {
            s0_index = i;
        } else {
            break;
        }
    }
    if s0_index == rows.len() {
        return Err(OrliczError::S0NotFound(format!(
            "both margins negative at the top grid point s = {s_max}"
        )));
    }
    Ok(SandwichReport { s0: s_grid[s0_index], rows })
}

/// Output of [`iteration_lemma_apply`]: the bound and its ingredients.
#[derive(Debug, Clone, Serialize)]
pub struct IterationBound {
    pub bound: f64,
    pub kappa: f64,
    pub c_a: f64,
    pub c_b: f64,
    pub c_c: f64,
}

/// Hole-filling iteration lemma: if a nonnegative bounded `f` satisfies
/// `f(r1) <= theta f(r2) + A/(r2-r1)^a + B/(r2-r1)^b + C` on all
/// `R1 <= r1 < r2 <= R2`, then
/// `f(R1) <= cA A/(R2-R1)^a + cB B/(R2-R1)^b + C/(1-theta)`.
///
/// The constants come from telescoping along the geometric radii
/// `rho_i = R1 + (1 - kappa^i)(R2 - R1)` with `kappa = (2 theta)^{1/m}`,
/// `m = max(a, b, 1)`, clipped into (0, 1) — one admissible realization of
/// the abstract constant. The hypothesis is spot-checked on a 33-point grid
/// and the conclusion is asserted before returning.
#[allow(clippy::too_many_arguments)]
pub fn iteration_lemma_apply(
    f: impl Fn(f64) -> f64,
    r1: f64,
    r2: f64,
    a: f64,
    b: f64,
    c: f64,
    alpha_e: f64,
    beta_e: f64,
    theta: f64,
) -> Result<IterationBound, OrliczError> {
    if !(r1 < r2) || a < 0.0 || b < 0.0 || c < 0.0 || alpha_e < 0.0 || beta_e < 0.0 {
        return Err(OrliczError::Domain(format!(
            "need R1 < R2 and nonnegative constants; got [{r1}, {r2}], A={a}, B={b}, C={c}"
        )));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(OrliczError::ConstantBlowup(format!(
            "theta = {theta} admits no contraction factor kappa"
        )));
    }
    // Spot-check the hypothesis on all ordered pairs of a uniform grid.
    let m_grid = 33;
    let rs: Vec<f64> =
        (0..m_grid).map(|i| r1 + (r2 - r1) * i as f64 / (m_grid - 1) as f64).collect();
    let fs: Vec<f64> = rs.iter().map(|&r| f(r)).collect();
    for i in 0..m_grid {
        for j in (i + 1)..m_grid {
            let d = rs[j] - rs[i];
            let rhs = theta * fs[j] + a / d.powf(alpha_e) + b / d.powf(beta_e) + c;
            if fs[i] > rhs * (1.0 + 1e-9) + 1e-9 {
                return Err(OrliczError::Hypothesis(format!(
                    "f({}) = {} exceeds theta f({}) + A/d^a + B/d^b + C = {}",
                    rs[i], fs[i], rs[j], rhs
                )));
            }
        }
    }
    let m = alpha_e.max(beta_e).max(1.0);
    let mut kappa = (2.0 * theta).powf(1.0 / m);
    if kappa >= 1.0 {
        kappa = 0.5 * (1.0 + theta.powf(1.0 / m));
    }
    let den_a = 1.0 - theta * kappa.powf(-alpha_e);
    let den_b = 1.0 - theta * kappa.powf(-beta_e);
    if den_a <= 1e-15 || den_b <= 1e-15 {
        return Err(OrliczError::ConstantBlowup(format!(
            "kappa = {kappa} leaves theta kappa^-exponent >= 1"
        )));
    }
    let c_a = (1.0 - kappa).powf(-alpha_e) / den_a;
    let c_b = (1.0 - kappa).powf(-beta_e) / den_b;
    let c_c = 1.0 / (1.0 - theta);
    let d = r2 - r1;
    let bound = c_a * a / d.powf(alpha_e) + c_b * b / d.powf(beta_e) + c_c * c;
    let f_r1 = f(r1);
    if f_r1 > bound * (1.0 + 1e-9) + 1e-9 {
        return Err(OrliczError::Hypothesis(format!(
            "conclusion failed: f(R1) = {f_r1} exceeds the bound {bound}"
        )));
    }
    Ok(IterationBound { bound, kappa, c_a, c_b, c_c })
}

/// Fits the smallest constant `C` with
/// `(1+x)(1 + L^{-1}(x^{2/p}))^{n/2p} <= C (1 + x (L^{-1}(x^{2/p}))^{n/2p})`
/// over the grid; finite because both sides share the growth at infinity.
pub fn eq_elem_check(
    w: &OrliczWeight,
    p: f64,
    x_grid: &[f64],
) -> Result<f64, OrliczError> {
    if p <= 1.0 {
        return Err(OrliczError::Domain(format!("exponent p = {p} must exceed 1")));
    }
    let expo = w.n / (2.0 * p);
    let mut fitted = 0.0f64;
    for &x in x_grid {
        if x < 0.0 {
            return Err(OrliczError::Domain(format!("grid point x = {x} negative")));
        }
        let u = w.inverse(x.powf(2.0 / p))?;
        let lhs = (1.0 + x) * (1.0 + u).powf(expo);
        let rhs = 1.0 + x * u.powf(expo);
        fitted = fitted.max(lhs / rhs);
    }
    if !fitted.is_finite() {
        return Err(OrliczError::Domain("fitted constant overflowed".into()));
    }
    Ok(fitted)
}
