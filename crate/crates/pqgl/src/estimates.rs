//! Quantitative harnesses on top of computed minimizers: an energy-level
//! Caccioppoli comparison with a fitted constant, the split level and
//! iteration constants of the Moser scheme, the regime-dependent gradient
//! bound `sup |Du| <= G(C' x averaged energy)`, a log-domain trace of the
//! iteration products, and a batch scan that sweeps grids, radii, and
//! stabilization exponents over one parameter point per regime.
//!
//! Everything here consumes converged [`GridField`] minimizers; fields that
//! did not converge are rejected rather than silently measured.

use crate::exponents::{classify_permissive, g_eval, ExponentError, ExponentSet, GrowthCase, MoserExponentSeq};
use crate::integrand::{Integrand, IntegrandError, Kind, Point, Profile};
use crate::orlicz::{OrliczError, OrliczWeight};
use crate::rational::Rational;
use crate::solver::{minimize, BoundaryData, Grid, GridField, SolverError, SolverOptions};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Errors from the estimate harnesses.
#[derive(Debug, thiserror::Error)]
pub enum EstimateError {
    #[error("domain error: {0}")]
    Domain(String),
    /// The supplied field is not a converged minimizer.
    #[error("field is not a converged minimizer; refusing to measure it")]
    StaleField,
    /// The split level is defined only for genuinely unbalanced growth.
    #[error("the split level degenerates for balanced growth (q = p)")]
    SplitNotApplicable,
    /// The weighted iteration product fails to converge.
    #[error("iteration product diverges: {0}")]
    ProductDivergence(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Integrand(#[from] IntegrandError),
    #[error(transparent)]
    Orlicz(#[from] OrliczError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Piecewise-linear radial cutoff: `1` on the closed ball of radius `rho`,
/// `0` outside radius `r`, affine in `|x|` between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cutoff {
    pub rho: f64,
    pub r: f64,
}

impl Cutoff {
    pub fn new(rho: f64, r: f64) -> Result<Cutoff, EstimateError> {
        if !(0.0 < rho && rho < r && r.is_finite()) {
            return Err(EstimateError::Domain(format!(
                "cutoff radii must satisfy 0 < rho < R, got rho = {rho}, R = {r}"
            )));
        }
        Ok(Cutoff { rho, r })
    }

    fn radius(x: &Point, dim: usize) -> f64 {
        x[..dim].iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `clamp((R - |x|) / (R - rho), 0, 1)`; exactly `1` for `|x| <= rho`.
    pub fn eval(&self, x: &Point, dim: usize) -> f64 {
        let t = (self.r - Self::radius(x, dim)) / (self.r - self.rho);
        t.clamp(0.0, 1.0)
    }

    /// `|grad eta|` of the radial profile: `1/(R - rho)` strictly between
    /// the radii, zero on the plateau and outside the support.
    pub fn grad_magnitude(&self, x: &Point, dim: usize) -> f64 {
        let rad = Self::radius(x, dim);
        if rad > self.rho && rad < self.r {
            1.0 / (self.r - self.rho)
        } else {
            0.0
        }
    }

    /// Uniform gradient bound with a rounding allowance.
    pub fn grad_bound(&self) -> f64 {
        1.0 / (self.r - self.rho) + 1e-12
    }
}

/// `V = (mu^2 + |z|^2)^{1/2}`.
pub fn v_of(mu: f64, z: &[f64; 3]) -> f64 {
    (mu * mu + z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt()
}

/// One Caccioppoli-type comparison at stabilization exponent `gamma`:
/// second derivatives weighted by `eta^2 V^{p-2+gamma}` against the three
/// right-hand loads (coefficient-derivative term, and the two cutoff-slope
/// energies at exponents `p+gamma` and `q+gamma`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaccioppoliReport {
    pub rho: f64,
    pub r: f64,
    pub gamma: f64,
    /// `int eta^2 V^{p-2+gamma} |D^2 u|^2`.
    pub lhs: f64,
    /// `[(1+gamma^2) int eta^2 h^2 V^{2q-p+gamma},
    ///   int |D eta|^2 V^{p+gamma}, int |D eta|^2 V^{q+gamma}]`.
    pub rhs: [f64; 3],
    pub rhs_sum: f64,
    /// `lhs / rhs_sum`, with the empty comparison `0/0` fitted as `0`.
    pub fitted_c: f64,
}

pub fn caccioppoli_check(
    field: &GridField,
    integrand: &Integrand,
    cutoff: &Cutoff,
    gamma: f64,
) -> Result<CaccioppoliReport, EstimateError> {
    if !field.converged {
        return Err(EstimateError::StaleField);
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(EstimateError::Domain(format!("gamma = {gamma} must be finite and >= 0")));
    }
    let grid = &field.grid;
    if integrand.dim != grid.dim {
        return Err(EstimateError::Domain(format!(
            "integrand dimension {} does not match field dimension {}",
            integrand.dim, grid.dim
        )));
    }
    if cutoff.r > grid.extent * (1.0 + 1e-12) {
        return Err(EstimateError::Domain(format!(
            "outer radius {} does not fit in the domain of extent {}",
            cutoff.r, grid.extent
        )));
    }
    let (p, q, mu) = (integrand.e.p_f64(), integrand.e.q_f64(), integrand.e.mu);
    let dim = grid.dim;
    let cell = grid.spacing().powi(dim as i32);
    let grads = field.nodal_gradients();
    let hessians = field.nodal_hessians();

    let mut lhs = 0.0;
    let mut rhs = [0.0f64; 3];
    for idx in 0..grid.node_count() {
        let x = grid.node_coord(idx);
        let eta = cutoff.eval(&x, dim);
        let deta = cutoff.grad_magnitude(&x, dim);
        if eta == 0.0 && deta == 0.0 {
            continue;
        }
        let w = {
            let g = &grads[idx];
            mu * mu + g[0] * g[0] + g[1] * g[1] + g[2] * g[2]
        };
        if eta > 0.0 {
            let h2: f64 = {
                let mut s = 0.0;
                let hm = &hessians[idx];
                for row in hm.iter().take(dim) {
                    for v in row.iter().take(dim) {
                        s += v * v;
                    }
                }
                s
            };
            lhs += cell * eta * eta * w.powf((p - 2.0 + gamma) / 2.0) * h2;
            let hcoef = integrand.coeffs_at(&x).h;
            rhs[0] += cell * eta * eta * hcoef * hcoef * w.powf((2.0 * q - p + gamma) / 2.0);
        }
        if deta > 0.0 {
            rhs[1] += cell * deta * deta * w.powf((p + gamma) / 2.0);
            rhs[2] += cell * deta * deta * w.powf((q + gamma) / 2.0);
        }
    }
    rhs[0] *= 1.0 + gamma * gamma;
    let rhs_sum = rhs[0] + rhs[1] + rhs[2];
    let fitted_c = if lhs == 0.0 || rhs_sum == 0.0 { 0.0 } else { lhs / rhs_sum };
    if !fitted_c.is_finite() {
        return Err(EstimateError::Domain(format!(
            "fitted constant {fitted_c} is not finite (lhs {lhs}, rhs sum {rhs_sum})"
        )));
    }
    Ok(CaccioppoliReport { rho: cutoff.rho, r: cutoff.r, gamma, lhs, rhs, rhs_sum, fitted_c })
}

/// Sobolev-embedding constant bundle for the iteration: `H` is the n-th
/// root of the measured coefficient norm, and `Theta = 1 + 4^n H^{2n}` is
/// the iteration's bookkeeping constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MoserConstants {
    pub n: u32,
    pub h: f64,
    pub h_squared: f64,
    pub theta: f64,
}

impl MoserConstants {
    /// Builds the bundle from a nonnegative norm value (`H^n = value`).
    pub fn from_value(n: u32, value: f64) -> Result<MoserConstants, EstimateError> {
        if n < 2 {
            return Err(EstimateError::Domain(format!("dimension n = {n} must be >= 2")));
        }
        if !(value >= 0.0) || !value.is_finite() {
            return Err(EstimateError::Domain(format!(
                "norm value {value} must be finite and >= 0"
            )));
        }
        let nf = n as f64;
        let h = value.powf(1.0 / nf);
        Ok(MoserConstants {
            n,
            h,
            h_squared: value.powf(2.0 / nf),
            theta: 1.0 + 4.0f64.powi(n as i32) * value * value,
        })
    }
}

/// The level at which the superlinear phase is split from the p-phase:
/// `L^{-1}(2^n H^n (1 + gamma^2)^n K^{n(q-p)})`, where `L` is the
/// coefficient weight of the exponent set. Doubling the truncation level
/// `K` multiplies the argument by exactly `2^{n(q-p)}`.
pub fn epsilon_split(
    e: &ExponentSet,
    moser: &MoserConstants,
    gamma: f64,
    k: f64,
) -> Result<f64, EstimateError> {
    if e.p == e.q {
        return Err(EstimateError::SplitNotApplicable);
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(EstimateError::Domain(format!("truncation level K = {k} must be > 0")));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(EstimateError::Domain(format!("gamma = {gamma} must be finite and >= 0")));
    }
    if moser.h == 0.0 {
        return Ok(0.0);
    }
    let n = e.n as f64;
    let qp = e.q_f64() - e.p_f64();
    let arg = (2.0 * moser.h * (1.0 + gamma * gamma)).powf(n) * k.powf(n * qp);
    if !arg.is_finite() {
        return Err(EstimateError::Domain(format!(
            "split argument overflowed (H = {}, gamma = {gamma}, K = {k})",
            moser.h
        )));
    }
    let w = OrliczWeight::from_exponents(e);
    Ok(w.inverse(arg)?)
}

/// Result of fitting the regime gain function `G` against a measured
/// gradient sup: the smallest `C'` with `sup <= G(C' x averaged energy)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MainEstimateReport {
    pub rho: f64,
    pub r: f64,
    pub case: GrowthCase,
    /// `sup |Du|` over simplices with barycenter in the inner ball.
    pub lhs_sup: f64,
    /// `(R - rho)^{-n} int_{B_R} (1 + |Du|^p)`.
    pub integral_avg: f64,
    pub c_prime: f64,
    /// `G(c_prime x integral_avg)`, equal to the sup up to fit tolerance.
    pub g_value: f64,
}

/// Smallest `c >= 0` with `g_eval(e, case, c * inner) >= lhs`, by doubling
/// and bisection on the argument of the increasing function `G`.
fn fit_c_prime(
    e: &ExponentSet,
    case: GrowthCase,
    lhs: f64,
    inner: f64,
) -> Result<f64, EstimateError> {
    if lhs == 0.0 {
        return Ok(0.0);
    }
    if !(inner > 0.0) || !inner.is_finite() {
        return Err(EstimateError::Domain(format!(
            "averaged energy {inner} must be positive and finite"
        )));
    }
    let g = |t: f64| g_eval(e, case, t);
    let mut hi = 1.0f64;
    let mut guard = 0;
    while g(hi)? < lhs {
        hi *= 2.0;
        guard += 1;
        if guard > 4000 {
            return Err(EstimateError::Domain(format!(
                "gain function cannot reach sup value {lhs}"
            )));
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? >= lhs {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
    }
    Ok(hi / inner)
}

/// Fits the a priori gradient bound on a computed minimizer: the sup of
/// `|Du|` over the inner ball against the `G`-transformed averaged energy
/// over the outer ball. `c_prime` is zero exactly when the sup vanishes,
/// and is nonincreasing in the averaged energy by construction.
pub fn main_estimate_check(
    field: &GridField,
    integrand: &Integrand,
    rho: f64,
    r: f64,
) -> Result<MainEstimateReport, EstimateError> {
    if !field.converged {
        return Err(EstimateError::StaleField);
    }
    let cutoff = Cutoff::new(rho, r)?;
    let grid = &field.grid;
    if r > grid.extent * (1.0 + 1e-12) {
        return Err(EstimateError::Domain(format!(
            "outer radius {r} does not fit in the domain of extent {}",
            grid.extent
        )));
    }
    let e = &integrand.e;
    let case = classify_permissive(e)?;
    let p = e.p_f64();
    let dim = grid.dim;
    let vol = grid.simplex_volume();
    let mut lhs = 0.0f64;
    let mut integral = 0.0f64;
    for (bary, du) in field.simplex_gradients() {
        let rad: f64 = bary[..dim].iter().map(|c| c * c).sum::<f64>().sqrt();
        let mag = (du[0] * du[0] + du[1] * du[1] + du[2] * du[2]).sqrt();
        if rad <= rho {
            lhs = lhs.max(mag);
        }
        if rad <= r {
            integral += vol * (1.0 + mag.powf(p));
        }
    }
    let inner = integral / (r - rho).powi(dim as i32);
    let c_prime = fit_c_prime(e, case, lhs, inner)?;
    let g_value = g_eval(e, case, c_prime * inner)?;
    let _ = cutoff;
    Ok(MainEstimateReport { rho, r, case, lhs_sup: lhs, integral_avg: inner, c_prime, g_value })
}

/// Log-domain partial products of the two iteration factors: the growth
/// factor `prod (C 4^{j+1} p_j^4 / d^2)^{1/p_j}` and the weight factor
/// `prod (L^{-1}(2 Theta p_j^{4n}))^{1/p_j}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub j_max: u32,
    /// Running partial sums of the growth-factor logs.
    pub log_growth_partials: Vec<f64>,
    /// Running partial sums of the weight-factor logs.
    pub log_weight_partials: Vec<f64>,
    pub log_p_growth: f64,
    pub log_p_weight: f64,
    pub p_growth: f64,
    pub p_weight: f64,
    /// `p_growth * p_weight`, the overall iteration constant.
    pub product: f64,
    pub last_term_growth: f64,
    pub last_term_weight: f64,
}

/// Accumulates both iteration products in the log domain (the raw terms
/// overflow f64 long before `j = 60`). Balanced weights on the
/// differentiability borderline (`r = n`) need `alpha > 4n` for the weight
/// product to converge; at or below that threshold the terms do not vanish
/// and the call reports divergence.
pub fn iteration_trace(
    e: &ExponentSet,
    moser: &MoserConstants,
    c: f64,
    d: f64,
    j_max: u32,
) -> Result<IterationTrace, EstimateError> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(EstimateError::Domain(format!("iteration constant C = {c} must be > 0")));
    }
    if !(d > 0.0 && d <= 1.0) {
        return Err(EstimateError::Domain(format!(
            "radius margin d = {d} must lie in (0, 1]"
        )));
    }
    if j_max == 0 {
        return Err(EstimateError::Domain("need at least one iteration step".into()));
    }
    let n_rat = Rational::from_int(e.n as i64);
    if e.r == n_rat && e.alpha <= Rational::from_int(4 * e.n as i64) {
        return Err(EstimateError::ProductDivergence(format!(
            "r = n = {} with alpha = {} <= 4n: the weight-factor terms do not vanish",
            e.n, e.alpha
        )));
    }
    let seq = MoserExponentSeq::new(e)?;
    let w = OrliczWeight::from_exponents(e);
    let n = e.n as f64;
    let log4 = 4.0f64.ln();
    let log_cd = c.ln() - 2.0 * d.ln();
    let log_2theta = (2.0 * moser.theta).ln();

    let mut growth_partials = Vec::with_capacity(j_max as usize + 1);
    let mut weight_partials = Vec::with_capacity(j_max as usize + 1);
    let mut sum_g = 0.0;
    let mut sum_w = 0.0;
    let mut last_g = 0.0;
    let mut last_w = 0.0;
    for j in 0..=j_max {
        let pj = seq.exponent(j);
        let log_pj = pj.ln();
        last_g = (log_cd + (j as f64 + 1.0) * log4 + 4.0 * log_pj) / pj;
        let log_tau = log_2theta + 4.0 * n * log_pj;
        last_w = w.log_inverse_of_log(log_tau)? / pj;
        sum_g += last_g;
        sum_w += last_w;
        growth_partials.push(sum_g);
        weight_partials.push(sum_w);
    }
    Ok(IterationTrace {
        j_max,
        log_growth_partials: growth_partials,
        log_weight_partials: weight_partials,
        log_p_growth: sum_g,
        log_p_weight: sum_w,
        p_growth: sum_g.exp(),
        p_weight: sum_w.exp(),
        product: (sum_g + sum_w).exp(),
        last_term_growth: last_g,
        last_term_weight: last_w,
    })
}

/// One parameter point of the batch scan, stored as raw rationals so that
/// gap-violating points can still be listed (they are gated, not solved).
#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub name: String,
    pub kind: Kind,
    pub dim: usize,
    pub p: Rational,
    pub q: Rational,
    pub r: Rational,
    pub alpha: Rational,
    pub mu: f64,
    pub profile: Profile,
    pub boundary: BoundaryData,
}

impl ScanPoint {
    /// Validates the exponents, classifies them (permissively, so strict
    /// points with a log weight are accepted), and builds the integrand.
    pub fn build(&self) -> Result<(ExponentSet, GrowthCase, Integrand), EstimateError> {
        let e = ExponentSet::new(self.dim as u32, self.p, self.q, self.r, self.alpha)?
            .with_mu(self.mu)?;
        let case = classify_permissive(&e)?;
        let i = match self.kind {
            Kind::K1 => Integrand::k1(e.clone(), self.dim)?,
            Kind::K2 => Integrand::k2(e.clone(), self.dim, self.profile.clone())?,
            Kind::K3 => Integrand::k3(e.clone(), self.dim, self.profile.clone())?,
        };
        Ok((e, case, i))
    }
}

/// The default 2-D scan roster: one point per regime (the borderline point
/// swept over three log-weight strengths) plus one deliberately
/// gap-violating point that exercises the classification gate.
pub fn default_scan_points() -> Vec<ScanPoint> {
    let sine = Profile::Sine { mid: 1.5, amp: 0.5 };
    let mut points = vec![
        ScanPoint {
            name: "standard".into(),
            kind: Kind::K1,
            dim: 2,
            p: Rational::from_int(2),
            q: Rational::from_int(2),
            r: Rational::from_int(2),
            alpha: Rational::from_int(9),
            mu: 1.0,
            profile: Profile::Const { value: 1.0 },
            boundary: BoundaryData::HarmonicQuartic,
        },
        ScanPoint {
            name: "strict".into(),
            kind: Kind::K3,
            dim: 2,
            p: Rational::from_int(2),
            q: Rational::new(11, 5).unwrap(),
            r: Rational::from_int(4),
            alpha: Rational::zero(),
            mu: 1.0,
            profile: sine.clone(),
            boundary: BoundaryData::HarmonicQuartic,
        },
    ];
    // Borderline points: q/p exactly on the gap bound 1 + 1/n - 1/r
    // (= 5/4 for n = 2, r = 4), with the log-weight strength swept.
    for (tag, alpha) in [("limit-a", Rational::new(1, 2).unwrap()),
        ("limit-b", Rational::from_int(1)),
        ("limit-c", Rational::from_int(2))]
    {
        points.push(ScanPoint {
            name: tag.into(),
            kind: Kind::K3,
            dim: 2,
            p: Rational::from_int(2),
            q: Rational::new(5, 2).unwrap(),
            r: Rational::from_int(4),
            alpha,
            mu: 1.0,
            profile: sine.clone(),
            boundary: BoundaryData::HarmonicQuartic,
        });
    }
    points.push(ScanPoint {
        name: "gap-violation".into(),
        kind: Kind::K3,
        dim: 2,
        p: Rational::from_int(2),
        q: Rational::from_int(3),
        r: Rational::from_int(4),
        alpha: Rational::from_int(1),
        mu: 1.0,
        profile: sine,
        boundary: BoundaryData::HarmonicQuartic,
    });
    points
}

/// Scan policy: grids, cutoff pairs, stabilization exponents, solver
/// settings. The seed is recorded for artifact provenance (the scan itself
/// is deterministic).
#[derive(Debug, Clone, Serialize)]
pub struct ScanConfig {
    pub m_list: Vec<usize>,
    pub radius_pairs: Vec<(f64, f64)>,
    pub gamma_list: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            m_list: vec![17, 33],
            radius_pairs: vec![(0.2, 0.4), (0.25, 0.5), (0.3, 0.6)],
            gamma_list: vec![0.0, 2.0, 4.0],
            tol: 1e-6,
            max_iter: 50_000,
            seed: 7,
        }
    }
}

/// One CSV row of the scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub point: String,
    pub regime: String,
    pub p: Rational,
    pub q: Rational,
    pub r_exp: Rational,
    pub alpha: Rational,
    pub m: usize,
    pub rho: f64,
    pub radius: f64,
    pub gamma: f64,
    pub lhs: Option<f64>,
    pub rhs_sum: Option<f64>,
    pub fitted_c: Option<f64>,
    pub g_argument: Option<f64>,
    pub c_prime: Option<f64>,
    pub verdict: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
}

fn regime_label(case: GrowthCase) -> &'static str {
    match case {
        GrowthCase::StandardGrowth => "standard-growth",
        GrowthCase::StrictGap => "strict-gap",
        GrowthCase::LimitGap => "limit-gap",
    }
}

/// Runs the full sweep: each valid point is solved once per grid (in
/// parallel across point-grid pairs, in a fixed order), then measured for
/// every cutoff pair and stabilization exponent. Gap-violating points
/// produce a single gated row instead of a solve.
pub fn regime_scan(points: &[ScanPoint], cfg: &ScanConfig) -> Result<ScanResult, EstimateError> {
    if cfg.m_list.is_empty() || cfg.radius_pairs.is_empty() || cfg.gamma_list.is_empty() {
        return Err(EstimateError::Domain("empty scan configuration".into()));
    }
    let opts = SolverOptions { tol: cfg.tol, max_iter: cfg.max_iter, precondition: true };

    enum Solved {
        Gated(String),
        Field(Box<(ExponentSet, GrowthCase, Integrand, GridField)>),
        Unconverged,
    }

    let jobs: Vec<(usize, usize)> = points
        .iter()
        .enumerate()
        .flat_map(|(pi, _)| cfg.m_list.iter().map(move |&m| (pi, m)))
        .collect();
    let solved: Vec<Result<Solved, EstimateError>> = jobs
        .par_iter()
        .map(|&(pi, m)| {
            let point = &points[pi];
            let built = match point.build() {
                Ok(t) => t,
                Err(EstimateError::Exponent(ExponentError::GapViolation { .. })) => {
                    return Ok(Solved::Gated("gap-violation".into()));
                }
                Err(EstimateError::Exponent(ExponentError::HypothesisNotMet(msg))) => {
                    return Ok(Solved::Gated(format!("hypothesis-not-met: {msg}")));
                }
                Err(err) => return Err(err),
            };
            let (e, case, integrand) = built;
            let grid = Grid::new(point.dim, 1.0, m)?;
            match minimize(grid, &integrand, &point.boundary, &opts) {
                Ok((field, _)) => Ok(Solved::Field(Box::new((e, case, integrand, field)))),
                Err(SolverError::NonConvergence { .. }) => Ok(Solved::Unconverged),
                Err(err) => Err(err.into()),
            }
        })
        .collect();

    let mut rows = Vec::new();
    for (job_idx, &(pi, m)) in jobs.iter().enumerate() {
        let point = &points[pi];
        // Gated points produce one row each, not one row per grid.
        let first_job_of_point = job_idx == 0 || jobs[job_idx - 1].0 != pi;
        match &solved[job_idx] {
            Err(err) => {
                return Err(EstimateError::Domain(format!(
                    "scan point '{}' failed at m = {m}: {err}",
                    point.name
                )))
            }
            Ok(Solved::Gated(label)) => {
                if first_job_of_point {
                    rows.push(ScanRow {
                        point: point.name.clone(),
                        regime: label.clone(),
                        p: point.p,
                        q: point.q,
                        r_exp: point.r,
                        alpha: point.alpha,
                        m: 0,
                        rho: 0.0,
                        radius: 0.0,
                        gamma: 0.0,
                        lhs: None,
                        rhs_sum: None,
                        fitted_c: None,
                        g_argument: None,
                        c_prime: None,
                        verdict: "skipped".into(),
                    });
                }
            }
            Ok(Solved::Unconverged) => {
                for &(rho, r) in &cfg.radius_pairs {
                    for &gamma in &cfg.gamma_list {
                        rows.push(ScanRow {
                            point: point.name.clone(),
                            regime: "unconverged".into(),
                            p: point.p,
                            q: point.q,
                            r_exp: point.r,
                            alpha: point.alpha,
                            m,
                            rho,
                            radius: r,
                            gamma,
                            lhs: None,
                            rhs_sum: None,
                            fitted_c: None,
                            g_argument: None,
                            c_prime: None,
                            verdict: "unconverged".into(),
                        });
                    }
                }
            }
            Ok(Solved::Field(data)) => {
                let (_e, case, integrand, field) = data.as_ref();
                for &(rho, r) in &cfg.radius_pairs {
                    let cutoff = Cutoff::new(rho, r)?;
                    let main = main_estimate_check(field, integrand, rho, r)?;
                    for &gamma in &cfg.gamma_list {
                        let cacc = caccioppoli_check(field, integrand, &cutoff, gamma)?;
                        rows.push(ScanRow {
                            point: point.name.clone(),
                            regime: regime_label(*case).into(),
                            p: point.p,
                            q: point.q,
                            r_exp: point.r,
                            alpha: point.alpha,
                            m,
                            rho,
                            radius: r,
                            gamma,
                            lhs: Some(cacc.lhs),
                            rhs_sum: Some(cacc.rhs_sum),
                            fitted_c: Some(cacc.fitted_c),
                            g_argument: Some(main.integral_avg),
                            c_prime: Some(main.c_prime),
                            verdict: "ok".into(),
                        });
                    }
                }
            }
        }
    }
    Ok(ScanResult { rows })
}

fn fmt_opt(v: &Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.12e}"),
        None => String::new(),
    }
}

/// Writes the scan as CSV. The first line is a `#` comment carrying the
/// generation timestamp; everything below it is a pure function of the
/// scan input, so repeated runs are byte-identical apart from that line.
pub fn write_scan_csv<W: Write>(scan: &ScanResult, mut w: W) -> std::io::Result<()> {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    writeln!(w, "# generated_unix={stamp}")?;
    writeln!(w, "regime,p,q,r,alpha,m,rho,R,gamma,lhs,rhs_sum,fitted_C,G_argument,C_prime,verdict")?;
    for row in &scan.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.regime,
            row.p,
            row.q,
            row.r_exp,
            row.alpha,
            row.m,
            row.rho,
            row.radius,
            row.gamma,
            fmt_opt(&row.lhs),
            fmt_opt(&row.rhs_sum),
            fmt_opt(&row.fitted_c),
            fmt_opt(&row.g_argument),
            fmt_opt(&row.c_prime),
            row.verdict,
        )?;
    }
    Ok(())
}

/// Writes two-column plot files per solved point: the fitted gradient-bound
/// constant against grid resolution, and the fitted Caccioppoli constant
/// against the stabilization exponent (at the finest grid). Returns the
/// written paths.
pub fn write_plot_data(scan: &ScanResult, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut names: Vec<&str> = Vec::new();
    for row in &scan.rows {
        if row.verdict == "ok" && !names.contains(&row.point.as_str()) {
            names.push(&row.point);
        }
    }
    let mut written = Vec::new();
    for name in names {
        let ok_rows: Vec<&ScanRow> =
            scan.rows.iter().filter(|r| r.point == name && r.verdict == "ok").collect();
        let first_pair = (ok_rows[0].rho, ok_rows[0].radius);
        let first_gamma = ok_rows[0].gamma;
        let last_m = ok_rows.iter().map(|r| r.m).max().unwrap();

        let slug = name.replace([' ', '/'], "-");
        let main_path = dir.join(format!("{slug}_gradient_bound.dat"));
        let mut f = std::fs::File::create(&main_path)?;
        writeln!(f, "# m c_prime")?;
        for row in &ok_rows {
            if (row.rho, row.radius) == first_pair && row.gamma == first_gamma {
                writeln!(f, "{} {}", row.m, fmt_opt(&row.c_prime))?;
            }
        }
        written.push(main_path);

        let cacc_path = dir.join(format!("{slug}_caccioppoli.dat"));
        let mut f = std::fs::File::create(&cacc_path)?;
        writeln!(f, "# gamma fitted_c")?;
        for row in &ok_rows {
            if (row.rho, row.radius) == first_pair && row.m == last_m {
                writeln!(f, "{} {}", row.gamma, fmt_opt(&row.fitted_c))?;
            }
        }
        written.push(cacc_path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::Profile;

    fn rat(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn exps(n: u32, p: &str, q: &str, r: &str, alpha: &str) -> ExponentSet {
        ExponentSet::new(n, rat(p), rat(q), rat(r), rat(alpha)).unwrap()
    }

    fn k3_sine_2d() -> Integrand {
        // Limit-case exponents for n = 2: gap bound 1 + 1/2 - 1/4 = 5/4.
        let e = exps(2, "2", "5/2", "4", "1").with_mu(1.0).unwrap();
        Integrand::k3(e, 2, Profile::Sine { mid: 1.5, amp: 0.5 }).unwrap()
    }

    fn solved_field(i: &Integrand, m: usize, tol: f64) -> GridField {
        let g = Grid::new(2, 1.0, m).unwrap();
        let (field, report) =
            minimize(g, i, &BoundaryData::HarmonicQuadratic, &SolverOptions {
                tol,
                ..Default::default()
            })
            .unwrap();
        assert!(report.converged);
        field
    }

    #[test]
    fn cutoff_is_one_inside_and_vanishes_outside() {
        let c = Cutoff::new(0.25, 0.5).unwrap();
        assert_eq!(c.eval(&[0.1, 0.2, 0.0], 2), 1.0);
        assert_eq!(c.eval(&[0.25, 0.0, 0.0], 2), 1.0);
        assert_eq!(c.eval(&[0.6, 0.0, 0.0], 2), 0.0);
        let mid = c.eval(&[0.375, 0.0, 0.0], 2);
        assert!((mid - 0.5).abs() < 1e-12);
        assert_eq!(c.grad_magnitude(&[0.1, 0.0, 0.0], 2), 0.0);
        assert!((c.grad_magnitude(&[0.375, 0.0, 0.0], 2) - 4.0).abs() < 1e-12);
        assert!(c.grad_bound() >= 4.0);
        assert!(Cutoff::new(0.5, 0.25).is_err());
        assert!(Cutoff::new(0.0, 0.5).is_err());
    }

    #[test]
    fn moser_constants_match_hand_values() {
        let m = MoserConstants::from_value(3, 1.0).unwrap();
        assert_eq!(m.h, 1.0);
        assert_eq!(m.h_squared, 1.0);
        assert_eq!(m.theta, 65.0);
        let m = MoserConstants::from_value(2, 4.0).unwrap();
        assert_eq!(m.h, 2.0);
        assert_eq!(m.h_squared, 4.0);
        assert_eq!(m.theta, 257.0);
        assert!(MoserConstants::from_value(1, 1.0).is_err());
        assert!(MoserConstants::from_value(3, -1.0).is_err());
    }

    #[test]
    fn split_level_matches_the_cubic_weight_inverse() {
        // r = 6, n = 3, alpha = 0: L(t) = t^3, and with H = 1, gamma = 0,
        // K = 1 the argument is 2^3 = 8, so the level is exactly 2.
        let e = exps(3, "2", "7/3", "6", "0");
        let moser = MoserConstants::from_value(3, 1.0).unwrap();
        let eps = epsilon_split(&e, &moser, 0.0, 1.0).unwrap();
        assert!((eps - 2.0).abs() < 1e-10, "split level {eps}");
    }

    #[test]
    fn split_level_doubles_with_the_truncation_exponent() {
        let e = exps(3, "2", "7/3", "6", "2");
        let w = OrliczWeight::from_exponents(&e);
        let moser = MoserConstants::from_value(3, 2.5).unwrap();
        let e1 = epsilon_split(&e, &moser, 2.0, 3.0).unwrap();
        let e2 = epsilon_split(&e, &moser, 2.0, 6.0).unwrap();
        let ratio = w.eval(e2) / w.eval(e1);
        let expected = 2.0f64.powf(3.0 * (7.0 / 3.0 - 2.0));
        assert!(
            (ratio - expected).abs() < 1e-9 * expected,
            "weight ratio {ratio} vs {expected}"
        );
    }

    #[test]
    fn split_level_edge_cases() {
        let balanced = exps(3, "2", "2", "3", "13");
        let moser = MoserConstants::from_value(3, 1.0).unwrap();
        assert!(matches!(
            epsilon_split(&balanced, &moser, 0.0, 1.0),
            Err(EstimateError::SplitNotApplicable)
        ));
        let e = exps(3, "2", "7/3", "6", "2");
        let zero = MoserConstants::from_value(3, 0.0).unwrap();
        assert_eq!(epsilon_split(&e, &zero, 1.0, 2.0).unwrap(), 0.0);
        assert!(epsilon_split(&e, &moser, -1.0, 1.0).is_err());
        assert!(epsilon_split(&e, &moser, 0.0, 0.0).is_err());
    }

    #[test]
    fn caccioppoli_second_derivative_term_vanishes_for_affine_data() {
        // Spatially constant coefficients + affine data: the minimizer is
        // the affine interpolant itself (zero solver iterations), its nodal
        // gradients are constant, and the central-difference Hessian is
        // identically zero, so the left side is exactly 0.0.
        let e = exps(2, "2", "2", "2", "9").with_mu(1.0).unwrap();
        let i = Integrand::k1(e, 2).unwrap();
        let g = Grid::new(2, 1.0, 17).unwrap();
        let (field, report) = minimize(
            g,
            &i,
            &BoundaryData::Linear { b: [1.0, -0.5, 0.0] },
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(report.iterations, 0);
        let cutoff = Cutoff::new(0.25, 0.5).unwrap();
        let rep = caccioppoli_check(&field, &i, &cutoff, 2.0).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert_eq!(rep.fitted_c, 0.0);
        assert!(rep.rhs_sum > 0.0, "cutoff-slope terms see V >= mu > 0");
    }

    #[test]
    fn caccioppoli_constant_is_stable_under_refinement() {
        let i = k3_sine_2d();
        let cutoff = Cutoff::new(0.25, 0.5).unwrap();
        let coarse = solved_field(&i, 17, 1e-6);
        let fine = solved_field(&i, 33, 1e-6);
        for gamma in [0.0, 2.0, 4.0] {
            let a = caccioppoli_check(&coarse, &i, &cutoff, gamma).unwrap();
            let b = caccioppoli_check(&fine, &i, &cutoff, gamma).unwrap();
            assert!(a.fitted_c.is_finite() && a.fitted_c > 0.0);
            assert!(b.fitted_c.is_finite() && b.fitted_c > 0.0);
            let ratio = (a.fitted_c / b.fitted_c).max(b.fitted_c / a.fitted_c);
            assert!(
                ratio <= 4.0,
                "gamma = {gamma}: fitted constants {} vs {} drift by {ratio}",
                a.fitted_c,
                b.fitted_c
            );
        }
    }

    #[test]
    fn caccioppoli_rejects_bad_inputs() {
        let i = k3_sine_2d();
        let mut field = solved_field(&i, 9, 1e-5);
        let cutoff = Cutoff::new(0.25, 0.5).unwrap();
        assert!(caccioppoli_check(&field, &i, &cutoff, -1.0).is_err());
        let too_big = Cutoff::new(0.5, 1.5).unwrap();
        assert!(matches!(
            caccioppoli_check(&field, &i, &too_big, 0.0),
            Err(EstimateError::Domain(_))
        ));
        field.converged = false;
        assert!(matches!(
            caccioppoli_check(&field, &i, &cutoff, 0.0),
            Err(EstimateError::StaleField)
        ));
    }

    #[test]
    fn zero_boundary_data_gives_zero_c_prime() {
        let e = exps(2, "2", "2", "2", "9").with_mu(1.0).unwrap();
        let i = Integrand::k1(e, 2).unwrap();
        let g = Grid::new(2, 1.0, 9).unwrap();
        let (field, _) = minimize(
            g,
            &i,
            &BoundaryData::Linear { b: [0.0, 0.0, 0.0] },
            &SolverOptions::default(),
        )
        .unwrap();
        let rep = main_estimate_check(&field, &i, 0.25, 0.5).unwrap();
        assert_eq!(rep.lhs_sup, 0.0);
        assert_eq!(rep.c_prime, 0.0);
    }

    #[test]
    fn fitted_gain_constant_inverts_g_and_shrinks_with_energy() {
        let e = exps(2, "2", "5/2", "4", "1").with_mu(1.0).unwrap();
        let case = classify_permissive(&e).unwrap();
        let lhs = 3.0;
        let inner = 2.0;
        let c = fit_c_prime(&e, case, lhs, inner).unwrap();
        assert!(c > 0.0);
        let g = g_eval(&e, case, c * inner).unwrap();
        assert!((g - lhs).abs() <= 1e-8 * lhs, "G(c * inner) = {g} vs sup {lhs}");
        let c2 = fit_c_prime(&e, case, lhs, 2.0 * inner).unwrap();
        assert!(c2 <= c * (1.0 + 1e-12), "c' must not grow with the energy");
        assert!((2.0 * c2 - c).abs() <= 1e-8 * c, "argument c' * inner is invariant");
    }

    #[test]
    fn main_estimate_is_finite_on_a_genuine_minimizer() {
        let i = k3_sine_2d();
        let field = solved_field(&i, 17, 1e-6);
        let rep = main_estimate_check(&field, &i, 0.25, 0.5).unwrap();
        assert_eq!(rep.case, GrowthCase::LimitGap);
        assert!(rep.lhs_sup > 0.0);
        assert!(rep.c_prime > 0.0 && rep.c_prime.is_finite());
        assert!((rep.g_value - rep.lhs_sup).abs() <= 1e-6 * rep.lhs_sup);
        let mut stale = field;
        stale.converged = false;
        assert!(matches!(
            main_estimate_check(&stale, &i, 0.25, 0.5),
            Err(EstimateError::StaleField)
        ));
    }

    #[test]
    fn iteration_trace_matches_the_dyadic_closed_form() {
        // n = 4, p = 2: the Moser exponents are 2^{j+1} and the growth
        // factor has the closed form
        //   log P1(J) = log(C/d^2) (1 - 2^{-(J+1)})
        //             + 3 log4 (2 - (J+3) 2^{-(J+1)}),
        // with limit 4^6 C / d^2.
        let e = exps(4, "2", "2", "4", "17");
        let moser = MoserConstants::from_value(4, 1.0).unwrap();
        let (c, d) = (3.0, 0.25);
        let trace = iteration_trace(&e, &moser, c, d, 60).unwrap();
        let jf = 60.0f64;
        let tail = 2.0f64.powf(-(jf + 1.0));
        let expected = (c / (d * d)).ln() * (1.0 - tail)
            + 3.0 * 4.0f64.ln() * (2.0 - (jf + 3.0) * tail);
        assert!(
            (trace.log_p_growth - expected).abs() < 1e-9,
            "log growth {} vs closed form {expected}",
            trace.log_p_growth
        );
        let limit = 4096.0 * c / (d * d);
        assert!(
            (trace.p_growth - limit).abs() <= 1e-8 * limit,
            "growth product {} vs limit {limit}",
            trace.p_growth
        );
        // Reciprocal exponent sums reach n/(2p) by j = 60.
        let seq = MoserExponentSeq::new(&e).unwrap();
        assert!((seq.reciprocal_sum(60) - 1.0).abs() < 1e-8);
        assert!(trace.last_term_growth.abs() < 1e-8);
        // On the r = n borderline the weight terms decay only like
        // 2^{-j/alpha}: geometric with ratio < 1 (convergent since
        // alpha > 4n), but far from Cauchy-1e-8 at j = 60.
        let k = trace.log_weight_partials.len();
        let t_last = trace.log_weight_partials[k - 1] - trace.log_weight_partials[k - 2];
        let t_prev = trace.log_weight_partials[k - 2] - trace.log_weight_partials[k - 3];
        assert!(t_last > 0.0 && t_last < t_prev, "weight terms must decay");
        assert!(trace.p_weight.is_finite() && trace.product.is_finite());
    }

    #[test]
    fn iteration_trace_is_cauchy_above_the_borderline() {
        let e = exps(3, "2", "7/3", "6", "2");
        let moser = MoserConstants::from_value(3, 1.0).unwrap();
        let trace = iteration_trace(&e, &moser, 2.0, 0.5, 60).unwrap();
        assert!(trace.last_term_growth.abs() <= 1e-8);
        assert!(trace.last_term_weight.abs() <= 1e-8);
        let k = trace.log_growth_partials.len();
        let gap = (trace.log_growth_partials[k - 1] - trace.log_growth_partials[k - 6]).abs()
            + (trace.log_weight_partials[k - 1] - trace.log_weight_partials[k - 6]).abs();
        assert!(gap <= 1e-8, "partial sums still move by {gap}");
    }

    #[test]
    fn iteration_trace_diverges_on_the_borderline_weight() {
        // r = n with alpha = 4n: the weight-factor terms tend to a positive
        // constant, so the product cannot converge.
        let e = exps(3, "2", "2", "3", "12");
        let moser = MoserConstants::from_value(3, 1.0).unwrap();
        assert!(matches!(
            iteration_trace(&e, &moser, 2.0, 0.5, 60),
            Err(EstimateError::ProductDivergence(_))
        ));
        // Strictly above the threshold the trace converges (slowly).
        let e = exps(3, "2", "2", "3", "13");
        assert!(iteration_trace(&e, &moser, 2.0, 0.5, 60).is_ok());
    }

    #[test]
    fn default_points_cover_every_regime_and_the_gate() {
        let points = default_scan_points();
        let cases: Vec<String> = points
            .iter()
            .map(|pt| match pt.build() {
                Ok((_, case, _)) => regime_label(case).to_string(),
                Err(EstimateError::Exponent(ExponentError::GapViolation { .. })) => {
                    "gap".to_string()
                }
                Err(e) => panic!("unexpected build failure for {}: {e}", pt.name),
            })
            .collect();
        assert_eq!(
            cases,
            vec![
                "standard-growth",
                "strict-gap",
                "limit-gap",
                "limit-gap",
                "limit-gap",
                "gap"
            ]
        );
    }

    #[test]
    fn scan_emits_gated_and_measured_rows_deterministically() {
        let points = vec![default_scan_points()[0].clone(), default_scan_points()[5].clone()];
        let cfg = ScanConfig {
            m_list: vec![9],
            radius_pairs: vec![(0.25, 0.5)],
            gamma_list: vec![0.0],
            tol: 1e-5,
            max_iter: 50_000,
            seed: 7,
        };
        let scan = regime_scan(&points, &cfg).unwrap();
        assert_eq!(scan.rows.len(), 2);
        assert_eq!(scan.rows[0].verdict, "ok");
        assert_eq!(scan.rows[0].regime, "standard-growth");
        assert!(scan.rows[0].c_prime.unwrap() > 0.0);
        assert_eq!(scan.rows[1].verdict, "skipped");
        assert_eq!(scan.rows[1].regime, "gap-violation");
        assert!(scan.rows[1].lhs.is_none());

        let strip = |bytes: &[u8]| -> String {
            String::from_utf8(bytes.to_vec())
                .unwrap()
                .lines()
                .filter(|l| !l.starts_with('#'))
                .collect::<Vec<_>>()
                .join("\n")
        };
        let mut a = Vec::new();
        write_scan_csv(&scan, &mut a).unwrap();
        let scan_again = regime_scan(&points, &cfg).unwrap();
        let mut b = Vec::new();
        write_scan_csv(&scan_again, &mut b).unwrap();
        assert_eq!(strip(&a), strip(&b), "scan output must be reproducible");
        assert!(strip(&a).starts_with("regime,p,q,r,alpha,m,rho,R,gamma,"));
    }

    #[test]
    fn plot_data_files_are_written_per_solved_point() {
        let points = vec![default_scan_points()[0].clone()];
        let cfg = ScanConfig {
            m_list: vec![9, 17],
            radius_pairs: vec![(0.25, 0.5)],
            gamma_list: vec![0.0, 2.0],
            tol: 1e-5,
            max_iter: 50_000,
            seed: 7,
        };
        let scan = regime_scan(&points, &cfg).unwrap();
        let dir = std::env::temp_dir().join(format!("pqgl_plot_test_{}", std::process::id()));
        let written = write_plot_data(&scan, &dir).unwrap();
        assert_eq!(written.len(), 2);
        let coords = std::fs::read_to_string(&written[0]).unwrap();
        // Two grid resolutions -> two data lines after the header.
        assert_eq!(coords.lines().count(), 3);
        std::fs::remove_dir_all(&dir).ok();
    }
}
