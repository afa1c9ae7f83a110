//! Catalog of radial energy densities, their derivatives, sampled assumption
//! checks, and the truncate-then-mollify approximation pipeline.
//!
//! Three closed-form families cover the supported growth regimes:
//!
//! * **K1** single phase: `F = (mu^2+|xi|^2)^{p/2} - mu^p`;
//! * **K2** weighted single phase: `F = a(x) [(mu^2+|xi|^2)^{p/2} - mu^p]`;
//! * **K3** double phase type:
//!   `F = (mu^2+|xi|^2)^{p/2} - mu^p + a(x) [(mu^2+|xi|^2)^{q/2} - mu^q]`.
//!
//! All are shifted so `F(x, 0) = 0`, depend on `xi` only through `|xi|`, and
//! carry a bounded coefficient `0 < a_min <= a(x) <= a_max`. The measurable
//! bound for the mixed derivative is constructed, not fitted:
//! `h(x) = c_h |Da(x)| + c_0` with `c_h` chosen per family so
//! `|F_xix| <= h(x) (mu^2+|xi|^2)^{(q-1)/2}` holds identically.
//!
//! Evaluators are pure and reentrant; mollified coefficients are immutable
//! quadrature tables computed at construction, safe for concurrent reads.

use crate::exponents::ExponentSet;
use crate::quadrature::BallQuadrature;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::{E, PI};

pub type Point = [f64; 3];
pub type Vector = [f64; 3];
pub type Matrix = [[f64; 3]; 3];

/// Errors from catalog construction, evaluation, and the sampled checks.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrandError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate Hessian: {0}")]
    DegenerateHessian(String),
    #[error("ellipticity violated: {0}")]
    EllipticityViolation(String),
    #[error("growth envelope violated: {0}")]
    GrowthViolation(String),
    #[error("mixed-derivative bound violated: {0}")]
    MixedBoundViolation(String),
    #[error("quadrature did not settle: value {value}, relative change {rel_change}")]
    QuadratureWarning { value: f64, rel_change: f64 },
    #[error("gluing failed: {0}")]
    GlueError(String),
}

/// Catalog tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kind {
    K1,
    K2,
    K3,
}

/// Coefficient profile `a(x)`, with closed-form gradient and exact bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Profile {
    Const { value: f64 },
    /// `a(x) = mid + amp sin(pi x_1)`.
    Sine { mid: f64, amp: f64 },
    /// `a(x) = base + height exp(-|x|^2 / width^2)`.
    Bump { base: f64, height: f64, width: f64 },
    /// `a(x) = offset + slope . x`.
    Linear { offset: f64, slope: Vector },
}

impl Profile {
    fn eval(&self, x: &Point) -> f64 {
        match self {
            Profile::Const { value } => *value,
            Profile::Sine { mid, amp } => mid + amp * (PI * x[0]).sin(),
            Profile::Bump { base, height, width } => {
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                base + height * (-r2 / (width * width)).exp()
            }
            Profile::Linear { offset, slope } => {
                offset + slope[0] * x[0] + slope[1] * x[1] + slope[2] * x[2]
            }
        }
    }

    fn grad(&self, x: &Point) -> Vector {
        match self {
            Profile::Const { .. } => [0.0; 3],
            Profile::Sine { amp, .. } => [amp * PI * (PI * x[0]).cos(), 0.0, 0.0],
            Profile::Bump { height, width, .. } => {
                let w2 = width * width;
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                let s = height * (-r2 / w2).exp() * (-2.0 / w2);
                [s * x[0], s * x[1], s * x[2]]
            }
            Profile::Linear { slope, .. } => *slope,
        }
    }

    /// Valid (not necessarily attained) bounds over the cube `[-s, s]^dim`.
    fn bounds(&self, s: f64, dim: usize) -> (f64, f64) {
        match self {
            Profile::Const { value } => (*value, *value),
            Profile::Sine { mid, amp } => (mid - amp.abs(), mid + amp.abs()),
            Profile::Bump { base, height, .. } => (*base, base + height.max(0.0)),
            Profile::Linear { offset, slope } => {
                let reach: f64 = slope[..dim].iter().map(|c| c.abs() * s).sum();
                (offset - reach, offset + reach)
            }
        }
    }
}

/// Radial gluing data: the q-phase profile is continued past `|xi| = k` by
/// `c1 + c2 (mu^2+|xi|^2)^{p/2}`, matched in value and first derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Glue {
    k: f64,
    c1: f64,
    c2: f64,
}

/// Matched-value, matched-slope coefficients for the p-growth continuation of
/// `(mu^2+t^2)^{q/2} - mu^q` past `t = k`. Fails if the continuation would
/// lose convexity (`c2 <= 0`), which no valid `q > 0` produces.
fn glue_coefficients(p: f64, q: f64, mu: f64, k: f64) -> Result<(f64, f64), IntegrandError> {
    let wk = mu * mu + k * k;
    let c2 = q / p * wk.powf((q - p) / 2.0);
    if !(c2 > 0.0) || !c2.is_finite() {
        return Err(IntegrandError::GlueError(format!(
            "continuation coefficient c2 = {c2} at k = {k} is not positive"
        )));
    }
    let c1 = wk.powf(q / 2.0) - mu.powf(q) - c2 * wk.powf(p / 2.0);
    Ok((c1, c2))
}

/// Precomputed mollification table: unit-ball nodes with weights that already
/// include the bump profile `(1-|y|^2)^3`, normalized to unit mass.
#[derive(Debug, Clone, PartialEq)]
struct Mollification {
    eps: f64,
    nodes: Vec<Point>,
    weights: Vec<f64>,
}

/// The polynomial mollifier bump `c_n (1-|y|^2)^3` and its quadrature order.
#[derive(Debug, Clone, Copy)]
pub struct MollifierSpec {
    pub order: usize,
}

impl Default for MollifierSpec {
    fn default() -> Self {
        MollifierSpec { order: 12 }
    }
}

impl MollifierSpec {
    /// Unnormalized profile `(1-|y|^2)^3` on the unit ball.
    pub fn profile(y2: f64) -> f64 {
        if y2 >= 1.0 {
            0.0
        } else {
            let s = 1.0 - y2;
            s * s * s
        }
    }

    /// Numerically computed normalization constant `c_n` with
    /// `c_n * integral of (1-|y|^2)^3 over the unit ball = 1`.
    pub fn normalization(&self, dim: usize) -> f64 {
        let rule = BallQuadrature::unit(dim, self.order.max(8));
        let mass = rule.integrate(|y| {
            Self::profile(y[0] * y[0] + y[1] * y[1] + y[2] * y[2])
        });
        1.0 / mass
    }
}

/// Coefficient data at one point, possibly mollified.
#[derive(Debug, Clone, Copy)]
pub struct Coeffs {
    pub a: f64,
    pub da: Vector,
    pub h: f64,
}

/// Derivative bundle from [`Integrand::eval_derivatives`]; `f_xix[c][d]` is
/// the mixed derivative with respect to `xi_c` then `x_d`.
#[derive(Debug, Clone)]
pub struct Deriv {
    pub f: f64,
    pub f_xi: Vector,
    pub f_xixi: Matrix,
    pub f_xix: Matrix,
}

/// Empirical approximation constants of a (possibly truncated/mollified)
/// member, fitted as extremal sample ratios. `ell`, `lambda_tilde`,
/// `big_lambda_tilde`, `c_mix` are stable in the truncation level; the
/// `_k`-suffixed ones may grow with it.
#[derive(Debug, Clone, Serialize)]
pub struct ApproxBounds {
    pub ell: f64,
    pub ell1_k: f64,
    pub lambda_tilde: f64,
    pub big_lambda_tilde: f64,
    pub big_lambda_tilde1_k: f64,
    pub c_mix: f64,
    pub c1_mix_k: f64,
    /// Mixed constant against the mollified `h`; only present after
    /// mollification.
    pub c2_mix_k: Option<f64>,
    /// Worst sampled margin of the shifted p-coercivity
    /// `(mu^2+|xi|^2)^{p/2} - mu^p <= F`.
    pub lower_margin: f64,
    pub eps: Option<f64>,
    pub k: Option<f64>,
}

/// Report of [`orlicz_norm_h`].
#[derive(Debug, Clone, Serialize)]
pub struct OrliczNorm {
    /// Quadrature value of the integral of `h^r log^alpha(e+h)` over the ball.
    pub value: f64,
    /// `value^{2/n}`, the quantity the iteration constants consume.
    pub h_squared: f64,
    /// Relative change between the two refinement levels.
    pub rel_change: f64,
}

/// Sampling policy for the verification harnesses.
#[derive(Debug, Clone, Copy)]
pub struct SampleOpts {
    pub count: usize,
    pub seed: u64,
}

impl Default for SampleOpts {
    fn default() -> Self {
        SampleOpts { count: 2000, seed: 7 }
    }
}

/// One catalog energy density, optionally truncated and/or mollified.
#[derive(Debug, Clone, PartialEq)]
pub struct Integrand {
    pub kind: Kind,
    pub e: ExponentSet,
    pub dim: usize,
    /// Half-width of the coefficient domain cube `[-extent, extent]^dim`.
    pub extent: f64,
    profile: Profile,
    /// `h = c_h |Da| + c0`.
    pub c_h: f64,
    pub c0: f64,
    trunc: Option<Glue>,
    moll: Option<Mollification>,
}

impl Integrand {
    fn validate_dim(dim: usize) -> Result<(), IntegrandError> {
        if dim == 2 || dim == 3 {
            Ok(())
        } else {
            Err(IntegrandError::Domain(format!("dimension {dim} not in {{2, 3}}")))
        }
    }

    /// Single phase `(mu^2+|xi|^2)^{p/2} - mu^p`; autonomous, so `h = 0`.
    pub fn k1(e: ExponentSet, dim: usize) -> Result<Self, IntegrandError> {
        Self::validate_dim(dim)?;
        if e.p != e.q {
            return Err(IntegrandError::Domain(format!(
                "single-phase member needs p = q; got p = {}, q = {}",
                e.p, e.q
            )));
        }
        let p = e.p_f64();
        let e = e
            .with_ellipticity(lambda_for(p), big_lambda_for(p))
            .map_err(|err| IntegrandError::Domain(err.to_string()))?;
        Ok(Integrand {
            kind: Kind::K1,
            e,
            dim,
            extent: 1.0,
            profile: Profile::Const { value: 1.0 },
            c_h: 0.0,
            c0: 0.0,
            trunc: None,
            moll: None,
        })
    }

    /// Weighted single phase `a(x) [(mu^2+|xi|^2)^{p/2} - mu^p]`; `h = p|Da|`.
    pub fn k2(e: ExponentSet, dim: usize, profile: Profile) -> Result<Self, IntegrandError> {
        Self::validate_dim(dim)?;
        if e.p != e.q {
            return Err(IntegrandError::Domain(format!(
                "weighted single-phase member needs p = q; got p = {}, q = {}",
                e.p, e.q
            )));
        }
        let (a_min, a_max) = profile.bounds(1.0, dim);
        if !(a_min > 0.0) {
            return Err(IntegrandError::Domain(format!(
                "coefficient must stay positive; profile lower bound {a_min}"
            )));
        }
        let p = e.p_f64();
        let e = e
            .with_ellipticity(a_min * lambda_for(p), a_max * big_lambda_for(p))
            .map_err(|err| IntegrandError::Domain(err.to_string()))?;
        Ok(Integrand {
            kind: Kind::K2,
            e,
            dim,
            extent: 1.0,
            profile,
            c_h: p,
            c0: 0.0,
            trunc: None,
            moll: None,
        })
    }

    /// Double phase type; needs `mu > 0` so the q-phase keeps the upper
    /// ellipticity ratio `|F_xixi| / W^{(q-2)/2}` bounded near `xi = 0`.
    /// `h = q|Da|`.
    pub fn k3(e: ExponentSet, dim: usize, profile: Profile) -> Result<Self, IntegrandError> {
        Self::validate_dim(dim)?;
        if !(e.mu > 0.0) {
            return Err(IntegrandError::Domain(
                "double-phase member needs mu > 0".into(),
            ));
        }
        let (a_min, a_max) = profile.bounds(1.0, dim);
        if !(a_min > 0.0) {
            return Err(IntegrandError::Domain(format!(
                "coefficient must stay positive; profile lower bound {a_min}"
            )));
        }
        let (p, q) = (e.p_f64(), e.q_f64());
        let big = big_lambda_for(p) * e.mu.powf(p - q) + a_max * big_lambda_for(q);
        let e = e
            .with_ellipticity(lambda_for(p), big)
            .map_err(|err| IntegrandError::Domain(err.to_string()))?;
        Ok(Integrand {
            kind: Kind::K3,
            e,
            dim,
            extent: 1.0,
            profile,
            c_h: q,
            c0: 0.0,
            trunc: None,
            moll: None,
        })
    }

    /// Adds a constant offset to `h` (useful for prescribing exact `h`
    /// profiles in quadrature tests; `h` may only grow, so the mixed bound
    /// keeps holding).
    pub fn with_h_offset(mut self, c0: f64) -> Result<Self, IntegrandError> {
        if c0 < 0.0 {
            return Err(IntegrandError::Domain(format!("h offset {c0} negative")));
        }
        self.c0 = c0;
        Ok(self)
    }

    /// Replaces the declared ellipticity pair; exists so the violation error
    /// paths can be exercised deliberately.
    pub fn with_declared_ellipticity(mut self, lambda: f64, big_lambda: f64) -> Self {
        self.e.lambda_ell = lambda;
        self.e.big_lambda_ell = big_lambda;
        self
    }

    /// Exact bounds of the (unmollified) coefficient over the domain cube.
    /// Mollification is an average, so they stay valid afterwards.
    pub fn a_bounds(&self) -> (f64, f64) {
        self.profile.bounds(self.extent, self.dim)
    }

    pub fn truncation_level(&self) -> Option<f64> {
        self.trunc.map(|g| g.k)
    }

    pub fn mollification_radius(&self) -> Option<f64> {
        self.moll.as_ref().map(|m| m.eps)
    }

    /// True when the density has no genuine x-dependence.
    pub fn is_autonomous(&self) -> bool {
        matches!(self.profile, Profile::Const { .. })
    }

    /// Folds a coordinate into `[-extent, extent]` by even reflection;
    /// returns the folded value and the derivative parity.
    fn fold(&self, t: f64) -> (f64, f64) {
        let s = self.extent;
        if t > s {
            (2.0 * s - t, -1.0)
        } else if t < -s {
            (-2.0 * s - t, -1.0)
        } else {
            (t, 1.0)
        }
    }

    fn raw_coeffs(&self, x: &Point) -> Coeffs {
        let a = self.profile.eval(x);
        let da = self.profile.grad(x);
        let h = self.c_h * norm(&da) + self.c0;
        Coeffs { a, da, h }
    }

    /// Coefficient data at `x`: raw fields, or their mollifications
    /// (quadrature averages over the `eps`-ball, with even reflection at the
    /// cube boundary).
    pub fn coeffs_at(&self, x: &Point) -> Coeffs {
        let Some(m) = &self.moll else {
            return self.raw_coeffs(x);
        };
        let mut a = 0.0;
        let mut da = [0.0; 3];
        let mut h = 0.0;
        for (y, &w) in m.nodes.iter().zip(&m.weights) {
            let mut z = [0.0; 3];
            let mut parity = [1.0; 3];
            for c in 0..self.dim {
                let (folded, sign) = self.fold(x[c] + m.eps * y[c]);
                z[c] = folded;
                parity[c] = sign;
            }
            let raw = self.raw_coeffs(&z);
            a += w * raw.a;
            for c in 0..self.dim {
                // d/dx of the reflected extension flips sign per folded axis.
                da[c] += w * parity[c] * raw.da[c];
            }
            h += w * raw.h;
        }
        Coeffs { a, da, h }
    }

    /// Radial p-phase: value, `g'(t)/t`, and `g''(t)` at `w = mu^2 + t^2`.
    fn p_phase(&self, w: f64, t2: f64) -> (f64, f64, f64) {
        let (p, mu) = (self.e.p_f64(), self.e.mu);
        let g = w.powf(p / 2.0) - mu.powf(p);
        let dgt = p * w.powf((p - 2.0) / 2.0);
        let d2g = dgt + p * (p - 2.0) * t2 * w.powf((p - 4.0) / 2.0);
        (g, dgt, d2g)
    }

    /// Radial q-phase with optional gluing past the truncation level.
    fn q_phase(&self, w: f64, t2: f64) -> (f64, f64, f64) {
        let (p, q, mu) = (self.e.p_f64(), self.e.q_f64(), self.e.mu);
        if let Some(g) = &self.trunc {
            if t2 > g.k * g.k {
                let val = g.c1 + g.c2 * w.powf(p / 2.0);
                let dgt = g.c2 * p * w.powf((p - 2.0) / 2.0);
                let d2g = dgt + g.c2 * p * (p - 2.0) * t2 * w.powf((p - 4.0) / 2.0);
                return (val, dgt, d2g);
            }
        }
        let val = w.powf(q / 2.0) - mu.powf(q);
        let dgt = q * w.powf((q - 2.0) / 2.0);
        let d2g = dgt + q * (q - 2.0) * t2 * w.powf((q - 4.0) / 2.0);
        (val, dgt, d2g)
    }

    /// Density value and gradient given precomputed coefficients — the hot
    /// path of the energy assembly.
    pub fn eval_f_grad(&self, c: &Coeffs, xi: &Vector) -> (f64, Vector) {
        let t2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        let w = self.e.mu * self.e.mu + t2;
        let (f, dgt) = match self.kind {
            Kind::K1 => {
                let (g, dgt, _) = self.p_phase(w, t2);
                (g, dgt)
            }
            Kind::K2 => {
                let (g, dgt, _) = self.p_phase(w, t2);
                (c.a * g, c.a * dgt)
            }
            Kind::K3 => {
                let (gp, dgtp, _) = self.p_phase(w, t2);
                let (gq, dgtq, _) = self.q_phase(w, t2);
                (gp + c.a * gq, dgtp + c.a * dgtq)
            }
        };
        (f, [dgt * xi[0], dgt * xi[1], dgt * xi[2]])
    }

    /// Density value at a point.
    pub fn eval_f(&self, x: &Point, xi: &Vector) -> f64 {
        self.eval_f_grad(&self.coeffs_at(x), xi).0
    }

    /// Full derivative bundle. At `xi = 0` the gradient is 0 by the radial
    /// limit convention; the Hessian additionally needs `mu > 0` or `p >= 2`.
    pub fn eval_derivatives(&self, x: &Point, xi: &Vector) -> Result<Deriv, IntegrandError> {
        let t2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        let mu = self.e.mu;
        if t2 == 0.0 && mu == 0.0 && self.e.p_f64() < 2.0 {
            return Err(IntegrandError::DegenerateHessian(format!(
                "Hessian of the p-phase blows up at xi = 0 for mu = 0, p = {} < 2",
                self.e.p_f64()
            )));
        }
        let w = mu * mu + t2;
        let c = self.coeffs_at(x);
        let (f, dgt, d2g, dgt_a, a_weight) = match self.kind {
            Kind::K1 => {
                let (g, dgt, d2g) = self.p_phase(w, t2);
                (g, dgt, d2g, 0.0, 0.0)
            }
            Kind::K2 => {
                let (g, dgt, d2g) = self.p_phase(w, t2);
                (c.a * g, c.a * dgt, c.a * d2g, dgt, 1.0)
            }
            Kind::K3 => {
                let (gp, dgtp, d2gp) = self.p_phase(w, t2);
                let (gq, dgtq, d2gq) = self.q_phase(w, t2);
                (gp + c.a * gq, dgtp + c.a * dgtq, d2gp + c.a * d2gq, dgtq, 1.0)
            }
        };
        let f_xi = [dgt * xi[0], dgt * xi[1], dgt * xi[2]];
        let mut f_xixi = [[0.0; 3]; 3];
        for i in 0..self.dim {
            f_xixi[i][i] = dgt;
            if t2 > 0.0 {
                for j in 0..self.dim {
                    f_xixi[i][j] += (d2g - dgt) * xi[i] * xi[j] / t2;
                }
            }
        }
        // Mixed derivative: only the a-weighted phase depends on x, so
        // d(F_xi_c)/dx_d = (phase g'(t)/t) xi_c Da_d.
        let mut f_xix = [[0.0; 3]; 3];
        if a_weight != 0.0 {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    f_xix[i][j] = dgt_a * xi[i] * c.da[j];
                }
            }
        }
        Ok(Deriv { f, f_xi, f_xixi, f_xix })
    }

    /// Truncation `F_k`: the q-phase is glued at `|xi| = k` to a p-growth
    /// continuation with matched value and slope. Identity when `p = q`.
    pub fn truncate(&self, k: f64) -> Result<Integrand, IntegrandError> {
        if !(k >= 1.0) {
            return Err(IntegrandError::Domain(format!(
                "truncation level k = {k} must be >= 1"
            )));
        }
        if self.trunc.is_some() {
            return Err(IntegrandError::Domain(
                "already truncated; truncate the base member instead".into(),
            ));
        }
        let mut out = self.clone();
        if self.e.p == self.e.q {
            return Ok(out);
        }
        let (c1, c2) = glue_coefficients(self.e.p_f64(), self.e.q_f64(), self.e.mu, k)?;
        out.trunc = Some(Glue { k, c1, c2 });
        Ok(out)
    }

    /// Mollification `F_{eps,k}`: coefficient fields `a`, `Da`, `h` are
    /// replaced by quadrature averages over the `eps`-ball, extending by even
    /// reflection at the cube boundary.
    pub fn mollify(&self, eps: f64, spec: &MollifierSpec) -> Result<Integrand, IntegrandError> {
        if !(eps > 0.0) || eps > self.extent / 2.0 {
            return Err(IntegrandError::Domain(format!(
                "mollification radius {eps} outside (0, {}]; reflection \
                 extension needs that margin",
                self.extent / 2.0
            )));
        }
        if self.moll.is_some() {
            return Err(IntegrandError::Domain(
                "already mollified; mollify the truncated member instead".into(),
            ));
        }
        let rule = BallQuadrature::unit(self.dim, spec.order.max(8));
        let mut nodes = Vec::with_capacity(rule.len());
        let mut weights = Vec::with_capacity(rule.len());
        let mut mass = 0.0;
        for (y, w) in rule.nodes() {
            let wy = w * MollifierSpec::profile(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
            nodes.push(*y);
            weights.push(wy);
            mass += wy;
        }
        // Normalize so the discrete mollifier has exactly unit mass.
        for w in &mut weights {
            *w /= mass;
        }
        let mut out = self.clone();
        out.moll = Some(Mollification { eps, nodes, weights });
        Ok(out)
    }
}

/// Declared lower ellipticity constant: `p` for `p >= 2`; `p^2(p-1)/2` below,
/// which is under the true minimum `p(p-1)` AND small enough that the growth
/// envelope's lower constant `lambda/(p(p-1)) = p/2` holds analytically.
fn lambda_for(p: f64) -> f64 {
    if p >= 2.0 {
        p
    } else {
        0.5 * p * p * (p - 1.0)
    }
}

/// Declared upper ellipticity constant for one power phase: the Hessian
/// ratio is at most `p max(1, p-1)`, and the envelope `F <= (Lambda/2) ...`
/// additionally needs `Lambda >= 2` when `p < 2` (there the sharp envelope
/// constant is 1, attained as `mu -> 0`).
fn big_lambda_for(p: f64) -> f64 {
    if p >= 2.0 {
        p * (p - 1.0)
    } else {
        2.0
    }
}

fn norm(v: &Vector) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn frobenius(m: &Matrix, dim: usize) -> f64 {
    let mut s = 0.0;
    for row in m.iter().take(dim) {
        for v in row.iter().take(dim) {
            s += v * v;
        }
    }
    s.sqrt()
}

struct Sampler {
    rng: ChaCha8Rng,
    dim: usize,
    extent: f64,
}

impl Sampler {
    fn new(i: &Integrand, seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), dim: i.dim, extent: i.extent }
    }

    fn x(&mut self) -> Point {
        let mut p = [0.0; 3];
        for c in p.iter_mut().take(self.dim) {
            *c = self.rng.gen_range(-self.extent..=self.extent);
        }
        p
    }

    fn direction(&mut self) -> Vector {
        loop {
            let mut v = [0.0; 3];
            for c in v.iter_mut().take(self.dim) {
                *c = self.rng.gen_range(-1.0..=1.0);
            }
            let n = norm(&v);
            if n > 1e-3 {
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    }

    /// Gradient sample with log-uniform magnitude in `[1e-3, 1e3]`; roughly
    /// one sample in 32 is exactly zero when `allow_zero` is set.
    fn xi(&mut self, allow_zero: bool) -> Vector {
        if allow_zero && self.rng.gen_range(0..32) == 0 {
            return [0.0; 3];
        }
        let mag = 10f64.powf(self.rng.gen_range(-3.0..=3.0));
        let d = self.direction();
        [mag * d[0], mag * d[1], mag * d[2]]
    }
}

/// Empirical extremes of the Rayleigh-type ratios
/// `zeta . F_xixi zeta / (W^{(p-2)/2} |zeta|^2)` (minimum) and
/// `/ (W^{(q-2)/2} |zeta|^2)` (maximum) over random `(x, xi, zeta)`.
/// Errors if they cross the declared constants.
pub fn verify_ellipticity(
    i: &Integrand,
    opts: &SampleOpts,
) -> Result<(f64, f64), IntegrandError> {
    let mut s = Sampler::new(i, opts.seed);
    let (p, q, mu) = (i.e.p_f64(), i.e.q_f64(), i.e.mu);
    let allow_zero = !(mu == 0.0 && p < 2.0);
    let mut low = f64::INFINITY;
    let mut high = f64::NEG_INFINITY;
    let mut witness_low = ([0.0; 3], [0.0; 3], [0.0; 3]);
    let mut witness_high = witness_low;
    for _ in 0..opts.count.max(1) {
        let x = s.x();
        let xi = s.xi(allow_zero);
        let zeta = s.direction();
        let d = i.eval_derivatives(&x, &xi)?;
        let w = mu * mu + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        let mut quad = 0.0;
        for c in 0..i.dim {
            for e in 0..i.dim {
                quad += d.f_xixi[c][e] * zeta[c] * zeta[e];
            }
        }
        let ratio_low = quad / w.powf((p - 2.0) / 2.0);
        let ratio_high = quad / w.powf((q - 2.0) / 2.0);
        if ratio_low < low {
            low = ratio_low;
            witness_low = (x, xi, zeta);
        }
        if ratio_high > high {
            high = ratio_high;
            witness_high = (x, xi, zeta);
        }
    }
    if low < i.e.lambda_ell - 1e-10 {
        return Err(IntegrandError::EllipticityViolation(format!(
            "ratio {low} below declared lambda = {} at x = {:?}, xi = {:?}, zeta = {:?}",
            i.e.lambda_ell, witness_low.0, witness_low.1, witness_low.2
        )));
    }
    if high > i.e.big_lambda_ell + 1e-10 {
        return Err(IntegrandError::EllipticityViolation(format!(
            "ratio {high} above declared Lambda = {} at x = {:?}, xi = {:?}, zeta = {:?}",
            i.e.big_lambda_ell, witness_high.0, witness_high.1, witness_high.2
        )));
    }
    Ok((low, high))
}

/// Checks the growth envelope
/// `lambda/(p(p-1)) W^{(p-2)/2} |xi|^2 <= F <= (Lambda/2) W^{(q-2)/2} |xi|^2`
/// on samples; returns the worst (lower, upper) margins.
pub fn verify_growth(i: &Integrand, opts: &SampleOpts) -> Result<(f64, f64), IntegrandError> {
    let mut s = Sampler::new(i, opts.seed.wrapping_add(1));
    let (p, q, mu) = (i.e.p_f64(), i.e.q_f64(), i.e.mu);
    let c_low = i.e.lambda_ell / (p * (p - 1.0));
    let c_up = i.e.big_lambda_ell / 2.0;
    let mut worst_low = f64::INFINITY;
    let mut worst_up = f64::INFINITY;
    for _ in 0..opts.count.max(1) {
        let x = s.x();
        let xi = s.xi(true);
        let t2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        let w = mu * mu + t2;
        let f = i.eval_f(&x, &xi);
        let low = f - c_low * w.powf((p - 2.0) / 2.0) * t2;
        let up = c_up * w.powf((q - 2.0) / 2.0) * t2 - f;
        if low < worst_low {
            worst_low = low;
            if low < -1e-10 {
                return Err(IntegrandError::GrowthViolation(format!(
                    "lower envelope margin {low} at x = {x:?}, xi = {xi:?}"
                )));
            }
        }
        if up < worst_up {
            worst_up = up;
            if up < -1e-10 {
                return Err(IntegrandError::GrowthViolation(format!(
                    "upper envelope margin {up} at x = {x:?}, xi = {xi:?}"
                )));
            }
        }
    }
    Ok((worst_low, worst_up))
}

/// Checks `|F_xix| <= h(x) W^{(q-1)/2}` on samples; returns the worst margin.
pub fn verify_mixed_bound(i: &Integrand, opts: &SampleOpts) -> Result<f64, IntegrandError> {
    let mut s = Sampler::new(i, opts.seed.wrapping_add(2));
    let (p, q, mu) = (i.e.p_f64(), i.e.q_f64(), i.e.mu);
    let allow_zero = !(mu == 0.0 && p < 2.0);
    let mut worst = f64::INFINITY;
    for _ in 0..opts.count.max(1) {
        let x = s.x();
        let xi = s.xi(allow_zero);
        let d = i.eval_derivatives(&x, &xi)?;
        let w = mu * mu + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        let h = i.coeffs_at(&x).h;
        let margin = h * w.powf((q - 1.0) / 2.0) - frobenius(&d.f_xix, i.dim);
        if margin < worst {
            worst = margin;
            if margin < -1e-10 {
                return Err(IntegrandError::MixedBoundViolation(format!(
                    "margin {margin} at x = {x:?}, xi = {xi:?}"
                )));
            }
        }
    }
    Ok(worst)
}

/// Integral of `h^r log^alpha(e+h)` over a ball, by the tensor rule at two
/// refinement levels; the pair must agree to 1e-3 relative or the result is a
/// [`IntegrandError::QuadratureWarning`]. Also returns `value^{2/n}`.
pub fn orlicz_norm_h(
    i: &Integrand,
    center: Point,
    radius: f64,
) -> Result<OrliczNorm, IntegrandError> {
    for c in 0..i.dim {
        if center[c].abs() + radius > i.extent {
            return Err(IntegrandError::Domain(format!(
                "ball (center {center:?}, radius {radius}) leaves the domain cube"
            )));
        }
    }
    let (r, alpha) = (i.e.r_f64(), i.e.alpha_f64());
    let f = |x: &Point| {
        let h = i.coeffs_at(x).h;
        h.powf(r) * (E + h).ln().powf(alpha)
    };
    let coarse = BallQuadrature::new(i.dim, center, radius, 24).integrate(f);
    let fine = BallQuadrature::new(i.dim, center, radius, 48).integrate(f);
    let rel_change = if fine == 0.0 { 0.0 } else { ((coarse - fine) / fine).abs() };
    if rel_change > 1e-3 {
        return Err(IntegrandError::QuadratureWarning { value: fine, rel_change });
    }
    Ok(OrliczNorm {
        value: fine,
        h_squared: fine.powf(2.0 / i.e.n as f64),
        rel_change,
    })
}

/// Fits the approximation constants of (possibly truncated/mollified)
/// members as extremal sample ratios; `lower_margin` additionally witnesses
/// the shifted p-coercivity from below.
pub fn fit_approx_bounds(i: &Integrand, opts: &SampleOpts) -> Result<ApproxBounds, IntegrandError> {
    let mut s = Sampler::new(i, opts.seed.wrapping_add(3));
    let (p, q, mu) = (i.e.p_f64(), i.e.q_f64(), i.e.mu);
    let allow_zero = !(mu == 0.0 && p < 2.0);
    let mut out = ApproxBounds {
        ell: 0.0,
        ell1_k: 0.0,
        lambda_tilde: f64::INFINITY,
        big_lambda_tilde: 0.0,
        big_lambda_tilde1_k: 0.0,
        c_mix: 0.0,
        c1_mix_k: 0.0,
        c2_mix_k: i.mollification_radius().map(|_| 0.0),
        lower_margin: f64::INFINITY,
        eps: i.mollification_radius(),
        k: i.truncation_level(),
    };
    for _ in 0..opts.count.max(1) {
        let x = s.x();
        let xi = s.xi(allow_zero);
        let zeta = s.direction();
        let d = i.eval_derivatives(&x, &xi)?;
        let t2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        let w = mu * mu + t2;
        out.ell = out.ell.max(d.f / w.powf(q / 2.0));
        out.ell1_k = out.ell1_k.max(d.f / w.powf(p / 2.0));
        out.lower_margin = out.lower_margin.min(d.f - (w.powf(p / 2.0) - mu.powf(p)));
        let mut quad = 0.0;
        for c in 0..i.dim {
            for e in 0..i.dim {
                quad += d.f_xixi[c][e] * zeta[c] * zeta[e];
            }
        }
        out.lambda_tilde = out.lambda_tilde.min(quad / w.powf((p - 2.0) / 2.0));
        let hess = frobenius(&d.f_xixi, i.dim);
        out.big_lambda_tilde = out.big_lambda_tilde.max(hess / w.powf((q - 2.0) / 2.0));
        out.big_lambda_tilde1_k = out.big_lambda_tilde1_k.max(hess / w.powf((p - 2.0) / 2.0));
        let h = i.coeffs_at(&x).h;
        if h > 0.0 {
            let mix = frobenius(&d.f_xix, i.dim);
            out.c_mix = out.c_mix.max(mix / (h * w.powf((q - 1.0) / 2.0)));
            let c1 = mix / (h * w.powf((p - 1.0) / 2.0));
            out.c1_mix_k = out.c1_mix_k.max(c1);
            if let Some(c2) = &mut out.c2_mix_k {
                *c2 = c2.max(c1);
            }
        }
    }
    Ok(out)
}
