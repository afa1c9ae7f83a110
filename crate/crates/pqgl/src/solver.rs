//! Discrete minimization of convex gradient energies on structured
//! simplicial grids with Dirichlet boundary data.
//!
//! The cube `(-S, S)^n` is split into cells and each cell into `n!` simplices
//! along vertex chains (two triangles per square, six tetrahedra per cube).
//! Affine interpolation makes `Du` piecewise constant, so the energy
//! `sum_T |T| F(x_T, Du|_T)` is evaluated without gradient-quadrature error
//! and the minimality comparison against the boundary extension is exact at
//! the discrete level.
//!
//! Minimization is nonlinear conjugate gradient (Polak-Ribiere with
//! restarts) with Armijo backtracking and diagonal preconditioning by
//! `(mu^2+|Du|^2)^{(p-2)/2}` averages. Assembly is sequential in a fixed
//! simplex order, so repeated runs are bit-identical.

use crate::integrand::{Coeffs, Integrand, IntegrandError, MollifierSpec, Point, Vector};
use serde::Serialize;

/// Errors from grid construction, assembly, and minimization.
#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric overflow: {0}")]
    NumericOverflow(String),
    #[error(
        "no convergence after {iterations} iterations: gradient sup {grad_sup} \
         above tolerance {tol}"
    )]
    NonConvergence {
        iterations: usize,
        grad_sup: f64,
        tol: f64,
        /// Partial minimizer at the iteration cap.
        field: Box<GridField>,
        report: Box<SolveReport>,
    },
    #[error(transparent)]
    Integrand(#[from] IntegrandError),
}

/// Vertex chains of the cell decomposition: each permutation of the axes
/// yields one simplex walking from the cell's low corner to its high corner.
const PERMS_2D: [[usize; 3]; 2] = [[0, 1, 0], [1, 0, 0]];
const PERMS_3D: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Structured cube grid `(-extent, extent)^dim` with `m` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub dim: usize,
    pub extent: f64,
    pub m: usize,
}

impl Grid {
    /// Grids are desk-scale by policy: up to 1025 nodes per axis in 2-D and
    /// 33 per axis in 3-D (minutes of runtime at most).
    pub fn new(dim: usize, extent: f64, m: usize) -> Result<Grid, SolverError> {
        if dim != 2 && dim != 3 {
            return Err(SolverError::Domain(format!("dimension {dim} not in {{2, 3}}")));
        }
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(SolverError::Domain(format!("extent {extent} must be positive")));
        }
        let cap = if dim == 2 { 1025 } else { 33 };
        if m < 3 || m > cap {
            return Err(SolverError::Domain(format!(
                "m = {m} outside [3, {cap}] for dimension {dim}"
            )));
        }
        Ok(Grid { dim, extent, m })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / (self.m - 1) as f64
    }

    pub fn node_count(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    pub fn cells_per_axis(&self) -> usize {
        self.m - 1
    }

    pub fn simplices_per_cell(&self) -> usize {
        if self.dim == 2 {
            2
        } else {
            6
        }
    }

    pub fn simplex_count(&self) -> usize {
        self.cells_per_axis().pow(self.dim as u32) * self.simplices_per_cell()
    }

    pub fn simplex_volume(&self) -> f64 {
        let d = self.spacing();
        if self.dim == 2 {
            d * d / 2.0
        } else {
            d * d * d / 6.0
        }
    }

    fn perms(&self) -> &'static [[usize; 3]] {
        if self.dim == 2 {
            &PERMS_2D
        } else {
            &PERMS_3D
        }
    }

    /// Node strides per axis in the flat row-major node array.
    fn strides(&self) -> [usize; 3] {
        [1, self.m, self.m * self.m]
    }

    pub fn node_coord(&self, idx: usize) -> Point {
        let mut x = [0.0; 3];
        let mut rest = idx;
        for c in x.iter_mut().take(self.dim) {
            *c = -self.extent + (rest % self.m) as f64 * self.spacing();
            rest /= self.m;
        }
        x
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let mut rest = idx;
        for _ in 0..self.dim {
            let i = rest % self.m;
            if i == 0 || i == self.m - 1 {
                return true;
            }
            rest /= self.m;
        }
        false
    }

    /// Calls `f(simplex_index, base_node, perm)` for every simplex, in the
    /// fixed enumeration order (cells row-major, permutations inner).
    fn for_each_simplex(&self, mut f: impl FnMut(usize, usize, &[usize; 3])) {
        let cells = self.cells_per_axis();
        let strides = self.strides();
        let perms = self.perms();
        let planes = if self.dim == 2 { 1 } else { cells };
        let mut s = 0;
        for c2 in 0..planes {
            for c1 in 0..cells {
                for c0 in 0..cells {
                    let base = c0 * strides[0] + c1 * strides[1] + c2 * strides[2];
                    for perm in perms {
                        f(s, base, perm);
                        s += 1;
                    }
                }
            }
        }
    }
}

/// Closed-form Dirichlet traces. Each is defined on the whole cube, so the
/// nodal interpolation doubles as the initial guess of the minimization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum BoundaryData {
    /// `g = b . x`: affine functions minimize radial convex energies with
    /// spatially constant coefficients under their own boundary data.
    Linear { b: Vector },
    /// `g = x1 x2`, harmonic in any dimension.
    HarmonicQuadratic,
    /// `g = x1^4 - 6 x1^2 x2^2 + x2^4`, harmonic in any dimension; unlike
    /// the quadratic it is not reproduced exactly by the discrete problem,
    /// so it drives genuine refinement-order measurements.
    HarmonicQuartic,
    /// `g = x1 exp(-|x|^2)`, a smooth bump-modulated trace.
    Bump,
}

impl BoundaryData {
    pub fn eval(&self, x: &Point) -> f64 {
        match self {
            BoundaryData::Linear { b } => b[0] * x[0] + b[1] * x[1] + b[2] * x[2],
            BoundaryData::HarmonicQuadratic => x[0] * x[1],
            BoundaryData::HarmonicQuartic => {
                let (a, b) = (x[0] * x[0], x[1] * x[1]);
                a * a - 6.0 * a * b + b * b
            }
            BoundaryData::Bump => {
                x[0] * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp()
            }
        }
    }
}

/// Nodal scalar field on a [`Grid`] with derived gradient data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridField {
    pub grid: Grid,
    pub values: Vec<f64>,
    /// Set by [`minimize`]: whether a stopping criterion was met.
    pub converged: bool,
    /// Sup norm of the discrete energy gradient at the final iterate.
    pub grad_sup: f64,
}

impl GridField {
    pub fn from_fn(grid: Grid, f: impl Fn(&Point) -> f64) -> GridField {
        let values = (0..grid.node_count()).map(|i| f(&grid.node_coord(i))).collect();
        GridField { grid, values, converged: false, grad_sup: f64::INFINITY }
    }

    /// Nodal interpolation of the trace function (boundary-consistent by
    /// construction).
    pub fn from_boundary(grid: Grid, bd: &BoundaryData) -> GridField {
        Self::from_fn(grid, |x| bd.eval(x))
    }

    /// Per-simplex constant gradients with barycenters, in enumeration
    /// order. Exact for affine fields.
    pub fn simplex_gradients(&self) -> Vec<(Point, Vector)> {
        let g = &self.grid;
        let d = g.spacing();
        let strides = g.strides();
        let mut out = Vec::with_capacity(g.simplex_count());
        g.for_each_simplex(|_, base, perm| {
            let mut du = [0.0; 3];
            let mut bary = g.node_coord(base);
            let mut node = base;
            for (step, &axis) in perm.iter().take(g.dim).enumerate() {
                let next = node + strides[axis];
                du[axis] = (self.values[next] - self.values[node]) / d;
                // Reference chain vertex k contributes its k trailing unit
                // coordinates; summing gives (dim + 1 - k) per added axis.
                bary[axis] += d * (g.dim - step) as f64 / (g.dim + 1) as f64;
                node = next;
            }
            out.push((bary, du));
        });
        out
    }

    /// Nodal gradients: plain average of the incident simplex gradients
    /// (all simplices share one volume, so this is the volume average).
    pub fn nodal_gradients(&self) -> Vec<Vector> {
        let g = &self.grid;
        let strides = g.strides();
        let d = g.spacing();
        let mut sums = vec![[0.0f64; 3]; g.node_count()];
        let mut counts = vec![0u32; g.node_count()];
        g.for_each_simplex(|_, base, perm| {
            let mut du = [0.0; 3];
            let mut nodes = [base; 4];
            let mut node = base;
            for (step, &axis) in perm.iter().take(g.dim).enumerate() {
                let next = node + strides[axis];
                du[axis] = (self.values[next] - self.values[node]) / d;
                nodes[step + 1] = next;
                node = next;
            }
            for &v in nodes.iter().take(g.dim + 1) {
                for c in 0..g.dim {
                    sums[v][c] += du[c];
                }
                counts[v] += 1;
            }
        });
        for (s, &c) in sums.iter_mut().zip(&counts) {
            for comp in s.iter_mut() {
                *comp /= c as f64;
            }
        }
        sums
    }

    /// Nodal Hessian by central differences of the averaged nodal
    /// gradients, symmetrized; zero on boundary nodes.
    pub fn nodal_hessians(&self) -> Vec<[[f64; 3]; 3]> {
        let g = &self.grid;
        let grads = self.nodal_gradients();
        let strides = g.strides();
        let d = g.spacing();
        let mut out = vec![[[0.0f64; 3]; 3]; g.node_count()];
        for idx in 0..g.node_count() {
            if g.is_boundary(idx) {
                continue;
            }
            let mut h = [[0.0f64; 3]; 3];
            for (col, &stride) in strides.iter().take(g.dim).enumerate() {
                let (hi, lo) = (&grads[idx + stride], &grads[idx - stride]);
                for (row, hrow) in h.iter_mut().enumerate().take(g.dim) {
                    hrow[col] = (hi[row] - lo[row]) / (2.0 * d);
                }
            }
            for r in 0..g.dim {
                for c in 0..g.dim {
                    out[idx][r][c] = 0.5 * (h[r][c] + h[c][r]);
                }
            }
        }
        out
    }

    /// Multilinear interpolation of the nodal values at an arbitrary point
    /// (clamped into the domain cube).
    pub fn sample(&self, x: &Point) -> f64 {
        let g = &self.grid;
        let d = g.spacing();
        let strides = g.strides();
        let mut base = 0usize;
        let mut t = [0.0f64; 3];
        for axis in 0..g.dim {
            let s = ((x[axis] + g.extent) / d).clamp(0.0, (g.m - 1) as f64);
            let cell = (s.floor() as usize).min(g.m - 2);
            t[axis] = s - cell as f64;
            base += cell * strides[axis];
        }
        let mut value = 0.0;
        for corner in 0..(1usize << g.dim) {
            let mut idx = base;
            let mut weight = 1.0;
            for axis in 0..g.dim {
                if corner >> axis & 1 == 1 {
                    idx += strides[axis];
                    weight *= t[axis];
                } else {
                    weight *= 1.0 - t[axis];
                }
            }
            value += weight * self.values[idx];
        }
        value
    }

    /// Nodal values of this field interpolated onto a finer (or any
    /// same-extent, same-dimension) grid — the warm start for a refined
    /// solve.
    pub fn prolong(&self, fine: Grid) -> Result<Vec<f64>, SolverError> {
        if fine.dim != self.grid.dim || fine.extent != self.grid.extent {
            return Err(SolverError::Domain(format!(
                "prolongation needs matching dimension and extent; got {}d/{} vs {}d/{}",
                self.grid.dim, self.grid.extent, fine.dim, fine.extent
            )));
        }
        Ok((0..fine.node_count()).map(|idx| self.sample(&fine.node_coord(idx))).collect())
    }
}

/// Precomputed energy assembly for one (grid, integrand) pair: coefficient
/// data is evaluated once per simplex barycenter (mollified coefficients are
/// quadrature sums, far too costly for the inner loop).
pub struct Assembly<'a> {
    pub grid: Grid,
    pub integrand: &'a Integrand,
    coeffs: Vec<Coeffs>,
    volume: f64,
}

impl<'a> Assembly<'a> {
    pub fn new(grid: Grid, integrand: &'a Integrand) -> Result<Assembly<'a>, SolverError> {
        if integrand.dim != grid.dim {
            return Err(SolverError::Domain(format!(
                "integrand dimension {} does not match grid dimension {}",
                integrand.dim, grid.dim
            )));
        }
        if grid.extent > integrand.extent * (1.0 + 1e-12) {
            return Err(SolverError::Domain(format!(
                "grid extent {} exceeds coefficient domain extent {}",
                grid.extent, integrand.extent
            )));
        }
        let d = grid.spacing();
        let mut coeffs = Vec::with_capacity(grid.simplex_count());
        grid.for_each_simplex(|_, base, perm| {
            let mut bary = grid.node_coord(base);
            for (step, &axis) in perm.iter().take(grid.dim).enumerate() {
                bary[axis] += d * (grid.dim - step) as f64 / (grid.dim + 1) as f64;
            }
            coeffs.push(integrand.coeffs_at(&bary));
        });
        Ok(Assembly { grid, integrand, coeffs, volume: grid.simplex_volume() })
    }

    /// Coefficient data per simplex, in enumeration order (shared with the
    /// estimate harnesses so they integrate against identical fields).
    pub fn simplex_coeffs(&self) -> &[Coeffs] {
        &self.coeffs
    }

    fn du_of(&self, u: &[f64], base: usize, perm: &[usize; 3]) -> ([f64; 3], [usize; 4]) {
        let d = self.grid.spacing();
        let strides = self.grid.strides();
        let mut du = [0.0; 3];
        let mut nodes = [base; 4];
        let mut node = base;
        for (step, &axis) in perm.iter().take(self.grid.dim).enumerate() {
            let next = node + strides[axis];
            du[axis] = (u[next] - u[node]) / d;
            nodes[step + 1] = next;
            node = next;
        }
        (du, nodes)
    }

    /// Discrete energy `sum_T |T| F(x_T, Du|_T)`.
    pub fn energy(&self, u: &[f64]) -> Result<f64, SolverError> {
        let mut e = 0.0;
        self.grid.for_each_simplex(|s, base, perm| {
            let (du, _) = self.du_of(u, base, perm);
            let (f, _) = self.integrand.eval_f_grad(&self.coeffs[s], &du);
            e += f;
        });
        let e = e * self.volume;
        if !e.is_finite() {
            return Err(SolverError::NumericOverflow(format!(
                "energy {e} is not finite (gradient magnitudes too extreme)"
            )));
        }
        Ok(e)
    }

    /// Energy plus its exact derivative with respect to interior nodal
    /// values (chain rule through the per-simplex affine gradients);
    /// boundary entries are zeroed.
    pub fn energy_and_grad(&self, u: &[f64], grad: &mut [f64]) -> Result<f64, SolverError> {
        grad.fill(0.0);
        let d = self.grid.spacing();
        let w = self.volume / d;
        let mut e = 0.0;
        self.grid.for_each_simplex(|s, base, perm| {
            let (du, nodes) = self.du_of(u, base, perm);
            let (f, fxi) = self.integrand.eval_f_grad(&self.coeffs[s], &du);
            e += f;
            for (step, &axis) in perm.iter().take(self.grid.dim).enumerate() {
                let pull = w * fxi[axis];
                grad[nodes[step + 1]] += pull;
                grad[nodes[step]] -= pull;
            }
        });
        let e = e * self.volume;
        if !e.is_finite() {
            return Err(SolverError::NumericOverflow(format!(
                "energy {e} is not finite (gradient magnitudes too extreme)"
            )));
        }
        for idx in 0..grad.len() {
            if self.grid.is_boundary(idx) {
                grad[idx] = 0.0;
            }
        }
        Ok(e)
    }

    /// Diagonal preconditioner: per-node averages of
    /// `|T|/spacing^2 (mu^2+|Du|^2)^{(p-2)/2}` over incident simplices —
    /// the scale of the energy's diagonal curvature.
    fn preconditioner(&self, u: &[f64], m_out: &mut [f64]) {
        let d = self.grid.spacing();
        let mu2 = self.integrand.e.mu * self.integrand.e.mu;
        let pexp = (self.integrand.e.p_f64() - 2.0) / 2.0;
        let w = self.volume / (d * d);
        m_out.fill(0.0);
        self.grid.for_each_simplex(|_, base, perm| {
            let (du, nodes) = self.du_of(u, base, perm);
            let wval = mu2 + du[0] * du[0] + du[1] * du[1] + du[2] * du[2];
            let scale = w * wval.powf(pexp);
            for &v in nodes.iter().take(self.grid.dim + 1) {
                m_out[v] += scale;
            }
        });
        let floor = w * 1e-12;
        for m in m_out.iter_mut() {
            if !(*m > floor) {
                *m = floor.max(f64::MIN_POSITIVE);
            }
        }
    }
}

/// Minimization policy.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Stop when the sup norm of the energy gradient falls to this level.
    pub tol: f64,
    pub max_iter: usize,
    pub precondition: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, max_iter: 50_000, precondition: true }
    }
}

/// Outcome bookkeeping of one minimization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub energy: f64,
    pub iterations: usize,
    pub grad_sup: f64,
    pub converged: bool,
    /// Accepted energies, nonincreasing by construction (Armijo).
    pub energy_history: Vec<f64>,
    /// `(sum_T |T| (mu^2+|Du|^2)^{p/2})^{1/p}`.
    pub lp_norm_v: f64,
    /// `sum_T |T| ((mu^2+|Du|^2)^{p/2} - mu^p)`, the quantity the discrete
    /// minimality comparison bounds by the boundary-extension energy.
    pub lp_shifted: f64,
    /// `max_T (mu^2+|Du|^2)^{1/2}`.
    pub sup_norm_v: f64,
}

fn masked_sup(grid: &Grid, g: &[f64]) -> f64 {
    let mut s = 0.0f64;
    for (idx, &v) in g.iter().enumerate() {
        if !grid.is_boundary(idx) {
            s = s.max(v.abs());
        }
    }
    s
}

fn v_norms(asm: &Assembly, u: &[f64]) -> (f64, f64, f64) {
    let (p, mu) = (asm.integrand.e.p_f64(), asm.integrand.e.mu);
    let mup = mu.powf(p);
    let mut lp = 0.0;
    let mut shifted = 0.0;
    let mut sup = 0.0f64;
    asm.grid.for_each_simplex(|_, base, perm| {
        let (du, _) = asm.du_of(u, base, perm);
        let w = mu * mu + du[0] * du[0] + du[1] * du[1] + du[2] * du[2];
        let wp = w.powf(p / 2.0);
        lp += wp;
        shifted += wp - mup;
        sup = sup.max(w.sqrt());
    });
    ((asm.volume * lp).powf(1.0 / p), asm.volume * shifted, sup)
}

fn build_report(
    asm: &Assembly,
    u: &[f64],
    energy: f64,
    history: Vec<f64>,
    grad_sup: f64,
    converged: bool,
) -> SolveReport {
    let (lp_norm_v, lp_shifted, sup_norm_v) = v_norms(asm, u);
    SolveReport {
        energy,
        iterations: history.len() - 1,
        grad_sup,
        converged,
        energy_history: history,
        lp_norm_v,
        lp_shifted,
        sup_norm_v,
    }
}

/// Minimizes the discrete energy from the nodal interpolation of `bd`.
pub fn minimize(
    grid: Grid,
    integrand: &Integrand,
    bd: &BoundaryData,
    opts: &SolverOptions,
) -> Result<(GridField, SolveReport), SolverError> {
    let init = GridField::from_boundary(grid, bd);
    minimize_from(grid, integrand, bd, init.values, opts)
}

/// Minimizes from a caller-supplied initial field; its boundary entries are
/// overwritten by the trace so the data is consistent.
pub fn minimize_from(
    grid: Grid,
    integrand: &Integrand,
    bd: &BoundaryData,
    init: Vec<f64>,
    opts: &SolverOptions,
) -> Result<(GridField, SolveReport), SolverError> {
    if !(opts.tol > 0.0) {
        return Err(SolverError::Domain(format!("tolerance {} must be > 0", opts.tol)));
    }
    if init.len() != grid.node_count() {
        return Err(SolverError::Domain(format!(
            "initial field has {} values, grid has {} nodes",
            init.len(),
            grid.node_count()
        )));
    }
    let asm = Assembly::new(grid, integrand)?;
    let n = grid.node_count();
    let mut u = init;
    for idx in 0..n {
        if grid.is_boundary(idx) {
            u[idx] = bd.eval(&grid.node_coord(idx));
        }
    }

    let mut g = vec![0.0; n];
    let mut energy = asm.energy_and_grad(&u, &mut g)?;
    let mut history = vec![energy];
    let mut grad_sup = masked_sup(&grid, &g);
    if grad_sup <= opts.tol {
        let report = build_report(&asm, &u, energy, history, grad_sup, true);
        let field = GridField { grid, values: u, converged: true, grad_sup };
        return Ok((field, report));
    }

    let mut precon = vec![1.0; n];
    if opts.precondition {
        asm.preconditioner(&u, &mut precon);
    }
    let mut y: Vec<f64> = g.iter().zip(&precon).map(|(gi, mi)| gi / mi).collect();
    let mut dir: Vec<f64> = y.iter().map(|v| -v).collect();
    let mut gy: f64 = g.iter().zip(&y).map(|(a, b)| a * b).sum();
    let mut step = 1.0;
    let mut last_decrease = 0.0f64;
    let mut trial = vec![0.0; n];
    let mut converged = false;

    for iter in 0..opts.max_iter {
        // Armijo backtracking along `dir`; direction is descent by
        // construction (restart resets it to the preconditioned negative
        // gradient whenever conjugacy degrades).
        let mut slope: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            for (d, v) in dir.iter_mut().zip(&y) {
                *d = -v;
            }
            slope = -gy;
        }
        // First trial: the step a quadratic model with the previous
        // decrease would make exact, falling back to twice the last
        // accepted step. Near the optimum this is accepted unchanged,
        // which keeps the conjugate directions accurate.
        let quad_fit = 2.0 * last_decrease / (-slope);
        let mut t = if quad_fit.is_finite() && quad_fit > 0.0 {
            quad_fit.clamp(step * 0.1, step * 10.0)
        } else {
            step * 2.0
        };
        let mut accepted = None;
        for _ in 0..60 {
            for i in 0..n {
                trial[i] = u[i] + t * dir[i];
            }
            let e_try = asm.energy(&trial)?;
            if e_try <= energy + 1e-4 * t * slope {
                accepted = Some(e_try);
                break;
            }
            t *= 0.5;
        }
        let Some(e_new) = accepted else {
            // No decrease representable along a descent direction: the
            // energy is flat to rounding, which is the stall criterion.
            converged = true;
            break;
        };
        std::mem::swap(&mut u, &mut trial);
        step = t;
        let decrease = energy - e_new;
        last_decrease = decrease;
        energy = e_new;
        history.push(energy);

        let g_old_y_old = gy;
        let mut y_old = vec![0.0; 0];
        std::mem::swap(&mut y_old, &mut y);
        energy = asm.energy_and_grad(&u, &mut g)?;
        debug_assert!((energy - e_new).abs() <= 1e-9 * energy.abs().max(1.0));
        grad_sup = masked_sup(&grid, &g);
        if grad_sup <= opts.tol {
            converged = true;
            break;
        }
        if decrease <= 1e-12 * energy.abs().max(1.0) {
            converged = true;
            break;
        }

        if opts.precondition && (iter + 1) % 20 == 0 {
            asm.preconditioner(&u, &mut precon);
        }
        y = g.iter().zip(&precon).map(|(gi, mi)| gi / mi).collect();
        gy = g.iter().zip(&y).map(|(a, b)| a * b).sum();
        // Polak-Ribiere with nonnegativity clamp; restart on Powell's
        // conjugacy-loss test (the new gradient overlaps the old one too
        // much) and periodically as a safety net.
        let gy_cross: f64 = g.iter().zip(&y_old).map(|(a, b)| a * b).sum();
        let mut beta = (gy - gy_cross) / g_old_y_old;
        if !beta.is_finite()
            || beta < 0.0
            || gy_cross.abs() >= 0.2 * gy
            || (iter + 1) % 1000 == 0
        {
            beta = 0.0;
        }
        for i in 0..n {
            dir[i] = -y[i] + beta * dir[i];
        }
    }

    if !converged {
        let report = build_report(&asm, &u, energy, history, grad_sup, false);
        let field = GridField { grid, values: u, converged: false, grad_sup };
        return Err(SolverError::NonConvergence {
            iterations: report.iterations,
            grad_sup,
            tol: opts.tol,
            field: Box::new(field),
            report: Box::new(report),
        });
    }
    let report = build_report(&asm, &u, energy, history, grad_sup, true);
    let field = GridField { grid, values: u, converged: true, grad_sup };
    Ok((field, report))
}

/// One rung of the truncate-then-mollify ladder.
#[derive(Debug, Clone, Serialize)]
pub struct LadderSolve {
    pub k: f64,
    pub eps: f64,
    pub field: GridField,
    pub report: SolveReport,
    /// Left side of the minimality comparison: the shifted p-energy of the
    /// solution, scaled by min(1, a_min) so the bound is valid for every
    /// coefficient range.
    pub minimality_lhs: f64,
    /// Right side: the regularized energy of the boundary extension.
    pub minimality_rhs: f64,
    /// Sup of `(mu^2+|Du|^2)^{1/2}` over simplices with barycenter in the
    /// centered ball of half the grid extent.
    pub sup_v_inner: f64,
}

/// Solves the full regularization ladder (`k` increasing, `eps` decreasing)
/// and checks the minimality comparison on every rung: the shifted p-energy
/// of the minimizer never exceeds the regularized energy of the boundary
/// extension, because the extension is admissible and the density dominates
/// the shifted p-phase.
pub fn solve_sequence(
    grid: Grid,
    base: &Integrand,
    bd: &BoundaryData,
    k_list: &[f64],
    eps_list: &[f64],
    spec: &MollifierSpec,
    opts: &SolverOptions,
) -> Result<Vec<LadderSolve>, SolverError> {
    if k_list.is_empty() || eps_list.is_empty() {
        return Err(SolverError::Domain("empty ladder".into()));
    }
    if k_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SolverError::Domain("truncation levels must increase".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(SolverError::Domain("mollification radii must decrease".into()));
    }
    let u_bd = GridField::from_boundary(grid, bd);
    let (a_min, _) = base.a_bounds();
    let factor = a_min.min(1.0);
    let inner_r = grid.extent / 2.0;
    let mut out = Vec::new();
    for &k in k_list {
        let trunc = base.truncate(k)?;
        for &eps in eps_list {
            let member = trunc.mollify(eps, spec)?;
            let (field, report) = minimize(grid, &member, bd, opts)?;
            let asm = Assembly::new(grid, &member)?;
            let rhs = asm.energy(&u_bd.values)?;
            let lhs = factor * report.lp_shifted;
            if lhs > rhs + 1e-9 * rhs.abs().max(1.0) {
                return Err(SolverError::Domain(format!(
                    "minimality comparison failed at k = {k}, eps = {eps}: \
                     shifted p-energy {lhs} exceeds extension energy {rhs}"
                )));
            }
            let mut sup_inner = 0.0f64;
            let mu = member.e.mu;
            for (bary, du) in field.simplex_gradients() {
                let r2: f64 = bary[..grid.dim].iter().map(|c| c * c).sum();
                if r2.sqrt() <= inner_r {
                    let w = mu * mu + du[0] * du[0] + du[1] * du[1] + du[2] * du[2];
                    sup_inner = sup_inner.max(w.sqrt());
                }
            }
            out.push(LadderSolve {
                k,
                eps,
                field,
                report,
                minimality_lhs: lhs,
                minimality_rhs: rhs,
                sup_v_inner: sup_inner,
            });
        }
    }
    Ok(out)
}
