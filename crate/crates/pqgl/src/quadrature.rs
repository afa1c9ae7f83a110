//! Gauss-Legendre rules and tensorized quadrature over disks and balls.
//!
//! Ball integrals use polar/spherical coordinates — Gauss-Legendre in the
//! radial (and polar) direction, periodic trapezoid in the angle, which is
//! spectrally accurate for smooth integrands. A cube rule against a ball
//! indicator would converge like O(h) and defeat the refinement-stability
//! checks layered on top of this module.

/// `n` geometrically spaced points from `lo` to `hi` inclusive (both > 0).
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let step = (hi / lo).ln() / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| lo * (step * i as f64).exp()).collect();
    // Pin the endpoints exactly; downstream code compares against them.
    out[0] = lo;
    out[n - 1] = hi;
    out
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Nodes are the roots of the Legendre polynomial `P_n`, found by Newton
/// iteration from the Chebyshev initial guess; weights are
/// `2 / ((1 - x^2) P_n'(x)^2)`. Exact for polynomials of degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence: (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 1..n {
                let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Affine image of a `[-1, 1]` rule on `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        xs.iter().map(|x| mid + half * x).collect(),
        ws.iter().map(|w| half * w).collect(),
    )
}

/// Quadrature rule over a disk (dim 2) or ball (dim 3).
///
/// Points are stored padded to 3 coordinates; trailing coordinates beyond
/// `dim` are zero. Weights include the polar Jacobian, so
/// `integrate(f) = sum_i w_i f(x_i)` approximates the volume integral.
#[derive(Debug, Clone)]
pub struct BallQuadrature {
    pub dim: usize,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl BallQuadrature {
    /// Rule with `order` radial nodes (and `order` polar, `2*order` azimuthal
    /// nodes) on the ball of the given center and radius.
    pub fn new(dim: usize, center: [f64; 3], radius: f64, order: usize) -> Self {
        assert!(dim == 2 || dim == 3, "only dimensions 2 and 3 are supported");
        assert!(radius > 0.0 && order >= 2);
        let (rs, rws) = gauss_legendre_on(order, 0.0, radius);
        let n_theta = (2 * order).max(4);
        let dtheta = 2.0 * std::f64::consts::PI / n_theta as f64;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        match dim {
            2 => {
                for (&rho, &wr) in rs.iter().zip(&rws) {
                    for k in 0..n_theta {
                        let th = k as f64 * dtheta;
                        points.push([
                            center[0] + rho * th.cos(),
                            center[1] + rho * th.sin(),
                            0.0,
                        ]);
                        weights.push(wr * rho * dtheta);
                    }
                }
            }
            _ => {
                let (mus, mws) = gauss_legendre(order);
                for (&rho, &wr) in rs.iter().zip(&rws) {
                    for (&mu, &wm) in mus.iter().zip(&mws) {
                        let sin_phi = (1.0 - mu * mu).max(0.0).sqrt();
                        for k in 0..n_theta {
                            let th = k as f64 * dtheta;
                            points.push([
                                center[0] + rho * sin_phi * th.cos(),
                                center[1] + rho * sin_phi * th.sin(),
                                center[2] + rho * mu,
                            ]);
                            weights.push(wr * rho * rho * wm * dtheta);
                        }
                    }
                }
            }
        }
        BallQuadrature { dim, points, weights }
    }

    /// Rule on the unit ball centered at the origin.
    pub fn unit(dim: usize, order: usize) -> Self {
        BallQuadrature::new(dim, [0.0; 3], 1.0, order)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&[f64; 3], f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, mut f: impl FnMut(&[f64; 3]) -> f64) -> f64 {
        self.nodes().map(|(x, w)| w * f(x)).sum()
    }
}
