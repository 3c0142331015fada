//! Triangle quadrature.
//!
//! Rules are collapsed (conical) products of a Gauss-Jacobi rule with
//! weight `(1 - u)` and a Gauss-Legendre rule, mapped onto the unit
//! reference triangle `{(x, y) : x, y >= 0, x + y <= 1}`. With `n` points
//! per direction the rule integrates every polynomial of total degree
//! `2n - 1` exactly. Nodes and weights come from the Golub-Welsch
//! eigenvalue method.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest degree accepted by [`triangle_rule`].
pub const MAX_DEGREE: usize = 20;

/// Default exactness used by the assemblers.
pub const DEFAULT_DEGREE: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// Barycentric coordinates `(l0, l1, l2)` of each point; the reference
    /// coordinates are `(x, y) = (l1, l2)`.
    pub points: Vec<[f64; 3]>,
    /// Weights on the reference triangle; they sum to 1/2.
    pub weights: Vec<f64>,
    /// Total degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Reference coordinates of point `q`.
    pub fn reference_point(&self, q: usize) -> [f64; 2] {
        [self.points[q][1], self.points[q][2]]
    }

    /// Integrates `f` over the reference triangle.
    pub fn integrate_reference<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p[1], p[2]))
            .sum()
    }
}

/// Gauss rule on `[-1, 1]` for the Jacobi weight `(1 - t)^alpha (1 + t)^beta`.
fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let ab = alpha + beta;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        jac[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let s = 2.0 * m + ab;
            let b = 4.0 * m * (m + alpha) * (m + beta) * (m + ab) / (s * s * (s + 1.0) * (s - 1.0));
            jac[(k, k + 1)] = b.sqrt();
            jac[(k + 1, k)] = b.sqrt();
        }
    }
    // mu0 = int (1-t)^a (1+t)^b dt, only needed for integer a, b here
    let mu0 = 2f64.powf(ab + 1.0) * gamma_int(alpha) * gamma_int(beta) / gamma_int(ab + 1.0);
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `Gamma(x + 1)` for non-negative integer `x`.
fn gamma_int(x: f64) -> f64 {
    (1..=x.round() as u64).map(|k| k as f64).product()
}

/// Returns a rule integrating all polynomials of total degree
/// `<= min_degree` exactly.
pub fn triangle_rule(min_degree: usize) -> Result<QuadratureRule> {
    if !(1..=MAX_DEGREE).contains(&min_degree) {
        return Err(Error::UnsupportedQuadrature(min_degree));
    }
    let n = (min_degree + 2) / 2;
    let (tu, wu) = gauss_jacobi(n, 1.0, 0.0);
    let (tw, ww) = gauss_jacobi(n, 0.0, 0.0);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (a, &t) in tu.iter().enumerate() {
        // u in [0,1]; the factor (1-u) of the collapse lives in the Jacobi weight
        let u = 0.5 * (1.0 + t);
        for (b, &s) in tw.iter().enumerate() {
            let w = 0.5 * (1.0 + s);
            let x = u;
            let y = (1.0 - u) * w;
            points.push([1.0 - x - y, x, y]);
            // dt = 2 du, (1 - t) = 2 (1 - u), ds = 2 dw
            weights.push(wu[a] * ww[b] / 8.0);
        }
    }
    Ok(QuadratureRule {
        points,
        weights,
        degree: 2 * n - 1,
    })
}

/// Affine triangle geometry `x = B xhat + x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleGeometry {
    pub origin: [f64; 2],
    /// Columns are `p1 - p0` and `p2 - p0`.
    pub jacobian: [[f64; 2]; 2],
}

impl TriangleGeometry {
    pub fn new(p: [[f64; 2]; 3]) -> Self {
        Self {
            origin: p[0],
            jacobian: [
                [p[1][0] - p[0][0], p[2][0] - p[0][0]],
                [p[1][1] - p[0][1], p[2][1] - p[0][1]],
            ],
        }
    }

    pub fn det(&self) -> f64 {
        let b = &self.jacobian;
        b[0][0] * b[1][1] - b[0][1] * b[1][0]
    }

    pub fn map(&self, xhat: [f64; 2]) -> [f64; 2] {
        let b = &self.jacobian;
        [
            self.origin[0] + b[0][0] * xhat[0] + b[0][1] * xhat[1],
            self.origin[1] + b[1][0] * xhat[0] + b[1][1] * xhat[1],
        ]
    }
}

/// `sum_q w_q |det B| f(x_q)`.
pub fn integrate<F: Fn(f64, f64) -> f64>(
    rule: &QuadratureRule,
    geometry: &TriangleGeometry,
    f: F,
) -> f64 {
    let jac = geometry.det().abs();
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(p, w)| {
            let x = geometry.map([p[1], p[2]]);
            w * jac * f(x[0], x[1])
        })
        .sum()
}
