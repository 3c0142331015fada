use std::sync::OnceLock;

use nalgebra::SMatrix;

use super::{Derivs, N_DOFS};
use crate::error::{Error, Result};

/// Number of monomials of total degree <= 5.
pub const N_MONOMIALS: usize = 21;

/// Exponents `(p, q)` of `x^p y^q`, ordered by total degree.
pub const MONOMIALS: [(u32, u32); N_MONOMIALS] = {
    let mut out = [(0u32, 0u32); N_MONOMIALS];
    let mut k = 0;
    let mut d = 0;
    while d <= 5 {
        let mut q = 0;
        while q <= d {
            out[k] = (d - q, q);
            k += 1;
            q += 1;
        }
        d += 1;
    }
    out
};

/// Reference triangle vertices.
pub const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Midpoint of reference edge `k`, which joins vertices `k` and `(k+1) % 3`.
pub const REF_MIDPOINTS: [[f64; 2]; 3] = [[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]];

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Outward unit normals of the reference edges.
pub const REF_NORMALS: [[f64; 2]; 3] = [[0.0, -1.0], [FRAC_1_SQRT_2, FRAC_1_SQRT_2], [-1.0, 0.0]];

/// `(value, d/dx, d/dy, d2/dx2, d2/dxdy, d2/dy2)` of `x^p y^q`.
fn monomial_derivs(p: u32, q: u32, x: f64, y: f64) -> Derivs {
    let pw = |b: f64, e: i64| if e < 0 { 0.0 } else { b.powi(e as i32) };
    let (pi, qi) = (p as i64, q as i64);
    let (pf, qf) = (p as f64, q as f64);
    [
        pw(x, pi) * pw(y, qi),
        pf * pw(x, pi - 1) * pw(y, qi),
        qf * pw(x, pi) * pw(y, qi - 1),
        pf * (pf - 1.0) * pw(x, pi - 2) * pw(y, qi),
        pf * qf * pw(x, pi - 1) * pw(y, qi - 1),
        qf * (qf - 1.0) * pw(x, pi) * pw(y, qi - 2),
    ]
}

/// The 21 quintic Argyris basis functions on the reference triangle.
///
/// Degrees of freedom, in order: for each vertex `a` the six values
/// `(u, u_x, u_y, u_xx, u_xy, u_yy)` at indices `6a..6a+6`, then the
/// outward normal derivative at the midpoint of edge `k` at index `18 + k`.
#[derive(Debug, Clone)]
pub struct ReferenceBasis {
    /// `coefficients[(m, i)]` is the coefficient of monomial `m` in basis
    /// function `i`.
    coefficients: SMatrix<f64, N_MONOMIALS, N_DOFS>,
    /// Derivatives of every basis function at every reference vertex.
    vertex_derivs: [[Derivs; N_DOFS]; 3],
    /// Gradients of every basis function at every reference edge midpoint.
    midpoint_gradients: [[[f64; 2]; N_DOFS]; 3],
}

/// Applies the 21 reference functionals to a function given by its
/// derivative sampler.
pub fn reference_functionals<F: Fn(f64, f64) -> Derivs>(f: F) -> [f64; N_DOFS] {
    let mut out = [0.0; N_DOFS];
    for (a, v) in REF_VERTICES.iter().enumerate() {
        out[6 * a..6 * a + 6].copy_from_slice(&f(v[0], v[1]));
    }
    for k in 0..3 {
        let m = REF_MIDPOINTS[k];
        let d = f(m[0], m[1]);
        out[18 + k] = REF_NORMALS[k][0] * d[1] + REF_NORMALS[k][1] * d[2];
    }
    out
}

/// Builds the reference basis by inverting the functional/monomial matrix.
pub fn build_reference_basis() -> Result<ReferenceBasis> {
    // functional_matrix[(k, m)] = L_k(monomial m)
    let mut functional_matrix = SMatrix::<f64, N_DOFS, N_MONOMIALS>::zeros();
    for (m, &(p, q)) in MONOMIALS.iter().enumerate() {
        let col = reference_functionals(|x, y| monomial_derivs(p, q, x, y));
        for (k, v) in col.iter().enumerate() {
            functional_matrix[(k, m)] = *v;
        }
    }
    let coefficients = functional_matrix
        .try_inverse()
        .ok_or(Error::SingularReference)?;

    let mut basis = ReferenceBasis {
        coefficients,
        vertex_derivs: [[[0.0; 6]; N_DOFS]; 3],
        midpoint_gradients: [[[0.0; 2]; N_DOFS]; 3],
    };
    for a in 0..3 {
        let v = REF_VERTICES[a];
        basis.vertex_derivs[a] = basis.eval(v[0], v[1]);
    }
    for k in 0..3 {
        let m = REF_MIDPOINTS[k];
        let d = basis.eval(m[0], m[1]);
        for i in 0..N_DOFS {
            basis.midpoint_gradients[k][i] = [d[i][1], d[i][2]];
        }
    }
    Ok(basis)
}

/// Process-wide reference basis, built on first use.
pub fn reference_basis() -> &'static ReferenceBasis {
    static BASIS: OnceLock<ReferenceBasis> = OnceLock::new();
    BASIS.get_or_init(|| {
        build_reference_basis().expect("Argyris reference functionals are unisolvent")
    })
}

impl ReferenceBasis {
    /// Values and derivatives up to order 2 of all 21 basis functions at
    /// the reference point `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> [Derivs; N_DOFS] {
        let mut mono = [[0.0; 6]; N_MONOMIALS];
        for (m, &(p, q)) in MONOMIALS.iter().enumerate() {
            mono[m] = monomial_derivs(p, q, x, y);
        }
        let mut out = [[0.0; 6]; N_DOFS];
        for (i, o) in out.iter_mut().enumerate() {
            for (m, md) in mono.iter().enumerate() {
                let c = self.coefficients[(m, i)];
                if c != 0.0 {
                    for (oc, mc) in o.iter_mut().zip(md) {
                        *oc += c * mc;
                    }
                }
            }
        }
        out
    }

    /// Monomial coefficients of basis function `i`.
    pub fn coefficients(&self, i: usize) -> [f64; N_MONOMIALS] {
        let mut out = [0.0; N_MONOMIALS];
        for (m, o) in out.iter_mut().enumerate() {
            *o = self.coefficients[(m, i)];
        }
        out
    }

    pub fn vertex_derivs(&self, vertex: usize) -> &[Derivs; N_DOFS] {
        &self.vertex_derivs[vertex]
    }

    pub fn midpoint_gradients(&self, edge: usize) -> &[[f64; 2]; N_DOFS] {
        &self.midpoint_gradients[edge]
    }
}
