//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use argyris_qg::argyris::{Derivs, Space};
use argyris_qg::assembly::{BoundaryMode, DofOrdering};
use argyris_qg::mesh::build_structured_mesh;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn space(lx: f64, ly: f64, h: f64, mode: BoundaryMode) -> Space {
    Space::new(
        build_structured_mesh(lx, ly, h).unwrap(),
        mode,
        DofOrdering::Strip,
    )
    .unwrap()
}

/// `6 (nx+1)(ny+1)` vertex DOFs plus one per edge, counted from the grid.
pub fn dof_count_oracle(lx: f64, ly: f64, h: f64) -> usize {
    let nx = (lx / h).round() as usize;
    let ny = (ly / h).round() as usize;
    let vertices = (nx + 1) * (ny + 1);
    let edges = nx * (ny + 1) + (nx + 1) * ny + nx * ny;
    6 * vertices + edges
}

/// `int_T x^p y^q` over the reference triangle: `p! q! / (p + q + 2)!`.
pub fn reference_monomial_integral(p: u32, q: u32) -> f64 {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    fact(p) * fact(q) / fact(p + q + 2)
}

/// Polynomial `sum c_k x^p y^q` with exact value, gradient and Hessian.
#[derive(Debug, Clone)]
pub struct Polynomial {
    pub terms: Vec<(f64, i32, i32)>,
}

impl Polynomial {
    /// Random polynomial of total degree `degree`.
    pub fn random(degree: i32, rng: &mut StdRng) -> Self {
        let mut terms = Vec::new();
        for p in 0..=degree {
            for q in 0..=degree - p {
                terms.push((rng.gen_range(-1.0..1.0), p, q));
            }
        }
        Self { terms }
    }

    pub fn derivs(&self, x: f64, y: f64) -> Derivs {
        let pw = |b: f64, e: i32| if e < 0 { 0.0 } else { b.powi(e) };
        let mut d = [0.0; 6];
        for &(c, p, q) in &self.terms {
            let (pf, qf) = (p as f64, q as f64);
            d[0] += c * pw(x, p) * pw(y, q);
            d[1] += c * pf * pw(x, p - 1) * pw(y, q);
            d[2] += c * qf * pw(x, p) * pw(y, q - 1);
            d[3] += c * pf * (pf - 1.0) * pw(x, p - 2) * pw(y, q);
            d[4] += c * pf * qf * pw(x, p - 1) * pw(y, q - 1);
            d[5] += c * qf * (qf - 1.0) * pw(x, p) * pw(y, q - 2);
        }
        d
    }
}

/// `sin(pi x) sin(pi y) exp(x)` with its derivatives written out by hand.
pub fn smooth_oracle(x: f64, y: f64) -> Derivs {
    use std::f64::consts::PI;
    let (sx, cx) = (PI * x).sin_cos();
    let (sy, cy) = (PI * y).sin_cos();
    let e = x.exp();
    let fx = e * (sx + PI * cx);
    let fxx = e * (2.0 * PI * cx + (1.0 - PI * PI) * sx);
    [
        e * sx * sy,
        fx * sy,
        e * sx * PI * cy,
        fxx * sy,
        fx * PI * cy,
        -e * sx * PI * PI * sy,
    ]
}

/// Random coefficient vector vanishing on constrained DOFs.
pub fn random_free_vector(space: &Space, rng: &mut StdRng) -> Vec<f64> {
    let dm = space.dofmap();
    (0..space.n_dofs())
        .map(|i| {
            if dm.is_constrained(i) {
                0.0
            } else {
                rng.gen_range(-1.0..1.0)
            }
        })
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Observed order `log(e_coarse / e_fine) / log(h_coarse / h_fine)`.
pub fn order(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}
