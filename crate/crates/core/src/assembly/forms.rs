//! Element integrals and global assembly of the bilinear, trilinear and
//! load forms.

use std::borrow::Cow;
use std::collections::HashMap;
use std::sync::OnceLock;

use rayon::prelude::*;

use super::sparse::SparseMatrix;
use crate::argyris::{combine, reference_basis, Derivs, FemField, Space, N_DOFS};
use crate::error::Result;
use crate::quadrature::{triangle_rule, QuadratureRule};

/// Triangles are processed in parallel chunks of this size, then scattered
/// serially in triangle order so results do not depend on scheduling.
const CHUNK: usize = 256;

/// Physical basis tables are shared between congruent triangles; past this
/// many distinct shapes they are recomputed per triangle instead.
const MAX_SHAPE_CLASSES: usize = 64;

pub type ElementMatrix = [[f64; N_DOFS]; N_DOFS];
pub type ElementVector = [f64; N_DOFS];

/// Physical basis derivatives and scaled weights at the quadrature points
/// of one triangle.
#[derive(Debug, Clone)]
pub struct ElementTables {
    pub basis: Vec<[Derivs; N_DOFS]>,
    /// `w_q |det B|`.
    pub weights: Vec<f64>,
}

/// Assembles global operators over a [`Space`] with a fixed quadrature rule.
pub struct Assembler<'a> {
    space: &'a Space,
    rule: QuadratureRule,
    reference: Vec<[Derivs; N_DOFS]>,
    classes: Vec<ElementTables>,
    class_of: Option<Vec<usize>>,
    parallel: bool,
    pattern: OnceLock<SparseMatrix>,
}

fn shape_key(space: &Space, t: usize) -> [u64; 10] {
    let tr = space.transform(t);
    let b = tr.geometry().jacobian;
    let n = tr.normals();
    [
        b[0][0], b[0][1], b[1][0], b[1][1], n[0][0], n[0][1], n[1][0], n[1][1], n[2][0], n[2][1],
    ]
    .map(f64::to_bits)
}

impl<'a> Assembler<'a> {
    pub fn new(space: &'a Space, rule: QuadratureRule) -> Self {
        let basis = reference_basis();
        let reference: Vec<_> = (0..rule.len())
            .map(|q| {
                let p = rule.reference_point(q);
                basis.eval(p[0], p[1])
            })
            .collect();

        let mut keys: HashMap<[u64; 10], usize> = HashMap::new();
        let mut representatives = Vec::new();
        let mut class_of = Vec::with_capacity(space.mesh().n_triangles());
        for t in 0..space.mesh().n_triangles() {
            let next = keys.len();
            let c = *keys.entry(shape_key(space, t)).or_insert(next);
            if c == representatives.len() {
                representatives.push(t);
            }
            class_of.push(c);
            if keys.len() > MAX_SHAPE_CLASSES {
                break;
            }
        }
        let mut out = Self {
            space,
            rule,
            reference,
            classes: Vec::new(),
            class_of: None,
            parallel: true,
            pattern: OnceLock::new(),
        };
        if keys.len() <= MAX_SHAPE_CLASSES {
            out.classes = representatives
                .iter()
                .map(|&t| out.compute_tables(t))
                .collect();
            out.class_of = Some(class_of);
        }
        out
    }

    /// Assembler using the rule of at least degree `degree`.
    pub fn with_degree(space: &'a Space, degree: usize) -> Result<Self> {
        Ok(Self::new(space, triangle_rule(degree)?))
    }

    /// Disables the parallel element loop.
    pub fn serial(mut self) -> Self {
        self.parallel = false;
        self
    }

    pub fn space(&self) -> &'a Space {
        self.space
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    fn compute_tables(&self, t: usize) -> ElementTables {
        let tr = self.space.transform(t);
        let jac = tr.geometry().det().abs();
        ElementTables {
            basis: self
                .reference
                .iter()
                .map(|r| tr.physical_from_reference(r))
                .collect(),
            weights: self.rule.weights.iter().map(|w| w * jac).collect(),
        }
    }

    /// Basis tables of triangle `t`.
    pub fn tables(&self, t: usize) -> Cow<'_, ElementTables> {
        match &self.class_of {
            Some(classes) => Cow::Borrowed(&self.classes[classes[t]]),
            None => Cow::Owned(self.compute_tables(t)),
        }
    }

    /// Physical quadrature points of triangle `t`.
    pub fn points(&self, t: usize) -> Vec<[f64; 2]> {
        let g = self.space.transform(t).geometry();
        (0..self.rule.len())
            .map(|q| g.map(self.rule.reference_point(q)))
            .collect()
    }

    /// Zero matrix holding every pair of degrees of freedom that share a
    /// triangle.
    pub fn pattern(&self) -> &SparseMatrix {
        self.pattern.get_or_init(|| {
            let n = self.space.n_dofs();
            let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
            for t in 0..self.space.mesh().n_triangles() {
                let dofs = self.space.element_dofs(t);
                for &r in dofs {
                    rows[r].extend_from_slice(dofs);
                }
            }
            for row in rows.iter_mut() {
                row.sort_unstable();
                row.dedup();
            }
            SparseMatrix::from_pattern(n, n, rows)
        })
    }

    fn map_chunks<T, F>(&self, f: F) -> Vec<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        let nt = self.space.mesh().n_triangles();
        let starts: Vec<usize> = (0..nt).step_by(CHUNK).collect();
        let run = |&s: &usize| (s..(s + CHUNK).min(nt)).map(&f).collect::<Vec<T>>();
        if self.parallel {
            starts.par_iter().map(run).collect()
        } else {
            starts.iter().map(run).collect()
        }
    }

    /// Global matrix from an element kernel `kernel(t, tables, out)`, where
    /// `out[i][j]` receives the contribution to row `i`, column `j`.
    pub fn matrix<K>(&self, symmetric: bool, kernel: K) -> SparseMatrix
    where
        K: Fn(usize, &ElementTables, &mut ElementMatrix) + Sync,
    {
        let mut a = self.pattern().clone();
        a.symmetric = symmetric;
        let chunks = self.map_chunks(|t| {
            let mut k = [[0.0; N_DOFS]; N_DOFS];
            kernel(t, &self.tables(t), &mut k);
            k
        });
        let mut t = 0;
        for chunk in chunks {
            for k in chunk {
                let dofs = self.space.element_dofs(t);
                for (i, &r) in dofs.iter().enumerate() {
                    for (j, &c) in dofs.iter().enumerate() {
                        a.add(r, c, k[i][j]);
                    }
                }
                t += 1;
            }
        }
        a
    }

    /// Global vector from an element kernel.
    pub fn vector<K>(&self, kernel: K) -> Vec<f64>
    where
        K: Fn(usize, &ElementTables, &mut ElementVector) + Sync,
    {
        let mut v = vec![0.0; self.space.n_dofs()];
        let chunks = self.map_chunks(|t| {
            let mut e = [0.0; N_DOFS];
            kernel(t, &self.tables(t), &mut e);
            e
        });
        let mut t = 0;
        for chunk in chunks {
            for e in chunk {
                for (i, &r) in self.space.element_dofs(t).iter().enumerate() {
                    v[r] += e[i];
                }
                t += 1;
            }
        }
        v
    }

    fn local(&self, coeffs: &[f64], t: usize) -> ElementVector {
        let mut out = [0.0; N_DOFS];
        for (o, &d) in out.iter_mut().zip(self.space.element_dofs(t)) {
            *o = coeffs[d];
        }
        out
    }

    /// `A0_ij = (lap phi_j, lap phi_i)`.
    pub fn biharmonic(&self) -> SparseMatrix {
        self.matrix(true, |_, tab, k| {
            for (basis, w) in tab.basis.iter().zip(&tab.weights) {
                let lap: [f64; N_DOFS] = std::array::from_fn(|i| basis[i][3] + basis[i][5]);
                for i in 0..N_DOFS {
                    let wi = w * lap[i];
                    for j in 0..N_DOFS {
                        k[i][j] += wi * lap[j];
                    }
                }
            }
        })
    }

    /// `L_ij = (grad phi_j, grad phi_i)`.
    pub fn laplace(&self) -> SparseMatrix {
        self.matrix(true, |_, tab, k| {
            for (basis, w) in tab.basis.iter().zip(&tab.weights) {
                for i in 0..N_DOFS {
                    let (gx, gy) = (w * basis[i][1], w * basis[i][2]);
                    for j in 0..N_DOFS {
                        k[i][j] += gx * basis[j][1] + gy * basis[j][2];
                    }
                }
            }
        })
    }

    /// `B_ij = (d/dx phi_j, phi_i)`.
    pub fn transport(&self) -> SparseMatrix {
        self.matrix(false, |_, tab, k| {
            for (basis, w) in tab.basis.iter().zip(&tab.weights) {
                for i in 0..N_DOFS {
                    let wi = w * basis[i][0];
                    for j in 0..N_DOFS {
                        k[i][j] += wi * basis[j][1];
                    }
                }
            }
        })
    }

    /// `M_ij = (phi_j, phi_i)`.
    pub fn mass(&self) -> SparseMatrix {
        self.matrix(true, |_, tab, k| {
            for (basis, w) in tab.basis.iter().zip(&tab.weights) {
                for i in 0..N_DOFS {
                    let wi = w * basis[i][0];
                    for j in 0..N_DOFS {
                        k[i][j] += wi * basis[j][0];
                    }
                }
            }
        })
    }

    /// `l_i = (f, phi_i)`.
    pub fn load<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        self.vector(|t, tab, e| {
            for ((basis, w), p) in tab.basis.iter().zip(&tab.weights).zip(self.points(t)) {
                let fw = w * f(p[0], p[1]);
                for i in 0..N_DOFS {
                    e[i] += fw * basis[i][0];
                }
            }
        })
    }

    /// `N(psi)_i = (lap psi, psi_y d/dx phi_i - psi_x d/dy phi_i)`.
    pub fn trilinear_residual(&self, psi: &[f64]) -> Vec<f64> {
        assert_eq!(psi.len(), self.space.n_dofs());
        self.vector(|t, tab, e| {
            let local = self.local(psi, t);
            for (basis, w) in tab.basis.iter().zip(&tab.weights) {
                let p = combine(&local, basis);
                let lap = w * (p[3] + p[5]);
                for i in 0..N_DOFS {
                    e[i] += lap * (p[2] * basis[i][1] - p[1] * basis[i][2]);
                }
            }
        })
    }

    /// Derivative of [`Assembler::trilinear_residual`] at `psi`:
    /// `K_ij = a1(phi_j, psi, phi_i) + a1(psi, phi_j, phi_i)`.
    pub fn trilinear_jacobian(&self, psi: &[f64]) -> SparseMatrix {
        assert_eq!(psi.len(), self.space.n_dofs());
        self.matrix(false, |t, tab, k| {
            let local = self.local(psi, t);
            for (basis, w) in tab.basis.iter().zip(&tab.weights) {
                let p = combine(&local, basis);
                let lap = p[3] + p[5];
                for i in 0..N_DOFS {
                    let (cx, cy) = (w * basis[i][1], w * basis[i][2]);
                    let adv = p[2] * cx - p[1] * cy;
                    for j in 0..N_DOFS {
                        let b = &basis[j];
                        k[i][j] += (b[3] + b[5]) * adv + lap * (b[2] * cx - b[1] * cy);
                    }
                }
            }
        })
    }
}

pub fn assemble_biharmonic(space: &Space, rule: &QuadratureRule) -> SparseMatrix {
    Assembler::new(space, rule.clone()).biharmonic()
}

pub fn assemble_laplace(space: &Space, rule: &QuadratureRule) -> SparseMatrix {
    Assembler::new(space, rule.clone()).laplace()
}

pub fn assemble_transport(space: &Space, rule: &QuadratureRule) -> SparseMatrix {
    Assembler::new(space, rule.clone()).transport()
}

pub fn assemble_load<F>(space: &Space, rule: &QuadratureRule, f: F) -> Vec<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    Assembler::new(space, rule.clone()).load(f)
}

pub fn trilinear_residual(space: &Space, rule: &QuadratureRule, psi: &FemField) -> Vec<f64> {
    Assembler::new(space, rule.clone()).trilinear_residual(psi.coefficients())
}

pub fn trilinear_jacobian(space: &Space, rule: &QuadratureRule, psi: &FemField) -> SparseMatrix {
    Assembler::new(space, rule.clone()).trilinear_jacobian(psi.coefficients())
}
