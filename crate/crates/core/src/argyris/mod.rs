//! The 21-DOF quintic Argyris element and the global C1 space built on it.

pub mod reference;
pub mod transform;

use rayon::prelude::*;

use crate::assembly::dofmap::{build_dofmap, BoundaryMode, DofMap, DofOrdering};
use crate::error::{Error, Result};
use crate::mesh::{edge_normal, Mesh};

pub use reference::{build_reference_basis, reference_basis, ReferenceBasis};
pub use transform::{build_transform, push_forward, ArgyrisTransform};

/// Local degrees of freedom per triangle.
pub const N_DOFS: usize = 21;

/// `(value, d/dx, d/dy, d2/dx2, d2/dxdy, d2/dy2)`.
pub type Derivs = [f64; 6];

/// A function that can report its value, gradient and Hessian.
pub trait SmoothFunction: Sync {
    fn derivs(&self, x: f64, y: f64) -> Derivs;
}

impl<F> SmoothFunction for F
where
    F: Fn(f64, f64) -> Derivs + Sync,
{
    fn derivs(&self, x: f64, y: f64) -> Derivs {
        self(x, y)
    }
}

/// Mesh, numbering and per-triangle transforms of a global Argyris space.
#[derive(Debug, Clone)]
pub struct Space {
    mesh: Mesh,
    dofmap: DofMap,
    transforms: Vec<ArgyrisTransform>,
    element_dofs: Vec<[usize; N_DOFS]>,
}

impl Space {
    pub fn new(mesh: Mesh, mode: BoundaryMode, ordering: DofOrdering) -> Result<Self> {
        let dofmap = build_dofmap(&mesh, mode, ordering);
        Self::with_dofmap(mesh, dofmap)
    }

    pub fn with_dofmap(mesh: Mesh, dofmap: DofMap) -> Result<Self> {
        let reference = reference_basis();
        let transforms = (0..mesh.n_triangles())
            .into_par_iter()
            .map(|t| build_transform(reference, &mesh, t))
            .collect::<Result<Vec<_>>>()?;
        let element_dofs = (0..mesh.n_triangles())
            .map(|t| dofmap.element_dofs(&mesh, t))
            .collect();
        Ok(Self {
            mesh,
            dofmap,
            transforms,
            element_dofs,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dofmap(&self) -> &DofMap {
        &self.dofmap
    }

    pub fn dofmap_mut(&mut self) -> &mut DofMap {
        &mut self.dofmap
    }

    pub fn n_dofs(&self) -> usize {
        self.dofmap.n_dofs()
    }

    pub fn transform(&self, triangle: usize) -> &ArgyrisTransform {
        &self.transforms[triangle]
    }

    pub fn element_dofs(&self, triangle: usize) -> &[usize; N_DOFS] {
        &self.element_dofs[triangle]
    }

    /// Sets the prescribed boundary values from the functionals of `f`.
    pub fn lift<F: SmoothFunction>(&mut self, f: &F) {
        let values = interpolate_coefficients(&self.mesh, &self.dofmap, f);
        self.dofmap.set_prescribed(&values);
    }

    pub fn zero_field(&self) -> FemField<'_> {
        FemField::new(self, vec![0.0; self.n_dofs()]).expect("length matches")
    }
}

/// Degree-of-freedom values of `f`: derivatives at vertices, global-normal
/// derivative at edge midpoints.
pub fn interpolate_coefficients<F: SmoothFunction>(
    mesh: &Mesh,
    dofmap: &DofMap,
    f: &F,
) -> Vec<f64> {
    let mut coeffs = vec![0.0; dofmap.n_dofs()];
    for (v, p) in mesh.vertices().iter().enumerate() {
        let d = f.derivs(p[0], p[1]);
        for (c, value) in d.iter().enumerate() {
            coeffs[dofmap.vertex_dof(v, c)] = *value;
        }
    }
    for (e, edge) in mesh.edges().iter().enumerate() {
        let n = edge_normal(mesh, e).expect("edge index in range");
        let d = f.derivs(edge.midpoint[0], edge.midpoint[1]);
        coeffs[dofmap.edge_dof(e)] = n[0] * d[1] + n[1] * d[2];
    }
    coeffs
}

/// Nodal interpolant of `f` in `space`.
pub fn interpolate<'a, F: SmoothFunction>(space: &'a Space, f: &F) -> FemField<'a> {
    let coeffs = interpolate_coefficients(space.mesh(), space.dofmap(), f);
    FemField { space, coeffs }
}

/// A finite element function `sum_i c_i phi_i`.
#[derive(Debug, Clone)]
pub struct FemField<'a> {
    space: &'a Space,
    coeffs: Vec<f64>,
}

impl<'a> FemField<'a> {
    pub fn new(space: &'a Space, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.n_dofs() {
            return Err(Error::DimensionMismatch {
                expected: space.n_dofs(),
                got: coeffs.len(),
            });
        }
        Ok(Self { space, coeffs })
    }

    pub fn space(&self) -> &'a Space {
        self.space
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coeffs
    }

    /// Local coefficients on a triangle.
    pub fn local(&self, triangle: usize) -> [f64; N_DOFS] {
        let dofs = self.space.element_dofs(triangle);
        let mut out = [0.0; N_DOFS];
        for (o, &d) in out.iter_mut().zip(dofs) {
            *o = self.coeffs[d];
        }
        out
    }

    /// Value, gradient and Hessian at `(x, y)` from the containing triangle.
    pub fn eval(&self, x: f64, y: f64) -> Result<Derivs> {
        let t = self.space.mesh().locate(x, y)?;
        self.eval_on(t, x, y)
    }

    /// Same as [`FemField::eval`], evaluated from a given triangle.
    pub fn eval_on(&self, triangle: usize, x: f64, y: f64) -> Result<Derivs> {
        let basis = self
            .space
            .transform(triangle)
            .eval_basis(reference_basis(), [x, y])?;
        Ok(combine(&self.local(triangle), &basis))
    }
}

/// `sum_i c_i d_i` over 21 basis derivative tuples.
#[inline]
pub fn combine(local: &[f64; N_DOFS], basis: &[Derivs; N_DOFS]) -> Derivs {
    let mut out = [0.0; 6];
    for (c, b) in local.iter().zip(basis) {
        for k in 0..6 {
            out[k] += c * b[k];
        }
    }
    out
}
