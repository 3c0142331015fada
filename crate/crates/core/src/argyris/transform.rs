use nalgebra::SMatrix;

use super::reference::{ReferenceBasis, REF_MIDPOINTS};
use super::{Derivs, N_DOFS};
use crate::error::{Error, Result};
use crate::mesh::{edge_normal, Mesh};
use crate::quadrature::TriangleGeometry;

const DEGENERATE_DET: f64 = 1e-14;

/// Pushes reference derivatives forward through `x = B xhat + b`, where
/// `inv` is `B^{-1}`: gradient `B^{-T} g`, Hessian `B^{-T} H B^{-1}`.
#[inline]
pub fn push_forward(inv: &[[f64; 2]; 2], r: &Derivs) -> Derivs {
    let [[j00, j01], [j10, j11]] = *inv;
    let (gx, gy) = (r[1], r[2]);
    let (hxx, hxy, hyy) = (r[3], r[4], r[5]);
    // row a of the Hessian pushed: sum_{b,c} J[b][a] H[b][c] J[c][a']
    let h = |a: usize, b: usize| -> f64 {
        let ja = [inv[0][a], inv[1][a]];
        let jb = [inv[0][b], inv[1][b]];
        ja[0] * (hxx * jb[0] + hxy * jb[1]) + ja[1] * (hxy * jb[0] + hyy * jb[1])
    };
    [
        r[0],
        j00 * gx + j10 * gy,
        j01 * gx + j11 * gy,
        h(0, 0),
        h(0, 1),
        h(1, 1),
    ]
}

/// Maps the reference Argyris basis onto one physical triangle.
///
/// The physical nodal basis is `phi_i = sum_j M[(i, j)] phihat_j o F^{-1}`.
/// The midpoint degrees of freedom are derivatives along the mesh-global
/// edge normals; since `F` does not map reference normals to physical
/// normals, the pulled-back normal derivative picks up an edge-tangential
/// part, which `M` absorbs.
#[derive(Debug, Clone)]
pub struct ArgyrisTransform {
    geometry: TriangleGeometry,
    inverse: [[f64; 2]; 2],
    normals: [[f64; 2]; 3],
    matrix: SMatrix<f64, N_DOFS, N_DOFS>,
}

impl ArgyrisTransform {
    /// Builds the transform for the triangle with vertices `coords` and
    /// midpoint-normal directions `normals` (one per local edge `k`, joining
    /// local vertices `k` and `(k+1) % 3`).
    pub fn new(
        reference: &ReferenceBasis,
        coords: [[f64; 2]; 3],
        normals: [[f64; 2]; 3],
        triangle: usize,
    ) -> Result<Self> {
        let geometry = TriangleGeometry::new(coords);
        let det = geometry.det();
        if det.abs() < DEGENERATE_DET {
            return Err(Error::DegenerateTriangle { triangle, det });
        }
        let b = geometry.jacobian;
        let inverse = [
            [b[1][1] / det, -b[0][1] / det],
            [-b[1][0] / det, b[0][0] / det],
        ];

        // g[(k, j)] = physical functional k applied to phihat_j o F^{-1}
        let mut g = SMatrix::<f64, N_DOFS, N_DOFS>::zeros();
        for a in 0..3 {
            let derivs = reference.vertex_derivs(a);
            for (j, d) in derivs.iter().enumerate() {
                let p = push_forward(&inverse, d);
                for c in 0..6 {
                    g[(6 * a + c, j)] = p[c];
                }
            }
        }
        for k in 0..3 {
            let n = normals[k];
            for (j, gr) in reference.midpoint_gradients(k).iter().enumerate() {
                let gx = inverse[0][0] * gr[0] + inverse[1][0] * gr[1];
                let gy = inverse[0][1] * gr[0] + inverse[1][1] * gr[1];
                g[(18 + k, j)] = n[0] * gx + n[1] * gy;
            }
        }
        // M G^T = I
        let matrix = g
            .transpose()
            .try_inverse()
            .ok_or(Error::DegenerateTriangle { triangle, det })?;
        Ok(Self {
            geometry,
            inverse,
            normals,
            matrix,
        })
    }

    pub fn geometry(&self) -> &TriangleGeometry {
        &self.geometry
    }

    /// `B^{-1}`.
    pub fn inverse_jacobian(&self) -> &[[f64; 2]; 2] {
        &self.inverse
    }

    pub fn normals(&self) -> &[[f64; 2]; 3] {
        &self.normals
    }

    pub fn matrix(&self) -> &SMatrix<f64, N_DOFS, N_DOFS> {
        &self.matrix
    }

    /// Physical midpoint of local edge `k`.
    pub fn midpoint(&self, k: usize) -> [f64; 2] {
        self.geometry.map(REF_MIDPOINTS[k])
    }

    /// Reference coordinates of a physical point.
    pub fn to_reference(&self, p: [f64; 2]) -> [f64; 2] {
        let d = [
            p[0] - self.geometry.origin[0],
            p[1] - self.geometry.origin[1],
        ];
        [
            self.inverse[0][0] * d[0] + self.inverse[0][1] * d[1],
            self.inverse[1][0] * d[0] + self.inverse[1][1] * d[1],
        ]
    }

    /// Physical basis derivatives from reference basis derivatives
    /// tabulated at the same point.
    pub fn physical_from_reference(&self, reference_derivs: &[Derivs; N_DOFS]) -> [Derivs; N_DOFS] {
        let mut pushed = [[0.0; 6]; N_DOFS];
        for (p, r) in pushed.iter_mut().zip(reference_derivs) {
            *p = push_forward(&self.inverse, r);
        }
        let mut out = [[0.0; 6]; N_DOFS];
        for (i, o) in out.iter_mut().enumerate() {
            for (j, p) in pushed.iter().enumerate() {
                let m = self.matrix[(i, j)];
                if m != 0.0 {
                    for c in 0..6 {
                        o[c] += m * p[c];
                    }
                }
            }
        }
        out
    }

    /// Values, gradients and Hessians of the 21 physical basis functions
    /// at a point of the triangle.
    pub fn eval_basis(
        &self,
        reference: &ReferenceBasis,
        point: [f64; 2],
    ) -> Result<[Derivs; N_DOFS]> {
        let xh = self.to_reference(point);
        let bary = [1.0 - xh[0] - xh[1], xh[0], xh[1]];
        if bary.iter().any(|&l| !(-1e-12..=1.0 + 1e-12).contains(&l)) {
            return Err(Error::PointOutside {
                x: point[0],
                y: point[1],
                what: "the triangle",
            });
        }
        Ok(self.physical_from_reference(&reference.eval(xh[0], xh[1])))
    }
}

/// Transform for `triangle` of `mesh`, using the mesh-global edge normals.
pub fn build_transform(
    reference: &ReferenceBasis,
    mesh: &Mesh,
    triangle: usize,
) -> Result<ArgyrisTransform> {
    if triangle >= mesh.n_triangles() {
        return Err(Error::OutOfRange {
            what: "triangle",
            index: triangle,
            len: mesh.n_triangles(),
        });
    }
    let edges = mesh.triangle_edges(triangle);
    let mut normals = [[0.0; 2]; 3];
    for (n, &e) in normals.iter_mut().zip(&edges) {
        *n = edge_normal(mesh, e)?;
    }
    ArgyrisTransform::new(reference, mesh.triangle_coords(triangle), normals, triangle)
}
