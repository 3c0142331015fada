//! Global numbering of the Argyris degrees of freedom.
//!
//! Every vertex carries six consecutive numbers in the order
//! `(u, u_x, u_y, u_xx, u_xy, u_yy)`; every edge carries one number for the
//! normal derivative at its midpoint. Midpoint numbers follow the vertex
//! numbers, horizontal sides first, then vertical, then oblique.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::mesh::{EdgeClass, EdgeTag, Mesh};

pub const VALUE: usize = 0;
pub const DX: usize = 1;
pub const DY: usize = 2;
pub const DXX: usize = 3;
pub const DXY: usize = 4;
pub const DYY: usize = 5;

/// How vertex and midpoint numbers are interleaved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DofOrdering {
    /// One mesh row at a time: the row's vertices, the horizontal sides on
    /// that row's grid line, then the vertical and oblique sides of the strip
    /// above it. Keeps the stiffness matrix banded with width proportional
    /// to one row.
    #[default]
    Strip,
    /// All vertices, then all horizontal, vertical and oblique sides.
    Blocked,
}

/// Which degrees of freedom carry boundary constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// `psi = d psi / dn = 0`.
    Clamped,
    /// Homogeneous Dirichlet data for second-order problems: the boundary
    /// trace (value and tangential derivatives at boundary vertices) is
    /// pinned, midpoint normal derivatives stay free.
    DirichletValue,
    /// Same constrained set as `DirichletValue`, with prescribed values
    /// taken from a lifting function.
    LiftedDirichlet,
    /// No constraints.
    Free,
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryMode::Clamped => "clamped",
            BoundaryMode::DirichletValue => "dirichlet-value",
            BoundaryMode::LiftedDirichlet => "lifted-dirichlet",
            BoundaryMode::Free => "free",
        })
    }
}

impl FromStr for BoundaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "clamped" => Ok(BoundaryMode::Clamped),
            "dirichlet-value" => Ok(BoundaryMode::DirichletValue),
            "lifted-dirichlet" => Ok(BoundaryMode::LiftedDirichlet),
            "free" => Ok(BoundaryMode::Free),
            other => Err(Error::InvalidParameter(format!(
                "unknown boundary mode '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DofMap {
    n_dofs: usize,
    ordering: DofOrdering,
    mode: BoundaryMode,
    /// Number of the value DOF of each vertex; the other five follow it.
    vertex_base: Vec<usize>,
    edge_dof: Vec<usize>,
    constrained: Vec<bool>,
    prescribed: Vec<f64>,
}

fn vertex_constraints(mesh: &Mesh, v: usize, mode: BoundaryMode) -> [bool; 6] {
    let on_x = mesh.on_x_boundary(v);
    let on_y = mesh.on_y_boundary(v);
    let mut c = [false; 6];
    match mode {
        BoundaryMode::Free => {}
        BoundaryMode::Clamped => {
            if on_x {
                for k in [VALUE, DX, DY, DXY, DYY] {
                    c[k] = true;
                }
            }
            if on_y {
                for k in [VALUE, DX, DY, DXY, DXX] {
                    c[k] = true;
                }
            }
        }
        BoundaryMode::DirichletValue | BoundaryMode::LiftedDirichlet => {
            if on_x {
                for k in [VALUE, DY, DYY] {
                    c[k] = true;
                }
            }
            if on_y {
                for k in [VALUE, DX, DXX] {
                    c[k] = true;
                }
            }
        }
    }
    c
}

/// Numbers all degrees of freedom of `mesh` and flags the constrained ones.
pub fn build_dofmap(mesh: &Mesh, mode: BoundaryMode, ordering: DofOrdering) -> DofMap {
    let (nx, ny) = (mesh.nx(), mesh.ny());
    let (n_hor, n_ver, _) = mesh.edge_class_counts();
    let n_dofs = 6 * mesh.n_vertices() + mesh.n_edges();
    let mut vertex_base = vec![0; mesh.n_vertices()];
    let mut edge_dof = vec![0; mesh.n_edges()];

    match ordering {
        DofOrdering::Blocked => {
            for (v, b) in vertex_base.iter_mut().enumerate() {
                *b = 6 * v;
            }
            // mesh edges are already enumerated horizontal, vertical, oblique
            for (e, d) in edge_dof.iter_mut().enumerate() {
                *d = 6 * mesh.n_vertices() + e;
            }
        }
        DofOrdering::Strip => {
            let mut next = 0;
            for j in 0..=ny {
                for i in 0..=nx {
                    vertex_base[j * (nx + 1) + i] = next;
                    next += 6;
                }
                for i in 0..nx {
                    edge_dof[j * nx + i] = next;
                    next += 1;
                }
                if j < ny {
                    for i in 0..=nx {
                        edge_dof[n_hor + j * (nx + 1) + i] = next;
                        next += 1;
                    }
                    for i in 0..nx {
                        edge_dof[n_hor + n_ver + j * nx + i] = next;
                        next += 1;
                    }
                }
            }
            debug_assert_eq!(next, n_dofs);
        }
    }

    let mut constrained = vec![false; n_dofs];
    for v in 0..mesh.n_vertices() {
        let c = vertex_constraints(mesh, v, mode);
        for (k, &flag) in c.iter().enumerate() {
            constrained[vertex_base[v] + k] = flag;
        }
    }
    if mode == BoundaryMode::Clamped {
        for (e, tag) in mesh.tags().edges.iter().enumerate() {
            if *tag == EdgeTag::Boundary {
                constrained[edge_dof[e]] = true;
            }
        }
    }

    DofMap {
        n_dofs,
        ordering,
        mode,
        vertex_base,
        edge_dof,
        constrained,
        prescribed: vec![0.0; n_dofs],
    }
}

impl DofMap {
    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn ordering(&self) -> DofOrdering {
        self.ordering
    }

    pub fn mode(&self) -> BoundaryMode {
        self.mode
    }

    /// Global number of component `component` (see [`VALUE`] .. [`DYY`]) at vertex `v`.
    pub fn vertex_dof(&self, v: usize, component: usize) -> usize {
        debug_assert!(component < 6);
        self.vertex_base[v] + component
    }

    pub fn edge_dof(&self, e: usize) -> usize {
        self.edge_dof[e]
    }

    /// The 21 global numbers of a triangle's local degrees of freedom.
    pub fn element_dofs(&self, mesh: &Mesh, triangle: usize) -> [usize; 21] {
        let verts = mesh.triangles()[triangle];
        let edges = mesh.triangle_edges(triangle);
        let mut out = [0; 21];
        for (a, &v) in verts.iter().enumerate() {
            for c in 0..6 {
                out[6 * a + c] = self.vertex_base[v] + c;
            }
        }
        for (k, &e) in edges.iter().enumerate() {
            out[18 + k] = self.edge_dof[e];
        }
        out
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained[dof]
    }

    pub fn constrained(&self) -> &[bool] {
        &self.constrained
    }

    pub fn n_constrained(&self) -> usize {
        self.constrained.iter().filter(|c| **c).count()
    }

    /// Unconstrained DOF numbers in increasing order.
    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs).filter(|&d| !self.constrained[d]).collect()
    }

    /// Prescribed values (meaningful on constrained DOFs only).
    pub fn prescribed(&self) -> &[f64] {
        &self.prescribed
    }

    /// Copies the constrained entries of `values` into the prescribed data.
    pub fn set_prescribed(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.n_dofs);
        for (d, p) in self.prescribed.iter_mut().enumerate() {
            *p = if self.constrained[d] { values[d] } else { 0.0 };
        }
    }

    /// Class of the mesh edge owning a midpoint DOF, if any.
    pub fn edge_class_of(&self, mesh: &Mesh, dof: usize) -> Option<EdgeClass> {
        self.edge_dof
            .iter()
            .position(|&d| d == dof)
            .map(|e| mesh.edges()[e].class)
    }
}
