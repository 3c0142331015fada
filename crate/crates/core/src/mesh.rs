//! Structured triangulations of axis-aligned rectangles.
//!
//! The rectangle `[0, Lx] x [0, Ly]` is divided into square cells of side
//! `h`, and each cell is split by the diagonal running from its lower-left
//! to its upper-right corner:
//!
//! ```text
//!   d ------ c
//!   |      / |
//!   | up  /  |
//!   |    /   |
//!   |   / lo |
//!   a ------ b
//! ```
//!
//! Vertices are enumerated row-major (x fastest). Edges are enumerated by
//! class: all horizontal edges (line by line), then all vertical edges
//! (strip by strip), then all oblique diagonals (strip by strip).

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Relative tolerance used when checking that `h` divides the extents.
const DIVISIBILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeClass {
    Horizontal,
    Vertical,
    Oblique,
}

impl fmt::Display for EdgeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EdgeClass::Horizontal => "horizontal",
            EdgeClass::Vertical => "vertical",
            EdgeClass::Oblique => "oblique",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexTag {
    Interior,
    EdgeX0,
    EdgeX1,
    EdgeY0,
    EdgeY1,
    Corner,
}

impl fmt::Display for VertexTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VertexTag::Interior => "interior",
            VertexTag::EdgeX0 => "edge-x0",
            VertexTag::EdgeX1 => "edge-x1",
            VertexTag::EdgeY0 => "edge-y0",
            VertexTag::EdgeY1 => "edge-y1",
            VertexTag::Corner => "corner",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeTag {
    Interior,
    Boundary,
}

impl fmt::Display for EdgeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeTag::Interior => f.write_str("interior"),
            EdgeTag::Boundary => f.write_str("boundary"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Endpoints, lower global index first.
    pub vertices: [usize; 2],
    pub class: EdgeClass,
    pub midpoint: [f64; 2],
}

/// Boundary classification of every vertex and edge.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTags {
    pub vertices: Vec<VertexTag>,
    pub edges: Vec<EdgeTag>,
}

/// Structured right-isosceles triangulation of a rectangle.
#[derive(Debug, Clone)]
pub struct Mesh {
    lx: f64,
    ly: f64,
    h: f64,
    nx: usize,
    ny: usize,
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    /// Local edge `k` of a triangle joins its local vertices `k` and `(k+1) % 3`.
    triangle_edges: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    tags: BoundaryTags,
}

fn cell_count(extent: f64, h: f64) -> Result<usize> {
    if !(extent > 0.0 && h > 0.0 && extent.is_finite() && h.is_finite()) {
        return Err(Error::InvalidMesh(format!(
            "extent {extent} and leg {h} must be positive and finite"
        )));
    }
    let ratio = extent / h;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > DIVISIBILITY_TOL * ratio.max(1.0) {
        return Err(Error::NonDivisibleMesh { extent, h });
    }
    Ok(n as usize)
}

/// Builds the structured mesh of `[0, lx] x [0, ly]` with leg `h`.
pub fn build_structured_mesh(lx: f64, ly: f64, h: f64) -> Result<Mesh> {
    let nx = cell_count(lx, h)?;
    let ny = cell_count(ly, h)?;
    let vid = |i: usize, j: usize| j * (nx + 1) + i;

    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            // snap the last row/column exactly onto the boundary
            let x = if i == nx { lx } else { i as f64 * h };
            let y = if j == ny { ly } else { j as f64 * h };
            vertices.push([x, y]);
        }
    }

    let n_hor = nx * (ny + 1);
    let n_ver = (nx + 1) * ny;
    let hor = |i: usize, j: usize| j * nx + i;
    let ver = |i: usize, j: usize| n_hor + j * (nx + 1) + i;
    let obl = |i: usize, j: usize| n_hor + n_ver + j * nx + i;

    let mut edges = Vec::with_capacity(n_hor + n_ver + nx * ny);
    let mid = |a: usize, b: usize, vs: &[[f64; 2]]| {
        [0.5 * (vs[a][0] + vs[b][0]), 0.5 * (vs[a][1] + vs[b][1])]
    };
    for j in 0..=ny {
        for i in 0..nx {
            let (a, b) = (vid(i, j), vid(i + 1, j));
            edges.push(Edge {
                vertices: [a, b],
                class: EdgeClass::Horizontal,
                midpoint: mid(a, b, &vertices),
            });
        }
    }
    for j in 0..ny {
        for i in 0..=nx {
            let (a, b) = (vid(i, j), vid(i, j + 1));
            edges.push(Edge {
                vertices: [a, b],
                class: EdgeClass::Vertical,
                midpoint: mid(a, b, &vertices),
            });
        }
    }
    for j in 0..ny {
        for i in 0..nx {
            let (a, b) = (vid(i, j), vid(i + 1, j + 1));
            edges.push(Edge {
                vertices: [a, b],
                class: EdgeClass::Oblique,
                midpoint: mid(a, b, &vertices),
            });
        }
    }

    let mut triangles = Vec::with_capacity(2 * nx * ny);
    let mut triangle_edges = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let a = vid(i, j);
            let b = vid(i + 1, j);
            let c = vid(i + 1, j + 1);
            let d = vid(i, j + 1);
            // lower: a-b (horizontal), b-c (vertical), c-a (oblique)
            triangles.push([a, b, c]);
            triangle_edges.push([hor(i, j), ver(i + 1, j), obl(i, j)]);
            // upper: a-c (oblique), c-d (horizontal), d-a (vertical)
            triangles.push([a, c, d]);
            triangle_edges.push([obl(i, j), hor(i, j + 1), ver(i, j)]);
        }
    }

    let mut mesh = Mesh {
        lx,
        ly,
        h,
        nx,
        ny,
        vertices,
        triangles,
        triangle_edges,
        edges,
        tags: BoundaryTags {
            vertices: Vec::new(),
            edges: Vec::new(),
        },
    };
    mesh.tags = classify_boundary(&mesh);
    Ok(mesh)
}

/// Tags vertices by the boundary lines they touch and edges lying on one.
pub fn classify_boundary(mesh: &Mesh) -> BoundaryTags {
    let (nx, ny) = (mesh.nx, mesh.ny);
    let vertices = (0..mesh.vertices.len())
        .map(|v| {
            let (i, j) = (v % (nx + 1), v / (nx + 1));
            let on_x = i == 0 || i == nx;
            let on_y = j == 0 || j == ny;
            match (on_x, on_y) {
                (true, true) => VertexTag::Corner,
                (true, false) if i == 0 => VertexTag::EdgeX0,
                (true, false) => VertexTag::EdgeX1,
                (false, true) if j == 0 => VertexTag::EdgeY0,
                (false, true) => VertexTag::EdgeY1,
                (false, false) => VertexTag::Interior,
            }
        })
        .collect();
    let edges = mesh
        .edges
        .iter()
        .map(|e| {
            let [a, b] = e.vertices;
            let (ia, ja) = (a % (nx + 1), a / (nx + 1));
            let (ib, jb) = (b % (nx + 1), b / (nx + 1));
            let same_x_line = ia == ib && (ia == 0 || ia == nx);
            let same_y_line = ja == jb && (ja == 0 || ja == ny);
            if same_x_line || same_y_line {
                EdgeTag::Boundary
            } else {
                EdgeTag::Interior
            }
        })
        .collect();
    BoundaryTags { vertices, edges }
}

/// Unit normal of `edge`: the tangent from the lower- to the higher-indexed
/// endpoint, rotated by -90 degrees.
pub fn edge_normal(mesh: &Mesh, edge: usize) -> Result<[f64; 2]> {
    let e = mesh.edges.get(edge).ok_or(Error::OutOfRange {
        what: "edge",
        index: edge,
        len: mesh.edges.len(),
    })?;
    let t = edge_tangent_of(mesh, e);
    Ok([t[1], -t[0]])
}

fn edge_tangent_of(mesh: &Mesh, e: &Edge) -> [f64; 2] {
    let [a, b] = e.vertices;
    let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
    let d = [pb[0] - pa[0], pb[1] - pa[1]];
    let len = d[0].hypot(d[1]);
    [d[0] / len, d[1] / len]
}

impl Mesh {
    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Cells along x.
    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Cells along y.
    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn triangle_edges(&self, triangle: usize) -> [usize; 3] {
        self.triangle_edges[triangle]
    }

    pub fn tags(&self) -> &BoundaryTags {
        &self.tags
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Counts of (horizontal, vertical, oblique) edges.
    pub fn edge_class_counts(&self) -> (usize, usize, usize) {
        (
            self.nx * (self.ny + 1),
            (self.nx + 1) * self.ny,
            self.nx * self.ny,
        )
    }

    /// Row/column grid index `(i, j)` of a vertex.
    pub fn vertex_grid_index(&self, v: usize) -> (usize, usize) {
        (v % (self.nx + 1), v / (self.nx + 1))
    }

    /// `true` if the vertex lies on `x = 0` or `x = Lx`.
    pub fn on_x_boundary(&self, v: usize) -> bool {
        let (i, _) = self.vertex_grid_index(v);
        i == 0 || i == self.nx
    }

    /// `true` if the vertex lies on `y = 0` or `y = Ly`.
    pub fn on_y_boundary(&self, v: usize) -> bool {
        let (_, j) = self.vertex_grid_index(v);
        j == 0 || j == self.ny
    }

    pub fn edge_tangent(&self, edge: usize) -> [f64; 2] {
        edge_tangent_of(self, &self.edges[edge])
    }

    /// Vertex coordinates of a triangle.
    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [p0, p1, p2] = self.triangle_coords(t);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    /// Triangle containing `(x, y)`, resolved by cell-index arithmetic.
    /// Points on shared edges go to the lower-indexed candidate cell.
    pub fn locate(&self, x: f64, y: f64) -> Result<usize> {
        let tol = 1e-12 * self.lx.max(self.ly);
        if !(x >= -tol && x <= self.lx + tol && y >= -tol && y <= self.ly + tol) {
            return Err(Error::PointOutside {
                x,
                y,
                what: "the mesh domain",
            });
        }
        let i = ((x / self.h).floor().max(0.0) as usize).min(self.nx - 1);
        let j = ((y / self.h).floor().max(0.0) as usize).min(self.ny - 1);
        let s = x - i as f64 * self.h;
        let t = y - j as f64 * self.h;
        let cell = j * self.nx + i;
        Ok(if t <= s { 2 * cell } else { 2 * cell + 1 })
    }

    /// Writes `vertices.csv`, `triangles.csv` and `edges.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(File::create(dir.join("vertices.csv"))?);
        writeln!(w, "id,x,y")?;
        for (id, p) in self.vertices.iter().enumerate() {
            writeln!(w, "{id},{:.6e},{:.6e}", p[0], p[1])?;
        }
        w.flush()?;
        let mut w = BufWriter::new(File::create(dir.join("triangles.csv"))?);
        writeln!(w, "id,v0,v1,v2")?;
        for (id, t) in self.triangles.iter().enumerate() {
            writeln!(w, "{id},{},{},{}", t[0], t[1], t[2])?;
        }
        w.flush()?;
        let mut w = BufWriter::new(File::create(dir.join("edges.csv"))?);
        writeln!(w, "id,v0,v1,class,tag")?;
        for (id, e) in self.edges.iter().enumerate() {
            writeln!(
                w,
                "{id},{},{},{},{}",
                e.vertices[0], e.vertices[1], e.class, self.tags.edges[id]
            )?;
        }
        w.flush()?;
        Ok(())
    }
}
