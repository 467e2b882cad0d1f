//! Mesh storage, builders and per-cell quadrature.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default domain radius (cm).
pub const DOMAIN_RADIUS: f64 = 0.32;

/// Quadrature point on a cell: physical position, weight (already
/// including the radial measure in 1D radial mode) and the values of the
/// cell's P1 shape functions.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub x: [f64; 2],
    pub weight: f64,
    pub shape: [f64; 3],
}

/// Geometric data of one cell. 1D cells use the first two slots.
#[derive(Debug, Clone, Copy)]
pub struct CellData {
    pub nodes: [usize; 3],
    pub n_nodes: usize,
    /// Constant gradients of the P1 shape functions.
    pub grads: [[f64; 2]; 3],
    /// Plain (unweighted) length or area.
    pub size: f64,
    pub quad: [QuadPoint; 3],
}

impl CellData {
    pub fn nodes(&self) -> &[usize] {
        &self.nodes[..self.n_nodes]
    }
}

/// A 1D interval mesh (Cartesian or radial) or a 2D triangulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<[f64; 2]>,
    cells: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    /// Exponent `e` of the 1D measure `r^e dr` (0 Cartesian, 1 polar,
    /// 2 spherical). Always 0 in 2D.
    measure_exponent: u32,
}

const GAUSS3_POINTS: [f64; 3] = [
    0.5 - 0.387_298_334_620_741_7,
    0.5,
    0.5 + 0.387_298_334_620_741_7,
];
const GAUSS3_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

impl Mesh {
    /// Uniform interval mesh on `[a, b]`. With a positive measure exponent
    /// and `a == 0` the left end is the symmetry axis rather than a
    /// boundary.
    pub fn interval(n_cells: usize, a: f64, b: f64, measure_exponent: u32) -> Result<Self> {
        if n_cells < 1 || !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidMesh(format!(
                "interval mesh needs n_cells >= 1 and a < b (got {n_cells}, [{a}, {b}])"
            )));
        }
        if measure_exponent > 0 && a < 0.0 {
            return Err(Error::InvalidMesh("radial mesh must start at r >= 0".into()));
        }
        let h = (b - a) / n_cells as f64;
        let vertices: Vec<[f64; 2]> = (0..=n_cells)
            .map(|i| {
                let x = if i == n_cells { b } else { a + h * i as f64 };
                [x, 0.0]
            })
            .collect();
        let cells = (0..n_cells).map(|i| [i, i + 1, usize::MAX]).collect();
        let mut boundary = vec![false; n_cells + 1];
        boundary[n_cells] = true;
        boundary[0] = !(measure_exponent > 0 && a == 0.0);
        Ok(Self {
            dim: 1,
            vertices,
            cells,
            boundary,
            measure_exponent,
        })
    }

    /// Assemble a mesh from raw parts. Cells are `[a, b]` in 1D and
    /// `[a, b, c]` in 2D; 2D cells are reoriented counter-clockwise.
    pub fn from_parts(
        dim: usize,
        vertices: Vec<[f64; 2]>,
        cells: Vec<Vec<usize>>,
        boundary: Vec<bool>,
        measure_exponent: u32,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidMesh(format!("unsupported dimension {dim}")));
        }
        if boundary.len() != vertices.len() {
            return Err(Error::InvalidMesh("boundary flag count differs from vertex count".into()));
        }
        let mut out = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != dim + 1 || cell.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("cell {c} has invalid connectivity")));
            }
            if dim == 1 {
                out.push([cell[0], cell[1], usize::MAX]);
            } else {
                let mut tri = [cell[0], cell[1], cell[2]];
                let area = signed_area(&vertices, tri);
                if area.abs() < 1e-300 {
                    return Err(Error::InvalidMesh(format!("cell {c} is degenerate")));
                }
                if area < 0.0 {
                    tri.swap(1, 2);
                }
                out.push(tri);
            }
        }
        Ok(Self {
            dim,
            vertices,
            cells: out,
            boundary,
            measure_exponent: if dim == 1 { measure_exponent } else { 0 },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> [f64; 2] {
        self.vertices[i]
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c][..self.dim + 1]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> + '_ {
        (0..self.n_cells()).map(move |c| self.cell(c))
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary[i]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn measure_exponent(&self) -> u32 {
        self.measure_exponent
    }

    pub fn is_radial(&self) -> bool {
        self.dim == 1 && self.measure_exponent > 0
    }

    /// Largest distance of a vertex from the origin.
    pub fn radius(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| v[0].hypot(v[1]))
            .fold(0.0, f64::max)
    }

    /// Largest distance between any two vertices (bounding-box diagonal).
    pub fn diameter(&self) -> f64 {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (hi[0] - lo[0]).hypot(hi[1] - lo[1])
    }

    #[inline]
    fn radial_weight(&self, r: f64) -> f64 {
        match self.measure_exponent {
            0 => 1.0,
            1 => r,
            e => r.powi(e as i32),
        }
    }

    /// Geometry, shape gradients and quadrature of cell `c`.
    pub fn cell_data(&self, c: usize) -> CellData {
        let nodes = self.cells[c];
        if self.dim == 1 {
            let (x0, x1) = (self.vertices[nodes[0]][0], self.vertices[nodes[1]][0]);
            let h = x1 - x0;
            let mut quad = [QuadPoint {
                x: [0.0; 2],
                weight: 0.0,
                shape: [0.0; 3],
            }; 3];
            for (q, (&s, &w)) in GAUSS3_POINTS.iter().zip(GAUSS3_WEIGHTS.iter()).enumerate() {
                let x = x0 + s * h;
                quad[q] = QuadPoint {
                    x: [x, 0.0],
                    weight: w * h * self.radial_weight(x),
                    shape: [1.0 - s, s, 0.0],
                };
            }
            CellData {
                nodes,
                n_nodes: 2,
                grads: [[-1.0 / h, 0.0], [1.0 / h, 0.0], [0.0, 0.0]],
                size: h,
                quad,
            }
        } else {
            let p = [
                self.vertices[nodes[0]],
                self.vertices[nodes[1]],
                self.vertices[nodes[2]],
            ];
            let area2 = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
                - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
            let area = 0.5 * area2;
            let mut grads = [[0.0; 2]; 3];
            for i in 0..3 {
                let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                grads[i] = [(p[j][1] - p[k][1]) / area2, (p[k][0] - p[j][0]) / area2];
            }
            // edge-midpoint rule, exact for quadratics
            let mut quad = [QuadPoint {
                x: [0.0; 2],
                weight: 0.0,
                shape: [0.0; 3],
            }; 3];
            for q in 0..3 {
                let (a, b) = ((q + 1) % 3, (q + 2) % 3);
                let mut shape = [0.0; 3];
                shape[a] = 0.5;
                shape[b] = 0.5;
                quad[q] = QuadPoint {
                    x: [0.5 * (p[a][0] + p[b][0]), 0.5 * (p[a][1] + p[b][1])],
                    weight: area / 3.0,
                    shape,
                };
            }
            CellData {
                nodes,
                n_nodes: 3,
                grads,
                size: area,
                quad,
            }
        }
    }

    /// Total measure of the domain (`R^(e+1)/(e+1)` in radial mode).
    pub fn total_measure(&self) -> f64 {
        (0..self.n_cells())
            .map(|c| self.cell_data(c).quad.iter().map(|q| q.weight).sum::<f64>())
            .sum()
    }

    /// Longest cell edge.
    pub fn max_edge_length(&self) -> f64 {
        let mut m: f64 = 0.0;
        for c in 0..self.n_cells() {
            let cell = self.cell(c);
            for i in 0..cell.len() {
                for j in i + 1..cell.len() {
                    let (a, b) = (self.vertices[cell[i]], self.vertices[cell[j]]);
                    m = m.max((a[0] - b[0]).hypot(a[1] - b[1]));
                }
            }
        }
        m
    }

    /// Signed area of a 2D cell.
    pub fn cell_area(&self, c: usize) -> f64 {
        signed_area(&self.vertices, self.cells[c])
    }

    pub fn cell_centroid(&self, c: usize) -> [f64; 2] {
        let cell = self.cell(c);
        let n = cell.len() as f64;
        let mut x = [0.0; 2];
        for &v in cell {
            x[0] += self.vertices[v][0] / n;
            x[1] += self.vertices[v][1] / n;
        }
        x
    }
}

fn signed_area(vertices: &[[f64; 2]], tri: [usize; 3]) -> f64 {
    let (a, b, c) = (vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Uniform radial mesh on `[0, R]` with the polar measure `r dr`.
pub fn build_radial_mesh(n_cells: usize, radius: f64) -> Result<Mesh> {
    build_radial_mesh_with_exponent(n_cells, radius, 1)
}

/// Radial mesh with measure `r^e dr`; `e = 2` gives the spherical weight.
pub fn build_radial_mesh_with_exponent(n_cells: usize, radius: f64, exponent: u32) -> Result<Mesh> {
    if n_cells < 2 {
        return Err(Error::InvalidMesh(format!(
            "radial mesh needs at least 2 cells, got {n_cells}"
        )));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidMesh(format!("radius must be positive, got {radius}")));
    }
    Mesh::interval(n_cells, 0.0, radius, exponent)
}

/// Structured triangulation of the disk of radius `R` from concentric
/// rings: ring `j` carries `6j` equally spaced vertices at radius
/// `j R / n_rings`, consecutive rings are stitched by an angular sweep.
pub fn build_disk_mesh(h_target: f64, radius: f64) -> Result<Mesh> {
    if !(h_target > 0.0) || !(radius > 0.0) || h_target >= radius {
        return Err(Error::InvalidMesh(format!(
            "disk mesh needs 0 < h_target < R (got h = {h_target}, R = {radius})"
        )));
    }
    let n_rings = (radius / h_target).ceil() as usize;
    let mut vertices = vec![[0.0, 0.0]];
    let mut ring_start = vec![0usize];
    let mut ring_len = vec![1usize];
    for j in 1..=n_rings {
        let r = if j == n_rings {
            radius
        } else {
            radius * j as f64 / n_rings as f64
        };
        let m = 6 * j;
        ring_start.push(vertices.len());
        ring_len.push(m);
        for k in 0..m {
            let theta = 2.0 * PI * k as f64 / m as f64;
            vertices.push([r * theta.cos(), r * theta.sin()]);
        }
    }
    let mut cells: Vec<Vec<usize>> = Vec::new();
    // innermost fan
    for k in 0..6 {
        cells.push(vec![0, ring_start[1] + k, ring_start[1] + (k + 1) % 6]);
    }
    for j in 1..n_rings {
        let (si, ni) = (ring_start[j], ring_len[j]);
        let (so, no) = (ring_start[j + 1], ring_len[j + 1]);
        let (mut a, mut b) = (0usize, 0usize);
        while a < ni || b < no {
            let next_inner = (a + 1) as f64 / ni as f64;
            let next_outer = (b + 1) as f64 / no as f64;
            let advance_inner = a < ni && (b >= no || next_inner <= next_outer);
            if advance_inner {
                cells.push(vec![si + a % ni, so + b % no, si + (a + 1) % ni]);
                a += 1;
            } else {
                cells.push(vec![si + a % ni, so + b % no, so + (b + 1) % no]);
                b += 1;
            }
        }
    }
    let mut boundary = vec![false; vertices.len()];
    for k in 0..ring_len[n_rings] {
        boundary[ring_start[n_rings] + k] = true;
    }
    let mesh = Mesh::from_parts(2, vertices, cells, boundary, 0)?;
    if mesh.max_edge_length() > 1.5 * h_target {
        return Err(Error::InvalidMesh(format!(
            "cannot meet h_target = {h_target}: longest edge {}",
            mesh.max_edge_length()
        )));
    }
    Ok(mesh)
}
