//! Lowest-order Brezzi-Douglas-Marini space on a triangulation.
//!
//! Each edge carries two degrees of freedom: the normal component of the
//! field at its two endpoints, measured against a global edge normal. The
//! basis function for endpoint `a` of edge `e` in a triangle with opposite
//! vertex `c` is `lambda_a (a - c) / ((a - c) . n_e)`. Its normal component
//! vanishes on the other two edges of the triangle and equals `lambda_a` on
//! `e`, so normal traces are continuous by construction.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// One local basis function: `lambda_{vertex} * dir`.
#[derive(Debug, Clone, Copy)]
pub struct LocalBasis {
    /// Global degree of freedom.
    pub dof: usize,
    /// Local vertex whose barycentric coordinate scales the function.
    pub vertex: usize,
    /// Constant direction vector.
    pub dir: [f64; 2],
}

#[derive(Debug)]
pub struct BdmSpace {
    mesh: Arc<Mesh>,
    edges: Vec<[usize; 2]>,
    normals: Vec<[f64; 2]>,
    edge_cells: Vec<Vec<usize>>,
    cell_basis: Vec<[LocalBasis; 6]>,
}

impl BdmSpace {
    pub fn new(mesh: Arc<Mesh>) -> Result<Self> {
        if mesh.dim() != 2 {
            return Err(Error::Dimension("BDM space needs a 2D mesh".into()));
        }
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_cells: Vec<Vec<usize>> = Vec::new();
        for c in 0..mesh.n_cells() {
            let cell = mesh.cell(c);
            for k in 0..3 {
                let (a, b) = (cell[(k + 1) % 3], cell[(k + 2) % 3]);
                let key = (a.min(b), a.max(b));
                let e = *index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_cells.push(Vec::new());
                    edges.len() - 1
                });
                edge_cells[e].push(c);
            }
        }
        let normals: Vec<[f64; 2]> = edges
            .iter()
            .map(|&[a, b]| {
                let (pa, pb) = (mesh.vertex(a), mesh.vertex(b));
                let t = [pb[0] - pa[0], pb[1] - pa[1]];
                let len = t[0].hypot(t[1]);
                [t[1] / len, -t[0] / len]
            })
            .collect();

        let mut cell_basis = Vec::with_capacity(mesh.n_cells());
        for c in 0..mesh.n_cells() {
            let cell = mesh.cell(c);
            let mut local = [LocalBasis {
                dof: 0,
                vertex: 0,
                dir: [0.0; 2],
            }; 6];
            for k in 0..3 {
                let (la, lb) = ((k + 1) % 3, (k + 2) % 3);
                let (a, b) = (cell[la], cell[lb]);
                let e = index[&(a.min(b), a.max(b))];
                let n = normals[e];
                let pc = mesh.vertex(cell[k]);
                for (slot, lv) in [la, lb].into_iter().enumerate() {
                    let gv = cell[lv];
                    let pv = mesh.vertex(gv);
                    let d = [pv[0] - pc[0], pv[1] - pc[1]];
                    let dn = d[0] * n[0] + d[1] * n[1];
                    let end = usize::from(gv != edges[e][0]);
                    local[2 * k + slot] = LocalBasis {
                        dof: 2 * e + end,
                        vertex: lv,
                        dir: [d[0] / dn, d[1] / dn],
                    };
                }
            }
            cell_basis.push(local);
        }
        Ok(Self {
            mesh,
            edges,
            normals,
            edge_cells,
            cell_basis,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    pub fn normal(&self, e: usize) -> [f64; 2] {
        self.normals[e]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_cells[e].len() == 1
    }

    /// Flags of degrees of freedom on boundary edges.
    pub fn boundary_dofs(&self) -> Vec<bool> {
        (0..self.n_dofs())
            .map(|d| self.is_boundary_edge(d / 2))
            .collect()
    }

    pub fn cell_basis(&self, c: usize) -> &[LocalBasis; 6] {
        &self.cell_basis[c]
    }

    /// Canonical interpolant: normal components of `f` at edge endpoints.
    /// Exact for piecewise-linear fields.
    pub fn interpolate(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        let mut dofs = vec![0.0; self.n_dofs()];
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            let n = self.normals[e];
            for (end, v) in [a, b].into_iter().enumerate() {
                let fv = f(self.mesh.vertex(v));
                dofs[2 * e + end] = fv[0] * n[0] + fv[1] * n[1];
            }
        }
        dofs
    }

    /// Interpolant of a field that is constant on each cell with continuous
    /// normal component; the value on the first neighbouring cell is used.
    pub fn interpolate_cellwise(&self, f: impl Fn(usize) -> [f64; 2]) -> Vec<f64> {
        let mut dofs = vec![0.0; self.n_dofs()];
        for e in 0..self.n_edges() {
            let v = f(self.edge_cells[e][0]);
            let n = self.normals[e];
            let vn = v[0] * n[0] + v[1] * n[1];
            dofs[2 * e] = vn;
            dofs[2 * e + 1] = vn;
        }
        dofs
    }

    /// Value in cell `c` at barycentric coordinates `bary` (local order).
    pub fn eval(&self, dofs: &[f64], c: usize, bary: &[f64; 3]) -> [f64; 2] {
        let mut v = [0.0; 2];
        for b in &self.cell_basis[c] {
            let s = dofs[b.dof] * bary[b.vertex];
            v[0] += s * b.dir[0];
            v[1] += s * b.dir[1];
        }
        v
    }

    /// Constant divergence of the field in cell `c`.
    pub fn cell_divergence(&self, dofs: &[f64], c: usize) -> f64 {
        let grads = self.mesh.cell_data(c).grads;
        self.cell_basis[c]
            .iter()
            .map(|b| dofs[b.dof] * (b.dir[0] * grads[b.vertex][0] + b.dir[1] * grads[b.vertex][1]))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_disk_mesh;

    fn space() -> BdmSpace {
        BdmSpace::new(Arc::new(build_disk_mesh(0.08, 0.32).unwrap())).unwrap()
    }

    #[test]
    fn euler_formula_and_boundary_edges() {
        let s = space();
        let m = s.mesh();
        assert_eq!(m.n_vertices() + m.n_cells(), s.n_edges() + 1);
        let nb = (0..s.n_edges()).filter(|&e| s.is_boundary_edge(e)).count();
        let nbv = (0..m.n_vertices()).filter(|&v| m.is_boundary(v)).count();
        assert_eq!(nb, nbv);
    }

    #[test]
    fn linear_fields_are_reproduced() {
        let s = space();
        let f = |x: [f64; 2]| [1.0 + 2.0 * x[0] - x[1], -0.5 + 0.3 * x[0] + 4.0 * x[1]];
        let dofs = s.interpolate(f);
        for c in 0..s.mesh().n_cells() {
            let cell = s.mesh().cell_data(c);
            for q in &cell.quad {
                let v = s.eval(&dofs, c, &q.shape);
                let exact = f(q.x);
                assert!((v[0] - exact[0]).abs() < 1e-12 && (v[1] - exact[1]).abs() < 1e-12);
            }
            assert!((s.cell_divergence(&dofs, c) - 6.0).abs() < 1e-10);
        }
    }

    #[test]
    fn normal_component_is_continuous() {
        let s = space();
        let dofs: Vec<f64> = (0..s.n_dofs()).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let m = s.mesh().clone();
        for e in 0..s.n_edges() {
            if s.is_boundary_edge(e) {
                continue;
            }
            let [a, b] = s.edge(e);
            let n = s.normal(e);
            let mut traces = Vec::new();
            for &c in &s.edge_cells[e] {
                let cell = m.cell(c);
                let mut bary = [0.0; 3];
                for (l, &v) in cell.iter().enumerate() {
                    if v == a {
                        bary[l] += 0.3;
                    }
                    if v == b {
                        bary[l] += 0.7;
                    }
                }
                let v = s.eval(&dofs, c, &bary);
                traces.push(v[0] * n[0] + v[1] * n[1]);
            }
            assert!((traces[0] - traces[1]).abs() < 1e-9);
            assert!((traces[0] - (0.3 * dofs[2 * e] + 0.7 * dofs[2 * e + 1])).abs() < 1e-9);
        }
    }
}
