use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

use super::space::BdmSpace;

/// Velocity field on a mesh.
#[derive(Debug, Clone)]
pub enum VectorField {
    /// Identically zero (used in 1D radial runs and model variant I).
    Zero(Arc<Mesh>),
    /// Nodal P1 profile, one vector per vertex.
    Nodal(Arc<Mesh>, Vec<[f64; 2]>),
    /// Div-conforming field given by its BDM1 degrees of freedom.
    Bdm(Arc<BdmSpace>, Vec<f64>),
}

impl VectorField {
    pub fn zero(mesh: Arc<Mesh>) -> Self {
        VectorField::Zero(mesh)
    }

    pub fn nodal(mesh: Arc<Mesh>, values: Vec<[f64; 2]>) -> Result<Self> {
        if values.len() != mesh.n_vertices() {
            return Err(Error::Dimension(format!(
                "{} nodal vectors for {} vertices",
                values.len(),
                mesh.n_vertices()
            )));
        }
        Ok(VectorField::Nodal(mesh, values))
    }

    pub fn bdm(space: Arc<BdmSpace>, dofs: Vec<f64>) -> Result<Self> {
        if dofs.len() != space.n_dofs() {
            return Err(Error::Dimension(format!(
                "{} dofs for a BDM space of dimension {}",
                dofs.len(),
                space.n_dofs()
            )));
        }
        if dofs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite velocity dof".into()));
        }
        Ok(VectorField::Bdm(space, dofs))
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        match self {
            VectorField::Zero(m) | VectorField::Nodal(m, _) => m,
            VectorField::Bdm(s, _) => s.mesh(),
        }
    }

    pub fn same_mesh(&self, mesh: &Mesh) -> bool {
        let own = self.mesh();
        std::ptr::eq(own.as_ref(), mesh) || **own == *mesh
    }

    pub fn is_zero(&self) -> bool {
        match self {
            VectorField::Zero(_) => true,
            VectorField::Nodal(_, v) => v.iter().all(|x| x[0] == 0.0 && x[1] == 0.0),
            VectorField::Bdm(_, d) => d.iter().all(|&x| x == 0.0),
        }
    }

    /// Degrees of freedom of a BDM field.
    pub fn dofs(&self) -> Option<&[f64]> {
        match self {
            VectorField::Bdm(_, d) => Some(d),
            _ => None,
        }
    }

    /// Value in cell `c` at local barycentric coordinates.
    pub fn eval_in_cell(&self, c: usize, bary: &[f64; 3]) -> [f64; 2] {
        match self {
            VectorField::Zero(_) => [0.0; 2],
            VectorField::Nodal(m, v) => {
                let mut out = [0.0; 2];
                for (l, &n) in m.cell(c).iter().enumerate() {
                    out[0] += bary[l] * v[n][0];
                    out[1] += bary[l] * v[n][1];
                }
                out
            }
            VectorField::Bdm(s, d) => s.eval(d, c, bary),
        }
    }

    /// Cell-average value.
    pub fn cell_mean(&self, c: usize) -> [f64; 2] {
        let k = self.mesh().dim() + 1;
        let w = 1.0 / k as f64;
        let bary = if k == 2 { [w, w, 0.0] } else { [w, w, w] };
        self.eval_in_cell(c, &bary)
    }

    /// `int |v|^2` with the mesh quadrature.
    pub fn l2_norm_sq(&self) -> f64 {
        if matches!(self, VectorField::Zero(_)) {
            return 0.0;
        }
        let mesh = self.mesh();
        let mut total = 0.0;
        for c in 0..mesh.n_cells() {
            for q in &mesh.cell_data(c).quad {
                let v = self.eval_in_cell(c, &q.shape);
                total += q.weight * (v[0] * v[0] + v[1] * v[1]);
            }
        }
        total
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }
}

/// Piecewise-constant pressure, one value per cell.
#[derive(Debug, Clone)]
pub struct PressureField {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl PressureField {
    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let n = mesh.n_cells();
        Self {
            mesh,
            values: vec![0.0; n],
        }
    }

    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_cells() {
            return Err(Error::Dimension(format!(
                "{} pressure values for {} cells",
                values.len(),
                mesh.n_cells()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Measure-weighted mean.
    pub fn mean(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for c in 0..self.mesh.n_cells() {
            let w: f64 = self.mesh.cell_data(c).quad.iter().map(|q| q.weight).sum();
            num += w * self.values[c];
            den += w;
        }
        num / den
    }

    /// Subtracts the weighted mean.
    pub fn normalize(&mut self) {
        let m = self.mean();
        for v in &mut self.values {
            *v -= m;
        }
    }
}
