use std::sync::Arc;

use crate::error::{Error, Result};

use super::geometry::Mesh;

/// Piecewise-linear field given by one value per mesh vertex.
#[derive(Debug, Clone)]
pub struct ScalarField {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_vertices() {
            return Err(Error::Dimension(format!(
                "{} values for a mesh with {} vertices",
                values.len(),
                mesh.n_vertices()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite nodal value at vertex {i}")));
        }
        Ok(Self { mesh, values })
    }

    pub fn constant(mesh: Arc<Mesh>, value: f64) -> Self {
        let n = mesh.n_vertices();
        Self {
            mesh,
            values: vec![value; n],
        }
    }

    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        Self::constant(mesh, 0.0)
    }

    /// Nodal interpolation of `f`.
    pub fn interpolate(mesh: Arc<Mesh>, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = mesh.vertices().iter().map(|&x| f(x)).collect();
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.mesh.clone(), values)
    }

    pub fn same_mesh(&self, mesh: &Mesh) -> bool {
        std::ptr::eq(self.mesh.as_ref(), mesh)
            || (self.mesh.n_vertices() == mesh.n_vertices() && *self.mesh == *mesh)
    }

    /// `int_Omega u` with the mesh measure (exact for the P1 interpolant).
    pub fn integral(&self) -> f64 {
        let mut total = 0.0;
        for c in 0..self.mesh.n_cells() {
            let cell = self.mesh.cell_data(c);
            for q in &cell.quad {
                let u: f64 = cell
                    .nodes()
                    .iter()
                    .zip(q.shape.iter())
                    .map(|(&n, &s)| s * self.values[n])
                    .sum();
                total += q.weight * u;
            }
        }
        total
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

pub(crate) fn check_mesh(field: &ScalarField, mesh: &Mesh, what: &str) -> Result<()> {
    if field.same_mesh(mesh) {
        Ok(())
    } else {
        Err(Error::Dimension(format!("{what} is defined on a different mesh")))
    }
}
