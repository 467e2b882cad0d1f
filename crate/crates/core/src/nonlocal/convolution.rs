//! Convolutions `(J * phi)(x_i) = int_Omega J(x_i - y) phi(y) dy` evaluated
//! at mesh nodes with the mesh quadrature.
//!
//! On a radial mesh the integral over the angle is done per quadrature
//! shell (see [`Kernel::shell_integral`]), so the 1D field is convolved as
//! the radially symmetric 2D (or 3D) function it represents. Integration
//! stops at the domain boundary; there is no padding or wrap-around.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{check_mesh, Mesh, ScalarField, SparseMatrix};
use crate::model::{DoubleWellPotential, ParameterVector};

use super::kernel::Kernel;

/// Checks that the kernel lives in the mesh's physical dimension and that
/// its support fits the domain.
pub fn check_kernel(kernel: &Kernel, mesh: &Mesh) -> Result<()> {
    let dim = physical_dim(mesh);
    if kernel.dim() != dim {
        return Err(Error::Config(format!(
            "kernel dimension {} does not match the {dim}D domain",
            kernel.dim()
        )));
    }
    let extent = if mesh.is_radial() {
        2.0 * mesh.radius()
    } else {
        mesh.diameter()
    };
    let rs = kernel.support_radius();
    if !rs.is_finite() || rs > extent {
        return Err(Error::Config(format!(
            "kernel support radius {rs} exceeds the domain diameter {extent}"
        )));
    }
    Ok(())
}

fn physical_dim(mesh: &Mesh) -> usize {
    if mesh.dim() == 2 {
        2
    } else {
        mesh.measure_exponent() as usize + 1
    }
}

/// Kernel weight between a node at `x` and a quadrature point at `y`.
#[inline]
fn weight(kernel: &Kernel, radial: bool, x: [f64; 2], y: [f64; 2]) -> f64 {
    if radial {
        kernel.shell_integral(x[0], y[0])
    } else {
        kernel.profile((x[0] - y[0]).hypot(x[1] - y[1]))
    }
}

/// Row of the convolution operator at point `x`, restricted to `cells`
/// (ascending), accumulated into `row` indexed by vertex.
fn accumulate_row(
    kernel: &Kernel,
    mesh: &Mesh,
    x: [f64; 2],
    cells: impl Iterator<Item = usize>,
    row: &mut Vec<(usize, f64)>,
) {
    let radial = mesh.is_radial();
    for c in cells {
        let cell = mesh.cell_data(c);
        for q in &cell.quad {
            let j = weight(kernel, radial, x, q.x);
            if j == 0.0 {
                continue;
            }
            for (l, &n) in cell.nodes().iter().enumerate() {
                row.push((n, q.weight * j * q.shape[l]));
            }
        }
    }
    // merge repeated columns so wide kernels on fine meshes stay in memory
    row.sort_by_key(|&(n, _)| n);
    row.dedup_by(|next, kept| {
        let same = next.0 == kept.0;
        if same {
            kept.1 += next.1;
        }
        same
    });
    row.shrink_to_fit();
}

/// Uniform bucket grid over cell bounding boxes.
struct CellBuckets {
    origin: [f64; 2],
    size: f64,
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl CellBuckets {
    fn new(mesh: &Mesh, size: f64) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in mesh.vertices() {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let dims = [
            (((hi[0] - lo[0]) / size).floor() as usize + 1).max(1),
            (((hi[1] - lo[1]) / size).floor() as usize + 1).max(1),
        ];
        let mut buckets = vec![Vec::new(); dims[0] * dims[1]];
        let grid = Self {
            origin: lo,
            size,
            dims,
            buckets: Vec::new(),
        };
        for c in 0..mesh.n_cells() {
            let (mut clo, mut chi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for &v in mesh.cell(c) {
                let p = mesh.vertex(v);
                for k in 0..2 {
                    clo[k] = clo[k].min(p[k]);
                    chi[k] = chi[k].max(p[k]);
                }
            }
            let (a, b) = (grid.index(clo), grid.index(chi));
            for i in a[0]..=b[0] {
                for j in a[1]..=b[1] {
                    buckets[i * dims[1] + j].push(c);
                }
            }
        }
        Self { buckets, ..grid }
    }

    fn index(&self, p: [f64; 2]) -> [usize; 2] {
        let mut out = [0; 2];
        for k in 0..2 {
            let i = ((p[k] - self.origin[k]) / self.size).floor();
            out[k] = (i.max(0.0) as usize).min(self.dims[k] - 1);
        }
        out
    }

    /// Cells whose bounding box may come within `size` of `p`, ascending.
    fn near(&self, p: [f64; 2]) -> Vec<usize> {
        let i = self.index(p);
        let mut out = Vec::new();
        for a in i[0].saturating_sub(1)..=(i[0] + 1).min(self.dims[0] - 1) {
            for b in i[1].saturating_sub(1)..=(i[1] + 1).min(self.dims[1] - 1) {
                out.extend_from_slice(&self.buckets[a * self.dims[1] + b]);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Precomputed nodal convolution operator `W` with `(J * phi)_i = (W phi)_i`.
#[derive(Debug, Clone)]
pub struct ConvolutionOperator {
    mesh: Arc<Mesh>,
    kernel: Kernel,
    matrix: SparseMatrix,
    ones: Vec<f64>,
}

impl ConvolutionOperator {
    /// Builds the operator using a bucket grid to skip far cells.
    pub fn new(kernel: Kernel, mesh: Arc<Mesh>) -> Result<Self> {
        check_kernel(&kernel, &mesh)?;
        let buckets = CellBuckets::new(&mesh, kernel.support_radius());
        let rows: Vec<Vec<(usize, f64)>> = (0..mesh.n_vertices())
            .into_par_iter()
            .map(|i| {
                let x = mesh.vertex(i);
                let mut row = Vec::new();
                accumulate_row(&kernel, &mesh, x, buckets.near(x).into_iter(), &mut row);
                row
            })
            .collect();
        Ok(Self::from_rows(kernel, mesh, rows))
    }

    /// Reference construction by direct summation over all cells.
    pub fn direct(kernel: Kernel, mesh: Arc<Mesh>) -> Result<Self> {
        check_kernel(&kernel, &mesh)?;
        let rows: Vec<Vec<(usize, f64)>> = (0..mesh.n_vertices())
            .into_par_iter()
            .map(|i| {
                let mut row = Vec::new();
                accumulate_row(&kernel, &mesh, mesh.vertex(i), 0..mesh.n_cells(), &mut row);
                row
            })
            .collect();
        Ok(Self::from_rows(kernel, mesh, rows))
    }

    fn from_rows(kernel: Kernel, mesh: Arc<Mesh>, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let matrix = SparseMatrix::from_sorted_rows(mesh.n_vertices(), rows);
        let ones = matrix.row_sums();
        Self {
            mesh,
            kernel,
            matrix,
            ones,
        }
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// Nodal values of `J * 1`.
    pub fn ones(&self) -> &[f64] {
        &self.ones
    }

    pub fn apply_values(&self, values: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(values)
    }

    pub fn apply(&self, field: &ScalarField) -> Result<ScalarField> {
        check_mesh(field, &self.mesh, "field")?;
        ScalarField::new(self.mesh.clone(), self.apply_values(field.values()))
    }

    /// `phi (J*1) - J*phi` at the nodes.
    pub fn interaction(&self, field: &ScalarField) -> Result<Vec<f64>> {
        check_mesh(field, &self.mesh, "field")?;
        let conv = self.apply_values(field.values());
        Ok(field
            .values()
            .iter()
            .zip(&self.ones)
            .zip(&conv)
            .map(|((p, o), c)| p * o - c)
            .collect())
    }
}

/// `J * phi` at the mesh nodes.
pub fn convolve(kernel: &Kernel, field: &ScalarField) -> Result<ScalarField> {
    ConvolutionOperator::new(*kernel, field.mesh().clone())?.apply(field)
}

/// `(J * phi)(x)` at an arbitrary point by summation over every cell.
pub fn convolve_at(kernel: &Kernel, field: &ScalarField, x: [f64; 2]) -> Result<f64> {
    let mesh = field.mesh();
    check_kernel(kernel, mesh)?;
    let mut row = Vec::new();
    accumulate_row(kernel, mesh, x, 0..mesh.n_cells(), &mut row);
    let v = field.values();
    Ok(row.iter().map(|&(j, w)| w * v[j]).sum())
}

/// `mu = Psi'(phi_T) + phi_T (J*1) - J*phi_T - chi_0 phi_sigma` at the nodes.
pub fn nonlocal_mu(
    phi_t: &ScalarField,
    phi_sigma: &ScalarField,
    kernel: &Kernel,
    params: &ParameterVector,
) -> Result<ScalarField> {
    check_mesh(phi_sigma, phi_t.mesh(), "phi_sigma")?;
    let op = ConvolutionOperator::new(*kernel, phi_t.mesh().clone())?;
    nonlocal_mu_with(&op, phi_t, phi_sigma, params)
}

/// [`nonlocal_mu`] with a precomputed operator.
pub fn nonlocal_mu_with(
    op: &ConvolutionOperator,
    phi_t: &ScalarField,
    phi_sigma: &ScalarField,
    params: &ParameterVector,
) -> Result<ScalarField> {
    check_mesh(phi_sigma, phi_t.mesh(), "phi_sigma")?;
    let psi = DoubleWellPotential::new(params.e_bar);
    let inter = op.interaction(phi_t)?;
    let values = phi_t
        .values()
        .iter()
        .zip(phi_sigma.values())
        .zip(&inter)
        .map(|((&p, &s), &i)| psi.first_derivative(p) + i - params.chi_0 * s)
        .collect();
    phi_t.with_values(values)
}
