//! P1 assembly of mass, stiffness and convection operators.
//!
//! All integrals use the cell quadrature of [`Mesh::cell_data`], which is
//! exact for products of two P1 functions (times `r` in radial mode).

use crate::error::{Error, Result};
use crate::velocity::VectorField;

use super::field::{check_mesh, ScalarField};
use super::geometry::Mesh;
use super::sparse::{SparseMatrix, TripletBuilder};

/// Scalar coefficient of a bilinear form.
#[derive(Debug, Clone, Copy)]
pub enum FormCoefficient<'a> {
    Constant(f64),
    Field(&'a ScalarField),
}

impl FormCoefficient<'_> {
    fn at(&self, nodes: &[usize], shape: &[f64; 3]) -> f64 {
        match self {
            FormCoefficient::Constant(c) => *c,
            FormCoefficient::Field(f) => {
                let v = f.values();
                nodes.iter().zip(shape.iter()).map(|(&n, &s)| s * v[n]).sum()
            }
        }
    }

    fn check(&self, mesh: &Mesh) -> Result<()> {
        match self {
            FormCoefficient::Constant(_) => Ok(()),
            FormCoefficient::Field(f) => check_mesh(f, mesh, "coefficient"),
        }
    }

    /// Warning text when the coefficient is negative somewhere, which
    /// destroys coercivity of the stiffness form.
    pub fn coercivity_warning(&self) -> Option<String> {
        let min = match self {
            FormCoefficient::Constant(c) => *c,
            FormCoefficient::Field(f) => f.values().iter().copied().fold(f64::INFINITY, f64::min),
        };
        (min < 0.0).then(|| format!("negative stiffness coefficient (min {min:e}): loss of coercivity"))
    }
}

/// `M_ij = int c phi_i phi_j`.
pub fn assemble_mass(mesh: &Mesh, coefficient: Option<&ScalarField>) -> Result<SparseMatrix> {
    let coeff = match coefficient {
        Some(f) => FormCoefficient::Field(f),
        None => FormCoefficient::Constant(1.0),
    };
    coeff.check(mesh)?;
    let n = mesh.n_vertices();
    let k = mesh.dim() + 1;
    let mut b = TripletBuilder::with_capacity(n, n, mesh.n_cells() * k * k);
    for c in 0..mesh.n_cells() {
        let cell = mesh.cell_data(c);
        let nodes = cell.nodes();
        let mut local = [[0.0; 3]; 3];
        for q in &cell.quad {
            let w = q.weight * coeff.at(nodes, &q.shape);
            for i in 0..k {
                for j in 0..k {
                    local[i][j] += w * q.shape[i] * q.shape[j];
                }
            }
        }
        for i in 0..k {
            for j in 0..k {
                b.push(nodes[i], nodes[j], local[i][j]);
            }
        }
    }
    Ok(b.build().with_symmetry(true))
}

/// Row sums of the unit-coefficient mass matrix, i.e. `int phi_i`.
pub fn lumped_mass(mesh: &Mesh) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_vertices()];
    for c in 0..mesh.n_cells() {
        let cell = mesh.cell_data(c);
        for q in &cell.quad {
            for (i, &n) in cell.nodes().iter().enumerate() {
                out[n] += q.weight * q.shape[i];
            }
        }
    }
    out
}

/// `K_ij = int c grad phi_i . grad phi_j`.
pub fn assemble_stiffness(mesh: &Mesh, coefficient: FormCoefficient<'_>) -> Result<SparseMatrix> {
    coefficient.check(mesh)?;
    if let Some(w) = coefficient.coercivity_warning() {
        log::warn!("{w}");
    }
    let n = mesh.n_vertices();
    let k = mesh.dim() + 1;
    let mut b = TripletBuilder::with_capacity(n, n, mesh.n_cells() * k * k);
    for c in 0..mesh.n_cells() {
        let cell = mesh.cell_data(c);
        let nodes = cell.nodes();
        let weight: f64 = cell
            .quad
            .iter()
            .map(|q| q.weight * coefficient.at(nodes, &q.shape))
            .sum();
        for i in 0..k {
            for j in 0..k {
                let g = cell.grads[i][0] * cell.grads[j][0] + cell.grads[i][1] * cell.grads[j][1];
                b.push(nodes[i], nodes[j], weight * g);
            }
        }
    }
    Ok(b.build().with_symmetry(true))
}

/// `C_ij = -int phi_j v . grad phi_i`, the weak form of `div(u v)` tested
/// against `phi_i` after integration by parts.
pub fn assemble_convection(mesh: &Mesh, velocity: &VectorField) -> Result<SparseMatrix> {
    if !velocity.same_mesh(mesh) {
        return Err(Error::Dimension("velocity is defined on a different mesh".into()));
    }
    let n = mesh.n_vertices();
    let k = mesh.dim() + 1;
    if velocity.is_zero() {
        return Ok(SparseMatrix::zeros(n, n));
    }
    let mut b = TripletBuilder::with_capacity(n, n, mesh.n_cells() * k * k);
    for c in 0..mesh.n_cells() {
        let cell = mesh.cell_data(c);
        let nodes = cell.nodes();
        let mut local = [[0.0; 3]; 3];
        for q in &cell.quad {
            let v = velocity.eval_in_cell(c, &q.shape);
            for i in 0..k {
                let vg = v[0] * cell.grads[i][0] + v[1] * cell.grads[i][1];
                for j in 0..k {
                    local[i][j] -= q.weight * q.shape[j] * vg;
                }
            }
        }
        for i in 0..k {
            for j in 0..k {
                b.push(nodes[i], nodes[j], local[i][j]);
            }
        }
    }
    Ok(b.build())
}

/// Replace the rows of the `fixed` unknowns by identity rows with the
/// prescribed value and eliminate the matching columns from the remaining
/// rows, so a symmetric operator stays symmetric.
pub fn apply_dirichlet(
    matrix: &SparseMatrix,
    rhs: &[f64],
    fixed: &[bool],
    value: f64,
) -> Result<(SparseMatrix, Vec<f64>)> {
    let n = matrix.nrows();
    if matrix.ncols() != n || rhs.len() != n || fixed.len() != n {
        return Err(Error::Dimension("Dirichlet elimination needs a square system".into()));
    }
    let mut new_rhs = rhs.to_vec();
    let mut b = TripletBuilder::with_capacity(n, n, matrix.nnz());
    for (i, j, v) in matrix.iter() {
        if fixed[i] {
            continue;
        }
        if fixed[j] {
            new_rhs[i] -= v * value;
        } else {
            b.push(i, j, v);
        }
    }
    for i in 0..n {
        if fixed[i] {
            b.push(i, i, 1.0);
            new_rhs[i] = value;
        }
    }
    Ok((b.build().with_symmetry(matrix.is_symmetric()), new_rhs))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::mesh::geometry::{build_disk_mesh, build_radial_mesh};
    use crate::mesh::sparse::solve;

    fn unit_interval(n: usize) -> Arc<Mesh> {
        Arc::new(Mesh::interval(n, 0.0, 1.0, 0).unwrap())
    }

    #[test]
    fn mass_row_sums_give_length_and_radial_area() {
        let m = unit_interval(7);
        let total: f64 = assemble_mass(&m, None).unwrap().row_sums().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);

        let r = build_radial_mesh(64, 0.32).unwrap();
        let total: f64 = assemble_mass(&r, None).unwrap().row_sums().iter().sum();
        assert!((total - 0.0512).abs() < 1e-12);
    }

    #[test]
    fn zero_coefficient_mass_is_zero() {
        let m = unit_interval(5);
        let zero = ScalarField::zeros(m.clone());
        assert_eq!(assemble_mass(&m, Some(&zero)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn mesh_mismatch_is_rejected() {
        let a = unit_interval(5);
        let b = unit_interval(6);
        let f = ScalarField::zeros(b);
        assert!(matches!(assemble_mass(&a, Some(&f)), Err(Error::Dimension(_))));
        assert!(assemble_stiffness(&a, FormCoefficient::Field(&f)).is_err());
    }

    #[test]
    fn stiffness_interior_row_and_kernel() {
        let n = 8;
        let h = 1.0 / n as f64;
        let m = unit_interval(n);
        let k = assemble_stiffness(&m, FormCoefficient::Constant(1.0)).unwrap();
        assert!((k.get(3, 2) + 1.0 / h).abs() < 1e-12);
        assert!((k.get(3, 3) - 2.0 / h).abs() < 1e-12);
        assert!((k.get(3, 4) + 1.0 / h).abs() < 1e-12);
        assert!(k.asymmetry() < 1e-14);
        let kc = k.mul_vec(&vec![3.5; n + 1]);
        assert!(kc.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn negative_coefficient_is_flagged() {
        assert!(FormCoefficient::Constant(-1.0).coercivity_warning().is_some());
        assert!(FormCoefficient::Constant(1.0).coercivity_warning().is_none());
    }

    #[test]
    fn patch_test_on_disk() {
        let m = Arc::new(build_disk_mesh(0.05, 0.32).unwrap());
        let u = ScalarField::interpolate(m.clone(), |x| 2.0 * x[0] - 0.7 * x[1] + 0.3);
        let k = assemble_stiffness(&m, FormCoefficient::Constant(1.0)).unwrap();
        let r = k.mul_vec(u.values());
        for i in 0..m.n_vertices() {
            if !m.is_boundary(i) {
                assert!(r[i].abs() < 1e-10, "interior residual {}", r[i]);
            }
        }
        let mass: f64 = assemble_mass(&m, None).unwrap().row_sums().iter().sum();
        assert!((mass - m.total_measure()).abs() < 1e-14);
    }

    #[test]
    fn convection_with_constant_velocity_matches_hand_assembly() {
        let n = 4;
        let h = 1.0 / n as f64;
        let m = unit_interval(n);
        let v = VectorField::nodal(m.clone(), vec![[2.0, 0.0]; n + 1]).unwrap();
        let c = assemble_convection(&m, &v).unwrap();
        // per cell: C_ij = -v int phi_j phi_i' = -v * (+-1/h) * h/2
        // interior row i: C_{i,i-1} = -v/2, C_ii = 0, C_{i,i+1} = v/2
        assert!((c.get(2, 1) + 1.0).abs() < 1e-14);
        assert!(c.get(2, 2).abs() < 1e-14);
        assert!((c.get(2, 3) - 1.0).abs() < 1e-14);
        assert!((c.get(0, 0) - 1.0).abs() < 1e-14);
        let _ = h;
        let zero = VectorField::zero(m.clone());
        assert_eq!(assemble_convection(&m, &zero).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn dirichlet_examples() {
        let m = unit_interval(1);
        let k = assemble_stiffness(&m, FormCoefficient::Constant(1.0)).unwrap();
        let (a, b) = apply_dirichlet(&k, &[0.0, 0.0], m.boundary_flags(), 1.0).unwrap();
        assert_eq!(solve(&a, &b).unwrap(), vec![1.0, 1.0]);

        let d = Arc::new(build_disk_mesh(0.04, 0.32).unwrap());
        let k = assemble_stiffness(&d, FormCoefficient::Constant(1.0)).unwrap();
        let rhs = vec![0.0; d.n_vertices()];
        let (a, b) = apply_dirichlet(&k, &rhs, d.boundary_flags(), 1.0).unwrap();
        assert!(a.asymmetry() < 1e-12);
        let u = solve(&a, &b).unwrap();
        for (i, &ui) in u.iter().enumerate() {
            if d.is_boundary(i) {
                assert_eq!(ui, 1.0);
            }
            assert!((ui - 1.0).abs() < 1e-12);
        }
    }
}
