//! Unsteady Darcy-Forchheimer-Brinkman step in BDM1 x DG0.
//!
//! With `s = |v^(m)|` lagged, each Picard pass solves
//!
//! ```text
//! [ A  -B^T ] [ v ]   [ M v_n + dt (S_v, w) ]
//! [ -B   0  ] [ q ] = [ 0                   ]
//! ```
//!
//! where `A = (1 + dt alpha + dt F1 s + dt F2 s^2) M + dt nu K`, `K` the
//! cellwise (broken) gradient form, `B` the cellwise divergence and
//! `q = dt p`. The pressure of cell 0 is pinned, its constraint row is
//! implied by the others because boundary normal components vanish.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{ScalarField, SparseLu, SparseMatrix, TripletBuilder};
use crate::model::{MobilityModel, ParameterVector};

use super::field::{PressureField, VectorField};
use super::space::BdmSpace;

/// Picard controls for the lagged Forchheimer terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardSettings {
    /// Absolute tolerance on the max-norm of the dof increment.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 50,
        }
    }
}

/// Coefficient fields of one velocity solve (Gauss-Seidel iterates).
#[derive(Debug, Clone, Copy)]
pub struct DfbCoefficients<'a> {
    pub phi_t: &'a ScalarField,
    pub mu: &'a ScalarField,
    pub phi_sigma: &'a ScalarField,
}

#[derive(Debug, Clone)]
pub struct DfbSolution {
    pub velocity: VectorField,
    pub pressure: PressureField,
    pub picard_iterations: usize,
}

/// Reusable solver: keeps the dof numbering and the LU symbolic analysis.
pub struct DfbSolver {
    space: Arc<BdmSpace>,
    /// Global dof -> unknown index (boundary dofs are removed).
    unknown: Vec<Option<usize>>,
    n_velocity: usize,
    lu: Option<SparseLu>,
}

impl DfbSolver {
    pub fn new(space: Arc<BdmSpace>) -> Self {
        let boundary = space.boundary_dofs();
        let mut unknown = vec![None; space.n_dofs()];
        let mut n = 0;
        for (d, &b) in boundary.iter().enumerate() {
            if !b {
                unknown[d] = Some(n);
                n += 1;
            }
        }
        Self {
            space,
            unknown,
            n_velocity: n,
            lu: None,
        }
    }

    pub fn space(&self) -> &Arc<BdmSpace> {
        &self.space
    }

    fn n_pressure(&self) -> usize {
        self.space.mesh().n_cells() - 1
    }

    /// `(S_v, w_i)` with `S_v = (mu + chi_0 phi_sigma) grad phi_T`, indexed by
    /// global dof.
    pub fn load_vector(&self, coeffs: DfbCoefficients<'_>, chi_0: f64) -> Result<Vec<f64>> {
        let mesh = self.space.mesh();
        for (f, what) in [(coeffs.phi_t, "phi_T"), (coeffs.mu, "mu"), (coeffs.phi_sigma, "phi_sigma")] {
            if !f.same_mesh(mesh) {
                return Err(Error::Dimension(format!("{what} is defined on a different mesh")));
            }
        }
        let (pt, mu, ps) = (coeffs.phi_t.values(), coeffs.mu.values(), coeffs.phi_sigma.values());
        let mut load = vec![0.0; self.space.n_dofs()];
        for c in 0..mesh.n_cells() {
            let cell = mesh.cell_data(c);
            let nodes = cell.nodes();
            let mut grad = [0.0; 2];
            for (l, &n) in nodes.iter().enumerate() {
                grad[0] += pt[n] * cell.grads[l][0];
                grad[1] += pt[n] * cell.grads[l][1];
            }
            for q in &cell.quad {
                let s: f64 = nodes
                    .iter()
                    .enumerate()
                    .map(|(l, &n)| q.shape[l] * (mu[n] + chi_0 * ps[n]))
                    .sum();
                let f = [s * grad[0], s * grad[1]];
                for b in self.space.cell_basis(c) {
                    let phi = q.shape[b.vertex];
                    load[b.dof] += q.weight * phi * (f[0] * b.dir[0] + f[1] * b.dir[1]);
                }
            }
        }
        Ok(load)
    }

    /// The saddle matrix for a lagged velocity `lag` (global dofs) and
    /// per-cell viscosity.
    pub fn saddle_matrix(
        &self,
        params: &ParameterVector,
        viscosity: &[f64],
        lag: &[f64],
        dt: f64,
    ) -> SparseMatrix {
        let mesh = self.space.mesh();
        let n = self.n_velocity + self.n_pressure();
        let mut b = TripletBuilder::with_capacity(n, n, mesh.n_cells() * 48);
        for c in 0..mesh.n_cells() {
            let cell = mesh.cell_data(c);
            let basis = self.space.cell_basis(c);
            let mut local = [[0.0; 6]; 6];
            for q in &cell.quad {
                let v = self.space.eval(lag, c, &q.shape);
                let s = v[0].hypot(v[1]);
                let react = 1.0 + dt * (params.alpha + params.f1 * s + params.f2 * s * s);
                for i in 0..6 {
                    let pi = q.shape[basis[i].vertex];
                    for j in 0..6 {
                        let pj = q.shape[basis[j].vertex];
                        let dd = basis[i].dir[0] * basis[j].dir[0] + basis[i].dir[1] * basis[j].dir[1];
                        local[i][j] += q.weight * react * pi * pj * dd;
                    }
                }
            }
            let visc = dt * viscosity[c] * cell.size;
            for i in 0..6 {
                let gi = cell.grads[basis[i].vertex];
                for j in 0..6 {
                    let gj = cell.grads[basis[j].vertex];
                    let dd = basis[i].dir[0] * basis[j].dir[0] + basis[i].dir[1] * basis[j].dir[1];
                    local[i][j] += visc * dd * (gi[0] * gj[0] + gi[1] * gj[1]);
                }
            }
            for i in 0..6 {
                let Some(ui) = self.unknown[basis[i].dof] else { continue };
                for j in 0..6 {
                    if let Some(uj) = self.unknown[basis[j].dof] {
                        b.push(ui, uj, local[i][j]);
                    }
                }
                if c > 0 {
                    let gi = cell.grads[basis[i].vertex];
                    let div = cell.size * (basis[i].dir[0] * gi[0] + basis[i].dir[1] * gi[1]);
                    let pc = self.n_velocity + c - 1;
                    b.push(ui, pc, -div);
                    b.push(pc, ui, -div);
                }
            }
        }
        b.build().with_symmetry(true)
    }

    /// Per-cell viscosity from the current tumor and nutrient iterates.
    fn cell_viscosity(&self, mobility: &MobilityModel, coeffs: DfbCoefficients<'_>) -> Vec<f64> {
        let mesh = self.space.mesh();
        if let Some(nu) = mobility.viscosity.as_constant() {
            return vec![nu; mesh.n_cells()];
        }
        let (pt, ps) = (coeffs.phi_t.values(), coeffs.phi_sigma.values());
        (0..mesh.n_cells())
            .map(|c| {
                let nodes = mesh.cell(c);
                let k = nodes.len() as f64;
                let a = nodes.iter().map(|&n| pt[n]).sum::<f64>() / k;
                let s = nodes.iter().map(|&n| ps[n]).sum::<f64>() / k;
                mobility.viscosity(a, s)
            })
            .collect()
    }

    /// One implicit step with the source built from `coeffs`.
    pub fn solve(
        &mut self,
        v_prev: &VectorField,
        coeffs: DfbCoefficients<'_>,
        params: &ParameterVector,
        mobility: &MobilityModel,
        dt: f64,
        settings: PicardSettings,
    ) -> Result<DfbSolution> {
        let load = self.load_vector(coeffs, params.chi_0)?;
        let viscosity = self.cell_viscosity(mobility, coeffs);
        self.solve_with_load(v_prev, &load, &viscosity, params, dt, settings)
    }

    /// One implicit step with an explicit load vector (global dofs).
    pub fn solve_with_load(
        &mut self,
        v_prev: &VectorField,
        load: &[f64],
        viscosity: &[f64],
        params: &ParameterVector,
        dt: f64,
        settings: PicardSettings,
    ) -> Result<DfbSolution> {
        if !(dt > 0.0) {
            return Err(Error::Argument(format!("dt must be positive, got {dt}")));
        }
        let mesh = self.space.mesh().clone();
        if !v_prev.same_mesh(&mesh) {
            return Err(Error::Dimension("previous velocity is defined on a different mesh".into()));
        }
        let n_dofs = self.space.n_dofs();
        let prev = match v_prev {
            VectorField::Bdm(_, d) => d.clone(),
            VectorField::Zero(_) => vec![0.0; n_dofs],
            VectorField::Nodal(_, _) => {
                return Err(Error::Argument("previous velocity must be a BDM field".into()))
            }
        };
        if load.len() != n_dofs || viscosity.len() != mesh.n_cells() {
            return Err(Error::Dimension("load or viscosity has the wrong length".into()));
        }

        // M v_n is assembled once; it does not depend on the Picard lag.
        let mut rhs_global = vec![0.0; n_dofs];
        for c in 0..mesh.n_cells() {
            let cell = mesh.cell_data(c);
            for q in &cell.quad {
                let v = self.space.eval(&prev, c, &q.shape);
                for b in self.space.cell_basis(c) {
                    let phi = q.shape[b.vertex];
                    rhs_global[b.dof] += q.weight * phi * (v[0] * b.dir[0] + v[1] * b.dir[1]);
                }
            }
        }
        let n = self.n_velocity + self.n_pressure();
        let mut rhs = vec![0.0; n];
        for (d, u) in self.unknown.iter().enumerate() {
            if let Some(u) = u {
                rhs[*u] = rhs_global[d] + dt * load[d];
            }
        }

        let nonlinear = params.f1 != 0.0 || params.f2 != 0.0;
        let mut lag: Vec<f64> = prev
            .iter()
            .zip(&self.unknown)
            .map(|(&v, u)| if u.is_some() { v } else { 0.0 })
            .collect();
        let mut iterations = 0;
        let mut pressure_unknowns;
        // under-relaxation of the lag, halved whenever the increment stalls
        // (lagging the quadratic drag alone can oscillate); the fixed point
        // is unchanged
        let mut relax: f64 = 1.0;
        let mut last_incr = f64::INFINITY;
        loop {
            iterations += 1;
            let a = self.saddle_matrix(params, viscosity, &lag, dt);
            match &mut self.lu {
                Some(lu) => lu.refactor(&a)?,
                None => self.lu = Some(SparseLu::factor(&a)?),
            }
            let x = self.lu.as_ref().expect("factored").solve(&rhs)?;
            let mut next = vec![0.0; n_dofs];
            for (d, u) in self.unknown.iter().enumerate() {
                if let Some(u) = u {
                    next[d] = x[*u];
                }
            }
            pressure_unknowns = x[self.n_velocity..].to_vec();
            let incr = next
                .iter()
                .zip(&lag)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if !nonlinear || incr <= settings.tol {
                lag = next;
                break;
            }
            if incr > 0.7 * last_incr {
                relax = (0.5 * relax).max(1.0 / 16.0);
            }
            last_incr = incr;
            for (l, n) in lag.iter_mut().zip(&next) {
                *l += relax * (n - *l);
            }
            if iterations >= settings.max_iter {
                return Err(Error::NoConvergence {
                    what: "Picard iteration",
                    iterations,
                    residual: incr,
                });
            }
        }

        let mut p = Vec::with_capacity(mesh.n_cells());
        p.push(0.0);
        p.extend(pressure_unknowns.iter().map(|q| q / dt));
        let mut pressure = PressureField::new(mesh, p)?;
        pressure.normalize();
        Ok(DfbSolution {
            velocity: VectorField::bdm(self.space.clone(), lag)?,
            pressure,
            picard_iterations: iterations,
        })
    }
}

/// One-shot velocity solve; see [`DfbSolver::solve`].
pub fn solve_dfb_step(
    space: Arc<BdmSpace>,
    v_prev: &VectorField,
    coeffs: DfbCoefficients<'_>,
    params: &ParameterVector,
    mobility: &MobilityModel,
    dt: f64,
    settings: PicardSettings,
) -> Result<DfbSolution> {
    DfbSolver::new(space).solve(v_prev, coeffs, params, mobility, dt, settings)
}

/// `max_K |int_K div v|`.
pub fn divergence_residual(v: &VectorField) -> f64 {
    match v {
        VectorField::Zero(_) => 0.0,
        VectorField::Bdm(space, dofs) => {
            let mesh = space.mesh();
            (0..mesh.n_cells())
                .map(|c| (space.cell_divergence(dofs, c) * mesh.cell_area(c)).abs())
                .fold(0.0, f64::max)
        }
        VectorField::Nodal(mesh, values) => {
            // 1D: int (r^e v)' dr / r^e-free flux difference over each cell
            let e = mesh.measure_exponent() as i32;
            (0..mesh.n_cells())
                .map(|c| {
                    let cell = mesh.cell(c);
                    let (a, b) = (cell[0], cell[1]);
                    let (ra, rb) = (mesh.vertex(a)[0], mesh.vertex(b)[0]);
                    (rb.powi(e) * values[b][0] - ra.powi(e) * values[a][0]).abs()
                })
                .fold(0.0, f64::max)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_disk_mesh;

    fn setup(h: f64) -> (Arc<BdmSpace>, DfbSolver) {
        let mesh = Arc::new(build_disk_mesh(h, 0.32).unwrap());
        let space = Arc::new(BdmSpace::new(mesh).unwrap());
        (space.clone(), DfbSolver::new(space))
    }

    fn bump(space: &BdmSpace) -> ScalarField {
        ScalarField::interpolate(space.mesh().clone(), |x| {
            (-((x[0] - 0.05).powi(2) + 2.0 * x[1] * x[1]) / 0.004).exp()
        })
    }

    fn forcing(space: &BdmSpace, params: &ParameterVector) -> Vec<f64> {
        let phi = bump(space);
        // not a function of phi, so the forcing is not a pure gradient
        let mu = ScalarField::interpolate(space.mesh().clone(), |x| 20.0 * x[1] - 0.3);
        let sigma = ScalarField::constant(space.mesh().clone(), 1.0);
        let solver = DfbSolver::new(Arc::new(BdmSpace::new(space.mesh().clone()).unwrap()));
        solver
            .load_vector(
                DfbCoefficients {
                    phi_t: &phi,
                    mu: &mu,
                    phi_sigma: &sigma,
                },
                params.chi_0,
            )
            .unwrap()
    }

    /// Rotation of a P1 stream function vanishing on the boundary.
    fn discrete_curl(space: &BdmSpace, psi: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        let mesh = space.mesh().clone();
        let s: Vec<f64> = (0..mesh.n_vertices())
            .map(|v| if mesh.is_boundary(v) { 0.0 } else { psi(mesh.vertex(v)) })
            .collect();
        space.interpolate_cellwise(|c| {
            let cell = mesh.cell_data(c);
            let mut g = [0.0; 2];
            for (l, &n) in cell.nodes().iter().enumerate() {
                g[0] += s[n] * cell.grads[l][0];
                g[1] += s[n] * cell.grads[l][1];
            }
            [g[1], -g[0]]
        })
    }

    #[test]
    fn homogeneous_problem_has_trivial_solution() {
        let (space, mut solver) = setup(0.08);
        let params = ParameterVector::default();
        let zero = vec![0.0; space.n_dofs()];
        let visc = vec![params.nu; space.mesh().n_cells()];
        let sol = solver
            .solve_with_load(&VectorField::zero(space.mesh().clone()), &zero, &visc, &params, 0.1, PicardSettings::default())
            .unwrap();
        assert!(sol.velocity.dofs().unwrap().iter().all(|&v| v == 0.0));
        assert!(sol.pressure.values().iter().all(|&p| p.abs() < 1e-14));
    }

    #[test]
    fn solution_is_discretely_divergence_free_with_zero_normal_trace() {
        let (space, mut solver) = setup(0.04);
        let params = ParameterVector::default();
        let load: Vec<f64> = forcing(&space, &params).iter().map(|v| v * 100.0).collect();
        let visc = vec![params.nu; space.mesh().n_cells()];
        let sol = solver
            .solve_with_load(&VectorField::zero(space.mesh().clone()), &load, &visc, &params, 0.1, PicardSettings::default())
            .unwrap();
        assert!(divergence_residual(&sol.velocity) <= 1e-10);
        assert!(sol.velocity.l2_norm() > 0.0);
        let dofs = sol.velocity.dofs().unwrap();
        for (d, &b) in space.boundary_dofs().iter().enumerate() {
            if b {
                assert_eq!(dofs[d], 0.0);
            }
        }
        assert!(sol.pressure.mean().abs() < 1e-12);
        assert!(sol.picard_iterations >= 2);
    }

    #[test]
    fn darcy_limit_scales_inversely_with_friction() {
        let (space, mut solver) = setup(0.08);
        let mut params = ParameterVector::default().without_forchheimer();
        let load = forcing(&space, &params);
        let visc = vec![params.nu; space.mesh().n_cells()];
        let zero = VectorField::zero(space.mesh().clone());
        params.alpha = 1e8;
        let a = solver.solve_with_load(&zero, &load, &visc, &params, 1.0, PicardSettings::default()).unwrap();
        params.alpha = 2e8;
        let b = solver.solve_with_load(&zero, &load, &visc, &params, 1.0, PicardSettings::default()).unwrap();
        let ratio = a.velocity.l2_norm() / b.velocity.l2_norm();
        assert!((ratio - 2.0).abs() < 1e-3, "ratio {ratio}");
    }

    #[test]
    fn manufactured_solution_is_recovered() {
        let (space, mut solver) = setup(0.05);
        let params = ParameterVector::default();
        let dt = 0.2;
        let mesh = space.mesh().clone();
        let v_star = discrete_curl(&space, |x| (x[0] + 0.1) * (0.1024 - x[0] * x[0] - x[1] * x[1]));
        assert!(divergence_residual(&VectorField::bdm(space.clone(), v_star.clone()).unwrap()) < 1e-14);
        let p_star: Vec<f64> = (0..mesh.n_cells())
            .map(|c| {
                let x = mesh.cell_centroid(c);
                x[0] * x[0] - 2.0 * x[1]
            })
            .collect();
        let visc = vec![params.nu; mesh.n_cells()];
        // Forchheimer terms are switched off so the operator is linear in v
        let mut frozen = params;
        frozen.f1 = 0.0;
        frozen.f2 = 0.0;
        // residual forcing: dt * load = A v* - B^T q* (v_n = 0)
        let a = solver.saddle_matrix(&frozen, &visc, &v_star, dt);
        let nv = solver.n_velocity;
        let mut x = vec![0.0; a.nrows()];
        for (d, u) in solver.unknown.iter().enumerate() {
            if let Some(u) = u {
                x[*u] = v_star[d];
            }
        }
        for c in 1..mesh.n_cells() {
            x[nv + c - 1] = dt * (p_star[c] - p_star[0]);
        }
        let ax = a.mul_vec(&x);
        let mut load = vec![0.0; space.n_dofs()];
        for (d, u) in solver.unknown.iter().enumerate() {
            if let Some(u) = u {
                load[d] = ax[*u] / dt;
            }
        }
        let sol = solver
            .solve_with_load(&VectorField::zero(mesh.clone()), &load, &visc, &frozen, dt, PicardSettings::default())
            .unwrap();
        let got = sol.velocity.dofs().unwrap();
        let err = got.iter().zip(&v_star).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = v_star.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err <= 1e-10 * scale, "velocity error {err}");
        let mut p_ref = PressureField::new(mesh.clone(), p_star).unwrap();
        p_ref.normalize();
        let perr = sol
            .pressure
            .values()
            .iter()
            .zip(p_ref.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(perr < 1e-8, "pressure error {perr}");
    }

    #[test]
    fn divergence_of_hand_built_fields() {
        let (space, _) = setup(0.08);
        let mesh = space.mesh().clone();
        let v = VectorField::bdm(space.clone(), space.interpolate(|x| [x[0], 0.0])).unwrap();
        for c in 0..mesh.n_cells() {
            let local = space.cell_divergence(v.dofs().unwrap(), c) * mesh.cell_area(c);
            assert!((local - mesh.cell_area(c)).abs() < 1e-14);
        }
        let max_area = (0..mesh.n_cells()).map(|c| mesh.cell_area(c)).fold(0.0, f64::max);
        assert!((divergence_residual(&v) - max_area).abs() < 1e-14);

        // continuous curl of a quadratic stream function
        let w = VectorField::bdm(
            space.clone(),
            space.interpolate(|x| [2.0 * x[1] - x[0], x[1] - 3.0 * x[0]]),
        )
        .unwrap();
        assert!(divergence_residual(&w) < 1e-14);
    }

    #[test]
    fn saddle_matrix_is_symmetric_with_spd_velocity_block() {
        let (space, solver) = setup(0.08);
        let params = ParameterVector::default();
        let lag = space.interpolate(|x| [x[1], -x[0]]);
        let visc = vec![params.nu; space.mesh().n_cells()];
        let a = solver.saddle_matrix(&params, &visc, &lag, 0.1);
        assert!(a.asymmetry() < 1e-14);
        let nv = solver.n_velocity;
        for i in nv..a.nrows() {
            assert_eq!(a.get(i, i), 0.0);
        }
        // positive quadratic form on random velocity vectors
        for seed in 0..5u64 {
            let mut x = vec![0.0; a.nrows()];
            for (i, xi) in x.iter_mut().take(nv).enumerate() {
                *xi = (((i as u64 + 1) * (seed + 7) * 2654435761) % 1000) as f64 / 500.0 - 1.0;
            }
            let ax = a.mul_vec(&x);
            let q: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
            assert!(q > 0.0);
        }
    }

    #[test]
    fn unforced_solve_dissipates_energy() {
        let (space, mut solver) = setup(0.05);
        let params = ParameterVector::default();
        let v0 = discrete_curl(&space, |x| (x[0] * 7.0).sin() * (x[1] * 5.0).cos());
        let v0 = VectorField::bdm(space.clone(), v0).unwrap();
        let zero = vec![0.0; space.n_dofs()];
        let visc = vec![params.nu; space.mesh().n_cells()];
        let mut v = v0;
        for _ in 0..3 {
            let next = solver
                .solve_with_load(&v, &zero, &visc, &params, 0.1, PicardSettings::default())
                .unwrap()
                .velocity;
            assert!(next.l2_norm() <= v.l2_norm());
            v = next;
        }
    }

    #[test]
    fn forchheimer_drag_never_speeds_up_the_flow() {
        let (space, mut solver) = setup(0.08);
        let base = ParameterVector::default();
        let load: Vec<f64> = forcing(&space, &base).iter().map(|v| v * 1e4).collect();
        let visc = vec![base.nu; space.mesh().n_cells()];
        let zero = VectorField::zero(space.mesh().clone());
        for which in 0..2 {
            let mut last = f64::INFINITY;
            for f in [0.0, 10.0, 100.0] {
                let mut p = base;
                p.f1 = if which == 0 { f } else { 0.0 };
                p.f2 = if which == 1 { f } else { 0.0 };
                let n = solver
                    .solve_with_load(&zero, &load, &visc, &p, 0.1, PicardSettings::default())
                    .unwrap()
                    .velocity
                    .l2_norm();
                assert!(n <= last + 1e-15, "norm {n} after {last}");
                last = n;
            }
        }
    }

    #[test]
    fn picard_limit_is_reported() {
        let (space, mut solver) = setup(0.08);
        let mut params = ParameterVector::default();
        params.f2 = 1e3;
        let load: Vec<f64> = forcing(&space, &params).iter().map(|v| v * 1e5).collect();
        let visc = vec![params.nu; space.mesh().n_cells()];
        let err = solver
            .solve_with_load(
                &VectorField::zero(space.mesh().clone()),
                &load,
                &visc,
                &params,
                0.1,
                PicardSettings { tol: 1e-14, max_iter: 2 },
            )
            .unwrap_err();
        assert!(matches!(err, Error::NoConvergence { iterations: 2, .. }));
    }
}
