//! One backward-Euler step: velocity, nutrient and the tumor/potential block
//! are solved in turn until the tumor increment drops below the tolerance.
//!
//! With `phi` the tumor unknown and `k` the inner iterate the tumor block is
//!
//! ```text
//! (M + dt lambda_A M + dt C) phi + dt K_m mu = M phi_n + dt lambda_T M_L (sigma g(phi^k))
//! -(eps^2 K + M_L Psi_c''(phi^k)) phi + M mu  = M_L (Psi_c'(phi^k) - Psi_c''(phi^k) phi^k - Psi_e'(phi_n))
//!                                              - chi_0 M sigma_n
//! ```
//!
//! In the nonlocal variant `eps^2 K` becomes `M_L diag(J*1)` and
//! `-M_L (J*phi_n)` joins the right-hand side.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{
    apply_dirichlet, assemble_convection, assemble_mass, assemble_stiffness, check_mesh, lumped_mass,
    FormCoefficient, Mesh, ScalarField, SparseLu, SparseMatrix, TripletBuilder,
};
use crate::model::{Coefficient, ConvexSplit, MobilityModel, ParameterVector, SourceModel};
use crate::nonlocal::{ConvolutionOperator, Kernel};
use crate::velocity::{divergence_residual, BdmSpace, DfbCoefficients, DfbSolver};

use super::config::StepperConfig;
use super::state::{field_confluence, local_energy, nonlocal_energy, FieldState};

/// Diagnostics of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub gs_iterations: usize,
    /// `max |phi_T^(k+1) - phi_T^k|` of the last inner iteration.
    pub increment: f64,
    /// Largest `divergence_residual` over the velocity solves of the step.
    pub divergence: f64,
    pub picard_iterations: usize,
}

/// Gaussian kernel matched to `eps_T` used by the nonlocal variant when no
/// kernel is supplied. Its standard deviation is `eps_T`.
pub fn default_kernel(mesh: &Mesh, params: &ParameterVector) -> Result<Kernel> {
    Kernel::gaussian_matching(kernel_dim(mesh), params.eps_t, params.eps_t)
}

fn kernel_dim(mesh: &Mesh) -> usize {
    if mesh.dim() == 2 {
        2
    } else {
        mesh.measure_exponent() as usize + 1
    }
}

/// Time stepper holding the assembled operators of one mesh and parameter
/// set.
pub struct Stepper {
    mesh: Arc<Mesh>,
    params: ParameterVector,
    config: StepperConfig,
    mobility: MobilityModel,
    split: ConvexSplit,
    source: SourceModel,
    mass: SparseMatrix,
    lumped: Vec<f64>,
    /// `eps^2 K`, or `None` in the nonlocal variant.
    gradient: Option<SparseMatrix>,
    stiffness: SparseMatrix,
    flow: Option<DfbSolver>,
    convolution: Option<ConvolutionOperator>,
    block_lu: Option<SparseLu>,
    nutrient_lu: Option<SparseLu>,
}

impl Stepper {
    pub fn new(mesh: Arc<Mesh>, params: ParameterVector, config: StepperConfig) -> Result<Self> {
        let mobility = MobilityModel::constant(&params);
        Self::with_models(mesh, params, config, mobility, None)
    }

    /// Full constructor. `kernel` is only used by the nonlocal variant and
    /// defaults to [`default_kernel`].
    pub fn with_models(
        mesh: Arc<Mesh>,
        params: ParameterVector,
        config: StepperConfig,
        mobility: MobilityModel,
        kernel: Option<Kernel>,
    ) -> Result<Self> {
        config.validate()?;
        params.validate()?;
        let params = if config.variant.has_forchheimer() {
            params
        } else {
            params.without_forchheimer()
        };
        let mass = assemble_mass(&mesh, None)?;
        let lumped = lumped_mass(&mesh);
        let stiffness = assemble_stiffness(&mesh, FormCoefficient::Constant(1.0))?;
        let (gradient, convolution) = if config.variant.is_nonlocal() {
            let kernel = match kernel {
                Some(k) => k,
                None => default_kernel(&mesh, &params)?,
            };
            (None, Some(ConvolutionOperator::new(kernel, mesh.clone())?))
        } else {
            (Some(stiffness.scaled(params.eps_t * params.eps_t)), None)
        };
        let flow = if config.variant.has_velocity() && mesh.dim() == 2 {
            Some(DfbSolver::new(Arc::new(BdmSpace::new(mesh.clone())?)))
        } else {
            None
        };
        Ok(Self {
            split: ConvexSplit::from_params(&params),
            source: SourceModel::from_params(&params),
            mesh,
            params,
            config,
            mobility,
            mass,
            lumped,
            gradient,
            stiffness,
            flow,
            convolution,
            block_lu: None,
            nutrient_lu: None,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    /// Parameters in effect (Forchheimer terms removed for variants I/II).
    pub fn params(&self) -> &ParameterVector {
        &self.params
    }

    pub fn config(&self) -> &StepperConfig {
        &self.config
    }

    pub fn convolution(&self) -> Option<&ConvolutionOperator> {
        self.convolution.as_ref()
    }

    /// Initial state for a tumor datum with the nutrient at 1. In the
    /// nonlocal variant `mu` is the nodal nonlocal potential.
    pub fn initial_state(&self, phi_t: ScalarField) -> Result<FieldState> {
        check_mesh(&phi_t, &self.mesh, "phi_T")?;
        let mut state = FieldState::with_unit_nutrient(phi_t, &self.params)?;
        if let Some(op) = &self.convolution {
            state.mu = crate::nonlocal::nonlocal_mu_with(op, &state.phi_t, &state.phi_sigma, &self.params)?;
        }
        Ok(state)
    }

    /// Energy appropriate to the variant.
    pub fn energy(&self, state: &FieldState) -> Result<f64> {
        match &self.convolution {
            Some(op) => nonlocal_energy(state, &self.params, op),
            None => Ok(local_energy(&state.phi_t, &state.phi_sigma, &self.params)),
        }
    }

    fn stiffness_with(&self, coefficient: &Coefficient, scale: f64, phi_t: &[f64], phi_sigma: &[f64]) -> Result<SparseMatrix> {
        match coefficient.as_constant() {
            Some(c) => Ok(self.stiffness.scaled(c * scale)),
            None => {
                let values = phi_t
                    .iter()
                    .zip(phi_sigma)
                    .map(|(&a, &s)| scale * coefficient.eval(a, s))
                    .collect();
                let field = ScalarField::new(self.mesh.clone(), values)?;
                assemble_stiffness(&self.mesh, FormCoefficient::Field(&field))
            }
        }
    }

    /// Nutrient update with Dirichlet value 1 on the boundary.
    fn solve_nutrient(
        &mut self,
        phi_k: &[f64],
        sigma_k: &[f64],
        sigma_n: &[f64],
        convection: &SparseMatrix,
    ) -> Result<Vec<f64>> {
        let dt = self.config.dt;
        let p = &self.params;
        let n = self.mesh.n_vertices();
        let diffusion = self.stiffness_with(&self.mobility.nutrient, 1.0 / p.delta_sigma, phi_k, sigma_k)?;
        let chemotaxis = self.stiffness_with(&self.mobility.nutrient, p.chi_0, phi_k, sigma_k)?;
        let mut b = TripletBuilder::with_capacity(n, n, 4 * self.mass.nnz());
        b.push_block(&self.mass, 0, 0, 1.0);
        b.push_block(convection, 0, 0, dt);
        b.push_block(&diffusion, 0, 0, dt);
        for i in 0..n {
            let uptake = p.lambda_sigma * SourceModel::consumption(phi_k[i]);
            b.push(i, i, dt * self.lumped[i] * uptake);
        }
        let matrix = b.build();
        let mut rhs = self.mass.mul_vec(sigma_n);
        let chemo = chemotaxis.mul_vec(phi_k);
        for (r, c) in rhs.iter_mut().zip(&chemo) {
            *r += dt * c;
        }
        let (matrix, rhs) = apply_dirichlet(&matrix, &rhs, self.mesh.boundary_flags(), 1.0)?;
        refactor(&mut self.nutrient_lu, &matrix)?;
        self.nutrient_lu.as_ref().expect("factored").solve(&rhs)
    }

    /// Tumor/potential block linearized about `phi_k`.
    fn solve_block(
        &mut self,
        phi_k: &[f64],
        sigma_new: &[f64],
        state: &FieldState,
        convection: &SparseMatrix,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let dt = self.config.dt;
        let p = &self.params;
        let n = self.mesh.n_vertices();
        let phi_n = state.phi_t.values();
        let sigma_n = state.phi_sigma.values();
        let transport = self.stiffness_with(&self.mobility.tumor, dt, phi_k, sigma_new)?;

        let mut b = TripletBuilder::with_capacity(2 * n, 2 * n, 6 * self.mass.nnz());
        b.push_block(&self.mass, 0, 0, 1.0 + dt * p.lambda_a);
        b.push_block(convection, 0, 0, dt);
        b.push_block(&transport, 0, n, 1.0);
        b.push_block(&self.mass, n, n, 1.0);
        let mut rhs_t = self.mass.mul_vec(phi_n);
        let mut rhs_mu = self.mass.mul_vec(sigma_n);
        for v in rhs_mu.iter_mut() {
            *v *= -p.chi_0;
        }
        match (&self.gradient, &self.convolution) {
            (Some(k), _) => {
                b.push_block(k, n, 0, -1.0);
            }
            (None, Some(op)) => {
                // keep the (mu, phi) block pattern identical to the local case
                b.push_block(&self.mass, n, 0, 0.0);
                let conv = op.apply_values(phi_n);
                for i in 0..n {
                    b.push(n + i, i, -self.lumped[i] * op.ones()[i]);
                    rhs_mu[i] -= self.lumped[i] * conv[i];
                }
            }
            (None, None) => unreachable!("either a gradient or a convolution operator exists"),
        }
        for i in 0..n {
            let ml = self.lumped[i];
            let growth = SourceModel::growth(phi_k[i]);
            rhs_t[i] += dt * self.source.lambda_t * ml * sigma_new[i] * growth;
            let d2 = self.split.contractive_second_derivative(phi_k[i]);
            b.push(n + i, i, -ml * d2);
            rhs_mu[i] += ml
                * (self.split.contractive_derivative(phi_k[i]) - d2 * phi_k[i]
                    - self.split.expansive_derivative(phi_n[i]));
        }
        let matrix = b.build();
        rhs_t.extend(rhs_mu);
        refactor(&mut self.block_lu, &matrix)?;
        let mut x = self.block_lu.as_ref().expect("factored").solve(&rhs_t)?;
        let mu = x.split_off(n);
        Ok((x, mu))
    }

    /// Advances `state` by one time step.
    pub fn step(&mut self, state: &FieldState) -> Result<(FieldState, StepReport)> {
        for (f, what) in [(&state.phi_t, "phi_T"), (&state.mu, "mu"), (&state.phi_sigma, "phi_sigma")] {
            check_mesh(f, &self.mesh, what)?;
        }
        let dt = self.config.dt;
        let mut phi = state.phi_t.clone();
        let mut mu = state.mu.clone();
        let mut sigma = state.phi_sigma.clone();
        let mut velocity = state.velocity.clone();
        let mut pressure = state.pressure.clone();
        let zero_convection = SparseMatrix::zeros(self.mesh.n_vertices(), self.mesh.n_vertices());
        let mut divergence: f64 = 0.0;
        let mut picard = 0;
        let mut increment = f64::INFINITY;

        for k in 1..=self.config.gs_max_iter {
            if let Some(flow) = &mut self.flow {
                let coeffs = DfbCoefficients {
                    phi_t: &phi,
                    mu: &mu,
                    phi_sigma: &sigma,
                };
                let sol = flow.solve(
                    &state.velocity,
                    coeffs,
                    &self.params,
                    &self.mobility,
                    dt,
                    self.config.picard(),
                )?;
                divergence = divergence.max(divergence_residual(&sol.velocity));
                picard += sol.picard_iterations;
                velocity = sol.velocity;
                pressure = sol.pressure;
            }
            let convection = if velocity.is_zero() {
                zero_convection.clone()
            } else {
                assemble_convection(&self.mesh, &velocity)?
            };
            let sigma_new = self.solve_nutrient(phi.values(), sigma.values(), state.phi_sigma.values(), &convection)?;
            let (phi_new, mu_new) = self.solve_block(phi.values(), &sigma_new, state, &convection)?;

            increment = max_diff(&phi_new, phi.values());
            let sigma_increment = max_diff(&sigma_new, sigma.values());
            if !increment.is_finite() || !sigma_increment.is_finite() {
                return Err(Error::Numeric("non-finite iterate in the inner loop".into()));
            }
            phi = phi.with_values(phi_new)?;
            mu = mu.with_values(mu_new)?;
            sigma = sigma.with_values(sigma_new)?;
            let tol = self.config.gs_tol;
            if increment < tol && (!self.config.strict_stopping || sigma_increment < tol) {
                let next = FieldState {
                    time: state.time + dt,
                    phi_t: phi,
                    mu,
                    phi_sigma: sigma,
                    velocity,
                    pressure,
                };
                let report = StepReport {
                    gs_iterations: k,
                    increment,
                    divergence,
                    picard_iterations: picard,
                };
                return Ok((next, report));
            }
        }
        Err(Error::NoConvergence {
            what: "Gauss-Seidel iteration",
            iterations: self.config.gs_max_iter,
            residual: increment,
        })
    }

    /// Advances to `t_end`, recording diagnostics every step and snapshots
    /// every `snapshot_interval` days.
    pub fn run(&mut self, initial: FieldState) -> Result<Trajectory> {
        let mut records = vec![self.record(&initial, 0, 0.0)?];
        let mut snapshots = Vec::new();
        let interval = self.config.snapshot_interval;
        if interval > 0.0 {
            snapshots.push(initial.clone());
        }
        let mut next_snapshot = interval;
        let t0 = initial.time;
        let mut state = initial;
        for n in 1..=self.config.n_steps() {
            let (mut next, report) = self.step(&state).map_err(|e| Error::AtTime {
                time: state.time + self.config.dt,
                source: Box::new(e),
            })?;
            // avoid drift from repeated addition
            next.time = t0 + n as f64 * self.config.dt;
            let mut record = self.record(&next, report.gs_iterations, report.divergence)?;
            record.increment = report.increment;
            records.push(record);
            if interval > 0.0 && next.time - t0 >= next_snapshot - 1e-9 * self.config.dt {
                snapshots.push(next.clone());
                while next_snapshot <= next.time - t0 + 1e-9 * self.config.dt {
                    next_snapshot += interval;
                }
            }
            state = next;
        }
        Ok(Trajectory {
            records,
            snapshots,
            final_state: state,
        })
    }

    fn record(&self, state: &FieldState, gs_iterations: usize, divergence: f64) -> Result<TrajectoryRecord> {
        Ok(TrajectoryRecord {
            t: state.time,
            confluence: field_confluence(&state.phi_t),
            energy: self.energy(state)?,
            mass: state.phi_t.integral(),
            gs_iterations,
            increment: 0.0,
            divergence,
        })
    }
}

fn refactor(slot: &mut Option<SparseLu>, matrix: &SparseMatrix) -> Result<()> {
    match slot {
        Some(lu) => lu.refactor(matrix),
        None => {
            *slot = Some(SparseLu::factor(matrix)?);
            Ok(())
        }
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub confluence: f64,
    pub energy: f64,
    pub mass: f64,
    pub gs_iterations: usize,
    pub increment: f64,
    pub divergence: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    /// Full states at `t = 0` and every snapshot interval.
    pub snapshots: Vec<FieldState>,
    pub final_state: FieldState,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn confluence(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.confluence).collect()
    }

    /// Confluence at `t` by linear interpolation between records.
    pub fn confluence_at(&self, t: f64) -> f64 {
        interpolate(&self.records, t, |r| r.confluence)
    }
}

fn interpolate(records: &[TrajectoryRecord], t: f64, f: impl Fn(&TrajectoryRecord) -> f64) -> f64 {
    match records.iter().position(|r| r.t >= t) {
        None => records.last().map(&f).unwrap_or(f64::NAN),
        Some(0) => f(&records[0]),
        Some(i) => {
            let (a, b) = (&records[i - 1], &records[i]);
            let w = (t - a.t) / (b.t - a.t);
            (1.0 - w) * f(a) + w * f(b)
        }
    }
}

/// One step with a freshly built [`Stepper`].
pub fn step(state: &FieldState, config: &StepperConfig, params: &ParameterVector) -> Result<FieldState> {
    let mut s = Stepper::new(state.mesh().clone(), *params, *config)?;
    Ok(s.step(state)?.0)
}

/// Full run with a freshly built [`Stepper`].
pub fn run(initial: FieldState, config: &StepperConfig, params: &ParameterVector) -> Result<Trajectory> {
    Stepper::new(initial.mesh().clone(), *params, *config)?.run(initial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepper::ModelVariant;
    use crate::mesh::{build_disk_mesh, build_radial_mesh, DOMAIN_RADIUS};
    use crate::stepper::state::initial_radial_tumor;

    fn ch_params() -> ParameterVector {
        ParameterVector {
            lambda_t: 0.0,
            lambda_a: 0.0,
            lambda_sigma: 0.0,
            chi_0: 0.0,
            ..Default::default()
        }
    }

    fn ch_config(dt: f64) -> StepperConfig {
        StepperConfig {
            dt,
            t_end: 100.0 * dt,
            gs_tol: 1e-11,
            gs_max_iter: 200,
            snapshot_interval: 0.0,
            variant: ModelVariant::NoVelocity,
            ..Default::default()
        }
    }

    fn bumpy(mesh: Arc<Mesh>) -> ScalarField {
        ScalarField::interpolate(mesh, |x| 0.5 + 0.3 * (25.0 * x[0]).cos() + 0.1 * (61.0 * x[0]).sin())
    }

    #[test]
    fn zero_state_is_a_fixed_point() {
        let mesh = Arc::new(build_radial_mesh(32, DOMAIN_RADIUS).unwrap());
        let p = ch_params();
        let cfg = ch_config(0.1);
        let s0 = FieldState::with_unit_nutrient(ScalarField::zeros(mesh), &p).unwrap();
        let s1 = step(&s0, &cfg, &p).unwrap();
        assert!(s1.phi_t.values().iter().all(|v| v.abs() < 1e-14));
        assert!(s1.phi_sigma.values().iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn cahn_hilliard_energy_decays_and_mass_is_conserved() {
        let mesh = Arc::new(Mesh::interval(64, 0.0, 1.0, 0).unwrap());
        let p = ParameterVector {
            eps_t: 0.03,
            ..ch_params()
        };
        for dt in [0.01, 1.0] {
            let mut s = Stepper::new(mesh.clone(), p, ch_config(dt)).unwrap();
            let init = s.initial_state(bumpy(mesh.clone())).unwrap();
            let traj = s.run(init).unwrap();
            let m0 = traj.records[0].mass;
            for w in traj.records.windows(2) {
                assert!(w[1].energy <= w[0].energy + 1e-12 * w[0].energy.abs(), "dt {dt}");
                assert!((w[1].mass - m0).abs() <= 1e-8 * m0.abs());
            }
        }
    }

    #[test]
    fn radial_tumor_grows() {
        let mesh = Arc::new(build_radial_mesh(64, DOMAIN_RADIUS).unwrap());
        let p = ParameterVector::default();
        let cfg = StepperConfig {
            dt: 0.1,
            t_end: 2.0,
            variant: ModelVariant::Full,
            ..Default::default()
        };
        let mut s = Stepper::new(mesh.clone(), p, cfg).unwrap();
        let init = s.initial_state(initial_radial_tumor(mesh, 0.00562, 200.0).unwrap()).unwrap();
        let traj = s.run(init).unwrap();
        let c = traj.confluence();
        assert!(c.last().unwrap() > &c[0]);
        assert_eq!(traj.records.len(), 21);
        assert!(traj.final_state.phi_sigma.values().last().copied() == Some(1.0));
        assert!(traj.records.iter().skip(1).all(|r| r.increment < cfg.gs_tol));
    }

    #[test]
    fn empty_horizon_keeps_only_the_initial_record() {
        let mesh = Arc::new(build_radial_mesh(16, DOMAIN_RADIUS).unwrap());
        let p = ParameterVector::default();
        let cfg = StepperConfig {
            t_end: 0.0,
            ..Default::default()
        };
        let init = FieldState::with_unit_nutrient(ScalarField::zeros(mesh), &p).unwrap();
        let traj = run(init, &cfg, &p).unwrap();
        assert_eq!(traj.records.len(), 1);
    }

    #[test]
    fn gauss_seidel_limit_is_reported() {
        let mesh = Arc::new(build_radial_mesh(32, DOMAIN_RADIUS).unwrap());
        let p = ParameterVector::default();
        let cfg = StepperConfig {
            gs_tol: 1e-300,
            gs_max_iter: 2,
            ..Default::default()
        };
        let init = FieldState::with_unit_nutrient(initial_radial_tumor(mesh, 0.01, 200.0).unwrap(), &p).unwrap();
        match step(&init, &cfg, &p) {
            Err(Error::NoConvergence { iterations: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn snapshots_follow_the_interval() {
        let mesh = Arc::new(build_radial_mesh(16, DOMAIN_RADIUS).unwrap());
        let p = ParameterVector::default();
        let cfg = StepperConfig {
            dt: 0.25,
            t_end: 3.0,
            snapshot_interval: 1.0,
            ..Default::default()
        };
        let init = FieldState::with_unit_nutrient(initial_radial_tumor(mesh, 0.01, 200.0).unwrap(), &p).unwrap();
        let traj = run(init, &cfg, &p).unwrap();
        let times: Vec<f64> = traj.snapshots.iter().map(|s| s.time).collect();
        assert_eq!(times, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn variant_three_without_forchheimer_matches_variant_two() {
        let mesh = Arc::new(build_disk_mesh(0.04, DOMAIN_RADIUS).unwrap());
        let p = ParameterVector {
            f1: 0.0,
            f2: 0.0,
            ..Default::default()
        };
        let base = StepperConfig {
            dt: 0.1,
            t_end: 0.3,
            snapshot_interval: 0.0,
            ..Default::default()
        };
        let phi = initial_radial_tumor(mesh.clone(), 0.05, 50.0).unwrap();
        let a = Stepper::new(mesh.clone(), p, base.with_variant(ModelVariant::Full))
            .unwrap()
            .run(FieldState::with_unit_nutrient(phi.clone(), &p).unwrap())
            .unwrap();
        let b = Stepper::new(mesh.clone(), p, base.with_variant(ModelVariant::Brinkman))
            .unwrap()
            .run(FieldState::with_unit_nutrient(phi, &p).unwrap())
            .unwrap();
        assert_eq!(a.records, b.records);
        assert!(a.records.iter().all(|r| r.divergence <= 1e-10));
    }

    #[test]
    fn runs_are_deterministic() {
        let mesh = Arc::new(build_radial_mesh(32, DOMAIN_RADIUS).unwrap());
        let p = ParameterVector::default();
        let cfg = StepperConfig {
            dt: 0.1,
            t_end: 1.0,
            ..Default::default()
        };
        let go = || {
            let init = FieldState::with_unit_nutrient(initial_radial_tumor(mesh.clone(), 0.01, 200.0).unwrap(), &p).unwrap();
            run(init, &cfg, &p).unwrap().records
        };
        assert_eq!(go(), go());
    }
}
