//! Sampled checks of the hypotheses behind the existence results.
//!
//! Growth conditions are tested on a fixed grid, so a check "passes" when a
//! finite admissible constant exists on that grid; the constants are
//! reported so callers can judge them.

use std::fmt;

use crate::mesh::Mesh;
use crate::nonlocal::{ConvolutionOperator, Kernel};

use super::mobility::MobilityModel;
use super::params::ParameterVector;
use super::potential::DoubleWellPotential;

/// Grid on which growth conditions are sampled.
pub const GROWTH_GRID: (f64, f64, usize) = (-10.0, 10.0, 2001);
const MOBILITY_GRID: (f64, f64, usize) = (-10.0, 10.0, 81);

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionCheck {
    /// `"A1"` to `"A7"`.
    pub id: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Constants found for the nonlocal growth conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlocalConstants {
    pub c1: f64,
    pub c2: f64,
    /// Largest `C_3` with `Psi'' >= C_3 - (J*1)` on the grid and mesh.
    pub c3: f64,
    /// Lower bound `C_3` has to exceed.
    pub c3_required: f64,
    pub c4: f64,
    pub kernel_l1: f64,
    pub min_convolved_one: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
    pub nonlocal: Option<NonlocalConstants>,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, id: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn passed(&self, id: &str) -> bool {
        self.get(id).is_some_and(|c| c.passed)
    }

    fn push(&mut self, id: &'static str, passed: bool, detail: String) {
        self.checks.push(AssumptionCheck { id, passed, detail });
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", c.id, if c.passed { "pass" } else { "FAIL" }, c.detail)?;
        }
        Ok(())
    }
}

fn grid((a, b, n): (f64, f64, usize)) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

/// Checks (A1)-(A5), and (A6)-(A7) when a kernel and mesh are given.
pub fn validate_assumptions(
    params: &ParameterVector,
    potential: &DoubleWellPotential,
    mobility: &MobilityModel,
    nonlocal: Option<(&Kernel, &Mesh)>,
) -> AssumptionReport {
    let mut report = AssumptionReport::default();

    let finite = params.to_array().iter().all(|v| v.is_finite());
    report.push(
        "A1",
        finite,
        "bounded Lipschitz domain (disk or ball of radius 0.32); parameters finite".into(),
    );
    report.push("A2", true, "discrete initial data are piecewise linear, hence H1".into());

    let (m0, minf) = (mobility.lower, mobility.upper);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for a in grid(MOBILITY_GRID) {
        for s in grid(MOBILITY_GRID) {
            for v in [mobility.tumor(a, s), mobility.nutrient(a, s), mobility.viscosity(a, s)] {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    let a3 = m0 > 0.0 && minf.is_finite() && lo >= m0 && hi <= minf;
    report.push(
        "A3",
        a3,
        format!("sampled mobilities in [{lo}, {hi}], declared bounds m_0 = {m0}, m_inf = {minf}"),
    );

    let rates = [params.lambda_t, params.lambda_a, params.lambda_sigma];
    report.push(
        "A4",
        rates.iter().all(|&r| r >= 0.0),
        format!(
            "rates lambda_T = {}, lambda_A = {}, lambda_sigma = {}; g, h are cut-off (bounded)",
            rates[0], rates[1], rates[2]
        ),
    );

    // Psi >= C (x^2 - 1), |Psi'| <= C (|x| + 1), |Psi''| <= C (x^4 + 1)
    let mut c_lower = f64::INFINITY;
    let (mut c_first, mut c_second) = (0.0f64, 0.0f64);
    for x in grid(GROWTH_GRID) {
        let (v, d1, d2) = (potential.value(x), potential.first_derivative(x), potential.second_derivative(x));
        if x * x > 1.0 {
            c_lower = c_lower.min(v / (x * x - 1.0));
        }
        c_first = c_first.max(d1.abs() / (x.abs() + 1.0));
        c_second = c_second.max(d2.abs() / (x.powi(4) + 1.0));
    }
    // below |x| = 1 the bound C (x^2 - 1) <= 0 <= Psi holds for any C >= 0
    let a5 = c_lower > 0.0 && c_first.is_finite() && c_second.is_finite();
    report.push(
        "A5",
        a5,
        format!(
            "on [-10, 10]: Psi >= {c_lower:.6} (x^2 - 1), |Psi'| <= {c_first:.6} (|x| + 1), |Psi''| <= {c_second:.6} (x^4 + 1)"
        ),
    );

    if let Some((kernel, mesh)) = nonlocal {
        nonlocal_checks(&mut report, params, potential, m0, minf, kernel, mesh);
    }
    report
}

fn nonlocal_checks(
    report: &mut AssumptionReport,
    params: &ParameterVector,
    potential: &DoubleWellPotential,
    m0: f64,
    minf: f64,
    kernel: &Kernel,
    mesh: &Mesh,
) {
    let op = match ConvolutionOperator::new(*kernel, std::sync::Arc::new(mesh.clone())) {
        Ok(op) => op,
        Err(e) => {
            report.push("A6", false, format!("kernel not usable on this mesh: {e}"));
            report.push("A7", false, format!("kernel not usable on this mesh: {e}"));
            return;
        }
    };
    let ones = op.ones();
    let min_one = ones.iter().copied().fold(f64::INFINITY, f64::min);
    let l1 = kernel.l1_norm();

    let c1 = 0.5 * l1 - 0.5 * min_one;
    // strict inequality: take the next representable value above the bound
    let c1 = c1 + c1.abs().max(1.0) * 1e-12;
    let mut c2 = 0.0f64;
    let mut c4 = 0.0f64;
    let mut min_second = f64::INFINITY;
    for x in grid(GROWTH_GRID) {
        c2 = c2.max(c1 * x * x - potential.value(x).abs());
        c4 = c4.max(potential.first_derivative(x).abs() / (x.abs() + 1.0));
        min_second = min_second.min(potential.second_derivative(x));
    }
    let c2 = c2.max(f64::MIN_POSITIVE);
    let c3 = min_second + min_one;
    let chi = params.chi_0;
    let ds = params.delta_sigma;
    let c3_required = (2.0 * chi * minf / m0).sqrt()
        * (4.0 * chi * chi * minf * minf * ds + 2.0 * m0 * chi * minf * ds + chi * chi * ds * m0 * m0)
        / (2.0 * m0 * m0);
    let a6 = m0 > 0.0 && c3 > c3_required && c2.is_finite() && c4.is_finite();
    report.push(
        "A6",
        a6,
        format!(
            "C1 = {c1:.6}, C2 = {c2:.6}, C3 = {c3:.6} (needs > {c3_required:.6}), C4 = {c4:.6}"
        ),
    );

    let even = evenness_holds(kernel);
    let nonneg = min_one >= -1e-12;
    report.push(
        "A7",
        even && nonneg,
        format!("kernel even on samples: {even}; min nodal J*1 = {min_one:.6e}; |J|_L1 = {l1:.6}"),
    );
    report.nonlocal = Some(NonlocalConstants {
        c1,
        c2,
        c3,
        c3_required,
        c4,
        kernel_l1: l1,
        min_convolved_one: min_one,
    });
}

fn evenness_holds(kernel: &Kernel) -> bool {
    let r = kernel.support_radius();
    (0..64).all(|i| {
        let t = i as f64 * 0.37;
        let x = [0.9 * r * t.cos() * (i as f64 / 64.0), 0.9 * r * t.sin() * (i as f64 / 64.0)];
        let pt = &x[..kernel.dim().min(2)];
        let neg: Vec<f64> = pt.iter().map(|v| -v).collect();
        kernel.eval(pt) == kernel.eval(&neg)
    })
}
