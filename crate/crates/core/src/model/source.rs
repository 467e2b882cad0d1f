use super::params::ParameterVector;

/// Clamp to `[0, 1]`.
#[inline]
pub fn cutoff(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Reaction terms of the tumor and nutrient equations.
///
/// `S_T = lambda_T phi_sigma g(phi_T) - lambda_A phi_T` and
/// `S_sigma = -lambda_sigma phi_sigma h(phi_T)` with the cut-off forms
/// `g(phi) = C(phi (1 - phi))`, `h(phi) = C(phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel {
    pub lambda_t: f64,
    pub lambda_a: f64,
    pub lambda_sigma: f64,
    pub chi_0: f64,
}

impl SourceModel {
    pub fn from_params(params: &ParameterVector) -> Self {
        Self {
            lambda_t: params.lambda_t,
            lambda_a: params.lambda_a,
            lambda_sigma: params.lambda_sigma,
            chi_0: params.chi_0,
        }
    }

    pub fn growth(phi_t: f64) -> f64 {
        cutoff(phi_t * (1.0 - phi_t))
    }

    pub fn consumption(phi_t: f64) -> f64 {
        cutoff(phi_t)
    }

    pub fn tumor(&self, phi_t: f64, phi_sigma: f64) -> f64 {
        self.lambda_t * phi_sigma * Self::growth(phi_t) - self.lambda_a * phi_t
    }

    pub fn nutrient(&self, phi_t: f64, phi_sigma: f64) -> f64 {
        -self.lambda_sigma * phi_sigma * Self::consumption(phi_t)
    }

    /// `S_v = (mu + chi_0 phi_sigma) grad phi_T`.
    pub fn velocity(&self, mu: f64, phi_sigma: f64, grad_phi_t: [f64; 2]) -> [f64; 2] {
        let s = mu + self.chi_0 * phi_sigma;
        [s * grad_phi_t[0], s * grad_phi_t[1]]
    }
}

/// `(S_T, S_sigma)` for one point.
pub fn source_terms(phi_t: f64, phi_sigma: f64, params: &ParameterVector) -> (f64, f64) {
    let s = SourceModel::from_params(params);
    (s.tumor(phi_t, phi_sigma), s.nutrient(phi_t, phi_sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cutoff_examples() {
        assert_eq!(cutoff(-0.3), 0.0);
        assert_eq!(cutoff(0.5), 0.5);
        assert_eq!(cutoff(1.7), 1.0);
    }

    fn rates(lt: f64, la: f64, ls: f64) -> ParameterVector {
        ParameterVector {
            lambda_t: lt,
            lambda_a: la,
            lambda_sigma: ls,
            ..Default::default()
        }
    }

    #[test]
    fn source_examples() {
        assert_eq!(source_terms(0.0, 1.0, &ParameterVector::default()), (0.0, 0.0));
        let (st, ss) = source_terms(1.0, 1.0, &rates(1.0, 0.01, 1.0));
        assert!((st + 0.01).abs() < 1e-15);
        assert!((ss + 1.0).abs() < 1e-15);
        let (st, ss) = source_terms(0.5, 1.0, &rates(1.0, 0.0, 0.0));
        assert!((st - 0.25).abs() < 1e-15);
        assert_eq!(ss, 0.0);
    }

    #[test]
    fn velocity_source_scales_gradient() {
        let s = SourceModel::from_params(&ParameterVector::default());
        assert_eq!(s.velocity(0.5, 1.0, [2.0, -1.0]), [2.0, -1.0]);
    }

    proptest! {
        #[test]
        fn cutoff_is_idempotent_and_lipschitz(x in -10.0f64..10.0, y in -10.0f64..10.0) {
            let c = cutoff(x);
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert_eq!(cutoff(c), c);
            prop_assert!((cutoff(x) - cutoff(y)).abs() <= (x - y).abs());
            if (0.0..=1.0).contains(&x) {
                prop_assert_eq!(c, x);
            }
        }

        #[test]
        fn pure_growth_is_nonnegative(phi_t in -2.0f64..3.0, phi_s in 0.0f64..2.0, lt in 0.0f64..2.0) {
            let (st, ss) = source_terms(phi_t, phi_s, &rates(lt, 0.0, 0.0));
            prop_assert!(st >= 0.0);
            prop_assert_eq!(ss, 0.0);
        }
    }
}
