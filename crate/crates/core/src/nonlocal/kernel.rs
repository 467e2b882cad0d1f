//! Radially symmetric interaction kernels.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    /// `A exp(-|x|^2 / 2 s^2)` truncated at `|x| = 4 s`.
    Gaussian,
    /// `k^(d+2) 1{|k x| <= 1}`.
    Indicator,
}

/// An even kernel `J(x) = j(|x|)` on `R^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    kind: KernelKind,
    dim: usize,
    amplitude: f64,
    /// Gaussian: standard deviation `s`. Indicator: support radius `1/k`.
    width: f64,
}

impl Kernel {
    pub fn gaussian(dim: usize, amplitude: f64, width: f64) -> Result<Self> {
        Self::new(KernelKind::Gaussian, dim, amplitude, width)
    }

    /// Rescaled indicator with scale `k`.
    pub fn indicator(dim: usize, k: f64) -> Result<Self> {
        Self::new(KernelKind::Indicator, dim, k.powi(dim as i32 + 2), 1.0 / k)
    }

    /// Gaussian whose second moment matches the local gradient energy,
    /// i.e. `(1/2) int J z_1^2 = eps^2`.
    pub fn gaussian_matching(dim: usize, eps: f64, width: f64) -> Result<Self> {
        let unit = Self::gaussian(dim, 1.0, width)?;
        Self::gaussian(dim, eps * eps / unit.gradient_coefficient(), width)
    }

    fn new(kind: KernelKind, dim: usize, amplitude: f64, width: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Config(format!("kernel dimension must be 1, 2 or 3, got {dim}")));
        }
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::Config(format!("kernel width must be positive and finite, got {width}")));
        }
        if !amplitude.is_finite() || amplitude < 0.0 {
            return Err(Error::Config(format!("kernel amplitude must be finite and nonnegative, got {amplitude}")));
        }
        Ok(Self {
            kind,
            dim,
            amplitude,
            width,
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn support_radius(&self) -> f64 {
        match self.kind {
            KernelKind::Gaussian => 4.0 * self.width,
            KernelKind::Indicator => self.width,
        }
    }

    /// Radial profile `j(r)`.
    pub fn profile(&self, r: f64) -> f64 {
        if r > self.support_radius() {
            return 0.0;
        }
        match self.kind {
            KernelKind::Gaussian => self.amplitude * (-0.5 * r * r / (self.width * self.width)).exp(),
            KernelKind::Indicator => self.amplitude,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.profile(x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// `int_{R^d} j(|x|) |x|^p dx` by Gauss-Legendre on the support.
    fn radial_moment(&self, p: i32) -> f64 {
        let surface = match self.dim {
            1 => 2.0,
            2 => 2.0 * PI,
            _ => 4.0 * PI,
        };
        let rs = self.support_radius();
        let panels = 64;
        let h = rs / panels as f64;
        let mut total = 0.0;
        for k in 0..panels {
            let a = k as f64 * h;
            for (x, w) in GL8 {
                let r = a + 0.5 * h * (1.0 + x);
                total += 0.5 * h * w * self.profile(r) * r.powi(self.dim as i32 - 1 + p);
            }
        }
        surface * total
    }

    /// `|J|_{L^1}`.
    pub fn l1_norm(&self) -> f64 {
        self.radial_moment(0)
    }

    /// `c = (1/2) int J(z) z_1^2 dz`, the coefficient of `-Delta` in the
    /// small-width expansion of `phi (J*1) - J*phi`.
    pub fn gradient_coefficient(&self) -> f64 {
        self.radial_moment(2) / (2.0 * self.dim as f64)
    }

    /// `int_{S^{d-1}} J(|x - rho w|) dS(w)` for `|x| = r`, the angular part
    /// of a convolution of radial functions. In 1D this is just
    /// `J(|r - rho|)` with `r, rho` Cartesian coordinates.
    pub fn shell_integral(&self, r: f64, rho: f64) -> f64 {
        let rs = self.support_radius();
        match self.dim {
            1 => self.profile((r - rho).abs()),
            _ => {
                if (r - rho).abs() > rs {
                    return 0.0;
                }
                let rr = r * rho;
                // cos(angle) must exceed c for the pair to interact
                let c = if rr > 0.0 {
                    ((r * r + rho * rho - rs * rs) / (2.0 * rr)).clamp(-1.0, 1.0)
                } else {
                    -1.0
                };
                let dist = |u: f64| (r * r + rho * rho - 2.0 * rr * u).max(0.0).sqrt();
                if self.dim == 2 {
                    let theta_max = c.acos();
                    match self.kind {
                        KernelKind::Indicator => 2.0 * theta_max * self.amplitude,
                        KernelKind::Gaussian => {
                            let mut s = 0.0;
                            for (x, w) in GL16 {
                                let th = 0.5 * theta_max * (1.0 + x);
                                s += w * self.profile(dist(th.cos()));
                            }
                            2.0 * 0.5 * theta_max * s
                        }
                    }
                } else {
                    let len = 1.0 - c;
                    match self.kind {
                        KernelKind::Indicator => 2.0 * PI * len * self.amplitude,
                        KernelKind::Gaussian => {
                            let mut s = 0.0;
                            for (x, w) in GL16 {
                                let u = c + 0.5 * len * (1.0 + x);
                                s += w * self.profile(dist(u));
                            }
                            2.0 * PI * 0.5 * len * s
                        }
                    }
                }
            }
        }
    }
}

const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

const GL16: [(f64, f64); 16] = [
    (-0.989_400_934_991_649_9, 0.027_152_459_411_754_095),
    (-0.944_575_023_073_232_6, 0.062_253_523_938_647_89),
    (-0.865_631_202_387_831_7, 0.095_158_511_682_492_78),
    (-0.755_404_408_355_003_0, 0.124_628_971_255_533_87),
    (-0.617_876_244_402_643_7, 0.149_595_988_816_576_73),
    (-0.458_016_777_657_227_4, 0.169_156_519_395_002_54),
    (-0.281_603_550_779_258_9, 0.182_603_415_044_923_6),
    (-0.095_012_509_837_637_44, 0.189_450_610_455_068_5),
    (0.095_012_509_837_637_44, 0.189_450_610_455_068_5),
    (0.281_603_550_779_258_9, 0.182_603_415_044_923_6),
    (0.458_016_777_657_227_4, 0.169_156_519_395_002_54),
    (0.617_876_244_402_643_7, 0.149_595_988_816_576_73),
    (0.755_404_408_355_003_0, 0.124_628_971_255_533_87),
    (0.865_631_202_387_831_7, 0.095_158_511_682_492_78),
    (0.944_575_023_073_232_6, 0.062_253_523_938_647_89),
    (0.989_400_934_991_649_9, 0.027_152_459_411_754_095),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_norms_match_closed_forms() {
        let k = Kernel::indicator(1, 5.0).unwrap();
        assert!((k.l1_norm() - 2.0 * 25.0).abs() < 1e-10);
        assert!((k.gradient_coefficient() - 1.0 / 3.0).abs() < 1e-12);
        let k = Kernel::indicator(2, 4.0).unwrap();
        assert!((k.gradient_coefficient() - PI / 8.0).abs() < 1e-12);
        let s: f64 = 0.02;
        let g = Kernel::gaussian(2, 3.0, s).unwrap();
        let exact = 3.0 * 2.0 * PI * s * s * (1.0 - (-8.0f64).exp());
        assert!((g.l1_norm() - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn matching_gaussian_reproduces_eps_squared() {
        let g = Kernel::gaussian_matching(2, 0.01, 0.01).unwrap();
        assert!((g.gradient_coefficient() - 1e-4).abs() < 1e-14);
        // untruncated second moment gives A pi s^4; truncation is tiny
        assert!((g.amplitude() * PI * 1e-8 / 1e-4 - 1.0).abs() < 1e-2);
    }

    #[test]
    fn kernels_are_even() {
        let g = Kernel::gaussian(2, 1.0, 0.1).unwrap();
        for x in [[0.01, 0.2], [0.3, -0.1], [-0.05, 0.0]] {
            assert_eq!(g.eval(&x), g.eval(&[-x[0], -x[1]]));
        }
    }

    #[test]
    fn shell_integral_of_indicator_matches_gaussian_quadrature_limit() {
        // full circle inside support: 2 pi * amplitude
        let k = Kernel::indicator(2, 2.0).unwrap();
        assert!((k.shell_integral(0.1, 0.1) - 2.0 * PI * 16.0).abs() < 1e-12);
        assert_eq!(k.shell_integral(0.0, 0.6), 0.0);
        // Gaussian shell at r = 0 is 2 pi j(rho)
        let g = Kernel::gaussian(2, 1.0, 0.1).unwrap();
        assert!((g.shell_integral(0.0, 0.05) - 2.0 * PI * g.profile(0.05)).abs() < 1e-12);
    }

    #[test]
    fn invalid_kernels_are_rejected() {
        assert!(Kernel::gaussian(2, 1.0, 0.0).is_err());
        assert!(Kernel::gaussian(2, 1.0, f64::INFINITY).is_err());
        assert!(Kernel::gaussian(4, 1.0, 0.1).is_err());
    }
}
