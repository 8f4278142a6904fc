//! Bivariate copulas on the unit square.
//!
//! [`Copula`] is the extension point; [`CopulaModel`] ships the product
//! (independence) copula and the Farlie-Gumbel-Morgenstern family
//! C(u1, u2) = u1 u2 (1 + theta (1 - u1)(1 - u2)), theta in [-1, 1].

use rand::Rng;

use crate::error::{domain, Error, Result};

/// A two-dimensional copula. Implementations provide the closed-form pieces;
/// the survival copula and sampling by conditional inversion are derived.
pub trait Copula {
    /// C(u1, u2) for (u1, u2) in the unit square; inputs are assumed valid.
    fn cdf_unchecked(&self, u1: f64, u2: f64) -> f64;

    /// c(u1, u2) = d^2 C / du1 du2.
    fn density_unchecked(&self, u1: f64, u2: f64) -> f64;

    /// dC/du1 at (u1, u2): the law of U2 given U1 = u1.
    fn conditional_cdf_unchecked(&self, u2: f64, u1: f64) -> f64;

    /// Inverse of `conditional_cdf_unchecked` in u2.
    fn conditional_quantile_unchecked(&self, t: f64, u1: f64) -> f64;

    fn cdf(&self, u1: f64, u2: f64) -> Result<f64> {
        check_unit("copula cdf", u1, u2)?;
        Ok(self.cdf_unchecked(u1, u2))
    }

    fn density(&self, u1: f64, u2: f64) -> Result<f64> {
        check_unit("copula density", u1, u2)?;
        Ok(self.density_unchecked(u1, u2))
    }

    fn conditional_cdf(&self, u2: f64, u1: f64) -> Result<f64> {
        check_unit("conditional cdf", u1, u2)?;
        Ok(self.conditional_cdf_unchecked(u2, u1))
    }

    fn conditional_quantile(&self, t: f64, u1: f64) -> Result<f64> {
        check_unit("conditional quantile", u1, t)?;
        Ok(self.conditional_quantile_unchecked(t, u1))
    }

    /// Survival copula u1 + u2 - 1 + C(1 - u1, 1 - u2).
    fn survival_cdf(&self, u1: f64, u2: f64) -> Result<f64> {
        check_unit("survival copula cdf", u1, u2)?;
        Ok(u1 + u2 - 1.0 + self.cdf_unchecked(1.0 - u1, 1.0 - u2))
    }

    /// Draw (u1, u2) by conditional inversion: u1 uniform, u2 = C^{-1}(t | u1).
    fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64)
    where
        Self: Sized,
    {
        let u1 = open_unit(rng);
        let t = open_unit(rng);
        (u1, self.conditional_quantile_unchecked(t, u1))
    }
}

/// Uniform draw on the open interval (0, 1).
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // 53 random bits shifted off zero by half an ulp of the grid.
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn check_unit(func: &'static str, a: f64, b: f64) -> Result<()> {
    if (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b) {
        Ok(())
    } else {
        Err(domain(func, format!("({a}, {b}) outside the unit square")))
    }
}

/// Copula families shipped with the library.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CopulaModel {
    Product,
    Fgm { theta: f64 },
}

impl CopulaModel {
    pub fn fgm(theta: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&theta) {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: theta,
                reason: "FGM dependence parameter must lie in [-1, 1]",
            });
        }
        Ok(Self::Fgm { theta })
    }

    /// Dependence parameter; the product copula reports 0.
    pub fn theta(&self) -> f64 {
        match *self {
            Self::Product => 0.0,
            Self::Fgm { theta } => theta,
        }
    }
}

impl Copula for CopulaModel {
    fn cdf_unchecked(&self, u1: f64, u2: f64) -> f64 {
        u1 * u2 * (1.0 + self.theta() * (1.0 - u1) * (1.0 - u2))
    }

    fn density_unchecked(&self, u1: f64, u2: f64) -> f64 {
        1.0 + self.theta() * (1.0 - 2.0 * u1) * (1.0 - 2.0 * u2)
    }

    fn conditional_cdf_unchecked(&self, u2: f64, u1: f64) -> f64 {
        let a = self.theta() * (1.0 - 2.0 * u1);
        u2 * (1.0 + a * (1.0 - u2))
    }

    fn conditional_quantile_unchecked(&self, t: f64, u1: f64) -> f64 {
        let a = self.theta() * (1.0 - 2.0 * u1);
        if a == 0.0 {
            return t;
        }
        // Root in [0, 1] of a u^2 - (1 + a) u + t = 0, written without cancellation.
        let b = 1.0 + a;
        let disc = (b * b - 4.0 * a * t).max(0.0);
        2.0 * t / (b + disc.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadOptions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    const THETAS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

    fn grid() -> impl Iterator<Item = f64> {
        (0..=100).map(|i| i as f64 / 100.0)
    }

    #[test]
    fn examples() {
        let c1 = CopulaModel::fgm(1.0).unwrap();
        assert_eq!(CopulaModel::fgm(0.0).unwrap().cdf(0.3, 0.6).unwrap(), 0.18);
        assert_eq!(c1.cdf(0.5, 0.5).unwrap(), 0.3125);
        assert_eq!(c1.density(0.0, 0.0).unwrap(), 2.0);
        assert_eq!(CopulaModel::fgm(0.5).unwrap().density(0.25, 0.75).unwrap(), 0.875);
        assert_eq!(c1.conditional_cdf(0.5, 0.0).unwrap(), 0.75);
        assert_eq!(c1.conditional_quantile(0.75, 0.0).unwrap(), 0.5);
        assert_eq!(CopulaModel::fgm(-1.0).unwrap().conditional_quantile(0.3, 0.5).unwrap(), 0.3);
        for &u in &[0.0, 0.2, 0.9, 1.0] {
            assert_eq!(c1.cdf(u, 1.0).unwrap(), u);
            assert_eq!(c1.conditional_cdf(1.0, u).unwrap(), 1.0);
        }
    }

    #[test]
    fn quadrant_mass_matches_double_integral_of_density() {
        let c = CopulaModel::fgm(1.0).unwrap();
        let opts = QuadOptions::tolerances(1e-13, 1e-13);
        let mass = integrate(
            |u1| integrate(|u2| c.density_unchecked(u1, u2), 0.0, 0.5, opts).unwrap().value,
            0.0,
            0.5,
            opts,
        )
        .unwrap()
        .value;
        assert!((mass - 0.3125).abs() < 1e-12);
    }

    #[test]
    fn density_is_mixed_partial() {
        let h = 1e-5;
        for &theta in &THETAS {
            let c = CopulaModel::fgm(theta).unwrap();
            for &(u1, u2) in &[(0.25, 0.75), (0.1, 0.1), (0.6, 0.3), (0.5, 0.9)] {
                let fd = (c.cdf_unchecked(u1 + h, u2 + h) - c.cdf_unchecked(u1 + h, u2 - h)
                    - c.cdf_unchecked(u1 - h, u2 + h)
                    + c.cdf_unchecked(u1 - h, u2 - h))
                    / (4.0 * h * h);
                assert!((fd - c.density_unchecked(u1, u2)).abs() < 1e-6);
                let fd1 = (c.cdf_unchecked(u1 + h, u2) - c.cdf_unchecked(u1 - h, u2)) / (2.0 * h);
                assert!((fd1 - c.conditional_cdf_unchecked(u2, u1)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn survival_copula_is_self_dual() {
        for &theta in &THETAS {
            let c = CopulaModel::fgm(theta).unwrap();
            for u1 in grid().step_by(5) {
                for u2 in grid().step_by(5) {
                    let s = c.survival_cdf(u1, u2).unwrap();
                    assert!((s - c.cdf(u1, u2).unwrap()).abs() < 1e-15);
                }
            }
        }
        assert_eq!(CopulaModel::Product.survival_cdf(1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn product_equals_zero_theta() {
        let p = CopulaModel::Product;
        let f = CopulaModel::fgm(0.0).unwrap();
        for u1 in grid().step_by(7) {
            for u2 in grid().step_by(3) {
                assert_eq!(p.cdf_unchecked(u1, u2), f.cdf_unchecked(u1, u2));
                assert_eq!(
                    p.conditional_quantile_unchecked(u2, u1),
                    f.conditional_quantile_unchecked(u2, u1)
                );
            }
        }
    }

    #[test]
    fn domain_errors() {
        let c = CopulaModel::fgm(0.5).unwrap();
        assert!(c.cdf(-0.1, 0.5).is_err());
        assert!(c.density(0.5, 1.1).is_err());
        assert!(c.conditional_quantile(0.5, f64::NAN).is_err());
        assert!(CopulaModel::fgm(1.5).is_err());
    }

    #[test]
    fn sampled_spearman_rho_is_theta_over_three() {
        let c = CopulaModel::fgm(1.0).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let n = 200_000;
        // For uniform margins Spearman's rho is 12 E[U1 U2] - 3.
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..n {
            let (u1, u2) = c.sample_pair(&mut rng);
            let v = 12.0 * u1 * u2 - 3.0;
            acc += v;
            acc2 += v * v;
        }
        let mean = acc / n as f64;
        let se = ((acc2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 1.0 / 3.0).abs() < 4.0 * se, "{mean} +/- {se}");
    }
}
