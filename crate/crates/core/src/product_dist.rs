//! Distribution of the end-to-end SNR gamma_D = gamma_hat_D * g_SR * g_RD when
//! the two fading powers are coupled by a copula.
//!
//! Two independent routes are provided:
//!
//! * [`EndToEndSnrModel::product_cdf_general`] integrates the conditional
//!   copula law over g_SR. It works for any copula and any shapes.
//! * [`EndToEndSnrModel::snr_cdf_closed`] / [`EndToEndSnrModel::snr_pdf_closed`]
//!   are finite Bessel-K expansions valid for the FGM copula with a common
//!   integer m and unit mean powers.

use std::f64::consts::{LN_2, PI};

use crate::copula::{Copula, CopulaModel};
use crate::error::{domain, Error, Result};
use crate::fading::NakagamiPower;
use crate::quad::{integrate, QuadOptions};
use crate::specfun::bessel::BesselKTable;
use crate::specfun::gamma::{beta, ln_gamma};

/// Slack within which a closed-form CDF outside [0, 1] is clamped.
const CLAMP_SLACK: f64 = 1e-9;

/// gamma_D = snr_scale * g_SR * g_RD with a copula on (g_SR, g_RD).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndToEndSnrModel {
    pub snr_scale: f64,
    pub marginal_sr: NakagamiPower,
    pub marginal_rd: NakagamiPower,
    pub copula: CopulaModel,
}

/// Coefficient families of the closed-form CDF, PDF and RD capacity.
///
/// Arrays are indexed from 0 to m - 1. Fields are public so callers can
/// inspect them, and so tests can perturb one entry and watch the
/// cross-checks catch it.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormCoefficients {
    pub m: usize,
    pub snr_scale: f64,
    /// 2 m^{2m} / (gamma_hat^m Gamma(m)^2)
    pub big_b: f64,
    /// 2 m / sqrt(gamma_hat)
    pub zeta: f64,
    pub a: Vec<f64>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<Vec<Vec<f64>>>,
    pub q: Vec<f64>,
    pub t: Vec<Vec<f64>>,
    pub w: Vec<f64>,
    pub z: Vec<Vec<f64>>,
    /// 2^{2m-2} B / (pi zeta^{2m} ln 2)
    pub big_d: f64,
}

fn ln_factorial(k: usize) -> f64 {
    ln_gamma(k as f64 + 1.0).expect("positive argument")
}

impl ClosedFormCoefficients {
    pub fn new(m: u32, snr_scale: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter {
                name: "m",
                value: 0.0,
                reason: "closed forms need an integer m >= 1",
            });
        }
        if !(snr_scale > 0.0) || !snr_scale.is_finite() {
            return Err(Error::InvalidParameter {
                name: "snr_scale",
                value: snr_scale,
                reason: "SNR scale must be positive and finite",
            });
        }
        let mu = m as usize;
        let mf = m as f64;
        let ln_m = mf.ln();
        let ln_g = snr_scale.ln();
        // ln(m^j / gamma_hat^{j/2}) shared by every family
        let lp = |j: usize| j as f64 * (ln_m - 0.5 * ln_g);
        let lf = ln_factorial;

        let ln_gm = ln_gamma(mf)?;
        let big_b = (LN_2 + 2.0 * mf * ln_m - mf * ln_g - 2.0 * ln_gm).exp();
        let zeta = 2.0 * mf / snr_scale.sqrt();

        let a = (0..mu).map(|n| (lp(n) - lf(n)).exp()).collect();
        let b = (0..mu)
            .map(|k| {
                (0..mu)
                    .map(|n| {
                        (lp(k + n) + 0.5 * (n as f64 - k as f64 - mf + 2.0) * LN_2 - lf(k) - lf(n)).exp()
                    })
                    .collect()
            })
            .collect();
        let c = (0..mu)
            .map(|n| {
                (0..mu)
                    .map(|l| (lp(l + n) + 0.5 * (mf - l as f64 - n as f64) * LN_2 - lf(n) - lf(l)).exp())
                    .collect()
            })
            .collect();
        let d = (0..mu)
            .map(|k| {
                (0..mu)
                    .map(|n| {
                        (0..mu)
                            .map(|l| (LN_2 + lp(k + n + l) - lf(k) - lf(n) - lf(l)).exp())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let q = (0..mu)
            .map(|k| ((2.0 - 0.5 * k as f64) * LN_2 + lp(k) - lf(k)).exp())
            .collect();
        let t = (0..mu)
            .map(|k| (0..mu).map(|n| (2.0 * LN_2 + lp(k + n) - lf(k) - lf(n)).exp()).collect())
            .collect();
        let ln_zeta = zeta.ln();
        let w = (0..mu)
            .map(|k| ((2.0 - mf) * LN_2 + lp(k) - k as f64 * ln_zeta - lf(k)).exp())
            .collect();
        let z = (0..mu)
            .map(|k| {
                (0..mu)
                    .map(|n| {
                        ((2.0 - 2.0 * mf) * LN_2 + lp(k + n) - (k + n) as f64 * ln_zeta - lf(k) - lf(n)).exp()
                    })
                    .collect()
            })
            .collect();
        let big_d = ((2.0 * mf - 2.0) * LN_2 + big_b.ln() - PI.ln() - 2.0 * mf * ln_zeta - LN_2.ln()).exp();

        Ok(Self {
            m: mu,
            snr_scale,
            big_b,
            zeta,
            a,
            b,
            c,
            d,
            q,
            t,
            w,
            z,
            big_d,
        })
    }
}

/// sign(c) * exp(ln|c| + power * ln y + ln K)
fn term(coef: f64, power: f64, ln_y: f64, ln_k: f64) -> f64 {
    if coef == 0.0 {
        return 0.0;
    }
    coef.signum() * (coef.abs().ln() + power * ln_y + ln_k).exp()
}

impl EndToEndSnrModel {
    pub fn new(
        snr_scale: f64,
        marginal_sr: NakagamiPower,
        marginal_rd: NakagamiPower,
        copula: CopulaModel,
    ) -> Result<Self> {
        if !(snr_scale > 0.0) || !snr_scale.is_finite() {
            return Err(Error::InvalidParameter {
                name: "snr_scale",
                value: snr_scale,
                reason: "SNR scale must be positive and finite",
            });
        }
        Ok(Self {
            snr_scale,
            marginal_sr,
            marginal_rd,
            copula,
        })
    }

    /// Common m, unit means, FGM or product copula.
    pub fn fgm_nakagami(snr_scale: f64, m: f64, theta: f64) -> Result<Self> {
        let g = NakagamiPower::normalized(m)?;
        Self::new(snr_scale, g, g, CopulaModel::fgm(theta)?)
    }

    fn check_y(func: &'static str, y: f64) -> Result<()> {
        if y >= 0.0 {
            Ok(())
        } else {
            Err(domain(func, format!("SNR y = {y} must be non-negative")))
        }
    }

    /// Integer m when the closed forms apply, otherwise the reason they do not.
    pub fn closed_form_m(&self) -> Result<u32> {
        let (sr, rd) = (self.marginal_sr, self.marginal_rd);
        if sr.m() != rd.m() {
            return Err(Error::UnsupportedClosedForm(format!(
                "unequal fading shapes m_SR = {}, m_RD = {}",
                sr.m(),
                rd.m()
            )));
        }
        let m = sr.integer_m().ok_or_else(|| {
            Error::UnsupportedClosedForm(format!("non-integer fading shape m = {}", sr.m()))
        })?;
        if sr.mean_power() != 1.0 || rd.mean_power() != 1.0 {
            return Err(Error::UnsupportedClosedForm(
                "mean fading powers must be 1; fold them into the SNR scale".into(),
            ));
        }
        Ok(m)
    }

    pub fn coefficients(&self) -> Result<ClosedFormCoefficients> {
        ClosedFormCoefficients::new(self.closed_form_m()?, self.snr_scale)
    }

    /// F(y) by integrating the conditional copula law over g_SR:
    /// F(y) = int f_SR(g) dC/du(F_SR(g), F_RD(w / g)) dg, w = y / snr_scale.
    pub fn product_cdf_general(&self, y: f64) -> Result<f64> {
        Self::check_y("product_cdf_general", y)?;
        if y == 0.0 {
            return Ok(0.0);
        }
        if y.is_infinite() {
            return Ok(1.0);
        }
        let w = y / self.snr_scale;
        let sr = self.marginal_sr;
        let rd = self.marginal_rd;
        // Integrate over s = ln g; f(g) g ds is the law of ln g_SR.
        let lo = sr.quantile(1e-18)?.ln();
        let hi = sr.survival_quantile(1e-18)?.ln();
        let integrand = |s: f64| {
            let g = s.exp();
            let density = sr.pdf(g).unwrap_or(0.0) * g;
            if density == 0.0 {
                return 0.0;
            }
            let u1 = sr.cdf(g).unwrap_or(0.0);
            let u2 = rd.cdf(w / g).unwrap_or(1.0);
            density * self.copula.conditional_cdf_unchecked(u2, u1)
        };
        let opts = QuadOptions::tolerances(1e-13, 1e-12);
        let split = w.ln().clamp(lo, hi);
        let left = integrate(integrand, lo, split, opts)?;
        let right = integrate(integrand, split, hi, opts)?;
        Ok((left.value + right.value).clamp(0.0, 1.0))
    }

    /// 1 - F(y) from the closed-form Bessel expansion.
    pub fn snr_survival_closed(&self, y: f64) -> Result<f64> {
        Self::check_y("snr_survival_closed", y)?;
        let coef = self.coefficients()?;
        survival_with(&coef, self.copula.theta(), y)
    }

    /// Closed-form CDF. Values outside [0, 1] by more than 1e-9 are errors.
    pub fn snr_cdf_closed(&self, y: f64) -> Result<f64> {
        Self::check_y("snr_cdf_closed", y)?;
        let coef = self.coefficients()?;
        cdf_with(&coef, self.copula.theta(), y)
    }

    /// Closed-form PDF.
    pub fn snr_pdf_closed(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(domain("snr_pdf_closed", format!("SNR y = {y} must be positive")));
        }
        let coef = self.coefficients()?;
        pdf_with(&coef, self.copula.theta(), y)
    }
}

/// Closed-form survival 1 - F(y) for explicit coefficients.
pub fn survival_with(coef: &ClosedFormCoefficients, theta: f64, y: f64) -> Result<f64> {
    if y == 0.0 {
        return Ok(1.0);
    }
    if y.is_infinite() {
        return Ok(0.0);
    }
    let m = coef.m;
    let mf = m as f64;
    let ln_y = y.ln();
    let sy = y.sqrt();
    let k1 = BesselKTable::new(2 * m, coef.zeta * sy)?;
    let k2 = BesselKTable::new(2 * m, coef.zeta * (2.0 * y).sqrt())?;
    let k4 = BesselKTable::new(2 * m, 2.0 * coef.zeta * sy)?;
    let mi = m as i64;

    let mut base = 0.0;
    for n in 0..m {
        base += term(coef.a[n], 0.5 * (mf + n as f64), ln_y, k1.ln_k(n as i64 - mi));
    }
    let mut dep = base;
    for k in 0..m {
        for n in 0..m {
            dep -= term(
                coef.b[k][n],
                0.5 * (k + n + m) as f64,
                ln_y,
                k2.ln_k(n as i64 - k as i64 - mi),
            );
        }
    }
    for n in 0..m {
        for l in 0..m {
            dep -= term(
                coef.c[n][l],
                0.5 * (l + m + n) as f64,
                ln_y,
                k2.ln_k(l as i64 - mi + n as i64),
            );
        }
    }
    for k in 0..m {
        for n in 0..m {
            for l in 0..m {
                dep += term(
                    coef.d[k][n][l],
                    0.5 * (k + n + l + m) as f64,
                    ln_y,
                    k4.ln_k(n as i64 + l as i64 - k as i64 - mi),
                );
            }
        }
    }
    Ok((2.0 * coef.big_b).sqrt() * (base + theta * dep))
}

/// Closed-form CDF for explicit coefficients, with the 1e-9 clamp rule.
pub fn cdf_with(coef: &ClosedFormCoefficients, theta: f64, y: f64) -> Result<f64> {
    let f = 1.0 - survival_with(coef, theta, y)?;
    if (-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&f) {
        Ok(f.clamp(0.0, 1.0))
    } else {
        Err(Error::ClosedFormRange(f))
    }
}

/// Closed-form PDF for explicit coefficients.
pub fn pdf_with(coef: &ClosedFormCoefficients, theta: f64, y: f64) -> Result<f64> {
    let m = coef.m;
    let mf = m as f64;
    let ln_y = y.ln();
    let sy = y.sqrt();
    let k1 = BesselKTable::new(0, coef.zeta * sy)?;
    let k2 = BesselKTable::new(m, coef.zeta * (2.0 * y).sqrt())?;
    let k4 = BesselKTable::new(m, 2.0 * coef.zeta * sy)?;

    let base = term(1.0, mf - 1.0, ln_y, k1.ln_k(0));
    let mut dep = base;
    for k in 0..m {
        dep -= term(coef.q[k], 0.5 * k as f64 + mf - 1.0, ln_y, k2.ln_k(k as i64));
    }
    for k in 0..m {
        for n in 0..m {
            dep += term(
                coef.t[k][n],
                0.5 * (k + n) as f64 + mf - 1.0,
                ln_y,
                k4.ln_k(n as i64 - k as i64),
            );
        }
    }
    Ok(coef.big_b * (base + theta * dep))
}

/// E[g_SR g_RD] for unit-mean Nakagami-m powers under the FGM copula:
/// 1 + theta (1 - f(m)).
pub fn mean_snr_factor(m: u32, theta: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter {
            name: "m",
            value: 0.0,
            reason: "m must be a positive integer",
        });
    }
    if !(-1.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter {
            name: "theta",
            value: theta,
            reason: "FGM dependence parameter must lie in [-1, 1]",
        });
    }
    Ok(1.0 + theta * (1.0 - mean_factor_f(m)?))
}

/// f(m) = sum_k 2^{-(m+k-1)} / (m B(m,k+1))
///        - sum_{k,n} 2^{-(2m+k+n)} / (m^2 B(m,k+1) B(m,n+1))
pub fn mean_factor_f(m: u32) -> Result<f64> {
    let mf = m as f64;
    let mut single = 0.0;
    let mut inv_b = Vec::with_capacity(m as usize);
    for k in 0..m {
        let ib = 1.0 / beta(mf, k as f64 + 1.0)?;
        inv_b.push(ib);
        single += 2f64.powf(-(mf + k as f64 - 1.0)) * ib / mf;
    }
    let mut double = 0.0;
    for (k, ibk) in inv_b.iter().enumerate() {
        for (n, ibn) in inv_b.iter().enumerate() {
            double += 2f64.powf(-(2.0 * mf + (k + n) as f64)) * ibk * ibn / (mf * mf);
        }
    }
    Ok(single - double)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_to_infinity;
    use crate::specfun::bessel::bessel_k;

    fn model(g: f64, m: f64, theta: f64) -> EndToEndSnrModel {
        EndToEndSnrModel::fgm_nakagami(g, m, theta).unwrap()
    }

    #[test]
    fn independent_exponential_product() {
        let want = 1.0 - 2.0 * bessel_k(1.0, 2.0).unwrap();
        let md = model(1.0, 1.0, 0.0);
        assert!((md.product_cdf_general(1.0).unwrap() - want).abs() < 1e-10);
        assert!((md.snr_cdf_closed(1.0).unwrap() - want).abs() < 1e-13);
        assert!((want - 0.7202).abs() < 1e-4);
        assert!((md.snr_pdf_closed(1.0).unwrap() - 2.0 * bessel_k(0.0, 2.0).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn closed_matches_general_examples() {
        let md = model(1.0, 1.0, 1.0);
        assert!((md.snr_cdf_closed(1.0).unwrap() - md.product_cdf_general(1.0).unwrap()).abs() < 1e-9);
        let md = model(5.0, 2.0, -1.0);
        assert!((md.snr_cdf_closed(2.0).unwrap() - md.product_cdf_general(2.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn limits() {
        for m in 1..=3 {
            let md = model(3.0, m as f64, 0.5);
            assert_eq!(md.product_cdf_general(0.0).unwrap(), 0.0);
            assert_eq!(md.snr_cdf_closed(0.0).unwrap(), 0.0);
            assert!((1.0 - md.snr_cdf_closed(3e4).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn pdf_is_derivative_of_cdf() {
        let md = model(3.0, 2.0, 0.5);
        let (y, h) = (1.5, 1e-4);
        let fd = (md.snr_cdf_closed(y + h).unwrap() - md.snr_cdf_closed(y - h).unwrap()) / (2.0 * h);
        assert!((fd - md.snr_pdf_closed(y).unwrap()).abs() < 1e-5);
    }

    #[test]
    fn pdf_normalizes() {
        for m in 1..=3 {
            for &theta in &[-1.0, 0.0, 1.0] {
                let md = model(2.0, m as f64, theta);
                let r = integrate_to_infinity(
                    |y| if y > 0.0 { md.snr_pdf_closed(y).unwrap() } else { 0.0 },
                    0.0,
                    2.0,
                    QuadOptions::tolerances(1e-10, 1e-10),
                )
                .unwrap();
                assert!((r.value - 1.0).abs() < 1e-7, "m={m} theta={theta}: {}", r.value);
            }
        }
    }

    #[test]
    fn closed_form_restrictions() {
        let half = model(1.0, 1.5, 0.0);
        assert!(matches!(half.snr_cdf_closed(1.0), Err(Error::UnsupportedClosedForm(_))));
        assert!(half.product_cdf_general(1.0).is_ok());
        let g1 = NakagamiPower::normalized(1.0).unwrap();
        let g2 = NakagamiPower::normalized(2.0).unwrap();
        let uneq = EndToEndSnrModel::new(1.0, g1, g2, CopulaModel::Product).unwrap();
        assert!(matches!(uneq.snr_pdf_closed(1.0), Err(Error::UnsupportedClosedForm(_))));
        let scaled = EndToEndSnrModel::new(1.0, NakagamiPower::new(1.0, 2.0).unwrap(), g1, CopulaModel::Product)
            .unwrap();
        assert!(scaled.snr_cdf_closed(1.0).is_err());
    }

    #[test]
    fn perturbed_coefficient_leaves_unit_interval_or_disagrees() {
        let md = model(1.0, 2.0, 1.0);
        let mut coef = md.coefficients().unwrap();
        coef.d[1][1][1] *= 50.0;
        let general = md.product_cdf_general(0.5).unwrap();
        match cdf_with(&coef, 1.0, 0.5) {
            Ok(v) => assert!((v - general).abs() > 1e-6),
            Err(e) => assert!(matches!(e, Error::ClosedFormRange(_))),
        }
    }

    #[test]
    fn coefficients_are_positive() {
        for m in 1..=4 {
            let c = ClosedFormCoefficients::new(m, 7.0).unwrap();
            assert_eq!(c.a.len(), m as usize);
            assert!(c.a.iter().chain(c.q.iter()).chain(c.w.iter()).all(|&v| v > 0.0));
            assert!(c.b.iter().chain(c.c.iter()).chain(c.t.iter()).chain(c.z.iter()).flatten().all(|&v| v > 0.0));
            assert!(c.d.iter().flatten().flatten().all(|&v| v > 0.0));
            assert!(c.big_b > 0.0 && c.big_d > 0.0 && c.zeta > 0.0);
        }
    }

    /// E[g1 g2] - 1 = theta (int g (1 - 2F(g)) f(g) dg)^2 for unit means.
    fn mean_factor_oracle(m: f64, theta: f64) -> f64 {
        let g = NakagamiPower::normalized(m).unwrap();
        let r = integrate_to_infinity(
            |x| x * (1.0 - 2.0 * g.cdf(x).unwrap()) * g.pdf(x).unwrap(),
            0.0,
            1.0,
            QuadOptions::tolerances(1e-14, 1e-13),
        )
        .unwrap();
        1.0 + theta * r.value * r.value
    }

    #[test]
    fn mean_factor_examples() {
        assert_eq!(mean_snr_factor(3, 0.0).unwrap(), 1.0);
        assert!((mean_snr_factor(1, 1.0).unwrap() - 1.25).abs() < 1e-15);
        assert!((mean_snr_factor(1, -1.0).unwrap() - 0.75).abs() < 1e-15);
        let exact = [0.25, 0.140625, 0.09765625, 0.07476806640625];
        for (i, &one_minus_f) in exact.iter().enumerate() {
            let m = i as u32 + 1;
            assert!((1.0 - mean_factor_f(m).unwrap() - one_minus_f).abs() < 1e-14);
            for &theta in &[-1.0, 0.5, 1.0] {
                let oracle = mean_factor_oracle(m as f64, theta);
                assert!((mean_snr_factor(m, theta).unwrap() - oracle).abs() < 1e-11);
            }
        }
        assert!(mean_snr_factor(0, 0.0).is_err());
        assert!(mean_snr_factor(1, 1.2).is_err());
    }
}
