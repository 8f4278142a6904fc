//! Power-splitting SWIPT relay model and its performance metrics.
//!
//! The relay splits received power: a fraction rho is harvested (efficiency
//! kappa) and re-radiated towards the destination, 1 - rho feeds the decoder.
//! With path-loss exponent alpha this gives the SNR scales
//!
//! gamma_hat_R = (1 - rho) P_S / (d_SR^alpha N)
//! gamma_hat_D = kappa rho P_S / ((d_SR d_RD)^alpha N)
//!
//! and gamma_R = gamma_hat_R g_SR, gamma_D = gamma_hat_D g_SR g_RD.
//!
//! Metric functions take [`DerivedSnrScales`] rather than a full system so
//! that sweeps over the SNR scales themselves need no physical parameters.
//! Capacities are in bits per channel use and include the half-duplex 1/2.

use std::f64::consts::{LN_2, PI};

use crate::copula::{Copula, CopulaModel};
use crate::error::{Error, Result};
use crate::fading::NakagamiPower;
use crate::product_dist::{ClosedFormCoefficients, EndToEndSnrModel};
use crate::quad::{integrate, integrate_to_infinity, QuadOptions};
use crate::specfun::gamma::{digamma, ln_gamma, regularized_upper_gamma};
use crate::specfun::meijer::MeijerG;

/// Physical parameters of the dual-hop link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwiptSystem {
    /// P_S in watts.
    pub source_power: f64,
    /// N in watts.
    pub noise_power: f64,
    /// rho, the harvested fraction.
    pub ps_factor: f64,
    /// kappa, energy-harvesting efficiency.
    pub eh_efficiency: f64,
    pub dist_sr: f64,
    pub dist_rd: f64,
    pub pathloss_exp: f64,
    pub fading_m: u32,
    pub theta: f64,
}

/// Deterministic SNR scale factors of the two hops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedSnrScales {
    pub gamma_hat_r: f64,
    pub gamma_hat_d: f64,
}

/// Outage threshold gamma_t on the linear SNR scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageQuery {
    pub threshold: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl OutageQuery {
    pub fn new(threshold: f64) -> Result<Self> {
        if !(threshold >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "threshold",
                value: threshold,
                reason: "outage threshold must be non-negative",
            });
        }
        Ok(Self { threshold })
    }

    pub fn from_db(db: f64) -> Result<Self> {
        Self::new(db_to_linear(db))
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

impl SwiptSystem {
    pub fn validate(&self) -> Result<()> {
        positive("source_power", self.source_power)?;
        positive("noise_power", self.noise_power)?;
        positive("dist_sr", self.dist_sr)?;
        positive("dist_rd", self.dist_rd)?;
        positive("pathloss_exp", self.pathloss_exp)?;
        if !(self.ps_factor > 0.0 && self.ps_factor < 1.0) {
            return Err(Error::InvalidParameter {
                name: "ps_factor",
                value: self.ps_factor,
                reason: "power-splitting factor must lie in (0, 1)",
            });
        }
        if !(self.eh_efficiency > 0.0 && self.eh_efficiency <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "eh_efficiency",
                value: self.eh_efficiency,
                reason: "harvesting efficiency must lie in (0, 1]",
            });
        }
        if self.fading_m == 0 {
            return Err(Error::InvalidParameter {
                name: "fading_m",
                value: 0.0,
                reason: "fading shape must be an integer >= 1",
            });
        }
        CopulaModel::fgm(self.theta)?;
        Ok(())
    }

    pub fn snr_scales(&self) -> Result<DerivedSnrScales> {
        self.validate()?;
        let ps = self.source_power;
        let n = self.noise_power;
        let a = self.pathloss_exp;
        Ok(DerivedSnrScales {
            gamma_hat_r: (1.0 - self.ps_factor) * ps / (self.dist_sr.powf(a) * n),
            gamma_hat_d: self.eh_efficiency * self.ps_factor * ps / ((self.dist_sr * self.dist_rd).powf(a) * n),
        })
    }
}

/// Upper-parameter choice in the Meijer-G form of the SR capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrVariant {
    /// a_1 = 1 - m, the value implied by integrating the Gamma density.
    ShapeOnly,
    /// a_1 = 1 - m / gamma_hat_R, as typeset in the source formula.
    Printed,
}

/// Prefactor applied to the bracketed Meijer-G combination of the RD capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdPrefactor {
    /// The bracket alone.
    Bare,
    /// D = 2^{2m-2} B / (pi zeta^{2m} ln 2).
    D,
    /// pi D, which absorbs the 1/pi carried by each integral evaluation.
    PiD,
}

fn ln_one_plus_moment_opts() -> QuadOptions {
    QuadOptions::tolerances(1e-13, 1e-12)
}

/// SR ergodic capacity by quadrature of (1/(2 ln 2)) E[ln(1 + gamma_R)].
pub fn ergodic_capacity_sr(gamma_hat_r: f64, m: u32) -> Result<f64> {
    positive("gamma_hat_r", gamma_hat_r)?;
    let g = NakagamiPower::normalized(m as f64)?;
    let scale = gamma_hat_r;
    let opts = ln_one_plus_moment_opts();
    let f = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        (scale * x).ln_1p() * g.pdf(x).unwrap_or(0.0)
    };
    let head = integrate(f, 0.0, 1.0, opts)?;
    let tail = integrate_to_infinity(f, 1.0, 1.0, opts)?;
    Ok((head.value + tail.value) / (2.0 * LN_2))
}

/// SR ergodic capacity through the Meijer-G closed form.
pub fn ergodic_capacity_sr_closed(gamma_hat_r: f64, m: u32, variant: SrVariant) -> Result<f64> {
    positive("gamma_hat_r", gamma_hat_r)?;
    let mf = m as f64;
    let a1 = match variant {
        SrVariant::ShapeOnly => 1.0 - mf,
        SrVariant::Printed => 1.0 - mf / gamma_hat_r,
    };
    let g = MeijerG::new(1, 3, &[a1, 1.0, 1.0], &[1.0, 0.0])?.eval(gamma_hat_r / mf)?;
    Ok(g / (2.0 * ln_gamma(mf)?.exp() * LN_2))
}

/// RD ergodic capacity by quadrature of (1/(2 ln 2)) int ln(1 + y) f(y) dy
/// with the closed-form density; non-integer or asymmetric models use
/// int S(y) / (1 + y) dy with the general CDF instead.
pub fn ergodic_capacity_rd_model(model: &EndToEndSnrModel) -> Result<f64> {
    let scale = model.snr_scale;
    let opts = ln_one_plus_moment_opts();
    let lo = scale.ln() - 46.0;
    let mid = scale.ln();
    let hi = scale.ln() + 4.0 * 10f64.ln();
    let value = match model.coefficients() {
        Ok(coef) => {
            let theta = model.copula.theta();
            let f = |u: f64| {
                let y = u.exp();
                y.ln_1p() * crate::product_dist::pdf_with(&coef, theta, y).unwrap_or(0.0) * y
            };
            integrate(f, lo, mid, opts)?.value + integrate(f, mid, hi, opts)?.value
        }
        Err(Error::UnsupportedClosedForm(_)) => {
            let f = |u: f64| {
                let y = u.exp();
                let s = 1.0 - model.product_cdf_general(y).unwrap_or(1.0);
                s * y / (1.0 + y)
            };
            let o = QuadOptions::tolerances(1e-10, 1e-10);
            integrate(f, lo, mid, o)?.value + integrate(f, mid, hi, o)?.value
        }
        Err(e) => return Err(e),
    };
    Ok(value / (2.0 * LN_2))
}

/// RD ergodic capacity by quadrature for unit-mean Nakagami-m hops under FGM.
pub fn ergodic_capacity_rd(gamma_hat_d: f64, m: u32, theta: f64) -> Result<f64> {
    positive("gamma_hat_d", gamma_hat_d)?;
    ergodic_capacity_rd_model(&EndToEndSnrModel::fgm_nakagami(gamma_hat_d, m as f64, theta)?)
}

/// The bracketed Meijer-G combination of the RD capacity closed form.
pub fn rd_capacity_bracket(coef: &ClosedFormCoefficients, theta: f64) -> Result<f64> {
    let m = coef.m;
    let mf = m as f64;
    let z2 = coef.zeta * coef.zeta;
    let b = [1.0, 0.0];
    let g1 = MeijerG::new(1, 4, &[1.0 - mf, 1.0 - mf, 1.0, 1.0], &b)?.eval(4.0 / z2)?;
    if theta == 0.0 {
        return Ok(g1);
    }
    let mut dep = g1;
    for k in 0..m {
        let gk = MeijerG::new(1, 4, &[1.0 - (mf + k as f64), 1.0 - mf, 1.0, 1.0], &b)?.eval(2.0 / z2)?;
        dep -= coef.w[k] * gk;
    }
    for k in 0..m {
        for n in 0..m {
            let a = [1.0 - (mf + n as f64), 1.0 - (mf + k as f64), 1.0, 1.0];
            dep += coef.z[k][n] * MeijerG::new(1, 4, &a, &b)?.eval(1.0 / z2)?;
        }
    }
    Ok(g1 + theta * dep)
}

/// RD ergodic capacity through the Meijer-G closed form with the chosen prefactor.
pub fn ergodic_capacity_rd_closed(gamma_hat_d: f64, m: u32, theta: f64, prefactor: RdPrefactor) -> Result<f64> {
    positive("gamma_hat_d", gamma_hat_d)?;
    CopulaModel::fgm(theta)?;
    let coef = ClosedFormCoefficients::new(m, gamma_hat_d)?;
    let bracket = rd_capacity_bracket(&coef, theta)?;
    Ok(match prefactor {
        RdPrefactor::Bare => bracket,
        RdPrefactor::D => coef.big_d * bracket,
        RdPrefactor::PiD => PI * coef.big_d * bracket,
    })
}

/// Quadrature value of a capacity next to each closed-form reading.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityReport<V> {
    pub quadrature: f64,
    pub closed: Vec<(V, f64)>,
}

impl<V: Copy + PartialEq> CapacityReport<V> {
    /// |closed - quadrature| for each variant.
    pub fn discrepancies(&self) -> Vec<(V, f64)> {
        self.closed.iter().map(|&(v, c)| (v, (c - self.quadrature).abs())).collect()
    }

    /// Variants within `tol` of the quadrature value.
    pub fn matching(&self, tol: f64) -> Vec<V> {
        self.discrepancies().into_iter().filter(|&(_, d)| d <= tol).map(|(v, _)| v).collect()
    }
}

pub fn capacity_sr_report(gamma_hat_r: f64, m: u32) -> Result<CapacityReport<SrVariant>> {
    Ok(CapacityReport {
        quadrature: ergodic_capacity_sr(gamma_hat_r, m)?,
        closed: vec![
            (SrVariant::ShapeOnly, ergodic_capacity_sr_closed(gamma_hat_r, m, SrVariant::ShapeOnly)?),
            (SrVariant::Printed, ergodic_capacity_sr_closed(gamma_hat_r, m, SrVariant::Printed)?),
        ],
    })
}

pub fn capacity_rd_report(gamma_hat_d: f64, m: u32, theta: f64) -> Result<CapacityReport<RdPrefactor>> {
    let coef = ClosedFormCoefficients::new(m, gamma_hat_d)?;
    let bracket = rd_capacity_bracket(&coef, theta)?;
    Ok(CapacityReport {
        quadrature: ergodic_capacity_rd(gamma_hat_d, m, theta)?,
        closed: vec![
            (RdPrefactor::Bare, bracket),
            (RdPrefactor::D, coef.big_d * bracket),
            (RdPrefactor::PiD, PI * coef.big_d * bracket),
        ],
    })
}

/// Per-hop ergodic capacities and min(C_SR, C_RD) of the means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemCapacity {
    pub sr: f64,
    pub rd: f64,
    pub min_of_means: f64,
}

pub fn ergodic_capacity_scales(scales: DerivedSnrScales, m: u32, theta: f64) -> Result<SystemCapacity> {
    let sr = ergodic_capacity_sr(scales.gamma_hat_r, m)?;
    let rd = ergodic_capacity_rd(scales.gamma_hat_d, m, theta)?;
    Ok(SystemCapacity {
        sr,
        rd,
        min_of_means: sr.min(rd),
    })
}

/// Capacities of a physical system. The mean of the per-draw minimum needs
/// the joint law and is estimated by the Monte-Carlo engine.
pub fn ergodic_capacity_system(sys: &SwiptSystem) -> Result<SystemCapacity> {
    ergodic_capacity_scales(sys.snr_scales()?, sys.fading_m, sys.theta)
}

fn relay_survival(gamma_hat_r: f64, m: u32, threshold: f64) -> Result<f64> {
    let mf = m as f64;
    regularized_upper_gamma(mf, mf * threshold / gamma_hat_r)
}

/// Outage 1 - C_hat(S_R(t), S_D(t)) with the FGM survival copula, which for
/// FGM is the copula itself: 1 - S_R S_D (1 + theta F_R F_D).
pub fn outage_probability(scales: DerivedSnrScales, m: u32, theta: f64, q: OutageQuery) -> Result<f64> {
    positive("gamma_hat_r", scales.gamma_hat_r)?;
    let copula = CopulaModel::fgm(theta)?;
    let t = q.threshold;
    if t == 0.0 {
        return Ok(0.0);
    }
    let s_r = relay_survival(scales.gamma_hat_r, m, t)?;
    let s_d = EndToEndSnrModel::fgm_nakagami(scales.gamma_hat_d, m as f64, theta)?.snr_survival_closed(t)?;
    Ok(1.0 - copula.survival_cdf(s_r, s_d)?)
}

/// The outage formula written out term by term: relay survival from the
/// finite exponential sum, destination survival from the Bessel expansion,
/// composed as 1 - [S_R S_D] (1 + theta (1 - S_D)(1 - S_R)).
pub fn outage_probability_expanded(scales: DerivedSnrScales, m: u32, theta: f64, q: OutageQuery) -> Result<f64> {
    positive("gamma_hat_r", scales.gamma_hat_r)?;
    let t = q.threshold;
    let mf = m as f64;
    let x = mf * t / scales.gamma_hat_r;
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 0..m {
        if k > 0 {
            term *= x / k as f64;
        }
        sum += term;
    }
    let s_r = (-x).exp() * sum;
    let coef = ClosedFormCoefficients::new(m, scales.gamma_hat_d)?;
    let s_d = crate::product_dist::survival_with(&coef, theta, t)?;
    Ok(1.0 - (s_r * s_d) * (1.0 + theta * (1.0 - s_d) * (1.0 - s_r)))
}

/// Exact outage when gamma_R and gamma_D share the same g_SR draw, i.e.
/// Pr(min(gamma_hat_R g_SR, gamma_hat_D g_SR g_RD) <= t) under the copula
/// on (g_SR, g_RD). This is the law the Monte-Carlo engine samples.
pub fn outage_probability_shared_fading(scales: DerivedSnrScales, m: u32, theta: f64, q: OutageQuery) -> Result<f64> {
    let g = NakagamiPower::normalized(m as f64)?;
    let model = EndToEndSnrModel::new(scales.gamma_hat_d, g, g, CopulaModel::fgm(theta)?)?;
    outage_shared_model(scales.gamma_hat_r, &model, q)
}

/// [`outage_probability_shared_fading`] for arbitrary marginals and copula.
pub fn outage_shared_model(gamma_hat_r: f64, model: &EndToEndSnrModel, q: OutageQuery) -> Result<f64> {
    positive("gamma_hat_r", gamma_hat_r)?;
    let t = q.threshold;
    if t == 0.0 {
        return Ok(0.0);
    }
    let sr = model.marginal_sr;
    let rd = model.marginal_rd;
    let a = t / gamma_hat_r;
    let b = t / model.snr_scale;
    // Pr(g_SR > a, g_RD > b / g_SR) = int_a^inf f(g) (1 - C_{2|1}(F_RD(b/g) | F_SR(g))) dg
    let hi = sr.survival_quantile(1e-18)?;
    if a >= hi {
        return Ok(1.0);
    }
    let integrand = |s: f64| {
        let g = s.exp();
        let density = sr.pdf(g).unwrap_or(0.0) * g;
        if density == 0.0 {
            return 0.0;
        }
        let u1 = sr.cdf(g).unwrap_or(0.0);
        let u2 = rd.cdf(b / g).unwrap_or(1.0);
        density * (1.0 - model.copula.conditional_cdf_unchecked(u2, u1))
    };
    let opts = QuadOptions::tolerances(1e-14, 1e-12);
    let (lo, hi) = (a.ln(), hi.ln());
    let split = b.ln().clamp(lo, hi);
    let joint_survival = integrate(integrand, lo, split, opts)?.value + integrate(integrand, split, hi, opts)?.value;
    Ok((1.0 - joint_survival).clamp(0.0, 1.0))
}

/// High-SNR SR capacity E[ln gamma_R] / (2 ln 2) = (psi(m) + ln(gamma_hat_R / m)) / (2 ln 2).
pub fn asymptotic_capacity_sr(gamma_hat_r: f64, m: u32) -> Result<f64> {
    positive("gamma_hat_r", gamma_hat_r)?;
    let mf = m as f64;
    Ok((digamma(mf)? + (gamma_hat_r / mf).ln()) / (2.0 * LN_2))
}

/// Leading-order relay CDF (m t / gamma_hat_R)^m / Gamma(m + 1).
pub fn asymptotic_relay_cdf(gamma_hat_r: f64, m: u32, threshold: f64) -> Result<f64> {
    positive("gamma_hat_r", gamma_hat_r)?;
    let mf = m as f64;
    Ok((mf * (mf * threshold / gamma_hat_r).ln() - ln_gamma(mf + 1.0)?).exp())
}

/// High-SNR outage: the relay CDF replaced by its leading term, the
/// destination CDF kept exact. Refuses thresholds where the leading term
/// exceeds 1, since the approximation has left its regime there.
pub fn asymptotic_outage(scales: DerivedSnrScales, m: u32, theta: f64, q: OutageQuery) -> Result<f64> {
    let t = q.threshold;
    if t == 0.0 {
        return Ok(0.0);
    }
    let f_r = asymptotic_relay_cdf(scales.gamma_hat_r, m, t)?;
    if f_r > 1.0 {
        return Err(Error::OutOfRegime(format!(
            "leading-order relay CDF {f_r:.6} > 1 at gamma_hat_R = {}, m = {m}, gamma_t = {t}",
            scales.gamma_hat_r
        )));
    }
    let s_d = EndToEndSnrModel::fgm_nakagami(scales.gamma_hat_d, m as f64, theta)?.snr_survival_closed(t)?;
    let f_d = 1.0 - s_d;
    Ok(1.0 - (1.0 - f_r) * s_d * (1.0 + theta * f_r * f_d))
}
