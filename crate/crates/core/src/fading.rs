//! Nakagami-m fading power: Gamma law with shape m and mean power g_bar.

use crate::error::{domain, Error, Result};
use crate::specfun::gamma::{ln_gamma, regularized_lower_gamma, regularized_upper_gamma};

/// Fading power |h|^2 of a Nakagami-m channel, Gamma(m, g_bar / m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NakagamiPower {
    m: f64,
    mean_power: f64,
    ln_gamma_m: f64,
}

impl NakagamiPower {
    pub fn new(m: f64, mean_power: f64) -> Result<Self> {
        if !(m >= 0.5) || !m.is_finite() {
            return Err(Error::InvalidParameter {
                name: "m",
                value: m,
                reason: "fading shape must be at least 0.5",
            });
        }
        if !(mean_power > 0.0) || !mean_power.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mean_power",
                value: mean_power,
                reason: "mean fading power must be positive",
            });
        }
        Ok(Self {
            m,
            mean_power,
            ln_gamma_m: ln_gamma(m)?,
        })
    }

    /// Unit-mean fading power.
    pub fn normalized(m: f64) -> Result<Self> {
        Self::new(m, 1.0)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn mean_power(&self) -> f64 {
        self.mean_power
    }

    /// m / g_bar, the rate of the Gamma law.
    pub fn rate(&self) -> f64 {
        self.m / self.mean_power
    }

    /// Integer shape, if m is one.
    pub fn integer_m(&self) -> Option<u32> {
        (self.m.fract() == 0.0 && self.m <= u32::MAX as f64).then_some(self.m as u32)
    }

    fn check_g(func: &'static str, g: f64) -> Result<()> {
        if g >= 0.0 {
            Ok(())
        } else {
            Err(domain(func, format!("power g = {g} must be non-negative")))
        }
    }

    pub fn pdf(&self, g: f64) -> Result<f64> {
        Self::check_g("power_pdf", g)?;
        if g == 0.0 {
            return match self.m {
                m if m > 1.0 => Ok(0.0),
                m if m == 1.0 => Ok(self.rate()),
                _ => Err(domain("power_pdf", "density is unbounded at g = 0 for m < 1")),
            };
        }
        let r = self.rate();
        Ok((self.m * r.ln() - self.ln_gamma_m + (self.m - 1.0) * g.ln() - r * g).exp())
    }

    pub fn cdf(&self, g: f64) -> Result<f64> {
        Self::check_g("power_cdf", g)?;
        regularized_lower_gamma(self.m, self.rate() * g)
    }

    /// 1 - F(g), computed directly so the upper tail keeps full precision.
    pub fn survival(&self, g: f64) -> Result<f64> {
        Self::check_g("power_survival", g)?;
        regularized_upper_gamma(self.m, self.rate() * g)
    }

    /// CDF by the finite sum 1 - e^{-x} sum_{k<m} x^k / k!, integer m only.
    pub fn cdf_integer_series(&self, g: f64) -> Result<f64> {
        Self::check_g("power_cdf_integer_series", g)?;
        let m = self
            .integer_m()
            .ok_or_else(|| domain("power_cdf_integer_series", format!("m = {} is not an integer", self.m)))?;
        Ok(1.0 - (-self.rate() * g).exp() * exp_partial_sum(m, self.rate() * g))
    }

    /// g with F(g) = p, for p in [0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if p == 1.0 {
            return Err(Error::Unbounded);
        }
        if !(0.0..1.0).contains(&p) {
            return Err(domain("power_quantile", format!("probability p = {p} outside [0, 1)")));
        }
        Ok(self.quantile_unchecked(p))
    }

    /// Quantile without argument checks; `p` must lie in [0, 1).
    pub fn quantile_unchecked(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        let x = if self.m == 1.0 {
            -(-p).ln_1p()
        } else if p > 0.5 {
            standard_gamma_quantile(self.m, self.ln_gamma_m, self.integer_m(), 1.0 - p, true)
        } else {
            standard_gamma_quantile(self.m, self.ln_gamma_m, self.integer_m(), p, false)
        };
        x / self.rate()
    }

    /// g with 1 - F(g) = q, for q in (0, 1]; keeps precision for tiny q.
    pub fn survival_quantile(&self, q: f64) -> Result<f64> {
        if q == 0.0 {
            return Err(Error::Unbounded);
        }
        if !(q > 0.0 && q <= 1.0) {
            return Err(domain("power_survival_quantile", format!("probability q = {q} outside (0, 1]")));
        }
        if q == 1.0 {
            return Ok(0.0);
        }
        let x = if self.m == 1.0 {
            -q.ln()
        } else if q < 0.5 {
            standard_gamma_quantile(self.m, self.ln_gamma_m, self.integer_m(), q, true)
        } else {
            standard_gamma_quantile(self.m, self.ln_gamma_m, self.integer_m(), 1.0 - q, false)
        };
        Ok(x / self.rate())
    }
}

/// sum_{k<m} x^k / k!
fn exp_partial_sum(m: u32, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..m {
        term *= x / k as f64;
        sum += term;
    }
    sum
}

/// Regularized (P, Q) for the unit-rate Gamma law, with the finite-sum fast
/// path for integer shapes away from the origin.
/// Regularized upper tail Q(a, x) when `upper`, lower tail P(a, x) otherwise.
fn gamma_tail(a: f64, int_a: Option<u32>, x: f64, upper: bool) -> f64 {
    match int_a {
        Some(m) if m <= 64 => {
            if upper || x >= a {
                // Q is a sum of positive terms; P = 1 - Q only where Q <= ~1/2.
                let q = (-x).exp() * exp_partial_sum(m, x);
                if upper {
                    q
                } else {
                    1.0 - q
                }
            } else {
                // P = e^{-x} x^m / m! * sum_j x^j / ((m+1)...(m+j)), ratio below 1 for x < m.
                let mut term = 1.0;
                let mut sum = 1.0;
                let mut k = a;
                while term > f64::EPSILON * sum {
                    k += 1.0;
                    term *= x / k;
                    sum += term;
                }
                (a * x.ln() - x - ln_factorial_small(m)).exp() * sum
            }
        }
        _ if upper => regularized_upper_gamma(a, x).unwrap_or(f64::NAN),
        _ => regularized_lower_gamma(a, x).unwrap_or(f64::NAN),
    }
}

fn ln_factorial_small(m: u32) -> f64 {
    (2..=m).map(|k| (k as f64).ln()).sum()
}

/// Acklam's rational approximation to the standard normal quantile
/// (relative error ~1e-9), used only to seed the Newton iteration.
fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < 0.02425 {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - 0.02425 {
        -tail((-2.0 * (-p).ln_1p()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Unit-rate Gamma quantile. With `upper_side` false solves P(a, x) = target,
/// otherwise Q(a, x) = target; callers pass the smaller tail. Newton steps are
/// safeguarded by a shrinking bracket and bisection.
fn standard_gamma_quantile(a: f64, ln_gamma_a: f64, int_a: Option<u32>, target: f64, upper_side: bool) -> f64 {
    // Initial guess: small-p expansion in the far lower tail, Wilson-Hilferty elsewhere.
    let z = if upper_side { -normal_quantile(target) } else { normal_quantile(target) };
    let c = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * a.sqrt());
    let wh = a * c * c * c;
    let small = ((target.ln() + ln_gamma_a + a.ln()) / a).exp();
    let mut x = if !upper_side && (small < 0.2 * a || wh <= 0.0) {
        small
    } else if wh > 0.0 {
        wh
    } else {
        a
    };

    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for _ in 0..200 {
        let tail = gamma_tail(a, int_a, x, upper_side);
        // residual of the monotone function F(x) - p, signed the same on both sides
        let resid = if upper_side { target - tail } else { tail - target };
        if resid == 0.0 {
            return x;
        }
        if resid > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        let density = ((a - 1.0) * x.ln() - x - ln_gamma_a).exp();
        // Halley step while its correction is mild, Newton otherwise; the
        // density's log-derivative is (a - 1) / x - 1.
        let t = resid / density;
        let c = 0.5 * t * ((a - 1.0) / x - 1.0);
        let halley = c.abs() < 0.5;
        let mut next = if halley { x - t / (1.0 - c) } else { x - t };
        // A Halley step this small leaves a cubic, i.e. sub-ulp, error.
        if halley && (next - x).abs() <= 1e-7 * x && next > lo && next < hi {
            return next;
        }
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * x.max(lo) + 1.0 };
        }
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * x {
            break;
        }
    }
    x
}
