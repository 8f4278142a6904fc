//! Meijer G-function by direct Mellin-Barnes integration.
//!
//! G^{m,n}_{p,q}(x | a; b) = (1/2 pi i) int_L F(s) ds with
//!
//! F(s) = prod_{j<m} Gamma(b_j - s) prod_{j<n} Gamma(1 - a_j + s)
//!        / (prod_{j>=m} Gamma(1 - b_j + s) prod_{j>=n} Gamma(a_j - s)) x^s.
//!
//! L is the vertical line Re s = c separating the left poles (from the
//! Gamma(1 - a_j + s) factors) from the right poles (from Gamma(b_j - s)).
//! For real parameters and x > 0, F(conj s) = conj F(s), hence
//! G = (1/pi) int_0^inf Re F(c + i t) dt. The integrand decays like
//! exp(-(pi/2)(2(m+n) - p - q)|t|), so the line is truncated where |F|
//! has fallen 16 orders below its peak.
//!
//! Only the shapes needed for log-moment integrals of Gamma products are
//! accepted: (m,n,p,q) in {(1,2,2,2), (1,3,3,2), (1,4,4,2)} with b = (1, 0).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::specfun::gamma::ln_gamma_complex;

const SUPPORTED: [(usize, usize, usize, usize); 3] = [(1, 2, 2, 2), (1, 3, 3, 2), (1, 4, 4, 2)];

/// ln(1e16): the integrand is truncated once it is this far below its peak.
const TRUNCATION_DEPTH: f64 = 36.84;
const MAX_HEIGHT: usize = 20_000;

/// Validated parameter set of a G-function.
#[derive(Debug, Clone, PartialEq)]
pub struct MeijerG {
    m: usize,
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    abscissa: f64,
}

impl MeijerG {
    pub fn new(m: usize, n: usize, a: &[f64], b: &[f64]) -> Result<Self> {
        let (p, q) = (a.len(), b.len());
        if !SUPPORTED.contains(&(m, n, p, q)) || b != [1.0, 0.0] {
            return Err(Error::UnsupportedShape {
                m,
                n,
                p,
                q,
                b: b.to_vec(),
            });
        }
        if let Some(bad) = a.iter().find(|v| !v.is_finite()) {
            return Err(crate::error::domain("MeijerG::new", format!("non-finite parameter {bad}")));
        }
        let abscissa = contour_abscissa(m, n, a, b)?;
        Ok(Self {
            m,
            n,
            a: a.to_vec(),
            b: b.to_vec(),
            abscissa,
        })
    }

    /// Re s of the integration line.
    pub fn abscissa(&self) -> f64 {
        self.abscissa
    }

    fn ln_integrand(&self, s: Complex64, ln_x: f64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let mut acc = s * ln_x;
        for (j, &b) in self.b.iter().enumerate() {
            if j < self.m {
                acc += ln_gamma_complex(b - s);
            } else {
                acc -= ln_gamma_complex(one - b + s);
            }
        }
        for (j, &a) in self.a.iter().enumerate() {
            if j < self.n {
                acc += ln_gamma_complex(one - a + s);
            } else {
                acc -= ln_gamma_complex(a - s);
            }
        }
        acc
    }

    /// Evaluate at `x > 0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(crate::error::domain("MeijerG::eval", format!("x = {x} must be positive and finite")));
        }
        let ln_x = x.ln();
        let c = self.abscissa;
        let ln_abs = |t: f64| self.ln_integrand(Complex64::new(c, t), ln_x).re;

        let mut peak = ln_abs(0.0);
        let mut height = 0usize;
        loop {
            height += 1;
            if height > MAX_HEIGHT {
                return Err(Error::Quadrature {
                    estimate: f64::NAN,
                    error: f64::INFINITY,
                    intervals: height,
                });
            }
            let v = ln_abs(height as f64);
            peak = peak.max(v);
            if v < peak - TRUNCATION_DEPTH {
                break;
            }
        }

        let scale = peak.exp();
        let opts = QuadOptions::tolerances(1e-16 * scale, 1e-13);
        let mut total = 0.0;
        for k in 0..height {
            let piece = integrate(
                |t| self.ln_integrand(Complex64::new(c, t), ln_x).exp().re,
                k as f64,
                (k + 1) as f64,
                opts,
            )?;
            total += piece.value;
        }
        Ok(total / std::f64::consts::PI)
    }
}

/// Midpoint between the rightmost left pole and the leftmost right pole.
fn contour_abscissa(m: usize, n: usize, a: &[f64], b: &[f64]) -> Result<f64> {
    let (right_index, right) = b[..m]
        .iter()
        .copied()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("m >= 1");
    let left = a[..n]
        .iter()
        .map(|v| v - 1.0)
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(&y.1));
    match left {
        None => Ok(right - 0.5),
        Some((_, left)) if left < right => Ok(0.5 * (left + right)),
        Some((left_index, left)) => Err(Error::ContourSeparation {
            left,
            left_index,
            right,
            right_index,
        }),
    }
}

/// G^{m,n}_{p,q}(x | a; b) for the supported shapes.
pub fn meijer_g(m: usize, n: usize, a: &[f64], b: &[f64], x: f64) -> Result<f64> {
    MeijerG::new(m, n, a, b)?.eval(x)
}
