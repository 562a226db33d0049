//! Special functions and quantile transforms used by the data generators.
//!
//! Degrees of freedom are real-valued throughout. Upper-tail variants
//! (`*_sf`, `*_isf`) are provided so that extreme probabilities are handled
//! without the cancellation of `1 - u`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Convergence controls for the iterative routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Relative convergence threshold of continued fractions and root finding.
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-15,
            max_iter: 1000,
        }
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_cf(x: f64, a: f64, b: f64, tol: &Tolerance) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=tol.max_iter {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= tol.abs_tol {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence {
        routine: "incomplete beta continued fraction",
        iterations: tol.max_iter,
        detail: format!("x = {x}, a = {a}, b = {b}"),
    })
}

/// `I_x(a, b)` given both `x` and `y = 1 - x` exactly, plus `ln B(a, b)`.
fn inc_beta_parts(x: f64, y: f64, a: f64, b: f64, lnb: f64, tol: &Tolerance) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if y <= 0.0 {
        return Ok(1.0);
    }
    let front = (a * x.ln() + b * y.ln() - lnb).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_cf(x, a, b, tol)? / a)
    } else {
        Ok(1.0 - front * beta_cf(y, b, a, tol)? / b)
    }
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    reg_inc_beta_tol(x, a, b, &Tolerance::default())
}

pub fn reg_inc_beta_tol(x: f64, a: f64, b: f64, tol: &Tolerance) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("incomplete beta needs a, b > 0 (a = {a}, b = {b})")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("incomplete beta needs x in [0, 1], got {x}")));
    }
    inc_beta_parts(x, 1.0 - x, a, b, ln_beta(a, b), tol)
}

/// Student-t law with `v > 0` degrees of freedom and its cached normalizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentT {
    v: f64,
    ln_beta: f64,
    tol: Tolerance,
}

impl StudentT {
    pub fn new(v: f64) -> Result<Self> {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("degrees of freedom must be positive, got {v}")));
        }
        Ok(Self {
            v,
            ln_beta: ln_beta(0.5 * v, 0.5),
            tol: Tolerance::default(),
        })
    }

    pub fn with_tolerance(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    pub fn dof(&self) -> f64 {
        self.v
    }

    /// `P(T > t)` for `t >= 0`.
    fn sf_nonneg(&self, t: f64) -> Result<f64> {
        let r = t / self.v.sqrt();
        let (x, y) = if r <= 1.0 {
            let r2 = r * r;
            (1.0 / (1.0 + r2), r2 / (1.0 + r2))
        } else {
            let s2 = (1.0 / r) * (1.0 / r);
            (s2 / (1.0 + s2), 1.0 / (1.0 + s2))
        };
        Ok(0.5 * inc_beta_parts(x, y, 0.5 * self.v, 0.5, self.ln_beta, &self.tol)?)
    }

    pub fn sf(&self, t: f64) -> Result<f64> {
        if t.is_nan() {
            return Err(Error::Domain("NaN argument".into()));
        }
        if t >= 0.0 {
            self.sf_nonneg(t)
        } else {
            Ok(1.0 - self.sf_nonneg(-t)?)
        }
    }

    pub fn cdf(&self, t: f64) -> Result<f64> {
        if t.is_nan() {
            return Err(Error::Domain("NaN argument".into()));
        }
        if t >= 0.0 {
            Ok(1.0 - self.sf_nonneg(t)?)
        } else {
            self.sf_nonneg(-t)
        }
    }

    pub fn ln_pdf(&self, t: f64) -> f64 {
        let r = t.abs() / self.v.sqrt();
        let log1p_r2 = if r < 1e150 { (r * r).ln_1p() } else { 2.0 * r.ln() };
        -0.5 * (self.v + 1.0) * log1p_r2 - 0.5 * self.v.ln() - self.ln_beta
    }

    pub fn pdf(&self, t: f64) -> f64 {
        self.ln_pdf(t).exp()
    }

    /// Upper-tail quantile: the `t >= 0` with `P(T > t) = q`, `q ∈ (0, 1/2]`.
    ///
    /// Safeguarded Newton iteration on `ln P(T > e^s) = ln q` in `s = ln t`,
    /// which is close to linear in the tail; the bracket falls back to
    /// bisection whenever a Newton step leaves it.
    pub fn isf(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q <= 0.5) {
            return Err(Error::Domain(format!("upper-tail probability {q} outside (0, 0.5]")));
        }
        if q == 0.5 {
            return Ok(0.0);
        }
        let v = self.v;
        // closed forms for the Cauchy and two-degree cases
        if v == 1.0 {
            return Ok(1.0 / (PI * q).tan());
        }
        if v == 2.0 {
            return Ok((1.0 - 2.0 * q) / (2.0 * q * (1.0 - q)).sqrt());
        }
        let ln_q = q.ln();
        // tail approximation P(T > t) ≈ v^(v/2-1) t^(-v) / B(v/2, 1/2)
        let tail_guess = ((0.5 * v - 1.0) * v.ln() - self.ln_beta - ln_q) / v;
        let center_guess = ((0.5 - q) / self.pdf(0.0)).ln();
        let mut s = if q > 0.25 { center_guess } else { tail_guess.max(center_guess) };
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for _ in 0..self.tol.max_iter {
            let t = s.exp();
            let sf = self.sf_nonneg(t)?;
            let h = sf.ln() - ln_q;
            if h.abs() <= self.tol.abs_tol * 4.0 {
                return Ok(t);
            }
            if h > 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            // d/ds ln sf(e^s) = -t f(t) / sf(t)
            let slope = -(self.ln_pdf(t) + s - sf.ln()).exp();
            let mut next = s - h / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => 0.5 * (lo + hi),
                    (true, false) => lo + 1.0,
                    (false, true) => hi - 1.0,
                    (false, false) => unreachable!("one bracket side is set every step"),
                };
            }
            let step = (next - s).abs();
            s = next;
            if step <= self.tol.abs_tol * s.abs().max(1.0)
                || (hi - lo) <= self.tol.abs_tol * s.abs().max(1.0)
            {
                return Ok(s.exp());
            }
        }
        Err(Error::NoConvergence {
            routine: "Student-t quantile",
            iterations: self.tol.max_iter,
            detail: format!("q = {q}, v = {v}"),
        })
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("probability {u} outside (0, 1)")));
        }
        if u == 0.5 {
            Ok(0.0)
        } else if u > 0.5 {
            self.isf(1.0 - u)
        } else {
            Ok(-self.isf(u)?)
        }
    }

    /// Quantile of `|T|` at level `u`.
    pub fn abs_quantile(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("probability {u} outside [0, 1)")));
        }
        self.isf(0.5 * (1.0 - u))
    }
}

pub fn student_t_cdf(x: f64, v: f64) -> Result<f64> {
    StudentT::new(v)?.cdf(x)
}

pub fn student_t_quantile(u: f64, v: f64) -> Result<f64> {
    StudentT::new(v)?.quantile(u)
}

/// Quantile of `|T|`, `T ~ t(v)`: `student_t_quantile((1 + u)/2, v)`.
pub fn abs_student_t_quantile(u: f64, v: f64) -> Result<f64> {
    StudentT::new(v)?.abs_quantile(u)
}

/// Standard Cauchy CDF `1/2 + arctan(x)/π`, evaluated without tail cancellation.
pub fn cauchy_cdf(x: f64) -> f64 {
    if x < 0.0 {
        (-1.0 / x).atan() / PI
    } else {
        0.5 + x.atan() / PI
    }
}

/// Standard Cauchy upper tail `P(C > x)`.
pub fn cauchy_sf(x: f64) -> f64 {
    cauchy_cdf(-x)
}

/// Fréchet CDF `exp(-x^(-1/γ))` for `x > 0`.
pub fn frechet_cdf(x: f64, gamma: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-x.powf(-1.0 / gamma)).exp()
    }
}

/// Inverse of [`frechet_cdf`]: `(-ln u)^(-γ)`.
pub fn frechet_quantile(u: f64, gamma: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("probability {u} outside (0, 1)")));
    }
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("Fréchet index must be positive, got {gamma}")));
    }
    Ok((-u.ln()).powf(-gamma))
}

/// Fréchet quantile at level `1 - q`, accurate for small upper-tail `q`.
pub fn frechet_isf(q: f64, gamma: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("probability {q} outside (0, 1)")));
    }
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("Fréchet index must be positive, got {gamma}")));
    }
    Ok((-(-q).ln_1p()).powf(-gamma))
}
