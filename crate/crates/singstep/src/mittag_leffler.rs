//! One-parameter Mittag-Leffler function `E_alpha(z) = sum z^j / Gamma(alpha j + 1)`
//! and its derivative, for real `z <= 10` and `0 < alpha <= 1`.
//!
//! Three evaluators are tried in turn and the first one whose own error
//! estimate is good enough wins:
//!
//! * the power series with compensated summation (small |z|, or z > 0);
//! * the algebraic asymptotic expansion truncated at its smallest term, plus
//!   the exponential `e^z` when alpha = 1 (large negative z);
//! * for `0 < alpha < 1` and `z < 0`, the real Laplace-type integral
//!   `E_alpha(-x) = sin(alpha pi)/(alpha pi) int_0^inf exp(-(x u)^{1/alpha}) / (u^2 + 2u cos(alpha pi) + 1) du`,
//!   folded onto `[0, 1]`. It covers the band where the series has lost too
//!   many digits to cancellation and the expansion has not yet converged.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::special::{ln_gamma, rgamma, sin_pi};

/// Accept an evaluator straight away below this scaled error.
const TARGET: f64 = 1e-14;
/// Flag anything worse than this.
const WARN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlRegime {
    Series,
    Asymptotic,
    Integral,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MittagLefflerEval {
    pub alpha: f64,
    pub z: f64,
    pub value: f64,
    pub derivative: f64,
    /// Error estimate, absolute below magnitude 1 and relative above.
    pub estimated_error: f64,
    pub regime: MlRegime,
    /// Set when no evaluator reached 1e-10.
    pub accuracy_warning: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Candidate {
    pub value: f64,
    pub derivative: f64,
    pub err_value: f64,
    pub err_derivative: f64,
}

impl Candidate {
    fn scaled_error(&self) -> f64 {
        let v = self.err_value / self.value.abs().max(1.0);
        let d = self.err_derivative / self.derivative.abs().max(1.0);
        if v.is_nan() || d.is_nan() {
            f64::INFINITY
        } else {
            v.max(d)
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    fn get(&self) -> f64 {
        self.s + self.c
    }
}

/// `|z|^k / Gamma(alpha k + 1)` and the same for the derivative coefficient
/// `k |z|^{k-1} / Gamma(alpha k + 1)`.
fn series_magnitudes(alpha: f64, lz: f64, az: f64, k: usize) -> (f64, f64) {
    let kf = k as f64;
    let arg = alpha * kf + 1.0;
    if arg < 170.0 && kf * lz.abs() < 600.0 {
        let r = rgamma(arg);
        let p = az.powi(k as i32);
        let dp = if k == 0 { 0.0 } else { kf * az.powi(k as i32 - 1) };
        (p * r, dp * r)
    } else {
        let lg = ln_gamma(arg);
        let m = (kf * lz - lg).exp();
        let dm = if k == 0 {
            0.0
        } else {
            (kf.ln() + (kf - 1.0) * lz - lg).exp()
        };
        (m, dm)
    }
}

pub(crate) fn series(alpha: f64, z: f64) -> Candidate {
    if z == 0.0 {
        return Candidate {
            value: 1.0,
            derivative: rgamma(alpha + 1.0),
            err_value: 0.0,
            err_derivative: 0.0,
        };
    }
    let az = z.abs();
    let lz = az.ln();
    let neg = z < 0.0;
    let (mut v, mut d) = (Sum::default(), Sum::default());
    let (mut abs_v, mut abs_d) = (0.0, 0.0);
    let mut converged = false;
    let mut last = (0.0, 0.0);
    for k in 0..20_000usize {
        let (m, dm) = series_magnitudes(alpha, lz, az, k);
        if !m.is_finite() || !dm.is_finite() {
            if !neg {
                // genuine overflow: every term is positive
                return Candidate {
                    value: f64::INFINITY,
                    derivative: f64::INFINITY,
                    err_value: f64::INFINITY,
                    err_derivative: f64::INFINITY,
                };
            }
            break;
        }
        let sv = if neg && k % 2 == 1 { -1.0 } else { 1.0 };
        let sd = if neg && k % 2 == 0 { -1.0 } else { 1.0 };
        v.add(sv * m);
        d.add(sd * dm);
        abs_v += m;
        abs_d += dm;
        last = (m, dm);
        // the terms peak near k ~ |z|^{1/alpha}/alpha; stop once past it and negligible
        let past_peak = alpha * k as f64 + 1.0 > az.powf(1.0 / alpha) + 2.0;
        if past_peak && m <= 1e-17 * abs_v && dm <= 1e-17 * abs_d.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    let eps = f64::EPSILON;
    if !converged {
        return Candidate {
            value: v.get(),
            derivative: d.get(),
            err_value: f64::INFINITY,
            err_derivative: f64::INFINITY,
        };
    }
    Candidate {
        value: v.get(),
        derivative: d.get(),
        err_value: 4.0 * eps * abs_v + last.0,
        err_derivative: 4.0 * eps * abs_d + last.1,
    }
}

/// Sums `term(k)` for k = 1, 2, ... while the smooth envelope of the terms
/// keeps shrinking, and returns `(sum, first omitted envelope)`.
///
/// The envelope drops the `sin(pi (1 - alpha k))` factor, so terms that
/// happen to sit near a pole of Gamma do not end the sum early.
fn optimally_truncated(term: impl Fn(usize) -> (f64, f64)) -> (f64, f64) {
    let mut sum = Sum::default();
    let mut prev = f64::INFINITY;
    for k in 1..=400usize {
        let (t, env) = term(k);
        if !t.is_finite() || !env.is_finite() || env > prev {
            return (sum.get(), env.min(prev));
        }
        sum.add(t);
        prev = env;
        if env <= 1e-17 * sum.get().abs() {
            return (sum.get(), env);
        }
    }
    (sum.get(), prev)
}

/// `x^{-k} / Gamma(1 - alpha k)` and its envelope, with the growth of
/// `Gamma(alpha k)` handled in logs.
fn scaled_rgamma(alpha: f64, k: usize, lx: f64) -> (f64, f64) {
    let y = 1.0 - alpha * k as f64;
    if y >= 0.5 {
        let v = rgamma(y) * (-(k as f64) * lx).exp();
        return (v, v.abs());
    }
    // 1/Gamma(y) = sin(pi y) Gamma(1 - y) / pi
    let env = (ln_gamma(1.0 - y) - k as f64 * lx).exp() / PI;
    (sin_pi(y) * env, env)
}

pub(crate) fn asymptotic(alpha: f64, z: f64) -> Candidate {
    debug_assert!(z < 0.0);
    if alpha == 1.0 {
        // every 1/Gamma(1 - k) vanishes and only the exponential survives
        return Candidate {
            value: z.exp(),
            derivative: z.exp(),
            err_value: 0.0,
            err_derivative: 0.0,
        };
    }
    let x = -z;
    let lx = x.ln();
    let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    // E(z) ~ -sum z^{-k} / Gamma(1 - alpha k),  z^{-k} = (-1)^k x^{-k}
    let (value, err_value) = optimally_truncated(|k| {
        let (t, env) = scaled_rgamma(alpha, k, lx);
        (-sign(k) * t, env)
    });
    // E'(z) ~ sum k z^{-k-1} / Gamma(1 - alpha k)
    let (derivative, err_derivative) = optimally_truncated(|k| {
        let (t, env) = scaled_rgamma(alpha, k, lx);
        let w = k as f64 / x;
        (-sign(k) * w * t, w * env)
    });
    let (mut err_value, mut err_derivative) = (err_value, err_derivative);
    if !err_value.is_finite() {
        err_value = f64::INFINITY;
    }
    if !err_derivative.is_finite() {
        err_derivative = f64::INFINITY;
    }
    Candidate {
        value,
        derivative,
        err_value,
        err_derivative,
    }
}

pub(crate) fn integral(alpha: f64, z: f64) -> Candidate {
    debug_assert!(z < 0.0 && alpha < 1.0);
    let x = -z;
    let ia = 1.0 / alpha;
    let cos = (alpha * PI).cos();
    let denom = move |u: f64| 1.0 + 2.0 * u * cos + u * u;
    let expo = |w: f64| if w > 745.0 { 0.0 } else { (-w).exp() };
    let s = x.powf(ia);
    let fv = |u: f64| {
        let near = expo(s * u.powf(ia));
        let far = if u > 0.0 { expo(s * u.powf(-ia)) } else { 0.0 };
        (near + far) / denom(u)
    };
    // d/dx of exp(-(xu)^{1/alpha}) brings down (1/alpha) u (xu)^{1/alpha - 1}
    let h = |u: f64| {
        let xu = x * u;
        if xu == 0.0 || !xu.is_finite() {
            return 0.0;
        }
        let w = xu.powf(ia);
        if w > 745.0 {
            return 0.0;
        }
        u * xu.powf(ia - 1.0) * (-w).exp()
    };
    let fd = |u: f64| {
        let far = if u > 0.0 { h(1.0 / u) } else { 0.0 };
        (h(u) + far) / denom(u)
    };
    // the mass of exp(-(xu)^{1/alpha}) sits near u ~ 1/x
    let mut breaks = vec![0.0];
    let mut b = (0.01 / x).min(0.5);
    while b < 1.0 {
        breaks.push(b);
        b *= 4.0;
    }
    breaks.push(1.0);
    let qv = quadrature::integrate_with_breaks(fv, &breaks, 1e-17, 1e-15, 400);
    let qd = quadrature::integrate_with_breaks(fd, &breaks, 1e-17, 1e-15, 400);
    let cv = (alpha * PI).sin() / (alpha * PI);
    let cd = cv / alpha;
    Candidate {
        value: cv * qv.value,
        derivative: cd * qd.value,
        err_value: cv * qv.error + 4.0 * f64::EPSILON * (cv * qv.value).abs(),
        err_derivative: cd * qd.error + 4.0 * f64::EPSILON * (cd * qd.value).abs(),
    }
}

/// Evaluates `E_alpha(z)` and `E_alpha'(z)`.
pub fn mittag_leffler(alpha: f64, z: f64) -> Result<MittagLefflerEval> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::DomainError(format!("alpha = {alpha} outside (0, 1]")));
    }
    if !z.is_finite() || z > 10.0 {
        return Err(Error::DomainError(format!("z = {z} outside (-inf, 10]")));
    }
    let finish = |c: Candidate, regime| {
        let e = c.scaled_error();
        MittagLefflerEval {
            alpha,
            z,
            value: c.value,
            derivative: c.derivative,
            estimated_error: e,
            regime,
            accuracy_warning: !(e <= WARN),
        }
    };
    let s = series(alpha, z);
    if s.scaled_error() <= TARGET {
        return Ok(finish(s, MlRegime::Series));
    }
    let mut best = (s, MlRegime::Series);
    if z < 0.0 {
        let a = asymptotic(alpha, z);
        if a.scaled_error() <= TARGET {
            return Ok(finish(a, MlRegime::Asymptotic));
        }
        if a.scaled_error() < best.0.scaled_error() {
            best = (a, MlRegime::Asymptotic);
        }
        if alpha < 1.0 {
            let i = integral(alpha, z);
            if i.scaled_error() < best.0.scaled_error() {
                best = (i, MlRegime::Integral);
            }
        }
    }
    Ok(finish(best.0, best.1))
}
