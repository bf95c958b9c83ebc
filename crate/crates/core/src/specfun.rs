//! Special-function kernels: log-gamma, incomplete gamma and beta ratios,
//! the gamma quantile, and the standard normal quantile.
//!
//! All functions are pure and reentrant. Accuracy targets are set by the
//! closed-form evaluators that sit on top of these kernels: the incomplete
//! functions converge their series and continued fractions to near machine
//! precision, and the gamma quantile solves the regularized CDF by a
//! bracketed, bisection-safeguarded Newton iteration.

use crate::error::{Error, Result};

/// Iteration budget and tolerance for iterative kernels.
#[derive(Debug, Clone, Copy)]
pub struct Accuracy {
    /// Relative tolerance, in (0, 1e-3].
    pub rel_tol: f64,
    /// Iteration cap, at least 10.
    pub max_iter: usize,
}

impl Default for Accuracy {
    fn default() -> Self {
        Self { rel_tol: 1e-12, max_iter: 200 }
    }
}

impl Accuracy {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-3) {
            return Err(Error::Config(format!(
                "rel_tol must be in (0, 1e-3], got {}",
                self.rel_tol
            )));
        }
        if self.max_iter < 10 {
            return Err(Error::Config(format!(
                "max_iter must be at least 10, got {}",
                self.max_iter
            )));
        }
        Ok(())
    }
}

/// Internal convergence threshold for series/continued-fraction kernels.
const KERNEL_EPS: f64 = 1e-15;
const KERNEL_MAX_ITER: usize = 500;

// Lanczos approximation, g = 607/128, 15 terms (Godfrey's coefficient set).
// Relative error below 1e-14 over the positive real axis.
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_87e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_49e-3,
    -0.210_264_441_724_104_88e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_89e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_08e-4,
    0.368_991_826_595_316_27e-5,
];

/// Natural log of the gamma function for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(log_gamma_unchecked(x))
}

fn log_gamma_unchecked(x: f64) -> f64 {
    // Recurrence keeps the Lanczos sum well conditioned for small arguments.
    if x < 0.5 {
        return log_gamma_unchecked(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEF[0];
    for (k, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + sum.ln()
}

/// Regularized lower incomplete gamma P(a, x) = γ(a, x) / Γ(a).
pub fn reg_lower_inc_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("incomplete gamma requires a > 0, got {a}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("incomplete gamma requires x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    // Series below the a+1 crossover, continued fraction above: the standard
    // regime split that avoids cancellation on both sides.
    if x < a + 1.0 {
        Ok(lower_gamma_series(a, x)?.0)
    } else {
        Ok(1.0 - upper_gamma_cf(a, x)?.0)
    }
}

/// Unregularized upper incomplete gamma Γ(a, x) = ∫_x^∞ t^(a-1) e^(-t) dt.
pub fn upper_inc_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("upper_inc_gamma requires a > 0, got {a}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("upper_inc_gamma requires x >= 0, got {x}")));
    }
    let ln_gamma_a = log_gamma_unchecked(a);
    if x == 0.0 {
        return Ok(ln_gamma_a.exp());
    }
    if x < a + 1.0 {
        let (p, _) = lower_gamma_series(a, x)?;
        Ok((1.0 - p) * ln_gamma_a.exp())
    } else {
        // The continued fraction yields Γ(a, x) directly as e^(-x) x^a · h,
        // which stays finite far into the tail where the regularized form
        // underflows.
        let (_, h) = upper_gamma_cf(a, x)?;
        Ok((a * x.ln() - x).exp() * h)
    }
}

/// Series for P(a, x); returns (P, raw sum). Valid for 0 < x < a + 1.
fn lower_gamma_series(a: f64, x: f64) -> Result<(f64, f64)> {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut n = 1.0;
    for _ in 0..KERNEL_MAX_ITER {
        term *= x / (a + n);
        sum += term;
        if term.abs() < sum.abs() * KERNEL_EPS {
            let p = (a * x.ln() - x - log_gamma_unchecked(a)).exp() * sum;
            return Ok((p.clamp(0.0, 1.0), sum));
        }
        n += 1.0;
    }
    Err(Error::Convergence(format!(
        "lower incomplete gamma series stalled at a={a}, x={x}"
    )))
}

/// Lentz continued fraction for the upper tail; returns (Q, h) where
/// Γ(a, x) = e^(-x) x^a · h and Q = Γ(a, x) / Γ(a). Valid for x >= a + 1.
fn upper_gamma_cf(a: f64, x: f64) -> Result<(f64, f64)> {
    const FPMIN: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=KERNEL_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < KERNEL_EPS {
            let q = (a * x.ln() - x - log_gamma_unchecked(a)).exp() * h;
            return Ok((q.clamp(0.0, 1.0), h));
        }
    }
    Err(Error::Convergence(format!(
        "upper incomplete gamma continued fraction stalled at a={a}, x={x}"
    )))
}

/// Regularized incomplete beta ratio I_x(a, b).
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!(
            "reg_inc_beta requires a > 0 and b > 0, got a={a}, b={b}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("reg_inc_beta requires x in [0, 1], got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_beta = log_gamma_unchecked(a) + log_gamma_unchecked(b) - log_gamma_unchecked(a + b);
    let front = (a * x.ln() + b * (1.0 - x).ln() - ln_beta).exp();
    // Continued fraction converges fastest below the mean of the beta;
    // above it, evaluate the complement and reflect.
    let value = if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x)? / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x)? / b
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Modified Lentz continued fraction for the incomplete beta.
fn beta_cf(a: f64, b: f64, x: f64) -> Result<f64> {
    const FPMIN: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=KERNEL_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < KERNEL_EPS {
            return Ok(h);
        }
    }
    Err(Error::Convergence(format!(
        "incomplete beta continued fraction stalled at a={a}, b={b}, x={x}"
    )))
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
///
/// Computed from the continued fraction directly for x >= a + 1, so the
/// deep tail keeps full relative precision instead of cancelling against 1.
pub fn reg_upper_inc_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("incomplete gamma requires a > 0, got {a}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("incomplete gamma requires x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - lower_gamma_series(a, x)?.0)
    } else {
        Ok(upper_gamma_cf(a, x)?.0)
    }
}

/// Quantile of the unit-scale gamma distribution with shape k:
/// the t with P(k, t) = u.
pub fn gamma_quantile(u: f64, k: f64) -> Result<f64> {
    gamma_quantile_with(u, k, &Accuracy::default())
}

/// Gamma quantile in tail-mass parameterization: the t with Q(k, t) = w.
///
/// Equivalent to `gamma_quantile(1 - w, k)` but remains accurate for tail
/// masses far below machine epsilon, where 1 - w is not representable.
pub fn gamma_quantile_upper(w: f64, k: f64) -> Result<f64> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("gamma_quantile_upper requires k > 0, got {k}")));
    }
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::Domain(format!(
            "gamma_quantile_upper requires w in (0, 1), got {w}"
        )));
    }
    if w >= 0.5 {
        // 1 - w is exactly representable here.
        return gamma_quantile(1.0 - w, k);
    }

    let acc = Accuracy::default();
    let mut lo = 0.0_f64;
    let mut hi = k + 10.0 * k.sqrt() + 20.0;
    let mut expansions = 0;
    while reg_upper_inc_gamma(k, hi)? > w {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::Convergence(format!(
                "gamma_quantile_upper bracket expansion failed at w={w}, k={k}"
            )));
        }
    }

    let ln_gamma_k = log_gamma_unchecked(k);
    let mut t = 0.5 * (lo + hi);
    for _ in 0..acc.max_iter {
        let f = reg_upper_inc_gamma(k, t)? - w;
        if f > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let pdf = ((k - 1.0) * t.ln() - t - ln_gamma_k).exp();
        // dQ/dt = -pdf, so the Newton update moves with the sign of f.
        let mut t_next = if pdf > 0.0 { t + f / pdf } else { 0.5 * (lo + hi) };
        if !(t_next > lo && t_next < hi) || !t_next.is_finite() {
            t_next = 0.5 * (lo + hi);
        }
        let step = (t_next - t).abs();
        t = t_next;
        if step <= 1e-12 * t.max(f64::MIN_POSITIVE) || (hi - lo) <= 1e-12 * hi {
            return Ok(t);
        }
    }
    Err(Error::Convergence(format!(
        "gamma_quantile_upper did not converge at w={w}, k={k}"
    )))
}

/// As [`gamma_quantile`], with explicit iteration control.
pub fn gamma_quantile_with(u: f64, k: f64, acc: &Accuracy) -> Result<f64> {
    acc.validate()?;
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("gamma_quantile requires k > 0, got {k}")));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("gamma_quantile requires u in (0, 1), got {u}")));
    }

    // Bracket the root; the initial cap covers the bulk of the distribution
    // and is expanded geometrically for extreme u.
    let mut lo = 0.0_f64;
    let mut hi = k + 10.0 * k.sqrt() + 20.0;
    let mut expansions = 0;
    while reg_lower_inc_gamma(k, hi)? < u {
        hi *= 2.0;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::Convergence(format!(
                "gamma_quantile bracket expansion failed at u={u}, k={k}"
            )));
        }
    }

    // Wilson-Hilferty starting point, clamped into the bracket.
    let z = normal_quantile(u)?;
    let wh = {
        let c = 1.0 - 1.0 / (9.0 * k) + z / (3.0 * k.sqrt());
        k * c * c * c
    };
    let mut t = if wh.is_finite() && wh > 0.0 && wh < hi { wh } else { 0.5 * hi };

    let ln_gamma_k = log_gamma_unchecked(k);
    let tol = acc.rel_tol.min(1e-12);
    for _ in 0..acc.max_iter {
        let f = reg_lower_inc_gamma(k, t)? - u;
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let pdf = ((k - 1.0) * t.ln() - t - ln_gamma_k).exp();
        let mut t_next = if pdf > 0.0 { t - f / pdf } else { 0.5 * (lo + hi) };
        if !(t_next > lo && t_next < hi) || !t_next.is_finite() {
            t_next = 0.5 * (lo + hi);
        }
        let step = (t_next - t).abs();
        t = t_next;
        if step <= tol * t.max(f64::MIN_POSITIVE) || (hi - lo) <= tol * hi {
            return Ok(t);
        }
    }
    Err(Error::Convergence(format!(
        "gamma_quantile did not converge at u={u}, k={k}"
    )))
}

/// Quantile of the standard normal distribution (Wichura's AS 241, PPND16).
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("normal_quantile requires p in (0, 1), got {p}")));
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return Ok(q * poly7(&PPND_A, r) / poly7_one(&PPND_B, r));
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        poly7(&PPND_C, r) / poly7_one(&PPND_D, r)
    } else {
        let r = r - 5.0;
        poly7(&PPND_E, r) / poly7_one(&PPND_F, r)
    };
    Ok(if q < 0.0 { -val } else { val })
}

fn poly7(c: &[f64; 8], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * r + ci)
}

/// Denominator polynomials have an implicit leading 1.
fn poly7_one(c: &[f64; 7], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * r + ci) * r + 1.0
}

const PPND_A: [f64; 8] = [
    3.387_132_872_796_366_5,
    133.141_667_891_784_38,
    1_971.590_950_306_551_3,
    13_731.693_765_509_461,
    45_921.953_931_549_87,
    67_265.770_927_008_7,
    33_430.575_583_588_13,
    2_509.080_928_730_122_7,
];
const PPND_B: [f64; 7] = [
    42.313_330_701_600_91,
    687.187_007_492_057_9,
    5_394.196_021_424_751,
    21_213.794_301_586_597,
    39_307.895_800_092_71,
    28_729.085_735_721_943,
    5_226.495_278_852_545_5,
];
const PPND_C: [f64; 8] = [
    1.423_437_110_749_683_5,
    4.630_337_846_156_546,
    5.769_497_221_460_691,
    3.647_848_324_763_204_5,
    1.270_458_252_452_368_4,
    0.241_780_725_177_450_6,
    0.022_723_844_989_269_184,
    0.000_774_545_014_278_341_4,
];
const PPND_D: [f64; 7] = [
    2.053_191_626_637_758_8,
    1.676_384_830_183_803_8,
    0.689_767_334_985_1,
    0.148_103_976_427_480_08,
    0.015_198_666_563_616_457,
    0.000_547_593_808_499_534_5,
    0.000_000_001_050_750_071_644_416_9,
];
const PPND_E: [f64; 8] = [
    6.657_904_643_501_103,
    5.463_784_911_164_114,
    1.784_826_539_917_291_3,
    0.296_560_571_828_504_87,
    0.026_532_189_526_576_124,
    0.001_242_660_947_388_078_4,
    0.000_027_115_555_687_434_876,
    0.000_000_201_033_439_929_228_81,
];
const PPND_F: [f64; 7] = [
    0.599_832_206_555_887_9,
    0.136_929_880_922_735_8,
    0.014_875_361_290_850_615,
    0.000_786_869_131_145_613_3,
    0.000_018_463_183_175_100_548,
    0.000_000_142_151_175_831_644_59,
    0.000_000_000_000_002_044_263_103_389_939_7,
];
