//! One-dimensional quadrature: adaptive Gauss-Kronrod and fixed
//! Gauss-Legendre rules, plus a segment-marching scheme for decaying
//! integrands on [0, ∞).
//!
//! Both rules use open node sets, so integrands are never evaluated at
//! interval endpoints; callers exploit this to integrate quantile functions
//! up to (but not at) u = 0 and u = 1.

use crate::error::{Error, Result};

/// Which integration rule to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadRule {
    /// Adaptive Gauss-Kronrod 7-15 with interval bisection.
    #[default]
    Adaptive,
    /// A fixed n-point Gauss-Legendre panel per interval. Fast, no error
    /// control; intended for bulk curve evaluation.
    FixedGaussLegendre,
}

/// Quadrature configuration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub rule: QuadRule,
    /// Node count for the fixed rule, at least 8.
    pub points: usize,
    /// Relative tolerance for the adaptive rule, in (0, 1e-6].
    pub rel_tol: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { rule: QuadRule::Adaptive, points: 64, rel_tol: 1e-10 }
    }
}

/// Length of each segment when marching over [0, ∞).
const SEGMENT_LEN: f64 = 5.0;
const MAX_SEGMENTS: usize = 400;
/// Cap on subintervals for one adaptive integration.
const MAX_INTERVALS: usize = 4096;

impl Quadrature {
    pub fn validate(&self) -> Result<()> {
        if self.points < 8 {
            return Err(Error::Config(format!(
                "fixed rule needs at least 8 points, got {}",
                self.points
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-6) {
            return Err(Error::Config(format!(
                "quadrature rel_tol must be in (0, 1e-6], got {}",
                self.rel_tol
            )));
        }
        Ok(())
    }

    /// Integral of `f` over the finite interval [a, b].
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        self.validate()?;
        if !(a.is_finite() && b.is_finite()) || a > b {
            return Err(Error::Domain(format!("bad integration interval [{a}, {b}]")));
        }
        if a == b {
            return Ok(0.0);
        }
        match self.rule {
            QuadRule::Adaptive => self.adaptive(&f, a, b),
            QuadRule::FixedGaussLegendre => {
                let (nodes, weights) = gauss_legendre(self.points);
                Ok(gl_panel(&f, a, b, &nodes, &weights))
            }
        }
    }

    /// Integral of `g` over [0, ∞) for integrands with (at least) exponential
    /// decay, marched in fixed-length segments until two consecutive
    /// segments stop contributing.
    pub fn integrate_decaying<F: Fn(f64) -> f64>(&self, g: F) -> Result<f64> {
        self.validate()?;
        let fixed_nodes = match self.rule {
            QuadRule::FixedGaussLegendre => Some(gauss_legendre(self.points)),
            QuadRule::Adaptive => None,
        };
        let mut total = 0.0;
        let mut small_streak = 0;
        for k in 0..MAX_SEGMENTS {
            let a = k as f64 * SEGMENT_LEN;
            let b = a + SEGMENT_LEN;
            let seg = match &fixed_nodes {
                Some((nodes, weights)) => gl_panel(&g, a, b, nodes, weights),
                None => self.adaptive(&g, a, b)?,
            };
            total += seg;
            let cutoff = self.stop_tol() * total.abs().max(f64::MIN_POSITIVE);
            if seg.abs() <= cutoff {
                small_streak += 1;
                if small_streak >= 2 && k >= 1 {
                    return Ok(total);
                }
            } else {
                small_streak = 0;
            }
        }
        Err(Error::Quadrature(
            "tail integral did not decay within the segment budget".into(),
        ))
    }

    fn stop_tol(&self) -> f64 {
        match self.rule {
            QuadRule::Adaptive => self.rel_tol * 1e-2,
            // The fixed rule has no tolerance knob; march until segments
            // stop mattering at the double-precision level.
            QuadRule::FixedGaussLegendre => 1e-15,
        }
    }

    /// Globally adaptive Gauss-Kronrod: repeatedly bisect the subinterval
    /// with the largest error estimate until the summed error meets the
    /// relative tolerance or the interval budget runs out.
    fn adaptive<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> Result<f64> {
        struct Piece {
            a: f64,
            b: f64,
            value: f64,
            err: f64,
            resabs: f64,
            splittable: bool,
        }
        let piece = |a: f64, b: f64| -> Piece {
            let (value, err, resabs) = gk15(f, a, b);
            // Intervals at rounding width cannot be refined further.
            let splittable = (b - a) > 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0);
            Piece { a, b, value, err, resabs, splittable }
        };

        let mut pieces = vec![piece(a, b)];
        loop {
            let value: f64 = pieces.iter().map(|p| p.value).sum();
            let err: f64 = pieces.iter().map(|p| p.err).sum();
            // The resabs term is the rounding floor: integrals that cancel
            // to ~0 cannot be resolved below eps * ∫|f|.
            let resabs: f64 = pieces.iter().map(|p| p.resabs).sum();
            let tol = (self.rel_tol * value.abs())
                .max(50.0 * f64::EPSILON * resabs)
                .max(1e-300);
            if err <= tol {
                return Ok(value);
            }
            let worst = pieces
                .iter()
                .enumerate()
                .filter(|(_, p)| p.splittable)
                .max_by(|(_, x), (_, y)| x.err.total_cmp(&y.err))
                .map(|(i, _)| i);
            let Some(ix) = worst else {
                // Nothing left to refine; accept if the residual is within a
                // lenient multiple of the target, otherwise report failure.
                if err <= 1e3 * tol {
                    return Ok(value);
                }
                return Err(Error::Quadrature(format!(
                    "adaptive rule stalled on [{a}, {b}]: residual {err:e} vs tolerance {tol:e}"
                )));
            };
            if pieces.len() >= MAX_INTERVALS {
                if err <= 1e3 * tol {
                    return Ok(value);
                }
                return Err(Error::Quadrature(format!(
                    "adaptive rule exceeded {MAX_INTERVALS} subintervals on [{a}, {b}]: \
                     residual {err:e} vs tolerance {tol:e}"
                )));
            }
            let Piece { a: pa, b: pb, .. } = pieces.swap_remove(ix);
            let mid = 0.5 * (pa + pb);
            pieces.push(piece(pa, mid));
            pieces.push(piece(mid, pb));
        }
    }
}

// Gauss-Kronrod 7-15 pair on [-1, 1] (QUADPACK dqk15 constants).
const XGK15: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK15: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG7: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_67,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 7-15 pass; returns (K15 estimate, |K15 - G7|, K15 of |f|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut kronrod = WGK15[7] * f_center;
    let mut gauss = WG7[3] * f_center;
    let mut resabs = WGK15[7] * f_center.abs();
    for j in 0..7 {
        let x = half * XGK15[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        kronrod += WGK15[j] * (f1 + f2);
        resabs += WGK15[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG7[j / 2] * (f1 + f2);
        }
    }
    kronrod *= half;
    gauss *= half;
    resabs *= half;
    (kronrod, (kronrod - gauss).abs(), resabs)
}

/// One n-point Gauss-Legendre panel over [a, b].
fn gl_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        sum += w * f(center + half * x);
    }
    sum * half
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) via the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}
