//! Quantile-function models of the supported lifetime families, with
//! analytic density-quantile derivatives, closed-form persistence where one
//! exists, and inverse-transform sampling.
//!
//! A model is the unit-parameterization quantile function `Q0(u)` of a
//! family composed with an affine map: `Q(u) = scale * Q0(u) + shift`.
//! Persistence is invariant under `scale` and attenuates toward 1 under
//! `shift`, so closed forms apply only at `shift = 0` and callers fall back
//! to quadrature otherwise.

use std::fmt;
use std::str::FromStr;

use crate::empirical::SampleArm;
use crate::error::{Error, Result};
use crate::rng;
use crate::specfun;

/// A lifetime family in its unit parameterization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Q(u) = u on (0, 1).
    Uniform,
    /// Q(u) = -log(1-u) / lambda.
    Exponential { lambda: f64 },
    /// Q(u) = alpha * (u / (1-u))^(1/beta); finite mean needs beta > 1.
    LogLogistic { alpha: f64, beta: f64 },
    /// Q(u) = alpha * u^(1/beta).
    Power { alpha: f64, beta: f64 },
    /// Q(u) = (1/lambda) * (-log(1-u))^(1/k).
    Weibull { k: f64, lambda: f64 },
    /// Q(u) = theta * G^{-1}(u; k), the gamma inverse CDF at unit scale.
    Gamma { k: f64, theta: f64 },
    /// Q(u) = sigma * (1-u)^(-1/alpha); finite mean needs alpha > 1.
    ParetoI { alpha: f64, sigma: f64 },
    /// Q(u) = -(alpha+mu) * log(1-u) - 2 * alpha * u, the linear
    /// mean-residual-quantile family.
    Lmrqd { alpha: f64, mu: f64 },
    /// Q(u) = u^2 (the Beta(1/2, 1) quantile).
    BetaHalfOne,
    /// Q(u) = exp(meanlog + sdlog * z(u)). No closed-form persistence;
    /// included for the two-sample simulation scenarios.
    Lognormal { meanlog: f64, sdlog: f64 },
}

impl Family {
    fn validate(&self) -> Result<()> {
        let bad = |name: &str, v: f64| {
            Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
        };
        let pos = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                bad(name, v)
            }
        };
        match *self {
            Family::Uniform | Family::BetaHalfOne => Ok(()),
            Family::Exponential { lambda } => pos("lambda", lambda),
            Family::LogLogistic { alpha, beta } => {
                pos("alpha", alpha)?;
                pos("beta", beta)
            }
            Family::Power { alpha, beta } => {
                pos("alpha", alpha)?;
                pos("beta", beta)
            }
            Family::Weibull { k, lambda } => {
                pos("k", k)?;
                pos("lambda", lambda)
            }
            Family::Gamma { k, theta } => {
                pos("k", k)?;
                pos("theta", theta)
            }
            Family::ParetoI { alpha, sigma } => {
                pos("alpha", alpha)?;
                pos("sigma", sigma)
            }
            Family::Lmrqd { alpha, mu } => {
                pos("mu", mu)?;
                if alpha.is_finite() {
                    Ok(())
                } else {
                    bad("alpha", alpha)
                }
            }
            Family::Lognormal { meanlog, sdlog } => {
                pos("sdlog", sdlog)?;
                if meanlog.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("meanlog must be finite, got {meanlog}")))
                }
            }
        }
    }
}

/// A distribution expressed through its quantile function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileModel {
    family: Family,
    scale: f64,
    shift: f64,
}

impl QuantileModel {
    /// Builds a model with scale 1 and shift 0, running the construction
    /// checks (parameter validity and the 99-point monotonicity grid).
    pub fn new(family: Family) -> Result<Self> {
        Self::with_affine(family, 1.0, 0.0)
    }

    /// Builds `scale * Q0(u) + shift`.
    pub fn with_affine(family: Family, scale: f64, shift: f64) -> Result<Self> {
        family.validate()?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!("scale must be positive, got {scale}")));
        }
        if !(shift >= 0.0 && shift.is_finite()) {
            return Err(Error::Domain(format!("shift must be nonnegative, got {shift}")));
        }
        let model = Self { family, scale, shift };
        model.monotonicity_grid_check()?;
        Ok(model)
    }

    /// The same family with a different scale multiplier.
    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        Self::with_affine(self.family, scale, self.shift)
    }

    /// The same family with a different location shift.
    pub fn with_shift(&self, shift: f64) -> Result<Self> {
        Self::with_affine(self.family, self.scale, shift)
    }

    /// Adds `extra` to the current shift.
    pub fn shifted_by(&self, extra: f64) -> Result<Self> {
        Self::with_affine(self.family, self.scale, self.shift + extra)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Whether the model has a finite mean, which every integrated
    /// functional (vitality, Lorenz, persistence) requires.
    pub fn has_finite_mean(&self) -> bool {
        match self.family {
            Family::ParetoI { alpha, .. } => alpha > 1.0,
            Family::LogLogistic { beta, .. } => beta > 1.0,
            _ => true,
        }
    }

    pub(crate) fn require_finite_mean(&self) -> Result<()> {
        if self.has_finite_mean() {
            Ok(())
        } else {
            Err(Error::InfiniteMean(format!("{self} has no finite mean")))
        }
    }

    fn monotonicity_grid_check(&self) -> Result<()> {
        let mut prev = f64::NEG_INFINITY;
        for i in 1..100 {
            let u = i as f64 / 100.0;
            let q = self.quantile(u)?;
            if !q.is_finite() || q <= prev {
                return Err(Error::NonMonotone(format!(
                    "{self}: Q({u}) = {q} does not increase past {prev}"
                )));
            }
            prev = q;
        }
        Ok(())
    }

    /// Q(u) = scale * Q0(u) + shift for u in (0, 1).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_u(u)?;
        Ok(self.scale * self.base_quantile(u)? + self.shift)
    }

    fn base_quantile(&self, u: f64) -> Result<f64> {
        let q = match self.family {
            Family::Uniform => u,
            Family::Exponential { lambda } => -(-u).ln_1p() / lambda,
            Family::LogLogistic { alpha, beta } => alpha * (u / (1.0 - u)).powf(1.0 / beta),
            Family::Power { alpha, beta } => alpha * u.powf(1.0 / beta),
            Family::Weibull { k, lambda } => (-(-u).ln_1p()).powf(1.0 / k) / lambda,
            Family::Gamma { k, theta } => theta * specfun::gamma_quantile(u, k)?,
            Family::ParetoI { alpha, sigma } => sigma * (1.0 - u).powf(-1.0 / alpha),
            Family::Lmrqd { alpha, mu } => -(alpha + mu) * (-u).ln_1p() - 2.0 * alpha * u,
            Family::BetaHalfOne => u * u,
            Family::Lognormal { meanlog, sdlog } => {
                (meanlog + sdlog * specfun::normal_quantile(u)?).exp()
            }
        };
        Ok(q)
    }

    /// Q(1 - w) in tail-mass parameterization, for w in (0, 1).
    ///
    /// The upper-tail quadrature substitution drives w below machine epsilon,
    /// where forming 1 - w would collapse to 1; every family here admits a
    /// direct expression in w.
    pub fn quantile_complement(&self, w: f64) -> Result<f64> {
        check_u(w)?;
        let q = match self.family {
            Family::Uniform => 1.0 - w,
            Family::Exponential { lambda } => -w.ln() / lambda,
            Family::LogLogistic { alpha, beta } => alpha * ((1.0 - w) / w).powf(1.0 / beta),
            Family::Power { alpha, beta } => alpha * (1.0 - w).powf(1.0 / beta),
            Family::Weibull { k, lambda } => (-w.ln()).powf(1.0 / k) / lambda,
            Family::Gamma { k, theta } => theta * specfun::gamma_quantile_upper(w, k)?,
            Family::ParetoI { alpha, sigma } => sigma * w.powf(-1.0 / alpha),
            Family::Lmrqd { alpha, mu } => -(alpha + mu) * w.ln() - 2.0 * alpha * (1.0 - w),
            Family::BetaHalfOne => (1.0 - w) * (1.0 - w),
            Family::Lognormal { meanlog, sdlog } => {
                // z(1 - w) = -z(w) by symmetry.
                (meanlog - sdlog * specfun::normal_quantile(w)?).exp()
            }
        };
        Ok(self.scale * q + self.shift)
    }

    /// q(1 - w) = Q'(1 - w) in tail-mass parameterization.
    pub fn density_quantile_complement(&self, w: f64) -> Result<f64> {
        check_u(w)?;
        let dq = match self.family {
            Family::Uniform => 1.0,
            Family::Exponential { lambda } => 1.0 / (lambda * w),
            Family::LogLogistic { alpha, beta } => {
                alpha / beta * ((1.0 - w) / w).powf(1.0 / beta) / ((1.0 - w) * w)
            }
            Family::Power { alpha, beta } => alpha / beta * (1.0 - w).powf(1.0 / beta - 1.0),
            Family::Weibull { k, lambda } => {
                let t = -w.ln();
                t.powf(1.0 / k - 1.0) / (lambda * k * w)
            }
            Family::Gamma { k, theta } => {
                let t = specfun::gamma_quantile_upper(w, k)?;
                let ln_g = (k - 1.0) * t.ln() - t - specfun::log_gamma(k)?;
                theta * (-ln_g).exp()
            }
            Family::ParetoI { alpha, sigma } => sigma / alpha * w.powf(-1.0 / alpha - 1.0),
            Family::Lmrqd { alpha, mu } => (alpha + mu) / w - 2.0 * alpha,
            Family::BetaHalfOne => 2.0 * (1.0 - w),
            Family::Lognormal { meanlog, sdlog } => {
                let z = -specfun::normal_quantile(w)?;
                let q = (meanlog + sdlog * z).exp();
                sdlog * q * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * z * z).exp()
            }
        };
        Ok(self.scale * dq)
    }

    /// The density-quantile derivative q(u) = Q'(u), analytic per family.
    pub fn density_quantile(&self, u: f64) -> Result<f64> {
        check_u(u)?;
        let dq = match self.family {
            Family::Uniform => 1.0,
            Family::Exponential { lambda } => 1.0 / (lambda * (1.0 - u)),
            Family::LogLogistic { alpha, beta } => {
                alpha / beta * (u / (1.0 - u)).powf(1.0 / beta) / (u * (1.0 - u))
            }
            Family::Power { alpha, beta } => alpha / beta * u.powf(1.0 / beta - 1.0),
            Family::Weibull { k, lambda } => {
                let t = -(-u).ln_1p();
                t.powf(1.0 / k - 1.0) / (lambda * k * (1.0 - u))
            }
            Family::Gamma { k, theta } => {
                // dQ/du = theta / g(t) with g the unit-scale gamma density.
                let t = specfun::gamma_quantile(u, k)?;
                let ln_g = (k - 1.0) * t.ln() - t - specfun::log_gamma(k)?;
                theta * (-ln_g).exp()
            }
            Family::ParetoI { alpha, sigma } => {
                sigma / alpha * (1.0 - u).powf(-1.0 / alpha - 1.0)
            }
            Family::Lmrqd { alpha, mu } => (alpha + mu) / (1.0 - u) - 2.0 * alpha,
            Family::BetaHalfOne => 2.0 * u,
            Family::Lognormal { meanlog, sdlog } => {
                let z = specfun::normal_quantile(u)?;
                let q = (meanlog + sdlog * z).exp();
                sdlog * q * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * z * z).exp()
            }
        };
        Ok(self.scale * dq)
    }

    /// Closed-form persistence where the family has one, at shift 0.
    ///
    /// Returns `Ok(None)` when no closed form applies (shifted models, and
    /// the lognormal family); callers then evaluate by quadrature. Scale is
    /// irrelevant: persistence is invariant under positive scaling.
    ///
    /// The gamma form is normalized by 1/Γ(k) so that k = 1 reduces exactly
    /// to the exponential case; see the crate docs.
    pub fn closed_form_qepf(&self, u: f64) -> Result<Option<f64>> {
        check_u(u)?;
        self.require_finite_mean()?;
        if self.shift != 0.0 {
            return Ok(None);
        }
        let value = match self.family {
            Family::Uniform => (1.0 + u) / (2.0 * u),
            Family::Exponential { .. } => 1.0 - 1.0 / (-u).ln_1p(),
            Family::LogLogistic { beta, .. } => {
                let a = 1.0 + 1.0 / beta;
                let b = 1.0 - 1.0 / beta;
                let ln_b = specfun::log_gamma(a)? + specfun::log_gamma(b)?
                    - specfun::log_gamma(a + b)?;
                let tail = 1.0 - specfun::reg_inc_beta(u, a, b)?;
                u.powf(-1.0 / beta) * (1.0 - u).powf(1.0 / beta - 1.0) * ln_b.exp() * tail
            }
            Family::Power { beta, .. } => {
                beta * (1.0 - u.powf(1.0 + 1.0 / beta))
                    / ((1.0 - u) * u.powf(1.0 / beta) * (beta + 1.0))
            }
            Family::Weibull { k, .. } => {
                let t = -(-u).ln_1p();
                // e^t Γ(1 + 1/k, t) / t^(1/k), with e^t = 1/(1-u).
                specfun::upper_inc_gamma(1.0 + 1.0 / k, t)? / ((1.0 - u) * t.powf(1.0 / k))
            }
            Family::Gamma { k, .. } => {
                // Γ(k+1, t) / (Γ(k) (1-u) t) = k Q_reg(k+1, t) / ((1-u) t).
                let t = specfun::gamma_quantile(u, k)?;
                let tail = 1.0 - specfun::reg_lower_inc_gamma(k + 1.0, t)?;
                k * tail / ((1.0 - u) * t)
            }
            Family::ParetoI { alpha, .. } => alpha / (alpha - 1.0),
            Family::Lmrqd { alpha, mu } => 1.0 + (mu + alpha * u) / self.base_quantile(u)?,
            Family::BetaHalfOne => (1.0 + u + u * u) / (3.0 * u * u),
            Family::Lognormal { .. } => return Ok(None),
        };
        Ok(Some(value))
    }

    /// n i.i.d. draws by inverse transform, sorted ascending.
    ///
    /// Deterministic for a given seed; every family shares this single code
    /// path.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleArm> {
        if n < 2 {
            return Err(Error::Domain(format!(
                "sample needs n >= 2 observations, got {n}"
            )));
        }
        let mut rng = rng::rng_from_seed(seed);
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            let u = rng::uniform_open01(&mut rng);
            values.push(self.quantile(u)?);
        }
        SampleArm::new(values, self.to_string())
    }
}

fn check_u(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("u must be in (0, 1), got {u}")))
    }
}

impl fmt::Display for QuantileModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Uniform => write!(f, "uniform")?,
            Family::Exponential { lambda } => write!(f, "exponential lambda={lambda}")?,
            Family::LogLogistic { alpha, beta } => {
                write!(f, "loglogistic alpha={alpha} beta={beta}")?
            }
            Family::Power { alpha, beta } => write!(f, "power alpha={alpha} beta={beta}")?,
            Family::Weibull { k, lambda } => write!(f, "weibull k={k} lambda={lambda}")?,
            Family::Gamma { k, theta } => write!(f, "gamma k={k} theta={theta}")?,
            Family::ParetoI { alpha, sigma } => write!(f, "pareto alpha={alpha} sigma={sigma}")?,
            Family::Lmrqd { alpha, mu } => write!(f, "lmrqd alpha={alpha} mu={mu}")?,
            Family::BetaHalfOne => write!(f, "betahalfone")?,
            Family::Lognormal { meanlog, sdlog } => {
                write!(f, "lognormal meanlog={meanlog} sdlog={sdlog}")?
            }
        }
        if self.scale != 1.0 {
            write!(f, " scale={}", self.scale)?;
        }
        if self.shift != 0.0 {
            write!(f, " shift={}", self.shift)?;
        }
        Ok(())
    }
}

/// Parses a model specification string: a family name followed by
/// `key=value` parameters, e.g. `"weibull k=2 lambda=1 shift=0.5"`.
impl FromStr for QuantileModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut tokens = s.split_whitespace();
        let family_name = tokens
            .next()
            .ok_or_else(|| Error::Parse("empty model specification".into()))?
            .to_ascii_lowercase();

        let mut params: Vec<(String, f64)> = Vec::new();
        for tok in tokens {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{tok}`")))?;
            let value: f64 = value
                .parse()
                .map_err(|_| Error::Parse(format!("`{tok}`: value is not a number")))?;
            let key = key.to_ascii_lowercase();
            if params.iter().any(|(k, _)| *k == key) {
                return Err(Error::Parse(format!("duplicate parameter `{key}`")));
            }
            params.push((key, value));
        }

        let mut take = |key: &str, default: f64| -> f64 {
            match params.iter().position(|(k, _)| k == key) {
                Some(ix) => params.remove(ix).1,
                None => default,
            }
        };

        let scale = take("scale", 1.0);
        let shift = take("shift", 0.0);
        let family = match family_name.as_str() {
            "uniform" => Family::Uniform,
            "exponential" => Family::Exponential { lambda: take("lambda", 1.0) },
            "loglogistic" | "log-logistic" => Family::LogLogistic {
                alpha: take("alpha", 1.0),
                beta: take("beta", 2.0),
            },
            "power" => Family::Power { alpha: take("alpha", 1.0), beta: take("beta", 1.0) },
            "weibull" => Family::Weibull { k: take("k", 1.0), lambda: take("lambda", 1.0) },
            "gamma" => Family::Gamma { k: take("k", 1.0), theta: take("theta", 1.0) },
            "pareto" | "paretoi" => Family::ParetoI {
                alpha: take("alpha", 2.0),
                sigma: take("sigma", 1.0),
            },
            "lmrqd" => Family::Lmrqd { alpha: take("alpha", 0.5), mu: take("mu", 5.0) },
            "betahalfone" => Family::BetaHalfOne,
            "lognormal" => Family::Lognormal {
                meanlog: take("meanlog", 0.0),
                sdlog: take("sdlog", 1.0),
            },
            other => return Err(Error::Parse(format!("unknown family `{other}`"))),
        };
        if let Some((key, _)) = params.first() {
            return Err(Error::Parse(format!(
                "unknown parameter `{key}` for family `{family_name}`"
            )));
        }
        QuantileModel::with_affine(family, scale, shift)
    }
}

/// The families exercised by the estimator study: light, medium, and heavy
/// tails.
pub fn table_bias_mse_models() -> Vec<QuantileModel> {
    vec![
        QuantileModel::new(Family::Lmrqd { alpha: 0.5, mu: 5.0 }).expect("valid"),
        QuantileModel::new(Family::Weibull { k: 2.0, lambda: 1.0 }).expect("valid"),
        QuantileModel::new(Family::ParetoI { alpha: 2.5, sigma: 1.0 }).expect("valid"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(spec: &str) -> QuantileModel {
        spec.parse().unwrap()
    }

    fn all_test_models() -> Vec<QuantileModel> {
        [
            "uniform",
            "exponential lambda=1",
            "loglogistic alpha=1 beta=2.5",
            "power alpha=1 beta=2",
            "weibull k=2 lambda=1",
            "gamma k=2 theta=1",
            "pareto alpha=2.5 sigma=1",
            "lmrqd alpha=0.5 mu=5",
            "betahalfone",
            "lognormal meanlog=0 sdlog=0.5",
        ]
        .iter()
        .map(|s| model(s))
        .collect()
    }

    #[test]
    fn quantile_spot_values() {
        assert!((model("uniform").quantile(0.3).unwrap() - 0.3).abs() <= 1e-15);

        let u = 1.0 - (-1.0_f64).exp();
        assert!((model("exponential lambda=1").quantile(u).unwrap() - 1.0).abs() <= 1e-14);

        // Direct evaluation: -5.5 log(0.1) - 0.9.
        let want = -5.5 * 0.1_f64.ln() - 0.9;
        let got = model("lmrqd alpha=0.5 mu=5").quantile(0.9).unwrap();
        assert!((got - want).abs() <= 1e-12);
        assert!((got - 11.76422).abs() <= 5e-5);
    }

    #[test]
    fn quantile_rejects_u_outside_open_interval() {
        let m = model("uniform");
        assert!(m.quantile(0.0).is_err());
        assert!(m.quantile(1.0).is_err());
        assert!(m.quantile(-0.2).is_err());
        assert!(m.quantile(f64::NAN).is_err());
    }

    #[test]
    fn density_quantile_spot_values() {
        assert!((model("betahalfone").density_quantile(0.4).unwrap() - 0.8).abs() <= 1e-15);
        assert!((model("exponential lambda=2").density_quantile(0.5).unwrap() - 1.0).abs() <= 1e-15);
        assert!((model("uniform").density_quantile(0.77).unwrap() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn density_quantile_matches_finite_difference() {
        let h = 1e-6;
        for m in all_test_models() {
            for i in 1..=19 {
                let u = 0.05 * i as f64;
                let fd = (m.quantile(u + h).unwrap() - m.quantile(u - h).unwrap()) / (2.0 * h);
                let analytic = m.density_quantile(u).unwrap();
                let rel = (fd - analytic).abs() / analytic.abs();
                assert!(rel <= 1e-5, "{m} at u={u}: fd={fd}, analytic={analytic}");
            }
        }
    }

    #[test]
    fn quantile_strictly_increasing_on_grid() {
        for m in all_test_models() {
            let mut prev = f64::NEG_INFINITY;
            for i in 1..100 {
                let q = m.quantile(i as f64 / 100.0).unwrap();
                assert!(q > prev, "{m} not increasing at i={i}");
                prev = q;
            }
        }
    }

    #[test]
    fn closed_form_paper_table_values() {
        let cf = |spec: &str, u: f64| model(spec).closed_form_qepf(u).unwrap().unwrap();
        assert!((cf("pareto alpha=2.5 sigma=1", 0.9) - 1.6667).abs() <= 5e-5);
        assert!((cf("lmrqd alpha=0.5 mu=5", 0.90) - 1.4633).abs() <= 5e-5);
        assert!((cf("weibull k=2 lambda=1", 0.85) - 1.2206).abs() <= 5e-5);
        assert!((cf("uniform", 0.5) - 1.5).abs() <= 1e-14);

        let u = 1.0 - (-1.0_f64).exp();
        assert!((cf("exponential lambda=3", u) - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn closed_form_is_scale_invariant_and_unavailable_when_shifted() {
        let base = model("weibull k=2 lambda=1");
        let scaled = base.with_scale(37.5).unwrap();
        for i in 1..=9 {
            let u = 0.1 * i as f64;
            let a = base.closed_form_qepf(u).unwrap().unwrap();
            let b = scaled.closed_form_qepf(u).unwrap().unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let shifted = base.with_shift(0.25).unwrap();
        assert!(shifted.closed_form_qepf(0.5).unwrap().is_none());
        assert!(model("lognormal meanlog=0 sdlog=0.5").closed_form_qepf(0.5).unwrap().is_none());
    }

    #[test]
    fn pareto_closed_form_constant_across_grid() {
        let m = model("pareto alpha=2.5 sigma=1");
        let want = 2.5 / 1.5;
        for i in 1..=19 {
            let p = m.closed_form_qepf(0.05 * i as f64).unwrap().unwrap();
            assert!((p - want).abs() <= 1e-10);
        }
    }

    #[test]
    fn infinite_mean_families_error_in_closed_form() {
        let pareto = model("pareto alpha=0.8 sigma=1");
        assert!(matches!(pareto.closed_form_qepf(0.5), Err(Error::InfiniteMean(_))));
        let ll = model("loglogistic alpha=1 beta=0.9");
        assert!(matches!(ll.closed_form_qepf(0.5), Err(Error::InfiniteMean(_))));
        // Construction itself is fine; only mean-based functionals reject.
        assert!(pareto.quantile(0.5).is_ok());
    }

    #[test]
    fn lmrqd_admissibility_grid_check() {
        assert!("lmrqd alpha=0.5 mu=5".parse::<QuantileModel>().is_ok());
        // Dominant -2*alpha*u term makes Q decrease early on.
        let err = "lmrqd alpha=5 mu=0.5".parse::<QuantileModel>();
        assert!(matches!(err, Err(Error::NonMonotone(_))));
    }

    #[test]
    fn sample_law_of_large_numbers_and_determinism() {
        let m = model("uniform");
        let arm = m.sample(100_000, 1).unwrap();
        let mean: f64 = arm.values().iter().sum::<f64>() / arm.len() as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean={mean}");

        let e = model("exponential lambda=1");
        let arm = e.sample(100_000, 7).unwrap();
        let mean: f64 = arm.values().iter().sum::<f64>() / arm.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean={mean}");

        let a = e.sample(1000, 99).unwrap();
        let b = e.sample(1000, 99).unwrap();
        assert_eq!(a.values(), b.values());
        let c = e.sample(1000, 100).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn sample_output_is_sorted_and_positive() {
        for m in all_test_models() {
            let arm = m.sample(500, 3).unwrap();
            assert!(arm.values().windows(2).all(|w| w[0] <= w[1]));
            assert!(arm.values().iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let m = model("weibull k=2 lambda=1 shift=0.5");
        assert_eq!(m.shift(), 0.5);
        assert_eq!(m.to_string(), "weibull k=2 lambda=1 shift=0.5");
        let again: QuantileModel = m.to_string().parse().unwrap();
        assert_eq!(m, again);

        let err = "weibull q=3".parse::<QuantileModel>().unwrap_err();
        assert!(err.to_string().contains("`q`"), "{err}");
        let err = "weibull k=abc".parse::<QuantileModel>().unwrap_err();
        assert!(err.to_string().contains("k=abc"), "{err}");
        let err = "gaussian".parse::<QuantileModel>().unwrap_err();
        assert!(err.to_string().contains("gaussian"), "{err}");
        let err = "weibull k=1 k=2".parse::<QuantileModel>().unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn negative_shift_and_scale_rejected() {
        assert!(QuantileModel::with_affine(Family::Uniform, 1.0, -0.1).is_err());
        assert!(QuantileModel::with_affine(Family::Uniform, 0.0, 0.0).is_err());
        assert!(QuantileModel::with_affine(Family::Uniform, -2.0, 0.0).is_err());
    }

    #[test]
    fn complement_forms_match_direct_forms_at_representable_mass() {
        for m in all_test_models() {
            for &w in &[0.5, 0.25, 0.1, 1e-3, 1e-6] {
                let qc = m.quantile_complement(w).unwrap();
                let qd = m.quantile(1.0 - w).unwrap();
                assert!((qc - qd).abs() <= 1e-8 * qd.abs().max(1.0), "{m} at w={w}: {qc} vs {qd}");

                let dc = m.density_quantile_complement(w).unwrap();
                let dd = m.density_quantile(1.0 - w).unwrap();
                assert!((dc - dd).abs() <= 1e-7 * dd.abs(), "{m} density at w={w}: {dc} vs {dd}");
            }
        }
    }

    #[test]
    fn complement_quantile_handles_sub_epsilon_tail_mass() {
        for m in all_test_models() {
            let mut prev = 0.0;
            for &w in &[1e-3, 1e-8, 1e-16, 1e-30, 1e-100] {
                if !m.has_finite_mean() {
                    continue;
                }
                let q = m.quantile_complement(w).unwrap();
                assert!(q.is_finite() && q >= prev, "{m} at w={w}: q={q}, prev={prev}");
                prev = q;
            }
        }
    }
}
