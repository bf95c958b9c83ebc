//! Stationary-point detection for the persistence curve and the shift
//! solver that places a stationary point at a chosen quantile.
//!
//! At a stationary point u* the balance identity
//! `H(u*) = 1/M(u*) + 1/Q(u*)` holds, equivalently `P(u*) = H(u*) M(u*)`.
//! Conversely, for a target u* the additive shift
//! `a = 1/(H(u*) - 1/M(u*)) - Q(u*)` makes the shifted model stationary
//! there, provided `H(u*) > 1/M(u*)` and the resulting a is positive.

use crate::dist::QuantileModel;
use crate::error::{Error, Result};
use crate::persistence::{hazard_quantile, mrq, qepf};
use crate::quad::Quadrature;

/// A verified stationary point of P(u).
#[derive(Debug, Clone, Copy)]
pub struct StationaryReport {
    /// Location of the stationary point.
    pub u_star: f64,
    /// H(u*) - 1/M(u*) - 1/Q(u*), evaluated on the model as given.
    pub balance_residual: f64,
    /// P(u*).
    pub p_at_ustar: f64,
}

/// Central-difference step for the numerical derivative of P.
const DERIV_STEP: f64 = 1e-5;
/// Derivative magnitudes below this are treated as numerically zero, so
/// constant-persistence models (Pareto) report no stationary points.
const DERIV_NOISE_FLOOR: f64 = 1e-8;
/// Bisection exit threshold on |P'|.
const DERIV_TOL: f64 = 1e-9;
/// Residual bound for accepting a root as a verified stationary point.
const BALANCE_TOL: f64 = 1e-6;

fn qepf_derivative(model: &QuantileModel, u: f64, quad: &Quadrature) -> Result<f64> {
    let hi = qepf(model, u + DERIV_STEP, quad)?;
    let lo = qepf(model, u - DERIV_STEP, quad)?;
    Ok((hi - lo) / (2.0 * DERIV_STEP))
}

/// Scans (grid_step, 1 - grid_step) for strict sign changes of P', refines
/// each bracket by bisection, and verifies the balance identity at every
/// root. Monotone (and constant) persistence yields an empty list.
///
/// Derivative magnitudes below the noise floor count as zero; a root is a
/// transition between a strictly positive and a strictly negative scan
/// value, possibly across a run of zeros (which happens whenever the root
/// lands on a scan point). Constant persistence is all zeros and yields no
/// transition.
pub fn find_stationary_points(
    model: &QuantileModel,
    quad: &Quadrature,
    grid_step: f64,
) -> Result<Vec<StationaryReport>> {
    if !(1e-4..=0.05).contains(&grid_step) {
        return Err(Error::Config(format!(
            "grid_step must be in [1e-4, 0.05], got {grid_step}"
        )));
    }

    let mut scan_u = Vec::new();
    let mut u = grid_step;
    while u < 1.0 - grid_step + 1e-12 {
        scan_u.push(u.min(1.0 - grid_step));
        u += grid_step;
    }
    let derivs = scan_u
        .iter()
        .map(|&u| qepf_derivative(model, u, quad))
        .collect::<Result<Vec<f64>>>()?;

    let mut reports: Vec<StationaryReport> = Vec::new();
    let mut prev_signed: Option<(usize, f64)> = None;
    for (i, &d) in derivs.iter().enumerate() {
        if d.abs() <= DERIV_NOISE_FLOOR {
            continue;
        }
        if let Some((pi, pd)) = prev_signed {
            if pd.signum() != d.signum() {
                let root = bisect_derivative(model, quad, scan_u[pi], scan_u[i], pd)?;
                let residual = balance_residual(model, root, quad)?;
                if residual.abs() <= BALANCE_TOL {
                    reports.push(StationaryReport {
                        u_star: root,
                        balance_residual: residual,
                        p_at_ustar: qepf(model, root, quad)?,
                    });
                }
            }
        }
        prev_signed = Some((i, d));
    }
    Ok(reports)
}

fn bisect_derivative(
    model: &QuantileModel,
    quad: &Quadrature,
    mut lo: f64,
    mut hi: f64,
    d_lo: f64,
) -> Result<f64> {
    let sign_lo = d_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let d = qepf_derivative(model, mid, quad)?;
        if d.abs() <= DERIV_TOL || (hi - lo) <= 1e-12 {
            return Ok(mid);
        }
        if d.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn balance_residual(model: &QuantileModel, u: f64, quad: &Quadrature) -> Result<f64> {
    let h = hazard_quantile(model, u)?;
    let m = mrq(model, u, quad)?;
    let q = model.quantile(u)?;
    Ok(h - 1.0 / m - 1.0 / q)
}

/// Solves for the additive shift a that makes P of the shifted model
/// stationary at `u_star`, and verifies the balance residual on the
/// shifted model before returning.
pub fn solve_shift_for_stationarity(model: &QuantileModel, u_star: f64) -> Result<f64> {
    if !(u_star > 0.0 && u_star < 1.0) {
        return Err(Error::Domain(format!("u_star must be in (0, 1), got {u_star}")));
    }
    let quad = Quadrature::default();
    let h = hazard_quantile(model, u_star)?;
    let m = mrq(model, u_star, &quad)?;
    let q = model.quantile(u_star)?;

    let denom = h - 1.0 / m;
    if denom <= 0.0 {
        return Err(Error::Infeasible(format!(
            "H(u*) = {h} does not exceed 1/M(u*) = {}; no positive shift exists",
            1.0 / m
        )));
    }
    let a = 1.0 / denom - q;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Infeasible(format!(
            "solved shift a = {a} is not positive at u* = {u_star}"
        )));
    }

    let shifted = model.shifted_by(a)?;
    let residual = balance_residual(&shifted, u_star, &quad)?;
    if residual.abs() > 1e-10 {
        return Err(Error::Convergence(format!(
            "balance residual {residual:e} exceeds 1e-10 after shifting by {a}"
        )));
    }
    Ok(a)
}
