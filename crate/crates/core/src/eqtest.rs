//! Two-sample supremum test of equal persistence curves on a trimmed
//! upper-tail interval, calibrated by a pooled-null bootstrap.
//!
//! The statistic is the scaled supremum of the absolute difference between
//! the two empirical persistence curves over the grid on [u_lower, u_upper]:
//!
//! ```text
//! T = sqrt(n_ref * n_bio / (n_ref + n_bio)) * max_u |P_ref(u) - P_bio(u)|
//! ```
//!
//! Calibration resamples both arms from the pooled data B times and takes
//! the empirical (1-alpha) quantile of the replicated statistics. The test
//! REJECTS the null hypothesis of equality when the p-value falls below
//! alpha; a small statistic is evidence consistent with equal persistence,
//! not a formal equivalence claim (there is no margin).

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::empirical::{self, SampleArm};
use crate::error::{Error, Result};
use crate::rng;

/// Default seed used across the command-line tools; any fixed value works,
/// it only has to be stable so runs reproduce by default.
pub const DEFAULT_SEED: u64 = 12345;

/// Configuration of the two-sample test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestConfig {
    pub u_lower: f64,
    pub u_upper: f64,
    pub grid_step: f64,
    #[serde(rename = "B")]
    pub b: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            u_lower: 0.60,
            u_upper: 0.90,
            grid_step: 0.01,
            b: 1000,
            alpha: 0.05,
            seed: DEFAULT_SEED,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.u_lower > 0.0 && self.u_lower < self.u_upper && self.u_upper < 1.0) {
            return Err(Error::Config(format!(
                "need 0 < u_lower < u_upper < 1, got [{}, {}]",
                self.u_lower, self.u_upper
            )));
        }
        if !(self.grid_step > 0.0 && self.grid_step <= 0.5) {
            return Err(Error::Config(format!("grid_step must be in (0, 0.5], got {}", self.grid_step)));
        }
        if self.b < 200 {
            return Err(Error::Config(format!("bootstrap needs B >= 200, got {}", self.b)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!("alpha must be in (0, 1], got {}", self.alpha)));
        }
        Ok(())
    }

    /// The evaluation grid: u_lower stepped by grid_step, with u_upper
    /// appended when the stepping does not land on it.
    pub fn u_grid(&self) -> Vec<f64> {
        let span = self.u_upper - self.u_lower;
        let steps = (span / self.grid_step + 1e-9).floor() as usize;
        let mut grid: Vec<f64> =
            (0..=steps).map(|i| self.u_lower + i as f64 * self.grid_step).collect();
        let last = *grid.last().unwrap();
        if self.u_upper - last > 1e-9 {
            grid.push(self.u_upper);
        } else {
            *grid.last_mut().unwrap() = self.u_upper;
        }
        grid
    }

    fn validate_against(&self, ref_arm: &SampleArm, bio_arm: &SampleArm) -> Result<()> {
        self.validate()?;
        for arm in [ref_arm, bio_arm] {
            let n = arm.len();
            let k = empirical::tail_index(n, self.u_upper);
            if k >= n {
                return Err(Error::TailEmpty { k, n });
            }
        }
        Ok(())
    }
}

/// Full outcome of one test run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceResult {
    pub statistic: f64,
    pub crit_value: f64,
    pub p_value: f64,
    pub reject_equality: bool,
    pub n_ref: usize,
    pub n_bio: usize,
    #[serde(flatten)]
    pub config: TestConfig,
}

fn scale_factor(n_ref: usize, n_bio: usize) -> f64 {
    let (a, b) = (n_ref as f64, n_bio as f64);
    (a * b / (a + b)).sqrt()
}

/// Unscaled supremum of |P_ref - P_bio| over the grid.
fn sup_diff(ref_arm: &SampleArm, bio_arm: &SampleArm, grid: &[f64]) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for &u in grid {
        let d = (empirical::empirical_qepf(ref_arm, u)? - empirical::empirical_qepf(bio_arm, u)?)
            .abs();
        sup = sup.max(d);
    }
    Ok(sup)
}

/// The scaled supremum statistic.
pub fn sup_statistic(ref_arm: &SampleArm, bio_arm: &SampleArm, config: &TestConfig) -> Result<f64> {
    config.validate_against(ref_arm, bio_arm)?;
    let grid = config.u_grid();
    Ok(scale_factor(ref_arm.len(), bio_arm.len()) * sup_diff(ref_arm, bio_arm, &grid)?)
}

/// Runs the test: observed statistic, pooled-null bootstrap calibration,
/// finite-sample-corrected p-value, and the reject/retain decision.
/// Deterministic for a given (data, config, seed).
pub fn run_test(
    ref_arm: &SampleArm,
    bio_arm: &SampleArm,
    config: &TestConfig,
) -> Result<EquivalenceResult> {
    config.validate_against(ref_arm, bio_arm)?;
    let grid = config.u_grid();
    let n_ref = ref_arm.len();
    let n_bio = bio_arm.len();
    let scale = scale_factor(n_ref, n_bio);
    let statistic = scale * sup_diff(ref_arm, bio_arm, &grid)?;

    let mut pool = Vec::with_capacity(n_ref + n_bio);
    pool.extend_from_slice(ref_arm.values());
    pool.extend_from_slice(bio_arm.values());

    let boot: Vec<f64> = (0..config.b)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng::rng_from_seed(rng::derive_seed(config.seed, &[0xE0, rep as u64]));
            let mut draw = |m: usize| -> SampleArm {
                let mut values: Vec<f64> =
                    (0..m).map(|_| pool[rng.random_range(0..pool.len())]).collect();
                values.sort_unstable_by(f64::total_cmp);
                SampleArm::from_sorted_unchecked(values, "boot")
            };
            let a = draw(n_ref);
            let b = draw(n_bio);
            // Feasibility was checked at the original sizes, which the
            // resamples share.
            scale * sup_diff(&a, &b, &grid).expect("bootstrap replicate stays feasible")
        })
        .collect();

    let exceed = boot.iter().filter(|&&t| t >= statistic).count();
    let p_value = (1 + exceed) as f64 / (config.b + 1) as f64;

    let mut sorted = boot;
    sorted.sort_unstable_by(f64::total_cmp);
    let crit_ix = ((config.b as f64) * (1.0 - config.alpha)).ceil() as usize;
    let crit_value = sorted[crit_ix.clamp(1, config.b) - 1];

    Ok(EquivalenceResult {
        statistic,
        crit_value,
        p_value,
        reject_equality: p_value < config.alpha,
        n_ref,
        n_bio,
        config: *config,
    })
}

/// One row of a sensitivity scan.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub u_lower: f64,
    pub u_upper: f64,
    pub n_eff: usize,
    pub width: f64,
    /// The test outcome, or the error message for an infeasible interval.
    pub outcome: std::result::Result<ScanOutcome, String>,
}

#[derive(Debug, Clone, Copy)]
pub struct ScanOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub crit_value: f64,
}

/// Reruns the test over a list of intervals; rows with infeasible grids
/// carry their error and the scan continues.
pub fn sensitivity_scan(
    ref_arm: &SampleArm,
    bio_arm: &SampleArm,
    intervals: &[(f64, f64)],
    base: &TestConfig,
) -> Vec<ScanRow> {
    let n_eff = ref_arm.len() + bio_arm.len();
    intervals
        .iter()
        .map(|&(lo, hi)| {
            let config = TestConfig { u_lower: lo, u_upper: hi, ..*base };
            let outcome = run_test(ref_arm, bio_arm, &config)
                .map(|r| ScanOutcome {
                    statistic: r.statistic,
                    p_value: r.p_value,
                    crit_value: r.crit_value,
                })
                .map_err(|e| e.to_string());
            ScanRow { u_lower: lo, u_upper: hi, n_eff, width: hi - lo, outcome }
        })
        .collect()
}

pub const SCAN_CSV_HEADER: &str = "u_lower,u_upper,statistic,n_eff,p_value,crit95_boot,width";

/// Sensitivity-scan rows as CSV; infeasible rows carry NA in the test
/// columns.
pub fn scan_to_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from(SCAN_CSV_HEADER);
    out.push('\n');
    for r in rows {
        match &r.outcome {
            Ok(o) => out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.u_lower, r.u_upper, o.statistic, r.n_eff, o.p_value, o.crit_value, r.width
            )),
            Err(_) => out.push_str(&format!(
                "{},{},NA,{},NA,NA,{}\n",
                r.u_lower, r.u_upper, r.n_eff, r.width
            )),
        }
    }
    out
}

/// The sixteen-interval scan layout: lower endpoints 0.10 through 0.80 in
/// steps of 0.05 against 0.90, plus (0.85, 0.975).
pub fn standard_scan_intervals() -> Vec<(f64, f64)> {
    let mut intervals: Vec<(f64, f64)> =
        (0..15).map(|i| (0.10 + 0.05 * i as f64, 0.90)).collect();
    intervals.push((0.85, 0.975));
    intervals
}
