//! Command implementations. Each one builds the complete output document in
//! memory; the caller writes it atomically.

use std::fs;

use qepf::dist::QuantileModel;
use qepf::empirical::{self, SampleArm};
use qepf::eqtest::{self, TestConfig};
use qepf::persistence::{self, CurveKind, PersistenceCurve};
use qepf::rng::derive_seed;
use qepf::simulate;
use qepf::{QuadRule, Quadrature};
use serde_json::json;

use crate::{CliError, CurveArgs, EstimateArgs, Format, Rule, SimulateArgs, Study, TestArgs};

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

fn make_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(min > 0.0 && min <= max && max < 1.0) {
        return Err(CliError::usage(format!(
            "u range must satisfy 0 < u_min <= u_max < 1, got [{min}, {max}]"
        )));
    }
    if !(step > 0.0) {
        return Err(CliError::usage(format!("step must be positive, got {step}")));
    }
    let steps = ((max - min) / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=steps).map(|i| round12(min + i as f64 * step)).collect();
    if max - *grid.last().unwrap() > 1e-9 {
        grid.push(max);
    } else {
        *grid.last_mut().unwrap() = max;
    }
    Ok(grid)
}

fn read_arms(path: &std::path::Path) -> Result<Vec<SampleArm>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    // Any ingestion failure is a data problem, whatever its library class.
    empirical::read_arms_csv(&text).map_err(|e| CliError::data(e.to_string()))
}

pub fn curve(args: &CurveArgs, seed: u64, format: Format) -> Result<String, CliError> {
    let model: QuantileModel = args.model.parse()?;
    let grid = make_grid(args.u_min, args.u_max, args.step)?;
    if args.u_min < 0.01 || args.u_max > 0.99 {
        eprintln!(
            "warning: persistence is numerically unstable for u < 0.01 or u > 0.99; \
             consider a trimmed range"
        );
    }

    let quad = Quadrature {
        rule: match args.rule {
            Rule::Adaptive => QuadRule::Adaptive,
            Rule::Gauss => QuadRule::FixedGaussLegendre,
        },
        points: args.points,
        rel_tol: args.rel_tol,
    };
    quad.validate()?;

    let mut kinds = vec![CurveKind::Qepf];
    if args.with_mrq {
        kinds.push(CurveKind::Mrq);
    }
    if args.with_hazard {
        kinds.push(CurveKind::HazardQuantile);
    }
    if args.with_lorenz {
        kinds.push(CurveKind::Lorenz);
    }
    if args.with_ttt {
        kinds.push(CurveKind::Ttt);
    }

    let curves = kinds
        .iter()
        .map(|&kind| {
            persistence::functional_curve(&model, kind, &grid, &quad)
                .map_err(|e| numerical_or(e.into()))
        })
        .collect::<Result<Vec<PersistenceCurve>, CliError>>()?;

    match format {
        Format::Csv => {
            let mut out = String::new();
            out.push_str("# command=curve\n");
            out.push_str(&format!("# model={model}\n"));
            out.push_str(&format!(
                "# u_min={} u_max={} step={}\n",
                args.u_min, args.u_max, args.step
            ));
            out.push_str(&format!(
                "# rule={} points={} rel_tol={:e}\n",
                rule_name(args.rule),
                args.points,
                args.rel_tol
            ));
            out.push_str(&format!("# seed={seed}\n"));
            out.push_str(&persistence::curves_to_csv(&curves));
            Ok(out)
        }
        Format::Json => {
            let doc = json!({
                "meta": {
                    "command": "curve",
                    "model": model.to_string(),
                    "u_min": args.u_min,
                    "u_max": args.u_max,
                    "step": args.step,
                    "rule": rule_name(args.rule),
                    "points": args.points,
                    "rel_tol": args.rel_tol,
                    "seed": seed,
                },
                "curves": curves.iter().map(|c| json!({
                    "label": c.label(),
                    "u": c.u_grid(),
                    "value": c.values(),
                })).collect::<Vec<_>>(),
            });
            Ok(pretty(doc))
        }
    }
}

fn rule_name(rule: Rule) -> &'static str {
    match rule {
        Rule::Adaptive => "adaptive",
        Rule::Gauss => "fixed_gauss_legendre",
    }
}

/// Numeric evaluation failures on a valid invocation are exit-3 problems
/// even when the underlying class would map elsewhere.
fn numerical_or(e: CliError) -> CliError {
    if e.code == 1 {
        CliError::numerical(e.message)
    } else {
        e
    }
}

pub fn estimate(args: &EstimateArgs, seed: u64, format: Format) -> Result<String, CliError> {
    let arms = read_arms(&args.input)?;
    if arms.len() != 1 {
        return Err(CliError::data(format!(
            "estimation expects a single group, found {}",
            arms.len()
        )));
    }
    let arm = &arms[0];

    let grid = match &args.u {
        Some(list) => {
            let mut grid = Vec::new();
            for tok in list.split(',') {
                let u: f64 = tok
                    .trim()
                    .parse()
                    .map_err(|_| CliError::usage(format!("`{tok}` is not a number")))?;
                grid.push(u);
            }
            grid
        }
        None => make_grid(args.u_min, args.u_max, args.step)?,
    };
    if arm.len() < 100 && grid.iter().any(|&u| u > 0.98) {
        eprintln!(
            "warning: u > 0.98 with n = {} is unstable; trim the upper range for small samples",
            arm.len()
        );
    }

    let mut rows = Vec::with_capacity(grid.len());
    for &u in &grid {
        let estimate = empirical::empirical_qepf(arm, u).map_err(CliError::from)?;
        let (lo, hi) =
            empirical::bootstrap_pointwise_ci(arm, u, args.bootstrap, args.level, seed)?;
        rows.push((u, estimate, lo, hi));
    }

    match format {
        Format::Csv => {
            let mut out = String::new();
            out.push_str("# command=estimate\n");
            out.push_str(&format!("# input={}\n", args.input.display()));
            out.push_str(&format!("# n={}\n", arm.len()));
            out.push_str(&format!("# B={} level={} seed={seed}\n", args.bootstrap, args.level));
            out.push_str("u,estimate,ci_lo,ci_hi\n");
            for (u, est, lo, hi) in rows {
                out.push_str(&format!("{u},{est},{lo},{hi}\n"));
            }
            Ok(out)
        }
        Format::Json => {
            let doc = json!({
                "meta": {
                    "command": "estimate",
                    "input": args.input.display().to_string(),
                    "n": arm.len(),
                    "B": args.bootstrap,
                    "level": args.level,
                    "seed": seed,
                },
                "rows": rows.iter().map(|(u, est, lo, hi)| json!({
                    "u": u, "estimate": est, "ci_lo": lo, "ci_hi": hi,
                })).collect::<Vec<_>>(),
            });
            Ok(pretty(doc))
        }
    }
}

pub fn test(args: &TestArgs, seed: u64, format: Format) -> Result<String, CliError> {
    let arms = read_arms(&args.input)?;
    if arms.len() != 2 {
        return Err(CliError::data(format!(
            "the test needs exactly two groups, found {} \
             (use the `group,value` CSV form with a header)",
            arms.len()
        )));
    }
    let (ref_arm, bio_arm) = (&arms[0], &arms[1]);
    for arm in [ref_arm, bio_arm] {
        if arm.len() < 10 {
            return Err(CliError::data(format!(
                "group `{}` has {} observations; at least 10 are required",
                arm.label(),
                arm.len()
            )));
        }
    }
    if args.u_upper > 0.90 {
        eprintln!(
            "warning: persistence differences attenuate near u = 1; \
             capping u_upper at 0.90 is recommended"
        );
    }

    let config = TestConfig {
        u_lower: args.u_lower,
        u_upper: args.u_upper,
        grid_step: args.grid_step,
        b: args.bootstrap,
        alpha: args.alpha,
        seed,
    };

    if args.scan {
        let intervals = match &args.intervals {
            Some(spec) => parse_intervals(spec)?,
            None => eqtest::standard_scan_intervals(),
        };
        let rows = eqtest::sensitivity_scan(ref_arm, bio_arm, &intervals, &config);
        return match format {
            Format::Csv => {
                let mut out = String::new();
                out.push_str("# command=test-scan\n");
                out.push_str(&format!("# input={}\n", args.input.display()));
                out.push_str(&format!(
                    "# ref={} n_ref={} bio={} n_bio={}\n",
                    ref_arm.label(),
                    ref_arm.len(),
                    bio_arm.label(),
                    bio_arm.len()
                ));
                out.push_str(&format!(
                    "# grid_step={} B={} alpha={} seed={seed}\n",
                    args.grid_step, args.bootstrap, args.alpha
                ));
                out.push_str(&eqtest::scan_to_csv(&rows));
                Ok(out)
            }
            Format::Json => {
                let doc = json!({
                    "meta": {
                        "command": "test-scan",
                        "input": args.input.display().to_string(),
                        "ref": ref_arm.label(), "n_ref": ref_arm.len(),
                        "bio": bio_arm.label(), "n_bio": bio_arm.len(),
                        "grid_step": args.grid_step,
                        "B": args.bootstrap,
                        "alpha": args.alpha,
                        "seed": seed,
                    },
                    "rows": rows.iter().map(|r| match &r.outcome {
                        Ok(o) => json!({
                            "u_lower": r.u_lower, "u_upper": r.u_upper,
                            "statistic": o.statistic, "n_eff": r.n_eff,
                            "p_value": o.p_value, "crit95_boot": o.crit_value,
                            "width": r.width,
                        }),
                        Err(msg) => json!({
                            "u_lower": r.u_lower, "u_upper": r.u_upper,
                            "n_eff": r.n_eff, "width": r.width, "error": msg,
                        }),
                    }).collect::<Vec<_>>(),
                });
                Ok(pretty(doc))
            }
        };
    }

    let result = eqtest::run_test(ref_arm, bio_arm, &config).map_err(CliError::from)?;
    match format {
        Format::Json => {
            let mut doc = serde_json::to_string_pretty(&result)
                .map_err(|e| CliError::numerical(e.to_string()))?;
            doc.push('\n');
            Ok(doc)
        }
        Format::Csv => {
            let mut out = String::new();
            out.push_str(
                "statistic,crit_value,p_value,reject_equality,n_ref,n_bio,\
                 u_lower,u_upper,grid_step,B,alpha,seed\n",
            );
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                result.statistic,
                result.crit_value,
                result.p_value,
                result.reject_equality,
                result.n_ref,
                result.n_bio,
                config.u_lower,
                config.u_upper,
                config.grid_step,
                config.b,
                config.alpha,
                config.seed
            ));
            Ok(out)
        }
    }
}

fn parse_intervals(spec: &str) -> Result<Vec<(f64, f64)>, CliError> {
    spec.split(',')
        .map(|pair| {
            let (lo, hi) = pair
                .trim()
                .split_once(':')
                .ok_or_else(|| CliError::usage(format!("`{pair}` is not a lo:hi interval")))?;
            let lo: f64 =
                lo.parse().map_err(|_| CliError::usage(format!("`{lo}` is not a number")))?;
            let hi: f64 =
                hi.parse().map_err(|_| CliError::usage(format!("`{hi}` is not a number")))?;
            Ok((lo, hi))
        })
        .collect()
}

pub fn simulate(args: &SimulateArgs, seed: u64, format: Format) -> Result<String, CliError> {
    match args.study {
        Study::BiasMse => {
            let (models, u_list, n_list) = simulate::standard_bias_mse_design();
            let report = simulate::run_bias_mse(&models, &u_list, &n_list, args.reps, seed)
                .map_err(|e| numerical_or(e.into()))?;
            for s in &report.skipped {
                eprintln!("warning: skipped cell: {s}");
            }
            match format {
                Format::Csv => {
                    let mut out = String::new();
                    out.push_str("# command=simulate study=bias_mse\n");
                    out.push_str(&format!(
                        "# families={}\n",
                        models.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("; ")
                    ));
                    out.push_str(&format!("# u={u_list:?} n={n_list:?}\n"));
                    out.push_str(&format!("# reps={} seed={seed}\n", args.reps));
                    out.push_str(&simulate::bias_mse_to_csv(&report));
                    Ok(out)
                }
                Format::Json => {
                    let doc = json!({
                        "meta": {
                            "command": "simulate", "study": "bias_mse",
                            "reps": args.reps, "seed": seed,
                            "u": u_list, "n": n_list,
                        },
                        "rows": report.rows.iter().map(|r| json!({
                            "distribution": r.family, "u": r.u, "n": r.n,
                            "true": r.true_value, "bias": r.bias, "mse": r.mse,
                        })).collect::<Vec<_>>(),
                        "skipped": report.skipped,
                    });
                    Ok(pretty(doc))
                }
            }
        }
        Study::PowerSize => {
            let trials = if args.paper_scale { 2000 } else { args.trials };
            let n_list = [50usize, 100, 300, 500];
            let scenarios = simulate::standard_power_scenarios();
            let mut rows = Vec::new();
            for (si, (name, ref_model, bio_model)) in scenarios.iter().enumerate() {
                let config = TestConfig {
                    b: args.bootstrap,
                    seed: derive_seed(seed, &[si as u64]),
                    ..TestConfig::default()
                };
                rows.extend(
                    simulate::run_power_size(ref_model, bio_model, name, &n_list, trials, &config)
                        .map_err(|e| numerical_or(e.into()))?,
                );
            }
            match format {
                Format::Csv => {
                    let mut out = String::new();
                    out.push_str("# command=simulate study=power_size\n");
                    out.push_str(&format!("# n={n_list:?} trials={trials}\n"));
                    out.push_str(&format!(
                        "# interval=[0.6,0.9] grid_step=0.01 B={} alpha=0.05 seed={seed}\n",
                        args.bootstrap
                    ));
                    out.push_str(&simulate::power_size_to_csv(&rows));
                    Ok(out)
                }
                Format::Json => {
                    let doc = json!({
                        "meta": {
                            "command": "simulate", "study": "power_size",
                            "trials": trials, "B": args.bootstrap,
                            "n": n_list, "seed": seed,
                        },
                        "rows": rows.iter().map(|r| json!({
                            "scenario": r.scenario, "n": r.n,
                            "rejection_rate": r.rejection_rate,
                            "n_trials": r.n_trials, "B": r.b,
                            "n_failed": r.n_failed,
                        })).collect::<Vec<_>>(),
                    });
                    Ok(pretty(doc))
                }
            }
        }
    }
}

fn pretty(doc: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&doc).expect("in-memory JSON cannot fail");
    s.push('\n');
    s
}
