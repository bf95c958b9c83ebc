//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (run with `-- --nocapture` to see them alongside cargo's own
//! per-test verdicts).
//!
//! Run: cargo test -p qepf-cli --test acceptance -- --nocapture

use std::time::{Duration, Instant};

use qepf::empirical::{self, SampleArm};
use qepf::eqtest::{self, TestConfig};
use qepf::persistence::{
    hazard_quantile, lmoment_tail_check, mrq, qepf, qepf_quadrature, qepf_via_lorenz,
    qepf_via_ttt,
};
use qepf::rng::{rng_from_seed, uniform_open01};
use qepf::simulate;
use qepf::stationarity::{find_stationary_points, solve_shift_for_stationarity};
use qepf::{QuantileModel, Quadrature};

fn grid_5_to_95() -> Vec<f64> {
    (1..=19).map(|i| 0.05 * i as f64).collect()
}

fn closed_form_models() -> Vec<QuantileModel> {
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
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect()
}

fn assert_runtime(t0: Instant, bound: Duration, what: &str) {
    let elapsed = t0.elapsed();
    assert!(elapsed < bound, "{what} took {elapsed:?}, bound {bound:?}");
}

#[test]
fn criterion_01_closed_form_vs_quadrature_oracle() {
    let t0 = Instant::now();
    let quad = Quadrature::default();
    for model in closed_form_models() {
        for &u in &grid_5_to_95() {
            let closed = model.closed_form_qepf(u).unwrap().unwrap();
            let numeric = qepf_quadrature(&model, u, &quad).unwrap();
            let rel = (closed - numeric).abs() / closed;
            assert!(rel <= 1e-8, "{model} at u={u}: closed {closed} vs quadrature {numeric}");
        }
    }
    assert_runtime(t0, Duration::from_secs(5), "criterion 1");
    println!("ACCEPTANCE 01 PASS: closed forms match quadrature to 1e-8 on every family/grid point");
}

#[test]
fn criterion_02_pareto_constancy() {
    let quad = Quadrature::default();
    let model: QuantileModel = "pareto alpha=2.5 sigma=1".parse().unwrap();
    let want = 2.5 / 1.5;
    for &u in &grid_5_to_95() {
        let p = qepf(&model, u, &quad).unwrap();
        assert!((p - want).abs() <= 1e-10, "u={u}: {p}");
        assert!((p - 1.6667).abs() <= 5e-5, "4-decimal reference value at u={u}: {p}");
    }
    println!("ACCEPTANCE 02 PASS: Pareto(2.5) persistence constant at 5/3 (1.6667 to 4 decimals)");
}

#[test]
fn criterion_03_bias_mse_spot_reproduction() {
    let t0 = Instant::now();
    let weibull: QuantileModel = "weibull k=2 lambda=1".parse().unwrap();
    let lmrqd: QuantileModel = "lmrqd alpha=0.5 mu=5".parse().unwrap();
    let pareto: QuantileModel = "pareto alpha=2.5 sigma=1".parse().unwrap();

    let report = simulate::run_bias_mse(
        &[weibull, lmrqd, pareto],
        &[0.85, 0.90, 0.95],
        &[50, 1000],
        1000,
        2026,
    )
    .unwrap();
    assert!(report.skipped.is_empty(), "{:?}", report.skipped);
    let cell = |family: &str, u: f64, n: usize| -> &simulate::BiasMseRow {
        report
            .rows
            .iter()
            .find(|r| r.family.starts_with(family) && r.u == u && r.n == n)
            .unwrap_or_else(|| panic!("missing cell {family}/{u}/{n}"))
    };

    let w = cell("weibull", 0.85, 1000);
    assert!(w.bias.abs() <= 0.005, "weibull bias {}", w.bias);
    assert!((1e-4..=1e-3).contains(&w.mse), "weibull mse {}", w.mse);

    let l = cell("lmrqd", 0.90, 1000);
    assert!(l.bias.abs() <= 0.01, "lmrqd bias {}", l.bias);
    assert!((1e-3..=8e-3).contains(&l.mse), "lmrqd mse {}", l.mse);

    let p = cell("pareto", 0.95, 50);
    let w95 = cell("weibull", 0.95, 50);
    assert!(
        p.mse >= 10.0 * w95.mse,
        "heavy-tail MSE ordering: pareto {} vs weibull {}",
        p.mse,
        w95.mse
    );

    assert_runtime(t0, Duration::from_secs(120), "criterion 3");
    println!(
        "ACCEPTANCE 03 PASS: estimator bias/MSE cells reproduce reference magnitudes \
         (weibull mse={:.5}, lmrqd mse={:.5}, pareto/weibull mse ratio={:.1})",
        w.mse,
        l.mse,
        p.mse / w95.mse
    );
}

#[test]
fn criterion_04_identity_suite() {
    let t0 = Instant::now();
    let quad = Quadrature::default();
    let mut models = closed_form_models();
    models.push("lognormal meanlog=0 sdlog=0.5".parse().unwrap());

    for model in &models {
        for &u in &grid_5_to_95() {
            let p = qepf(model, u, &quad).unwrap();
            let mrq_route = 1.0 + mrq(model, u, &quad).unwrap() / model.quantile(u).unwrap();
            assert!((p - mrq_route).abs() / p <= 1e-7, "{model} mean-residual route at u={u}");
            let lorenz_route = qepf_via_lorenz(model, u, &quad).unwrap();
            assert!((p - lorenz_route).abs() / p <= 1e-7, "{model} Lorenz route at u={u}");
            let ttt_route = qepf_via_ttt(model, u, &quad).unwrap();
            assert!((p - ttt_route).abs() / p <= 1e-7, "{model} TTT route at u={u}");
        }
    }

    // First L-moment of the normalized excess equals P(u), checked by
    // Monte Carlo at n = 2e5 within three standard errors.
    for (i, spec) in [
        "uniform",
        "exponential lambda=1",
        "weibull k=2 lambda=1",
        "pareto alpha=2.5 sigma=1",
        "lmrqd alpha=0.5 mu=5",
    ]
    .iter()
    .enumerate()
    {
        let model: QuantileModel = spec.parse().unwrap();
        let check = lmoment_tail_check(&model, 0.6, 200_000, 31_415 + i as u64).unwrap();
        let z = (check.mc_mean - check.analytic).abs() / check.mc_se;
        assert!(z <= 3.0, "{spec}: z = {z:.2}");
    }

    assert_runtime(t0, Duration::from_secs(60), "criterion 4");
    println!("ACCEPTANCE 04 PASS: mean-residual, Lorenz, TTT identities within 1e-7; L-moment Monte Carlo within 3 SE");
}

#[test]
fn criterion_05_stationarity_round_trip() {
    let quad = Quadrature::default();
    let model: QuantileModel = "betahalfone".parse().unwrap();
    let targets = [(0.10, 0.35, 0.01), (0.15, 0.806, 0.005), (0.20, 2.20, 0.02)];
    for (u_star, a_want, a_tol) in targets {
        let a = solve_shift_for_stationarity(&model, u_star).unwrap();
        assert!((a - a_want).abs() <= a_tol, "u*={u_star}: a={a}");

        let shifted = model.shifted_by(a).unwrap();
        let reports = find_stationary_points(&shifted, &quad, 0.01).unwrap();
        assert_eq!(reports.len(), 1, "u*={u_star}: {reports:?}");
        let r = &reports[0];
        assert!((r.u_star - u_star).abs() <= 1e-3, "u*={u_star}: found {}", r.u_star);
        assert!(r.balance_residual.abs() <= 1e-6, "balance residual {}", r.balance_residual);

        let h = hazard_quantile(&shifted, r.u_star).unwrap();
        let m = mrq(&shifted, r.u_star, &quad).unwrap();
        assert!((r.p_at_ustar - h * m).abs() <= 1e-6, "product identity at u*={u_star}");
    }
    println!("ACCEPTANCE 05 PASS: shift solver hits 0.35/0.806/2.20 and round-trips through root finding");
}

/// Direct transcription of the step-rule estimator: find the smallest j
/// with u <= j/n by linear scan, average the tail by explicit loop.
fn naive_estimator(sorted: &[f64], u: f64) -> Option<f64> {
    let n = sorted.len();
    let mut j = 0;
    for cand in 1..=n {
        if u <= cand as f64 / n as f64 {
            j = cand;
            break;
        }
    }
    if j == 0 || j >= n {
        return None;
    }
    let mut sum = 0.0;
    for &x in &sorted[j..] {
        sum += x;
    }
    Some(sum / (n - j) as f64 / sorted[j - 1])
}

#[test]
fn criterion_06_estimator_brute_force_equivalence() {
    let mut rng = rng_from_seed(60_606);
    let mut checked = 0usize;
    for _ in 0..500 {
        let n = 2 + (11.0 * uniform_open01(&mut rng)) as usize; // 2..=12
        let values: Vec<f64> =
            (0..n).map(|_| 0.01 + 99.99 * uniform_open01(&mut rng)).collect();
        let arm = SampleArm::new(values, "random").unwrap();
        for i in 1..=20 {
            let u = i as f64 / 21.0;
            match naive_estimator(arm.values(), u) {
                Some(want) => {
                    let got = empirical::empirical_qepf(&arm, u).unwrap();
                    assert_eq!(got, want, "n={n}, u={u}");
                    checked += 1;
                }
                None => assert!(empirical::empirical_qepf(&arm, u).is_err(), "n={n}, u={u}"),
            }
        }
    }
    assert!(checked > 5000);
    println!("ACCEPTANCE 06 PASS: estimator agrees exactly with the naive step rule on 500 random arms");
}

#[test]
fn criterion_07_test_size_under_equality() {
    let t0 = Instant::now();
    let cfg = TestConfig { b: 500, seed: 770, ..Default::default() };
    for spec in [
        "gamma k=2 theta=1",
        "lmrqd alpha=0.5 mu=5",
        "lognormal meanlog=0 sdlog=0.5",
        "weibull k=2 lambda=1",
        "pareto alpha=2.5 sigma=1",
    ] {
        let model: QuantileModel = spec.parse().unwrap();
        let rows = simulate::run_power_size(&model, &model, spec, &[100], 500, &cfg).unwrap();
        let rate = rows[0].rejection_rate;
        assert!(rate <= 0.08, "{spec}: size {rate}");
    }
    assert_runtime(t0, Duration::from_secs(600), "criterion 7");
    println!("ACCEPTANCE 07 PASS: empirical size at n=100 stays at or below 0.08 for all five null scenarios");
}

#[test]
fn criterion_08_test_power_trend() {
    let t0 = Instant::now();
    let cfg = TestConfig { b: 500, seed: 880, ..Default::default() };
    let mut at_300 = Vec::new();
    for (name, ref_model, bio_model) in simulate::standard_power_scenarios().into_iter().take(3) {
        let rows =
            simulate::run_power_size(&ref_model, &bio_model, &name, &[50, 300], 500, &cfg)
                .unwrap();
        let (r50, r300) = (rows[0].rejection_rate, rows[1].rejection_rate);
        assert!(r300 > r50, "{name}: power {r300} at n=300 vs {r50} at n=50");
        at_300.push((name, r300));
    }
    let strong = at_300.iter().filter(|(_, r)| *r >= 0.85).count();
    assert!(strong >= 2, "need two strong contrasts at n=300, got {at_300:?}");
    assert_runtime(t0, Duration::from_secs(600), "criterion 8");
    println!(
        "ACCEPTANCE 08 PASS: power rises from n=50 to n=300 in all contrasts; {strong}/3 reach 0.85 ({at_300:?})"
    );
}

#[test]
fn criterion_09_cli_determinism() {
    use std::process::Command;

    let dir = std::env::temp_dir();
    let single = dir.join("qepf-acc-single.csv");
    std::fs::write(&single, "1\n2.5\n3\n4.5\n5\n9\n11\n14\n").unwrap();
    let mut grouped = String::from("group,value\n");
    for i in 1..=60 {
        grouped.push_str(&format!("ref,{}\n", 1.0 + (i as f64).sqrt()));
        grouped.push_str(&format!("bio,{}\n", 1.0 + (i as f64).powf(0.6)));
    }
    let two = dir.join("qepf-acc-two.csv");
    std::fs::write(&two, grouped).unwrap();

    let invocations: Vec<Vec<&str>> = vec![
        vec!["curve", "--model", "gamma k=2 theta=1", "--u-min", "0.1", "--u-max", "0.9",
            "--step", "0.1", "--with-mrq", "--with-ttt"],
        vec!["estimate", "--input", single.to_str().unwrap(), "--u", "0.5,0.75",
            "--bootstrap", "400", "--seed", "42"],
        vec!["test", "--input", two.to_str().unwrap(), "--bootstrap", "300",
            "--u-upper", "0.85", "--format", "json", "--seed", "42"],
        vec!["test", "--input", two.to_str().unwrap(), "--scan", "--bootstrap", "200",
            "--u-upper", "0.85", "--seed", "42"],
        vec!["simulate", "--study", "bias-mse", "--reps", "3", "--seed", "42"],
    ];
    for args in &invocations {
        let run = || Command::new(env!("CARGO_BIN_EXE_qepf")).args(args).output().unwrap();
        let a = run();
        let b = run();
        assert!(a.status.success(), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "stdout differs for {args:?}");
    }
    println!("ACCEPTANCE 09 PASS: repeated CLI invocations are byte-identical at fixed seeds");
}

#[test]
fn criterion_10_sensitivity_scan_structure() {
    // Synthetic two-arm data, identical arms; n = 200 keeps (0.85, 0.975)
    // feasible.
    let values: Vec<f64> = (1..=200).map(|i| 1.0 + (i as f64).sqrt()).collect();
    let ref_arm = SampleArm::new(values.clone(), "ref").unwrap();
    let bio_arm = SampleArm::new(values, "bio").unwrap();

    let base = TestConfig { b: 300, seed: 1010, ..Default::default() };
    let intervals = eqtest::standard_scan_intervals();
    assert_eq!(intervals.len(), 16);
    let rows = eqtest::sensitivity_scan(&ref_arm, &bio_arm, &intervals, &base);
    assert_eq!(rows.len(), 16);
    for row in &rows {
        let outcome = row.outcome.as_ref().expect("feasible interval");
        assert!(outcome.p_value >= base.alpha, "identical arms must not reject");
        assert_eq!(row.n_eff, 400);
    }

    let csv = eqtest::scan_to_csv(&rows);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "u_lower,u_upper,statistic,n_eff,p_value,crit95_boot,width"
    );
    let data: Vec<&str> = lines.collect();
    assert_eq!(data.len(), 16);
    for line in data {
        assert_eq!(line.split(',').count(), 7, "{line}");
    }
    println!("ACCEPTANCE 10 PASS: sixteen-interval scan emits all seven columns and never rejects equality on identical arms");
}
