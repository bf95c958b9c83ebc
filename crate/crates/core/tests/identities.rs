//! Cross-route identity checks over a common u-grid: closed forms against
//! quadrature, the mean-residual identity, the Lorenz and TTT routes, and
//! the affine-transformation laws.

use qepf::persistence::{
    hazard_quantile, lorenz, mean, mrq, qepf, qepf_quadrature, qepf_via_lorenz, qepf_via_ttt,
    ttt, vitality,
};
use qepf::{QuantileModel, Quadrature};

fn grid() -> Vec<f64> {
    (1..=19).map(|i| 0.05 * i as f64).collect()
}

/// Families with a closed-form persistence expression, at representative
/// parameters.
fn closed_form_models() -> Vec<QuantileModel> {
    [
        "uniform",
        "exponential lambda=1",
        "loglogistic alpha=1 beta=2.5",
        "power alpha=1 beta=2",
        "weibull k=2 lambda=1",
        "gamma k=0.5 theta=1",
        "gamma k=2 theta=1",
        "pareto alpha=2.5 sigma=1",
        "lmrqd alpha=0.5 mu=5",
        "betahalfone",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect()
}

/// All evaluation families, including the lognormal (quadrature only).
fn all_models() -> Vec<QuantileModel> {
    let mut models = closed_form_models();
    models.push("lognormal meanlog=0 sdlog=0.5".parse().unwrap());
    models
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn closed_form_agrees_with_quadrature_everywhere() {
    let quad = Quadrature::default();
    for m in closed_form_models() {
        for &u in &grid() {
            let closed = m.closed_form_qepf(u).unwrap().unwrap();
            let numeric = qepf_quadrature(&m, u, &quad).unwrap();
            assert!(
                rel_diff(closed, numeric) <= 1e-8,
                "{m} at u={u}: closed {closed} vs quadrature {numeric}"
            );
        }
    }
}

#[test]
fn mean_residual_identity_holds() {
    // P(u) = 1 + M(u)/Q(u).
    let quad = Quadrature::default();
    for m in all_models() {
        for &u in &grid() {
            let p = qepf(&m, u, &quad).unwrap();
            let rhs = 1.0 + mrq(&m, u, &quad).unwrap() / m.quantile(u).unwrap();
            assert!(rel_diff(p, rhs) <= 1e-9, "{m} at u={u}: {p} vs {rhs}");
        }
    }
}

#[test]
fn lorenz_route_matches_direct_evaluation() {
    let quad = Quadrature::default();
    for m in all_models() {
        for &u in &grid() {
            let p = qepf(&m, u, &quad).unwrap();
            let via = qepf_via_lorenz(&m, u, &quad).unwrap();
            assert!(rel_diff(p, via) <= 1e-7, "{m} at u={u}: {p} vs {via}");
        }
    }
}

#[test]
fn ttt_route_matches_direct_evaluation() {
    let quad = Quadrature::default();
    for m in all_models() {
        for &u in &grid() {
            let p = qepf(&m, u, &quad).unwrap();
            let via = qepf_via_ttt(&m, u, &quad).unwrap();
            assert!(rel_diff(p, via) <= 1e-7, "{m} at u={u}: {p} vs {via}");
        }
    }
}

#[test]
fn persistence_exceeds_one_everywhere() {
    let quad = Quadrature::default();
    for m in all_models() {
        for &u in &grid() {
            let p = qepf(&m, u, &quad).unwrap();
            assert!(p > 1.0, "{m} at u={u}: {p}");
        }
    }
}

#[test]
fn quadrature_route_is_scale_invariant() {
    let quad = Quadrature::default();
    for m in all_models() {
        for &a in &[0.1, 3.0, 100.0] {
            let scaled = m.with_scale(a).unwrap();
            for &u in &[0.1, 0.5, 0.9] {
                let base = qepf_quadrature(&m, u, &quad).unwrap();
                let s = qepf_quadrature(&scaled, u, &quad).unwrap();
                assert!(rel_diff(s, base) <= 1e-10, "{m} scale={a} at u={u}: {s} vs {base}");
            }
        }
    }
}

#[test]
fn location_shift_attenuates_toward_one() {
    let quad = Quadrature::default();
    for spec in ["exponential lambda=1", "weibull k=2 lambda=1", "betahalfone"] {
        let m: QuantileModel = spec.parse().unwrap();
        for &u in &[0.2, 0.5, 0.8] {
            let v = vitality(&m, u, &quad).unwrap();
            let q = m.quantile(u).unwrap();
            let mut prev = qepf(&m, u, &quad).unwrap();
            for &b in &[0.5, 2.0, 10.0] {
                let shifted = m.with_shift(b).unwrap();
                let p = qepf(&shifted, u, &quad).unwrap();
                let want = (v + b) / (q + b);
                assert!((p - want).abs() <= 1e-9, "{spec} b={b} u={u}: {p} vs {want}");
                assert!(p < prev, "{spec}: shift must strictly attenuate");
                prev = p;
            }
            // An overwhelming shift pushes persistence to 1.
            let mu = mean(&m, &quad).unwrap();
            let huge = m.with_shift(1e6 * mu).unwrap();
            let p = qepf(&huge, u, &quad).unwrap();
            assert!((p - 1.0).abs() <= 1e-3, "{spec} at u={u}: {p}");
        }
    }
}

#[test]
fn light_tailed_families_attenuate_monotonically() {
    // LMRQD and Weibull persistence decreases over the upper half.
    let quad = Quadrature::default();
    for spec in ["lmrqd alpha=0.5 mu=5", "weibull k=2 lambda=1"] {
        let m: QuantileModel = spec.parse().unwrap();
        let mut prev = f64::INFINITY;
        let mut u = 0.50;
        while u <= 0.99 + 1e-12 {
            let p = qepf(&m, u, &quad).unwrap();
            assert!(p <= prev + 1e-12, "{spec} at u={u}: {p} > {prev}");
            prev = p;
            u += 0.01;
        }
    }
}

#[test]
fn persistence_tends_to_one_for_zero_origin_families() {
    // Pareto is excluded: its persistence is constant above 1.
    let quad = Quadrature::default();
    for spec in [
        "uniform",
        "exponential lambda=1",
        "weibull k=2 lambda=1",
        "gamma k=2 theta=1",
        "lmrqd alpha=0.5 mu=5",
        "betahalfone",
    ] {
        let m: QuantileModel = spec.parse().unwrap();
        let near = qepf(&m, 0.9999, &quad).unwrap();
        let mid = qepf(&m, 0.9, &quad).unwrap();
        assert!(near > 1.0 && near - 1.0 < mid - 1.0, "{spec}: {near} vs {mid}");
    }
}

#[test]
fn pareto_persistence_is_constant_at_the_characterizing_value() {
    let quad = Quadrature::default();
    let m: QuantileModel = "pareto alpha=2.5 sigma=1".parse().unwrap();
    let want = 2.5 / 1.5;
    for &u in &grid() {
        let closed = qepf(&m, u, &quad).unwrap();
        assert!((closed - want).abs() <= 1e-10, "u={u}: {closed}");
        let numeric = qepf_quadrature(&m, u, &quad).unwrap();
        assert!((numeric - want).abs() <= 1e-8, "u={u}: {numeric}");
    }
}

#[test]
fn hazard_lorenz_ttt_basic_shapes() {
    let quad = Quadrature::default();
    for m in all_models() {
        // L is nondecreasing with L(0)=0, L(1)=1; T is nondecreasing.
        let mut prev_l = 0.0;
        let mut prev_t = 0.0;
        for &u in &grid() {
            let l = lorenz(&m, u, &quad).unwrap();
            let t = ttt(&m, u, &quad).unwrap();
            assert!((0.0..=1.0).contains(&l), "{m}: L({u}) = {l}");
            assert!(l >= prev_l - 1e-12 && t >= prev_t - 1e-12, "{m} at u={u}");
            assert!(hazard_quantile(&m, u).unwrap() > 0.0);
            prev_l = l;
            prev_t = t;
        }
    }
}
