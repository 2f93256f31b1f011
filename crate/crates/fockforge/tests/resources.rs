use std::collections::BTreeMap;

use fockforge::enumerator::Enumerator;
use fockforge::fock::Cutoffs;
use fockforge::model::{builtin_with, ModelSpec};
use fockforge::resources::*;
use fockforge::walk::{model_sector, Sector};
use fockforge::Error;

fn lf(name: &str, k: i64) -> ModelSpec {
    builtin_with(name, Some(&Cutoffs::light_front(k)), &BTreeMap::new()).unwrap()
}

#[test]
fn bound_without_incoming_surplus() {
    let c = Cutoffs::light_front(5);
    assert_eq!(sparsity_bound(4, 2, 2, &c), 4u128.pow(1));
    assert_eq!(sparsity_bound(4, 1, 1, &c), 1);
    assert_eq!(sparsity_bound(5, 2, 1, &c), 5);
    assert_eq!(sparsity_bound(3, 3, 1, &c), 6);
}

#[test]
fn number_operator_bound_covers_exact() {
    let spec = lf("number-operator", 5);
    let e = Enumerator::new(&spec);
    let c = Cutoffs { register_count: 5, ..Cutoffs::light_front(5) };
    assert_eq!(sparsity_bound(5, 2, 1, &c), 5);
    for f in &model_sector(&spec, &Sector::for_model(&spec, None)).unwrap().states {
        assert!(e.exact_sparsity(f) as u128 <= sparsity_bound(5, 2, 1, &c));
    }
}

#[test]
fn phi4_lf_k6_bounds_dominate() {
    let spec = lf("phi4-lf", 6);
    let e = Enumerator::new(&spec);
    let c = &spec.cutoffs;
    for f in &model_sector(&spec, &Sector::for_model(&spec, None)).unwrap().states {
        for (ix, x) in spec.interactions.iter().enumerate() {
            let reach: std::collections::BTreeSet<_> =
                e.admissible(f).into_iter().filter(|t| t.interaction == Some(ix)).map(|t| t.output).collect();
            assert!(reach.len() as u128 <= sparsity_bound(c.register_count, x.f(), x.g(), c), "{} {}", f, x.name);
        }
        assert!(e.exact_sparsity(f) as u128 <= model_sparsity_bound(&spec));
    }
}

#[test]
fn static_query_examples() {
    let l = (10f64).ln();
    assert!((query_count_static(3.0, 2.0, 0.0, 0.1).unwrap() - l / l.ln()).abs() < 1e-12);
    let v = query_count_static(10.0, 2.0, 5.0, 1e-6).unwrap();
    let want = 100.0 + 1e6f64.ln() / 1e6f64.ln().ln();
    assert!((v - want).abs() < 1e-12);
    assert!((v - 105.3).abs() < 0.05);
    let a = query_count_static(10.0, 2.0, 5.0, 1e-6).unwrap() - query_count_static(10.0, 2.0, 0.0, 1e-6).unwrap();
    let b = query_count_static(10.0, 2.0, 10.0, 1e-6).unwrap() - query_count_static(10.0, 2.0, 0.0, 1e-6).unwrap();
    assert!((b - 2.0 * a).abs() < 1e-12);
    assert!(matches!(query_count_static(1.0, 1.0, 1.0, 0.0), Err(Error::Domain(_))));
    assert!(matches!(query_count_static(1.0, 1.0, 1.0, 1.0), Err(Error::Domain(_))));
    // ln(1/ε) ≤ e makes the double logarithm nonpositive
    assert!(matches!(query_count_static(1.0, 1.0, 1.0, 0.5), Err(Error::Domain(_))));
}

#[test]
fn time_dependent_query_examples() {
    let v = query_count_timedep(100.0, 1e-6).unwrap();
    let l = 1e8f64.ln();
    assert!((v - 100.0 * l / l.ln()).abs() < 1e-9);
    assert!((v - 632.7).abs() < 0.5);
    let eps = 1e-3;
    // ln ln(τ/ε) vanishes at τ/ε = e
    assert!(matches!(query_count_timedep(std::f64::consts::E * eps, eps), Err(Error::Domain(_))));
    assert!(query_count_timedep(std::f64::consts::E.exp() * eps, eps).is_ok());
    assert!(matches!(query_count_timedep(0.0, 0.1), Err(Error::Domain(_))));
    for tau in [10.0, 100.0, 1000.0] {
        for eps in [1e-3, 1e-6, 1e-9] {
            let sum = query_count_static(1.0, tau, 1.0, eps).unwrap();
            assert!(query_count_timedep(tau, eps).unwrap() > sum, "τ={} ε={}", tau, eps);
        }
    }
}

#[test]
fn oracle_cost_terms() {
    assert_eq!(oracle_cost(5, 2, 2, 1, 7), 25.0 + 49.0);
    let q = query_count_static(4.0, 1.0, 1.0, 1e-3).unwrap();
    let t = total_log_local(4.0, 1e-3, 5, 2, 2, 1, 7, false).unwrap();
    assert!((t - q * 74.0).abs() < 1e-9);
    let td = total_log_local(4.0, 1e-3, 5, 2, 2, 1, 7, true).unwrap();
    assert!((td - query_count_timedep(4.0, 1e-3).unwrap() * 74.0).abs() < 1e-9);
}

#[test]
fn phi4_lf_cost_grows_cubically() {
    let cost = |k: i64| oracle_cost(fockforge::fock::lf_register_bound(k), 3, 3, 1, k);
    let slope = (cost(4096) / cost(2048)).log2();
    assert!((slope - 3.0).abs() < 0.01, "{}", slope);
}

#[test]
fn compact_beats_direct_at_moderate_k() {
    let (c, d) = qubit_comparison(&Cutoffs::light_front(16), 1, 1);
    assert!(c < d, "{} {}", c, d);
    let (c2, d2) = qubit_comparison(&Cutoffs::light_front(2), 1, 1);
    assert!(c2 > 0 && d2 > 0);
    let narrow = qubit_comparison(&Cutoffs::light_front_transverse(8, &[(-2, 2)]), 1, 1);
    let wide = qubit_comparison(&Cutoffs::light_front_transverse(8, &[(-4, 4)]), 1, 1);
    assert!(wide.1 - wide.0 > narrow.1 - narrow.0);
}

#[test]
fn report_fields_are_consistent() {
    let spec = lf("phi4-lf", 8);
    let r = estimate(&spec, 1.0, 2.0, 1e-4, false, None).unwrap();
    assert_eq!(r.sparsity_bound, model_sparsity_bound(&spec));
    assert_eq!((r.h, r.g, r.f), (3, 3, 4));
    assert!((r.tau - r.sparsity_bound as f64 * 2.0).abs() < 1e-9);
    let exact = estimate(&spec, 1.0, 2.0, 1e-4, true, Some(12)).unwrap();
    assert_eq!(exact.tau, 24.0);
    assert!(exact.queries > 0.0);
    let text = r.to_string();
    assert!(text.contains("qubits_compact") && text.contains("(estimate)"));
    assert_eq!(r.rows().len(), text.lines().count());
}
