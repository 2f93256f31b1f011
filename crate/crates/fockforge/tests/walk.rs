use std::collections::BTreeMap;

use fockforge::cli::parse_state;
use fockforge::enumerator::Enumerator;
use fockforge::fock::{Cutoffs, ParticleType};
use fockforge::model::{builtin_with, ModelSpec};
use fockforge::walk::*;
use fockforge::Error;
use nalgebra::DMatrix;

fn lf(name: &str, k: i64) -> ModelSpec {
    builtin_with(name, Some(&Cutoffs::light_front(k)), &BTreeMap::new()).unwrap()
}

fn lf_with(name: &str, k: i64, params: &[(&str, f64)]) -> ModelSpec {
    let p: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    builtin_with(name, Some(&Cutoffs::light_front(k)), &p).unwrap()
}

#[test]
fn single_boson_sectors_are_partitions() {
    let bosons = [ParticleType::boson()];
    let sizes: Vec<usize> = (1..=8)
        .map(|k| enumerate_sector(&bosons, &Cutoffs::light_front(k), &Sector::light_front(k, 1)).unwrap().len())
        .collect();
    // partitions with at most ⌈√(2K)⌉ distinct parts
    assert_eq!(sizes, vec![1, 2, 3, 5, 7, 11, 15, 22]);

    let spec = lf("free-boson-lf", 3);
    let basis = model_sector(&spec, &Sector::for_model(&spec, None)).unwrap();
    let mut want: Vec<_> = ["(b,3,1)", "(b,1,1)(b,2,1)", "(b,1,3)"].iter().map(|s| parse_state(&spec, s).unwrap()).collect();
    let mut got = basis.states.clone();
    want.sort();
    got.sort();
    assert_eq!(got, want);
    for (x, s) in basis.states.iter().enumerate() {
        assert_eq!(basis.position(s), Some(x));
    }
}

#[test]
fn sector_cap_is_enforced() {
    let bosons = [ParticleType::boson()];
    let r = enumerate_sector_capped(&bosons, &Cutoffs::light_front(8), &Sector::light_front(8, 1), 10);
    assert!(matches!(r, Err(Error::CapExceeded { cap: 10, .. })));
    assert!(enumerate_sector_capped(&bosons, &Cutoffs::light_front(8), &Sector::light_front(8, 1), 22).is_ok());
}

#[test]
fn equal_time_sector_respects_particle_cap() {
    let spec = builtin_with("phi4-et", Some(&Cutoffs::equal_time_for(4)), &BTreeMap::new()).unwrap();
    let sector = Sector::for_model(&spec, Some(2));
    let basis = model_sector(&spec, &sector).unwrap();
    assert!(!basis.is_empty());
    for s in &basis.states {
        assert!(s.particle_count() <= 2);
        assert_eq!(s.total_momentum(1).0[0], 0);
        assert!(sector.contains(s, 1));
    }
}

#[test]
fn free_boson_dense_is_diagonal() {
    let spec = lf_with("free-boson-lf", 3, &[("m_B", 1.5)]);
    let basis = model_sector(&spec, &Sector::for_model(&spec, None)).unwrap();
    let h = build_dense(&spec, &basis);
    for (x, s) in basis.states.iter().enumerate() {
        let want: f64 = s.modes.iter().map(|m| 2.25 * m.occupancy as f64 / m.momentum.0[0] as f64).sum();
        assert!((h[(x, x)] - want).abs() < 1e-12);
    }
    let mut off = h.clone();
    off.fill_diagonal(0.0);
    assert_eq!(off.amax(), 0.0);
    let n = norms(&h);
    assert_eq!(n.max_entry, h.diagonal().amax());
}

#[test]
fn number_operator_counts_particles() {
    let spec = lf("number-operator", 5);
    let basis = model_sector(&spec, &Sector::for_model(&spec, None)).unwrap();
    let h = build_dense(&spec, &basis);
    for (x, s) in basis.states.iter().enumerate() {
        assert!((h[(x, x)] - s.particle_count() as f64).abs() < 1e-12);
    }
}

#[test]
fn norm_examples() {
    let z = norms(&DMatrix::<f64>::zeros(3, 3));
    assert_eq!((z.max_entry, z.one, z.sigma.clone()), (0.0, 0.0, vec![0.0; 3]));
    let x = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let n = norms(&x);
    assert_eq!((n.max_entry, n.one, n.sigma), (1.0, 1.0, vec![1.0, 1.0]));
}

#[test]
fn r_choice_examples() {
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 3.0]));
    assert_eq!(choose_r(&d, 1), 1.0);
    let ones = DMatrix::from_element(3, 3, 2.0);
    let k = 6;
    let r = choose_r(&ones, k);
    let n = norms(&ones);
    assert!((k as f64 * r * n.max_entry / n.one - 1.0).abs() < 1e-15);
    assert_eq!(choose_r(&DMatrix::<f64>::zeros(2, 2), 4), 1.0);
}

fn check_isometry(spec: &ModelSpec, nonnegative: bool) {
    let basis = model_sector(spec, &Sector::for_model(spec, None)).unwrap();
    let h = build_dense(spec, &basis);
    let k = Enumerator::new(spec).index_space_size();
    let r = choose_r(&h, k);
    let t = build_t(spec, &basis, r).unwrap();
    assert!(t.isometry_deviation() <= 1e-10);
    assert_eq!(h.iter().all(|v| *v >= 0.0), nonnegative);
    if nonnegative {
        assert!(verify_walk_overlap(&t, &h) <= 1e-10);
    }
    let n = norms(&h);
    for y in 0..basis.len() {
        for x in 0..basis.len() {
            let a = t.amplitude(y, &(basis.states[x].clone(), 0, 0));
            let want = (r * h[(x, y)] / n.one).abs().sqrt();
            assert!((a.norm() - want).abs() < 1e-12);
        }
        let flag = 1.0 - r * n.sigma[y] / n.one;
        assert!((t.flag_weight(y) - flag).abs() < 1e-12, "{} vs {}", t.flag_weight(y), flag);
    }
}

#[test]
fn walk_isometry_on_small_sectors() {
    check_isometry(&lf("number-operator", 3), true);
    check_isometry(&lf("phi4-lf", 3), true);
    check_isometry(&lf("free-boson-lf", 3), true);
    // negative entries: the swap overlap only sees |H|
    check_isometry(&lf("yukawa-lf", 3), false);
}

#[test]
fn zero_hamiltonian_has_no_overlaps() {
    let spec = lf_with("free-boson-lf", 3, &[("m_B", 0.0)]);
    let report = walk_check(&spec, &Sector::for_model(&spec, None), None).unwrap();
    assert!(report.isometry_deviation <= 1e-12);
    assert!(report.overlap_deviation <= 1e-12);
}

#[test]
fn rotation_bounds_are_checked() {
    let spec = lf("phi4-lf", 3);
    let basis = model_sector(&spec, &Sector::for_model(&spec, None)).unwrap();
    assert!(matches!(build_t(&spec, &basis, 0.0), Err(Error::Domain(_))));
    assert!(matches!(build_t(&spec, &basis, 1.5), Err(Error::Domain(_))));
    let h = build_dense(&spec, &basis);
    let k = Enumerator::new(&spec).index_space_size();
    assert!(choose_r(&h, k) < 1.0);
    assert!(matches!(build_t(&spec, &basis, 1.0), Err(Error::Domain(_))));
}

#[test]
fn report_matches_manual_build() {
    let spec = lf("phi4-lf", 3);
    let rep = walk_check(&spec, &Sector::for_model(&spec, None), None).unwrap();
    assert_eq!(rep.k, Enumerator::new(&spec).index_space_size());
    assert!(rep.r > 0.0 && rep.r <= 1.0);
    assert!(rep.isometry_deviation <= 1e-10 && rep.overlap_deviation <= 1e-10);
}
