use std::collections::{BTreeMap, BTreeSet};

use fockforge::cli::parse_state;
use fockforge::enumerator::*;
use fockforge::fock::{Cutoffs, FockState, Momentum};
use fockforge::matrix::matrix_element_bruteforce;
use fockforge::model::{builtin_with, parse_model, ModelSpec};
use fockforge::walk::{model_sector, Sector};
use proptest::prelude::*;

fn lf(name: &str, k: i64) -> ModelSpec {
    builtin_with(name, Some(&Cutoffs::light_front(k)), &BTreeMap::new()).unwrap()
}

fn toy(body: &str, k: i64) -> ModelSpec {
    let text = format!(
        "model toy\ncutoffs light_front per_dim=(1,{k}) W={k} I=4\n\
         particle b statistics=boson species=0\nparticle f statistics=fermion species=1\n{body}\n"
    );
    parse_model(&text).unwrap()
}

fn m(v: i64) -> Momentum {
    Momentum::scalar(v)
}

fn rows(t: &LookupTable) -> Vec<(i64, usize, Vec<i64>)> {
    t.entries().into_iter().map(|(q, i, r)| (q.0[0], i, r.into_iter().map(|x| x.0[0]).collect())).collect()
}

#[test]
fn two_identical_bosons_table() {
    let spec = toy("interaction s: out(b:k, b:l) in(b:p, b:n) coeff = 1", 5);
    let t = build_lookup_table(&spec.interactions[0], &spec.cutoffs);
    let want = vec![
        (2, 0, vec![1, 1]),
        (3, 0, vec![2, 1]),
        (4, 0, vec![3, 1]),
        (4, 1, vec![2, 2]),
        (5, 0, vec![4, 1]),
        (5, 1, vec![3, 2]),
    ];
    assert_eq!(rows(&t), want);
    assert_eq!(t.a, 2);
}

#[test]
fn single_outgoing_leg_table() {
    let spec = toy("interaction s: out(b:n) in(b:k, b:l) coeff = 1", 5);
    let t = build_lookup_table(&spec.interactions[0], &spec.cutoffs);
    assert_eq!(t.a, 1);
    for (q, i, r) in rows(&t) {
        assert_eq!((i, r), (0, vec![q]));
    }
}

#[test]
fn distinguishable_outgoing_pair_table() {
    let spec = toy("interaction s: out(b:k, f:l) in(f:n) coeff = 1", 5);
    let t = build_lookup_table(&spec.interactions[0], &spec.cutoffs);
    assert_eq!(t.rows[&m(3)], vec![vec![m(2), m(1)], vec![m(1), m(2)]]);
    assert_eq!(t.rows_for(&m(3)), 2);
}

#[test]
fn table_stats_match_listing() {
    for (name, k) in [("phi4-lf", 6), ("yukawa-lf", 5), ("boson-fermion-scattering", 5)] {
        let spec = lf(name, k);
        for x in &spec.interactions {
            let t = build_lookup_table(x, &spec.cutoffs);
            assert_eq!(table_stats(x, &spec.cutoffs), (t.size() as u128, t.a as u128), "{} {}", name, x.name);
        }
    }
    let et = builtin_with("phi4-et", Some(&Cutoffs::equal_time_for(6)), &BTreeMap::new()).unwrap();
    for x in &et.interactions {
        let t = build_lookup_table(x, &et.cutoffs);
        assert_eq!(table_stats(x, &et.cutoffs), (t.size() as u128, t.a as u128), "{}", x.name);
    }
}

#[test]
fn multichoose_by_counting() {
    for n in 0..7u128 {
        for k in 0..5u128 {
            let mut count = 0;
            let mut stack = vec![(0u128, 0u128)];
            while let Some((start, len)) = stack.pop() {
                if len == k {
                    count += 1;
                    continue;
                }
                for j in start..n {
                    stack.push((j, len + 1));
                }
            }
            assert_eq!(multichoose(n, k), count, "n={} k={}", n, k);
        }
    }
}

#[test]
fn selectors_are_counted_multisets() {
    let spec = lf("yukawa-lf", 4);
    for x in &spec.interactions {
        let s = selectors(x, 3);
        assert_eq!(s.len() as u128, selector_count(x, 3));
        let unique: BTreeSet<_> = s.iter().collect();
        assert_eq!(unique.len(), s.len());
    }
}

#[test]
fn index_split_round_trips() {
    let e = Enumerator::new(&lf("phi4-lf", 5));
    for i in 1..=e.index_space_size() {
        let idx = e.space.resolve(i).unwrap();
        assert_eq!(e.space.index_of(idx.interaction, idx.i_high, idx.i_low), i);
    }
    assert!(e.space.resolve(0).is_none());
    assert!(e.space.resolve(e.index_space_size() + 1).is_none());
}

fn fusion() -> (ModelSpec, Enumerator) {
    let spec = lf("boson-fusion", 5);
    let e = Enumerator::new(&spec);
    (spec, e)
}

/// Index whose selector puts both incoming legs on the first register.
fn doubled_first_register(e: &Enumerator, f: &FockState) -> Vec<usize> {
    (1..=e.index_space_size())
        .filter(|&i| e.structural_at(f, i).is_some_and(|t| t.selector == vec![1, 1]))
        .collect()
}

#[test]
fn fusion_worked_example() {
    let (spec, e) = fusion();
    let f = parse_state(&spec, "(b,1,5)").unwrap();
    let want = parse_state(&spec, "(b,1,3)(b,2,1)").unwrap();
    let hits: Vec<usize> = doubled_first_register(&e, &f)
        .into_iter()
        .filter(|&i| e.enumerate(&f, i).0 == want)
        .collect();
    assert_eq!(hits.len(), 1);
    let (out, flag, _) = e.enumerate(&f, hits[0]);
    assert_eq!((out, flag), (want, 0));
}

#[test]
fn fusion_occupancy_shortfall() {
    let (spec, e) = fusion();
    let f = parse_state(&spec, "(b,1,1)").unwrap();
    for i in doubled_first_register(&e, &f) {
        let (out, flag, t) = e.enumerate(&f, i);
        assert_eq!((out, flag), (f.clone(), i));
        assert_eq!(t.reason, Some(InvalidReason::OccupancyShortfall));
    }
}

#[test]
fn mixed_interaction_rejects_wrong_statistics() {
    let spec = lf("boson-fermion-scattering", 4);
    let e = Enumerator::new(&spec);
    let f = parse_state(&spec, "(b,1,1)(f,3,1)").unwrap();
    let mut seen = 0;
    let mut mismatches = 0;
    for i in 1..=e.index_space_size() {
        let t = e.structural_at(&f, i).unwrap();
        let x = &spec.interactions[t.interaction.unwrap_or(0)];
        let points_wrong = x.incoming.iter().zip(&t.selector).any(|(leg, &j)| {
            f.modes.get(j - 1).is_some_and(|md| md.particle != leg.particle)
        });
        if points_wrong {
            seen += 1;
            assert_eq!(e.enumerate(&f, i).0, f);
            assert_eq!(e.enumerate(&f, i).1, i);
            assert!(!t.structural_ok());
            if t.reason == Some(InvalidReason::StatisticsMismatch) {
                mismatches += 1;
            }
        }
    }
    assert!(seen > 0 && mismatches > 0);
}

#[test]
fn number_operator_is_one_sparse() {
    let spec = lf("number-operator", 6);
    let e = Enumerator::new(&spec);
    let basis = model_sector(&spec, &Sector::for_model(&spec, None)).unwrap();
    for f in &basis.states {
        let c = e.connected_states(f);
        assert_eq!(c.len(), 1);
        assert_eq!(&c[0].state, f);
        assert_eq!(e.exact_sparsity(f), 1);
    }
}

#[test]
fn vacuum_has_no_phi4_connections() {
    let e = Enumerator::new(&lf("phi4-lf", 4));
    assert!(e.connected_states(&FockState::vacuum()).is_empty());
    let scatter = toy("interaction s: out(b:k, b:l) in(b:p, b:n) coeff = 1", 4);
    assert!(connected_states(&scatter, &FockState::vacuum()).is_empty());
}

/// Nonzero entries of the brute-force column of `f`.
fn brute_column(spec: &ModelSpec, basis: &[FockState], f: &FockState) -> BTreeMap<FockState, f64> {
    basis
        .iter()
        .map(|g| (g.clone(), matrix_element_bruteforce(spec, f, g)))
        .filter(|(_, v)| v.abs() >= ZERO_CUTOFF)
        .collect()
}

#[test]
fn phi4_lf_k4_connections_match_dense_scan() {
    let spec = lf("phi4-lf", 4);
    let e = Enumerator::new(&spec);
    let basis = model_sector(&spec, &Sector::for_model(&spec, None)).unwrap();
    for f in &basis.states {
        let want = brute_column(&spec, &basis.states, f);
        let got: BTreeMap<FockState, f64> = e.connected_states(f).into_iter().map(|c| (c.state, c.value)).collect();
        assert_eq!(got.keys().collect::<Vec<_>>(), want.keys().collect::<Vec<_>>(), "{}", f);
        for (k, v) in &want {
            assert!((got[k] - v).abs() <= 1e-12);
        }
        assert_eq!(e.exact_sparsity(f), want.len());
    }
}

#[test]
fn enumerate_lists_each_connection_once() {
    for (name, k) in [("phi4-lf", 5), ("yukawa-lf", 3), ("boson-fermion-scattering", 4)] {
        let spec = lf(name, k);
        let e = Enumerator::new(&spec);
        let basis = model_sector(&spec, &Sector::for_model(&spec, None)).unwrap();
        for f in &basis.states {
            let mut outs = Vec::new();
            for i in 1..=e.index_space_size() {
                let (g, flag, _) = e.enumerate(f, i);
                if flag == 0 {
                    assert_eq!(e.canonical_index(f, &g), i);
                    outs.push(g);
                } else {
                    assert_eq!((&g, flag), (f, i));
                }
            }
            let mut want: Vec<FockState> = e.connected_states(f).into_iter().map(|c| c.state).collect();
            want.sort();
            let n = outs.len();
            outs.sort();
            outs.dedup();
            assert_eq!(outs.len(), n, "{} {}", name, f);
            assert_eq!(outs, want, "{} {}", name, f);
        }
    }
}

#[test]
fn out_of_range_indices_are_flagged() {
    let spec = lf("phi4-lf", 3);
    let e = Enumerator::new(&spec);
    let f = parse_state(&spec, "(b,3,1)").unwrap();
    let past = e.index_space_size() + 1;
    assert_eq!(e.enumerate(&f, past).1, past);
    assert_eq!(e.enumerate(&f, 0).1, 0);
    assert_eq!(e.enumerate(&f, 0).2.reason, Some(InvalidReason::OutOfRange));
    assert_eq!(index_space_size(&spec), e.index_space_size());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flagged_outputs_return_the_input(k in 2i64..6, pick in any::<prop::sample::Index>(), i in 1usize..400) {
        let spec = lf("phi4-lf", k);
        let e = Enumerator::new(&spec);
        let basis = model_sector(&spec, &Sector::for_model(&spec, None)).unwrap();
        let f = &basis.states[pick.index(basis.len())];
        let i = 1 + (i - 1) % e.index_space_size();
        let (g, flag, _) = e.enumerate(f, i);
        if flag == 0 {
            prop_assert!(matrix_element_bruteforce(&spec, f, &g).abs() >= ZERO_CUTOFF);
            prop_assert!(!e.has_smaller_duplicate(f, &g, i));
        } else {
            prop_assert_eq!(&g, f);
            prop_assert_eq!(flag, i);
        }
    }
}
