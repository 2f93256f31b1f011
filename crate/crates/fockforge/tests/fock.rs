use fockforge::fock::*;
use proptest::prelude::*;

fn particles() -> Vec<ParticleType> {
    vec![ParticleType::boson(), ParticleType::fermion(), ParticleType::antifermion()]
}

/// Random valid states for 1+1D light-front cutoffs at resolution `k`.
fn state_strategy(k: i64) -> impl Strategy<Value = FockState> {
    let cut = Cutoffs::light_front(k);
    let regs = cut.register_count;
    prop::collection::vec((0usize..3, 1..=k, 1..=k as u32), 0..=regs).prop_map(move |raw| {
        let ps = particles();
        let mut modes: Vec<Mode> = Vec::new();
        for (p, n, w) in raw {
            let particle = ps[p].clone();
            let w = if particle.statistics.is_fermionic() { 1 } else { w };
            if modes.iter().any(|m| m.same_slot(&particle, &Momentum::scalar(n))) {
                continue;
            }
            modes.push(Mode::new(particle, Momentum::scalar(n), w));
        }
        canonicalize(modes).unwrap()
    })
}

proptest! {
    #[test]
    fn encode_decode_round_trip((k, s) in (2i64..12).prop_flat_map(|k| (Just(k), state_strategy(k)))) {
        let cut = Cutoffs::light_front(k);
        let layout = BitLayout::new(&particles(), &cut);
        prop_assert!(validate(&s, &cut).is_empty());
        let bits = layout.encode(&s).unwrap();
        prop_assert_eq!(bits.len as u64, layout.bits_total);
        prop_assert_eq!(layout.decode(&bits).unwrap(), s.clone());
        let hex = bits.to_hex();
        prop_assert_eq!(Bits::from_hex(&hex, bits.len).unwrap(), bits);
    }

    #[test]
    fn canonicalize_is_order_independent(s in state_strategy(8), rot in 0usize..8) {
        let mut modes = s.modes.clone();
        if !modes.is_empty() {
            let r = rot % modes.len();
            modes.rotate_left(r);
            modes.reverse();
        }
        prop_assert_eq!(canonicalize(modes).unwrap(), s);
    }

    #[test]
    fn total_momentum_is_additive(s in state_strategy(8)) {
        let direct: i64 = s.modes.iter().map(|m| m.occupancy as i64 * m.momentum.0[0]).sum();
        prop_assert_eq!(s.total_momentum(1), Momentum::scalar(direct));
    }
}

#[test]
fn single_mode_layout_is_deterministic() {
    let cut = Cutoffs::light_front(5);
    let layout = BitLayout::new(&[ParticleType::boson()], &cut);
    let s = canonicalize(vec![Mode::new(ParticleType::boson(), Momentum::scalar(1), 5)]).unwrap();
    let a = layout.encode(&s).unwrap();
    let b = layout.encode(&s).unwrap();
    assert_eq!(a, b);
    assert!(!a.is_zero());
    assert_eq!(layout.decode(&a).unwrap(), s);
    let json = layout.to_json();
    assert_eq!(BitLayout::from_json(&json).unwrap(), layout);
}

#[test]
fn encode_rejects_out_of_cutoff_state() {
    let cut = Cutoffs::light_front(4);
    let layout = BitLayout::new(&[ParticleType::boson()], &cut);
    let s = canonicalize(vec![Mode::new(ParticleType::boson(), Momentum::scalar(9), 1)]).unwrap();
    assert!(layout.encode(&s).is_err());
}

#[test]
fn lf_specialization_matches_general_formula() {
    for k in 2..=32i64 {
        let cut = Cutoffs::light_front(k);
        assert_eq!(qubits_total(&cut, 1), qubits_lf_formula(k, 1, &[]), "K={}", k);
    }
}

#[test]
fn transverse_layout_counts() {
    let cut = Cutoffs::light_front_transverse(4, &[(-2, 2)]);
    assert_eq!(cut.register_count, 4);
    assert_eq!(qubits_total(&cut, 2), qubits_lf_formula(4, 2, &[(-2, 2)]));
    assert_eq!(cut.momentum_count(), 20);
}

#[test]
fn cutoff_checks() {
    assert!(Cutoffs::light_front(4).check().is_ok());
    let mut bad = Cutoffs::light_front(4);
    bad.per_dim[0] = (0, 4);
    assert!(bad.check().is_err());
    bad.per_dim[0] = (5, 4);
    assert!(bad.check().is_err());
    assert!(Cutoffs::equal_time(2, 0, 3).check().is_err());
}
