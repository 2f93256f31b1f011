//! Matrix-element oracle: values from enumerator traces, and an independent
//! brute-force ladder-operator engine.

use std::collections::BTreeMap;

use crate::enumerator::{EnumTrace, Enumerator};
use crate::fock::{FockState, Mode, Momentum, ParticleType};
use crate::model::{tuples_summing_to, ModelSpec};

/// `⟨F′|H|F⟩` with its per-index contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixElement {
    pub value: f64,
    /// `(index, value)` for every admissible index reaching `F′`.
    pub contributions: Vec<(usize, f64)>,
}

/// `√(Π w′ · Π w)` with occupancies read at application time.
pub fn occupation_factor(trace: &EnumTrace) -> f64 {
    let p: f64 = trace.w_in.iter().chain(&trace.w_out).map(|&w| w as f64).product();
    p.sqrt()
}

/// Product of per-operator signs; only fermionic legs contribute.
pub fn fermion_parity(model: &ModelSpec, trace: &EnumTrace) -> f64 {
    let Some(ix) = trace.interaction else {
        return 1.0;
    };
    let x = &model.interactions[ix];
    let mut count = 0u32;
    for (leg, c) in x.incoming.iter().zip(&trace.parity_in) {
        if leg.particle.statistics.is_fermionic() {
            count += c;
        }
    }
    for (leg, c) in x.outgoing.iter().zip(&trace.parity_out) {
        if leg.particle.statistics.is_fermionic() {
            count += c;
        }
    }
    if count % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Contribution of one admissible trace: sign · occupation factor · the
/// coefficient summed over rearrangements within identical-type legs.
/// Arithmetic on the trace's leg values only.
pub fn element_from_trace(model: &ModelSpec, trace: &EnumTrace) -> f64 {
    let Some(ix) = trace.interaction else {
        return 0.0;
    };
    if !trace.structural_ok() {
        return 0.0;
    }
    let beta = model.symmetrized_beta(ix, &trace.outgoing, &trace.incoming).unwrap_or(0.0);
    fermion_parity(model, trace) * occupation_factor(trace) * beta
}

pub fn matrix_element(model: &ModelSpec, f: &FockState, f_out: &FockState) -> MatrixElement {
    Enumerator::new(model).matrix_element(f, f_out)
}

impl Enumerator {
    pub fn matrix_element(&self, f: &FockState, f_out: &FockState) -> MatrixElement {
        let (value, contributions) = self.element(f, f_out);
        MatrixElement { value, contributions }
    }
}

/// Occupation-number vector used by the brute-force engine.
#[derive(Debug, Clone)]
struct Occupations(BTreeMap<(ParticleType, Momentum), u32>);

impl Occupations {
    fn from_state(f: &FockState) -> Self {
        Occupations(f.modes.iter().map(|m| ((m.particle.clone(), m.momentum.clone()), m.occupancy)).collect())
    }

    /// Particles of type `p` in modes ordered before `(p, n)`.
    fn before(&self, p: &ParticleType, n: &Momentum) -> u32 {
        self.0
            .iter()
            .filter(|((q, m), _)| q == p && m < n)
            .map(|(_, w)| *w)
            .sum()
    }

    fn sign(&self, p: &ParticleType, n: &Momentum) -> f64 {
        if p.statistics.is_fermionic() && self.before(p, n) % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    /// `a(p, n)`; returns the amplitude factor or `None` for a zero result.
    fn annihilate(&mut self, p: &ParticleType, n: &Momentum) -> Option<f64> {
        let key = (p.clone(), n.clone());
        let w = *self.0.get(&key)?;
        let s = self.sign(p, n);
        if w == 1 {
            self.0.remove(&key);
        } else {
            self.0.insert(key, w - 1);
        }
        Some(s * (w as f64).sqrt())
    }

    /// `a†(p, n)`.
    fn create(&mut self, p: &ParticleType, n: &Momentum) -> Option<f64> {
        let key = (p.clone(), n.clone());
        let w = self.0.get(&key).copied().unwrap_or(0);
        if p.statistics.is_fermionic() && w == 1 {
            return None;
        }
        let s = self.sign(p, n);
        self.0.insert(key, w + 1);
        Some(s * ((w + 1) as f64).sqrt())
    }

    fn into_state(self) -> FockState {
        FockState { modes: self.0.into_iter().map(|((p, n), w)| Mode::new(p, n, w)).collect() }
    }
}

/// `H|F⟩` computed by applying every ladder monomial literally. States that
/// break the register or occupancy caps are dropped, as are zero entries.
pub fn apply_hamiltonian(model: &ModelSpec, f: &FockState) -> BTreeMap<FockState, f64> {
    let cut = &model.cutoffs;
    let dims = cut.dims();
    let mut out: BTreeMap<FockState, f64> = BTreeMap::new();
    for (ix, x) in model.interactions.iter().enumerate() {
        let mut choices: Vec<Vec<Momentum>> = vec![Vec::new()];
        for leg in &x.incoming {
            let mut next = Vec::new();
            for c in &choices {
                for m in f.modes.iter().filter(|m| m.particle == leg.particle) {
                    let mut v = c.clone();
                    v.push(m.momentum.clone());
                    next.push(v);
                }
            }
            choices = next;
        }
        for inc in choices {
            let q = inc.iter().fold(Momentum::zero(dims), |a, b| a.add(b));
            let outs = if x.g() == 0 {
                if q.0.iter().all(|&c| c == 0) {
                    vec![Vec::new()]
                } else {
                    Vec::new()
                }
            } else {
                tuples_summing_to(cut, x.g(), &q)
            };
            for outm in outs {
                let beta = model.beta(ix, &outm, &inc).unwrap_or(0.0);
                if beta == 0.0 {
                    continue;
                }
                let mut occ = Occupations::from_state(f);
                let mut amp = beta;
                let mut alive = true;
                for (leg, n) in x.incoming.iter().zip(&inc).rev() {
                    match occ.annihilate(&leg.particle, n) {
                        Some(a) => amp *= a,
                        None => {
                            alive = false;
                            break;
                        }
                    }
                }
                if alive {
                    for (leg, n) in x.outgoing.iter().zip(&outm).rev() {
                        match occ.create(&leg.particle, n) {
                            Some(a) => amp *= a,
                            None => {
                                alive = false;
                                break;
                            }
                        }
                    }
                }
                if !alive {
                    continue;
                }
                if occ.0.len() > cut.register_count {
                    continue;
                }
                if occ.0.iter().any(|((p, _), w)| !p.statistics.is_fermionic() && *w > cut.occupancy_cap) {
                    continue;
                }
                *out.entry(occ.into_state()).or_insert(0.0) += amp;
            }
        }
    }
    out.retain(|_, v| v.abs() >= crate::enumerator::ZERO_CUTOFF);
    out
}

pub fn matrix_element_bruteforce(model: &ModelSpec, f: &FockState, f_out: &FockState) -> f64 {
    apply_hamiltonian(model, f).get(f_out).copied().unwrap_or(0.0)
}
