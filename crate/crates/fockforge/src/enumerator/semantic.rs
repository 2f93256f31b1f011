//! Value-level enumerator oracle: `(F, i) ↦ (F′, a_flag)` with a full trace.

use std::collections::HashMap;

use crate::fock::{FockState, Mode, Momentum};
use crate::matrix::element_from_trace;
use crate::model::ModelSpec;

use super::index::{IndexSpace, SparsityIndex};

/// Entries below this magnitude are treated as exact zeros.
pub const ZERO_CUTOFF: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvalidReason {
    OutOfRange,
    EmptyRegister,
    StatisticsMismatch,
    OccupancyShortfall,
    UnusedIndex,
    OccupancyCap,
    FermionicDouble,
    NoFreeRegister,
    ZeroElement,
    Duplicate,
}

/// Ancilla record of one enumerator call.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumTrace {
    pub i: usize,
    /// `None` for the one-index oracle of a diagonal model.
    pub interaction: Option<usize>,
    pub i_low: usize,
    pub i_high: usize,
    /// `J`: a 1-based mode index per incoming leg.
    pub selector: Vec<usize>,
    pub incoming: Vec<Momentum>,
    pub q: Option<Momentum>,
    pub outgoing: Vec<Momentum>,
    /// `E`: register emptied by each incoming leg, 0 when none.
    pub emptied: Vec<usize>,
    /// 1-based register holding each outgoing leg's mode after creation.
    pub insertions: Vec<usize>,
    /// Occupancy just before each annihilation.
    pub w_in: Vec<u32>,
    /// Occupancy just after each creation.
    pub w_out: Vec<u32>,
    /// Same-type particles in preceding registers, per incoming leg.
    pub parity_in: Vec<u32>,
    /// Same-type particles in preceding registers, per outgoing leg.
    pub parity_out: Vec<u32>,
    pub flag: u32,
    pub reason: Option<InvalidReason>,
    pub output: FockState,
}

impl EnumTrace {
    fn blank(i: usize, n_in: usize, g: usize) -> Self {
        EnumTrace {
            i,
            interaction: None,
            i_low: 0,
            i_high: 0,
            selector: Vec::new(),
            incoming: vec![Momentum(Vec::new()); n_in],
            q: None,
            outgoing: Vec::new(),
            emptied: vec![0; n_in],
            insertions: vec![0; g],
            w_in: vec![0; n_in],
            w_out: vec![0; g],
            parity_in: vec![0; n_in],
            parity_out: vec![0; g],
            flag: 0,
            reason: None,
            output: FockState::vacuum(),
        }
    }

    pub fn structural_ok(&self) -> bool {
        self.flag == 0
    }

    fn fail(mut self, reason: InvalidReason) -> Self {
        self.flag += 1;
        self.reason = Some(reason);
        self
    }
}

/// One connected state with the traces that reach it.
#[derive(Debug, Clone)]
pub struct Connected {
    pub state: FockState,
    /// The smallest index producing this state; the only valid one.
    pub index: usize,
    pub value: f64,
    pub traces: Vec<EnumTrace>,
}

/// Precomputed index spaces and tables for one model.
#[derive(Debug, Clone)]
pub struct Enumerator {
    pub model: ModelSpec,
    pub space: IndexSpace,
}

fn same_type_before(regs: &[Mode], pos: usize, p: &crate::fock::ParticleType) -> u32 {
    regs[..pos].iter().filter(|m| &m.particle == p).map(|m| m.occupancy).sum()
}

impl Enumerator {
    pub fn new(model: &ModelSpec) -> Self {
        Enumerator { model: model.clone(), space: IndexSpace::new(model) }
    }

    /// Size of the oracle's index space; a diagonal model uses one index.
    pub fn index_space_size(&self) -> usize {
        if self.model.is_diagonal() {
            1
        } else {
            self.space.total
        }
    }

    /// Apply the ladder monomial selected by `idx`, checking every structural
    /// condition. Does not look at coefficient values or other indices.
    pub fn structural(&self, f: &FockState, idx: SparsityIndex) -> EnumTrace {
        let x = &self.model.interactions[idx.interaction];
        let sp = &self.space.spaces[idx.interaction];
        let cut = &self.model.cutoffs;
        let mut t = EnumTrace::blank(idx.i, x.n_in(), x.g());
        t.interaction = Some(idx.interaction);
        t.i_low = idx.i_low;
        t.i_high = idx.i_high;
        t.selector = sp.selectors[idx.i_high].clone();

        let mut regs: Vec<Mode> = f.modes.clone();
        for k in (0..x.n_in()).rev() {
            let j = t.selector[k];
            let leg = &x.incoming[k];
            let Some(reg) = regs.get(j - 1) else {
                return t.fail(InvalidReason::EmptyRegister);
            };
            if reg.occupancy == 0 {
                return t.fail(InvalidReason::OccupancyShortfall);
            }
            if reg.particle != leg.particle {
                return t.fail(InvalidReason::StatisticsMismatch);
            }
            t.parity_in[k] = same_type_before(&regs, j - 1, &leg.particle);
            t.w_in[k] = reg.occupancy;
            t.incoming[k] = reg.momentum.clone();
            regs[j - 1].occupancy -= 1;
            if regs[j - 1].occupancy == 0 {
                t.emptied[k] = j;
            }
        }
        regs.retain(|m| m.occupancy > 0);

        let dims = cut.dims();
        let q = t.incoming.iter().fold(Momentum::zero(dims), |a, b| a.add(b));
        t.q = Some(q.clone());
        let Some(row) = sp.table.get(&q, idx.i_low) else {
            return t.fail(InvalidReason::UnusedIndex);
        };
        t.outgoing = row.to_vec();

        for k in (0..x.g()).rev() {
            let leg = &x.outgoing[k];
            let n = &t.outgoing[k];
            let probe = Mode::new(leg.particle.clone(), n.clone(), 1);
            match regs.binary_search_by(|m| m.key_cmp(&probe)) {
                Ok(pos) => {
                    let cap = if leg.particle.statistics.is_fermionic() { 1 } else { cut.occupancy_cap };
                    if regs[pos].occupancy + 1 > cap {
                        let reason = if cap == 1 && leg.particle.statistics.is_fermionic() {
                            InvalidReason::FermionicDouble
                        } else {
                            InvalidReason::OccupancyCap
                        };
                        return t.fail(reason);
                    }
                    t.parity_out[k] = same_type_before(&regs, pos, &leg.particle);
                    regs[pos].occupancy += 1;
                    t.w_out[k] = regs[pos].occupancy;
                    t.insertions[k] = pos + 1;
                }
                Err(pos) => {
                    if regs.len() >= cut.register_count {
                        return t.fail(InvalidReason::NoFreeRegister);
                    }
                    t.parity_out[k] = same_type_before(&regs, pos, &leg.particle);
                    regs.insert(pos, probe);
                    t.w_out[k] = 1;
                    t.insertions[k] = pos + 1;
                }
            }
        }
        t.output = FockState { modes: regs };
        t
    }

    /// Structural trace for a 1-based global index of the concatenated
    /// per-interaction spaces.
    pub fn structural_at(&self, f: &FockState, i: usize) -> Option<EnumTrace> {
        self.space.resolve(i).map(|idx| self.structural(f, idx))
    }

    /// Every structurally admissible trace, in index order.
    pub fn admissible(&self, f: &FockState) -> Vec<EnumTrace> {
        (1..=self.space.total)
            .filter_map(|i| self.structural_at(f, i))
            .filter(|t| t.structural_ok())
            .collect()
    }

    /// Connected states with their summed matrix elements, each produced by
    /// its smallest index. Zero entries are dropped.
    pub fn connected_states(&self, f: &FockState) -> Vec<Connected> {
        let mut order: Vec<Connected> = Vec::new();
        let mut at: HashMap<FockState, usize> = HashMap::new();
        for t in self.admissible(f) {
            let v = element_from_trace(&self.model, &t);
            match at.get(&t.output) {
                Some(&k) => {
                    order[k].value += v;
                    order[k].traces.push(t);
                }
                None => {
                    at.insert(t.output.clone(), order.len());
                    order.push(Connected { state: t.output.clone(), index: t.i, value: v, traces: vec![t] });
                }
            }
        }
        order.retain(|c| c.value.abs() >= ZERO_CUTOFF);
        if self.model.is_diagonal() {
            for c in &mut order {
                c.index = 1;
            }
        }
        order
    }

    /// `⟨F′|H|F⟩` summed over all admissible indices reaching `F′`.
    pub fn element(&self, f: &FockState, f_out: &FockState) -> (f64, Vec<(usize, f64)>) {
        let mut total = 0.0;
        let mut parts = Vec::new();
        for t in self.admissible(f) {
            if &t.output == f_out {
                let v = element_from_trace(&self.model, &t);
                total += v;
                parts.push((t.i, v));
            }
        }
        if total.abs() < ZERO_CUTOFF {
            total = 0.0;
        }
        (total, parts)
    }

    /// Smallest admissible index that maps `f` to `f_out`, or 0.
    pub fn canonical_index(&self, f: &FockState, f_out: &FockState) -> usize {
        (1..=self.space.total)
            .find(|&i| self.structural_at(f, i).is_some_and(|t| t.structural_ok() && &t.output == f_out))
            .unwrap_or(0)
    }

    /// Whether some admissible index below `i` also reaches `f_out`.
    pub fn has_smaller_duplicate(&self, f: &FockState, f_out: &FockState, i: usize) -> bool {
        (1..i.min(self.space.total + 1))
            .any(|j| self.structural_at(f, j).is_some_and(|t| t.structural_ok() && &t.output == f_out))
    }

    /// The oracle: `(F′, a_flag, trace)`, with `a_flag = 0` exactly when `i`
    /// is the canonical index of a nonzero transition; otherwise `F′ = F` and
    /// `a_flag = i`.
    pub fn enumerate(&self, f: &FockState, i: usize) -> (FockState, usize, EnumTrace) {
        if self.model.is_diagonal() {
            let mut t = EnumTrace::blank(i, 0, 0);
            t.output = f.clone();
            if i != 1 {
                return (f.clone(), i, t.fail(InvalidReason::OutOfRange));
            }
            let (v, _) = self.element(f, f);
            if v == 0.0 {
                return (f.clone(), i, t.fail(InvalidReason::ZeroElement));
            }
            return (f.clone(), 0, t);
        }
        let Some(idx) = self.space.resolve(i) else {
            let t = EnumTrace::blank(i, 0, 0);
            return (f.clone(), i, t.fail(InvalidReason::OutOfRange));
        };
        let t = self.structural(f, idx);
        if !t.structural_ok() {
            return (f.clone(), i, t);
        }
        let (v, _) = self.element(f, &t.output);
        if v == 0.0 {
            return (f.clone(), i, t.fail(InvalidReason::ZeroElement));
        }
        if self.has_smaller_duplicate(f, &t.output, i) {
            return (f.clone(), i, t.fail(InvalidReason::Duplicate));
        }
        (t.output.clone(), 0, t)
    }

    /// Number of distinct states with a nonzero entry in the column of `f`.
    pub fn exact_sparsity(&self, f: &FockState) -> usize {
        self.connected_states(f).len()
    }
}

pub fn enumerate_semantic(model: &ModelSpec, f: &FockState, i: usize) -> (FockState, usize, EnumTrace) {
    Enumerator::new(model).enumerate(f, i)
}

pub fn connected_states(model: &ModelSpec, f: &FockState) -> Vec<Connected> {
    Enumerator::new(model).connected_states(f)
}

pub fn exact_sparsity(model: &ModelSpec, f: &FockState) -> usize {
    Enumerator::new(model).exact_sparsity(f)
}

pub fn index_space_size(model: &ModelSpec) -> usize {
    Enumerator::new(model).index_space_size()
}
