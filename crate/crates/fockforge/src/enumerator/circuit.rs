//! Reversible register-level realization of the enumerator oracle, its
//! interpreter, and the closed-form operation count.
//!
//! Registers: the input state `Fin`, a work copy `W`, the result `R`, the
//! index register, a `valid` bit and scalar ancillas. Every operation is a
//! conditional XOR, add/subtract or register swap whose condition and
//! operands never read its own targets, so each op is its own inverse up to
//! the sign of additions.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::fock::{BitLayout, Cutoffs, FockState, Mode, Momentum, ParticleType};
use crate::model::ModelSpec;

use super::semantic::{Enumerator, ZERO_CUTOFF};
use super::table::{selector_count, table_stats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bank {
    Fin,
    W,
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Label,
    Occ,
    Mom(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Loc {
    /// Bank, 0-based register, field.
    Reg(Bank, usize, Field),
    Anc(usize),
    Idx,
    Valid,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Val {
    Const(i64),
    At(Loc),
    /// Value at a location plus a constant.
    Shift(Loc, i64),
    Mod(Loc, i64),
    Div(Loc, i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

/// Classical predicates evaluated on whole registers.
#[derive(Debug, Clone, PartialEq)]
pub enum Macro {
    /// No lookup-table row for the accumulated `Q` and `i_low`.
    TableMiss { interaction: usize, q: Vec<Loc>, i_low: Loc },
    /// `⟨W|H|Fin⟩` vanishes.
    ZeroElement,
    /// A smaller index reaches the same `W`.
    SmallerDuplicate,
    /// `⟨Fin|H|Fin⟩ ≠ 0`.
    DiagonalNonzero,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    Cmp(Loc, Cmp, Val),
    /// `(label, momentum)` of a register orders before the given key.
    KeyLess { bank: Bank, reg: usize, label: i64, mom: Vec<Loc> },
    Macro(Macro),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    Xor(Loc, Val),
    /// `target += sign · value`
    Add(Loc, Val, i64),
    SwapRegs(Bank, usize, usize),
    /// Index register ^= canonical index of `(Fin, R)`.
    XorCanonIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Compare,
    AddSub,
    Swap,
    Copy,
    ControlledSet,
    RotatePlaceholder,
}

pub const OP_KINDS: [OpKind; 6] =
    [OpKind::Compare, OpKind::AddSub, OpKind::Swap, OpKind::Copy, OpKind::ControlledSet, OpKind::RotatePlaceholder];

impl OpKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OpKind::Compare => "compare",
            OpKind::AddSub => "add_sub",
            OpKind::Swap => "swap",
            OpKind::Copy => "copy",
            OpKind::ControlledSet => "controlled_set",
            OpKind::RotatePlaceholder => "rotate_placeholder",
        }
    }

    fn slot(self) -> usize {
        OP_KINDS.iter().position(|k| *k == self).unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    Step1,
    Step2,
    Step3,
    Step4,
    /// Result copy, index clean-up and the reversal of steps 1–4.
    Uncompute,
}

/// One conditional operation. The condition is a conjunction of clauses,
/// each clause a disjunction of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Op {
    pub kind: OpKind,
    pub step: Step,
    pub cond: Vec<Vec<Atom>>,
    pub effects: Vec<Effect>,
}

impl Op {
    fn new(kind: OpKind, step: Step, cond: Vec<Vec<Atom>>, effects: Vec<Effect>) -> Self {
        Op { kind, step, cond, effects }
    }

    pub fn inverse(&self) -> Op {
        let effects = self
            .effects
            .iter()
            .rev()
            .map(|e| match e {
                Effect::Add(t, v, s) => Effect::Add(*t, v.clone(), -s),
                other => other.clone(),
            })
            .collect();
        Op { kind: self.kind, step: Step::Uncompute, cond: self.cond.clone(), effects }
    }
}

/// Operation counts per step and per kind.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GateTally {
    pub step1: u64,
    pub step2: u64,
    pub step3: u64,
    pub step4: u64,
    pub uncompute: u64,
    pub total: u64,
    pub by_kind: [u64; 6],
}

impl GateTally {
    fn add(&mut self, step: Step, kind: OpKind, n: u64) {
        match step {
            Step::Step1 => self.step1 += n,
            Step::Step2 => self.step2 += n,
            Step::Step3 => self.step3 += n,
            Step::Step4 => self.step4 += n,
            Step::Uncompute => self.uncompute += n,
        }
        self.by_kind[kind.slot()] += n;
        self.total += n;
    }

    pub fn forward(&self) -> u64 {
        self.step1 + self.step2 + self.step3 + self.step4
    }

    pub fn kind(&self, k: OpKind) -> u64 {
        self.by_kind[k.slot()]
    }
}

impl fmt::Display for GateTally {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step1={} step2={} step3={} step4={} uncompute={} total={}",
            self.step1, self.step2, self.step3, self.step4, self.uncompute, self.total
        )
    }
}

/// Full register state of the machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub fin: Vec<i64>,
    pub w: Vec<i64>,
    pub r: Vec<i64>,
    pub idx: i64,
    pub valid: i64,
    pub anc: Vec<i64>,
}

#[derive(Debug, Clone)]
pub struct LogLocalCircuit {
    pub ops: Vec<Op>,
    pub registers: usize,
    pub dims: usize,
    pub ancillas: usize,
    /// Ancilla slot of the flag counter.
    pub flag: usize,
    /// Largest number of checks that can add to the flag on one path.
    pub flag_checks: u64,
    pub layout: BitLayout,
    enumerator: Enumerator,
}

fn width(dims: usize) -> usize {
    2 + dims
}

fn field_offset(f: Field) -> usize {
    match f {
        Field::Label => 0,
        Field::Occ => 1,
        Field::Mom(d) => 2 + d,
    }
}

fn all_fields(dims: usize) -> Vec<Field> {
    let mut v = vec![Field::Label, Field::Occ];
    v.extend((0..dims).map(Field::Mom));
    v
}

fn eq(l: Loc, v: i64) -> Atom {
    Atom::Cmp(l, Cmp::Eq, Val::Const(v))
}

fn ne(l: Loc, v: i64) -> Atom {
    Atom::Cmp(l, Cmp::Ne, Val::Const(v))
}

fn w(j: usize, f: Field) -> Loc {
    Loc::Reg(Bank::W, j - 1, f)
}

struct Builder {
    ops: Vec<Op>,
    next_anc: usize,
    step: Step,
}

impl Builder {
    fn anc(&mut self) -> Loc {
        self.next_anc += 1;
        Loc::Anc(self.next_anc - 1)
    }

    fn ancs(&mut self, n: usize) -> Vec<Loc> {
        (0..n).map(|_| self.anc()).collect()
    }

    fn push(&mut self, kind: OpKind, cond: Vec<Vec<Atom>>, effects: Vec<Effect>) {
        self.ops.push(Op::new(kind, self.step, cond, effects));
    }
}

fn single(atoms: Vec<Atom>) -> Vec<Vec<Atom>> {
    atoms.into_iter().map(|a| vec![a]).collect()
}

/// Build the reversible operation sequence for a model at its cutoffs.
pub fn circuit_build(model: &ModelSpec) -> LogLocalCircuit {
    let en = Enumerator::new(model);
    let cut = &model.cutoffs;
    let ii = cut.register_count;
    let dims = cut.dims();
    let layout = BitLayout::new(&model.particle_types(), cut);
    let mut b = Builder { ops: Vec::new(), next_anc: 0, step: Step::Step1 };
    let flag = b.anc();
    let Loc::Anc(flag_slot) = flag else { unreachable!() };
    let fields = all_fields(dims);

    if model.is_diagonal() {
        for j in 0..ii {
            let effects = fields
                .iter()
                .map(|&f| Effect::Xor(Loc::Reg(Bank::R, j, f), Val::At(Loc::Reg(Bank::Fin, j, f))))
                .collect();
            b.push(OpKind::Copy, vec![], effects);
        }
        b.step = Step::Step4;
        b.push(
            OpKind::Compare,
            vec![vec![Atom::Macro(Macro::DiagonalNonzero)]],
            vec![Effect::Add(Loc::Idx, Val::Const(1), -1)],
        );
        return LogLocalCircuit {
            ops: b.ops,
            registers: ii,
            dims,
            ancillas: b.next_anc,
            flag: flag_slot,
            flag_checks: 0,
            layout,
            enumerator: en,
        };
    }

    let mut flag_checks: u64 = 1;
    for j in 0..ii {
        let effects = fields
            .iter()
            .map(|&f| Effect::Xor(Loc::Reg(Bank::W, j, f), Val::At(Loc::Reg(Bank::Fin, j, f))))
            .collect();
        b.push(OpKind::Copy, vec![], effects);
    }
    b.push(
        OpKind::Compare,
        vec![vec![Atom::Cmp(Loc::Idx, Cmp::Lt, Val::Const(1)), Atom::Cmp(Loc::Idx, Cmp::Gt, Val::Const(en.space.total as i64))]],
        vec![Effect::Add(flag, Val::Const(1), 1)],
    );

    for (ix, x) in model.interactions.iter().enumerate() {
        let sp = &en.space.spaces[ix];
        let a = sp.table.a as i64;
        let n_in = x.n_in();
        let g = x.g();
        let codes_in: Vec<i64> = x.incoming.iter().map(|l| layout.label_code(&l.particle).unwrap() as i64).collect();
        let codes_out: Vec<i64> = x.outgoing.iter().map(|l| layout.label_code(&l.particle).unwrap() as i64).collect();

        let sel = b.anc();
        let loc = b.anc();
        let ilow = b.anc();
        let ihigh = b.anc();
        let jreg = b.ancs(n_in);
        let ok = b.ancs(n_in);
        let win = b.ancs(n_in);
        let par_in = b.ancs(n_in);
        let nin: Vec<Vec<Loc>> = (0..n_in).map(|_| b.ancs(dims)).collect();
        let e = b.ancs(n_in);
        let q = b.ancs(dims);
        let out: Vec<Vec<Loc>> = (0..g).map(|_| b.ancs(dims)).collect();
        let fnd = b.ancs(g);
        let pos = b.ancs(g);
        let wout = b.ancs(g);
        let par_out = b.ancs(g);
        let s = || eq(sel, 1);

        b.step = Step::Step1;
        b.push(
            OpKind::Compare,
            single(vec![
                Atom::Cmp(Loc::Idx, Cmp::Gt, Val::Const(sp.offset as i64)),
                Atom::Cmp(Loc::Idx, Cmp::Le, Val::Const((sp.offset + sp.size()) as i64)),
            ]),
            vec![Effect::Xor(sel, Val::Const(1))],
        );
        b.push(OpKind::AddSub, single(vec![s()]), vec![Effect::Add(loc, Val::Shift(Loc::Idx, -1 - sp.offset as i64), 1)]);
        b.push(
            OpKind::AddSub,
            single(vec![s()]),
            vec![Effect::Xor(ilow, Val::Mod(loc, a)), Effect::Xor(ihigh, Val::Div(loc, a))],
        );
        for (h, sel_j) in sp.selectors.iter().enumerate() {
            let effects = sel_j.iter().zip(&jreg).map(|(v, t)| Effect::Xor(*t, Val::Const(*v as i64))).collect();
            b.push(OpKind::ControlledSet, single(vec![s(), eq(ihigh, h as i64)]), effects);
        }

        b.step = Step::Step2;
        let order: Vec<usize> = (0..n_in).rev().collect();
        for &k in &order {
            let c = codes_in[k];
            for j in 1..=ii {
                let ctl = || vec![s(), eq(jreg[k], j as i64)];
                let mut cond = single(ctl());
                cond.push(vec![eq(w(j, Field::Occ), 0), ne(w(j, Field::Label), c)]);
                b.push(OpKind::Compare, cond, vec![Effect::Add(flag, Val::Const(1), 1)]);
                let mut cond = ctl();
                cond.extend([ne(w(j, Field::Occ), 0), eq(w(j, Field::Label), c)]);
                b.push(OpKind::Compare, single(cond), vec![Effect::Xor(ok[k], Val::Const(1))]);
                let mut okc = ctl();
                okc.push(eq(ok[k], 1));
                b.push(OpKind::Copy, single(okc.clone()), vec![Effect::Xor(win[k], Val::At(w(j, Field::Occ)))]);
                b.push(
                    OpKind::AddSub,
                    single(vec![s(), Atom::Cmp(jreg[k], Cmp::Gt, Val::Const(j as i64)), eq(w(j, Field::Label), c)]),
                    vec![Effect::Add(par_in[k], Val::At(w(j, Field::Occ)), 1)],
                );
                let effects = (0..dims).map(|d| Effect::Xor(nin[k][d], Val::At(w(j, Field::Mom(d))))).collect();
                b.push(OpKind::Copy, single(okc.clone()), effects);
                b.push(OpKind::AddSub, single(okc.clone()), vec![Effect::Add(w(j, Field::Occ), Val::Const(1), -1)]);
                let mut emp = okc.clone();
                emp.push(eq(w(j, Field::Occ), 0));
                b.push(OpKind::ControlledSet, single(emp.clone()), vec![Effect::Xor(e[k], Val::Const(j as i64))]);
                let mut effects = vec![Effect::Xor(w(j, Field::Label), Val::Const(c))];
                effects.extend((0..dims).map(|d| Effect::Xor(w(j, Field::Mom(d)), Val::At(nin[k][d]))));
                b.push(OpKind::ControlledSet, single(emp), effects);
            }
            flag_checks += 1;
            let effects = (0..dims).map(|d| Effect::Add(q[d], Val::At(nin[k][d]), 1)).collect();
            b.push(OpKind::AddSub, single(vec![s()]), effects);
        }
        for (p, &m) in order.iter().enumerate() {
            for j in 1..ii {
                b.push(
                    OpKind::Swap,
                    single(vec![s(), ne(e[m], 0), Atom::Cmp(e[m], Cmp::Le, Val::Const(j as i64))]),
                    vec![Effect::SwapRegs(Bank::W, j - 1, j)],
                );
            }
            for &k in &order[p + 1..] {
                let c_mk = b.anc();
                b.push(
                    OpKind::Compare,
                    single(vec![s(), ne(e[m], 0), Atom::Cmp(e[k], Cmp::Gt, Val::At(e[m]))]),
                    vec![Effect::Xor(c_mk, Val::Const(1))],
                );
                b.push(OpKind::AddSub, single(vec![eq(c_mk, 1)]), vec![Effect::Add(e[k], Val::Const(1), -1)]);
            }
        }

        b.step = Step::Step3;
        let lows: Vec<i64> = cut.per_dim.iter().map(|(lo, _)| *lo).collect();
        let q_off = |qm: &Momentum| -> Vec<i64> { qm.0.iter().zip(&lows).map(|(v, lo)| v - lo * n_in as i64).collect() };
        flag_checks += 1;
        if g == 0 {
            let zero = q_off(&Momentum::zero(dims));
            let clause: Vec<Atom> = (0..dims).map(|d| ne(q[d], zero[d])).collect();
            b.push(OpKind::Compare, vec![vec![s()], clause], vec![Effect::Add(flag, Val::Const(1), 1)]);
        } else {
            for (qm, i_low, row) in sp.table.entries() {
                let qo = q_off(&qm);
                let mut atoms = vec![s(), eq(ilow, i_low as i64)];
                atoms.extend((0..dims).map(|d| eq(q[d], qo[d])));
                let mut effects = Vec::new();
                for (k, n) in row.iter().enumerate() {
                    for d in 0..dims {
                        effects.push(Effect::Xor(out[k][d], Val::Const(n.0[d] - lows[d])));
                    }
                }
                b.push(OpKind::ControlledSet, single(atoms), effects);
            }
            b.push(
                OpKind::Compare,
                single(vec![s(), Atom::Macro(Macro::TableMiss { interaction: ix, q: q.clone(), i_low: ilow })]),
                vec![Effect::Add(flag, Val::Const(1), 1)],
            );
        }

        b.step = Step::Step4;
        for k in (0..g).rev() {
            let c = codes_out[k];
            let cap = if x.outgoing[k].particle.statistics.is_fermionic() { 1 } else { cut.occupancy_cap as i64 };
            flag_checks += 1;
            for j in 1..=ii {
                let mut atoms = vec![s(), ne(w(j, Field::Occ), 0), eq(w(j, Field::Label), c)];
                atoms.extend((0..dims).map(|d| Atom::Cmp(w(j, Field::Mom(d)), Cmp::Eq, Val::At(out[k][d]))));
                b.push(OpKind::ControlledSet, single(atoms), vec![Effect::Xor(fnd[k], Val::Const(j as i64))]);
            }
            for j in 1..=ii {
                b.push(
                    OpKind::Compare,
                    single(vec![s(), eq(fnd[k], j as i64), Atom::Cmp(w(j, Field::Occ), Cmp::Ge, Val::Const(cap))]),
                    vec![Effect::Add(flag, Val::Const(1), 1)],
                );
            }
            for j in 1..=ii {
                b.push(
                    OpKind::AddSub,
                    single(vec![s(), eq(fnd[k], j as i64)]),
                    vec![Effect::Add(w(j, Field::Occ), Val::Const(1), 1)],
                );
            }
            for j in 1..=ii {
                b.push(
                    OpKind::Copy,
                    single(vec![s(), eq(fnd[k], j as i64)]),
                    vec![Effect::Xor(wout[k], Val::At(w(j, Field::Occ)))],
                );
            }
            b.push(
                OpKind::Compare,
                single(vec![s(), eq(fnd[k], 0), ne(w(ii, Field::Occ), 0)]),
                vec![Effect::Add(flag, Val::Const(1), 1)],
            );
            b.push(OpKind::ControlledSet, single(vec![s(), eq(fnd[k], 0)]), vec![Effect::Xor(pos[k], Val::Const(1))]);
            for j in 1..=ii {
                b.push(
                    OpKind::AddSub,
                    single(vec![
                        s(),
                        eq(fnd[k], 0),
                        ne(w(j, Field::Occ), 0),
                        Atom::KeyLess { bank: Bank::W, reg: j - 1, label: c, mom: out[k].clone() },
                    ]),
                    vec![Effect::Add(pos[k], Val::Const(1), 1)],
                );
            }
            for j in (1..ii).rev() {
                b.push(
                    OpKind::Swap,
                    single(vec![s(), eq(fnd[k], 0), Atom::Cmp(pos[k], Cmp::Le, Val::Const(j as i64))]),
                    vec![Effect::SwapRegs(Bank::W, j - 1, j)],
                );
            }
            for j in 1..=ii {
                let mut effects = vec![Effect::Xor(w(j, Field::Label), Val::Const(c)), Effect::Xor(w(j, Field::Occ), Val::Const(1))];
                effects.extend((0..dims).map(|d| Effect::Xor(w(j, Field::Mom(d)), Val::At(out[k][d]))));
                b.push(OpKind::ControlledSet, single(vec![s(), eq(fnd[k], 0), eq(pos[k], j as i64)]), effects);
            }
            b.push(OpKind::ControlledSet, single(vec![s(), eq(fnd[k], 0)]), vec![Effect::Xor(wout[k], Val::Const(1))]);
            for j in 1..=ii {
                let cond = vec![
                    vec![s()],
                    vec![eq(w(j, Field::Label), c)],
                    vec![eq(fnd[k], 0), Atom::Cmp(fnd[k], Cmp::Gt, Val::Const(j as i64))],
                    vec![ne(fnd[k], 0), Atom::Cmp(pos[k], Cmp::Gt, Val::Const(j as i64))],
                ];
                b.push(OpKind::AddSub, cond, vec![Effect::Add(par_out[k], Val::At(w(j, Field::Occ)), 1)]);
            }
        }
    }

    b.step = Step::Step4;
    let zc = b.anc();
    let dc = b.anc();
    b.push(OpKind::Compare, vec![vec![Atom::Macro(Macro::ZeroElement)]], vec![Effect::Xor(zc, Val::Const(1))]);
    b.push(OpKind::Compare, vec![vec![Atom::Macro(Macro::SmallerDuplicate)]], vec![Effect::Xor(dc, Val::Const(1))]);

    let forward: Vec<Op> = b.ops.clone();
    b.step = Step::Uncompute;
    b.push(OpKind::Compare, single(vec![eq(flag, 0), eq(zc, 0), eq(dc, 0)]), vec![Effect::Xor(Loc::Valid, Val::Const(1))]);
    for (bank, v) in [(Bank::W, 1), (Bank::Fin, 0)] {
        for j in 0..ii {
            let effects = fields
                .iter()
                .map(|&f| Effect::Xor(Loc::Reg(Bank::R, j, f), Val::At(Loc::Reg(bank, j, f))))
                .collect();
            b.push(OpKind::Copy, single(vec![eq(Loc::Valid, v)]), effects);
        }
    }
    for op in forward.iter().rev() {
        b.ops.push(op.inverse());
    }
    b.push(OpKind::Compare, single(vec![eq(Loc::Valid, 1)]), vec![Effect::XorCanonIndex]);
    b.push(OpKind::Compare, single(vec![eq(Loc::Idx, 0)]), vec![Effect::Xor(Loc::Valid, Val::Const(1))]);

    LogLocalCircuit { ops: b.ops, registers: ii, dims, ancillas: b.next_anc, flag: flag_slot, flag_checks, layout, enumerator: en }
}

impl LogLocalCircuit {
    pub fn tally(&self) -> GateTally {
        let mut t = GateTally::default();
        for op in &self.ops {
            t.add(op.step, op.kind, 1);
        }
        t
    }

    /// Width of a counter that holds every flag increment on one path.
    pub fn flag_width(&self) -> u32 {
        crate::fock::ceil_log2(self.flag_checks + 1)
    }

    pub fn inverse(&self) -> LogLocalCircuit {
        let mut c = self.clone();
        c.ops = self.ops.iter().rev().map(|op| op.inverse()).collect();
        c
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    fn load_bank(&self, state: &FockState) -> Result<Vec<i64>> {
        let wd = width(self.dims);
        let mut bank = vec![0i64; self.registers * wd];
        if state.len() > self.registers {
            return Err(Error::Invalid(format!("state has {} modes, only {} registers", state.len(), self.registers)));
        }
        let lows: Vec<i64> = self.layout.cutoffs.per_dim.iter().map(|(lo, _)| *lo).collect();
        for (j, m) in state.modes.iter().enumerate() {
            let code = self
                .layout
                .label_code(&m.particle)
                .ok_or_else(|| Error::UnknownParticle(format!("{:?}", m.particle)))?;
            bank[j * wd] = code as i64;
            bank[j * wd + 1] = m.occupancy as i64;
            for d in 0..self.dims {
                bank[j * wd + 2 + d] = m.momentum.0[d] - lows[d];
            }
        }
        Ok(bank)
    }

    /// Read a bank as a canonical state: occupied registers first, strictly
    /// ordered, empty registers all zero.
    pub fn read_bank(&self, bank: &[i64]) -> Option<FockState> {
        let wd = width(self.dims);
        let lows: Vec<i64> = self.layout.cutoffs.per_dim.iter().map(|(lo, _)| *lo).collect();
        let mut modes: Vec<Mode> = Vec::new();
        let mut ended = false;
        for j in 0..self.registers {
            let reg = &bank[j * wd..(j + 1) * wd];
            if reg[1] == 0 {
                if reg.iter().any(|&v| v != 0) {
                    return None;
                }
                ended = true;
                continue;
            }
            if ended || reg[1] < 0 || reg[0] < 0 || reg[0] as usize >= self.layout.particles.len() {
                return None;
            }
            let particle: ParticleType = self.layout.particles[reg[0] as usize].clone();
            let momentum = Momentum((0..self.dims).map(|d| reg[2 + d] + lows[d]).collect());
            let m = Mode::new(particle, momentum, reg[1] as u32);
            if let Some(prev) = modes.last() {
                if prev.key_cmp(&m) != std::cmp::Ordering::Less {
                    return None;
                }
            }
            modes.push(m);
        }
        Some(FockState { modes })
    }

    /// Initial snapshot: `F` loaded, index set, everything else zero.
    pub fn load(&self, f: &FockState, i: usize) -> Result<Snapshot> {
        let wd = width(self.dims);
        Ok(Snapshot {
            fin: self.load_bank(f)?,
            w: vec![0; self.registers * wd],
            r: vec![0; self.registers * wd],
            idx: i as i64,
            valid: 0,
            anc: vec![0; self.ancillas],
        })
    }

    fn get(&self, s: &Snapshot, l: Loc) -> i64 {
        let wd = width(self.dims);
        match l {
            Loc::Reg(bank, j, f) => {
                let v = match bank {
                    Bank::Fin => &s.fin,
                    Bank::W => &s.w,
                    Bank::R => &s.r,
                };
                v[j * wd + field_offset(f)]
            }
            Loc::Anc(a) => s.anc[a],
            Loc::Idx => s.idx,
            Loc::Valid => s.valid,
        }
    }

    fn slot<'s>(&self, s: &'s mut Snapshot, l: Loc) -> &'s mut i64 {
        let wd = width(self.dims);
        match l {
            Loc::Reg(bank, j, f) => {
                let v = match bank {
                    Bank::Fin => &mut s.fin,
                    Bank::W => &mut s.w,
                    Bank::R => &mut s.r,
                };
                &mut v[j * wd + field_offset(f)]
            }
            Loc::Anc(a) => &mut s.anc[a],
            Loc::Idx => &mut s.idx,
            Loc::Valid => &mut s.valid,
        }
    }

    fn val(&self, s: &Snapshot, v: &Val) -> Result<i64> {
        Ok(match v {
            Val::Const(c) => *c,
            Val::At(l) => self.get(s, *l),
            Val::Shift(l, c) => self.get(s, *l) + c,
            Val::Mod(l, m) | Val::Div(l, m) => {
                if *m <= 0 {
                    return Err(Error::Interpreter(format!("non-positive modulus {}", m)));
                }
                let x = self.get(s, *l);
                if matches!(v, Val::Mod(..)) {
                    x.rem_euclid(*m)
                } else {
                    x.div_euclid(*m)
                }
            }
        })
    }

    fn macro_holds(&self, s: &Snapshot, m: &Macro) -> Result<bool> {
        let en = &self.enumerator;
        let input = self.read_bank(&s.fin).ok_or_else(|| Error::Interpreter("input register is not a valid state".into()))?;
        Ok(match m {
            Macro::TableMiss { interaction, q, i_low } => {
                let n_in = en.model.interactions[*interaction].n_in() as i64;
                let lows = &self.layout.cutoffs.per_dim;
                let qm = Momentum(q.iter().enumerate().map(|(d, l)| self.get(s, *l) + lows[d].0 * n_in).collect());
                let il = self.get(s, *i_low);
                il < 0 || en.space.spaces[*interaction].table.get(&qm, il as usize).is_none()
            }
            Macro::ZeroElement => match self.read_bank(&s.w) {
                Some(out) => en.element(&input, &out).0.abs() < ZERO_CUTOFF,
                None => false,
            },
            Macro::SmallerDuplicate => match self.read_bank(&s.w) {
                Some(out) if s.idx >= 1 => en.has_smaller_duplicate(&input, &out, s.idx as usize),
                _ => false,
            },
            Macro::DiagonalNonzero => en.element(&input, &input).0.abs() >= ZERO_CUTOFF,
        })
    }

    fn atom(&self, s: &Snapshot, a: &Atom) -> Result<bool> {
        Ok(match a {
            Atom::Cmp(l, c, v) => {
                let x = self.get(s, *l);
                let y = self.val(s, v)?;
                match c {
                    Cmp::Eq => x == y,
                    Cmp::Ne => x != y,
                    Cmp::Lt => x < y,
                    Cmp::Le => x <= y,
                    Cmp::Gt => x > y,
                    Cmp::Ge => x >= y,
                }
            }
            Atom::KeyLess { bank, reg, label, mom } => {
                let l = self.get(s, Loc::Reg(*bank, *reg, Field::Label));
                let rm: Vec<i64> = (0..self.dims).map(|d| self.get(s, Loc::Reg(*bank, *reg, Field::Mom(d)))).collect();
                let km: Vec<i64> = mom.iter().map(|x| self.get(s, *x)).collect();
                (l, rm) < (*label, km)
            }
            Atom::Macro(m) => self.macro_holds(s, m)?,
        })
    }

    fn reads(&self, op: &Op) -> Vec<Loc> {
        let mut r = Vec::new();
        let bank_locs = |bank: Bank, r: &mut Vec<Loc>| {
            for j in 0..self.registers {
                for f in all_fields(self.dims) {
                    r.push(Loc::Reg(bank, j, f));
                }
            }
        };
        let val_locs = |v: &Val, r: &mut Vec<Loc>| match v {
            Val::Const(_) => {}
            Val::At(l) | Val::Shift(l, _) | Val::Mod(l, _) | Val::Div(l, _) => r.push(*l),
        };
        for clause in &op.cond {
            for a in clause {
                match a {
                    Atom::Cmp(l, _, v) => {
                        r.push(*l);
                        val_locs(v, &mut r);
                    }
                    Atom::KeyLess { bank, reg, mom, .. } => {
                        r.push(Loc::Reg(*bank, *reg, Field::Label));
                        for d in 0..self.dims {
                            r.push(Loc::Reg(*bank, *reg, Field::Mom(d)));
                        }
                        r.extend(mom.iter().copied());
                    }
                    Atom::Macro(m) => {
                        bank_locs(Bank::Fin, &mut r);
                        match m {
                            Macro::TableMiss { q, i_low, .. } => {
                                r.extend(q.iter().copied());
                                r.push(*i_low);
                            }
                            Macro::ZeroElement => bank_locs(Bank::W, &mut r),
                            Macro::SmallerDuplicate => {
                                bank_locs(Bank::W, &mut r);
                                r.push(Loc::Idx);
                            }
                            Macro::DiagonalNonzero => {}
                        }
                    }
                }
            }
        }
        for e in &op.effects {
            match e {
                Effect::Xor(_, v) | Effect::Add(_, v, _) => val_locs(v, &mut r),
                Effect::SwapRegs(..) => {}
                Effect::XorCanonIndex => {
                    bank_locs(Bank::Fin, &mut r);
                    bank_locs(Bank::R, &mut r);
                }
            }
        }
        r
    }

    fn writes(&self, op: &Op) -> Vec<Loc> {
        let mut w = Vec::new();
        for e in &op.effects {
            match e {
                Effect::Xor(t, _) | Effect::Add(t, _, _) => w.push(*t),
                Effect::SwapRegs(bank, a, b) => {
                    for f in all_fields(self.dims) {
                        w.push(Loc::Reg(*bank, *a, f));
                        w.push(Loc::Reg(*bank, *b, f));
                    }
                }
                Effect::XorCanonIndex => w.push(Loc::Idx),
            }
        }
        w
    }

    /// Check that no op reads or writes its own targets twice; such an op
    /// would not be invertible.
    pub fn validate(&self) -> Result<()> {
        for (n, op) in self.ops.iter().enumerate() {
            let writes = self.writes(op);
            let mut seen = std::collections::HashSet::new();
            for t in &writes {
                if !seen.insert(*t) {
                    return Err(Error::Interpreter(format!("op {} writes {:?} twice", n, t)));
                }
            }
            for r in self.reads(op) {
                if seen.contains(&r) {
                    return Err(Error::Interpreter(format!("op {} reads its own target {:?}", n, r)));
                }
            }
            if matches!(op.effects.as_slice(), [Effect::SwapRegs(_, a, b)] if a == b) {
                return Err(Error::Interpreter(format!("op {} swaps a register with itself", n)));
            }
        }
        Ok(())
    }

    fn apply(&self, s: &mut Snapshot, op: &Op) -> Result<()> {
        for clause in &op.cond {
            let mut any = false;
            for a in clause {
                if self.atom(s, a)? {
                    any = true;
                    break;
                }
            }
            if !any {
                return Ok(());
            }
        }
        let mut updates: Vec<(Loc, i64)> = Vec::new();
        for e in &op.effects {
            match e {
                Effect::Xor(t, v) => updates.push((*t, self.get(s, *t) ^ self.val(s, v)?)),
                Effect::Add(t, v, sign) => updates.push((*t, self.get(s, *t) + sign * self.val(s, v)?)),
                Effect::SwapRegs(bank, a, b) => {
                    for f in all_fields(self.dims) {
                        let la = Loc::Reg(*bank, *a, f);
                        let lb = Loc::Reg(*bank, *b, f);
                        updates.push((la, self.get(s, lb)));
                        updates.push((lb, self.get(s, la)));
                    }
                }
                Effect::XorCanonIndex => {
                    let input = self
                        .read_bank(&s.fin)
                        .ok_or_else(|| Error::Interpreter("input register is not a valid state".into()))?;
                    let ci = match self.read_bank(&s.r) {
                        Some(out) => self.enumerator.canonical_index(&input, &out) as i64,
                        None => 0,
                    };
                    updates.push((Loc::Idx, s.idx ^ ci));
                }
            }
        }
        for (l, v) in updates {
            *self.slot(s, l) = v;
        }
        Ok(())
    }

    /// Run every op in order on a snapshot.
    pub fn run(&self, mut s: Snapshot) -> Result<Snapshot> {
        self.validate()?;
        for op in &self.ops {
            self.apply(&mut s, op)?;
        }
        Ok(s)
    }

    /// Result state held in `R`.
    pub fn result_state(&self, s: &Snapshot) -> Option<FockState> {
        self.read_bank(&s.r)
    }

    /// `W`, the valid bit and every ancilla are zero.
    pub fn ancillas_clean(&self, s: &Snapshot) -> bool {
        s.valid == 0 && s.w.iter().all(|&v| v == 0) && s.anc.iter().all(|&v| v == 0)
    }
}

/// Load `(F, i)`, run the circuit, and return the final snapshot.
pub fn circuit_execute(circuit: &LogLocalCircuit, f: &FockState, i: usize) -> Result<Snapshot> {
    if i == 0 {
        return Err(Error::Invalid("index i is 1-based".into()));
    }
    circuit.run(circuit.load(f, i)?)
}

/// Closed-form operation count; equal to `circuit_build(model).tally()`
/// without listing any operation.
pub fn gate_count(model: &ModelSpec, cutoffs: &Cutoffs) -> GateTally {
    use OpKind::*;
    let ii = cutoffs.register_count as u64;
    let mut t = GateTally::default();
    if model.is_diagonal() {
        t.add(Step::Step1, Copy, ii);
        t.add(Step::Step4, Compare, 1);
        return t;
    }
    t.add(Step::Step1, Copy, ii);
    t.add(Step::Step1, Compare, 1);
    for x in &model.interactions {
        let n_in = x.n_in() as u64;
        let g = x.g() as u64;
        let n_j = selector_count(x, cutoffs.register_count) as u64;
        let (rows, _) = table_stats(x, cutoffs);
        t.add(Step::Step1, Compare, 1);
        t.add(Step::Step1, AddSub, 2);
        t.add(Step::Step1, ControlledSet, n_j);

        t.add(Step::Step2, Compare, 2 * ii * n_in);
        t.add(Step::Step2, Copy, 2 * ii * n_in);
        t.add(Step::Step2, AddSub, 2 * ii * n_in + n_in);
        t.add(Step::Step2, ControlledSet, 2 * ii * n_in);
        t.add(Step::Step2, Swap, (ii - 1) * n_in);
        let pairs = n_in * n_in.saturating_sub(1) / 2;
        t.add(Step::Step2, Compare, pairs);
        t.add(Step::Step2, AddSub, pairs);

        if g == 0 {
            t.add(Step::Step3, Compare, 1);
        } else {
            t.add(Step::Step3, ControlledSet, rows as u64);
            t.add(Step::Step3, Compare, 1);
        }

        t.add(Step::Step4, ControlledSet, g * (2 * ii + 2));
        t.add(Step::Step4, Compare, g * (ii + 1));
        t.add(Step::Step4, AddSub, g * 3 * ii);
        t.add(Step::Step4, Copy, g * ii);
        t.add(Step::Step4, Swap, g * (ii - 1));
    }
    t.add(Step::Step4, Compare, 2);

    let forward = t.clone();
    t.add(Step::Uncompute, Compare, 3);
    t.add(Step::Uncompute, Copy, 2 * ii);
    for k in OP_KINDS {
        t.add(Step::Uncompute, k, forward.kind(k));
    }
    t
}

/// Per-kind counts as a name → count map.
pub fn tally_by_kind(t: &GateTally) -> BTreeMap<&'static str, u64> {
    OP_KINDS.iter().map(|k| (k.as_str(), t.kind(*k))).collect()
}
