//! Interactions, coefficient functions and the model description language.

pub mod builtins;
pub mod expr;
pub mod parse;

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::fock::{Cutoffs, Momentum, ParticleType};

pub use builtins::{builtin, builtin_names, builtin_with};
pub use expr::{BinOp, EvalEnv, Expr, SpinorBinding};
pub use parse::{parse_model, parse_model_with_warnings, print_model};

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleDecl {
    pub name: String,
    pub particle: ParticleType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leg {
    pub particle_name: String,
    pub particle: ParticleType,
    pub symbol: String,
}

/// One family of ladder monomials `β · a†(out…) a(in…)`, summed over
/// momentum-conserving leg assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    pub name: String,
    pub outgoing: Vec<Leg>,
    pub incoming: Vec<Leg>,
    pub coeff: Expr,
}

impl Interaction {
    /// Total number of legs.
    pub fn f(&self) -> usize {
        self.outgoing.len() + self.incoming.len()
    }

    /// Number of outgoing legs.
    pub fn g(&self) -> usize {
        self.outgoing.len()
    }

    pub fn n_in(&self) -> usize {
        self.incoming.len()
    }

    pub fn outgoing_types(&self) -> Vec<ParticleType> {
        self.outgoing.iter().map(|l| l.particle.clone()).collect()
    }

    pub fn incoming_types(&self) -> Vec<ParticleType> {
        self.incoming.iter().map(|l| l.particle.clone()).collect()
    }

    /// `(sorted outgoing types, sorted incoming types)`.
    pub fn signature(&self) -> (Vec<ParticleType>, Vec<ParticleType>) {
        let mut o = self.outgoing_types();
        let mut i = self.incoming_types();
        o.sort();
        i.sort();
        (o, i)
    }

    /// `{(out),(in)}` in species ids.
    pub fn label(&self) -> String {
        let ids = |ls: &[Leg]| ls.iter().map(|l| l.particle.species_id.to_string()).collect::<Vec<_>>().join(",");
        format!("{{({}),({})}}", ids(&self.outgoing), ids(&self.incoming))
    }

    /// Diagonal one-body term `{(q),(q)}`.
    pub fn is_number_like(&self) -> bool {
        self.outgoing.len() == 1 && self.incoming.len() == 1 && self.outgoing[0].particle == self.incoming[0].particle
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub particles: Vec<ParticleDecl>,
    pub interactions: Vec<Interaction>,
    pub cutoffs: Cutoffs,
    pub spinors: SpinorBinding,
}

/// Groups of leg positions sharing one particle type, in first-appearance order.
pub fn type_groups(legs: &[Leg]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, l) in legs.iter().enumerate() {
        match groups.iter_mut().find(|g| legs[g[0]].particle == l.particle) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn parity(p: &[usize]) -> f64 {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Distinct rearrangements of `values` within each group, each with the
/// sign of the rearrangement when the group is fermionic.
fn group_rearrangements(legs: &[Leg], values: &[Momentum]) -> Vec<(Vec<Momentum>, f64)> {
    let mut acc: Vec<(Vec<Momentum>, f64)> = vec![(values.to_vec(), 1.0)];
    for group in type_groups(legs) {
        let fermionic = legs[group[0]].particle.statistics.is_fermionic();
        let mut seen = BTreeSet::new();
        let mut options = Vec::new();
        for p in permutations(group.len()) {
            let vals: Vec<Momentum> = p.iter().map(|&j| values[group[j]].clone()).collect();
            if seen.insert(vals.clone()) {
                options.push((vals, if fermionic { parity(&p) } else { 1.0 }));
            }
        }
        if fermionic && options.len() < permutations(group.len()).len() {
            return Vec::new();
        }
        let mut next = Vec::with_capacity(acc.len() * options.len());
        for (base, s) in &acc {
            for (vals, t) in &options {
                let mut v = base.clone();
                for (slot, val) in group.iter().zip(vals) {
                    v[*slot] = val.clone();
                }
                next.push((v, s * t));
            }
        }
        acc = next;
    }
    acc
}

impl ModelSpec {
    pub fn particle_types(&self) -> Vec<ParticleType> {
        self.particles.iter().map(|d| d.particle.clone()).collect()
    }

    pub fn particle_named(&self, name: &str) -> Option<&ParticleType> {
        self.particles.iter().find(|d| d.name == name).map(|d| &d.particle)
    }

    pub fn name_of(&self, p: &ParticleType) -> Option<&str> {
        self.particles.iter().find(|d| &d.particle == p).map(|d| d.name.as_str())
    }

    pub fn with_cutoffs(mut self, cutoffs: Cutoffs) -> Self {
        self.cutoffs = cutoffs;
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_spinors(mut self, spinors: SpinorBinding) -> Self {
        self.spinors = spinors;
        self
    }

    /// True when every interaction is a `{(q),(q)}` term.
    pub fn is_diagonal(&self) -> bool {
        !self.interactions.is_empty() && self.interactions.iter().all(|x| x.is_number_like())
    }

    /// Largest number of incoming legs (`h`).
    pub fn max_incoming(&self) -> usize {
        self.interactions.iter().map(|x| x.n_in()).max().unwrap_or(0)
    }

    /// Largest number of outgoing legs (`g`).
    pub fn max_outgoing(&self) -> usize {
        self.interactions.iter().map(|x| x.g()).max().unwrap_or(0)
    }

    /// β for one ordered leg assignment; legs bind their axis-1 component.
    pub fn coefficient(&self, ix: usize, out: &[Momentum], inc: &[Momentum]) -> Result<f64> {
        let x = &self.interactions[ix];
        let mut legs: Vec<(&str, f64)> = Vec::with_capacity(x.f());
        for (l, n) in x.outgoing.iter().zip(out).chain(x.incoming.iter().zip(inc)) {
            legs.push((l.symbol.as_str(), n.0[0] as f64));
        }
        let env = EvalEnv { params: &self.params, legs: &legs, cutoffs: &self.cutoffs, spinors: &self.spinors };
        x.coeff.eval(&env)
    }

    /// β with pole assignments excluded (value 0).
    pub fn beta(&self, ix: usize, out: &[Momentum], inc: &[Momentum]) -> Result<f64> {
        match self.coefficient(ix, out, inc) {
            Err(Error::Pole(_)) => Ok(0.0),
            other => other,
        }
    }

    /// Total weight of the monomial `a†(out) a(in)` with the given values
    /// placed in leg order: the sum of β over distinct rearrangements within
    /// identical-type groups, with fermionic rearrangement signs.
    pub fn symmetrized_beta(&self, ix: usize, out: &[Momentum], inc: &[Momentum]) -> Result<f64> {
        let x = &self.interactions[ix];
        let mut total = 0.0;
        for (o, so) in group_rearrangements(&x.outgoing, out) {
            for (i, si) in group_rearrangements(&x.incoming, inc) {
                total += so * si * self.beta(ix, &o, &i)?;
            }
        }
        Ok(total)
    }

    /// Warnings for interaction families whose conjugate is missing or whose
    /// coefficients do not match the conjugate family on sampled assignments.
    pub fn hermitian_closure_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        let mut sigs: Vec<(Vec<ParticleType>, Vec<ParticleType>)> = Vec::new();
        for x in &self.interactions {
            let s = x.signature();
            if !sigs.contains(&s) {
                sigs.push(s);
            }
        }
        for (o, i) in &sigs {
            let conj = (i.clone(), o.clone());
            if !sigs.contains(&conj) {
                let names: Vec<&str> = self
                    .interactions
                    .iter()
                    .filter(|x| &x.signature() == &(o.clone(), i.clone()))
                    .map(|x| x.name.as_str())
                    .collect();
                warnings.push(format!("no Hermitian conjugate for {}", names.join(", ")));
                continue;
            }
            if let Some(msg) = self.conjugate_mismatch(o, i) {
                warnings.push(msg);
            }
        }
        warnings
    }

    fn family_weight(&self, o: &[ParticleType], i: &[ParticleType], ov: &[Momentum], iv: &[Momentum]) -> Option<f64> {
        let mut total = 0.0;
        for (ix, x) in self.interactions.iter().enumerate() {
            if x.signature() != (o.to_vec(), i.to_vec()) {
                continue;
            }
            let place = |legs: &[Leg], types: &[ParticleType], vals: &[Momentum]| {
                let mut used = vec![false; types.len()];
                legs.iter()
                    .map(|l| {
                        let j = (0..types.len()).find(|&j| !used[j] && types[j] == l.particle).unwrap();
                        used[j] = true;
                        vals[j].clone()
                    })
                    .collect::<Vec<_>>()
            };
            let out = place(&x.outgoing, o, ov);
            let inc = place(&x.incoming, i, iv);
            total += self.symmetrized_beta(ix, &out, &inc).ok()?;
        }
        Some(total)
    }

    fn conjugate_mismatch(&self, o: &[ParticleType], i: &[ParticleType]) -> Option<String> {
        let reversal_sign = |types: &[ParticleType]| {
            let mut s = 1.0;
            for t in types.iter().collect::<BTreeSet<_>>() {
                let k = types.iter().filter(|u| *u == t).count();
                if t.statistics.is_fermionic() && (k * (k.saturating_sub(1)) / 2) % 2 == 1 {
                    s = -s;
                }
            }
            s
        };
        let sign = reversal_sign(o) * reversal_sign(i);
        for (ov, iv) in conserving_assignments(&self.cutoffs, o.len(), i.len(), 64) {
            let (a, b) = match (self.family_weight(o, i, &ov, &iv), self.family_weight(i, o, &iv, &ov)) {
                (Some(a), Some(b)) => (a, b),
                _ => continue,
            };
            if (a - sign * b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                let show = |v: &[Momentum]| v.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(",");
                return Some(format!(
                    "coefficients of {:?}->{:?} and its conjugate differ at out=({}) in=({}): {} vs {}",
                    o.iter().map(|t| t.species_id).collect::<Vec<_>>(),
                    i.iter().map(|t| t.species_id).collect::<Vec<_>>(),
                    show(&ov),
                    show(&iv),
                    a,
                    b
                ));
            }
        }
        None
    }
}

/// Ordered tuples of `n` in-cutoff momenta summing to `total`.
pub fn tuples_summing_to(cutoffs: &Cutoffs, n: usize, total: &Momentum) -> Vec<Vec<Momentum>> {
    tuples_summing_to_limited(cutoffs, n, total, usize::MAX)
}

/// The first `limit` tuples of [`tuples_summing_to`].
pub fn tuples_summing_to_limited(cutoffs: &Cutoffs, n: usize, total: &Momentum, limit: usize) -> Vec<Vec<Momentum>> {
    let momenta = cutoffs.momenta();
    let mut out = Vec::new();
    let mut cur: Vec<Momentum> = Vec::with_capacity(n);
    struct Ctx<'a> {
        momenta: &'a [Momentum],
        cutoffs: &'a Cutoffs,
        limit: usize,
    }
    fn rec(cx: &Ctx, left: usize, rest: Momentum, cur: &mut Vec<Momentum>, out: &mut Vec<Vec<Momentum>>) {
        if out.len() >= cx.limit {
            return;
        }
        if left == 0 {
            if rest.0.iter().all(|&c| c == 0) {
                out.push(cur.clone());
            }
            return;
        }
        if left == 1 {
            if cx.cutoffs.contains(&rest) {
                cur.push(rest);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        for m in cx.momenta {
            let r = Momentum(rest.0.iter().zip(&m.0).map(|(a, b)| a - b).collect());
            let feasible = r.0.iter().zip(&cx.cutoffs.per_dim).all(|(c, (lo, hi))| {
                *c >= lo * (left as i64 - 1) && *c <= hi * (left as i64 - 1)
            });
            if feasible {
                cur.push(m.clone());
                rec(cx, left - 1, r, cur, out);
                cur.pop();
            }
        }
    }
    let cx = Ctx { momenta: &momenta, cutoffs, limit };
    rec(&cx, n, total.clone(), &mut cur, &mut out);
    out
}

/// Up to `limit` momentum-conserving `(out, in)` assignments, in a
/// deterministic order.
pub fn conserving_assignments(cutoffs: &Cutoffs, n_out: usize, n_in: usize, limit: usize) -> Vec<(Vec<Momentum>, Vec<Momentum>)> {
    let mut totals: Vec<Vec<i64>> = vec![Vec::new()];
    for &(lo, hi) in &cutoffs.per_dim {
        let (a, b) = if n_in == 0 { (0, 0) } else { (lo * n_in as i64, hi * n_in as i64) };
        let mut next = Vec::new();
        for t in &totals {
            for c in a..=b {
                let mut v = t.clone();
                v.push(c);
                next.push(v);
            }
        }
        totals = next;
    }
    let mut out = Vec::new();
    for total in totals.into_iter().map(Momentum) {
        let left = limit - out.len();
        let ins = tuples_summing_to_limited(cutoffs, n_in, &total, left);
        if ins.is_empty() {
            continue;
        }
        let outs = tuples_summing_to_limited(cutoffs, n_out, &total, left);
        for iv in &ins {
            for ov in &outs {
                out.push((ov.clone(), iv.clone()));
                if out.len() >= limit {
                    return out;
                }
            }
        }
    }
    out
}
