//! Sparsity-index bookkeeping: selectors `J`, the `(i_low, i_high)` split and
//! the concatenation of per-interaction index spaces.

use crate::fock::Cutoffs;
use crate::model::{type_groups, Interaction, ModelSpec};

use super::table::{build_lookup_table, LookupTable};

/// Non-decreasing `s`-tuples over `1..=n`, lexicographic.
fn multisets(n: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(s);
    fn rec(n: usize, s: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for j in start..=n {
            cur.push(j);
            rec(n, s, j, cur, out);
            cur.pop();
        }
    }
    rec(n, s, 1, &mut cur, &mut out);
    out
}

/// All selectors for an interaction, each giving a 1-based mode index per
/// incoming leg (in leg order). Identical-type legs take multisets, groups
/// are combined in order, so `i_high` is a lexicographic rank.
pub fn selectors(interaction: &Interaction, registers: usize) -> Vec<Vec<usize>> {
    let groups = type_groups(&interaction.incoming);
    let mut acc: Vec<Vec<usize>> = vec![vec![0; interaction.n_in()]];
    for g in &groups {
        let mut next = Vec::new();
        for base in &acc {
            for ms in multisets(registers, g.len()) {
                let mut v = base.clone();
                for (slot, j) in g.iter().zip(&ms) {
                    v[*slot] = *j;
                }
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

/// Index space of one interaction.
#[derive(Debug, Clone)]
pub struct InteractionSpace {
    pub selectors: Vec<Vec<usize>>,
    pub table: LookupTable,
    /// Number of global indices before this interaction's block.
    pub offset: usize,
}

impl InteractionSpace {
    pub fn size(&self) -> usize {
        self.selectors.len() * self.table.a
    }
}

/// A resolved sparsity index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparsityIndex {
    /// 1-based global index.
    pub i: usize,
    pub interaction: usize,
    pub i_low: usize,
    pub i_high: usize,
}

/// Index spaces of all interactions, concatenated in declaration order.
#[derive(Debug, Clone)]
pub struct IndexSpace {
    pub spaces: Vec<InteractionSpace>,
    pub total: usize,
}

impl IndexSpace {
    pub fn new(model: &ModelSpec) -> Self {
        Self::with_cutoffs(model, &model.cutoffs)
    }

    pub fn with_cutoffs(model: &ModelSpec, cutoffs: &Cutoffs) -> Self {
        let mut spaces = Vec::new();
        let mut offset = 0;
        for x in &model.interactions {
            let sp = InteractionSpace {
                selectors: selectors(x, cutoffs.register_count),
                table: build_lookup_table(x, cutoffs),
                offset,
            };
            offset += sp.size();
            spaces.push(sp);
        }
        IndexSpace { spaces, total: offset }
    }

    /// Split a 1-based index; `None` outside `1..=total`.
    pub fn resolve(&self, i: usize) -> Option<SparsityIndex> {
        if i == 0 || i > self.total {
            return None;
        }
        let z = i - 1;
        for (ix, sp) in self.spaces.iter().enumerate() {
            if z < sp.offset + sp.size() {
                let local = z - sp.offset;
                return Some(SparsityIndex { i, interaction: ix, i_low: local % sp.table.a, i_high: local / sp.table.a });
            }
        }
        None
    }

    pub fn index_of(&self, interaction: usize, i_high: usize, i_low: usize) -> usize {
        let sp = &self.spaces[interaction];
        sp.offset + i_high * sp.table.a + i_low + 1
    }
}
