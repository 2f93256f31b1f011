//! Outgoing-momentum lookup tables `A(Q, i_low)` and their closed counts.

use std::collections::{BTreeMap, HashMap};

use crate::fock::{Cutoffs, Momentum, Quantization};
use crate::model::{tuples_summing_to, type_groups, Interaction, Leg};

/// Rows per total transferred momentum `Q`; within one `Q` the rows are in
/// lexicographically decreasing order and `i_low` is the row position.
#[derive(Debug, Clone, PartialEq)]
pub struct LookupTable {
    pub rows: BTreeMap<Momentum, Vec<Vec<Momentum>>>,
    /// Largest row count over all `Q` (at least 1).
    pub a: usize,
    pub g: usize,
}

impl LookupTable {
    pub fn get(&self, q: &Momentum, i_low: usize) -> Option<&[Momentum]> {
        self.rows.get(q).and_then(|r| r.get(i_low)).map(|v| v.as_slice())
    }

    pub fn rows_for(&self, q: &Momentum) -> usize {
        self.rows.get(q).map_or(0, |r| r.len())
    }

    /// Total number of stored rows.
    pub fn size(&self) -> usize {
        self.rows.values().map(|r| r.len()).sum()
    }

    /// `(Q, i_low, tuple)` in table order.
    pub fn entries(&self) -> Vec<(Momentum, usize, Vec<Momentum>)> {
        let mut out = Vec::new();
        for (q, rows) in &self.rows {
            for (i, r) in rows.iter().enumerate() {
                out.push((q.clone(), i, r.clone()));
            }
        }
        out
    }
}

/// Whether values are non-increasing within every identical-type group.
pub fn is_canonical(legs: &[Leg], values: &[Momentum]) -> bool {
    type_groups(legs)
        .iter()
        .all(|g| g.windows(2).all(|w| values[w[0]] >= values[w[1]]))
}

/// Totals `Q` that a set of `n_in` in-cutoff incoming momenta can carry.
/// Light-front totals never exceed the harmonic resolution.
pub fn reachable_totals(n_in: usize, cutoffs: &Cutoffs) -> Vec<Momentum> {
    let mut ranges: Vec<(i64, i64)> = cutoffs
        .per_dim
        .iter()
        .map(|&(lo, hi)| (lo * n_in as i64, hi * n_in as i64))
        .collect();
    if cutoffs.quantization == Quantization::LightFront && n_in > 0 {
        ranges[0].1 = ranges[0].1.min(cutoffs.per_dim[0].1);
    }
    let mut out = vec![Vec::new()];
    for (lo, hi) in ranges {
        let mut next = Vec::new();
        for p in &out {
            for c in lo..=hi {
                let mut v: Vec<i64> = p.clone();
                v.push(c);
                next.push(v);
            }
        }
        out = next;
    }
    out.into_iter().map(Momentum).collect()
}

pub fn build_lookup_table(interaction: &Interaction, cutoffs: &Cutoffs) -> LookupTable {
    let g = interaction.g();
    let mut rows = BTreeMap::new();
    for q in reachable_totals(interaction.n_in(), cutoffs) {
        let mut r: Vec<Vec<Momentum>> = if g == 0 {
            if q.0.iter().all(|&c| c == 0) {
                vec![Vec::new()]
            } else {
                Vec::new()
            }
        } else {
            tuples_summing_to(cutoffs, g, &q)
                .into_iter()
                .filter(|t| is_canonical(&interaction.outgoing, t))
                .collect()
        };
        if r.is_empty() {
            continue;
        }
        r.sort_by(|x, y| y.cmp(x));
        rows.insert(q, r);
    }
    let a = rows.values().map(|r| r.len()).max().unwrap_or(0).max(1);
    LookupTable { rows, a, g }
}

/// `C(n + k − 1, k)`.
pub fn multichoose(n: u128, k: u128) -> u128 {
    if k == 0 {
        return 1;
    }
    if n == 0 {
        return 0;
    }
    let mut num: u128 = 1;
    for j in 0..k {
        num = num * (n + j) / (j + 1);
    }
    num
}

/// Number of incoming-mode selectors: multisets within identical-type
/// groups, ordered across groups.
pub fn selector_count(interaction: &Interaction, registers: usize) -> u128 {
    type_groups(&interaction.incoming)
        .iter()
        .map(|g| multichoose(registers as u128, g.len() as u128))
        .product()
}

/// Multiset counts by total momentum for `s` values drawn from the cutoffs.
fn multiset_sums(cutoffs: &Cutoffs, s: usize) -> HashMap<Vec<i64>, u128> {
    let dims = cutoffs.dims();
    let mut dp: Vec<HashMap<Vec<i64>, u128>> = vec![HashMap::new(); s + 1];
    dp[0].insert(vec![0; dims], 1);
    for m in cutoffs.momenta() {
        for c in 1..=s {
            let prev: Vec<(Vec<i64>, u128)> = dp[c - 1].iter().map(|(k, v)| (k.clone(), *v)).collect();
            for (sum, n) in prev {
                let key: Vec<i64> = sum.iter().zip(&m.0).map(|(a, b)| a + b).collect();
                *dp[c].entry(key).or_insert(0) += n;
            }
        }
    }
    dp.pop().unwrap()
}

/// `(total rows, a)` of the lookup table without listing it.
pub fn table_stats(interaction: &Interaction, cutoffs: &Cutoffs) -> (u128, u128) {
    let dims = cutoffs.dims();
    let mut conv: HashMap<Vec<i64>, u128> = HashMap::new();
    conv.insert(vec![0; dims], 1);
    for group in type_groups(&interaction.outgoing) {
        let part = multiset_sums(cutoffs, group.len());
        let mut next: HashMap<Vec<i64>, u128> = HashMap::new();
        for (a, x) in &conv {
            for (b, y) in &part {
                let key: Vec<i64> = a.iter().zip(b).map(|(u, v)| u + v).collect();
                *next.entry(key).or_insert(0) += x * y;
            }
        }
        conv = next;
    }
    let mut ranges: Vec<(i64, i64)> = cutoffs
        .per_dim
        .iter()
        .map(|&(lo, hi)| (lo * interaction.n_in() as i64, hi * interaction.n_in() as i64))
        .collect();
    if cutoffs.quantization == Quantization::LightFront && interaction.n_in() > 0 {
        ranges[0].1 = ranges[0].1.min(cutoffs.per_dim[0].1);
    }
    let mut total = 0u128;
    let mut a = 0u128;
    for (q, n) in conv {
        if q.iter().zip(&ranges).all(|(c, (lo, hi))| lo <= c && c <= hi) {
            total += n;
            a = a.max(n);
        }
    }
    (total, a.max(1))
}
