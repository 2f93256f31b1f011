//! Closed-form resource estimates: qubit counts, sparsity bounds, query
//! counts and total log-local operation counts. Big-O expressions are
//! evaluated with unit constants and natural logarithms.

use std::fmt;

use crate::enumerator::multichoose;
use crate::error::{Error, Result};
use crate::fock::{qubits_direct, qubits_total, BitLayout, Cutoffs};
use crate::model::ModelSpec;

/// Connected-state bound for one interaction with `f` lines, `g` outgoing:
/// incoming selections `C(I + f − g − 1, f − g)` times the outgoing
/// assignments `Π_j max(1, Λ⁺_j − Λ⁻_j)^(g−1)`.
pub fn sparsity_bound(registers: usize, f: usize, g: usize, cutoffs: &Cutoffs) -> u128 {
    assert!(f >= g, "f must be at least g");
    let incoming = multichoose(registers as u128, (f - g) as u128);
    let outgoing: u128 = if g <= 1 {
        1
    } else {
        cutoffs
            .per_dim
            .iter()
            .map(|(lo, hi)| ((hi - lo).max(1) as u128).pow(g as u32 - 1))
            .product()
    };
    incoming * outgoing
}

/// Sum of the per-interaction bounds of a model at its cutoffs.
pub fn model_sparsity_bound(model: &ModelSpec) -> u128 {
    let c = &model.cutoffs;
    model.interactions.iter().map(|x| sparsity_bound(c.register_count, x.f(), x.g(), c)).sum()
}

/// Double logarithms this close to zero count as the `ln ln = 0` boundary.
const LOGLOG_FLOOR: f64 = 1e-12;

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("ε = {} outside (0, 1)", eps)));
    }
    Ok(())
}

/// `τ + ln(1/ε) / ln ln(1/ε)` with `τ = k·‖H‖_max·t`.
pub fn query_count_static(k: f64, h_max: f64, t: f64, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if k < 0.0 || h_max < 0.0 || t < 0.0 {
        return Err(Error::Domain("k, ‖H‖_max and t must be nonnegative".into()));
    }
    let l = (1.0 / eps).ln();
    let ll = l.ln();
    if ll <= LOGLOG_FLOOR {
        return Err(Error::Domain(format!("ln ln(1/ε) = {} is not positive", ll)));
    }
    Ok(k * h_max * t + l / ll)
}

/// `τ · ln(τ/ε) / ln ln(τ/ε)`.
pub fn query_count_timedep(tau: f64, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if tau <= 0.0 {
        return Err(Error::Domain(format!("τ = {} must be positive", tau)));
    }
    let l = (tau / eps).ln();
    let ll = l.ln();
    if ll.is_nan() || ll <= LOGLOG_FLOOR {
        return Err(Error::Domain(format!("ln ln(τ/ε) = {} is not positive", ll)));
    }
    Ok(tau * l / ll)
}

/// Per-query oracle cost `I^h + Λ^(d·g)`.
pub fn oracle_cost(registers: usize, h: usize, g: usize, d: usize, lambda: i64) -> f64 {
    (registers as f64).powi(h as i32) + (lambda as f64).powi((d * g) as i32)
}

/// Queries times `I^h + Λ^(d·g)`; static query count unless `time_dependent`.
#[allow(clippy::too_many_arguments)]
pub fn total_log_local(
    tau: f64,
    eps: f64,
    registers: usize,
    h: usize,
    g: usize,
    d: usize,
    lambda: i64,
    time_dependent: bool,
) -> Result<f64> {
    let q = if time_dependent { query_count_timedep(tau, eps)? } else { query_count_static(tau, 1.0, 1.0, eps)? };
    Ok(q * oracle_cost(registers, h, g, d, lambda))
}

/// `(compact, direct)` qubit counts; the direct count stores one register
/// per mode for each of `species` particle types.
pub fn qubit_comparison(cutoffs: &Cutoffs, n_q: u32, species: u64) -> (u64, u64) {
    (qubits_total(cutoffs, n_q), qubits_direct(cutoffs, species))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceReport {
    pub registers: usize,
    pub occupancy_cap: u32,
    pub lambda: i64,
    pub d: usize,
    pub f: usize,
    pub g: usize,
    pub h: usize,
    pub t: f64,
    pub eps: f64,
    pub h_max: f64,
    pub time_dependent: bool,
    pub qubits_compact: u64,
    pub qubits_direct: u64,
    pub sparsity_bound: u128,
    pub k_exact: Option<usize>,
    pub tau: f64,
    pub queries: f64,
    pub total_log_local_ops: f64,
}

/// Estimate for a model at its cutoffs. `k_exact`, when given, replaces the
/// bound as the sparsity inside `τ`.
pub fn estimate(model: &ModelSpec, h_max: f64, t: f64, eps: f64, time_dependent: bool, k_exact: Option<usize>) -> Result<ResourceReport> {
    let c = &model.cutoffs;
    let layout = BitLayout::new(&model.particle_types(), c);
    let (qubits_compact, qubits_direct) = qubit_comparison(c, layout.bits_label, model.particles.len() as u64);
    let bound = model_sparsity_bound(model);
    let k = k_exact.map_or(bound as f64, |k| k as f64);
    let tau = k * h_max * t;
    let h = model.max_incoming();
    let g = model.max_outgoing();
    let f = model.interactions.iter().map(|x| x.f()).max().unwrap_or(0);
    let queries = if time_dependent { query_count_timedep(tau, eps)? } else { query_count_static(k, h_max, t, eps)? };
    let lambda = c.lambda_max();
    Ok(ResourceReport {
        registers: c.register_count,
        occupancy_cap: c.occupancy_cap,
        lambda,
        d: c.dims(),
        f,
        g,
        h,
        t,
        eps,
        h_max,
        time_dependent,
        qubits_compact,
        qubits_direct,
        sparsity_bound: bound,
        k_exact,
        tau,
        queries,
        total_log_local_ops: queries * oracle_cost(c.register_count, h, g, c.dims(), lambda),
    })
}

impl ResourceReport {
    pub fn rows(&self) -> Vec<(&'static str, String)> {
        vec![
            ("I", self.registers.to_string()),
            ("W", self.occupancy_cap.to_string()),
            ("Lambda", self.lambda.to_string()),
            ("d", self.d.to_string()),
            ("f", self.f.to_string()),
            ("g", self.g.to_string()),
            ("h", self.h.to_string()),
            ("t", self.t.to_string()),
            ("eps", self.eps.to_string()),
            ("H_max", self.h_max.to_string()),
            ("qubits_compact", self.qubits_compact.to_string()),
            ("qubits_direct", self.qubits_direct.to_string()),
            ("sparsity_bound", self.sparsity_bound.to_string()),
            ("k_exact", self.k_exact.map_or("-".into(), |k| k.to_string())),
            ("tau", self.tau.to_string()),
            ("queries (estimate)", self.queries.to_string()),
            ("total_log_local_ops (estimate)", self.total_log_local_ops.to_string()),
        ]
    }
}

impl fmt::Display for ResourceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = self.rows();
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in rows {
            writeln!(f, "{:<width$}  {}", k, v, width = width)?;
        }
        Ok(())
    }
}
