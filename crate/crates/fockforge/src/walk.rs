//! Dense reference layer: sector bases, dense Hamiltonians, norms and the
//! walk isometry `T: |F⟩ ↦ |F⟩|φ_F⟩`.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{Complex, DMatrix};

use crate::enumerator::Enumerator;
use crate::error::{Error, Result};
use crate::fock::{validate, BitLayout, Cutoffs, FockState, Mode, Momentum, ParticleType, Quantization};
use crate::matrix::apply_hamiltonian;
use crate::model::ModelSpec;

pub const DEFAULT_SECTOR_CAP: usize = 20_000;
pub const SECTOR_CAP_ENV: &str = "FOCKFORGE_SECTOR_CAP";

/// Basis-size guard, overridable through the environment.
pub fn sector_cap() -> usize {
    std::env::var(SECTOR_CAP_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_SECTOR_CAP)
}

/// Constraints selecting a sector of the cutoff Fock space.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sector {
    /// Required total momentum per dimension; `None` leaves it free.
    pub momentum: Vec<Option<i64>>,
    pub max_particles: Option<u64>,
}

impl Sector {
    /// Light-front sector: longitudinal total `K`, transverse totals free.
    pub fn light_front(k: i64, dims: usize) -> Self {
        let mut momentum = vec![None; dims];
        momentum[0] = Some(k);
        Sector { momentum, max_particles: None }
    }

    pub fn equal_time(momentum: Option<i64>, max_particles: Option<u64>, dims: usize) -> Self {
        Sector { momentum: vec![momentum; dims], max_particles }
    }

    /// The natural sector of a model at its cutoffs: fixed `K` for light
    /// front, zero total momentum and at most `max_particles` for equal time.
    pub fn for_model(model: &ModelSpec, max_particles: Option<u64>) -> Self {
        let c = &model.cutoffs;
        match c.harmonic_resolution() {
            Some(k) => Sector { max_particles, ..Sector::light_front(k, c.dims()) },
            None => Sector::equal_time(Some(0), max_particles, c.dims()),
        }
    }

    pub fn contains(&self, state: &FockState, dims: usize) -> bool {
        let p = state.total_momentum(dims);
        self.momentum.iter().zip(&p.0).all(|(want, got)| want.is_none_or(|w| w == *got))
            && self.max_particles.is_none_or(|m| state.particle_count() <= m)
    }
}

/// States of one sector in encoding-bitstring order.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    pub states: Vec<FockState>,
    pub index: HashMap<FockState, usize>,
}

impl SectorBasis {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn position(&self, s: &FockState) -> Option<usize> {
        self.index.get(s).copied()
    }
}

struct SectorSearch<'a> {
    slots: Vec<(ParticleType, Momentum)>,
    cutoffs: &'a Cutoffs,
    sector: &'a Sector,
    cap: usize,
    out: Vec<FockState>,
}

impl SectorSearch<'_> {
    fn run(&mut self, at: usize, modes: &mut Vec<Mode>, sum: &mut [i64], particles: u64) -> Result<()> {
        let lf = self.cutoffs.quantization == Quantization::LightFront;
        if let (true, Some(k)) = (lf, self.sector.momentum.first().copied().flatten()) {
            if sum[0] > k {
                return Ok(());
            }
        }
        if at == self.slots.len() {
            let hit = self.sector.momentum.iter().zip(sum.iter()).all(|(w, g)| w.is_none_or(|w| w == *g));
            if hit {
                if self.out.len() >= self.cap {
                    return Err(Error::CapExceeded { size: self.out.len() + 1, cap: self.cap });
                }
                self.out.push(FockState { modes: modes.clone() });
            }
            return Ok(());
        }
        self.run(at + 1, modes, sum, particles)?;
        if modes.len() >= self.cutoffs.register_count {
            return Ok(());
        }
        let (p, n) = self.slots[at].clone();
        let top = if p.statistics.is_fermionic() { 1 } else { self.cutoffs.occupancy_cap };
        for w in 1..=top {
            let count = particles + w as u64;
            if self.sector.max_particles.is_some_and(|m| count > m) {
                break;
            }
            for (s, c) in sum.iter_mut().zip(&n.0) {
                *s += c * w as i64;
            }
            modes.push(Mode::new(p.clone(), n.clone(), w));
            let r = self.run(at + 1, modes, sum, count);
            modes.pop();
            for (s, c) in sum.iter_mut().zip(&n.0) {
                *s -= c * w as i64;
            }
            r?;
        }
        Ok(())
    }
}

/// Every valid state of the sector, with the default or environment cap.
pub fn enumerate_sector(particles: &[ParticleType], cutoffs: &Cutoffs, sector: &Sector) -> Result<SectorBasis> {
    enumerate_sector_capped(particles, cutoffs, sector, sector_cap())
}

pub fn enumerate_sector_capped(
    particles: &[ParticleType],
    cutoffs: &Cutoffs,
    sector: &Sector,
    cap: usize,
) -> Result<SectorBasis> {
    cutoffs.check()?;
    if sector.momentum.len() != cutoffs.dims() {
        return Err(Error::Invalid(format!(
            "sector has {} momentum constraints for {} dimensions",
            sector.momentum.len(),
            cutoffs.dims()
        )));
    }
    let mut ordered = particles.to_vec();
    ordered.sort();
    ordered.dedup();
    let mut slots = Vec::new();
    for p in &ordered {
        for n in cutoffs.momenta() {
            slots.push((p.clone(), n));
        }
    }
    let mut search = SectorSearch { slots, cutoffs, sector, cap, out: Vec::new() };
    search.run(0, &mut Vec::new(), &mut vec![0; cutoffs.dims()], 0)?;
    let layout = BitLayout::new(&ordered, cutoffs);
    let mut keyed: Vec<(Vec<bool>, FockState)> = search
        .out
        .into_iter()
        .map(|s| {
            let bits = layout.encode(&s).expect("enumerated states are valid");
            ((0..bits.len).map(|i| bits.get(i)).collect(), s)
        })
        .collect();
    keyed.sort();
    let states: Vec<FockState> = keyed.into_iter().map(|(_, s)| s).collect();
    debug_assert!(states.iter().all(|s| validate(s, cutoffs).is_empty()));
    let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    Ok(SectorBasis { states, index })
}

/// Sector basis for a model's own particles and cutoffs.
pub fn model_sector(model: &ModelSpec, sector: &Sector) -> Result<SectorBasis> {
    enumerate_sector(&model.particle_types(), &model.cutoffs, sector)
}

/// `H[x][y] = ⟨basis[x]|H|basis[y]⟩` from the brute-force ladder engine.
/// Images outside the basis are dropped.
pub fn build_dense(model: &ModelSpec, basis: &SectorBasis) -> DMatrix<f64> {
    let n = basis.len();
    let mut h = DMatrix::zeros(n, n);
    for (y, s) in basis.states.iter().enumerate() {
        for (t, v) in apply_hamiltonian(model, s) {
            if let Some(x) = basis.position(&t) {
                h[(x, y)] = v;
            }
        }
    }
    h
}

/// Dense matrix assembled from the sparse enumerator and its matrix elements.
pub fn build_dense_from_oracle(model: &ModelSpec, basis: &SectorBasis) -> DMatrix<f64> {
    let en = Enumerator::new(model);
    let n = basis.len();
    let mut h = DMatrix::zeros(n, n);
    for (y, s) in basis.states.iter().enumerate() {
        for c in en.connected_states(s) {
            if let Some(x) = basis.position(&c.state) {
                h[(x, y)] = c.value;
            }
        }
    }
    h
}

pub fn max_asymmetry(h: &DMatrix<f64>) -> f64 {
    (h - h.transpose()).abs().max()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Norms {
    pub max_entry: f64,
    pub one: f64,
    /// Absolute row sums.
    pub sigma: Vec<f64>,
}

/// `‖H‖_max`, `‖H‖₁ = max_F σ_F` and the row sums `σ_F`.
pub fn norms(h: &DMatrix<f64>) -> Norms {
    let sigma: Vec<f64> = (0..h.nrows()).map(|i| h.row(i).iter().map(|v| v.abs()).sum()).collect();
    let one = sigma.iter().copied().fold(0.0, f64::max);
    let max_entry = h.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Norms { max_entry, one, sigma }
}

/// `min(1, ‖H‖₁ / (k·‖H‖_max))`; 1 for a zero matrix.
pub fn choose_r(h: &DMatrix<f64>, k: usize) -> f64 {
    let n = norms(h);
    if n.max_entry == 0.0 || k == 0 {
        return 1.0;
    }
    (n.one / (k as f64 * n.max_entry)).min(1.0)
}

/// Basis entry of the `b, c` registers: state, index ancilla, flag qubit.
pub type WalkKey = (FockState, usize, u8);

/// Columns `|F⟩|φ_F⟩` of the walk isometry.
#[derive(Debug, Clone)]
pub struct WalkIsometry {
    pub r: f64,
    pub k: usize,
    pub norm_one: f64,
    pub basis: Vec<FockState>,
    /// `φ_F` per basis state, sparse over `(F″, a, flag)`.
    pub columns: Vec<BTreeMap<WalkKey, Complex<f64>>>,
}

fn csqrt(x: f64) -> Complex<f64> {
    if x >= 0.0 {
        Complex::new(x.sqrt(), 0.0)
    } else {
        Complex::new(0.0, (-x).sqrt())
    }
}

/// Build `T` by following the oracle construction: a uniform superposition
/// over `i = 1..k`, one enumerator query, and a rotation of the flag qubit
/// driven by the matrix element.
pub fn build_t(model: &ModelSpec, basis: &SectorBasis, r: f64) -> Result<WalkIsometry> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain(format!("r = {} outside (0, 1]", r)));
    }
    let h = build_dense(model, basis);
    let nm = norms(&h);
    let en = Enumerator::new(model);
    let k = en.index_space_size();
    let mut columns = Vec::with_capacity(basis.len());
    for f in &basis.states {
        let mut col: BTreeMap<WalkKey, Complex<f64>> = BTreeMap::new();
        let uniform = 1.0 / (k as f64).sqrt();
        for i in 1..=k {
            let (psi, a, _) = en.enumerate(f, i);
            let element = if a == 0 { en.element(f, &psi).0 } else { 0.0 };
            let x = if nm.one > 0.0 { k as f64 * r * element / nm.one } else { 0.0 };
            if x.abs() > 1.0 + 1e-12 {
                return Err(Error::Domain(format!(
                    "rotation for index {} needs amplitude {} > 1; lower r",
                    i, x
                )));
            }
            let keep = csqrt(x) * uniform;
            let flag = (1.0 - x.abs()).max(0.0).sqrt() * uniform;
            if keep != Complex::new(0.0, 0.0) {
                *col.entry((psi.clone(), a, 0)).or_default() += keep;
            }
            if flag != 0.0 {
                *col.entry((psi, a, 1)).or_default() += Complex::new(flag, 0.0);
            }
        }
        columns.push(col);
    }
    Ok(WalkIsometry { r, k, norm_one: nm.one, basis: basis.states.clone(), columns })
}

fn inner(a: &BTreeMap<WalkKey, Complex<f64>>, b: &BTreeMap<WalkKey, Complex<f64>>) -> Complex<f64> {
    a.iter().filter_map(|(key, x)| b.get(key).map(|y| x.conj() * y)).sum()
}

impl WalkIsometry {
    /// `⟨F, φ_F | F′, φ_{F′}⟩`: zero unless `F = F′`.
    pub fn gram(&self) -> DMatrix<Complex<f64>> {
        let n = self.columns.len();
        DMatrix::from_fn(n, n, |x, y| if x == y { inner(&self.columns[x], &self.columns[y]) } else { Complex::new(0.0, 0.0) })
    }

    /// `max |T†T − 1|` over the sector.
    pub fn isometry_deviation(&self) -> f64 {
        let g = self.gram();
        let mut dev: f64 = 0.0;
        for x in 0..g.nrows() {
            for y in 0..g.ncols() {
                let target = if x == y { 1.0 } else { 0.0 };
                dev = dev.max((g[(x, y)] - Complex::new(target, 0.0)).norm());
            }
        }
        dev
    }

    /// Amplitude of `(F″, a, flag)` in `φ_F`.
    pub fn amplitude(&self, column: usize, key: &WalkKey) -> Complex<f64> {
        self.columns[column].get(key).copied().unwrap_or_default()
    }

    /// Probability of the flag-one branch in `φ_F`.
    pub fn flag_weight(&self, column: usize) -> f64 {
        self.columns[column].iter().filter(|(k, _)| k.2 == 1).map(|(_, x)| x.norm_sqr()).sum()
    }
}

/// `max |⟨F, φ_F| S |F′, φ_{F′}⟩ − r·H_{FF′}/‖H‖₁|`, where `S` exchanges the
/// input register (padded with a zero index and flag) and the `b, c`
/// registers. Meaningful for nonnegative `H` only: a negative entry maps to
/// an imaginary amplitude and the overlap then equals `|H_{FF′}|`.
pub fn verify_walk_overlap(t: &WalkIsometry, h: &DMatrix<f64>) -> f64 {
    let n = t.basis.len();
    let mut dev: f64 = 0.0;
    for x in 0..n {
        for y in 0..n {
            let fx = (t.basis[x].clone(), 0, 0u8);
            let fy = (t.basis[y].clone(), 0, 0u8);
            let s = t.amplitude(x, &fy).conj() * t.amplitude(y, &fx);
            let target = if t.norm_one > 0.0 { t.r * h[(x, y)] / t.norm_one } else { 0.0 };
            dev = dev.max((s - Complex::new(target, 0.0)).norm());
        }
    }
    dev
}

/// Result of a full walk check on one sector.
#[derive(Debug, Clone)]
pub struct WalkReport {
    pub basis_size: usize,
    pub k: usize,
    pub r: f64,
    pub isometry_deviation: f64,
    pub overlap_deviation: f64,
}

pub fn walk_check(model: &ModelSpec, sector: &Sector, r: Option<f64>) -> Result<WalkReport> {
    let basis = model_sector(model, sector)?;
    let h = build_dense(model, &basis);
    let k = Enumerator::new(model).index_space_size();
    let r = r.unwrap_or_else(|| choose_r(&h, k));
    let t = build_t(model, &basis, r)?;
    Ok(WalkReport {
        basis_size: basis.len(),
        k,
        r,
        isometry_deviation: t.isometry_deviation(),
        overlap_deviation: verify_walk_overlap(&t, &h),
    })
}
