//! Compact Fock states: modes, cutoffs, canonical ordering, bit layout and
//! qubit-count formulas.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Boson,
    Fermion,
    Antifermion,
}

impl Statistics {
    pub fn is_fermionic(self) -> bool {
        !matches!(self, Statistics::Boson)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Statistics::Boson => "boson",
            Statistics::Fermion => "fermion",
            Statistics::Antifermion => "antifermion",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "boson" => Some(Statistics::Boson),
            "fermion" => Some(Statistics::Fermion),
            "antifermion" => Some(Statistics::Antifermion),
            _ => None,
        }
    }
}

/// Everything that identifies a particle up to its momentum.
///
/// Equality and ordering use `(species_id, extra_qnums, statistics)`; the
/// `label_bits` width is layout metadata and does not take part.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParticleType {
    pub species_id: u16,
    pub statistics: Statistics,
    pub extra_qnums: Vec<i32>,
    pub label_bits: u32,
}

impl ParticleType {
    pub fn new(species_id: u16, statistics: Statistics) -> Self {
        ParticleType { species_id, statistics, extra_qnums: Vec::new(), label_bits: 0 }
    }

    pub fn with_qnums(mut self, qnums: Vec<i32>) -> Self {
        self.extra_qnums = qnums;
        self
    }

    pub fn boson() -> Self {
        ParticleType::new(0, Statistics::Boson)
    }

    pub fn fermion() -> Self {
        ParticleType::new(1, Statistics::Fermion)
    }

    pub fn antifermion() -> Self {
        ParticleType::new(2, Statistics::Antifermion)
    }

    fn key(&self) -> (u16, &[i32], Statistics) {
        (self.species_id, &self.extra_qnums, self.statistics)
    }
}

impl PartialEq for ParticleType {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for ParticleType {}

impl std::hash::Hash for ParticleType {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl PartialOrd for ParticleType {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ParticleType {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// Dimensionless momentum, compared lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Momentum(pub Vec<i64>);

impl Momentum {
    pub fn zero(dims: usize) -> Self {
        Momentum(vec![0; dims])
    }

    pub fn scalar(n: i64) -> Self {
        Momentum(vec![n])
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn add(&self, other: &Momentum) -> Momentum {
        Momentum(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scaled(&self, w: i64) -> Momentum {
        Momentum(self.0.iter().map(|a| a * w).collect())
    }
}

impl fmt::Display for Momentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            write!(f, "{}", self.0[0])
        } else {
            let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
            write!(f, "[{}]", parts.join(","))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantization {
    LightFront,
    EqualTime,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cutoffs {
    /// `(Λ⁻_j, Λ⁺_j)` per dimension.
    pub per_dim: Vec<(i64, i64)>,
    /// W
    pub occupancy_cap: u32,
    /// I
    pub register_count: usize,
    pub quantization: Quantization,
}

/// Smallest `I` with `I² ≥ 2K`, i.e. `⌈√(2K)⌉`.
pub fn lf_register_bound(k: i64) -> usize {
    let target = 2 * k.max(0);
    let mut i = (target as f64).sqrt() as i64;
    while i * i < target {
        i += 1;
    }
    while i > 0 && (i - 1) * (i - 1) >= target {
        i -= 1;
    }
    i as usize
}

/// `⌈log₂ x⌉` for `x ≥ 1`; zero for `x ≤ 1`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

impl Cutoffs {
    /// 1+1D light-front cutoffs at harmonic resolution `k`.
    pub fn light_front(k: i64) -> Self {
        Cutoffs {
            per_dim: vec![(1, k)],
            occupancy_cap: k.max(1) as u32,
            register_count: lf_register_bound(k).max(1),
            quantization: Quantization::LightFront,
        }
    }

    /// Light-front cutoffs with transverse ranges; `I = K` when `d ≥ 2`.
    pub fn light_front_transverse(k: i64, transverse: &[(i64, i64)]) -> Self {
        let mut per_dim = vec![(1, k)];
        per_dim.extend_from_slice(transverse);
        let register_count = if per_dim.len() == 1 { lf_register_bound(k) } else { k as usize };
        Cutoffs {
            per_dim,
            occupancy_cap: k.max(1) as u32,
            register_count: register_count.max(1),
            quantization: Quantization::LightFront,
        }
    }

    /// Equal-time cutoffs matched to a light-front run at resolution `k`:
    /// `[-Λ, Λ]` with `Λ = ⌈K/2⌉ − 1`, `I = K`, `W = K`.
    pub fn equal_time_for(k: i64) -> Self {
        let lambda = (k + 1) / 2 - 1;
        Cutoffs::equal_time(lambda, k.max(1) as usize, k.max(1) as u32)
    }

    pub fn equal_time(lambda: i64, registers: usize, w: u32) -> Self {
        Cutoffs {
            per_dim: vec![(-lambda, lambda)],
            occupancy_cap: w,
            register_count: registers,
            quantization: Quantization::EqualTime,
        }
    }

    pub fn dims(&self) -> usize {
        self.per_dim.len()
    }

    /// Harmonic resolution `K = Λ⁺₁` for light-front cutoffs.
    pub fn harmonic_resolution(&self) -> Option<i64> {
        match self.quantization {
            Quantization::LightFront => Some(self.per_dim[0].1),
            Quantization::EqualTime => None,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.per_dim.is_empty() {
            return Err(Error::InvalidCutoffs("no dimensions".into()));
        }
        for (j, (lo, hi)) in self.per_dim.iter().enumerate() {
            if lo > hi {
                return Err(Error::InvalidCutoffs(format!("dimension {}: {} > {}", j + 1, lo, hi)));
            }
        }
        if self.occupancy_cap < 1 {
            return Err(Error::InvalidCutoffs("W must be at least 1".into()));
        }
        if self.register_count < 1 {
            return Err(Error::InvalidCutoffs("I must be at least 1".into()));
        }
        if self.quantization == Quantization::LightFront && self.per_dim[0].0 < 1 {
            return Err(Error::InvalidCutoffs("light-front axis needs Λ⁻₁ ≥ 1".into()));
        }
        Ok(())
    }

    pub fn contains(&self, n: &Momentum) -> bool {
        n.0.len() == self.per_dim.len()
            && n.0.iter().zip(&self.per_dim).all(|(c, (lo, hi))| lo <= c && c <= hi)
    }

    /// All in-cutoff momenta, in lexicographic order.
    pub fn momenta(&self) -> Vec<Momentum> {
        let mut out = vec![Vec::new()];
        for &(lo, hi) in &self.per_dim {
            let mut next = Vec::with_capacity(out.len() * (hi - lo + 1).max(0) as usize);
            for prefix in &out {
                for c in lo..=hi {
                    let mut v = prefix.clone();
                    v.push(c);
                    next.push(v);
                }
            }
            out = next;
        }
        out.into_iter().map(Momentum).collect()
    }

    pub fn momentum_count(&self) -> u64 {
        self.per_dim.iter().map(|(lo, hi)| (hi - lo + 1).max(0) as u64).product()
    }

    pub fn momentum_bits(&self) -> Vec<u32> {
        self.per_dim.iter().map(|(lo, hi)| ceil_log2((hi - lo + 1) as u64)).collect()
    }

    pub fn lambda_max(&self) -> i64 {
        self.per_dim.iter().map(|(lo, hi)| lo.abs().max(hi.abs())).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mode {
    pub particle: ParticleType,
    pub momentum: Momentum,
    pub occupancy: u32,
}

impl Mode {
    pub fn new(particle: ParticleType, momentum: Momentum, occupancy: u32) -> Self {
        Mode { particle, momentum, occupancy }
    }

    /// Ordering key: label first, momentum second.
    pub fn key_cmp(&self, other: &Mode) -> Ordering {
        (&self.particle, &self.momentum).cmp(&(&other.particle, &other.momentum))
    }

    pub fn same_slot(&self, particle: &ParticleType, momentum: &Momentum) -> bool {
        &self.particle == particle && &self.momentum == momentum
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.particle.species_id, self.momentum, self.occupancy)
    }
}

/// Occupied modes in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct FockState {
    pub modes: Vec<Mode>,
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (idx, m) in self.modes.iter().enumerate() {
            if idx > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", m)?;
        }
        write!(f, "⟩")
    }
}

impl FockState {
    pub fn vacuum() -> Self {
        FockState { modes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn occupancy_of(&self, particle: &ParticleType, momentum: &Momentum) -> u32 {
        self.position_of(particle, momentum).map(|p| self.modes[p].occupancy).unwrap_or(0)
    }

    pub fn position_of(&self, particle: &ParticleType, momentum: &Momentum) -> Option<usize> {
        self.modes
            .binary_search_by(|m| (&m.particle, &m.momentum).cmp(&(particle, momentum)))
            .ok()
    }

    /// Number of particles of `particle`'s type in modes ordered strictly
    /// before `(particle, momentum)`.
    pub fn preceding_same_type(&self, particle: &ParticleType, momentum: &Momentum) -> u32 {
        self.modes
            .iter()
            .filter(|m| &m.particle == particle && &m.momentum < momentum)
            .map(|m| m.occupancy)
            .sum()
    }

    pub fn total_momentum(&self, dims: usize) -> Momentum {
        let mut acc = Momentum::zero(dims);
        for m in &self.modes {
            acc = acc.add(&m.momentum.scaled(m.occupancy as i64));
        }
        acc
    }

    pub fn particle_count(&self) -> u64 {
        self.modes.iter().map(|m| m.occupancy as u64).sum()
    }
}

/// Sort modes into the unique canonical order.
pub fn canonicalize(modes: Vec<Mode>) -> Result<FockState> {
    let mut modes = modes;
    if let Some(m) = modes.iter().find(|m| m.occupancy == 0) {
        return Err(Error::ZeroOccupancy(m.to_string()));
    }
    modes.sort_by(|a, b| a.key_cmp(b));
    for pair in modes.windows(2) {
        if pair[0].key_cmp(&pair[1]) == Ordering::Equal {
            return Err(Error::DuplicateMode(pair[1].to_string()));
        }
    }
    Ok(FockState { modes })
}

/// Component-wise `Σ w·n` over the modes.
pub fn total_momentum(state: &FockState, dims: usize) -> Momentum {
    state.total_momentum(dims)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Ordering { index: usize },
    ZeroOccupancy { index: usize },
    DimensionMismatch { index: usize },
    Cutoff { index: usize, dim: usize },
    OccupancyCap { index: usize, occupancy: u32, cap: u32 },
    FermionicOccupancy { index: usize, occupancy: u32 },
    TooManyModes { count: usize, cap: usize },
    SectorMomentum { expected: i64, found: i64 },
}

/// Every invariant the state violates under `cutoffs`; empty means valid.
pub fn validate(state: &FockState, cutoffs: &Cutoffs) -> Vec<Violation> {
    let mut out = Vec::new();
    for (index, m) in state.modes.iter().enumerate() {
        if index > 0 && state.modes[index - 1].key_cmp(m) != Ordering::Less {
            out.push(Violation::Ordering { index });
        }
        if m.occupancy == 0 {
            out.push(Violation::ZeroOccupancy { index });
        }
        if m.momentum.dims() != cutoffs.dims() {
            out.push(Violation::DimensionMismatch { index });
        } else {
            for (dim, (c, (lo, hi))) in m.momentum.0.iter().zip(&cutoffs.per_dim).enumerate() {
                if c < lo || c > hi {
                    out.push(Violation::Cutoff { index, dim });
                }
            }
        }
        if m.occupancy > cutoffs.occupancy_cap {
            out.push(Violation::OccupancyCap { index, occupancy: m.occupancy, cap: cutoffs.occupancy_cap });
        }
        if m.particle.statistics.is_fermionic() && m.occupancy > 1 {
            out.push(Violation::FermionicOccupancy { index, occupancy: m.occupancy });
        }
    }
    if state.modes.len() > cutoffs.register_count {
        out.push(Violation::TooManyModes { count: state.modes.len(), cap: cutoffs.register_count });
    }
    out
}

/// `validate` plus the light-front sector condition `Σ w·n₁ = K`.
pub fn validate_in_sector(state: &FockState, cutoffs: &Cutoffs, k: i64) -> Vec<Violation> {
    let mut out = validate(state, cutoffs);
    let found = state.total_momentum(cutoffs.dims()).0.first().copied().unwrap_or(0);
    if found != k {
        out.push(Violation::SectorMomentum { expected: k, found });
    }
    out
}

/// `Q = I·(N_q + ⌈log₂W⌉ + Σ_j ⌈log₂(Λ⁺_j − Λ⁻_j + 1)⌉)`.
pub fn qubits_total(cutoffs: &Cutoffs, n_q: u32) -> u64 {
    let per_mode = n_q as u64
        + ceil_log2(cutoffs.occupancy_cap as u64) as u64
        + cutoffs.momentum_bits().iter().map(|&b| b as u64).sum::<u64>();
    cutoffs.register_count as u64 * per_mode
}

/// Light-front specialization: `⌈√(2K)⌉(N_q + 2⌈log₂K⌉)` for `d = 1`,
/// `K(N_q + 2⌈log₂K⌉ + Σ_{j≥2} ⌈log₂(range_j)⌉)` otherwise.
pub fn qubits_lf_formula(k: i64, n_q: u32, transverse: &[(i64, i64)]) -> u64 {
    let log_k = ceil_log2(k as u64) as u64;
    if transverse.is_empty() {
        lf_register_bound(k) as u64 * (n_q as u64 + 2 * log_k)
    } else {
        let extra: u64 = transverse.iter().map(|(lo, hi)| ceil_log2((hi - lo + 1) as u64) as u64).sum();
        k as u64 * (n_q as u64 + 2 * log_k + extra)
    }
}

/// Direct (one register per mode) encoding:
/// `(number of momentum values)·q·⌈log₂W⌉`.
pub fn qubits_direct(cutoffs: &Cutoffs, q_values: u64) -> u64 {
    cutoffs.momentum_count() * q_values * ceil_log2(cutoffs.occupancy_cap as u64) as u64
}

/// `⌊K/Λ⁻₁⌋` along the first axis with strictly positive lower cutoff.
pub fn max_occupied_modes(cutoffs: &Cutoffs, k: i64) -> Result<i64> {
    let lo = cutoffs
        .per_dim
        .iter()
        .map(|(lo, _)| *lo)
        .find(|lo| *lo > 0)
        .ok_or_else(|| Error::InvalidCutoffs("no axis with positive lower cutoff".into()))?;
    Ok(k.div_euclid(lo))
}

/// Packed bits, little-endian within and across bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bits {
    pub len: usize,
    pub bytes: Vec<u8>,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits { len, bytes: vec![0; len.div_ceil(8)] }
    }

    pub fn get(&self, i: usize) -> bool {
        self.bytes[i / 8] >> (i % 8) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        if v {
            self.bytes[i / 8] |= 1 << (i % 8);
        } else {
            self.bytes[i / 8] &= !(1 << (i % 8));
        }
    }

    fn write(&mut self, offset: usize, width: u32, value: u64) {
        for b in 0..width as usize {
            self.set(offset + b, value >> b & 1 == 1);
        }
    }

    fn read(&self, offset: usize, width: u32) -> u64 {
        (0..width as usize).fold(0, |acc, b| acc | (self.get(offset + b) as u64) << b)
    }

    pub fn is_zero(&self) -> bool {
        self.bytes.iter().all(|&b| b == 0)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.bytes)
    }

    pub fn from_hex(text: &str, len: usize) -> Result<Self> {
        let bytes = hex::decode(text.trim()).map_err(|e| Error::Decode(e.to_string()))?;
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Decode(format!("expected {} bytes, found {}", len.div_ceil(8), bytes.len())));
        }
        let bits = Bits { len, bytes };
        if (len..bits.bytes.len() * 8).any(|i| bits.get(i)) {
            return Err(Error::Decode("padding bits are not zero".into()));
        }
        Ok(bits)
    }
}

/// Register layout for a particle registry under fixed cutoffs.
///
/// Occupancy is stored as `w` with zero marking an unencoded register, so the
/// concrete width is `⌈log₂(W+1)⌉`; `bits_occupancy_formula` keeps the
/// `⌈log₂W⌉` figure used by [`qubits_total`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitLayout {
    pub particles: Vec<ParticleType>,
    pub cutoffs: Cutoffs,
    pub bits_label: u32,
    pub bits_occupancy: u32,
    pub bits_occupancy_formula: u32,
    pub bits_momentum: Vec<u32>,
    pub bits_per_mode: u32,
    pub bits_total: u64,
}

impl BitLayout {
    pub fn new(particles: &[ParticleType], cutoffs: &Cutoffs) -> Self {
        let mut particles = particles.to_vec();
        particles.sort();
        particles.dedup();
        let bits_label = ceil_log2(particles.len() as u64);
        for p in particles.iter_mut() {
            p.label_bits = bits_label;
        }
        let bits_occupancy = ceil_log2(cutoffs.occupancy_cap as u64 + 1);
        let bits_momentum = cutoffs.momentum_bits();
        let bits_per_mode = bits_label + bits_occupancy + bits_momentum.iter().sum::<u32>();
        BitLayout {
            particles,
            cutoffs: cutoffs.clone(),
            bits_label,
            bits_occupancy,
            bits_occupancy_formula: ceil_log2(cutoffs.occupancy_cap as u64),
            bits_momentum,
            bits_per_mode,
            bits_total: cutoffs.register_count as u64 * bits_per_mode as u64,
        }
    }

    pub fn label_code(&self, p: &ParticleType) -> Option<u64> {
        self.particles.binary_search(p).ok().map(|c| c as u64)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Decode(e.to_string()))
    }

    pub fn encode(&self, state: &FockState) -> Result<Bits> {
        let cut = &self.cutoffs;
        if state.modes.len() > cut.register_count {
            return Err(Error::Invalid(format!("{} modes exceed I = {}", state.modes.len(), cut.register_count)));
        }
        let mut bits = Bits::zeros(self.bits_total as usize);
        for (r, m) in state.modes.iter().enumerate() {
            let code = self.label_code(&m.particle).ok_or_else(|| Error::UnknownParticle(m.to_string()))?;
            if m.occupancy == 0 || m.occupancy > cut.occupancy_cap || !cut.contains(&m.momentum) {
                return Err(Error::Invalid(format!("mode {} is outside the layout", m)));
            }
            if r > 0 && state.modes[r - 1].key_cmp(m) != Ordering::Less {
                return Err(Error::Invalid("modes are not in canonical order".into()));
            }
            let mut off = r * self.bits_per_mode as usize;
            bits.write(off, self.bits_label, code);
            off += self.bits_label as usize;
            bits.write(off, self.bits_occupancy, m.occupancy as u64);
            off += self.bits_occupancy as usize;
            for (j, (&c, &(lo, _))) in m.momentum.0.iter().zip(&cut.per_dim).enumerate() {
                bits.write(off, self.bits_momentum[j], (c - lo) as u64);
                off += self.bits_momentum[j] as usize;
            }
        }
        Ok(bits)
    }

    pub fn decode(&self, bits: &Bits) -> Result<FockState> {
        if bits.len != self.bits_total as usize {
            return Err(Error::Decode(format!("expected {} bits, found {}", self.bits_total, bits.len)));
        }
        let cut = &self.cutoffs;
        let mut modes: Vec<Mode> = Vec::new();
        let mut ended = false;
        for r in 0..cut.register_count {
            let base = r * self.bits_per_mode as usize;
            let raw = bits.read_range(base, self.bits_per_mode);
            if raw {
                let mut off = base;
                let code = bits.read(off, self.bits_label);
                off += self.bits_label as usize;
                let occ = bits.read(off, self.bits_occupancy) as u32;
                off += self.bits_occupancy as usize;
                let mut mom = Vec::with_capacity(cut.dims());
                for (j, &(lo, hi)) in cut.per_dim.iter().enumerate() {
                    let v = bits.read(off, self.bits_momentum[j]) as i64 + lo;
                    off += self.bits_momentum[j] as usize;
                    if v > hi {
                        return Err(Error::Decode(format!("register {}: momentum out of range", r)));
                    }
                    mom.push(v);
                }
                if occ == 0 {
                    return Err(Error::Decode(format!("register {}: zero-occupancy encoded mode", r)));
                }
                if ended {
                    return Err(Error::Decode(format!("register {}: follows an unencoded register", r)));
                }
                let particle = self
                    .particles
                    .get(code as usize)
                    .cloned()
                    .ok_or_else(|| Error::Decode(format!("register {}: unknown label code {}", r, code)))?;
                let mode = Mode::new(particle, Momentum(mom), occ);
                if let Some(prev) = modes.last() {
                    if prev.key_cmp(&mode) != Ordering::Less {
                        return Err(Error::Decode(format!("register {}: modes are not sorted", r)));
                    }
                }
                modes.push(mode);
            } else {
                ended = true;
            }
        }
        Ok(FockState { modes })
    }
}

impl Bits {
    fn read_range(&self, offset: usize, width: u32) -> bool {
        (offset..offset + width as usize).any(|i| self.get(i))
    }
}
