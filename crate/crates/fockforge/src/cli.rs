//! Command-line front end. `run` takes the argument list and writes to the
//! given sinks so it can be driven from tests.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::enumerator::{circuit_build, gate_count, Enumerator, GateTally};
use crate::error::{Error, Result};
use crate::fock::{canonicalize, validate, BitLayout, Bits, Cutoffs, FockState, Mode, Momentum, Quantization};
use crate::matrix::matrix_element_bruteforce;
use crate::model::{builtin_with, parse_model_with_warnings, ModelSpec};
use crate::resources::{estimate, model_sparsity_bound};
use crate::walk::{build_dense, model_sector, norms, walk_check, Sector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_CAP: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "fockforge", version, about = "Compact Fock-state encoding and sparse Hamiltonian oracles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model file path or `builtin:<name>`.
    #[arg(long)]
    pub model: String,
    /// Harmonic resolution (light front) or matched lattice size (equal time).
    #[arg(long = "K")]
    pub k: Option<i64>,
    /// Parameter override `name=value`; repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// Occupancy cap override.
    #[arg(long = "W")]
    pub w: Option<u32>,
    /// Register-count override.
    #[arg(long = "I")]
    pub registers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SectorArgs {
    /// Total momentum along every axis (equal time only).
    #[arg(long, allow_hyphen_values = true)]
    pub momentum: Option<i64>,
    /// Particle-number cap of the sector.
    #[arg(long)]
    pub max_particles: Option<u64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    /// Write CSV to this file as well.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a state literal such as `(b,1,3)(b,2,1)` as a hex bitstring.
    Encode {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        state: String,
    },
    /// Decode a hex bitstring back to a state literal.
    Decode {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        bits: String,
    },
    /// Run the enumerator on one index, or list every connected state.
    Enumerate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        state: String,
        /// 1-based sparsity index.
        #[arg(long = "i")]
        index: Option<usize>,
        /// Execute the reversible circuit instead of the value-level oracle.
        #[arg(long)]
        circuit: bool,
    },
    /// Matrix element `⟨to|H|state⟩`.
    Matelem {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        state: String,
        #[arg(long)]
        to: String,
    },
    /// Dense Hamiltonian of a sector.
    BuildMatrix {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sector: SectorArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact sparsity per basis state against the closed-form bound.
    Sparsity {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sector: SectorArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Enumerator operation counts over a K range, with a log-log slope.
    Gatecount {
        #[arg(long)]
        model: String,
        /// `a..b` (doubling from a to b) or a comma list.
        #[arg(long = "K")]
        k: String,
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// Fraction of the largest K values used in the fit.
        #[arg(long, default_value_t = 0.5)]
        window: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Build the walk isometry on a sector and report its deviations.
    WalkCheck {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sector: SectorArgs,
        #[arg(long)]
        r: Option<f64>,
    },
    /// Resource estimate from the closed-form cost formulas.
    Estimate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        time_dependent: bool,
        /// `‖H‖_max`; computed from the dense sector when omitted.
        #[arg(long)]
        h_max: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn parse_params(items: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Invalid(format!("parameter `{}` is not NAME=VALUE", item)))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::Invalid(format!("parameter `{}` has a non-numeric value", item)))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

fn cutoffs_for(q: Quantization, k: i64, dims: usize) -> Result<Cutoffs> {
    if k < 1 {
        return Err(Error::Invalid(format!("K = {} must be positive", k)));
    }
    if dims != 1 {
        return Err(Error::Invalid("--K only rescales 1+1D cutoffs; edit the model file for d > 1".into()));
    }
    Ok(match q {
        Quantization::LightFront => Cutoffs::light_front(k),
        Quantization::EqualTime => Cutoffs::equal_time_for(k),
    })
}

/// Load a model from a file or `builtin:<name>` with optional `K`,
/// parameter and cap overrides.
pub fn load_model(source: &str, k: Option<i64>, params: &BTreeMap<String, f64>, w: Option<u32>, i: Option<usize>) -> Result<ModelSpec> {
    let mut model = if let Some(name) = source.strip_prefix("builtin:") {
        let base = builtin_with(name, None, params)?;
        match k {
            Some(k) => builtin_with(name, Some(&cutoffs_for(base.cutoffs.quantization, k, base.cutoffs.dims())?), params)?,
            None => base,
        }
    } else {
        let text = std::fs::read_to_string(source).map_err(|e| Error::Invalid(format!("cannot read `{}`: {}", source, e)))?;
        let (mut m, _) = parse_model_with_warnings(&text)?;
        for (name, v) in params {
            if !m.params.contains_key(name) {
                return Err(Error::Invalid(format!("model has no parameter `{}`", name)));
            }
            m = m.with_param(name, *v);
        }
        if let Some(k) = k {
            let c = cutoffs_for(m.cutoffs.quantization, k, m.cutoffs.dims())?;
            m = m.with_cutoffs(c);
        }
        m
    };
    if w.is_some() || i.is_some() {
        let mut c = model.cutoffs.clone();
        if let Some(w) = w {
            c.occupancy_cap = w;
        }
        if let Some(i) = i {
            c.register_count = i;
        }
        c.check()?;
        model = model.with_cutoffs(c);
    }
    Ok(model)
}

fn model_from(a: &ModelArgs) -> Result<ModelSpec> {
    load_model(&a.model, a.k, &parse_params(&a.params)?, a.w, a.registers)
}

fn sector_from(model: &ModelSpec, s: &SectorArgs) -> Sector {
    let mut sector = Sector::for_model(model, s.max_particles);
    if model.cutoffs.quantization == Quantization::EqualTime {
        sector.momentum = vec![s.momentum; model.cutoffs.dims()];
    }
    sector
}

fn parse_momentum(text: &str) -> Result<Momentum> {
    let t = text.trim();
    let inner = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')).unwrap_or(t);
    let parts: std::result::Result<Vec<i64>, _> = inner.split(',').map(|p| p.trim().parse::<i64>()).collect();
    parts.map(Momentum).map_err(|_| Error::Invalid(format!("bad momentum `{}`", text)))
}

/// Parse `(name,momentum,occupancy)(...)`; momentum is an integer or
/// `[n1,n2,...]`. `vac` is the vacuum.
pub fn parse_state(model: &ModelSpec, text: &str) -> Result<FockState> {
    let t = text.trim();
    if t.is_empty() || t == "vac" {
        return Ok(FockState::vacuum());
    }
    let mut modes = Vec::new();
    let mut rest = t;
    while !rest.is_empty() {
        let body_start = rest.strip_prefix('(').ok_or_else(|| Error::Invalid(format!("expected `(` at `{}`", rest)))?;
        let mut depth = 0;
        let mut end = None;
        for (i, c) in body_start.char_indices() {
            match c {
                '[' => depth += 1,
                ']' => depth -= 1,
                ')' if depth == 0 => {
                    end = Some(i);
                    break;
                }
                _ => {}
            }
        }
        let end = end.ok_or_else(|| Error::Invalid("unclosed `(` in state literal".into()))?;
        let body = &body_start[..end];
        let first = body.find(',').ok_or_else(|| Error::Invalid(format!("mode `({})` needs three fields", body)))?;
        let last = body.rfind(',').filter(|&l| l > first).ok_or_else(|| Error::Invalid(format!("mode `({})` needs three fields", body)))?;
        let name = body[..first].trim();
        let particle = match model.particle_named(name) {
            Some(p) => p.clone(),
            None => {
                let id: u16 = name.parse().map_err(|_| Error::UnknownParticle(name.to_string()))?;
                let hits: Vec<_> = model.particle_types().into_iter().filter(|p| p.species_id == id).collect();
                match hits.as_slice() {
                    [p] => p.clone(),
                    _ => return Err(Error::UnknownParticle(name.to_string())),
                }
            }
        };
        let momentum = parse_momentum(&body[first + 1..last])?;
        let occ: u32 = body[last + 1..].trim().parse().map_err(|_| Error::Invalid(format!("bad occupancy in `({})`", body)))?;
        modes.push(Mode::new(particle, momentum, occ));
        rest = body_start[end + 1..].trim_start();
    }
    let state = canonicalize(modes)?;
    let v = validate(&state, &model.cutoffs);
    if !v.is_empty() {
        return Err(Error::Invalid(format!("state violates the cutoffs: {:?}", v)));
    }
    Ok(state)
}

/// Inverse of [`parse_state`] using particle names.
pub fn format_state(model: &ModelSpec, state: &FockState) -> String {
    if state.is_empty() {
        return "vac".into();
    }
    state
        .modes
        .iter()
        .map(|m| format!("({},{},{})", model.name_of(&m.particle).unwrap_or("?"), m.momentum, m.occupancy))
        .collect()
}

/// Least-squares slope on log-log points restricted to the largest-K window.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub points: Vec<(f64, f64)>,
    pub window: usize,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space over the window.
    pub residual: f64,
}

/// Fit `log count = slope · log K + c` over the top `⌈n·fraction⌉` points
/// (at least two).
pub fn fit_slope(points: &[(f64, f64)], fraction: f64) -> Result<SlopeFit> {
    if points.len() < 4 {
        return Err(Error::Invalid(format!("need at least 4 points, got {}", points.len())));
    }
    if points.iter().any(|&(k, c)| !(k > 0.0 && c > 0.0)) {
        return Err(Error::Invalid("points must be positive".into()));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Invalid(format!("window fraction {} outside (0, 1]", fraction)));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = ((sorted.len() as f64 * fraction).ceil() as usize).clamp(2, sorted.len());
    let win: Vec<(f64, f64)> = sorted[sorted.len() - n..].iter().map(|&(k, c)| (k.ln(), c.ln())).collect();
    let mx = win.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = win.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxx: f64 = win.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = win.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = win.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Invalid("degenerate series".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (win.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum::<f64>() / n as f64).sqrt();
    Ok(SlopeFit { points: sorted, window: n, slope, intercept, residual })
}

/// `a..b` doubles from `a` up to `b`; otherwise a comma list.
pub fn parse_k_range(text: &str) -> Result<Vec<i64>> {
    let bad = || Error::Invalid(format!("bad K range `{}`", text));
    let ks: Vec<i64> = if let Some((a, b)) = text.split_once("..") {
        let (a, b): (i64, i64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a < 1 || b < a {
            return Err(bad());
        }
        std::iter::successors(Some(a), |k| Some(k * 2)).take_while(|k| *k <= b).collect()
    } else {
        text.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if ks.is_empty() || ks.iter().any(|&k| k < 1) {
        return Err(bad());
    }
    Ok(ks)
}

pub const GATECOUNT_HEADER: [&str; 7] = ["K", "step1_ops", "step2_ops", "step3_ops", "step4_ops", "uncompute_ops", "total"];

/// Operation counts for a builtin or model file at each `K`.
pub fn gatecount_series(source: &str, ks: &[i64], params: &BTreeMap<String, f64>) -> Result<Vec<(i64, GateTally)>> {
    ks.iter()
        .map(|&k| {
            let m = load_model(source, Some(k), params, None, None)?;
            Ok((k, gate_count(&m, &m.cutoffs)))
        })
        .collect()
}

pub fn gatecount_csv(rows: &[(i64, GateTally)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Invalid(e.to_string());
    w.write_record(GATECOUNT_HEADER).map_err(io)?;
    for (k, t) in rows {
        w.write_record([k.to_string(), t.step1.to_string(), t.step2.to_string(), t.step3.to_string(), t.step4.to_string(), t.uncompute.to_string(), t.total.to_string()])
            .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_csv_file(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Invalid(format!("cannot write `{}`: {}", path.display(), e)))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::Invalid(e.to_string()))
}

fn matrix_csv(model: &ModelSpec, states: &[FockState], h: &nalgebra::DMatrix<f64>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Invalid(e.to_string());
    let mut header = vec!["state".to_string()];
    header.extend(states.iter().map(|s| format_state(model, s)));
    w.write_record(&header).map_err(io)?;
    for (x, s) in states.iter().enumerate() {
        let mut row = vec![format_state(model, s)];
        row.extend((0..states.len()).map(|y| format!("{:e}", h[(x, y)])));
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Encode { model, state } => {
            let m = model_from(&model)?;
            let s = parse_state(&m, &state)?;
            let layout = BitLayout::new(&m.particle_types(), &m.cutoffs);
            let bits = layout.encode(&s)?;
            emit(out, &format!("bits={} hex={}\n", bits.len, bits.to_hex()))
        }
        Command::Decode { model, bits } => {
            let m = model_from(&model)?;
            let layout = BitLayout::new(&m.particle_types(), &m.cutoffs);
            let b = Bits::from_hex(&bits, layout.bits_total as usize)?;
            let s = layout.decode(&b)?;
            emit(out, &format!("{}\n", format_state(&m, &s)))
        }
        Command::Enumerate { model, state, index, circuit } => {
            let m = model_from(&model)?;
            let f = parse_state(&m, &state)?;
            let en = Enumerator::new(&m);
            match index {
                Some(i) if circuit => {
                    let c = circuit_build(&m);
                    if i == 0 {
                        return Err(Error::Invalid("indices start at 1".into()));
                    }
                    let s = c.run(c.load(&f, i)?)?;
                    let r = c.result_state(&s).ok_or_else(|| Error::Interpreter("result register is malformed".into()))?;
                    emit(out, &format!("i={} out={} a_flag={} ops={}\n", i, format_state(&m, &r), s.idx, c.len()))
                }
                Some(i) => {
                    let (r, a, t) = en.enumerate(&f, i);
                    let reason = t.reason.map_or("-".to_string(), |r| format!("{:?}", r));
                    emit(out, &format!("i={} out={} a_flag={} reason={}\n", i, format_state(&m, &r), a, reason))
                }
                None => {
                    let mut text = format!("index_space={}\n", en.index_space_size());
                    for c in en.connected_states(&f) {
                        text += &format!("{:>6}  {:<40} {:+.12e}\n", c.index, format_state(&m, &c.state), c.value);
                    }
                    emit(out, &text)
                }
            }
        }
        Command::Matelem { model, state, to } => {
            let m = model_from(&model)?;
            let f = parse_state(&m, &state)?;
            let g = parse_state(&m, &to)?;
            let me = Enumerator::new(&m).matrix_element(&f, &g);
            let brute = matrix_element_bruteforce(&m, &f, &g);
            let mut text = format!("value={:+.15e} bruteforce={:+.15e}\n", me.value, brute);
            if me.contributions.is_empty() {
                text += "not connected\n";
            }
            for (i, v) in me.contributions {
                text += &format!("  i={} {:+.15e}\n", i, v);
            }
            emit(out, &text)
        }
        Command::BuildMatrix { model, sector, output } => {
            let m = model_from(&model)?;
            let basis = model_sector(&m, &sector_from(&m, &sector))?;
            let h = build_dense(&m, &basis);
            let csv_text = matrix_csv(&m, &basis.states, &h)?;
            if let Some(p) = &output.csv {
                write_csv_file(p, &csv_text)?;
            }
            match output.format {
                Format::Csv => emit(out, &csv_text),
                Format::Table => {
                    let mut text = format!("basis={}\n", basis.len());
                    for (x, s) in basis.states.iter().enumerate() {
                        text += &format!("{:>4} {}\n", x, format_state(&m, s));
                    }
                    for x in 0..basis.len() {
                        let row: Vec<String> = (0..basis.len()).map(|y| format!("{:>11.4e}", h[(x, y)])).collect();
                        text += &row.join(" ");
                        text += "\n";
                    }
                    emit(out, &text)
                }
            }
        }
        Command::Sparsity { model, sector, output } => {
            let m = model_from(&model)?;
            let basis = model_sector(&m, &sector_from(&m, &sector))?;
            let en = Enumerator::new(&m);
            let bound = model_sparsity_bound(&m);
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Invalid(e.to_string());
            w.write_record(["state", "exact", "bound"]).map_err(io)?;
            let mut worst = 0;
            for s in &basis.states {
                let k = en.exact_sparsity(s);
                worst = worst.max(k);
                w.write_record([format_state(&m, s), k.to_string(), bound.to_string()]).map_err(io)?;
            }
            let csv_text = String::from_utf8(w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?).expect("utf-8");
            if let Some(p) = &output.csv {
                write_csv_file(p, &csv_text)?;
            }
            match output.format {
                Format::Csv => emit(out, &csv_text),
                Format::Table => emit(out, &format!("basis={} max_exact={} bound={} holds={}\n", basis.len(), worst, bound, worst as u128 <= bound)),
            }
        }
        Command::Gatecount { model, k, params, window, output } => {
            let ks = parse_k_range(&k)?;
            let rows = gatecount_series(&model, &ks, &parse_params(&params)?)?;
            let csv_text = gatecount_csv(&rows)?;
            if let Some(p) = &output.csv {
                write_csv_file(p, &csv_text)?;
            }
            let fit = if rows.len() >= 4 {
                let pts: Vec<(f64, f64)> = rows.iter().map(|(k, t)| (*k as f64, t.total as f64)).collect();
                Some(fit_slope(&pts, window)?)
            } else {
                None
            };
            let fit_line = fit.map_or("slope=- (needs 4 points)\n".to_string(), |f| {
                format!("slope={:.4} window={} residual={:.3e}\n", f.slope, f.window, f.residual)
            });
            match output.format {
                Format::Csv => emit(out, &csv_text),
                Format::Table => {
                    let mut text = format!(
                        "{:>6} {:>12} {:>12} {:>12} {:>12} {:>14} {:>14}\n",
                        "K", "step1", "step2", "step3", "step4", "uncompute", "total"
                    );
                    for (k, t) in &rows {
                        text += &format!(
                            "{:>6} {:>12} {:>12} {:>12} {:>12} {:>14} {:>14}\n",
                            k, t.step1, t.step2, t.step3, t.step4, t.uncompute, t.total
                        );
                    }
                    text += &fit_line;
                    emit(out, &text)
                }
            }
        }
        Command::WalkCheck { model, sector, r } => {
            let m = model_from(&model)?;
            let rep = walk_check(&m, &sector_from(&m, &sector), r)?;
            emit(
                out,
                &format!(
                    "basis={} k={} r={:.12} isometry_deviation={:.3e} overlap_deviation={:.3e}\n",
                    rep.basis_size, rep.k, rep.r, rep.isometry_deviation, rep.overlap_deviation
                ),
            )
        }
        Command::Estimate { model, t, eps, time_dependent, h_max, output } => {
            let m = model_from(&model)?;
            let (h_max, k_exact) = match h_max {
                Some(h) => (h, None),
                None => {
                    let basis = model_sector(&m, &Sector::for_model(&m, None))?;
                    let h = build_dense(&m, &basis);
                    let en = Enumerator::new(&m);
                    let k = basis.states.iter().map(|s| en.exact_sparsity(s)).max().unwrap_or(0);
                    (norms(&h).max_entry, Some(k))
                }
            };
            let rep = estimate(&m, h_max, t, eps, time_dependent, k_exact)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Invalid(e.to_string());
            let rows = rep.rows();
            w.write_record(rows.iter().map(|(k, _)| *k)).map_err(io)?;
            w.write_record(rows.iter().map(|(_, v)| v.as_str())).map_err(io)?;
            let csv_text = String::from_utf8(w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?).expect("utf-8");
            if let Some(p) = &output.csv {
                write_csv_file(p, &csv_text)?;
            }
            match output.format {
                Format::Csv => emit(out, &csv_text),
                Format::Table => emit(out, &rep.to_string()),
            }
        }
    }
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CapExceeded { .. } => EXIT_CAP,
        _ => EXIT_VALIDATION,
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{}", e) } else { write!(err, "{}", e) };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e);
            exit_code(&e)
        }
    }
}
