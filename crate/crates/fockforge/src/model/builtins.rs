//! Built-in models, generated as model text and read back through the parser.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fock::{Cutoffs, Quantization};

use super::parse::parse_model;
use super::ModelSpec;

const NAMES: [&str; 11] = [
    "free-boson-lf",
    "free-fermion-lf",
    "free-boson-et",
    "free-fermion-et",
    "phi4-lf",
    "phi4-et",
    "yukawa-lf",
    "yukawa-et",
    "number-operator",
    "boson-fusion",
    "boson-fermion-scattering",
];

pub fn builtin_names() -> &'static [&'static str] {
    &NAMES
}

fn defaults(name: &str) -> Option<(&'static [&'static str], Quantization)> {
    use Quantization::*;
    Some(match name {
        "free-boson-lf" => (&["m_B"][..], LightFront),
        "free-fermion-lf" => (&["m_F"][..], LightFront),
        "free-boson-et" | "free-fermion-et" => (&["m"][..], EqualTime),
        "phi4-lf" => (&["lambda", "m"][..], LightFront),
        "phi4-et" => (&["lambda", "m"][..], EqualTime),
        "yukawa-lf" => (&["g", "m_F"][..], LightFront),
        "yukawa-et" => (&["g", "m_B", "m_F"][..], EqualTime),
        "number-operator" | "boson-fusion" | "boson-fermion-scattering" => (&[][..], LightFront),
        _ => return None,
    })
}

const BOSON: &str = "particle b statistics=boson species=0\n";
const FERMIONS: &str = "particle f statistics=fermion species=1\nparticle fbar statistics=antifermion species=2\n";

fn body(name: &str) -> String {
    match name {
        "free-boson-lf" => format!("{}interaction free: out(b:n) in(b:n2) coeff = m_B^2/n\n", BOSON),
        "free-fermion-lf" => format!(
            "{}interaction free_f: out(f:n) in(f:n2) coeff = m_F^2/n\n\
             interaction free_fbar: out(fbar:n) in(fbar:n2) coeff = m_F^2/n\n",
            FERMIONS
        ),
        "free-boson-et" => format!("{}interaction free: out(b:n) in(b:n2) coeff = 1/omega(n)\n", BOSON),
        "free-fermion-et" => format!(
            "{}interaction free_f: out(f:n) in(f:n2) coeff = 1/omega(n)\n\
             interaction free_fbar: out(fbar:n) in(fbar:n2) coeff = 1/omega(n)\n",
            FERMIONS
        ),
        "phi4-lf" => format!(
            "{}interaction free: out(b:n) in(b:n2) coeff = (m^2 + lambda/(8*pi)*sum(q: 1/q))/n\n\
             interaction scatter: out(b:k, b:l) in(b:p, b:n) coeff = lambda/(16*pi*sqrt(k*l*p*n))\n\
             interaction split: out(b:k, b:l, b:p) in(b:n) coeff = lambda/(24*pi*sqrt(k*l*p*n))\n\
             interaction merge: out(b:n) in(b:k, b:l, b:p) coeff = lambda/(24*pi*sqrt(k*l*p*n))\n",
            BOSON
        ),
        "phi4-et" => {
            let base = "sqrt(16*omega(k)*omega(l)*omega(f)*omega(p))";
            format!(
                "{b}interaction free: out(b:n) in(b:n2) coeff = 1/omega(n)\n\
                 interaction create4: out(b:k, b:l, b:f, b:p) in() coeff = lambda/24/{x}\n\
                 interaction annihilate4: out() in(b:k, b:l, b:f, b:p) coeff = lambda/24/{x}\n\
                 interaction split: out(b:k, b:l, b:f) in(b:p) coeff = lambda/24*4/{x}\n\
                 interaction merge: out(b:p) in(b:k, b:l, b:f) coeff = lambda/24*4/{x}\n\
                 interaction scatter: out(b:l, b:f) in(b:p, b:k) coeff = lambda/24*6/{x}\n\
                 interaction create2: out(b:k, b:l) in() coeff = lambda/24*sum(f: 6/sqrt(16*omega(f)*omega(f)*omega(k)*omega(l)))\n\
                 interaction annihilate2: out() in(b:k, b:l) coeff = lambda/24*sum(f: 6/sqrt(16*omega(f)*omega(f)*omega(k)*omega(l)))\n",
                b = BOSON,
                x = base
            )
        }
        "yukawa-lf" => format!(
            "{b}{f}\
             interaction v1: out(f:k, b:l) in(f:m1) coeff = 2*g*m_F/((k + l)*sqrt(l))\n\
             interaction v2: out(f:m1) in(f:k, b:l) coeff = 2*g*m_F/((k + l)*sqrt(l))\n\
             interaction v3: out(fbar:k, b:l) in(fbar:m1) coeff = 2*g*m_F/((k + l)*sqrt(l))\n\
             interaction v4: out(fbar:m1) in(fbar:k, b:l) coeff = 2*g*m_F/((k + l)*sqrt(l))\n\
             interaction v5: out(b:m1) in(f:k, fbar:l) coeff = 2*g*m_F/((k - m1)*sqrt(m1))\n\
             interaction v6: out(f:k, fbar:l) in(b:m1) coeff = 2*g*m_F/((k - m1)*sqrt(m1))\n\
             interaction s1: out(b:m1, b:n) in(fbar:k, f:l) coeff = g^2/((m1 - k)*sqrt(m1*n))\n\
             interaction s2: out(fbar:k, f:l) in(b:m1, b:n) coeff = g^2/((m1 - k)*sqrt(m1*n))\n\
             interaction s3: out(f:k, b:m1) in(f:l, b:n) coeff = 2*g^2/((k - n)*sqrt(m1*n))\n\
             interaction s4: out(fbar:k, b:m1) in(fbar:l, b:n) coeff = 2*g^2/((k - n)*sqrt(m1*n))\n\
             interaction f1: out(f:k, b:l, b:m1) in(f:n) coeff = g^2/((k + l)*sqrt(l*m1))\n\
             interaction f2: out(f:n) in(f:k, b:l, b:m1) coeff = g^2/((k + l)*sqrt(l*m1))\n\
             interaction f3: out(fbar:k, b:l, b:m1) in(fbar:n) coeff = g^2/((k + l)*sqrt(l*m1))\n\
             interaction f4: out(fbar:n) in(fbar:k, b:l, b:m1) coeff = g^2/((k + l)*sqrt(l*m1))\n\
             interaction f5: out(f:k, fbar:m1, b:l) in(b:n) coeff = 2*g^2/((k - n)*sqrt(l*n))\n\
             interaction f6: out(b:n) in(f:k, fbar:m1, b:l) coeff = 2*g^2/((k - n)*sqrt(l*n))\n",
            b = BOSON,
            f = FERMIONS
        ),
        "yukawa-et" => {
            let w = "g/sqrt(8*omega(k, m_F)*omega(p, m_B)*omega(l, m_F))";
            format!(
                "{b}{f}\
                 interaction ff_absorb: out(f:l) in(f:k, b:p) coeff = {w}*ubar_u(l, k)\n\
                 interaction ff_emit: out(f:l, b:p) in(f:k) coeff = {w}*ubar_u(l, k)\n\
                 interaction pair_absorb: out(f:l, fbar:k) in(b:p) coeff = {w}*ubar_v(l, k)\n\
                 interaction pair_emit: out(b:p) in(fbar:l, f:k) coeff = {w}*vbar_u(l, k)\n\
                 interaction triple_annihilate: out() in(fbar:l, f:k, b:p) coeff = {w}*vbar_u(l, k)\n\
                 interaction triple_create: out(f:l, fbar:k, b:p) in() coeff = {w}*ubar_v(l, k)\n\
                 interaction aa_absorb: out(fbar:k) in(fbar:l, b:p) coeff = -{w}*vbar_v(l, k)\n\
                 interaction aa_emit: out(fbar:k, b:p) in(fbar:l) coeff = -{w}*vbar_v(l, k)\n",
                b = BOSON,
                f = FERMIONS,
                w = w
            )
        }
        "number-operator" => format!("{}interaction number: out(b:n) in(b:n2) coeff = 1\n", BOSON),
        "boson-fusion" => format!("{}interaction fuse: out(b:p) in(b:n1, b:n2) coeff = 1\n", BOSON),
        "boson-fermion-scattering" => format!(
            "{}particle f statistics=fermion species=1\n\
             interaction bf: out(b:k, f:l) in(b:p, f:n) coeff = 1\n",
            BOSON
        ),
        _ => unreachable!(),
    }
}

fn cutoffs_line(c: &Cutoffs) -> String {
    let q = match c.quantization {
        Quantization::LightFront => "light_front",
        Quantization::EqualTime => "equal_time",
    };
    let dims: Vec<String> = c.per_dim.iter().map(|(lo, hi)| format!("({},{})", lo, hi)).collect();
    format!("cutoffs {} per_dim={} W={} I={}\n", q, dims.join(";"), c.occupancy_cap, c.register_count)
}

/// Model text for a builtin.
pub fn builtin_text(name: &str, cutoffs: Option<&Cutoffs>, params: &BTreeMap<String, f64>) -> Result<String> {
    let (names, quant) = defaults(name).ok_or_else(|| Error::UnknownBuiltin(name.to_string()))?;
    for key in params.keys() {
        if !names.contains(&key.as_str()) {
            return Err(Error::Invalid(format!("model `{}` has no parameter `{}`", name, key)));
        }
    }
    let default_cut = match quant {
        Quantization::LightFront => Cutoffs::light_front(4),
        Quantization::EqualTime => Cutoffs::equal_time_for(4),
    };
    let cut = cutoffs.cloned().unwrap_or(default_cut);
    if cut.quantization != quant {
        return Err(Error::InvalidCutoffs(format!("model `{}` needs {:?} cutoffs", name, quant)));
    }
    let mut text = format!("model {}\n", name);
    for p in names {
        text.push_str(&format!("param {} = {}\n", p, params.get(*p).copied().unwrap_or(1.0)));
    }
    text.push_str(&cutoffs_line(&cut));
    text.push_str(&body(name));
    Ok(text)
}

pub fn builtin_with(name: &str, cutoffs: Option<&Cutoffs>, params: &BTreeMap<String, f64>) -> Result<ModelSpec> {
    let text = builtin_text(name, cutoffs, params)?;
    Ok(parse_model(&text)?)
}

/// A builtin with default parameters (all 1) and cutoffs at resolution 4.
pub fn builtin(name: &str) -> Result<ModelSpec> {
    builtin_with(name, None, &BTreeMap::new())
}
