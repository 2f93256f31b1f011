//! Line-oriented reader for the model language.

use std::collections::BTreeMap;

use crate::error::{ParseError, ParseErrorKind, Pos};
use crate::fock::{Cutoffs, ParticleType, Quantization, Statistics};

use super::expr::{BinOp, Expr, SPINOR_FUNCTIONS};
use super::{Interaction, Leg, ModelSpec, ParticleDecl};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: Pos,
}

fn err(kind: ParseErrorKind, pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError { kind, pos, message: message.into() }
}

fn lex(line: &str, line_no: usize, start_col: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line: line_no, col: start_col + i };
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let begin = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[begin..i].iter().collect();
            let v: f64 = text.parse().map_err(|_| err(ParseErrorKind::Lexical, pos, format!("malformed number `{}`", text)))?;
            out.push(Token { tok: Tok::Num(v), pos });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let begin = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[begin..i].iter().collect()), pos });
        } else if "()+-*/^,:=;[]".contains(c) {
            out.push(Token { tok: Tok::Sym(c), pos });
            i += 1;
        } else {
            return Err(err(ParseErrorKind::Lexical, pos, format!("unexpected character `{}`", c)));
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Token],
    at: usize,
    end: Pos,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.at)
    }

    fn pos(&self) -> Pos {
        self.peek().map(|t| t.pos).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.at);
        self.at += 1;
        t
    }

    fn is_sym(&self, c: char) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Sym(s), .. }) if *s == c)
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        if self.is_sym(c) {
            self.at += 1;
            Ok(())
        } else {
            Err(err(ParseErrorKind::Syntax, self.pos(), format!("expected `{}`", c)))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(s), pos }) => {
                self.at += 1;
                Ok((s.clone(), *pos))
            }
            _ => Err(err(ParseErrorKind::Syntax, self.pos(), format!("expected {}", what))),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let pos = self.pos();
        let (s, _) = self.expect_ident(&format!("`{}`", kw))?;
        if s == kw {
            Ok(())
        } else {
            Err(err(ParseErrorKind::Syntax, pos, format!("expected `{}`, found `{}`", kw, s)))
        }
    }

    fn expect_int(&mut self) -> Result<i64, ParseError> {
        let neg = if self.is_sym('-') {
            self.at += 1;
            true
        } else {
            false
        };
        match self.peek() {
            Some(Token { tok: Tok::Num(v), pos }) => {
                if v.fract() != 0.0 {
                    return Err(err(ParseErrorKind::Syntax, *pos, "expected an integer"));
                }
                self.at += 1;
                Ok(if neg { -(*v as i64) } else { *v as i64 })
            }
            _ => Err(err(ParseErrorKind::Syntax, self.pos(), "expected an integer")),
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(err(ParseErrorKind::Syntax, t.pos, "unexpected trailing input")),
        }
    }
}

struct Scope<'a> {
    params: &'a BTreeMap<String, f64>,
    legs: &'a [String],
    dummies: Vec<String>,
}

fn parse_expr(c: &mut Cursor, sc: &mut Scope) -> Result<Expr, ParseError> {
    let mut lhs = parse_term(c, sc)?;
    loop {
        let op = if c.is_sym('+') {
            BinOp::Add
        } else if c.is_sym('-') {
            BinOp::Sub
        } else {
            return Ok(lhs);
        };
        c.at += 1;
        let rhs = parse_term(c, sc)?;
        lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
    }
}

fn parse_term(c: &mut Cursor, sc: &mut Scope) -> Result<Expr, ParseError> {
    let mut lhs = parse_unary(c, sc)?;
    loop {
        let op = if c.is_sym('*') {
            BinOp::Mul
        } else if c.is_sym('/') {
            BinOp::Div
        } else {
            return Ok(lhs);
        };
        c.at += 1;
        let rhs = parse_unary(c, sc)?;
        lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
    }
}

fn parse_unary(c: &mut Cursor, sc: &mut Scope) -> Result<Expr, ParseError> {
    if c.is_sym('-') {
        c.at += 1;
        return Ok(Expr::Neg(Box::new(parse_unary(c, sc)?)));
    }
    let base = parse_atom(c, sc)?;
    if c.is_sym('^') {
        c.at += 1;
        let k = c.expect_int()?;
        return Ok(Expr::Pow(Box::new(base), k as i32));
    }
    Ok(base)
}

fn parse_args(c: &mut Cursor, sc: &mut Scope, name: &str, min: usize, max: usize, pos: Pos) -> Result<Vec<Expr>, ParseError> {
    c.expect_sym('(')?;
    let mut args = vec![parse_expr(c, sc)?];
    while c.is_sym(',') {
        c.at += 1;
        args.push(parse_expr(c, sc)?);
    }
    c.expect_sym(')')?;
    if args.len() < min || args.len() > max {
        return Err(err(ParseErrorKind::Syntax, pos, format!("`{}` takes {} to {} arguments, found {}", name, min, max, args.len())));
    }
    Ok(args)
}

fn parse_atom(c: &mut Cursor, sc: &mut Scope) -> Result<Expr, ParseError> {
    let pos = c.pos();
    match c.next().map(|t| t.tok.clone()) {
        Some(Tok::Num(v)) => Ok(Expr::Num(v)),
        Some(Tok::Sym('(')) => {
            let e = parse_expr(c, sc)?;
            c.expect_sym(')')?;
            Ok(e)
        }
        Some(Tok::Ident(name)) => match name.as_str() {
            "pi" => Ok(Expr::Pi),
            "sqrt" => {
                let mut a = parse_args(c, sc, "sqrt", 1, 1, pos)?;
                Ok(Expr::Sqrt(Box::new(a.remove(0))))
            }
            "omega" => {
                let mut a = parse_args(c, sc, "omega", 1, 2, pos)?;
                let x = a.remove(0);
                let mass = a.pop().map(Box::new);
                if mass.is_none() && !sc.params.contains_key("m") {
                    return Err(err(ParseErrorKind::UnboundSymbol, pos, "omega(x) needs parameter `m`"));
                }
                Ok(Expr::Omega(Box::new(x), mass))
            }
            "sum" => {
                c.expect_sym('(')?;
                let (var, vpos) = c.expect_ident("a summation variable")?;
                if sc.legs.contains(&var) || sc.params.contains_key(&var) || sc.dummies.contains(&var) {
                    return Err(err(ParseErrorKind::Semantic, vpos, format!("summation variable `{}` shadows another symbol", var)));
                }
                c.expect_sym(':')?;
                sc.dummies.push(var.clone());
                let body = parse_expr(c, sc);
                sc.dummies.pop();
                let body = body?;
                c.expect_sym(')')?;
                Ok(Expr::Sum(var, Box::new(body)))
            }
            s if SPINOR_FUNCTIONS.contains(&s) => {
                let mut a = parse_args(c, sc, s, 2, 2, pos)?;
                let y = a.pop().unwrap();
                let x = a.pop().unwrap();
                Ok(Expr::Spinor(name.clone(), Box::new(x), Box::new(y)))
            }
            _ => {
                if sc.dummies.contains(&name) {
                    Ok(Expr::Dummy(name))
                } else if sc.legs.contains(&name) {
                    Ok(Expr::Leg(name))
                } else if sc.params.contains_key(&name) {
                    Ok(Expr::Param(name))
                } else {
                    Err(err(ParseErrorKind::UnboundSymbol, pos, format!("unbound symbol `{}`", name)))
                }
            }
        },
        Some(_) => Err(err(ParseErrorKind::Syntax, pos, "expected an operand")),
        None => Err(err(ParseErrorKind::Syntax, pos, "expected an operand, found end of line")),
    }
}

fn parse_real(c: &mut Cursor) -> Result<f64, ParseError> {
    let neg = if c.is_sym('-') {
        c.at += 1;
        true
    } else {
        false
    };
    match c.next() {
        Some(Token { tok: Tok::Num(v), .. }) => Ok(if neg { -v } else { *v }),
        _ => Err(err(ParseErrorKind::Syntax, c.toks.get(c.at - 1).map(|t| t.pos).unwrap_or(c.end), "expected a real number")),
    }
}

fn parse_legs(c: &mut Cursor, particles: &[ParticleDecl], seen: &mut Vec<String>, params: &BTreeMap<String, f64>) -> Result<Vec<Leg>, ParseError> {
    c.expect_sym('(')?;
    let mut legs = Vec::new();
    if c.is_sym(')') {
        c.at += 1;
        return Ok(legs);
    }
    loop {
        let (pname, ppos) = c.expect_ident("a particle name")?;
        let decl = particles
            .iter()
            .find(|d| d.name == pname)
            .ok_or_else(|| err(ParseErrorKind::UnboundSymbol, ppos, format!("unknown particle `{}`", pname)))?;
        c.expect_sym(':')?;
        let (sym, spos) = c.expect_ident("a momentum symbol")?;
        if seen.contains(&sym) {
            return Err(err(ParseErrorKind::Semantic, spos, format!("momentum symbol `{}` is used twice", sym)));
        }
        if params.contains_key(&sym) || sym == "pi" {
            return Err(err(ParseErrorKind::Semantic, spos, format!("momentum symbol `{}` shadows a parameter", sym)));
        }
        seen.push(sym.clone());
        legs.push(Leg { particle_name: pname, particle: decl.particle.clone(), symbol: sym });
        if c.is_sym(',') {
            c.at += 1;
        } else {
            break;
        }
    }
    c.expect_sym(')')?;
    Ok(legs)
}

fn parse_cutoffs(c: &mut Cursor) -> Result<Cutoffs, ParseError> {
    let qpos = c.pos();
    let (q, _) = c.expect_ident("`light_front` or `equal_time`")?;
    let quantization = match q.as_str() {
        "light_front" => Quantization::LightFront,
        "equal_time" => Quantization::EqualTime,
        _ => return Err(err(ParseErrorKind::Syntax, qpos, format!("unknown quantization `{}`", q))),
    };
    c.expect_keyword("per_dim")?;
    c.expect_sym('=')?;
    let mut per_dim = Vec::new();
    loop {
        c.expect_sym('(')?;
        let lo = c.expect_int()?;
        c.expect_sym(',')?;
        let hi = c.expect_int()?;
        c.expect_sym(')')?;
        per_dim.push((lo, hi));
        if c.is_sym(';') {
            c.at += 1;
        } else {
            break;
        }
    }
    c.expect_keyword("W")?;
    c.expect_sym('=')?;
    let wpos = c.pos();
    let w = c.expect_int()?;
    c.expect_keyword("I")?;
    c.expect_sym('=')?;
    let i = c.expect_int()?;
    let cut = Cutoffs { per_dim, occupancy_cap: w.max(0) as u32, register_count: i.max(0) as usize, quantization };
    cut.check().map_err(|e| err(ParseErrorKind::Semantic, wpos, e.to_string()))?;
    Ok(cut)
}

/// Parse model text; warnings (such as a missing Hermitian partner) are
/// returned alongside the model.
pub fn parse_model_with_warnings(text: &str) -> Result<(ModelSpec, Vec<String>), ParseError> {
    let mut name: Option<String> = None;
    let mut params: BTreeMap<String, f64> = BTreeMap::new();
    let mut particles: Vec<ParticleDecl> = Vec::new();
    let mut interactions: Vec<Interaction> = Vec::new();
    let mut cutoffs: Option<Cutoffs> = None;
    let mut last = Pos { line: 1, col: 1 };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed_start = content.len() - content.trim_start().len();
        let body = content.trim();
        last = Pos { line: line_no, col: raw.chars().count() + 1 };
        if body.is_empty() {
            continue;
        }
        let col0 = content[..trimmed_start].chars().count() + 1;
        let end = Pos { line: line_no, col: col0 + body.chars().count() };
        let head_pos = Pos { line: line_no, col: col0 };
        let keyword = body.split_whitespace().next().unwrap_or("");
        if keyword == "model" {
            if name.is_some() {
                return Err(err(ParseErrorKind::Semantic, head_pos, "duplicate `model` header"));
            }
            let rest = body["model".len()..].trim();
            let rest_col = col0 + body.chars().count() - rest.chars().count();
            if rest.is_empty() || !rest.chars().all(|ch| ch.is_ascii_alphanumeric() || "_-.".contains(ch)) {
                return Err(err(ParseErrorKind::Syntax, Pos { line: line_no, col: rest_col }, "expected a model name"));
            }
            name = Some(rest.to_string());
            continue;
        }
        let toks = lex(body, line_no, col0)?;
        let mut c = Cursor { toks: &toks, at: 1, end };
        match keyword {
            "param" => {
                let (pname, ppos) = c.expect_ident("a parameter name")?;
                if pname == "pi" || params.contains_key(&pname) {
                    return Err(err(ParseErrorKind::Semantic, ppos, format!("parameter `{}` is already defined", pname)));
                }
                c.expect_sym('=')?;
                let v = parse_real(&mut c)?;
                c.expect_end()?;
                params.insert(pname, v);
            }
            "particle" => {
                let (pname, ppos) = c.expect_ident("a particle name")?;
                if particles.iter().any(|d| d.name == pname) {
                    return Err(err(ParseErrorKind::Semantic, ppos, format!("particle `{}` is already defined", pname)));
                }
                c.expect_keyword("statistics")?;
                c.expect_sym('=')?;
                let spos = c.pos();
                let (st, _) = c.expect_ident("a statistics kind")?;
                let statistics = Statistics::parse(&st)
                    .ok_or_else(|| err(ParseErrorKind::Syntax, spos, format!("unknown statistics `{}`", st)))?;
                let mut species = particles.len() as i64;
                let mut qnums = Vec::new();
                while let Some(Token { tok: Tok::Ident(opt), pos }) = c.peek() {
                    c.at += 1;
                    c.expect_sym('=')?;
                    match opt.as_str() {
                        "species" => species = c.expect_int()?,
                        "qnums" => {
                            c.expect_sym('(')?;
                            if !c.is_sym(')') {
                                loop {
                                    qnums.push(c.expect_int()? as i32);
                                    if c.is_sym(',') {
                                        c.at += 1;
                                    } else {
                                        break;
                                    }
                                }
                            }
                            c.expect_sym(')')?;
                        }
                        _ => return Err(err(ParseErrorKind::Syntax, *pos, format!("unknown particle option `{}`", opt))),
                    }
                }
                c.expect_end()?;
                if !(0..=u16::MAX as i64).contains(&species) {
                    return Err(err(ParseErrorKind::Semantic, ppos, "species id out of range"));
                }
                let particle = ParticleType::new(species as u16, statistics).with_qnums(qnums);
                if let Some(other) = particles.iter().find(|d| d.particle == particle) {
                    return Err(err(ParseErrorKind::Semantic, ppos, format!("particle `{}` has the same label as `{}`", pname, other.name)));
                }
                if particles.iter().any(|d| d.particle.species_id == particle.species_id && d.particle.statistics != statistics) {
                    return Err(err(ParseErrorKind::Semantic, ppos, "one species cannot mix statistics"));
                }
                particles.push(ParticleDecl { name: pname, particle });
            }
            "cutoffs" => {
                if cutoffs.is_some() {
                    return Err(err(ParseErrorKind::Semantic, head_pos, "duplicate `cutoffs` line"));
                }
                let cut = parse_cutoffs(&mut c)?;
                c.expect_end()?;
                cutoffs = Some(cut);
            }
            "interaction" => {
                let (iname, ipos) = c.expect_ident("an interaction name")?;
                if interactions.iter().any(|x| x.name == iname) {
                    return Err(err(ParseErrorKind::Semantic, ipos, format!("interaction `{}` is already defined", iname)));
                }
                c.expect_sym(':')?;
                c.expect_keyword("out")?;
                let mut seen = Vec::new();
                let outgoing = parse_legs(&mut c, &particles, &mut seen, &params)?;
                c.expect_keyword("in")?;
                let incoming = parse_legs(&mut c, &particles, &mut seen, &params)?;
                if outgoing.is_empty() && incoming.is_empty() {
                    return Err(err(ParseErrorKind::Semantic, ipos, "an interaction needs at least one leg"));
                }
                c.expect_keyword("coeff")?;
                c.expect_sym('=')?;
                let mut scope = Scope { params: &params, legs: &seen, dummies: Vec::new() };
                let coeff = parse_expr(&mut c, &mut scope)?;
                c.expect_end()?;
                interactions.push(Interaction { name: iname, outgoing, incoming, coeff });
            }
            _ => return Err(err(ParseErrorKind::Syntax, head_pos, format!("unknown statement `{}`", keyword))),
        }
    }
    let name = name.ok_or_else(|| err(ParseErrorKind::Syntax, last, "missing `model` header"))?;
    let spec = ModelSpec {
        name,
        params,
        particles,
        interactions,
        cutoffs: cutoffs.unwrap_or_else(|| Cutoffs::light_front(4)),
        spinors: Default::default(),
    };
    let warnings = spec.hermitian_closure_warnings();
    Ok((spec, warnings))
}

pub fn parse_model(text: &str) -> Result<ModelSpec, ParseError> {
    parse_model_with_warnings(text).map(|(m, _)| m)
}

fn fmt_real(v: f64) -> String {
    format!("{}", v)
}

/// Canonical text form; parameters are printed in alphabetical order.
pub fn print_model(spec: &ModelSpec) -> String {
    let mut out = format!("model {}\n", spec.name);
    for (k, v) in &spec.params {
        out.push_str(&format!("param {} = {}\n", k, fmt_real(*v)));
    }
    for d in &spec.particles {
        out.push_str(&format!("particle {} statistics={} species={}", d.name, d.particle.statistics.as_str(), d.particle.species_id));
        if !d.particle.extra_qnums.is_empty() {
            let q: Vec<String> = d.particle.extra_qnums.iter().map(|x| x.to_string()).collect();
            out.push_str(&format!(" qnums=({})", q.join(",")));
        }
        out.push('\n');
    }
    let c = &spec.cutoffs;
    let q = match c.quantization {
        Quantization::LightFront => "light_front",
        Quantization::EqualTime => "equal_time",
    };
    let dims: Vec<String> = c.per_dim.iter().map(|(lo, hi)| format!("({},{})", lo, hi)).collect();
    out.push_str(&format!("cutoffs {} per_dim={} W={} I={}\n", q, dims.join(";"), c.occupancy_cap, c.register_count));
    for x in &spec.interactions {
        let legs = |ls: &[Leg]| ls.iter().map(|l| format!("{}:{}", l.particle_name, l.symbol)).collect::<Vec<_>>().join(", ");
        out.push_str(&format!("interaction {}: out({}) in({}) coeff = {}\n", x.name, legs(&x.outgoing), legs(&x.incoming), x.coeff));
    }
    out
}
