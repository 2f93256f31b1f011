//! Coefficient expressions: tree, evaluation and printing.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fock::Cutoffs;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Named two-argument spinor contractions; the default binding is 1.
pub const SPINOR_FUNCTIONS: [&str; 4] = ["ubar_u", "ubar_v", "vbar_u", "vbar_v"];

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    Param(String),
    Leg(String),
    Dummy(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Sqrt(Box<Expr>),
    /// `ω(x) = √(m² + x²)`; the mass defaults to parameter `m`.
    Omega(Box<Expr>, Option<Box<Expr>>),
    Spinor(String, Box<Expr>, Box<Expr>),
    /// Bounded sum of `body` with `var` running over the axis-1 cutoff range.
    Sum(String, Box<Expr>),
}

/// Pluggable values for the spinor contractions.
#[derive(Clone, Default)]
pub enum SpinorBinding {
    #[default]
    Unit,
    Custom(Arc<dyn Fn(&str, f64, f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for SpinorBinding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpinorBinding::Unit => write!(f, "Unit"),
            SpinorBinding::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl PartialEq for SpinorBinding {
    fn eq(&self, other: &Self) -> bool {
        matches!((self, other), (SpinorBinding::Unit, SpinorBinding::Unit))
    }
}

impl SpinorBinding {
    pub fn value(&self, name: &str, a: f64, b: f64) -> f64 {
        match self {
            SpinorBinding::Unit => 1.0,
            SpinorBinding::Custom(f) => f(name, a, b),
        }
    }
}

pub struct EvalEnv<'a> {
    pub params: &'a BTreeMap<String, f64>,
    pub legs: &'a [(&'a str, f64)],
    pub cutoffs: &'a Cutoffs,
    pub spinors: &'a SpinorBinding,
}

fn lookup<'a>(pairs: &'a [(&'a str, f64)], name: &str) -> Option<f64> {
    pairs.iter().rev().find(|(n, _)| *n == name).map(|(_, v)| *v)
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn eval(&self, env: &EvalEnv) -> Result<f64> {
        let mut dummies: Vec<(&str, f64)> = Vec::new();
        self.eval_in(env, &mut dummies)
    }

    fn eval_in<'s>(&'s self, env: &EvalEnv, dummies: &mut Vec<(&'s str, f64)>) -> Result<f64> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Pi => std::f64::consts::PI,
            Expr::Param(p) => *env.params.get(p).ok_or_else(|| Error::Invalid(format!("parameter `{}` has no value", p)))?,
            Expr::Leg(s) => lookup(env.legs, s).ok_or_else(|| Error::Invalid(format!("leg `{}` is unbound", s)))?,
            Expr::Dummy(s) => lookup(dummies, s).ok_or_else(|| Error::Invalid(format!("dummy `{}` is unbound", s)))?,
            Expr::Neg(e) => -e.eval_in(env, dummies)?,
            Expr::Bin(op, a, b) => {
                let x = a.eval_in(env, dummies)?;
                let y = b.eval_in(env, dummies)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(Error::Pole(format!("division by zero in {}", self)));
                        }
                        x / y
                    }
                }
            }
            Expr::Pow(e, k) => {
                let x = e.eval_in(env, dummies)?;
                if *k < 0 && x == 0.0 {
                    return Err(Error::Pole(format!("zero to a negative power in {}", self)));
                }
                x.powi(*k)
            }
            Expr::Sqrt(e) => {
                let x = e.eval_in(env, dummies)?;
                if x < 0.0 {
                    return Err(Error::Domain(format!("square root of {} in {}", x, self)));
                }
                x.sqrt()
            }
            Expr::Omega(e, mass) => {
                let x = e.eval_in(env, dummies)?;
                let m = match mass {
                    Some(m) => m.eval_in(env, dummies)?,
                    None => *env.params.get("m").ok_or_else(|| Error::Invalid("omega needs parameter `m`".into()))?,
                };
                (m * m + x * x).sqrt()
            }
            Expr::Spinor(name, a, b) => {
                let x = a.eval_in(env, dummies)?;
                let y = b.eval_in(env, dummies)?;
                env.spinors.value(name, x, y)
            }
            Expr::Sum(var, body) => {
                let (lo, hi) = env.cutoffs.per_dim[0];
                let mut acc = 0.0;
                for q in lo..=hi {
                    dummies.push((var.as_str(), q as f64));
                    let v = body.eval_in(env, dummies);
                    dummies.pop();
                    acc += v?;
                }
                acc
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(op, _, _) => op.precedence(),
            Expr::Neg(_) => 3,
            Expr::Pow(_, _) => 4,
            _ => 5,
        }
    }

    fn write_to(&self, out: &mut String) {
        match self {
            Expr::Num(v) => {
                let _ = write!(out, "{}", v);
            }
            Expr::Pi => out.push_str("pi"),
            Expr::Param(s) | Expr::Leg(s) | Expr::Dummy(s) => out.push_str(s),
            Expr::Neg(e) => {
                out.push('-');
                wrap(out, e, e.precedence() < 3);
            }
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                wrap(out, a, a.precedence() < p);
                let _ = write!(out, " {} ", op.symbol());
                wrap(out, b, b.precedence() <= p);
            }
            Expr::Pow(e, k) => {
                wrap(out, e, e.precedence() < 5);
                let _ = write!(out, "^{}", k);
            }
            Expr::Sqrt(e) => {
                out.push_str("sqrt(");
                e.write_to(out);
                out.push(')');
            }
            Expr::Omega(e, m) => {
                out.push_str("omega(");
                e.write_to(out);
                if let Some(m) = m {
                    out.push_str(", ");
                    m.write_to(out);
                }
                out.push(')');
            }
            Expr::Spinor(name, a, b) => {
                out.push_str(name);
                out.push('(');
                a.write_to(out);
                out.push_str(", ");
                b.write_to(out);
                out.push(')');
            }
            Expr::Sum(var, body) => {
                let _ = write!(out, "sum({}: ", var);
                body.write_to(out);
                out.push(')');
            }
        }
    }
}

fn wrap(out: &mut String, e: &Expr, paren: bool) {
    if paren {
        out.push('(');
        e.write_to(out);
        out.push(')');
    } else {
        e.write_to(out);
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = String::new();
        self.write_to(&mut s);
        f.write_str(&s)
    }
}
