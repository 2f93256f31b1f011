use std::collections::BTreeMap;

use fockforge::fock::Momentum;
use fockforge::model::*;
use fockforge::{ParseErrorKind, Pos};

const HEAD: &str = "model t\nparam lambda = 1\ncutoffs light_front per_dim=(1,4) W=4 I=3\nparticle b statistics=boson species=0\n";

fn with(line: &str) -> String {
    format!("{}{}\n", HEAD, line)
}

fn m(v: i64) -> Momentum {
    Momentum::scalar(v)
}

#[test]
fn print_parse_round_trip_on_builtins() {
    for name in builtin_names() {
        let spec = builtin(name).unwrap();
        let text = print_model(&spec);
        let again = parse_model(&text).unwrap_or_else(|e| panic!("{}: {}\n{}", name, e, text));
        assert_eq!(again, spec, "{}", name);
        assert_eq!(print_model(&again), text, "{}", name);
    }
}

#[test]
fn three_leg_interaction_counts() {
    let spec = parse_model(&with("interaction fuse: out(b:n) in(b:k, b:l) coeff = lambda/(16*pi*sqrt(k*l*n))")).unwrap();
    let x = &spec.interactions[0];
    assert_eq!((x.f(), x.g(), x.n_in()), (3, 1, 2));
}

#[test]
fn coefficient_examples() {
    let phi4 = builtin("phi4-lf").unwrap();
    let ix = phi4.interactions.iter().position(|x| x.name == "scatter").unwrap();
    let v = phi4.beta(ix, &[m(1), m(1)], &[m(1), m(1)]).unwrap();
    assert!((v - 1.0 / (16.0 * std::f64::consts::PI)).abs() < 1e-15);
    assert!((v - 0.0198944).abs() < 1e-7);

    let free = builtin("free-boson-lf").unwrap();
    assert!((free.beta(0, &[m(2)], &[m(2)]).unwrap() - 0.5).abs() < 1e-15);

    let mut params = BTreeMap::new();
    params.insert("m".to_string(), 0.0);
    let et = builtin_with("free-boson-et", None, &params).unwrap();
    assert_eq!(et.beta(0, &[m(0)], &[m(0)]).unwrap(), 0.0);
    assert!(matches!(et.coefficient(0, &[m(0)], &[m(0)]), Err(fockforge::Error::Pole(_))));
}

#[test]
fn builtin_interaction_lists() {
    let free = builtin("free-boson-lf").unwrap();
    assert_eq!(free.interactions.len(), 1);
    assert_eq!((free.interactions[0].g(), free.interactions[0].n_in()), (1, 1));

    let phi4 = builtin("phi4-lf").unwrap();
    let mut shapes: Vec<(usize, usize)> = phi4.interactions.iter().map(|x| (x.g(), x.n_in())).collect();
    shapes.sort();
    assert_eq!(shapes, vec![(1, 1), (1, 3), (2, 2), (3, 1)]);

    let yk = builtin("yukawa-lf").unwrap();
    let count = |p: &str| yk.interactions.iter().filter(|x| x.name.starts_with(p)).count();
    assert_eq!((count("v"), count("s"), count("f")), (6, 4, 6));
}

#[test]
fn builtins_are_hermitian_closed() {
    for name in builtin_names() {
        let spec = builtin(name).unwrap();
        let warnings = spec.hermitian_closure_warnings();
        if *name == "boson-fusion" {
            assert!(!warnings.is_empty());
        } else {
            assert!(warnings.is_empty(), "{}: {:?}", name, warnings);
        }
    }
}

#[test]
fn one_sided_model_parses_with_warning() {
    let (_, warnings) = parse_model_with_warnings(&with("interaction fuse: out(b:n) in(b:k, b:l) coeff = 1")).unwrap();
    assert_eq!(warnings.len(), 1);
}

#[test]
fn unknown_builtin() {
    assert!(matches!(builtin("phi5-lf"), Err(fockforge::Error::UnknownBuiltin(_))));
}

#[test]
fn coefficient_evaluation_is_deterministic() {
    let yk = builtin("yukawa-et").unwrap();
    let ix = 0;
    let legs_out: Vec<Momentum> = yk.interactions[ix].outgoing.iter().map(|_| m(1)).collect();
    let legs_in: Vec<Momentum> = yk.interactions[ix].incoming.iter().map(|_| m(1)).collect();
    let a = yk.beta(ix, &legs_out, &legs_in);
    let b = yk.beta(ix, &legs_out, &legs_in);
    assert_eq!(a, b);
}

#[test]
fn expression_precedence_and_sums() {
    let spec = parse_model(&with("interaction e: out(b:n) in(b:p) coeff = 2 + 3*4^2/8 - sum(q: q)")).unwrap();
    // sum over the light-front axis 1..=4
    let v = spec.beta(0, &[m(1)], &[m(1)]).unwrap();
    assert!((v - (2.0 + 6.0 - 10.0)).abs() < 1e-12);
    let spec = parse_model(&with("interaction e: out(b:n) in(b:p) coeff = 8/2/2 - -1")).unwrap();
    assert!((spec.beta(0, &[m(1)], &[m(1)]).unwrap() - 3.0).abs() < 1e-12);
}

/// `(source, kind, line, needle)`: the error must point at the first
/// occurrence of `needle` on that line.
fn malformed() -> Vec<(String, ParseErrorKind, usize, &'static str)> {
    use ParseErrorKind::*;
    vec![
        (with("interaction a: out(b:n) in(b:p) coeff = zeta*n"), UnboundSymbol, 5, "zeta"),
        (with("interaction a: out(b:n) in(b:p) coeff = n $ p"), Lexical, 5, "$"),
        (with("interaction a: out(b:n) in(b:p) coeff = (n + p"), Syntax, 5, "\n"),
        (with("interaction a: out(b:n) in(b:p) coeff = n +"), Syntax, 5, "\n"),
        (with("interaction a: out(c:n) in(b:p) coeff = 1"), UnboundSymbol, 5, "c:"),
        (with("interaction a: out(b:n, b:n) in(b:p) coeff = 1"), Semantic, 5, "n)"),
        (with("interaction a: out(b:lambda) in(b:p) coeff = 1"), Semantic, 5, "lambda"),
        (with("interaction a: out(b:n) in(b:p) coeff = sqrt(n, p)"), Syntax, 5, "sqrt"),
        (with("interaction a: out() in() coeff = 1"), Semantic, 5, "a:"),
        (with("interaction a out(b:n) in(b:p) coeff = 1"), Syntax, 5, "out"),
        (with("interaction a: out(b:n) in(b:p) coef = 1"), Syntax, 5, "coef"),
        (with("interaction a: out(b:n) in(b:p) coeff = 1\ninteraction a: out(b:n) in(b:p) coeff = 1"), Semantic, 6, "a:"),
        (with("frobnicate x"), Syntax, 5, "frobnicate"),
        (with("particle b statistics=boson species=1"), Semantic, 5, "b "),
        (with("particle c statistics=anyon species=1"), Syntax, 5, "anyon"),
        (with("param lambda = 2"), Semantic, 5, "lambda"),
        (with("param mu = x"), Syntax, 5, "x"),
        (with("cutoffs light_front per_dim=(1,4) W=4 I=3"), Semantic, 5, "cutoffs"),
        (format!("{}model u\n", HEAD), Semantic, 5, "model"),
        ("param lambda = 1\n".to_string(), Syntax, 1, "\n"),
        (with("interaction a: out(b:n) in(b:p) coeff = 1 2"), Syntax, 5, "2"),
        (with("interaction a: out(b:n) in(b:p) coeff = 1.2.3"), Lexical, 5, "1.2.3"),
    ]
}

#[test]
fn malformed_inputs_report_positions() {
    let cases = malformed();
    assert!(cases.len() >= 20);
    for (src, kind, line, needle) in cases {
        let text = src.lines().nth(line - 1).unwrap_or("");
        let col = format!("{}\n", text).find(needle).unwrap_or_else(|| panic!("needle {:?} not on line {}", needle, line)) + 1;
        let e = parse_model(&src).expect_err(&src);
        assert_eq!((e.kind, e.pos), (kind, Pos { line, col }), "{}\n{}", e, src);
        let shown = e.to_string();
        assert!(shown.starts_with(&format!("{}:{}", line, col)), "{}", shown);
    }
}
