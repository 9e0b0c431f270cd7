//! A small arithmetic expression language used by curve, section and
//! profile specifications.
//!
//! Grammar (binding tightest first): `^` (right-associative), unary `-`,
//! `*` `/`, `+` `-`. Supported functions are `sin cos tan sqrt exp log atan`
//! and the constant `pi`. All arithmetic is binary64.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unbalanced parentheses at byte {offset}")]
    Unbalanced { offset: usize },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("undeclared variable `{name}` at byte {offset}")]
    UndeclaredVariable { name: String, offset: usize },
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("domain error: {op} of {arg}")]
    Domain { op: &'static str, arg: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sqrt,
    Exp,
    Log,
    Atan,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sqrt,
        Func::Exp,
        Func::Log,
        Func::Atan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Atan => "atan",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree. Literals produced by the parser are never negative;
/// a leading minus is always a [`Expr::Neg`] node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Pi,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Parse an expression, accepting any identifier as a variable.
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    Parser::new(text, None).parse_all()
}

/// Parse an expression, rejecting identifiers not in `vars`.
pub fn parse_with_vars(text: &str, vars: &[&str]) -> Result<Expr, ExprError> {
    Parser::new(text, Some(vars)).parse_all()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token<'a> {
    Num(f64),
    Ident(&'a str),
    Op(u8),
    LParen,
    RParen,
    End,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    tok: Token<'a>,
    tok_start: usize,
    vars: Option<&'a [&'a str]>,
    depth: usize,
}

const MAX_DEPTH: usize = 256;

impl<'a> Parser<'a> {
    fn new(src: &'a str, vars: Option<&'a [&'a str]>) -> Self {
        Parser {
            src,
            pos: 0,
            tok: Token::End,
            tok_start: 0,
            vars,
            depth: 0,
        }
    }

    fn syntax(&self, offset: usize, message: impl Into<String>) -> ExprError {
        ExprError::Syntax {
            offset,
            message: message.into(),
        }
    }

    fn advance(&mut self) -> Result<(), ExprError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        if self.pos >= bytes.len() {
            self.tok = Token::End;
            return Ok(());
        }
        let c = bytes[self.pos];
        self.tok = match c {
            b'0'..=b'9' | b'.' => {
                let start = self.pos;
                while self.pos < bytes.len()
                    && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.')
                {
                    self.pos += 1;
                }
                if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
                    let mut p = self.pos + 1;
                    if p < bytes.len() && (bytes[p] == b'+' || bytes[p] == b'-') {
                        p += 1;
                    }
                    if p < bytes.len() && bytes[p].is_ascii_digit() {
                        while p < bytes.len() && bytes[p].is_ascii_digit() {
                            p += 1;
                        }
                        self.pos = p;
                    }
                }
                let text = &self.src[start..self.pos];
                let value: f64 = text
                    .parse()
                    .map_err(|_| self.syntax(start, format!("malformed number `{text}`")))?;
                Token::Num(value)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = self.pos;
                while self.pos < bytes.len()
                    && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                Token::Ident(&self.src[start..self.pos])
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Token::Op(c)
            }
            b'(' => {
                self.pos += 1;
                Token::LParen
            }
            b')' => {
                self.pos += 1;
                Token::RParen
            }
            _ => {
                let ch = self.src[self.pos..].chars().next().unwrap_or('?');
                return Err(self.syntax(self.pos, format!("unexpected character `{ch}`")));
            }
        };
        Ok(())
    }

    fn parse_all(mut self) -> Result<Expr, ExprError> {
        if self.src.trim().is_empty() {
            return Err(self.syntax(0, "empty expression"));
        }
        self.advance()?;
        let expr = self.additive()?;
        match self.tok {
            Token::End => Ok(expr),
            Token::RParen => Err(ExprError::Unbalanced {
                offset: self.tok_start,
            }),
            _ => Err(self.syntax(self.tok_start, "unexpected trailing input")),
        }
    }

    fn enter(&mut self) -> Result<(), ExprError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.syntax(self.tok_start, "expression nested too deeply"));
        }
        Ok(())
    }

    fn additive(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.multiplicative()?;
        while let Token::Op(op @ (b'+' | b'-')) = self.tok {
            self.advance()?;
            let rhs = self.multiplicative()?;
            let op = if op == b'+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn multiplicative(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Token::Op(op @ (b'*' | b'/')) = self.tok {
            self.advance()?;
            let rhs = self.unary()?;
            let op = if op == b'*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.tok == Token::Op(b'-') {
            self.enter()?;
            self.advance()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.tok == Token::Op(b'^') {
            self.enter()?;
            self.advance()?;
            // the exponent may carry its own sign: 2^-1
            let exponent = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let start = self.tok_start;
        match self.tok {
            Token::Num(v) => {
                self.advance()?;
                Ok(Expr::Num(v))
            }
            Token::Ident(name) => {
                self.advance()?;
                if self.tok == Token::LParen {
                    let func = Func::from_name(name).ok_or_else(|| ExprError::UnknownFunction {
                        name: name.to_string(),
                        offset: start,
                    })?;
                    let arg = self.parenthesized()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                if name == "pi" {
                    return Ok(Expr::Pi);
                }
                if Func::from_name(name).is_some() {
                    return Err(
                        self.syntax(start, format!("function `{name}` needs an argument list"))
                    );
                }
                if let Some(vars) = self.vars {
                    if !vars.contains(&name) {
                        return Err(ExprError::UndeclaredVariable {
                            name: name.to_string(),
                            offset: start,
                        });
                    }
                }
                Ok(Expr::Var(name.to_string()))
            }
            Token::LParen => self.parenthesized(),
            Token::RParen => Err(ExprError::Unbalanced { offset: start }),
            Token::End => Err(self.syntax(start, "unexpected end of input")),
            Token::Op(c) => Err(self.syntax(start, format!("unexpected operator `{}`", c as char))),
        }
    }

    fn parenthesized(&mut self) -> Result<Expr, ExprError> {
        let open = self.tok_start;
        self.enter()?;
        self.advance()?;
        let inner = self.additive()?;
        if self.tok != Token::RParen {
            return Err(match self.tok {
                Token::End => ExprError::Unbalanced { offset: open },
                _ => self.syntax(self.tok_start, "expected `)`"),
            });
        }
        self.depth -= 1;
        self.advance()?;
        Ok(inner)
    }
}

/// Value paired with its derivative with respect to one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dual {
    v: f64,
    d: f64,
}

fn checked(op: &'static str, arg: f64, value: f64) -> Result<f64, ExprError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ExprError::Domain { op, arg })
    }
}

impl Expr {
    /// Evaluate with variables taken from `bindings`.
    pub fn eval(&self, bindings: &HashMap<String, f64>) -> Result<f64, ExprError> {
        self.eval_with(&|name| bindings.get(name).copied())
    }

    /// Evaluate with a single bound variable.
    pub fn eval_at(&self, var: &str, value: f64) -> Result<f64, ExprError> {
        self.eval_with(&|name| (name == var).then_some(value))
    }

    pub fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, ExprError> {
        Ok(self.eval_dual(lookup, None)?.v)
    }

    /// Value and exact derivative with respect to `var` (forward mode).
    pub fn eval_derivative(&self, var: &str, value: f64) -> Result<(f64, f64), ExprError> {
        let lookup = |name: &str| (name == var).then_some(value);
        let r = self.eval_dual(&lookup, Some(var))?;
        Ok((r.v, r.d))
    }

    fn eval_dual(
        &self,
        lookup: &dyn Fn(&str) -> Option<f64>,
        wrt: Option<&str>,
    ) -> Result<Dual, ExprError> {
        Ok(match self {
            Expr::Num(v) => Dual { v: *v, d: 0.0 },
            Expr::Pi => Dual {
                v: std::f64::consts::PI,
                d: 0.0,
            },
            Expr::Var(name) => {
                let v = lookup(name).ok_or_else(|| ExprError::Unbound(name.clone()))?;
                Dual {
                    v,
                    d: if wrt == Some(name.as_str()) { 1.0 } else { 0.0 },
                }
            }
            Expr::Neg(e) => {
                let a = e.eval_dual(lookup, wrt)?;
                Dual { v: -a.v, d: -a.d }
            }
            Expr::Binary(op, l, r) => {
                let a = l.eval_dual(lookup, wrt)?;
                let b = r.eval_dual(lookup, wrt)?;
                match op {
                    BinOp::Add => Dual {
                        v: checked("addition", a.v, a.v + b.v)?,
                        d: a.d + b.d,
                    },
                    BinOp::Sub => Dual {
                        v: checked("subtraction", a.v, a.v - b.v)?,
                        d: a.d - b.d,
                    },
                    BinOp::Mul => Dual {
                        v: checked("multiplication", a.v, a.v * b.v)?,
                        d: a.d * b.v + a.v * b.d,
                    },
                    BinOp::Div => {
                        if b.v == 0.0 {
                            return Err(ExprError::Domain {
                                op: "division",
                                arg: b.v,
                            });
                        }
                        let v = checked("division", a.v, a.v / b.v)?;
                        Dual {
                            v,
                            d: (a.d - v * b.d) / b.v,
                        }
                    }
                    BinOp::Pow => pow_dual(a, b)?,
                }
            }
            Expr::Call(func, arg) => {
                let a = arg.eval_dual(lookup, wrt)?;
                let x = a.v;
                match func {
                    Func::Sin => Dual {
                        v: x.sin(),
                        d: a.d * x.cos(),
                    },
                    Func::Cos => Dual {
                        v: x.cos(),
                        d: -a.d * x.sin(),
                    },
                    Func::Tan => {
                        let v = checked("tan", x, x.tan())?;
                        Dual {
                            v,
                            d: a.d * (1.0 + v * v),
                        }
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(ExprError::Domain { op: "sqrt", arg: x });
                        }
                        let v = x.sqrt();
                        // derivative of sqrt at 0 is only needed when the argument moves
                        let d = if a.d == 0.0 { 0.0 } else { a.d / (2.0 * v) };
                        Dual { v, d }
                    }
                    Func::Exp => {
                        let v = checked("exp", x, x.exp())?;
                        Dual { v, d: a.d * v }
                    }
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(ExprError::Domain { op: "log", arg: x });
                        }
                        Dual {
                            v: x.ln(),
                            d: a.d / x,
                        }
                    }
                    Func::Atan => Dual {
                        v: x.atan(),
                        d: a.d / (1.0 + x * x),
                    },
                }
            }
        })
    }

    /// Variables referenced by the expression, in first-occurrence order.
    pub fn variables(&self) -> Vec<&str> {
        fn walk<'e>(e: &'e Expr, out: &mut Vec<&'e str>) {
            match e {
                Expr::Var(n) => {
                    if !out.contains(&n.as_str()) {
                        out.push(n)
                    }
                }
                Expr::Neg(a) | Expr::Call(_, a) => walk(a, out),
                Expr::Binary(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Expr::Num(_) | Expr::Pi => {}
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

fn pow_dual(a: Dual, b: Dual) -> Result<Dual, ExprError> {
    let v = a.v.powf(b.v);
    if !v.is_finite() {
        return Err(ExprError::Domain {
            op: "power",
            arg: a.v,
        });
    }
    let mut d = 0.0;
    if a.d != 0.0 {
        d += b.v * a.v.powf(b.v - 1.0) * a.d;
    }
    if b.d != 0.0 {
        if a.v <= 0.0 {
            return Err(ExprError::Domain {
                op: "power with varying exponent",
                arg: a.v,
            });
        }
        d += v * a.v.ln() * b.d;
    }
    Ok(Dual { v, d })
}

/// Fully parenthesised form; parsing it back yields an identical tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(n) => f.write_str(n),
            Expr::Pi => f.write_str("pi"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => {
                let sym = match op {
                    BinOp::Add => '+',
                    BinOp::Sub => '-',
                    BinOp::Mul => '*',
                    BinOp::Div => '/',
                    BinOp::Pow => '^',
                };
                write!(f, "({l}{sym}{r})")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(text: &str) -> f64 {
        parse(text).unwrap().eval(&HashMap::new()).unwrap()
    }

    #[test]
    fn constants_and_functions() {
        assert_eq!(ev("2*pi"), 2.0 * std::f64::consts::PI);
        assert_eq!(ev("sin(pi/2)"), 1.0);
        assert_eq!(ev("tan(0)"), 0.0);
        assert_eq!(parse("3*phi^2").unwrap().eval_at("phi", 2.0).unwrap(), 12.0);
        assert_eq!(parse("t^2").unwrap().eval_at("t", 3.0).unwrap(), 9.0);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("2+3*4"), 14.0);
        assert_eq!(ev("2^3^2"), 512.0);
        assert_eq!(ev("-2^2"), -4.0);
        assert_eq!(ev("2^-1"), 0.5);
        assert_eq!(ev("10-4-3"), 3.0);
        assert_eq!(ev("8/4/2"), 1.0);
        assert_eq!(ev("(2+3)*4"), 20.0);
        assert_eq!(ev("1.5e2 + 2E-1"), 150.2);
    }

    #[test]
    fn domain_errors_are_reported() {
        let e = parse("sqrt(-1)")
            .unwrap()
            .eval(&HashMap::new())
            .unwrap_err();
        assert!(matches!(e, ExprError::Domain { op: "sqrt", .. }));
        assert!(matches!(
            parse("log(0)").unwrap().eval(&HashMap::new()),
            Err(ExprError::Domain { op: "log", .. })
        ));
        assert!(matches!(
            parse("1/0").unwrap().eval(&HashMap::new()),
            Err(ExprError::Domain { op: "division", .. })
        ));
        assert!(matches!(
            parse("(-8)^0.5").unwrap().eval(&HashMap::new()),
            Err(ExprError::Domain { .. })
        ));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse(""),
            Err(ExprError::Syntax { offset: 0, .. })
        ));
        assert!(matches!(
            parse("foo(1)"),
            Err(ExprError::UnknownFunction { offset: 0, .. })
        ));
        assert!(matches!(
            parse("(1+2"),
            Err(ExprError::Unbalanced { offset: 0 })
        ));
        assert!(matches!(
            parse("1+2)"),
            Err(ExprError::Unbalanced { offset: 3 })
        ));
        assert!(matches!(
            parse("1 + * 2"),
            Err(ExprError::Syntax { offset: 4, .. })
        ));
        assert!(matches!(
            parse("2 $ 3"),
            Err(ExprError::Syntax { offset: 2, .. })
        ));
        assert!(matches!(parse("sin"), Err(ExprError::Syntax { .. })));
        assert!(matches!(
            parse_with_vars("tau + x", &["tau"]),
            Err(ExprError::UndeclaredVariable { offset: 6, .. })
        ));
        assert!(parse_with_vars("cos(tau) + pi", &["tau"]).is_ok());
    }

    #[test]
    fn deep_nesting_is_rejected_not_overflowed() {
        let text = "(".repeat(10_000) + "1" + &")".repeat(10_000);
        assert!(parse(&text).is_err());
        let text = "-".repeat(10_000) + "1";
        assert!(parse(&text).is_err());
    }

    #[test]
    fn unbound_variable() {
        assert_eq!(
            parse("t+1").unwrap().eval(&HashMap::new()),
            Err(ExprError::Unbound("t".into()))
        );
    }

    #[test]
    fn forward_derivative_matches_closed_form() {
        let e = parse("sin(x)*x^2 + exp(2*x) - log(x) + atan(x) + sqrt(x) + tan(x)/x").unwrap();
        let x: f64 = 0.7;
        let (v, d) = e.eval_derivative("x", x).unwrap();
        let expected_v =
            x.sin() * x * x + (2.0 * x).exp() - x.ln() + x.atan() + x.sqrt() + x.tan() / x;
        let sec2 = 1.0 / (x.cos() * x.cos());
        let expected_d = x.cos() * x * x + 2.0 * x * x.sin() + 2.0 * (2.0 * x).exp() - 1.0 / x
            + 1.0 / (1.0 + x * x)
            + 0.5 / x.sqrt()
            + (sec2 * x - x.tan()) / (x * x);
        assert!((v - expected_v).abs() < 1e-13);
        assert!((d - expected_d).abs() < 1e-12, "{d} vs {expected_d}");
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..1e6).prop_map(Expr::Num),
            Just(Expr::Pi),
            prop_oneof![Just("x"), Just("tau"), Just("phi")].prop_map(|s| Expr::Var(s.to_string())),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow)
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, l, r)| Expr::Binary(
                        op,
                        Box::new(l),
                        Box::new(r)
                    )),
                (proptest::sample::select(Func::ALL.to_vec()), inner)
                    .prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn serialize_round_trip(e in arb_expr(), x in -3.0f64..3.0) {
            let text = e.to_string();
            let back = parse(&text).unwrap();
            prop_assert_eq!(&back, &e);
            let mut b = HashMap::new();
            b.insert("x".to_string(), x);
            b.insert("tau".to_string(), 0.5 * x);
            b.insert("phi".to_string(), x + 1.0);
            let lhs = e.eval(&b).map(f64::to_bits);
            let rhs = back.eval(&b).map(f64::to_bits);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn parser_never_panics(s in "\\PC{0,64}") {
            let _ = parse(&s);
        }
    }
}
