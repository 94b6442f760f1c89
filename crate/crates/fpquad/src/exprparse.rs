//! A small analytic-expression language for defining integrands `f(z)`
//! without recompiling.
//!
//! Grammar (EBNF, whitespace insignificant):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | power
//! power  := atom ("^" unary)?
//! atom   := number | "pi" | "e" | "z"
//!         | ("exp" | "log" | "sin" | "cos" | "sqrt") "(" expr ")"
//!         | "(" expr ")"
//! ```
//!
//! `^` binds tighter than unary minus and is right-associative; its exponent
//! must not contain `z` (so every branch choice stays explicit). `log` and
//! `sqrt` take principal branches; `^` with a non-integer exponent means
//! `exp(w·log z)` with the principal log. There is no implicit
//! multiplication: `2z` is an error, `2*z` is required.

use std::fmt;

use num_complex::Complex;

use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    E,
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Fun(Func, Box<Expr>),
}

impl Expr {
    pub fn contains_var(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Pi | Expr::E => false,
            Expr::Var => true,
            Expr::Neg(a) | Expr::Fun(_, a) => a.contains_var(),
            Expr::Bin(_, a, b) | Expr::Pow(a, b) => a.contains_var() || b.contains_var(),
        }
    }
}

/// Fully parenthesized printing; `parse(print(e))` is structurally identical
/// to `e` for any well-formed tree with nonnegative literals.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Pi => write!(f, "pi"),
            Expr::E => write!(f, "e"),
            Expr::Var => write!(f, "z"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
            Expr::Pow(a, b) => write!(f, "({a}^{b})"),
            Expr::Fun(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ParseError {
    /// Byte offset into the source.
    pub offset: usize,
    pub message: String,
    pub expected: Vec<&'static str>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at offset {}: {}", self.offset, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                toks.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                toks.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            b'/' => {
                toks.push((Tok::Slash, i));
                i += 1;
            }
            b'^' => {
                toks.push((Tok::Caret, i));
                i += 1;
            }
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent part, only when followed by digits
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    message: format!("invalid number literal '{text}'"),
                    expected: vec!["number"],
                })?;
                toks.push((Tok::Num(v), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(ParseError {
                    offset: i,
                    message: format!("unexpected byte 0x{b:02x}"),
                    expected: vec![],
                });
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(_, o)| *o)
            .unwrap_or(self.src_len)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn err(&self, message: impl Into<String>, expected: Vec<&'static str>) -> ParseError {
        ParseError {
            offset: self.offset(),
            message: message.into(),
            expected,
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            let caret_off = self.offset();
            self.bump();
            // right-associative; exponent may carry its own sign
            let exp = self.unary()?;
            if exp.contains_var() {
                return Err(ParseError {
                    offset: caret_off,
                    message: "exponent must be a constant (no z)".into(),
                    expected: vec!["constant exponent"],
                });
            }
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Some(Tok::Ident(name)) => {
                let off = self.offset();
                self.bump();
                match name.as_str() {
                    "z" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Pi),
                    "e" => Ok(Expr::E),
                    other => {
                        if let Some(func) = Func::from_name(other) {
                            if !matches!(self.peek(), Some(Tok::LParen)) {
                                return Err(self.err(
                                    format!("function '{other}' needs parentheses"),
                                    vec!["("],
                                ));
                            }
                            self.bump();
                            let arg = self.expr()?;
                            if !matches!(self.peek(), Some(Tok::RParen)) {
                                return Err(self.err("unbalanced parentheses", vec![")"]));
                            }
                            self.bump();
                            Ok(Expr::Fun(func, Box::new(arg)))
                        } else {
                            Err(ParseError {
                                offset: off,
                                message: format!("unknown identifier '{other}'"),
                                expected: vec!["z", "pi", "e", "exp", "log", "sin", "cos", "sqrt"],
                            })
                        }
                    }
                }
            }
            Some(Tok::LParen) => {
                self.bump();
                let inner = self.expr()?;
                if !matches!(self.peek(), Some(Tok::RParen)) {
                    return Err(self.err("unbalanced parentheses", vec![")"]));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.err(
                "expected an operand",
                vec!["number", "z", "pi", "e", "function", "("],
            )),
        }
    }
}

/// Parses a source string to an AST, or a diagnostic with byte offset.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    if src.is_empty() {
        return Err(ParseError {
            offset: 0,
            message: "empty expression".into(),
            expected: vec!["expression"],
        });
    }
    if src.len() > 64 * 1024 {
        return Err(ParseError {
            offset: 64 * 1024,
            message: "expression exceeds 64 KiB".into(),
            expected: vec![],
        });
    }
    let toks = lex(src)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        src_len: src.len(),
    };
    let e = p.expr()?;
    if p.pos != toks.len() {
        return Err(p.err("trailing input after expression", vec!["end of input"]));
    }
    Ok(e)
}

/// Evaluation failure: the value went non-finite at the named subexpression.
#[derive(Clone, Debug)]
pub struct EvalError {
    pub subexpr: String,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "non-finite result in subexpression {}", self.subexpr)
    }
}

impl std::error::Error for EvalError {}

fn finite_or<T: Scalar>(v: Complex<T>, node: &Expr) -> Result<Complex<T>, EvalError> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(EvalError {
            subexpr: node.to_string(),
        })
    }
}

/// Complex evaluation with principal branches for `log`, `sqrt` and
/// non-integer powers. Integer powers use repeated multiplication, so real
/// inputs with real subtrees stay exactly real.
pub fn eval_expr<T: Scalar>(e: &Expr, z: Complex<T>) -> Result<Complex<T>, EvalError> {
    let v = match e {
        Expr::Num(v) => Complex::new(T::c(*v), T::zero()),
        Expr::Pi => Complex::new(T::PI(), T::zero()),
        Expr::E => Complex::new(T::E(), T::zero()),
        Expr::Var => z,
        Expr::Neg(a) => -eval_expr(a, z)?,
        Expr::Bin(op, a, b) => {
            let va = eval_expr(a, z)?;
            let vb = eval_expr(b, z)?;
            match op {
                BinOp::Add => va + vb,
                BinOp::Sub => va - vb,
                BinOp::Mul => va * vb,
                BinOp::Div => va / vb,
            }
        }
        Expr::Pow(base, exp) => {
            let vb = eval_expr(base, z)?;
            let ve = eval_expr(exp, z)?;
            if ve.im.is_zero() && ve.re.fract().is_zero() && ve.re.abs() < T::c(2_147_483_647.0)
            {
                let k = ve.re.to_i32().unwrap();
                vb.powi(k)
            } else {
                (ve * vb.ln()).exp()
            }
        }
        Expr::Fun(func, a) => {
            let va = eval_expr(a, z)?;
            match func {
                Func::Exp => va.exp(),
                Func::Log => va.ln(),
                Func::Sin => va.sin(),
                Func::Cos => va.cos(),
                Func::Sqrt => va.sqrt(),
            }
        }
    };
    finite_or(v, e)
}

/// Heuristic probe: evaluates `e` at `n_probe` points of `[0,1]` and reports
/// whether the imaginary parts stay below `1e−13·(1+|value|)`. Not a proof.
pub fn real_on_interval_probe(e: &Expr, n_probe: usize) -> Result<bool, EvalError> {
    assert!(n_probe >= 8, "probe needs at least 8 points");
    for i in 0..n_probe {
        let x = i as f64 / (n_probe - 1) as f64;
        let v: Complex<f64> = eval_expr(e, Complex::new(x, 0.0))?;
        if v.im.abs() > 1e-13 * (1.0 + v.norm()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Numeric scan for candidate singularities of the expression inside a
/// rectangle: zeros of denominators, of negative-power bases and of `log` /
/// `sqrt` arguments, located by Newton iteration from grid seeds.
///
/// Conservative: a zero that cancels against the numerator (removable
/// singularity) is still reported.
pub fn potential_singularities(
    e: &Expr,
    re_range: (f64, f64),
    im_range: (f64, f64),
    grid: usize,
) -> Vec<Complex<f64>> {
    let mut targets: Vec<&Expr> = Vec::new();
    collect_zero_targets(e, &mut targets);
    let mut roots: Vec<Complex<f64>> = Vec::new();
    let pad = 1e-6;
    for target in targets {
        for gi in 0..grid {
            for gj in 0..grid {
                let re = re_range.0
                    + (re_range.1 - re_range.0) * (gi as f64 + 0.5) / grid as f64;
                let im = im_range.0
                    + (im_range.1 - im_range.0) * (gj as f64 + 0.5) / grid as f64;
                if let Some(mut root) = newton_zero(target, Complex::new(re, im)) {
                    // snap to the axes so reported locations read cleanly
                    if root.im.abs() < 1e-9 {
                        root.im = 0.0;
                    }
                    if root.re.abs() < 1e-9 {
                        root.re = 0.0;
                    }
                    let in_box = root.re >= re_range.0 - pad
                        && root.re <= re_range.1 + pad
                        && root.im >= im_range.0 - pad
                        && root.im <= im_range.1 + pad;
                    if in_box && !roots.iter().any(|r| (r - root).norm() < 1e-6) {
                        roots.push(root);
                    }
                }
            }
        }
    }
    roots
}

fn collect_zero_targets<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match e {
        Expr::Num(_) | Expr::Pi | Expr::E | Expr::Var => {}
        Expr::Neg(a) => collect_zero_targets(a, out),
        Expr::Bin(op, a, b) => {
            if *op == BinOp::Div && b.contains_var() {
                out.push(b);
            }
            collect_zero_targets(a, out);
            collect_zero_targets(b, out);
        }
        Expr::Pow(base, exp) => {
            // negative constant exponent: zeros of the base are poles
            if let Ok(v) = eval_expr::<f64>(exp, Complex::new(0.0, 0.0)) {
                if v.re < 0.0 && base.contains_var() {
                    out.push(base);
                }
            }
            collect_zero_targets(base, out);
        }
        Expr::Fun(func, a) => {
            if matches!(func, Func::Log | Func::Sqrt) && a.contains_var() {
                out.push(a);
            }
            collect_zero_targets(a, out);
        }
    }
}

fn newton_zero(e: &Expr, start: Complex<f64>) -> Option<Complex<f64>> {
    let h = 1e-7;
    let mut zc = start;
    for _ in 0..40 {
        let f0 = eval_expr(e, zc).ok()?;
        if f0.norm() < 1e-12 {
            return Some(zc);
        }
        let fp = eval_expr(e, zc + Complex::new(h, 0.0)).ok()?;
        let fm = eval_expr(e, zc - Complex::new(h, 0.0)).ok()?;
        let deriv = (fp - fm) / Complex::new(2.0 * h, 0.0);
        if deriv.norm() < 1e-14 {
            return None;
        }
        let step = f0 / deriv;
        zc -= step;
        if !zc.re.is_finite() || !zc.im.is_finite() {
            return None;
        }
        if step.norm() < 1e-13 {
            let check = eval_expr(e, zc).ok()?;
            if check.norm() < 1e-9 {
                return Some(zc);
            }
        }
    }
    None
}
