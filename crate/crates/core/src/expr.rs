//! A small expression language for nonlinearities, weights and radial
//! coefficients.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | constant | variable | func '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus and is right-associative, so
//! `-u^2 == -(u^2)` and `2^3^2 == 2^9`. Variables are `t`, `u`, `v` and `r`;
//! constants are `pi` and `e`; functions are `abs`, `sqrt`, `exp`, `log`
//! (one argument) and `min`, `max` (two arguments).
//!
//! Parsed expressions are compiled to a flat stack program, so evaluation in
//! quadrature and box-scan loops does not walk the tree.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} at byte {offset}{}", suggestion_text(.suggestions))]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
    pub suggestions: Vec<String>,
}

fn suggestion_text(s: &[String]) -> String {
    if s.is_empty() {
        String::new()
    } else {
        format!(" (did you mean: {})", s.join(", "))
    }
}

/// Evaluation failed at a specific operator, e.g. `sqrt` of a negative value.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error in `{op}` at byte {offset}: {detail}")]
pub struct EvalError {
    pub offset: usize,
    pub op: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    T,
    U,
    V,
    R,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::T, Var::U, Var::V, Var::R];

    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::U => "u",
            Var::V => "v",
            Var::R => "r",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
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
    Abs,
    Sqrt,
    Exp,
    Log,
    Min,
    Max,
}

impl Func {
    const ALL: [Func; 6] = [Func::Abs, Func::Sqrt, Func::Exp, Func::Log, Func::Min, Func::Max];

    fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Num(f64),
    Const(Constant),
    Var(Var),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// AST node. Equality ignores source offsets.
#[derive(Debug, Clone)]
pub struct Node {
    pub kind: ExprKind,
    pub offset: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        use ExprKind::*;
        match (&self.kind, &other.kind) {
            (Num(a), Num(b)) => a.to_bits() == b.to_bits(),
            (Const(a), Const(b)) => a == b,
            (Var(a), Var(b)) => a == b,
            (Neg(a), Neg(b)) => a == b,
            (Bin(o1, l1, r1), Bin(o2, l2, r2)) => o1 == o2 && l1 == l2 && r1 == r2,
            (Call(f1, a1), Call(f2, a2)) => f1 == f2 && a1 == a2,
            _ => false,
        }
    }
}

impl Node {
    fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            ExprKind::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            ExprKind::Neg(_) => 3,
            ExprKind::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }

    fn substitute(&self, var: Var, with: &Node) -> Node {
        let kind = match &self.kind {
            ExprKind::Var(v) if *v == var => return with.clone(),
            ExprKind::Neg(x) => ExprKind::Neg(Box::new(x.substitute(var, with))),
            ExprKind::Bin(op, l, r) => {
                ExprKind::Bin(*op, Box::new(l.substitute(var, with)), Box::new(r.substitute(var, with)))
            }
            ExprKind::Call(f, args) => ExprKind::Call(*f, args.iter().map(|a| a.substitute(var, with)).collect()),
            other => other.clone(),
        };
        Node { kind, offset: self.offset }
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match &self.kind {
            ExprKind::Var(v) => {
                if !out.contains(v) {
                    out.push(*v)
                }
            }
            ExprKind::Neg(x) => x.collect_vars(out),
            ExprKind::Bin(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            ExprKind::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(f: &mut fmt::Formatter<'_>, n: &Node, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "({n})")
            } else {
                write!(f, "{n}")
            }
        }
        match &self.kind {
            ExprKind::Num(x) => write!(f, "{x}"),
            ExprKind::Const(Constant::Pi) => f.write_str("pi"),
            ExprKind::Const(Constant::E) => f.write_str("e"),
            ExprKind::Var(v) => f.write_str(v.name()),
            ExprKind::Neg(x) => {
                f.write_str("-")?;
                wrap(f, x, x.precedence() < 3)
            }
            ExprKind::Bin(op, l, r) => {
                let (sym, p) = match op {
                    BinOp::Add => (" + ", 1),
                    BinOp::Sub => (" - ", 1),
                    BinOp::Mul => (" * ", 2),
                    BinOp::Div => (" / ", 2),
                    BinOp::Pow => ("^", 4),
                };
                if *op == BinOp::Pow {
                    wrap(f, l, l.precedence() <= 4)?;
                    f.write_str(sym)?;
                    wrap(f, r, r.precedence() < 3)
                } else {
                    wrap(f, l, l.precedence() < p)?;
                    f.write_str(sym)?;
                    wrap(f, r, r.precedence() <= p)
                }
            }
            ExprKind::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Ident,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    /// Returns (token, start offset, identifier text if any).
    fn next(&mut self) -> Result<(Tok, usize, &'a str), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        if start >= bytes.len() {
            return Ok((Tok::End, start, ""));
        }
        let c = bytes[start];
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = single {
            self.pos += 1;
            return Ok((t, start, ""));
        }
        if c.is_ascii_digit() || c == b'.' {
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                end += 1;
            }
            // exponent only when followed by digits, so `2e` stays `2` then `e`
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut k = end + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if k < bytes.len() && bytes[k].is_ascii_digit() {
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    end = k;
                }
            }
            let text = &self.src[start..end];
            let value: f64 = text.parse().map_err(|_| ParseError {
                offset: start,
                message: format!("malformed number `{text}`"),
                suggestions: vec![],
            })?;
            self.pos = end;
            return Ok((Tok::Num(value), start, ""));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                end += 1;
            }
            self.pos = end;
            return Ok((Tok::Ident, start, &self.src[start..end]));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(ParseError { offset: start, message: format!("unexpected character `{ch}`"), suggestions: vec![] })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    offset: usize,
    ident: &'a str,
    allowed: &'a [Var],
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(), ParseError> {
        let (t, o, s) = self.lexer.next()?;
        self.tok = t;
        self.offset = o;
        self.ident = s;
        Ok(())
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError { offset: self.offset, message: message.into(), suggestions: vec![] }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if self.tok == t {
            self.bump()
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let offset = self.offset;
            self.bump()?;
            let rhs = self.term()?;
            lhs = Node { kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), offset };
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let offset = self.offset;
            self.bump()?;
            let rhs = self.unary()?;
            lhs = Node { kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), offset };
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.tok == Tok::Minus {
            let offset = self.offset;
            self.bump()?;
            let inner = self.unary()?;
            return Ok(Node { kind: ExprKind::Neg(Box::new(inner)), offset });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if self.tok == Tok::Caret {
            let offset = self.offset;
            self.bump()?;
            let exponent = self.unary()?;
            return Ok(Node { kind: ExprKind::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)), offset });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let offset = self.offset;
        match self.tok {
            Tok::Num(x) => {
                self.bump()?;
                Ok(Node { kind: ExprKind::Num(x), offset })
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident => {
                let name = self.ident;
                self.bump()?;
                if let Some(func) = Func::ALL.iter().copied().find(|f| f.name() == name) {
                    self.expect(Tok::LParen, &format!("`(` after `{name}`"))?;
                    let mut args = vec![self.expr()?];
                    while self.tok == Tok::Comma {
                        self.bump()?;
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    if args.len() != func.arity() {
                        return Err(ParseError {
                            offset,
                            message: format!("`{name}` takes {} argument(s), got {}", func.arity(), args.len()),
                            suggestions: vec![],
                        });
                    }
                    return Ok(Node { kind: ExprKind::Call(func, args), offset });
                }
                let kind = match name {
                    "pi" => ExprKind::Const(Constant::Pi),
                    "e" => ExprKind::Const(Constant::E),
                    _ => match Var::ALL.iter().copied().find(|v| v.name() == name) {
                        Some(v) if self.allowed.contains(&v) => ExprKind::Var(v),
                        _ => return Err(self.unknown_identifier(name, offset)),
                    },
                };
                Ok(Node { kind, offset })
            }
            Tok::End => Err(self.err("unexpected end of input")),
            _ => Err(self.err("expected a number, identifier or `(`")),
        }
    }

    fn unknown_identifier(&self, name: &str, offset: usize) -> ParseError {
        let mut known: Vec<&str> = self.allowed.iter().map(|v| v.name()).collect();
        known.extend(["pi", "e"]);
        known.extend(Func::ALL.iter().map(|f| f.name()));
        let mut close: Vec<String> =
            known.iter().filter(|k| edit_distance(k, name) <= 2).map(|k| k.to_string()).collect();
        if close.is_empty() {
            close = self.allowed.iter().map(|v| v.name().to_string()).collect();
        }
        ParseError { offset, message: format!("unknown identifier `{name}`"), suggestions: close }
    }
}

fn edit_distance(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != *cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Push(f64),
    Load(usize),
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Abs,
    Sqrt,
    Exp,
    Log,
    Min,
    Max,
}

#[derive(Debug, Clone)]
struct Program {
    ops: Vec<Op>,
    offsets: Vec<usize>,
    depth: usize,
}

impl Program {
    fn compile(root: &Node) -> Program {
        fn emit(n: &Node, p: &mut Program, d: usize) {
            let push = |p: &mut Program, op: Op| {
                p.ops.push(op);
                p.offsets.push(n.offset);
            };
            match &n.kind {
                ExprKind::Num(x) => {
                    push(p, Op::Push(*x));
                    p.depth = p.depth.max(d + 1);
                }
                ExprKind::Const(Constant::Pi) => {
                    push(p, Op::Push(std::f64::consts::PI));
                    p.depth = p.depth.max(d + 1);
                }
                ExprKind::Const(Constant::E) => {
                    push(p, Op::Push(std::f64::consts::E));
                    p.depth = p.depth.max(d + 1);
                }
                ExprKind::Var(v) => {
                    push(p, Op::Load(v.index()));
                    p.depth = p.depth.max(d + 1);
                }
                ExprKind::Neg(x) => {
                    emit(x, p, d);
                    push(p, Op::Neg);
                }
                ExprKind::Bin(op, l, r) => {
                    emit(l, p, d);
                    emit(r, p, d + 1);
                    push(
                        p,
                        match op {
                            BinOp::Add => Op::Add,
                            BinOp::Sub => Op::Sub,
                            BinOp::Mul => Op::Mul,
                            BinOp::Div => Op::Div,
                            BinOp::Pow => Op::Pow,
                        },
                    );
                }
                ExprKind::Call(f, args) => {
                    for (k, a) in args.iter().enumerate() {
                        emit(a, p, d + k);
                    }
                    push(
                        p,
                        match f {
                            Func::Abs => Op::Abs,
                            Func::Sqrt => Op::Sqrt,
                            Func::Exp => Op::Exp,
                            Func::Log => Op::Log,
                            Func::Min => Op::Min,
                            Func::Max => Op::Max,
                        },
                    );
                }
            }
        }
        let mut p = Program { ops: Vec::new(), offsets: Vec::new(), depth: 0 };
        emit(root, &mut p, 0);
        p
    }

    fn run(&self, vars: &[f64; 4], stack: &mut [f64]) -> Result<f64, EvalError> {
        let mut sp = 0usize;
        for (k, op) in self.ops.iter().enumerate() {
            let fail = |op: &'static str, detail: String| EvalError { offset: self.offsets[k], op, detail };
            match *op {
                Op::Push(x) => {
                    stack[sp] = x;
                    sp += 1;
                }
                Op::Load(i) => {
                    stack[sp] = vars[i];
                    sp += 1;
                }
                Op::Neg => stack[sp - 1] = -stack[sp - 1],
                Op::Abs => stack[sp - 1] = stack[sp - 1].abs(),
                Op::Sqrt => {
                    let x = stack[sp - 1];
                    if x < 0.0 {
                        return Err(fail("sqrt", format!("argument {x} is negative")));
                    }
                    stack[sp - 1] = x.sqrt();
                }
                Op::Exp => {
                    let y = stack[sp - 1].exp();
                    if !y.is_finite() {
                        return Err(fail("exp", format!("overflow at {}", stack[sp - 1])));
                    }
                    stack[sp - 1] = y;
                }
                Op::Log => {
                    let x = stack[sp - 1];
                    if x <= 0.0 {
                        return Err(fail("log", format!("argument {x} is not positive")));
                    }
                    stack[sp - 1] = x.ln();
                }
                Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Pow | Op::Min | Op::Max => {
                    let b = stack[sp - 1];
                    let a = stack[sp - 2];
                    sp -= 1;
                    let y = match *op {
                        Op::Add => a + b,
                        Op::Sub => a - b,
                        Op::Mul => a * b,
                        Op::Div => {
                            if b == 0.0 {
                                return Err(fail("/", "division by zero".into()));
                            }
                            a / b
                        }
                        Op::Pow => {
                            let y = if b == 2.0 { a * a } else { a.powf(b) };
                            if !y.is_finite() {
                                return Err(fail("^", format!("{a}^{b} is not a finite real")));
                            }
                            y
                        }
                        Op::Min => a.min(b),
                        _ => a.max(b),
                    };
                    stack[sp - 1] = y;
                }
            }
        }
        Ok(stack[0])
    }
}

/// Values for the free variables of an expression. Unused slots are ignored.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bindings {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub r: f64,
}

/// A parsed and compiled expression.
#[derive(Debug, Clone)]
pub struct Expression {
    root: Node,
    program: Program,
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

impl Expression {
    /// Parses with all of `t, u, v, r` in scope.
    pub fn parse(src: &str) -> Result<Expression, ParseError> {
        Self::parse_with_vars(src, &Var::ALL)
    }

    /// Parses allowing only the listed variables; any other identifier is an
    /// error carrying suggestions.
    pub fn parse_with_vars(src: &str, allowed: &[Var]) -> Result<Expression, ParseError> {
        let mut p = Parser { lexer: Lexer { src, pos: 0 }, tok: Tok::End, offset: 0, ident: "", allowed };
        p.bump()?;
        let root = p.expr()?;
        if p.tok != Tok::End {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(Self::from_node(root))
    }

    pub fn constant(x: f64) -> Expression {
        Self::from_node(Node { kind: ExprKind::Num(x), offset: 0 })
    }

    fn from_node(root: Node) -> Expression {
        let program = Program::compile(&root);
        Expression { root, program }
    }

    pub fn ast(&self) -> &Node {
        &self.root
    }

    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.root.collect_vars(&mut out);
        out.sort();
        out
    }

    pub fn substitute(&self, var: Var, with: &Expression) -> Expression {
        Self::from_node(self.root.substitute(var, &with.root))
    }

    /// `true` when the expression is literally `0` (or `-0`).
    pub fn is_literal_zero(&self) -> bool {
        match &self.root.kind {
            ExprKind::Num(x) => *x == 0.0,
            ExprKind::Neg(n) => matches!(n.kind, ExprKind::Num(x) if x == 0.0),
            _ => false,
        }
    }

    pub fn eval(&self, b: &Bindings) -> Result<f64, EvalError> {
        let vars = [b.t, b.u, b.v, b.r];
        if self.program.depth <= 32 {
            let mut stack = [0.0f64; 32];
            self.program.run(&vars, &mut stack)
        } else {
            let mut stack = vec![0.0f64; self.program.depth];
            self.program.run(&vars, &mut stack)
        }
    }

    pub fn eval_tuv(&self, t: f64, u: f64, v: f64) -> Result<f64, EvalError> {
        self.eval(&Bindings { t, u, v, r: 0.0 })
    }

    pub fn eval_t(&self, t: f64) -> Result<f64, EvalError> {
        self.eval(&Bindings { t, ..Default::default() })
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl std::str::FromStr for Expression {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expression::parse(s)
    }
}

/// Parses a closed expression (no variables) and evaluates it, so that
/// configuration values such as `"1/6"` or `"e^(3/4)"` are accepted.
pub fn eval_constant(src: &str) -> Result<f64, crate::Error> {
    let e = Expression::parse_with_vars(src, &[])?;
    Ok(e.eval(&Bindings::default())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(src: &str, u: f64, v: f64) -> f64 {
        Expression::parse(src).unwrap().eval_tuv(0.0, u, v).unwrap()
    }

    #[test]
    fn example_nonlinearities() {
        assert_eq!(ev("(abs(u)^3 + abs(v)^3 + 1)/4", 1.0, 1.0), 0.75);
        assert_eq!(ev("0", 3.0, -2.0), 0.0);
        let f2 = ev("(sqrt(abs(u)) + v^2)/3", 0.0, 5.0);
        assert!((f2 - 25.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("-2^2", 0.0, 0.0), -4.0);
        assert_eq!(ev("2^3^2", 0.0, 0.0), 512.0);
        assert_eq!(ev("2^-1", 0.0, 0.0), 0.5);
        assert_eq!(ev("8/2/2", 0.0, 0.0), 2.0);
        assert_eq!(ev("1-2-3", 0.0, 0.0), -4.0);
        assert_eq!(ev("2*3+4*5", 0.0, 0.0), 26.0);
        assert_eq!(ev("min(u, v) + max(u, v)", 2.0, 5.0), 7.0);
        assert!((ev("log(e) + exp(0) - pi/pi", 0.0, 0.0) - 1.0).abs() < 1e-15);
        assert_eq!(ev("1.5e2 + .5", 0.0, 0.0), 150.5);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let e = Expression::parse("1 + * 2").unwrap_err();
        assert_eq!(e.offset, 4);
        let e = Expression::parse("(u + 1").unwrap_err();
        assert_eq!(e.offset, 6);
        let e = Expression::parse("u $ v").unwrap_err();
        assert_eq!(e.offset, 2);
        let e = Expression::parse("max(u)").unwrap_err();
        assert!(e.message.contains("2 argument"));
    }

    #[test]
    fn unknown_identifier_suggests() {
        let e = Expression::parse("sqr(u)").unwrap_err();
        assert_eq!(e.offset, 0);
        assert!(e.suggestions.contains(&"sqrt".to_string()), "{e}");
        let e = Expression::parse_with_vars("u + 1", &[Var::T]).unwrap_err();
        assert!(e.suggestions.contains(&"t".to_string()), "{e}");
    }

    #[test]
    fn domain_errors_are_located() {
        let x = Expression::parse("1 + sqrt(u)").unwrap();
        let err = x.eval_tuv(0.0, -1.0, 0.0).unwrap_err();
        assert_eq!(err.offset, 4);
        assert_eq!(err.op, "sqrt");
        let x = Expression::parse("log(u)").unwrap();
        assert!(x.eval_tuv(0.0, 0.0, 0.0).is_err());
        let x = Expression::parse("1/u").unwrap();
        assert_eq!(x.eval_tuv(0.0, 0.0, 0.0).unwrap_err().op, "/");
        let x = Expression::parse("u^0.5").unwrap();
        assert!(x.eval_tuv(0.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn substitution() {
        let h = Expression::parse("r^2 + 1").unwrap();
        let r = Expression::parse("exp(1 - t)").unwrap();
        let g = h.substitute(Var::R, &r);
        assert_eq!(g.free_vars(), vec![Var::T]);
        let val = g.eval_t(1.0).unwrap();
        assert!((val - 2.0).abs() < 1e-15);
    }

    #[test]
    fn constant_eval() {
        assert!((eval_constant("1/6").unwrap() - 1.0 / 6.0).abs() < 1e-17);
        assert!(eval_constant("u").is_err());
    }

    fn arb_node() -> impl Strategy<Value = String> {
        let leaf = prop_oneof![
            (0u32..1000).prop_map(|n| format!("{}", n as f64 / 8.0)),
            Just("t".to_string()),
            Just("u".to_string()),
            Just("v".to_string()),
            Just("pi".to_string()),
            Just("e".to_string()),
        ];
        leaf.prop_recursive(5, 40, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone(), 0usize..5).prop_map(|(a, b, k)| {
                    let op = ["+", "-", "*", "/", "^"][k];
                    format!("({a}){op}({b})")
                }),
                inner.clone().prop_map(|a| format!("-({a})")),
                inner.clone().prop_map(|a| format!("abs({a})")),
                (inner.clone(), inner).prop_map(|(a, b)| format!("max({a}, {b})")),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(src in arb_node()) {
            let a = Expression::parse(&src).unwrap();
            let printed = a.to_string();
            let b = Expression::parse(&printed).unwrap();
            prop_assert_eq!(&a, &b, "printed: {}", printed);
            prop_assert_eq!(printed, b.to_string());
        }
    }
}
