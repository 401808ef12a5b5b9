//! The coefficient-expression language.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := '-' unary | primary
//! primary := number | 'i' | 'id' | 'grading' | '(' expr ')'
//!          | name '(' args ')'
//! ```
//!
//! Function atoms: `jap(g)`, `hom(g)`, `xi(j)`, `ge(r)`, `lt(r)`, `gamma(j)`,
//! `e(j,k)`, `shift([t1,..,td], expr)`, `adj(expr)`, `diag(expr)`,
//! `offdiag(expr)`. Indices are one-based.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clifford::{build_generators, CliffordRep};
use crate::symbols::{CMat, Coeff, EntryPart, Frequency, MatrixSymbol, Node, SymbolError, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DslError {
    #[error("syntax error at line {line}, col {col}: {message}")]
    SyntaxError { line: usize, col: usize, message: String },
    #[error("unknown atom '{name}' at line {line}, col {col}")]
    UnknownAtom { name: String, line: usize, col: usize },
    #[error("'{name}' at line {line}, col {col} takes {expected} argument(s), got {found}")]
    ArityError {
        name: String,
        expected: usize,
        found: usize,
        line: usize,
        col: usize,
    },
    #[error("invalid argument to '{name}' at line {line}, col {col}: {message}")]
    InvalidArgument {
        name: String,
        message: String,
        line: usize,
        col: usize,
    },
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("invalid symbol document: {0}")]
    Document(String),
}

/// Dimension bindings for parsing.
#[derive(Clone, Debug)]
pub struct DslContext {
    pub d: usize,
    pub m: usize,
    pub rep: Option<CliffordRep>,
}

impl DslContext {
    pub fn scalar(d: usize) -> Self {
        DslContext { d, m: 1, rep: None }
    }

    /// Binds `gamma(j)` and `grading` to the standard generators when their
    /// size matches `m`.
    pub fn new(d: usize, m: usize) -> Self {
        let rep = build_generators(d).ok().filter(|r| r.m == m);
        DslContext { d, m, rep }
    }

    pub fn with_rep(rep: CliffordRep) -> Self {
        DslContext { d: rep.d, m: rep.m, rep: Some(rep) }
    }

    fn matrix(&self, m: CMat) -> Coeff {
        Coeff::constant(m)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Punct(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if ch.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        let start = (line, col);
        if ch.is_ascii_digit() || ch == '.' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                j += 1;
            }
            if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                let mut k = j + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    j = k;
                }
            }
            let text: String = chars[i..j].iter().collect();
            let value = text.parse::<f64>().map_err(|_| DslError::SyntaxError {
                line,
                col,
                message: format!("malformed number '{text}'"),
            })?;
            out.push(Token { tok: Tok::Num(value), line: start.0, col: start.1 });
            col += j - i;
            i = j;
        } else if ch.is_alphabetic() || ch == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            out.push(Token { tok: Tok::Ident(text), line: start.0, col: start.1 });
            col += j - i;
            i = j;
        } else if "+-*(),[]".contains(ch) {
            out.push(Token { tok: Tok::Punct(ch), line, col });
            col += 1;
            i += 1;
        } else {
            return Err(DslError::SyntaxError {
                line,
                col,
                message: format!("unexpected character '{ch}'"),
            });
        }
    }
    out.push(Token { tok: Tok::End, line, col });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    ctx: &'a DslContext,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(x) => format!("number {x}"),
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Punct(c) => format!("'{c}'"),
        Tok::End => "end of input".into(),
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, what: &str) -> DslError {
        let t = self.peek();
        DslError::SyntaxError {
            line: t.line,
            col: t.col,
            message: format!("expected {what}, found {}", describe(&t.tok)),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), DslError> {
        if self.peek().tok == Tok::Punct(c) {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{c}'")))
        }
    }

    fn expr(&mut self) -> Result<Coeff, DslError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek().tok {
                Tok::Punct('+') => {
                    self.next();
                    terms.push(self.term()?);
                }
                Tok::Punct('-') => {
                    self.next();
                    terms.push(self.term()?.scale(C64::new(-1.0, 0.0)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Coeff::sum(terms) })
    }

    fn term(&mut self) -> Result<Coeff, DslError> {
        let mut factors = vec![self.unary()?];
        while self.peek().tok == Tok::Punct('*') {
            self.next();
            factors.push(self.unary()?);
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { Coeff::product(factors) })
    }

    fn unary(&mut self) -> Result<Coeff, DslError> {
        if self.peek().tok == Tok::Punct('-') {
            self.next();
            if let Tok::Num(x) = self.peek().tok {
                self.next();
                return Ok(Coeff::real(-x));
            }
            return Ok(self.unary()?.scale(C64::new(-1.0, 0.0)));
        }
        self.primary()
    }

    fn signed_number(&mut self) -> Result<f64, DslError> {
        let neg = if self.peek().tok == Tok::Punct('-') {
            self.next();
            true
        } else {
            false
        };
        match self.peek().tok {
            Tok::Num(x) => {
                self.next();
                Ok(if neg { -x } else { x })
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    /// Comma-separated numeric arguments up to ')'.
    fn numeric_args(&mut self) -> Result<Vec<f64>, DslError> {
        let mut out = Vec::new();
        if self.peek().tok == Tok::Punct(')') {
            self.next();
            return Ok(out);
        }
        loop {
            out.push(self.signed_number()?);
            match self.peek().tok {
                Tok::Punct(',') => {
                    self.next();
                }
                Tok::Punct(')') => {
                    self.next();
                    return Ok(out);
                }
                _ => return Err(self.unexpected("',' or ')'")),
            }
        }
    }

    fn primary(&mut self) -> Result<Coeff, DslError> {
        let t = self.next();
        match t.tok {
            Tok::Num(x) => Ok(Coeff::real(x)),
            Tok::Punct('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek().tok == Tok::Punct('(') {
                    self.next();
                    self.call(&name, t.line, t.col)
                } else {
                    self.atom(&name, t.line, t.col)
                }
            }
            _ => {
                self.pos -= 1;
                Err(self.unexpected("an operand"))
            }
        }
    }

    fn rep(&self, name: &str, line: usize, col: usize) -> Result<&CliffordRep, DslError> {
        self.ctx.rep.as_ref().ok_or_else(|| DslError::UnknownAtom {
            name: format!("{name} (no Clifford representation bound for d={}, m={})", self.ctx.d, self.ctx.m),
            line,
            col,
        })
    }

    fn atom(&self, name: &str, line: usize, col: usize) -> Result<Coeff, DslError> {
        match name {
            "i" => Ok(Coeff::scalar(C64::new(0.0, 1.0))),
            "id" => Ok(self.ctx.matrix(CMat::identity(self.ctx.m, self.ctx.m))),
            "grading" => Ok(self.ctx.matrix(self.rep(name, line, col)?.grading.clone())),
            _ => Err(DslError::UnknownAtom { name: name.into(), line, col }),
        }
    }

    fn call(&mut self, name: &str, line: usize, col: usize) -> Result<Coeff, DslError> {
        let arity = |found: usize, expected: usize| -> Result<(), DslError> {
            if found == expected {
                Ok(())
            } else {
                Err(DslError::ArityError { name: name.into(), expected, found, line, col })
            }
        };
        let invalid = |message: String| DslError::InvalidArgument { name: name.into(), message, line, col };
        let index = |x: f64, bound: usize| -> Result<usize, DslError> {
            if x.fract() == 0.0 && x >= 1.0 && (x as usize) <= bound {
                Ok(x as usize - 1)
            } else {
                Err(invalid(format!("index {x} outside 1..={bound}")))
            }
        };
        match name {
            "jap" | "hom" | "ge" | "lt" | "xi" | "gamma" | "e" => {
                let args = self.numeric_args()?;
                match name {
                    "jap" => {
                        arity(args.len(), 1)?;
                        Ok(Coeff::jap(args[0]))
                    }
                    "hom" => {
                        arity(args.len(), 1)?;
                        Ok(Coeff::hom(args[0]))
                    }
                    "ge" => {
                        arity(args.len(), 1)?;
                        Ok(Coeff::ge(args[0]))
                    }
                    "lt" => {
                        arity(args.len(), 1)?;
                        Ok(Coeff::lt(args[0]))
                    }
                    "xi" => {
                        arity(args.len(), 1)?;
                        Ok(Coeff::coord(index(args[0], self.ctx.d)?))
                    }
                    "gamma" => {
                        arity(args.len(), 1)?;
                        let rep = self.rep(name, line, col)?;
                        let j = index(args[0], rep.d)?;
                        Ok(self.ctx.matrix(rep.generators[j].clone()))
                    }
                    _ => {
                        arity(args.len(), 2)?;
                        let (j, k) = (index(args[0], self.ctx.m)?, index(args[1], self.ctx.m)?);
                        let mut e = CMat::zeros(self.ctx.m, self.ctx.m);
                        e[(j, k)] = C64::new(1.0, 0.0);
                        Ok(self.ctx.matrix(e))
                    }
                }
            }
            "shift" => {
                self.expect('[')?;
                let mut theta = Vec::new();
                if self.peek().tok != Tok::Punct(']') {
                    loop {
                        theta.push(self.signed_number()?);
                        if self.peek().tok == Tok::Punct(',') {
                            self.next();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(']')?;
                if theta.len() != self.ctx.d {
                    return Err(invalid(format!("shift vector has {} components, d = {}", theta.len(), self.ctx.d)));
                }
                self.expect(',')?;
                let inner = self.expr()?;
                self.expect(')')?;
                let theta = Frequency::new(&theta).map_err(|e| invalid(e.to_string()))?;
                Ok(inner.shift(&theta))
            }
            "adj" | "diag" | "offdiag" => {
                let inner = self.expr()?;
                if self.peek().tok == Tok::Punct(',') {
                    let mut found = 1;
                    while self.peek().tok == Tok::Punct(',') {
                        self.next();
                        self.expr()?;
                        found += 1;
                    }
                    return Err(DslError::ArityError { name: name.into(), expected: 1, found, line, col });
                }
                self.expect(')')?;
                Ok(match name {
                    "adj" => inner.adjoint(),
                    "diag" => inner.entry_mask(EntryPart::Diagonal),
                    _ => inner.entry_mask(EntryPart::OffDiagonal),
                })
            }
            _ => Err(DslError::UnknownAtom { name: name.into(), line, col }),
        }
    }
}

pub fn parse_coeff_expr(src: &str, ctx: &DslContext) -> Result<Coeff, DslError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, ctx };
    let e = p.expr()?;
    if p.peek().tok != Tok::End {
        return Err(p.unexpected("end of input"));
    }
    Ok(e)
}

fn number(x: f64) -> String {
    // Adding 0.0 maps −0 to +0 so printing is a fixed point.
    format!("{:.16e}", x + 0.0)
}

fn scalar_text(c: C64) -> String {
    if c.im == 0.0 {
        number(c.re)
    } else {
        format!("({} + {}*i)", number(c.re), number(c.im))
    }
}

/// Writes `m` as `c*atom` when an atom reproduces it exactly.
fn const_text(m: &CMat, ctx: &DslContext) -> String {
    let n = m.nrows();
    let mut atoms: Vec<(String, CMat)> = vec![("id".into(), CMat::identity(n, n))];
    if let Some(rep) = ctx.rep.as_ref().filter(|r| r.m == n) {
        atoms.push(("grading".into(), rep.grading.clone()));
        for (j, h) in rep.generators.iter().enumerate() {
            atoms.push((format!("gamma({})", j + 1), h.clone()));
        }
    }
    for (name, a) in &atoms {
        let Some(pos) = a.iter().position(|z| z.re != 0.0 || z.im != 0.0) else { continue };
        let c = m[pos] / a[pos];
        if a.map(|z| z * c) == *m {
            return format!("({}*{name})", scalar_text(c));
        }
    }
    let mut terms = Vec::new();
    for j in 0..n {
        for k in 0..n {
            let z = m[(j, k)];
            if z.re != 0.0 || z.im != 0.0 {
                terms.push(format!("{}*e({},{})", scalar_text(z), j + 1, k + 1));
            }
        }
    }
    format!("({})", terms.join(" + "))
}

fn child_text(c: &Coeff, ctx: &DslContext) -> Result<String, DslError> {
    let s = print_coeff_expr(c, ctx)?;
    Ok(match c.node() {
        Node::Sum(_) | Node::Product(_) => format!("({s})"),
        _ => s,
    })
}

/// Prints `c` so that parsing the result under `ctx` rebuilds the same tree.
pub fn print_coeff_expr(c: &Coeff, ctx: &DslContext) -> Result<String, DslError> {
    Ok(match c.node() {
        Node::Zero => "0".into(),
        Node::Scalar(z) => scalar_text(*z),
        Node::Const(m) => const_text(m, ctx),
        Node::Jap(g) => format!("jap({})", number(*g)),
        Node::Hom(g) => format!("hom({})", number(*g)),
        Node::Coord(j) => format!("xi({})", j + 1),
        Node::Ge(r) => format!("ge({})", number(*r)),
        Node::Lt(r) => format!("lt({})", number(*r)),
        Node::Sum(ts) => ts.iter().map(|t| child_text(t, ctx)).collect::<Result<Vec<_>, _>>()?.join(" + "),
        Node::Product(fs) => fs.iter().map(|f| child_text(f, ctx)).collect::<Result<Vec<_>, _>>()?.join("*"),
        Node::Shift(theta, inner) => format!(
            "shift([{}], {})",
            theta.to_vec().iter().map(|x| number(*x)).collect::<Vec<_>>().join(", "),
            print_coeff_expr(inner, ctx)?
        ),
        Node::Adjoint(inner) => format!("adj({})", print_coeff_expr(inner, ctx)?),
        Node::EntryMask(EntryPart::Diagonal, inner) => format!("diag({})", print_coeff_expr(inner, ctx)?),
        Node::EntryMask(EntryPart::OffDiagonal, inner) => format!("offdiag({})", print_coeff_expr(inner, ctx)?),
        Node::Resonance(_) => return Err(SymbolError::NotSerializable("resonance cut-off".into()).into()),
        Node::Quotient(_) => return Err(SymbolError::NotSerializable("masked quotient".into()).into()),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EntryDoc {
    pub theta: Vec<f64>,
    pub expr: String,
}

/// JSON form of a symbol.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SymbolDoc {
    pub d: usize,
    pub m: usize,
    #[serde(default)]
    pub order: f64,
    pub entries: Vec<EntryDoc>,
}

impl SymbolDoc {
    pub fn from_symbol(s: &MatrixSymbol, ctx: &DslContext) -> Result<Self, DslError> {
        let entries = s
            .entries()
            .map(|(t, c)| Ok(EntryDoc { theta: t.to_vec(), expr: print_coeff_expr(c, ctx)? }))
            .collect::<Result<Vec<_>, DslError>>()?;
        Ok(SymbolDoc { d: s.dim(), m: s.spinor_dim(), order: s.order, entries })
    }

    pub fn to_symbol(&self, ctx: &DslContext) -> Result<MatrixSymbol, DslError> {
        if ctx.d != self.d || ctx.m != self.m {
            return Err(DslError::Document(format!(
                "document has d={}, m={} but context has d={}, m={}",
                self.d, self.m, ctx.d, ctx.m
            )));
        }
        let mut s = MatrixSymbol::zero(self.d, self.m).with_order(self.order);
        for e in &self.entries {
            if e.theta.len() != self.d {
                return Err(DslError::Document(format!("theta {:?} has wrong length", e.theta)));
            }
            s.add_entry(Frequency::new(&e.theta)?, parse_coeff_expr(&e.expr, ctx)?);
        }
        Ok(s)
    }
}

pub fn symbol_to_json(s: &MatrixSymbol, ctx: &DslContext) -> Result<serde_json::Value, DslError> {
    serde_json::to_value(SymbolDoc::from_symbol(s, ctx)?).map_err(|e| DslError::Document(e.to_string()))
}

pub fn symbol_from_json(v: &serde_json::Value) -> Result<MatrixSymbol, DslError> {
    let doc: SymbolDoc = serde_json::from_value(v.clone()).map_err(|e| DslError::Document(e.to_string()))?;
    doc.to_symbol(&DslContext::new(doc.d, doc.m))
}
