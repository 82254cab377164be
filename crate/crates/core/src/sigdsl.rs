//! The signature language: a tiny interface-definition format describing
//! one abstract type `t` and the operations over it.
//!
//! ```text
//! signature finite_set
//! abstract t
//! op empty : t
//! op insert : int -> t -> t
//! op mem : int -> t -> bool
//! end
//! ```
//!
//! Arrow types are curried: every atom but the last is an argument and the
//! last atom is the return type. A parenthesized arrow in argument position
//! is a function-valued argument.

use std::fmt;

use thiserror::Error;

/// Identifiers that carry meaning in the expression syntax and therefore
/// cannot name operations.
pub const RESERVED_OP_NAMES: &[&str] = &["seq", "fn", "list", "some", "none", "true", "false"];

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ty {
    Int,
    Bool,
    Char,
    Str,
    Unit,
    /// The signature's single abstract type `t`.
    Abstract,
    List(Box<Ty>),
    Option(Box<Ty>),
    Fun(Box<Ty>, Box<Ty>),
}

impl Ty {
    pub fn list(elem: Ty) -> Ty {
        Ty::List(Box::new(elem))
    }

    pub fn option(elem: Ty) -> Ty {
        Ty::Option(Box::new(elem))
    }

    pub fn fun(arg: Ty, ret: Ty) -> Ty {
        Ty::Fun(Box::new(arg), Box::new(ret))
    }

    /// The `int -> int` function type, the only one the generator supports.
    pub fn int_fun() -> Ty {
        Ty::fun(Ty::Int, Ty::Int)
    }

    pub fn is_abstract(&self) -> bool {
        matches!(self, Ty::Abstract)
    }

    /// True if `t` occurs anywhere inside this type.
    pub fn mentions_abstract(&self) -> bool {
        match self {
            Ty::Abstract => true,
            Ty::List(e) | Ty::Option(e) => e.mentions_abstract(),
            Ty::Fun(a, r) => a.mentions_abstract() || r.mentions_abstract(),
            _ => false,
        }
    }

    fn mentions_fun(&self) -> bool {
        match self {
            Ty::Fun(..) => true,
            Ty::List(e) | Ty::Option(e) => e.mentions_fun(),
            _ => false,
        }
    }

    /// Parse a standalone type such as `int list` or `(int -> int)`.
    pub fn parse(source: &str) -> Result<Ty, ParseError> {
        let mut p = Parser::new(source)?;
        let chain = p.arrow_chain()?;
        p.expect_eof()?;
        let (ret_pos, ret) = chain.last().cloned().expect("non-empty chain");
        if chain.len() > 1 {
            return Err(ParseError::new(ret_pos, "expected a single type, found an arrow"));
        }
        Ok(ret)
    }

    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Fun(..) => write!(f, "({self})"),
            _ => write!(f, "{self}"),
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Int => f.write_str("int"),
            Ty::Bool => f.write_str("bool"),
            Ty::Char => f.write_str("char"),
            Ty::Str => f.write_str("string"),
            Ty::Unit => f.write_str("unit"),
            Ty::Abstract => f.write_str("t"),
            Ty::List(e) => {
                e.fmt_atom(f)?;
                f.write_str(" list")
            }
            Ty::Option(e) => {
                e.fmt_atom(f)?;
                f.write_str(" option")
            }
            Ty::Fun(a, r) => {
                a.fmt_atom(f)?;
                f.write_str(" -> ")?;
                write!(f, "{r}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpDecl {
    pub name: String,
    pub args: Vec<Ty>,
    pub ret: Ty,
}

impl OpDecl {
    pub fn new(name: impl Into<String>, args: Vec<Ty>, ret: Ty) -> Self {
        OpDecl { name: name.into(), args, ret }
    }

    /// Number of `t`-typed argument positions.
    pub fn abstract_arity(&self) -> usize {
        self.args.iter().filter(|a| a.is_abstract()).count()
    }

    /// An operation with no `t`-typed arguments.
    pub fn is_leaf(&self) -> bool {
        self.abstract_arity() == 0
    }
}

impl fmt::Display for OpDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "op {} : ", self.name)?;
        for arg in &self.args {
            arg.fmt_atom(f)?;
            f.write_str(" -> ")?;
        }
        self.ret.fmt_atom(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub name: String,
    pub mutable: bool,
    pub ops: Vec<OpDecl>,
}

impl Signature {
    pub fn op(&self, name: &str) -> Option<&OpDecl> {
        self.ops.iter().find(|op| op.name == name)
    }

    /// Operations whose return type is `ty`, in declaration order.
    pub fn ops_returning<'a>(&'a self, ty: &'a Ty) -> impl Iterator<Item = &'a OpDecl> + 'a {
        self.ops.iter().filter(move |op| &op.ret == ty)
    }

    /// Distinct return types in first-occurrence order.
    pub fn return_types(&self) -> Vec<Ty> {
        let mut out: Vec<Ty> = Vec::new();
        for op in &self.ops {
            if !out.contains(&op.ret) {
                out.push(op.ret.clone());
            }
        }
        out
    }

    /// Pretty-print back into the signature language.
    pub fn to_source(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "signature {}", self.name)?;
        if self.mutable {
            writeln!(f, "mutable")?;
        }
        writeln!(f, "abstract t")?;
        for op in &self.ops {
            writeln!(f, "{op}")?;
        }
        writeln!(f, "end")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError { pos, message: message.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("no leaf constructor for t (an op returning t without t-typed arguments)")]
    NoLeafConstructor,
    #[error("no concrete return type")]
    NoConcreteReturnType,
    #[error("op {op}: function types other than (int -> int) are unsupported, found {found}")]
    UnsupportedFun { op: String, found: Ty },
    #[error("op {op}: function type in return position")]
    FunReturn { op: String },
    #[error("op {op}: t nested under a type constructor in {found}")]
    NestedAbstract { op: String, found: Ty },
}

/// What validation learned about a signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    /// Non-abstract return types, deduplicated, in first-occurrence order.
    pub observable: Vec<Ty>,
}

pub fn parse_signature(source: &str) -> Result<Signature, ParseError> {
    Parser::new(source)?.signature()
}

/// Check the structural invariants generation and comparison rely on.
pub fn validate_signature(sig: &Signature) -> Result<ValidationReport, ValidationError> {
    for op in &sig.ops {
        for ty in op.args.iter().chain(std::iter::once(&op.ret)) {
            check_nesting(&op.name, ty)?;
        }
        if matches!(op.ret, Ty::Fun(..)) {
            return Err(ValidationError::FunReturn { op: op.name.clone() });
        }
        for arg in &op.args {
            if matches!(arg, Ty::Fun(..)) && *arg != Ty::int_fun() {
                return Err(ValidationError::UnsupportedFun { op: op.name.clone(), found: arg.clone() });
            }
        }
    }

    let uses_abstract = sig.ops.iter().any(|op| op.ret.is_abstract() || op.abstract_arity() > 0);
    if uses_abstract && !sig.ops.iter().any(|op| op.ret.is_abstract() && op.is_leaf()) {
        return Err(ValidationError::NoLeafConstructor);
    }

    let observable: Vec<Ty> = sig.return_types().into_iter().filter(|t| !t.is_abstract()).collect();
    if observable.is_empty() {
        return Err(ValidationError::NoConcreteReturnType);
    }
    Ok(ValidationReport { observable })
}

fn check_nesting(op: &str, ty: &Ty) -> Result<(), ValidationError> {
    match ty {
        Ty::List(e) | Ty::Option(e) => {
            if e.mentions_abstract() {
                return Err(ValidationError::NestedAbstract { op: op.to_string(), found: ty.clone() });
            }
            if e.mentions_fun() {
                return Err(ValidationError::UnsupportedFun { op: op.to_string(), found: ty.clone() });
            }
            Ok(())
        }
        Ty::Fun(a, r) => {
            if a.mentions_abstract() || r.mentions_abstract() {
                return Err(ValidationError::NestedAbstract { op: op.to_string(), found: ty.clone() });
            }
            if **a != Ty::Int || **r != Ty::Int {
                return Err(ValidationError::UnsupportedFun { op: op.to_string(), found: ty.clone() });
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Arrow,
    Colon,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(source: &str) -> Result<Vec<(Pos, Tok)>, ParseError> {
    let mut toks = Vec::new();
    for (lineno, line) in source.lines().enumerate() {
        let line = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let pos = Pos { line: lineno + 1, col: i + 1 };
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c == '-' && chars.get(i + 1) == Some(&'>') {
                toks.push((pos, Tok::Arrow));
                i += 2;
            } else if c == ':' {
                toks.push((pos, Tok::Colon));
                i += 1;
            } else if c == '(' {
                toks.push((pos, Tok::LParen));
                i += 1;
            } else if c == ')' {
                toks.push((pos, Tok::RParen));
                i += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push((pos, Tok::Ident(chars[start..i].iter().collect())));
            } else {
                return Err(ParseError::new(pos, format!("unexpected character {c:?}")));
            }
        }
    }
    let eof =
        Pos { line: source.lines().count().max(1), col: source.lines().last().map_or(1, |l| l.chars().count() + 1) };
    toks.push((eof, Tok::Eof));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Pos, Tok)>,
    at: usize,
    /// Position of the first `t` seen, checked against the `abstract t` declaration at the end.
    first_t: Option<Pos>,
}

impl Parser {
    fn new(source: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(source)?, at: 0, first_t: None })
    }

    fn peek(&self) -> &(Pos, Tok) {
        &self.toks[self.at]
    }

    fn next(&mut self) -> (Pos, Tok) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Pos, ParseError> {
        let (pos, tok) = self.next();
        if tok == want {
            Ok(pos)
        } else {
            Err(ParseError::new(pos, format!("expected {want}, found {tok}")))
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        let (pos, tok) = self.next();
        match tok {
            Tok::Eof => Ok(()),
            other => Err(ParseError::new(pos, format!("unexpected {other} after end"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(Pos, String), ParseError> {
        match self.next() {
            (pos, Tok::Ident(s)) => Ok((pos, s)),
            (pos, tok) => Err(ParseError::new(pos, format!("expected {what}, found {tok}"))),
        }
    }

    fn signature(&mut self) -> Result<Signature, ParseError> {
        let (pos, kw) = self.ident("`signature`")?;
        if kw != "signature" {
            return Err(ParseError::new(pos, format!("expected `signature`, found `{kw}`")));
        }
        let (_, name) = self.ident("signature name")?;
        let mut mutable = false;
        let mut abstract_decl: Option<Pos> = None;
        let mut ops: Vec<OpDecl> = Vec::new();
        loop {
            let (pos, tok) = self.next();
            match tok {
                Tok::Ident(kw) if kw == "end" => break,
                Tok::Ident(kw) if kw == "mutable" => mutable = true,
                Tok::Ident(kw) if kw == "abstract" => {
                    let (tpos, tname) = self.ident("`t`")?;
                    if tname != "t" {
                        return Err(ParseError::new(
                            tpos,
                            format!("the abstract type must be named `t`, found `{tname}`"),
                        ));
                    }
                    if abstract_decl.is_some() {
                        return Err(ParseError::new(pos, "only one abstract type may be declared"));
                    }
                    abstract_decl = Some(pos);
                }
                Tok::Ident(kw) if kw == "op" => {
                    let (npos, opname) = self.ident("operation name")?;
                    if RESERVED_OP_NAMES.contains(&opname.as_str()) {
                        return Err(ParseError::new(
                            npos,
                            format!("`{opname}` is reserved and cannot name an operation"),
                        ));
                    }
                    if ops.iter().any(|o| o.name == opname) {
                        return Err(ParseError::new(npos, format!("duplicate operation `{opname}`")));
                    }
                    self.expect(Tok::Colon)?;
                    let mut chain = self.arrow_chain()?;
                    let (rpos, ret) = chain.pop().expect("non-empty chain");
                    if matches!(ret, Ty::Fun(..)) {
                        return Err(ParseError::new(rpos, "a function type cannot be returned"));
                    }
                    ops.push(OpDecl::new(opname, chain.into_iter().map(|(_, t)| t).collect(), ret));
                }
                Tok::Eof => return Err(ParseError::new(pos, "missing `end`")),
                other => {
                    return Err(ParseError::new(
                        pos,
                        format!("expected `op`, `abstract`, `mutable` or `end`, found {other}"),
                    ))
                }
            }
        }
        self.expect_eof()?;
        if abstract_decl.is_none() {
            let pos = self.first_t.unwrap_or(Pos { line: 1, col: 1 });
            return Err(ParseError::new(pos, "no `abstract t` declaration"));
        }
        Ok(Signature { name, mutable, ops })
    }

    /// `ty := atomty ("->" ty)?`, flattened into its atoms.
    fn arrow_chain(&mut self) -> Result<Vec<(Pos, Ty)>, ParseError> {
        let mut out = vec![self.atom()?];
        while self.peek().1 == Tok::Arrow {
            self.next();
            out.push(self.atom()?);
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<(Pos, Ty), ParseError> {
        let (pos, tok) = self.next();
        let mut ty = match tok {
            Tok::LParen => {
                let mut chain = self.arrow_chain()?;
                self.expect(Tok::RParen)?;
                let (_, mut ty) = chain.pop().expect("non-empty chain");
                while let Some((_, arg)) = chain.pop() {
                    ty = Ty::fun(arg, ty);
                }
                ty
            }
            Tok::Ident(name) => match name.as_str() {
                "int" => Ty::Int,
                "bool" => Ty::Bool,
                "char" => Ty::Char,
                "string" => Ty::Str,
                "unit" => Ty::Unit,
                "t" => {
                    self.first_t.get_or_insert(pos);
                    Ty::Abstract
                }
                _ => return Err(ParseError::new(pos, format!("unknown type `{name}`"))),
            },
            other => return Err(ParseError::new(pos, format!("expected a type, found {other}"))),
        };
        loop {
            match &self.peek().1 {
                Tok::Ident(s) if s == "list" => ty = Ty::list(ty),
                Tok::Ident(s) if s == "option" => ty = Ty::option(ty),
                _ => break,
            }
            self.next();
        }
        Ok((pos, ty))
    }
}
