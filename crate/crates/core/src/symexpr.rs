//! Symbolic expressions over a signature.
//!
//! Every operation of a signature is a constructor of [`Expr`]. Arguments at
//! concrete types are literals, arguments at `t` are subexpressions, and
//! `(int -> int)` arguments are small arithmetic ASTs.
//!
//! The textual form is an s-expression: `(mem 3 (insert 3 (empty)))`,
//! `(seq (incr) (get))`, `(map (fn (add var 2)) (empty))`.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::sigdsl::{Signature, Ty};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Literal {
    Int(i64),
    Bool(bool),
    Char(char),
    Str(String),
    Unit,
    List(Vec<Literal>),
    None,
    Some(Box<Literal>),
}

impl Literal {
    /// Whether the literal inhabits `ty`. Empty lists inhabit every list type.
    pub fn has_type(&self, ty: &Ty) -> bool {
        match (self, ty) {
            (Literal::Int(_), Ty::Int)
            | (Literal::Bool(_), Ty::Bool)
            | (Literal::Char(_), Ty::Char)
            | (Literal::Str(_), Ty::Str)
            | (Literal::Unit, Ty::Unit)
            | (Literal::None, Ty::Option(_)) => true,
            (Literal::Some(v), Ty::Option(e)) => v.has_type(e),
            (Literal::List(items), Ty::List(e)) => items.iter().all(|v| v.has_type(e)),
            _ => false,
        }
    }

    fn describe(&self) -> &'static str {
        match self {
            Literal::Int(_) => "int literal",
            Literal::Bool(_) => "bool literal",
            Literal::Char(_) => "char literal",
            Literal::Str(_) => "string literal",
            Literal::Unit => "unit literal",
            Literal::List(_) => "list literal",
            Literal::None | Literal::Some(_) => "option literal",
        }
    }
}

/// A unary integer function: `var` is its parameter.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FnAst {
    Var,
    Const(i64),
    Add(Box<FnAst>, Box<FnAst>),
    Sub(Box<FnAst>, Box<FnAst>),
    Mul(Box<FnAst>, Box<FnAst>),
}

pub const MAX_FN_DEPTH: usize = 3;

#[allow(clippy::should_implement_trait)]
impl FnAst {
    pub fn add(l: FnAst, r: FnAst) -> FnAst {
        FnAst::Add(Box::new(l), Box::new(r))
    }

    pub fn sub(l: FnAst, r: FnAst) -> FnAst {
        FnAst::Sub(Box::new(l), Box::new(r))
    }

    pub fn mul(l: FnAst, r: FnAst) -> FnAst {
        FnAst::Mul(Box::new(l), Box::new(r))
    }

    /// Leaves have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            FnAst::Var | FnAst::Const(_) => 1,
            FnAst::Add(l, r) | FnAst::Sub(l, r) | FnAst::Mul(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Ordering weight used by the shrinker: `var` is simpler than any constant.
    pub fn weight(&self) -> usize {
        match self {
            FnAst::Var => 1,
            FnAst::Const(_) => 2,
            FnAst::Add(l, r) | FnAst::Sub(l, r) | FnAst::Mul(l, r) => 1 + l.weight() + r.weight(),
        }
    }
}

/// Evaluate with two's-complement wrap-around, so evaluation is total.
pub fn eval_fn(f: &FnAst, x: i64) -> i64 {
    match f {
        FnAst::Var => x,
        FnAst::Const(k) => *k,
        FnAst::Add(l, r) => eval_fn(l, x).wrapping_add(eval_fn(r, x)),
        FnAst::Sub(l, r) => eval_fn(l, x).wrapping_sub(eval_fn(r, x)),
        FnAst::Mul(l, r) => eval_fn(l, x).wrapping_mul(eval_fn(r, x)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Arg {
    Lit(Literal),
    Sub(Box<Expr>),
    Fn(FnAst),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Call { op: String, args: Vec<Arg> },
    Seq { first: Box<Expr>, second: Box<Expr> },
}

impl Expr {
    pub fn call(op: impl Into<String>, args: Vec<Arg>) -> Expr {
        Expr::Call { op: op.into(), args }
    }

    pub fn leaf(op: impl Into<String>) -> Expr {
        Expr::call(op, Vec::new())
    }

    pub fn seq(first: Expr, second: Expr) -> Expr {
        Expr::Seq { first: Box::new(first), second: Box::new(second) }
    }

    /// Child expressions: `Sub` arguments and both arms of a `Seq`.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Call { args, .. } => args
                .iter()
                .filter_map(|a| match a {
                    Arg::Sub(e) => Some(&**e),
                    _ => None,
                })
                .collect(),
            Expr::Seq { first, second } => vec![first, second],
        }
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(s: &str, sig: &Signature) -> Result<Expr, ExprError> {
        let e = parse_expr_text(s)?;
        type_of(&e, sig)?;
        Ok(e)
    }
}

pub fn depth(e: &Expr) -> usize {
    1 + e.children().into_iter().map(depth).max().unwrap_or(0)
}

/// Number of `Call` and `Seq` nodes.
pub fn size_of(e: &Expr) -> usize {
    1 + e.children().into_iter().map(size_of).sum::<usize>()
}

pub fn num_seq(e: &Expr) -> usize {
    let here = usize::from(matches!(e, Expr::Seq { .. }));
    here + e.children().into_iter().map(num_seq).sum::<usize>()
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("`{op}` expects {expected} argument(s), found {found}")]
    Arity { op: String, expected: usize, found: usize },
    #[error("`{op}` argument {position}: expected {expected}, found {found}")]
    Mismatch { op: String, position: usize, expected: Ty, found: String },
    #[error("seq is only allowed in mutable signatures")]
    SeqNotAllowed,
}

pub fn type_of(e: &Expr, sig: &Signature) -> Result<Ty, TypeError> {
    match e {
        Expr::Seq { first, second } => {
            if !sig.mutable {
                return Err(TypeError::SeqNotAllowed);
            }
            type_of(first, sig)?;
            type_of(second, sig)
        }
        Expr::Call { op, args } => {
            let decl = sig.op(op).ok_or_else(|| TypeError::UnknownOp(op.clone()))?;
            if decl.args.len() != args.len() {
                return Err(TypeError::Arity { op: op.clone(), expected: decl.args.len(), found: args.len() });
            }
            for (i, (want, arg)) in decl.args.iter().zip(args).enumerate() {
                let mismatch = |found: String| TypeError::Mismatch {
                    op: op.clone(),
                    position: i + 1,
                    expected: want.clone(),
                    found,
                };
                match (want, arg) {
                    (Ty::Abstract, Arg::Sub(sub)) => {
                        let got = type_of(sub, sig)?;
                        if got != Ty::Abstract {
                            return Err(mismatch(got.to_string()));
                        }
                    }
                    (Ty::Fun(..), Arg::Fn(_)) => {}
                    (_, Arg::Lit(lit)) if !matches!(want, Ty::Abstract | Ty::Fun(..)) => {
                        if !lit.has_type(want) {
                            return Err(mismatch(lit.describe().to_string()));
                        }
                    }
                    (_, Arg::Lit(lit)) => return Err(mismatch(lit.describe().to_string())),
                    (_, Arg::Fn(_)) => return Err(mismatch("function".to_string())),
                    (_, Arg::Sub(sub)) => {
                        let found = match type_of(sub, sig) {
                            Ok(t) => format!("expression of type {t}"),
                            Err(_) => "expression".to_string(),
                        };
                        return Err(mismatch(found));
                    }
                }
            }
            Ok(decl.ret.clone())
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(i) => write!(f, "{i}"),
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Char(c) => {
                f.write_char('\'')?;
                if matches!(c, '\'' | '\\') {
                    f.write_char('\\')?;
                }
                f.write_char(*c)?;
                f.write_char('\'')
            }
            Literal::Str(s) => {
                f.write_char('"')?;
                for c in s.chars() {
                    if matches!(c, '"' | '\\') {
                        f.write_char('\\')?;
                    }
                    f.write_char(c)?;
                }
                f.write_char('"')
            }
            Literal::Unit => f.write_str("()"),
            Literal::List(items) => {
                f.write_str("(list")?;
                for item in items {
                    write!(f, " {item}")?;
                }
                f.write_char(')')
            }
            Literal::None => f.write_str("none"),
            Literal::Some(v) => write!(f, "(some {v})"),
        }
    }
}

impl fmt::Display for FnAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FnAst::Var => f.write_str("var"),
            FnAst::Const(k) => write!(f, "{k}"),
            FnAst::Add(l, r) => write!(f, "(add {l} {r})"),
            FnAst::Sub(l, r) => write!(f, "(sub {l} {r})"),
            FnAst::Mul(l, r) => write!(f, "(mul {l} {r})"),
        }
    }
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Lit(l) => write!(f, "{l}"),
            Arg::Sub(e) => write!(f, "{e}"),
            Arg::Fn(g) => write!(f, "(fn {g})"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Call { op, args } => {
                write!(f, "({op}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_char(')')
            }
            Expr::Seq { first, second } => write!(f, "(seq {first} {second})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("column {col}: {message}")]
pub struct TextError {
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("parse error at {0}")]
    Parse(#[from] TextError),
    #[error("type error: {0}")]
    Type(#[from] TypeError),
}

/// Untyped s-expression tree.
#[derive(Clone, Debug, PartialEq)]
enum Sx {
    Atom(usize, String),
    Char(usize, char),
    Str(usize, String),
    List(usize, Vec<Sx>),
}

impl Sx {
    fn col(&self) -> usize {
        match self {
            Sx::Atom(c, _) | Sx::Char(c, _) | Sx::Str(c, _) | Sx::List(c, _) => *c,
        }
    }
}

fn text_err(col: usize, message: impl Into<String>) -> TextError {
    TextError { col, message: message.into() }
}

struct Reader {
    chars: Vec<(usize, char)>,
    at: usize,
}

impl Reader {
    fn new(src: &str) -> Self {
        Reader { chars: src.chars().enumerate().map(|(i, c)| (i + 1, c)).collect(), at: 0 }
    }

    fn col(&self) -> usize {
        self.chars.get(self.at).map_or(self.chars.len() + 1, |&(c, _)| c)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        self.at += 1;
        c
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.at += 1;
        }
    }

    fn read(&mut self) -> Result<Sx, TextError> {
        self.skip_ws();
        let col = self.col();
        match self.peek() {
            None => Err(text_err(col, "unexpected end of input")),
            Some(')') => Err(text_err(col, "unexpected `)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        None => return Err(text_err(col, "unclosed `(`")),
                        Some(')') => {
                            self.bump();
                            return Ok(Sx::List(col, items));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some('\'') => {
                self.bump();
                let c = match self.bump() {
                    Some('\\') => self.bump(),
                    other => other,
                }
                .ok_or_else(|| text_err(col, "unterminated char literal"))?;
                if self.bump() != Some('\'') {
                    return Err(text_err(col, "unterminated char literal"));
                }
                Ok(Sx::Char(col, c))
            }
            Some('"') => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(text_err(col, "unterminated string literal")),
                        Some('"') => return Ok(Sx::Str(col, s)),
                        Some('\\') => s.push(self.bump().ok_or_else(|| text_err(col, "unterminated string literal"))?),
                        Some(c) => s.push(c),
                    }
                }
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(c) = self.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | '"' | '\'') {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Ok(Sx::Atom(col, s))
            }
        }
    }
}

/// Parse the textual form without consulting a signature. Use
/// [`Expr::from_text`] to also type-check.
pub fn parse_expr_text(s: &str) -> Result<Expr, TextError> {
    let mut r = Reader::new(s);
    let sx = r.read()?;
    r.skip_ws();
    if r.peek().is_some() {
        return Err(text_err(r.col(), "trailing input"));
    }
    sx_to_expr(&sx)
}

fn sx_to_expr(sx: &Sx) -> Result<Expr, TextError> {
    let Sx::List(col, items) = sx else {
        return Err(text_err(sx.col(), "expected a parenthesized expression"));
    };
    let Some(Sx::Atom(_, head)) = items.first() else {
        return Err(text_err(*col, "expected an operation name"));
    };
    if head == "seq" {
        if items.len() != 3 {
            return Err(text_err(*col, "seq takes exactly two expressions"));
        }
        return Ok(Expr::seq(sx_to_expr(&items[1])?, sx_to_expr(&items[2])?));
    }
    if matches!(head.as_str(), "fn" | "list" | "some") || parse_atom_literal(head).is_some() {
        return Err(text_err(*col, format!("`{head}` is not an operation")));
    }
    let args = items[1..].iter().map(sx_to_arg).collect::<Result<Vec<_>, _>>()?;
    Ok(Expr::call(head.clone(), args))
}

fn sx_to_arg(sx: &Sx) -> Result<Arg, TextError> {
    if let Sx::List(col, items) = sx {
        if let Some(Sx::Atom(_, head)) = items.first() {
            if head == "fn" {
                if items.len() != 2 {
                    return Err(text_err(*col, "fn takes exactly one body"));
                }
                return Ok(Arg::Fn(sx_to_fn(&items[1])?));
            }
            if head != "list" && head != "some" {
                return Ok(Arg::Sub(Box::new(sx_to_expr(sx)?)));
            }
        }
    }
    Ok(Arg::Lit(sx_to_literal(sx)?))
}

fn parse_atom_literal(s: &str) -> Option<Literal> {
    match s {
        "true" => Some(Literal::Bool(true)),
        "false" => Some(Literal::Bool(false)),
        "none" => Some(Literal::None),
        _ => s.parse::<i64>().ok().map(Literal::Int),
    }
}

fn sx_to_literal(sx: &Sx) -> Result<Literal, TextError> {
    match sx {
        Sx::Atom(col, s) => parse_atom_literal(s).ok_or_else(|| text_err(*col, format!("invalid literal `{s}`"))),
        Sx::Char(_, c) => Ok(Literal::Char(*c)),
        Sx::Str(_, s) => Ok(Literal::Str(s.clone())),
        Sx::List(_, items) if items.is_empty() => Ok(Literal::Unit),
        Sx::List(col, items) => match &items[0] {
            Sx::Atom(_, h) if h == "list" => {
                Ok(Literal::List(items[1..].iter().map(sx_to_literal).collect::<Result<_, _>>()?))
            }
            Sx::Atom(_, h) if h == "some" && items.len() == 2 => Ok(Literal::Some(Box::new(sx_to_literal(&items[1])?))),
            _ => Err(text_err(*col, "invalid literal")),
        },
    }
}

fn sx_to_fn(sx: &Sx) -> Result<FnAst, TextError> {
    match sx {
        Sx::Atom(_, s) if s == "var" => Ok(FnAst::Var),
        Sx::Atom(col, s) => {
            s.parse().map(FnAst::Const).map_err(|_| text_err(*col, format!("invalid function term `{s}`")))
        }
        Sx::List(col, items) if items.len() == 3 => {
            let l = sx_to_fn(&items[1])?;
            let r = sx_to_fn(&items[2])?;
            match &items[0] {
                Sx::Atom(_, h) if h == "add" => Ok(FnAst::add(l, r)),
                Sx::Atom(_, h) if h == "sub" => Ok(FnAst::sub(l, r)),
                Sx::Atom(_, h) if h == "mul" => Ok(FnAst::mul(l, r)),
                _ => Err(text_err(*col, "expected add, sub or mul")),
            }
        }
        other => Err(text_err(other.col(), "invalid function term")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigdsl::parse_signature;

    fn set_sig() -> Signature {
        parse_signature(include_str!("../suites/finite_set.sig")).unwrap()
    }

    fn counter_sig() -> Signature {
        parse_signature(include_str!("../suites/counter.sig")).unwrap()
    }

    fn int(i: i64) -> Arg {
        Arg::Lit(Literal::Int(i))
    }

    fn sub(e: Expr) -> Arg {
        Arg::Sub(Box::new(e))
    }

    fn mem_insert() -> Expr {
        Expr::call("mem", vec![int(3), sub(Expr::call("insert", vec![int(3), sub(Expr::leaf("empty"))]))])
    }

    #[test]
    fn typing_examples() {
        let sig = set_sig();
        assert_eq!(type_of(&Expr::leaf("empty"), &sig), Ok(Ty::Abstract));
        assert_eq!(type_of(&mem_insert(), &sig), Ok(Ty::Bool));
        let c = counter_sig();
        assert_eq!(type_of(&Expr::seq(Expr::leaf("incr"), Expr::leaf("get")), &c), Ok(Ty::Int));
    }

    #[test]
    fn typing_errors() {
        let sig = set_sig();
        assert_eq!(type_of(&Expr::leaf("nope"), &sig), Err(TypeError::UnknownOp("nope".into())));
        assert!(matches!(type_of(&Expr::call("mem", vec![int(1)]), &sig), Err(TypeError::Arity { .. })));
        assert!(matches!(
            type_of(&Expr::call("mem", vec![sub(Expr::leaf("empty")), sub(Expr::leaf("empty"))]), &sig),
            Err(TypeError::Mismatch { position: 1, .. })
        ));
        assert_eq!(type_of(&Expr::seq(Expr::leaf("empty"), Expr::leaf("empty")), &sig), Err(TypeError::SeqNotAllowed));
        assert!(matches!(
            type_of(&Expr::call("insert", vec![Arg::Fn(FnAst::Var), sub(Expr::leaf("empty"))]), &sig),
            Err(TypeError::Mismatch { position: 1, .. })
        ));
    }

    #[test]
    fn metrics() {
        assert_eq!(depth(&Expr::leaf("empty")), 1);
        assert_eq!(size_of(&Expr::leaf("empty")), 1);
        assert_eq!(depth(&mem_insert()), 3);
        assert_eq!(size_of(&mem_insert()), 3);
        let s = Expr::seq(Expr::leaf("incr"), Expr::leaf("get"));
        assert_eq!(depth(&s), 2);
        let nested = Expr::seq(Expr::leaf("incr"), Expr::seq(Expr::leaf("incr"), Expr::leaf("get")));
        assert_eq!(size_of(&nested), 5);
        assert_eq!(num_seq(&nested), 2);
    }

    #[test]
    fn rendering() {
        assert_eq!(Expr::leaf("empty").to_text(), "(empty)");
        assert_eq!(mem_insert().to_text(), "(mem 3 (insert 3 (empty)))");
        let map = Expr::call("map", vec![Arg::Fn(FnAst::add(FnAst::Var, FnAst::Const(2))), sub(Expr::leaf("empty"))]);
        assert_eq!(map.to_text(), "(map (fn (add var 2)) (empty))");
        let lits = Expr::call(
            "f",
            vec![
                Arg::Lit(Literal::Str("a\"b\\".into())),
                Arg::Lit(Literal::Char('\'')),
                Arg::Lit(Literal::List(vec![Literal::Int(-1), Literal::Int(2)])),
                Arg::Lit(Literal::None),
                Arg::Lit(Literal::Some(Box::new(Literal::Bool(true)))),
                Arg::Lit(Literal::Unit),
            ],
        );
        let text = lits.to_text();
        assert_eq!(text, r#"(f "a\"b\\" '\'' (list -1 2) none (some true) ())"#);
        assert_eq!(parse_expr_text(&text), Ok(lits));
    }

    #[test]
    fn from_text_roundtrip_and_errors() {
        let sig = set_sig();
        assert_eq!(Expr::from_text("(empty)", &sig), Ok(Expr::leaf("empty")));
        assert_eq!(Expr::from_text(" (mem 3\n (insert 3 (empty))) ", &sig), Ok(mem_insert()));
        match Expr::from_text("(mem 3 (mem 3 (empty)))", &sig) {
            Err(ExprError::Type(TypeError::Mismatch { op, position: 2, expected: Ty::Abstract, found })) => {
                assert_eq!(op, "mem");
                assert!(found.contains("bool"), "{found}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(Expr::from_text("(mem 3 (empty)", &sig), Err(ExprError::Parse(_))));
        assert!(matches!(Expr::from_text("(empty) x", &sig), Err(ExprError::Parse(_))));
        assert!(matches!(Expr::from_text("3", &sig), Err(ExprError::Parse(_))));
    }

    #[test]
    fn fn_evaluation() {
        assert_eq!(eval_fn(&FnAst::Var, 7), 7);
        let f = FnAst::add(FnAst::mul(FnAst::Var, FnAst::Const(2)), FnAst::Const(1));
        assert_eq!(eval_fn(&f, 5), 11);
        assert_eq!(eval_fn(&FnAst::sub(FnAst::Const(i64::MIN), FnAst::Const(1)), 0), i64::MAX);
        assert_eq!(f.depth(), 3);
    }
}
