//! Values, outcomes, the [`Implementation`] contract, and the evaluator.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::sigdsl::{Signature, Ty};
use crate::symexpr::{eval_fn, Arg, Expr, FnAst, Literal};

/// Opaque token for a value of the abstract type. Only the implementation
/// that issued it can interpret it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Handle(pub u64);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Char(char),
    Str(String),
    Unit,
    List(Vec<Value>),
    None,
    Some(Box<Value>),
    Fun(FnAst),
    Abstract(Handle),
}

impl Value {
    pub fn from_literal(lit: &Literal) -> Value {
        match lit {
            Literal::Int(i) => Value::Int(*i),
            Literal::Bool(b) => Value::Bool(*b),
            Literal::Char(c) => Value::Char(*c),
            Literal::Str(s) => Value::Str(s.clone()),
            Literal::Unit => Value::Unit,
            Literal::List(items) => Value::List(items.iter().map(Value::from_literal).collect()),
            Literal::None => Value::None,
            Literal::Some(v) => Value::Some(Box::new(Value::from_literal(v))),
        }
    }

    pub fn int_list(items: impl IntoIterator<Item = i64>) -> Value {
        Value::List(items.into_iter().map(Value::Int).collect())
    }

    pub fn has_shape(&self, ty: &Ty) -> bool {
        match (self, ty) {
            (Value::Int(_), Ty::Int)
            | (Value::Bool(_), Ty::Bool)
            | (Value::Char(_), Ty::Char)
            | (Value::Str(_), Ty::Str)
            | (Value::Unit, Ty::Unit)
            | (Value::None, Ty::Option(_))
            | (Value::Fun(_), Ty::Fun(..))
            | (Value::Abstract(_), Ty::Abstract) => true,
            (Value::Some(v), Ty::Option(e)) => v.has_shape(e),
            (Value::List(items), Ty::List(e)) => items.iter().all(|v| v.has_shape(e)),
            _ => false,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_handle(&self) -> Option<Handle> {
        match self {
            Value::Abstract(h) => Some(*h),
            _ => None,
        }
    }

    /// Apply a function value. `None` if this is not a function.
    pub fn call_fn(&self, x: i64) -> Option<i64> {
        match self {
            Value::Fun(f) => Some(eval_fn(f, x)),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Char(c) => write!(f, "{}", Literal::Char(*c)),
            Value::Str(s) => write!(f, "{}", Literal::Str(s.clone())),
            Value::Unit => f.write_str("()"),
            Value::List(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            Value::None => f.write_str("None"),
            Value::Some(v) => write!(f, "Some {v}"),
            Value::Fun(g) => write!(f, "(fn {g})"),
            Value::Abstract(h) => write!(f, "<t#{}>", h.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok(Value),
    /// A partial operation refused its input; the tag names why.
    Failed(String),
}

impl Outcome {
    pub fn failed(tag: impl Into<String>) -> Outcome {
        Outcome::Failed(tag.into())
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Ok(v) => write!(f, "{v}"),
            Outcome::Failed(tag) => write!(f, "failed({tag})"),
        }
    }
}

/// One implementation of a signature, driven by operation name.
///
/// `apply` receives arguments already shaped by the signature: literals as
/// concrete values, `t` arguments as handles this instance issued since the
/// last `reset`, and function arguments as [`Value::Fun`].
pub trait Implementation {
    fn name(&self) -> &str;

    /// Return to the initial state. Handles issued before are invalidated.
    fn reset(&mut self);

    fn apply(&mut self, op: &str, args: &[Value]) -> Outcome;
}

impl<I: Implementation + ?Sized> Implementation for Box<I> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn reset(&mut self) {
        (**self).reset()
    }

    fn apply(&mut self, op: &str, args: &[Value]) -> Outcome {
        (**self).apply(op, args)
    }
}

/// Arena that hands out handles for values of an implementation's
/// representation type.
#[derive(Clone, Debug)]
pub struct HandleStore<T> {
    items: Vec<T>,
}

impl<T> Default for HandleStore<T> {
    fn default() -> Self {
        HandleStore { items: Vec::new() }
    }
}

impl<T> HandleStore<T> {
    pub fn insert(&mut self, item: T) -> Value {
        self.items.push(item);
        Value::Abstract(Handle(self.items.len() as u64 - 1))
    }

    pub fn get(&self, v: &Value) -> Option<&T> {
        v.as_handle().and_then(|h| self.items.get(h.0 as usize))
    }

    pub fn clear(&mut self) {
        self.items.clear();
    }
}

/// An implementation broke its contract: wrong result shape or a result
/// for an operation the signature does not declare.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("implementation {implementation}: `{op}` returned {got}, expected a value of type {expected}")]
pub struct HarnessBug {
    pub implementation: String,
    pub op: String,
    pub expected: Ty,
    pub got: String,
}

/// Evaluate `e` strictly, left to right. The first `Failed` short-circuits.
///
/// `e` must type-check under `sig`.
pub fn interp(e: &Expr, imp: &mut dyn Implementation, sig: &Signature) -> Result<Outcome, HarnessBug> {
    match e {
        Expr::Seq { first, second } => match interp(first, imp, sig)? {
            Outcome::Ok(_) => interp(second, imp, sig),
            failed => Ok(failed),
        },
        Expr::Call { op, args } => {
            let decl = sig.op(op).unwrap_or_else(|| panic!("`{op}` is not declared in {}", sig.name));
            let mut values = Vec::with_capacity(args.len());
            for arg in args {
                match arg {
                    Arg::Lit(l) => values.push(Value::from_literal(l)),
                    Arg::Fn(f) => values.push(Value::Fun(f.clone())),
                    Arg::Sub(sub) => match interp(sub, imp, sig)? {
                        Outcome::Ok(v) => values.push(v),
                        failed => return Ok(failed),
                    },
                }
            }
            let out = imp.apply(op, &values);
            if let Outcome::Ok(v) = &out {
                if !v.has_shape(&decl.ret) || matches!(v, Value::Fun(_)) {
                    return Err(HarnessBug {
                        implementation: imp.name().to_string(),
                        op: op.clone(),
                        expected: decl.ret.clone(),
                        got: v.to_string(),
                    });
                }
            }
            Ok(out)
        }
    }
}

static ABSTRACT_COMPARISONS: AtomicU64 = AtomicU64::new(0);

/// How many times [`outcome_equal`] was asked to compare an abstract value
/// in this process. The harness never does so; tests assert this stays 0.
pub fn abstract_comparisons() -> u64 {
    ABSTRACT_COMPARISONS.load(Ordering::Relaxed)
}

/// Observational equality of two outcomes at a concrete type.
pub fn outcome_equal(a: &Outcome, b: &Outcome, ty: &Ty) -> bool {
    if ty.is_abstract() {
        ABSTRACT_COMPARISONS.fetch_add(1, Ordering::Relaxed);
        debug_assert!(false, "outcomes compared at the abstract type");
        return false;
    }
    match (a, b) {
        (Outcome::Failed(x), Outcome::Failed(y)) => x == y,
        (Outcome::Ok(x), Outcome::Ok(y)) => value_equal(x, y, ty),
        _ => false,
    }
}

fn value_equal(a: &Value, b: &Value, ty: &Ty) -> bool {
    match (a, b, ty) {
        (Value::Abstract(_), _, _) | (_, Value::Abstract(_), _) | (_, _, Ty::Abstract) => {
            ABSTRACT_COMPARISONS.fetch_add(1, Ordering::Relaxed);
            debug_assert!(false, "abstract value reached a comparison");
            false
        }
        (_, _, Ty::Unit) => true,
        (Value::List(xs), Value::List(ys), Ty::List(e)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| value_equal(x, y, e))
        }
        (Value::Some(x), Value::Some(y), Ty::Option(e)) => value_equal(x, y, e),
        (Value::None, Value::None, Ty::Option(_)) => true,
        (Value::Int(x), Value::Int(y), Ty::Int) => x == y,
        (Value::Bool(x), Value::Bool(y), Ty::Bool) => x == y,
        (Value::Char(x), Value::Char(y), Ty::Char) => x == y,
        (Value::Str(x), Value::Str(y), Ty::Str) => x == y,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigdsl::parse_signature;

    /// Partial stack: `pop` on empty fails.
    #[derive(Default)]
    struct Stack {
        store: HandleStore<Vec<i64>>,
        log: Vec<String>,
    }

    impl Implementation for Stack {
        fn name(&self) -> &str {
            "stack"
        }

        fn reset(&mut self) {
            self.store.clear();
            self.log.clear();
        }

        fn apply(&mut self, op: &str, args: &[Value]) -> Outcome {
            self.log.push(op.to_string());
            match op {
                "nil" => Outcome::Ok(self.store.insert(Vec::new())),
                "push" => {
                    let mut s = self.store.get(&args[1]).unwrap().clone();
                    s.push(args[0].as_int().unwrap());
                    Outcome::Ok(self.store.insert(s))
                }
                "pop" => {
                    let mut s = self.store.get(&args[0]).unwrap().clone();
                    match s.pop() {
                        Some(_) => Outcome::Ok(self.store.insert(s)),
                        None => Outcome::failed("empty_pop"),
                    }
                }
                "top" => Outcome::Ok(match self.store.get(&args[0]).unwrap().last() {
                    Some(v) => Value::Some(Box::new(Value::Int(*v))),
                    None => Value::None,
                }),
                "bad" => Outcome::Ok(Value::Bool(true)),
                _ => unreachable!(),
            }
        }
    }

    fn stack_sig() -> Signature {
        parse_signature(
            "signature stack\nabstract t\nop nil : t\nop push : int -> t -> t\nop pop : t -> t\nop top : t -> int option\nop bad : int\nend",
        )
        .unwrap()
    }

    fn run(text: &str) -> Result<Outcome, HarnessBug> {
        let sig = stack_sig();
        let e = Expr::from_text(text, &sig).unwrap();
        let mut s = Stack::default();
        interp(&e, &mut s, &sig)
    }

    #[test]
    fn leaf_call_returns_handle() {
        assert!(matches!(run("(nil)"), Ok(Outcome::Ok(Value::Abstract(_)))));
    }

    #[test]
    fn nested_calls() {
        assert_eq!(run("(top (push 4 (push 3 (nil))))"), Ok(Outcome::Ok(Value::Some(Box::new(Value::Int(4))))));
    }

    #[test]
    fn failure_short_circuits() {
        let sig = stack_sig();
        let e = Expr::from_text("(top (push 1 (pop (nil))))", &sig).unwrap();
        let mut s = Stack::default();
        assert_eq!(interp(&e, &mut s, &sig), Ok(Outcome::failed("empty_pop")));
        assert_eq!(s.log, ["nil", "pop"]);
    }

    #[test]
    fn shape_violation_is_a_harness_bug() {
        let err = run("(bad)").unwrap_err();
        assert_eq!(err.op, "bad");
        assert_eq!(err.expected, Ty::Int);
    }

    #[test]
    fn equality_rules() {
        assert!(outcome_equal(&Outcome::Ok(Value::Int(5)), &Outcome::Ok(Value::Int(5)), &Ty::Int));
        assert!(!outcome_equal(&Outcome::Ok(Value::Bool(true)), &Outcome::Ok(Value::Bool(false)), &Ty::Bool));
        let tag = Outcome::failed("empty_dequeue");
        assert!(outcome_equal(&tag, &tag.clone(), &Ty::option(Ty::Int)));
        assert!(!outcome_equal(&tag, &Outcome::failed("other"), &Ty::option(Ty::Int)));
        assert!(!outcome_equal(&tag, &Outcome::Ok(Value::None), &Ty::option(Ty::Int)));
        assert!(outcome_equal(&Outcome::Ok(Value::Unit), &Outcome::Ok(Value::Unit), &Ty::Unit));
        let l = |xs: &[i64]| Outcome::Ok(Value::int_list(xs.iter().copied()));
        assert!(outcome_equal(&l(&[1, 2]), &l(&[1, 2]), &Ty::list(Ty::Int)));
        assert!(!outcome_equal(&l(&[1, 2]), &l(&[1]), &Ty::list(Ty::Int)));
        assert!(!outcome_equal(&l(&[1, 2]), &l(&[2, 1]), &Ty::list(Ty::Int)));
        assert_eq!(abstract_comparisons(), 0);
    }

    #[test]
    fn function_values_apply() {
        let f = Value::Fun(FnAst::mul(FnAst::Var, FnAst::Var));
        assert_eq!(f.call_fn(7), Some(49));
        assert_eq!(Value::Int(1).call_fn(7), None);
    }
}
