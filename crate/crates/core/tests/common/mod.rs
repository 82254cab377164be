//! Test-only oracles: bounded enumerators of well-typed expressions and
//! naive reference models, written independently of the generator,
//! type checker and bundled implementations.

#![allow(dead_code)]

use std::collections::BTreeMap;

use specdiff::interp::{HandleStore, Implementation, Outcome, Value};
use specdiff::{Arg, Expr, FnAst, Literal, Signature, Ty};

/// Small literal domain for a concrete type.
pub fn literal_domain(ty: &Ty, ints: &[i64]) -> Vec<Literal> {
    match ty {
        Ty::Int => ints.iter().map(|i| Literal::Int(*i)).collect(),
        Ty::Bool => vec![Literal::Bool(false), Literal::Bool(true)],
        Ty::Unit => vec![Literal::Unit],
        Ty::Char => vec![Literal::Char('a')],
        Ty::Str => vec![Literal::Str(String::new())],
        Ty::Option(e) => {
            let mut v = vec![Literal::None];
            v.extend(literal_domain(e, ints).into_iter().map(|l| Literal::Some(Box::new(l))));
            v
        }
        Ty::List(e) => {
            let mut v = vec![Literal::List(vec![])];
            v.extend(literal_domain(e, ints).into_iter().map(|l| Literal::List(vec![l])));
            v
        }
        Ty::Abstract | Ty::Fun(..) => unreachable!(),
    }
}

fn cartesian(choices: &[Vec<Arg>]) -> Vec<Vec<Arg>> {
    let mut acc: Vec<Vec<Arg>> = vec![Vec::new()];
    for options in choices {
        let mut next = Vec::with_capacity(acc.len() * options.len());
        for prefix in &acc {
            for o in options {
                let mut p = prefix.clone();
                p.push(o.clone());
                next.push(p);
            }
        }
        acc = next;
    }
    acc
}

/// All well-typed expressions of type `ty` with depth at most `max_depth`,
/// literals from `ints`, and `var` as the only function.
pub fn enumerate_by_depth(sig: &Signature, ty: &Ty, max_depth: usize, ints: &[i64]) -> Vec<Expr> {
    if max_depth == 0 {
        return Vec::new();
    }
    let subs: Vec<Arg> = enumerate_by_depth(sig, &Ty::Abstract, max_depth - 1, ints)
        .into_iter()
        .map(|e| Arg::Sub(Box::new(e)))
        .collect();
    let mut out = Vec::new();
    for op in sig.ops.iter().filter(|o| &o.ret == ty) {
        let choices: Vec<Vec<Arg>> = op
            .args
            .iter()
            .map(|a| match a {
                Ty::Abstract => subs.clone(),
                Ty::Fun(..) => vec![Arg::Fn(FnAst::Var)],
                other => literal_domain(other, ints).into_iter().map(Arg::Lit).collect(),
            })
            .collect();
        for args in cartesian(&choices) {
            out.push(Expr::call(op.name.clone(), args));
        }
    }
    if sig.mutable {
        let firsts: Vec<Expr> =
            sig.return_types().iter().flat_map(|t| enumerate_by_depth(sig, t, max_depth - 1, ints)).collect();
        let seconds = enumerate_by_depth(sig, ty, max_depth - 1, ints);
        for f in &firsts {
            for s in &seconds {
                out.push(Expr::seq(f.clone(), s.clone()));
            }
        }
    }
    out
}

/// Ways to write `total` as an ordered sum of `parts` positive integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All well-typed expressions of type `ty` with exactly `size` Call/Seq nodes.
pub fn enumerate_by_size(sig: &Signature, ty: &Ty, size: usize, ints: &[i64]) -> Vec<Expr> {
    let mut memo = BTreeMap::new();
    enum_size(sig, ty, size, ints, &mut memo)
}

fn enum_size(
    sig: &Signature,
    ty: &Ty,
    size: usize,
    ints: &[i64],
    memo: &mut BTreeMap<(Ty, usize), Vec<Expr>>,
) -> Vec<Expr> {
    if size == 0 {
        return Vec::new();
    }
    if let Some(v) = memo.get(&(ty.clone(), size)) {
        return v.clone();
    }
    let mut out = Vec::new();
    for op in sig.ops.iter().filter(|o| &o.ret == ty) {
        let k = op.abstract_arity();
        for split in compositions(size - 1, k) {
            let mut split_iter = split.into_iter();
            let mut choices = Vec::new();
            for a in &op.args {
                choices.push(match a {
                    Ty::Abstract => {
                        let n = split_iter.next().unwrap();
                        enum_size(sig, &Ty::Abstract, n, ints, memo)
                            .into_iter()
                            .map(|e| Arg::Sub(Box::new(e)))
                            .collect()
                    }
                    Ty::Fun(..) => vec![Arg::Fn(FnAst::Var)],
                    other => literal_domain(other, ints).into_iter().map(Arg::Lit).collect(),
                });
            }
            for args in cartesian(&choices) {
                out.push(Expr::call(op.name.clone(), args));
            }
        }
    }
    if sig.mutable && size >= 3 {
        for first_size in 1..size - 1 {
            let second_size = size - 1 - first_size;
            let seconds = enum_size(sig, ty, second_size, ints, memo);
            for t in sig.return_types() {
                for f in enum_size(sig, &t, first_size, ints, memo) {
                    for s in &seconds {
                        out.push(Expr::seq(f.clone(), s.clone()));
                    }
                }
            }
        }
    }
    memo.insert((ty.clone(), size), out.clone());
    out
}

/// Evaluate `e` on a fresh `imp` without the crate's interpreter.
pub fn naive_eval(e: &Expr, imp: &mut dyn Implementation) -> Outcome {
    fn go(e: &Expr, imp: &mut dyn Implementation) -> Outcome {
        match e {
            Expr::Seq { first, second } => match go(first, imp) {
                Outcome::Ok(_) => go(second, imp),
                f => f,
            },
            Expr::Call { op, args } => {
                let mut vals = Vec::new();
                for a in args {
                    vals.push(match a {
                        Arg::Lit(l) => Value::from_literal(l),
                        Arg::Fn(f) => Value::Fun(f.clone()),
                        Arg::Sub(s) => match go(s, imp) {
                            Outcome::Ok(v) => v,
                            f => return f,
                        },
                    });
                }
                imp.apply(op, &vals)
            }
        }
    }
    imp.reset();
    go(e, imp)
}

/// First expression (smallest size first) of an observable type on which
/// the two implementations disagree.
pub fn find_witness(
    sig: &Signature,
    observable: &[Ty],
    a: &mut dyn Implementation,
    b: &mut dyn Implementation,
    max_size: usize,
    ints: &[i64],
) -> Option<(Expr, Ty)> {
    for size in 1..=max_size {
        for ty in observable {
            for e in enumerate_by_size(sig, ty, size, ints) {
                if naive_eval(&e, a) != naive_eval(&e, b) {
                    return Some((e, ty.clone()));
                }
            }
        }
    }
    None
}

/// Association list: newest binding first, lookups take the first match.
#[derive(Default)]
pub struct AssocMap {
    store: HandleStore<Vec<(i64, i64)>>,
}

impl AssocMap {
    fn get(&self, v: &Value) -> Vec<(i64, i64)> {
        self.store.get(v).unwrap().clone()
    }

    fn find(m: &[(i64, i64)], k: i64) -> Option<i64> {
        m.iter().find(|(key, _)| *key == k).map(|(_, v)| *v)
    }

    fn keys(m: &[(i64, i64)]) -> Vec<i64> {
        let mut ks: Vec<i64> = m.iter().map(|(k, _)| *k).collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }
}

impl Implementation for AssocMap {
    fn name(&self) -> &str {
        "assoc"
    }

    fn reset(&mut self) {
        self.store.clear();
    }

    fn apply(&mut self, op: &str, args: &[Value]) -> Outcome {
        let int = |i: usize| args[i].as_int().unwrap();
        Outcome::Ok(match op {
            "empty" => self.store.insert(vec![]),
            "insert" => {
                let mut m = self.get(&args[2]);
                m.insert(0, (int(0), int(1)));
                self.store.insert(m)
            }
            "delete" => {
                let m: Vec<_> = self.get(&args[1]).into_iter().filter(|(k, _)| *k != int(0)).collect();
                self.store.insert(m)
            }
            "find" => match Self::find(&self.get(&args[1]), int(0)) {
                Some(v) => Value::Some(Box::new(Value::Int(v))),
                None => Value::None,
            },
            "union" => {
                let mut m = self.get(&args[0]);
                m.extend(self.get(&args[1]));
                self.store.insert(m)
            }
            "keys" => Value::int_list(Self::keys(&self.get(&args[0]))),
            "size" => Value::Int(Self::keys(&self.get(&args[0])).len() as i64),
            _ => unreachable!(),
        })
    }
}

/// Unsorted vector with duplicates; observations normalize.
#[derive(Default)]
pub struct ModelSet {
    store: HandleStore<Vec<i64>>,
}

impl ModelSet {
    fn norm(&self, v: &Value) -> Vec<i64> {
        let mut xs = self.store.get(v).unwrap().clone();
        xs.sort_unstable();
        xs.dedup();
        xs
    }
}

impl Implementation for ModelSet {
    fn name(&self) -> &str {
        "model"
    }

    fn reset(&mut self) {
        self.store.clear();
    }

    fn apply(&mut self, op: &str, args: &[Value]) -> Outcome {
        let int = |i: usize| args[i].as_int().unwrap();
        Outcome::Ok(match op {
            "empty" => self.store.insert(vec![]),
            "insert" => {
                let mut s = self.store.get(&args[1]).unwrap().clone();
                s.push(int(0));
                self.store.insert(s)
            }
            "remove" => {
                let s: Vec<i64> = self.store.get(&args[1]).unwrap().iter().copied().filter(|x| *x != int(0)).collect();
                self.store.insert(s)
            }
            "mem" => Value::Bool(self.store.get(&args[1]).unwrap().contains(&int(0))),
            "size" => Value::Int(self.norm(&args[0]).len() as i64),
            "union" => {
                let mut s = self.store.get(&args[0]).unwrap().clone();
                s.extend(self.store.get(&args[1]).unwrap());
                self.store.insert(s)
            }
            "to_list" => Value::int_list(self.norm(&args[0])),
            _ => unreachable!(),
        })
    }
}

/// Counter modeled as a plain integer updated by i128 arithmetic reduced mod 2^64.
#[derive(Default)]
pub struct ModelCounter {
    value: i128,
}

impl Implementation for ModelCounter {
    fn name(&self) -> &str {
        "model"
    }

    fn reset(&mut self) {
        self.value = 0;
    }

    fn apply(&mut self, op: &str, args: &[Value]) -> Outcome {
        let wrap = |x: i128| x as i64;
        Outcome::Ok(match op {
            "incr" => {
                self.value = i128::from(wrap(self.value + 1));
                Value::Unit
            }
            "add" => {
                self.value = i128::from(wrap(self.value + i128::from(args[0].as_int().unwrap())));
                Value::Unit
            }
            "get" => Value::Int(wrap(self.value)),
            "is_zero" => Value::Bool(self.value == 0),
            _ => unreachable!(),
        })
    }
}
