//! Finite sets of integers: a sorted list and an unbalanced BST.

use std::rc::Rc;

use crate::interp::{HandleStore, Implementation, Outcome, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ListSetBug {
    /// `insert` keeps duplicates, so `size` and `to_list` over-count.
    NoDedup,
}

/// Sorted, duplicate-free vector.
#[derive(Debug, Default)]
pub struct ListSet {
    name: &'static str,
    bug: Option<ListSetBug>,
    store: HandleStore<Vec<i64>>,
}

impl ListSet {
    pub fn new() -> Self {
        ListSet { name: "listset", ..Self::default() }
    }

    pub fn with_bug(name: &'static str, bug: ListSetBug) -> Self {
        ListSet { name, bug: Some(bug), ..Self::default() }
    }

    fn insert(&self, k: i64, set: &[i64]) -> Vec<i64> {
        let mut out = set.to_vec();
        match (set.binary_search(&k), self.bug) {
            (Ok(_), None) => {}
            (Ok(i) | Err(i), _) => out.insert(i, k),
        }
        out
    }

    fn set(&self, v: &Value) -> &[i64] {
        self.store.get(v).expect("listset: unknown handle")
    }
}

impl Implementation for ListSet {
    fn name(&self) -> &str {
        self.name
    }

    fn reset(&mut self) {
        self.store.clear();
    }

    fn apply(&mut self, op: &str, args: &[Value]) -> Outcome {
        let int = |i: usize| args[i].as_int().expect("int argument");
        let v = match op {
            "empty" => self.store.insert(Vec::new()),
            "insert" => {
                let s = self.insert(int(0), self.set(&args[1]));
                self.store.insert(s)
            }
            "remove" => {
                let k = int(0);
                let s: Vec<i64> = self.set(&args[1]).iter().copied().filter(|x| *x != k).collect();
                self.store.insert(s)
            }
            "mem" => Value::Bool(self.set(&args[1]).binary_search(&int(0)).is_ok()),
            "size" => Value::Int(self.set(&args[0]).len() as i64),
            "union" => {
                let mut s = self.set(&args[0]).to_vec();
                for &x in self.set(&args[1]) {
                    s = self.insert(x, &s);
                }
                self.store.insert(s)
            }
            "to_list" => Value::int_list(self.set(&args[0]).iter().copied()),
            other => panic!("listset: unknown operation `{other}`"),
        };
        Outcome::Ok(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BstSetBug {
    /// `remove` only ever descends into the left subtree.
    RemoveLeftOnly,
    /// `mem` descends left on `k <= key` and never matches at a node.
    MemStrict,
}

#[derive(Debug)]
enum Tree {
    Leaf,
    Node(Rc<Tree>, i64, Rc<Tree>),
}

fn node(l: Rc<Tree>, k: i64, r: Rc<Tree>) -> Rc<Tree> {
    Rc::new(Tree::Node(l, k, r))
}

fn leaf() -> Rc<Tree> {
    Rc::new(Tree::Leaf)
}

/// Persistent unbalanced binary search tree.
#[derive(Debug, Default)]
pub struct BstSet {
    name: &'static str,
    bug: Option<BstSetBug>,
    store: HandleStore<Rc<Tree>>,
}

impl BstSet {
    pub fn new() -> Self {
        BstSet { name: "bstset", ..Self::default() }
    }

    pub fn with_bug(name: &'static str, bug: BstSetBug) -> Self {
        BstSet { name, bug: Some(bug), ..Self::default() }
    }

    fn tree(&self, v: &Value) -> Rc<Tree> {
        self.store.get(v).expect("bstset: unknown handle").clone()
    }

    fn insert(k: i64, t: &Rc<Tree>) -> Rc<Tree> {
        match &**t {
            Tree::Leaf => node(leaf(), k, leaf()),
            Tree::Node(l, key, r) if k < *key => node(Self::insert(k, l), *key, r.clone()),
            Tree::Node(l, key, r) if k > *key => node(l.clone(), *key, Self::insert(k, r)),
            Tree::Node(..) => t.clone(),
        }
    }

    fn remove(&self, k: i64, t: &Rc<Tree>) -> Rc<Tree> {
        match &**t {
            Tree::Leaf => t.clone(),
            Tree::Node(l, key, r) if k < *key || (k > *key && self.bug == Some(BstSetBug::RemoveLeftOnly)) => {
                node(self.remove(k, l), *key, r.clone())
            }
            Tree::Node(l, key, r) if k > *key => node(l.clone(), *key, self.remove(k, r)),
            Tree::Node(l, _, r) => join(l, r),
        }
    }

    fn mem(&self, k: i64, t: &Tree) -> bool {
        match t {
            Tree::Leaf => false,
            Tree::Node(l, key, r) => match self.bug {
                Some(BstSetBug::MemStrict) => {
                    if k <= *key {
                        self.mem(k, l)
                    } else {
                        self.mem(k, r)
                    }
                }
                _ => k == *key || self.mem(k, if k < *key { l } else { r }),
            },
        }
    }
}

/// Join two trees whose keys are ordered left < right.
fn join(l: &Rc<Tree>, r: &Rc<Tree>) -> Rc<Tree> {
    match (&**l, &**r) {
        (Tree::Leaf, _) => r.clone(),
        (_, Tree::Leaf) => l.clone(),
        _ => {
            let (min, rest) = pop_min(r);
            node(l.clone(), min, rest)
        }
    }
}

fn pop_min(t: &Rc<Tree>) -> (i64, Rc<Tree>) {
    match &**t {
        Tree::Leaf => unreachable!("pop_min on an empty tree"),
        Tree::Node(l, k, r) if matches!(**l, Tree::Leaf) => (*k, r.clone()),
        Tree::Node(l, k, r) => {
            let (min, rest) = pop_min(l);
            (min, node(rest, *k, r.clone()))
        }
    }
}

fn in_order(t: &Tree, out: &mut Vec<i64>) {
    if let Tree::Node(l, k, r) = t {
        in_order(l, out);
        out.push(*k);
        in_order(r, out);
    }
}

impl Implementation for BstSet {
    fn name(&self) -> &str {
        self.name
    }

    fn reset(&mut self) {
        self.store.clear();
    }

    fn apply(&mut self, op: &str, args: &[Value]) -> Outcome {
        let int = |i: usize| args[i].as_int().expect("int argument");
        let v = match op {
            "empty" => self.store.insert(leaf()),
            "insert" => {
                let t = Self::insert(int(0), &self.tree(&args[1]));
                self.store.insert(t)
            }
            "remove" => {
                let t = self.remove(int(0), &self.tree(&args[1]));
                self.store.insert(t)
            }
            "mem" => Value::Bool(self.mem(int(0), &self.tree(&args[1]))),
            "size" => {
                let mut xs = Vec::new();
                in_order(&self.tree(&args[0]), &mut xs);
                Value::Int(xs.len() as i64)
            }
            "union" => {
                let mut xs = Vec::new();
                in_order(&self.tree(&args[1]), &mut xs);
                let t = xs.into_iter().fold(self.tree(&args[0]), |t, x| Self::insert(x, &t));
                self.store.insert(t)
            }
            "to_list" => {
                let mut xs = Vec::new();
                in_order(&self.tree(&args[0]), &mut xs);
                Value::int_list(xs)
            }
            other => panic!("bstset: unknown operation `{other}`"),
        };
        Outcome::Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(imp: &mut dyn Implementation, ops: &[(&str, i64)]) -> Value {
        let mut t = imp.apply("empty", &[]);
        for (op, k) in ops {
            let Outcome::Ok(h) = t else { unreachable!() };
            t = imp.apply(op, &[Value::Int(*k), h]);
        }
        let Outcome::Ok(h) = t else { unreachable!() };
        match imp.apply("to_list", &[h]) {
            Outcome::Ok(v) => v,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn both_sets_agree_on_a_script() {
        let script =
            [("insert", 5), ("insert", 1), ("insert", 9), ("insert", 5), ("remove", 1), ("insert", 3), ("remove", 7)];
        let expected = Value::int_list([3, 5, 9]);
        assert_eq!(ints(&mut ListSet::new(), &script), expected);
        assert_eq!(ints(&mut BstSet::new(), &script), expected);
    }

    #[test]
    fn remove_root_with_two_children() {
        let script = [("insert", 5), ("insert", 2), ("insert", 8), ("insert", 7), ("insert", 9), ("remove", 5)];
        assert_eq!(ints(&mut BstSet::new(), &script), Value::int_list([2, 7, 8, 9]));
    }

    #[test]
    fn bugs_show_up() {
        assert_eq!(
            ints(&mut ListSet::with_bug("nodedup", ListSetBug::NoDedup), &[("insert", 1), ("insert", 1)]),
            Value::int_list([1, 1])
        );
        let mut b = BstSet::with_bug("remove_left", BstSetBug::RemoveLeftOnly);
        assert_eq!(ints(&mut b, &[("insert", 0), ("insert", 1), ("remove", 1)]), Value::int_list([0, 1]));
    }
}
