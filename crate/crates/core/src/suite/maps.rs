//! Finite maps as unbalanced binary search trees, with single-fault variants.

use std::rc::Rc;

use crate::interp::{HandleStore, Implementation, Outcome, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapBug {
    /// B1: insert returns a singleton, discarding the tree.
    InsertSingleton,
    /// B2: insert descends left when the key is greater than the node key.
    InsertWrongSubtree,
    /// B3: insert keeps the old value of an existing key.
    InsertNoOverwrite,
    /// B4: delete compares keys in reverse.
    DeleteReversed,
    /// B5: delete drops the matching node together with its subtrees.
    DeleteDropsSubtree,
    /// B6: union prefers the right map on duplicate keys.
    UnionRightBiased,
    /// B7: find compares against `key - 1`, missing keys one below a node.
    FindOffByOne,
    /// B8: keys are listed in pre-order.
    KeysPreOrder,
}

impl MapBug {
    pub const ALL: [MapBug; 8] = [
        MapBug::InsertSingleton,
        MapBug::InsertWrongSubtree,
        MapBug::InsertNoOverwrite,
        MapBug::DeleteReversed,
        MapBug::DeleteDropsSubtree,
        MapBug::UnionRightBiased,
        MapBug::FindOffByOne,
        MapBug::KeysPreOrder,
    ];
}

#[derive(Debug)]
pub enum Tree {
    Leaf,
    Node(Rc<Tree>, i64, i64, Rc<Tree>),
}

fn node(l: Rc<Tree>, k: i64, v: i64, r: Rc<Tree>) -> Rc<Tree> {
    Rc::new(Tree::Node(l, k, v, r))
}

fn leaf() -> Rc<Tree> {
    Rc::new(Tree::Leaf)
}

impl Tree {
    /// Every key is strictly between the bounds implied by its ancestors.
    pub fn is_search_tree(&self) -> bool {
        fn go(t: &Tree, lo: Option<i64>, hi: Option<i64>) -> bool {
            match t {
                Tree::Leaf => true,
                Tree::Node(l, k, _, r) => {
                    lo.is_none_or(|lo| lo < *k)
                        && hi.is_none_or(|hi| *k < hi)
                        && go(l, lo, Some(*k))
                        && go(r, Some(*k), hi)
                }
            }
        }
        go(self, None, None)
    }

    fn entries(&self, out: &mut Vec<(i64, i64)>) {
        if let Tree::Node(l, k, v, r) = self {
            l.entries(out);
            out.push((*k, *v));
            r.entries(out);
        }
    }

    fn pre_order_keys(&self, out: &mut Vec<i64>) {
        if let Tree::Node(l, k, _, r) = self {
            out.push(*k);
            l.pre_order_keys(out);
            r.pre_order_keys(out);
        }
    }
}

#[derive(Debug)]
pub struct BstMap {
    name: &'static str,
    bug: Option<MapBug>,
    store: HandleStore<Rc<Tree>>,
}

impl BstMap {
    pub fn correct() -> Self {
        BstMap { name: "correct", bug: None, store: HandleStore::default() }
    }

    pub fn with_bug(name: &'static str, bug: MapBug) -> Self {
        BstMap { name, bug: Some(bug), store: HandleStore::default() }
    }

    /// The tree behind a handle this instance issued.
    pub fn tree(&self, v: &Value) -> Option<&Rc<Tree>> {
        self.store.get(v)
    }

    fn get(&self, v: &Value) -> Rc<Tree> {
        self.store.get(v).expect("bst_map: unknown handle").clone()
    }

    fn has(&self, bug: MapBug) -> bool {
        self.bug == Some(bug)
    }

    fn insert(&self, k: i64, v: i64, t: &Rc<Tree>) -> Rc<Tree> {
        if self.has(MapBug::InsertSingleton) {
            return node(leaf(), k, v, leaf());
        }
        match &**t {
            Tree::Leaf => node(leaf(), k, v, leaf()),
            Tree::Node(l, key, val, r) if k < *key || (k > *key && self.has(MapBug::InsertWrongSubtree)) => {
                node(self.insert(k, v, l), *key, *val, r.clone())
            }
            Tree::Node(l, key, val, r) if k > *key => node(l.clone(), *key, *val, self.insert(k, v, r)),
            Tree::Node(l, key, val, r) => {
                let val = if self.has(MapBug::InsertNoOverwrite) { *val } else { v };
                node(l.clone(), *key, val, r.clone())
            }
        }
    }

    fn delete(&self, k: i64, t: &Rc<Tree>) -> Rc<Tree> {
        let Tree::Node(l, key, val, r) = &**t else {
            return t.clone();
        };
        let (go_left, go_right) =
            if self.has(MapBug::DeleteReversed) { (k > *key, k < *key) } else { (k < *key, k > *key) };
        if go_left {
            node(self.delete(k, l), *key, *val, r.clone())
        } else if go_right {
            node(l.clone(), *key, *val, self.delete(k, r))
        } else if self.has(MapBug::DeleteDropsSubtree) {
            leaf()
        } else {
            join(l, r)
        }
    }

    fn find(&self, k: i64, t: &Tree) -> Option<i64> {
        match t {
            Tree::Leaf => None,
            Tree::Node(l, key, val, r) => {
                if self.has(MapBug::FindOffByOne) {
                    let (k, key) = (i128::from(k), i128::from(*key));
                    if k + 1 < key {
                        self.find(k as i64, l)
                    } else if k > key {
                        self.find(k as i64, r)
                    } else if k == key {
                        Some(*val)
                    } else {
                        None
                    }
                } else if k < *key {
                    self.find(k, l)
                } else if k > *key {
                    self.find(k, r)
                } else {
                    Some(*val)
                }
            }
        }
    }

    fn union(&self, a: &Rc<Tree>, b: &Rc<Tree>) -> Rc<Tree> {
        // Entries of the winning side are inserted last so they overwrite.
        let (winner, base) = if self.has(MapBug::UnionRightBiased) { (b, a) } else { (a, b) };
        let mut entries = Vec::new();
        winner.entries(&mut entries);
        entries.into_iter().fold(base.clone(), |t, (k, v)| self.insert(k, v, &t))
    }
}

fn join(l: &Rc<Tree>, r: &Rc<Tree>) -> Rc<Tree> {
    match (&**l, &**r) {
        (Tree::Leaf, _) => r.clone(),
        (_, Tree::Leaf) => l.clone(),
        _ => {
            let (k, v, rest) = pop_min(r);
            node(l.clone(), k, v, rest)
        }
    }
}

fn pop_min(t: &Rc<Tree>) -> (i64, i64, Rc<Tree>) {
    match &**t {
        Tree::Leaf => unreachable!("pop_min on an empty tree"),
        Tree::Node(l, k, v, r) if matches!(**l, Tree::Leaf) => (*k, *v, r.clone()),
        Tree::Node(l, k, v, r) => {
            let (mk, mv, rest) = pop_min(l);
            (mk, mv, node(rest, *k, *v, r.clone()))
        }
    }
}

impl Implementation for BstMap {
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
                let t = self.insert(int(0), int(1), &self.get(&args[2]));
                self.store.insert(t)
            }
            "delete" => {
                let t = self.delete(int(0), &self.get(&args[1]));
                self.store.insert(t)
            }
            "find" => match self.find(int(0), &self.get(&args[1])) {
                Some(v) => Value::Some(Box::new(Value::Int(v))),
                None => Value::None,
            },
            "union" => {
                let t = self.union(&self.get(&args[0]), &self.get(&args[1]));
                self.store.insert(t)
            }
            "keys" => {
                let t = self.get(&args[0]);
                let mut keys = Vec::new();
                if self.has(MapBug::KeysPreOrder) {
                    t.pre_order_keys(&mut keys);
                } else {
                    let mut entries = Vec::new();
                    t.entries(&mut entries);
                    keys.extend(entries.into_iter().map(|(k, _)| k));
                }
                Value::int_list(keys)
            }
            "size" => {
                let mut entries = Vec::new();
                self.get(&args[0]).entries(&mut entries);
                Value::Int(entries.len() as i64)
            }
            other => panic!("bst_map: unknown operation `{other}`"),
        };
        if self.bug.is_none() {
            if let Value::Abstract(_) = v {
                debug_assert!(self.get(&v).is_search_tree(), "bst_map: `{op}` broke the search-tree invariant");
            }
        }
        Outcome::Ok(v)
    }
}
