//! Bundled case studies: signatures, reference implementations and
//! seeded-bug variants, addressable by name.

pub mod counters;
pub mod maps;
pub mod sets;

use thiserror::Error;

use crate::interp::Implementation;
use crate::sigdsl::{parse_signature, Signature};

use counters::{IntCounter, ListCounter};
use maps::{BstMap, MapBug};
use sets::{BstSet, BstSetBug, ListSet, ListSetBug};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ImplInfo {
    pub name: &'static str,
    pub description: &'static str,
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteEntry {
    pub name: &'static str,
    pub signature_source: &'static str,
    /// Correct implementations. The first one is the bench reference.
    pub implementations: &'static [ImplInfo],
    pub bug_variants: &'static [ImplInfo],
    /// Tags a `Failed` outcome may carry. None of the bundled operations is partial.
    pub failure_tags: &'static [&'static str],
}

impl SuiteEntry {
    pub fn signature(&self) -> Signature {
        parse_signature(self.signature_source).expect("bundled signature parses")
    }

    pub fn reference(&self) -> &'static str {
        self.implementations[0].name
    }

    pub fn impl_names(&self) -> impl Iterator<Item = &'static str> {
        self.implementations.iter().chain(self.bug_variants).map(|i| i.name)
    }
}

const fn info(name: &'static str, description: &'static str) -> ImplInfo {
    ImplInfo { name, description }
}

static SUITES: [SuiteEntry; 3] = [
    SuiteEntry {
        name: "finite_set",
        signature_source: include_str!("../../suites/finite_set.sig"),
        implementations: &[
            info("listset", "sorted duplicate-free list"),
            info("bstset", "unbalanced binary search tree"),
        ],
        bug_variants: &[
            info("nodedup", "listset whose insert does not deduplicate"),
            info("remove_left", "bstset whose remove only descends into the left subtree"),
            info("mem_strict", "bstset whose mem descends left on equality and never matches a node"),
        ],
        failure_tags: &[],
    },
    SuiteEntry {
        name: "bst_map",
        signature_source: include_str!("../../suites/bst_map.sig"),
        implementations: &[info("correct", "unbalanced binary search tree")],
        bug_variants: &[
            info("b1", "insert returns a singleton, discarding the tree"),
            info("b2", "insert descends into the wrong subtree when the key is larger"),
            info("b3", "insert does not overwrite the value of an existing key"),
            info("b4", "delete compares keys in reverse"),
            info("b5", "delete drops the deleted node's entire subtree"),
            info("b6", "union is right-biased on duplicate keys"),
            info("b7", "find uses an off-by-one comparison"),
            info("b8", "keys are emitted in pre-order instead of in-order"),
        ],
        failure_tags: &[],
    },
    SuiteEntry {
        name: "counter",
        signature_source: include_str!("../../suites/counter.sig"),
        implementations: &[info("int", "machine integer"), info("list", "log of increments, summed on demand")],
        bug_variants: &[info("saturating", "integer counter that saturates at 10")],
        failure_tags: &[],
    },
];

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SuiteError {
    #[error("unknown suite `{name}` (available: {available})")]
    UnknownSuite { name: String, available: String },
    #[error("suite `{suite}` has no implementation `{name}` (available: {available})")]
    UnknownImplementation { suite: String, name: String, available: String },
}

pub fn list_suites() -> &'static [SuiteEntry] {
    &SUITES
}

pub fn find_suite(name: &str) -> Result<&'static SuiteEntry, SuiteError> {
    SUITES.iter().find(|s| s.name == name).ok_or_else(|| SuiteError::UnknownSuite {
        name: name.to_string(),
        available: SUITES.iter().map(|s| s.name).collect::<Vec<_>>().join(", "),
    })
}

/// A fresh, reset instance of a bundled implementation.
pub fn get_implementation(suite: &str, name: &str) -> Result<Box<dyn Implementation>, SuiteError> {
    let entry = find_suite(suite)?;
    let imp: Option<Box<dyn Implementation>> =
        match (entry.name, name) {
            ("finite_set", "listset") => Some(Box::new(ListSet::new())),
            ("finite_set", "bstset") => Some(Box::new(BstSet::new())),
            ("finite_set", "nodedup") => Some(Box::new(ListSet::with_bug("nodedup", ListSetBug::NoDedup))),
            ("finite_set", "remove_left") => Some(Box::new(BstSet::with_bug("remove_left", BstSetBug::RemoveLeftOnly))),
            ("finite_set", "mem_strict") => Some(Box::new(BstSet::with_bug("mem_strict", BstSetBug::MemStrict))),
            ("bst_map", "correct") => Some(Box::new(BstMap::correct())),
            ("bst_map", bug) => entry.bug_variants.iter().position(|i| i.name == bug).map(|n| {
                Box::new(BstMap::with_bug(entry.bug_variants[n].name, MapBug::ALL[n])) as Box<dyn Implementation>
            }),
            ("counter", "int") => Some(Box::new(IntCounter::new())),
            ("counter", "list") => Some(Box::new(ListCounter::new())),
            ("counter", "saturating") => Some(Box::new(IntCounter::saturating())),
            _ => None,
        };
    imp.ok_or_else(|| SuiteError::UnknownImplementation {
        suite: suite.to_string(),
        name: name.to_string(),
        available: entry.impl_names().collect::<Vec<_>>().join(", "),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigdsl::validate_signature;

    #[test]
    fn bundled_suites() {
        let names: Vec<_> = list_suites().iter().map(|s| s.name).collect();
        assert_eq!(names, ["finite_set", "bst_map", "counter"]);
        let set = find_suite("finite_set").unwrap();
        assert_eq!(set.implementations.iter().map(|i| i.name).collect::<Vec<_>>(), ["listset", "bstset"]);
        assert!(set.bug_variants.len() >= 3);
        let map = find_suite("bst_map").unwrap();
        assert_eq!(map.impl_names().collect::<Vec<_>>(), ["correct", "b1", "b2", "b3", "b4", "b5", "b6", "b7", "b8"]);
    }

    #[test]
    fn every_registered_name_instantiates() {
        for s in list_suites() {
            validate_signature(&s.signature()).unwrap();
            for name in s.impl_names() {
                let imp = get_implementation(s.name, name).unwrap();
                assert_eq!(imp.name(), name);
            }
        }
    }

    #[test]
    fn unknown_names_list_alternatives() {
        let err = get_implementation("bst_map", "b9").err().unwrap();
        assert!(err.to_string().contains("correct, b1"), "{err}");
        let err = get_implementation("queue", "x").err().unwrap();
        assert!(err.to_string().contains("finite_set, bst_map, counter"), "{err}");
    }
}
