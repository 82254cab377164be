//! A global counter: state lives in the instance and `reset` zeroes it.

use crate::interp::{Implementation, Outcome, Value};

/// Saturation bound of the `saturating` variant.
pub const SATURATION_LIMIT: i64 = 10;

#[derive(Debug, Default)]
pub struct IntCounter {
    name: &'static str,
    value: i64,
    saturating: bool,
}

impl IntCounter {
    pub fn new() -> Self {
        IntCounter { name: "int", ..Self::default() }
    }

    /// Never exceeds [`SATURATION_LIMIT`].
    pub fn saturating() -> Self {
        IntCounter { name: "saturating", saturating: true, ..Self::default() }
    }

    fn bump(&mut self, by: i64) {
        self.value = self.value.wrapping_add(by);
        if self.saturating {
            self.value = self.value.min(SATURATION_LIMIT);
        }
    }
}

impl Implementation for IntCounter {
    fn name(&self) -> &str {
        self.name
    }

    fn reset(&mut self) {
        self.value = 0;
    }

    fn apply(&mut self, op: &str, args: &[Value]) -> Outcome {
        Outcome::Ok(match op {
            "incr" => {
                self.bump(1);
                Value::Unit
            }
            "add" => {
                self.bump(args[0].as_int().expect("int argument"));
                Value::Unit
            }
            "get" => Value::Int(self.value),
            "is_zero" => Value::Bool(self.value == 0),
            other => panic!("counter: unknown operation `{other}`"),
        })
    }
}

/// Keeps a log of increments and sums it on demand.
#[derive(Debug, Default)]
pub struct ListCounter {
    log: Vec<i64>,
}

impl ListCounter {
    pub fn new() -> Self {
        Self::default()
    }

    fn total(&self) -> i64 {
        self.log.iter().fold(0i64, |acc, x| acc.wrapping_add(*x))
    }
}

impl Implementation for ListCounter {
    fn name(&self) -> &str {
        "list"
    }

    fn reset(&mut self) {
        self.log.clear();
    }

    fn apply(&mut self, op: &str, args: &[Value]) -> Outcome {
        Outcome::Ok(match op {
            "incr" => {
                self.log.push(1);
                Value::Unit
            }
            "add" => {
                self.log.push(args[0].as_int().expect("int argument"));
                Value::Unit
            }
            "get" => Value::Int(self.total()),
            "is_zero" => Value::Bool(self.total() == 0),
            other => panic!("counter: unknown operation `{other}`"),
        })
    }
}
