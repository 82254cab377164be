//! Differential property-based testing for module signatures.
//!
//! A signature file declares an abstract type `t` and its operations. From
//! it this crate derives a typed expression language, generates random
//! well-typed expressions, interprets them over two implementations, and
//! reports any expression on which they disagree at a concrete type, shrunk
//! to a small counterexample.

pub mod generator;
pub mod harness;
pub mod interp;
pub mod report;
pub mod sigdsl;
pub mod suite;
pub mod symexpr;

pub use generator::{gen_expr, gen_fn_ast, size_schedule, GenConfig, Rng};
pub use harness::{
    bench_trials_to_failure, run_differential, shrink, BenchStats, Campaign, CampaignOptions, CampaignResult,
    TrialRecord, TrialStatus,
};
pub use interp::{interp, outcome_equal, Implementation, Outcome, Value};
pub use sigdsl::{parse_signature, validate_signature, OpDecl, Signature, Ty};
pub use symexpr::{depth, eval_fn, num_seq, size_of, type_of, Arg, Expr, FnAst, Literal};
