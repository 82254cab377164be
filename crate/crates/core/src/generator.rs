//! Type-directed random generation of well-typed expressions.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sigdsl::{OpDecl, Signature, Ty};
use crate::symexpr::{Arg, Expr, FnAst, Literal, MAX_FN_DEPTH};

pub const DEFAULT_MAX_SIZE: u64 = 30;
pub const DEFAULT_SEQ_PROBABILITY: f64 = 0.25;

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub max_size: u64,
    /// Probability of wrapping a call in `seq`. Ignored for non-mutable signatures.
    pub seq_probability: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_size: DEFAULT_MAX_SIZE, seq_probability: DEFAULT_SEQ_PROBABILITY, seed: 0 }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> Self {
        GenConfig { seed, ..Self::default() }
    }

    /// The probability actually used for `sig`: zero unless it is mutable.
    pub fn effective_seq_probability(&self, sig: &Signature) -> f64 {
        if sig.mutable {
            self.seq_probability.clamp(0.0, 1.0)
        } else {
            0.0
        }
    }
}

/// Seeded random source. ChaCha8 keeps streams stable across platforms and
/// crate versions, so a seed reproduces the same expressions everywhere.
#[derive(Clone, Debug)]
pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform draw from the closed range `[lo, hi]`.
    pub fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        self.0.gen_range(lo..=hi)
    }

    /// Uniform index in `0..n`; `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        self.0.gen_range(0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.0.gen_bool(p)
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.index(items.len())]
    }
}

/// Size used for the `trial_index`-th trial: cycles `0..=max_size`.
pub fn size_schedule(trial_index: u64, cfg: &GenConfig) -> u64 {
    trial_index % (cfg.max_size + 1)
}

/// Generate an expression of type `target`.
///
/// `target` must be `t` or one of the signature's observable types; the
/// signature must have passed validation, which guarantees a leaf
/// constructor and therefore termination.
pub fn gen_expr(target: &Ty, size: u64, sig: &Signature, cfg: &GenConfig, rng: &mut Rng) -> Expr {
    let seq_p = cfg.effective_seq_probability(sig);
    if sig.mutable && size >= 2 && seq_p > 0.0 && rng.bernoulli(seq_p) {
        let types = sig.return_types();
        let first_ty = rng.pick(&types).clone();
        let first = gen_expr(&first_ty, size / 2, sig, cfg, rng);
        let second = gen_expr(target, size / 2, sig, cfg, rng);
        return Expr::seq(first, second);
    }

    let candidates: Vec<&OpDecl> = sig.ops_returning(target).collect();
    assert!(!candidates.is_empty(), "no operation of signature {} returns {target}", sig.name);
    let leaves: Vec<&OpDecl> = candidates.iter().copied().filter(|op| op.is_leaf()).collect();
    let op = if size == 0 && !leaves.is_empty() { *rng.pick(&leaves) } else { *rng.pick(&candidates) };

    let k = op.abstract_arity() as u64;
    let sub_size = if size == 0 || k == 0 { 0 } else { (size - 1) / k };
    let args = op
        .args
        .iter()
        .map(|ty| match ty {
            Ty::Abstract => Arg::Sub(Box::new(gen_expr(&Ty::Abstract, sub_size, sig, cfg, rng))),
            Ty::Fun(..) => Arg::Fn(gen_fn_ast(size, rng)),
            other => Arg::Lit(gen_literal(other, size, rng)),
        })
        .collect();
    Expr::call(op.name.clone(), args)
}

/// A random literal of a concrete type.
pub fn gen_literal(ty: &Ty, size: u64, rng: &mut Rng) -> Literal {
    let size_i = i64::try_from(size).unwrap_or(i64::MAX);
    match ty {
        Ty::Int => Literal::Int(rng.int_in(0, size_i)),
        Ty::Bool => Literal::Bool(rng.bernoulli(0.5)),
        Ty::Char => Literal::Char(random_lower(rng)),
        Ty::Str => {
            let len = rng.int_in(0, size_i.min(6));
            Literal::Str((0..len).map(|_| random_lower(rng)).collect())
        }
        Ty::Unit => Literal::Unit,
        Ty::List(elem) => {
            let len = rng.int_in(0, size_i.min(5));
            Literal::List((0..len).map(|_| gen_literal(elem, size, rng)).collect())
        }
        Ty::Option(elem) => {
            if rng.bernoulli(0.25) {
                Literal::None
            } else {
                Literal::Some(Box::new(gen_literal(elem, size, rng)))
            }
        }
        Ty::Abstract | Ty::Fun(..) => panic!("no literal form for {ty}"),
    }
}

fn random_lower(rng: &mut Rng) -> char {
    char::from(b'a' + rng.int_in(0, 25) as u8)
}

/// A random `int -> int` function of depth at most 3.
pub fn gen_fn_ast(size: u64, rng: &mut Rng) -> FnAst {
    gen_fn_at(1, size, rng)
}

fn gen_fn_at(level: usize, size: u64, rng: &mut Rng) -> FnAst {
    let kinds = if level >= MAX_FN_DEPTH { 2 } else { 5 };
    let hi = i64::try_from(size.max(1)).unwrap_or(i64::MAX);
    match rng.index(kinds) {
        0 => FnAst::Var,
        1 => FnAst::Const(rng.int_in(0, hi)),
        kind => {
            let l = gen_fn_at(level + 1, size, rng);
            let r = gen_fn_at(level + 1, size, rng);
            match kind {
                2 => FnAst::add(l, r),
                3 => FnAst::sub(l, r),
                _ => FnAst::mul(l, r),
            }
        }
    }
}
