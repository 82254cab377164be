//! Differential test driver: generate, interpret over two implementations,
//! compare at concrete types, shrink what fails, count trials to failure.

use std::thread;

use crate::generator::{gen_expr, size_schedule, GenConfig, Rng};
use crate::interp::{interp, outcome_equal, HarnessBug, Implementation, Outcome};
use crate::sigdsl::{validate_signature, Signature, Ty, ValidationError};
use crate::symexpr::{depth, num_seq, size_of, type_of, Arg, Expr, FnAst, Literal};

/// Upper bound on accepted shrink steps.
pub const MAX_SHRINK_STEPS: usize = 1000;

pub const DEFAULT_TRIAL_CAP: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrialStatus {
    Passed,
    Failed,
    HarnessBug,
}

impl TrialStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TrialStatus::Passed => "passed",
            TrialStatus::Failed => "failed",
            TrialStatus::HarnessBug => "harness_bug",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub observable_type: Ty,
    pub expr_text: String,
    pub depth: usize,
    pub size: usize,
    pub num_seq: usize,
    /// Seed of this trial's generator, derived from the campaign seed.
    pub seed: u64,
    pub status: TrialStatus,
    /// Rendered outcomes; present unless the trial passed.
    pub outcome_a: Option<String>,
    pub outcome_b: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub record: TrialRecord,
    pub shrunk_text: String,
}

/// Seed, trial count and first-failure index of one campaign.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunSummary {
    pub seed: u64,
    pub total_trials: u64,
    pub failures: u64,
    pub trials_to_first_failure: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CampaignResult {
    pub signature: String,
    /// `"<signature>:<impl a>~<impl b>"`.
    pub label: String,
    pub seed: u64,
    pub total_trials: u64,
    pub records: Vec<TrialRecord>,
    pub failures: Vec<Failure>,
    pub harness_bugs: u64,
    /// One-based index of the first failing trial.
    pub trials_to_first_failure: Option<u64>,
    pub per_type: Vec<(Ty, u64)>,
}

impl CampaignResult {
    pub fn summary(&self) -> RunSummary {
        RunSummary {
            seed: self.seed,
            total_trials: self.total_trials,
            failures: self.failures.len() as u64,
            trials_to_first_failure: self.trials_to_first_failure,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.harness_bugs == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CampaignOptions {
    pub stop_on_failure: bool,
    pub shrink: bool,
    /// Worker threads; 1 runs on the calling thread.
    pub jobs: usize,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        CampaignOptions { stop_on_failure: false, shrink: true, jobs: 1 }
    }
}

/// Builds a fresh implementation instance; used when trials run on worker threads.
pub type ImplFactory<'a> = dyn Fn() -> Box<dyn Implementation> + Sync + 'a;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator seed for trial `index` of a campaign seeded with `seed`:
/// `mix64(seed + mix64(index))`, wrapping. Independent of execution order.
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    mix64(seed.wrapping_add(mix64(index)))
}

/// Run `e` on both implementations from a fresh state.
pub fn evaluate_pair(
    e: &Expr,
    sig: &Signature,
    a: &mut dyn Implementation,
    b: &mut dyn Implementation,
) -> (Result<Outcome, HarnessBug>, Result<Outcome, HarnessBug>) {
    a.reset();
    let oa = interp(e, a, sig);
    b.reset();
    let ob = interp(e, b, sig);
    (oa, ob)
}

/// True if `e` has type `ty` and the two implementations disagree on it.
pub fn still_fails(e: &Expr, ty: &Ty, sig: &Signature, a: &mut dyn Implementation, b: &mut dyn Implementation) -> bool {
    if type_of(e, sig).as_ref() != Ok(ty) {
        return false;
    }
    match evaluate_pair(e, sig, a, b) {
        (Ok(x), Ok(y)) => !outcome_equal(&x, &y, ty),
        _ => false,
    }
}

/// A validated signature ready to drive campaigns.
#[derive(Clone, Debug)]
pub struct Campaign {
    sig: Signature,
    observable: Vec<Ty>,
}

impl Campaign {
    pub fn new(sig: Signature) -> Result<Self, ValidationError> {
        let report = validate_signature(&sig)?;
        Ok(Campaign { sig, observable: report.observable })
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn observable(&self) -> &[Ty] {
        &self.observable
    }

    /// Observable type of trial `index`, chosen round-robin.
    pub fn trial_type(&self, index: u64) -> &Ty {
        &self.observable[(index % self.observable.len() as u64) as usize]
    }

    /// The expression trial `index` tests.
    pub fn trial_expr(&self, index: u64, cfg: &GenConfig) -> Expr {
        let mut rng = Rng::new(trial_seed(cfg.seed, index));
        gen_expr(self.trial_type(index), size_schedule(index, cfg), &self.sig, cfg, &mut rng)
    }

    fn trial(
        &self,
        index: u64,
        cfg: &GenConfig,
        opts: &CampaignOptions,
        a: &mut dyn Implementation,
        b: &mut dyn Implementation,
    ) -> (TrialRecord, Option<String>) {
        let ty = self.trial_type(index).clone();
        let e = self.trial_expr(index, cfg);
        let (oa, ob) = evaluate_pair(&e, &self.sig, a, b);
        let (status, outcome_a, outcome_b) = match (&oa, &ob) {
            (Ok(x), Ok(y)) if outcome_equal(x, y, &ty) => (TrialStatus::Passed, None, None),
            (Ok(x), Ok(y)) => (TrialStatus::Failed, Some(x.to_string()), Some(y.to_string())),
            _ => {
                let render = |o: &Result<Outcome, HarnessBug>| match o {
                    Ok(x) => x.to_string(),
                    Err(bug) => format!("harness bug: {bug}"),
                };
                (TrialStatus::HarnessBug, Some(render(&oa)), Some(render(&ob)))
            }
        };
        let shrunk = (status == TrialStatus::Failed).then(|| {
            if opts.shrink {
                self.shrink(&e, &ty, a, b).to_text()
            } else {
                e.to_text()
            }
        });
        let record = TrialRecord {
            trial_index: index,
            observable_type: ty,
            expr_text: e.to_text(),
            depth: depth(&e),
            size: size_of(&e),
            num_seq: num_seq(&e),
            seed: trial_seed(cfg.seed, index),
            status,
            outcome_a,
            outcome_b,
        };
        (record, shrunk)
    }

    /// Run `trials` trials on the calling thread.
    pub fn run(
        &self,
        a: &mut dyn Implementation,
        b: &mut dyn Implementation,
        trials: u64,
        cfg: &GenConfig,
        opts: &CampaignOptions,
    ) -> CampaignResult {
        let mut out = Vec::new();
        for i in 0..trials {
            let (record, shrunk) = self.trial(i, cfg, opts, a, b);
            let stop = opts.stop_on_failure && record.status == TrialStatus::Failed;
            out.push((record, shrunk));
            if stop {
                break;
            }
        }
        self.collect(format!("{}~{}", a.name(), b.name()), cfg, out)
    }

    /// Like [`Campaign::run`], spreading trials over `opts.jobs` threads.
    /// The result is identical to a sequential run with the same inputs.
    pub fn run_parallel(
        &self,
        make_a: &ImplFactory<'_>,
        make_b: &ImplFactory<'_>,
        trials: u64,
        cfg: &GenConfig,
        opts: &CampaignOptions,
    ) -> CampaignResult {
        let jobs = opts.jobs.max(1) as u64;
        let names = format!("{}~{}", make_a().name(), make_b().name());
        let mut out: Vec<(TrialRecord, Option<String>)> = thread::scope(|s| {
            let workers: Vec<_> = (0..jobs)
                .map(|j| {
                    s.spawn(move || {
                        let (mut a, mut b) = (make_a(), make_b());
                        let mut part = Vec::new();
                        let mut i = j;
                        while i < trials {
                            let (record, shrunk) = self.trial(i, cfg, opts, &mut *a, &mut *b);
                            let stop = opts.stop_on_failure && record.status == TrialStatus::Failed;
                            part.push((record, shrunk));
                            if stop {
                                break;
                            }
                            i += jobs;
                        }
                        part
                    })
                })
                .collect();
            workers.into_iter().flat_map(|w| w.join().expect("trial worker panicked")).collect()
        });
        out.sort_by_key(|(r, _)| r.trial_index);
        if opts.stop_on_failure {
            if let Some(pos) = out.iter().position(|(r, _)| r.status == TrialStatus::Failed) {
                out.truncate(pos + 1);
            }
        }
        self.collect(names, cfg, out)
    }

    fn collect(&self, names: String, cfg: &GenConfig, out: Vec<(TrialRecord, Option<String>)>) -> CampaignResult {
        let mut per_type: Vec<(Ty, u64)> = self.observable.iter().map(|t| (t.clone(), 0)).collect();
        let mut records = Vec::with_capacity(out.len());
        let mut failures = Vec::new();
        let mut harness_bugs = 0;
        for (record, shrunk) in out {
            if let Some(slot) = per_type.iter_mut().find(|(t, _)| *t == record.observable_type) {
                slot.1 += 1;
            }
            match record.status {
                TrialStatus::Failed => failures.push(Failure {
                    record: record.clone(),
                    shrunk_text: shrunk.expect("failed trials carry a shrunk form"),
                }),
                TrialStatus::HarnessBug => harness_bugs += 1,
                TrialStatus::Passed => {}
            }
            records.push(record);
        }
        CampaignResult {
            signature: self.sig.name.clone(),
            label: format!("{}:{names}", self.sig.name),
            seed: cfg.seed,
            total_trials: records.len() as u64,
            trials_to_first_failure: failures.first().map(|f| f.record.trial_index + 1),
            records,
            failures,
            harness_bugs,
            per_type,
        }
    }

    /// Greedily minimize a failing expression.
    ///
    /// Candidates, tried in this order at each step: a same-typed
    /// subexpression in place of the whole; `seq` collapsed to either arm;
    /// a `t` subtree replaced by the smallest leaf constructor; an int
    /// literal set to 0 or halved; a function argument set to `var` or `0`.
    /// A candidate is taken if it still fails and is strictly smaller by
    /// (node count, function weight, total literal magnitude).
    pub fn shrink(&self, e: &Expr, ty: &Ty, a: &mut dyn Implementation, b: &mut dyn Implementation) -> Expr {
        let leaf = self.smallest_leaf();
        let mut current = e.clone();
        for _ in 0..MAX_SHRINK_STEPS {
            let measure = shrink_measure(&current);
            let next = shrink_candidates(&current, leaf.as_ref())
                .into_iter()
                .find(|c| shrink_measure(c) < measure && still_fails(c, ty, &self.sig, a, b));
            match next {
                Some(c) => current = c,
                None => break,
            }
        }
        current
    }

    fn smallest_leaf(&self) -> Option<Expr> {
        let op = self.sig.ops.iter().filter(|o| o.ret.is_abstract() && o.is_leaf()).min_by_key(|o| o.args.len())?;
        let args = op
            .args
            .iter()
            .map(|t| match t {
                Ty::Fun(..) => Arg::Fn(FnAst::Var),
                other => Arg::Lit(minimal_literal(other)),
            })
            .collect();
        Some(Expr::call(op.name.clone(), args))
    }
}

fn minimal_literal(ty: &Ty) -> Literal {
    match ty {
        Ty::Int => Literal::Int(0),
        Ty::Bool => Literal::Bool(false),
        Ty::Char => Literal::Char('a'),
        Ty::Str => Literal::Str(String::new()),
        Ty::List(_) => Literal::List(Vec::new()),
        Ty::Option(_) => Literal::None,
        _ => Literal::Unit,
    }
}

fn shrink_measure(e: &Expr) -> (usize, usize, u128) {
    fn lit_mag(l: &Literal) -> u128 {
        match l {
            Literal::Int(i) => u128::from(i.unsigned_abs()),
            Literal::List(items) => items.iter().map(lit_mag).sum(),
            Literal::Some(v) => lit_mag(v),
            _ => 0,
        }
    }
    fn walk(e: &Expr, fw: &mut usize, mag: &mut u128) {
        if let Expr::Call { args, .. } = e {
            for a in args {
                match a {
                    Arg::Lit(l) => *mag += lit_mag(l),
                    Arg::Fn(f) => *fw += f.weight(),
                    Arg::Sub(_) => {}
                }
            }
        }
        for c in e.children() {
            walk(c, fw, mag);
        }
    }
    let (mut fw, mut mag) = (0, 0);
    walk(e, &mut fw, &mut mag);
    (size_of(e), fw, mag)
}

fn shrink_candidates(e: &Expr, leaf: Option<&Expr>) -> Vec<Expr> {
    let mut out = Vec::new();
    let mut descendants = Vec::new();
    collect_descendants(e, &mut descendants);
    out.extend(descendants.into_iter().cloned());
    out.extend(rewrite_nodes(e, &|n| match n {
        Expr::Seq { first, second } => vec![(**second).clone(), (**first).clone()],
        Expr::Call { .. } => Vec::new(),
    }));
    if let Some(leaf) = leaf {
        out.extend(rewrite_args(e, &|a| match a {
            Arg::Sub(s) if **s != *leaf => vec![Arg::Sub(Box::new(leaf.clone()))],
            _ => Vec::new(),
        }));
    }
    out.extend(rewrite_args(e, &|a| match a {
        Arg::Lit(l) => int_shrinks(l).into_iter().map(Arg::Lit).collect(),
        _ => Vec::new(),
    }));
    out.extend(rewrite_args(e, &|a| match a {
        Arg::Fn(f) => [FnAst::Var, FnAst::Const(0)].into_iter().filter(|g| g != f).map(Arg::Fn).collect(),
        _ => Vec::new(),
    }));
    out
}

fn collect_descendants<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    for c in e.children() {
        out.push(c);
        collect_descendants(c, out);
    }
}

/// Apply `f` at every node, yielding one whole expression per replacement.
fn rewrite_nodes(e: &Expr, f: &dyn Fn(&Expr) -> Vec<Expr>) -> Vec<Expr> {
    let mut out = f(e);
    match e {
        Expr::Call { op, args } => {
            for (i, arg) in args.iter().enumerate() {
                if let Arg::Sub(s) = arg {
                    for s2 in rewrite_nodes(s, f) {
                        let mut args2 = args.clone();
                        args2[i] = Arg::Sub(Box::new(s2));
                        out.push(Expr::call(op.clone(), args2));
                    }
                }
            }
        }
        Expr::Seq { first, second } => {
            out.extend(rewrite_nodes(first, f).into_iter().map(|x| Expr::seq(x, (**second).clone())));
            out.extend(rewrite_nodes(second, f).into_iter().map(|x| Expr::seq((**first).clone(), x)));
        }
    }
    out
}

/// Apply `g` to every call argument, yielding one whole expression per replacement.
fn rewrite_args(e: &Expr, g: &dyn Fn(&Arg) -> Vec<Arg>) -> Vec<Expr> {
    rewrite_nodes(e, &|n| match n {
        Expr::Call { op, args } => {
            let mut out = Vec::new();
            for (i, arg) in args.iter().enumerate() {
                for a2 in g(arg) {
                    let mut args2 = args.clone();
                    args2[i] = a2;
                    out.push(Expr::call(op.clone(), args2));
                }
            }
            out
        }
        Expr::Seq { .. } => Vec::new(),
    })
}

/// Each int inside the literal set to 0, then halved.
fn int_shrinks(l: &Literal) -> Vec<Literal> {
    match l {
        Literal::Int(0) => Vec::new(),
        Literal::Int(k) => {
            let mut v = vec![Literal::Int(0)];
            if k / 2 != 0 {
                v.push(Literal::Int(k / 2));
            }
            v
        }
        Literal::Some(inner) => int_shrinks(inner).into_iter().map(|x| Literal::Some(Box::new(x))).collect(),
        Literal::List(items) => {
            let mut out = Vec::new();
            for (i, item) in items.iter().enumerate() {
                for x in int_shrinks(item) {
                    let mut items2 = items.clone();
                    items2[i] = x;
                    out.push(Literal::List(items2));
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

/// Convenience wrapper: validate `sig` and run a sequential campaign.
pub fn run_differential(
    sig: &Signature,
    a: &mut dyn Implementation,
    b: &mut dyn Implementation,
    trials: u64,
    cfg: &GenConfig,
    opts: &CampaignOptions,
) -> Result<CampaignResult, ValidationError> {
    Ok(Campaign::new(sig.clone())?.run(a, b, trials, cfg, opts))
}

/// Free-standing form of [`Campaign::shrink`].
pub fn shrink(
    e: &Expr,
    ty: &Ty,
    sig: &Signature,
    a: &mut dyn Implementation,
    b: &mut dyn Implementation,
) -> Result<Expr, ValidationError> {
    Ok(Campaign::new(sig.clone())?.shrink(e, ty, a, b))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchStats {
    pub runs: Vec<RunSummary>,
    pub min: Option<u64>,
    pub mean: Option<f64>,
    pub max: Option<u64>,
    pub detection_rate: f64,
}

impl BenchStats {
    pub fn from_runs(runs: Vec<RunSummary>) -> Self {
        let hits: Vec<u64> = runs.iter().filter_map(|r| r.trials_to_first_failure).collect();
        let mean = (!hits.is_empty()).then(|| hits.iter().sum::<u64>() as f64 / hits.len() as f64);
        BenchStats {
            min: hits.iter().copied().min(),
            max: hits.iter().copied().max(),
            mean,
            detection_rate: if runs.is_empty() { 0.0 } else { hits.len() as f64 / runs.len() as f64 },
            runs,
        }
    }
}

/// Run `runs` campaigns seeded `base_seed + r`, each stopping at its first
/// failure or after `trial_cap` trials.
pub fn bench_trials_to_failure(
    campaign: &Campaign,
    make_correct: &ImplFactory<'_>,
    make_buggy: &ImplFactory<'_>,
    runs: u64,
    trial_cap: u64,
    cfg: &GenConfig,
    jobs: usize,
) -> BenchStats {
    let opts = CampaignOptions { stop_on_failure: true, shrink: false, jobs: 1 };
    let jobs = jobs.max(1) as u64;
    let mut summaries: Vec<RunSummary> = thread::scope(|s| {
        let workers: Vec<_> = (0..jobs)
            .map(|j| {
                s.spawn(move || {
                    let (mut a, mut b) = (make_correct(), make_buggy());
                    let mut part = Vec::new();
                    let mut r = j;
                    while r < runs {
                        let run_cfg = GenConfig { seed: cfg.seed.wrapping_add(r), ..cfg.clone() };
                        part.push(campaign.run(&mut *a, &mut *b, trial_cap, &run_cfg, &opts).summary());
                        r += jobs;
                    }
                    part
                })
            })
            .collect();
        workers.into_iter().flat_map(|w| w.join().expect("bench worker panicked")).collect()
    });
    summaries.sort_by_key(|s| s.seed.wrapping_sub(cfg.seed));
    BenchStats::from_runs(summaries)
}
