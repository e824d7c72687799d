//! Failures-divergences refinement checking for generated scripts.

pub mod env;
pub mod lts;
pub mod normal;
pub mod refine;

use thiserror::Error;

pub use env::{Env, Ev, EvSet};
pub use lts::{Label, Lts};
pub use normal::{normalize_fd, FdModel, NormNode, Walk};
pub use refine::{check_refinement_fd, Counterexample, Verdict, ViolationKind};

use crate::codegen::{standalone_script, Assertion, EmitPlan};
use crate::model::Declaration;

pub const DEFAULT_MAX_STATES: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("unresolved name `{0}`")]
    Unresolved(String),
    #[error("`{0}` is defined twice")]
    Duplicate(String),
    #[error("alphabets differ: only in specification {spec_only:?}, only in implementation {impl_only:?}")]
    AlphabetMismatch { spec_only: Vec<String>, impl_only: Vec<String> },
    #[error("state limit of {limit} exceeded")]
    ResourceLimit { limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    Sequential,
    /// Uses rayon when built with the `parallel` feature, and runs
    /// sequentially otherwise.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub max_states: usize,
    pub mode: Mode,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { max_states: DEFAULT_MAX_STATES, mode: Mode::default() }
    }
}

#[derive(Debug, Clone)]
pub struct Discharged {
    pub assertion: Assertion,
    pub verdict: Result<Verdict, EngineError>,
}

impl Discharged {
    pub fn holds(&self) -> bool {
        matches!(&self.verdict, Ok(v) if v.holds)
    }
}

/// Checks `spec [FD= imp` where both are process names in `env`.
pub fn check_names(env: &Env, spec: &str, imp: &str, max_states: usize) -> Result<Verdict, EngineError> {
    let spec = normalize_fd(&env.compile_named(spec, max_states)?, max_states)?;
    let imp = env.compile_named(imp, max_states)?;
    check_refinement_fd(&spec, &imp, max_states)
}

pub fn check_assertion(env: &Env, a: &Assertion, max_states: usize) -> Result<Verdict, EngineError> {
    check_names(env, &a.spec, &a.imp, max_states)
}

/// One verdict per assertion, in emission order.
pub fn discharge_assertions(plan: &EmitPlan, opts: CheckOptions) -> Result<Vec<Discharged>, EngineError> {
    let env = Env::from_script(&plan.script)?;
    let run = |a: &Assertion| Discharged { assertion: a.clone(), verdict: check_assertion(&env, a, opts.max_states) };
    Ok(match opts.mode {
        Mode::Sequential => plan.assertions.iter().map(run).collect(),
        Mode::Parallel => run_parallel(&plan.assertions, run),
    })
}

#[cfg(feature = "parallel")]
fn run_parallel(items: &[Assertion], run: impl Fn(&Assertion) -> Discharged + Sync + Send) -> Vec<Discharged> {
    use rayon::prelude::*;
    items.par_iter().map(run).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_parallel(items: &[Assertion], run: impl Fn(&Assertion) -> Discharged) -> Vec<Discharged> {
    items.iter().map(run).collect()
}

/// Compiles a single declaration (with its locals) to a machine.
pub fn compile_declaration(d: &Declaration, max_states: usize) -> Result<Lts, EngineError> {
    let env = Env::from_script(&standalone_script(d))?;
    env.compile_named(d.name.as_str(), max_states)
}
