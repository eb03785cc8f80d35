//! Latent-space minimization of compiled error programs.
//!
//! [`optimize`] runs Adam on the latent code of a [`MotionPrior`] against
//! `F(decode(z), p)`. [`restart_search`] repeats it from several seeds and
//! keeps the run with the smallest constraint error, [`relax_and_minimize`]
//! periodically refits movable constraint geometry to the current motion,
//! and [`ik_baseline`] optimizes motion parameters directly.

mod adam;
mod ik;
mod manifest;
mod relax;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use adam::Adam;
pub use ik::{ik_baseline, smoothness_regularizer};
pub use manifest::{program_hash, RestartSummary, RunManifest};
pub use relax::{endpoint_relax, fit_line_xz, fit_vertical_plane, relax_and_minimize, RelaxSpec};

use crate::autodiff::{gradient, Tape};
use crate::dsl::{ErrorProgram, EvalError, ParamValue, Params};
use crate::kinematics::{forward_kinematics_flat, KinematicsError, MotionSequence, YawTranslate};
use crate::priors::{MotionPrior, PriorError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimConfig {
    pub lr: f64,
    pub steps: usize,
    /// Upper learning rate for quick experiments; see [`OptimConfig::fast`].
    pub max_lr: f64,
    /// Number of initial latents tried by [`restart_search`].
    pub restarts: usize,
    /// Steps between constraint refits in [`relax_and_minimize`].
    pub relax_interval: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            lr: 0.005,
            steps: 100,
            max_lr: 0.05,
            restarts: 1,
            relax_interval: 10,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 0,
        }
    }
}

impl OptimConfig {
    /// Same budget at the maximum learning rate.
    pub fn fast(self) -> Self {
        Self { lr: self.max_lr, ..self }
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        let bad = |m: &str| Err(OptimError::Config(m.into()));
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.steps == 0 {
            return bad("steps must be at least 1");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        if self.relax_interval == 0 {
            return bad("relax interval must be at least 1");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.eps > 0.0) {
            return bad("Adam needs 0 ≤ β < 1 and ε > 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("program and prior use different skeletons")]
    SkeletonMismatch,
    #[error(transparent)]
    Prior(#[from] PriorError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("step {step}: {error}")]
    Eval { step: usize, error: EvalError },
    #[error("step {step}: non-finite error{}", blame(.term, .label))]
    NonFinite { step: usize, term: Option<usize>, label: Option<String> },
    #[error("relaxation: {0}")]
    Relax(String),
}

fn blame(term: &Option<usize>, label: &Option<String>) -> String {
    match (term, label) {
        (Some(i), Some(l)) => format!(" in term {i} ({l})"),
        (Some(i), None) => format!(" in term {i}"),
        _ => String::new(),
    }
}

impl OptimError {
    /// True for numeric failures as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, OptimError::NonFinite { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Objective value, including any regularizer.
    pub total: f64,
    /// Weighted contribution of each program term.
    pub per_term: Vec<f64>,
}

/// One optimization run from one seed.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub seed: u64,
    /// `steps + 1` entries: before every update and after the last.
    pub trace: Vec<TraceEntry>,
    /// Error against the original constraint parameters.
    pub constraint_error: f64,
    pub latent: Vec<f64>,
    pub motion: MotionSequence,
    /// Maps the optimized motion into the original constraint frame.
    pub transform: YawTranslate,
    /// Parameters in effect at the last step (equal to the originals unless
    /// relaxation moved them).
    pub relaxed_params: Vec<ParamValue>,
}

#[derive(Clone, Debug)]
pub struct OptimResult {
    pub runs: Vec<RunRecord>,
    /// Index into `runs` of the selected run.
    pub chosen: usize,
    pub wall_time_s: f64,
}

impl OptimResult {
    pub fn best(&self) -> &RunRecord {
        &self.runs[self.chosen]
    }

    pub fn motion(&self) -> &MotionSequence {
        &self.best().motion
    }

    pub fn latent(&self) -> &[f64] {
        &self.best().latent
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.best().trace
    }

    pub fn constraint_error(&self) -> f64 {
        self.best().constraint_error
    }
}

/// Seed of restart `i`; restart 0 uses the base seed, so smaller restart
/// counts see a prefix of the same seed sequence.
pub fn restart_seed(base: u64, i: usize) -> u64 {
    if i == 0 {
        return base;
    }
    let mut x = base ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Key used to rank runs: lower is better.
pub type ConstraintKey<'a> = &'a (dyn Fn(&MotionSequence) -> f64 + Sync);

struct Objective<'a> {
    prior: &'a dyn MotionPrior,
    program: &'a ErrorProgram,
    reg_weight: f64,
}

struct Point {
    total: f64,
    per_term: Vec<f64>,
    grad: Vec<f64>,
}

impl Objective<'_> {
    fn new<'a>(prior: &'a dyn MotionPrior, program: &'a ErrorProgram, reg_weight: f64) -> Result<Objective<'a>, OptimError> {
        if prior.skeleton() != program.skeleton() {
            return Err(OptimError::SkeletonMismatch);
        }
        Ok(Objective { prior, program, reg_weight })
    }

    fn eval(&self, z: &[f64], params: &[ParamValue], step: usize) -> Result<Point, OptimError> {
        let tape = Tape::new();
        let zs = tape.vars(z);
        let flat = self.prior.decode_vars(&zs)?;
        let pos = forward_kinematics_flat(self.prior.skeleton(), &flat, self.prior.frames())?;
        let ev = self
            .program
            .evaluate(&pos, self.prior.fps(), params)
            .map_err(|error| OptimError::Eval { step, error })?;
        let mut total = ev.total;
        if self.reg_weight > 0.0 {
            let reg = smoothness_regularizer(&pos).map_err(|e| OptimError::Eval { step, error: e.into() })?;
            total = total + reg * self.reg_weight;
        }
        let per_term: Vec<f64> = ev.per_term.iter().map(|v| v.value()).collect();
        if !total.value().is_finite() {
            let term = per_term.iter().position(|v| !v.is_finite());
            let label = term.map(|i| self.program.term_labels()[i].clone());
            return Err(OptimError::NonFinite { step, term, label });
        }
        let grad = gradient(total, &zs).map_err(|e| OptimError::Eval { step, error: e.into() })?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(OptimError::NonFinite { step, term: None, label: None });
        }
        Ok(Point { total: total.value(), per_term, grad })
    }

    /// Error of a finished motion against the given parameters.
    fn motion_error(&self, motion: &MotionSequence, params: &[ParamValue]) -> Result<f64, OptimError> {
        let total = self
            .program
            .evaluate_flat(&motion.flatten(), motion.frame_count(), motion.fps, params)
            .map_err(|error| OptimError::Eval { step: usize::MAX, error })?
            .total;
        Ok(total)
    }
}

/// Everything a single run needs besides its starting latent.
struct RunSetup<'a> {
    objective: Objective<'a>,
    params: Vec<ParamValue>,
    relax: Option<relax::Resolved>,
    config: &'a OptimConfig,
    key: Option<ConstraintKey<'a>>,
}

impl RunSetup<'_> {
    fn run(&self, seed: u64, z0: Vec<f64>) -> Result<RunRecord, OptimError> {
        let cfg = self.config;
        let prior = self.objective.prior;
        let mut z = z0;
        let mut adam = Adam::new(z.len(), cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
        let mut params = self.params.clone();
        let mut trace = Vec::with_capacity(cfg.steps + 1);
        for step in 0..=cfg.steps {
            if let Some(r) = &self.relax {
                if step < cfg.steps && step % cfg.relax_interval == 0 {
                    let motion = prior.decode(&z)?;
                    r.refit(prior.skeleton(), &motion, &mut params)?;
                }
            }
            let p = self.objective.eval(&z, &params, step)?;
            trace.push(TraceEntry { total: p.total, per_term: p.per_term });
            if step < cfg.steps {
                adam.step(&mut z, &p.grad);
            }
        }
        let decoded = prior.decode(&z)?;
        let transform = match &self.relax {
            Some(r) => r.transform(&params, &self.params)?,
            None => YawTranslate::identity(),
        };
        let motion = if transform == YawTranslate::identity() {
            decoded
        } else {
            crate::kinematics::apply_yaw_translate(&decoded, &transform)
        };
        let constraint_error = match self.key {
            Some(key) => key(&motion),
            None => self.objective.motion_error(&motion, &self.params)?,
        };
        Ok(RunRecord { seed, trace, constraint_error, latent: z, motion, transform, relaxed_params: params })
    }

    fn search(&self, seeds: &[(u64, Vec<f64>)]) -> Result<OptimResult, OptimError> {
        let start = Instant::now();
        let runs: Vec<RunRecord> =
            seeds.par_iter().map(|(seed, z0)| self.run(*seed, z0.clone())).collect::<Result<_, _>>()?;
        let mut chosen = 0;
        for (i, r) in runs.iter().enumerate() {
            if r.constraint_error < runs[chosen].constraint_error {
                chosen = i;
            }
        }
        Ok(OptimResult { runs, chosen, wall_time_s: start.elapsed().as_secs_f64() })
    }
}

fn seeds(prior: &dyn MotionPrior, config: &OptimConfig, count: usize) -> Vec<(u64, Vec<f64>)> {
    (0..count)
        .map(|i| {
            let s = restart_seed(config.seed, i);
            (s, prior.sample_latent(s))
        })
        .collect()
}

fn seeds_from(seed: u64, z0: Vec<f64>) -> Vec<(u64, Vec<f64>)> {
    vec![(seed, z0)]
}

fn setup<'a>(
    prior: &'a dyn MotionPrior,
    program: &'a ErrorProgram,
    params: &Params,
    config: &'a OptimConfig,
    reg_weight: f64,
) -> Result<RunSetup<'a>, OptimError> {
    config.validate()?;
    let params = program.resolve_params(params).map_err(|error| OptimError::Eval { step: 0, error })?;
    Ok(RunSetup { objective: Objective::new(prior, program, reg_weight)?, params, relax: None, config, key: None })
}

/// A single Adam run from `prior.sample_latent(config.seed)`.
pub fn optimize(
    prior: &dyn MotionPrior,
    program: &ErrorProgram,
    params: &Params,
    config: &OptimConfig,
) -> Result<OptimResult, OptimError> {
    let s = setup(prior, program, params, config, 0.0)?;
    s.search(&seeds(prior, config, 1))
}

/// A single run from an explicit starting latent.
pub fn optimize_from(
    prior: &dyn MotionPrior,
    program: &ErrorProgram,
    params: &Params,
    z0: Vec<f64>,
    config: &OptimConfig,
) -> Result<OptimResult, OptimError> {
    if z0.len() != prior.latent_dim() {
        return Err(PriorError::LatentLength { expected: prior.latent_dim(), found: z0.len() }.into());
    }
    let s = setup(prior, program, params, config, 0.0)?;
    s.search(&[(config.seed, z0)])
}

/// `config.restarts` independent runs; the one with the smallest program
/// error on its final motion wins, ties going to the earlier restart.
pub fn restart_search(
    prior: &dyn MotionPrior,
    program: &ErrorProgram,
    params: &Params,
    config: &OptimConfig,
) -> Result<OptimResult, OptimError> {
    let s = setup(prior, program, params, config, 0.0)?;
    s.search(&seeds(prior, config, config.restarts))
}

/// [`restart_search`] ranked by a caller-supplied constraint error.
pub fn restart_search_by(
    prior: &dyn MotionPrior,
    program: &ErrorProgram,
    params: &Params,
    config: &OptimConfig,
    key: ConstraintKey<'_>,
) -> Result<OptimResult, OptimError> {
    let mut s = setup(prior, program, params, config, 0.0)?;
    s.key = Some(key);
    s.search(&seeds(prior, config, config.restarts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::compile_source;
    use crate::kinematics::default_skeleton;
    use crate::priors::{DctPrior, IdentityPrior};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn program(src: &str) -> ErrorProgram {
        compile_source(src, &default_skeleton()).unwrap()
    }

    #[test]
    fn quadratic_converges_monotonically() {
        let dim = IdentityPrior::new(default_skeleton(), 2, 20.0).unwrap().latent_dim();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut z: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.2..0.2)).collect();
        let mut adam = Adam::new(dim, 0.005, 0.9, 0.999, 1e-8);
        let f = |z: &[f64]| z.iter().map(|v| v * v).sum::<f64>();
        let mut prev = f(&z);
        for _ in 0..100 {
            let g: Vec<f64> = z.iter().map(|v| 2.0 * v).collect();
            adam.step(&mut z, &g);
            let now = f(&z);
            assert!(now < prev, "{now} ≥ {prev}");
            prev = now;
        }
        assert!(prev < 1e-4, "{prev}");
    }

    #[test]
    fn zero_weight_program_leaves_latent_alone() {
        let prior = DctPrior::new(default_skeleton(), 10, 3, 20.0).unwrap();
        let p = program("task \"t\" { constraint all frames: joint(head).pos.y == 5 weight 0; }");
        let cfg = OptimConfig { steps: 20, ..Default::default() };
        let r = optimize(&prior, &p, &Params::new(), &cfg).unwrap();
        assert_eq!(r.latent(), prior.sample_latent(0));
        assert_eq!(r.trace().len(), 21);
        assert!(r.trace().iter().all(|e| e.total == 0.0));
    }

    #[test]
    fn runs_are_deterministic_and_reduce_error() {
        let prior = DctPrior::new(default_skeleton(), 20, 4, 20.0).unwrap();
        let p = program("task \"t\" { constraint frames [first, last]: joint(head).pos.y == 1.4; }");
        let cfg = OptimConfig { steps: 60, seed: 3, ..Default::default() };
        let a = optimize(&prior, &p, &Params::new(), &cfg).unwrap();
        let b = optimize(&prior, &p, &Params::new(), &cfg).unwrap();
        assert_eq!(a.trace(), b.trace());
        assert_eq!(a.latent(), b.latent());
        let t = a.trace();
        assert!(t.last().unwrap().total < t[0].total);
        assert_eq!(a.constraint_error(), t.last().unwrap().total);
    }

    #[test]
    fn restarts_are_nested_and_monotone() {
        let prior = DctPrior::new(default_skeleton(), 12, 3, 20.0).unwrap();
        let p = program("task \"t\" { constraint frame mid: joint(left_hand).pos == [0.4, 1.2, 0.3]; }");
        let one = OptimConfig { steps: 15, seed: 8, ..Default::default() };
        let five = OptimConfig { restarts: 5, ..one.clone() };
        let r1 = restart_search(&prior, &p, &Params::new(), &one).unwrap();
        let r5 = restart_search(&prior, &p, &Params::new(), &five).unwrap();
        let single = optimize(&prior, &p, &Params::new(), &one).unwrap();
        assert_eq!(r1.trace(), single.trace());
        assert_eq!(r5.runs[0].trace, r1.runs[0].trace);
        assert_eq!(r5.runs.len(), 5);
        assert!(r5.constraint_error() <= r1.constraint_error());
        let seeds: Vec<u64> = r5.runs.iter().map(|r| r.seed).collect();
        let mut uniq = seeds.clone();
        uniq.dedup();
        assert_eq!(uniq.len(), 5);
    }

    #[test]
    fn non_finite_error_is_blamed() {
        let prior = IdentityPrior::new(default_skeleton(), 3, 20.0).unwrap();
        let p = program("task \"t\" { constraint all frames: 1 < 2; constraint all frames: 1e308 * 1e308 * joint(head).pos.y == 0; }");
        match optimize(&prior, &p, &Params::new(), &OptimConfig::default()).unwrap_err() {
            OptimError::NonFinite { step: 0, term: Some(1), label: Some(l) } => assert!(l.contains("head"), "{l}"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn config_validation() {
        assert!(OptimConfig { lr: 0.0, ..Default::default() }.validate().is_err());
        assert!(OptimConfig { steps: 0, ..Default::default() }.validate().is_err());
        assert!(OptimConfig { restarts: 0, ..Default::default() }.validate().is_err());
        assert!(OptimConfig { relax_interval: 0, ..Default::default() }.validate().is_err());
        assert_eq!(OptimConfig::default().fast().lr, 0.05);
    }

    #[test]
    fn skeleton_mismatch_is_rejected() {
        let mut skel = default_skeleton();
        skel.id = "other".into();
        let prior = IdentityPrior::new(skel, 3, 20.0).unwrap();
        let p = program("task \"t\" { }");
        assert_eq!(optimize(&prior, &p, &Params::new(), &OptimConfig::default()).unwrap_err(), OptimError::SkeletonMismatch);
    }
}
