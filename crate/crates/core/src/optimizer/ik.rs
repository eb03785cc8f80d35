use super::{seeds_from, setup, OptimConfig, OptimError, OptimResult};
use crate::atoms::{mean, AtomError};
use crate::autodiff::{Scalar, Vec3};
use crate::dsl::{ErrorProgram, Params};
use crate::kinematics::MotionSequence;
use crate::priors::IdentityPrior;

/// Mean distance each joint travels between consecutive frames.
pub fn smoothness_regularizer<S: Scalar>(pos: &[Vec<Vec3<S>>]) -> Result<S, AtomError> {
    let steps: Vec<S> = pos
        .windows(2)
        .flat_map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (*b - *a).norm()))
        .collect();
    if steps.is_empty() {
        return Err(AtomError::DifferenceOrder { order: 1, frames: pos.len() });
    }
    mean(&steps)
}

/// Optimizes the motion parameters of `initial` directly.
///
/// The objective is the program error plus `w_reg` times
/// [`smoothness_regularizer`]; `w_reg = 0` is plain IK.
pub fn ik_baseline(
    program: &ErrorProgram,
    params: &Params,
    initial: &MotionSequence,
    w_reg: f64,
    config: &OptimConfig,
) -> Result<OptimResult, OptimError> {
    if !(w_reg >= 0.0 && w_reg.is_finite()) {
        return Err(OptimError::Config(format!("regularization weight must be nonnegative, got {w_reg}")));
    }
    let prior = IdentityPrior::new(program.skeleton().clone(), initial.frame_count(), initial.fps)?;
    let s = setup(&prior, program, params, config, w_reg)?;
    s.search(&seeds_from(config.seed, initial.flatten()))
}

#[cfg(test)]
mod tests {
    use super::super::optimize_from;
    use super::*;
    use crate::dsl::compile_source;
    use crate::kinematics::{default_skeleton, forward_kinematics_flat};
    use crate::priors::{DctPrior, MotionPrior};

    #[test]
    fn constant_motion_has_zero_regularizer() {
        let m = MotionSequence::rest(5, 22, 20.0);
        let pos = forward_kinematics_flat(&default_skeleton(), &m.flatten(), 5).unwrap();
        assert_eq!(smoothness_regularizer(&pos).unwrap(), 0.0);
    }

    #[test]
    fn regularizer_is_mean_joint_step() {
        let mut m = MotionSequence::rest(3, 22, 20.0);
        m.frames[1].root_pos = [0.3, 0.0, 0.4];
        m.frames[2].root_pos = [0.3, 0.0, 0.4];
        let pos = forward_kinematics_flat(&default_skeleton(), &m.flatten(), 3).unwrap();
        // every joint moves 0.5 once over two frame pairs
        assert!((smoothness_regularizer(&pos).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn plain_ik_equals_identity_prior_run() {
        let skel = default_skeleton();
        let program = compile_source(
            "task \"t\" { constraint frames [first, mid, last]: joint(head).pos.y == 1.5; }",
            &skel,
        )
        .unwrap();
        let dct = DctPrior::new(skel.clone(), 12, 4, 20.0).unwrap();
        let init = dct.decode(&dct.sample_latent(2)).unwrap();
        let cfg = OptimConfig { steps: 30, ..Default::default() };
        let ik = ik_baseline(&program, &Params::new(), &init, 0.0, &cfg).unwrap();
        let id = IdentityPrior::new(skel, 12, 20.0).unwrap();
        let direct = optimize_from(&id, &program, &Params::new(), init.flatten(), &cfg).unwrap();
        assert_eq!(ik.trace(), direct.trace());
        assert_eq!(ik.motion(), direct.motion());
        let reg = ik_baseline(&program, &Params::new(), &init, 1.0, &cfg).unwrap();
        assert!(reg.trace()[0].total > ik.trace()[0].total);
        assert!(ik_baseline(&program, &Params::new(), &init, -1.0, &cfg).is_err());
    }
}
