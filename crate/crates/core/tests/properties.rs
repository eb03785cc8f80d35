use moproc::dsl::{parse, pretty_print, Params};
use moproc::kinematics::io::{read_motion_json, write_motion_json};
use moproc::kinematics::{bone_lengths, default_skeleton, forward_kinematics, yaw_translate, MotionSequence, PoseFrame};
use moproc::metrics::max_acceleration;
use moproc::tasks::get_task;
use proptest::prelude::*;

const JOINTS: usize = 22;
const JOINT_NAMES: [&str; 6] = ["head", "left_hand", "right_foot", "pelvis", "spine3", "left_knee"];

fn frame() -> impl Strategy<Value = PoseFrame> {
    (
        prop::array::uniform3(-2.0f64..2.0),
        prop::collection::vec(prop::array::uniform3(-4.0f64..4.0), JOINTS),
    )
        .prop_map(|(root_pos, joint_rot)| PoseFrame { root_pos, joint_rot })
}

fn motion(max_frames: usize) -> impl Strategy<Value = MotionSequence> {
    prop::collection::vec(frame(), 3..max_frames).prop_map(|frames| MotionSequence::new(20.0, frames).unwrap())
}

fn max_diff(a: &[Vec<[f64; 3]>], b: &[Vec<[f64; 3]>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(fa, fb)| fa.iter().zip(fb).flat_map(|(p, q)| (0..3).map(move |k| (p[k] - q[k]).abs())))
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fk_preserves_bone_lengths(m in motion(6)) {
        let skel = default_skeleton();
        let pos = forward_kinematics(&skel, &m).unwrap();
        let template: Vec<f64> = (1..JOINTS).map(|j| skel.bone_length(j)).collect();
        for frame in bone_lengths(&skel, &pos) {
            for (l, t) in frame.iter().zip(&template) {
                prop_assert!((l - t).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn fk_commutes_with_yaw_translate(m in motion(5), dx in -3.0f64..3.0, dz in -3.0f64..3.0, dyaw in -3.2f64..3.2) {
        let skel = default_skeleton();
        let moved = forward_kinematics(&skel, &yaw_translate(&m, dx, dz, dyaw)).unwrap();
        let pivot = m.frames[0].root_pos;
        let (s, c) = dyaw.sin_cos();
        let expected: Vec<Vec<[f64; 3]>> = forward_kinematics(&skel, &m)
            .unwrap()
            .pos
            .iter()
            .map(|f| {
                f.iter()
                    .map(|p| {
                        let (x, z) = (p[0] - pivot[0], p[2] - pivot[2]);
                        [pivot[0] + c * x + s * z + dx, p[1], pivot[2] - s * x + c * z + dz]
                    })
                    .collect()
            })
            .collect();
        prop_assert!(max_diff(&moved.pos, &expected) <= 1e-9);
    }

    #[test]
    fn json_round_trip_is_stable(m in motion(5)) {
        let skel = default_skeleton();
        let (_, once) = read_motion_json(&write_motion_json(&skel, &m)).unwrap();
        let text = write_motion_json(&skel, &once);
        let (_, twice) = read_motion_json(&text).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(write_motion_json(&skel, &twice), text);
        let a = forward_kinematics(&skel, &m).unwrap();
        let b = forward_kinematics(&skel, &once).unwrap();
        prop_assert!(max_diff(&a.pos, &b.pos) <= 1e-9);
    }

    #[test]
    fn max_acceleration_is_rigid_invariant(m in motion(8), dx in -3.0f64..3.0, dz in -3.0f64..3.0, dyaw in -3.2f64..3.2) {
        let skel = default_skeleton();
        let a = max_acceleration(&forward_kinematics(&skel, &m).unwrap(), 20.0).unwrap();
        let b = max_acceleration(&forward_kinematics(&skel, &yaw_translate(&m, dx, dz, dyaw)).unwrap(), 20.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-6 * a.max(1.0));
    }

    #[test]
    fn relative_tasks_are_rigid_invariant(m in motion(5), dx in -3.0f64..3.0, dz in -3.0f64..3.0, dyaw in -3.2f64..3.2) {
        let moved = yaw_translate(&m, dx, dz, dyaw);
        for id in ["HSC-1", "HOI-2", "PBG-2"] {
            let task = get_task(id).unwrap();
            let a = task.constraint_error(&m, &Params::new()).unwrap();
            let b = task.constraint_error(&moved, &Params::new()).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{} {} vs {}", id, a, b);
        }
    }

    #[test]
    fn generated_programs_round_trip(
        name in "[A-Za-z][A-Za-z0-9 _-]{0,12}",
        value in -100.0f64..100.0,
        joint_a in 0..JOINT_NAMES.len(),
        joint_b in 0..JOINT_NAMES.len(),
        frame in 0i64..40,
        weight in 0.0f64..10.0,
        op in 0..3usize,
    ) {
        let cmp = ["==", "<", ">"][op];
        let src = format!(
            "task \"{name}\" {{\n  param v: float = {value:?};\n  \
             constraint frames [first, {frame}, last]: dist(joint({}).pos, joint({}).pos) {cmp} v weight {weight:?};\n}}",
            JOINT_NAMES[joint_a], JOINT_NAMES[joint_b],
        );
        let ast = parse(&src).unwrap();
        let printed = pretty_print(&ast);
        prop_assert_eq!(parse(&printed).unwrap(), ast);
        prop_assert_eq!(pretty_print(&parse(&printed).unwrap()), printed);
    }
}
