//! Shipped task corpus.
//!
//! Each task is a `.mopro` program whose name is its id. The embedded
//! corpus can be replaced or extended by pointing `MOPROC_CORPUS` at a
//! directory of `.mopro` files; a file whose task name matches a shipped id
//! replaces that task's source, other files add new tasks.

use std::collections::BTreeMap;
use std::path::Path;

use crate::dsl::{compile_source, Diagnostics, ErrorProgram, ParamValue, Params};
use crate::kinematics::{default_skeleton, MotionSequence, Skeleton};
use crate::metrics::{self, ErrorFormula, MetricsError};
use crate::optimizer::RelaxSpec;

pub const CORPUS_ENV: &str = "MOPROC_CORPUS";

const SHIPPED: [(&str, &str); 13] = [
    ("HOD-1", include_str!("../corpus/HOD-1.mopro")),
    ("GEO-1", include_str!("../corpus/GEO-1.mopro")),
    ("GEO-2", include_str!("../corpus/GEO-2.mopro")),
    ("HSI-1", include_str!("../corpus/HSI-1.mopro")),
    ("HSI-2", include_str!("../corpus/HSI-2.mopro")),
    ("HSI-3", include_str!("../corpus/HSI-3.mopro")),
    ("HSI-4", include_str!("../corpus/HSI-4.mopro")),
    ("HSI-5", include_str!("../corpus/HSI-5.mopro")),
    ("HOI-1", include_str!("../corpus/HOI-1.mopro")),
    ("HOI-2", include_str!("../corpus/HOI-2.mopro")),
    ("HSC-1", include_str!("../corpus/HSC-1.mopro")),
    ("PBG-1", include_str!("../corpus/PBG-1.mopro")),
    ("PBG-2", include_str!("../corpus/PBG-2.mopro")),
];

#[derive(Debug, thiserror::Error)]
pub enum TaskError {
    #[error("unknown task '{0}'")]
    Unknown(String),
    #[error("task {id}:\n{diagnostics}")]
    Compile { id: String, diagnostics: Diagnostics },
    #[error("corpus directory {path}: {message}")]
    Corpus { path: String, message: String },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// A compiled task with its evaluation metadata.
#[derive(Clone, Debug)]
pub struct TaskSpec {
    pub id: String,
    pub source: String,
    pub program: ErrorProgram,
    /// Relaxation used by default when optimizing this task.
    pub relax: RelaxSpec,
    pub formula: ErrorFormula,
}

fn relax_for(id: &str) -> RelaxSpec {
    match id {
        "GEO-1" => RelaxSpec::PlaneFit { joint: "left_hand".into(), normal: "n".into(), offset: "d".into() },
        "GEO-2" => RelaxSpec::LineFit {
            joints: vec!["left_foot".into(), "right_foot".into()],
            origin: "origin".into(),
            direction: "dir".into(),
        },
        "HOI-1" => RelaxSpec::EndpointPair { joint: "left_hand".into(), a: "a".into(), b: "b".into() },
        _ => RelaxSpec::None,
    }
}

fn formula_for(id: &str) -> ErrorFormula {
    match id {
        "HSI-3" => ErrorFormula::Total,
        _ => ErrorFormula::TermMean,
    }
}

impl TaskSpec {
    /// Compiles `source` against `skeleton`; metadata follows the id.
    pub fn from_source(source: &str, skeleton: &Skeleton) -> Result<Self, TaskError> {
        let program = compile_source(source, skeleton).map_err(|diagnostics| TaskError::Compile {
            id: first_line_name(source).unwrap_or_else(|| "<unnamed>".into()),
            diagnostics,
        })?;
        let id = program.name.clone();
        Ok(Self { relax: relax_for(&id), formula: formula_for(&id), id, source: source.to_owned(), program })
    }

    /// Default parameters with `overrides` applied.
    pub fn params(&self, overrides: &Params) -> Result<Vec<ParamValue>, TaskError> {
        self.program.resolve_params(overrides).map_err(|e| TaskError::Metrics(e.into()))
    }

    /// Task-defined constraint error in meters.
    pub fn constraint_error(&self, motion: &MotionSequence, overrides: &Params) -> Result<f64, TaskError> {
        let p = self.params(overrides)?;
        Ok(metrics::constraint_error(&self.program, &p, self.formula, motion)?)
    }
}

fn first_line_name(source: &str) -> Option<String> {
    let start = source.find("task")?;
    let rest = &source[start..];
    let open = rest.find('"')?;
    let close = rest[open + 1..].find('"')?;
    Some(rest[open + 1..open + 1 + close].to_owned())
}

/// Sources keyed by id: shipped tasks, then the override directory.
fn sources() -> Result<BTreeMap<String, String>, TaskError> {
    let mut out: BTreeMap<String, String> = SHIPPED.iter().map(|(id, src)| ((*id).to_owned(), (*src).to_owned())).collect();
    if let Some(dir) = std::env::var_os(CORPUS_ENV) {
        for (id, src) in read_corpus_dir(Path::new(&dir))? {
            out.insert(id, src);
        }
    }
    Ok(out)
}

/// `.mopro` files in `dir` keyed by their task name.
pub fn read_corpus_dir(dir: &Path) -> Result<Vec<(String, String)>, TaskError> {
    let err = |message: String| TaskError::Corpus { path: dir.display().to_string(), message };
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| err(e.to_string()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "mopro"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let src = std::fs::read_to_string(&p).map_err(|e| err(format!("{}: {e}", p.display())))?;
            let id = first_line_name(&src).ok_or_else(|| err(format!("{}: no task name", p.display())))?;
            Ok((id, src))
        })
        .collect()
}

/// Ids of the shipped tasks plus any from the corpus directory, sorted.
pub fn list_tasks() -> Result<Vec<String>, TaskError> {
    Ok(sources()?.into_keys().collect())
}

/// Ids shipped with the crate, in corpus order.
pub fn shipped_ids() -> impl Iterator<Item = &'static str> {
    SHIPPED.iter().map(|(id, _)| *id)
}

pub fn get_task(id: &str) -> Result<TaskSpec, TaskError> {
    get_task_for(id, &default_skeleton())
}

pub fn get_task_for(id: &str, skeleton: &Skeleton) -> Result<TaskSpec, TaskError> {
    let src = sources()?.remove(id).ok_or_else(|| TaskError::Unknown(id.to_owned()))?;
    TaskSpec::from_source(&src, skeleton)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse, pretty_print, ParamValue};

    #[test]
    fn every_shipped_task_compiles_under_its_id() {
        for id in shipped_ids() {
            let t = get_task(id).unwrap();
            assert_eq!(t.id, id);
            assert!(t.program.term_count() > 0);
        }
        assert_eq!(shipped_ids().count(), 13);
        assert!(matches!(get_task("XYZ-9"), Err(TaskError::Unknown(_))));
    }

    #[test]
    fn documented_defaults() {
        let defaults = |id: &str| -> BTreeMap<String, ParamValue> {
            get_task(id).unwrap().program.param_defs().map(|(n, _, d)| (n.to_owned(), d.unwrap())).collect()
        };
        assert_eq!(defaults("HSI-3")["half"], ParamValue::Float(1.0));
        assert_eq!(defaults("HOI-2")["diameter"], ParamValue::Float(0.4));
        assert_eq!(defaults("HOI-1")["a"], ParamValue::Vec3([1.0, 0.8, 1.0]));
        assert_eq!(defaults("HOI-1")["b"], ParamValue::Vec3([-1.0, 0.8, -1.0]));
        let hsc = get_task("HSC-1").unwrap();
        assert_eq!(hsc.program.term_count(), 1);
        assert!(hsc.program.term_labels()[0].contains("dist(joint(left_hand).pos, joint(head).pos)"));
        assert_eq!(get_task("HSI-3").unwrap().program.term_count(), 22);
    }

    #[test]
    fn corpus_round_trips() {
        for id in shipped_ids() {
            let src = &get_task(id).unwrap().source;
            let ast = parse(src).unwrap();
            assert_eq!(parse(&pretty_print(&ast)).unwrap(), ast, "{id}");
        }
    }

    #[test]
    fn directory_override() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("mine.mopro"), "task \"MY-1\" { constraint all frames: joint(head).pos.y > 1; }")
            .unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let found = read_corpus_dir(dir.path()).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].0, "MY-1");
        let t = TaskSpec::from_source(&found[0].1, &default_skeleton()).unwrap();
        assert_eq!(t.relax, RelaxSpec::None);
        assert_eq!(t.formula, ErrorFormula::TermMean);
        assert!(read_corpus_dir(&dir.path().join("missing")).is_err());
    }
}
