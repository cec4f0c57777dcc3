//! Declarative computation plans: JSON documents naming presentations, representations,
//! paths and a list of tasks whose inputs may reference earlier task outputs.
//!
//! Exact numbers are written as `"p/q"` strings throughout.

mod doc;
mod run;

use std::collections::{BTreeMap, BTreeSet};

use serde_json::Value;
use thiserror::Error;

use crate::quat::{Axis, Quaternion, UnitQuaternion};
use crate::rational::{parse_rational, Rational};
use crate::reps::{ConjugatorSpec, Element, RepresentationPath};
use crate::words::GroupPresentation;

pub use doc::*;
pub use run::{run_plan, TaskError};

/// Name under which the top-level `"presentation"` section is registered.
pub const PRIMARY: &str = "main";

/// Default unit-norm tolerance for quaternion literals in plans.
pub const LITERAL_UNIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaIssue {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for SchemaIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

fn join(issues: &[SchemaIssue]) -> String {
    issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("schema error: {}", join(.0))]
    SchemaError(Vec<SchemaIssue>),
    #[error("{at}: unresolved reference {target:?}")]
    UnresolvedReference { at: String, target: String },
    #[error("cyclic plan: {}", .0.join(" -> "))]
    CyclicPlan(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct PlannedPath {
    pub presentation: String,
    pub path: RepresentationPath,
}

#[derive(Debug, Clone)]
pub enum RepSource {
    Images(Vec<Element>),
    /// Generator `k` of the representation's presentation is generator `indices[k]` of the path's.
    FromPath { path: String, at: Rational, indices: Vec<usize> },
    Trivial,
}

#[derive(Debug, Clone)]
pub struct PlannedRep {
    pub presentation: String,
    pub source: RepSource,
}

#[derive(Debug, Clone)]
pub struct Task {
    pub id: String,
    pub source: Option<String>,
    pub spec: TaskSpec,
}

impl Task {
    pub fn kind(&self) -> &'static str {
        self.spec.kind()
    }
}

/// A validated plan; `order` lists task indices in execution order.
#[derive(Debug, Clone)]
pub struct ComputationPlan {
    pub name: Option<String>,
    pub description: Option<String>,
    pub presentations: BTreeMap<String, GroupPresentation>,
    pub representations: BTreeMap<String, PlannedRep>,
    pub paths: BTreeMap<String, PlannedPath>,
    pub tasks: Vec<Task>,
    pub order: Vec<usize>,
}

impl ComputationPlan {
    pub fn task(&self, id: &str) -> Option<&Task> {
        self.tasks.iter().find(|t| t.id == id)
    }
}

#[derive(Default)]
struct Issues(Vec<SchemaIssue>);

impl Issues {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(SchemaIssue {
            path: path.into(),
            message: message.into(),
        });
    }
}

fn from_value<T: serde::de::DeserializeOwned>(value: Value, prefix: &str, issues: &mut Issues) -> Option<T> {
    match serde_path_to_error::deserialize(value) {
        Ok(v) => Some(v),
        Err(e) => {
            let inner = e.path().to_string();
            let path = match (prefix.is_empty(), inner == ".") {
                (true, _) => inner,
                (false, true) => prefix.to_string(),
                (false, false) => format!("{prefix}.{inner}"),
            };
            issues.push(path, e.into_inner().to_string());
            None
        }
    }
}

pub fn parse_plan(document: &str) -> Result<ComputationPlan, PlanError> {
    let value: Value = serde_json::from_str(document)
        .map_err(|e| PlanError::SchemaError(vec![SchemaIssue { path: String::new(), message: e.to_string() }]))?;
    let mut issues = Issues::default();
    let Some(doc) = from_value::<PlanDocument>(value, "", &mut issues) else {
        return Err(PlanError::SchemaError(issues.0));
    };
    let mut refs = Vec::new();

    let mut presentations = BTreeMap::new();
    let mut named: Vec<(String, &PresentationDoc)> = doc.presentations.iter().map(|(k, v)| (format!("presentations.{k}"), v)).collect();
    if let Some(p) = &doc.presentation {
        if doc.presentations.contains_key(PRIMARY) {
            issues.push(format!("presentations.{PRIMARY}"), "name is reserved for the top-level presentation");
        }
        named.push(("presentation".into(), p));
    }
    for (path, p) in named {
        let name = path.strip_prefix("presentations.").unwrap_or(PRIMARY).to_string();
        match GroupPresentation::parse(&p.generators, &p.relators) {
            Ok(pres) => {
                presentations.insert(name, pres);
            }
            Err(e) => issues.push(path, e.to_string()),
        }
    }

    let resolve_pres = |at: String, name: &Option<String>, refs: &mut Vec<(String, String)>| -> Option<String> {
        let name = name.clone().unwrap_or_else(|| PRIMARY.to_string());
        if presentations.contains_key(&name) {
            Some(name)
        } else {
            refs.push((at, name));
            None
        }
    };

    let mut paths = BTreeMap::new();
    for (name, p) in &doc.paths {
        let at = format!("paths.{name}");
        let Some(pres_name) = resolve_pres(format!("{at}.presentation"), &p.presentation, &mut refs) else {
            continue;
        };
        let pres = &presentations[&pres_name];
        let Some(elements) = images_in_order(&p.images, pres, &format!("{at}.images"), &mut issues) else {
            continue;
        };
        let conjugator = match &p.conjugator {
            None => None,
            Some(c) => {
                if c.relator >= pres.relators().len() {
                    issues.push(format!("{at}.conjugator.relator"), format!("relator index {} out of range", c.relator));
                    continue;
                }
                let axis = match &c.axis {
                    None => None,
                    Some(a) => match axis(a) {
                        Ok(a) => Some(a),
                        Err(m) => {
                            issues.push(format!("{at}.conjugator.axis"), m);
                            continue;
                        }
                    },
                };
                Some(ConjugatorSpec { axis, relator: c.relator })
            }
        };
        match RepresentationPath::new(elements, conjugator) {
            Ok(path) => {
                paths.insert(name.clone(), PlannedPath { presentation: pres_name, path });
            }
            Err(e) => issues.push(at, e.to_string()),
        }
    }

    let mut representations = BTreeMap::new();
    for (name, r) in &doc.representations {
        let at = format!("representations.{name}");
        let Some(pres_name) = resolve_pres(format!("{at}.presentation"), &r.presentation, &mut refs) else {
            continue;
        };
        let pres = &presentations[&pres_name];
        let chosen = [r.images.is_some(), r.from_path.is_some(), r.trivial.is_some()].iter().filter(|b| **b).count();
        if chosen != 1 {
            issues.push(at, "exactly one of \"images\", \"from_path\", \"trivial\" is required");
            continue;
        }
        if r.at.is_some() && r.from_path.is_none() {
            issues.push(format!("{at}.at"), "\"at\" needs \"from_path\"");
            continue;
        }
        let source = if let Some(images) = &r.images {
            match images_in_order(images, pres, &format!("{at}.images"), &mut issues) {
                Some(e) => RepSource::Images(e),
                None => continue,
            }
        } else if let Some(path_name) = &r.from_path {
            let Some(path) = paths.get(path_name) else {
                refs.push((format!("{at}.from_path"), path_name.clone()));
                continue;
            };
            let t = match r.at.as_deref().map(parse_rational).unwrap_or(Err(crate::rational::RationalError::Malformed("missing".into()))) {
                Ok(t) => t,
                Err(e) => {
                    issues.push(format!("{at}.at"), format!("path parameter: {e}"));
                    continue;
                }
            };
            let source_pres = &presentations[&path.presentation];
            let mut indices = Vec::new();
            for g in pres.generators() {
                match source_pres.generator_id(g) {
                    Some(id) => indices.push(id.0),
                    None => issues.push(format!("{at}.from_path"), format!("path has no generator {g:?}")),
                }
            }
            if indices.len() != pres.generator_count() {
                continue;
            }
            RepSource::FromPath { path: path_name.clone(), at: t, indices }
        } else {
            if r.trivial == Some(false) {
                issues.push(format!("{at}.trivial"), "must be true when present");
                continue;
            }
            RepSource::Trivial
        };
        representations.insert(name.clone(), PlannedRep { presentation: pres_name, source });
    }

    let mut tasks = Vec::new();
    let mut seen = BTreeSet::new();
    for (k, raw) in doc.tasks.into_iter().enumerate() {
        let at = format!("tasks[{k}]");
        let Some(header) = parse_task(raw, &at, &mut issues) else {
            continue;
        };
        if !seen.insert(header.id.clone()) {
            issues.push(format!("{at}.id"), format!("duplicate task id {:?}", header.id));
            continue;
        }
        header.spec.check(&at, &mut issues);
        tasks.push(header);
    }

    if !issues.0.is_empty() {
        return Err(PlanError::SchemaError(issues.0));
    }

    for (k, task) in tasks.iter().enumerate() {
        let at = format!("tasks[{k}]");
        for (field, name) in task.spec.object_refs() {
            let ok = match field {
                ObjectRef::Representation => representations.contains_key(name),
                ObjectRef::Path => paths.contains_key(name),
            };
            if !ok {
                refs.push((at.clone(), name.to_string()));
            }
        }
        for dep in task.spec.task_refs() {
            if !seen.contains(dep) {
                refs.push((at.clone(), dep.to_string()));
            }
        }
    }
    if let Some((at, target)) = refs.into_iter().next() {
        return Err(PlanError::UnresolvedReference { at, target });
    }

    let order = topological_order(&tasks)?;
    Ok(ComputationPlan {
        name: doc.name,
        description: doc.description,
        presentations,
        representations,
        paths,
        tasks,
        order,
    })
}

fn parse_task(raw: Value, at: &str, issues: &mut Issues) -> Option<Task> {
    let Value::Object(mut map) = raw else {
        issues.push(at, "task must be an object");
        return None;
    };
    let id = match map.remove("id") {
        Some(Value::String(s)) if !s.is_empty() => s,
        _ => {
            issues.push(format!("{at}.id"), "missing or empty string id");
            return None;
        }
    };
    let source = match map.remove("source") {
        None => None,
        Some(Value::String(s)) => Some(s),
        Some(_) => {
            issues.push(format!("{at}.source"), "must be a string");
            return None;
        }
    };
    let spec = from_value::<TaskSpec>(Value::Object(map), at, issues)?;
    Some(Task { id, source, spec })
}

/// Stable Kahn ordering: among ready tasks the earliest in the plan runs first.
fn topological_order(tasks: &[Task]) -> Result<Vec<usize>, PlanError> {
    let index: BTreeMap<&str, usize> = tasks.iter().enumerate().map(|(k, t)| (t.id.as_str(), k)).collect();
    let deps: Vec<BTreeSet<usize>> = tasks
        .iter()
        .map(|t| t.spec.task_refs().into_iter().map(|d| index[d]).collect())
        .collect();
    let mut done = vec![false; tasks.len()];
    let mut order = Vec::with_capacity(tasks.len());
    while order.len() < tasks.len() {
        let next = (0..tasks.len()).find(|&k| !done[k] && deps[k].iter().all(|&d| done[d]));
        match next {
            Some(k) => {
                done[k] = true;
                order.push(k);
            }
            None => return Err(PlanError::CyclicPlan(find_cycle(tasks, &deps, &done))),
        }
    }
    Ok(order)
}

fn find_cycle(tasks: &[Task], deps: &[BTreeSet<usize>], done: &[bool]) -> Vec<String> {
    // every remaining task has a remaining dependency, so walking them must revisit a node
    let mut k = (0..tasks.len()).find(|&k| !done[k]).unwrap_or(0);
    let mut walk: Vec<usize> = Vec::new();
    loop {
        if let Some(pos) = walk.iter().position(|&w| w == k) {
            let mut cycle: Vec<String> = walk[pos..].iter().map(|&w| tasks[w].id.clone()).collect();
            cycle.push(tasks[k].id.clone());
            return cycle;
        }
        walk.push(k);
        match deps[k].iter().find(|&&d| !done[d]) {
            Some(&d) => k = d,
            None => return walk.iter().map(|&w| tasks[w].id.clone()).collect(),
        }
    }
}

fn images_in_order(images: &BTreeMap<String, ElementDoc>, pres: &GroupPresentation, at: &str, issues: &mut Issues) -> Option<Vec<Element>> {
    let mut out = Vec::new();
    let mut ok = true;
    for g in pres.generators() {
        match images.get(g) {
            None => {
                issues.push(at, format!("no image for generator {g:?}"));
                ok = false;
            }
            Some(e) => match element(e) {
                Ok(e) => out.push(e),
                Err(m) => {
                    issues.push(format!("{at}.{g}"), m);
                    ok = false;
                }
            },
        }
    }
    for name in images.keys() {
        if pres.generator_id(name).is_none() {
            issues.push(format!("{at}.{name}"), "not a generator of the presentation");
            ok = false;
        }
    }
    ok.then_some(out)
}

pub(crate) fn axis(doc: &AxisDoc) -> Result<Axis, String> {
    match doc {
        AxisDoc::Name(n) => match n.as_str() {
            "i" => Ok(Axis::I),
            "j" => Ok(Axis::J),
            "k" => Ok(Axis::K),
            other => Err(format!("unknown axis {other:?}")),
        },
        AxisDoc::Vector(v) => Axis::unit(*v).map_err(|e| e.to_string()),
    }
}

pub(crate) fn scalar(doc: &ScalarDoc) -> Result<f64, String> {
    match doc {
        ScalarDoc::Number(x) => Ok(*x),
        ScalarDoc::Text(s) => parse_rational(s).map(|r| crate::rational::to_f64(&r)).map_err(|e| e.to_string()),
    }
}

pub(crate) fn element(doc: &ElementDoc) -> Result<Element, String> {
    let unit = |q: Quaternion| Element::Quat(UnitQuaternion::new(q).expect("basis quaternions are unit"));
    match doc {
        ElementDoc::Name(n) => Ok(match n.as_str() {
            "1" => unit(Quaternion::ONE),
            "-1" => unit(-Quaternion::ONE),
            "i" => unit(Quaternion::I),
            "-i" => unit(-Quaternion::I),
            "j" => unit(Quaternion::J),
            "-j" => unit(-Quaternion::J),
            "k" => unit(Quaternion::K),
            "-k" => unit(-Quaternion::K),
            "conjugator" => Element::Conjugator,
            other => return Err(format!("unknown element {other:?}")),
        }),
        ElementDoc::Tagged(t) => match t {
            TaggedElement::Quat(c) => {
                if c.len() != 4 {
                    return Err(format!("quaternion needs 4 components, got {}", c.len()));
                }
                let v = c.iter().map(scalar).collect::<Result<Vec<_>, _>>()?;
                UnitQuaternion::normalized(Quaternion::new(v[0], v[1], v[2], v[3]), LITERAL_UNIT_TOL)
                    .map(Element::Quat)
                    .map_err(|e| e.to_string())
            }
            TaggedElement::Circle { axis: a, turns } => Ok(Element::Circle {
                axis: axis(a)?,
                turns: turns.polynomial()?,
            }),
            TaggedElement::Conjugate { elem, by } => Ok(Element::conjugate(element(elem)?, element(by)?)),
            TaggedElement::Product(items) => items.iter().map(element).collect::<Result<Vec<_>, _>>().map(Element::Product),
            TaggedElement::Inverse(e) => Ok(Element::Inverse(Box::new(element(e)?))),
        },
    }
}
