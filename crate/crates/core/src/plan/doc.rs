use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::Issues;
use crate::chern_simons::Piecewise;
use crate::poly::Polynomial;
use crate::rational::parse_rational;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanDocument {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub presentation: Option<PresentationDoc>,
    #[serde(default)]
    pub presentations: BTreeMap<String, PresentationDoc>,
    #[serde(default)]
    pub representations: BTreeMap<String, RepresentationDoc>,
    #[serde(default)]
    pub paths: BTreeMap<String, PathDoc>,
    #[serde(default)]
    pub tasks: Vec<Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresentationDoc {
    pub generators: Vec<String>,
    #[serde(default)]
    pub relators: Vec<String>,
    #[serde(default)]
    pub source: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarDoc {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisDoc {
    Name(String),
    Vector([f64; 3]),
}

/// Polynomial in `t` in full turns: a single rational or ascending coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TurnsDoc {
    Constant(String),
    Coeffs(Vec<String>),
}

impl TurnsDoc {
    pub fn polynomial(&self) -> Result<Polynomial, String> {
        let coeffs = match self {
            TurnsDoc::Constant(c) => vec![parse_rational(c).map_err(|e| e.to_string())?],
            TurnsDoc::Coeffs(cs) => cs
                .iter()
                .map(|c| parse_rational(c).map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()?,
        };
        Ok(Polynomial::new(coeffs))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementDoc {
    Name(String),
    Tagged(TaggedElement),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TaggedElement {
    Quat(Vec<ScalarDoc>),
    Circle { axis: AxisDoc, turns: TurnsDoc },
    Conjugate { elem: Box<ElementDoc>, by: Box<ElementDoc> },
    Product(Vec<ElementDoc>),
    Inverse(Box<ElementDoc>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationDoc {
    #[serde(default)]
    pub presentation: Option<String>,
    #[serde(default)]
    pub images: Option<BTreeMap<String, ElementDoc>>,
    #[serde(default)]
    pub from_path: Option<String>,
    #[serde(default)]
    pub at: Option<String>,
    #[serde(default)]
    pub trivial: Option<bool>,
    #[serde(default)]
    pub source: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugatorDoc {
    /// Index of the relator that pins the conjugator.
    pub relator: usize,
    #[serde(default)]
    pub axis: Option<AxisDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathDoc {
    #[serde(default)]
    pub presentation: Option<String>,
    pub images: BTreeMap<String, ElementDoc>,
    #[serde(default)]
    pub conjugator: Option<ConjugatorDoc>,
    #[serde(default)]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefDoc {
    #[serde(rename = "ref")]
    pub task: String,
    #[serde(default)]
    pub field: Option<String>,
}

/// A literal or a reference to another task's output field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Operand {
    Ref(RefDoc),
    Int(i64),
    Text(String),
}

impl Operand {
    fn task_ref(&self) -> Option<&str> {
        match self {
            Operand::Ref(r) => Some(&r.task),
            _ => None,
        }
    }

    fn check(&self, at: &str, issues: &mut Issues) {
        if let Operand::Text(s) = self {
            if let Err(e) = parse_rational(s) {
                issues.push(at, e.to_string());
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohomologyTask {
    pub representation: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstancyTask {
    pub path: String,
    #[serde(default)]
    pub samples: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignatureMethod {
    /// Signature of an integer symmetric matrix.
    Form,
    /// Restriction of `form` to the classes bounding each of `targets`.
    Classes,
    /// Complex eigenspace signature of a double cover: `Sign X̃ − Sign X`.
    Transfer,
    /// Hermitian eigenspace form of a Seifert matrix.
    CassonGordon,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureTask {
    pub method: SignatureMethod,
    #[serde(default)]
    pub form: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    pub boundary: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    pub targets: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    pub sign_total: Option<Operand>,
    #[serde(default)]
    pub sign_quotient: Option<Operand>,
    #[serde(default)]
    pub seifert: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    pub m: Option<i64>,
    #[serde(default)]
    pub r: Option<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PiecewiseDoc {
    Pieces { breaks: Vec<String>, pieces: Vec<Vec<String>> },
    Polynomial(TurnsDoc),
}

impl PiecewiseDoc {
    pub fn piecewise(&self) -> Result<Piecewise, String> {
        match self {
            PiecewiseDoc::Polynomial(p) => p.polynomial().map(Piecewise::single),
            PiecewiseDoc::Pieces { breaks, pieces } => {
                let breaks = breaks
                    .iter()
                    .map(|b| parse_rational(b).map_err(|e| e.to_string()))
                    .collect::<Result<Vec<_>, _>>()?;
                let pieces = pieces
                    .iter()
                    .map(|p| TurnsDoc::Coeffs(p.clone()).polynomial())
                    .collect::<Result<Vec<_>, _>>()?;
                Piecewise::new(breaks, pieces).map_err(|e| e.to_string())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsTask {
    /// Meridian paths `a_j(t)` in turns.
    #[serde(default)]
    pub meridians: Option<BTreeMap<String, PiecewiseDoc>>,
    /// Exponent sums of the meridians in each longitude.
    #[serde(default)]
    pub longitudes: Option<BTreeMap<String, BTreeMap<String, i64>>>,
    /// A supplied CS value, instead of a path.
    #[serde(default)]
    pub value: Option<String>,
    #[serde(default)]
    pub lift: Option<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    pub count: u64,
    pub period: u64,
    pub theta1_step: String,
    pub theta2_step: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleLiteral {
    pub axis: AxisDoc,
    pub turns: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverDoc {
    pub m: u64,
    pub generator_image: CircleLiteral,
    pub families: Vec<FamilyDoc>,
    /// `Sign(gⁿ, W)`, the same for every `n`.
    #[serde(default)]
    pub sign_g: Option<String>,
    /// Element orders whose partial sums are reported.
    #[serde(default)]
    pub subtotals: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LensDoc {
    pub p: i64,
    pub q: i64,
    pub k: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoSourceDoc {
    #[serde(default)]
    pub value: Option<String>,
    #[serde(default)]
    pub finite_cover: Option<CoverDoc>,
    #[serde(default)]
    pub lens: Option<LensDoc>,
    #[serde(default)]
    pub connected_sum: Option<Vec<RhoSourceDoc>>,
    #[serde(default, rename = "ref")]
    pub task: Option<String>,
    #[serde(default)]
    pub field: Option<String>,
    #[serde(default)]
    pub source: Option<String>,
}

impl RhoSourceDoc {
    fn task_refs<'a>(&'a self, out: &mut Vec<&'a str>) {
        if let Some(t) = &self.task {
            out.push(t);
        }
        for s in self.connected_sum.iter().flatten() {
            s.task_refs(out);
        }
    }

    fn check(&self, at: &str, issues: &mut Issues) {
        let set = [
            self.value.is_some(),
            self.finite_cover.is_some(),
            self.lens.is_some(),
            self.connected_sum.is_some(),
            self.task.is_some(),
        ];
        if set.iter().filter(|b| **b).count() != 1 {
            issues.push(at, "exactly one of \"value\", \"finite_cover\", \"lens\", \"connected_sum\", \"ref\" is required");
            return;
        }
        if self.field.is_some() && self.task.is_none() {
            issues.push(format!("{at}.field"), "\"field\" needs \"ref\"");
        }
        if let Some(v) = &self.value {
            if let Err(e) = parse_rational(v) {
                issues.push(format!("{at}.value"), e.to_string());
            }
        }
        if let Some(c) = &self.finite_cover {
            let at = format!("{at}.finite_cover");
            if let Err(e) = parse_rational(&c.generator_image.turns) {
                issues.push(format!("{at}.generator_image.turns"), e.to_string());
            }
            if let Err(m) = super::axis(&c.generator_image.axis) {
                issues.push(format!("{at}.generator_image.axis"), m);
            }
            for (k, f) in c.families.iter().enumerate() {
                for (name, s) in [("theta1_step", &f.theta1_step), ("theta2_step", &f.theta2_step)] {
                    if let Err(e) = parse_rational(s) {
                        issues.push(format!("{at}.families[{k}].{name}"), e.to_string());
                    }
                }
                if f.period == 0 {
                    issues.push(format!("{at}.families[{k}].period"), "must be positive");
                }
            }
            if let Some(Err(e)) = c.sign_g.as_deref().map(parse_rational) {
                issues.push(format!("{at}.sign_g"), e.to_string());
            }
        }
        for (k, s) in self.connected_sum.iter().flatten().enumerate() {
            s.check(&format!("{at}.connected_sum[{k}]"), issues);
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationDoc {
    /// A path-certificate task whose verdict must be rho-constant.
    #[serde(default, rename = "ref")]
    pub task: Option<String>,
    /// Supplied justification when no certificate is computed.
    #[serde(default)]
    pub cited: Option<String>,
}

/// One flat cobordism (or a rho-preserving deformation) between consecutive boundaries.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDoc {
    pub label: String,
    #[serde(default)]
    pub sign_w: Option<Operand>,
    #[serde(default)]
    pub sign_q: Option<Operand>,
    #[serde(default)]
    pub sign_complex: Option<Operand>,
    #[serde(default)]
    pub sign_alpha: Option<Operand>,
    #[serde(default)]
    pub deformation: Option<DeformationDoc>,
    #[serde(default)]
    pub source: Option<String>,
}

impl StepDoc {
    fn operands(&self) -> impl Iterator<Item = &Operand> {
        [&self.sign_w, &self.sign_q, &self.sign_complex, &self.sign_alpha]
            .into_iter()
            .flatten()
    }

    fn check(&self, at: &str, issues: &mut Issues) {
        if let Some(d) = &self.deformation {
            if self.operands().next().is_some() {
                issues.push(at, "a deformation step takes no signatures");
            }
            if d.task.is_some() == d.cited.is_some() {
                issues.push(format!("{at}.deformation"), "exactly one of \"ref\", \"cited\" is required");
            }
            return;
        }
        if self.sign_w.is_none() {
            issues.push(format!("{at}.sign_w"), "required for a cobordism step");
        }
        let twisted = [&self.sign_q, &self.sign_complex, &self.sign_alpha].iter().filter(|o| o.is_some()).count();
        if twisted != 1 {
            issues.push(at, "exactly one of \"sign_q\", \"sign_complex\", \"sign_alpha\" is required");
        }
        for o in self.operands() {
            o.check(at, issues);
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoPipelineTask {
    /// Rho of the last boundary in the chain.
    pub terminal: RhoSourceDoc,
    /// Steps ordered from the boundary of interest to the terminal one.
    #[serde(default)]
    pub steps: Vec<StepDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralFlowTask {
    pub cs0: Operand,
    pub cs1: Operand,
    pub rho0: Operand,
    pub rho1: Operand,
    pub h0: Operand,
    pub h1: Operand,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskSpec {
    Cohomology(CohomologyTask),
    #[serde(rename = "lemma4", alias = "rho_constancy")]
    RhoConstancy(ConstancyTask),
    Signature(SignatureTask),
    Cs(CsTask),
    RhoPipeline(RhoPipelineTask),
    SpectralFlow(SpectralFlowTask),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectRef {
    Representation,
    Path,
}

impl TaskSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskSpec::Cohomology(_) => "cohomology",
            TaskSpec::RhoConstancy(_) => "lemma4",
            TaskSpec::Signature(_) => "signature",
            TaskSpec::Cs(_) => "cs",
            TaskSpec::RhoPipeline(_) => "rho_pipeline",
            TaskSpec::SpectralFlow(_) => "spectral_flow",
        }
    }

    pub fn object_refs(&self) -> Vec<(ObjectRef, &str)> {
        match self {
            TaskSpec::Cohomology(c) => vec![(ObjectRef::Representation, c.representation.as_str())],
            TaskSpec::RhoConstancy(c) => vec![(ObjectRef::Path, c.path.as_str())],
            _ => Vec::new(),
        }
    }

    /// Ids of the tasks whose outputs this task consumes.
    pub fn task_refs(&self) -> Vec<&str> {
        let mut out = Vec::new();
        match self {
            TaskSpec::Signature(s) => out.extend([&s.sign_total, &s.sign_quotient].into_iter().flatten().filter_map(Operand::task_ref)),
            TaskSpec::RhoPipeline(p) => {
                p.terminal.task_refs(&mut out);
                for s in &p.steps {
                    out.extend(s.operands().filter_map(Operand::task_ref));
                    out.extend(s.deformation.iter().filter_map(|d| d.task.as_deref()));
                }
            }
            TaskSpec::SpectralFlow(s) => {
                out.extend([&s.cs0, &s.cs1, &s.rho0, &s.rho1, &s.h0, &s.h1].into_iter().filter_map(Operand::task_ref))
            }
            _ => {}
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub(super) fn check(&self, at: &str, issues: &mut Issues) {
        match self {
            TaskSpec::Cohomology(_) => {}
            TaskSpec::RhoConstancy(c) => {
                for (k, s) in c.samples.iter().flatten().enumerate() {
                    if let Err(e) = parse_rational(s) {
                        issues.push(format!("{at}.samples[{k}]"), e.to_string());
                    }
                }
            }
            TaskSpec::Signature(s) => {
                let need = |issues: &mut Issues, name: &str, present: bool| {
                    if !present {
                        issues.push(format!("{at}.{name}"), format!("required by method {:?}", s.method));
                    }
                };
                match s.method {
                    SignatureMethod::Form => need(issues, "form", s.form.is_some()),
                    SignatureMethod::Classes => {
                        need(issues, "form", s.form.is_some());
                        need(issues, "boundary", s.boundary.is_some());
                        need(issues, "targets", s.targets.is_some());
                    }
                    SignatureMethod::Transfer => {
                        need(issues, "sign_total", s.sign_total.is_some());
                        need(issues, "sign_quotient", s.sign_quotient.is_some());
                    }
                    SignatureMethod::CassonGordon => {
                        need(issues, "seifert", s.seifert.is_some());
                        need(issues, "m", s.m.is_some());
                        need(issues, "r", s.r.is_some());
                    }
                }
            }
            TaskSpec::Cs(c) => {
                let path = c.meridians.is_some() || c.longitudes.is_some();
                if path == c.value.is_some() {
                    issues.push(at, "give either \"meridians\" and \"longitudes\" or \"value\"");
                } else if path && (c.meridians.is_none() || c.longitudes.is_none()) {
                    issues.push(at, "\"meridians\" and \"longitudes\" go together");
                }
                if let Some(Err(e)) = c.value.as_deref().map(parse_rational) {
                    issues.push(format!("{at}.value"), e.to_string());
                }
                for (name, m) in c.meridians.iter().flatten() {
                    if let Err(e) = m.piecewise() {
                        issues.push(format!("{at}.meridians.{name}"), e);
                    }
                }
            }
            TaskSpec::RhoPipeline(p) => {
                p.terminal.check(&format!("{at}.terminal"), issues);
                for (k, s) in p.steps.iter().enumerate() {
                    s.check(&format!("{at}.steps[{k}]"), issues);
                }
            }
            TaskSpec::SpectralFlow(s) => {
                for (name, o) in [("cs0", &s.cs0), ("cs1", &s.cs1), ("rho0", &s.rho0), ("rho1", &s.rho1), ("h0", &s.h0), ("h1", &s.h1)] {
                    o.check(&format!("{at}.{name}"), issues);
                }
            }
        }
    }
}
