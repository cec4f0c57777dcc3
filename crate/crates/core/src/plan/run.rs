use std::collections::BTreeMap;

use num::{ToPrimitive, Zero};
use serde_json::{json, Map, Value};
use thiserror::Error;

use super::{ComputationPlan, PlannedRep, RepSource, Task};
use crate::chern_simons::{kirk_klassen_cs, BoundaryPath, CsError, SurgeryRow};
use crate::cohomology::{cohomology_summary, default_samples, rho_constancy_certificate, CohomologyError, ConstancyVerdict};
use crate::plan::doc::*;
use crate::quat::ExactCircleElement;
use crate::rational::{format_rational, frac, int, parse_rational, Rational};
use crate::report::{Report, TaskReport, TaskStatus};
use crate::reps::{RepError, Representation};
use crate::rho::{
    connected_sum_rho, rho_chain, rho_finite_image, rho_lens_space, CobordismStep, CoverData, FixedPointFamily, RhoError, RhoValue,
};
use crate::signatures::{
    cg_eigenspace_form, eigenspace_signature_from_cover, hermitian_signature, restrict_form, signature, solve_boundary_class,
    SeifertMatrix, SignatureError, SymmetricForm, HERMITIAN_TOL,
};
use crate::spectral_flow::{spectral_flow, SpectralFlowError, SpectralFlowInput};
use crate::words::GroupPresentation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TaskError {
    #[error("dependency {0:?} did not complete")]
    Dependency(String),
    #[error("input: {0}")]
    Input(String),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Rho(#[from] RhoError),
    #[error(transparent)]
    Cs(#[from] CsError),
    #[error(transparent)]
    SpectralFlow(#[from] SpectralFlowError),
}

fn input(msg: impl Into<String>) -> TaskError {
    TaskError::Input(msg.into())
}

fn rat(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

fn rho_json(r: &RhoValue) -> Value {
    json!({ "value": r.value, "exact": r.exact.as_ref().map(format_rational) })
}

pub(crate) fn provenance(spec: &TaskSpec) -> &'static str {
    match spec {
        TaskSpec::Cohomology(_) => "twisted cohomology from the Fox-calculus cocycle system: dim H1 = dim Z1 - 3 + dim H0",
        TaskSpec::RhoConstancy(_) => "path certificate: cohomology sampled along the path; h constant away from t = 0 keeps rho constant",
        TaskSpec::Signature(s) => match s.method {
            SignatureMethod::Form => "signature of the intersection (linking) form",
            SignatureMethod::Classes => "intersection form restricted to classes bounding the targets",
            SignatureMethod::Transfer => "complex eigenspace signature of a double cover by transfer: Sign X~ - Sign X",
            SignatureMethod::CassonGordon => "Hermitian eigenspace form (1 - w^-r) A + (1 - w^r) A^T of a Seifert matrix",
        },
        TaskSpec::Cs(c) if c.value.is_some() => "supplied Chern-Simons value",
        TaskSpec::Cs(_) => "Kirk-Klassen integral -sum_j 2 b_j a_j' along an abelian boundary path",
        TaskSpec::RhoPipeline(_) => "rho chain: finite-cover fixed-point sum, lens spaces, connected sums and flat cobordism steps 3 Sign W - Sign Q",
        TaskSpec::SpectralFlow(_) => "SF = 8 (cs1 - cs0) + (rho1 - rho0 - h1 - h0) / 2",
    }
}

/// The field a reference without `"field"` selects.
fn default_field(kind: &str) -> &'static str {
    match kind {
        "cohomology" | "lemma4" => "h",
        "signature" => "signature",
        "cs" => "value",
        "rho_pipeline" => "rho",
        _ => "sf",
    }
}

struct Runner<'a> {
    plan: &'a ComputationPlan,
    outputs: BTreeMap<String, Result<Value, TaskError>>,
}

impl Runner<'_> {
    fn lookup(&self, r: &RefDoc) -> Result<Value, TaskError> {
        let task = self.plan.task(&r.task).ok_or_else(|| input(format!("unknown task {:?}", r.task)))?;
        let out = match self.outputs.get(&r.task) {
            Some(Ok(v)) => v,
            _ => return Err(TaskError::Dependency(r.task.clone())),
        };
        let field = r.field.as_deref().unwrap_or_else(|| default_field(task.kind()));
        field
            .split('.')
            .try_fold(out, |v, key| v.get(key))
            .cloned()
            .ok_or_else(|| input(format!("task {:?} has no field {field:?}", r.task)))
    }

    fn value(&self, op: &Operand) -> Result<Value, TaskError> {
        match op {
            Operand::Ref(r) => self.lookup(r),
            Operand::Int(n) => Ok(json!(n)),
            Operand::Text(s) => Ok(Value::String(s.clone())),
        }
    }

    fn rational(&self, op: &Operand) -> Result<Rational, TaskError> {
        as_rational(&self.value(op)?)
    }

    fn integer(&self, op: &Operand) -> Result<i64, TaskError> {
        let r = self.rational(op)?;
        r.is_integer()
            .then(|| r.to_integer().to_i64())
            .flatten()
            .ok_or_else(|| input(format!("expected an integer, got {}", format_rational(&r))))
    }

    fn rho(&self, op: &Operand) -> Result<RhoValue, TaskError> {
        as_rho(&self.value(op)?)
    }

    fn representation(&self, name: &str) -> Result<(&GroupPresentation, Representation), TaskError> {
        let PlannedRep { presentation, source } = &self.plan.representations[name];
        let pres = &self.plan.presentations[presentation];
        let rep = match source {
            RepSource::Images(e) => Representation::from_elements(e)?,
            RepSource::Trivial => Representation::trivial(pres.generator_count()),
            RepSource::FromPath { path, at, indices } => {
                let planned = &self.plan.paths[path];
                let full = planned.path.at(&self.plan.presentations[&planned.presentation], at)?;
                full.restrict(indices)?
            }
        };
        Ok((pres, rep))
    }

    fn run(&self, task: &Task) -> Result<Value, TaskError> {
        match &task.spec {
            TaskSpec::Cohomology(c) => {
                let (pres, rep) = self.representation(&c.representation)?;
                let s = cohomology_summary(pres, &rep)?;
                Ok(json!({
                    "representation": c.representation,
                    "dim_z1": s.dim_z1,
                    "dim_h0": s.dim_h0,
                    "dim_h1": s.dim_h1,
                    "h": s.h,
                    "class": s.class,
                }))
            }
            TaskSpec::RhoConstancy(c) => {
                let planned = &self.plan.paths[&c.path];
                let samples = match &c.samples {
                    Some(s) => s.iter().map(|x| parse_rational(x).map_err(|e| input(e.to_string()))).collect::<Result<Vec<_>, _>>()?,
                    None => default_samples(),
                };
                let cert = rho_constancy_certificate(&self.plan.presentations[&planned.presentation], &planned.path, &samples);
                let samples: Vec<Value> = cert
                    .samples
                    .iter()
                    .map(|s| json!({ "t": s.t, "dim_z1": s.summary.dim_z1, "dim_h0": s.summary.dim_h0, "dim_h1": s.summary.dim_h1, "h": s.summary.h }))
                    .collect();
                let mut out = Map::new();
                out.insert("path".into(), json!(c.path));
                out.insert("samples".into(), Value::Array(samples));
                match &cert.verdict {
                    ConstancyVerdict::RhoConstant { h, variant } => {
                        out.insert("verdict".into(), json!("rho-constant"));
                        out.insert("h".into(), json!(h));
                        out.insert("variant".into(), json!(variant));
                    }
                    ConstancyVerdict::NotApplicable { reason } => {
                        out.insert("verdict".into(), json!("not-applicable"));
                        out.insert("reason".into(), json!(reason));
                    }
                }
                Ok(Value::Object(out))
            }
            TaskSpec::Signature(s) => self.signature(s),
            TaskSpec::Cs(c) => cs(c),
            TaskSpec::RhoPipeline(p) => self.rho_pipeline(p),
            TaskSpec::SpectralFlow(s) => {
                let inp = SpectralFlowInput {
                    cs0: self.rational(&s.cs0)?,
                    cs1: self.rational(&s.cs1)?,
                    rho0: self.rho(&s.rho0)?,
                    rho1: self.rho(&s.rho1)?,
                    h0: nonnegative(self.integer(&s.h0)?)?,
                    h1: nonnegative(self.integer(&s.h1)?)?,
                };
                let r = spectral_flow(&inp)?;
                Ok(json!({
                    "sf": r.sf,
                    "sf_mod8": r.sf_mod8,
                    "residual": r.residual,
                    "exact": r.exact,
                    "convention": r.convention,
                    "zero_modes": "zero modes at a0 count as positive eigenvalues, at a1 as negative",
                    "inputs": {
                        "cs0": rat(&inp.cs0),
                        "cs1": rat(&inp.cs1),
                        "rho0": rho_json(&inp.rho0),
                        "rho1": rho_json(&inp.rho1),
                        "h0": inp.h0,
                        "h1": inp.h1,
                    },
                }))
            }
        }
    }

    fn signature(&self, s: &SignatureTask) -> Result<Value, TaskError> {
        let req = |o: &Option<Vec<Vec<i64>>>, name: &str| o.clone().ok_or_else(|| input(format!("missing {name}")));
        match s.method {
            SignatureMethod::Form => {
                let q = SymmetricForm::from_integers(&req(&s.form, "form")?)?;
                let (p, n, z) = q.inertia();
                Ok(json!({ "signature": signature(&q), "positive": p, "negative": n, "zero": z }))
            }
            SignatureMethod::Classes => {
                let q = SymmetricForm::from_integers(&req(&s.form, "form")?)?;
                let boundary = req(&s.boundary, "boundary")?;
                let mut classes = Vec::new();
                let mut nontrivial = Vec::new();
                for (k, target) in req(&s.targets, "targets")?.iter().enumerate() {
                    match solve_boundary_class(&boundary, target) {
                        Ok(x) => classes.push(x),
                        Err(SignatureError::NoSolution) => nontrivial.push(k),
                        Err(e) => return Err(e.into()),
                    }
                }
                let restricted = restrict_form(&q, &classes)?;
                let m = restricted.matrix();
                let matrix: Vec<Vec<Value>> = (0..m.rows()).map(|r| (0..m.cols()).map(|c| rat(&m[(r, c)])).collect()).collect();
                let classes: Vec<Vec<Value>> = classes.iter().map(|x| x.iter().map(rat).collect()).collect();
                Ok(json!({
                    "signature": signature(&restricted),
                    "classes": classes,
                    "restricted": matrix,
                    "nontrivial_targets": nontrivial,
                }))
            }
            SignatureMethod::Transfer => {
                let total = self.integer(s.sign_total.as_ref().ok_or_else(|| input("missing sign_total"))?)?;
                let quotient = self.integer(s.sign_quotient.as_ref().ok_or_else(|| input("missing sign_quotient"))?)?;
                let alpha = eigenspace_signature_from_cover(total, quotient);
                Ok(json!({
                    "signature": alpha,
                    "sign_complex": CobordismStep::complex_from_alpha(alpha),
                    "sign_total": total,
                    "sign_quotient": quotient,
                }))
            }
            SignatureMethod::CassonGordon => {
                let a = SeifertMatrix::new(req(&s.seifert, "seifert")?)?;
                let (m, r) = (s.m.unwrap_or(0), s.r.unwrap_or(0));
                let h = hermitian_signature(&cg_eigenspace_form(&a, m, r)?, HERMITIAN_TOL)?;
                Ok(json!({ "signature": h.signature, "positive": h.positive, "negative": h.negative, "zero": h.zero }))
            }
        }
    }

    fn rho_source(&self, doc: &RhoSourceDoc) -> Result<(RhoValue, Value), TaskError> {
        if let Some(v) = &doc.value {
            let r = RhoValue::exact(parse_rational(v).map_err(|e| input(e.to_string()))?);
            return Ok((r.clone(), json!({ "kind": "value", "rho": rho_json(&r), "source": doc.source })));
        }
        if let Some(l) = &doc.lens {
            let r = rho_lens_space(l.p, l.q, l.k)?;
            return Ok((r.clone(), json!({ "kind": "lens", "p": l.p, "q": l.q, "k": l.k, "rho": rho_json(&r) })));
        }
        if let Some(parts) = &doc.connected_sum {
            let mut total = RhoValue::zero();
            let mut details = Vec::new();
            for p in parts {
                let (r, d) = self.rho_source(p)?;
                total = connected_sum_rho(&total, &r);
                details.push(d);
            }
            return Ok((total.clone(), json!({ "kind": "connected_sum", "parts": details, "rho": rho_json(&total) })));
        }
        if let Some(task) = &doc.task {
            let r = as_rho(&self.lookup(&RefDoc { task: task.clone(), field: doc.field.clone() })?)?;
            return Ok((r.clone(), json!({ "kind": "ref", "task": task, "rho": rho_json(&r) })));
        }
        let c = doc.finite_cover.as_ref().ok_or_else(|| input("empty rho source"))?;
        let parse = |s: &str| parse_rational(s).map_err(|e| input(e.to_string()));
        let image = ExactCircleElement::new(super::axis(&c.generator_image.axis).map_err(input)?, parse(&c.generator_image.turns)?);
        let families = c
            .families
            .iter()
            .map(|f| {
                Ok(FixedPointFamily {
                    count: f.count,
                    period: f.period,
                    theta1_step: parse(&f.theta1_step)?,
                    theta2_step: parse(&f.theta2_step)?,
                })
            })
            .collect::<Result<Vec<_>, TaskError>>()?;
        let sign_g = crate::rational::to_f64(&c.sign_g.as_deref().map(parse).transpose()?.unwrap_or_else(Rational::zero));
        let cover = CoverData::from_fixed_points(c.m, &image, &families, |_| sign_g)?;
        let r = rho_finite_image(&cover);
        let subtotals: Map<String, Value> = c
            .subtotals
            .iter()
            .map(|&k| (k.to_string(), rho_json(&rho_finite_image(&cover.restrict_to_order(k)))))
            .collect();
        Ok((r.clone(), json!({ "kind": "finite_cover", "m": c.m, "rho": rho_json(&r), "subtotals": subtotals })))
    }

    fn rho_pipeline(&self, p: &RhoPipelineTask) -> Result<Value, TaskError> {
        let (terminal, terminal_detail) = self.rho_source(&p.terminal)?;
        let mut cobordisms = Vec::new();
        let mut steps: Vec<(Option<CobordismStep>, Value)> = Vec::new();
        for s in &p.steps {
            if let Some(d) = &s.deformation {
                let note = match &d.task {
                    Some(t) => {
                        let v = self.lookup(&RefDoc { task: t.clone(), field: Some("verdict".into()) })?;
                        if v != json!("rho-constant") {
                            return Err(input(format!("deformation {:?}: certificate {t:?} is {v}", s.label)));
                        }
                        json!({ "certificate": t })
                    }
                    None => json!({ "cited": d.cited }),
                };
                steps.push((None, note));
                continue;
            }
            let sign_w = self.integer(s.sign_w.as_ref().ok_or_else(|| input("missing sign_w"))?)?;
            let step = if let Some(q) = &s.sign_q {
                CobordismStep::new(&s.label, sign_w, self.integer(q)?)
            } else if let Some(c) = &s.sign_complex {
                CobordismStep::with_complex(&s.label, sign_w, self.integer(c)?)
            } else {
                let a = self.integer(s.sign_alpha.as_ref().ok_or_else(|| input("missing twisted signature"))?)?;
                CobordismStep::with_complex(&s.label, sign_w, CobordismStep::complex_from_alpha(a))
            };
            cobordisms.push(step.clone());
            steps.push((Some(step), json!({ "source": s.source })));
        }
        let rho = rho_chain(&terminal, &cobordisms);

        // walk back from the terminal boundary to label both sides of every step
        let mut after = terminal.clone();
        let mut rows = Vec::new();
        for ((step, extra), doc) in steps.iter().zip(&p.steps).rev() {
            let delta = step.as_ref().map_or(0, CobordismStep::delta);
            let before = after.add_integer(-delta);
            let mut row = json!({
                "label": doc.label,
                "delta": delta,
                "rho_before": rho_json(&before),
                "rho_after": rho_json(&after),
            });
            let obj = row.as_object_mut().expect("object");
            match step {
                Some(c) => {
                    obj.insert("kind".into(), json!("cobordism"));
                    obj.insert("sign_w".into(), json!(c.sign_w));
                    obj.insert("sign_q".into(), json!(c.sign_q));
                }
                None => {
                    obj.insert("kind".into(), json!("deformation"));
                }
            }
            if let Value::Object(extra) = extra {
                obj.extend(extra.iter().filter(|(_, v)| !v.is_null()).map(|(k, v)| (k.clone(), v.clone())));
            }
            rows.push(row);
            after = before;
        }
        rows.reverse();
        debug_assert_eq!(after, rho);
        Ok(json!({ "rho": rho_json(&rho), "terminal": terminal_detail, "steps": rows }))
    }
}

fn nonnegative(n: i64) -> Result<u64, TaskError> {
    u64::try_from(n).map_err(|_| input(format!("expected a nonnegative integer, got {n}")))
}

fn as_rational(v: &Value) -> Result<Rational, TaskError> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| input(e.to_string())),
        Value::Number(n) => n.as_i64().map(int).ok_or_else(|| input(format!("{n} is not an exact number"))),
        Value::Object(o) => match o.get("exact") {
            Some(e @ Value::String(_)) => as_rational(e),
            _ => Err(input("value has no exact rational")),
        },
        other => Err(input(format!("{other} is not a number"))),
    }
}

fn as_rho(v: &Value) -> Result<RhoValue, TaskError> {
    match v {
        Value::Object(o) => match (o.get("exact"), o.get("value").and_then(Value::as_f64)) {
            (Some(e @ Value::String(_)), _) => Ok(RhoValue::exact(as_rational(e)?)),
            (_, Some(x)) => Ok(RhoValue::float(x)),
            _ => Err(input("malformed rho value")),
        },
        other => as_rational(other).map(RhoValue::exact),
    }
}

fn cs(c: &CsTask) -> Result<Value, TaskError> {
    if let Some(v) = &c.value {
        let value = parse_rational(v).map_err(|e| input(e.to_string()))?;
        let residue = frac(&value);
        let lift = (&value - &residue).to_integer().to_i64().ok_or_else(|| input("lift out of range"))?;
        if c.lift.is_some_and(|l| l != lift) {
            return Err(input(format!("value {v} does not have lift {}", c.lift.unwrap_or_default())));
        }
        return Ok(json!({ "value": rat(&value), "residue": rat(&residue), "lift": lift }));
    }
    let meridians = c
        .meridians
        .iter()
        .flatten()
        .map(|(k, m)| m.piecewise().map(|p| (k.clone(), p)).map_err(input))
        .collect::<Result<BTreeMap<_, _>, _>>()?;
    let rows: Vec<SurgeryRow> = c
        .longitudes
        .iter()
        .flatten()
        .map(|(k, e)| SurgeryRow {
            component: k.clone(),
            exponents: e.iter().map(|(g, n)| (g.clone(), *n)).collect(),
        })
        .collect();
    let path = BoundaryPath::from_surgery(&rows, &meridians)?;
    let result = kirk_klassen_cs(&path);
    let value = match c.lift {
        Some(l) => result.value.clone().with_lift(l).lifted().expect("lift set"),
        None => result.raw.clone(),
    };
    let longitudes: Map<String, Value> = path
        .components
        .iter()
        .map(|comp| (comp.name.clone(), json!(comp.longitude.pieces().iter().map(ToString::to_string).collect::<Vec<_>>())))
        .collect();
    let contributions: Map<String, Value> = result.contributions.iter().map(|(k, v)| (k.clone(), rat(v))).collect();
    Ok(json!({
        "raw": rat(&result.raw),
        "residue": rat(&result.value.residue),
        "lift": c.lift,
        "value": rat(&value),
        "longitudes": longitudes,
        "contributions": contributions,
    }))
}

/// Executes every task in dependency order. A failed task marks its dependents as skipped;
/// independent tasks still run.
pub fn run_plan(plan: &ComputationPlan) -> Report {
    let mut runner = Runner {
        plan,
        outputs: BTreeMap::new(),
    };
    for &k in &plan.order {
        let task = &plan.tasks[k];
        let blocked = task
            .spec
            .task_refs()
            .into_iter()
            .find(|d| !matches!(runner.outputs.get(*d), Some(Ok(_))));
        let out = match blocked {
            Some(d) => Err(TaskError::Dependency(d.to_string())),
            None => runner.run(task),
        };
        if let Err(e) = &out {
            log::warn!("task {:?} failed: {e}", task.id);
        }
        runner.outputs.insert(task.id.clone(), out);
    }
    let tasks: Vec<TaskReport> = plan
        .tasks
        .iter()
        .map(|t| {
            let (status, result, error) = match runner.outputs.remove(&t.id) {
                Some(Ok(v)) => (TaskStatus::Ok, Some(v), None),
                Some(Err(e @ TaskError::Dependency(_))) => (TaskStatus::Skipped, None, Some(e.to_string())),
                Some(Err(e)) => (TaskStatus::Failed, None, Some(e.to_string())),
                None => (TaskStatus::Skipped, None, Some("not run".into())),
            };
            TaskReport {
                id: t.id.clone(),
                kind: t.kind().to_string(),
                provenance: provenance(&t.spec).to_string(),
                source: t.source.clone(),
                status,
                result,
                error,
            }
        })
        .collect();
    let spectral_flow = tasks
        .iter()
        .rev()
        .find(|t| t.kind == "spectral_flow" && t.status == TaskStatus::Ok)
        .and_then(|t| t.result.as_ref()?.get("sf")?.as_i64());
    Report {
        plan: plan.name.clone(),
        tasks,
        spectral_flow,
    }
}
