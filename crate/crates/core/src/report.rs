//! Plan reports and their renderings.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Ok,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub id: String,
    pub kind: String,
    pub provenance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub status: TaskStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Per-task results in plan order, plus the last computed spectral flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    #[serde(default)]
    pub plan: Option<String>,
    pub tasks: Vec<TaskReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral_flow: Option<i64>,
}

impl Report {
    pub fn task(&self, id: &str) -> Option<&TaskReport> {
        self.tasks.iter().find(|t| t.id == id)
    }

    /// A field of a successful task's result; nested keys are separated by dots.
    pub fn field(&self, id: &str, path: &str) -> Option<&Value> {
        let result = self.task(id)?.result.as_ref()?;
        path.split('.').try_fold(result, |v, k| v.get(k))
    }

    pub fn all_ok(&self) -> bool {
        self.tasks.iter().all(|t| t.status == TaskStatus::Ok)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Human,
    Json,
}

pub fn emit_report(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Human => human(report),
    }
}

/// `exact` when present, else the float.
fn number(v: &Value) -> String {
    match v {
        Value::Object(o) => match o.get("exact") {
            Some(Value::String(s)) => s.clone(),
            _ => o.get("value").map(number).unwrap_or_default(),
        },
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn get<'a>(v: &'a Value, key: &str) -> &'a Value {
    v.get(key).unwrap_or(&Value::Null)
}

fn summary(kind: &str, r: &Value) -> Vec<String> {
    let g = |k| number(get(r, k));
    match kind {
        "cohomology" => vec![format!(
            "H0 = {}, H1 = {}, h = {} (dim Z1 = {}, {})",
            g("dim_h0"),
            g("dim_h1"),
            g("h"),
            g("dim_z1"),
            g("class")
        )],
        "lemma4" => {
            let mut lines = vec![match get(r, "verdict").as_str() {
                Some("rho-constant") => format!("rho-constant, h = {} ({})", g("h"), g("variant")),
                _ => format!("not applicable: {}", g("reason")),
            }];
            for s in get(r, "samples").as_array().into_iter().flatten() {
                lines.push(format!("  t = {}: dim Z1 = {}, H0 = {}, H1 = {}", number(get(s, "t")), number(get(s, "dim_z1")), number(get(s, "dim_h0")), number(get(s, "dim_h1"))));
            }
            lines
        }
        "signature" => {
            let mut line = format!("signature = {}", g("signature"));
            if let Some(c) = r.get("sign_complex") {
                line.push_str(&format!(", complex-as-real = {}", number(c)));
            }
            if let Some(Value::Array(n)) = r.get("nontrivial_targets") {
                if !n.is_empty() {
                    line.push_str(&format!(", non-bounding targets {}", Value::Array(n.clone())));
                }
            }
            vec![line]
        }
        "cs" => {
            let mut line = format!("cs = {} (residue {} mod 1", g("value"), g("residue"));
            if let Some(raw) = r.get("raw") {
                line.push_str(&format!(", integral {}", number(raw)));
            }
            line.push(')');
            let mut lines = vec![line];
            if let Some(Value::Object(l)) = r.get("longitudes") {
                for (k, pieces) in l {
                    let pieces: Vec<String> = pieces.as_array().into_iter().flatten().map(number).collect();
                    lines.push(format!("  b_{k} = {}", pieces.join(" | ")));
                }
            }
            lines
        }
        "rho_pipeline" => {
            let mut lines = Vec::new();
            let t = get(r, "terminal");
            lines.push(format!("terminal rho = {} ({})", number(get(t, "rho")), number(get(t, "kind"))));
            if let Some(Value::Object(subs)) = t.get("subtotals") {
                for (k, v) in subs {
                    lines.push(format!("  order {k} subtotal = {}", number(v)));
                }
            }
            for s in get(r, "steps").as_array().into_iter().flatten() {
                let label = number(get(s, "label"));
                if get(s, "kind").as_str() == Some("deformation") {
                    lines.push(format!("  {label}: deformation, rho = {}", number(get(s, "rho_after"))));
                } else {
                    lines.push(format!(
                        "  {label}: Sign W = {}, Sign Q = {}, delta = {}: {} -> {}",
                        number(get(s, "sign_w")),
                        number(get(s, "sign_q")),
                        number(get(s, "delta")),
                        number(get(s, "rho_before")),
                        number(get(s, "rho_after"))
                    ));
                }
            }
            lines.push(format!("rho = {}", number(get(r, "rho"))));
            lines
        }
        "spectral_flow" => vec![format!("SF = {} (mod 8: {}, residual {})", g("sf"), g("sf_mod8"), g("residual"))],
        _ => vec![r.to_string()],
    }
}

fn human(report: &Report) -> String {
    let mut out = String::new();
    if let Some(p) = &report.plan {
        let _ = writeln!(out, "plan: {p}");
    }
    let _ = writeln!(out, "tasks:");
    for t in &report.tasks {
        let _ = writeln!(out, "[{}] {} ({:?})", t.id, t.kind, t.status);
        let _ = writeln!(out, "  via: {}", t.provenance);
        if let Some(s) = &t.source {
            let _ = writeln!(out, "  source: {s}");
        }
        if let Some(r) = &t.result {
            for line in summary(&t.kind, r) {
                let _ = writeln!(out, "  {line}");
            }
        }
        if let Some(e) = &t.error {
            let _ = writeln!(out, "  error: {e}");
        }
    }
    if let Some(sf) = report.spectral_flow {
        let _ = writeln!(out, "spectral flow: SF = {sf}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report() {
        let r = Report { plan: None, tasks: vec![], spectral_flow: None };
        assert_eq!(emit_report(&r, Format::Human), "tasks:\n");
        let json = emit_report(&r, Format::Json);
        assert_eq!(serde_json::from_str::<Report>(&json).unwrap(), r);
        assert!(json.contains("\"tasks\": []"));
    }

    #[test]
    fn numbers_prefer_exact() {
        assert_eq!(number(&serde_json::json!({"value": 4.8666, "exact": "73/15"})), "73/15");
        assert_eq!(number(&serde_json::json!({"value": 0.5, "exact": null})), "0.5");
        assert_eq!(number(&serde_json::json!(3)), "3");
    }
}
