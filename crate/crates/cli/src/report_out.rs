//! Report rendering: a human-readable text form and a JSON form carrying
//! the same verdicts. Claims are sorted by name so output ordering is
//! canonical regardless of evaluation order.

use serde::Serialize;
use strongdiv_core::report::{Report, Verdict};

#[derive(Serialize)]
pub struct RenderedClaim {
    pub name: String,
    pub basis: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    /// Effective precision the claim was decided at; a pass here is a
    /// statement about the truncated rings only.
    pub precision: String,
    pub wall_ms: u64,
}

#[derive(Serialize)]
pub struct RenderedReport {
    pub tool: String,
    pub title: String,
    pub context: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<String>,
    pub wall_ms: u64,
    pub claims: Vec<RenderedClaim>,
}

pub fn render(report: &Report, wall_ms: u64) -> RenderedReport {
    let mut claims: Vec<RenderedClaim> = report
        .claims
        .iter()
        .map(|c| RenderedClaim {
            name: c.name.clone(),
            basis: c.basis.clone(),
            verdict: c.verdict.as_str().to_string(),
            witness: c.witness.clone(),
            precision: report.context.clone(),
            wall_ms,
        })
        .collect();
    claims.sort_by(|a, b| a.name.cmp(&b.name));
    RenderedReport {
        tool: format!("strongdiv {}", env!("CARGO_PKG_VERSION")),
        title: report.title.clone(),
        context: report.context.clone(),
        seed: report.seed.map(|s| format!("{:#x}", s)),
        wall_ms,
        claims,
    }
}

pub fn to_human(r: &RenderedReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("report {}\n", r.title));
    out.push_str(&format!("tool {}\n", r.tool));
    out.push_str(&format!("context {}\n", r.context));
    if let Some(seed) = &r.seed {
        out.push_str(&format!("seed {}\n", seed));
    }
    out.push_str(&format!("wall_ms {}\n", r.wall_ms));
    for c in &r.claims {
        out.push_str(&format!("claim {} {} prec=\"{}\" basis=\"{}\"", c.name, c.verdict, c.precision, c.basis));
        if let Some(w) = &c.witness {
            out.push_str(&format!(" witness=\"{}\"", w));
        }
        out.push('\n');
    }
    out
}

pub fn to_json(r: &RenderedReport) -> String {
    serde_json::to_string_pretty(r).expect("report serialization") + "\n"
}

/// 0 = all pass, 1 = some claim failed, 2 = indeterminate at the working
/// precision.
pub fn exit_code(report: &Report) -> u8 {
    if report.claims.iter().any(|c| c.verdict == Verdict::Fail) {
        1
    } else if report.claims.iter().any(|c| c.verdict == Verdict::Indeterminate) {
        2
    } else {
        0
    }
}
