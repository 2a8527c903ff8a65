//! Report rendering. JSON output is canonical: keys sorted, numbers exact
//! and written as strings, two-space indentation, trailing newline.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde_json::{json, Map, Value};
use tempfile::NamedTempFile;

use crate::algebra::AlgebraTable;
use crate::arith::{Bindings, RatExpr, Scalar};
use crate::compat::{PairOutcome, PairReport};
use crate::error::{Error, Result};
use crate::operators::{AuditReport, Classification, DimensionReport, EquationSystem, FamilyId, FamilyOutcome, Verdict};
use crate::oracle::{CoverageReport, CoverageSweep, DualPathReport, FpMatrix};

pub const COVERAGE_NOTE: &str = "evidence, not proof: finite-field solutions matched against parametric charts";
pub const BASIS_NOTE: &str = "tables compared in the fixed basis as printed; no change of basis is searched";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// A rendered result in both formats.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub json: Value,
    pub text: String,
}

impl Report {
    pub fn new(json: Value, text: String) -> Self {
        Report { json, text }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => canonical_json(&self.json),
            Format::Text => {
                let mut t = self.text.clone();
                if !t.ends_with('\n') {
                    t.push('\n');
                }
                t
            }
        }
    }
}

pub fn canonical_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// Write to `path` through a temporary file in the same directory, or to
/// stdout when no path is given.
pub fn emit(report: &Report, format: Format, path: Option<&Path>) -> Result<()> {
    let body = report.render(format);
    match path {
        Some(path) => write_atomic(path, body.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn expr(e: &RatExpr) -> Value {
    Value::String(e.to_string())
}

pub fn scalar(s: &Scalar) -> Value {
    Value::String(s.to_string())
}

pub fn exprs(es: &[RatExpr]) -> Value {
    Value::Array(es.iter().map(expr).collect())
}

pub fn binding(b: &Bindings) -> Value {
    Value::Object(b.iter().map(|(k, v)| (k.to_string(), expr(v))).collect())
}

pub fn binding_text(b: &Bindings) -> String {
    if b.is_empty() {
        return String::new();
    }
    let parts: Vec<String> = b.iter().map(|(k, v)| format!("{k} = {v}")).collect();
    format!(" ({})", parts.join(", "))
}

pub fn family_id(id: &FamilyId) -> Value {
    json!({"algebra": id.algebra, "kind": id.kind, "index": id.index, "label": id.to_string()})
}

pub fn matrix(m: &FpMatrix) -> Value {
    Value::String(m.to_string())
}

pub fn table(t: &AlgebraTable) -> Value {
    let entries: Vec<Value> = t
        .nonzero()
        .map(|(i, j, k, c)| json!([i + 1, j + 1, k + 1, c.to_string()]))
        .collect();
    let params: Vec<Value> = t
        .params()
        .iter()
        .map(|p| json!({"name": p.param.to_string(), "admissible": p.admissible.to_string()}))
        .collect();
    json!({"name": t.name(), "dim": t.dim(), "params": params, "entries": entries})
}

pub fn table_text(t: &AlgebraTable) -> String {
    let mut s = format!("{} (dimension {})\n", t.name(), t.dim());
    for p in t.params() {
        let _ = writeln!(s, "  {} in {}", p.param, p.admissible);
    }
    for (i, j, k, c) in t.nonzero() {
        let _ = writeln!(s, "  [e{}, e{}] += ({c}) e{}", i + 1, j + 1, k + 1);
    }
    s
}

fn verdict(v: &Verdict) -> Value {
    let witness = v.witness.as_ref().map_or(Value::Null, |w| {
        json!({
            "condition": w.condition,
            "i": w.i,
            "j": w.j,
            "q": w.q,
            "value": expr(&w.value),
            "binding": binding(&w.binding),
        })
    });
    json!({"holds": v.holds, "conditions": v.conditions, "witness": witness})
}

fn outcome(o: &FamilyOutcome) -> Value {
    json!({
        "family": family_id(&o.id),
        "classification": o.classification.slug(),
        "dimension": o.dimension,
        "verdict": o.verdict.as_ref().map_or(Value::Null, verdict),
        "symbolic_weight": o.symbolic.as_ref().map_or(Value::Null, verdict),
        "error": o.error,
        "notes": o.notes,
    })
}

const CLASSES: [Classification; 6] = [
    Classification::HoldsAtZeroWeight,
    Classification::HoldsSymbolicWeight,
    Classification::Holds,
    Classification::Fails,
    Classification::Malformed,
    Classification::Error,
];

pub fn audit(r: &AuditReport) -> Report {
    let counts: Map<String, Value> = CLASSES
        .iter()
        .map(|&c| (c.slug().to_string(), json!(r.count(c))))
        .collect();
    let summary = json!({
        "audited": r.audited(),
        "passed": r.passed(),
        "pass_rate": format!("{}/{}", r.passed(), r.audited()),
        "counts": counts,
    });
    let j = json!({
        "families": r.outcomes.iter().map(outcome).collect::<Vec<_>>(),
        "summary": summary,
    });
    let mut t = String::new();
    for o in &r.outcomes {
        let _ = writeln!(t, "{}: {} (dimension {})", o.id, o.classification.slug(), o.dimension);
        let failing = o.verdict.iter().chain(&o.symbolic).find_map(|v| v.witness.as_ref());
        if o.classification == Classification::Fails {
            if let Some(w) = failing {
                let _ = writeln!(
                    t,
                    "  witness condition {} at (i, j, q) = ({}, {}, {}){}: {}",
                    w.condition,
                    w.i,
                    w.j,
                    w.q,
                    binding_text(&w.binding),
                    w.value
                );
            }
        }
        if let Some(e) = &o.error {
            let _ = writeln!(t, "  error: {e}");
        }
    }
    let _ = write!(t, "passed {}/{} audited", r.passed(), r.audited());
    for c in CLASSES {
        let _ = write!(t, ", {} {}", c.slug(), r.count(c));
    }
    t.push('\n');
    Report::new(j, t)
}

pub fn dimension(d: &DimensionReport) -> Report {
    let per: Map<String, Value> = d
        .per_algebra
        .iter()
        .map(|(a, (id, n))| (a.clone(), json!({"family": family_id(id), "dimension": n})))
        .collect();
    let mismatches: Vec<Value> = d
        .mismatches
        .iter()
        .map(|m| {
            json!({
                "algebra": m.algebra,
                "family": m.family.as_ref().map_or(Value::Null, family_id),
                "dimension": m.dimension,
                "reason": m.reason,
            })
        })
        .collect();
    let j = json!({
        "kind": d.kind,
        "measure": "chart parameter count of verified families",
        "claimed": [d.claimed.0, d.claimed.1],
        "global": d.global.map(|(lo, hi)| json!([lo, hi])),
        "per_algebra": per,
        "mismatches": mismatches,
        "matches_claim": d.matches_claim(),
    });
    let mut t = format!(
        "{}: chart parameter counts, claimed range {}..{}\n",
        d.kind, d.claimed.0, d.claimed.1
    );
    for (a, (id, n)) in &d.per_algebra {
        let _ = writeln!(t, "  {a}: {n} ({id})");
    }
    match d.global {
        Some((lo, hi)) => {
            let _ = writeln!(t, "global range {lo}..{hi}");
        }
        None => t.push_str("no verified families\n"),
    }
    for m in &d.mismatches {
        let fam = m.family.as_ref().map_or(String::new(), |f| format!(" [{f}]"));
        let _ = writeln!(t, "mismatch {}{fam}: {}", m.algebra, m.reason);
    }
    Report::new(j, t)
}

pub fn equations(s: &EquationSystem) -> Report {
    let eqs: Vec<Value> = s
        .nonzero()
        .map(|e| json!({"condition": e.condition + 1, "i": e.i + 1, "j": e.j + 1, "q": e.q + 1, "poly": e.poly.to_string()}))
        .collect();
    let j = json!({
        "algebra": s.algebra,
        "kind": s.kind.slug(),
        "weight": s.kind.weight().map(expr),
        "unknowns": s.unknowns.iter().map(|u| u.to_string()).collect::<Vec<_>>(),
        "multiplier": s.multiplier.to_string(),
        "count": eqs.len(),
        "equations": eqs,
    });
    let mut t = format!(
        "{} on {}: {} nonzero equations in {} unknowns (cleared by {})\n",
        s.kind,
        s.algebra,
        s.nonzero().count(),
        s.unknowns.len(),
        s.multiplier
    );
    for e in s.nonzero() {
        let _ = writeln!(
            t,
            "  [{}] ({}, {}, {}): {} = 0",
            e.condition + 1,
            e.i + 1,
            e.j + 1,
            e.q + 1,
            e.poly
        );
    }
    Report::new(j, t)
}

fn coverage_json(r: &CoverageReport) -> Value {
    json!({
        "algebra": r.algebra,
        "kind": r.kind.slug(),
        "weight": r.kind.weight().map(expr),
        "p": r.p,
        "binding": binding(&r.binding),
        "matrices": r.matrices.to_string(),
        "total": r.total,
        "covered": r.covered,
        "uncovered_count": r.total - r.covered,
        "uncovered": r.uncovered.iter().map(matrix).collect::<Vec<_>>(),
        "families": r.families.iter().map(family_id).collect::<Vec<_>>(),
        "skipped": r.skipped.iter().map(|(id, why)| json!({"family": family_id(id), "reason": why})).collect::<Vec<_>>(),
    })
}

fn coverage_header(r: &CoverageReport) -> String {
    format!(
        "{} {} over F_{}{}: {} solutions in {} matrices, {} covered, {} uncovered\n",
        r.algebra,
        r.kind,
        r.p,
        binding_text(&r.binding),
        r.total,
        r.matrices,
        r.covered,
        r.total - r.covered
    )
}

pub fn coverage(r: &CoverageReport, dual: Option<&DualPathReport>) -> Report {
    let mut j = coverage_json(r);
    j["note"] = json!(COVERAGE_NOTE);
    let mut t = format!("{COVERAGE_NOTE}\n");
    t.push_str(&coverage_header(r));
    for id in &r.families {
        let _ = writeln!(t, "  chart {id}");
    }
    for (id, why) in &r.skipped {
        let _ = writeln!(t, "  skipped {id}: {why}");
    }
    for m in &r.uncovered {
        let _ = writeln!(t, "  uncovered {m}");
    }
    if r.uncovered.len() < r.total - r.covered {
        let _ = writeln!(t, "  ({} more uncovered not listed)", r.total - r.covered - r.uncovered.len());
    }
    if let Some(d) = dual {
        j["dual_path"] = dual_json(d);
        let _ = writeln!(
            t,
            "dual path: direct {} compiled {} {}",
            d.direct,
            d.compiled,
            if d.agree() { "agree" } else { "DISAGREE" }
        );
    }
    Report::new(j, t)
}

fn dual_json(d: &DualPathReport) -> Value {
    json!({
        "matrices": d.matrices.to_string(),
        "direct": d.direct,
        "compiled": d.compiled,
        "agree": d.agree(),
        "disagreements": d.disagreements.iter().map(matrix).collect::<Vec<_>>(),
    })
}

pub fn sweep(s: &CoverageSweep) -> Report {
    let excluded: Vec<Value> = s
        .excluded
        .iter()
        .map(|(a, b, why)| json!({"algebra": a, "binding": binding(b), "reason": why}))
        .collect();
    let j = json!({
        "note": COVERAGE_NOTE,
        "p": s.p,
        "total": s.total(),
        "covered": s.covered(),
        "reports": s.reports.iter().map(coverage_json).collect::<Vec<_>>(),
        "excluded": excluded,
    });
    let mut t = format!("{COVERAGE_NOTE}\n");
    for r in &s.reports {
        t.push_str(&coverage_header(r));
        for m in &r.uncovered {
            let _ = writeln!(t, "  uncovered {m}");
        }
    }
    for (a, b, why) in &s.excluded {
        let _ = writeln!(t, "excluded {a}{}: {why}", binding_text(b));
    }
    let _ = writeln!(t, "over F_{}: {} of {} solutions covered", s.p, s.covered(), s.total());
    Report::new(j, t)
}

fn pair(p: &(String, String)) -> Value {
    json!([p.0, p.1])
}

fn pair_json(o: &PairOutcome) -> Value {
    let witness = o.witness.as_ref().map_or(Value::Null, |(t, v, b)| {
        json!({"triple": t, "value": exprs(v), "binding": binding(b)})
    });
    json!({
        "first": o.first,
        "second": o.second,
        "compatible": o.compatible,
        "samples": o.samples.iter().map(|(b, ok)| json!({"binding": binding(b), "compatible": ok})).collect::<Vec<_>>(),
        "witness": witness,
    })
}

fn pair_text(o: &PairOutcome) -> String {
    let mut t = format!(
        "({}, {}): {}\n",
        o.first,
        o.second,
        if o.compatible { "compatible" } else { "not compatible" }
    );
    if let Some(([i, j, k], v, b)) = &o.witness {
        let vs: Vec<String> = v.iter().map(ToString::to_string).collect();
        let _ = writeln!(
            t,
            "  combined bracket with both coefficients 1 fails at (e{i}, e{j}, e{k}){}: [{}]",
            binding_text(b),
            vs.join(", ")
        );
    }
    for (b, ok) in o.exceptions() {
        let _ = writeln!(t, "  exception{}: {}", binding_text(b), if *ok { "compatible" } else { "not compatible" });
    }
    t
}

pub fn pair_outcome(o: &PairOutcome) -> Report {
    let mut j = pair_json(o);
    j["note"] = json!(BASIS_NOTE);
    Report::new(j, format!("{BASIS_NOTE}\n{}", pair_text(o)))
}

pub fn pair_report(r: &PairReport) -> Report {
    let pairs = |ps: &[(String, String)]| Value::Array(ps.iter().map(pair).collect());
    let failing: Vec<Value> = r
        .outcomes
        .iter()
        .filter(|o| r.claimed_but_failing.contains(&(o.first.clone(), o.second.clone())))
        .map(pair_json)
        .collect();
    let exceptions: Vec<Value> = r
        .outcomes
        .iter()
        .filter(|o| !o.exceptions().is_empty())
        .map(|o| {
            json!({
                "pair": [o.first, o.second],
                "compatible": o.compatible,
                "bindings": o.exceptions().iter().map(|(b, _)| binding(b)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let combo: Vec<Value> = r
        .combination_failures
        .iter()
        .map(|(p, l1, l2)| json!({"pair": pair(p), "lambda1": scalar(l1), "lambda2": scalar(l2)}))
        .collect();
    let j = json!({
        "note": BASIS_NOTE,
        "sample_values": r.sample_values.iter().map(scalar).collect::<Vec<_>>(),
        "pairs_checked": r.pairs_checked.len(),
        "distinct_pairs_checked": r.pairs_checked.iter().filter(|(a, b)| a != b).count(),
        "diagonal_compatible": r.diagonal_compatible,
        "compatible": pairs(&r.compatible),
        "claimed_but_failing": pairs(&r.claimed_but_failing),
        "passing_but_unclaimed": pairs(&r.passing_but_unclaimed),
        "unmatchable": pairs(&r.unmatchable),
        "failing_witnesses": failing,
        "per_sample_exceptions": exceptions,
        "combination_check": {"trials_per_pair": r.combination_trials, "failures": combo},
    });
    let show = |ps: &[(String, String)]| -> String {
        ps.iter().map(|(a, b)| format!("({a}, {b})")).collect::<Vec<_>>().join(" ")
    };
    let mut t = format!("{BASIS_NOTE}\n");
    let distinct = r.pairs_checked.iter().filter(|(a, b)| a != b).count();
    let _ = writeln!(
        t,
        "checked {} pairs ({} distinct), diagonal {}/{} self-compatible",
        r.pairs_checked.len(),
        distinct,
        r.diagonal_compatible.len(),
        r.pairs_checked.len() - distinct
    );
    let _ = writeln!(t, "compatible ({}): {}", r.compatible.len(), show(&r.compatible));
    let _ = writeln!(t, "claimed but failing ({}): {}", r.claimed_but_failing.len(), show(&r.claimed_but_failing));
    let _ = writeln!(t, "passing but unclaimed ({}): {}", r.passing_but_unclaimed.len(), show(&r.passing_but_unclaimed));
    let _ = writeln!(t, "unmatchable ({}): {}", r.unmatchable.len(), show(&r.unmatchable));
    for o in r.outcomes.iter().filter(|o| r.claimed_but_failing.contains(&(o.first.clone(), o.second.clone()))) {
        t.push_str(&pair_text(o));
    }
    let _ = writeln!(
        t,
        "random combinations: {} per compatible pair, {} failures",
        r.combination_trials,
        r.combination_failures.len()
    );
    Report::new(j, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_json_sorts_keys() {
        let v = json!({"b": 1, "a": {"d": "1/2", "c": []}});
        assert_eq!(canonical_json(&v), "{\n  \"a\": {\n    \"c\": [],\n    \"d\": \"1/2\"\n  },\n  \"b\": 1\n}\n");
    }

    #[test]
    fn atomic_write_replaces_and_reports_missing_dirs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        let missing = dir.path().join("nope").join("r.json");
        assert!(matches!(write_atomic(&missing, b"x"), Err(Error::Io { .. })));
    }

    #[test]
    fn text_gets_trailing_newline() {
        let r = Report::new(json!(null), "x".into());
        assert_eq!(r.render(Format::Text), "x\n");
        assert_eq!(r.render(Format::Json), "null\n");
    }
}
