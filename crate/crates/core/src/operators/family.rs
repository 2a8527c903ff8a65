use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use num_traits::Zero;
use rayon::prelude::*;
use serde_json::Value;

use super::{operator_residual, OperatorKind};
use crate::algebra::{AlgebraTable, Catalog};
use crate::arith::{parse_expr, Bindings, Param, Poly, RatExpr};
use crate::error::{Error, Result};

/// Parameter name used for a symbolic Rota-Baxter weight.
pub const SYMBOLIC_WEIGHT: &str = "lam";

/// One parametric chart of operators on a named algebra.
#[derive(Clone, Debug)]
pub struct OperatorFamily {
    pub algebra: String,
    pub kind: OperatorKind,
    /// 1-based position among the charts of this algebra and kind.
    pub index: usize,
    /// `chart[row][col]`; rows of a malformed chart may have any length.
    pub chart: Vec<Vec<RatExpr>>,
    pub free: Vec<Param>,
    /// Polynomials required to be nonzero on the chart's domain.
    pub constraints: Vec<RatExpr>,
    pub malformed: bool,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FamilyId {
    pub algebra: String,
    pub kind: &'static str,
    pub index: usize,
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} #{}", self.algebra, self.kind, self.index)
    }
}

impl OperatorFamily {
    pub fn id(&self) -> FamilyId {
        FamilyId {
            algebra: self.algebra.clone(),
            kind: self.kind.slug(),
            index: self.index,
        }
    }

    /// Parameters occurring in the chart.
    pub fn chart_params(&self) -> BTreeSet<Param> {
        self.chart
            .iter()
            .flatten()
            .flat_map(RatExpr::params)
            .collect()
    }

    pub fn with_kind(&self, kind: OperatorKind) -> OperatorFamily {
        OperatorFamily {
            kind,
            ..self.clone()
        }
    }

    /// Substitute algebra parameters (such as `mu`) into chart and constraints.
    pub fn bind(&self, bindings: &Bindings) -> Result<OperatorFamily> {
        let chart = self
            .chart
            .iter()
            .map(|row| row.iter().map(|e| e.substitute(bindings)).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        let constraints = self
            .constraints
            .iter()
            .map(|e| e.substitute(bindings))
            .collect::<Result<Vec<_>>>()?;
        Ok(OperatorFamily {
            chart,
            constraints,
            ..self.clone()
        })
    }

    fn check_domain(&self) -> Result<()> {
        if self.constraints.iter().any(RatExpr::is_zero) {
            return Err(Error::DenominatorVanishes);
        }
        Ok(())
    }
}

fn proportional(a: &Poly, b: &Poly) -> bool {
    match (a.terms().next(), b.terms().next()) {
        (Some((_, ca)), Some((_, cb))) => &a.scale(cb) == &b.scale(ca),
        _ => false,
    }
}

fn parse_string_list(v: Option<&Value>, pointer: &str) -> Result<Vec<String>> {
    let Some(v) = v else {
        return Ok(Vec::new());
    };
    v.as_array()
        .ok_or_else(|| Error::schema(pointer, "expected an array of strings"))?
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.as_str()
                .map(str::to_owned)
                .ok_or_else(|| Error::schema(format!("{pointer}/{i}"), "expected a string"))
        })
        .collect()
}

fn parse_at(text: &str, pointer: &str) -> Result<RatExpr> {
    parse_expr(text).map_err(|e| Error::schema(pointer, e.to_string()))
}

fn parse_family(item: &Value, pointer: &str) -> Result<OperatorFamily> {
    let field = |k: &str| {
        item.get(k)
            .ok_or_else(|| Error::schema(format!("{pointer}/{k}"), "missing field"))
    };
    let algebra = field("algebra")?
        .as_str()
        .ok_or_else(|| Error::schema(format!("{pointer}/algebra"), "expected a string"))?
        .to_string();
    let slug = field("kind")?
        .as_str()
        .ok_or_else(|| Error::schema(format!("{pointer}/kind"), "expected a string"))?;
    let weight = match item.get("weight") {
        Some(w) => Some(parse_at(
            w.as_str()
                .ok_or_else(|| Error::schema(format!("{pointer}/weight"), "expected a string"))?,
            &format!("{pointer}/weight"),
        )?),
        None => None,
    };
    let kind = OperatorKind::parse(slug, weight)
        .map_err(|e| Error::schema(format!("{pointer}/kind"), e.to_string()))?;
    let index = match item.get("index") {
        Some(v) => v
            .as_u64()
            .ok_or_else(|| Error::schema(format!("{pointer}/index"), "expected an integer"))?
            as usize,
        None => 0,
    };
    let malformed = match item.get("malformed") {
        Some(v) => v
            .as_bool()
            .ok_or_else(|| Error::schema(format!("{pointer}/malformed"), "expected a boolean"))?,
        None => false,
    };
    let rows = field("chart")?
        .as_array()
        .ok_or_else(|| Error::schema(format!("{pointer}/chart"), "expected an array of rows"))?;
    let mut chart = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        let cells = parse_string_list(Some(row), &format!("{pointer}/chart/{r}"))?;
        let parsed = cells
            .iter()
            .enumerate()
            .map(|(c, s)| parse_at(s, &format!("{pointer}/chart/{r}/{c}")))
            .collect::<Result<Vec<_>>>()?;
        chart.push(parsed);
    }
    let free: Vec<Param> = parse_string_list(item.get("free"), &format!("{pointer}/free"))?
        .iter()
        .map(|s| Param::new(s))
        .collect();
    let constraints =
        parse_string_list(item.get("constraints"), &format!("{pointer}/constraints"))?
            .iter()
            .enumerate()
            .map(|(i, s)| parse_at(s, &format!("{pointer}/constraints/{i}")))
            .collect::<Result<Vec<_>>>()?;
    let notes = parse_string_list(item.get("notes"), &format!("{pointer}/notes"))?;
    let fam = OperatorFamily {
        algebra,
        kind,
        index,
        chart,
        free,
        constraints,
        malformed,
        notes,
    };
    if !fam.malformed {
        let n = fam.chart.len();
        if n == 0 || fam.chart.iter().any(|r| r.len() != n) {
            return Err(Error::schema(
                format!("{pointer}/chart"),
                "chart must be square",
            ));
        }
        for (r, row) in fam.chart.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                if !e.is_polynomial()
                    && !fam
                        .constraints
                        .iter()
                        .any(|k| k.is_polynomial() && proportional(k.num(), e.den()))
                {
                    return Err(Error::schema(
                        format!("{pointer}/constraints"),
                        format!(
                            "denominator {} of chart entry ({}, {}) is not a constraint",
                            e.den(),
                            r + 1,
                            c + 1
                        ),
                    ));
                }
            }
        }
    }
    Ok(fam)
}

pub fn parse_families(value: &Value) -> Result<Vec<OperatorFamily>> {
    let items = value
        .as_array()
        .ok_or_else(|| Error::schema("", "family file must be a JSON array"))?;
    let mut out: Vec<OperatorFamily> = Vec::with_capacity(items.len());
    for (idx, item) in items.iter().enumerate() {
        let mut fam = parse_family(item, &format!("/{idx}"))?;
        if fam.index == 0 {
            fam.index = 1 + out
                .iter()
                .filter(|f| f.algebra == fam.algebra && f.kind.slug() == fam.kind.slug())
                .count();
        }
        out.push(fam);
    }
    Ok(out)
}

pub fn load_families(path: impl AsRef<Path>) -> Result<Vec<OperatorFamily>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim().is_empty() {
        return Err(Error::schema("", "empty document"));
    }
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::schema("", e.to_string()))?;
    parse_families(&value)
}

/// First nonvanishing residual entry. Indices are 1-based.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub condition: usize,
    pub i: usize,
    pub j: usize,
    pub q: usize,
    pub value: RatExpr,
    /// Algebra parameters fixed when the failure was found.
    pub binding: Bindings,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub holds: bool,
    /// Per condition (two for averaging).
    pub conditions: Vec<bool>,
    pub witness: Option<Witness>,
}

/// Algebra parameter assignments to check: finite admissible sets are
/// enumerated, the rest stay symbolic.
fn finite_bindings(a: &AlgebraTable) -> Vec<Bindings> {
    let mut out = vec![Bindings::new()];
    for spec in a.params().iter().filter(|s| s.admissible.is_finite()) {
        out = out
            .into_iter()
            .flat_map(|b| {
                spec.admissible.samples().into_iter().map(move |v| {
                    let mut nb = b.clone();
                    nb.insert(spec.param.clone(), RatExpr::scalar(v));
                    nb
                })
            })
            .collect();
    }
    out
}

/// Substitute the chart into the operator identity, symbolically in its free
/// parameters and in every algebra parameter with an infinite admissible set.
pub fn verify_family(a: &AlgebraTable, fam: &OperatorFamily) -> Result<Verdict> {
    if fam.algebra != a.name() {
        return Err(Error::Usage(format!(
            "family {} belongs to {}, not {}",
            fam.id(),
            fam.algebra,
            a.name()
        )));
    }
    if fam.malformed {
        return Err(Error::Usage(format!("family {} is malformed", fam.id())));
    }
    fam.check_domain()?;
    let allowed: BTreeSet<Param> = fam
        .free
        .iter()
        .cloned()
        .chain(a.params().iter().map(|s| s.param.clone()))
        .collect();
    if let Some(p) = fam
        .chart_params()
        .into_iter()
        .find(|p| !allowed.contains(p))
    {
        return Err(Error::UnboundParam(p.to_string()));
    }
    let conds = fam.kind.conditions();
    let mut conditions = vec![true; conds];
    let mut witness = None;
    for binding in finite_bindings(a) {
        let table = a.bind(&binding)?;
        let bound = fam.bind(&binding)?;
        bound.check_domain()?;
        let r = operator_residual(&table, &fam.kind, &bound.chart)?;
        let n = r.dim();
        for (c, ok) in conditions.iter_mut().enumerate() {
            let zero = (0..n * n * n).all(|k| r.entries()[c * n * n * n + k].is_zero());
            *ok &= zero;
        }
        if witness.is_none() {
            if let Some((c, i, j, q)) = r.first_nonzero() {
                witness = Some(Witness {
                    condition: c + 1,
                    i: i + 1,
                    j: j + 1,
                    q: q + 1,
                    value: r.get(c, i, j, q).clone(),
                    binding: binding.clone(),
                });
            }
        }
    }
    Ok(Verdict {
        holds: witness.is_none(),
        conditions,
        witness,
    })
}

/// Number of free parameters occurring in the chart.
pub fn family_dimension(fam: &OperatorFamily) -> usize {
    let used = fam.chart_params();
    fam.free.iter().filter(|p| used.contains(p)).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Classification {
    /// Rota-Baxter chart solving the weight-0 identity only.
    HoldsAtZeroWeight,
    /// Rota-Baxter chart solving the identity for every weight.
    HoldsSymbolicWeight,
    Holds,
    Fails,
    /// Excluded from the audit: the transcribed chart is garbled.
    Malformed,
    /// Could not be evaluated (unknown algebra, vanishing constraint, ...).
    Error,
}

impl Classification {
    pub fn slug(self) -> &'static str {
        match self {
            Classification::HoldsAtZeroWeight => "holds-at-weight-0",
            Classification::HoldsSymbolicWeight => "holds-symbolic-weight",
            Classification::Holds => "holds",
            Classification::Fails => "fails",
            Classification::Malformed => "malformed",
            Classification::Error => "error",
        }
    }

    pub fn passed(self) -> bool {
        matches!(
            self,
            Classification::HoldsAtZeroWeight
                | Classification::HoldsSymbolicWeight
                | Classification::Holds
        )
    }
}

#[derive(Clone, Debug)]
pub struct FamilyOutcome {
    pub id: FamilyId,
    pub classification: Classification,
    pub dimension: usize,
    /// At the weight recorded in the file (Rota-Baxter) or the plain identity.
    pub verdict: Option<Verdict>,
    /// Rota-Baxter with symbolic weight, when requested.
    pub symbolic: Option<Verdict>,
    pub error: Option<String>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub outcomes: Vec<FamilyOutcome>,
}

impl AuditReport {
    pub fn audited(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| o.classification != Classification::Malformed)
            .count()
    }

    pub fn passed(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| o.classification.passed())
            .count()
    }

    pub fn count(&self, c: Classification) -> usize {
        self.outcomes
            .iter()
            .filter(|o| o.classification == c)
            .count()
    }

    /// Families that passed, for coverage and dimension counts.
    pub fn verified<'a>(&self, families: &'a [OperatorFamily]) -> Vec<&'a OperatorFamily> {
        let ok: BTreeSet<&FamilyId> = self
            .outcomes
            .iter()
            .filter(|o| o.classification.passed())
            .map(|o| &o.id)
            .collect();
        families.iter().filter(|f| ok.contains(&f.id())).collect()
    }
}

fn audit_one(catalog: &Catalog, fam: &OperatorFamily, symbolic_weight: bool) -> FamilyOutcome {
    let mut out = FamilyOutcome {
        id: fam.id(),
        classification: Classification::Malformed,
        dimension: family_dimension(fam),
        verdict: None,
        symbolic: None,
        error: None,
        notes: fam.notes.clone(),
    };
    if fam.malformed {
        return out;
    }
    let run = || -> Result<(Verdict, Option<Verdict>)> {
        let a = catalog.get(&fam.algebra)?;
        let v = verify_family(a, fam)?;
        let sym = match (&fam.kind, symbolic_weight) {
            (OperatorKind::RotaBaxter(_), true) => Some(verify_family(
                a,
                &fam.with_kind(OperatorKind::RotaBaxter(RatExpr::named(SYMBOLIC_WEIGHT))),
            )?),
            _ => None,
        };
        Ok((v, sym))
    };
    match run() {
        Ok((v, sym)) => {
            out.classification = match &fam.kind {
                OperatorKind::RotaBaxter(_) if sym.as_ref().is_some_and(|s| s.holds) => {
                    Classification::HoldsSymbolicWeight
                }
                OperatorKind::RotaBaxter(_) if v.holds => Classification::HoldsAtZeroWeight,
                _ if v.holds => Classification::Holds,
                _ => Classification::Fails,
            };
            out.verdict = Some(v);
            out.symbolic = sym;
        }
        Err(e) => {
            out.classification = Classification::Error;
            out.error = Some(e.to_string());
        }
    }
    out
}

/// Verify every family; malformed ones are recorded but not evaluated.
pub fn audit_families(
    catalog: &Catalog,
    families: &[OperatorFamily],
    symbolic_weight: bool,
) -> AuditReport {
    let outcomes = families
        .par_iter()
        .map(|f| audit_one(catalog, f, symbolic_weight))
        .collect();
    AuditReport { outcomes }
}

/// Claimed ranges of the largest chart dimension per algebra, by kind.
pub const CLAIMED_RANGES: [(&str, usize, usize); 4] = [
    ("rota-baxter", 3, 10),
    ("nijenhuis", 5, 10),
    ("reynolds", 2, 9),
    ("averaging", 2, 9),
];

#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub algebra: String,
    pub family: Option<FamilyId>,
    pub dimension: Option<usize>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionReport {
    pub kind: &'static str,
    pub claimed: (usize, usize),
    /// Per algebra: the largest verified chart and its parameter count.
    pub per_algebra: BTreeMap<String, (FamilyId, usize)>,
    pub global: Option<(usize, usize)>,
    pub mismatches: Vec<Mismatch>,
}

impl DimensionReport {
    pub fn matches_claim(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compare chart parameter counts of the families that passed `audit`
/// against the claimed range for `kind`. Algebras with no verified family
/// are mismatches naming their first failing chart.
pub fn dimension_report(
    catalog: &Catalog,
    audit: &AuditReport,
    families: &[OperatorFamily],
    kind: &str,
) -> Result<DimensionReport> {
    let verified = audit.verified(families);
    let &(slug, lo, hi) = CLAIMED_RANGES
        .iter()
        .find(|(k, _, _)| *k == kind)
        .ok_or_else(|| Error::Usage(format!("unknown operator kind `{kind}`")))?;
    let mut per_algebra: BTreeMap<String, (FamilyId, usize)> = BTreeMap::new();
    for f in verified.iter().filter(|f| f.kind.slug() == kind) {
        let d = family_dimension(f);
        let slot = per_algebra.entry(f.algebra.clone()).or_insert((f.id(), d));
        if d > slot.1 {
            *slot = (f.id(), d);
        }
    }
    if per_algebra.is_empty() {
        return Ok(DimensionReport {
            kind: slug,
            claimed: (lo, hi),
            per_algebra,
            global: None,
            mismatches: Vec::new(),
        });
    }
    let mut mismatches = Vec::new();
    for name in catalog.names() {
        match per_algebra.get(name) {
            None => {
                let failed: Vec<&FamilyOutcome> = audit
                    .outcomes
                    .iter()
                    .filter(|o| o.id.algebra == name && o.id.kind == slug)
                    .filter(|o| matches!(o.classification, Classification::Fails | Classification::Error))
                    .collect();
                mismatches.push(Mismatch {
                    algebra: name.to_string(),
                    family: failed.first().map(|o| o.id.clone()),
                    dimension: failed.first().map(|o| o.dimension),
                    reason: if failed.is_empty() {
                        "no family transcribed".into()
                    } else {
                        format!("no verified family; {} transcribed charts fail verification", failed.len())
                    },
                })
            }
            Some((id, d)) if *d < lo || *d > hi => mismatches.push(Mismatch {
                algebra: name.to_string(),
                family: Some(id.clone()),
                dimension: Some(*d),
                reason: format!("largest chart has {d} parameters, outside {lo}..={hi}"),
            }),
            Some(_) => {}
        }
    }
    let dims = per_algebra.values().map(|(_, d)| *d);
    let global = (dims.clone().min().unwrap_or(0), dims.max().unwrap_or(0));
    for (bound, claimed, label) in [(global.0, lo, "minimum"), (global.1, hi, "maximum")] {
        if bound != claimed {
            let (alg, (id, d)) = per_algebra
                .iter()
                .find(|(_, (_, d))| *d == bound)
                .expect("bound attained");
            let already = mismatches.iter().any(|m| m.family.as_ref() == Some(id));
            if !already {
                mismatches.push(Mismatch {
                    algebra: alg.clone(),
                    family: Some(id.clone()),
                    dimension: Some(*d),
                    reason: format!("global {label} {bound} differs from claimed {claimed}"),
                });
            }
        }
    }
    Ok(DimensionReport {
        kind: slug,
        claimed: (lo, hi),
        per_algebra,
        global: Some(global),
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{default_data_dir, DataSet};
    use serde_json::json;

    fn l1_families() -> Vec<OperatorFamily> {
        parse_families(&json!([
            {"algebra": "L1", "kind": "rota-baxter", "weight": "0", "index": 1,
             "chart": [["0","0","0","0"],["0","0","0","0"],["r31","r32","r33","0"],["r41","r42","r43","0"]],
             "free": ["r31","r32","r33","r41","r42","r43"], "constraints": [], "malformed": false},
            {"algebra": "L1", "kind": "rota-baxter", "weight": "0", "index": 2,
             "chart": [["1","0","0","0"],["0","1","0","0"],["0","0","1","0"],["0","0","0","1"]],
             "free": [], "constraints": [], "malformed": false},
            {"algebra": "L1", "kind": "averaging",
             "chart": [["0","0","0","0"],["0","0","0","0"],["0","0","0","0"],["0","0","0","0"]],
             "free": [], "constraints": []}
        ]))
        .unwrap()
    }

    #[test]
    fn verdicts() {
        let data = DataSet::load(default_data_dir()).unwrap();
        let l1 = data.resolved.get("L1").unwrap();
        let fams = l1_families();
        assert!(verify_family(l1, &fams[0]).unwrap().holds);
        let v = verify_family(l1, &fams[1]).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        assert_eq!((w.i, w.j, w.q), (1, 1, 2));
        assert_eq!(w.value, RatExpr::from_int(-1));
        let avg = verify_family(l1, &fams[2]).unwrap();
        assert_eq!(avg.conditions, vec![true, true]);
        assert_eq!(family_dimension(&fams[0]), 6);
        assert_eq!(family_dimension(&fams[2]), 0);
    }

    #[test]
    fn undeclared_denominator_is_rejected() {
        let bad = json!([{"algebra": "L1", "kind": "nijenhuis",
            "chart": [["1/x","0"],["0","0"]], "free": ["x"], "constraints": []}]);
        assert!(matches!(parse_families(&bad), Err(Error::Schema { .. })));
        let vanishing = parse_families(&json!([{"algebra": "L1", "kind": "nijenhuis",
            "chart": [["0","0","0","0"],["0","0","0","0"],["0","0","0","0"],["0","0","0","0"]],
            "free": [], "constraints": ["x - x"]}]))
        .unwrap();
        let data = DataSet::load(default_data_dir()).unwrap();
        assert!(matches!(
            verify_family(data.resolved.get("L1").unwrap(), &vanishing[0]),
            Err(Error::DenominatorVanishes)
        ));
    }

    #[test]
    fn audit_classifies_and_reports_dimensions() {
        let data = DataSet::load(default_data_dir()).unwrap();
        let fams = l1_families();
        let audit = audit_families(&data.resolved, &fams, true);
        let classes: Vec<_> = audit.outcomes.iter().map(|o| o.classification).collect();
        assert_eq!(
            classes,
            vec![
                Classification::HoldsAtZeroWeight,
                Classification::Fails,
                Classification::Holds
            ]
        );
        let rep = dimension_report(&data.resolved, &audit, &fams, "rota-baxter").unwrap();
        assert_eq!(rep.per_algebra["L1"].1, 6);
        assert_eq!(rep.global, Some((6, 6)));
        assert!(rep
            .mismatches
            .iter()
            .any(|m| m.algebra == "L2" && m.family.is_none()));
        let empty = dimension_report(&data.resolved, &audit, &fams, "reynolds").unwrap();
        assert!(empty.per_algebra.is_empty() && empty.mismatches.is_empty());
    }
}
