use rayon::prelude::*;

use super::fp::{enumerate_solutions, FpMatrix};
use super::membership::FpChart;
use crate::algebra::{AlgebraTable, Catalog};
use crate::arith::Bindings;
use crate::error::{Error, Result};
use crate::operators::{FamilyId, OperatorFamily, OperatorKind};

/// How many enumerated solutions are matched by some family chart.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageReport {
    pub algebra: String,
    pub kind: OperatorKind,
    pub p: u32,
    /// Algebra parameters fixed for this run.
    pub binding: Bindings,
    /// Size of the sweep, `p^(n²)`.
    pub matrices: u128,
    pub total: usize,
    pub covered: usize,
    /// The first `cap` uncovered solutions in enumeration order.
    pub uncovered: Vec<FpMatrix>,
    pub cap: usize,
    pub families: Vec<FamilyId>,
    /// Families that could not be reduced mod `p`, with the reason.
    pub skipped: Vec<(FamilyId, String)>,
}

/// Enumerate the operators of `kind` on `a` (parameters bound) over `F_p`
/// and test each against the supplied family charts.
pub fn coverage(
    a: &AlgebraTable,
    kind: &OperatorKind,
    p: u32,
    families: &[OperatorFamily],
    cap: usize,
    budget: u128,
    membership_budget: u128,
) -> Result<CoverageReport> {
    let solutions = enumerate_solutions(a, kind, p, budget)?;
    let mut charts = Vec::new();
    let mut skipped = Vec::new();
    for f in families {
        match FpChart::new(f, p) {
            Ok(c) => charts.push(c),
            Err(e) => skipped.push((f.id(), e.to_string())),
        }
    }
    let covered_flags = solutions
        .par_iter()
        .map(|m| -> Result<bool> {
            for c in &charts {
                if c.contains(m, membership_budget)? {
                    return Ok(true);
                }
            }
            Ok(false)
        })
        .collect::<Result<Vec<bool>>>()?;
    let covered = covered_flags.iter().filter(|&&c| c).count();
    let uncovered = solutions
        .iter()
        .zip(&covered_flags)
        .filter(|(_, &c)| !c)
        .map(|(m, _)| m.clone())
        .take(cap)
        .collect();
    let mut ids: Vec<FamilyId> = charts.iter().map(|c| c.id().clone()).collect();
    ids.sort();
    skipped.sort();
    Ok(CoverageReport {
        algebra: a.name().to_string(),
        kind: kind.clone(),
        p,
        binding: Bindings::new(),
        matrices: super::fp::search_size(p, a.dim(), budget)?,
        total: solutions.len(),
        covered,
        uncovered,
        cap,
        families: ids,
        skipped,
    })
}

/// Whether the algebra or any of its families has a non-real coefficient.
pub fn involves_imaginary(a: &AlgebraTable, families: &[OperatorFamily]) -> bool {
    !a.is_real()
        || families.iter().filter(|f| f.algebra == a.name()).any(|f| {
            f.chart
                .iter()
                .flatten()
                .chain(&f.constraints)
                .any(|e| !e.is_real())
        })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub p: u32,
    pub kinds: Vec<OperatorKind>,
    pub cap: usize,
    pub budget: u128,
    pub membership_budget: u128,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageSweep {
    pub p: u32,
    pub reports: Vec<CoverageReport>,
    /// `(algebra, binding or empty, reason)` for runs that were not attempted.
    pub excluded: Vec<(String, Bindings, String)>,
}

impl CoverageSweep {
    pub fn total(&self) -> usize {
        self.reports.iter().map(|r| r.total).sum()
    }

    pub fn covered(&self) -> usize {
        self.reports.iter().map(|r| r.covered).sum()
    }
}

/// Coverage for every catalog algebra at each sample binding of its
/// parameters and every requested kind. `families` should hold verified
/// families only.
pub fn coverage_sweep(
    catalog: &Catalog,
    families: &[OperatorFamily],
    cfg: &SweepConfig,
) -> Result<CoverageSweep> {
    let mut reports = Vec::new();
    let mut excluded = Vec::new();
    for a in catalog.tables() {
        if involves_imaginary(a, families) {
            excluded.push((
                a.name().to_string(),
                Bindings::new(),
                "non-real coefficients; covered by symbolic verification only".into(),
            ));
            continue;
        }
        for binding in a.sample_bindings() {
            let bound = a.bind(&binding)?;
            for kind in &cfg.kinds {
                let mut fams = Vec::new();
                for f in families
                    .iter()
                    .filter(|f| f.algebra == a.name() && f.kind == *kind && !f.malformed)
                {
                    if let Ok(b) = f.bind(&binding) {
                        fams.push(b);
                    }
                }
                match coverage(
                    &bound,
                    kind,
                    cfg.p,
                    &fams,
                    cfg.cap,
                    cfg.budget,
                    cfg.membership_budget,
                ) {
                    Ok(mut r) => {
                        r.binding = binding.clone();
                        reports.push(r);
                    }
                    Err(e @ (Error::NonInvertibleDenominator { .. } | Error::NonRealValue)) => {
                        excluded.push((a.name().to_string(), binding.clone(), e.to_string()));
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(CoverageSweep {
        p: cfg.p,
        reports,
        excluded,
    })
}
