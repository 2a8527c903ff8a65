//! Rota-Baxter, Nijenhuis, Reynolds and averaging operators on a table.
//!
//! An operator is an `n × n` matrix `T` with `T(e_col) = Σ_row T[row][col] e_row`,
//! so `T[j][i]` is the `e_j`-coefficient of the image of `e_i`.
//!
//! Residuals are computed on polynomials: with structure constants `C / E`,
//! chart `M / D` and weight `ln / ld`, each residual is multiplied by a known
//! nonzero factor (see [`EquationSystem::multiplier`]) so that everything
//! stays in `Poly`.

mod family;

pub use family::{
    audit_families, dimension_report, family_dimension, load_families, parse_families,
    verify_family, AuditReport, Classification, DimensionReport, FamilyId, FamilyOutcome, Mismatch,
    OperatorFamily, Verdict, Witness, CLAIMED_RANGES,
};

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};

use crate::algebra::{AlgebraTable, Structure};
use crate::arith::{clear_denominators, Param, Poly, RatExpr};
use crate::error::{Error, Result};

pub const KIND_SLUGS: [&str; 4] = ["rota-baxter", "nijenhuis", "reynolds", "averaging"];

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorKind {
    RotaBaxter(RatExpr),
    Nijenhuis,
    Reynolds,
    Averaging,
}

impl OperatorKind {
    /// `rota-baxter` (alias `rb`) takes the weight, defaulting to 0.
    pub fn parse(slug: &str, weight: Option<RatExpr>) -> Result<Self> {
        let kind = match slug {
            "rota-baxter" | "rb" => {
                return Ok(OperatorKind::RotaBaxter(
                    weight.unwrap_or_else(|| RatExpr::from_int(0)),
                ))
            }
            "nijenhuis" => OperatorKind::Nijenhuis,
            "reynolds" => OperatorKind::Reynolds,
            "averaging" => OperatorKind::Averaging,
            other => {
                return Err(Error::Usage(format!(
                    "unknown operator kind `{other}` (expected one of {})",
                    KIND_SLUGS.join(", ")
                )))
            }
        };
        if weight.is_some() {
            return Err(Error::Usage(format!(
                "--weight only applies to rota-baxter, not {slug}"
            )));
        }
        Ok(kind)
    }

    pub fn slug(&self) -> &'static str {
        match self {
            OperatorKind::RotaBaxter(_) => "rota-baxter",
            OperatorKind::Nijenhuis => "nijenhuis",
            OperatorKind::Reynolds => "reynolds",
            OperatorKind::Averaging => "averaging",
        }
    }

    pub fn weight(&self) -> Option<&RatExpr> {
        match self {
            OperatorKind::RotaBaxter(w) => Some(w),
            _ => None,
        }
    }

    /// Averaging splits into two one-sided conditions.
    pub fn conditions(&self) -> usize {
        match self {
            OperatorKind::Averaging => 2,
            _ => 1,
        }
    }

    /// Letter used for the unknown matrix entries.
    pub fn unknown_prefix(&self) -> &'static str {
        match self {
            OperatorKind::RotaBaxter(_) => "r",
            OperatorKind::Nijenhuis => "k",
            OperatorKind::Reynolds => "a",
            OperatorKind::Averaging => "b",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorKind::RotaBaxter(w) => write!(f, "rota-baxter(weight {w})"),
            other => f.write_str(other.slug()),
        }
    }
}

fn add(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `M · v` for a row-major `n × n` matrix.
fn apply(m: &[Poly], v: &[Poly]) -> Vec<Poly> {
    let n = v.len();
    (0..n)
        .map(|row| {
            let mut acc = Poly::zero();
            for (col, vc) in v.iter().enumerate() {
                let e = &m[row * n + col];
                if !e.is_zero() && !vc.is_zero() {
                    acc.add_product(e, vc);
                }
            }
            acc
        })
        .collect()
}

fn times(p: &Poly, v: Vec<Poly>) -> Vec<Poly> {
    if p.is_one() {
        v
    } else {
        v.iter().map(|x| p * x).collect()
    }
}

/// Factor by which [`scaled_residual`] multiplies the true residual.
pub(crate) fn residual_multiplier(s: &Structure, kind: &OperatorKind, d: &Poly) -> Poly {
    let d_pow = match kind {
        OperatorKind::Reynolds => 3,
        _ => 2,
    };
    let mut m = s.scale() * &d.pow(d_pow);
    if let OperatorKind::RotaBaxter(w) = kind {
        m = &m * w.den();
    }
    m
}

/// Residual of `T = m / d` scaled by [`residual_multiplier`], flattened as
/// `((cond · n + i) · n + j) · n + q`.
pub(crate) fn scaled_residual(
    s: &Structure,
    kind: &OperatorKind,
    m: &[Poly],
    d: &Poly,
) -> Vec<Poly> {
    let n = s.dim();
    let cols: Vec<Vec<Poly>> = (0..n)
        .map(|i| (0..n).map(|r| m[r * n + i].clone()).collect())
        .collect();
    let units: Vec<Vec<Poly>> = (0..n).map(|i| s.unit(i)).collect();
    let conds = kind.conditions();
    let mut out = vec![Poly::zero(); conds * n * n * n];
    for i in 0..n {
        for j in 0..n {
            let tt = s.bracket(&cols[i], &cols[j]);
            let at = |c: usize, q: usize| ((c * n + i) * n + j) * n + q;
            match kind {
                OperatorKind::RotaBaxter(w) => {
                    let mixed = add(
                        &s.bracket(&cols[i], &units[j]),
                        &s.bracket(&units[i], &cols[j]),
                    );
                    let t_mixed = apply(m, &mixed);
                    let t_xy = times(&(w.num() * d), apply(m, &s.bracket(&units[i], &units[j])));
                    let ld = w.den();
                    for q in 0..n {
                        let r = &tt[q] - &t_mixed[q];
                        out[at(0, q)] = &(ld * &r) - &t_xy[q];
                    }
                }
                OperatorKind::Nijenhuis => {
                    let mixed = add(
                        &s.bracket(&cols[i], &units[j]),
                        &s.bracket(&units[i], &cols[j]),
                    );
                    let t_mixed = apply(m, &mixed);
                    let tt_xy = apply(m, &apply(m, &s.bracket(&units[i], &units[j])));
                    for q in 0..n {
                        out[at(0, q)] = &(&tt[q] - &t_mixed[q]) + &tt_xy[q];
                    }
                }
                OperatorKind::Reynolds => {
                    let mixed = add(
                        &s.bracket(&cols[i], &units[j]),
                        &s.bracket(&units[i], &cols[j]),
                    );
                    let t_mixed = times(d, apply(m, &mixed));
                    let t_tt = apply(m, &tt);
                    for q in 0..n {
                        out[at(0, q)] = &(&(d * &tt[q]) - &t_mixed[q]) + &t_tt[q];
                    }
                }
                OperatorKind::Averaging => {
                    let left = apply(m, &s.bracket(&cols[i], &units[j]));
                    let right = apply(m, &s.bracket(&units[i], &cols[j]));
                    for q in 0..n {
                        out[at(0, q)] = &tt[q] - &left[q];
                        out[at(1, q)] = &tt[q] - &right[q];
                    }
                }
            }
        }
    }
    out
}

/// Residual entries indexed `(condition, i, j, q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorResidual {
    dim: usize,
    conditions: usize,
    entries: Vec<RatExpr>,
}

impl OperatorResidual {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn conditions(&self) -> usize {
        self.conditions
    }

    pub fn get(&self, cond: usize, i: usize, j: usize, q: usize) -> &RatExpr {
        let n = self.dim;
        &self.entries[((cond * n + i) * n + j) * n + q]
    }

    pub fn entries(&self) -> &[RatExpr] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(RatExpr::is_zero)
    }

    /// First nonzero entry as `(cond, i, j, q)`, 0-based.
    pub fn first_nonzero(&self) -> Option<(usize, usize, usize, usize)> {
        let n = self.dim;
        self.entries
            .iter()
            .position(|e| !e.is_zero())
            .map(|idx| (idx / (n * n * n), idx / (n * n) % n, idx / n % n, idx % n))
    }
}

fn check_square(chart: &[Vec<RatExpr>], n: usize) -> Result<()> {
    if chart.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: chart.len(),
        });
    }
    if let Some(row) = chart.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: row.len(),
        });
    }
    Ok(())
}

/// The residual of `chart` for the operator identity of `kind` on `a`.
pub fn operator_residual(
    a: &AlgebraTable,
    kind: &OperatorKind,
    chart: &[Vec<RatExpr>],
) -> Result<OperatorResidual> {
    let n = a.dim();
    check_square(chart, n)?;
    let s = a.structure();
    let (m, d) = clear_denominators(chart.iter().flatten());
    let polys = scaled_residual(&s, kind, &m, &d);
    let mult = residual_multiplier(&s, kind, &d);
    let entries = polys
        .into_iter()
        .map(|p| {
            if p.is_zero() {
                Ok(RatExpr::zero())
            } else {
                RatExpr::new(p, mult.clone())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OperatorResidual {
        dim: n,
        conditions: kind.conditions(),
        entries,
    })
}

/// Name of the unknown at `(row, col)`, 0-based: `r21` is the
/// `e_2`-coefficient of `r(e_1)`.
pub fn unknown_name(prefix: &str, n: usize, row: usize, col: usize) -> String {
    if n <= 9 {
        format!("{prefix}{}{}", row + 1, col + 1)
    } else {
        format!("{prefix}{}_{}", row + 1, col + 1)
    }
}

/// The zero matrix and the identity matrix as charts.
pub fn zero_chart(n: usize) -> Vec<Vec<RatExpr>> {
    vec![vec![RatExpr::zero(); n]; n]
}

pub fn identity_chart(n: usize) -> Vec<Vec<RatExpr>> {
    (0..n)
        .map(|r| {
            (0..n)
                .map(|c| RatExpr::from_int(i64::from(r == c)))
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equation {
    pub condition: usize,
    pub i: usize,
    pub j: usize,
    pub q: usize,
    pub poly: Poly,
}

/// Polynomial equations in the `n²` unknown matrix entries.
#[derive(Clone, Debug)]
pub struct EquationSystem {
    pub algebra: String,
    pub kind: OperatorKind,
    pub dim: usize,
    /// Row-major: `unknowns[row * n + col]`.
    pub unknowns: Vec<Param>,
    /// One equation per `(condition, i, j, q)`, zero ones included.
    pub equations: Vec<Equation>,
    /// Each equation is the true residual times this factor (the structure
    /// constant denominators and the weight denominator).
    pub multiplier: Poly,
}

impl EquationSystem {
    pub fn nonzero(&self) -> impl Iterator<Item = &Equation> {
        self.equations.iter().filter(|e| !e.poly.is_zero())
    }

    pub fn unknown_set(&self) -> BTreeSet<Param> {
        self.unknowns.iter().cloned().collect()
    }

    /// Largest total degree in the unknowns.
    pub fn max_degree(&self) -> u32 {
        let vars = self.unknown_set();
        self.equations
            .iter()
            .map(|e| e.poly.degree_in(&vars))
            .max()
            .unwrap_or(0)
    }

    /// Substitute a chart for the unknowns, giving each equation's value.
    pub fn substitute(&self, chart: &[Vec<RatExpr>]) -> Result<Vec<RatExpr>> {
        check_square(chart, self.dim)?;
        let bindings = self
            .unknowns
            .iter()
            .cloned()
            .zip(chart.iter().flatten().cloned())
            .collect();
        self.equations
            .iter()
            .map(|e| crate::arith::substitute_poly(&e.poly, &bindings))
            .collect()
    }
}

pub fn build_system(a: &AlgebraTable, kind: &OperatorKind) -> EquationSystem {
    let n = a.dim();
    let prefix = kind.unknown_prefix();
    let unknowns: Vec<Param> = (0..n * n)
        .map(|idx| Param::new(&unknown_name(prefix, n, idx / n, idx % n)))
        .collect();
    let m: Vec<Poly> = unknowns.iter().cloned().map(Poly::var).collect();
    let s = a.structure();
    let one = Poly::one();
    let polys = scaled_residual(&s, kind, &m, &one);
    let equations = polys
        .into_iter()
        .enumerate()
        .map(|(idx, poly)| Equation {
            condition: idx / (n * n * n),
            i: idx / (n * n) % n,
            j: idx / n % n,
            q: idx % n,
            poly,
        })
        .collect();
    EquationSystem {
        algebra: a.name().to_string(),
        kind: kind.clone(),
        dim: n,
        unknowns,
        equations,
        multiplier: residual_multiplier(&s, kind, &one),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::expr;

    fn l1() -> AlgebraTable {
        AlgebraTable::from_entries(
            "L1",
            4,
            vec![],
            [(0, 0, 1, "1"), (1, 0, 2, "1"), (2, 0, 3, "1")]
                .into_iter()
                .map(|(i, j, k, e)| (i, j, k, expr(e))),
        )
    }

    fn chart(rows: [[&str; 4]; 4]) -> Vec<Vec<RatExpr>> {
        rows.iter()
            .map(|r| r.iter().map(|e| expr(e)).collect())
            .collect()
    }

    fn kinds() -> Vec<OperatorKind> {
        vec![
            OperatorKind::RotaBaxter(RatExpr::from_int(0)),
            OperatorKind::RotaBaxter(expr("lam")),
            OperatorKind::Nijenhuis,
            OperatorKind::Reynolds,
            OperatorKind::Averaging,
        ]
    }

    #[test]
    fn zero_and_identity() {
        let a = l1();
        for k in kinds() {
            assert!(
                operator_residual(&a, &k, &zero_chart(4)).unwrap().is_zero(),
                "{k}"
            );
        }
        for k in [
            OperatorKind::RotaBaxter(RatExpr::from_int(-1)),
            OperatorKind::Nijenhuis,
            OperatorKind::Reynolds,
        ] {
            assert!(
                operator_residual(&a, &k, &identity_chart(4))
                    .unwrap()
                    .is_zero(),
                "{k}"
            );
        }
    }

    #[test]
    fn identity_is_not_weight_zero_rota_baxter() {
        let r = operator_residual(
            &l1(),
            &OperatorKind::RotaBaxter(RatExpr::from_int(0)),
            &identity_chart(4),
        )
        .unwrap();
        assert_eq!(r.first_nonzero(), Some((0, 0, 0, 1)));
        assert_eq!(r.get(0, 0, 0, 1), &RatExpr::from_int(-1));
    }

    #[test]
    fn bottom_rows_family_is_rota_baxter() {
        let c = chart([
            ["0", "0", "0", "0"],
            ["0", "0", "0", "0"],
            ["r31", "r32", "r33", "0"],
            ["r41", "r42", "r43", "0"],
        ]);
        let rb0 = OperatorKind::RotaBaxter(RatExpr::from_int(0));
        assert!(operator_residual(&l1(), &rb0, &c).unwrap().is_zero());
    }

    #[test]
    fn quotient_chart() {
        let c = chart([
            ["0", "0", "0", "0"],
            ["0", "r22", "0", "0"],
            ["0", "r32", "0", "0"],
            ["r41", "r42", "r43", "-(r22*r43)/r32"],
        ]);
        let rb0 = OperatorKind::RotaBaxter(RatExpr::from_int(0));
        assert!(operator_residual(&l1(), &rb0, &c).unwrap().is_zero());
    }

    #[test]
    fn system_substitution_matches_direct_residual() {
        let a = l1();
        let c = chart([
            ["x", "0", "0", "0"],
            ["y", "x^2", "0", "0"],
            ["0", "1/z", "x", "0"],
            ["y", "0", "1", "z"],
        ]);
        for k in kinds() {
            let sys = build_system(&a, &k);
            let via_sys = sys.substitute(&c).unwrap();
            let direct = operator_residual(&a, &k, &c).unwrap();
            let mult = RatExpr::poly(sys.multiplier.clone());
            for (s, d) in via_sys.iter().zip(direct.entries()) {
                assert_eq!(s, &(&mult * d), "{k}");
            }
        }
    }

    #[test]
    fn system_shape_and_degrees() {
        let a = l1();
        let rb = build_system(&a, &OperatorKind::RotaBaxter(RatExpr::from_int(0)));
        assert_eq!(rb.unknowns.len(), 16);
        assert_eq!(rb.equations.len(), 64);
        assert_eq!(rb.unknowns[2 * 4].name(), "r31");
        assert_eq!(rb.max_degree(), 2);
        assert_eq!(
            build_system(&a, &OperatorKind::Averaging).equations.len(),
            128
        );
        assert!(build_system(&a, &OperatorKind::Nijenhuis).max_degree() <= 3);
        let ab = AlgebraTable::zero("ab", 4);
        assert_eq!(
            build_system(&ab, &OperatorKind::Reynolds).nonzero().count(),
            0
        );
    }

    #[test]
    fn parse_kinds() {
        assert_eq!(
            OperatorKind::parse("nijenhuis", None).unwrap(),
            OperatorKind::Nijenhuis
        );
        assert_eq!(
            OperatorKind::parse("rb", None).unwrap(),
            OperatorKind::RotaBaxter(RatExpr::from_int(0))
        );
        assert!(OperatorKind::parse("lie", None).is_err());
        assert!(OperatorKind::parse("reynolds", Some(RatExpr::from_int(1))).is_err());
    }
}
