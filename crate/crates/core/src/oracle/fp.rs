use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::algebra::AlgebraTable;
use crate::arith::{is_prime, Param, Poly, RatExpr};
use crate::error::{Error, Result};
use crate::operators::{build_system, OperatorKind};

/// Largest enumeration accepted by default: a full `F_2` sweep in dimension 4.
pub const DEFAULT_BUDGET: u128 = 1 << 16;

/// Square matrix over `F_p`, row-major.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FpMatrix {
    p: u32,
    n: usize,
    entries: Vec<u32>,
}

impl FpMatrix {
    pub fn new(p: u32, n: usize, entries: Vec<u32>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        if let Some(&bad) = entries.iter().find(|&&e| e >= p) {
            return Err(Error::Usage(format!("entry {bad} is not reduced mod {p}")));
        }
        Ok(FpMatrix { p, n, entries })
    }

    pub fn zero(p: u32, n: usize) -> Self {
        FpMatrix {
            p,
            n,
            entries: vec![0; n * n],
        }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zero(p, n);
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    /// The matrix at position `t` of the enumeration: entry `k = row · n + col`
    /// is the `k`-th base-`p` digit of `t`.
    pub fn from_index(p: u32, n: usize, mut t: u128) -> Self {
        let mut entries = vec![0; n * n];
        for e in entries.iter_mut() {
            *e = (t % u128::from(p)) as u32;
            t /= u128::from(p);
        }
        FpMatrix { p, n, entries }
    }

    pub fn index(&self) -> u128 {
        self.entries
            .iter()
            .rev()
            .fold(0u128, |acc, &e| acc * u128::from(self.p) + u128::from(e))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.entries[row * self.n + col]
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.entries.chunks(self.n).map(<[u32]>::to_vec).collect()
    }

    /// Integer lift as an exact chart.
    pub fn lift(&self) -> Vec<Vec<RatExpr>> {
        self.entries
            .chunks(self.n)
            .map(|r| r.iter().map(|&v| RatExpr::from_int(i64::from(v))).collect())
            .collect()
    }
}

impl fmt::Display for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .entries
            .chunks(self.n)
            .map(|r| r.iter().map(u32::to_string).collect::<Vec<_>>().join(" "))
            .collect();
        write!(f, "[{}]", rows.join("; "))
    }
}

pub(crate) fn check_prime(p: u32) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// `p^(n²)`, refusing anything above `budget`.
pub fn search_size(p: u32, n: usize, budget: u128) -> Result<u128> {
    let mut size: u128 = 1;
    for _ in 0..n * n {
        size = size.saturating_mul(u128::from(p));
    }
    if size > budget {
        return Err(Error::RefusedSize { size, budget });
    }
    Ok(size)
}

/// Operator kind with its weight reduced mod `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FpKind {
    RotaBaxter(u64),
    Nijenhuis,
    Reynolds,
    Averaging,
}

impl FpKind {
    fn new(kind: &OperatorKind, p: u32) -> Result<Self> {
        Ok(match kind {
            OperatorKind::RotaBaxter(w) => FpKind::RotaBaxter(u64::from(w.reduce_mod_p(p)?)),
            OperatorKind::Nijenhuis => FpKind::Nijenhuis,
            OperatorKind::Reynolds => FpKind::Reynolds,
            OperatorKind::Averaging => FpKind::Averaging,
        })
    }
}

/// Structure constants reduced mod `p`, evaluated by direct bracket
/// computation on each candidate matrix.
#[derive(Clone, Debug)]
pub struct DirectEvaluator {
    p: u64,
    n: usize,
    kind: FpKind,
    /// `(i, j) -> [(k, c)]`
    products: Vec<Vec<(usize, u64)>>,
}

impl DirectEvaluator {
    pub fn new(a: &AlgebraTable, kind: &OperatorKind, p: u32) -> Result<Self> {
        check_prime(p)?;
        let n = a.dim();
        let mut products = vec![Vec::new(); n * n];
        for (i, j, k, c) in a.nonzero() {
            if !c.params().is_empty() {
                let name = c
                    .params()
                    .into_iter()
                    .next()
                    .map(|q| q.to_string())
                    .unwrap_or_default();
                return Err(Error::UnboundParam(name));
            }
            let v = c.reduce_mod_p(p)?;
            if v != 0 {
                products[i * n + j].push((k, u64::from(v)));
            }
        }
        Ok(DirectEvaluator {
            p: u64::from(p),
            n,
            kind: FpKind::new(kind, p)?,
            products,
        })
    }

    fn bracket(&self, u: &[u64], v: &[u64], out: &mut [u64]) {
        let n = self.n;
        out.iter_mut().for_each(|x| *x = 0);
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0 {
                continue;
            }
            for (j, &vj) in v.iter().enumerate() {
                if vj == 0 {
                    continue;
                }
                let uv = ui * vj % self.p;
                for &(k, c) in &self.products[i * n + j] {
                    out[k] = (out[k] + uv * c) % self.p;
                }
            }
        }
    }

    fn apply(&self, m: &[u32], v: &[u64], out: &mut [u64]) {
        let n = self.n;
        for (row, o) in out.iter_mut().enumerate() {
            let mut acc = 0;
            for (col, &x) in v.iter().enumerate() {
                acc += u64::from(m[row * n + col]) * x;
            }
            *o = acc % self.p;
        }
    }

    /// Whether `m` satisfies the operator identity.
    pub fn is_solution(&self, m: &[u32]) -> bool {
        let n = self.n;
        let p = self.p;
        let col = |i: usize| -> Vec<u64> { (0..n).map(|r| u64::from(m[r * n + i])).collect() };
        let cols: Vec<Vec<u64>> = (0..n).map(col).collect();
        let unit = |i: usize| -> Vec<u64> {
            let mut e = vec![0; n];
            e[i] = 1;
            e
        };
        let units: Vec<Vec<u64>> = (0..n).map(unit).collect();
        let mut tt = vec![0; n];
        let mut a = vec![0; n];
        let mut b = vec![0; n];
        let mut inner = vec![0; n];
        let mut image = vec![0; n];
        for i in 0..n {
            for j in 0..n {
                self.bracket(&cols[i], &cols[j], &mut tt);
                match self.kind {
                    FpKind::Averaging => {
                        self.bracket(&cols[i], &units[j], &mut a);
                        self.apply(m, &a, &mut image);
                        if tt != image {
                            return false;
                        }
                        self.bracket(&units[i], &cols[j], &mut b);
                        self.apply(m, &b, &mut image);
                        if tt != image {
                            return false;
                        }
                        continue;
                    }
                    _ => {
                        self.bracket(&cols[i], &units[j], &mut a);
                        self.bracket(&units[i], &cols[j], &mut b);
                    }
                }
                // inner = ⟦Tx,y⟧ + ⟦x,Ty⟧ + extra, then compare ⟦Tx,Ty⟧ with T(inner).
                match self.kind {
                    FpKind::RotaBaxter(lam) => {
                        let mut xy = vec![0; n];
                        self.bracket(&units[i], &units[j], &mut xy);
                        for q in 0..n {
                            inner[q] = (a[q] + b[q] + lam * xy[q]) % p;
                        }
                    }
                    FpKind::Nijenhuis => {
                        let mut xy = vec![0; n];
                        let mut txy = vec![0; n];
                        self.bracket(&units[i], &units[j], &mut xy);
                        self.apply(m, &xy, &mut txy);
                        for q in 0..n {
                            inner[q] = (a[q] + b[q] + p - txy[q]) % p;
                        }
                    }
                    FpKind::Reynolds => {
                        for q in 0..n {
                            inner[q] = (a[q] + b[q] + p - tt[q]) % p;
                        }
                    }
                    FpKind::Averaging => unreachable!(),
                }
                self.apply(m, &inner, &mut image);
                if tt != image {
                    return false;
                }
            }
        }
        true
    }
}

/// Polynomial over `F_p` in indexed variables.
#[derive(Clone, Debug, Default)]
pub(crate) struct FpPoly {
    /// `(coefficient, variable indices with multiplicity)`
    terms: Vec<(u64, Vec<usize>)>,
    constant: u64,
}

impl FpPoly {
    pub(crate) fn compile(poly: &Poly, vars: &BTreeMap<Param, usize>, p: u32) -> Result<Self> {
        let mut out = FpPoly::default();
        for (mono, coef) in poly.terms() {
            let c = u64::from(coef.to_fp(p)?);
            if c == 0 {
                continue;
            }
            let mut idx = Vec::new();
            for (param, e) in mono.factors() {
                let v = *vars
                    .get(param)
                    .ok_or_else(|| Error::UnboundParam(param.to_string()))?;
                idx.extend(std::iter::repeat(v).take(*e as usize));
            }
            if idx.is_empty() {
                out.constant = (out.constant + c) % u64::from(p);
            } else {
                out.terms.push((c, idx));
            }
        }
        Ok(out)
    }

    pub(crate) fn eval(&self, point: &[u32], p: u64) -> u64 {
        let mut acc = self.constant;
        for (c, idx) in &self.terms {
            let mut t = *c;
            for &v in idx {
                t = t * u64::from(point[v]) % p;
                if t == 0 {
                    break;
                }
            }
            acc += t;
        }
        acc % p
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.constant == 0 && self.terms.is_empty()
    }

    /// `Some((c, v, k))` when the polynomial is `c · x_v + k` with `c ≠ 0`.
    pub(crate) fn as_affine(&self) -> Option<(u64, usize, u64)> {
        match self.terms.as_slice() {
            [(c, idx)] if idx.len() == 1 => Some((*c, idx[0], self.constant)),
            _ => None,
        }
    }

    pub(crate) fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().flat_map(|(_, idx)| idx.iter().copied())
    }
}

/// The equation system of [`build_system`] with coefficients reduced mod `p`.
#[derive(Clone, Debug)]
pub struct CompiledSystem {
    p: u64,
    equations: Vec<FpPoly>,
}

impl CompiledSystem {
    pub fn new(a: &AlgebraTable, kind: &OperatorKind, p: u32) -> Result<Self> {
        check_prime(p)?;
        let sys = build_system(a, kind);
        let mult = sys.multiplier.as_constant().ok_or_else(|| {
            let name = sys
                .multiplier
                .params()
                .into_iter()
                .next()
                .map(|q| q.to_string());
            Error::UnboundParam(name.unwrap_or_default())
        })?;
        if mult.to_fp(p)? == 0 {
            return Err(Error::NonInvertibleDenominator { p });
        }
        let vars: BTreeMap<Param, usize> = sys
            .unknowns
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        let equations = sys
            .nonzero()
            .map(|e| FpPoly::compile(&e.poly, &vars, p))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|e| !e.is_zero())
            .collect();
        Ok(CompiledSystem {
            p: u64::from(p),
            equations,
        })
    }

    pub fn num_equations(&self) -> usize {
        self.equations.len()
    }

    pub fn is_solution(&self, m: &[u32]) -> bool {
        self.equations.iter().all(|e| e.eval(m, self.p) == 0)
    }
}

/// Indices of matrices accepted by `test`, one list per shard. Shards fix
/// the first row, so there are `p^n` of them.
fn sweep<F>(p: u32, n: usize, budget: u128, test: F) -> Result<Vec<Vec<u128>>>
where
    F: Fn(&[u32]) -> bool + Sync,
{
    let size = search_size(p, n, budget)?;
    let shards = shard_count(p, n, size);
    let per_shard = size / shards;
    let out = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut hits = Vec::new();
            let mut m = vec![0u32; n * n];
            for h in 0..per_shard {
                let t = h * shards + s;
                let mut x = t;
                for e in m.iter_mut() {
                    *e = (x % u128::from(p)) as u32;
                    x /= u128::from(p);
                }
                if test(&m) {
                    hits.push(t);
                }
            }
            hits
        })
        .collect();
    Ok(out)
}

fn merge(p: u32, n: usize, shards: Vec<Vec<u128>>) -> Vec<FpMatrix> {
    let mut all: Vec<u128> = shards.into_iter().flatten().collect();
    all.sort_unstable();
    all.into_iter()
        .map(|t| FpMatrix::from_index(p, n, t))
        .collect()
}

/// All operators of `kind` on `a` over `F_p`, in enumeration order, found by
/// direct bracket evaluation. Parameters of `a` must be bound.
pub fn enumerate_solutions(
    a: &AlgebraTable,
    kind: &OperatorKind,
    p: u32,
    budget: u128,
) -> Result<Vec<FpMatrix>> {
    let eval = DirectEvaluator::new(a, kind, p)?;
    let shards = sweep(p, a.dim(), budget, |m| eval.is_solution(m))?;
    Ok(merge(p, a.dim(), shards))
}

/// Same as [`enumerate_solutions`] through the compiled equation system.
pub fn enumerate_compiled(
    a: &AlgebraTable,
    kind: &OperatorKind,
    p: u32,
    budget: u128,
) -> Result<Vec<FpMatrix>> {
    let sys = CompiledSystem::new(a, kind, p)?;
    let shards = sweep(p, a.dim(), budget, |m| sys.is_solution(m))?;
    Ok(merge(p, a.dim(), shards))
}

/// Both evaluation paths over the full sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPathReport {
    pub matrices: u128,
    pub direct: usize,
    pub compiled: usize,
    /// Matrices on which the two paths disagree.
    pub disagreements: Vec<FpMatrix>,
}

impl DualPathReport {
    pub fn agree(&self) -> bool {
        self.disagreements.is_empty() && self.direct == self.compiled
    }
}

/// Evaluate every matrix on both paths and compare the verdicts.
pub fn dual_path_check(
    a: &AlgebraTable,
    kind: &OperatorKind,
    p: u32,
    budget: u128,
) -> Result<DualPathReport> {
    let direct = DirectEvaluator::new(a, kind, p)?;
    let compiled = CompiledSystem::new(a, kind, p)?;
    let n = a.dim();
    let matrices = search_size(p, n, budget)?;
    let outcomes = (0..shard_count(p, n, matrices))
        .into_par_iter()
        .map(|s| {
            let shards = shard_count(p, n, matrices);
            let mut m = vec![0u32; n * n];
            let (mut d, mut c, mut bad) = (0usize, 0usize, Vec::new());
            for h in 0..matrices / shards {
                let t = h * shards + s;
                let mut x = t;
                for e in m.iter_mut() {
                    *e = (x % u128::from(p)) as u32;
                    x /= u128::from(p);
                }
                let (x, y) = (direct.is_solution(&m), compiled.is_solution(&m));
                d += usize::from(x);
                c += usize::from(y);
                if x != y {
                    bad.push(t);
                }
            }
            (d, c, bad)
        })
        .collect::<Vec<_>>();
    let direct_count = outcomes.iter().map(|o| o.0).sum();
    let compiled_count = outcomes.iter().map(|o| o.1).sum();
    let bad = outcomes.into_iter().map(|o| o.2).collect();
    Ok(DualPathReport {
        matrices,
        direct: direct_count,
        compiled: compiled_count,
        disagreements: merge(p, n, bad),
    })
}

fn shard_count(p: u32, n: usize, size: u128) -> u128 {
    u128::from(p).pow(n as u32).min(size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::expr;

    fn l17() -> AlgebraTable {
        AlgebraTable::from_entries(
            "L17",
            4,
            vec![],
            [(0, 1, 2, expr("1")), (1, 0, 3, expr("1"))],
        )
    }

    #[test]
    fn index_round_trip() {
        let m = FpMatrix::from_index(3, 2, 2 + 3 + 27);
        assert_eq!(m.entries(), &[2, 1, 0, 1]);
        assert_eq!(m.index(), 32);
        assert_eq!(m.to_string(), "[2 1; 0 1]");
    }

    #[test]
    fn trivial_solutions() {
        let a = l17();
        let zero = FpMatrix::zero(2, 4);
        let id = FpMatrix::identity(2, 4);
        for kind in [
            OperatorKind::RotaBaxter(RatExpr::from_int(0)),
            OperatorKind::Nijenhuis,
            OperatorKind::Reynolds,
            OperatorKind::Averaging,
        ] {
            assert!(DirectEvaluator::new(&a, &kind, 2)
                .unwrap()
                .is_solution(zero.entries()));
            assert!(CompiledSystem::new(&a, &kind, 2)
                .unwrap()
                .is_solution(zero.entries()));
        }
        assert!(DirectEvaluator::new(&a, &OperatorKind::Nijenhuis, 2)
            .unwrap()
            .is_solution(id.entries()));
        let sols = enumerate_solutions(&a, &OperatorKind::Nijenhuis, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(sols.first(), Some(&zero));
        assert!(sols.contains(&id));
        assert!(sols.windows(2).all(|w| w[0].index() < w[1].index()));
    }

    #[test]
    fn paths_agree_on_l17() {
        let a = l17();
        let kind = OperatorKind::RotaBaxter(RatExpr::from_int(0));
        let r = dual_path_check(&a, &kind, 2, DEFAULT_BUDGET).unwrap();
        assert!(r.agree());
        assert_eq!(r.matrices, 65_536);
        let direct = enumerate_solutions(&a, &kind, 2, DEFAULT_BUDGET).unwrap();
        let compiled = enumerate_compiled(&a, &kind, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(direct, compiled);
        assert_eq!(direct.len(), r.direct);
    }

    #[test]
    fn refusals() {
        let a = l17();
        assert!(matches!(
            enumerate_solutions(&a, &OperatorKind::Nijenhuis, 3, DEFAULT_BUDGET),
            Err(Error::RefusedSize { .. })
        ));
        assert!(matches!(
            enumerate_solutions(&a, &OperatorKind::Nijenhuis, 4, u128::MAX),
            Err(Error::NotPrime(4))
        ));
        let half = AlgebraTable::from_entries("h", 4, vec![], [(0, 0, 1, expr("1/2"))]);
        assert!(matches!(
            DirectEvaluator::new(&half, &OperatorKind::Nijenhuis, 2),
            Err(Error::NonInvertibleDenominator { .. })
        ));
        let imag = AlgebraTable::from_entries("c", 4, vec![], [(0, 0, 1, expr("i"))]);
        assert!(matches!(
            DirectEvaluator::new(&imag, &OperatorKind::Nijenhuis, 3),
            Err(Error::NonRealValue)
        ));
    }
}
