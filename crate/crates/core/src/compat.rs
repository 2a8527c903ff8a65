//! Compatible pairs of brackets: both are Leibniz and so is every linear
//! combination, which amounts to the vanishing of the mixed residual.

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algebra::{
    combined_bracket, first_leibniz_failure, leibniz_residual, AlgebraTable, Catalog,
    ResidualTensor, SAMPLE_VALUES,
};
use crate::arith::{Bindings, Poly, RatExpr, Scalar};
use crate::error::{Error, Result};

/// Suffix given to the second algebra's parameters so that two
/// parameterized tables vary independently.
pub const SECOND_SUFFIX: &str = "2";

/// `⟦x,⟦y,z⟧₁⟧₂ + ⟦x,⟦y,z⟧₂⟧₁ − ⟦⟦x,y⟧₁,z⟧₂ − ⟦⟦x,y⟧₂,z⟧₁ + ⟦⟦x,z⟧₁,y⟧₂ + ⟦⟦x,z⟧₂,y⟧₁`
/// on all basis triples.
pub fn mixed_residual(a: &AlgebraTable, b: &AlgebraTable) -> Result<ResidualTensor> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let n = a.dim();
    let (sa, sb) = (a.structure(), b.structure());
    let units: Vec<Vec<Poly>> = (0..n).map(|i| sa.unit(i)).collect();
    let one: Vec<Vec<Poly>> = (0..n * n)
        .map(|ij| sa.bracket(&units[ij / n], &units[ij % n]))
        .collect();
    let two: Vec<Vec<Poly>> = (0..n * n)
        .map(|ij| sb.bracket(&units[ij / n], &units[ij % n]))
        .collect();
    let mut polys = Vec::with_capacity(n * n * n * n);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let terms = [
                    sb.bracket(&units[x], &one[y * n + z]),
                    sa.bracket(&units[x], &two[y * n + z]),
                    sb.bracket(&one[x * n + y], &units[z]),
                    sa.bracket(&two[x * n + y], &units[z]),
                    sb.bracket(&one[x * n + z], &units[y]),
                    sa.bracket(&two[x * n + z], &units[y]),
                ];
                for q in 0..n {
                    let v = &(&(&terms[0][q] + &terms[1][q]) - &(&terms[2][q] + &terms[3][q]))
                        + &(&terms[4][q] + &terms[5][q]);
                    polys.push(v);
                }
            }
        }
    }
    let scale = sa.scale() * sb.scale();
    Ok(ResidualTensor::from_polys(n, polys, &scale))
}

/// Both brackets Leibniz and the mixed residual zero, symbolically in any
/// unbound parameters.
pub fn is_compatible(a: &AlgebraTable, b: &AlgebraTable) -> Result<bool> {
    Ok(leibniz_residual(a).is_zero()
        && leibniz_residual(b).is_zero()
        && mixed_residual(a, b)?.is_zero())
}

fn finite_bindings(t: &AlgebraTable) -> Vec<Bindings> {
    let mut out = vec![Bindings::new()];
    for spec in t.params().iter().filter(|s| s.admissible.is_finite()) {
        let mut next = Vec::new();
        for b in &out {
            for v in spec.admissible.samples() {
                let mut nb = b.clone();
                nb.insert(spec.param.clone(), RatExpr::scalar(v));
                next.push(nb);
            }
        }
        out = next;
    }
    out
}

fn merged(a: &Bindings, b: &Bindings) -> Bindings {
    a.iter()
        .chain(b)
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairOutcome {
    pub first: String,
    pub second: String,
    /// Holds for every admissible parameter value: symbolically for
    /// infinite admissible sets, value by value for finite ones.
    pub compatible: bool,
    /// Outcome at each sample binding (second algebra's parameters carry
    /// [`SECOND_SUFFIX`]).
    pub samples: Vec<(Bindings, bool)>,
    /// When incompatible: a failing triple (1-based) of the combined
    /// bracket with both coefficients 1, its output vector, and the binding.
    pub witness: Option<([usize; 3], Vec<RatExpr>, Bindings)>,
}

impl PairOutcome {
    /// Samples whose outcome differs from the overall verdict.
    pub fn exceptions(&self) -> Vec<&(Bindings, bool)> {
        self.samples
            .iter()
            .filter(|(_, ok)| *ok != self.compatible)
            .collect()
    }
}

/// The second table with parameters renamed apart (unless it is the same
/// algebra, which shares its parameters).
fn second(a: &AlgebraTable, b: &AlgebraTable) -> AlgebraTable {
    if a.name() == b.name() {
        b.clone()
    } else {
        b.rename_params(SECOND_SUFFIX)
    }
}

pub fn check_pair(a: &AlgebraTable, b: &AlgebraTable) -> Result<PairOutcome> {
    check_pair_over(a, b, &default_samples())
}

pub fn default_samples() -> Vec<Scalar> {
    SAMPLE_VALUES.iter().map(|&v| Scalar::from_int(v)).collect()
}

/// As [`check_pair`], recording per-sample outcomes at `values`.
pub fn check_pair_over(
    a: &AlgebraTable,
    b: &AlgebraTable,
    values: &[Scalar],
) -> Result<PairOutcome> {
    let b = second(a, b);
    let same = a.name() == b.name();
    let mut compatible = true;
    let mut witness = None;
    let b_finite = if same {
        vec![Bindings::new()]
    } else {
        finite_bindings(&b)
    };
    'outer: for fa in finite_bindings(a) {
        for fb in &b_finite {
            let x = a.bind(&fa)?;
            let y = if same { b.bind(&fa)? } else { b.bind(fb)? };
            if !is_compatible(&x, &y)? {
                compatible = false;
                let one = RatExpr::from_int(1);
                let c = combined_bracket(&x, &y, &one, &one)?;
                witness = first_leibniz_failure(&c)
                    .map(|((i, j, k), v)| ([i + 1, j + 1, k + 1], v, merged(&fa, fb)));
                break 'outer;
            }
        }
    }
    let b_samples = if same {
        vec![Bindings::new()]
    } else {
        b.bindings_over(values)
    };
    let mut samples = Vec::new();
    for sa in a.bindings_over(values) {
        for sb in &b_samples {
            let x = a.bind(&sa)?;
            let y = if same { b.bind(&sa)? } else { b.bind(sb)? };
            samples.push((merged(&sa, sb), is_compatible(&x, &y)?));
        }
    }
    Ok(PairOutcome {
        first: a.name().to_string(),
        second: b.name().to_string(),
        compatible,
        samples,
        witness,
    })
}

/// A random nonzero rational with numerator and denominator below 10.
fn random_scalar(rng: &mut ChaCha8Rng) -> Scalar {
    loop {
        let num: i64 = rng.gen_range(-9..=9);
        if num != 0 {
            return Scalar::ratio(num, rng.gen_range(1..=9));
        }
    }
}

/// Check `λ1·A + λ2·B` against the Leibniz identity for `trials` random
/// rational pairs; returns the failing pairs.
pub fn combination_check(
    a: &AlgebraTable,
    b: &AlgebraTable,
    trials: usize,
    seed: u64,
) -> Result<Vec<(Scalar, Scalar)>> {
    let b = second(a, b);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for _ in 0..trials {
        let (l1, l2) = (random_scalar(&mut rng), random_scalar(&mut rng));
        let c = combined_bracket(
            a,
            &b,
            &RatExpr::scalar(l1.clone()),
            &RatExpr::scalar(l2.clone()),
        )?;
        let fin = finite_bindings(&c);
        let mut ok = true;
        for f in fin {
            if !leibniz_residual(&c.bind(&f)?).is_zero() {
                ok = false;
                break;
            }
        }
        if !ok {
            failures.push((l1, l2));
        }
    }
    Ok(failures)
}

/// Unordered name pair in catalog order.
pub type Pair = (String, String);

#[derive(Clone, Debug, PartialEq)]
pub struct PairReport {
    /// Every unordered pair of distinct algebras plus the diagonal.
    pub pairs_checked: Vec<Pair>,
    pub diagonal_compatible: Vec<String>,
    /// Compatible pairs of distinct algebras.
    pub compatible: Vec<Pair>,
    pub claimed_but_failing: Vec<Pair>,
    pub passing_but_unclaimed: Vec<Pair>,
    /// Claimed pairs naming an algebra absent from the catalog.
    pub unmatchable: Vec<Pair>,
    pub outcomes: Vec<PairOutcome>,
    pub sample_values: Vec<Scalar>,
    /// Random combinations tried per compatible pair, and the failures.
    pub combination_trials: usize,
    pub combination_failures: Vec<(Pair, Scalar, Scalar)>,
}

pub fn load_claims(path: impl AsRef<Path>) -> Result<Vec<Pair>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: Vec<(String, String)> =
        serde_json::from_str(&text).map_err(|e| Error::schema("", e.to_string()))?;
    Ok(raw)
}

pub const COMBINATION_SEED: u64 = 0x5eed;

/// Check every pair of catalog algebras and compare with `claims`.
/// Per-sample outcomes are recorded at the admissible members of `values`.
pub fn compat_scan(
    catalog: &Catalog,
    claims: &[Pair],
    values: &[Scalar],
    combination_trials: usize,
) -> Result<PairReport> {
    let tables = catalog.tables();
    let mut index_pairs = Vec::new();
    for i in 0..tables.len() {
        for j in i..tables.len() {
            index_pairs.push((i, j));
        }
    }
    let outcomes = index_pairs
        .par_iter()
        .map(|&(i, j)| check_pair_over(&tables[i], &tables[j], values))
        .collect::<Result<Vec<_>>>()?;
    let pos = |name: &str| tables.iter().position(|t| t.name() == name);
    let mut claimed: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut unmatchable = Vec::new();
    for (x, y) in claims {
        match (pos(x), pos(y)) {
            (Some(i), Some(j)) => {
                claimed.insert((i.min(j), i.max(j)));
            }
            _ => unmatchable.push((x.clone(), y.clone())),
        }
    }
    let name = |i: usize| tables[i].name().to_string();
    let mut compatible = Vec::new();
    let mut diagonal_compatible = Vec::new();
    let mut passing_but_unclaimed = Vec::new();
    let mut claimed_but_failing = Vec::new();
    for (&(i, j), o) in index_pairs.iter().zip(&outcomes) {
        if i == j {
            if o.compatible {
                diagonal_compatible.push(name(i));
            }
            continue;
        }
        let is_claimed = claimed.contains(&(i, j));
        if o.compatible {
            compatible.push((name(i), name(j)));
            if !is_claimed {
                passing_but_unclaimed.push((name(i), name(j)));
            }
        } else if is_claimed {
            claimed_but_failing.push((name(i), name(j)));
        }
    }
    let combination_failures = index_pairs
        .par_iter()
        .zip(&outcomes)
        .filter(|(_, o)| o.compatible)
        .map(|(&(i, j), _)| -> Result<Vec<(Pair, Scalar, Scalar)>> {
            let seed = COMBINATION_SEED ^ ((i as u64) << 32 | j as u64);
            Ok(
                combination_check(&tables[i], &tables[j], combination_trials, seed)?
                    .into_iter()
                    .map(|(l1, l2)| ((name(i), name(j)), l1, l2))
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(PairReport {
        pairs_checked: index_pairs
            .iter()
            .map(|&(i, j)| (name(i), name(j)))
            .collect(),
        diagonal_compatible,
        compatible,
        claimed_but_failing,
        passing_but_unclaimed,
        unmatchable,
        outcomes,
        sample_values: values.to_vec(),
        combination_trials,
        combination_failures,
    })
}
