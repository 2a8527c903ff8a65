use std::fmt;

use num_traits::{One, Zero};

use crate::arith::{clear_denominators, parse_expr, Bindings, Param, Poly, RatExpr, Scalar};
use crate::error::{Error, Result};

/// Values used when a parameterized algebra is checked numerically.
pub const SAMPLE_VALUES: [i64; 4] = [0, 1, 2, 5];

/// Where a structure parameter may range.
#[derive(Clone, Debug, PartialEq)]
pub enum Admissible {
    /// Every complex value.
    Any,
    /// Only the listed values.
    Finite(Vec<Scalar>),
    /// Every complex value except the listed ones.
    Except(Vec<Scalar>),
}

impl Admissible {
    /// Accepts `C`, `{0, 1}` and `C \ {1}`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "C" {
            return Ok(Admissible::Any);
        }
        let set = |s: &str| -> Result<Vec<Scalar>> {
            let inner = s
                .trim()
                .strip_prefix('{')
                .and_then(|s| s.strip_suffix('}'))
                .ok_or_else(|| Error::Usage(format!("bad admissible set `{text}`")))?;
            inner
                .split(',')
                .filter(|v| !v.trim().is_empty())
                .map(|v| {
                    parse_expr(v)?
                        .as_constant()
                        .ok_or_else(|| Error::Usage(format!("non-constant value in `{text}`")))
                })
                .collect()
        };
        if let Some(rest) = t.strip_prefix('C') {
            let rest = rest.trim_start();
            if let Some(ex) = rest.strip_prefix('\\') {
                return Ok(Admissible::Except(set(ex)?));
            }
        }
        Ok(Admissible::Finite(set(t)?))
    }

    pub fn contains(&self, v: &Scalar) -> bool {
        match self {
            Admissible::Any => true,
            Admissible::Finite(vs) => vs.contains(v),
            Admissible::Except(vs) => !vs.contains(v),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Admissible::Finite(_))
    }

    /// The sample values that fall in this set.
    pub fn samples(&self) -> Vec<Scalar> {
        let values: Vec<Scalar> = SAMPLE_VALUES.iter().map(|&v| Scalar::from_int(v)).collect();
        self.samples_from(&values)
    }

    pub fn samples_from(&self, values: &[Scalar]) -> Vec<Scalar> {
        values
            .iter()
            .filter(|v| self.contains(v))
            .cloned()
            .collect()
    }
}

impl fmt::Display for Admissible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |vs: &[Scalar]| {
            vs.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", ")
        };
        match self {
            Admissible::Any => write!(f, "C"),
            Admissible::Finite(vs) => write!(f, "{{{}}}", list(vs)),
            Admissible::Except(vs) => write!(f, "C \\ {{{}}}", list(vs)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamSpec {
    pub param: Param,
    pub admissible: Admissible,
}

/// A finite-dimensional algebra given by structure constants
/// `⟦e_i, e_j⟧ = Σ_k c[i][j][k] e_k` (indices 0-based here).
#[derive(Clone, Debug)]
pub struct AlgebraTable {
    name: String,
    dim: usize,
    c: Vec<RatExpr>,
    params: Vec<ParamSpec>,
}

impl AlgebraTable {
    pub fn zero(name: &str, dim: usize) -> Self {
        AlgebraTable {
            name: name.to_string(),
            dim,
            c: vec![RatExpr::zero(); dim * dim * dim],
            params: Vec::new(),
        }
    }

    /// Build from 0-based `(i, j, k, coefficient)` triples; repeated
    /// positions accumulate.
    pub fn from_entries<I>(name: &str, dim: usize, params: Vec<ParamSpec>, entries: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, usize, RatExpr)>,
    {
        let mut t = AlgebraTable::zero(name, dim);
        t.params = params;
        for (i, j, k, v) in entries {
            let slot = &mut t.c[(i * dim + j) * dim + k];
            *slot = &*slot + &v;
        }
        t
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    /// Structure constant for `⟦e_i, e_j⟧` along `e_k`.
    pub fn get(&self, i: usize, j: usize, k: usize) -> &RatExpr {
        &self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: RatExpr) {
        let n = self.dim;
        self.c[(i * n + j) * n + k] = v;
    }

    pub fn entries(&self) -> &[RatExpr] {
        &self.c
    }

    /// Nonzero constants as 0-based `(i, j, k, value)`.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, usize, &RatExpr)> {
        let n = self.dim;
        self.c
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(move |(idx, v)| (idx / (n * n), (idx / n) % n, idx % n, v))
    }

    pub fn is_real(&self) -> bool {
        self.c.iter().all(RatExpr::is_real)
    }

    pub fn has_params(&self) -> bool {
        self.c.iter().any(|v| !v.params().is_empty())
    }

    /// Substitute parameter values; bound parameters leave the declared list.
    pub fn bind(&self, bindings: &Bindings) -> Result<AlgebraTable> {
        for spec in &self.params {
            if let Some(v) = bindings.get(&spec.param).and_then(RatExpr::as_constant) {
                if !spec.admissible.contains(&v) {
                    return Err(Error::Usage(format!(
                        "{} = {} is outside the admissible set {} of {}",
                        spec.param, v, spec.admissible, self.name
                    )));
                }
            }
        }
        let c = self
            .c
            .iter()
            .map(|v| v.substitute(bindings))
            .collect::<Result<Vec<_>>>()?;
        Ok(AlgebraTable {
            name: self.name.clone(),
            dim: self.dim,
            c,
            params: self
                .params
                .iter()
                .filter(|s| !bindings.contains_key(&s.param))
                .cloned()
                .collect(),
        })
    }

    /// Rename parameters, e.g. to keep two algebras' `mu` apart.
    pub fn rename_params(&self, suffix: &str) -> AlgebraTable {
        let bindings: Bindings = self
            .params
            .iter()
            .map(|s| {
                let fresh = format!("{}{}", s.param.name(), suffix);
                (s.param.clone(), RatExpr::named(&fresh))
            })
            .collect();
        let mut out = self.bind_unchecked(&bindings);
        out.params = self
            .params
            .iter()
            .map(|s| ParamSpec {
                param: Param::new(&format!("{}{}", s.param.name(), suffix)),
                admissible: s.admissible.clone(),
            })
            .collect();
        out
    }

    fn bind_unchecked(&self, bindings: &Bindings) -> AlgebraTable {
        AlgebraTable {
            name: self.name.clone(),
            dim: self.dim,
            c: self
                .c
                .iter()
                .map(|v| v.substitute(bindings).expect("renaming cannot vanish"))
                .collect(),
            params: self.params.clone(),
        }
    }

    /// Every combination of sample values for the declared parameters.
    pub fn sample_bindings(&self) -> Vec<Bindings> {
        let values: Vec<Scalar> = SAMPLE_VALUES.iter().map(|&v| Scalar::from_int(v)).collect();
        self.bindings_over(&values)
    }

    /// Every assignment of admissible `values` to the parameters.
    pub fn bindings_over(&self, values: &[Scalar]) -> Vec<Bindings> {
        let mut out = vec![Bindings::new()];
        for spec in &self.params {
            let mut next = Vec::new();
            for b in &out {
                for v in spec.admissible.samples_from(values) {
                    let mut nb = b.clone();
                    nb.insert(spec.param.clone(), RatExpr::scalar(v));
                    next.push(nb);
                }
            }
            out = next;
        }
        out
    }

    /// `⟦u, v⟧` for coefficient vectors.
    pub fn bracket(&self, u: &[RatExpr], v: &[RatExpr]) -> Result<Vec<RatExpr>> {
        let n = self.dim;
        for len in [u.len(), v.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        let mut w = vec![RatExpr::zero(); n];
        for (i, j, k, c) in self.nonzero() {
            if u[i].is_zero() || v[j].is_zero() {
                continue;
            }
            w[k] = &w[k] + &(&(&u[i] * &v[j]) * c);
        }
        Ok(w)
    }

    /// Polynomial form `C / scale` of the structure constants.
    pub fn structure(&self) -> Structure {
        let (nums, scale) = clear_denominators(self.c.iter());
        Structure::from_dense(self.dim, nums, scale)
    }
}

/// `λ1·A + λ2·B` on the shared basis.
pub fn combined_bracket(
    a: &AlgebraTable,
    b: &AlgebraTable,
    l1: &RatExpr,
    l2: &RatExpr,
) -> Result<AlgebraTable> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    let mut params = a.params.clone();
    for p in &b.params {
        if !params.iter().any(|q| q.param == p.param) {
            params.push(p.clone());
        }
    }
    Ok(AlgebraTable {
        name: format!("{}+{}", a.name, b.name),
        dim: a.dim,
        c: a.c
            .iter()
            .zip(&b.c)
            .map(|(x, y)| &(l1 * x) + &(l2 * y))
            .collect(),
        params,
    })
}

/// Sparse polynomial structure constants with a common denominator:
/// the true constants are `products / scale`.
#[derive(Clone, Debug)]
pub struct Structure {
    dim: usize,
    products: Vec<Vec<(usize, Poly)>>,
    scale: Poly,
}

impl Structure {
    fn from_dense(dim: usize, nums: Vec<Poly>, scale: Poly) -> Self {
        let mut products = vec![Vec::new(); dim * dim];
        for (idx, p) in nums.into_iter().enumerate() {
            if !p.is_zero() {
                products[idx / dim].push((idx % dim, p));
            }
        }
        Structure {
            dim,
            products,
            scale,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> &Poly {
        &self.scale
    }

    pub fn is_scaled(&self) -> bool {
        !self.scale.is_one()
    }

    /// Nonzero `(k, c)` with `⟦e_i, e_j⟧ = Σ c e_k` (scaled).
    pub fn basis_product(&self, i: usize, j: usize) -> &[(usize, Poly)] {
        &self.products[i * self.dim + j]
    }

    /// Scaled bracket: `scale · ⟦u, v⟧`.
    pub fn bracket(&self, u: &[Poly], v: &[Poly]) -> Vec<Poly> {
        let n = self.dim;
        let mut w = vec![Poly::zero(); n];
        for (i, ui) in u.iter().enumerate() {
            if ui.is_zero() {
                continue;
            }
            for (j, vj) in v.iter().enumerate() {
                if vj.is_zero() {
                    continue;
                }
                let prods = &self.products[i * n + j];
                if prods.is_empty() {
                    continue;
                }
                let uv = ui * vj;
                for (k, c) in prods {
                    w[*k].add_product(&uv, c);
                }
            }
        }
        w
    }

    pub fn unit(&self, i: usize) -> Vec<Poly> {
        let mut e = vec![Poly::zero(); self.dim];
        e[i] = Poly::one();
        e
    }
}

/// Parse `[i, j, k, "expr"]` rows with 1-based indices.
pub(crate) fn parse_entries(
    rows: &[serde_json::Value],
    dim: usize,
    pointer: &str,
) -> Result<Vec<(usize, usize, usize, RatExpr)>> {
    let mut out = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        let here = format!("{pointer}/{r}");
        let arr = row
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| Error::schema(&here, "entry must be [i, j, k, \"coefficient\"]"))?;
        let mut idx = [0usize; 3];
        for (slot, v) in arr[..3].iter().enumerate() {
            let x = v
                .as_u64()
                .filter(|&x| x >= 1 && x as usize <= dim)
                .ok_or_else(|| {
                    Error::schema(
                        format!("{here}/{slot}"),
                        format!("index must be in 1..={dim}"),
                    )
                })?;
            idx[slot] = x as usize - 1;
        }
        let text = arr[3]
            .as_str()
            .ok_or_else(|| Error::schema(format!("{here}/3"), "coefficient must be a string"))?;
        let value =
            parse_expr(text).map_err(|e| Error::schema(format!("{here}/3"), e.to_string()))?;
        if out
            .iter()
            .any(|(i, j, k, _)| (*i, *j, *k) == (idx[0], idx[1], idx[2]))
        {
            return Err(Error::schema(&here, "duplicate structure constant"));
        }
        out.push((idx[0], idx[1], idx[2], value));
    }
    Ok(out)
}
