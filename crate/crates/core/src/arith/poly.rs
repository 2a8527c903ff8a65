//! Sparse multivariate polynomials over [`Scalar`] in named parameters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use super::scalar::Scalar;

/// A named indeterminate. Ordered and compared by name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Param(Arc<str>);

impl Param {
    pub fn new(name: &str) -> Self {
        Param(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Param {
    fn from(s: &str) -> Self {
        Param::new(s)
    }
}

/// A power product, kept sorted by parameter name with positive exponents.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<(Param, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(p: Param) -> Self {
        Monomial(vec![(p, 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn factors(&self) -> &[(Param, u32)] {
        &self.0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some((pa, ea)), Some((pb, eb))) => {
                    if pa == pb {
                        out.push((pa.clone(), ea + eb));
                        a.next();
                        b.next();
                    } else if pa < pb {
                        out.push((pa.clone(), *ea));
                        a.next();
                    } else {
                        out.push((pb.clone(), *eb));
                        b.next();
                    }
                }
                (Some(x), None) => {
                    out.push((*x).clone());
                    a.next();
                }
                (None, Some(y)) => {
                    out.push((*y).clone());
                    b.next();
                }
                (None, None) => break,
            }
        }
        Monomial(out)
    }

    /// `self / other` when `other` divides it.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut b = other.0.iter().peekable();
        for (p, e) in &self.0 {
            match b.peek() {
                Some((q, _)) if q < p => return None,
                Some((q, f)) if q == p => {
                    if f > e {
                        return None;
                    }
                    if f < e {
                        out.push((p.clone(), e - f));
                    }
                    b.next();
                }
                _ => out.push((p.clone(), *e)),
            }
        }
        b.peek().is_none().then_some(Monomial(out))
    }

    /// Graded lexicographic order, earlier parameter names ranking higher.
    /// Unlike the derived `Ord` this is compatible with multiplication.
    fn grlex(&self, other: &Monomial) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        self.degree().cmp(&other.degree()).then_with(|| {
            let (mut a, mut b) = (self.0.iter(), other.0.iter());
            loop {
                match (a.next(), b.next()) {
                    (Some((pa, ea)), Some((pb, eb))) => {
                        if pa != pb {
                            return if pa < pb { Ordering::Greater } else { Ordering::Less };
                        }
                        if ea != eb {
                            return ea.cmp(eb);
                        }
                    }
                    (Some(_), None) => return Ordering::Greater,
                    (None, Some(_)) => return Ordering::Less,
                    (None, None) => return Ordering::Equal,
                }
            }
        })
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, (p, e)) in self.0.iter().enumerate() {
            if idx > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Polynomial with no stored zero coefficients; the `BTreeMap` ordering
/// (lexicographic on parameter names) makes equal polynomials structurally
/// identical.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Scalar>,
}

impl Poly {
    pub fn constant(c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Poly { terms }
    }

    pub fn from_int(v: i64) -> Self {
        Poly::constant(Scalar::from_int(v))
    }

    pub fn var(p: Param) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(p), Scalar::one());
        Poly { terms }
    }

    pub fn named(name: &str) -> Self {
        Poly::var(Param::new(name))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The constant value, if the polynomial has no parameters.
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    /// `Some((c, p))` when the polynomial is exactly `c·p` for one parameter.
    pub fn as_scaled_var(&self) -> Option<(&Scalar, &Param)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next()?;
        match m.factors() {
            [(p, 1)] => Some((c, p)),
            _ => None,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Degree counting only the given parameters.
    pub fn degree_in(&self, vars: &BTreeSet<Param>) -> u32 {
        self.terms
            .keys()
            .map(|m| {
                m.factors()
                    .iter()
                    .filter(|(p, _)| vars.contains(p))
                    .map(|(_, e)| e)
                    .sum()
            })
            .max()
            .unwrap_or(0)
    }

    pub fn params(&self) -> BTreeSet<Param> {
        self.terms
            .keys()
            .flat_map(|m| m.factors().iter().map(|(p, _)| p.clone()))
            .collect()
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(Scalar::is_real)
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, exp: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn leading(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.iter().max_by(|x, y| x.0.grlex(y.0))
    }

    /// The exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (dm, dc) = d.leading()?;
        let dc_inv = dc.inv()?;
        let mut rest = self.clone();
        let mut quot = Poly::zero();
        while let Some((m, c)) = rest.leading() {
            let t = Poly {
                terms: [(m.div(dm)?, c * &dc_inv)].into_iter().collect(),
            };
            rest.sub_product(&t, d);
            quot = &quot + &t;
        }
        Some(quot)
    }

    /// `self += a * b`, the inner loop of every bracket evaluation.
    pub fn add_product(&mut self, a: &Poly, b: &Poly) {
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                self.add_term(ma.mul(mb), ca * cb);
            }
        }
    }

    pub fn sub_product(&mut self, a: &Poly, b: &Poly) {
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                self.add_term(ma.mul(mb), -(ca * cb));
            }
        }
    }

    /// Evaluate with every parameter mapped through `value`; the callback
    /// returns `None` for parameters that stay symbolic.
    pub fn map_params<F>(&self, mut value: F) -> Poly
    where
        F: FnMut(&Param) -> Option<Poly>,
    {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            let mut rest = Monomial::one();
            for (p, e) in m.factors() {
                match value(p) {
                    Some(v) => term = &term * &v.pow(*e),
                    None => rest = rest.mul(&Monomial(vec![(p.clone(), *e)])),
                }
            }
            if !rest.is_one() {
                term = &term
                    * &Poly {
                        terms: [(rest, Scalar::one())].into_iter().collect(),
                    };
            }
            out = &out + &term;
        }
        out
    }

    /// Reduce coefficients into `F_p` and evaluate at `point`.
    pub fn eval_fp<F>(&self, p: u32, mut point: F) -> crate::error::Result<u32>
    where
        F: FnMut(&Param) -> Option<u32>,
    {
        let mut acc: u64 = 0;
        for (m, c) in &self.terms {
            let mut t = c.to_fp(p)? as u64;
            for (v, e) in m.factors() {
                let x = point(v).ok_or_else(|| crate::Error::UnboundParam(v.to_string()))?;
                t = t * super::scalar::fp_pow(x, *e, p) as u64 % p as u64;
            }
            acc = (acc + t) % p as u64;
        }
        Ok(acc as u32)
    }
}

impl Zero for Poly {
    fn zero() -> Self {
        Poly::default()
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Poly {
    fn one() -> Self {
        Poly::from_int(1)
    }
}

impl From<Scalar> for Poly {
    fn from(c: Scalar) -> Self {
        Poly::constant(c)
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        out.add_product(self, rhs);
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

/// Terms print in descending monomial order, e.g. `r22*r43 - 2*mu + 1`.
/// The output is valid input for the expression parser.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.im().is_zero() && c.re() < &num_rational::BigRational::zero()
                || c.re().is_zero() && c.im() < &num_rational::BigRational::zero();
            let mag = if negative { -c } else { c.clone() };
            if idx == 0 {
                if negative {
                    f.write_str("-")?;
                }
            } else if negative {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
