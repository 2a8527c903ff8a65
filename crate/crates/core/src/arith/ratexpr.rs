//! Unreduced quotients of polynomials.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::poly::{Param, Poly};
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// `num / den` with `den` never the zero polynomial. No GCD cancellation is
/// attempted; constant denominators are folded into the numerator and a
/// denominator dividing the numerator exactly is cancelled.
#[derive(Clone)]
pub struct RatExpr {
    num: Poly,
    den: Poly,
}

impl RatExpr {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DenominatorVanishes);
        }
        Ok(RatExpr::normalized(num, den))
    }

    fn normalized(num: Poly, den: Poly) -> Self {
        debug_assert!(!den.is_zero());
        if let Some(c) = den.as_constant() {
            let inv = c.inv().expect("nonzero constant denominator");
            return RatExpr {
                num: num.scale(&inv),
                den: Poly::one(),
            };
        }
        if num.is_zero() {
            return RatExpr::zero();
        }
        if let Some(q) = num.div_exact(&den) {
            return RatExpr::poly(q);
        }
        RatExpr { num, den }
    }

    pub fn poly(p: Poly) -> Self {
        RatExpr {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn scalar(c: Scalar) -> Self {
        RatExpr::poly(Poly::constant(c))
    }

    pub fn from_int(v: i64) -> Self {
        RatExpr::poly(Poly::from_int(v))
    }

    pub fn named(name: &str) -> Self {
        RatExpr::poly(Poly::named(name))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn params(&self) -> BTreeSet<Param> {
        let mut out = self.num.params();
        out.extend(self.den.params());
        out
    }

    pub fn is_real(&self) -> bool {
        self.num.is_real() && self.den.is_real()
    }

    /// The value when no parameters remain.
    pub fn as_constant(&self) -> Option<Scalar> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(&n / &d)
    }

    pub fn inv(&self) -> Result<Self> {
        RatExpr::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, rhs: &RatExpr) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DenominatorVanishes);
        }
        Ok(RatExpr::normalized(
            &self.num * &rhs.den,
            &self.den * &rhs.num,
        ))
    }

    pub fn pow(&self, exp: i32) -> Result<Self> {
        let base = if exp < 0 { self.inv()? } else { self.clone() };
        let e = exp.unsigned_abs();
        Ok(RatExpr::normalized(base.num.pow(e), base.den.pow(e)))
    }

    /// Exact substitution; unbound parameters stay symbolic.
    pub fn substitute(&self, bindings: &BTreeMap<Param, RatExpr>) -> Result<Self> {
        let num = substitute_poly(&self.num, bindings)?;
        let den = substitute_poly(&self.den, bindings)?;
        num.checked_div(&den)
    }

    /// Image in `F_p` of a parameter-free expression.
    pub fn reduce_mod_p(&self, p: u32) -> Result<u32> {
        let n = self.num.as_constant().ok_or_else(|| first_param(self))?;
        let d = self.den.as_constant().ok_or_else(|| first_param(self))?;
        if !n.is_real() || !d.is_real() {
            // a quotient of two non-real values can still be real
            let v = &n / &d;
            if !v.is_real() {
                return Err(Error::NonRealValue);
            }
            return v.to_fp(p);
        }
        let nf = n.to_fp(p)?;
        let df = d.to_fp(p)?;
        let inv = super::scalar::fp_inv(df, p).ok_or(Error::NonInvertibleDenominator { p })?;
        Ok(((nf as u64 * inv as u64) % p as u64) as u32)
    }
}

fn first_param(e: &RatExpr) -> Error {
    let name = e
        .params()
        .into_iter()
        .next()
        .map(|p| p.to_string())
        .unwrap_or_default();
    Error::UnboundParam(name)
}

/// Substitute into a polynomial, producing a rational expression.
pub fn substitute_poly(p: &Poly, bindings: &BTreeMap<Param, RatExpr>) -> Result<RatExpr> {
    if bindings.is_empty() || p.params().iter().all(|v| !bindings.contains_key(v)) {
        return Ok(RatExpr::poly(p.clone()));
    }
    // Polynomial bindings need no denominators.
    if bindings.values().all(RatExpr::is_polynomial) {
        let out = p.map_params(|v| bindings.get(v).map(|e| e.num.clone()));
        return Ok(RatExpr::poly(out));
    }
    let mut acc = RatExpr::zero();
    for (m, c) in p.terms() {
        let mut term = RatExpr::scalar(c.clone());
        for (v, e) in m.factors() {
            let factor = match bindings.get(v) {
                Some(val) => val.pow(*e as i32)?,
                None => RatExpr::poly(Poly::var(v.clone()).pow(*e)),
            };
            term = &term * &factor;
        }
        acc = &acc + &term;
    }
    Ok(acc)
}

impl Zero for RatExpr {
    fn zero() -> Self {
        RatExpr::poly(Poly::zero())
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for RatExpr {
    fn one() -> Self {
        RatExpr::poly(Poly::one())
    }
}

/// `a/b = c/d` iff `a·d − c·b` is the zero polynomial.
impl PartialEq for RatExpr {
    fn eq(&self, other: &Self) -> bool {
        if self.den == other.den {
            return self.num == other.num;
        }
        (&self.num * &other.den) == (&other.num * &self.den)
    }
}

impl Eq for RatExpr {}

impl From<Poly> for RatExpr {
    fn from(p: Poly) -> Self {
        RatExpr::poly(p)
    }
}

impl From<Scalar> for RatExpr {
    fn from(c: Scalar) -> Self {
        RatExpr::scalar(c)
    }
}

impl Add<&RatExpr> for &RatExpr {
    type Output = RatExpr;
    fn add(self, rhs: &RatExpr) -> RatExpr {
        if self.den == rhs.den {
            return RatExpr::normalized(&self.num + &rhs.num, self.den.clone());
        }
        RatExpr::normalized(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub<&RatExpr> for &RatExpr {
    type Output = RatExpr;
    fn sub(self, rhs: &RatExpr) -> RatExpr {
        self + &(-rhs)
    }
}

impl Mul<&RatExpr> for &RatExpr {
    type Output = RatExpr;
    fn mul(self, rhs: &RatExpr) -> RatExpr {
        if self.is_zero() || rhs.is_zero() {
            return RatExpr::zero();
        }
        RatExpr::normalized(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

/// Panics on a zero divisor; use [`RatExpr::checked_div`] for fallible input.
impl Div<&RatExpr> for &RatExpr {
    type Output = RatExpr;
    fn div(self, rhs: &RatExpr) -> RatExpr {
        self.checked_div(rhs).expect("division by zero expression")
    }
}

impl Neg for &RatExpr {
    type Output = RatExpr;
    fn neg(self) -> RatExpr {
        RatExpr {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Neg for RatExpr {
    type Output = RatExpr;
    fn neg(self) -> RatExpr {
        -&self
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for RatExpr {
            type Output = RatExpr;
            fn $m(self, rhs: RatExpr) -> RatExpr {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl fmt::Display for RatExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bind(pairs: &[(&str, RatExpr)]) -> BTreeMap<Param, RatExpr> {
        pairs
            .iter()
            .map(|(n, v)| (Param::new(n), v.clone()))
            .collect()
    }

    #[test]
    fn equality_by_cross_multiplication() {
        let x = RatExpr::named("x");
        let y = RatExpr::named("y");
        let z = RatExpr::named("z");
        let a = &(&x * &y) / &(&y * &z);
        let b = &x / &z;
        assert_eq!(a, b);
        assert_ne!(a.den(), b.den());
        let c = &(&x * &y) / &y;
        assert_eq!(c.den(), &Poly::one());
        assert_eq!(c, x);
    }

    #[test]
    fn substitution_into_quotient() {
        let mu = RatExpr::named("mu");
        let one = RatExpr::one();
        let e = &(&one + &mu) / &(&one - &mu);
        let at0 = e.substitute(&bind(&[("mu", RatExpr::zero())])).unwrap();
        assert_eq!(at0, RatExpr::one());
        let at1 = e.substitute(&bind(&[("mu", RatExpr::one())]));
        assert!(matches!(at1, Err(Error::DenominatorVanishes)));
    }

    #[test]
    fn partial_binding_keeps_free_params() {
        let e = &RatExpr::named("r11") + &RatExpr::named("r22");
        let out = e
            .substitute(&bind(&[("r11", RatExpr::from_int(3))]))
            .unwrap();
        assert_eq!(out, &RatExpr::from_int(3) + &RatExpr::named("r22"));
    }

    #[test]
    fn substitution_with_rational_binding() {
        let x = RatExpr::named("x");
        let e = &x * &x;
        let half = &RatExpr::one() / &RatExpr::named("t");
        let out = e.substitute(&bind(&[("x", half.clone())])).unwrap();
        assert_eq!(out, &half * &half);
    }

    #[test]
    fn constant_denominator_is_folded() {
        let e = &RatExpr::named("x") / &RatExpr::from_int(2);
        assert!(e.is_polynomial());
        assert_eq!(e.to_string(), "1/2*x");
    }

    #[test]
    fn reduce() {
        let half = &RatExpr::one() / &RatExpr::from_int(2);
        assert_eq!(half.reduce_mod_p(5).unwrap(), 3);
        assert_eq!(RatExpr::from_int(-1).reduce_mod_p(2).unwrap(), 1);
        let q = &RatExpr::from_int(3) / &RatExpr::from_int(4);
        assert!(matches!(
            q.reduce_mod_p(2),
            Err(Error::NonInvertibleDenominator { p: 2 })
        ));
        assert!(matches!(
            RatExpr::named("x").reduce_mod_p(3),
            Err(Error::UnboundParam(_))
        ));
        assert!(matches!(
            RatExpr::scalar(Scalar::i()).reduce_mod_p(3),
            Err(Error::NonRealValue)
        ));
    }
}
