//! Exact arithmetic: Gaussian rationals, polynomials, rational expressions.

mod parse;
mod poly;
mod ratexpr;
mod scalar;

pub use parse::{expr, parse_expr};
pub use poly::{Monomial, Param, Poly};
pub use ratexpr::{substitute_poly, RatExpr};
pub use scalar::{fp_inv, fp_pow, is_prime, Scalar};

use std::collections::BTreeMap;

use crate::error::Result;

/// Parameter bindings, e.g. `mu -> 2`.
pub type Bindings = BTreeMap<Param, RatExpr>;

pub fn substitute(e: &RatExpr, bindings: &Bindings) -> Result<RatExpr> {
    e.substitute(bindings)
}

pub fn reduce_mod_p(e: &RatExpr, p: u32) -> Result<u32> {
    e.reduce_mod_p(p)
}

/// Parse `name=expr` pairs such as `mu=2` or `lam=-1/2`.
pub fn parse_binding(text: &str) -> Result<(Param, RatExpr)> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| crate::Error::Usage(format!("expected NAME=VALUE, found `{text}`")))?;
    let name = name.trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(crate::Error::Usage(format!("bad parameter name `{name}`")));
    }
    Ok((Param::new(name), parse_expr(value)?))
}

/// Common denominator of a collection of expressions: the product of their
/// distinct non-constant denominators, together with each numerator
/// rescaled onto it.
pub fn clear_denominators<'a, I>(items: I) -> (Vec<Poly>, Poly)
where
    I: IntoIterator<Item = &'a RatExpr>,
{
    let items: Vec<&RatExpr> = items.into_iter().collect();
    let mut dens: Vec<Poly> = Vec::new();
    for e in &items {
        if !e.is_polynomial() && !dens.contains(e.den()) {
            dens.push(e.den().clone());
        }
    }
    let common = dens.iter().fold(Poly::from_int(1), |acc, d| &acc * d);
    let nums = items
        .iter()
        .map(|e| {
            let mut n = e.num().clone();
            if !e.is_polynomial() {
                for d in dens.iter().filter(|d| *d != e.den()) {
                    n = &n * d;
                }
            } else if !dens.is_empty() {
                n = &n * &common;
            }
            n
        })
        .collect();
    (nums, common)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn common_denominator() {
        let items = [expr("x/y"), expr("3"), expr("1/(y+1)"), expr("z/y")];
        let (nums, d) = clear_denominators(items.iter());
        assert_eq!(
            d,
            &Poly::named("y") * &(&Poly::named("y") + &Poly::from_int(1))
        );
        for (n, e) in nums.iter().zip(&items) {
            assert_eq!(RatExpr::new(n.clone(), d.clone()).unwrap(), *e);
        }
    }

    #[test]
    fn bindings_from_text() {
        let (p, v) = parse_binding("mu=-1/2").unwrap();
        assert_eq!(p.name(), "mu");
        assert_eq!(v, expr("-1/2"));
        assert!(parse_binding("mu").is_err());
        assert!(parse_binding("m u=1").is_err());
    }
}
