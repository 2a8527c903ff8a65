//! Coefficient expression parser.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = atom [ "^" [ "-" ] integer ] ;
//! atom    = integer | identifier | "i" | "(" expr ")" ;
//! integer = digit { digit } ;
//! identifier = letter { letter | digit | "_" } ;   (* "i" alone is the imaginary unit *)
//! ```
//!
//! Rational literals are written as quotients (`3/4`). Whitespace is
//! ignored between tokens.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::poly::Poly;
use super::ratexpr::RatExpr;
use super::scalar::Scalar;
use crate::error::{Error, Result};

pub fn parse_expr(text: &str) -> Result<RatExpr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<RatExpr> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<RatExpr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = &acc * &self.unary()?;
            } else if self.eat(b'/') {
                self.skip_ws();
                let at = self.pos;
                let rhs = self.unary()?;
                acc = acc
                    .checked_div(&rhs)
                    .map_err(|_| Error::DivisionByZero { offset: at })?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<RatExpr> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<RatExpr> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let negative = self.eat(b'-');
        self.skip_ws();
        let at = self.pos;
        let Some(digits) = self.digits().map(str::to_owned) else {
            return Err(self.error("expected integer exponent"));
        };
        let exp: i32 = digits.parse().map_err(|_| Error::Syntax {
            offset: at,
            message: "exponent out of range".into(),
        })?;
        let exp = if negative { -exp } else { exp };
        base.pow(exp)
            .map_err(|_| Error::DivisionByZero { offset: at })
    }

    fn digits(&mut self) -> Option<&str> {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            None
        } else {
            std::str::from_utf8(&self.src[start..self.pos]).ok()
        }
    }

    fn atom(&mut self) -> Result<RatExpr> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(b) if b.is_ascii_digit() => {
                let digits = self.digits().unwrap_or("0");
                let n: BigInt = digits.parse().expect("ascii digits");
                Ok(RatExpr::scalar(Scalar::from(BigRational::from_integer(n))))
            }
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => {
                let start = self.pos;
                while matches!(self.peek(), Some(b) if b.is_ascii_alphanumeric() || b == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                if name == "i" {
                    Ok(RatExpr::scalar(Scalar::i()))
                } else {
                    Ok(RatExpr::poly(Poly::named(name)))
                }
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// Convenience for tests and data tables: panics on malformed input.
pub fn expr(text: &str) -> RatExpr {
    parse_expr(text).unwrap_or_else(|e| panic!("bad expression {text:?}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    #[test]
    fn zero_literal() {
        let e = parse_expr("0").unwrap();
        assert!(e.is_zero());
        assert!(e.is_polynomial());
    }

    #[test]
    fn quotient_keeps_denominator() {
        let e = parse_expr("-r22*r43/r32").unwrap();
        assert_eq!(e.num(), &(-&(&Poly::named("r22") * &Poly::named("r43"))));
        assert_eq!(e.den(), &Poly::named("r32"));
    }

    #[test]
    fn parameter_quotient() {
        let e = parse_expr("(1+mu)/(1-mu)").unwrap();
        let one = Poly::one();
        let mu = Poly::named("mu");
        assert_eq!(e.num(), &(&one + &mu));
        assert_eq!(e.den(), &(&one - &mu));
    }

    #[test]
    fn imaginary_unit_and_powers() {
        let e = parse_expr("i^2").unwrap();
        assert_eq!(e, RatExpr::from_int(-1));
        let e = parse_expr("x^-2 * x^3").unwrap();
        assert_eq!(e, RatExpr::named("x"));
        let e = parse_expr("-i*(k44 - k22)").unwrap();
        assert_eq!(e.num().params().len(), 2);
    }

    #[test]
    fn precedence() {
        assert_eq!(parse_expr("-x^2").unwrap(), -&parse_expr("x*x").unwrap());
        assert_eq!(parse_expr("1/2*x").unwrap(), parse_expr("x/2").unwrap());
        assert_eq!(parse_expr("2 - 3 - 4").unwrap(), RatExpr::from_int(-5));
        assert_eq!(parse_expr("12/4/3").unwrap(), RatExpr::one());
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse_expr("1 + * 2") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        match parse_expr("(a + b") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr(""), Err(Error::Syntax { .. })));
        assert!(matches!(
            parse_expr("a b"),
            Err(Error::Syntax { offset: 2, .. })
        ));
        assert!(matches!(
            parse_expr("2.5"),
            Err(Error::Syntax { offset: 1, .. })
        ));
        assert!(matches!(parse_expr("x#"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn division_by_zero_literal() {
        match parse_expr("x / 0") {
            Err(Error::DivisionByZero { offset }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_expr("1/(x - x)"),
            Err(Error::DivisionByZero { .. })
        ));
    }

    #[test]
    fn display_round_trip() {
        for s in [
            "-r22*r43/r32",
            "(1+mu)/(1-mu)",
            "1/2*(r21 + r31)",
            "i*(k44 - k22) + 3/7",
            "(2 + 3*i)*x^3 - y",
            "-(k11 - k22^2)/k24",
        ] {
            let e = parse_expr(s).unwrap();
            let printed = e.to_string();
            let again = parse_expr(&printed).unwrap();
            assert_eq!(again, e, "{s} -> {printed}");
            assert_eq!(again.to_string(), printed);
        }
    }
}
