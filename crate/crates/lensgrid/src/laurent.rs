use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Sparse integer Laurent polynomial in `a` and `z`.
///
/// Keys are exponent pairs `(e_a, e_z)`; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    terms: BTreeMap<(i64, i64), BigInt>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(1, 0, 0)
    }

    pub fn monomial<C: Into<BigInt>>(coeff: C, ea: i64, ez: i64) -> Self {
        let c = coeff.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((ea, ez), c);
        }
        Self { terms }
    }

    /// `a^e`
    pub fn a_pow(e: i64) -> Self {
        Self::monomial(1, e, 0)
    }

    /// `(a^-p - a^p) z^-1`, the factor contributed by a split unknot.
    pub fn unknot_factor(p: u32) -> Self {
        let p = p as i64;
        Self::monomial(1, -p, -1) - Self::monomial(1, p, -1)
    }

    pub fn from_terms<I>(iter: I) -> Self
    where
        I: IntoIterator<Item = ((i64, i64), BigInt)>,
    {
        let mut out = Self::zero();
        for (k, c) in iter {
            out.add_term(k, c);
        }
        out
    }

    fn add_term(&mut self, k: (i64, i64), c: BigInt) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(k).or_insert_with(BigInt::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, ea: i64, ez: i64) -> BigInt {
        self.terms.get(&(ea, ez)).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i64, i64), &BigInt)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Drops zero coefficients. Values built through the public API are
    /// already normal, so this is the identity on them.
    pub fn normalized(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, c)| (*k, c.clone())))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn to_canonical_string(&self) -> String {
        self.to_string()
    }

    pub fn parse(s: &str) -> Result<Self, ParseError> {
        Parser::new(s).parse()
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, c.clone());
        }
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, -c);
        }
        out
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for ((a1, z1), c1) in &self.terms {
            for ((a2, z2), c2) in &rhs.terms {
                out.add_term((a1 + a2, z1 + z2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $f:ident) => {
        impl $tr for LaurentPoly {
            type Output = LaurentPoly;
            fn $f(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&LaurentPoly> for LaurentPoly {
            type Output = LaurentPoly;
            fn $f(self, rhs: &LaurentPoly) -> LaurentPoly {
                (&self).$f(rhs)
            }
        }
        impl $tr<LaurentPoly> for &LaurentPoly {
            type Output = LaurentPoly;
            fn $f(self, rhs: LaurentPoly) -> LaurentPoly {
                self.$f(&rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

fn write_var(f: &mut fmt::Formatter<'_>, v: char, e: i64) -> fmt::Result {
    if e == 1 {
        write!(f, "{v}")
    } else {
        write!(f, "{v}^{e}")
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, ((ea, ez), c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mag = c.abs();
            let bare = *ea == 0 && *ez == 0;
            let mut need_star = false;
            if bare || !mag.is_one() {
                write!(f, "{mag}")?;
                need_star = true;
            }
            for (v, e) in [('a', *ea), ('z', *ez)] {
                if e == 0 {
                    continue;
                }
                if need_star {
                    write!(f, "*")?;
                }
                write_var(f, v, e)?;
                need_star = true;
            }
        }
        Ok(())
    }
}

impl FromStr for LaurentPoly {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        Self::parse(s)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        Self {
            src: s.as_bytes(),
            pos: 0,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t')) {
            self.pos += 1;
        }
    }

    fn digits(&mut self) -> Option<&'a str> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        if self.peek() != Some(b'^') {
            return Ok(1);
        }
        self.pos += 1;
        let neg = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let at = self.pos;
        let Some(d) = self.digits() else {
            return self.err("expected exponent digits");
        };
        let v: i64 = d.parse().map_err(|_| ParseError {
            pos: at,
            msg: "exponent out of range".into(),
        })?;
        Ok(if neg { -v } else { v })
    }

    fn term(&mut self, negative: bool) -> Result<((i64, i64), BigInt), ParseError> {
        let mut coeff = BigInt::one();
        let mut seen_any = false;
        if let Some(d) = self.digits() {
            coeff = d.parse::<BigInt>().expect("digit run");
            seen_any = true;
        }
        let (mut ea, mut ez) = (0i64, 0i64);
        loop {
            if seen_any && self.peek() == Some(b'*') {
                self.pos += 1;
            }
            match self.peek() {
                Some(b'a') => {
                    self.pos += 1;
                    ea += self.exponent()?;
                }
                Some(b'z') => {
                    self.pos += 1;
                    ez += self.exponent()?;
                }
                _ if seen_any && self.src.get(self.pos.wrapping_sub(1)) == Some(&b'*') => {
                    return self.err("expected variable after '*'");
                }
                _ if !seen_any => return self.err("expected term"),
                _ => break,
            }
            seen_any = true;
        }
        if negative {
            coeff = -coeff;
        }
        Ok(((ea, ez), coeff))
    }

    fn parse(mut self) -> Result<LaurentPoly, ParseError> {
        let mut out = LaurentPoly::zero();
        self.skip_ws();
        let mut negative = false;
        if self.peek() == Some(b'-') {
            negative = true;
            self.pos += 1;
            self.skip_ws();
        }
        loop {
            let (k, c) = self.term(negative)?;
            out.add_term(k, c);
            self.skip_ws();
            match self.peek() {
                None => break,
                Some(b'+') => negative = false,
                Some(b'-') => negative = true,
                Some(_) => return self.err("expected '+' or '-'"),
            }
            self.pos += 1;
            self.skip_ws();
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> LaurentPoly {
        LaurentPoly::parse(s).unwrap()
    }

    #[test]
    fn add_examples() {
        let x = p("a^-5 - a^5");
        assert_eq!(&x + &LaurentPoly::zero(), x);
        let s = LaurentPoly::a_pow(6) + LaurentPoly::monomial(1, 6, 1);
        assert_eq!(s.to_string(), "a^6 + a^6*z");
        assert_eq!(p("1 - z") + p("z"), LaurentPoly::one());
    }

    #[test]
    fn mul_examples() {
        assert_eq!(LaurentPoly::a_pow(10) * LaurentPoly::a_pow(-4), LaurentPoly::a_pow(6));
        let u = LaurentPoly::unknot_factor(5) * LaurentPoly::a_pow(-4);
        assert_eq!(u, p("a^-9*z^-1 - a*z^-1"));
        let f1 = p("1 - z");
        assert_eq!((&f1 * &f1).to_string(), "1 - 2*z + z^2");
    }

    #[test]
    fn monomial_examples() {
        assert_eq!(LaurentPoly::monomial(1, -4, 0).to_string(), "a^-4");
        assert!(LaurentPoly::monomial(0, 7, 7).is_zero());
        assert_eq!(LaurentPoly::monomial(-1, -5, -1).to_string(), "-a^-5*z^-1");
    }

    #[test]
    fn unknot_factor_examples() {
        assert_eq!(LaurentPoly::unknot_factor(5).to_string(), "a^-5*z^-1 - a^5*z^-1");
        assert_eq!(LaurentPoly::unknot_factor(1).to_string(), "a^-1*z^-1 - a*z^-1");
        assert_eq!(LaurentPoly::unknot_factor(2).to_string(), "a^-2*z^-1 - a^2*z^-1");
    }

    #[test]
    fn canonical_strings() {
        let x = LaurentPoly::a_pow(-8) - LaurentPoly::monomial(1, -8, 1);
        assert_eq!(x.to_string(), "a^-8 - a^-8*z");
        assert_eq!(LaurentPoly::zero().to_string(), "0");
        assert_eq!(LaurentPoly::monomial(3, 0, 0).to_string(), "3");
        assert_eq!(LaurentPoly::monomial(1, 2, -1).to_string(), "a^2*z^-1");
        assert_eq!(p("a^6 + a^6*z"), LaurentPoly::a_pow(6) + LaurentPoly::monomial(1, 6, 1));
        assert_eq!(p("-a^2*z^2 + 2*a^2 - a^4").to_string(), "2*a^2 - a^2*z^2 - a^4");
    }

    #[test]
    fn parse_accepts_loose_forms() {
        assert_eq!(p("2a^2z"), LaurentPoly::monomial(2, 2, 1));
        assert_eq!(p("0"), LaurentPoly::zero());
        assert_eq!(p("a*a"), LaurentPoly::a_pow(2));
        assert_eq!(p("  - 3 +z"), p("-3 + z"));
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = LaurentPoly::parse("a^ + 1").unwrap_err();
        assert_eq!(e.pos, 2);
        let e = LaurentPoly::parse("a + b").unwrap_err();
        assert_eq!(e.pos, 4);
        let e = LaurentPoly::parse("").unwrap_err();
        assert_eq!(e.pos, 0);
        let e = LaurentPoly::parse("3*").unwrap_err();
        assert_eq!(e.pos, 2);
        assert!(LaurentPoly::parse("a z").is_err());
    }

    fn arb_poly() -> impl Strategy<Value = LaurentPoly> {
        prop::collection::vec(((-20i64..=20, -20i64..=20), -1_000_000i64..=1_000_000), 0..8)
            .prop_map(|v| LaurentPoly::from_terms(v.into_iter().map(|(k, c)| (k, BigInt::from(c)))))
    }

    proptest! {
        #[test]
        fn ring_axioms(x in arb_poly(), y in arb_poly(), w in arb_poly()) {
            prop_assert_eq!(&x + &y, &y + &x);
            prop_assert_eq!(&x * &y, &y * &x);
            prop_assert_eq!(&(&x + &y) + &w, &x + &(&y + &w));
            prop_assert_eq!(&(&x * &y) * &w, &x * &(&y * &w));
            prop_assert_eq!(&x * &(&y + &w), &(&x * &y) + &(&x * &w));
            prop_assert_eq!(&x + &LaurentPoly::zero(), x.clone());
            prop_assert_eq!(&x * &LaurentPoly::one(), x.clone());
            prop_assert!((&x - &x).is_zero());
        }

        #[test]
        fn normalization_idempotent(x in arb_poly()) {
            prop_assert_eq!(x.normalized().normalized(), x.normalized());
            prop_assert_eq!(x.normalized(), x);
        }

        #[test]
        fn canonical_string_round_trip(x in arb_poly()) {
            let s = x.to_canonical_string();
            prop_assert_eq!(LaurentPoly::parse(&s).unwrap(), x);
        }
    }
}
