//! Exact coefficient arithmetic: sparse univariate polynomials in the formal
//! level `k` over arbitrary-precision rationals, plus evaluation at numeric
//! levels, the invariant bilinear form on the centralizer, and the shift
//! constants `alpha_i` entering the determinant matrix.
//!
//! Every structure constant in the engine lives in this ring; no floating
//! point appears anywhere in the crate.

use crate::pyramid::{GenIndex, Kind, Pyramid};
use crate::CodecError;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// Convenience constructor for an exact rational from machine integers.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Element of Q[k] as a sparse exponent-to-coefficient map.
///
/// Invariant: no zero coefficients are stored, so the representation is
/// canonical and equality is structural.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct Scalar {
    terms: BTreeMap<u32, BigRational>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    /// The polynomial `k`.
    pub fn k() -> Self {
        Scalar::term(1, BigRational::one())
    }

    pub fn from_int(v: i64) -> Self {
        Scalar::constant(BigRational::from(BigInt::from(v)))
    }

    pub fn from_frac(num: i64, den: i64) -> Self {
        Scalar::constant(rat(num, den))
    }

    pub fn constant(c: BigRational) -> Self {
        Scalar::term(0, c)
    }

    /// The monomial `c * k^exp`.
    pub fn term(exp: u32, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        Scalar { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Degree in `k`, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().copied()
    }

    pub fn coeff(&self, exp: u32) -> BigRational {
        self.terms.get(&exp).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Evaluation at a numeric level; a ring homomorphism Q[k] -> Q.
    pub fn evaluate(&self, at: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (&exp, c) in self.terms.iter().rev() {
            let mut pow = BigRational::one();
            for _ in 0..exp {
                pow *= at;
            }
            acc += c * pow;
        }
        acc
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Scalar::zero();
        }
        let terms = self.terms.iter().map(|(&e, v)| (e, v * c)).collect();
        Scalar { terms }
    }

    fn add_assign_term(&mut self, exp: u32, c: &BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    /// Serialization: `[[exp, num, den], ...]` with exponents descending.
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .terms
            .iter()
            .rev()
            .map(|(&e, c)| {
                Value::Array(vec![
                    Value::from(e),
                    bigint_to_json(c.numer()),
                    bigint_to_json(c.denom()),
                ])
            })
            .collect();
        Value::Array(rows)
    }

    pub fn from_json(v: &Value) -> Result<Self, CodecError> {
        let rows = v
            .as_array()
            .ok_or(CodecError::Shape("scalar: expected array of [exp,num,den]"))?;
        let mut out = Scalar::zero();
        for row in rows {
            let t = row
                .as_array()
                .filter(|t| t.len() == 3)
                .ok_or(CodecError::Shape("scalar term: expected [exp,num,den]"))?;
            let exp = t[0]
                .as_u64()
                .ok_or(CodecError::Shape("scalar term: bad exponent"))? as u32;
            let num = bigint_from_json(&t[1])?;
            let den = bigint_from_json(&t[2])?;
            if den.is_zero() {
                return Err(CodecError::Shape("scalar term: zero denominator"));
            }
            out.add_assign_term(exp, &BigRational::new(num, den));
        }
        Ok(out)
    }
}

fn bigint_to_json(v: &BigInt) -> Value {
    match i64::try_from(v) {
        Ok(small) => Value::from(small),
        Err(_) => Value::from(v.to_string()),
    }
}

fn bigint_from_json(v: &Value) -> Result<BigInt, CodecError> {
    if let Some(i) = v.as_i64() {
        return Ok(BigInt::from(i));
    }
    if let Some(u) = v.as_u64() {
        return Ok(BigInt::from(u));
    }
    if let Some(s) = v.as_str() {
        return s
            .parse::<BigInt>()
            .map_err(|_| CodecError::Shape("scalar term: unparsable big integer"));
    }
    Err(CodecError::Shape("scalar term: expected integer or string"))
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::from_int(v)
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        for (&e, c) in &rhs.terms {
            self.add_assign_term(e, c);
        }
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        for (&e, c) in &rhs.terms {
            self.add_assign_term(e, &-c.clone());
        }
    }
}

impl Add<&Scalar> for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&Scalar> for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul<&Scalar> for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        let mut out = Scalar::zero();
        for (&e1, c1) in &self.terms {
            for (&e2, c2) in &rhs.terms {
                out.add_assign_term(e1 + e2, &(c1 * c2));
            }
        }
        out
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &Scalar) {
        *self = &*self * rhs;
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        let terms = self.terms.iter().map(|(&e, c)| (e, -c.clone())).collect();
        Scalar { terms }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        &self + &rhs
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        &self - &rhs
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

/// Canonical print form, e.g. `(2/3)k + 1`, `k^2 - 4`, `-k`, `0`.
impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&e, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            write_term(f, e, &mag)?;
        }
        Ok(())
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, exp: u32, mag: &BigRational) -> fmt::Result {
    let is_int = mag.denom().is_one();
    if exp == 0 {
        return if is_int {
            write!(f, "{}", mag.numer())
        } else {
            write!(f, "{}/{}", mag.numer(), mag.denom())
        };
    }
    if !mag.is_one() {
        if is_int {
            write!(f, "{}", mag.numer())?;
        } else {
            write!(f, "({}/{})", mag.numer(), mag.denom())?;
        }
    }
    if exp == 1 {
        write!(f, "k")
    } else {
        write!(f, "k^{}", exp)
    }
}

/// Exact rational value of the invariant bilinear form on the centralizer.
///
/// The denominator always divides the box count N.
pub type FormConstant = BigRational;

/// Invariant form on basis elements of the centralizer.
///
/// Nonzero only on pairs of shift-0 elements: diagonal against diagonal, and
/// E_ij against E_ji (admissible together only when the rows have equal
/// length). All values with a nonzero shift on either side vanish.
pub fn form(p: &Pyramid, g1: &GenIndex, g2: &GenIndex) -> FormConstant {
    debug_assert!(matches!(g1.kind, Kind::E | Kind::ELow));
    debug_assert!(matches!(g2.kind, Kind::E | Kind::ELow));
    let n_total = BigInt::from(p.size());
    if g1.r != 0 || g2.r != 0 {
        return BigRational::zero();
    }
    let (i, j, h, l) = (g1.i, g1.j, g2.i, g2.j);
    if i == j && h == l {
        let diag = if i == h { BigInt::from(p.s_weight(i as usize)) } else { BigInt::zero() };
        let m = BigInt::from(p.lambda(i as usize).min(p.lambda(h as usize)));
        return BigRational::new(diag - m, n_total);
    }
    if i == l && j == h && i != j {
        return BigRational::new(BigInt::from(p.s_weight(i as usize)), n_total);
    }
    BigRational::zero()
}

/// The constant alpha_i = -lambda_i + ((k+N)/N) (lambda_1 + ... + lambda_{i-1}
/// + (n-i+1) lambda_i) appearing on the diagonal of the determinant matrix.
pub fn alpha(p: &Pyramid, i: usize) -> Scalar {
    let s = BigInt::from(p.s_weight(i));
    let n_total = BigInt::from(p.size());
    let slope = BigRational::new(s.clone(), n_total);
    let intercept = BigRational::from(s - BigInt::from(p.lambda(i)));
    &Scalar::term(1, slope) + &Scalar::constant(intercept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(pairs: &[(u32, i64, i64)]) -> Scalar {
        let mut out = Scalar::zero();
        for &(e, n, d) in pairs {
            out += &Scalar::term(e, rat(n, d));
        }
        out
    }

    #[test]
    fn display_matches_canonical_forms() {
        assert_eq!(s(&[(1, 2, 3), (0, 1, 1)]).to_string(), "(2/3)k + 1");
        assert_eq!(s(&[(2, 1, 1), (0, -4, 1)]).to_string(), "k^2 - 4");
        assert_eq!(s(&[(1, -1, 1)]).to_string(), "-k");
        assert_eq!(Scalar::zero().to_string(), "0");
        assert_eq!(s(&[(0, -2, 3)]).to_string(), "-2/3");
        assert_eq!(s(&[(1, 3, 1)]).to_string(), "3k");
    }

    #[test]
    fn cancellation_removes_zero_terms() {
        let a = s(&[(1, 1, 2), (0, 5, 1)]);
        let b = s(&[(1, -1, 2), (0, 1, 1)]);
        let sum = &a + &b;
        assert_eq!(sum, Scalar::from_int(6));
        assert_eq!(sum.degree(), Some(0));
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn json_round_trip_and_order() {
        let a = s(&[(2, 7, 2), (0, -1, 3)]);
        let v = a.to_json();
        assert_eq!(v.to_string(), "[[2,7,2],[0,-1,3]]");
        assert_eq!(Scalar::from_json(&v).unwrap(), a);
        assert!(Scalar::from_json(&serde_json::json!([[0, 1, 0]])).is_err());
    }

    #[test]
    fn evaluate_at_rational_points() {
        let a = s(&[(2, 1, 1), (1, -3, 2), (0, 1, 1)]);
        assert_eq!(a.evaluate(&rat(2, 1)), rat(2, 1));
        assert_eq!(a.evaluate(&rat(1, 2)), rat(1, 2));
    }

    #[test]
    fn form_constants_on_2_3_4() {
        let p = Pyramid::parse("2,3,4").unwrap();
        let e = |i, j, r| GenIndex { kind: Kind::E, i, j, r };
        assert_eq!(form(&p, &e(1, 1, 0), &e(1, 1, 0)), rat(4, 9));
        assert_eq!(form(&p, &e(1, 1, 0), &e(2, 2, 0)), rat(-2, 9));
        assert_eq!(form(&p, &e(1, 2, 1), &e(2, 1, 0)), rat(0, 1));
        assert_eq!(form(&p, &e(2, 2, 1), &e(2, 2, 1)), rat(0, 1));
    }

    #[test]
    fn form_off_diagonal_pair_equal_rows() {
        let p = Pyramid::parse("2,2").unwrap();
        let e = |i, j, r| GenIndex { kind: Kind::E, i, j, r };
        // q_1 + q_2 = 2 + 2 over N = 4.
        assert_eq!(form(&p, &e(1, 2, 0), &e(2, 1, 0)), rat(1, 1));
        assert_eq!(form(&p, &e(2, 1, 0), &e(1, 2, 0)), rat(1, 1));
    }

    #[test]
    fn alpha_examples() {
        let p = Pyramid::parse("1,2").unwrap();
        assert_eq!(alpha(&p, 1).to_string(), "(2/3)k + 1");
        assert_eq!(alpha(&p, 2).to_string(), "k + 1");
        let ones = Pyramid::parse("1,1,1").unwrap();
        for i in 1..=3 {
            assert_eq!(alpha(&ones, i), s(&[(1, 1, 1), (0, 2, 1)]));
        }
    }

    proptest! {
        #[test]
        fn ring_axioms(
            xa in proptest::collection::vec((0u32..4, -6i64..6, 1i64..4), 0..4),
            xb in proptest::collection::vec((0u32..4, -6i64..6, 1i64..4), 0..4),
            xc in proptest::collection::vec((0u32..4, -6i64..6, 1i64..4), 0..4),
        ) {
            let a = s(&xa);
            let b = s(&xb);
            let c = s(&xc);
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a + &Scalar::zero(), a.clone());
            prop_assert_eq!(&a * &Scalar::one(), a.clone());
        }

        #[test]
        fn evaluation_is_a_homomorphism(
            xa in proptest::collection::vec((0u32..4, -6i64..6, 1i64..4), 0..4),
            xb in proptest::collection::vec((0u32..4, -6i64..6, 1i64..4), 0..4),
            num in -8i64..8, den in 1i64..5,
        ) {
            let a = s(&xa);
            let b = s(&xb);
            let at = rat(num, den);
            prop_assert_eq!((&a + &b).evaluate(&at), a.evaluate(&at) + b.evaluate(&at));
            prop_assert_eq!((&a * &b).evaluate(&at), a.evaluate(&at) * b.evaluate(&at));
        }

        #[test]
        fn json_round_trip(
            xa in proptest::collection::vec((0u32..5, -9i64..9, 1i64..5), 0..5),
        ) {
            let a = s(&xa);
            prop_assert_eq!(Scalar::from_json(&a.to_json()).unwrap(), a);
        }
    }
}
