use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::{div_exact, gcd, Poly, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RatError {
    #[error("division by zero")]
    DivisionByZero,
}

/// A reduced fraction of polynomials: `gcd(num, den) = 1` and `den` has
/// leading coefficient one. Equality of values is structural equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rat {
    num: Poly,
    den: Poly,
}

impl Default for Rat {
    fn default() -> Self {
        Rat::zero()
    }
}

impl Rat {
    pub fn zero() -> Self {
        Rat {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        Rat::from_poly(Poly::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rat::from_poly(Poly::from_int(n))
    }

    pub fn from_rational(q: BigRational) -> Self {
        Rat::from_poly(Poly::constant(q))
    }

    pub fn var(v: Var) -> Self {
        Rat::from_poly(Poly::var(v))
    }

    pub fn from_poly(p: Poly) -> Self {
        Rat {
            num: p,
            den: Poly::one(),
        }
    }

    /// Build and normalize `num / den`.
    pub fn new(num: Poly, den: Poly) -> Result<Self, RatError> {
        if den.is_zero() {
            return Err(RatError::DivisionByZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Rat::zero();
        }
        let (num, den) = if den.is_constant() {
            (num, den)
        } else {
            let g = gcd(&num, &den);
            if g.is_one() {
                (num, den)
            } else {
                (
                    div_exact(&num, &g).expect("gcd divides"),
                    div_exact(&den, &g).expect("gcd divides"),
                )
            }
        };
        Self::make_monic(num, den)
    }

    fn make_monic(num: Poly, den: Poly) -> Self {
        let lc = den.leading_coeff();
        if lc.is_one() {
            Rat { num, den }
        } else {
            let s = lc.recip();
            Rat {
                num: num.scale(&s),
                den: den.scale(&s),
            }
        }
    }

    /// Re-normalize; idempotent on values built through this API.
    pub fn normalize(&self) -> Self {
        Self::reduce(self.num.clone(), self.den.clone())
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn into_parts(self) -> (Poly, Poly) {
        (self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        self.is_poly().then_some(&self.num)
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        if self.den.is_one() {
            self.num.constant_value()
        } else {
            None
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v
    }

    pub fn has_der_vars(&self) -> bool {
        self.num.has_der_vars() || self.den.has_der_vars()
    }

    pub fn inv(&self) -> Result<Rat, RatError> {
        if self.is_zero() {
            return Err(RatError::DivisionByZero);
        }
        Ok(Self::make_monic(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, rhs: &Rat) -> Result<Rat, RatError> {
        Ok(self * &rhs.inv()?)
    }

    pub fn pow(&self, e: i32) -> Result<Rat, RatError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let k = e.unsigned_abs();
        Ok(Rat {
            num: base.num.pow(k),
            den: base.den.pow(k),
        }
        .renormalized())
    }

    fn renormalized(self) -> Rat {
        Self::make_monic(self.num, self.den)
    }

    pub fn scale(&self, c: &BigRational) -> Rat {
        if c.is_zero() {
            return Rat::zero();
        }
        Rat {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    /// Formal partial derivative by the quotient rule.
    pub fn partial(&self, v: &Var) -> Rat {
        let dn = self.num.partial(v);
        let dd = self.den.partial(v);
        if dd.is_zero() {
            return Self::reduce(dn, self.den.clone());
        }
        let num = &(&dn * &self.den) - &(&self.num * &dd);
        Self::reduce(num, self.den.pow(2))
    }

    /// Simultaneous substitution of variables by fractions. Denominators are
    /// cleared once and the result normalized a single time.
    pub fn substitute(&self, map: &BTreeMap<Var, Rat>) -> Result<Rat, RatError> {
        let n = eval_poly(&self.num, map);
        let d = eval_poly(&self.den, map);
        let (nn, nd) = n.into_parts();
        let (dn, dd) = d.into_parts();
        if dn.is_zero() {
            return Err(RatError::DivisionByZero);
        }
        Ok(Self::reduce(&nn * &dd, &nd * &dn))
    }
}

/// Evaluate a polynomial at fractional images over a common denominator.
fn eval_poly(p: &Poly, map: &BTreeMap<Var, Rat>) -> Rat {
    // max power of each substituted variable
    let mut maxe: BTreeMap<&Var, u32> = BTreeMap::new();
    for (m, _) in p.terms() {
        for (v, e) in m.factors() {
            if let Some(img) = map.get(v) {
                if !img.den.is_one() {
                    let slot = maxe.entry(v).or_insert(0);
                    *slot = (*slot).max(*e);
                }
            }
        }
    }
    let mut pow_cache: BTreeMap<(&Var, u32, bool), Poly> = BTreeMap::new();
    let mut num = Poly::zero();
    for (m, c) in p.terms() {
        let mut term = Poly::constant(c.clone());
        let mut kept = super::Monomial::one();
        let mut seen: BTreeSet<&Var> = BTreeSet::new();
        for (v, e) in m.factors() {
            match map.get(v) {
                Some(img) => {
                    seen.insert(v);
                    let np = pow_cache
                        .entry((v, *e, true))
                        .or_insert_with(|| img.num.pow(*e))
                        .clone();
                    term = &term * &np;
                    if let Some(&me) = maxe.get(v) {
                        let dp = pow_cache
                            .entry((v, me - e, false))
                            .or_insert_with(|| img.den.pow(me - e))
                            .clone();
                        term = &term * &dp;
                    }
                }
                None => kept = kept.mul(&super::Monomial::var(v.clone(), *e)),
            }
        }
        for (v, &me) in &maxe {
            if !seen.contains(v) {
                let dp = pow_cache
                    .entry((v, me, false))
                    .or_insert_with(|| map[*v].den.pow(me))
                    .clone();
                term = &term * &dp;
            }
        }
        num = &num + &term.mul_monomial(&kept, &BigRational::one());
    }
    let mut den = Poly::one();
    for (v, &me) in &maxe {
        den = &den * &map[*v].den.pow(me);
    }
    Rat { num, den }
}

impl From<Poly> for Rat {
    fn from(p: Poly) -> Self {
        Rat::from_poly(p)
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_int(n)
    }
}

impl Add for &Rat {
    type Output = Rat;
    fn add(self, rhs: &Rat) -> Rat {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return Rat::reduce(&self.num + &rhs.num, self.den.clone());
        }
        let g = gcd(&self.den, &rhs.den);
        let a = div_exact(&self.den, &g).expect("gcd divides");
        let b = div_exact(&rhs.den, &g).expect("gcd divides");
        let num = &(&self.num * &b) + &(&rhs.num * &a);
        Rat::reduce(num, &a * &rhs.den)
    }
}

impl Sub for &Rat {
    type Output = Rat;
    fn sub(self, rhs: &Rat) -> Rat {
        self + &(-rhs)
    }
}

impl Mul for &Rat {
    type Output = Rat;
    fn mul(self, rhs: &Rat) -> Rat {
        if self.is_zero() || rhs.is_zero() {
            return Rat::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return Rat::from_poly(&self.num * &rhs.num);
        }
        let g1 = gcd(&self.num, &rhs.den);
        let g2 = gcd(&rhs.num, &self.den);
        let n1 = div_exact(&self.num, &g1).expect("gcd divides");
        let d2 = div_exact(&rhs.den, &g1).expect("gcd divides");
        let n2 = div_exact(&rhs.num, &g2).expect("gcd divides");
        let d1 = div_exact(&self.den, &g2).expect("gcd divides");
        Rat::make_monic(&n1 * &n2, &d1 * &d2)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Add for Rat {
    type Output = Rat;
    fn add(self, rhs: Rat) -> Rat {
        &self + &rhs
    }
}

impl Sub for Rat {
    type Output = Rat;
    fn sub(self, rhs: Rat) -> Rat {
        &self - &rhs
    }
}

impl Mul for Rat {
    type Output = Rat;
    fn mul(self, rhs: Rat) -> Rat {
        &self * &rhs
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        -&self
    }
}

impl std::iter::Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |a, b| &a + &b)
    }
}
