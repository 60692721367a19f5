//! Sparse multivariate polynomials and rational functions over ℚ.
//!
//! Every object in the engine (coefficient-field elements, differential
//! polynomials, fiber coordinates of a prolongation) is a polynomial or a
//! fraction of polynomials in [`Var`]s. A variable is either a generator of
//! the coefficient field or a derivative `θx` of a differential
//! indeterminate. The derived ordering on [`Var`] is the orderly ranking,
//! so the leading variable of a polynomial is its leader.

mod gcd;
mod rat;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use gcd::{div_exact, gcd};
pub use rat::{Rat, RatError};

/// A named symbol. `idx` fixes its position in rankings and printing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Symbol {
    idx: u32,
    name: Arc<str>,
}

impl Symbol {
    pub fn new(idx: u32, name: impl AsRef<str>) -> Self {
        Symbol {
            idx,
            name: Arc::from(name.as_ref()),
        }
    }

    pub fn idx(&self) -> u32 {
        self.idx
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.idx
            .cmp(&other.idx)
            .then_with(|| self.name.cmp(&other.name))
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// A multi-index over the declared derivations: `ops[k]` is the power of
/// derivation `k`. Trailing zeros are trimmed so equal operators compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u16>);

impl MultiIndex {
    pub fn identity() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn from_vec(mut v: Vec<u16>) -> Self {
        while v.last() == Some(&0) {
            v.pop();
        }
        MultiIndex(v)
    }

    pub fn unit(k: usize) -> Self {
        let mut v = vec![0; k + 1];
        v[k] = 1;
        MultiIndex(v)
    }

    pub fn get(&self, k: usize) -> u16 {
        self.0.get(k).copied().unwrap_or(0)
    }

    pub fn order(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of stored entries (derivations beyond this have exponent zero).
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bump(&self, k: usize) -> Self {
        let mut v = self.0.clone();
        if v.len() <= k {
            v.resize(k + 1, 0);
        }
        v[k] += 1;
        MultiIndex(v)
    }

    pub fn compose(&self, other: &MultiIndex) -> Self {
        let n = self.0.len().max(other.0.len());
        MultiIndex::from_vec((0..n).map(|k| self.get(k) + other.get(k)).collect())
    }

    /// `self` divides `other` componentwise (other is a derivative of self).
    pub fn divides(&self, other: &MultiIndex) -> bool {
        (0..self.0.len()).all(|k| self.get(k) <= other.get(k))
    }

    /// `other - self`, assuming `self.divides(other)`.
    pub fn quotient(&self, other: &MultiIndex) -> MultiIndex {
        let n = other.0.len().max(self.0.len());
        MultiIndex::from_vec((0..n).map(|k| other.get(k) - self.get(k)).collect())
    }

    pub fn entries(&self) -> &[u16] {
        &self.0
    }

    /// Iterate `(derivation, power)` over nonzero entries.
    pub fn powers(&self) -> impl Iterator<Item = (usize, u16)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(k, &e)| (k, e))
    }
}

impl Ord for MultiIndex {
    /// Graded by order, ties broken reverse-lexicographically: the operator
    /// with the larger power of the last-declared derivation is greater.
    fn cmp(&self, other: &Self) -> Ordering {
        self.order().cmp(&other.order()).then_with(|| {
            let n = self.0.len().max(other.0.len());
            for k in (0..n).rev() {
                match self.get(k).cmp(&other.get(k)) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A derivative `θx` of a differential indeterminate `x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DerivativeVar {
    pub indet: Symbol,
    pub ops: MultiIndex,
}

impl DerivativeVar {
    pub fn new(indet: Symbol, ops: MultiIndex) -> Self {
        DerivativeVar { indet, ops }
    }

    pub fn base(indet: Symbol) -> Self {
        DerivativeVar {
            indet,
            ops: MultiIndex::identity(),
        }
    }

    pub fn order(&self) -> u32 {
        self.ops.order()
    }

    pub fn derive(&self, k: usize) -> Self {
        DerivativeVar {
            indet: self.indet.clone(),
            ops: self.ops.bump(k),
        }
    }
}

/// Field-independent form, `x[e1,e2,…]`; use `expr::format_der` for the
/// session syntax.
impl fmt::Display for DerivativeVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ops.is_identity() {
            return write!(f, "{}", self.indet);
        }
        let parts: Vec<String> = self.ops.entries().iter().map(|e| e.to_string()).collect();
        write!(f, "{}[{}]", self.indet, parts.join(","))
    }
}

impl Ord for DerivativeVar {
    /// Orderly ranking: total order first, then reverse-lex on the
    /// multi-index, then the indeterminate's declaration index.
    fn cmp(&self, other: &Self) -> Ordering {
        self.ops
            .cmp(&other.ops)
            .then_with(|| self.indet.cmp(&other.indet))
    }
}

impl PartialOrd for DerivativeVar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An algebraic variable. Field generators rank below every derivative.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Gen(Symbol),
    Der(DerivativeVar),
}

impl Var {
    pub fn indet(sym: Symbol) -> Self {
        Var::Der(DerivativeVar::base(sym))
    }

    pub fn as_der(&self) -> Option<&DerivativeVar> {
        match self {
            Var::Der(d) => Some(d),
            Var::Gen(_) => None,
        }
    }

    pub fn is_gen(&self) -> bool {
        matches!(self, Var::Gen(_))
    }
}

/// Power product, stored as `(var, exp)` sorted by decreasing variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var, e: u32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(v, e)])
        }
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn exponent(&self, v: &Var) -> u32 {
        self.0
            .iter()
            .find(|(w, _)| w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (v, e) in &self.0 {
            let f = if j < other.0.len() && &other.0[j].0 == v {
                j += 1;
                other.0[j - 1].1
            } else {
                0
            };
            if f > *e {
                return None;
            }
            if e > &f {
                out.push((v.clone(), e - f));
            }
        }
        if j != other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Componentwise minimum of exponents.
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .filter_map(|(v, e)| {
                    let f = other.exponent(v);
                    (f > 0).then(|| (v.clone(), (*e).min(f)))
                })
                .collect(),
        )
    }

    /// Drop `v` entirely, returning its exponent and the rest.
    pub fn split_off(&self, v: &Var) -> (u32, Monomial) {
        let mut e = 0;
        let rest = self
            .0
            .iter()
            .filter(|(w, f)| {
                if w == v {
                    e = *f;
                    false
                } else {
                    true
                }
            })
            .cloned()
            .collect();
        (e, Monomial(rest))
    }
}

impl Ord for Monomial {
    /// Graded lexicographic with variables compared from the largest down.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            for (a, b) in self.0.iter().zip(other.0.iter()) {
                match a.0.cmp(&b.0) {
                    Ordering::Equal => match a.1.cmp(&b.1) {
                        Ordering::Equal => continue,
                        o => return o,
                    },
                    o => return o,
                }
            }
            self.0.len().cmp(&other.0.len())
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A sparse polynomial with rational coefficients. No zero coefficients are stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn from_int(n: i64) -> Self {
        Poly::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn var(v: Var) -> Self {
        Poly::term(Monomial::var(v, 1), BigRational::one())
    }

    pub fn term(m: Monomial, c: BigRational) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.iter().all(|(m, c)| m.is_one() && c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> BigRational {
        self.leading_term()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &BigRational) -> Poly {
        let mut out = Poly::zero();
        for (n, d) in &self.terms {
            out.add_term(n.mul(m), d * c);
        }
        out
    }

    /// Divide by the leading coefficient; zero stays zero.
    pub fn monic(&self) -> Poly {
        match self.leading_term() {
            None => Poly::zero(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(v, _)| v.clone()))
            .collect()
    }

    pub fn max_var(&self) -> Option<Var> {
        self.vars().into_iter().next_back()
    }

    /// Highest-ranked derivative variable (the leader); generators are skipped.
    pub fn leader(&self) -> Option<DerivativeVar> {
        self.vars()
            .into_iter()
            .rev()
            .find_map(|v| v.as_der().cloned())
    }

    pub fn der_vars(&self) -> BTreeSet<DerivativeVar> {
        self.vars()
            .into_iter()
            .filter_map(|v| v.as_der().cloned())
            .collect()
    }

    pub fn has_der_vars(&self) -> bool {
        self.terms
            .keys()
            .any(|m| m.0.iter().any(|(v, _)| !v.is_gen()))
    }

    pub fn degree_in(&self, v: &Var) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Coefficient of `v^d`, as a polynomial in the remaining variables.
    pub fn coeff_of(&self, v: &Var, d: u32) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(v);
            if e == d {
                out.add_term(rest, c.clone());
            }
        }
        out
    }

    /// Coefficients in `v`, indexed by degree.
    pub fn univariate(&self, v: &Var) -> Vec<Poly> {
        let mut out = vec![Poly::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(v);
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    pub fn from_univariate(coeffs: &[Poly], v: &Var) -> Poly {
        let mut out = Poly::zero();
        for (d, c) in coeffs.iter().enumerate() {
            let m = Monomial::var(v.clone(), d as u32);
            for (n, a) in &c.terms {
                out.add_term(n.mul(&m), a.clone());
            }
        }
        out
    }

    pub fn partial(&self, v: &Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(v);
            if e > 0 {
                let m2 = rest.mul(&Monomial::var(v.clone(), e - 1));
                out.add_term(m2, c * BigRational::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    /// Replace variables by polynomials, simultaneously. Unmapped variables stay.
    pub fn substitute_poly(&self, map: &BTreeMap<Var, Poly>) -> Poly {
        let mut cache: BTreeMap<(Var, u32), Poly> = BTreeMap::new();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            let mut kept = Monomial::one();
            for (v, e) in &m.0 {
                match map.get(v) {
                    Some(img) => {
                        let p = cache
                            .entry((v.clone(), *e))
                            .or_insert_with(|| img.pow(*e))
                            .clone();
                        term = &term * &p;
                    }
                    None => kept = kept.mul(&Monomial::var(v.clone(), *e)),
                }
            }
            out = &out + &term.mul_monomial(&kept, &BigRational::one());
        }
        out
    }

    /// Integer content-free, positive-leading normalization of the numeric part.
    pub fn numeric_primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut g = BigInt::zero();
        let mut l = BigInt::one();
        for c in self.terms.values() {
            g = num_integer::Integer::gcd(&g, c.numer());
            l = num_integer::Integer::lcm(&l, c.denom());
        }
        let mut s = BigRational::new(l, g);
        if self.leading_coeff().is_negative() {
            s = -s;
        }
        self.scale(&s)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let (big, small) = if self.terms.len() >= rhs.terms.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (n, d) in &rhs.terms {
                out.add_term(m.mul(n), c * d);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                (&self).$f(&rhs)
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
