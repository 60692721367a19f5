//! Ritt reduction modulo an autoreduced set, with replayable certificates.
//!
//! A reduction of `f` by `A = {A_1, …, A_p}` produces the identity
//!
//! ```text
//! unit · Π I_k^{a_k} S_k^{b_k} · f  =  Σ c_{k,θ} · θA_k  +  r
//! ```
//!
//! where `I_k`, `S_k` are initial and separant of `A_k`, `unit` is a nonzero
//! element of the coefficient field (only different from 1 when the
//! derivation table has denominators) and `r` is reduced with respect to
//! `A`. Every certificate is replayed before it is returned.
//!
//! Derivative operators are taken from whatever derivations occur in the
//! input, so for inputs in `K{x}_Δ` this is reduction by the Δ-ideal.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::coeffield::FieldDescriptor;
use crate::diffpoly::{leader_initial_separant, LeaderData, Ranking};
use crate::poly::{div_exact, DerivativeVar, Monomial, MultiIndex, Poly, Rat, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("element {0} has no leader (it lies in the coefficient field)")]
    ConstantElement(usize),
    #[error("set is not autoreduced: {0}")]
    NotAutoreduced(AutoreduceWitness),
    #[error("reduction certificate failed to replay")]
    CertificateReplay,
}

/// Two elements of a candidate set where the second is not reduced with
/// respect to the first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutoreduceWitness {
    pub reducer: usize,
    pub reduced: usize,
    /// The offending derivative in `reduced`.
    pub variable: DerivativeVar,
}

impl std::fmt::Display for AutoreduceWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "element {} is reducible by element {} at {}",
            self.reduced, self.reducer, self.variable
        )
    }
}

/// Pairwise reducedness test. Indices in the witness refer to the input.
pub fn is_autoreduced(elements: &[Poly], rk: Ranking) -> Result<(), ReduceError> {
    let data = leader_data(elements, rk)?;
    for (i, di) in data.iter().enumerate() {
        for (j, g) in elements.iter().enumerate() {
            if i == j {
                continue;
            }
            if let Some(v) = offending_var(g, std::slice::from_ref(di)).map(|(v, _)| v) {
                return Err(ReduceError::NotAutoreduced(AutoreduceWitness {
                    reducer: i,
                    reduced: j,
                    variable: v,
                }));
            }
        }
    }
    Ok(())
}

fn leader_data(elements: &[Poly], rk: Ranking) -> Result<Vec<LeaderData>, ReduceError> {
    elements
        .iter()
        .enumerate()
        .map(|(i, e)| leader_initial_separant(e, rk).map_err(|_| ReduceError::ConstantElement(i)))
        .collect()
}

/// Highest derivative of `g` that some element can reduce, with the index
/// of that element.
fn offending_var(g: &Poly, data: &[LeaderData]) -> Option<(DerivativeVar, usize)> {
    for v in g.der_vars().into_iter().rev() {
        let mut best: Option<usize> = None;
        for (k, d) in data.iter().enumerate() {
            if d.leader.indet != v.indet || !d.leader.ops.divides(&v.ops) {
                continue;
            }
            let proper = d.leader.ops != v.ops;
            let applies = proper || g.degree_in(&Var::Der(v.clone())) >= d.degree;
            if applies && best.is_none_or(|b| data[b].leader < d.leader) {
                best = Some(k);
            }
        }
        if let Some(k) = best {
            return Some((v, k));
        }
    }
    None
}

/// A characteristic-set presentation, sorted by increasing leader.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutoreducedSet {
    elements: Vec<Poly>,
    data: Vec<LeaderData>,
    ranking: Ranking,
    prime: bool,
}

impl AutoreducedSet {
    /// Validates and sorts. `prime` records the user's assertion that the
    /// set is a characteristic set of a prime differential ideal.
    pub fn new(elements: Vec<Poly>, prime: bool) -> Result<Self, ReduceError> {
        let ranking = Ranking::Orderly;
        is_autoreduced(&elements, ranking)?;
        let data = leader_data(&elements, ranking)?;
        let mut pairs: Vec<(Poly, LeaderData)> = elements.into_iter().zip(data).collect();
        pairs.sort_by(|a, b| ranking.compare(&a.1.leader, &b.1.leader));
        let (elements, data) = pairs.into_iter().unzip();
        Ok(AutoreducedSet {
            elements,
            data,
            ranking,
            prime,
        })
    }

    pub fn empty(prime: bool) -> Self {
        AutoreducedSet {
            elements: Vec::new(),
            data: Vec::new(),
            ranking: Ranking::Orderly,
            prime,
        }
    }

    /// Union of two sets over disjoint indeterminates (a product presentation).
    pub fn union(&self, other: &AutoreducedSet) -> Result<Self, ReduceError> {
        let mut all = self.elements.clone();
        all.extend(other.elements.iter().cloned());
        AutoreducedSet::new(all, self.prime && other.prime)
    }

    pub fn elements(&self) -> &[Poly] {
        &self.elements
    }

    pub fn leaders(&self) -> impl Iterator<Item = &DerivativeVar> {
        self.data.iter().map(|d| &d.leader)
    }

    pub fn leader_data(&self) -> &[LeaderData] {
        &self.data
    }

    pub fn is_prime(&self) -> bool {
        self.prime
    }

    pub fn with_prime(mut self, prime: bool) -> Self {
        self.prime = prime;
        self
    }

    pub fn ranking(&self) -> Ranking {
        self.ranking
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `g` contains no proper derivative of a leader and no leader at or
    /// above its degree in the set.
    pub fn is_reduced(&self, g: &Poly) -> bool {
        offending_var(g, &self.data).is_none()
    }
}

/// The exact identity produced by a reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionCertificate {
    /// `(a_k, b_k)` per element, in the set's order.
    pub exponents: Vec<(u32, u32)>,
    /// Field element absorbing denominators of the derivation table.
    pub unit: Poly,
    /// `(element index, θ) ↦ cofactor`.
    pub combination: BTreeMap<(usize, MultiIndex), Poly>,
    pub remainder: Poly,
}

impl ReductionCertificate {
    fn trivial(p: usize, f: &Poly) -> Self {
        ReductionCertificate {
            exponents: vec![(0, 0); p],
            unit: Poly::one(),
            combination: BTreeMap::new(),
            remainder: f.clone(),
        }
    }

    /// `unit · Π I_k^{a_k} S_k^{b_k}`.
    pub fn multiplier(&self, set: &AutoreducedSet) -> Poly {
        let mut h = self.unit.clone();
        for ((a, b), d) in self.exponents.iter().zip(&set.data) {
            if *a > 0 {
                h = &h * &d.initial.pow(*a);
            }
            if *b > 0 {
                h = &h * &d.separant.pow(*b);
            }
        }
        h
    }

    /// Recompute both sides of the identity from scratch.
    pub fn replay(&self, field: &FieldDescriptor, f: &Poly, set: &AutoreducedSet) -> bool {
        if self.exponents.len() != set.len() || self.unit.is_zero() {
            return false;
        }
        let lhs = Rat::from_poly(&self.multiplier(set) * f);
        let mut rhs = Rat::from_poly(self.remainder.clone());
        for ((k, theta), c) in &self.combination {
            let Some(a) = set.elements.get(*k) else {
                return false;
            };
            let d = field.derive_multi(theta, &Rat::from_poly(a.clone()));
            rhs = &rhs + &(&Rat::from_poly(c.clone()) * &d);
        }
        (&lhs - &rhs).is_zero()
    }

    pub fn is_trivial(&self) -> bool {
        self.combination.is_empty()
    }
}

struct Reducer<'a> {
    field: &'a FieldDescriptor,
    set: &'a AutoreducedSet,
    cert: ReductionCertificate,
}

impl Reducer<'_> {
    /// Multiply the whole identity by `m`.
    fn scale(&mut self, m: &Poly) {
        self.cert.remainder = &self.cert.remainder * m;
        for c in self.cert.combination.values_mut() {
            *c = &*c * m;
        }
    }

    /// `θA_k` as `(numerator, field denominator)`.
    fn derived_element(&self, k: usize, theta: &MultiIndex) -> (Poly, Poly) {
        let a = Rat::from_poly(self.set.elements[k].clone());
        let d = self.field.derive_multi(theta, &a);
        d.into_parts()
    }

    fn subtract(&mut self, k: usize, theta: MultiIndex, c: Poly, value: &Poly) {
        self.cert.remainder = &self.cert.remainder - &(&c * value);
        let slot = self
            .cert
            .combination
            .entry((k, theta))
            .or_insert_with(Poly::zero);
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.cert.combination.retain(|_, v| !v.is_zero());
        }
    }

    fn run(&mut self) {
        while let Some((v, k)) = offending_var(&self.cert.remainder, &self.set.data) {
            let var = Var::Der(v.clone());
            let r = &self.cert.remainder;
            let deg = r.degree_in(&var);
            let lc = r.coeff_of(&var, deg);
            let data = &self.set.data[k];
            if data.leader != v {
                // r ← den·S_k·r − lc·v^{deg−1}·(den·θA_k)
                let theta = data.leader.ops.quotient(&v.ops);
                let (num, den) = self.derived_element(k, &theta);
                let mult = &data.separant * &den;
                let vpow = Monomial::var(var, deg - 1);
                let (shift, cof) = match div_exact(&lc, &mult) {
                    // lc already carries the multiplier: no new factor in H
                    Some(q) => {
                        let shift = q.mul_monomial(&vpow, &one());
                        let cof = &shift * &den;
                        (shift, cof)
                    }
                    None => {
                        let shift = lc.mul_monomial(&vpow, &one());
                        let cof = &shift * &den;
                        self.scale(&mult);
                        self.cert.unit = &self.cert.unit * &den;
                        self.cert.exponents[k].1 += 1;
                        (shift, cof)
                    }
                };
                // cofactor on θA_k is lc·v^{deg−1}·den; num = den·θA_k
                self.cert.remainder = &self.cert.remainder - &(&shift * &num);
                let slot = self
                    .cert
                    .combination
                    .entry((k, theta))
                    .or_insert_with(Poly::zero);
                *slot = &*slot + &cof;
                self.cert.combination.retain(|_, c| !c.is_zero());
            } else {
                // r ← I_k·r − lc·v^{deg−e}·A_k
                let initial = data.initial.clone();
                let vpow = Monomial::var(var, deg - data.degree);
                let element = self.set.elements[k].clone();
                let shift = match div_exact(&lc, &initial) {
                    Some(q) => q.mul_monomial(&vpow, &one()),
                    None => {
                        self.scale(&initial);
                        self.cert.exponents[k].0 += 1;
                        lc.mul_monomial(&vpow, &one())
                    }
                };
                self.subtract(k, MultiIndex::identity(), shift, &element);
            }
        }
    }
}

fn one() -> num_rational::BigRational {
    num_rational::BigRational::from_integer(1.into())
}

/// Reduce `f` by the set. The certificate is replayed before returning.
pub fn ritt_reduce(
    field: &FieldDescriptor,
    f: &Poly,
    set: &AutoreducedSet,
) -> Result<ReductionCertificate, ReduceError> {
    let mut red = Reducer {
        field,
        set,
        cert: ReductionCertificate::trivial(set.len(), f),
    };
    red.run();
    let cert = red.cert;
    if !cert.replay(field, f, set) {
        return Err(ReduceError::CertificateReplay);
    }
    Ok(cert)
}

/// Outcome of an ideal-membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Membership {
    InIdeal,
    NotInIdeal,
    Unknown,
}

/// Reduce the numerator of `f` and read off a verdict. A nonzero remainder
/// only proves non-membership when the set is flagged prime.
pub fn membership_verdict(
    field: &FieldDescriptor,
    f: &Rat,
    set: &AutoreducedSet,
) -> Result<(Membership, ReductionCertificate), ReduceError> {
    let cert = ritt_reduce(field, f.numer(), set)?;
    let verdict = if cert.remainder.is_zero() {
        Membership::InIdeal
    } else if set.is_prime() {
        Membership::NotInIdeal
    } else {
        Membership::Unknown
    };
    Ok((verdict, cert))
}
