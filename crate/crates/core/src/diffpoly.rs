//! Differential polynomials and fractions over a [`FieldDescriptor`].
//!
//! The kernel types already carry everything needed: a differential
//! polynomial is a [`Poly`] whose variables may be derivatives `θx`, and a
//! differential rational function is a [`Rat`]. This module adds the
//! operations that depend on the derivation table.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::coeffield::FieldDescriptor;
use crate::poly::{DerivativeVar, MultiIndex, Poly, Rat, RatError, Symbol, Var};

pub type DiffPolynomial = Poly;
pub type DiffRational = Rat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("unknown derivation `{0}`")]
    UnknownDerivation(String),
    #[error("substitution does not cover indeterminate `{0}`")]
    Unmapped(String),
    #[error("denominator vanishes under substitution")]
    DivisionByZero,
    #[error("polynomial has no derivative variable")]
    ConstantPolynomial,
}

impl From<RatError> for DiffError {
    fn from(_: RatError) -> Self {
        DiffError::DivisionByZero
    }
}

/// Rankings on derivative variables. Only the orderly ranking exists:
/// total order first, then the multi-index compared from the last
/// derivation backwards, then the indeterminate.
///
/// With two derivations `δ1, δ2` the order-2 derivatives of `x` rank
/// `δ1²x < δ1δ2x < δ2²x`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Ranking {
    #[default]
    Orderly,
}

impl Ranking {
    pub fn compare(&self, u: &DerivativeVar, v: &DerivativeVar) -> Ordering {
        match self {
            Ranking::Orderly => u.cmp(v),
        }
    }
}

/// Formal total derivative by derivation name.
pub fn derive(field: &FieldDescriptor, name: &str, f: &Rat) -> Result<Rat, DiffError> {
    let k = field
        .derivation_index(name)
        .ok_or_else(|| DiffError::UnknownDerivation(name.to_string()))?;
    Ok(field.derive(k, f))
}

/// `∂f/∂v`, treating every derivative variable as independent.
pub fn partial(f: &Poly, v: &DerivativeVar) -> Poly {
    f.partial(&Var::Der(v.clone()))
}

/// Replace each indeterminate `x` by `σ(x)` and each derivative `θx` by
/// the formal derivative `θ(σ(x))`.
pub fn substitute(
    field: &FieldDescriptor,
    f: &Rat,
    sigma: &BTreeMap<Symbol, Rat>,
) -> Result<Rat, DiffError> {
    let mut memo: BTreeMap<DerivativeVar, Rat> = BTreeMap::new();
    let mut map: BTreeMap<Var, Rat> = BTreeMap::new();
    for v in f.vars() {
        if let Var::Der(d) = &v {
            let img = derivative_image(field, d, sigma, &mut memo)?;
            map.insert(v, img);
        }
    }
    Ok(f.substitute(&map)?)
}

fn derivative_image(
    field: &FieldDescriptor,
    d: &DerivativeVar,
    sigma: &BTreeMap<Symbol, Rat>,
    memo: &mut BTreeMap<DerivativeVar, Rat>,
) -> Result<Rat, DiffError> {
    if let Some(r) = memo.get(d) {
        return Ok(r.clone());
    }
    let img = match d.ops.powers().next() {
        None => sigma
            .get(&d.indet)
            .cloned()
            .ok_or_else(|| DiffError::Unmapped(d.indet.name().to_string()))?,
        Some((k, _)) => {
            let lower = DerivativeVar::new(d.indet.clone(), MultiIndex::unit(k).quotient(&d.ops));
            let base = derivative_image(field, &lower, sigma, memo)?;
            field.derive(k, &base)
        }
    };
    memo.insert(d.clone(), img.clone());
    Ok(img)
}

/// Leader, initial and separant of a differential polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeaderData {
    pub leader: DerivativeVar,
    /// Leader degree.
    pub degree: u32,
    pub initial: Poly,
    pub separant: Poly,
}

pub fn leader_initial_separant(f: &Poly, rk: Ranking) -> Result<LeaderData, DiffError> {
    let leader = f
        .der_vars()
        .into_iter()
        .max_by(|a, b| rk.compare(a, b))
        .ok_or(DiffError::ConstantPolynomial)?;
    let v = Var::Der(leader.clone());
    let degree = f.degree_in(&v);
    Ok(LeaderData {
        initial: f.coeff_of(&v, degree),
        separant: f.partial(&v),
        leader,
        degree,
    })
}
