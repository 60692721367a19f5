//! Relative prolongations.
//!
//! For an outer derivation `D` and `f` in the Δ-ring, `d_rel(D, f)` is
//! `Σ ∂f/∂(θx_j)·θu_j + f^D`, where `f^D` differentiates the coefficients
//! only. The fiber coordinates `u_j` are indeterminates of their own, named
//! `u<i>_<j>` for the `i`-th outer derivation and the `j`-th coordinate.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::coeffield::FieldDescriptor;
use crate::diffpoly::{self, DiffError};
use crate::poly::{DerivativeVar, Rat, Symbol, Var};
use crate::reduce::AutoreducedSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProlongError {
    #[error("`{0}` uses a derivation outside the inner set")]
    NotInDeltaRing(String),
    #[error("indeterminate `{0}` is not a coordinate")]
    ForeignIndeterminate(String),
    #[error("derivation {0} is not an outer derivation of the partition")]
    NotOuter(usize),
    #[error("expected {expected} components, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Diff(#[from] DiffError),
}

/// A split of (some of) the field's derivations into outer `D_i` and inner
/// `δ_j`. Derivations in neither part are not used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    outer: Vec<usize>,
    inner: Vec<usize>,
}

impl Partition {
    /// The split declared with the field.
    pub fn of_field(field: &FieldDescriptor) -> Self {
        Partition {
            outer: field.outer(),
            inner: field.inner(),
        }
    }

    pub fn new(outer: Vec<usize>, inner: Vec<usize>) -> Self {
        Partition { outer, inner }
    }

    pub fn outer(&self) -> &[usize] {
        &self.outer
    }

    pub fn inner(&self) -> &[usize] {
        &self.inner
    }

    /// Position of a derivation among the outer ones.
    pub fn outer_position(&self, k: usize) -> Option<usize> {
        self.outer.iter().position(|&o| o == k)
    }

    fn allows(&self, d: &DerivativeVar) -> bool {
        d.ops.powers().all(|(k, _)| self.inner.contains(&k))
    }
}

/// Fiber coordinate for outer derivation `i` and coordinate `j` (both
/// 1-based).
pub fn fiber_symbol(i: usize, j: usize) -> Symbol {
    Symbol::new((10_000 * i + j) as u32, format!("u{i}_{j}"))
}

/// The fiber tuple of outer derivation `i` (1-based) over `n` coordinates.
pub fn fiber_symbols(i: usize, n: usize) -> Vec<Symbol> {
    (1..=n).map(|j| fiber_symbol(i, j)).collect()
}

fn check_ring(f: &Rat, coords: &[Symbol], partition: &Partition) -> Result<(), ProlongError> {
    for v in f.vars() {
        if let Var::Der(d) = &v {
            if !coords.contains(&d.indet) {
                return Err(ProlongError::ForeignIndeterminate(
                    d.indet.name().to_string(),
                ));
            }
            if !partition.allows(d) {
                return Err(ProlongError::NotInDeltaRing(d.to_string()));
            }
        }
    }
    Ok(())
}

/// `Σ ∂f/∂(θx_j) · θu_j` with no coefficient term. Fractions follow the
/// quotient rule through the partial derivatives.
pub fn d_lin(f: &Rat, coords: &[Symbol], fiber: &[Symbol]) -> Result<Rat, ProlongError> {
    if coords.len() != fiber.len() {
        return Err(ProlongError::DimensionMismatch {
            expected: coords.len(),
            found: fiber.len(),
        });
    }
    let mut out = Rat::zero();
    for v in f.vars() {
        let Var::Der(d) = &v else { continue };
        let j = coords
            .iter()
            .position(|c| *c == d.indet)
            .ok_or_else(|| ProlongError::ForeignIndeterminate(d.indet.name().to_string()))?;
        let du = Var::Der(DerivativeVar::new(fiber[j].clone(), d.ops.clone()));
        out = &out + &(&f.partial(&v) * &Rat::var(du));
    }
    Ok(out)
}

/// Coefficient derivative `f^D`: `D` applied to the generators only.
pub fn coefficient_derivative(field: &FieldDescriptor, k: usize, f: &Rat) -> Rat {
    let mut out = Rat::zero();
    for v in f.vars() {
        if v.is_gen() {
            out = &out + &(&f.partial(&v) * &field.derive_var(k, &v));
        }
    }
    out
}

/// `d_{D/Δ} f` in the coordinates and the fiber of outer derivation `k`.
pub fn d_rel(
    field: &FieldDescriptor,
    partition: &Partition,
    k: usize,
    f: &Rat,
    coords: &[Symbol],
) -> Result<Rat, ProlongError> {
    let i = partition
        .outer_position(k)
        .ok_or(ProlongError::NotOuter(k))?;
    check_ring(f, coords, partition)?;
    let fiber = fiber_symbols(i + 1, coords.len());
    let lin = d_lin(f, coords, &fiber)?;
    Ok(&lin + &coefficient_derivative(field, k, f))
}

/// Generators of `τ_{DD/Δ}V`: the base set and one lift per outer
/// derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProlongationPresentation {
    pub base: AutoreducedSet,
    pub coords: Vec<Symbol>,
    /// `lifted[i][g]` is `d_{D_i/Δ}` of base generator `g`.
    pub lifted: Vec<Vec<Rat>>,
    pub fibers: Vec<Vec<Symbol>>,
}

impl ProlongationPresentation {
    /// Base generators followed by all lifts, as one list.
    pub fn generators(&self) -> Vec<Rat> {
        let mut out: Vec<Rat> = self
            .base
            .elements()
            .iter()
            .map(|p| Rat::from_poly(p.clone()))
            .collect();
        for row in &self.lifted {
            out.extend(row.iter().cloned());
        }
        out
    }
}

pub fn prolongation_gens(
    field: &FieldDescriptor,
    partition: &Partition,
    base: &AutoreducedSet,
    coords: &[Symbol],
) -> Result<ProlongationPresentation, ProlongError> {
    let mut lifted = Vec::new();
    let mut fibers = Vec::new();
    for (i, &k) in partition.outer().iter().enumerate() {
        let row = base
            .elements()
            .iter()
            .map(|g| d_rel(field, partition, k, &Rat::from_poly(g.clone()), coords))
            .collect::<Result<Vec<_>, _>>()?;
        lifted.push(row);
        fibers.push(fiber_symbols(i + 1, coords.len()));
    }
    Ok(ProlongationPresentation {
        base: base.clone(),
        coords: coords.to_vec(),
        lifted,
        fibers,
    })
}

/// A point `(x, u_1, …, u_r)` of a prolongation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauPoint {
    pub base: Vec<Rat>,
    pub fibers: Vec<Vec<Rat>>,
}

impl TauPoint {
    pub fn new(base: Vec<Rat>, fibers: Vec<Vec<Rat>>) -> Result<Self, ProlongError> {
        for f in &fibers {
            if f.len() != base.len() {
                return Err(ProlongError::DimensionMismatch {
                    expected: base.len(),
                    found: f.len(),
                });
            }
        }
        Ok(TauPoint { base, fibers })
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// Every component, base first.
    pub fn components(&self) -> impl Iterator<Item = &Rat> {
        self.base.iter().chain(self.fibers.iter().flatten())
    }

    /// Componentwise difference.
    pub fn sub(&self, other: &TauPoint) -> Vec<Rat> {
        self.components()
            .zip(other.components())
            .map(|(a, b)| a - b)
            .collect()
    }
}

/// `∇a = (a, D_1 a, …, D_r a)`; symbolic entries get formal derivatives.
pub fn nabla(field: &FieldDescriptor, partition: &Partition, a: &[Rat]) -> TauPoint {
    let fibers = partition
        .outer()
        .iter()
        .map(|&k| a.iter().map(|c| field.derive(k, c)).collect())
        .collect();
    TauPoint {
        base: a.to_vec(),
        fibers,
    }
}

/// Simultaneous, derivative-consistent substitution of coordinates and
/// fibers.
pub(crate) fn eval_at(
    field: &FieldDescriptor,
    f: &Rat,
    coords: &[Symbol],
    base: &[Rat],
    fiber: Option<(&[Symbol], &[Rat])>,
) -> Result<Rat, ProlongError> {
    let mut sigma: BTreeMap<Symbol, Rat> =
        coords.iter().cloned().zip(base.iter().cloned()).collect();
    if let Some((syms, vals)) = fiber {
        sigma.extend(syms.iter().cloned().zip(vals.iter().cloned()));
    }
    // indeterminates outside the map stay as they are
    for v in f.vars() {
        if let Var::Der(d) = v {
            sigma
                .entry(d.indet.clone())
                .or_insert_with(|| Rat::var(Var::indet(d.indet.clone())));
        }
    }
    Ok(diffpoly::substitute(field, f, &sigma)?)
}

/// `τf` applied to a point: `(f(x), d_{D_i/Δ}f(x, u_i))`.
pub fn tau_apply(
    field: &FieldDescriptor,
    partition: &Partition,
    f: &[Rat],
    coords: &[Symbol],
    p: &TauPoint,
) -> Result<TauPoint, ProlongError> {
    if p.base.len() != coords.len() {
        return Err(ProlongError::DimensionMismatch {
            expected: coords.len(),
            found: p.base.len(),
        });
    }
    if p.fibers.len() != partition.outer().len() {
        return Err(ProlongError::DimensionMismatch {
            expected: partition.outer().len(),
            found: p.fibers.len(),
        });
    }
    let base = f
        .iter()
        .map(|c| eval_at(field, c, coords, &p.base, None))
        .collect::<Result<Vec<_>, _>>()?;
    let mut fibers = Vec::new();
    for (i, &k) in partition.outer().iter().enumerate() {
        let syms = fiber_symbols(i + 1, coords.len());
        let row = f
            .iter()
            .map(|c| {
                let d = d_rel(field, partition, k, c, coords)?;
                eval_at(field, &d, coords, &p.base, Some((&syms, &p.fibers[i])))
            })
            .collect::<Result<Vec<_>, _>>()?;
        fibers.push(row);
    }
    Ok(TauPoint { base, fibers })
}

/// The generic point `(x; u_1; …; u_r)` of the prolongation.
pub fn generic_point(partition: &Partition, coords: &[Symbol]) -> TauPoint {
    let base = coords
        .iter()
        .map(|c| Rat::var(Var::indet(c.clone())))
        .collect();
    let fibers = (1..=partition.outer().len())
        .map(|i| {
            fiber_symbols(i, coords.len())
                .into_iter()
                .map(|s| Rat::var(Var::indet(s)))
                .collect()
        })
        .collect();
    TauPoint { base, fibers }
}

/// Indeterminates occurring in a list of expressions.
pub fn indeterminates<'a>(items: impl IntoIterator<Item = &'a Rat>) -> BTreeSet<Symbol> {
    items
        .into_iter()
        .flat_map(|r| r.vars())
        .filter_map(|v| v.as_der().map(|d| d.indet.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffield::DerivationName;
    use crate::diffpoly::testgen::{exp_field, poly_from, poly_spec};
    use crate::expr::{format_rat, parse, Scope};
    use crate::poly::Poly;
    use proptest::prelude::*;

    fn gm_field() -> FieldDescriptor {
        FieldDescriptor::rationals(vec![DerivationName::outer("D"), DerivationName::inner("d")])
    }

    fn xy() -> Vec<Symbol> {
        vec![Symbol::new(0, "x"), Symbol::new(1, "y")]
    }

    fn q(f: &FieldDescriptor, s: &str) -> Rat {
        let mut ind = xy();
        ind.extend(fiber_symbols(1, 2));
        ind.extend(fiber_symbols(2, 2));
        parse(s, &Scope::new(f, &ind)).unwrap()
    }

    #[test]
    fn worked_example_lifts() {
        let f = gm_field();
        let part = Partition::of_field(&f);
        let set = AutoreducedSet::new(
            vec![
                q(&f, "x*y - 1").numer().clone(),
                q(&f, "x*d[d]^2(x) - d[d](x)^2").numer().clone(),
            ],
            true,
        )
        .unwrap();
        let pres = prolongation_gens(&f, &part, &set, &xy()).unwrap();
        let lifts: Vec<String> = pres.lifted[0].iter().map(|r| format_rat(r, &f)).collect();
        assert_eq!(lifts.len(), 2);
        assert_eq!(pres.lifted[0][0], q(&f, "y*u1_1 + x*u1_2"));
        assert_eq!(
            pres.lifted[0][1],
            q(&f, "d[d]^2(x)*u1_1 - 2*d[d](x)*d[d](u1_1) + x*d[d]^2(u1_1)")
        );
    }

    #[test]
    fn d_lin_examples() {
        let f = gm_field();
        let fib = fiber_symbols(1, 2);
        assert_eq!(
            d_lin(&q(&f, "x + y"), &xy(), &fib).unwrap(),
            q(&f, "u1_1 + u1_2")
        );
        assert_eq!(
            d_lin(&q(&f, "x*y"), &xy(), &fib).unwrap(),
            q(&f, "y*u1_1 + x*u1_2")
        );
    }

    #[test]
    fn coefficient_term() {
        let f = FieldDescriptor::declare(
            &["t", "w"],
            vec![DerivationName::outer("dt"), DerivationName::outer("dw")],
            &[
                ("dt", "t", "1"),
                ("dt", "w", "0"),
                ("dw", "t", "0"),
                ("dw", "w", "1"),
            ],
        )
        .unwrap();
        let part = Partition::of_field(&f);
        let x = vec![Symbol::new(0, "x")];
        let mut ind = x.clone();
        ind.extend(fiber_symbols(1, 1));
        ind.extend(fiber_symbols(2, 1));
        let p = |s: &str| parse(s, &Scope::new(&f, &ind)).unwrap();
        let tx = p("t*x");
        assert_eq!(d_rel(&f, &part, 1, &tx, &x).unwrap(), p("t*u2_1"));
        assert_eq!(d_rel(&f, &part, 0, &tx, &x).unwrap(), p("t*u1_1 + x"));
    }

    #[test]
    fn outer_derivatives_are_rejected() {
        let f = gm_field();
        let part = Partition::of_field(&f);
        let r = d_rel(&f, &part, 0, &q(&f, "d[D](x)"), &xy());
        assert!(matches!(r, Err(ProlongError::NotInDeltaRing(_))));
        let r = d_rel(&f, &part, 1, &q(&f, "x"), &xy());
        assert_eq!(r, Err(ProlongError::NotOuter(1)));
    }

    #[test]
    fn nabla_examples() {
        let f = exp_field();
        let part = Partition::new(vec![0, 1], vec![]);
        let e = f.element("E").unwrap().into_rat();
        let p = nabla(&f, &part, &[e]);
        assert_eq!(p.fibers[0][0], f.element("2*w*E").unwrap().into_rat());
        assert_eq!(
            p.fibers[1][0],
            f.element("(2*t + 2*w)*E").unwrap().into_rat()
        );
        let one = nabla(&f, &part, &[Rat::one()]);
        assert!(one.fibers.iter().flatten().all(|c| c.is_zero()));
    }

    #[test]
    fn squaring_and_identity() {
        let f = gm_field();
        let part = Partition::of_field(&f);
        let x = vec![Symbol::new(0, "x")];
        let pt = TauPoint::new(vec![q(&f, "y")], vec![vec![q(&f, "u2_1")]]).unwrap();
        let id = tau_apply(&f, &part, &[q(&f, "x")], &x, &pt).unwrap();
        assert_eq!(id, pt);
        let sq = tau_apply(&f, &part, &[q(&f, "x^2")], &x, &pt).unwrap();
        assert_eq!(sq.base[0], q(&f, "y^2"));
        assert_eq!(sq.fibers[0][0], q(&f, "2*y*u2_1"));
    }

    #[test]
    fn empty_variety_has_empty_lift() {
        let f = gm_field();
        let part = Partition::of_field(&f);
        let pres = prolongation_gens(&f, &part, &AutoreducedSet::empty(true), &xy()).unwrap();
        assert!(pres.lifted.iter().all(|r| r.is_empty()));
    }

    #[test]
    fn two_outer_derivations_get_independent_fibers() {
        let f = FieldDescriptor::rationals(vec![
            DerivationName::outer("D1"),
            DerivationName::outer("D2"),
        ]);
        let part = Partition::of_field(&f);
        let set = AutoreducedSet::new(vec![q(&f, "x*y - 1").numer().clone()], true).unwrap();
        let pres = prolongation_gens(&f, &part, &set, &xy()).unwrap();
        assert_eq!(pres.lifted[0][0], q(&f, "y*u1_1 + x*u1_2"));
        assert_eq!(pres.lifted[1][0], q(&f, "y*u2_1 + x*u2_2"));
    }

    #[test]
    fn product_presentation_is_union_of_lifts() {
        let f = gm_field();
        let part = Partition::of_field(&f);
        let x = vec![Symbol::new(0, "x")];
        let y = vec![Symbol::new(1, "y")];
        let v = AutoreducedSet::new(vec![q(&f, "x*d[d]^2(x) - d[d](x)^2").numer().clone()], true)
            .unwrap();
        let w = AutoreducedSet::new(vec![q(&f, "d[d](y) - y^2").numer().clone()], true).unwrap();
        let vw = v.union(&w).unwrap();
        let whole = prolongation_gens(&f, &part, &vw, &xy()).unwrap();
        let pv = prolongation_gens(&f, &part, &v, &x).unwrap();
        let pw = prolongation_gens(&f, &part, &w, &y).unwrap();
        // the W factor's fiber u1_1 becomes coordinate 2 of the product
        let rename = BTreeMap::from([
            (y[0].clone(), Rat::var(Var::indet(y[0].clone()))),
            (fiber_symbol(1, 1), Rat::var(Var::indet(fiber_symbol(1, 2)))),
        ]);
        let mut expected: Vec<Rat> = pv.lifted[0].clone();
        for g in &pw.lifted[0] {
            expected.push(diffpoly::substitute(&f, g, &rename).unwrap());
        }
        let mut got = whole.lifted[0].clone();
        let key = |r: &Rat| format_rat(r, &f);
        expected.sort_by_key(key);
        got.sort_by_key(key);
        assert_eq!(got, expected);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// `D(f(a)) = d_rel(D, f)(a, Da)` for field points `a`.
        #[test]
        fn specialization(body in poly_spec(), a0 in poly_spec(), a1 in poly_spec()) {
            let f = exp_field();
            let part = Partition::of_field(&f);
            let coords = vec![Symbol::new(0, "x"), Symbol::new(1, "y")];
            let g = Rat::from_poly(strip_outer(&poly_from(&f, &body)));
            let a: Vec<Rat> = [a0, a1]
                .iter()
                .map(|s| Rat::from_poly(field_only(&poly_from(&f, s))))
                .collect();
            let k = part.outer()[0];
            let sigma: BTreeMap<Symbol, Rat> = coords.iter().cloned().zip(a.iter().cloned()).collect();
            let lhs = f.derive(k, &diffpoly::substitute(&f, &g, &sigma).unwrap());
            let da = nabla(&f, &part, &a);
            let d = d_rel(&f, &part, k, &g, &coords).unwrap();
            let rhs = eval_at(&f, &d, &coords, &a, Some((&fiber_symbols(1, 2), &da.fibers[0]))).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    /// Drop terms that mention outer derivatives.
    fn strip_outer(p: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in p.terms() {
            let bad = m.factors().iter().any(|(v, _)| match v {
                Var::Der(d) => d.ops.get(1) > 0,
                Var::Gen(_) => false,
            });
            if !bad {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    fn field_only(p: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in p.terms() {
            if m.factors().iter().all(|(v, _)| v.is_gen()) {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }
}
