//! Relative D-groups: the group law of `τG`, logarithmic derivatives, the
//! adjoint action, integrable points and the linear case.
//!
//! A group is given by a rational law `p(x, y)`, an inverse `inv(x)` and an
//! identity `e`, in the coordinates of its variety. The right-hand argument
//! of `p` is written in a second copy of the coordinates supplied with the
//! law. Every symbolic identity is decided by reduction modulo the relevant
//! product presentation, so verdicts are three-valued.

use thiserror::Error;

use crate::coeffield::FieldDescriptor;
use crate::diffpoly::DiffError;
use crate::dvariety::{
    check_integrability, check_residual, evaluate, validate_section, CheckReport, DVarietyError,
    RelativeDVariety, ResidualCheck, Verdict,
};
use crate::poly::{Poly, Rat, RatError, Symbol, Var};
use crate::prolong::{
    self, coefficient_derivative, eval_at, fiber_symbols, nabla, tau_apply, Partition,
    ProlongError, TauPoint,
};
use crate::reduce::{ritt_reduce, AutoreducedSet, ReduceError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DGroupError {
    #[error("{what} has {found} components, expected {expected}")]
    Arity {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("group law and variety use different coordinates")]
    CoordinateMismatch,
    #[error("point is not on the group: generator {generator} evaluates to a nonzero value")]
    NotOnGroup { generator: usize, value: Rat },
    #[error("matrix {index} is not {size}x{size}")]
    MatrixShape { index: usize, size: usize },
    #[error("{found} matrices given for {expected} outer derivations")]
    MatrixCount { expected: usize, found: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error(transparent)]
    Prolong(#[from] ProlongError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    DVariety(#[from] DVarietyError),
    #[error(transparent)]
    Diff(#[from] DiffError),
}

impl From<RatError> for DGroupError {
    fn from(_: RatError) -> Self {
        DGroupError::DivisionByZero
    }
}

type Result<T> = std::result::Result<T, DGroupError>;

fn var(s: &Symbol) -> Rat {
    Rat::var(Var::indet(s.clone()))
}

fn vars(syms: &[Symbol]) -> Vec<Rat> {
    syms.iter().map(var).collect()
}

fn check_arity(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(DGroupError::Arity {
            what,
            expected,
            found,
        })
    }
}

/// Placeholder coordinates used while differentiating composite maps, kept
/// apart from anything a caller can name.
fn scratch_symbols(n: usize) -> Vec<Symbol> {
    (0..n)
        .map(|j| Symbol::new(900_000 + j as u32, format!("w{}", j + 1)))
        .collect()
}

/// A third copy of the coordinates, for associativity.
fn third_copy(coords: &[Symbol]) -> Vec<Symbol> {
    coords
        .iter()
        .map(|s| Symbol::new(800_000 + s.idx(), format!("{}3", s.name())))
        .collect()
}

/// A rational group law in fixed coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalGroupLaw {
    pub coords: Vec<Symbol>,
    /// Second copy of the coordinates: the right argument of `mul`.
    pub right: Vec<Symbol>,
    pub mul: Vec<Rat>,
    pub inv: Vec<Rat>,
    pub identity: Vec<Rat>,
}

impl RationalGroupLaw {
    pub fn new(
        coords: Vec<Symbol>,
        right: Vec<Symbol>,
        mul: Vec<Rat>,
        inv: Vec<Rat>,
        identity: Vec<Rat>,
    ) -> Result<Self> {
        let n = coords.len();
        check_arity("right coordinate copy", n, right.len())?;
        check_arity("multiplication", n, mul.len())?;
        check_arity("inverse", n, inv.len())?;
        check_arity("identity", n, identity.len())?;
        Ok(RationalGroupLaw {
            coords,
            right,
            mul,
            inv,
            identity,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    fn both(&self) -> Vec<Symbol> {
        let mut s = self.coords.clone();
        s.extend(self.right.iter().cloned());
        s
    }

    /// `p(g, h)` for arbitrary tuples.
    pub fn multiply(&self, field: &FieldDescriptor, g: &[Rat], h: &[Rat]) -> Result<Vec<Rat>> {
        check_arity("left factor", self.dim(), g.len())?;
        check_arity("right factor", self.dim(), h.len())?;
        let both = self.both();
        let mut vals = g.to_vec();
        vals.extend(h.iter().cloned());
        self.mul
            .iter()
            .map(|c| Ok(eval_at(field, c, &both, &vals, None)?))
            .collect()
    }

    pub fn inverse(&self, field: &FieldDescriptor, g: &[Rat]) -> Result<Vec<Rat>> {
        check_arity("point", self.dim(), g.len())?;
        self.inv
            .iter()
            .map(|c| Ok(eval_at(field, c, &self.coords, g, None)?))
            .collect()
    }
}

/// Rename a presentation into another copy of the coordinates.
pub fn rename_set(
    field: &FieldDescriptor,
    set: &AutoreducedSet,
    from: &[Symbol],
    to: &[Symbol],
) -> Result<AutoreducedSet> {
    let target = vars(to);
    let elements = set
        .elements()
        .iter()
        .map(|p| {
            Ok(
                eval_at(field, &Rat::from_poly(p.clone()), from, &target, None)?
                    .numer()
                    .clone(),
            )
        })
        .collect::<Result<Vec<Poly>>>()?;
    Ok(AutoreducedSet::new(elements, set.is_prime())?)
}

/// Presentation of `τ_{DD/Δ}V` as one autoreduced set: the base generators
/// and each lift reduced modulo them.
pub fn tau_set(
    field: &FieldDescriptor,
    partition: &Partition,
    set: &AutoreducedSet,
    coords: &[Symbol],
) -> Result<AutoreducedSet> {
    let pres = prolong::prolongation_gens(field, partition, set, coords)?;
    let mut elements: Vec<Poly> = set.elements().to_vec();
    for row in &pres.lifted {
        for g in row {
            let cert = ritt_reduce(field, g.numer(), set)?;
            if !cert.remainder.is_zero() {
                elements.push(cert.remainder.numeric_primitive());
            }
        }
    }
    Ok(AutoreducedSet::new(elements, set.is_prime())?)
}

/// A relative D-variety whose variety carries a group law.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelativeDGroup {
    pub dvariety: RelativeDVariety,
    pub law: RationalGroupLaw,
}

impl RelativeDGroup {
    pub fn new(dvariety: RelativeDVariety, law: RationalGroupLaw) -> Result<Self> {
        if dvariety.coords != law.coords {
            return Err(DGroupError::CoordinateMismatch);
        }
        Ok(RelativeDGroup { dvariety, law })
    }

    pub fn partition(&self) -> &Partition {
        &self.dvariety.partition
    }

    pub fn set(&self) -> &AutoreducedSet {
        &self.dvariety.variety
    }

    pub fn coords(&self) -> &[Symbol] {
        &self.law.coords
    }

    /// `I(G × G)` in the coordinates and their right copy.
    pub fn square_set(&self, field: &FieldDescriptor) -> Result<AutoreducedSet> {
        let r = rename_set(field, self.set(), &self.law.coords, &self.law.right)?;
        Ok(self.set().union(&r)?)
    }

    /// `s(g) = (g, s_1(g), …, s_r(g))`.
    pub fn section_at(&self, field: &FieldDescriptor, g: &[Rat]) -> Result<TauPoint> {
        check_arity("point", self.law.dim(), g.len())?;
        let fibers = self
            .dvariety
            .section
            .iter()
            .map(|s| {
                s.iter()
                    .map(|c| Ok(eval_at(field, c, self.coords(), g, None)?))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TauPoint::new(g.to_vec(), fibers)?)
    }

    /// `∇e`, the identity of `τG`.
    pub fn tau_identity(&self, field: &FieldDescriptor) -> TauPoint {
        nabla(field, self.partition(), &self.law.identity)
    }

    /// Reject points over the field that miss a generator. Points with
    /// indeterminates are taken as generic and not checked.
    pub fn check_on_group(&self, field: &FieldDescriptor, g: &[Rat]) -> Result<()> {
        check_arity("point", self.law.dim(), g.len())?;
        if g.iter().any(|c| c.has_der_vars()) {
            return Ok(());
        }
        for (i, f) in self.set().elements().iter().enumerate() {
            let value = evaluate(field, &Rat::from_poly(f.clone()), self.coords(), g)?;
            if !value.is_zero() {
                return Err(DGroupError::NotOnGroup {
                    generator: i + 1,
                    value,
                });
            }
        }
        Ok(())
    }
}

/// `Σ_{θ, j} (∂f/∂θw_j)(at) · θ(dir_j)`: the linear part of `f` along the
/// coordinates `wrt`, with every other symbol in `syms` replaced by `vals`.
fn directional(
    field: &FieldDescriptor,
    f: &Rat,
    wrt: &[Symbol],
    dir: &[Rat],
    syms: &[Symbol],
    vals: &[Rat],
) -> Result<Rat> {
    let mut out = Rat::zero();
    for v in f.vars() {
        let Var::Der(d) = &v else { continue };
        let Some(j) = wrt.iter().position(|w| *w == d.indet) else {
            continue;
        };
        let coeff = eval_at(field, &f.partial(&v), syms, vals, None)?;
        out = &out + &(&coeff * &field.derive_multi(&d.ops, &dir[j]));
    }
    Ok(out)
}

fn check_point(partition: &Partition, n: usize, a: &TauPoint) -> Result<()> {
    check_arity("tau point base", n, a.base.len())?;
    check_arity("tau point fibers", partition.outer().len(), a.fibers.len())
}

/// Product in `τG` by the explicit formula
/// `(gh, d(λ^g)_h v_i + d(ρ^h)_g u_i + p^{D_i}(g, h))`.
pub fn tau_mul(
    field: &FieldDescriptor,
    partition: &Partition,
    law: &RationalGroupLaw,
    a: &TauPoint,
    b: &TauPoint,
) -> Result<TauPoint> {
    let n = law.dim();
    check_point(partition, n, a)?;
    check_point(partition, n, b)?;
    let both = law.both();
    let mut vals = a.base.clone();
    vals.extend(b.base.iter().cloned());
    let base = law.multiply(field, &a.base, &b.base)?;
    let mut fibers = Vec::new();
    for (i, &k) in partition.outer().iter().enumerate() {
        let mut row = Vec::with_capacity(n);
        for p in &law.mul {
            let left_translate = directional(field, p, &law.right, &b.fibers[i], &both, &vals)?;
            let right_translate = directional(field, p, &law.coords, &a.fibers[i], &both, &vals)?;
            let coeff = eval_at(
                field,
                &coefficient_derivative(field, k, p),
                &both,
                &vals,
                None,
            )?;
            row.push(&(&left_translate + &right_translate) + &coeff);
        }
        fibers.push(row);
    }
    Ok(TauPoint::new(base, fibers)?)
}

/// The same product computed as `τp` applied to the paired point.
pub fn tau_mul_via_apply(
    field: &FieldDescriptor,
    partition: &Partition,
    law: &RationalGroupLaw,
    a: &TauPoint,
    b: &TauPoint,
) -> Result<TauPoint> {
    check_point(partition, law.dim(), a)?;
    check_point(partition, law.dim(), b)?;
    let paired = pair(a, b);
    Ok(tau_apply(field, partition, &law.mul, &law.both(), &paired)?)
}

fn pair(a: &TauPoint, b: &TauPoint) -> TauPoint {
    let mut base = a.base.clone();
    base.extend(b.base.iter().cloned());
    let fibers = a
        .fibers
        .iter()
        .zip(&b.fibers)
        .map(|(u, v)| u.iter().chain(v).cloned().collect())
        .collect();
    TauPoint { base, fibers }
}

/// Inverse in `τG`:
/// `(c, d(C)_g(D_i g − u_i) + D_i c)` with `c = inv(g)` and
/// `C(y) = p(c, p(y, c))`.
pub fn tau_inv(
    field: &FieldDescriptor,
    partition: &Partition,
    law: &RationalGroupLaw,
    a: &TauPoint,
) -> Result<TauPoint> {
    let n = law.dim();
    check_point(partition, n, a)?;
    let c = law.inverse(field, &a.base)?;
    let y = scratch_symbols(n);
    let inner = law.multiply(field, &vars(&y), &c)?;
    let conj = law.multiply(field, &c, &inner)?;
    let mut fibers = Vec::new();
    for (i, &k) in partition.outer().iter().enumerate() {
        let dir: Vec<Rat> = a
            .base
            .iter()
            .zip(&a.fibers[i])
            .map(|(g, u)| &field.derive(k, g) - u)
            .collect();
        let mut row = Vec::with_capacity(n);
        for (cj, cc) in conj.iter().zip(&c) {
            let lin = directional(field, cj, &y, &dir, &y, &a.base)?;
            row.push(&lin + &field.derive(k, cc));
        }
        fibers.push(row);
    }
    Ok(TauPoint::new(c, fibers)?)
}

/// `ℓ_s(g) = ∇g · s(g)^{-1}`. A symbolic `g` (e.g. the coordinates) gives
/// the formal logarithmic derivative.
pub fn log_derivative(
    field: &FieldDescriptor,
    group: &RelativeDGroup,
    g: &[Rat],
) -> Result<TauPoint> {
    group.check_on_group(field, g)?;
    let part = group.partition();
    let ng = nabla(field, part, g);
    let sg = group.section_at(field, g)?;
    let inv = tau_inv(field, part, &group.law, &sg)?;
    tau_mul(field, part, &group.law, &ng, &inv)
}

/// `g ∗ α = τC_g(α)`, with `C(x, y) = p(p(x, y), inv(x))` prolonged at the
/// paired point `(s(g), α)`.
pub fn adjoint(
    field: &FieldDescriptor,
    group: &RelativeDGroup,
    g: &[Rat],
    alpha: &TauPoint,
) -> Result<TauPoint> {
    let law = &group.law;
    let part = group.partition();
    check_point(part, law.dim(), alpha)?;
    let x = vars(&law.coords);
    let y = vars(&law.right);
    let xy = law.multiply(field, &x, &y)?;
    let xi = law.inverse(field, &x)?;
    let conj = law.multiply(field, &xy, &xi)?;
    let sg = group.section_at(field, g)?;
    Ok(tau_apply(
        field,
        part,
        &conj,
        &law.both(),
        &pair(&sg, alpha),
    )?)
}

/// `s(g) · α · s(g)^{-1}` computed in `τG`.
pub fn adjoint_by_conjugation(
    field: &FieldDescriptor,
    group: &RelativeDGroup,
    g: &[Rat],
    alpha: &TauPoint,
) -> Result<TauPoint> {
    let part = group.partition();
    let law = &group.law;
    let u = group.section_at(field, g)?;
    let ui = tau_inv(field, part, law, &u)?;
    let right = tau_mul(field, part, law, alpha, &ui)?;
    tau_mul(field, part, law, &u, &right)
}

fn compare(
    field: &FieldDescriptor,
    set: &AutoreducedSet,
    label: &str,
    lhs: &TauPoint,
    rhs: &TauPoint,
) -> Result<Vec<ResidualCheck>> {
    let names = component_labels(lhs);
    lhs.sub(rhs)
        .into_iter()
        .zip(names)
        .map(|(d, name)| Ok(check_residual(field, set, format!("{label}, {name}"), d)?))
        .collect()
}

fn component_labels(p: &TauPoint) -> Vec<String> {
    let n = p.dim();
    let mut out: Vec<String> = (1..=n).map(|j| format!("base {j}")).collect();
    for i in 1..=p.fibers.len() {
        out.extend((1..=n).map(|j| format!("fiber {i} component {j}")));
    }
    out
}

fn report(checks: Vec<ResidualCheck>) -> CheckReport {
    let verdict = Verdict::all(checks.iter().map(|c| c.verdict));
    CheckReport { checks, verdict }
}

/// Identity and inverse laws modulo `I(G)`, and associativity on request.
pub fn check_law(
    field: &FieldDescriptor,
    group: &RelativeDGroup,
    check_assoc: bool,
) -> Result<CheckReport> {
    let law = &group.law;
    let set = group.set();
    let x = vars(&law.coords);
    let mut checks = Vec::new();
    let push = |checks: &mut Vec<ResidualCheck>,
                set: &AutoreducedSet,
                label: &str,
                lhs: Vec<Rat>,
                rhs: &[Rat]|
     -> Result<()> {
        for (j, (a, b)) in lhs.iter().zip(rhs).enumerate() {
            checks.push(check_residual(
                field,
                set,
                format!("{label}, component {}", j + 1),
                a - b,
            )?);
        }
        Ok(())
    };
    push(
        &mut checks,
        set,
        "p(x, e) = x",
        law.multiply(field, &x, &law.identity)?,
        &x,
    )?;
    push(
        &mut checks,
        set,
        "p(e, x) = x",
        law.multiply(field, &law.identity, &x)?,
        &x,
    )?;
    let xi = law.inverse(field, &x)?;
    push(
        &mut checks,
        set,
        "p(x, inv x) = e",
        law.multiply(field, &x, &xi)?,
        &law.identity,
    )?;
    push(
        &mut checks,
        set,
        "p(inv x, x) = e",
        law.multiply(field, &xi, &x)?,
        &law.identity,
    )?;
    if check_assoc {
        let y = vars(&law.right);
        let third = third_copy(&law.coords);
        let z = vars(&third);
        let cube = group
            .square_set(field)?
            .union(&rename_set(field, set, &law.coords, &third)?)?;
        let lhs = law.multiply(field, &law.multiply(field, &x, &y)?, &z)?;
        let rhs = law.multiply(field, &x, &law.multiply(field, &y, &z)?)?;
        push(&mut checks, &cube, "associativity", lhs, &rhs)?;
    }
    Ok(report(checks))
}

/// Generic points `(x, u)` and `(y, v)` of `τG` in the two coordinate copies.
fn generic_pair(group: &RelativeDGroup) -> (TauPoint, TauPoint) {
    let n = group.law.dim();
    let r = group.partition().outer().len();
    let a = TauPoint {
        base: vars(&group.law.coords),
        fibers: (1..=r).map(|i| vars(&fiber_symbols(i, n))).collect(),
    };
    let b = TauPoint {
        base: vars(&group.law.right),
        fibers: (1..=r)
            .map(|i| vars(&fiber_symbols(i, 2 * n)[n..]))
            .collect(),
    };
    (a, b)
}

/// Which map a homomorphism check is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionMap {
    Section,
    Nabla,
}

/// `τp(m(x), m(y)) − m(p(x, y))` modulo `I(G × G)` for `m = s` or `m = ∇`.
pub fn check_homomorphism(
    field: &FieldDescriptor,
    group: &RelativeDGroup,
    which: SectionMap,
) -> Result<CheckReport> {
    let law = &group.law;
    let part = group.partition();
    let x = vars(&law.coords);
    let y = vars(&law.right);
    let xy = law.multiply(field, &x, &y)?;
    let at = |g: &[Rat]| -> Result<TauPoint> {
        match which {
            SectionMap::Section => group.section_at(field, g),
            SectionMap::Nabla => Ok(nabla(field, part, g)),
        }
    };
    let lhs = tau_mul(field, part, law, &at(&x)?, &at(&y)?)?;
    let rhs = at(&xy)?;
    let label = match which {
        SectionMap::Section => "s(x)s(y) = s(xy)",
        SectionMap::Nabla => "∇x∇y = ∇(xy)",
    };
    Ok(report(compare(
        field,
        &group.square_set(field)?,
        label,
        &lhs,
        &rhs,
    )?))
}

/// `ℓ(xy) = ℓ(x) · (x ∗ ℓ(y))` modulo `I(G × G)`.
pub fn check_crossed_hom(field: &FieldDescriptor, group: &RelativeDGroup) -> Result<CheckReport> {
    let law = &group.law;
    let part = group.partition();
    let x = vars(&law.coords);
    let y = vars(&law.right);
    let xy = law.multiply(field, &x, &y)?;
    let lhs = log_derivative(field, group, &xy)?;
    let lx = log_derivative(field, group, &x)?;
    let ly = log_derivative(field, group, &y)?;
    let rhs = tau_mul(field, part, law, &lx, &adjoint(field, group, &x, &ly)?)?;
    Ok(report(compare(
        field,
        &group.square_set(field)?,
        "crossed homomorphism",
        &lhs,
        &rhs,
    )?))
}

/// Group axioms of `τG` on symbolic points, modulo the presentation of `τG`
/// (or its square): identity, inverse, and agreement of the explicit product
/// and inverse with the prolonged law.
pub fn check_tau_group(field: &FieldDescriptor, group: &RelativeDGroup) -> Result<CheckReport> {
    let law = &group.law;
    let part = group.partition();
    let (a, b) = generic_pair(group);
    let n = law.dim();
    let tau = tau_set(field, part, group.set(), &law.coords)?;
    let tau_right = {
        let mut from = law.coords.clone();
        let mut to = law.right.clone();
        for i in 1..=part.outer().len() {
            from.extend(fiber_symbols(i, n));
            to.extend(fiber_symbols(i, 2 * n)[n..].iter().cloned());
        }
        rename_set(field, &tau, &from, &to)?
    };
    let tau2 = tau.union(&tau_right)?;
    let e = group.tau_identity(field);
    let mut checks = Vec::new();
    checks.extend(compare(
        field,
        &tau,
        "∇e · ξ = ξ",
        &tau_mul(field, part, law, &e, &a)?,
        &a,
    )?);
    checks.extend(compare(
        field,
        &tau,
        "ξ · ∇e = ξ",
        &tau_mul(field, part, law, &a, &e)?,
        &a,
    )?);
    let ai = tau_inv(field, part, law, &a)?;
    checks.extend(compare(
        field,
        &tau,
        "ξ · ξ⁻¹ = ∇e",
        &tau_mul(field, part, law, &a, &ai)?,
        &e,
    )?);
    checks.extend(compare(
        field,
        &tau,
        "ξ⁻¹ · ξ = ∇e",
        &tau_mul(field, part, law, &ai, &a)?,
        &e,
    )?);
    checks.extend(compare(
        field,
        &tau2,
        "explicit product = τp",
        &tau_mul(field, part, law, &a, &b)?,
        &tau_mul_via_apply(field, part, law, &a, &b)?,
    )?);
    Ok(report(checks))
}

/// Everything a D-group declaration must satisfy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DGroupReport {
    pub law: CheckReport,
    pub section: CheckReport,
    pub integrability: CheckReport,
    pub section_hom: CheckReport,
    pub nabla_hom: CheckReport,
    pub verdict: Verdict,
}

pub fn check_dgroup(
    field: &FieldDescriptor,
    group: &RelativeDGroup,
    check_assoc: bool,
) -> Result<DGroupReport> {
    let law = check_law(field, group, check_assoc)?;
    let section = validate_section(field, &group.dvariety)?;
    let integrability = check_integrability(field, &group.dvariety)?;
    let section_hom = check_homomorphism(field, group, SectionMap::Section)?;
    let nabla_hom = check_homomorphism(field, group, SectionMap::Nabla)?;
    let verdict = Verdict::all(
        [&law, &section, &integrability, &section_hom, &nabla_hom]
            .iter()
            .map(|r| r.verdict),
    );
    Ok(DGroupReport {
        law,
        section,
        integrability,
        section_hom,
        nabla_hom,
        verdict,
    })
}

/// The D-variety `(G, αs)` with section `x ↦ α · s(x)`.
pub fn twisted(
    field: &FieldDescriptor,
    group: &RelativeDGroup,
    alpha: &TauPoint,
) -> Result<RelativeDVariety> {
    let part = group.partition();
    check_point(part, group.law.dim(), alpha)?;
    let x = vars(group.coords());
    let sx = group.section_at(field, &x)?;
    let t = tau_mul(field, part, &group.law, alpha, &sx)?;
    Ok(group.dvariety.with_section(t.fibers)?)
}

/// Outcome of the witness direction: `ℓ_s(g)` against `α`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessReport {
    pub log_derivative: TauPoint,
    /// `ℓ_s(g) − α`, componentwise.
    pub difference: Vec<Rat>,
    pub solves: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegrabilityReport {
    pub twisted: RelativeDVariety,
    pub section: CheckReport,
    pub integrability: CheckReport,
    pub witness: Option<WitnessReport>,
    pub verdict: Verdict,
}

/// Decide whether `α ∈ τG_e` is integrable: directly, by checking that
/// `(G, αs)` is a relative D-variety, and, given `g`, by checking
/// `ℓ_s(g) = α`. A solving witness settles the question; a failed witness
/// leaves the direct verdict in place.
pub fn integrable_point_check(
    field: &FieldDescriptor,
    group: &RelativeDGroup,
    alpha: &TauPoint,
    witness: Option<&[Rat]>,
) -> Result<IntegrabilityReport> {
    let tw = twisted(field, group, alpha)?;
    let section = validate_section(field, &tw)?;
    let integrability = check_integrability(field, &tw)?;
    let mut verdict = section.verdict.combine(integrability.verdict);
    let witness = match witness {
        Some(g) => {
            let l = log_derivative(field, group, g)?;
            let difference = l.sub(alpha);
            let solves = difference.iter().all(|d| d.is_zero());
            if solves {
                verdict = Verdict::Pass;
            }
            Some(WitnessReport {
                log_derivative: l,
                difference,
                solves,
            })
        }
        None => None,
    };
    Ok(IntegrabilityReport {
        twisted: tw,
        section,
        integrability,
        witness,
        verdict,
    })
}

/// Square matrices over the field.
pub type Matrix = Vec<Vec<Rat>>;

/// `D_i x = A_i x`, one matrix per outer derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    matrices: Vec<Matrix>,
    size: usize,
}

impl LinearSystem {
    pub fn new(matrices: Vec<Matrix>) -> Result<Self> {
        let size = matrices.first().map_or(0, |m| m.len());
        for (i, m) in matrices.iter().enumerate() {
            if m.len() != size || m.iter().any(|row| row.len() != size) {
                return Err(DGroupError::MatrixShape { index: i + 1, size });
            }
        }
        Ok(LinearSystem { matrices, size })
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn size(&self) -> usize {
        self.size
    }
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    a[i].iter()
                        .zip(b)
                        .fold(Rat::zero(), |acc, (x, row)| &acc + &(x * &row[j]))
                })
                .collect()
        })
        .collect()
}

fn mat_sub(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect())
        .collect()
}

/// Residual of one pair of the linear integrability condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairResidual {
    /// Outer positions, 1-based.
    pub first: usize,
    pub second: usize,
    /// `D_iA_j − D_jA_i − [A_i, A_j]`.
    pub residual: Matrix,
    pub verdict: Verdict,
}

/// Exact check of `D_iA_j − D_jA_i = [A_i, A_j]` for every pair `i < j`.
/// A single matrix passes vacuously.
pub fn linear_integrability(
    field: &FieldDescriptor,
    partition: &Partition,
    system: &LinearSystem,
) -> Result<Vec<PairResidual>> {
    let outer = partition.outer();
    if system.matrices.len() != outer.len() {
        return Err(DGroupError::MatrixCount {
            expected: outer.len(),
            found: system.matrices.len(),
        });
    }
    let deriv = |k: usize, m: &Matrix| -> Matrix {
        m.iter()
            .map(|row| row.iter().map(|c| field.derive(k, c)).collect())
            .collect()
    };
    let mut out = Vec::new();
    for i in 0..outer.len() {
        for j in (i + 1)..outer.len() {
            let (ai, aj) = (&system.matrices[i], &system.matrices[j]);
            let lhs = mat_sub(&deriv(outer[i], aj), &deriv(outer[j], ai));
            let bracket = mat_sub(&mat_mul(ai, aj), &mat_mul(aj, ai));
            let residual = mat_sub(&lhs, &bracket);
            let verdict = if residual.iter().flatten().all(|c| c.is_zero()) {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            out.push(PairResidual {
                first: i + 1,
                second: j + 1,
                residual,
                verdict,
            });
        }
    }
    Ok(out)
}

/// A group and its presentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupData {
    pub law: RationalGroupLaw,
    pub set: AutoreducedSet,
}

/// `𝔾_a` on one coordinate.
pub fn additive(x: Symbol, y: Symbol) -> GroupData {
    let (vx, vy) = (var(&x), var(&y));
    GroupData {
        law: RationalGroupLaw {
            coords: vec![x],
            right: vec![y],
            mul: vec![&vx + &vy],
            inv: vec![-&vx],
            identity: vec![Rat::zero()],
        },
        set: AutoreducedSet::empty(true),
    }
}

/// `𝔾_m` as an open subset of the line: the inverse is `1/x`.
pub fn multiplicative(x: Symbol, y: Symbol) -> GroupData {
    let (vx, vy) = (var(&x), var(&y));
    GroupData {
        law: RationalGroupLaw {
            coords: vec![x],
            right: vec![y],
            mul: vec![&vx * &vy],
            inv: vec![vx.inv().expect("nonzero")],
            identity: vec![Rat::one()],
        },
        set: AutoreducedSet::empty(true),
    }
}

/// `GL_n` in the coordinates `(a_11, …, a_nn, z)` with `z·det = 1`.
/// Both symbol lists hold the `n²` entries row by row, then `z`.
pub fn general_linear(n: usize, coords: Vec<Symbol>, right: Vec<Symbol>) -> Result<GroupData> {
    check_arity("GL_n coordinates", n * n + 1, coords.len())?;
    check_arity("GL_n coordinates", n * n + 1, right.len())?;
    let x = vars(&coords);
    let y = vars(&right);
    let matrix = |v: &[Rat]| -> Matrix { (0..n).map(|i| v[i * n..(i + 1) * n].to_vec()).collect() };
    let (a, b) = (matrix(&x), matrix(&y));
    let (za, zb) = (x[n * n].clone(), y[n * n].clone());
    let mut mul: Vec<Rat> = mat_mul(&a, &b).into_iter().flatten().collect();
    mul.push(&za * &zb);
    let det_a = determinant(&a);
    let mut inv: Vec<Rat> = adjugate(&a)
        .into_iter()
        .flatten()
        .map(|c| &c * &za)
        .collect();
    inv.push(det_a.clone());
    let mut identity: Vec<Rat> = (0..n * n)
        .map(|k| {
            if k / n == k % n {
                Rat::one()
            } else {
                Rat::zero()
            }
        })
        .collect();
    identity.push(Rat::one());
    let relation = (&(&za * &det_a) - &Rat::one()).numer().clone();
    Ok(GroupData {
        law: RationalGroupLaw {
            coords,
            right,
            mul,
            inv,
            identity,
        },
        set: AutoreducedSet::new(vec![relation], true)?,
    })
}

/// The direct product; coordinates are concatenated.
pub fn product(a: &GroupData, b: &GroupData) -> Result<GroupData> {
    let cat = |u: &[Rat], v: &[Rat]| -> Vec<Rat> { u.iter().chain(v).cloned().collect() };
    let cats = |u: &[Symbol], v: &[Symbol]| -> Vec<Symbol> { u.iter().chain(v).cloned().collect() };
    Ok(GroupData {
        law: RationalGroupLaw::new(
            cats(&a.law.coords, &b.law.coords),
            cats(&a.law.right, &b.law.right),
            cat(&a.law.mul, &b.law.mul),
            cat(&a.law.inv, &b.law.inv),
            cat(&a.law.identity, &b.law.identity),
        )?,
        set: a.set.union(&b.set)?,
    })
}

pub fn determinant(m: &Matrix) -> Rat {
    let n = m.len();
    if n == 0 {
        return Rat::one();
    }
    let mut out = Rat::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let term = &m[0][j] * &determinant(&minor(m, 0, j));
        out = if j % 2 == 0 {
            &out + &term
        } else {
            &out - &term
        };
    }
    out
}

fn minor(m: &Matrix, row: usize, col: usize) -> Matrix {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != col)
                .map(|(_, c)| c.clone())
                .collect()
        })
        .collect()
}

/// Transposed cofactor matrix: `A · adj(A) = det(A)·I`.
pub fn adjugate(m: &Matrix) -> Matrix {
    let n = m.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = determinant(&minor(m, j, i));
                    if (i + j) % 2 == 0 {
                        c
                    } else {
                        -&c
                    }
                })
                .collect()
        })
        .collect()
}
