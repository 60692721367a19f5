//! Relative D-varieties `(V, s)`: section validation, the integrability
//! condition, sharp points and sub-D-varieties.

use thiserror::Error;

use crate::coeffield::FieldDescriptor;
use crate::diffpoly::DiffError;
use crate::poly::{Poly, Rat, Symbol};
use crate::prolong::{self, fiber_symbols, nabla, Partition, ProlongError};
use crate::reduce::{
    membership_verdict, AutoreducedSet, Membership, ReduceError, ReductionCertificate,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DVarietyError {
    #[error("section has {found} tuples but there are {expected} outer derivations")]
    SectionCount { expected: usize, found: usize },
    #[error("section tuple {index} has {found} components, expected {expected}")]
    SectionArity {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("point has {found} coordinates, expected {expected}")]
    PointArity { expected: usize, found: usize },
    #[error("point is not on the variety: generator {generator} evaluates to a nonzero value")]
    NotOnVariety { generator: usize, value: Rat },
    #[error(transparent)]
    Prolong(#[from] ProlongError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Diff(#[from] DiffError),
}

/// Three-valued outcome of a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_membership(m: Membership) -> Self {
        match m {
            Membership::InIdeal => Verdict::Pass,
            Membership::NotInIdeal => Verdict::Fail,
            Membership::Unknown => Verdict::Inconclusive,
        }
    }

    /// Fail dominates, then Inconclusive.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }

    pub fn all(items: impl IntoIterator<Item = Verdict>) -> Verdict {
        items.into_iter().fold(Verdict::Pass, Verdict::combine)
    }
}

/// One residual reduced modulo the variety.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualCheck {
    pub label: String,
    pub residual: Rat,
    pub verdict: Verdict,
    pub certificate: ReductionCertificate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub checks: Vec<ResidualCheck>,
    pub verdict: Verdict,
}

impl CheckReport {
    fn from_checks(checks: Vec<ResidualCheck>) -> Self {
        let verdict = Verdict::all(checks.iter().map(|c| c.verdict));
        CheckReport { checks, verdict }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Reduce `residual` modulo `set` and record the outcome.
pub fn check_residual(
    field: &FieldDescriptor,
    set: &AutoreducedSet,
    label: String,
    residual: Rat,
) -> Result<ResidualCheck, DVarietyError> {
    let (m, certificate) = membership_verdict(field, &residual, set)?;
    Ok(ResidualCheck {
        label,
        residual,
        verdict: Verdict::from_membership(m),
        certificate,
    })
}

/// A Δ-variety with a section `s = (Id, s_1, …, s_r)` of its prolongation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelativeDVariety {
    pub variety: AutoreducedSet,
    pub coords: Vec<Symbol>,
    pub partition: Partition,
    /// `section[i]` is `s_{i+1}`, one expression per coordinate.
    pub section: Vec<Vec<Rat>>,
}

impl RelativeDVariety {
    pub fn new(
        variety: AutoreducedSet,
        coords: Vec<Symbol>,
        partition: Partition,
        section: Vec<Vec<Rat>>,
    ) -> Result<Self, DVarietyError> {
        if section.len() != partition.outer().len() {
            return Err(DVarietyError::SectionCount {
                expected: partition.outer().len(),
                found: section.len(),
            });
        }
        for (i, s) in section.iter().enumerate() {
            if s.len() != coords.len() {
                return Err(DVarietyError::SectionArity {
                    index: i + 1,
                    expected: coords.len(),
                    found: s.len(),
                });
            }
        }
        Ok(RelativeDVariety {
            variety,
            coords,
            partition,
            section,
        })
    }

    /// `μ = max(1, ord s)`.
    pub fn section_order(&self) -> u32 {
        self.section
            .iter()
            .flatten()
            .flat_map(|r| r.vars())
            .filter_map(|v| v.as_der().map(|d| d.order()))
            .max()
            .unwrap_or(0)
            .max(1)
    }

    pub fn with_section(&self, section: Vec<Vec<Rat>>) -> Result<Self, DVarietyError> {
        RelativeDVariety::new(
            self.variety.clone(),
            self.coords.clone(),
            self.partition.clone(),
            section,
        )
    }

    /// `d_{D_i/Δ} f` evaluated at `(x, s_i(x))`.
    fn lift_at_section(
        &self,
        field: &FieldDescriptor,
        i: usize,
        f: &Rat,
        s: &[Rat],
    ) -> Result<Rat, DVarietyError> {
        let k = self.partition.outer()[i];
        let d = prolong::d_rel(field, &self.partition, k, f, &self.coords)?;
        let base: Vec<Rat> = self
            .coords
            .iter()
            .map(|c| Rat::var(crate::poly::Var::indet(c.clone())))
            .collect();
        let syms = fiber_symbols(i + 1, self.coords.len());
        Ok(prolong::eval_at(
            field,
            &d,
            &self.coords,
            &base,
            Some((&syms, s)),
        )?)
    }
}

/// Each lifted generator `d_{D_i/Δ} f` at `(x, s_i(x))` must vanish mod V.
pub fn validate_section(
    field: &FieldDescriptor,
    dv: &RelativeDVariety,
) -> Result<CheckReport, DVarietyError> {
    let mut checks = Vec::new();
    for i in 0..dv.partition.outer().len() {
        let name = &field.derivations()[dv.partition.outer()[i]].name;
        for (g, f) in dv.variety.elements().iter().enumerate() {
            let residual =
                dv.lift_at_section(field, i, &Rat::from_poly(f.clone()), &dv.section[i])?;
            checks.push(check_residual(
                field,
                &dv.variety,
                format!("lift of generator {} along {}", g + 1, name),
                residual,
            )?);
        }
    }
    Ok(CheckReport::from_checks(checks))
}

/// `d_{D_i/Δ}s_j(x, s_i(x)) − d_{D_j/Δ}s_i(x, s_j(x))` mod V, per pair and
/// component. With one outer derivation the report is empty and passes.
pub fn check_integrability(
    field: &FieldDescriptor,
    dv: &RelativeDVariety,
) -> Result<CheckReport, DVarietyError> {
    let r = dv.partition.outer().len();
    let mut checks = Vec::new();
    for i in 0..r {
        for j in (i + 1)..r {
            let (ni, nj) = (
                &field.derivations()[dv.partition.outer()[i]].name,
                &field.derivations()[dv.partition.outer()[j]].name,
            );
            for c in 0..dv.coords.len() {
                let lhs = dv.lift_at_section(field, i, &dv.section[j][c], &dv.section[i])?;
                let rhs = dv.lift_at_section(field, j, &dv.section[i][c], &dv.section[j])?;
                checks.push(check_residual(
                    field,
                    &dv.variety,
                    format!("[{ni}, {nj}] component {}", c + 1),
                    &lhs - &rhs,
                )?);
            }
        }
    }
    Ok(CheckReport::from_checks(checks))
}

/// Comparison of `s_i(a)` with `D_i a` at a point of the variety.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharpReport {
    /// `differences[i][j] = s_i(a)_j − D_i a_j`.
    pub differences: Vec<Vec<Rat>>,
    pub sharp: bool,
}

/// Substitute a point into the coordinates.
pub fn evaluate(
    field: &FieldDescriptor,
    f: &Rat,
    coords: &[Symbol],
    a: &[Rat],
) -> Result<Rat, DVarietyError> {
    Ok(prolong::eval_at(field, f, coords, a, None)?)
}

pub fn sharp_member(
    field: &FieldDescriptor,
    a: &[Rat],
    dv: &RelativeDVariety,
) -> Result<SharpReport, DVarietyError> {
    if a.len() != dv.coords.len() {
        return Err(DVarietyError::PointArity {
            expected: dv.coords.len(),
            found: a.len(),
        });
    }
    for (g, f) in dv.variety.elements().iter().enumerate() {
        let value = evaluate(field, &Rat::from_poly(f.clone()), &dv.coords, a)?;
        if !value.is_zero() {
            return Err(DVarietyError::NotOnVariety {
                generator: g + 1,
                value,
            });
        }
    }
    let na = nabla(field, &dv.partition, a);
    let mut differences = Vec::new();
    for (i, s) in dv.section.iter().enumerate() {
        let row = s
            .iter()
            .zip(&na.fibers[i])
            .map(|(si, da)| Ok(&evaluate(field, si, &dv.coords, a)? - da))
            .collect::<Result<Vec<_>, DVarietyError>>()?;
        differences.push(row);
    }
    let sharp = differences.iter().flatten().all(|d| d.is_zero());
    Ok(SharpReport { differences, sharp })
}

/// `W ⊆ V` and `s_W = s` on `W`, both decided by reduction modulo `W`.
pub fn is_subdvariety(
    field: &FieldDescriptor,
    sub: &RelativeDVariety,
    sup: &RelativeDVariety,
) -> Result<CheckReport, DVarietyError> {
    let mut checks = Vec::new();
    for (g, f) in sup.variety.elements().iter().enumerate() {
        checks.push(check_residual(
            field,
            &sub.variety,
            format!("generator {} of the ambient variety", g + 1),
            Rat::from_poly(f.clone()),
        )?);
    }
    for (i, (a, b)) in sup.section.iter().zip(&sub.section).enumerate() {
        for (c, (x, y)) in a.iter().zip(b).enumerate() {
            checks.push(check_residual(
                field,
                &sub.variety,
                format!("section {} component {}", i + 1, c + 1),
                x - y,
            )?);
        }
    }
    Ok(CheckReport::from_checks(checks))
}

/// Evaluate every generator of the prolongation presentation at `∇a`.
pub fn lifted_values_at_nabla(
    field: &FieldDescriptor,
    dv: &RelativeDVariety,
    a: &[Rat],
) -> Result<Vec<Rat>, DVarietyError> {
    let pres = prolong::prolongation_gens(field, &dv.partition, &dv.variety, &dv.coords)?;
    let na = nabla(field, &dv.partition, a);
    let mut out = Vec::new();
    for f in pres.base.elements() {
        out.push(evaluate(field, &Rat::from_poly(f.clone()), &dv.coords, a)?);
    }
    for (i, row) in pres.lifted.iter().enumerate() {
        for f in row {
            out.push(prolong::eval_at(
                field,
                f,
                &dv.coords,
                a,
                Some((&pres.fibers[i], &na.fibers[i])),
            )?);
        }
    }
    Ok(out)
}

/// Helper for building presentations from polynomials.
pub fn polys(items: &[Rat]) -> Vec<Poly> {
    items.iter().map(|r| r.numer().clone()).collect()
}
