//! Finitely presented differential coefficient fields.
//!
//! A field is `ℚ(g_1, …, g_k)` with generators treated as algebraically
//! independent, equipped with commuting derivations given by a table
//! `δ g ↦ rational expression in the generators`. Transcendental constants
//! such as `e^{2wt+w²}` enter as extra generators whose derivatives are
//! declared in the table.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::expr::{self, ParseError, Scope};
use crate::poly::{MultiIndex, Poly, Rat, RatError, Symbol, Var};

/// Which side of the partition `Π = DD ∪ Δ` a derivation belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DerivationClass {
    /// One of the `D_i`, acting only through prolongations and sections.
    Outer,
    /// One of the `δ_j` of the working ring `K{x}_Δ`.
    Inner,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationName {
    pub name: String,
    pub class: DerivationClass,
}

impl DerivationName {
    pub fn outer(name: &str) -> Self {
        DerivationName {
            name: name.to_string(),
            class: DerivationClass::Outer,
        }
    }

    pub fn inner(name: &str) -> Self {
        DerivationName {
            name: name.to_string(),
            class: DerivationClass::Inner,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error(
        "derivations do not commute on {generator}: [{first}, {second}]{generator} = {residual}"
    )]
    NonCommutingTable {
        generator: String,
        first: String,
        second: String,
        residual: String,
    },
    #[error("undefined symbol `{0}`")]
    UndefinedSymbol(String),
    #[error("unknown derivation `{0}`")]
    UnknownDerivation(String),
    #[error("no table entry for {derivation} applied to {generator}")]
    MissingTableEntry {
        derivation: String,
        generator: String,
    },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("`{0}` is not an element of the coefficient field")]
    NotAFieldElement(String),
    #[error("in table entry for {derivation} {generator}: {source}")]
    Parse {
        derivation: String,
        generator: String,
        source: ParseError,
    },
    #[error(transparent)]
    Rat(#[from] RatError),
}

/// An element of the coefficient field: a reduced fraction in the generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement(Rat);

impl FieldElement {
    pub fn new(r: Rat) -> Result<Self, FieldError> {
        if r.has_der_vars() {
            return Err(FieldError::NotAFieldElement(format!("{r:?}")));
        }
        Ok(FieldElement(r))
    }

    pub fn from_int(n: i64) -> Self {
        FieldElement(Rat::from_int(n))
    }

    pub fn as_rat(&self) -> &Rat {
        &self.0
    }

    pub fn into_rat(self) -> Rat {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Canonical form of `num / den`.
    pub fn normalize(num: Poly, den: Poly) -> Result<Self, FieldError> {
        FieldElement::new(Rat::new(num, den)?)
    }
}

/// Generators and derivation table of a differential coefficient field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDescriptor {
    gens: Vec<Symbol>,
    derivations: Vec<DerivationName>,
    /// `table[k][i]` is derivation `k` applied to generator `i`.
    table: Vec<Vec<Rat>>,
}

impl FieldDescriptor {
    /// Declare a field. `table` holds `(derivation, generator, expression)`
    /// triples and must cover every pair. Commutativity of the derivations
    /// is verified on every generator before the descriptor is returned.
    pub fn declare(
        generators: &[&str],
        derivations: Vec<DerivationName>,
        table: &[(&str, &str, &str)],
    ) -> Result<Self, FieldError> {
        let mut seen = std::collections::BTreeSet::new();
        for n in generators
            .iter()
            .copied()
            .chain(derivations.iter().map(|d| d.name.as_str()))
        {
            if !seen.insert(n) {
                return Err(FieldError::DuplicateName(n.to_string()));
            }
        }
        let gens: Vec<Symbol> = generators
            .iter()
            .enumerate()
            .map(|(i, g)| Symbol::new(i as u32, g))
            .collect();
        let mut entries: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
        let scope = Scope::generators_only(&gens);
        for (d, g, src) in table {
            let k = derivations
                .iter()
                .position(|x| x.name == *d)
                .ok_or_else(|| FieldError::UnknownDerivation(d.to_string()))?;
            let i = gens
                .iter()
                .position(|x| x.name() == *g)
                .ok_or_else(|| FieldError::UndefinedSymbol(g.to_string()))?;
            let value = expr::parse(src, &scope).map_err(|e| match e {
                ParseError::UndefinedSymbol { name, .. } => FieldError::UndefinedSymbol(name),
                source => FieldError::Parse {
                    derivation: d.to_string(),
                    generator: g.to_string(),
                    source,
                },
            })?;
            entries.insert((k, i), value);
        }
        let mut rows = Vec::with_capacity(derivations.len());
        for (k, d) in derivations.iter().enumerate() {
            let mut row = Vec::with_capacity(gens.len());
            for (i, g) in gens.iter().enumerate() {
                let e = entries
                    .remove(&(k, i))
                    .ok_or_else(|| FieldError::MissingTableEntry {
                        derivation: d.name.clone(),
                        generator: g.name().to_string(),
                    })?;
                row.push(e);
            }
            rows.push(row);
        }
        let field = FieldDescriptor {
            gens,
            derivations,
            table: rows,
        };
        field.check_commutativity()?;
        Ok(field)
    }

    /// The field ℚ with the given derivations (all acting as zero).
    pub fn rationals(derivations: Vec<DerivationName>) -> Self {
        let n = derivations.len();
        FieldDescriptor {
            gens: Vec::new(),
            derivations,
            table: vec![Vec::new(); n],
        }
    }

    fn check_commutativity(&self) -> Result<(), FieldError> {
        for (i, g) in self.gens.iter().enumerate() {
            for k in 0..self.derivations.len() {
                for l in (k + 1)..self.derivations.len() {
                    let a = self.derive(k, &self.table[l][i]);
                    let b = self.derive(l, &self.table[k][i]);
                    let residual = &a - &b;
                    if !residual.is_zero() {
                        return Err(FieldError::NonCommutingTable {
                            generator: g.name().to_string(),
                            first: self.derivations[k].name.clone(),
                            second: self.derivations[l].name.clone(),
                            residual: expr::format_rat(&residual, self),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn generators(&self) -> &[Symbol] {
        &self.gens
    }

    pub fn generator(&self, name: &str) -> Option<&Symbol> {
        self.gens.iter().find(|g| g.name() == name)
    }

    pub fn derivations(&self) -> &[DerivationName] {
        &self.derivations
    }

    pub fn derivation_index(&self, name: &str) -> Option<usize> {
        self.derivations.iter().position(|d| d.name == name)
    }

    /// Indices of the `D_i`, in declaration order.
    pub fn outer(&self) -> Vec<usize> {
        self.class_indices(DerivationClass::Outer)
    }

    /// Indices of the `δ_j`, in declaration order.
    pub fn inner(&self) -> Vec<usize> {
        self.class_indices(DerivationClass::Inner)
    }

    fn class_indices(&self, c: DerivationClass) -> Vec<usize> {
        self.derivations
            .iter()
            .enumerate()
            .filter(|(_, d)| d.class == c)
            .map(|(k, _)| k)
            .collect()
    }

    /// Table entry for a generator.
    pub fn table_entry(&self, k: usize, gen: &Symbol) -> Option<&Rat> {
        let i = self.gens.iter().position(|g| g == gen)?;
        Some(&self.table[k][i])
    }

    /// Derivation `k` applied to a single variable.
    pub fn derive_var(&self, k: usize, v: &Var) -> Rat {
        match v {
            Var::Gen(g) => self
                .table_entry(k, g)
                .cloned()
                .unwrap_or_else(|| panic!("generator {g} not in field")),
            Var::Der(d) => Rat::var(Var::Der(d.derive(k))),
        }
    }

    /// Formal total derivative of a polynomial: coefficients through the
    /// table, `θx ↦ δθx`.
    pub fn derive_poly(&self, k: usize, p: &Poly) -> Rat {
        let mut poly_part = Poly::zero();
        let mut frac_part = Rat::zero();
        for v in p.vars() {
            let dp = p.partial(&v);
            let dv = self.derive_var(k, &v);
            match dv.as_poly() {
                Some(q) => poly_part = &poly_part + &(&dp * q),
                None => frac_part = &frac_part + &(&Rat::from_poly(dp) * &dv),
            }
        }
        &Rat::from_poly(poly_part) + &frac_part
    }

    /// Formal total derivative of a fraction (quotient rule).
    pub fn derive(&self, k: usize, r: &Rat) -> Rat {
        let (n, d) = (r.numer(), r.denom());
        if d.is_one() {
            return self.derive_poly(k, n);
        }
        let dn = self.derive_poly(k, n);
        let dd = self.derive_poly(k, d);
        let top = &(&dn * &Rat::from_poly(d.clone())) - &(&Rat::from_poly(n.clone()) * &dd);
        let den2 = Rat::new(Poly::one(), d.pow(2)).expect("nonzero denominator");
        &top * &den2
    }

    /// Apply a derivative operator `θ`.
    pub fn derive_multi(&self, ops: &MultiIndex, r: &Rat) -> Rat {
        let mut out = r.clone();
        for (k, e) in ops.powers() {
            for _ in 0..e {
                out = self.derive(k, &out);
            }
        }
        out
    }

    /// Derivative of a coefficient-field element, by derivation name.
    pub fn coeff_derive(&self, name: &str, a: &FieldElement) -> Result<FieldElement, FieldError> {
        let k = self
            .derivation_index(name)
            .ok_or_else(|| FieldError::UnknownDerivation(name.to_string()))?;
        Ok(FieldElement(self.derive(k, a.as_rat())))
    }

    /// Parse an expression in the generators only.
    pub fn element(&self, src: &str) -> Result<FieldElement, FieldError> {
        let r = expr::parse(src, &Scope::new(self, &[])).map_err(|e| match e {
            ParseError::UndefinedSymbol { name, .. } => FieldError::UndefinedSymbol(name),
            source => FieldError::Parse {
                derivation: String::new(),
                generator: String::new(),
                source,
            },
        })?;
        FieldElement::new(r)
    }

    pub fn show(&self, r: &Rat) -> String {
        expr::format_rat(r, self)
    }
}

impl fmt::Display for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.gens.iter().map(Symbol::name).collect();
        write!(f, "Q({})", names.join(", "))
    }
}
