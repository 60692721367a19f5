//! Numerical polynomials in the binomial basis and dimension polynomials of
//! leader sets.
//!
//! For an antichain `L ⊂ ℕ^m` of leaders of one indeterminate, the number of
//! multi-indices of order `≤ h` outside every cone `ℓ + ℕ^m` is
//!
//! ```text
//! Σ_{S ⊆ L} (−1)^{|S|} · C(h − |∨S| + m, m)
//! ```
//!
//! where `∨S` is the componentwise maximum and a term with `h < |∨S|` is 0.
//! Read as a polynomial in `h` (no truncation) the sum is the Kolchin
//! polynomial; the two agree once `h ≥ max_S |∨S| − m`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::poly::Symbol;
use crate::reduce::AutoreducedSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KolchinError {
    #[error("multi-index {index:?} has length {found}, expected {expected}")]
    Length {
        index: Vec<u32>,
        expected: usize,
        found: usize,
    },
    #[error("leader `{0}` is not one of the coordinates")]
    ForeignLeader(String),
    #[error("leader `{0}` uses a derivation outside the inner set")]
    OuterLeader(String),
}

/// Generalized binomial `C(x, k)` for any integer `x`.
pub fn binomial(x: &BigInt, k: u32) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= x - BigInt::from(i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// `Σ d_i · C(h + i, i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct NumericalPolynomial {
    /// `coeffs[i] = d_i`, without trailing zeros.
    coeffs: Vec<BigInt>,
}

impl NumericalPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        NumericalPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        NumericalPolynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: i64) -> Self {
        NumericalPolynomial::new(vec![BigInt::from(c)])
    }

    /// Recover the basis coefficients of a polynomial of degree `≤ m` from
    /// its values at `h = −1, …, −(m+1)`. At `h = −k` every `C(h+i, i)` with
    /// `i ≥ k` vanishes, so the system is triangular.
    pub fn interpolate(m: usize, value: impl Fn(&BigInt) -> BigInt) -> Self {
        let mut coeffs: Vec<BigInt> = Vec::with_capacity(m + 1);
        for k in 1..=(m + 1) {
            let h = BigInt::from(-(k as i64));
            let mut rest = value(&h);
            for (i, d) in coeffs.iter().enumerate() {
                rest -= d * binomial(&(&h + BigInt::from(i)), i as u32);
            }
            // C(−1, k−1) = (−1)^{k−1}
            let pivot = binomial(&BigInt::from(-1), (k - 1) as u32);
            coeffs.push(rest / pivot);
        }
        NumericalPolynomial::new(coeffs)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree in `h`; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading_coefficient(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn eval(&self, h: i64) -> BigInt {
        let h = BigInt::from(h);
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, d)| d * binomial(&(&h + BigInt::from(i)), i as u32))
            .sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[BigInt], i: usize| v.get(i).cloned().unwrap_or_default();
        NumericalPolynomial::new(
            (0..n)
                .map(|i| get(&self.coeffs, i) + get(&other.coeffs, i))
                .collect(),
        )
    }

    /// `(type, typical dimension)`: degree and leading coefficient, with
    /// `(0, 0)` for the zero polynomial.
    pub fn type_and_dim(&self) -> (usize, BigInt) {
        (self.degree(), self.leading_coefficient())
    }
}

/// Order by eventual domination: compare the coefficient of the highest
/// basis element first.
impl Ord for NumericalPolynomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[BigInt], i: usize| v.get(i).cloned().unwrap_or_default();
        for i in (0..n).rev() {
            match get(&self.coeffs, i).cmp(&get(&other.coeffs, i)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for NumericalPolynomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NumericalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, d) in self.coeffs.iter().enumerate().rev() {
            if d.is_zero() {
                continue;
            }
            let a = d.abs();
            if first {
                if d.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if d.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            match (i, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (_, true) => write!(f, "C(h+{i},{i})")?,
                (_, false) => write!(f, "{a}*C(h+{i},{i})")?,
            }
        }
        Ok(())
    }
}

/// Leaders of a characteristic set: for each indeterminate an antichain in
/// `ℕ^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeaderSet {
    m: usize,
    per_indet: Vec<Vec<Vec<u32>>>,
}

fn dominates(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

impl LeaderSet {
    /// Dominated entries and duplicates are dropped.
    pub fn new(m: usize, per_indet: Vec<Vec<Vec<u32>>>) -> Result<Self, KolchinError> {
        let mut out = Vec::with_capacity(per_indet.len());
        for leaders in per_indet {
            for l in &leaders {
                if l.len() != m {
                    return Err(KolchinError::Length {
                        index: l.clone(),
                        expected: m,
                        found: l.len(),
                    });
                }
            }
            let mut kept: Vec<Vec<u32>> = Vec::new();
            for (i, l) in leaders.iter().enumerate() {
                let dominated = leaders
                    .iter()
                    .enumerate()
                    .any(|(j, o)| j != i && dominates(l, o) && (l != o || j < i));
                if !dominated {
                    kept.push(l.clone());
                }
            }
            kept.sort();
            out.push(kept);
        }
        Ok(LeaderSet { m, per_indet: out })
    }

    /// `n` indeterminates with no leaders.
    pub fn free(m: usize, n: usize) -> Self {
        LeaderSet {
            m,
            per_indet: vec![Vec::new(); n],
        }
    }

    pub fn derivations(&self) -> usize {
        self.m
    }

    pub fn indeterminates(&self) -> usize {
        self.per_indet.len()
    }

    pub fn leaders(&self) -> &[Vec<Vec<u32>>] {
        &self.per_indet
    }

    pub fn max_order(&self) -> u32 {
        self.per_indet
            .iter()
            .flatten()
            .map(|l| l.iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Smallest `h ≥ 0` from which [`dim_poly`] agrees with the count.
    pub fn stability_threshold(&self) -> u32 {
        let mut worst = 0i64;
        for_each_join(self, |_, order, _| {
            worst = worst.max(order as i64 - self.m as i64);
        });
        worst.max(0) as u32
    }

    /// Leaders of an autoreduced set, restricted to the given derivation
    /// positions (in that order).
    pub fn from_autoreduced(
        set: &AutoreducedSet,
        coords: &[Symbol],
        derivations: &[usize],
    ) -> Result<Self, KolchinError> {
        let mut per: Vec<Vec<Vec<u32>>> = vec![Vec::new(); coords.len()];
        for l in set.leaders() {
            let i = coords
                .iter()
                .position(|c| *c == l.indet)
                .ok_or_else(|| KolchinError::ForeignLeader(l.to_string()))?;
            if l.ops.powers().any(|(k, _)| !derivations.contains(&k)) {
                return Err(KolchinError::OuterLeader(l.to_string()));
            }
            per[i].push(derivations.iter().map(|&k| l.ops.get(k) as u32).collect());
        }
        LeaderSet::new(derivations.len(), per)
    }
}

/// Visit every subset `S` of each indeterminate's leaders with its sign,
/// `|∨S|` and size.
fn for_each_join(l: &LeaderSet, mut f: impl FnMut(i64, u32, usize)) {
    for leaders in &l.per_indet {
        let k = leaders.len();
        for mask in 0u64..(1u64 << k) {
            let mut join = vec![0u32; l.m];
            let mut size = 0;
            for (b, lead) in leaders.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    size += 1;
                    for (j, e) in lead.iter().enumerate() {
                        join[j] = join[j].max(*e);
                    }
                }
            }
            let sign = if size % 2 == 0 { 1 } else { -1 };
            f(sign, join.iter().sum(), size);
        }
    }
}

/// Inclusion–exclusion count with truncated binomials; exact for every `h`.
pub fn inclusion_exclusion_count(l: &LeaderSet, h: u32) -> BigInt {
    let m = l.m as u32;
    let mut total = BigInt::zero();
    for_each_join(l, |sign, order, _| {
        if h >= order {
            total += BigInt::from(sign) * binomial(&BigInt::from(h - order + m), m);
        }
    });
    total
}

/// The Kolchin polynomial of a leader set.
pub fn dim_poly(l: &LeaderSet) -> NumericalPolynomial {
    let m = l.m as u32;
    let mut joins = Vec::new();
    for_each_join(l, |sign, order, _| joins.push((sign, order)));
    NumericalPolynomial::interpolate(l.m, |h| {
        joins
            .iter()
            .map(|(sign, order)| {
                BigInt::from(*sign) * binomial(&(h - BigInt::from(*order) + BigInt::from(m)), m)
            })
            .sum()
    })
}

/// Multi-indices of order `≤ h` outside all leader cones, by enumeration.
pub fn brute_force_count(l: &LeaderSet, h: u32) -> BigInt {
    let mut total = BigInt::zero();
    let mut e = vec![0u32; l.m];
    for leaders in &l.per_indet {
        total += BigInt::from(count_free(leaders, &mut e, 0, h));
    }
    total
}

fn count_free(leaders: &[Vec<u32>], e: &mut Vec<u32>, pos: usize, budget: u32) -> u64 {
    if pos == e.len() {
        return u64::from(!leaders.iter().any(|l| dominates(e, l)));
    }
    let mut n = 0;
    for v in 0..=budget {
        e[pos] = v;
        n += count_free(leaders, e, pos + 1, budget - v);
    }
    e[pos] = 0;
    n
}

/// Comparison of the sharp-point polynomial with `ω_V(μh)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharpBoundReport {
    pub sharp: NumericalPolynomial,
    pub variety: NumericalPolynomial,
    pub mu: u32,
    /// `(h, ω_sharp(h), ω_V(μh))` for `h = 0..=H`, by enumeration.
    pub rows: Vec<(u32, BigInt, BigInt)>,
    pub bound_holds: bool,
    pub types_agree: bool,
}

impl SharpBoundReport {
    pub fn passed(&self) -> bool {
        self.bound_holds && self.types_agree
    }
}

/// Leaders of the sharp system: those of `V` (over the inner derivations)
/// together with every outer derivative of order one, in the coordinates
/// `outer ++ inner`.
pub fn sharp_leaders(variety: &LeaderSet, outer: usize) -> LeaderSet {
    let m = outer + variety.m;
    let per = variety
        .per_indet
        .iter()
        .map(|leaders| {
            let mut v: Vec<Vec<u32>> = (0..outer)
                .map(|i| {
                    let mut u = vec![0; m];
                    u[i] = 1;
                    u
                })
                .collect();
            for l in leaders {
                let mut u = vec![0; outer];
                u.extend(l.iter().cloned());
                v.push(u);
            }
            v
        })
        .collect();
    LeaderSet::new(m, per).expect("lengths are consistent")
}

/// `ω_sharp(h) ≤ ω_V(μh)` for `h = 0..=max_h`, and equal types.
pub fn sharp_bound_check(
    variety: &LeaderSet,
    outer: usize,
    mu: u32,
    max_h: u32,
) -> SharpBoundReport {
    let sharp_set = sharp_leaders(variety, outer);
    let sharp = dim_poly(&sharp_set);
    let vp = dim_poly(variety);
    let rows: Vec<(u32, BigInt, BigInt)> = (0..=max_h)
        .map(|h| {
            (
                h,
                brute_force_count(&sharp_set, h),
                brute_force_count(variety, mu * h),
            )
        })
        .collect();
    let bound_holds = rows.iter().all(|(_, s, v)| s <= v);
    let types_agree = sharp.degree() == vp.degree();
    SharpBoundReport {
        sharp,
        variety: vp,
        mu,
        rows,
        bound_holds,
        types_agree,
    }
}
