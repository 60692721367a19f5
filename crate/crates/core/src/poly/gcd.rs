//! Multivariate gcd over ℚ by recursive primitive remainder sequences.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Monomial, Poly, Var};

/// Exact quotient `a / b`, or `None` if `b` does not divide `a`.
pub fn div_exact(a: &Poly, b: &Poly) -> Option<Poly> {
    let (lm, lc) = b.leading_term()?;
    let (lm, lc) = (lm.clone(), lc.clone());
    let mut rem = a.clone();
    let mut quot = Poly::zero();
    while let Some((m, c)) = rem.leading_term() {
        let qm = m.div(&lm)?;
        let qc = c / &lc;
        rem = &rem - &b.mul_monomial(&qm, &qc);
        quot.add_term(qm, qc);
    }
    Some(quot)
}

/// Greatest common divisor, normalized to leading coefficient one.
/// `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.monic();
    }
    if a.num_terms() == 1 || b.num_terms() == 1 {
        return monomial_gcd(a, b);
    }
    let ma = monomial_content(a);
    let mb = monomial_content(b);
    let m = ma.gcd(&mb);
    let a = strip_monomial(a, &ma);
    let b = strip_monomial(b, &mb);
    let g = gcd_core(&a, &b);
    g.mul_monomial(&m, &BigRational::one()).monic()
}

/// Both inputs are nonconstant and free of monomial factors.
fn gcd_core(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() || a.num_terms() == 1 || b.num_terms() == 1 {
        return Poly::one();
    }
    if a == b {
        return a.monic();
    }
    let (small, big) = if a.num_terms() <= b.num_terms() {
        (a, b)
    } else {
        (b, a)
    };
    if div_exact(big, small).is_some() {
        return small.monic();
    }
    let va = a.vars();
    let vb = b.vars();
    // Variables whose image gcd has positive degree; any variable of the
    // true gcd is among them.
    let support: BTreeSet<Var> = va
        .intersection(&vb)
        .filter(|v| image_gcd_degree(a, b, v) > 0)
        .cloned()
        .collect();
    if support.is_empty() {
        return Poly::one();
    }
    if va.union(&vb).any(|v| !support.contains(v)) {
        let mut parts: Vec<Poly> = blocks(a, &support);
        parts.extend(blocks(b, &support));
        parts.sort_by_key(|p| p.num_terms());
        let mut g = parts[0].clone();
        for c in &parts[1..] {
            g = gcd(&g, c);
            if g.is_constant() {
                return Poly::one();
            }
        }
        return g.monic();
    }
    let v = support
        .iter()
        .min_by_key(|v| a.degree_in(v).max(b.degree_in(v)))
        .expect("nonempty support")
        .clone();
    let ca = content(a, &v);
    let cb = content(b, &v);
    let c = gcd(&ca, &cb);
    let pa = div_exact(a, &ca).expect("content divides");
    let pb = div_exact(b, &cb).expect("content divides");
    let g = prs_gcd(pa, pb, &v);
    (&c * &g).monic()
}

fn monomial_content(p: &Poly) -> Monomial {
    let mut it = p.terms().map(|(m, _)| m);
    let first = it.next().cloned().unwrap_or_else(Monomial::one);
    it.fold(first, |acc, m| acc.gcd(m))
}

fn strip_monomial(p: &Poly, m: &Monomial) -> Poly {
    if m.is_one() {
        return p.clone();
    }
    let mut out = Poly::zero();
    for (t, c) in p.terms() {
        out.add_term(t.div(m).expect("monomial content divides"), c.clone());
    }
    out
}

/// Coefficients of `p` viewed as a polynomial in the variables outside
/// `support`; each is a polynomial in `support` only.
fn blocks(p: &Poly, support: &BTreeSet<Var>) -> Vec<Poly> {
    let mut by_key: BTreeMap<Monomial, Poly> = BTreeMap::new();
    for (m, c) in p.terms() {
        let (inside, outside): (Vec<_>, Vec<_>) = m
            .factors()
            .iter()
            .cloned()
            .partition(|(v, _)| support.contains(v));
        by_key
            .entry(Monomial(outside))
            .or_insert_with(Poly::zero)
            .add_term(Monomial(inside), c.clone());
    }
    by_key.into_values().collect()
}

/// Degree in `v` of the gcd of univariate images obtained by evaluating
/// every other variable at integers. Evaluation points where a leading
/// coefficient vanishes are skipped, so the result bounds the degree in
/// `v` of the true gcd from above.
fn image_gcd_degree(a: &Poly, b: &Poly, v: &Var) -> usize {
    let (da, db) = (a.degree_in(v) as usize, b.degree_in(v) as usize);
    let fallback = da.min(db);
    let others: Vec<Var> = a
        .vars()
        .union(&b.vars())
        .filter(|w| *w != v)
        .cloned()
        .collect();
    let mut best = fallback;
    let mut good = 0;
    for attempt in 0u64..6 {
        let point: BTreeMap<&Var, BigRational> = others
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let n = (k as u64 * 7919 + attempt * 104_729 + 13) % 89 + 2;
                (w, BigRational::from_integer(BigInt::from(n)))
            })
            .collect();
        let ia = eval_univariate(a, v, &point);
        let ib = eval_univariate(b, v, &point);
        if ia.len() != da + 1 || ib.len() != db + 1 {
            continue;
        }
        best = best.min(univariate_gcd_degree(ia, ib));
        good += 1;
        if best == 0 || good == 2 {
            break;
        }
    }
    best
}

fn eval_univariate(p: &Poly, v: &Var, point: &BTreeMap<&Var, BigRational>) -> Vec<BigRational> {
    let mut out: Vec<BigRational> = vec![BigRational::zero(); p.degree_in(v) as usize + 1];
    for (m, c) in p.terms() {
        let mut val = c.clone();
        let mut e_v = 0usize;
        for (w, e) in m.factors() {
            if w == v {
                e_v = *e as usize;
            } else {
                val *= point[w].pow(*e as i32);
            }
        }
        out[e_v] += val;
    }
    while out.len() > 1 && out.last().is_some_and(|c| c.is_zero()) {
        out.pop();
    }
    if out.len() == 1 && out[0].is_zero() {
        out.clear();
    }
    out
}

fn univariate_gcd_degree(mut a: Vec<BigRational>, mut b: Vec<BigRational>) -> usize {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        // a mod b
        let lb = b.last().expect("nonempty").clone();
        while a.len() >= b.len() {
            let q = a.last().expect("nonempty") / &lb;
            let shift = a.len() - b.len();
            for (i, c) in b.iter().enumerate() {
                let t = &q * c;
                a[i + shift] -= t;
            }
            a.pop();
            while a.last().is_some_and(|c| c.is_zero()) {
                a.pop();
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

fn monomial_gcd(a: &Poly, b: &Poly) -> Poly {
    let mut it = a.terms().chain(b.terms()).map(|(m, _)| m.clone());
    let first = it.next().unwrap_or_else(Monomial::one);
    let m = it.fold(first, |acc, m| acc.gcd(&m));
    Poly::term(m, BigRational::one())
}

/// Content with respect to `v`: gcd of the coefficients.
fn content(p: &Poly, v: &Var) -> Poly {
    let mut g = Poly::zero();
    for c in p.univariate(v) {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, &c);
        if g.is_constant() {
            return Poly::one();
        }
    }
    g
}

fn primitive_part(p: &Poly, v: &Var) -> Poly {
    let c = content(p, v);
    div_exact(p, &c)
        .expect("content divides")
        .numeric_primitive()
}

fn prem(a: &Poly, b: &Poly, v: &Var) -> Poly {
    let db = b.degree_in(v);
    let lb = b.coeff_of(v, db);
    let mut r = a.clone();
    loop {
        let dr = r.degree_in(v);
        if r.is_zero() || dr < db {
            return r;
        }
        let lr = r.coeff_of(v, dr);
        let shift = Poly::term(Monomial::var(v.clone(), dr - db), BigRational::one());
        r = &(&lb * &r) - &(&(&lr * &shift) * b);
    }
}

fn prs_gcd(a: Poly, b: Poly, v: &Var) -> Poly {
    let (mut a, mut b) = if a.degree_in(v) >= b.degree_in(v) {
        (a, b)
    } else {
        (b, a)
    };
    loop {
        let r = prem(&a, &b, v);
        if r.is_zero() {
            return primitive_part(&b, v);
        }
        if r.degree_in(v) == 0 {
            return Poly::one();
        }
        a = b;
        b = primitive_part(&r, v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Symbol;

    fn gen(i: u32, n: &str) -> Poly {
        Poly::var(Var::Gen(Symbol::new(i, n)))
    }

    #[test]
    fn difference_of_squares() {
        let (t, w) = (gen(0, "t"), gen(1, "w"));
        let a = &(&t * &t) - &(&w * &w);
        let b = &t - &w;
        assert_eq!(gcd(&a, &b), b.monic());
        assert_eq!(div_exact(&a, &b).unwrap(), &t + &w);
    }

    #[test]
    fn coprime_is_one() {
        let (t, w) = (gen(0, "t"), gen(1, "w"));
        let a = &(&t * &t) + &Poly::one();
        let b = &(&t * &w) + &Poly::one();
        assert!(gcd(&a, &b).is_one());
    }

    #[test]
    fn common_multivariate_factor() {
        let (t, w, e) = (gen(0, "t"), gen(1, "w"), gen(2, "E"));
        let f = &(&t * &w) + &e;
        let a = &f * &(&t + &Poly::from_int(2));
        let b = &f * &(&(&w * &w) - &e);
        assert_eq!(gcd(&a, &b), f.monic());
    }

    #[test]
    fn inexact_division_fails() {
        let (t, w) = (gen(0, "t"), gen(1, "w"));
        assert!(div_exact(&t, &w).is_none());
        assert!(div_exact(&(&t + &Poly::one()), &t).is_none());
    }
}
