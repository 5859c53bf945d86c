//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use alpred::alp::{Constraint, LinearForm, Relation, VarId};
use alpred::kfield::{Poly, RatFn};
use alpred::normalizer::Normalized;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn poly(c: &[i64]) -> RatFn {
    RatFn::from_poly(Poly::from_ints(c))
}

pub fn random_poly(rng: &mut impl Rng, max_deg: usize) -> Poly {
    let deg = rng.gen_range(0..=max_deg);
    Poly::new((0..=deg).map(|_| q(rng.gen_range(-6..=6), rng.gen_range(1..=4))).collect())
}

/// A random element of Q(K) with numerator and denominator degree at most
/// `max_deg`.
pub fn random_ratfn(rng: &mut impl Rng, max_deg: usize) -> RatFn {
    loop {
        let den = random_poly(rng, max_deg);
        if !den.is_zero() {
            return RatFn::new(random_poly(rng, max_deg), den).unwrap();
        }
    }
}

/// `x(1-x)/((k+2i-1)(k+2i)(k+2i-x))` with plain rationals.
pub fn residual_at(x: &BigRational, i: usize, k: &BigRational) -> BigRational {
    let one = q(1, 1);
    let two_i = q(2 * i as i64, 1);
    x * (&one - x) / ((k + &two_i - &one) * (k + &two_i) * (k + &two_i - x))
}

/// Closed-form Cauchy determinant of `[1/(a_s + b_j)]`.
pub fn cauchy_closed_form(a: &[BigInt], b: &[BigInt]) -> BigRational {
    let n = a.len();
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..n {
        for j in 0..n {
            if i < j {
                num *= (&a[j] - &a[i]) * (&b[j] - &b[i]);
            }
            den *= &a[i] + &b[j];
        }
    }
    BigRational::new(num, den)
}

fn rename(c: &Constraint, names: &BTreeMap<VarId, VarId>) -> String {
    let map = |f: &LinearForm| {
        let mut out = LinearForm::constant(f.constant_term().clone());
        for (v, a) in f.terms() {
            out.add_term(names.get(v).cloned().unwrap_or_else(|| v.clone()), a.clone());
        }
        out
    };
    Constraint::new(map(&c.lhs), c.rel, map(&c.rhs)).to_string()
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else { return false };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Whether the rewritten constraints equal `want` as a set, for some
/// bijection of auxiliary names onto `want_aux`.
pub fn same_up_to_renaming(got: &Normalized, want: &[Constraint], want_aux: &[&str]) -> bool {
    let aux: Vec<VarId> = got.provenance.keys().cloned().collect();
    if aux.len() != want_aux.len() || got.instance.constraints.len() != want.len() {
        return false;
    }
    let want: BTreeSet<String> = want.iter().map(|c| c.to_string()).collect();
    let mut perm: Vec<usize> = (0..aux.len()).collect();
    loop {
        let names = aux.iter().zip(&perm).map(|(a, &j)| (a.clone(), VarId::new(want_aux[j]))).collect();
        let have: BTreeSet<String> = got.instance.constraints.iter().map(|c| rename(c, &names)).collect();
        if have == want {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

/// `(3K^2 + 2K + 5) x <= 7/K` and its hand rewrite.
pub fn quadratic_example() -> (Constraint, Vec<Constraint>, Vec<&'static str>) {
    let input = Constraint::new(
        LinearForm::term("x", poly(&[5, 2, 3])),
        Relation::Le,
        LinearForm::constant(RatFn::int(7).checked_div(&RatFn::k()).unwrap()),
    );
    let v = LinearForm::var;
    let t = |name: &str, c: RatFn| LinearForm::term(name, c);
    let want = vec![
        Constraint::new(t("y0", RatFn::k()), Relation::Le, LinearForm::constant(RatFn::int(7))),
        Constraint::eq(v("y0"), v("y1").with_term("y2", RatFn::one()).with_term("y3", RatFn::one())),
        Constraint::eq(v("y1"), t("y11", poly(&[0, 3]))),
        Constraint::eq(v("y11"), t("x", RatFn::k())),
        Constraint::eq(v("y2"), t("x", poly(&[0, 2]))),
        Constraint::eq(v("y3"), t("x", RatFn::int(5))),
    ];
    (input, want, vec!["y0", "y1", "y2", "y3", "y11"])
}

/// `y2 = 2K x` and its hand rewrite.
pub fn two_k_example() -> (Constraint, Vec<Constraint>, Vec<&'static str>) {
    let input = Constraint::eq(LinearForm::var("y2"), LinearForm::term("x", poly(&[0, 2])));
    let want = vec![
        Constraint::eq(LinearForm::var("y2"), LinearForm::term("z1", RatFn::k()).with_term("z2", RatFn::k())),
        Constraint::eq(LinearForm::var("x"), LinearForm::var("z1")),
        Constraint::eq(LinearForm::var("x"), LinearForm::var("z2")),
    ];
    (input, want, vec!["z1", "z2"])
}
