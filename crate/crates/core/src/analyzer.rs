//! Exact checks of the binarity gadget and desk-scale deciders for the
//! reduced problem.
//!
//! The verdict uses limit semantics: the `K^3`-scaled objective tends to
//! `sum x_i (1 - x_i)`, so "minimum zero" means this limit is zero at some
//! point of `{A x = c, 0 <= x <= 1}`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::alp::{AlpInstance, VarId};
use crate::instance::{BinaryAssignment, BinaryLinearSystem};
use crate::kfield::{KFieldError, Limit, Poly, RatFn};
use crate::reducer;

pub const BINARY_ENUMERATION_CAP: usize = 24;
pub const VERTEX_ENUMERATION_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyzerError {
    #[error("need at least {needed} distinct samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample {0} is repeated")]
    RepeatedSample(BigRational),
    #[error("sample {0} is out of range: {1}")]
    SampleOutOfRange(BigRational, &'static str),
    #[error("{what} over {n} variables exceeds the cap of {cap}; use a smaller instance or raise the cap")]
    CapExceeded { what: &'static str, n: usize, cap: usize },
    #[error("assignment has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("coordinate {0} lies outside [0, 1]")]
    NotInUnitInterval(BigRational),
    #[error("limit paths disagree: {via_field} via the field, {direct} directly")]
    LimitMismatch { via_field: String, direct: String },
    #[error(transparent)]
    Field(#[from] KFieldError),
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

/// The two sides of the gadget identity at index `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetValues {
    pub i: usize,
    /// `x/(K+2i-1) + (1-x)/(K+2i)`.
    pub y: RatFn,
    /// `1/(K+2i-x)`.
    pub z: RatFn,
}

impl GadgetValues {
    pub fn residual(&self) -> RatFn {
        &self.y - &self.z
    }
}

pub fn gadget_values(x: &BigRational, i: usize) -> GadgetValues {
    let xf = RatFn::constant(x.clone());
    let one_minus = RatFn::constant(BigRational::one() - x);
    let p = reducer::p_pin(i);
    let q = reducer::q_pin(i);
    let r = reducer::r_pin(i, x);
    let y = &(&xf / &p) + &(&one_minus / &q);
    let z = RatFn::one() / r;
    GadgetValues { i, y, z }
}

/// `x(1-x) / ((K+2i-1)(K+2i)(K+2i-x))`.
pub fn gadget_residual_closed_form(x: &BigRational, i: usize) -> RatFn {
    let two_i = int(2 * i as i64);
    let den = &(&Poly::k_plus(&two_i - int(1)) * &Poly::k_plus(two_i.clone())) * &Poly::k_plus(&two_i - x);
    let num = Poly::constant(x * (BigRational::one() - x));
    RatFn::new(num, den).expect("nonzero denominator")
}

fn distinct(samples: &[BigRational]) -> Result<BTreeSet<&BigRational>, AnalyzerError> {
    let mut seen = BTreeSet::new();
    for s in samples {
        if !seen.insert(s) {
            return Err(AnalyzerError::RepeatedSample(s.clone()));
        }
    }
    Ok(seen)
}

/// Number of distinct `x` samples the identity test needs.
pub const GADGET_MIN_SAMPLES: usize = 4;

/// Checks the gadget identity at index `i` by sampling `x` with `K` kept
/// symbolic: the residual matches the closed form everywhere, and vanishes
/// exactly at the samples 0 and 1.
pub fn gadget_identity_check(i: usize, x_samples: &[BigRational]) -> Result<bool, AnalyzerError> {
    let set = distinct(x_samples)?;
    if set.len() < GADGET_MIN_SAMPLES {
        return Err(AnalyzerError::TooFewSamples { needed: GADGET_MIN_SAMPLES, got: set.len() });
    }
    if let Some(bad) = set.iter().find(|x| x.is_negative() || **x > &BigRational::one()) {
        return Err(AnalyzerError::SampleOutOfRange((*bad).clone(), "must lie in [0, 1]"));
    }
    Ok(set.into_iter().all(|x| {
        let res = gadget_values(x, i).residual();
        let binary = x.is_zero() || x.is_one();
        res == gadget_residual_closed_form(x, i) && res.is_zero() == binary
    }))
}

/// Determinant of `[1/(k_s + j)]` for `s, j = 1..=n`, by fraction-free
/// elimination after clearing each row's denominators.
pub fn cauchy_determinant(k_samples: &[BigRational]) -> Result<BigRational, AnalyzerError> {
    distinct(k_samples)?;
    let n = k_samples.len();
    let mut scale = BigRational::one();
    let mut m: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for k in k_samples {
        if !k.is_positive() {
            return Err(AnalyzerError::SampleOutOfRange(k.clone(), "must be positive"));
        }
        let row: Vec<BigRational> = (1..=n).map(|j| (k + int(j as i64)).recip()).collect();
        let l = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let lr = BigRational::from_integer(l);
        m.push(row.iter().map(|v| (v * &lr).to_integer()).collect());
        scale *= lr;
    }
    Ok(BigRational::from_integer(bareiss_determinant(m)) / scale)
}

fn bareiss_determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Injectivity of `x -> sum x_j/(K+j)` over `n` coordinates, via
/// nonsingularity of the sampled Cauchy matrix.
pub fn uniqueness_check(n: usize, k_samples: &[BigRational]) -> Result<bool, AnalyzerError> {
    if k_samples.len() != n {
        return Err(AnalyzerError::TooFewSamples { needed: n, got: k_samples.len() });
    }
    Ok(!cauchy_determinant(k_samples)?.is_zero())
}

fn check_assignment(n: usize, a: &[BigRational]) -> Result<(), AnalyzerError> {
    if a.len() != n {
        return Err(AnalyzerError::LengthMismatch { expected: n, got: a.len() });
    }
    match a.iter().find(|x| x.is_negative() || **x > BigRational::one()) {
        Some(x) => Err(AnalyzerError::NotInUnitInterval(x.clone())),
        None => Ok(()),
    }
}

/// The reduced objective at `x = a` with the pinned `p, q, r` substituted.
pub fn objective_value(n: usize, a: &[BigRational]) -> Result<RatFn, AnalyzerError> {
    check_assignment(n, a)?;
    let mut inst = AlpInstance::new(Vec::<VarId>::new());
    inst.objective_scale = reducer::objective_scale();
    inst.objective_terms = reducer::objective_terms(n);
    let values = reducer::extend_assignment(a);
    Ok(inst.objective_value(&values).expect("every variable is assigned")?)
}

/// `sum a_i (1 - a_i)`.
pub fn limit_objective(a: &[BigRational]) -> BigRational {
    a.iter().map(|x| x * (BigRational::one() - x)).sum()
}

/// Limit of [`objective_value`] as `K` grows, computed through the field
/// and checked against [`limit_objective`].
pub fn objective_limit(n: usize, a: &[BigRational]) -> Result<BigRational, AnalyzerError> {
    let via_field = objective_value(n, a)?.limit_at_infinity();
    let direct = limit_objective(a);
    match via_field {
        Limit::Finite(v) if v == direct => Ok(v),
        other => Err(AnalyzerError::LimitMismatch { via_field: format!("{other:?}"), direct: direct.to_string() }),
    }
}

pub fn binary_feasibility_oracle(sys: &BinaryLinearSystem) -> Result<Option<BinaryAssignment>, AnalyzerError> {
    binary_feasibility_oracle_with_cap(sys, BINARY_ENUMERATION_CAP)
}

/// Exhaustive search in lexicographic order, `b_1` most significant, so the
/// witness returned is the lexicographically smallest.
pub fn binary_feasibility_oracle_with_cap(
    sys: &BinaryLinearSystem,
    cap: usize,
) -> Result<Option<BinaryAssignment>, AnalyzerError> {
    let n = sys.num_vars();
    if n > cap {
        return Err(AnalyzerError::CapExceeded { what: "binary enumeration", n, cap });
    }
    let mut b = vec![0u8; n];
    for mask in 0u64..(1u64 << n) {
        for (j, bit) in b.iter_mut().enumerate() {
            *bit = ((mask >> (n - 1 - j)) & 1) as u8;
        }
        if sys.satisfied_by(&b) {
            return Ok(Some(BinaryAssignment::new(b).expect("0/1 entries")));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolytopeMin {
    /// `{A x = c, 0 <= x <= 1}` has no point.
    Empty,
    Attained {
        min: BigRational,
        /// Lexicographically smallest minimizing vertex.
        argmin: Vec<BigRational>,
        vertex_count: usize,
    },
}

pub fn polytope_min_oracle(sys: &BinaryLinearSystem) -> Result<PolytopeMin, AnalyzerError> {
    polytope_min_oracle_with_cap(sys, VERTEX_ENUMERATION_CAP)
}

/// Minimizes the concave `sum x_i (1 - x_i)` over all vertices of the
/// polytope. A vertex is determined by a set `F` of coordinates whose columns
/// of `A` are independent, with every other coordinate at 0 or 1.
pub fn polytope_min_oracle_with_cap(sys: &BinaryLinearSystem, cap: usize) -> Result<PolytopeMin, AnalyzerError> {
    let vertices = enumerate_vertices(sys, cap)?;
    let mut best: Option<(BigRational, &Vec<BigRational>)> = None;
    for v in &vertices {
        let f = limit_objective(v);
        if best.as_ref().is_none_or(|(b, _)| f < *b) {
            best = Some((f, v));
        }
    }
    Ok(match best {
        None => PolytopeMin::Empty,
        Some((min, argmin)) => PolytopeMin::Attained { min, argmin: argmin.clone(), vertex_count: vertices.len() },
    })
}

/// All vertices of `{A x = c, 0 <= x <= 1}` in lexicographic order.
pub fn enumerate_vertices(sys: &BinaryLinearSystem, cap: usize) -> Result<BTreeSet<Vec<BigRational>>, AnalyzerError> {
    let n = sys.num_vars();
    if n > cap {
        return Err(AnalyzerError::CapExceeded { what: "vertex enumeration", n, cap });
    }
    let m = sys.num_equations();
    let a: Vec<Vec<i64>> = sys.rows().iter().map(|r| r.iter().map(|&v| v.into()).collect()).collect();
    let c: Vec<i64> = sys.rhs().iter().map(|&v| v.into()).collect();
    let mut out = BTreeSet::new();
    for free_mask in 0u32..(1u32 << n) {
        let free: Vec<usize> = (0..n).filter(|j| free_mask >> j & 1 == 1).collect();
        if free.len() > m {
            continue;
        }
        let Some(t) = left_inverse(&a, &free) else { continue };
        let fixed: Vec<usize> = (0..n).filter(|j| free_mask >> j & 1 == 0).collect();
        for bits in 0u32..(1u32 << fixed.len()) {
            let mut rhs = c.clone();
            for (idx, &j) in fixed.iter().enumerate() {
                if bits >> idx & 1 == 1 {
                    for (r, row) in a.iter().enumerate() {
                        rhs[r] -= row[j];
                    }
                }
            }
            let y: Vec<BigRational> =
                t.iter().map(|row| row.iter().zip(&rhs).map(|(tv, &b)| tv * int(b)).sum()).collect();
            if y[free.len()..].iter().any(|v| !v.is_zero()) {
                continue;
            }
            if y[..free.len()].iter().any(|v| v.is_negative() || *v > BigRational::one()) {
                continue;
            }
            let mut x = vec![BigRational::zero(); n];
            for (idx, &j) in fixed.iter().enumerate() {
                x[j] = int((bits >> idx & 1).into());
            }
            for (idx, &j) in free.iter().enumerate() {
                x[j] = y[idx].clone();
            }
            out.insert(x);
        }
    }
    Ok(out)
}

/// An invertible `T` with `T A_F = [I; 0]`, or `None` when the columns `F`
/// of `A` are dependent.
fn left_inverse(a: &[Vec<i64>], free: &[usize]) -> Option<Vec<Vec<BigRational>>> {
    let m = a.len();
    let w = free.len();
    let mut rows: Vec<Vec<BigRational>> = a
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let mut v: Vec<BigRational> = free.iter().map(|&j| int(row[j])).collect();
            v.extend((0..m).map(|s| if s == r { BigRational::one() } else { BigRational::zero() }));
            v
        })
        .collect();
    for col in 0..w {
        let piv = (col..m).find(|&r| !rows[r][col].is_zero())?;
        rows.swap(col, piv);
        let inv = rows[col][col].recip();
        for v in rows[col].iter_mut() {
            *v *= &inv;
        }
        for r in 0..m {
            if r != col && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                let pivot_row = rows[col].clone();
                for (v, p) in rows[r].iter_mut().zip(&pivot_row) {
                    *v -= &f * p;
                }
            }
        }
    }
    Some(rows.into_iter().map(|r| r[w..].to_vec()).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecisionReport {
    /// The reduced problem's answer: the polytope is nonempty and the limit
    /// objective reaches zero on it.
    pub verdict: bool,
    pub binary_feasible: bool,
    pub witness: Option<BinaryAssignment>,
    /// Exact minimum as `"p"` or `"p/q"`; `None` for an empty polytope.
    pub polytope_min: Option<String>,
    pub vertex_count: usize,
    pub oracles_agree: bool,
}

pub fn decide(sys: &BinaryLinearSystem) -> Result<DecisionReport, AnalyzerError> {
    let witness = binary_feasibility_oracle(sys)?;
    let poly = polytope_min_oracle(sys)?;
    let binary_feasible = witness.is_some();
    let (verdict, polytope_min, vertex_count) = match &poly {
        PolytopeMin::Empty => (false, None, 0),
        PolytopeMin::Attained { min, vertex_count, .. } => (min.is_zero(), Some(min.to_string()), *vertex_count),
    };
    Ok(DecisionReport {
        verdict,
        binary_feasible,
        witness,
        polytope_min,
        vertex_count,
        oracles_agree: verdict == binary_feasible,
    })
}
