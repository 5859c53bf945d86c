//! Compiles a binary linear system into the rational-linear-objective ALP.
//!
//! For each variable index `i` the program carries four real variables
//! `x_i, p_i, q_i, r_i`, the box `0 <= x_i <= 1`, and the pins
//! `p_i = K + 2i - 1`, `q_i = K + 2i`, `r_i = K + 2i - x_i`. The objective is
//! `K^3 * sum_i (x_i/p_i + (1 - x_i)/q_i - 1/r_i)`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::Serialize;

use crate::alp::{AlpInstance, Constraint, LinearForm, RationalLinearTerm, Relation, TermSign, VarId};
use crate::instance::BinaryLinearSystem;
use crate::kfield::{Poly, RatFn};

/// Expected sizes of a reduced instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CountProfile {
    pub vars: usize,
    /// Grouped count: each box `0 <= x_i <= 1` counts once.
    pub constraints: usize,
    pub objective_terms: usize,
    /// Flat relation count, `M + 5N`.
    pub relations: usize,
}

pub fn count_profile(sys: &BinaryLinearSystem) -> CountProfile {
    counts_for(sys.num_vars(), sys.num_equations())
}

pub fn counts_for(n: usize, m: usize) -> CountProfile {
    CountProfile { vars: 4 * n, constraints: m + 4 * n, objective_terms: 3 * n, relations: m + 5 * n }
}

pub fn x_var(i: usize) -> VarId {
    VarId::new(format!("x{i}"))
}
pub fn p_var(i: usize) -> VarId {
    VarId::new(format!("p{i}"))
}
pub fn q_var(i: usize) -> VarId {
    VarId::new(format!("q{i}"))
}
pub fn r_var(i: usize) -> VarId {
    VarId::new(format!("r{i}"))
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

/// `K + 2i - 1`, the pinned value of `p_i`.
pub fn p_pin(i: usize) -> RatFn {
    RatFn::k_plus(int(2 * i as i64 - 1))
}

/// `K + 2i`, the pinned value of `q_i`.
pub fn q_pin(i: usize) -> RatFn {
    RatFn::k_plus(int(2 * i as i64))
}

/// `K + 2i - x`, the pinned value of `r_i` at `x_i = x`.
pub fn r_pin(i: usize, x: &BigRational) -> RatFn {
    RatFn::k_plus(int(2 * i as i64) - x)
}

/// Values of `p_i, q_i, r_i` forced by the pins at `x_i = x`.
pub fn pinned_values(i: usize, x: &BigRational) -> [(VarId, RatFn); 3] {
    [(p_var(i), p_pin(i)), (q_var(i), q_pin(i)), (r_var(i), r_pin(i, x))]
}

/// A full assignment of the reduced instance's variables extending `x`.
pub fn extend_assignment(x: &[BigRational]) -> BTreeMap<VarId, RatFn> {
    let mut out = BTreeMap::new();
    for (idx, xi) in x.iter().enumerate() {
        let i = idx + 1;
        out.insert(x_var(i), RatFn::constant(xi.clone()));
        out.extend(pinned_values(i, xi));
    }
    out
}

/// `K^3`.
pub fn objective_scale() -> RatFn {
    RatFn::from_poly(Poly::monomial(int(1), 3))
}

/// The `3N` objective terms: all `+x_i/p_i`, then all `+(1-x_i)/q_i`, then
/// all `-1/r_i`.
pub fn objective_terms(n: usize) -> Vec<RationalLinearTerm> {
    let idx = 1..=n;
    let xp = idx
        .clone()
        .map(|i| RationalLinearTerm::new(TermSign::Plus, LinearForm::var(x_var(i)), LinearForm::var(p_var(i))));
    let xq = idx.clone().map(|i| {
        RationalLinearTerm::new(
            TermSign::Plus,
            LinearForm::constant(RatFn::one()).with_term(x_var(i), RatFn::int(-1)),
            LinearForm::var(q_var(i)),
        )
    });
    let r = idx.map(|i| {
        RationalLinearTerm::new(TermSign::Minus, LinearForm::constant(RatFn::one()), LinearForm::var(r_var(i)))
    });
    xp.chain(xq).chain(r).collect()
}

/// Emits the reduced instance.
///
/// Variable order is the x-block, p-block, q-block, r-block. Constraints are
/// the `M` source equations over `x`, then for each `i` the box pair (one
/// group), the `p_i`, `q_i`, and `r_i` pins.
pub fn reduce(sys: &BinaryLinearSystem) -> AlpInstance {
    let n = sys.num_vars();
    let blocks: [fn(usize) -> VarId; 4] = [x_var, p_var, q_var, r_var];
    let variables = blocks.iter().flat_map(|f| (1..=n).map(f)).collect();
    let mut inst = AlpInstance::new(variables);

    for (j, (row, &c)) in sys.rows().iter().zip(sys.rhs()).enumerate() {
        let mut lhs = LinearForm::default();
        for (idx, &a) in row.iter().enumerate() {
            lhs.add_term(x_var(idx + 1), RatFn::int(a.into()));
        }
        let rhs = LinearForm::constant(RatFn::int(c.into()));
        inst.constraints.push(Constraint::eq(lhs, rhs).in_group(format!("eq{}", j + 1)));
    }

    for i in 1..=n {
        let bx = format!("box_x{i}");
        inst.constraints.push(
            Constraint::new(LinearForm::var(x_var(i)), Relation::Ge, LinearForm::constant(RatFn::zero())).in_group(&bx),
        );
        inst.constraints.push(
            Constraint::new(LinearForm::var(x_var(i)), Relation::Le, LinearForm::constant(RatFn::one())).in_group(&bx),
        );
        inst.constraints.push(
            Constraint::eq(LinearForm::var(p_var(i)), LinearForm::constant(p_pin(i))).in_group(format!("pin_p{i}")),
        );
        inst.constraints.push(
            Constraint::eq(LinearForm::var(q_var(i)), LinearForm::constant(q_pin(i))).in_group(format!("pin_q{i}")),
        );
        let r_rhs = LinearForm::constant(RatFn::k_plus(int(2 * i as i64))).with_term(x_var(i), RatFn::int(-1));
        inst.constraints.push(Constraint::eq(LinearForm::var(r_var(i)), r_rhs).in_group(format!("pin_r{i}")));
    }

    inst.objective_scale = objective_scale();
    inst.objective_terms = objective_terms(n);
    inst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_planted, parse_system};
    use crate::kfield::rat;

    #[test]
    fn counts_match_formula() {
        assert_eq!(counts_for(3, 2), CountProfile { vars: 12, constraints: 14, objective_terms: 9, relations: 17 });
        assert_eq!((counts_for(1, 1).vars, counts_for(1, 1).constraints, counts_for(1, 1).objective_terms), (4, 5, 3));
        assert_eq!(
            (counts_for(10, 7).vars, counts_for(10, 7).constraints, counts_for(10, 7).objective_terms),
            (40, 47, 30)
        );
    }

    #[test]
    fn reduced_sizes_match_profile() {
        let (sys, _) = generate_planted(3, 2, 5).unwrap();
        let inst = reduce(&sys);
        let p = inst.profile();
        let c = count_profile(&sys);
        assert_eq!(
            (p.vars, p.constraints, p.objective_terms, p.relations),
            (c.vars, c.constraints, c.objective_terms, c.relations)
        );
        assert!(inst.validate().is_empty());
    }

    #[test]
    fn single_variable_pins() {
        let sys = parse_system("1 1\n1 = 1\n").unwrap();
        let inst = reduce(&sys);
        let want = [
            Constraint::eq(LinearForm::var("p1"), LinearForm::constant(RatFn::k_plus(rat(1, 1)))),
            Constraint::eq(LinearForm::var("q1"), LinearForm::constant(RatFn::k_plus(rat(2, 1)))),
            Constraint::eq(
                LinearForm::var("r1"),
                LinearForm::constant(RatFn::k_plus(rat(2, 1))).with_term("x1", RatFn::int(-1)),
            ),
        ];
        for w in want {
            assert!(inst.constraints.iter().any(|c| c.lhs == w.lhs && c.rel == w.rel && c.rhs == w.rhs), "missing {w}");
        }
        assert_eq!(inst.objective_scale, RatFn::from_poly(Poly::from_ints(&[0, 0, 0, 1])));
    }

    #[test]
    fn source_row_transcribed_verbatim() {
        let sys = parse_system("1 2\n1 1 = 1\n").unwrap();
        let c = &reduce(&sys).constraints[0];
        assert_eq!(c.lhs, LinearForm::var("x1").with_term("x2", RatFn::one()));
        assert_eq!(c.rel, Relation::Eq);
        assert_eq!(c.rhs, LinearForm::constant(RatFn::one()));
    }

    #[test]
    fn variable_blocks_are_ordered() {
        let sys = parse_system("1 2\n1 0 = 0\n").unwrap();
        let names: Vec<_> = reduce(&sys).variables.iter().map(|v| v.to_string()).collect();
        assert_eq!(names, ["x1", "x2", "p1", "p2", "q1", "q2", "r1", "r2"]);
    }

    #[test]
    fn planted_extension_satisfies_constraints_symbolically() {
        for seed in 0..10 {
            let (sys, b) = generate_planted(4, 3, seed).unwrap();
            let x: Vec<_> = b.values().iter().map(|&v| rat(v.into(), 1)).collect();
            let values = extend_assignment(&x);
            let inst = reduce(&sys);
            for c in &inst.constraints {
                assert_eq!(c.holds_symbolically(&values), Some(true), "{c}");
            }
        }
    }
}
