//! Rewrites an ALP so every constraint coefficient lies in `{1, -1, K, -K}`
//! and every constant in `{0, 1, -1, K, -K}`, adding auxiliary variables.
//!
//! Rules, applied to each constraint until none fires:
//!
//! * **lift** – a term `c(K) v` whose integer polynomial coefficient has
//!   several monomials becomes `y`, with `y = y_1 + ... + y_t` and
//!   `y_j = m_j(K) v` for each monomial, highest degree first.
//! * **lower** – a term `m K^e v` with `e >= 2` becomes `m K w` with
//!   `w = K^(e-1) v`.
//! * **clear** – coefficients or constants with a denominator (in `K` or
//!   integral) are cleared by multiplying the constraint by the lcm of the
//!   denominators. Polynomial denominators are monic, hence positive beyond
//!   their sign threshold, which the result records.
//! * **unary** – a term `m K^e v` with `|m| >= 2`, `e <= 1` becomes
//!   `sign K^e z_1 + ... + sign K^e z_|m|` with `v = z_j`.
//! * **constant** – a side constant outside the alphabet becomes a term on
//!   the unit variable `u`, pinned once by `u = 1`, and is then rewritten by
//!   the rules above.
//!
//! Lift, lower and clear alone ([`Depth::Structural`]) reproduce the classic
//! one-level rewriting, e.g. `(3K^2 + 2K + 5) x <= 7/K` becomes
//! `K y0 <= 7; y0 = y1 + y2 + y3; y1 = 3K y11; y11 = K x; y2 = 2K x; y3 = 5x`.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::alp::{unit_alphabet, AlpInstance, Constraint, LinearForm, VarId};
use crate::kfield::{Poly, RatFn};
use crate::simplex::{solve_at, SimplexError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("instance is invalid: {0}")]
    InvalidInstance(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Simplex(#[from] SimplexError),
}

/// How far to rewrite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Depth {
    /// Lift, lower and clear only; small integers stay as they are.
    Structural,
    /// Everything, down to the unit alphabet.
    Full,
}

/// Fixed constant in the polynomial size bound checked by [`within_size_bound`].
pub const SIZE_BOUND_CONSTANT: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub instance: AlpInstance,
    /// Auxiliary variable to the index of the input constraint it came from.
    /// Bounds count as constraints appended after the listed ones.
    pub provenance: BTreeMap<VarId, usize>,
    /// Equivalence holds for every `k` above this value.
    pub threshold: BigRational,
    pub unit_var: Option<VarId>,
}

impl Normalized {
    /// Identity mapping of the original variables, for [`check_equivalence`].
    pub fn projection(&self) -> BTreeMap<VarId, VarId> {
        self.instance
            .variables
            .iter()
            .filter(|v| !self.provenance.contains_key(*v))
            .map(|v| (v.clone(), v.clone()))
            .collect()
    }

    pub fn provenance_json(&self) -> serde_json::Value {
        self.provenance.iter().map(|(v, &i)| (v.to_string(), serde_json::Value::from(i))).collect()
    }
}

struct Rewriter {
    depth: Depth,
    taken: HashSet<VarId>,
    counter: usize,
    new_vars: Vec<VarId>,
    provenance: BTreeMap<VarId, usize>,
    threshold: BigRational,
    unit_var: Option<VarId>,
    out: Vec<Constraint>,
}

enum Side {
    Lhs,
    Rhs,
}

fn side_mut<'a>(c: &'a mut Constraint, s: &Side) -> &'a mut LinearForm {
    match s {
        Side::Lhs => &mut c.lhs,
        Side::Rhs => &mut c.rhs,
    }
}

fn is_unit_coeff(c: &RatFn) -> bool {
    c.as_polynomial().is_some_and(|p| {
        let terms: Vec<_> = p.terms().collect();
        matches!(terms.as_slice(), [(d, a)] if *d <= 1 && a.abs().is_one())
    })
}

fn is_alphabet_constant(c: &RatFn) -> bool {
    c.is_zero() || is_unit_coeff(c)
}

fn integer_poly(c: &RatFn) -> Option<&Poly> {
    c.as_polynomial().filter(|p| p.is_integral())
}

impl Rewriter {
    fn fresh(&mut self, src: usize) -> VarId {
        loop {
            let v = VarId::new(format!("_n{}", self.counter));
            self.counter += 1;
            if self.taken.insert(v.clone()) {
                self.new_vars.push(v.clone());
                self.provenance.insert(v.clone(), src);
                return v;
            }
        }
    }

    fn unit(&mut self, src: usize) -> VarId {
        if let Some(u) = &self.unit_var {
            return u.clone();
        }
        let u = self.fresh(src);
        self.unit_var = Some(u.clone());
        self.out.push(Constraint::eq(LinearForm::var(u.clone()), LinearForm::constant(RatFn::one())));
        u
    }

    /// Rewrites `c` fully, then every constraint it spawned.
    fn lower(&mut self, mut c: Constraint, src: usize) {
        let mut spawned = Vec::new();
        while let Some(extra) = self.step(&mut c, src) {
            spawned.extend(extra);
        }
        self.out.push(c);
        for s in spawned {
            self.lower(s, src);
        }
    }

    /// Applies one rule; `None` when the constraint is final.
    fn step(&mut self, c: &mut Constraint, src: usize) -> Option<Vec<Constraint>> {
        for side in [Side::Lhs, Side::Rhs] {
            let target = side_mut(c, &side)
                .terms()
                .iter()
                .find(|(_, a)| !is_unit_coeff(a) && integer_poly(a).is_some())
                .map(|(v, a)| (v.clone(), a.as_polynomial().unwrap().clone()));
            let Some((v, poly)) = target else { continue };
            let monos: Vec<(usize, BigRational)> = poly.terms().map(|(d, a)| (d, a.clone())).collect();
            if monos.len() >= 2 {
                return Some(self.lift(c, &side, v, &monos, src));
            }
            let (deg, m) = monos.into_iter().next().expect("nonzero coefficient");
            if deg >= 2 {
                return Some(self.lower_power(c, &side, v, deg, m, src));
            }
            if self.depth == Depth::Full {
                return Some(self.unary(c, &side, v, deg, &m, src));
            }
        }

        if c.coefficients_and_constants().any(|a| integer_poly(a).is_none()) {
            self.clear(c);
            return Some(Vec::new());
        }

        if self.depth == Depth::Full {
            for side in [Side::Lhs, Side::Rhs] {
                let k = side_mut(c, &side).constant_term().clone();
                if !is_alphabet_constant(&k) {
                    let u = self.unit(src);
                    let f = side_mut(c, &side);
                    f.set_constant(RatFn::zero());
                    f.add_term(u, k);
                    return Some(Vec::new());
                }
            }
        }
        None
    }

    fn lift(
        &mut self,
        c: &mut Constraint,
        side: &Side,
        v: VarId,
        monos: &[(usize, BigRational)],
        src: usize,
    ) -> Vec<Constraint> {
        let y = self.fresh(src);
        let f = side_mut(c, side);
        f.remove_term(&v);
        f.add_term(y.clone(), RatFn::one());
        let parts: Vec<VarId> = monos.iter().map(|_| self.fresh(src)).collect();
        let mut sum = LinearForm::default();
        for p in &parts {
            sum.add_term(p.clone(), RatFn::one());
        }
        let mut out = vec![Constraint::eq(LinearForm::var(y), sum)];
        for (p, (d, a)) in parts.into_iter().zip(monos.iter().rev()) {
            out.push(Constraint::eq(
                LinearForm::var(p),
                LinearForm::term(v.clone(), RatFn::from_poly(Poly::monomial(a.clone(), *d))),
            ));
        }
        out
    }

    fn lower_power(
        &mut self,
        c: &mut Constraint,
        side: &Side,
        v: VarId,
        deg: usize,
        m: BigRational,
        src: usize,
    ) -> Vec<Constraint> {
        let w = self.fresh(src);
        let f = side_mut(c, side);
        f.remove_term(&v);
        f.add_term(w.clone(), RatFn::from_poly(Poly::monomial(m, 1)));
        let rest = RatFn::from_poly(Poly::monomial(BigRational::one(), deg - 1));
        vec![Constraint::eq(LinearForm::var(w), LinearForm::term(v, rest))]
    }

    fn unary(
        &mut self,
        c: &mut Constraint,
        side: &Side,
        v: VarId,
        deg: usize,
        m: &BigRational,
        src: usize,
    ) -> Vec<Constraint> {
        let count = m.abs().to_integer().to_usize().expect("coefficient magnitude fits in memory");
        let unit = RatFn::from_poly(Poly::monomial(BigRational::from_integer(m.signum().to_integer()), deg));
        let copies: Vec<VarId> = (0..count).map(|_| self.fresh(src)).collect();
        let f = side_mut(c, side);
        f.remove_term(&v);
        for z in &copies {
            f.add_term(z.clone(), unit.clone());
        }
        copies.into_iter().map(|z| Constraint::eq(LinearForm::var(v.clone()), LinearForm::var(z))).collect()
    }

    fn clear(&mut self, c: &mut Constraint) {
        let den = c.coefficients_and_constants().fold(Poly::one(), |acc, a| acc.lcm(a.denominator()));
        if !den.is_constant() {
            let t = den.cauchy_bound().expect("nonzero");
            if t > self.threshold {
                self.threshold = t;
            }
        }
        let by_den = RatFn::from_poly(den);
        c.lhs = c.lhs.scale(&by_den);
        c.rhs = c.rhs.scale(&by_den);
        let ints =
            c.coefficients_and_constants().fold(BigInt::one(), |acc, a| acc.lcm(&a.numerator().denominator_lcm()));
        if !ints.is_one() {
            let by_int = RatFn::constant(BigRational::from_integer(ints));
            c.lhs = c.lhs.scale(&by_int);
            c.rhs = c.rhs.scale(&by_int);
        }
    }
}

fn check_valid(inst: &AlpInstance) -> Result<(), NormalizeError> {
    let v = inst.validate();
    if v.is_empty() {
        return Ok(());
    }
    Err(NormalizeError::InvalidInstance(v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")))
}

/// Rewrites every constraint (bounds included) down to the unit alphabet.
pub fn normalize(inst: &AlpInstance) -> Result<Normalized, NormalizeError> {
    normalize_with_depth(inst, Depth::Full)
}

pub fn normalize_with_depth(inst: &AlpInstance, depth: Depth) -> Result<Normalized, NormalizeError> {
    check_valid(inst)?;
    let mut rw = Rewriter {
        depth,
        taken: inst.variables.iter().cloned().collect(),
        counter: 0,
        new_vars: Vec::new(),
        provenance: BTreeMap::new(),
        threshold: BigRational::zero(),
        unit_var: None,
        out: Vec::new(),
    };
    let sources = inst.constraints.iter().cloned().chain(inst.bound_constraints());
    for (src, c) in sources.enumerate() {
        rw.lower(c, src);
    }
    let mut variables = inst.variables.clone();
    variables.extend(rw.new_vars);
    let instance = AlpInstance {
        variables,
        constraints: rw.out,
        objective_scale: inst.objective_scale.clone(),
        objective_terms: inst.objective_terms.clone(),
        var_bounds: BTreeMap::new(),
    };
    Ok(Normalized { instance, provenance: rw.provenance, threshold: rw.threshold, unit_var: rw.unit_var })
}

/// Rewrites a standalone list of constraints over `vars`; used to replay
/// hand-written examples.
pub fn rewrite_constraints(
    vars: &[VarId],
    constraints: &[Constraint],
    depth: Depth,
) -> Result<Normalized, NormalizeError> {
    let mut inst = AlpInstance::new(vars.to_vec());
    inst.constraints = constraints.to_vec();
    normalize_with_depth(&inst, depth)
}

/// True when the constraint alphabet is within `{0, 1, -1, K, -K}`.
pub fn alphabet_is_unit(inst: &AlpInstance) -> bool {
    inst.coefficient_alphabet().is_subset(&unit_alphabet())
}

/// `C * relations * (1 + max degree) * (1 + max integer magnitude)` of the
/// input, the polynomial bound on the normalized relation count.
pub fn size_bound(inst: &AlpInstance) -> BigInt {
    let cs: Vec<Constraint> = crate::simplex::all_constraints(inst);
    let mut max_deg = 0usize;
    let mut max_mag = BigRational::zero();
    for a in cs.iter().flat_map(Constraint::coefficients_and_constants) {
        max_deg = max_deg.max(a.max_degree());
        max_mag = max_mag.max(a.numerator().max_abs_coeff()).max(a.denominator().max_abs_coeff());
    }
    let mag = max_mag.ceil().to_integer();
    BigInt::from(SIZE_BOUND_CONSTANT * cs.len() * (1 + max_deg)) * (BigInt::one() + mag)
}

pub fn within_size_bound(input: &AlpInstance, output: &AlpInstance) -> bool {
    BigInt::from(output.constraints.len()) <= size_bound(input)
}

fn eval_point(point: &BTreeMap<VarId, RatFn>, k: &BigRational) -> Option<BTreeMap<VarId, BigRational>> {
    point.iter().map(|(v, x)| x.eval_at(k).ok().map(|x| (v.clone(), x))).collect()
}

fn feasible_at(inst: &AlpInstance, k: &BigRational, point: &BTreeMap<VarId, BigRational>) -> bool {
    crate::simplex::all_constraints(inst).iter().all(|c| matches!(c.holds_at(k, point), Ok(Some(true))))
}

/// Number of extra vertices sampled per side and sample point.
const VERTEX_SAMPLES: usize = 3;

/// Exact finite-`K` check that `b` is a lifting of `a`.
///
/// `mapping` sends variables of `b` to variables of `a`; every variable of
/// `a` must be hit. At each sampled `k`: the two feasibility verdicts agree;
/// sampled points of `a` (simplex vertices, their convex combinations, and
/// `extra_points`) extend to feasible points of `b`; sampled vertices of `b`
/// project to feasible points of `a`.
pub fn check_equivalence(
    a: &AlpInstance,
    b: &AlpInstance,
    mapping: &BTreeMap<VarId, VarId>,
    k_samples: &[BigRational],
) -> Result<bool, NormalizeError> {
    check_equivalence_with(a, b, mapping, k_samples, &[], 0x5eed)
}

pub fn check_equivalence_with(
    a: &AlpInstance,
    b: &AlpInstance,
    mapping: &BTreeMap<VarId, VarId>,
    k_samples: &[BigRational],
    extra_points: &[BTreeMap<VarId, RatFn>],
    seed: u64,
) -> Result<bool, NormalizeError> {
    check_valid(a)?;
    check_valid(b)?;
    let a_vars: BTreeSet<&VarId> = a.variables.iter().collect();
    let b_vars: BTreeSet<&VarId> = b.variables.iter().collect();
    for (from, to) in mapping {
        if !b_vars.contains(from) {
            return Err(NormalizeError::DimensionMismatch(format!(
                "`{from}` is not a variable of the second instance"
            )));
        }
        if !a_vars.contains(to) {
            return Err(NormalizeError::DimensionMismatch(format!("`{to}` is not a variable of the first instance")));
        }
    }
    let hit: BTreeSet<&VarId> = mapping.values().collect();
    if let Some(missing) = a_vars.iter().find(|v| !hit.contains(*v)) {
        return Err(NormalizeError::DimensionMismatch(format!("`{missing}` of the first instance has no preimage")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in k_samples {
        let base_a = solve_at(a, k, &BTreeMap::new(), None)?;
        let base_b = solve_at(b, k, &BTreeMap::new(), None)?;
        if base_a.feasible != base_b.feasible {
            return Ok(false);
        }
        let mut a_points = Vec::new();
        for p in extra_points {
            match eval_point(p, k) {
                Some(p) if feasible_at(a, k, &p) => a_points.push(p),
                _ => return Ok(false),
            }
        }
        if !base_a.feasible {
            if !a_points.is_empty() {
                return Ok(false);
            }
            continue;
        }
        let a_vertices = sample_vertices(a, k, base_a.point.expect("feasible"), &mut rng)?;
        a_points.extend(convex_mixes(&a_vertices, &mut rng));
        a_points.extend(a_vertices);

        for pa in &a_points {
            let fixed: BTreeMap<VarId, BigRational> =
                mapping.iter().map(|(from, to)| (from.clone(), pa[to].clone())).collect();
            if !solve_at(b, k, &fixed, None)?.feasible {
                return Ok(false);
            }
        }
        for pb in sample_vertices(b, k, base_b.point.expect("feasible"), &mut rng)? {
            let projected: BTreeMap<VarId, BigRational> =
                mapping.iter().map(|(from, to)| (to.clone(), pb[from].clone())).collect();
            if !feasible_at(a, k, &projected) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn sample_vertices(
    inst: &AlpInstance,
    k: &BigRational,
    first: BTreeMap<VarId, BigRational>,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<BTreeMap<VarId, BigRational>>, NormalizeError> {
    let mut out = vec![first];
    let mut order: Vec<usize> = (0..inst.variables.len()).collect();
    for _ in 0..VERTEX_SAMPLES {
        order.shuffle(rng);
        if let Some(p) = solve_at(inst, k, &BTreeMap::new(), Some(&order))?.point {
            out.push(p);
        }
    }
    Ok(out)
}

/// Random convex combinations of pairs of points.
fn convex_mixes(points: &[BTreeMap<VarId, BigRational>], rng: &mut ChaCha8Rng) -> Vec<BTreeMap<VarId, BigRational>> {
    if points.len() < 2 {
        return Vec::new();
    }
    (0..points.len())
        .map(|_| {
            let i = rng.gen_range(0..points.len());
            let j = rng.gen_range(0..points.len());
            let t = BigRational::new(rng.gen_range(1..16).into(), 16.into());
            let s = BigRational::one() - &t;
            points[i].iter().map(|(v, x)| (v.clone(), x * &t + &points[j][v] * &s)).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alp::Relation;
    use crate::kfield::rat;

    fn poly(c: &[i64]) -> RatFn {
        RatFn::from_poly(Poly::from_ints(c))
    }

    #[test]
    fn unit_coefficients_are_recognized() {
        for c in [RatFn::one(), RatFn::int(-1), RatFn::k(), -RatFn::k()] {
            assert!(is_unit_coeff(&c));
        }
        for c in [RatFn::int(2), poly(&[1, 1]), poly(&[0, 0, 1]), RatFn::constant(rat(1, 2))] {
            assert!(!is_unit_coeff(&c));
        }
    }

    #[test]
    fn two_k_term_duplicates() {
        let c = Constraint::eq(LinearForm::var("y2"), LinearForm::term("x", poly(&[0, 2])));
        let n = rewrite_constraints(&["y2".into(), "x".into()], &[c], Depth::Full).unwrap();
        assert_eq!(n.instance.constraints.len(), 3);
        assert!(alphabet_is_unit(&n.instance));
        let z: Vec<_> = n.provenance.keys().cloned().collect();
        assert_eq!(
            n.instance.constraints[0].rhs,
            LinearForm::term(z[0].clone(), RatFn::k()).with_term(z[1].clone(), RatFn::k())
        );
    }

    #[test]
    fn rational_constant_is_cleared() {
        // x <= 3/2 becomes 2x <= 3, then unary.
        let c = Constraint::new(LinearForm::var("x"), Relation::Le, LinearForm::constant(RatFn::constant(rat(3, 2))));
        let n = rewrite_constraints(&["x".into()], &[c], Depth::Structural).unwrap();
        assert_eq!(n.instance.constraints[0].lhs, LinearForm::term("x", RatFn::int(2)));
        assert_eq!(n.threshold, rat(0, 1));
        let full = rewrite_constraints(&n.instance.variables, &n.instance.constraints, Depth::Full).unwrap();
        assert!(alphabet_is_unit(&full.instance));
    }

    #[test]
    fn k_denominator_in_coefficient_is_cleared() {
        let coeff = RatFn::one().checked_div(&poly(&[1, 1])).unwrap();
        let c = Constraint::new(LinearForm::term("x", coeff), Relation::Le, LinearForm::constant(RatFn::one()));
        let n = rewrite_constraints(&["x".into()], &[c], Depth::Full).unwrap();
        assert!(alphabet_is_unit(&n.instance));
        assert_eq!(n.threshold, rat(2, 1));
    }

    #[test]
    fn negative_constant_expands() {
        let c = Constraint::eq(LinearForm::var("x"), LinearForm::constant(RatFn::int(-3)));
        let n = rewrite_constraints(&["x".into()], &[c], Depth::Full).unwrap();
        assert!(alphabet_is_unit(&n.instance));
        let k = rat(10, 1);
        let mut a = AlpInstance::new(vec!["x".into()]);
        a.constraints.push(Constraint::eq(LinearForm::var("x"), LinearForm::constant(RatFn::int(-3))));
        assert!(check_equivalence(&a, &n.instance, &n.projection(), &[k]).unwrap());
    }

    #[test]
    fn name_clashes_are_skipped() {
        let c = Constraint::eq(LinearForm::var("_n0"), LinearForm::constant(RatFn::int(2)));
        let n = rewrite_constraints(&["_n0".into()], &[c], Depth::Full).unwrap();
        assert!(!n.provenance.contains_key(&VarId::new("_n0")));
        assert!(n.instance.validate().is_empty());
    }

    #[test]
    fn mapping_errors() {
        let a = AlpInstance::new(vec!["x".into()]);
        let b = AlpInstance::new(vec!["y".into()]);
        let bad = [(VarId::new("x"), VarId::new("x"))].into_iter().collect();
        assert!(matches!(check_equivalence(&a, &b, &bad, &[rat(10, 1)]), Err(NormalizeError::DimensionMismatch(_))));
        let empty = BTreeMap::new();
        assert!(matches!(check_equivalence(&a, &b, &empty, &[rat(10, 1)]), Err(NormalizeError::DimensionMismatch(_))));
    }

    fn rename(c: &Constraint, names: &BTreeMap<VarId, VarId>) -> Constraint {
        let map = |f: &LinearForm| {
            let mut out = LinearForm::constant(f.constant_term().clone());
            for (v, a) in f.terms() {
                out.add_term(names.get(v).cloned().unwrap_or_else(|| v.clone()), a.clone());
            }
            out
        };
        Constraint::new(map(&c.lhs), c.rel, map(&c.rhs))
    }

    fn same_up_to_renaming(got: &Normalized, want: &[Constraint], want_aux: &[&str]) -> bool {
        let aux: Vec<VarId> = got.provenance.keys().cloned().collect();
        if aux.len() != want_aux.len() || got.instance.constraints.len() != want.len() {
            return false;
        }
        let key = |c: &Constraint| c.to_string();
        let want: BTreeSet<String> = want.iter().map(key).collect();
        let mut perm: Vec<usize> = (0..aux.len()).collect();
        loop {
            let names: BTreeMap<VarId, VarId> =
                aux.iter().zip(&perm).map(|(a, &j)| (a.clone(), VarId::new(want_aux[j]))).collect();
            let have: BTreeSet<String> = got.instance.constraints.iter().map(|c| key(&rename(c, &names))).collect();
            if have == want {
                return true;
            }
            if !next_permutation(&mut perm) {
                return false;
            }
        }
    }

    fn next_permutation(p: &mut [usize]) -> bool {
        let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else { return false };
        let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
        true
    }

    #[test]
    fn quadratic_coefficient_structural_rewrite() {
        let c = Constraint::new(
            LinearForm::term("x", poly(&[5, 2, 3])),
            Relation::Le,
            LinearForm::constant(RatFn::int(7).checked_div(&RatFn::k()).unwrap()),
        );
        let n = rewrite_constraints(&["x".into()], &[c], Depth::Structural).unwrap();
        let v = LinearForm::var;
        let t = |name: &str, c: RatFn| LinearForm::term(name, c);
        let want = [
            Constraint::new(t("y0", RatFn::k()), Relation::Le, LinearForm::constant(RatFn::int(7))),
            Constraint::eq(v("y0"), v("y1").with_term("y2", RatFn::one()).with_term("y3", RatFn::one())),
            Constraint::eq(v("y1"), t("y11", poly(&[0, 3]))),
            Constraint::eq(v("y11"), t("x", RatFn::k())),
            Constraint::eq(v("y2"), t("x", poly(&[0, 2]))),
            Constraint::eq(v("y3"), t("x", RatFn::int(5))),
        ];
        assert!(same_up_to_renaming(&n, &want, &["y0", "y1", "y2", "y3", "y11"]), "{:#?}", n.instance.constraints);
        assert!(n.threshold <= rat(1, 1));
    }

    #[test]
    fn two_k_term_matches_hand_rewrite() {
        let c = Constraint::eq(LinearForm::var("y2"), LinearForm::term("x", poly(&[0, 2])));
        let n = rewrite_constraints(&["y2".into(), "x".into()], &[c], Depth::Full).unwrap();
        let want = [
            Constraint::eq(LinearForm::var("y2"), LinearForm::term("z1", RatFn::k()).with_term("z2", RatFn::k())),
            Constraint::eq(LinearForm::var("x"), LinearForm::var("z1")),
            Constraint::eq(LinearForm::var("x"), LinearForm::var("z2")),
        ];
        assert!(same_up_to_renaming(&n, &want, &["z1", "z2"]));
    }

    #[test]
    fn shifted_pin_is_equivalent() {
        let r = Constraint::eq(
            LinearForm::var("r1"),
            LinearForm::constant(RatFn::k_plus(rat(2, 1))).with_term("x1", RatFn::int(-1)),
        );
        let vars: Vec<VarId> = vec!["x1".into(), "r1".into()];
        let mut a = AlpInstance::new(vars.clone());
        a.constraints.push(r.clone());
        a.constraints.push(Constraint::new(LinearForm::var("x1"), Relation::Ge, LinearForm::default()));
        a.constraints.push(Constraint::new(LinearForm::var("x1"), Relation::Le, LinearForm::constant(RatFn::one())));
        let n = normalize(&a).unwrap();
        assert!(alphabet_is_unit(&n.instance));
        assert!(check_equivalence(&a, &n.instance, &n.projection(), &[rat(1000, 1)]).unwrap());
    }

    #[test]
    fn reduced_instance_round_trip_and_negative_control() {
        let (sys, b) = crate::instance::generate_planted(2, 1, 3).unwrap();
        let a = crate::reducer::reduce(&sys);
        let ks = [rat(100, 1), rat(1000, 1)];
        assert!(check_equivalence(&a, &a, &a.variables.iter().map(|v| (v.clone(), v.clone())).collect(), &ks).unwrap());
        let n = normalize(&a).unwrap();
        assert!(alphabet_is_unit(&n.instance));
        assert!(within_size_bound(&a, &n.instance));
        let x: Vec<_> = b.values().iter().map(|&v| rat(v.into(), 1)).collect();
        let planted = crate::reducer::extend_assignment(&x);
        assert!(check_equivalence_with(&a, &n.instance, &n.projection(), &ks, &[planted], 1).unwrap());

        // Dropping the pin of r_1 loosens the lifted program.
        let mut broken = n.instance.clone();
        let r1 = crate::reducer::r_var(1);
        broken.constraints.retain(|c| c.lhs.coeff(&r1).is_none() && c.rhs.coeff(&r1).is_none());
        assert!(!check_equivalence(&a, &broken, &n.projection(), &ks).unwrap());
    }

    #[test]
    fn contradictory_right_hand_side_is_caught() {
        let mut a = AlpInstance::new(vec!["x".into()]);
        a.constraints.push(Constraint::eq(LinearForm::var("x"), LinearForm::constant(RatFn::one())));
        let mut b = a.clone();
        b.constraints[0].rhs = LinearForm::default();
        let id = [(VarId::new("x"), VarId::new("x"))].into_iter().collect();
        assert!(!check_equivalence(&a, &b, &id, &[rat(10, 1)]).unwrap());
    }
}
