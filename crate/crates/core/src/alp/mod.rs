//! Asymptotic linear programs: linear constraints with coefficients in Q(K)
//! and an objective that is a scale factor times a sum of rational linear
//! terms.

mod json;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num_rational::BigRational;

use crate::kfield::{KFieldError, RatFn};

pub(crate) use json::ratfn_doc as json_ratfn_doc;
pub use json::{deserialize, serialize, AlpParseError};

/// Name of a decision variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(String);

impl VarId {
    pub fn new(name: impl Into<String>) -> Self {
        VarId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VarId {
    fn from(s: &str) -> Self {
        VarId::new(s)
    }
}

/// `sum_v coeff_v * v + constant`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearForm {
    terms: BTreeMap<VarId, RatFn>,
    constant: RatFn,
}

impl LinearForm {
    pub fn constant(c: RatFn) -> Self {
        LinearForm { terms: BTreeMap::new(), constant: c }
    }

    pub fn var(v: impl Into<VarId>) -> Self {
        Self::term(v, RatFn::one())
    }

    pub fn term(v: impl Into<VarId>, coeff: RatFn) -> Self {
        let mut f = Self::default();
        f.add_term(v.into(), coeff);
        f
    }

    pub fn with_term(mut self, v: impl Into<VarId>, coeff: RatFn) -> Self {
        self.add_term(v.into(), coeff);
        self
    }

    pub fn with_constant(mut self, c: RatFn) -> Self {
        self.constant = c;
        self
    }

    /// Adds `coeff * v`, merging with an existing term and dropping zeros.
    pub fn add_term(&mut self, v: VarId, coeff: RatFn) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&v) {
            Some(c) => {
                *c = &*c + &coeff;
                if c.is_zero() {
                    self.terms.remove(&v);
                }
            }
            None => {
                self.terms.insert(v, coeff);
            }
        }
    }

    pub fn remove_term(&mut self, v: &VarId) -> Option<RatFn> {
        self.terms.remove(v)
    }

    pub fn set_constant(&mut self, c: RatFn) {
        self.constant = c;
    }

    pub fn terms(&self) -> &BTreeMap<VarId, RatFn> {
        &self.terms
    }

    pub fn constant_term(&self) -> &RatFn {
        &self.constant
    }

    pub fn coeff(&self, v: &VarId) -> Option<&RatFn> {
        self.terms.get(v)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_identically_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.is_zero()
    }

    pub fn scale(&self, c: &RatFn) -> LinearForm {
        let mut out = LinearForm::constant(&self.constant * c);
        for (v, a) in &self.terms {
            out.add_term(v.clone(), a * c);
        }
        out
    }

    pub fn sub(&self, other: &LinearForm) -> LinearForm {
        let mut out = self.clone();
        out.constant = &out.constant - &other.constant;
        for (v, a) in &other.terms {
            out.add_term(v.clone(), -a);
        }
        out
    }

    /// Substitutes values for variables; unknown variables remain symbolic.
    pub fn substitute(&self, values: &BTreeMap<VarId, RatFn>) -> LinearForm {
        let mut out = LinearForm::constant(self.constant.clone());
        for (v, a) in &self.terms {
            match values.get(v) {
                Some(x) => out.constant = &out.constant + &(a * x),
                None => out.add_term(v.clone(), a.clone()),
            }
        }
        out
    }

    /// Evaluates with every variable supplied; `None` if one is missing.
    pub fn evaluate(&self, values: &BTreeMap<VarId, RatFn>) -> Option<RatFn> {
        let mut acc = self.constant.clone();
        for (v, a) in &self.terms {
            acc = &acc + &(a * values.get(v)?);
        }
        Some(acc)
    }

    /// Instantiates at `K = k` and evaluates at a rational point.
    pub fn evaluate_at(
        &self,
        k: &BigRational,
        values: &BTreeMap<VarId, BigRational>,
    ) -> Result<Option<BigRational>, KFieldError> {
        let mut acc = self.constant.eval_at(k)?;
        for (v, a) in &self.terms {
            let Some(x) = values.get(v) else { return Ok(None) };
            acc += a.eval_at(k)? * x;
        }
        Ok(Some(acc))
    }

    fn vars(&self) -> impl Iterator<Item = &VarId> {
        self.terms.keys()
    }

    fn coefficients(&self) -> impl Iterator<Item = &RatFn> {
        self.terms.values()
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, a) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if a.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{a}*{v}")?;
            }
        }
        if first || !self.constant.is_zero() {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "{}", self.constant)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Eq => "eq",
            Relation::Le => "le",
            Relation::Ge => "ge",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Ge => ">=",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "eq" => Some(Relation::Eq),
            "le" => Some(Relation::Le),
            "ge" => Some(Relation::Ge),
            _ => None,
        }
    }

    /// Whether `lhs - rhs` with the given sign satisfies the relation.
    pub fn holds(self, diff_sign: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        matches!(
            (self, diff_sign),
            (Relation::Eq, Equal) | (Relation::Le, Less | Equal) | (Relation::Ge, Greater | Equal)
        )
    }
}

/// `lhs rel rhs`. Constraints sharing a `group` label count once in the
/// grouped constraint count (the box bound `0 <= x <= 1` is two relations
/// in one group).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub lhs: LinearForm,
    pub rel: Relation,
    pub rhs: LinearForm,
    pub group: Option<String>,
}

impl Constraint {
    pub fn new(lhs: LinearForm, rel: Relation, rhs: LinearForm) -> Self {
        Constraint { lhs, rel, rhs, group: None }
    }

    pub fn eq(lhs: LinearForm, rhs: LinearForm) -> Self {
        Self::new(lhs, Relation::Eq, rhs)
    }

    pub fn in_group(mut self, group: impl Into<String>) -> Self {
        self.group = Some(group.into());
        self
    }

    /// `lhs - rhs`, the form compared against zero.
    pub fn difference(&self) -> LinearForm {
        self.lhs.sub(&self.rhs)
    }

    pub fn is_constant(&self) -> bool {
        self.lhs.is_constant() && self.rhs.is_constant()
    }

    /// Exact check in Q(K), using the asymptotic order for inequalities.
    pub fn holds_symbolically(&self, values: &BTreeMap<VarId, RatFn>) -> Option<bool> {
        let l = self.lhs.evaluate(values)?;
        let r = self.rhs.evaluate(values)?;
        Some(self.rel.holds(l.compare_asymptotic(&r)))
    }

    /// Exact check at `K = k`.
    pub fn holds_at(
        &self,
        k: &BigRational,
        values: &BTreeMap<VarId, BigRational>,
    ) -> Result<Option<bool>, KFieldError> {
        let (Some(l), Some(r)) = (self.lhs.evaluate_at(k, values)?, self.rhs.evaluate_at(k, values)?) else {
            return Ok(None);
        };
        Ok(Some(self.rel.holds(l.cmp(&r))))
    }

    fn vars(&self) -> impl Iterator<Item = &VarId> {
        self.lhs.vars().chain(self.rhs.vars())
    }

    /// Coefficients on both sides followed by both constants.
    pub fn coefficients_and_constants(&self) -> impl Iterator<Item = &RatFn> {
        self.lhs
            .coefficients()
            .chain(self.rhs.coefficients())
            .chain([self.lhs.constant_term(), self.rhs.constant_term()])
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.rel.symbol(), self.rhs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermSign {
    Plus,
    Minus,
}

impl TermSign {
    pub fn as_i8(self) -> i8 {
        match self {
            TermSign::Plus => 1,
            TermSign::Minus => -1,
        }
    }
}

/// `sign * numerator / denominator`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalLinearTerm {
    pub sign: TermSign,
    pub numerator: LinearForm,
    pub denominator: LinearForm,
}

impl RationalLinearTerm {
    pub fn new(sign: TermSign, numerator: LinearForm, denominator: LinearForm) -> Self {
        RationalLinearTerm { sign, numerator, denominator }
    }

    /// Value in Q(K) once every variable is supplied.
    pub fn evaluate(&self, values: &BTreeMap<VarId, RatFn>) -> Option<Result<RatFn, KFieldError>> {
        let n = self.numerator.evaluate(values)?;
        let d = self.denominator.evaluate(values)?;
        Some(n.checked_div(&d).map(|v| if self.sign == TermSign::Minus { -v } else { v }))
    }

    fn vars(&self) -> impl Iterator<Item = &VarId> {
        self.numerator.vars().chain(self.denominator.vars())
    }
}

/// Optional bounds on one variable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VarBounds {
    pub lower: Option<RatFn>,
    pub upper: Option<RatFn>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlpInstance {
    pub variables: Vec<VarId>,
    pub constraints: Vec<Constraint>,
    pub objective_scale: RatFn,
    pub objective_terms: Vec<RationalLinearTerm>,
    pub var_bounds: BTreeMap<VarId, VarBounds>,
}

/// One broken invariant, naming the offending entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// A constraint whose sides are both constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantConstraint {
    pub index: usize,
    pub holds: bool,
}

/// Sizes of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct SizeProfile {
    pub vars: usize,
    /// Constraint groups; an unlabelled constraint is its own group.
    pub constraints: usize,
    pub objective_terms: usize,
    /// Individual relations.
    pub relations: usize,
}

impl AlpInstance {
    pub fn new(variables: Vec<VarId>) -> Self {
        AlpInstance {
            variables,
            constraints: Vec::new(),
            objective_scale: RatFn::one(),
            objective_terms: Vec::new(),
            var_bounds: BTreeMap::new(),
        }
    }

    /// Checks every structural invariant. Violations are data, not errors.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |location: String, message: String| out.push(Violation { location, message });
        let mut known = HashSet::new();
        for (i, v) in self.variables.iter().enumerate() {
            if v.as_str().is_empty() {
                push(format!("variables[{i}]"), "variable name is empty".into());
            }
            if !known.insert(v) {
                push(format!("variables[{i}]"), format!("duplicate variable `{v}`"));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            for v in c.vars().filter(|v| !known.contains(v)) {
                push(format!("constraints[{i}]"), format!("unknown variable `{v}`"));
            }
        }
        for (i, t) in self.objective_terms.iter().enumerate() {
            for v in t.vars().filter(|v| !known.contains(v)) {
                push(format!("objective_terms[{i}]"), format!("unknown variable `{v}`"));
            }
            if t.denominator.is_identically_zero() {
                push(format!("objective_terms[{i}]"), "denominator is identically zero".into());
            }
        }
        for (v, b) in &self.var_bounds {
            if !known.contains(v) {
                push(format!("var_bounds.{v}"), format!("unknown variable `{v}`"));
            }
            if b.lower.is_none() && b.upper.is_none() {
                push(format!("var_bounds.{v}"), "entry carries no bound".into());
            }
        }
        out
    }

    /// Constraints with no variables, flagged as tautology or contradiction.
    pub fn constant_constraints(&self) -> Vec<ConstantConstraint> {
        self.constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_constant())
            .map(|(index, c)| ConstantConstraint {
                index,
                holds: c.holds_symbolically(&BTreeMap::new()).unwrap_or(false),
            })
            .collect()
    }

    pub fn profile(&self) -> SizeProfile {
        let mut groups = HashSet::new();
        let mut ungrouped = 0;
        for c in &self.constraints {
            match &c.group {
                Some(g) => {
                    groups.insert(g.as_str());
                }
                None => ungrouped += 1,
            }
        }
        SizeProfile {
            vars: self.variables.len(),
            constraints: groups.len() + ungrouped,
            objective_terms: self.objective_terms.len(),
            relations: self.constraints.len(),
        }
    }

    /// Distinct coefficients and constants appearing in the constraints.
    pub fn coefficient_alphabet(&self) -> BTreeSet<RatFn> {
        self.constraints.iter().flat_map(Constraint::coefficients_and_constants).cloned().collect()
    }

    /// Distinct coefficients and constants in the objective terms, scale
    /// excluded.
    pub fn objective_alphabet(&self) -> BTreeSet<RatFn> {
        self.objective_terms
            .iter()
            .flat_map(|t| [&t.numerator, &t.denominator])
            .flat_map(|f| f.coefficients().chain(std::iter::once(f.constant_term())))
            .cloned()
            .collect()
    }

    /// Every bound in `var_bounds` rewritten as a constraint.
    pub fn bound_constraints(&self) -> Vec<Constraint> {
        let mut out = Vec::new();
        for (v, b) in &self.var_bounds {
            if let Some(l) = &b.lower {
                out.push(Constraint::new(LinearForm::var(v.clone()), Relation::Ge, LinearForm::constant(l.clone())));
            }
            if let Some(u) = &b.upper {
                out.push(Constraint::new(LinearForm::var(v.clone()), Relation::Le, LinearForm::constant(u.clone())));
            }
        }
        out
    }

    /// `objective_scale * sum(terms)` with every variable supplied.
    pub fn objective_value(&self, values: &BTreeMap<VarId, RatFn>) -> Option<Result<RatFn, KFieldError>> {
        let mut acc = RatFn::zero();
        for t in &self.objective_terms {
            match t.evaluate(values)? {
                Ok(v) => acc = &acc + &v,
                Err(e) => return Some(Err(e)),
            }
        }
        Some(Ok(&self.objective_scale * &acc))
    }
}

/// The coefficient alphabet `{0, 1, -1, K, -K}`.
pub fn unit_alphabet() -> BTreeSet<RatFn> {
    [RatFn::zero(), RatFn::one(), RatFn::int(-1), RatFn::k(), -RatFn::k()].into_iter().collect()
}

/// Renders a set as `{0,1,-1,K,-K}`: ordered by degree, then magnitude,
/// positive before negative.
pub fn render_alphabet(set: &BTreeSet<RatFn>) -> String {
    use num_traits::Signed;
    let mut items: Vec<&RatFn> = set.iter().collect();
    items.sort_by_cached_key(|f| {
        let num = f.numerator();
        let lc = num.leading_coeff().cloned().unwrap_or_default();
        (f.max_degree(), !f.is_zero(), num.degree(), lc.abs(), lc.is_negative(), f.to_string())
    });
    let parts: Vec<String> = items.iter().map(|f| f.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}
