//! Steady-state feasibility of an ALP's constraints via phase-1 simplex run
//! exactly over Q(K), plus the identical run over plain rationals at a fixed
//! `K = k` for cross-checking.
//!
//! Every decision the simplex makes (entering column, ratio test, final
//! artificial value) consults the sign of a field element. Over Q(K) each
//! consulted sign is only guaranteed for `K` beyond that element's sign
//! threshold; the run reports the maximum as `K0`. For any `k > K0` the
//! rational run at `K = k` takes the same pivots and reaches the same verdict.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};
use thiserror::Error;

use crate::alp::{AlpInstance, Constraint, Relation, VarId};
use crate::kfield::{KFieldError, OrderedField, RatFn};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimplexError {
    #[error("pivot cap of {0} exceeded; Bland's rule should have terminated")]
    PivotCapExceeded(usize),
    #[error("instance is invalid: {0}")]
    InvalidInstance(String),
    #[error(transparent)]
    Field(#[from] KFieldError),
}

/// Generous cap on pivots per run.
pub const DEFAULT_PIVOT_CAP: usize = 500_000;

/// `sum coeffs[j].1 * x[coeffs[j].0]  rel  rhs`, variables free.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow<F> {
    pub coeffs: Vec<(usize, F)>,
    pub rel: Relation,
    pub rhs: F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem<F> {
    pub num_vars: usize,
    pub rows: Vec<LinearRow<F>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhaseOneResult<F> {
    /// A feasible basic point; `basic_vars` are the structural variables in
    /// the final basis.
    Feasible { point: Vec<F>, basic_vars: Vec<usize> },
    /// Farkas multipliers, one per row: `sum y_r a_r = 0`, `y_r >= 0` on `le`
    /// rows, `y_r <= 0` on `ge` rows, and `sum y_r b_r < 0`.
    Infeasible { multipliers: Vec<F> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOneRun<F> {
    pub result: PhaseOneResult<F>,
    pub pivots: usize,
    /// Largest sign threshold among consulted values; `None` when no
    /// consulted value depended on `K`.
    pub k0: Option<BigRational>,
}

impl<F> PhaseOneRun<F> {
    pub fn is_feasible(&self) -> bool {
        matches!(self.result, PhaseOneResult::Feasible { .. })
    }
}

struct Tableau<F> {
    rows: Vec<Vec<F>>,
    /// Reduced costs, last entry is minus the objective value.
    obj: Vec<F>,
    basis: Vec<usize>,
    k0: Option<BigRational>,
}

impl<F: OrderedField> Tableau<F> {
    fn consult(&mut self, v: &F) -> Ordering {
        let s = v.sign();
        if s != Ordering::Equal {
            if let Some(t) = v.stable_beyond() {
                if self.k0.as_ref().is_none_or(|k| &t > k) {
                    self.k0 = Some(t);
                }
            }
        }
        s
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let width = self.obj.len();
        let p = self.rows[pr][pc].clone();
        let nz: Vec<usize> = (0..width).filter(|&j| !self.rows[pr][j].is_zero()).collect();
        for &j in &nz {
            self.rows[pr][j] = self.rows[pr][j].over(&p);
        }
        let pivot_row = std::mem::take(&mut self.rows[pr]);
        let eliminate = |row: &mut Vec<F>| {
            let t = row[pc].clone();
            if t.is_zero() {
                return;
            }
            for &j in &nz {
                row[j] = row[j].minus(&t.times(&pivot_row[j]));
            }
        };
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r != pr {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.rows[pr] = pivot_row;
        self.basis[pr] = pc;
    }
}

/// Runs phase 1 with least-index (Bland) pivoting.
///
/// `order` permutes the structural variables' column positions, which
/// changes which feasible vertex is found; `None` keeps natural order.
pub fn phase_one<F: OrderedField>(
    sys: &LinearSystem<F>,
    order: Option<&[usize]>,
    pivot_cap: usize,
) -> Result<PhaseOneRun<F>, SimplexError> {
    let n = sys.num_vars;
    let m = sys.rows.len();
    let natural: Vec<usize> = (0..n).collect();
    let order = order.unwrap_or(&natural);
    assert_eq!(order.len(), n, "column order must permute the variables");
    let mut position = vec![0; n];
    for (pos, &var) in order.iter().enumerate() {
        position[var] = pos;
    }

    // Columns: [x+ x-] per structural position, slacks, artificials, rhs.
    let slack_rows: Vec<usize> = (0..m).filter(|&r| sys.rows[r].rel != Relation::Eq).collect();
    let slack_base = 2 * n;
    let art_base = slack_base + slack_rows.len();
    let rhs_col = art_base + m;
    let width = rhs_col + 1;

    let mut tab =
        Tableau { rows: Vec::with_capacity(m), obj: vec![F::zero(); width], basis: Vec::with_capacity(m), k0: None };
    let mut flips = Vec::with_capacity(m);
    let mut slack_idx = 0;
    for (r, row) in sys.rows.iter().enumerate() {
        let mut t = vec![F::zero(); width];
        for (var, a) in &row.coeffs {
            let c = 2 * position[*var];
            t[c] = t[c].plus(a);
            t[c + 1] = t[c + 1].minus(a);
        }
        match row.rel {
            Relation::Le => {
                t[slack_base + slack_idx] = F::one();
                slack_idx += 1;
            }
            Relation::Ge => {
                t[slack_base + slack_idx] = F::one().negated();
                slack_idx += 1;
            }
            Relation::Eq => {}
        }
        t[rhs_col] = row.rhs.clone();
        let flip = tab.consult(&row.rhs) == Ordering::Less;
        if flip {
            for v in t.iter_mut().filter(|v| !v.is_zero()) {
                *v = v.negated();
            }
        }
        flips.push(flip);
        t[art_base + r] = F::one();
        for j in (0..art_base).chain([rhs_col]) {
            if !t[j].is_zero() {
                tab.obj[j] = tab.obj[j].minus(&t[j]);
            }
        }
        tab.rows.push(t);
        tab.basis.push(art_base + r);
    }

    let mut pivots = 0;
    loop {
        let mut entering = None;
        for j in 0..rhs_col {
            let d = tab.obj[j].clone();
            if !d.is_zero() && tab.consult(&d) == Ordering::Less {
                entering = Some(j);
                break;
            }
        }
        let Some(pc) = entering else { break };

        let mut best: Option<(usize, F)> = None;
        for r in 0..m {
            let a = tab.rows[r][pc].clone();
            if a.is_zero() || tab.consult(&a) != Ordering::Greater {
                continue;
            }
            let ratio = tab.rows[r][rhs_col].over(&a);
            let better = match &best {
                None => true,
                Some((br, bv)) => match tab.consult(&ratio.minus(bv)) {
                    Ordering::Less => true,
                    Ordering::Equal => tab.basis[r] < tab.basis[*br],
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some((r, ratio));
            }
        }
        // Phase 1 is bounded below by zero, so a ratio row always exists.
        let (pr, _) = best.expect("phase-1 objective is bounded");
        tab.pivot(pr, pc);
        pivots += 1;
        if pivots > pivot_cap {
            return Err(SimplexError::PivotCapExceeded(pivot_cap));
        }
    }

    let w = tab.obj[rhs_col].negated();
    let result = if w.is_zero() || tab.consult(&w) != Ordering::Greater {
        let mut col_values = vec![F::zero(); 2 * n];
        for (r, &b) in tab.basis.iter().enumerate() {
            if b < 2 * n {
                col_values[b] = tab.rows[r][rhs_col].clone();
            }
        }
        let point = (0..n)
            .map(|var| {
                let c = 2 * position[var];
                col_values[c].minus(&col_values[c + 1])
            })
            .collect();
        let mut basic_vars: Vec<usize> = tab.basis.iter().filter(|&&b| b < 2 * n).map(|&b| order[b / 2]).collect();
        basic_vars.sort_unstable();
        basic_vars.dedup();
        PhaseOneResult::Feasible { point, basic_vars }
    } else {
        // Dual of row r is 1 minus the reduced cost of its artificial.
        let multipliers = (0..m)
            .map(|r| {
                let y = F::one().minus(&tab.obj[art_base + r]);
                if flips[r] {
                    y
                } else {
                    y.negated()
                }
            })
            .collect();
        PhaseOneResult::Infeasible { multipliers }
    };
    Ok(PhaseOneRun { result, pivots, k0: tab.k0 })
}

/// Checks a Farkas certificate exactly, in the field's order.
pub fn verify_farkas<F: OrderedField>(sys: &LinearSystem<F>, multipliers: &[F]) -> bool {
    if multipliers.len() != sys.rows.len() {
        return false;
    }
    let mut combo = vec![F::zero(); sys.num_vars];
    let mut rhs = F::zero();
    for (row, y) in sys.rows.iter().zip(multipliers) {
        let sign_ok = match row.rel {
            Relation::Eq => true,
            Relation::Le => y.sign() != Ordering::Less,
            Relation::Ge => y.sign() != Ordering::Greater,
        };
        if !sign_ok {
            return false;
        }
        for (var, a) in &row.coeffs {
            combo[*var] = combo[*var].plus(&y.times(a));
        }
        rhs = rhs.plus(&y.times(&row.rhs));
    }
    combo.iter().all(Zero::is_zero) && rhs.sign() == Ordering::Less
}

/// Constraints of `inst`, bounds included, in one list.
pub(crate) fn all_constraints(inst: &AlpInstance) -> Vec<Constraint> {
    let mut out = inst.constraints.clone();
    out.extend(inst.bound_constraints());
    out
}

fn var_index(inst: &AlpInstance) -> BTreeMap<&VarId, usize> {
    inst.variables.iter().enumerate().map(|(i, v)| (v, i)).collect()
}

/// The constraints of `inst` as a linear system over Q(K).
pub fn symbolic_system(inst: &AlpInstance) -> LinearSystem<RatFn> {
    let index = var_index(inst);
    let rows = all_constraints(inst)
        .iter()
        .map(|c| {
            let d = c.difference();
            LinearRow {
                coeffs: d.terms().iter().map(|(v, a)| (index[v], a.clone())).collect(),
                rel: c.rel,
                rhs: -d.constant_term(),
            }
        })
        .collect();
    LinearSystem { num_vars: inst.variables.len(), rows }
}

/// The constraints of `inst` with `K = k` substituted.
pub fn instantiate(inst: &AlpInstance, k: &BigRational) -> Result<LinearSystem<BigRational>, SimplexError> {
    let sym = symbolic_system(inst);
    let rows = sym
        .rows
        .iter()
        .map(|row| {
            Ok(LinearRow {
                coeffs: row
                    .coeffs
                    .iter()
                    .map(|(v, a)| Ok((*v, a.eval_at(k)?)))
                    .collect::<Result<Vec<_>, KFieldError>>()?
                    .into_iter()
                    .filter(|(_, a)| !a.is_zero())
                    .collect(),
                rel: row.rel,
                rhs: row.rhs.eval_at(k)?,
            })
        })
        .collect::<Result<_, KFieldError>>()?;
    Ok(LinearSystem { num_vars: sym.num_vars, rows })
}

fn check_valid(inst: &AlpInstance) -> Result<(), SimplexError> {
    let v = inst.validate();
    if v.is_empty() {
        Ok(())
    } else {
        let msgs: Vec<String> = v.iter().map(ToString::to_string).collect();
        Err(SimplexError::InvalidInstance(msgs.join("; ")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// A point in Q(K) satisfying every constraint for all large `K`.
    Point(BTreeMap<VarId, RatFn>),
    /// Farkas multipliers, one per constraint (bounds appended after the
    /// listed constraints).
    Farkas(Vec<RatFn>),
}

/// Eventual feasibility status of an ALP's constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateFeasibility {
    pub feasible: bool,
    /// For every `k > k0` the instantiated system has the same status.
    pub k0: BigRational,
    pub basis: Vec<VarId>,
    pub certificate: Certificate,
    pub pivots: usize,
}

impl SteadyStateFeasibility {
    pub fn to_json(&self) -> Value {
        let certificate = match &self.certificate {
            Certificate::Point(p) => json!({
                "point": p.iter().map(|(v, x)| (v.to_string(), ratfn_json(x))).collect::<serde_json::Map<_, _>>()
            }),
            Certificate::Farkas(y) => json!({ "farkas": y.iter().map(ratfn_json).collect::<Vec<_>>() }),
        };
        json!({
            "feasible": self.feasible,
            "K0": self.k0.to_string(),
            "basis": self.basis.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "certificate": certificate,
        })
    }

    /// Checks the certificate exactly in Q(K), without sampling.
    pub fn verify(&self, inst: &AlpInstance) -> bool {
        match &self.certificate {
            Certificate::Point(p) => all_constraints(inst).iter().all(|c| c.holds_symbolically(p) == Some(true)),
            Certificate::Farkas(y) => verify_farkas(&symbolic_system(inst), y),
        }
    }
}

/// A ratfun in the JSON document encoding.
pub fn ratfn_json(f: &RatFn) -> Value {
    serde_json::to_value(crate::alp::json_ratfn_doc(f)).expect("ratfun encodes")
}

/// Decides feasibility for all sufficiently large `K`.
pub fn phase1_feasible(inst: &AlpInstance) -> Result<SteadyStateFeasibility, SimplexError> {
    check_valid(inst)?;
    let sys = symbolic_system(inst);
    let run = phase_one(&sys, None, DEFAULT_PIVOT_CAP)?;

    // k must also clear every pole of the input coefficients.
    let mut k0 = run.k0.clone().unwrap_or_else(BigRational::zero);
    for row in &sys.rows {
        for a in row.coeffs.iter().map(|(_, a)| a).chain([&row.rhs]) {
            if !a.denominator().is_constant() {
                k0 = k0.max(a.denominator().cauchy_bound().expect("nonzero"));
            }
        }
    }

    let (feasible, basis, certificate) = match run.result {
        PhaseOneResult::Feasible { point, basic_vars } => {
            let p = inst.variables.iter().cloned().zip(point).collect();
            (true, basic_vars.iter().map(|&i| inst.variables[i].clone()).collect(), Certificate::Point(p))
        }
        PhaseOneResult::Infeasible { multipliers } => (false, Vec::new(), Certificate::Farkas(multipliers)),
    };
    Ok(SteadyStateFeasibility { feasible, k0, basis, certificate, pivots: run.pivots })
}

/// Feasibility of the instance at one concrete `K = k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteFeasibility {
    pub feasible: bool,
    pub point: Option<BTreeMap<VarId, BigRational>>,
}

/// Instantiates at `K = k` and runs the identical phase-1 simplex over
/// plain rationals.
pub fn eval_lp_at(inst: &AlpInstance, k: &BigRational) -> Result<FiniteFeasibility, SimplexError> {
    check_valid(inst)?;
    solve_at(inst, k, &BTreeMap::new(), None)
}

/// Like [`eval_lp_at`] with some variables fixed and an optional column
/// order.
pub(crate) fn solve_at(
    inst: &AlpInstance,
    k: &BigRational,
    fixed: &BTreeMap<VarId, BigRational>,
    order: Option<&[usize]>,
) -> Result<FiniteFeasibility, SimplexError> {
    let mut sys = instantiate(inst, k)?;
    for (i, v) in inst.variables.iter().enumerate() {
        if let Some(x) = fixed.get(v) {
            sys.rows.push(LinearRow {
                coeffs: vec![(i, BigRational::from_integer(1.into()))],
                rel: Relation::Eq,
                rhs: x.clone(),
            });
        }
    }
    let run = phase_one(&sys, order, DEFAULT_PIVOT_CAP)?;
    Ok(match run.result {
        PhaseOneResult::Feasible { point, .. } => {
            FiniteFeasibility { feasible: true, point: Some(inst.variables.iter().cloned().zip(point).collect()) }
        }
        PhaseOneResult::Infeasible { .. } => FiniteFeasibility { feasible: false, point: None },
    })
}
