//! Instances of binary linear-equation feasibility: `A b = c` with
//! `A in {-1,0,1}^{M x N}`, `c in {-1,0,1}^M`, and `b in {0,1}^N`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("assignment has length {got}, system has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
    #[error("no in-alphabet row found after {0} attempts")]
    RetriesExhausted(usize),
}

/// The source system. Entries are stored as `i8` and always lie in `{-1, 0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryLinearSystem {
    num_vars: usize,
    rows: Vec<Vec<i8>>,
    rhs: Vec<i8>,
}

/// A 0/1 vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct BinaryAssignment(Vec<u8>);

fn in_alphabet(v: i64) -> bool {
    (-1..=1).contains(&v)
}

impl BinaryLinearSystem {
    pub fn new(rows: Vec<Vec<i8>>, rhs: Vec<i8>) -> Result<Self, InstanceError> {
        if rows.is_empty() {
            return Err(InstanceError::Invalid("system needs at least one equation".into()));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(InstanceError::Invalid("system needs at least one variable".into()));
        }
        if rhs.len() != rows.len() {
            return Err(InstanceError::Invalid(format!("{} rows but {} right-hand sides", rows.len(), rhs.len())));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(InstanceError::Invalid(format!("row {} has {} entries, expected {n}", i + 1, row.len())));
            }
            if let Some(j) = row.iter().position(|&a| !in_alphabet(a.into())) {
                return Err(InstanceError::Invalid(format!(
                    "coefficient a[{}][{}] = {} outside {{-1,0,1}}",
                    i + 1,
                    j + 1,
                    row[j]
                )));
            }
            if !in_alphabet(rhs[i].into()) {
                return Err(InstanceError::Invalid(format!(
                    "right-hand side c[{}] = {} outside {{-1,0,1}}",
                    i + 1,
                    rhs[i]
                )));
            }
        }
        Ok(BinaryLinearSystem { num_vars: n, rows, rhs })
    }

    /// Number of equations `M`.
    pub fn num_equations(&self) -> usize {
        self.rows.len()
    }

    /// Number of variables `N`.
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rows(&self) -> &[Vec<i8>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[i8] {
        &self.rhs
    }

    /// True iff every equation holds over the integers.
    pub fn check_assignment(&self, b: &BinaryAssignment) -> Result<bool, InstanceError> {
        if b.len() != self.num_vars {
            return Err(InstanceError::LengthMismatch { expected: self.num_vars, got: b.len() });
        }
        Ok(self.satisfied_by(b.values()))
    }

    pub(crate) fn satisfied_by(&self, b: &[u8]) -> bool {
        self.rows.iter().zip(&self.rhs).all(|(row, &c)| {
            let s: i64 = row.iter().zip(b).map(|(&a, &x)| i64::from(a) * i64::from(x)).sum();
            s == i64::from(c)
        })
    }

    /// Renders in the text file format accepted by [`parse_system`].
    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for BinaryLinearSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.num_equations(), self.num_vars)?;
        for (row, c) in self.rows.iter().zip(&self.rhs) {
            for a in row {
                write!(f, "{a} ")?;
            }
            writeln!(f, "= {c}")?;
        }
        Ok(())
    }
}

impl BinaryAssignment {
    pub fn new(values: Vec<u8>) -> Result<Self, InstanceError> {
        if let Some(v) = values.iter().find(|&&v| v > 1) {
            return Err(InstanceError::Invalid(format!("binary entry {v} is not 0 or 1")));
        }
        Ok(BinaryAssignment(values))
    }

    pub fn values(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for BinaryAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u8::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Parses the system file format.
///
/// First line `M N`, then `M` lines of `N` integers from `{-1,0,1}`, a literal
/// `=`, and one integer from `{-1,0,1}`. Lines starting with `#` and blank
/// lines are skipped.
pub fn parse_system(text: &str) -> Result<BinaryLinearSystem, InstanceError> {
    let err = |line: usize, column: usize, message: String| InstanceError::Parse { line, column, message };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| err(1, 1, "missing `M N` header".into()))?;
    let htoks = tokens(header);
    if htoks.len() != 2 {
        return Err(err(hline, 1, format!("header must be `M N`, found {} fields", htoks.len())));
    }
    let parse_dim = |(col, tok): &(usize, &str)| -> Result<usize, InstanceError> {
        match tok.parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v),
            _ => Err(err(hline, *col, format!("expected a positive integer, found `{tok}`"))),
        }
    };
    let m = parse_dim(&htoks[0])?;
    let n = parse_dim(&htoks[1])?;

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for _ in 0..m {
        let (lno, line) =
            lines.next().ok_or_else(|| err(hline, 1, format!("expected {m} equations, found {}", rows.len())))?;
        let toks = tokens(line);
        if toks.len() != n + 2 {
            return Err(err(lno, 1, format!("expected {n} coefficients, `=`, and a constant")));
        }
        if toks[n].1 != "=" {
            return Err(err(lno, toks[n].0, format!("expected `=`, found `{}`", toks[n].1)));
        }
        let mut row = Vec::with_capacity(n);
        for (col, tok) in toks[..n].iter().chain(std::iter::once(&toks[n + 1])) {
            let v: i64 = tok.parse().map_err(|_| err(lno, *col, format!("`{tok}` is not an integer")))?;
            if !in_alphabet(v) {
                return Err(err(lno, *col, format!("entry {v} outside alphabet {{-1,0,1}}")));
            }
            row.push(v as i8);
        }
        rhs.push(row.pop().expect("constant"));
        rows.push(row);
    }
    if let Some((lno, _)) = lines.next() {
        return Err(err(lno, 1, format!("unexpected content after {m} equations")));
    }
    BinaryLinearSystem::new(rows, rhs)
}

/// Whitespace tokens with their 1-based starting columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

/// Upper bound on per-row resampling in [`generate_planted`].
pub const DEFAULT_ROW_RETRIES: usize = 10_000;

fn trit(rng: &mut impl Rng) -> i8 {
    rng.gen_range(-1..=1)
}

/// A system built around a hidden binary assignment that satisfies it.
///
/// Rows are drawn uniformly from `{-1,0,1}^N`; a row is kept only when
/// `a . b` lands in `{-1,0,1}`, which then becomes its right-hand side.
pub fn generate_planted(
    n: usize,
    m: usize,
    seed: u64,
) -> Result<(BinaryLinearSystem, BinaryAssignment), InstanceError> {
    generate_planted_with_retries(n, m, seed, DEFAULT_ROW_RETRIES)
}

pub fn generate_planted_with_retries(
    n: usize,
    m: usize,
    seed: u64,
    max_retries: usize,
) -> Result<(BinaryLinearSystem, BinaryAssignment), InstanceError> {
    check_dims(n, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1)).collect();
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for _ in 0..m {
        let mut found = false;
        for _ in 0..max_retries {
            let row: Vec<i8> = (0..n).map(|_| trit(&mut rng)).collect();
            let s: i64 = row.iter().zip(&planted).map(|(&a, &b)| i64::from(a) * i64::from(b)).sum();
            if in_alphabet(s) {
                rows.push(row);
                rhs.push(s as i8);
                found = true;
                break;
            }
        }
        if !found {
            return Err(InstanceError::RetriesExhausted(max_retries));
        }
    }
    Ok((BinaryLinearSystem::new(rows, rhs)?, BinaryAssignment(planted)))
}

/// A system with every entry, right-hand side included, uniform in `{-1,0,1}`.
pub fn generate_random(n: usize, m: usize, seed: u64) -> Result<BinaryLinearSystem, InstanceError> {
    check_dims(n, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<i8>> = (0..m).map(|_| (0..n).map(|_| trit(&mut rng)).collect()).collect();
    let rhs = (0..m).map(|_| trit(&mut rng)).collect();
    BinaryLinearSystem::new(rows, rhs)
}

fn check_dims(n: usize, m: usize) -> Result<(), InstanceError> {
    if n == 0 || m == 0 {
        return Err(InstanceError::Invalid(format!("need N >= 1 and M >= 1, got N={n}, M={m}")));
    }
    Ok(())
}
