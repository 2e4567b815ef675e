use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

pub const DEFAULT_MAX_ITERATIONS: usize = 200_000;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("constraint {row} has {found} coefficients, expected {expected}")]
    DimensionMismatch { row: usize, expected: usize, found: usize },
    #[error("bounds list has {found} entries, expected {expected}")]
    BoundsMismatch { expected: usize, found: usize },
    #[error("non-finite problem data")]
    NonFinite,
    #[error("simplex did not terminate within {0} pivots")]
    IterationLimit(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    NonNegative,
    Free,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint<S> {
    pub coefficients: Vec<S>,
    pub relation: Relation,
    pub rhs: S,
}

/// Linear program over `objective.len()` variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpProblem<S> {
    pub sense: Sense,
    pub objective: Vec<S>,
    pub constraints: Vec<Constraint<S>>,
    pub bounds: Vec<Bound>,
    pub max_iterations: usize,
}

impl<S: Scalar> LpProblem<S> {
    /// All variables start non-negative.
    pub fn new(sense: Sense, objective: Vec<S>) -> Self {
        let n = objective.len();
        Self { sense, objective, constraints: Vec::new(), bounds: vec![Bound::NonNegative; n], max_iterations: DEFAULT_MAX_ITERATIONS }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, coefficients: Vec<S>, relation: Relation, rhs: S) -> &mut Self {
        self.constraints.push(Constraint { coefficients, relation, rhs });
        self
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.bounds[var] = Bound::Free;
        self
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[S]) -> S {
        let mut worst = S::zero();
        for c in &self.constraints {
            let lhs: S = c.coefficients.iter().zip(x).map(|(&a, &v)| a * v).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (b, &v) in self.bounds.iter().zip(x) {
            if *b == Bound::NonNegative {
                worst = worst.max(-v);
            }
        }
        worst
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(LpError::BoundsMismatch { expected: n, found: self.bounds.len() });
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite);
        }
        for (row, c) in self.constraints.iter().enumerate() {
            if c.coefficients.len() != n {
                return Err(LpError::DimensionMismatch { row, expected: n, found: c.coefficients.len() });
            }
            if !c.rhs.is_finite() || c.coefficients.iter().any(|v| !v.is_finite()) {
                return Err(LpError::NonFinite);
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution<S> {
    pub status: LpStatus,
    /// Primal point; meaningful only when optimal.
    pub x: Vec<S>,
    pub objective: S,
    pub pivots: usize,
}

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    basis: Vec<usize>,
    width: usize,
    pivots: usize,
    limit: usize,
    tol: S,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl<S: Scalar> Tableau<S> {
    fn rhs(&self, i: usize) -> S {
        self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v = *v / p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != S::zero() {
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v = *v - f * pv;
                }
                row[c] = S::zero();
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Maximizes `cost . x` over columns `< allowed` with Bland's rule.
    fn run(&mut self, cost: &[S], allowed: usize) -> Result<Phase, LpError> {
        loop {
            if self.pivots >= self.limit {
                return Err(LpError::IterationLimit(self.limit));
            }
            let mut is_basic = vec![false; self.width];
            for &b in &self.basis {
                is_basic[b] = true;
            }
            let mut entering = None;
            for j in 0..allowed {
                if is_basic[j] {
                    continue;
                }
                let mut r = cost[j];
                for (i, row) in self.rows.iter().enumerate() {
                    r = r - cost[self.basis[i]] * row[j];
                }
                if r > self.tol {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return Ok(Phase::Optimal) };
            let mut leaving: Option<(usize, S)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > self.tol {
                    let ratio = self.rhs(i) / a;
                    leaving = match leaving {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= self.tol * (S::one() + br.abs());
                            if (!tie && ratio < br) || (tie && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leaving else { return Ok(Phase::Unbounded) };
            self.pivot(r, c);
        }
    }
}

/// Two-phase dense simplex with Bland's rule.
pub fn lp_solve<S: Scalar>(problem: &LpProblem<S>) -> Result<LpSolution<S>, LpError> {
    problem.validate()?;
    let n = problem.num_vars();
    let tol = S::tolerance();

    // structural columns: x_i = col[i] - (neg[i] if free)
    let mut pos = Vec::with_capacity(n);
    let mut neg = vec![None; n];
    let mut width = 0;
    for (i, b) in problem.bounds.iter().enumerate() {
        pos.push(width);
        width += 1;
        if *b == Bound::Free {
            neg[i] = Some(width);
            width += 1;
        }
    }
    let structural = width;

    let mut rows: Vec<(Vec<S>, Relation, S)> = problem
        .constraints
        .iter()
        .map(|c| {
            let mut row = vec![S::zero(); structural];
            for (i, &a) in c.coefficients.iter().enumerate() {
                row[pos[i]] = a;
                if let Some(k) = neg[i] {
                    row[k] = -a;
                }
            }
            let (row, rel, rhs) = if c.rhs < S::zero() {
                let rel = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (row.into_iter().map(|v| -v).collect(), rel, -c.rhs)
            } else {
                (row, c.relation, c.rhs)
            };
            (row, rel, rhs)
        })
        .collect();

    let slack_count = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let art_count = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let art_start = structural + slack_count;
    let total = art_start + art_count;
    let mut basis = Vec::with_capacity(rows.len());
    let mut slack = structural;
    let mut art = art_start;
    let mut table = Vec::with_capacity(rows.len());
    for (row, rel, rhs) in rows.drain(..) {
        let mut full = row;
        full.resize(total + 1, S::zero());
        full[total] = rhs;
        match rel {
            Relation::Le => {
                full[slack] = S::one();
                basis.push(slack);
                slack += 1;
            }
            Relation::Ge => {
                full[slack] = -S::one();
                slack += 1;
                full[art] = S::one();
                basis.push(art);
                art += 1;
            }
            Relation::Eq => {
                full[art] = S::one();
                basis.push(art);
                art += 1;
            }
        }
        table.push(full);
    }
    let mut tab = Tableau { rows: table, basis, width: total, pivots: 0, limit: problem.max_iterations, tol };

    if art_count > 0 {
        let mut cost = vec![S::zero(); total];
        for c in cost.iter_mut().skip(art_start) {
            *c = -S::one();
        }
        tab.run(&cost, total)?;
        let infeasibility: S = (0..tab.rows.len()).filter(|&i| tab.basis[i] >= art_start).map(|i| tab.rhs(i)).sum();
        let scale = S::one() + problem.constraints.iter().fold(S::zero(), |m, c| m.max(c.rhs.abs()));
        if infeasibility > tol * scale {
            return Ok(LpSolution { status: LpStatus::Infeasible, x: vec![S::zero(); n], objective: S::nan(), pivots: tab.pivots });
        }
        // drive remaining artificials out of the basis, dropping redundant rows
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= art_start {
                match (0..art_start).find(|&j| tab.rows[i][j].abs() > tol) {
                    Some(j) => {
                        tab.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        for row in tab.rows.iter_mut() {
            let rhs = row[total];
            row.truncate(art_start);
            row.push(rhs);
        }
        tab.width = art_start;
    }

    let mut cost = vec![S::zero(); tab.width];
    let flip = if problem.sense == Sense::Minimize { -S::one() } else { S::one() };
    for i in 0..n {
        cost[pos[i]] = flip * problem.objective[i];
        if let Some(k) = neg[i] {
            cost[k] = -flip * problem.objective[i];
        }
    }
    let phase = tab.run(&cost, tab.width)?;
    let mut values = vec![S::zero(); tab.width];
    for (i, &b) in tab.basis.iter().enumerate() {
        values[b] = tab.rhs(i);
    }
    let x: Vec<S> = (0..n).map(|i| values[pos[i]] - neg[i].map_or(S::zero(), |k| values[k])).collect();
    match phase {
        Phase::Unbounded => Ok(LpSolution {
            status: LpStatus::Unbounded,
            x,
            objective: flip * S::infinity(),
            pivots: tab.pivots,
        }),
        Phase::Optimal => {
            let objective = problem.objective.iter().zip(&x).map(|(&c, &v)| c * v).sum();
            Ok(LpSolution { status: LpStatus::Optimal, x, objective, pivots: tab.pivots })
        }
    }
}
