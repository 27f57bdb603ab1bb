use std::fmt::{self, Write as _};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("row {row} has {got} coefficients, expected {expected}")]
    RowLength { row: usize, got: usize, expected: usize },
    #[error("objective has {got} coefficients, expected {expected}")]
    ObjectiveLength { got: usize, expected: usize },
    #[error("variable {var}: lower bound exceeds upper bound")]
    EmptyBounds { var: usize },
    #[error("oracle guard exceeded: {needed} subsets to enumerate, limit is {limit}")]
    GuardExceeded { needed: u128, limit: u128 },
    #[error("oracle requires finite upper bounds (variable {var} is unbounded above)")]
    UnboundedVariable { var: usize },
}

/// One linear row `coeffs · x (= or <=) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

impl Row {
    pub fn new(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self { coeffs, rhs }
    }

    pub fn dot(&self, x: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .zip(x)
            .filter(|(a, _)| !a.is_zero())
            .fold(Rational::zero(), |acc, (a, v)| acc + a * v)
    }
}

/// A maximization problem in bounded-variable form.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub eq_rows: Vec<Row>,
    pub ineq_rows: Vec<Row>,
    pub lower: Vec<Rational>,
    /// `None` means unbounded above.
    pub upper: Vec<Option<Rational>>,
}

impl LinearProgram {
    /// Zero objective, no rows, every variable in `[0, +inf)`.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            eq_rows: Vec::new(),
            ineq_rows: Vec::new(),
            lower: vec![Rational::zero(); num_vars],
            upper: vec![None; num_vars],
        }
    }

    /// Zero objective, no rows, every variable in `[0, 1]`.
    pub fn unit_box(num_vars: usize) -> Self {
        let mut lp = Self::new(num_vars);
        lp.upper = vec![Some(Rational::one()); num_vars];
        lp
    }

    pub fn set_objective(&mut self, objective: Vec<Rational>) {
        self.objective = objective;
    }

    pub fn set_bounds(&mut self, var: usize, lower: Rational, upper: Option<Rational>) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn add_eq(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        self.eq_rows.push(Row::new(coeffs, rhs));
    }

    pub fn add_le(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        self.ineq_rows.push(Row::new(coeffs, rhs));
    }

    pub fn num_rows(&self) -> usize {
        self.eq_rows.len() + self.ineq_rows.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        if self.objective.len() != self.num_vars {
            return Err(LpError::ObjectiveLength {
                got: self.objective.len(),
                expected: self.num_vars,
            });
        }
        for (row, r) in self.eq_rows.iter().chain(&self.ineq_rows).enumerate() {
            if r.coeffs.len() != self.num_vars {
                return Err(LpError::RowLength {
                    row,
                    got: r.coeffs.len(),
                    expected: self.num_vars,
                });
            }
        }
        for var in 0..self.num_vars {
            if let Some(u) = &self.upper[var] {
                if &self.lower[var] > u {
                    return Err(LpError::EmptyBounds { var });
                }
            }
        }
        Ok(())
    }

    pub fn objective_at(&self, x: &[Rational]) -> Rational {
        Row::new(self.objective.clone(), Rational::zero()).dot(x)
    }

    /// Exact feasibility: zero residual on equalities, no violation elsewhere.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && self.eq_rows.iter().all(|r| r.dot(x) == r.rhs)
            && self.ineq_rows.iter().all(|r| r.dot(x) <= r.rhs)
            && x.iter()
                .enumerate()
                .all(|(j, v)| v >= &self.lower[j] && self.upper[j].as_ref().is_none_or(|u| v <= u))
    }

    /// Plain-text matrix dump for cross-checking with external tools.
    ///
    /// One line per item, all numbers as exact fractions:
    /// `max c_0 ... c_{n-1}`, `eq a_0 ... a_{n-1} | b`, `le a_0 ... | b`,
    /// `bounds l u` (u is `inf` when absent).
    pub fn to_text(&self) -> String {
        let join = |v: &[Rational]| v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let _ = writeln!(out, "vars {}", self.num_vars);
        let _ = writeln!(out, "max {}", join(&self.objective));
        for r in &self.eq_rows {
            let _ = writeln!(out, "eq {} | {}", join(&r.coeffs), r.rhs);
        }
        for r in &self.ineq_rows {
            let _ = writeln!(out, "le {} | {}", join(&r.coeffs), r.rhs);
        }
        for j in 0..self.num_vars {
            let u = self.upper[j]
                .as_ref()
                .map_or_else(|| "inf".to_string(), |u| u.to_string());
            let _ = writeln!(out, "bounds {} {}", self.lower[j], u);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point; empty unless `status` is optimal.
    pub x: Vec<Rational>,
    pub objective_value: Rational,
    /// Indices of basic structural variables at the returned vertex.
    pub basis: Vec<usize>,
    pub pivots: usize,
}

impl LpSolution {
    pub(crate) fn without_point(status: LpStatus, pivots: usize) -> Self {
        Self {
            status,
            x: Vec::new(),
            objective_value: Rational::zero(),
            basis: Vec::new(),
            pivots,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    #[test]
    fn validate_catches_shape_errors() {
        let mut lp = LinearProgram::unit_box(2);
        lp.add_eq(vec![rat(1, 1)], rat(0, 1));
        assert!(matches!(lp.validate(), Err(LpError::RowLength { .. })));

        let mut lp = LinearProgram::unit_box(1);
        lp.set_bounds(0, rat(2, 1), Some(rat(1, 1)));
        assert_eq!(lp.validate(), Err(LpError::EmptyBounds { var: 0 }));
    }

    #[test]
    fn feasibility_is_exact() {
        let mut lp = LinearProgram::unit_box(2);
        lp.add_eq(vec![rat(1, 3), rat(1, 3)], rat(1, 3));
        assert!(lp.is_feasible(&[rat(1, 2), rat(1, 2)]));
        assert!(!lp.is_feasible(&[rat(1, 2), rat(1, 2) + rat(1, 1_000_000_000)]));
    }

    #[test]
    fn text_dump_lists_every_row() {
        let mut lp = LinearProgram::unit_box(2);
        lp.set_objective(vec![rat(1, 2), rat(-1, 1)]);
        lp.add_le(vec![rat(1, 1), rat(1, 1)], rat(1, 1));
        let text = lp.to_text();
        assert!(text.contains("max 1/2 -1"));
        assert!(text.contains("le 1 1 | 1"));
        assert_eq!(text.matches("bounds 0 1").count(), 2);
    }
}
