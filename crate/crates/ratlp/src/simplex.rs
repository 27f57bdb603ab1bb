//! Two-phase bounded-variable primal simplex on a dense rational tableau.
//!
//! Column layout: structural variables, then one slack per `<=` row, then
//! artificials. Nonbasic variables sit at one of their bounds. Entering and
//! leaving choices follow Bland's rule (smallest column index), which rules
//! out cycling on degenerate vertices.

use num_traits::{One, Signed, Zero};

use crate::model::{LinearProgram, LpError, LpSolution, LpStatus};
use crate::Rational;

struct Tableau {
    /// `B^-1 A`, one row per constraint.
    rows: Vec<Vec<Rational>>,
    /// Basic column of each row.
    basic: Vec<usize>,
    /// Current values of the basic variables.
    beta: Vec<Rational>,
    lower: Vec<Rational>,
    upper: Vec<Option<Rational>>,
    is_basic: Vec<bool>,
    /// For nonbasic columns: sitting at the upper bound rather than the lower.
    at_upper: Vec<bool>,
    pivots: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Moved,
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.lower.len()
    }

    fn nonbasic_value(&self, j: usize) -> &Rational {
        if self.at_upper[j] {
            self.upper[j].as_ref().expect("at upper bound without one")
        } else {
            &self.lower[j]
        }
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.upper[j].as_ref().is_some_and(|u| u == &self.lower[j])
    }

    fn value(&self, j: usize) -> Rational {
        if self.is_basic[j] {
            let r = self.basic.iter().position(|&b| b == j).unwrap();
            self.beta[r].clone()
        } else {
            self.nonbasic_value(j).clone()
        }
    }

    fn reduced_cost(&self, cost: &[Rational], j: usize) -> Rational {
        let mut d = cost[j].clone();
        for (r, &b) in self.basic.iter().enumerate() {
            if !cost[b].is_zero() && !self.rows[r][j].is_zero() {
                d -= &cost[b] * &self.rows[r][j];
            }
        }
        d
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let inv = self.rows[r][j].recip();
        for a in self.rows[r].iter_mut() {
            if !a.is_zero() {
                *a *= &inv;
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[j].is_zero() {
                continue;
            }
            let factor = row[j].clone();
            for (a, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *a -= &factor * p;
                }
            }
        }
        let leaving = self.basic[r];
        self.is_basic[leaving] = false;
        self.is_basic[j] = true;
        self.at_upper[j] = false;
        self.basic[r] = j;
        self.pivots += 1;
    }

    /// One Bland iteration maximizing `cost`.
    fn step(&mut self, cost: &[Rational]) -> Step {
        let entering = (0..self.ncols()).find(|&j| {
            if self.is_basic[j] || self.is_fixed(j) {
                return false;
            }
            let d = self.reduced_cost(cost, j);

            if self.at_upper[j] {
                d.is_negative()
            } else {
                d.is_positive()
            }
        });
        let Some(j) = entering else {
            return Step::Optimal;
        };
        // Moving up from the lower bound or down from the upper bound.
        let up = !self.at_upper[j];

        // Ratio test: (step length, column index of the blocking variable, row).
        let mut best: Option<(Rational, usize, Option<usize>)> = None;
        let mut consider = |t: Rational, col: usize, row: Option<usize>| {
            let better = match &best {
                None => true,
                Some((bt, bcol, _)) => t < *bt || (t == *bt && col < *bcol),
            };
            if better {
                best = Some((t, col, row));
            }
        };
        if let Some(u) = &self.upper[j] {
            consider(u - &self.lower[j], j, None);
        }
        for r in 0..self.rows.len() {
            let a = &self.rows[r][j];
            if a.is_zero() {
                continue;
            }
            // d(x_basic)/dt for t >= 0.
            let rate = if up { -a.clone() } else { a.clone() };
            let b = self.basic[r];
            if rate.is_negative() {
                consider((&self.beta[r] - &self.lower[b]) / -&rate, b, Some(r));
            } else if let Some(ub) = &self.upper[b] {
                consider((ub - &self.beta[r]) / &rate, b, Some(r));
            }
        }
        let Some((t, _, row)) = best else {
            return Step::Unbounded;
        };

        let entering_value = if up {
            &self.lower[j] + &t
        } else {
            self.upper[j].clone().unwrap() - &t
        };
        if !t.is_zero() {
            for r in 0..self.rows.len() {
                let a = &self.rows[r][j];
                if a.is_zero() {
                    continue;
                }
                let delta = a * &t;
                if up {
                    self.beta[r] -= delta;
                } else {
                    self.beta[r] += delta;
                }
            }
        }
        match row {
            None => {
                self.at_upper[j] = up;
                self.pivots += 1;
            }
            Some(r) => {
                let leaving = self.basic[r];
                let hits_upper = self.upper[leaving]
                    .as_ref()
                    .is_some_and(|u| u == &self.beta[r] && u != &self.lower[leaving]);
                self.pivot(r, j);
                self.at_upper[leaving] = hits_upper;
                self.beta[r] = entering_value;
            }
        }
        Step::Moved
    }

    fn optimize(&mut self, cost: &[Rational]) -> LpStatus {
        loop {
            match self.step(cost) {
                Step::Optimal => return LpStatus::Optimal,
                Step::Unbounded => return LpStatus::Unbounded,
                Step::Moved => {}
            }
        }
    }
}

/// Solves `lp` exactly. Returns an optimal vertex, or reports infeasibility
/// or unboundedness.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.num_vars;
    let n_eq = lp.eq_rows.len();
    let n_le = lp.ineq_rows.len();
    let m = n_eq + n_le;

    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    lower.extend(std::iter::repeat_n(Rational::zero(), n_le));
    upper.extend(std::iter::repeat_n(None, n_le));

    let mut rows = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    let mut basic = Vec::with_capacity(m);
    // (row, sign) for rows that need an artificial.
    let mut needs_artificial = Vec::new();

    for (i, row) in lp.eq_rows.iter().chain(&lp.ineq_rows).enumerate() {
        let mut coeffs = row.coeffs.clone();
        coeffs.extend(std::iter::repeat_n(Rational::zero(), n_le));
        let slack = (i >= n_eq).then(|| n + i - n_eq);
        if let Some(s) = slack {
            coeffs[s] = Rational::one();
        }
        let residual = &row.rhs - row.dot(&lp.lower);
        if let (Some(s), false) = (slack, residual.is_negative()) {
            basic.push(s);
            beta.push(residual);
        } else if residual.is_negative() {
            for a in coeffs.iter_mut() {
                *a = -a.clone();
            }
            needs_artificial.push(i);
            basic.push(usize::MAX);
            beta.push(-residual);
        } else {
            needs_artificial.push(i);
            basic.push(usize::MAX);
            beta.push(residual);
        }
        rows.push(coeffs);
    }

    let first_art = n + n_le;
    let n_art = needs_artificial.len();
    for row in rows.iter_mut() {
        row.extend(std::iter::repeat_n(Rational::zero(), n_art));
    }
    for (k, &i) in needs_artificial.iter().enumerate() {
        rows[i][first_art + k] = Rational::one();
        basic[i] = first_art + k;
    }
    lower.extend(std::iter::repeat_n(Rational::zero(), n_art));
    upper.extend(std::iter::repeat_n(None, n_art));

    let ncols = first_art + n_art;
    let mut is_basic = vec![false; ncols];
    for &b in &basic {
        is_basic[b] = true;
    }
    let mut tab = Tableau {
        rows,
        basic,
        beta,
        lower,
        upper,
        is_basic,
        at_upper: vec![false; ncols],
        pivots: 0,
    };

    if n_art > 0 {
        let mut phase1 = vec![Rational::zero(); ncols];
        for c in phase1.iter_mut().skip(first_art) {
            *c = -Rational::one();
        }
        // Phase I is bounded above by zero, so it cannot be unbounded.
        tab.optimize(&phase1);
        let infeasibility: Rational = (first_art..ncols)
            .map(|j| tab.value(j))
            .fold(Rational::zero(), |a, b| a + b);
        if infeasibility.is_positive() {
            return Ok(LpSolution::without_point(LpStatus::Infeasible, tab.pivots));
        }
        // Pin artificials at zero, then swap out any still basic (at zero).
        for j in first_art..ncols {
            tab.upper[j] = Some(Rational::zero());
        }
        for r in 0..tab.rows.len() {
            if tab.basic[r] < first_art {
                continue;
            }
            if let Some(j) = (0..first_art).find(|&j| !tab.is_basic[j] && !tab.rows[r][j].is_zero()) {
                let value = tab.nonbasic_value(j).clone();
                tab.pivot(r, j);
                tab.beta[r] = value;
            }
            // Otherwise the row is redundant and its artificial stays basic at 0.
        }
    }

    let mut cost = lp.objective.clone();
    cost.resize(ncols, Rational::zero());
    if tab.optimize(&cost) == LpStatus::Unbounded {
        return Ok(LpSolution::without_point(LpStatus::Unbounded, tab.pivots));
    }

    let x: Vec<Rational> = (0..n).map(|j| tab.value(j)).collect();
    let mut basis: Vec<usize> = tab.basic.iter().copied().filter(|&b| b < n).collect();
    basis.sort_unstable();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value: lp.objective_at(&x),
        x,
        basis,
        pivots: tab.pivots,
    })
}
