//! Brute-force oracle for small bounded LPs.
//!
//! Every variable is shifted to `[0, U_j]`, inequality rows get bounded
//! slacks, and dependent equality rows are eliminated, leaving
//! `max c·y, A y = b, 0 <= y <= U` with `A` of full row rank `m`. Its dual is
//! the unconstrained piecewise-linear minimization
//!
//! ```text
//! D(w) = b·w + sum_j U_j · max(0, c_j - a_j·w)
//! ```
//!
//! whose minimum sits at a vertex of the hyperplane arrangement
//! `{a_j·w = c_j}`. The oracle enumerates every `m`-subset of columns, solves
//! for the candidate vertex and keeps the smallest `D`. Emptiness of the
//! primal shows up as a descent ray of `D`, found by enumerating the
//! `(m-1)`-subsets. Nothing here shares code with the simplex.

use num_traits::{Signed, Zero};

use crate::linalg::{kernel_direction, rref, solve_square};
use crate::model::{LinearProgram, LpError, LpSolution, LpStatus};
use crate::Rational;

/// Caps the number of column subsets the oracle is willing to visit.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationGuard {
    pub max_subsets: u128,
}

impl Default for EnumerationGuard {
    fn default() -> Self {
        Self { max_subsets: 250_000 }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Calls `visit` on every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for t in i + 1..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

struct Reduced {
    /// Columns of the full-row-rank equality matrix, each of length `m`.
    cols: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    cost: Vec<Rational>,
    cap: Vec<Rational>,
    m: usize,
}

impl Reduced {
    fn dual_value(&self, w: &[Rational]) -> Rational {
        let mut total = dot(&self.rhs, w);
        for ((col, c), u) in self.cols.iter().zip(&self.cost).zip(&self.cap) {
            let slack = c - dot(col, w);
            if slack.is_positive() {
                total += u * slack;
            }
        }
        total
    }

    fn recession(&self, d: &[Rational]) -> Rational {
        let mut total = dot(&self.rhs, d);
        for (col, u) in self.cols.iter().zip(&self.cap) {
            let s = dot(col, d);
            if s.is_negative() {
                total -= u * s;
            }
        }
        total
    }

    /// Transposed column subset as a square-ish matrix (rows = chosen columns).
    fn gather(&self, subset: &[usize]) -> Vec<Vec<Rational>> {
        subset.iter().map(|&j| self.cols[j].clone()).collect()
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Exact optimum of `lp` by exhaustive enumeration. Requires finite upper
/// bounds on every variable.
pub fn vertex_enumerate(lp: &LinearProgram, guard: EnumerationGuard) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.num_vars;
    let mut cap = Vec::with_capacity(n);
    for j in 0..n {
        let u = lp.upper[j].as_ref().ok_or(LpError::UnboundedVariable { var: j })?;
        cap.push(u - &lp.lower[j]);
    }
    let constant = lp.objective_at(&lp.lower);

    // Equality system over [structural | slacks] with the rhs appended.
    let n_le = lp.ineq_rows.len();
    let width = n + n_le;
    let mut aug = Vec::with_capacity(lp.num_rows());
    for row in &lp.eq_rows {
        let mut r = row.coeffs.clone();
        r.resize(width, Rational::zero());
        r.push(&row.rhs - row.dot(&lp.lower));
        aug.push(r);
    }
    for (k, row) in lp.ineq_rows.iter().enumerate() {
        let rhs = &row.rhs - row.dot(&lp.lower);
        let min_lhs = row
            .coeffs
            .iter()
            .zip(&cap)
            .filter(|(a, _)| a.is_negative())
            .fold(Rational::zero(), |acc, (a, u)| acc + a * u);
        let max_slack = &rhs - min_lhs;
        if max_slack.is_negative() {
            return Ok(LpSolution::without_point(LpStatus::Infeasible, 0));
        }
        cap.push(max_slack);
        let mut r = row.coeffs.clone();
        r.resize(width, Rational::zero());
        r[n + k] = Rational::from_integer(1.into());
        r.push(rhs);
        aug.push(r);
    }
    let pivots = rref(&mut aug);
    if pivots.last().is_some_and(|&c| c == width) {
        return Ok(LpSolution::without_point(LpStatus::Infeasible, 0));
    }
    let m = pivots.len();
    aug.truncate(m);
    let mut cost = lp.objective.clone();
    cost.resize(width, Rational::zero());
    let red = Reduced {
        cols: (0..width).map(|j| aug.iter().map(|r| r[j].clone()).collect()).collect(),
        rhs: aug.iter().map(|r| r[width].clone()).collect(),
        cost,
        cap,
        m,
    };

    let needed = binomial(width, m) + if m > 0 { binomial(width, m - 1) } else { 0 };
    if needed > guard.max_subsets {
        return Err(LpError::GuardExceeded {
            needed,
            limit: guard.max_subsets,
        });
    }

    if m > 0 {
        let mut ray = false;
        for_each_subset(width, m - 1, |s| {
            if ray {
                return;
            }
            if let Some(d) = kernel_direction(&red.gather(s), m) {
                let neg: Vec<Rational> = d.iter().map(|v| -v.clone()).collect();
                ray = red.recession(&d).is_negative() || red.recession(&neg).is_negative();
            }
        });
        if ray {
            return Ok(LpSolution::without_point(LpStatus::Infeasible, 0));
        }
    }

    let mut best: Option<Rational> = None;
    let mut optimal_points: Vec<Vec<Rational>> = Vec::new();
    for_each_subset(width, m, |s| {
        let rows = red.gather(s);
        let rhs: Vec<Rational> = s.iter().map(|&j| red.cost[j].clone()).collect();
        let Some(w) = solve_square(&rows, &rhs) else {
            return;
        };
        let value = red.dual_value(&w);
        match &best {
            Some(b) if &value > b => {}
            Some(b) if &value == b => {
                if !optimal_points.contains(&w) {
                    optimal_points.push(w);
                }
            }
            _ => {
                best = Some(value);
                optimal_points = vec![w];
            }
        }
    });
    let objective = best.unwrap_or_else(|| red.dual_value(&[])) + &constant;

    let mut solution = LpSolution::without_point(LpStatus::Optimal, 0);
    solution.objective_value = objective;
    let ws = if m == 0 { vec![Vec::new()] } else { optimal_points };
    for w in &ws {
        if let Some((y, basis)) = recover_primal(&red, w) {
            let x: Vec<Rational> = y.iter().take(n).zip(&lp.lower).map(|(v, l)| v + l).collect();
            debug_assert!(lp.is_feasible(&x));
            debug_assert_eq!(lp.objective_at(&x), solution.objective_value);
            solution.x = x;
            solution.basis = basis.into_iter().filter(|&j| j < n).collect();
            break;
        }
    }
    Ok(solution)
}

/// Complementary slackness at the dual point `w`: columns with positive
/// reduced cost sit at their cap, negative at zero, and the tight ones must
/// solve the remaining system inside their box.
#[allow(clippy::needless_range_loop)]
fn recover_primal(red: &Reduced, w: &[Rational]) -> Option<(Vec<Rational>, Vec<usize>)> {
    const MAX_TRIALS: usize = 1 << 16;
    let width = red.cols.len();
    let mut y = vec![Rational::zero(); width];
    let mut tight = Vec::new();
    let mut residual = red.rhs.clone();
    for j in 0..width {
        let r = &red.cost[j] - dot(&red.cols[j], w);
        if r.is_positive() {
            y[j] = red.cap[j].clone();
            for (res, a) in residual.iter_mut().zip(&red.cols[j]) {
                *res -= a * &red.cap[j];
            }
        } else if r.is_zero() && red.cols[j].iter().any(|a| !a.is_zero()) {
            tight.push(j);
        }
    }
    let m = red.m;
    if tight.len() < m {
        return residual.iter().all(Zero::is_zero).then_some((y, Vec::new()));
    }
    let free_count = tight.len() - m;
    if free_count >= usize::BITS as usize || (1usize << free_count) > MAX_TRIALS {
        return None;
    }
    let mut trials = 0usize;
    let mut found = None;
    for_each_subset(tight.len(), m, |pick| {
        if found.is_some() || trials > MAX_TRIALS {
            return;
        }
        let basis: Vec<usize> = pick.iter().map(|&i| tight[i]).collect();
        let mat: Vec<Vec<Rational>> = (0..m)
            .map(|r| basis.iter().map(|&j| red.cols[j][r].clone()).collect())
            .collect();
        let others: Vec<usize> = tight.iter().copied().filter(|j| !basis.contains(j)).collect();
        for mask in 0..(1usize << others.len()) {
            trials += 1;
            let mut rhs = residual.clone();
            for (bit, &j) in others.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    for (res, a) in rhs.iter_mut().zip(&red.cols[j]) {
                        *res -= a * &red.cap[j];
                    }
                }
            }
            let Some(vals) = solve_square(&mat, &rhs) else {
                return;
            };
            let in_box = vals
                .iter()
                .zip(&basis)
                .all(|(v, &j)| !v.is_negative() && v <= &red.cap[j]);
            if in_box {
                let mut out = y.clone();
                for (bit, &j) in others.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        out[j] = red.cap[j].clone();
                    }
                }
                for (v, &j) in vals.into_iter().zip(&basis) {
                    out[j] = v;
                }
                found = Some((out, basis.clone()));
                return;
            }
        }
    });
    found
}
