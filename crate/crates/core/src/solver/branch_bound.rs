//! Depth-first branch and bound over sign coefficients.
//!
//! Vectors are visited in a frontier-minimizing order: each step takes the
//! vector that opens the fewest new coordinates net of the ones it closes.
//! A node is pruned when one of two lower bounds on the final squared norm
//! already reaches 1:
//!
//! * per coordinate, `max(0, |s_x| - reach_x)^2`, where `reach_x` is the most
//!   the undecided vectors can still move coordinate `x`;
//! * the triangle inequality, `(||s|| - rem)^2` with `rem` undecided unit
//!   vectors, i.e. prune when `||s||^2 >= (1 + rem)^2`.
//!
//! Both bounds are exact integer expressions, so nothing feasible is ever cut.

use super::{Method, Problem, Verdict};
use crate::error::{Error, Result};
use crate::vectorspace::{SignVector, UnitVectorFamily};

/// Node accounting for one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BranchBoundStats {
    pub nodes: u64,
    pub pruned: u64,
    pub leaves: u64,
}

/// Result of scanning every non-trivial combination with `||v|| <= 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryScan {
    /// Canonical sign vectors with `||v|| < 1`.
    pub below: Vec<SignVector>,
    /// Canonical sign vectors with `||v|| = 1` exactly.
    pub at_boundary: Vec<SignVector>,
    pub stats: BranchBoundStats,
    /// False when the node budget or the collection cap cut the scan short.
    pub complete: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Stop at the first combination with `||v|| < 1`.
    FirstWitness,
    /// Collect every combination with `||v|| <= 1`.
    Closed { cap: usize },
}

/// Greedy frontier-minimizing visiting order.
fn branching_order(problem: &Problem) -> Vec<usize> {
    let m = problem.len();
    let mut open = vec![0usize; problem.active];
    for row in &problem.rows {
        for &(x, _) in row {
            open[x] += 1;
        }
    }
    let mut touched = vec![false; problem.active];
    let mut used = vec![false; m];
    let mut order = Vec::with_capacity(m);
    for _ in 0..m {
        let pick = (0..m)
            .filter(|&i| !used[i])
            .min_by_key(|&i| {
                let row = &problem.rows[i];
                let opened = row.iter().filter(|&&(x, _)| !touched[x]).count() as i64;
                let closed = row.iter().filter(|&&(x, _)| open[x] == 1).count() as i64;
                (opened - closed, i)
            })
            .expect("unused vector remains");
        used[pick] = true;
        for &(x, _) in &problem.rows[pick] {
            touched[x] = true;
            open[x] -= 1;
        }
        order.push(pick);
    }
    order
}

struct Search<'a> {
    problem: &'a Problem,
    order: Vec<usize>,
    mode: Mode,
    budget: u64,
    sum: Vec<i64>,
    reach: Vec<i64>,
    norm: i128,
    bound: i128,
    coeffs: Vec<i8>,
    stats: BranchBoundStats,
    found: Vec<(Vec<i8>, i128)>,
    boundary: Vec<Vec<i8>>,
    aborted: bool,
}

fn excess_sq(s: i64, reach: i64) -> i128 {
    let e = (s.abs() - reach).max(0) as i128;
    e * e
}

impl<'a> Search<'a> {
    fn new(problem: &'a Problem, mode: Mode, budget: u64) -> Self {
        let mut reach = vec![0i64; problem.active];
        for row in &problem.rows {
            for &(x, u) in row {
                reach[x] += u.abs();
            }
        }
        Search {
            problem,
            order: branching_order(problem),
            mode,
            budget,
            sum: vec![0; problem.active],
            reach,
            norm: 0,
            bound: 0,
            coeffs: vec![0; problem.len()],
            stats: BranchBoundStats::default(),
            found: Vec::new(),
            boundary: Vec::new(),
            aborted: false,
        }
    }

    /// Decides vector `row` with coefficient `coef` (`undo` reverses it).
    fn assign(&mut self, row: usize, coef: i64, undo: bool) {
        for &(x, u) in &self.problem.rows[row] {
            let before = excess_sq(self.sum[x], self.reach[x]);
            let old = self.sum[x] as i128;
            if undo {
                self.sum[x] -= coef * u;
                self.reach[x] += u.abs();
            } else {
                self.sum[x] += coef * u;
                self.reach[x] -= u.abs();
            }
            let new = self.sum[x] as i128;
            self.norm += new * new - old * old;
            self.bound += excess_sq(self.sum[x], self.reach[x]) - before;
        }
    }

    fn pruned(&self, depth: usize) -> bool {
        let r2 = self.problem.radius_sq;
        let rem = (self.problem.len() - depth) as i128;
        let tri = r2 * (1 + rem) * (1 + rem);
        match self.mode {
            Mode::FirstWitness => self.bound >= r2 || self.norm >= tri,
            Mode::Closed { .. } => self.bound > r2 || self.norm > tri,
        }
    }

    fn done(&self) -> bool {
        self.aborted
            || match self.mode {
                Mode::FirstWitness => !self.found.is_empty(),
                Mode::Closed { cap } => self.found.len() + self.boundary.len() > cap,
            }
    }

    fn visit(&mut self, depth: usize, nonzero: bool) {
        if self.stats.nodes >= self.budget {
            self.aborted = true;
            return;
        }
        self.stats.nodes += 1;
        if self.pruned(depth) {
            self.stats.pruned += 1;
            return;
        }
        if depth == self.problem.len() {
            self.stats.leaves += 1;
            if nonzero {
                if self.norm < self.problem.radius_sq {
                    self.found.push((self.coeffs.clone(), self.norm));
                } else if self.norm == self.problem.radius_sq
                    && matches!(self.mode, Mode::Closed { .. })
                {
                    self.boundary.push(self.coeffs.clone());
                }
            }
            return;
        }
        let row = self.order[depth];
        let choices: &[i8] = if nonzero { &[-1, 0, 1] } else { &[0, 1] };
        for &c in choices {
            self.coeffs[row] = c;
            self.assign(row, c as i64, false);
            self.visit(depth + 1, nonzero || c != 0);
            self.assign(row, c as i64, true);
            self.coeffs[row] = 0;
            if self.done() {
                return;
            }
        }
    }
}

fn canonical(coeffs: &[i8]) -> SignVector {
    SignVector::new(coeffs.to_vec()).expect("signs").canonical()
}

pub fn solve_branch_bound(family: &UnitVectorFamily, budget: u64) -> Result<Verdict> {
    solve_branch_bound_with_stats(family, budget).map(|(v, _)| v)
}

/// Branch and bound, also returning node statistics. The witness is the first
/// one met in branching order, normalized to canonical sign.
pub fn solve_branch_bound_with_stats(
    family: &UnitVectorFamily,
    budget: u64,
) -> Result<(Verdict, BranchBoundStats)> {
    if family.is_empty() {
        return Err(Error::contract("branch and bound needs m >= 1"));
    }
    let problem = Problem::new(family)?;
    let mut search = Search::new(&problem, Mode::FirstWitness, budget);
    search.visit(0, false);
    let stats = search.stats;
    let verdict = if let Some((coeffs, norm)) = search.found.first() {
        Verdict::Balancing {
            witness: canonical(coeffs),
            norm_sq_scaled: *norm,
            method: Method::BranchBound,
            explored: stats.nodes,
        }
    } else if search.aborted {
        Verdict::Inconclusive {
            explored: stats.nodes,
            budget,
            method: Method::BranchBound,
        }
    } else {
        problem.not_balancing(Method::BranchBound, stats.nodes)
    };
    Ok((verdict, stats))
}

/// Every canonical non-trivial combination with `||v|| <= 1`, split into
/// strict witnesses and exact-norm-1 combinations. Collection stops after
/// `cap` hits.
pub fn boundary_combinations(
    family: &UnitVectorFamily,
    budget: u64,
    cap: usize,
) -> Result<BoundaryScan> {
    if family.is_empty() {
        return Err(Error::contract("boundary scan needs m >= 1"));
    }
    let problem = Problem::new(family)?;
    let mut search = Search::new(&problem, Mode::Closed { cap }, budget);
    search.visit(0, false);
    let complete = !search.done();
    let mut below: Vec<SignVector> = search.found.iter().map(|(c, _)| canonical(c)).collect();
    let mut at_boundary: Vec<SignVector> = search.boundary.iter().map(|c| canonical(c)).collect();
    below.sort();
    at_boundary.sort();
    Ok(BoundaryScan {
        below,
        at_boundary,
        stats: search.stats,
        complete,
    })
}
