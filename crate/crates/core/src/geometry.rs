//! Integer point sets: equal-norm lattice shells, strict convex position and
//! lonely points of Minkowski sums.
//!
//! A point of `C + T` is *lonely* when it has exactly one representation
//! `y + t` with `y` in `C` and `t` in `T`. For `C` in strictly convex position
//! every `y` in `C` owns a lonely point `y + t`: take a functional `f` that `y`
//! alone maximizes over `C` and maximize `f` over `C + T`.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Point = Vec<i64>;

/// Default cap on `(2D+1)^d`, the number of box points a shell search covers.
pub const SHELL_ENUMERATION_BUDGET: u128 = 1 << 36;

pub fn norm_sq(p: &[i64]) -> i128 {
    p.iter().map(|&x| x as i128 * x as i128).sum()
}

pub fn add_points(a: &[i64], b: &[i64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_points(a: &[i64], b: &[i64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// A set of distinct integer points in `Z^dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    dim: usize,
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(dim: usize, points: Vec<Point>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::contract(format!(
                "point {p:?} is not {dim}-dimensional"
            )));
        }
        let mut seen = HashSet::with_capacity(points.len());
        if let Some(p) = points.iter().find(|p| !seen.insert(*p)) {
            return Err(Error::contract(format!("point {p:?} repeated")));
        }
        Ok(PointSet { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        self.points.iter().any(|q| q == p)
    }

    fn is_equal_norm(&self) -> bool {
        match self.points.first() {
            Some(first) => {
                let r = norm_sq(first);
                self.points.iter().all(|p| norm_sq(p) == r)
            }
            None => true,
        }
    }
}

/// Integer points sharing one squared Euclidean norm, sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeShell {
    dim: usize,
    radius_sq: i64,
    points: Vec<Point>,
    r: i64,
    box_bound: i64,
}

impl LatticeShell {
    pub fn new(dim: usize, mut points: Vec<Point>, box_bound: i64) -> Result<Self> {
        let set = PointSet::new(dim, points.clone())?;
        let first = set
            .points
            .first()
            .ok_or_else(|| Error::contract("a shell needs at least one point"))?;
        let radius_sq = norm_sq(first);
        if radius_sq == 0 {
            return Err(Error::contract("a shell of radius 0 is a single point"));
        }
        if !set.is_equal_norm() {
            return Err(Error::contract("shell points do not share one norm"));
        }
        let radius_sq = i64::try_from(radius_sq).map_err(|_| Error::Overflow("shell radius"))?;
        let r = points
            .iter()
            .flat_map(|p| p.iter().map(|x| x.abs()))
            .max()
            .unwrap_or(0);
        if r > box_bound {
            return Err(Error::contract(format!(
                "shell reaches infinity-norm {r}, outside the box bound {box_bound}"
            )));
        }
        points.sort();
        Ok(LatticeShell {
            dim,
            radius_sq,
            points,
            r,
            box_bound,
        })
    }

    /// A shell taken as recorded, without validation. Used for instance
    /// files, so that inconsistencies surface in structural verification
    /// under their own names.
    pub(crate) fn from_parts_unchecked(
        dim: usize,
        points: Vec<Point>,
        radius_sq: i64,
        r: i64,
        box_bound: i64,
    ) -> Self {
        LatticeShell {
            dim,
            radius_sq,
            points,
            r,
            box_bound,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius_sq(&self) -> i64 {
        self.radius_sq
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest infinity-norm over the shell.
    pub fn r(&self) -> i64 {
        self.r
    }

    /// The `D` of the enclosing box `[-D, D]^d`.
    pub fn box_bound(&self) -> i64 {
        self.box_bound
    }

    pub fn point_set(&self) -> PointSet {
        PointSet {
            dim: self.dim,
            points: self.points.clone(),
        }
    }
}

/// An integer functional `f` with `f(y) > f(y')` for every other `y'` in `set`,
/// or `None` when `y` is not a vertex of the convex hull.
///
/// Equal-norm sets use `f = y` (Cauchy-Schwarz); anything else goes through an
/// exact rational feasibility problem.
pub fn separating_functional(y: &[i64], set: &PointSet) -> Option<Vec<BigInt>> {
    if set.is_equal_norm() {
        return Some(y.iter().map(|&v| BigInt::from(v)).collect());
    }
    let rows: Vec<Vec<BigInt>> = set
        .points
        .iter()
        .filter(|p| p.as_slice() != y)
        .map(|p| y.iter().zip(p).map(|(a, b)| BigInt::from(a - b)).collect())
        .collect();
    if rows.is_empty() {
        return Some(vec![BigInt::zero(); set.dim]);
    }
    let f = strictly_positive_direction(&rows, set.dim)?;
    let lcm = f.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    Some(
        f.iter()
            .map(|q| (q * BigRational::from(lcm.clone())).to_integer())
            .collect(),
    )
}

/// Every point of `set` is a vertex of its convex hull.
pub fn is_strictly_convex(set: &PointSet) -> bool {
    set.is_equal_norm()
        || set
            .points
            .iter()
            .all(|y| separating_functional(y, set).is_some())
}

/// Finds `f` with `row . f >= 1` for every row, by phase-one simplex over the
/// rationals with Bland's rule. Free variables are split as `f = f+ - f-`.
fn strictly_positive_direction(rows: &[Vec<BigInt>], dim: usize) -> Option<Vec<BigRational>> {
    let n_rows = rows.len();
    // Columns: f+ (dim), f- (dim), surplus (n_rows), artificial (n_rows), rhs.
    let n_cols = 2 * dim + 2 * n_rows;
    let rhs = n_cols;
    let zero = BigRational::zero();
    let mut tab: Vec<Vec<BigRational>> = rows
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let mut row = vec![zero.clone(); n_cols + 1];
            for (j, wj) in w.iter().enumerate() {
                row[j] = BigRational::from(wj.clone());
                row[dim + j] = BigRational::from(-wj.clone());
            }
            row[2 * dim + i] = -BigRational::one();
            row[2 * dim + n_rows + i] = BigRational::one();
            row[rhs] = BigRational::one();
            row
        })
        .collect();
    let mut basis: Vec<usize> = (0..n_rows).map(|i| 2 * dim + n_rows + i).collect();
    // Objective row: the artificial sum decreases by z_j per unit of column j.
    let mut z = vec![zero.clone(); n_cols + 1];
    for row in &tab {
        for j in 0..2 * dim + n_rows {
            z[j] += &row[j];
        }
        z[rhs] += &row[rhs];
    }

    while let Some(enter) = (0..n_cols).find(|&j| z[j].is_positive()) {
        let mut leave: Option<(usize, BigRational)> = None;
        for (i, row) in tab.iter().enumerate() {
            if !row[enter].is_positive() {
                continue;
            }
            let ratio = &row[rhs] / &row[enter];
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        // Phase one is bounded below by zero, so some row always blocks.
        let (pr, _) = leave?;
        let pivot = tab[pr][enter].clone();
        for v in tab[pr].iter_mut() {
            *v /= &pivot;
        }
        let pivot_row = tab[pr].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i == pr || row[enter].is_zero() {
                continue;
            }
            let factor = row[enter].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= &factor * p;
            }
        }
        let factor = z[enter].clone();
        for (v, p) in z.iter_mut().zip(&pivot_row) {
            *v -= &factor * p;
        }
        basis[pr] = enter;
    }

    if !z[rhs].is_zero() {
        return None;
    }
    let mut x = vec![zero; 2 * dim];
    for (i, &b) in basis.iter().enumerate() {
        if b < 2 * dim {
            x[b] = tab[i][rhs].clone();
        }
    }
    Some((0..dim).map(|j| &x[j] - &x[dim + j]).collect())
}

/// A point `x = y + t` of `C + T` with a single representation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LonelyPoint {
    pub x: Point,
    pub t: Point,
    pub y: Point,
}

/// All lonely points of `C + T`, sorted by `x`.
pub fn lonely_points(c: &PointSet, t: &PointSet) -> Result<Vec<LonelyPoint>> {
    check_lemma_inputs(c, t)?;
    let mut reps: HashMap<Point, (usize, usize, usize)> = HashMap::new();
    for (yi, y) in c.points.iter().enumerate() {
        for (ti, tv) in t.points.iter().enumerate() {
            reps.entry(add_points(y, tv))
                .and_modify(|e| e.0 += 1)
                .or_insert((1, yi, ti));
        }
    }
    let mut out: Vec<LonelyPoint> = reps
        .into_iter()
        .filter(|(_, (count, _, _))| *count == 1)
        .map(|(x, (_, yi, ti))| LonelyPoint {
            x,
            t: t.points[ti].clone(),
            y: c.points[yi].clone(),
        })
        .collect();
    out.sort_by(|a, b| a.x.cmp(&b.x));
    Ok(out)
}

/// A lonely point `x = y + t` for the given `y`, returned as `(x, t)`.
///
/// Maximizes the separating functional of `y` over `C + T`; among maximizers
/// the lexicographically smallest `x` is returned.
pub fn lonely_witness_for(y: &[i64], c: &PointSet, t: &PointSet) -> Result<(Point, Point)> {
    if !c.contains(y) {
        return Err(Error::contract(format!("{y:?} is not a point of C")));
    }
    if t.is_empty() {
        return Err(Error::contract("the translation set T is empty"));
    }
    if t.dim != c.dim {
        return Err(Error::contract("C and T live in different dimensions"));
    }
    let f = separating_functional(y, c)
        .ok_or_else(|| Error::contract(format!("{y:?} is not a vertex of conv(C)")))?;
    let eval = |p: &[i64]| -> BigInt { f.iter().zip(p).map(|(a, &b)| a * b).sum() };

    // f(c + t) = f(c) + f(t), so the maximizers over C + T are exactly the
    // sums of maximizers over C and over T.
    let fy = eval(y);
    if c.points.iter().any(|p| p.as_slice() != y && eval(p) >= fy) {
        return Err(Error::contract(format!(
            "{y:?} is not the unique maximizer of its functional"
        )));
    }
    let mut best: Option<(BigInt, &Point)> = None;
    for tv in &t.points {
        let v = eval(tv);
        let replace = match &best {
            None => true,
            Some((bv, bt)) => v > *bv || (v == *bv && tv < *bt),
        };
        if replace {
            best = Some((v, tv));
        }
    }
    let (_, tv) = best.expect("T is nonempty");
    Ok((add_points(y, tv), tv.clone()))
}

fn check_lemma_inputs(c: &PointSet, t: &PointSet) -> Result<()> {
    if c.is_empty() || t.is_empty() {
        return Err(Error::contract("C and T must be nonempty"));
    }
    if c.dim != t.dim {
        return Err(Error::contract("C and T live in different dimensions"));
    }
    if !is_strictly_convex(c) {
        return Err(Error::contract("C is not in strictly convex position"));
    }
    Ok(())
}

/// The most populated norm class of `[-D, D]^d`, without listing its points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShellProfile {
    pub dim: usize,
    pub box_bound: i64,
    pub radius_sq: i64,
    pub count: u128,
    pub r: i64,
}

/// Counts of points of `[-D, D]^j` per squared norm, for `j = 0..=d`.
struct NormHistogram {
    box_bound: i64,
    ways: Vec<Vec<u128>>,
}

impl NormHistogram {
    fn new(d: usize, box_bound: i64, budget: u128) -> Result<Self> {
        if d == 0 || box_bound < 1 {
            return Err(Error::parameter("shell search needs d >= 1 and D >= 1"));
        }
        let side = 2 * box_bound as u128 + 1;
        let needed = (0..d).try_fold(1u128, |acc, _| acc.checked_mul(side));
        match needed {
            Some(n) if n <= budget => {}
            other => {
                return Err(Error::Budget {
                    needed: other.unwrap_or(u128::MAX),
                    budget,
                })
            }
        }
        let dd = (box_bound * box_bound) as usize;
        let mut ways = vec![vec![1u128]];
        for j in 1..=d {
            let prev = &ways[j - 1];
            let mut next = vec![0u128; j * dd + 1];
            for (s, &w) in prev.iter().enumerate() {
                if w == 0 {
                    continue;
                }
                for v in -box_bound..=box_bound {
                    next[s + (v * v) as usize] += w;
                }
            }
            ways.push(next);
        }
        Ok(NormHistogram { box_bound, ways })
    }

    fn count(&self, j: usize, s: i64) -> u128 {
        self.ways[j].get(s as usize).copied().unwrap_or(0)
    }

    /// Largest `|x_i|` among points of squared norm `s` in the box.
    fn max_abs(&self, d: usize, s: i64) -> i64 {
        (0..=self.box_bound)
            .rev()
            .find(|&c| c * c <= s && self.count(d - 1, s - c * c) > 0)
            .unwrap_or(0)
    }

    /// Points of squared norm `s`, in lexicographic order.
    fn points(&self, d: usize, s: i64) -> Vec<Point> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(d);
        self.collect(d, s, &mut cur, &mut out);
        out
    }

    fn collect(&self, d: usize, remaining: i64, cur: &mut Point, out: &mut Vec<Point>) {
        let left = d - cur.len();
        if left == 0 {
            if remaining == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for v in -self.box_bound..=self.box_bound {
            let rest = remaining - v * v;
            if rest >= 0 && self.count(left - 1, rest) > 0 {
                cur.push(v);
                self.collect(d, rest, cur, out);
                cur.pop();
            }
        }
    }
}

/// Largest norm class among the nonzero points of `[-D, D]^d`.
///
/// Ties between equally large classes go to the largest squared norm.
pub fn shell_profile(d: usize, box_bound: i64, budget: u128) -> Result<ShellProfile> {
    let hist = NormHistogram::new(d, box_bound, budget)?;
    let top = &hist.ways[d];
    let (radius_sq, count) =
        top.iter()
            .enumerate()
            .skip(1)
            .fold((0usize, 0u128), |best, (s, &c)| {
                if c >= best.1 && c > 0 {
                    (s, c)
                } else {
                    best
                }
            });
    let radius_sq = radius_sq as i64;
    Ok(ShellProfile {
        dim: d,
        box_bound,
        radius_sq,
        count,
        r: hist.max_abs(d, radius_sq),
    })
}

/// The most populated equal-norm class of `[-D, D]^d` (pigeonhole shell).
pub fn find_shell(d: usize, box_bound: i64) -> Result<LatticeShell> {
    find_shell_with_budget(d, box_bound, SHELL_ENUMERATION_BUDGET)
}

pub fn find_shell_with_budget(d: usize, box_bound: i64, budget: u128) -> Result<LatticeShell> {
    let hist = NormHistogram::new(d, box_bound, budget)?;
    let profile = shell_profile(d, box_bound, budget)?;
    LatticeShell::new(d, hist.points(d, profile.radius_sq), box_bound)
}

/// The equal-norm shell of smallest squared norm with at least `min_points`
/// points. Its box bound is its own infinity-norm.
pub fn smallest_shell(d: usize, min_points: usize) -> Result<LatticeShell> {
    if d == 1 && min_points > 2 {
        return Err(Error::parameter(
            "one-dimensional shells have at most 2 points",
        ));
    }
    let mut box_bound = 1i64;
    loop {
        let hist = NormHistogram::new(d, box_bound, SHELL_ENUMERATION_BUDGET)?;
        // Every point of norm^2 <= D^2 lies inside the box, so these counts
        // are complete.
        let hit = (1..=box_bound * box_bound).find(|&s| hist.count(d, s) >= min_points as u128);
        if let Some(s) = hit {
            let points = hist.points(d, s);
            let r = points.iter().flatten().map(|x| x.abs()).max().unwrap_or(0);
            return LatticeShell::new(d, points, r);
        }
        box_bound *= 2;
    }
}
