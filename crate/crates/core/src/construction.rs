//! Non-balancing unit-vector families built from a lattice shell.
//!
//! Coordinates of `R^(L^d)` are the points of `[1, L]^d`. With a chain
//! `S_0 ⊂ S_1 ⊂ … ⊂ S_k` of shell subsets, `|S_i| = p^(2i)`, the family holds
//!
//! ```text
//! u_{t,i} = p^(-i) * sum_{y in S_i} e_{t+y},   t in [1+r, L-r]^d, 0 <= i <= k
//! ```
//!
//! Each `u_{t,i}` has `p^(2i)` entries of `p^(-i)` and is therefore a unit
//! vector. In a signed combination the top level `j` in use leaves `±p^(-j)`
//! at a lonely point for every `y` in `S_j`, while the lower levels only add
//! multiples of `p^(1-j)`; so at least `p^(2j)` coordinates keep magnitude
//! `>= p^(-j)` and the norm is at least 1.

use crate::error::{Error, Result};
use crate::geometry::{self, add_points, LatticeShell, Point};
use crate::vectorspace::{checked_pow, coordinate_index, ScaledVector, UnitVectorFamily};

/// Upper limit on the number of vectors `build_instance` will materialize.
pub const MAX_INSTANCE_VECTORS: u128 = 20_000_000;

/// What sits at level 0 of a construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LevelZero {
    /// `u_{t,0} = e_{t+y_0}` for each translate `t`, as in the general recipe.
    Translates,
    /// Every basis vector `e_x` of `R^(L^d)`, as in the 5 x 5 grid example.
    AllBasis,
}

impl LevelZero {
    pub fn as_str(self) -> &'static str {
        match self {
            LevelZero::Translates => "translates",
            LevelZero::AllBasis => "all-basis",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "translates" => Some(LevelZero::Translates),
            "all-basis" => Some(LevelZero::AllBasis),
            _ => None,
        }
    }
}

/// Everything that determines a constructed family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructionParams {
    base: u32,
    depth: u32,
    side: u64,
    shell: LatticeShell,
    chain: Vec<Vec<Point>>,
    level_zero: LevelZero,
}

impl ConstructionParams {
    pub fn new(
        base: u32,
        depth: u32,
        side: u64,
        shell: LatticeShell,
        level_zero: LevelZero,
    ) -> Result<Self> {
        if base < 2 {
            return Err(Error::parameter(format!(
                "base p must be at least 2, got {base}"
            )));
        }
        let chain = nested_subsets(&shell, depth, base)?;
        if side as i128 <= 2 * shell.r() as i128 {
            return Err(Error::parameter(format!(
                "side L = {side} must exceed 2r = {}",
                2 * shell.r()
            )));
        }
        Ok(ConstructionParams {
            base,
            depth,
            side,
            shell,
            chain,
            level_zero,
        })
    }

    /// Parameters taken as recorded, without validation.
    pub(crate) fn from_parts_unchecked(
        base: u32,
        depth: u32,
        side: u64,
        shell: LatticeShell,
        chain: Vec<Vec<Point>>,
        level_zero: LevelZero,
    ) -> Self {
        ConstructionParams {
            base,
            depth,
            side,
            shell,
            chain,
            level_zero,
        }
    }

    /// Lattice dimension `d`.
    pub fn dim(&self) -> usize {
        self.shell.dim()
    }

    /// The base `p`.
    pub fn base(&self) -> u32 {
        self.base
    }

    /// Chain depth `k`.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Side length `L`.
    pub fn side(&self) -> u64 {
        self.side
    }

    pub fn shell(&self) -> &LatticeShell {
        &self.shell
    }

    /// `S_0 ⊂ … ⊂ S_k`.
    pub fn chain(&self) -> &[Vec<Point>] {
        &self.chain
    }

    pub fn chain_sizes(&self) -> Vec<usize> {
        self.chain.iter().map(Vec::len).collect()
    }

    pub fn level_zero(&self) -> LevelZero {
        self.level_zero
    }

    /// Ambient dimension `n = L^d`.
    pub fn ambient_dim(&self) -> Result<usize> {
        let n = (self.side as u128)
            .checked_pow(self.dim() as u32)
            .ok_or(Error::Overflow("ambient dimension"))?;
        usize::try_from(n).map_err(|_| Error::Overflow("ambient dimension"))
    }

    /// Number of translates, `(L - 2r)^d`.
    pub fn translate_count(&self) -> u128 {
        let w = (self.side as u128).saturating_sub(2 * self.shell.r().max(0) as u128);
        w.saturating_pow(self.dim() as u32)
    }

    /// Size of the family these parameters produce.
    pub fn vector_count(&self) -> u128 {
        let per_level = self.translate_count();
        match self.level_zero {
            LevelZero::Translates => per_level.saturating_mul(self.depth as u128 + 1),
            LevelZero::AllBasis => {
                let n = (self.side as u128).saturating_pow(self.dim() as u32);
                n.saturating_add(per_level.saturating_mul(self.depth as u128))
            }
        }
    }

    /// Vector labels in output order: level-major, then translates (or basis
    /// points) in lexicographic order.
    pub fn labels(&self) -> Vec<(u32, Point)> {
        let d = self.dim();
        let r = self.shell.r();
        let lo = 1 + r;
        let hi = self.side as i64 - r;
        let mut out = Vec::new();
        for level in 0..=self.depth {
            if level == 0 && self.level_zero == LevelZero::AllBasis {
                for x in box_points(d, 1, self.side as i64) {
                    out.push((0, x));
                }
            } else {
                for t in box_points(d, lo, hi) {
                    out.push((level, t));
                }
            }
        }
        out
    }

    /// The offsets summed by the vector at `level`: `S_level`, except that an
    /// all-basis level 0 is the single offset `0`.
    pub fn level_offsets(&self, level: u32) -> Vec<Point> {
        if level == 0 && self.level_zero == LevelZero::AllBasis {
            vec![vec![0; self.dim()]]
        } else {
            self.chain[level as usize].clone()
        }
    }
}

/// Points of `[lo, hi]^d` in lexicographic order (last component fastest).
pub fn box_points(d: usize, lo: i64, hi: i64) -> Vec<Point> {
    if hi < lo {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = vec![lo; d];
    loop {
        out.push(cur.clone());
        let mut j = d;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            if cur[j] < hi {
                cur[j] += 1;
                break;
            }
            cur[j] = lo;
        }
    }
}

/// `S_0 ⊂ … ⊂ S_k` with `|S_i| = p^(2i)`: prefixes of the lexicographically
/// sorted shell.
pub fn nested_subsets(shell: &LatticeShell, depth: u32, base: u32) -> Result<Vec<Vec<Point>>> {
    let need = checked_pow(base, 2 * depth)?;
    if (shell.len() as i128) < need {
        return Err(Error::parameter(format!(
            "shell has {} points but depth {depth} with base {base} needs p^(2k) = {need}",
            shell.len()
        )));
    }
    let mut sorted = shell.points().to_vec();
    sorted.sort();
    Ok((0..=depth)
        .map(|i| sorted[..(base as usize).pow(2 * i)].to_vec())
        .collect())
}

/// Materializes the family described by `params`, with provenance attached.
pub fn build_instance(params: &ConstructionParams) -> Result<UnitVectorFamily> {
    let count = params.vector_count();
    if count > MAX_INSTANCE_VECTORS {
        return Err(Error::parameter(format!(
            "{count} vectors exceeds the instance limit of {MAX_INSTANCE_VECTORS}"
        )));
    }
    let n = params.ambient_dim()?;
    let (p, k) = (params.base, params.depth);
    let offsets: Vec<Vec<Point>> = (0..=k).map(|i| params.level_offsets(i)).collect();
    let numerators: Vec<i64> = (0..=k)
        .map(|i| {
            checked_pow(p, k - i)
                .and_then(|v| i64::try_from(v).map_err(|_| Error::Overflow("vector numerator")))
        })
        .collect::<Result<_>>()?;
    let vectors = params
        .labels()
        .into_iter()
        .map(|(level, t)| {
            let entries = offsets[level as usize]
                .iter()
                .map(|y| {
                    Ok((
                        coordinate_index(&add_points(&t, y), params.side)?,
                        numerators[level as usize],
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            ScaledVector::new(n, p, k, entries)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UnitVectorFamily::new(vectors)?.with_provenance(params.clone()))
}

/// Parameters of the 34-vector family in `R^25`: the 5 x 5 grid with every
/// basis vector plus half the sum of the four neighbours of each interior
/// point.
pub fn figure_example_params() -> ConstructionParams {
    let cross = LatticeShell::new(2, vec![vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]], 1)
        .expect("unit cross is a shell");
    ConstructionParams::new(2, 1, 5, cross, LevelZero::AllBasis).expect("valid example parameters")
}

pub fn figure_example() -> UnitVectorFamily {
    build_instance(&figure_example_params()).expect("example family builds")
}

/// Parameter choice `D = 2^d`, `L = floor(2^(lambda d))` with `p = 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlannedParameters {
    pub lambda: f64,
    pub dim: usize,
    pub box_bound: i64,
    pub side: u64,
    pub shell: LatticeShell,
    pub depth: u32,
    /// `(k + 1)(L - 2r)^d`.
    pub vector_count: u128,
    /// `n = L^d`, when it fits.
    pub ambient_dim: Option<u128>,
    /// `m / (n log2 n)`.
    pub ratio: f64,
    /// The open interval `(sqrt(lambda), lambda)` for the interpolation
    /// constant used to cover dimensions between consecutive `L^d`. Recorded
    /// only; no instance is built from it.
    pub mu_range: (f64, f64),
}

impl PlannedParameters {
    pub fn params(&self) -> Result<ConstructionParams> {
        ConstructionParams::new(
            2,
            self.depth,
            self.side,
            self.shell.clone(),
            LevelZero::Translates,
        )
    }
}

pub fn plan_parameters(lambda: f64, d: usize) -> Result<PlannedParameters> {
    plan_parameters_with_budget(lambda, d, geometry::SHELL_ENUMERATION_BUDGET)
}

pub fn plan_parameters_with_budget(
    lambda: f64,
    d: usize,
    budget: u128,
) -> Result<PlannedParameters> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(Error::parameter(format!(
            "lambda must be a finite real > 1, got {lambda}"
        )));
    }
    if d == 0 || d > 62 {
        return Err(Error::parameter(format!("d = {d} outside 1..=62")));
    }
    let box_bound = 1i64 << d;
    let shell = geometry::find_shell_with_budget(d, box_bound, budget)?;
    let side_f = (lambda * d as f64).exp2().floor();
    if side_f >= u64::MAX as f64 {
        return Err(Error::Overflow("side length"));
    }
    let side = side_f as u64;
    if side as i128 <= 2 * shell.r() as i128 {
        return Err(Error::parameter(format!(
            "d too small for lambda = {lambda}: L = {side} does not exceed 2r = {}",
            2 * shell.r()
        )));
    }
    // Largest k with 4^k <= |S|.
    let depth = ((usize::BITS - 1 - shell.len().leading_zeros()) / 2) as u32;
    let width = side - 2 * shell.r() as u64;
    let vector_count = (depth as u128 + 1).saturating_mul((width as u128).saturating_pow(d as u32));
    let ambient_dim = (side as u128).checked_pow(d as u32);
    let log2_n = d as f64 * (side as f64).log2();
    let ratio = (depth as f64 + 1.0) * (width as f64 / side as f64).powi(d as i32) / log2_n;
    Ok(PlannedParameters {
        lambda,
        dim: d,
        box_bound,
        side,
        shell,
        depth,
        vector_count,
        ambient_dim,
        ratio,
        mu_range: (lambda.sqrt(), lambda),
    })
}
