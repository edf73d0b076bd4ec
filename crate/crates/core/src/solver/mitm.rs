//! Meet-in-the-middle search over a spatial hash.
//!
//! The family is split into a head `A` (first `floor(m/2)` vectors) and a tail
//! `B`. All `3^|B|` signed sums of `B` are stored and bucketed by a grid over
//! a few key coordinates; for each signed sum `a` of `A` the cells that can
//! hold a `b` with `||a + b|| < 1` are probed and the candidates checked
//! exactly. A pair closer than 1 in full space is closer than 1 in every
//! projection, so the probe set is complete for any cell side.

use std::collections::HashMap;

use super::{signs, Method, Problem, Verdict};
use crate::error::{Error, Result};
use crate::vectorspace::UnitVectorFamily;

/// Default cap on stored partial-sum entries (`3^|B|` times active coordinates).
pub const DEFAULT_MEMORY_BUDGET: u64 = 1 << 25;

const PROBE_LIMIT: usize = 512;
const MAX_KEY_DIMS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MitmOptions {
    /// Grid cell side as a fraction of the unit length; `None` means
    /// `1 / sqrt(n + 1)`.
    pub cell_side: Option<f64>,
    /// Maximum number of stored partial-sum entries.
    pub memory_budget: u64,
}

impl Default for MitmOptions {
    fn default() -> Self {
        MitmOptions {
            cell_side: None,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }
}

/// Cell offsets `o` whose cells may hold an integer point within distance
/// `< radius` of a point in the origin cell.
fn probe_offsets(dims: usize, cell: i64, radius_sq: i128, limit: usize) -> Vec<Vec<i64>> {
    fn gap(o: i64, cell: i64) -> i128 {
        if o == 0 {
            0
        } else {
            ((o.abs() - 1) * cell + 1) as i128
        }
    }
    fn rec(
        dims: usize,
        cell: i64,
        left: i128,
        cur: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
        limit: usize,
    ) {
        if out.len() > limit {
            return;
        }
        if cur.len() == dims {
            out.push(cur.clone());
            return;
        }
        let mut o = 0i64;
        loop {
            let g = gap(o, cell);
            if g * g >= left {
                break;
            }
            for s in if o == 0 { vec![0] } else { vec![-o, o] } {
                cur.push(s);
                rec(dims, cell, left - g * g, cur, out, limit);
                cur.pop();
            }
            o += 1;
        }
    }
    let mut out = Vec::new();
    rec(dims, cell, radius_sq, &mut Vec::new(), &mut out, limit);
    out
}

pub fn solve_mitm(family: &UnitVectorFamily, options: MitmOptions) -> Result<Verdict> {
    let m = family.len();
    if m < 2 {
        return Err(Error::contract("meet-in-the-middle needs m >= 2"));
    }
    let side = options
        .cell_side
        .unwrap_or(1.0 / ((family.dim() + 1) as f64).sqrt());
    if !(side > 0.0 && side.is_finite()) {
        return Err(Error::parameter(format!(
            "cell side must be positive, got {side}"
        )));
    }
    let problem = Problem::new(family)?;
    let width = problem.active.max(1);
    let a_len = m / 2;
    let b_len = m - a_len;
    let b_count = 3u64.checked_pow(b_len as u32);
    let a_count = 3u64.checked_pow(a_len as u32);
    let (Some(b_count), Some(a_count)) = (b_count, a_count) else {
        return Ok(Verdict::Inconclusive {
            explored: 0,
            budget: options.memory_budget,
            method: Method::Mitm,
        });
    };
    if b_count.saturating_mul(width as u64) > options.memory_budget {
        return Ok(Verdict::Inconclusive {
            explored: 0,
            budget: options.memory_budget,
            method: Method::Mitm,
        });
    }

    let cell = ((side * problem.radius as f64).floor() as i64).max(1);

    // Key coordinates: those touched by the most tail vectors.
    let mut touch = vec![0usize; problem.active];
    for row in &problem.rows[a_len..] {
        for &(x, _) in row {
            touch[x] += 1;
        }
    }
    let mut order: Vec<usize> = (0..problem.active).collect();
    order.sort_by_key(|&x| (std::cmp::Reverse(touch[x]), x));
    let mut key_dims = 1usize.min(problem.active);
    let mut offsets = probe_offsets(key_dims, cell, problem.radius_sq, usize::MAX);
    while key_dims < problem.active.min(MAX_KEY_DIMS) {
        let next = probe_offsets(key_dims + 1, cell, problem.radius_sq, PROBE_LIMIT);
        if next.len() > PROBE_LIMIT {
            break;
        }
        key_dims += 1;
        offsets = next;
    }
    let keys: Vec<usize> = order[..key_dims].to_vec();

    // All tail sums in lexicographic order of their digits.
    let b_count = b_count as usize;
    let mut b_sums = vec![0i64; b_count * width];
    let mut b_canonical = vec![false; b_count];
    let mut grid: HashMap<Box<[i64]>, Vec<u32>> = HashMap::new();
    {
        let mut digits = vec![-1i8; b_len];
        let mut sum = vec![0i64; width];
        for j in 0..b_len {
            problem.apply(&mut sum, a_len + j, -1);
        }
        for idx in 0..b_count {
            b_sums[idx * width..(idx + 1) * width].copy_from_slice(&sum);
            b_canonical[idx] = digits.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0);
            let key: Box<[i64]> = keys.iter().map(|&x| sum[x].div_euclid(cell)).collect();
            grid.entry(key).or_default().push(idx as u32);
            let mut j = b_len;
            while j > 0 {
                j -= 1;
                if digits[j] < 1 {
                    digits[j] += 1;
                    problem.apply(&mut sum, a_len + j, 1);
                    break;
                }
                digits[j] = -1;
                problem.apply(&mut sum, a_len + j, -2);
            }
        }
    }

    let mut a_digits = vec![-1i8; a_len];
    let mut a_sum = vec![0i64; width];
    for j in 0..a_len {
        problem.apply(&mut a_sum, j, -1);
    }
    let mut probe = vec![0i64; key_dims];
    for a_idx in 0..a_count {
        let lead = a_digits.iter().find(|&&c| c != 0).copied();
        if lead != Some(-1) {
            let a_zero = lead.is_none();
            let base: Vec<i64> = keys.iter().map(|&x| (-a_sum[x]).div_euclid(cell)).collect();
            let mut best: Option<(usize, i128)> = None;
            for off in &offsets {
                for (p, (b, o)) in probe.iter_mut().zip(base.iter().zip(off)) {
                    *p = b + o;
                }
                let Some(bucket) = grid.get(probe.as_slice()) else {
                    continue;
                };
                for &b_idx in bucket {
                    let b_idx = b_idx as usize;
                    if best.is_some_and(|(bi, _)| b_idx >= bi) || (a_zero && !b_canonical[b_idx]) {
                        continue;
                    }
                    let b = &b_sums[b_idx * width..(b_idx + 1) * width];
                    let norm: i128 = a_sum
                        .iter()
                        .zip(b)
                        .map(|(&x, &y)| {
                            let s = (x + y) as i128;
                            s * s
                        })
                        .sum();
                    if norm < problem.radius_sq {
                        best = Some((b_idx, norm));
                    }
                }
            }
            if let Some((b_idx, norm)) = best {
                let mut digits = a_digits.clone();
                digits.extend(
                    (0..b_len)
                        .map(|j| ((b_idx / 3usize.pow((b_len - 1 - j) as u32)) % 3) as i8 - 1),
                );
                return Ok(Verdict::Balancing {
                    witness: signs(&digits),
                    norm_sq_scaled: norm,
                    method: Method::Mitm,
                    explored: b_count as u64 + a_idx + 1,
                });
            }
        }
        let mut j = a_len;
        while j > 0 {
            j -= 1;
            if a_digits[j] < 1 {
                a_digits[j] += 1;
                problem.apply(&mut a_sum, j, 1);
                break;
            }
            a_digits[j] = -1;
            problem.apply(&mut a_sum, j, -2);
        }
    }
    Ok(problem.not_balancing(Method::Mitm, b_count as u64 + a_count))
}
