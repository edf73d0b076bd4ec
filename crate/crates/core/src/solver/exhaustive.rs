//! Full enumeration of canonical sign vectors in lexicographic order.
//!
//! The canonical order is split into blocks: a block fixes the leading
//! position `f` (the first `+1`) and a prefix of the following digits, and
//! leaves at most `FREE_DIGITS` trailing digits to an odometer. Blocks are
//! scanned in parallel, a window at a time, and reduced in order, so the
//! result does not depend on the thread count.

use rayon::prelude::*;

use super::{signs, Method, Problem, Verdict};
use crate::error::{Error, Result};
use crate::vectorspace::UnitVectorFamily;

const FREE_DIGITS: usize = 9;

#[derive(Clone, Debug)]
struct Block {
    lead: usize,
    prefix: Vec<i8>,
}

impl Block {
    fn free_digits(&self, m: usize) -> usize {
        m - 1 - self.lead - self.prefix.len()
    }

    fn size(&self, m: usize) -> u64 {
        3u64.pow(self.free_digits(m) as u32)
    }
}

/// Lazily yields blocks in canonical order.
struct Blocks {
    m: usize,
    lead: Option<usize>,
    prefix: Vec<i8>,
    fresh: bool,
}

impl Blocks {
    fn new(m: usize) -> Self {
        let mut b = Blocks {
            m,
            lead: None,
            prefix: Vec::new(),
            fresh: true,
        };
        b.start_lead(m - 1);
        b
    }

    fn start_lead(&mut self, lead: usize) {
        let tail = self.m - 1 - lead;
        self.lead = Some(lead);
        self.prefix = vec![-1; tail.saturating_sub(FREE_DIGITS)];
        self.fresh = true;
    }
}

impl Iterator for Blocks {
    type Item = Block;

    fn next(&mut self) -> Option<Block> {
        let lead = self.lead?;
        if !self.fresh {
            // Advance the prefix odometer; on wrap-around move the lead left.
            let mut j = self.prefix.len();
            let advanced = loop {
                if j == 0 {
                    break false;
                }
                j -= 1;
                if self.prefix[j] < 1 {
                    self.prefix[j] += 1;
                    break true;
                }
                self.prefix[j] = -1;
            };
            if !advanced {
                if lead == 0 {
                    self.lead = None;
                    return None;
                }
                self.start_lead(lead - 1);
            }
        }
        self.fresh = false;
        Some(Block {
            lead: self.lead?,
            prefix: self.prefix.clone(),
        })
    }
}

#[derive(Debug)]
struct BlockScan {
    /// Offset within the block and digits of the first witness.
    witness: Option<(u64, Vec<i8>, i128)>,
    /// Smallest norm seen and the first sign vector attaining it.
    min: (i128, Vec<i8>),
}

fn scan_block(problem: &Problem, block: &Block) -> BlockScan {
    let m = problem.len();
    let mut digits = vec![0i8; m];
    let mut sum = vec![0i64; problem.active];
    let mut norm = 0i128;
    digits[block.lead] = 1;
    norm += problem.apply(&mut sum, block.lead, 1);
    let free_start = block.lead + 1 + block.prefix.len();
    for (j, &c) in block.prefix.iter().enumerate() {
        digits[block.lead + 1 + j] = c;
        norm += problem.apply(&mut sum, block.lead + 1 + j, c as i64);
    }
    for (j, d) in digits.iter_mut().enumerate().skip(free_start) {
        *d = -1;
        norm += problem.apply(&mut sum, j, -1);
    }

    let mut min = (norm, digits.clone());
    let mut offset = 0u64;
    loop {
        if norm < problem.radius_sq {
            return BlockScan {
                witness: Some((offset, digits.clone(), norm)),
                min: (norm, digits),
            };
        }
        if norm < min.0 {
            min = (norm, digits.clone());
        }
        // Odometer step over the free digits, last digit fastest.
        let mut j = m;
        loop {
            if j == free_start {
                return BlockScan { witness: None, min };
            }
            j -= 1;
            if digits[j] < 1 {
                digits[j] += 1;
                norm += problem.apply(&mut sum, j, 1);
                break;
            }
            digits[j] = -1;
            norm += problem.apply(&mut sum, j, -2);
        }
        offset += 1;
    }
}

/// Enumerates all `(3^m - 1) / 2` canonical sign vectors (up to `budget`).
///
/// Returns the lexicographically smallest witness, or the exact minimum
/// squared norm when there is none. Blocks are admitted whole, so the search
/// stops at the last block boundary within the budget.
pub fn solve_exhaustive(family: &UnitVectorFamily, budget: u64) -> Result<Verdict> {
    if family.is_empty() {
        return Err(Error::contract("exhaustive search needs m >= 1"));
    }
    let problem = Problem::new(family)?;
    let m = problem.len();
    let window = 4 * rayon::current_num_threads().max(1);

    let mut blocks = Blocks::new(m).peekable();
    let mut explored = 0u64;
    let mut best: Option<(i128, Vec<i8>)> = None;
    loop {
        let mut batch = Vec::with_capacity(window);
        while batch.len() < window {
            let Some(next) = blocks.peek() else { break };
            let size = next.size(m);
            if explored + batch.iter().map(|b: &Block| b.size(m)).sum::<u64>() + size > budget {
                break;
            }
            batch.push(blocks.next().expect("peeked"));
        }
        if batch.is_empty() {
            break;
        }
        let scans: Vec<BlockScan> = batch.par_iter().map(|b| scan_block(&problem, b)).collect();
        for (block, scan) in batch.iter().zip(scans) {
            if let Some((offset, digits, norm)) = scan.witness {
                return Ok(Verdict::Balancing {
                    witness: signs(&digits),
                    norm_sq_scaled: norm,
                    method: Method::Exhaustive,
                    explored: explored + offset + 1,
                });
            }
            if best.as_ref().is_none_or(|b| scan.min.0 < b.0) {
                best = Some(scan.min);
            }
            explored += block.size(m);
        }
    }
    if blocks.peek().is_some() {
        return Ok(Verdict::Inconclusive {
            explored,
            budget,
            method: Method::Exhaustive,
        });
    }
    let (min, digits) = best.expect("at least one block");
    Ok(Verdict::NotBalancing {
        min_norm_sq_scaled: Some(min),
        minimizer: Some(signs(&digits)),
        method: Method::Exhaustive,
        explored,
    })
}
