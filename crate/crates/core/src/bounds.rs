//! Numeric bounds on `sigma(n)`, the least `m` such that every family of `m`
//! unit vectors in `R^n` is selectively balancing.
//!
//! The upper side is the counting threshold: `m` vectors balance as soon as
//! `2^m > (e (m/n + 2) sqrt(n + 1))^n`. The lower side comes from explicit
//! non-balancing constructions. All threshold decisions are certified with
//! the enclosures of [`crate::interval`].

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, SHELL_ENUMERATION_BUDGET};
use crate::interval::{decide_sign, ln2, ln_ratio, Enclosure};

/// Default upper limit for the threshold scan.
pub const DEFAULT_THRESHOLD_CAP: u64 = 1_000_000;

fn big(v: u64) -> BigInt {
    BigInt::from(v)
}

/// `m ln 2 - n - n ln((m + 2n)/n) - (n/2) ln(n + 1)`, enclosed.
fn prop1_margin(m: u64, n: u64, prec: u32) -> Result<Enclosure> {
    let lhs = ln2(prec).scale(&big(m));
    let alpha = ln_ratio(&big(m + 2 * n), &big(n), prec)?.scale(&big(n));
    let root = ln_ratio(&big(n + 1), &BigInt::one(), prec)?
        .scale(&big(n))
        .div_int(&big(2));
    Ok(lhs.sub(&Enclosure::exact(n, prec)).sub(&alpha).sub(&root))
}

fn prop1_margin_f64(m: u64, n: u64) -> f64 {
    let (m, n) = (m as f64, n as f64);
    m * std::f64::consts::LN_2 - n - n * ((m + 2.0 * n) / n).ln() - 0.5 * n * (n + 1.0).ln()
}

/// Certified truth value of `2^m > (e (m/n + 2) sqrt(n + 1))^n`.
pub fn prop1_condition(m: u64, n: u64) -> Result<bool> {
    if m == 0 || n == 0 {
        return Err(Error::contract("prop1 condition needs m, n >= 1"));
    }
    decide_sign("the counting inequality", |prec| prop1_margin(m, n, prec))
}

/// Smallest `m` satisfying [`prop1_condition`], or `None` above `cap`.
///
/// The margin is increasing in `m` (its derivative is `ln 2 - n/(m + 2n) > 0`),
/// so a floating-point bisection gives a guess that is then walked to the
/// exact certified boundary.
pub fn prop1_threshold_with_cap(n: u64, cap: u64) -> Result<Option<u64>> {
    if n == 0 {
        return Err(Error::contract("prop1 threshold needs n >= 1"));
    }
    if cap == 0 || !prop1_condition(cap, n)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0u64, cap);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if prop1_margin_f64(mid, n) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut m = hi;
    while m < cap && !prop1_condition(m, n)? {
        m += 1;
    }
    while m > 1 && prop1_condition(m - 1, n)? {
        m -= 1;
    }
    Ok(Some(m))
}

pub fn prop1_threshold(n: u64) -> Result<Option<u64>> {
    prop1_threshold_with_cap(n, DEFAULT_THRESHOLD_CAP)
}

/// Certified truth value of `C(m + 2n, n) < (e (m/n + 2))^n`, decided as
/// `ln(C(m + 2n, n) n^n / (m + 2n)^n) < n`.
pub fn binomial_volume_bound_holds(m: u64, n: u64) -> Result<bool> {
    if m == 0 || n == 0 {
        return Err(Error::contract("binomial bound needs m, n >= 1"));
    }
    let binom = binomial(m + 2 * n, n);
    let num = binom * big(n).pow(n as u32);
    let den = big(m + 2 * n).pow(n as u32);
    decide_sign("the binomial volume bound", |prec| {
        Ok(Enclosure::exact(n, prec).sub(&ln_ratio(&num, &den, prec)?))
    })
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * big(n - i) / big(i + 1);
    }
    acc
}

/// `((2D + 1)^d - 1) / (d D^2)`: the size some norm class of the nonzero
/// points of `[-D, D]^d` must reach.
pub fn shell_pigeonhole_bound(d: u32, box_bound: u64) -> Result<BigRational> {
    if d == 0 || box_bound == 0 {
        return Err(Error::contract("pigeonhole bound needs d, D >= 1"));
    }
    let points: BigInt = Pow::pow(big(2 * box_bound + 1), d) - 1;
    Ok(BigRational::new(
        points,
        big(d as u64) * big(box_bound) * big(box_bound),
    ))
}

/// With `D = 2^d`: whether the pigeonhole bound exceeds
/// `4^((d^2 - d - log2 d)/2) = 2^(d^2 - d) / d`, i.e. whether
/// `(2D + 1)^d - 1 > 2^(d^2 + d)`.
pub fn pigeonhole_exceeds_power_bound(d: u32) -> bool {
    let lhs: BigInt = Pow::pow(big((1u64 << d.min(62)) * 2 + 1), d) - 1;
    lhs > BigInt::one() << (d * d + d)
}

/// The construction behind a lower bound: `L^d` basis vectors, `k (L - 2r)^d`
/// averaged vectors from a shell of radius `r` and `(k, p = 2)`, padded with
/// `n - L^d` further basis vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerWitness {
    pub d: u32,
    pub side: u64,
    pub r: i64,
    pub shell_size: u128,
    pub depth: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaBracket {
    pub n: u64,
    /// Size of a non-balancing family in `R^n`: `sigma(n) > lower_m`.
    pub lower_m: Option<u64>,
    pub lower_witness: Option<LowerWitness>,
    /// Certified counting threshold: `sigma(n) <= upper_m`.
    pub upper_m: Option<u64>,
    /// `lower_m / (n log2 n)`.
    pub lower_ratio: Option<f64>,
    /// `upper_m / (n log2 n)`.
    pub upper_ratio: Option<f64>,
}

/// Caches shell sizes per `(d, r)` across brackets.
#[derive(Default)]
pub struct BracketScanner {
    shells: HashMap<(u32, i64), u128>,
    cap: u64,
}

impl BracketScanner {
    pub fn new(cap: u64) -> Self {
        BracketScanner {
            shells: HashMap::new(),
            cap,
        }
    }

    fn shell_size(&mut self, d: u32, r: i64) -> Result<u128> {
        if let Some(&c) = self.shells.get(&(d, r)) {
            return Ok(c);
        }
        let c = geometry::shell_profile(d as usize, r, SHELL_ENUMERATION_BUDGET)?.count;
        self.shells.insert((d, r), c);
        Ok(c)
    }

    /// Best construction in `R^n`, zero-padded.
    pub fn lower(&mut self, n: u64) -> Result<(u64, Option<LowerWitness>)> {
        let mut best: (u128, Option<LowerWitness>) = (0, None);
        let mut d = 2u32;
        loop {
            let side = integer_root(n, d);
            if side < 3 {
                break;
            }
            for r in 1..=((side - 1) / 2) as i64 {
                let size = self.shell_size(d, r)?;
                let depth = (u128::BITS - 1 - size.leading_zeros()) / 2;
                let extra = depth as u128 * ((side - 2 * r as u64) as u128).pow(d);
                if extra > best.0 {
                    best = (
                        extra,
                        Some(LowerWitness {
                            d,
                            side,
                            r,
                            shell_size: size,
                            depth,
                        }),
                    );
                }
            }
            d += 1;
        }
        let total =
            u64::try_from(n as u128 + best.0).map_err(|_| Error::Overflow("lower bound"))?;
        Ok((total, best.1))
    }

    pub fn bracket(&mut self, n: u64) -> Result<SigmaBracket> {
        if n == 0 {
            return Err(Error::contract("sigma bracket needs n >= 1"));
        }
        let (lower_m, witness) = self.lower(n)?;
        let upper_m = prop1_threshold_with_cap(n, self.cap)?;
        let scale = n as f64 * (n as f64).log2();
        let ratio = |m: u64| (n > 1).then(|| m as f64 / scale);
        Ok(SigmaBracket {
            n,
            lower_m: Some(lower_m),
            lower_witness: witness,
            upper_m,
            lower_ratio: ratio(lower_m),
            upper_ratio: upper_m.and_then(ratio),
        })
    }
}

/// `floor(n^(1/d))`.
pub fn integer_root(n: u64, d: u32) -> u64 {
    let mut x = (n as f64).powf(1.0 / d as f64).round() as u64;
    while x > 0 && x.checked_pow(d).is_none_or(|v| v > n) {
        x -= 1;
    }
    while (x + 1).checked_pow(d).is_some_and(|v| v <= n) {
        x += 1;
    }
    x
}

pub fn sigma_bracket(n: u64) -> Result<SigmaBracket> {
    BracketScanner::new(DEFAULT_THRESHOLD_CAP).bracket(n)
}

pub fn sigma_brackets(ns: impl IntoIterator<Item = u64>, cap: u64) -> Result<Vec<SigmaBracket>> {
    let mut scanner = BracketScanner::new(cap);
    ns.into_iter().map(|n| scanner.bracket(n)).collect()
}

/// Aligned text rendering of bracket rows.
pub fn bracket_table(rows: &[SigmaBracket]) -> String {
    fn opt<T: ToString>(v: Option<T>) -> String {
        v.map_or_else(|| "-".to_string(), |x| x.to_string())
    }
    fn ratio(v: Option<f64>) -> String {
        v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
    }
    let header = [
        "n",
        "lower_m",
        "upper_m",
        "lower_ratio",
        "upper_ratio",
        "construction",
    ];
    let body: Vec<[String; 6]> = rows
        .iter()
        .map(|b| {
            [
                b.n.to_string(),
                opt(b.lower_m),
                opt(b.upper_m),
                ratio(b.lower_ratio),
                ratio(b.upper_ratio),
                b.lower_witness.map_or_else(
                    || "basis".to_string(),
                    |w| format!("d={} L={} r={} k={}", w.d, w.side, w.r, w.depth),
                ),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[&str]| {
        let mut parts = Vec::new();
        for (i, (c, w)) in cells.iter().zip(widths).enumerate() {
            if i + 1 == cells.len() {
                parts.push(c.to_string());
            } else {
                parts.push(format!("{c:>w$}"));
            }
        }
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut out, &header);
    for row in &body {
        line(
            &mut out,
            &row.iter().map(String::as_str).collect::<Vec<_>>(),
        );
    }
    out
}
