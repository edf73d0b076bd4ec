//! Guaranteed enclosures of real numbers in binary fixed point.
//!
//! An [`Enclosure`] is a pair of big integers `lo <= hi` at scale `2^prec`;
//! the true value lies in `[lo, hi] / 2^prec`. Every operation rounds `lo`
//! down and `hi` up, so enclosures stay valid through any chain of them.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    lo: BigInt,
    hi: BigInt,
    prec: u32,
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_ceil(b)
}

impl Enclosure {
    pub fn exact(value: impl Into<BigInt>, prec: u32) -> Self {
        let v = value.into() << prec;
        Enclosure {
            lo: v.clone(),
            hi: v,
            prec,
        }
    }

    /// Encloses `num / den`.
    pub fn ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        assert!(den.is_positive(), "denominator must be positive");
        let scaled = num << prec;
        Enclosure {
            lo: scaled.div_floor(den),
            hi: ceil_div(&scaled, den),
            prec,
        }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn lower(&self) -> (&BigInt, u32) {
        (&self.lo, self.prec)
    }

    pub fn upper(&self) -> (&BigInt, u32) {
        (&self.hi, self.prec)
    }

    pub fn width(&self) -> BigInt {
        &self.hi - &self.lo
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        debug_assert_eq!(self.prec, other.prec);
        Enclosure {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &Enclosure) -> Enclosure {
        debug_assert_eq!(self.prec, other.prec);
        Enclosure {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
            prec: self.prec,
        }
    }

    pub fn scale(&self, k: &BigInt) -> Enclosure {
        let (a, b) = (&self.lo * k, &self.hi * k);
        let (lo, hi) = if k.is_negative() { (b, a) } else { (a, b) };
        Enclosure {
            lo,
            hi,
            prec: self.prec,
        }
    }

    /// Divides by a positive integer.
    pub fn div_int(&self, k: &BigInt) -> Enclosure {
        assert!(k.is_positive(), "divisor must be positive");
        Enclosure {
            lo: self.lo.div_floor(k),
            hi: ceil_div(&self.hi, k),
            prec: self.prec,
        }
    }

    /// True when the whole enclosure is `> 0`.
    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    /// True when the whole enclosure is `< 0`.
    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    /// `Some(sign)` when the enclosure excludes zero.
    pub fn sign(&self) -> Option<bool> {
        if self.is_positive() {
            Some(true)
        } else if self.is_negative() {
            Some(false)
        } else {
            None
        }
    }

    pub fn midpoint_f64(&self) -> f64 {
        let mid: BigInt = (&self.lo + &self.hi) >> 1u32;
        big_to_f64(&mid) / (self.prec as f64).exp2()
    }
}

fn big_to_f64(v: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap_or(if v.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

/// `atanh(num/den)` for `0 <= num/den <= 1/3`.
fn atanh_small(num: &BigInt, den: &BigInt, prec: u32) -> Enclosure {
    debug_assert!(!num.is_negative() && BigInt::from(3) * num <= *den);
    let unit = BigInt::one() << prec;
    let z = Enclosure::ratio(num, den, prec);
    let z2_lo = (&z.lo * &z.lo) >> prec;
    let z2_hi = ceil_div(&(&z.hi * &z.hi), &unit);
    let mut pow_lo = z.lo.clone();
    let mut pow_hi = z.hi.clone();
    let mut sum_lo = BigInt::zero();
    let mut sum_hi = BigInt::zero();
    let mut j = 1u64;
    while pow_hi > BigInt::one() {
        let jj = BigInt::from(j);
        sum_lo += pow_lo.div_floor(&jj);
        sum_hi += ceil_div(&pow_hi, &jj);
        pow_lo = (&pow_lo * &z2_lo) >> prec;
        pow_hi = ceil_div(&(&pow_hi * &z2_hi), &unit);
        j += 2;
    }
    // Tail: sum_{i >= 0} z^(j + 2i) / (j + 2i) <= z^j / (j (1 - z^2)) <= 9 z^j / (8 j).
    sum_hi += ceil_div(&(pow_hi * 9u32), &BigInt::from(8 * j));
    Enclosure {
        lo: sum_lo,
        hi: sum_hi,
        prec,
    }
}

/// `ln 2 = 2 atanh(1/3)`.
pub fn ln2(prec: u32) -> Enclosure {
    atanh_small(&BigInt::one(), &BigInt::from(3), prec).scale(&BigInt::from(2))
}

/// `ln(num / den)` for a positive rational.
pub fn ln_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Result<Enclosure> {
    if !num.is_positive() || !den.is_positive() {
        return Err(Error::contract("logarithm of a non-positive number"));
    }
    // Find e with 2^e <= num/den < 2^(e+1).
    let mut e = num.bits() as i64 - den.bits() as i64;
    let (mut a, mut b) = shifted(num, den, e);
    if a < b {
        e -= 1;
        (a, b) = shifted(num, den, e);
    }
    debug_assert!(a >= b && a < &b * 2u32);
    // num/den = 2^e * a/b with a/b in [1, 2); ln(a/b) = 2 atanh((a-b)/(a+b)).
    let tail = atanh_small(&(&a - &b), &(&a + &b), prec).scale(&BigInt::from(2));
    Ok(ln2(prec).scale(&BigInt::from(e)).add(&tail))
}

fn shifted(num: &BigInt, den: &BigInt, e: i64) -> (BigInt, BigInt) {
    if e >= 0 {
        (num.clone(), den << e as u64)
    } else {
        (num << (-e) as u64, den.clone())
    }
}

pub fn ln_int(v: &BigInt, prec: u32) -> Result<Enclosure> {
    ln_ratio(v, &BigInt::one(), prec)
}

/// Starting precision and ceiling for [`decide_sign`].
pub const MIN_PRECISION: u32 = 64;
pub const MAX_PRECISION: u32 = 1 << 14;

/// Evaluates `f` at doubling precision until its enclosure excludes zero.
/// Returns whether the value is positive.
pub fn decide_sign(what: &str, f: impl Fn(u32) -> Result<Enclosure>) -> Result<bool> {
    let mut prec = MIN_PRECISION;
    loop {
        let e = f(prec)?;
        if let Some(s) = e.sign() {
            return Ok(s);
        }
        if prec >= MAX_PRECISION {
            return Err(Error::Certification(format!(
                "could not separate {what} from zero at {prec} bits"
            )));
        }
        prec *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contains(e: &Enclosure, x: f64) -> bool {
        let s = (e.prec as f64).exp2();
        let slack = 1e-14 * x.abs().max(1.0);
        big_to_f64(&e.lo) / s <= x + slack && x - slack <= big_to_f64(&e.hi) / s
    }

    #[test]
    fn ln2_is_tight() {
        let e = ln2(200);
        assert!(contains(&e, std::f64::consts::LN_2));
        assert!(e.width() < BigInt::from(1024));
    }

    #[test]
    fn logarithms_of_rationals() {
        for (a, b) in [
            (1u64, 1u64),
            (3, 1),
            (1, 7),
            (1000, 3),
            (12345678901, 17),
            (5, 4),
        ] {
            let e = ln_ratio(&BigInt::from(a), &BigInt::from(b), 96).unwrap();
            let x = (a as f64 / b as f64).ln();
            assert!(contains(&e, x), "ln({a}/{b})");
            assert!(e.width() < BigInt::from(1u64 << 20));
        }
        let zero = ln_ratio(&BigInt::from(9), &BigInt::from(9), 64).unwrap();
        assert!(!zero.is_positive() && !zero.is_negative());
    }

    #[test]
    fn huge_arguments() {
        let v = BigInt::from(10).pow(300);
        let e = ln_int(&v, 128).unwrap();
        assert!(contains(&e, 300.0 * std::f64::consts::LN_10));
    }

    #[test]
    fn sign_decisions() {
        // ln 3 - 1 > 0, ln 2 - 0.7 < 0.
        let pos = decide_sign("ln 3 - 1", |p| {
            Ok(ln_int(&BigInt::from(3), p)?.sub(&Enclosure::exact(1, p)))
        })
        .unwrap();
        assert!(pos);
        let neg = decide_sign("ln 2 - 7/10", |p| {
            Ok(ln2(p).sub(&Enclosure::ratio(&BigInt::from(7), &BigInt::from(10), p)))
        })
        .unwrap();
        assert!(!neg);
        assert!(decide_sign("zero", |p| Ok(Enclosure::exact(0, p))).is_err());
    }
}
