//! Exact vectors with base-`p` fractional components.
//!
//! Every component is stored as an integer numerator over the common
//! denominator `p^k`, so a norm comparison against 1 becomes an integer
//! comparison against `p^(2k)`. Nothing in here touches floating point except
//! the explicit `to_dense_f64` export.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::construction::ConstructionParams;
use crate::error::{Error, Result};

/// `base^exp` as an `i128`, or an overflow error.
pub fn checked_pow(base: u32, exp: u32) -> Result<i128> {
    (base as i128)
        .checked_pow(exp)
        .ok_or(Error::Overflow("power of the scale base"))
}

/// A sparse vector in `R^dim` whose entries are `numerator / base^exp`.
///
/// Entries are kept sorted by coordinate with zero numerators dropped, so two
/// vectors at the same scale are equal iff their entry lists are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawScaledVector")]
pub struct ScaledVector {
    dim: usize,
    base: u32,
    exp: u32,
    entries: Vec<(usize, i64)>,
}

#[derive(Deserialize)]
struct RawScaledVector {
    dim: usize,
    base: u32,
    exp: u32,
    entries: Vec<(usize, i64)>,
}

impl TryFrom<RawScaledVector> for ScaledVector {
    type Error = Error;

    fn try_from(raw: RawScaledVector) -> Result<Self> {
        ScaledVector::new(raw.dim, raw.base, raw.exp, raw.entries)
    }
}

impl ScaledVector {
    /// Builds a vector from `(coordinate, numerator)` pairs in any order.
    /// Zero numerators are dropped; repeated coordinates are rejected.
    pub fn new(dim: usize, base: u32, exp: u32, mut entries: Vec<(usize, i64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::contract("vector dimension must be positive"));
        }
        if base < 2 {
            return Err(Error::contract(format!(
                "scale base must be at least 2, got {base}"
            )));
        }
        entries.retain(|&(_, v)| v != 0);
        entries.sort_unstable_by_key(|&(i, _)| i);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::contract(format!(
                    "coordinate {} listed twice",
                    w[0].0
                )));
            }
        }
        if let Some(&(i, _)) = entries.last() {
            if i >= dim {
                return Err(Error::contract(format!(
                    "coordinate {i} out of range for dimension {dim}"
                )));
            }
        }
        Ok(ScaledVector {
            dim,
            base,
            exp,
            entries,
        })
    }

    pub fn zero(dim: usize, base: u32, exp: u32) -> Self {
        ScaledVector {
            dim,
            base,
            exp,
            entries: Vec::new(),
        }
    }

    /// The standard basis vector `e_index`, written at scale `base^exp`.
    pub fn basis(dim: usize, base: u32, exp: u32, index: usize) -> Result<Self> {
        let one = i64::try_from(checked_pow(base, exp)?)
            .map_err(|_| Error::Overflow("basis vector numerator"))?;
        ScaledVector::new(dim, base, exp, vec![(index, one)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    /// Nonzero `(coordinate, numerator)` pairs, sorted by coordinate.
    pub fn entries(&self) -> &[(usize, i64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Numerator of the component at `index` (zero when absent).
    pub fn get(&self, index: usize) -> i64 {
        match self.entries.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0,
        }
    }

    /// `base^(2 exp)`, the scaled squared norm of a unit vector.
    pub fn scale_sq(&self) -> Result<i128> {
        checked_pow(self.base, 2 * self.exp)
    }

    /// The same vector written over `base^exp` with a larger `exp`.
    pub fn rescaled(&self, exp: u32) -> Result<Self> {
        if exp < self.exp {
            return Err(Error::contract(format!(
                "cannot rescale from exponent {} down to {exp}",
                self.exp
            )));
        }
        let factor = i64::try_from(checked_pow(self.base, exp - self.exp)?)
            .map_err(|_| Error::Overflow("rescaling factor"))?;
        let entries = self
            .entries
            .iter()
            .map(|&(i, v)| {
                v.checked_mul(factor)
                    .map(|v| (i, v))
                    .ok_or(Error::Overflow("rescaled numerator"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScaledVector {
            dim: self.dim,
            base: self.base,
            exp,
            entries,
        })
    }

    /// `sum numerator^2`, i.e. `||v||^2 * base^(2 exp)`, exactly.
    pub fn norm_sq_scaled(&self) -> Result<i128> {
        self.entries.iter().try_fold(0i128, |acc, &(_, v)| {
            let sq = (v as i128)
                .checked_mul(v as i128)
                .ok_or(Error::Overflow("squared numerator"))?;
            acc.checked_add(sq).ok_or(Error::Overflow("squared norm"))
        })
    }

    /// Exact sum; the operands are brought to their common scale first.
    pub fn checked_add(&self, other: &ScaledVector) -> Result<ScaledVector> {
        if self.dim != other.dim || self.base != other.base {
            return Err(Error::contract(
                "adding vectors of different dimension or base",
            ));
        }
        let exp = self.exp.max(other.exp);
        let (a, b) = (self.rescaled(exp)?, other.rescaled(exp)?);
        let mut acc: BTreeMap<usize, i64> = a.entries.into_iter().collect();
        for (i, v) in b.entries {
            let slot = acc.entry(i).or_insert(0);
            *slot = slot.checked_add(v).ok_or(Error::Overflow("vector sum"))?;
        }
        ScaledVector::new(self.dim, self.base, exp, acc.into_iter().collect())
    }

    pub fn to_dense_f64(&self) -> Vec<f64> {
        let denom = (self.base as f64).powi(self.exp as i32);
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            out[i] = v as f64 / denom;
        }
        out
    }
}

/// An ordered family of exact unit vectors sharing one dimension and scale.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVectorFamily {
    dim: usize,
    base: u32,
    exp: u32,
    vectors: Vec<ScaledVector>,
    provenance: Option<ConstructionParams>,
}

impl UnitVectorFamily {
    /// Brings every vector to the largest exponent present and checks that
    /// each one has squared norm exactly `base^(2 exp)`.
    pub fn new(vectors: Vec<ScaledVector>) -> Result<Self> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::contract("a family needs at least one vector"))?;
        let (dim, base) = (first.dim, first.base);
        if let Some(bad) = vectors.iter().position(|v| v.dim != dim || v.base != base) {
            return Err(Error::contract(format!(
                "vector {bad} does not share dimension {dim} and base {base}"
            )));
        }
        let exp = vectors.iter().map(|v| v.exp).max().unwrap_or(0);
        let vectors = vectors
            .iter()
            .map(|v| v.rescaled(exp))
            .collect::<Result<Vec<_>>>()?;
        let unit = checked_pow(base, 2 * exp)?;
        for (i, v) in vectors.iter().enumerate() {
            let norm = v.norm_sq_scaled()?;
            if norm != unit {
                return Err(Error::contract(format!(
                    "vector {i} is not a unit vector: scaled squared norm {norm}, expected {unit}"
                )));
            }
        }
        Ok(UnitVectorFamily {
            dim,
            base,
            exp,
            vectors,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, params: ConstructionParams) -> Self {
        self.provenance = Some(params);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vectors, `m`.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    pub fn vectors(&self) -> &[ScaledVector] {
        &self.vectors
    }

    pub fn provenance(&self) -> Option<&ConstructionParams> {
        self.provenance.as_ref()
    }

    /// `base^(2 exp)`; validated to fit when the family was built.
    pub fn scale_sq(&self) -> i128 {
        (self.base as i128).pow(2 * self.exp)
    }

    /// The family with one more vector appended (provenance is dropped,
    /// since the result is no longer the constructed instance).
    pub fn pushed(&self, v: ScaledVector) -> Result<Self> {
        let mut vectors = self.vectors.clone();
        vectors.push(v);
        UnitVectorFamily::new(vectors)
    }
}

/// Coefficients in `{-1, 0, +1}` for a signed sub-sum of a family.
///
/// The derived ordering is lexicographic with `-1 < 0 < +1`, which is the
/// witness tie-break every engine uses.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SignVector(Vec<i8>);

impl TryFrom<Vec<i8>> for SignVector {
    type Error = Error;

    fn try_from(coeffs: Vec<i8>) -> Result<Self> {
        SignVector::new(coeffs)
    }
}

impl From<SignVector> for Vec<i8> {
    fn from(s: SignVector) -> Self {
        s.0
    }
}

impl SignVector {
    pub fn new(coeffs: Vec<i8>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|c| !(-1..=1).contains(*c)) {
            return Err(Error::contract(format!(
                "sign coefficient {bad} not in {{-1, 0, 1}}"
            )));
        }
        Ok(SignVector(coeffs))
    }

    pub fn zeros(m: usize) -> Self {
        SignVector(vec![0; m])
    }

    /// A single `sign` at position `i`.
    pub fn unit(m: usize, i: usize, sign: i8) -> Self {
        let mut c = vec![0; m];
        c[i] = sign.signum();
        SignVector(c)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coefficients(&self) -> &[i8] {
        &self.0
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn support_size(&self) -> usize {
        self.0.iter().filter(|&&c| c != 0).count()
    }

    pub fn negated(&self) -> Self {
        SignVector(self.0.iter().map(|&c| -c).collect())
    }

    /// True when the first nonzero coefficient is `+1` (or there is none).
    pub fn is_canonical(&self) -> bool {
        self.0.iter().find(|&&c| c != 0).is_none_or(|&c| c > 0)
    }

    /// The representative of `{eps, -eps}` whose first nonzero is `+1`.
    pub fn canonical(&self) -> Self {
        if self.is_canonical() {
            self.clone()
        } else {
            self.negated()
        }
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.0 {
            f.write_str(match c {
                -1 => "-",
                0 => "0",
                _ => "+",
            })?;
        }
        Ok(())
    }
}

/// `v = sum eps_i u_i`, exactly, at the family's scale.
pub fn combine(family: &UnitVectorFamily, eps: &SignVector) -> Result<ScaledVector> {
    if eps.len() != family.len() {
        return Err(Error::contract(format!(
            "sign vector has length {}, family has {} vectors",
            eps.len(),
            family.len()
        )));
    }
    let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
    for (u, &c) in family.vectors.iter().zip(eps.coefficients()) {
        if c == 0 {
            continue;
        }
        for &(i, v) in u.entries() {
            let slot = acc.entry(i).or_insert(0);
            *slot = slot
                .checked_add(c as i64 * v)
                .ok_or(Error::Overflow("signed combination"))?;
        }
    }
    ScaledVector::new(
        family.dim,
        family.base,
        family.exp,
        acc.into_iter().collect(),
    )
}

/// Whether `eps` is non-trivial and `||sum eps_i u_i|| < 1`, decided exactly.
pub fn is_balancing_witness(family: &UnitVectorFamily, eps: &SignVector) -> Result<bool> {
    let v = combine(family, eps)?;
    if eps.is_trivial() {
        return Ok(false);
    }
    Ok(v.norm_sq_scaled()? < family.scale_sq())
}

/// Little-endian mixed-radix index of a point of `[1, side]^d`:
/// `sum_j (x_j - 1) * side^j`.
pub fn coordinate_index(point: &[i64], side: u64) -> Result<usize> {
    let mut index: u128 = 0;
    let mut weight: u128 = 1;
    for (j, &x) in point.iter().enumerate() {
        if x < 1 || x as u64 > side {
            return Err(Error::contract(format!(
                "component {j} of {point:?} is outside [1, {side}]"
            )));
        }
        index = (x as u128 - 1)
            .checked_mul(weight)
            .and_then(|t| t.checked_add(index))
            .ok_or(Error::Overflow("coordinate index"))?;
        weight = weight.saturating_mul(side as u128);
    }
    usize::try_from(index).map_err(|_| Error::Overflow("coordinate index"))
}

/// Inverse of [`coordinate_index`].
pub fn coordinate_point(mut index: usize, side: u64, d: usize) -> Vec<i64> {
    let side = side as usize;
    (0..d)
        .map(|_| {
            let x = index % side;
            index /= side;
            x as i64 + 1
        })
        .collect()
}
