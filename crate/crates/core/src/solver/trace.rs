use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{lonely_witness_for, Point, PointSet};
use crate::vectorspace::{checked_pow, combine, coordinate_index, SignVector, UnitVectorFamily};

/// A coordinate `x = y + t` where the top level leaves `±p^(-j)` untouched.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertifiedCoordinate {
    pub point: Point,
    pub index: usize,
    /// `y` in `S_j`.
    pub offset: Point,
    /// The unique translate `t` in `supp_j` with `x = y + t`.
    pub translate: Point,
    /// Numerator of `v_x` at scale `p^k`.
    pub numerator: i64,
}

/// The lower-bound argument replayed for one sign vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProofTrace {
    /// Highest level with a nonzero coefficient.
    pub top_level: u32,
    /// `supp_i`: translates with a nonzero coefficient, per level.
    pub supports: Vec<Vec<Point>>,
    pub certified: Vec<CertifiedCoordinate>,
    /// `p^(2j)`.
    pub required: u64,
    /// Sum of `numerator^2` over the certified coordinates.
    pub lower_bound_scaled: i128,
    /// Exact scaled squared norm of the combination.
    pub norm_sq_scaled: i128,
    pub scale_sq: i128,
}

/// Replays the construction argument for `eps`: for each `y` in `S_j` a lonely
/// point of `S_j + supp_j` is located and the combination's component there is
/// re-evaluated exactly and checked to be at least `p^(-j)` in magnitude.
pub fn explain_lower_bound(family: &UnitVectorFamily, eps: &SignVector) -> Result<ProofTrace> {
    let params = family
        .provenance()
        .ok_or_else(|| Error::contract("proof traces need construction provenance"))?;
    if eps.len() != family.len() {
        return Err(Error::contract(
            "sign vector length does not match the family",
        ));
    }
    if eps.is_trivial() {
        return Err(Error::contract(
            "the trivial combination has no lower bound to explain",
        ));
    }
    let labels = params.labels();
    if labels.len() != family.len() {
        return Err(Error::contract("family size does not match its provenance"));
    }
    let depth = params.depth();
    let mut supports: Vec<Vec<Point>> = vec![Vec::new(); depth as usize + 1];
    for ((level, t), &c) in labels.into_iter().zip(eps.coefficients()) {
        if c != 0 {
            supports[level as usize].push(t);
        }
    }
    let top = supports
        .iter()
        .rposition(|s| !s.is_empty())
        .expect("non-trivial") as u32;
    let d = params.dim();
    let offsets = PointSet::new(d, params.level_offsets(top))?;
    let translates = PointSet::new(d, supports[top as usize].clone())?;

    let v = combine(family, eps)?;
    let floor = i64::try_from(checked_pow(params.base(), depth - top)?)
        .map_err(|_| Error::Overflow("certificate threshold"))?;
    let mut certified = Vec::with_capacity(offsets.len());
    for y in offsets.points() {
        let (x, t) = lonely_witness_for(y, &offsets, &translates)?;
        let index = coordinate_index(&x, params.side())?;
        let numerator = v.get(index);
        if numerator.abs() < floor {
            return Err(Error::Certification(format!(
                "|v_x| at x = {x:?} is {numerator}/p^k, below p^(-{top})"
            )));
        }
        certified.push(CertifiedCoordinate {
            point: x,
            index,
            offset: y.clone(),
            translate: t,
            numerator,
        });
    }
    let required = checked_pow(params.base(), 2 * top)? as u64;
    if (certified.len() as u64) < required {
        return Err(Error::Certification(format!(
            "only {} coordinates certified, {required} required",
            certified.len()
        )));
    }
    Ok(ProofTrace {
        top_level: top,
        supports,
        lower_bound_scaled: certified
            .iter()
            .map(|c| c.numerator as i128 * c.numerator as i128)
            .sum(),
        certified,
        required,
        norm_sq_scaled: v.norm_sq_scaled()?,
        scale_sq: family.scale_sq(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{build_instance, figure_example, ConstructionParams, LevelZero};
    use crate::geometry::LatticeShell;

    fn cross() -> LatticeShell {
        LatticeShell::new(2, vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]], 1).unwrap()
    }

    #[test]
    fn single_top_level_vector() {
        let fam = build_instance(
            &ConstructionParams::new(2, 1, 5, cross(), LevelZero::Translates).unwrap(),
        )
        .unwrap();
        let eps = SignVector::unit(fam.len(), fam.len() - 1, 1);
        let trace = explain_lower_bound(&fam, &eps).unwrap();
        assert_eq!(trace.top_level, 1);
        assert_eq!(trace.certified.len(), 4);
        assert!(trace.certified.iter().all(|c| c.numerator == 1));
        assert_eq!(trace.lower_bound_scaled, 4);
        assert_eq!(trace.norm_sq_scaled, 4);
    }

    #[test]
    fn figure_mixed_combination() {
        let fam = figure_example();
        // First interior half-vector (t = (2,2)) minus the basis vectors at its
        // four neighbours (2,1), (1,2), (3,2), (2,3).
        let mut c = vec![0i8; 34];
        c[25] = 1;
        for p in [[2, 1], [1, 2], [3, 2], [2, 3]] {
            let lex = ((p[0] - 1) * 5 + (p[1] - 1)) as usize;
            c[lex] = -1;
        }
        let eps = SignVector::new(c).unwrap();
        let v = combine(&fam, &eps).unwrap();
        assert_eq!(v.nnz(), 4);
        assert!(v.entries().iter().all(|&(_, x)| x == -1));
        let trace = explain_lower_bound(&fam, &eps).unwrap();
        assert!(trace.certified.len() >= 4);
        assert!(trace.certified.iter().all(|c| c.numerator.abs() >= 1));
        assert!(trace.lower_bound_scaled <= trace.norm_sq_scaled);
    }

    #[test]
    fn trivial_eps_is_rejected() {
        let fam = figure_example();
        assert!(explain_lower_bound(&fam, &SignVector::zeros(34)).is_err());
    }
}
