use std::collections::HashSet;

use super::{Method, Verdict};
use crate::construction::{build_instance, ConstructionParams};
use crate::error::{Check, Error, Result};
use crate::geometry::{self, add_points, norm_sq};
use crate::vectorspace::{checked_pow, UnitVectorFamily};

/// Concludes non-balancing by checking every precondition of the
/// construction argument against the family's provenance, including a
/// bit-exact regeneration of each vector. A failed check is an error naming
/// the check; it is never reported as a balancing verdict.
pub fn structural_verify(family: &UnitVectorFamily) -> Result<Verdict> {
    let params = family
        .provenance()
        .ok_or_else(|| Error::contract("structural verification needs construction provenance"))?;
    check_params(params)?;
    check_family(family, params)?;
    Ok(Verdict::NotBalancing {
        min_norm_sq_scaled: None,
        minimizer: None,
        method: Method::Structural,
        explored: family.len() as u64,
    })
}

fn fail(check: Check, detail: impl Into<String>) -> Error {
    Error::precondition(check, detail)
}

fn check_params(params: &ConstructionParams) -> Result<()> {
    let shell = params.shell();
    let rsq = shell.radius_sq() as i128;
    if let Some(p) = shell.points().iter().find(|p| norm_sq(p) != rsq) {
        return Err(fail(
            Check::ShellEqualNorm,
            format!("{p:?} has squared norm {}, not {rsq}", norm_sq(p)),
        ));
    }
    if !geometry::is_strictly_convex(&shell.point_set()) {
        return Err(fail(
            Check::StrictConvexity,
            "shell is not in strictly convex position",
        ));
    }
    let r = shell
        .points()
        .iter()
        .flatten()
        .map(|x| x.abs())
        .max()
        .unwrap_or(0);
    if r != shell.r() || r > shell.box_bound() {
        return Err(fail(
            Check::ShellRadius,
            format!(
                "recorded r = {}, actual {r}, box bound {}",
                shell.r(),
                shell.box_bound()
            ),
        ));
    }

    let chain = params.chain();
    if chain.len() != params.depth() as usize + 1 {
        return Err(fail(
            Check::ChainSizes,
            format!("{} levels for depth {}", chain.len(), params.depth()),
        ));
    }
    for (i, level) in chain.iter().enumerate() {
        let want = checked_pow(params.base(), 2 * i as u32)?;
        if level.len() as i128 != want {
            return Err(fail(
                Check::ChainSizes,
                format!("|S_{i}| = {}, expected {want}", level.len()),
            ));
        }
    }
    let shell_points: HashSet<&Vec<i64>> = shell.points().iter().collect();
    for (i, pair) in chain.windows(2).enumerate() {
        let upper: HashSet<&Vec<i64>> = pair[1].iter().collect();
        if let Some(p) = pair[0].iter().find(|p| !upper.contains(p)) {
            return Err(fail(
                Check::ChainNesting,
                format!("{p:?} in S_{i} but not in S_{}", i + 1),
            ));
        }
    }
    if let Some(p) = chain
        .last()
        .into_iter()
        .flatten()
        .find(|p| !shell_points.contains(p))
    {
        return Err(fail(
            Check::ChainNesting,
            format!("{p:?} in S_k but not in the shell"),
        ));
    }
    if params.side() as i128 <= 2 * shell.r() as i128 {
        return Err(fail(
            Check::SideLength,
            format!("L = {} <= 2r = {}", params.side(), 2 * shell.r()),
        ));
    }
    Ok(())
}

fn check_family(family: &UnitVectorFamily, params: &ConstructionParams) -> Result<()> {
    let n = params.ambient_dim()?;
    if family.dim() != n || family.base() != params.base() || family.exp() != params.depth() {
        return Err(fail(
            Check::VectorCount,
            format!(
                "family lives in R^{} at scale {}^{}, parameters say R^{n} at {}^{}",
                family.dim(),
                family.base(),
                family.exp(),
                params.base(),
                params.depth()
            ),
        ));
    }
    if family.len() as u128 != params.vector_count() {
        return Err(fail(
            Check::VectorCount,
            format!(
                "{} vectors, parameters give {}",
                family.len(),
                params.vector_count()
            ),
        ));
    }
    let side = params.side() as i64;
    for (level, t) in params.labels() {
        for y in params.level_offsets(level) {
            let x = add_points(&t, &y);
            if x.iter().any(|&c| c < 1 || c > side) {
                return Err(fail(
                    Check::SupportContainment,
                    format!("t + y = {x:?} leaves [1, {side}]^d"),
                ));
            }
        }
    }
    let expected = build_instance(params)?;
    for (i, (got, want)) in family.vectors().iter().zip(expected.vectors()).enumerate() {
        if got != want {
            return Err(fail(
                Check::VectorFormula,
                format!("vector {i} differs from its recomputation"),
            ));
        }
    }
    Ok(())
}
