//! Versioned JSON instance files.
//!
//! Exact families use `selbal-instance-v1`:
//!
//! ```json
//! { "format": "selbal-instance-v1", "n": 16, "m": 8, "p": 2, "k": 1,
//!   "vectors": [[[coord, numerator], ...], ...],
//!   "provenance": { "d": 2, "p": 2, "k": 1, "L": 4,
//!                   "shell": { "Rsq": 1, "points": [[-1, 0], ...], "r": 1, "D": 1 },
//!                   "chain_sizes": [1, 4], "level0": "translates" } }
//! ```
//!
//! Floating-point families use `selbal-real-v1` with dense `vectors`.
//! Parse errors name the offending field, e.g. `vectors[3][0][1]`.

use serde_json::{json, Map, Value};

use crate::construction::{ConstructionParams, LevelZero};
use crate::error::{Error, Result};
use crate::geometry::{LatticeShell, Point};
use crate::vectorspace::{ScaledVector, UnitVectorFamily};

pub const EXACT_FORMAT: &str = "selbal-instance-v1";
pub const REAL_FORMAT: &str = "selbal-real-v1";

/// A parsed instance file.
#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Exact(UnitVectorFamily),
    /// Dense vectors as written; normalization needs a tolerance, which is
    /// the caller's choice.
    Real(Vec<Vec<f64>>),
}

fn params_json(p: &ConstructionParams) -> Value {
    let shell = p.shell();
    json!({
        "d": p.dim(),
        "p": p.base(),
        "k": p.depth(),
        "L": p.side(),
        "shell": {
            "Rsq": shell.radius_sq(),
            "points": shell.points(),
            "r": shell.r(),
            "D": shell.box_bound(),
        },
        "chain_sizes": p.chain_sizes(),
        "level0": p.level_zero().as_str(),
    })
}

pub fn family_to_value(family: &UnitVectorFamily) -> Value {
    let vectors: Vec<Value> = family
        .vectors()
        .iter()
        .map(|v| Value::Array(v.entries().iter().map(|&(i, x)| json!([i, x])).collect()))
        .collect();
    let mut obj = Map::new();
    obj.insert("format".into(), json!(EXACT_FORMAT));
    obj.insert("n".into(), json!(family.dim()));
    obj.insert("m".into(), json!(family.len()));
    obj.insert("p".into(), json!(family.base()));
    obj.insert("k".into(), json!(family.exp()));
    obj.insert("vectors".into(), Value::Array(vectors));
    if let Some(p) = family.provenance() {
        obj.insert("provenance".into(), params_json(p));
    }
    Value::Object(obj)
}

/// Compact single-line JSON followed by a newline; byte-identical for
/// identical families.
pub fn write_family(family: &UnitVectorFamily) -> String {
    let mut s = family_to_value(family).to_string();
    s.push('\n');
    s
}

pub fn write_real(vectors: &[Vec<f64>]) -> String {
    let n = vectors.first().map_or(0, Vec::len);
    let mut s = json!({
        "format": REAL_FORMAT,
        "n": n,
        "m": vectors.len(),
        "vectors": vectors,
    })
    .to_string();
    s.push('\n');
    s
}

fn field<'a>(obj: &'a Map<String, Value>, prefix: &str, name: &str) -> Result<&'a Value> {
    obj.get(name)
        .ok_or_else(|| Error::format(join(prefix, name), "missing"))
}

fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

fn as_u64(v: &Value, path: &str) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| Error::format(path, format!("expected a non-negative integer, got {v}")))
}

fn as_i64(v: &Value, path: &str) -> Result<i64> {
    v.as_i64()
        .ok_or_else(|| Error::format(path, format!("expected an integer, got {v}")))
}

fn as_u32(v: &Value, path: &str) -> Result<u32> {
    u32::try_from(as_u64(v, path)?).map_err(|_| Error::format(path, "out of range"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    usize::try_from(as_u64(v, path)?).map_err(|_| Error::format(path, "out of range"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::format(path, "expected an array"))
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::format(path, "expected an object"))
}

fn parse_point(v: &Value, path: &str, d: usize) -> Result<Point> {
    let arr = as_array(v, path)?;
    if arr.len() != d {
        return Err(Error::format(
            path,
            format!("expected {d} coordinates, got {}", arr.len()),
        ));
    }
    arr.iter()
        .enumerate()
        .map(|(i, c)| as_i64(c, &format!("{path}[{i}]")))
        .collect()
}

fn parse_provenance(v: &Value) -> Result<ConstructionParams> {
    let obj = as_object(v, "provenance")?;
    let get = |name: &str| field(obj, "provenance", name);
    let d = as_usize(get("d")?, "provenance.d")?;
    if d == 0 {
        return Err(Error::format("provenance.d", "must be positive"));
    }
    let p = as_u32(get("p")?, "provenance.p")?;
    if p < 2 {
        return Err(Error::format("provenance.p", "must be at least 2"));
    }
    let k = as_u32(get("k")?, "provenance.k")?;
    let side = as_u64(get("L")?, "provenance.L")?;
    if side == 0 || side > i64::MAX as u64 {
        return Err(Error::format("provenance.L", "out of range"));
    }

    let shell_obj = as_object(get("shell")?, "provenance.shell")?;
    let sget = |name: &str| field(shell_obj, "provenance.shell", name);
    let rsq = as_i64(sget("Rsq")?, "provenance.shell.Rsq")?;
    let points: Vec<Point> = as_array(sget("points")?, "provenance.shell.points")?
        .iter()
        .enumerate()
        .map(|(i, pt)| parse_point(pt, &format!("provenance.shell.points[{i}]"), d))
        .collect::<Result<_>>()?;
    if points.is_empty() {
        return Err(Error::format("provenance.shell.points", "must be nonempty"));
    }
    let r = as_i64(sget("r")?, "provenance.shell.r")?;
    let box_bound = match shell_obj.get("D") {
        Some(v) => as_i64(v, "provenance.shell.D")?,
        None => r,
    };
    if r < 0 || box_bound < 0 {
        return Err(Error::format("provenance.shell.r", "must be non-negative"));
    }

    let sizes: Vec<usize> = as_array(get("chain_sizes")?, "provenance.chain_sizes")?
        .iter()
        .enumerate()
        .map(|(i, s)| as_usize(s, &format!("provenance.chain_sizes[{i}]")))
        .collect::<Result<_>>()?;
    let level_zero = match obj.get("level0") {
        None => LevelZero::Translates,
        Some(v) => v.as_str().and_then(LevelZero::parse).ok_or_else(|| {
            Error::format(
                "provenance.level0",
                format!("expected \"translates\" or \"all-basis\", got {v}"),
            )
        })?,
    };

    let mut sorted = points.clone();
    sorted.sort();
    let chain = sizes
        .iter()
        .map(|&s| sorted[..s.min(sorted.len())].to_vec())
        .collect();
    let shell = LatticeShell::from_parts_unchecked(d, points, rsq, r, box_bound);
    Ok(ConstructionParams::from_parts_unchecked(
        p, k, side, shell, chain, level_zero,
    ))
}

fn parse_exact(obj: &Map<String, Value>) -> Result<UnitVectorFamily> {
    let n = as_usize(field(obj, "", "n")?, "n")?;
    let m = as_usize(field(obj, "", "m")?, "m")?;
    let p = as_u32(field(obj, "", "p")?, "p")?;
    let k = as_u32(field(obj, "", "k")?, "k")?;
    if n == 0 {
        return Err(Error::format("n", "must be positive"));
    }
    if p < 2 {
        return Err(Error::format("p", "must be at least 2"));
    }
    let raw = as_array(field(obj, "", "vectors")?, "vectors")?;
    if raw.len() != m {
        return Err(Error::format(
            "m",
            format!("says {m} but {} vectors are listed", raw.len()),
        ));
    }
    if m == 0 {
        return Err(Error::format("vectors", "must be nonempty"));
    }
    let vectors = raw
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let path = format!("vectors[{i}]");
            let entries = as_array(v, &path)?
                .iter()
                .enumerate()
                .map(|(j, e)| {
                    let epath = format!("{path}[{j}]");
                    let pair = as_array(e, &epath)?;
                    if pair.len() != 2 {
                        return Err(Error::format(&epath, "expected [coordinate, numerator]"));
                    }
                    let idx = as_usize(&pair[0], &format!("{epath}[0]"))?;
                    if idx >= n {
                        return Err(Error::format(
                            format!("{epath}[0]"),
                            format!("coordinate {idx} outside [0, {n})"),
                        ));
                    }
                    Ok((idx, as_i64(&pair[1], &format!("{epath}[1]"))?))
                })
                .collect::<Result<Vec<_>>>()?;
            ScaledVector::new(n, p, k, entries).map_err(|e| Error::format(&path, e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut family =
        UnitVectorFamily::new(vectors).map_err(|e| Error::format("vectors", e.to_string()))?;
    if let Some(v) = obj.get("provenance").filter(|v| !v.is_null()) {
        family = family.with_provenance(parse_provenance(v)?);
    }
    Ok(family)
}

fn parse_real(obj: &Map<String, Value>) -> Result<Vec<Vec<f64>>> {
    let n = as_usize(field(obj, "", "n")?, "n")?;
    let m = as_usize(field(obj, "", "m")?, "m")?;
    let raw = as_array(field(obj, "", "vectors")?, "vectors")?;
    if raw.len() != m || m == 0 {
        return Err(Error::format(
            "m",
            format!("says {m} but {} vectors are listed", raw.len()),
        ));
    }
    raw.iter()
        .enumerate()
        .map(|(i, v)| {
            let path = format!("vectors[{i}]");
            let arr = as_array(v, &path)?;
            if arr.len() != n {
                return Err(Error::format(
                    &path,
                    format!("expected {n} components, got {}", arr.len()),
                ));
            }
            arr.iter()
                .enumerate()
                .map(|(j, x)| {
                    x.as_f64()
                        .ok_or_else(|| Error::format(format!("{path}[{j}]"), "expected a number"))
                })
                .collect()
        })
        .collect()
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let value: Value = serde_json::from_str(text)?;
    let obj = as_object(&value, "<root>")?;
    let format = field(obj, "", "format")?;
    match format.as_str() {
        Some(EXACT_FORMAT) => parse_exact(obj).map(Instance::Exact),
        Some(REAL_FORMAT) => parse_real(obj).map(Instance::Real),
        _ => Err(Error::format(
            "format",
            format!("expected \"{EXACT_FORMAT}\" or \"{REAL_FORMAT}\", got {format}"),
        )),
    }
}

/// Parses an exact instance; a floating-point file is an error.
pub fn parse_family(text: &str) -> Result<UnitVectorFamily> {
    match parse_instance(text)? {
        Instance::Exact(f) => Ok(f),
        Instance::Real(_) => Err(Error::format(
            "format",
            format!("expected \"{EXACT_FORMAT}\""),
        )),
    }
}
