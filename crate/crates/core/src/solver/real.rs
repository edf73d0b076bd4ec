use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vectorspace::{SignVector, UnitVectorFamily};

/// Unit vectors with floating-point components. Inputs within the tolerance
/// of unit norm are renormalized, so each single vector has norm 1 by fiat.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealFamily {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl RealFamily {
    pub fn new(vectors: Vec<Vec<f64>>, tolerance: f64) -> Result<Self> {
        let dim = vectors
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::contract("empty family"))?;
        if dim == 0 {
            return Err(Error::contract("dimension must be positive"));
        }
        check_tolerance(tolerance)?;
        let vectors = vectors
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                if v.len() != dim {
                    return Err(Error::contract(format!(
                        "vector {i} has dimension {}, expected {dim}",
                        v.len()
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::contract(format!(
                        "vector {i} has a non-finite entry"
                    )));
                }
                let nsq: f64 = v.iter().map(|x| x * x).sum();
                if (nsq - 1.0).abs() > tolerance {
                    return Err(Error::contract(format!(
                        "vector {i} has squared norm {nsq}, not 1 within {tolerance}"
                    )));
                }
                let norm = nsq.sqrt();
                Ok(v.into_iter().map(|x| x / norm).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(RealFamily { dim, vectors })
    }

    pub fn from_exact(family: &UnitVectorFamily) -> Self {
        RealFamily {
            dim: family.dim(),
            vectors: family.vectors().iter().map(|v| v.to_dense_f64()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if tolerance.is_finite() && (0.0..1.0).contains(&tolerance) {
        Ok(())
    } else {
        Err(Error::parameter(format!(
            "tolerance must lie in [0, 1), got {tolerance}"
        )))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RealVerdict {
    /// `||v||^2 < 1 - tolerance`.
    Balancing {
        witness: SignVector,
        norm_sq: f64,
        explored: u64,
    },
    /// Every combination with two or more nonzero coefficients has
    /// `||v||^2 > 1 + tolerance`.
    NotBalancing {
        min_norm_sq: f64,
        minimizer: SignVector,
        explored: u64,
    },
    /// No clear witness, but some combination lands within the tolerance band
    /// around 1, where floating point cannot decide the strict inequality.
    Boundary {
        candidate: SignVector,
        norm_sq: f64,
        count: u64,
        explored: u64,
    },
    Inconclusive {
        explored: u64,
        budget: u64,
    },
}

impl RealVerdict {
    pub fn is_definitive(&self) -> bool {
        matches!(
            self,
            RealVerdict::Balancing { .. } | RealVerdict::NotBalancing { .. }
        )
    }

    pub fn label(&self) -> &'static str {
        match self {
            RealVerdict::Balancing { .. } => "balancing",
            RealVerdict::NotBalancing { .. } => "not_balancing",
            RealVerdict::Boundary { .. } => "boundary_inconclusive",
            RealVerdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Exhaustive search over canonical sign vectors in floating point. Single
/// vectors are unit by construction and never count as boundary cases.
pub fn solve_exhaustive_real(
    family: &RealFamily,
    tolerance: f64,
    budget: u64,
) -> Result<RealVerdict> {
    check_tolerance(tolerance)?;
    let m = family.len();
    if m == 0 {
        return Err(Error::contract("exhaustive search needs m >= 1"));
    }
    let n = family.dim();
    let mut digits = vec![0i8; m];
    let mut sum = vec![0f64; n];
    let mut explored = 0u64;
    let mut boundary: Option<(Vec<i8>, f64)> = None;
    let mut boundary_count = 0u64;

    let add = |sum: &mut [f64], row: usize, c: f64| {
        for (s, x) in sum.iter_mut().zip(&family.vectors[row]) {
            *s += c * x;
        }
    };
    // Canonical order: lead position from the right, then the tail digits.
    for lead in (0..m).rev() {
        digits.iter_mut().for_each(|d| *d = 0);
        sum.iter_mut().for_each(|s| *s = 0.0);
        digits[lead] = 1;
        add(&mut sum, lead, 1.0);
        for d in &mut digits[lead + 1..] {
            *d = -1;
        }
        for j in lead + 1..m {
            add(&mut sum, j, -1.0);
        }
        loop {
            if explored >= budget {
                return Ok(RealVerdict::Inconclusive { explored, budget });
            }
            explored += 1;
            let norm_sq: f64 = sum.iter().map(|x| x * x).sum();
            let support = digits.iter().filter(|&&c| c != 0).count();
            if norm_sq < 1.0 - tolerance {
                return Ok(RealVerdict::Balancing {
                    witness: SignVector::new(digits).expect("signs"),
                    norm_sq,
                    explored,
                });
            }
            if support > 1 && norm_sq <= 1.0 + tolerance {
                boundary_count += 1;
                boundary.get_or_insert_with(|| (digits.clone(), norm_sq));
            }
            let mut j = m;
            let advanced = loop {
                if j == lead + 1 {
                    break false;
                }
                j -= 1;
                if digits[j] < 1 {
                    digits[j] += 1;
                    add(&mut sum, j, 1.0);
                    break true;
                }
                digits[j] = -1;
                add(&mut sum, j, -2.0);
            };
            if !advanced {
                break;
            }
        }
    }
    if let Some((digits, norm_sq)) = boundary {
        return Ok(RealVerdict::Boundary {
            candidate: SignVector::new(digits).expect("signs"),
            norm_sq,
            count: boundary_count,
            explored,
        });
    }
    Ok(RealVerdict::NotBalancing {
        min_norm_sq: 1.0,
        minimizer: SignVector::unit(m, m - 1, 1),
        explored,
    })
}
