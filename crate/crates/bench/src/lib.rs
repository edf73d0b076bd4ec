//! Families shared by the engine benchmarks.

use selbal::construction::{build_instance, ConstructionParams, LevelZero};
use selbal::{figure_example, LatticeShell, ScaledVector, UnitVectorFamily};

fn cross() -> LatticeShell {
    LatticeShell::new(2, vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]], 1)
        .expect("cross shell")
}

/// The 8-vector construction on the 4 x 4 grid.
pub fn grid4() -> UnitVectorFamily {
    build_instance(
        &ConstructionParams::new(2, 1, 4, cross(), LevelZero::Translates).expect("params"),
    )
    .expect("family")
}

/// The nine averaged vectors of the 5 x 5 grid example.
pub fn figure_averages() -> UnitVectorFamily {
    UnitVectorFamily::new(figure_example().vectors()[25..].to_vec()).expect("family")
}

/// An orthonormal basis of `R^n`.
pub fn basis(n: usize) -> UnitVectorFamily {
    UnitVectorFamily::new(
        (0..n)
            .map(|i| ScaledVector::basis(n, 2, 0, i).expect("basis"))
            .collect(),
    )
    .expect("family")
}
