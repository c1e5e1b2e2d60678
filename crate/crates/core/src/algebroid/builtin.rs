use std::sync::Arc;

use nalgebra::DMatrix;

use super::{ChartAlgebroid, StructureTensor};

fn zero_derivative(n: usize, m: usize) -> super::AnchorDerivativeField {
    Arc::new(move |_: &[f64]| vec![DMatrix::zeros(n, m); n])
}

/// `TM = R^n`: identity anchor, vanishing bracket.
pub fn tangent_bundle(n: usize) -> ChartAlgebroid {
    ChartAlgebroid::new(
        format!("T R^{n}"),
        n,
        n,
        Arc::new(move |_: &[f64]| DMatrix::identity(n, n)),
        Arc::new(move |_: &[f64]| StructureTensor::zeros(n)),
    )
    .expect("tangent bundle shapes are consistent")
    .with_anchor_derivative(zero_derivative(n, n))
}

/// A Lie algebra (or any skew algebra) over a point: zero anchor, constant bracket.
pub fn lie_algebra(name: impl Into<String>, constants: StructureTensor) -> ChartAlgebroid {
    let m = constants.dim();
    ChartAlgebroid::new(
        name,
        0,
        m,
        Arc::new(move |_: &[f64]| DMatrix::zeros(0, m)),
        Arc::new(move |_: &[f64]| constants.clone()),
    )
    .expect("lie algebra shapes are consistent")
    .with_anchor_derivative(zero_derivative(0, m))
}

pub fn so3() -> ChartAlgebroid {
    lie_algebra("so(3)", StructureTensor::levi_civita())
}

/// Trivialized Atiyah algebroid `TM x g` over `M = R^n`: fiber coordinates
/// are base velocities followed by algebra coordinates.
pub fn atiyah(n: usize, algebra: StructureTensor) -> ChartAlgebroid {
    let k = algebra.dim();
    let m = n + k;
    let c = algebra.embedded(m, n);
    ChartAlgebroid::new(
        format!("T R^{n} x g{k}"),
        n,
        m,
        Arc::new(move |_: &[f64]| {
            let mut rho = DMatrix::zeros(n, m);
            for a in 0..n {
                rho[(a, a)] = 1.0;
            }
            rho
        }),
        Arc::new(move |_: &[f64]| c.clone()),
    )
    .expect("atiyah shapes are consistent")
    .with_anchor_derivative(zero_derivative(n, m))
}

/// Action algebroid of `aff(1)` on the line: sections `d/dx` and `x d/dx`
/// with `[e_1, e_2] = e_1`. Its anchor depends on the base point.
pub fn affine_action() -> ChartAlgebroid {
    let mut c = StructureTensor::zeros(2);
    c.set(0, 0, 1, 1.0);
    c.set(0, 1, 0, -1.0);
    ChartAlgebroid::new(
        "aff(1) on R",
        1,
        2,
        Arc::new(|x: &[f64]| DMatrix::from_row_slice(1, 2, &[1.0, x[0]])),
        Arc::new(move |_: &[f64]| c.clone()),
    )
    .expect("affine action shapes are consistent")
    .with_anchor_derivative(Arc::new(|_: &[f64]| vec![DMatrix::from_row_slice(1, 2, &[0.0, 1.0])]))
}
