//! Almost Lie algebroids in a single coordinate chart.
//!
//! A chart is described by its anchor matrix `rho^a_i(x)` (base index `a`,
//! fiber index `i`) and structure functions `c^i_jk(x)` with
//! `[e_j, e_k] = c^i_jk e_i`. Only one anchor is stored, so two-anchor
//! (non-skew) algebroids cannot be expressed at all.

mod builtin;
mod lift;
mod validate;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::{fd_jacobian, DEFAULT_FD_STEP};

pub use builtin::{affine_action, atiyah, lie_algebra, so3, tangent_bundle};
pub use lift::{hamiltonian_vector_field, tangent_lift_section, FiberFunction};
pub use validate::{sample_points, AxiomReport};

pub type AnchorField = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
type SectionField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type StructureField = Arc<dyn Fn(&[f64]) -> StructureTensor + Send + Sync>;
/// `x -> [d rho / d x^b for b in 0..n]`, each an `n x m` matrix.
pub type AnchorDerivativeField = Arc<dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync>;

/// Structure constants `c^i_jk` at one point, stored row-major in `(i, j, k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureTensor {
    dim: usize,
    data: Vec<f64>,
}

impl StructureTensor {
    pub fn zeros(dim: usize) -> Self {
        StructureTensor {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim * dim {
            return Err(Error::dims("structure table", dim * dim * dim, data.len()));
        }
        Ok(StructureTensor { dim, data })
    }

    /// Structure constants of so(3) in the basis with `[e_1, e_2] = e_3`.
    pub fn levi_civita() -> Self {
        let mut c = Self::zeros(3);
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            c.set(k, i, j, 1.0);
            c.set(k, j, i, -1.0);
        }
        c
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.dim + j) * self.dim + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let m = self.dim;
        self.data[(i * m + j) * m + k] = v;
    }

    /// `[b, a]^i = c^i_jk b^j a^k`.
    pub fn bracket(&self, b: &[f64], a: &[f64]) -> Vec<f64> {
        let m = self.dim;
        let mut out = vec![0.0; m];
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for j in 0..m {
                if b[j] == 0.0 {
                    continue;
                }
                for k in 0..m {
                    s += self.get(i, j, k) * b[j] * a[k];
                }
            }
            *o = s;
        }
        out
    }

    /// Dual action on covectors: `out_j = c^k_ij w^i xi_k`.
    pub fn coadjoint(&self, w: &[f64], xi: &[f64]) -> Vec<f64> {
        let m = self.dim;
        let mut out = vec![0.0; m];
        for (j, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in 0..m {
                if xi[k] == 0.0 {
                    continue;
                }
                for i in 0..m {
                    s += self.get(k, i, j) * w[i] * xi[k];
                }
            }
            *o = s;
        }
        out
    }

    /// `max |c^i_jk + c^i_kj|`.
    pub fn skew_violation(&self) -> f64 {
        let m = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    worst = worst.max((self.get(i, j, k) + self.get(i, k, j)).abs());
                }
            }
        }
        worst
    }

    /// Copies `self` into a larger tensor at fiber offset `offset`.
    pub fn embedded(&self, total: usize, offset: usize) -> StructureTensor {
        let mut out = StructureTensor::zeros(total);
        let m = self.dim;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    out.set(i + offset, j + offset, k + offset, self.get(i, j, k));
                }
            }
        }
        out
    }
}

/// An almost Lie algebroid `E -> M` in one global chart, `M = R^n`, fiber `R^m`.
#[derive(Clone)]
pub struct ChartAlgebroid {
    name: String,
    base_dim: usize,
    fiber_dim: usize,
    anchor: AnchorField,
    structure: StructureField,
    anchor_derivative: Option<AnchorDerivativeField>,
    fd_step: f64,
}

impl fmt::Debug for ChartAlgebroid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartAlgebroid")
            .field("name", &self.name)
            .field("base_dim", &self.base_dim)
            .field("fiber_dim", &self.fiber_dim)
            .field("analytic_anchor_derivative", &self.anchor_derivative.is_some())
            .finish()
    }
}

impl ChartAlgebroid {
    /// Builds a chart from callable fields; shapes are checked at the origin.
    pub fn new(
        name: impl Into<String>,
        base_dim: usize,
        fiber_dim: usize,
        anchor: AnchorField,
        structure: StructureField,
    ) -> Result<Self> {
        if fiber_dim == 0 {
            return Err(Error::InvalidArgument("fiber dimension must be positive".into()));
        }
        let origin = vec![0.0; base_dim];
        let rho = anchor(&origin);
        if rho.nrows() != base_dim || rho.ncols() != fiber_dim {
            return Err(Error::InvalidArgument(format!(
                "anchor has shape {}x{}, expected {base_dim}x{fiber_dim}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let c = structure(&origin);
        if c.dim() != fiber_dim {
            return Err(Error::dims("structure tensor", fiber_dim, c.dim()));
        }
        Ok(ChartAlgebroid {
            name: name.into(),
            base_dim,
            fiber_dim,
            anchor,
            structure,
            anchor_derivative: None,
            fd_step: DEFAULT_FD_STEP,
        })
    }

    /// Registers analytic `d rho / d x^b`, overriding finite differences.
    pub fn with_anchor_derivative(mut self, d: AnchorDerivativeField) -> Self {
        self.anchor_derivative = Some(d);
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn has_analytic_anchor_derivative(&self) -> bool {
        self.anchor_derivative.is_some()
    }

    pub fn anchor(&self, x: &[f64]) -> DMatrix<f64> {
        (self.anchor)(x)
    }

    pub fn structure(&self, x: &[f64]) -> StructureTensor {
        (self.structure)(x)
    }

    /// `rho^a_i(x) y^i`.
    pub fn anchor_apply(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        if y.len() != self.fiber_dim {
            return Err(Error::dims("anchor_apply: fiber vector", self.fiber_dim, y.len()));
        }
        Ok(self.anchor_apply_unchecked(x, y))
    }

    pub(crate) fn anchor_apply_unchecked(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        if self.base_dim == 0 {
            return Vec::new();
        }
        let v = self.anchor(x) * DVector::from_column_slice(y);
        v.as_slice().to_vec()
    }

    /// `d rho / d x^b` for every base direction, analytic when registered.
    pub fn anchor_derivatives(&self, x: &[f64]) -> Vec<DMatrix<f64>> {
        match &self.anchor_derivative {
            Some(d) => d(x),
            None => self.fd_anchor_derivatives(x, self.fd_step),
        }
    }

    /// Central-difference `d rho / d x^b`, ignoring any analytic form.
    pub fn fd_anchor_derivatives(&self, x: &[f64], h: f64) -> Vec<DMatrix<f64>> {
        let (n, m) = (self.base_dim, self.fiber_dim);
        let flat = fd_jacobian(|p| self.anchor(p).as_slice().to_vec(), x, h);
        (0..n)
            .map(|b| DMatrix::from_column_slice(n, m, flat.column(b).as_slice()))
            .collect()
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.base_dim {
            return Err(Error::dims(
                format!("{}: base point", self.name),
                self.base_dim,
                x.len(),
            ));
        }
        Ok(())
    }

    /// Block-diagonal product `self x other`; `self` occupies the leading
    /// base and fiber coordinates.
    pub fn product(&self, other: &ChartAlgebroid) -> ChartAlgebroid {
        let (n1, m1) = (self.base_dim, self.fiber_dim);
        let (n2, m2) = (other.base_dim, other.fiber_dim);
        let (n, m) = (n1 + n2, m1 + m2);
        let (a, b) = (self.clone(), other.clone());
        let anchor: AnchorField = Arc::new(move |x: &[f64]| {
            let mut rho = DMatrix::zeros(n, m);
            rho.view_mut((0, 0), (n1, m1)).copy_from(&a.anchor(&x[..n1]));
            rho.view_mut((n1, m1), (n2, m2)).copy_from(&b.anchor(&x[n1..]));
            rho
        });
        let (a, b) = (self.clone(), other.clone());
        let structure: StructureField = Arc::new(move |x: &[f64]| {
            let mut c = a.structure(&x[..n1]).embedded(m, 0);
            let c2 = b.structure(&x[n1..]);
            for i in 0..m2 {
                for j in 0..m2 {
                    for k in 0..m2 {
                        c.set(m1 + i, m1 + j, m1 + k, c2.get(i, j, k));
                    }
                }
            }
            c
        });
        let (a, b) = (self.clone(), other.clone());
        let derivative: AnchorDerivativeField = Arc::new(move |x: &[f64]| {
            let mut out = vec![DMatrix::zeros(n, m); n];
            for (db, d) in a.anchor_derivatives(&x[..n1]).into_iter().enumerate() {
                out[db].view_mut((0, 0), (n1, m1)).copy_from(&d);
            }
            for (db, d) in b.anchor_derivatives(&x[n1..]).into_iter().enumerate() {
                out[n1 + db].view_mut((n1, m1), (n2, m2)).copy_from(&d);
            }
            out
        });
        ChartAlgebroid {
            name: format!("{} x {}", self.name, other.name),
            base_dim: n,
            fiber_dim: m,
            anchor,
            structure,
            anchor_derivative: Some(derivative),
            fd_step: self.fd_step,
        }
    }

    /// The product `TR x E` with the time/cost direction at index 0.
    pub fn product_with_time(&self) -> ExtendedAlgebroid {
        ExtendedAlgebroid {
            chart: tangent_bundle(1).product(self),
            underlying: self.clone(),
        }
    }
}

/// `TR x E`: base coordinates `(x^0, x)`, fiber coordinates `(a^0, a)`.
#[derive(Clone, Debug)]
pub struct ExtendedAlgebroid {
    chart: ChartAlgebroid,
    underlying: ChartAlgebroid,
}

impl ExtendedAlgebroid {
    pub fn chart(&self) -> &ChartAlgebroid {
        &self.chart
    }

    pub fn underlying(&self) -> &ChartAlgebroid {
        &self.underlying
    }

    pub fn embed_point(x0: f64, x: &[f64]) -> Vec<f64> {
        std::iter::once(x0).chain(x.iter().copied()).collect()
    }

    pub fn embed_fiber(a0: f64, a: &[f64]) -> Vec<f64> {
        Self::embed_point(a0, a)
    }

    /// Drops the time/cost coordinate.
    pub fn project(v: &[f64]) -> &[f64] {
        &v[1..]
    }
}

/// A `C^1` section `x -> f(x)` of the fiber, with optional analytic Jacobian.
#[derive(Clone)]
pub struct Section {
    eval: SectionField,
    jacobian: Option<AnchorField>,
}

impl Section {
    pub fn new(f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Section {
            eval: Arc::new(f),
            jacobian: None,
        }
    }

    pub fn constant(v: Vec<f64>) -> Self {
        Section::new(move |_| v.clone())
    }

    pub fn with_jacobian(mut self, j: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(j));
        self
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.eval)(x)
    }

    /// `m x n` Jacobian `d f^k / d x^a`.
    pub fn jacobian(&self, x: &[f64], h: f64) -> DMatrix<f64> {
        match &self.jacobian {
            Some(j) => j(x),
            None => fd_jacobian(|p| self.eval(p), x, h),
        }
    }
}

impl fmt::Debug for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Section")
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_apply_examples() {
        let tm = tangent_bundle(2);
        assert_eq!(tm.anchor_apply(&[0.5, 0.1], &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);

        let g = so3();
        assert!(g.anchor_apply(&[], &[1.0, 2.0, 3.0]).unwrap().is_empty());

        let diag = ChartAlgebroid::new(
            "diag",
            2,
            2,
            Arc::new(|x: &[f64]| DMatrix::from_row_slice(2, 2, &[x[0], 0.0, 0.0, 1.0])),
            Arc::new(|_: &[f64]| StructureTensor::zeros(2)),
        )
        .unwrap();
        assert_eq!(diag.anchor_apply(&[2.0, 0.0], &[3.0, 4.0]).unwrap(), vec![6.0, 4.0]);
        assert!(matches!(
            diag.anchor_apply(&[2.0, 0.0], &[3.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn levi_civita_bracket() {
        let c = StructureTensor::levi_civita();
        assert_eq!(c.bracket(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]), vec![0.0, 0.0, 1.0]);
        assert_eq!(c.bracket(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]), vec![0.0, 1.0, 0.0]);
        assert_eq!(c.skew_violation(), 0.0);
    }

    #[test]
    fn product_with_time_dimensions() {
        let ext = so3().product_with_time();
        assert_eq!((ext.chart().base_dim(), ext.chart().fiber_dim()), (1, 4));
        let ext = tangent_bundle(2).product_with_time();
        assert_eq!((ext.chart().base_dim(), ext.chart().fiber_dim()), (3, 3));
        assert_eq!(ext.chart().anchor(&[0.1, 0.2, 0.3]), DMatrix::identity(3, 3));
        let c = ext.chart().structure(&[0.0]);
        assert!(c.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn extended_structure_has_empty_time_slices() {
        let ext = so3().product_with_time();
        let c = ext.chart().structure(&[0.4]);
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(c.get(0, a, b), 0.0);
                assert_eq!(c.get(a, 0, b), 0.0);
                assert_eq!(c.get(a, b, 0), 0.0);
            }
        }
        assert_eq!(c.get(3, 1, 2), 1.0);
    }
}
