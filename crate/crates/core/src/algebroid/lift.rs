use std::fmt;
use std::sync::Arc;

use super::{ChartAlgebroid, Section};
use crate::error::{Error, Result};

type ValueFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
type GradientFn = Arc<dyn Fn(&[f64], &[f64]) -> (Vec<f64>, Vec<f64>) + Send + Sync>;

/// A function `h(x, xi)` on the dual bundle.
#[derive(Clone)]
pub struct FiberFunction {
    value: ValueFn,
    gradient: Option<GradientFn>,
}

impl FiberFunction {
    pub fn new(h: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        FiberFunction {
            value: Arc::new(h),
            gradient: None,
        }
    }

    /// Registers `(dh/dx, dh/dxi)`.
    pub fn with_gradient(mut self, g: impl Fn(&[f64], &[f64]) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    /// The linear function `<f(x), xi>` of a section.
    pub fn linear(f: Section, fd_step: f64) -> Self {
        let g = f.clone();
        FiberFunction::new(move |x, xi| crate::numerics::dot(&f.eval(x), xi)).with_gradient(move |x, xi| {
            let jac = g.jacobian(x, fd_step);
            let dx = (0..x.len())
                .map(|a| (0..xi.len()).map(|k| jac[(k, a)] * xi[k]).sum())
                .collect();
            (dx, g.eval(x))
        })
    }

    pub fn value(&self, x: &[f64], xi: &[f64]) -> f64 {
        (self.value)(x, xi)
    }

    /// Analytic gradient when registered, else central differences with step `h`.
    pub fn gradient(&self, x: &[f64], xi: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
        if let Some(g) = &self.gradient {
            return g(x, xi);
        }
        let mut xp = x.to_vec();
        let dx = (0..x.len())
            .map(|a| {
                xp[a] = x[a] + h;
                let up = self.value(&xp, xi);
                xp[a] = x[a] - h;
                let dn = self.value(&xp, xi);
                xp[a] = x[a];
                (up - dn) / (2.0 * h)
            })
            .collect();
        let mut xip = xi.to_vec();
        let dxi = (0..xi.len())
            .map(|i| {
                xip[i] = xi[i] + h;
                let up = self.value(x, &xip);
                xip[i] = xi[i] - h;
                let dn = self.value(x, &xip);
                xip[i] = xi[i];
                (up - dn) / (2.0 * h)
            })
            .collect();
        (dx, dxi)
    }
}

impl fmt::Debug for FiberFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiberFunction")
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

fn check_fiber(alg: &ChartAlgebroid, what: &str, v: &[f64]) -> Result<()> {
    if v.len() != alg.fiber_dim() {
        return Err(Error::dims(what.to_string(), alg.fiber_dim(), v.len()));
    }
    Ok(())
}

/// Tangent lift of a section evaluated at `(x, y)`:
/// `xdot = rho f`, `ydot^k = rho^a_i y^i d_a f^k + c^k_ij y^i f^j`.
pub fn tangent_lift_section(alg: &ChartAlgebroid, f: &Section, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    alg.check_point(x)?;
    check_fiber(alg, "tangent lift: fiber point", y)?;
    let fx = f.eval(x);
    check_fiber(alg, "tangent lift: section value", &fx)?;
    let xdot = alg.anchor_apply_unchecked(x, &fx);
    let ry = alg.anchor_apply_unchecked(x, y);
    let m = alg.fiber_dim();
    let mut ydot = alg.structure(x).bracket(y, &fx);
    if alg.base_dim() > 0 {
        let jac = f.jacobian(x, alg.fd_step());
        for (k, yk) in ydot.iter_mut().enumerate().take(m) {
            for (a, ra) in ry.iter().enumerate() {
                *yk += ra * jac[(k, a)];
            }
        }
    }
    Ok((xdot, ydot))
}

/// Hamiltonian vector field of `h` at `(x, xi)`:
/// `xdot^b = rho^b_i dh/dxi_i`, `xidot_j = c^k_ij xi_k dh/dxi_i - rho^a_j dh/dx^a`.
pub fn hamiltonian_vector_field(
    alg: &ChartAlgebroid,
    h: &FiberFunction,
    x: &[f64],
    xi: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    alg.check_point(x)?;
    check_fiber(alg, "hamiltonian field: covector", xi)?;
    let (dx, dxi) = h.gradient(x, xi, alg.fd_step());
    let xdot = alg.anchor_apply_unchecked(x, &dxi);
    let mut xidot = alg.structure(x).coadjoint(&dxi, xi);
    if alg.base_dim() > 0 {
        let rho = alg.anchor(x);
        for (j, v) in xidot.iter_mut().enumerate() {
            for (a, da) in dx.iter().enumerate() {
                *v -= rho[(a, j)] * da;
            }
        }
    }
    Ok((xdot, xidot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::{so3, tangent_bundle};

    #[test]
    fn tangent_lift_examples() {
        let tm = tangent_bundle(2);
        let (xd, yd) =
            tangent_lift_section(&tm, &Section::constant(vec![1.0, -2.0]), &[0.3, 0.4], &[5.0, 6.0]).unwrap();
        assert_eq!(xd, vec![1.0, -2.0]);
        assert_eq!(yd, vec![0.0, 0.0]);

        let (xd, yd) =
            tangent_lift_section(&so3(), &Section::constant(vec![1.0, 0.0, 0.0]), &[], &[0.0, 1.0, 0.0]).unwrap();
        assert!(xd.is_empty());
        assert_eq!(yd, vec![0.0, 0.0, -1.0]);

        let f = Section::new(|x| vec![x[0]]);
        let (xd, yd) = tangent_lift_section(&tangent_bundle(1), &f, &[1.0], &[2.0]).unwrap();
        assert_eq!(xd, vec![1.0]);
        assert!((yd[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn hamiltonian_field_examples() {
        let h = FiberFunction::new(|_, _| 4.0);
        let (xd, xid) = hamiltonian_vector_field(&tangent_bundle(2), &h, &[0.1, 0.2], &[1.0, 1.0]).unwrap();
        assert!(xd.iter().chain(&xid).all(|v| v.abs() < 1e-12));

        let h = FiberFunction::linear(Section::constant(vec![1.0, 0.0, 0.0]), 1e-5);
        let (_, xid) = hamiltonian_vector_field(&so3(), &h, &[], &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(xid, vec![0.0, 1.0, 0.0]);

        let h = FiberFunction::linear(Section::constant(vec![2.0, -1.0]), 1e-5);
        let (xd, xid) = hamiltonian_vector_field(&tangent_bundle(2), &h, &[0.5, 0.5], &[3.0, 4.0]).unwrap();
        assert_eq!(xd, vec![2.0, -1.0]);
        assert!(xid.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn fd_gradient_matches_analytic() {
        let h = FiberFunction::new(|x, xi| x[0] * x[0] * xi[1] + xi[0] * xi[0]);
        let (dx, dxi) = h.gradient(&[1.5], &[2.0, -1.0], 1e-5);
        assert!((dx[0] + 3.0).abs() < 1e-8);
        assert!((dxi[0] - 4.0).abs() < 1e-8 && (dxi[1] - 2.25).abs() < 1e-8);
    }
}
