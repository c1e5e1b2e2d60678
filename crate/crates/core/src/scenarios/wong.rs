use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebroid::{atiyah, ChartAlgebroid, StructureTensor};
use crate::control::{ControlSpace, ControlSystem};
use crate::error::{Error, Result};
use crate::numerics::differentiate_on_grid;
use crate::pmp::Extremal;

/// A polynomial in the base coordinates, as `(coefficient, exponents)` terms.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn constant(c: f64) -> Self {
        Polynomial {
            terms: vec![(c, Vec::new())],
        }
    }

    /// `c x_var`.
    pub fn linear(c: f64, var: usize) -> Self {
        let mut e = vec![0; var + 1];
        e[var] = 1;
        Polynomial { terms: vec![(c, e)] }
    }

    pub fn plus(mut self, other: Polynomial) -> Self {
        self.terms.extend(other.terms);
        self
    }

    /// Largest variable index used, plus one.
    pub fn arity(&self) -> usize {
        self.terms.iter().map(|(_, e)| e.len()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * e.iter().zip(x).map(|(&p, &v)| v.powi(p as i32)).product::<f64>())
            .sum()
    }

    /// `d/dx_var`.
    pub fn partial(&self, x: &[f64], var: usize) -> f64 {
        self.terms
            .iter()
            .filter(|(_, e)| e.get(var).is_some_and(|&p| p > 0))
            .map(|(c, e)| {
                let rest: f64 = e
                    .iter()
                    .zip(x)
                    .enumerate()
                    .map(|(k, (&p, &v))| {
                        if k == var {
                            p as f64 * v.powi(p as i32 - 1)
                        } else {
                            v.powi(p as i32)
                        }
                    })
                    .product();
                c * rest
            })
            .sum()
    }
}

/// Connection and metric on a trivialized principal bundle over `M = R^n`.
///
/// `connection[i * n + b]` is `A^i_b(x)`; the horizontal lift of a base
/// velocity `u` is `(u, -A(x) u)`. `metric[a * n + b]` is `g_ab(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WongFixture {
    n: usize,
    algebra: StructureTensor,
    connection: Vec<Polynomial>,
    metric: Vec<Polynomial>,
}

/// Residuals of the reduced equations along a normal extremal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WongReport {
    /// `max |d/dt p~_b + B^i_ba u^a xi_i + z0/2 d_b g_ac u^a u^c|`.
    pub momentum_residual: f64,
    /// `max |d/dt xi_j + c^k_ij A^i_b u^b xi_k|`.
    pub charge_residual: f64,
    /// `max |g(u, u)(t) - g(u, u)(t0)|`.
    pub speed_drift: f64,
    /// `max |p~_a + z0 g_ab u^b|`.
    pub momentum_relation: f64,
}

impl WongFixture {
    pub fn new(
        n: usize,
        algebra: StructureTensor,
        connection: Vec<Polynomial>,
        metric: Vec<Polynomial>,
    ) -> Result<Self> {
        let k = algebra.dim();
        if connection.len() != k * n {
            return Err(Error::dims("connection coefficients", k * n, connection.len()));
        }
        if metric.len() != n * n {
            return Err(Error::dims("metric coefficients", n * n, metric.len()));
        }
        if let Some(p) = connection.iter().chain(&metric).find(|p| p.arity() > n) {
            return Err(Error::InvalidArgument(format!(
                "polynomial uses {} variables on a base of dimension {n}",
                p.arity()
            )));
        }
        for a in 0..n {
            for b in 0..a {
                if metric[a * n + b] != metric[b * n + a] {
                    return Err(Error::InvalidArgument(format!(
                        "metric entries ({a}, {b}) and ({b}, {a}) differ"
                    )));
                }
            }
        }
        Ok(WongFixture {
            n,
            algebra,
            connection,
            metric,
        })
    }

    /// `so(3)` over `R^2` with a connection linear in `x` and the flat metric.
    pub fn so3_linear() -> Self {
        use Polynomial as P;
        let connection = vec![
            P::linear(0.5, 1),
            P::constant(0.1).plus(P::linear(0.2, 0)),
            P::linear(-0.3, 0),
            P::linear(0.4, 1),
            P::constant(0.2),
            P::linear(-0.1, 0).plus(P::linear(0.3, 1)),
        ];
        WongFixture::new(2, StructureTensor::levi_civita(), connection, Self::flat_metric(2)).unwrap()
    }

    /// `so(3)` over `R^2` with `A = 0` and the flat metric.
    pub fn so3_flat() -> Self {
        WongFixture::new(
            2,
            StructureTensor::levi_civita(),
            vec![Polynomial::default(); 6],
            Self::flat_metric(2),
        )
        .unwrap()
    }

    fn flat_metric(n: usize) -> Vec<Polynomial> {
        (0..n * n)
            .map(|i| {
                if i / n == i % n {
                    Polynomial::constant(1.0)
                } else {
                    Polynomial::default()
                }
            })
            .collect()
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    pub fn algebra(&self) -> &StructureTensor {
        &self.algebra
    }

    pub fn connection_coefficients(&self) -> &[Polynomial] {
        &self.connection
    }

    pub fn metric_coefficients(&self) -> &[Polynomial] {
        &self.metric
    }

    /// True when the connection vanishes identically.
    pub fn is_flat(&self) -> bool {
        self.connection.iter().all(|p| p.terms.iter().all(|(c, _)| *c == 0.0))
    }

    pub fn algebroid(&self) -> ChartAlgebroid {
        atiyah(self.n, self.algebra.clone())
    }

    /// `A^i_b(x)` as a `k x n` matrix.
    pub fn connection(&self, x: &[f64]) -> DMatrix<f64> {
        let (n, k) = (self.n, self.algebra.dim());
        DMatrix::from_fn(k, n, |i, b| self.connection[i * n + b].eval(x))
    }

    /// `d_a A^i_b(x)`.
    pub fn connection_derivative(&self, x: &[f64], a: usize) -> DMatrix<f64> {
        let (n, k) = (self.n, self.algebra.dim());
        DMatrix::from_fn(k, n, |i, b| self.connection[i * n + b].partial(x, a))
    }

    pub fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |a, b| self.metric[a * n + b].eval(x))
    }

    pub fn metric_derivative(&self, x: &[f64], c: usize) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |a, b| self.metric[a * n + b].partial(x, c))
    }

    /// Curvature `B^i_ab` of the connection coefficients `-A` entering the
    /// horizontal lift: `d_a(-A)^i_b - d_b(-A)^i_a + c^i_jk (-A)^j_a (-A)^k_b`.
    /// Entry `[i][(a, b)]`.
    pub fn curvature(&self, x: &[f64]) -> Vec<DMatrix<f64>> {
        let (n, k) = (self.n, self.algebra.dim());
        let a_mat = self.connection(x);
        let d: Vec<DMatrix<f64>> = (0..n).map(|a| self.connection_derivative(x, a)).collect();
        (0..k)
            .map(|i| {
                DMatrix::from_fn(n, n, |a, b| {
                    let mut v = -d[a][(i, b)] + d[b][(i, a)];
                    for j in 0..k {
                        for l in 0..k {
                            v += self.algebra.get(i, j, l) * a_mat[(j, a)] * a_mat[(l, b)];
                        }
                    }
                    v
                })
            })
            .collect()
    }

    /// `max |B^i_ab + B^i_ba|` over the points.
    pub fn curvature_antisymmetry(&self, points: &[Vec<f64>]) -> f64 {
        points
            .iter()
            .flat_map(|x| self.curvature(x))
            .map(|b| (&b + b.transpose()).abs().max())
            .fold(0.0, f64::max)
    }

    /// `f(x, u) = (u, -A(x) u)`, `L = g(x)(u, u) / 2` with `u` in the box
    /// `[-bound, bound]^n`, analytic derivatives and the normal-case maximizer
    /// `u = g^-1 (p - A^T xi) / (-z0)`.
    pub fn control_system(&self, bound: f64) -> Result<ControlSystem> {
        let n = self.n;
        let k = self.algebra.dim();
        let (fx, fj, lc, lg, mx) = (self.clone(), self.clone(), self.clone(), self.clone(), self.clone());
        let space = ControlSpace::interval(vec![-bound; n], vec![bound; n])?;
        let sys = ControlSystem::new(
            self.algebroid(),
            space,
            move |x, u| {
                let v = -fx.connection(x) * DMatrix::from_column_slice(n, 1, u);
                u.iter().copied().chain(v.iter().copied()).collect()
            },
            move |x, u| {
                let u = DMatrix::from_column_slice(n, 1, u);
                0.5 * (u.transpose() * lc.metric(x) * &u)[(0, 0)]
            },
        )?
        .with_control_jacobian(move |x, u| {
            let u = DMatrix::from_column_slice(n, 1, u);
            let mut j = DMatrix::zeros(n + k, n);
            for a in 0..n {
                let col = -fj.connection_derivative(x, a) * &u;
                j.view_mut((n, a), (k, 1)).copy_from(&col);
            }
            j
        })
        .with_cost_gradient(move |x, u| {
            let u = DMatrix::from_column_slice(n, 1, u);
            (0..n)
                .map(|c| 0.5 * (u.transpose() * lg.metric_derivative(x, c) * &u)[(0, 0)])
                .collect()
        })
        .with_maximizer(move |x, z, z0| {
            let p = DMatrix::from_column_slice(n, 1, &z[..n]);
            let xi = DMatrix::from_column_slice(k, 1, &z[n..]);
            let rhs = (p - mx.connection(x).transpose() * xi) / (-z0);
            match mx.metric(x).lu().solve(&rhs) {
                Some(u) => u.iter().copied().collect(),
                None => vec![f64::NAN; n],
            }
        });
        Ok(sys)
    }

    /// Fails when the metric is singular at `x`.
    pub fn check_metric(&self, x: &[f64]) -> Result<()> {
        let g = self.metric(x);
        let svd = g.svd(false, false);
        let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
        if !(smin > 1e-12 * smax.max(1.0)) {
            return Err(Error::InvalidArgument(format!("metric is singular at {x:?}")));
        }
        Ok(())
    }

    /// Residuals of both reduced equations along a normal extremal of
    /// [`WongFixture::control_system`], skipping breakpoint nodes.
    pub fn residuals(&self, ext: &Extremal) -> Result<WongReport> {
        let n = self.n;
        let k = self.algebra.dim();
        let traj = &ext.trajectory;
        if traj.path.base_dim() != n || traj.path.fiber_dim() != n + k {
            return Err(Error::dims("wong extremal", n + k, traj.path.fiber_dim()));
        }
        let z0 = ext.costate.z0();
        let grid = traj.grid();
        let xs = traj.path.base();
        let zs = ext.costate.z();
        let us = &traj.controls;
        let p_tilde: Vec<Vec<f64>> = xs
            .iter()
            .zip(zs)
            .map(|(x, z)| {
                let a = self.connection(x);
                (0..n)
                    .map(|b| z[b] - (0..k).map(|i| a[(i, b)] * z[n + i]).sum::<f64>())
                    .collect()
            })
            .collect();
        let xi: Vec<Vec<f64>> = zs.iter().map(|z| z[n..].to_vec()).collect();
        let dp = differentiate_on_grid(grid, &p_tilde);
        let dxi = differentiate_on_grid(grid, &xi);
        let speed = |x: &[f64], u: &[f64]| {
            let u = DMatrix::from_column_slice(n, 1, u);
            (u.transpose() * self.metric(x) * &u)[(0, 0)]
        };
        let s0 = speed(&xs[0], &us[0]);
        let mut report = WongReport {
            momentum_residual: 0.0,
            charge_residual: 0.0,
            speed_drift: 0.0,
            momentum_relation: 0.0,
        };
        for i in 0..grid.len() {
            let (x, u) = (&xs[i], &us[i]);
            report.speed_drift = report.speed_drift.max((speed(x, u) - s0).abs());
            let g = self.metric(x);
            for a in 0..n {
                let gu: f64 = (0..n).map(|b| g[(a, b)] * u[b]).sum();
                report.momentum_relation = report.momentum_relation.max((p_tilde[i][a] + z0 * gu).abs());
            }
            if grid.is_breakpoint_node(i) {
                continue;
            }
            let curv = self.curvature(x);
            for b in 0..n {
                let dg = self.metric_derivative(x, b);
                let mut r = dp[i][b];
                for a in 0..n {
                    r += (0..k).map(|j| curv[j][(b, a)] * u[a] * xi[i][j]).sum::<f64>();
                    r += 0.5 * z0 * (0..n).map(|c| dg[(a, c)] * u[a] * u[c]).sum::<f64>();
                }
                report.momentum_residual = report.momentum_residual.max(r.abs());
            }
            let a_mat = self.connection(x);
            let au: Vec<f64> = (0..k).map(|j| (0..n).map(|b| a_mat[(j, b)] * u[b]).sum()).collect();
            for j in 0..k {
                let mut r = dxi[i][j];
                for l in 0..k {
                    for kk in 0..k {
                        r += self.algebra.get(kk, l, j) * au[l] * xi[i][kk];
                    }
                }
                report.charge_residual = report.charge_residual.max(r.abs());
            }
        }
        Ok(report)
    }
}
