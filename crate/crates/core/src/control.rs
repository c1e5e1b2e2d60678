//! Control systems on an algebroid chart, their trajectories and the two
//! parallel transports along a trajectory.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::algebroid::{ChartAlgebroid, ExtendedAlgebroid};
use crate::error::{Error, Result};
use crate::numerics::{dot, fd_jacobian, integrate, interpolate_on_segment, rhs_fn, TimeGrid, DEFAULT_STEP};
use crate::paths::EPath;

pub type ControlMap = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;
pub type CostMap = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
/// `(x, u) -> df/dx`, an `m x n` matrix.
pub type ControlJacobian = Arc<dyn Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync>;
pub type CostGradient = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;
/// `(x, z, z0) -> u*` maximizing `<f(x, u), z> + z0 L(x, u)` over the control space.
pub type Maximizer = Arc<dyn Fn(&[f64], &[f64], f64) -> Vec<f64> + Send + Sync>;

/// Tolerance for membership of a control value in a finite set.
const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum ControlSpace {
    FiniteSet(Vec<Vec<f64>>),
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl ControlSpace {
    pub fn finite(values: Vec<Vec<f64>>) -> Result<Self> {
        let p = values
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidArgument("finite control set must be nonempty".into()))?;
        if let Some(bad) = values.iter().find(|v| v.len() != p) {
            return Err(Error::dims("finite control set", p, bad.len()));
        }
        Ok(ControlSpace::FiniteSet(values))
    }

    pub fn interval(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidArgument(
                "box bounds must have equal positive length".into(),
            ));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::InvalidArgument("box needs lower <= upper componentwise".into()));
        }
        Ok(ControlSpace::Box { lower, upper })
    }

    pub fn dim(&self) -> usize {
        match self {
            ControlSpace::FiniteSet(v) => v[0].len(),
            ControlSpace::Box { lower, .. } => lower.len(),
        }
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        if u.len() != self.dim() {
            return false;
        }
        match self {
            ControlSpace::FiniteSet(vals) => vals
                .iter()
                .any(|v| v.iter().zip(u).all(|(a, b)| (a - b).abs() <= MEMBERSHIP_TOL)),
            ControlSpace::Box { lower, upper } => u
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(x, (l, h))| *l <= *x && *x <= *h),
        }
    }
}

/// `f: (x, u) -> E_x` with running cost `L(x, u)` and control space `U`.
#[derive(Clone)]
pub struct ControlSystem {
    alg: ChartAlgebroid,
    space: ControlSpace,
    f: ControlMap,
    cost: CostMap,
    df_dx: Option<ControlJacobian>,
    dl_dx: Option<CostGradient>,
    maximizer: Option<Maximizer>,
}

impl fmt::Debug for ControlSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlSystem")
            .field("alg", &self.alg)
            .field("space", &self.space)
            .field("analytic_df_dx", &self.df_dx.is_some())
            .field("analytic_dl_dx", &self.dl_dx.is_some())
            .field("maximizer", &self.maximizer.is_some())
            .finish()
    }
}

fn sample_control(space: &ControlSpace) -> Vec<f64> {
    match space {
        ControlSpace::FiniteSet(v) => v[0].clone(),
        ControlSpace::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect(),
    }
}

impl ControlSystem {
    /// Shapes of `f` are checked at the origin with a sample control.
    pub fn new(
        alg: ChartAlgebroid,
        space: ControlSpace,
        f: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        cost: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let x = vec![0.0; alg.base_dim()];
        let fx = f(&x, &sample_control(&space));
        if fx.len() != alg.fiber_dim() {
            return Err(Error::dims("control map value", alg.fiber_dim(), fx.len()));
        }
        Ok(ControlSystem {
            alg,
            space,
            f: Arc::new(f),
            cost: Arc::new(cost),
            df_dx: None,
            dl_dx: None,
            maximizer: None,
        })
    }

    pub fn with_control_jacobian(mut self, j: impl Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.df_dx = Some(Arc::new(j));
        self
    }

    pub fn with_cost_gradient(mut self, g: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.dl_dx = Some(Arc::new(g));
        self
    }

    pub fn with_maximizer(mut self, m: impl Fn(&[f64], &[f64], f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.maximizer = Some(Arc::new(m));
        self
    }

    pub fn alg(&self) -> &ChartAlgebroid {
        &self.alg
    }

    pub fn space(&self) -> &ControlSpace {
        &self.space
    }

    pub fn control_dim(&self) -> usize {
        self.space.dim()
    }

    pub fn maximizer(&self) -> Option<&Maximizer> {
        self.maximizer.as_ref()
    }

    pub fn control(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        (self.f)(x, u)
    }

    pub fn cost(&self, x: &[f64], u: &[f64]) -> f64 {
        (self.cost)(x, u)
    }

    pub fn control_jacobian(&self, x: &[f64], u: &[f64]) -> DMatrix<f64> {
        match &self.df_dx {
            Some(j) => j(x, u),
            None => fd_jacobian(|p| self.control(p, u), x, self.alg.fd_step()),
        }
    }

    pub fn cost_gradient(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        match &self.dl_dx {
            Some(g) => g(x, u),
            None => {
                let j = fd_jacobian(|p| vec![self.cost(p, u)], x, self.alg.fd_step());
                j.row(0).iter().copied().collect()
            }
        }
    }

    /// `rho(x) f(x, u)`.
    pub fn base_velocity(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        self.alg.anchor_apply_unchecked(x, &self.control(x, u))
    }

    /// Transport field on `E`: `ydot^i = d_a f^i rho^a_k y^k + c^i_jk y^j f^k`.
    pub fn fiber_velocity(&self, x: &[f64], u: &[f64], y: &[f64]) -> Vec<f64> {
        let f = self.control(x, u);
        let mut out = self.alg.structure(x).bracket(y, &f);
        if self.alg.base_dim() > 0 {
            let ry = self.alg.anchor_apply_unchecked(x, y);
            let j = self.control_jacobian(x, u);
            for (i, o) in out.iter_mut().enumerate() {
                *o += (0..ry.len()).map(|a| j[(i, a)] * ry[a]).sum::<f64>();
            }
        }
        out
    }

    /// Costate field: `zdot_k = -rho^a_k (d_a f^i z_i + z0 d_a L) + c^i_jk f^j z_i`.
    pub fn costate_velocity(&self, x: &[f64], u: &[f64], z: &[f64], z0: f64) -> Vec<f64> {
        let f = self.control(x, u);
        let mut out = self.alg.structure(x).coadjoint(&f, z);
        let n = self.alg.base_dim();
        if n > 0 {
            let j = self.control_jacobian(x, u);
            let mut dh = vec![0.0; n];
            for (a, d) in dh.iter_mut().enumerate() {
                *d = (0..z.len()).map(|i| j[(i, a)] * z[i]).sum();
            }
            if z0 != 0.0 {
                for (d, g) in dh.iter_mut().zip(self.cost_gradient(x, u)) {
                    *d += z0 * g;
                }
            }
            let rho = self.alg.anchor(x);
            for (k, o) in out.iter_mut().enumerate() {
                *o -= (0..n).map(|a| rho[(a, k)] * dh[a]).sum::<f64>();
            }
        }
        out
    }

    pub(crate) fn check_control(&self, u: &[f64]) -> Result<()> {
        if !self.space.contains(u) {
            return Err(Error::InvalidArgument(format!(
                "control value {u:?} is outside the control space"
            )));
        }
        Ok(())
    }
}

/// An admissible control: piecewise constant, or sampled on a grid for
/// continuous controls produced by closed-loop integration.
#[derive(Clone, Debug, PartialEq)]
pub enum ControlSignal {
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
    Sampled {
        grid: TimeGrid,
        values: Vec<Vec<f64>>,
    },
}

impl ControlSignal {
    pub fn constant(u: Vec<f64>) -> Self {
        ControlSignal::PiecewiseConstant {
            breakpoints: Vec::new(),
            values: vec![u],
        }
    }

    /// `values[k]` holds on `[breakpoints[k-1], breakpoints[k])`.
    pub fn piecewise_constant(breakpoints: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::dims(
                "piecewise-constant control values",
                breakpoints.len() + 1,
                values.len(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument(
                "control breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(ControlSignal::PiecewiseConstant { breakpoints, values })
    }

    pub fn sampled(grid: TimeGrid, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::dims("sampled control", grid.len(), values.len()));
        }
        Ok(ControlSignal::Sampled { grid, values })
    }

    pub fn breakpoints(&self) -> &[f64] {
        match self {
            ControlSignal::PiecewiseConstant { breakpoints, .. } => breakpoints,
            ControlSignal::Sampled { grid, .. } => grid.breakpoints(),
        }
    }

    /// Right-continuous value at `t`.
    pub fn value_at(&self, t: f64) -> Vec<f64> {
        match self {
            ControlSignal::PiecewiseConstant { breakpoints, values } => {
                values[breakpoints.partition_point(|&b| b <= t)].clone()
            }
            ControlSignal::Sampled { grid, values } => {
                let k = grid.segment_at(t).min(grid.segments().len() - 1);
                interpolate_on_segment(grid, values, k, t)
            }
        }
    }

    /// Value inside segment `k` of an integration grid whose breakpoints
    /// include those of the signal; ends of the segment get one-sided limits.
    pub fn value_in_segment(&self, grid: &TimeGrid, k: usize, t: f64) -> Vec<f64> {
        match self {
            ControlSignal::PiecewiseConstant { .. } => {
                let (lo, hi) = grid.segment_bounds(k);
                self.value_at(0.5 * (lo + hi))
            }
            ControlSignal::Sampled { grid: own, values } => {
                if own == grid {
                    return interpolate_on_segment(own, values, k, t);
                }
                // Segment of the signal's own grid that contains segment `k`.
                let (lo, hi) = grid.segment_bounds(k);
                let own_k = own.segment_at(0.5 * (lo + hi)).min(own.segments().len() - 1);
                interpolate_on_segment(own, values, own_k, t)
            }
        }
    }

    /// True unless `t` lies on a discontinuity of the signal.
    pub fn is_continuity_point(&self, t: f64) -> bool {
        self.breakpoints().iter().all(|&b| (b - t).abs() > 1e-12)
    }

    /// Control values at every node of `grid`, one-sided at breakpoints.
    pub fn node_values(&self, grid: &TimeGrid) -> Vec<Vec<f64>> {
        let nodes = grid.nodes();
        let mut out = Vec::with_capacity(nodes.len());
        for (k, seg) in grid.segments().iter().enumerate() {
            for i in seg.clone() {
                out.push(self.value_in_segment(grid, k, nodes[i]));
            }
        }
        out
    }

    /// Integration grid on `interval` honouring the signal's discontinuities.
    pub fn grid_for(&self, interval: &Interval) -> Result<TimeGrid> {
        match self {
            ControlSignal::PiecewiseConstant { breakpoints, .. } => {
                let inner = breakpoints
                    .iter()
                    .copied()
                    .filter(|&b| b > interval.t0 + 1e-12 && b < interval.t1 - 1e-12)
                    .collect();
                TimeGrid::with_breakpoints(interval.t0, interval.t1, interval.step, inner)
            }
            ControlSignal::Sampled { grid, .. } => {
                if grid.t0() == interval.t0 && grid.t1() == interval.t1 {
                    Ok(grid.clone())
                } else if grid.t0() <= interval.t0 && interval.t1 <= grid.t1() {
                    let inner = grid
                        .breakpoints()
                        .iter()
                        .copied()
                        .filter(|&b| b > interval.t0 + 1e-12 && b < interval.t1 - 1e-12)
                        .collect();
                    TimeGrid::with_breakpoints(interval.t0, interval.t1, interval.step, inner)
                } else {
                    Err(Error::GridMismatch(format!(
                        "sampled control lives on [{}, {}], requested [{}, {}]",
                        grid.t0(),
                        grid.t1(),
                        interval.t0,
                        interval.t1
                    )))
                }
            }
        }
    }

    fn check_values(&self, sys: &ControlSystem) -> Result<()> {
        let vals = match self {
            ControlSignal::PiecewiseConstant { values, .. } => values,
            ControlSignal::Sampled { values, .. } => values,
        };
        vals.iter().try_for_each(|u| sys.check_control(u))
    }
}

/// Time interval with an integration step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
}

impl Interval {
    pub fn new(t0: f64, t1: f64) -> Self {
        Interval {
            t0,
            t1,
            step: DEFAULT_STEP,
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }
}

/// A trajectory together with its control.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub path: EPath,
    pub control: ControlSignal,
    /// Control value at every node (one-sided at breakpoints).
    pub controls: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn grid(&self) -> &TimeGrid {
        self.path.grid()
    }

    /// Base point at `t`, interpolated within its segment.
    pub fn base_at(&self, t: f64) -> Vec<f64> {
        self.path.base_at(t)
    }

    /// Columns `t, x_1..x_n, a_1..a_m, u_1..u_p`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let (n, m) = (self.path.base_dim(), self.path.fiber_dim());
        let p = self.controls[0].len();
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x_{i}")));
        header.extend((1..=m).map(|i| format!("a_{i}")));
        header.extend((1..=p).map(|i| format!("u_{i}")));
        w.write_record(&header)?;
        for (i, &t) in self.grid().nodes().iter().enumerate() {
            let row: Vec<String> = std::iter::once(t)
                .chain(self.path.base()[i].iter().copied())
                .chain(self.path.fiber()[i].iter().copied())
                .chain(self.controls[i].iter().copied())
                .map(|v| v.to_string())
                .collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Integrates `xdot = rho(x) f(x, u(t))` and records `a(t) = f(x(t), u(t))`.
pub fn simulate_trajectory(
    sys: &ControlSystem,
    u: &ControlSignal,
    x0: &[f64],
    interval: &Interval,
) -> Result<Trajectory> {
    sys.alg.check_point(x0)?;
    u.check_values(sys)?;
    let grid = u.grid_for(interval)?;
    let rhs = rhs_fn(sys.alg.base_dim(), |k, t, x: &[f64], dx: &mut [f64]| {
        dx.copy_from_slice(&sys.base_velocity(x, &u.value_in_segment(&grid, k, t)));
    });
    let base = integrate(&rhs, &grid, x0)?;
    let controls = u.node_values(&grid);
    let fiber = base.iter().zip(&controls).map(|(x, c)| sys.control(x, c)).collect();
    Ok(Trajectory {
        path: EPath::new(grid, base, fiber)?,
        control: u.clone(),
        controls,
    })
}

/// The system on `TR x E` with `f_ext = (L, f)` and zero cost, so that the
/// leading base coordinate accumulates the cost.
pub fn extend_system(sys: &ControlSystem) -> ControlSystem {
    let ext: ExtendedAlgebroid = sys.alg.product_with_time();
    let (f1, f2) = (sys.clone(), sys.clone());
    let n = sys.alg.base_dim();
    let m = sys.alg.fiber_dim();
    ControlSystem {
        alg: ext.chart().clone(),
        space: sys.space.clone(),
        f: Arc::new(move |x: &[f64], u: &[f64]| {
            let x = ExtendedAlgebroid::project(x);
            ExtendedAlgebroid::embed_fiber(f1.cost(x, u), &f1.control(x, u))
        }),
        cost: Arc::new(|_: &[f64], _: &[f64]| 0.0),
        df_dx: Some(Arc::new(move |x: &[f64], u: &[f64]| {
            let x = ExtendedAlgebroid::project(x);
            let mut j = DMatrix::zeros(m + 1, n + 1);
            for (a, g) in f2.cost_gradient(x, u).into_iter().enumerate() {
                j[(0, a + 1)] = g;
            }
            j.view_mut((1, 1), (m, n)).copy_from(&f2.control_jacobian(x, u));
            j
        })),
        dl_dx: Some(Arc::new(move |_: &[f64], _: &[f64]| vec![0.0; n + 1])),
        maximizer: sys.maximizer.clone().map(|mx| -> Maximizer {
            Arc::new(move |x: &[f64], z: &[f64], _z0: f64| {
                // The leading costate entry multiplies the cost.
                mx(ExtendedAlgebroid::project(x), ExtendedAlgebroid::project(z), z[0])
            })
        }),
    }
}

/// Fiber or costate values along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberCurve {
    pub grid: TimeGrid,
    pub base: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
}

fn joint_flow(
    sys: &ControlSystem,
    u: &ControlSignal,
    interval: &Interval,
    x0: &[f64],
    v0: &[f64],
    field: impl Fn(&[f64], &[f64], &[f64]) -> Vec<f64> + Sync,
) -> Result<FiberCurve> {
    sys.alg.check_point(x0)?;
    let (n, m) = (sys.alg.base_dim(), sys.alg.fiber_dim());
    if v0.len() != m {
        return Err(Error::dims("transported vector", m, v0.len()));
    }
    let grid = u.grid_for(interval)?;
    let rhs = rhs_fn(n + m, |k, t, w: &[f64], dw: &mut [f64]| {
        let uk = u.value_in_segment(&grid, k, t);
        let (x, v) = w.split_at(n);
        dw[..n].copy_from_slice(&sys.base_velocity(x, &uk));
        dw[n..].copy_from_slice(&field(x, &uk, v));
    });
    let w0: Vec<f64> = x0.iter().chain(v0).copied().collect();
    let ws = integrate(&rhs, &grid, &w0)?;
    let (base, values) = ws.into_iter().map(|w| (w[..n].to_vec(), w[n..].to_vec())).unzip();
    Ok(FiberCurve { grid, base, values })
}

/// Transport `B_{t t0} y0` along the trajectory of `u` from `x0`.
pub fn transport_b(
    sys: &ControlSystem,
    u: &ControlSignal,
    interval: &Interval,
    x0: &[f64],
    y0: &[f64],
) -> Result<FiberCurve> {
    joint_flow(sys, u, interval, x0, y0, |x, uk, y| sys.fiber_velocity(x, uk, y))
}

/// Dual transport of `(z, z0)`; `z0` is carried unchanged.
pub fn transport_bbar(
    sys: &ControlSystem,
    u: &ControlSignal,
    interval: &Interval,
    x0: &[f64],
    z: &[f64],
    z0: f64,
) -> Result<CostatePath> {
    let c = joint_flow(sys, u, interval, x0, z, |x, uk, zz| sys.costate_velocity(x, uk, zz, z0))?;
    CostatePath::new(c.grid, c.values, z0)
}

/// `max_t |<B y0, Bbar xi0> - <y0, xi0>|` with the dual transport at `z0 = 0`.
pub fn pairing_drift(
    sys: &ControlSystem,
    u: &ControlSignal,
    interval: &Interval,
    x0: &[f64],
    y0: &[f64],
    xi0: &[f64],
) -> Result<f64> {
    let y = transport_b(sys, u, interval, x0, y0)?;
    let z = transport_bbar(sys, u, interval, x0, xi0, 0.0)?;
    let p0 = dot(y0, xi0);
    Ok(y.values
        .iter()
        .zip(z.z())
        .map(|(a, b)| (dot(a, b) - p0).abs())
        .fold(0.0, f64::max))
}

/// Linear maps `B_{t t0}` and `Bbar_{t t0}` at every node, built column by
/// column from transported basis vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportFrame {
    pub grid: TimeGrid,
    pub forward: Vec<DMatrix<f64>>,
    pub dual: Vec<DMatrix<f64>>,
}

pub fn transport_frame(
    sys: &ControlSystem,
    u: &ControlSignal,
    interval: &Interval,
    x0: &[f64],
) -> Result<TransportFrame> {
    let m = sys.alg.fiber_dim();
    let columns: Result<Vec<(FiberCurve, CostatePath)>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            Ok((
                transport_b(sys, u, interval, x0, &e)?,
                transport_bbar(sys, u, interval, x0, &e, 0.0)?,
            ))
        })
        .collect();
    let columns = columns?;
    let grid = columns[0].0.grid.clone();
    let assemble = |col: &dyn Fn(usize, usize) -> f64| DMatrix::from_fn(m, m, |r, c| col(c, r));
    let forward = (0..grid.len())
        .map(|i| assemble(&|c, r| columns[c].0.values[i][r]))
        .collect();
    let dual = (0..grid.len())
        .map(|i| assemble(&|c, r| columns[c].1.z()[i][r]))
        .collect();
    Ok(TransportFrame { grid, forward, dual })
}

impl TransportFrame {
    /// One row per node and operator: `t, op, m_11, m_12, ..., m_mm` (row-major).
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let m = self.forward[0].nrows();
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["t".to_string(), "op".to_string()];
        for r in 1..=m {
            header.extend((1..=m).map(|c| format!("m_{r}_{c}")));
        }
        w.write_record(&header)?;
        for (i, &t) in self.grid.nodes().iter().enumerate() {
            for (op, mat) in [("B", &self.forward[i]), ("Bbar", &self.dual[i])] {
                let mut row = vec![t.to_string(), op.to_string()];
                for r in 0..m {
                    row.extend((0..m).map(|c| mat[(r, c)].to_string()));
                }
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Sampled costate `z(t)` with constant multiplier `z0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CostatePath {
    grid: TimeGrid,
    z: Vec<Vec<f64>>,
    z0: f64,
}

impl CostatePath {
    pub fn new(grid: TimeGrid, z: Vec<Vec<f64>>, z0: f64) -> Result<Self> {
        if z.len() != grid.len() {
            return Err(Error::dims("costate samples", grid.len(), z.len()));
        }
        if !z0.is_finite() {
            return Err(Error::InvalidArgument("costate multiplier must be finite".into()));
        }
        Ok(CostatePath { grid, z, z0 })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn z(&self) -> &[Vec<f64>] {
        &self.z
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    /// Costate at `t`, interpolated within its segment.
    pub fn z_at(&self, t: f64) -> Vec<f64> {
        let k = self.grid.segment_at(t).min(self.grid.segments().len() - 1);
        interpolate_on_segment(&self.grid, &self.z, k, t)
    }

    /// `(z, z0)` multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> CostatePath {
        CostatePath {
            grid: self.grid.clone(),
            z: self.z.iter().map(|v| v.iter().map(|c| lambda * c).collect()).collect(),
            z0: lambda * self.z0,
        }
    }

    /// Columns `t, z_1..z_m, z0, H`.
    pub fn write_csv(&self, path: impl AsRef<Path>, hamiltonian: &[f64]) -> Result<()> {
        if hamiltonian.len() != self.grid.len() {
            return Err(Error::dims("hamiltonian samples", self.grid.len(), hamiltonian.len()));
        }
        let m = self.z[0].len();
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["t".to_string()];
        header.extend((1..=m).map(|i| format!("z_{i}")));
        header.push("z0".into());
        header.push("H".into());
        w.write_record(&header)?;
        for (i, &t) in self.grid.nodes().iter().enumerate() {
            let row: Vec<String> = std::iter::once(t)
                .chain(self.z[i].iter().copied())
                .chain([self.z0, hamiltonian[i]])
                .map(|v| v.to_string())
                .collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
