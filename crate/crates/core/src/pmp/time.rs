use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{hamiltonian, verify_extremal, Check, Extremal, ExtremalAudit, TimeMode};
use crate::algebroid::{tangent_bundle, ChartAlgebroid};
use crate::control::{ControlSpace, ControlSystem};
use crate::error::{Error, Result};
use crate::numerics::{differentiate_on_grid, dot, fd_jacobian};

type TimeControlMap = Arc<dyn Fn(&[f64], f64, &[f64]) -> Vec<f64> + Send + Sync>;
type TimeCostMap = Arc<dyn Fn(&[f64], f64, &[f64]) -> f64 + Send + Sync>;
type TimeMaximizer = Arc<dyn Fn(&[f64], f64, &[f64], f64) -> Vec<f64> + Send + Sync>;

/// A control system whose control map and cost depend explicitly on time:
/// `f(x, t, u)`, `L(x, t, u)`.
#[derive(Clone)]
pub struct TimeDependentSystem {
    alg: ChartAlgebroid,
    space: ControlSpace,
    f: TimeControlMap,
    cost: TimeCostMap,
    df_dt: Option<TimeControlMap>,
    dl_dt: Option<TimeCostMap>,
    maximizer: Option<TimeMaximizer>,
}

impl fmt::Debug for TimeDependentSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeDependentSystem")
            .field("alg", &self.alg)
            .field("space", &self.space)
            .field("analytic_df_dt", &self.df_dt.is_some())
            .field("analytic_dl_dt", &self.dl_dt.is_some())
            .field("maximizer", &self.maximizer.is_some())
            .finish()
    }
}

impl TimeDependentSystem {
    pub fn new(
        alg: ChartAlgebroid,
        space: ControlSpace,
        f: impl Fn(&[f64], f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        cost: impl Fn(&[f64], f64, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TimeDependentSystem {
            alg,
            space,
            f: Arc::new(f),
            cost: Arc::new(cost),
            df_dt: None,
            dl_dt: None,
            maximizer: None,
        }
    }

    /// Time-independent data viewed as a time-dependent system.
    pub fn from_autonomous(sys: &ControlSystem) -> Self {
        let (a, b) = (sys.clone(), sys.clone());
        let mut out = TimeDependentSystem::new(
            sys.alg().clone(),
            sys.space().clone(),
            move |x, _, u| a.control(x, u),
            move |x, _, u| b.cost(x, u),
        )
        .with_time_derivatives(|_, _, _| Vec::new(), |_, _, _| 0.0);
        let m = sys.alg().fiber_dim();
        out.df_dt = Some(Arc::new(move |_, _, _| vec![0.0; m]));
        if let Some(mx) = sys.maximizer().cloned() {
            out.maximizer = Some(Arc::new(move |x, _, z, z0| mx(x, z, z0)));
        }
        out
    }

    pub fn with_time_derivatives(
        mut self,
        df_dt: impl Fn(&[f64], f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        dl_dt: impl Fn(&[f64], f64, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.df_dt = Some(Arc::new(df_dt));
        self.dl_dt = Some(Arc::new(dl_dt));
        self
    }

    /// `u = mx(x, t, z, z0)` maximizing `<f(x, t, u), z> + z0 L(x, t, u)`.
    pub fn with_maximizer(mut self, mx: impl Fn(&[f64], f64, &[f64], f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.maximizer = Some(Arc::new(mx));
        self
    }

    pub fn alg(&self) -> &ChartAlgebroid {
        &self.alg
    }

    pub fn control(&self, x: &[f64], t: f64, u: &[f64]) -> Vec<f64> {
        (self.f)(x, t, u)
    }

    pub fn cost(&self, x: &[f64], t: f64, u: &[f64]) -> f64 {
        (self.cost)(x, t, u)
    }

    pub fn control_time_derivative(&self, x: &[f64], t: f64, u: &[f64]) -> Vec<f64> {
        match &self.df_dt {
            Some(d) => d(x, t, u),
            None => fd_jacobian(|s| self.control(x, s[0], u), &[t], self.alg.fd_step())
                .column(0)
                .iter()
                .copied()
                .collect(),
        }
    }

    pub fn cost_time_derivative(&self, x: &[f64], t: f64, u: &[f64]) -> f64 {
        match &self.dl_dt {
            Some(d) => d(x, t, u),
            None => fd_jacobian(|s| vec![self.cost(x, s[0], u)], &[t], self.alg.fd_step())[(0, 0)],
        }
    }

    /// `(x, t0)`, the initial point of the autonomized system.
    pub fn initial_point(&self, x0: &[f64], t0: f64) -> Vec<f64> {
        let mut p = x0.to_vec();
        p.push(t0);
        p
    }
}

/// The time-independent system on `E x TR` with `f~ = (f, 1)` and the clock as
/// the last base and fiber coordinate. Its costate carries the clock
/// covector `xi` last, and `H~ = H + xi`.
pub fn autonomize(sys: &TimeDependentSystem) -> Result<ControlSystem> {
    let alg = sys.alg.product(&tangent_bundle(1));
    let n = sys.alg.base_dim();
    let (f, l) = (sys.clone(), sys.clone());
    let split = move |x: &[f64]| -> (Vec<f64>, f64) { (x[..n].to_vec(), x[n]) };
    let mut out = ControlSystem::new(
        alg,
        sys.space.clone(),
        move |x, u| {
            let (x, t) = split(x);
            let mut v = f.control(&x, t, u);
            v.push(1.0);
            v
        },
        move |x, u| {
            let (x, t) = split(x);
            l.cost(&x, t, u)
        },
    )?;
    if sys.df_dt.is_some() {
        let s = sys.clone();
        let h = sys.alg.fd_step();
        out = out.with_control_jacobian(move |x, u| {
            let (xs, t) = split(x);
            let m = s.alg.fiber_dim();
            let mut j = nalgebra::DMatrix::zeros(m + 1, n + 1);
            if n > 0 {
                j.view_mut((0, 0), (m, n))
                    .copy_from(&fd_jacobian(|p| s.control(p, t, u), &xs, h));
            }
            for (i, d) in s.control_time_derivative(&xs, t, u).into_iter().enumerate() {
                j[(i, n)] = d;
            }
            j
        });
    }
    if let Some(mx) = sys.maximizer.clone() {
        let m = sys.alg.fiber_dim();
        out = out.with_maximizer(move |x, z, z0| mx(&x[..n], x[n], &z[..m], z0));
    }
    Ok(out)
}

/// Checks of the time-dependent principle along an extremal of the
/// autonomized system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeDependentAudit {
    /// `max |clock(t_i) - t_i|`.
    pub clock_error: f64,
    /// `max |dH/dt - (z . df/dt + z0 dL/dt)|` off the control discontinuities,
    /// with `dH/dt` differentiated from the samples.
    pub dhdt_error: f64,
    /// `max |xi(t) - xi(t0)|` for the clock covector.
    pub clock_costate_drift: f64,
    /// `max |H(t) - H(t0)|` of the original Hamiltonian.
    pub h_drift: f64,
    /// Sampled original Hamiltonian `H(z(t), u(t), t)`.
    pub hamiltonian: Vec<f64>,
    pub extremal: ExtremalAudit,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Audits `ext`, an extremal of [`autonomize`]`(sys)`. The autonomized
/// extremal is verified in `mode` and the original Hamiltonian must satisfy
/// `dH/dt = z . df/dt + z0 dL/dt`.
pub fn time_dependent_audit(
    sys: &TimeDependentSystem,
    ext: &Extremal,
    mode: TimeMode,
    tol: f64,
) -> Result<TimeDependentAudit> {
    let (n, m) = (sys.alg.base_dim(), sys.alg.fiber_dim());
    let auto = autonomize(sys)?;
    let traj = &ext.trajectory;
    if traj.path.base_dim() != n + 1 || ext.costate.z().first().map_or(0, Vec::len) != m + 1 {
        return Err(Error::dims("autonomized extremal", n + 1, traj.path.base_dim()));
    }
    let grid = traj.grid();
    let z0 = ext.costate.z0();
    let mut clock_error: f64 = 0.0;
    let mut hs = Vec::with_capacity(grid.len());
    let mut predicted = Vec::with_capacity(grid.len());
    for (i, &t) in grid.nodes().iter().enumerate() {
        let xt = &traj.path.base()[i];
        let (x, clock) = (&xt[..n], xt[n]);
        clock_error = clock_error.max((clock - t).abs());
        let (z, u) = (&ext.costate.z()[i][..m], &traj.controls[i]);
        hs.push(dot(&sys.control(x, clock, u), z) + z0 * sys.cost(x, clock, u));
        predicted.push(dot(&sys.control_time_derivative(x, clock, u), z) + z0 * sys.cost_time_derivative(x, clock, u));
    }
    let dh = differentiate_on_grid(grid, &hs.iter().map(|h| vec![*h]).collect::<Vec<_>>());
    let dhdt_error = (0..grid.len())
        .filter(|&i| !grid.is_breakpoint_node(i))
        .map(|i| (dh[i][0] - predicted[i]).abs())
        .fold(0.0, f64::max);
    let xi0 = ext.costate.z()[0][m];
    let clock_costate_drift = ext.costate.z().iter().map(|z| (z[m] - xi0).abs()).fold(0.0, f64::max);
    let h_drift = hs.iter().map(|h| (h - hs[0]).abs()).fold(0.0, f64::max);
    debug_assert!({
        let i = grid.len() - 1;
        let h_ext = hamiltonian(&auto, &ext.costate.z()[i], z0, &traj.path.base()[i], &traj.controls[i]);
        (h_ext - hs[i] - ext.costate.z()[i][m]).abs() < 1e-9 * (1.0 + h_ext.abs())
    });

    let extremal = verify_extremal(&auto, traj, &ext.costate, mode, tol)?;
    let checks = vec![
        Check::at_most("clock_exact", clock_error, 0.0),
        Check::at_most("hamiltonian_time_derivative", dhdt_error, tol),
    ];
    let pass = extremal.pass && checks.iter().all(|c| c.pass);
    Ok(TimeDependentAudit {
        clock_error,
        dhdt_error,
        clock_costate_drift,
        h_drift,
        hamiltonian: hs,
        extremal,
        checks,
        pass,
    })
}
