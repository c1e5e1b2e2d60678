//! The generalized maximum principle: Hamiltonian, its maximization, the
//! extremal flow and an audit of candidate extremals.

mod develop;
mod needle;
mod time;

use serde::{Deserialize, Serialize};

use crate::control::{
    simulate_trajectory, transport_bbar, ControlSignal, ControlSpace, ControlSystem, CostatePath, Interval, Trajectory,
};
use crate::error::{Error, Result};
use crate::numerics::{differentiate_on_grid, dot, integrate, norm, rk4_step, OdeRhs, TimeGrid};
use crate::paths::EPath;

pub use develop::{develop_to_group, shoot_endpoint, Representation, ShootHorizon, ShootOptions, ShootResult};
pub use needle::{cone_support_check, needle_vector, ConeReport, VariationSymbol};
pub use time::{autonomize, time_dependent_audit, TimeDependentAudit, TimeDependentSystem};

/// Upper bound on control switches before the flow is declared chattering.
pub const MAX_SWITCHES: usize = 10_000;
/// Resolution of switching-time bisection.
pub const SWITCH_TOL: f64 = 1e-9;
/// Grid resolution per coordinate for box maximization without a closed form.
pub const BOX_GRID: usize = 33;

/// `<f(x, u), z> + z0 L(x, u)`.
pub fn hamiltonian(sys: &ControlSystem, z: &[f64], z0: f64, x: &[f64], u: &[f64]) -> f64 {
    let h = dot(&sys.control(x, u), z);
    if z0 == 0.0 {
        h
    } else {
        h + z0 * sys.cost(x, u)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianMax {
    pub u: Vec<f64>,
    pub value: f64,
    /// More than one control attains the maximum (finite sets only).
    pub tie: bool,
}

fn tie_tol(h: f64) -> f64 {
    1e-12 * (1.0 + h.abs())
}

/// `sup_v H(z, v)` over the control space. Finite sets are searched
/// exhaustively with ties resolved to the lowest index.
pub fn maximize_hamiltonian(sys: &ControlSystem, z: &[f64], z0: f64, x: &[f64]) -> Result<HamiltonianMax> {
    match sys.space() {
        ControlSpace::FiniteSet(values) => {
            let hs: Vec<f64> = values.iter().map(|v| hamiltonian(sys, z, z0, x, v)).collect();
            let mut best = 0;
            for (i, &h) in hs.iter().enumerate() {
                if h > hs[best] {
                    best = i;
                }
            }
            let top = hs[best];
            let tie = hs.iter().filter(|&&h| h >= top - tie_tol(top)).count() > 1;
            Ok(HamiltonianMax {
                u: values[best].clone(),
                value: top,
                tie,
            })
        }
        ControlSpace::Box { lower, upper } => {
            if let Some(mx) = sys.maximizer() {
                let u: Vec<f64> = mx(x, z, z0)
                    .into_iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(v, (l, h))| v.clamp(*l, *h))
                    .collect();
                let value = hamiltonian(sys, z, z0, x, &u);
                return Ok(HamiltonianMax { u, value, tie: false });
            }
            let p = lower.len();
            if p > 3 {
                return Err(Error::UnsupportedDimension { dim: p });
            }
            let (u, value) = box_search(|u| hamiltonian(sys, z, z0, x, u), lower, upper);
            Ok(HamiltonianMax { u, value, tie: false })
        }
    }
}

/// Coarse grid followed by golden-section sweeps per coordinate.
fn box_search(h: impl Fn(&[f64]) -> f64, lower: &[f64], upper: &[f64]) -> (Vec<f64>, f64) {
    let p = lower.len();
    let cell: Vec<f64> = (0..p).map(|c| (upper[c] - lower[c]) / (BOX_GRID - 1) as f64).collect();
    let mut best = lower.to_vec();
    let mut best_h = f64::NEG_INFINITY;
    let mut idx = vec![0usize; p];
    loop {
        let u: Vec<f64> = (0..p).map(|c| lower[c] + cell[c] * idx[c] as f64).collect();
        let v = h(&u);
        if v > best_h {
            best_h = v;
            best = u;
        }
        let mut c = 0;
        while c < p {
            idx[c] += 1;
            if idx[c] < BOX_GRID {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
        if c == p {
            break;
        }
    }
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    for _ in 0..3 {
        for c in 0..p {
            let mut a = (best[c] - cell[c]).max(lower[c]);
            let mut b = (best[c] + cell[c]).min(upper[c]);
            let mut u = best.clone();
            let mut eval = |t: f64| {
                u[c] = t;
                h(&u)
            };
            let mut x1 = b - INV_PHI * (b - a);
            let mut x2 = a + INV_PHI * (b - a);
            let (mut f1, mut f2) = (eval(x1), eval(x2));
            while b - a > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                if f1 < f2 {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + INV_PHI * (b - a);
                    f2 = eval(x2);
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - INV_PHI * (b - a);
                    f1 = eval(x1);
                }
            }
            let t = 0.5 * (a + b);
            let v = eval(t);
            if v > best_h {
                best_h = v;
                best[c] = t;
            }
        }
    }
    (best, best_h)
}

/// An extremal candidate produced by [`integrate_pmp_flow`].
#[derive(Clone, Debug)]
pub struct Extremal {
    pub trajectory: Trajectory,
    pub costate: CostatePath,
    /// Control switching times (finite control sets).
    pub switches: Vec<f64>,
    /// Nodes where the maximizing control is not unique.
    pub tie_nodes: Vec<usize>,
    /// `H(z(t), u(t))` at every node.
    pub hamiltonian: Vec<f64>,
}

struct JointRhs<'a> {
    sys: &'a ControlSystem,
    z0: f64,
    n: usize,
    m: usize,
    u: Option<&'a [f64]>,
}

impl OdeRhs for JointRhs<'_> {
    fn dim(&self) -> usize {
        self.n + self.m
    }

    fn eval(&self, _segment: usize, _t: f64, w: &[f64], dw: &mut [f64]) {
        let (x, z) = w.split_at(self.n);
        let owned;
        let u = match self.u {
            Some(u) => u,
            None => {
                // Closed loop: the maximizer is re-evaluated at every stage.
                owned = maximize_hamiltonian(self.sys, z, self.z0, x)
                    .map(|m| m.u)
                    .unwrap_or_else(|_| vec![f64::NAN; self.sys.control_dim()]);
                &owned
            }
        };
        dw[..self.n].copy_from_slice(&self.sys.base_velocity(x, u));
        dw[self.n..].copy_from_slice(&self.sys.costate_velocity(x, u, z, self.z0));
    }
}

/// Integrates the extremal flow from `(x0, z_init)` with the control chosen by
/// maximizing the Hamiltonian.
///
/// Finite control sets run in two phases: closed-loop stepping detects the
/// switches (bisected to [`SWITCH_TOL`] when `|U| = 2`, located at the next
/// node otherwise), then the resulting piecewise-constant control is
/// re-integrated on a grid whose breakpoints are the switches. Box control
/// spaces are integrated closed loop and carry a sampled control.
pub fn integrate_pmp_flow(
    sys: &ControlSystem,
    x0: &[f64],
    z_init: &[f64],
    z0: f64,
    interval: &Interval,
) -> Result<Extremal> {
    let (n, m) = (sys.alg().base_dim(), sys.alg().fiber_dim());
    sys.alg().check_point(x0)?;
    if z_init.len() != m {
        return Err(Error::dims("initial costate", m, z_init.len()));
    }
    if x0.iter().chain(z_init).any(|v| !v.is_finite()) || !z0.is_finite() {
        return Err(Error::InvalidArgument("initial data must be finite".into()));
    }
    let uniform = TimeGrid::new(interval.t0, interval.t1, interval.step)?;
    let w0: Vec<f64> = x0.iter().chain(z_init).copied().collect();

    let (trajectory, costate, switches) = match sys.space() {
        ControlSpace::FiniteSet(values) => {
            let (switches, controls) = locate_switches(sys, &uniform, &w0, z0, values.len() == 2)?;
            let signal = ControlSignal::piecewise_constant(switches.clone(), controls)?;
            let trajectory = simulate_trajectory(sys, &signal, x0, interval)?;
            let costate = transport_bbar(sys, &signal, interval, x0, z_init, z0)?;
            (trajectory, costate, switches)
        }
        ControlSpace::Box { .. } => {
            let rhs = JointRhs { sys, z0, n, m, u: None };
            let ws = integrate(&rhs, &uniform, &w0)?;
            let (base, z): (Vec<Vec<f64>>, Vec<Vec<f64>>) =
                ws.iter().map(|w| (w[..n].to_vec(), w[n..].to_vec())).unzip();
            let controls = base
                .iter()
                .zip(&z)
                .map(|(x, zz)| maximize_hamiltonian(sys, zz, z0, x).map(|mx| mx.u))
                .collect::<Result<Vec<_>>>()?;
            let fiber = base.iter().zip(&controls).map(|(x, u)| sys.control(x, u)).collect();
            let signal = ControlSignal::sampled(uniform.clone(), controls.clone())?;
            let trajectory = Trajectory {
                path: EPath::new(uniform.clone(), base, fiber)?,
                control: signal,
                controls,
            };
            (trajectory, CostatePath::new(uniform, z, z0)?, Vec::new())
        }
    };

    let grid = trajectory.grid();
    let mut tie_nodes = Vec::new();
    let mut hamiltonian_values = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let (x, z, u) = (&trajectory.path.base()[i], &costate.z()[i], &trajectory.controls[i]);
        hamiltonian_values.push(hamiltonian(sys, z, z0, x, u));
        if matches!(sys.space(), ControlSpace::FiniteSet(_)) && maximize_hamiltonian(sys, z, z0, x)?.tie {
            tie_nodes.push(i);
        }
    }
    Ok(Extremal {
        trajectory,
        costate,
        switches,
        tie_nodes,
        hamiltonian: hamiltonian_values,
    })
}

fn locate_switches(
    sys: &ControlSystem,
    grid: &TimeGrid,
    w0: &[f64],
    z0: f64,
    bisect: bool,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let (n, m) = (sys.alg().base_dim(), sys.alg().fiber_dim());
    let h_at = |w: &[f64], u: &[f64]| hamiltonian(sys, &w[n..], z0, &w[..n], u);
    let argmax = |w: &[f64]| maximize_hamiltonian(sys, &w[n..], z0, &w[..n]).map(|mx| mx.u);

    let nodes = grid.nodes();
    let (t0, t1) = (grid.t0(), grid.t1());
    let mut w = w0.to_vec();
    let mut current = argmax(&w)?;
    let mut switches = Vec::new();
    let mut controls = vec![current.clone()];
    for i in 0..nodes.len() - 1 {
        let (t, t_next) = (nodes[i], nodes[i + 1]);
        let step_with = |u: &[f64], from: &[f64], s: f64, h: f64| {
            rk4_step(
                &JointRhs {
                    sys,
                    z0,
                    n,
                    m,
                    u: Some(u),
                },
                0,
                s,
                h,
                from,
            )
        };
        let mut next = step_with(&current, &w, t, t_next - t);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationDiverged { t: t_next });
        }
        let candidate = argmax(&next)?;
        // Switch only on a strict improvement so that ties keep the current control.
        if candidate != current && h_at(&next, &candidate) > h_at(&next, &current) + tie_tol(h_at(&next, &current)) {
            let tau = if bisect {
                let gain = |s: f64| {
                    let ws = step_with(&current, &w, t, s - t);
                    h_at(&ws, &candidate) - h_at(&ws, &current)
                };
                let (mut lo, mut hi) = (t, t_next);
                while hi - lo > SWITCH_TOL {
                    let mid = 0.5 * (lo + hi);
                    if gain(mid) > 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                let tau = 0.5 * (lo + hi);
                let at_tau = step_with(&current, &w, t, tau - t);
                next = step_with(&candidate, &at_tau, tau, t_next - tau);
                tau
            } else {
                t_next
            };
            if tau > t0 + SWITCH_TOL && tau < t1 - SWITCH_TOL {
                switches.push(tau);
                controls.push(candidate.clone());
            } else if tau <= t0 + SWITCH_TOL {
                controls[0] = candidate.clone();
            }
            if switches.len() > MAX_SWITCHES {
                return Err(Error::Chattering { limit: MAX_SWITCHES });
            }
            current = candidate;
        }
        w = next;
    }
    Ok((switches, controls))
}

/// Whether the final time is free (then `H = 0`) or fixed (then `H` is constant).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeMode {
    FreeTime,
    FixedTime,
}

/// One named check with its measured value and verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }

    /// Passes when `value > threshold`.
    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance: threshold,
            pass: value > threshold,
        }
    }
}

/// Audit of a candidate extremal against the conditions of the maximum principle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalAudit {
    pub mode: TimeMode,
    pub tolerance: f64,
    pub z0: f64,
    pub max_condition_violation: f64,
    pub costate_residual: f64,
    pub hamiltonian_values: Vec<f64>,
    pub h_drift: f64,
    pub covector_min_norm: f64,
    pub tie_nodes: usize,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub pass: bool,
}

/// Checks, at every node off the control discontinuities:
/// the maximum condition, the costate flow, `H = 0` (free time) or
/// `H = const` (fixed time), and the sign and non-triviality of the multipliers.
pub fn verify_extremal(
    sys: &ControlSystem,
    traj: &Trajectory,
    costate: &CostatePath,
    mode: TimeMode,
    tol: f64,
) -> Result<ExtremalAudit> {
    let grid = traj.grid();
    if grid.nodes() != costate.grid().nodes() {
        return Err(Error::GridMismatch(
            "trajectory and costate are sampled on different grids".into(),
        ));
    }
    let z0 = costate.z0();
    let zdot = differentiate_on_grid(grid, costate.z());
    let mut max_violation: f64 = 0.0;
    let mut costate_residual: f64 = 0.0;
    let mut ties = 0;
    let mut hs = Vec::with_capacity(grid.len());
    let mut interior_h = Vec::new();
    for i in 0..grid.len() {
        let (x, z, u) = (&traj.path.base()[i], &costate.z()[i], &traj.controls[i]);
        let h = hamiltonian(sys, z, z0, x, u);
        hs.push(h);
        if grid.is_breakpoint_node(i) {
            continue;
        }
        interior_h.push(h);
        let best = maximize_hamiltonian(sys, z, z0, x)?;
        max_violation = max_violation.max(best.value - h);
        ties += usize::from(best.tie);
        let field = sys.costate_velocity(x, u, z, z0);
        let r = field
            .iter()
            .zip(&zdot[i])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        costate_residual = costate_residual.max(r);
    }
    let h_drift = match mode {
        TimeMode::FreeTime => interior_h.iter().map(|h| h.abs()).fold(0.0, f64::max),
        TimeMode::FixedTime => {
            let mean = interior_h.iter().sum::<f64>() / interior_h.len().max(1) as f64;
            interior_h.iter().map(|h| (h - mean).abs()).fold(0.0, f64::max)
        }
    };
    let covector_min_norm = costate.z().iter().map(|z| norm(z)).fold(f64::INFINITY, f64::min);

    let mut checks = vec![
        Check::at_most("maximum_condition", max_violation, tol),
        Check::at_most("costate_flow", costate_residual, tol),
        Check::at_most(
            match mode {
                TimeMode::FreeTime => "hamiltonian_vanishes",
                TimeMode::FixedTime => "hamiltonian_constant",
            },
            h_drift,
            tol,
        ),
        Check::at_most("multiplier_sign", z0.max(0.0), 0.0),
    ];
    let mut notes = Vec::new();
    if z0 == 0.0 {
        checks.push(Check::above("covector_nonvanishing", covector_min_norm, tol));
        notes.push(
            "abnormal multiplier z0 = 0 accepted; the extended-algebroid form of the principle asks for z0 < 0".into(),
        );
    }
    if ties > 0 {
        notes.push(format!(
            "{ties} nodes with a non-unique maximizer (singular or switching points)"
        ));
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(ExtremalAudit {
        mode,
        tolerance: tol,
        z0,
        max_condition_violation: max_violation,
        costate_residual,
        hamiltonian_values: hs,
        h_drift,
        covector_min_norm,
        tie_nodes: ties,
        checks,
        notes,
        pass,
    })
}

impl ExtremalAudit {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::{so3, tangent_bundle};
    use crate::numerics::max_abs_diff;

    pub(crate) fn so3_bang_bang(a: [f64; 3], b: [f64; 3]) -> ControlSystem {
        ControlSystem::new(
            so3(),
            ControlSpace::finite(vec![vec![-1.0], vec![1.0]]).unwrap(),
            move |_, u| (0..3).map(|i| a[i] + u[0] * b[i]).collect(),
            |_, _| 1.0,
        )
        .unwrap()
    }

    fn lq() -> ControlSystem {
        ControlSystem::new(
            tangent_bundle(1),
            ControlSpace::interval(vec![-10.0], vec![10.0]).unwrap(),
            |_, u| vec![u[0]],
            |_, u| 0.5 * u[0] * u[0],
        )
        .unwrap()
    }

    #[test]
    fn hamiltonian_examples() {
        let sys = so3_bang_bang([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert_eq!(hamiltonian(&sys, &[0.0; 3], 0.0, &[], &[1.0]), 0.0);
        assert_eq!(hamiltonian(&sys, &[0.0, 0.0, 1.0], -1.0, &[], &[1.0]), -1.0);
    }

    #[test]
    fn finite_maximization_and_ties() {
        let sys = so3_bang_bang([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let mx = maximize_hamiltonian(&sys, &[0.0, 0.7, 0.0], -1.0, &[]).unwrap();
        assert_eq!((mx.u.clone(), mx.tie), (vec![1.0], false));
        let mx = maximize_hamiltonian(&sys, &[0.3, 0.0, 1.0], -1.0, &[]).unwrap();
        assert_eq!((mx.u, mx.tie), (vec![-1.0], true));
    }

    #[test]
    fn box_search_matches_closed_form() {
        let sys = lq();
        for z in [-3.0, -0.25, 0.0, 1.7, 25.0] {
            let mx = maximize_hamiltonian(&sys, &[z], -1.0, &[0.0]).unwrap();
            assert!((mx.u[0] - z.clamp(-10.0, 10.0)).abs() < 1e-6, "{z}: {:?}", mx.u);
        }
        let wide = ControlSystem::new(
            tangent_bundle(1),
            ControlSpace::interval(vec![-1.0; 4], vec![1.0; 4]).unwrap(),
            |_, u| vec![u[0]],
            |_, _| 0.0,
        )
        .unwrap();
        assert!(matches!(
            maximize_hamiltonian(&wide, &[1.0], -1.0, &[0.0]),
            Err(Error::UnsupportedDimension { dim: 4 })
        ));
    }

    #[test]
    fn so3_extremal_keeps_casimir_and_passes_audit() {
        let sys = so3_bang_bang([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let z_init = [0.0, 1.0, 0.2];
        let ext = integrate_pmp_flow(&sys, &[], &z_init, -1.0, &Interval::new(0.0, 10.0)).unwrap();
        assert!(!ext.switches.is_empty());
        let r0 = norm(&z_init);
        let drift = ext.costate.z().iter().map(|z| (norm(z) - r0).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-8, "{drift}");
        let audit = verify_extremal(&sys, &ext.trajectory, &ext.costate, TimeMode::FreeTime, 1e-5).unwrap();
        assert!(audit.pass, "{audit:#?}");
    }

    #[test]
    fn lq_extremal_matches_closed_form() {
        let sys = lq();
        let ext = integrate_pmp_flow(&sys, &[0.5], &[1.3], -1.0, &Interval::new(0.0, 2.0)).unwrap();
        for (i, &t) in ext.trajectory.grid().nodes().iter().enumerate() {
            assert!((ext.costate.z()[i][0] - 1.3).abs() < 1e-12);
            assert!((ext.trajectory.path.base()[i][0] - (0.5 + 1.3 * t)).abs() < 1e-6);
            assert!((ext.trajectory.controls[i][0] - 1.3).abs() < 1e-6);
        }
        let audit = verify_extremal(&sys, &ext.trajectory, &ext.costate, TimeMode::FixedTime, 1e-6).unwrap();
        assert!(audit.pass, "{audit:#?}");
    }

    #[test]
    fn vanishing_covector_is_flagged() {
        let sys = so3_bang_bang([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let ext = integrate_pmp_flow(&sys, &[], &[0.0; 3], 0.0, &Interval::new(0.0, 1.0)).unwrap();
        let audit = verify_extremal(&sys, &ext.trajectory, &ext.costate, TimeMode::FreeTime, 1e-6).unwrap();
        assert!(!audit.pass);
        assert!(audit
            .checks
            .iter()
            .any(|c| c.name == "covector_nonvanishing" && !c.pass));
    }

    #[test]
    fn flipped_control_breaks_maximum_condition() {
        let sys = so3_bang_bang([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let iv = Interval::new(0.0, 3.0);
        let ext = integrate_pmp_flow(&sys, &[], &[0.0, 1.0, 0.2], -1.0, &iv).unwrap();
        let u0 = ext.trajectory.controls[0].clone();
        let flipped = ControlSignal::piecewise_constant(vec![0.2, 0.4], vec![u0.clone(), vec![-u0[0]], u0]).unwrap();
        let traj = simulate_trajectory(&sys, &flipped, &[], &iv).unwrap();
        let costate = transport_bbar(&sys, &flipped, &iv, &[], &[0.0, 1.0, 0.2], -1.0).unwrap();
        let audit = verify_extremal(&sys, &traj, &costate, TimeMode::FreeTime, 1e-5).unwrap();
        assert!(audit.max_condition_violation > 0.1);
        assert!(!audit.pass);
    }

    #[test]
    fn scaling_keeps_controls_and_verdicts() {
        let sys = so3_bang_bang([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let iv = Interval::new(0.0, 4.0);
        let a = integrate_pmp_flow(&sys, &[], &[0.0, 1.0, 0.2], -1.0, &iv).unwrap();
        let b = integrate_pmp_flow(&sys, &[], &[0.0, 2.0, 0.4], -2.0, &iv).unwrap();
        assert_eq!(a.trajectory.controls, b.trajectory.controls);
        assert!(max_abs_diff(&a.switches, &b.switches) < 1e-8);
        let va = verify_extremal(&sys, &a.trajectory, &a.costate, TimeMode::FreeTime, 1e-5).unwrap();
        let vb = verify_extremal(&sys, &a.trajectory, &a.costate.scaled(2.0), TimeMode::FreeTime, 1e-5).unwrap();
        assert_eq!(
            va.checks.iter().map(|c| c.pass).collect::<Vec<_>>(),
            vb.checks.iter().map(|c| c.pass).collect::<Vec<_>>()
        );
    }
}
