//! Built-in scenarios, the config-driven runner and report emission.

mod builtin;
mod config;
mod wong;

use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebroid::{lie_algebra, sample_points, so3, tangent_bundle, AxiomReport, ChartAlgebroid, StructureTensor};
use crate::control::{
    simulate_trajectory, transport_bbar, ControlSignal, ControlSpace, ControlSystem, CostatePath, Interval, Trajectory,
};
use crate::error::{Error, Result};
use crate::numerics::{differentiate_on_grid, dot, norm, TimeGrid};
use crate::paths::EPath;
use crate::pmp::{
    cone_support_check, hamiltonian, integrate_pmp_flow, needle_vector, shoot_endpoint, verify_extremal, Check,
    ConeReport, ExtremalAudit, Representation, ShootHorizon, ShootOptions, ShootResult, TimeMode, VariationSymbol,
};

pub use builtin::{builtin_config, list_scenarios, ScenarioInfo};
pub use config::{
    ChartSpec, ControlSignalSpec, ControlSpaceSpec, CostSpec, DynamicsSpec, HorizonSpec, Pipeline, RepresentationSpec,
    ScenarioConfig, ShootSpec, SolverSpec, Z0Mode, SCHEMA_VERSION,
};
pub use wong::{Polynomial, WongFixture, WongReport};

/// Box half-width used for the axiom sampling.
const AXIOM_BOX: f64 = 2.0;
/// Tolerance of the algebroid axiom checks.
const AXIOM_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub enum ScenarioKind {
    /// Affine system with no further structure.
    General,
    /// Single input, `U = {-1, 1}` on a Lie algebra: `f = a + u b`.
    BangBang {
        drift: Vec<f64>,
        input: Vec<f64>,
        so3: bool,
    },
    /// Tangent bundle `T R^n`; `integrator` marks `f = u` with a separable
    /// quadratic cost, for which the extremal is known in closed form.
    Classical {
        integrator: Option<Vec<f64>>,
    },
    Wong(WongFixture),
}

/// A validated, ready-to-run scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub system: ControlSystem,
    pub kind: ScenarioKind,
    pub x0: Vec<f64>,
    pub z_init: Vec<f64>,
    pub z0: f64,
    pub interval: Interval,
    pub mode: TimeMode,
    pub pipeline: Pipeline,
    pub control_signal: Option<ControlSignal>,
    pub shoot: Option<(Representation, DMatrix<f64>, ShootOptions)>,
    pub tol: f64,
    pub seed: u64,
    pub needle_samples: usize,
    pub axiom_samples: usize,
}

fn require<T: Clone>(v: &Option<T>, path: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::config(path, "missing"))
}

fn check_len(v: &[f64], expected: usize, path: &str) -> Result<()> {
    if v.len() != expected {
        return Err(Error::config(
            path,
            format!("expected {expected} entries, got {}", v.len()),
        ));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::config(path, "entries must be finite"));
    }
    Ok(())
}

fn structure(dim: usize, constants: &[f64], path: &str) -> Result<StructureTensor> {
    check_len(constants, dim * dim * dim, path)?;
    StructureTensor::from_row_major(dim, constants.to_vec()).map_err(|e| Error::config(path, e.to_string()))
}

impl Scenario {
    /// Validates a resolved config; errors name the offending field.
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let cfg = cfg.clone().resolve()?;
        let chart = require(&cfg.chart, "chart")?;
        let solver = &cfg.solver;
        if !(solver.step() > 0.0) {
            return Err(Error::config("solver.step", "must be positive"));
        }
        if !(solver.tol() > 0.0) {
            return Err(Error::config("solver.tol", "must be positive"));
        }
        let z0_mode = cfg.z0.unwrap_or(Z0Mode::Normal);
        let z0 = z0_mode.value();

        let (system, kind, n, m) = match &chart {
            ChartSpec::Atiyah {
                base_dim,
                algebra_dim,
                structure_constants,
                connection,
                metric,
                velocity_bound,
            } => {
                for (field, given) in [
                    ("dynamics", cfg.dynamics.is_some()),
                    ("control_space", cfg.control_space.is_some()),
                    ("cost", cfg.cost.is_some()),
                ] {
                    if given {
                        return Err(Error::config(
                            field,
                            "Atiyah charts take the Wong control system; leave this out",
                        ));
                    }
                }
                if z0_mode == Z0Mode::Abnormal {
                    return Err(Error::config("z0", "the Wong maximizer needs the normal case"));
                }
                if !(*velocity_bound > 0.0) {
                    return Err(Error::config("chart.velocity_bound", "must be positive"));
                }
                let c = structure(*algebra_dim, structure_constants, "chart.structure_constants")?;
                let w = WongFixture::new(*base_dim, c, connection.clone(), metric.clone())
                    .map_err(|e| Error::config("chart", e.to_string()))?;
                let x0 = require(&cfg.x0, "x0")?;
                check_len(&x0, *base_dim, "x0")?;
                w.check_metric(&x0)
                    .map_err(|e| Error::config("chart.metric", e.to_string()))?;
                let sys = w.control_system(*velocity_bound)?;
                (sys, ScenarioKind::Wong(w), *base_dim, base_dim + algebra_dim)
            }
            _ => {
                let alg: ChartAlgebroid = match &chart {
                    ChartSpec::So3 => so3(),
                    ChartSpec::LieAlgebra {
                        dim,
                        structure_constants,
                    } => lie_algebra(
                        format!("g{dim}"),
                        structure(*dim, structure_constants, "chart.structure_constants")?,
                    ),
                    ChartSpec::TangentBundle { dim } => tangent_bundle(*dim),
                    ChartSpec::Atiyah { .. } => unreachable!(),
                };
                let (n, m) = (alg.base_dim(), alg.fiber_dim());
                if m == 0 {
                    return Err(Error::config("chart", "fiber dimension must be positive"));
                }
                let dynamics = require(&cfg.dynamics, "dynamics")?;
                check_len(&dynamics.drift, m, "dynamics.drift")?;
                for (k, b) in dynamics.inputs.iter().enumerate() {
                    check_len(b, m, &format!("dynamics.inputs[{k}]"))?;
                }
                if let Some(l) = &dynamics.linear {
                    if n == 0 {
                        return Err(Error::config("dynamics.linear", "a chart over a point has no state"));
                    }
                    check_len(l, m * n, "dynamics.linear")?;
                }
                let p = dynamics.inputs.len();
                let space = match require(&cfg.control_space, "control_space")? {
                    ControlSpaceSpec::Finite { values } => {
                        if let Some(k) = values.iter().position(|v| v.len() != p) {
                            return Err(Error::config(
                                format!("control_space.values[{k}]"),
                                format!("expected {p} entries (one per input)"),
                            ));
                        }
                        ControlSpace::finite(values).map_err(|e| Error::config("control_space", e.to_string()))?
                    }
                    ControlSpaceSpec::Box { lower, upper } => {
                        check_len(&lower, p, "control_space.lower")?;
                        check_len(&upper, p, "control_space.upper")?;
                        ControlSpace::interval(lower, upper)
                            .map_err(|e| Error::config("control_space", e.to_string()))?
                    }
                };
                let cost = cfg.cost.clone().unwrap_or_default();
                if !cost.control_weights.is_empty() {
                    check_len(&cost.control_weights, p, "cost.control_weights")?;
                }
                if !cost.state_weights.is_empty() {
                    check_len(&cost.state_weights, n, "cost.state_weights")?;
                }
                let kind = classify(&chart, &alg, &dynamics, &space, &cost);
                (affine_system(alg, space, dynamics, cost)?, kind, n, m)
            }
        };

        let x0 = cfg.x0.clone().unwrap_or_default();
        check_len(&x0, n, "x0")?;
        let z_init = require(&cfg.z_init, "z_init")?;
        check_len(&z_init, m, "z_init")?;
        let horizon = require(&cfg.horizon, "horizon")?;
        if !(horizon.t1 > horizon.t0) || !horizon.t0.is_finite() || !horizon.t1.is_finite() {
            return Err(Error::config("horizon", "need finite t0 < t1"));
        }
        let interval = Interval::new(horizon.t0, horizon.t1).with_step(solver.step());
        let mode = if horizon.free_time {
            TimeMode::FreeTime
        } else {
            TimeMode::FixedTime
        };
        let pipeline = cfg.pipeline.unwrap_or(Pipeline::Extremal);

        let control_signal = match (&cfg.control_signal, pipeline) {
            (Some(spec), _) => {
                let p = system.control_dim();
                if let Some(k) = spec
                    .values
                    .iter()
                    .position(|v| v.len() != p || !system.space().contains(v))
                {
                    return Err(Error::config(
                        format!("control_signal.values[{k}]"),
                        "not an element of the control space",
                    ));
                }
                Some(
                    ControlSignal::piecewise_constant(spec.breakpoints.clone(), spec.values.clone())
                        .map_err(|e| Error::config("control_signal", e.to_string()))?,
                )
            }
            (None, Pipeline::Simulate) => {
                return Err(Error::config("control_signal", "required by the simulate pipeline"))
            }
            (None, _) => None,
        };

        let shoot = match (&cfg.shoot, pipeline) {
            (Some(spec), Pipeline::Shoot) => {
                if n != 0 {
                    return Err(Error::config("chart", "shooting needs a Lie algebra chart"));
                }
                let rep = match spec.representation {
                    RepresentationSpec::So3 => Representation::so3(),
                    RepresentationSpec::Su2 => Representation::su2(),
                };
                if rep.algebra_dim() != m {
                    return Err(Error::config(
                        "shoot.representation",
                        format!("represents a {}-dimensional algebra", rep.algebra_dim()),
                    ));
                }
                let d = rep.matrix_dim();
                check_len(&spec.target, d * d, "shoot.target")?;
                let target = DMatrix::from_row_slice(d, d, &spec.target);
                let opts = ShootOptions {
                    step: solver.step(),
                    max_evaluations: spec.max_evaluations.unwrap_or(ShootOptions::default().max_evaluations),
                    ..ShootOptions::default()
                };
                Some((rep, target, opts))
            }
            (None, Pipeline::Shoot) => return Err(Error::config("shoot", "required by the shoot pipeline")),
            _ => None,
        };

        Ok(Scenario {
            name: cfg.scenario.clone().unwrap_or_else(|| "custom".into()),
            system,
            kind,
            x0,
            z_init,
            z0,
            interval,
            mode,
            pipeline,
            control_signal,
            shoot,
            tol: solver.tol(),
            seed: solver.seed(),
            needle_samples: solver.needle_samples(),
            axiom_samples: solver.axiom_samples(),
        })
    }

    /// Skew symmetry and the anchor morphism property on sampled points.
    pub fn validate_axioms(&self) -> Result<Vec<AxiomReport>> {
        let alg = self.system.alg();
        let points = sample_points(alg.base_dim(), self.axiom_samples.max(1), AXIOM_BOX, self.seed);
        Ok(vec![
            alg.validate_skew(&points, AXIOM_TOL)?,
            alg.validate_anchor_morphism(&points, alg.fd_step(), AXIOM_TOL)?,
        ])
    }
}

fn classify(
    chart: &ChartSpec,
    alg: &ChartAlgebroid,
    dynamics: &DynamicsSpec,
    space: &ControlSpace,
    cost: &CostSpec,
) -> ScenarioKind {
    match chart {
        ChartSpec::TangentBundle { dim } => {
            let identity_inputs = dynamics.inputs.len() == *dim
                && dynamics
                    .inputs
                    .iter()
                    .enumerate()
                    .all(|(k, b)| b.iter().enumerate().all(|(i, v)| *v == if i == k { 1.0 } else { 0.0 }));
            let integrator = dynamics.drift.iter().all(|v| *v == 0.0)
                && dynamics.linear.as_ref().is_none_or(|l| l.iter().all(|v| *v == 0.0))
                && identity_inputs
                && cost.state_weights.iter().all(|v| *v == 0.0)
                && cost.control_weights.len() == *dim
                && cost.control_weights.iter().all(|r| *r > 0.0)
                && matches!(space, ControlSpace::Box { .. });
            ScenarioKind::Classical {
                integrator: integrator.then(|| cost.control_weights.clone()),
            }
        }
        _ if alg.base_dim() == 0
            && dynamics.inputs.len() == 1
            && matches!(space, ControlSpace::FiniteSet(v) if v == &vec![vec![-1.0], vec![1.0]]) =>
        {
            ScenarioKind::BangBang {
                drift: dynamics.drift.clone(),
                input: dynamics.inputs[0].clone(),
                so3: alg.fiber_dim() == 3 && alg.structure(&[]) == StructureTensor::levi_civita(),
            }
        }
        _ => ScenarioKind::General,
    }
}

/// `f = drift + L x + B u`, `L = c + r u^2 / 2 + q x^2 / 2`, with analytic
/// derivatives and, for box controls, the separable maximizer.
fn affine_system(alg: ChartAlgebroid, space: ControlSpace, d: DynamicsSpec, cost: CostSpec) -> Result<ControlSystem> {
    let (n, m) = (alg.base_dim(), alg.fiber_dim());
    let p = d.inputs.len();
    let lin = d
        .linear
        .clone()
        .map(|l| DMatrix::from_row_slice(m, n, &l))
        .unwrap_or_else(|| DMatrix::zeros(m, n));
    let r = if cost.control_weights.is_empty() {
        vec![0.0; p]
    } else {
        cost.control_weights.clone()
    };
    let q = if cost.state_weights.is_empty() {
        vec![0.0; n]
    } else {
        cost.state_weights.clone()
    };
    let (dyn_f, lin_f, lin_j) = (d.clone(), lin.clone(), lin);
    let (r_l, q_l, q_g) = (r.clone(), q.clone(), q);
    let mut sys = ControlSystem::new(
        alg,
        space.clone(),
        move |x, u| {
            let mut f = dyn_f.drift.clone();
            for (i, fi) in f.iter_mut().enumerate() {
                *fi += (0..x.len()).map(|a| lin_f[(i, a)] * x[a]).sum::<f64>();
                *fi += u.iter().zip(&dyn_f.inputs).map(|(uk, b)| uk * b[i]).sum::<f64>();
            }
            f
        },
        move |x, u| {
            cost.constant
                + 0.5 * u.iter().zip(&r_l).map(|(v, w)| w * v * v).sum::<f64>()
                + 0.5 * x.iter().zip(&q_l).map(|(v, w)| w * v * v).sum::<f64>()
        },
    )?
    .with_control_jacobian(move |_, _| lin_j.clone())
    .with_cost_gradient(move |x, _| x.iter().zip(&q_g).map(|(v, w)| w * v).collect());
    if let ControlSpace::Box { lower, upper } = space {
        let inputs = d.inputs;
        sys = sys.with_maximizer(move |_, z, z0| {
            (0..p)
                .map(|k| {
                    let s = dot(z, &inputs[k]);
                    if z0 < 0.0 && r[k] > 0.0 {
                        (s / (-z0 * r[k])).clamp(lower[k], upper[k])
                    } else if s > 0.0 {
                        upper[k]
                    } else {
                        lower[k]
                    }
                })
                .collect()
        });
    }
    Ok(sys)
}

/// Everything a run measured, serialized as the report document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub scenario: String,
    pub pipeline: Pipeline,
    pub chart: String,
    pub mode: TimeMode,
    pub z0: f64,
    pub step: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub z_init: Vec<f64>,
    pub t1: f64,
    pub switches: Vec<f64>,
    pub axioms: Vec<AxiomReport>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wong: Option<WongReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shoot: Option<ShootResult>,
    pub pass: bool,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Names of the failed checks.
    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Result of [`run_scenario`].
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub trajectory: Trajectory,
    pub costate: CostatePath,
    pub hamiltonian: Vec<f64>,
    pub audit: ExtremalAudit,
}

impl RunOutcome {
    /// Writes `trajectory.csv`, `costate.csv`, `audit.json` and `report.json`.
    pub fn write_artifacts(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        self.trajectory.write_csv(dir.join("trajectory.csv"))?;
        self.costate.write_csv(dir.join("costate.csv"), &self.hamiltonian)?;
        std::fs::write(dir.join("audit.json"), self.audit.to_json()?)?;
        std::fs::write(dir.join("report.json"), self.report.to_json()?)?;
        Ok(())
    }
}

/// Builds the scenario, validates the algebroid axioms, runs the configured
/// pipeline and audits the result.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutcome> {
    let sc = Scenario::from_config(cfg)?;
    let axioms = sc.validate_axioms()?;
    let mut notes = Vec::new();
    let mut shoot = None;
    let mut z_init = sc.z_init.clone();
    let mut interval = sc.interval;

    let (trajectory, costate, switches) = match sc.pipeline {
        Pipeline::Extremal | Pipeline::Shoot => {
            if let Some((rep, target, opts)) = &sc.shoot {
                let horizon = match sc.mode {
                    TimeMode::FixedTime => ShootHorizon::Fixed {
                        t0: interval.t0,
                        t1: interval.t1,
                    },
                    TimeMode::FreeTime => ShootHorizon::Free {
                        t0: interval.t0,
                        t1_guess: interval.t1,
                    },
                };
                let res = shoot_endpoint(&sc.system, rep, target, sc.z0, &sc.z_init, horizon, opts)?;
                z_init = res.z_init.clone();
                if res.t1 - interval.t0 < interval.step {
                    notes.push(format!("shooting collapsed the horizon to t1 = {}", res.t1));
                    interval.t1 = interval.t0 + interval.step;
                } else {
                    interval.t1 = res.t1;
                }
                shoot = Some(res);
            }
            let ext = integrate_pmp_flow(&sc.system, &sc.x0, &z_init, sc.z0, &interval)?;
            (ext.trajectory, ext.costate, ext.switches)
        }
        Pipeline::Simulate => {
            let u = sc.control_signal.as_ref().expect("validated");
            let traj = simulate_trajectory(&sc.system, u, &sc.x0, &interval)?;
            let costate = transport_bbar(&sc.system, u, &interval, &sc.x0, &z_init, sc.z0)?;
            let switches = u.breakpoints().to_vec();
            (traj, costate, switches)
        }
    };

    let audit = verify_extremal(&sc.system, &trajectory, &costate, sc.mode, sc.tol)?;
    let (report, hamiltonian) = assemble(
        &sc,
        axioms,
        &audit,
        &trajectory,
        &costate,
        switches,
        z_init,
        shoot,
        notes,
    )?;
    Ok(RunOutcome {
        report,
        trajectory,
        costate,
        hamiltonian,
        audit,
    })
}

/// Audits a user-supplied trajectory and costate against the scenario's system.
pub fn audit_candidate(
    cfg: &ScenarioConfig,
    traj_csv: impl AsRef<Path>,
    costate_csv: impl AsRef<Path>,
) -> Result<RunOutcome> {
    let sc = Scenario::from_config(cfg)?;
    let axioms = sc.validate_axioms()?;
    let trajectory = read_trajectory_csv(traj_csv)?;
    let costate = read_costate_csv(costate_csv)?;
    let (n, m, p) = (
        sc.system.alg().base_dim(),
        sc.system.alg().fiber_dim(),
        sc.system.control_dim(),
    );
    if trajectory.path.base_dim() != n || trajectory.path.fiber_dim() != m || trajectory.controls[0].len() != p {
        return Err(Error::dims(
            "trajectory columns",
            n + m + p,
            trajectory.path.base_dim() + trajectory.path.fiber_dim() + trajectory.controls[0].len(),
        ));
    }
    if costate.z()[0].len() != m {
        return Err(Error::dims("costate columns", m, costate.z()[0].len()));
    }
    let audit = verify_extremal(&sc.system, &trajectory, &costate, sc.mode, sc.tol)?;
    let switches = trajectory.grid().breakpoints().to_vec();
    let z_init = costate.z()[0].clone();
    let (report, hamiltonian) = assemble(
        &sc,
        axioms,
        &audit,
        &trajectory,
        &costate,
        switches,
        z_init,
        None,
        Vec::new(),
    )?;
    Ok(RunOutcome {
        report,
        trajectory,
        costate,
        hamiltonian,
        audit,
    })
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    sc: &Scenario,
    axioms: Vec<AxiomReport>,
    audit: &ExtremalAudit,
    traj: &Trajectory,
    costate: &CostatePath,
    switches: Vec<f64>,
    z_init: Vec<f64>,
    shoot: Option<ShootResult>,
    mut notes: Vec<String>,
) -> Result<(RunReport, Vec<f64>)> {
    let tol = sc.tol;
    let grid = traj.grid();
    let z0 = costate.z0();
    let hamiltonian: Vec<f64> = (0..grid.len())
        .map(|i| hamiltonian(&sc.system, &costate.z()[i], z0, &traj.path.base()[i], &traj.controls[i]))
        .collect();

    let mut checks: Vec<Check> = axioms
        .iter()
        .map(|a| Check::at_most(format!("axiom_{}", a.check), a.max_violation, a.tolerance))
        .collect();
    checks.extend(audit.checks.iter().cloned());
    notes.extend(audit.notes.iter().cloned());
    let mut wong = None;

    match &sc.kind {
        ScenarioKind::BangBang { drift, input, so3 } => {
            checks.extend(bang_bang_checks(sc, traj, costate, drift, input, *so3, &mut notes));
        }
        ScenarioKind::Classical { integrator } => {
            checks.push(Check::at_most(
                "classical_reduction",
                classical_reduction_residual(&sc.system, traj, costate),
                1e-12,
            ));
            if let Some(r) = integrator {
                checks.push(Check::at_most(
                    "closed_form",
                    closed_form_error(sc, traj, costate, r),
                    tol,
                ));
            }
        }
        ScenarioKind::Wong(w) => {
            let points = sample_points(w.base_dim(), sc.axiom_samples.max(1), AXIOM_BOX, sc.seed);
            checks.push(Check::at_most(
                "curvature_antisymmetry",
                w.curvature_antisymmetry(&points),
                1e-10,
            ));
            let ext = crate::pmp::Extremal {
                trajectory: traj.clone(),
                costate: costate.clone(),
                switches: switches.clone(),
                tie_nodes: Vec::new(),
                hamiltonian: hamiltonian.clone(),
            };
            let r = w.residuals(&ext)?;
            checks.push(Check::at_most("wong_momentum", r.momentum_residual, tol));
            checks.push(Check::at_most("wong_charge", r.charge_residual, tol));
            checks.push(Check::at_most("speed_drift", r.speed_drift, tol));
            if w.is_flat() {
                let (x0, u0) = (&traj.path.base()[0], &traj.controls[0]);
                let err = grid
                    .nodes()
                    .iter()
                    .zip(traj.path.base())
                    .flat_map(|(&t, x)| (0..x.len()).map(move |a| (x[a] - x0[a] - u0[a] * (t - grid.t0())).abs()))
                    .fold(0.0, f64::max);
                checks.push(Check::at_most("straight_lines", err, 1e-8));
            }
            wong = Some(r);
        }
        ScenarioKind::General => {}
    }

    if let Some(res) = &shoot {
        checks.push(Check::at_most(
            "shoot_residual",
            res.residual,
            ShootOptions::default().tolerance,
        ));
    }

    let cone = if sc.needle_samples > 0 {
        let report = cone_check(sc, traj, costate, &switches)?;
        checks.push(Check::at_most("cone_support", report.max_pairing, report.tolerance));
        Some(report)
    } else {
        None
    };

    let pass = checks.iter().all(|c| c.pass);
    Ok((
        RunReport {
            schema_version: SCHEMA_VERSION,
            scenario: sc.name.clone(),
            pipeline: sc.pipeline,
            chart: sc.system.alg().name().to_string(),
            mode: sc.mode,
            z0,
            step: sc.interval.step,
            tolerance: tol,
            seed: sc.seed,
            z_init,
            t1: grid.t1(),
            switches,
            axioms,
            checks,
            notes,
            wong,
            cone,
            shoot,
            pass,
        },
        hamiltonian,
    ))
}

fn bang_bang_checks(
    sc: &Scenario,
    traj: &Trajectory,
    costate: &CostatePath,
    drift: &[f64],
    input: &[f64],
    so3: bool,
    notes: &mut Vec<String>,
) -> Vec<Check> {
    let grid = traj.grid();
    let c = sc.system.alg().structure(&[]);
    let m = drift.len();
    let zdot = differentiate_on_grid(grid, costate.z());
    let (mut law_violations, mut singular, mut interior) = (0usize, 0usize, 0usize);
    let mut residual: f64 = 0.0;
    for i in 0..grid.len() {
        if grid.is_breakpoint_node(i) {
            continue;
        }
        interior += 1;
        let (z, u) = (&costate.z()[i], traj.controls[i][0]);
        let s = dot(z, input);
        if s.abs() <= 1e-12 * (1.0 + norm(z)) {
            singular += 1;
        } else if u != s.signum() {
            law_violations += 1;
        }
        let w: Vec<f64> = (0..m).map(|k| drift[k] + u * input[k]).collect();
        for j in 0..m {
            let mut v = 0.0;
            for ii in 0..m {
                for k in 0..m {
                    v += c.get(k, ii, j) * w[ii] * z[k];
                }
            }
            residual = residual.max((zdot[i][j] - v).abs());
        }
    }
    let mut checks = vec![
        Check::at_most("switching_law", law_violations as f64, 0.0),
        Check::at_most("costate_explicit", residual, sc.tol),
    ];
    let frac = singular as f64 / interior.max(1) as f64;
    checks.push(Check {
        name: "not_permanently_singular".into(),
        value: frac,
        tolerance: 1.0,
        pass: frac < 1.0,
    });
    if singular > 0 {
        notes.push(format!("switching function vanishes at {singular} of {interior} nodes"));
    }
    if so3 {
        let r0 = norm(&costate.z()[0]);
        let drift = costate.z().iter().map(|z| (norm(z) - r0).abs()).fold(0.0, f64::max);
        checks.push(Check::at_most("casimir_drift", drift, 1e-8));
    }
    checks
}

/// `max |zdot_field - (-(df/dx)^T z - z0 dL/dx)|` over the nodes.
pub fn classical_reduction_residual(sys: &ControlSystem, traj: &Trajectory, costate: &CostatePath) -> f64 {
    let z0 = costate.z0();
    let mut worst: f64 = 0.0;
    for i in 0..traj.grid().len() {
        let (x, u, z) = (&traj.path.base()[i], &traj.controls[i], &costate.z()[i]);
        let field = sys.costate_velocity(x, u, z, z0);
        let j = sys.control_jacobian(x, u);
        let textbook = -(j.transpose() * DMatrix::from_column_slice(z.len(), 1, z))
            - DMatrix::from_vec(x.len(), 1, sys.cost_gradient(x, u)) * z0;
        for (a, b) in field.iter().zip(textbook.iter()) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

/// Deviation from `z = z(t0)`, `u = clamp(z / (-z0 r))`, `x = x0 + u t`.
fn closed_form_error(sc: &Scenario, traj: &Trajectory, costate: &CostatePath, r: &[f64]) -> f64 {
    let ControlSpace::Box { lower, upper } = sc.system.space() else {
        return f64::NAN;
    };
    let z0 = costate.z0();
    let z = &costate.z()[0];
    let u: Vec<f64> = (0..r.len())
        .map(|k| {
            if z0 < 0.0 {
                (z[k] / (-z0 * r[k])).clamp(lower[k], upper[k])
            } else if z[k] > 0.0 {
                upper[k]
            } else {
                lower[k]
            }
        })
        .collect();
    let grid = traj.grid();
    let x0 = &traj.path.base()[0];
    let mut worst: f64 = 0.0;
    for (i, &t) in grid.nodes().iter().enumerate() {
        for k in 0..r.len() {
            worst = worst
                .max((traj.path.base()[i][k] - x0[k] - u[k] * (t - grid.t0())).abs())
                .max((costate.z()[i][k] - z[k]).abs())
                .max((traj.controls[i][k] - u[k]).abs());
        }
    }
    worst
}

fn cone_check(sc: &Scenario, traj: &Trajectory, costate: &CostatePath, switches: &[f64]) -> Result<ConeReport> {
    let grid = traj.grid();
    let tau = grid.t1();
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let mut z = vec![costate.z0()];
    z.extend(costate.z().last().expect("non-empty costate"));
    let mut needles = Vec::with_capacity(sc.needle_samples);
    for _ in 0..sc.needle_samples {
        let mut s = VariationSymbol::random(&mut rng, grid.t0(), tau, sc.system.space(), 3, switches);
        if sc.mode == TimeMode::FixedTime {
            s.dt = 0.0;
        }
        needles.push(needle_vector(&sc.system, traj, &s, None)?);
    }
    cone_support_check(&needles, &z, 1e-6)
}

fn read_rows(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::config(format!("{}:{}", path.display(), line + 2), e.to_string()))?;
        rows.push(row);
    }
    if rows.len() < 2 {
        return Err(Error::config(path.display().to_string(), "need at least two rows"));
    }
    Ok((header, rows))
}

fn count_prefix(header: &[String], prefix: &str) -> usize {
    header.iter().filter(|h| h.starts_with(prefix)).count()
}

/// Reads a trajectory written by [`Trajectory::write_csv`].
pub fn read_trajectory_csv(path: impl AsRef<Path>) -> Result<Trajectory> {
    let (header, rows) = read_rows(path)?;
    let (n, m, p) = (
        count_prefix(&header, "x_"),
        count_prefix(&header, "a_"),
        count_prefix(&header, "u_"),
    );
    if header.first().map(String::as_str) != Some("t") || header.len() != 1 + n + m + p {
        return Err(Error::config("trajectory header", "expected columns t, x_*, a_*, u_*"));
    }
    let grid = TimeGrid::from_nodes(rows.iter().map(|r| r[0]).collect())?;
    let base = rows.iter().map(|r| r[1..1 + n].to_vec()).collect();
    let fiber = rows.iter().map(|r| r[1 + n..1 + n + m].to_vec()).collect();
    let controls: Vec<Vec<f64>> = rows.iter().map(|r| r[1 + n + m..].to_vec()).collect();
    Ok(Trajectory {
        path: EPath::new(grid.clone(), base, fiber)?,
        control: ControlSignal::sampled(grid, controls.clone())?,
        controls,
    })
}

/// Reads a costate written by [`CostatePath::write_csv`].
pub fn read_costate_csv(path: impl AsRef<Path>) -> Result<CostatePath> {
    let (header, rows) = read_rows(path)?;
    let m = count_prefix(&header, "z_");
    if header.first().map(String::as_str) != Some("t") || header.len() != m + 3 {
        return Err(Error::config("costate header", "expected columns t, z_*, z0, H"));
    }
    let z0 = rows[0][1 + m];
    if rows.iter().any(|r| r[1 + m] != z0) {
        return Err(Error::config("costate z0", "multiplier must be constant"));
    }
    let grid = TimeGrid::from_nodes(rows.iter().map(|r| r[0]).collect())?;
    CostatePath::new(grid, rows.iter().map(|r| r[1..1 + m].to_vec()).collect(), z0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(name: &str) -> RunOutcome {
        run_scenario(&builtin_config(name).unwrap()).unwrap()
    }

    #[test]
    fn every_builtin_resolves() {
        for info in list_scenarios() {
            let cfg = builtin_config(info.name).unwrap();
            Scenario::from_config(&cfg).unwrap_or_else(|e| panic!("{}: {e}", info.name));
        }
        assert!(builtin_config("nope").is_none());
    }

    #[test]
    fn so3_monotone_never_switches() {
        let out = run("so3-monotone");
        assert!(out.report.pass, "{:?}", out.report.failures());
        assert!(out.report.switches.is_empty());
        assert!(out.trajectory.controls.iter().all(|u| u[0] == 1.0));
    }

    #[test]
    fn so3_singular_is_flagged() {
        let out = run("so3-singular");
        assert!(!out.report.pass);
        assert_eq!(out.report.failures(), vec!["not_permanently_singular"]);
    }

    #[test]
    fn classical_lq_matches_closed_form() {
        let out = run("classical-tm-lq");
        assert!(out.report.pass, "{:?}", out.report.failures());
        let closed = out.report.checks.iter().find(|c| c.name == "closed_form").unwrap();
        assert!(closed.value < 1e-6);
    }

    #[test]
    fn wong_builtins_pass() {
        for name in ["wong-so3", "wong-flat"] {
            let out = run(name);
            assert!(out.report.pass, "{name}: {:?}", out.report.failures());
        }
    }

    #[test]
    fn inconsistent_dimensions_name_the_field() {
        let mut cfg = builtin_config("classical-tm-lq").unwrap();
        cfg.x0 = Some(vec![0.0, 1.0]);
        match Scenario::from_config(&cfg).unwrap_err() {
            Error::Config { path, .. } => assert_eq!(path, "x0"),
            e => panic!("{e}"),
        }
        let mut cfg = builtin_config("so3-bang-bang").unwrap();
        cfg.dynamics.as_mut().unwrap().inputs[0].push(1.0);
        match Scenario::from_config(&cfg).unwrap_err() {
            Error::Config { path, .. } => assert_eq!(path, "dynamics.inputs[0]"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn artifacts_round_trip_through_the_audit() {
        let cfg = builtin_config("classical-tm-lq").unwrap();
        let out = run_scenario(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        out.write_artifacts(dir.path()).unwrap();
        let again = audit_candidate(&cfg, dir.path().join("trajectory.csv"), dir.path().join("costate.csv")).unwrap();
        assert_eq!(again.report.pass, out.report.pass);
        assert_eq!(again.trajectory.path.base(), out.trajectory.path.base());
        let report: RunReport =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(report, out.report);
    }
}
