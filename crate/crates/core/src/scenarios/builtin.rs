use serde::Serialize;

use super::config::*;
use super::wong::WongFixture;
use crate::algebroid::StructureTensor;
use crate::control::{ControlSpace, ControlSystem, Interval};
use crate::pmp::{develop_to_group, integrate_pmp_flow, Representation};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub description: &'static str,
}

const SCENARIOS: &[ScenarioInfo] = &[
    ScenarioInfo {
        name: "so3-bang-bang",
        description: "time-optimal rigid body on so(3), a = e1, b = e2, U = {-1, 1}, free final time",
    },
    ScenarioInfo {
        name: "so3-monotone",
        description: "so(3) bang-bang with the costate on the axis of a + b, so u = +1 throughout",
    },
    ScenarioInfo {
        name: "so3-singular",
        description: "so(3) with b = 0: every control maximizes, flagged as permanently singular",
    },
    ScenarioInfo {
        name: "so3-shoot",
        description: "recover an so(3) bang-bang extremal from its developed endpoint in SO(3)",
    },
    ScenarioInfo {
        name: "classical-tm-lq",
        description: "T R^1 with f = u, L = u^2 / 2: closed-form linear-quadratic extremal",
    },
    ScenarioInfo {
        name: "wong-so3",
        description: "reduced geodesics on TR^2 x so(3) with a linear connection (Wong equations)",
    },
    ScenarioInfo {
        name: "wong-flat",
        description: "TR^2 x so(3) with a vanishing connection: straight lines, constant charge",
    },
];

pub fn list_scenarios() -> &'static [ScenarioInfo] {
    SCENARIOS
}

fn so3_config(b: [f64; 3], z_init: Vec<f64>, t1: f64, needles: usize) -> ScenarioConfig {
    ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        chart: Some(ChartSpec::So3),
        dynamics: Some(DynamicsSpec {
            drift: vec![1.0, 0.0, 0.0],
            inputs: vec![b.to_vec()],
            linear: None,
        }),
        control_space: Some(ControlSpaceSpec::Finite {
            values: vec![vec![-1.0], vec![1.0]],
        }),
        cost: Some(CostSpec {
            constant: 1.0,
            ..CostSpec::default()
        }),
        x0: Some(Vec::new()),
        z_init: Some(z_init),
        horizon: Some(HorizonSpec {
            t0: 0.0,
            t1,
            free_time: true,
        }),
        z0: Some(Z0Mode::Normal),
        pipeline: Some(Pipeline::Extremal),
        solver: SolverSpec {
            needle_samples: Some(needles),
            ..SolverSpec::default()
        },
        ..ScenarioConfig::default()
    }
}

fn wong_config(w: &WongFixture, x0: Vec<f64>, z_init: Vec<f64>) -> ScenarioConfig {
    ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        chart: Some(ChartSpec::Atiyah {
            base_dim: w.base_dim(),
            algebra_dim: w.algebra().dim(),
            structure_constants: w.algebra().as_slice().to_vec(),
            connection: w.connection_coefficients().to_vec(),
            metric: w.metric_coefficients().to_vec(),
            velocity_bound: 100.0,
        }),
        x0: Some(x0),
        z_init: Some(z_init),
        horizon: Some(HorizonSpec {
            t0: 0.0,
            t1: 1.0,
            free_time: false,
        }),
        z0: Some(Z0Mode::Normal),
        pipeline: Some(Pipeline::Extremal),
        ..ScenarioConfig::default()
    }
}

/// Endpoint in SO(3) of the default bang-bang extremal over `[0, 4]`, which
/// switches once.
fn so3_shoot_target() -> Vec<f64> {
    let (a, b) = ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
    let sys = ControlSystem::new(
        crate::algebroid::lie_algebra("so(3)", StructureTensor::levi_civita()),
        ControlSpace::finite(vec![vec![-1.0], vec![1.0]]).expect("two controls"),
        move |_, u| (0..3).map(|i| a[i] + u[0] * b[i]).collect(),
        |_, _| 1.0,
    )
    .expect("so(3) system");
    let ext = integrate_pmp_flow(
        &sys,
        &[],
        &[0.0, 1.0, 0.2],
        -1.0,
        &Interval::new(0.0, 4.0).with_step(1e-2),
    )
    .expect("default extremal integrates");
    let g = develop_to_group(&ext.trajectory.path, &Representation::so3()).expect("so(3) development");
    g.transpose().as_slice().to_vec()
}

/// Full config of a built-in scenario.
pub fn builtin_config(name: &str) -> Option<ScenarioConfig> {
    let cfg = match name {
        "so3-bang-bang" => so3_config([0.0, 1.0, 0.0], vec![0.0, 1.0, 0.2], 10.0, 200),
        "so3-monotone" => so3_config([0.0, 1.0, 0.0], vec![0.5, 0.5, 0.0], 5.0, 200),
        "so3-singular" => so3_config([0.0; 3], vec![1.0, 0.3, 0.2], 2.0, 0),
        "so3-shoot" => {
            let mut cfg = so3_config([0.0, 1.0, 0.0], vec![0.02, 0.95, 0.25], 4.0, 0);
            cfg.horizon = Some(HorizonSpec {
                t0: 0.0,
                t1: 4.0,
                free_time: false,
            });
            cfg.pipeline = Some(Pipeline::Shoot);
            cfg.shoot = Some(ShootSpec {
                representation: RepresentationSpec::So3,
                target: so3_shoot_target(),
                max_evaluations: None,
            });
            cfg.solver.step = Some(1e-2);
            cfg
        }
        "classical-tm-lq" => ScenarioConfig {
            schema_version: SCHEMA_VERSION,
            chart: Some(ChartSpec::TangentBundle { dim: 1 }),
            dynamics: Some(DynamicsSpec {
                drift: vec![0.0],
                inputs: vec![vec![1.0]],
                linear: None,
            }),
            control_space: Some(ControlSpaceSpec::Box {
                lower: vec![-10.0],
                upper: vec![10.0],
            }),
            cost: Some(CostSpec {
                control_weights: vec![1.0],
                ..CostSpec::default()
            }),
            x0: Some(vec![0.5]),
            z_init: Some(vec![1.3]),
            horizon: Some(HorizonSpec {
                t0: 0.0,
                t1: 2.0,
                free_time: false,
            }),
            z0: Some(Z0Mode::Normal),
            pipeline: Some(Pipeline::Extremal),
            ..ScenarioConfig::default()
        },
        "wong-so3" => wong_config(
            &WongFixture::so3_linear(),
            vec![0.1, -0.2],
            vec![0.6, -0.8, 0.4, 0.2, -0.3],
        ),
        "wong-flat" => wong_config(&WongFixture::so3_flat(), vec![1.0, 2.0], vec![0.6, -0.8, 0.1, 0.2, 0.3]),
        _ => return None,
    };
    Some(ScenarioConfig {
        scenario: Some(name.to_string()),
        ..cfg
    })
}
