use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::integrate_pmp_flow;
use crate::algebroid::StructureTensor;
use crate::control::{ControlSystem, Interval};
use crate::error::{Error, Result};
use crate::numerics::{interpolate_on_segment, rhs_fn, rk4_step, DEFAULT_STEP};
use crate::paths::EPath;

/// Steps between re-orthonormalizations of orthogonal developments.
const PROJECT_EVERY: usize = 100;

/// A matrix representation of a Lie algebra, `e_i -> generators[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    name: String,
    generators: Vec<DMatrix<f64>>,
    orthogonal: bool,
}

impl Representation {
    /// Checks `rep([e_i, e_j]) = [rep e_i, rep e_j]` on the basis to 1e-10.
    pub fn new(
        name: impl Into<String>,
        generators: Vec<DMatrix<f64>>,
        structure: &StructureTensor,
        orthogonal: bool,
    ) -> Result<Self> {
        let m = structure.dim();
        if generators.len() != m {
            return Err(Error::dims("representation generators", m, generators.len()));
        }
        let d = generators[0].nrows();
        if generators.iter().any(|g| g.nrows() != d || g.ncols() != d) {
            return Err(Error::InvalidArgument(
                "generators must be square matrices of one size".into(),
            ));
        }
        let mut worst: f64 = 0.0;
        for j in 0..m {
            for k in 0..m {
                let lhs = (0..m).fold(DMatrix::zeros(d, d), |acc, i| {
                    acc + &generators[i] * structure.get(i, j, k)
                });
                let rhs = &generators[j] * &generators[k] - &generators[k] * &generators[j];
                worst = worst.max((lhs - rhs).abs().max());
            }
        }
        if worst > 1e-10 {
            return Err(Error::RepresentationIncompatible { residual: worst });
        }
        Ok(Representation {
            name: name.into(),
            generators,
            orthogonal,
        })
    }

    /// Defining representation of so(3) by skew matrices, `e_i -> hat(e_i)`.
    pub fn so3() -> Self {
        let hat = |v: [f64; 3]| DMatrix::from_row_slice(3, 3, &[0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0]);
        let gens = vec![hat([1.0, 0.0, 0.0]), hat([0.0, 1.0, 0.0]), hat([0.0, 0.0, 1.0])];
        Representation::new("so(3)", gens, &StructureTensor::levi_civita(), true).expect("hat map is a homomorphism")
    }

    /// so(3) = su(2) acting on quaternions by left multiplication with
    /// `i/2, j/2, k/2`, as real 4x4 matrices. Develops into the simply
    /// connected cover SU(2).
    pub fn su2() -> Self {
        // Left multiplication on (w, x, y, z).
        let li = [0., -1., 0., 0., 1., 0., 0., 0., 0., 0., 0., -1., 0., 0., 1., 0.];
        let lj = [0., 0., -1., 0., 0., 0., 0., 1., 1., 0., 0., 0., 0., -1., 0., 0.];
        let lk = [0., 0., 0., -1., 0., 0., -1., 0., 0., 1., 0., 0., 1., 0., 0., 0.];
        let gens = [li, lj, lk]
            .iter()
            .map(|g| DMatrix::from_row_slice(4, 4, g) * 0.5)
            .collect();
        Representation::new("su(2)", gens, &StructureTensor::levi_civita(), true)
            .expect("quaternion units represent su(2)")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix_dim(&self) -> usize {
        self.generators[0].nrows()
    }

    pub fn algebra_dim(&self) -> usize {
        self.generators.len()
    }

    /// `sum_i a^i rep(e_i)`.
    pub fn apply(&self, a: &[f64]) -> DMatrix<f64> {
        let d = self.matrix_dim();
        a.iter()
            .zip(&self.generators)
            .fold(DMatrix::zeros(d, d), |acc, (c, g)| acc + g * *c)
    }
}

fn polar(g: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = g.clone().svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// Solves `g' = g rep(a(t))`, `g(t0) = I`, along a path over a point and
/// returns `g(t1)`.
pub fn develop_to_group(path: &EPath, rep: &Representation) -> Result<DMatrix<f64>> {
    if path.base_dim() != 0 {
        return Err(Error::InvalidArgument("development needs a path over a point".into()));
    }
    if path.fiber_dim() != rep.algebra_dim() {
        return Err(Error::dims("development: fiber", rep.algebra_dim(), path.fiber_dim()));
    }
    let d = rep.matrix_dim();
    let grid = path.grid();
    let fiber = path.fiber();
    let rhs = rhs_fn(d * d, |k, t, g: &[f64], dg: &mut [f64]| {
        let a = interpolate_on_segment(grid, fiber, k, t);
        let g = DMatrix::from_column_slice(d, d, g);
        dg.copy_from_slice((g * rep.apply(&a)).as_slice());
    });
    let nodes = grid.nodes();
    let mut g = DMatrix::<f64>::identity(d, d).as_slice().to_vec();
    let mut steps = 0;
    for (k, seg) in grid.segments().iter().enumerate() {
        for i in seg.start..seg.end - 1 {
            g = rk4_step(&rhs, k, nodes[i], nodes[i + 1] - nodes[i], &g);
            steps += 1;
            if rep.orthogonal && steps % PROJECT_EVERY == 0 {
                g = polar(&DMatrix::from_column_slice(d, d, &g)).as_slice().to_vec();
            }
        }
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::IntegrationDiverged { t: grid.t1() });
    }
    let g = DMatrix::from_column_slice(d, d, &g);
    Ok(if rep.orthogonal { polar(&g) } else { g })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ShootHorizon {
    Fixed {
        t0: f64,
        t1: f64,
    },
    /// Final time is searched as `t0 + |theta|` starting from `t1_guess`.
    Free {
        t0: f64,
        t1_guess: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootOptions {
    pub step: f64,
    pub max_evaluations: usize,
    pub tolerance: f64,
    /// Edge length of the initial simplex.
    pub simplex_scale: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            step: DEFAULT_STEP,
            max_evaluations: 2000,
            tolerance: 1e-4,
            simplex_scale: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootResult {
    pub z_init: Vec<f64>,
    pub t1: f64,
    pub residual: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Searches the initial costate (and the final time when free) whose extremal
/// develops onto `target`, minimizing the Frobenius distance with Nelder-Mead.
pub fn shoot_endpoint(
    sys: &ControlSystem,
    rep: &Representation,
    target: &DMatrix<f64>,
    z0: f64,
    z_guess: &[f64],
    horizon: ShootHorizon,
    opts: &ShootOptions,
) -> Result<ShootResult> {
    let m = sys.alg().fiber_dim();
    if sys.alg().base_dim() != 0 {
        return Err(Error::InvalidArgument(
            "shooting needs a system on a Lie algebra".into(),
        ));
    }
    if z_guess.len() != m {
        return Err(Error::dims("costate guess", m, z_guess.len()));
    }
    let d = rep.matrix_dim();
    if target.nrows() != d || target.ncols() != d {
        return Err(Error::dims("shooting target", d, target.nrows()));
    }
    let t0 = match horizon {
        ShootHorizon::Fixed { t0, .. } | ShootHorizon::Free { t0, .. } => t0,
    };
    let final_time = |theta: &[f64]| match horizon {
        ShootHorizon::Fixed { t1, .. } => t1,
        ShootHorizon::Free { t0, .. } => t0 + theta[m].abs(),
    };
    let objective = |theta: &[f64]| -> f64 {
        let t1 = final_time(theta);
        let g = if t1 - t0 <= 1e-12 {
            DMatrix::identity(d, d)
        } else {
            let step = opts.step.min(t1 - t0);
            match integrate_pmp_flow(sys, &[], &theta[..m], z0, &Interval::new(t0, t1).with_step(step))
                .and_then(|ext| develop_to_group(&ext.trajectory.path, rep))
            {
                Ok(g) => g,
                Err(_) => return f64::INFINITY,
            }
        };
        (g - target).norm()
    };
    let mut start = z_guess.to_vec();
    if let ShootHorizon::Free { t0, t1_guess } = horizon {
        start.push(t1_guess - t0);
    }
    let nm = nelder_mead(
        objective,
        &start,
        opts.simplex_scale,
        opts.max_evaluations,
        opts.tolerance * 1e-2,
    );
    Ok(ShootResult {
        z_init: nm.x[..m].to_vec(),
        t1: final_time(&nm.x),
        residual: nm.f,
        converged: nm.f < opts.tolerance,
        evaluations: nm.evaluations,
    })
}

struct Minimum {
    x: Vec<f64>,
    f: f64,
    evaluations: usize,
}

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Stops at `max_evals`, when the best value drops below
/// `f_target`, or when the simplex collapses.
fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], scale: f64, max_evals: usize, f_target: f64) -> Minimum {
    let n = x0.len();
    let evals = std::cell::Cell::new(0);
    let eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += if x[i].abs() > 1e-8 {
            scale * x[i].abs().max(0.5)
        } else {
            scale
        };
        let fx = eval(&x);
        simplex.push((x, fx));
    }
    let point = |c: &[f64], w: &[f64], coef: f64| -> Vec<f64> {
        c.iter().zip(w).map(|(ci, wi)| ci + coef * (wi - ci)).collect()
    };
    while evals.get() < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[n].1);
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if best < f_target || diameter < 1e-13 || (worst - best).abs() <= 1e-16 * best.abs().max(1e-300) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let xr = point(&centroid, &simplex[n].0, -1.0);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = point(&centroid, &simplex[n].0, -2.0);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = point(&centroid, &xr, 0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = point(&centroid, &simplex[n].0, 0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < fr.min(simplex[n].1) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    s.0 = point(&x_best, &s.0, 0.5);
                    s.1 = eval(&s.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    Minimum {
        x,
        f,
        evaluations: evals.get(),
    }
}
