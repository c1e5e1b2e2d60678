use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebroid::ExtendedAlgebroid;
use crate::control::{extend_system, transport_b, ControlSpace, ControlSystem, Interval, Trajectory};
use crate::error::{Error, Result};
use crate::numerics::dot;

/// Data of a needle variation: substitutions of `vs[i]` at `taus[i]` with
/// widths proportional to `dts[i]`, plus a change `dt` of the final time `tau`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationSymbol {
    pub taus: Vec<f64>,
    pub vs: Vec<Vec<f64>>,
    pub tau: f64,
    pub dts: Vec<f64>,
    pub dt: f64,
}

impl VariationSymbol {
    pub fn new(taus: Vec<f64>, vs: Vec<Vec<f64>>, tau: f64, dts: Vec<f64>, dt: f64) -> Result<Self> {
        if taus.len() != vs.len() || taus.len() != dts.len() {
            return Err(Error::InvalidArgument(
                "needle times, values and widths differ in length".into(),
            ));
        }
        if taus.windows(2).any(|w| w[0] > w[1]) || taus.last().is_some_and(|&t| t > tau) {
            return Err(Error::InvalidArgument(
                "needle times must be ordered and not exceed tau".into(),
            ));
        }
        if dts.iter().any(|&d| !(d >= 0.0)) || !dt.is_finite() {
            return Err(Error::InvalidArgument("needle widths must be non-negative".into()));
        }
        Ok(VariationSymbol { taus, vs, tau, dts, dt })
    }

    /// The symbol whose needle vector is `lambda d(self) + mu d(other)`:
    /// needles of both are kept with scaled widths.
    pub fn combine(&self, lambda: f64, other: &VariationSymbol, mu: f64) -> Result<Self> {
        if self.tau != other.tau {
            return Err(Error::InvalidArgument("combined symbols must share tau".into()));
        }
        if lambda < 0.0 || mu < 0.0 {
            return Err(Error::InvalidArgument(
                "combination weights must be non-negative".into(),
            ));
        }
        let mut needles: Vec<(f64, Vec<f64>, f64)> = self
            .taus
            .iter()
            .zip(&self.vs)
            .zip(&self.dts)
            .map(|((&t, v), &d)| (t, v.clone(), lambda * d))
            .chain(
                other
                    .taus
                    .iter()
                    .zip(&other.vs)
                    .zip(&other.dts)
                    .map(|((&t, v), &d)| (t, v.clone(), mu * d)),
            )
            .collect();
        needles.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (taus, rest): (Vec<f64>, Vec<(Vec<f64>, f64)>) = needles.into_iter().map(|(t, v, d)| (t, (v, d))).unzip();
        let (vs, dts) = rest.into_iter().unzip();
        VariationSymbol::new(taus, vs, self.tau, dts, lambda * self.dt + mu * other.dt)
    }

    /// A random symbol with up to `max_needles` needles in `(t0, tau]`, avoiding
    /// the listed discontinuities.
    pub fn random(
        rng: &mut impl Rng,
        t0: f64,
        tau: f64,
        space: &ControlSpace,
        max_needles: usize,
        avoid: &[f64],
    ) -> Self {
        let count = rng.random_range(1..=max_needles.max(1));
        let mut taus: Vec<f64> = (0..count)
            .map(|_| loop {
                let t = rng.random_range(t0..tau);
                if t > t0 && avoid.iter().all(|&b| (b - t).abs() > 1e-9) {
                    break t;
                }
            })
            .collect();
        taus.sort_by(f64::total_cmp);
        let vs = (0..count)
            .map(|_| match space {
                ControlSpace::FiniteSet(vals) => vals[rng.random_range(0..vals.len())].clone(),
                ControlSpace::Box { lower, upper } => lower
                    .iter()
                    .zip(upper)
                    .map(|(l, h)| rng.random_range(*l..=*h))
                    .collect(),
            })
            .collect();
        let dts = (0..count).map(|_| rng.random_range(0.0..1.0)).collect();
        let dt = rng.random_range(-1.0..1.0);
        VariationSymbol { taus, vs, tau, dts, dt }
    }
}

/// First-order direction of a needle variation in the fiber of `TR x E` over
/// the extended trajectory at `tau`:
/// `f(tau) dt + B_{tau t0} c_init + sum_i B_{tau tau_i} [f(v_i) - f(u(tau_i))] dt_i`.
/// Index 0 is the cost direction.
pub fn needle_vector(
    sys: &ControlSystem,
    traj: &Trajectory,
    symbol: &VariationSymbol,
    c_init: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let grid = traj.grid();
    let (t0, t1) = (grid.t0(), grid.t1());
    if !(symbol.tau > t0 && symbol.tau <= t1) {
        return Err(Error::InvalidArgument(format!(
            "tau = {} outside ({t0}, {t1}]",
            symbol.tau
        )));
    }
    let ext = extend_system(sys);
    let m = ext.alg().fiber_dim();
    let u = &traj.control;
    let step = grid.step();
    let lift = |t: f64| ExtendedAlgebroid::embed_point(0.0, &traj.base_at(t));
    let transport = |from: f64, x: &[f64], y: &[f64]| -> Result<Vec<f64>> {
        if symbol.tau - from <= 1e-14 {
            return Ok(y.to_vec());
        }
        let iv = Interval::new(from, symbol.tau).with_step(step);
        Ok(transport_b(&ext, u, &iv, x, y)?.values.pop().unwrap())
    };

    let x_tau = lift(symbol.tau);
    let u_tau = u.value_at(symbol.tau.min(t1 - 1e-14));
    let mut d: Vec<f64> = ext.control(&x_tau, &u_tau).iter().map(|v| v * symbol.dt).collect();

    if let Some(c) = c_init {
        if c.len() != m {
            return Err(Error::dims("initial variation", m, c.len()));
        }
        for (di, ci) in d.iter_mut().zip(transport(t0, &lift(t0), c)?) {
            *di += ci;
        }
    }
    for ((&ti, v), &dti) in symbol.taus.iter().zip(&symbol.vs).zip(&symbol.dts) {
        if !u.is_continuity_point(ti) {
            return Err(Error::InvalidArgument(format!(
                "needle time {ti} is a control discontinuity"
            )));
        }
        if !(ti > t0 && ti <= symbol.tau) {
            return Err(Error::InvalidArgument(format!("needle time {ti} outside ({t0}, tau]")));
        }
        sys.check_control(v)?;
        if dti == 0.0 {
            continue;
        }
        let x = lift(ti);
        let ui = u.value_at(ti);
        let jump: Vec<f64> = ext
            .control(&x, v)
            .iter()
            .zip(ext.control(&x, &ui))
            .map(|(a, b)| (a - b) * dti)
            .collect();
        for (di, ci) in d.iter_mut().zip(transport(ti, &x, &jump)?) {
            *di += ci;
        }
    }
    Ok(d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    pub max_pairing: f64,
    pub worst_index: usize,
    pub samples: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks `<d, z_ext> <= tol` for every needle, i.e. that `z_ext` supports the
/// sampled cone.
pub fn cone_support_check(needles: &[Vec<f64>], z_ext: &[f64], tol: f64) -> Result<ConeReport> {
    if needles.is_empty() {
        return Err(Error::InvalidArgument("cone check needs at least one needle".into()));
    }
    let mut worst = (f64::NEG_INFINITY, 0);
    for (i, d) in needles.iter().enumerate() {
        if d.len() != z_ext.len() {
            return Err(Error::dims("needle vector", z_ext.len(), d.len()));
        }
        let p = dot(d, z_ext);
        if p > worst.0 {
            worst = (p, i);
        }
    }
    Ok(ConeReport {
        max_pairing: worst.0,
        worst_index: worst.1,
        samples: needles.len(),
        tolerance: tol,
        pass: worst.0 <= tol,
    })
}
