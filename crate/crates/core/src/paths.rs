//! Admissible paths, E-homotopies and their generation.

use std::path::Path;

use rayon::prelude::*;

use crate::algebroid::ChartAlgebroid;
use crate::error::{Error, Result};
use crate::numerics::{
    differentiate_on_grid, differentiate_uniform, integrate, interpolate_on_segment, max_abs_diff, norm, rhs_fn,
    TimeGrid,
};

/// Tolerance on the base jump at a breakpoint and on endpoint gaps when composing.
pub const CONTINUITY_TOL: f64 = 1e-9;
/// Default number of nodes on the homotopy parameter grid.
pub const DEFAULT_EPS_NODES: usize = 33;
/// χ-monitor level above which generation reports an admissibility warning.
pub const CHI_WARNING_THRESHOLD: f64 = 1e-4;

/// A sampled admissible path: base `x(t)` and fiber `a(t)` on the nodes of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct EPath {
    grid: TimeGrid,
    base: Vec<Vec<f64>>,
    fiber: Vec<Vec<f64>>,
}

impl EPath {
    pub fn new(grid: TimeGrid, base: Vec<Vec<f64>>, fiber: Vec<Vec<f64>>) -> Result<Self> {
        if base.len() != grid.len() {
            return Err(Error::dims("EPath: base samples", grid.len(), base.len()));
        }
        if fiber.len() != grid.len() {
            return Err(Error::dims("EPath: fiber samples", grid.len(), fiber.len()));
        }
        let (n, m) = (base[0].len(), fiber[0].len());
        if let Some(bad) = base.iter().find(|x| x.len() != n) {
            return Err(Error::dims("EPath: base sample", n, bad.len()));
        }
        if let Some(bad) = fiber.iter().find(|a| a.len() != m) {
            return Err(Error::dims("EPath: fiber sample", m, bad.len()));
        }
        for seg in grid.segments().iter().skip(1) {
            let jump = max_abs_diff(&base[seg.start - 1], &base[seg.start]);
            if jump > CONTINUITY_TOL {
                return Err(Error::InvalidArgument(format!(
                    "base jumps by {jump:e} at t = {}",
                    grid.nodes()[seg.start]
                )));
            }
        }
        Ok(EPath { grid, base, fiber })
    }

    /// Samples closed-form curves on `grid`.
    pub fn from_fn(grid: TimeGrid, x: impl Fn(f64) -> Vec<f64>, a: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let base = grid.nodes().iter().map(|&t| x(t)).collect();
        // Right-continuous fiber: the first copy of a breakpoint node takes the left limit.
        let fiber = sample_fiber(&grid, &a);
        EPath::new(grid, base, fiber)
    }

    /// The path of constant fiber value zero sitting at `x` for `duration`.
    pub fn null(x: Vec<f64>, fiber_dim: usize, t0: f64, duration: f64, step: f64) -> Result<Self> {
        let grid = TimeGrid::new(t0, t0 + duration, step)?;
        let k = grid.len();
        EPath::new(grid, vec![x; k], vec![vec![0.0; fiber_dim]; k])
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn base(&self) -> &[Vec<f64>] {
        &self.base
    }

    pub fn fiber(&self) -> &[Vec<f64>] {
        &self.fiber
    }

    pub fn base_dim(&self) -> usize {
        self.base[0].len()
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber[0].len()
    }

    pub fn start(&self) -> &[f64] {
        &self.base[0]
    }

    pub fn end(&self) -> &[f64] {
        self.base.last().unwrap()
    }

    /// Fiber value at `t`, interpolated inside the segment containing `t`.
    pub fn fiber_at(&self, t: f64) -> Vec<f64> {
        let k = self.grid.segment_at(t).min(self.grid.segments().len() - 1);
        interpolate_on_segment(&self.grid, &self.fiber, k, t)
    }

    pub fn base_at(&self, t: f64) -> Vec<f64> {
        let k = self.grid.segment_at(t).min(self.grid.segments().len() - 1);
        interpolate_on_segment(&self.grid, &self.base, k, t)
    }

    /// Columns `t, x_1..x_n, a_1..a_m`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.base_dim()).map(|i| format!("x_{i}")));
        header.extend((1..=self.fiber_dim()).map(|i| format!("a_{i}")));
        w.write_record(&header)?;
        for (i, &t) in self.grid.nodes().iter().enumerate() {
            let row: Vec<String> = std::iter::once(t)
                .chain(self.base[i].iter().copied())
                .chain(self.fiber[i].iter().copied())
                .map(|v| v.to_string())
                .collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn sample_fiber(grid: &TimeGrid, a: &impl Fn(f64) -> Vec<f64>) -> Vec<Vec<f64>> {
    let nodes = grid.nodes();
    let mut out = Vec::with_capacity(nodes.len());
    for (k, seg) in grid.segments().iter().enumerate() {
        let (lo, hi) = grid.segment_bounds(k);
        for i in seg.clone() {
            // Evaluate just inside the segment at its ends so that a
            // discontinuous `a` yields the one-sided limits.
            let t = nodes[i];
            let t = if i + 1 == seg.end && k + 1 < grid.segments().len() {
                hi - 1e-12 * (hi - lo)
            } else {
                t
            };
            out.push(a(t));
        }
    }
    out
}

/// `max |xdot - rho(x) a|` over the nodes, with `xdot` differenced per segment.
pub fn admissibility_residual(alg: &ChartAlgebroid, p: &EPath) -> Result<f64> {
    if p.grid.len() < 3 {
        return Err(Error::InvalidGrid("admissibility check needs at least 3 nodes".into()));
    }
    alg.check_point(p.start())?;
    if p.fiber_dim() != alg.fiber_dim() {
        return Err(Error::dims("admissibility: fiber", alg.fiber_dim(), p.fiber_dim()));
    }
    if alg.base_dim() == 0 {
        return Ok(0.0);
    }
    let xdot = differentiate_on_grid(&p.grid, &p.base);
    Ok(xdot
        .iter()
        .zip(&p.base)
        .zip(&p.fiber)
        .map(|((v, x), a)| max_abs_diff(v, &alg.anchor_apply_unchecked(x, a)))
        .fold(0.0, f64::max))
}

/// Concatenation `q` after `p`, with `q` shifted to start at the end time of `p`.
pub fn compose_paths(p: &EPath, q: &EPath) -> Result<EPath> {
    if p.base_dim() != q.base_dim() || p.fiber_dim() != q.fiber_dim() {
        return Err(Error::InvalidArgument(
            "composed paths live on different bundles".into(),
        ));
    }
    let gap = norm(&p.end().iter().zip(q.start()).map(|(a, b)| a - b).collect::<Vec<_>>());
    if gap > CONTINUITY_TOL {
        return Err(Error::CompositionGap { gap });
    }
    let shift = p.grid.t1() - q.grid.t0();
    let nodes: Vec<f64> = p
        .grid
        .nodes()
        .iter()
        .copied()
        .chain(q.grid.nodes().iter().map(|t| t + shift))
        .collect();
    let grid = TimeGrid::from_nodes(nodes)?;
    let mut base = p.base.clone();
    base.extend(q.base.iter().cloned());
    let last = p.grid.len() - 1;
    base[last + 1] = base[last].clone();
    let mut fiber = p.fiber.clone();
    fiber.extend(q.fiber.iter().cloned());
    EPath::new(grid, base, fiber)
}

/// Affine reparameterization onto `[0, 1]`: `a_bar(s) = T a(t0 + T s)`.
pub fn reparameterize_unit(p: &EPath) -> Result<EPath> {
    let (t0, t1) = (p.grid.t0(), p.grid.t1());
    let dur = t1 - t0;
    if t0 == 0.0 && t1 == 1.0 {
        return Ok(p.clone());
    }
    let nodes = p.grid.nodes().iter().map(|t| (t - t0) / dur).collect();
    let grid = TimeGrid::from_nodes(nodes)?;
    let fiber = p.fiber.iter().map(|a| a.iter().map(|v| dur * v).collect()).collect();
    EPath::new(grid, p.base.clone(), fiber)
}

/// A sampled one-parameter family of paths `(x(t, eps), a(t, eps))` on a
/// shared time grid and a uniform grid on `eps in [0, 1]`. Slices are indexed
/// `[eps][node]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathFamily {
    t_grid: TimeGrid,
    eps: Vec<f64>,
    base: Vec<Vec<Vec<f64>>>,
    fiber: Vec<Vec<Vec<f64>>>,
}

fn eps_grid(count: usize) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::InvalidGrid("need at least two eps nodes".into()));
    }
    Ok((0..count).map(|e| e as f64 / (count - 1) as f64).collect())
}

impl PathFamily {
    pub fn new(
        t_grid: TimeGrid,
        eps_nodes: usize,
        base: Vec<Vec<Vec<f64>>>,
        fiber: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let eps = eps_grid(eps_nodes)?;
        for (what, field) in [("family base", &base), ("family fiber", &fiber)] {
            if field.len() != eps.len() {
                return Err(Error::dims(what, eps.len(), field.len()));
            }
            if let Some(bad) = field.iter().find(|s| s.len() != t_grid.len()) {
                return Err(Error::dims(what, t_grid.len(), bad.len()));
            }
        }
        Ok(PathFamily {
            t_grid,
            eps,
            base,
            fiber,
        })
    }

    /// Samples closed-form `x(t, eps)` and `a(t, eps)`.
    pub fn from_fn(
        t_grid: TimeGrid,
        eps_nodes: usize,
        x: impl Fn(f64, f64) -> Vec<f64>,
        a: impl Fn(f64, f64) -> Vec<f64>,
    ) -> Result<Self> {
        let eps = eps_grid(eps_nodes)?;
        let base = eps
            .iter()
            .map(|&e| t_grid.nodes().iter().map(|&t| x(t, e)).collect())
            .collect();
        let fiber = eps.iter().map(|&e| sample_fiber(&t_grid, &|t| a(t, e))).collect();
        PathFamily::new(t_grid, eps_nodes, base, fiber)
    }

    /// Integrates `xdot = rho(x) a(t, eps)` from `x0(eps)` for every slice, so
    /// each slice is admissible up to integrator error.
    pub fn integrate(
        alg: &ChartAlgebroid,
        t_grid: TimeGrid,
        eps_nodes: usize,
        x0: impl Fn(f64) -> Vec<f64> + Sync,
        a: impl Fn(f64, f64) -> Vec<f64> + Sync,
    ) -> Result<Self> {
        let eps = eps_grid(eps_nodes)?;
        let n = alg.base_dim();
        let slices: Result<Vec<_>> = eps
            .par_iter()
            .map(|&e| {
                let start = x0(e);
                alg.check_point(&start)?;
                let rhs = rhs_fn(n, |_, t, x: &[f64], dx: &mut [f64]| {
                    dx.copy_from_slice(&alg.anchor_apply_unchecked(x, &a(t, e)));
                });
                let xs = integrate(&rhs, &t_grid, &start)?;
                Ok((xs, sample_fiber(&t_grid, &|t| a(t, e))))
            })
            .collect();
        let (base, fiber) = slices?.into_iter().unzip();
        PathFamily::new(t_grid, eps_nodes, base, fiber)
    }

    pub fn t_grid(&self) -> &TimeGrid {
        &self.t_grid
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn base(&self) -> &[Vec<Vec<f64>>] {
        &self.base
    }

    pub fn fiber(&self) -> &[Vec<Vec<f64>>] {
        &self.fiber
    }

    /// The path at eps node `e`.
    pub fn slice(&self, e: usize) -> Result<EPath> {
        EPath::new(self.t_grid.clone(), self.base[e].clone(), self.fiber[e].clone())
    }

    fn eps_step(&self) -> f64 {
        1.0 / (self.eps.len() - 1) as f64
    }

    /// `d/d eps` of a `[eps][node]` field, returned in the same layout.
    fn eps_derivative(&self, field: &[Vec<Vec<f64>>]) -> Vec<Vec<Vec<f64>>> {
        let (ne, nt) = (self.eps.len(), self.t_grid.len());
        let mut out = vec![Vec::with_capacity(nt); ne];
        for i in 0..nt {
            let column: Vec<Vec<f64>> = (0..ne).map(|e| field[e][i].clone()).collect();
            for (e, d) in differentiate_uniform(&column, self.eps_step()).into_iter().enumerate() {
                out[e].push(d);
            }
        }
        out
    }

    fn chi(&self, alg: &ChartAlgebroid, b: &[Vec<Vec<f64>>]) -> f64 {
        if alg.base_dim() == 0 {
            return 0.0;
        }
        let dx = self.eps_derivative(&self.base);
        let mut worst: f64 = 0.0;
        for e in 0..self.eps.len() {
            for i in 0..self.t_grid.len() {
                let rb = alg.anchor_apply_unchecked(&self.base[e][i], &b[e][i]);
                worst = worst.max(max_abs_diff(&dx[e][i], &rb));
            }
        }
        worst
    }
}

/// A candidate E-homotopy: a path family together with the infinitesimal
/// homotopy `b(t, eps)` on the same grids.
#[derive(Clone, Debug, PartialEq)]
pub struct HomotopyField {
    family: PathFamily,
    b: Vec<Vec<Vec<f64>>>,
}

/// Residuals of a sampled [`HomotopyField`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomotopyResidual {
    /// `max |d_t b - d_eps a - c(x)[b, a]|`.
    pub equation: f64,
    /// Worst admissibility residual of the `t`-slices `(x(., eps), a(., eps))`.
    pub t_admissibility: f64,
    /// Worst `|d_eps x - rho(x) b|` (the eps-slices).
    pub eps_admissibility: f64,
}

impl HomotopyResidual {
    pub fn max(&self) -> f64 {
        self.equation.max(self.t_admissibility).max(self.eps_admissibility)
    }
}

impl HomotopyField {
    pub fn new(family: PathFamily, b: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if b.len() != family.eps.len() {
            return Err(Error::dims("homotopy b field", family.eps.len(), b.len()));
        }
        if let Some(bad) = b.iter().find(|s| s.len() != family.t_grid.len()) {
            return Err(Error::dims("homotopy b slice", family.t_grid.len(), bad.len()));
        }
        Ok(HomotopyField { family, b })
    }

    pub fn family(&self) -> &PathFamily {
        &self.family
    }

    pub fn b(&self) -> &[Vec<Vec<f64>>] {
        &self.b
    }

    pub fn b_mut(&mut self) -> &mut [Vec<Vec<f64>>] {
        &mut self.b
    }

    /// The final infinitesimal homotopy `b(t1, .)` as a path in `eps`.
    pub fn final_b(&self) -> Vec<Vec<f64>> {
        self.b.iter().map(|s| s.last().unwrap().clone()).collect()
    }

    /// Columns `t, eps, x_1..x_n, a_1..a_m, b_1..b_m`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let fam = &self.family;
        let (n, m) = (fam.base[0][0].len(), fam.fiber[0][0].len());
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["t".to_string(), "eps".to_string()];
        header.extend((1..=n).map(|i| format!("x_{i}")));
        header.extend((1..=m).map(|i| format!("a_{i}")));
        header.extend((1..=m).map(|i| format!("b_{i}")));
        w.write_record(&header)?;
        for (e, &eps) in fam.eps.iter().enumerate() {
            for (i, &t) in fam.t_grid.nodes().iter().enumerate() {
                let row: Vec<String> = [t, eps]
                    .into_iter()
                    .chain(fam.base[e][i].iter().copied())
                    .chain(fam.fiber[e][i].iter().copied())
                    .chain(self.b[e][i].iter().copied())
                    .map(|v| v.to_string())
                    .collect();
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Strong-form residual of `d_t b = d_eps a + c(x)[b, a]` together with the
/// admissibility residuals of both slice directions. Derivatives are fourth
/// order differences, taken per segment in `t`.
pub fn homotopy_residual(alg: &ChartAlgebroid, h: &HomotopyField) -> Result<HomotopyResidual> {
    let fam = &h.family;
    if fam.t_grid.len() < 3 {
        return Err(Error::InvalidGrid(
            "homotopy residual needs at least 3 time nodes".into(),
        ));
    }
    let da = fam.eps_derivative(&fam.fiber);
    let mut equation: f64 = 0.0;
    let mut t_adm: f64 = 0.0;
    for e in 0..fam.eps.len() {
        let db = differentiate_on_grid(&fam.t_grid, &h.b[e]);
        for i in 0..fam.t_grid.len() {
            let x = &fam.base[e][i];
            let br = alg.structure(x).bracket(&h.b[e][i], &fam.fiber[e][i]);
            let r = (0..br.len())
                .map(|k| (db[i][k] - da[e][i][k] - br[k]).abs())
                .fold(0.0, f64::max);
            equation = equation.max(r);
        }
        t_adm = t_adm.max(admissibility_residual(alg, &fam.slice(e)?)?);
    }
    Ok(HomotopyResidual {
        equation,
        t_admissibility: t_adm,
        eps_admissibility: fam.chi(alg, &h.b),
    })
}

/// Output of [`generate_infinitesimal_homotopy`].
#[derive(Clone, Debug)]
pub struct GeneratedHomotopy {
    pub field: HomotopyField,
    /// `max |d_eps x - rho(x) b|` over the field.
    pub chi: f64,
    pub warning: Option<String>,
}

/// Solves `d_t b = d_eps a + c(x)[b, a]` slice by slice from `b(t0, eps) = b0[eps]`.
///
/// The eps-slices are integrated in parallel; each is independent, so the
/// result does not depend on scheduling.
pub fn generate_infinitesimal_homotopy(
    alg: &ChartAlgebroid,
    family: &PathFamily,
    b0: &[Vec<f64>],
) -> Result<GeneratedHomotopy> {
    let m = alg.fiber_dim();
    if b0.len() != family.eps.len() {
        return Err(Error::dims(
            "initial infinitesimal homotopy",
            family.eps.len(),
            b0.len(),
        ));
    }
    if let Some(bad) = b0.iter().find(|b| b.len() != m) {
        return Err(Error::dims("initial infinitesimal homotopy", m, bad.len()));
    }
    let da = family.eps_derivative(&family.fiber);
    let grid = &family.t_grid;
    let b: Result<Vec<Vec<Vec<f64>>>> = (0..family.eps.len())
        .into_par_iter()
        .map(|e| {
            let (xs, as_, das) = (&family.base[e], &family.fiber[e], &da[e]);
            let rhs = rhs_fn(m, |k, t, b: &[f64], db: &mut [f64]| {
                let x = interpolate_on_segment(grid, xs, k, t);
                let a = interpolate_on_segment(grid, as_, k, t);
                let d = interpolate_on_segment(grid, das, k, t);
                let br = alg.structure(&x).bracket(b, &a);
                for i in 0..m {
                    db[i] = d[i] + br[i];
                }
            });
            integrate(&rhs, grid, &b0[e])
        })
        .collect();
    let b = b?;
    let chi = family.chi(alg, &b);
    let warning = (chi > CHI_WARNING_THRESHOLD)
        .then(|| format!("chi-monitor {chi:e} exceeds {CHI_WARNING_THRESHOLD:e}: slices in eps are not admissible"));
    Ok(GeneratedHomotopy {
        field: HomotopyField::new(family.clone(), b)?,
        chi,
        warning,
    })
}

/// The homotopy `a_bar(t, eps) = eps a(t eps)`, `b_bar(t, eps) = t a(t eps)`
/// over `x(t eps)`, contracting a path on `[0, 1]` to the null path.
///
/// Values at `t eps` are interpolated from the samples of `p`, so the result
/// is accurate for paths that are smooth on `[0, 1]`.
pub fn shrink_homotopy(p: &EPath, eps_nodes: usize) -> Result<HomotopyField> {
    if p.grid.t0() != 0.0 || p.grid.t1() != 1.0 {
        return Err(Error::InvalidArgument(
            "shrink_homotopy expects a path on [0, 1]".into(),
        ));
    }
    let eps = eps_grid(eps_nodes)?;
    let nodes = p.grid.nodes();
    let mut base = Vec::with_capacity(eps.len());
    let mut fiber = Vec::with_capacity(eps.len());
    let mut b = Vec::with_capacity(eps.len());
    for &e in &eps {
        let (mut xs, mut as_, mut bs) = (Vec::new(), Vec::new(), Vec::new());
        for &t in nodes {
            let a = p.fiber_at(t * e);
            xs.push(p.base_at(t * e));
            as_.push(a.iter().map(|v| e * v).collect());
            bs.push(a.iter().map(|v| t * v).collect());
        }
        base.push(xs);
        fiber.push(as_);
        b.push(bs);
    }
    let family = PathFamily::new(p.grid.clone(), eps_nodes, base, fiber)?;
    HomotopyField::new(family, b)
}
