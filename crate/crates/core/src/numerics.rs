//! Fixed-step integration on segmented time grids, plus the finite-difference
//! and interpolation helpers shared by every flow in the crate.
//!
//! A [`TimeGrid`] is split into segments at its breakpoints. Each segment is
//! subdivided uniformly and RK4 never steps across a breakpoint. The node at a
//! breakpoint is stored twice (end of the left segment, start of the right
//! one) so that sampled fields may jump there while states stay continuous.

use std::ops::Range;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default integration step.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Default step for central finite differences of user-supplied fields.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

const BREAKPOINT_MERGE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    step: f64,
    breakpoints: Vec<f64>,
    nodes: Vec<f64>,
    segments: Vec<Range<usize>>,
}

impl TimeGrid {
    /// Uniform grid on `[t0, t1]` without breakpoints.
    pub fn new(t0: f64, t1: f64, step: f64) -> Result<Self> {
        Self::with_breakpoints(t0, t1, step, Vec::new())
    }

    /// Grid whose nodes include every breakpoint exactly.
    pub fn with_breakpoints(t0: f64, t1: f64, step: f64, mut breakpoints: Vec<f64>) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
            return Err(Error::InvalidGrid(format!("need t0 < t1, got [{t0}, {t1}]")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
        }
        if let Some(bad) = breakpoints.iter().find(|&&b| !(b > t0 && b < t1)) {
            return Err(Error::InvalidGrid(format!(
                "breakpoint {bad} outside the open interval ({t0}, {t1})"
            )));
        }
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup_by(|b, a| (*b - *a).abs() <= BREAKPOINT_MERGE);

        let mut edges = Vec::with_capacity(breakpoints.len() + 2);
        edges.push(t0);
        edges.extend_from_slice(&breakpoints);
        edges.push(t1);

        let mut nodes = Vec::new();
        let mut segments = Vec::with_capacity(edges.len() - 1);
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let n = (((b - a) / step) - 1e-9).ceil().max(1.0) as usize;
            let start = nodes.len();
            for i in 0..n {
                nodes.push(a + (b - a) * (i as f64) / (n as f64));
            }
            nodes.push(b);
            segments.push(start..nodes.len());
        }
        Ok(TimeGrid {
            t0,
            t1,
            step,
            breakpoints,
            nodes,
            segments,
        })
    }

    /// Rebuilds a grid from an explicit node list; repeated times mark breakpoints.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidGrid("need at least two nodes".into()));
        }
        let mut segments = Vec::new();
        let mut breakpoints = Vec::new();
        let mut start = 0;
        let mut step: f64 = 0.0;
        for i in 1..nodes.len() {
            let d = nodes[i] - nodes[i - 1];
            if !d.is_finite() || d < 0.0 {
                return Err(Error::InvalidGrid(format!("nodes not increasing at index {i}")));
            }
            if d == 0.0 {
                if i - start < 2 {
                    return Err(Error::InvalidGrid(format!("empty segment before index {i}")));
                }
                segments.push(start..i);
                breakpoints.push(nodes[i]);
                start = i;
            } else {
                step = step.max(d);
            }
        }
        if nodes.len() - start < 2 {
            return Err(Error::InvalidGrid("empty final segment".into()));
        }
        segments.push(start..nodes.len());
        Ok(TimeGrid {
            t0: nodes[0],
            t1: *nodes.last().unwrap(),
            step,
            breakpoints,
            nodes,
            segments,
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node index ranges, one per inter-breakpoint segment.
    pub fn segments(&self) -> &[Range<usize>] {
        &self.segments
    }

    pub fn segment_bounds(&self, k: usize) -> (f64, f64) {
        let r = &self.segments[k];
        (self.nodes[r.start], self.nodes[r.end - 1])
    }

    /// Segment containing `t`, right-continuous at breakpoints.
    pub fn segment_at(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= t)
    }

    /// Segment owning node `i` (a duplicated breakpoint node belongs to both
    /// neighbours; the left one is returned for the first copy).
    pub fn segment_of_node(&self, i: usize) -> usize {
        self.segments.partition_point(|r| r.end <= i)
    }

    /// True when node `i` sits on a breakpoint (either copy).
    pub fn is_breakpoint_node(&self, i: usize) -> bool {
        let t = self.nodes[i];
        self.breakpoints.contains(&t)
    }

    /// Uniform spacing inside segment `k`.
    pub fn segment_step(&self, k: usize) -> f64 {
        let r = &self.segments[k];
        (self.nodes[r.end - 1] - self.nodes[r.start]) / ((r.len() - 1) as f64)
    }
}

/// Right-hand side of `y' = F(t, y)`, smooth on each grid segment.
pub trait OdeRhs {
    fn dim(&self) -> usize;
    fn eval(&self, segment: usize, t: f64, y: &[f64], dydt: &mut [f64]);
}

/// Closure-backed [`OdeRhs`].
pub struct FnRhs<F> {
    dim: usize,
    f: F,
}

impl<F> OdeRhs for FnRhs<F>
where
    F: Fn(usize, f64, &[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, segment: usize, t: f64, y: &[f64], dydt: &mut [f64]) {
        (self.f)(segment, t, y, dydt)
    }
}

pub fn rhs_fn<F>(dim: usize, f: F) -> FnRhs<F>
where
    F: Fn(usize, f64, &[f64], &mut [f64]),
{
    FnRhs { dim, f }
}

/// One classical RK4 step of size `h` from `(t, y)`.
pub fn rk4_step<R: OdeRhs + ?Sized>(rhs: &R, segment: usize, t: f64, h: f64, y: &[f64]) -> Vec<f64> {
    let d = y.len();
    let mut k1 = vec![0.0; d];
    let mut k2 = vec![0.0; d];
    let mut k3 = vec![0.0; d];
    let mut k4 = vec![0.0; d];
    let mut tmp = vec![0.0; d];

    rhs.eval(segment, t, y, &mut k1);
    for i in 0..d {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    rhs.eval(segment, t + 0.5 * h, &tmp, &mut k2);
    for i in 0..d {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    rhs.eval(segment, t + 0.5 * h, &tmp, &mut k3);
    for i in 0..d {
        tmp[i] = y[i] + h * k3[i];
    }
    rhs.eval(segment, t + h, &tmp, &mut k4);
    // The weights are summed before scaling by h so that a unit field advances
    // exactly by h.
    (0..d)
        .map(|i| y[i] + h * ((k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0))
        .collect()
}

/// Integrates segment by segment and returns the state at every grid node.
pub fn integrate<R: OdeRhs + ?Sized>(rhs: &R, grid: &TimeGrid, y0: &[f64]) -> Result<Vec<Vec<f64>>> {
    if y0.len() != rhs.dim() {
        return Err(Error::dims("integrate: initial state", rhs.dim(), y0.len()));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("integrate: non-finite initial state".into()));
    }
    let nodes = grid.nodes();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(nodes.len());
    let mut y = y0.to_vec();
    for (k, seg) in grid.segments().iter().enumerate() {
        out.push(y.clone());
        for i in seg.start..seg.end - 1 {
            let (t, t_next) = (nodes[i], nodes[i + 1]);
            y = rk4_step(rhs, k, t, t_next - t, &y);
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::IntegrationDiverged { t: t_next });
            }
            out.push(y.clone());
        }
    }
    Ok(out)
}

/// Central-difference Jacobian, `k x n`, column `j` is `(f(x+h e_j) - f(x-h e_j)) / 2h`.
pub fn finite_difference_jacobian<F>(f: F, x: &[f64], h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    Ok(fd_jacobian(f, x, h))
}

pub(crate) fn fd_jacobian<F>(f: F, x: &[f64], h: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x.len();
    let k = f(x).len();
    let mut jac = DMatrix::zeros(k, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        xp[j] = x[j] + h;
        let fp = f(&xp);
        xp[j] = x[j] - h;
        let fm = f(&xp);
        xp[j] = x[j];
        for i in 0..k {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Derivative of uniformly spaced samples, fourth order when at least five
/// samples are available (one-sided stencils at the ends).
pub fn differentiate_uniform(values: &[Vec<f64>], h: f64) -> Vec<Vec<f64>> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let d = values[0].len();
    let combo = |idx: &[usize], w: &[f64], scale: f64| -> Vec<f64> {
        (0..d)
            .map(|c| idx.iter().zip(w).map(|(&i, &wi)| wi * values[i][c]).sum::<f64>() / scale)
            .collect()
    };
    match n {
        1 => vec![vec![0.0; d]],
        2 => {
            let v = combo(&[0, 1], &[-1.0, 1.0], h);
            vec![v.clone(), v]
        }
        3 | 4 => (0..n)
            .map(|i| {
                if i == 0 {
                    combo(&[0, 1, 2], &[-3.0, 4.0, -1.0], 2.0 * h)
                } else if i == n - 1 {
                    combo(&[n - 1, n - 2, n - 3], &[3.0, -4.0, 1.0], 2.0 * h)
                } else {
                    combo(&[i - 1, i + 1], &[-1.0, 1.0], 2.0 * h)
                }
            })
            .collect(),
        _ => (0..n)
            .map(|i| {
                let s = 12.0 * h;
                if i == 0 {
                    combo(&[0, 1, 2, 3, 4], &[-25.0, 48.0, -36.0, 16.0, -3.0], s)
                } else if i == 1 {
                    combo(&[0, 1, 2, 3, 4], &[-3.0, -10.0, 18.0, -6.0, 1.0], s)
                } else if i == n - 2 {
                    combo(&[n - 1, n - 2, n - 3, n - 4, n - 5], &[3.0, 10.0, -18.0, 6.0, -1.0], s)
                } else if i == n - 1 {
                    combo(
                        &[n - 1, n - 2, n - 3, n - 4, n - 5],
                        &[25.0, -48.0, 36.0, -16.0, 3.0],
                        s,
                    )
                } else {
                    combo(&[i - 2, i - 1, i + 1, i + 2], &[1.0, -8.0, 8.0, -1.0], s)
                }
            })
            .collect(),
    }
}

/// Time derivative of node samples, computed per segment so that jumps at
/// breakpoints never enter a stencil.
pub fn differentiate_on_grid(grid: &TimeGrid, values: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(values.len());
    for (k, seg) in grid.segments().iter().enumerate() {
        out.extend(differentiate_uniform(&values[seg.clone()], grid.segment_step(k)));
    }
    out
}

/// Local cubic Lagrange interpolation of uniformly spaced samples starting at
/// `a` with spacing `h`; `t` is clamped to the sampled range.
pub fn interpolate_uniform(a: f64, h: f64, values: &[Vec<f64>], t: f64) -> Vec<f64> {
    let n = values.len();
    if n == 1 {
        return values[0].clone();
    }
    let s = ((t - a) / h).clamp(0.0, (n - 1) as f64);
    let width = n.min(4);
    let k = (s.floor() as usize).min(n - 2);
    let start = k.saturating_sub(1).min(n - width);
    let d = values[0].len();
    let mut out = vec![0.0; d];
    for j in start..start + width {
        let mut w = 1.0;
        for l in start..start + width {
            if l != j {
                w *= (s - l as f64) / (j as f64 - l as f64);
            }
        }
        for c in 0..d {
            out[c] += w * values[j][c];
        }
    }
    out
}

/// Interpolates node samples at `t` inside segment `k` of `grid`.
pub fn interpolate_on_segment(grid: &TimeGrid, values: &[Vec<f64>], k: usize, t: f64) -> Vec<f64> {
    let seg = grid.segments()[k].clone();
    let a = grid.nodes()[seg.start];
    interpolate_uniform(a, grid.segment_step(k), &values[seg], t)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_rhs() -> impl OdeRhs {
        rhs_fn(1, |_, _, y: &[f64], dy: &mut [f64]| dy[0] = y[0])
    }

    #[test]
    fn zero_field_keeps_initial_value_exactly() {
        let grid = TimeGrid::new(0.0, 1.0, 1e-2).unwrap();
        let rhs = rhs_fn(1, |_, _, _: &[f64], dy: &mut [f64]| dy[0] = 0.0);
        let ys = integrate(&rhs, &grid, &[3.0]).unwrap();
        assert!(ys.iter().all(|y| y[0] == 3.0));
    }

    #[test]
    fn exponential_matches_closed_form() {
        let grid = TimeGrid::new(0.0, 1.0, 1e-3).unwrap();
        let ys = integrate(&exp_rhs(), &grid, &[1.0]).unwrap();
        assert!((ys.last().unwrap()[0] - std::f64::consts::E).abs() < 1e-9);
    }

    #[test]
    fn rk4_error_ratio_on_halving() {
        let err = |h: f64| {
            let grid = TimeGrid::new(0.0, 1.0, h).unwrap();
            let ys = integrate(&exp_rhs(), &grid, &[1.0]).unwrap();
            (ys.last().unwrap()[0] - std::f64::consts::E).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio >= 12.0, "ratio {ratio}");
    }

    #[test]
    fn breakpoint_is_a_node_and_switch_is_honoured() {
        let grid = TimeGrid::with_breakpoints(0.0, 1.0, 0.03, vec![0.5]).unwrap();
        assert!(grid.nodes().iter().filter(|&&t| t == 0.5).count() == 2);
        let rhs = rhs_fn(1, |seg, _, _: &[f64], dy: &mut [f64]| {
            dy[0] = if seg == 0 { 1.0 } else { -1.0 }
        });
        let ys = integrate(&rhs, &grid, &[0.0]).unwrap();
        let mid = grid.nodes().iter().position(|&t| t == 0.5).unwrap();
        assert!((ys[mid][0] - 0.5).abs() < 1e-14);
        assert!(ys.last().unwrap()[0].abs() < 1e-14);
    }

    #[test]
    fn inserting_breakpoint_in_smooth_field_is_harmless() {
        let plain = TimeGrid::new(0.0, 1.0, 1e-3).unwrap();
        let split = TimeGrid::with_breakpoints(0.0, 1.0, 1e-3, vec![0.3337]).unwrap();
        let a = integrate(&exp_rhs(), &plain, &[1.0]).unwrap();
        let b = integrate(&exp_rhs(), &split, &[1.0]).unwrap();
        let (ya, yb) = (a.last().unwrap()[0], b.last().unwrap()[0]);
        assert!(((ya - yb) / ya).abs() < 1e-12);
    }

    #[test]
    fn divergence_reports_time() {
        let grid = TimeGrid::new(0.0, 1.0, 0.1).unwrap();
        let rhs = rhs_fn(1, |_, t, _: &[f64], dy: &mut [f64]| {
            dy[0] = if t > 0.45 { f64::NAN } else { 0.0 }
        });
        match integrate(&rhs, &grid, &[0.0]) {
            Err(Error::IntegrationDiverged { t }) => assert!((t - 0.5).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(TimeGrid::new(1.0, 0.0, 0.1).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0.0).is_err());
        assert!(TimeGrid::with_breakpoints(0.0, 1.0, 0.1, vec![1.0]).is_err());
    }

    #[test]
    fn from_nodes_round_trips() {
        let grid = TimeGrid::with_breakpoints(0.0, 2.0, 0.07, vec![0.5, 1.25]).unwrap();
        let back = TimeGrid::from_nodes(grid.nodes().to_vec()).unwrap();
        assert_eq!(back.segments(), grid.segments());
        assert_eq!(back.breakpoints(), grid.breakpoints());
    }

    #[test]
    fn jacobian_examples() {
        let id = finite_difference_jacobian(|x| x.to_vec(), &[0.3, -1.0], 1e-5).unwrap();
        assert!((id - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-10);
        let sq = finite_difference_jacobian(|x| vec![x[0] * x[0]], &[2.0], 1e-5).unwrap();
        assert!((sq[(0, 0)] - 4.0).abs() < 1e-8);
        let c = finite_difference_jacobian(|_| vec![1.0, 2.0], &[0.1, 0.2, 0.3], 1e-5).unwrap();
        assert_eq!(c, DMatrix::zeros(2, 3));
        assert!(finite_difference_jacobian(|x| x.to_vec(), &[1.0], 0.0).is_err());
    }

    #[test]
    fn differentiation_is_exact_for_quartics() {
        let h = 0.1;
        let vals: Vec<Vec<f64>> = (0..9).map(|i| vec![(i as f64 * h).powi(4)]).collect();
        let d = differentiate_uniform(&vals, h);
        for (i, v) in d.iter().enumerate() {
            let t = i as f64 * h;
            assert!((v[0] - 4.0 * t.powi(3)).abs() < 1e-10, "node {i}");
        }
    }

    #[test]
    fn interpolation_is_exact_for_cubics() {
        let h = 0.25;
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t * t * t;
        let vals: Vec<Vec<f64>> = (0..6).map(|i| vec![f(i as f64 * h)]).collect();
        for &t in &[0.0, 0.1, 0.62, 1.19, 1.25] {
            assert!((interpolate_uniform(0.0, h, &vals, t)[0] - f(t)).abs() < 1e-12);
        }
    }
}
