//! Wave-speed models, exact reference solutions, data domains and travel-time
//! thresholds for the geometric control condition.

use std::f64::consts::PI;

use crate::error::{config, domain, Result};
use crate::mesh::{CellBox, SpatialMesh, MERGE_TOL};

/// Default spatial frequency in the first subdomain.
pub const W1_DEFAULT: f64 = 3.0 * PI;

/// Piecewise-constant wave speed depending on the x coordinate only.
///
/// `speeds[i]` holds on `(breakpoints[i-1], breakpoints[i])`, with the
/// outer pieces extending to the domain boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSpeedModel {
    pub breakpoints: Vec<f64>,
    pub speeds: Vec<f64>,
}

impl WaveSpeedModel {
    pub fn new(breakpoints: Vec<f64>, speeds: Vec<f64>) -> Result<Self> {
        if speeds.len() != breakpoints.len() + 1 {
            return config("need exactly one more speed than interface");
        }
        if speeds.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return config(format!("wave speeds must be positive, got {speeds:?}"));
        }
        if breakpoints.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
            return config(format!("interfaces must lie inside (0, 1), got {breakpoints:?}"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return config("interfaces must be strictly increasing");
        }
        Ok(WaveSpeedModel { breakpoints, speeds })
    }

    pub fn homogeneous(c: f64) -> Result<Self> {
        Self::new(vec![], vec![c])
    }

    /// Two media split at `x = 0.5`.
    pub fn two_layer(c1: f64, c2: f64) -> Result<Self> {
        Self::new(vec![0.5], vec![c1, c2])
    }

    /// Speed at `x`; at an interface the right-hand value is returned.
    pub fn speed(&self, x: f64) -> f64 {
        let i = self.breakpoints.partition_point(|&p| p <= x);
        self.speeds[i]
    }

    /// `c^2` on every mesh cell. Fails if an interface cuts a cell.
    pub fn c2_per_cell(&self, mesh: &SpatialMesh) -> Result<Vec<f64>> {
        (0..mesh.n_cells())
            .map(|c| {
                let b = mesh.cell_box(c);
                if self
                    .breakpoints
                    .iter()
                    .any(|&p| p > b.lo[0] + MERGE_TOL && p < b.hi[0] - MERGE_TOL)
                {
                    return domain(format!("mesh is not fitted to the interfaces (cell {c})"));
                }
                let c = self.speed(b.center()[0]);
                Ok(c * c)
            })
            .collect()
    }

    /// Travel time `int_0^x 1/c`.
    pub fn travel_time(&self, x: f64) -> f64 {
        let mut edges = vec![0.0];
        edges.extend(self.breakpoints.iter().copied());
        edges.push(1.0);
        let mut tau = 0.0;
        for (i, w) in edges.windows(2).enumerate() {
            if x <= w[0] {
                break;
            }
            tau += (x.min(w[1]) - w[0]) / self.speeds[i];
        }
        tau
    }
}

/// Space-time derivatives of a scalar function at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Derivatives {
    pub u: f64,
    pub ut: f64,
    pub utt: f64,
    pub ux: f64,
    pub uxx: f64,
}

/// Shape of the solution on one subdomain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `cos(omega_t t) cos(w (x - shift))`
    Trig { omega_t: f64, w: f64, shift: f64 },
    /// `(1 + t)(intercept + slope x)`
    Linear { intercept: f64, slope: f64 },
}

impl Profile {
    pub fn derivatives(&self, t: f64, x: f64) -> Derivatives {
        match *self {
            Profile::Trig { omega_t, w, shift } => {
                let (st, ct) = (omega_t * t).sin_cos();
                let (sx, cx) = (w * (x - shift)).sin_cos();
                Derivatives {
                    u: ct * cx,
                    ut: -omega_t * st * cx,
                    utt: -omega_t * omega_t * ct * cx,
                    ux: -w * ct * sx,
                    uxx: -w * w * ct * cx,
                }
            }
            Profile::Linear { intercept, slope } => {
                let f = intercept + slope * x;
                Derivatives { u: (1.0 + t) * f, ut: f, utt: 0.0, ux: (1.0 + t) * slope, uxx: 0.0 }
            }
        }
    }
}

/// Exact solutions used as ground truth.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactSolution {
    /// Identically zero.
    Zero,
    /// One interface at 0.5 with `w2 = w1 c1 / c2`.
    Simple { c1: f64, c2: f64, w1: f64 },
    /// Two interfaces `p1 < p2` with `c3 = c1`, `w3 = w1`.
    MultiJump { p1: f64, p2: f64, n: i64, c1: f64, c2: f64, w1: f64 },
    /// Space-time bilinear on each of two layers, flux-continuous at 0.5.
    /// Lies in every discrete space with `k, q >= 1`.
    PiecewiseLinear { c1: f64, c2: f64 },
}

/// `p2 = (2 pi n + w2 p1) / w2`, which makes `cos(w2 (p2 - p1)) = 1`.
pub fn multi_jump_p2(p1: f64, n: i64, c1: f64, c2: f64, w1: f64) -> Result<f64> {
    let w2 = w1 * c1 / c2;
    let p2 = (2.0 * PI * n as f64 + w2 * p1) / w2;
    if !(p2 > p1 && p2 < 1.0) {
        return config(format!("derived p2 = {p2} is not in (p1, 1) = ({p1}, 1)"));
    }
    Ok(p2)
}

impl ExactSolution {
    pub fn simple(c1: f64) -> Self {
        ExactSolution::Simple { c1, c2: 1.0, w1: W1_DEFAULT }
    }

    pub fn multi_jump(p1: f64, n: i64, c1: f64) -> Result<Self> {
        let p2 = multi_jump_p2(p1, n, c1, 1.0, W1_DEFAULT)?;
        Ok(ExactSolution::MultiJump { p1, p2, n, c1, c2: 1.0, w1: W1_DEFAULT })
    }

    /// Subdomain pieces `(lo, hi, profile)` covering `[0, 1]`.
    pub fn pieces(&self) -> Vec<(f64, f64, Profile)> {
        match *self {
            ExactSolution::Zero => vec![(0.0, 1.0, Profile::Linear { intercept: 0.0, slope: 0.0 })],
            ExactSolution::Simple { c1, c2, w1 } => {
                let w2 = w1 * c1 / c2;
                vec![
                    (0.0, 0.5, Profile::Trig { omega_t: w1 * c1, w: w1, shift: 0.5 }),
                    (0.5, 1.0, Profile::Trig { omega_t: w2 * c2, w: w2, shift: 0.5 }),
                ]
            }
            ExactSolution::MultiJump { p1, p2, c1, c2, w1, .. } => {
                let w2 = w1 * c1 / c2;
                let (c3, w3) = (c1, w1);
                vec![
                    (0.0, p1, Profile::Trig { omega_t: w1 * c1, w: w1, shift: p1 }),
                    (p1, p2, Profile::Trig { omega_t: w2 * c2, w: w2, shift: p1 }),
                    (p2, 1.0, Profile::Trig { omega_t: w3 * c3, w: w3, shift: p2 }),
                ]
            }
            ExactSolution::PiecewiseLinear { c1, c2 } => {
                let (s1, s2) = (1.0 / (c1 * c1), 1.0 / (c2 * c2));
                vec![
                    (0.0, 0.5, Profile::Linear { intercept: 0.0, slope: s1 }),
                    (0.5, 1.0, Profile::Linear { intercept: 0.5 * (s1 - s2), slope: s2 }),
                ]
            }
        }
    }

    /// The wave speed the solution was built for.
    pub fn speed_model(&self) -> Result<WaveSpeedModel> {
        match *self {
            ExactSolution::Zero => WaveSpeedModel::homogeneous(1.0),
            ExactSolution::Simple { c1, c2, .. } | ExactSolution::PiecewiseLinear { c1, c2 } => {
                WaveSpeedModel::two_layer(c1, c2)
            }
            ExactSolution::MultiJump { p1, p2, c1, c2, .. } => {
                WaveSpeedModel::new(vec![p1, p2], vec![c1, c2, c1])
            }
        }
    }

    /// Interface positions along x.
    pub fn interfaces(&self) -> Vec<f64> {
        let p = self.pieces();
        p[..p.len() - 1].iter().map(|&(_, hi, _)| hi).collect()
    }

    fn piece_at(&self, x: f64) -> Profile {
        let pieces = self.pieces();
        let i = pieces.iter().position(|&(_, hi, _)| x < hi).unwrap_or(pieces.len() - 1);
        pieces[i].2
    }

    /// All derivatives at `(t, x)`; only the first coordinate of `x` is used.
    pub fn derivatives(&self, t: f64, x: &[f64]) -> Derivatives {
        self.piece_at(x[0]).derivatives(t, x[0])
    }
}

/// A scalar function of `(t, x)` with a time derivative, used as reference
/// in error computations.
pub trait SpaceTimeFunction {
    fn value(&self, t: f64, x: &[f64]) -> f64;
    fn d_t(&self, t: f64, x: &[f64]) -> f64;
}

impl SpaceTimeFunction for ExactSolution {
    fn value(&self, t: f64, x: &[f64]) -> f64 {
        self.derivatives(t, x).u
    }

    fn d_t(&self, t: f64, x: &[f64]) -> f64 {
        self.derivatives(t, x).ut
    }
}

/// Adapter turning a pair of closures into a [`SpaceTimeFunction`].
#[derive(Debug, Clone, Copy)]
pub struct FnPair<F, G>(pub F, pub G);

impl<F, G> SpaceTimeFunction for FnPair<F, G>
where
    F: Fn(f64, &[f64]) -> f64,
    G: Fn(f64, &[f64]) -> f64,
{
    fn value(&self, t: f64, x: &[f64]) -> f64 {
        (self.0)(t, x)
    }

    fn d_t(&self, t: f64, x: &[f64]) -> f64 {
        (self.1)(t, x)
    }
}

/// `u(x, t)` and `d_t u` of the single-interface solution.
pub fn exact_simple(x: f64, t: f64, c1: f64) -> (f64, f64) {
    let d = ExactSolution::simple(c1).derivatives(t, &[x]);
    (d.u, d.ut)
}

/// `u(x, t)` and `d_t u` of the two-interface solution.
pub fn exact_multijump(x: f64, t: f64, p1: f64, n: i64, c1: f64) -> Result<(f64, f64)> {
    let d = ExactSolution::multi_jump(p1, n, c1)?.derivatives(t, &[x]);
    Ok((d.u, d.ut))
}

/// y-independent extension of [`exact_simple`] to the unit square.
pub fn exact_2d(x: f64, _y: f64, t: f64, c1: f64) -> (f64, f64) {
    exact_simple(x, t, c1)
}

/// A subset of the domain made of axis-aligned boxes, or the complement of
/// such a union.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub dim: usize,
    pub boxes: Vec<CellBox>,
    pub complement: bool,
}

impl Region {
    pub fn full(dim: usize) -> Self {
        Region { dim, boxes: vec![], complement: true }
    }

    /// Union of closed intervals of `[0, 1]`.
    pub fn intervals(iv: &[(f64, f64)]) -> Result<Self> {
        let boxes = iv
            .iter()
            .map(|&(a, b)| {
                if !(0.0 <= a && a < b && b <= 1.0) {
                    return config(format!("invalid interval [{a}, {b}]"));
                }
                Ok(CellBox { lo: [a, 0.0], hi: [b, 1.0] })
            })
            .collect::<Result<_>>()?;
        Ok(Region { dim: 1, boxes, complement: false })
    }

    pub fn from_boxes(dim: usize, boxes: Vec<CellBox>, complement: bool) -> Self {
        Region { dim, boxes, complement }
    }

    /// `[0,1]^2` minus `[0.25, 0.75]^2`.
    pub fn square_frame() -> Self {
        Region {
            dim: 2,
            boxes: vec![CellBox { lo: [0.25, 0.25], hi: [0.75, 0.75] }],
            complement: true,
        }
    }

    pub fn complement(&self) -> Self {
        Region { dim: self.dim, boxes: self.boxes.clone(), complement: !self.complement }
    }

    pub fn is_empty(&self) -> bool {
        !self.complement && self.boxes.is_empty()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let inside = self
            .boxes
            .iter()
            .any(|b| (0..self.dim).all(|a| x[a] >= b.lo[a] - MERGE_TOL && x[a] <= b.hi[a] + MERGE_TOL));
        inside != self.complement
    }

    fn contains_open(&self, x: &[f64]) -> bool {
        let inside = self
            .boxes
            .iter()
            .any(|b| (0..self.dim).all(|a| x[a] > b.lo[a] && x[a] < b.hi[a]));
        inside != self.complement
    }

    /// Per-cell membership. Fails when some cell is only partly covered.
    pub fn cell_indicator(&self, mesh: &SpatialMesh) -> Result<Vec<bool>> {
        let dim = mesh.dim();
        (0..mesh.n_cells())
            .map(|c| {
                let b = mesh.cell_box(c);
                let probe = |s: [f64; 2]| {
                    let mut x = [0.0; 2];
                    for a in 0..dim {
                        x[a] = b.lo[a] + s[a] * b.width(a);
                    }
                    self.contains_open(&x)
                };
                let centre = probe([0.5, 0.5]);
                let eps = 1e-7;
                let corners = [[eps, eps], [1.0 - eps, eps], [eps, 1.0 - eps], [1.0 - eps, 1.0 - eps]];
                if corners.iter().any(|&s| probe(s) != centre) {
                    return domain(format!("mesh is not fitted to the region (cell {c})"));
                }
                Ok(centre)
            })
            .collect()
    }

    /// Breakpoints along `axis` that a fitted mesh must contain.
    pub fn breakpoints(&self, axis: usize) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .boxes
            .iter()
            .flat_map(|b| [b.lo[axis], b.hi[axis]])
            .filter(|&p| p > MERGE_TOL && p < 1.0 - MERGE_TOL)
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOL);
        out
    }

    /// The region as disjoint sorted closed intervals of `[0, 1]` (1D only).
    pub fn intervals_1d(&self) -> Vec<(f64, f64)> {
        let mut iv: Vec<(f64, f64)> = self.boxes.iter().map(|b| (b.lo[0], b.hi[0])).collect();
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = vec![];
        for (a, b) in iv {
            match merged.last_mut() {
                Some(last) if a <= last.1 + MERGE_TOL => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        if !self.complement {
            return merged;
        }
        let mut out = vec![];
        let mut start = 0.0;
        for (a, b) in merged {
            if a > start + MERGE_TOL {
                out.push((start, a));
            }
            start = b;
        }
        if start < 1.0 - MERGE_TOL {
            out.push((start, 1.0));
        }
        out
    }
}

/// Measurements `u_omega`: the exact solution restricted to `omega_T`.
#[derive(Debug, Clone)]
pub struct DataFunctional<'a> {
    pub solution: &'a ExactSolution,
    pub omega: &'a Region,
}

impl DataFunctional<'_> {
    /// `Some(u(t, x))` inside `omega`, `None` outside.
    pub fn sample(&self, t: f64, x: &[f64]) -> Option<f64> {
        self.omega.contains(x).then(|| self.solution.value(t, x))
    }
}

pub fn sample_data<'a>(solution: &'a ExactSolution, omega: &'a Region) -> DataFunctional<'a> {
    DataFunctional { solution, omega }
}

/// `dist_c(x, omega)` in the travel-time metric.
pub fn travel_distance(c: &WaveSpeedModel, intervals: &[(f64, f64)], x: f64) -> f64 {
    let tx = c.travel_time(x);
    intervals
        .iter()
        .map(|&(a, b)| {
            if x >= a && x <= b {
                0.0
            } else {
                (tx - c.travel_time(a)).abs().min((tx - c.travel_time(b)).abs())
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Travel-time threshold `T_min = 2 sup_x dist_c(x, omega)` in 1D.
///
/// The supremum is attained at a domain endpoint or at the travel-time
/// midpoint of a gap between two data intervals, so only that finite set is
/// checked (plus interfaces and interval ends).
pub fn gcc_threshold(c: &WaveSpeedModel, omega: &Region) -> Result<f64> {
    if omega.dim != 1 {
        return domain("travel-time thresholds are only implemented in 1D");
    }
    let iv = omega.intervals_1d();
    if iv.is_empty() {
        return domain("data domain is empty");
    }
    let mut candidates = vec![0.0, 1.0];
    candidates.extend(c.breakpoints.iter().copied());
    for &(a, b) in &iv {
        candidates.push(a);
        candidates.push(b);
    }
    for w in iv.windows(2) {
        let target = 0.5 * (c.travel_time(w[0].1) + c.travel_time(w[1].0));
        candidates.push(invert_travel_time(c, target));
    }
    Ok(2.0 * candidates.iter().map(|&x| travel_distance(c, &iv, x)).fold(0.0, f64::max))
}

fn invert_travel_time(c: &WaveSpeedModel, tau: f64) -> f64 {
    let mut edges = vec![0.0];
    edges.extend(c.breakpoints.iter().copied());
    edges.push(1.0);
    let mut acc = 0.0;
    for (i, w) in edges.windows(2).enumerate() {
        let piece = (w[1] - w[0]) / c.speeds[i];
        if tau <= acc + piece {
            return w[0] + (tau - acc) * c.speeds[i];
        }
        acc += piece;
    }
    1.0
}

/// `0.25 (1 + 1/c1)` for the two-layer setup with `c2 = 1` and data on
/// `[0, 0.25] U [0.75, 1]`.
pub fn simple_gcc_threshold(c1: f64) -> f64 {
    0.25 * (1.0 + 1.0 / c1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple_omega() -> Region {
        Region::intervals(&[(0.0, 0.25), (0.75, 1.0)]).unwrap()
    }

    #[test]
    fn simple_solution_values() {
        for c1 in [1.0, 2.5, 4.5] {
            assert!((exact_simple(0.5, 0.0, c1).0 - 1.0).abs() < 1e-15);
            for t in [0.0, 0.2, 0.37] {
                assert!(exact_simple(0.0, t, c1).0.abs() < 1e-15);
            }
        }
        let s = ExactSolution::simple(2.5);
        let p = s.pieces();
        let l = p[0].2.derivatives(0.3, 0.5).u;
        let r = p[1].2.derivatives(0.3, 0.5).u;
        assert!((l - r).abs() < 1e-14);
    }

    #[test]
    fn multijump_p2() {
        let p2 = multi_jump_p2(0.4, 3, 7.5, 1.0, W1_DEFAULT).unwrap();
        assert!((p2 - 15.0 / 22.5).abs() < 1e-14);
        assert!((p2 - 0.667).abs() < 1e-3);
        let p2 = multi_jump_p2(0.4, 1, 2.5, 1.0, W1_DEFAULT).unwrap();
        assert!((p2 - 2.0 / 3.0).abs() < 1e-14);
        assert!(multi_jump_p2(0.4, 100, 2.5, 1.0, W1_DEFAULT).is_err());
        assert!(multi_jump_p2(0.4, 0, 2.5, 1.0, W1_DEFAULT).is_err());

        let s = ExactSolution::multi_jump(0.4, 3, 7.5).unwrap();
        let p = s.pieces();
        let (b2, b3) = (p[1].2.derivatives(0.1, p[1].1).u, p[2].2.derivatives(0.1, p[2].0).u);
        assert!((b2 - b3).abs() < 1e-13);
    }

    #[test]
    fn two_d_is_y_independent() {
        assert!((exact_2d(0.5, 0.3, 0.0, 2.5).0 - 1.0).abs() < 1e-15);
        let e = 1e-6;
        let d = (exact_2d(0.3, 0.4 + e, 0.2, 2.5).0 - exact_2d(0.3, 0.4 - e, 0.2, 2.5).0) / (2.0 * e);
        assert!(d.abs() < 1e-8);
        for y in [0.0, 0.5, 1.0] {
            assert!(exact_2d(0.0, y, 0.3, 2.5).0.abs() < 1e-15);
        }
    }

    #[test]
    fn speed_model_cells() {
        let m = SpatialMesh::OneD(crate::mesh::build_mesh_1d(1, &[]).unwrap());
        let c = WaveSpeedModel::two_layer(2.5, 1.0).unwrap();
        assert_eq!(c.c2_per_cell(&m).unwrap(), vec![6.25, 6.25, 1.0, 1.0]);
        let bad = WaveSpeedModel::new(vec![0.3], vec![2.0, 1.0]).unwrap();
        assert!(bad.c2_per_cell(&m).is_err());
        assert!(WaveSpeedModel::new(vec![0.5], vec![-1.0, 1.0]).is_err());
    }

    #[test]
    fn region_indicator_and_intervals() {
        let m = SpatialMesh::OneD(crate::mesh::build_mesh_1d(1, &[]).unwrap());
        let w = simple_omega();
        assert_eq!(w.cell_indicator(&m).unwrap(), vec![true, false, false, true]);
        assert_eq!(w.complement().intervals_1d(), vec![(0.25, 0.75)]);
        let bad = Region::intervals(&[(0.0, 0.3)]).unwrap();
        assert!(bad.cell_indicator(&m).is_err());
        let m2 = SpatialMesh::TwoD(crate::mesh::build_mesh_2d(1).unwrap());
        let frame = Region::square_frame().cell_indicator(&m2).unwrap();
        assert_eq!(frame.iter().filter(|&&b| b).count(), 12);
    }

    #[test]
    fn data_sampling() {
        let s = ExactSolution::simple(2.5);
        let w = simple_omega();
        let d = sample_data(&s, &w);
        assert_eq!(d.sample(0.2, &[0.5]), None);
        assert_eq!(d.sample(0.2, &[0.1]), Some(exact_simple(0.1, 0.2, 2.5).0));
    }

    #[test]
    fn gcc_thresholds() {
        let c = WaveSpeedModel::two_layer(2.5, 1.0).unwrap();
        let t = gcc_threshold(&c, &simple_omega()).unwrap();
        assert!((t - 0.35).abs() < 1e-12, "{t}");
        assert!((t - simple_gcc_threshold(2.5)).abs() < 1e-12);
        let c = WaveSpeedModel::homogeneous(1.0).unwrap();
        assert!((gcc_threshold(&c, &simple_omega()).unwrap() - 0.5).abs() < 1e-12);

        let s = ExactSolution::multi_jump(0.4, 3, 7.5).unwrap();
        let c = s.speed_model().unwrap();
        let t = gcc_threshold(&c, &Region::intervals(&[(0.0, 0.3)]).unwrap()).unwrap();
        let p2 = 15.0 / 22.5;
        let formula = 2.0 * ((p2 - 0.4) + (0.4 - 0.3 + 1.0 - p2) / 7.5);
        assert!((t - formula).abs() < 1e-12);
        assert!((t - 0.65).abs() < 0.01);

        assert!(gcc_threshold(&c, &Region::intervals(&[]).unwrap()).is_err());
    }
}
