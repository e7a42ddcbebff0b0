//! Config-driven experiment runner: single solves, refinement and contrast
//! sweeps, CSV output and observed orders.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_system, Assembler, CellData, Weights};
use crate::error::{config, Error, Result};
use crate::mesh::{build_mesh_1d, build_mesh_2d, build_time_partition, SpatialMesh, TimeSide};
use crate::postproc::{
    best_approximation, error_l2_at, error_l2_l2_dt, error_linfty_l2, norm_l2_at, tnorm_components, ErrorReport,
};
use crate::problem::{gcc_threshold, ExactSolution, Region, SpaceTimeFunction, W1_DEFAULT};
use crate::solver;
use crate::space::{DiscreteField, FieldLabel, SpaceTimeSpace, SpatialSpace};

/// Header of the error CSV.
pub const CSV_HEADER: [&str; 7] = [
    "L",
    "order",
    "contrast",
    "L-infty-L2-error-u",
    "L2-L2-error-u_t",
    "bestapprox-L-infty-L2-error-u",
    "bestapprox-L2-L2-error-u_t",
];

const DIAGNOSTICS_HEADER: [&str; 12] = [
    "L",
    "order",
    "contrast",
    "final-time",
    "slabs",
    "unknowns",
    "t0-L2-error-u",
    "tnorm-primal-stabilizer",
    "tnorm-time-jump",
    "tnorm-data",
    "tnorm-dual",
    "residual",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionKind {
    /// One interface at 0.5.
    Simple,
    /// Interfaces at `p1` and the derived `p2`.
    MultiJump,
    /// Piecewise polynomial solution contained in every discrete space.
    PiecewiseLinear,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaKind {
    /// `[0, 0.25] U [0.75, 1]` in 1D, the square frame in 2D.
    Auto,
    Full,
    /// `omega_intervals` (1D).
    Intervals,
    /// `[0,1]^2` minus `[0.25, 0.75]^2` (2D).
    Frame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorRegionKind {
    /// Complement of the data domain in 1D, the whole domain in 2D.
    Auto,
    Full,
    Complement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TimeRule {
    /// Use `final_time`.
    Fixed,
    /// Travel-time threshold of the setup plus `time_margin`.
    GccMargin,
}

/// Everything that defines one run. Missing keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    pub solution: SolutionKind,
    pub c1: f64,
    pub c2: f64,
    pub p1: f64,
    pub n: i64,
    pub w1: f64,
    pub omega: OmegaKind,
    pub omega_intervals: Vec<[f64; 2]>,
    pub error_region: ErrorRegionKind,
    pub final_time: f64,
    pub time_rule: TimeRule,
    pub time_margin: f64,
    pub level: u32,
    pub k: usize,
    pub q: usize,
    pub k_dual: Option<usize>,
    pub q_dual: Option<usize>,
    /// `dt = dt_factor * h` unless `slabs` or `dt` is given.
    pub dt_factor: f64,
    pub dt: Option<f64>,
    pub slabs: Option<usize>,
    /// Time at which the relative L2 error of `u1` over the domain is reported.
    pub eval_time: Option<f64>,
    pub weight_data: f64,
    pub weight_flux_jump: f64,
    pub weight_least_squares: f64,
    pub weight_velocity: f64,
    pub weight_boundary: f64,
    pub weight_time_jump: f64,
    pub weight_dual: f64,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dimension: 1,
            solution: SolutionKind::Simple,
            c1: 2.5,
            c2: 1.0,
            p1: 0.4,
            n: 1,
            w1: W1_DEFAULT,
            omega: OmegaKind::Auto,
            omega_intervals: vec![],
            error_region: ErrorRegionKind::Auto,
            final_time: 0.5,
            time_rule: TimeRule::Fixed,
            time_margin: 0.02,
            level: 3,
            k: 3,
            q: 3,
            k_dual: None,
            q_dual: None,
            dt_factor: 1.0,
            dt: None,
            slabs: None,
            eval_time: None,
            weight_data: 1.0,
            weight_flux_jump: 1.0,
            weight_least_squares: 1.0,
            weight_velocity: 1.0,
            weight_boundary: 1.0,
            weight_time_jump: 1.0,
            weight_dual: 1.0,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: RunConfig = toml::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.dimension, 1 | 2) {
            return config(format!("dimension must be 1 or 2, got {}", self.dimension));
        }
        if self.k < 1 || self.q < 1 {
            return config(format!("degrees k and q must be at least 1, got k={} q={}", self.k, self.q));
        }
        if self.k_dual == Some(0) {
            return config("dual spatial degree must be at least 1");
        }
        for (name, v) in [("c1", self.c1), ("c2", self.c2), ("w1", self.w1), ("dt_factor", self.dt_factor)] {
            if !(v.is_finite() && v > 0.0) {
                return config(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.final_time.is_finite() && self.final_time > 0.0) {
            return config(format!("final_time must be positive, got {}", self.final_time));
        }
        if !(self.time_margin.is_finite() && self.time_margin > 0.0) {
            return config(format!("time_margin must be positive, got {}", self.time_margin));
        }
        if self.slabs == Some(0) {
            return config("slabs must be at least 1");
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return config(format!("dt must be positive, got {dt}"));
            }
        }
        if self.dimension == 2 {
            if matches!(self.solution, SolutionKind::MultiJump) {
                return config("the multi-jump solution is only available in 1D");
            }
            if matches!(self.omega, OmegaKind::Intervals) {
                return config("interval data domains are 1D only");
            }
            if matches!(self.time_rule, TimeRule::GccMargin) {
                return config("the travel-time rule is only available in 1D");
            }
        } else if matches!(self.omega, OmegaKind::Frame) {
            return config("the frame data domain is 2D only");
        }
        if self.c2 != 1.0 && matches!(self.solution, SolutionKind::MultiJump) {
            return config("the multi-jump solution requires c2 = 1");
        }
        self.weights().validate()
    }

    pub fn weights(&self) -> Weights {
        Weights {
            data: self.weight_data,
            flux_jump: self.weight_flux_jump,
            least_squares: self.weight_least_squares,
            velocity: self.weight_velocity,
            boundary: self.weight_boundary,
            time_jump: self.weight_time_jump,
            dual: self.weight_dual,
        }
    }

    pub fn exact_solution(&self) -> Result<ExactSolution> {
        let (c1, c2, w1) = (self.c1, self.c2, self.w1);
        Ok(match self.solution {
            SolutionKind::Simple => ExactSolution::Simple { c1, c2, w1 },
            SolutionKind::MultiJump => {
                if self.p1.is_nan() || self.p1 <= 0.0 || self.p1 >= 1.0 {
                    return config(format!("p1 must lie in (0, 1), got {}", self.p1));
                }
                let p2 = crate::problem::multi_jump_p2(self.p1, self.n, c1, c2, w1)?;
                ExactSolution::MultiJump { p1: self.p1, p2, n: self.n, c1, c2, w1 }
            }
            SolutionKind::PiecewiseLinear => ExactSolution::PiecewiseLinear { c1, c2 },
            SolutionKind::Zero => ExactSolution::Zero,
        })
    }

    pub fn omega_region(&self) -> Result<Region> {
        match (self.omega, self.dimension) {
            (OmegaKind::Full, d) => Ok(Region::full(d)),
            (OmegaKind::Auto, 1) => Region::intervals(&[(0.0, 0.25), (0.75, 1.0)]),
            (OmegaKind::Auto, _) | (OmegaKind::Frame, _) => Ok(Region::square_frame()),
            (OmegaKind::Intervals, _) => {
                if self.omega_intervals.is_empty() {
                    return config("omega = \"intervals\" needs a nonempty omega_intervals list");
                }
                let iv: Vec<(f64, f64)> = self.omega_intervals.iter().map(|p| (p[0], p[1])).collect();
                Region::intervals(&iv)
            }
        }
    }

    pub fn error_region(&self) -> Result<Region> {
        let omega = self.omega_region()?;
        Ok(match (self.error_region, self.dimension) {
            (ErrorRegionKind::Full, d) | (ErrorRegionKind::Auto, d @ 2) => Region::full(d),
            _ => {
                let r = omega.complement();
                if r.is_empty() {
                    return config("the error region (complement of the data domain) is empty");
                }
                r
            }
        })
    }

    /// Final time after applying the time rule.
    pub fn resolved_final_time(&self) -> Result<f64> {
        match self.time_rule {
            TimeRule::Fixed => Ok(self.final_time),
            TimeRule::GccMargin => {
                let sol = self.exact_solution()?;
                Ok(gcc_threshold(&sol.speed_model()?, &self.omega_region()?)? + self.time_margin)
            }
        }
    }

    /// Number of slabs for mesh width `h` and final time `t`.
    pub fn n_slabs(&self, h: f64, t: f64) -> Result<usize> {
        if let Some(n) = self.slabs {
            return Ok(n);
        }
        if let Some(dt) = self.dt {
            let n = (t / dt).round();
            if n < 1.0 || (n * dt - t).abs() > 1e-9 * t.max(1.0) {
                return config(format!("dt = {dt} does not divide final time {t}"));
            }
            return Ok(n as usize);
        }
        Ok(((t / (self.dt_factor * h)) - 1e-9).ceil().max(1.0) as usize)
    }
}

/// Result of [`run_single`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub level: u32,
    pub order: usize,
    pub contrast: f64,
    pub final_time: f64,
    pub n_slabs: usize,
    pub unknowns: usize,
    pub report: ErrorReport,
    /// Relative L2 error of `u1` over the domain at `eval_time`.
    pub relative_l2_at: Option<f64>,
}

/// A solved problem with everything needed for further evaluation.
pub struct Solved {
    pub solution: ExactSolution,
    pub assembler: Assembler,
    pub x: Vec<f64>,
    pub u1: DiscreteField,
    pub residual: f64,
    pub final_time: f64,
}

fn build_mesh(cfg: &RunConfig, sol: &ExactSolution, omega: &Region) -> Result<SpatialMesh> {
    if cfg.dimension == 2 {
        return Ok(SpatialMesh::TwoD(build_mesh_2d(cfg.level)?));
    }
    let mut points = sol.interfaces();
    points.extend(omega.breakpoints(0));
    points.retain(|&p| p > 0.0 && p < 1.0);
    Ok(SpatialMesh::OneD(build_mesh_1d(cfg.level, &points)?))
}

/// Mesh, spaces, assembly and solve.
pub fn solve_config(cfg: &RunConfig) -> Result<Solved> {
    cfg.validate()?;
    let sol = cfg.exact_solution()?;
    let omega = cfg.omega_region()?;
    let final_time = cfg.resolved_final_time()?;
    let mesh = Arc::new(build_mesh(cfg, &sol, &omega)?);
    let n_slabs = cfg.n_slabs(mesh.h(), final_time)?;
    let part = Arc::new(build_time_partition(final_time, n_slabs)?);
    let primal = SpaceTimeSpace::new(Arc::new(SpatialSpace::new(mesh.clone(), cfg.k)?), cfg.q, part.clone());
    let dual = SpaceTimeSpace::new(
        Arc::new(SpatialSpace::new(mesh.clone(), cfg.k_dual.unwrap_or(cfg.k))?),
        cfg.q_dual.unwrap_or(cfg.q),
        part,
    );
    let c2 = sol.speed_model()?.c2_per_cell(&mesh)?;
    let cells = CellData::new(&mesh, c2, omega.cell_indicator(&mesh)?)?;
    let asm = Assembler::new(primal.clone(), dual, cells)?.with_weights(cfg.weights())?;
    let sys = assemble_system(&asm, |t, x| sol.value(t, x), |t, x| sol.value(t, x))?;
    let out = solver::solve(&sys.matrix, &sys.rhs)?;
    let u1 = DiscreteField::from_coeffs(primal, FieldLabel::U1, sys.layout.extract(&out.x, FieldLabel::U1))?;
    Ok(Solved { solution: sol, assembler: asm, x: out.x, u1, residual: out.residual, final_time })
}

/// Solves one configuration and evaluates all errors.
pub fn run_single(cfg: &RunConfig) -> Result<RunOutcome> {
    let s = solve_config(cfg)?;
    let space = &s.u1.space;
    let mesh = space.spatial.mesh();
    let region = cfg.error_region()?.cell_indicator(mesh)?;
    let all = vec![true; mesh.n_cells()];
    let exact: &dyn SpaceTimeFunction = &s.solution;
    let best = best_approximation(exact, space, FieldLabel::U1)?;
    let report = ErrorReport {
        linfty_l2_u: error_linfty_l2(&s.u1, exact, &region)?,
        l2_l2_ut: error_l2_l2_dt(&s.u1, exact, &region)?,
        best_linfty_l2_u: error_linfty_l2(&best, exact, &region)?,
        best_l2_l2_ut: error_l2_l2_dt(&best, exact, &region)?,
        t0_l2: error_l2_at(&s.u1, exact, &all, 0.0, TimeSide::Right)?,
        tnorm: tnorm_components(&s.assembler, &s.x)?,
        residual: s.residual,
    };
    let relative_l2_at = match cfg.eval_time {
        None => None,
        Some(t) => {
            if !(0.0..=s.final_time).contains(&t) {
                return config(format!("eval_time {t} is outside [0, {}]", s.final_time));
            }
            let e = error_l2_at(&s.u1, exact, &all, t, TimeSide::Left)?;
            let n = norm_l2_at(space, exact, &all, t)?;
            Some(if n > 0.0 { e / n } else { e })
        }
    };
    Ok(RunOutcome {
        level: cfg.level,
        order: cfg.k,
        contrast: cfg.c1 / cfg.c2,
        final_time: s.final_time,
        n_slabs: space.n_slabs(),
        unknowns: s.x.len(),
        report,
        relative_l2_at,
    })
}

/// Error columns of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorColumn {
    LinftyL2U,
    L2L2Ut,
    BestLinftyL2U,
    BestL2L2Ut,
}

impl ErrorColumn {
    pub const ALL: [ErrorColumn; 4] =
        [ErrorColumn::LinftyL2U, ErrorColumn::L2L2Ut, ErrorColumn::BestLinftyL2U, ErrorColumn::BestL2L2Ut];

    pub fn name(self) -> &'static str {
        CSV_HEADER[3 + self as usize]
    }
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub level: u32,
    pub order: usize,
    pub contrast: f64,
    pub errors: [f64; 4],
    pub outcome: Option<RunOutcome>,
}

impl SweepRow {
    pub fn from_outcome(o: RunOutcome) -> Self {
        let r = &o.report;
        SweepRow {
            level: o.level,
            order: o.order,
            contrast: o.contrast,
            errors: [r.linfty_l2_u, r.l2_l2_ut, r.best_linfty_l2_u, r.best_l2_l2_ut],
            outcome: Some(o),
        }
    }

    pub fn error(&self, col: ErrorColumn) -> f64 {
        self.errors[col as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// `log2(e_coarse / e_fine)`.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if x.len() < 2 || x.iter().chain(y).any(|v| v.is_nan() || *v <= 0.0) {
        return config("a log-log fit needs at least two positive points");
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return config("a log-log fit needs distinct abscissae");
    }
    Ok(sxy / sxx)
}

fn format_error(v: f64) -> String {
    format!("{v:.11e}")
}

impl SweepResult {
    fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            a.order.cmp(&b.order).then(a.contrast.total_cmp(&b.contrast)).then(a.level.cmp(&b.level))
        });
    }

    /// Observed orders between consecutive levels of the same order and
    /// contrast, as `(finer level, order)`.
    pub fn observed_orders(&self, order: usize, col: ErrorColumn) -> Vec<(u32, f64)> {
        let rows: Vec<&SweepRow> = self.rows.iter().filter(|r| r.order == order).collect();
        rows.windows(2)
            .filter(|w| w[0].contrast == w[1].contrast && w[1].level == w[0].level + 1)
            .map(|w| (w[1].level, observed_order(w[0].error(col), w[1].error(col))))
            .collect()
    }

    /// Slope of `log(error)` against `log(contrast)` over all rows.
    pub fn contrast_slope(&self, col: ErrorColumn) -> Result<f64> {
        let x: Vec<f64> = self.rows.iter().map(|r| r.contrast).collect();
        let y: Vec<f64> = self.rows.iter().map(|r| r.error(col)).collect();
        log_log_slope(&x, &y)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            let mut rec = vec![r.level.to_string(), r.order.to_string(), r.contrast.to_string()];
            rec.extend(r.errors.iter().map(|&e| format_error(e)));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::Solver(e.to_string()))
    }

    pub fn diagnostics_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(DIAGNOSTICS_HEADER)?;
        for r in &self.rows {
            let Some(o) = &r.outcome else { continue };
            let tn = o.report.tnorm;
            let mut rec = vec![
                r.level.to_string(),
                r.order.to_string(),
                r.contrast.to_string(),
                o.final_time.to_string(),
                o.n_slabs.to_string(),
                o.unknowns.to_string(),
            ];
            rec.extend(
                [o.report.t0_l2, tn.primal_stabilizer, tn.time_jump, tn.data, tn.dual, o.report.residual]
                    .iter()
                    .map(|&v| format_error(v)),
            );
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::Solver(e.to_string()))
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(s.as_bytes());
        let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        if header != CSV_HEADER {
            return config(format!("unexpected CSV header {header:?}"));
        }
        let mut rows = vec![];
        for rec in rd.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec[i].trim().parse().map_err(|_| Error::Config(format!("bad number {:?}", &rec[i])))
            };
            let int = |i: usize| -> Result<u64> {
                rec[i].trim().parse().map_err(|_| Error::Config(format!("bad integer {:?}", &rec[i])))
            };
            rows.push(SweepRow {
                level: int(0)? as u32,
                order: int(1)? as usize,
                contrast: num(2)?,
                errors: [num(3)?, num(4)?, num(5)?, num(6)?],
                outcome: None,
            });
        }
        Ok(SweepResult { rows })
    }

    /// Writes the CSV, a diagnostics CSV and the resolved config next to it.
    pub fn write(&self, path: &Path, cfg: &RunConfig) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_csv_string()?)?;
        std::fs::write(sibling(path, "diagnostics.csv"), self.diagnostics_csv_string()?)?;
        std::fs::write(sibling(path, "config.toml"), cfg.to_toml_string()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    /// Human-readable table with observed orders.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>3} {:>5} {:>8} {:>17} {:>17} {:>17} {:>17}",
            "L", "order", "contrast", "Linf-L2 u (eoc)", "L2-L2 u_t (eoc)", "best Linf (eoc)", "best u_t (eoc)"
        );
        for (i, r) in self.rows.iter().enumerate() {
            let _ = write!(s, "{:>3} {:>5} {:>8} ", r.level, r.order, r.contrast);
            for col in ErrorColumn::ALL {
                let prev = i.checked_sub(1).map(|j| &self.rows[j]).filter(|p| {
                    p.order == r.order && p.contrast == r.contrast && p.level + 1 == r.level
                });
                match prev {
                    Some(p) => {
                        let _ = write!(s, " {:>10.3e} {:>6.2}", r.error(col), observed_order(p.error(col), r.error(col)));
                    }
                    None => {
                        let _ = write!(s, " {:>10.3e} {:>6}", r.error(col), "");
                    }
                }
            }
            s.push('\n');
        }
        s
    }
}

/// `out.csv` -> `out.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    path.with_file_name(format!("{stem}.{suffix}"))
}

/// One run per level; when `orders` is nonempty each order `k` is run with
/// `q = k` as well.
pub fn run_refinement_sweep(cfg: &RunConfig, levels: &[u32], orders: &[usize]) -> Result<SweepResult> {
    if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) {
        return config(format!("levels must be a nonempty ascending list, got {levels:?}"));
    }
    let mut rows = vec![];
    let orders: Vec<Option<usize>> =
        if orders.is_empty() { vec![None] } else { orders.iter().map(|&o| Some(o)).collect() };
    for order in orders {
        for &level in levels {
            let mut c = cfg.clone();
            c.level = level;
            if let Some(k) = order {
                c.k = k;
                c.q = k;
            }
            rows.push(SweepRow::from_outcome(run_single(&c)?));
        }
    }
    let mut res = SweepResult { rows };
    res.sort();
    Ok(res)
}

/// One run per contrast `c1` at fixed level and order.
pub fn run_contrast_sweep(cfg: &RunConfig, contrasts: &[f64]) -> Result<SweepResult> {
    if contrasts.is_empty() {
        return config("at least one contrast is required");
    }
    let mut rows = vec![];
    for &c1 in contrasts {
        let mut c = cfg.clone();
        c.c1 = c1;
        rows.push(SweepRow::from_outcome(run_single(&c)?));
    }
    let mut res = SweepResult { rows };
    res.sort();
    Ok(res)
}

/// Travel-time threshold of the configured wave speed and data domain.
pub fn gcc_query(cfg: &RunConfig) -> Result<f64> {
    cfg.validate()?;
    let sol = cfg.exact_solution()?;
    gcc_threshold(&sol.speed_model()?, &cfg.omega_region()?)
}
