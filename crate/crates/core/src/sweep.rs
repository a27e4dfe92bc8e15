//! Parameter sweeps over the full pipeline with parallel execution and
//! instability blanking.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::classical::find_periodic_orbit;
use crate::config::PipelineSettings;
use crate::covariance::{routh_hurwitz_stable, steady_periodic_covariance, CovOptions};
use crate::error::{Error, Result};
use crate::metrics::{period_extrema, MetricsSummary};
use crate::params::{Model, ModulationSpec};
use crate::svg;

/// Swept quantity. Frequencies are in units of ω_M, the phase in units of π.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    OmegaOverOmegaM,
    Epsilon,
    Eta,
    PhiOverPi,
}

impl AxisKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::OmegaOverOmegaM => "omega_over_omega_m",
            Self::Epsilon => "epsilon",
            Self::Eta => "eta",
            Self::PhiOverPi => "phi_over_pi",
        }
    }

    /// Copy of `model` with this quantity set to `x`.
    pub fn apply(&self, model: &Model, x: f64) -> Result<Model> {
        let mut m = model.modulation;
        match self {
            Self::OmegaOverOmegaM => {
                let w = x * model.system.omega_m;
                m.omega1 = w;
                m.omega2 = w;
            }
            Self::Epsilon => m.epsilon = x,
            Self::Eta => m.eta = x,
            Self::PhiOverPi => m.phi = x * PI,
        }
        model.with_modulation(m)
    }
}

impl std::str::FromStr for AxisKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omega_over_omega_m" | "omega" => Ok(Self::OmegaOverOmegaM),
            "epsilon" => Ok(Self::Epsilon),
            "eta" => Ok(Self::Eta),
            "phi_over_pi" | "phi" => Ok(Self::PhiOverPi),
            other => Err(Error::InvalidArgument(format!("unknown sweep axis `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Axis {
    pub kind: AxisKind,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(kind: AxisKind, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(format!("axis `{}` is empty", kind.name())));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!(
                "axis `{}` must be finite and strictly increasing",
                kind.name()
            )));
        }
        Ok(Self { kind, values })
    }

    /// `n` evenly spaced points from `min` to `max` inclusive.
    pub fn linspace(kind: AxisKind, min: f64, max: f64, n: usize) -> Result<Self> {
        let values = match n {
            0 => vec![],
            1 => vec![min],
            _ => (0..n).map(|k| min + (max - min) * k as f64 / (n - 1) as f64).collect(),
        };
        Self::new(kind, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One- or two-dimensional grid over a base model.
#[derive(Debug, Clone, Serialize)]
pub struct SweepGrid {
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub base: Model,
    pub settings: PipelineSettings,
}

impl SweepGrid {
    pub fn new(
        axis1: Axis,
        axis2: Option<Axis>,
        base: Model,
        settings: PipelineSettings,
    ) -> Result<Self> {
        if axis2.as_ref().is_some_and(|a| a.kind == axis1.kind) {
            return Err(Error::InvalidArgument("both axes sweep the same quantity".into()));
        }
        let grid = Self {
            axis1,
            axis2,
            base,
            settings,
        };
        // Every cell must describe a valid model.
        for idx in 0..grid.len() {
            grid.cell_model(idx)?;
        }
        Ok(grid)
    }

    pub fn ny(&self) -> usize {
        self.axis2.as_ref().map_or(1, Axis::len)
    }

    pub fn len(&self) -> usize {
        self.axis1.len() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index: axis1 varies fastest.
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.axis1.len(), idx / self.axis1.len())
    }

    pub fn cell_model(&self, idx: usize) -> Result<Model> {
        let (i, j) = self.coords(idx);
        let m = self.axis1.kind.apply(&self.base, self.axis1.values[i])?;
        match &self.axis2 {
            Some(a) => a.kind.apply(&m, a.values[j]),
            None => Ok(m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellStatus {
    Ok,
    Unstable,
    NonConverged,
}

impl CellStatus {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::Unstable => "unstable",
            Self::NonConverged => "non-converged",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: Option<f64>,
    pub status: CellStatus,
    /// Why the cell is not `ok`; `marginal` for ok cells with a zero Routh pivot.
    pub reason: String,
    /// Present exactly when `status` is ok.
    pub metrics: Option<MetricsSummary>,
    pub classical_settle_time: Option<f64>,
    pub covariance_settle_time: Option<f64>,
    /// Worst dimensionless Routh–Hurwitz margin over the period.
    pub rh_margin: Option<f64>,
}

/// Result of the pipeline for one model, before grid coordinates are attached.
#[derive(Debug, Clone, Serialize)]
pub struct CellOutcome {
    pub status: CellStatus,
    pub reason: String,
    pub metrics: Option<MetricsSummary>,
    pub classical_settle_time: Option<f64>,
    pub covariance_settle_time: Option<f64>,
    pub rh_margin: Option<f64>,
}

fn failure(err: &Error, stage: &str) -> (CellStatus, String) {
    match err {
        Error::Instability { .. } => (CellStatus::Unstable, format!("{stage} divergence")),
        Error::NonConvergence { periods, gap } => (
            CellStatus::NonConverged,
            format!("{stage} not periodic after {periods} periods (gap {gap:.1e})"),
        ),
        other => (CellStatus::NonConverged, format!("{stage}: {other}")),
    }
}

/// Orbit, Routh–Hurwitz check, periodic covariance and period extrema.
/// Never fails; every error is folded into the status.
pub fn run_model(model: &Model, settings: &PipelineSettings) -> CellOutcome {
    let mut out = CellOutcome {
        status: CellStatus::Ok,
        reason: String::new(),
        metrics: None,
        classical_settle_time: None,
        covariance_settle_time: None,
        rh_margin: None,
    };
    let orbit = match find_periodic_orbit(model, settings.samples, &settings.settle) {
        Ok(o) => o,
        Err(e) => {
            (out.status, out.reason) = failure(&e, "classical");
            return out;
        }
    };
    out.classical_settle_time = Some(orbit.settle_time);
    let rh = routh_hurwitz_stable(model, &orbit);
    out.rh_margin = Some(rh.worst_margin);
    if !rh.stable {
        out.status = CellStatus::Unstable;
        out.reason = "routh-hurwitz".into();
        return out;
    }
    let opts = CovOptions {
        settle: settings.settle,
        source: settings.source,
        ..CovOptions::default()
    };
    let cov = match steady_periodic_covariance(model, &orbit, settings.samples, &opts) {
        Ok(c) => c,
        Err(e) => {
            (out.status, out.reason) = failure(&e, "covariance");
            return out;
        }
    };
    out.covariance_settle_time = Some(cov.settle_time);
    match period_extrema(&cov, settings.measured) {
        Ok(m) => {
            out.metrics = Some(m);
            if rh.marginal {
                out.reason = "marginal".into();
            }
        }
        Err(e) => (out.status, out.reason) = failure(&e, "metrics"),
    }
    out
}

/// Run the cell at row-major index `idx`.
pub fn run_cell(grid: &SweepGrid, idx: usize) -> SweepCell {
    let (i, j) = grid.coords(idx);
    let outcome = match grid.cell_model(idx) {
        Ok(m) => run_model(&m, &grid.settings),
        Err(e) => {
            let (status, reason) = failure(&e, "config");
            CellOutcome {
                status,
                reason,
                metrics: None,
                classical_settle_time: None,
                covariance_settle_time: None,
                rh_margin: None,
            }
        }
    };
    SweepCell {
        i,
        j,
        x: grid.axis1.values[i],
        y: grid.axis2.as_ref().map(|a| a.values[j]),
        status: outcome.status,
        reason: outcome.reason,
        metrics: outcome.metrics,
        classical_settle_time: outcome.classical_settle_time,
        covariance_settle_time: outcome.covariance_settle_time,
        rh_margin: outcome.rh_margin,
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Numerical(format!("cannot start worker pool: {e}")))
}

/// Every cell of `grid`, in row-major order whatever the worker count.
pub fn run_sweep(grid: &SweepGrid, workers: usize) -> Result<Vec<SweepCell>> {
    let pool = pool(workers)?;
    // Indexed parallel collect writes each result into its own slot.
    Ok(pool.install(|| (0..grid.len()).into_par_iter().map(|k| run_cell(grid, k)).collect()))
}

const METRIC_NAMES: [&str; 5] = ["n_max", "en_max", "d_max", "qvar_min", "xvar_min"];

fn metric(m: &MetricsSummary, k: usize) -> f64 {
    [m.n_max, m.en_max, m.d_max, m.qvar_min, m.xvar_min][k]
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.9e}")).unwrap_or_default()
}

/// CSV: header, then one row per cell with coordinates, status, the five
/// metrics and diagnostics. Missing values are empty fields.
pub fn write_csv<W: Write>(
    mut w: W,
    axis1: AxisKind,
    axis2: Option<AxisKind>,
    cells: &[SweepCell],
) -> std::io::Result<()> {
    writeln!(
        w,
        "i,j,{},{},status,reason,{},classical_settle_time,covariance_settle_time,rh_margin",
        axis1.name(),
        axis2.map_or("y", |a| a.name()),
        METRIC_NAMES.join(",")
    )?;
    for c in cells {
        let mut row = format!(
            "{},{},{:.9e},{},{},{}",
            c.i,
            c.j,
            c.x,
            opt(c.y),
            c.status.label(),
            c.reason
        );
        for k in 0..5 {
            row.push(',');
            row.push_str(&opt(c.metrics.as_ref().map(|m| metric(m, k))));
        }
        for v in [c.classical_settle_time, c.covariance_settle_time, c.rh_margin] {
            row.push(',');
            row.push_str(&opt(v));
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

pub fn csv_string(grid: &SweepGrid, cells: &[SweepCell]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, grid.axis1.kind, grid.axis2.as_ref().map(|a| a.kind), cells)
        .expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// One heatmap per metric, `(metric name, svg)`.
pub fn heatmaps(grid: &SweepGrid, cells: &[SweepCell]) -> Vec<(&'static str, String)> {
    let ys = grid.axis2.as_ref().map_or(vec![0.0], |a| a.values.clone());
    let y_label = grid.axis2.as_ref().map_or("", |a| a.kind.name());
    METRIC_NAMES
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let values: Vec<Option<f64>> =
                cells.iter().map(|c| c.metrics.as_ref().map(|m| metric(m, k))).collect();
            let doc = svg::heatmap(name, grid.axis1.kind.name(), &grid.axis1.values, y_label, &ys, &values);
            (*name, doc)
        })
        .collect()
}

/// gnuplot script drawing every metric of `csv_name` as a heatmap.
pub fn gnuplot_script(grid: &SweepGrid, csv_name: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set datafile missing ''");
    let _ = writeln!(s, "set terminal pngcairo size 800,600");
    let _ = writeln!(s, "set xlabel '{}'", grid.axis1.kind.name());
    match &grid.axis2 {
        Some(a) => {
            let _ = writeln!(s, "set ylabel '{}'", a.kind.name());
            let _ = writeln!(s, "set view map");
            for (k, name) in METRIC_NAMES.iter().enumerate() {
                let _ = writeln!(s, "set output '{name}.png'");
                let _ = writeln!(s, "set title '{name}'");
                let _ = writeln!(
                    s,
                    "plot '{csv_name}' every ::1 using 3:4:(strcol(5) eq 'ok' ? ${} : NaN) with image notitle",
                    7 + k
                );
            }
        }
        None => {
            for (k, name) in METRIC_NAMES.iter().enumerate() {
                let _ = writeln!(s, "set output '{name}.png'");
                let _ = writeln!(s, "set title '{name}'");
                let _ = writeln!(
                    s,
                    "plot '{csv_name}' every ::1 using 3:(strcol(5) eq 'ok' ? ${} : NaN) with linespoints notitle",
                    7 + k
                );
            }
        }
    }
    s
}

/// Unstable cells with no neighbour whose margin is below ten times the
/// median margin of the grid. A non-empty list is only a warning.
pub fn isolated_unstable_cells(grid: &SweepGrid, cells: &[SweepCell]) -> Vec<(usize, usize)> {
    let mut margins: Vec<f64> = cells.iter().filter_map(|c| c.rh_margin).filter(|m| m.is_finite()).collect();
    if margins.is_empty() {
        return vec![];
    }
    margins.sort_by(f64::total_cmp);
    let median = margins[margins.len() / 2];
    let limit = 10.0 * median.abs();
    let nx = grid.axis1.len() as isize;
    let ny = grid.ny() as isize;
    cells
        .iter()
        .filter(|c| c.status == CellStatus::Unstable)
        .filter(|c| {
            let (i, j) = (c.i as isize, c.j as isize);
            let near = [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)]
                .into_iter()
                .filter(|&(a, b)| a >= 0 && b >= 0 && a < nx && b < ny)
                .any(|(a, b)| {
                    cells[(b * nx + a) as usize]
                        .rh_margin
                        .map_or(true, |m| m < limit)
                });
            !near
        })
        .map(|c| (c.i, c.j))
        .collect()
}

/// Sweep of the relative phase of two modulations, with the two
/// single-modulation runs as reference levels.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseSweep {
    pub grid: SweepGrid,
    pub cells: Vec<SweepCell>,
    /// Spring modulation alone (η = 0).
    pub mechanical_only: CellOutcome,
    /// Drive modulation alone (ε = 0).
    pub drive_only: CellOutcome,
}

/// `n_phi` phases φ/π = 2k/n_phi over [0, 2) at the modulation of `base`.
pub fn run_phase_sweep(
    base: &Model,
    settings: &PipelineSettings,
    n_phi: usize,
    workers: usize,
) -> Result<PhaseSweep> {
    if n_phi == 0 {
        return Err(Error::InvalidArgument("phase sweep needs at least one point".into()));
    }
    let m = base.modulation;
    if m.epsilon <= 0.0 || m.eta <= 0.0 {
        return Err(Error::InvalidArgument(
            "phase sweep needs both epsilon and eta > 0".into(),
        ));
    }
    let phis = (0..n_phi).map(|k| 2.0 * k as f64 / n_phi as f64).collect();
    let grid = SweepGrid::new(Axis::new(AxisKind::PhiOverPi, phis)?, None, *base, *settings)?;
    let w = m.frequency().unwrap_or(0.0);
    let mech = base.with_modulation(ModulationSpec::mechanical(m.epsilon, w))?;
    let drive = base.with_modulation(ModulationSpec::combined(0.0, m.eta, w, 0.0))?;
    let pool = pool(workers)?;
    let (cells, (mechanical_only, drive_only)) = pool.install(|| {
        rayon::join(
            || (0..grid.len()).into_par_iter().map(|k| run_cell(&grid, k)).collect(),
            || rayon::join(|| run_model(&mech, settings), || run_model(&drive, settings)),
        )
    });
    Ok(PhaseSweep {
        grid,
        cells,
        mechanical_only,
        drive_only,
    })
}

impl PhaseSweep {
    /// Line chart of one metric over φ/π with the reference levels dashed.
    pub fn chart(&self, k: usize) -> String {
        let ys: Vec<Option<f64>> =
            self.cells.iter().map(|c| c.metrics.as_ref().map(|m| metric(m, k))).collect();
        let mut refs = Vec::new();
        if let Some(m) = &self.mechanical_only.metrics {
            refs.push(("spring only", metric(m, k)));
        }
        if let Some(m) = &self.drive_only.metrics {
            refs.push(("drive only", metric(m, k)));
        }
        svg::line_chart(
            METRIC_NAMES[k],
            "phi/pi",
            &self.grid.axis1.values,
            &[svg::Curve {
                label: METRIC_NAMES[k],
                ys: &ys,
                color: "#3b528b",
            }],
            &refs,
        )
    }

    pub fn charts(&self) -> Vec<(&'static str, String)> {
        (0..5).map(|k| (METRIC_NAMES[k], self.chart(k))).collect()
    }

    /// Reference levels as CSV rows in the sweep format, with x empty.
    pub fn write_references<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "reference,status,{}", METRIC_NAMES.join(","))?;
        for (name, o) in [("spring_only", &self.mechanical_only), ("drive_only", &self.drive_only)] {
            let vals: Vec<String> =
                (0..5).map(|k| opt(o.metrics.as_ref().map(|m| metric(m, k)))).collect();
            writeln!(w, "{name},{},{}", o.status.label(), vals.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;

    fn quick() -> PipelineSettings {
        let mut s = PipelineSettings {
            samples: 64,
            ..PipelineSettings::default()
        };
        s.settle.tol = 1e-6;
        s
    }

    fn base() -> Model {
        let w = 2.0 * SystemParams::reference().omega_m;
        Model::reference(ModulationSpec::mechanical(0.0, w)).unwrap()
    }

    #[test]
    fn axes_must_increase() {
        assert!(Axis::new(AxisKind::Epsilon, vec![0.1, 0.1]).is_err());
        assert!(Axis::new(AxisKind::Epsilon, vec![]).is_err());
        assert_eq!(Axis::linspace(AxisKind::Epsilon, 0.0, 0.5, 26).unwrap().values[25], 0.5);
    }

    #[test]
    fn invalid_cells_rejected_up_front() {
        let a = Axis::new(AxisKind::Epsilon, vec![0.5, 1.5]).unwrap();
        assert!(SweepGrid::new(a, None, base(), quick()).is_err());
    }

    #[test]
    fn row_major_coordinates() {
        let a = Axis::new(AxisKind::OmegaOverOmegaM, vec![1.0, 2.0, 3.0]).unwrap();
        let b = Axis::new(AxisKind::Epsilon, vec![0.0, 0.1]).unwrap();
        let g = SweepGrid::new(a, Some(b), base(), quick()).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.coords(4), (1, 1));
        let m = g.cell_model(4).unwrap();
        assert!((m.modulation.omega1 / m.system.omega_m - 2.0).abs() < 1e-12);
        assert_eq!(m.modulation.epsilon, 0.1);
    }

    #[test]
    fn unmodulated_cell_matches_baseline() {
        let a = Axis::new(AxisKind::Epsilon, vec![0.0]).unwrap();
        let g = SweepGrid::new(a, None, base(), quick()).unwrap();
        let cells = run_sweep(&g, 1).unwrap();
        assert_eq!(cells.len(), 1);
        let c = &cells[0];
        assert_eq!(c.status, CellStatus::Ok);
        let direct = run_cell(&g, 0);
        assert_eq!(csv_string(&g, &cells), csv_string(&g, &[direct]));
        let m = c.metrics.as_ref().unwrap();
        // A constant orbit has identical extrema of n.
        assert!(m.n_max > 0.0 && m.n_max < 0.1);
        assert!((m.xvar_min - 0.5).abs() < 0.1);
    }

    fn synthetic(status: CellStatus, i: usize, j: usize, v: Option<f64>) -> SweepCell {
        SweepCell {
            i,
            j,
            x: i as f64,
            y: Some(j as f64),
            status,
            reason: String::new(),
            metrics: None,
            classical_settle_time: None,
            covariance_settle_time: None,
            rh_margin: v,
        }
    }

    #[test]
    fn unstable_only_sweep_emits_blank_outputs() {
        let a = Axis::new(AxisKind::OmegaOverOmegaM, vec![1.0, 2.0]).unwrap();
        let b = Axis::new(AxisKind::Epsilon, vec![0.1, 0.2]).unwrap();
        let g = SweepGrid::new(a, Some(b), base(), quick()).unwrap();
        let cells: Vec<SweepCell> = (0..4)
            .map(|k| synthetic(CellStatus::Unstable, k % 2, k / 2, Some(-1.0)))
            .collect();
        let csv = csv_string(&g, &cells);
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.split(',').nth(4) == Some("unstable")));
        for (_, doc) in heatmaps(&g, &cells) {
            assert!(doc.contains(r#""ok_cells":0"#));
        }
        assert!(isolated_unstable_cells(&g, &cells).is_empty());
    }

    #[test]
    fn salt_and_pepper_is_reported() {
        let a = Axis::linspace(AxisKind::OmegaOverOmegaM, 1.0, 3.0, 3).unwrap();
        let b = Axis::linspace(AxisKind::Epsilon, 0.0, 0.2, 3).unwrap();
        let g = SweepGrid::new(a, Some(b), base(), quick()).unwrap();
        let cells: Vec<SweepCell> = (0..9)
            .map(|k| {
                if k == 4 {
                    synthetic(CellStatus::Unstable, 1, 1, Some(-1.0))
                } else {
                    synthetic(CellStatus::Ok, k % 3, k / 3, Some(1.0))
                }
            })
            .collect();
        // Median 1, all neighbours at 1 < 10: connected enough.
        assert!(isolated_unstable_cells(&g, &cells).is_empty());
        let cells: Vec<SweepCell> = cells
            .into_iter()
            .map(|mut c| {
                if c.status == CellStatus::Ok && (c.i + c.j) % 2 == 1 {
                    c.rh_margin = Some(1e3);
                }
                c
            })
            .collect();
        assert_eq!(isolated_unstable_cells(&g, &cells), vec![(1, 1)]);
    }

    #[test]
    fn gnuplot_references_csv() {
        let a = Axis::new(AxisKind::OmegaOverOmegaM, vec![1.0, 2.0]).unwrap();
        let g = SweepGrid::new(a, None, base(), quick()).unwrap();
        let s = gnuplot_script(&g, "sweep.csv");
        assert!(s.contains("'sweep.csv'"));
        assert_eq!(s.matches("plot ").count(), 5);
    }
}
