//! Sweep engine: ordering, determinism and phase references.

use optomod::config::PipelineSettings;
use optomod::params::{Model, ModulationSpec, SystemParams};
use optomod::sweep::{
    csv_string, run_cell, run_phase_sweep, run_sweep, Axis, AxisKind, CellStatus, SweepGrid,
};

fn base() -> Model {
    let w = 2.0 * SystemParams::reference().omega_m;
    Model::reference(ModulationSpec::mechanical(0.0, w)).unwrap()
}

fn settings() -> PipelineSettings {
    PipelineSettings { samples: 64, ..PipelineSettings::default() }
}

#[test]
fn single_cell_grid_equals_run_cell() {
    let grid = SweepGrid::new(
        Axis::new(AxisKind::OmegaOverOmegaM, vec![1.8]).unwrap(),
        Some(Axis::new(AxisKind::Epsilon, vec![0.15]).unwrap()),
        base(),
        settings(),
    )
    .unwrap();
    let cells = run_sweep(&grid, 3).unwrap();
    assert_eq!(csv_string(&grid, &cells), csv_string(&grid, &[run_cell(&grid, 0)]));
}

#[test]
fn row_major_and_worker_independent() {
    let grid = SweepGrid::new(
        Axis::linspace(AxisKind::OmegaOverOmegaM, 1.0, 3.0, 4).unwrap(),
        Some(Axis::linspace(AxisKind::Epsilon, 0.0, 0.3, 3).unwrap()),
        base(),
        settings(),
    )
    .unwrap();
    let one = run_sweep(&grid, 1).unwrap();
    let many = run_sweep(&grid, 5).unwrap();
    assert_eq!(csv_string(&grid, &one), csv_string(&grid, &many));
    for (k, c) in one.iter().enumerate() {
        assert_eq!((c.i, c.j), (k % 4, k / 4));
        assert_eq!(c.status == CellStatus::Ok, c.metrics.is_some());
    }
    // Squeezing deepens with the modulation strength at fixed frequency.
    let q = |k: usize| one[k].metrics.as_ref().unwrap().qvar_min;
    assert!(q(9) < q(5) && q(5) < q(1));
}

#[test]
fn phase_sweep_has_flat_references() {
    let w = 2.0 * SystemParams::reference().omega_m;
    let model = Model::reference(ModulationSpec::combined(0.1, 0.3, w, 0.0)).unwrap();
    let sweep = run_phase_sweep(&model, &settings(), 6, 2).unwrap();
    assert_eq!(sweep.cells.len(), 6);
    assert_eq!(sweep.mechanical_only.status, CellStatus::Ok);
    assert_eq!(sweep.drive_only.status, CellStatus::Ok);
    let mut refs = Vec::new();
    sweep.write_references(&mut refs).unwrap();
    assert_eq!(String::from_utf8(refs).unwrap().lines().count(), 3);
    let chart = sweep.chart(3);
    assert_eq!(chart.matches("stroke-dasharray").count(), 2);
}

#[test]
fn phase_sweep_needs_both_modulations() {
    assert!(run_phase_sweep(&base(), &settings(), 8, 1).is_err());
}
