use super::config::SweepConfig;
use super::runner::{dataset, test_segment};
use crate::error::Result;
use crate::inference::{aligned_truth, run_autonomous, run_driven, warm_start, DriveMask};
use crate::metrics::{sync_error, valid_prediction_time, VPT_THRESHOLD};
use crate::reservoir::{ReservoirConfig, ReservoirState};
use crate::seeds::derive;
use crate::training::{grid_search, train, Objective, ScoreTable};

/// Scores every grid candidate on held-out data of the training system.
pub fn run_sweep(cfg: &SweepConfig) -> Result<(ReservoirConfig, ScoreTable)> {
    let (data, split) = dataset(&cfg.train, cfg.master_seed, "train-ic")?;
    let dim = data.n_channels();
    let segment = test_segment(&data, split)?;
    let steps = cfg.eval_steps.min(segment.len() - 1);
    let base = ReservoirConfig {
        seed: cfg.master_seed,
        ..ReservoirConfig::from_tuple((cfg.n, 0.1, 0.9, 0.9, 1.0, 1e-8), dim)
    };
    let evaluate = |rc: &ReservoirConfig| -> Result<f64> {
        let trained = train(&data, rc, split)?;
        let r0 = ReservoirState::random(rc.n, rc.n_in, derive(rc.seed, "r0"));
        match cfg.grid.objective {
            Objective::DrivenSyncError => {
                let mask = DriveMask::driven(dim, &cfg.driven);
                let predicted = run_driven(&trained, &mask, &segment, r0, steps)?;
                let truth = aligned_truth(&segment, steps)?;
                let report = sync_error(&truth, &predicted, cfg.discard.min(steps / 2), None)?;
                let feedback = mask.feedback_channels();
                Ok(feedback.iter().map(|&c| report.errors[c]).sum::<f64>()
                    / feedback.len().max(1) as f64)
            }
            Objective::AutonomousHorizon => {
                let start = split.test_start();
                let warm = split.washout.min(start);
                let state = warm_start(&trained, (start - warm..start).map(|k| data.row(k)), r0)?;
                let run = run_autonomous(
                    &trained,
                    &DriveMask::autonomous(dim),
                    state,
                    data.dt(),
                    steps,
                )?;
                let truth = data.slice(start..start + steps)?;
                Ok(valid_prediction_time(&truth, &run.outputs, 1.0, VPT_THRESHOLD)?.model_time)
            }
        }
    };
    grid_search(&cfg.grid, &base, evaluate)
}
