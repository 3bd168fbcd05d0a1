//! Running trained reservoirs in closed loop.
//!
//! Every mode shares one loop: at step `n` the input vector `u(n)` is
//! assembled channel by channel from the reservoir's own previous output
//! (feedback), an external measurement (driven), or a fixed value
//! (constant auxiliary). The reservoir then steps and the readout produces
//! `v(n+1)`, the estimate of the driving system at row `n + 1`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{Scaler, Trajectory};
use crate::error::{Error, Result};
use crate::reservoir::ReservoirState;
use crate::training::TrainedReservoir;

/// Outputs live on the normalized `[-1, 1]` scale; leaving
/// `[-LIMIT, LIMIT]` means the closed loop has run away. Autonomous runs
/// stop there, driven runs fail with [`Error::Divergence`].
pub const OUTPUT_LIMIT: f64 = 10.0;

/// Fraction of an auxiliary-pair run, counted from the end, that is compared.
pub const AUX_TAIL_FRACTION: f64 = 0.25;
pub const AUX_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    /// Fed back from the reservoir's own output.
    Feedback,
    /// Overwritten by the external drive before each step.
    Driven,
    /// Input-only channel held at a fixed value.
    ConstantAux(f64),
}

/// Per-input-channel routing during prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DriveMask {
    modes: Vec<ChannelMode>,
}

impl DriveMask {
    pub fn new(modes: Vec<ChannelMode>) -> Self {
        DriveMask { modes }
    }

    /// `n_out` channels with only `driven` overwritten by the drive.
    pub fn driven(n_out: usize, driven: &[usize]) -> Self {
        let modes = (0..n_out)
            .map(|c| {
                if driven.contains(&c) {
                    ChannelMode::Driven
                } else {
                    ChannelMode::Feedback
                }
            })
            .collect();
        DriveMask { modes }
    }

    pub fn autonomous(n_out: usize) -> Self {
        DriveMask::driven(n_out, &[])
    }

    /// Appends a constant input-only channel.
    pub fn with_aux(mut self, value: f64) -> Self {
        self.modes.push(ChannelMode::ConstantAux(value));
        self
    }

    pub fn modes(&self) -> &[ChannelMode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn driven_channels(&self) -> Vec<usize> {
        self.channels(|m| matches!(m, ChannelMode::Driven))
    }

    pub fn feedback_channels(&self) -> Vec<usize> {
        self.channels(|m| matches!(m, ChannelMode::Feedback))
    }

    fn channels(&self, pred: impl Fn(&ChannelMode) -> bool) -> Vec<usize> {
        self.modes
            .iter()
            .enumerate()
            .filter(|(_, m)| pred(m))
            .map(|(c, _)| c)
            .collect()
    }

    pub fn validate(&self, n_in: usize, n_out: usize) -> Result<()> {
        if self.modes.len() != n_in {
            return Err(Error::Contract(format!(
                "mask covers {} channels, reservoir has {n_in} inputs",
                self.modes.len()
            )));
        }
        for (c, m) in self.modes.iter().enumerate() {
            let ok = match m {
                ChannelMode::ConstantAux(v) => c >= n_out && v.is_finite(),
                _ => c < n_out,
            };
            if !ok {
                return Err(Error::Contract(format!(
                    "channel {c} cannot be {m:?} with {n_out} outputs"
                )));
            }
        }
        Ok(())
    }

    fn fill_input(&self, feedback: &[f64], drive_row: Option<&[f64]>, u: &mut [f64]) {
        for (c, m) in self.modes.iter().enumerate() {
            u[c] = match *m {
                ChannelMode::Feedback => feedback[c],
                ChannelMode::Driven => drive_row.expect("driven channel without drive")[c],
                ChannelMode::ConstantAux(v) => v,
            };
        }
    }
}

/// One reservoir in the loop: its state, its latest output, and buffers.
struct Unit<'a> {
    trained: &'a TrainedReservoir,
    mask: &'a DriveMask,
    state: ReservoirState,
    output: Vec<f64>,
    input: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> Unit<'a> {
    fn new(trained: &'a TrainedReservoir, mask: &'a DriveMask, r0: ReservoirState) -> Result<Self> {
        let cfg = trained.config();
        mask.validate(cfg.n_in, cfg.n_out)?;
        if r0.r.len() != cfg.n || r0.last_input.len() != cfg.n_in {
            return Err(Error::Contract(format!(
                "initial state has {} nodes / {} inputs, reservoir has {} / {}",
                r0.r.len(),
                r0.last_input.len(),
                cfg.n,
                cfg.n_in
            )));
        }
        Ok(Unit {
            trained,
            mask,
            state: r0,
            output: vec![0.0; cfg.n_out],
            input: vec![0.0; cfg.n_in],
            scratch: vec![0.0; cfg.n],
        })
    }

    /// Steps with the already assembled `self.input` and refreshes the output.
    fn advance(&mut self) -> Result<()> {
        self.trained
            .reservoir
            .step_mut(&mut self.state, &self.input, &mut self.scratch)?;
        self.trained
            .readout
            .readout_into(&self.state, &mut self.output)
    }

    fn step(&mut self, drive_row: Option<&[f64]>) -> Result<()> {
        self.mask
            .fill_input(&self.output, drive_row, &mut self.input);
        self.advance()
    }

    fn bounded(&self, step: usize) -> Result<()> {
        if self.output.iter().all(|v| v.abs() <= OUTPUT_LIMIT) {
            return Ok(());
        }
        Err(Error::Divergence {
            step,
            magnitude: self.output.iter().fold(0.0, |m: f64, v| {
                if v.is_nan() {
                    f64::NAN
                } else {
                    m.max(v.abs())
                }
            }),
        })
    }
}

fn check_drive(drive: &Trajectory, mask: &DriveMask, n_steps: usize) -> Result<()> {
    if drive.len() < n_steps + 1 {
        return Err(Error::Contract(format!(
            "drive has {} rows, a {n_steps}-step run needs {}",
            drive.len(),
            n_steps + 1
        )));
    }
    if let Some(&c) = mask
        .driven_channels()
        .iter()
        .find(|&&c| c >= drive.n_channels())
    {
        return Err(Error::Contract(format!(
            "driven channel {c} missing from {}-channel drive",
            drive.n_channels()
        )));
    }
    Ok(())
}

fn output_trajectory(
    dt: f64,
    t0: f64,
    n_out: usize,
    data: Vec<f64>,
    scaler: Option<&Scaler>,
) -> Result<Trajectory> {
    let scaler = scaler.filter(|s| s.n_channels() >= n_out).map(|s| {
        let first: Vec<usize> = (0..n_out).collect();
        s.select(&first)
    });
    Ok(Trajectory::from_rows(dt, t0, n_out, data)?.with_scaler(scaler))
}

/// Teacher-forces `inputs` (all channels, open loop) from `r0` and returns
/// the final state, ready to close the loop.
pub fn warm_start<'a, I>(
    trained: &TrainedReservoir,
    inputs: I,
    r0: ReservoirState,
) -> Result<ReservoirState>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    trained.reservoir.drive(inputs, r0, |_, _| {})
}

/// Result of a closed-loop run.
#[derive(Debug, Clone)]
pub struct AutonomousRun {
    /// Row `i` estimates the system `i + 1` samples after the warm-start input.
    pub outputs: Trajectory,
    /// Step at which an output left `[-10, 10]`, if any; `outputs` is
    /// truncated there.
    pub diverged_at: Option<usize>,
}

/// Closed loop from a warmed-up state: the readout of `state` is fed back
/// as the next input (constant auxiliary channels from `mask`).
pub fn run_autonomous(
    trained: &TrainedReservoir,
    mask: &DriveMask,
    state: ReservoirState,
    dt: f64,
    n_steps: usize,
) -> Result<AutonomousRun> {
    if !mask.driven_channels().is_empty() {
        return Err(Error::Contract(
            "autonomous runs take no driven channels".into(),
        ));
    }
    let n_out = trained.config().n_out;
    let mut unit = Unit::new(trained, mask, state)?;
    trained
        .readout
        .readout_into(&unit.state, &mut unit.output)?;
    let mut data = Vec::with_capacity(n_steps * n_out);
    let mut diverged_at = None;
    for n in 0..n_steps {
        if unit.output.iter().any(|v| !(v.abs() <= OUTPUT_LIMIT)) {
            diverged_at = Some(n);
            break;
        }
        data.extend_from_slice(&unit.output);
        if n + 1 < n_steps {
            unit.step(None)?;
        }
    }
    Ok(AutonomousRun {
        outputs: output_trajectory(dt, 0.0, n_out, data, None)?,
        diverged_at,
    })
}

/// Partially driven run. Output row `n` is `v(n+1)`, aligned with
/// `drive.row(n + 1)`; the output carries the drive's scaler.
pub fn run_driven(
    trained: &TrainedReservoir,
    mask: &DriveMask,
    drive: &Trajectory,
    r0: ReservoirState,
    n_steps: usize,
) -> Result<Trajectory> {
    run_driven_with_states(trained, mask, drive, r0, n_steps, |_, _| {})
}

/// [`run_driven`] that also reports each reservoir state after step `n`.
pub fn run_driven_with_states<V>(
    trained: &TrainedReservoir,
    mask: &DriveMask,
    drive: &Trajectory,
    r0: ReservoirState,
    n_steps: usize,
    mut visit: V,
) -> Result<Trajectory>
where
    V: FnMut(usize, &ReservoirState),
{
    check_drive(drive, mask, n_steps)?;
    let n_out = trained.config().n_out;
    let mut unit = Unit::new(trained, mask, r0)?;
    let mut data = Vec::with_capacity(n_steps * n_out);
    for n in 0..n_steps {
        unit.step(Some(drive.row(n)))?;
        unit.bounded(n)?;
        visit(n, &unit.state);
        data.extend_from_slice(&unit.output);
    }
    output_trajectory(drive.dt(), drive.time(1), n_out, data, drive.scaler())
}

/// Truth rows matching the outputs of an `n_steps` driven run.
pub fn aligned_truth(drive: &Trajectory, n_steps: usize) -> Result<Trajectory> {
    drive.slice(1..n_steps + 1)
}

#[derive(Debug, Clone)]
pub struct AuxiliaryReport {
    pub outputs_a: Trajectory,
    pub outputs_b: Trajectory,
    /// Mean absolute output difference over the final quarter of the run.
    pub tail_difference: f64,
    pub converged: bool,
}

/// Generalized-synchronization test: two copies of the same trained
/// reservoir, different initial states, identical drive. The response has
/// lost its dependence on initial conditions iff the outputs coincide.
pub fn auxiliary_test(
    trained: &TrainedReservoir,
    mask: &DriveMask,
    drive: &Trajectory,
    r0_a: ReservoirState,
    r0_b: ReservoirState,
    n_steps: usize,
) -> Result<AuxiliaryReport> {
    let outputs_a = run_driven(trained, mask, drive, r0_a, n_steps)?;
    let outputs_b = run_driven(trained, mask, drive, r0_b, n_steps)?;
    let tail_difference = tail_mean_abs_diff(&outputs_a, &outputs_b);
    Ok(AuxiliaryReport {
        outputs_a,
        outputs_b,
        tail_difference,
        converged: tail_difference < AUX_TOLERANCE,
    })
}

fn tail_mean_abs_diff(a: &Trajectory, b: &Trajectory) -> f64 {
    let len = a.len().min(b.len());
    let start = len - ((len as f64 * AUX_TAIL_FRACTION).ceil() as usize).min(len);
    let width = a.n_channels();
    let total: f64 = (start..len)
        .flat_map(|i| a.row(i).iter().zip(b.row(i)).map(|(x, y)| (x - y).abs()))
        .sum();
    total / ((len - start).max(1) * width) as f64
}

/// Trained reservoirs relaying one observable down a line.
#[derive(Debug, Clone)]
pub struct ChainSpec {
    pub stages: Vec<TrainedReservoir>,
    /// Output channel handed from each stage to the next; stage 0 reads it
    /// from the physical drive.
    pub relay_channel: usize,
}

impl ChainSpec {
    pub fn validate(&self) -> Result<()> {
        let first = self
            .stages
            .first()
            .ok_or_else(|| Error::Contract("chain needs at least one stage".into()))?
            .config();
        for s in &self.stages {
            if s.config().n_in != first.n_in || s.config().n_out != first.n_out {
                return Err(Error::Contract(
                    "chain stages must share input/output widths".into(),
                ));
            }
        }
        if self.relay_channel >= first.n_out {
            return Err(Error::Contract(format!(
                "relay channel {} is not an output channel",
                self.relay_channel
            )));
        }
        Ok(())
    }

    fn mask(&self) -> DriveMask {
        DriveMask::driven(self.stages[0].config().n_out, &[self.relay_channel])
    }
}

/// Runs a relay chain. Within a step, stage `i > 0` is driven by the
/// relay-channel output stage `i - 1` held at the start of the step (its
/// estimate of the observable at row `n`), so every stage stays aligned
/// with the drive. Returns one output trajectory per stage; the last is
/// the remote stage.
pub fn run_chain(
    chain: &ChainSpec,
    drive: &Trajectory,
    r0s: Vec<ReservoirState>,
    n_steps: usize,
) -> Result<Vec<Trajectory>> {
    chain.validate()?;
    if r0s.len() != chain.stages.len() {
        return Err(Error::Contract(format!(
            "{} initial states for {} stages",
            r0s.len(),
            chain.stages.len()
        )));
    }
    let mask = chain.mask();
    check_drive(drive, &mask, n_steps)?;
    let relay = chain.relay_channel;
    let n_out = chain.stages[0].config().n_out;
    let mut units = chain
        .stages
        .iter()
        .zip(r0s)
        .enumerate()
        .map(|(i, (t, r0))| Unit::new(t, &mask, r0).map_err(|e| stage_err(i, e)))
        .collect::<Result<Vec<_>>>()?;
    let mut data: Vec<Vec<f64>> = vec![Vec::with_capacity(n_steps * n_out); units.len()];
    let mut relayed = vec![0.0; units.len()];
    let mut row = vec![0.0; n_out];
    for n in 0..n_steps {
        relayed[0] = drive.row(n)[relay];
        for i in 1..units.len() {
            relayed[i] = units[i - 1].output[relay];
        }
        for (i, unit) in units.iter_mut().enumerate() {
            row[relay] = relayed[i];
            unit.mask
                .fill_input(&unit.output, Some(&row), &mut unit.input);
            unit.advance()
                .and_then(|_| unit.bounded(n))
                .map_err(|e| stage_err(i, e))?;
            data[i].extend_from_slice(&unit.output);
        }
    }
    data.into_iter()
        .map(|d| output_trajectory(drive.dt(), drive.time(1), n_out, d, drive.scaler()))
        .collect()
}

fn stage_err(stage: usize, source: Error) -> Error {
    Error::Stage {
        stage,
        source: Box::new(source),
    }
}

/// Identical copies of one trained reservoir, coupled all-to-all through
/// their fed-back outputs.
#[derive(Debug, Clone)]
pub struct ParallelSpec {
    pub trained: TrainedReservoir,
    pub n_copies: usize,
    pub eps: f64,
    /// Output channels that carry coupling.
    pub coupling_mask: Vec<bool>,
    /// Per-copy routing; coupling only touches `Feedback` channels.
    pub masks: Vec<DriveMask>,
}

impl ParallelSpec {
    pub fn validate(&self) -> Result<()> {
        let cfg = self.trained.config();
        if self.n_copies < 1 || self.masks.len() != self.n_copies {
            return Err(Error::Contract(format!(
                "{} masks for {} copies",
                self.masks.len(),
                self.n_copies
            )));
        }
        if self.coupling_mask.len() != cfg.n_out {
            return Err(Error::Contract(format!(
                "coupling mask has {} entries for {} outputs",
                self.coupling_mask.len(),
                cfg.n_out
            )));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::Domain(format!(
                "coupling strength {} must be >= 0",
                self.eps
            )));
        }
        Ok(())
    }
}

/// Runs the coupled ensemble. At each step every copy's coupled feedback
/// channels become `v_i + eps * Σ_j (v_j - v_i)`, computed from the outputs
/// all copies held at the start of the step; copies then advance together.
pub fn run_parallel(
    par: &ParallelSpec,
    drives: &[Trajectory],
    r0s: Vec<ReservoirState>,
    n_steps: usize,
) -> Result<Vec<Trajectory>> {
    par.validate()?;
    if drives.len() != par.n_copies || r0s.len() != par.n_copies {
        return Err(Error::Contract(format!(
            "{} drives and {} initial states for {} copies",
            drives.len(),
            r0s.len(),
            par.n_copies
        )));
    }
    for (d, m) in drives.iter().zip(&par.masks) {
        check_drive(d, m, n_steps)?;
    }
    let n_out = par.trained.config().n_out;
    let mut units = par
        .masks
        .iter()
        .zip(r0s)
        .map(|(m, r0)| Unit::new(&par.trained, m, r0))
        .collect::<Result<Vec<_>>>()?;
    let coupled: Vec<Vec<usize>> = par
        .masks
        .iter()
        .map(|m| {
            m.feedback_channels()
                .into_iter()
                .filter(|&c| par.coupling_mask[c])
                .collect()
        })
        .collect();
    let mut data: Vec<Vec<f64>> = vec![Vec::with_capacity(n_steps * n_out); units.len()];
    let mut snapshot = vec![vec![0.0; n_out]; units.len()];
    for n in 0..n_steps {
        for (s, u) in snapshot.iter_mut().zip(&units) {
            s.copy_from_slice(&u.output);
        }
        for (i, unit) in units.iter_mut().enumerate() {
            unit.mask
                .fill_input(&snapshot[i], Some(drives[i].row(n)), &mut unit.input);
            for &c in &coupled[i] {
                let pull: f64 = snapshot.iter().map(|v| v[c] - snapshot[i][c]).sum();
                unit.input[c] += par.eps * pull;
            }
        }
        for (i, unit) in units.iter_mut().enumerate() {
            unit.advance()?;
            unit.bounded(n)?;
            data[i].extend_from_slice(&unit.output);
        }
    }
    data.into_iter()
        .zip(drives)
        .map(|(d, drive)| output_trajectory(drive.dt(), drive.time(1), n_out, d, drive.scaler()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{make_dataset, DatasetSplit, SamplingProtocol, SystemSpec};
    use crate::reservoir::ReservoirConfig;
    use crate::training::train;

    fn small_lorenz() -> (TrainedReservoir, Trajectory) {
        let protocol = SamplingProtocol {
            transient_time: 50.0,
            record_len: 3000,
            ..Default::default()
        };
        let split = DatasetSplit::for_record(200, 1500, 3000).unwrap();
        let (data, split) = make_dataset(&SystemSpec::lorenz(60.0), &protocol, split, 1).unwrap();
        let cfg = ReservoirConfig::from_tuple((120, 0.25, 0.99, 0.95, 1.0, 1e-8), 3).with_seed(3);
        let trained = train(&data, &cfg, split).unwrap();
        let test = data.slice(split.test_start()..data.len()).unwrap();
        (trained, test)
    }

    #[test]
    fn mask_validation() {
        let m = DriveMask::driven(2, &[1]).with_aux(1.0);
        assert!(m.validate(3, 2).is_ok());
        assert!(m.validate(3, 3).is_err());
        assert!(DriveMask::new(vec![ChannelMode::ConstantAux(1.0)])
            .validate(1, 1)
            .is_err());
        assert_eq!(m.driven_channels(), vec![1]);
        assert_eq!(m.feedback_channels(), vec![0]);
    }

    #[test]
    fn mask_toml_shape() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct Wrap {
            mask: DriveMask,
        }
        let w = Wrap {
            mask: DriveMask::driven(2, &[1]).with_aux(1.0),
        };
        let text = toml::to_string(&w).unwrap();
        assert_eq!(toml::from_str::<Wrap>(&text).unwrap(), w);
    }

    #[test]
    fn zero_readout_is_zero_forever() {
        let (mut trained, _) = small_lorenz();
        let f = trained.config().feature_len();
        trained.readout = crate::reservoir::ReadoutMatrix::zeros(3, f);
        let run = run_autonomous(
            &trained,
            &DriveMask::autonomous(3),
            ReservoirState::random(120, 3, 1),
            0.02,
            200,
        )
        .unwrap();
        assert!(run.outputs.as_slice().iter().all(|&v| v == 0.0));
        assert_eq!(run.outputs.len(), 200);
    }

    #[test]
    fn autonomous_is_deterministic_and_rejects_drive() {
        let (trained, test) = small_lorenz();
        let warm = |seed| {
            warm_start(
                &trained,
                (0..400).map(|k| test.row(k)),
                ReservoirState::random(120, 3, seed),
            )
            .unwrap()
        };
        let mask = DriveMask::autonomous(3);
        let a = run_autonomous(&trained, &mask, warm(1), 0.02, 300).unwrap();
        let b = run_autonomous(&trained, &mask, warm(1), 0.02, 300).unwrap();
        assert_eq!(a.outputs, b.outputs);
        assert!(run_autonomous(&trained, &DriveMask::driven(3, &[1]), warm(1), 0.02, 10).is_err());
    }

    #[test]
    fn fully_driven_is_teacher_forcing() {
        let (trained, test) = small_lorenz();
        let mask = DriveMask::driven(3, &[0, 1, 2]);
        let r0 = ReservoirState::random(120, 3, 9);
        let mut driven_states = Vec::new();
        run_driven_with_states(&trained, &mask, &test, r0.clone(), 500, |_, s| {
            driven_states.push(s.clone())
        })
        .unwrap();
        let forced = trained
            .reservoir
            .run_teacher_forced((0..500).map(|k| test.row(k)), r0)
            .unwrap();
        assert_eq!(driven_states, forced);
    }

    #[test]
    fn driven_is_causal() {
        let (trained, test) = small_lorenz();
        let mask = DriveMask::driven(3, &[1]);
        let r0 = ReservoirState::random(120, 3, 2);
        let base = run_driven(&trained, &mask, &test, r0.clone(), 300).unwrap();
        let mut raw = test.as_slice().to_vec();
        let k = 150;
        raw[k * 3 + 1] += 0.3;
        let bumped = Trajectory::from_rows(test.dt(), test.t0(), 3, raw).unwrap();
        let other = run_driven(&trained, &mask, &bumped, r0, 300).unwrap();
        // Row n holds v(n+1), which depends on drive rows 0..=n.
        for n in 0..k {
            assert_eq!(base.row(n), other.row(n), "row {n}");
        }
        assert_ne!(base.row(k), other.row(k));
    }

    #[test]
    fn short_drive_is_rejected() {
        let (trained, test) = small_lorenz();
        let short = test.slice(0..50).unwrap();
        let err = run_driven(
            &trained,
            &DriveMask::driven(3, &[1]),
            &short,
            ReservoirState::zeros(120, 3),
            50,
        );
        assert!(matches!(err, Err(Error::Contract(_))));
    }

    #[test]
    fn auxiliary_identical_start_is_exact() {
        let (trained, test) = small_lorenz();
        let r0 = ReservoirState::random(120, 3, 4);
        let rep = auxiliary_test(
            &trained,
            &DriveMask::driven(3, &[1]),
            &test,
            r0.clone(),
            r0,
            400,
        )
        .unwrap();
        assert_eq!(rep.outputs_a, rep.outputs_b);
        assert_eq!(rep.tail_difference, 0.0);
        assert!(rep.converged);
    }

    #[test]
    fn auxiliary_is_symmetric() {
        let (trained, test) = small_lorenz();
        let mask = DriveMask::driven(3, &[1]);
        let (a, b) = (
            ReservoirState::random(120, 3, 4),
            ReservoirState::random(120, 3, 5),
        );
        let ab = auxiliary_test(&trained, &mask, &test, a.clone(), b.clone(), 600).unwrap();
        let ba = auxiliary_test(&trained, &mask, &test, b, a, 600).unwrap();
        assert_eq!(ab.tail_difference, ba.tail_difference);
        assert_eq!(ab.converged, ba.converged);
    }

    #[test]
    fn single_stage_chain_is_driven_run() {
        let (trained, test) = small_lorenz();
        let r0 = ReservoirState::random(120, 3, 7);
        let chain = ChainSpec {
            stages: vec![trained.clone()],
            relay_channel: 1,
        };
        let out = run_chain(&chain, &test, vec![r0.clone()], 300).unwrap();
        let direct = run_driven(&trained, &DriveMask::driven(3, &[1]), &test, r0, 300).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0], direct);
    }

    #[test]
    fn uncoupled_parallel_is_independent_runs() {
        let (trained, test) = small_lorenz();
        let mask = DriveMask::driven(3, &[1]);
        let par = ParallelSpec {
            trained: trained.clone(),
            n_copies: 3,
            eps: 0.0,
            coupling_mask: vec![true; 3],
            masks: vec![mask.clone(); 3],
        };
        let drives: Vec<Trajectory> = (0..3)
            .map(|i| test.slice(i * 100..test.len()).unwrap())
            .collect();
        let r0s: Vec<ReservoirState> = (0..3)
            .map(|i| ReservoirState::random(120, 3, 20 + i))
            .collect();
        let out = run_parallel(&par, &drives, r0s.clone(), 300).unwrap();
        for i in 0..3 {
            let solo = run_driven(&trained, &mask, &drives[i], r0s[i].clone(), 300).unwrap();
            assert_eq!(out[i], solo);
        }
    }

    #[test]
    fn parallel_rejects_mismatched_inputs() {
        let (trained, test) = small_lorenz();
        let par = ParallelSpec {
            trained,
            n_copies: 2,
            eps: 0.1,
            coupling_mask: vec![true; 3],
            masks: vec![DriveMask::driven(3, &[1]); 2],
        };
        assert!(run_parallel(&par, &[test], vec![ReservoirState::zeros(120, 3); 2], 10).is_err());
    }
}
