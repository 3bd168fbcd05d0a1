use std::collections::BTreeMap;

use rayon::prelude::*;

use super::config::{
    ChainSetup, Check, DataSource, DrivenSetup, ExperimentConfig, MismatchSetup, NetworkSource,
    ParallelSetup, PendulumSetup, ReservoirParams, Setup,
};
use super::fmt_value;
use super::ingest::ingest_csv;
use crate::dynamics::{record, DatasetSplit, SystemSpec, Trajectory};
use crate::error::{Error, Result};
use crate::inference::{
    aligned_truth, auxiliary_test, run_autonomous, run_chain, run_driven, run_parallel, warm_start,
    ChainSpec, DriveMask, ParallelSpec,
};
use crate::metrics::{
    largest_lyapunov, pairwise_desync, spearman, split_nodes, sync_error, valid_prediction_time,
    LyapunovOptions,
};
use crate::reservoir::ReservoirState;
use crate::seeds::derive;
use crate::training::{median, train, TrainedReservoir};

/// A named file produced by a run, held in memory until written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

pub type Metrics = BTreeMap<String, f64>;

#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub metrics: Metrics,
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub check: Check,
    pub value: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub id: String,
    pub seeds: Vec<SeedOutcome>,
    /// Median over seeds of every per-seed metric, plus experiment-level
    /// aggregates.
    pub summary: Metrics,
    pub checks: Vec<CheckOutcome>,
    /// Experiment-level files (summary, checks, sweep tables).
    pub artifacts: Vec<Artifact>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn all_artifacts(&self) -> impl Iterator<Item = &Artifact> {
        self.artifacts
            .iter()
            .chain(self.seeds.iter().flat_map(|s| &s.artifacts))
    }
}

/// Runs every seed of `cfg` (in parallel), then aggregates and checks.
/// Output is independent of scheduling: seeds are collected in order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let seeds = cfg
        .seeds()
        .into_par_iter()
        .map(|seed| {
            run_seed(cfg, seed).map_err(|e| Error::Experiment {
                experiment: cfg.id.clone(),
                seed,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summary = Metrics::new();
    for key in seeds[0].metrics.keys() {
        let mut values: Vec<f64> = seeds
            .iter()
            .map(|s| s.metrics.get(key).copied().unwrap_or(f64::NAN))
            .collect();
        summary.insert(key.clone(), median(&mut values));
    }
    let mut artifacts = Vec::new();
    if let Setup::Mismatch(m) = &cfg.setup {
        artifacts.push(mismatch_aggregate(m, &mut summary)?);
    }
    let checks = cfg
        .checks
        .iter()
        .map(|c| {
            let value = summary.get(&c.metric).copied().unwrap_or(f64::NAN);
            CheckOutcome {
                check: c.clone(),
                value,
                passed: c.op.holds(value, c.value),
            }
        })
        .collect::<Vec<_>>();
    artifacts.insert(0, summary_csv(&cfg.id, &seeds, &summary)?);
    artifacts.insert(1, checks_csv(&cfg.id, &checks)?);
    Ok(ExperimentReport {
        id: cfg.id.clone(),
        seeds,
        summary,
        checks,
        artifacts,
    })
}

/// Runs a single seed of an experiment.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedOutcome> {
    let ctx = Ctx {
        discard: cfg.discard,
        r0_scale: cfg.r0_scale,
        seed,
    };
    let (metrics, artifacts) = match &cfg.setup {
        Setup::Driven(s) => driven_seed(s, &ctx)?,
        Setup::Mismatch(s) => mismatch_seed(s, &ctx)?,
        Setup::Chain(s) => chain_seed(s, &ctx)?,
        Setup::Parallel(s) => parallel_seed(s, &ctx)?,
        Setup::Pendulum(s) => pendulum_seed(s, &ctx)?,
    };
    Ok(SeedOutcome {
        seed,
        metrics,
        artifacts,
    })
}

type SeedResult = Result<(Metrics, Vec<Artifact>)>;

struct Ctx {
    discard: usize,
    r0_scale: f64,
    seed: u64,
}

impl Ctx {
    fn initial_state(&self, trained: &TrainedReservoir, label: &str) -> ReservoirState {
        let cfg = trained.config();
        let mut state = ReservoirState::random(cfg.n, cfg.n_in, derive(self.seed, label));
        state.r.iter_mut().for_each(|v| *v *= self.r0_scale);
        state
    }
}

fn is_divergence(e: &Error) -> bool {
    match e {
        Error::Divergence { .. } => true,
        Error::Stage { source, .. } => is_divergence(source),
        _ => false,
    }
}

/// A closed loop that runs away has failed to synchronize; that is a
/// result for this seed, not an error for the experiment.
fn unless_diverged<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if is_divergence(&e) => Ok(None),
        Err(e) => Err(e),
    }
}

pub(crate) fn dataset(
    src: &DataSource,
    seed: u64,
    label: &str,
) -> Result<(Trajectory, DatasetSplit)> {
    let split = src.split()?;
    let raw = record(&src.system, &src.protocol, derive(seed, label))?;
    split.check(raw.len())?;
    Ok((raw.normalize_with(src.scaling)?, split))
}

fn network_dataset(
    src: &NetworkSource,
    seed: u64,
    label: &str,
) -> Result<(Trajectory, DatasetSplit)> {
    let split = src.split()?;
    let raw = record(&src.network, &src.protocol, derive(seed, label))?;
    split.check(raw.len())?;
    Ok((raw.normalize_with(src.scaling)?, split))
}

pub(crate) fn test_segment(data: &Trajectory, split: DatasetSplit) -> Result<Trajectory> {
    data.slice(split.test_start()..data.len())
}

fn fit(
    params: &ReservoirParams,
    data: &Trajectory,
    split: DatasetSplit,
    n_out: usize,
    seed: u64,
) -> Result<TrainedReservoir> {
    let cfg = params.config(data.n_channels(), n_out, seed);
    train(data, &cfg, split)
}

fn names(system: &SystemSpec) -> Vec<String> {
    system
        .family()
        .channel_names()
        .iter()
        .map(|s| s.to_string())
        .collect()
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn driven_seed(s: &DrivenSetup, ctx: &Ctx) -> SeedResult {
    let seed = ctx.seed;
    let (data, split) = dataset(&s.train, seed, "train-ic")?;
    let dim = data.n_channels();
    let trained = fit(&s.reservoir, &data, split, dim, derive(seed, "weights"))?;
    let (drive_data, drive_split) = if s.drive == s.train {
        (data, split)
    } else {
        dataset(&s.drive, seed, "drive-ic")?
    };
    let segment = test_segment(&drive_data, drive_split)?;
    let n_steps = segment.len() - 1;
    let mask = DriveMask::driven(dim, &s.driven);
    let r0 = ctx.initial_state(&trained, "r0");
    let mut metrics = Metrics::new();
    let predicted = if s.auxiliary {
        let r0_aux = ctx.initial_state(&trained, "r0-aux");
        match unless_diverged(auxiliary_test(
            &trained, &mask, &segment, r0, r0_aux, n_steps,
        ))? {
            Some(aux) => {
                metrics.insert("aux_tail".into(), aux.tail_difference);
                metrics.insert("aux_converged".into(), flag(aux.converged));
                Some(aux.outputs_a)
            }
            None => {
                metrics.insert("aux_tail".into(), f64::INFINITY);
                metrics.insert("aux_converged".into(), 0.0);
                None
            }
        }
    } else {
        unless_diverged(run_driven(&trained, &mask, &segment, r0, n_steps))?
    };
    let truth = aligned_truth(&segment, n_steps)?;
    let channel_names = names(&s.drive.system);
    let errors = channel_errors(&truth, predicted.as_ref(), ctx.discard)?;
    for c in mask.feedback_channels() {
        metrics.insert(format!("delta_{}", channel_names[c]), errors.delta[c]);
        metrics.insert(format!("phase_{}", channel_names[c]), errors.phase[c]);
    }
    metrics.insert("diverged".into(), flag(predicted.is_none()));
    metrics.insert("train_rmse".into(), trained.train_rmse);
    let mut artifacts = Vec::new();
    if let Some(p) = &predicted {
        artifacts.push(seed_artifact(
            seed,
            "",
            trajectory_csv(&truth, p, &channel_names)?,
        ));
    }
    Ok((metrics, artifacts))
}

struct ChannelErrors {
    delta: Vec<f64>,
    phase: Vec<f64>,
}

/// Per-channel error and phase flag; a diverged run scores infinite error
/// and no phase synchronization on every channel.
fn channel_errors(
    truth: &Trajectory,
    predicted: Option<&Trajectory>,
    discard: usize,
) -> Result<ChannelErrors> {
    let n = truth.n_channels();
    match predicted {
        Some(p) => {
            let report = sync_error(truth, p, discard, None)?;
            Ok(ChannelErrors {
                phase: report.phase_sync.iter().map(|&b| flag(b)).collect(),
                delta: report.errors,
            })
        }
        None => Ok(ChannelErrors {
            delta: vec![f64::INFINITY; n],
            phase: vec![0.0; n],
        }),
    }
}

fn delta_key(channel: &str, delta: f64) -> String {
    format!("delta_{channel}@{delta}")
}

fn mismatch_seed(s: &MismatchSetup, ctx: &Ctx) -> SeedResult {
    let seed = ctx.seed;
    let (data, split) = dataset(&s.train, seed, "train-ic")?;
    let dim = data.n_channels();
    let trained = fit(&s.reservoir, &data, split, dim, derive(seed, "weights"))?;
    let mask = DriveMask::driven(dim, &s.driven);
    let channel_names = names(&s.train.system);
    let mut metrics = Metrics::new();
    let mut artifacts = Vec::new();
    for (i, &delta) in s.deltas.iter().enumerate() {
        let mut params = s.train.system.params().to_vec();
        params[s.parameter] -= delta;
        let drive = DataSource {
            system: SystemSpec::new(s.train.system.family(), params)?,
            ..s.train.clone()
        };
        let (drive_data, drive_split) = if s.shared_scaler {
            let scaler = data.scaler().expect("datasets are normalized").clone();
            let raw = record(&drive.system, &drive.protocol, derive(seed, "drive-ic"))?;
            (raw.apply_scaler(scaler), split)
        } else {
            dataset(&drive, seed, "drive-ic")?
        };
        let segment = test_segment(&drive_data, drive_split)?;
        let n_steps = segment.len() - 1;
        let r0 = ctx.initial_state(&trained, "r0");
        let predicted = unless_diverged(run_driven(&trained, &mask, &segment, r0, n_steps))?;
        let truth = aligned_truth(&segment, n_steps)?;
        let errors = channel_errors(&truth, predicted.as_ref(), ctx.discard)?;
        for c in mask.feedback_channels() {
            metrics.insert(delta_key(&channel_names[c], delta), errors.delta[c]);
        }
        if let (0, Some(p)) = (i, &predicted) {
            artifacts.push(seed_artifact(
                seed,
                "",
                trajectory_csv(&truth, p, &channel_names)?,
            ));
        }
    }
    Ok((metrics, artifacts))
}

/// Adds `spearman_<ch>` (rank correlation of median error against the
/// mismatch) and returns the median sweep table.
fn mismatch_aggregate(s: &MismatchSetup, summary: &mut Metrics) -> Result<Artifact> {
    let channel_names = names(&s.train.system);
    let mask = DriveMask::driven(s.train.system.dim(), &s.driven);
    let feedback = mask.feedback_channels();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["delta".to_string()];
    header.extend(
        feedback
            .iter()
            .map(|&c| format!("delta_{}", channel_names[c])),
    );
    w.write_record(&header)?;
    for &delta in &s.deltas {
        let mut row = vec![fmt_value(delta)];
        row.extend(
            feedback
                .iter()
                .map(|&c| fmt_value(summary[&delta_key(&channel_names[c], delta)])),
        );
        w.write_record(&row)?;
    }
    for &c in &feedback {
        let errs: Vec<f64> = s
            .deltas
            .iter()
            .map(|&d| summary[&delta_key(&channel_names[c], d)])
            .collect();
        summary.insert(
            format!("spearman_{}", channel_names[c]),
            spearman(&s.deltas, &errs),
        );
    }
    Ok(Artifact {
        name: "sweep.csv".into(),
        contents: finish(w)?,
    })
}

fn chain_seed(s: &ChainSetup, ctx: &Ctx) -> SeedResult {
    let seed = ctx.seed;
    let dim = s.drive.system.dim();
    let stages = s
        .stages
        .iter()
        .enumerate()
        .map(|(k, st)| {
            let (data, split) = dataset(&st.train, seed, &format!("train-ic/{k}"))?;
            fit(
                &st.reservoir,
                &data,
                split,
                dim,
                derive(seed, &format!("weights/{k}")),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let (drive_data, drive_split) = dataset(&s.drive, seed, "drive-ic")?;
    let segment = test_segment(&drive_data, drive_split)?;
    let n_steps = segment.len() - 1;
    let r0s = stages
        .iter()
        .enumerate()
        .map(|(k, t)| ctx.initial_state(t, &format!("r0/{k}")))
        .collect();
    let n_stages = stages.len();
    let chain = ChainSpec {
        stages,
        relay_channel: s.relay_channel,
    };
    let outputs = unless_diverged(run_chain(&chain, &segment, r0s, n_steps))?;
    let truth = aligned_truth(&segment, n_steps)?;
    let channel_names = names(&s.drive.system);
    let mut metrics = Metrics::new();
    for k in 0..n_stages {
        let errors = channel_errors(&truth, outputs.as_ref().map(|o| &o[k]), ctx.discard)?;
        for c in (0..dim).filter(|&c| c != s.relay_channel) {
            metrics.insert(
                format!("delta_{}_s{}", channel_names[c], k + 1),
                errors.delta[c],
            );
            if k + 1 == n_stages {
                metrics.insert(format!("delta_{}", channel_names[c]), errors.delta[c]);
            }
        }
    }
    metrics.insert("diverged".into(), flag(outputs.is_none()));
    let mut artifacts = Vec::new();
    if let Some(remote) = outputs.as_ref().and_then(|o| o.last()) {
        artifacts.push(seed_artifact(
            seed,
            "",
            trajectory_csv(&truth, remote, &channel_names)?,
        ));
    }
    Ok((metrics, artifacts))
}

fn parallel_seed(s: &ParallelSetup, ctx: &Ctx) -> SeedResult {
    let seed = ctx.seed;
    let discard = ctx.discard;
    let node_dim = s.train.network.node.dim();
    let node_channels = |i: usize| (i * node_dim..(i + 1) * node_dim).collect::<Vec<_>>();
    let (net_data, split) = network_dataset(&s.train, seed, "train-ic")?;
    let data = net_data.select(&node_channels(s.train_node))?;
    let trained = fit(
        &s.reservoir,
        &data,
        split,
        node_dim,
        derive(seed, "weights"),
    )?;

    let n_nodes = s.drive.network.n_nodes;
    let (drive_data, drive_split) = network_dataset(&s.drive, seed, "drive-ic")?;
    let segment = test_segment(&drive_data, drive_split)?;
    let n_steps = segment.len() - 1;
    let drives = (0..n_nodes)
        .map(|i| segment.select(&node_channels(i)))
        .collect::<Result<Vec<_>>>()?;
    let mask = DriveMask::driven(node_dim, &s.driven);
    let par = ParallelSpec {
        trained,
        n_copies: n_nodes,
        eps: s.rc_eps,
        coupling_mask: s.coupling_mask.clone(),
        masks: vec![mask.clone(); n_nodes],
    };
    let r0s = (0..n_nodes)
        .map(|i| ctx.initial_state(&par.trained, &format!("r0/{i}")))
        .collect();
    let outputs = unless_diverged(run_parallel(&par, &drives, r0s, n_steps))?;

    let truth = aligned_truth(&segment, n_steps)?;
    let truth_nodes = split_nodes(&truth.slice(discard..truth.len())?, n_nodes)?;
    let mut metrics = Metrics::new();
    metrics.insert("desync_drive".into(), pairwise_desync(&truth_nodes)?);
    let base = names(&s.drive.network.node);
    let node_errors = (0..n_nodes)
        .map(|i| {
            let node_truth = aligned_truth(&drives[i], n_steps)?;
            channel_errors(&node_truth, outputs.as_ref().map(|o| &o[i]), discard)
        })
        .collect::<Result<Vec<_>>>()?;
    for c in mask.feedback_channels() {
        let mut worst = 0.0_f64;
        for (i, errors) in node_errors.iter().enumerate() {
            metrics.insert(format!("delta_{}{}", base[c], i + 1), errors.delta[c]);
            worst = worst.max(errors.delta[c]);
        }
        metrics.insert(format!("delta_{}_max", base[c]), worst);
    }
    metrics.insert("diverged".into(), flag(outputs.is_none()));
    let Some(outputs) = outputs else {
        return Ok((metrics, Vec::new()));
    };
    let mut flat = Vec::with_capacity(n_steps * n_nodes * node_dim);
    for r in 0..n_steps {
        for out in &outputs {
            flat.extend_from_slice(out.row(r));
        }
    }
    let predicted = Trajectory::from_rows(truth.dt(), truth.t0(), n_nodes * node_dim, flat)?;
    let net_names: Vec<String> = (1..=n_nodes)
        .flat_map(|i| base.iter().map(move |b| format!("{b}{i}")))
        .collect();
    Ok((
        metrics,
        vec![seed_artifact(
            seed,
            "",
            trajectory_csv(&truth, &predicted, &net_names)?,
        )],
    ))
}

fn pendulum_seed(s: &PendulumSetup, ctx: &Ctx) -> SeedResult {
    let seed = ctx.seed;
    let discard = ctx.discard;
    let system = &s.data.system;
    let omega_d = system.drive_frequency().expect("validated pendulum");
    let split = s.data.split()?;
    let raw = record(system, &s.data.protocol, derive(seed, "train-ic"))?;
    let data = raw
        .normalize_with(s.data.scaling)?
        .with_constant_channel(omega_d);
    split.check(data.len())?;
    let trained = fit(&s.reservoir, &data, split, 2, derive(seed, "weights"))?;
    let channel_names = names(system);
    let mut metrics = Metrics::new();
    let mut artifacts = Vec::new();

    let lyap = largest_lyapunov(
        system,
        &LyapunovOptions {
            dt: s.lyapunov.dt,
            total_time: s.lyapunov.total_time,
            renorm_interval: s.lyapunov.renorm_interval,
            transient_time: s.lyapunov.transient_time,
            seed: derive(seed, "lyapunov"),
        },
    )?;
    metrics.insert("lyapunov_nats".into(), lyap.lambda_max);
    metrics.insert("lyapunov_bits".into(), lyap.lambda_max_bits());

    let start = split.test_start();
    if start < s.warmup || start + s.horizon_steps > data.len() {
        return Err(Error::Contract(format!(
            "warmup {} and horizon {} do not fit around row {start} of {}",
            s.warmup,
            s.horizon_steps,
            data.len()
        )));
    }
    let state = warm_start(
        &trained,
        (start - s.warmup..start).map(|k| data.row(k)),
        ctx.initial_state(&trained, "r0"),
    )?;
    let auto_mask = DriveMask::autonomous(2).with_aux(omega_d);
    let run = run_autonomous(&trained, &auto_mask, state, data.dt(), s.horizon_steps)?;
    let truth = data
        .slice(start..start + s.horizon_steps)?
        .select(&[0, 1])?;
    let vpt = valid_prediction_time(
        &truth,
        &run.outputs,
        lyap.lambda_max_bits(),
        s.vpt_threshold,
    )?;
    metrics.insert("vpt_time".into(), vpt.model_time);
    metrics.insert("vpt_lyapunov".into(), vpt.lyapunov_times);
    let predicted =
        Trajectory::from_rows(truth.dt(), truth.t0(), 2, run.outputs.as_slice().to_vec())?;
    let compared = truth.slice(0..predicted.len())?;
    artifacts.push(seed_artifact(
        seed,
        "_autonomous",
        trajectory_csv(&compared, &predicted, &channel_names)?,
    ));

    let driven_mask = DriveMask::driven(2, &s.driven).with_aux(omega_d);
    let segment = test_segment(&data, split)?;
    let n_steps = segment.len() - 1;
    let r0 = ctx.initial_state(&trained, "r0");
    let predicted = unless_diverged(run_driven(&trained, &driven_mask, &segment, r0, n_steps))?;
    let truth = aligned_truth(&segment, n_steps)?.select(&[0, 1])?;
    let errors = channel_errors(&truth, predicted.as_ref(), discard)?;
    for c in driven_mask.feedback_channels() {
        metrics.insert(format!("delta_{}", channel_names[c]), errors.delta[c]);
    }
    if let Some(p) = &predicted {
        artifacts.push(seed_artifact(
            seed,
            "_driven",
            trajectory_csv(&truth, p, &channel_names)?,
        ));
    }

    if let Some(spec) = &s.external_drive {
        let external = ingest_csv(spec)?.with_constant_channel(omega_d);
        let n_steps = external.len() - 1;
        let r0 = ctx.initial_state(&trained, "r0");
        let predicted =
            unless_diverged(run_driven(&trained, &driven_mask, &external, r0, n_steps))?;
        let truth = aligned_truth(&external, n_steps)?.select(&[0, 1])?;
        let errors = channel_errors(&truth, predicted.as_ref(), discard.min(n_steps / 2))?;
        for c in driven_mask.feedback_channels() {
            metrics.insert(
                format!("delta_{}_external", channel_names[c]),
                errors.delta[c],
            );
        }
        if let Some(p) = &predicted {
            artifacts.push(seed_artifact(
                seed,
                "_external",
                trajectory_csv(&truth, p, &channel_names)?,
            ));
        }
    }
    metrics.insert("train_rmse".into(), trained.train_rmse);
    Ok((metrics, artifacts))
}

fn seed_artifact(seed: u64, suffix: &str, contents: String) -> Artifact {
    Artifact {
        name: format!("seed_{seed}{suffix}.csv"),
        contents,
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Config(format!("flushing csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `t, truth_<ch>..., pred_<ch>...`, rows aligned by index.
pub fn trajectory_csv(
    truth: &Trajectory,
    predicted: &Trajectory,
    channels: &[String],
) -> Result<String> {
    if truth.n_channels() != channels.len() || predicted.n_channels() != channels.len() {
        return Err(Error::Contract(format!(
            "{} channel names for {} truth / {} predicted channels",
            channels.len(),
            truth.n_channels(),
            predicted.n_channels()
        )));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(channels.iter().map(|c| format!("truth_{c}")));
    header.extend(channels.iter().map(|c| format!("pred_{c}")));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for i in 0..truth.len().min(predicted.len()) {
        row.clear();
        row.push(fmt_value(truth.time(i)));
        row.extend(truth.row(i).iter().map(|&v| fmt_value(v)));
        row.extend(predicted.row(i).iter().map(|&v| fmt_value(v)));
        w.write_record(&row)?;
    }
    finish(w)
}

pub const SUMMARY_HEADER: [&str; 4] = ["experiment", "seed", "metric", "value"];

fn summary_csv(id: &str, seeds: &[SeedOutcome], summary: &Metrics) -> Result<Artifact> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER)?;
    for s in seeds {
        for (k, v) in &s.metrics {
            w.write_record([id, &s.seed.to_string(), k, &fmt_value(*v)])?;
        }
    }
    for (k, v) in summary {
        w.write_record([id, "median", k, &fmt_value(*v)])?;
    }
    Ok(Artifact {
        name: "summary.csv".into(),
        contents: finish(w)?,
    })
}

fn checks_csv(id: &str, checks: &[CheckOutcome]) -> Result<Artifact> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["experiment", "metric", "op", "threshold", "value", "pass"])?;
    for c in checks {
        w.write_record([
            id,
            &c.check.metric,
            c.check.op.symbol(),
            &fmt_value(c.check.value),
            &fmt_value(c.value),
            if c.passed { "true" } else { "false" },
        ])?;
    }
    Ok(Artifact {
        name: "checks.csv".into(),
        contents: finish(w)?,
    })
}
