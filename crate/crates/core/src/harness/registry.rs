//! Built-in experiments, one per figure panel.

use std::fmt::Write as _;

use super::config::{
    ChainSetup, Check, DataSource, DrivenSetup, ExperimentConfig, LyapunovSetup, MismatchSetup,
    NetworkSource, Op, ParallelSetup, PendulumSetup, ReservoirParams, Setup, StageSetup,
};
use crate::dynamics::{CoupledNetworkSpec, Normalization, SamplingProtocol, SystemSpec};
use crate::error::{Error, Result};

pub const MASTER_SEED: u64 = 20_210_917;
pub const N_SEEDS: usize = 10;

const Y: usize = 1;

const FIG1_RC: ReservoirParams = ReservoirParams::new(500, 0.25, 0.99, 0.95, 1.0, 1e-10);
const FIG2A_RC: ReservoirParams = ReservoirParams::new(500, 0.1, 0.99, 0.85, 1.0, 1e-10);

// Lorenz and Chen variables scale with the parameters (z roughly with rho),
// so zero-anchored scaling keeps different parameter values commensurate.
fn lorenz(rho: f64) -> DataSource {
    DataSource::new(SystemSpec::lorenz(rho), SamplingProtocol::default())
        .with_scaling(Normalization::MaxAbs)
}

pub fn rossler_protocol() -> SamplingProtocol {
    SamplingProtocol {
        dt: 0.2,
        transient_time: 1e3,
        record_len: 10_000,
        substeps: 10,
    }
}

pub fn chen_protocol() -> SamplingProtocol {
    SamplingProtocol {
        dt: 0.01,
        transient_time: 1e3,
        record_len: 10_000,
        substeps: 1,
    }
}

pub fn hindmarsh_rose_protocol() -> SamplingProtocol {
    SamplingProtocol {
        dt: 0.1,
        transient_time: 2e3,
        record_len: 10_000,
        substeps: 5,
    }
}

fn lt(metric: &str, value: f64) -> Check {
    Check::new(metric, Op::Lt, value)
}

fn ge(metric: &str, value: f64) -> Check {
    Check::new(metric, Op::Ge, value)
}

fn le(metric: &str, value: f64) -> Check {
    Check::new(metric, Op::Le, value)
}

fn experiment(id: &str, description: &str, setup: Setup, checks: Vec<Check>) -> ExperimentConfig {
    ExperimentConfig {
        id: id.into(),
        description: description.into(),
        master_seed: MASTER_SEED,
        n_seeds: N_SEEDS,
        discard: 500,
        r0_scale: 0.01,
        setup,
        checks,
    }
}

fn driven(train: DataSource, drive: DataSource, reservoir: ReservoirParams) -> Setup {
    Setup::Driven(DrivenSetup {
        train,
        drive,
        reservoir,
        driven: vec![Y],
        auxiliary: false,
    })
}

fn transfer_checks() -> Vec<Check> {
    vec![lt("delta_x", 0.1), ge("phase_z", 0.5)]
}

/// Every registered experiment, in figure order.
pub fn builtins() -> Vec<ExperimentConfig> {
    let rossler_c4 = DataSource::new(SystemSpec::rossler(4.0), rossler_protocol());
    let rossler_c45 = DataSource::new(SystemSpec::rossler(4.5), rossler_protocol());
    let chen_p8 = DataSource::new(SystemSpec::chen(45.0, 3.18, 28.0), chen_protocol())
        .with_scaling(Normalization::MaxAbs);
    let chen_chaos = DataSource::new(SystemSpec::chen(35.0, 3.0, 28.0), chen_protocol())
        .with_scaling(Normalization::MaxAbs);
    let hr_p3 = DataSource::new(SystemSpec::hindmarsh_rose(2.1), hindmarsh_rose_protocol());
    let hr_chaos = DataSource::new(SystemSpec::hindmarsh_rose(2.8), hindmarsh_rose_protocol());

    // Trained at the finer Rossler step; at dt = 0.2 the Lorenz-driven
    // loop runs away before the auxiliary pair can be compared.
    let rossler_fine = SamplingProtocol {
        dt: 0.1,
        substeps: 5,
        ..rossler_protocol()
    };
    let mut fig5b = driven(
        DataSource::new(SystemSpec::rossler(4.5), rossler_fine),
        lorenz(60.0),
        ReservoirParams::new(500, 0.2, 0.95, 0.9, 1.0, 1e-10),
    );
    if let Setup::Driven(d) = &mut fig5b {
        d.auxiliary = true;
    }

    let stage = |rho: f64, reservoir: ReservoirParams| StageSetup {
        train: lorenz(rho),
        reservoir,
    };

    let network = |rho: f64, eps: f64| NetworkSource {
        network: CoupledNetworkSpec::diagonal(SystemSpec::lorenz(rho), 3, eps)
            .expect("valid network"),
        protocol: SamplingProtocol::default(),
        washout: 400,
        train: 2600,
        scaling: Normalization::MaxAbs,
    };

    let pendulum = DataSource {
        system: SystemSpec::pendulum_reference(),
        protocol: SamplingProtocol {
            dt: 0.05,
            transient_time: 1e3,
            record_len: 83_400,
            substeps: 1,
        },
        washout: 400,
        train: 80_000,
        scaling: Normalization::MinMax,
    };

    vec![
        experiment(
            "fig1",
            "Same-system inference: train and drive chaotic Lorenz (rho = 60) through y",
            driven(lorenz(60.0), lorenz(60.0), FIG1_RC),
            vec![lt("delta_x", 0.05), lt("delta_z", 0.05)],
        ),
        experiment(
            "fig2a",
            "Periodic to chaotic: train period-4 Lorenz (rho = 166), drive with rho = 60",
            driven(lorenz(166.0), lorenz(60.0), FIG2A_RC),
            transfer_checks(),
        ),
        experiment(
            "fig2b",
            "Chaotic to periodic: train Lorenz rho = 60, drive with period-4 rho = 166",
            driven(lorenz(60.0), lorenz(166.0), FIG1_RC),
            transfer_checks(),
        ),
        experiment(
            "fig2c",
            "Chaotic to chaotic: train Lorenz rho = 60, drive with rho = 50",
            driven(lorenz(60.0), lorenz(50.0), FIG1_RC),
            transfer_checks(),
        ),
        experiment(
            "fig3",
            "Mismatch sweep: train Lorenz rho = 60, drive with rho = 60 - d for d = 0..15",
            Setup::Mismatch(MismatchSetup {
                train: lorenz(60.0),
                reservoir: FIG1_RC,
                driven: vec![Y],
                parameter: 1,
                deltas: (0..=15).map(f64::from).collect(),
                shared_scaler: false,
            }),
            vec![ge("spearman_x", 0.9), ge("spearman_z", 0.9)],
        ),
        experiment(
            "fig4a",
            "Rossler: train period-4 (c = 4), drive with chaotic c = 4.5",
            driven(
                rossler_c4,
                rossler_c45,
                ReservoirParams::new(500, 0.27, 0.95, 0.95, 0.5, 1e-10),
            ),
            vec![lt("delta_x", 0.1)],
        ),
        experiment(
            "fig4b",
            "Chen: train period-8 (45, 3.18, 28), drive with chaotic (35, 3, 28)",
            driven(
                chen_p8.clone(),
                chen_chaos,
                ReservoirParams::new(500, 0.17, 0.8, 0.9, 0.65, 1e-10),
            ),
            transfer_checks(),
        ),
        experiment(
            "fig4c",
            "Hindmarsh-Rose: train period-3 bursting (I = 2.1), drive with chaotic I = 2.8",
            driven(
                hr_p3,
                hr_chaos,
                ReservoirParams::new(500, 0.36, 0.6, 0.8, 0.73, 8e-6),
            ),
            vec![lt("delta_x", 0.1)],
        ),
        experiment(
            "fig5a",
            "Cross-family: train period-8 Chen, drive with chaotic Lorenz (rho = 60)",
            driven(
                chen_p8,
                lorenz(60.0),
                ReservoirParams::new(500, 0.25, 0.8, 0.5, 0.3, 1e-9),
            ),
            transfer_checks(),
        ),
        experiment(
            "fig5b",
            "Cross-family failure: train chaotic Rossler (c = 4.5), drive with chaotic Lorenz (rho = 60); \
             expected to desynchronize while an auxiliary copy converges",
            fig5b,
            vec![ge("delta_x", 0.3), ge("aux_converged", 0.5)],
        ),
        experiment(
            "fig6",
            "Relay chain of five reservoirs trained on Lorenz rho = 55, 166, 60, 45, 313; drive rho = 50",
            Setup::Chain(ChainSetup {
                drive: lorenz(50.0),
                relay_channel: Y,
                stages: vec![
                    stage(55.0, ReservoirParams::new(500, 0.35, 0.95, 0.8, 0.1, 1e-10)),
                    stage(166.0, FIG2A_RC),
                    stage(60.0, FIG1_RC),
                    stage(45.0, ReservoirParams::new(500, 0.25, 0.95, 0.9, 0.5, 1e-10)),
                    stage(313.0, ReservoirParams::new(500, 0.15, 0.85, 0.99, 0.4, 1e-11)),
                ],
            }),
            vec![lt("delta_x", 0.15), lt("delta_z", 0.15)],
        ),
        experiment(
            "fig7",
            "Parallel reservoirs: train on node 1 of three coupled periodic Lorenz (rho = 166, eps = 1e-3); \
             drive three coupled copies (eps = 2e-2) with desynchronized chaotic nodes (rho = 60, eps = 2e-2)",
            Setup::Parallel(ParallelSetup {
                train: network(166.0, 1e-3),
                train_node: 0,
                drive: network(60.0, 2e-2),
                reservoir: ReservoirParams::new(500, 0.35, 0.99, 0.95, 1.0, 1e-10),
                rc_eps: 2e-2,
                coupling_mask: vec![true; 3],
                driven: vec![Y],
            }),
            vec![
                ge("desync_drive", 0.1),
                lt("delta_x1", 0.15),
                lt("delta_x2", 0.15),
                lt("delta_x3", 0.15),
                lt("delta_z1", 0.15),
                lt("delta_z2", 0.15),
                lt("delta_z3", 0.15),
            ],
        ),
        experiment(
            "fig8",
            "Forced pendulum: closed-loop prediction horizon and inference of theta from omega",
            Setup::Pendulum(PendulumSetup {
                data: pendulum,
                reservoir: ReservoirParams::new(500, 0.3, 0.8, 0.5, 1.0, 2e-8),
                warmup: 400,
                horizon_steps: 2000,
                vpt_threshold: crate::metrics::VPT_THRESHOLD,
                lyapunov: LyapunovSetup {
                    dt: 0.01,
                    total_time: 1e4,
                    renorm_interval: 1.0,
                    transient_time: 100.0,
                },
                driven: vec![1],
                external_drive: None,
            }),
            vec![
                ge("lyapunov_bits", 0.19),
                le("lyapunov_bits", 0.29),
                ge("vpt_lyapunov", 8.0),
                lt("delta_theta", 0.05),
            ],
        ),
    ]
}

pub fn ids() -> Vec<String> {
    builtins().into_iter().map(|c| c.id).collect()
}

pub fn lookup(id: &str) -> Result<ExperimentConfig> {
    builtins()
        .into_iter()
        .find(|c| c.id == id)
        .ok_or_else(|| Error::UnknownExperiment {
            id: id.into(),
            registered: ids(),
        })
}

fn system_line(s: &SystemSpec) -> String {
    let params: Vec<String> = s.params().iter().map(|p| p.to_string()).collect();
    format!("{} ({})", s.family(), params.join(", "))
}

fn source_line(label: &str, src: &DataSource) -> String {
    format!(
        "  {label}: {}; dt = {}, transient = {}, rows = {}, washout = {}, train = {}, scaling {:?}\n",
        system_line(&src.system),
        src.protocol.dt,
        src.protocol.transient_time,
        src.protocol.record_len,
        src.washout,
        src.train,
        src.scaling
    )
}

fn network_line(label: &str, src: &NetworkSource) -> String {
    let coupled: Vec<&str> = src
        .network
        .node
        .family()
        .channel_names()
        .iter()
        .zip(&src.network.coupling_mask)
        .filter(|(_, &m)| m)
        .map(|(n, _)| *n)
        .collect();
    format!(
        "  {label}: {} coupled {} nodes of {}, eps = {}, coupled channels [{}]; dt = {}, rows = {}\n",
        if src.network.n_nodes > 2 { "globally" } else { "pairwise" },
        src.network.n_nodes,
        system_line(&src.network.node),
        src.network.eps,
        coupled.join(", "),
        src.protocol.dt,
        src.protocol.record_len
    )
}

/// Human-readable summary of one experiment.
pub fn describe(cfg: &ExperimentConfig) -> String {
    let mut s = format!("{}: {}\n", cfg.id, cfg.description);
    let _ = writeln!(
        s,
        "  seeds: {} from {}; discard {} steps; initial reservoir states within +-{}",
        cfg.n_seeds, cfg.master_seed, cfg.discard, cfg.r0_scale
    );
    match &cfg.setup {
        Setup::Driven(d) => {
            s.push_str(&source_line("train", &d.train));
            s.push_str(&source_line("drive", &d.drive));
            let _ = writeln!(s, "  reservoir: {}", d.reservoir);
            let _ = writeln!(
                s,
                "  driven channels: {:?}; auxiliary test: {}",
                d.driven, d.auxiliary
            );
        }
        Setup::Mismatch(m) => {
            s.push_str(&source_line("train", &m.train));
            let _ = writeln!(s, "  reservoir: {}", m.reservoir);
            let _ = writeln!(s, "  parameter {} lowered by {:?}", m.parameter, m.deltas);
        }
        Setup::Chain(c) => {
            s.push_str(&source_line("drive", &c.drive));
            let _ = writeln!(s, "  relay channel: {}", c.relay_channel);
            for (k, st) in c.stages.iter().enumerate() {
                s.push_str(&source_line(&format!("stage {}", k + 1), &st.train));
                let _ = writeln!(s, "    reservoir: {}", st.reservoir);
            }
        }
        Setup::Parallel(p) => {
            s.push_str(&network_line("train", &p.train));
            let _ = writeln!(s, "  training node: {}", p.train_node + 1);
            s.push_str(&network_line("drive", &p.drive));
            let _ = writeln!(s, "  reservoir: {}", p.reservoir);
            let _ = writeln!(
                s,
                "  {} reservoir copies coupled with eps = {}, driven channels {:?}",
                p.drive.network.n_nodes, p.rc_eps, p.driven
            );
        }
        Setup::Pendulum(p) => {
            s.push_str(&source_line("data", &p.data));
            let _ = writeln!(s, "  reservoir: {}", p.reservoir);
            let _ = writeln!(
                s,
                "  warmup {}, horizon {} steps, threshold {}; driven channels {:?}",
                p.warmup, p.horizon_steps, p.vpt_threshold, p.driven
            );
            let _ = writeln!(
                s,
                "  lyapunov: dt = {}, T = {}, renormalize every {}",
                p.lyapunov.dt, p.lyapunov.total_time, p.lyapunov.renorm_interval
            );
        }
    }
    for c in &cfg.checks {
        let _ = writeln!(s, "  check: {} {} {}", c.metric, c.op.symbol(), c.value);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique_and_valid() {
        let all = builtins();
        let mut ids: Vec<_> = all.iter().map(|c| c.id.clone()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), all.len());
        for c in &all {
            c.validate().unwrap();
        }
    }

    #[test]
    fn every_config_round_trips() {
        for c in builtins() {
            let text = c.to_toml().unwrap();
            assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c, "{}", c.id);
        }
    }

    #[test]
    fn unknown_id_lists_registered() {
        match lookup("fig9") {
            Err(Error::UnknownExperiment { registered, .. }) => {
                assert!(registered.contains(&"fig7".to_string()))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn describe_fig7_shows_network() {
        let text = describe(&lookup("fig7").unwrap());
        assert!(text.contains("3 nodes"));
        assert!(text.contains("eps = 0.001"));
        assert!(text.contains("eps = 0.02"));
        assert!(text.contains("rho") || text.contains("lorenz (10, 166"));
    }
}
