use rayon::prelude::*;

use super::{run_simulation, SimulationConfig, Transcript};
use crate::agents::Agent;

/// Supplies the per-player agents for a simulation.
pub trait AgentFactory: Sync {
    fn agents_for(&self, cfg: &SimulationConfig) -> Vec<Box<dyn Agent>>;
}

/// Builds each player's agent from the config's own roster.
#[derive(Debug, Clone, Copy, Default)]
pub struct SpecFactory;

impl AgentFactory for SpecFactory {
    fn agents_for(&self, cfg: &SimulationConfig) -> Vec<Box<dyn Agent>> {
        cfg.agents.iter().map(|a| a.build()).collect()
    }
}

impl<F> AgentFactory for F
where
    F: Fn(&SimulationConfig) -> Vec<Box<dyn Agent>> + Sync,
{
    fn agents_for(&self, cfg: &SimulationConfig) -> Vec<Box<dyn Agent>> {
        self(cfg)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BatchError {
    #[error("parallelism must be at least 1")]
    ZeroParallelism,
    #[error("could not start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Runs `configs` on `parallelism` worker threads and hands each transcript to
/// `sink` in input order. Memory is bounded by one chunk of results.
pub fn run_batch_streaming(
    configs: &[SimulationConfig],
    parallelism: usize,
    factory: &dyn AgentFactory,
    mut sink: impl FnMut(usize, Transcript),
) -> Result<(), BatchError> {
    if parallelism == 0 {
        return Err(BatchError::ZeroParallelism);
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(parallelism).build()?;
    let chunk = parallelism * 8;
    for (c, cfgs) in configs.chunks(chunk).enumerate() {
        let out: Vec<Transcript> =
            pool.install(|| cfgs.par_iter().map(|cfg| run_simulation(cfg, &factory.agents_for(cfg))).collect());
        for (j, t) in out.into_iter().enumerate() {
            sink(c * chunk + j, t);
        }
    }
    Ok(())
}

/// Collects every transcript; output order matches `configs`.
pub fn run_batch(
    configs: &[SimulationConfig],
    parallelism: usize,
    factory: &dyn AgentFactory,
) -> Result<Vec<Transcript>, BatchError> {
    let mut out = Vec::with_capacity(configs.len());
    run_batch_streaming(configs, parallelism, factory, |_, t| out.push(t))?;
    Ok(out)
}
