//! Sampler audits against a memory filled by a random policy.

use std::fmt::Write as _;

use replay_core::memory::{check_consistency, ReplayMemory};
use replay_core::replay::SlotId;
use replay_core::rng;
use replay_core::sampling::{audit_distribution, AuditReport, SamplerConfig};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::experiment::run_seed;
use crate::report::fill_random;

#[derive(Debug, Clone)]
pub struct AuditResult {
    pub sampler: SamplerConfig,
    pub report: AuditReport,
}

impl AuditResult {
    pub fn label(&self) -> String {
        format!("{}(b={})", self.sampler.strategy(), self.sampler.effective_beta())
    }
}

/// Memory holding `report_steps` random-policy transitions (the most recent
/// `buffer_size` of them).
pub fn random_memory(config: &ExperimentConfig) -> Result<ReplayMemory> {
    let seed = run_seed(config.master_seed, config.seeds.first().copied().unwrap_or(0));
    let mut env = config.make_env(seed)?;
    let mut memory = config.make_memory(seed)?;
    fill_random(env.as_mut(), &mut memory, config.report_steps, seed)?;
    if !memory.is_indexed() {
        return Err(HarnessError::Config(format!(
            "{} random steps are not enough to fit the clusterer",
            config.report_steps
        )));
    }
    Ok(memory)
}

/// Distinct samplers of the sweep, in sweep order.
pub fn samplers(config: &ExperimentConfig) -> Result<Vec<SamplerConfig>> {
    let mut out: Vec<SamplerConfig> = Vec::new();
    for run in config.runs()? {
        if !out.contains(&run.sampler) {
            out.push(run.sampler);
        }
    }
    Ok(out)
}

/// Audits every configured sampler. With `inject_fault`, one slot is dropped
/// from the cluster index first, which the consistency check must catch.
pub fn run_audit(config: &ExperimentConfig, inject_fault: bool) -> Result<Vec<AuditResult>> {
    config.validate()?;
    let mut memory = random_memory(config)?;
    if inject_fault {
        memory.corrupt_index_for_testing(SlotId(0))?;
    }
    check_consistency(memory.buffer(), memory.index())?;
    let seed = run_seed(config.master_seed, config.seeds.first().copied().unwrap_or(0));
    let mut out = Vec::new();
    for sampler in samplers(config)? {
        let mut r = rng::stream(seed, rng::streams::SAMPLER);
        let report = audit_distribution(config.audit_draws, &sampler, memory.buffer(), memory.index(), &mut r)?;
        out.push(AuditResult { sampler, report });
    }
    Ok(out)
}

pub fn render(results: &[AuditResult]) -> String {
    let mut s = String::new();
    for r in results {
        let _ = writeln!(
            s,
            "{:<28} {} draws over {} slots: max |dev| {:.3e}, max z {:.2} (limit {:.2}) {}",
            r.label(),
            r.report.draws,
            r.report.rows.len(),
            r.report.max_abs_deviation(),
            r.report.max_z(),
            r.report.z_threshold(),
            if r.report.passes() { "PASS" } else { "FAIL" }
        );
    }
    s
}

/// Error if any audit exceeded its bound.
pub fn check(results: &[AuditResult]) -> Result<()> {
    let failed: Vec<String> = results.iter().filter(|r| !r.report.passes()).map(|r| r.label()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::AuditFailed(failed.join(", ")))
    }
}
