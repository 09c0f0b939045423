//! Monte Carlo measurement of end-to-end message loss.
//!
//! Drives the one-directional measurement rig: a pump feeds numbered
//! messages through its retry wrapper and the lossy transport to a
//! counting sink behind the peer wrapper. Each transmission is
//! dropped independently with the configured probability, so a
//! message is lost exactly when all `1 + max_retries` attempts drop,
//! giving the prediction `drop_prob^(max_retries + 1)`.

use thiserror::Error;

use sosc_avsos::loss_system;
use sosc_core::{Terminal, Value};
use sosc_engine::{simulate, BuildError, ExecutionConfig, FaultPolicy, SimError, System};

#[derive(Debug, Clone, PartialEq)]
pub struct LossOptions {
    pub drop_prob: f64,
    pub max_retries: i64,
    pub messages: i64,
    pub seed: u64,
    /// Let acknowledgements be dropped too. Delivered messages whose
    /// acks drop get retransmitted and show up as duplicates; the
    /// loss prediction is unchanged, since a message is lost only
    /// when every data attempt drops.
    pub drop_acks: bool,
}

impl Default for LossOptions {
    fn default() -> LossOptions {
        LossOptions { drop_prob: 0.0, max_retries: 1, messages: 1000, seed: 0, drop_acks: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub messages_sent: i64,
    pub delivered_at_least_once: i64,
    pub observed_loss_rate: f64,
    pub predicted_loss_rate: f64,
    pub duplicates_delivered: i64,
    pub seed: u64,
}

impl LossReport {
    pub fn to_json(&self) -> String {
        format!(
            "{{\"messagesSent\":{},\"deliveredAtLeastOnce\":{},\"observedLossRate\":{},\"predictedLossRate\":{},\"duplicatesDelivered\":{},\"seed\":{}}}",
            self.messages_sent,
            self.delivered_at_least_once,
            self.observed_loss_rate,
            self.predicted_loss_rate,
            self.duplicates_delivered,
            self.seed,
        )
    }
}

#[derive(Debug, Error)]
pub enum LossError {
    #[error("messages must be at least 1")]
    NoMessages,
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("run ended as {0} before every message resolved")]
    Unresolved(&'static str),
    #[error("rig state `{0}` is missing")]
    RigState(String),
}

fn int_var(
    sys: &System,
    cfg: &sosc_engine::GlobalConfig,
    inst: &str,
    var: &str,
) -> Result<i64, LossError> {
    let idx = sys
        .instances
        .iter()
        .position(|i| i.id == inst)
        .ok_or_else(|| LossError::RigState(inst.to_string()))?;
    match cfg.machines[idx].vars.get(var) {
        Some(Value::Int(n)) => Ok(*n),
        _ => Err(LossError::RigState(format!("{inst}.{var}"))),
    }
}

pub fn monte_carlo_loss(opts: &LossOptions) -> Result<LossReport, LossError> {
    if opts.messages < 1 {
        return Err(LossError::NoMessages);
    }
    let sys = loss_system(opts.messages, opts.max_retries)?;
    let policy = FaultPolicy::Probabilistic {
        drop_prob: opts.drop_prob,
        drop_acks: opts.drop_acks,
        window: None,
    };
    // Generous per-message step allowance; the loop only runs the
    // steps that actually happen, the cap just bounds a runaway.
    let attempts = opts.max_retries.max(0) as u64 + 1;
    let exec = ExecutionConfig {
        max_steps: opts.messages as u64 * (40 + 40 * attempts) + 200,
        seed: opts.seed,
        record_internal: false,
    };
    let run = simulate(&sys, &policy, &exec)?;
    if run.trace.terminal != Some(Terminal::DeadlockBeforeBound) {
        return Err(LossError::Unresolved(
            run.trace.terminal.map(Terminal::name).unwrap_or("no terminal"),
        ));
    }

    let delivered = int_var(&sys, &run.final_config, "sink", "got")?;
    let duplicates = int_var(&sys, &run.final_config, "w_2_1", "rcv_dups")?;
    Ok(LossReport {
        messages_sent: opts.messages,
        delivered_at_least_once: delivered,
        observed_loss_rate: (opts.messages - delivered) as f64 / opts.messages as f64,
        predicted_loss_rate: opts.drop_prob.powi(opts.max_retries.max(0) as i32 + 1),
        duplicates_delivered: duplicates,
        seed: opts.seed,
    })
}
