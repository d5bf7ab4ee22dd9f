//! Deterministic simulation of the exchange, the two fairness attacks, and
//! the evidence-based fairness judgement.

pub mod audit;
pub mod fairness;
pub mod report;
pub mod scenarios;
pub mod world;

pub use audit::{audit_report, AuditOutcome, Finding};
pub use fairness::{evaluate_fairness, FairnessVerdict};
pub use report::{
    AttackReport, Milestone, MilestoneKind, Scenario, SessionTranscript, TranscriptError,
};
pub use scenarios::{run, run_eoo_forward, run_honest, run_replay_attack};
pub use world::{goods_for_session, SenderStrategy, World, WorldConfig};
