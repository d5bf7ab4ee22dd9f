//! Scripted runs: the honest exchange and the two fairness attacks.

use super::fairness::FairnessVerdict;
use super::report::{AttackReport, MilestoneKind, Scenario};
use super::world::{SenderStrategy, World, WorldConfig, BYSTANDER, RECEIVER};
use crate::error::{Error, Result};

fn deviation(msg: impl Into<String>) -> Error {
    Error::Deviation(msg.into())
}

/// E1 through E4 with both parties honest.
pub fn run_honest(config: &WorldConfig) -> Result<AttackReport> {
    let mut world = World::new(config.clone())?;
    world.open_session(SenderStrategy::Honest)?;
    world.run_until_quiescent()?;
    let report = world.into_report(Scenario::Honest);
    if report.has_milestone(MilestoneKind::MessageRejected) {
        return Err(deviation("honest run rejected a message"));
    }
    if report.verdict != FairnessVerdict::Fair {
        return Err(deviation(format!(
            "honest run ended {}",
            report.verdict.label()
        )));
    }
    Ok(report)
}

/// Replay of a stale recovery request across two sessions.
///
/// Session 1: `P_a` verifies E2, aborts and keeps `m_1 = <C_bt, y_b, s_b, y_a, r_a>`.
/// Session 2: same again for new goods, then `P_a` sends `m_1` as the R1 of
/// session 2. The STTP releases session 1's `r_b` to `P_a` and session 1's
/// `r_a` to `P_b`, who tries it on session 2's goods and fails.
pub fn run_replay_attack(config: &WorldConfig) -> Result<AttackReport> {
    let mut world = World::new(config.clone())?;

    let first = world.open_session(SenderStrategy::AbortAfterE2)?;
    world.run_until_quiescent()?;
    let m1 = world
        .stashed_recovery(first)
        .cloned()
        .ok_or_else(|| deviation("session 1 left no recovery material"))?;

    let second = world.open_session(SenderStrategy::AbortAfterE2)?;
    world.run_until_quiescent()?;
    if world.stashed_recovery(second).is_none() {
        return Err(deviation("session 2 did not reach E2"));
    }

    world.request_recovery(second, m1, first);
    world.run_until_quiescent()?;

    let report = world.into_report(Scenario::Replay);
    for (kind, what) in [
        (
            MilestoneKind::StaleR1Accepted,
            "STTP did not accept the stale R1",
        ),
        (
            MilestoneKind::ReceiptRecovered,
            "P_a did not recover a receipt",
        ),
        (
            MilestoneKind::R3KeyRejected,
            "P_b did not reject the relayed r_a",
        ),
    ] {
        if !report.has_milestone(kind) {
            return Err(deviation(what));
        }
    }
    if !matches!(report.verdict, FairnessVerdict::UnfairForB { .. }) {
        return Err(deviation(format!(
            "replay run ended {}",
            report.verdict.label()
        )));
    }
    Ok(report)
}

/// Honest exchange between `P_a` and `P_b`, after which `P_b` hands the goods
/// and evidence of origin to `P_c` outside the protocol.
pub fn run_eoo_forward(config: &WorldConfig) -> Result<AttackReport> {
    let mut world = World::new(config.clone())?;
    let session = world.open_session(SenderStrategy::Honest)?;
    world.run_until_quiescent()?;
    if world.evaluate_fairness() != FairnessVerdict::Fair {
        return Err(deviation("exchange before forwarding is not fair"));
    }
    world.note_verdict(MilestoneKind::PreForwardFair);

    let h_a = world
        .sender_session(session)
        .map(|s| s.h_a().clone())
        .ok_or_else(|| deviation("missing sender session"))?;
    world.forward_out_of_band(RECEIVER, BYSTANDER, &h_a)?;

    let report = world.into_report(Scenario::EooForward);
    if !matches!(report.verdict, FairnessVerdict::UnfairForA { .. }) {
        return Err(deviation(format!(
            "forwarding run ended {}",
            report.verdict.label()
        )));
    }
    Ok(report)
}

pub fn run(scenario: Scenario, config: &WorldConfig) -> Result<AttackReport> {
    match scenario {
        Scenario::Honest => run_honest(config),
        Scenario::Replay => run_replay_attack(config),
        Scenario::EooForward => run_eoo_forward(config),
    }
}
