//! Attack reports and their JSON-lines transcript form.
//!
//! A transcript is a sequence of JSON objects, one per line, each carrying a
//! `record` discriminator:
//!
//! | `record`    | content                                                    |
//! |-------------|------------------------------------------------------------|
//! | `setup`     | scenario, world config, CA-signed public-key registry       |
//! | `message`   | `seq`, `session`, `from`, `to`, `step` and the step's fields |
//! | `milestone` | stable `kind` identifier, optional `session` and `detail`  |
//! | `evidence`  | one party's goods, receipts and evidence of origin          |
//! | `verdict`   | `FAIR`, `UNFAIR_FOR_B` or `UNFAIR_FOR_A` with its subject   |
//!
//! Integers are canonical lowercase hex; byte strings are lowercase hex.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::fairness::FairnessVerdict;
use super::world::WorldConfig;
use crate::credentials::{PartyId, PublicRegistry};
use crate::protocol::{Envelope, EvidenceLedger, SessionId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "honest")]
    Honest,
    #[serde(rename = "replay")]
    Replay,
    #[serde(rename = "eoo-forward")]
    EooForward,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Honest => "honest",
            Scenario::Replay => "replay",
            Scenario::EooForward => "eoo-forward",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "honest" => Ok(Scenario::Honest),
            "replay" => Ok(Scenario::Replay),
            "eoo-forward" => Ok(Scenario::EooForward),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MilestoneKind {
    #[serde(rename = "session-opened")]
    SessionOpened,
    #[serde(rename = "abort-after-E2")]
    AbortAfterE2,
    #[serde(rename = "goods-delivered")]
    GoodsDelivered,
    #[serde(rename = "receipt-obtained")]
    ReceiptObtained,
    #[serde(rename = "recovery-requested")]
    RecoveryRequested,
    #[serde(rename = "R1-accepted")]
    R1Accepted,
    #[serde(rename = "stale-R1-accepted")]
    StaleR1Accepted,
    #[serde(rename = "R1-rejected")]
    R1Rejected,
    #[serde(rename = "receipt-recovered")]
    ReceiptRecovered,
    #[serde(rename = "R3-key-rejected")]
    R3KeyRejected,
    #[serde(rename = "message-rejected")]
    MessageRejected,
    #[serde(rename = "pre-forward-fair")]
    PreForwardFair,
    #[serde(rename = "eoo-forwarded")]
    EooForwarded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Milestone {
    pub kind: MilestoneKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<SessionId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackReport {
    pub scenario: Scenario,
    pub config: WorldConfig,
    pub registry: PublicRegistry,
    pub transcript: Vec<Envelope>,
    pub evidence: BTreeMap<PartyId, EvidenceLedger>,
    pub narrative: Vec<Milestone>,
    pub verdict: FairnessVerdict,
}

/// One messages-per-session view over a flat transcript.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionTranscript<'a> {
    pub session: SessionId,
    pub messages: Vec<&'a Envelope>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Record {
    Setup {
        scenario: Scenario,
        config: WorldConfig,
        registry: PublicRegistry,
    },
    Message {
        seq: u64,
        #[serde(flatten)]
        envelope: Envelope,
    },
    Milestone {
        #[serde(flatten)]
        milestone: Milestone,
    },
    Evidence {
        party: PartyId,
        #[serde(flatten)]
        ledger: EvidenceLedger,
    },
    Verdict {
        #[serde(flatten)]
        verdict: FairnessVerdict,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum TranscriptError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("transcript has no {0} record")]
    Missing(&'static str),
    #[error("line {0}: duplicate {1} record")]
    Duplicate(usize, &'static str),
    #[error("line {line}: message seq {found}, expected {expected}")]
    Sequence {
        line: usize,
        expected: u64,
        found: u64,
    },
}

impl AttackReport {
    pub fn sessions(&self) -> Vec<SessionTranscript<'_>> {
        let mut by_session: BTreeMap<SessionId, Vec<&Envelope>> = BTreeMap::new();
        for envelope in &self.transcript {
            by_session
                .entry(envelope.session)
                .or_default()
                .push(envelope);
        }
        by_session
            .into_iter()
            .map(|(session, messages)| SessionTranscript { session, messages })
            .collect()
    }

    pub fn milestones(&self, kind: MilestoneKind) -> impl Iterator<Item = &Milestone> {
        self.narrative.iter().filter(move |m| m.kind == kind)
    }

    pub fn has_milestone(&self, kind: MilestoneKind) -> bool {
        self.milestones(kind).next().is_some()
    }

    pub fn to_jsonl(&self) -> String {
        let mut records = vec![Record::Setup {
            scenario: self.scenario,
            config: self.config.clone(),
            registry: self.registry.clone(),
        }];
        records.extend(
            self.transcript
                .iter()
                .enumerate()
                .map(|(seq, envelope)| Record::Message {
                    seq: seq as u64,
                    envelope: envelope.clone(),
                }),
        );
        records.extend(self.narrative.iter().map(|m| Record::Milestone {
            milestone: m.clone(),
        }));
        records.extend(
            self.evidence
                .iter()
                .map(|(party, ledger)| Record::Evidence {
                    party: party.clone(),
                    ledger: ledger.clone(),
                }),
        );
        records.push(Record::Verdict {
            verdict: self.verdict.clone(),
        });

        let mut out = String::new();
        for record in &records {
            out.push_str(&serde_json::to_string(record).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, TranscriptError> {
        let mut setup = None;
        let mut verdict = None;
        let mut transcript = Vec::new();
        let mut narrative = Vec::new();
        let mut evidence = BTreeMap::new();

        for (idx, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let line_no = idx + 1;
            let record: Record =
                serde_json::from_str(line).map_err(|source| TranscriptError::Json {
                    line: line_no,
                    source,
                })?;
            match record {
                Record::Setup {
                    scenario,
                    config,
                    registry,
                } => {
                    if setup.replace((scenario, config, registry)).is_some() {
                        return Err(TranscriptError::Duplicate(line_no, "setup"));
                    }
                }
                Record::Message { seq, envelope } => {
                    let expected = transcript.len() as u64;
                    if seq != expected {
                        return Err(TranscriptError::Sequence {
                            line: line_no,
                            expected,
                            found: seq,
                        });
                    }
                    transcript.push(envelope);
                }
                Record::Milestone { milestone } => narrative.push(milestone),
                Record::Evidence { party, ledger } => {
                    if evidence.insert(party, ledger).is_some() {
                        return Err(TranscriptError::Duplicate(line_no, "evidence"));
                    }
                }
                Record::Verdict { verdict: v } => {
                    if verdict.replace(v).is_some() {
                        return Err(TranscriptError::Duplicate(line_no, "verdict"));
                    }
                }
            }
        }

        let (scenario, config, registry) = setup.ok_or(TranscriptError::Missing("setup"))?;
        Ok(Self {
            scenario,
            config,
            registry,
            transcript,
            evidence,
            narrative,
            verdict: verdict.ok_or(TranscriptError::Missing("verdict"))?,
        })
    }

    /// Short human-readable summary.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "scenario: {}\nmodulus bits: {}  seed: {}\nmessages: {}\n",
            self.scenario,
            self.config.modulus_bits,
            self.config.seed,
            self.transcript.len()
        );
        for envelope in &self.transcript {
            out.push_str(&format!(
                "  {} {} {} -> {}\n",
                envelope.session,
                envelope.message.step(),
                envelope.from,
                envelope.to
            ));
        }
        out.push_str("milestones:\n");
        for m in &self.narrative {
            let kind = serde_json::to_value(m.kind).expect("kind serializes");
            let session = m.session.map(|s| s.to_string()).unwrap_or_default();
            let detail = m.detail.as_deref().unwrap_or("");
            out.push_str(&format!(
                "  {} {} {}\n",
                kind.as_str().unwrap_or("?"),
                session,
                detail
            ));
        }
        out.push_str(&format!("verdict: {}\n", self.verdict.label()));
        out
    }
}
