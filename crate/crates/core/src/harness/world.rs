//! Deterministic in-memory world: identities, registry, sessions and a FIFO
//! message queue driven by a single-threaded event loop.

use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigUint;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::fairness::{evaluate_fairness, FairnessVerdict};
use super::report::{AttackReport, Milestone, MilestoneKind, Scenario};
use crate::bigint::hex;
use crate::credentials::{CaIdentity, PartyId, PublicRegistry, TtpIdentity};
use crate::crypto::rsa::keygen_from_rng;
use crate::error::{Error, Result};
use crate::protocol::{
    Envelope, EooHolding, EvidenceLedger, GoodsDelivery, Message, ReceiverIdentity, ReceiverOutput,
    ReceiverSession, RejectReason, SenderIdentity, SenderSession, SessionId, Transition,
    TtpService, R1,
};

pub const SENDER: &str = "P_a";
pub const RECEIVER: &str = "P_b";
pub const BYSTANDER: &str = "P_c";
pub const TTP: &str = "P_t";
pub const CA: &str = "CA";

/// Key sizes and seed for one simulated world.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub modulus_bits: u64,
    #[serde(with = "hex")]
    pub public_exponent: BigUint,
    pub seed: u64,
}

impl WorldConfig {
    pub fn new(modulus_bits: u64, public_exponent: BigUint, seed: u64) -> Self {
        Self {
            modulus_bits,
            public_exponent,
            seed,
        }
    }

    /// 48-bit moduli (24-bit primes) with `e = 3`.
    pub fn toy(seed: u64) -> Self {
        Self::new(48, BigUint::from(3u8), seed)
    }

    /// 1024-bit moduli with `e = 65537`.
    pub fn realistic(seed: u64) -> Self {
        Self::new(1024, BigUint::from(65537u32), seed)
    }
}

/// What `P_a` does when a valid E2 arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SenderStrategy {
    Honest,
    /// Keep the E2 material as a ready-made R1 and never send E3.
    AbortAfterE2,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const SETUP_STREAM: u64 = 0;

fn session_stream(session: SessionId, lane: u64) -> u64 {
    16 * session.0 + lane
}

/// Deterministic goods and description for a session number.
pub fn goods_for_session(seed: u64, session: SessionId) -> (Vec<u8>, Vec<u8>) {
    let mut rng = stream_rng(seed, session_stream(session, 3));
    let mut goods = format!("e-goods #{}: ", session.0).into_bytes();
    let mut body = [0u8; 32];
    rng.fill_bytes(&mut body);
    goods.extend_from_slice(&body);
    (goods, format!("catalogue item {}", session.0).into_bytes())
}

pub struct World {
    config: WorldConfig,
    ca: CaIdentity,
    ttp: TtpService,
    registry: PublicRegistry,
    sender: SenderIdentity,
    receiver: ReceiverIdentity,
    sender_sessions: BTreeMap<SessionId, SenderSession>,
    strategies: BTreeMap<SessionId, SenderStrategy>,
    receiver_sessions: BTreeMap<SessionId, ReceiverSession>,
    /// R1 material retained by `P_a`, keyed by the session it came from.
    stash: BTreeMap<SessionId, R1>,
    /// Session an R1 was routed under -> session its material came from.
    recovery_routes: BTreeMap<SessionId, SessionId>,
    ledgers: BTreeMap<PartyId, EvidenceLedger>,
    queue: VecDeque<Envelope>,
    transcript: Vec<Envelope>,
    narrative: Vec<Milestone>,
    next_session: u64,
}

impl World {
    /// Generates every identity from the setup stream of `config.seed`.
    pub fn new(config: WorldConfig) -> Result<Self> {
        let mut rng = stream_rng(config.seed, SETUP_STREAM);
        let (bits, e) = (config.modulus_bits, &config.public_exponent);
        let ca = CaIdentity::new(PartyId::new(CA), keygen_from_rng(bits, e, &mut rng)?);
        let ttp = TtpIdentity::new(PartyId::new(TTP), keygen_from_rng(bits, e, &mut rng)?);
        let sender = SenderIdentity {
            id: PartyId::new(SENDER),
            keys: keygen_from_rng(bits, e, &mut rng)?,
        };
        let keys_b = keygen_from_rng(bits, e, &mut rng)?;
        let keys_c = keygen_from_rng(bits, e, &mut rng)?;
        let (c_bt, sk_bt) = ttp.issue_recoverable_cert(&keys_b.e, bits, rng.next_u64())?;

        let mut registry = PublicRegistry::new(ca.public(), ttp.public());
        registry
            .parties
            .insert(sender.id.clone(), sender.keys.public());
        registry
            .parties
            .insert(PartyId::new(RECEIVER), keys_b.public());
        registry
            .parties
            .insert(PartyId::new(BYSTANDER), keys_c.public());
        registry
            .recoverable
            .insert(PartyId::new(RECEIVER), c_bt.clone());
        ca.sign_registry(&mut registry);

        let receiver = ReceiverIdentity {
            id: PartyId::new(RECEIVER),
            keys: keys_b,
            c_bt,
            sk_bt,
        };
        let ledgers = [SENDER, RECEIVER, BYSTANDER]
            .into_iter()
            .map(|p| (PartyId::new(p), EvidenceLedger::default()))
            .collect();

        Ok(Self {
            config,
            ca,
            ttp: TtpService::new(ttp),
            registry,
            sender,
            receiver,
            sender_sessions: BTreeMap::new(),
            strategies: BTreeMap::new(),
            receiver_sessions: BTreeMap::new(),
            stash: BTreeMap::new(),
            recovery_routes: BTreeMap::new(),
            ledgers,
            queue: VecDeque::new(),
            transcript: Vec::new(),
            narrative: Vec::new(),
            next_session: 1,
        })
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn registry(&self) -> &PublicRegistry {
        &self.registry
    }

    pub fn ttp(&self) -> &TtpService {
        &self.ttp
    }

    pub fn sender_identity(&self) -> &SenderIdentity {
        &self.sender
    }

    pub fn receiver_identity(&self) -> &ReceiverIdentity {
        &self.receiver
    }

    pub fn sender_session(&self, session: SessionId) -> Option<&SenderSession> {
        self.sender_sessions.get(&session)
    }

    pub fn receiver_session(&self, session: SessionId) -> Option<&ReceiverSession> {
        self.receiver_sessions.get(&session)
    }

    pub fn ledger(&self, party: &str) -> &EvidenceLedger {
        &self.ledgers[&PartyId::new(party)]
    }

    pub fn ledgers(&self) -> &BTreeMap<PartyId, EvidenceLedger> {
        &self.ledgers
    }

    /// Recovery material `P_a` kept from `session`, if it aborted there.
    pub fn stashed_recovery(&self, session: SessionId) -> Option<&R1> {
        self.stash.get(&session)
    }

    pub fn transcript(&self) -> &[Envelope] {
        &self.transcript
    }

    pub fn narrative(&self) -> &[Milestone] {
        &self.narrative
    }

    pub fn is_quiescent(&self) -> bool {
        self.queue.is_empty()
    }

    fn note(&mut self, kind: MilestoneKind, session: Option<SessionId>, detail: Option<String>) {
        self.narrative.push(Milestone {
            kind,
            session,
            detail,
        });
    }

    fn send(&mut self, session: SessionId, from: &str, to: &str, message: Message) {
        let envelope = Envelope {
            session,
            from: PartyId::new(from),
            to: PartyId::new(to),
            message,
        };
        self.transcript.push(envelope.clone());
        self.queue.push_back(envelope);
    }

    fn rejected(&mut self, envelope: &Envelope, reason: RejectReason) {
        let detail = format!("{}:{}", envelope.message.step(), reason.code());
        self.note(
            MilestoneKind::MessageRejected,
            Some(envelope.session),
            Some(detail),
        );
    }

    /// `P_a` starts a new exchange with `P_b` for the session's goods.
    pub fn open_session(&mut self, strategy: SenderStrategy) -> Result<SessionId> {
        let session = SessionId(self.next_session);
        self.next_session += 1;
        let (goods, desc) = goods_for_session(self.config.seed, session);
        let mut rng = stream_rng(self.config.seed, session_stream(session, 1));
        let (state, e1) = SenderSession::start(
            session,
            self.sender.clone(),
            PartyId::new(RECEIVER),
            &goods,
            &desc,
            &self.ca,
            &mut rng,
        )?;
        self.sender_sessions.insert(session, state);
        self.strategies.insert(session, strategy);
        self.note(MilestoneKind::SessionOpened, Some(session), None);
        self.send(session, SENDER, RECEIVER, Message::E1(e1));
        Ok(session)
    }

    /// `P_a` sends `material` to the STTP as R1, routed under `route`.
    pub fn request_recovery(&mut self, route: SessionId, material: R1, origin: SessionId) {
        self.recovery_routes.insert(route, origin);
        let detail = (route != origin).then(|| format!("material from {origin}"));
        self.note(MilestoneKind::RecoveryRequested, Some(route), detail);
        self.send(route, SENDER, TTP, Message::R1(material));
    }

    /// Processes queued messages until none remain.
    pub fn run_until_quiescent(&mut self) -> Result<()> {
        while let Some(envelope) = self.queue.pop_front() {
            self.deliver(envelope)?;
        }
        Ok(())
    }

    fn deliver(&mut self, envelope: Envelope) -> Result<()> {
        match envelope.to.as_str() {
            SENDER => self.deliver_to_sender(envelope),
            RECEIVER => self.deliver_to_receiver(envelope),
            TTP => self.deliver_to_ttp(envelope),
            other => Err(Error::UnknownParty(other.to_owned())),
        }
    }

    fn deliver_to_sender(&mut self, envelope: Envelope) -> Result<()> {
        let session = envelope.session;
        let strategy = self
            .strategies
            .get(&session)
            .copied()
            .unwrap_or(SenderStrategy::Honest);
        match envelope.message.clone() {
            Message::E2(e2) => {
                let state = self
                    .sender_sessions
                    .get_mut(&session)
                    .ok_or(Error::Deviation(format!("no sender {session}")))?;
                match strategy {
                    SenderStrategy::Honest => match state.on_e2(e2, &self.registry) {
                        Ok(Transition::Emit(e3)) => {
                            self.send(session, SENDER, RECEIVER, Message::E3(e3))
                        }
                        Ok(Transition::Ignored) => {}
                        Err(reason) => self.rejected(&envelope, reason),
                    },
                    SenderStrategy::AbortAfterE2 => {
                        match state.abort_after_e2(e2, &self.registry) {
                            Ok(Transition::Emit(m1)) => {
                                self.stash.insert(session, m1);
                                self.note(MilestoneKind::AbortAfterE2, Some(session), None);
                            }
                            Ok(Transition::Ignored) => {}
                            Err(reason) => self.rejected(&envelope, reason),
                        }
                    }
                }
            }
            Message::E4(e4) => {
                let state = self
                    .sender_sessions
                    .get_mut(&session)
                    .ok_or(Error::Deviation(format!("no sender {session}")))?;
                match state.on_e4(e4) {
                    Ok(Transition::Emit(receipt)) => {
                        self.record_receipt(receipt)?;
                        self.note(MilestoneKind::ReceiptObtained, Some(session), None);
                    }
                    Ok(Transition::Ignored) => {}
                    Err(reason) => self.rejected(&envelope, reason),
                }
            }
            Message::R2(r2) => {
                // The R2 answers whatever material went out under this route.
                let origin = self
                    .recovery_routes
                    .get(&session)
                    .copied()
                    .unwrap_or(session);
                let state = self
                    .sender_sessions
                    .get_mut(&origin)
                    .ok_or(Error::Deviation(format!("no sender {origin}")))?;
                match state.on_r2(r2) {
                    Ok(Transition::Emit(receipt)) => {
                        self.record_receipt(receipt)?;
                        let detail = (origin != session).then(|| format!("receipt of {origin}"));
                        self.note(MilestoneKind::ReceiptRecovered, Some(session), detail);
                    }
                    Ok(Transition::Ignored) => {}
                    Err(reason) => self.rejected(&envelope, reason),
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn record_receipt(&mut self, receipt: crate::vres::Receipt) -> Result<()> {
        let ledger = self
            .ledgers
            .get_mut(&PartyId::new(SENDER))
            .expect("sender ledger");
        ledger
            .record_receipt(receipt, &self.registry)
            .map_err(|m| Error::Deviation(format!("receipt failed ledger check: {m}")))
    }

    fn record_delivery(&mut self, holder: &str, delivery: GoodsDelivery) -> Result<()> {
        let ledger = self
            .ledgers
            .get_mut(&PartyId::new(holder))
            .expect("known party");
        ledger.record_goods(delivery.goods);
        let holding = EooHolding {
            h_a: delivery.h_a,
            eoo: delivery.eoo,
            originator: delivery.originator,
        };
        ledger
            .record_eoo(holding, &self.registry)
            .map_err(|m| Error::Deviation(format!("evidence of origin failed ledger check: {m}")))
    }

    fn deliver_to_receiver(&mut self, envelope: Envelope) -> Result<()> {
        let session = envelope.session;
        let mut rng = stream_rng(self.config.seed, session_stream(session, 2));
        let receiver = self.receiver.clone();
        let state = self
            .receiver_sessions
            .entry(session)
            .or_insert_with(|| ReceiverSession::new(session, receiver));
        let is_r3 = matches!(envelope.message, Message::R3(_));
        match state.handle(
            &envelope.from,
            envelope.message.clone(),
            &self.registry,
            &mut rng,
        ) {
            Ok(Transition::Emit(ReceiverOutput::E2(e2))) => {
                self.send(session, RECEIVER, SENDER, Message::E2(e2))
            }
            Ok(Transition::Emit(ReceiverOutput::E4(e4, delivery))) => {
                self.record_delivery(RECEIVER, delivery)?;
                self.note(MilestoneKind::GoodsDelivered, Some(session), None);
                self.send(session, RECEIVER, SENDER, Message::E4(e4));
            }
            Ok(Transition::Emit(ReceiverOutput::Goods(delivery))) => {
                self.record_delivery(RECEIVER, delivery)?;
                self.note(
                    MilestoneKind::GoodsDelivered,
                    Some(session),
                    Some("via R3".into()),
                );
            }
            Ok(Transition::Ignored) => {}
            Err(RejectReason::BadKey) if is_r3 => {
                self.note(MilestoneKind::R3KeyRejected, Some(session), None);
            }
            Err(reason) => self.rejected(&envelope, reason),
        }
        Ok(())
    }

    fn deliver_to_ttp(&mut self, envelope: Envelope) -> Result<()> {
        let session = envelope.session;
        let Message::R1(r1) = &envelope.message else {
            return Ok(());
        };
        match self.ttp.on_r1(&envelope.from, r1, &self.registry) {
            Ok(outcome) => {
                let origin = self
                    .recovery_routes
                    .get(&session)
                    .copied()
                    .unwrap_or(session);
                let kind = if origin == session {
                    MilestoneKind::R1Accepted
                } else {
                    MilestoneKind::StaleR1Accepted
                };
                self.note(kind, Some(session), None);
                let from = envelope.from.as_str().to_owned();
                self.send(session, TTP, &from, Message::R2(outcome.r2));
                self.send(
                    session,
                    TTP,
                    outcome.receiver.as_str(),
                    Message::R3(outcome.r3),
                );
            }
            Err(reason) => {
                self.note(
                    MilestoneKind::R1Rejected,
                    Some(session),
                    Some(reason.code().into()),
                );
            }
        }
        Ok(())
    }

    /// Out-of-band hand-over of goods plus evidence of origin, bypassing the
    /// message layer. The recipient checks both before keeping them.
    pub fn forward_out_of_band(&mut self, from: &str, to: &str, h_a: &BigUint) -> Result<()> {
        let source = &self.ledgers[&PartyId::new(from)];
        let goods = source
            .goods_for(h_a)
            .ok_or_else(|| Error::Deviation(format!("{from} holds no goods to forward")))?
            .goods
            .clone();
        let eoo = source
            .eoo_for(h_a)
            .ok_or_else(|| {
                Error::Deviation(format!("{from} holds no evidence of origin to forward"))
            })?
            .clone();
        let delivery = GoodsDelivery {
            goods,
            h_a: h_a.clone(),
            eoo: eoo.eoo,
            originator: eoo.originator,
        };
        self.record_delivery(to, delivery)?;
        self.note(
            MilestoneKind::EooForwarded,
            None,
            Some(format!("{from} -> {to}")),
        );
        Ok(())
    }

    pub fn note_verdict(&mut self, kind: MilestoneKind) {
        self.note(kind, None, None);
    }

    /// Requires a quiescent world.
    pub fn evaluate_fairness(&self) -> FairnessVerdict {
        debug_assert!(self.is_quiescent());
        evaluate_fairness(&self.ledgers, &self.registry)
    }

    pub fn into_report(self, scenario: Scenario) -> AttackReport {
        let verdict = self.evaluate_fairness();
        AttackReport {
            scenario,
            config: self.config,
            registry: self.registry,
            transcript: self.transcript,
            evidence: self.ledgers,
            narrative: self.narrative,
            verdict,
        }
    }
}
