//! Independent re-verification of a transcript.
//!
//! Every message is re-checked against the registry and the earlier messages
//! of its session, every evidence entry is re-verified, and the fairness
//! verdict is recomputed from the evidence alone.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;

use super::fairness::{evaluate_fairness, FairnessVerdict};
use super::report::AttackReport;
use crate::credentials::{
    goods_hash, verify_goods_cert, verify_recoverable_cert, PartyId, PublicRegistry,
};
use crate::crypto::sym_decrypt;
use crate::protocol::{receipt_is_valid, Envelope, Message, SessionId, E1, E2, R1};
use crate::vres::{
    derive_y_a, randomizer_matches, unwrap_key, verify_auth_token, verify_eoo, vres_verify,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub location: String,
    pub problem: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.problem)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditOutcome {
    pub findings: Vec<Finding>,
    pub checked_messages: usize,
    pub recomputed: FairnessVerdict,
}

impl AuditOutcome {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}

#[derive(Default)]
struct SessionView<'a> {
    e1: Option<(&'a Envelope, &'a E1, BigUint)>,
    e2: Option<&'a E2>,
    r1: Option<&'a R1>,
}

struct Auditor<'a> {
    registry: &'a PublicRegistry,
    findings: Vec<Finding>,
    sessions: BTreeMap<SessionId, SessionView<'a>>,
}

impl<'a> Auditor<'a> {
    fn fail(&mut self, location: impl Into<String>, problem: impl Into<String>) {
        self.findings.push(Finding {
            location: location.into(),
            problem: problem.into(),
        });
    }

    fn check(&mut self, ok: bool, location: &str, problem: &str) -> bool {
        if !ok {
            self.fail(location, problem);
        }
        ok
    }

    fn key(&mut self, id: &PartyId, location: &str) -> Option<&'a crate::crypto::PublicKey> {
        let registry = self.registry;
        match registry.key(id) {
            Ok(pk) => Some(pk),
            Err(_) => {
                self.fail(location, format!("{id} is not registered"));
                None
            }
        }
    }

    fn message(&mut self, seq: usize, envelope: &'a Envelope) {
        let loc = format!(
            "message {seq} ({} {})",
            envelope.session,
            envelope.message.step()
        );
        match &envelope.message {
            Message::E1(e1) => self.e1(&loc, envelope, e1),
            Message::E2(e2) => self.e2(&loc, envelope, e2),
            Message::E3(e3) => self.e3(&loc, envelope, &e3.r_a),
            Message::E4(e4) => self.e4(&loc, envelope, &e4.r_b),
            Message::R1(r1) => self.r1(&loc, envelope, r1),
            Message::R2(r2) => self.r2(&loc, envelope, &r2.r_b),
            Message::R3(r3) => self.r3(&loc, envelope, &r3.r_a),
        }
    }

    fn e1(&mut self, loc: &str, env: &'a Envelope, e1: &'a E1) {
        let Some(pk_a) = self.key(&env.from, loc) else {
            return;
        };
        let registry = self.registry;
        if let Err(m) = verify_goods_cert(&e1.cert, &e1.ciphertext, &registry.ca) {
            self.fail(loc, format!("goods certificate: {m}"));
        }
        self.check(
            verify_eoo(&e1.eoo, &e1.cert.h_a, pk_a),
            loc,
            "evidence of origin does not verify",
        );
        if !self.check(e1.x_a < pk_a.n, loc, "x_a out of range") {
            return;
        }
        match derive_y_a(&e1.x_a, &e1.cert.ek_a, pk_a) {
            Ok(y_a) => self.sessions.entry(env.session).or_default().e1 = Some((env, e1, y_a)),
            Err(_) => self.fail(loc, "ek_a is not invertible"),
        }
    }

    fn e2(&mut self, loc: &str, env: &'a Envelope, e2: &'a E2) {
        let Some(pk_b) = self.key(&env.from, loc) else {
            return;
        };
        let registry = self.registry;
        if let Err(m) = verify_recoverable_cert(&e2.c_bt, &registry.ttp) {
            self.fail(loc, format!("recoverable certificate: {m}"));
        }
        if !self.check(
            registry.owner_of(&e2.c_bt) == Some(&env.from),
            loc,
            "C_bt is not registered to the sender of E2",
        ) {
            return;
        }
        let Some((e1_env, e1, y_a)) = self.sessions.get(&env.session).and_then(|s| s.e1.clone())
        else {
            self.fail(loc, "no verified E1 in this session");
            return;
        };
        self.check(
            e1_env.from == env.to && e1_env.to == env.from,
            loc,
            "E2 does not answer the session's E1",
        );
        self.check(
            verify_auth_token(&e2.s_b, pk_b, &e2.c_bt, &e2.vres.y_b, &y_a, &env.to),
            loc,
            "authorization token does not verify",
        );
        if let Err(m) = vres_verify(&e2.vres, &e1.cert.h_a, pk_b, &e2.c_bt) {
            self.fail(loc, format!("VRES: {m}"));
        }
        self.sessions.entry(env.session).or_default().e2 = Some(e2);
    }

    fn open_goods(&mut self, loc: &str, session: SessionId, r_a: &BigUint) {
        let Some((e1_env, e1, _)) = self.sessions.get(&session).and_then(|s| s.e1.clone()) else {
            self.fail(loc, "no verified E1 in this session");
            return;
        };
        let Some(pk_a) = self.key(&e1_env.from, loc) else {
            return;
        };
        let opened = unwrap_key(&e1.x_a, r_a, &pk_a.n)
            .ok()
            .filter(|k| pk_a.apply(k.value()) == e1.cert.ek_a);
        match opened {
            Some(k_a) => {
                let goods = sym_decrypt(&k_a, &e1.ciphertext);
                self.check(
                    goods_hash(&goods) == e1.cert.h_a,
                    loc,
                    "decrypted goods do not match h_a",
                );
            }
            None => self.fail(loc, "r_a does not unwrap k_a"),
        }
    }

    fn e3(&mut self, loc: &str, env: &'a Envelope, r_a: &BigUint) {
        self.open_goods(loc, env.session, r_a);
    }

    fn e4(&mut self, loc: &str, env: &'a Envelope, r_b: &BigUint) {
        let Some(pk_b) = self.key(&env.from, loc) else {
            return;
        };
        let Some(e2) = self.sessions.get(&env.session).and_then(|s| s.e2) else {
            self.fail(loc, "no verified E2 in this session");
            return;
        };
        self.check(
            randomizer_matches(r_b, &e2.vres.y_b, pk_b, &e2.c_bt.pk_bt),
            loc,
            "r_b does not match y_b",
        );
    }

    fn r1(&mut self, loc: &str, env: &'a Envelope, r1: &'a R1) {
        let Some(pk_a) = self.key(&env.from, loc) else {
            return;
        };
        let registry = self.registry;
        if let Err(m) = verify_recoverable_cert(r1.c_bt(), &registry.ttp) {
            self.fail(loc, format!("recoverable certificate: {m}"));
            return;
        }
        let Some(owner) = registry.owner_of(r1.c_bt()) else {
            self.fail(loc, "C_bt has no registered owner");
            return;
        };
        let Some(pk_b) = self.key(owner, loc) else {
            return;
        };
        self.check(
            verify_auth_token(r1.s_b(), pk_b, r1.c_bt(), r1.y_b(), r1.y_a(), &env.from),
            loc,
            "authorization token does not verify",
        );
        self.check(
            *r1.r_a() < pk_a.n && pk_a.apply(r1.r_a()) == *r1.y_a(),
            loc,
            "y_a is not r_a^e_a",
        );
        self.sessions.entry(env.session).or_default().r1 = Some(r1);
    }

    fn r2(&mut self, loc: &str, env: &'a Envelope, r_b: &BigUint) {
        let Some(r1) = self.sessions.get(&env.session).and_then(|s| s.r1) else {
            self.fail(loc, "no verified R1 in this session");
            return;
        };
        let registry = self.registry;
        let Some(pk_b) = registry
            .owner_of(r1.c_bt())
            .and_then(|o| registry.key(o).ok())
        else {
            self.fail(loc, "C_bt has no registered owner");
            return;
        };
        self.check(
            randomizer_matches(r_b, r1.y_b(), pk_b, &r1.c_bt().pk_bt),
            loc,
            "r_b does not match y_b of R1",
        );
    }

    fn r3(&mut self, loc: &str, env: &'a Envelope, r_a: &BigUint) {
        let Some(r1) = self.sessions.get(&env.session).and_then(|s| s.r1) else {
            self.fail(loc, "no verified R1 in this session");
            return;
        };
        self.check(r_a == r1.r_a(), loc, "r_a differs from the one in R1");
        self.check(
            self.registry.owner_of(r1.c_bt()) == Some(&env.to),
            loc,
            "R3 not sent to the owner of C_bt",
        );
    }
}

/// Re-verifies every record of `report` and recomputes its verdict.
pub fn audit_report(report: &AttackReport) -> AuditOutcome {
    let registry = &report.registry;
    let mut auditor = Auditor {
        registry,
        findings: Vec::new(),
        sessions: BTreeMap::new(),
    };

    if let Err(m) = registry.verify() {
        auditor.fail("registry", format!("does not verify: {m}"));
    }
    let e = &report.config.public_exponent;
    let keys = [&registry.ca, &registry.ttp]
        .into_iter()
        .chain(registry.parties.values());
    if keys.into_iter().any(|pk| pk.e != *e) {
        auditor.fail(
            "registry",
            "key exponent differs from the configured exponent",
        );
    }

    for (seq, envelope) in report.transcript.iter().enumerate() {
        auditor.message(seq, envelope);
    }

    for (party, ledger) in &report.evidence {
        let loc = format!("evidence of {party}");
        for g in &ledger.goods {
            auditor.check(g.is_valid(), &loc, "goods do not hash to h_a");
        }
        for r in &ledger.receipts {
            auditor.check(
                receipt_is_valid(r, registry),
                &loc,
                "receipt does not verify",
            );
        }
        for eoo in &ledger.eoos {
            auditor.check(
                eoo.is_valid(registry),
                &loc,
                "evidence of origin does not verify",
            );
        }
    }
    let recomputed = evaluate_fairness(&report.evidence, registry);
    if recomputed != report.verdict {
        auditor.fail(
            "verdict",
            format!(
                "recorded {} but evidence gives {}",
                report.verdict.label(),
                recomputed.label()
            ),
        );
    }

    AuditOutcome {
        findings: auditor.findings,
        checked_messages: report.transcript.len(),
        recomputed,
    }
}
