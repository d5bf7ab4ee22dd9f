//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so criteria execute one after another
//! and wall-clock budgets are not distorted by parallel tests.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use rsa_cegd::credentials::{PartyId, RecoverableCert, TtpIdentity};
use rsa_cegd::crypto::{
    random_prime_below, rsa_keygen_with_exponent, PrivateKey, PublicKey, RsaKeyPair,
};
use rsa_cegd::harness::{
    audit_report, run_eoo_forward, run_honest, run_replay_attack, AttackReport, FairnessVerdict,
    MilestoneKind, SenderStrategy, World, WorldConfig,
};
use rsa_cegd::protocol::{
    Message, ReceiverOutput, ReceiverPhase, ReceiverSession, Transition, E3, E4, R2, R3,
};
use rsa_cegd::vres::{
    randomizer_matches, receiver_recover_rb, ttp_recover_rb, unwrap_key, vres_generate,
    vres_generate_with, vres_recover_receipt, vres_verify, vres_verify_with, Receipt, VresTriple,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

/// Square-and-multiply over u128, independent of the library's arithmetic.
fn oracle_pow(b: u64, mut e: u64, m: u64) -> u64 {
    let (mut acc, m128) = (1u128, m as u128);
    let mut base = b as u128 % m128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m128;
        }
        base = base * base % m128;
        e >>= 1;
    }
    acc as u64
}

fn c1_toy_vectors() -> Outcome {
    let start = Instant::now();
    let keys_b = RsaKeyPair::from_primes(big(5), big(11), big(3)).map_err(|e| e.to_string())?;
    let keys_bt = RsaKeyPair::from_primes(big(5), big(17), big(3)).map_err(|e| e.to_string())?;
    ensure!(
        keys_b.d == big(27) && keys_bt.d == big(43),
        "d_b={} d_bt={}",
        keys_b.d,
        keys_bt.d
    );

    // Oracle values.
    let y_b = oracle_pow(7, 3, 55 * 85);
    let rec_b = oracle_pow(2, 27, 55);
    let x_b = 7 * rec_b % 55;
    let xx_b = 7 * oracle_pow(4, 43, 85) % 85;
    ensure!(
        (y_b, x_b, xx_b, rec_b) == (343, 16, 23, 18),
        "oracle disagrees: {y_b} {x_b} {xx_b} {rec_b}"
    );

    let cert = RecoverableCert {
        pk_bt: keys_bt.public(),
        w_bt: big(1),
        s_bt: big(1),
    };
    let sk_bt = PrivateKey {
        d: big(43),
        n: big(85),
    };
    let forced = |_: &BigUint, _: &BigUint| big(4);
    let v = vres_generate_with(&big(2), &keys_b, &cert, &sk_bt, &big(7), forced)
        .map_err(|e| e.to_string())?;
    ensure!(
        v == VresTriple {
            x_b: big(x_b),
            xx_b: big(xx_b),
            y_b: big(y_b)
        },
        "triple {v:?}"
    );
    ensure!(
        vres_verify_with(&v, &big(2), &keys_b.public(), &cert, forced).is_ok(),
        "congruences fail"
    );
    let receipt_residue = oracle_pow(x_b, 3, 55);
    let control_residue = oracle_pow(xx_b, 3, 85);
    ensure!(
        receipt_residue == y_b % 55 * 2 % 55,
        "receipt congruence oracle: {receipt_residue}"
    );
    ensure!(
        control_residue == y_b % 85 * 4 % 85,
        "control congruence oracle: {control_residue}"
    );

    let via_ttp = ttp_recover_rb(&v.y_b, &big(43), &big(85));
    let via_b = receiver_recover_rb(&v.y_b, &keys_b);
    ensure!(
        via_ttp == big(7) && via_b == big(7),
        "recovery gave {via_ttp} and {via_b}"
    );
    let receipt = vres_recover_receipt(
        &v.x_b,
        &via_ttp,
        &keys_b.public(),
        &big(2),
        PartyId::new("P_b"),
    )
    .map_err(|e| e.to_string())?;
    ensure!(receipt.rec_b == big(18), "rec_b={}", receipt.rec_b);

    let mut tampered = v.clone();
    tampered.x_b = big(17);
    ensure!(
        vres_verify_with(&tampered, &big(2), &keys_b.public(), &cert, forced).is_err(),
        "x_b=17 accepted"
    );

    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!(
        "y_b=343 x_b=16 xx_b=23 rec_b=18, both recoveries 7 ({:.3}s)",
        elapsed.as_secs_f64()
    ))
}

fn c2_randomized_vres() -> Outcome {
    let start = Instant::now();
    let e = big(65537);
    let mut tampers = 0;
    for i in 0..100u64 {
        let keys_b = rsa_keygen_with_exponent(512, &e, 10_000 + i).map_err(|e| e.to_string())?;
        let ttp = TtpIdentity::new(
            PartyId::new("P_t"),
            rsa_keygen_with_exponent(512, &e, 20_000 + i).map_err(|e| e.to_string())?,
        );
        let (cert, sk_bt) = ttp
            .issue_recoverable_cert(&e, 512, 30_000 + i)
            .map_err(|e| e.to_string())?;
        let mut rng = ChaCha20Rng::seed_from_u64(40_000 + i);
        let mut h_bytes = [0u8; 32];
        rng.fill_bytes(&mut h_bytes);
        let h_a = BigUint::from_bytes_be(&h_bytes);
        let n_bt = &cert.pk_bt.n;
        let bound = std::cmp::min(&keys_b.n, n_bt);
        let r_b =
            random_prime_below(&mut rng, bound, &[&keys_b.n, n_bt]).map_err(|e| e.to_string())?;

        let pk_b = keys_b.public();
        let v = vres_generate(&h_a, &keys_b, &cert, &sk_bt, &r_b).map_err(|e| e.to_string())?;
        ensure!(
            vres_verify(&v, &h_a, &pk_b, &cert).is_ok(),
            "instance {i}: honest triple rejected"
        );

        // Oracle: cross-decryption through either modulus, then the receipt directly.
        let d_bt = ttp
            .recover_private_exponent(&cert)
            .map_err(|e| e.to_string())?;
        ensure!(d_bt == sk_bt.d, "instance {i}: unmasked d_bt differs");
        let r_t = (&v.y_b % n_bt).modpow(&d_bt, n_bt);
        let r_r = (&v.y_b % &keys_b.n).modpow(&keys_b.d, &keys_b.n);
        ensure!(r_t == r_b && r_r == r_b, "instance {i}: recovery mismatch");
        let receipt = vres_recover_receipt(&v.x_b, &r_t, &pk_b, &h_a, PartyId::new("P_b"))
            .map_err(|e| e.to_string())?;
        ensure!(
            receipt.rec_b == h_a.modpow(&keys_b.d, &keys_b.n),
            "instance {i}: receipt differs"
        );
        ensure!(
            receipt == Receipt::sign(&keys_b, &h_a, PartyId::new("P_b")),
            "instance {i}: receipt differs"
        );

        let one = BigUint::from(1u8);
        let variants = [
            VresTriple {
                x_b: &v.x_b ^ &one,
                ..v.clone()
            },
            VresTriple {
                xx_b: &v.xx_b ^ &one,
                ..v.clone()
            },
            VresTriple {
                y_b: &v.y_b ^ &one,
                ..v.clone()
            },
        ];
        for (k, bad) in variants.iter().enumerate() {
            ensure!(
                vres_verify(bad, &h_a, &pk_b, &cert).is_err(),
                "instance {i}: tamper {k} accepted"
            );
            tampers += 1;
        }
        ensure!(
            vres_verify(&v, &(&h_a ^ &one), &pk_b, &cert).is_err(),
            "instance {i}: other h_a accepted"
        );
        let foreign = PublicKey::new(e.clone(), &keys_b.n + 2u8);
        ensure!(
            vres_verify(&v, &h_a, &foreign, &cert).is_err(),
            "instance {i}: other pk_b accepted"
        );
        tampers += 2;
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "100 instances at 512 bits, {tampers} tampers rejected ({:.2}s)",
        elapsed.as_secs_f64()
    ))
}

fn c3_honest() -> Outcome {
    let mut slowest = Duration::ZERO;
    for seed in 0..20 {
        let toy =
            run_honest(&WorldConfig::toy(seed)).map_err(|e| format!("toy seed {seed}: {e}"))?;
        ensure!(
            toy.verdict == FairnessVerdict::Fair,
            "toy seed {seed}: {}",
            toy.verdict.label()
        );
        let start = Instant::now();
        let full = run_honest(&WorldConfig::realistic(seed))
            .map_err(|e| format!("1024 seed {seed}: {e}"))?;
        let took = start.elapsed();
        slowest = slowest.max(took);
        ensure!(
            full.verdict == FairnessVerdict::Fair,
            "1024 seed {seed}: {}",
            full.verdict.label()
        );
        ensure!(
            took < Duration::from_secs(5),
            "1024 seed {seed} took {took:?}"
        );
    }
    Ok(format!(
        "FAIR for 20 seeds at 48 and 1024 bits, slowest 1024-bit run {:.2}s",
        slowest.as_secs_f64()
    ))
}

fn replay_checks(config: &WorldConfig) -> Result<(), String> {
    let seed = config.seed;
    let report = run_replay_attack(config).map_err(|e| format!("seed {seed}: {e}"))?;
    let FairnessVerdict::UnfairForB {
        goods_hash,
        receipt_holder,
    } = &report.verdict
    else {
        return Err(format!("seed {seed}: {}", report.verdict.label()));
    };
    ensure!(
        receipt_holder.as_str() == "P_a",
        "seed {seed}: receipt held by {receipt_holder}"
    );

    let sessions = report.sessions();
    let e1_of = |idx: usize| {
        sessions[idx]
            .messages
            .iter()
            .find_map(|m| match &m.message {
                Message::E1(e1) => Some(e1.clone()),
                _ => None,
            })
    };
    let (s1_e1, s2_e1) = (e1_of(0).ok_or("no s1 E1")?, e1_of(1).ok_or("no s2 E1")?);
    ensure!(
        *goods_hash == s1_e1.cert.h_a,
        "seed {seed}: verdict names other goods"
    );

    let pk_a = report.registry.parties[&PartyId::new("P_a")].clone();
    let pk_b = report.registry.parties[&PartyId::new("P_b")].clone();
    let receipt = report.evidence[&PartyId::new("P_a")]
        .receipts_for(&s1_e1.cert.h_a)
        .next()
        .cloned()
        .ok_or_else(|| format!("seed {seed}: no receipt for session-1 goods"))?;
    ensure!(
        receipt.rec_b.modpow(&pk_b.e, &pk_b.n) == &s1_e1.cert.h_a % &pk_b.n,
        "seed {seed}: rec_b^e_b != h_a"
    );

    let r3 = report
        .transcript
        .iter()
        .find_map(|m| match &m.message {
            Message::R3(r3) => Some(r3.clone()),
            _ => None,
        })
        .ok_or("no R3")?;
    let k = unwrap_key(&s2_e1.x_a, &r3.r_a, &pk_a.n).map_err(|e| e.to_string())?;
    ensure!(
        k.value().modpow(&pk_a.e, &pk_a.n) != s2_e1.cert.ek_a,
        "seed {seed}: relayed r_a opens session 2"
    );
    let k1 = unwrap_key(&s1_e1.x_a, &r3.r_a, &pk_a.n).map_err(|e| e.to_string())?;
    ensure!(
        k1.value().modpow(&pk_a.e, &pk_a.n) == s1_e1.cert.ek_a,
        "seed {seed}: relayed r_a is not session 1's"
    );
    ensure!(
        !report.evidence[&PartyId::new("P_b")].holds_goods(&s1_e1.cert.h_a),
        "seed {seed}: P_b got goods"
    );
    ensure!(
        report.has_milestone(MilestoneKind::R3KeyRejected),
        "seed {seed}: no R3 rejection"
    );

    let honest = run_honest(config).map_err(|e| format!("seed {seed} oracle: {e}"))?;
    let oracle = honest.evidence[&PartyId::new("P_a")]
        .receipts_for(&s1_e1.cert.h_a)
        .next()
        .cloned();
    ensure!(
        oracle.as_ref() == Some(&receipt),
        "seed {seed}: receipt differs from honest completion"
    );
    Ok(())
}

fn c4_replay() -> Outcome {
    for seed in 0..20 {
        replay_checks(&WorldConfig::toy(seed))?;
    }
    for seed in 0..3 {
        replay_checks(&WorldConfig::realistic(seed))?;
    }
    Ok("UNFAIR_FOR_B for 20 toy seeds and 3 at 1024 bits, receipts match honest oracle".into())
}

fn c5_eoo_forward() -> Outcome {
    let configs = (0..20)
        .map(WorldConfig::toy)
        .chain((0..3).map(WorldConfig::realistic));
    for config in configs {
        let seed = config.seed;
        let report = run_eoo_forward(&config).map_err(|e| format!("seed {seed}: {e}"))?;
        let FairnessVerdict::UnfairForA {
            eoo_holder,
            goods_hash,
        } = &report.verdict
        else {
            return Err(format!("seed {seed}: {}", report.verdict.label()));
        };
        ensure!(
            eoo_holder.as_str() == "P_c",
            "seed {seed}: eoo held by {eoo_holder}"
        );
        let held_b = report.evidence[&PartyId::new("P_b")]
            .eoo_for(goods_hash)
            .ok_or("P_b has no eoo")?;
        let held_c = report.evidence[&PartyId::new("P_c")]
            .eoo_for(goods_hash)
            .ok_or("P_c has no eoo")?;
        ensure!(held_b == held_c, "seed {seed}: forwarded eoo differs");
        ensure!(
            report.has_milestone(MilestoneKind::PreForwardFair),
            "seed {seed}: exchange was not fair first"
        );
    }
    Ok("UNFAIR_FOR_A for 20 toy seeds and 3 at 1024 bits, P_c's EOO identical to P_b's".into())
}

/// Exhaustive match: adding a variant (such as a recovery request) breaks the build here.
fn receiver_emits_r1(out: &ReceiverOutput) -> bool {
    match out {
        ReceiverOutput::E2(_) | ReceiverOutput::E4(..) | ReceiverOutput::Goods(_) => false,
    }
}

fn c6_structural() -> Outcome {
    let mut world = World::new(WorldConfig::toy(99)).map_err(|e| e.to_string())?;
    let s1 = world
        .open_session(SenderStrategy::AbortAfterE2)
        .map_err(|e| e.to_string())?;
    world.run_until_quiescent().map_err(|e| e.to_string())?;
    let stale = world.stashed_recovery(s1).cloned().ok_or("no stash")?;
    let s2 = world
        .open_session(SenderStrategy::Honest)
        .map_err(|e| e.to_string())?;
    let e1_s1 = world.sender_session(s1).unwrap().e1().clone();
    let r_a = world.sender_session(s1).unwrap().r_a().clone();
    let from = PartyId::new("P_a");
    let registry = world.registry().clone();
    let receiver = world.receiver_identity().clone();

    // Every phase reachable at toy scale against every inbound message kind.
    let inbound = [
        Message::E1(e1_s1.clone()),
        Message::E2(match world.transcript()[1].message.clone() {
            Message::E2(e2) => e2,
            _ => return Err("second message is not E2".into()),
        }),
        Message::E3(E3 { r_a: r_a.clone() }),
        Message::E3(E3 { r_a: &r_a + 2u8 }),
        Message::E4(E4 { r_b: big(5) }),
        Message::R1(stale.clone()),
        Message::R2(R2 { r_b: big(5) }),
        Message::R3(R3 { r_a: r_a.clone() }),
        Message::R3(R3 { r_a: &r_a + 2u8 }),
    ];
    let mut explored = 0;
    let mut frontier = vec![(ReceiverSession::new(s1, receiver.clone()), 0usize)];
    let mut phases = std::collections::BTreeSet::new();
    while let Some((state, depth)) = frontier.pop() {
        phases.insert(format!("{:?}", state.phase()));
        if depth == 3 {
            continue;
        }
        for msg in &inbound {
            let mut next = state.clone();
            let mut rng = ChaCha20Rng::seed_from_u64(explored as u64);
            match next.handle(&from, msg.clone(), &registry, &mut rng) {
                Ok(Transition::Emit(out)) => {
                    ensure!(!receiver_emits_r1(&out), "receiver emitted R1")
                }
                Ok(Transition::Ignored) | Err(_) => {}
            }
            explored += 1;
            frontier.push((next, depth + 1));
        }
    }
    for p in [
        ReceiverPhase::Init,
        ReceiverPhase::SentE2,
        ReceiverPhase::Done,
        ReceiverPhase::Dangling,
    ] {
        ensure!(
            phases.contains(&format!("{p:?}")),
            "phase {p:?} never reached"
        );
    }

    // Observation 2: the stale tuple still opens during session 2.
    world.run_until_quiescent().map_err(|e| e.to_string())?;
    ensure!(world.sender_session(s2).is_some(), "session 2 missing");
    let outcome = world
        .ttp()
        .on_r1(&from, &stale, &registry)
        .map_err(|r| format!("stale R1 rejected: {r}"))?;
    let e2_s1 = world
        .sender_session(s1)
        .unwrap()
        .recovery_request()
        .ok_or("no s1 request")?;
    let pk_b = &registry.parties[&PartyId::new("P_b")];
    ensure!(
        randomizer_matches(&outcome.r2.r_b, e2_s1.y_b(), pk_b, &e2_s1.c_bt().pk_bt),
        "released r_b is not session 1's"
    );
    Ok(format!("no R1 over {explored} receiver transitions, 4 phases reached; stale R1 accepted in session 2"))
}

/// Byte offsets of every JSON string value consisting only of lowercase hex digits.
fn hex_value_spans(line: &str) -> Vec<(usize, usize)> {
    let bytes = line.as_bytes();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'"' {
            i += 1;
            continue;
        }
        let start = i + 1;
        let end = start + line[start..].find('"').expect("closed string");
        let is_key = bytes.get(end + 1) == Some(&b':');
        let text = &line[start..end];
        if !is_key
            && !text.is_empty()
            && text
                .bytes()
                .all(|c| c.is_ascii_digit() || (b'a'..=b'f').contains(&c))
        {
            spans.push((start, end));
        }
        i = end + 1;
    }
    spans
}

fn flip(c: u8, salt: usize) -> u8 {
    let v = (c as char).to_digit(16).unwrap() as usize;
    let w = (v + 1 + salt % 15) % 16;
    std::char::from_digit(w as u32, 16).unwrap() as u8
}

/// Mutates every hex digit of every hex field once; returns (mutations, survivors).
fn mutation_sweep(text: &str) -> (usize, Vec<String>) {
    let lines: Vec<&str> = text.lines().collect();
    let mut count = 0;
    let mut survivors = Vec::new();
    for (li, line) in lines.iter().enumerate() {
        for (start, end) in hex_value_spans(line) {
            for pos in start..end {
                let mut bytes = line.as_bytes().to_vec();
                bytes[pos] = flip(bytes[pos], count);
                let mut mutated_lines = lines.clone();
                let mutated = String::from_utf8(bytes).unwrap();
                mutated_lines[li] = &mutated;
                let candidate = mutated_lines.join("\n");
                count += 1;
                let caught = match AttackReport::from_jsonl(&candidate) {
                    Err(_) => true,
                    Ok(report) => !audit_report(&report).is_clean(),
                };
                if !caught {
                    survivors.push(format!("line {} offset {pos}", li + 1));
                }
            }
        }
    }
    (count, survivors)
}

fn c7_transcript_integrity() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_cegd");
    let dir = std::env::temp_dir().join(format!("cegd-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut total = 0;
    for mode in ["honest", "replay", "eoo-forward"] {
        for (bits, exponent, seed) in [(48u64, "3", 5u64), (512, "65537", 7)] {
            let path = dir.join(format!("{mode}-{bits}.jsonl"));
            let status = Command::new(bin)
                .args([
                    "run",
                    "--mode",
                    mode,
                    "--bits",
                    &bits.to_string(),
                    "--exponent",
                    exponent,
                ])
                .args(["--seed", &seed.to_string(), "--out"])
                .arg(&path)
                .status()
                .map_err(|e| e.to_string())?;
            ensure!(status.success(), "run {mode} {bits} exited {status}");
            let verify = Command::new(bin)
                .arg("verify-transcript")
                .arg(&path)
                .output()
                .map_err(|e| e.to_string())?;
            ensure!(
                verify.status.success(),
                "verify {mode} {bits} failed: {}",
                String::from_utf8_lossy(&verify.stderr)
            );

            let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
            if bits == 48 {
                let (count, survivors) = mutation_sweep(&text);
                ensure!(
                    survivors.is_empty(),
                    "{mode}: {} of {count} mutations undetected: {:?}",
                    survivors.len(),
                    &survivors[..survivors.len().min(5)]
                );
                total += count;
            }
            if mode == "replay" {
                // One digit of x_b through the real binary.
                let line_idx = text
                    .lines()
                    .position(|l| l.contains("\"x_b\""))
                    .ok_or("no x_b")?;
                let line = text.lines().nth(line_idx).unwrap();
                let at = line.find("\"x_b\":\"").unwrap() + 7;
                let mut bytes = line.as_bytes().to_vec();
                bytes[at + 1] = flip(bytes[at + 1], 0);
                let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
                lines[line_idx] = String::from_utf8(bytes).unwrap();
                let bad = dir.join(format!("{mode}-{bits}-bad.jsonl"));
                std::fs::write(&bad, lines.join("\n") + "\n").map_err(|e| e.to_string())?;
                let out = Command::new(bin)
                    .arg("verify-transcript")
                    .arg(&bad)
                    .output()
                    .map_err(|e| e.to_string())?;
                ensure!(
                    out.status.code() == Some(1),
                    "x_b mutation exited {:?}",
                    out.status.code()
                );
            }
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!(
        "6 runs verify; {total} single-digit mutations all rejected"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("VRES toy vectors", c1_toy_vectors),
        ("randomized VRES algebra", c2_randomized_vres),
        ("honest runs", c3_honest),
        ("replay attack", c4_replay),
        ("EOO forwarding", c5_eoo_forward),
        ("structural controls", c6_structural),
        ("transcript integrity", c7_transcript_integrity),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
