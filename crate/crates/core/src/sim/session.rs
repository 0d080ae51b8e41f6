//! End-to-end runs: Alice's choices, the line, an optional eavesdropper,
//! Bob's receiver, sifting and the empirical estimates.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use super::detect::{detect, Receiver};
use super::fiber::{transmit, FiberModel};
use super::info::{empirical_mutual_info, JointCounts, MiEstimate};
use super::pulse::{emit_pulse, AliceChoice, Basis, PulseFrame, ReferenceMode, Source};
use super::rng::StreamSeed;
use super::sift::{empirical_qber, sift, QberEstimate, SiftRecord, SiftedKey};
use crate::adversary::{eve_decode_after_disclosure, Adversary, EveRecord, StrategyConfig};
use crate::analytics::ProtocolKind;
use crate::quantum_math::{DistributionKind, MeanPhotonNumber};
use crate::{Error, Result};

/// Pulses per scheduling unit. Results do not depend on it.
const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub protocol: ProtocolKind,
    pub mu: MeanPhotonNumber,
    pub photon_statistics: DistributionKind,
    pub reference: ReferenceMode,
    pub fiber: FiberModel,
    /// Per-detector dark-count probability.
    pub dark_count: f64,
    pub strategy: Option<StrategyConfig>,
    pub n_pulses: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl ProtocolConfig {
    /// Lossless, noiseless, unattacked run with a Poisson source.
    pub fn new(protocol: ProtocolKind, mu: MeanPhotonNumber, n_pulses: u64, seed: u64) -> Self {
        Self {
            protocol,
            mu,
            photon_statistics: DistributionKind::Poisson,
            reference: ReferenceMode::default(),
            fiber: FiberModel::lossless(),
            dark_count: 0.0,
            strategy: None,
            n_pulses,
            seed,
            threads: None,
        }
    }

    pub fn source(&self) -> Source {
        Source {
            protocol: self.protocol,
            mu: self.mu,
            photon_statistics: self.photon_statistics,
            reference: self.reference,
        }
    }

    pub fn receiver(&self) -> Result<Receiver> {
        if self.protocol == ProtocolKind::FourState {
            Receiver::polarization(self.dark_count)
        } else {
            Receiver::phase(self.reference, self.dark_count)
        }
    }

    pub fn adversary(&self) -> Result<Option<Adversary>> {
        self.strategy
            .map(|s| Adversary::new(s, self.source(), self.receiver()?, &self.fiber))
            .transpose()
    }

    pub fn validate(&self) -> Result<()> {
        self.source().validate()?;
        self.receiver()?;
        self.adversary()?;
        if self.threads == Some(0) {
            return Err(Error::Config("thread count must be positive".into()));
        }
        Ok(())
    }
}

/// Event counts over the whole run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SessionCounts {
    pub sent: u64,
    /// Pulses where Bob obtained a bit, before basis sifting.
    pub conclusive: u64,
    pub double_clicks: u64,
    pub attacked: u64,
    /// Pulses Eve did not forward at all.
    pub blocked: u64,
}

impl SessionCounts {
    fn merge(&mut self, other: &SessionCounts) {
        self.sent += other.sent;
        self.conclusive += other.conclusive;
        self.double_clicks += other.double_clicks;
        self.attacked += other.attacked;
        self.blocked += other.blocked;
    }
}

/// Eve's knowledge of Bob's bit on the attacked positions of the key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttackedAgreement {
    pub attacked: u64,
    /// Attacked positions where Eve holds a definite value for Bob's bit.
    pub known: u64,
    pub disagreements: u64,
}

impl AttackedAgreement {
    /// Binary-symmetric-channel capacity `1 - h(disagreement rate)` over the
    /// positions where Eve holds a value.
    pub fn capacity(&self) -> Option<f64> {
        if self.known == 0 {
            return None;
        }
        let e = self.disagreements as f64 / self.known as f64;
        crate::quantum_math::binary_entropy(e).ok().map(|h| 1.0 - h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionReport {
    pub config: ProtocolConfig,
    pub counts: SessionCounts,
    pub key: SiftedKey,
    pub qber: Option<QberEstimate>,
    pub i_ab: Option<MiEstimate>,
    /// Alice-Eve information per key bit, from a table with an erasure
    /// column for positions Eve knows nothing about.
    pub i_ae: Option<MiEstimate>,
    pub i_eb: Option<MiEstimate>,
    /// Fraction of key positions where Eve holds a value for Alice's bit.
    pub eve_known_fraction: Option<f64>,
    pub eve_bob_attacked: Option<AttackedAgreement>,
}

impl SessionReport {
    /// Key bits per sent pulse.
    pub fn sifted_rate(&self) -> f64 {
        if self.counts.sent == 0 {
            0.0
        } else {
            self.key.len() as f64 / self.counts.sent as f64
        }
    }
}

struct PulseRecord {
    sift: SiftRecord,
    eve: Option<EveRecord>,
}

struct Chunk {
    kept: Vec<PulseRecord>,
    counts: SessionCounts,
}

struct Line {
    source: Source,
    receiver: Receiver,
    fiber: FiberModel,
    adversary: Option<Adversary>,
    seeds: StreamSeed,
}

fn choose_basis(protocol: ProtocolKind, rng: &mut impl Rng) -> Basis {
    if protocol.uses_bases() {
        Basis::random(rng)
    } else {
        Basis::B0
    }
}

fn vacuum(like: PulseFrame) -> PulseFrame {
    let mut p = like.without_signal();
    p.reference *= 0.0;
    p
}

impl Line {
    fn pulse(&self, index: u64, counts: &mut SessionCounts) -> Result<PulseRecord> {
        let protocol = self.source.protocol;
        let mut rng = self.seeds.pulse(index);
        let bit = rng.random::<bool>() as u8;
        let alice = AliceChoice {
            bit,
            basis: choose_basis(protocol, &mut rng),
        };
        let bob_basis = choose_basis(protocol, &mut rng);
        let sent = emit_pulse(&self.source, alice, &mut rng)?;
        let (on_line, fiber, eve) = match &self.adversary {
            None => (Some(sent), self.fiber, None),
            Some(adv) => {
                let cut = adv.intercept(sent, index, &mut rng)?;
                let fiber = if cut.substitutes_fiber {
                    self.fiber.substituted()
                } else {
                    self.fiber
                };
                (cut.forwarded, fiber, Some(cut.record))
            }
        };
        counts.sent += 1;
        if eve.is_some_and(|r| r.attacked) {
            counts.attacked += 1;
        }
        let arriving = match on_line {
            Some(p) => transmit(p, &fiber, &mut rng),
            None => {
                counts.blocked += 1;
                vacuum(sent)
            }
        };
        let outcome = detect(&arriving, bob_basis, &self.receiver, &mut rng)?;
        if outcome.result.bit().is_some() {
            counts.conclusive += 1;
        }
        if outcome.double_click {
            counts.double_clicks += 1;
        }
        Ok(PulseRecord {
            sift: SiftRecord {
                index,
                alice,
                bob_basis,
                outcome,
            },
            eve,
        })
    }

    fn chunk(&self, start: u64, end: u64) -> Result<Chunk> {
        let mut counts = SessionCounts::default();
        let mut kept = Vec::new();
        for index in start..end {
            let rec = self
                .pulse(index, &mut counts)
                .map_err(|e| e.at_pulse(index))?;
            let sifted = rec.sift.outcome.result.bit().is_some()
                && (!self.source.protocol.uses_bases() || rec.sift.alice.basis == rec.sift.bob_basis);
            if sifted {
                kept.push(rec);
            }
        }
        Ok(Chunk { kept, counts })
    }
}

/// Runs a full session. The result depends only on the configuration and
/// the seed, not on the number of worker threads.
pub fn run_session(config: &ProtocolConfig) -> Result<SessionReport> {
    config.validate()?;
    match config.threads {
        None => run(config),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| run(config)),
    }
}

fn run(config: &ProtocolConfig) -> Result<SessionReport> {
    let line = Line {
        source: config.source(),
        receiver: config.receiver()?,
        fiber: config.fiber,
        adversary: config.adversary()?,
        seeds: StreamSeed::new(config.seed),
    };
    let n = config.n_pulses;
    let chunks = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| line.chunk(c * CHUNK, ((c + 1) * CHUNK).min(n)))
        .collect::<Result<Vec<_>>>()?;

    let mut counts = SessionCounts::default();
    let mut records = Vec::new();
    let mut ledger = Vec::new();
    for chunk in chunks {
        counts.merge(&chunk.counts);
        for rec in chunk.kept {
            records.push(rec.sift);
            ledger.extend(rec.eve);
        }
    }
    let attacked_run = line.adversary.is_some();
    let mut key = sift(
        config.protocol,
        &records,
        attacked_run.then_some(ledger.as_slice()),
    );
    if let Some(eve) = key.eve.as_mut() {
        let disclosed: BTreeMap<u64, Basis> =
            key.indices.iter().copied().zip(key.bases.iter().copied()).collect();
        eve_decode_after_disclosure(eve, &disclosed, &line.seeds)?;
    }
    estimate(*config, counts, key)
}

fn estimate(config: ProtocolConfig, counts: SessionCounts, key: SiftedKey) -> Result<SessionReport> {
    if key.is_empty() {
        return Ok(SessionReport {
            config,
            counts,
            key,
            qber: None,
            i_ab: None,
            i_ae: None,
            i_eb: None,
            eve_known_fraction: None,
            eve_bob_attacked: None,
        });
    }
    let qber = Some(empirical_qber(&key)?);
    let mut ab = JointCounts::new(2, 2);
    for (&a, &b) in key.alice.iter().zip(&key.bob) {
        ab.add(a as usize, b as usize);
    }
    let i_ab = Some(empirical_mutual_info(&ab)?);

    let (mut i_ae, mut i_eb, mut known_fraction, mut agreement) = (None, None, None, None);
    if let Some(eve) = &key.eve {
        let column = |v: Option<u8>| v.map_or(2, usize::from);
        let mut ae = JointCounts::new(2, 3);
        let mut eb = JointCounts::new(3, 2);
        let mut known = 0u64;
        let mut agree = AttackedAgreement {
            attacked: 0,
            known: 0,
            disagreements: 0,
        };
        for ((rec, &a), &b) in eve.iter().zip(&key.alice).zip(&key.bob) {
            ae.add(a as usize, column(rec.guess));
            eb.add(column(rec.knowledge_of_bob()), b as usize);
            known += rec.guess.is_some() as u64;
            if rec.attacked {
                agree.attacked += 1;
                if let Some(e) = rec.knowledge_of_bob() {
                    agree.known += 1;
                    agree.disagreements += (e != b) as u64;
                }
            }
        }
        i_ae = Some(empirical_mutual_info(&ae)?);
        i_eb = Some(empirical_mutual_info(&eb)?);
        known_fraction = Some(known as f64 / key.len() as f64);
        agreement = Some(agree);
    }
    Ok(SessionReport {
        config,
        counts,
        key,
        qber,
        i_ab,
        i_ae,
        i_eb,
        eve_known_fraction: known_fraction,
        eve_bob_attacked: agreement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::StrategyKind;

    fn mu(x: f64) -> MeanPhotonNumber {
        MeanPhotonNumber::new(x).unwrap()
    }

    #[test]
    fn honest_lossless_key_has_no_errors() {
        for p in ProtocolKind::ALL {
            let r = run_session(&ProtocolConfig::new(p, mu(0.3), 20_000, 11)).unwrap();
            assert!(!r.key.is_empty());
            assert_eq!(r.qber.unwrap().errors, 0, "{p}");
            assert!(r.key.eve.is_none());
        }
    }

    #[test]
    fn thread_count_does_not_change_the_key() {
        let mut cfg = ProtocolConfig::new(ProtocolKind::FourPlusTwo, mu(0.2), 40_000, 3);
        cfg.strategy = Some(StrategyConfig::new(StrategyKind::PovmMimic, 0.5).unwrap());
        cfg.threads = Some(1);
        let one = run_session(&cfg).unwrap();
        cfg.threads = Some(4);
        let four = run_session(&cfg).unwrap();
        assert_eq!(one.key, four.key);
        assert_eq!(one.counts, four.counts);
    }

    #[test]
    fn zero_pulses_yield_empty_report() {
        let r = run_session(&ProtocolConfig::new(ProtocolKind::TwoState, mu(0.1), 0, 0)).unwrap();
        assert!(r.key.is_empty());
        assert_eq!(r.qber, None);
        assert_eq!(r.sifted_rate(), 0.0);
    }

    #[test]
    fn rejected_strategy_fails_before_running() {
        let mut cfg = ProtocolConfig::new(ProtocolKind::TwoState, mu(0.1), 10, 0);
        cfg.strategy = Some(StrategyConfig::new(StrategyKind::PhotonNumberSplit, 1.0).unwrap());
        assert!(matches!(
            run_session(&cfg),
            Err(Error::StrategyRejected { .. })
        ));
    }
}
