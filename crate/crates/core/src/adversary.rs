//! Eavesdropping strategies applied between Alice and the line.
//!
//! Each strategy takes Alice's frame, records what Eve learned in an
//! [`EveRecord`], and returns what she forwards to Bob. Strategies that hold
//! a quantum state until the bases are public store it in the record and are
//! finished by [`eve_decode_after_disclosure`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::analytics::{EavesdropFraction, ProtocolKind};
use crate::quantum_math::{
    multiphoton_fraction, overlap_angle, sym_projection_error, MeanPhotonNumber, OverlapAngle,
    PhotonDistribution,
};
use crate::sim::{
    detect, AliceChoice, Basis, Encoding, FiberModel, Origin, Polarization, PulseFrame, Receiver,
    ReferenceMode, Source, StreamSeed,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    /// Measure in one of the protocol's two bases, chosen at random, and
    /// resend the result.
    InterceptResendConjugate,
    /// Project onto the symmetric orthogonal basis and resend the result.
    InterceptResendSymmetric,
    /// Run Bob's unambiguous receiver; guess on inconclusive results.
    PovmMimic,
    /// Run Bob's receiver; resend conclusive results, block the rest.
    BlockOnInconclusive,
    /// Keep the fraction of each pulse the line would have lost.
    BeamSplit,
    /// Keep one photon of every multiphoton pulse.
    PhotonNumberSplit,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        Self::InterceptResendConjugate,
        Self::InterceptResendSymmetric,
        Self::PovmMimic,
        Self::BlockOnInconclusive,
        Self::BeamSplit,
        Self::PhotonNumberSplit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::InterceptResendConjugate => "conjugate",
            Self::InterceptResendSymmetric => "symmetric",
            Self::PovmMimic => "povm",
            Self::BlockOnInconclusive => "block",
            Self::BeamSplit => "beam-split",
            Self::PhotonNumberSplit => "pns",
        }
    }

    /// Whether the strategy can run against `protocol`.
    pub fn check_protocol(self, protocol: ProtocolKind) -> Result<()> {
        use ProtocolKind::*;
        let ok = match self {
            Self::InterceptResendConjugate => matches!(protocol, FourState | FourPlusTwo),
            Self::InterceptResendSymmetric => protocol == TwoState,
            Self::PovmMimic => matches!(protocol, TwoState | FourPlusTwo),
            Self::BlockOnInconclusive | Self::BeamSplit => true,
            Self::PhotonNumberSplit => protocol == FourState,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::StrategyRejected {
                strategy: self.name(),
                encoding: if protocol == FourState {
                    "polarization"
                } else {
                    "phase"
                },
            })
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "conjugate" | "intercept-resend-conjugate" => Ok(Self::InterceptResendConjugate),
            "symmetric" | "intercept-resend-symmetric" => Ok(Self::InterceptResendSymmetric),
            "povm" | "povm-mimic" => Ok(Self::PovmMimic),
            "block" | "block-on-inconclusive" => Ok(Self::BlockOnInconclusive),
            "beam-split" | "beamsplit" => Ok(Self::BeamSplit),
            "pns" | "photon-number-split" => Ok(Self::PhotonNumberSplit),
            other => Err(Error::Config(format!("unknown strategy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    pub eta: EavesdropFraction,
    /// Beam-split fraction; defaults to the line's loss fraction.
    pub split_fraction: Option<f64>,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind, eta: f64) -> Result<Self> {
        Ok(Self {
            kind,
            eta: EavesdropFraction::new(eta)?,
            split_fraction: None,
        })
    }

    pub fn with_split(mut self, split: f64) -> Result<Self> {
        check_split(split)?;
        self.split_fraction = Some(split);
        Ok(self)
    }
}

fn check_split(split: f64) -> Result<()> {
    if (0.0..1.0).contains(&split) {
        Ok(())
    } else {
        Err(Error::domain("split fraction", split))
    }
}

/// Measurement basis Eve used at interception time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EveBasis {
    B0,
    B1,
    /// Symmetric orthogonal basis between the two states of one pair.
    Symmetric,
}

impl From<Basis> for EveBasis {
    fn from(b: Basis) -> Self {
        match b {
            Basis::B0 => EveBasis::B0,
            Basis::B1 => EveBasis::B1,
        }
    }
}

impl EveBasis {
    fn protocol_basis(self) -> Option<Basis> {
        match self {
            EveBasis::B0 => Some(Basis::B0),
            EveBasis::B1 => Some(Basis::B1),
            EveBasis::Symmetric => None,
        }
    }
}

/// Quantum state Eve holds until the bases are disclosed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeferredState {
    /// Split-off coherent amplitude.
    Amplitude(Complex64),
    /// Split-off photons of a polarization pulse.
    Photons {
        polarization: Polarization,
        count: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveRecord {
    pub pulse_index: u64,
    pub attacked: bool,
    /// Eve's conclusion about Alice's bit; `None` while she has no
    /// conclusive information.
    pub guess: Option<u8>,
    pub basis_used: Option<EveBasis>,
    /// Bit value of the state Eve prepared and sent to Bob.
    pub sent_bit: Option<u8>,
    pub deferred: Option<DeferredState>,
}

impl EveRecord {
    pub fn untouched(pulse_index: u64) -> Self {
        Self {
            pulse_index,
            attacked: false,
            guess: None,
            basis_used: None,
            sent_bit: None,
            deferred: None,
        }
    }

    /// What Eve believes Bob's bit is: the state she sent, or her guess of
    /// Alice's bit when she forwarded Alice's own light.
    pub fn knowledge_of_bob(&self) -> Option<u8> {
        self.sent_bit.or(self.guess)
    }
}

/// Eve's action on one pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interception {
    /// `None` when Eve sends nothing at all.
    pub forwarded: Option<PulseFrame>,
    pub record: EveRecord,
    /// The forwarded frame travels through Eve's lossless line.
    pub substitutes_fiber: bool,
}

impl Interception {
    fn pass(pulse: PulseFrame, index: u64) -> Self {
        Self {
            forwarded: Some(pulse),
            record: EveRecord::untouched(index),
            substitutes_fiber: false,
        }
    }
}

/// Eve's transmitter and receiver: the same hardware as Alice's and Bob's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveKit {
    pub source: Source,
    pub receiver: Receiver,
}

impl EveKit {
    fn own_basis(&self, rng: &mut impl Rng) -> Basis {
        if self.source.protocol.uses_bases() {
            Basis::random(rng)
        } else {
            Basis::B0
        }
    }

    fn phase_resend(&self, bit: u8, basis: Basis) -> PulseFrame {
        self.source
            .phase_frame(AliceChoice { bit, basis }, Origin::Eve)
    }
}

fn attacks(eta: EavesdropFraction, rng: &mut impl Rng) -> bool {
    rng.random::<f64>() < eta.value()
}

fn random_bit(rng: &mut impl Rng) -> u8 {
    rng.random::<bool>() as u8
}

/// Projects a coherent amplitude onto the symmetric basis of the pair
/// `{+|a| e^{i phi}, -|a| e^{i phi}}` selected by `basis`, reading the wrong
/// member with probability `(1 - sin delta) / 2`. A state outside the pair
/// (wrong basis) or the vacuum gives a uniformly random reading.
pub fn symmetric_projection(
    amplitude: Complex64,
    basis: Basis,
    delta: OverlapAngle,
    rng: &mut impl Rng,
) -> u8 {
    let aligned = (amplitude * Complex64::from_polar(1.0, -basis.phase())).re;
    if amplitude.norm_sqr() == 0.0 || aligned.abs() <= 1e-9 * amplitude.norm() {
        return random_bit(rng);
    }
    let truth = if aligned > 0.0 { 0 } else { 1 };
    if rng.random::<f64>() < sym_projection_error(delta) {
        1 - truth
    } else {
        truth
    }
}

/// Measures photons with a polarization analyzer in `basis`; `None` when no
/// photon arrives, a random bit on contradictory clicks.
fn measure_photons(
    polarization: Polarization,
    count: u32,
    basis: Basis,
    rng: &mut impl Rng,
) -> Option<u8> {
    if count == 0 {
        return None;
    }
    let c = polarization.pass_probability(basis);
    let passed = (0..count).filter(|_| rng.random::<f64>() < c).count() as u32;
    Some(match (passed > 0, passed < count) {
        (true, false) => 0,
        (false, true) => 1,
        _ => random_bit(rng),
    })
}

/// Intercept/resend in a randomly chosen protocol basis.
///
/// Polarization pulses are measured photon by photon and resent with the
/// same photon number in Eve's basis, so Bob's count statistics are
/// untouched. Phase pulses get a symmetric-basis projection within Eve's
/// basis pair (a uniformly random reading when Alice used the other pair)
/// and a fresh nominal state.
pub fn intercept_resend_conjugate(
    pulse: PulseFrame,
    eta: EavesdropFraction,
    delta: OverlapAngle,
    kit: &EveKit,
    index: u64,
    rng: &mut impl Rng,
) -> Result<Interception> {
    if !attacks(eta, rng) {
        return Ok(Interception::pass(pulse, index));
    }
    let basis = Basis::random(rng);
    let (guess, forwarded) = match pulse.encoding {
        Encoding::PolarizationPair {
            polarization,
            photons,
        } => match measure_photons(polarization, photons, basis, rng) {
            Some(bit) => (
                Some(bit),
                kit.source
                    .polarization_frame(AliceChoice { bit, basis }, photons, Origin::Eve),
            ),
            None => (None, pulse),
        },
        Encoding::PhasePair => {
            let bit = symmetric_projection(pulse.signal, basis, delta, rng);
            (Some(bit), kit.phase_resend(bit, basis))
        }
    };
    Ok(Interception {
        forwarded: Some(forwarded),
        record: EveRecord {
            pulse_index: index,
            attacked: true,
            guess,
            basis_used: Some(basis.into()),
            sent_bit: guess,
            deferred: None,
        },
        substitutes_fiber: false,
    })
}

/// Symmetric-basis projection on the 2-state pair, resending the reading.
pub fn intercept_resend_symmetric(
    pulse: PulseFrame,
    eta: EavesdropFraction,
    delta: OverlapAngle,
    kit: &EveKit,
    index: u64,
    rng: &mut impl Rng,
) -> Result<Interception> {
    if !pulse.encoding.is_phase() {
        return Err(Error::StrategyRejected {
            strategy: StrategyKind::InterceptResendSymmetric.name(),
            encoding: pulse.encoding.name(),
        });
    }
    if !attacks(eta, rng) {
        return Ok(Interception::pass(pulse, index));
    }
    let bit = symmetric_projection(pulse.signal, Basis::B0, delta, rng);
    Ok(Interception {
        forwarded: Some(kit.phase_resend(bit, Basis::B0)),
        record: EveRecord {
            pulse_index: index,
            attacked: true,
            guess: Some(bit),
            basis_used: Some(EveBasis::Symmetric),
            sent_bit: Some(bit),
            deferred: None,
        },
        substitutes_fiber: false,
    })
}

/// Runs Bob's receiver; resends the conclusive bit, or a uniform guess after
/// an inconclusive result.
pub fn povm_mimic(
    pulse: PulseFrame,
    eta: EavesdropFraction,
    kit: &EveKit,
    index: u64,
    rng: &mut impl Rng,
) -> Result<Interception> {
    if !pulse.encoding.is_phase() {
        return Err(Error::StrategyRejected {
            strategy: StrategyKind::PovmMimic.name(),
            encoding: pulse.encoding.name(),
        });
    }
    if !attacks(eta, rng) {
        return Ok(Interception::pass(pulse, index));
    }
    let basis = kit.own_basis(rng);
    let guess = detect(&pulse, basis, &kit.receiver, rng)?.result.bit();
    let sent = guess.unwrap_or_else(|| random_bit(rng));
    Ok(Interception {
        forwarded: Some(kit.phase_resend(sent, basis)),
        record: EveRecord {
            pulse_index: index,
            attacked: true,
            guess,
            basis_used: Some(basis.into()),
            sent_bit: Some(sent),
            deferred: None,
        },
        substitutes_fiber: false,
    })
}

/// Runs Bob's receiver and resends only conclusive results. On an
/// inconclusive result a parallel-reference line still needs its reference,
/// so Eve forwards the reference with an empty signal; a weak-reference line
/// is simply blocked.
pub fn block_on_inconclusive(
    pulse: PulseFrame,
    eta: EavesdropFraction,
    kit: &EveKit,
    index: u64,
    rng: &mut impl Rng,
) -> Result<Interception> {
    if !attacks(eta, rng) {
        return Ok(Interception::pass(pulse, index));
    }
    let basis = kit.own_basis(rng);
    let (guess, forwarded) = match pulse.encoding {
        Encoding::PolarizationPair {
            polarization,
            photons,
        } => match measure_photons(polarization, photons, basis, rng) {
            Some(bit) => (
                Some(bit),
                Some(kit.source.polarization_frame(
                    AliceChoice { bit, basis },
                    photons,
                    Origin::Eve,
                )),
            ),
            None => (None, None),
        },
        Encoding::PhasePair => match detect(&pulse, basis, &kit.receiver, rng)?.result.bit() {
            Some(bit) => (Some(bit), Some(kit.phase_resend(bit, basis))),
            None => match kit.source.reference {
                ReferenceMode::Parallel { .. } => {
                    (None, Some(kit.phase_resend(0, basis).without_signal()))
                }
                ReferenceMode::Weak => (None, None),
            },
        },
    };
    Ok(Interception {
        forwarded,
        record: EveRecord {
            pulse_index: index,
            attacked: true,
            guess,
            basis_used: Some(basis.into()),
            sent_bit: guess,
            deferred: None,
        },
        substitutes_fiber: false,
    })
}

/// Splits off a fraction of the pulse and forwards the rest through a
/// lossless line. Both signal and reference are attenuated, so Bob sees
/// exactly what an honest lossy line would deliver.
pub fn beam_split(
    pulse: PulseFrame,
    split: f64,
    eta: EavesdropFraction,
    index: u64,
    rng: &mut impl Rng,
) -> Result<Interception> {
    check_split(split)?;
    if !attacks(eta, rng) {
        return Ok(Interception::pass(pulse, index));
    }
    let keep = split.sqrt();
    let pass = (1.0 - split).sqrt();
    let mut forwarded = pulse;
    forwarded.signal *= pass;
    forwarded.reference *= pass;
    let deferred = match pulse.encoding {
        Encoding::PhasePair => DeferredState::Amplitude(pulse.signal * keep),
        Encoding::PolarizationPair {
            polarization,
            photons,
        } => {
            let kept = (0..photons).filter(|_| rng.random::<f64>() < split).count() as u32;
            forwarded.encoding = Encoding::PolarizationPair {
                polarization,
                photons: photons - kept,
            };
            DeferredState::Photons {
                polarization,
                count: kept,
            }
        }
    };
    Ok(Interception {
        forwarded: Some(forwarded),
        record: EveRecord {
            pulse_index: index,
            attacked: true,
            guess: None,
            basis_used: None,
            sent_bit: None,
            deferred: Some(deferred),
        },
        substitutes_fiber: true,
    })
}

/// Forwarding probabilities that make a photon-number-splitting Eve deliver
/// the count Bob expects from the lossy line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnsPlan {
    /// Probability of forwarding the spare photon of a multiphoton pulse.
    pub multi_forward: f64,
    /// Probability of forwarding a single-photon pulse.
    pub single_forward: f64,
    /// Non-empty pulses Bob expects per sent pulse, to first order.
    pub target_rate: f64,
}

impl PnsPlan {
    pub fn new(dist: &PhotonDistribution, loss_fraction: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&loss_fraction) {
            return Err(Error::domain("loss fraction", loss_fraction));
        }
        let target_rate = (1.0 - loss_fraction) * dist.p_nonzero();
        let p_multi = multiphoton_fraction(dist).p_multi;
        let p_single = dist.pmf(1);
        let (multi_forward, single_forward) = if p_multi >= target_rate {
            let m = if p_multi > 0.0 {
                target_rate / p_multi
            } else {
                0.0
            };
            (m, 0.0)
        } else if p_single > 0.0 {
            (1.0, ((target_rate - p_multi) / p_single).min(1.0))
        } else {
            (1.0, 0.0)
        };
        Ok(Self {
            multi_forward,
            single_forward,
            target_rate,
        })
    }
}

/// Photon-number splitting on a polarization pulse: from every pulse with
/// two or more photons Eve keeps one photon for later and forwards one
/// losslessly; single-photon pulses are forwarded losslessly or blocked so
/// that Bob's count rate matches the lossy line. Phase encodings are
/// rejected: selecting photon numbers destroys the phase.
pub fn photon_number_split(
    pulse: PulseFrame,
    plan: &PnsPlan,
    eta: EavesdropFraction,
    index: u64,
    rng: &mut impl Rng,
) -> Result<Interception> {
    let Encoding::PolarizationPair {
        polarization,
        photons,
    } = pulse.encoding
    else {
        return Err(Error::StrategyRejected {
            strategy: StrategyKind::PhotonNumberSplit.name(),
            encoding: pulse.encoding.name(),
        });
    };
    if !attacks(eta, rng) {
        return Ok(Interception::pass(pulse, index));
    }
    let with_photons = |n: u32| PulseFrame {
        encoding: Encoding::PolarizationPair {
            polarization,
            photons: n,
        },
        ..pulse
    };
    let mut record = EveRecord::untouched(index);
    let forwarded = match photons {
        0 => Some(pulse),
        1 => (rng.random::<f64>() < plan.single_forward).then_some(pulse),
        _ => {
            record.attacked = true;
            record.deferred = Some(DeferredState::Photons {
                polarization,
                count: 1,
            });
            (rng.random::<f64>() < plan.multi_forward).then(|| with_photons(1))
        }
    };
    Ok(Interception {
        forwarded,
        record,
        substitutes_fiber: true,
    })
}

/// A strategy bound to the session it attacks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adversary {
    pub config: StrategyConfig,
    pub kit: EveKit,
    /// Overlap of Alice's states at interception.
    pub delta: OverlapAngle,
    pub split: f64,
    pub pns: Option<PnsPlan>,
}

impl Adversary {
    pub fn new(
        config: StrategyConfig,
        source: Source,
        receiver: Receiver,
        fiber: &FiberModel,
    ) -> Result<Self> {
        config.kind.check_protocol(source.protocol)?;
        let split = config.split_fraction.unwrap_or_else(|| fiber.loss_fraction());
        check_split(split)?;
        let pns = match config.kind {
            StrategyKind::PhotonNumberSplit => {
                let dist = PhotonDistribution {
                    kind: source.photon_statistics,
                    mean: source.mu,
                };
                Some(PnsPlan::new(&dist, fiber.loss_fraction())?)
            }
            _ => None,
        };
        Ok(Self {
            config,
            kit: EveKit { source, receiver },
            delta: overlap_angle(source.mu),
            split,
            pns,
        })
    }

    pub fn intercept(
        &self,
        pulse: PulseFrame,
        index: u64,
        rng: &mut impl Rng,
    ) -> Result<Interception> {
        let eta = self.config.eta;
        match self.config.kind {
            StrategyKind::InterceptResendConjugate => {
                intercept_resend_conjugate(pulse, eta, self.delta, &self.kit, index, rng)
            }
            StrategyKind::InterceptResendSymmetric => {
                intercept_resend_symmetric(pulse, eta, self.delta, &self.kit, index, rng)
            }
            StrategyKind::PovmMimic => povm_mimic(pulse, eta, &self.kit, index, rng),
            StrategyKind::BlockOnInconclusive => {
                block_on_inconclusive(pulse, eta, &self.kit, index, rng)
            }
            StrategyKind::BeamSplit => beam_split(pulse, self.split, eta, index, rng),
            StrategyKind::PhotonNumberSplit => {
                let plan = self.pns.as_ref().ok_or(Error::Undefined("missing PNS plan"))?;
                photon_number_split(pulse, plan, eta, index, rng)
            }
        }
    }
}

/// Completes Eve's measurements once Alice's bases for the kept positions
/// are public.
///
/// Readings taken in a basis that turned out to differ from Alice's are
/// discarded. Held photons are measured in the disclosed basis, held
/// amplitudes are projected onto the symmetric basis of the disclosed pair
/// at their own intensity. Every attacked record that depends on the basis
/// must have a disclosure.
pub fn eve_decode_after_disclosure(
    records: &mut [EveRecord],
    disclosed: &BTreeMap<u64, Basis>,
    seeds: &StreamSeed,
) -> Result<()> {
    for rec in records.iter_mut().filter(|r| r.attacked) {
        let eve_basis = rec.basis_used.and_then(EveBasis::protocol_basis);
        if eve_basis.is_none() && rec.deferred.is_none() {
            continue;
        }
        let basis = *disclosed
            .get(&rec.pulse_index)
            .ok_or(Error::MissingDisclosure(rec.pulse_index))?;
        if eve_basis.is_some_and(|b| b != basis) {
            rec.guess = None;
            rec.sent_bit = None;
        }
        let Some(state) = rec.deferred else {
            continue;
        };
        let mut rng = seeds.decode(rec.pulse_index);
        rec.guess = match state {
            DeferredState::Photons {
                polarization,
                count,
            } => measure_photons(polarization, count, basis, &mut rng),
            DeferredState::Amplitude(a) => {
                let delta = MeanPhotonNumber::new(a.norm_sqr())
                    .map(overlap_angle)
                    .map_err(|e| e.at_pulse(rec.pulse_index))?;
                Some(symmetric_projection(a, basis, delta, &mut rng))
            }
        };
    }
    Ok(())
}
