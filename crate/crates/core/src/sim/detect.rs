//! Bob's receivers.
//!
//! Phase encoding uses the parallel-reference interferometer: the signal and
//! a local oscillator tapped from the reference meet on a 50/50 combiner, and
//! each output port drives a detector that clicks with probability
//! `1 - exp(-I)` for port intensity `I`. D2 reads bit 0, D3 reads bit 1. The
//! optional `pi/2` shifter on the local oscillator selects basis `B1`.
//!
//! Polarization encoding projects every photon onto the analyzer basis with
//! `cos^2` / `sin^2` probabilities.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use super::pulse::{Basis, Encoding, PulseFrame, ReferenceMode};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectionResult {
    Bit0,
    Bit1,
    Inconclusive,
}

impl DetectionResult {
    pub fn bit(self) -> Option<u8> {
        match self {
            DetectionResult::Bit0 => Some(0),
            DetectionResult::Bit1 => Some(1),
            DetectionResult::Inconclusive => None,
        }
    }

    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            DetectionResult::Bit0
        } else {
            DetectionResult::Bit1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionOutcome {
    pub result: DetectionResult,
    pub d2: bool,
    pub d3: bool,
    /// Both D2 and D3 fired; the bit was drawn uniformly.
    pub double_click: bool,
    /// D1 saw the reference and enabled D2/D3.
    pub triggered: bool,
}

/// Receiver hardware shared by Bob and by an eavesdropper imitating him.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Receiver {
    /// Phase encoding (interferometer) or polarization analyzer.
    pub phase_encoding: bool,
    /// Local-oscillator amplitude per unit of received reference amplitude.
    pub tap_ratio: f64,
    /// D2/D3 are gated by the reference detector D1.
    pub gated: bool,
    /// Per-detector dark-count probability inside the gate.
    pub dark_count: f64,
}

impl Receiver {
    pub fn phase(reference: ReferenceMode, dark_count: f64) -> Result<Self> {
        check_dark(dark_count)?;
        Ok(Self {
            phase_encoding: true,
            tap_ratio: 1.0 / reference.intensity_factor().sqrt(),
            gated: matches!(reference, ReferenceMode::Parallel { .. }),
            dark_count,
        })
    }

    pub fn polarization(dark_count: f64) -> Result<Self> {
        check_dark(dark_count)?;
        Ok(Self {
            phase_encoding: false,
            tap_ratio: 0.0,
            gated: false,
            dark_count,
        })
    }

    fn check_encoding(&self, pulse: &PulseFrame) -> Result<()> {
        if pulse.encoding.is_phase() != self.phase_encoding {
            return Err(Error::Config(format!(
                "{} pulse at a {} receiver",
                pulse.encoding.name(),
                if self.phase_encoding { "phase" } else { "polarization" }
            )));
        }
        Ok(())
    }

    fn triggered(&self, pulse: &PulseFrame) -> bool {
        !self.gated || pulse.reference.norm_sqr() > 0.0
    }

    /// Intensities at the D2 and D3 ports of the interferometer.
    pub fn port_intensities(&self, pulse: &PulseFrame, basis: Basis) -> (f64, f64) {
        let local = pulse.reference * self.tap_ratio * Complex64::from_polar(1.0, basis.phase());
        let plus = (pulse.signal + local) * FRAC_1_SQRT_2;
        let minus = (pulse.signal - local) * FRAC_1_SQRT_2;
        (plus.norm_sqr(), minus.norm_sqr())
    }
}

fn check_dark(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain("dark-count probability", p))
    }
}

/// Joint click probabilities of D2 and D3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickProbabilities {
    pub none: f64,
    pub d2_only: f64,
    pub d3_only: f64,
    pub both: f64,
}

impl ClickProbabilities {
    pub fn bit0(&self) -> f64 {
        self.d2_only + 0.5 * self.both
    }

    pub fn bit1(&self) -> f64 {
        self.d3_only + 0.5 * self.both
    }

    pub fn inconclusive(&self) -> f64 {
        self.none
    }

    fn independent(p2: f64, p3: f64) -> Self {
        Self {
            none: (1.0 - p2) * (1.0 - p3),
            d2_only: p2 * (1.0 - p3),
            d3_only: (1.0 - p2) * p3,
            both: p2 * p3,
        }
    }
}

/// Closed-form outcome probabilities for a pulse at the receiver.
pub fn click_probabilities(
    pulse: &PulseFrame,
    basis: Basis,
    receiver: &Receiver,
) -> Result<ClickProbabilities> {
    receiver.check_encoding(pulse)?;
    if !receiver.triggered(pulse) {
        return Ok(ClickProbabilities::independent(0.0, 0.0));
    }
    let dark = receiver.dark_count;
    match pulse.encoding {
        Encoding::PhasePair => {
            let (i2, i3) = receiver.port_intensities(pulse, basis);
            Ok(ClickProbabilities::independent(
                1.0 - (1.0 - dark) * (-i2).exp(),
                1.0 - (1.0 - dark) * (-i3).exp(),
            ))
        }
        Encoding::PolarizationPair {
            polarization,
            photons,
        } => {
            let c = polarization.pass_probability(basis);
            let n = photons as i32;
            // All photons on one side; the other detector fires only if dark.
            let lit = if photons > 0 { 1.0 } else { dark };
            let d2_only = c.powi(n) * (1.0 - dark) * lit;
            let d3_only = (1.0 - c).powi(n) * (1.0 - dark) * lit;
            let none = if photons == 0 {
                (1.0 - dark) * (1.0 - dark)
            } else {
                0.0
            };
            Ok(ClickProbabilities {
                none,
                d2_only,
                d3_only,
                both: (1.0 - none - d2_only - d3_only).max(0.0),
            })
        }
    }
}

/// Samples one detection event.
pub fn detect(
    pulse: &PulseFrame,
    basis: Basis,
    receiver: &Receiver,
    rng: &mut impl Rng,
) -> Result<DetectionOutcome> {
    receiver.check_encoding(pulse)?;
    let triggered = receiver.triggered(pulse);
    let (mut d2, mut d3) = (false, false);
    if triggered {
        let dark = receiver.dark_count;
        match pulse.encoding {
            Encoding::PhasePair => {
                let (i2, i3) = receiver.port_intensities(pulse, basis);
                d2 = rng.random::<f64>() >= (1.0 - dark) * (-i2).exp();
                d3 = rng.random::<f64>() >= (1.0 - dark) * (-i3).exp();
            }
            Encoding::PolarizationPair {
                polarization,
                photons,
            } => {
                let c = polarization.pass_probability(basis);
                let passed = (0..photons).filter(|_| rng.random::<f64>() < c).count() as u32;
                d2 = passed > 0;
                d3 = passed < photons;
                if dark > 0.0 {
                    d2 |= rng.random::<f64>() < dark;
                    d3 |= rng.random::<f64>() < dark;
                }
            }
        }
    }
    let double_click = d2 && d3;
    let result = match (d2, d3) {
        (false, false) => DetectionResult::Inconclusive,
        (true, false) => DetectionResult::Bit0,
        (false, true) => DetectionResult::Bit1,
        (true, true) => DetectionResult::from_bit(rng.random::<bool>() as u8),
    };
    Ok(DetectionOutcome {
        result,
        d2,
        d3,
        double_click,
        triggered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::ProtocolKind;
    use crate::quantum_math::MeanPhotonNumber;
    use crate::sim::pulse::{AliceChoice, Origin, Source};

    fn src(p: ProtocolKind, mu: f64) -> Source {
        Source::new(p, MeanPhotonNumber::new(mu).unwrap())
    }

    fn choice(bit: u8, basis: Basis) -> AliceChoice {
        AliceChoice::new(bit, basis).unwrap()
    }

    #[test]
    fn matched_basis_inconclusive_is_overlap() {
        let s = src(ProtocolKind::FourPlusTwo, 0.1);
        let rx = Receiver::phase(s.reference, 0.0).unwrap();
        for basis in [Basis::B0, Basis::B1] {
            for bit in [0, 1] {
                let p = s.phase_frame(choice(bit, basis), Origin::Alice);
                let c = click_probabilities(&p, basis, &rx).unwrap();
                assert!((c.inconclusive() - (-0.2f64).exp()).abs() < 1e-14);
                let wrong = if bit == 0 { c.bit1() } else { c.bit0() };
                assert!(wrong < 1e-15, "bit {bit} basis {basis:?}: {wrong}");
            }
        }
    }

    #[test]
    fn wrong_basis_each_port_sees_mu() {
        let s = src(ProtocolKind::FourPlusTwo, 0.1);
        let rx = Receiver::phase(s.reference, 0.0).unwrap();
        let p = s.phase_frame(choice(0, Basis::B0), Origin::Alice);
        let (i2, i3) = rx.port_intensities(&p, Basis::B1);
        assert!((i2 - 0.1).abs() < 1e-14 && (i3 - 0.1).abs() < 1e-14);
        let c = click_probabilities(&p, Basis::B1, &rx).unwrap();
        assert!((c.bit0() - c.bit1()).abs() < 1e-15);
    }

    #[test]
    fn vacuum_signal_with_reference() {
        let s = src(ProtocolKind::TwoState, 0.1);
        let rx = Receiver::phase(s.reference, 0.0).unwrap();
        let p = s.phase_frame(choice(0, Basis::B0), Origin::Alice).without_signal();
        let (i2, i3) = rx.port_intensities(&p, Basis::B0);
        assert!((i2 - 0.05).abs() < 1e-14 && (i3 - 0.05).abs() < 1e-14);
        let c = click_probabilities(&p, Basis::B0, &rx).unwrap();
        let single = 1.0 - (-0.05f64).exp();
        assert!((c.d2_only + c.both - single).abs() < 1e-15);
        assert!((c.bit0() - c.bit1()).abs() < 1e-15);
    }

    #[test]
    fn gate_closed_without_reference() {
        let s = src(ProtocolKind::TwoState, 0.1);
        let rx = Receiver::phase(s.reference, 0.2).unwrap();
        let mut p = s.phase_frame(choice(0, Basis::B0), Origin::Alice);
        p.reference = Complex64::new(0.0, 0.0);
        let c = click_probabilities(&p, Basis::B0, &rx).unwrap();
        assert_eq!(c.inconclusive(), 1.0);
        let mut rng = crate::sim::StreamSeed::new(3).pulse(0);
        let o = detect(&p, Basis::B0, &rx, &mut rng).unwrap();
        assert!(!o.triggered);
        assert_eq!(o.result, DetectionResult::Inconclusive);
    }

    #[test]
    fn polarization_probabilities() {
        let s = src(ProtocolKind::FourState, 0.1);
        let rx = Receiver::polarization(0.0).unwrap();
        let p = s.polarization_frame(choice(0, Basis::B0), 2, Origin::Alice);
        let c = click_probabilities(&p, Basis::B0, &rx).unwrap();
        assert_eq!((c.d2_only, c.d3_only, c.both, c.none), (1.0, 0.0, 0.0, 0.0));
        let c = click_probabilities(&p, Basis::B1, &rx).unwrap();
        assert!((c.d2_only - 0.25).abs() < 1e-15);
        assert!((c.both - 0.5).abs() < 1e-15);
        let empty = s.polarization_frame(choice(0, Basis::B0), 0, Origin::Alice);
        assert_eq!(click_probabilities(&empty, Basis::B0, &rx).unwrap().none, 1.0);
    }

    #[test]
    fn encoding_mismatch_is_config_error() {
        let s = src(ProtocolKind::FourState, 0.1);
        let p = s.polarization_frame(choice(0, Basis::B0), 1, Origin::Alice);
        let rx = Receiver::phase(ReferenceMode::default(), 0.0).unwrap();
        assert!(matches!(click_probabilities(&p, Basis::B0, &rx), Err(Error::Config(_))));
        let mut rng = crate::sim::StreamSeed::new(0).pulse(0);
        assert!(detect(&p, Basis::B0, &rx, &mut rng).is_err());
        assert!(Receiver::polarization(1.5).is_err());
    }

    #[test]
    fn inconclusive_iff_no_click() {
        let s = src(ProtocolKind::FourPlusTwo, 0.8);
        let rx = Receiver::phase(s.reference, 0.05).unwrap();
        let seeds = crate::sim::StreamSeed::new(11);
        for i in 0..2000 {
            let mut rng = seeds.pulse(i);
            let p = s.phase_frame(choice((i % 2) as u8, Basis::B0), Origin::Alice);
            let o = detect(&p, Basis::random(&mut rng), &rx, &mut rng).unwrap();
            assert_eq!(o.result == DetectionResult::Inconclusive, !o.d2 && !o.d3);
            assert_eq!(o.double_click, o.d2 && o.d3);
        }
    }
}
