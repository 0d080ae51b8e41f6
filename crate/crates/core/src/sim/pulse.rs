use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Geometric, Poisson};

use crate::analytics::ProtocolKind;
use crate::quantum_math::{DistributionKind, MeanPhotonNumber};
use crate::{Error, Result};

/// Encoding basis. The 2-state protocol only uses `B0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    B0,
    B1,
}

impl Basis {
    pub fn index(self) -> usize {
        self as usize
    }

    pub(crate) fn random(rng: &mut impl Rng) -> Self {
        if rng.random::<bool>() {
            Basis::B1
        } else {
            Basis::B0
        }
    }

    /// Interferometer phase selecting this basis.
    pub fn phase(self) -> f64 {
        match self {
            Basis::B0 => 0.0,
            Basis::B1 => FRAC_PI_2,
        }
    }

    /// Polarization analyzer orientation for this basis.
    pub fn analyzer_angle(self) -> f64 {
        match self {
            Basis::B0 => 0.0,
            Basis::B1 => FRAC_PI_4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AliceChoice {
    pub bit: u8,
    pub basis: Basis,
}

impl AliceChoice {
    pub fn new(bit: u8, basis: Basis) -> Result<Self> {
        if bit > 1 {
            return Err(Error::Config(format!("bit value {bit}")));
        }
        Ok(Self { bit, basis })
    }
}

/// One of the four polarization states: vertical and horizontal in `B0`,
/// the two diagonals in `B1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Polarization {
    pub basis: Basis,
    pub bit: u8,
}

impl Polarization {
    /// Orientation in radians: 0, pi/2 for `B0` and pi/4, 3pi/4 for `B1`.
    pub fn angle(self) -> f64 {
        self.basis.analyzer_angle() + if self.bit == 1 { FRAC_PI_2 } else { 0.0 }
    }

    /// Probability that one photon exits the analyzer's bit-0 port.
    pub fn pass_probability(self, analyzer: Basis) -> f64 {
        let c = (self.angle() - analyzer.analyzer_angle()).cos();
        (c * c).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    /// Signal phase relative to the reference carries the bit.
    PhasePair,
    /// Polarization carries the bit; the photon number is tracked explicitly.
    PolarizationPair {
        polarization: Polarization,
        photons: u32,
    },
}

impl Encoding {
    pub fn name(&self) -> &'static str {
        match self {
            Encoding::PhasePair => "phase",
            Encoding::PolarizationPair { .. } => "polarization",
        }
    }

    pub fn is_phase(&self) -> bool {
        matches!(self, Encoding::PhasePair)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Alice,
    Eve,
}

/// How the phase reference travels with the signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceMode {
    /// Strong reference on the orthogonal polarization; `|beta|^2` is
    /// `intensity_factor * mu` and the receiver taps off a local oscillator
    /// equal to the signal amplitude.
    Parallel { intensity_factor: f64 },
    /// Reference as weak as the signal and used whole as the local
    /// oscillator; nothing arrives when the line is blocked.
    Weak,
}

impl ReferenceMode {
    pub const DEFAULT_INTENSITY_FACTOR: f64 = 100.0;

    pub fn intensity_factor(self) -> f64 {
        match self {
            ReferenceMode::Parallel { intensity_factor } => intensity_factor,
            ReferenceMode::Weak => 1.0,
        }
    }
}

impl Default for ReferenceMode {
    fn default() -> Self {
        ReferenceMode::Parallel {
            intensity_factor: Self::DEFAULT_INTENSITY_FACTOR,
        }
    }
}

/// One transmitted signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseFrame {
    /// Coherent amplitude of the signal; `|signal|^2` is its mean photon
    /// number.
    pub signal: Complex64,
    /// Phase reference amplitude, zero for polarization encoding.
    pub reference: Complex64,
    pub encoding: Encoding,
    pub origin: Origin,
}

impl PulseFrame {
    pub fn intensity(&self) -> f64 {
        self.signal.norm_sqr()
    }

    pub fn photons(&self) -> Option<u32> {
        match self.encoding {
            Encoding::PolarizationPair { photons, .. } => Some(photons),
            Encoding::PhasePair => None,
        }
    }

    /// Same frame with the signal removed, the reference kept.
    pub fn without_signal(mut self) -> Self {
        self.signal = Complex64::new(0.0, 0.0);
        if let Encoding::PolarizationPair { ref mut photons, .. } = self.encoding {
            *photons = 0;
        }
        self
    }
}

/// Signal phase for a bit in a basis: 0, pi in `B0`; pi/2, 3pi/2 in `B1`.
pub fn signal_phase(choice: AliceChoice) -> f64 {
    choice.basis.phase() + if choice.bit == 1 { PI } else { 0.0 }
}

/// Alice's transmitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source {
    pub protocol: ProtocolKind,
    pub mu: MeanPhotonNumber,
    /// Photon statistics for polarization pulses. Phase-encoded pulses are
    /// always coherent.
    pub photon_statistics: DistributionKind,
    pub reference: ReferenceMode,
}

impl Source {
    pub fn new(protocol: ProtocolKind, mu: MeanPhotonNumber) -> Self {
        Self {
            protocol,
            mu,
            photon_statistics: DistributionKind::Poisson,
            reference: ReferenceMode::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.protocol != ProtocolKind::FourState
            && self.photon_statistics != DistributionKind::Poisson
        {
            return Err(Error::Config(
                "phase-encoded protocols require a coherent (poisson) source".into(),
            ));
        }
        if let ReferenceMode::Parallel { intensity_factor } = self.reference {
            if !(intensity_factor.is_finite() && intensity_factor >= 1.0) {
                return Err(Error::Config(format!(
                    "reference intensity factor {intensity_factor} must be >= 1"
                )));
            }
        }
        Ok(())
    }

    pub fn encoding_is_phase(&self) -> bool {
        self.protocol != ProtocolKind::FourState
    }

    /// Coherent phase-encoded frame for the given choice at the nominal
    /// intensity with a fresh reference.
    pub fn phase_frame(&self, choice: AliceChoice, origin: Origin) -> PulseFrame {
        let amp = self.mu.value().sqrt();
        let beta = (self.reference.intensity_factor() * self.mu.value()).sqrt();
        PulseFrame {
            signal: Complex64::from_polar(amp, signal_phase(choice)),
            reference: Complex64::new(beta, 0.0),
            encoding: Encoding::PhasePair,
            origin,
        }
    }

    /// Polarization frame carrying exactly `photons` photons.
    pub fn polarization_frame(&self, choice: AliceChoice, photons: u32, origin: Origin) -> PulseFrame {
        PulseFrame {
            signal: Complex64::new(self.mu.value().sqrt(), 0.0),
            reference: Complex64::new(0.0, 0.0),
            encoding: Encoding::PolarizationPair {
                polarization: Polarization {
                    basis: choice.basis,
                    bit: choice.bit,
                },
                photons,
            },
            origin,
        }
    }

    pub fn sample_photons(&self, rng: &mut impl Rng) -> Result<u32> {
        let mu = self.mu.value();
        if mu == 0.0 {
            return Ok(0);
        }
        let n = match self.photon_statistics {
            DistributionKind::Poisson => Poisson::new(mu)
                .map_err(|_| Error::domain("poisson mean", mu))?
                .sample(rng) as u64,
            DistributionKind::Thermal => Geometric::new(1.0 / (1.0 + mu))
                .map_err(|_| Error::domain("thermal mean", mu))?
                .sample(rng),
        };
        Ok(n.min(u32::MAX as u64) as u32)
    }
}

/// Prepares Alice's pulse for her choice.
pub fn emit_pulse(source: &Source, choice: AliceChoice, rng: &mut impl Rng) -> Result<PulseFrame> {
    if choice.bit > 1 {
        return Err(Error::Config(format!("bit value {}", choice.bit)));
    }
    match source.protocol {
        ProtocolKind::TwoState if choice.basis != Basis::B0 => Err(Error::Config(
            "the 2-state protocol only has basis B0".into(),
        )),
        ProtocolKind::FourState => {
            let n = source.sample_photons(rng)?;
            Ok(source.polarization_frame(choice, n, Origin::Alice))
        }
        _ => Ok(source.phase_frame(choice, Origin::Alice)),
    }
}
