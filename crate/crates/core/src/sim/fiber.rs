use rand::Rng;

use super::pulse::{Encoding, PulseFrame};
use crate::{Error, Result};

/// Attenuating line between Alice and Bob.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberModel {
    pub length_km: f64,
    pub attenuation_db_per_km: f64,
    /// Eve replaced the line with a lossless one.
    pub substituted_by_eve: bool,
}

impl FiberModel {
    /// Silica fiber.
    pub const DEFAULT_ATTENUATION_DB_PER_KM: f64 = 0.2;

    pub fn new(length_km: f64, attenuation_db_per_km: f64) -> Result<Self> {
        if !(length_km.is_finite() && length_km >= 0.0) {
            return Err(Error::domain("fiber length", length_km));
        }
        if !(attenuation_db_per_km.is_finite() && attenuation_db_per_km >= 0.0) {
            return Err(Error::domain("fiber attenuation", attenuation_db_per_km));
        }
        Ok(Self {
            length_km,
            attenuation_db_per_km,
            substituted_by_eve: false,
        })
    }

    pub fn lossless() -> Self {
        Self {
            length_km: 0.0,
            attenuation_db_per_km: Self::DEFAULT_ATTENUATION_DB_PER_KM,
            substituted_by_eve: false,
        }
    }

    /// Default-attenuation fiber long enough to lose `loss_db`.
    pub fn with_loss_db(loss_db: f64) -> Result<Self> {
        if !(loss_db.is_finite() && loss_db >= 0.0) {
            return Err(Error::domain("line loss (dB)", loss_db));
        }
        Self::new(
            loss_db / Self::DEFAULT_ATTENUATION_DB_PER_KM,
            Self::DEFAULT_ATTENUATION_DB_PER_KM,
        )
    }

    pub fn loss_db(&self) -> f64 {
        self.length_km * self.attenuation_db_per_km
    }

    /// Power transmittance, one for a substituted line.
    pub fn transmittance(&self) -> f64 {
        if self.substituted_by_eve {
            1.0
        } else {
            10f64.powf(-self.loss_db() / 10.0)
        }
    }

    pub fn loss_fraction(&self) -> f64 {
        1.0 - self.transmittance()
    }

    pub fn substituted(self) -> Self {
        Self {
            substituted_by_eve: true,
            ..self
        }
    }
}

impl Default for FiberModel {
    fn default() -> Self {
        Self::lossless()
    }
}

/// Propagates a pulse: amplitudes scale by `sqrt(T)`, photon numbers are
/// thinned binomially with survival `T`.
pub fn transmit(pulse: PulseFrame, fiber: &FiberModel, rng: &mut impl Rng) -> PulseFrame {
    let t = fiber.transmittance();
    if t >= 1.0 {
        return pulse;
    }
    let amp = t.sqrt();
    let mut out = pulse;
    out.signal *= amp;
    out.reference *= amp;
    if let Encoding::PolarizationPair { ref mut photons, .. } = out.encoding {
        *photons = (0..*photons).filter(|_| rng.random::<f64>() < t).count() as u32;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::ProtocolKind;
    use crate::quantum_math::MeanPhotonNumber;
    use crate::sim::pulse::{AliceChoice, Basis, Origin, Source};
    use crate::sim::StreamSeed;

    #[test]
    fn ten_db_keeps_a_tenth() {
        let f = FiberModel::with_loss_db(10.0).unwrap();
        assert!((f.length_km - 50.0).abs() < 1e-12);
        assert!((f.transmittance() - 0.1).abs() < 1e-15);
        assert!((f.loss_fraction() - 0.9).abs() < 1e-15);
        let src = Source::new(ProtocolKind::TwoState, MeanPhotonNumber::new(0.1).unwrap());
        let p = src.phase_frame(AliceChoice::new(0, Basis::B0).unwrap(), Origin::Alice);
        let out = transmit(p, &f, &mut StreamSeed::new(0).pulse(0));
        assert!((out.intensity() - 0.01).abs() < 1e-15);
        assert!((out.reference.norm_sqr() - 0.1 * p.reference.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn lossless_and_substituted_are_identity() {
        let src = Source::new(ProtocolKind::FourState, MeanPhotonNumber::new(0.5).unwrap());
        let p = src.polarization_frame(AliceChoice::new(1, Basis::B1).unwrap(), 3, Origin::Alice);
        let mut rng = StreamSeed::new(0).pulse(0);
        assert_eq!(transmit(p, &FiberModel::lossless(), &mut rng), p);
        let sub = FiberModel::with_loss_db(30.0).unwrap().substituted();
        assert_eq!(sub.loss_fraction(), 0.0);
        assert_eq!(transmit(p, &sub, &mut rng), p);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(FiberModel::new(-1.0, 0.2).is_err());
        assert!(FiberModel::new(1.0, f64::NAN).is_err());
        assert!(FiberModel::with_loss_db(-3.0).is_err());
    }
}
