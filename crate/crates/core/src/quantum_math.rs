//! Coherent-state overlap geometry, photon-number statistics and the
//! binary-channel information quantities used throughout the crate.
//!
//! Every formula here depends on the pulse intensity `mu = |alpha|^2` only;
//! optical phases live in [`crate::sim::PulseFrame`].

use std::f64::consts::FRAC_PI_2;

use crate::{Error, Result};

/// Mass left in the tail of a truncated photon-number distribution.
pub const PMF_TAIL_MASS: f64 = 1e-12;

/// Mean photon number of a pulse, `|alpha|^2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MeanPhotonNumber(f64);

impl MeanPhotonNumber {
    pub fn new(mu: f64) -> Result<Self> {
        if mu.is_finite() && mu >= 0.0 {
            Ok(Self(mu))
        } else {
            Err(Error::domain("mean photon number", mu))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Intensity after a channel with the given power transmittance.
    pub fn attenuated(self, transmittance: f64) -> Self {
        Self(self.0 * transmittance)
    }
}

/// Angle `delta` between the two signal states, defined by
/// `cos(delta) = |<alpha|-alpha>| = exp(-2 mu)`.
///
/// The sine is cached alongside the cosine: for weak pulses `cos(delta)` is
/// close to one and `sqrt(1 - cos^2)` would lose most of its digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapAngle {
    delta: f64,
    cos_delta: f64,
    sin_delta: f64,
}

impl OverlapAngle {
    pub fn from_delta(delta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&delta) {
            return Err(Error::domain("overlap angle", delta));
        }
        Ok(Self {
            delta,
            cos_delta: delta.cos().max(0.0),
            sin_delta: delta.sin(),
        })
    }

    /// Builds the angle from its cosine, the state overlap.
    pub fn from_cos(cos_delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&cos_delta) {
            return Err(Error::domain("state overlap", cos_delta));
        }
        let sin_delta = ((1.0 - cos_delta) * (1.0 + cos_delta)).sqrt();
        Ok(Self {
            delta: sin_delta.atan2(cos_delta),
            cos_delta,
            sin_delta,
        })
    }

    pub fn delta(self) -> f64 {
        self.delta
    }

    pub fn cos_delta(self) -> f64 {
        self.cos_delta
    }

    pub fn sin_delta(self) -> f64 {
        self.sin_delta
    }
}

/// Overlap angle of the coherent states `|alpha>` and `|-alpha>`.
pub fn overlap_angle(mu: MeanPhotonNumber) -> OverlapAngle {
    let mu = mu.value();
    let cos_delta = (-2.0 * mu).exp();
    // 1 - exp(-4 mu), evaluated without cancellation.
    let sin_delta = (-(-4.0 * mu).exp_m1()).sqrt();
    OverlapAngle {
        delta: sin_delta.atan2(cos_delta),
        cos_delta,
        sin_delta,
    }
}

/// Checked wrapper around [`overlap_angle`] for raw intensities.
pub fn overlap_angle_of(mu: f64) -> Result<OverlapAngle> {
    MeanPhotonNumber::new(mu).map(overlap_angle)
}

/// Probability that a projection onto the symmetric orthogonal basis reads
/// the wrong state: `(1 - sin delta) / 2`.
pub fn sym_projection_error(delta: OverlapAngle) -> f64 {
    (0.5 * (1.0 - delta.sin_delta())).clamp(0.0, 0.5)
}

/// Binary Shannon entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("probability", p));
    }
    Ok(plogp(p) + plogp(1.0 - p))
}

/// `-p log2 p`, zero at `p = 0`.
pub(crate) fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Capacity of the binary symmetric channel obtained by projecting two
/// states with overlap `cos delta` onto the symmetric basis; the maximum
/// information extractable from a single copy.
pub fn max_extractable_info(delta: OverlapAngle) -> f64 {
    let q = sym_projection_error(delta);
    // q is clamped into [0, 1/2], so the entropy cannot fail.
    (1.0 - binary_entropy(q).unwrap_or(1.0)).clamp(0.0, 1.0)
}

/// Same quantity as [`max_extractable_info`], written as
/// `1 + sum_{+,-} ((1 +- sin delta)/2) log2((1 +- sin delta)/2)`.
pub fn max_extractable_info_sum(delta: OverlapAngle) -> f64 {
    let s = delta.sin_delta();
    let term = |p: f64| if p <= 0.0 { 0.0 } else { p * p.log2() };
    1.0 + term(0.5 * (1.0 - s)) + term(0.5 * (1.0 + s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistributionKind {
    /// Coherent light.
    Poisson,
    /// Thermal (Bose-Einstein) light.
    Thermal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonDistribution {
    pub kind: DistributionKind,
    pub mean: MeanPhotonNumber,
}

impl PhotonDistribution {
    pub fn poisson(mu: f64) -> Result<Self> {
        Ok(Self {
            kind: DistributionKind::Poisson,
            mean: MeanPhotonNumber::new(mu)?,
        })
    }

    pub fn thermal(mu: f64) -> Result<Self> {
        Ok(Self {
            kind: DistributionKind::Thermal,
            mean: MeanPhotonNumber::new(mu)?,
        })
    }

    pub fn pmf(&self, n: u64) -> f64 {
        photon_number_pmf(self, n)
    }

    /// Probability of a non-empty pulse.
    pub fn p_nonzero(&self) -> f64 {
        let mu = self.mean.value();
        match self.kind {
            DistributionKind::Poisson => -(-mu).exp_m1(),
            DistributionKind::Thermal => mu / (1.0 + mu),
        }
    }

    /// Smallest `n` such that `P(N >= n) < PMF_TAIL_MASS`.
    pub fn truncation_point(&self) -> u64 {
        let mu = self.mean.value();
        if mu == 0.0 {
            return 1;
        }
        match self.kind {
            DistributionKind::Thermal => {
                // P(N >= n) = r^n exactly.
                let r = mu / (1.0 + mu);
                let n = (PMF_TAIL_MASS.ln() / r.ln()).floor() as u64 + 1;
                n.max(1)
            }
            DistributionKind::Poisson => {
                let mut n = 0u64;
                let mut term = (-mu).exp();
                loop {
                    n += 1;
                    // Past the mode the terms shrink at least geometrically, so
                    // P(N >= n) <= P(n) / (1 - ratio).
                    term *= mu / n as f64;
                    let ratio = mu / (n as f64 + 1.0);
                    if ratio < 1.0 && term / (1.0 - ratio) < PMF_TAIL_MASS {
                        return n;
                    }
                }
            }
        }
    }

    /// Probabilities `P(0) ..= P(n_max - 1)` up to the truncation point.
    pub fn truncated_pmf(&self) -> Vec<f64> {
        (0..self.truncation_point()).map(|n| self.pmf(n)).collect()
    }
}

/// Probability of exactly `n` photons.
pub fn photon_number_pmf(dist: &PhotonDistribution, n: u64) -> f64 {
    let mu = dist.mean.value();
    if mu == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    match dist.kind {
        DistributionKind::Poisson => {
            let ln_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
            (n as f64 * mu.ln() - mu - ln_fact).exp()
        }
        DistributionKind::Thermal => {
            let r = mu / (1.0 + mu);
            r.powf(n as f64) / (1.0 + mu)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiphotonFraction {
    /// `P(N >= 2)`.
    pub p_multi: f64,
    /// `P(N >= 2 | N >= 1)`; `None` for an empty source.
    pub given_nonzero: Option<f64>,
}

/// Fraction of pulses carrying two or more photons.
pub fn multiphoton_fraction(dist: &PhotonDistribution) -> MultiphotonFraction {
    let mu = dist.mean.value();
    let p_multi = match dist.kind {
        DistributionKind::Poisson => (-(-mu).exp_m1() - mu * (-mu).exp()).max(0.0),
        DistributionKind::Thermal => {
            let r = mu / (1.0 + mu);
            r * r
        }
    };
    let p_nonzero = dist.p_nonzero();
    MultiphotonFraction {
        p_multi,
        given_nonzero: (p_nonzero > 0.0).then(|| p_multi / p_nonzero),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_6, PI};

    // Frozen from a 40-digit mpmath evaluation.
    const COS_DELTA_MU_0_09: f64 = 0.835_270_211_411_272_021_312_384_974;
    const H_QUARTER: f64 = 0.811_278_124_459_132_863_909_695_792;
    const INFO_MU_0_09: f64 = 0.230_664_170_561_549_219_795_507_756;

    fn mu(x: f64) -> MeanPhotonNumber {
        MeanPhotonNumber::new(x).unwrap()
    }

    #[test]
    fn overlap_endpoints() {
        let a = overlap_angle(mu(0.0));
        assert_eq!(a.delta(), 0.0);
        assert_eq!(a.cos_delta(), 1.0);
        let b = overlap_angle(mu(1e6));
        assert!((b.delta() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(b.cos_delta(), 0.0);
    }

    #[test]
    fn overlap_mu_0_09_matches_oracle() {
        let a = overlap_angle(mu(0.09));
        assert!((a.cos_delta() - COS_DELTA_MU_0_09).abs() < 1e-15);
        assert!((a.delta().cos() - a.cos_delta()).abs() < 1e-12);
    }

    #[test]
    fn overlap_rejects_bad_mu() {
        assert!(MeanPhotonNumber::new(-0.1).is_err());
        assert!(MeanPhotonNumber::new(f64::NAN).is_err());
        assert!(MeanPhotonNumber::new(f64::INFINITY).is_err());
        assert!(overlap_angle_of(-1.0).is_err());
    }

    #[test]
    fn angle_constructors_validate() {
        assert!(OverlapAngle::from_delta(-0.01).is_err());
        assert!(OverlapAngle::from_delta(FRAC_PI_2 + 1e-9).is_err());
        assert!(OverlapAngle::from_cos(1.5).is_err());
        let a = OverlapAngle::from_cos(0.5).unwrap();
        assert!((a.delta() - PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn projection_error_values() {
        let e = |d: f64| sym_projection_error(OverlapAngle::from_delta(d).unwrap());
        assert_eq!(e(FRAC_PI_2), 0.0);
        assert_eq!(e(0.0), 0.5);
        assert!((e(FRAC_PI_6) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert!((binary_entropy(0.25).unwrap() - H_QUARTER).abs() < 1e-15);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn extractable_info_values() {
        let i = |d: f64| max_extractable_info(OverlapAngle::from_delta(d).unwrap());
        assert_eq!(i(FRAC_PI_2), 1.0);
        assert_eq!(i(0.0), 0.0);
        let at = max_extractable_info(overlap_angle(mu(0.09)));
        assert!((at - INFO_MU_0_09).abs() < 1e-14);
        assert!((at - 0.23).abs() < 0.005);
    }

    #[test]
    fn pmf_values() {
        let p = PhotonDistribution::poisson(0.0).unwrap();
        assert_eq!(p.pmf(0), 1.0);
        assert_eq!(p.pmf(3), 0.0);
        let p = PhotonDistribution::poisson(0.1).unwrap();
        assert!((p.pmf(1) - 0.1 * (-0.1f64).exp()).abs() < 1e-16);
        let t = PhotonDistribution::thermal(0.1).unwrap();
        assert!((t.pmf(0) - 1.0 / 1.1).abs() < 1e-15);
    }

    #[test]
    fn multiphoton_poisson_tenth() {
        let f = multiphoton_fraction(&PhotonDistribution::poisson(0.1).unwrap());
        assert!((f.p_multi - 0.004_678_840_160_444_469_5).abs() < 1e-16);
        assert!((f.p_multi * 200.0 - 1.0).abs() < 0.1);
        assert!((f.given_nonzero.unwrap() * 20.0 - 1.0).abs() < 0.1);
    }

    #[test]
    fn multiphoton_thermal_tenth_by_tail_sum() {
        let t = PhotonDistribution::thermal(0.1).unwrap();
        let tail: f64 = (2..200).map(|n| t.pmf(n)).sum();
        let f = multiphoton_fraction(&t);
        assert!((f.p_multi - tail).abs() < 1e-15);
        assert!((f.p_multi - 1.0 / 121.0).abs() < 1e-15);
        // Order of 1/100.
        assert!(f.p_multi > 1.0 / 200.0 && f.p_multi < 1.0 / 50.0);
    }

    #[test]
    fn multiphoton_empty_source() {
        for d in [
            PhotonDistribution::poisson(0.0).unwrap(),
            PhotonDistribution::thermal(0.0).unwrap(),
        ] {
            let f = multiphoton_fraction(&d);
            assert_eq!(f.p_multi, 0.0);
            assert_eq!(f.given_nonzero, None);
        }
    }
}
