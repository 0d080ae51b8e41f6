//! Closed-form expectations for a simulated session, the values the
//! empirical estimates are compared against.
//!
//! Dark counts are ignored. Where an attack reduces to a closed form of
//! [`crate::analytics`], that form is used directly; the other attacks are
//! worked out from the same receiver model the simulator samples.

use crate::adversary::StrategyKind;
use crate::analytics::{info_2, info_4, info_42, qber_2, qber_42, ProtocolKind};
use crate::quantum_math::{
    max_extractable_info, multiphoton_fraction, overlap_angle, MeanPhotonNumber,
    PhotonDistribution,
};
use crate::sim::{ProtocolConfig, ReferenceMode};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    /// Key bits per sent pulse.
    pub sifted_rate: f64,
    pub qber: f64,
    /// Alice-Eve and Eve-Bob information per key bit; `None` without an
    /// eavesdropper.
    pub i_ae: Option<f64>,
    pub i_eb: Option<f64>,
    /// Fraction of key positions where Eve ends up holding a value.
    pub eve_known_fraction: Option<f64>,
}

fn dist(config: &ProtocolConfig, mean: f64) -> Result<PhotonDistribution> {
    Ok(PhotonDistribution {
        kind: config.photon_statistics,
        mean: MeanPhotonNumber::new(mean)?,
    })
}

/// Probability that Bob's receiver produces a bit for a pulse in the matching
/// basis at mean photon number `m` on arrival.
fn click_rate(config: &ProtocolConfig, m: f64) -> Result<f64> {
    Ok(match config.protocol {
        ProtocolKind::FourState => dist(config, m)?.p_nonzero(),
        _ => -(-2.0 * m).exp_m1(),
    })
}

/// Fraction of pulses whose bases agree.
fn basis_factor(protocol: ProtocolKind) -> f64 {
    if protocol.uses_bases() {
        0.5
    } else {
        1.0
    }
}

pub fn predict(config: &ProtocolConfig) -> Result<Prediction> {
    let mu = config.mu.value();
    let t = config.fiber.transmittance();
    let half = basis_factor(config.protocol);
    let honest = click_rate(config, mu * t)?;
    let Some(strategy) = config.strategy else {
        return Ok(Prediction {
            sifted_rate: half * honest,
            qber: 0.0,
            i_ae: None,
            i_eb: None,
            eve_known_fraction: None,
        });
    };
    let eta = strategy.eta;
    let e = eta.value();
    let delta = overlap_angle(config.mu);
    let info = |qber: f64, i_ae: f64, i_eb: f64, known: f64| Prediction {
        sifted_rate: half * honest,
        qber,
        i_ae: Some(i_ae),
        i_eb: Some(i_eb),
        eve_known_fraction: Some(known),
    };

    use StrategyKind::*;
    Ok(match (strategy.kind, config.protocol) {
        // Count-preserving resend in a random basis; every key bit Eve
        // attacked was measured, half of them in the right basis.
        (InterceptResendConjugate | BlockOnInconclusive, ProtocolKind::FourState) => {
            let q = 0.25 * e;
            let r = info_4(crate::analytics::QberValue::new(q)?)?;
            info(q, r.i_ae, r.i_eb, 0.5 * e)
        }
        (InterceptResendConjugate, _) => {
            let q = qber_42(eta, delta);
            let r = info_42(q, delta)?;
            info(q.value(), r.i_ae, r.i_eb, 0.5 * e)
        }
        (InterceptResendSymmetric, _) => {
            let q = qber_2(eta, delta);
            let r = info_2(q, delta)?;
            info(q.value(), r.i_ae, r.i_eb, e)
        }
        (PovmMimic, protocol) => {
            let c = -(-2.0 * mu).exp_m1();
            if protocol == ProtocolKind::TwoState {
                info(0.5 * e * (1.0 - c), e * c, e, e * c)
            } else {
                info(e * (0.25 * (1.0 - c) + 0.25), 0.5 * e * c, 0.5 * e, 0.5 * e * c)
            }
        }
        (BlockOnInconclusive, protocol) => {
            let c = -(-2.0 * mu).exp_m1();
            let r = honest;
            // The bare reference gives each port half the local oscillator.
            let r_v = match config.reference {
                ReferenceMode::Parallel { .. } => -(-mu * t).exp_m1(),
                ReferenceMode::Weak => 0.0,
            };
            let attacked = c * r + (1.0 - c) * r_v;
            let per_pulse = (1.0 - e) * r + e * attacked;
            let (errors, known) = if protocol == ProtocolKind::TwoState {
                (e * (1.0 - c) * r_v * 0.5, e * c * r)
            } else {
                (
                    e * (0.5 * (1.0 - c) * r_v + 0.25 * c * r),
                    0.5 * e * c * r,
                )
            };
            let f = known / per_pulse;
            Prediction {
                sifted_rate: half * per_pulse,
                qber: errors / per_pulse,
                i_ae: Some(f),
                i_eb: Some(f),
                eve_known_fraction: Some(f),
            }
        }
        (BeamSplit, protocol) => {
            let s = strategy
                .split_fraction
                .unwrap_or_else(|| config.fiber.loss_fraction());
            let to_bob = click_rate(config, mu * (1.0 - s))?;
            let per_pulse = (1.0 - e) * honest + e * to_bob;
            let attacked = e * to_bob / per_pulse;
            let per_bit = if protocol == ProtocolKind::FourState {
                // Eve needs a photon of her own; Bob's and Eve's shares are
                // both thinned copies of the same photon number.
                let p0 = |m: f64| dist(config, m).map(|d| 1.0 - d.p_nonzero());
                let both = 1.0 - p0(mu * (1.0 - s))? - p0(mu * s)? + p0(mu)?;
                if to_bob > 0.0 {
                    both / to_bob
                } else {
                    0.0
                }
            } else {
                max_extractable_info(overlap_angle(MeanPhotonNumber::new(mu * s)?))
            };
            let known = if protocol == ProtocolKind::FourState {
                attacked * per_bit
            } else {
                attacked
            };
            Prediction {
                sifted_rate: half * per_pulse,
                qber: 0.0,
                i_ae: Some(attacked * per_bit),
                i_eb: Some(attacked * per_bit),
                eve_known_fraction: Some(known),
            }
        }
        (PhotonNumberSplit, _) => {
            let d = dist(config, mu)?;
            let plan = crate::adversary::PnsPlan::new(&d, config.fiber.loss_fraction())?;
            let p_multi = multiphoton_fraction(&d).p_multi;
            let to_bob = d.pmf(1) * plan.single_forward + p_multi * plan.multi_forward;
            let per_pulse = (1.0 - e) * honest + e * to_bob;
            let f = if per_pulse > 0.0 {
                e * p_multi * plan.multi_forward / per_pulse
            } else {
                0.0
            };
            Prediction {
                sifted_rate: half * per_pulse,
                qber: 0.0,
                i_ae: Some(f),
                i_eb: Some(f),
                eve_known_fraction: Some(f),
            }
        }
    })
}
