//! Closed-form rates, error rates and eavesdropper information for the
//! 4-state, 2-state and 4+2 protocols under intercept/resend attacks, the
//! normalized comparison curves, and the lossy-line leakage bounds.
//!
//! All informations are per bit of sifted key. With intercept/resend every
//! information is linear in the error rate `Q` at fixed overlap, so the
//! comparison curves are independent of `Q`.

use std::fmt;
use std::str::FromStr;

use crate::quantum_math::{
    max_extractable_info, multiphoton_fraction, overlap_angle, MeanPhotonNumber, OverlapAngle,
    PhotonDistribution,
};
use crate::{Error, Result};

/// Slack allowed when deciding whether an implied eavesdropping fraction
/// exceeds one.
const FEASIBILITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolKind {
    /// Four polarization states in two conjugate orthogonal bases.
    FourState,
    /// Two non-orthogonal phase-encoded coherent states.
    TwoState,
    /// Four phase-encoded coherent states forming two conjugate
    /// non-orthogonal pairs.
    FourPlusTwo,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 3] = [Self::FourState, Self::TwoState, Self::FourPlusTwo];

    pub fn name(self) -> &'static str {
        match self {
            Self::FourState => "4-state",
            Self::TwoState => "2-state",
            Self::FourPlusTwo => "4+2",
        }
    }

    /// Sifted bits per pulse without eavesdropping or loss.
    pub fn rate(self, mu: MeanPhotonNumber) -> f64 {
        match self {
            Self::FourState => rate_4(mu),
            Self::TwoState => rate_2(mu),
            Self::FourPlusTwo => rate_42(mu),
        }
    }

    pub fn uses_bases(self) -> bool {
        !matches!(self, Self::TwoState)
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "4-state" | "4" | "four" | "four-state" | "bb84" => Ok(Self::FourState),
            "2-state" | "2" | "two" | "two-state" | "b92" => Ok(Self::TwoState),
            "4+2" | "42" | "four-plus-two" => Ok(Self::FourPlusTwo),
            other => Err(Error::Config(format!("unknown protocol '{other}'"))),
        }
    }
}

/// Fraction of pulses the eavesdropper attacks.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EavesdropFraction(f64);

impl EavesdropFraction {
    pub const NONE: Self = Self(0.0);
    pub const ALL: Self = Self(1.0);

    pub fn new(eta: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&eta) {
            Ok(Self(eta))
        } else {
            Err(Error::domain("eavesdropping fraction", eta))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A bit error rate, session-level `Q` or per-attacked-pulse `q`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QberValue(f64);

impl QberValue {
    pub fn new(q: f64) -> Result<Self> {
        if (0.0..=0.5).contains(&q) {
            Ok(Self(q))
        } else {
            Err(Error::domain("error rate", q))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Eavesdropper information per sifted bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoReport {
    pub protocol: ProtocolKind,
    /// Alice-Eve mutual information.
    pub i_ae: f64,
    /// Eve-Bob mutual information.
    pub i_eb: f64,
    /// Sifted bits per pulse at the overlap the report was computed for.
    /// The 4-state information does not depend on intensity and carries none.
    pub transmission_rate: Option<f64>,
}

/// 4-state sifted rate `(1 - exp(-mu)) / 2`; half of the non-empty pulses
/// are measured in the wrong basis.
pub fn rate_4(mu: MeanPhotonNumber) -> f64 {
    -0.5 * (-mu.value()).exp_m1()
}

/// Intercept/resend in the two conjugate bases on the 4-state protocol:
/// `I_AE = I_EB = 2 Q`.
pub fn info_4(q: QberValue) -> Result<InfoReport> {
    let q = q.value();
    if q > 0.25 + FEASIBILITY_SLACK {
        return Err(Error::Infeasible { qber: q, eta: 4.0 * q });
    }
    Ok(InfoReport {
        protocol: ProtocolKind::FourState,
        i_ae: 2.0 * q,
        i_eb: 2.0 * q,
        transmission_rate: None,
    })
}

/// Probability that the interferometric receiver gives no click for a
/// correctly phased signal: `exp(-2 mu)`, the overlap of the two states.
pub fn inconclusive_prob(mu: MeanPhotonNumber) -> f64 {
    (-2.0 * mu.value()).exp()
}

/// 2-state rate `1 - exp(-2 mu) = 1 - cos delta`.
pub fn rate_2(mu: MeanPhotonNumber) -> f64 {
    -(-2.0 * mu.value()).exp_m1()
}

/// Error rate `eta (1 - sin delta) / 2` created by symmetric-basis
/// interception of a fraction `eta` of the pulses.
pub fn qber_2(eta: EavesdropFraction, delta: OverlapAngle) -> QberValue {
    QberValue((eta.value() * 0.5 * (1.0 - delta.sin_delta())).clamp(0.0, 0.5))
}

/// 2-state information at error rate `Q`:
/// `I_AE = 2Q/(1 - sin delta) * i_AE(delta)`, `I_EB = 2Q/(1 - sin delta)`.
pub fn info_2(q: QberValue, delta: OverlapAngle) -> Result<InfoReport> {
    let eta = implied_eta(q.value(), 0.5 * (1.0 - delta.sin_delta()))?;
    Ok(InfoReport {
        protocol: ProtocolKind::TwoState,
        i_ae: eta * max_extractable_info(delta),
        i_eb: eta,
        transmission_rate: Some(1.0 - delta.cos_delta()),
    })
}

/// 4+2 rate `(1 - exp(-2 mu)) / 2`, half the 2-state rate.
pub fn rate_42(mu: MeanPhotonNumber) -> f64 {
    0.5 * rate_2(mu)
}

/// 4+2 error rate `(eta/2)(1 - sin delta / 2)`: half the attacks use the
/// wrong basis (error 1/2), half reduce to the 2-state case.
pub fn qber_42(eta: EavesdropFraction, delta: OverlapAngle) -> QberValue {
    QberValue((0.5 * eta.value() * (1.0 - 0.5 * delta.sin_delta())).clamp(0.0, 0.5))
}

/// 4+2 information at error rate `Q`:
/// `I_AE = Q/(1 - sin delta/2) * i_AE(delta)`, `I_EB = Q/(1 - sin delta/2)`.
pub fn info_42(q: QberValue, delta: OverlapAngle) -> Result<InfoReport> {
    let eta = implied_eta(q.value(), 0.5 * (1.0 - 0.5 * delta.sin_delta()))?;
    Ok(InfoReport {
        protocol: ProtocolKind::FourPlusTwo,
        i_ae: 0.5 * eta * max_extractable_info(delta),
        i_eb: 0.5 * eta,
        transmission_rate: Some(0.5 * (1.0 - delta.cos_delta())),
    })
}

/// Fraction of attacked pulses needed to produce error rate `q` when a full
/// attack produces `q_full`.
fn implied_eta(q: f64, q_full: f64) -> Result<f64> {
    if q == 0.0 {
        return Ok(0.0);
    }
    if q_full <= 0.0 {
        return Err(Error::Infeasible {
            qber: q,
            eta: f64::INFINITY,
        });
    }
    let eta = q / q_full;
    if eta > 1.0 + FEASIBILITY_SLACK {
        return Err(Error::Infeasible { qber: q, eta });
    }
    Ok(eta.min(1.0))
}

/// One point of the normalized comparison: eavesdropper information of the
/// 2-state and 4+2 protocols relative to the 4-state protocol at the same
/// error rate, as a function of the sifted rate `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoCurvePoint {
    pub t: f64,
    pub norm_i_ae: f64,
    pub norm_i_eb: f64,
}

/// Per-protocol curve values at one grid rate. A protocol whose rate cannot
/// reach `t` yields `None` for that point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig3Row {
    pub t: f64,
    pub two_state: Option<InfoCurvePoint>,
    pub four_plus_two: Option<InfoCurvePoint>,
}

/// Overlap angle at which a protocol reaches sifted rate `t`, by inverting
/// the rate formula. `None` outside `(0, sup rate)`.
pub fn delta_for_rate(protocol: ProtocolKind, t: f64) -> Option<OverlapAngle> {
    let cos_delta = match protocol {
        ProtocolKind::TwoState => 1.0 - t,
        ProtocolKind::FourPlusTwo => 1.0 - 2.0 * t,
        ProtocolKind::FourState => return None,
    };
    if !(t > 0.0 && cos_delta > 0.0 && cos_delta < 1.0) {
        return None;
    }
    OverlapAngle::from_cos(cos_delta).ok()
}

/// Intensity at which a protocol reaches sifted rate `t`.
pub fn mu_for_rate(protocol: ProtocolKind, t: f64) -> Option<MeanPhotonNumber> {
    let mu = match protocol {
        ProtocolKind::FourState => -(-2.0 * t).ln_1p(),
        ProtocolKind::TwoState => -0.5 * (-t).ln_1p(),
        ProtocolKind::FourPlusTwo => -0.5 * (-2.0 * t).ln_1p(),
    };
    (t > 0.0 && mu.is_finite()).then(|| MeanPhotonNumber::new(mu).ok()).flatten()
}

fn curve_point(protocol: ProtocolKind, t: f64) -> Option<InfoCurvePoint> {
    let delta = delta_for_rate(protocol, t)?;
    let info = max_extractable_info(delta);
    let denom = match protocol {
        ProtocolKind::TwoState => 1.0 - delta.sin_delta(),
        ProtocolKind::FourPlusTwo => 2.0 - delta.sin_delta(),
        ProtocolKind::FourState => return None,
    };
    (denom > 0.0).then(|| InfoCurvePoint {
        t,
        norm_i_ae: info / denom,
        norm_i_eb: 1.0 / denom,
    })
}

/// Normalized information curves on a grid of sifted rates.
pub fn fig3_curves(t_grid: &[f64]) -> Vec<Fig3Row> {
    t_grid
        .iter()
        .map(|&t| Fig3Row {
            t,
            two_state: curve_point(ProtocolKind::TwoState, t),
            four_plus_two: curve_point(ProtocolKind::FourPlusTwo, t),
        })
        .collect()
}

/// Default comparison grid: 50 log-spaced rates in `[1e-4, 0.4]`.
pub fn default_fig3_grid() -> Vec<f64> {
    log_grid(1e-4, 0.4, 50)
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnsLeakage {
    pub p_multi: f64,
    /// Non-empty pulses per sent pulse Bob expects from the lossy line, to
    /// first order in the intensity.
    pub bob_receive_rate: f64,
    pub eve_known_fraction: f64,
    pub induced_qber: f64,
}

/// Photon-number splitting on a polarization system: Eve keeps one photon
/// of every multiphoton pulse and delivers the expected count through a
/// lossless line, so she knows `min(1, P(n >= 2) / rate)` of Bob's bits
/// without creating errors.
pub fn pns_leakage(dist: &PhotonDistribution, loss_fraction: f64) -> Result<PnsLeakage> {
    if !(0.0..1.0).contains(&loss_fraction) {
        return Err(Error::domain("loss fraction", loss_fraction));
    }
    let p_multi = multiphoton_fraction(dist).p_multi;
    let bob_receive_rate = (1.0 - loss_fraction) * dist.p_nonzero();
    if bob_receive_rate <= 0.0 {
        return Err(Error::Undefined("no pulses reach the receiver"));
    }
    Ok(PnsLeakage {
        p_multi,
        bob_receive_rate,
        eve_known_fraction: (p_multi / bob_receive_rate).min(1.0),
        induced_qber: 0.0,
    })
}

/// Beam-splitting bound for phase-encoded systems: Eve keeps the fraction
/// of each pulse the line would have lost and measures it after the bases
/// are disclosed; per-bit information `i_AE(delta(mu * loss))`.
pub fn beamsplit_leakage(mu: MeanPhotonNumber, loss_fraction: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&loss_fraction) {
        return Err(Error::domain("loss fraction", loss_fraction));
    }
    let retained = MeanPhotonNumber::new(mu.value() * loss_fraction)?;
    Ok(max_extractable_info(overlap_angle(retained)))
}
