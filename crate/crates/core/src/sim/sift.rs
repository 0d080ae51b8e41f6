use super::detect::DetectionOutcome;
use super::pulse::{AliceChoice, Basis};
use crate::adversary::EveRecord;
use crate::analytics::ProtocolKind;
use crate::{Error, Result};

/// What Alice and Bob know about one pulse before the public discussion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiftRecord {
    pub index: u64,
    pub alice: AliceChoice,
    pub bob_basis: Basis,
    pub outcome: DetectionOutcome,
}

/// Paired bit strings surviving the public discussion.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SiftedKey {
    pub indices: Vec<u64>,
    /// Basis disclosed for each kept position.
    pub bases: Vec<Basis>,
    pub alice: Vec<u8>,
    pub bob: Vec<u8>,
    /// Eve's ledger entries aligned with the key, when a ledger was attached.
    pub eve: Option<Vec<EveRecord>>,
}

impl SiftedKey {
    pub fn len(&self) -> usize {
        self.alice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alice.is_empty()
    }
}

/// Discards inconclusive results and, for the basis-using protocols,
/// mismatched-basis results. Order is preserved. `ledger` must be sorted by
/// pulse index; pulses missing from it get no Eve entry.
pub fn sift(
    protocol: ProtocolKind,
    records: &[SiftRecord],
    ledger: Option<&[EveRecord]>,
) -> SiftedKey {
    let mut key = SiftedKey {
        eve: ledger.map(|_| Vec::new()),
        ..SiftedKey::default()
    };
    for rec in records {
        let Some(bob_bit) = rec.outcome.result.bit() else {
            continue;
        };
        if protocol.uses_bases() && rec.alice.basis != rec.bob_basis {
            continue;
        }
        key.indices.push(rec.index);
        key.bases.push(rec.alice.basis);
        key.alice.push(rec.alice.bit);
        key.bob.push(bob_bit);
        if let (Some(ledger), Some(eve)) = (ledger, key.eve.as_mut()) {
            let entry = ledger
                .binary_search_by_key(&rec.index, |r| r.pulse_index)
                .map(|i| ledger[i])
                .unwrap_or_else(|_| EveRecord::untouched(rec.index));
            eve.push(entry);
        }
    }
    key
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QberEstimate {
    pub errors: u64,
    pub length: u64,
    pub value: f64,
    /// Intercept/resend models never exceed 1/2; a larger value points at
    /// a labelling fault rather than eavesdropping.
    pub in_model_range: bool,
}

impl QberEstimate {
    /// Binomial standard deviation of the estimate if the true rate is `q`.
    pub fn sigma_at(&self, q: f64) -> f64 {
        (q * (1.0 - q) / self.length as f64).sqrt()
    }

    /// `(value - q) / sigma`, zero for an exact match even when `sigma` is.
    pub fn z_score(&self, q: f64) -> f64 {
        z_score(self.value - q, self.sigma_at(q))
    }
}

pub(crate) fn z_score(diff: f64, sigma: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else if sigma > 0.0 {
        diff / sigma
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Fraction of key positions where Alice and Bob disagree.
pub fn empirical_qber(key: &SiftedKey) -> Result<QberEstimate> {
    if key.is_empty() {
        return Err(Error::Undefined("error rate of an empty key"));
    }
    let errors = key.alice.iter().zip(&key.bob).filter(|(a, b)| a != b).count() as u64;
    let length = key.len() as u64;
    let value = errors as f64 / length as f64;
    Ok(QberEstimate {
        errors,
        length,
        value,
        in_model_range: value <= 0.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::detect::DetectionResult;

    fn outcome(result: DetectionResult) -> DetectionOutcome {
        DetectionOutcome {
            result,
            d2: result == DetectionResult::Bit0,
            d3: result == DetectionResult::Bit1,
            double_click: false,
            triggered: true,
        }
    }

    fn rec(index: u64, bit: u8, basis: Basis, bob: Basis, result: DetectionResult) -> SiftRecord {
        SiftRecord {
            index,
            alice: AliceChoice { bit, basis },
            bob_basis: bob,
            outcome: outcome(result),
        }
    }

    #[test]
    fn all_inconclusive_gives_empty_key() {
        let recs: Vec<_> = (0..10)
            .map(|i| rec(i, 0, Basis::B0, Basis::B0, DetectionResult::Inconclusive))
            .collect();
        let k = sift(ProtocolKind::TwoState, &recs, None);
        assert!(k.is_empty());
        assert!(empirical_qber(&k).is_err());
    }

    #[test]
    fn mismatched_bases_are_dropped() {
        let recs = vec![
            rec(0, 0, Basis::B0, Basis::B1, DetectionResult::Bit0),
            rec(1, 1, Basis::B1, Basis::B1, DetectionResult::Bit1),
            rec(2, 1, Basis::B1, Basis::B0, DetectionResult::Bit0),
            rec(3, 0, Basis::B0, Basis::B0, DetectionResult::Bit1),
        ];
        let k = sift(ProtocolKind::FourPlusTwo, &recs, None);
        assert_eq!(k.indices, vec![1, 3]);
        assert_eq!(k.alice, vec![1, 0]);
        assert_eq!(k.bob, vec![1, 1]);
        assert_eq!(k.bases, vec![Basis::B1, Basis::B0]);
        let q = empirical_qber(&k).unwrap();
        assert_eq!((q.errors, q.length, q.value), (1, 2, 0.5));
    }

    #[test]
    fn two_state_keeps_every_conclusive() {
        let recs = vec![
            rec(0, 0, Basis::B0, Basis::B0, DetectionResult::Bit0),
            rec(1, 1, Basis::B0, Basis::B0, DetectionResult::Inconclusive),
            rec(2, 1, Basis::B0, Basis::B0, DetectionResult::Bit1),
        ];
        assert_eq!(sift(ProtocolKind::TwoState, &recs, None).indices, vec![0, 2]);
    }

    #[test]
    fn qber_extremes() {
        let same = SiftedKey {
            alice: vec![0, 1, 1],
            bob: vec![0, 1, 1],
            ..Default::default()
        };
        let q = empirical_qber(&same).unwrap();
        assert_eq!(q.value, 0.0);
        assert_eq!(q.z_score(0.0), 0.0);
        let flipped = SiftedKey {
            alice: vec![0, 1, 1],
            bob: vec![1, 0, 0],
            ..Default::default()
        };
        let q = empirical_qber(&flipped).unwrap();
        assert_eq!(q.value, 1.0);
        assert!(!q.in_model_range);
    }

    #[test]
    fn ledger_is_aligned_with_key() {
        let recs = vec![
            rec(0, 0, Basis::B0, Basis::B0, DetectionResult::Bit0),
            rec(1, 1, Basis::B0, Basis::B0, DetectionResult::Inconclusive),
            rec(2, 1, Basis::B0, Basis::B0, DetectionResult::Bit1),
        ];
        let mut ledger: Vec<_> = (0..3).map(EveRecord::untouched).collect();
        ledger[2].attacked = true;
        ledger[2].guess = Some(1);
        let k = sift(ProtocolKind::TwoState, &recs, Some(&ledger));
        let eve = k.eve.unwrap();
        assert_eq!(eve.len(), 2);
        assert_eq!(eve[1].pulse_index, 2);
        assert_eq!(eve[1].guess, Some(1));
        assert!(!eve[0].attacked);
    }
}
