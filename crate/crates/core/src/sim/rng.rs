use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type PulseRng = ChaCha8Rng;

const PULSE_DOMAIN: u64 = 0x5155_4C53_4550_0001;
const DECODE_DOMAIN: u64 = 0x5155_4C53_4550_0002;

/// Derives independent random streams from one master seed.
///
/// Every pulse gets its own ChaCha stream selected by its index, so the
/// outcome of pulse `i` does not depend on how pulses are scheduled across
/// workers.
#[derive(Debug, Clone)]
pub struct StreamSeed {
    seed: u64,
    pulse_key: [u8; 32],
    decode_key: [u8; 32],
}

impl StreamSeed {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            pulse_key: ChaCha8Rng::seed_from_u64(seed ^ PULSE_DOMAIN).get_seed(),
            decode_key: ChaCha8Rng::seed_from_u64(seed ^ DECODE_DOMAIN).get_seed(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream for everything that happens to pulse `index` on the line.
    pub fn pulse(&self, index: u64) -> PulseRng {
        let mut rng = ChaCha8Rng::from_seed(self.pulse_key);
        rng.set_stream(index);
        rng
    }

    /// Stream for the eavesdropper's measurements after basis disclosure.
    pub fn decode(&self, index: u64) -> PulseRng {
        let mut rng = ChaCha8Rng::from_seed(self.decode_key);
        rng.set_stream(index);
        rng
    }
}
