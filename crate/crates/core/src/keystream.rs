//! xorshift64* keystream for the random-modulation codec.
//!
//! The generator is pinned to the published xorshift64* constants so that a
//! keystream derived from a shared seed is bit-exact everywhere.

/// xorshift64* with the standard shift triple (12, 25, 27) and the
/// 0x2545F4914F6CDD1D output multiplier.
#[derive(Debug, Clone)]
pub struct XorShift64Star {
    state: u64,
}

/// State substituted for the forbidden all-zero seed.
const ZERO_SEED_SUBSTITUTE: u64 = 0x9E37_79B9_7F4A_7C15;

impl XorShift64Star {
    pub fn new(seed: u64) -> Self {
        Self {
            state: if seed == 0 { ZERO_SEED_SUBSTITUTE } else { seed },
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }
}

/// Bit-level view over the generator: bits of each output word, MSB first.
#[derive(Debug, Clone)]
pub struct KeystreamBits {
    rng: XorShift64Star,
    word: u64,
    remaining: u8,
}

impl KeystreamBits {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: XorShift64Star::new(seed),
            word: 0,
            remaining: 0,
        }
    }

    pub fn next_bit(&mut self) -> bool {
        if self.remaining == 0 {
            self.word = self.rng.next_u64();
            self.remaining = 64;
        }
        self.remaining -= 1;
        (self.word >> self.remaining) & 1 == 1
    }
}
