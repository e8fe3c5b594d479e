//! Deterministic PRNG with splittable streams.
//!
//! xoshiro256++ states are derived from (seed, stream index) through
//! splitmix64, so every (seed, stream) pair yields an independent,
//! bit-for-bit reproducible sequence. Parallel consumers (multi-start fits,
//! simulation draws) take distinct stream indices and a fixed seed.

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One xoshiro256++ stream.
#[derive(Debug, Clone)]
pub struct StreamRng {
    s: [u64; 4],
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        // Mix the stream index in with a distinct odd multiplier so that
        // (seed, 0) and (seed+1, 0) never collide with (seed, 1) by accident.
        let mut sm = seed ^ stream.wrapping_mul(0xA076_1D64_78BD_642F);
        let mut s = [0u64; 4];
        for slot in &mut s {
            *slot = splitmix64(&mut sm);
        }
        if s == [0, 0, 0, 0] {
            s[0] = 1; // the all-zero state is xoshiro's single fixed point
        }
        StreamRng { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[0]
            .wrapping_add(self.s[3])
            .rotate_left(23)
            .wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform draw on the open interval (0, 1): (k + 1/2) / 2^53 with k the
    /// top 53 bits, so neither endpoint is ever returned.
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }

    /// Uniform draw on [lo, hi).
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * ((self.next_u64() >> 11) as f64) * (1.0 / 9007199254740992.0)
    }

    /// Geometric draw on {1, 2, ...} with success probability p, by inversion.
    pub fn geometric(&mut self, p: f64) -> u64 {
        debug_assert!(p > 0.0 && p <= 1.0);
        if p >= 1.0 {
            return 1;
        }
        let u = self.next_open01();
        // P(N = k) = (1-p)^{k-1} p  <=>  N = ceil(ln u / ln(1-p)).
        let n = libm::ceil(libm::log(u) / libm::log1p(-p));
        if n < 1.0 {
            1
        } else {
            n as u64
        }
    }
}
