//! Seed derivation and arrival sampling shared by the simulator and the
//! Monte Carlo feasibility checks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags keeping unrelated random draws statistically independent.
pub mod tag {
    /// Arrival times inside the Monte Carlo thermal check.
    pub const MC_ARRIVALS: u64 = 0x4d43_4152;
    /// Thinning uniforms inside the Monte Carlo thermal check.
    pub const MC_THINNING: u64 = 0x4d43_5448;
    /// Arrival times for scenario request generation.
    pub const GENERATE: u64 = 0x4745_4e52;
    /// Per-arrival local/offload coins drawn by the stochastic policy.
    pub const POLICY_COIN: u64 = 0x434f_494e;
}

/// Stable 64-bit hash (FNV-1a) for deriving per-name stream indices, so a
/// device keeps its arrival stream no matter where it sits in the list.
pub fn name_stream(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Mix a base seed, a run index and a stream tag into one 64-bit seed
/// (splitmix64 finalizer; avoids correlated ChaCha streams).
pub fn mix_seed(base: u64, index: u64, tag: u64) -> u64 {
    let mut z = base
        .wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(tag.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn rng_for(base: u64, index: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(base, index, tag))
}

/// Homogeneous Poisson arrival times on `[0, horizon]` via exponential gaps.
pub fn poisson_arrivals(rng: &mut ChaCha8Rng, rate_per_s: f64, horizon_s: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if rate_per_s <= 0.0 {
        return out;
    }
    let mut t = 0.0_f64;
    loop {
        let u: f64 = rng.gen();
        t += -(1.0 - u).ln() / rate_per_s;
        if t > horizon_s {
            break;
        }
        out.push(t);
    }
    out
}
