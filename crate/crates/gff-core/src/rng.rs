//! Seeded randomness for every sampler in the crate.
//!
//! All random output flows from one 64-bit seed through ChaCha8 streams:
//!
//! * the base generator is `ChaCha8Rng::seed_from_u64(seed)` (the seed is
//!   expanded to the 256-bit key with SplitMix64, as documented by `rand`);
//! * independent substreams use ChaCha's 64-bit stream counter, so a
//!   `(seed, domain, replica)` triple always maps to the same byte stream,
//!   on every platform;
//! * Gaussian variates come from `rand_distr::StandardNormal` (ziggurat),
//!   exponential holding times from `rand_distr::Exp`.
//!
//! Samplers draw variates in a documented, fixed order (vertex-id order for
//! fields, mode order for spectral coefficients), which makes every sample a
//! pure function of its inputs and seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags keep unrelated consumers of the same seed on disjoint streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamDomain {
    /// Direct (factorization) field sampler; also the massive variant.
    Direct = 1,
    /// FFT torus sampler.
    Fft = 2,
    /// Continuum eigenbasis coefficients.
    Eigenbasis = 3,
    /// Ornstein-Uhlenbeck transition noise.
    Ou = 4,
    /// Random-walk occupation-time replicas.
    Walk = 5,
    /// Test and verification harnesses.
    Harness = 6,
}

/// One stream per `(seed, domain, replica)`; replicas index parallel walkers
/// or repeated draws and must stay below 2^56.
pub fn stream_rng(seed: u64, domain: StreamDomain, replica: u64) -> ChaCha8Rng {
    debug_assert!(replica < (1 << 56));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 56) | replica);
    rng
}
