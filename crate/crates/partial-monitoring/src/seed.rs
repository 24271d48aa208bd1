//! Deterministic seed derivation.
//!
//! Every random stream in the crate is keyed by `(base_seed, domain, index)`
//! through the splitmix64 chain below, so environment outcomes and policy
//! action sampling never share a stream and sweep cells are reproducible in
//! isolation.

/// Domain tag for environment outcome streams.
pub const DOMAIN_ENV: u64 = 0x454e56; // "ENV"
/// Domain tag for policy action-sampling streams.
pub const DOMAIN_POLICY: u64 = 0x504f4c; // "POL"

/// The splitmix64 mixing step.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives the stream seed for `(base, domain, index)`.
pub fn derive_seed(base: u64, domain: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ domain) ^ index)
}
