//! Deterministic seed derivation.
//!
//! Every randomized routine takes a single master seed. Child streams
//! (per sweep row, per Monte Carlo chunk, per path) get their own seed
//! derived from the master seed, a domain label, and an index. The
//! derivation is a fixed, platform-independent mixing chain, so the
//! same (seed, label, index) triple names the same stream everywhere:
//!
//! ```text
//! child = mix(mix(mix(master) ^ fnv1a(label)) ^ index)
//! ```
//!
//! where `mix` is the SplitMix64 finalizer and `fnv1a` the 64-bit
//! FNV-1a hash of the label bytes.

/// SplitMix64 finalizer. Bijective on u64, published constants.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a over a byte string.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Child seed for stream `index` of domain `label` under `master`.
pub fn derive(master: u64, label: &str, index: u64) -> u64 {
    mix64(mix64(mix64(master) ^ fnv1a64(label.as_bytes())) ^ index)
}
