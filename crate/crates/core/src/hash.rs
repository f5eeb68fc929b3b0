//! Stable 64-bit FNV-1a hashing.
//!
//! Prompt texts and output artifacts are keyed by this hash. It is fixed by
//! specification of the algorithm, so fixture files and manifests written on
//! one machine resolve identically on another (unlike `std`'s randomized
//! hasher).

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over raw bytes.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Hash rendered as the fixed-width hex form used in fixture files and
/// manifests.
pub fn fnv1a64_hex(bytes: &[u8]) -> String {
    format!("{:016x}", fnv1a64(bytes))
}
