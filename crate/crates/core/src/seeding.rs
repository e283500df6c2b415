//! Deterministic seed derivation for independent sub-generators.

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds the parts into one seed; every distinct tuple gets an independent
/// stream.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut state = 0x51_7C_C1_B7_27_22_0A_95;
    for &part in parts {
        state = splitmix64(state ^ part.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    }
    state
}
