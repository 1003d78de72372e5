/// Derives a child seed from a master seed, a role tag and an index.
///
/// Drivers that split work across stages (coreset, solve, per-user shards)
/// derive one stream per stage so that degenerate configurations (one user,
/// one block) replay exactly the same random choices as the centralized
/// pipeline. Mixing is a few rounds of splitmix64.
pub fn derive_seed(master: u64, role: u64, index: u64) -> u64 {
    let mut z = master ^ role.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ index.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    for _ in 0..3 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}

/// Role tags for [`derive_seed`].
pub(crate) mod role {
    pub const CORESET: u64 = 1;
    pub const REDUCE: u64 = 2;
    pub const SOLVE: u64 = 3;
}
