//! Stable seed derivation for benchmark cells.
//!
//! `stream_seed(base, dataset, method, init, em)` is
//!
//! ```text
//! h = splitmix64(base ^ fnv1a64(dataset))
//! h = splitmix64(h ^ fnv1a64(method label))
//! h = splitmix64(h ^ init_index)
//! h = splitmix64(h ^ em_tag)        em_tag = 0 for the initializer,
//!                                    em_index + 1 for EM runs
//! ```
//!
//! Both primitives are fixed-width integer arithmetic, so seeds agree
//! across platforms.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Which random stream of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Init,
    Em(u64),
}

pub fn stream_seed(base: u64, dataset_id: &str, method_label: &str, init_index: u64, stream: Stream) -> u64 {
    let tag = match stream {
        Stream::Init => 0,
        Stream::Em(i) => i + 1,
    };
    let mut h = splitmix64(base ^ fnv1a64(dataset_id.as_bytes()));
    h = splitmix64(h ^ fnv1a64(method_label.as_bytes()));
    h = splitmix64(h ^ init_index);
    splitmix64(h ^ tag)
}
