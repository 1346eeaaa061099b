//! Per-job seed derivation. Every sweep point × trial gets an independent
//! seed computed as a pure function of (master seed, subcommand name,
//! config tuple, trial index), so results do not depend on scheduling,
//! worker count, or job order.

use gdfactor_core::mix64;

/// One folding step: absorb a word into the running seed through the
/// 64-bit finalizer.
pub fn fold(seed: u64, word: u64) -> u64 {
    mix64(seed ^ mix64(word))
}

/// Hashes an ASCII name (e.g. a subcommand) into a domain-separation word.
pub fn tag(name: &str) -> u64 {
    let bytes = name.as_bytes();
    let mut acc = bytes.len() as u64;
    for chunk in bytes.chunks(8) {
        let mut word = [0u8; 8];
        word[..chunk.len()].copy_from_slice(chunk);
        acc = fold(acc, u64::from_le_bytes(word));
    }
    acc
}

/// Deterministic seed for one job: master seed, subcommand name, the
/// config point's numeric values (floats absorbed via their IEEE bits),
/// and the trial index.
pub fn job_seed(master: u64, subcommand: &str, values: &[f64], trial: u64) -> u64 {
    let mut acc = fold(master, tag(subcommand));
    for &v in values {
        acc = fold(acc, v.to_bits());
    }
    fold(acc, trial)
}
