use sha2::{Digest, Sha256};

/// Per-sample seed from `(global, prompt_id, index)`. Each triple hashes
/// independently, so adding prompts or samples leaves existing seeds alone.
pub fn derive_seed(global: u64, prompt_id: &str, index: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(b"divergauge-sample-seed\0");
    h.update(global.to_le_bytes());
    h.update((prompt_id.len() as u64).to_le_bytes());
    h.update(prompt_id.as_bytes());
    h.update((index as u64).to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
