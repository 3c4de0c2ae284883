//! Versioned binary snapshots of a running simulation.
//!
//! Layout: 8-byte magic, little-endian `u32` version, little-endian `u64`
//! payload length, SHA-256 of the payload, then the JSON payload.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::{Simulation, TrialConfig};

pub const MAGIC: &[u8; 8] = b"HTPSNAP\0";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 + 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    /// SHA-256 of the JSON-encoded trial configuration, hex.
    pub config_hash: String,
    pub seed: u64,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub meta: SnapshotMeta,
    pub state: Simulation,
}

pub fn config_hash(cfg: &TrialConfig) -> Result<String> {
    let json = serde_json::to_vec(cfg)?;
    Ok(hex(&Sha256::digest(&json)))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn encode(sim: &Simulation) -> Result<Vec<u8>> {
    let snap = Snapshot {
        meta: SnapshotMeta {
            config_hash: config_hash(&sim.config)?,
            seed: sim.config.seed,
            time: sim.time(),
        },
        state: sim.clone(),
    };
    let payload = serde_json::to_vec(&snap)?;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&Sha256::digest(&payload));
    out.extend_from_slice(&payload);
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<Snapshot> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::CorruptSnapshot(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::CorruptSnapshot("bad magic".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(Error::SnapshotVersion {
            found: version,
            expected: VERSION,
        });
    }
    let len = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes"));
    let payload = &bytes[HEADER_LEN..];
    if payload.len() as u64 != len {
        return Err(Error::CorruptSnapshot(format!(
            "payload is {} bytes, header says {len}",
            payload.len()
        )));
    }
    if Sha256::digest(payload)[..] != bytes[20..52] {
        return Err(Error::CorruptSnapshot("checksum mismatch".into()));
    }
    let snap: Snapshot = serde_json::from_slice(payload).map_err(|e| Error::CorruptSnapshot(e.to_string()))?;
    snap.state.check_consistency()?;
    Ok(snap)
}

pub fn save(path: &Path, sim: &Simulation) -> Result<()> {
    std::fs::write(path, encode(sim)?).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Snapshot> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

/// Loads a snapshot that must fit a network of `inputs` x `outputs`.
pub fn load_for_shape(path: &Path, inputs: usize, outputs: usize) -> Result<Snapshot> {
    let snap = load(path)?;
    let found = snap.state.weights.st.shape();
    if found != (inputs, outputs) {
        return Err(Error::Shape(format!(
            "snapshot holds a {}x{} network, expected {inputs}x{outputs}",
            found.0, found.1
        )));
    }
    Ok(snap)
}
