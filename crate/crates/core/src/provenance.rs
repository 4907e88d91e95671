use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Version string embedded in every output file.
pub const ARTIFACT_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Where an output file came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    /// SHA-256 of the compact JSON encoding of the effective configuration.
    pub config_hash: String,
    pub master_seed: u64,
}

impl Provenance {
    pub fn for_config<C: Serialize>(config: &C, master_seed: u64) -> crate::Result<Self> {
        let bytes = serde_json::to_vec(config)?;
        Ok(Provenance {
            version: ARTIFACT_VERSION.to_string(),
            config_hash: hex::encode(Sha256::digest(&bytes)),
            master_seed,
        })
    }

    /// `# key=value` comment lines placed ahead of CSV output.
    pub fn csv_comment(&self) -> String {
        format!(
            "# version={}\n# config_hash={}\n# master_seed={}\n",
            self.version, self.config_hash, self.master_seed
        )
    }
}
