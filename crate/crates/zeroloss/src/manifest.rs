//! Run manifests: everything needed to reproduce a run.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: Value,
    pub master_seed: Option<u64>,
    pub tool_version: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

pub fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis())
}

impl RunManifest {
    pub fn start(subcommand: &str, params: &impl Serialize, master_seed: Option<u64>) -> Self {
        RunManifest {
            subcommand: subcommand.to_owned(),
            params: serde_json::to_value(params).expect("flag sets always serialize"),
            master_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            started_unix_ms: now_ms(),
            finished_unix_ms: 0,
        }
    }

    pub fn finish(mut self) -> Self {
        self.finished_unix_ms = now_ms();
        self
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("manifests always serialize")
    }
}
