//! JSON envelope shared by every artifact.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    schema_version: u32,
    command: &'a str,
    config: &'a C,
    seed: Option<u64>,
    conventions: Value,
    result: Value,
}

/// Conventions an artifact depends on; `approximate` flags use of the
/// approximate distance distribution (n > 20).
pub fn conventions(approximate: bool) -> Value {
    json!({
        "ranks": "1-based ranks, 1 = best; missing entries are null",
        "components": "1-based component labels in classifications",
        "bic_df": "G(n+2) - 1",
        "hpd_ties": "equal frequencies: rank closer to the point estimate first, then lower rank; point-estimate rank always included",
        "quantiles": "type 7 linear interpolation",
        "approximate_distribution": approximate,
    })
}

pub fn envelope<C: Serialize>(command: &str, config: &C, seed: Option<u64>, approximate: bool, result: Value) -> Value {
    serde_json::to_value(Envelope {
        tool: "spearmix",
        version: env!("CARGO_PKG_VERSION"),
        schema_version: SCHEMA_VERSION,
        command,
        config,
        seed,
        conventions: conventions(approximate),
        result,
    })
    .expect("serializable envelope")
}

pub fn write_bytes(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn write_json(path: Option<&Path>, value: &Value) -> anyhow::Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_bytes(path, s.as_bytes())
}
