//! Reading inputs and writing outputs atomically.

use std::fs;
use std::io::Write;
use std::path::Path;

use mvca::netcore::{network_from_json, network_to_json, Network};
use serde_json::Value;

use crate::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::precondition(format!("cannot read {}: {e}", path.display())))
}

/// Writes `content` to `path` through a temporary sibling and a rename,
/// or to standard output when no path is given.
pub fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(content.as_bytes())
            .map_err(|e| CliError::precondition(format!("cannot write output: {e}")));
    };
    let name = path
        .file_name()
        .ok_or_else(|| CliError::precondition(format!("bad output path {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let fail = |e: std::io::Error| CliError::precondition(format!("cannot write {}: {e}", path.display()));
    fs::write(&tmp, content).map_err(fail)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        fail(e)
    })
}

/// A network file: the network plus the optional variable labels and state
/// count it was compiled for.
pub struct NetworkFile {
    pub network: Network,
    pub variables: Option<Vec<i64>>,
    pub k: Option<u32>,
}

pub fn network_file_text(net: &Network, variables: &[i64], k: Option<u32>) -> String {
    let mut doc: Value = serde_json::from_str(&network_to_json(net)).expect("own JSON parses");
    let obj = doc.as_object_mut().expect("network JSON is an object");
    obj.insert("variables".into(), Value::from(variables.to_vec()));
    if let Some(k) = k {
        obj.insert("k".into(), Value::from(k));
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    text.push('\n');
    text
}

pub fn read_network_file(text: &str) -> Result<NetworkFile, CliError> {
    let network = network_from_json(text).map_err(|e| CliError::precondition(format!("network file: {e}")))?;
    let doc: Value = serde_json::from_str(text).expect("already parsed once");
    let variables = match doc.get("variables") {
        None => None,
        Some(v) => Some(
            v.as_array()
                .and_then(|a| a.iter().map(Value::as_i64).collect::<Option<Vec<_>>>())
                .filter(|labels| labels.len() == network.input_dim)
                .ok_or_else(|| CliError::precondition("network file: bad \"variables\" list"))?,
        ),
    };
    let k = match doc.get("k") {
        None => None,
        Some(v) => Some(
            v.as_u64()
                .and_then(|k| u32::try_from(k).ok())
                .filter(|&k| k >= 2)
                .ok_or_else(|| CliError::precondition("network file: bad \"k\""))?,
        ),
    };
    Ok(NetworkFile {
        network,
        variables,
        k,
    })
}

/// True when the first line is a `# <kind>` header.
pub fn has_header(text: &str, kind: &str) -> bool {
    text.lines()
        .next()
        .and_then(|l| l.trim().strip_prefix('#'))
        .map(|rest| rest.split_whitespace().next() == Some(kind))
        .unwrap_or(false)
}
