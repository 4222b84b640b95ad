//! `--config` files: a JSON object naming the subcommand plus the same keys as
//! the command-line flags. Arrays repeat a flag, so
//!
//! ```json
//! {"command": "single", "dist": ["poisson:lambda=4", "uniform:N=8"], "spectators": "1..32"}
//! ```
//!
//! is equivalent to `single --dist poisson:lambda=4 --dist uniform:N=8 --spectators 1..32`.

use std::ffi::OsString;
use std::fs;

use serde_json::Value;

use crate::error::CliError;

/// Replaces `--config <path>` in `args` by the arguments the file describes.
/// Flags given on the command line are kept and come after the file's.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut iter = args.into_iter();
    let mut out: Vec<OsString> = iter.next().into_iter().collect();
    let mut rest = Vec::new();
    let mut path = None;
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            let p = iter
                .next()
                .ok_or_else(|| CliError::parse("--config needs a file path"))?;
            path = Some(p);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(OsString::from(p));
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else {
        out.extend(rest);
        return Ok(out);
    };

    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.to_string_lossy())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        message: format!("{}: {e}", path.to_string_lossy()),
        position: None,
    })?;
    out.extend(to_args(&value)?.into_iter().map(OsString::from));
    out.extend(rest);
    Ok(out)
}

fn to_args(value: &Value) -> Result<Vec<String>, CliError> {
    let Value::Object(map) = value else {
        return Err(CliError::parse("config must be a JSON object"));
    };
    let command = map
        .get("command")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::parse("config needs a string `command`"))?;
    let mut args = vec![command.to_owned()];
    for (key, v) in map.iter().filter(|(k, _)| k.as_str() != "command") {
        let flag = format!("--{}", key.replace('_', "-"));
        let items = match v {
            Value::Array(items) => items.as_slice(),
            other => std::slice::from_ref(other),
        };
        for item in items {
            match item {
                Value::String(s) => args.extend([flag.clone(), s.clone()]),
                Value::Number(n) => args.extend([flag.clone(), n.to_string()]),
                Value::Bool(true) => args.push(flag.clone()),
                Value::Bool(false) | Value::Null => {}
                _ => {
                    return Err(CliError::parse(format!(
                        "config key `{key}` must be a scalar or an array of scalars"
                    )))
                }
            }
        }
    }
    Ok(args)
}
