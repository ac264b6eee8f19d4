//! Parameter resolution: built-in defaults, then a flat `key = value` file,
//! then `FBZONE_<KEY>` environment variables, then command-line flags.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::CliError;

pub const ENV_PREFIX: &str = "FBZONE_";

/// One scalar or range parameter of a subcommand. An empty default means
/// "unset".
#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

const fn key(name: &'static str, default: &'static str, help: &'static str) -> Key {
    Key { name, default, help }
}

const THETA: Key = key("theta", "0.25", "Allee threshold θ of the cubic pair");
const MU: Key = key("mu", "1", "Stefan coefficient μ");
const DX: Key = key("dx", "0.02", "target grid spacing");
const DT: Key = key("dt", "", "time step (default dx/4)");
const L: Key = key("L", "1", "zone length (connected zone [0, L])");
const L1: Key = key("L1", "", "left end of a separated zone");
const L2: Key = key("L2", "", "right end of a separated zone");
const THREADS: Key = key("threads", "0", "worker threads (0 = logical cores)");

pub fn keys(command: &str) -> &'static [Key] {
    match command {
        "criticals" => {
            const K: &[Key] = &[
                THETA,
                L,
                key("L1", "", "also report the separated zone [L1, L1 + L]"),
                key("Lgrid", "0.5:1.5:11", "zone lengths for the R*(L) table"),
                key("scan", "2048", "a-scan size for L★"),
                key("format", "text", "stdout format: text or json"),
            ];
            K
        }
        "groundstate" => {
            const K: &[Key] = &[
                THETA,
                key("L", "", "zone length whose ground states to construct"),
                key("scan", "512", "a-scan size for L(a)"),
                key("dx", "0.001", "sampling step of V"),
            ];
            K
        }
        "bump" => {
            const K: &[Key] = &[THETA, key("alpha", "0.9", "bump maximum α ∈ (θ*, 1)")];
            K
        }
        "semiwave" => {
            const K: &[Key] = &[THETA, MU];
            K
        }
        "simulate" => {
            const K: &[Key] = &[
                THETA,
                MU,
                L,
                L1,
                L2,
                key("sigma", "1", "initial amplitude σ"),
                key("h0", "", "initial front (default L2 + 1)"),
                DX,
                DT,
                key("tmax", "50", "final time"),
                key("snapshot_every", "10", "time units between snapshot files"),
                key("profile", "cosine", "initial shape: σ cos(πx / 2h0)"),
            ];
            K
        }
        "thresholds" => {
            const K: &[Key] = &[
                THETA,
                MU,
                L,
                L1,
                L2,
                key("h0", "", "initial front (default L2 + 1)"),
                DX,
                DT,
                key("tmax", "200", "horizon per probe"),
                key("bisect_tol", "0.001", "relative bracket width"),
                key("max_probes", "60", "probe budget"),
                key("sigma_start", "1", "first probe"),
                key("sigma_min", "0.001", "smallest probe"),
                key("sigma_max", "1000", "largest probe"),
                THREADS,
            ];
            K
        }
        "phasediagram" => {
            const K: &[Key] = &[
                THETA,
                MU,
                key("kind", "connected", "zone layout: connected or separated"),
                key("L", "0.2:2.0:10", "zone lengths, start:stop:count"),
                key("sigma", "0.05:5:12:log", "amplitudes, start:stop:count[:log]"),
                key("L1", "1", "left end of separated zones"),
                key("h0_offset", "0.5", "h0 = L2 + h0_offset"),
                DX,
                DT,
                key("tmax", "200", "horizon per cell"),
                THREADS,
            ];
            K
        }
        _ => &[],
    }
}

pub const COMMANDS: [(&str, &str); 7] = [
    ("criticals", "critical lengths, radii and principal eigenvalues"),
    ("groundstate", "ground state V, the L(a) scan and connected-zone ground states"),
    ("bump", "symmetric bump solution and its half-width"),
    ("semiwave", "bistable speed c₀ and the semi-wave (c*, q)"),
    ("simulate", "one free-boundary simulation"),
    ("thresholds", "bracket and bisect the sharp σ thresholds"),
    ("phasediagram", "outcome matrix over an (L, σ) grid"),
];

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub command: String,
    pub values: BTreeMap<String, String>,
}

/// Parses a flat `key = value` file; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl Params {
    pub fn resolve(
        command: &str,
        config: Option<&Path>,
        env: impl IntoIterator<Item = (String, String)>,
        flags: BTreeMap<String, String>,
    ) -> Result<Self, CliError> {
        let keys = keys(command);
        let mut values: BTreeMap<String, String> =
            keys.iter().map(|k| (k.name.to_string(), k.default.to_string())).collect();
        let known = |k: &str| keys.iter().any(|key| key.name == k);
        if let Some(path) = config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            for (k, v) in parse_config(&text)? {
                if !known(&k) {
                    return Err(CliError::Usage(format!("unknown key '{k}' in config for {command}")));
                }
                values.insert(k, v);
            }
        }
        let env: BTreeMap<String, String> = env.into_iter().collect();
        for k in keys {
            if let Some(v) = env.get(&format!("{ENV_PREFIX}{}", k.name.to_uppercase())) {
                values.insert(k.name.to_string(), v.clone());
            }
        }
        for (k, v) in flags {
            if !known(&k) {
                return Err(CliError::Usage(format!("unknown parameter '{k}' for {command}")));
            }
            values.insert(k, v);
        }
        Ok(Self { command: command.to_string(), values })
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        self.opt_f64(key)?.ok_or_else(|| CliError::Usage(format!("parameter {key} is required")))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        let raw = self.raw(key);
        if raw.is_empty() {
            return Ok(None);
        }
        raw.parse().map(Some).map_err(|_| CliError::Usage(format!("parameter {key}: '{raw}' is not a number")))
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        let raw = self.raw(key);
        raw.parse().map_err(|_| CliError::Usage(format!("parameter {key}: '{raw}' is not a count")))
    }

    pub fn range(&self, key: &str) -> Result<Vec<f64>, CliError> {
        parse_range(self.raw(key)).map_err(|e| CliError::Usage(format!("parameter {key}: {e}")))
    }
}

/// `x`, `a,b,c`, `start:stop:count` or `start:stop:count:log`.
pub fn parse_range(s: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let (log, parts) = match parts.as_slice() {
            [a, b, n] => (false, [*a, *b, *n]),
            [a, b, n, "log"] => (true, [*a, *b, *n]),
            _ => return Err(format!("'{s}' is not start:stop:count[:log]")),
        };
        let (a, b) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| format!("'{}' is not a count", parts[2]))?;
        if n == 0 {
            return Err("count must be at least 1".into());
        }
        if log && !(a > 0.0 && b > 0.0) {
            return Err("log ranges need positive ends".into());
        }
        if n == 1 {
            return Ok(vec![a]);
        }
        let frac = |i: usize| i as f64 / (n - 1) as f64;
        Ok((0..n)
            .map(|i| match (log, i) {
                (_, 0) => a,
                (_, i) if i == n - 1 => b,
                (true, i) => a * (b / a).powf(frac(i)),
                (false, i) => a + (b - a) * frac(i),
            })
            .collect())
    } else {
        s.split(',').map(num).collect()
    }
}
