//! Run configuration: a flat dotted-key text file, with command-line
//! flags overriding file values one-to-one (`a.b` in the file is `--a-b`
//! on the command line; a flag that conflicts with the file wins, with a
//! warning on stderr).

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use qkdsim::adversary::AttackModel;
use qkdsim::css::CssCodePair;
use qkdsim::gf2::BitVector;
use qkdsim::protocols::{ProtocolConfig, ProtocolKind, Threshold};
use qkdsim::streams;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QKDSIM_OUT_DIR";

const KNOWN_KEYS: &[&str] = &[
    "protocol",
    "code.kind",
    "code.n",
    "code.dim1",
    "code.dim2",
    "code.t",
    "code.path",
    "delta",
    "threshold.rate",
    "threshold.margin",
    "scramble",
    "announce_z",
    "attack.kind",
    "attack.px",
    "attack.py",
    "attack.pz",
    "attack.fraction",
    "attack.bit_pattern",
    "attack.phase_pattern",
    "trials",
    "seed",
    "out.dir",
];

/// Flat key/value view of one run configuration, before typing.
#[derive(Debug, Default, Clone)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn from_file(path: &Path) -> anyhow::Result<RawConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let mut values = BTreeMap::new();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                anyhow!(
                    "{}:{}: expected `key = value`, got {raw_line:?}",
                    path.display(),
                    lineno + 1
                )
            })?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                bail!(
                    "{}:{}: unknown configuration key `{key}` (known keys: {})",
                    path.display(),
                    lineno + 1,
                    KNOWN_KEYS.join(", ")
                );
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(RawConfig { values })
    }

    /// Applies a flag override; warns when it shadows a file value.
    pub fn set_flag(&mut self, key: &str, value: impl Display) {
        let value = value.to_string();
        if let Some(old) = self.values.get(key) {
            if old != &value {
                eprintln!("warning: flag --{} overrides {key} = {old} from the config file", key.replace('.', "-"));
            }
        }
        self.values.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: FromStr>(&self, key: &str) -> anyhow::Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("configuration key `{key}`: {e}")),
        }
    }

    fn parse_or<T: FromStr>(&self, key: &str, default: T) -> anyhow::Result<T>
    where
        T::Err: Display,
    {
        Ok(self.parse(key)?.unwrap_or(default))
    }
}

/// Fully typed run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub kind: ProtocolKind,
    pub protocol: ProtocolConfig,
    pub trials: u64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub code_name: String,
}

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Builds the code pair named by `code.*` keys. A seed is needed for
/// `random`; deterministic given the seed.
pub fn build_code(raw: &RawConfig, seed: u64) -> anyhow::Result<(CssCodePair, String)> {
    let kind = raw.get("code.kind").unwrap_or("steane");
    let pair = match kind {
        "steane" => CssCodePair::steane(),
        "toy3" => CssCodePair::toy3(),
        "repetition3" => CssCodePair::three_qubit_repetition(),
        "random" => {
            let n: usize = raw
                .parse("code.n")?
                .ok_or_else(|| anyhow!("code.kind = random needs code.n"))?;
            let dim1: usize = raw.parse_or("code.dim1", n / 2)?;
            let dim2: usize = raw.parse_or("code.dim2", n / 4)?;
            let t: usize = raw.parse_or("code.t", 2)?;
            let mut rng = streams::substream(seed, 0, 97);
            CssCodePair::random_nested(n, dim1, dim2, t, &mut rng)
                .map_err(|e| anyhow!("building random code: {e}"))?
        }
        "file" => {
            let path: PathBuf = raw
                .parse("code.path")?
                .ok_or_else(|| anyhow!("code.kind = file needs code.path"))?;
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading code file {}", path.display()))?;
            CssCodePair::from_text(&text).map_err(|e| anyhow!("parsing code file: {e}"))?
        }
        other => bail!(
            "unknown code.kind `{other}` (valid kinds: steane, toy3, repetition3, random, file)"
        ),
    };
    Ok((pair, kind.to_string()))
}

fn build_attack(raw: &RawConfig, positions_hint: usize) -> anyhow::Result<AttackModel> {
    let kind = raw.get("attack.kind").unwrap_or("none");
    let model = match kind {
        "none" => AttackModel::None,
        "iid_pauli" => AttackModel::IidPauli {
            px: raw.parse_or("attack.px", 0.0)?,
            py: raw.parse_or("attack.py", 0.0)?,
            pz: raw.parse_or("attack.pz", 0.0)?,
        },
        "intercept_resend" => AttackModel::InterceptResend {
            fraction: raw.parse_or("attack.fraction", 1.0)?,
        },
        "fixed_pattern" => {
            let bit: String = raw
                .parse("attack.bit_pattern")?
                .unwrap_or_else(|| "0".repeat(positions_hint));
            let phase: String = raw
                .parse("attack.phase_pattern")?
                .unwrap_or_else(|| "0".repeat(positions_hint));
            AttackModel::FixedPattern {
                bit_err: bit
                    .parse::<BitVector>()
                    .map_err(|e| anyhow!("attack.bit_pattern: {e}"))?,
                phase_err: phase
                    .parse::<BitVector>()
                    .map_err(|e| anyhow!("attack.phase_pattern: {e}"))?,
            }
        }
        other => bail!(
            "unknown attack.kind `{other}` (valid kinds: none, iid_pauli, intercept_resend, fixed_pattern)"
        ),
    };
    model
        .validate()
        .map_err(|e| anyhow!("attack configuration: {e}"))?;
    Ok(model)
}

/// Resolves a full simulate configuration. The seed is mandatory: every
/// run is reproducible or it does not happen.
pub fn resolve_run(raw: &RawConfig) -> anyhow::Result<RunConfig> {
    let seed: u64 = raw
        .parse("seed")?
        .ok_or_else(|| anyhow!("`seed` is required (set it in the config file or with --seed)"))?;
    let kind = match raw.get("protocol").unwrap_or("3") {
        "1" | "purification" => ProtocolKind::Purification,
        "2" | "css" => ProtocolKind::CssCode,
        "3" | "bb84" => ProtocolKind::Bb84,
        other => bail!("unknown protocol `{other}` (valid: 1|purification, 2|css, 3|bb84)"),
    };
    let (pair, code_name) = build_code(raw, seed)?;
    let delta: f64 = raw.parse_or("delta", 2.0)?;
    let n = pair.n();
    let positions_hint = match kind {
        ProtocolKind::Bb84 => ((4.0 + delta) * n as f64).ceil() as usize,
        _ => 2 * n,
    };
    let attack = build_attack(raw, positions_hint)?;
    let mut protocol = ProtocolConfig::new(pair);
    protocol.delta = delta;
    protocol.threshold = Threshold {
        rate: raw.parse_or("threshold.rate", 0.11)?,
        margin: raw.parse_or("threshold.margin", 0.02)?,
    };
    protocol.scramble = raw.parse_or("scramble", false)?;
    protocol.announce_z = raw.parse_or("announce_z", true)?;
    protocol.attack = attack;

    Ok(RunConfig {
        kind,
        protocol,
        trials: raw.parse_or("trials", 100)?,
        seed,
        out_dir: raw
            .parse::<PathBuf>("out.dir")?
            .unwrap_or_else(default_out_dir),
        code_name,
    })
}
