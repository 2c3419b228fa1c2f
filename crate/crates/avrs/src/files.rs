//! JSON input files: problem specs, auxiliary policies and jammers.
//!
//! Syntax errors carry serde's line and column; semantic errors (a row that
//! does not sum to one, a size mismatch) are anchored at the line of the
//! offending key.

use std::fmt;
use std::path::{Path, PathBuf};

use avrs_core::adversary::{deterministic_jammer_family, BlockMap, JammerStrategy};
use avrs_core::{
    AuxiliaryPolicy, Channel, CondDistribution, DistortionMatrix, Distribution, ProblemSpec,
};
use serde::Deserialize;

/// An input file that could not be used.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.path.display())?;
        if let Some(l) = self.line {
            write!(f, ":{l}")?;
            if let Some(c) = self.column {
                write!(f, ":{c}")?;
            }
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for InputError {}

struct Source<'a> {
    path: &'a Path,
    text: String,
}

impl<'a> Source<'a> {
    fn read(path: &'a Path) -> Result<Self, InputError> {
        let text = std::fs::read_to_string(path).map_err(|e| InputError {
            path: path.to_path_buf(),
            line: None,
            column: None,
            message: format!("cannot read file: {e}"),
        })?;
        Ok(Self { path, text })
    }

    fn parse<T: for<'de> Deserialize<'de>>(&self) -> Result<T, InputError> {
        serde_json::from_str(&self.text).map_err(|e| InputError {
            path: self.path.to_path_buf(),
            line: Some(e.line()),
            column: Some(e.column()),
            message: strip_position(&e.to_string()),
        })
    }

    /// Error anchored at the first line where `"key":` appears.
    fn at(&self, key: &str, message: impl fmt::Display) -> InputError {
        InputError {
            path: self.path.to_path_buf(),
            line: key_line(&self.text, key),
            column: None,
            message: message.to_string(),
        }
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// 1-based line of the first `"key"` followed by a colon.
pub fn key_line(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    let mut from = 0;
    while let Some(off) = text[from..].find(&needle) {
        let at = from + off;
        let rest = text[at + needle.len()..].trim_start();
        if rest.starts_with(':') {
            return Some(text[..at].matches('\n').count() + 1);
        }
        from = at + needle.len();
    }
    None
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    x_size: usize,
    j_size: usize,
    y_size: usize,
    z_size: usize,
    #[serde(default)]
    xhat_size: Option<usize>,
    p_x: Vec<f64>,
    w: Vec<Vec<Vec<Vec<f64>>>>,
    d: Vec<Vec<f64>>,
}

/// Reads a problem spec: alphabet sizes, `p_x`, `w[x][j][y][z]` and
/// `d[x][x̂]`.
pub fn load_spec(path: &Path) -> Result<ProblemSpec, InputError> {
    let src = Source::read(path)?;
    let f: SpecFile = src.parse()?;
    if f.p_x.len() != f.x_size {
        return Err(src.at(
            "p_x",
            format!("p_x has {} entries, x_size is {}", f.p_x.len(), f.x_size),
        ));
    }
    let p_x = Distribution::new(f.p_x).map_err(|e| src.at("p_x", e))?;
    if f.w.len() != f.x_size {
        return Err(src.at(
            "w",
            format!("w has {} rows over x, x_size is {}", f.w.len(), f.x_size),
        ));
    }
    for (x, wx) in f.w.iter().enumerate() {
        if wx.len() != f.j_size {
            return Err(src.at(
                "w",
                format!(
                    "w[{x}] has {} rows over j, j_size is {}",
                    wx.len(),
                    f.j_size
                ),
            ));
        }
        for (j, wj) in wx.iter().enumerate() {
            if wj.len() != f.y_size {
                return Err(src.at(
                    "w",
                    format!(
                        "w[{x}][{j}] has {} rows over y, y_size is {}",
                        wj.len(),
                        f.y_size
                    ),
                ));
            }
            for (y, wy) in wj.iter().enumerate() {
                if wy.len() != f.z_size {
                    return Err(src.at(
                        "w",
                        format!(
                            "w[{x}][{j}][{y}] has {} entries, z_size is {}",
                            wy.len(),
                            f.z_size
                        ),
                    ));
                }
            }
        }
    }
    let w = Channel::from_nested(&f.w).map_err(|e| src.at("w", e))?;
    if f.d.len() != f.x_size {
        return Err(src.at(
            "d",
            format!("d has {} rows, x_size is {}", f.d.len(), f.x_size),
        ));
    }
    if let Some(xh) = f.xhat_size {
        if let Some((i, r)) = f.d.iter().enumerate().find(|(_, r)| r.len() != xh) {
            return Err(src.at(
                "d",
                format!("d[{i}] has {} entries, xhat_size is {xh}", r.len()),
            ));
        }
    }
    let d = DistortionMatrix::new(f.d).map_err(|e| src.at("d", e))?;
    ProblemSpec::new(p_x, w, d).map_err(|e| src.at("d", e))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFile {
    p_u_given_y: Vec<Vec<f64>>,
    zeta: Vec<Vec<usize>>,
}

/// Reads an auxiliary policy: `p_u_given_y[y][u]` and `zeta[u][z]`, checked
/// against `spec`.
pub fn load_policy(path: &Path, spec: &ProblemSpec) -> Result<AuxiliaryPolicy, InputError> {
    let src = Source::read(path)?;
    let f: PolicyFile = src.parse()?;
    if f.p_u_given_y.len() != spec.y_size() {
        return Err(src.at(
            "p_u_given_y",
            format!(
                "p_u_given_y has {} rows, |Y| is {}",
                f.p_u_given_y.len(),
                spec.y_size()
            ),
        ));
    }
    let p = CondDistribution::new(f.p_u_given_y).map_err(|e| src.at("p_u_given_y", e))?;
    let policy = AuxiliaryPolicy::new(p, f.zeta).map_err(|e| src.at("zeta", e))?;
    policy.check(spec).map_err(|e| src.at("zeta", e))?;
    Ok(policy)
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum JammerEntry {
    Memoryless {
        #[serde(default)]
        id: Option<String>,
        q: Vec<Vec<f64>>,
    },
    Symbolwise {
        #[serde(default)]
        id: Option<String>,
        map: Vec<usize>,
    },
    Block {
        #[serde(default)]
        id: Option<String>,
        entries: Vec<BlockEntry>,
        fallback: Vec<usize>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockEntry {
    x: Vec<usize>,
    j: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum JammerFile {
    Many(Vec<JammerEntry>),
    One(JammerEntry),
}

/// A jammer with the identifier used in outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedJammer {
    pub id: String,
    pub strategy: JammerStrategy,
}

/// What `--jammers` asked for.
#[derive(Debug, Clone, PartialEq)]
pub enum JammerSource {
    Fixed(Vec<NamedJammer>),
    /// Per-source worst case found by search; resolved once sources exist.
    GreedySearch,
}

pub fn symbolwise_id(map: &[usize]) -> String {
    let m: Vec<String> = map.iter().map(|j| j.to_string()).collect();
    format!("map:{}", m.join(""))
}

/// Resolves a builtin name (`trivial`, `all-deterministic`, `greedy-search`)
/// or reads a jammer file (one object or an array).
pub fn load_jammers(arg: &str, spec: &ProblemSpec) -> Result<JammerSource, InputError> {
    let named = |strategy: JammerStrategy| match &strategy {
        JammerStrategy::Symbolwise(m) => NamedJammer {
            id: symbolwise_id(m),
            strategy,
        },
        _ => unreachable!("builtins are symbolwise"),
    };
    match arg {
        "trivial" => {
            let s = JammerStrategy::trivial(spec);
            return Ok(JammerSource::Fixed(vec![NamedJammer {
                id: "trivial".into(),
                strategy: s,
            }]));
        }
        "all-deterministic" => {
            return Ok(JammerSource::Fixed(
                deterministic_jammer_family(spec)
                    .into_iter()
                    .map(named)
                    .collect(),
            ))
        }
        "greedy-search" => return Ok(JammerSource::GreedySearch),
        _ => {}
    }
    let path = Path::new(arg);
    let src = Source::read(path)?;
    let entries = match src.parse::<JammerFile>()? {
        JammerFile::Many(v) => v,
        JammerFile::One(e) => vec![e],
    };
    let mut out = Vec::with_capacity(entries.len());
    for (i, e) in entries.into_iter().enumerate() {
        let (id, strategy, key) = match e {
            JammerEntry::Memoryless { id, q } => {
                let q = CondDistribution::new(q)
                    .map_err(|err| src.at("q", format!("jammer {i}: {err}")))?;
                (id, JammerStrategy::Memoryless(q), "q")
            }
            JammerEntry::Symbolwise { id, map } => (id, JammerStrategy::Symbolwise(map), "map"),
            JammerEntry::Block {
                id,
                entries,
                fallback,
            } => {
                let entries = entries.into_iter().map(|b| (b.x, b.j)).collect();
                (
                    id,
                    JammerStrategy::Block(BlockMap { entries, fallback }),
                    "entries",
                )
            }
        };
        strategy
            .check(spec)
            .map_err(|err| src.at(key, format!("jammer {i}: {err}")))?;
        out.push(NamedJammer {
            id: id.unwrap_or_else(|| format!("jammer{i}")),
            strategy,
        });
    }
    if out.is_empty() {
        return Err(src.at("kind", "jammer file lists no jammers"));
    }
    Ok(JammerSource::Fixed(out))
}
