//! Output files. Every file starts with the invocation that produced it.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

/// Flags that change where or how fast a run happens but not what it
/// computes; they are left out of the recorded invocation so outputs are
/// byte-identical across thread counts and output directories.
const EXCLUDED: [&str; 2] = ["--threads", "--out-dir"];

/// Arguments, resolved seed and tool version.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub args: Vec<String>,
    pub seed: u64,
}

impl Invocation {
    /// `args` excludes the program name.
    pub fn new(args: &[String], seed: u64) -> Self {
        let mut kept = Vec::with_capacity(args.len());
        let mut skip_value = false;
        for a in args {
            if skip_value {
                skip_value = false;
                continue;
            }
            if EXCLUDED.contains(&a.as_str()) {
                skip_value = true;
                continue;
            }
            if EXCLUDED.iter().any(|f| a.starts_with(&format!("{f}="))) {
                continue;
            }
            kept.push(a.clone());
        }
        Self { args: kept, seed }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tool": "avrs",
            "version": env!("CARGO_PKG_VERSION"),
            "args": self.args,
            "seed": self.seed,
        })
    }

    /// `# {...}` metadata line for CSV files.
    pub fn csv_comment(&self) -> String {
        format!("# {}\n", self.to_json())
    }
}

/// CSV text: metadata line, header, rows.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(inv: &Invocation, header: &[&str]) -> Self {
        let mut text = inv.csv_comment();
        text.push_str(&header.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let fields: Vec<String> = fields.into_iter().collect();
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Shortest round-trip decimal; `inf`/`-inf`/`nan` for non-finite values.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v}")
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> std::io::Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("values built from json! serialize");
    s.push('\n');
    write_file(dir, name, &s)
}
