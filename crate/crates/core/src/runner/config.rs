//! Scenario configuration: a flat `key = value` text format.
//!
//! `#` starts a comment, `[section]` prefixes the following keys with
//! `section.`, and numeric values may be arithmetic in `pi` (and `L` inside
//! substrate arguments). Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::expr;
use crate::error::{Error, Result};
use crate::forward::PhysParams;
use crate::optim::DescentSettings;
use crate::potential::PotentialParams;

/// Initial film thickness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FilmProfile {
    /// `1 + h_amplitude cos(mode π x / L)`
    Cosine,
    /// `1 + amplitude exp(-(k x)^2)`
    Gauss {
        amplitude: f64,
        k: f64,
    },
    /// Final film of an uncontrolled run of length `t_pre` from the cosine profile.
    Steady {
        t_pre: f64,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SubstrateProfile {
    Flat,
    /// `a (tanh((x + c1)/d) - tanh((x - c2)/d))`
    Tanh {
        a: f64,
        c1: f64,
        c2: f64,
        d: f64,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TargetSpec {
    /// `(h + beta s)` after an uncontrolled run of length `t_pre`.
    Steady {
        t_pre: f64,
    },
    Flat {
        value: f64,
    },
    /// Flat at the mean film thickness of the initial state.
    FlatMean,
    /// `1 + a cos(m π x / L)`
    Wave {
        a: f64,
        m: f64,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub h_amplitude: f64,
    pub mode: f64,
    pub film: FilmProfile,
    pub substrate: SubstrateProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub length: f64,
    pub n_nodes: usize,
    /// Control horizon.
    pub t_final: f64,
    pub n_steps: usize,
    pub phys: PhysParams,
    pub alpha: f64,
    pub beta: u8,
    pub ic: InitialCondition,
    pub target: Option<TargetSpec>,
    pub optimizer: DescentSettings,
}

impl Scenario {
    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    pub fn beta_f64(&self) -> f64 {
        f64::from(self.beta)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| Error::Config {
            path: self.name.clone(),
            line: 0,
            key: key.to_string(),
            message,
        };
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(bad("L", "must be > 0".into()));
        }
        if self.n_nodes < 3 {
            return Err(bad("n_nodes", "must be >= 3".into()));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(bad("T", "must be > 0".into()));
        }
        if self.n_steps == 0 {
            return Err(bad("n_steps", "must be >= 1".into()));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(bad("alpha", format!("must be > 0, got {}", self.alpha)));
        }
        if self.beta > 1 {
            return Err(bad("beta", format!("must be 0 or 1, got {}", self.beta)));
        }
        self.phys
            .validate()
            .map_err(|e| bad("phys", e.to_string()))?;
        self.optimizer
            .validate()
            .map_err(|e| bad("optimizer", e.to_string()))?;
        for (key, path) in self.referenced_files() {
            if !path.is_file() {
                return Err(bad(key, format!("file {} does not exist", path.display())));
            }
        }
        Ok(())
    }

    fn referenced_files(&self) -> Vec<(&'static str, &Path)> {
        let mut out = Vec::new();
        if let FilmProfile::File { path } = &self.ic.film {
            out.push(("ic.film", path.as_path()));
        }
        if let SubstrateProfile::File { path } = &self.ic.substrate {
            out.push(("ic.substrate", path.as_path()));
        }
        if let Some(TargetSpec::File { path }) = &self.target {
            out.push(("target", path.as_path()));
        }
        out
    }

    /// Canonical config text; `parse_str` of the result reproduces `self`.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let p = &self.phys;
        let o = &self.optimizer;
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "L = {:?}", self.length);
        let _ = writeln!(s, "n_nodes = {}", self.n_nodes);
        let _ = writeln!(s, "T = {:?}", self.t_final);
        let _ = writeln!(s, "n_steps = {}", self.n_steps);
        let _ = writeln!(s, "Ca = {:?}", p.ca);
        let _ = writeln!(s, "Bo = {:?}", p.bo);
        let _ = writeln!(s, "c = {:?}", p.c);
        let _ = writeln!(s, "gamma = {:?}", p.gamma);
        let _ = writeln!(s, "A = {:?}", p.potential.hamaker);
        let _ = writeln!(s, "eps = {:?}", p.potential.eps);
        let _ = writeln!(s, "alpha = {:?}", self.alpha);
        let _ = writeln!(s, "beta = {}", self.beta);
        let _ = writeln!(s, "tol = {:?}", o.tol);
        let _ = writeln!(s, "k_max = {}", o.k_max);
        let _ = writeln!(s, "lambda0 = {:?}", o.lambda0);
        if let Some(t) = &self.target {
            let _ = writeln!(s, "target = {}", format_target(t));
        }
        let _ = writeln!(s, "\n[ic]");
        let _ = writeln!(s, "h_amplitude = {:?}", self.ic.h_amplitude);
        let _ = writeln!(s, "mode = {:?}", self.ic.mode);
        let _ = writeln!(s, "film = {}", format_film(&self.ic.film));
        let _ = writeln!(s, "substrate = {}", format_substrate(&self.ic.substrate));
        s
    }
}

fn format_film(f: &FilmProfile) -> String {
    match f {
        FilmProfile::Cosine => "cosine".into(),
        FilmProfile::Gauss { amplitude, k } => format!("gauss({amplitude:?}, {k:?})"),
        FilmProfile::Steady { t_pre } => format!("steady({t_pre:?})"),
        FilmProfile::File { path } => format!("file:{}", path.display()),
    }
}

fn format_substrate(s: &SubstrateProfile) -> String {
    match s {
        SubstrateProfile::Flat => "flat".into(),
        SubstrateProfile::Tanh { a, c1, c2, d } => format!("tanh({a:?}, {c1:?}, {c2:?}, {d:?})"),
        SubstrateProfile::File { path } => format!("file:{}", path.display()),
    }
}

fn format_target(t: &TargetSpec) -> String {
    match t {
        TargetSpec::Steady { t_pre } => format!("steady({t_pre:?})"),
        TargetSpec::Flat { value } => format!("flat({value:?})"),
        TargetSpec::FlatMean => "flat(mean)".into(),
        TargetSpec::Wave { a, m } => format!("wave({a:?}, {m:?})"),
        TargetSpec::File { path } => format!("file:{}", path.display()),
    }
}

const KNOWN_KEYS: &[&str] = &[
    "name",
    "L",
    "n_nodes",
    "T",
    "control_horizon",
    "n_steps",
    "Ca",
    "Bo",
    "c",
    "gamma",
    "A",
    "eps",
    "alpha",
    "beta",
    "tol",
    "k_max",
    "lambda0",
    "target",
    "ic.h_amplitude",
    "ic.mode",
    "ic.film",
    "ic.substrate",
];

struct Entry {
    line: usize,
    value: String,
}

struct Reader<'a> {
    origin: String,
    base_dir: &'a Path,
    entries: BTreeMap<String, Entry>,
}

impl Reader<'_> {
    fn err(&self, line: usize, key: &str, message: impl Into<String>) -> Error {
        Error::Config {
            path: self.origin.clone(),
            line,
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.get(key).map(|e| (e.value.as_str(), e.line))
    }

    fn number_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some((v, line)) => expr::eval(v, None).map_err(|m| self.err(line, key, m)),
        }
    }

    fn number(&self, key: &str) -> Result<f64> {
        match self.raw(key) {
            None => Err(self.err(0, key, "missing required key")),
            Some((v, line)) => expr::eval(v, None).map_err(|m| self.err(line, key, m)),
        }
    }

    fn integer(&self, key: &str, default: Option<usize>) -> Result<usize> {
        match (self.raw(key), default) {
            (None, Some(d)) => Ok(d),
            (None, None) => Err(self.err(0, key, "missing required key")),
            (Some((v, line)), _) => v.parse::<usize>().map_err(|_| {
                self.err(
                    line,
                    key,
                    format!("expected a non-negative integer, got `{v}`"),
                )
            }),
        }
    }

    fn path(&self, raw: &str) -> PathBuf {
        let p = Path::new(raw.trim());
        let joined = if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        };
        std::fs::canonicalize(&joined).unwrap_or(joined)
    }

    /// `name(a, b, ...)` with each argument evaluated.
    fn call(
        &self,
        key: &str,
        line: usize,
        v: &str,
        length: Option<f64>,
    ) -> Result<(String, Vec<String>, Vec<f64>)> {
        let v = v.trim();
        let Some(open) = v.find('(') else {
            return Ok((v.to_string(), vec![], vec![]));
        };
        if !v.ends_with(')') {
            return Err(self.err(line, key, format!("missing `)` in `{v}`")));
        }
        let name = v[..open].trim().to_string();
        let inner = &v[open + 1..v.len() - 1];
        let raw: Vec<String> = if inner.trim().is_empty() {
            vec![]
        } else {
            inner.split(',').map(|a| a.trim().to_string()).collect()
        };
        let mut nums = Vec::new();
        for a in &raw {
            if a == "mean" {
                continue;
            }
            nums.push(expr::eval(a, length).map_err(|m| self.err(line, key, m))?);
        }
        Ok((name, raw, nums))
    }

    fn arity(&self, key: &str, line: usize, name: &str, args: &[f64], n: usize) -> Result<()> {
        if args.len() != n {
            return Err(self.err(
                line,
                key,
                format!("`{name}` takes {n} arguments, got {}", args.len()),
            ));
        }
        Ok(())
    }
}

pub fn parse_config(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_str(&text, &path.display().to_string(), base)
}

/// Parses config text; relative file references resolve against `base_dir`.
pub fn parse_str(text: &str, origin: &str, base_dir: &Path) -> Result<Scenario> {
    let mut reader = Reader {
        origin: origin.to_string(),
        base_dir,
        entries: BTreeMap::new(),
    };
    let mut section = String::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(reader.err(line_no, line, "malformed section header"));
            };
            section = name.trim().to_string();
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(reader.err(line_no, line, "expected `key = value`"));
        };
        let key = if section.is_empty() {
            k.trim().to_string()
        } else {
            format!("{section}.{}", k.trim())
        };
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(reader.err(line_no, &key, "unknown key"));
        }
        if reader.entries.contains_key(&key) {
            return Err(reader.err(line_no, &key, "duplicate key"));
        }
        reader.entries.insert(
            key,
            Entry {
                line: line_no,
                value: v.trim().to_string(),
            },
        );
    }
    build(&reader)
}

fn build(r: &Reader) -> Result<Scenario> {
    let name = r
        .raw("name")
        .map(|(v, _)| v.to_string())
        .unwrap_or_else(|| {
            Path::new(&r.origin)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "scenario".into())
        });
    let length = r.number("L")?;
    let n_nodes = r.integer("n_nodes", None)?;
    let t_final = match (r.raw("T"), r.raw("control_horizon")) {
        (Some(_), Some((_, line))) => {
            let t = r.number("T")?;
            let h = r.number("control_horizon")?;
            if t != h {
                return Err(r.err(line, "control_horizon", format!("conflicts with T = {t}")));
            }
            t
        }
        (None, Some(_)) => r.number("control_horizon")?,
        _ => r.number("T")?,
    };
    let n_steps = r.integer("n_steps", None)?;

    let phys = PhysParams {
        ca: r.number_or("Ca", 1.0)?,
        bo: r.number_or("Bo", 1.0)?,
        c: r.number_or("c", 0.1)?,
        gamma: r.number_or("gamma", 0.0)?,
        potential: PotentialParams {
            hamaker: r.number_or("A", 0.0)?,
            eps: r.number_or("eps", 0.1)?,
        },
    };
    let defaults = DescentSettings::default();
    let optimizer = DescentSettings {
        tol: r.number_or("tol", defaults.tol)?,
        k_max: r.integer("k_max", Some(defaults.k_max))?,
        lambda0: r.number_or("lambda0", defaults.lambda0)?,
        lambda_min: defaults.lambda_min,
    };
    let beta = match r.raw("beta") {
        None => 1,
        Some((v, line)) => match v {
            "0" => 0,
            "1" => 1,
            _ => return Err(r.err(line, "beta", format!("must be 0 or 1, got `{v}`"))),
        },
    };

    let film = match r.raw("ic.film") {
        None => FilmProfile::Cosine,
        Some((v, line)) => {
            if let Some(p) = v.strip_prefix("file:") {
                FilmProfile::File { path: r.path(p) }
            } else {
                let (fname, _, args) = r.call("ic.film", line, v, None)?;
                match fname.as_str() {
                    "cosine" => {
                        r.arity("ic.film", line, &fname, &args, 0)?;
                        FilmProfile::Cosine
                    }
                    "gauss" => {
                        r.arity("ic.film", line, &fname, &args, 2)?;
                        FilmProfile::Gauss {
                            amplitude: args[0],
                            k: args[1],
                        }
                    }
                    "steady" => {
                        r.arity("ic.film", line, &fname, &args, 1)?;
                        FilmProfile::Steady { t_pre: args[0] }
                    }
                    _ => return Err(r.err(line, "ic.film", format!("unknown profile `{fname}`"))),
                }
            }
        }
    };
    let substrate = match r.raw("ic.substrate") {
        None => SubstrateProfile::Flat,
        Some((v, line)) => {
            if let Some(p) = v.strip_prefix("file:") {
                SubstrateProfile::File { path: r.path(p) }
            } else {
                let (sname, _, args) = r.call("ic.substrate", line, v, Some(length))?;
                match sname.as_str() {
                    "flat" => {
                        r.arity("ic.substrate", line, &sname, &args, 0)?;
                        SubstrateProfile::Flat
                    }
                    "tanh" => {
                        r.arity("ic.substrate", line, &sname, &args, 4)?;
                        SubstrateProfile::Tanh {
                            a: args[0],
                            c1: args[1],
                            c2: args[2],
                            d: args[3],
                        }
                    }
                    _ => {
                        return Err(r.err(
                            line,
                            "ic.substrate",
                            format!("unknown profile `{sname}`"),
                        ))
                    }
                }
            }
        }
    };
    let target = match r.raw("target") {
        None => None,
        Some((v, line)) => Some(if let Some(p) = v.strip_prefix("file:") {
            TargetSpec::File { path: r.path(p) }
        } else {
            let (tname, raw, args) = r.call("target", line, v, None)?;
            match tname.as_str() {
                "steady" => {
                    r.arity("target", line, &tname, &args, 1)?;
                    TargetSpec::Steady { t_pre: args[0] }
                }
                "flat" if raw.len() == 1 && raw[0] == "mean" => TargetSpec::FlatMean,
                "flat" => {
                    r.arity("target", line, &tname, &args, 1)?;
                    TargetSpec::Flat { value: args[0] }
                }
                "wave" => {
                    r.arity("target", line, &tname, &args, 2)?;
                    TargetSpec::Wave {
                        a: args[0],
                        m: args[1],
                    }
                }
                _ => return Err(r.err(line, "target", format!("unknown target `{tname}`"))),
            }
        }),
    };

    let scenario = Scenario {
        name,
        length,
        n_nodes,
        t_final,
        n_steps,
        phys,
        alpha: r.number_or("alpha", 1e-6)?,
        beta,
        ic: InitialCondition {
            h_amplitude: r.number_or("ic.h_amplitude", 0.0)?,
            mode: r.number_or("ic.mode", 1.0)?,
            film,
            substrate,
        },
        target,
        optimizer,
    };
    scenario.validate().map_err(|e| match e {
        Error::Config { key, message, .. } => {
            let line = r.raw(&key).map_or(0, |(_, l)| l);
            r.err(line, &key, message)
        }
        other => other,
    })?;
    Ok(scenario)
}
