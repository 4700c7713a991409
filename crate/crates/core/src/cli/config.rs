use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize};

use crate::components::{LogRadius, Window};
use crate::error::{Error, Result};
use crate::fnmodel::{EntireFunction, Polynomial, SignedLogReal};
use crate::lifting::Polyline;
use crate::paperexample::{SvgStyle, MAX_LEVEL};
use crate::poisson::{Atom, SingularMeasure};

pub const DEFAULT_EPSILON: &str = "1/16";
pub const DEFAULT_LEVELS: &str = "4..8";
pub const DEFAULT_WINDOW_HALF: f64 = 80.0;
pub const DEFAULT_RESOLUTION: f64 = 0.25;
pub const DEFAULT_TOL_TRACK: f64 = 1e-8;
pub const DEFAULT_RADII: &str = "0.5,0.1,0.02";
pub const DEFAULT_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    VerifyExample,
    RenderTree,
    Classify,
    CheckDisconnected,
    Lift,
    Sweep,
    Poisson,
}

impl fmt::Display for CommandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CommandName::VerifyExample => "verify-example",
            CommandName::RenderTree => "render-tree",
            CommandName::Classify => "classify",
            CommandName::CheckDisconnected => "check-disconnected",
            CommandName::Lift => "lift",
            CommandName::Sweep => "sweep",
            CommandName::Poisson => "poisson",
        };
        f.write_str(name)
    }
}

/// Numbers in the config document may be written bare or quoted.
fn text<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum T {
        S(String),
        I(i64),
        F(f64),
    }
    Ok(Option::<T>::deserialize(d)?.map(|t| match t {
        T::S(s) => s,
        T::I(i) => i.to_string(),
        T::F(f) => f.to_string(),
    }))
}

fn texts<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<String>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum T {
        S(String),
        I(i64),
        F(f64),
    }
    Ok(Option::<Vec<T>>::deserialize(d)?.map(|v| {
        v.into_iter()
            .map(|t| match t {
                T::S(s) => s,
                T::I(i) => i.to_string(),
                T::F(f) => f.to_string(),
            })
            .collect()
    }))
}

/// Raw settings, shared by the command line flags and the TOML config file.
/// Every field is optional; values from the file win over flags.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    /// Command to run (the positional argument may be omitted when the file sets it).
    #[arg(skip)]
    pub command: Option<CommandName>,
    /// lacunary | exp | sinc | poly:c0,c1,... (increasing degree)
    #[arg(long)]
    #[serde(default, deserialize_with = "text")]
    pub function: Option<String>,
    /// Target value, e.g. 0, 1.5, 2i, 1-0.5i.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "text")]
    pub a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "text")]
    pub center: Option<String>,
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Defaults to the half width.
    #[arg(long)]
    pub half_height: Option<f64>,
    #[arg(long)]
    pub resolution: Option<f64>,
    /// Rational p/q in (0, 1/8].
    #[arg(long)]
    #[serde(default, deserialize_with = "text")]
    pub epsilon: Option<String>,
    /// Inclusive level range "lo..hi", or a single level.
    #[arg(long)]
    #[serde(default, deserialize_with = "text")]
    pub levels: Option<String>,
    /// Decreasing radii; "log:<ln r>" for radii below f64 range.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "texts")]
    pub radii: Option<Vec<String>>,
    /// Arc-count threshold: a number or "slr:<sign>:<ln |value|>".
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "text")]
    pub threshold: Option<String>,
    /// Circle radius for the arc and derivative checks (defaults to the middle
    /// of each level's annulus).
    #[arg(long)]
    pub arc_radius: Option<f64>,
    /// Samples per tree set.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Angular samples for the circle checks.
    #[arg(long)]
    pub n_theta: Option<usize>,
    #[arg(long)]
    pub tol_track: Option<f64>,
    /// Lifts stop once |z| exceeds this.
    #[arg(long)]
    pub window_radius: Option<f64>,
    /// Vertices "z0,z1,..." or "circle:<center>:<radius>:<segments>".
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "texts")]
    pub curve: Option<Vec<String>>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub closed: Option<bool>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "text")]
    pub seed: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "text")]
    pub disc_center: Option<String>,
    #[arg(long)]
    pub disc_radius: Option<f64>,
    /// Line direction for sweeps, radians.
    #[arg(long, allow_hyphen_values = true)]
    pub direction: Option<f64>,
    #[arg(long)]
    pub n_lines: Option<usize>,
    #[arg(long)]
    pub max_length: Option<f64>,
    /// Point masses "theta:mass".
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "texts")]
    pub atoms: Option<Vec<String>>,
    #[arg(long)]
    pub cantor_depth: Option<u32>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub cantor_arc: Option<Vec<f64>>,
    #[arg(long)]
    pub total_mass: Option<f64>,
    /// Arc "a,b" searched for the divergence point.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub arc: Option<Vec<f64>>,
    /// Radius ladder r = 1 - 2^-k, k = 1..=k_max.
    #[arg(long)]
    pub k_max: Option<u32>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub style_version: Option<u32>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),*) => {
        ConfigDoc { $($field: $top.$field.or($base.$field)),* }
    };
}

impl ConfigDoc {
    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: ConfigDoc) -> ConfigDoc {
        overlay!(
            self, top, command, function, a, center, half_width, half_height, resolution, epsilon,
            levels, radii, threshold, arc_radius, samples, n_theta, tol_track, window_radius, curve,
            closed, seed, disc_center, disc_radius, direction, n_lines, max_length, atoms,
            cantor_depth, cantor_arc, total_mass, arc, k_max, json, csv, svg, style_version
        )
    }
}

/// TOML config document; unknown keys are rejected with their location.
pub fn parse_document(text: &str) -> Result<ConfigDoc> {
    toml::from_str(text).map_err(|e| Error::Parse(e.to_string().trim_end().to_string()))
}

/// `p/q` kept exactly for reports, with its floating value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub p: u64,
    pub q: u64,
}

impl Rational {
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("key `epsilon`: {text:?} is not a rational p/q"));
        let (p, q) = text.trim().split_once('/').ok_or_else(bad)?;
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        if p == 0 || q == 0 || p.checked_mul(8).map_or(true, |p8| p8 > q) {
            return Err(Error::Parse(format!("key `epsilon`: {p}/{q} outside (0, 1/8]")));
        }
        Ok(Rational { p, q })
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Parse `x`, `yi`, `x+yi`, `x-yi` (exponents allowed, `i` alone means 1i).
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = s.strip_suffix('i') else {
        return s.parse().ok().map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse().ok()?,
    };
    Some(Complex64::new(re, im))
}

fn complex_key(key: &str, text: &str) -> Result<Complex64> {
    parse_complex(text).ok_or_else(|| Error::Parse(format!("key `{key}`: {text:?} is not a complex number")))
}

pub fn parse_function(text: &str) -> Result<EntireFunction> {
    match text.trim() {
        "lacunary" => Ok(EntireFunction::paper_example()),
        "exp" => Ok(EntireFunction::Exp),
        "sinc" => Ok(EntireFunction::Sinc),
        t => {
            let coeffs = t
                .strip_prefix("poly:")
                .ok_or_else(|| Error::Parse(format!("key `function`: unknown function {t:?}")))?;
            let c = coeffs
                .split(',')
                .map(|c| complex_key("function", c))
                .collect::<Result<Vec<_>>>()?;
            Polynomial::new(c)
                .map(EntireFunction::Polynomial)
                .map_err(|e| Error::Parse(format!("key `function`: {e}")))
        }
    }
}

/// `lo..hi` and `lo..=hi` are both inclusive; a bare number is a single level.
pub fn parse_levels(text: &str) -> Result<(u32, u32)> {
    let bad = || Error::Parse(format!("key `levels`: {text:?} is not a level range"));
    let t = text.trim();
    let (lo, hi) = match t.split_once("..") {
        Some((lo, hi)) => (lo, hi.strip_prefix('=').unwrap_or(hi)),
        None => (t, t),
    };
    let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi || hi > MAX_LEVEL {
        return Err(Error::Parse(format!("key `levels`: need 1 <= lo <= hi <= {MAX_LEVEL}")));
    }
    Ok((lo, hi))
}

fn parse_curve(items: &[String], closed: bool) -> Result<Polyline> {
    let wrap = |e: Error| Error::Parse(format!("key `curve`: {e}"));
    if let [one] = items {
        if let Some(rest) = one.trim().strip_prefix("circle:") {
            let parts: Vec<&str> = rest.split(':').collect();
            let [c, r, n] = parts[..] else {
                return Err(Error::Parse("key `curve`: expected circle:<center>:<radius>:<segments>".into()));
            };
            let center = complex_key("curve", c)?;
            let radius: f64 = r.parse().map_err(|_| Error::Parse(format!("key `curve`: bad radius {r:?}")))?;
            let n: usize = n.parse().map_err(|_| Error::Parse(format!("key `curve`: bad segment count {n:?}")))?;
            return Polyline::circle(center, radius, n, 0.0).map_err(wrap);
        }
    }
    let vertices = items.iter().map(|v| complex_key("curve", v)).collect::<Result<Vec<_>>>()?;
    Polyline::new(vertices, closed).map_err(wrap)
}

fn parse_atom(text: &str) -> Result<Atom> {
    let bad = || Error::Parse(format!("key `atoms`: {text:?} is not theta:mass"));
    let (t, m) = text.split_once(':').ok_or_else(bad)?;
    Ok(Atom {
        theta: t.trim().parse().map_err(|_| bad())?,
        mass: m.trim().parse().map_err(|_| bad())?,
    })
}

fn pair(key: &str, v: &[f64]) -> Result<(f64, f64)> {
    match v {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::Parse(format!("key `{key}`: expected two numbers"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outputs {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl Outputs {
    pub fn paths(&self) -> impl Iterator<Item = &PathBuf> {
        [&self.json, &self.csv, &self.svg].into_iter().flatten()
    }

    /// Sidecar log next to the first artifact.
    pub fn log_path(&self) -> Option<PathBuf> {
        self.paths().next().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".log");
            PathBuf::from(s)
        })
    }
}

fn same_file_key(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

/// Validated settings for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandName,
    pub function: EntireFunction,
    pub a: Complex64,
    pub window: Window,
    pub epsilon: Rational,
    pub levels: (u32, u32),
    pub radii: Vec<LogRadius>,
    pub threshold: Option<SignedLogReal>,
    pub arc_radius: Option<f64>,
    pub samples: usize,
    pub n_theta: Option<usize>,
    pub tol_track: f64,
    pub window_radius: f64,
    pub curve: Option<Polyline>,
    pub seed: Option<Complex64>,
    pub disc_center: Complex64,
    pub disc_radius: f64,
    pub direction: f64,
    pub n_lines: usize,
    pub max_length: f64,
    pub measure: Option<SingularMeasure>,
    pub arc: (f64, f64),
    pub k_max: u32,
    pub outputs: Outputs,
    pub style: SvgStyle,
}

impl RunConfig {
    pub fn from_doc(doc: ConfigDoc) -> Result<Self> {
        let command = doc
            .command
            .ok_or_else(|| Error::Parse("no command given (positional argument or key `command`)".into()))?;
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse(format!("key `{key}`: {v} must be positive")))
            }
        };
        let function = parse_function(doc.function.as_deref().unwrap_or("lacunary"))?;
        let a = complex_key("a", doc.a.as_deref().unwrap_or("0"))?;
        let center = complex_key("center", doc.center.as_deref().unwrap_or("0"))?;
        let half_width = positive("half_width", doc.half_width.unwrap_or(DEFAULT_WINDOW_HALF))?;
        let half_height = positive("half_height", doc.half_height.unwrap_or(half_width))?;
        let resolution = positive("resolution", doc.resolution.unwrap_or(DEFAULT_RESOLUTION))?;
        let window = Window::new(center, half_width, half_height, resolution)
            .map_err(|e| Error::Parse(format!("window: {e}")))?;
        let epsilon = Rational::parse(doc.epsilon.as_deref().unwrap_or(DEFAULT_EPSILON))?;
        let levels = parse_levels(doc.levels.as_deref().unwrap_or(DEFAULT_LEVELS))?;

        let radii_text: Vec<String> = doc
            .radii
            .unwrap_or_else(|| DEFAULT_RADII.split(',').map(String::from).collect());
        let radii = radii_text
            .iter()
            .map(|r| LogRadius::parse(r).map_err(|e| Error::Parse(format!("key `radii`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if radii.is_empty() || radii.windows(2).any(|w| !(w[1].log() < w[0].log())) {
            return Err(Error::Parse("key `radii`: must be nonempty and strictly decreasing".into()));
        }
        let threshold = doc
            .threshold
            .map(|t| {
                SignedLogReal::parse(&t)
                    .ok_or_else(|| Error::Parse(format!("key `threshold`: {t:?} is neither a number nor slr:<sign>:<log>")))
            })
            .transpose()?;
        let arc_radius = doc.arc_radius.map(|r| positive("arc_radius", r)).transpose()?;
        let samples = doc.samples.unwrap_or(DEFAULT_SAMPLES);
        let tol_track = positive("tol_track", doc.tol_track.unwrap_or(DEFAULT_TOL_TRACK))?;
        let window_radius = positive("window_radius", doc.window_radius.unwrap_or(40.0))?;
        let curve = doc
            .curve
            .map(|c| parse_curve(&c, doc.closed.unwrap_or(false)))
            .transpose()?;
        let seed = doc.seed.map(|s| complex_key("seed", &s)).transpose()?;
        let disc_center = complex_key("disc_center", doc.disc_center.as_deref().unwrap_or("1"))?;
        let disc_radius = positive("disc_radius", doc.disc_radius.unwrap_or(0.5))?;
        let direction = doc.direction.unwrap_or(0.0);
        let n_lines = doc.n_lines.unwrap_or(64);
        let max_length = positive("max_length", doc.max_length.unwrap_or(10.0))?;

        let measure = match (doc.atoms, doc.cantor_depth) {
            (Some(_), Some(_)) => {
                return Err(Error::Parse("keys `atoms` and `cantor_depth` are mutually exclusive".into()))
            }
            (Some(atoms), None) => Some(
                SingularMeasure::atoms(atoms.iter().map(|t| parse_atom(t)).collect::<Result<_>>()?)
                    .map_err(|e| Error::Parse(format!("key `atoms`: {e}")))?,
            ),
            (None, Some(depth)) => {
                let arc = pair("cantor_arc", doc.cantor_arc.as_deref().unwrap_or(&[0.0, PI / 2.0]))?;
                Some(
                    SingularMeasure::cantor_like(depth, arc, doc.total_mass.unwrap_or(1.0))
                        .map_err(|e| Error::Parse(format!("key `cantor_depth`: {e}")))?,
                )
            }
            (None, None) => None,
        };
        let arc = pair("arc", doc.arc.as_deref().unwrap_or(&[-PI, PI]))?;
        let k_max = doc.k_max.unwrap_or(20);
        if !(1..=52).contains(&k_max) {
            return Err(Error::Parse("key `k_max`: must lie in 1..=52".into()));
        }

        let outputs = Outputs {
            json: doc.json,
            csv: doc.csv,
            svg: doc.svg,
        };
        let mut seen = BTreeSet::new();
        for p in outputs.paths().cloned().chain(outputs.log_path()) {
            if !seen.insert(same_file_key(&p)) {
                return Err(Error::Parse(format!("output path {} used twice", p.display())));
            }
        }
        if outputs.svg.is_some() && command != CommandName::RenderTree {
            return Err(Error::Parse("key `svg`: only render-tree writes SVG".into()));
        }
        let style = SvgStyle::default();
        if let Some(v) = doc.style_version {
            if v != style.version {
                return Err(Error::Parse(format!("key `style_version`: {v} unknown, this build draws v{}", style.version)));
            }
        }

        let needs = |what: &str| Error::Parse(format!("{command} needs key `{what}`"));
        match command {
            CommandName::Lift if curve.is_none() => return Err(needs("curve")),
            CommandName::Lift | CommandName::Sweep if seed.is_none() => return Err(needs("seed")),
            CommandName::Poisson if measure.is_none() => return Err(needs("atoms` or `cantor_depth")),
            _ => {}
        }

        Ok(RunConfig {
            command,
            function,
            a,
            window,
            epsilon,
            levels,
            radii,
            threshold,
            arc_radius,
            samples,
            n_theta: doc.n_theta,
            tol_track,
            window_radius,
            curve,
            seed,
            disc_center,
            disc_radius,
            direction,
            n_lines,
            max_length,
            measure,
            arc,
            k_max,
            outputs,
            style,
        })
    }
}

/// Parse a config document into a validated run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    RunConfig::from_doc(parse_document(text)?)
}
