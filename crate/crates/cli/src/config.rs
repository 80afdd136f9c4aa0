//! Flat `key = value` run configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use laguerre_needlets::kernels::{make_dual_pair, CutoffPair, CutoffSpec};
use laguerre_needlets::needlets::{build_system_with, BuildOptions, NeedletSystem, SystemConfig, DEFAULT_MEMORY_CAP};
use laguerre_needlets::quadrature::{GridOptions, DEFAULT_MAX_POINTS};
use laguerre_needlets::AlphaVector;

use crate::error::{usage, CliError, CliResult};

/// Cut-off profile as written in a config file.
#[derive(Clone, Debug, PartialEq)]
pub enum CutoffParam {
    TypeA { v: f64 },
    TypeB { u: f64, v: f64 },
    Window { r0: f64, r1: f64, f0: f64, f1: f64 },
}

impl CutoffParam {
    pub fn frame_default() -> Self {
        CutoffParam::Window { r0: 0.25, r1: 0.25 + 1.0 / 12.0, f0: 3.0, f1: 4.0 }
    }

    pub fn spec(&self) -> CliResult<CutoffSpec> {
        Ok(match *self {
            CutoffParam::TypeA { v } => CutoffSpec::type_a(v)?,
            CutoffParam::TypeB { u, v } => CutoffSpec::type_b(u, v)?,
            CutoffParam::Window { r0, r1, f0, f1 } => CutoffSpec::window(r0, r1, f0, f1)?,
        })
    }
}

impl fmt::Display for CutoffParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutoffParam::TypeA { v } => write!(f, "type_a:{v:?}"),
            CutoffParam::TypeB { u, v } => write!(f, "type_b:{u:?},{v:?}"),
            CutoffParam::Window { r0, r1, f0, f1 } => write!(f, "window:{r0:?},{r1:?},{f0:?},{f1:?}"),
        }
    }
}

impl FromStr for CutoffParam {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let s = s.trim();
        if s == "frame-default" {
            return Ok(CutoffParam::frame_default());
        }
        let (name, args) = match s.split_once(':') {
            Some(x) => x,
            None => return usage(format!("cut-off `{s}`: expected name:params")),
        };
        let v = parse_list::<f64>(args)?;
        match (name, v.as_slice()) {
            ("type_a", &[v]) => Ok(CutoffParam::TypeA { v }),
            ("type_b", &[u, v]) => Ok(CutoffParam::TypeB { u, v }),
            ("window", &[r0, r1, f0, f1]) => Ok(CutoffParam::Window { r0, r1, f0, f1 }),
            _ => usage(format!("cut-off `{s}`: use type_a:v, type_b:u,v, window:r0,r1,f0,f1 or frame-default")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => usage(format!("format `{s}`: expected json or csv")),
        }
    }
}

pub fn parse_list<T: FromStr>(s: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|x| x.trim())
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<T>().map_err(|_| CliError::Usage(format!("cannot parse `{x}`"))))
        .collect()
}

fn join<T: fmt::Debug>(v: &[T]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// One entry, broadcast to `d` axes, or exactly `d` entries.
    pub alpha: Vec<f64>,
    pub d: usize,
    pub levels: usize,
    pub delta: f64,
    pub c_star: f64,
    /// Analysis cut-off of needlet systems.
    pub cutoff: CutoffParam,
    /// Cut-off of the localized kernels.
    pub kernel_cutoff: CutoffParam,
    pub tight: bool,
    pub seed: u64,
    pub trials: usize,
    pub memory_cap: u64,
    pub max_points: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub sigma: f64,
    pub quadrature_degrees: Vec<usize>,
    pub decay_degrees: Vec<usize>,
    pub lower_bound_degrees: Vec<usize>,
    pub lower_bound_delta: f64,
    pub lower_bound_points: usize,
    pub nikolskii_degrees: Vec<usize>,
    /// Integration level for continuous norms; `None` means `levels + 1`.
    pub j_int: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: vec![0.0],
            d: 1,
            levels: 3,
            delta: 0.03,
            c_star: 1.0,
            cutoff: CutoffParam::frame_default(),
            kernel_cutoff: CutoffParam::TypeA { v: 1.0 },
            tight: true,
            seed: 0,
            trials: 20,
            memory_cap: DEFAULT_MEMORY_CAP,
            max_points: DEFAULT_MAX_POINTS,
            format: Format::Json,
            out: None,
            sigma: 6.0,
            quadrature_degrees: vec![8, 32, 128, 512],
            decay_degrees: vec![64, 256, 1024],
            lower_bound_degrees: vec![64, 256],
            lower_bound_delta: 0.5,
            lower_bound_points: 2049,
            nikolskii_degrees: vec![16, 32, 64],
            j_int: None,
        }
    }
}

fn parse_one<T: FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.parse::<T>().map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{v}`")))
}

impl RunConfig {
    /// `(key, value)` pairs in file order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("alpha", join(&self.alpha)),
            ("d", self.d.to_string()),
            ("levels", self.levels.to_string()),
            ("delta", format!("{:?}", self.delta)),
            ("c_star", format!("{:?}", self.c_star)),
            ("cutoff", self.cutoff.to_string()),
            ("kernel_cutoff", self.kernel_cutoff.to_string()),
            ("tight", self.tight.to_string()),
            ("seed", self.seed.to_string()),
            ("trials", self.trials.to_string()),
            ("memory_cap", self.memory_cap.to_string()),
            ("max_points", self.max_points.to_string()),
            ("format", self.format.to_string()),
            ("out", self.out.as_ref().map(|p| p.display().to_string()).unwrap_or_default()),
            ("sigma", format!("{:?}", self.sigma)),
            ("quadrature_degrees", join(&self.quadrature_degrees)),
            ("decay_degrees", join(&self.decay_degrees)),
            ("lower_bound_degrees", join(&self.lower_bound_degrees)),
            ("lower_bound_delta", format!("{:?}", self.lower_bound_delta)),
            ("lower_bound_points", self.lower_bound_points.to_string()),
            ("nikolskii_degrees", join(&self.nikolskii_degrees)),
            ("j_int", self.j_int.map(|j| j.to_string()).unwrap_or_default()),
        ]
    }

    pub fn to_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn set(&mut self, key: &str, v: &str) -> CliResult<()> {
        match key {
            "alpha" => self.alpha = parse_list(v)?,
            "d" => self.d = parse_one(key, v)?,
            "levels" => self.levels = parse_one(key, v)?,
            "delta" => self.delta = parse_one(key, v)?,
            "c_star" => self.c_star = parse_one(key, v)?,
            "cutoff" => self.cutoff = v.parse()?,
            "kernel_cutoff" => self.kernel_cutoff = v.parse()?,
            "tight" => self.tight = parse_one(key, v)?,
            "seed" => self.seed = parse_one(key, v)?,
            "trials" => self.trials = parse_one(key, v)?,
            "memory_cap" => self.memory_cap = parse_one(key, v)?,
            "max_points" => self.max_points = parse_one(key, v)?,
            "format" => self.format = v.parse()?,
            "out" => self.out = (!v.is_empty()).then(|| PathBuf::from(v)),
            "sigma" => self.sigma = parse_one(key, v)?,
            "quadrature_degrees" => self.quadrature_degrees = parse_list(v)?,
            "decay_degrees" => self.decay_degrees = parse_list(v)?,
            "lower_bound_degrees" => self.lower_bound_degrees = parse_list(v)?,
            "lower_bound_delta" => self.lower_bound_delta = parse_one(key, v)?,
            "lower_bound_points" => self.lower_bound_points = parse_one(key, v)?,
            "nikolskii_degrees" => self.nikolskii_degrees = parse_list(v)?,
            "j_int" => self.j_int = if v.is_empty() { None } else { Some(parse_one(key, v)?) },
            _ => return usage(format!("unknown config key `{key}`")),
        }
        Ok(())
    }

    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return usage(format!("config line {}: expected key = value", i + 1));
            };
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::File { path: path.display().to_string(), source })?;
        RunConfig::parse(&text)
    }

    pub fn alpha_vector(&self) -> CliResult<AlphaVector> {
        let a = match self.alpha.len() {
            1 => vec![self.alpha[0]; self.d],
            n if n == self.d => self.alpha.clone(),
            n => return usage(format!("alpha has {n} entries but d = {}", self.d)),
        };
        Ok(AlphaVector::new(a)?)
    }

    pub fn pair(&self) -> CliResult<CutoffPair> {
        let a = self.cutoff.spec()?;
        let pair = make_dual_pair(&if self.tight { a.tight_normalized() } else { a })?;
        if self.tight && !pair.tight {
            return Err(CliError::Usage(format!("cut-off {} does not normalize to a tight pair", self.cutoff)));
        }
        Ok(pair)
    }

    pub fn build_options(&self) -> BuildOptions {
        BuildOptions {
            memory_cap: self.memory_cap,
            grid: GridOptions { max_points: self.max_points, ..GridOptions::default() },
        }
    }

    pub fn system_config(&self, pair: CutoffPair) -> CliResult<SystemConfig> {
        Ok(SystemConfig { levels: self.levels, alpha: self.alpha_vector()?, pair, delta: self.delta, c_star: self.c_star })
    }

    pub fn system(&self) -> CliResult<NeedletSystem> {
        self.system_with(self.pair()?)
    }

    pub fn system_with(&self, pair: CutoffPair) -> CliResult<NeedletSystem> {
        Ok(build_system_with(self.system_config(pair)?, &self.build_options())?)
    }

    pub fn integration_level(&self) -> usize {
        self.j_int.unwrap_or(self.levels + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_is_lossless() {
        let mut cfg = RunConfig::default();
        cfg.alpha = vec![0.1, 1.0 / 3.0];
        cfg.d = 2;
        cfg.cutoff = CutoffParam::TypeB { u: 0.3, v: 0.7 };
        cfg.out = Some("a b/c.json".into());
        cfg.j_int = Some(5);
        cfg.delta = 0.1 + 0.2;
        let back = RunConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_text(), cfg.to_text());
        assert_eq!(RunConfig::parse(&RunConfig::default().to_text()).unwrap(), RunConfig::default());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::parse("colour = red").is_err());
        assert!(RunConfig::parse("levels = -1").is_err());
        assert!(RunConfig::parse("levels").is_err());
        assert!(RunConfig::parse("cutoff = type_a:1,2").is_err());
        let cfg = RunConfig::parse("# comment\n\nlevels = 2\ncutoff = frame-default\n").unwrap();
        assert_eq!(cfg.levels, 2);
        assert_eq!(cfg.cutoff, CutoffParam::frame_default());
    }

    #[test]
    fn alpha_broadcasts() {
        let cfg = RunConfig { d: 2, alpha: vec![0.5], ..RunConfig::default() };
        assert_eq!(cfg.alpha_vector().unwrap().as_slice(), &[0.5, 0.5]);
        let bad = RunConfig { d: 3, alpha: vec![0.5, 1.0], ..RunConfig::default() };
        assert!(bad.alpha_vector().is_err());
    }

    #[test]
    fn default_pairs_build() {
        let cfg = RunConfig::default();
        assert!(cfg.pair().unwrap().tight);
        let dual = RunConfig { tight: false, ..cfg };
        assert!(!dual.pair().unwrap().tight);
    }
}
