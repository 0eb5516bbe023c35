//! `key = value` experiment configs with bracketed sections.
//!
//! ```text
//! experiment = transference
//! seed = 7
//!
//! [system]
//! kind = rotation        # rotation | random | identity | explicit
//! size = 101
//! step = 1
//!
//! [kernel]
//! spec = hilbert(4)      # bump(w) | plateau(M) | hilbert(M) | dilate(<spec>, ξ)
//! m = 2
//!
//! [exponents]
//! p1 = 2
//! p2 = 2
//!
//! [breakpoints]
//! scheme = dyadic(1)     # dyadic(start) | arithmetic(start, step) | random(seed, max)
//! count = 8
//! ```
//! Other sections: `[ladder] values`, `[tolerances]`, `[trials]`.

use std::collections::BTreeMap;
use std::path::Path;

use ergodic_osc_core::kernels::{bump_kernel, dilate, hilbert_kernel, plateau_kernel};
use ergodic_osc_core::norms::holder_exponent;
use ergodic_osc_core::systems::{make_isometry, Permutation, WeightedSpace};
use ergodic_osc_core::{FactoredIsometry, KernelSpec, C64};
use ini::Ini;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};

pub const EXPERIMENTS: [&str; 8] =
    ["identity-suite", "lemma3-suite", "oscillation-scaling", "transference", "maximal-ratio", "bridge", "flow-limits", "hilbert-decomposition"];

/// Parsed sections, kept verbatim (trimmed) for fingerprinting.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawConfig {
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        let mut sections = BTreeMap::new();
        for (name, props) in ini.iter() {
            let entry: &mut BTreeMap<String, String> = sections.entry(name.unwrap_or("").to_string()).or_default();
            for (k, v) in props.iter() {
                entry.insert(k.trim().to_string(), strip_comment(v).to_string());
            }
        }
        Ok(Self { sections })
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(String::as_str)
    }

    pub fn set(&mut self, section: &str, key: &str, value: String) {
        self.sections.entry(section.to_string()).or_default().insert(key.to_string(), value);
    }

    /// Sorted `[section]` / `key=value` lines; empty sections are dropped.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (name, props) in &self.sections {
            if props.is_empty() {
                continue;
            }
            out.push('[');
            out.push_str(name);
            out.push_str("]\n");
            for (k, v) in props {
                out.push_str(k);
                out.push('=');
                out.push_str(v);
                out.push('\n');
            }
        }
        out
    }
}

fn strip_comment(v: &str) -> &str {
    v.split('#').next().unwrap_or("").trim()
}

#[derive(Debug, Clone, PartialEq)]
pub enum SystemSpec {
    Rotation { size: usize, step: i64 },
    /// Random permutation with cycle-constant weights and random phases, drawn from the run seed.
    Random { size: usize },
    Identity { size: usize },
    Explicit { weights: Vec<f64>, permutation: Vec<usize>, turns: Vec<f64> },
}

impl SystemSpec {
    pub fn size(&self) -> usize {
        match self {
            Self::Rotation { size, .. } | Self::Random { size } | Self::Identity { size } => *size,
            Self::Explicit { weights, .. } => weights.len(),
        }
    }

    pub fn build(&self, rng: &mut ChaCha8Rng) -> CliResult<FactoredIsometry> {
        Ok(match self {
            Self::Rotation { size, step } => FactoredIsometry::rotation(*size, *step),
            Self::Random { size } => ergodic_osc_core::random::random_isometry(*size, rng),
            Self::Identity { size } => FactoredIsometry::identity(WeightedSpace::uniform(*size)),
            Self::Explicit { weights, permutation, turns } => {
                let space = WeightedSpace::with_weights(weights.clone())?;
                let h = turns.iter().map(|t| C64::from_polar(1.0, std::f64::consts::TAU * t)).collect();
                make_isometry(space, h, Permutation::new(permutation.clone())?)?
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BreakpointScheme {
    /// `u_r = start·2^{r−1}`.
    Dyadic { start: i64 },
    /// `u_r = start + (r−1)·step`.
    Arithmetic { start: i64, step: i64 },
    /// `count` distinct values from `1..=max`, sorted.
    Random { seed: u64, max: i64 },
}

impl BreakpointScheme {
    pub fn generate(&self, count: usize) -> CliResult<Vec<i64>> {
        let invalid = || CliError::ConfigInvalid(format!("breakpoint scheme {self:?} cannot produce {count} breakpoints"));
        match *self {
            Self::Dyadic { start } => (0..count)
                .map(|r| if r >= 62 { None } else { start.checked_mul(1i64 << r) })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(invalid),
            Self::Arithmetic { start, step } => (0..count as i64)
                .map(|r| start.checked_add(r.checked_mul(step)?))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(invalid),
            Self::Random { seed, max } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                ergodic_osc_core::random::random_breakpoints(count, max, &mut rng).map_err(|_| invalid())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub quadrature: f64,
    pub deviation: f64,
    pub slack: f64,
    pub lemma3: f64,
    pub flow: f64,
    pub slope: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trials {
    pub count: usize,
    pub seq_trials: usize,
    pub max_len: usize,
}

/// A validated experiment config.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub system: SystemSpec,
    pub kernel: KernelSpec,
    pub kernel_text: String,
    pub m: u32,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub scheme: BreakpointScheme,
    pub breakpoint_count: usize,
    pub ladder: Vec<f64>,
    pub tolerances: Tolerances,
    pub trials: Trials,
    pub raw: RawConfig,
}

fn number<T: std::str::FromStr>(raw: &RawConfig, section: &str, key: &str, default: Option<T>) -> CliResult<T> {
    match raw.get(section, key) {
        Some(v) => v.parse().map_err(|_| CliError::Parse(format!("[{section}] {key} = `{v}` is not a valid number"))),
        None => default.ok_or_else(|| CliError::Parse(format!("[{section}] is missing `{key}`"))),
    }
}

fn list<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<T>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Parse(format!("`{s}` in {what} is not a valid number"))))
        .collect()
}

/// `name(arg, arg)` split at top-level commas.
fn call(text: &str) -> CliResult<(&str, Vec<&str>)> {
    let text = text.trim();
    let open = text.find('(').ok_or_else(|| CliError::Parse(format!("`{text}` is not of the form name(args)")))?;
    if !text.ends_with(')') {
        return Err(CliError::Parse(format!("`{text}` is missing a closing parenthesis")));
    }
    let inner = &text[open + 1..text.len() - 1];
    let mut args = Vec::new();
    let (mut depth, mut last) = (0i32, 0usize);
    for (i, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                args.push(inner[last..i].trim());
                last = i + 1;
            }
            _ => {}
        }
    }
    if !inner.trim().is_empty() {
        args.push(inner[last..].trim());
    }
    Ok((text[..open].trim(), args))
}

pub fn parse_kernel(text: &str) -> CliResult<KernelSpec> {
    let (name, args) = call(text)?;
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(CliError::Parse(format!("kernel `{name}` takes {n} argument(s)")))
        }
    };
    let num = |s: &str| s.parse::<f64>().map_err(|_| CliError::Parse(format!("`{s}` is not a number")));
    let int = |s: &str| s.parse::<u32>().map_err(|_| CliError::Parse(format!("`{s}` is not a positive integer")));
    Ok(match name {
        "bump" => {
            arity(1)?;
            bump_kernel(num(args[0])?)?
        }
        "plateau" => {
            arity(1)?;
            plateau_kernel(int(args[0])?)?
        }
        "hilbert" => {
            arity(1)?;
            hilbert_kernel(int(args[0])?)?
        }
        "dilate" => {
            arity(2)?;
            dilate(&parse_kernel(args[0])?, num(args[1])?)?
        }
        other => return Err(CliError::Parse(format!("unknown kernel `{other}`"))),
    })
}

pub fn parse_scheme(text: &str) -> CliResult<BreakpointScheme> {
    let (name, args) = call(text)?;
    let int = |s: &str| s.parse::<i64>().map_err(|_| CliError::Parse(format!("`{s}` is not an integer")));
    let scheme = match (name, args.as_slice()) {
        ("dyadic", [s]) => BreakpointScheme::Dyadic { start: int(s)? },
        ("arithmetic", [s, d]) => BreakpointScheme::Arithmetic { start: int(s)?, step: int(d)? },
        ("random", [seed, max]) => BreakpointScheme::Random { seed: int(seed)? as u64, max: int(max)? },
        _ => return Err(CliError::Parse(format!("unknown breakpoint scheme `{text}`"))),
    };
    match scheme {
        BreakpointScheme::Dyadic { start } | BreakpointScheme::Arithmetic { start, .. } if start < 1 => {
            Err(CliError::ConfigInvalid("breakpoints must start at a positive integer".into()))
        }
        BreakpointScheme::Arithmetic { step, .. } if step < 1 => Err(CliError::ConfigInvalid("arithmetic breakpoint step must be ≥ 1".into())),
        _ => Ok(scheme),
    }
}

/// Cycle notation `(0 1 2)(3 4)` or array notation `[1, 2, 0, 4, 3]`.
pub fn parse_permutation(text: &str, n: usize) -> CliResult<Vec<usize>> {
    let t = text.trim();
    if let Some(body) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
        return list(body, "permutation");
    }
    let mut cycles = Vec::new();
    let mut rest = t;
    while let Some(open) = rest.find('(') {
        let close = rest[open..].find(')').ok_or_else(|| CliError::Parse("unclosed cycle in permutation".into()))? + open;
        cycles.push(list::<usize>(&rest[open + 1..close], "permutation cycle")?);
        rest = &rest[close + 1..];
    }
    if !rest.trim().is_empty() || (cycles.is_empty() && !t.is_empty()) {
        return Err(CliError::Parse(format!("cannot read permutation `{t}`")));
    }
    Ok(Permutation::from_cycles(n, &cycles)?.as_slice().to_vec())
}

fn parse_system(raw: &RawConfig) -> CliResult<SystemSpec> {
    if !raw.sections.contains_key("system") {
        return Err(CliError::Parse("missing [system] section".into()));
    }
    let kind = raw.get("system", "kind").ok_or_else(|| CliError::Parse("[system] is missing `kind`".into()))?;
    let size = || number::<usize>(raw, "system", "size", None);
    let spec = match kind {
        "rotation" => SystemSpec::Rotation { size: size()?, step: number(raw, "system", "step", Some(1))? },
        "random" => SystemSpec::Random { size: size()? },
        "identity" => SystemSpec::Identity { size: size()? },
        "explicit" => {
            let weights: Vec<f64> = list(raw.get("system", "weights").ok_or_else(|| CliError::Parse("[system] is missing `weights`".into()))?, "weights")?;
            let n = weights.len();
            let permutation = parse_permutation(raw.get("system", "permutation").unwrap_or(""), n)?;
            let turns = match raw.get("system", "multiplier") {
                Some(t) => list(t, "multiplier")?,
                None => vec![0.0; n],
            };
            SystemSpec::Explicit { weights, permutation, turns }
        }
        other => return Err(CliError::Parse(format!("unknown system kind `{other}`"))),
    };
    if spec.size() == 0 {
        return Err(CliError::ConfigInvalid("system must have at least one point".into()));
    }
    Ok(spec)
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::ConfigInvalid(format!("tolerance `{name}` must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_raw(raw: RawConfig) -> CliResult<Self> {
        let experiment = raw.get("", "experiment").ok_or_else(|| CliError::ConfigInvalid("no experiment named".into()))?.to_string();
        let seed = number(&raw, "", "seed", Some(0u64))?;
        let system = parse_system(&raw)?;
        let kernel_text = raw.get("kernel", "spec").unwrap_or("hilbert(4)").to_string();
        let kernel = parse_kernel(&kernel_text)?;
        let m = number(&raw, "kernel", "m", Some(2u32))?;
        if m == 0 {
            return Err(CliError::ConfigInvalid("kernel m must be ≥ 1".into()));
        }
        let p1 = number(&raw, "exponents", "p1", Some(2.0))?;
        let p2 = number(&raw, "exponents", "p2", Some(2.0))?;
        let p3 = holder_exponent(p1, p2).map_err(|e| CliError::ConfigInvalid(format!("exponent gate 1/p1 + 1/p2 < 3/2 failed: {e}")))?;
        let scheme = parse_scheme(raw.get("breakpoints", "scheme").unwrap_or("dyadic(1)"))?;
        let breakpoint_count = number(&raw, "breakpoints", "count", Some(8usize))?;
        if breakpoint_count < 2 {
            return Err(CliError::ConfigInvalid("breakpoint count must be ≥ 2".into()));
        }
        let ladder = match raw.get("ladder", "values") {
            Some(v) => list(v, "ladder")?,
            None => Vec::new(),
        };
        let tolerances = Tolerances {
            quadrature: positive("quadrature", number(&raw, "tolerances", "quadrature", Some(1e-8))?)?,
            deviation: positive("deviation", number(&raw, "tolerances", "deviation", Some(1e-12))?)?,
            slack: positive("slack", number(&raw, "tolerances", "slack", Some(0.1))?)?,
            lemma3: positive("lemma3", number(&raw, "tolerances", "lemma3", Some(1e-6))?)?,
            flow: positive("flow", number(&raw, "tolerances", "flow", Some(1e-4))?)?,
            slope: positive("slope", number(&raw, "tolerances", "slope", Some(0.35))?)?,
            spread: positive("spread", number(&raw, "tolerances", "spread", Some(2.0))?)?,
        };
        let trials = Trials {
            count: number(&raw, "trials", "count", Some(5usize))?,
            seq_trials: number(&raw, "trials", "seq_trials", Some(200usize))?,
            max_len: number(&raw, "trials", "max_len", Some(256usize))?,
        };
        if trials.count == 0 || trials.max_len == 0 {
            return Err(CliError::ConfigInvalid("trial counts and lengths must be ≥ 1".into()));
        }
        Ok(Self { experiment, seed, system, kernel, kernel_text, m, p1, p2, p3, scheme, breakpoint_count, ladder, tolerances, trials, raw })
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        Self::from_raw(RawConfig::parse(text)?)
    }

    /// Applies command-line overrides so they enter the fingerprint.
    pub fn with_overrides(mut self, seed: Option<u64>, experiment: Option<&str>) -> CliResult<Self> {
        if let Some(s) = seed {
            self.raw.set("", "seed", s.to_string());
        }
        if let Some(e) = experiment {
            self.raw.set("", "experiment", e.to_string());
        }
        Self::from_raw(self.raw)
    }

    pub fn breakpoints(&self) -> CliResult<Vec<i64>> {
        self.scheme.generate(self.breakpoint_count)
    }
}

pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    ExperimentConfig::parse(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "experiment = bridge\nseed = 3\n[system]\nkind = rotation\nsize = 11\n";

    #[test]
    fn holder_gate() {
        assert!((ExperimentConfig::parse(BASE).unwrap().p3 - 1.0).abs() < 1e-15);
        let bad = format!("{BASE}[exponents]\np1 = 1.2\np2 = 1.2\n");
        let err = ExperimentConfig::parse(&bad).unwrap_err();
        assert!(matches!(err, CliError::ConfigInvalid(ref s) if s.contains("exponent gate")), "{err}");
    }

    #[test]
    fn missing_system_is_a_parse_error() {
        assert!(matches!(ExperimentConfig::parse("experiment = bridge\n"), Err(CliError::Parse(_))));
    }

    #[test]
    fn empty_config_is_invalid() {
        assert!(matches!(ExperimentConfig::parse(""), Err(CliError::ConfigInvalid(_))));
    }

    #[test]
    fn schemes() {
        assert_eq!(parse_scheme("dyadic(1)").unwrap().generate(4).unwrap(), vec![1, 2, 4, 8]);
        assert_eq!(parse_scheme("arithmetic(2, 3)").unwrap().generate(3).unwrap(), vec![2, 5, 8]);
        let r = parse_scheme("random(5, 30)").unwrap().generate(6).unwrap();
        assert!(r.windows(2).all(|w| w[0] < w[1]));
        assert!(parse_scheme("arithmetic(0, 1)").is_err());
    }

    #[test]
    fn kernels_and_permutations() {
        let k = parse_kernel("dilate(plateau(4), 2.5)").unwrap();
        assert_eq!(k.scale(), 2.5);
        assert!(parse_kernel("wave(1)").is_err());
        assert_eq!(parse_permutation("(0 1 2)(3 4)", 5).unwrap(), vec![1, 2, 0, 4, 3]);
        assert_eq!(parse_permutation("[1, 0, 2]", 3).unwrap(), vec![1, 0, 2]);
        assert_eq!(parse_permutation("", 2).unwrap(), vec![0, 1]);
    }

    #[test]
    fn explicit_system_with_phases() {
        let text = "experiment = bridge\n[system]\nkind = explicit\nweights = 1, 1, 2\npermutation = (0 1)\nmultiplier = 0, 0.5, 0.25\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        let u = cfg.system.build(&mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!((u.multiplier()[1] - C64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn canonical_form_ignores_layout() {
        let a = RawConfig::parse("seed=1\nexperiment = bridge\n[system]\nsize=3\nkind = identity # note\n").unwrap();
        let b = RawConfig::parse("experiment=bridge\nseed = 1\n\n[system]\nkind=identity\nsize = 3\n").unwrap();
        assert_eq!(a.canonical(), b.canonical());
    }
}
