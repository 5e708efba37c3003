//! Scenario files.
//!
//! Plain text, one `key = value` per line, grouped under `[section]`
//! headers; `#` starts a comment. Lists are separated by spaces or commas.
//! The full key table lives in the README.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use plap_core::analysis::decay_parameters;
use plap_core::weight_field::WeightFamilySpec;
use plap_core::{Error as CoreError, Grid, InitialDatum};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{}:{line}: `{key}`: {message}", path.display())]
pub struct ParseError {
    pub path: PathBuf,
    /// 1-based; the section header for missing keys, 0 when even the
    /// section is absent.
    pub line: usize,
    pub key: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub nodes: Vec<usize>,
}

impl GridSpec {
    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn build(&self) -> plap_core::Result<Grid<f64>> {
        Grid::new(&self.lower, &self.upper, &self.nodes)
    }

    /// Halves the spacing along every axis.
    pub fn refined(&self) -> Self {
        Self {
            nodes: self.nodes.iter().map(|n| 2 * n - 1).collect(),
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeSpec {
    Steps(usize),
    /// Double the step count until consecutive runs agree to `tol * |u0|_2`.
    Refine { tol: f64, start: usize, max: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckKind {
    Apriori,
    LrDissipation,
    Ultracontractive,
    Extinction,
    Heat,
    Sobolev,
    Nash,
    LogSobolev,
    Hypothesis,
}

impl CheckKind {
    pub const ALL: [CheckKind; 9] = [
        Self::Apriori,
        Self::LrDissipation,
        Self::Ultracontractive,
        Self::Extinction,
        Self::Heat,
        Self::Sobolev,
        Self::Nash,
        Self::LogSobolev,
        Self::Hypothesis,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Self::Apriori => "apriori",
            Self::LrDissipation => "lr-dissipation",
            Self::Ultracontractive => "ultracontractive",
            Self::Extinction => "extinction",
            Self::Heat => "heat",
            Self::Sobolev => "sobolev",
            Self::Nash => "nash",
            Self::LogSobolev => "log-sobolev",
            Self::Hypothesis => "hypothesis",
        }
    }
}

impl FromStr for CheckKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|c| c.tag() == s)
            .ok_or_else(|| format!("unknown check `{s}`"))
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisSpec {
    pub checks: Vec<CheckKind>,
    pub sigma: f64,
    pub q0: f64,
    /// Contraction norms reported by `apriori`; a subset of 1, 2, 4, inf.
    pub q_list: Vec<f64>,
    pub r_list: Vec<f64>,
    /// Extinction threshold relative to `|u0|_inf`.
    pub eps_ext: f64,
    pub sobolev_starts: usize,
    pub sobolev_modes: usize,
    /// Factor applied to the estimated constant before it enters a bound.
    pub sobolev_inflation: f64,
    pub sobolev_reference: Option<f64>,
    pub sobolev_rel_tol: f64,
    pub heat_tol: f64,
    /// Re-run the decay fit on a refined grid and with doubled data.
    pub stability: bool,
    pub stability_rel: f64,
    pub log_sobolev_draws: usize,
    pub log_sobolev_inflation: f64,
    pub nash_probes: usize,
    pub nash_rel: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub source: PathBuf,
    pub seed: u64,
    pub output: PathBuf,
    /// Write every k-th snapshot; 0 keeps only the first and the last.
    pub snapshot_every: usize,
    pub grid: GridSpec,
    pub weight: WeightFamilySpec,
    pub p: f64,
    pub horizon: f64,
    pub time: TimeSpec,
    pub grad_tol: f64,
    pub initial: InitialDatum,
    pub positive_part: bool,
    pub analysis: AnalysisSpec,
    /// Every setting after defaults were filled in, in file order.
    pub resolved: Vec<Setting>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Setting {
    pub section: &'static str,
    pub key: &'static str,
    pub value: String,
    pub defaulted: bool,
}

impl Scenario {
    pub fn check(&self, c: CheckKind) -> bool {
        self.analysis.checks.contains(&c)
    }

    /// Replaces the scenario seed, which also seeds random initial data.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        if let InitialDatum::RandomSmooth { seed: s, .. } = &mut self.initial {
            *s = seed;
        }
        for s in &mut self.resolved {
            if s.section == "scenario" && s.key == "seed" {
                s.value = seed.to_string();
                s.defaulted = false;
            }
        }
    }

    /// The resolved settings as a scenario file, defaults as comments.
    pub fn resolved_text(&self) -> String {
        let mut out = String::new();
        let mut current = "";
        for s in &self.resolved {
            if s.section != current {
                if !current.is_empty() {
                    out.push('\n');
                }
                out.push_str(&format!("[{}]\n", s.section));
                current = s.section;
            }
            // defaults stay comments so the text reparses to the same scenario
            if s.defaulted {
                out.push_str(&format!("# {} = {}  (default)\n", s.key, s.value));
            } else {
                out.push_str(&format!("{} = {}\n", s.key, s.value));
            }
        }
        out
    }
}

pub fn parse_scenario(path: &Path) -> Result<Scenario, ParseError> {
    let text = fs::read_to_string(path).map_err(|e| ParseError {
        path: path.to_path_buf(),
        line: 0,
        key: "file".into(),
        message: e.to_string(),
    })?;
    parse_scenario_str(&text, path)
}

struct Entry {
    key: String,
    value: String,
    line: usize,
}

struct RawSection {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

const SECTIONS: [&str; 6] = ["scenario", "grid", "weight", "flow", "initial", "analysis"];

fn split_sections(text: &str, path: &Path) -> Result<Vec<RawSection>, ParseError> {
    let err = |line, key: &str, message: String| ParseError {
        path: path.to_path_buf(),
        line,
        key: key.into(),
        message,
    };
    let mut sections: Vec<RawSection> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(err(line, name, "unknown section".into()));
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(err(line, name, "section appears twice".into()));
            }
            sections.push(RawSection {
                name: name.into(),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(err(line, content, "expected `key = value` or `[section]`".into()));
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(section) = sections.last_mut() else {
            return Err(err(line, key, "key outside of any section".into()));
        };
        if section.entries.iter().any(|e| e.key == key) {
            return Err(err(line, key, "key appears twice".into()));
        }
        section.entries.push(Entry {
            key: key.into(),
            value: value.into(),
            line,
        });
    }
    Ok(sections)
}

/// Typed access to one section; records what was read and what defaulted.
struct Fields<'a> {
    path: &'a Path,
    section: &'static str,
    header: usize,
    entries: Vec<(Entry, bool)>,
    resolved: &'a mut Vec<Setting>,
}

impl<'a> Fields<'a> {
    fn new(path: &'a Path, section: &'static str, raw: &mut Vec<RawSection>, resolved: &'a mut Vec<Setting>) -> Self {
        let (header, entries) = match raw.iter().position(|s| s.name == section) {
            Some(i) => {
                let s = raw.remove(i);
                (s.line, s.entries.into_iter().map(|e| (e, false)).collect())
            }
            None => (0, Vec::new()),
        };
        Self {
            path,
            section,
            header,
            entries,
            resolved,
        }
    }

    fn err(&self, line: usize, key: &str, message: impl Into<String>) -> ParseError {
        ParseError {
            path: self.path.to_path_buf(),
            line,
            key: key.into(),
            message: message.into(),
        }
    }

    /// Line of `key`, or the section header if it was defaulted.
    fn line(&self, key: &str) -> usize {
        self.entries
            .iter()
            .find(|(e, _)| e.key == key)
            .map_or(self.header, |(e, _)| e.line)
    }

    fn raw(&mut self, key: &'static str, default: Option<&str>) -> Option<String> {
        let found = self.entries.iter_mut().find(|(e, _)| e.key == key);
        let (value, defaulted) = match (found, default) {
            (Some((e, used)), _) => {
                *used = true;
                (e.value.clone(), false)
            }
            (None, Some(d)) => (d.to_string(), true),
            (None, None) => return None,
        };
        self.resolved.push(Setting {
            section: self.section,
            key,
            value: value.clone(),
            defaulted,
        });
        Some(value)
    }

    fn parse_value<T: FromStr>(&self, key: &str, s: &str) -> Result<T, ParseError>
    where
        T::Err: fmt::Display,
    {
        s.parse::<T>()
            .map_err(|e| self.err(self.line(key), key, format!("cannot parse `{s}`: {e}")))
    }

    fn opt<T: FromStr>(&mut self, key: &'static str) -> Result<Option<T>, ParseError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key, None) {
            Some(s) => self.parse_value(key, &s).map(Some),
            None => Ok(None),
        }
    }

    fn or<T: FromStr>(&mut self, key: &'static str, default: &str) -> Result<T, ParseError>
    where
        T::Err: fmt::Display,
    {
        let s = self.raw(key, Some(default)).expect("default given");
        self.parse_value(key, &s)
    }

    fn required<T: FromStr>(&mut self, key: &'static str) -> Result<T, ParseError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key, None) {
            Some(s) => self.parse_value(key, &s),
            None => Err(self.err(self.header, key, format!("missing required key in [{}]", self.section))),
        }
    }

    fn list_of<T: FromStr>(&self, key: &str, s: &str) -> Result<Vec<T>, ParseError>
    where
        T::Err: fmt::Display,
    {
        s.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| self.parse_value(key, t))
            .collect()
    }

    fn list_or<T: FromStr>(&mut self, key: &'static str, default: &str) -> Result<Vec<T>, ParseError>
    where
        T::Err: fmt::Display,
    {
        let s = self.raw(key, Some(default)).expect("default given");
        self.list_of(key, &s)
    }

    fn list_required<T: FromStr>(&mut self, key: &'static str) -> Result<Vec<T>, ParseError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key, None) {
            Some(s) => self.list_of(key, &s),
            None => Err(self.err(self.header, key, format!("missing required key in [{}]", self.section))),
        }
    }

    fn ensure(&self, ok: bool, key: &str, message: impl Into<String>) -> Result<(), ParseError> {
        if ok {
            Ok(())
        } else {
            Err(self.err(self.line(key), key, message))
        }
    }

    fn finish(self) -> Result<(), ParseError> {
        match self.entries.iter().find(|(_, used)| !used) {
            Some((e, _)) => Err(self.err(e.line, &e.key, format!("unknown key in [{}]", self.section))),
            None => Ok(()),
        }
    }
}

fn broadcast<T: Clone>(v: Vec<T>, dim: usize) -> Option<Vec<T>> {
    match v.len() {
        1 => Some(vec![v[0].clone(); dim]),
        n if n == dim => Some(v),
        _ => None,
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn core_message(e: CoreError) -> String {
    match e {
        CoreError::InvalidParameters(m)
        | CoreError::InvalidField(m)
        | CoreError::InvalidGrid(m)
        | CoreError::InvalidExponent(m) => m,
        other => other.to_string(),
    }
}

pub fn parse_scenario_str(text: &str, path: &Path) -> Result<Scenario, ParseError> {
    let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
    let mut raw = split_sections(text, path)?;
    let mut resolved = Vec::new();

    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario").to_string();
    let mut f = Fields::new(path, "scenario", &mut raw, &mut resolved);
    let name: String = f.or("name", &stem)?;
    f.ensure(
        !name.is_empty() && !name.contains(['/', '\\']),
        "name",
        "name must be a nonempty file name",
    )?;
    let seed: u64 = f.or("seed", "0")?;
    let output = f.or::<String>("output", &format!("out/{name}"))?;
    let snapshot_every: usize = f.or("snapshot_every", "0")?;
    f.finish()?;

    let mut f = Fields::new(path, "grid", &mut raw, &mut resolved);
    let dim: usize = f.required("dim")?;
    f.ensure((1..=3).contains(&dim), "dim", "dim must be 1, 2 or 3")?;
    let nodes: Vec<usize> = f.list_required("nodes")?;
    let nodes = broadcast(nodes, dim).ok_or_else(|| f.err(f.line("nodes"), "nodes", "give one count or one per axis"))?;
    let lower = broadcast(f.list_or::<f64>("lower", "0")?, dim)
        .ok_or_else(|| f.err(f.line("lower"), "lower", "give one bound or one per axis"))?;
    let upper = broadcast(f.list_or::<f64>("upper", "1")?, dim)
        .ok_or_else(|| f.err(f.line("upper"), "upper", "give one bound or one per axis"))?;
    let grid = GridSpec { lower, upper, nodes };
    if let Err(e) = grid.build() {
        return Err(f.err(f.line("nodes"), "nodes", core_message(e)));
    }
    f.finish()?;

    let mut f = Fields::new(path, "weight", &mut raw, &mut resolved);
    let family: String = f.or("family", "identity")?;
    let weight = match family.as_str() {
        "identity" => WeightFamilySpec::Identity,
        "isotropic-power" => WeightFamilySpec::IsotropicPower {
            alpha: f.or("alpha", "0")?,
            q_exponent: f.or("q_exponent", "0")?,
        },
        "anisotropic-diagonal" => WeightFamilySpec::AnisotropicDiagonal {
            exponents: broadcast(f.list_required("exponents")?, dim)
                .ok_or_else(|| f.err(f.line("exponents"), "exponents", "give one exponent or one per axis"))?,
            v_const: f.or("v_const", "1")?,
        },
        "file" => WeightFamilySpec::GridFile {
            path: resolve(&base, &f.required::<String>("path")?),
        },
        other => return Err(f.err(f.line("family"), "family", format!("unknown weight family `{other}`"))),
    };
    if let Err(e) = weight.validate(dim) {
        return Err(f.err(f.line("family"), "family", core_message(e)));
    }
    f.finish()?;

    let mut f = Fields::new(path, "flow", &mut raw, &mut resolved);
    let p: f64 = f.required("p")?;
    f.ensure(p > 1.0 && p.is_finite(), "p", format!("p must exceed 1 (got {p})"))?;
    let horizon: f64 = f.required("horizon")?;
    f.ensure(horizon > 0.0 && horizon.is_finite(), "horizon", "horizon must be positive")?;
    let steps: Option<usize> = f.opt("steps")?;
    let refine_tol: Option<f64> = f.opt("refine_tol")?;
    let time = match (steps, refine_tol) {
        (Some(n), None) => {
            f.ensure(n >= 1, "steps", "steps must be at least 1")?;
            TimeSpec::Steps(n)
        }
        (None, Some(tol)) => {
            f.ensure(tol > 0.0, "refine_tol", "refine_tol must be positive")?;
            let start: usize = f.or("refine_start", "8")?;
            let max: usize = f.or("refine_max", "512")?;
            f.ensure(start >= 1 && max >= 2 * start, "refine_max", "need refine_start >= 1 and refine_max >= 2 refine_start")?;
            TimeSpec::Refine { tol, start, max }
        }
        (Some(_), Some(_)) => return Err(f.err(f.line("refine_tol"), "refine_tol", "give either steps or refine_tol, not both")),
        (None, None) => return Err(f.err(f.header, "steps", "missing required key in [flow] (or give refine_tol)")),
    };
    let grad_tol: f64 = f.or("grad_tol", "1e-9")?;
    f.ensure(grad_tol > 0.0 && grad_tol < 1.0, "grad_tol", "grad_tol must lie in (0, 1)")?;
    f.finish()?;

    let mut f = Fields::new(path, "initial", &mut raw, &mut resolved);
    let kind: String = f.or("kind", "sine-product")?;
    let initial = match kind.as_str() {
        "zero" => InitialDatum::Zero,
        "sine-product" => InitialDatum::SineProduct {
            amplitude: f.or("amplitude", "1")?,
        },
        "bump" => {
            let mid: Vec<String> = (0..dim).map(|d| ((grid.lower[d] + grid.upper[d]) / 2.0).to_string()).collect();
            let center = broadcast(f.list_or::<f64>("center", &mid.join(" "))?, dim)
                .ok_or_else(|| f.err(f.line("center"), "center", "give one coordinate per axis"))?;
            let radius: f64 = f.or("radius", "0.25")?;
            f.ensure(radius > 0.0, "radius", "radius must be positive")?;
            InitialDatum::Bump {
                center,
                radius,
                amplitude: f.or("amplitude", "1")?,
            }
        }
        "random-smooth" => {
            let modes: usize = f.or("modes", "4")?;
            f.ensure(modes >= 1, "modes", "modes must be at least 1")?;
            InitialDatum::RandomSmooth {
                modes,
                amplitude: f.or("amplitude", "1")?,
                seed,
            }
        }
        "file" => InitialDatum::File(resolve(&base, &f.required::<String>("path")?)),
        other => return Err(f.err(f.line("kind"), "kind", format!("unknown initial datum `{other}`"))),
    };
    let positive_part: bool = f.or("positive_part", "false")?;
    f.finish()?;

    let mut f = Fields::new(path, "analysis", &mut raw, &mut resolved);
    let mut checks: Vec<CheckKind> = f.list_or("checks", "apriori")?;
    checks.sort();
    checks.dedup();
    let has = |c| checks.contains(&c);
    let sigma: f64 = f.or("sigma", "2")?;
    let q0_given = f.line("q0") != f.header;
    let q0: f64 = f.or("q0", "1")?;
    let q_list: Vec<f64> = f.list_or("q_list", "1 2 4 inf")?;
    f.ensure(
        q_list.iter().all(|q| [1.0, 2.0, 4.0, f64::INFINITY].contains(q)),
        "q_list",
        "q_list entries must be among 1, 2, 4, inf",
    )?;
    let r_list: Vec<f64> = f.list_or("r_list", "1 2 3")?;
    f.ensure(r_list.iter().all(|&r| r >= 1.0 && r.is_finite()), "r_list", "every r must be at least 1")?;
    let analysis = AnalysisSpec {
        sigma,
        q0,
        q_list,
        r_list,
        eps_ext: f.or("eps_ext", "1e-8")?,
        sobolev_starts: f.or("sobolev_starts", "20")?,
        sobolev_modes: f.or("sobolev_modes", "4")?,
        sobolev_inflation: f.or("sobolev_inflation", "1.1")?,
        sobolev_reference: f.opt("sobolev_reference")?,
        sobolev_rel_tol: f.or("sobolev_rel_tol", "0.01")?,
        heat_tol: f.or("heat_tol", "1e-8")?,
        stability: f.or("stability", "false")?,
        stability_rel: f.or("stability_rel", "0.2")?,
        log_sobolev_draws: f.or("log_sobolev_draws", "200")?,
        log_sobolev_inflation: f.or("log_sobolev_inflation", "1.05")?,
        nash_probes: f.or("nash_probes", "64")?,
        nash_rel: f.or("nash_rel", "0.1")?,
        checks: checks.clone(),
    };

    // every requested check must be well posed before anything runs
    let a = &analysis;
    f.ensure(sigma >= 1.0 && sigma.is_finite(), "sigma", "sigma must be at least 1")?;
    if q0_given || has(CheckKind::Ultracontractive) || has(CheckKind::Extinction) {
        if let Err(e) = decay_parameters(p, q0, sigma) {
            let key = if q0_given { "q0" } else { "checks" };
            return Err(f.err(f.line(key), key, core_message(e)));
        }
    }
    if has(CheckKind::Extinction) {
        f.ensure(p < 2.0, "checks", format!("extinction requires p < 2 (p = {p})"))?;
        f.ensure(a.eps_ext > 0.0 && a.eps_ext < 1.0, "eps_ext", "eps_ext must lie in (0, 1)")?;
    }
    if has(CheckKind::Heat) {
        let sine = matches!(initial, InitialDatum::SineProduct { .. });
        f.ensure(
            dim == 1 && p == 2.0 && weight == WeightFamilySpec::Identity && sine && !positive_part,
            "checks",
            "heat needs dim = 1, p = 2, identity weights and a sine-product datum",
        )?;
    }
    if has(CheckKind::Nash) {
        f.ensure((1.0..2.0).contains(&q0), "q0", "nash needs q0 in [1, 2)")?;
        f.ensure(sigma > 1.0, "sigma", "nash needs sigma > 1")?;
        f.ensure(a.nash_probes >= 1, "nash_probes", "nash_probes must be at least 1")?;
    }
    if has(CheckKind::LrDissipation) {
        let nonnegative = positive_part
            || match &initial {
                InitialDatum::Zero => true,
                InitialDatum::SineProduct { amplitude } | InitialDatum::Bump { amplitude, .. } => *amplitude >= 0.0,
                InitialDatum::RandomSmooth { .. } | InitialDatum::File(_) => false,
            };
        f.ensure(
            nonnegative,
            "checks",
            "lr-dissipation needs nonnegative data (set positive_part = true in [initial])",
        )?;
    }
    let needs_sobolev = has(CheckKind::Sobolev) || has(CheckKind::Extinction) || has(CheckKind::LogSobolev);
    if needs_sobolev {
        f.ensure(a.sobolev_starts >= 1, "sobolev_starts", "sobolev_starts must be at least 1")?;
        f.ensure(a.sobolev_modes >= 1, "sobolev_modes", "sobolev_modes must be at least 1")?;
        f.ensure(a.sobolev_inflation >= 1.0, "sobolev_inflation", "sobolev_inflation must be at least 1")?;
    }
    if has(CheckKind::LogSobolev) {
        f.ensure(sigma > 1.0, "sigma", "log-sobolev needs sigma > 1")?;
        f.ensure(a.log_sobolev_draws >= 1, "log_sobolev_draws", "log_sobolev_draws must be at least 1")?;
        f.ensure(a.log_sobolev_inflation >= 1.0, "log_sobolev_inflation", "log_sobolev_inflation must be at least 1")?;
    }
    if a.stability {
        f.ensure(has(CheckKind::Ultracontractive), "stability", "stability refines the ultracontractive check; request it")?;
        f.ensure(
            weight.is_analytic() && !matches!(initial, InitialDatum::File(_)),
            "stability",
            "stability needs an analytic weight family and a built-in datum",
        )?;
    }
    f.finish()?;

    if let Some(s) = raw.first() {
        return Err(ParseError {
            path: path.to_path_buf(),
            line: s.line,
            key: s.name.clone(),
            message: "unknown section".into(),
        });
    }

    Ok(Scenario {
        output: PathBuf::from(output),
        name,
        source: path.to_path_buf(),
        seed,
        snapshot_every,
        grid,
        weight,
        p,
        horizon,
        time,
        grad_tol,
        initial,
        positive_part,
        analysis,
        resolved,
    })
}
