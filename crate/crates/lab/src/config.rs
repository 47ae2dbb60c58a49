//! Experiment configuration files.
//!
//! The format is line oriented: `[section]` headers followed by
//! `key = value` lines, `#` comments. Values are numbers, bare words,
//! double-quoted strings or bracketed lists of those. A handful of keys may
//! appear before any header as shorthands:
//!
//! | shorthand    | canonical key   |
//! |--------------|-----------------|
//! | `experiment` | `experiment`    |
//! | `domain`     | `domain.kind`   |
//! | `eps`        | `density.eps`   |
//! | `spacing`    | `grid.spacing`  |
//! | `output`     | `output.dir`    |

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use ma_lab_core::{ConvexDomain, MaOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Experiment {
    SolveMa,
    SolveLma,
    Sections,
    Cover,
    Maximal,
    GoodSets,
    Barrier,
    CofactorStability,
    SobolevStability,
    Approximation,
    ConvexW21e,
    ContactSet,
    W2pRatio,
    GeometricIteration,
    Suite,
}

impl Experiment {
    pub const ALL: [Experiment; 15] = [
        Experiment::SolveMa,
        Experiment::SolveLma,
        Experiment::Sections,
        Experiment::Cover,
        Experiment::Maximal,
        Experiment::GoodSets,
        Experiment::Barrier,
        Experiment::CofactorStability,
        Experiment::SobolevStability,
        Experiment::Approximation,
        Experiment::ConvexW21e,
        Experiment::ContactSet,
        Experiment::W2pRatio,
        Experiment::GeometricIteration,
        Experiment::Suite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::SolveMa => "solve_ma",
            Experiment::SolveLma => "solve_lma",
            Experiment::Sections => "sections",
            Experiment::Cover => "cover",
            Experiment::Maximal => "maximal",
            Experiment::GoodSets => "goodsets",
            Experiment::Barrier => "barrier",
            Experiment::CofactorStability => "cofactor_stability",
            Experiment::SobolevStability => "sobolev_stability",
            Experiment::Approximation => "approximation",
            Experiment::ConvexW21e => "convex_w21e",
            Experiment::ContactSet => "contact_set",
            Experiment::W2pRatio => "w2p_ratio",
            Experiment::GeometricIteration => "geometric_iteration",
            Experiment::Suite => "suite",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }

    /// Experiments run by the `stability` subcommand.
    pub fn is_stability(self) -> bool {
        matches!(
            self,
            Experiment::CofactorStability
                | Experiment::SobolevStability
                | Experiment::Approximation
                | Experiment::ConvexW21e
                | Experiment::ContactSet
                | Experiment::W2pRatio
                | Experiment::GeometricIteration
        )
    }

    /// Everything except the suite itself.
    pub fn runnable() -> Vec<Experiment> {
        Self::ALL
            .into_iter()
            .filter(|&e| e != Experiment::Suite)
            .collect()
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Disc { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Square { half_side: f64 },
    Superellipse { a: f64, b: f64, exponent: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl DomainSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            DomainSpec::Disc { .. } => "disc",
            DomainSpec::Ellipse { .. } => "ellipse",
            DomainSpec::Square { .. } => "square",
            DomainSpec::Superellipse { .. } => "superellipse",
            DomainSpec::Polygon { .. } => "polygon",
        }
    }

    pub fn build(&self) -> ma_lab_core::Result<ConvexDomain> {
        match self {
            DomainSpec::Disc { radius } => ConvexDomain::disc(*radius),
            DomainSpec::Ellipse { a, b } => ConvexDomain::ellipse(*a, *b),
            DomainSpec::Square { half_side } => ConvexDomain::square(*half_side),
            DomainSpec::Superellipse { a, b, exponent } => ConvexDomain::superellipse(*a, *b, *exponent),
            DomainSpec::Polygon { vertices } => ConvexDomain::polygon(vertices),
        }
    }
}

/// Shape of the density perturbation `g0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum G0Form {
    /// `sin(pi x / L) sin(pi y / L)` with `L` the half-width of the domain.
    Sin,
    /// `g0 = 1`.
    Constant,
}

impl G0Form {
    pub fn name(self) -> &'static str {
        match self {
            G0Form::Sin => "sin",
            G0Form::Constant => "constant",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensitySpec {
    pub eps: f64,
    pub g0: G0Form,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    pub tol_ma: f64,
    pub max_iter: usize,
    pub damping_min: f64,
    pub tol_convex_rel: f64,
}

impl SolverSpec {
    pub fn ma_options(&self) -> MaOptions {
        MaOptions {
            tol_ma: self.tol_ma,
            max_iter: self.max_iter,
            damping_min: self.damping_min,
            tol_convex_rel: self.tol_convex_rel,
        }
    }
}

impl Default for SolverSpec {
    fn default() -> Self {
        let o = MaOptions::default();
        SolverSpec {
            tol_ma: o.tol_ma,
            max_iter: o.max_iter,
            damping_min: o.damping_min,
            tol_convex_rel: o.tol_convex_rel,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub eps: Vec<f64>,
    pub p: f64,
    pub q: f64,
    pub gamma: Vec<f64>,
    pub sigma: f64,
    /// Explicit `beta` grid for distribution functions; empty picks one from
    /// the measured openings.
    pub beta: Vec<f64>,
    pub m: f64,
    pub delta: f64,
    /// Paired with `big_lambda`.
    pub lambda: Vec<f64>,
    pub big_lambda: Vec<f64>,
    pub eps0: f64,
    pub mq: f64,
    pub seed: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            eps: vec![0.2, 0.1, 0.05, 0.025],
            p: 2.0,
            q: 4.0,
            gamma: vec![1.05, 1.1, 1.25],
            sigma: 0.48,
            beta: Vec::new(),
            m: 2.0,
            delta: 0.5,
            lambda: vec![1.0, 0.9],
            big_lambda: vec![1.0, 1.1],
            eps0: 0.125,
            mq: 1.0,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub domain: DomainSpec,
    /// The first entry is the working spacing; further entries are used for
    /// refinement checks.
    pub spacings: Vec<f64>,
    pub density: DensitySpec,
    pub solver: SolverSpec,
    pub sweep: SweepSpec,
    /// Experiments run by `suite`.
    pub suite: Vec<Experiment>,
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            domain: DomainSpec::Disc { radius: 1.0 },
            spacings: vec![1.0 / 32.0, 1.0 / 64.0],
            density: DensitySpec {
                eps: 0.1,
                g0: G0Form::Sin,
            },
            solver: SolverSpec::default(),
            sweep: SweepSpec::default(),
            suite: Experiment::runnable(),
            output: None,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.spacings[0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every problem found in a configuration, in line order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_char('\n')?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Scalar(String),
    List(Vec<String>),
}

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value: Value,
}

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "domain.kind",
    "domain.radius",
    "domain.a",
    "domain.b",
    "domain.half_side",
    "domain.exponent",
    "domain.vertices",
    "grid.spacing",
    "grid.spacings",
    "density.eps",
    "density.g0",
    "solver.tol_ma",
    "solver.max_iter",
    "solver.damping_min",
    "solver.tol_convex_rel",
    "sweep.eps",
    "sweep.p",
    "sweep.q",
    "sweep.gamma",
    "sweep.sigma",
    "sweep.beta",
    "sweep.m",
    "sweep.delta",
    "sweep.lambda",
    "sweep.big_lambda",
    "sweep.eps0",
    "sweep.mq",
    "sweep.seed",
    "suite.experiments",
    "output.dir",
];

fn shorthand(key: &str) -> Option<&'static str> {
    match key {
        "experiment" => Some("experiment"),
        "domain" => Some("domain.kind"),
        "eps" => Some("density.eps"),
        "spacing" => Some("grid.spacing"),
        "output" => Some("output.dir"),
        _ => None,
    }
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(s: &str) -> Result<String, String> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix('"') {
        rest.strip_suffix('"')
            .map(str::to_string)
            .ok_or_else(|| format!("unterminated string {s}"))
    } else if s.is_empty() {
        Err("empty value".into())
    } else if s.contains(char::is_whitespace) {
        Err(format!("unquoted value `{s}` contains whitespace"))
    } else {
        Ok(s.to_string())
    }
}

fn parse_value(raw: &str) -> Result<Value, String> {
    let raw = raw.trim();
    if let Some(inner) = raw.strip_prefix('[') {
        let inner = inner
            .strip_suffix(']')
            .ok_or_else(|| format!("unterminated list {raw}"))?;
        if inner.trim().is_empty() {
            return Ok(Value::List(Vec::new()));
        }
        inner
            .split(',')
            .map(unquote)
            .collect::<Result<Vec<_>, _>>()
            .map(Value::List)
    } else {
        unquote(raw).map(Value::Scalar)
    }
}

fn lex(text: &str, errors: &mut Vec<ConfigError>) -> BTreeMap<String, Entry> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            match name.strip_suffix(']').map(str::trim) {
                Some(n)
                    if ["domain", "grid", "density", "solver", "sweep", "suite", "output"]
                        .contains(&n) =>
                {
                    section = Some(n.to_string());
                }
                Some(n) => {
                    errors.push(ConfigError {
                        line: Some(line),
                        message: format!("unknown section [{n}]"),
                    });
                    section = Some(n.to_string());
                }
                None => errors.push(ConfigError {
                    line: Some(line),
                    message: format!("malformed section header `{body}`"),
                }),
            }
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            errors.push(ConfigError {
                line: Some(line),
                message: format!("expected `key = value`, found `{body}`"),
            });
            continue;
        };
        let key = key.trim();
        let canonical = match &section {
            None => match shorthand(key) {
                Some(c) => c.to_string(),
                None => {
                    errors.push(ConfigError {
                        line: Some(line),
                        message: format!("unknown key `{key}`"),
                    });
                    continue;
                }
            },
            Some(s) => format!("{s}.{key}"),
        };
        if section.is_some() && !KNOWN_KEYS.contains(&canonical.as_str()) {
            errors.push(ConfigError {
                line: Some(line),
                message: format!("unknown key `{canonical}`"),
            });
            continue;
        }
        let value = match parse_value(value) {
            Ok(v) => v,
            Err(msg) => {
                errors.push(ConfigError {
                    line: Some(line),
                    message: format!("`{canonical}`: {msg}"),
                });
                continue;
            }
        };
        if let Some(prev) = entries.get(&canonical) {
            errors.push(ConfigError {
                line: Some(line),
                message: format!(
                    "duplicate key `{canonical}` on lines {} and {line}",
                    prev.line
                ),
            });
            continue;
        }
        entries.insert(canonical, Entry { line, value });
    }
    entries
}

struct Reader {
    entries: BTreeMap<String, Entry>,
    errors: Vec<ConfigError>,
}

impl Reader {
    fn fail(&mut self, key: &str, message: String) {
        let line = self.entries.get(key).map(|e| e.line);
        self.errors.push(ConfigError {
            line,
            message: format!("`{key}`: {message}"),
        });
    }

    fn scalar(&mut self, key: &str) -> Option<String> {
        match self.entries.get(key).map(|e| e.value.clone()) {
            None => None,
            Some(Value::Scalar(s)) => Some(s),
            Some(Value::List(_)) => {
                self.fail(key, "expected a single value, found a list".into());
                None
            }
        }
    }

    fn list(&mut self, key: &str) -> Option<Vec<String>> {
        match self.entries.get(key).map(|e| e.value.clone()) {
            None => None,
            Some(Value::List(v)) => Some(v),
            Some(Value::Scalar(s)) => Some(vec![s]),
        }
    }

    fn number(&mut self, key: &str, target: &mut f64) {
        if let Some(s) = self.scalar(key) {
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => *target = v,
                _ => self.fail(key, format!("`{s}` is not a finite number")),
            }
        }
    }

    fn numbers(&mut self, key: &str, target: &mut Vec<f64>) {
        if let Some(items) = self.list(key) {
            let mut out = Vec::with_capacity(items.len());
            for s in items {
                match s.parse::<f64>() {
                    Ok(v) if v.is_finite() => out.push(v),
                    _ => {
                        self.fail(key, format!("`{s}` is not a finite number"));
                        return;
                    }
                }
            }
            *target = out;
        }
    }

    fn integer<T: std::str::FromStr>(&mut self, key: &str, target: &mut T) {
        if let Some(s) = self.scalar(key) {
            match s.parse::<T>() {
                Ok(v) => *target = v,
                Err(_) => self.fail(key, format!("`{s}` is not a non-negative integer")),
            }
        }
    }

    fn check(&mut self, key: &str, ok: bool, message: &str) {
        if !ok {
            self.fail(key, message.to_string());
        }
    }
}

/// Parse and validate a configuration, reporting every error found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let entries = lex(text, &mut errors);
    let mut r = Reader { entries, errors };

    let experiment = match r.scalar("experiment") {
        None => {
            if !r.entries.contains_key("experiment") {
                r.errors.push(ConfigError {
                    line: None,
                    message: "missing required key `experiment`".into(),
                });
            }
            None
        }
        Some(name) => match Experiment::from_name(&name) {
            Some(e) => Some(e),
            None => {
                r.fail("experiment", format!("unknown experiment `{name}`"));
                None
            }
        },
    };
    let mut cfg = ExperimentConfig::new(experiment.unwrap_or(Experiment::Suite));

    // domain
    let kind = r.scalar("domain.kind").unwrap_or_else(|| "disc".into());
    let mut radius = 1.0;
    let mut a = 1.0;
    let mut b = 0.7;
    let mut half_side = 1.0;
    let mut exponent = 4.0;
    r.number("domain.radius", &mut radius);
    r.number("domain.a", &mut a);
    r.number("domain.b", &mut b);
    r.number("domain.half_side", &mut half_side);
    r.number("domain.exponent", &mut exponent);
    let mut flat = Vec::new();
    r.numbers("domain.vertices", &mut flat);
    let allowed: &[&str] = match kind.as_str() {
        "disc" => &["domain.radius"],
        "ellipse" => &["domain.a", "domain.b"],
        "square" => &["domain.half_side"],
        "superellipse" => &["domain.a", "domain.b", "domain.exponent"],
        "polygon" => &["domain.vertices"],
        other => {
            r.fail("domain.kind", format!("unknown domain kind `{other}`"));
            &[]
        }
    };
    for key in ["domain.radius", "domain.a", "domain.b", "domain.half_side", "domain.exponent", "domain.vertices"] {
        if r.entries.contains_key(key) && !allowed.contains(&key) && !allowed.is_empty() {
            r.fail(key, format!("not a parameter of domain kind `{kind}`"));
        }
    }
    cfg.domain = match kind.as_str() {
        "ellipse" => DomainSpec::Ellipse { a, b },
        "square" => DomainSpec::Square { half_side },
        "superellipse" => DomainSpec::Superellipse { a, b, exponent },
        "polygon" => {
            if flat.len() < 6 || flat.len() % 2 != 0 {
                r.fail(
                    "domain.vertices",
                    "need an even number of coordinates for at least three vertices".into(),
                );
            }
            DomainSpec::Polygon {
                vertices: flat.chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
            }
        }
        _ => DomainSpec::Disc { radius },
    };

    // grid
    if r.entries.contains_key("grid.spacing") && r.entries.contains_key("grid.spacings") {
        r.fail("grid.spacings", "give either `spacing` or `spacings`, not both".into());
    }
    if r.entries.contains_key("grid.spacing") {
        let mut h = 0.0;
        r.number("grid.spacing", &mut h);
        cfg.spacings = vec![h];
    }
    r.numbers("grid.spacings", &mut cfg.spacings);
    let spacing_key = if r.entries.contains_key("grid.spacings") {
        "grid.spacings"
    } else {
        "grid.spacing"
    };
    let ok = !cfg.spacings.is_empty() && cfg.spacings.iter().all(|&h| h > 0.0);
    r.check(spacing_key, ok, "spacings must be positive and non-empty");

    // density
    r.number("density.eps", &mut cfg.density.eps);
    let ok = (0.0..0.5).contains(&cfg.density.eps);
    r.check("density.eps", ok, "must lie in [0, 0.5)");
    if let Some(g0) = r.scalar("density.g0") {
        match g0.as_str() {
            "sin" => cfg.density.g0 = G0Form::Sin,
            "constant" => cfg.density.g0 = G0Form::Constant,
            other => r.fail("density.g0", format!("unknown form `{other}`, expected sin or constant")),
        }
    }

    // solver
    r.number("solver.tol_ma", &mut cfg.solver.tol_ma);
    r.integer("solver.max_iter", &mut cfg.solver.max_iter);
    r.number("solver.damping_min", &mut cfg.solver.damping_min);
    r.number("solver.tol_convex_rel", &mut cfg.solver.tol_convex_rel);
    let s = cfg.solver.clone();
    r.check("solver.tol_ma", s.tol_ma > 0.0, "tolerance must be positive");
    r.check("solver.max_iter", s.max_iter > 0, "must be positive");
    r.check("solver.damping_min", s.damping_min > 0.0 && s.damping_min <= 1.0, "must lie in (0, 1]");
    r.check("solver.tol_convex_rel", s.tol_convex_rel > 0.0, "tolerance must be positive");

    // sweep
    let w = &mut cfg.sweep;
    r.numbers("sweep.eps", &mut w.eps);
    r.number("sweep.p", &mut w.p);
    r.number("sweep.q", &mut w.q);
    r.numbers("sweep.gamma", &mut w.gamma);
    r.number("sweep.sigma", &mut w.sigma);
    r.numbers("sweep.beta", &mut w.beta);
    r.number("sweep.m", &mut w.m);
    r.number("sweep.delta", &mut w.delta);
    r.numbers("sweep.lambda", &mut w.lambda);
    r.numbers("sweep.big_lambda", &mut w.big_lambda);
    r.number("sweep.eps0", &mut w.eps0);
    r.number("sweep.mq", &mut w.mq);
    r.integer("sweep.seed", &mut w.seed);
    let w = cfg.sweep.clone();
    r.check("sweep.eps", !w.eps.is_empty() && w.eps.iter().all(|e| (0.0..0.5).contains(e)), "values must lie in [0, 0.5)");
    r.check("sweep.p", w.p > 0.0, "must be positive");
    r.check("sweep.q", w.q > 0.0, "must be positive");
    r.check("sweep.gamma", w.gamma.iter().all(|&g| g > 0.0), "values must be positive");
    r.check("sweep.sigma", w.sigma > 0.0, "must be positive");
    r.check("sweep.beta", w.beta.iter().all(|&b| b > 0.0), "values must be positive");
    r.check("sweep.m", w.m > 1.0, "must exceed 1");
    r.check("sweep.delta", w.delta > 0.0, "must be positive");
    r.check(
        "sweep.big_lambda",
        w.lambda.len() == w.big_lambda.len()
            && w.lambda.iter().zip(&w.big_lambda).all(|(&l, &u)| l > 0.0 && u >= l),
        "must pair with `lambda` entry by entry, with 0 < lambda <= big_lambda",
    );
    r.check("sweep.eps0", w.eps0 > 0.0 && w.eps0 < 0.5, "must lie in (0, 0.5)");
    r.check("sweep.mq", w.mq > 0.0, "must be positive");

    // suite and output
    if let Some(names) = r.list("suite.experiments") {
        let mut list = Vec::new();
        for n in names {
            match Experiment::from_name(&n) {
                Some(Experiment::Suite) => r.fail("suite.experiments", "a suite cannot contain itself".into()),
                Some(e) => list.push(e),
                None => r.fail("suite.experiments", format!("unknown experiment `{n}`")),
            }
        }
        cfg.suite = list;
    }
    cfg.output = r.scalar("output.dir");

    let mut errors = r.errors;
    if errors.is_empty() {
        Ok(cfg)
    } else {
        errors.sort_by_key(|e| e.line.unwrap_or(0));
        Err(ConfigErrors(errors))
    }
}

fn list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", items.join(", "))
}

/// Canonical text of a configuration; `parse_config` inverts it.
pub fn emit_config(cfg: &ExperimentConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment = {}", cfg.experiment);
    let _ = writeln!(s, "\n[domain]\nkind = {}", cfg.domain.kind());
    match &cfg.domain {
        DomainSpec::Disc { radius } => {
            let _ = writeln!(s, "radius = {radius:?}");
        }
        DomainSpec::Ellipse { a, b } => {
            let _ = writeln!(s, "a = {a:?}\nb = {b:?}");
        }
        DomainSpec::Square { half_side } => {
            let _ = writeln!(s, "half_side = {half_side:?}");
        }
        DomainSpec::Superellipse { a, b, exponent } => {
            let _ = writeln!(s, "a = {a:?}\nb = {b:?}\nexponent = {exponent:?}");
        }
        DomainSpec::Polygon { vertices } => {
            let flat: Vec<f64> = vertices.iter().flat_map(|v| [v[0], v[1]]).collect();
            let _ = writeln!(s, "vertices = {}", list(&flat));
        }
    }
    let _ = writeln!(s, "\n[grid]\nspacings = {}", list(&cfg.spacings));
    let _ = writeln!(
        s,
        "\n[density]\neps = {:?}\ng0 = {}",
        cfg.density.eps,
        cfg.density.g0.name()
    );
    let v = &cfg.solver;
    let _ = writeln!(
        s,
        "\n[solver]\ntol_ma = {:?}\nmax_iter = {}\ndamping_min = {:?}\ntol_convex_rel = {:?}",
        v.tol_ma, v.max_iter, v.damping_min, v.tol_convex_rel
    );
    let w = &cfg.sweep;
    let _ = writeln!(s, "\n[sweep]");
    let _ = writeln!(s, "eps = {}", list(&w.eps));
    let _ = writeln!(s, "p = {:?}\nq = {:?}", w.p, w.q);
    let _ = writeln!(s, "gamma = {}", list(&w.gamma));
    let _ = writeln!(s, "sigma = {:?}", w.sigma);
    let _ = writeln!(s, "beta = {}", list(&w.beta));
    let _ = writeln!(s, "m = {:?}\ndelta = {:?}", w.m, w.delta);
    let _ = writeln!(s, "lambda = {}", list(&w.lambda));
    let _ = writeln!(s, "big_lambda = {}", list(&w.big_lambda));
    let _ = writeln!(s, "eps0 = {:?}\nmq = {:?}\nseed = {}", w.eps0, w.mq, w.seed);
    let names: Vec<&str> = cfg.suite.iter().map(|e| e.name()).collect();
    let _ = writeln!(s, "\n[suite]\nexperiments = [{}]", names.join(", "));
    if let Some(dir) = &cfg.output {
        let _ = writeln!(s, "\n[output]\ndir = \"{dir}\"");
    }
    s
}
