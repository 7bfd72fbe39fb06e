//! Run configuration: per-experiment parameter schemas, JSON config files and
//! command-line flags. Precedence is defaults < file < flags.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgAction, ArgMatches, Command};
use serde_json::{json, Map, Value as Json};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    Decay,
    SchattenScan,
    Semiclassical,
    Noncompact,
    TranslateScaling,
    Decoupling,
    Orthonormal,
    Refined,
    Region,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Decay,
        Experiment::SchattenScan,
        Experiment::Semiclassical,
        Experiment::Noncompact,
        Experiment::TranslateScaling,
        Experiment::Decoupling,
        Experiment::Orthonormal,
        Experiment::Refined,
        Experiment::Region,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Decay => "decay",
            Experiment::SchattenScan => "schatten-scan",
            Experiment::Semiclassical => "semiclassical",
            Experiment::Noncompact => "noncompact",
            Experiment::TranslateScaling => "translate-scaling",
            Experiment::Decoupling => "decoupling",
            Experiment::Orthonormal => "orthonormal",
            Experiment::Refined => "refined",
            Experiment::Region => "region",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    fn about(self) -> &'static str {
        match self {
            Experiment::Decay => "Decay of the Fourier transform of surface measure",
            Experiment::SchattenScan => "Schatten norms of W T_S W for dilated Gaussian weights",
            Experiment::Semiclassical => "Spectrum of the semiclassical kernel as h shrinks",
            Experiment::Noncompact => "Non-compactness probe for time-independent potentials",
            Experiment::TranslateScaling => "Trace powers of time-translated bump potentials",
            Experiment::Decoupling => "Decay of A_v U(t) A_v in Schatten norm",
            Experiment::Orthonormal => "Orthonormal-system extension inequality on the circle",
            Experiment::Refined => "Refined Strichartz chain over a random family",
            Experiment::Region => "Classify mixed exponents (d, q, alpha)",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(u64),
    Float(f64),
    IntList(Vec<u64>),
    FloatList(Vec<f64>),
    Text(String),
}

impl Value {
    pub fn to_json(&self) -> Json {
        fn num(v: f64) -> Json {
            if v.is_infinite() {
                Json::String(if v > 0.0 { "inf" } else { "-inf" }.into())
            } else {
                json!(v)
            }
        }
        match self {
            Value::Int(v) => json!(v),
            Value::Float(v) => num(*v),
            Value::IntList(v) => json!(v),
            Value::FloatList(v) => Json::Array(v.iter().map(|x| num(*x)).collect()),
            Value::Text(s) => json!(s),
        }
    }

    fn render(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Float(v) => v.to_string(),
            Value::IntList(v) => v.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
            Value::FloatList(v) => v.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
            Value::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Int { min: u64 },
    /// Finite unless `allow_inf`; `min` is inclusive unless `strict`.
    Float { min: f64, strict: bool, allow_inf: bool },
    IntList { min: u64 },
    FloatList { min: f64, strict: bool },
    Choice(&'static [&'static str]),
}

struct ParamSpec {
    name: &'static str,
    kind: Kind,
    default: Option<Value>,
    help: &'static str,
}

fn int(name: &'static str, min: u64, default: Option<u64>, help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind: Kind::Int { min },
        default: default.map(Value::Int),
        help,
    }
}

fn positive(name: &'static str, default: Option<f64>, help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind: Kind::Float { min: 0.0, strict: true, allow_inf: false },
        default: default.map(Value::Float),
        help,
    }
}

fn at_least(name: &'static str, min: f64, default: Option<f64>, help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind: Kind::Float { min, strict: false, allow_inf: false },
        default: default.map(Value::Float),
        help,
    }
}

fn ints(name: &'static str, min: u64, default: &[u64], help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind: Kind::IntList { min },
        default: Some(Value::IntList(default.to_vec())),
        help,
    }
}

fn positives(name: &'static str, default: &[f64], help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind: Kind::FloatList { min: 0.0, strict: true },
        default: Some(Value::FloatList(default.to_vec())),
        help,
    }
}

fn choice(name: &'static str, options: &'static [&'static str], default: &str, help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind: Kind::Choice(options),
        default: Some(Value::Text(default.into())),
        help,
    }
}

fn schema(exp: Experiment) -> Vec<ParamSpec> {
    let mut specs = match exp {
        Experiment::Decay => vec![
            choice("surface", &["circle", "sphere", "flat"], "circle", "surface to integrate over"),
            int("nodes", 8, Some(512), "quadrature nodes"),
            positive("half_length", Some(1.0), "half-length of the flat segment"),
            positive("r_min", Some(10.0), "smallest radius"),
            positive("r_max", Some(100.0), "largest radius"),
            int("radii", 2, Some(12), "number of log-spaced radii"),
            int("directions", 1, Some(8), "number of sample directions"),
        ],
        Experiment::SchattenScan => vec![
            choice("surface", &["circle", "sphere"], "circle", "surface"),
            int("nodes", 8, Some(64), "quadrature nodes"),
            int("points", 2, Some(32), "grid points per axis"),
            positive("box", Some(16.0), "grid half-width L"),
            positives("widths", &[0.5, 1.0, 1.5, 2.0], "Gaussian weight widths"),
            at_least("p", 1.0, Some(1.0), "Lebesgue exponent p of the restriction estimate"),
        ],
        Experiment::Semiclassical => vec![
            choice("surface", &["circle", "sphere"], "circle", "surface"),
            int("nodes", 8, Some(1024), "quadrature nodes"),
            positives("h_list", &[0.1, 0.05, 0.025, 0.0125, 0.01], "semiclassical parameters h"),
            at_least("p", 1.0, Some(1.0), "Lebesgue exponent p for the Schatten index α(p)"),
        ],
        Experiment::Noncompact => vec![
            int("points", 2, Some(128), "grid points"),
            positive("box", Some(16.0), "grid half-width L"),
            int("time_steps", 2, Some(2048), "time cells per revival period"),
            positive("tau", Some(1.0), "time step between probes"),
            ints("n_list", 0, &[0, 1, 2, 3, 4, 5, 6, 7, 8], "probe indices n"),
        ],
        Experiment::TranslateScaling | Experiment::Decoupling => {
            let mut v = vec![
                int("points", 2, Some(512), "grid points"),
                positive("box", Some(256.0), "grid half-width L"),
                positive("dt", Some(0.02), "time step of the bump"),
                positive("width", Some(0.7), "spatial width of the bump"),
            ];
            if exp == Experiment::TranslateScaling {
                v.push(ints("n_list", 1, &[1, 2, 4, 8], "copy counts N"));
                v.push(positives("t_schedule", &[4.0, 8.0, 16.0, 32.0, 64.0], "separations T"));
            } else {
                v.push(ParamSpec {
                    name: "t_list",
                    kind: Kind::FloatList { min: 0.0, strict: false },
                    default: Some(Value::FloatList(vec![0.0, 4.0, 8.0, 16.0, 32.0, 64.0])),
                    help: "evolution times t",
                });
            }
            v
        }
        Experiment::Orthonormal => vec![
            int("nodes", 8, Some(2048), "circle nodes"),
            ints("m_list", 1, &[1, 2, 4, 8, 16, 32, 64], "system sizes M"),
            at_least("p", 1.0, Some(1.2), "Lebesgue exponent p"),
            positive("radius", Some(640.0), "truncation disc radius"),
            positive("dr", Some(0.25), "radial step"),
            int("directions", 1, Some(4), "rays per quarter turn"),
        ],
        Experiment::Refined => vec![
            int("members", 1, Some(200), "family size"),
            positive("box", Some(8.0 * PI), "grid half-width L"),
            int("coarse_points", 2, Some(256), "points of the coarse grid"),
            int("fine_points", 2, Some(512), "points of the fine grid"),
            positive("t_half", Some(0.5), "half-length of the time window"),
            positive("dt", Some(0.005), "time step"),
            at_least("q", 2.0, Some(6.0), "spatial exponent q"),
        ],
        Experiment::Region => vec![
            int("d", 1, None, "spatial dimension"),
            at_least("q", 1.0, None, "spatial exponent q (single query)"),
            ParamSpec {
                name: "alpha",
                kind: Kind::Float { min: 1.0, strict: false, allow_inf: true },
                default: None,
                help: "Schatten exponent alpha, or inf (single query)",
            },
            positive("q_max", None, "upper end of the q sweep (default 2d + 4)"),
            at_least("alpha_max", 1.0, Some(40.0), "upper end of the alpha sweep"),
            int("steps", 2, Some(50), "grid points per axis of the sweep"),
        ],
    };
    specs.push(int("seed", 0, Some(0), "random seed"));
    specs
}

/// A validated run request.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub parameters: BTreeMap<String, Value>,
    pub output_path: Option<PathBuf>,
    pub emit_plot: bool,
}

impl RunConfig {
    pub fn seed(&self) -> u64 {
        match self.parameters.get("seed") {
            Some(Value::Int(s)) => *s,
            _ => 0,
        }
    }

    pub(crate) fn get(&self, key: &str) -> Option<&Value> {
        self.parameters.get(key)
    }

    pub(crate) fn int(&self, key: &str) -> u64 {
        match self.parameters.get(key) {
            Some(Value::Int(v)) => *v,
            other => panic!("parameter {key} is not an integer: {other:?}"),
        }
    }

    pub(crate) fn float(&self, key: &str) -> f64 {
        match self.parameters.get(key) {
            Some(Value::Float(v)) => *v,
            other => panic!("parameter {key} is not a real: {other:?}"),
        }
    }

    pub(crate) fn ints(&self, key: &str) -> Vec<u64> {
        match self.parameters.get(key) {
            Some(Value::IntList(v)) => v.clone(),
            other => panic!("parameter {key} is not an integer list: {other:?}"),
        }
    }

    pub(crate) fn floats(&self, key: &str) -> Vec<f64> {
        match self.parameters.get(key) {
            Some(Value::FloatList(v)) => v.clone(),
            other => panic!("parameter {key} is not a real list: {other:?}"),
        }
    }

    pub(crate) fn text(&self, key: &str) -> &str {
        match self.parameters.get(key) {
            Some(Value::Text(v)) => v,
            other => panic!("parameter {key} is not text: {other:?}"),
        }
    }

    /// The config as a JSON document accepted by `--config`.
    pub fn to_json(&self) -> Json {
        let params: Map<String, Json> = self
            .parameters
            .iter()
            .map(|(k, v)| (k.clone(), v.to_json()))
            .collect();
        let mut doc = Map::new();
        doc.insert("experiment".into(), json!(self.experiment.name()));
        doc.insert("parameters".into(), Json::Object(params));
        if let Some(p) = &self.output_path {
            doc.insert("out".into(), json!(p.to_string_lossy()));
        }
        doc.insert("emit_plot".into(), json!(self.emit_plot));
        Json::Object(doc)
    }
}

fn flag(name: &str) -> String {
    name.replace('_', "-")
}

fn subcommand(exp: Experiment) -> Command {
    let mut cmd = Command::new(exp.name())
        .about(exp.about())
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("PATH")
                .help("JSON config file; flags override its values"),
        )
        .arg(Arg::new("out").long("out").value_name("PATH").help("CSV output path (stdout if absent)"))
        .arg(
            Arg::new("emit-plot")
                .long("emit-plot")
                .action(ArgAction::SetTrue)
                .help("write a gnuplot script next to the CSV"),
        );
    for spec in schema(exp) {
        cmd = cmd.arg(
            Arg::new(spec.name)
                .long(flag(spec.name))
                .value_name("VALUE")
                .allow_hyphen_values(true)
                .help(spec.help),
        );
    }
    cmd
}

pub fn command() -> Command {
    let mut cmd = Command::new("schatten-lab")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Numerical experiments on Schatten-class restriction and Strichartz estimates")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for exp in Experiment::ALL {
        cmd = cmd.subcommand(subcommand(exp));
    }
    cmd.subcommand(
        Command::new("replay")
            .about("Re-run the configuration recorded in a CSV written by this tool")
            .arg(Arg::new("csv").required(true).value_name("CSV"))
            .arg(Arg::new("out").long("out").value_name("PATH").help("CSV output path (stdout if absent)")),
    )
}

fn ill_typed(key: &str, expected: &str, got: impl fmt::Display) -> CliError {
    CliError::Config(format!("parameter `{key}`: expected {expected}, got {got}"))
}

fn check_float(key: &str, v: f64, min: f64, strict: bool, allow_inf: bool) -> Result<f64, CliError> {
    if v.is_nan() || (v.is_infinite() && !(allow_inf && v > 0.0)) {
        return Err(ill_typed(key, "a finite real", v));
    }
    let ok = if strict { v > min } else { v >= min };
    if !ok {
        let rel = if strict { ">" } else { "≥" };
        return Err(CliError::Config(format!("parameter `{key}`: must be {rel} {min}, got {v}")));
    }
    Ok(v)
}

fn check_int(key: &str, v: u64, min: u64) -> Result<u64, CliError> {
    if v < min {
        return Err(CliError::Config(format!("parameter `{key}`: must be ≥ {min}, got {v}")));
    }
    Ok(v)
}

fn parse_float_text(key: &str, s: &str) -> Result<f64, CliError> {
    match s.trim() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|_| ill_typed(key, "a real number", format!("`{s}`"))),
    }
}

fn parse_int_text(key: &str, s: &str) -> Result<u64, CliError> {
    s.trim()
        .parse::<u64>()
        .map_err(|_| ill_typed(key, "a nonnegative integer", format!("`{s}`")))
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

fn from_flag(spec: &ParamSpec, raw: &str) -> Result<Value, CliError> {
    let key = spec.name;
    Ok(match spec.kind {
        Kind::Int { min } => Value::Int(check_int(key, parse_int_text(key, raw)?, min)?),
        Kind::Float { min, strict, allow_inf } => {
            Value::Float(check_float(key, parse_float_text(key, raw)?, min, strict, allow_inf)?)
        }
        Kind::IntList { min } => Value::IntList(
            split_list(raw)
                .map(|t| parse_int_text(key, t).and_then(|v| check_int(key, v, min)))
                .collect::<Result<_, _>>()?,
        ),
        Kind::FloatList { min, strict } => Value::FloatList(
            split_list(raw)
                .map(|t| parse_float_text(key, t).and_then(|v| check_float(key, v, min, strict, false)))
                .collect::<Result<_, _>>()?,
        ),
        Kind::Choice(options) => {
            if !options.contains(&raw) {
                return Err(ill_typed(key, &format!("one of {}", options.join("|")), format!("`{raw}`")));
            }
            Value::Text(raw.to_string())
        }
    })
}

fn json_float(key: &str, v: &Json) -> Result<f64, CliError> {
    match v {
        Json::Number(n) => n.as_f64().ok_or_else(|| ill_typed(key, "a real number", n)),
        Json::String(s) if s == "inf" => Ok(f64::INFINITY),
        other => Err(ill_typed(key, "a real number", other)),
    }
}

fn json_int(key: &str, v: &Json) -> Result<u64, CliError> {
    v.as_u64().ok_or_else(|| ill_typed(key, "a nonnegative integer", v))
}

fn from_json(spec: &ParamSpec, v: &Json) -> Result<Value, CliError> {
    let key = spec.name;
    let list = |v: &Json| -> Result<Vec<Json>, CliError> {
        v.as_array().cloned().ok_or_else(|| ill_typed(key, "an array", v))
    };
    Ok(match spec.kind {
        Kind::Int { min } => Value::Int(check_int(key, json_int(key, v)?, min)?),
        Kind::Float { min, strict, allow_inf } => {
            Value::Float(check_float(key, json_float(key, v)?, min, strict, allow_inf)?)
        }
        Kind::IntList { min } => Value::IntList(
            list(v)?
                .iter()
                .map(|x| json_int(key, x).and_then(|i| check_int(key, i, min)))
                .collect::<Result<_, _>>()?,
        ),
        Kind::FloatList { min, strict } => Value::FloatList(
            list(v)?
                .iter()
                .map(|x| json_float(key, x).and_then(|f| check_float(key, f, min, strict, false)))
                .collect::<Result<_, _>>()?,
        ),
        Kind::Choice(options) => match v.as_str() {
            Some(s) if options.contains(&s) => Value::Text(s.to_string()),
            _ => return Err(ill_typed(key, &format!("one of {}", options.join("|")), v)),
        },
    })
}

struct FileConfig {
    parameters: Map<String, Json>,
    out: Option<PathBuf>,
    emit_plot: Option<bool>,
}

fn read_config_file(path: &Path, exp: Experiment) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let doc: Json = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config {} is not valid JSON: {e}", path.display())))?;
    config_from_json(&doc, exp)
}

fn config_from_json(doc: &Json, exp: Experiment) -> Result<FileConfig, CliError> {
    let Some(obj) = doc.as_object() else {
        return Err(CliError::Config("config must be a JSON object".into()));
    };
    let mut file = FileConfig {
        parameters: Map::new(),
        out: None,
        emit_plot: None,
    };
    for (key, value) in obj {
        match key.as_str() {
            "experiment" => match value.as_str().and_then(Experiment::from_name) {
                Some(e) if e == exp => {}
                Some(e) => {
                    return Err(CliError::Config(format!(
                        "key `experiment`: config is for `{e}`, not `{exp}`"
                    )))
                }
                None => return Err(CliError::Config(format!("key `experiment`: unknown experiment {value}"))),
            },
            "parameters" => {
                file.parameters = value
                    .as_object()
                    .cloned()
                    .ok_or_else(|| ill_typed("parameters", "an object", value))?;
            }
            "out" => {
                file.out = Some(PathBuf::from(value.as_str().ok_or_else(|| ill_typed("out", "a path string", value))?));
            }
            "emit_plot" => {
                file.emit_plot = Some(value.as_bool().ok_or_else(|| ill_typed("emit_plot", "a boolean", value))?);
            }
            other => return Err(CliError::Config(format!("unknown config key `{other}`"))),
        }
    }
    Ok(file)
}

/// Builds a [`RunConfig`] from an experiment's subcommand matches.
pub fn config_from_matches(exp: Experiment, m: &ArgMatches) -> Result<RunConfig, CliError> {
    let specs = schema(exp);
    let file = match m.get_one::<String>("config") {
        Some(path) => Some(read_config_file(Path::new(path), exp)?),
        None => None,
    };
    let mut parameters = BTreeMap::new();
    if let Some(file) = &file {
        for (key, value) in &file.parameters {
            let spec = specs
                .iter()
                .find(|s| s.name == key)
                .ok_or_else(|| CliError::Config(format!("unknown parameter `{key}` for `{exp}`")))?;
            parameters.insert(key.clone(), from_json(spec, value)?);
        }
    }
    for spec in &specs {
        if let Some(raw) = m.get_one::<String>(spec.name) {
            parameters.insert(spec.name.to_string(), from_flag(spec, raw)?);
        }
        if !parameters.contains_key(spec.name) {
            if let Some(d) = &spec.default {
                parameters.insert(spec.name.to_string(), d.clone());
            }
        }
    }
    let output_path = m
        .get_one::<String>("out")
        .map(PathBuf::from)
        .or_else(|| file.as_ref().and_then(|f| f.out.clone()));
    let emit_plot = m.get_flag("emit-plot") || file.as_ref().and_then(|f| f.emit_plot).unwrap_or(false);
    let config = RunConfig {
        experiment: exp,
        parameters,
        output_path,
        emit_plot,
    };
    validate(&config)?;
    Ok(config)
}

fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing required parameter `{key}`"))
}

fn require(cond: bool, key: &str, reason: &str) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(format!("parameter `{key}`: {reason}")))
    }
}

/// Cross-parameter checks that need more than one value.
fn validate(c: &RunConfig) -> Result<(), CliError> {
    for (key, value) in &c.parameters {
        match value {
            Value::IntList(v) if v.is_empty() => return Err(CliError::Config(format!("parameter `{key}`: empty list"))),
            Value::FloatList(v) if v.is_empty() => return Err(CliError::Config(format!("parameter `{key}`: empty list"))),
            _ => {}
        }
    }
    match c.experiment {
        Experiment::Decay => {
            require(c.float("r_max") >= 10.0 * c.float("r_min"), "r_max", "radii must span at least one decade")?;
        }
        Experiment::Refined => {
            require(c.float("dt") < c.float("t_half"), "dt", "must be smaller than t_half")?;
            require(c.float("q") > 2.0, "q", "must exceed 2")?;
        }
        Experiment::Region => {
            if !c.parameters.contains_key("d") {
                return Err(missing("d"));
            }
            match (c.get("q").is_some(), c.get("alpha").is_some()) {
                (true, false) => return Err(missing("alpha")),
                (false, true) => return Err(missing("q")),
                _ => {}
            }
        }
        _ => {}
    }
    Ok(())
}

/// Parameters in flag form, for help text and provenance.
pub fn describe(c: &RunConfig) -> String {
    c.parameters
        .iter()
        .map(|(k, v)| format!("--{} {}", flag(k), v.render()))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Reconstructs a config from the JSON document written by [`RunConfig::to_json`].
pub fn config_from_document(doc: &Json) -> Result<RunConfig, CliError> {
    let name = doc
        .get("experiment")
        .and_then(Json::as_str)
        .ok_or_else(|| missing("experiment"))?;
    let exp = Experiment::from_name(name)
        .ok_or_else(|| CliError::Config(format!("key `experiment`: unknown experiment `{name}`")))?;
    let file = config_from_json(doc, exp)?;
    let specs = schema(exp);
    let mut parameters = BTreeMap::new();
    for (key, value) in &file.parameters {
        let spec = specs
            .iter()
            .find(|s| s.name == key)
            .ok_or_else(|| CliError::Config(format!("unknown parameter `{key}` for `{exp}`")))?;
        parameters.insert(key.clone(), from_json(spec, value)?);
    }
    for spec in &specs {
        if let (false, Some(d)) = (parameters.contains_key(spec.name), &spec.default) {
            parameters.insert(spec.name.to_string(), d.clone());
        }
    }
    let config = RunConfig {
        experiment: exp,
        parameters,
        output_path: file.out,
        emit_plot: file.emit_plot.unwrap_or(false),
    };
    validate(&config)?;
    Ok(config)
}
