//! Scan configuration: JSON schema, defaults and validation.
//!
//! A configuration file is either a single run object or
//! `{"base": {...}, "runs": [{...}, ...]}`, where each run is deep-merged
//! over `base`. Validation walks the whole document and reports every
//! problem it finds, each tagged with the JSON path of the offending field.
//!
//! Run object keys:
//!
//! | key            | type                              | default      |
//! |----------------|-----------------------------------|--------------|
//! | `label`        | string                            | none         |
//! | `Fg`, `Fe`     | number or `"p/2"` string          | required     |
//! | `b`            | branching ratio in `[0, 1]`       | `1`          |
//! | `gamma`        | transit rate, `> 0`               | `0.01`       |
//! | `zeeman_g`, `zeeman_e` | Zeeman shift per unit `m` | `0`          |
//! | `delta`        | detuning                          | required     |
//! | `omega_r`      | reduced Rabi frequency, `>= 0`    | required     |
//! | `polarization` | `"x"`, `"y"` or `{"x": [re, im], "y": [re, im]}` | `"x"` |
//! | `C`            | cooperativity, `>= 0`             | required     |
//! | `grid`         | `{omega_min, omega_max, count, spacing}` | `0`, `20`, `401`, `"linear"` |
//! | `analysis`     | `{basis, quadratures}`            | `"xy"`, `[0, pi/2]` |
//! | `doppler`      | `{fwhm, nodes, quadrature, span, tolerance, max_refinements}` | none |
//! | `decompose`    | bool                              | `false`      |
//! | `outputs`      | `{csv, manifest}`                 | derived      |

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use atomnoise_core::atomic::AngularMomentum;
use atomnoise_core::liouville::Polarization;
use atomnoise_core::propagation::DopplerSpec;
use atomnoise_core::quadrature::QuadratureKind;
use atomnoise_core::scalar::{CMatrix, C};
use atomnoise_core::spectra::AnalysisBasis;
use atomnoise_core::{Analysis, AtomSpec, DriveSpec, Error as CoreError, MediumSpec};
use serde_json::{json, Map, Value};

pub const DEFAULT_GAMMA: f64 = 0.01;

/// One validation problem, located by its JSON path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.omega_min + (self.omega_max - self.omega_min) * t,
                    Spacing::Log => self.omega_min * (self.omega_max / self.omega_min).powf(t),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisChoice {
    Xy,
    Pm45,
    Custom(CMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSpec {
    pub basis: BasisChoice,
    /// Amplitude and phase quadrature angles.
    pub quadratures: [f64; 2],
}

impl AnalysisSpec {
    pub fn analysis(&self) -> Analysis {
        let basis = match &self.basis {
            BasisChoice::Xy => AnalysisBasis::xy(0.0),
            BasisChoice::Pm45 => AnalysisBasis::pm45(0.0),
            BasisChoice::Custom(u) => AnalysisBasis::custom(u, 0.0).expect("validated unitary"),
        };
        Analysis {
            basis,
            theta_amp: self.quadratures[0],
            theta_phase: self.quadratures[1],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
}

/// A fully defaulted and validated scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub label: Option<String>,
    pub atom: AtomSpec,
    pub drive: DriveSpec,
    pub medium: MediumSpec,
    pub grid: GridSpec,
    pub analysis: AnalysisSpec,
    pub decompose: bool,
    pub outputs: Outputs,
}

impl ScanConfig {
    /// Canonical JSON form with every default filled in; parses back to the
    /// same configuration.
    pub fn to_json(&self) -> Value {
        let am = |j: AngularMomentum| {
            if j.twice() % 2 == 0 {
                json!(j.twice() / 2)
            } else {
                json!(format!("{}/2", j.twice()))
            }
        };
        let cplx = |z: C<f64>| json!([z.re, z.im]);
        let mut out = Map::new();
        if let Some(label) = &self.label {
            out.insert("label".into(), json!(label));
        }
        out.insert("Fg".into(), am(self.atom.fg));
        out.insert("Fe".into(), am(self.atom.fe));
        out.insert("b".into(), json!(self.atom.branching_ratio));
        out.insert("gamma".into(), json!(self.atom.transit_rate));
        out.insert("zeeman_g".into(), json!(self.atom.zeeman_ground));
        out.insert("zeeman_e".into(), json!(self.atom.zeeman_excited));
        out.insert("delta".into(), json!(self.drive.detuning));
        out.insert("omega_r".into(), json!(self.drive.rabi));
        let pol = self.drive.polarization;
        out.insert("polarization".into(), json!({"x": cplx(pol.x), "y": cplx(pol.y)}));
        out.insert("C".into(), json!(self.medium.cooperativity));
        out.insert(
            "grid".into(),
            json!({
                "omega_min": self.grid.omega_min,
                "omega_max": self.grid.omega_max,
                "count": self.grid.count,
                "spacing": match self.grid.spacing { Spacing::Linear => "linear", Spacing::Log => "log" },
            }),
        );
        let basis = match &self.analysis.basis {
            BasisChoice::Xy => json!("xy"),
            BasisChoice::Pm45 => json!("pm45"),
            BasisChoice::Custom(u) => json!([[cplx(u[(0, 0)]), cplx(u[(0, 1)])], [cplx(u[(1, 0)]), cplx(u[(1, 1)])]]),
        };
        out.insert("analysis".into(), json!({"basis": basis, "quadratures": self.analysis.quadratures}));
        if let Some(d) = &self.medium.doppler {
            let mut dop = json!({
                "fwhm": d.width_fwhm,
                "nodes": d.nodes,
                "tolerance": d.tolerance,
                "max_refinements": d.max_refinements,
            });
            match d.kind {
                QuadratureKind::GaussHermite => dop["quadrature"] = json!("gauss-hermite"),
                QuadratureKind::Uniform { span } => {
                    dop["quadrature"] = json!("uniform");
                    dop["span"] = json!(span);
                }
            }
            out.insert("doppler".into(), dop);
        }
        out.insert("decompose".into(), json!(self.decompose));
        let mut outputs = Map::new();
        if let Some(p) = &self.outputs.csv {
            outputs.insert("csv".into(), json!(p.display().to_string()));
        }
        if let Some(p) = &self.outputs.manifest {
            outputs.insert("manifest".into(), json!(p.display().to_string()));
        }
        if !outputs.is_empty() {
            out.insert("outputs".into(), Value::Object(outputs));
        }
        Value::Object(out)
    }
}

/// Validated contents of a configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub runs: Vec<ScanConfig>,
    /// True for `{"base", "runs"}` files.
    pub multi: bool,
}

/// Parses and validates a configuration document, returning either the
/// defaulted runs or every error found.
pub fn validate_config(text: &str) -> Result<ConfigFile, Vec<ConfigError>> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        vec![ConfigError {
            path: String::new(),
            message: format!("invalid JSON: {e}"),
        }]
    })?;
    validate_value(&value)
}

pub fn validate_value(value: &Value) -> Result<ConfigFile, Vec<ConfigError>> {
    let Some(obj) = value.as_object() else {
        return Err(vec![ConfigError {
            path: String::new(),
            message: "top level must be a JSON object".into(),
        }]);
    };
    let mut errors = Vec::new();
    if obj.contains_key("runs") || obj.contains_key("base") {
        let mut runs = Vec::new();
        for key in obj.keys() {
            if key != "runs" && key != "base" {
                errors.push(ConfigError {
                    path: key.clone(),
                    message: "unknown key (a multi-run file holds only `base` and `runs`)".into(),
                });
            }
        }
        let base = match obj.get("base") {
            None => Value::Object(Map::new()),
            Some(b @ Value::Object(_)) => b.clone(),
            Some(_) => {
                errors.push(err("base", "must be an object"));
                Value::Object(Map::new())
            }
        };
        match obj.get("runs") {
            Some(Value::Array(items)) if !items.is_empty() => {
                for (i, item) in items.iter().enumerate() {
                    let prefix = format!("runs[{i}]");
                    if !item.is_object() {
                        errors.push(err(&prefix, "must be an object"));
                        continue;
                    }
                    let mut merged = base.clone();
                    merge(&mut merged, item);
                    if let Some(run) = parse_run(&merged, &prefix, &mut errors) {
                        runs.push(run);
                    }
                }
            }
            Some(Value::Array(_)) => errors.push(err("runs", "must not be empty")),
            Some(_) => errors.push(err("runs", "must be an array")),
            None => errors.push(err("runs", "missing")),
        }
        if errors.is_empty() {
            let mut seen = BTreeSet::new();
            for (i, run) in runs.iter().enumerate() {
                match &run.label {
                    None => errors.push(err(&format!("runs[{i}].label"), "required in multi-run files")),
                    Some(label) if !seen.insert(label.clone()) => {
                        errors.push(err(&format!("runs[{i}].label"), &format!("duplicate label `{label}`")))
                    }
                    _ => {}
                }
            }
        }
        if errors.is_empty() {
            Ok(ConfigFile { runs, multi: true })
        } else {
            Err(errors)
        }
    } else {
        let run = parse_run(value, "", &mut errors);
        match run {
            Some(run) if errors.is_empty() => Ok(ConfigFile {
                runs: vec![run],
                multi: false,
            }),
            _ => Err(errors),
        }
    }
}

/// Recursive object merge; `overlay` wins on conflicts.
fn merge(target: &mut Value, overlay: &Value) {
    match (target, overlay) {
        (Value::Object(t), Value::Object(o)) => {
            for (k, v) in o {
                match t.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        t.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (t, o) => *t = o.clone(),
    }
}

fn err(path: &str, message: &str) -> ConfigError {
    ConfigError {
        path: path.to_string(),
        message: message.to_string(),
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

/// Reads keys out of one JSON object, remembering which were consumed so
/// the rest can be reported as unknown.
struct Fields<'a> {
    obj: &'a Map<String, Value>,
    prefix: String,
    used: BTreeSet<&'static str>,
}

impl<'a> Fields<'a> {
    fn new(value: &'a Value, prefix: &str, errors: &mut Vec<ConfigError>) -> Option<Self> {
        match value.as_object() {
            Some(obj) => Some(Self {
                obj,
                prefix: prefix.to_string(),
                used: BTreeSet::new(),
            }),
            None => {
                errors.push(err(prefix, "must be an object"));
                None
            }
        }
    }

    fn path(&self, key: &str) -> String {
        join(&self.prefix, key)
    }

    fn get(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.insert(key);
        self.obj.get(key)
    }

    fn number(&mut self, key: &'static str, default: Option<f64>, errors: &mut Vec<ConfigError>) -> Option<f64> {
        match self.get(key) {
            None => {
                if default.is_none() {
                    errors.push(err(&self.path(key), "missing required number"));
                }
                default
            }
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Some(x),
                _ => {
                    errors.push(err(&self.path(key), &format!("expected a finite number, got {v}")));
                    None
                }
            },
        }
    }

    fn count(&mut self, key: &'static str, default: usize, errors: &mut Vec<ConfigError>) -> Option<usize> {
        match self.get(key) {
            None => Some(default),
            Some(v) => match v.as_u64() {
                Some(n) => Some(n as usize),
                None => {
                    errors.push(err(&self.path(key), &format!("expected a non-negative integer, got {v}")));
                    None
                }
            },
        }
    }

    fn string(&mut self, key: &'static str, errors: &mut Vec<ConfigError>) -> Option<&'a str> {
        match self.get(key) {
            None => None,
            Some(Value::String(s)) => Some(s),
            Some(v) => {
                errors.push(err(&self.path(key), &format!("expected a string, got {v}")));
                None
            }
        }
    }

    fn finish(self, errors: &mut Vec<ConfigError>) {
        for key in self.obj.keys() {
            if !self.used.contains(key.as_str()) {
                errors.push(err(&self.path(key), "unknown key"));
            }
        }
    }
}

fn angular_momentum(f: &mut Fields, key: &'static str, errors: &mut Vec<ConfigError>) -> Option<AngularMomentum> {
    let path = f.path(key);
    let parsed = match f.get(key) {
        None => {
            errors.push(err(&path, "missing required angular momentum"));
            return None;
        }
        Some(Value::Number(n)) => AngularMomentum::from_f64(n.as_f64().unwrap_or(f64::NAN)),
        Some(Value::String(s)) => s.parse::<AngularMomentum>(),
        Some(v) => {
            errors.push(err(&path, &format!("expected a number or a string like \"3/2\", got {v}")));
            return None;
        }
    };
    parsed.map_err(|e| errors.push(err(&path, &e.to_string()))).ok()
}

fn complex(v: &Value) -> Option<C<f64>> {
    match v {
        Value::Number(n) => Some(C::new(n.as_f64()?, 0.0)),
        Value::Array(a) if a.len() == 2 => Some(C::new(a[0].as_f64()?, a[1].as_f64()?)),
        _ => None,
    }
}

fn polarization(value: Option<&Value>, path: &str, errors: &mut Vec<ConfigError>) -> Option<Polarization<f64>> {
    let pol = match value {
        None => return Some(Polarization::linear_x()),
        Some(Value::String(s)) => match s.as_str() {
            "x" => Polarization::linear_x(),
            "y" => Polarization::linear_x().orthogonal(),
            other => {
                errors.push(err(path, &format!("unknown polarization `{other}` (expected \"x\", \"y\" or a Jones vector)")));
                return None;
            }
        },
        Some(v @ Value::Object(_)) => {
            let mut f = Fields::new(v, path, errors)?;
            let mut comp = |key: &'static str, errors: &mut Vec<ConfigError>| match f.get(key).map(complex) {
                None => Some(C::new(0.0, 0.0)),
                Some(Some(z)) => Some(z),
                Some(None) => {
                    errors.push(err(&join(path, key), "expected a number or [re, im]"));
                    None
                }
            };
            let (x, y) = (comp("x", errors), comp("y", errors));
            f.finish(errors);
            Polarization { x: x?, y: y? }
        }
        Some(v) => {
            errors.push(err(path, &format!("expected a string or a Jones vector object, got {v}")));
            return None;
        }
    };
    pol.normalized().map_err(|e| errors.push(err(path, &e.to_string()))).ok()
}

fn grid(value: Option<&Value>, path: &str, errors: &mut Vec<ConfigError>) -> Option<GridSpec> {
    let empty = Value::Object(Map::new());
    let mut f = Fields::new(value.unwrap_or(&empty), path, errors)?;
    let omega_min = f.number("omega_min", Some(0.0), errors);
    let omega_max = f.number("omega_max", Some(20.0), errors);
    let count = f.count("count", 401, errors);
    let spacing = match f.string("spacing", errors) {
        None | Some("linear") => Some(Spacing::Linear),
        Some("log") => Some(Spacing::Log),
        Some(other) => {
            errors.push(err(&f.path("spacing"), &format!("expected \"linear\" or \"log\", got `{other}`")));
            None
        }
    };
    let mut ok = true;
    if let Some(n) = count {
        if n < 2 {
            errors.push(err(&f.path("count"), &format!("grid needs at least 2 points, got {n}")));
            ok = false;
        }
    }
    if let (Some(lo), Some(hi)) = (omega_min, omega_max) {
        if hi <= lo {
            errors.push(err(&f.path("omega_max"), &format!("must exceed omega_min ({hi} <= {lo})")));
            ok = false;
        }
        if spacing == Some(Spacing::Log) && lo <= 0.0 {
            errors.push(err(&f.path("omega_min"), "log spacing needs omega_min > 0"));
            ok = false;
        }
    }
    f.finish(errors);
    ok.then_some(GridSpec {
        omega_min: omega_min?,
        omega_max: omega_max?,
        count: count?,
        spacing: spacing?,
    })
}

fn analysis(value: Option<&Value>, path: &str, errors: &mut Vec<ConfigError>) -> Option<AnalysisSpec> {
    let empty = Value::Object(Map::new());
    let mut f = Fields::new(value.unwrap_or(&empty), path, errors)?;
    let basis_path = f.path("basis");
    let basis = match f.get("basis") {
        None => Some(BasisChoice::Xy),
        Some(Value::String(s)) => match s.as_str() {
            "xy" => Some(BasisChoice::Xy),
            "pm45" | "±45" | "+-45" => Some(BasisChoice::Pm45),
            other => {
                errors.push(err(&basis_path, &format!("unknown basis `{other}` (expected \"xy\", \"pm45\" or a 2x2 matrix)")));
                None
            }
        },
        Some(Value::Array(rows)) => {
            let entries: Option<Vec<C<f64>>> = (rows.len() == 2)
                .then(|| {
                    rows.iter()
                        .flat_map(|r| match r.as_array() {
                            Some(r) if r.len() == 2 => r.iter().map(complex).collect::<Vec<_>>(),
                            _ => vec![None],
                        })
                        .collect()
                })
                .flatten();
            match entries {
                Some(e) if e.len() == 4 => {
                    let u = CMatrix::from_row_slice(2, 2, &e);
                    match AnalysisBasis::custom(&u, 0.0) {
                        Ok(_) => Some(BasisChoice::Custom(u)),
                        Err(e) => {
                            errors.push(err(&basis_path, &e.to_string()));
                            None
                        }
                    }
                }
                _ => {
                    errors.push(err(&basis_path, "custom basis must be [[u00, u01], [u10, u11]] with entries number or [re, im]"));
                    None
                }
            }
        }
        Some(v) => {
            errors.push(err(&basis_path, &format!("expected a string or a 2x2 matrix, got {v}")));
            None
        }
    };
    let q_path = f.path("quadratures");
    let quadratures = match f.get("quadratures") {
        None => Some([0.0, std::f64::consts::FRAC_PI_2]),
        Some(Value::Array(a)) if a.len() == 2 => match (a[0].as_f64(), a[1].as_f64()) {
            (Some(amp), Some(phase)) => Some([amp, phase]),
            _ => {
                errors.push(err(&q_path, "angles must be numbers (radians)"));
                None
            }
        },
        Some(v) => {
            errors.push(err(&q_path, &format!("expected [theta_amplitude, theta_phase], got {v}")));
            None
        }
    };
    f.finish(errors);
    Some(AnalysisSpec {
        basis: basis?,
        quadratures: quadratures?,
    })
}

fn doppler(value: &Value, path: &str, errors: &mut Vec<ConfigError>) -> Option<DopplerSpec> {
    let mut f = Fields::new(value, path, errors)?;
    let defaults = DopplerSpec::new(0.0);
    let fwhm = f.number("fwhm", None, errors);
    let nodes = f.count("nodes", defaults.nodes, errors);
    let tolerance = f.number("tolerance", Some(defaults.tolerance), errors);
    let max_refinements = f.count("max_refinements", defaults.max_refinements, errors);
    let span = f.number("span", Some(6.0), errors);
    let kind = match f.string("quadrature", errors) {
        None | Some("uniform") => span.map(|span| QuadratureKind::Uniform { span }),
        Some("gauss-hermite") => {
            if f.obj.contains_key("span") {
                errors.push(err(&f.path("span"), "only used by the uniform quadrature"));
            }
            Some(QuadratureKind::GaussHermite)
        }
        Some(other) => {
            errors.push(err(&f.path("quadrature"), &format!("expected \"uniform\" or \"gauss-hermite\", got `{other}`")));
            None
        }
    };
    if fwhm.is_some_and(|w| w <= 0.0) {
        errors.push(err(&f.path("fwhm"), "must be > 0 (omit `doppler` for atoms at rest)"));
    }
    if nodes == Some(0) {
        errors.push(err(&f.path("nodes"), "need at least one node"));
    }
    if tolerance.is_some_and(|t| t <= 0.0) {
        errors.push(err(&f.path("tolerance"), "must be > 0"));
    }
    if span.is_some_and(|s| s <= 0.0) {
        errors.push(err(&f.path("span"), "must be > 0"));
    }
    f.finish(errors);
    Some(DopplerSpec {
        width_fwhm: fwhm?,
        nodes: nodes?,
        kind: kind?,
        tolerance: tolerance?,
        max_refinements: max_refinements?,
    })
}

fn outputs(value: Option<&Value>, path: &str, errors: &mut Vec<ConfigError>) -> Option<Outputs> {
    let Some(value) = value else {
        return Some(Outputs::default());
    };
    let mut f = Fields::new(value, path, errors)?;
    let csv = f.string("csv", errors).map(PathBuf::from);
    let manifest = f.string("manifest", errors).map(PathBuf::from);
    f.finish(errors);
    Some(Outputs { csv, manifest })
}

fn parse_run(value: &Value, prefix: &str, errors: &mut Vec<ConfigError>) -> Option<ScanConfig> {
    let start = errors.len();
    let mut f = Fields::new(value, prefix, errors)?;

    let label = f.string("label", errors).map(str::to_string);
    let fg = angular_momentum(&mut f, "Fg", errors);
    let fe = angular_momentum(&mut f, "Fe", errors);
    let b = f.number("b", Some(1.0), errors);
    let gamma = f.number("gamma", Some(DEFAULT_GAMMA), errors);
    let zeeman_g = f.number("zeeman_g", Some(0.0), errors);
    let zeeman_e = f.number("zeeman_e", Some(0.0), errors);
    let delta = f.number("delta", None, errors);
    let omega_r = f.number("omega_r", None, errors);
    let pol = polarization(f.get("polarization"), &f.path("polarization"), errors);
    let c = f.number("C", None, errors);
    let grid = grid(f.get("grid"), &f.path("grid"), errors);
    let analysis = analysis(f.get("analysis"), &f.path("analysis"), errors);
    let doppler = match f.get("doppler") {
        None | Some(Value::Null) => Some(None),
        Some(v) => doppler(v, &f.path("doppler"), errors).map(Some),
    };
    let decompose = match f.get("decompose") {
        None => Some(false),
        Some(Value::Bool(b)) => Some(*b),
        Some(v) => {
            errors.push(err(&f.path("decompose"), &format!("expected true or false, got {v}")));
            None
        }
    };
    let outputs = outputs(f.get("outputs"), &f.path("outputs"), errors);

    if b.is_some_and(|b| !(0.0..=1.0).contains(&b)) {
        errors.push(err(&f.path("b"), "branching ratio must lie in [0, 1]"));
    }
    if gamma.is_some_and(|g| g <= 0.0) {
        errors.push(err(&f.path("gamma"), "transit rate must be > 0"));
    }
    if omega_r.is_some_and(|w| w < 0.0) {
        errors.push(err(&f.path("omega_r"), "reduced Rabi frequency must be >= 0"));
    }
    if c.is_some_and(|c| c < 0.0) {
        errors.push(err(&f.path("C"), "cooperativity must be >= 0"));
    }

    let mut atom = None;
    if let (Some(fg), Some(fe)) = (fg, fe) {
        let mut spec = AtomSpec::new(fg, fe, gamma.unwrap_or(DEFAULT_GAMMA));
        spec.branching_ratio = b.unwrap_or(1.0).clamp(0.0, 1.0);
        spec.zeeman_ground = zeeman_g.unwrap_or(0.0);
        spec.zeeman_excited = zeeman_e.unwrap_or(0.0);
        match spec.validate_structure() {
            Ok(()) => atom = Some(spec),
            Err(e @ CoreError::SelectionRule(_)) => errors.push(err(
                &f.path("Fe"),
                &format!("{e}; the dipole selection rule allows Fe - Fg in {{-1, 0, 1}}"),
            )),
            Err(e) => errors.push(err(&f.path("Fe"), &e.to_string())),
        }
    }
    f.finish(errors);

    if errors.len() > start {
        return None;
    }
    let drive = DriveSpec {
        detuning: delta?,
        rabi: omega_r?,
        polarization: pol?,
    };
    Some(ScanConfig {
        label,
        atom: atom?,
        drive,
        medium: MediumSpec {
            cooperativity: c?,
            doppler: doppler?,
        },
        grid: grid?,
        analysis: analysis?,
        decompose: decompose?,
        outputs: outputs?,
    })
}
