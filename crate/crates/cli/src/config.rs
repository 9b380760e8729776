//! Strict JSON run configuration.
//!
//! Every violation in a file is collected before reporting, unknown keys
//! come with the nearest valid key, and every value filled from a default is
//! recorded by its field path.

use serde::Serialize;
use serde_json::{Map, Value};
use std::fmt;
use std::path::{Path, PathBuf};

use hallnum::ensemble::{HallMethodChoice, ModelConfig, Observable, ObservableSettings};
use hallnum::hall::Orientation;
use hallnum::localization::BoundaryPolicy;
use hallnum::model::{Boundary, DisorderKind, DisorderModel, FluxRational, LLLBasisSpec, SiteProfile};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum,
    Hall,
    Localization,
    Transport,
    ConnesCheck,
    BandEdges,
    Sweep,
}

impl Experiment {
    const NAMES: [(&'static str, Experiment); 7] = [
        ("spectrum", Experiment::Spectrum),
        ("hall", Experiment::Hall),
        ("localization", Experiment::Localization),
        ("transport", Experiment::Transport),
        ("connes-check", Experiment::ConnesCheck),
        ("band-edges", Experiment::BandEdges),
        ("sweep", Experiment::Sweep),
    ];

    pub fn name(&self) -> &'static str {
        Self::NAMES.iter().find(|(_, e)| e == self).map(|(n, _)| *n).expect("every experiment is named")
    }

    fn default_observables(&self) -> Vec<Observable> {
        match self {
            Experiment::Hall => vec![Observable::Hall],
            Experiment::Localization => vec![Observable::Kernel, Observable::EllQ, Observable::LBeta],
            Experiment::Transport => vec![Observable::Moments],
            _ => vec![Observable::Ids],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleBlock {
    pub realizations: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    pub energies: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub fluxes: Vec<FluxRational>,
    pub sizes: Vec<[usize; 2]>,
    pub observables: Vec<Observable>,
    pub settings: ObservableSettings,
    pub dim_cap: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConnesBlock {
    pub pairs: Vec<([i64; 2], [i64; 2])>,
    pub radius: f64,
    pub orientation: Orientation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    LongCsv,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputBlock {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Hall values farther than this from an integer raise a warning.
    pub integer: f64,
    /// Connes rows pass when `|S - target| <= connes_relative · 2π · max(1, |det|)`.
    pub connes_relative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub version: u64,
    pub experiment: Experiment,
    pub model: Option<ModelConfig>,
    pub disorder: DisorderModel,
    pub ensemble: EnsembleBlock,
    pub connes: ConnesBlock,
    pub output: OutputBlock,
    pub tolerances: Tolerances,
    /// Field paths filled from documented defaults.
    pub defaulted: Vec<String>,
}

/// All problems found in one configuration file.
#[derive(Debug)]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration error(s):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// Schema walker that accumulates violations instead of stopping at the first.
#[derive(Default)]
struct Walker {
    violations: Vec<String>,
    defaulted: Vec<String>,
}

impl Walker {
    fn fail(&mut self, path: &str, msg: impl fmt::Display) {
        self.violations.push(format!("{path}: {msg}"));
    }

    fn object<'a>(&mut self, path: &str, v: &'a Value, allowed: &[&str]) -> Option<&'a Map<String, Value>> {
        let Some(m) = v.as_object() else {
            self.fail(path, "expected an object");
            return None;
        };
        for key in m.keys() {
            if !allowed.contains(&key.as_str()) {
                let near = allowed
                    .iter()
                    .map(|a| (strsim::jaro_winkler(key, a), *a))
                    .max_by(|a, b| a.0.total_cmp(&b.0));
                match near {
                    Some((score, a)) if score >= 0.7 => {
                        self.fail(&join(path, key), format!("unknown key (did you mean \"{a}\"?)"))
                    }
                    _ => self.fail(&join(path, key), format!("unknown key (valid keys: {})", allowed.join(", "))),
                }
            }
        }
        Some(m)
    }

    fn field<'a>(&mut self, m: Option<&'a Map<String, Value>>, path: &str, key: &str) -> Option<&'a Value> {
        let v = m.and_then(|m| m.get(key));
        if v.is_none() && m.is_some() {
            self.defaulted.push(join(path, key));
        }
        v
    }

    fn required<'a>(&mut self, m: Option<&'a Map<String, Value>>, path: &str, key: &str) -> Option<&'a Value> {
        let v = m?.get(key);
        if v.is_none() {
            self.fail(&join(path, key), "required field is missing");
        }
        v
    }

    fn number(&mut self, path: &str, v: &Value, ok: impl Fn(f64) -> bool, range: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() && ok(x) => Some(x),
            Some(x) => {
                self.fail(path, format!("value {x} out of range ({range})"));
                None
            }
            None => {
                self.fail(path, "expected a number");
                None
            }
        }
    }

    fn integer(&mut self, path: &str, v: &Value, min: u64) -> Option<u64> {
        match v.as_u64() {
            Some(x) if x >= min => Some(x),
            Some(x) => {
                self.fail(path, format!("value {x} out of range (must be >= {min})"));
                None
            }
            None => {
                self.fail(path, format!("expected an integer >= {min}"));
                None
            }
        }
    }

    fn signed(&mut self, path: &str, v: &Value) -> Option<i64> {
        let x = v.as_i64();
        if x.is_none() {
            self.fail(path, "expected an integer");
        }
        x
    }

    fn choice<T: Copy>(&mut self, path: &str, v: &Value, options: &[(&str, T)]) -> Option<T> {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        match v.as_str() {
            Some(s) => match options.iter().find(|(n, _)| *n == s) {
                Some((_, t)) => Some(*t),
                None => {
                    self.fail(path, format!("unknown value \"{s}\" (expected one of: {})", names.join(", ")));
                    None
                }
            },
            None => {
                self.fail(path, format!("expected a string, one of: {}", names.join(", ")));
                None
            }
        }
    }

    fn array<'a>(&mut self, path: &str, v: &'a Value, nonempty: bool) -> Option<&'a Vec<Value>> {
        match v.as_array() {
            Some(a) if nonempty && a.is_empty() => {
                self.fail(path, "must not be empty");
                None
            }
            Some(a) => Some(a),
            None => {
                self.fail(path, "expected an array");
                None
            }
        }
    }

    fn pair_usize(&mut self, path: &str, v: &Value) -> Option<[usize; 2]> {
        let a = self.array(path, v, true)?;
        if a.len() != 2 {
            self.fail(path, "expected two integers");
            return None;
        }
        let x = self.integer(&format!("{path}[0]"), &a[0], 1)?;
        let y = self.integer(&format!("{path}[1]"), &a[1], 1)?;
        Some([x as usize, y as usize])
    }

    fn pair_i64(&mut self, path: &str, v: &Value) -> Option<[i64; 2]> {
        let a = self.array(path, v, true)?;
        if a.len() != 2 {
            self.fail(path, "expected two integers");
            return None;
        }
        Some([self.signed(&format!("{path}[0]"), &a[0])?, self.signed(&format!("{path}[1]"), &a[1])?])
    }

    fn flux(&mut self, path: &str, v: &Value) -> Option<FluxRational> {
        let [p, q] = self.pair_i64(path, v)?;
        match FluxRational::new(p, q) {
            Ok(f) => Some(f),
            Err(e) => {
                self.fail(path, e);
                None
            }
        }
    }

    fn list<T>(&mut self, path: &str, v: &Value, mut item: impl FnMut(&mut Self, &str, &Value) -> Option<T>) -> Option<Vec<T>> {
        let a = self.array(path, v, true)?;
        let out: Vec<Option<T>> = a.iter().enumerate().map(|(i, x)| item(self, &format!("{path}[{i}]"), x)).collect();
        out.into_iter().collect()
    }

    /// Explicit list or `{"start", "stop", "count"}` with inclusive ends.
    fn grid(&mut self, path: &str, v: &Value) -> Option<Vec<f64>> {
        if v.is_object() {
            let m = self.object(path, v, &["start", "stop", "count"]);
            let start = self.required(m, path, "start").and_then(|x| self.number(&join(path, "start"), x, |_| true, "finite"));
            let stop = self.required(m, path, "stop").and_then(|x| self.number(&join(path, "stop"), x, |_| true, "finite"));
            let count = self.required(m, path, "count").and_then(|x| self.integer(&join(path, "count"), x, 1));
            let (start, stop, count) = (start?, stop?, count? as usize);
            if count > 1 && stop <= start {
                self.fail(path, "stop must exceed start");
                return None;
            }
            let h = if count > 1 { (stop - start) / (count - 1) as f64 } else { 0.0 };
            return Some((0..count).map(|k| start + h * k as f64).collect());
        }
        self.list(path, v, |w, p, x| w.number(p, x, |_| true, "finite"))
    }
}

const TOP_KEYS: [&str; 8] = ["version", "experiment", "model", "disorder", "ensemble", "connes", "output", "tolerances"];
const LATTICE_KEYS: [&str; 4] = ["kind", "size", "boundary", "flux"];
const LANDAU_KEYS: [&str; 7] = ["kind", "field", "n_max", "n_phi", "cells", "profile", "quadrature_spacing"];
const DISORDER_KEYS: [&str; 6] = ["type", "m1", "m2", "lambda", "eta", "c"];
const ENSEMBLE_KEYS: [&str; 18] = [
    "realizations",
    "seed",
    "workers",
    "energies",
    "lambdas",
    "fluxes",
    "sizes",
    "observables",
    "window_radius",
    "hall_method",
    "lattice_sum_radius",
    "index_radius",
    "kernel_radius",
    "q",
    "beta",
    "moments",
    "edge_level",
    "dim_cap",
];
const MOMENT_KEYS: [&str; 7] = ["p", "half_width", "dt", "averaging_times", "boundary_policy", "boundary_threshold", "max_time"];

fn parse_model(w: &mut Walker, root: Option<&Map<String, Value>>, needs_model: bool) -> Option<Option<ModelConfig>> {
    let Some(v) = root.and_then(|r| r.get("model")) else {
        if needs_model {
            w.fail("model", "required field is missing");
            return None;
        }
        return Some(None);
    };
    let kind = v.get("kind").and_then(Value::as_str).unwrap_or("lattice");
    match kind {
        "lattice" => {
            let m = w.object("model", v, &LATTICE_KEYS);
            if m.is_some_and(|m| !m.contains_key("kind")) {
                w.defaulted.push("model.kind".into());
            }
            let size = w.required(m, "model", "size").and_then(|x| w.pair_usize("model.size", x));
            let boundary = match w.field(m, "model", "boundary") {
                Some(x) => w.choice("model.boundary", x, &[("open", Boundary::Open), ("magnetic-periodic", Boundary::MagneticPeriodic)]),
                None => Some(Boundary::Open),
            };
            let flux = w.required(m, "model", "flux").and_then(|x| w.flux("model.flux", x));
            let (size, boundary, flux) = (size?, boundary?, flux?);
            Some(Some(ModelConfig::Lattice { lx: size[0], ly: size[1], boundary, flux }))
        }
        "landau" => {
            let m = w.object("model", v, &LANDAU_KEYS);
            let b = match w.field(m, "model", "field") {
                Some(x) => w.number("model.field", x, |b| b > 0.0, "must be > 0"),
                None => Some(1.0),
            };
            let n_max = w.required(m, "model", "n_max").and_then(|x| w.integer("model.n_max", x, 1));
            let n_phi = w.required(m, "model", "n_phi").and_then(|x| w.integer("model.n_phi", x, 1));
            let cells = m.and_then(|m| m.get("cells")).map(|x| w.pair_usize("model.cells", x));
            let spacing = m
                .and_then(|m| m.get("quadrature_spacing"))
                .map(|x| w.number("model.quadrature_spacing", x, |h| h > 0.0 && h <= 0.05, "must lie in (0, 0.05]"));
            let profile = m.and_then(|m| m.get("profile")).map(|x| parse_profile(w, x));
            let mut spec = LLLBasisSpec::new(b?, n_max? as usize, n_phi? as usize).map_err(|e| w.fail("model", e)).ok()?;
            match cells {
                Some(c) => spec.cells = c?,
                None => w.defaulted.push("model.cells".into()),
            }
            match spacing {
                Some(h) => spec.quadrature_spacing = h?,
                None => w.defaulted.push("model.quadrature_spacing".into()),
            }
            match profile {
                Some(p) => spec.profile = p?,
                None => w.defaulted.push("model.profile".into()),
            }
            Some(Some(ModelConfig::Landau(spec)))
        }
        other => {
            w.fail("model.kind", format!("unknown value \"{other}\" (expected one of: lattice, landau)"));
            None
        }
    }
}

fn parse_profile(w: &mut Walker, v: &Value) -> Option<SiteProfile> {
    let kind = v.get("type").and_then(Value::as_str);
    match kind {
        Some("flat") => {
            w.object("model.profile", v, &["type"]);
            Some(SiteProfile::Flat)
        }
        Some("plateau") => {
            let m = w.object("model.profile", v, &["type", "core", "floor"]);
            let unit = |x: f64| x > 0.0 && x <= 1.0;
            let core = w.required(m, "model.profile", "core").and_then(|x| w.number("model.profile.core", x, unit, "must lie in (0, 1]"));
            let floor =
                w.required(m, "model.profile", "floor").and_then(|x| w.number("model.profile.floor", x, unit, "must lie in (0, 1]"));
            Some(SiteProfile::Plateau { core: core?, floor: floor? })
        }
        _ => {
            w.fail("model.profile.type", "expected \"flat\" or \"plateau\"");
            None
        }
    }
}

fn parse_disorder(w: &mut Walker, root: Option<&Map<String, Value>>) -> Option<DisorderModel> {
    let Some(v) = root.and_then(|r| r.get("disorder")) else {
        w.defaulted.push("disorder".into());
        return Some(DisorderModel::clean());
    };
    let m = w.object("disorder", v, &DISORDER_KEYS);
    let nonneg = |x: f64| x >= 0.0;
    let num = |w: &mut Walker, key: &str, default: f64| match w.field(m, "disorder", key) {
        Some(x) => w.number(&join("disorder", key), x, nonneg, "must be >= 0"),
        None => Some(default),
    };
    let m1 = num(w, "m1", 1.0);
    let m2 = num(w, "m2", 1.0);
    let lambda = num(w, "lambda", 0.0);
    let ty = match w.field(m, "disorder", "type") {
        Some(x) => w.choice("disorder.type", x, &[("uniform", 0), ("polynomial-eta", 1), ("constant", 2)]),
        None => Some(0),
    };
    let kind = match ty? {
        0 => DisorderKind::Uniform,
        1 => {
            let eta = w.required(m, "disorder", "eta").and_then(|x| w.number("disorder.eta", x, |e| e > 0.0, "must be > 0"));
            DisorderKind::PolynomialEta { eta: eta? }
        }
        _ => {
            let c = w.required(m, "disorder", "c").and_then(|x| w.number("disorder.c", x, |_| true, "finite"));
            DisorderKind::Constant { c: c? }
        }
    };
    match DisorderModel::new(m1?, m2?, lambda?, kind) {
        Ok(d) => Some(d),
        Err(e) => {
            w.fail("disorder", e);
            None
        }
    }
}

fn observable_names() -> Vec<(&'static str, Observable)> {
    Observable::ALL.iter().map(|o| (o.name(), *o)).collect()
}

fn parse_ensemble(
    w: &mut Walker,
    root: Option<&Map<String, Value>>,
    experiment: Option<Experiment>,
    model: Option<&ModelConfig>,
    disorder: Option<&DisorderModel>,
) -> Option<EnsembleBlock> {
    let empty = Value::Object(Map::new());
    let present = root.and_then(|r| r.get("ensemble"));
    if present.is_none() {
        w.defaulted.push("ensemble".into());
    }
    let v = present.unwrap_or(&empty);
    let m = w.object("ensemble", v, &ENSEMBLE_KEYS);
    let path = "ensemble";
    let mut ok = true;
    let mut settings = ObservableSettings::default();

    macro_rules! opt {
        ($key:literal, $parse:expr) => {
            match w.field(m, path, $key) {
                Some(x) => {
                    let r = $parse(&mut *w, &join(path, $key), x);
                    ok &= r.is_some();
                    r
                }
                None => None,
            }
        };
    }

    let realizations = opt!("realizations", |w: &mut Walker, p: &str, x| w.integer(p, x, 1)).unwrap_or(1) as usize;
    let seed = opt!("seed", |w: &mut Walker, p: &str, x: &Value| {
        let r = x.as_u64();
        if r.is_none() {
            w.fail(p, "expected an unsigned 64-bit integer");
        }
        r
    })
    .unwrap_or(0);
    let workers = opt!("workers", |w: &mut Walker, p: &str, x| w.integer(p, x, 1)).map(|x| x as usize);
    let energies = opt!("energies", |w: &mut Walker, p: &str, x| w.grid(p, x)).unwrap_or_else(|| vec![0.0]);
    let lambdas = opt!("lambdas", |w: &mut Walker, p: &str, x| w.list(p, x, |w, p, x| w.number(p, x, |l| l >= 0.0, "must be >= 0")))
        .unwrap_or_else(|| disorder.map(|d| vec![d.lambda]).unwrap_or_default());
    let fluxes = opt!("fluxes", |w: &mut Walker, p: &str, x| w.list(p, x, |w, p, x| w.flux(p, x)));
    let sizes = opt!("sizes", |w: &mut Walker, p: &str, x| w.list(p, x, |w, p, x| w.pair_usize(p, x)));
    let observables = opt!("observables", |w: &mut Walker, p: &str, x| {
        let names = observable_names();
        w.list(p, x, |w, p, x| w.choice(p, x, &names))
    })
    .unwrap_or_else(|| experiment.map(|e| e.default_observables()).unwrap_or_default());

    let radius = |w: &mut Walker, p: &str, x: &Value| w.integer(p, x, 1).map(|r| r as usize);
    settings.window_radius = opt!("window_radius", radius);
    if let Some(h) = opt!("hall_method", |w: &mut Walker, p: &str, x| w.choice(
        p,
        x,
        &[
            ("auto", HallMethodChoice::Auto),
            ("kubo-streda", HallMethodChoice::KuboStreda),
            ("lattice-sum", HallMethodChoice::LatticeSum),
            ("index", HallMethodChoice::Index),
        ]
    )) {
        settings.hall_method = h;
    }
    if let Some(r) = opt!("lattice_sum_radius", radius) {
        settings.lattice_sum_radius = r;
    }
    settings.index_radius = opt!("index_radius", radius);
    settings.kernel_radius = opt!("kernel_radius", radius);
    if let Some(q) = opt!("q", |w: &mut Walker, p: &str, x| w.number(p, x, |q| q >= 1.0, "must be >= 1")) {
        settings.q = q;
    }
    if let Some(b) = opt!("beta", |w: &mut Walker, p: &str, x| w.number(p, x, |b| b > 0.0 && b <= 1.0, "must lie in (0, 1]")) {
        settings.beta = b;
    }
    if let Some(l) = opt!("edge_level", |w: &mut Walker, p: &str, x| w.integer(p, x, 1)) {
        settings.edge_level = l as usize;
    }
    let dim_cap = opt!("dim_cap", |w: &mut Walker, p: &str, x| w.integer(p, x, 1)).unwrap_or(4096) as usize;
    if let Some(mv) = w.field(m, path, "moments") {
        let mp = "ensemble.moments";
        let mm = w.object(mp, mv, &MOMENT_KEYS);
        let pos = |x: f64| x > 0.0;
        let mut num = |w: &mut Walker, key: &str, check: &dyn Fn(f64) -> bool, range: &str| match w.field(mm, mp, key) {
            Some(x) => {
                let r = w.number(&join(mp, key), x, check, range);
                ok &= r.is_some();
                r
            }
            None => None,
        };
        if let Some(p) = num(w, "p", &|p| p >= 0.0, "must be >= 0") {
            settings.moment_p = p;
        }
        if let Some(h) = num(w, "half_width", &pos, "must be > 0") {
            settings.moment_half_width = h;
        }
        if let Some(dt) = num(w, "dt", &pos, "must be > 0") {
            settings.moment_dt = dt;
        }
        if let Some(t) = num(w, "boundary_threshold", &|t| t > 0.0 && t < 1.0, "must lie in (0, 1)") {
            settings.moment_boundary_threshold = t;
        }
        if let Some(x) = w.field(mm, mp, "averaging_times") {
            match w.list("ensemble.moments.averaging_times", x, |w, p, x| w.number(p, x, pos, "must be > 0")) {
                Some(t) => settings.moment_averaging_times = t,
                None => ok = false,
            }
        }
        if let Some(x) = w.field(mm, mp, "boundary_policy") {
            match w.choice(
                "ensemble.moments.boundary_policy",
                x,
                &[("truncate", BoundaryPolicy::Truncate), ("flag", BoundaryPolicy::Flag)],
            ) {
                Some(b) => settings.moment_boundary = b,
                None => ok = false,
            }
        }
        if mm.is_some_and(|mm| mm.contains_key("max_time")) {
            w.fail("ensemble.moments.max_time", "derived as 7 times the largest averaging time; remove this key");
        }
    }

    let (fluxes, sizes) = match model {
        Some(ModelConfig::Lattice { lx, ly, flux, .. }) => {
            (fluxes.unwrap_or_else(|| vec![*flux]), sizes.unwrap_or_else(|| vec![[*lx, *ly]]))
        }
        _ => {
            if fluxes.is_some() || sizes.is_some() {
                w.fail(path, "fluxes and sizes apply to the lattice model only");
                ok = false;
            }
            (vec![], vec![])
        }
    };
    ok.then_some(EnsembleBlock {
        realizations,
        seed,
        workers,
        energies,
        lambdas,
        fluxes,
        sizes,
        observables,
        settings,
        dim_cap,
    })
}

fn parse_connes(w: &mut Walker, root: Option<&Map<String, Value>>, needed: bool) -> Option<ConnesBlock> {
    let default = ConnesBlock { pairs: vec![([1, 0], [0, 1])], radius: 400.0, orientation: Orientation::Clockwise };
    let Some(v) = root.and_then(|r| r.get("connes")) else {
        if needed {
            w.defaulted.push("connes".into());
        }
        return Some(default);
    };
    let m = w.object("connes", v, &["pairs", "radius", "orientation"]);
    let pairs = match w.field(m, "connes", "pairs") {
        Some(x) => w.list("connes.pairs", x, |w, p, x| {
            let a = w.array(p, x, true)?;
            if a.len() != 2 {
                w.fail(p, "expected [[u1, u2], [v1, v2]]");
                return None;
            }
            Some((w.pair_i64(&format!("{p}[0]"), &a[0])?, w.pair_i64(&format!("{p}[1]"), &a[1])?))
        }),
        None => Some(default.pairs),
    };
    let radius = match w.field(m, "connes", "radius") {
        Some(x) => w.number("connes.radius", x, |r| r > 0.0, "must be > 0"),
        None => Some(default.radius),
    };
    let orientation = match w.field(m, "connes", "orientation") {
        Some(x) => w.choice(
            "connes.orientation",
            x,
            &[("clockwise", Orientation::Clockwise), ("counterclockwise", Orientation::Counterclockwise)],
        ),
        None => Some(default.orientation),
    };
    Some(ConnesBlock { pairs: pairs?, radius: radius?, orientation: orientation? })
}

fn parse_output(w: &mut Walker, root: Option<&Map<String, Value>>) -> Option<OutputBlock> {
    let empty = Value::Object(Map::new());
    let present = root.and_then(|r| r.get("output"));
    if present.is_none() {
        w.defaulted.push("output".into());
    }
    let m = w.object("output", present.unwrap_or(&empty), &["directory", "formats"]);
    let directory = match w.field(m, "output", "directory") {
        Some(Value::String(s)) if !s.is_empty() => Some(PathBuf::from(s)),
        Some(_) => {
            w.fail("output.directory", "expected a nonempty string");
            None
        }
        None => Some(PathBuf::from("results")),
    };
    let formats = match w.field(m, "output", "formats") {
        Some(x) => w.list("output.formats", x, |w, p, x| w.choice(p, x, &[("csv", Format::Csv), ("long-csv", Format::LongCsv)])),
        None => Some(vec![Format::Csv, Format::LongCsv]),
    };
    Some(OutputBlock { directory: directory?, formats: formats? })
}

fn parse_tolerances(w: &mut Walker, root: Option<&Map<String, Value>>) -> Option<Tolerances> {
    let mut t = Tolerances { integer: hallnum::hall::INTEGER_THRESHOLD, connes_relative: 0.02 };
    let Some(v) = root.and_then(|r| r.get("tolerances")) else {
        w.defaulted.push("tolerances".into());
        return Some(t);
    };
    let m = w.object("tolerances", v, &["integer", "connes_relative"]);
    let mut ok = true;
    for (key, slot) in [("integer", &mut t.integer), ("connes_relative", &mut t.connes_relative)] {
        if let Some(x) = w.field(m, "tolerances", key) {
            match w.number(&join("tolerances", key), x, |x| x > 0.0, "must be > 0") {
                Some(x) => *slot = x,
                None => ok = false,
            }
        }
    }
    ok.then_some(t)
}

/// Cross-field checks that need the whole configuration.
fn check_consistency(w: &mut Walker, c: &RunConfig) {
    let e = &c.ensemble;
    match (&c.experiment, &c.model) {
        (Experiment::BandEdges, Some(ModelConfig::Lattice { .. })) => {
            w.fail("model.kind", "band-edges needs the landau model")
        }
        (Experiment::Localization | Experiment::Transport | Experiment::Hall, Some(ModelConfig::Landau(_))) => {
            w.fail("model.kind", format!("{} needs the lattice model", c.experiment.name()))
        }
        _ => {}
    }
    if c.experiment == Experiment::BandEdges && e.lambdas.iter().any(|l| *l <= 0.0) {
        w.fail("ensemble.lambdas", "band edges need λ > 0 at every grid point");
    }
    match &c.model {
        Some(ModelConfig::Lattice { boundary, .. }) => {
            for (i, s) in e.sizes.iter().enumerate() {
                if s[0] * s[1] > e.dim_cap {
                    w.fail(&format!("ensemble.sizes[{i}]"), format!("{} sites exceed dim_cap {}", s[0] * s[1], e.dim_cap));
                }
                if *boundary == Boundary::MagneticPeriodic {
                    for f in &e.fluxes {
                        if s[0] as i64 % f.q() != 0 {
                            w.fail(
                                &format!("ensemble.sizes[{i}]"),
                                format!("torus side {} is not a multiple of the flux denominator {}", s[0], f.q()),
                            );
                        }
                    }
                }
            }
        }
        Some(ModelConfig::Landau(spec)) => {
            if spec.dim() > e.dim_cap {
                w.fail("model", format!("basis dimension {} exceeds dim_cap {}", spec.dim(), e.dim_cap));
            }
        }
        None => {}
    }
}

/// Parses and validates a configuration document.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ConfigError { violations: vec![format!("malformed JSON: {e}")] })?;
    let mut w = Walker::default();
    let top = w.object("", &root, &TOP_KEYS);
    let version = match w.field(top, "", "version") {
        Some(v) => match v.as_u64() {
            Some(SCHEMA_VERSION) => Some(SCHEMA_VERSION),
            _ => {
                w.fail("version", format!("unsupported schema version (this build reads {SCHEMA_VERSION})"));
                None
            }
        },
        None => Some(SCHEMA_VERSION),
    };
    let names: Vec<(&str, Experiment)> = Experiment::NAMES.to_vec();
    let experiment = w.required(top, "", "experiment").and_then(|v| w.choice("experiment", v, &names));
    let needs_model = !matches!(experiment, Some(Experiment::ConnesCheck));
    let model = parse_model(&mut w, top, needs_model);
    let disorder = parse_disorder(&mut w, top);
    let ensemble = parse_ensemble(&mut w, top, experiment, model.as_ref().and_then(|m| m.as_ref()), disorder.as_ref());
    let connes = parse_connes(&mut w, top, experiment == Some(Experiment::ConnesCheck));
    let output = parse_output(&mut w, top);
    let tolerances = parse_tolerances(&mut w, top);

    let complete = (|| {
        Some(RunConfig {
            version: version?,
            experiment: experiment?,
            model: model?,
            disorder: disorder?,
            ensemble: ensemble?,
            connes: connes?,
            output: output?,
            tolerances: tolerances?,
            defaulted: vec![],
        })
    })();
    if let Some(c) = &complete {
        check_consistency(&mut w, c);
    }
    match complete {
        Some(mut c) if w.violations.is_empty() => {
            w.defaulted.sort();
            w.defaulted.dedup();
            c.defaulted = w.defaulted;
            Ok(c)
        }
        _ => Err(ConfigError { violations: w.violations }),
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError { violations: vec![format!("cannot read {}: {e}", path.display())] })?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL_HALL: &str = r#"{
        "experiment": "hall",
        "model": {"size": [24, 24], "flux": [1, 3]},
        "ensemble": {"energies": [-1.366]}
    }"#;

    #[test]
    fn minimal_hall_config_gets_documented_defaults() {
        let c = parse_config_str(MINIMAL_HALL).unwrap();
        assert_eq!(c.experiment, Experiment::Hall);
        assert_eq!(c.ensemble.observables, vec![Observable::Hall]);
        assert_eq!(c.ensemble.realizations, 1);
        assert_eq!(c.ensemble.lambdas, vec![0.0]);
        assert_eq!(c.ensemble.sizes, vec![[24, 24]]);
        assert_eq!(c.disorder, DisorderModel::clean());
        for path in ["model.boundary", "model.kind", "disorder", "ensemble.realizations", "ensemble.seed", "output", "tolerances"] {
            assert!(c.defaulted.iter().any(|d| d == path), "{path} not marked defaulted: {:?}", c.defaulted);
        }
        assert!(!c.defaulted.iter().any(|d| d == "ensemble.energies"));
    }

    #[test]
    fn typo_names_the_nearest_key() {
        let text = r#"{"experiment": "hall", "model": {"size": [12, 12], "flux": [1, 3]},
            "disorder": {"lamda": 0.3}}"#;
        let err = parse_config_str(text).unwrap_err();
        assert!(err.violations.iter().any(|v| v.contains("disorder.lamda") && v.contains("\"lambda\"")), "{err}");
    }

    #[test]
    fn negative_lambda_cites_the_field_path() {
        let text = r#"{"experiment": "hall", "model": {"size": [12, 12], "flux": [1, 3]},
            "disorder": {"lambda": -0.1}}"#;
        let err = parse_config_str(text).unwrap_err();
        assert!(err.violations.iter().any(|v| v.starts_with("disorder.lambda") && v.contains("out of range")), "{err}");
    }

    #[test]
    fn collects_every_violation() {
        let text = r#"{"experiment": "halll", "model": {"size": [0, 12], "flux": [1, 0], "bondary": "open"},
            "ensemble": {"realizations": 0, "beta": 2.0}}"#;
        let err = parse_config_str(text).unwrap_err();
        assert!(err.violations.len() >= 6, "{err}");
    }

    #[test]
    fn malformed_json_is_reported() {
        let err = parse_config_str("{\"experiment\": ").unwrap_err();
        assert!(err.violations[0].starts_with("malformed JSON"));
    }

    #[test]
    fn energy_grid_shorthand() {
        let text = r#"{"experiment": "sweep", "model": {"size": [12, 12], "flux": [1, 3]},
            "ensemble": {"energies": {"start": -3, "stop": -2, "count": 5}}}"#;
        let c = parse_config_str(text).unwrap();
        assert_eq!(c.ensemble.energies, vec![-3.0, -2.75, -2.5, -2.25, -2.0]);
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let text = r#"{"experiment": "hall", "model": {"size": [80, 80], "flux": [1, 4]}}"#;
        let err = parse_config_str(text).unwrap_err();
        assert!(err.violations.iter().any(|v| v.contains("dim_cap")), "{err}");
    }

    #[test]
    fn connes_check_needs_no_model() {
        let c = parse_config_str(r#"{"experiment": "connes-check"}"#).unwrap();
        assert!(c.model.is_none());
        assert_eq!(c.connes.radius, 400.0);
        assert!(c.defaulted.iter().any(|d| d == "connes"));
    }

    #[test]
    fn landau_model() {
        let text = r#"{"experiment": "band-edges", "model": {"kind": "landau", "n_max": 3, "n_phi": 8},
            "ensemble": {"lambdas": [0.1, 0.5]}}"#;
        let c = parse_config_str(text).unwrap();
        assert!(matches!(c.model, Some(ModelConfig::Landau(ref s)) if s.n_max == 3));
        assert!(c.defaulted.iter().any(|d| d == "model.field"));
    }
}
