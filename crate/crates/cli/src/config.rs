//! Scenario files (TOML, unknown keys rejected) and their resolution into
//! ready-to-run operators.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use ness_core::gaussian::{occupations, steady_covariance, TwoOscillatorParams};
use ness_core::liouvillian::{
    build_two_oscillator_model, coupling_hamiltonian, energy1_observable, suggest_truncation,
    thermal_top_population, JumpOperator, LindbladModel, TwoOscillatorOperators,
};
use ness_core::operator::HERMITICITY_TOL;
use ness_core::response::{FormLabel, PerturbationProtocol, DEFAULT_EPS_FD};
use ness_core::{Operator, TimeGrid};
use serde::Deserialize;

use crate::matrix::read_operator;

/// Largest Fock-space dimension the engine accepts.
pub const MAX_FOCK_DIM: usize = 2048;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelConfig,
    pub observable: Option<TargetConfig>,
    pub perturbation: PerturbationConfig,
    pub grid: GridConfig,
    pub forms: Vec<String>,
    pub output: PathBuf,
    #[serde(default)]
    pub nonlinear: bool,
    pub eps_fd: Option<f64>,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    TwoOscillator(TwoOscillatorConfig),
    Generic(GenericConfig),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoOscillatorConfig {
    pub omega1: f64,
    pub delta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub beta1: f64,
    pub beta2: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    pub truncations: Option<[usize; 2]>,
    #[serde(default = "default_leakage")]
    pub leakage_tolerance: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenericConfig {
    pub hamiltonian: PathBuf,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default)]
    pub jumps: Vec<JumpConfig>,
    /// Inverse temperature of the Gibbs state used by the closed-system forms.
    pub beta: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpConfig {
    pub file: PathBuf,
    pub rate: f64,
}

/// Either a built-in operator name or a matrix file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub name: Option<String>,
    pub file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub hamiltonian: Option<String>,
    pub file: Option<PathBuf>,
    pub step: Option<f64>,
    pub sampled: Option<SampledConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledConfig {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_max: f64,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Absolute, between exact forms.
    #[serde(default = "default_exact")]
    pub exact: f64,
    /// Absolute, against the finite-difference form.
    #[serde(default = "default_fd")]
    pub finite_difference: f64,
    /// Relative to the larger curve, against the closed form.
    #[serde(default = "default_analytic")]
    pub analytic: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            exact: default_exact(),
            finite_difference: default_fd(),
            analytic: default_analytic(),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_leakage() -> f64 {
    1e-8
}

fn default_exact() -> f64 {
    1e-8
}

fn default_fd() -> f64 {
    1e-5
}

fn default_analytic() -> f64 {
    1e-3
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub key: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag} [{}]: {}", self.key, self.message)
    }
}

#[derive(Default)]
struct Diagnostics(Vec<Diagnostic>);

impl Diagnostics {
    fn error(&mut self, key: &str, message: impl Into<String>) {
        self.0.push(Diagnostic { severity: Severity::Error, key: key.into(), message: message.into() });
    }

    fn warn(&mut self, key: &str, message: impl Into<String>) {
        self.0.push(Diagnostic { severity: Severity::Warning, key: key.into(), message: message.into() });
    }

    fn has_errors(&self) -> bool {
        self.0.iter().any(|d| d.severity == Severity::Error)
    }
}

pub fn parse(text: &str) -> Result<ScenarioConfig, String> {
    toml::from_str(text).map_err(|e| e.to_string())
}

pub fn load(path: &Path) -> Result<ScenarioConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub enum ModelKind {
    TwoOscillator {
        params: TwoOscillatorParams,
        truncations: (usize, usize),
        leakage_tolerance: f64,
    },
    Generic {
        beta: Option<f64>,
    },
}

/// A fully checked scenario.
pub struct Scenario {
    pub kind: ModelKind,
    pub model: LindbladModel,
    pub observable: Operator,
    pub perturbation: Operator,
    pub protocol: Option<PerturbationProtocol>,
    pub grid: TimeGrid,
    /// Requested forms in column order.
    pub forms: Vec<FormLabel>,
    pub nonlinear: bool,
    pub eps_fd: f64,
    pub tolerances: ToleranceConfig,
    pub output: PathBuf,
    /// Resolved settings, in the order written to `meta.txt`.
    pub meta: Vec<(String, String)>,
}

/// Checks the configuration and builds its operators without running any
/// solver. Paths are taken relative to `base`.
pub fn resolve(cfg: &ScenarioConfig, base: &Path) -> (Option<Scenario>, Vec<Diagnostic>) {
    let mut diag = Diagnostics::default();
    let mut meta: Vec<(String, String)> = Vec::new();

    let grid = if cfg.grid.points < 2 {
        diag.error("grid.points", format!("need at least 2 points, got {}", cfg.grid.points));
        None
    } else {
        match TimeGrid::uniform(cfg.grid.t_max, cfg.grid.points) {
            Ok(g) => Some(g),
            Err(e) => {
                diag.error("grid.t_max", e.to_string());
                None
            }
        }
    };
    meta.push(("grid.t_max".into(), fmt_f(cfg.grid.t_max)));
    meta.push(("grid.points".into(), cfg.grid.points.to_string()));

    let mut forms = Vec::new();
    if cfg.forms.is_empty() {
        diag.error("forms", "no response forms requested");
    }
    for name in &cfg.forms {
        match FormLabel::parse(name) {
            Some(l) if forms.contains(&l) => diag.error("forms", format!("`{name}` listed twice")),
            Some(l) => forms.push(l),
            None => diag.error(
                "forms",
                format!("unknown form `{name}`, expected one of R1, R2, R2alt, R3, K1, K2, analytic"),
            ),
        }
    }

    let eps_fd = cfg.eps_fd.unwrap_or(DEFAULT_EPS_FD);
    if !(eps_fd > 0.0 && eps_fd.is_finite()) {
        diag.error("eps_fd", format!("finite-difference step must be positive, got {eps_fd}"));
    }
    let tol = cfg.tolerances;
    for (key, v) in [
        ("tolerances.exact", tol.exact),
        ("tolerances.finite_difference", tol.finite_difference),
        ("tolerances.analytic", tol.analytic),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            diag.error(key, format!("tolerance must be positive, got {v}"));
        }
    }

    let protocol = resolve_protocol(&cfg.perturbation, &mut diag);
    if cfg.nonlinear && protocol.is_none() {
        diag.error("nonlinear", "nonlinear reference needs a perturbation protocol (step or sampled)");
    }
    let target_keys = (cfg.perturbation.hamiltonian.is_some(), cfg.perturbation.file.is_some());
    if target_keys == (true, true) || target_keys == (false, false) {
        diag.error("perturbation", "give exactly one of `hamiltonian` (named) or `file`");
    }
    if let Some(obs) = &cfg.observable {
        if obs.name.is_some() == obs.file.is_some() {
            diag.error("observable", "give exactly one of `name` or `file`");
        }
    }

    let built = match &cfg.model {
        ModelConfig::TwoOscillator(t) => two_oscillator(cfg, t, &forms, &mut diag, &mut meta),
        ModelConfig::Generic(g) => generic(cfg, g, base, &forms, &mut diag, &mut meta),
    };

    meta.push((
        "forms".into(),
        forms.iter().map(|f| f.id()).collect::<Vec<_>>().join(","),
    ));
    meta.push(("protocol".into(), describe_protocol(protocol.as_ref())));
    meta.push(("nonlinear".into(), cfg.nonlinear.to_string()));
    meta.push(("eps_fd".into(), fmt_f(eps_fd)));
    meta.push(("tolerances.exact".into(), fmt_f(tol.exact)));
    meta.push(("tolerances.finite_difference".into(), fmt_f(tol.finite_difference)));
    meta.push(("tolerances.analytic".into(), fmt_f(tol.analytic)));

    if diag.has_errors() {
        return (None, diag.0);
    }
    let (Some((kind, model, observable, perturbation, mut forms)), Some(grid)) = (built, grid) else {
        return (None, diag.0);
    };
    forms.sort_by_key(|f| FormLabel::ALL.iter().position(|x| x == f));
    let scenario = Scenario {
        kind,
        model,
        observable,
        perturbation,
        protocol,
        grid,
        forms,
        nonlinear: cfg.nonlinear,
        eps_fd,
        tolerances: tol,
        output: base.join(&cfg.output),
        meta,
    };
    (Some(scenario), diag.0)
}

type Built = (ModelKind, LindbladModel, Operator, Operator, Vec<FormLabel>);

fn two_oscillator(
    cfg: &ScenarioConfig,
    t: &TwoOscillatorConfig,
    forms: &[FormLabel],
    diag: &mut Diagnostics,
    meta: &mut Vec<(String, String)>,
) -> Option<Built> {
    const KEY: &str = "model.two_oscillator";
    let params = TwoOscillatorParams {
        omega1: t.omega1,
        delta: t.delta,
        gamma: t.gamma,
        lambda: t.lambda,
        beta1: t.beta1,
        beta2: t.beta2,
        hbar: t.hbar,
        eps: cfg.perturbation.step.unwrap_or(0.0),
    };
    meta.push(("model".into(), "two_oscillator".into()));
    for (k, v) in [
        ("omega1", t.omega1),
        ("delta", t.delta),
        ("gamma", t.gamma),
        ("lambda", t.lambda),
        ("beta1", t.beta1),
        ("beta2", t.beta2),
        ("hbar", t.hbar),
        ("leakage_tolerance", t.leakage_tolerance),
    ] {
        meta.push((format!("{KEY}.{k}"), fmt_f(v)));
    }
    if let Err(e) = params.validate() {
        diag.error(KEY, e.to_string());
        return None;
    }
    if !(t.leakage_tolerance > 0.0 && t.leakage_tolerance < 1.0) {
        diag.error(&format!("{KEY}.leakage_tolerance"), format!("must lie in (0, 1), got {}", t.leakage_tolerance));
        return None;
    }
    if forms.iter().any(|f| matches!(f, FormLabel::K1 | FormLabel::K2)) {
        diag.error("forms", "K1 and K2 need a single-temperature Gibbs state; use a generic model with `beta`");
    }
    let occupancy = match steady_covariance(&params) {
        Ok(c) => (c.occupation1, c.occupation2),
        Err(_) => {
            let (n1, n2, _) = occupations(&params).ok()?;
            (n1, n2)
        }
    };
    let truncations = match t.truncations {
        Some([a, b]) => {
            for (k, (nbar, levels)) in [(occupancy.0, a), (occupancy.1, b)].into_iter().enumerate() {
                let top = thermal_top_population(nbar, levels);
                if top > t.leakage_tolerance {
                    diag.warn(
                        &format!("{KEY}.truncations"),
                        format!(
                            "mode {} keeps {levels} levels at occupation {nbar:.4}: estimated top-level population {top:.2e} exceeds {:.1e}",
                            k + 1,
                            t.leakage_tolerance
                        ),
                    );
                }
            }
            (a, b)
        }
        None => match suggest_truncation(&params, t.leakage_tolerance) {
            Ok(tr) => tr,
            Err(e) => {
                diag.error(KEY, e.to_string());
                return None;
            }
        },
    };
    meta.push((format!("{KEY}.truncations"), format!("{},{}", truncations.0, truncations.1)));
    let dim = truncations.0.saturating_mul(truncations.1);
    if dim > MAX_FOCK_DIM {
        diag.error(
            &format!("{KEY}.truncations"),
            format!(
                "Fock space dimension {dim} ({}x{}) exceeds {MAX_FOCK_DIM}; this regime is covered by the Gaussian oracle (`figure`)",
                truncations.0, truncations.1
            ),
        );
        return None;
    }
    let ops = match TwoOscillatorOperators::new(truncations) {
        Ok(o) => o,
        Err(e) => {
            diag.error(&format!("{KEY}.truncations"), e.to_string());
            return None;
        }
    };
    let model = match build_two_oscillator_model(&params, truncations) {
        Ok(m) => m,
        Err(e) => {
            diag.error(KEY, e.to_string());
            return None;
        }
    };

    let observable_name = match &cfg.observable {
        None => "energy1".to_string(),
        Some(TargetConfig { name: Some(n), .. }) => n.clone(),
        Some(_) => {
            diag.error("observable.file", "the two-oscillator model takes named observables: energy1, n1, n2");
            return None;
        }
    };
    let observable = match observable_name.as_str() {
        "energy1" => energy1_observable(&params, &ops),
        "n1" => ops.n1.clone(),
        "n2" => ops.n2.clone(),
        other => {
            diag.error("observable.name", format!("unknown observable `{other}`, expected energy1, n1 or n2"));
            return None;
        }
    };
    let perturbation = match cfg.perturbation.hamiltonian.as_deref() {
        Some("coupling") => coupling_hamiltonian(&ops, params.hbar),
        Some(other) => {
            diag.error("perturbation.hamiltonian", format!("unknown perturbation `{other}`, expected coupling"));
            return None;
        }
        None => {
            diag.error("perturbation.file", "the two-oscillator model takes the named perturbation `coupling`");
            return None;
        }
    };
    meta.push(("observable".into(), observable_name.clone()));
    meta.push(("perturbation".into(), "coupling".into()));

    let mut forms = forms.to_vec();
    if observable_name == "energy1" {
        if !forms.contains(&FormLabel::Analytic) {
            forms.push(FormLabel::Analytic);
        }
    } else if forms.contains(&FormLabel::Analytic) {
        diag.error("forms", "the closed form applies to the energy1 observable only");
    }
    let kind = ModelKind::TwoOscillator {
        params,
        truncations,
        leakage_tolerance: t.leakage_tolerance,
    };
    Some((kind, model, observable, perturbation, forms))
}

fn generic(
    cfg: &ScenarioConfig,
    g: &GenericConfig,
    base: &Path,
    forms: &[FormLabel],
    diag: &mut Diagnostics,
    meta: &mut Vec<(String, String)>,
) -> Option<Built> {
    const KEY: &str = "model.generic";
    meta.push(("model".into(), "generic".into()));
    meta.push((format!("{KEY}.hamiltonian"), g.hamiltonian.display().to_string()));
    meta.push((format!("{KEY}.hbar"), fmt_f(g.hbar)));
    if forms.contains(&FormLabel::Analytic) {
        diag.error("forms", "the closed form `analytic` exists for the two-oscillator model only");
    }
    let needs_beta = forms.iter().any(|f| matches!(f, FormLabel::K1 | FormLabel::K2));
    match g.beta {
        Some(b) if !(b > 0.0 && b.is_finite()) => {
            diag.error(&format!("{KEY}.beta"), format!("inverse temperature must be positive, got {b}"));
        }
        Some(b) => meta.push((format!("{KEY}.beta"), fmt_f(b))),
        None if needs_beta => diag.error(&format!("{KEY}.beta"), "K1 and K2 need the inverse temperature `beta`"),
        None => {}
    }

    for (k, j) in g.jumps.iter().enumerate() {
        if !(j.rate > 0.0 && j.rate.is_finite()) {
            diag.error(&format!("{KEY}.jumps[{k}].rate"), format!("rate must be positive, got {}", j.rate));
        }
    }
    let load = |diag: &mut Diagnostics, key: &str, path: &Path, hermitian: bool| -> Option<Operator> {
        let op = match read_operator(&base.join(path)) {
            Ok(op) => op,
            Err(e) => {
                diag.error(key, e);
                return None;
            }
        };
        if hermitian {
            if let Err(e) = op.check_hermitian(HERMITICITY_TOL) {
                diag.error(key, format!("{}: {e}", path.display()));
                return None;
            }
        }
        Some(op)
    };
    let h0 = load(diag, &format!("{KEY}.hamiltonian"), &g.hamiltonian, true);
    let mut jumps = Vec::new();
    for (k, j) in g.jumps.iter().enumerate() {
        let key = format!("{KEY}.jumps[{k}]");
        meta.push((format!("{key}.file"), j.file.display().to_string()));
        meta.push((format!("{key}.rate"), fmt_f(j.rate)));
        if let Some(op) = load(diag, &format!("{key}.file"), &j.file, false) {
            jumps.push(JumpOperator { operator: op, rate: j.rate });
        }
    }
    let observable = match &cfg.observable {
        Some(TargetConfig { file: Some(f), .. }) => {
            meta.push(("observable".into(), f.display().to_string()));
            load(diag, "observable.file", f, true)
        }
        _ => {
            diag.error("observable", "the generic model needs an observable `file`");
            None
        }
    };
    let perturbation = match (&cfg.perturbation.file, &cfg.perturbation.hamiltonian) {
        (Some(f), _) => {
            meta.push(("perturbation".into(), f.display().to_string()));
            load(diag, "perturbation.file", f, true)
        }
        (None, Some(name)) => {
            diag.error("perturbation.hamiltonian", format!("named perturbation `{name}` needs the two-oscillator model; give a `file`"));
            None
        }
        (None, None) => {
            diag.error("perturbation.file", "the generic model needs a perturbation `file`");
            None
        }
    };
    let (h0, observable, perturbation) = (h0?, observable?, perturbation?);
    if diag.has_errors() {
        return None;
    }
    for (key, op) in [("observable.file", &observable), ("perturbation.file", &perturbation)] {
        if op.dim() != h0.dim() {
            diag.error(key, format!("dimension {} does not match the Hamiltonian ({})", op.dim(), h0.dim()));
        }
    }
    if diag.has_errors() {
        return None;
    }
    let model = match LindbladModel::new(h0, jumps, g.hbar) {
        Ok(m) => m,
        Err(e) => {
            diag.error(KEY, e.to_string());
            return None;
        }
    };
    Some((ModelKind::Generic { beta: g.beta }, model, observable, perturbation, forms.to_vec()))
}

fn resolve_protocol(p: &PerturbationConfig, diag: &mut Diagnostics) -> Option<PerturbationProtocol> {
    match (p.step, &p.sampled) {
        (Some(_), Some(_)) => {
            diag.error("perturbation", "give at most one of `step` or `sampled`");
            None
        }
        (Some(a), None) if !a.is_finite() => {
            diag.error("perturbation.step", format!("amplitude must be finite, got {a}"));
            None
        }
        (Some(a), None) => Some(PerturbationProtocol::step(a)),
        (None, Some(s)) => match PerturbationProtocol::sampled(s.times.clone(), s.values.clone()) {
            Ok(p) => Some(p),
            Err(e) => {
                diag.error("perturbation.sampled", e.to_string());
                None
            }
        },
        (None, None) => None,
    }
}

fn describe_protocol(p: Option<&PerturbationProtocol>) -> String {
    match p {
        None => "none".into(),
        Some(PerturbationProtocol::Step { amplitude }) => format!("step {}", fmt_f(*amplitude)),
        Some(PerturbationProtocol::Sampled { times, .. }) => format!("sampled ({} nodes)", times.len()),
    }
}

/// Shortest representation that round-trips.
pub fn fmt_f(v: f64) -> String {
    format!("{v:?}")
}
