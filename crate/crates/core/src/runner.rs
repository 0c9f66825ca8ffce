//! Batch front end: JSON sweep configurations in, CSV datasets and a run
//! manifest out.
//!
//! Output files and columns (fixed order):
//!
//! | file            | columns                                             |
//! |-----------------|-----------------------------------------------------|
//! | `kappa.csv`     | `N_S,xi,kappa_tmsv,kappa_ccn,q_a,error`             |
//! | `advantage.csv` | `N_S,xi,G_I,q_a,q_a_formula,error`                  |
//! | `roc.csv`       | `p_fa,p_d,stderr,source_kind,error`                 |
//! | `stein.csv`     | `M,exponent_tmsv,exponent_ccn,D,V,error`            |
//! | `manifest.json` | resolved config, seed, version, grid, point errors |
//!
//! κ columns are divided by √η. In a sweep, ROC curves go to one file per grid
//! point, `roc_000.csv`, `roc_001.csv`, …. Points that fail are written as
//! rows with an `error` message and empty numeric fields.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{relative_entropy_gaussian, relative_entropy_variance_gaussian, stein_exponent};
use crate::channel::{simulate_scenario, Hypothesis, RadarScenario};
use crate::correlation::{pipeline_kappa, quantum_advantage};
use crate::detection::{roc_analytic, roc_empirical, DetectionConfig, HypothesisPair, RocCurve};
use crate::error::{Error, Result};
use crate::fmt::fmt_f64;
use crate::sources::SourceKind;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Kappa,
    Advantage,
    Roc,
    Stein,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "N_S")]
    NS,
    #[serde(rename = "xi")]
    Xi,
    #[serde(rename = "eta")]
    Eta,
    #[serde(rename = "M")]
    M,
    #[serde(rename = "G_I")]
    GI,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::NS => "N_S",
            SweepVariable::Xi => "xi",
            SweepVariable::Eta => "eta",
            SweepVariable::M => "M",
            SweepVariable::GI => "G_I",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

/// Either an explicit list of values or `{"log": {start, stop, points}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Log { log: LogGrid },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Log { log } => {
                if log.points == 1 {
                    return vec![log.start];
                }
                let (a, b) = (log.start.ln(), log.stop.ln());
                let last = log.points - 1;
                (0..log.points)
                    .map(|i| match i {
                        0 => log.start,
                        i if i == last => log.stop,
                        i => (a + (b - a) * i as f64 / last as f64).exp(),
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Grid,
}

impl SweepSpec {
    /// Grid values; log-spaced grids over `M` are rounded to integers.
    pub fn values(&self) -> Vec<f64> {
        let v = self.grid.values();
        match (&self.grid, self.variable) {
            (Grid::Log { .. }, SweepVariable::M) => v.into_iter().map(f64::round).collect(),
            _ => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteinConfig {
    pub epsilon: f64,
    #[serde(rename = "M")]
    pub m: u64,
}

/// A complete batch job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema_version: u32,
    pub scenario: RadarScenario,
    /// Without a sweep the scenario is evaluated once.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    pub outputs: Vec<OutputKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stein: Option<SteinConfig>,
    pub output_path: String,
}

/// One configuration problem, located by a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

impl From<ConfigErrors> for Error {
    fn from(e: ConfigErrors) -> Self {
        Error::Config(e.to_string())
    }
}

fn issue(path: impl Into<String>, message: impl Into<String>) -> ConfigIssue {
    ConfigIssue { path: path.into(), message: message.into() }
}

/// Parses the JSON schema strictly; does not check physics.
pub fn parse_config(text: &str) -> std::result::Result<SweepConfig, ConfigErrors> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "$".to_string() } else { path };
        ConfigErrors(vec![issue(path, e.into_inner().to_string())])
    })
}

/// Parses and checks every constraint, collecting all violations.
pub fn check_config(text: &str) -> std::result::Result<SweepConfig, ConfigErrors> {
    let config = parse_config(text)?;
    let issues = config_issues(&config);
    if issues.is_empty() {
        Ok(config)
    } else {
        Err(ConfigErrors(issues))
    }
}

/// Reads, parses and checks a config file.
pub fn validate_config(path: &Path) -> std::result::Result<SweepConfig, ConfigErrors> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigErrors(vec![issue("$", format!("cannot read {}: {e}", path.display()))]))?;
    check_config(&text)
}

fn sweep_value_issue(variable: SweepVariable, x: f64) -> Option<String> {
    let ok = match variable {
        SweepVariable::NS => x >= 0.0 && x.is_finite(),
        SweepVariable::Xi => x > 0.0 && x < 1.0,
        SweepVariable::Eta => (0.0..=1.0).contains(&x),
        SweepVariable::M => x >= 1.0 && x.fract() == 0.0 && x <= u64::MAX as f64,
        SweepVariable::GI => x >= 1.0 && x.is_finite(),
    };
    let want = match variable {
        SweepVariable::NS => "a nonnegative photon number",
        SweepVariable::Xi => "in (0, 1)",
        SweepVariable::Eta => "in [0, 1]",
        SweepVariable::M => "a positive integer",
        SweepVariable::GI => "a gain >= 1",
    };
    (!ok).then(|| format!("value {x} for {} must be {want}", variable.as_str()))
}

/// Every constraint violation in an already parsed config.
pub fn config_issues(config: &SweepConfig) -> Vec<ConfigIssue> {
    let mut out = Vec::new();
    if config.schema_version != SCHEMA_VERSION {
        out.push(issue(
            "schema_version",
            format!("unsupported schema version {}, expected {SCHEMA_VERSION}", config.schema_version),
        ));
    }
    for (field, e) in config.scenario.field_violations() {
        out.push(issue(format!("scenario.{field}"), e.to_string()));
    }
    if let Some(sweep) = &config.sweep {
        if let Grid::Log { log } = &sweep.grid {
            if !(log.start > 0.0 && log.start.is_finite() && log.stop > 0.0 && log.stop.is_finite()) {
                out.push(issue("sweep.grid.log", "start and stop must be positive and finite"));
            }
            if log.points == 0 {
                out.push(issue("sweep.grid.log.points", "must be at least 1"));
            } else if log.points > 1 && log.start == log.stop {
                out.push(issue("sweep.grid.log", "start and stop must differ when points > 1"));
            }
        }
        let values = sweep.values();
        if values.is_empty() {
            out.push(issue("sweep.grid", "must not be empty"));
        }
        let increasing = values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = values.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            out.push(issue("sweep.grid", "must be strictly monotone"));
        }
        for (i, &x) in values.iter().enumerate() {
            if let Some(m) = sweep_value_issue(sweep.variable, x) {
                out.push(issue(format!("sweep.grid[{i}]"), m));
            }
        }
        if sweep.variable == SweepVariable::M
            && !config.outputs.iter().any(|o| matches!(o, OutputKind::Roc | OutputKind::Stein))
        {
            out.push(issue("sweep.variable", "M only affects roc and stein outputs"));
        }
    }
    if config.outputs.is_empty() {
        out.push(issue("outputs", "at least one output is required"));
    }
    let mut seen = BTreeSet::new();
    for (i, o) in config.outputs.iter().enumerate() {
        if !seen.insert(*o) {
            out.push(issue(format!("outputs[{i}]"), "duplicate output"));
        }
    }
    if config.outputs.contains(&OutputKind::Roc) {
        match &config.detection {
            None => out.push(issue("detection", "required when roc output is requested")),
            Some(d) => {
                if let Err(e) = d.validate() {
                    out.push(issue("detection", e.to_string()));
                }
            }
        }
    }
    if config.outputs.contains(&OutputKind::Stein) {
        match &config.stein {
            None => out.push(issue("stein", "required when stein output is requested")),
            Some(s) => {
                if !(s.epsilon > 0.0 && s.epsilon < 1.0) {
                    out.push(issue("stein.epsilon", format!("must lie in (0, 1), got {}", s.epsilon)));
                }
                if s.m == 0 {
                    out.push(issue("stein.M", "must be at least 1"));
                }
            }
        }
    }
    if config.output_path.is_empty() {
        out.push(issue("output_path", "must not be empty"));
    }
    out
}

/// Parameters of one grid point after applying the sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct PointParams {
    pub scenario: RadarScenario,
    pub detection: Option<DetectionConfig>,
    pub stein: Option<SteinConfig>,
}

fn point_params(config: &SweepConfig, value: Option<f64>) -> PointParams {
    let mut p = PointParams { scenario: config.scenario, detection: config.detection.clone(), stein: config.stein };
    if let (Some(sweep), Some(x)) = (&config.sweep, value) {
        match sweep.variable {
            SweepVariable::NS => p.scenario.source.n_s = x,
            SweepVariable::Xi => p.scenario.source.xi = x,
            SweepVariable::Eta => p.scenario.eta = x,
            SweepVariable::GI => p.scenario.g_i = x,
            SweepVariable::M => {
                let m = x as u64;
                if let Some(d) = p.detection.as_mut() {
                    d.m = m;
                }
                if let Some(s) = p.stein.as_mut() {
                    s.m = m;
                }
            }
        }
    }
    p
}

fn grid_of(config: &SweepConfig) -> Vec<Option<f64>> {
    match &config.sweep {
        Some(s) => s.values().into_iter().map(Some).collect(),
        None => vec![None],
    }
}

fn with_kind(scenario: &RadarScenario, kind: SourceKind) -> RadarScenario {
    scenario.with_source(scenario.source.with_kind(kind))
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn join_errors(errors: &[Error]) -> String {
    errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
}

/// `(κ_TMSV/√η, κ_CCN/√η, Q_A)` from the pipeline.
pub fn kappa_row(scenario: &RadarScenario) -> (Option<f64>, Option<f64>, Option<f64>, Vec<Error>) {
    let mut errors = Vec::new();
    if !(scenario.eta > 0.0) {
        errors.push(Error::Domain("eta must be positive for the sqrt(eta) rescaling".into()));
        return (None, None, None, errors);
    }
    let scale = scenario.eta.sqrt();
    let mut run = |kind| match pipeline_kappa(&with_kind(scenario, kind)) {
        Ok(k) => Some(k),
        Err(e) => {
            errors.push(e);
            None
        }
    };
    let q = run(SourceKind::Tmsv);
    let c = run(SourceKind::Ccn);
    let q_a = match (q, c) {
        (Some(q), Some(c)) if c > 0.0 => Some((q / c).powi(2)),
        (Some(_), Some(_)) => {
            errors.push(Error::Degenerate("classical cross-correlation vanishes".into()));
            None
        }
        _ => None,
    };
    (q.map(|k| k / scale), c.map(|k| k / scale), q_a, errors)
}

/// `(D, V)` between the target-present and target-absent states.
pub fn relative_entropy_pair(scenario: &RadarScenario) -> Result<(f64, f64)> {
    let r1 = simulate_scenario(scenario, Hypothesis::TargetPresent)?;
    let r0 = simulate_scenario(scenario, Hypothesis::TargetAbsent)?;
    Ok((relative_entropy_gaussian(&r1, &r0)?, relative_entropy_variance_gaussian(&r1, &r0)?))
}

/// ROC curves for both source kinds, analytic and Monte Carlo.
pub fn roc_curves(scenario: &RadarScenario, detection: &DetectionConfig) -> Vec<(String, Result<RocCurve>)> {
    let mut out = Vec::new();
    for kind in [SourceKind::Tmsv, SourceKind::Ccn] {
        let sc = with_kind(scenario, kind);
        let analytic = simulate_scenario(&sc, Hypothesis::TargetPresent)
            .and_then(|s| crate::detection::heterodyne_kappa(&s))
            .and_then(|k| roc_analytic(k, detection.m, &detection.p_fa_grid));
        out.push((format!("{}-analytic", kind.as_str()), analytic));
        out.push((format!("{}-empirical", kind.as_str()), roc_empirical(&sc, HypothesisPair::default(), detection)));
    }
    out
}

struct Csv {
    writer: csv::Writer<Vec<u8>>,
}

impl Csv {
    fn new(header: &[&str]) -> Result<Self> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(Self { writer })
    }

    fn row(&mut self, fields: Vec<String>) -> Result<()> {
        self.writer.write_record(fields)?;
        Ok(())
    }

    fn finish(self) -> Result<Vec<u8>> {
        self.writer.into_inner().map_err(|e| Error::Io(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointError {
    pub index: usize,
    pub output: OutputKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub version: String,
    pub schema_version: u32,
    pub seed: Option<u64>,
    pub config: SweepConfig,
    pub sweep_variable: Option<SweepVariable>,
    pub grid: Vec<f64>,
    pub files: Vec<String>,
    pub errors: Vec<PointError>,
}

/// Files produced by a run, with their contents.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub files: Vec<(String, Vec<u8>)>,
    pub manifest: Manifest,
}

impl RunOutput {
    /// Writes every file plus `manifest.json` into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let p = dir.join(name);
            fs::write(&p, bytes)?;
            written.push(p);
        }
        let p = dir.join("manifest.json");
        let mut json = serde_json::to_string_pretty(&self.manifest).map_err(|e| Error::Io(e.to_string()))?;
        json.push('\n');
        fs::write(&p, json)?;
        written.push(p);
        Ok(written)
    }
}

/// Evaluates the requested outputs (or only `only`) over the grid.
///
/// Grid points run in parallel; rows are emitted in grid order, so the output
/// bytes do not depend on the thread count.
pub fn run_sweep(config: &SweepConfig, only: Option<OutputKind>) -> Result<RunOutput> {
    let issues = config_issues(config);
    if !issues.is_empty() {
        return Err(ConfigErrors(issues).into());
    }
    let outputs: Vec<OutputKind> = match only {
        Some(o) => {
            if !config.outputs.contains(&o) {
                let mut c = config.clone();
                c.outputs = vec![o];
                let issues = config_issues(&c);
                if !issues.is_empty() {
                    return Err(ConfigErrors(issues).into());
                }
            }
            vec![o]
        }
        None => config.outputs.clone(),
    };
    let grid = grid_of(config);
    let params: Vec<PointParams> = grid.iter().map(|v| point_params(config, *v)).collect();
    let mut files = Vec::new();
    let mut errors = Vec::new();

    for output in outputs {
        match output {
            OutputKind::Kappa => {
                let rows: Vec<_> = params.par_iter().map(|p| kappa_row(&p.scenario)).collect();
                let mut csv = Csv::new(&["N_S", "xi", "kappa_tmsv", "kappa_ccn", "q_a", "error"])?;
                for (i, (p, (q, c, qa, errs))) in params.iter().zip(rows).enumerate() {
                    let msg = join_errors(&errs);
                    if !msg.is_empty() {
                        errors.push(PointError { index: i, output, message: msg.clone() });
                    }
                    let s = &p.scenario.source;
                    csv.row(vec![fmt_f64(s.n_s), fmt_f64(s.xi), opt(q), opt(c), opt(qa), msg])?;
                }
                files.push(("kappa.csv".to_string(), csv.finish()?));
            }
            OutputKind::Advantage => {
                let rows: Vec<_> = params.par_iter().map(|p| kappa_row(&p.scenario)).collect();
                let mut csv = Csv::new(&["N_S", "xi", "G_I", "q_a", "q_a_formula", "error"])?;
                for (i, (p, (_, _, qa, errs))) in params.iter().zip(rows).enumerate() {
                    let msg = join_errors(&errs);
                    if !msg.is_empty() {
                        errors.push(PointError { index: i, output, message: msg.clone() });
                    }
                    let sc = &p.scenario;
                    // The closed form covers an unamplified idler with a vacuum cold port.
                    let formula = if sc.g_i == 1.0 && sc.source.n_1 == 0.0 {
                        quantum_advantage(sc.source.n_s, sc.source.xi).ok()
                    } else {
                        None
                    };
                    csv.row(vec![fmt_f64(sc.source.n_s), fmt_f64(sc.source.xi), fmt_f64(sc.g_i), opt(qa), opt(formula), msg])?;
                }
                files.push(("advantage.csv".to_string(), csv.finish()?));
            }
            OutputKind::Roc => {
                let curves: Vec<_> = params
                    .par_iter()
                    .map(|p| roc_curves(&p.scenario, p.detection.as_ref().expect("validated")))
                    .collect();
                let single = config.sweep.is_none();
                for (i, point) in curves.into_iter().enumerate() {
                    let mut csv = Csv::new(&["p_fa", "p_d", "stderr", "source_kind", "error"])?;
                    for (label, curve) in point {
                        match curve {
                            Ok(c) => {
                                for (j, (p_fa, p_d)) in c.points.iter().enumerate() {
                                    let se = c.stderr.as_ref().map(|s| fmt_f64(s[j])).unwrap_or_default();
                                    csv.row(vec![fmt_f64(*p_fa), fmt_f64(*p_d), se, label.clone(), String::new()])?;
                                }
                            }
                            Err(e) => {
                                errors.push(PointError { index: i, output, message: format!("{label}: {e}") });
                                csv.row(vec![String::new(), String::new(), String::new(), label, e.to_string()])?;
                            }
                        }
                    }
                    let name = if single { "roc.csv".to_string() } else { format!("roc_{i:03}.csv") };
                    files.push((name, csv.finish()?));
                }
            }
            OutputKind::Stein => {
                let rows: Vec<_> = params.par_iter().map(stein_row).collect();
                let mut csv = Csv::new(&["M", "exponent_tmsv", "exponent_ccn", "D", "V", "error"])?;
                for (i, (p, (et, ec, d, v, errs))) in params.iter().zip(rows).enumerate() {
                    let msg = join_errors(&errs);
                    if !msg.is_empty() {
                        errors.push(PointError { index: i, output, message: msg.clone() });
                    }
                    let m = p.stein.expect("validated").m;
                    csv.row(vec![m.to_string(), opt(et), opt(ec), opt(d), opt(v), msg])?;
                }
                files.push(("stein.csv".to_string(), csv.finish()?));
            }
        }
    }

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        schema_version: config.schema_version,
        seed: config.detection.as_ref().map(|d| d.seed),
        config: config.clone(),
        sweep_variable: config.sweep.as_ref().map(|s| s.variable),
        grid: grid.iter().flatten().copied().collect(),
        files: files.iter().map(|(n, _)| n.clone()).collect(),
        errors,
    };
    Ok(RunOutput { files, manifest })
}

type SteinRow = (Option<f64>, Option<f64>, Option<f64>, Option<f64>, Vec<Error>);

/// Exponents for both sources, plus `D` and `V` for the scenario's own source.
fn stein_row(p: &PointParams) -> SteinRow {
    let stein = p.stein.expect("validated");
    let mut errors = Vec::new();
    let mut exponent = |kind| {
        relative_entropy_pair(&with_kind(&p.scenario, kind))
            .and_then(|(d, v)| Ok((d, v, stein_exponent(d.max(0.0), v, stein.m, stein.epsilon)?.exponent)))
            .map_err(|e| errors.push(e))
            .ok()
    };
    let t = exponent(SourceKind::Tmsv);
    let c = exponent(SourceKind::Ccn);
    let own = match p.scenario.source.kind {
        SourceKind::Tmsv => t,
        SourceKind::Ccn => c,
    };
    (t.map(|x| x.2), c.map(|x| x.2), own.map(|x| x.0), own.map(|x| x.1), errors)
}
