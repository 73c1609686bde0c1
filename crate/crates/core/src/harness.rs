//! Experiment configuration, seeded ensemble execution and curve output.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::agent::Agent;
use crate::classical::{ClassicalAgent, LearningParams};
use crate::compressed::{CompressedAgent, CompressedNoise, DriveCouplings};
use crate::dynamics::PeakStrategy;
use crate::environment::{
    efficiency_curve, run_interacting_trial, run_trial, EfficiencySource, InteractionMode, InvasionGame,
    LearningCurve, TrialRecord, CurveRow,
};
use crate::error::{Error, Result};
use crate::excitation::{CouplingSpec, DeliberationConfig, ExcitationAgent, PeakObservable};
use crate::numerics::TimeGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Classical,
    /// One mode per clip.
    Qm1,
    /// Percepts compressed into one register.
    Qm2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interaction {
    None,
    Mode1,
    Mode2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: Model,
    pub trials: usize,
    pub agents: usize,
    pub damping: f64,
    pub reward: f64,
    pub kappa: f64,
    pub decay: f64,
    /// Percept-register dephasing, compressed model only.
    pub dephasing: f64,
    pub t_max: f64,
    pub grid_points: usize,
    /// Number of symbols in the game.
    pub d: usize,
    pub interaction: Interaction,
    pub seed: u64,
    pub peak_strategy: PeakStrategy,
    pub peak_observable: PeakObservable,
    pub efficiency_source: EfficiencySource,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: Model::Classical,
            trials: 1000,
            agents: 100,
            damping: 0.01,
            reward: 1.0,
            kappa: 0.0,
            decay: 0.0,
            dephasing: 0.0,
            t_max: 2.0 * PI,
            grid_points: 401,
            d: 2,
            interaction: Interaction::None,
            seed: 0,
            peak_strategy: PeakStrategy::FirstLocalMax,
            peak_observable: PeakObservable::Summed,
            efficiency_source: EfficiencySource::Probability,
        }
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "model",
    "trials",
    "agents",
    "damping",
    "reward",
    "kappa",
    "decay",
    "dephasing",
    "t_max",
    "grid_points",
    "d",
    "interaction",
    "seed",
    "peak_strategy",
    "peak_observable",
    "efficiency_source",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Config { line, message: format!("{key}: cannot parse `{value}`") })
}

fn range_err(key: &str, value: impl std::fmt::Display, expected: &str, line: usize) -> Error {
    Error::Config { line, message: format!("{key} = {value} out of range (expected {expected})") }
}

fn choice<T: Copy>(key: &str, value: &str, options: &[(&str, T)], line: usize) -> Result<T> {
    options.iter().find(|(name, _)| *name == value).map(|(_, v)| *v).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        Error::Config { line, message: format!("{key}: unknown value `{value}` (expected one of {})", names.join(", ")) }
    })
}

const MODELS: &[(&str, Model)] = &[("classical", Model::Classical), ("qm1", Model::Qm1), ("qm2", Model::Qm2)];
const INTERACTIONS: &[(&str, Interaction)] =
    &[("none", Interaction::None), ("mode1", Interaction::Mode1), ("mode2", Interaction::Mode2)];
const STRATEGIES: &[(&str, PeakStrategy)] =
    &[("global-max", PeakStrategy::GlobalMax), ("first-local-max", PeakStrategy::FirstLocalMax)];
const OBSERVABLES: &[(&str, PeakObservable)] =
    &[("summed", PeakObservable::Summed), ("per-action", PeakObservable::PerAction)];
const SOURCES: &[(&str, EfficiencySource)] =
    &[("probability", EfficiencySource::Probability), ("outcome", EfficiencySource::Outcome)];

fn name_of<T: PartialEq + Copy>(options: &[(&'static str, T)], value: T) -> &'static str {
    options.iter().find(|(_, v)| *v == value).map(|(n, _)| *n).expect("every variant is named")
}

impl ExperimentConfig {
    /// Sets one key from its textual value; `line` is used in diagnostics.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let rate = |v: f64, key: &str| if v >= 0.0 && v.is_finite() { Ok(v) } else { Err(range_err(key, v, ">= 0", line)) };
        match key {
            "model" => self.model = choice(key, value, MODELS, line)?,
            "trials" => {
                self.trials = parse_num(key, value, line)?;
                if self.trials == 0 {
                    return Err(range_err(key, value, ">= 1", line));
                }
            }
            "agents" => {
                self.agents = parse_num(key, value, line)?;
                if self.agents == 0 {
                    return Err(range_err(key, value, ">= 1", line));
                }
            }
            "damping" => {
                let v: f64 = parse_num(key, value, line)?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(range_err(key, v, "[0, 1]", line));
                }
                self.damping = v;
            }
            "reward" => self.reward = rate(parse_num(key, value, line)?, key)?,
            "kappa" => self.kappa = rate(parse_num(key, value, line)?, key)?,
            "decay" => self.decay = rate(parse_num(key, value, line)?, key)?,
            "dephasing" => self.dephasing = rate(parse_num(key, value, line)?, key)?,
            "t_max" => {
                let v: f64 = parse_num(key, value, line)?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(range_err(key, v, "> 0", line));
                }
                self.t_max = v;
            }
            "grid_points" => {
                self.grid_points = parse_num(key, value, line)?;
                if self.grid_points < 2 {
                    return Err(range_err(key, value, ">= 2", line));
                }
            }
            "d" => {
                self.d = parse_num(key, value, line)?;
                if self.d < 2 {
                    return Err(range_err(key, value, ">= 2", line));
                }
            }
            "interaction" => self.interaction = choice(key, value, INTERACTIONS, line)?,
            "seed" => self.seed = parse_num(key, value, line)?,
            "peak_strategy" => self.peak_strategy = choice(key, value, STRATEGIES, line)?,
            "peak_observable" => self.peak_observable = choice(key, value, OBSERVABLES, line)?,
            "efficiency_source" => self.efficiency_source = choice(key, value, SOURCES, line)?,
            _ => return Err(Error::Config { line, message: format!("unknown key `{key}`") }),
        }
        Ok(())
    }

    /// Every key with its resolved value, parseable by [`parse_config`].
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("model", name_of(MODELS, self.model).into());
        kv("trials", self.trials.to_string());
        kv("agents", self.agents.to_string());
        kv("damping", self.damping.to_string());
        kv("reward", self.reward.to_string());
        kv("kappa", self.kappa.to_string());
        kv("decay", self.decay.to_string());
        kv("dephasing", self.dephasing.to_string());
        kv("t_max", self.t_max.to_string());
        kv("grid_points", self.grid_points.to_string());
        kv("d", self.d.to_string());
        kv("interaction", name_of(INTERACTIONS, self.interaction).into());
        kv("seed", self.seed.to_string());
        kv("peak_strategy", name_of(STRATEGIES, self.peak_strategy).into());
        kv("peak_observable", name_of(OBSERVABLES, self.peak_observable).into());
        kv("efficiency_source", name_of(SOURCES, self.efficiency_source).into());
        out
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(0.0, self.t_max, self.grid_points)
    }

    fn deliberation(&self) -> Result<DeliberationConfig> {
        Ok(DeliberationConfig { grid: self.grid()?, strategy: self.peak_strategy, observable: self.peak_observable })
    }

    /// A freshly initialized agent of the configured model.
    pub fn build_agent(&self) -> Result<Box<dyn Agent>> {
        let params = LearningParams::new(self.damping, self.reward)?;
        Ok(match self.model {
            Model::Classical => Box::new(ClassicalAgent::invasion_game(self.d, params)),
            Model::Qm1 => {
                let spec = CouplingSpec::invasion_game(self.d, 1.0, self.kappa, self.decay)?;
                Box::new(ExcitationAgent::new(spec, params, self.deliberation()?))
            }
            Model::Qm2 => {
                let noise = CompressedNoise { decay: self.decay, dephasing: self.dephasing };
                let couplings = DriveCouplings::uniform(self.d, self.d, 1.0)?;
                Box::new(CompressedAgent::new(couplings, params, noise, self.deliberation()?)?)
            }
        })
    }
}

/// Keys without a sensible default.
pub const REQUIRED_KEYS: &[&str] = &["trials"];

/// Parses `key = value` lines; `#` starts a comment. Absent keys other than
/// [`REQUIRED_KEYS`] keep their defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    let mut seen: Vec<String> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Config { line, message: format!("expected `key = value`, got `{content}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(Error::Config { line, message: format!("expected `key = value`, got `{content}`") });
        }
        if seen.iter().any(|k| k == key) {
            return Err(Error::Config { line, message: format!("duplicate key `{key}`") });
        }
        config.set(key, value, line)?;
        seen.push(key.to_string());
    }
    for key in REQUIRED_KEYS {
        if !seen.iter().any(|k| k == key) {
            return Err(Error::MissingConfigKey(key));
        }
    }
    Ok(config)
}

/// Learning curves of one ensemble run; `agent2` is present for interacting runs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleCurves {
    pub agent1: LearningCurve,
    pub agent2: Option<LearningCurve>,
}

/// Independent stream for ensemble member `agent_index`.
pub fn child_rng(seed: u64, agent_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(agent_index as u64);
    rng
}

type AgentRecords = (Vec<TrialRecord>, Option<Vec<TrialRecord>>);

fn run_member(config: &ExperimentConfig, game: &InvasionGame, index: usize) -> Result<AgentRecords> {
    let wrap = |trial: usize| move |e: Error| Error::Agent { agent: index, trial, source: Box::new(e) };
    let mut rng = child_rng(config.seed, index);
    let mut first = config.build_agent().map_err(wrap(0))?;
    let mode = match config.interaction {
        Interaction::None => None,
        Interaction::Mode1 => Some(InteractionMode::Relay),
        Interaction::Mode2 => Some(InteractionMode::Imitate),
    };
    match mode {
        None => {
            let records = (0..config.trials)
                .map(|t| run_trial(first.as_mut(), game, t, &mut rng).map_err(wrap(t)))
                .collect::<Result<Vec<_>>>()?;
            Ok((records, None))
        }
        Some(mode) => {
            let mut second = config.build_agent().map_err(wrap(0))?;
            let mut r1 = Vec::with_capacity(config.trials);
            let mut r2 = Vec::with_capacity(config.trials);
            for t in 0..config.trials {
                let (a, b) = run_interacting_trial(first.as_mut(), second.as_mut(), game, mode, t, &mut rng)
                    .map_err(wrap(t))?;
                r1.push(a);
                r2.push(b);
            }
            Ok((r1, Some(r2)))
        }
    }
}

/// Raw per-agent records, in agent order.
pub fn run_ensemble_records(config: &ExperimentConfig) -> Result<Vec<AgentRecords>> {
    let game = InvasionGame::new(config.d)?;
    (0..config.agents).into_par_iter().map(|i| run_member(config, &game, i)).collect()
}

pub fn curves_from_records(config: &ExperimentConfig, records: Vec<AgentRecords>) -> Result<EnsembleCurves> {
    let (first, second): (Vec<_>, Vec<_>) = records.into_iter().unzip();
    let agent1 = efficiency_curve(&first, config.d, config.efficiency_source)?;
    let agent2 = match second.into_iter().collect::<Option<Vec<_>>>() {
        Some(r2) => Some(efficiency_curve(&r2, config.d, config.efficiency_source)?),
        None => None,
    };
    Ok(EnsembleCurves { agent1, agent2 })
}

/// Runs every ensemble member on rayon's current pool and aggregates in
/// agent order.
pub fn run_ensemble(config: &ExperimentConfig) -> Result<EnsembleCurves> {
    curves_from_records(config, run_ensemble_records(config)?)
}

/// [`run_ensemble`] on a dedicated pool of `threads` workers.
pub fn run_ensemble_with_threads(config: &ExperimentConfig, threads: usize) -> Result<EnsembleCurves> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    pool.install(|| run_ensemble(config))
}

pub fn curve_csv(curve: &LearningCurve) -> String {
    let mut out = String::from("trial,mean,std");
    for p in 0..curve.n_percepts() {
        let _ = write!(out, ",p{p}_mean");
    }
    out.push('\n');
    for row in &curve.rows {
        let _ = write!(out, "{},{:.9},{:.9}", row.trial, row.mean, row.std);
        for m in &row.percept_means {
            let _ = write!(out, ",{m:.9}");
        }
        out.push('\n');
    }
    out
}

pub fn emit_csv(curve: &LearningCurve, destination: &Path) -> Result<()> {
    fs::write(destination, curve_csv(curve))?;
    Ok(())
}

/// Inverse of [`curve_csv`].
pub fn parse_curve_csv(text: &str) -> Result<LearningCurve> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::CurveParse { line: 1, reason: "empty file".into() })?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 3 || columns[..3] != ["trial", "mean", "std"] {
        return Err(Error::CurveParse { line: 1, reason: format!("bad header `{header}`") });
    }
    let n_percepts = columns.len() - 3;
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let line_no = n + 2;
        let bad = |reason: String| Error::CurveParse { line: line_no, reason };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(bad(format!("expected {} fields, found {}", columns.len(), fields.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}`")));
        rows.push(CurveRow {
            trial: fields[0].parse().map_err(|_| bad(format!("bad trial `{}`", fields[0])))?,
            mean: num(fields[1])?,
            std: num(fields[2])?,
            percept_means: fields[3..].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?,
        });
        debug_assert_eq!(rows.last().map(|r| r.percept_means.len()), Some(n_percepts));
    }
    Ok(LearningCurve { rows })
}

const SVG_WIDTH: f64 = 800.0;
const SVG_HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 60.0;

fn plot_x(trial: f64, last_trial: f64) -> f64 {
    let span = SVG_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    MARGIN_LEFT + if last_trial > 0.0 { trial / last_trial * span } else { span / 2.0 }
}

fn plot_y(value: f64) -> f64 {
    let span = SVG_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    MARGIN_TOP + (1.0 - value.clamp(0.0, 1.0)) * span
}

/// Line plot of the mean efficiency with a ±1 std band.
pub fn curve_svg(curve: &LearningCurve) -> String {
    let last = curve.rows.last().map_or(0.0, |r| r.trial as f64);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for tick in 0..=4 {
        let v = f64::from(tick) * 0.25;
        let y = plot_y(v);
        let _ = writeln!(
            s,
            r##"<line class="gridline" x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            SVG_WIDTH - MARGIN_RIGHT
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{v:.2}</text>"#,
            MARGIN_LEFT - 8.0,
            y + 4.0
        );
    }
    let bottom = plot_y(0.0);
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN_LEFT}" y1="{bottom:.2}" x2="{:.2}" y2="{bottom:.2}" stroke="black"/>"#,
        SVG_WIDTH - MARGIN_RIGHT
    );
    let _ = writeln!(s, r#"<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{bottom:.2}" stroke="black"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">trial</text>"#,
        (MARGIN_LEFT + SVG_WIDTH - MARGIN_RIGHT) / 2.0,
        SVG_HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 18 {:.2})">learning efficiency</text>"#,
        (MARGIN_TOP + bottom) / 2.0,
        (MARGIN_TOP + bottom) / 2.0
    );

    if curve.rows.iter().any(|r| r.std > 0.0) {
        let upper = curve.rows.iter().map(|r| (r.trial as f64, r.mean + r.std));
        let lower = curve.rows.iter().rev().map(|r| (r.trial as f64, r.mean - r.std));
        let points: Vec<String> =
            upper.chain(lower).map(|(t, v)| format!("{:.2},{:.2}", plot_x(t, last), plot_y(v))).collect();
        let _ = writeln!(s, r##"<polygon class="std-band" points="{}" fill="#1f77b4" fill-opacity="0.25" stroke="none"/>"##, points.join(" "));
    }
    let points: Vec<String> =
        curve.rows.iter().map(|r| format!("{:.2},{:.2}", plot_x(r.trial as f64, last), plot_y(r.mean))).collect();
    let _ = writeln!(s, r##"<polyline class="mean" points="{}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##, points.join(" "));
    s.push_str("</svg>\n");
    s
}

pub fn emit_svg(curve: &LearningCurve, destination: &Path) -> Result<()> {
    fs::write(destination, curve_svg(curve))?;
    Ok(())
}

/// Writes `curve.csv`, `curve.svg` and `config.resolved` into `out_dir`;
/// interacting runs add `curve_agent2.csv` and `curve_agent2.svg`.
pub fn write_outputs(config: &ExperimentConfig, curves: &EnsembleCurves, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    emit_csv(&curves.agent1, &out_dir.join("curve.csv"))?;
    emit_svg(&curves.agent1, &out_dir.join("curve.svg"))?;
    if let Some(second) = &curves.agent2 {
        emit_csv(second, &out_dir.join("curve_agent2.csv"))?;
        emit_svg(second, &out_dir.join("curve_agent2.svg"))?;
    }
    fs::write(out_dir.join("config.resolved"), config.to_config_text())?;
    Ok(())
}
