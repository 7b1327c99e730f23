//! TOML experiment configuration.
//!
//! ```toml
//! seed = 7
//! horizons = [100, 1000]
//!
//! [output]
//! csv = "results.csv"
//!
//! [[scenario]]
//! id = "interior"
//! theorems = ["thm4"]
//! lemmas = ["lemma6"]
//! set = { kind = "ball", dimension = 2, radius = 1.0 }
//! stream = { family = "drifting-quadratic", alpha = 1.0, center = [0.1, 0.0], interior_radius = 0.5 }
//! stream.schedule = { kind = "sinusoid", magnitude = 0.2, period = 50 }
//!
//! [[scenario.learner]]
//! id = "ofw-ls"
//! kind = "ofw-linesearch"
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::learners::{InnerIterations, LearnerConfig, LearnerKind, StepSize};
use crate::metrics::{LemmaId, TheoremId, DEFAULT_LEMMA_TOL, DEFAULT_MINIMIZER_TOL};
use crate::sets::FeasibleSet;
use crate::streams::{make_stream, DriftSchedule, FamilySpec, LossSpec, ScheduleKind};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub horizons: Vec<usize>,
    /// Worker threads; `None` uses every core.
    pub threads: Option<usize>,
    pub output: OutputSpec,
    pub tolerances: Tolerances,
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    /// Fill `wall_ms`. Off by default so repeated runs are byte-identical.
    #[serde(default)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub lemma: f64,
    pub certificate: f64,
    pub minimizer: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            lemma: DEFAULT_LEMMA_TOL,
            certificate: 1e-6,
            minimizer: DEFAULT_MINIMIZER_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub set: FeasibleSet,
    pub loss: LossSpec,
    pub schedule: DriftSchedule,
    pub theorems: Vec<TheoremId>,
    pub lemmas: Vec<LemmaId>,
    pub learners: Vec<NamedLearner>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedLearner {
    pub id: String,
    pub config: LearnerConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: u64,
    horizons: Vec<usize>,
    threads: Option<usize>,
    #[serde(default)]
    output: OutputSpec,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(rename = "scenario", default)]
    scenarios: Vec<RawScenario>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    id: String,
    #[serde(default)]
    theorems: Vec<TheoremId>,
    #[serde(default)]
    lemmas: Vec<LemmaId>,
    set: RawSet,
    stream: RawStream,
    #[serde(rename = "learner", default)]
    learners: Vec<RawLearner>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawSet {
    Ball {
        dimension: Option<usize>,
        radius: f64,
        center: Option<Vec<f64>>,
        beta_k: Option<f64>,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Simplex {
        dimension: usize,
    },
    L1Ball {
        dimension: usize,
        radius: f64,
    },
}

#[derive(Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
enum RawStream {
    DriftingQuadratic {
        alpha: f64,
        center: Vec<f64>,
        interior_radius: Option<f64>,
        schedule: Option<RawSchedule>,
    },
    Rank1Quadratic {
        alpha: f64,
        direction: Vec<f64>,
        target: f64,
        schedule: Option<RawSchedule>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    kind: ScheduleKind,
    #[serde(default)]
    magnitude: f64,
    period: Option<usize>,
    switches: Option<usize>,
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLearner {
    id: String,
    kind: LearnerKind,
    sigma: Option<RawSigma>,
    k_inner: Option<RawInner>,
    alpha: Option<f64>,
    initial_point: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSigma {
    Value(f64),
    Named(SigmaName),
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case")]
enum SigmaName {
    InvSqrtT,
    Oracle,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawInner {
    Count(usize),
    Named(InnerName),
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case")]
enum InnerName {
    Auto,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let path = e
            .span()
            .map(|s| format!("offset {}", s.start))
            .unwrap_or_else(|| "<document>".into());
        Error::config(path, e.message().to_string())
    })?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<ExperimentConfig> {
    if raw.horizons.is_empty() {
        return Err(Error::config("horizons", "at least one horizon is required"));
    }
    let mut seen = HashSet::new();
    for (i, &t) in raw.horizons.iter().enumerate() {
        if t == 0 {
            return Err(Error::config(format!("horizons[{i}]"), "horizons must be >= 1"));
        }
        if !seen.insert(t) {
            return Err(Error::config(format!("horizons[{i}]"), format!("duplicate horizon {t}")));
        }
    }
    if raw.threads == Some(0) {
        return Err(Error::config("threads", "must be >= 1 (omit to use every core)"));
    }
    let tol = raw.tolerances;
    for (name, v) in [("lemma", tol.lemma), ("certificate", tol.certificate), ("minimizer", tol.minimizer)] {
        if !(v.is_finite() && v >= 0.0) || (name == "minimizer" && v == 0.0) {
            return Err(Error::config(format!("tolerances.{name}"), format!("invalid tolerance {v}")));
        }
    }
    if raw.scenarios.is_empty() {
        return Err(Error::config("scenario", "at least one [[scenario]] is required"));
    }
    let mut ids = HashSet::new();
    let mut scenarios = Vec::with_capacity(raw.scenarios.len());
    for (i, s) in raw.scenarios.into_iter().enumerate() {
        let key = format!("scenario[{i}]");
        if !ids.insert(s.id.clone()) {
            return Err(Error::config(format!("{key}.id"), format!("duplicate scenario id `{}`", s.id)));
        }
        scenarios.push(validate_scenario(&key, s, raw.seed)?);
    }
    Ok(ExperimentConfig {
        seed: raw.seed,
        horizons: raw.horizons,
        threads: raw.threads,
        output: raw.output,
        tolerances: tol,
        scenarios,
    })
}

fn build_set(key: &str, raw: RawSet) -> Result<FeasibleSet> {
    let wrap = |e: Error| Error::config(format!("{key}.set"), e.to_string());
    match raw {
        RawSet::Ball {
            dimension,
            radius,
            center,
            beta_k,
        } => {
            let center = match (center, dimension) {
                (Some(c), Some(d)) if c.len() != d => {
                    return Err(Error::config(
                        format!("{key}.set.center"),
                        format!("length {} does not match dimension {d}", c.len()),
                    ))
                }
                (Some(c), _) => c,
                (None, Some(d)) => vec![0.0; d],
                (None, None) => {
                    return Err(Error::config(format!("{key}.set"), "ball needs `dimension` or `center`"))
                }
            };
            let set = FeasibleSet::ball(center, radius).map_err(wrap)?;
            match beta_k {
                Some(b) => set
                    .with_strong_convexity(b)
                    .map_err(|e| Error::config(format!("{key}.set.beta_k"), e.to_string())),
                None => Ok(set),
            }
        }
        RawSet::Box { lower, upper } => FeasibleSet::cube(lower, upper).map_err(wrap),
        RawSet::Simplex { dimension } => FeasibleSet::simplex(dimension).map_err(wrap),
        RawSet::L1Ball { dimension, radius } => FeasibleSet::l1_ball(dimension, radius).map_err(wrap),
    }
}

fn build_schedule(key: &str, raw: Option<RawSchedule>, seed: u64) -> Result<DriftSchedule> {
    let Some(raw) = raw else {
        return Ok(DriftSchedule::fixed());
    };
    let key = format!("{key}.stream.schedule");
    if !(raw.magnitude.is_finite() && raw.magnitude >= 0.0) {
        return Err(Error::config(format!("{key}.magnitude"), "must be finite and >= 0"));
    }
    let seed = raw.seed.unwrap_or(seed);
    let schedule = match raw.kind {
        ScheduleKind::Static => DriftSchedule::fixed(),
        ScheduleKind::RandomWalk => DriftSchedule::random_walk(raw.magnitude, seed),
        ScheduleKind::PiecewiseConstant => {
            let switches = raw
                .switches
                .ok_or_else(|| Error::config(format!("{key}.switches"), "piecewise-constant needs `switches`"))?;
            DriftSchedule::piecewise_constant(raw.magnitude, switches, seed)
        }
        ScheduleKind::Sinusoid => {
            let period = raw
                .period
                .filter(|&p| p >= 1)
                .ok_or_else(|| Error::config(format!("{key}.period"), "sinusoid needs `period` >= 1"))?;
            DriftSchedule::sinusoid(raw.magnitude, period)
        }
    };
    Ok(schedule)
}

fn validate_scenario(key: &str, s: RawScenario, seed: u64) -> Result<Scenario> {
    if s.id.is_empty() {
        return Err(Error::config(format!("{key}.id"), "must be non-empty"));
    }
    let set = build_set(key, s.set)?;
    let (loss, schedule) = match s.stream {
        RawStream::DriftingQuadratic {
            alpha,
            center,
            interior_radius,
            schedule,
        } => (
            LossSpec {
                family: FamilySpec::DriftingQuadratic { center },
                alpha,
                interior_radius,
            },
            build_schedule(key, schedule, seed)?,
        ),
        RawStream::Rank1Quadratic {
            alpha,
            direction,
            target,
            schedule,
        } => (
            LossSpec {
                family: FamilySpec::Rank1Quadratic { direction, target },
                alpha,
                interior_radius: None,
            },
            build_schedule(key, schedule, seed)?,
        ),
    };
    // A one-round stream catches dimension and constant errors up front.
    let probe = make_stream(&loss, &schedule, &set, 1)
        .map_err(|e| Error::config(format!("{key}.stream"), e.to_string()))?;
    let beta_f = probe.beta_f();

    let mut learners = Vec::with_capacity(s.learners.len());
    let mut learner_ids = HashSet::new();
    for (j, l) in s.learners.into_iter().enumerate() {
        let lkey = format!("{key}.learner[{j}]");
        if !learner_ids.insert(l.id.clone()) {
            return Err(Error::config(format!("{lkey}.id"), format!("duplicate learner id `{}`", l.id)));
        }
        learners.push(validate_learner(&lkey, l, loss.alpha)?);
    }
    if learners.is_empty() {
        return Err(Error::config(format!("{key}.learner"), "at least one learner is required"));
    }

    let kinds: HashSet<LearnerKind> = learners.iter().map(|l| l.config.kind).collect();
    let needs_strongly_convex_set = |what: &str| {
        Error::config(
            format!("{key}.set"),
            format!("{what} needs a strongly convex set (a ball with `beta_k`); {:?} sets are not", set.kind()),
        )
    };
    let needs_interior = |path: &str, what: &str| -> Result<()> {
        if beta_f <= 0.0 {
            return Err(Error::config(
                format!("{key}.stream"),
                format!("{what} needs strongly convex losses (beta_f > 0)"),
            ));
        }
        if loss.interior_radius.is_none() {
            return Err(Error::config(
                format!("{key}.stream.interior_radius"),
                format!("{what} needs interior minimizers (set `interior_radius` in {path})"),
            ));
        }
        Ok(())
    };

    for (i, th) in s.theorems.iter().enumerate() {
        let path = format!("{key}.theorems[{i}]");
        match th {
            TheoremId::Thm3 => {
                if set.strong_convexity().is_none() {
                    return Err(needs_strongly_convex_set("thm3"));
                }
                if beta_f <= 0.0 {
                    return Err(Error::config(format!("{key}.stream"), "thm3 needs strongly convex losses (beta_f > 0)"));
                }
            }
            TheoremId::Thm4 | TheoremId::Thm5 => needs_interior(&path, th.as_str())?,
            _ => {}
        }
        if !kinds.contains(&th.learner()) {
            return Err(Error::config(path, format!("{th} certifies {} but the scenario has no such learner", th.learner())));
        }
    }
    for (i, lm) in s.lemmas.iter().enumerate() {
        let path = format!("{key}.lemmas[{i}]");
        match lm {
            LemmaId::Lemma5 => {
                if set.strong_convexity().is_none() {
                    return Err(needs_strongly_convex_set("lemma5"));
                }
            }
            LemmaId::Lemma6 | LemmaId::Lemma8 => needs_interior(&path, lm.as_str())?,
            _ => {}
        }
        if !kinds.contains(&lm.learner()) {
            return Err(Error::config(path, format!("{lm} checks {} but the scenario has no such learner", lm.learner())));
        }
    }
    for (j, l) in learners.iter().enumerate() {
        if l.config.kind == LearnerKind::OfwMulti
            && l.config.k_inner == InnerIterations::Auto
            && (beta_f <= 0.0 || loss.interior_radius.is_none())
        {
            return Err(Error::config(
                format!("{key}.learner[{j}].k_inner"),
                "automatic K needs beta_f > 0 and `interior_radius`",
            ));
        }
        if let Some(x) = &l.config.initial_point {
            if x.len() != set.dimension() || !set.contains(x, crate::sets::MEMBERSHIP_TOL).unwrap_or(false) {
                return Err(Error::config(
                    format!("{key}.learner[{j}].initial_point"),
                    "must be a point of the set",
                ));
            }
        }
    }

    Ok(Scenario {
        id: s.id,
        set,
        loss,
        schedule,
        theorems: dedup(s.theorems),
        lemmas: dedup(s.lemmas),
        learners,
    })
}

fn dedup<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v.dedup();
    v
}

fn validate_learner(key: &str, l: RawLearner, stream_alpha: f64) -> Result<NamedLearner> {
    if l.id.is_empty() {
        return Err(Error::config(format!("{key}.id"), "must be non-empty"));
    }
    let mut config = LearnerConfig::new(l.kind);
    if let Some(s) = l.sigma {
        if l.kind != LearnerKind::OfwFixed {
            return Err(Error::config(format!("{key}.sigma"), "only ofw-fixed takes a step size"));
        }
        config.sigma = match s {
            RawSigma::Value(v) => StepSize::Constant(v),
            RawSigma::Named(SigmaName::InvSqrtT) => StepSize::InvSqrtHorizon,
            RawSigma::Named(SigmaName::Oracle) => StepSize::Oracle,
        };
    }
    if let Some(k) = l.k_inner {
        if l.kind != LearnerKind::OfwMulti {
            return Err(Error::config(format!("{key}.k_inner"), "only ofw-multi takes K"));
        }
        config.k_inner = match k {
            RawInner::Count(n) => InnerIterations::Fixed(n),
            RawInner::Named(InnerName::Auto) => InnerIterations::Auto,
        };
    }
    if let Some(a) = l.alpha {
        if a < stream_alpha {
            return Err(Error::config(
                format!("{key}.alpha"),
                format!("{a} underestimates the stream's smoothness {stream_alpha}"),
            ));
        }
        if l.kind == LearnerKind::Greedy || l.kind == LearnerKind::OfwFixed {
            return Err(Error::config(format!("{key}.alpha"), format!("{} does not use alpha", l.kind)));
        }
    }
    config.alpha = l.alpha;
    config.initial_point = l.initial_point;
    config
        .validate()
        .map_err(|e| Error::config(key.to_string(), e.to_string()))?;
    Ok(NamedLearner { id: l.id, config })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 1
horizons = [1000]

[[scenario]]
id = "minimal"
set = { kind = "ball", dimension = 2, radius = 1.0 }
stream = { family = "drifting-quadratic", alpha = 1.0, center = [0.0, 0.0] }

[[scenario.learner]]
id = "ls"
kind = "ofw-linesearch"
"#;

    fn expect_config_error(text: &str, path_part: &str) {
        match parse_config(text) {
            Err(Error::Config { path, reason }) => {
                assert!(path.contains(path_part), "path `{path}` lacks `{path_part}` ({reason})")
            }
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.horizons, vec![1000]);
        assert_eq!(cfg.scenarios[0].learners[0].config.kind, LearnerKind::OfwLinesearch);
        assert_eq!(cfg.scenarios[0].schedule, DriftSchedule::fixed());
        assert_eq!(cfg.tolerances, Tolerances::default());
    }

    #[test]
    fn theorem_three_on_box_is_rejected() {
        let text = MINIMAL
            .replace(r#"{ kind = "ball", dimension = 2, radius = 1.0 }"#, r#"{ kind = "box", lower = [-1.0, -1.0], upper = [1.0, 1.0] }"#)
            .replace("id = \"minimal\"", "id = \"minimal\"\ntheorems = [\"thm3\"]");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("strongly convex set"), "{err}");
        assert!(err.contains("scenario[0].set"), "{err}");
    }

    #[test]
    fn duplicate_learner_ids_are_rejected() {
        let text = format!("{MINIMAL}\n[[scenario.learner]]\nid = \"ls\"\nkind = \"ogd\"\n");
        expect_config_error(&text, "scenario[0].learner[1].id");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("seed = 1", "seed = 1\ncolour = \"red\"");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
    }

    #[test]
    fn missing_keys_are_rejected() {
        let err = parse_config(&MINIMAL.replace("seed = 1\n", "")).unwrap_err().to_string();
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn theorem_four_needs_interior_flag() {
        let text = MINIMAL.replace("id = \"minimal\"", "id = \"minimal\"\ntheorems = [\"thm4\"]");
        expect_config_error(&text, "interior_radius");
        let ok = text.replace("center = [0.0, 0.0] }", "center = [0.0, 0.0], interior_radius = 0.5 }");
        parse_config(&ok).unwrap();
    }

    #[test]
    fn theorem_needs_matching_learner() {
        let text = MINIMAL.replace("id = \"minimal\"", "id = \"minimal\"\ntheorems = [\"thm8\"]");
        expect_config_error(&text, "scenario[0].theorems[0]");
    }

    #[test]
    fn learner_options_are_parsed() {
        let text = MINIMAL.replace(
            "kind = \"ofw-linesearch\"",
            "kind = \"ofw-fixed\"\nsigma = \"oracle\"\n\n[[scenario.learner]]\nid = \"m\"\nkind = \"ofw-multi\"\nk_inner = 3\n\n[[scenario.learner]]\nid = \"f\"\nkind = \"ofw-fixed\"\nsigma = 0.25",
        );
        let cfg = parse_config(&text).unwrap();
        let l = &cfg.scenarios[0].learners;
        assert_eq!(l[0].config.sigma, StepSize::Oracle);
        assert_eq!(l[1].config.k_inner, InnerIterations::Fixed(3));
        assert_eq!(l[2].config.sigma, StepSize::Constant(0.25));
    }

    #[test]
    fn underestimated_alpha_is_rejected() {
        let text = MINIMAL.replace("kind = \"ofw-linesearch\"", "kind = \"ofw-linesearch\"\nalpha = 0.5");
        expect_config_error(&text, "scenario[0].learner[0].alpha");
    }

    #[test]
    fn rank1_with_interior_flag_is_rejected() {
        let text = MINIMAL.replace(
            "stream = { family = \"drifting-quadratic\", alpha = 1.0, center = [0.0, 0.0] }",
            "stream = { family = \"rank1-quadratic\", alpha = 1.0, direction = [1.0, 0.0], target = 0.0, interior_radius = 0.1 }",
        );
        assert!(parse_config(&text).is_err());
    }
}
