//! Online learners behind one step interface.
//!
//! At round `t` the learner has already committed to `x_t`; a step observes
//! `f_t` and produces `x_{t+1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dim, convex_step, dist_sq, dot, norm_sq};
use crate::metrics::{per_round_minimizer, RoundRecord, Trace, DEFAULT_MINIMIZER_TOL};
use crate::sets::{FeasibleSet, MEMBERSHIP_TOL};
use crate::streams::LossStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    OfwFixed,
    OfwLinesearch,
    OfwMulti,
    Ogd,
    Greedy,
}

impl LearnerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LearnerKind::OfwFixed => "ofw-fixed",
            LearnerKind::OfwLinesearch => "ofw-linesearch",
            LearnerKind::OfwMulti => "ofw-multi",
            LearnerKind::Ogd => "ogd",
            LearnerKind::Greedy => "greedy",
        }
    }
}

impl std::fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Step size of the fixed-step learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    Constant(f64),
    /// `1 / sqrt(T)`
    InvSqrtHorizon,
    /// `sqrt((V_T + M) / (M T))`, needs `V_T` ahead of time.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerIterations {
    Fixed(usize),
    /// `K = ceil(ln(beta_f / 4 alpha) / ln C)`
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    pub kind: LearnerKind,
    pub sigma: StepSize,
    pub k_inner: InnerIterations,
    /// Smoothness handed to line search and OGD; defaults to the stream's.
    pub alpha: Option<f64>,
    /// Defaults to [`FeasibleSet::default_point`].
    pub initial_point: Option<Vec<f64>>,
}

impl LearnerConfig {
    pub fn new(kind: LearnerKind) -> Self {
        Self {
            kind,
            sigma: StepSize::InvSqrtHorizon,
            k_inner: InnerIterations::Auto,
            alpha: None,
            initial_point: None,
        }
    }

    pub fn fixed(sigma: f64) -> Self {
        Self {
            sigma: StepSize::Constant(sigma),
            ..Self::new(LearnerKind::OfwFixed)
        }
    }

    pub fn multi(k: usize) -> Self {
        Self {
            k_inner: InnerIterations::Fixed(k),
            ..Self::new(LearnerKind::OfwMulti)
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_initial_point(mut self, x: Vec<f64>) -> Self {
        self.initial_point = Some(x);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let StepSize::Constant(s) = self.sigma {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::InvalidInput(format!("sigma must lie in [0, 1], got {s}")));
            }
        }
        if let InnerIterations::Fixed(0) = self.k_inner {
            return Err(Error::InvalidInput("K_inner must be >= 1".into()));
        }
        if let Some(a) = self.alpha {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::InvalidInput(format!("alpha must be positive, got {a}")));
            }
        }
        Ok(())
    }
}

/// Output of the inner-iteration schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerSchedule {
    pub k: usize,
    /// Per-iteration contraction factor `C = 1 - beta_f r~^2 / (4 alpha D^2)`.
    pub c: f64,
    /// `r~ = min(r, sqrt(2) alpha D^2 / sqrt(beta_f M))`
    pub r_tilde: f64,
}

/// `(C, r~)` for smooth, strongly convex losses with interior minimizers.
pub fn contraction_factor(alpha: f64, beta_f: f64, diameter: f64, r: f64, m: f64) -> Result<(f64, f64)> {
    for (name, v) in [("alpha", alpha), ("beta_f", beta_f), ("D", diameter), ("r", r), ("M", m)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Contract(format!("{name} must be positive and finite, got {v}")));
        }
    }
    if beta_f > alpha {
        return Err(Error::Contract(format!(
            "beta_f = {beta_f} exceeds alpha = {alpha}; no function is both"
        )));
    }
    let r_tilde = r.min(std::f64::consts::SQRT_2 * alpha * diameter * diameter / (beta_f * m).sqrt());
    let c = 1.0 - beta_f * r_tilde * r_tilde / (4.0 * alpha * diameter * diameter);
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Contract(format!("contraction factor C = {c} is outside (0, 1)")));
    }
    Ok((c, r_tilde))
}

/// Number of inner Frank-Wolfe iterations per round that makes
/// `C^K <= beta_f / (4 alpha)`.
pub fn compute_k(alpha: f64, beta_f: f64, diameter: f64, r: f64, m: f64) -> Result<InnerSchedule> {
    let (c, r_tilde) = contraction_factor(alpha, beta_f, diameter, r, m)?;
    let k = ((beta_f / (4.0 * alpha)).ln() / c.ln()).ceil();
    Ok(InnerSchedule {
        k: (k as usize).max(1),
        c,
        r_tilde,
    })
}

/// Minimizer over `[0, 1]` of `s <g, v - x> + (alpha s^2 / 2) ||x - v||^2`.
pub fn line_search_sigma(gradient: &[f64], x: &[f64], v: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Contract(format!("alpha must be positive, got {alpha}")));
    }
    check_dim(x.len(), gradient)?;
    check_dim(x.len(), v)?;
    Ok(line_search_unchecked(gradient, x, v, alpha))
}

fn line_search_unchecked(g: &[f64], x: &[f64], v: &[f64], alpha: f64) -> f64 {
    let denom = alpha * dist_sq(x, v);
    if denom == 0.0 {
        return 0.0;
    }
    let numer: f64 = g.iter().zip(x.iter().zip(v)).map(|(gi, (xi, vi))| gi * (xi - vi)).sum();
    (numer / denom).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepDiagnostics {
    /// `sigma_t`, or `sigma_t^0..sigma_t^{K-1}` for the multi-update learner.
    pub sigmas: Vec<f64>,
    pub lmo_points: Vec<Vec<f64>>,
    /// `z^0..z^K` for the multi-update learner, empty otherwise.
    pub inner_iterates: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerState {
    /// The point the learner plays at round `t`.
    pub x: Vec<f64>,
    pub t: usize,
    pub last: StepDiagnostics,
}

/// A learner configuration with every automatic choice settled for one stream.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedLearner {
    pub kind: LearnerKind,
    pub alpha: f64,
    pub sigma: Option<f64>,
    pub k_inner: Option<usize>,
    pub schedule: Option<InnerSchedule>,
    pub initial_point: Vec<f64>,
}

impl ResolvedLearner {
    pub fn resolve(config: &LearnerConfig, stream: &LossStream, set: &FeasibleSet) -> Result<Self> {
        config.validate()?;
        if stream.dimension() != set.dimension() {
            return Err(Error::DimensionMismatch {
                expected: set.dimension(),
                got: stream.dimension(),
            });
        }
        let alpha = config.alpha.unwrap_or(stream.alpha());
        let horizon = stream.horizon();
        let initial_point = match &config.initial_point {
            Some(x) => {
                check_dim(set.dimension(), x)?;
                if !set.contains(x, MEMBERSHIP_TOL)? {
                    return Err(Error::InvalidInput("initial point lies outside the set".into()));
                }
                x.clone()
            }
            None => set.default_point(),
        };
        let sigma = match config.kind {
            LearnerKind::OfwFixed => Some(match config.sigma {
                StepSize::Constant(s) => s,
                StepSize::InvSqrtHorizon => 1.0 / (horizon as f64).sqrt(),
                StepSize::Oracle => {
                    let m = stream.bound_m();
                    let v = stream.total_variation(set)?;
                    ((v + m) / (m * horizon as f64)).sqrt().min(1.0)
                }
            }),
            _ => None,
        };
        let (k_inner, schedule) = match config.kind {
            LearnerKind::OfwMulti => {
                let auto = match (stream.beta_f(), stream.interior_radius()) {
                    (b, Some(r)) if b > 0.0 => Some(compute_k(alpha, b, set.diameter(), r, stream.bound_m())?),
                    _ => None,
                };
                let k = match config.k_inner {
                    InnerIterations::Fixed(k) => k,
                    InnerIterations::Auto => {
                        auto.ok_or_else(|| {
                            Error::Contract(
                                "automatic K needs beta_f > 0 and a declared interior radius r".into(),
                            )
                        })?
                        .k
                    }
                };
                (Some(k), auto)
            }
            _ => (None, None),
        };
        Ok(Self {
            kind: config.kind,
            alpha,
            sigma,
            k_inner,
            schedule,
            initial_point,
        })
    }

    pub fn initial_state(&self) -> LearnerState {
        LearnerState {
            x: self.initial_point.clone(),
            t: 1,
            last: StepDiagnostics::default(),
        }
    }

    pub fn step(&self, state: &LearnerState, stream: &LossStream, set: &FeasibleSet) -> Result<LearnerState> {
        match self.kind {
            LearnerKind::OfwFixed | LearnerKind::OfwLinesearch => ofw_step(state, stream, set, self),
            LearnerKind::OfwMulti => ofw_multi_step(state, stream, set, self),
            LearnerKind::Ogd => ogd_step(state, stream, set, self),
            LearnerKind::Greedy => greedy_step(state, stream, set),
        }
    }
}

/// One Frank-Wolfe iteration from `z` for gradient `g`: `(v, sigma, z_next)`.
fn fw_iteration(
    z: &[f64],
    g: &[f64],
    set: &FeasibleSet,
    alpha: f64,
    fixed_sigma: Option<f64>,
) -> (Vec<f64>, f64, Vec<f64>) {
    let v = set.lmo_unchecked(g);
    let sigma = fixed_sigma.unwrap_or_else(|| line_search_unchecked(g, z, &v, alpha));
    let next = convex_step(z, &v, sigma);
    (v, sigma, next)
}

/// Fixed-step OFW (`learner.sigma` set) or OFW with line search.
pub fn ofw_step(
    state: &LearnerState,
    stream: &LossStream,
    set: &FeasibleSet,
    learner: &ResolvedLearner,
) -> Result<LearnerState> {
    let (_, g) = stream.evaluate(state.t, &state.x)?;
    let fixed = match learner.kind {
        LearnerKind::OfwFixed => Some(learner.sigma.ok_or_else(|| {
            Error::Contract("fixed-step OFW without a resolved sigma".into())
        })?),
        _ => None,
    };
    let (v, sigma, x) = fw_iteration(&state.x, &g, set, learner.alpha, fixed);
    Ok(LearnerState {
        x,
        t: state.t + 1,
        last: StepDiagnostics {
            sigmas: vec![sigma],
            lmo_points: vec![v],
            inner_iterates: Vec::new(),
        },
    })
}

/// `K` line-search Frank-Wolfe iterations on the same loss `f_t`.
pub fn ofw_multi_step(
    state: &LearnerState,
    stream: &LossStream,
    set: &FeasibleSet,
    learner: &ResolvedLearner,
) -> Result<LearnerState> {
    let k = learner
        .k_inner
        .ok_or_else(|| Error::Contract("multi-update OFW without a resolved K".into()))?;
    let mut z = state.x.clone();
    let mut diag = StepDiagnostics {
        sigmas: Vec::with_capacity(k),
        lmo_points: Vec::with_capacity(k),
        inner_iterates: Vec::with_capacity(k + 1),
    };
    diag.inner_iterates.push(z.clone());
    for _ in 0..k {
        let (_, g) = stream.evaluate(state.t, &z)?;
        let (v, sigma, next) = fw_iteration(&z, &g, set, learner.alpha, None);
        diag.sigmas.push(sigma);
        diag.lmo_points.push(v);
        diag.inner_iterates.push(next.clone());
        z = next;
    }
    Ok(LearnerState {
        x: z,
        t: state.t + 1,
        last: diag,
    })
}

/// Projected gradient step with step size `1/alpha`.
pub fn ogd_step(
    state: &LearnerState,
    stream: &LossStream,
    set: &FeasibleSet,
    learner: &ResolvedLearner,
) -> Result<LearnerState> {
    let (_, g) = stream.evaluate(state.t, &state.x)?;
    let step = 1.0 / learner.alpha;
    let moved: Vec<f64> = state.x.iter().zip(&g).map(|(x, gi)| x - step * gi).collect();
    Ok(LearnerState {
        x: set.project_unchecked(&moved),
        t: state.t + 1,
        last: StepDiagnostics::default(),
    })
}

/// Plays the constrained minimizer of the loss just observed.
pub fn greedy_step(state: &LearnerState, stream: &LossStream, set: &FeasibleSet) -> Result<LearnerState> {
    let (x_star, _) = per_round_minimizer(stream, set, state.t, DEFAULT_MINIMIZER_TOL)?;
    Ok(LearnerState {
        x: x_star,
        t: state.t + 1,
        last: StepDiagnostics::default(),
    })
}

/// Plays the online protocol for `horizon` rounds. Minimizers in the
/// returned records are left empty; see [`crate::metrics::fill_minimizers`].
pub fn run_learner(
    config: &LearnerConfig,
    stream: &LossStream,
    set: &FeasibleSet,
    horizon: usize,
) -> Result<Trace> {
    if horizon == 0 || horizon > stream.horizon() {
        return Err(Error::Precondition(format!(
            "horizon {horizon} must lie in 1..={}",
            stream.horizon()
        )));
    }
    let learner = ResolvedLearner::resolve(config, stream, set)?;
    let mut state = learner.initial_state();
    let mut records = Vec::with_capacity(horizon);
    let mut gradient_variation = 0.0;
    let mut prev_grad: Option<Vec<f64>> = None;
    for t in 1..=horizon {
        let wrap = |e: Error| Error::Round {
            round: t,
            source: Box::new(e),
        };
        let (loss, gradient) = stream.evaluate(t, &state.x).map_err(wrap)?;
        if let Some(prev) = &prev_grad {
            gradient_variation += dist_sq(&gradient, prev);
        }
        let next = learner.step(&state, stream, set).map_err(wrap)?;
        if !set.contains(&next.x, MEMBERSHIP_TOL)? {
            return Err(wrap(Error::Contract(format!(
                "{} left the feasible set (residual {:e})",
                learner.kind,
                set.residual(&next.x)
            ))));
        }
        records.push(RoundRecord {
            t,
            x: std::mem::take(&mut state.x),
            loss,
            gradient: gradient.clone(),
            x_star: None,
            f_star: None,
            sigmas: next.last.sigmas.clone(),
            lmo_points: next.last.lmo_points.clone(),
            inner_iterates: next.last.inner_iterates.clone(),
        });
        prev_grad = Some(gradient);
        state = next;
    }
    Ok(Trace {
        learner,
        records,
        final_point: state.x,
        online_gradient_variation: gradient_variation,
    })
}

/// The quadratic surrogate minimized by the line search.
pub fn surrogate(gradient: &[f64], x: &[f64], v: &[f64], alpha: f64, sigma: f64) -> f64 {
    let lin = dot(gradient, v) - dot(gradient, x);
    let dv: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - b).collect();
    sigma * lin + 0.5 * alpha * sigma * sigma * norm_sq(&dv)
}
