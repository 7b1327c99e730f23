//! Per-round minimizers, regret and path statistics, closed-form regret
//! bounds and per-round inequality checks.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{contraction_factor, LearnerKind, ResolvedLearner};
use crate::linalg::{convex_step, dist, dist_sq, dot, norm};
use crate::sets::FeasibleSet;
use crate::streams::{LossFamily, LossStream};

pub const DEFAULT_MINIMIZER_TOL: f64 = 1e-8;
pub const DEFAULT_LEMMA_TOL: f64 = 1e-7;
const MAX_ORACLE_ITERATIONS: usize = 1_000_000;
const REGRET_FLOOR: f64 = -1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    pub x: Vec<f64>,
    pub loss: f64,
    pub gradient: Vec<f64>,
    pub x_star: Option<Vec<f64>>,
    pub f_star: Option<f64>,
    pub sigmas: Vec<f64>,
    pub lmo_points: Vec<Vec<f64>>,
    pub inner_iterates: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub learner: ResolvedLearner,
    pub records: Vec<RoundRecord>,
    /// `x_{T+1}`
    pub final_point: Vec<f64>,
    /// `D_T` accumulated while playing.
    pub online_gradient_variation: f64,
}

impl Trace {
    pub fn horizon(&self) -> usize {
        self.records.len()
    }
}

/// `(x_t^*, f_t(x_t^*))` for one round.
///
/// The drifting quadratic is solved by projecting its centre. The rank-one
/// family runs offline Frank-Wolfe with exact line search until the
/// Frank-Wolfe gap drops to `tol`.
pub fn per_round_minimizer(
    stream: &LossStream,
    set: &FeasibleSet,
    t: usize,
    tol: f64,
) -> Result<(Vec<f64>, f64)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("minimizer tolerance must be positive, got {tol}")));
    }
    match stream.family() {
        LossFamily::DriftingQuadratic { centers } => {
            let c = centers
                .get(t.wrapping_sub(1))
                .ok_or(Error::RoundOutOfRange { t, horizon: stream.horizon() })?;
            let x = set.project(c)?;
            let f = stream.value(t, &x)?;
            Ok((x, f))
        }
        LossFamily::Rank1Quadratic {
            direction,
            direction_norm_sq,
            ..
        } => {
            let k = stream.alpha() / direction_norm_sq;
            let mut x = set.default_point();
            let mut gap = f64::INFINITY;
            for _ in 0..MAX_ORACLE_ITERATIONS {
                let (_, g) = stream.evaluate(t, &x)?;
                let v = set.lmo_unchecked(&g);
                gap = dot(&g, &x) - dot(&g, &v);
                if gap <= tol {
                    let f = stream.value(t, &x)?;
                    return Ok((x, f));
                }
                let along = dot(direction, &x) - dot(direction, &v);
                let curvature = k * along * along;
                let sigma = if curvature > 0.0 { (gap / curvature).clamp(0.0, 1.0) } else { 1.0 };
                x = convex_step(&x, &v, sigma);
            }
            Err(Error::OracleFailure {
                iterations: MAX_ORACLE_ITERATIONS,
                gap,
            })
        }
    }
}

pub fn fill_minimizers(trace: &mut Trace, stream: &LossStream, set: &FeasibleSet, tol: f64) -> Result<()> {
    for rec in &mut trace.records {
        let (x, f) = per_round_minimizer(stream, set, rec.t, tol).map_err(|e| Error::Round {
            round: rec.t,
            source: Box::new(e),
        })?;
        rec.x_star = Some(x);
        rec.f_star = Some(f);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoremId {
    Thm1,
    Thm2,
    Thm3,
    Thm4,
    Thm5,
    Thm8,
}

impl TheoremId {
    pub const ALL: [TheoremId; 6] = [
        TheoremId::Thm1,
        TheoremId::Thm2,
        TheoremId::Thm3,
        TheoremId::Thm4,
        TheoremId::Thm5,
        TheoremId::Thm8,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::Thm1 => "thm1",
            TheoremId::Thm2 => "thm2",
            TheoremId::Thm3 => "thm3",
            TheoremId::Thm4 => "thm4",
            TheoremId::Thm5 => "thm5",
            TheoremId::Thm8 => "thm8",
        }
    }

    /// The learner whose regret this bound certifies.
    pub fn learner(self) -> LearnerKind {
        match self {
            TheoremId::Thm1 => LearnerKind::OfwFixed,
            TheoremId::Thm2 | TheoremId::Thm3 | TheoremId::Thm4 => LearnerKind::OfwLinesearch,
            TheoremId::Thm5 => LearnerKind::OfwMulti,
            TheoremId::Thm8 => LearnerKind::Ogd,
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LemmaId {
    Lemma2,
    Lemma4,
    Lemma5,
    Lemma6,
    Lemma8,
}

impl LemmaId {
    pub const ALL: [LemmaId; 5] = [
        LemmaId::Lemma2,
        LemmaId::Lemma4,
        LemmaId::Lemma5,
        LemmaId::Lemma6,
        LemmaId::Lemma8,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LemmaId::Lemma2 => "lemma2",
            LemmaId::Lemma4 => "lemma4",
            LemmaId::Lemma5 => "lemma5",
            LemmaId::Lemma6 => "lemma6",
            LemmaId::Lemma8 => "lemma8",
        }
    }

    pub fn learner(self) -> LearnerKind {
        match self {
            LemmaId::Lemma2 => LearnerKind::OfwFixed,
            LemmaId::Lemma4 | LemmaId::Lemma5 | LemmaId::Lemma6 => LearnerKind::OfwLinesearch,
            LemmaId::Lemma8 => LearnerKind::OfwMulti,
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything a closed-form bound may depend on. `M` stands in for
/// `f_1(x_1) - f_T(x_T^*)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundInputs {
    pub horizon: usize,
    pub alpha: f64,
    pub diameter: f64,
    pub m: f64,
    pub v_t: f64,
    pub sigma: Option<f64>,
    pub beta_f: Option<f64>,
    pub beta_k: Option<f64>,
    pub interior_radius: Option<f64>,
    pub g: Option<f64>,
    pub p_t: Option<f64>,
    pub s_t: Option<f64>,
}

fn need(value: Option<f64>, theorem: TheoremId, name: &str) -> Result<f64> {
    match value {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Contract(format!("{theorem} needs {name}"))),
    }
}

fn need_positive(value: Option<f64>, theorem: TheoremId, name: &str) -> Result<f64> {
    let v = need(value, theorem, name)?;
    if v <= 0.0 {
        return Err(Error::Contract(format!("{theorem} needs {name} > 0, got {v}")));
    }
    Ok(v)
}

pub fn theorem_bound(theorem: TheoremId, b: &BoundInputs) -> Result<f64> {
    if b.horizon == 0 {
        return Err(Error::Contract(format!("{theorem} needs T >= 1")));
    }
    if !(b.alpha > 0.0 && b.diameter >= 0.0 && b.m >= 0.0 && b.v_t >= 0.0) {
        return Err(Error::Contract(format!(
            "{theorem} needs alpha > 0 and non-negative D, M, V_T"
        )));
    }
    let t = b.horizon as f64;
    let (a, d, m, v) = (b.alpha, b.diameter, b.m, b.v_t);
    let mv = m + v;
    Ok(match theorem {
        TheoremId::Thm1 => {
            let s = need_positive(b.sigma, theorem, "sigma")?;
            mv / s + a * s * (t - 1.0) * d * d / 2.0
        }
        TheoremId::Thm2 => {
            if m <= 0.0 {
                return Err(Error::Contract(format!("{theorem} needs M > 0")));
            }
            (m * t * mv).sqrt() + a * d * d / 2.0 * (mv * t / m).sqrt()
        }
        TheoremId::Thm3 => {
            let bf = need_positive(b.beta_f, theorem, "beta_f")?;
            let bk = need_positive(b.beta_k, theorem, "beta_K")?;
            let lead = 8.0 * std::f64::consts::SQRT_2 * a / (bf.sqrt() * bk) * mv;
            lead.powf(2.0 / 3.0) * t.cbrt() + 2.0 * mv
        }
        TheoremId::Thm4 => {
            let bf = need_positive(b.beta_f, theorem, "beta_f")?;
            let r = need_positive(b.interior_radius, theorem, "interior radius r")?;
            let (_, rt) = contraction_factor(a, bf, d, r, m)?;
            4.0 * a * mv * d * d / (bf * rt * rt)
        }
        TheoremId::Thm5 => {
            let bf = need_positive(b.beta_f, theorem, "beta_f")?;
            let g = need(b.g, theorem, "G")?;
            let p = need(b.p_t, theorem, "P_T^*")?;
            let s = need(b.s_t, theorem, "S_T^*")?;
            let first = 4.0 * a * mv / (4.0 * a - bf);
            first.min(2.0 * g * d + 2.0 * g * p).min(a * d * d + 2.0 * a * s)
        }
        TheoremId::Thm8 => mv + (2.0 * a * d * d * (t - 1.0) * mv).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    pub horizon: usize,
    pub regret: f64,
    pub v_t: f64,
    pub d_t: f64,
    pub p_t_star: f64,
    pub s_t_star: f64,
    pub bound_m: f64,
    pub grad_bound_g: f64,
    pub diameter: f64,
    pub alpha: f64,
    pub beta_f: f64,
    pub beta_k: Option<f64>,
    pub interior_radius: Option<f64>,
    pub r_tilde: Option<f64>,
    pub bound_values: BTreeMap<TheoremId, f64>,
    pub lemma_verdicts: BTreeMap<LemmaId, LemmaVerdict>,
}

impl RegretReport {
    pub fn bound_inputs(&self, sigma: Option<f64>) -> BoundInputs {
        BoundInputs {
            horizon: self.horizon,
            alpha: self.alpha,
            diameter: self.diameter,
            m: self.bound_m,
            v_t: self.v_t,
            sigma,
            beta_f: (self.beta_f > 0.0).then_some(self.beta_f),
            beta_k: self.beta_k,
            interior_radius: self.interior_radius,
            g: Some(self.grad_bound_g),
            p_t: Some(self.p_t_star),
            s_t: Some(self.s_t_star),
        }
    }
}

fn minimizers(trace: &Trace) -> Result<Vec<(&[f64], f64)>> {
    trace
        .records
        .iter()
        .map(|r| match (&r.x_star, r.f_star) {
            (Some(x), Some(f)) => Ok((x.as_slice(), f)),
            _ => Err(Error::Contract(format!(
                "round {} has no minimizer; call fill_minimizers first",
                r.t
            ))),
        })
        .collect()
}

/// Regret and the path statistics of a trace whose minimizers are filled in.
pub fn trace_metrics(trace: &Trace, stream: &LossStream, set: &FeasibleSet) -> Result<RegretReport> {
    let horizon = trace.horizon();
    if horizon == 0 {
        return Err(Error::Contract("empty trace".into()));
    }
    let stars = minimizers(trace)?;
    let regret: f64 = trace.records.iter().zip(&stars).map(|(r, (_, f))| r.loss - f).sum();
    if regret < REGRET_FLOOR {
        return Err(Error::Contract(format!(
            "negative regret {regret:e}: per-round minimizers are not minimal"
        )));
    }
    let v_t = (2..=horizon).map(|t| stream.variation_term(set, t)).sum::<Result<f64>>()?;
    let mut d_t = 0.0;
    for w in trace.records.windows(2) {
        d_t += dist_sq(&w[1].gradient, &w[0].gradient);
    }
    let (mut p_t, mut s_t) = (0.0, 0.0);
    for w in stars.windows(2) {
        p_t += dist(w[1].0, w[0].0);
        s_t += dist_sq(w[1].0, w[0].0);
    }
    let beta_f = stream.beta_f();
    let r_tilde = match stream.interior_radius() {
        Some(r) if beta_f > 0.0 => contraction_factor(trace.learner.alpha, beta_f, set.diameter(), r, stream.bound_m())
            .ok()
            .map(|(_, rt)| rt),
        _ => None,
    };
    Ok(RegretReport {
        horizon,
        regret,
        v_t,
        d_t,
        p_t_star: p_t,
        s_t_star: s_t,
        bound_m: stream.bound_m(),
        grad_bound_g: stream.grad_bound_g(),
        diameter: set.diameter(),
        alpha: trace.learner.alpha,
        beta_f,
        beta_k: set.strong_convexity(),
        interior_radius: stream.interior_radius(),
        r_tilde,
        bound_values: BTreeMap::new(),
        lemma_verdicts: BTreeMap::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaVerdict {
    pub lemma: LemmaId,
    pub passed: bool,
    /// `min_t (rhs - lhs)`; `+inf` when no round was checked.
    pub worst_slack: f64,
    /// Round attaining `worst_slack`, 0 when no round was checked.
    pub worst_round: usize,
    pub rounds_checked: usize,
}

/// Per-round inequality of the given lemma along a trace with minimizers.
///
/// For round `t` the checked inequality bounds
/// `f_{t+1}(x_{t+1}) - f_{t+1}^*` by
/// `var_{t+1} + coef_t (f_t(x_t) - f_t^*) + extra_t + f_t^* - f_{t+1}^*`;
/// the multi-update check instead bounds `f_t(x_{t+1}) - f_t^*` by
/// `C^K (f_t(x_t) - f_t^*)`.
pub fn lemma_check(
    lemma: LemmaId,
    trace: &Trace,
    stream: &LossStream,
    set: &FeasibleSet,
    tol: f64,
) -> Result<LemmaVerdict> {
    if trace.learner.kind != lemma.learner() {
        return Err(Error::Contract(format!(
            "{lemma} applies to {} traces, got {}",
            lemma.learner(),
            trace.learner.kind
        )));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be non-negative, got {tol}")));
    }
    let stars = minimizers(trace)?;
    let alpha = trace.learner.alpha;
    let d2 = set.diameter() * set.diameter();
    let recs = &trace.records;
    let horizon = recs.len();

    let contraction = || -> Result<f64> {
        let r = stream
            .interior_radius()
            .ok_or_else(|| Error::Contract(format!("{lemma} needs an interior radius r")))?;
        if stream.beta_f() <= 0.0 {
            return Err(Error::Contract(format!("{lemma} needs beta_f > 0")));
        }
        Ok(contraction_factor(alpha, stream.beta_f(), set.diameter(), r, stream.bound_m())?.0)
    };

    let mut worst_slack = f64::INFINITY;
    let mut worst_round = 0;
    let mut checked = 0;
    let mut observe = |slack: f64, t: usize| {
        checked += 1;
        if slack < worst_slack {
            worst_slack = slack;
            worst_round = t;
        }
    };

    if lemma == LemmaId::Lemma8 {
        let k = trace
            .learner
            .k_inner
            .ok_or_else(|| Error::Contract("lemma8 needs K".into()))?;
        let ck = contraction()?.powi(k as i32);
        for t in 1..=horizon {
            let next = if t < horizon { &recs[t].x } else { &trace.final_point };
            let lhs = stream.value(t, next)? - stars[t - 1].1;
            let rhs = ck * (recs[t - 1].loss - stars[t - 1].1);
            observe(rhs - lhs, t);
        }
    } else {
        let fixed_c = match lemma {
            LemmaId::Lemma6 => Some(contraction()?),
            _ => None,
        };
        let beta_k = match lemma {
            LemmaId::Lemma5 => Some(
                set.strong_convexity()
                    .ok_or_else(|| Error::Contract("lemma5 needs a strongly convex set".into()))?,
            ),
            _ => None,
        };
        let sigma_fixed = match lemma {
            LemmaId::Lemma2 => Some(
                trace
                    .learner
                    .sigma
                    .ok_or_else(|| Error::Contract("lemma2 needs sigma".into()))?,
            ),
            _ => None,
        };
        for t in 1..horizon {
            let gap = recs[t - 1].loss - stars[t - 1].1;
            let lhs = recs[t].loss - stars[t].1;
            let base = stream.variation_term(set, t + 1)? + stars[t - 1].1 - stars[t].1;
            let bound = match lemma {
                LemmaId::Lemma2 => {
                    let s = sigma_fixed.unwrap_or_default();
                    (1.0 - s) * gap + alpha * s * s * d2 / 2.0
                }
                LemmaId::Lemma4 => {
                    let realized = recs[t - 1].sigmas.first().copied().unwrap_or(0.0);
                    (0..=10)
                        .map(|i| i as f64 / 10.0)
                        .chain(std::iter::once(realized))
                        .map(|s| (1.0 - s) * gap + alpha * s * s * d2 / 2.0)
                        .fold(f64::INFINITY, f64::min)
                }
                LemmaId::Lemma5 => {
                    let bk = beta_k.unwrap_or_default();
                    let c = (1.0 - bk * norm(&recs[t - 1].gradient) / (8.0 * alpha)).max(0.5);
                    c * gap
                }
                LemmaId::Lemma6 => fixed_c.unwrap_or(1.0) * gap,
                LemmaId::Lemma8 => unreachable!(),
            };
            observe(base + bound - lhs, t);
        }
    }
    Ok(LemmaVerdict {
        lemma,
        passed: worst_slack >= -tol,
        worst_slack,
        worst_round,
        rounds_checked: checked,
    })
}
