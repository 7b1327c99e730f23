//! Loss streams: seeded sequences of smooth losses with exact constants.
//!
//! Two families are supported. Both have affine consecutive differences
//! `f_t - f_{t-1}`, so the per-round function variation
//! `max_{x in K} |f_t(x) - f_{t-1}(x)|` is two LMO calls away.
//!
//! * drifting quadratic: `f_t(x) = (alpha/2) ||x - c_t||^2`
//! * rank-one quadratic: `f_t(x) = alpha / (2 ||a||^2) (<a, x> - b_t)^2`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dim, check_finite, dist_sq, dot, norm_sq};
use crate::sets::{random_unit_vector, FeasibleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Static,
    RandomWalk,
    PiecewiseConstant,
    Sinusoid,
}

/// How the centre (or target) of the losses moves from round to round.
///
/// * `Static`: constant.
/// * `RandomWalk`: each round moves by exactly `magnitude` in a uniformly
///   random direction. Paths for shorter horizons are prefixes of longer ones.
/// * `PiecewiseConstant`: `switches` jumps of length `magnitude`, placed at
///   rounds `1 + floor(k T / (switches + 1))`. Depends on `T`.
/// * `Sinusoid`: moves on a circle of radius `magnitude` (a segment in one
///   dimension) with the given `period`, starting at the base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSchedule {
    pub kind: ScheduleKind,
    pub magnitude: f64,
    pub period: usize,
    pub switches: usize,
    pub seed: u64,
}

impl DriftSchedule {
    pub fn fixed() -> Self {
        Self {
            kind: ScheduleKind::Static,
            magnitude: 0.0,
            period: 1,
            switches: 0,
            seed: 0,
        }
    }

    pub fn random_walk(magnitude: f64, seed: u64) -> Self {
        Self {
            kind: ScheduleKind::RandomWalk,
            magnitude,
            seed,
            ..Self::fixed()
        }
    }

    pub fn piecewise_constant(magnitude: f64, switches: usize, seed: u64) -> Self {
        Self {
            kind: ScheduleKind::PiecewiseConstant,
            magnitude,
            switches,
            seed,
            ..Self::fixed()
        }
    }

    pub fn sinusoid(magnitude: f64, period: usize) -> Self {
        Self {
            kind: ScheduleKind::Sinusoid,
            magnitude,
            period,
            ..Self::fixed()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.magnitude.is_finite() && self.magnitude >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "schedule magnitude must be finite and >= 0, got {}",
                self.magnitude
            )));
        }
        if self.kind == ScheduleKind::Sinusoid && self.period == 0 {
            return Err(Error::InvalidInput("sinusoid period must be >= 1".into()));
        }
        Ok(())
    }

    /// Materializes `horizon` points starting from `base`.
    pub fn path(&self, base: &[f64], horizon: usize) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        let d = base.len();
        let mut out = Vec::with_capacity(horizon);
        match self.kind {
            ScheduleKind::Static => out.resize(horizon, base.to_vec()),
            ScheduleKind::RandomWalk => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut c = base.to_vec();
                for t in 1..=horizon {
                    if t > 1 {
                        let u = random_unit_vector(&mut rng, d);
                        c.iter_mut().zip(&u).for_each(|(ci, ui)| *ci += self.magnitude * ui);
                    }
                    out.push(c.clone());
                }
            }
            ScheduleKind::PiecewiseConstant => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut switch_rounds: Vec<usize> = (1..=self.switches)
                    .map(|k| 1 + k * horizon / (self.switches + 1))
                    .collect();
                switch_rounds.reverse();
                let mut c = base.to_vec();
                for t in 1..=horizon {
                    while switch_rounds.last() == Some(&t) {
                        switch_rounds.pop();
                        if t > 1 {
                            let u = random_unit_vector(&mut rng, d);
                            c.iter_mut()
                                .zip(&u)
                                .for_each(|(ci, ui)| *ci += self.magnitude * ui);
                        }
                    }
                    out.push(c.clone());
                }
            }
            ScheduleKind::Sinusoid => {
                let w = 2.0 * std::f64::consts::PI / self.period as f64;
                for t in 1..=horizon {
                    let theta = w * (t - 1) as f64;
                    let mut c = base.to_vec();
                    c[0] += self.magnitude * theta.sin();
                    if d > 1 {
                        c[1] += self.magnitude * (theta.cos() - 1.0);
                    }
                    out.push(c);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilySpec {
    DriftingQuadratic { center: Vec<f64> },
    Rank1Quadratic { direction: Vec<f64>, target: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossSpec {
    pub family: FamilySpec,
    /// Smoothness constant.
    pub alpha: f64,
    /// Declared radius `r` of the interior-feasible flag.
    pub interior_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LossFamily {
    DriftingQuadratic {
        centers: Vec<Vec<f64>>,
    },
    Rank1Quadratic {
        direction: Vec<f64>,
        direction_norm_sq: f64,
        targets: Vec<f64>,
    },
}

/// An immutable, fully materialized sequence `f_1..f_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossStream {
    family: LossFamily,
    dimension: usize,
    alpha: f64,
    beta_f: f64,
    bound_m: f64,
    grad_bound_g: f64,
    interior_radius: Option<f64>,
}

impl LossStream {
    /// Drifting quadratic with an explicit centre path.
    pub fn drifting_quadratic(
        alpha: f64,
        centers: Vec<Vec<f64>>,
        set: &FeasibleSet,
        interior_radius: Option<f64>,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        if centers.is_empty() {
            return Err(Error::InvalidInput("horizon must be >= 1".into()));
        }
        let d = set.dimension();
        for c in &centers {
            check_dim(d, c)?;
            check_finite("center", c)?;
        }
        if let Some(r) = interior_radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "interior radius must be positive, got {r}"
                )));
            }
            for (i, c) in centers.iter().enumerate() {
                let round = i + 1;
                let rho = set.interior_radius(c).map_err(|_| Error::Construction {
                    round,
                    reason: "loss minimizer lies outside the feasible set".into(),
                })?;
                if rho < r {
                    return Err(Error::Construction {
                        round,
                        reason: format!(
                            "loss minimizer is {rho} from the boundary, less than the declared r = {r}"
                        ),
                    });
                }
            }
        }
        let far = centers
            .iter()
            .map(|c| set.farthest_distance(c))
            .fold(0.0, f64::max);
        Ok(Self {
            family: LossFamily::DriftingQuadratic { centers },
            dimension: d,
            alpha,
            beta_f: alpha,
            bound_m: alpha * far * far,
            grad_bound_g: alpha * far,
            interior_radius,
        })
    }

    /// Rank-one quadratic with fixed direction `a` and an explicit target path.
    pub fn rank1_quadratic(
        alpha: f64,
        direction: Vec<f64>,
        targets: Vec<f64>,
        set: &FeasibleSet,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        if targets.is_empty() {
            return Err(Error::InvalidInput("horizon must be >= 1".into()));
        }
        check_dim(set.dimension(), &direction)?;
        check_finite("direction", &direction)?;
        check_finite("targets", &targets)?;
        let direction_norm_sq = norm_sq(&direction);
        if direction_norm_sq == 0.0 {
            return Err(Error::InvalidInput("rank-one direction must be nonzero".into()));
        }
        let (lo, hi) = set.linear_range(&direction);
        let worst = targets
            .iter()
            .map(|b| (hi - b).abs().max((lo - b).abs()))
            .fold(0.0, f64::max);
        let d = set.dimension();
        Ok(Self {
            family: LossFamily::Rank1Quadratic {
                direction,
                direction_norm_sq,
                targets,
            },
            dimension: d,
            alpha,
            beta_f: if d == 1 { alpha } else { 0.0 },
            bound_m: alpha / direction_norm_sq * worst * worst,
            grad_bound_g: alpha / direction_norm_sq.sqrt() * worst,
            interior_radius: None,
        })
    }

    pub fn family(&self) -> &LossFamily {
        &self.family
    }

    pub fn horizon(&self) -> usize {
        match &self.family {
            LossFamily::DriftingQuadratic { centers } => centers.len(),
            LossFamily::Rank1Quadratic { targets, .. } => targets.len(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta_f(&self) -> f64 {
        self.beta_f
    }

    /// `M = max_{t, x in K} 2 |f_t(x)|`, exact.
    pub fn bound_m(&self) -> f64 {
        self.bound_m
    }

    /// `G = max_{t, x in K} ||grad f_t(x)||`, exact.
    pub fn grad_bound_g(&self) -> f64 {
        self.grad_bound_g
    }

    pub fn interior_radius(&self) -> Option<f64> {
        self.interior_radius
    }

    fn check_round(&self, t: usize) -> Result<()> {
        let horizon = self.horizon();
        if t == 0 || t > horizon {
            return Err(Error::RoundOutOfRange { t, horizon });
        }
        Ok(())
    }

    /// Value and gradient of `f_t` at `x`.
    pub fn evaluate(&self, t: usize, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_round(t)?;
        check_dim(self.dimension, x)?;
        Ok(match &self.family {
            LossFamily::DriftingQuadratic { centers } => {
                let c = &centers[t - 1];
                let grad: Vec<f64> = x.iter().zip(c).map(|(xi, ci)| self.alpha * (xi - ci)).collect();
                (0.5 * self.alpha * dist_sq(x, c), grad)
            }
            LossFamily::Rank1Quadratic {
                direction,
                direction_norm_sq,
                targets,
            } => {
                let k = self.alpha / direction_norm_sq;
                let resid = dot(direction, x) - targets[t - 1];
                let grad = direction.iter().map(|a| k * resid * a).collect();
                (0.5 * k * resid * resid, grad)
            }
        })
    }

    pub fn value(&self, t: usize, x: &[f64]) -> Result<f64> {
        self.check_round(t)?;
        check_dim(self.dimension, x)?;
        Ok(match &self.family {
            LossFamily::DriftingQuadratic { centers } => {
                0.5 * self.alpha * dist_sq(x, &centers[t - 1])
            }
            LossFamily::Rank1Quadratic {
                direction,
                direction_norm_sq,
                targets,
            } => {
                let resid = dot(direction, x) - targets[t - 1];
                0.5 * self.alpha / direction_norm_sq * resid * resid
            }
        })
    }

    /// `c_t` for the drifting quadratic; `None` for the rank-one family whose
    /// minimizer set is a hyperplane.
    pub fn unconstrained_minimizer(&self, t: usize) -> Result<Option<Vec<f64>>> {
        self.check_round(t)?;
        Ok(match &self.family {
            LossFamily::DriftingQuadratic { centers } => Some(centers[t - 1].clone()),
            LossFamily::Rank1Quadratic { .. } => None,
        })
    }

    /// `(w, b)` with `f_t(x) - f_{t-1}(x) = <w, x> + b`.
    fn affine_difference(&self, t: usize) -> (Vec<f64>, f64) {
        match &self.family {
            LossFamily::DriftingQuadratic { centers } => {
                let (cur, prev) = (&centers[t - 1], &centers[t - 2]);
                let w = prev
                    .iter()
                    .zip(cur)
                    .map(|(p, c)| self.alpha * (p - c))
                    .collect();
                let b = 0.5 * self.alpha * (norm_sq(cur) - norm_sq(prev));
                (w, b)
            }
            LossFamily::Rank1Quadratic {
                direction,
                direction_norm_sq,
                targets,
            } => {
                let k = 0.5 * self.alpha / direction_norm_sq;
                let (bt, bp) = (targets[t - 1], targets[t - 2]);
                let w = direction.iter().map(|a| -2.0 * k * (bt - bp) * a).collect();
                (w, k * (bt * bt - bp * bp))
            }
        }
    }

    /// `max_{x in K} |f_t(x) - f_{t-1}(x)|` for `t >= 2`.
    pub fn variation_term(&self, set: &FeasibleSet, t: usize) -> Result<f64> {
        if t < 2 {
            return Err(Error::RoundOutOfRange {
                t,
                horizon: self.horizon(),
            });
        }
        self.check_round(t)?;
        check_dim(self.dimension, &set.default_point())?;
        let (w, b) = self.affine_difference(t);
        if w.iter().all(|&x| x == 0.0) {
            return Ok(b.abs());
        }
        let (lo, hi) = set.linear_range(&w);
        Ok((lo + b).abs().max((hi + b).abs()))
    }

    /// `V_T = sum_{t=2}^T variation_term(t)`.
    pub fn total_variation(&self, set: &FeasibleSet) -> Result<f64> {
        (2..=self.horizon()).map(|t| self.variation_term(set, t)).sum()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidInput(format!(
            "smoothness alpha must be positive, got {alpha}"
        )));
    }
    Ok(())
}

/// Builds a stream of the given horizon from a spec and a seeded schedule.
pub fn make_stream(
    spec: &LossSpec,
    schedule: &DriftSchedule,
    set: &FeasibleSet,
    horizon: usize,
) -> Result<LossStream> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be >= 1".into()));
    }
    match &spec.family {
        FamilySpec::DriftingQuadratic { center } => {
            check_dim(set.dimension(), center)?;
            let centers = schedule.path(center, horizon)?;
            LossStream::drifting_quadratic(spec.alpha, centers, set, spec.interior_radius)
        }
        FamilySpec::Rank1Quadratic { direction, target } => {
            if spec.interior_radius.is_some() {
                return Err(Error::InvalidInput(
                    "the interior-feasible flag needs a unique minimizer (drifting-quadratic)"
                        .into(),
                ));
            }
            let targets = schedule
                .path(&[*target], horizon)?
                .into_iter()
                .map(|b| b[0])
                .collect();
            LossStream::rank1_quadratic(spec.alpha, direction.clone(), targets, set)
        }
    }
}
