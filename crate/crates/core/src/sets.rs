//! Feasible sets: linear minimization oracles, Euclidean projection,
//! membership and the geometric constants consumed by the regret bounds.

use std::cmp::Ordering;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dim, check_finite, dist, dot, norm};

/// Absolute tolerance on constraint residuals used for membership checks.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetKindTag {
    Ball,
    Box,
    Simplex,
    L1Ball,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetShape {
    /// `{x : ||x - center|| <= radius}`
    Ball { center: Vec<f64>, radius: f64 },
    /// `{x : lower <= x <= upper}`
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Probability simplex `{x >= 0 : sum x = 1}`.
    Simplex,
    /// `{x : ||x||_1 <= radius}`
    L1Ball { radius: f64 },
}

/// An immutable compact convex set together with its diameter and the
/// optional strong-convexity constant of the set.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    shape: SetShape,
    dimension: usize,
    diameter: f64,
    strong_convexity: Option<f64>,
}

impl FeasibleSet {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidInput("ball dimension must be positive".into()));
        }
        check_finite("ball center", &center)?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidInput(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        let dimension = center.len();
        Ok(Self {
            shape: SetShape::Ball { center, radius },
            dimension,
            diameter: 2.0 * radius,
            strong_convexity: None,
        })
    }

    /// Ball of the given radius centred at the origin.
    pub fn origin_ball(dimension: usize, radius: f64) -> Result<Self> {
        Self::ball(vec![0.0; dimension], radius)
    }

    pub fn cube(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidInput("box dimension must be positive".into()));
        }
        check_dim(lower.len(), &upper)?;
        check_finite("box lower", &lower)?;
        check_finite("box upper", &upper)?;
        if let Some(i) = (0..lower.len()).find(|&i| lower[i] >= upper[i]) {
            return Err(Error::InvalidInput(format!(
                "box requires lower < upper, violated at index {i}"
            )));
        }
        let dimension = lower.len();
        let diameter = dist(&lower, &upper);
        Ok(Self {
            shape: SetShape::Box { lower, upper },
            dimension,
            diameter,
            strong_convexity: None,
        })
    }

    pub fn simplex(dimension: usize) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::InvalidInput(
                "simplex needs dimension >= 2 (dimension 1 is a single point)".into(),
            ));
        }
        Ok(Self {
            shape: SetShape::Simplex,
            dimension,
            diameter: std::f64::consts::SQRT_2,
            strong_convexity: None,
        })
    }

    pub fn l1_ball(dimension: usize, radius: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("l1-ball dimension must be positive".into()));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidInput(format!(
                "l1-ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            shape: SetShape::L1Ball { radius },
            dimension,
            diameter: 2.0 * radius,
            strong_convexity: None,
        })
    }

    /// Declares the strong-convexity constant of the set. Only Euclidean
    /// balls carry one; the value is certified by sampling, not proven.
    pub fn with_strong_convexity(mut self, beta: f64) -> Result<Self> {
        if !matches!(self.shape, SetShape::Ball { .. }) {
            return Err(Error::InvalidInput(format!(
                "{:?} is not strongly convex; only balls accept beta_K",
                self.kind()
            )));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidInput(format!(
                "beta_K must be positive, got {beta}"
            )));
        }
        self.strong_convexity = Some(beta);
        Ok(self)
    }

    pub fn kind(&self) -> SetKindTag {
        match self.shape {
            SetShape::Ball { .. } => SetKindTag::Ball,
            SetShape::Box { .. } => SetKindTag::Box,
            SetShape::Simplex => SetKindTag::Simplex,
            SetShape::L1Ball { .. } => SetKindTag::L1Ball,
        }
    }

    pub fn shape(&self) -> &SetShape {
        &self.shape
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn strong_convexity(&self) -> Option<f64> {
        self.strong_convexity
    }

    /// Centre for balls and boxes, barycentre for the simplex, origin for the l1-ball.
    pub fn default_point(&self) -> Vec<f64> {
        match &self.shape {
            SetShape::Ball { center, .. } => center.clone(),
            SetShape::Box { lower, upper } => {
                lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect()
            }
            SetShape::Simplex => vec![1.0 / self.dimension as f64; self.dimension],
            SetShape::L1Ball { .. } => vec![0.0; self.dimension],
        }
    }

    fn check_vector(&self, what: &str, v: &[f64]) -> Result<()> {
        check_dim(self.dimension, v)?;
        check_finite(what, v)
    }

    /// Returns a minimizer of `<direction, v>` over the set.
    ///
    /// Ties resolve to the lexicographically smallest minimizing vertex for
    /// polytopes; a zero direction on a ball returns the centre.
    pub fn lmo(&self, direction: &[f64]) -> Result<Vec<f64>> {
        self.check_vector("direction", direction)?;
        Ok(self.lmo_unchecked(direction))
    }

    pub(crate) fn lmo_unchecked(&self, g: &[f64]) -> Vec<f64> {
        match &self.shape {
            SetShape::Ball { center, radius } => {
                let n = norm(g);
                if n == 0.0 {
                    return center.clone();
                }
                center
                    .iter()
                    .zip(g)
                    .map(|(c, gi)| c - radius * gi / n)
                    .collect()
            }
            SetShape::Box { lower, upper } => g
                .iter()
                .enumerate()
                .map(|(i, &gi)| if gi >= 0.0 { lower[i] } else { upper[i] })
                .collect(),
            SetShape::Simplex => {
                // Among tied vertices e_i the one with the largest index is
                // lexicographically smallest.
                let mut best = 0;
                for (i, &gi) in g.iter().enumerate().skip(1) {
                    if gi <= g[best] {
                        best = i;
                    }
                }
                let mut v = vec![0.0; self.dimension];
                v[best] = 1.0;
                v
            }
            SetShape::L1Ball { radius } => {
                let max_abs = g.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
                let mut best: Option<Vec<f64>> = None;
                for (i, &gi) in g.iter().enumerate() {
                    if gi.abs() != max_abs {
                        continue;
                    }
                    let signs: &[f64] = if gi > 0.0 {
                        &[-1.0]
                    } else if gi < 0.0 {
                        &[1.0]
                    } else {
                        &[-1.0, 1.0]
                    };
                    for &s in signs {
                        let mut v = vec![0.0; self.dimension];
                        v[i] = s * radius;
                        best = match best {
                            Some(b) if lex_cmp(&b, &v) != Ordering::Greater => Some(b),
                            _ => Some(v),
                        };
                    }
                }
                best.expect("at least one coordinate attains the max")
            }
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check_vector("point", point)?;
        Ok(self.project_unchecked(point))
    }

    pub(crate) fn project_unchecked(&self, p: &[f64]) -> Vec<f64> {
        match &self.shape {
            SetShape::Ball { center, radius } => {
                let d = dist(p, center);
                if d <= *radius {
                    return p.to_vec();
                }
                let s = radius / d;
                center
                    .iter()
                    .zip(p)
                    .map(|(c, pi)| c + s * (pi - c))
                    .collect()
            }
            SetShape::Box { lower, upper } => p
                .iter()
                .enumerate()
                .map(|(i, &pi)| pi.clamp(lower[i], upper[i]))
                .collect(),
            SetShape::Simplex => project_simplex(p, 1.0),
            SetShape::L1Ball { radius } => {
                let l1: f64 = p.iter().map(|x| x.abs()).sum();
                if l1 <= *radius {
                    return p.to_vec();
                }
                let abs: Vec<f64> = p.iter().map(|x| x.abs()).collect();
                project_simplex(&abs, *radius)
                    .into_iter()
                    .zip(p)
                    .map(|(w, &pi)| if pi < 0.0 { -w } else { w })
                    .collect()
            }
        }
    }

    /// Membership up to `tol` on the constraint residuals.
    pub fn contains(&self, point: &[f64], tol: f64) -> Result<bool> {
        if !(tol >= 0.0) {
            return Err(Error::Precondition(format!("tolerance must be >= 0, got {tol}")));
        }
        self.check_vector("point", point)?;
        Ok(self.residual(point) <= tol)
    }

    /// Largest constraint violation (0 inside the set).
    pub fn residual(&self, p: &[f64]) -> f64 {
        match &self.shape {
            SetShape::Ball { center, radius } => (dist(p, center) - radius).max(0.0),
            SetShape::Box { lower, upper } => p
                .iter()
                .enumerate()
                .map(|(i, &pi)| (lower[i] - pi).max(pi - upper[i]).max(0.0))
                .fold(0.0, f64::max),
            SetShape::Simplex => {
                let neg = p.iter().fold(0.0_f64, |m, &x| m.max(-x));
                let sum: f64 = p.iter().sum();
                neg.max((sum - 1.0).abs())
            }
            SetShape::L1Ball { radius } => {
                let l1: f64 = p.iter().map(|x| x.abs()).sum();
                (l1 - radius).max(0.0)
            }
        }
    }

    /// Radius of the largest Euclidean ball (in the ambient space) around
    /// `point` that stays inside the set. The simplex has empty interior in
    /// its ambient space, so every point of it has radius 0.
    pub fn interior_radius(&self, point: &[f64]) -> Result<f64> {
        self.check_vector("point", point)?;
        if !self.contains(point, MEMBERSHIP_TOL)? {
            return Err(Error::Precondition("point lies outside the set".into()));
        }
        let r = match &self.shape {
            SetShape::Ball { center, radius } => radius - dist(point, center),
            SetShape::Box { lower, upper } => point
                .iter()
                .enumerate()
                .map(|(i, &x)| (x - lower[i]).min(upper[i] - x))
                .fold(f64::INFINITY, f64::min),
            SetShape::Simplex => 0.0,
            SetShape::L1Ball { radius } => {
                let l1: f64 = point.iter().map(|x| x.abs()).sum();
                (radius - l1) / (self.dimension as f64).sqrt()
            }
        };
        Ok(r.max(0.0))
    }

    /// Checks whether `gamma x + (1-gamma) y + gamma (1-gamma) (beta/2) ||x-y||^2 z`
    /// lies in the set.
    pub fn strong_convexity_sample_check(
        &self,
        x: &[f64],
        y: &[f64],
        gamma: f64,
        z: &[f64],
        beta: f64,
    ) -> Result<bool> {
        self.check_vector("x", x)?;
        self.check_vector("y", y)?;
        self.check_vector("z", z)?;
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Contract(format!("gamma must lie in [0, 1], got {gamma}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Contract(format!("beta must be positive, got {beta}")));
        }
        if (norm(z) - 1.0).abs() > 1e-9 {
            return Err(Error::Contract("z must be a unit vector".into()));
        }
        if !self.contains(x, MEMBERSHIP_TOL)? || !self.contains(y, MEMBERSHIP_TOL)? {
            return Err(Error::Contract("x and y must lie in the set".into()));
        }
        let shift = gamma * (1.0 - gamma) * 0.5 * beta * crate::linalg::dist_sq(x, y);
        let witness: Vec<f64> = (0..self.dimension)
            .map(|i| gamma * x[i] + (1.0 - gamma) * y[i] + shift * z[i])
            .collect();
        self.contains(&witness, MEMBERSHIP_TOL)
    }

    /// `max_{x in K} ||x - c||`, exact for every supported shape.
    pub fn farthest_distance(&self, c: &[f64]) -> f64 {
        match &self.shape {
            SetShape::Ball { center, radius } => dist(c, center) + radius,
            SetShape::Box { lower, upper } => c
                .iter()
                .enumerate()
                .map(|(i, &ci)| {
                    let a = ci - lower[i];
                    let b = upper[i] - ci;
                    (a * a).max(b * b)
                })
                .sum::<f64>()
                .sqrt(),
            SetShape::Simplex | SetShape::L1Ball { .. } => self
                .vertices()
                .iter()
                .map(|v| dist(v, c))
                .fold(0.0, f64::max),
        }
    }

    /// Extreme points of polytopes whose vertex count is linear in the dimension.
    fn vertices(&self) -> Vec<Vec<f64>> {
        let d = self.dimension;
        match &self.shape {
            SetShape::Simplex => (0..d)
                .map(|i| {
                    let mut v = vec![0.0; d];
                    v[i] = 1.0;
                    v
                })
                .collect(),
            SetShape::L1Ball { radius } => (0..d)
                .flat_map(|i| {
                    [-1.0, 1.0].into_iter().map(move |s| {
                        let mut v = vec![0.0; d];
                        v[i] = s * radius;
                        v
                    })
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Minimum and maximum of `<a, x>` over the set.
    pub fn linear_range(&self, a: &[f64]) -> (f64, f64) {
        let lo = dot(a, &self.lmo_unchecked(a));
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        let hi = dot(a, &self.lmo_unchecked(&neg));
        (lo, hi)
    }

    /// Draws a point from the set (uniform for ball, box, simplex and l1-ball).
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let d = self.dimension;
        match &self.shape {
            SetShape::Ball { center, radius } => {
                let u = random_unit_vector(rng, d);
                let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
                center.iter().zip(&u).map(|(c, ui)| c + r * ui).collect()
            }
            SetShape::Box { lower, upper } => (0..d)
                .map(|i| lower[i] + (upper[i] - lower[i]) * rng.random::<f64>())
                .collect(),
            SetShape::Simplex => {
                let e: Vec<f64> = (0..d).map(|_| Exp1.sample(rng)).collect();
                let s: f64 = e.iter().sum();
                e.into_iter().map(|x| x / s).collect()
            }
            SetShape::L1Ball { radius } => {
                let e: Vec<f64> = (0..=d).map(|_| Exp1.sample(rng)).collect();
                let s: f64 = e.iter().sum();
                (0..d)
                    .map(|i| {
                        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                        sign * radius * e[i] / s
                    })
                    .collect()
            }
        }
    }

    /// Draws a point on the relative boundary: the sphere for balls, a random
    /// face for polytopes.
    pub fn sample_boundary_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.shape {
            SetShape::Ball { center, radius } => {
                let u = random_unit_vector(rng, self.dimension);
                center.iter().zip(&u).map(|(c, ui)| c + radius * ui).collect()
            }
            SetShape::Box { lower, upper } => {
                let mut p = self.sample_point(rng);
                let i = rng.random_range(0..self.dimension);
                p[i] = if rng.random::<bool>() { lower[i] } else { upper[i] };
                p
            }
            SetShape::Simplex => {
                let mut p = self.sample_point(rng);
                let i = rng.random_range(0..self.dimension);
                p[i] = 0.0;
                let total: f64 = p.iter().sum();
                if total <= 0.0 {
                    return self.lmo_unchecked(&random_unit_vector(rng, self.dimension));
                }
                p.into_iter().map(|x| x / total).collect()
            }
            SetShape::L1Ball { radius } => {
                let p = self.sample_point(rng);
                let l1: f64 = p.iter().map(|x| x.abs()).sum();
                if l1 == 0.0 {
                    return self.lmo_unchecked(&random_unit_vector(rng, self.dimension));
                }
                p.into_iter().map(|x| x * radius / l1).collect()
            }
        }
    }
}

/// Euclidean projection onto `{w >= 0 : sum w = z}` by sorting and thresholding.
pub fn project_simplex(p: &[f64], z: f64) -> Vec<f64> {
    let mut sorted = p.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - z) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    p.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}
