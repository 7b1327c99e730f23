//! Sampled property suites for the loss and set assumptions.
//!
//! Each suite draws `samples` random checks from a fixed pool of streams
//! and reports the smallest signed slack it saw.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::{dist_sq, dot, norm, sub};
use crate::metrics::{per_round_minimizer, DEFAULT_MINIMIZER_TOL};
use crate::sets::{random_unit_vector, FeasibleSet};
use crate::streams::{make_stream, DriftSchedule, FamilySpec, LossSpec, LossStream};

pub const SUITE_TOL: f64 = 1e-9;
const POOL_HORIZON: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub samples: usize,
    pub failures: usize,
    pub worst_slack: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Instance {
    set: FeasibleSet,
    stream: LossStream,
}

fn drifting(set: FeasibleSet, alpha: f64, center: Vec<f64>, schedule: DriftSchedule, r: Option<f64>) -> Result<Instance> {
    let spec = LossSpec {
        family: FamilySpec::DriftingQuadratic { center },
        alpha,
        interior_radius: r,
    };
    let stream = make_stream(&spec, &schedule, &set, POOL_HORIZON)?;
    Ok(Instance { set, stream })
}

fn rank1(set: FeasibleSet, alpha: f64, direction: Vec<f64>, target: f64, schedule: DriftSchedule) -> Result<Instance> {
    let spec = LossSpec {
        family: FamilySpec::Rank1Quadratic { direction, target },
        alpha,
        interior_radius: None,
    };
    let stream = make_stream(&spec, &schedule, &set, POOL_HORIZON)?;
    Ok(Instance { set, stream })
}

fn pool(seed: u64) -> Result<Vec<Instance>> {
    Ok(vec![
        drifting(
            FeasibleSet::origin_ball(3, 1.0)?,
            1.7,
            vec![0.4, -0.2, 0.9],
            DriftSchedule::random_walk(0.1, seed),
            None,
        )?,
        drifting(
            FeasibleSet::cube(vec![-1.0, 0.0], vec![2.0, 0.5])?,
            0.6,
            vec![2.5, 0.1],
            DriftSchedule::sinusoid(0.4, 16),
            None,
        )?,
        drifting(
            FeasibleSet::simplex(4)?,
            2.0,
            vec![0.1, 0.6, 0.2, 0.1],
            DriftSchedule::piecewise_constant(0.3, 3, seed.wrapping_add(1)),
            None,
        )?,
        drifting(
            FeasibleSet::l1_ball(3, 1.5)?,
            1.0,
            vec![0.3, 0.3, -0.2],
            DriftSchedule::random_walk(0.05, seed.wrapping_add(2)),
            None,
        )?,
        drifting(
            FeasibleSet::origin_ball(2, 2.0)?,
            3.0,
            vec![0.2, 0.1],
            DriftSchedule::sinusoid(0.3, 20),
            Some(1.0),
        )?,
        rank1(
            FeasibleSet::cube(vec![-1.0, -1.0, -1.0], vec![1.0, 1.0, 1.0])?,
            1.2,
            vec![1.0, -0.5, 2.0],
            0.7,
            DriftSchedule::random_walk(0.2, seed.wrapping_add(3)),
        )?,
        rank1(
            FeasibleSet::cube(vec![-1.0], vec![1.0])?,
            0.9,
            vec![-2.0],
            0.4,
            DriftSchedule::sinusoid(0.5, 12),
        )?,
    ])
}

struct Suite {
    name: &'static str,
    samples: usize,
    failures: usize,
    worst: f64,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            samples: 0,
            failures: 0,
            worst: f64::INFINITY,
        }
    }

    fn record(&mut self, slack: f64) {
        self.samples += 1;
        if slack < -SUITE_TOL {
            self.failures += 1;
        }
        self.worst = self.worst.min(slack);
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            name: self.name,
            samples: self.samples,
            failures: self.failures,
            worst_slack: self.worst,
        }
    }
}

fn pick<'a, R: Rng>(rng: &mut R, pool: &'a [&'a Instance]) -> (&'a Instance, usize) {
    let inst = pool[rng.random_range(0..pool.len())];
    (inst, rng.random_range(1..=inst.stream.horizon()))
}

/// Runs every suite with `samples` checks each.
pub fn run_property_suites(samples: usize, seed: u64) -> Result<Vec<SuiteReport>> {
    let instances = pool(seed)?;
    let all: Vec<&Instance> = instances.iter().collect();
    let strongly_convex: Vec<&Instance> = instances.iter().filter(|i| i.stream.beta_f() > 0.0).collect();
    let interior: Vec<&Instance> = instances
        .iter()
        .filter(|i| i.stream.interior_radius().is_some())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut smooth = Suite::new("smoothness");
    for _ in 0..samples {
        let (inst, t) = pick(&mut rng, &all);
        let x = inst.set.sample_point(&mut rng);
        let y = inst.set.sample_point(&mut rng);
        let (fx, g) = inst.stream.evaluate(t, &x)?;
        let fy = inst.stream.value(t, &y)?;
        let upper = fx + dot(&g, &sub(&y, &x)) + 0.5 * inst.stream.alpha() * dist_sq(&x, &y);
        smooth.record(upper - fy);
    }

    let mut convex = Suite::new("strong-convexity");
    let mut grad_lower = Suite::new("gradient-lower-bound");
    let mut growth = Suite::new("quadratic-growth");
    for _ in 0..samples {
        let (inst, t) = pick(&mut rng, &strongly_convex);
        let beta = inst.stream.beta_f();
        let x = inst.set.sample_point(&mut rng);
        let y = inst.set.sample_point(&mut rng);
        let (fx, g) = inst.stream.evaluate(t, &x)?;
        let fy = inst.stream.value(t, &y)?;
        let lower = fx + dot(&g, &sub(&y, &x)) + 0.5 * beta * dist_sq(&x, &y);
        convex.record(fy - lower);

        let (x_star, f_star) = per_round_minimizer(&inst.stream, &inst.set, t, DEFAULT_MINIMIZER_TOL)?;
        let gap = (fx - f_star).max(0.0);
        grad_lower.record(norm(&g) - (0.5 * beta).sqrt() * gap.sqrt());
        growth.record(fx - f_star - 0.5 * beta * dist_sq(&x, &x_star));
    }

    let mut interior_upper = Suite::new("interior-smooth-upper-bound");
    for _ in 0..samples {
        let (inst, t) = pick(&mut rng, &interior);
        let x = inst.set.sample_point(&mut rng);
        let (x_star, f_star) = per_round_minimizer(&inst.stream, &inst.set, t, DEFAULT_MINIMIZER_TOL)?;
        let (_, g_star) = inst.stream.evaluate(t, &x_star)?;
        let fx = inst.stream.value(t, &x)?;
        let upper = 0.5 * inst.stream.alpha() * dist_sq(&x_star, &x);
        interior_upper.record((upper - (fx - f_star)).min(SUITE_TOL - norm(&g_star)));
    }

    let mut ball = Suite::new("ball-strong-convexity");
    let balls = [
        FeasibleSet::origin_ball(2, 1.0)?,
        FeasibleSet::ball(vec![0.5, -1.0, 2.0], 2.5)?,
        FeasibleSet::origin_ball(10, 0.3)?,
    ];
    for _ in 0..samples {
        let set = &balls[rng.random_range(0..balls.len())];
        let beta = 1.0 / ball_radius(set);
        let x = if rng.random_bool(0.5) { set.sample_boundary_point(&mut rng) } else { set.sample_point(&mut rng) };
        let y = if rng.random_bool(0.5) { set.sample_boundary_point(&mut rng) } else { set.sample_point(&mut rng) };
        let gamma = rng.random::<f64>();
        let z = random_unit_vector(&mut rng, set.dimension());
        let inside = set.strong_convexity_sample_check(&x, &y, gamma, &z, beta)?;
        ball.record(if inside { 0.0 } else { -1.0 });
    }

    Ok(vec![
        smooth.finish(),
        convex.finish(),
        grad_lower.finish(),
        growth.finish(),
        interior_upper.finish(),
        ball.finish(),
    ])
}

fn ball_radius(set: &FeasibleSet) -> f64 {
    set.diameter() / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_small_sample() {
        for report in run_property_suites(500, 3).unwrap() {
            assert!(report.passed(), "{report:?}");
            assert_eq!(report.samples, 500);
        }
    }

    #[test]
    fn ball_witness_rejects_overstated_constant() {
        let set = FeasibleSet::origin_ball(2, 1.0).unwrap();
        let ok = set
            .strong_convexity_sample_check(&[1.0, 0.0], &[-1.0, 0.0], 0.5, &[0.0, 1.0], 1.0)
            .unwrap();
        assert!(ok);
        let too_big = set
            .strong_convexity_sample_check(&[1.0, 0.0], &[-1.0, 0.0], 0.5, &[0.0, 1.0], 2.5)
            .unwrap();
        assert!(!too_big);
    }
}
