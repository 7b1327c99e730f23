#![allow(dead_code)]

use ofw_core::sets::random_unit_vector;
use ofw_core::streams::LossStream;
use ofw_core::{make_stream, DriftSchedule, FamilySpec, FeasibleSet, LossSpec};
use rand::Rng;

pub struct Case {
    pub set: FeasibleSet,
    pub stream: LossStream,
}

pub fn random_set<R: Rng>(rng: &mut R, d: usize) -> FeasibleSet {
    match rng.random_range(0..4) {
        0 => {
            let center: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            FeasibleSet::ball(center, rng.random_range(0.3..2.0)).unwrap()
        }
        1 => {
            let lower: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..0.0)).collect();
            let upper = lower.iter().map(|l| l + rng.random_range(0.2..2.0)).collect();
            FeasibleSet::cube(lower, upper).unwrap()
        }
        2 => FeasibleSet::simplex(d.max(2)).unwrap(),
        _ => FeasibleSet::l1_ball(d, rng.random_range(0.3..2.0)).unwrap(),
    }
}

pub fn random_schedule<R: Rng>(rng: &mut R) -> DriftSchedule {
    let m = rng.random_range(0.0..0.05);
    match rng.random_range(0..4) {
        0 => DriftSchedule::fixed(),
        1 => DriftSchedule::random_walk(m, rng.random()),
        2 => DriftSchedule::piecewise_constant(5.0 * m, rng.random_range(1..4), rng.random()),
        _ => DriftSchedule::sinusoid(5.0 * m, rng.random_range(5..200)),
    }
}

/// Any set, either loss family, any schedule.
pub fn random_case<R: Rng>(rng: &mut R, horizon: usize) -> Case {
    let d = rng.random_range(2..6);
    let set = random_set(rng, d);
    let d = set.dimension();
    let alpha = rng.random_range(0.2..3.0);
    let family = if rng.random_bool(0.6) {
        let anchor = set.sample_point(rng);
        let center = anchor.iter().map(|a| a + rng.random_range(-1.0..1.0)).collect();
        FamilySpec::DriftingQuadratic { center }
    } else {
        let direction = random_unit_vector(rng, d).iter().map(|a| a * rng.random_range(0.5..2.0)).collect();
        FamilySpec::Rank1Quadratic {
            direction,
            target: rng.random_range(-1.5..1.5),
        }
    };
    let spec = LossSpec {
        family,
        alpha,
        interior_radius: None,
    };
    let stream = make_stream(&spec, &random_schedule(rng), &set, horizon).unwrap();
    Case { set, stream }
}

/// Drifting quadratic on a ball or box whose minimizers keep an interior
/// margin `r` for every round.
pub fn interior_case<R: Rng>(rng: &mut R, horizon: usize) -> Case {
    let d = rng.random_range(2..5);
    let alpha = rng.random_range(0.5..2.0);
    let (set, r, base, m) = if rng.random_bool(0.5) {
        let rho = rng.random_range(0.5..2.0);
        let r = rho * rng.random_range(0.25..0.4);
        let m = rho * rng.random_range(0.0..0.1);
        let room = rho - r - 2.0 * m;
        let u = random_unit_vector(rng, d);
        let s = room * rng.random::<f64>() * 0.99;
        let base: Vec<f64> = u.iter().map(|ui| ui * s).collect();
        (FeasibleSet::origin_ball(d, rho).unwrap(), r, base, m)
    } else {
        let half = rng.random_range(0.5..2.0);
        let r = half * rng.random_range(0.25..0.4);
        let m = half * rng.random_range(0.0..0.1);
        let room = (half - r - 2.0 * m) * 0.99;
        let base: Vec<f64> = (0..d).map(|_| rng.random_range(-room..=room)).collect();
        (FeasibleSet::cube(vec![-half; d], vec![half; d]).unwrap(), r, base, m)
    };
    let schedule = match rng.random_range(0..3) {
        0 => DriftSchedule::fixed(),
        1 => DriftSchedule::piecewise_constant(m, 1, rng.random()),
        _ => DriftSchedule::sinusoid(m, rng.random_range(20..300)),
    };
    let spec = LossSpec {
        family: FamilySpec::DriftingQuadratic { center: base },
        alpha,
        interior_radius: Some(r),
    };
    let stream = make_stream(&spec, &schedule, &set, horizon).unwrap();
    Case { set, stream }
}

/// Drifting quadratic on a ball carrying its strong-convexity constant.
pub fn strongly_convex_ball_case<R: Rng>(rng: &mut R, horizon: usize) -> Case {
    let d = rng.random_range(2..6);
    let rho = rng.random_range(0.5..2.0);
    let set = FeasibleSet::origin_ball(d, rho)
        .unwrap()
        .with_strong_convexity(1.0 / rho)
        .unwrap();
    let u = random_unit_vector(rng, d);
    let s = rho * rng.random_range(0.0..2.0);
    let spec = LossSpec {
        family: FamilySpec::DriftingQuadratic {
            center: u.iter().map(|x| x * s).collect(),
        },
        alpha: rng.random_range(0.3..3.0),
        interior_radius: None,
    };
    let stream = make_stream(&spec, &random_schedule(rng), &set, horizon).unwrap();
    Case { set, stream }
}
