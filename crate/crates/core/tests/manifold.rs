mod common;

use common::{two_link_ik, two_link_point_world, wrapped_distance};
use mpf::manifold::{
    ball_initialization, loss, project, sample_ball_projection, sample_particle_projection, sample_uniform_projection,
    uniform_in_ball, ContactVector, ProjectionSettings,
};
use mpf::rng::seeded;
use nalgebra::{DVector, Vector3};
use proptest::prelude::*;
use rand::Rng;

const TARGET: [f64; 2] = [1.19, 1.49];

fn target() -> Vector3<f64> {
    Vector3::new(TARGET[0], TARGET[1], 0.0)
}

#[test]
fn uniform_samples_land_on_both_inverse_kinematics_solutions() {
    let world = two_link_point_world(target());
    let settings = ProjectionSettings::for_resolution(0.02);
    let c = ContactVector::from_active(1, &[0]);
    let batch = sample_uniform_projection(&world, &c, 100, &settings, &mut seeded(31));
    assert_eq!(batch.configs.len(), 100);
    let solutions = two_link_ik(&target());
    let mut hits = [0usize; 2];
    for q in &batch.configs {
        let d: Vec<f64> = solutions.iter().map(|s| wrapped_distance(q, s)).collect();
        let nearest = if d[0] <= d[1] { 0 } else { 1 };
        assert!(d[nearest] < 0.05, "{q:?} is {:.4} rad from the nearest solution", d[nearest]);
        hits[nearest] += 1;
    }
    assert!(hits[0] > 0 && hits[1] > 0, "{hits:?}");
}

#[test]
fn analytic_solutions_reach_the_target() {
    let solutions = two_link_ik(&target());
    for s in &solutions {
        let tip = Vector3::new(s[0].cos() + (s[0] + s[1]).cos(), s[0].sin() + (s[0] + s[1]).sin(), 0.0);
        assert!((tip - target()).norm() < 1e-12);
    }
    assert!((solutions[0][1] + solutions[1][1]).abs() < 1e-12);
}

#[test]
fn every_sampler_returns_manifold_members() {
    let world = two_link_point_world(target());
    let settings = ProjectionSettings::for_resolution(0.02);
    let c = ContactVector::from_active(1, &[0]);
    let mut rng = seeded(32);
    let previous: Vec<DVector<f64>> =
        (0..40).map(|_| &two_link_ik(&target())[rng.random_range(0..2)] + uniform_in_ball(2, 0.3, &mut rng)).collect();
    let batches = [
        sample_uniform_projection(&world, &c, 40, &settings, &mut rng),
        sample_particle_projection(&world, &c, &previous, &settings),
        sample_ball_projection(&world, &c, &previous, 0.2, 40, &settings, &mut rng),
    ];
    for batch in &batches {
        assert!(!batch.configs.is_empty());
        for q in &batch.configs {
            assert!(loss(&world, q, &c).value < settings.manifold_tolerance);
        }
    }
}

#[test]
fn projection_fails_when_the_target_is_out_of_reach() {
    // two unit links cannot reach 2.1 m
    let world = two_link_point_world(Vector3::new(2.11, 0.01, 0.0));
    let settings = ProjectionSettings::for_resolution(0.02);
    let c = ContactVector::from_active(1, &[0]);
    let out = project(&world, &DVector::from_vec(vec![0.1, 0.1]), &c, &settings);
    assert!(!out.is_converged());
}

#[test]
fn vanishing_ball_matches_particle_projection() {
    let world = two_link_point_world(target());
    let settings = ProjectionSettings::for_resolution(0.02);
    let c = ContactVector::from_active(1, &[0]);
    let mut rng = seeded(33);
    let previous: Vec<DVector<f64>> = (0..20).map(|_| DVector::from_fn(2, |_, _| rng.random_range(0.2..1.4))).collect();
    let particle = sample_particle_projection(&world, &c, &previous, &settings);
    let ball = sample_ball_projection(&world, &c, &previous, 1e-12, 20, &settings, &mut rng);
    assert!(!ball.configs.is_empty());
    for q in &ball.configs {
        let nearest = particle.configs.iter().map(|p| (p - q).norm()).fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-6, "{q:?} is {nearest} from every particle projection");
    }
}

#[test]
fn ball_union_draws_are_uniform_over_the_overlap() {
    // two unit intervals centered at 0 and 1: the union is [-1, 2] and the
    // overlap [0, 1] holds a third of it
    let centers = vec![DVector::from_vec(vec![0.0]), DVector::from_vec(vec![1.0])];
    let mut rng = seeded(34);
    let n = 30_000;
    let mut inside = 0usize;
    for _ in 0..n {
        let (_, x) = ball_initialization(&centers, 1.0, &mut rng);
        assert!(x[0] > -1.0 && x[0] < 2.0);
        if (0.0..1.0).contains(&x[0]) {
            inside += 1;
        }
    }
    let p = 1.0 / 3.0;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    let frac = inside as f64 / n as f64;
    assert!((frac - p).abs() < 4.0 * sigma, "overlap fraction {frac}");
}

#[test]
fn uniform_ball_radius_distribution() {
    // P(|x| < r/2) = 2^-dim for a uniform draw in a dim-ball
    let mut rng = seeded(35);
    for dim in [1usize, 2, 3, 7] {
        let n = 20_000;
        let inner = (0..n).filter(|_| uniform_in_ball(dim, 2.0, &mut rng).norm() < 1.0).count();
        let p = 0.5f64.powi(dim as i32);
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((inner as f64 / n as f64 - p).abs() < 4.0 * sigma, "dim {dim}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn converged_projections_are_on_the_manifold(q1 in -3.0f64..3.0, q2 in -3.0f64..3.0) {
        let world = two_link_point_world(target());
        let settings = ProjectionSettings::for_resolution(0.02);
        let c = ContactVector::from_active(1, &[0]);
        if let Some(q) = project(&world, &DVector::from_vec(vec![q1, q2]), &c, &settings).converged() {
            prop_assert!(loss(&world, &q, &c).value < settings.manifold_tolerance);
            prop_assert!(world.chain.within_limits(&q));
        }
    }

    #[test]
    fn ball_draws_stay_in_the_union(
        raw in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 1..8),
        radius in 0.01f64..1.0,
        seed in any::<u64>(),
    ) {
        let centers: Vec<DVector<f64>> = raw.iter().map(|c| DVector::from_column_slice(c)).collect();
        let mut rng = seeded(seed);
        for _ in 0..20 {
            let (j, x) = ball_initialization(&centers, radius, &mut rng);
            prop_assert!((&x - &centers[j]).norm() < radius);
            prop_assert!(centers[..j].iter().all(|c| (c - &x).norm() >= radius));
        }
    }
}
