mod common;

use common::{
    affine_world, fd_jacobian, fd_loss_gradient, random_chain, random_configuration, random_sensor, relative_error,
};
use mpf::kinematics::{linear_jacobian, Dim, SensorSpec};
use mpf::manifold::{loss, loss_gradient, ContactVector};
use mpf::rng::seeded;
use nalgebra::{DVector, Vector3};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn jacobian_matches_finite_differences() {
    let mut rng = seeded(21);
    for case in 0..300 {
        let dim = if case % 2 == 0 { Dim::Two } else { Dim::Three };
        let n = rng.random_range(1..8);
        let chain = random_chain(&mut rng, dim, n);
        let sensor = random_sensor(&mut rng, &chain);
        let q = random_configuration(&mut rng, chain.n_joints());
        let analytic = linear_jacobian(&chain, &q, &sensor);
        let numeric = fd_jacobian(&chain, &q, &sensor, 1e-6);
        let err = relative_error(analytic.as_slice(), numeric.as_slice());
        assert!(err < 1e-5, "case {case}: relative error {err}");
    }
}

#[test]
fn joints_beyond_the_sensor_link_have_zero_columns() {
    let mut rng = seeded(4);
    let chain = random_chain(&mut rng, Dim::Three, 5);
    let sensor = SensorSpec::point(2, Vector3::new(0.1, 0.2, 0.3));
    let jac = linear_jacobian(&chain, &random_configuration(&mut rng, 5), &sensor);
    assert!(jac.columns(3, 2).iter().all(|v| *v == 0.0));
}

#[test]
fn loss_gradient_matches_finite_differences() {
    let mut rng = seeded(22);
    let mut checked = 0;
    while checked < 200 {
        let dim = if checked % 2 == 0 { Dim::Two } else { Dim::Three };
        let world = affine_world(&mut rng, dim);
        let q = random_configuration(&mut rng, world.n_joints());
        let m = world.n_sensors();
        let bits: Vec<bool> = (0..m).map(|_| rng.random()).collect();
        if !bits.iter().any(|b| *b) {
            continue;
        }
        let c = ContactVector::new(bits);
        let analytic = loss_gradient(&world, &q, &c);
        let numeric = fd_loss_gradient(&world, &q, &c, 1e-6);
        let err = relative_error(analytic.as_slice(), numeric.as_slice());
        assert!(err < 1e-3, "case {checked}: relative error {err}");
        checked += 1;
    }
}

#[test]
fn clear_contact_vector_has_zero_loss_and_gradient() {
    let mut rng = seeded(23);
    let world = affine_world(&mut rng, Dim::Three);
    let q = random_configuration(&mut rng, world.n_joints());
    let c = ContactVector::none(world.n_sensors());
    assert_eq!(loss(&world, &q, &c).value, 0.0);
    assert!(loss_gradient(&world, &q, &c).iter().all(|g| *g == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn planar_jacobian_has_no_z_row_and_matches_fd(
        links in prop::collection::vec(0.1f64..1.0, 1..6),
        angles in prop::collection::vec(-3.0f64..3.0, 6),
        along in 0.0f64..1.0,
    ) {
        let chain = mpf::kinematics::ChainModel::planar(&links, (-3.2, 3.2)).unwrap();
        let n = links.len();
        let q = DVector::from_column_slice(&angles[..n]);
        let sensor = SensorSpec::point(n - 1, Vector3::new(along * links[n - 1], 0.0, 0.0));
        let jac = linear_jacobian(&chain, &q, &sensor);
        prop_assert_eq!(jac.nrows(), 2);
        let err = relative_error(jac.as_slice(), fd_jacobian(&chain, &q, &sensor, 1e-6).as_slice());
        prop_assert!(err < 1e-5);
    }
}
