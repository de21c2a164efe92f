//! Re-runs the seeded calibration suites that have no acceptance criterion of
//! their own and compares them with the committed fixture.

use sparsum_core::calibration::{cube_sum_suite, sumset_floor_suite, Calibration, CUBE_SUM_COUNT};

fn fixture() -> Calibration {
    Calibration::from_json(include_str!("../fixtures/calibration.json")).unwrap()
}

#[test]
fn cube_sum_constant_matches_fixture() {
    let fx = fixture();
    let c = cube_sum_suite(fx.seed, CUBE_SUM_COUNT).unwrap();
    assert!(c <= fx.cube_sum_constant * (1.0 + 1e-12), "{c} vs {}", fx.cube_sum_constant);
}

#[test]
fn sumset_floor_constants_match_fixture() {
    let fx = fixture();
    let (s1, s2) = sumset_floor_suite(fx.seed).unwrap();
    assert!(s1 >= fx.sumset_floor_s1 * (1.0 - 1e-12), "{s1} vs {}", fx.sumset_floor_s1);
    assert!(s2 >= fx.sumset_floor_s2 * (1.0 - 1e-12), "{s2} vs {}", fx.sumset_floor_s2);
    assert!(s1 > 0.0 && s2 > 0.0);
}

#[test]
fn fixture_round_trips() {
    let fx = fixture();
    assert_eq!(Calibration::from_json(&fx.to_json()).unwrap(), fx);
}
