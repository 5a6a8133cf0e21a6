use degdiff_web::{doubling_ratios, kernel_slice, semigroup_bump};

const UNIT: &str = r#"{"schema":1,"kind":"closed_form","family":"constant","value":1}"#;

#[test]
fn unit_kernel_is_gaussian() {
    let v = kernel_slice(UNIT, 1.0, 0.0, -2.0, 2.0, 5).unwrap();
    for (i, k) in v.iter().enumerate() {
        let y = -2.0 + i as f64;
        let g = (-y * y / 4.0).exp() / (4.0 * std::f64::consts::PI).sqrt();
        assert!((k - g).abs() < 1e-13);
    }
}

#[test]
fn semigroup_keeps_mass_below_one() {
    let v = semigroup_bump(UNIT, 0.5, 0.0, 1.0, -6.0, 6.0, 121).unwrap();
    assert_eq!(v.len(), 121);
    assert!(v.iter().all(|&s| (0.0..=1.0).contains(&s)));
    assert!(v[60] > v[0]);
}

#[test]
fn unit_doubling_is_two() {
    let v = doubling_ratios(UNIT, 0.0, &[0.5, 1.0, 3.0]).unwrap();
    assert!(v.iter().all(|r| (r - 2.0).abs() < 1e-12));
}

#[test]
fn bad_input_is_an_error() {
    assert!(kernel_slice("{}", 1.0, 0.0, -1.0, 1.0, 3).is_err());
    assert!(semigroup_bump(UNIT, -1.0, 0.0, 1.0, -1.0, 1.0, 3).is_err());
}
