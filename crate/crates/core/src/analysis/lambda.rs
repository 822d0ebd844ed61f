//! The odd, nondecreasing quintic `lambda` that flattens the signed distance
//! outside `[-eps1, eps1]`:
//!
//! ```text
//! lambda(z) = z - 2 z^3 / (3 eps1^2) + z^5 / (5 eps1^4)   for |z| <= eps1,
//! lambda(z) = sgn(z) 8 eps1 / 15                          otherwise.
//! ```

pub fn lambda_map(z: f64, eps1: f64) -> f64 {
    if z.abs() <= eps1 {
        let z3 = z * z * z;
        let z5 = z3 * z * z;
        let e2 = eps1 * eps1;
        z - 2.0 * z3 / (3.0 * e2) + z5 / (5.0 * e2 * e2)
    } else {
        z.signum() * 8.0 * eps1 / 15.0
    }
}

/// `lambda'(z) = (1 - (z / eps1)^2)^2` on the core, zero outside.
pub fn lambda_d1(z: f64, eps1: f64) -> f64 {
    if z.abs() <= eps1 {
        let r = z / eps1;
        let v = 1.0 - r * r;
        v * v
    } else {
        0.0
    }
}

/// `lambda''(z) = -4 z (1 - (z / eps1)^2) / eps1^2` on the core, zero outside.
pub fn lambda_d2(z: f64, eps1: f64) -> f64 {
    if z.abs() <= eps1 {
        let r = z / eps1;
        -4.0 * z * (1.0 - r * r) / (eps1 * eps1)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Hypersurface;
    use proptest::prelude::*;

    #[test]
    fn closed_form_values() {
        for eps1 in [0.1, 0.5, 1.0, 3.0] {
            assert!((lambda_map(eps1, eps1) - 8.0 * eps1 / 15.0).abs() < 1e-12);
            assert_eq!(lambda_map(0.0, eps1), 0.0);
            assert_eq!(lambda_d1(0.0, eps1), 1.0);
            for z in [eps1, -eps1] {
                assert_eq!(lambda_d1(z, eps1), 0.0);
                assert_eq!(lambda_d2(z, eps1), 0.0);
            }
            assert!((lambda_d1(eps1 / 2.0, eps1) - 0.5625).abs() < 1e-12);
            assert_eq!(lambda_map(2.0 * eps1, eps1), 8.0 * eps1 / 15.0);
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let eps1 = 0.7;
        let h = 1e-6;
        for i in -99..=99 {
            let z = eps1 * i as f64 / 100.0;
            let d1 = (lambda_map(z + h, eps1) - lambda_map(z - h, eps1)) / (2.0 * h);
            let d2 = (lambda_d1(z + h, eps1) - lambda_d1(z - h, eps1)) / (2.0 * h);
            assert!((lambda_d1(z, eps1) - d1).abs() < 1e-8, "z={z}");
            assert!((lambda_d2(z, eps1) - d2).abs() < 1e-8, "z={z}");
        }
    }

    proptest! {
        #[test]
        fn odd_bounded_and_monotone(z in -5.0..5.0f64, dz in 0.0..1.0f64, eps1 in 0.01..3.0f64) {
            prop_assert_eq!(lambda_map(-z, eps1), -lambda_map(z, eps1));
            prop_assert!(lambda_map(z, eps1).abs() <= 8.0 * eps1 / 15.0 * (1.0 + 1e-15));
            prop_assert!(lambda_map(z + dz, eps1) >= lambda_map(z, eps1));
            prop_assert!(lambda_d1(z, eps1) >= 0.0);
        }

        #[test]
        fn tube_membership_through_lambda(x in -1.5..1.5f64, y in -1.5..1.5f64, eps in 0.01..0.4f64) {
            let eps1 = 0.45;
            let circle = Hypersurface::sphere(vec![0.0, 0.0], 1.0).unwrap();
            let p = [x, y];
            let Ok(d) = circle.signed_distance(&p) else { return Ok(()) };
            let inside = circle.in_tube(&p, eps);
            let through = lambda_map(d, eps1).abs() < lambda_map(eps, eps1);
            prop_assert_eq!(inside, through);
        }
    }
}
