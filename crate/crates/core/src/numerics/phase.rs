use std::f64::consts::PI;

use num_complex::Complex64;

/// Wraps an angle into (-pi, pi].
#[inline]
pub fn wrap(phi: f64) -> f64 {
    if phi > -PI && phi <= PI {
        return phi;
    }
    let two_pi = 2.0 * PI;
    let mut p = (phi + PI).rem_euclid(two_pi) - PI;
    if p <= -PI {
        p += two_pi;
    }
    p
}

/// Argument of `z` in (-pi, pi], with arg(0) := 0.
#[inline]
pub fn angle(z: Complex64) -> f64 {
    if z.re == 0.0 && z.im == 0.0 {
        return 0.0;
    }
    let a = z.im.atan2(z.re);
    if a <= -PI {
        PI
    } else {
        a
    }
}

/// Wrapped difference `a - b` in (-pi, pi].
#[inline]
pub fn wrapped_diff(a: f64, b: f64) -> f64 {
    wrap(a - b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wrap_edges() {
        assert_eq!(wrap(PI), PI);
        assert_eq!(wrap(-PI), PI);
        assert!((wrap(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap(-0.5) + 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn wrap_lands_in_half_open_interval(x in -1e3f64..1e3) {
            let w = wrap(x);
            prop_assert!(w > -PI && w <= PI);
            let k = ((x - w) / (2.0 * PI)).round();
            prop_assert!((x - w - k * 2.0 * PI).abs() < 1e-9);
        }
    }
}
