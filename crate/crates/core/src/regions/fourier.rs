use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Piece, RegionSet};

/// `sin(πx)`, exactly zero at the integers.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let mut r = x % 2.0;
    if r > 1.0 {
        r -= 2.0;
    } else if r < -1.0 {
        r += 2.0;
    }
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    // sin(πr) = sin(π(1 − r)) keeps the argument small
    let r = if r > 0.5 {
        1.0 - r
    } else if r < -0.5 {
        -1.0 - r
    } else {
        r
    };
    (PI * r).sin()
}

/// `cos(πx)`, exactly zero at half-integers and ±1 at integers.
pub(crate) fn cos_pi(x: f64) -> f64 {
    let mut r = (x % 2.0).abs();
    if r > 1.0 {
        r = 2.0 - r;
    }
    if r == 0.5 {
        0.0
    } else if r <= 0.25 {
        (PI * r).cos()
    } else if r >= 0.75 {
        -(PI * (1.0 - r)).cos()
    } else {
        (PI * (0.5 - r)).sin()
    }
}

/// `e^{−2πi x}`.
pub(crate) fn cis_neg_2pi(x: f64) -> Complex64 {
    Complex64::new(cos_pi(2.0 * x), -sin_pi(2.0 * x))
}

/// `∫_0^1 e^{−2πi s u} du = e^{−πi s}·sin(πs)/(πs)`, equal to 1 at `s = 0`.
fn unit_interval_ft(s: f64) -> Complex64 {
    if s == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let sinc = sin_pi(s) / (PI * s);
    Complex64::new(cos_pi(s) * sinc, -sin_pi(s) * sinc)
}

pub(crate) fn piece_ft(p: &Piece, t: &[f64]) -> Complex64 {
    let d = p.dim();
    let mut phase = 0.0;
    for i in 0..d {
        phase += t[i] * p.num_offset()[i];
    }
    let mut acc = cis_neg_2pi(phase) * p.num_volume();
    for k in 0..d {
        // s = Eᵀt
        let s: f64 = (0..d).map(|i| p.num_edges()[(i, k)] * t[i]).sum();
        acc *= unit_interval_ft(s);
    }
    acc
}

/// `f̂(t) = ∫_S e^{−2πi⟨t,x⟩} dx` in closed form, summed over the pieces.
pub fn ft_indicator(s: &RegionSet, t: &[f64]) -> Complex64 {
    assert_eq!(t.len(), s.dim(), "frequency dimension");
    s.pieces().iter().map(|p| piece_ft(p, t)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraSpec, QValue};

    #[test]
    fn trig_helpers_are_exact_on_the_grid() {
        for k in -6..=6 {
            assert_eq!(sin_pi(k as f64), 0.0);
            assert_eq!(cos_pi(k as f64 + 0.5), 0.0);
            assert_eq!(cos_pi(k as f64).abs(), 1.0);
        }
        for x in [0.1, 0.3, 0.77, -1.3, 12.345] {
            assert!((sin_pi(x) - (PI * x).sin()).abs() < 1e-14);
            assert!((cos_pi(x) - (PI * x).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn unit_interval_values() {
        let alg = AlgebraSpec::rationals();
        let s = RegionSet::interval(&QValue::zero(&alg), &QValue::one(&alg)).unwrap();
        assert!((ft_indicator(&s, &[0.0]) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((ft_indicator(&s, &[0.5]).norm() - 2.0 / PI).abs() < 1e-12);
        for k in [1.0, -2.0, 7.0] {
            assert_eq!(ft_indicator(&s, &[k]).norm(), 0.0);
        }
    }

    #[test]
    fn zero_frequency_is_volume() {
        let alg = AlgebraSpec::quadratic(2).unwrap();
        let q = |s: &str| QValue::parse(&alg, s).unwrap();
        let a = RegionSet::interval(&q("0"), &q("w1 - 1")).unwrap();
        let b = RegionSet::interval(&q("1"), &q("3 - w1")).unwrap();
        let s = RegionSet::union(&[a, b]).unwrap();
        assert!((ft_indicator(&s, &[0.0]).re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn left_open_interval_matches_right_open() {
        let alg = AlgebraSpec::rationals();
        let q = |s: &str| QValue::parse(&alg, s).unwrap();
        let a = RegionSet::interval(&q("-1/3"), &q("1/2")).unwrap();
        let b = RegionSet::interval_left_open(&q("-1/3"), &q("1/2")).unwrap();
        for t in [0.3, -1.7, 4.25] {
            assert!((ft_indicator(&a, &[t]) - ft_indicator(&b, &[t])).norm() < 1e-14);
        }
    }
}
