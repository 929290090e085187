//! Shapes of unit lattices as points of the modular surface.
//!
//! `R³₀` is identified with `C` by the similarity sending `(−1,0,1) ↦ 1` and
//! `(0,−1,1) ↦ 1 + ω`. A basis `(v₁, v₂)` then gives `τ = z(v₂)/z(v₁)`,
//! which is moved to the upper half plane by `τ ↦ −τ` (the basis
//! `(v₁, −v₂)` spans the same lattice) and reduced into the standard
//! fundamental domain of `SL₂(Z)`.

use std::fmt;

use rug::{Float, Integer};

use crate::complex::HpComplex;
use crate::error::{Error, Result};
use crate::units::LogVector;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    /// `τ ↦ τ − n`.
    Translate(Integer),
    /// `τ ↦ −1/τ`.
    Invert,
    /// `τ ↦ −τ`, applied once to fix the orientation of the raw quotient.
    Negate,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Translate(n) => write!(f, "T({n})"),
            Move::Invert => f.write_str("S"),
            Move::Negate => f.write_str("N"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ShapePoint {
    pub tau: HpComplex,
    pub reduced: bool,
    pub reduction_word: Vec<Move>,
}

impl ShapePoint {
    /// Distance to the hexagonal shape. Both corners `e^{iπ/3}` and
    /// `e^{2πi/3}` of the domain represent it, since `τ ↦ τ+1` swaps them.
    pub fn corner_distance(&self) -> f64 {
        let right = HpComplex::corner(self.tau.prec());
        let left = HpComplex::new(-right.re.clone(), right.im.clone());
        self.tau.dist(&right).min(self.tau.dist(&left))
    }

    /// `cos(arg τ)`.
    pub fn cos_arg(&self) -> f64 {
        Float::with_val(self.tau.prec(), &self.tau.re / self.tau.abs()).to_f64()
    }

    pub fn word_string(&self) -> String {
        self.reduction_word
            .iter()
            .map(Move::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// The similarity `R³₀ → C`: `(x₁, x₂, x₃) ↦ −x₁ − x₂(1 + ω)`.
pub fn to_plane(v: &LogVector) -> Result<HpComplex> {
    if !v.on_plane() {
        return Err(Error::InvalidInput(format!(
            "{v} is off the trace-zero plane"
        )));
    }
    let p = v.prec();
    let half_x2 = Float::with_val(p, &v.x[1] / 2u32);
    let re = -Float::with_val(p, &v.x[0] + &half_x2);
    let s3 = Float::with_val(p, 3).sqrt();
    let im = -(half_x2 * s3);
    Ok(HpComplex::new(re, im))
}

fn tie_eps(prec: u32) -> Float {
    Float::with_val(64, 1) >> (prec / 2)
}

/// Gauss reduction into `|Re τ| ≤ 1/2`, `|τ| ≥ 1`.
///
/// On the boundary `Re τ = +1/2` is preferred to `−1/2`, and on the unit
/// circle the representative with `Re τ ≥ 0`; both ties are decided with a
/// tolerance of `2^-(prec/2)`.
pub fn reduce_fundamental(tau: &HpComplex) -> Result<ShapePoint> {
    if tau.im <= 0 {
        return Err(Error::Precondition(format!("τ = {tau} is not in the upper half plane")));
    }
    let p = tau.prec();
    let eps = tie_eps(p);
    let half = Float::with_val(p, 0.5);
    let one = Float::with_val(p, 1);
    let mut t = tau.clone();
    let mut word = Vec::new();
    let mut reduced = false;
    for _ in 0..10_000 {
        let n = Float::with_val(p, &t.re + &half).floor().to_integer().unwrap();
        if n != 0 {
            t.re -= &n;
            word.push(Move::Translate(n));
        }
        if t.norm_sqr() < Float::with_val(p, &one - &eps) {
            t = -&t.recip();
            word.push(Move::Invert);
            continue;
        }
        if t.re < Float::with_val(p, &eps - &half) {
            t.re += 1u32;
            word.push(Move::Translate(Integer::from(-1)));
        }
        if t.norm_sqr() < Float::with_val(p, &one + &eps) && t.re < -eps.clone() {
            t = -&t.recip();
            word.push(Move::Invert);
        }
        reduced = true;
        break;
    }
    Ok(ShapePoint {
        tau: t,
        reduced,
        reduction_word: word,
    })
}

/// Reduced shape of the lattice spanned by two log vectors.
pub fn shape_from_units(v1: &LogVector, v2: &LogVector) -> Result<ShapePoint> {
    let z1 = to_plane(v1)?;
    let z2 = to_plane(v2)?;
    let p = z1.prec().max(z2.prec());
    let (a1, a2) = (z1.abs().to_f64(), z2.abs().to_f64());
    let floor = (-(p as f64) + 8.0).exp2();
    if a1 <= 2.0 * v1.err + floor || a2 <= 2.0 * v2.err + floor {
        return Err(Error::DependentUnits("a log vector is numerically zero".into()));
    }
    let mut tau = &z2 / &z1;
    let rel = 8.0 * (v1.err / a1 + v2.err / a2) + floor;
    let tol = rel * tau.abs().to_f64();
    if tau.im.to_f64().abs() <= tol {
        return Err(Error::DependentUnits(format!(
            "quotient {tau} is real within {tol:.3e}"
        )));
    }
    let mut word = Vec::new();
    if tau.im < 0 {
        tau = -&tau;
        word.push(Move::Negate);
    }
    let mut s = reduce_fundamental(&tau)?;
    word.append(&mut s.reduction_word);
    s.reduction_word = word;
    Ok(s)
}

/// `z(ã, b̃) = (1 + 2ã + (1 + b̃ + 2ã)ω) / (1 + ã + (ã − b̃)ω)`.
pub fn limit_shape_z(a_tilde: f64, b_tilde: f64, prec: u32) -> HpComplex {
    let w = HpComplex::omega(prec);
    let a = Float::with_val(prec, a_tilde);
    let b = Float::with_val(prec, b_tilde);
    let two_a = Float::with_val(prec, &a * 2u32);
    let real = |x: Float| HpComplex::new(x, Float::new(prec));
    let num = &real(Float::with_val(prec, &two_a + 1u32))
        + &(&real(Float::with_val(prec, &two_a + &b) + 1u32) * &w);
    let den = &real(Float::with_val(prec, &a + 1u32)) + &(&real(Float::with_val(prec, &a - &b)) * &w);
    &num / &den
}

/// Upper end of the curve parameter: `min(1/(3ã), 1/b̃)`, infinite when both vanish.
pub fn curve_r_max(a_tilde: f64, b_tilde: f64) -> f64 {
    let inv = |x: f64| if x == 0.0 { f64::INFINITY } else { 1.0 / x };
    inv(3.0 * a_tilde).min(inv(b_tilde))
}

/// `γ(r) = z(rã, rb̃)` for `0 ≤ r ≤ min(1/(3ã), 1/b̃)`.
pub fn curve_gamma(a_tilde: f64, b_tilde: f64, r: f64, prec: u32) -> Result<HpComplex> {
    let rmax = curve_r_max(a_tilde, b_tilde);
    if !(r >= 0.0 && r <= rmax * (1.0 + 1e-12)) {
        return Err(Error::InvalidParams(format!(
            "r = {r} outside [0, {rmax}]"
        )));
    }
    Ok(limit_shape_z(r * a_tilde, r * b_tilde, prec))
}

/// `(1 − 2α − 2α²)/(2 + 2α + 2α²)`.
pub fn cusick_angle_cos(alpha: f64) -> f64 {
    (1.0 - 2.0 * alpha - 2.0 * alpha * alpha) / (2.0 + 2.0 * alpha + 2.0 * alpha * alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: u32 = 200;

    fn lv(x: [f64; 3]) -> LogVector {
        LogVector::from_f64(P, x)
    }

    /// `(a, b, −a − b)` with the last coordinate exact.
    fn lv2(a: f64, b: f64) -> LogVector {
        let x = Float::with_val(P, a);
        let y = Float::with_val(P, b);
        let z = -Float::with_val(P, &x + &y);
        LogVector::new([x, y, z], 0.0)
    }

    fn close(a: &HpComplex, b: &HpComplex, tol: f64) -> bool {
        a.dist(b) < tol
    }

    /// Reduction oracle in f64.
    fn reduce_f64(mut re: f64, mut im: f64) -> (f64, f64) {
        for _ in 0..1000 {
            re -= (re + 0.5).floor();
            let n = re * re + im * im;
            if n < 1.0 {
                re = -re / n;
                im /= n;
            } else {
                break;
            }
        }
        (re, im)
    }

    #[test]
    fn to_plane_examples() {
        let one = HpComplex::with_val(P, 1.0, 0.0);
        let w = HpComplex::omega(P);
        assert!(close(&to_plane(&lv([-1.0, 0.0, 1.0])).unwrap(), &one, 1e-50));
        assert!(close(&to_plane(&lv([0.0, -1.0, 1.0])).unwrap(), &(&one + &w), 1e-50));
        let expect = &HpComplex::with_val(P, -2.0, 0.0) - &w;
        assert!(close(&to_plane(&lv([1.0, 1.0, -2.0])).unwrap(), &expect, 1e-50));
        assert!(to_plane(&lv([1.0, 1.0, 1.0])).is_err());
    }

    #[test]
    fn reduce_examples() {
        let s = reduce_fundamental(&HpComplex::with_val(P, 2.3, 5.0)).unwrap();
        assert!(close(&s.tau, &HpComplex::with_val(P, 0.3, 5.0), 1e-15));
        assert_eq!(s.reduction_word, vec![Move::Translate(Integer::from(2))]);
        let s = reduce_fundamental(&HpComplex::with_val(P, 0.0, 1.0)).unwrap();
        assert!(close(&s.tau, &HpComplex::with_val(P, 0.0, 1.0), 1e-40));
        let s = reduce_fundamental(&HpComplex::with_val(P, 0.1, 0.2)).unwrap();
        assert!(s.reduced && s.tau.norm_sqr() >= 1);
        let (re, im) = reduce_f64(0.1, 0.2);
        assert!(close(&s.tau, &HpComplex::with_val(P, re, im), 1e-12));
        assert!(reduce_fundamental(&HpComplex::with_val(P, 0.1, -1.0)).is_err());
    }

    #[test]
    fn reduce_ties() {
        let s = reduce_fundamental(&HpComplex::with_val(P, -0.5, 3.0)).unwrap();
        assert!(close(&s.tau, &HpComplex::with_val(P, 0.5, 3.0), 1e-40));
        let th = Float::with_val(P, 2);
        let on_circle = HpComplex::new(Float::with_val(P, th.cos_ref()), Float::with_val(P, th.sin_ref()));
        let s = reduce_fundamental(&on_circle).unwrap();
        assert!(s.tau.re > 0);
        assert!((s.tau.abs().to_f64() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn regular_triangle_shape() {
        let s = shape_from_units(&lv([-1.0, 0.0, 1.0]), &lv([0.0, -1.0, 1.0])).unwrap();
        assert!(s.corner_distance() < 1e-40);
        let s2 = shape_from_units(&lv([-1.0, 0.0, 1.0]), &lv([-1.0, -1.0, 2.0])).unwrap();
        assert!(s2.corner_distance() < 1e-40);
        assert!(matches!(
            shape_from_units(&lv([-1.0, 0.0, 1.0]), &lv([-2.0, 0.0, 2.0])),
            Err(Error::DependentUnits(_))
        ));
    }

    #[test]
    fn both_corners_are_the_hexagonal_shape() {
        let c = HpComplex::corner(P);
        let left = ShapePoint { tau: HpComplex::new(-c.re.clone(), c.im.clone()), ..reduce_fundamental(&c).unwrap() };
        assert!(left.corner_distance() < 1e-40);
        let near = reduce_fundamental(&HpComplex::with_val(P, -0.47, 0.94)).unwrap();
        assert!(near.corner_distance() < 0.09);
    }

    #[test]
    fn limit_shape_examples() {
        let one_w = HpComplex::corner(P);
        assert!(close(&limit_shape_z(0.0, 0.0, P), &one_w, 1e-50));
        for b in [0.1, 0.5, 1.0] {
            assert!((limit_shape_z(0.0, b, P).abs().to_f64() - 1.0).abs() < 1e-15);
        }
        for a in [0.05, 0.2, 0.3] {
            assert!((limit_shape_z(a, a, P).re.to_f64() - 0.5).abs() < 1e-15);
        }
        let g = curve_gamma(0.0, 1.0, 1.0, P).unwrap();
        assert!(close(&g, &HpComplex::omega(P), 1e-40));
        assert!(close(&curve_gamma(0.2, 0.7, 0.0, P).unwrap(), &one_w, 1e-50));
        assert!(curve_gamma(0.2, 0.7, 2.0, P).is_err());
        assert!(curve_gamma(0.0, 0.0, 1e6, P).is_ok());
    }

    #[test]
    fn cusick_angle_examples() {
        assert_eq!(cusick_angle_cos(0.0), 0.5);
        assert!((cusick_angle_cos(0.999_999) + 0.5).abs() < 1e-5);
        assert!((cusick_angle_cos(0.5) + 1.0 / 7.0).abs() < 1e-15);
    }

    fn plane_vec() -> impl Strategy<Value = LogVector> {
        (-20.0f64..20.0, -20.0f64..20.0).prop_map(|(a, b)| lv2(a, b))
    }

    fn unimodular(v1: &LogVector, v2: &LogVector, k: usize) -> (LogVector, LogVector) {
        match k {
            0 => (v2.clone(), v1.clone()),
            1 => (v1.clone(), v1 + v2),
            2 => (v1 + v2, v2.clone()),
            3 => (-v1, v2.clone()),
            4 => (v1.clone(), v2 - v1),
            _ => (v2.clone(), -v1),
        }
    }

    proptest! {
        #[test]
        fn to_plane_is_a_similarity(va in plane_vec(), vb in plane_vec()) {
            let (za, zb) = (to_plane(&va).unwrap(), to_plane(&vb).unwrap());
            prop_assume!(va.norm().to_f64() > 1e-3 && vb.norm().to_f64() > 1e-3);
            let lhs = Float::with_val(P, za.abs() / zb.abs());
            let rhs = Float::with_val(P, va.norm() / vb.norm());
            let rel = Float::with_val(P, &lhs / &rhs) - 1u32;
            prop_assert!(rel.abs().to_f64() < (-80f64).exp2());
            let sc = Float::with_val(P, za.abs() / va.norm());
            prop_assert!((sc.to_f64() - 0.5f64.sqrt()).abs() < 1e-15);
        }

        #[test]
        fn shape_is_basis_invariant(v1 in plane_vec(), v2 in plane_vec(), k in 0usize..6) {
            let s = match shape_from_units(&v1, &v2) { Ok(s) => s, Err(_) => return Ok(()) };
            prop_assume!(s.tau.im.to_f64() > 1e-6 && s.tau.im.to_f64() < 1e6);
            let (w1, w2) = unimodular(&v1, &v2, k);
            let t = shape_from_units(&w1, &w2).unwrap();
            prop_assert!(s.tau.dist(&t.tau) < (-60f64).exp2(), "{} vs {}", s.tau, t.tau);
        }

        #[test]
        fn reduction_matches_f64_oracle(re in -5.0f64..5.0, im in 0.01f64..3.0) {
            let s = reduce_fundamental(&HpComplex::with_val(P, re, im)).unwrap();
            let (r2, i2) = reduce_f64(re, im);
            let (a, b) = s.tau.to_f64();
            // away from the boundary both agree
            prop_assume!(r2.abs() < 0.5 - 1e-6 && r2 * r2 + i2 * i2 > 1.0 + 1e-6);
            prop_assert!((a - r2).abs() < 1e-9 && (b - i2).abs() < 1e-9);
        }

        #[test]
        fn a_zero_stays_on_unit_circle(b in 0.0f64..=1.0) {
            let z = limit_shape_z(0.0, b, P);
            let dev = Float::with_val(P, z.abs() - 1u32).abs();
            prop_assert!(dev.to_f64() < (-80f64).exp2());
        }
    }
}
