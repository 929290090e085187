//! Exact arithmetic on monic integer cubics `x³ + p2·x² + p1·x + p0`.
//!
//! Nothing in this module rounds. Evaluation at a rational `b/a` is done in
//! the homogenised form `a³·f(b/a)`, which is also what the norm of the linear
//! form `aθ − b` reduces to.

use std::fmt;

use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::serde_big::int_str;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonicCubic {
    #[serde(with = "int_str")]
    pub p2: Integer,
    #[serde(with = "int_str")]
    pub p1: Integer,
    #[serde(with = "int_str")]
    pub p0: Integer,
}

impl MonicCubic {
    pub fn new(p2: impl Into<Integer>, p1: impl Into<Integer>, p0: impl Into<Integer>) -> Self {
        MonicCubic {
            p2: p2.into(),
            p1: p1.into(),
            p0: p0.into(),
        }
    }

    /// `x³ − t·x² − (t+3)·x − 1`, the classical simplest cubics.
    pub fn simplest(t: &Integer) -> Self {
        MonicCubic::new(-t.clone(), -(t.clone() + 3u32), -1)
    }

    /// `b³ + p2·b²·a + p1·b·a² + p0·a³ = a³·f(b/a)`.
    pub fn eval_scaled(&self, b: &Integer, a: &Integer) -> Result<Integer> {
        if *a == 0 {
            return Err(Error::Precondition("eval_scaled needs a nonzero denominator".into()));
        }
        Ok(self.homogeneous(b, a))
    }

    pub(crate) fn homogeneous(&self, b: &Integer, a: &Integer) -> Integer {
        let b2 = Integer::from(b * b);
        let a2 = Integer::from(a * a);
        let mut acc = Integer::from(&b2 * b);
        acc += Integer::from(&self.p2 * &b2) * a;
        acc += Integer::from(&self.p1 * b) * &a2;
        acc += Integer::from(&self.p0 * &a2) * a;
        acc
    }

    /// Norm of `aθ − b` in `Z[θ]`; a unit exactly when the result is ±1.
    pub fn norm_linear_form(&self, a: &Integer, b: &Integer) -> Result<Integer> {
        if *a == 0 {
            return Err(Error::Precondition("norm_linear_form needs a ≠ 0".into()));
        }
        Ok(-self.homogeneous(b, a))
    }

    pub fn eval_int(&self, x: &Integer) -> Integer {
        let mut acc = Integer::from(x + &self.p2);
        acc *= x;
        acc += &self.p1;
        acc *= x;
        acc += &self.p0;
        acc
    }

    pub fn eval_rational(&self, x: &Rational) -> Rational {
        let mut acc = Rational::from(x + &self.p2);
        acc *= x;
        acc += &self.p1;
        acc *= x;
        acc += &self.p0;
        acc
    }

    pub fn deriv_rational(&self, x: &Rational) -> Rational {
        // 3x² + 2·p2·x + p1
        let mut acc = Rational::from(x * 3u32);
        acc += Integer::from(&self.p2 * 2u32);
        acc *= x;
        acc += &self.p1;
        acc
    }

    pub fn second_deriv_rational(&self, x: &Rational) -> Rational {
        Rational::from(x * 6u32) + Integer::from(&self.p2 * 2u32)
    }

    pub fn eval_float(&self, x: &Float) -> Float {
        let prec = x.prec();
        let mut acc = Float::with_val(prec, x + &self.p2);
        acc *= x;
        acc += &self.p1;
        acc *= x;
        acc += &self.p0;
        acc
    }

    pub fn deriv_float(&self, x: &Float) -> Float {
        let prec = x.prec();
        let mut acc = Float::with_val(prec, x * 3u32);
        acc += Integer::from(&self.p2 * 2u32);
        acc *= x;
        acc += &self.p1;
        acc
    }

    /// `18·p2·p1·p0 − 4·p2³·p0 + p2²·p1² − 4·p1³ − 27·p0²`.
    pub fn discriminant(&self) -> Integer {
        let (p2, p1, p0) = (&self.p2, &self.p1, &self.p0);
        let p2sq = Integer::from(p2 * p2);
        let p1sq = Integer::from(p1 * p1);
        let mut d = Integer::from(p2 * p1) * p0 * 18u32;
        d -= Integer::from(&p2sq * p2) * p0 * 4u32;
        d += Integer::from(&p2sq * &p1sq);
        d -= Integer::from(&p1sq * p1) * 4u32;
        d -= Integer::from(p0 * p0) * 27u32;
        d
    }

    /// Three distinct real roots.
    pub fn is_totally_real(&self) -> bool {
        self.discriminant() > 0
    }

    /// A monic cubic is reducible over the rationals iff it has an integer root.
    pub fn is_irreducible(&self) -> bool {
        if self.p0 == 0 {
            return false;
        }
        self.integer_roots().is_empty()
    }

    /// All integer roots, located on the monotone pieces of the cubic.
    ///
    /// The critical points `(−p2 ± √(p2² − 3·p1))/3` are enclosed by integer
    /// windows of width at most two; every integer in a window is checked
    /// directly and each monotone piece between windows is searched by
    /// integer bisection, so the cost is `O(log max|pᵢ|)` exact evaluations.
    pub fn integer_roots(&self) -> Vec<Integer> {
        let bound = Integer::from(1)
            + [&self.p2, &self.p1, &self.p0]
                .iter()
                .map(|p| Integer::from(p.abs_ref()))
                .max()
                .unwrap();
        let neg_bound = Integer::from(-&bound);

        let mut roots = Vec::new();
        let mut pieces: Vec<(Integer, Integer)> = Vec::new();
        let mut windows: Vec<(Integer, Integer)> = Vec::new();

        let crit = Integer::from(&self.p2 * &self.p2) - Integer::from(&self.p1 * 3u32);
        if crit > 0 {
            let s = crit.sqrt();
            let minus_p2 = Integer::from(-&self.p2);
            let c1 = floor_div3(Integer::from(&minus_p2 - &s) - 1u32);
            let c2 = ceil_div3(Integer::from(&minus_p2 - &s));
            let c3 = floor_div3(Integer::from(&minus_p2 + &s));
            let c4 = ceil_div3(Integer::from(&minus_p2 + &s) + 1u32);
            pieces.push((neg_bound.clone(), c1.clone()));
            pieces.push((c2.clone(), c3.clone()));
            pieces.push((c4.clone(), bound.clone()));
            windows.push((c1, c2));
            windows.push((c3, c4));
        } else {
            pieces.push((neg_bound, bound));
        }

        for (lo, hi) in &windows {
            let mut x = lo.clone();
            while x <= *hi {
                if self.eval_int(&x) == 0 {
                    roots.push(x.clone());
                }
                x += 1u32;
            }
        }
        for (lo, hi) in pieces {
            if lo > hi {
                continue;
            }
            if let Some(r) = self.monotone_integer_root(lo, hi) {
                roots.push(r);
            }
        }
        roots.sort();
        roots.dedup();
        roots
    }

    fn monotone_integer_root(&self, mut lo: Integer, mut hi: Integer) -> Option<Integer> {
        let flo = self.eval_int(&lo);
        if flo == 0 {
            return Some(lo);
        }
        let fhi = self.eval_int(&hi);
        if fhi == 0 {
            return Some(hi);
        }
        let slo = flo.cmp0();
        if slo == fhi.cmp0() {
            return None;
        }
        while Integer::from(&hi - &lo) > 1 {
            let mid = Integer::from(&lo + &hi) >> 1u32;
            let fm = self.eval_int(&mid);
            if fm == 0 {
                return Some(mid);
            }
            if fm.cmp0() == slo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        None
    }

    /// Monic cubic whose roots are `n` times those of `self`: `n³·f(x/n)`.
    pub fn scale_root(&self, n: &Integer) -> Result<MonicCubic> {
        if *n == 0 {
            return Err(Error::Precondition("scale_root needs n ≠ 0".into()));
        }
        let n2 = Integer::from(n * n);
        Ok(MonicCubic {
            p2: Integer::from(&self.p2 * n),
            p1: Integer::from(&self.p1 * &n2),
            p0: Integer::from(&self.p0 * &n2) * n,
        })
    }

    /// `self + q2·x² + q1·x + q0`.
    pub fn add_quadratic(&self, q2: &Integer, q1: &Integer, q0: &Integer) -> MonicCubic {
        MonicCubic {
            p2: Integer::from(&self.p2 + q2),
            p1: Integer::from(&self.p1 + q1),
            p0: Integer::from(&self.p0 + q0),
        }
    }

    /// Coefficients `[x², x, 1]` of `self − other` (a polynomial of degree ≤ 2).
    pub fn difference(&self, other: &MonicCubic) -> [Integer; 3] {
        [
            Integer::from(&self.p2 - &other.p2),
            Integer::from(&self.p1 - &other.p1),
            Integer::from(&self.p0 - &other.p0),
        ]
    }

    /// Largest bit length among the coefficients.
    pub fn height_bits(&self) -> u32 {
        [&self.p2, &self.p1, &self.p0]
            .iter()
            .map(|p| p.significant_bits())
            .max()
            .unwrap()
    }
}

fn floor_div3(x: Integer) -> Integer {
    x.div_rem_floor(Integer::from(3)).0
}

fn ceil_div3(x: Integer) -> Integer {
    x.div_rem_ceil(Integer::from(3)).0
}

impl fmt::Display for MonicCubic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x^3")?;
        for (c, mono) in [(&self.p2, "x^2"), (&self.p1, "x"), (&self.p0, "")] {
            if *c == 0 {
                continue;
            }
            let sign = if *c < 0 { '-' } else { '+' };
            let abs = Integer::from(c.abs_ref());
            if abs == 1 && !mono.is_empty() {
                write!(f, " {sign} {mono}")?;
            } else {
                write!(f, " {sign} {abs}{mono}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: i64) -> Integer {
        Integer::from(v)
    }

    fn h() -> MonicCubic {
        MonicCubic::new(0, -3, -1)
    }

    #[test]
    fn eval_scaled_examples() {
        assert_eq!(h().eval_scaled(&int(0), &int(1)).unwrap(), -1);
        assert_eq!(h().eval_scaled(&int(-1), &int(1)).unwrap(), 1);
        let f = MonicCubic::new(24, -14, 1);
        assert_eq!(f.eval_scaled(&int(1), &int(2)).unwrap(), 1);
        assert!(matches!(
            f.eval_scaled(&int(1), &int(0)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn eval_scaled_matches_rational_evaluation() {
        let f = MonicCubic::new(24, -14, 1);
        let x = Rational::from((1, 2));
        assert_eq!(f.eval_rational(&x) * 8u32, Rational::from(1));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(h().norm_linear_form(&int(1), &int(0)).unwrap(), 1);
        assert_eq!(h().norm_linear_form(&int(1), &int(-1)).unwrap(), -1);
        let f = MonicCubic::new(6, -5, 1);
        assert_eq!(f.norm_linear_form(&int(3), &int(1)).unwrap(), -1);
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(h().discriminant(), 81);
        assert_eq!(MonicCubic::new(0, 0, 0).discriminant(), 0);
        assert_eq!(MonicCubic::simplest(&int(1)).discriminant(), 169);
        for t in -20..20 {
            let d = MonicCubic::simplest(&int(t)).discriminant();
            let expect = Integer::from(t * t + 3 * t + 9).square();
            assert_eq!(d, expect);
        }
    }

    #[test]
    fn total_reality() {
        assert!(h().is_totally_real());
        assert!(!MonicCubic::new(0, 1, 1).is_totally_real());
        assert_eq!(MonicCubic::new(0, 1, 1).discriminant(), -31);
        assert!(!MonicCubic::new(0, 0, 0).is_totally_real());
    }

    #[test]
    fn irreducibility() {
        assert!(!MonicCubic::new(-2, 0, 1).is_irreducible());
        assert!(h().is_irreducible());
        assert!(!MonicCubic::new(0, 5, 0).is_irreducible());
        // (x - 7)(x² + x + 1): one real root, not totally real
        let f = MonicCubic::new(-6, -6, -7);
        assert_eq!(f.integer_roots(), vec![int(7)]);
        // (x-1)(x-2)(x-3)
        let g = MonicCubic::new(-6, 11, -6);
        assert_eq!(g.integer_roots(), vec![int(1), int(2), int(3)]);
        // double root: (x-2)²(x+4)
        let d = MonicCubic::new(0, -12, 16);
        assert_eq!(d.integer_roots(), vec![int(-4), int(2)]);
    }

    #[test]
    fn integer_roots_with_huge_coefficients() {
        let r = Integer::from(Integer::u_pow_u(10, 30)) + 7u32;
        // (x - r)(x² + 1)
        let f = MonicCubic::new(-r.clone(), 1, -r.clone());
        assert_eq!(f.integer_roots(), vec![r]);
    }

    #[test]
    fn scale_root_examples() {
        let f = MonicCubic::new(5, -7, 11);
        assert_eq!(f.scale_root(&int(1)).unwrap(), f);
        assert_eq!(h().scale_root(&int(2)).unwrap(), MonicCubic::new(0, -12, -8));
        // x³ + t(4x−1)(2x−1) scaled by 2 is x³ + 8t(2x−1)(x−1)
        let t = int(5);
        let f = MonicCubic::new(int(8) * &t, int(-6) * &t, t.clone());
        let g = MonicCubic::new(int(16) * &t, int(-24) * &t, int(8) * &t);
        assert_eq!(f.scale_root(&int(2)).unwrap(), g);
        assert!(f.scale_root(&int(0)).is_err());
    }

    #[test]
    fn display_and_json() {
        let f = MonicCubic::new(24, -14, 1);
        assert_eq!(f.to_string(), "x^3 + 24x^2 - 14x + 1");
        assert_eq!(h().to_string(), "x^3 - 3x - 1");
        let js = serde_json::to_string(&f).unwrap();
        assert_eq!(js, r#"{"p2":"24","p1":"-14","p0":"1"}"#);
        let back: MonicCubic = serde_json::from_str(&js).unwrap();
        assert_eq!(back, f);
    }
}
