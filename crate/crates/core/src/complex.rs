//! Minimal arbitrary-precision complex numbers over MPFR floats.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::Float;

#[derive(Clone, Debug, PartialEq)]
pub struct HpComplex {
    pub re: Float,
    pub im: Float,
}

impl HpComplex {
    pub fn new(re: Float, im: Float) -> Self {
        HpComplex { re, im }
    }

    pub fn with_val(prec: u32, re: f64, im: f64) -> Self {
        HpComplex {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    /// `e^{2πi/3} = (−1 + √3 i)/2`.
    pub fn omega(prec: u32) -> Self {
        let s3 = Float::with_val(prec, 3).sqrt();
        HpComplex {
            re: Float::with_val(prec, -0.5),
            im: s3 / 2u32,
        }
    }

    /// `e^{iπ/3} = 1 + ω`.
    pub fn corner(prec: u32) -> Self {
        let s3 = Float::with_val(prec, 3).sqrt();
        HpComplex {
            re: Float::with_val(prec, 0.5),
            im: s3 / 2u32,
        }
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn conj(&self) -> Self {
        HpComplex {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        HpComplex {
            re: Float::with_val(self.prec(), &self.re / &n),
            im: -Float::with_val(self.prec(), &self.im / &n),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn dist(&self, o: &HpComplex) -> f64 {
        (self - o).abs().to_f64()
    }
}

impl Add for &HpComplex {
    type Output = HpComplex;
    fn add(self, o: &HpComplex) -> HpComplex {
        let p = self.prec().max(o.prec());
        HpComplex {
            re: Float::with_val(p, &self.re + &o.re),
            im: Float::with_val(p, &self.im + &o.im),
        }
    }
}

impl Sub for &HpComplex {
    type Output = HpComplex;
    fn sub(self, o: &HpComplex) -> HpComplex {
        let p = self.prec().max(o.prec());
        HpComplex {
            re: Float::with_val(p, &self.re - &o.re),
            im: Float::with_val(p, &self.im - &o.im),
        }
    }
}

impl Mul for &HpComplex {
    type Output = HpComplex;
    fn mul(self, o: &HpComplex) -> HpComplex {
        let p = self.prec().max(o.prec());
        let rr = Float::with_val(p, &self.re * &o.re);
        let ii = Float::with_val(p, &self.im * &o.im);
        let ri = Float::with_val(p, &self.re * &o.im);
        let ir = Float::with_val(p, &self.im * &o.re);
        HpComplex {
            re: rr - ii,
            im: ri + ir,
        }
    }
}

impl Div for &HpComplex {
    type Output = HpComplex;
    fn div(self, o: &HpComplex) -> HpComplex {
        self * &o.recip()
    }
}

impl Neg for &HpComplex {
    type Output = HpComplex;
    fn neg(self) -> HpComplex {
        HpComplex {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

impl fmt::Display for HpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.to_f64();
        if im < 0.0 {
            write!(f, "{re} - {}i", -im)
        } else {
            write!(f, "{re} + {im}i")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_is_a_cube_root_of_unity() {
        let w = HpComplex::omega(200);
        let w3 = &(&w * &w) * &w;
        assert!((w3.re.to_f64() - 1.0).abs() < 1e-50);
        assert!(w3.im.to_f64().abs() < 1e-50);
        let one = HpComplex::with_val(200, 1.0, 0.0);
        assert!((&one + &w).dist(&HpComplex::corner(200)) < 1e-50);
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = HpComplex::with_val(128, 0.3, -2.0);
        let b = HpComplex::with_val(128, -1.5, 0.25);
        let q = &(&a * &b) / &b;
        assert!(q.dist(&a) < 1e-30);
        assert!((a.abs().to_f64() - (0.09f64 + 4.0).sqrt()).abs() < 1e-15);
    }
}
