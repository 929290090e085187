//! Admissible parameters and closed-form constructions of the unit families.
//!
//! A one-unit family makes `θ` and `aθ − b` units; a two-unit family makes
//! `aθ − b` and `cθ − d` units. Every constructor re-checks its defining
//! identities exactly before returning.

use std::fmt;
use std::str::FromStr;

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::MonicCubic;
use crate::serde_big::int_str;

/// `x ≡ target (mod m)`, with modulus 0 read as equality.
fn congruent(x: &Integer, target: i32, m: &Integer) -> bool {
    let diff = Integer::from(x - target);
    if *m == 0 {
        diff == 0
    } else {
        diff.is_divisible(m)
    }
}

fn cube(x: &Integer) -> Integer {
    Integer::from(x * x) * x
}

/// `a³ ≡ 1 (mod b)` and `b³ ≡ 1 (mod a)`.
pub fn is_mutually_cubic_pair(a: &Integer, b: &Integer) -> bool {
    congruent(&cube(a), 1, b) && congruent(&cube(b), 1, a)
}

fn check_sign(name: &str, e: i32) -> Result<()> {
    if e == 1 || e == -1 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} must be ±1, got {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneUnitParams {
    pub a: Integer,
    pub b: Integer,
    pub eps1: i32,
    pub eps2: i32,
}

impl OneUnitParams {
    pub fn new(a: impl Into<Integer>, b: impl Into<Integer>, eps1: i32, eps2: i32) -> Result<Self> {
        let p = OneUnitParams {
            a: a.into(),
            b: b.into(),
            eps1,
            eps2,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.a == 0 || self.b == 0 {
            return Err(Error::InvalidParams("a and b must be nonzero".into()));
        }
        if Integer::from(self.a.gcd_ref(&self.b)) != 1 {
            return Err(Error::InvalidParams(format!(
                "gcd({}, {}) ≠ 1",
                self.a, self.b
            )));
        }
        check_sign("eps1", self.eps1)?;
        check_sign("eps2", self.eps2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoUnitParams {
    pub a: Integer,
    pub b: Integer,
    pub c: Integer,
    pub d: Integer,
    pub eps1: i32,
    pub eps2: i32,
}

impl TwoUnitParams {
    pub fn new(
        a: impl Into<Integer>,
        b: impl Into<Integer>,
        c: impl Into<Integer>,
        d: impl Into<Integer>,
        eps1: i32,
        eps2: i32,
    ) -> Result<Self> {
        let p = TwoUnitParams {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
            eps1,
            eps2,
        };
        p.validate()?;
        Ok(p)
    }

    /// `ad − bc`.
    pub fn det(&self) -> Integer {
        Integer::from(&self.a * &self.d) - Integer::from(&self.b * &self.c)
    }

    /// `ε = ad − bc`, once validated.
    pub fn eps(&self) -> i32 {
        self.det().to_i32().unwrap_or(0)
    }

    fn validate(&self) -> Result<()> {
        if self.a == 0 || self.b == 0 || self.c == 0 || self.d == 0 {
            return Err(Error::InvalidParams("a, b, c, d must be nonzero".into()));
        }
        let det = self.det();
        if det != 1 && det != -1 {
            return Err(Error::InvalidParams(format!("ad − bc = {det}, expected ±1")));
        }
        check_sign("eps1", self.eps1)?;
        check_sign("eps2", self.eps2)
    }
}

/// `a³ ≡ ε₁ε₂ (mod b)` and `b³ ≡ ε₁ (mod a)`.
pub fn is_admissible_one_unit(p: &OneUnitParams) -> Result<bool> {
    p.validate()?;
    Ok(congruent(&cube(&p.a), p.eps1 * p.eps2, &p.b) && congruent(&cube(&p.b), p.eps1, &p.a))
}

/// `b³ ≡ ε₁ (mod a)` and `d³ ≡ ε₂ (mod c)`.
pub fn is_admissible_two_unit(p: &TwoUnitParams) -> Result<bool> {
    p.validate()?;
    Ok(congruent(&cube(&p.b), p.eps1, &p.a) && congruent(&cube(&p.d), p.eps2, &p.c))
}

fn exact_div(num: Integer, den: &Integer, what: &str) -> Result<Integer> {
    if !num.is_divisible(den) {
        return Err(Error::InternalInconsistency(format!(
            "{what}: {num} not divisible by {den}"
        )));
    }
    Ok(num.div_exact(den))
}

/// The polynomial with `a³f(b/a) = ε₁` and `f(0) = ε₂`:
///
/// `x³ + ((ε₁(a³ − ε₁ε₂)² − b³)/(ab²) + ta)·x² − (ε₁a(a³ − ε₁ε₂)/b + tb)·x + ε₂`.
pub fn build_one_unit(p: &OneUnitParams, t: &Integer) -> Result<MonicCubic> {
    if !is_admissible_one_unit(p)? {
        return Err(Error::InvalidParams(format!(
            "(a, b, ε₁, ε₂) = ({}, {}, {}, {}) fails the unit congruences",
            p.a, p.b, p.eps1, p.eps2
        )));
    }
    let (a, b) = (&p.a, &p.b);
    let k = cube(a) - p.eps1 * p.eps2;
    let num2 = Integer::from(&k * &k) * p.eps1 - cube(b);
    let den2 = Integer::from(b * b) * a;
    let p2 = exact_div(num2, &den2, "x² coefficient")? + Integer::from(t * a);
    let num1 = -(Integer::from(a * &k) * p.eps1);
    let p1 = exact_div(num1, b, "x coefficient")? - Integer::from(t * b);
    let f = MonicCubic::new(p2, p1, p.eps2);

    if f.eval_scaled(b, a)? != p.eps1 || f.p0 != p.eps2 {
        return Err(Error::InternalInconsistency(format!(
            "one-unit construction {f} fails its unit identities"
        )));
    }
    Ok(f)
}

/// The polynomial with `a³f(b/a) = ε₁` and `c³f(d/c) = ε₂`.
///
/// `R = εε₁d³ − εε₂b³ + tbd` with `ε = ad − bc`; `(P, Q)` solve
/// `Pb + Qa = (ε₁ − b³ − Ra³)/(ab)`, `Pd + Qc = (ε₂ − d³ − Rc³)/(cd)`.
pub fn build_two_unit(p: &TwoUnitParams, t: &Integer) -> Result<MonicCubic> {
    if !is_admissible_two_unit(p)? {
        return Err(Error::InvalidParams(format!(
            "(a, b, c, d, ε₁, ε₂) = ({}, {}, {}, {}, {}, {}) fails the unit congruences",
            p.a, p.b, p.c, p.d, p.eps1, p.eps2
        )));
    }
    let (a, b, c, d) = (&p.a, &p.b, &p.c, &p.d);
    let eps = p.eps();
    let r = cube(d) * (eps * p.eps1) - cube(b) * (eps * p.eps2) + Integer::from(t * b) * d;

    let u = Rational::from((
        Integer::from(p.eps1) - cube(b) - Integer::from(&r * &cube(a)),
        Integer::from(a * b),
    ));
    let v = Rational::from((
        Integer::from(p.eps2) - cube(d) - Integer::from(&r * &cube(c)),
        Integer::from(c * d),
    ));
    let det = Integer::from(b * c) - Integer::from(a * d);
    let pp = (Rational::from(&u * c) - Rational::from(&v * a)) / &det;
    let qq = (Rational::from(&v * b) - Rational::from(&u * d)) / &det;
    if *pp.denom() != 1 || *qq.denom() != 1 {
        return Err(Error::InternalInconsistency(format!(
            "two-unit system has non-integral solution P = {pp}, Q = {qq}"
        )));
    }
    let f = MonicCubic::new(pp.into_numer_denom().0, qq.into_numer_denom().0, r);

    if f.eval_scaled(b, a)? != p.eps1 || f.eval_scaled(d, c)? != p.eps2 {
        return Err(Error::InternalInconsistency(format!(
            "two-unit construction {f} fails its unit identities"
        )));
    }
    Ok(f)
}

/// `h + t·(ax − b)(cx − d)`.
pub fn extend_seed(
    h: &MonicCubic,
    a: &Integer,
    b: &Integer,
    c: &Integer,
    d: &Integer,
    t: &Integer,
) -> Result<MonicCubic> {
    if Integer::from(a.gcd_ref(b)) != 1 || Integer::from(c.gcd_ref(d)) != 1 {
        return Err(Error::InvalidParams("seed needs gcd(a,b) = gcd(c,d) = 1".into()));
    }
    let det = Integer::from(a * d) - Integer::from(b * c);
    if det == 0 {
        return Err(Error::InvalidParams("seed needs ad − bc ≠ 0".into()));
    }
    let q2 = Integer::from(a * c) * t;
    let q1 = -((Integer::from(a * d) + Integer::from(b * c)) * t);
    let q0 = Integer::from(b * d) * t;
    Ok(h.add_quadratic(&q2, &q1, &q0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecipeKind {
    OneB,
    B2b1,
    OneMinusB,
    SquareCube,
}

impl RecipeKind {
    pub const ALL: [RecipeKind; 4] = [
        RecipeKind::OneB,
        RecipeKind::B2b1,
        RecipeKind::OneMinusB,
        RecipeKind::SquareCube,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RecipeKind::OneB => "one_b",
            RecipeKind::B2b1 => "b2b1",
            RecipeKind::OneMinusB => "one_minus_b",
            RecipeKind::SquareCube => "square_cube",
        }
    }
}

impl fmt::Display for RecipeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RecipeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RecipeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown recipe {s:?}")))
    }
}

/// Mutually cubic root pairs `(a, b)` from the standard recipes.
pub fn recipe_pairs(kind: RecipeKind, param: &Integer) -> Result<(Integer, Integer)> {
    let bad = |why: &str| Err(Error::InvalidParams(format!("{kind} with {param}: {why}")));
    let (a, b) = match kind {
        RecipeKind::OneB => {
            if *param == 0 {
                return bad("b must be nonzero");
            }
            (Integer::from(1), param.clone())
        }
        RecipeKind::B2b1 => {
            if *param == 0 {
                return bad("b must be nonzero");
            }
            let a = Integer::from(param * param) + param + 1u32;
            (a, param.clone())
        }
        RecipeKind::OneMinusB => {
            if *param == 0 || *param == 1 {
                return bad("b must avoid 0 and 1");
            }
            (Integer::from(1 - param), param.clone())
        }
        RecipeKind::SquareCube => {
            if *param == 0 || *param == -1 {
                return bad("r must avoid 0 and −1");
            }
            (Integer::from(param * param), cube(param) + 1u32)
        }
    };
    if !is_mutually_cubic_pair(&a, &b) {
        return Err(Error::InternalInconsistency(format!(
            "recipe {kind} produced ({a}, {b}), not mutually cubic"
        )));
    }
    Ok((a, b))
}

/// Serializable description of one family member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyDescriptor {
    OneUnit {
        #[serde(with = "int_str")]
        a: Integer,
        #[serde(with = "int_str")]
        b: Integer,
        eps1: i32,
        eps2: i32,
        #[serde(with = "int_str")]
        t: Integer,
    },
    TwoUnit {
        #[serde(with = "int_str")]
        a: Integer,
        #[serde(with = "int_str")]
        b: Integer,
        #[serde(with = "int_str")]
        c: Integer,
        #[serde(with = "int_str")]
        d: Integer,
        eps1: i32,
        eps2: i32,
        #[serde(with = "int_str")]
        t: Integer,
    },
    Seed {
        h: MonicCubic,
        #[serde(with = "int_str")]
        a: Integer,
        #[serde(with = "int_str")]
        b: Integer,
        #[serde(with = "int_str")]
        c: Integer,
        #[serde(with = "int_str")]
        d: Integer,
        #[serde(with = "int_str")]
        t: Integer,
    },
}

impl FamilyDescriptor {
    pub fn build(&self) -> Result<MonicCubic> {
        match self {
            FamilyDescriptor::OneUnit { a, b, eps1, eps2, t } => {
                build_one_unit(&OneUnitParams::new(a.clone(), b.clone(), *eps1, *eps2)?, t)
            }
            FamilyDescriptor::TwoUnit {
                a,
                b,
                c,
                d,
                eps1,
                eps2,
                t,
            } => build_two_unit(
                &TwoUnitParams::new(a.clone(), b.clone(), c.clone(), d.clone(), *eps1, *eps2)?,
                t,
            ),
            FamilyDescriptor::Seed { h, a, b, c, d, t } => extend_seed(h, a, b, c, d, t),
        }
    }

    /// Unit candidates `(a, b)` standing for `aθ − b`.
    pub fn units(&self) -> Vec<(Integer, Integer)> {
        match self {
            FamilyDescriptor::OneUnit { a, b, .. } => {
                vec![(Integer::from(1), Integer::new()), (a.clone(), b.clone())]
            }
            FamilyDescriptor::TwoUnit { a, b, c, d, .. } | FamilyDescriptor::Seed { a, b, c, d, .. } => {
                vec![(a.clone(), b.clone()), (c.clone(), d.clone())]
            }
        }
    }
}
