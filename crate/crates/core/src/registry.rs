//! Named family generators behind a common trait, so scans and the CLI can
//! pick a family by name and key=value parameters.

use std::collections::BTreeMap;
use std::fmt;

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::family::{
    build_one_unit, build_two_unit, extend_seed, is_admissible_one_unit, is_admissible_two_unit,
    recipe_pairs, OneUnitParams, RecipeKind,
    TwoUnitParams,
};
use crate::poly::MonicCubic;
use crate::serde_big::parse_integer;

/// One member of a family: the polynomial at parameter `t` and the
/// candidate units `aθ − b`, listed as `(a, b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyMember {
    pub t: Integer,
    pub poly: MonicCubic,
    pub units: Vec<(Integer, Integer)>,
}

pub trait Family: Send + Sync {
    fn name(&self) -> &'static str;
    fn member(&self, t: &Integer) -> Result<FamilyMember>;
    /// Human-readable summary with the resolved parameters.
    fn describe(&self) -> String;
}

impl fmt::Debug for dyn Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Raw family parameters as read from a config file or the command line.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FamilyParams(pub BTreeMap<String, String>);

impl FamilyParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    pub fn insert(&mut self, key: &str, value: &str) {
        self.0.insert(key.to_string(), value.to_string());
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn integer(&self, key: &str) -> Result<Integer> {
        let v = self
            .raw(key)
            .ok_or_else(|| Error::Config(format!("missing family parameter {key}")))?;
        parse_integer(v).map_err(|e| Error::Config(format!("{key}: {e}")))
    }

    pub fn integer_or(&self, key: &str, default: i64) -> Result<Integer> {
        match self.raw(key) {
            None => Ok(Integer::from(default)),
            Some(_) => self.integer(key),
        }
    }

    pub fn sign_or(&self, key: &str, default: i32) -> Result<i32> {
        match self.raw(key) {
            None => Ok(default),
            Some("1") | Some("+1") => Ok(1),
            Some("-1") => Ok(-1),
            Some(v) => Err(Error::Config(format!("{key} must be 1 or -1, got {v:?}"))),
        }
    }

    /// An exponent written as a decimal (`0.25`) or a fraction (`1/4`).
    pub fn exponent_or(&self, key: &str, default: Rational) -> Result<Rational> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => parse_rational(v).map_err(|e| Error::Config(format!("{key}: {e}"))),
        }
    }

    fn check_keys(&self, family: &str, allowed: &[&str]) -> Result<()> {
        for k in self.0.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Config(format!(
                    "family {family} takes no parameter {k:?} (accepted: {})",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }
}

/// Exact decimal or fraction, without locale or float parsing.
pub fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_integer(n.trim())?;
        let d = parse_integer(d.trim())?;
        if d == 0 {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rational::from((n, d)));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(format!("not a decimal number: {s:?}"));
    }
    let digits = format!("{int_part}{frac_part}");
    let num = parse_integer(if digits.is_empty() { "0" } else { &digits })?;
    let den = Integer::from(Integer::u_pow_u(10, frac_part.len() as u32));
    let q = Rational::from((num, den));
    Ok(if neg { -q } else { q })
}

/// `⌊t^α⌋` for `t ≥ 1` and rational `α ≥ 0`.
pub fn floor_power(t: &Integer, alpha: &Rational) -> Result<Integer> {
    if *t < 1 {
        return Err(Error::InvalidParams(format!("t^α needs t ≥ 1, got {t}")));
    }
    if alpha.cmp0().is_lt() {
        return Err(Error::InvalidParams(format!("exponent {alpha} is negative")));
    }
    let p = alpha
        .numer()
        .to_u32()
        .ok_or_else(|| Error::InvalidParams(format!("exponent numerator of {alpha} too large")))?;
    let q = alpha
        .denom()
        .to_u32()
        .ok_or_else(|| Error::InvalidParams(format!("exponent denominator of {alpha} too large")))?;
    Ok(t.clone().pow(p).root(q))
}

fn t_positive(t: &Integer, family: &str) -> Result<()> {
    if *t < 1 {
        return Err(Error::InvalidParams(format!("family {family} needs t ≥ 1, got {t}")));
    }
    Ok(())
}

/// `x³ − tx² − (t + 3)x − 1` with units `θ`, `θ + 1`.
struct Simplest;

impl Family for Simplest {
    fn name(&self) -> &'static str {
        "simplest"
    }
    fn member(&self, t: &Integer) -> Result<FamilyMember> {
        Ok(FamilyMember {
            t: t.clone(),
            poly: MonicCubic::simplest(t),
            units: vec![(Integer::from(1), Integer::new()), (Integer::from(1), Integer::from(-1))],
        })
    }
    fn describe(&self) -> String {
        "simplest: x^3 - t x^2 - (t+3) x - 1".into()
    }
}

/// Fixed `(a, b, ε₁, ε₂)` with units `θ` and `aθ − b`.
struct OneUnit {
    p: OneUnitParams,
}

impl Family for OneUnit {
    fn name(&self) -> &'static str {
        "one-unit"
    }
    fn member(&self, t: &Integer) -> Result<FamilyMember> {
        Ok(FamilyMember {
            t: t.clone(),
            poly: build_one_unit(&self.p, t)?,
            units: vec![(Integer::from(1), Integer::new()), (self.p.a.clone(), self.p.b.clone())],
        })
    }
    fn describe(&self) -> String {
        let p = &self.p;
        format!("one-unit: a={} b={} eps1={} eps2={}", p.a, p.b, p.eps1, p.eps2)
    }
}

/// Fixed `(a, b, c, d, ε₁, ε₂)` with units `aθ − b`, `cθ − d`.
struct TwoUnit {
    p: TwoUnitParams,
}

impl Family for TwoUnit {
    fn name(&self) -> &'static str {
        "two-unit"
    }
    fn member(&self, t: &Integer) -> Result<FamilyMember> {
        let p = &self.p;
        Ok(FamilyMember {
            t: t.clone(),
            poly: build_two_unit(p, t)?,
            units: vec![(p.a.clone(), p.b.clone()), (p.c.clone(), p.d.clone())],
        })
    }
    fn describe(&self) -> String {
        let p = &self.p;
        format!(
            "two-unit: a={} b={} c={} d={} eps1={} eps2={}",
            p.a, p.b, p.c, p.d, p.eps1, p.eps2
        )
    }
}

/// `h + t(ax − b)(cx − d)` for a fixed seed `h`.
struct Seed {
    h: MonicCubic,
    a: Integer,
    b: Integer,
    c: Integer,
    d: Integer,
}

impl Family for Seed {
    fn name(&self) -> &'static str {
        "seed"
    }
    fn member(&self, t: &Integer) -> Result<FamilyMember> {
        Ok(FamilyMember {
            t: t.clone(),
            poly: extend_seed(&self.h, &self.a, &self.b, &self.c, &self.d, t)?,
            units: vec![(self.a.clone(), self.b.clone()), (self.c.clone(), self.d.clone())],
        })
    }
    fn describe(&self) -> String {
        format!(
            "seed: h={} a={} b={} c={} d={}",
            self.h, self.a, self.b, self.c, self.d
        )
    }
}

/// `x³ + t(2ⁿx − 1)(2ⁿ⁻¹x − 1)`, whose roots are `2θ` for the next `n` down.
struct Dyadic {
    n: u32,
    inner: Seed,
}

impl Family for Dyadic {
    fn name(&self) -> &'static str {
        "dyadic"
    }
    fn member(&self, t: &Integer) -> Result<FamilyMember> {
        self.inner.member(t)
    }
    fn describe(&self) -> String {
        format!("dyadic: x^3 + t(2^{n} x - 1)(2^{m} x - 1)", n = self.n, m = self.n - 1)
    }
}

/// One-unit family with `(aₜ, bₜ)` from a recipe at `⌊t^β⌋`.
struct Mcr {
    name: &'static str,
    kind: RecipeKind,
    beta: Rational,
    eps1: i32,
    eps2: i32,
}

impl Family for Mcr {
    fn name(&self) -> &'static str {
        self.name
    }
    fn member(&self, t: &Integer) -> Result<FamilyMember> {
        t_positive(t, self.name)?;
        let (a, b) = recipe_pairs(self.kind, &floor_power(t, &self.beta)?)?;
        let p = OneUnitParams::new(a.clone(), b.clone(), self.eps1, self.eps2)?;
        Ok(FamilyMember {
            t: t.clone(),
            poly: build_one_unit(&p, t)?,
            units: vec![(Integer::from(1), Integer::new()), (a, b)],
        })
    }
    fn describe(&self) -> String {
        format!(
            "{}: recipe={} beta={} eps1={} eps2={}",
            self.name, self.kind, self.beta, self.eps1, self.eps2
        )
    }
}

/// `(b² + b + 1, b, b + 1, 1)` with `b = ⌊t^β⌋`.
struct TwoUnitRecipe {
    beta: Rational,
    eps1: i32,
    eps2: i32,
}

impl Family for TwoUnitRecipe {
    fn name(&self) -> &'static str {
        "two-unit-recipe"
    }
    fn member(&self, t: &Integer) -> Result<FamilyMember> {
        t_positive(t, "two-unit-recipe")?;
        let b = floor_power(t, &self.beta)?;
        let a = Integer::from(b.square_ref()) + &b + 1u32;
        let c = Integer::from(&b + 1u32);
        let p = TwoUnitParams::new(a.clone(), b.clone(), c.clone(), 1, self.eps1, self.eps2)?;
        Ok(FamilyMember {
            t: t.clone(),
            poly: build_two_unit(&p, t)?,
            units: vec![(a, b), (c, Integer::from(1))],
        })
    }
    fn describe(&self) -> String {
        format!(
            "two-unit-recipe: beta={} eps1={} eps2={}",
            self.beta, self.eps1, self.eps2
        )
    }
}

type Factory = fn(&FamilyParams) -> Result<Box<dyn Family>>;

struct Entry {
    factory: Factory,
    keys: &'static [&'static str],
    help: &'static str,
}

/// Family factories keyed by name.
pub struct FamilyRegistry {
    entries: BTreeMap<&'static str, Entry>,
}

impl Default for FamilyRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl FamilyRegistry {
    pub fn empty() -> Self {
        FamilyRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("simplest", &[], "x^3 - t x^2 - (t+3) x - 1", |_| Ok(Box::new(Simplest)));
        r.register(
            "one-unit",
            &["a", "b", "eps1", "eps2"],
            "fixed (a, b); units theta and a theta - b",
            |p| {
                let params = OneUnitParams::new(
                    p.integer("a")?,
                    p.integer("b")?,
                    p.sign_or("eps1", 1)?,
                    p.sign_or("eps2", 1)?,
                )?;
                if !is_admissible_one_unit(&params)? {
                    return Err(Error::Config(format!(
                        "one-unit parameters (a, b) = ({}, {}) fail the unit congruences",
                        params.a, params.b
                    )));
                }
                Ok(Box::new(OneUnit { p: params }))
            },
        );
        r.register(
            "two-unit",
            &["a", "b", "c", "d", "eps1", "eps2"],
            "fixed (a, b, c, d) with ad - bc = +-1",
            |p| {
                let params = TwoUnitParams::new(
                    p.integer("a")?,
                    p.integer("b")?,
                    p.integer("c")?,
                    p.integer("d")?,
                    p.sign_or("eps1", 1)?,
                    p.sign_or("eps2", 1)?,
                )?;
                if !is_admissible_two_unit(&params)? {
                    return Err(Error::Config(format!(
                        "two-unit parameters (a, b, c, d) = ({}, {}, {}, {}) fail the unit congruences",
                        params.a, params.b, params.c, params.d
                    )));
                }
                Ok(Box::new(TwoUnit { p: params }))
            },
        );
        r.register(
            "seed",
            &["h2", "h1", "h0", "a", "b", "c", "d"],
            "h + t (a x - b)(c x - d) for h = x^3 + h2 x^2 + h1 x + h0",
            |p| {
                Ok(Box::new(Seed {
                    h: MonicCubic::new(p.integer_or("h2", 0)?, p.integer_or("h1", 0)?, p.integer_or("h0", 0)?),
                    a: p.integer("a")?,
                    b: p.integer("b")?,
                    c: p.integer("c")?,
                    d: p.integer("d")?,
                }))
            },
        );
        r.register(
            "dyadic",
            &["n"],
            "x^3 + t (2^n x - 1)(2^(n-1) x - 1), n >= 1",
            |p| {
                let n = p
                    .integer("n")?
                    .to_u32()
                    .filter(|n| (1..=4096).contains(n))
                    .ok_or_else(|| Error::Config("dyadic needs 1 ≤ n ≤ 4096".into()))?;
                let one = Integer::from(1);
                Ok(Box::new(Dyadic {
                    n,
                    inner: Seed {
                        h: MonicCubic::new(0, 0, 0),
                        a: Integer::from(1) << n,
                        b: one.clone(),
                        c: Integer::from(1) << (n - 1),
                        d: one,
                    },
                }))
            },
        );
        r.register(
            "cusick",
            &["alpha", "eps1", "eps2"],
            "one-unit with a = 1, b = floor(t^alpha)",
            |p| {
                Ok(Box::new(Mcr {
                    name: "cusick",
                    kind: RecipeKind::OneB,
                    beta: p.exponent_or("alpha", Rational::from((1, 2)))?,
                    eps1: p.sign_or("eps1", 1)?,
                    eps2: p.sign_or("eps2", 1)?,
                }))
            },
        );
        r.register(
            "mcr",
            &["recipe", "beta", "eps1", "eps2"],
            "one-unit with (a, b) = recipe(floor(t^beta))",
            |p| {
                let kind = match p.raw("recipe") {
                    Some(k) => k.parse::<RecipeKind>().map_err(|e| Error::Config(e.to_string()))?,
                    None => RecipeKind::B2b1,
                };
                Ok(Box::new(Mcr {
                    name: "mcr",
                    kind,
                    beta: p.exponent_or("beta", Rational::from(1))?,
                    eps1: p.sign_or("eps1", 1)?,
                    eps2: p.sign_or("eps2", 1)?,
                }))
            },
        );
        r.register(
            "two-unit-recipe",
            &["beta", "eps1", "eps2"],
            "two-unit with (b^2+b+1, b, b+1, 1), b = floor(t^beta)",
            |p| {
                Ok(Box::new(TwoUnitRecipe {
                    beta: p.exponent_or("beta", Rational::from(1))?,
                    eps1: p.sign_or("eps1", 1)?,
                    eps2: p.sign_or("eps2", 1)?,
                }))
            },
        );
        r
    }

    /// Adds or replaces a factory.
    pub fn register(&mut self, name: &'static str, keys: &'static [&'static str], help: &'static str, factory: Factory) {
        self.entries.insert(name, Entry { factory, keys, help });
    }

    pub fn create(&self, name: &str, params: &FamilyParams) -> Result<Box<dyn Family>> {
        let e = self.entries.get(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown family {name:?} (known: {})",
                self.names().join(", ")
            ))
        })?;
        params.check_keys(name, e.keys)?;
        (e.factory)(params).map_err(|err| match err {
            Error::Config(_) => err,
            other => Error::Config(format!("family {name}: {other}")),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    /// `(name, accepted keys, summary)` for every family.
    pub fn help(&self) -> Vec<(&'static str, &'static [&'static str], &'static str)> {
        self.entries.iter().map(|(n, e)| (*n, e.keys, e.help)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: i64) -> Integer {
        Integer::from(v)
    }

    fn reg() -> FamilyRegistry {
        FamilyRegistry::with_builtins()
    }

    #[test]
    fn builtins_are_listed() {
        assert_eq!(
            reg().names(),
            vec!["cusick", "dyadic", "mcr", "one-unit", "seed", "simplest", "two-unit", "two-unit-recipe"]
        );
    }

    #[test]
    fn every_member_has_its_units() {
        let cases = [
            ("simplest", FamilyParams::new()),
            ("one-unit", FamilyParams::new().with("a", 1).with("b", 1)),
            ("two-unit", FamilyParams::new().with("a", 3).with("b", 1).with("c", 2).with("d", 1)),
            ("seed", FamilyParams::new().with("a", 2).with("b", 1).with("c", 1).with("d", 1)),
            ("dyadic", FamilyParams::new().with("n", 3)),
            ("cusick", FamilyParams::new().with("alpha", "0.5")),
            ("mcr", FamilyParams::new().with("recipe", "square_cube").with("beta", "1/3")),
            ("two-unit-recipe", FamilyParams::new().with("beta", "1/2")),
        ];
        for (name, params) in cases {
            let fam = reg().create(name, &params).unwrap();
            assert_eq!(fam.name(), name);
            for t in [5i64, 40, 1000] {
                let m = fam.member(&int(t)).unwrap();
                for (a, b) in &m.units {
                    let n = m.poly.norm_linear_form(a, b).unwrap();
                    assert!(n == 1 || n == -1, "{name} t={t}: N({a}θ − {b}) = {n}");
                }
            }
        }
    }

    #[test]
    fn dyadic_scaling() {
        // the n = 2 member scaled by 2 is 8 times the n = 1 member at 8t
        let f2 = reg().create("dyadic", &FamilyParams::new().with("n", 2)).unwrap();
        let f1 = reg().create("dyadic", &FamilyParams::new().with("n", 1)).unwrap();
        let t = int(7);
        let scaled = f2.member(&t).unwrap().poly.scale_root(&int(2)).unwrap();
        assert_eq!(scaled, MonicCubic::new(16 * 7, -24 * 7, 8 * 7));
        assert_eq!(scaled, f1.member(&int(8 * 7)).unwrap().poly);
    }

    #[test]
    fn simplest_matches_constructor() {
        let m = reg().create("simplest", &FamilyParams::new()).unwrap().member(&int(4)).unwrap();
        assert_eq!(m.poly, MonicCubic::new(-4, -7, -1));
    }

    #[test]
    fn config_errors() {
        let r = reg();
        assert!(matches!(r.create("nope", &FamilyParams::new()), Err(Error::Config(_))));
        assert!(matches!(
            r.create("simplest", &FamilyParams::new().with("a", 1)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            r.create("one-unit", &FamilyParams::new().with("a", 2).with("b", 3)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            r.create("one-unit", &FamilyParams::new().with("a", 1).with("b", 1).with("eps1", 2)),
            Err(Error::Config(_))
        ));
        assert!(r.create("cusick", &FamilyParams::new().with("alpha", "1,5")).is_err());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("0.25").unwrap(), Rational::from((1, 4)));
        assert_eq!(parse_rational("-3/6").unwrap(), Rational::from((-1, 2)));
        assert_eq!(parse_rational("2").unwrap(), Rational::from(2));
        assert_eq!(parse_rational(".5").unwrap(), Rational::from((1, 2)));
        for bad in ["", ".", "1e3", "0,5", "1/0", "abc"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn floor_powers() {
        let t = Integer::from(Integer::u_pow_u(10, 12));
        assert_eq!(floor_power(&t, &Rational::from((1, 2))).unwrap(), 1_000_000);
        assert_eq!(floor_power(&t, &Rational::from((1, 5))).unwrap(), 251);
        assert_eq!(floor_power(&int(10), &Rational::from((1, 2))).unwrap(), 3);
        assert_eq!(floor_power(&int(10), &Rational::from(0)).unwrap(), 1);
        assert!(floor_power(&int(0), &Rational::from(1)).is_err());
    }
}
