//! Certified isolation and refinement of the three real roots of a cubic.
//!
//! Brackets have exact rational (dyadic) endpoints and are certified by the
//! sign of the homogenised cubic at each endpoint. Floats are only used to
//! propose new endpoints; nothing they say is trusted without an exact sign
//! check.

use std::cmp::Ordering;

use rug::float::Round;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{build_one_unit, build_two_unit, OneUnitParams, TwoUnitParams};
use crate::poly::MonicCubic;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionPolicy {
    pub target_bits: u32,
    pub max_bits: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            target_bits: 192,
            max_bits: 4096,
        }
    }
}

impl PrecisionPolicy {
    pub fn new(target_bits: u32, max_bits: u32) -> Result<Self> {
        if target_bits < 16 || target_bits > max_bits {
            return Err(Error::InvalidParams(format!(
                "precision policy needs 16 ≤ target ({target_bits}) ≤ max ({max_bits})"
            )));
        }
        Ok(PrecisionPolicy {
            target_bits,
            max_bits,
        })
    }

    /// Next rung of the escalation ladder.
    pub fn escalate(&self, context: &str) -> Result<Self> {
        let next = self.target_bits.saturating_mul(2);
        if next > self.max_bits {
            return Err(Error::PrecisionExhausted {
                max_bits: self.max_bits,
                context: context.to_string(),
            });
        }
        Ok(PrecisionPolicy {
            target_bits: next,
            max_bits: self.max_bits,
        })
    }

    /// Same ladder at twice the precision, used for re-audits.
    pub fn doubled(&self) -> Self {
        PrecisionPolicy {
            target_bits: self.target_bits.saturating_mul(2),
            max_bits: self.max_bits.saturating_mul(2),
        }
    }
}

/// A root bracketed by `[lo, hi]`, with `f(lo)` and `f(hi)` of opposite sign
/// (or `lo = hi` an exact rational root).
#[derive(Clone, Debug)]
pub struct IsolatedRoot {
    pub lo: Rational,
    pub hi: Rational,
    /// Midpoint of the bracket.
    pub value: Float,
    /// `|root − value| ≤ err`.
    pub err: Float,
}

fn sign_at(f: &MonicCubic, x: &Rational) -> Ordering {
    f.homogeneous(x.numer(), x.denom()).cmp0()
}

/// Bits needed for the integer part of `max(|lo|, |hi|)`.
fn magnitude_bits(lo: &Rational, hi: &Rational) -> u32 {
    let m = |q: &Rational| {
        let (n, d) = (q.numer(), q.denom());
        (n.significant_bits() + 1).saturating_sub(d.significant_bits())
    };
    m(lo).max(m(hi))
}

impl IsolatedRoot {
    fn from_bracket(lo: Rational, hi: Rational) -> Self {
        let width = Rational::from(&hi - &lo);
        let mag = magnitude_bits(&lo, &hi);
        let width_bits = if width == 0 {
            64
        } else {
            let (n, d) = (width.numer(), width.denom());
            d.significant_bits().saturating_sub(n.significant_bits()) + 2
        };
        let prec = (width_bits + mag + 16).max(64);
        let mid = Rational::from(&lo + &hi) / 2u32;
        let value = Float::with_val(prec, &mid);
        let mut err = Float::with_val_round(64, &width, Round::Up).0 / 2u32;
        if width != 0 {
            // rounding of the midpoint to `prec` bits
            let ulp = Float::with_val(64, 1) << (value.get_exp().unwrap_or(0) - prec as i32);
            err += ulp;
        }
        IsolatedRoot { lo, hi, value, err }
    }

    fn exact(q: Rational) -> Self {
        let mag = magnitude_bits(&q, &q);
        let value = Float::with_val(mag + 128, &q);
        let err = if value == q {
            Float::new(64)
        } else {
            Float::with_val(64, 1) << (value.get_exp().unwrap_or(0) - (mag as i32 + 128))
        };
        IsolatedRoot {
            lo: q.clone(),
            hi: q,
            value,
            err,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Rational {
        Rational::from(&self.hi - &self.lo)
    }

    /// `⌈log₂ err⌉`, or `None` when the root is known exactly.
    pub fn err_log2(&self) -> Option<i64> {
        if self.err == 0 {
            return None;
        }
        let e = self.err.get_exp().unwrap() as i64;
        // err < 2^e; tighten when err is an exact power of two
        let pow = Float::with_val(64, 1) << (e as i32 - 1);
        Some(if self.err == pow { e - 1 } else { e })
    }

    pub fn err_f64(&self) -> f64 {
        self.err.to_f64_round(Round::Up)
    }

    /// Whether `x` lies in the closed bracket.
    pub fn contains(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn to_json(&self) -> RootJson {
        let digits = (self.value.prec() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
        RootJson {
            value: self.value.to_string_radix(10, Some(digits)),
            err: match self.err_log2() {
                Some(e) => format!("2^{e}"),
                None => "0".to_string(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RootJson {
    pub value: String,
    pub err: String,
}

fn dyadic(m: Integer, k: u32) -> Rational {
    Rational::from(m) >> k
}

fn round_to_dyadic(x: &Float, k: u32) -> Rational {
    let scaled = Float::with_val(x.prec(), x << k);
    dyadic(scaled.to_integer().unwrap_or_default(), k)
}

const ISOLATION_CAP_BITS: u32 = 1 << 20;

/// Three disjoint brackets in ascending order, one per real root.
///
/// With `x₋ < x₊` the critical points, a dyadic `q₋` with `f(q₋) > 0` and
/// `q₊ > q₋` with `f(q₊) < 0` split the line into `(−B, q₋)`, `(q₋, q₊)`,
/// `(q₊, B)` where `B` is the Cauchy bound.
pub fn isolate_real_roots(f: &MonicCubic) -> Result<[IsolatedRoot; 3]> {
    if !f.is_totally_real() {
        return Err(Error::Domain(format!(
            "{f} does not have three distinct real roots"
        )));
    }
    let bound = Integer::from(1)
        + [&f.p2, &f.p1, &f.p0]
            .iter()
            .map(|p| Integer::from(p.abs_ref()))
            .max()
            .unwrap();
    let crit = Integer::from(&f.p2 * &f.p2) - Integer::from(&f.p1 * 3u32);
    let hb = f.height_bits();

    let mut k = 8u32;
    let (qm, qp) = loop {
        let prec = k + 2 * hb + 64;
        let s = Float::with_val(prec, &crit).sqrt();
        let minus_p2 = -Float::with_val(prec, &f.p2);
        let xm = Float::with_val(prec, &minus_p2 - &s) / 3u32;
        let xp = Float::with_val(prec, &minus_p2 + &s) / 3u32;
        let qm = round_to_dyadic(&xm, k);
        let qp = round_to_dyadic(&xp, k);
        if qm < qp && sign_at(f, &qm) == Ordering::Greater && sign_at(f, &qp) == Ordering::Less {
            break (qm, qp);
        }
        k *= 2;
        if k > ISOLATION_CAP_BITS {
            return Err(Error::PrecisionExhausted {
                max_bits: ISOLATION_CAP_BITS,
                context: format!("separating the critical points of {f}"),
            });
        }
    };
    let lo = Rational::from(-bound.clone());
    let hi = Rational::from(bound);
    Ok([
        IsolatedRoot::from_bracket(lo, qm.clone()),
        IsolatedRoot::from_bracket(qm, qp.clone()),
        IsolatedRoot::from_bracket(qp, hi),
    ])
}

enum Step {
    Bracket(Rational, Rational),
    Exact(Rational),
}

/// Float Newton from the bracket midpoint, then an exact sign check on a
/// tiny dyadic bracket around the result.
fn newton_attempt(f: &MonicCubic, lo: &Rational, hi: &Rational, prec: u32, target: u32) -> Option<Step> {
    let mid = Rational::from(lo + hi) / 2u32;
    let mut x = Float::with_val(prec, &mid);
    let tol = Float::with_val(64, 1) >> (target + 8);
    let max_iter = 2 * (32 - prec.leading_zeros()) + 8;
    let mut converged = false;
    for _ in 0..max_iter {
        let fx = f.eval_float(&x);
        let dfx = f.deriv_float(&x);
        if dfx.is_zero() {
            return None;
        }
        let step = fx / dfx;
        x -= &step;
        if x < *lo || x > *hi {
            return None;
        }
        if step.is_zero() || step.abs() < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    let k = target + 8;
    let d = round_to_dyadic(&x, k);
    if *lo < d && d < *hi && sign_at(f, &d) == Ordering::Equal {
        return Some(Step::Exact(d));
    }
    let delta = dyadic(Integer::from(1), target + 2);
    let a = std::cmp::max(lo.clone(), Rational::from(&d - &delta));
    let b = std::cmp::min(hi.clone(), Rational::from(&d + &delta));
    if a >= b {
        return None;
    }
    let (sa, sb) = (sign_at(f, &a), sign_at(f, &b));
    if sa == Ordering::Equal {
        return Some(Step::Exact(a));
    }
    if sb == Ordering::Equal {
        return Some(Step::Exact(b));
    }
    if sa != sb {
        Some(Step::Bracket(a, b))
    } else {
        None
    }
}

/// Shrink a certified bracket until its radius is at most `2^-target_bits`.
///
/// Bisection keeps the bracket valid at every step; validated Newton
/// supplies the quadratic endgame. Each failed Newton attempt is followed by
/// a few bisections, and repeated failures double the working precision up
/// to the policy cap.
pub fn refine_root(f: &MonicCubic, r: &IsolatedRoot, pol: &PrecisionPolicy) -> Result<IsolatedRoot> {
    if pol.target_bits > pol.max_bits {
        return Err(Error::PrecisionExhausted {
            max_bits: pol.max_bits,
            context: format!("target of {} bits", pol.target_bits),
        });
    }
    if r.is_exact() {
        return Ok(r.clone());
    }
    let (mut lo, mut hi) = (r.lo.clone(), r.hi.clone());
    let slo = sign_at(f, &lo);
    let shi = sign_at(f, &hi);
    if slo == Ordering::Equal {
        return Ok(IsolatedRoot::exact(lo));
    }
    if shi == Ordering::Equal {
        return Ok(IsolatedRoot::exact(hi));
    }
    if slo == shi {
        return Err(Error::Precondition(format!(
            "bracket [{lo}, {hi}] is not certified for {f}"
        )));
    }

    let target = pol.target_bits;
    let max_width = dyadic(Integer::from(1), target);
    let mag = magnitude_bits(&lo, &hi);
    let cap = pol.max_bits + mag + 64;
    let mut prec = target + mag + 32;
    let mut failures = 0u32;

    while Rational::from(&hi - &lo) > max_width {
        match newton_attempt(f, &lo, &hi, prec, target) {
            Some(Step::Exact(q)) => return Ok(IsolatedRoot::exact(q)),
            Some(Step::Bracket(a, b)) => {
                lo = a;
                hi = b;
            }
            None => {
                failures += 1;
                for _ in 0..8 {
                    let mid = Rational::from(&lo + &hi) / 2u32;
                    match sign_at(f, &mid) {
                        Ordering::Equal => return Ok(IsolatedRoot::exact(mid)),
                        s if s == slo => lo = mid,
                        _ => hi = mid,
                    }
                }
                if failures % 4 == 0 {
                    prec = prec.saturating_mul(2);
                    if prec > cap {
                        return Err(Error::PrecisionExhausted {
                            max_bits: pol.max_bits,
                            context: format!("refining a root of {f}"),
                        });
                    }
                }
            }
        }
    }
    Ok(IsolatedRoot::from_bracket(lo, hi))
}

/// Isolate and refine all three roots, ascending.
pub fn refined_roots(f: &MonicCubic, pol: &PrecisionPolicy) -> Result<[IsolatedRoot; 3]> {
    let [r1, r2, r3] = isolate_real_roots(f)?;
    Ok([
        refine_root(f, &r1, pol)?,
        refine_root(f, &r2, pol)?,
        refine_root(f, &r3, pol)?,
    ])
}

#[derive(Clone, Debug)]
pub enum AsymptoticFamily {
    OneUnit(OneUnitParams),
    TwoUnit(TwoUnitParams),
}

impl AsymptoticFamily {
    pub fn polynomial(&self, t: &Integer) -> Result<MonicCubic> {
        match self {
            AsymptoticFamily::OneUnit(p) => build_one_unit(p, t),
            AsymptoticFamily::TwoUnit(p) => build_two_unit(p, t),
        }
    }

    /// Newton anchors for the two bounded roots.
    pub fn anchors(&self) -> [Rational; 2] {
        match self {
            AsymptoticFamily::OneUnit(p) => {
                [Rational::new(), Rational::from((p.b.clone(), p.a.clone()))]
            }
            AsymptoticFamily::TwoUnit(p) => [
                Rational::from((p.b.clone(), p.a.clone())),
                Rational::from((p.d.clone(), p.c.clone())),
            ],
        }
    }

    /// `16·(|a| + |b| + |c| + |d|)³`.
    pub fn threshold(&self) -> Integer {
        let s = match self {
            AsymptoticFamily::OneUnit(p) => {
                Integer::from(p.a.abs_ref()) + Integer::from(p.b.abs_ref())
            }
            AsymptoticFamily::TwoUnit(p) => {
                Integer::from(p.a.abs_ref())
                    + Integer::from(p.b.abs_ref())
                    + Integer::from(p.c.abs_ref())
                    + Integer::from(p.d.abs_ref())
            }
        };
        Integer::from(&s * &s) * s * 16u32
    }

    fn tags(&self) -> [&'static str; 3] {
        match self {
            AsymptoticFamily::OneUnit(_) => [
                "Theta(1/|tb|)",
                "b/a*(1 + Theta(1/(a^2 b^2 t)))",
                "Theta(|at|)",
            ],
            AsymptoticFamily::TwoUnit(_) => [
                "b/a + Theta(1/|a^3(bc-ad)t|)",
                "d/c + Theta(1/|c^3(bc-ad)t|)",
                "-act + O(1)",
            ],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredictionStatus {
    Reliable,
    /// `|t|` is below the threshold; predictions are returned but not vouched for.
    BelowThreshold,
}

#[derive(Clone, Debug)]
pub struct AsymptoticRoots {
    /// Predictions near the first anchor, the second anchor, and the large root.
    pub values: [Float; 3],
    pub tags: [&'static str; 3],
    pub status: PredictionStatus,
}

/// One Newton step from each anchor; the third root follows from Vieta.
pub fn asymptotic_roots(fam: &AsymptoticFamily, t: &Integer, prec: u32) -> Result<AsymptoticRoots> {
    let f = fam.polynomial(t)?;
    let mut bounded = Vec::with_capacity(2);
    for alpha in fam.anchors() {
        let d = f.deriv_rational(&alpha);
        if d == 0 {
            return Err(Error::Domain(format!("h'(α) = 0 at α = {alpha}")));
        }
        let step = f.eval_rational(&alpha) / d;
        bounded.push(alpha - step);
    }
    let third = Rational::from(-&f.p2) - &bounded[0] - &bounded[1];
    let status = if Integer::from(t.abs_ref()) >= fam.threshold() {
        PredictionStatus::Reliable
    } else {
        PredictionStatus::BelowThreshold
    };
    Ok(AsymptoticRoots {
        values: [
            Float::with_val(prec, &bounded[0]),
            Float::with_val(prec, &bounded[1]),
            Float::with_val(prec, &third),
        ],
        tags: fam.tags(),
        status,
    })
}

/// The three finite-`t` Newton hypotheses at an anchor `α`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonCheck {
    pub deriv_nonzero: bool,
    /// `|h(α)/h'(α)| ≤ 1/2`.
    pub step_small: bool,
    /// `2·|h(α)/h'(α)|·sup_{|λ|≤1} |h''(α+λ)/h'(α)| < 1`.
    pub curvature_small: bool,
}

impl NewtonCheck {
    pub fn passes(&self) -> bool {
        self.deriv_nonzero && self.step_small && self.curvature_small
    }
}

/// When all three hold, `h(α)` and `h(α + ε)` with `ε = −2h(α)/h'(α)` have
/// opposite signs, so a root lies between them.
pub fn newton_hypotheses(f: &MonicCubic, alpha: &Rational) -> NewtonCheck {
    let d = f.deriv_rational(alpha);
    if d == 0 {
        return NewtonCheck {
            deriv_nonzero: false,
            step_small: false,
            curvature_small: false,
        };
    }
    let ratio = Rational::from(f.eval_rational(alpha) / &d).abs();
    let half = Rational::from((1, 2));
    // h'' is linear, so its sup over |λ| ≤ 1 sits at an endpoint
    let h2 = std::cmp::max(
        f.second_deriv_rational(&Rational::from(alpha - 1u32)).abs(),
        f.second_deriv_rational(&Rational::from(alpha + 1u32)).abs(),
    );
    let curv = Rational::from(&ratio * &h2) / d.abs() * 2u32;
    NewtonCheck {
        deriv_nonzero: true,
        step_small: ratio <= half,
        curvature_small: curv < 1,
    }
}
