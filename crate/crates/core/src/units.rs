//! Log embeddings of units, relative regulators, and Cusick certification.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use rug::float::Round;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::MonicCubic;
use crate::roots::{refine_root, refined_roots, IsolatedRoot, PrecisionPolicy};

/// A real number known to lie within `err` of `value`.
#[derive(Clone, Debug)]
pub struct Approx {
    pub value: Float,
    pub err: f64,
}

impl Approx {
    pub fn lower(&self) -> Float {
        Float::with_val_round(self.value.prec(), &self.value - self.err, Round::Down).0
    }

    pub fn upper(&self) -> Float {
        Float::with_val_round(self.value.prec(), &self.value + self.err, Round::Up).0
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

/// A point of `R³₀` with a shared coordinate error bound.
#[derive(Clone, Debug)]
pub struct LogVector {
    pub x: [Float; 3],
    pub err: f64,
}

impl LogVector {
    pub fn new(x: [Float; 3], err: f64) -> Self {
        LogVector { x, err }
    }

    pub fn from_f64(prec: u32, x: [f64; 3]) -> Self {
        LogVector {
            x: x.map(|v| Float::with_val(prec, v)),
            err: 0.0,
        }
    }

    pub fn prec(&self) -> u32 {
        self.x.iter().map(Float::prec).min().unwrap()
    }

    pub fn sum(&self) -> Float {
        Float::with_val(self.prec(), &self.x[0] + &self.x[1]) + &self.x[2]
    }

    /// Tolerance for membership in `R³₀`: the stored error plus rounding.
    pub fn plane_tolerance(&self) -> f64 {
        let scale = self.max_abs().max(1.0);
        3.0 * self.err + scale * (-(self.prec() as f64) + 4.0).exp2()
    }

    pub fn on_plane(&self) -> bool {
        self.sum().to_f64().abs() <= self.plane_tolerance()
    }

    pub fn max_abs(&self) -> f64 {
        self.x.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn norm(&self) -> Float {
        let p = self.prec();
        let mut s = Float::new(p);
        for v in &self.x {
            s += Float::with_val(p, v.square_ref());
        }
        s.sqrt()
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [self.x[0].to_f64(), self.x[1].to_f64(), self.x[2].to_f64()]
    }

    /// `k·self`.
    pub fn scaled(&self, k: i64) -> LogVector {
        let p = self.prec();
        LogVector {
            x: [0, 1, 2].map(|i| Float::with_val(p, &self.x[i] * k)),
            err: self.err * k.unsigned_abs() as f64,
        }
    }

    /// The first two coordinates carry the whole vector when the sum is 0.
    pub fn coords(&self) -> &[Float; 3] {
        &self.x
    }
}

impl Add for &LogVector {
    type Output = LogVector;
    fn add(self, o: &LogVector) -> LogVector {
        let p = self.prec().max(o.prec());
        LogVector {
            x: [0, 1, 2].map(|i| Float::with_val(p, &self.x[i] + &o.x[i])),
            err: self.err + o.err,
        }
    }
}

impl Sub for &LogVector {
    type Output = LogVector;
    fn sub(self, o: &LogVector) -> LogVector {
        let p = self.prec().max(o.prec());
        LogVector {
            x: [0, 1, 2].map(|i| Float::with_val(p, &self.x[i] - &o.x[i])),
            err: self.err + o.err,
        }
    }
}

impl Neg for &LogVector {
    type Output = LogVector;
    fn neg(self) -> LogVector {
        LogVector {
            x: self.x.clone().map(|v| -v),
            err: self.err,
        }
    }
}

impl fmt::Display for LogVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.to_f64();
        write!(f, "({a:.6}, {b:.6}, {c:.6}) ± {:.1e}", self.err)
    }
}

/// A unit candidate `aθ − b` that was dropped, with the reason.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DroppedUnit {
    pub a: Integer,
    pub b: Integer,
    pub reason: String,
}

/// `Z[θ]` with certified roots (ascending) and verified units `aθ − b`.
#[derive(Clone, Debug)]
pub struct CubicOrderData {
    pub f: MonicCubic,
    pub roots: [IsolatedRoot; 3],
    pub disc: Integer,
    pub units: Vec<(Integer, Integer)>,
    pub dropped: Vec<DroppedUnit>,
    pub policy: PrecisionPolicy,
}

pub fn build_order(
    f: &MonicCubic,
    candidate_units: &[(Integer, Integer)],
    pol: &PrecisionPolicy,
) -> Result<CubicOrderData> {
    let disc = f.discriminant();
    if disc <= 0 {
        return Err(Error::Domain(format!("{f} is not totally real (D = {disc})")));
    }
    if !f.is_irreducible() {
        return Err(Error::Domain(format!("{f} is reducible")));
    }
    let roots = refined_roots(f, pol)?;
    let mut units = Vec::new();
    let mut dropped = Vec::new();
    for (a, b) in candidate_units {
        let reason = if *a == 0 {
            Some("a = 0".to_string())
        } else if Integer::from(a.gcd_ref(b)) != 1 {
            Some(format!("gcd({a}, {b}) > 1"))
        } else {
            let n = f.norm_linear_form(a, b)?;
            (n != 1 && n != -1).then(|| format!("norm {n}"))
        };
        match reason {
            None => units.push((a.clone(), b.clone())),
            Some(reason) => dropped.push(DroppedUnit {
                a: a.clone(),
                b: b.clone(),
                reason,
            }),
        }
    }
    Ok(CubicOrderData {
        f: f.clone(),
        roots,
        disc,
        units,
        dropped,
        policy: *pol,
    })
}

impl CubicOrderData {
    /// Log embeddings of the verified units, in order.
    pub fn unit_logs(&self) -> Result<Vec<LogVector>> {
        self.units.iter().map(|(a, b)| log_embed(self, a, b)).collect()
    }

    pub fn working_prec(&self) -> u32 {
        self.policy.target_bits + 64
    }
}

/// `ln|a·x − b|` over a bracket on which `a·x − b` keeps one sign.
fn log_over_bracket(a: &Integer, b: &Integer, r: &IsolatedRoot, prec: u32) -> Option<(Float, f64)> {
    let y1 = Rational::from(a * &r.lo) - b;
    let y2 = Rational::from(a * &r.hi) - b;
    if y1 == 0 || y2 == 0 || y1.cmp0() != y2.cmp0() {
        return None;
    }
    let l1 = Float::with_val(prec, y1.abs()).ln();
    let l2 = Float::with_val(prec, y2.abs()).ln();
    let mid = Float::with_val(prec, &l1 + &l2) / 2u32;
    let half = Float::with_val(prec, &l1 - &l2).abs() / 2u32;
    let scale = mid.to_f64().abs().max(1.0);
    let rounding = scale * (-(prec as f64) + 3.0).exp2();
    Some((mid, half.to_f64_round(Round::Up) + rounding))
}

/// `(ln|a·θᵢ − b|)ᵢ` for a verified unit, with the root brackets re-refined
/// when one straddles `b/a`.
pub fn log_embed(order: &CubicOrderData, a: &Integer, b: &Integer) -> Result<LogVector> {
    if *a == 0 {
        return Err(Error::Precondition("log_embed needs a ≠ 0".into()));
    }
    let n = order.f.norm_linear_form(a, b)?;
    if n != 1 && n != -1 {
        return Err(Error::InvalidInput(format!(
            "{a}θ − {b} has norm {n}, not a unit"
        )));
    }
    let prec = order.working_prec();
    let mut x: Vec<Float> = Vec::with_capacity(3);
    let mut err = 0f64;
    for root in &order.roots {
        let mut pol = order.policy;
        let mut r = root.clone();
        let (v, e) = loop {
            if let Some(ve) = log_over_bracket(a, b, &r, prec.max(pol.target_bits + 64)) {
                break ve;
            }
            pol = pol.escalate(&format!("separating {a}θ − {b} from 0"))?;
            r = refine_root(&order.f, &r, &pol)?;
        };
        x.push(v);
        err = err.max(e);
    }
    let v = LogVector::new([x[0].clone(), x[1].clone(), x[2].clone()], err);
    if !v.on_plane() {
        return Err(Error::InternalInconsistency(format!(
            "log vector {v} of a unit is off the trace-zero plane"
        )));
    }
    Ok(v)
}

fn minor(v1: &LogVector, v2: &LogVector, i: usize, j: usize) -> Float {
    let p = v1.prec().max(v2.prec());
    Float::with_val(p, &v1.x[i] * &v2.x[j]) - Float::with_val(p, &v1.x[j] * &v2.x[i])
}

fn minor_err(v1: &LogVector, v2: &LogVector, i: usize, j: usize) -> f64 {
    let a = |v: &LogVector, k: usize| v.x[k].to_f64().abs();
    let (e1, e2) = (v1.err, v2.err);
    e1 * (a(v2, i) + a(v2, j)) + e2 * (a(v1, i) + a(v1, j)) + 2.0 * e1 * e2
}

/// `|det|` of the first-two-coordinate minor, cross-checked against the
/// other two minors.
pub fn relative_regulator(v1: &LogVector, v2: &LogVector) -> Result<Approx> {
    let p = v1.prec().max(v2.prec());
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let dets: Vec<Float> = pairs.iter().map(|&(i, j)| minor(v1, v2, i, j).abs()).collect();
    let errs: Vec<f64> = pairs.iter().map(|&(i, j)| minor_err(v1, v2, i, j)).collect();
    let scale = v1.max_abs().max(1.0) * v2.max_abs().max(1.0);
    let rounding = scale * (-(p as f64) + 4.0).exp2();
    let err = errs[0] + rounding;

    // Off-plane drift of either vector moves the other minors by at most this.
    let drift = 2.0 * (v1.plane_tolerance() * v2.max_abs() + v2.plane_tolerance() * v1.max_abs());
    let allowed = 10.0 * (errs.iter().cloned().fold(0.0, f64::max) + rounding + drift);
    for k in 1..3 {
        let diff = Float::with_val(p, &dets[k] - &dets[0]).abs().to_f64();
        if diff > allowed {
            return Err(Error::InternalInconsistency(format!(
                "regulator minors disagree by {diff:.3e} (allowed {allowed:.3e})"
            )));
        }
    }
    if dets[0].to_f64() <= err {
        return Err(Error::DependentUnits(format!(
            "|det| = {:.3e} within error {err:.3e}",
            dets[0].to_f64()
        )));
    }
    Ok(Approx {
        value: dets[0].clone(),
        err,
    })
}

/// Margin under 1/8 required for certification, in bits.
pub const CUSICK_MARGIN_BITS: u32 = 32;

#[derive(Clone, Debug)]
pub struct RegulatorReport {
    pub rel_reg: Approx,
    pub cusick_ratio: Float,
    /// Rigorous upper bound of the ratio.
    pub ratio_upper: Float,
    pub certified: bool,
    pub margin_bits: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegulatorJson {
    pub rel_reg: String,
    pub rel_reg_err: String,
    pub cusick_ratio: String,
    pub ratio_upper: String,
    pub certified: bool,
    pub margin_bits: u32,
}

impl RegulatorReport {
    pub fn to_json(&self) -> RegulatorJson {
        RegulatorJson {
            rel_reg: self.rel_reg.value.to_string_radix(10, Some(30)),
            rel_reg_err: format!("{:e}", self.rel_reg.err),
            cusick_ratio: self.cusick_ratio.to_string_radix(10, Some(30)),
            ratio_upper: self.ratio_upper.to_string_radix(10, Some(30)),
            certified: self.certified,
            margin_bits: self.margin_bits,
        }
    }
}

/// `R′ / ln²(D/4)`; certified when its upper bound is below `1/8 − 2^-32`.
///
/// An uncertified report is inconclusive: it never shows the units are not
/// fundamental.
pub fn certify_fundamental(rel_reg: &Approx, disc: &Integer) -> Result<RegulatorReport> {
    if *disc <= 16 {
        return Err(Error::OutOfRegime(format!("D = {disc} ≤ 16")));
    }
    if rel_reg.value <= 0 {
        return Err(Error::Precondition("relative regulator must be positive".into()));
    }
    let p = rel_reg.value.prec().max(128) + 32;
    let quarter = Rational::from((disc.clone(), Integer::from(4)));
    let log_d = Float::with_val(p, &quarter).ln();
    let ratio = Float::with_val(p, &rel_reg.value / Float::with_val(p, log_d.square_ref()));

    // ln is correctly rounded, so log_d is within one ulp of the true value.
    let ulp = Float::with_val(p, 1) << (log_d.get_exp().unwrap_or(0) - p as i32);
    let log_lo = Float::with_val_round(p, &log_d - &ulp, Round::Down).0;
    let num_hi = rel_reg.upper();
    let den_lo = Float::with_val_round(p, log_lo.square_ref(), Round::Down).0;
    let ratio_upper = Float::with_val_round(p, &num_hi / &den_lo, Round::Up).0;

    let threshold = (Float::with_val(p, 1) >> 3u32) - (Float::with_val(p, 1) >> CUSICK_MARGIN_BITS);
    Ok(RegulatorReport {
        rel_reg: rel_reg.clone(),
        cusick_ratio: ratio,
        certified: ratio_upper < threshold,
        ratio_upper,
        margin_bits: CUSICK_MARGIN_BITS,
    })
}
