//! Per-`t` analysis of a family: construction, units, certification, shape,
//! height and escape of mass. Numeric failures become row statuses.

use rayon::prelude::*;
use rug::{Float, Integer};

use crate::config::ScanConfig;
use crate::error::{Error, Result};
use crate::escape::{
    check_tight, embed_order_lattice, hex_domain, lattice_height, make_simplex, mass_above_height,
    tight_r,
};
use crate::registry::{Family, FamilyMember, FamilyRegistry};
use crate::roots::PrecisionPolicy;
use crate::shape::{shape_from_units, ShapePoint};
use crate::units::{build_order, certify_fundamental, relative_regulator, RegulatorReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    FamilyError,
    NotTotallyReal,
    Reducible,
    UnitsMissing,
    DependentUnits,
    PrecisionExhausted,
    Error,
}

impl RowStatus {
    pub fn name(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::FamilyError => "family_error",
            RowStatus::NotTotallyReal => "not_totally_real",
            RowStatus::Reducible => "reducible",
            RowStatus::UnitsMissing => "units_missing",
            RowStatus::DependentUnits => "dependent_units",
            RowStatus::PrecisionExhausted => "precision_exhausted",
            RowStatus::Error => "error",
        }
    }

    fn of(e: &Error) -> Self {
        match e {
            Error::PrecisionExhausted { .. } => RowStatus::PrecisionExhausted,
            Error::DependentUnits(_) => RowStatus::DependentUnits,
            _ => RowStatus::Error,
        }
    }
}

/// What to compute beyond construction and certification.
#[derive(Clone, Debug, PartialEq)]
pub struct Stages {
    pub shape: bool,
    pub height: bool,
    pub samples: usize,
    pub heights: Vec<f64>,
}

impl Stages {
    pub fn certify_only() -> Self {
        Stages {
            shape: false,
            height: false,
            samples: 0,
            heights: Vec::new(),
        }
    }

    pub fn full(samples: usize, heights: Vec<f64>) -> Self {
        Stages {
            shape: true,
            height: true,
            samples,
            heights,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MassEntry {
    pub h: f64,
    pub fraction: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ScanRow {
    pub t: Integer,
    pub status: RowStatus,
    pub detail: String,
    pub poly: Option<String>,
    pub irreducible: Option<bool>,
    pub disc: Option<Integer>,
    pub units_verified: usize,
    pub units_total: usize,
    pub regulator: Option<RegulatorReport>,
    pub shape: Option<ShapePoint>,
    pub ht: Option<Float>,
    pub ceil_w: Option<Float>,
    pub tight_r: Option<f64>,
    /// `(R, r) = (1, 1/3)`-tightness.
    pub tight_third: Option<bool>,
    pub mass: Vec<MassEntry>,
}

impl ScanRow {
    fn new(t: &Integer) -> Self {
        ScanRow {
            t: t.clone(),
            status: RowStatus::Ok,
            detail: String::new(),
            poly: None,
            irreducible: None,
            disc: None,
            units_verified: 0,
            units_total: 0,
            regulator: None,
            shape: None,
            ht: None,
            ceil_w: None,
            tight_r: None,
            tight_third: None,
            mass: Vec::new(),
        }
    }

    fn fail(mut self, status: RowStatus, detail: impl ToString) -> Self {
        self.status = status;
        self.detail = detail.to_string();
        self
    }

    pub fn certified(&self) -> Option<bool> {
        self.regulator.as_ref().map(|r| r.certified)
    }
}

/// Runs every stage on one family member, climbing the precision ladder
/// while a stage reports that the current precision does not suffice.
pub fn analyze_member(m: &FamilyMember, pol: &PrecisionPolicy, stages: &Stages) -> ScanRow {
    let mut pol = *pol;
    loop {
        let row = analyze_at(m, &pol, stages);
        if row.status != RowStatus::PrecisionExhausted {
            return row;
        }
        match pol.escalate(&row.detail) {
            Ok(next) => pol = next,
            Err(_) => return row,
        }
    }
}

fn analyze_at(m: &FamilyMember, pol: &PrecisionPolicy, stages: &Stages) -> ScanRow {
    let mut row = ScanRow::new(&m.t);
    row.poly = Some(m.poly.to_string());
    row.units_total = m.units.len();
    let disc = m.poly.discriminant();
    row.disc = Some(disc.clone());
    if disc <= 0 {
        return row.fail(RowStatus::NotTotallyReal, "discriminant ≤ 0");
    }
    let irreducible = m.poly.is_irreducible();
    row.irreducible = Some(irreducible);
    if !irreducible {
        return row.fail(RowStatus::Reducible, "integer root");
    }
    let order = match build_order(&m.poly, &m.units, pol) {
        Ok(o) => o,
        Err(e) => return row.fail(RowStatus::of(&e), e),
    };
    row.units_verified = order.units.len();
    if !order.dropped.is_empty() {
        let why: Vec<String> = order
            .dropped
            .iter()
            .map(|d| format!("{}θ − {}: {}", d.a, d.b, d.reason))
            .collect();
        row.detail = why.join("; ");
    }

    if stages.height {
        match embed_order_lattice(&order).and_then(|l| lattice_height(&l)) {
            Ok(h) => row.ht = Some(h),
            Err(e) => return row.fail(RowStatus::of(&e), e),
        }
    }
    if order.units.len() < 2 {
        let d = if row.detail.is_empty() { "fewer than two verified units".into() } else { row.detail.clone() };
        return row.fail(RowStatus::UnitsMissing, d);
    }

    let logs = match order.unit_logs() {
        Ok(l) => l,
        Err(e) => return row.fail(RowStatus::of(&e), e),
    };
    let (v1, v2) = (&logs[0], &logs[1]);
    match relative_regulator(v1, v2).and_then(|r| certify_fundamental(&r, &disc)) {
        Ok(rep) => row.regulator = Some(rep),
        Err(Error::OutOfRegime(msg)) => row.detail = format!("certification skipped: {msg}"),
        Err(e) => return row.fail(RowStatus::of(&e), e),
    }

    if stages.shape {
        match shape_from_units(v1, v2) {
            Ok(s) => row.shape = Some(s),
            Err(e) => return row.fail(RowStatus::of(&e), e),
        }
    }

    if stages.height {
        let phi = match make_simplex(v1, v2) {
            Ok(p) => p,
            Err(e) => return row.fail(RowStatus::of(&e), e),
        };
        let hex = hex_domain(&phi);
        let ht = row.ht.clone().expect("height computed above");
        row.tight_r = Some(tight_r(&hex, &ht, 1.0));
        row.tight_third = check_tight(&hex, &ht, 1.0, 1.0 / 3.0).ok();
        row.ceil_w = Some(hex.ceil.clone());
        if stages.samples > 0 {
            for &h in &stages.heights {
                match mass_above_height(&order, &phi, h, stages.samples) {
                    Ok(f) => row.mass.push(MassEntry { h, fraction: Some(f) }),
                    Err(e) => {
                        row.mass.push(MassEntry { h, fraction: None });
                        return row.fail(RowStatus::of(&e), e);
                    }
                }
            }
        }
    }
    row
}

/// Analyses `fam` at every `t`, in parallel, returning rows in schedule order.
pub fn scan_family(fam: &dyn Family, ts: &[Integer], pol: &PrecisionPolicy, stages: &Stages) -> Vec<ScanRow> {
    ts.par_iter()
        .map(|t| match fam.member(t) {
            Ok(m) => analyze_member(&m, pol, stages),
            Err(e) => ScanRow::new(t).fail(RowStatus::FamilyError, e),
        })
        .collect()
}

/// Resolves the family and schedule of a config and scans it.
pub fn run_scan(cfg: &ScanConfig, reg: &FamilyRegistry, stages: &Stages) -> Result<Vec<ScanRow>> {
    let fam = reg.create(&cfg.family, &cfg.params)?;
    let ts = cfg.schedule.values()?;
    Ok(scan_family(fam.as_ref(), &ts, &cfg.policy, stages))
}

/// Result of re-running certification at doubled precision.
#[derive(Clone, Debug)]
pub struct AuditRow {
    pub t: Integer,
    pub certified: Option<bool>,
    pub certified_2x: Option<bool>,
    pub ratio: Option<Float>,
    pub ratio_2x: Option<Float>,
    pub agree: bool,
}

/// A certified row must stay certified, and both ratios must agree within
/// the error bars of the coarser computation.
pub fn audit(fam: &dyn Family, ts: &[Integer], pol: &PrecisionPolicy) -> Vec<AuditRow> {
    let stages = Stages::certify_only();
    let fine = pol.doubled();
    let base = scan_family(fam, ts, pol, &stages);
    let again = scan_family(fam, ts, &fine, &stages);
    base.into_iter()
        .zip(again)
        .map(|(a, b)| {
            let (ra, rb) = (a.regulator.as_ref(), b.regulator.as_ref());
            let agree = match (ra, rb) {
                (Some(x), Some(y)) => {
                    let gap = Float::with_val(64, &x.cusick_ratio - &y.cusick_ratio).abs();
                    let slack = Float::with_val(64, &x.ratio_upper - &x.cusick_ratio).abs() * 2u32
                        + Float::with_val(64, &x.cusick_ratio).abs() * (-60f64).exp2();
                    (!x.certified || y.certified) && gap <= slack
                }
                (None, None) => a.status == b.status,
                _ => false,
            };
            AuditRow {
                t: a.t.clone(),
                certified: a.certified(),
                certified_2x: b.certified(),
                ratio: ra.map(|r| r.cusick_ratio.clone()),
                ratio_2x: rb.map(|r| r.cusick_ratio.clone()),
                agree,
            }
        })
        .collect()
}
