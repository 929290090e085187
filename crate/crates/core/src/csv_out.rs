//! CSV emitters. Output is LF-terminated with a header row, and every value
//! is formatted without locale or platform dependence.

use std::io::Write;

use rug::{Float, Integer};

use crate::complex::HpComplex;
use crate::error::{Error, Result};
use crate::lambda::ProjectiveRatio;
use crate::pipeline::{AuditRow, ScanRow};

/// Significant digits for high-precision values.
pub const DIGITS: usize = 20;

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("cannot write CSV: {e}"))
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn fmt_float(x: &Float) -> String {
    x.to_string_radix(10, Some(DIGITS))
}

fn opt<T>(v: Option<T>, f: impl FnOnce(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn fmt_bool(b: bool) -> String {
    b.to_string()
}

fn fmt_int(n: &Integer) -> String {
    n.to_string()
}

/// Full scan rows: one column per height in `heights`.
pub fn write_scan<W: Write>(w: W, rows: &[ScanRow], heights: &[f64]) -> Result<()> {
    let mut out = writer(w);
    let mut header: Vec<String> = [
        "t", "status", "irreducible", "disc", "units_verified", "rel_reg", "cusick_ratio", "certified",
        "tau_re", "tau_im", "corner_dist", "ht", "ceil_w", "tight_r",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(heights.iter().map(|h| format!("mass_H{h}")));
    header.push("detail".into());
    out.write_record(&header).map_err(io_err)?;
    for r in rows {
        let reg = r.regulator.as_ref();
        let mut rec = vec![
            fmt_int(&r.t),
            r.status.name().to_string(),
            opt(r.irreducible, fmt_bool),
            opt(r.disc.as_ref(), fmt_int),
            format!("{}/{}", r.units_verified, r.units_total),
            opt(reg, |g| fmt_float(&g.rel_reg.value)),
            opt(reg, |g| fmt_float(&g.cusick_ratio)),
            opt(reg, |g| fmt_bool(g.certified)),
            opt(r.shape.as_ref(), |s| fmt_float(&s.tau.re)),
            opt(r.shape.as_ref(), |s| fmt_float(&s.tau.im)),
            opt(r.shape.as_ref(), |s| s.corner_distance().to_string()),
            opt(r.ht.as_ref(), fmt_float),
            opt(r.ceil_w.as_ref(), fmt_float),
            opt(r.tight_r, |x| x.to_string()),
        ];
        for h in heights {
            let f = r.mass.iter().find(|m| m.h == *h).and_then(|m| m.fraction);
            rec.push(opt(f, |x| x.to_string()));
        }
        rec.push(r.detail.clone());
        out.write_record(&rec).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Certification sweep: regulator, ratio with its upper bound, verdict.
pub fn write_certify<W: Write>(w: W, rows: &[ScanRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record([
        "t", "status", "disc", "rel_reg", "rel_reg_err", "cusick_ratio", "ratio_upper", "certified", "margin_bits",
    ])
    .map_err(io_err)?;
    for r in rows {
        let reg = r.regulator.as_ref();
        out.write_record([
            fmt_int(&r.t),
            r.status.name().to_string(),
            opt(r.disc.as_ref(), fmt_int),
            opt(reg, |g| fmt_float(&g.rel_reg.value)),
            opt(reg, |g| format!("{:e}", g.rel_reg.err)),
            opt(reg, |g| fmt_float(&g.cusick_ratio)),
            opt(reg, |g| fmt_float(&g.ratio_upper)),
            opt(reg, |g| fmt_bool(g.certified)),
            opt(reg, |g| g.margin_bits.to_string()),
        ])
        .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Shape scan: `t, Re τ, Im τ, reduced`.
pub fn write_shapes<W: Write>(w: W, rows: &[ScanRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["t", "re_tau", "im_tau", "reduced"]).map_err(io_err)?;
    for r in rows {
        let s = r.shape.as_ref();
        out.write_record([
            fmt_int(&r.t),
            opt(s, |s| fmt_float(&s.tau.re)),
            opt(s, |s| fmt_float(&s.tau.im)),
            opt(s, |s| fmt_bool(s.reduced)),
        ])
        .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Mass profile: one line per `(t, H)`.
pub fn write_mass<W: Write>(w: W, rows: &[ScanRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["t", "disc", "ht", "ceil_w", "H", "fraction", "tight_r", "status"])
        .map_err(io_err)?;
    for r in rows {
        let base = [
            fmt_int(&r.t),
            opt(r.disc.as_ref(), fmt_int),
            opt(r.ht.as_ref(), fmt_float),
            opt(r.ceil_w.as_ref(), fmt_float),
        ];
        if r.mass.is_empty() {
            let mut rec = base.to_vec();
            rec.extend([String::new(), String::new(), opt(r.tight_r, |x| x.to_string()), r.status.name().into()]);
            out.write_record(&rec).map_err(io_err)?;
        }
        for m in &r.mass {
            let mut rec = base.to_vec();
            rec.extend([
                m.h.to_string(),
                opt(m.fraction, |x| x.to_string()),
                opt(r.tight_r, |x| x.to_string()),
                r.status.name().into(),
            ]);
            out.write_record(&rec).map_err(io_err)?;
        }
    }
    out.flush().map_err(io_err)
}

/// Orbit: `step, numerator, denominator, decimal` (50 digits). Truncated
/// values have empty numerator and denominator; `∞` is `1/0`.
pub fn write_orbit<W: Write>(w: W, orbit: &[ProjectiveRatio]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["step", "numerator", "denominator", "decimal"]).map_err(io_err)?;
    for (k, s) in orbit.iter().enumerate() {
        let (n, d) = match s {
            ProjectiveRatio::Rational(q) => (q.numer().to_string(), q.denom().to_string()),
            ProjectiveRatio::Infinity => ("1".into(), "0".into()),
            ProjectiveRatio::Real(_) => (String::new(), String::new()),
        };
        out.write_record([k.to_string(), n, d, s.to_decimal(50)]).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Curve samples `step, r, Re γ(r), Im γ(r)`.
pub fn write_curve<W: Write>(w: W, points: &[(f64, HpComplex)]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["step", "r", "re", "im"]).map_err(io_err)?;
    for (k, (r, z)) in points.iter().enumerate() {
        out.write_record([k.to_string(), r.to_string(), fmt_float(&z.re), fmt_float(&z.im)])
            .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Re-audit at doubled precision.
pub fn write_audit<W: Write>(w: W, rows: &[AuditRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["t", "certified", "certified_2x", "cusick_ratio", "cusick_ratio_2x", "agree"])
        .map_err(io_err)?;
    for r in rows {
        out.write_record([
            fmt_int(&r.t),
            opt(r.certified, fmt_bool),
            opt(r.certified_2x, fmt_bool),
            opt(r.ratio.as_ref(), fmt_float),
            opt(r.ratio_2x.as_ref(), fmt_float),
            fmt_bool(r.agree),
        ])
        .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::{orbit, MobiusMap};
    use crate::pipeline::{scan_family, Stages};
    use crate::registry::{FamilyParams, FamilyRegistry};
    use crate::roots::PrecisionPolicy;
    use rug::Rational;

    fn scan() -> Vec<ScanRow> {
        let fam = FamilyRegistry::with_builtins().create("simplest", &FamilyParams::new()).unwrap();
        let ts: Vec<Integer> = [5, 50, 500].map(Integer::from).to_vec();
        scan_family(fam.as_ref(), &ts, &PrecisionPolicy::default(), &Stages::full(12, vec![10.0]))
    }

    #[test]
    fn scan_csv_shape() {
        let mut buf = Vec::new();
        write_scan(&mut buf, &scan(), &[10.0]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("t,status,irreducible,disc"));
        assert!(lines[0].ends_with("mass_H10,detail"));
        assert!(lines[1].starts_with("5,ok,true,"));
    }

    #[test]
    fn output_is_deterministic() {
        let render = || {
            let mut a = Vec::new();
            let rows = scan();
            write_scan(&mut a, &rows, &[10.0]).unwrap();
            write_mass(&mut a, &rows).unwrap();
            write_shapes(&mut a, &rows).unwrap();
            write_certify(&mut a, &rows).unwrap();
            a
        };
        assert_eq!(render(), render());
    }

    #[test]
    fn orbit_csv() {
        let o = orbit(MobiusMap::T, &ProjectiveRatio::Rational(Rational::from(3)), 2);
        let mut buf = Vec::new();
        write_orbit(&mut buf, &o).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,numerator,denominator,decimal");
        assert!(lines[1].starts_with("0,3,1,3.0000"));
        assert!(lines[3].starts_with("2,21,8,2.6250"));
        let mut buf = Vec::new();
        write_orbit(&mut buf, &[ProjectiveRatio::Infinity]).unwrap();
        assert!(String::from_utf8(buf).unwrap().ends_with("0,1,0,inf\n"));
    }
}
