//! Flat `key = value` scan configuration and parameter schedules.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rug::float::Round;
use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::registry::FamilyParams;
use crate::roots::PrecisionPolicy;
use crate::serde_big::parse_integer;

/// Largest admissible `|t|`, in bits.
pub const MAX_T_BITS: u32 = 4096;

/// Largest number of schedule points.
pub const MAX_SCHEDULE_LEN: usize = 1_000_000;

/// Keys that may be given more than once; values accumulate.
const REPEATABLE: &[&str] = &["H"];

/// Raw configuration: each key maps to its values in order of appearance.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfigMap {
    entries: BTreeMap<String, Vec<String>>,
}

impl ConfigMap {
    /// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut m = ConfigMap::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", no + 1)));
            }
            if m.entries.contains_key(k) && !REPEATABLE.contains(&k) {
                return Err(Error::Config(format!("line {}: duplicate key {k}", no + 1)));
            }
            m.entries.entry(k.to_string()).or_default().push(v.to_string());
        }
        Ok(m)
    }

    /// Replaces every value of `key`.
    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), vec![value.to_string()]);
    }

    pub fn set_all(&mut self, key: &str, values: &[String]) {
        self.entries.insert(key.to_string(), values.to_vec());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).and_then(|v| v.last()).map(String::as_str)
    }

    pub fn get_all(&self, key: &str) -> &[String] {
        self.entries.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Values of `t` at which a family is sampled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TSchedule {
    /// `start·ratioᵏ ≤ end`.
    Geometric { start: Integer, end: Integer, ratio: Integer },
    /// `count` points rounded from a geometric interpolation of `[start, end]`.
    LogSpaced { start: Integer, end: Integer, count: usize },
    Arithmetic { start: Integer, end: Integer, step: Integer },
    List(Vec<Integer>),
}

impl TSchedule {
    pub fn values(&self) -> Result<Vec<Integer>> {
        let out = match self {
            TSchedule::Geometric { start, end, ratio } => {
                if *start < 1 || *ratio < 2 {
                    return Err(Error::Config("geometric schedule needs t_start ≥ 1 and t_ratio ≥ 2".into()));
                }
                let mut v = Vec::new();
                let mut t = start.clone();
                while t <= *end {
                    push_checked(&mut v, t.clone())?;
                    t *= ratio;
                }
                v
            }
            TSchedule::LogSpaced { start, end, count } => {
                if *start < 1 || end < start || *count == 0 {
                    return Err(Error::Config(
                        "log-spaced schedule needs 1 ≤ t_start ≤ t_end and t_count ≥ 1".into(),
                    ));
                }
                if *count > MAX_SCHEDULE_LEN {
                    return Err(Error::Config(format!("t_count exceeds {MAX_SCHEDULE_LEN}")));
                }
                let prec = end.significant_bits() + 64;
                let lo = Float::with_val(prec, start).ln();
                let hi = Float::with_val(prec, end).ln();
                let mut v: Vec<Integer> = Vec::with_capacity(*count);
                for k in 0..*count {
                    let t = if k == 0 {
                        start.clone()
                    } else if k + 1 == *count {
                        end.clone()
                    } else {
                        let frac = Float::with_val(prec, k) / (*count as u32 - 1);
                        let x = (Float::with_val(prec, &hi - &lo) * frac + &lo).exp();
                        x.to_integer_round(Round::Nearest).map(|(i, _)| i).unwrap_or_else(|| end.clone())
                    };
                    if v.last() != Some(&t) {
                        push_checked(&mut v, t)?;
                    }
                }
                v
            }
            TSchedule::Arithmetic { start, end, step } => {
                if *step <= 0 {
                    return Err(Error::Config("t_step must be positive".into()));
                }
                let mut v = Vec::new();
                let mut t = start.clone();
                while t <= *end {
                    push_checked(&mut v, t.clone())?;
                    t += step;
                }
                v
            }
            TSchedule::List(v) => {
                let mut out = Vec::new();
                for t in v {
                    push_checked(&mut out, t.clone())?;
                }
                out
            }
        };
        if out.is_empty() {
            return Err(Error::Config("empty t-schedule".into()));
        }
        Ok(out)
    }
}

fn push_checked(v: &mut Vec<Integer>, t: Integer) -> Result<()> {
    if t.significant_bits() > MAX_T_BITS {
        return Err(Error::Config(format!("t has more than {MAX_T_BITS} bits")));
    }
    if v.len() >= MAX_SCHEDULE_LEN {
        return Err(Error::Config(format!("t-schedule exceeds {MAX_SCHEDULE_LEN} points")));
    }
    v.push(t);
    Ok(())
}

/// Everything a scan needs.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub family: String,
    pub params: FamilyParams,
    pub schedule: TSchedule,
    pub policy: PrecisionPolicy,
    pub output: Option<PathBuf>,
    pub samples: usize,
    pub heights: Vec<f64>,
}

const SCAN_KEYS: &[&str] = &[
    "family", "schedule", "t_start", "t_end", "t_ratio", "t_count", "t_step", "t_values",
    "precision_bits", "max_bits", "samples", "H", "output",
];

/// Prefix for family parameters, as in `family.a = 3`.
pub const PARAM_PREFIX: &str = "family.";

fn int_key(m: &ConfigMap, key: &str) -> Result<Integer> {
    let v = m
        .get(key)
        .ok_or_else(|| Error::Config(format!("missing {key}")))?;
    parse_integer(v).map_err(|e| Error::Config(format!("{key}: {e}")))
}

fn usize_key(m: &ConfigMap, key: &str, default: usize) -> Result<usize> {
    match m.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("{key} must be a nonnegative integer, got {v:?}"))),
    }
}

fn u32_key(m: &ConfigMap, key: &str, default: u32) -> Result<u32> {
    match m.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<u32>()
            .map_err(|_| Error::Config(format!("{key} must be a nonnegative integer, got {v:?}"))),
    }
}

/// A plain decimal; exponents, `inf` and `nan` are refused.
pub fn parse_decimal(s: &str) -> Result<f64> {
    let t = s.trim();
    let body = t.strip_prefix(['-', '+']).unwrap_or(t);
    let ok = !body.is_empty()
        && body != "."
        && body.bytes().all(|b| b.is_ascii_digit() || b == b'.')
        && body.bytes().filter(|&b| b == b'.').count() <= 1;
    if !ok {
        return Err(Error::Config(format!("not a decimal number: {s:?}")));
    }
    t.parse::<f64>()
        .map_err(|_| Error::Config(format!("not a decimal number: {s:?}")))
}

fn split_list(values: &[String]) -> Vec<&str> {
    values
        .iter()
        .flat_map(|v| v.split(','))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

impl ScanConfig {
    pub fn from_map(m: &ConfigMap) -> Result<Self> {
        for k in m.keys() {
            if !SCAN_KEYS.contains(&k) && !k.starts_with(PARAM_PREFIX) {
                return Err(Error::Config(format!("unknown key {k:?}")));
            }
        }
        let family = m
            .get("family")
            .ok_or_else(|| Error::Config("missing family".into()))?
            .to_string();
        let mut params = FamilyParams::new();
        for k in m.keys() {
            if let Some(p) = k.strip_prefix(PARAM_PREFIX) {
                params.insert(p, m.get(k).unwrap_or(""));
            }
        }

        let schedule = match m.get("schedule").unwrap_or(if m.get("t_values").is_some() { "list" } else { "geometric" }) {
            "geometric" => {
                let (start, end) = (int_key(m, "t_start")?, int_key(m, "t_end")?);
                match (m.get("t_ratio"), m.get("t_count")) {
                    (Some(_), Some(_)) => {
                        return Err(Error::Config("give t_ratio or t_count, not both".into()))
                    }
                    (_, Some(_)) => TSchedule::LogSpaced {
                        start,
                        end,
                        count: usize_key(m, "t_count", 0)?,
                    },
                    _ => TSchedule::Geometric {
                        start,
                        end,
                        ratio: if m.get("t_ratio").is_some() { int_key(m, "t_ratio")? } else { Integer::from(10) },
                    },
                }
            }
            "arithmetic" => TSchedule::Arithmetic {
                start: int_key(m, "t_start")?,
                end: int_key(m, "t_end")?,
                step: if m.get("t_step").is_some() { int_key(m, "t_step")? } else { Integer::from(1) },
            },
            "list" => TSchedule::List(
                split_list(m.get_all("t_values"))
                    .into_iter()
                    .map(|s| parse_integer(s).map_err(|e| Error::Config(format!("t_values: {e}"))))
                    .collect::<Result<_>>()?,
            ),
            other => {
                return Err(Error::Config(format!(
                    "schedule must be geometric, arithmetic or list, got {other:?}"
                )))
            }
        };
        schedule.values()?;

        let d = PrecisionPolicy::default();
        let target = u32_key(m, "precision_bits", d.target_bits)?;
        let policy = PrecisionPolicy::new(target, u32_key(m, "max_bits", d.max_bits.max(target))?)
        .map_err(|e| Error::Config(e.to_string()))?;

        let heights = split_list(m.get_all("H"))
            .into_iter()
            .map(parse_decimal)
            .collect::<Result<Vec<f64>>>()?;
        if heights.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::Config("H values must be positive".into()));
        }

        Ok(ScanConfig {
            family,
            params,
            schedule,
            policy,
            output: m.get("output").map(PathBuf::from),
            samples: usize_key(m, "samples", 10_000)?,
            heights,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_map(&ConfigMap::parse(text)?)
    }
}
