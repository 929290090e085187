use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use unit_shapes::config::{parse_decimal, ConfigMap, ScanConfig, PARAM_PREFIX};
use unit_shapes::csv_out;
use unit_shapes::lambda::{orbit, MobiusMap, ProjectiveRatio};
use unit_shapes::pipeline::{audit, run_scan, RowStatus, ScanRow, Stages};
use unit_shapes::registry::{parse_rational, FamilyRegistry};
use unit_shapes::shape::{curve_gamma, curve_r_max, reduce_fundamental};
use unit_shapes::{Error, HpComplex};

const EXIT_CONFIG: u8 = 2;
const EXIT_CAPACITY: u8 = 3;

#[derive(Parser)]
#[command(name = "unit-shapes", version, about = "Totally real cubic families: units, shapes and escape of mass")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Full per-t analysis of a family.
    ScanFamily {
        #[command(flatten)]
        scan: ScanArgs,
        /// `full` rows, or only `t, re_tau, im_tau, reduced`.
        #[arg(long, value_enum, default_value_t = Emit::Full)]
        emit: Emit,
    },
    /// Sample the limit curve of shapes for growth exponents (ã, b̃).
    EmitCurves {
        #[arg(long)]
        a_tilde: String,
        #[arg(long)]
        b_tilde: String,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 128)]
        precision_bits: u32,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Iterate T(s) = 3 − 1/s or R(s) = (5s − 3)/(2s − 1) in exact arithmetic.
    LambdaOrbit {
        #[arg(long, default_value = "T")]
        map: String,
        /// Starting point: an integer, a fraction p/q, a decimal, or `inf`.
        #[arg(long)]
        s0: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Certify pairs of units as fundamental along a family.
    Certify {
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Fractions of the hexagon whose lattices have height above each H.
    MassProfile {
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Re-run certification at doubled precision and compare.
    Verify {
        #[command(flatten)]
        scan: ScanArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Full,
    Shapes,
}

/// Flags mirror the config keys and override them.
#[derive(Args)]
struct ScanArgs {
    /// Flat key = value file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    /// Family parameter as key=value; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// geometric, arithmetic or list.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    t_start: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    #[arg(long)]
    t_ratio: Option<String>,
    #[arg(long)]
    t_count: Option<String>,
    #[arg(long)]
    t_step: Option<String>,
    /// Comma-separated list of t.
    #[arg(long)]
    t_values: Option<String>,
    #[arg(long)]
    precision_bits: Option<String>,
    #[arg(long)]
    max_bits: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    /// Height threshold; repeatable.
    #[arg(long = "H", value_name = "H")]
    heights: Vec<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

impl ScanArgs {
    fn resolve(&self) -> Result<ScanConfig, Error> {
        let mut m = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                ConfigMap::parse(&text)?
            }
            None => ConfigMap::default(),
        };
        let flags = [
            ("family", &self.family),
            ("schedule", &self.schedule),
            ("t_start", &self.t_start),
            ("t_end", &self.t_end),
            ("t_ratio", &self.t_ratio),
            ("t_count", &self.t_count),
            ("t_step", &self.t_step),
            ("t_values", &self.t_values),
            ("precision_bits", &self.precision_bits),
            ("max_bits", &self.max_bits),
            ("samples", &self.samples),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                m.set(k, v);
            }
        }
        for p in &self.params {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--param expects KEY=VALUE, got {p:?}")))?;
            m.set(&format!("{PARAM_PREFIX}{}", k.trim()), v.trim());
        }
        if !self.heights.is_empty() {
            m.set_all("H", &self.heights);
        }
        if let Some(o) = &self.output {
            m.set("output", &o.to_string_lossy());
        }
        ScanConfig::from_map(&m)
    }
}

enum Failure {
    Lib(Error),
    Audit(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn open_output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Config(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn scan(args: &ScanArgs, stages: impl FnOnce(&ScanConfig) -> Result<Stages, Error>) -> Result<(ScanConfig, Vec<ScanRow>), Error> {
    let cfg = args.resolve()?;
    let stages = stages(&cfg)?;
    let rows = run_scan(&cfg, &FamilyRegistry::with_builtins(), &stages)?;
    Ok((cfg, rows))
}

/// Capacity failures in individual rows still produce a complete CSV, but
/// the run reports them through the exit status.
fn capacity_check(rows: &[ScanRow], max_bits: u32) -> Result<(), Error> {
    let n = rows.iter().filter(|r| r.status == RowStatus::PrecisionExhausted).count();
    if n > 0 {
        return Err(Error::PrecisionExhausted {
            max_bits,
            context: format!("{n} row(s) ran out of precision; see the status column"),
        });
    }
    Ok(())
}

fn parse_s0(s: &str) -> Result<ProjectiveRatio, Error> {
    match s.trim() {
        "inf" | "∞" => Ok(ProjectiveRatio::Infinity),
        v => parse_rational(v)
            .map(ProjectiveRatio::Rational)
            .map_err(|e| Error::Config(format!("--s0: {e}"))),
    }
}

fn emit_curves(a: f64, b: f64, steps: usize, prec: u32) -> Result<Vec<(f64, HpComplex)>, Error> {
    if !(0.0 <= a && a <= b) {
        return Err(Error::Config(format!("need 0 ≤ ã ≤ b̃, got ã = {a}, b̃ = {b}")));
    }
    if steps < 2 {
        return Err(Error::Config("steps must be at least 2".into()));
    }
    if prec < 16 {
        return Err(Error::Config("precision must be at least 16 bits".into()));
    }
    let rmax = curve_r_max(a, b);
    // both exponents zero: the curve is the single point 1 + ω
    let rmax = if rmax.is_finite() { rmax } else { 1.0 };
    (0..=steps)
        .map(|k| {
            let r = if k == steps { rmax } else { rmax * k as f64 / steps as f64 };
            let mut z = curve_gamma(a, b, r, prec)?;
            if z.im < 0 {
                z = -&z;
            }
            Ok((r, reduce_fundamental(&z)?.tau))
        })
        .collect()
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::ScanFamily { scan: args, emit } => {
            let (cfg, rows) = scan(&args, |c| Ok(Stages::full(c.samples, c.heights.clone())))?;
            let out = open_output(cfg.output.as_ref())?;
            match emit {
                Emit::Full => csv_out::write_scan(out, &rows, &cfg.heights)?,
                Emit::Shapes => csv_out::write_shapes(out, &rows)?,
            }
            capacity_check(&rows, cfg.policy.max_bits)?;
        }
        Cmd::Certify { scan: args } => {
            let (cfg, rows) = scan(&args, |_| Ok(Stages::certify_only()))?;
            csv_out::write_certify(open_output(cfg.output.as_ref())?, &rows)?;
            capacity_check(&rows, cfg.policy.max_bits)?;
        }
        Cmd::MassProfile { scan: args } => {
            let (cfg, rows) = scan(&args, |c| {
                if c.heights.is_empty() || c.samples == 0 {
                    return Err(Error::Config("mass-profile needs at least one --H and samples ≥ 1".into()));
                }
                Ok(Stages {
                    shape: false,
                    height: true,
                    samples: c.samples,
                    heights: c.heights.clone(),
                })
            })?;
            csv_out::write_mass(open_output(cfg.output.as_ref())?, &rows)?;
            capacity_check(&rows, cfg.policy.max_bits)?;
        }
        Cmd::Verify { scan: args } => {
            let cfg = args.resolve()?;
            let fam = FamilyRegistry::with_builtins().create(&cfg.family, &cfg.params)?;
            let rows = audit(fam.as_ref(), &cfg.schedule.values()?, &cfg.policy);
            csv_out::write_audit(open_output(cfg.output.as_ref())?, &rows)?;
            let bad = rows.iter().filter(|r| !r.agree).count();
            if bad > 0 {
                return Err(Failure::Audit(bad));
            }
        }
        Cmd::EmitCurves {
            a_tilde,
            b_tilde,
            steps,
            precision_bits,
            output,
        } => {
            let pts = emit_curves(parse_decimal(&a_tilde)?, parse_decimal(&b_tilde)?, steps, precision_bits)?;
            csv_out::write_curve(open_output(output.as_ref())?, &pts)?;
        }
        Cmd::LambdaOrbit { map, s0, n, output } => {
            let map: MobiusMap = map.parse()?;
            let o = orbit(map, &parse_s0(&s0)?, n);
            csv_out::write_orbit(open_output(output.as_ref())?, &o)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Audit(n)) => {
            eprintln!("error: {n} row(s) disagree at doubled precision");
            ExitCode::FAILURE
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                e if e.is_capacity() => EXIT_CAPACITY,
                Error::Config(_) | Error::InvalidParams(_) | Error::InvalidInput(_) => EXIT_CONFIG,
                _ => 1,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Rational;

    #[test]
    fn s0_forms() {
        assert_eq!(parse_s0("inf").unwrap(), ProjectiveRatio::Infinity);
        assert_eq!(parse_s0("3").unwrap(), ProjectiveRatio::Rational(Rational::from(3)));
        assert_eq!(parse_s0("5/2").unwrap(), ProjectiveRatio::Rational(Rational::from((5, 2))));
        assert!(parse_s0("x").is_err());
    }

    #[test]
    fn curve_ranges() {
        let pts = emit_curves(0.0, 0.0, 4, 128).unwrap();
        let corner = HpComplex::corner(128);
        assert!(pts.iter().all(|(_, z)| z.dist(&corner) < 1e-30));
        let pts = emit_curves(0.0, 1.0, 100, 128).unwrap();
        assert_eq!(pts.len(), 101);
        assert!(pts.iter().all(|(_, z)| (z.abs().to_f64() - 1.0).abs() < 1e-25));
        assert!(emit_curves(1.0, 0.5, 10, 128).is_err());
        assert!(emit_curves(0.0, 1.0, 1, 128).is_err());
    }
}
