//! Unimodular lattices of orders, heights, simplex sets, and escape of mass.

use rayon::prelude::*;
use rug::float::Round;
use rug::Float;

use crate::error::{Error, Result};
use crate::units::{CubicOrderData, LogVector};

/// Columns are the basis vectors; row `i` is the embedding `σᵢ`.
#[derive(Clone, Debug)]
pub struct LatticeBasis3 {
    pub m: [[Float; 3]; 3],
    pub det_err: f64,
    /// Absolute error bound of each entry of `m`.
    pub entry_err: [[f64; 3]; 3],
    /// Bound on `|δᵢ|` for an unknown row scaling `diag(e^{δᵢ})`, which moves
    /// every norm by a factor within `e^{±max|δᵢ|}`.
    pub scale_err: f64,
}

impl LatticeBasis3 {
    pub fn from_f64(prec: u32, m: [[f64; 3]; 3]) -> Self {
        LatticeBasis3 {
            m: m.map(|row| row.map(|v| Float::with_val(prec, v))),
            det_err: 0.0,
            entry_err: [[0.0; 3]; 3],
            scale_err: 0.0,
        }
    }

    pub fn prec(&self) -> u32 {
        self.m[0][0].prec()
    }

    /// Basis vector `j` (column `j`).
    pub fn column(&self, j: usize) -> [Float; 3] {
        [0, 1, 2].map(|i| self.m[i][j].clone())
    }

    pub fn det(&self) -> Float {
        det3(&self.m, self.prec())
    }

    fn from_columns(cols: &[[Float; 3]; 3], det_err: f64, entry_err: [[f64; 3]; 3], scale_err: f64) -> Self {
        LatticeBasis3 {
            m: [0, 1, 2].map(|i| [0, 1, 2].map(|j| cols[j][i].clone())),
            det_err,
            entry_err,
            scale_err,
        }
    }
}

fn det3(m: &[[Float; 3]; 3], p: u32) -> Float {
    let minor = |a: usize, b: usize, c: usize, d: usize| {
        Float::with_val(p, &m[1][a] * &m[2][b]) - Float::with_val(p, &m[1][c] * &m[2][d])
    };
    Float::with_val(p, &m[0][0] * minor(1, 2, 2, 1))
        - Float::with_val(p, &m[0][1] * minor(0, 2, 2, 0))
        + Float::with_val(p, &m[0][2] * minor(0, 1, 1, 0))
}

/// `L = D^{-1/6}·φ(Z[θ])` with basis `1, θ, θ²`.
pub fn embed_order_lattice(order: &CubicOrderData) -> Result<LatticeBasis3> {
    let p = order.working_prec();
    let scale = Float::with_val(p, &order.disc).root(6).recip();
    let mut m: [[Float; 3]; 3] = [0, 1, 2].map(|_| [0, 1, 2].map(|_| Float::new(p)));
    let mut theta_max = 1f64;
    let mut root_err = 0f64;
    let ulp = (-(p as f64) + 4.0).exp2();
    let s = scale.to_f64();
    let mut entry_err = [[0.0; 3]; 3];
    for (i, r) in order.roots.iter().enumerate() {
        let th = Float::with_val(p, &r.value);
        let (t, e) = (th.to_f64().abs(), r.err_f64());
        theta_max = theta_max.max(t);
        root_err = root_err.max(e);
        entry_err[i] = [0.0, s * (e + t * ulp), s * ((2.0 * t + e) * e + t * t * ulp)];
        m[i][0] = scale.clone();
        m[i][1] = Float::with_val(p, &scale * &th);
        m[i][2] = Float::with_val(p, &m[i][1] * &th);
    }
    let det_err = 12.0 * root_err * s.powi(3) * (1.0 + theta_max).powi(5)
        + (-(p as f64) + 16.0).exp2() * (s * (1.0 + theta_max)).powi(3).max(1.0);
    // the scale D^{-1/6} is correctly rounded: a common row scaling
    let b = LatticeBasis3 { m, det_err, entry_err, scale_err: ulp };
    let dev = (b.det().abs() - 1u32).abs().to_f64();
    if dev > det_err {
        return Err(Error::InternalInconsistency(format!(
            "order lattice has |det| − 1 = {dev:.3e} > {det_err:.3e}"
        )));
    }
    Ok(b)
}

fn dot(a: &[Float; 3], b: &[Float; 3], p: u32) -> Float {
    let mut s = Float::with_val(p, &a[0] * &b[0]);
    s += Float::with_val(p, &a[1] * &b[1]);
    s += Float::with_val(p, &a[2] * &b[2]);
    s
}

/// Gram–Schmidt data: squared norms `B` and coefficients `mu[i][j]` (`j < i`).
fn gram_schmidt(b: &[[Float; 3]; 3], p: u32) -> ([Float; 3], [[Float; 3]; 3]) {
    let mut star: [[Float; 3]; 3] = b.clone();
    let mut bn: [Float; 3] = [0, 1, 2].map(|_| Float::new(p));
    let mut mu: [[Float; 3]; 3] = [0, 1, 2].map(|_| [0, 1, 2].map(|_| Float::new(p)));
    for i in 0..3 {
        for j in 0..i {
            mu[i][j] = dot(&b[i], &star[j], p) / &bn[j];
            for k in 0..3 {
                let d = Float::with_val(p, &mu[i][j] * &star[j][k]);
                star[i][k] -= d;
            }
        }
        bn[i] = dot(&star[i], &star[i], p);
    }
    (bn, mu)
}

/// LLL with `δ = 0.99` on basis vectors `b[0..3]`, in place. Row `k` of `u`
/// follows the integer combination of the input vectors that `b[k]` is.
fn lll(b: &mut [[Float; 3]; 3], u: &mut [[Float; 3]; 3], p: u32) {
    let delta = Float::with_val(p, 0.99);
    let mut k = 1;
    let mut guard = 0;
    while k < 3 && guard < 10_000 {
        guard += 1;
        for j in (0..k).rev() {
            let (_, mu) = gram_schmidt(b, p);
            let q = Float::with_val(p, mu[k][j].round_ref());
            if !q.is_zero() {
                for c in 0..3 {
                    let d = Float::with_val(p, &q * &b[j][c]);
                    b[k][c] -= d;
                    let e = Float::with_val(exact_prec(&q, &u[j][c]), &q * &u[j][c]);
                    u[k][c] = Float::with_val(exact_prec(&u[k][c], &e), &u[k][c] - &e);
                }
            }
        }
        let (bn, mu) = gram_schmidt(b, p);
        let lhs = &bn[k];
        let rhs = (delta.clone() - Float::with_val(p, mu[k][k - 1].square_ref())) * &bn[k - 1];
        if *lhs >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            u.swap(k, k - 1);
            k = if k > 1 { k - 1 } else { 1 };
        }
    }
}

/// Columns of `B` reduced by LLL; same lattice.
pub fn lll_reduce(basis: &LatticeBasis3) -> LatticeBasis3 {
    let p = basis.prec();
    let mut cols = [0, 1, 2].map(|j| basis.column(j));
    let mut u = identity(p);
    lll(&mut cols, &mut u, p);
    let entry_err = [0, 1, 2].map(|i| [0, 1, 2].map(|k| combine_err(basis, &u[k], i)));
    LatticeBasis3::from_columns(&cols, basis.det_err, entry_err, basis.scale_err)
}

/// Error bound of row `i` of `B·c` inherited from the entries of `B`.
fn combine_err(basis: &LatticeBasis3, c: &[Float; 3], i: usize) -> f64 {
    (0..3).map(|j| basis.entry_err[i][j] * c[j].to_f64().abs()).sum()
}

fn identity(p: u32) -> [[Float; 3]; 3] {
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| Float::with_val(p, u32::from(i == j))))
}

/// Precision at which integer-valued `a ± b` and `a·b` are exact.
fn exact_prec(a: &Float, b: &Float) -> u32 {
    let bits = |x: &Float| x.get_exp().unwrap_or(0).max(1) as u32;
    (bits(a) + bits(b) + 2).max(a.prec()).max(b.prec())
}

/// `B·c` for an integer coefficient vector `c`, evaluated at precision `p`.
fn combine(basis: &LatticeBasis3, c: &[Float; 3], p: u32) -> [Float; 3] {
    [0, 1, 2].map(|i| {
        let mut s = Float::new(p);
        for j in 0..3 {
            s += Float::with_val(p, &basis.m[i][j] * &c[j]);
        }
        s
    })
}

/// Shortest nonzero norm of the lattice spanned by the stored entries, with
/// a bound on how far the exact entries could move it.
///
/// LLL runs at the basis precision while tracking the integer transform;
/// the reduced vectors are then recomputed from the input at a precision
/// that holds the transform exactly, reduced again, and enumerated.
fn shortest_norm(basis: &LatticeBasis3) -> (Float, f64) {
    let p = basis.prec();
    let mut b = [0, 1, 2].map(|j| basis.column(j));
    let mut u = identity(p);
    lll(&mut b, &mut u, p);

    let coeff_bits = u.iter().flatten().map(|x| x.get_exp().unwrap_or(0).max(0) as u32).max().unwrap_or(0);
    let q = 2 * p + coeff_bits + 64;
    let mut b = u.clone().map(|c| combine(basis, &c, q));
    let mut v = identity(q);
    lll(&mut b, &mut v, q);
    let u: [[Float; 3]; 3] = [0, 1, 2].map(|k| {
        [0, 1, 2].map(|c| {
            let mut s = Float::new(q + 2 * coeff_bits + 8);
            for j in 0..3 {
                s += Float::with_val(q + 2 * coeff_bits + 8, &v[k][j] * &u[j][c]);
            }
            s
        })
    });

    let (bn, mu) = gram_schmidt(&b, q);
    let bf = bn.clone().map(|v| v.to_f64());
    let muf = [0, 1, 2].map(|i| [0, 1, 2].map(|j| mu[i][j].to_f64()));
    let mut best_sq = bf[0];
    let mut best_c = u[0].clone();
    // slack absorbs rounding in the f64 pruning bounds
    let radius = best_sq * (1.0 + 1e-9);
    let span = |rem: f64, bi: f64| if rem <= 0.0 { 0.0 } else { (rem / bi).sqrt() + 1e-9 };

    let r2 = span(radius, bf[2]);
    for x2 in (-r2.floor() as i64)..=(r2.floor() as i64) {
        let rem2 = radius - bf[2] * (x2 * x2) as f64;
        if rem2 < 0.0 {
            continue;
        }
        let c1 = -muf[2][1] * x2 as f64;
        let r1 = span(rem2, bf[1]);
        for x1 in ((c1 - r1).ceil() as i64)..=((c1 + r1).floor() as i64) {
            let y1 = x1 as f64 - c1;
            let rem1 = rem2 - bf[1] * y1 * y1;
            if rem1 < 0.0 {
                continue;
            }
            let c0 = -(muf[1][0] * x1 as f64 + muf[2][0] * x2 as f64);
            let r0 = span(rem1, bf[0]);
            for x0 in ((c0 - r0).ceil() as i64)..=((c0 + r0).floor() as i64) {
                if x0 == 0 && x1 == 0 && x2 == 0 {
                    continue;
                }
                let w: [Float; 3] = [0, 1, 2].map(|c| {
                    Float::with_val(q, &b[0][c] * x0) + Float::with_val(q, &b[1][c] * x1)
                        + Float::with_val(q, &b[2][c] * x2)
                });
                let n2 = dot(&w, &w, q).to_f64();
                if n2 < best_sq {
                    best_sq = n2;
                    best_c = [0, 1, 2].map(|c| {
                        Float::with_val(u[0][c].prec(), &u[0][c] * x0)
                            + Float::with_val(u[0][c].prec(), &u[1][c] * x1)
                            + Float::with_val(u[0][c].prec(), &u[2][c] * x2)
                    });
                }
            }
        }
    }

    let w = combine(basis, &best_c, q + 2 * coeff_bits + 8);
    let norm = Float::with_val(p, dot(&w, &w, q).sqrt());
    let entries = (0..3).map(|i| combine_err(basis, &best_c, i).powi(2)).sum::<f64>().sqrt();
    let err = entries + norm.to_f64() * basis.scale_err.exp_m1();
    (norm, err)
}

/// Relative error of a height beyond which it is not reported.
pub const HEIGHT_REL_TOL: f64 = 1.0 / (1u64 << 32) as f64;

/// `ht(L) = 1 / min{‖v‖ : 0 ≠ v ∈ L}`.
///
/// Fails with `PrecisionExhausted` when the entry errors of `basis` could
/// move the minimum by more than `HEIGHT_REL_TOL` relative, as happens when
/// a strong diagonal action amplifies the error of the embedded roots.
pub fn lattice_height(basis: &LatticeBasis3) -> Result<Float> {
    if basis.det().is_zero() {
        return Err(Error::Precondition("singular basis".into()));
    }
    let (norm, err) = shortest_norm(basis);
    if !(err <= HEIGHT_REL_TOL * norm.to_f64()) {
        return Err(Error::PrecisionExhausted {
            max_bits: basis.prec(),
            context: format!(
                "shortest vector {:.3e} is only known to ±{err:.3e}; refine the roots further",
                norm.to_f64()
            ),
        });
    }
    Ok(norm.recip())
}

/// `diag(e^{x₁}, e^{x₂}, e^{x₃})·B`.
pub fn exp_act(x: &LogVector, basis: &LatticeBasis3) -> Result<LatticeBasis3> {
    if !x.on_plane() {
        return Err(Error::InvalidInput(format!("{x} is off the trace-zero plane")));
    }
    let p = basis.prec();
    let ulp = (-(p as f64) + 4.0).exp2();
    let mut m = basis.m.clone();
    let mut entry_err = basis.entry_err;
    for (i, row) in m.iter_mut().enumerate() {
        let e = Float::with_val(p, x.x[i].exp_ref());
        if !e.is_normal() {
            return Err(Error::PrecisionExhausted {
                max_bits: p,
                context: "exp overflow in the diagonal action".into(),
            });
        }
        let ef = e.to_f64();
        for (j, v) in row.iter_mut().enumerate() {
            *v *= &e;
            entry_err[i][j] = entry_err[i][j] * ef * (1.0 + ulp) + v.to_f64().abs() * ulp;
        }
    }
    // the error of x and the rounding of e^{xᵢ} only rescale rows
    Ok(LatticeBasis3 {
        m,
        det_err: basis.det_err,
        entry_err,
        scale_err: basis.scale_err + x.err + ulp,
    })
}

/// Three vectors of `R³₀` summing to zero and spanning it.
#[derive(Clone, Debug)]
pub struct SimplexSet {
    pub alpha: [LogVector; 3],
}

/// Orthonormal basis of `R³₀`: `(1,−1,0)/√2`, `(1,1,−2)/√6`.
fn plane_coords(v: &LogVector) -> (Float, Float) {
    let p = v.prec();
    let s2 = Float::with_val(p, 2).sqrt();
    let s6 = Float::with_val(p, 6).sqrt();
    let u = Float::with_val(p, &v.x[0] - &v.x[1]) / s2;
    let w = (Float::with_val(p, &v.x[0] + &v.x[1]) - Float::with_val(p, &v.x[2] * 2u32)) / s6;
    (u, w)
}

/// Signed area of the parallelogram spanned by two plane vectors.
fn cross2(a: &LogVector, b: &LogVector) -> Float {
    let p = a.prec().max(b.prec());
    let (au, aw) = plane_coords(a);
    let (bu, bw) = plane_coords(b);
    Float::with_val(p, &au * &bw) - Float::with_val(p, &aw * &bu)
}

/// `Φ = {v₁, v₂ − v₁, −v₂}`.
pub fn make_simplex(v1: &LogVector, v2: &LogVector) -> Result<SimplexSet> {
    let area = cross2(v1, v2).abs().to_f64();
    let floor = 4.0 * (v1.err * v2.max_abs() + v2.err * v1.max_abs())
        + (-(v1.prec() as f64) + 8.0).exp2() * v1.max_abs().max(1.0) * v2.max_abs().max(1.0);
    if area <= floor {
        return Err(Error::DependentUnits(format!(
            "simplex vectors span area {area:.3e} ≤ {floor:.3e}"
        )));
    }
    Ok(SimplexSet {
        alpha: [v1.clone(), v2 - v1, -v2],
    })
}

impl SimplexSet {
    /// Covolume of `Δ_Φ = span_Z Φ` in `R³₀`.
    pub fn covolume(&self) -> Float {
        cross2(&self.alpha[0], &self.alpha[1]).abs()
    }
}

/// `conv(W_Φ)`: six vertices in counterclockwise order and `⌈W_Φ⌉`.
#[derive(Clone, Debug)]
pub struct HexDomain {
    pub vertices: Vec<LogVector>,
    pub ceil: Float,
}

impl HexDomain {
    /// Shoelace area in the orthonormal plane coordinates.
    pub fn area(&self) -> Float {
        let n = self.vertices.len();
        let p = self.vertices[0].prec();
        let mut acc = Float::new(p);
        for k in 0..n {
            acc += cross2(&self.vertices[k], &self.vertices[(k + 1) % n]);
        }
        acc.abs() / 2u32
    }

    pub fn ceil_f64(&self) -> f64 {
        self.ceil.to_f64()
    }
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

pub fn hex_domain(phi: &SimplexSet) -> HexDomain {
    let p = phi.alpha[0].prec();
    let third = Float::with_val(p, 3).recip();
    let lambdas = [
        Float::new(p),
        third.clone(),
        Float::with_val(p, &third * 2u32),
    ];
    let mut verts: Vec<(f64, LogVector)> = PERMS
        .iter()
        .map(|perm| {
            let mut x: [Float; 3] = [0, 1, 2].map(|_| Float::new(p));
            let mut err = 0.0;
            for (i, &k) in perm.iter().enumerate() {
                for (c, xc) in x.iter_mut().enumerate() {
                    *xc += Float::with_val(p, &lambdas[k] * &phi.alpha[i].x[c]);
                }
                err += phi.alpha[i].err * 2.0 / 3.0;
            }
            let v = LogVector::new(x, err);
            let (u, w) = plane_coords(&v);
            (w.to_f64().atan2(u.to_f64()), v)
        })
        .collect();
    verts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let vertices: Vec<LogVector> = verts.into_iter().map(|(_, v)| v).collect();
    let ceil = vertices
        .iter()
        .flat_map(|v| v.x.iter())
        .max_by(|a, b| a.partial_cmp(b).unwrap())
        .unwrap()
        .clone();
    HexDomain { vertices, ceil }
}

fn check_tight_params(r_big: f64, r: f64) -> Result<()> {
    if !(r_big >= 1.0) || !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParams(format!(
            "tightness needs R ≥ 1 and 0 ≤ r ≤ 1 (R = {r_big}, r = {r})"
        )));
    }
    Ok(())
}

/// `exp(r⌈W_Φ⌉) ≤ R·ht(L)`, failing closed within a relative slack of `2^-40`.
pub fn check_tight(hex: &HexDomain, ht: &Float, r_big: f64, r: f64) -> Result<bool> {
    check_tight_params(r_big, r)?;
    let p = hex.ceil.prec();
    let lhs = Float::with_val_round(p, &hex.ceil * r, Round::Up).0.exp();
    let lhs = lhs * (1.0 + (-40f64).exp2());
    let rhs = Float::with_val_round(p, ht * r_big, Round::Down).0;
    Ok(lhs <= rhs)
}

/// Largest `r ∈ [0, 1]` for which the order is `(R, r)`-tight.
pub fn tight_r(hex: &HexDomain, ht: &Float, r_big: f64) -> f64 {
    let c = hex.ceil_f64();
    if c <= 0.0 {
        return 1.0;
    }
    let l = (Float::with_val(ht.prec(), ht * r_big)).ln().to_f64();
    (l / c).clamp(0.0, 1.0)
}

/// `(2/3)(1 − r) + (1/3 − r)(ã + b̃)`.
pub fn tightness_exponent(a_tilde: f64, b_tilde: f64, r: f64) -> f64 {
    2.0 / 3.0 * (1.0 - r) + (1.0 / 3.0 - r) * (a_tilde + b_tilde)
}

/// Integer coefficients expressing `v` in the basis `(u₁, u₂)`, if they exist.
fn integer_coords(v: &LogVector, u1: &LogVector, u2: &LogVector) -> Option<(i64, i64)> {
    let d = cross2(u1, u2).to_f64();
    let c1 = cross2(v, u2).to_f64() / d;
    let c2 = cross2(u1, v).to_f64() / d;
    let (r1, r2) = (c1.round(), c2.round());
    let ok = (c1 - r1).abs() < 1e-6 && (c2 - r2).abs() < 1e-6;
    ok.then_some((r1 as i64, r2 as i64))
}

/// Deterministic sample of the hexagon: each of the six fan triangles from
/// the centre is cut into `m²` congruent pieces whose centroids are the
/// sample points, weighted by the fan triangle's area.
pub fn hex_grid(hex: &HexDomain, samples: usize) -> Vec<(LogVector, f64)> {
    let m = ((samples.max(1) as f64 / 6.0).sqrt().ceil() as u64).max(1);
    let p = hex.vertices[0].prec();
    let n = hex.vertices.len();
    let mut out = Vec::with_capacity(6 * (m * m) as usize);
    let denom = (3 * m) as u32;
    for k in 0..n {
        let a = &hex.vertices[k];
        let b = &hex.vertices[(k + 1) % n];
        let w = cross2(a, b).abs().to_f64() / 2.0 / (m * m) as f64;
        let mut push = |i: u64, j: u64| {
            let s = Float::with_val(p, i) / denom;
            let t = Float::with_val(p, j) / denom;
            let x = [0, 1, 2].map(|c| Float::with_val(p, &s * &a.x[c]) + Float::with_val(p, &t * &b.x[c]));
            out.push((LogVector::new(x, a.err.max(b.err)), w));
        };
        for i in 0..m {
            for j in 0..m - i {
                push(3 * i + 1, 3 * j + 1);
                if i + j + 2 <= m {
                    push(3 * i + 2, 3 * j + 2);
                }
            }
        }
    }
    out
}

/// Area-weighted fraction of the grid over `conv(W_Φ)` where
/// `ht(exp(x)·L) > H`.
pub fn mass_above_height(order: &CubicOrderData, phi: &SimplexSet, h: f64, samples: usize) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidParams("samples must be ≥ 1".into()));
    }
    let logs = order.unit_logs()?;
    if logs.len() < 2 {
        return Err(Error::InvalidInput("order lists fewer than two verified units".into()));
    }
    for a in &phi.alpha {
        if integer_coords(a, &logs[0], &logs[1]).is_none() {
            return Err(Error::InvalidInput(format!(
                "simplex vector {a} is not in the lattice of the verified units"
            )));
        }
    }
    let base = lll_reduce(&embed_order_lattice(order)?);
    let hex = hex_domain(phi);
    let grid = hex_grid(&hex, samples);
    let hits: Vec<Result<(bool, f64)>> = grid
        .par_iter()
        .map(|(x, w)| {
            let ht = lattice_height(&exp_act(x, &base)?)?;
            Ok((ht > h, *w))
        })
        .collect();
    let mut above = 0.0;
    let mut total = 0.0;
    for r in hits {
        let (hit, w) = r?;
        total += w;
        if hit {
            above += w;
        }
    }
    Ok(if total > 0.0 { above / total } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::MonicCubic;
    use crate::roots::PrecisionPolicy;
    use crate::units::build_order;
    use proptest::prelude::*;
    use rug::Integer;

    const P: u32 = 200;

    fn lv(a: f64, b: f64) -> LogVector {
        let x = Float::with_val(P, a);
        let y = Float::with_val(P, b);
        let z = -Float::with_val(P, &x + &y);
        LogVector::new([x, y, z], 0.0)
    }

    fn regular() -> SimplexSet {
        make_simplex(&lv(-1.0, 0.0), &lv(0.0, -1.0)).unwrap()
    }

    fn int(v: i64) -> Integer {
        Integer::from(v)
    }

    /// Brute-force shortest vector. Coefficients satisfy `|xᵢ| ≤ ‖row_i(B⁻¹)‖·λ`
    /// for any upper bound `λ`, so the box below is complete.
    fn brute_shortest(b: &LatticeBasis3) -> f64 {
        let m = b.m.clone().map(|r| r.map(|v| v.to_f64()));
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        let cof = |i: usize, j: usize| {
            let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
            let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
            m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
        };
        // inverse entry (j, i) is cof(i, j) / det
        let inv_row = |j: usize| ((0..3).map(|i| cof(i, j).powi(2)).sum::<f64>()).sqrt() / det.abs();
        let col = |j: usize| (0..3).map(|i| m[i][j].powi(2)).sum::<f64>().sqrt();
        let lam = col(0).min(col(1)).min(col(2));
        let k: Vec<i64> = (0..3).map(|j| (inv_row(j) * lam + 1e-9).floor() as i64).collect();
        let mut best = f64::INFINITY;
        for x in -k[0]..=k[0] {
            for y in -k[1]..=k[1] {
                for z in -k[2]..=k[2] {
                    if (x, y, z) == (0, 0, 0) {
                        continue;
                    }
                    let n: f64 = (0..3)
                        .map(|i| (x as f64 * m[i][0] + y as f64 * m[i][1] + z as f64 * m[i][2]).powi(2))
                        .sum();
                    best = best.min(n.sqrt());
                }
            }
        }
        best
    }

    #[test]
    fn height_examples() {
        let id = LatticeBasis3::from_f64(P, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!((lattice_height(&id).unwrap().to_f64() - 1.0).abs() < 1e-40);
        let d = LatticeBasis3::from_f64(P, [[2.0, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 1.0]]);
        assert!((lattice_height(&d).unwrap().to_f64() - 2.0).abs() < 1e-40);
        let skew = LatticeBasis3::from_f64(P, [[1.0, 7.0, 3.0], [0.0, 1.0, 5.0], [0.0, 0.0, 1.0]]);
        let h = lattice_height(&skew).unwrap().to_f64();
        assert!((1.0 / h - brute_shortest(&skew)).abs() < 1e-12);
    }

    #[test]
    fn order_lattice_is_unimodular() {
        let f = MonicCubic::new(0, -3, -1);
        let o = build_order(&f, &[], &PrecisionPolicy::default()).unwrap();
        let l = embed_order_lattice(&o).unwrap();
        assert!((l.det().abs() - 1u32).abs().to_f64() < 1e-50);
        let h = lattice_height(&l).unwrap().to_f64();
        assert!(h >= 81f64.powf(1.0 / 6.0) / 3f64.sqrt() - 1e-12);
        // D^{-1/6}(1,1,1) is the first column
        let c = l.column(0).map(|v| v.to_f64());
        assert!((c[0] - 81f64.powf(-1.0 / 6.0)).abs() < 1e-15 && c[0] == c[1] && c[1] == c[2]);
    }

    #[test]
    fn simplest_cubic_height_bound() {
        let f = MonicCubic::simplest(&int(1000));
        let o = build_order(&f, &[], &PrecisionPolicy::default()).unwrap();
        let l = embed_order_lattice(&o).unwrap();
        let d = o.disc.to_f64();
        assert!(lattice_height(&l).unwrap().to_f64() >= d.powf(1.0 / 6.0) / 3f64.sqrt() * (1.0 - 1e-12));
    }

    #[test]
    fn exp_act_preserves_det() {
        let b = LatticeBasis3::from_f64(P, [[1.0, 2.0, 0.5], [0.0, 1.0, 3.0], [1.0, 0.0, 1.0]]);
        let zero = lv(0.0, 0.0);
        let same = exp_act(&zero, &b).unwrap();
        assert_eq!(same.det(), b.det());
        let moved = exp_act(&lv(1.3, -0.4), &b).unwrap();
        assert!(Float::with_val(P, moved.det() - b.det()).abs().to_f64() < 1e-50);
        let off = LogVector::from_f64(P, [1.0, 1.0, 1.0]);
        assert!(exp_act(&off, &b).is_err());
    }

    fn shifted_height(pol: &PrecisionPolicy, m: i64, n: i64) -> Result<Float> {
        let f = MonicCubic::simplest(&int(987_654_321));
        let o = build_order(&f, &[(int(1), int(0)), (int(1), int(-1))], pol).unwrap();
        let v = o.unit_logs().unwrap();
        let p = o.working_prec();
        let x = [0, 1, 2].map(|k| Float::with_val(p, &v[0].x[k] * m) + Float::with_val(p, &v[1].x[k] * n));
        let u = LogVector::new(x, v[0].err * m.abs() as f64 + v[1].err * n.abs() as f64);
        lattice_height(&exp_act(&u, &embed_order_lattice(&o).unwrap())?)
    }

    #[test]
    fn unit_shifts_keep_the_height() {
        let fine = PrecisionPolicy::new(512, 4096).unwrap();
        let h0 = shifted_height(&fine, 0, 0).unwrap();
        for (m, n) in [(1, 0), (3, 0), (3, 3), (-3, 3)] {
            let h = shifted_height(&fine, m, n).unwrap();
            assert!((Float::with_val(P, &h - &h0) / &h0).abs().to_f64() < 1e-40, "{m} {n}");
        }
    }

    #[test]
    fn underdetermined_height_is_refused() {
        // e^{±124} amplifies the 192-bit root error past the shortest vector
        let pol = PrecisionPolicy::default();
        assert!(shifted_height(&pol, 1, 0).is_ok());
        assert!(matches!(shifted_height(&pol, 3, 3), Err(Error::PrecisionExhausted { .. })));
    }

    #[test]
    fn simplex_examples() {
        let phi = regular();
        let expect = [[-1.0, 0.0, 1.0], [1.0, -1.0, 0.0], [0.0, 1.0, -1.0]];
        for (a, e) in phi.alpha.iter().zip(expect) {
            assert_eq!(a.to_f64(), e);
        }
        assert!(matches!(
            make_simplex(&lv(-1.0, 0.0), &lv(-2.0, 0.0)),
            Err(Error::DependentUnits(_))
        ));
    }

    #[test]
    fn hex_examples() {
        let hex = hex_domain(&regular());
        assert_eq!(hex.vertices.len(), 6);
        assert!((hex.ceil_f64() - 2.0 / 3.0).abs() < 1e-50);
        let scaled = make_simplex(&lv(-1.0, 0.0).scaled(5), &lv(0.0, -1.0).scaled(5)).unwrap();
        assert!((hex_domain(&scaled).ceil_f64() - 10.0 / 3.0).abs() < 1e-40);
        // central symmetry
        let mut sum = [0.0; 3];
        for v in &hex.vertices {
            for (s, x) in sum.iter_mut().zip(v.to_f64()) {
                *s += x;
            }
        }
        assert!(sum.iter().all(|s| s.abs() < 1e-12));
    }

    #[test]
    fn tightness_examples() {
        assert!((tightness_exponent(0.0, 0.0, 0.9) - 2.0 / 30.0).abs() < 1e-15);
        for (a, b) in [(0.1, 0.5), (0.3, 0.9), (0.0, 0.0)] {
            assert!((tightness_exponent(a, b, 1.0 / 3.0) - 4.0 / 9.0).abs() < 1e-15);
        }
        assert!((tightness_exponent(1.0, 1.0, 1.0) + 4.0 / 3.0).abs() < 1e-15);
        let hex = hex_domain(&regular());
        let ht = Float::with_val(P, 1);
        // equality is not certified
        assert!(!check_tight(&hex, &ht, 1.0, 0.0).unwrap());
        assert!(check_tight(&hex, &Float::with_val(P, 1.001), 1.0, 0.0).unwrap());
        assert!(!check_tight(&hex, &ht, 1.0, 1.0).unwrap());
        assert!(check_tight(&hex, &ht, 2.0, 1.0).unwrap());
        assert!(check_tight(&hex, &ht, 0.5, 0.0).is_err());
        let e3 = Float::with_val(P, Float::with_val(P, 3).recip().exp_ref());
        assert!((tight_r(&hex, &e3, 1.0) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn grid_covers_hexagon() {
        let hex = hex_domain(&regular());
        for samples in [1usize, 6, 100, 1000] {
            let g = hex_grid(&hex, samples);
            assert!(g.len() >= samples);
            let w: f64 = g.iter().map(|(_, w)| w).sum();
            assert!((w - hex.area().to_f64()).abs() < 1e-12);
        }
    }

    #[test]
    fn mass_requires_unit_simplex() {
        let f = MonicCubic::simplest(&int(20));
        let o = build_order(&f, &[(int(1), int(0)), (int(1), int(-1))], &PrecisionPolicy::default()).unwrap();
        let bogus = make_simplex(&lv(-0.7, 0.1), &lv(0.2, -0.9)).unwrap();
        assert!(matches!(
            mass_above_height(&o, &bogus, 10.0, 10),
            Err(Error::InvalidInput(_))
        ));
        let v = o.unit_logs().unwrap();
        let phi = make_simplex(&v[0], &v[1]).unwrap();
        let f0 = mass_above_height(&o, &phi, 1e9, 60).unwrap();
        assert_eq!(f0, 0.0);
        let f1 = mass_above_height(&o, &phi, 0.5, 60).unwrap();
        assert_eq!(f1, 1.0);
    }

    fn plane_vec() -> impl Strategy<Value = LogVector> {
        (-8.0f64..8.0, -8.0f64..8.0).prop_map(|(a, b)| lv(a, b))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn hexagon_area_is_covolume(v1 in plane_vec(), v2 in plane_vec()) {
            let phi = match make_simplex(&v1, &v2) { Ok(p) => p, Err(_) => return Ok(()) };
            let hex = hex_domain(&phi);
            let a = hex.area();
            let c = phi.covolume();
            prop_assume!(c.to_f64() > 1e-6);
            let rel = Float::with_val(P, &a / &c) - 1u32;
            prop_assert!(rel.abs().to_f64() < (-60f64).exp2());
        }

        #[test]
        fn height_matches_brute_force(m in prop::array::uniform9(-3i32..=3)) {
            let rows = [
                [m[0] as f64 + 2.5, m[1] as f64, m[2] as f64],
                [m[3] as f64, m[4] as f64 + 1.5, m[5] as f64],
                [m[6] as f64, m[7] as f64, m[8] as f64 + 3.0],
            ];
            let b = LatticeBasis3::from_f64(P, rows);
            prop_assume!(b.det().to_f64().abs() > 0.5);
            let h = lattice_height(&b).unwrap().to_f64();
            prop_assert!((1.0 / h - brute_shortest(&b)).abs() < 1e-9);
        }
    }
}
