//! Scripted limit studies: exponent sweeps, the approach to `pq = 1`, the
//! constant `𝔠`, the limit `p, q → 0`, continuation to `p = 0`, and upper
//! bounds for the minimax levels of the dual functional.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::dual::{gamma_scale, reconstruct_solution, run_dual, DualPair, SolverOptions};
use crate::error::{Error, Result};
use crate::exponents::{ExponentPair, Region};
use crate::green::Green;
use crate::grid::{DomainMode, RadialGrid};
use crate::sign_limit::{solve_scalar_sign, solve_sign_system};

/// One exponent as a function of `t ∈ [0, 1]`: fixed or linear between two values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub start: f64,
    pub end: f64,
}

impl Component {
    pub fn at(&self, t: f64) -> f64 {
        self.start + (self.end - self.start) * t
    }
}

/// Straight path `t ↦ (p(t), q(t))`, written as `p:0.5..3,q:1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub p: Component,
    pub q: Component,
}

impl PathSpec {
    pub fn at(&self, t: f64) -> (f64, f64) {
        (self.p.at(t), self.q.at(t))
    }
}

fn parse_component(s: &str) -> Result<Component> {
    let num =
        |x: &str| x.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad number {x:?} in path")));
    match s.split_once("..") {
        Some((a, b)) => Ok(Component { start: num(a)?, end: num(b)? }),
        None => {
            let v = num(s)?;
            Ok(Component { start: v, end: v })
        }
    }
}

impl FromStr for PathSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = None;
        let mut q = None;
        for part in s.split(',') {
            let (key, value) = part
                .split_once(':')
                .ok_or_else(|| Error::InvalidArgument(format!("path entry {part:?} is not key:value")))?;
            let c = parse_component(value)?;
            match key.trim() {
                "p" if p.is_none() => p = Some(c),
                "q" if q.is_none() => q = Some(c),
                k => return Err(Error::InvalidArgument(format!("unexpected path key {k:?}"))),
            }
        }
        match (p, q) {
            (Some(p), Some(q)) => Ok(PathSpec { p, q }),
            _ => Err(Error::InvalidArgument("path needs both p and q".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub intervals: usize,
    pub mode: DomainMode,
    pub length: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<RadialGrid> {
        RadialGrid::with_length(self.dim, self.intervals, self.mode, self.length)
    }

    pub fn interval(intervals: usize, length: f64) -> Self {
        Self { dim: 1, intervals, mode: DomainMode::Interval, length }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub path: PathSpec,
    /// Sample parameters `t`, sorted on construction.
    pub samples: Vec<f64>,
    pub grid: GridSpec,
    pub warm_start: bool,
}

impl SweepSpec {
    /// `count` equispaced samples of `t ∈ [0, 1]`.
    pub fn uniform(path: PathSpec, count: usize, grid: GridSpec, warm_start: bool) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidArgument("sweep needs at least one sample".into()));
        }
        let samples = if count == 1 { vec![0.0] } else { (0..count).map(|i| i as f64 / (count - 1) as f64).collect() };
        Ok(Self { path, samples, grid, warm_start })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub t: f64,
    pub p: f64,
    pub q: f64,
    pub region: Option<Region>,
    #[serde(rename = "Lambda")]
    pub lambda: Option<f64>,
    #[serde(rename = "D")]
    pub d: Option<f64>,
    pub c: Option<f64>,
    pub u_max: Option<f64>,
    pub v_max: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub error: Option<String>,
}

impl SweepRecord {
    fn failed(t: f64, p: f64, q: f64, region: Option<Region>, err: Error) -> Self {
        Self {
            t,
            p,
            q,
            region,
            lambda: None,
            d: None,
            c: None,
            u_max: None,
            v_max: None,
            iterations: 0,
            converged: false,
            error: Some(err.to_string()),
        }
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn sample_point(
    t: f64,
    spec: &SweepSpec,
    grid: &RadialGrid,
    opts: &SolverOptions,
    warm: Option<&DualPair>,
) -> (SweepRecord, Option<DualPair>) {
    let (p, q) = spec.path.at(t);
    let e = match ExponentPair::new(p, q, grid.dim()) {
        Ok(e) => e,
        Err(err) => return (SweepRecord::failed(t, p, q, None, err), None),
    };
    let region = e.region();
    if p == 0.0 {
        return match solve_sign_system(q, grid, opts) {
            Ok(rep) => (
                SweepRecord {
                    t,
                    p,
                    q,
                    region: Some(region),
                    lambda: Some(rep.lambda),
                    d: Some(rep.d),
                    c: Some(rep.c),
                    u_max: Some(sup(&rep.u)),
                    v_max: Some(sup(&rep.v)),
                    iterations: rep.iterations,
                    converged: rep.converged,
                    error: None,
                },
                None,
            ),
            Err(err) => (SweepRecord::failed(t, p, q, Some(region), err), None),
        };
    }
    let dp = match run_dual(&e, grid, opts, warm) {
        Ok(dp) => dp,
        Err(err) => return (SweepRecord::failed(t, p, q, Some(region), err), None),
    };
    let mut rec = SweepRecord {
        t,
        p,
        q,
        region: Some(region),
        lambda: Some(dp.lambda()),
        d: Some(dp.d_estimate),
        c: None,
        u_max: None,
        v_max: None,
        iterations: dp.iterations,
        converged: dp.converged,
        error: (!dp.converged).then(|| "dual iteration did not converge".to_string()),
    };
    if region != Region::Hyperbola {
        match reconstruct_solution(&e, grid, &dp, opts) {
            Ok(rep) => {
                rec.c = Some(rep.c);
                rec.u_max = Some(sup(&rep.u));
                rec.v_max = Some(sup(&rep.v));
            }
            Err(err) => rec.error = Some(err.to_string()),
        }
    }
    (rec, Some(dp))
}

/// Solve along the path. Warm-started sweeps run in order; cold sweeps run in
/// parallel on the current rayon pool. Failures are recorded per sample.
pub fn run_sweep(spec: &SweepSpec, opts: &SolverOptions) -> Result<Vec<SweepRecord>> {
    let grid = spec.grid.build()?;
    let mut ts = spec.samples.clone();
    if ts.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("non-finite sample".into()));
    }
    ts.sort_by(f64::total_cmp);
    if spec.warm_start {
        let mut warm: Option<DualPair> = None;
        let mut out = Vec::with_capacity(ts.len());
        for &t in &ts {
            let (rec, dp) = sample_point(t, spec, &grid, opts, warm.as_ref());
            if dp.as_ref().is_some_and(|d| d.converged) {
                warm = dp;
            }
            out.push(rec);
        }
        Ok(out)
    } else {
        Ok(ts.par_iter().map(|&t| sample_point(t, spec, &grid, opts, None).0).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityStats {
    pub max_jump: f64,
    pub median_jump: f64,
    /// `max_jump / median_jump`.
    pub ratio: f64,
}

/// Neighbor differences of `Λ` along a sweep.
pub fn continuity_stats(records: &[SweepRecord]) -> Option<ContinuityStats> {
    let values: Vec<f64> = records.iter().map(|r| r.lambda).collect::<Option<_>>()?;
    let mut jumps: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    if jumps.is_empty() {
        return None;
    }
    let max_jump = jumps.iter().cloned().fold(0.0, f64::max);
    jumps.sort_by(f64::total_cmp);
    let m = jumps.len();
    let median_jump = if m % 2 == 1 { jumps[m / 2] } else { 0.5 * (jumps[m / 2 - 1] + jumps[m / 2]) };
    Some(ContinuityStats { max_jump, median_jump, ratio: max_jump / median_jump })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Above,
    Below,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Diverging,
    Vanishing,
    Inconclusive,
}

/// Trend of `|x|` along samples ordered towards the limit.
pub fn trend_of(values: &[f64]) -> Trend {
    let a: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    if a.len() < 2 || a.iter().any(|v| !v.is_finite()) {
        return Trend::Inconclusive;
    }
    if a.windows(2).all(|w| w[1] > w[0]) {
        Trend::Diverging
    } else if a.windows(2).all(|w| w[1] < w[0]) {
        Trend::Vanishing
    } else {
        Trend::Inconclusive
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PqSample {
    /// `pq - 1`.
    pub offset: f64,
    pub p: f64,
    pub q: f64,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    pub c: f64,
    pub u_max: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PqTrendReport {
    pub q: f64,
    pub length: f64,
    pub side: Side,
    pub mu1: f64,
    pub samples: Vec<PqSample>,
    pub c_trend: Trend,
    pub u_trend: Trend,
    /// `|c|` at the last sample over `|c|` at the first.
    pub c_growth: f64,
    pub expected: Trend,
    pub consistent: bool,
}

pub const PQ_OFFSETS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// `c` and `‖u‖_∞` as `pq → 1` from one side on `(0, L)`, compared with the
/// direction predicted by the sign of `μ_{1,q} - 1`.
pub fn classify_pq_to_1(
    q: f64,
    side: Side,
    length: f64,
    intervals: usize,
    opts: &SolverOptions,
) -> Result<PqTrendReport> {
    let grid = GridSpec::interval(intervals, length).build()?;
    let mu1 = crate::dual::mu1(q, &grid, opts)?;
    if (mu1 - 1.0).abs() < 1e-8 {
        return Err(Error::InvalidArgument("μ₁ = 1: the trend is decided by the path".into()));
    }
    let sign = match side {
        Side::Above => 1.0,
        Side::Below => -1.0,
    };
    let mut samples = vec![];
    let mut warm: Option<DualPair> = None;
    for s in PQ_OFFSETS {
        let p = (1.0 + sign * s) / q;
        let e = ExponentPair::new(p, q, 1)?;
        let dp = run_dual(&e, &grid, opts, warm.as_ref())?;
        let rep = reconstruct_solution(&e, &grid, &dp, opts)?;
        samples.push(PqSample {
            offset: sign * s,
            p,
            q,
            lambda: rep.lambda,
            c: rep.c,
            u_max: sup(&rep.u),
            converged: rep.converged,
        });
        warm = Some(dp);
    }
    let cs: Vec<f64> = samples.iter().map(|s| s.c).collect();
    let us: Vec<f64> = samples.iter().map(|s| s.u_max).collect();
    let c_trend = trend_of(&cs);
    let u_trend = trend_of(&us);
    let c_growth = cs.last().unwrap().abs() / cs[0].abs();
    let expected = match (mu1 > 1.0, side) {
        (true, Side::Above) | (false, Side::Below) => Trend::Diverging,
        _ => Trend::Vanishing,
    };
    let consistent = c_trend == expected && u_trend == expected;
    Ok(PqTrendReport { q, length, side, mu1, samples, c_trend, u_trend, c_growth, expected, consistent })
}

/// `exp(-∫φ₁² ln φ₁²)` on `(0, π)` with `φ₁ = √(2/π) cos r`, by quadrature.
pub fn frak_c_reference(intervals: usize) -> Result<f64> {
    let grid = GridSpec::interval(intervals, std::f64::consts::PI).build()?;
    let k = 2.0 / std::f64::consts::PI;
    let vals = grid.sample(|r| {
        let s = k * r.cos().powi(2);
        if s > 0.0 {
            s * s.ln()
        } else {
            0.0
        }
    });
    Ok((-grid.integrate(&vals)).exp())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrakCSample {
    pub t: f64,
    pub p: f64,
    pub q: f64,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    /// `ln Λ / (pq - 1)`.
    pub log_ratio: f64,
    /// `c / (pq - 1)`.
    pub c_ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrakCReport {
    pub samples: Vec<FrakCSample>,
    /// First-order Richardson value from the two smallest `t`.
    pub frak_c: f64,
    /// Second-order value from all three samples.
    pub frak_c_second: f64,
    pub reference: f64,
    /// `e'(0)` of the path.
    pub path_derivative: f64,
    /// `c/(pq-1)` at the smallest `t` over `𝔠/4`.
    pub level_ratio: f64,
}

pub const FRAK_C_SAMPLES: [f64; 3] = [0.1, 0.05, 0.025];

/// Extrapolated `𝔠 = lim Λ^{(p+1)(q+1)/(pq-1)}` on `(0, π)` along a path
/// through `(1, 1)` with `e'(0) ≠ 0`.
pub fn estimate_frak_c(
    path: &dyn Fn(f64) -> (f64, f64),
    intervals: usize,
    opts: &SolverOptions,
) -> Result<FrakCReport> {
    let (p0, q0) = path(0.0);
    if (p0 - 1.0).abs() > 1e-12 || (q0 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("path must start at (1, 1), got ({p0}, {q0})")));
    }
    let e = |t: f64| {
        let (p, q) = path(t);
        p * q - 1.0
    };
    let h = 1e-5;
    let de = (e(h) - e(-h).min(f64::MAX)) / (2.0 * h);
    let de = if de.is_finite() { de } else { e(h) / h };
    if de.abs() < 1e-8 {
        return Err(Error::InvalidArgument("path has e'(0) = 0".into()));
    }
    let grid = GridSpec::interval(intervals, std::f64::consts::PI).build()?;
    let mut samples = vec![];
    let mut warm: Option<DualPair> = None;
    for t in FRAK_C_SAMPLES {
        let (p, q) = path(t);
        let ep = ExponentPair::new(p, q, 1)?;
        let dp = run_dual(&ep, &grid, opts, warm.as_ref())?;
        if !dp.converged {
            return Err(Error::NonConvergence {
                iterations: dp.iterations,
                estimate: dp.d_estimate,
                oscillation: dp.oscillation,
            });
        }
        let rep = reconstruct_solution(&ep, &grid, &dp, opts)?;
        let off = p * q - 1.0;
        samples.push(FrakCSample {
            t,
            p,
            q,
            lambda: rep.lambda,
            log_ratio: rep.lambda.ln() / off,
            c_ratio: rep.c / off,
        });
        warm = Some(dp);
    }
    let y: Vec<f64> = samples.iter().map(|s| s.log_ratio).collect();
    let r1 = 2.0 * y[2] - y[1];
    let r1_coarse = 2.0 * y[1] - y[0];
    let r2 = (4.0 * r1 - r1_coarse) / 3.0;
    let frak_c = (4.0 * r1).exp();
    let reference = frak_c_reference(20_000)?;
    Ok(FrakCReport {
        level_ratio: samples[2].c_ratio / (frak_c / 4.0),
        samples,
        frak_c,
        frak_c_second: (4.0 * r2).exp(),
        reference,
        path_derivative: de,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PqZeroSample {
    pub p: f64,
    pub c: f64,
    /// `c_{p,p} / (2c₀)`.
    pub ratio: f64,
    /// `‖u - v‖_∞ / ‖u‖_∞`.
    pub uv_gap: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PqZeroReport {
    pub c0: f64,
    pub samples: Vec<PqZeroSample>,
    /// Ratios move monotonically towards 1.
    pub monotone: bool,
}

pub const PQ_ZERO_SAMPLES: [f64; 4] = [0.1, 0.05, 0.02, 0.01];

/// `c_{p,p}` against `2c₀` on the unit interval.
pub fn check_pq_to_0(intervals: usize, opts: &SolverOptions) -> Result<PqZeroReport> {
    let grid = GridSpec::interval(intervals, 1.0).build()?;
    let c0 = solve_scalar_sign(&grid, opts)?.c0;
    let mut samples = vec![];
    let mut warm: Option<DualPair> = None;
    for p in PQ_ZERO_SAMPLES {
        let e = ExponentPair::new(p, p, 1)?;
        let dp = run_dual(&e, &grid, opts, warm.as_ref())?;
        let rep = reconstruct_solution(&e, &grid, &dp, opts)?;
        let gap = rep.u.iter().zip(&rep.v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / sup(&rep.u);
        samples.push(PqZeroSample { p, c: rep.c, ratio: rep.c / (2.0 * c0), uv_gap: gap });
        warm = Some(dp);
    }
    let dist: Vec<f64> = samples.iter().map(|s| (s.ratio - 1.0).abs()).collect();
    let monotone = dist.windows(2).all(|w| w[1] <= w[0]);
    Ok(PqZeroReport { c0, samples, monotone })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuationReport {
    pub q: f64,
    /// `(p, Λ_{p,q})`.
    pub samples: Vec<(f64, f64)>,
    pub extrapolated: f64,
    pub direct: f64,
    pub relative_gap: f64,
}

pub const CONTINUATION_SAMPLES: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// Value at `x = 0` of the interpolating polynomial through `(xs, ys)`.
pub fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    for m in 1..xs.len() {
        for i in 0..xs.len() - m {
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i]);
        }
    }
    p[0]
}

/// `Λ_{p,q}` for small `p` extrapolated to `p = 0`, next to the direct `Λ_{0,q}`.
pub fn continuation_to_sign(q: f64, grid: &RadialGrid, opts: &SolverOptions) -> Result<ContinuationReport> {
    let mut samples = vec![];
    let mut warm: Option<DualPair> = None;
    for p in CONTINUATION_SAMPLES {
        let e = ExponentPair::new(p, q, grid.dim())?;
        let dp = run_dual(&e, grid, opts, warm.as_ref())?;
        if !dp.converged {
            return Err(Error::NonConvergence {
                iterations: dp.iterations,
                estimate: dp.d_estimate,
                oscillation: dp.oscillation,
            });
        }
        samples.push((p, dp.lambda()));
        warm = Some(dp);
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let extrapolated = neville_at_zero(&xs, &ys);
    let direct = solve_sign_system(q, grid, opts)?.lambda;
    Ok(ContinuationReport { q, samples, extrapolated, direct, relative_gap: (extrapolated - direct).abs() / direct })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsBound {
    pub k: usize,
    /// `sup Φ(f, f)` over the unit γ-sphere of the first `k` modes.
    pub diagonal: f64,
    /// Upper bound for `c_k`.
    pub bound: f64,
}

struct Diagonal<'a> {
    green: Green<'a>,
    modes: Vec<Vec<f64>>,
    alpha: f64,
    beta: f64,
    g1: f64,
    g2: f64,
}

impl Diagonal<'_> {
    /// `Φ(f, f) = -∫fKf` at the γ-sphere point in direction `a`.
    fn value(&self, a: &[f64]) -> f64 {
        let grid = self.green.grid();
        let mut f = vec![0.0; grid.len()];
        for (c, m) in a.iter().zip(&self.modes) {
            f.iter_mut().zip(m).for_each(|(x, y)| *x += c * y);
        }
        let na = grid.lp_norm_unchecked(&f, self.alpha).powf(self.alpha);
        let nb = grid.lp_norm_unchecked(&f, self.beta).powf(self.beta);
        if na == 0.0 {
            return f64::NEG_INFINITY;
        }
        let s = gamma_scale(self.g1 * na, self.alpha, self.g2 * nb, self.beta);
        let kf = self.green.solve_unchecked(&f);
        let q = grid.integrate(&f.iter().zip(&kf).map(|(x, y)| x * y).collect::<Vec<_>>());
        -s * s * q
    }

    fn ascend(&self, mut a: Vec<f64>) -> f64 {
        let unit = |a: &mut Vec<f64>| {
            let n = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            a.iter_mut().for_each(|x| *x /= n);
        };
        unit(&mut a);
        let mut val = self.value(&a);
        let mut step = 0.1;
        for _ in 0..2000 {
            let h = 1e-6;
            let grad: Vec<f64> = (0..a.len())
                .map(|i| {
                    let mut ap = a.clone();
                    let mut am = a.clone();
                    ap[i] += h;
                    am[i] -= h;
                    (self.value(&ap) - self.value(&am)) / (2.0 * h)
                })
                .collect();
            let dot: f64 = grad.iter().zip(&a).map(|(g, x)| g * x).sum();
            let tangent: Vec<f64> = grad.iter().zip(&a).map(|(g, x)| g - dot * x).collect();
            let slope: f64 = tangent.iter().map(|x| x * x).sum();
            if slope < 1e-28 {
                break;
            }
            let mut moved = false;
            step *= 2.0;
            while step > 1e-14 {
                let mut b: Vec<f64> = a.iter().zip(&tangent).map(|(x, t)| x + step * t).collect();
                unit(&mut b);
                let vb = self.value(&b);
                if vb >= val + 1e-4 * step * slope {
                    a = b;
                    val = vb;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        val
    }
}

/// Upper bounds for the minimax levels `c_1, …, c_{k_max}` of `-∫fKg` on the
/// γ-sphere, from the diagonal sets spanned by the first `k` cosine modes of
/// `(0, L)`. `c_1 = -D_{p,q}` is attained by the maximizer pair.
pub fn ls_upper_bounds(
    e: &ExponentPair,
    k_max: usize,
    grid: &RadialGrid,
    restarts: usize,
    opts: &SolverOptions,
) -> Result<Vec<LsBound>> {
    if grid.dim() != 1 {
        return Err(Error::InvalidArgument("multiplicity bounds use interval modes".into()));
    }
    if !(1..=8).contains(&k_max) {
        return Err(Error::InvalidArgument(format!("k_max must be in 1..=8, got {k_max}")));
    }
    if e.region() != Region::Subcritical {
        return Err(Error::InvalidExponents(format!("({}, {}) is not subcritical off the hyperbola", e.p, e.q)));
    }
    let l = grid.length();
    let modes: Vec<Vec<f64>> =
        (1..=k_max).map(|i| grid.sample(|r| (i as f64 * std::f64::consts::PI * r / l).cos())).collect();
    let diag = Diagonal {
        green: Green::new(grid)?,
        modes,
        alpha: e.alpha().expect("p > 0"),
        beta: e.beta(),
        g1: e.gamma1().unwrap(),
        g2: e.gamma2().unwrap(),
    };
    let dp = run_dual(e, grid, opts, None)?;
    if !dp.converged {
        return Err(Error::NonConvergence {
            iterations: dp.iterations,
            estimate: dp.d_estimate,
            oscillation: dp.oscillation,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out: Vec<LsBound> = vec![];
    let mut best_dir: Vec<f64> = vec![];
    for k in 1..=k_max {
        let mut starts: Vec<Vec<f64>> = vec![];
        let mut embedded = best_dir.clone();
        embedded.push(0.0);
        if k > 1 {
            starts.push(embedded.iter().enumerate().map(|(i, x)| if i == k - 1 { 1e-3 } else { *x }).collect());
        }
        let mut unit_k = vec![0.0; k];
        unit_k[k - 1] = 1.0;
        starts.push(unit_k);
        while starts.len() < restarts.max(1) + 1 {
            starts.push((0..k).map(|_| rng.gen_range(-1.0..1.0)).collect());
        }
        let mut best = f64::NEG_INFINITY;
        let mut arg = vec![];
        for s in starts {
            let v = diag.ascend(s.clone());
            if v > best {
                best = v;
                arg = s;
            }
        }
        if k > 1 {
            // A_{k-1} ⊂ A_k
            best = best.max(out[k - 2].diagonal);
        }
        best_dir = arg;
        let bound = if k == 1 { best.min(-dp.d_estimate) } else { best };
        out.push(LsBound { k, diagonal: best, bound });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_paths() {
        let p: PathSpec = "p:0.5..3,q:1".parse().unwrap();
        assert_eq!(p.at(0.0), (0.5, 1.0));
        assert_eq!(p.at(1.0), (3.0, 1.0));
        assert!("p:1".parse::<PathSpec>().is_err());
        assert!("p:1,q:x".parse::<PathSpec>().is_err());
        assert!("p:1,q:1,r:2".parse::<PathSpec>().is_err());
    }

    #[test]
    fn neville_reproduces_cubics() {
        let xs = [0.2, 0.1, 0.05, 0.025];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - x + 2.0 * x * x - 5.0 * x * x * x).collect();
        assert!((neville_at_zero(&xs, &ys) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn trends() {
        assert_eq!(trend_of(&[1.0, 2.0, 4.0]), Trend::Diverging);
        assert_eq!(trend_of(&[-1.0, -0.5, -0.1]), Trend::Vanishing);
        assert_eq!(trend_of(&[1.0, 2.0, 1.5]), Trend::Inconclusive);
    }

    #[test]
    fn reference_constant() {
        let r = frak_c_reference(20_000).unwrap();
        // ∫φ² ln φ² = ln(2/π) + 1 - 2 ln 2 for φ = √(2/π) cos on (0, π)
        let exact = (-((2.0 / std::f64::consts::PI).ln() + 1.0 - 2.0 * std::f64::consts::LN_2)).exp();
        assert!((r / exact - 1.0).abs() < 1e-9, "{r} {exact}");
    }

    #[test]
    fn degenerate_path_rejected() {
        let opts = SolverOptions::default();
        assert!(estimate_frak_c(&|t| (1.0 + t, 1.0 / (1.0 + t)), 200, &opts).is_err());
    }
}
