//! The sign nonlinearity `p = 0`: `Λ_{0,q}` over balanced functions, the level
//! `c_{0,q}`, and the scalar problem `-Δu = sign(u)` with level `c₀`.
//!
//! Both iterations only see `u` through its sign pattern, which is transported
//! exactly by the piecewise-constant Green solve.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dual::{residual, zeros_of, SolutionReport, SolverOptions};
use crate::error::{Error, Result};
use crate::exponents::{c_from_lambda, ExponentPair, Region};
use crate::green::{balanced_shift, kappa_shift, shifted_power, sign_band, signed_pow, Green};
use crate::grid::{RadialGrid, Segments};

/// Nodewise sign with `0` on the band `|u| <= ε₀`.
pub fn sign_of(u: &[f64]) -> Vec<f64> {
    let band = sign_band(u);
    u.iter().map(|&v| if v.abs() <= band { 0.0 } else { v.signum() }).collect()
}

/// `u` together with its discrete membership test for the balanced set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BalancedFunction {
    pub u: Vec<f64>,
    pub band: f64,
    pub certified: bool,
    /// `|{u>0}| - |{u<0}|`.
    pub imbalance: f64,
    /// `|{u=0}|` within the band.
    pub zero_measure: f64,
}

impl BalancedFunction {
    pub fn certify(grid: &RadialGrid, u: Vec<f64>) -> Self {
        let band = sign_band(&u);
        let (pos, neg, zero) = grid.sign_measures(&u, band);
        let slack = 1e-12 * grid.volume();
        Self { band, certified: (pos - neg).abs() <= zero + slack, imbalance: pos - neg, zero_measure: zero, u }
    }
}

fn l1_diff(grid: &RadialGrid, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
    grid.integrate(&d)
}

fn same_pattern(a: &Segments, b: &Segments, tol: f64) -> bool {
    a.values == b.values && a.breaks.iter().zip(&b.breaks).all(|(x, y)| (x - y).abs() <= tol)
}

/// Shortest period `k >= 2` with `patterns[last] == patterns[last - k]`.
fn cycle_length(patterns: &[Segments], tol: f64) -> Option<usize> {
    let last = patterns.last()?;
    (2..patterns.len())
        .find(|&k| same_pattern(last, &patterns[patterns.len() - 1 - k], tol))
        .filter(|_| !same_pattern(last, &patterns[patterns.len() - 2], tol))
}

fn starting_profiles(grid: &RadialGrid, opts: &SolverOptions) -> Vec<Vec<f64>> {
    let l = grid.length();
    let a = 2f64.powf(-1.0 / grid.dim() as f64) * l;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    (0..opts.multistart.max(1))
        .map(|k| {
            let amp = if k == 0 { 0.0 } else { rng.gen_range(-0.4..0.4) * l };
            grid.sample(|r| a - r + amp * (3.0 * std::f64::consts::PI * r / l).cos())
        })
        .collect()
}

struct SignRun {
    u: Vec<f64>,
    v: Vec<f64>,
    y: Vec<f64>,
    lambda: f64,
    iterations: usize,
    converged: bool,
}

fn sign_system_from(q: f64, green: &Green, u0: Vec<f64>, opts: &SolverOptions) -> Result<SignRun> {
    let grid = green.grid();
    let shift = balanced_shift(grid, &u0);
    let mut u: Vec<f64> = u0.iter().map(|x| x + shift).collect();
    let mut patterns = vec![];
    for it in 1..=opts.max_iter {
        let seg = grid.sign_segments(&u, sign_band(&u));
        patterns.push(seg.clone());
        let mut v = green.solve_piecewise_constant(&seg)?;
        let kq = kappa_shift(grid, &v, q)?;
        v.iter_mut().for_each(|x| *x += kq);
        let (_, y) = shifted_power(grid, &v, q)?;
        let mut next = green.solve_unchecked(&y);
        let c = balanced_shift(grid, &next);
        next.iter_mut().for_each(|x| *x += c);
        let scale = grid.integrate_abs(&next);
        if !(scale > 0.0) {
            return Err(Error::DegenerateIterate(scale));
        }
        let change = l1_diff(grid, &next, &u) / scale;
        u = next;
        if change <= opts.tol {
            let lambda = grid.lp_norm_unchecked(&y, (q + 1.0) / q) / scale;
            return Ok(SignRun { u, v, y, lambda, iterations: it, converged: true });
        }
        if let Some(k) = cycle_length(&patterns, 1e-14 * grid.length()) {
            return Err(Error::OscillationDetected(k));
        }
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, estimate: f64::NAN, oscillation: f64::NAN })
}

/// `Λ_{0,q}` and the solution of `-Δu = |v|^{q-1}v`, `-Δv = sign(u)`.
///
/// Fixed point `v = K_q sign(u)`, `u = K(|v|^{q-1}v) + c(u)` from several
/// starts; the lowest `Λ` is kept.
pub fn solve_sign_system(q: f64, grid: &RadialGrid, opts: &SolverOptions) -> Result<SolutionReport> {
    let e = ExponentPair::new(0.0, q, grid.dim())?;
    let green = Green::new(grid)?;
    let mut best: Option<SignRun> = None;
    let mut last_err = None;
    let starts = starting_profiles(grid, opts);
    let tried = starts.len();
    for u0 in starts {
        match sign_system_from(q, &green, u0, opts) {
            Ok(run) if best.as_ref().map_or(true, |b| run.lambda < b.lambda) => best = Some(run),
            Ok(_) => {}
            Err(err) => last_err = Some(err),
        }
    }
    let Some(mut run) = best else {
        return Err(last_err.expect("at least one start"));
    };
    if run.u[0] < 0.0 {
        run.u.iter_mut().for_each(|x| *x = -*x);
        run.v.iter_mut().for_each(|x| *x = -*x);
        run.y.iter_mut().for_each(|x| *x = -*x);
    }
    let c = c_from_lambda(&e, run.lambda)?;
    let lap_u = grid.laplacian(&run.u)?;
    let cross = -grid.integrate(&lap_u.iter().zip(&run.v).map(|(a, b)| a * b).collect::<Vec<_>>());
    let pv: Vec<f64> = run.v.iter().map(|x| x.abs().powf(q + 1.0)).collect();
    let c_energy = cross - grid.integrate_abs(&run.u) - grid.integrate(&pv) / (q + 1.0);
    let rhs_u: Vec<f64> = run.v.iter().map(|x| signed_pow(*x, q)).collect();
    let residual_u = residual(grid, &run.u, &rhs_u)?;
    let residual_v = sign_residual(grid, &run.u, &run.v)?;
    let scale_u = rhs_u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let ok = residual_u <= opts.residual_tol * scale_u && residual_v <= opts.residual_tol;
    let cert = BalancedFunction::certify(grid, run.u.clone());
    let mut notes = vec![format!("lowest Λ of {tried} starts")];
    if !cert.certified {
        notes.push(format!("balance defect {:e}", cert.imbalance));
    }
    Ok(SolutionReport {
        exponents: e,
        region: Region::SignCase,
        r: grid.nodes().to_vec(),
        zeros: zeros_of(grid, &run.u),
        lambda: run.lambda,
        d: 1.0 / run.lambda,
        c,
        c_energy,
        residual_u,
        residual_v,
        iterations: run.iterations,
        converged: run.converged && ok && cert.certified,
        discrete_only: false,
        notes,
        u: run.u,
        v: run.v,
    })
}

/// `‖-Δ_h v - sign(u)‖_∞` away from the cells touching a zero of `u`.
fn sign_residual(grid: &RadialGrid, u: &[f64], v: &[f64]) -> Result<f64> {
    let lap = grid.laplacian(v)?;
    let s = sign_of(u);
    let n = u.len();
    let near_zero = |i: usize| {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(n - 1);
        (lo..=hi).any(|j| s[j] != s[i]) || s[i] == 0.0
    };
    Ok((0..n).filter(|&i| !near_zero(i)).map(|i| (-lap[i] - s[i]).abs()).fold(0.0, f64::max))
}

/// Fixed point of `-Δu = sign(u)` in the balanced set and its level.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalarSignSolution {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    /// `I₀(u) = -½ ∫|u|`.
    pub c0: f64,
    pub iterations: usize,
    pub energy_history: Vec<f64>,
    pub zeros: Vec<f64>,
}

pub fn solve_scalar_sign(grid: &RadialGrid, opts: &SolverOptions) -> Result<ScalarSignSolution> {
    let green = Green::new(grid)?;
    let l = grid.length();
    let a = 2f64.powf(-1.0 / grid.dim() as f64) * l;
    let mut u = grid.sample(|r| a - r);
    let c = balanced_shift(grid, &u);
    u.iter_mut().for_each(|x| *x += c);
    let mut history = vec![];
    let mut patterns = vec![];
    for it in 1..=opts.max_iter {
        let seg = grid.sign_segments(&u, sign_band(&u));
        patterns.push(seg.clone());
        let mut next = green.solve_piecewise_constant(&seg)?;
        let c = balanced_shift(grid, &next);
        next.iter_mut().for_each(|x| *x += c);
        let abs = grid.integrate_abs(&next);
        history.push(0.5 * grid.integrate_piecewise(&next, &seg) - abs);
        if !(abs > 0.0) {
            return Err(Error::DegenerateIterate(abs));
        }
        let change = l1_diff(grid, &next, &u) / abs;
        u = next;
        if change <= opts.tol {
            if u[0] < 0.0 {
                u.iter_mut().for_each(|x| *x = -*x);
            }
            return Ok(ScalarSignSolution {
                r: grid.nodes().to_vec(),
                zeros: zeros_of(grid, &u),
                c0: -0.5 * abs,
                u,
                iterations: it,
                energy_history: history,
            });
        }
        if let Some(k) = cycle_length(&patterns, 1e-14 * l) {
            return Err(Error::OscillationDetected(k));
        }
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, estimate: f64::NAN, oscillation: f64::NAN })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DomainMode;

    #[test]
    fn sign_examples() {
        assert!(sign_of(&[3.0; 5]).iter().all(|s| *s == 1.0));
        let g = RadialGrid::new(1, 10, DomainMode::Interval).unwrap();
        let s = sign_of(&g.sample(|r| r - 0.5));
        assert_eq!(s[5], 0.0);
        assert_eq!(s[4], -1.0);
        assert_eq!(s[6], 1.0);
    }

    #[test]
    fn scalar_interval_level() {
        let g = RadialGrid::new(1, 2000, DomainMode::Interval).unwrap();
        let sol = solve_scalar_sign(&g, &SolverOptions::default()).unwrap();
        assert!((sol.c0 + 1.0 / 24.0).abs() < 1e-8, "{}", sol.c0);
        assert_eq!(sol.zeros.len(), 1);
        assert!((sol.zeros[0] - 0.5).abs() < 1e-9);
        assert!(sol.energy_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn disk_zero_radius() {
        let g = RadialGrid::new(2, 2000, DomainMode::Ball).unwrap();
        let rep = solve_sign_system(1.0, &g, &SolverOptions::default()).unwrap();
        assert!(rep.converged, "{:?}", rep.notes);
        assert_eq!(rep.zeros.len(), 1);
        assert!((rep.zeros[0] - 0.5f64.sqrt()).abs() <= 2.0 / 2000.0);
        assert!((rep.c_energy / rep.c - 1.0).abs() < 1e-6, "{} {}", rep.c_energy, rep.c);
        let s = sign_of(&rep.u);
        let w = g.weights().iter().cloned().fold(0.0, f64::max) * g.surface();
        assert!(g.integrate(&s).abs() <= w);
    }
}
