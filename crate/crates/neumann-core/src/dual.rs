//! Dual level `D_{p,q}`, its maximizers, and the reconstructed primal solution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{c_from_lambda, ExponentPair, Region};
use crate::green::{shifted_power, signed_pow, Green};
use crate::grid::{DomainMode, RadialGrid};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitGuess {
    /// `cos(πr/L)` in dimension 1, the one-zero profile otherwise.
    Cosine,
    /// `a² - r²` with `a = 2^{-1/N} L`.
    SignChange,
    /// Explicit nodal values for `g`.
    Profile(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: bool,
    pub seed: u64,
    pub init: InitGuess,
    /// Relative sup-norm bound on the equation residuals for `converged`.
    pub residual_tol: f64,
    /// Perturbed restarts of the sign-case iteration.
    pub multistart: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
            damping: true,
            seed: 0,
            init: InitGuess::Cosine,
            residual_tol: 1e-3,
            multistart: 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    UnitNorms,
    GammaSphere,
}

/// A feasible dual point with its current quotient.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualPair {
    pub exponents: ExponentPair,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub d_estimate: f64,
    pub iterations: usize,
    pub normalization: Normalization,
    pub converged: bool,
    /// Quotient `∫fKg / (‖f‖_α‖g‖_β)` after every sweep.
    pub history: Vec<f64>,
    /// Relative change of `(f, g)` in the last sweep.
    pub oscillation: f64,
}

impl DualPair {
    pub fn lambda(&self) -> f64 {
        1.0 / self.d_estimate
    }

    /// The same direction rescaled so that `γ₁‖f‖_α^α + γ₂‖g‖_β^β = 1`.
    pub fn to_gamma_sphere(&self, grid: &RadialGrid) -> DualPair {
        let e = &self.exponents;
        let alpha = e.alpha().expect("dual pair has p > 0");
        let beta = e.beta();
        let (g1, g2) = (e.gamma1().unwrap(), e.gamma2().unwrap());
        let nf = grid.lp_norm_unchecked(&self.f, alpha).powf(alpha);
        let ng = grid.lp_norm_unchecked(&self.g, beta).powf(beta);
        let s = gamma_scale(g1 * nf, alpha, g2 * ng, beta);
        let mut out = self.clone();
        out.f.iter_mut().for_each(|v| *v *= s);
        out.g.iter_mut().for_each(|v| *v *= s);
        out.normalization = Normalization::GammaSphere;
        out
    }
}

/// `s > 0` with `a s^α + b s^β = 1`.
pub(crate) fn gamma_scale(a: f64, alpha: f64, b: f64, beta: f64) -> f64 {
    let h = |s: f64| a * s.powf(alpha) + b * s.powf(beta) - 1.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    while h(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Reconstructed solution of the system with its level and diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionReport {
    pub exponents: ExponentPair,
    pub region: Region,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub c: f64,
    /// Level from the discrete energy integral.
    pub c_energy: f64,
    pub residual_u: f64,
    pub residual_v: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set for critical pairs outside the admissible bounds.
    pub discrete_only: bool,
    /// Interior zeros of `u`.
    pub zeros: Vec<f64>,
    pub notes: Vec<String>,
}

fn check_dual_region(e: &ExponentPair) -> Result<()> {
    match e.region() {
        Region::SignCase => Err(Error::InvalidExponents("the dual iteration needs p > 0".into())),
        Region::Supercritical => {
            Err(Error::InvalidExponents(format!("({}, {}) is supercritical in dimension {}", e.p, e.q, e.dim)))
        }
        _ => Ok(()),
    }
}

fn check_grid(e: &ExponentPair, grid: &RadialGrid) -> Result<()> {
    if e.dim != grid.dim() {
        return Err(Error::InvalidArgument(format!(
            "exponents for dimension {} on a grid of dimension {}",
            e.dim,
            grid.dim()
        )));
    }
    Ok(())
}

fn initial_g(grid: &RadialGrid, init: &InitGuess) -> Result<Vec<f64>> {
    let l = grid.length();
    let a = 2f64.powf(-1.0 / grid.dim() as f64) * l;
    let raw = match init {
        InitGuess::Cosine if grid.dim() == 1 => grid.sample(|r| (std::f64::consts::PI * r / l).cos()),
        InitGuess::Cosine | InitGuess::SignChange => grid.sample(|r| a * a - r * r),
        InitGuess::Profile(v) => {
            if v.len() != grid.len() || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "initial profile has {} values for {} nodes",
                    v.len(),
                    grid.len()
                )));
            }
            v.clone()
        }
    };
    Ok(grid.project_mean_zero(&raw))
}

fn inner(grid: &RadialGrid, a: &[f64], b: &[f64]) -> f64 {
    grid.surface() * grid.weights().iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * x * y).sum::<f64>()
}

fn normalize(grid: &RadialGrid, f: &mut [f64], s: f64) -> Result<f64> {
    let n = grid.lp_norm_unchecked(f, s);
    if !(n > 1e-14) || !n.is_finite() {
        return Err(Error::DegenerateIterate(n));
    }
    f.iter_mut().for_each(|v| *v /= n);
    Ok(n)
}

fn rel_change(grid: &RadialGrid, new: &[f64], old: &[f64], s: f64) -> f64 {
    let d: Vec<f64> = new.iter().zip(old).map(|(a, b)| a - b).collect();
    grid.lp_norm_unchecked(&d, s)
}

/// Best response `f ∝ |Kg + κ|^{t-1}(Kg + κ)` with unit `L^s` norm.
fn half_step(green: &Green, g: &[f64], t: f64, s: f64) -> Result<Vec<f64>> {
    let x = green.solve_unchecked(g);
    let (_, mut f) = shifted_power(green.grid(), &x, t)?;
    normalize(green.grid(), &mut f, s)?;
    Ok(f)
}

/// Alternating best-response ascent for `D_{p,q}`; returns the last iterate
/// even when the budget runs out (`converged = false`).
pub fn run_dual(
    e: &ExponentPair,
    grid: &RadialGrid,
    opts: &SolverOptions,
    warm: Option<&DualPair>,
) -> Result<DualPair> {
    check_grid(e, grid)?;
    check_dual_region(e)?;
    let green = Green::new(grid)?;
    let alpha = e.alpha().expect("p > 0 checked");
    let beta = e.beta();
    let mut g = match warm {
        Some(w) if w.g.len() == grid.len() => grid.project_mean_zero(&w.g),
        _ => initial_g(grid, &opts.init)?,
    };
    normalize(grid, &mut g, beta)?;
    let mut f = half_step(&green, &g, e.p, alpha)?;
    let mut d = inner(grid, &f, &green.solve_unchecked(&g));
    let mut history = vec![d];
    let mut theta = 1.0;
    let mut oscillation = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let g_new = half_step(&green, &f, e.q, beta)?;
        let f_new = half_step(&green, &g_new, e.p, alpha)?;
        let (f_try, g_try, d_new) = {
            let kg = green.solve_unchecked(&g_new);
            let dn = inner(grid, &f_new, &kg);
            if opts.damping && dn < d * (1.0 - 1e-12) {
                theta *= 0.5;
                let mut fd: Vec<f64> = f.iter().zip(&f_new).map(|(a, b)| (1.0 - theta) * a + theta * b).collect();
                let mut gd: Vec<f64> = g.iter().zip(&g_new).map(|(a, b)| (1.0 - theta) * a + theta * b).collect();
                normalize(grid, &mut fd, alpha)?;
                normalize(grid, &mut gd, beta)?;
                let dd = inner(grid, &fd, &green.solve_unchecked(&gd));
                (fd, gd, dd)
            } else {
                (f_new, g_new, dn)
            }
        };
        oscillation = rel_change(grid, &f_try, &f, alpha).max(rel_change(grid, &g_try, &g, beta));
        let d_change = (d_new - d).abs() / d_new.abs().max(f64::MIN_POSITIVE);
        f = f_try;
        g = g_try;
        d = d_new;
        history.push(d);
        if d_change <= opts.tol && oscillation <= opts.tol {
            return Ok(DualPair {
                exponents: *e,
                f,
                g,
                d_estimate: d,
                iterations: it,
                normalization: Normalization::UnitNorms,
                converged: true,
                history,
                oscillation,
            });
        }
    }
    Ok(DualPair {
        exponents: *e,
        f,
        g,
        d_estimate: d,
        iterations: opts.max_iter,
        normalization: Normalization::UnitNorms,
        converged: false,
        history,
        oscillation,
    })
}

/// Converged maximizer of `∫fKg / (‖f‖_α‖g‖_β)`.
pub fn compute_dual(e: &ExponentPair, grid: &RadialGrid, opts: &SolverOptions) -> Result<DualPair> {
    let dp = run_dual(e, grid, opts, None)?;
    if !dp.converged {
        return Err(Error::NonConvergence {
            iterations: dp.iterations,
            estimate: dp.d_estimate,
            oscillation: dp.oscillation,
        });
    }
    Ok(dp)
}

/// `Λ_{p,q} = 1/D_{p,q}`; the sign case goes through the `p = 0` solver.
pub fn compute_lambda(e: &ExponentPair, grid: &RadialGrid, opts: &SolverOptions) -> Result<f64> {
    if e.p == 0.0 {
        check_grid(e, grid)?;
        return Ok(crate::sign_limit::solve_sign_system(e.q, grid, opts)?.lambda);
    }
    Ok(compute_dual(e, grid, opts)?.lambda())
}

/// `μ_{1,q} = Λ_{1/q,q}`.
pub fn mu1(q: f64, grid: &RadialGrid, opts: &SolverOptions) -> Result<f64> {
    compute_lambda(&ExponentPair::new(1.0 / q, q, grid.dim())?, grid, opts)
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// `‖-Δ_h u - rhs‖_∞` over all nodes.
pub(crate) fn residual(grid: &RadialGrid, u: &[f64], rhs: &[f64]) -> Result<f64> {
    let lap = grid.laplacian(u)?;
    Ok(lap.iter().zip(rhs).map(|(l, r)| (-l - r).abs()).fold(0.0, f64::max))
}

/// Interior sign changes of nodal data, located by linear interpolation.
pub fn zeros_of(grid: &RadialGrid, u: &[f64]) -> Vec<f64> {
    let r = grid.nodes();
    let band = crate::green::sign_band(u);
    let mut out = vec![];
    let mut last: Option<(usize, f64)> = None;
    for (i, &x) in u.iter().enumerate() {
        if x.abs() <= band {
            continue;
        }
        if let Some((j, y)) = last {
            if y.signum() != x.signum() {
                out.push(r[j] + (r[i] - r[j]) * y / (y - x));
            }
        }
        last = Some((i, x));
    }
    out
}

/// Primal pair `(u, v)` from a dual maximizer.
pub fn reconstruct_solution(
    e: &ExponentPair,
    grid: &RadialGrid,
    dp: &DualPair,
    opts: &SolverOptions,
) -> Result<SolutionReport> {
    check_grid(e, grid)?;
    e.level_exponent()?;
    let green = Green::new(grid)?;
    let d = dp.d_estimate;
    let (p, q) = (e.p, e.q);
    let pq1 = p * q - 1.0;
    let su = (-q * (p + 1.0) / pq1 * d.ln()).exp();
    let sv = (-p * (q + 1.0) / pq1 * d.ln()).exp();
    // K_p g and K_q f, each shifted by their own normalization
    let kg = green.solve_unchecked(&dp.g);
    let kf = green.solve_unchecked(&dp.f);
    let kp = crate::green::kappa_shift(grid, &kg, p)?;
    let kq = crate::green::kappa_shift(grid, &kf, q)?;
    let mut u: Vec<f64> = kg.iter().map(|x| su * (x + kp)).collect();
    let mut v: Vec<f64> = kf.iter().map(|x| sv * (x + kq)).collect();
    if u[0] < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let lambda = 1.0 / d;
    let c = c_from_lambda(e, lambda)?;
    let lap_u = grid.laplacian(&u)?;
    let cross = -inner(grid, &lap_u, &v);
    let pu: Vec<f64> = u.iter().map(|x| x.abs().powf(p + 1.0)).collect();
    let pv: Vec<f64> = v.iter().map(|x| x.abs().powf(q + 1.0)).collect();
    let c_energy = cross - grid.integrate(&pu) / (p + 1.0) - grid.integrate(&pv) / (q + 1.0);
    let rhs_u: Vec<f64> = v.iter().map(|x| signed_pow(*x, q)).collect();
    let rhs_v: Vec<f64> = u.iter().map(|x| signed_pow(*x, p)).collect();
    let residual_u = residual(grid, &u, &rhs_u)?;
    let residual_v = residual(grid, &v, &rhs_v)?;
    let ok_u = residual_u <= opts.residual_tol * sup_norm(&rhs_u).max(f64::MIN_POSITIVE);
    let ok_v = residual_v <= opts.residual_tol * sup_norm(&rhs_v).max(f64::MIN_POSITIVE);
    let region = e.region();
    let mut notes = vec![];
    let discrete_only = region == Region::CriticalInadmissible;
    if discrete_only {
        notes.push("critical pair outside the admissible bounds: discrete-only".into());
    }
    if !(ok_u && ok_v) {
        notes.push(format!("residuals above {:e} relative", opts.residual_tol));
    }
    Ok(SolutionReport {
        exponents: *e,
        region,
        r: grid.nodes().to_vec(),
        zeros: zeros_of(grid, &u),
        u,
        v,
        lambda,
        d,
        c,
        c_energy,
        residual_u,
        residual_v,
        iterations: dp.iterations,
        converged: dp.converged && ok_u && ok_v,
        discrete_only,
        notes,
    })
}

/// Full solve: dual iteration then reconstruction. The sign case goes through
/// the `p = 0` solver; the hyperbola is rejected.
pub fn solve(e: &ExponentPair, grid: &RadialGrid, opts: &SolverOptions) -> Result<SolutionReport> {
    check_grid(e, grid)?;
    if e.p == 0.0 {
        return crate::sign_limit::solve_sign_system(e.q, grid, opts);
    }
    if e.on_hyperbola() {
        return Err(Error::Hyperbola);
    }
    let dp = run_dual(e, grid, opts, None)?;
    reconstruct_solution(e, grid, &dp, opts)
}

/// Lower bound `δ` with `D_{p,q} ≥ δ`, built from the first Neumann mode `ψ`
/// normalized by `‖ψ‖₂ = 1`: `δ = 1 / (μ₁ C² ‖ψ‖_∞²)`, `C = max(1, |Ω|)`.
pub fn dual_lower_bound(grid: &RadialGrid, opts: &SolverOptions) -> Result<f64> {
    let one = ExponentPair::new(1.0, 1.0, grid.dim())?;
    let (mu1, psi) = if grid.dim() == 1 && grid.mode() == DomainMode::Interval {
        let l = grid.length();
        let k = std::f64::consts::PI / l;
        (k * k, (2.0 / l).sqrt())
    } else {
        let dp = compute_dual(&one, grid, opts)?;
        let n2 = grid.lp_norm_unchecked(&dp.f, 2.0);
        (1.0 / dp.d_estimate, sup_norm(&dp.f) / n2)
    };
    let c = grid.volume().max(1.0);
    Ok(1.0 / (mu1 * c * c * psi * psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn linear_interval_eigenvalue() {
        let g = RadialGrid::new(1, 2000, DomainMode::Interval).unwrap();
        let e = ExponentPair::new(1.0, 1.0, 1).unwrap();
        let dp = compute_dual(&e, &g, &SolverOptions::default()).unwrap();
        assert!((dp.lambda() / (PI * PI) - 1.0).abs() < 1e-6, "{}", dp.lambda());
        assert!(dp.history.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)));
    }

    #[test]
    fn swap_symmetry() {
        let g = RadialGrid::new(1, 400, DomainMode::Interval).unwrap();
        let opts = SolverOptions::default();
        let a = compute_dual(&ExponentPair::new(2.0, 0.7, 1).unwrap(), &g, &opts).unwrap();
        let b = compute_dual(&ExponentPair::new(0.7, 2.0, 1).unwrap(), &g, &opts).unwrap();
        assert!((a.d_estimate / b.d_estimate - 1.0).abs() < 1e-8);
    }

    #[test]
    fn gamma_sphere_projection() {
        let g = RadialGrid::new(1, 200, DomainMode::Interval).unwrap();
        let e = ExponentPair::new(3.0, 2.0, 1).unwrap();
        let dp = compute_dual(&e, &g, &SolverOptions::default()).unwrap();
        let gs = dp.to_gamma_sphere(&g);
        let a = g.lp_norm(&gs.f, e.alpha().unwrap()).unwrap().powf(e.alpha().unwrap());
        let b = g.lp_norm(&gs.g, e.beta()).unwrap().powf(e.beta());
        assert!((e.gamma1().unwrap() * a + e.gamma2().unwrap() * b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hyperbola_solve_rejected() {
        let g = RadialGrid::new(1, 100, DomainMode::Interval).unwrap();
        let e = ExponentPair::new(1.0, 1.0, 1).unwrap();
        assert_eq!(solve(&e, &g, &SolverOptions::default()).unwrap_err(), Error::Hyperbola);
    }
}
