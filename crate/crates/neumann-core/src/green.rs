//! Neumann inverse `K`, its shifted variants `K_t`, and the balanced shift.
//!
//! `K h` is computed from the radial Green kernel `-Φ(max(r, s))`, with
//! `Φ' = r^{1-N}`, summed against the grid weights. This form is symmetric in
//! the discrete inner product, so `∫ f K g = ∫ g K f` holds to rounding. The
//! kernel kink at `s = r` costs the end-corrected rule a term of order
//! `h² · h(r)`. A diagonal correction removes it: at each node it is the exact
//! quadrature defect for `h ≡ 1`, which is `h²/12` in the interior and differs
//! next to the ends and the origin. The result is fourth order for smooth data,
//! except for an `O(h³)` term at the node next to `r = L` when `h'(L) != 0`.

use crate::error::{Error, Result};
use crate::grid::{RadialGrid, Segments};

/// Relative compatibility tolerance `|∫h| <= EPS_COMPAT ‖h‖₁`.
pub const EPS_COMPAT: f64 = 1e-10;
/// Relative sign band, `ε₀ = SIGN_BAND ‖u‖_∞`.
pub const SIGN_BAND: f64 = 1e-10;

const SHIFT_MAX_ITER: usize = 200;

/// Precomputed Green operator on a uniform grid.
#[derive(Clone, Debug)]
pub struct Green<'g> {
    grid: &'g RadialGrid,
    phi: Vec<f64>,
    kink: Vec<f64>,
}

fn phi(dim: usize, r: f64) -> f64 {
    match dim {
        1 => r,
        2 => r.ln(),
        n => r.powi(2 - n as i32) / (2.0 - n as f64),
    }
}

/// `∫ Φ(s) s^{N-1} ds` with value 0 at `s = 0`.
fn phi_moment(dim: usize, s: f64) -> f64 {
    match dim {
        1 => 0.5 * s * s,
        2 if s == 0.0 => 0.0,
        2 => 0.5 * s * s * s.ln() - 0.25 * s * s,
        n => s * s / (2.0 * (2.0 - n as f64)),
    }
}

fn kink_corrections(grid: &RadialGrid, phi: &[f64]) -> Vec<f64> {
    let (r, w, dim) = (grid.nodes(), grid.weights(), grid.dim());
    let n = r.len() - 1;
    let big_l = r[n];
    let mut tail = vec![0.0; n + 1];
    for i in (0..n).rev() {
        tail[i] = tail[i + 1] + phi[i + 1] * w[i + 1];
    }
    let mut head = 0.0;
    (0..=n)
        .map(|i| {
            head += w[i];
            let exact = phi[i] * r[i].powi(dim as i32) / dim as f64 + phi_moment(dim, big_l) - phi_moment(dim, r[i]);
            let rule = phi[i] * head + tail[i];
            if dim >= 2 && i == 0 {
                0.0
            } else {
                exact - rule
            }
        })
        .collect()
}

impl<'g> Green<'g> {
    pub fn new(grid: &'g RadialGrid) -> Result<Self> {
        grid.spacing().ok_or_else(|| Error::Grid("Green operator needs a uniform grid".into()))?;
        let dim = grid.dim();
        let phi: Vec<f64> =
            grid.nodes().iter().map(|&r| if r == 0.0 && dim >= 2 { 0.0 } else { phi(dim, r) }).collect();
        let kink = kink_corrections(grid, &phi);
        Ok(Self { grid, phi, kink })
    }

    pub fn grid(&self) -> &'g RadialGrid {
        self.grid
    }

    /// `u = K h`: `-Δu = h`, `u' = 0` at both ends, `∫u = 0`.
    pub fn solve(&self, h: &[f64]) -> Result<Vec<f64>> {
        check_len(self.grid, h)?;
        let integral = self.grid.integrate(h);
        let l1 = self.grid.surface() * self.grid.weights().iter().zip(h).map(|(w, v)| w * v.abs()).sum::<f64>();
        let limit = EPS_COMPAT * l1;
        if integral.abs() > limit {
            return Err(Error::Compatibility { integral, limit });
        }
        Ok(self.solve_unchecked(h))
    }

    pub(crate) fn solve_unchecked(&self, h: &[f64]) -> Vec<f64> {
        let w = self.grid.weights();
        let n = h.len() - 1;
        let mut u = vec![0.0; n + 1];
        // right-to-left tail sums Σ_{j>i} Φ_j w_j h_j
        let mut tail = 0.0;
        for i in (0..=n).rev() {
            u[i] = -tail;
            tail += self.phi[i] * w[i] * h[i];
        }
        let mut head = 0.0;
        for i in 0..=n {
            head += w[i] * h[i];
            u[i] -= self.phi[i] * head + self.kink[i] * h[i];
        }
        if self.grid.dim() >= 2 {
            // the origin carries no weight; continue the even expansion from r_1
            let r1 = self.grid.nodes()[1];
            let nd = self.grid.dim() as f64;
            let c2 = (h[1] - h[0]) / (r1 * r1);
            u[0] = u[1] + h[0] * r1 * r1 / (2.0 * nd) + c2 * r1.powi(4) / (4.0 * (nd + 2.0));
        }
        subtract_mean(self.grid, &mut u);
        u
    }

    /// `K σ` for a step function `σ` (exact radial integration, then mean removed).
    pub fn solve_piecewise_constant(&self, seg: &Segments) -> Result<Vec<f64>> {
        let dim = self.grid.dim();
        let nd = dim as f64;
        let m = seg.values.len();
        // S(r) = ∫_0^r s^{N-1} σ ds and U(r) = ∫_0^r τ^{1-N} S(τ) dτ at the breaks
        let mut s_at = vec![0.0; m + 1];
        let mut u_at = vec![0.0; m + 1];
        for k in 0..m {
            let (a, b) = (seg.breaks[k], seg.breaks[k + 1]);
            let sig = seg.values[k];
            s_at[k + 1] = s_at[k] + sig * (b.powi(dim as i32) - a.powi(dim as i32)) / nd;
            u_at[k + 1] = u_at[k] + self.segment_u(seg, &s_at, k, b);
        }
        let total: f64 = seg
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| v.abs() * (seg.breaks[k + 1].powi(dim as i32) - seg.breaks[k].powi(dim as i32)))
            .sum::<f64>()
            / nd;
        let limit = EPS_COMPAT * total.max(f64::MIN_POSITIVE);
        if s_at[m].abs() > limit {
            return Err(Error::Compatibility { integral: s_at[m] * self.grid.surface(), limit });
        }
        let mut u = Vec::with_capacity(self.grid.len());
        let mut k = 0;
        for &r in self.grid.nodes() {
            while k + 1 < m && r > seg.breaks[k + 1] {
                k += 1;
            }
            u.push(-(u_at[k] + self.segment_u(seg, &s_at, k, r)));
        }
        subtract_mean(self.grid, &mut u);
        Ok(u)
    }

    /// `∫_{b_k}^{r} τ^{1-N} S(τ) dτ` inside segment `k`.
    fn segment_u(&self, seg: &Segments, s_at: &[f64], k: usize, r: f64) -> f64 {
        let dim = self.grid.dim();
        let nd = dim as f64;
        let a = seg.breaks[k];
        let sig = seg.values[k];
        // S(τ) = A + σ τ^N / N on the segment
        let big_a = s_at[k] - sig * a.powi(dim as i32) / nd;
        let log_part = if big_a == 0.0 || r <= a { 0.0 } else { big_a * (phi(dim, r) - phi(dim, a)) };
        log_part + sig * (r * r - a * a) / (2.0 * nd)
    }
}

fn check_len(grid: &RadialGrid, v: &[f64]) -> Result<()> {
    if v.len() != grid.len() {
        return Err(Error::Grid(format!("{} values for a grid of {} nodes", v.len(), grid.len())));
    }
    Ok(())
}

fn subtract_mean(grid: &RadialGrid, u: &mut [f64]) {
    let m = grid.mean(u);
    u.iter_mut().for_each(|v| *v -= m);
}

/// `|x|^{t-1} x`.
#[inline]
pub fn signed_pow(x: f64, t: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if t == 1.0 {
        x
    } else {
        x.signum() * x.abs().powf(t)
    }
}

/// `u = K h` on `grid`.
pub fn solve_neumann(grid: &RadialGrid, h: &[f64]) -> Result<Vec<f64>> {
    Green::new(grid)?.solve(h)
}

fn shift_moment(w: &[f64], u: &[f64], t: f64, kappa: f64) -> (f64, f64) {
    let mut f = 0.0;
    let mut df = 0.0;
    for (wi, ui) in w.iter().zip(u) {
        let x = ui + kappa;
        f += wi * signed_pow(x, t);
        if x != 0.0 {
            df += wi * t * x.abs().powf(t - 1.0);
        } else if t < 1.0 {
            df = f64::INFINITY;
        }
    }
    (f, df)
}

/// The unique `κ` with `∫|u+κ|^{t-1}(u+κ) = 0`.
///
/// Bracketed Newton iteration on `κ ∈ [-‖u‖_∞, ‖u‖_∞]`, falling back to
/// bisection whenever the Newton step leaves the bracket or stalls.
pub fn kappa_shift(grid: &RadialGrid, u: &[f64], t: f64) -> Result<f64> {
    check_len(grid, u)?;
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("shift exponent must be positive, got {t}")));
    }
    let w = grid.weights();
    let m = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m == 0.0 {
        return Ok(0.0);
    }
    if !m.is_finite() {
        return Err(Error::ShiftRoot("non-finite data".into()));
    }
    let wsum: f64 = w.iter().sum();
    let tol = 1e-12 * m.powf(t) * wsum;
    let (mut lo, mut hi) = (-m, m);
    let mut k = (-w.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() / wsum).clamp(lo, hi);
    for _ in 0..SHIFT_MAX_ITER {
        let (f, df) = shift_moment(w, u, t, k);
        if f == 0.0 {
            return Ok(k);
        }
        if f < 0.0 {
            lo = k;
        } else {
            hi = k;
        }
        if f.abs() <= tol && t >= 1.0 {
            // one more Newton step polishes below the tolerance for free
            let next = k - f / df;
            return Ok(if next > lo && next < hi { next } else { k });
        }
        if hi - lo <= 4.0 * f64::EPSILON * m {
            return Ok(k);
        }
        let newton = if df.is_finite() && df > 0.0 { k - f / df } else { f64::NAN };
        let width = hi - lo;
        k = if newton > lo && newton < hi && (newton - k).abs() < 0.5 * width { newton } else { 0.5 * (lo + hi) };
        if f.abs() <= tol && (hi - lo) <= 1e-15 * m.max(1.0) {
            return Ok(k);
        }
    }
    let (f, _) = shift_moment(w, u, t, k);
    if f.abs() <= tol {
        Ok(k)
    } else {
        Err(Error::ShiftRoot(format!("residual {f:e} after {SHIFT_MAX_ITER} steps")))
    }
}

/// `κ = κ_t(u)` together with `|u+κ|^{t-1}(u+κ)`, corrected at the node
/// closest to zero so that its integral vanishes exactly.
///
/// Near a node where `u + κ` crosses zero the moment is steep in `κ` for small
/// `t`, and no floating-point `κ` hits it; the root is then represented by the
/// value at that node instead.
pub fn shifted_power(grid: &RadialGrid, u: &[f64], t: f64) -> Result<(f64, Vec<f64>)> {
    let kappa = kappa_shift(grid, u, t)?;
    let mut f: Vec<f64> = u.iter().map(|v| signed_pow(v + kappa, t)).collect();
    let w = grid.weights();
    let residual: f64 = w.iter().zip(&f).map(|(a, b)| a * b).sum();
    let j = (0..u.len())
        .filter(|&i| w[i] > 0.0)
        .min_by(|&a, &b| (u[a] + kappa).abs().total_cmp(&(u[b] + kappa).abs()))
        .expect("grid has weighted nodes");
    f[j] -= residual / w[j];
    Ok((kappa, f))
}

/// `K_t h = K h + κ_t(K h)`.
pub fn apply_k_t(grid: &RadialGrid, h: &[f64], t: f64) -> Result<Vec<f64>> {
    let mut u = solve_neumann(grid, h)?;
    let k = kappa_shift(grid, &u, t)?;
    u.iter_mut().for_each(|v| *v += k);
    Ok(u)
}

/// Sign band for `u`, `ε₀ = SIGN_BAND ‖u‖_∞`.
pub fn sign_band(u: &[f64]) -> f64 {
    SIGN_BAND * u.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// The shift `c` with `|{u+c>0}| = |{u+c<0}|` (measures of the linear
/// interpolant); the midpoint of the admissible interval when it is not unique.
pub fn balanced_shift(grid: &RadialGrid, u: &[f64]) -> f64 {
    let band = sign_band(u);
    let imbalance = |c: f64| {
        let shifted: Vec<f64> = u.iter().map(|v| v + c).collect();
        let (pos, neg, _) = grid.sign_measures(&shifted, band);
        pos - neg
    };
    let umax = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let umin = u.iter().cloned().fold(f64::INFINITY, f64::min);
    if umax == umin {
        return -umax;
    }
    // smallest c with imbalance >= 0, and largest c with imbalance <= 0
    let lower = bisect_predicate(-umax, -umin, |c| imbalance(c) >= 0.0);
    let upper = bisect_predicate(-umax, -umin, |c| imbalance(c) > 0.0);
    0.5 * (lower + upper)
}

/// Boundary of a monotone predicate that is false at `lo` side and true at `hi`.
fn bisect_predicate(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DomainMode;
    use std::f64::consts::PI;

    fn line(n: usize) -> RadialGrid {
        RadialGrid::new(1, n, DomainMode::Interval).unwrap()
    }

    #[test]
    fn cosine_eigenfunction() {
        let g = line(2000);
        let c = g.sample(|r| (PI * r).cos());
        let u = solve_neumann(&g, &c).unwrap();
        let err = u.iter().zip(&c).map(|(a, b)| (a - b / (PI * PI)).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        let zero = solve_neumann(&g, &vec![0.0; g.len()]).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
        assert!(matches!(solve_neumann(&g, &vec![1.0; g.len()]), Err(Error::Compatibility { .. })));
    }

    #[test]
    fn kappa_examples() {
        let g = line(1000);
        let odd = g.sample(|r| (r - 0.5).powi(3));
        for t in [0.3, 1.0, 2.5] {
            assert!(kappa_shift(&g, &odd, t).unwrap().abs() < 1e-13);
        }
        let u = g.sample(|r| (3.0 * r).sin() + r * r);
        let k1 = kappa_shift(&g, &u, 1.0).unwrap();
        assert!((k1 + g.mean(&u)).abs() < 1e-13);
        let lin = g.sample(|r| r);
        assert!((kappa_shift(&g, &lin, 3.0).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn balanced_examples() {
        let g = line(1000);
        assert!((balanced_shift(&g, g.nodes()) + 0.5).abs() < 1e-12);
        let sq = g.sample(|r| r * r);
        assert!((balanced_shift(&g, &sq) + 0.25).abs() < 1e-6);
        let c = g.sample(|r| (PI * r).cos());
        assert!(balanced_shift(&g, &c).abs() < 1e-12);
        let two_level: Vec<f64> = g.nodes().iter().map(|&r| if r < 0.5 { 1.0 } else { -3.0 }).collect();
        let mid = balanced_shift(&g, &two_level);
        assert!(mid > -1.0 && mid < 3.0);
    }

    #[test]
    fn step_data_matches_quadratic() {
        let g = line(1000);
        let seg = Segments { breaks: vec![0.0, 0.5, 1.0], values: vec![1.0, -1.0] };
        let u = Green::new(&g).unwrap().solve_piecewise_constant(&seg).unwrap();
        let exact = g.sample(|r| if r < 0.5 { 0.125 - r * r / 2.0 } else { (1.0 - r).powi(2) / 2.0 - 0.125 });
        let m = g.mean(&exact);
        let err = u.iter().zip(&exact).map(|(a, b)| (a - b + m).abs()).fold(0.0, f64::max);
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn ball_quartic() {
        for dim in 2..=6 {
            let nd = dim as f64;
            let g = RadialGrid::new(dim, 800, DomainMode::Ball).unwrap();
            let h = g.project_mean_zero(&g.sample(|r| r * r - nd / (nd + 2.0)));
            let u = solve_neumann(&g, &h).unwrap();
            let exact = g.project_mean_zero(&g.sample(|r| (2.0 * r * r - r.powi(4)) / (4.0 * (nd + 2.0))));
            let err = u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "N={dim}: {err}");
        }
    }

    #[test]
    fn symmetric_in_weighted_product() {
        let g = RadialGrid::new(3, 300, DomainMode::Ball).unwrap();
        let a = g.project_mean_zero(&g.sample(|r| (5.0 * r).sin()));
        let b = g.project_mean_zero(&g.sample(|r| (r - 0.3).abs()));
        let green = Green::new(&g).unwrap();
        let ab = g.integrate(&a.iter().zip(green.solve(&b).unwrap()).map(|(x, y)| x * y).collect::<Vec<_>>());
        let ba = g.integrate(&b.iter().zip(green.solve(&a).unwrap()).map(|(x, y)| x * y).collect::<Vec<_>>());
        assert!((ab - ba).abs() < 1e-14 * ab.abs().max(1.0));
        let aa = g.integrate(&a.iter().zip(green.solve(&a).unwrap()).map(|(x, y)| x * y).collect::<Vec<_>>());
        assert!(aa > 0.0);
    }
}
