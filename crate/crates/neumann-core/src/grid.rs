//! Radial meshes, quadrature and discrete differentiation.
//!
//! Nodes are uniform on `[0, L]` (or on `[0, a]` and `[a, L]` separately when a
//! breakpoint is requested). Quadrature uses the fourth-order end-corrected
//! trapezoid rule (weights 3/8, 7/6, 23/24, 1, …) on each uniform piece,
//! multiplied by `r^{N-1}` at the nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::sphere_area;

/// Smallest number of intervals in a uniform piece.
pub const MIN_INTERVALS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainMode {
    /// Plain interval `(0, L)`, dimension 1 only, surface factor 1.
    Interval,
    /// Ball of radius `L` in `R^N`; for `N = 1` the symmetric interval `(-L, L)`.
    Ball,
}

#[derive(Clone, Debug)]
pub struct RadialGrid {
    dim: usize,
    mode: DomainMode,
    length: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    surface: f64,
    /// Index ranges `[start, end]` (inclusive) of the uniform pieces.
    pieces: Vec<(usize, usize)>,
}

/// Sign pattern of a function as a step function on `[0, L]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Segments {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl Segments {
    /// Interior points where the value changes.
    pub fn zeros(&self) -> &[f64] {
        &self.breaks[1..self.breaks.len() - 1]
    }
}

/// Values on nodes paired with their radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub r: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: &RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!("{} values for a grid of {} nodes", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Grid("non-finite value".into()));
        }
        Ok(Self { r: grid.nodes().to_vec(), values })
    }
}

fn gregory_weights(intervals: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; intervals + 1];
    let ends = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
    for (k, c) in ends.iter().enumerate() {
        w[k] = c * h;
        w[intervals - k] = c * h;
    }
    w
}

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

impl RadialGrid {
    /// Uniform grid with `n` intervals on the unit interval or unit ball.
    pub fn new(dim: usize, n: usize, mode: DomainMode) -> Result<Self> {
        Self::with_length(dim, n, mode, 1.0)
    }

    /// Uniform grid with `n` intervals on `[0, length]`.
    pub fn with_length(dim: usize, n: usize, mode: DomainMode, length: f64) -> Result<Self> {
        Self::validate(dim, mode, length)?;
        if n < MIN_INTERVALS {
            return Err(Error::Grid(format!("need at least {MIN_INTERVALS} intervals, got {n}")));
        }
        let h = length / n as f64;
        let nodes: Vec<f64> = (0..=n).map(|i| if i == n { length } else { i as f64 * h }).collect();
        let base = gregory_weights(n, h);
        Ok(Self::assemble(dim, mode, length, nodes, base, vec![(0, n)]))
    }

    /// Unit-radius grid with a node exactly at `a`, uniform on `[0, a]` and `[a, 1]`.
    pub fn with_breakpoint(dim: usize, n: usize, mode: DomainMode, a: f64) -> Result<Self> {
        Self::validate(dim, mode, 1.0)?;
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::Grid(format!("breakpoint {a} outside (0, 1)")));
        }
        let n1 = ((n as f64) * a).round() as usize;
        let n2 = n.saturating_sub(n1);
        if n1 < MIN_INTERVALS || n2 < MIN_INTERVALS {
            return Err(Error::Grid(format!("pieces of {n1} and {n2} intervals are too small")));
        }
        let h1 = a / n1 as f64;
        let h2 = (1.0 - a) / n2 as f64;
        let mut nodes: Vec<f64> = (0..n1).map(|i| i as f64 * h1).collect();
        nodes.extend((0..n2).map(|i| a + i as f64 * h2));
        nodes.push(1.0);
        let mut base = gregory_weights(n1, h1);
        let right = gregory_weights(n2, h2);
        base[n1] += right[0];
        base.extend_from_slice(&right[1..]);
        Ok(Self::assemble(dim, mode, 1.0, nodes, base, vec![(0, n1), (n1, n1 + n2)]))
    }

    fn validate(dim: usize, mode: DomainMode, length: f64) -> Result<()> {
        if dim == 0 {
            return Err(Error::Grid("dimension must be >= 1".into()));
        }
        if mode == DomainMode::Interval && dim != 1 {
            return Err(Error::Grid("interval mode requires dimension 1".into()));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Grid(format!("length must be positive, got {length}")));
        }
        Ok(())
    }

    fn assemble(
        dim: usize,
        mode: DomainMode,
        length: f64,
        nodes: Vec<f64>,
        base: Vec<f64>,
        pieces: Vec<(usize, usize)>,
    ) -> Self {
        let mut weights: Vec<f64> = nodes.iter().zip(&base).map(|(&r, &b)| b * r.powi(dim as i32 - 1)).collect();
        // rescale so the weights integrate 1 exactly
        let scale = length.powi(dim as i32) / dim as f64 / weights.iter().sum::<f64>();
        weights.iter_mut().for_each(|w| *w *= scale);
        let surface = match mode {
            DomainMode::Interval => 1.0,
            DomainMode::Ball => sphere_area(dim),
        };
        Self { dim, mode, length, nodes, weights, surface, pieces }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> DomainMode {
        self.mode
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights for `∫_0^L f(r) r^{N-1} dr` (without the surface factor).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn surface(&self) -> f64 {
        self.surface
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Mesh width when the grid is a single uniform piece.
    pub fn spacing(&self) -> Option<f64> {
        (self.pieces.len() == 1).then(|| self.length / self.intervals() as f64)
    }

    /// `|Ω|` as seen by the quadrature.
    pub fn volume(&self) -> f64 {
        self.surface * self.weights.iter().sum::<f64>()
    }

    /// Exact measure of the shell `a < r < b`.
    pub fn shell_measure(&self, a: f64, b: f64) -> f64 {
        let n = self.dim as i32;
        self.surface * (b.powi(n) - a.powi(n)) / self.dim as f64
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&r| f(r)).collect()
    }

    pub fn integrate(&self, g: &[f64]) -> f64 {
        debug_assert_eq!(g.len(), self.len());
        self.surface * self.weights.iter().zip(g).map(|(w, v)| w * v).sum::<f64>()
    }

    pub fn mean(&self, g: &[f64]) -> f64 {
        self.integrate(g) / self.volume()
    }

    /// `g - mean(g)`.
    pub fn project_mean_zero(&self, g: &[f64]) -> Vec<f64> {
        let m = self.mean(g);
        g.iter().map(|v| v - m).collect()
    }

    /// `(∫|g|^s)^{1/s}`, evaluated with the maximum factored out.
    pub fn lp_norm(&self, g: &[f64], s: f64) -> Result<f64> {
        if !(s >= 1.0) {
            return Err(Error::InvalidArgument(format!("L^s norm needs s >= 1, got {s}")));
        }
        Ok(self.lp_norm_unchecked(g, s))
    }

    pub(crate) fn lp_norm_unchecked(&self, g: &[f64], s: f64) -> f64 {
        let m = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if m == 0.0 {
            return 0.0;
        }
        let acc: f64 = self.weights.iter().zip(g).map(|(w, v)| w * (v.abs() / m).powf(s)).sum();
        m * (self.surface * acc).powf(1.0 / s)
    }

    /// Second-order finite-difference `Δg = g'' + (N-1) g'/r`.
    ///
    /// At `r = 0` the limit `N g''(0)` is used; at both ends `g'' ` comes from
    /// the three-point formula that builds in `g' = 0`.
    pub fn laplacian(&self, g: &[f64]) -> Result<Vec<f64>> {
        if g.len() < 4 || g.len() != self.len() {
            return Err(Error::Grid(format!("laplacian needs >= 4 matching nodes, got {}", g.len())));
        }
        let h = self.spacing().ok_or_else(|| Error::Grid("laplacian needs a uniform grid".into()))?;
        let n = g.len() - 1;
        let h2 = h * h;
        let nm1 = self.dim as f64 - 1.0;
        let mut out = vec![0.0; n + 1];
        out[0] = self.dim as f64 * (-7.0 * g[0] + 8.0 * g[1] - g[2]) / (2.0 * h2);
        for i in 1..n {
            let second = (g[i + 1] - 2.0 * g[i] + g[i - 1]) / h2;
            let first = (g[i + 1] - g[i - 1]) / (2.0 * h);
            out[i] = second + nm1 * first / self.nodes[i];
        }
        out[n] = (-7.0 * g[n] + 8.0 * g[n - 1] - g[n - 2]) / (2.0 * h2);
        Ok(out)
    }

    fn piece_of(&self, cell: usize) -> (usize, usize) {
        *self.pieces.iter().find(|(s, e)| cell >= *s && cell < *e).unwrap_or(&self.pieces[self.pieces.len() - 1])
    }

    /// Cubic through four nodes around `cell`, kept inside the uniform piece.
    fn stencil(&self, cell: usize) -> usize {
        let (s, e) = self.piece_of(cell);
        cell.saturating_sub(1).clamp(s, e - 3)
    }

    fn cubic(&self, u: &[f64], j0: usize, x: f64) -> f64 {
        let xs = &self.nodes[j0..j0 + 4];
        let mut acc = 0.0;
        for k in 0..4 {
            let mut l = 1.0;
            for m in 0..4 {
                if m != k {
                    l *= (x - xs[m]) / (xs[k] - xs[m]);
                }
            }
            acc += l * u[j0 + k];
        }
        acc
    }

    /// `∫_a^b u r^{N-1} dr` for `[a, b]` inside `cell`, on the local cubic interpolant.
    fn cell_integral(&self, u: &[f64], cell: usize, a: f64, b: f64) -> f64 {
        let j0 = self.stencil(cell);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let nm1 = self.dim as i32 - 1;
        GAUSS4
            .iter()
            .map(|(x, w)| {
                let r = mid + half * x;
                w * self.cubic(u, j0, r) * r.powi(nm1)
            })
            .sum::<f64>()
            * half
    }

    fn locate(&self, x: f64) -> usize {
        match self.nodes.binary_search_by(|r| r.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.intervals() - 1),
            Err(i) => i.saturating_sub(1).min(self.intervals() - 1),
        }
    }

    /// `∫_a^b u` (radial weight and surface factor included) on the piecewise
    /// cubic interpolant of `u`.
    pub fn integrate_range(&self, u: &[f64], a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let (ca, cb) = (self.locate(a), self.locate(b));
        let mut acc = 0.0;
        for cell in ca..=cb {
            let lo = self.nodes[cell].max(a);
            let hi = self.nodes[cell + 1].min(b);
            if hi > lo {
                acc += self.cell_integral(u, cell, lo, hi);
            }
        }
        self.surface * acc
    }

    /// `∫ s·u` for a step function `s` given by `segments`.
    pub fn integrate_piecewise(&self, u: &[f64], segments: &Segments) -> f64 {
        segments
            .values
            .iter()
            .enumerate()
            .filter(|(_, s)| **s != 0.0)
            .map(|(k, s)| s * self.integrate_range(u, segments.breaks[k], segments.breaks[k + 1]))
            .sum()
    }

    /// `∫|u|`, split exactly at the zeros of the cubic interpolant.
    pub fn integrate_abs(&self, u: &[f64]) -> f64 {
        let mut breaks = vec![0.0];
        let mut values = vec![];
        for cell in 0..self.intervals() {
            let (a, b) = (u[cell], u[cell + 1]);
            let s = if a != 0.0 { a.signum() } else { b.signum() };
            if values.last() != Some(&s) {
                if !values.is_empty() {
                    breaks.push(self.nodes[cell]);
                }
                values.push(s);
            }
            if a * b < 0.0 {
                let z = self.cubic_root(u, cell);
                breaks.push(z);
                values.push(b.signum());
            }
        }
        breaks.push(self.length);
        self.integrate_piecewise(u, &Segments { breaks, values })
    }

    fn cubic_root(&self, u: &[f64], cell: usize) -> f64 {
        let j0 = self.stencil(cell);
        let (mut lo, mut hi) = (self.nodes[cell], self.nodes[cell + 1]);
        let flo = self.cubic(u, j0, lo);
        let lin = lo + (hi - lo) * u[cell] / (u[cell] - u[cell + 1]);
        if (self.cubic(u, j0, lin) > 0.0) == (flo > 0.0) {
            lo = lin;
        } else {
            hi = lin;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (self.cubic(u, j0, mid) > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Sign pattern of the piecewise-linear interpolant of `u`, with values
    /// `|u| <= band` treated as zero.
    pub fn sign_segments(&self, u: &[f64], band: f64) -> Segments {
        let s: Vec<f64> = u.iter().map(|&v| if v.abs() <= band { 0.0 } else { v.signum() }).collect();
        let mut breaks = vec![0.0];
        let mut values: Vec<f64> = vec![];
        let push = |x: f64, val: f64, breaks: &mut Vec<f64>, values: &mut Vec<f64>| {
            if values.last() == Some(&val) {
                return;
            }
            if !values.is_empty() {
                breaks.push(x);
            }
            values.push(val);
        };
        for cell in 0..self.intervals() {
            let (a, b) = (self.nodes[cell], self.nodes[cell + 1]);
            match (s[cell], s[cell + 1]) {
                (x, y) if x == y => push(a, x, &mut breaks, &mut values),
                (x, 0.0) => push(a, x, &mut breaks, &mut values),
                (0.0, y) => push(a, y, &mut breaks, &mut values),
                (x, y) => {
                    push(a, x, &mut breaks, &mut values);
                    let z = a + (b - a) * u[cell] / (u[cell] - u[cell + 1]);
                    push(z, y, &mut breaks, &mut values);
                }
            }
        }
        breaks.push(self.length);
        Segments { breaks, values }
    }

    /// Measures of `{u > 0}`, `{u < 0}`, `{u = 0}` for the banded linear interpolant.
    pub fn sign_measures(&self, u: &[f64], band: f64) -> (f64, f64, f64) {
        let seg = self.sign_segments(u, band);
        let mut m = (0.0, 0.0, 0.0);
        for (k, v) in seg.values.iter().enumerate() {
            let mu = self.shell_measure(seg.breaks[k], seg.breaks[k + 1]);
            match v {
                v if *v > 0.0 => m.0 += mu,
                v if *v < 0.0 => m.1 += mu,
                _ => m.2 += mu,
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn integrate_examples() {
        let disk = RadialGrid::new(2, 1000, DomainMode::Ball).unwrap();
        assert!((disk.integrate(&vec![1.0; disk.len()]) - PI).abs() < 1e-12);
        let line = RadialGrid::new(1, 1000, DomainMode::Interval).unwrap();
        assert!((line.integrate(line.nodes()) - 0.5).abs() < 1e-12);
        let ball = RadialGrid::new(3, 1000, DomainMode::Ball).unwrap();
        let r2 = ball.sample(|r| r * r);
        assert!((ball.integrate(&r2) / (4.0 * PI / 5.0) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn weight_exactness() {
        for dim in 1..=8 {
            let g = RadialGrid::new(dim, 2000, DomainMode::Ball).unwrap();
            let s: f64 = g.weights().iter().sum();
            assert!((s * dim as f64 - 1.0).abs() < 1e-12, "N={dim}: {s}");
            assert!(g.weights().iter().skip(1).all(|w| *w > 0.0));
        }
        let b = RadialGrid::with_breakpoint(5, 10_000, DomainMode::Ball, 2f64.powf(-0.2)).unwrap();
        assert!((b.weights().iter().sum::<f64>() * 5.0 - 1.0).abs() < 1e-12);
        assert!(b.nodes().contains(&2f64.powf(-0.2)));
    }

    #[test]
    fn norms() {
        let g = RadialGrid::new(1, 2000, DomainMode::Interval).unwrap();
        let c = g.sample(|r| (PI * r).cos());
        assert!((g.lp_norm(&c, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-10);
        let three = vec![3.0; g.len()];
        assert!((g.lp_norm(&three, 1.7).unwrap() - 3.0).abs() < 1e-12);
        assert!(g.lp_norm(&c, 0.5).is_err());
    }

    #[test]
    fn laplacian_examples() {
        let g = RadialGrid::new(3, 400, DomainMode::Ball).unwrap();
        let r2 = g.sample(|r| r * r);
        let l = g.laplacian(&r2).unwrap();
        for v in &l[1..l.len() - 1] {
            assert!((v - 6.0).abs() < 1e-9);
        }
        assert!((l[0] - 6.0).abs() < 1e-9);
        let line = RadialGrid::new(1, 1000, DomainMode::Interval).unwrap();
        let c = line.sample(|r| (PI * r).cos());
        let lc = line.laplacian(&c).unwrap();
        let err = lc.iter().zip(line.nodes()).map(|(v, r)| (v + PI * PI * (PI * r).cos()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
        let flat = line.laplacian(&vec![2.5; line.len()]).unwrap();
        assert!(flat.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn abs_integral_splits_at_zero() {
        let g = RadialGrid::new(1, 999, DomainMode::Interval).unwrap();
        let u = g.sample(|r| r - 1.0 / 3.0);
        let exact = (1.0 / 3.0f64).powi(2) / 2.0 + (2.0 / 3.0f64).powi(2) / 2.0;
        assert!((g.integrate_abs(&u) - exact).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(RadialGrid::new(2, 100, DomainMode::Interval).is_err());
        assert!(RadialGrid::new(1, 4, DomainMode::Interval).is_err());
        assert!(RadialGrid::with_length(1, 100, DomainMode::Interval, -1.0).is_err());
    }
}
