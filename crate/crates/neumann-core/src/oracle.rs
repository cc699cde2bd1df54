//! Brute-force maximization of the dual quotient on tiny grids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ExponentPair;
use crate::green::Green;
use crate::grid::RadialGrid;

pub const MAX_ORACLE_INTERVALS: usize = 12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleResult {
    pub best: f64,
    /// Best value after each restart.
    pub running_best: Vec<f64>,
    pub restarts: usize,
}

struct Quotient<'a> {
    green: Green<'a>,
    alpha: f64,
    beta: f64,
}

impl Quotient<'_> {
    fn grid(&self) -> &RadialGrid {
        self.green.grid()
    }

    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let g = self.grid();
        g.surface() * g.weights().iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * x * y).sum::<f64>()
    }

    fn power_norm(&self, f: &[f64], s: f64) -> f64 {
        let g = self.grid();
        g.surface() * g.weights().iter().zip(f).map(|(w, x)| w * x.abs().powf(s)).sum::<f64>()
    }

    /// `ln ∫fKg - ln‖f‖_α - ln‖g‖_β` (or `-∞` when `∫fKg <= 0`).
    fn log_value(&self, f: &[f64], g: &[f64]) -> f64 {
        let j = self.inner(f, &self.green.solve_unchecked(g));
        if !(j > 0.0) {
            return f64::NEG_INFINITY;
        }
        j.ln() - self.power_norm(f, self.alpha).ln() / self.alpha - self.power_norm(g, self.beta).ln() / self.beta
    }

    /// Mean-zero gradients of the log quotient in the weighted inner product.
    fn gradient(&self, f: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let kg = self.green.solve_unchecked(g);
        let kf = self.green.solve_unchecked(f);
        let j = self.inner(f, &kg);
        let nf = self.power_norm(f, self.alpha);
        let ng = self.power_norm(g, self.beta);
        let df: Vec<f64> =
            kg.iter().zip(f).map(|(k, x)| k / j - x.signum() * x.abs().powf(self.alpha - 1.0) / nf).collect();
        let dg: Vec<f64> =
            kf.iter().zip(g).map(|(k, x)| k / j - x.signum() * x.abs().powf(self.beta - 1.0) / ng).collect();
        (self.grid().project_mean_zero(&df), self.grid().project_mean_zero(&dg))
    }

    fn normalize(&self, f: &mut [f64], s: f64) {
        let n = self.power_norm(f, s).powf(1.0 / s);
        if n > 0.0 {
            f.iter_mut().for_each(|x| *x /= n);
        }
    }

    fn ascend(&self, mut f: Vec<f64>, mut g: Vec<f64>) -> f64 {
        self.normalize(&mut f, self.alpha);
        self.normalize(&mut g, self.beta);
        let mut value = self.log_value(&f, &g);
        if !value.is_finite() {
            // start from the other orientation
            g.iter_mut().for_each(|x| *x = -*x);
            value = self.log_value(&f, &g);
        }
        let mut step = 1.0;
        let mut stalled = 0;
        for _ in 0..20_000 {
            let (df, dg) = self.gradient(&f, &g);
            let slope = self.inner(&df, &df) + self.inner(&dg, &dg);
            if slope <= 1e-30 {
                break;
            }
            let mut accepted = false;
            step *= 2.0;
            while step > 1e-18 {
                let mut f1: Vec<f64> = f.iter().zip(&df).map(|(a, b)| a + step * b).collect();
                let mut g1: Vec<f64> = g.iter().zip(&dg).map(|(a, b)| a + step * b).collect();
                self.normalize(&mut f1, self.alpha);
                self.normalize(&mut g1, self.beta);
                let v1 = self.log_value(&f1, &g1);
                if v1 >= value + 1e-4 * step * slope {
                    stalled = if v1 - value < 1e-15 * value.abs().max(1.0) { stalled + 1 } else { 0 };
                    f = f1;
                    g = g1;
                    value = v1;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted || stalled >= 20 {
                break;
            }
        }
        value.exp()
    }
}

/// Best quotient `∫fKg / (‖f‖_α‖g‖_β)` over `restarts` seeded random starts
/// (at least 64), each refined by projected gradient ascent with backtracking.
pub fn oracle_dual_smallgrid(e: &ExponentPair, grid: &RadialGrid, restarts: usize, seed: u64) -> Result<OracleResult> {
    if grid.intervals() > MAX_ORACLE_INTERVALS {
        return Err(Error::InvalidArgument(format!(
            "oracle grid has {} intervals, limit {MAX_ORACLE_INTERVALS}",
            grid.intervals()
        )));
    }
    let alpha = e.alpha().ok_or_else(|| Error::InvalidExponents("the oracle needs p > 0".into()))?;
    let quotient = Quotient { green: Green::new(grid)?, alpha, beta: e.beta() };
    let restarts = restarts.max(64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    let mut running_best = Vec::with_capacity(restarts);
    for _ in 0..restarts {
        let f: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let value = quotient.ascend(grid.project_mean_zero(&f), grid.project_mean_zero(&g));
        if value > best {
            best = value;
        }
        running_best.push(best);
    }
    Ok(OracleResult { best, running_best, restarts })
}
