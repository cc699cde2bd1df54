//! Exponent algebra: dual exponents, region tags and the Λ ↔ c relations.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Absolute tolerance on `|pq - 1|` for the hyperbola test.
pub const HYPERBOLA_TOL: f64 = 1e-12;
/// Absolute tolerance on `1/(p+1) + 1/(q+1) - (N-2)/N` for the critical curve.
pub const CRITICAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub p: f64,
    pub q: f64,
    pub dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    Subcritical,
    CriticalAdmissible,
    CriticalInadmissible,
    Hyperbola,
    SignCase,
    Supercritical,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Region::Subcritical => "subcritical",
            Region::CriticalAdmissible => "critical-admissible",
            Region::CriticalInadmissible => "critical-inadmissible",
            Region::Hyperbola => "hyperbola",
            Region::SignCase => "sign-case",
            Region::Supercritical => "supercritical",
        };
        f.write_str(s)
    }
}

impl ExponentPair {
    pub fn new(p: f64, q: f64, dim: usize) -> Result<Self> {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidExponents(format!("p must be finite and >= 0, got {p}")));
        }
        if !q.is_finite() || q <= 0.0 {
            return Err(Error::InvalidExponents(format!("q must be finite and > 0, got {q}")));
        }
        if dim == 0 {
            return Err(Error::InvalidExponents("dimension must be >= 1".into()));
        }
        Ok(Self { p, q, dim })
    }

    /// `(q, p)` in the same dimension.
    pub fn swapped(&self) -> Result<Self> {
        Self::new(self.q, self.p, self.dim)
    }

    /// `α = (p+1)/p`, undefined for the sign case.
    pub fn alpha(&self) -> Option<f64> {
        (self.p > 0.0).then(|| (self.p + 1.0) / self.p)
    }

    pub fn beta(&self) -> f64 {
        (self.q + 1.0) / self.q
    }

    fn gamma_denominator(&self) -> f64 {
        2.0 * self.p * self.q + self.p + self.q
    }

    pub fn gamma1(&self) -> Option<f64> {
        (self.p > 0.0).then(|| self.p * (self.q + 1.0) / self.gamma_denominator())
    }

    pub fn gamma2(&self) -> Option<f64> {
        (self.p > 0.0).then(|| self.q * (self.p + 1.0) / self.gamma_denominator())
    }

    pub fn gamma(&self) -> f64 {
        (self.p + 1.0) * (self.q + 1.0) / self.gamma_denominator()
    }

    pub fn on_hyperbola(&self) -> bool {
        (self.p * self.q - 1.0).abs() <= HYPERBOLA_TOL
    }

    /// `1/(p+1) + 1/(q+1) - (N-2)/N`; positive below the critical hyperbola.
    pub fn criticality(&self) -> f64 {
        let n = self.dim as f64;
        1.0 / (self.p + 1.0) + 1.0 / (self.q + 1.0) - (n - 2.0) / n
    }

    pub fn region(&self) -> Region {
        classify_region(self)
    }

    /// Exponent `(p+1)(q+1)/(pq-1)` of the level relation.
    pub fn level_exponent(&self) -> Result<f64> {
        if self.on_hyperbola() {
            return Err(Error::Hyperbola);
        }
        Ok((self.p + 1.0) * (self.q + 1.0) / (self.p * self.q - 1.0))
    }
}

fn critical_bounds_hold(e: &ExponentPair) -> bool {
    let n = e.dim as f64;
    let bound = match e.dim {
        d if d >= 6 => (n + 2.0) / (2.0 * (n - 2.0)),
        5 => 17.0 / 13.0,
        4 => 7.0 / 3.0,
        _ => return false,
    };
    e.p > bound && e.q > bound
}

/// Region tag of `(p, q, N)`.
///
/// The sign case is tested first, then the hyperbola `pq = 1` (which always
/// lies strictly inside the subcritical region), then the critical curve.
pub fn classify_region(e: &ExponentPair) -> Region {
    if e.p == 0.0 {
        return Region::SignCase;
    }
    if e.on_hyperbola() {
        return Region::Hyperbola;
    }
    let s = e.criticality();
    if s.abs() <= CRITICAL_TOL {
        if critical_bounds_hold(e) {
            Region::CriticalAdmissible
        } else {
            Region::CriticalInadmissible
        }
    } else if s > 0.0 {
        Region::Subcritical
    } else {
        Region::Supercritical
    }
}

/// Level `c` from `Λ`.
pub fn c_from_lambda(e: &ExponentPair, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("Λ must be positive, got {lambda}")));
    }
    if e.p == 0.0 {
        return Ok(-lambda.powf(-(e.q + 1.0)) / (e.q + 1.0));
    }
    let k = e.level_exponent()?;
    let pre = (e.p * e.q - 1.0) / ((e.p + 1.0) * (e.q + 1.0));
    Ok(pre * (k * lambda.ln()).exp())
}

/// Inverse of [`c_from_lambda`].
pub fn lambda_from_c(e: &ExponentPair, c: f64) -> Result<f64> {
    if e.p == 0.0 {
        if !(c < 0.0) {
            return Err(Error::InvalidArgument(format!("sign-case level must be negative, got {c}")));
        }
        return Ok((-(e.q + 1.0) * c).powf(-1.0 / (e.q + 1.0)));
    }
    let k = e.level_exponent()?;
    let scaled = c * (e.p + 1.0) * (e.q + 1.0) / (e.p * e.q - 1.0);
    if !(scaled > 0.0) {
        return Err(Error::InvalidArgument(format!("level {c} has the wrong sign for pq - 1 = {}", e.p * e.q - 1.0)));
    }
    Ok((scaled.ln() / k).exp())
}

/// Multipliers `(Λ^{(q+1)/(pq-1)}, Λ^{(q+1)/(q(pq-1))})` turning a
/// Λ-normalized eigenpair into a solution of the unscaled system.
pub fn primal_scaling(e: &ExponentPair, lambda: f64) -> Result<(f64, f64)> {
    if e.on_hyperbola() {
        return Err(Error::Hyperbola);
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("Λ must be positive, got {lambda}")));
    }
    let d = e.p * e.q - 1.0;
    let l = lambda.ln();
    Ok((((e.q + 1.0) / d * l).exp(), ((e.q + 1.0) / (e.q * d) * l).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(p: f64, q: f64, n: usize) -> ExponentPair {
        ExponentPair::new(p, q, n).unwrap()
    }

    #[test]
    fn region_examples() {
        assert_eq!(pair(2.0, 2.0, 6).region(), Region::CriticalAdmissible);
        assert_eq!(pair(2.0, 0.5, 3).region(), Region::Hyperbola);
        assert_eq!(pair(1.0, 1.0, 3).region(), Region::Hyperbola);
        assert_eq!(pair(0.0, 1.0, 2).region(), Region::SignCase);
        assert_eq!(pair(3.0, 2.0, 1).region(), Region::Subcritical);
        assert_eq!(pair(7.0, 7.0, 3).region(), Region::Supercritical);
        // 1/(p+1) + 1/(q+1) = 1/3 with p = q = 5 in dimension 3: no admissibility bound there
        assert_eq!(pair(5.0, 5.0, 3).region(), Region::CriticalInadmissible);
        // N = 4: p = q = 3 is critical but 3 > 7/3
        assert_eq!(pair(3.0, 3.0, 4).region(), Region::CriticalAdmissible);
        assert!(ExponentPair::new(-0.1, 1.0, 1).is_err());
        assert!(ExponentPair::new(1.0, 0.0, 1).is_err());
    }

    #[test]
    fn level_relations() {
        let e = pair(3.0, 3.0, 1);
        assert!((c_from_lambda(&e, 2.0).unwrap() - 2.0).abs() < 1e-14);
        let s = pair(0.0, 1.0, 1);
        assert!((c_from_lambda(&s, 1.0).unwrap() + 0.5).abs() < 1e-15);
        assert_eq!(c_from_lambda(&pair(2.0, 0.5, 1), 3.0), Err(Error::Hyperbola));
        let (su, sv) = primal_scaling(&e, 4.0).unwrap();
        assert!((su - 2.0).abs() < 1e-14);
        assert!((sv - 4f64.powf(1.0 / 6.0)).abs() < 1e-14);
        let (a, b) = primal_scaling(&pair(0.7, 2.5, 2), 1.0).unwrap();
        assert_eq!((a, b), (1.0, 1.0));
    }

    #[test]
    fn lambda_from_c_rejects_wrong_sign() {
        assert!(lambda_from_c(&pair(3.0, 3.0, 1), -1.0).is_err());
        assert!(lambda_from_c(&pair(0.0, 3.0, 1), 1.0).is_err());
        let below = pair(0.5, 1.0, 1);
        let c = c_from_lambda(&below, 3.0).unwrap();
        assert!(c < 0.0);
        assert!((lambda_from_c(&below, c).unwrap() / 3.0 - 1.0).abs() < 1e-13);
    }
}
