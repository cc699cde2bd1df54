//! For `q = 1` the sign system is `Δ²u = sign(u)`, so its level on the unit
//! ball must equal the closed-form radial energy.

use neumann_core::closed_form::h1;
use neumann_core::sign_limit::solve_sign_system;
use neumann_core::{DomainMode, RadialGrid, SolverOptions};

#[test]
fn sign_level_is_radial_biharmonic_energy() {
    for dim in [2, 3, 5] {
        let g = RadialGrid::new(dim, 2000, DomainMode::Ball).unwrap();
        let rep = solve_sign_system(1.0, &g, &SolverOptions::default()).unwrap();
        let want = h1(dim).unwrap();
        assert!(rep.converged, "N={dim}");
        assert!((rep.c / want - 1.0).abs() < 1e-6, "N={dim}: {} vs {want}", rep.c);
        let a = 2f64.powf(-1.0 / dim as f64);
        assert!(rep.zeros.len() == 1 && (rep.zeros[0] - a).abs() < 1e-3, "N={dim}: {:?}", rep.zeros);
    }
}
