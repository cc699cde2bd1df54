//! `c_{p,p}` on the unit interval against a shooting computation of the
//! one-zero solution of `-u'' = |u|^{p-1}u`, to which the system reduces when
//! `u = v`.

use neumann_core::experiments::check_pq_to_0;
use neumann_core::SolverOptions;

/// `c_{p,p} / (2c₀)` with `c₀ = -1/24` from RK4 shooting.
fn shooting_ratio(p: f64) -> f64 {
    let rhs = |w: f64| -w.signum() * w.abs().powf(p);
    let h = 1e-5;
    let (mut w, mut dw, mut r) = (1.0f64, 0.0f64, 0.0f64);
    let mut acc = 0.0;
    loop {
        let k1 = (dw, rhs(w));
        let k2 = (dw + 0.5 * h * k1.1, rhs(w + 0.5 * h * k1.0));
        let k3 = (dw + 0.5 * h * k2.1, rhs(w + 0.5 * h * k2.0));
        let k4 = (dw + h * k3.1, rhs(w + h * k3.0));
        let w1 = w + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        let dw1 = dw + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if w1 <= 0.0 {
            let s = w / (w - w1);
            acc += 0.5 * s * h * w.powf(p + 1.0);
            r += s * h;
            break;
        }
        acc += 0.5 * h * (w.powf(p + 1.0) + w1.powf(p + 1.0));
        (w, dw, r) = (w1, dw1, r + h);
    }
    // u(x) = λ w(μx) on [0, 1/2], odd about 1/2
    let mu = 2.0 * r;
    let lam = mu.powf(-2.0 / (1.0 - p));
    let int_u = 2.0 * lam.powf(p + 1.0) * acc / mu;
    (p - 1.0) / (p + 1.0) * int_u / (-1.0 / 12.0)
}

#[test]
fn matches_shooting() {
    let rep = check_pq_to_0(2000, &SolverOptions { max_iter: 5000, ..Default::default() }).unwrap();
    for s in &rep.samples {
        let want = shooting_ratio(s.p);
        assert!((s.ratio - want).abs() < 2e-5, "p={}: {} vs shooting {want}", s.p, s.ratio);
        assert!(s.uv_gap < 1e-6);
    }
    assert!(rep.monotone);
}
