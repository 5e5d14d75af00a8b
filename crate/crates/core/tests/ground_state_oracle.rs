//! The shooting solver against an independent fixed-step RK4 shooter written
//! here, and the Pohozaev/Gagliardo–Nirenberg relations on its output.

use inlsv_core::functionals::{gn_ratio, record};
use inlsv_core::{build_grid, solve_ground_state, GroundState, ModelParams, Potential, ShootingOptions};

/// `Q'' + (2/r) Q' - Q + r^{-b} |Q|^alpha Q = 0`, state `(Q, Q')`.
fn rhs(r: f64, y: [f64; 2], alpha: f64, b: f64) -> [f64; 2] {
    [y[1], -2.0 / r * y[1] + y[0] - r.powf(-b) * y[0].abs().powf(alpha) * y[0]]
}

/// Integrates from a small `r0` with the leading series terms. Returns `+1` if
/// the trajectory turns back up (undershoot), `-1` if it crosses zero
/// (overshoot), and the trajectory (steps of `h`, graded near the origin).
fn shoot(q0: f64, alpha: f64, b: f64, r_end: f64, h: f64) -> (i32, Vec<(f64, f64)>) {
    let r0 = 1e-6;
    let c = q0.powf(alpha + 1.0) / ((2.0 - b) * (3.0 - b));
    let mut y = [q0 + q0 / 6.0 * r0 * r0 - c * r0.powf(2.0 - b), q0 / 3.0 * r0 - (2.0 - b) * c * r0.powf(1.0 - b)];
    let mut r = r0;
    let mut path = vec![(0.0, q0)];
    while r < r_end {
        // graded near the origin, where 2/r makes large steps unstable
        let h = h.min(0.05 * r);
        let k1 = rhs(r, y, alpha, b);
        let k2 = rhs(r + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]], alpha, b);
        let k3 = rhs(r + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]], alpha, b);
        let k4 = rhs(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]], alpha, b);
        for i in 0..2 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        r += h;
        path.push((r, y[0]));
        if y[0] < 0.0 {
            return (-1, path);
        }
        if y[1] > 0.0 {
            return (1, path);
        }
    }
    (0, path)
}

/// Bisection on `Q(0)`; returns `(Q(0), mass)` with the mass integrated along
/// the last undershoot up to its turning point.
fn oracle(alpha: f64, b: f64) -> (f64, f64) {
    let h = 2e-4;
    let (mut lo, mut hi) = (0.5, 50.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match shoot(mid, alpha, b, 30.0, h).0 {
            1 => lo = mid,
            _ => hi = mid,
        }
    }
    let (_, path) = shoot(lo, alpha, b, 30.0, h);
    // stop where the two bracketing trajectories separate
    let (_, upper) = shoot(hi, alpha, b, 30.0, h);
    let end = path
        .iter()
        .zip(&upper)
        .position(|(a, c)| (a.1 - c.1).abs() > 1e-8 * a.1.abs())
        .unwrap_or(path.len().min(upper.len()) - 1);
    let mut mass = 0.0;
    for w in path[..end].windows(2) {
        let f = |p: (f64, f64)| 4.0 * std::f64::consts::PI * p.0 * p.0 * p.1 * p.1;
        mass += 0.5 * (w[1].0 - w[0].0) * (f(w[0]) + f(w[1]));
    }
    // exponential tail A e^{-r}/r beyond the cut
    let (r1, q1) = path[end - 1];
    let a = q1 * r1 * r1.exp();
    mass += 4.0 * std::f64::consts::PI * a * a * (-2.0 * r1).exp() / 2.0;
    (0.5 * (lo + hi), mass)
}

fn solve(alpha: f64, b: f64) -> GroundState<f64> {
    let p = ModelParams::focusing(alpha, b).unwrap();
    let g = build_grid(20.0, 4096).unwrap();
    solve_ground_state(&p, &g, &ShootingOptions::default()).unwrap()
}

#[test]
fn cubic_ground_state_matches_oracle() {
    let (q0, mass) = oracle(2.0, 0.0);
    assert!((q0 - 4.33738768).abs() < 1e-6, "oracle Q(0) = {q0}");
    assert!((mass - 18.8973).abs() < 1e-3, "oracle mass = {mass}");
    let gs = solve(2.0, 0.0);
    assert!((gs.q0 - q0).abs() / q0 < 1e-7, "{} vs {q0}", gs.q0);
    assert!((gs.mass - mass).abs() / mass < 1e-5, "{} vs {mass}", gs.mass);
}

#[test]
fn inhomogeneous_ground_states_match_oracle() {
    for (alpha, b) in [(2.0, 0.5), (1.5, 0.3), (2.5, 0.3)] {
        let (q0, mass) = oracle(alpha, b);
        let gs = solve(alpha, b);
        assert!((gs.q0 - q0).abs() / q0 < 1e-6, "({alpha}, {b}): {} vs {q0}", gs.q0);
        assert!((gs.mass - mass).abs() / mass < 1e-4, "({alpha}, {b}): {} vs {mass}", gs.mass);
    }
}

#[test]
fn pohozaev_relations() {
    // ||Q||^2 : ||grad Q||^2 : int |x|^{-b} Q^{alpha+2} from the two identities
    for (alpha, b) in [(2.0, 0.0), (2.0, 0.5), (2.5, 0.3), (1.5, 0.0)] {
        let gs = solve(alpha, b);
        let grad_pred = (3.0 * alpha + 2.0 * b) / (4.0 - 2.0 * b - alpha) * gs.mass;
        let pot_pred = 2.0 * (alpha + 2.0) / (4.0 - 2.0 * b - alpha) * gs.mass;
        assert!((gs.grad_sq / grad_pred - 1.0).abs() < 1e-5, "({alpha}, {b})");
        assert!((gs.pot_int / pot_pred - 1.0).abs() < 1e-5, "({alpha}, {b})");
    }
}

#[test]
fn q_saturates_gagliardo_nirenberg() {
    let gs = solve(2.0, 0.5);
    let (_, closed) = gs.c_opt_two_ways();
    let rec = record(&gs.profile, &Potential::zero(), &gs.params, 0.0, &[]).unwrap();
    assert!((gn_ratio(&rec, &gs.params) / closed - 1.0).abs() < 1e-5);
    // any other profile sits strictly below
    let grid = gs.profile.grid().clone();
    for width in [0.5, 1.0, 2.0] {
        let g = inlsv_core::RadialField::from_real_fn(grid.clone(), |r| (-r * r / (2.0 * width * width)).exp()).unwrap();
        let rec = record(&g, &Potential::zero(), &gs.params, 0.0, &[]).unwrap();
        assert!(gn_ratio(&rec, &gs.params) < closed);
    }
}

#[test]
fn energy_threshold_identity() {
    let gs = solve(2.5, 0.5);
    assert!((gs.threshold_energy_from_grad() / gs.threshold_energy - 1.0).abs() < 1e-5);
    assert!(gs.virial_h().abs() / gs.grad_sq < 1e-5);
}
