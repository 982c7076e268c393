//! Smallness conditions on the initial data.

use serde::Serialize;

use crate::diagnostics::{gradient_norm, sigma_norm, vector_norm};
use crate::littlewood_paley::DyadicDecomposition;
use crate::spectral::{ScalarField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GateReport {
    /// `‖u₀‖_{Ḃ^{2-α}_{d,1}}`.
    pub u_norm: f64,
    /// `‖σ₀‖_{Ḃ¹_{d,1}}`.
    pub sigma_norm: f64,
    pub sum: f64,
    pub epsilon: f64,
    pub eta: f64,
    /// Both critical norms below their thresholds.
    pub global_pass: bool,
    pub sigma_small: bool,
    /// `S₀ = ‖∇σ₀‖_{Ḃ¹_{d,1}}`.
    pub s0: f64,
    /// `U₀' = ‖∇u₀‖_{Ḃ^{2-α}_{d,1}}`.
    pub u0_prime: f64,
    /// Largest horizon allowed by the large-velocity monitor; present when `σ₀` is small.
    pub local_horizon: Option<f64>,
}

/// Largest `T` with `max(U₀^{1/α} (T^{1/α} A)^{1-1/α}, T^{1/α} A) <= ε`, `A = S₀ + U₀'`.
///
/// Returns `+∞` when `A = 0`.
pub fn local_horizon(u0: f64, s0: f64, u0_prime: f64, epsilon: f64, alpha: f64) -> f64 {
    let a = s0 + u0_prime;
    if a == 0.0 {
        return f64::INFINITY;
    }
    let direct = (epsilon / a).powf(alpha);
    if u0 == 0.0 {
        return direct;
    }
    let coupled = (epsilon.powf(alpha / (alpha - 1.0)) * u0.powf(-1.0 / (alpha - 1.0)) / a).powf(alpha);
    direct.min(coupled)
}

pub fn smallness_gates(
    sigma0: &ScalarField,
    u0: &VectorField,
    epsilon: f64,
    eta: f64,
    alpha: f64,
    dec: &DyadicDecomposition,
) -> GateReport {
    let u_norm = vector_norm(dec, u0, 2.0 - alpha);
    let s_norm = sigma_norm(dec, sigma0, 1.0);
    let ucomp: Vec<&ScalarField> = u0.components().iter().collect();
    let s0 = gradient_norm(dec, &[sigma0], 1.0);
    let u0_prime = gradient_norm(dec, &ucomp, 2.0 - alpha);
    let sigma_small = s_norm < eta;
    GateReport {
        u_norm,
        sigma_norm: s_norm,
        sum: u_norm + s_norm,
        epsilon,
        eta,
        global_pass: u_norm < epsilon && sigma_small,
        sigma_small,
        s0,
        u0_prime,
        local_horizon: sigma_small.then(|| local_horizon(u_norm, s0, u0_prime, epsilon, alpha)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::littlewood_paley::build_cutoffs;
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn zero_data_passes_any_gate() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let dec = build_cutoffs(&g).unwrap();
        let r = smallness_gates(&ScalarField::zeros(&g), &VectorField::zeros(&g), 1e-9, 1e-9, 1.5, &dec);
        assert!(r.global_pass);
        assert_eq!(r.local_horizon, Some(f64::INFINITY));
    }

    #[test]
    fn large_velocity_gets_a_finite_shrinking_horizon() {
        let g = make_grid(1, 64, 2.0 * PI).unwrap();
        let dec = build_cutoffs(&g).unwrap();
        let u = VectorField::new(vec![ScalarField::from_fn(&g, |x| 2.0 * x[0].sin() + (3.0 * x[0]).cos())]).unwrap();
        let s = ScalarField::zeros(&g);
        let r1 = smallness_gates(&s, &u, 1e-2, 1e-2, 1.5, &dec);
        assert!(!r1.global_pass);
        let t1 = r1.local_horizon.unwrap();
        assert!(t1.is_finite() && t1 > 0.0);
        let r2 = smallness_gates(&s, &u.scale(2.0), 1e-2, 1e-2, 1.5, &dec);
        assert!(r2.local_horizon.unwrap() <= 0.5 * t1);
    }

    #[test]
    fn horizon_satisfies_the_monitor_with_equality() {
        let (u0, s0, up, eps, alpha) = (0.7, 0.2, 1.3, 1e-2, 1.4);
        let t = local_horizon(u0, s0, up, eps, alpha);
        let a = s0 + up;
        let lhs = (u0.powf(1.0 / alpha) * (t.powf(1.0 / alpha) * a).powf(1.0 - 1.0 / alpha))
            .max(t.powf(1.0 / alpha) * a);
        assert!((lhs - eps).abs() < 1e-12 * eps);
        // monotone in the data
        assert!(local_horizon(u0, s0, 2.0 * up, eps, alpha) < t);
        assert!(local_horizon(2.0 * u0, s0, up, eps, alpha) <= t);
    }
}
