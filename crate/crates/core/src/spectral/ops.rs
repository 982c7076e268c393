//! Differential and fractional-differential operators as Fourier multipliers.

use num_complex::Complex64;

use super::field::{ScalarField, VectorField};
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Applies a multiplier `m(idx)` indexed by flat spectral index.
pub fn apply_multiplier(f: &ScalarField, m: impl Fn(usize) -> Complex64) -> ScalarField {
    let coeffs: Vec<Complex64> = f
        .spectral()
        .iter()
        .enumerate()
        .map(|(idx, c)| c * m(idx))
        .collect();
    ScalarField::from_spectral(f.grid(), &coeffs)
}

/// Applies a real multiplier that depends on `|k|` only.
pub fn apply_radial(f: &ScalarField, m: impl Fn(f64) -> f64) -> ScalarField {
    let knorm = f.grid().k_norms();
    apply_multiplier(f, |idx| Complex64::new(m(knorm[idx]), 0.0))
}

/// `|k|^alpha` with the `k = 0` value fixed to zero.
pub(crate) fn homogeneous_symbol(k: f64, alpha: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k.powf(alpha)
    }
}

/// `(-Δ)^{α/2}`: multiplies the coefficient at `k` by `|k|^α` and kills the mean.
pub fn fractional_laplacian(f: &ScalarField, alpha: f64) -> Result<ScalarField> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::config(format!(
            "fractional Laplacian exponent must lie in (0, 2], got {alpha}"
        )));
    }
    Ok(fractional_laplacian_unchecked(f, alpha))
}

pub(crate) fn fractional_laplacian_unchecked(f: &ScalarField, alpha: f64) -> ScalarField {
    apply_radial(f, |k| homogeneous_symbol(k, alpha))
}

/// Applies a multiplier of arbitrary homogeneity (negative exponents allowed);
/// the `k = 0` coefficient is always mapped to zero.
pub fn riesz_power(f: &ScalarField, exponent: f64) -> ScalarField {
    apply_radial(f, |k| homogeneous_symbol(k, exponent))
}

/// `-Δ` realized as the multiplier `|k|^2`.
pub fn neg_laplacian(f: &ScalarField) -> ScalarField {
    apply_radial(f, |k| k * k)
}

/// Partial derivative along `axis`; the unpaired Nyquist mode is dropped.
pub fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    let grid = f.grid().clone();
    apply_multiplier(f, |idx| {
        if grid.is_nyquist(idx, axis) {
            Complex64::new(0.0, 0.0)
        } else {
            I * grid.wavevector(idx)[axis]
        }
    })
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let d = f.grid().dim();
    VectorField::new((0..d).map(|axis| partial(f, axis)).collect())
        .expect("components share the input grid")
}

pub fn divergence(v: &VectorField) -> ScalarField {
    let grid = v.grid().clone();
    let d = v.dim();
    // sum of i k_a v̂_a in one pass
    let spectra: Vec<&[Complex64]> = v.components().iter().map(|c| c.spectral()).collect();
    let coeffs: Vec<Complex64> = (0..grid.len())
        .map(|idx| {
            let kv = grid.wavevector(idx);
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..d {
                if !grid.is_nyquist(idx, a) {
                    acc += I * kv[a] * spectra[a][idx];
                }
            }
            acc
        })
        .collect();
    ScalarField::from_spectral(&grid, &coeffs)
}

/// True when the spectral index survives the 2/3 truncation.
pub fn is_resolved(grid: &super::Grid, idx: usize) -> bool {
    let cut = grid.n() as i64 / 3;
    let m = grid.mode_of(idx);
    m[0].abs() <= cut && m[1].abs() <= cut
}

/// 2/3-rule truncation of a coefficient array; resolved modes are copied untouched.
pub fn dealias_spectrum(grid: &super::Grid, coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .map(|(idx, c)| if is_resolved(grid, idx) { *c } else { Complex64::new(0.0, 0.0) })
        .collect()
}

/// 2/3-rule truncation: zeroes every mode with some `|k_i| > (2/3)(N/2)(2π/L)`.
pub fn dealias(f: &ScalarField) -> ScalarField {
    ScalarField::from_spectral(f.grid(), &dealias_spectrum(f.grid(), f.spectral()))
}

/// Pointwise product followed by 2/3 truncation.
pub fn product(a: &ScalarField, b: &ScalarField) -> Result<ScalarField> {
    a.check_grid(b)?;
    Ok(dealias(&a.mul_raw(b)))
}

/// `(u·∇) w` for a scalar `w`, dealiased.
pub fn advect_scalar(u: &VectorField, w: &ScalarField) -> Result<ScalarField> {
    u.check_grid(w)?;
    let grad = gradient(w);
    let mut acc = ScalarField::zeros(w.grid());
    for (uc, gc) in u.components().iter().zip(grad.components()) {
        acc = acc.add(&uc.mul_raw(gc));
    }
    Ok(dealias(&acc))
}

/// `(u·∇) v` componentwise, dealiased.
pub fn advect(u: &VectorField, v: &VectorField) -> Result<VectorField> {
    v.try_map_components(|c| advect_scalar(u, c))
}

/// Componentwise scalar times vector, dealiased.
pub fn scalar_times_vector(s: &ScalarField, v: &VectorField) -> Result<VectorField> {
    v.try_map_components(|c| product(s, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rel_err(a: &ScalarField, b: &ScalarField) -> f64 {
        a.sub(b).lp_norm(2.0) / b.lp_norm(2.0).max(f64::MIN_POSITIVE)
    }

    fn random_field(grid: &std::sync::Arc<crate::spectral::Grid>, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ScalarField::from_values(grid, (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect())
    }

    #[test]
    fn fractional_laplacian_kills_constants() {
        let g = make_grid(2, 16, 2.0 * PI).unwrap();
        let f = ScalarField::constant(&g, 3.7);
        for alpha in [0.3, 1.0, 1.5, 2.0] {
            let out = fractional_laplacian(&f, alpha).unwrap();
            assert!(out.max_abs() < 1e-14);
        }
    }

    #[test]
    fn fractional_laplacian_on_cosines() {
        let g = make_grid(1, 64, 2.0 * PI).unwrap();
        let c1 = ScalarField::from_fn(&g, |x| x[0].cos());
        let out = fractional_laplacian(&c1, 1.5).unwrap();
        assert!(rel_err(&out, &c1) < 1e-13);

        let c2 = ScalarField::from_fn(&g, |x| (2.0 * x[0]).cos());
        let out = fractional_laplacian(&c2, 1.5).unwrap();
        let expected = c2.scale(2f64.powf(1.5));
        assert!(rel_err(&out, &expected) < 1e-13);
        assert!((2f64.powf(1.5) - 2.828427).abs() < 1e-6);
    }

    #[test]
    fn fractional_laplacian_rejects_bad_exponent() {
        let g = make_grid(1, 8, 1.0).unwrap();
        let f = ScalarField::zeros(&g);
        assert!(fractional_laplacian(&f, 0.0).is_err());
        assert!(fractional_laplacian(&f, 2.5).is_err());
    }

    #[test]
    fn alpha_two_is_negative_laplacian() {
        for d in [1, 2] {
            let g = make_grid(d, 32, 3.0).unwrap();
            let f = random_field(&g, 11);
            let a = fractional_laplacian(&f, 2.0).unwrap();
            let b = neg_laplacian(&f);
            assert!(rel_err(&a, &b) < 1e-12);
        }
    }

    #[test]
    fn gradient_of_sine_and_divergence_of_constant() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let s = ScalarField::from_fn(&g, |x| x[0].sin());
        let grad = gradient(&s);
        let c = ScalarField::from_fn(&g, |x| x[0].cos());
        assert!(rel_err(grad.component(0), &c) < 1e-13);

        let g2 = make_grid(2, 16, 2.0 * PI).unwrap();
        let v = VectorField::constant(&g2, &[1.5, -2.0]);
        assert!(divergence(&v).max_abs() < 1e-14);
    }

    #[test]
    fn div_grad_matches_laplacian_multiplier() {
        for d in [1, 2] {
            let g = make_grid(d, 32, 2.0).unwrap();
            // band-limited so that the dropped Nyquist mode carries nothing
            let f = dealias(&random_field(&g, 3));
            let lhs = divergence(&gradient(&f));
            let rhs = neg_laplacian(&f).scale(-1.0);
            assert!(rel_err(&lhs, &rhs) < 1e-12);
        }
    }

    #[test]
    fn cosine_has_two_conjugate_coefficients() {
        let g = make_grid(1, 16, 5.0).unwrap();
        let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0] / 5.0).cos());
        let spec = f.spectral();
        for (idx, c) in spec.iter().enumerate() {
            let m = g.mode_of(idx)[0];
            if m.abs() == 1 {
                assert!((c.re - 0.5).abs() < 1e-14 && c.im.abs() < 1e-14);
            } else {
                assert!(c.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn transform_roundtrip_and_parseval() {
        for d in [1, 2] {
            let g = make_grid(d, 32, 1.3).unwrap();
            for seed in 0..100 {
                let f = random_field(&g, seed);
                let back = ScalarField::from_spectral(&g, f.spectral());
                assert!(rel_err(&back, &f) < 1e-12);
                // Parseval by direct summation
                let energy_phys: f64 =
                    f.values().iter().map(|v| v * v).sum::<f64>() / g.len() as f64;
                let energy_spec: f64 = f.spectral().iter().map(|c| c.norm_sqr()).sum();
                assert!((energy_phys - energy_spec).abs() <= 1e-10 * energy_phys);
            }
        }
    }

    #[test]
    fn dealias_keeps_low_modes_bit_exact() {
        let g = make_grid(1, 64, 2.0 * PI).unwrap();
        let f = ScalarField::from_fn(&g, |x| (3.0 * x[0]).cos() + 0.2 * (5.0 * x[0]).sin());
        let out = dealias(&f);
        for (idx, (a, b)) in out.spectral().iter().zip(f.spectral()).enumerate() {
            if is_resolved(&g, idx) {
                // the coefficients are recomputed from samples; compare at roundoff
                assert!((a - b).norm() < 1e-15);
            }
        }
        let spec_in = f.spectral();
        let kept = dealias_spectrum(&g, spec_in);
        for (idx, (a, b)) in kept.iter().zip(spec_in).enumerate() {
            if is_resolved(&g, idx) {
                assert_eq!(a.re.to_bits(), b.re.to_bits());
                assert_eq!(a.im.to_bits(), b.im.to_bits());
            } else {
                assert_eq!(*a, Complex64::new(0.0, 0.0));
            }
        }

        let top = ScalarField::from_fn(&g, |x| (32.0 * x[0]).cos());
        assert!(dealias(&top).max_abs() < 1e-14);
    }

    #[test]
    fn dealiased_product_removes_aliased_image() {
        // k = 20 lies in the upper third of the N = 64 spectrum; cos(20x)^2 = (1 + cos 40x)/2
        // and cos(40x) aliases to k = -24 on this grid.
        let g = make_grid(1, 64, 2.0 * PI).unwrap();
        let c = ScalarField::from_fn(&g, |x| (20.0 * x[0]).cos());
        let raw = c.mul_raw(&c);
        let aliased_idx = g.index_of_mode([-24, 0]).unwrap();
        assert!(raw.spectral()[aliased_idx].norm() > 0.2);
        let p = product(&c, &c).unwrap();
        let exact_resolved = ScalarField::constant(&g, 0.5);
        let err = p.sub(&exact_resolved).max_abs();
        assert!(err < 1e-13, "{err:e}");
    }

    #[test]
    fn multipliers_are_linear() {
        let g = make_grid(2, 16, 2.0).unwrap();
        let f = random_field(&g, 1);
        let h = random_field(&g, 2);
        let (a, b) = (1.7, -0.4);
        let combo = f.lin_comb(a, &h, b);
        let ops: Vec<Box<dyn Fn(&ScalarField) -> ScalarField>> = vec![
            Box::new(|x| fractional_laplacian(x, 1.3).unwrap()),
            Box::new(|x| partial(x, 1)),
            Box::new(neg_laplacian),
            Box::new(dealias),
        ];
        for op in ops {
            let lhs = op(&combo);
            let rhs = op(&f).lin_comb(a, &op(&h), b);
            assert!(rel_err(&lhs, &rhs) < 1e-12);
        }
    }

    #[test]
    fn dealias_spares_low_mode_fields() {
        let g = make_grid(2, 32, 2.0 * PI).unwrap();
        let f = ScalarField::from_fn(&g, |x| (x[0] + 2.0 * x[1]).sin());
        assert!(rel_err(&dealias(&f), &f) < 1e-14);
    }
}
