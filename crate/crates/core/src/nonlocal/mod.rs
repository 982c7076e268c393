//! Nonlocal alignment operators: the normalizing constant of the fractional
//! Laplacian, the bilinear commutator `I_α`, the alignment force of the
//! original momentum equation and the first-order operator `T`.

mod oracle;

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad;
use crate::spectral::{
    dealias_spectrum, homogeneous_symbol, ScalarField, VectorField,
};

pub use oracle::{alignment_force_oracle, dissipation_oracle, i_alpha_oracle};

/// Signed value of `2^α Γ(d/2 + α/2) / (π^{d/2} Γ(-α/2))` and its magnitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FracConstant {
    pub signed: f64,
    pub magnitude: f64,
}

pub fn c_alpha(d: usize, alpha: f64) -> Result<FracConstant> {
    if d == 0 {
        return Err(Error::config("dimension must be at least 1"));
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::config(format!(
            "c_(d,alpha) needs alpha in (0, 2) (Γ(-α/2) has poles at 0 and 2), got {alpha}"
        )));
    }
    let df = d as f64;
    let signed = alpha.exp2() * gamma(0.5 * (df + alpha))
        / (std::f64::consts::PI.powf(0.5 * df) * gamma(-0.5 * alpha));
    Ok(FracConstant {
        signed,
        magnitude: signed.abs(),
    })
}

/// Exponent, dimension and derived constants of the alignment interaction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlignmentParams {
    pub alpha: f64,
    pub d: usize,
    /// Signed value of the normalizing constant.
    pub c_signed: f64,
    pub c_mag: f64,
    /// `1 / |c_{d,α}|`, the diffusion coefficient of the velocity equation.
    pub mu: f64,
    /// Inner cutoff of the oracle quadrature; `None` means `h / 1024`.
    pub pv_cutoff: Option<f64>,
    /// Radius of the explicit periodic image sum in the oracle kernel;
    /// images further out are replaced by their integral. `None` means `20 L`
    /// in 1D and `8 L` in 2D.
    pub tail_radius: Option<f64>,
    /// Lifts the oracle grid-size guard of `128^d` points.
    pub allow_large_oracle: bool,
}

impl AlignmentParams {
    pub fn new(d: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::config(format!(
                "alpha must lie in the open range (1, 2), got {alpha}"
            )));
        }
        if !(d == 1 || d == 2) {
            return Err(Error::config(format!("unsupported dimension {d}")));
        }
        let c = c_alpha(d, alpha)?;
        Ok(AlignmentParams {
            alpha,
            d,
            c_signed: c.signed,
            c_mag: c.magnitude,
            mu: 1.0 / c.magnitude,
            pv_cutoff: None,
            tail_radius: None,
            allow_large_oracle: false,
        })
    }
}

/// `I_α(u, σ)` through the fractional Leibniz defect
/// `μ [u (-Δ)^{α/2} σ + σ (-Δ)^{α/2} u - (-Δ)^{α/2}(u σ)]`, componentwise and dealiased.
pub fn i_alpha(u: &VectorField, sigma: &ScalarField, params: &AlignmentParams) -> Result<VectorField> {
    u.check_grid(sigma)?;
    let grid = sigma.grid().clone();
    let alpha = params.alpha;
    // I_α only sees differences; removing a sample value makes constant σ give exact zeros
    let offset = sigma.values()[0];
    let sigma = &sigma.map(|s| s - offset);
    let lap_sigma = crate::spectral::fractional_laplacian_unchecked(sigma, alpha);
    u.try_map_components(|ui| {
        let shift = ui.values()[0];
        let ui = &ui.map(|v| v - shift);
        let lap_ui = crate::spectral::fractional_laplacian_unchecked(ui, alpha);
        let cross: Vec<f64> = (0..grid.len())
            .map(|x| ui.values()[x] * lap_sigma.values()[x] + sigma.values()[x] * lap_ui.values()[x])
            .collect();
        let prod = ui.mul_raw(sigma);
        let cross_hat = grid.forward(&cross);
        let prod_hat = prod.spectral();
        let knorm = grid.k_norms();
        let combined: Vec<Complex64> = cross_hat
            .iter()
            .zip(prod_hat)
            .enumerate()
            .map(|(idx, (c, p))| (c - p * homogeneous_symbol(knorm[idx], alpha)) * params.mu)
            .collect();
        Ok(ScalarField::from_spectral(&grid, &dealias_spectrum(&grid, &combined)))
    })
}

/// Alignment force per unit mass,
/// `∫ (u(y) - u(x)) ρ(y) / |x - y|^{d+α} dy = μ [u (-Δ)^{α/2} ρ - (-Δ)^{α/2}(ρ u)]`.
pub fn alignment_force(rho: &ScalarField, u: &VectorField, params: &AlignmentParams) -> Result<VectorField> {
    u.check_grid(rho)?;
    let min = rho.min();
    if !(min > 0.0) {
        return Err(Error::domain(format!("density must be positive, min = {min:.3e}")));
    }
    let grid = rho.grid().clone();
    let alpha = params.alpha;
    let lap_rho = crate::spectral::fractional_laplacian_unchecked(rho, alpha);
    u.try_map_components(|ui| {
        let a = ui.mul_raw(&lap_rho);
        let b = ui.mul_raw(rho);
        let knorm = grid.k_norms();
        let combined: Vec<Complex64> = a
            .spectral()
            .iter()
            .zip(b.spectral())
            .enumerate()
            .map(|(idx, (a, b))| (a - b * homogeneous_symbol(knorm[idx], alpha)) * params.mu)
            .collect();
        Ok(ScalarField::from_spectral(&grid, &dealias_spectrum(&grid, &combined)))
    })
}

/// `∫_0^∞ z^{-α} sin z dz` by panel quadrature with series acceleration.
fn oscillatory_sine_integral(alpha: f64) -> f64 {
    let pi = std::f64::consts::PI;
    // first panel: z = t^{1/(2-α)} absorbs the z^{1-α} singularity
    let e = 1.0 / (2.0 - alpha);
    let head = quad::integrate(
        |t| {
            let z = t.powf(e);
            let sinc = if z == 0.0 { 1.0 } else { z.sin() / z };
            sinc * e
        },
        0.0,
        pi.powf(2.0 - alpha),
        32,
        16,
    );
    // alternating panels [kπ, (k+1)π]; repeated averaging of partial sums
    let panels = 64;
    let mut partial = Vec::with_capacity(panels);
    let mut sum = 0.0;
    for k in 1..=panels {
        let lo = k as f64 * pi;
        sum += quad::integrate(|z| z.powf(-alpha) * z.sin(), lo, lo + pi, 2, 16);
        partial.push(sum);
    }
    let mut row = partial[panels - 24..].to_vec();
    while row.len() > 1 {
        row = row.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    head + row[0]
}

/// `∫_{R^{d-1}} (1 + |t|^2)^{-(d+α)/2} dt`, the transverse factor of the ray integral.
fn transverse_factor(d: usize, alpha: f64) -> f64 {
    match d {
        1 => 1.0,
        _ => {
            let half = 0.5 * std::f64::consts::PI;
            // t = tan θ turns the integrand into cos^α θ
            quad::integrate(|th| th.cos().max(0.0).powf(alpha), -half, half, 64, 16)
        }
    }
}

/// Precomputed ray profile of `T`: `R(ω) = i · radial · ω` for unit `ω`.
///
/// `radial` comes from quadrature of `∫ z |z|^{-d-α} (e^{i⟨z, ω⟩} - 1) dz`.
#[derive(Clone, Copy, Debug)]
pub struct TCache {
    pub alpha: f64,
    pub d: usize,
    pub radial: f64,
}

impl TCache {
    pub fn new(params: &AlignmentParams) -> Self {
        let radial = 2.0 * transverse_factor(params.d, params.alpha)
            * oscillatory_sine_integral(params.alpha);
        TCache {
            alpha: params.alpha,
            d: params.d,
            radial,
        }
    }

    /// `R(ξ)` for a nonzero direction vector; constant along rays.
    pub fn ray_profile(&self, xi: [f64; 2]) -> [Complex64; 2] {
        let norm = xi[0].hypot(xi[1]);
        let unit = [xi[0] / norm, xi[1] / norm];
        [
            Complex64::new(0.0, self.radial * unit[0]),
            Complex64::new(0.0, self.radial * unit[1]),
        ]
    }
}

/// `T σ` with symbol `|k|^{α-1} R(k/|k|)`; the `k = 0` mode maps to zero.
pub fn t_operator(sigma: &ScalarField, cache: &TCache) -> Result<VectorField> {
    let grid = sigma.grid().clone();
    if grid.dim() != cache.d {
        return Err(Error::GridMismatch);
    }
    let knorm = grid.k_norms();
    let spec = sigma.spectral();
    let comps = (0..grid.dim())
        .map(|axis| {
            let coeffs: Vec<Complex64> = spec
                .iter()
                .enumerate()
                .map(|(idx, c)| {
                    let k = knorm[idx];
                    if k == 0.0 || grid.is_nyquist(idx, axis) {
                        return Complex64::new(0.0, 0.0);
                    }
                    let r = cache.ray_profile(grid.wavevector(idx))[axis];
                    c * r * k.powf(cache.alpha - 1.0)
                })
                .collect();
            ScalarField::from_spectral(&grid, &coeffs)
        })
        .collect();
    VectorField::new(comps)
}
