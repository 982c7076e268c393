use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Real scalar field sampled on a periodic grid.
///
/// The samples are authoritative. Spectral coefficients are computed on first
/// request and cached; any mutation through [`ScalarField::values_mut`] drops
/// the cache. A field built from coefficients keeps only the samples, so two
/// fields with equal samples always produce bit-identical downstream results.
#[derive(Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
    spectral: OnceLock<Vec<Complex64>>,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("grid", &self.grid)
            .field("spectral_cached", &self.spectral.get().is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::from_values(grid, vec![0.0; grid.len()])
    }

    pub fn constant(grid: &Arc<Grid>, value: f64) -> Self {
        Self::from_values(grid, vec![value; grid.len()])
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "sample count does not match grid");
        ScalarField {
            grid: Arc::clone(grid),
            values,
            spectral: OnceLock::new(),
        }
    }

    /// Samples a function of the physical coordinates.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self::from_values(grid, values)
    }

    /// Builds a field from spectral coefficients (FFT order, forward-normalized).
    pub fn from_spectral(grid: &Arc<Grid>, coeffs: &[Complex64]) -> Self {
        Self::from_values(grid, grid.inverse(coeffs))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access to the samples; invalidates the spectral cache.
    pub fn values_mut(&mut self) -> &mut [f64] {
        self.spectral = OnceLock::new();
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn spectral(&self) -> &[Complex64] {
        self.spectral.get_or_init(|| self.grid.forward(&self.values))
    }

    pub fn has_spectral_cache(&self) -> bool {
        self.spectral.get().is_some()
    }

    pub fn same_grid(&self, other: &ScalarField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub(crate) fn check_grid(&self, other: &ScalarField) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Mean value, i.e. the `k = 0` coefficient.
    pub fn mean(&self) -> f64 {
        self.spectral()[0].re
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Discrete `L^p` norm with the cell-volume weight; `p = inf` gives the max norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm(&self.values, p, self.grid.cell_volume())
    }

    /// `∫ f g dx` by the grid rule.
    pub fn inner(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.cell_volume()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField::from_values(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, a: f64) -> ScalarField {
        self.map(|v| a * v)
    }

    /// `a*self + b*other`.
    pub fn lin_comb(&self, a: f64, other: &ScalarField, b: f64) -> ScalarField {
        assert!(self.same_grid(other), "grid mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        ScalarField::from_values(&self.grid, values)
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        self.lin_comb(1.0, other, -1.0)
    }

    /// Pointwise product without dealiasing.
    pub fn mul_raw(&self, other: &ScalarField) -> ScalarField {
        assert!(self.same_grid(other), "grid mismatch");
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x * y).collect();
        ScalarField::from_values(&self.grid, values)
    }

    /// Copy with the `k = 0` coefficient removed.
    pub fn mean_free(&self) -> ScalarField {
        let m = self.mean();
        self.map(|v| v - m)
    }
}

/// Discrete weighted `L^p` norm of raw samples.
pub fn lp_norm(values: &[f64], p: f64, cell_volume: f64) -> f64 {
    if p.is_infinite() {
        values.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if p == 1.0 {
        values.iter().map(|v| v.abs()).sum::<f64>() * cell_volume
    } else if p == 2.0 {
        (values.iter().map(|v| v * v).sum::<f64>() * cell_volume).sqrt()
    } else {
        (values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * cell_volume).powf(1.0 / p)
    }
}

/// Vector field with one scalar component per spatial axis.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::config("vector field needs at least one component"))?;
        for c in &components[1..] {
            first.check_grid(c)?;
        }
        if components.len() != first.grid().dim() {
            return Err(Error::config(format!(
                "vector field has {} components on a {}-dimensional grid",
                components.len(),
                first.grid().dim()
            )));
        }
        Ok(VectorField { components })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        VectorField {
            components: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    pub fn constant(grid: &Arc<Grid>, value: &[f64]) -> Self {
        assert_eq!(value.len(), grid.dim());
        VectorField {
            components: value.iter().map(|&c| ScalarField::constant(grid, c)).collect(),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(ScalarField::is_finite)
    }

    pub(crate) fn check_grid(&self, other: &ScalarField) -> Result<()> {
        self.components[0].check_grid(other)
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> VectorField {
        VectorField {
            components: self.components.iter().map(f).collect(),
        }
    }

    pub fn try_map_components(
        &self,
        f: impl Fn(&ScalarField) -> Result<ScalarField>,
    ) -> Result<VectorField> {
        Ok(VectorField {
            components: self.components.iter().map(f).collect::<Result<_>>()?,
        })
    }

    pub fn lin_comb(&self, a: f64, other: &VectorField, b: f64) -> VectorField {
        VectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(x, y)| x.lin_comb(a, y, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn scale(&self, a: f64) -> VectorField {
        self.map_components(|c| c.scale(a))
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let grid = self.grid();
        let values = (0..grid.len())
            .map(|i| {
                self.components
                    .iter()
                    .map(|c| c.values()[i] * c.values()[i])
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        ScalarField::from_values(grid, values)
    }

    /// Sup over points of the Euclidean magnitude.
    pub fn max_abs(&self) -> f64 {
        self.magnitude().max_abs()
    }

    /// `L^2` norm of the magnitude.
    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.lp_norm(2.0).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}
