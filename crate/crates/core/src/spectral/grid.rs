use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform periodic grid on the torus `[0, L)^d` with cached FFT plans.
///
/// Samples are stored row-major: the point `(i0, i1)` lives at flat index
/// `i0 * n + i1` and sits at `(i0 * h, i1 * h)`. Spectral coefficients use
/// the same layout in FFT order, so axis index `m` carries the integer
/// wavenumber `m` for `m < n/2` and `m - n` otherwise.
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
    /// Per-axis integer wavenumbers in FFT order.
    modes: Vec<i64>,
    /// Per-axis physical wavenumbers `2*pi*m/L` in FFT order.
    kaxis: Vec<f64>,
    /// `|k|` for every flat spectral index.
    knorm: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n && self.length == other.length
    }
}

/// Builds a grid with `n_per_axis` points per axis and period `box_length`.
pub fn make_grid(dim: usize, n_per_axis: usize, box_length: f64) -> Result<Arc<Grid>> {
    if !(dim == 1 || dim == 2) {
        return Err(Error::config(format!(
            "unsupported dimension {dim}: only d = 1 and d = 2 are supported"
        )));
    }
    if n_per_axis < 8 || !n_per_axis.is_power_of_two() {
        return Err(Error::config(format!(
            "points per axis must be a power of two >= 8, got {n_per_axis}"
        )));
    }
    if !(box_length.is_finite() && box_length > 0.0) {
        return Err(Error::config(format!("box length must be positive, got {box_length}")));
    }

    let n = n_per_axis;
    let modes: Vec<i64> = (0..n as i64)
        .map(|m| if m < n as i64 / 2 { m } else { m - n as i64 })
        .collect();
    let unit = 2.0 * PI / box_length;
    let kaxis: Vec<f64> = modes.iter().map(|&m| unit * m as f64).collect();

    let total = n.pow(dim as u32);
    let knorm = (0..total)
        .map(|idx| match dim {
            1 => kaxis[idx].abs(),
            _ => kaxis[idx / n].hypot(kaxis[idx % n]),
        })
        .collect();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);

    Ok(Arc::new(Grid {
        dim,
        n,
        length: box_length,
        modes,
        kaxis,
        knorm,
        fft,
        ifft,
    }))
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total number of samples, `n^d`.
    pub fn len(&self) -> usize {
        self.knorm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knorm.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Fundamental wavenumber `2*pi/L`.
    pub fn k_unit(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Largest `|k|` present on the grid.
    pub fn k_max(&self) -> f64 {
        self.knorm.iter().cloned().fold(0.0, f64::max)
    }

    /// Smallest nonzero `|k|`.
    pub fn k_min(&self) -> f64 {
        self.k_unit()
    }

    /// Physical wavenumbers of one axis, in FFT order.
    pub fn axis_wavenumbers(&self) -> &[f64] {
        &self.kaxis
    }

    /// Integer wavenumbers of one axis, in FFT order.
    pub fn axis_modes(&self) -> &[i64] {
        &self.modes
    }

    /// `|k|` for every flat spectral index.
    pub fn k_norms(&self) -> &[f64] {
        &self.knorm
    }

    /// Per-axis integer wavenumbers of a flat spectral index.
    pub fn mode_of(&self, idx: usize) -> [i64; 2] {
        match self.dim {
            1 => [self.modes[idx], 0],
            _ => [self.modes[idx / self.n], self.modes[idx % self.n]],
        }
    }

    /// Physical wavevector of a flat spectral index (unused entries are 0).
    pub fn wavevector(&self, idx: usize) -> [f64; 2] {
        match self.dim {
            1 => [self.kaxis[idx], 0.0],
            _ => [self.kaxis[idx / self.n], self.kaxis[idx % self.n]],
        }
    }

    /// Flat spectral index of an integer wavevector, if it is on the lattice.
    pub fn index_of_mode(&self, mode: [i64; 2]) -> Option<usize> {
        let half = self.n as i64 / 2;
        let wrap = |m: i64| -> Option<usize> {
            if m < -half || m >= half {
                None
            } else if m >= 0 {
                Some(m as usize)
            } else {
                Some((m + self.n as i64) as usize)
            }
        };
        match self.dim {
            1 => {
                if mode[1] != 0 {
                    return None;
                }
                wrap(mode[0])
            }
            _ => Some(wrap(mode[0])? * self.n + wrap(mode[1])?),
        }
    }

    /// True when axis `axis` of the flat index sits on the unpaired Nyquist mode.
    pub fn is_nyquist(&self, idx: usize, axis: usize) -> bool {
        self.mode_of(idx)[axis] == -(self.n as i64) / 2
    }

    /// Physical coordinates of a flat sample index.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        match self.dim {
            1 => [idx as f64 * h, 0.0],
            _ => [(idx / self.n) as f64 * h, (idx % self.n) as f64 * h],
        }
    }

    /// Forward transform normalized so that `cos(k x)` has coefficients `1/2` at `±k`.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.len());
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, &self.fft);
        let scale = 1.0 / self.len() as f64;
        for c in &mut buf {
            *c *= scale;
        }
        buf
    }

    /// Inverse transform; the imaginary residue is discarded.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.len());
        let mut buf = coeffs.to_vec();
        self.transform(&mut buf, &self.ifft);
        buf.into_iter().map(|c| c.re).collect()
    }

    fn transform(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // rows (contiguous)
        plan.process_with_scratch(buf, &mut scratch);
        if self.dim == 2 {
            let mut column = vec![Complex64::new(0.0, 0.0); n];
            for c in 0..n {
                for r in 0..n {
                    column[r] = buf[r * n + c];
                }
                plan.process_with_scratch(&mut column, &mut scratch);
                for r in 0..n {
                    buf[r * n + c] = column[r];
                }
            }
        }
    }
}
