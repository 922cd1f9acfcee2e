//! Periodic-box spectral engine.
//!
//! Fields live on a uniform `N^d` grid over `[0, L)^d`, stored row-major with
//! the last axis contiguous. The forward transform divides by `N^d`, so the
//! zero-frequency coefficient of a field is its mean and its integral is
//! `L^d` times that coefficient.
//!
//! Derivative symbols (`iξ_j` and the Leray projector built from them) zero
//! the Nyquist component `k_j = −N/2`; the fractional Laplacian keeps it.

mod fft;
mod io;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use io::{load_snapshot, read_snapshot, save_snapshot, write_snapshot, Snapshot};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    Invalid(String),
    #[error("size mismatch: expected {expected} samples, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("snapshot format error: {0}")]
    Format(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Uniform periodic grid with `n` points per axis on a box of side `length`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGrid {
    d: usize,
    n: usize,
    length: f64,
}

impl TorusGrid {
    pub fn new(d: usize, n: usize, length: f64) -> Result<Self, GridError> {
        if !(1..=3).contains(&d) {
            return Err(GridError::Invalid(format!("dimension must be 1, 2 or 3, got {d}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(GridError::Invalid(format!(
                "points per axis must be even and at least 8, got {n}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(GridError::Invalid(format!("box length must be positive, got {length}")));
        }
        Ok(Self { d, n, length })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total number of samples `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.d as i32)
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// Per-axis indices of a flat index (unused axes are 0).
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        let mut rem = flat;
        for a in (0..self.d).rev() {
            idx[a] = rem % self.n;
            rem /= self.n;
        }
        idx
    }

    pub fn flat_index(&self, idx: [usize; 3]) -> usize {
        let mut flat = 0;
        for &i in idx.iter().take(self.d) {
            flat = flat * self.n + i;
        }
        flat
    }

    /// Sample coordinates of a flat index.
    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let h = self.spacing();
        [idx[0] as f64 * h, idx[1] as f64 * h, idx[2] as f64 * h]
    }

    /// Signed integer mode in `[−N/2, N/2)` for an axis index.
    pub fn mode(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Integer wave vector of a flat spectral index.
    pub fn k_vec(&self, flat: usize) -> [i64; 3] {
        let idx = self.multi_index(flat);
        let mut k = [0; 3];
        for a in 0..self.d {
            k[a] = self.mode(idx[a]);
        }
        k
    }

    /// `|k|²` in integer units; modes with equal value share every radial multiplier.
    pub fn k_sq(&self, flat: usize) -> i64 {
        self.k_vec(flat).iter().map(|k| k * k).sum()
    }

    /// Fundamental wavenumber `2π/L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// `|ξ|` of a flat spectral index.
    pub fn xi_norm(&self, flat: usize) -> f64 {
        self.dk() * (self.k_sq(flat) as f64).sqrt()
    }

    /// Wave vector used by derivative symbols: Nyquist components zeroed.
    pub fn xi_deriv(&self, flat: usize) -> [f64; 3] {
        let k = self.k_vec(flat);
        let nyq = -(self.n as i64) / 2;
        let mut xi = [0.0; 3];
        for a in 0..self.d {
            if k[a] != nyq {
                xi[a] = self.dk() * k[a] as f64;
            }
        }
        xi
    }

    /// Whether a mode survives truncation keeping `|k_j| ≤ ⌊fraction·N/2⌋` on every axis.
    pub fn keeps_mode(&self, flat: usize, fraction: f64) -> bool {
        let kmax = (fraction * self.n as f64 / 2.0 + 1e-9).floor() as i64;
        self.k_vec(flat).iter().take(self.d).all(|k| k.abs() <= kmax)
    }
}

/// Orders of the fractional operators and the attractant decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl FracParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, GridError> {
        let p = Self { alpha, beta, gamma };
        p.validate()?;
        Ok(p)
    }

    /// `α ∈ (1, 2]`, `β ∈ (0, 1]` (β = 1 kept for regression), `γ ≥ 0`.
    pub fn validate(&self) -> Result<(), GridError> {
        if !(self.alpha > 1.0 && self.alpha <= 2.0) {
            return Err(GridError::Invalid(format!("alpha must lie in (1, 2], got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(GridError::Invalid(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(GridError::Invalid(format!(
                "gamma must be finite and nonnegative, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Real samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::SizeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: TorusGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f(x)` at the grid points; `x` has length `d`.
    pub fn from_fn(grid: TorusGrid, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.coords(i);
                f(&x[..grid.d()])
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `∫ f` over the box.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, GridError> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GridError> {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, GridError> {
        self.zip(other, |a, b| a * b)
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self, GridError> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    /// Circular shift by whole samples along each axis.
    pub fn shifted(&self, shift: [isize; 3]) -> Self {
        let n = self.grid.n as isize;
        let mut out = vec![0.0; self.values.len()];
        for (i, v) in self.values.iter().enumerate() {
            let idx = self.grid.multi_index(i);
            let mut j = [0usize; 3];
            for a in 0..self.grid.d {
                j[a] = (idx[a] as isize + shift[a]).rem_euclid(n) as usize;
            }
            out[self.grid.flat_index(j)] = *v;
        }
        Self {
            grid: self.grid,
            values: out,
        }
    }
}

/// `d` real components on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: TorusGrid,
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self, GridError> {
        let Some(first) = components.first() else {
            return Err(GridError::Invalid("vector field needs components".into()));
        };
        let grid = first.grid;
        if components.len() != grid.d() {
            return Err(GridError::Invalid(format!(
                "vector field needs {} components, got {}",
                grid.d(),
                components.len()
            )));
        }
        if components.iter().any(|c| c.grid != grid) {
            return Err(GridError::GridMismatch);
        }
        Ok(Self { grid, components })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            components: (0..grid.d()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &ScalarField {
        &self.components[j]
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(ScalarField::is_finite)
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let values = (0..self.grid.len())
            .map(|i| {
                self.components
                    .iter()
                    .map(|c| c.values[i] * c.values[i])
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        ScalarField::from_vec_unchecked(self.grid, values)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            components: self.components.iter().map(|f| f.scaled(c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GridError> {
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            grid: self.grid,
            components,
        })
    }
}

/// Fourier coefficients of a real field (mean at index 0).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self, GridError> {
        if coeffs.len() != grid.len() {
            return Err(GridError::SizeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient-wise multiplication by `m(flat index)`.
    pub fn map_multiplier(&self, m: impl Fn(usize) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().enumerate().map(|(i, c)| c * m(i)).collect(),
        }
    }

    /// Real-valued multiplier depending only on the flat index.
    pub fn map_real_multiplier(&self, m: impl Fn(usize) -> f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().enumerate().map(|(i, c)| c * m(i)).collect(),
        }
    }

    /// Largest deviation from Hermitian symmetry `F(−k) = conj F(k)`,
    /// ignoring Nyquist partners which are their own mirror.
    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let mut worst: f64 = 0.0;
        for i in 0..g.len() {
            let idx = g.multi_index(i);
            let mut j = [0usize; 3];
            for a in 0..g.d() {
                j[a] = (n - idx[a]) % n;
            }
            let mirror = self.coeffs[g.flat_index(j)].conj();
            worst = worst.max((self.coeffs[i] - mirror).norm());
        }
        worst
    }

    /// Zero every mode outside `|k_j| ≤ ⌊fraction·N/2⌋`.
    pub fn truncate(&mut self, fraction: f64) {
        let g = self.grid;
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            if !g.keeps_mode(i, fraction) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }
}

/// Forward transform, normalized so the zero mode is the mean.
pub fn transform(f: &ScalarField) -> SpectralField {
    let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::fft_nd(&f.grid, &mut data, false);
    let scale = 1.0 / f.grid.len() as f64;
    for c in &mut data {
        *c *= scale;
    }
    SpectralField {
        grid: f.grid,
        coeffs: data,
    }
}

/// Inverse transform; returns the real part.
pub fn inverse_transform(s: &SpectralField) -> ScalarField {
    inverse_transform_with_imag(s).0
}

/// Inverse transform with the max-norm of the discarded imaginary part.
pub fn inverse_transform_with_imag(s: &SpectralField) -> (ScalarField, f64) {
    let mut data = s.coeffs.clone();
    fft::fft_nd(&s.grid, &mut data, true);
    let imag = data.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
    (
        ScalarField::from_vec_unchecked(s.grid, data.iter().map(|c| c.re).collect()),
        imag,
    )
}

/// Spectral multiplier `|ξ|^α`; the zero mode is annihilated.
pub fn frac_laplacian_spectral(s: &SpectralField, alpha: f64) -> SpectralField {
    let g = s.grid;
    s.map_real_multiplier(|i| {
        let k2 = g.k_sq(i);
        if k2 == 0 {
            0.0
        } else {
            g.xi_norm(i).powf(alpha)
        }
    })
}

/// `(−Δ)^{α/2} f` for `α ∈ (0, 2]`.
pub fn frac_laplacian(f: &ScalarField, alpha: f64) -> Result<ScalarField, GridError> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(GridError::Invalid(format!("alpha must lie in (0, 2], got {alpha}")));
    }
    Ok(inverse_transform(&frac_laplacian_spectral(&transform(f), alpha)))
}

/// Spectral partial derivative `∂_j`.
pub fn derivative_spectral(s: &SpectralField, axis: usize) -> SpectralField {
    let g = s.grid;
    s.map_multiplier(|i| Complex64::new(0.0, g.xi_deriv(i)[axis]))
}

pub fn gradient_spectral(s: &SpectralField) -> Vec<SpectralField> {
    (0..s.grid.d()).map(|a| derivative_spectral(s, a)).collect()
}

/// Spectral divergence of spectral components.
pub fn divergence_spectral(v: &[SpectralField]) -> SpectralField {
    let g = v[0].grid;
    let mut out = SpectralField::zeros(g);
    for (a, comp) in v.iter().enumerate() {
        for (i, c) in comp.coeffs.iter().enumerate() {
            out.coeffs[i] += Complex64::new(0.0, g.xi_deriv(i)[a]) * c;
        }
    }
    out
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let s = transform(f);
    VectorField {
        grid: f.grid,
        components: gradient_spectral(&s).iter().map(inverse_transform).collect(),
    }
}

pub fn divergence(v: &VectorField) -> ScalarField {
    let spec: Vec<SpectralField> = v.components.iter().map(transform).collect();
    inverse_transform(&divergence_spectral(&spec))
}

/// Leray projector `δ_{jk} − ξ_jξ_k/|ξ|²` on spectral components, built from
/// the derivative wave vector; modes with vanishing derivative vector pass
/// through unchanged.
pub fn leray_project_spectral(v: &[SpectralField]) -> Vec<SpectralField> {
    let g = v[0].grid;
    let d = g.d();
    let mut out: Vec<SpectralField> = v.to_vec();
    for i in 0..g.len() {
        let xi = g.xi_deriv(i);
        let x2: f64 = xi[..d].iter().map(|x| x * x).sum();
        if x2 == 0.0 {
            continue;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for a in 0..d {
            dot += v[a].coeffs[i] * xi[a];
        }
        let dot = dot / x2;
        for a in 0..d {
            out[a].coeffs[i] = v[a].coeffs[i] - dot * xi[a];
        }
    }
    out
}

pub fn leray_project(v: &VectorField) -> VectorField {
    let spec: Vec<SpectralField> = v.components.iter().map(transform).collect();
    VectorField {
        grid: v.grid,
        components: leray_project_spectral(&spec).iter().map(inverse_transform).collect(),
    }
}

/// Max-norm of the spectral divergence relative to the field's max-norm.
pub fn divergence_residual(v: &VectorField) -> f64 {
    let scale = v.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    divergence(v).max_abs() / scale
}

/// `‖f‖_p` by the rectangle rule; `p = ∞` gives the max-norm.
pub fn lp_norm(f: &ScalarField, p: f64) -> Result<f64, GridError> {
    if !(p >= 1.0) {
        return Err(GridError::Invalid(format!("p must be at least 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let sum: f64 = if p == 2.0 {
        f.values.iter().map(|v| v * v).sum()
    } else {
        f.values.iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok((f.grid.cell_volume() * sum).powf(1.0 / p))
}

/// `‖(−Δ)^{μ/2} f‖_p`.
pub fn sobolev_norm(f: &ScalarField, mu: f64, p: f64) -> Result<f64, GridError> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(GridError::Invalid(format!("mu must be finite and nonnegative, got {mu}")));
    }
    if mu == 0.0 {
        return lp_norm(f, p);
    }
    lp_norm(&inverse_transform(&frac_laplacian_spectral(&transform(f), mu)), p)
}

/// `‖(I − Δ)^{μ/2} f‖_p`.
pub fn bessel_potential_norm(f: &ScalarField, mu: f64, p: f64) -> Result<f64, GridError> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(GridError::Invalid(format!("mu must be finite and nonnegative, got {mu}")));
    }
    let g = f.grid;
    let s = transform(f).map_real_multiplier(|i| {
        let x = g.xi_norm(i);
        (1.0 + x * x).powf(0.5 * mu)
    });
    lp_norm(&inverse_transform(&s), p)
}

/// `V·Σ|f̂|²`, equal to `‖f‖_2²` under the declared normalization.
pub fn parseval_energy(s: &SpectralField) -> f64 {
    s.grid.volume() * s.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
}

/// Random real field with modes `0 < max_j |k_j| ≤ kmax`, scaled so that its
/// max-norm equals `amplitude`. Deterministic for a fixed seed.
pub fn random_bandlimited(
    grid: TorusGrid,
    seed: u64,
    kmax: usize,
    amplitude: f64,
) -> Result<ScalarField, GridError> {
    if kmax == 0 || kmax >= grid.n() / 2 {
        return Err(GridError::Invalid(format!(
            "kmax must lie in [1, {}], got {kmax}",
            grid.n() / 2 - 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = SpectralField::zeros(grid);
    for i in 0..grid.len() {
        let k = grid.k_vec(i);
        if grid.k_sq(i) == 0 || k.iter().any(|k| k.unsigned_abs() as usize > kmax) {
            continue;
        }
        s.coeffs[i] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let f = inverse_transform(&s);
    let m = f.max_abs();
    if m == 0.0 {
        return Ok(f);
    }
    Ok(f.scaled(amplitude / m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize) -> TorusGrid {
        TorusGrid::new(1, n, 2.0 * PI).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TorusGrid::new(4, 16, 1.0).is_err());
        assert!(TorusGrid::new(2, 7, 1.0).is_err());
        assert!(TorusGrid::new(2, 6, 1.0).is_err());
        assert!(TorusGrid::new(2, 16, 0.0).is_err());
        let g = TorusGrid::new(3, 8, 1.0).unwrap();
        assert_eq!(g.len(), 512);
        for i in [0, 7, 100, 511] {
            assert_eq!(g.flat_index(g.multi_index(i)), i);
        }
        assert_eq!(g.mode(4), -4);
        assert_eq!(g.mode(3), 3);
    }

    #[test]
    fn constant_and_sine_spectra() {
        let g = grid1(16);
        let s = transform(&ScalarField::constant(g, 3.5));
        assert!((s.coeffs()[0].re - 3.5).abs() < 1e-15);
        assert!(s.coeffs()[1..].iter().all(|c| c.norm() < 1e-15));

        let s = transform(&ScalarField::from_fn(g, |x| x[0].sin()));
        let nonzero: Vec<usize> = (0..16).filter(|&i| s.coeffs()[i].norm() > 1e-14).collect();
        assert_eq!(nonzero, vec![1, 15]);
    }

    #[test]
    fn round_trip_3d() {
        let g = TorusGrid::new(3, 8, 3.0).unwrap();
        let f = random_bandlimited(g, 7, 3, 1.0).unwrap();
        let (back, imag) = inverse_transform_with_imag(&transform(&f));
        assert!(imag < 1e-13);
        let err = back.sub(&f).unwrap().max_abs();
        assert!(err < 1e-13 * f.max_abs(), "{err}");
    }

    #[test]
    fn sine_is_eigenfunction() {
        let g = grid1(32);
        let f = ScalarField::from_fn(g, |x| x[0].sin());
        for alpha in [0.5, 1.3, 2.0] {
            let lf = frac_laplacian(&f, alpha).unwrap();
            assert!(lf.sub(&f).unwrap().max_abs() < 1e-13);
        }
        assert!(frac_laplacian(&ScalarField::constant(g, 2.0), 1.5).unwrap().max_abs() < 1e-15);
        let dd = divergence(&gradient(&f));
        assert!(dd.add(&f).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn lp_norm_basics() {
        let g = grid1(64);
        let f = ScalarField::from_fn(g, |x| x[0].sin());
        assert!((lp_norm(&f, 2.0).unwrap() - PI.sqrt()).abs() < 1e-14);
        let c = ScalarField::constant(g, -2.0);
        assert!((lp_norm(&c, 3.0).unwrap() - 2.0 * (2.0 * PI).powf(1.0 / 3.0)).abs() < 1e-13);
        assert_eq!(lp_norm(&c, f64::INFINITY).unwrap(), 2.0);
        assert!(lp_norm(&c, 0.5).is_err());
    }

    #[test]
    fn leray_annihilates_gradients() {
        let g = TorusGrid::new(2, 16, 2.0 * PI).unwrap();
        let phi = random_bandlimited(g, 3, 5, 1.0).unwrap();
        let grad = gradient(&phi);
        let p = leray_project(&grad);
        assert!(p.max_abs() < 1e-13);
    }

    #[test]
    fn truncation_mask() {
        let g = TorusGrid::new(1, 64, 1.0).unwrap();
        assert!(g.keeps_mode(21, 2.0 / 3.0));
        assert!(!g.keeps_mode(22, 2.0 / 3.0));
        assert!(g.keeps_mode(64 - 21, 2.0 / 3.0));
        assert!(!g.keeps_mode(64 - 22, 2.0 / 3.0));
    }
}
