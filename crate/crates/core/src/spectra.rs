//! Random-matrix spectrum samplers.
//!
//! Each distribution is sampled deterministically from a
//! [`DistributionSpec`]: the 64-bit seed is split into fixed substreams
//! (eigenvalue/entry draws, Haar basis, graph edges) so that
//! [`sample_spectrum`] and [`sample_dense`] agree on the spectrum for the
//! same spec. Spectra are returned sorted ascending.
//!
//! Where the underlying matrix is a tall Gram product (the Wishart kinds),
//! eigenvalues are computed from the small Gram factor `X X^T` rather than
//! the full `X^T X`: the nonzero eigenvalues coincide and the remaining
//! ones are exact zeros, which keeps sampling at dimension several thousand
//! tractable.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::fm;
use crate::matcore::{self, sym_eigvals, Matrix};
use crate::rng::Rng;

/// Default cap on dense realizations.
pub const DENSE_CAP_DEFAULT: usize = 4096;

const STREAM_VALUES: u64 = 1;
const STREAM_BASIS: u64 = 2;
const STREAM_GRAPH: u64 = 3;

/// Eigenvalues standing for a symmetric matrix in the co-diagonalized frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Validates that every entry is finite.
    pub fn new(values: Vec<f64>) -> Result<Self, DistError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DistError::InvalidSpec(String::from(
                "spectrum entries must be finite",
            )));
        }
        Ok(Spectrum { values })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Supported random-matrix ensembles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DistributionKind {
    /// `X^T X / 3d + eps I` with Gaussian `X` of shape `(d/4, d)`.
    Wishart,
    /// Same aspect with entries uniform on `[-sqrt(3), sqrt(3)]`.
    WishartUnif,
    /// Haar-conjugated diagonal with entries uniform on `[-1, 1]`, absolute
    /// values clamped up to `1e-3`.
    Uniform,
    /// Spectrum `3 z_i^2 - 1/2`, `z ~ N(0, I)`, clamped and
    /// Frobenius-normalized.
    QuarticHessian,
    /// Normalized graph Laplacian of a `G(d, p)` graph.
    ErdosRenyi,
    /// Gaussian empirical covariance `X^T X / n + eps I`,
    /// Frobenius-normalized; stand-in for image-covariance workloads.
    SyntheticCovariance,
}

impl DistributionKind {
    pub fn name(self) -> &'static str {
        match self {
            DistributionKind::Wishart => "wishart",
            DistributionKind::WishartUnif => "wishart_unif",
            DistributionKind::Uniform => "uniform",
            DistributionKind::QuarticHessian => "quartic_hessian",
            DistributionKind::ErdosRenyi => "erdos_renyi",
            DistributionKind::SyntheticCovariance => "synthetic_covariance",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "wishart" => DistributionKind::Wishart,
            "wishart_unif" => DistributionKind::WishartUnif,
            "uniform" => DistributionKind::Uniform,
            "quartic_hessian" => DistributionKind::QuarticHessian,
            "erdos_renyi" => DistributionKind::ErdosRenyi,
            "synthetic_covariance" => DistributionKind::SyntheticCovariance,
            _ => return None,
        })
    }
}

/// Fully specified, seedable sampling request.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistributionSpec {
    pub kind: DistributionKind,
    pub dim: usize,
    pub seed: u64,
    /// Edge probability for `ErdosRenyi`.
    pub edge_probability: f64,
    /// Stabilizer added to Wishart-kind and covariance spectra.
    pub eps_stb: f64,
    /// Resample Erdos-Renyi graphs until connected (off by default).
    pub resample_disconnected: bool,
}

impl DistributionSpec {
    pub fn new(kind: DistributionKind, dim: usize, seed: u64) -> Self {
        DistributionSpec {
            kind,
            dim,
            seed,
            edge_probability: 0.4,
            eps_stb: 1e-3,
            resample_disconnected: false,
        }
    }

    pub fn validate(&self) -> Result<(), DistError> {
        if self.dim == 0 {
            return Err(DistError::InvalidSpec(String::from("dim must be >= 1")));
        }
        match self.kind {
            DistributionKind::Wishart | DistributionKind::WishartUnif => {
                if self.dim < 4 {
                    return Err(DistError::InvalidSpec(format!(
                        "wishart kinds need dim >= 4 for the d/4 x d aspect, got {}",
                        self.dim
                    )));
                }
            }
            DistributionKind::ErdosRenyi => {
                if !(self.edge_probability > 0.0 && self.edge_probability < 1.0) {
                    return Err(DistError::InvalidSpec(format!(
                        "edge probability must lie in (0, 1), got {}",
                        self.edge_probability
                    )));
                }
            }
            _ => {}
        }
        if !(self.eps_stb >= 0.0) {
            return Err(DistError::InvalidSpec(String::from(
                "eps_stb must be nonnegative",
            )));
        }
        Ok(())
    }
}

/// Sampler errors.
#[derive(Clone, Debug, PartialEq)]
pub enum DistError {
    InvalidSpec(String),
    DenseCapExceeded { dim: usize, cap: usize },
    Disconnected { attempts: usize },
    Numeric(String),
}

impl fmt::Display for DistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistError::InvalidSpec(msg) => write!(f, "invalid distribution spec: {msg}"),
            DistError::DenseCapExceeded { dim, cap } => {
                write!(f, "dense realization of dim {dim} exceeds cap {cap}")
            }
            DistError::Disconnected { attempts } => {
                write!(f, "no connected graph found in {attempts} attempts")
            }
            DistError::Numeric(msg) => write!(f, "numeric failure while sampling: {msg}"),
        }
    }
}

/// Hessian eigenvalue of the quartic potential at coordinate `z`.
#[inline]
pub(crate) fn quartic_eigenvalue(z: f64) -> f64 {
    3.0 * z * z - 0.5
}

/// Sign-preserving clamp of `|x|` up to `floor` (zero maps to `+floor`).
#[inline]
fn clamp_abs_up(x: f64, floor: f64) -> f64 {
    if fm::abs(x) >= floor {
        x
    } else if x < 0.0 {
        -floor
    } else {
        floor
    }
}

fn sort_values(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Unrolled dot product of two equal-length slices.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        s[0] += x[0] * y[0];
        s[1] += x[1] * y[1];
        s[2] += x[2] * y[2];
        s[3] += x[3] * y[3];
    }
    let mut rem = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        rem += x * y;
    }
    s[0] + s[1] + s[2] + s[3] + rem
}

/// Gram matrix `X X^T` of a `rows x cols` row-major factor.
fn gram(rows: usize, cols: usize, x: &[f64]) -> Matrix {
    let mut g = Matrix::zeros(rows);
    for i in 0..rows {
        let ri = &x[i * cols..(i + 1) * cols];
        for j in 0..=i {
            let rj = &x[j * cols..(j + 1) * cols];
            let v = dot(ri, rj);
            g.set(i, j, v);
            g.set(j, i, v);
        }
    }
    g
}

fn gaussian_factor(rows: usize, cols: usize, rng: &mut Rng) -> Vec<f64> {
    (0..rows * cols).map(|_| rng.normal()).collect()
}

fn uniform_factor(rows: usize, cols: usize, rng: &mut Rng) -> Vec<f64> {
    let s3 = fm::sqrt(3.0);
    (0..rows * cols).map(|_| rng.uniform(-s3, s3)).collect()
}

fn wishart_rows(dim: usize) -> usize {
    // the paper's aspect is d/4 x d; non-multiples of 4 take the floor
    (dim / 4).max(1)
}

/// Wishart-kind spectrum from the small Gram factor.
fn wishart_spectrum(spec: &DistributionSpec, gaussian: bool) -> Result<Vec<f64>, DistError> {
    let d = spec.dim;
    let r = wishart_rows(d);
    let mut rng = Rng::stream(spec.seed, STREAM_VALUES);
    let x = if gaussian {
        gaussian_factor(r, d, &mut rng)
    } else {
        uniform_factor(r, d, &mut rng)
    };
    let g = gram(r, d, &x);
    let gram_eigs = sym_eigvals(&g).map_err(|e| DistError::Numeric(format!("{e}")))?;
    let scale = 1.0 / (3.0 * d as f64);
    let mut values = vec![spec.eps_stb; d - r];
    values.extend(gram_eigs.iter().map(|&l| l * scale + spec.eps_stb));
    Ok(sort_values(values))
}

fn uniform_spectrum(spec: &DistributionSpec) -> Vec<f64> {
    let mut rng = Rng::stream(spec.seed, STREAM_VALUES);
    let values: Vec<f64> = (0..spec.dim)
        .map(|_| clamp_abs_up(rng.uniform(-1.0, 1.0), 1e-3))
        .collect();
    sort_values(values)
}

fn quartic_spectrum(spec: &DistributionSpec) -> Vec<f64> {
    let mut rng = Rng::stream(spec.seed, STREAM_VALUES);
    let mut values: Vec<f64> = (0..spec.dim)
        .map(|_| clamp_abs_up(quartic_eigenvalue(rng.normal()), 1e-3))
        .collect();
    let norm = fm::sqrt(values.iter().map(|v| v * v).sum());
    for v in values.iter_mut() {
        *v /= norm;
    }
    sort_values(values)
}

/// Adjacency of `G(d, p)` as a flat boolean matrix.
fn erdos_adjacency(dim: usize, p: f64, rng: &mut Rng) -> Vec<bool> {
    let mut adj = vec![false; dim * dim];
    for i in 0..dim {
        for j in (i + 1)..dim {
            if rng.bernoulli(p) {
                adj[i * dim + j] = true;
                adj[j * dim + i] = true;
            }
        }
    }
    adj
}

fn is_connected(dim: usize, adj: &[bool]) -> bool {
    let mut seen = vec![false; dim];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for u in 0..dim {
            if adj[v * dim + u] && !seen[u] {
                seen[u] = true;
                count += 1;
                stack.push(u);
            }
        }
    }
    count == dim
}

/// Normalized graph Laplacian `I - D^{-1/2} A D^{-1/2}`; isolated vertices
/// get a zero off-diagonal row and a unit diagonal.
fn erdos_laplacian(spec: &DistributionSpec) -> Result<Matrix, DistError> {
    let d = spec.dim;
    const MAX_ATTEMPTS: usize = 100;
    let mut attempt = 0;
    loop {
        let mut rng = Rng::stream(spec.seed.wrapping_add(attempt as u64), STREAM_GRAPH);
        let adj = erdos_adjacency(d, spec.edge_probability, &mut rng);
        if spec.resample_disconnected && !is_connected(d, &adj) {
            attempt += 1;
            if attempt >= MAX_ATTEMPTS {
                return Err(DistError::Disconnected {
                    attempts: MAX_ATTEMPTS,
                });
            }
            continue;
        }
        let mut deg = vec![0usize; d];
        for (i, slot) in deg.iter_mut().enumerate() {
            *slot = (0..d).filter(|&j| adj[i * d + j]).count();
        }
        let inv_sqrt_deg: Vec<f64> = deg
            .iter()
            .map(|&k| if k == 0 { 0.0 } else { 1.0 / fm::sqrt(k as f64) })
            .collect();
        let mut lap = Matrix::identity(d);
        for i in 0..d {
            for j in 0..d {
                if adj[i * d + j] {
                    lap.set(i, j, -inv_sqrt_deg[i] * inv_sqrt_deg[j]);
                }
            }
        }
        return Ok(lap);
    }
}

/// Synthetic covariance factor: `n = 2d` Gaussian rows, returned as the
/// `d x d` Gram of the transposed factor.
fn covariance_gram(spec: &DistributionSpec) -> Matrix {
    let d = spec.dim;
    let n = 2 * d;
    let mut rng = Rng::stream(spec.seed, STREAM_VALUES);
    let x = gaussian_factor(n, d, &mut rng);
    let mut xt = vec![0.0f64; d * n];
    for i in 0..n {
        for j in 0..d {
            xt[j * n + i] = x[i * d + j];
        }
    }
    gram(d, n, &xt)
}

fn covariance_spectrum(spec: &DistributionSpec) -> Result<Vec<f64>, DistError> {
    let n = 2 * spec.dim;
    let g = covariance_gram(spec);
    let eigs = sym_eigvals(&g).map_err(|e| DistError::Numeric(format!("{e}")))?;
    let shifted: Vec<f64> = eigs.iter().map(|&l| l / n as f64 + spec.eps_stb).collect();
    let norm = fm::sqrt(shifted.iter().map(|v| v * v).sum());
    Ok(sort_values(shifted.iter().map(|v| v / norm).collect()))
}

/// Draw the spectrum described by `spec`. Deterministic given the seed.
pub fn sample_spectrum(spec: &DistributionSpec) -> Result<Spectrum, DistError> {
    spec.validate()?;
    let values = match spec.kind {
        DistributionKind::Wishart => wishart_spectrum(spec, true)?,
        DistributionKind::WishartUnif => wishart_spectrum(spec, false)?,
        DistributionKind::Uniform => uniform_spectrum(spec),
        DistributionKind::QuarticHessian => quartic_spectrum(spec),
        DistributionKind::ErdosRenyi => {
            let lap = erdos_laplacian(spec)?;
            sym_eigvals(&lap).map_err(|e| DistError::Numeric(format!("{e}")))?
        }
        DistributionKind::SyntheticCovariance => covariance_spectrum(spec)?,
    };
    Spectrum::new(values)
}

/// Draw a dense realization together with its spectrum (sorted; equals
/// `sym_eigh` of the matrix up to solver accuracy).
pub fn sample_dense(spec: &DistributionSpec) -> Result<(Matrix, Spectrum), DistError> {
    sample_dense_with_cap(spec, DENSE_CAP_DEFAULT)
}

pub fn sample_dense_with_cap(
    spec: &DistributionSpec,
    cap: usize,
) -> Result<(Matrix, Spectrum), DistError> {
    spec.validate()?;
    if spec.dim > cap {
        return Err(DistError::DenseCapExceeded { dim: spec.dim, cap });
    }
    match spec.kind {
        DistributionKind::Uniform | DistributionKind::QuarticHessian => {
            let spectrum = sample_spectrum(spec)?;
            let mut basis_rng = Rng::stream(spec.seed, STREAM_BASIS);
            let q = matcore::haar_orthogonal(spec.dim, &mut basis_rng);
            let a = matcore::synth_from_spectrum(&q, spectrum.values())
                .map_err(|e| DistError::Numeric(format!("{e}")))?;
            Ok((a, spectrum))
        }
        DistributionKind::Wishart | DistributionKind::WishartUnif => {
            let d = spec.dim;
            let r = wishart_rows(d);
            let mut rng = Rng::stream(spec.seed, STREAM_VALUES);
            let gaussian = spec.kind == DistributionKind::Wishart;
            let x = if gaussian {
                gaussian_factor(r, d, &mut rng)
            } else {
                uniform_factor(r, d, &mut rng)
            };
            // dense A = X^T X / 3d + eps I via the transposed factor
            let mut xt = vec![0.0f64; d * r];
            for i in 0..r {
                for j in 0..d {
                    xt[j * r + i] = x[i * d + j];
                }
            }
            let mut a = gram(d, r, &xt);
            let scale = 1.0 / (3.0 * d as f64);
            for v in a.data_mut().iter_mut() {
                *v *= scale;
            }
            for i in 0..d {
                let v = a.at(i, i) + spec.eps_stb;
                a.set(i, i, v);
            }
            // spectrum from the small Gram factor, consistent with the dense build
            let g = gram(r, d, &x);
            let gram_eigs = sym_eigvals(&g).map_err(|e| DistError::Numeric(format!("{e}")))?;
            let mut values = vec![spec.eps_stb; d - r];
            values.extend(gram_eigs.iter().map(|&l| l * scale + spec.eps_stb));
            Ok((a, Spectrum::new(sort_values(values))?))
        }
        DistributionKind::ErdosRenyi => {
            let lap = erdos_laplacian(spec)?;
            let values = sym_eigvals(&lap).map_err(|e| DistError::Numeric(format!("{e}")))?;
            Ok((lap, Spectrum::new(values)?))
        }
        DistributionKind::SyntheticCovariance => {
            let d = spec.dim;
            let n = 2 * d;
            let g = covariance_gram(spec);
            let eigs = sym_eigvals(&g).map_err(|e| DistError::Numeric(format!("{e}")))?;
            let shifted: Vec<f64> = eigs.iter().map(|&l| l / n as f64 + spec.eps_stb).collect();
            let norm = fm::sqrt(shifted.iter().map(|v| v * v).sum());
            let mut a = g;
            for v in a.data_mut().iter_mut() {
                *v /= n as f64;
            }
            for i in 0..d {
                let v = a.at(i, i) + spec.eps_stb;
                a.set(i, i, v);
            }
            for v in a.data_mut().iter_mut() {
                *v /= norm;
            }
            let values = sort_values(shifted.iter().map(|v| v / norm).collect());
            Ok((a, Spectrum::new(values)?))
        }
    }
}

/// Two-sample Kolmogorov distance between empirical CDFs. Inputs must be
/// sorted ascending.
pub fn kolmogorov_distance(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return 1.0;
    }
    let (mut i, mut j) = (0usize, 0usize);
    let mut worst = 0.0f64;
    while i < n && j < m {
        let t = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < n && a[i] <= t {
            i += 1;
        }
        while j < m && b[j] <= t {
            j += 1;
        }
        let fa = i as f64 / n as f64;
        let fb = j as f64 / m as f64;
        worst = worst.max(fm::abs(fa - fb));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::sym_eigh;

    #[test]
    fn uniform_support_after_clamping() {
        for seed in 0..20 {
            let spec = DistributionSpec::new(DistributionKind::Uniform, 4, seed);
            let s = sample_spectrum(&spec).unwrap();
            for &v in s.values() {
                assert!((1e-3..=1.0).contains(&fm::abs(v)), "value {v}");
            }
        }
    }

    #[test]
    fn quartic_raw_map_at_zero() {
        assert_eq!(quartic_eigenvalue(0.0), -0.5);
    }

    #[test]
    fn quartic_spectrum_unit_frobenius() {
        let spec = DistributionSpec::new(DistributionKind::QuarticHessian, 50, 9);
        let s = sample_spectrum(&spec).unwrap();
        let norm: f64 = s.values().iter().map(|v| v * v).sum::<f64>();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wishart_spectrum_floor_and_mean() {
        let spec = DistributionSpec::new(DistributionKind::Wishart, 16, 3);
        let s = sample_spectrum(&spec).unwrap();
        assert!(s.values().iter().all(|&v| v >= 1e-3));

        // Monte-Carlo check of the Marchenko-Pastur mean r/(3d) + eps over
        // 100 seeds at d = 64
        let d = 64;
        let expected = (d as f64 / 4.0) / (3.0 * d as f64) + 1e-3;
        let mut means = Vec::new();
        for seed in 0..100u64 {
            let spec = DistributionSpec::new(DistributionKind::Wishart, d, seed);
            let s = sample_spectrum(&spec).unwrap();
            means.push(s.values().iter().sum::<f64>() / d as f64);
        }
        let grand = means.iter().sum::<f64>() / means.len() as f64;
        let var = means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>()
            / (means.len() - 1) as f64;
        let sigma_mean = (var / means.len() as f64).sqrt();
        assert!(
            (grand - expected).abs() <= 3.0 * sigma_mean,
            "grand mean {grand} vs expected {expected} (3 sigma {})",
            3.0 * sigma_mean
        );
    }

    #[test]
    fn determinism_bit_exact() {
        for kind in [
            DistributionKind::Wishart,
            DistributionKind::WishartUnif,
            DistributionKind::Uniform,
            DistributionKind::QuarticHessian,
            DistributionKind::ErdosRenyi,
            DistributionKind::SyntheticCovariance,
        ] {
            let spec = DistributionSpec::new(kind, 12, 77);
            let a = sample_spectrum(&spec).unwrap();
            let b = sample_spectrum(&spec).unwrap();
            assert_eq!(a, b, "{kind:?}");
        }
    }

    #[test]
    fn dense_round_trip_uniform() {
        let spec = DistributionSpec::new(DistributionKind::Uniform, 8, 5);
        let (a, s) = sample_dense(&spec).unwrap();
        let d = sym_eigh(&a).unwrap();
        for (x, y) in d.eigenvalues.iter().zip(s.values()) {
            assert!((x - y).abs() <= 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn dense_round_trip_wishart() {
        let spec = DistributionSpec::new(DistributionKind::Wishart, 16, 11);
        let (a, s) = sample_dense(&spec).unwrap();
        assert!(s.values().iter().all(|&v| v >= 1e-3));
        let d = sym_eigh(&a).unwrap();
        for (x, y) in d.eigenvalues.iter().zip(s.values()) {
            assert!((x - y).abs() <= 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn erdos_complete_graph_laplacian() {
        let mut spec = DistributionSpec::new(DistributionKind::ErdosRenyi, 5, 1);
        spec.edge_probability = 0.999_999;
        let (_, s) = sample_dense(&spec).unwrap();
        let vals = s.values();
        assert!(vals[0].abs() < 1e-12, "smallest {}", vals[0]);
        for &v in &vals[1..] {
            assert!((v - 1.25).abs() < 1e-12, "value {v}");
        }
    }

    #[test]
    fn dense_cap_enforced() {
        let spec = DistributionSpec::new(DistributionKind::Uniform, 64, 1);
        assert!(matches!(
            sample_dense_with_cap(&spec, 32),
            Err(DistError::DenseCapExceeded { dim: 64, cap: 32 })
        ));
    }

    #[test]
    fn invalid_specs_rejected() {
        let spec = DistributionSpec::new(DistributionKind::Wishart, 3, 0);
        assert!(matches!(
            sample_spectrum(&spec),
            Err(DistError::InvalidSpec(_))
        ));
        let mut spec = DistributionSpec::new(DistributionKind::ErdosRenyi, 8, 0);
        spec.edge_probability = 1.0;
        assert!(matches!(
            sample_spectrum(&spec),
            Err(DistError::InvalidSpec(_))
        ));
    }

    #[test]
    fn kolmogorov_distance_basics() {
        let a = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(kolmogorov_distance(&a, &a), 0.0);
        let b = [10.0, 11.0, 12.0, 13.0];
        assert_eq!(kolmogorov_distance(&a, &b), 1.0);
    }

    #[test]
    fn covariance_spectrum_positive_unit_norm() {
        let spec = DistributionSpec::new(DistributionKind::SyntheticCovariance, 10, 21);
        let s = sample_spectrum(&spec).unwrap();
        assert!(s.values().iter().all(|&v| v > 0.0));
        let norm: f64 = s.values().iter().map(|v| v * v).sum::<f64>();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}
