//! Replay and verification of discovered algorithms.
//!
//! Two replay engines execute the same step list: [`replay_spectral`] runs
//! the elementwise scalar maps on a spectrum (O(d) per step, valid for any
//! co-diagonalizable realization), and [`replay_matrix`] runs the dense
//! matrix maps. Congruence invariance says their loss curves coincide;
//! [`equivalence_check`] measures exactly that, per step, across seeds.
//! [`generalization_check`] compares loss curves across two distributions
//! at growing dimension, the regime where matching limiting spectra make
//! one discovered algorithm serve both.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::costmodel::CostTable;
use crate::env;
use crate::fm;
use crate::iterations::{
    apply_matrix, apply_spectral, iteration, Divergence, EpisodeCache, MatrixFunction,
};
use crate::matcore::{self, sym_eigh, sym_matmul, MatError, Matrix};
use crate::mcts::{AlgorithmStep, DiscoveredAlgorithm, InitDescriptor, InitExpr};
use crate::rng::Rng;
use crate::spectra::{sample_spectrum, DistError, DistributionSpec, Spectrum};

#[derive(Clone, Debug)]
pub enum VerifyError {
    /// The target scalar map is undefined on the input's spectrum.
    Domain(String),
    Mat(MatError),
    Dist(DistError),
    /// The algorithm's function does not match the requested check.
    FunctionMismatch,
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::Domain(msg) => write!(f, "domain error: {msg}"),
            VerifyError::Mat(e) => write!(f, "matrix error: {e}"),
            VerifyError::Dist(e) => write!(f, "sampling error: {e}"),
            VerifyError::FunctionMismatch => f.write_str("algorithm/function mismatch"),
        }
    }
}

impl From<MatError> for VerifyError {
    fn from(e: MatError) -> Self {
        VerifyError::Mat(e)
    }
}

impl From<DistError> for VerifyError {
    fn from(e: DistError) -> Self {
        VerifyError::Dist(e)
    }
}

/// One row of a replay curve.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurvePoint {
    pub step: usize,
    pub cum_time: f64,
    pub term_loss: f64,
    pub eval_loss: f64,
}

/// Per-step loss/time curve; truncated at `failed_at` on divergence.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LossCurve {
    pub points: Vec<CurvePoint>,
    pub failed_at: Option<usize>,
}

impl LossCurve {
    pub fn final_term_loss(&self) -> f64 {
        self.points.last().map(|p| p.term_loss).unwrap_or(f64::INFINITY)
    }

    pub fn term_losses(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.term_loss).collect()
    }
}

fn init_spectra(init: InitDescriptor, lam: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let expr = |e: InitExpr| -> Vec<f64> {
        match e {
            InitExpr::A => lam.to_vec(),
            InitExpr::Identity => alloc::vec![1.0; lam.len()],
            InitExpr::AOverFroSq => {
                let norm2: f64 = lam.iter().map(|v| v * v).sum();
                lam.iter().map(|v| v / norm2).collect()
            }
        }
    };
    (expr(init.x0), expr(init.y0))
}

/// Replay a discovered algorithm on a spectrum with modeled step times.
pub fn replay_spectral(
    alg: &DiscoveredAlgorithm,
    lam: &Spectrum,
    cost_table: &CostTable,
) -> LossCurve {
    let lamv = lam.values();
    let (mut x, mut y) = init_spectra(alg.init, lamv);
    let mut points = Vec::with_capacity(alg.steps.len() + 1);
    let mut cum_time = 0.0;
    let mut setup_paid = false;
    points.push(CurvePoint {
        step: 0,
        cum_time,
        term_loss: env::termination_loss(&x, lamv, alg.function),
        eval_loss: env::evaluation_loss(&x, lamv, alg.function),
    });
    for (k, step) in alg.steps.iter().enumerate() {
        let spec = iteration(step.iter);
        cum_time += cost_table.cost(step.iter).unwrap_or(0.0);
        if spec.setup_cost.is_some() && !setup_paid {
            cum_time += cost_table.setup_cost(step.iter);
            setup_paid = true;
        }
        match apply_spectral(spec, &x, &y, lamv, &step.params) {
            Ok((nx, ny)) => {
                x = nx;
                y = ny;
            }
            Err(Divergence) => {
                return LossCurve {
                    points,
                    failed_at: Some(k + 1),
                };
            }
        }
        points.push(CurvePoint {
            step: k + 1,
            cum_time,
            term_loss: env::termination_loss(&x, lamv, alg.function),
            eval_loss: env::evaluation_loss(&x, lamv, alg.function),
        });
    }
    LossCurve {
        points,
        failed_at: None,
    }
}

/// Dense-matrix executor for one replayed trajectory.
pub struct MatrixReplay {
    pub x: Matrix,
    pub y: Matrix,
    a: Matrix,
    a_norm: f64,
    function: MatrixFunction,
    cache: EpisodeCache,
}

impl MatrixReplay {
    pub fn new(function: MatrixFunction, init: InitDescriptor, dense: &Matrix) -> Self {
        let expr = |e: InitExpr| -> Matrix {
            match e {
                InitExpr::A => dense.clone(),
                InitExpr::Identity => Matrix::identity(dense.dim()),
                InitExpr::AOverFroSq => {
                    let norm = dense.frob_norm();
                    dense.scale(1.0 / (norm * norm))
                }
            }
        };
        MatrixReplay {
            x: expr(init.x0),
            y: expr(init.y0),
            a: dense.clone(),
            a_norm: dense.frob_norm(),
            function,
            cache: EpisodeCache::new(),
        }
    }

    /// Apply one step in the dense form.
    pub fn step(&mut self, step: &AlgorithmStep) -> Result<(), Divergence> {
        let spec = iteration(step.iter);
        let (nx, ny) = apply_matrix(spec, &self.x, &self.y, &self.a, &step.params, &mut self.cache)?;
        self.x = nx;
        self.y = ny;
        Ok(())
    }

    /// Matrix-form termination loss (residual over `||A||_F`).
    pub fn term_loss(&self) -> f64 {
        let residual = match self.function {
            MatrixFunction::Inverse => {
                let ax = match sym_matmul(&self.a, &self.x) {
                    Ok(m) => m,
                    Err(_) => return f64::INFINITY,
                };
                let mut r = ax;
                for i in 0..r.dim() {
                    let v = r.at(i, i) - 1.0;
                    r.set(i, i, v);
                }
                r.frob_norm()
            }
            MatrixFunction::Sign => {
                let x2 = match sym_matmul(&self.x, &self.x) {
                    Ok(m) => m,
                    Err(_) => return f64::INFINITY,
                };
                let mut r = x2;
                for i in 0..r.dim() {
                    let v = r.at(i, i) - 1.0;
                    r.set(i, i, v);
                }
                r.frob_norm()
            }
            MatrixFunction::Sqrt => {
                let x2 = match sym_matmul(&self.x, &self.x) {
                    Ok(m) => m,
                    Err(_) => return f64::INFINITY,
                };
                match x2.add_scaled(&self.a, -1.0) {
                    Ok(r) => r.frob_norm(),
                    Err(_) => return f64::INFINITY,
                }
            }
            MatrixFunction::Proot => {
                let x2 = match sym_matmul(&self.x, &self.x) {
                    Ok(m) => m,
                    Err(_) => return f64::INFINITY,
                };
                let x3 = match sym_matmul(&x2, &self.x) {
                    Ok(m) => m,
                    Err(_) => return f64::INFINITY,
                };
                match x3.add_scaled(&self.a, -1.0) {
                    Ok(r) => r.frob_norm(),
                    Err(_) => return f64::INFINITY,
                }
            }
        };
        residual / self.a_norm
    }

    /// Matrix-form evaluation loss against a reference `f(A)`.
    pub fn eval_loss(&self, reference: &Matrix) -> f64 {
        let diff = match self.x.add_scaled(reference, -1.0) {
            Ok(d) => d,
            Err(_) => return f64::INFINITY,
        };
        match self.function {
            MatrixFunction::Sign => diff.frob_norm() / fm::sqrt(self.x.dim() as f64),
            _ => diff.frob_norm() / reference.frob_norm().max(1e-300),
        }
    }
}

/// Reference `f(A) = U f(D) U^T` through the eigensolver.
pub fn reference_fa(dense: &Matrix, function: MatrixFunction) -> Result<Matrix, VerifyError> {
    let eig = sym_eigh(dense)?;
    let max_abs = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, &v| m.max(fm::abs(v)));
    let mapped: Result<Vec<f64>, VerifyError> = eig
        .eigenvalues
        .iter()
        .map(|&l| match function {
            MatrixFunction::Sqrt if l < 0.0 => Err(VerifyError::Domain(format!(
                "square root undefined at eigenvalue {l}"
            ))),
            MatrixFunction::Sign if fm::abs(l) <= 1e-14 * max_abs => Err(VerifyError::Domain(
                format!("sign undefined at eigenvalue {l}"),
            )),
            MatrixFunction::Inverse if fm::abs(l) <= 1e-14 * max_abs => Err(VerifyError::Domain(
                format!("inverse undefined at eigenvalue {l}"),
            )),
            _ => Ok(function.scalar(l)),
        })
        .collect();
    let mapped = mapped?;
    Ok(matcore::synth_from_spectrum(&eig.eigenvectors, &mapped)?)
}

/// Replay a discovered algorithm on a dense realization with modeled step
/// times; the evaluation column compares against `reference_fa`.
pub fn replay_matrix(
    alg: &DiscoveredAlgorithm,
    dense: &Matrix,
    cost_table: &CostTable,
) -> Result<LossCurve, VerifyError> {
    let reference = reference_fa(dense, alg.function)?;
    let mut replay = MatrixReplay::new(alg.function, alg.init, dense);
    let mut points = Vec::with_capacity(alg.steps.len() + 1);
    let mut cum_time = 0.0;
    let mut setup_paid = false;
    points.push(CurvePoint {
        step: 0,
        cum_time,
        term_loss: replay.term_loss(),
        eval_loss: replay.eval_loss(&reference),
    });
    for (k, step) in alg.steps.iter().enumerate() {
        let spec = iteration(step.iter);
        cum_time += cost_table.cost(step.iter).unwrap_or(0.0);
        if spec.setup_cost.is_some() && !setup_paid {
            cum_time += cost_table.setup_cost(step.iter);
            setup_paid = true;
        }
        if replay.step(step).is_err() {
            return Ok(LossCurve {
                points,
                failed_at: Some(k + 1),
            });
        }
        points.push(CurvePoint {
            step: k + 1,
            cum_time,
            term_loss: replay.term_loss(),
            eval_loss: replay.eval_loss(&reference),
        });
    }
    Ok(LossCurve {
        points,
        failed_at: None,
    })
}

/// Result of the spectral/matrix equivalence experiment.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EquivalenceReport {
    pub dim: usize,
    pub seeds: usize,
    pub tol: f64,
    pub per_seed_deviation: Vec<f64>,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Haar-conjugated realization of a sampled spectrum.
pub fn haar_realization(
    dist: &DistributionSpec,
    basis_seed: u64,
) -> Result<(Matrix, Spectrum), VerifyError> {
    let spectrum = sample_spectrum(dist)?;
    let mut rng = Rng::stream(basis_seed, 0x68_61_61_72);
    let q = matcore::haar_orthogonal(dist.dim, &mut rng);
    let dense = matcore::synth_from_spectrum(&q, spectrum.values())?;
    Ok((dense, spectrum))
}

/// Compare per-step termination losses between the spectral and matrix
/// replays of `alg` on Haar-conjugated realizations of `dist`.
pub fn equivalence_check(
    alg: &DiscoveredAlgorithm,
    dist: &DistributionSpec,
    seeds: usize,
    tol: f64,
    cost_table: &CostTable,
) -> Result<EquivalenceReport, VerifyError> {
    let mut per_seed = Vec::with_capacity(seeds);
    for s in 0..seeds {
        let mut spec = dist.clone();
        spec.seed = dist.seed.wrapping_add(s as u64);
        let (dense, spectrum) = haar_realization(&spec, spec.seed)?;
        let spectral = replay_spectral(alg, &spectrum, cost_table);
        let matrix = replay_matrix(alg, &dense, cost_table)?;
        per_seed.push(curve_deviation(&spectral, &matrix));
    }
    let max_deviation = per_seed.iter().fold(0.0f64, |m, &v| m.max(v));
    Ok(EquivalenceReport {
        dim: dist.dim,
        seeds,
        tol,
        per_seed_deviation: per_seed,
        max_deviation,
        pass: max_deviation <= tol,
    })
}

/// Max per-step termination-loss deviation between two curves (infinite if
/// they disagree on length or failure point).
pub fn curve_deviation(a: &LossCurve, b: &LossCurve) -> f64 {
    if a.points.len() != b.points.len() || a.failed_at != b.failed_at {
        return f64::INFINITY;
    }
    a.points
        .iter()
        .zip(b.points.iter())
        .map(|(pa, pb)| fm::abs(pa.term_loss - pb.term_loss))
        .fold(0.0, f64::max)
}

/// Median of a sample (averages the middle pair for even lengths).
pub fn median(values: &mut Vec<f64>) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Per-dimension loss-curve gap between two distributions.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DimGap {
    pub dim: usize,
    pub median_max_gap: f64,
}

#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeneralizationReport {
    pub per_dim: Vec<DimGap>,
    /// Median gaps shrink monotonically as dimension grows.
    pub decreasing: bool,
}

/// Max-over-steps termination-loss gap between the replay of `alg` on two
/// distributions sharing one seed.
pub fn generalization_gap_for_seed(
    alg: &DiscoveredAlgorithm,
    dist_a: &DistributionSpec,
    dist_b: &DistributionSpec,
    seed: u64,
    cost_table: &CostTable,
) -> Result<f64, VerifyError> {
    let mut sa = dist_a.clone();
    sa.seed = seed;
    let mut sb = dist_b.clone();
    sb.seed = seed;
    let la = sample_spectrum(&sa)?;
    let lb = sample_spectrum(&sb)?;
    let ca = replay_spectral(alg, &la, cost_table);
    let cb = replay_spectral(alg, &lb, cost_table);
    let steps = ca.points.len().min(cb.points.len());
    let mut gap = 0.0f64;
    for k in 0..steps {
        gap = gap.max(fm::abs(ca.points[k].term_loss - cb.points[k].term_loss));
    }
    Ok(gap)
}

/// Cross-distribution generalization experiment: per dimension, the median
/// (over seeds) of the max per-step loss gap.
pub fn generalization_check(
    alg: &DiscoveredAlgorithm,
    dist_a: &DistributionSpec,
    dist_b: &DistributionSpec,
    dims: &[usize],
    seeds: usize,
    cost_table: &CostTable,
) -> Result<GeneralizationReport, VerifyError> {
    let mut per_dim = Vec::with_capacity(dims.len());
    for &dim in dims {
        let mut gaps = Vec::with_capacity(seeds);
        for s in 0..seeds {
            let mut da = dist_a.clone();
            da.dim = dim;
            let mut db = dist_b.clone();
            db.dim = dim;
            let seed = dist_a.seed.wrapping_add(s as u64);
            gaps.push(generalization_gap_for_seed(alg, &da, &db, seed, cost_table)?);
        }
        per_dim.push(DimGap {
            dim,
            median_max_gap: median(&mut gaps),
        });
    }
    let decreasing = per_dim
        .windows(2)
        .all(|w| w[1].median_max_gap <= w[0].median_max_gap);
    Ok(GeneralizationReport {
        per_dim,
        decreasing,
    })
}

/// A previously discovered square-root schedule for Wishart inputs, kept as
/// a regression fixture: six tuned fixed-point steps, one coupling step,
/// then three coupled Newton-Schulz steps in the classical parametrization.
pub fn wishart_sqrt_reference_schedule() -> Vec<AlgorithmStep> {
    use crate::iterations::IterationId::*;
    let a = [2.092, 1.891, 3.714, 1.063, 0.920, 1.0];
    let b = [1.983, 0.586, 2.385, 0.452, 0.900, 0.946];
    let mut steps: Vec<AlgorithmStep> = a
        .iter()
        .zip(b.iter())
        .map(|(&ai, &bi)| AlgorithmStep {
            iter: SqrtVisser,
            params: alloc::vec![ai, bi],
        })
        .collect();
    steps.push(AlgorithmStep {
        iter: SqrtCoupling,
        params: Vec::new(),
    });
    for _ in 0..3 {
        steps.push(AlgorithmStep {
            iter: SqrtNsv,
            params: alloc::vec![3.0, 1.0],
        });
    }
    steps
}

/// Wrap a bare step list as a replayable algorithm.
pub fn algorithm_from_steps(
    function: MatrixFunction,
    steps: Vec<AlgorithmStep>,
    eps_tol: f64,
    dist: &DistributionSpec,
) -> DiscoveredAlgorithm {
    DiscoveredAlgorithm {
        function,
        init: InitDescriptor::for_function(function),
        steps,
        eps_tol,
        modeled_cost: 0.0,
        final_loss: 0.0,
        provenance: crate::mcts::Provenance {
            seed: dist.seed,
            dist: dist.clone(),
            cost_context: crate::costmodel::CostContext::static_default(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costmodel::CostTable;
    use crate::iterations::IterationId;
    use crate::spectra::DistributionKind;

    fn sqrt_table() -> CostTable {
        CostTable::static_default(MatrixFunction::Sqrt)
    }

    fn sign_table() -> CostTable {
        CostTable::static_default(MatrixFunction::Sign)
    }

    #[test]
    fn reference_on_diagonals() {
        let a = Matrix::diag(&[4.0, 9.0]);
        let r = reference_fa(&a, MatrixFunction::Sqrt).unwrap();
        assert!((r.at(0, 0) - 2.0).abs() < 1e-12);
        assert!((r.at(1, 1) - 3.0).abs() < 1e-12);
        let p = reference_fa(&Matrix::diag(&[8.0]), MatrixFunction::Proot).unwrap();
        assert!((p.at(0, 0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reference_sign_on_indefinite_realization() {
        let dist = DistributionSpec::new(DistributionKind::Uniform, 8, 3);
        let (dense, spectrum) = haar_realization(&dist, 3).unwrap();
        let r = reference_fa(&dense, MatrixFunction::Sign).unwrap();
        let eig = sym_eigh(&r).unwrap();
        for &l in &eig.eigenvalues {
            assert!((l.abs() - 1.0).abs() < 1e-9, "eigenvalue {l}");
        }
        let _ = spectrum;
    }

    #[test]
    fn reference_domain_errors() {
        assert!(matches!(
            reference_fa(&Matrix::diag(&[-1.0, 4.0]), MatrixFunction::Sqrt),
            Err(VerifyError::Domain(_))
        ));
        assert!(matches!(
            reference_fa(&Matrix::diag(&[0.0, 1.0]), MatrixFunction::Sign),
            Err(VerifyError::Domain(_))
        ));
    }

    #[test]
    fn spectral_replay_hand_values() {
        // one Newton step at a = 1 on lam = 4: x = 2.125, eval |x - 1| = 1.125
        let dist = DistributionSpec::new(DistributionKind::Uniform, 1, 0);
        let alg = algorithm_from_steps(
            MatrixFunction::Sign,
            alloc::vec![AlgorithmStep {
                iter: IterationId::SignNewton,
                params: alloc::vec![1.0],
            }],
            1e-6,
            &dist,
        );
        let lam = Spectrum::new(alloc::vec![4.0]).unwrap();
        let curve = replay_spectral(&alg, &lam, &sign_table());
        assert_eq!(curve.points.len(), 2);
        assert!((curve.points[1].eval_loss - 1.125).abs() < 1e-15);
        assert!((curve.points[1].cum_time - 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_algorithm_on_identity_spectrum() {
        let dist = DistributionSpec::new(DistributionKind::Uniform, 4, 0);
        let alg = algorithm_from_steps(MatrixFunction::Sqrt, Vec::new(), 1e-6, &dist);
        let lam = Spectrum::new(alloc::vec![1.0; 4]).unwrap();
        let curve = replay_spectral(&alg, &lam, &sqrt_table());
        assert_eq!(curve.points.len(), 1);
        assert_eq!(curve.points[0].term_loss, 0.0);
    }

    #[test]
    fn matrix_replay_matches_spectral_on_diagonal() {
        let dist = DistributionSpec::new(DistributionKind::Wishart, 8, 1);
        let steps = alloc::vec![
            AlgorithmStep {
                iter: IterationId::SqrtVisser,
                params: alloc::vec![1.0, 0.5],
            },
            AlgorithmStep {
                iter: IterationId::SqrtCoupling,
                params: Vec::new(),
            },
            AlgorithmStep {
                iter: IterationId::SqrtNsv,
                params: alloc::vec![3.0, 1.0],
            },
        ];
        let alg = algorithm_from_steps(MatrixFunction::Sqrt, steps, 1e-6, &dist);
        let lam = sample_spectrum(&dist).unwrap();
        let spectral = replay_spectral(&alg, &lam, &sqrt_table());
        let dense = Matrix::diag(lam.values());
        let matrix = replay_matrix(&alg, &dense, &sqrt_table()).unwrap();
        assert!(curve_deviation(&spectral, &matrix) <= 1e-10);
    }

    #[test]
    fn matrix_replay_matches_spectral_on_haar_conjugation() {
        let dist = DistributionSpec::new(DistributionKind::Wishart, 16, 5);
        let alg = algorithm_from_steps(
            MatrixFunction::Sqrt,
            wishart_sqrt_reference_schedule(),
            1e-3,
            &dist,
        );
        let (dense, spectrum) = haar_realization(&dist, 5).unwrap();
        let spectral = replay_spectral(&alg, &spectrum, &sqrt_table());
        let matrix = replay_matrix(&alg, &dense, &sqrt_table()).unwrap();
        assert!(curve_deviation(&spectral, &matrix) <= 1e-9);
    }

    #[test]
    fn equivalence_check_passes_and_empty_alg_trivially_passes() {
        let dist = DistributionSpec::new(DistributionKind::Wishart, 12, 7);
        let alg = algorithm_from_steps(
            MatrixFunction::Sqrt,
            wishart_sqrt_reference_schedule(),
            1e-3,
            &dist,
        );
        let report = equivalence_check(&alg, &dist, 3, 1e-9, &sqrt_table()).unwrap();
        assert!(report.pass, "max deviation {}", report.max_deviation);

        let empty = algorithm_from_steps(MatrixFunction::Sqrt, Vec::new(), 1e-6, &dist);
        let report = equivalence_check(&empty, &dist, 2, 1e-12, &sqrt_table()).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn non_invariant_map_fails_the_comparison() {
        // negative control: perturb the matrix path with a basis-dependent
        // offset after each step and watch the deviation blow past tol
        let dist = DistributionSpec::new(DistributionKind::Wishart, 8, 9);
        let steps = alloc::vec![AlgorithmStep {
            iter: IterationId::SqrtVisser,
            params: alloc::vec![1.0, 0.5],
        }];
        let alg = algorithm_from_steps(MatrixFunction::Sqrt, steps, 1e-6, &dist);
        let (dense, spectrum) = haar_realization(&dist, 9).unwrap();
        let spectral = replay_spectral(&alg, &spectrum, &sqrt_table());
        let mut replay = MatrixReplay::new(alg.function, alg.init, &dense);
        let mut points = alloc::vec![CurvePoint {
            step: 0,
            cum_time: 0.0,
            term_loss: replay.term_loss(),
            eval_loss: 0.0,
        }];
        for (k, step) in alg.steps.iter().enumerate() {
            replay.step(step).unwrap();
            // basis-dependent perturbation: not congruence invariant
            let bump = replay.x.at(0, 0) + 0.1;
            replay.x.set(0, 0, bump);
            points.push(CurvePoint {
                step: k + 1,
                cum_time: 0.0,
                term_loss: replay.term_loss(),
                eval_loss: 0.0,
            });
        }
        let perturbed = LossCurve {
            points,
            failed_at: None,
        };
        assert!(curve_deviation(&spectral, &perturbed) > 1e-9);
    }

    #[test]
    fn generalization_gap_zero_for_identical_distributions() {
        let dist = DistributionSpec::new(DistributionKind::Wishart, 32, 3);
        let alg = algorithm_from_steps(
            MatrixFunction::Sqrt,
            wishart_sqrt_reference_schedule(),
            1e-3,
            &dist,
        );
        let report =
            generalization_check(&alg, &dist, &dist, &[16, 32], 4, &sqrt_table()).unwrap();
        for g in &report.per_dim {
            assert_eq!(g.median_max_gap, 0.0);
        }
        assert!(report.decreasing);
    }

    #[test]
    fn generalization_gap_stable_under_seed_offset() {
        let wishart = DistributionSpec::new(DistributionKind::Wishart, 250, 0);
        let unif = DistributionSpec::new(DistributionKind::WishartUnif, 250, 0);
        let alg = algorithm_from_steps(
            MatrixFunction::Sqrt,
            wishart_sqrt_reference_schedule(),
            1e-3,
            &wishart,
        );
        let tbl = sqrt_table();
        let mut gaps_a = Vec::new();
        let mut gaps_b = Vec::new();
        for s in 0..40u64 {
            gaps_a.push(
                generalization_gap_for_seed(&alg, &wishart, &unif, s, &tbl).unwrap(),
            );
            gaps_b.push(
                generalization_gap_for_seed(&alg, &wishart, &unif, 1000 + s, &tbl).unwrap(),
            );
        }
        let ma = median(&mut gaps_a);
        let mb = median(&mut gaps_b);
        let rel = (ma - mb).abs() / ma.max(mb);
        assert!(rel <= 0.2, "medians {ma} vs {mb} differ by {rel}");
    }

    #[test]
    fn failed_replay_truncates_with_marker() {
        let dist = DistributionSpec::new(DistributionKind::Uniform, 4, 2);
        // Newton at a = 0 divides by zero immediately
        let steps = alloc::vec![AlgorithmStep {
            iter: IterationId::SignNewton,
            params: alloc::vec![0.0],
        }];
        let alg = algorithm_from_steps(MatrixFunction::Sign, steps, 1e-6, &dist);
        let lam = sample_spectrum(&dist).unwrap();
        let curve = replay_spectral(&alg, &lam, &sign_table());
        assert_eq!(curve.failed_at, Some(1));
        assert_eq!(curve.points.len(), 1);
    }

    #[test]
    fn median_basics() {
        assert_eq!(median(&mut alloc::vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut alloc::vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
