//! Classical baseline schedules.
//!
//! Each baseline is a fixed iteration with (possibly) an adaptive scaling:
//! scaled Newton's spectral bounds recursion, the scaled Newton-Schulz
//! tracking recursion, determinant-based Denman-Beavers scaling. Baselines
//! serve two roles: standalone comparison runs ([`run_baseline`]) and
//! rollout policies for the tree search ([`rollout_baseline`]).
//!
//! A rollout must flatten into replayable registry actions, so every
//! rollout-eligible baseline emits its step as an `(IterationId, params)`
//! instance — e.g. a scaled Newton step is `Sign_Newton` with `a = mu_k`,
//! and a scaled Newton-Schulz step `1.5 rho x - 0.5 (rho x)^3` is converted
//! exactly to the `Sign_NS` parametrization. The two baselines with no
//! registry counterpart (the square-root Newton step and the sign Newton
//! variant) apply their own scalar maps and are standalone-only.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::costmodel::CostTable;
use crate::env::{self, EnvConfig, EnvState, TermStatus};
use crate::fm;
use crate::iterations::{
    apply_spectral, iteration, CostProfile, Divergence, IterationId, MatrixFunction,
};
use crate::spectra::Spectrum;

/// Identifier of a baseline schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BaselineId {
    #[cfg_attr(feature = "serde", serde(rename = "Inv_NS"))]
    InvNs,
    #[cfg_attr(feature = "serde", serde(rename = "Inv_Chebyshev"))]
    InvChebyshev,
    #[cfg_attr(feature = "serde", serde(rename = "Sign_Newton"))]
    SignNewton,
    #[cfg_attr(feature = "serde", serde(rename = "Sign_NS"))]
    SignNs,
    #[cfg_attr(feature = "serde", serde(rename = "Sign_ScaledNewton"))]
    SignScaledNewton,
    #[cfg_attr(feature = "serde", serde(rename = "Sign_ScaledNS"))]
    SignScaledNs,
    #[cfg_attr(feature = "serde", serde(rename = "Sign_Halley"))]
    SignHalley,
    #[cfg_attr(feature = "serde", serde(rename = "Sign_NewtonVariant"))]
    SignNewtonVariant,
    #[cfg_attr(feature = "serde", serde(rename = "Sqrt_Newton"))]
    SqrtNewton,
    #[cfg_attr(feature = "serde", serde(rename = "Sqrt_DB"))]
    SqrtDb,
    #[cfg_attr(feature = "serde", serde(rename = "Sqrt_NSV"))]
    SqrtNsv,
    #[cfg_attr(feature = "serde", serde(rename = "Sqrt_ScaledDB"))]
    SqrtScaledDb,
    #[cfg_attr(feature = "serde", serde(rename = "Sqrt_Visser"))]
    SqrtVisser,
    #[cfg_attr(feature = "serde", serde(rename = "Proot_Iannazzo"))]
    ProotIannazzo,
    #[cfg_attr(feature = "serde", serde(rename = "Proot_Newton"))]
    ProotNewton,
    #[cfg_attr(feature = "serde", serde(rename = "Proot_Visser"))]
    ProotVisser,
}

pub const ALL_BASELINES: [BaselineId; 16] = [
    BaselineId::InvNs,
    BaselineId::InvChebyshev,
    BaselineId::SignNewton,
    BaselineId::SignNs,
    BaselineId::SignScaledNewton,
    BaselineId::SignScaledNs,
    BaselineId::SignHalley,
    BaselineId::SignNewtonVariant,
    BaselineId::SqrtNewton,
    BaselineId::SqrtDb,
    BaselineId::SqrtNsv,
    BaselineId::SqrtScaledDb,
    BaselineId::SqrtVisser,
    BaselineId::ProotIannazzo,
    BaselineId::ProotNewton,
    BaselineId::ProotVisser,
];

impl BaselineId {
    pub fn name(self) -> &'static str {
        match self {
            BaselineId::InvNs => "Inv_NS",
            BaselineId::InvChebyshev => "Inv_Chebyshev",
            BaselineId::SignNewton => "Sign_Newton",
            BaselineId::SignNs => "Sign_NS",
            BaselineId::SignScaledNewton => "Sign_ScaledNewton",
            BaselineId::SignScaledNs => "Sign_ScaledNS",
            BaselineId::SignHalley => "Sign_Halley",
            BaselineId::SignNewtonVariant => "Sign_NewtonVariant",
            BaselineId::SqrtNewton => "Sqrt_Newton",
            BaselineId::SqrtDb => "Sqrt_DB",
            BaselineId::SqrtNsv => "Sqrt_NSV",
            BaselineId::SqrtScaledDb => "Sqrt_ScaledDB",
            BaselineId::SqrtVisser => "Sqrt_Visser",
            BaselineId::ProotIannazzo => "Proot_Iannazzo",
            BaselineId::ProotNewton => "Proot_Newton",
            BaselineId::ProotVisser => "Proot_Visser",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        ALL_BASELINES.iter().copied().find(|b| b.name() == name)
    }

    pub fn function(self) -> MatrixFunction {
        match self {
            BaselineId::InvNs | BaselineId::InvChebyshev => MatrixFunction::Inverse,
            BaselineId::SignNewton
            | BaselineId::SignNs
            | BaselineId::SignScaledNewton
            | BaselineId::SignScaledNs
            | BaselineId::SignHalley
            | BaselineId::SignNewtonVariant => MatrixFunction::Sign,
            BaselineId::SqrtNewton
            | BaselineId::SqrtDb
            | BaselineId::SqrtNsv
            | BaselineId::SqrtScaledDb
            | BaselineId::SqrtVisser => MatrixFunction::Sqrt,
            BaselineId::ProotIannazzo | BaselineId::ProotNewton | BaselineId::ProotVisser => {
                MatrixFunction::Proot
            }
        }
    }

    /// Relies on the auxiliary variable `Y` being coupled to `X`.
    pub fn coupled(self) -> bool {
        matches!(
            self,
            BaselineId::SqrtDb
                | BaselineId::SqrtNsv
                | BaselineId::SqrtScaledDb
                | BaselineId::ProotIannazzo
        )
    }

    /// Primitive counts per step; determinant scalings are priced as free
    /// (they fall out of the factorization used for the inverse).
    pub fn cost_profile(self) -> CostProfile {
        match self {
            BaselineId::InvNs => CostProfile::new(2, 0),
            BaselineId::InvChebyshev => CostProfile::new(4, 0),
            BaselineId::SignNewton | BaselineId::SignScaledNewton => CostProfile::new(0, 1),
            BaselineId::SignNs | BaselineId::SignScaledNs => CostProfile::new(2, 0),
            BaselineId::SignHalley => CostProfile::new(3, 1),
            BaselineId::SignNewtonVariant => CostProfile::new(2, 1),
            BaselineId::SqrtNewton => CostProfile::new(1, 1),
            BaselineId::SqrtDb | BaselineId::SqrtScaledDb => CostProfile::new(0, 2),
            BaselineId::SqrtNsv => CostProfile::new(3, 0),
            BaselineId::SqrtVisser => CostProfile::new(1, 0),
            BaselineId::ProotIannazzo => CostProfile::new(4, 1),
            BaselineId::ProotNewton => CostProfile::new(1, 0),
            BaselineId::ProotVisser => CostProfile::new(2, 0),
        }
    }

    /// First-use surcharge (the `A^{-2}` cache of the 1/3-root Newton step).
    pub fn setup_profile(self) -> Option<CostProfile> {
        match self {
            BaselineId::ProotNewton => Some(CostProfile::new(1, 1)),
            _ => None,
        }
    }

    /// Can be flattened into registry actions, hence eligible for rollouts.
    pub fn rollout_eligible(self) -> bool {
        !matches!(self, BaselineId::SqrtNewton | BaselineId::SignNewtonVariant)
    }
}

impl fmt::Display for BaselineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rollout policies per function (the search's completion baselines).
pub fn default_rollout_list(function: MatrixFunction) -> Vec<BaselineId> {
    match function {
        MatrixFunction::Inverse => vec![BaselineId::InvNs, BaselineId::InvChebyshev],
        MatrixFunction::Sign => vec![
            BaselineId::SignScaledNs,
            BaselineId::SignScaledNewton,
            BaselineId::SignHalley,
        ],
        MatrixFunction::Sqrt => vec![BaselineId::SqrtScaledDb, BaselineId::SqrtNsv],
        MatrixFunction::Proot => vec![
            BaselineId::ProotNewton,
            BaselineId::ProotVisser,
            BaselineId::ProotIannazzo,
        ],
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BaselineError {
    UnknownName,
    WrongFunction {
        baseline: BaselineId,
        expected: MatrixFunction,
    },
    DegenerateInput,
}

impl fmt::Display for BaselineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaselineError::UnknownName => f.write_str("unknown baseline name"),
            BaselineError::WrongFunction { baseline, expected } => {
                write!(f, "baseline {baseline} does not compute {expected}")
            }
            BaselineError::DegenerateInput => f.write_str("degenerate input spectrum"),
        }
    }
}

/// Exact spectral extremes `(min |lambda|, max |lambda|)`.
pub fn estimate_extremes(lam: &[f64]) -> Result<(f64, f64), BaselineError> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &v in lam {
        let a = fm::abs(v);
        lo = lo.min(a);
        hi = hi.max(a);
    }
    if hi == 0.0 || !hi.is_finite() {
        return Err(BaselineError::DegenerateInput);
    }
    Ok((lo, hi))
}

/// Convert the map `x -> 1.5 c x - 0.5 (c x)^3` into `Sign_NS` parameters
/// `(a, b)` with `x + a((b x) - (b x)^3)`. Solvable exactly for `c > 2/3`.
fn scaled_ns_params(c: f64) -> Option<(f64, f64)> {
    let s = 1.5 * c - 1.0;
    if s <= 0.0 {
        return None;
    }
    let b = fm::sqrt(0.5 * c * c * c / s);
    if b <= 0.0 || !b.is_finite() {
        return None;
    }
    Some((s / b, b))
}

/// One planned baseline step.
#[derive(Clone, Debug)]
pub struct PlannedStep {
    /// Canonical registry form, when the step is representable.
    pub action: Option<(IterationId, Vec<f64>)>,
    /// The adaptive scaling used this step, for reporting.
    pub scaling: Option<f64>,
    pub cost: CostProfile,
}

/// Stateful per-run policy: owns the scaling recursions.
#[derive(Clone, Debug)]
pub struct BaselineStepper {
    id: BaselineId,
    k: usize,
    /// ScaledNewton: spectral bounds frozen at start, previous `mu`.
    sigma_bounds: (f64, f64),
    mu_prev: f64,
    /// ScaledNS: tracked minimum-ratio scalar.
    xhat: f64,
}

impl BaselineStepper {
    /// Policy starting from the given spectra (mid-trajectory semantics:
    /// scaling recursions initialize from the current iterate).
    pub fn new(id: BaselineId, x: &[f64], _y: &[f64]) -> Result<Self, BaselineError> {
        let mut stepper = BaselineStepper {
            id,
            k: 0,
            sigma_bounds: (1.0, 1.0),
            mu_prev: 1.0,
            xhat: 1.0,
        };
        match id {
            BaselineId::SignScaledNewton => {
                stepper.sigma_bounds = estimate_extremes(x)?;
            }
            BaselineId::SignScaledNs => {
                let (lo, hi) = estimate_extremes(x)?;
                stepper.xhat = lo / hi;
            }
            _ => {}
        }
        Ok(stepper)
    }

    /// Plan the next step from the current spectra.
    pub fn plan(&mut self, x: &[f64], y: &[f64]) -> Result<PlannedStep, Divergence> {
        let k = self.k;
        self.k += 1;
        let cost = self.id.cost_profile();
        let step = match self.id {
            BaselineId::InvNs => PlannedStep {
                action: Some((IterationId::InvNs, vec![2.0, 1.0])),
                scaling: None,
                cost,
            },
            BaselineId::InvChebyshev => PlannedStep {
                action: Some((IterationId::InvChebyshev, vec![3.0, 3.0, 1.0])),
                scaling: None,
                cost,
            },
            BaselineId::SignNewton => PlannedStep {
                action: Some((IterationId::SignNewton, vec![1.0])),
                scaling: None,
                cost,
            },
            BaselineId::SignNs => PlannedStep {
                action: Some((IterationId::SignNs, vec![0.5, 1.0])),
                scaling: None,
                cost,
            },
            BaselineId::SignScaledNewton => {
                let (a, b) = self.sigma_bounds;
                let mu = if k == 0 {
                    1.0 / fm::sqrt(a * b)
                } else if k == 1 {
                    fm::sqrt(2.0 / (fm::sqrt(a / b) + fm::sqrt(b / a)))
                } else {
                    fm::sqrt(2.0 / (self.mu_prev + 1.0 / self.mu_prev))
                };
                if !mu.is_finite() || mu <= 0.0 {
                    return Err(Divergence);
                }
                self.mu_prev = mu;
                PlannedStep {
                    action: Some((IterationId::SignNewton, vec![mu])),
                    scaling: Some(mu),
                    cost,
                }
            }
            BaselineId::SignScaledNs => {
                let xh = self.xhat;
                let rho = fm::sqrt(3.0 / (1.0 + xh + xh * xh));
                self.xhat = 0.5 * rho * xh * (3.0 - rho * rho * xh * xh);
                let (pa, pb) = scaled_ns_params(rho).ok_or(Divergence)?;
                PlannedStep {
                    action: Some((IterationId::SignNs, vec![pa, pb])),
                    scaling: Some(rho),
                    cost,
                }
            }
            BaselineId::SignHalley => PlannedStep {
                action: Some((IterationId::SignHalley, vec![3.0, 1.0, 3.0])),
                scaling: None,
                cost,
            },
            BaselineId::SignNewtonVariant => PlannedStep {
                action: None,
                scaling: None,
                cost,
            },
            BaselineId::SqrtNewton => PlannedStep {
                action: None,
                scaling: None,
                cost,
            },
            BaselineId::SqrtDb => PlannedStep {
                action: Some((IterationId::SqrtDb, vec![1.0, 1.0])),
                scaling: None,
                cost,
            },
            BaselineId::SqrtNsv => PlannedStep {
                action: Some((IterationId::SqrtNsv, vec![3.0, 1.0])),
                scaling: None,
                cost,
            },
            BaselineId::SqrtScaledDb => {
                // gamma = |det X det Y|^{-1/2n}, in log space from spectra
                let n = x.len() as f64;
                let mut logsum = 0.0;
                for &v in x.iter().chain(y.iter()) {
                    let a = fm::abs(v);
                    if a < 1e-300 {
                        return Err(Divergence);
                    }
                    logsum += fm::ln(a);
                }
                let gamma = fm::exp(-logsum / (2.0 * n));
                if !gamma.is_finite() || gamma <= 0.0 {
                    return Err(Divergence);
                }
                PlannedStep {
                    action: Some((IterationId::SqrtDb, vec![gamma, gamma])),
                    scaling: Some(gamma),
                    cost,
                }
            }
            BaselineId::SqrtVisser => PlannedStep {
                action: Some((IterationId::SqrtVisser, vec![1.0, 0.5])),
                scaling: None,
                cost,
            },
            BaselineId::ProotIannazzo => PlannedStep {
                action: Some((IterationId::ProotIannazzo, vec![2.0, 1.0])),
                scaling: None,
                cost,
            },
            BaselineId::ProotNewton => PlannedStep {
                action: Some((IterationId::ProotNewton, vec![2.0, 1.0])),
                scaling: None,
                cost,
            },
            BaselineId::ProotVisser => PlannedStep {
                action: Some((IterationId::ProotVisser, vec![1.0, 1.0 / 3.0])),
                scaling: None,
                cost,
            },
        };
        Ok(step)
    }

    /// Apply a planned step to spectra.
    pub fn apply(
        &self,
        step: &PlannedStep,
        x: &[f64],
        y: &[f64],
        lam: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>), Divergence> {
        if let Some((id, params)) = &step.action {
            return apply_spectral(iteration(*id), x, y, lam, params);
        }
        // the two standalone-only maps
        let mut nx = Vec::with_capacity(x.len());
        for i in 0..x.len() {
            let v = match self.id {
                BaselineId::SqrtNewton => {
                    if fm::abs(x[i]) < 1e-300 {
                        return Err(Divergence);
                    }
                    0.5 * (x[i] + lam[i] / x[i])
                }
                BaselineId::SignNewtonVariant => {
                    let denom = 1.0 + x[i] * x[i];
                    if fm::abs(denom) < 1e-300 {
                        return Err(Divergence);
                    }
                    2.0 * x[i] / denom
                }
                _ => unreachable!("only raw-map baselines reach here"),
            };
            if !v.is_finite() {
                return Err(Divergence);
            }
            nx.push(v);
        }
        Ok((nx, y.to_vec()))
    }
}

/// One record of a standalone run.
#[derive(Clone, Debug)]
pub struct BaselineStepRecord {
    pub step: usize,
    pub applied: Option<(IterationId, Vec<f64>)>,
    pub scaling: Option<f64>,
    pub loss: f64,
    pub cum_time: f64,
}

/// A standalone baseline run: per-step losses and cumulative modeled time.
#[derive(Clone, Debug)]
pub struct BaselineRun {
    pub baseline: BaselineId,
    pub records: Vec<BaselineStepRecord>,
    pub solved: bool,
    pub failed_at: Option<usize>,
}

impl BaselineRun {
    pub fn total_time(&self) -> f64 {
        self.records.last().map(|r| r.cum_time).unwrap_or(0.0)
    }

    pub fn steps_taken(&self) -> usize {
        self.records.len().saturating_sub(1)
    }
}

/// Run a baseline schedule from its own initialization on `lam` until it
/// solves, fails, or exhausts `max_steps`.
pub fn run_baseline(
    id: BaselineId,
    lam: &Spectrum,
    config: &EnvConfig,
    cost_table: &CostTable,
    max_steps: usize,
) -> Result<BaselineRun, BaselineError> {
    if id.function() != config.function {
        return Err(BaselineError::WrongFunction {
            baseline: id,
            expected: config.function,
        });
    }
    let init = env::init_state(config, lam);
    let mut x = init.s1;
    let mut y = init.s2;
    let lamv = init.lam;
    // baseline-specific initialization: scaled Newton-Schulz normalizes the
    // iterate by its largest magnitude
    if id == BaselineId::SignScaledNs {
        let (_, hi) = estimate_extremes(&x)?;
        for v in x.iter_mut() {
            *v /= hi;
        }
    }
    let mut stepper = BaselineStepper::new(id, &x, &y)?;
    let mut records = Vec::new();
    let mut cum_time = 0.0;
    let mut solved = false;
    let mut failed_at = None;
    let mut setup_paid = false;

    let loss0 = env::termination_loss(&x, &lamv, config.function);
    records.push(BaselineStepRecord {
        step: 0,
        applied: None,
        scaling: None,
        loss: loss0,
        cum_time: 0.0,
    });
    if loss0 <= config.eps_tol {
        return Ok(BaselineRun {
            baseline: id,
            records,
            solved: true,
            failed_at: None,
        });
    }

    for step in 1..=max_steps {
        let planned = match stepper.plan(&x, &y) {
            Ok(p) => p,
            Err(_) => {
                failed_at = Some(step);
                break;
            }
        };
        let applied = match stepper.apply(&planned, &x, &y, &lamv) {
            Ok(next) => next,
            Err(_) => {
                failed_at = Some(step);
                break;
            }
        };
        x = applied.0;
        y = applied.1;
        cum_time += cost_table.price_profile(&planned.cost);
        if !setup_paid {
            if let Some(setup) = id.setup_profile() {
                cum_time += cost_table.price_profile(&setup);
                setup_paid = true;
            }
        }
        let loss = env::termination_loss(&x, &lamv, config.function);
        records.push(BaselineStepRecord {
            step,
            applied: planned.action.clone(),
            scaling: planned.scaling,
            loss,
            cum_time,
        });
        if loss <= config.eps_tol {
            solved = true;
            break;
        }
        if loss > config.divergence_cap || !loss.is_finite() {
            failed_at = Some(step);
            break;
        }
    }
    Ok(BaselineRun {
        baseline: id,
        records,
        solved,
        failed_at,
    })
}

/// Rollout cap used by the search (steps per completion attempt).
pub const ROLLOUT_CAP: usize = 40;

/// Result of completing a state with one baseline.
#[derive(Clone, Debug)]
pub struct RolloutOutcome {
    /// `-(modeled cost to solved)`, or `-penalty` when unsolved.
    pub value: f64,
    /// Flattened registry-action steps, including any coupling prefix.
    pub steps: Vec<(IterationId, Vec<f64>)>,
    pub solved: bool,
    pub final_loss: f64,
}

/// Complete `state` with baseline `id`. A coupled baseline launched from an
/// uncoupled state gets the function's coupling step prepended (and
/// charged).
pub fn rollout_baseline(
    id: BaselineId,
    state: &EnvState,
    config: &EnvConfig,
    cost_table: &CostTable,
    penalty: f64,
) -> RolloutOutcome {
    debug_assert!(id.rollout_eligible(), "{id} cannot roll out");
    let mut x = state.s1.clone();
    let mut y = state.s2.clone();
    let lam = &state.lam;
    let mut steps: Vec<(IterationId, Vec<f64>)> = Vec::new();
    let mut total_cost = 0.0;
    let mut setup_paid = state.newton_setup_charged;

    let loss0 = env::termination_loss(&x, lam, config.function);
    if loss0 <= config.eps_tol {
        return RolloutOutcome {
            value: 0.0,
            steps,
            solved: true,
            final_loss: loss0,
        };
    }

    let fail = |final_loss: f64, steps: Vec<(IterationId, Vec<f64>)>| RolloutOutcome {
        value: -penalty,
        steps,
        solved: false,
        final_loss,
    };

    if id.coupled() && !state.is_coupled {
        let coupling = match config.function {
            MatrixFunction::Sqrt => IterationId::SqrtCoupling,
            MatrixFunction::Proot => IterationId::ProotCoupling,
            _ => unreachable!("only root functions have coupled baselines"),
        };
        match apply_spectral(iteration(coupling), &x, &y, lam, &[]) {
            Ok((nx, ny)) => {
                x = nx;
                y = ny;
            }
            Err(_) => return fail(loss0, steps),
        }
        total_cost += cost_table.cost(coupling).unwrap_or(0.0);
        steps.push((coupling, Vec::new()));
    }

    let mut stepper = match BaselineStepper::new(id, &x, &y) {
        Ok(s) => s,
        Err(_) => return fail(loss0, steps),
    };
    for _ in 0..ROLLOUT_CAP {
        let planned = match stepper.plan(&x, &y) {
            Ok(p) => p,
            Err(_) => return fail(env::termination_loss(&x, lam, config.function), steps),
        };
        let (nx, ny) = match stepper.apply(&planned, &x, &y, lam) {
            Ok(next) => next,
            Err(_) => return fail(env::termination_loss(&x, lam, config.function), steps),
        };
        x = nx;
        y = ny;
        total_cost += cost_table.price_profile(&planned.cost);
        if !setup_paid {
            if let Some(setup) = id.setup_profile() {
                total_cost += cost_table.price_profile(&setup);
                setup_paid = true;
            }
        }
        let action = planned
            .action
            .expect("rollout-eligible baselines emit registry actions");
        steps.push(action);
        let loss = env::termination_loss(&x, lam, config.function);
        if loss <= config.eps_tol {
            return RolloutOutcome {
                value: -total_cost,
                steps,
                solved: true,
                final_loss: loss,
            };
        }
        if loss > config.divergence_cap || !loss.is_finite() {
            return fail(loss, steps);
        }
    }
    fail(env::termination_loss(&x, lam, config.function), steps)
}

/// Status shorthand used by callers sweeping baselines.
pub fn run_status(run: &BaselineRun) -> TermStatus {
    if run.solved {
        TermStatus::Solved
    } else if run.failed_at.is_some() {
        TermStatus::Failed
    } else {
        TermStatus::Nonterminal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costmodel::CostTable;
    use crate::spectra::{sample_spectrum, DistributionKind, DistributionSpec, Spectrum};

    fn cfg(function: MatrixFunction) -> EnvConfig {
        EnvConfig::new(function)
    }

    fn table(function: MatrixFunction) -> CostTable {
        CostTable::static_default(function)
    }

    #[test]
    fn extremes_basics() {
        assert_eq!(estimate_extremes(&[-3.0, 0.5, 2.0]).unwrap(), (0.5, 3.0));
        assert_eq!(estimate_extremes(&[1.0, 1.0]).unwrap(), (1.0, 1.0));
        assert!(matches!(
            estimate_extremes(&[0.0, 0.0]),
            Err(BaselineError::DegenerateInput)
        ));
        let spec = DistributionSpec::new(DistributionKind::Wishart, 64, 5);
        let s = sample_spectrum(&spec).unwrap();
        let (lo, hi) = estimate_extremes(s.values()).unwrap();
        let brute_lo = s.values().iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        let brute_hi = s.values().iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert_eq!((lo, hi), (brute_lo, brute_hi));
    }

    #[test]
    fn db_hand_iterated() {
        let lam = Spectrum::new(vec![4.0]).unwrap();
        let run = run_baseline(
            BaselineId::SqrtDb,
            &lam,
            &cfg(MatrixFunction::Sqrt),
            &table(MatrixFunction::Sqrt),
            2,
        )
        .unwrap();
        // x0 = 4, y0 = 1; x1 = 2.5; x2 = 0.5*(2.5 + 1.6) = 2.05
        assert!(run.records.len() >= 3);
        let l1 = run.records[1].loss;
        assert!((l1 - (2.5f64 * 2.5 - 4.0).abs() / 4.0).abs() < 1e-15, "{l1}");
        let l2 = run.records[2].loss;
        assert!((l2 - (2.05f64 * 2.05 - 4.0).abs() / 4.0).abs() < 1e-15, "{l2}");
    }

    #[test]
    fn scaled_db_gamma_unity_case() {
        // x = (2, 2), y = (1/2, 1/2): log-magnitudes cancel, gamma = 1
        let mut stepper = BaselineStepper::new(BaselineId::SqrtScaledDb, &[2.0, 2.0], &[0.5, 0.5])
            .unwrap();
        let planned = stepper.plan(&[2.0, 2.0], &[0.5, 0.5]).unwrap();
        assert!((planned.scaling.unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scaled_newton_already_sign() {
        let lam = Spectrum::new(vec![-1.0, 1.0]).unwrap();
        let run = run_baseline(
            BaselineId::SignScaledNewton,
            &lam,
            &cfg(MatrixFunction::Sign),
            &table(MatrixFunction::Sign),
            10,
        )
        .unwrap();
        assert!(run.solved);
        assert!(run.steps_taken() <= 1);
    }

    #[test]
    fn scaled_ns_conversion_exact_at_rho_one() {
        let (a, b) = scaled_ns_params(1.0).unwrap();
        assert!((a - 0.5).abs() < 1e-15);
        assert!((b - 1.0).abs() < 1e-15);
        // conversion reproduces the scaled map across the rho range
        for &rho in &[1.0, 1.2, 1.5, 1.7, 1.732] {
            let (a, b) = scaled_ns_params(rho).unwrap();
            for &x in &[0.1, 0.5, 0.9, 1.1] {
                let direct = 1.5 * rho * x - 0.5 * (rho * x) * (rho * x) * (rho * x);
                let t = b * x;
                let via_ns = x + a * (t - t * t * t);
                assert!(
                    (direct - via_ns).abs() <= 1e-12 * direct.abs().max(1.0),
                    "rho {rho} x {x}: {direct} vs {via_ns}"
                );
            }
        }
    }

    #[test]
    fn chebyshev_residual_cubes_exactly() {
        let cfgv = cfg(MatrixFunction::Inverse);
        let lam = sample_spectrum(&DistributionSpec::new(DistributionKind::Uniform, 32, 7))
            .unwrap();
        let run = run_baseline(
            BaselineId::InvChebyshev,
            &lam,
            &cfgv,
            &table(MatrixFunction::Inverse),
            25,
        )
        .unwrap();
        assert!(run.solved, "unsolved after {} steps", run.steps_taken());
        // entrywise, the residual r = 1 - lam*x obeys r' = r^3 at the
        // default parameters (a, b, c) = (3, 3, 1)
        let init = env::init_state(&cfgv, &lam);
        let mut x = init.s1.clone();
        for _ in 0..4 {
            let stepper = iteration(IterationId::InvChebyshev);
            let (nx, _) = apply_spectral(
                stepper,
                &x,
                &init.s2,
                lam.values(),
                &[3.0, 3.0, 1.0],
            )
            .unwrap();
            for (i, (&xi, &li)) in x.iter().zip(lam.values()).enumerate() {
                let r = 1.0 - li * xi;
                let rn = 1.0 - li * nx[i];
                assert!(
                    (rn - r * r * r).abs() <= 1e-12,
                    "entry {i}: {rn} vs {}",
                    r * r * r
                );
            }
            x = nx;
        }
    }

    #[test]
    fn db_self_duality_product_to_one() {
        let lam = sample_spectrum(&DistributionSpec::new(DistributionKind::Wishart, 16, 3))
            .unwrap();
        let cfgv = cfg(MatrixFunction::Sqrt);
        let tbl = table(MatrixFunction::Sqrt);
        let init = env::init_state(&cfgv, &lam);
        let mut x = init.s1.clone();
        let mut y = init.s2.clone();
        let mut stepper = BaselineStepper::new(BaselineId::SqrtDb, &x, &y).unwrap();
        let mut prev_gap = f64::INFINITY;
        let _ = &tbl;
        for step in 0..12 {
            let planned = stepper.plan(&x, &y).unwrap();
            let (nx, ny) = stepper.apply(&planned, &x, &y, init.lam.as_slice()).unwrap();
            x = nx;
            y = ny;
            let gap = x
                .iter()
                .zip(y.iter())
                .map(|(&a, &b)| (a * b - 1.0).abs())
                .fold(0.0f64, f64::max);
            if step >= 1 {
                assert!(gap <= prev_gap * (1.0 + 1e-12), "step {step}: {gap} > {prev_gap}");
            }
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-6);
    }

    #[test]
    fn sign_newton_quadratic_convergence() {
        // spectra inside [0.5, 2]: fitted quadratic constant stays below 2
        let mut rngvals = crate::rng::Rng::new(99);
        let vals: alloc::vec::Vec<f64> = (0..32).map(|_| rngvals.uniform(0.5, 2.0)).collect();
        let lam = Spectrum::new(vals).unwrap();
        let cfgv = cfg(MatrixFunction::Sign);
        let run = run_baseline(
            BaselineId::SignNewton,
            &lam,
            &cfgv,
            &table(MatrixFunction::Sign),
            30,
        )
        .unwrap();
        // evaluation-form errors from the recorded states are not stored;
        // recompute by replaying the scalar recursion
        let mut x: alloc::vec::Vec<f64> = lam.values().to_vec();
        let mut errors = alloc::vec::Vec::new();
        for _ in 0..10 {
            let e = env::evaluation_loss(&x, lam.values(), MatrixFunction::Sign);
            errors.push(e);
            for v in x.iter_mut() {
                *v = 0.5 * (*v + 1.0 / *v);
            }
        }
        let mut fitted: f64 = 0.0;
        for w in errors.windows(2) {
            let (e0, e1) = (w[0], w[1]);
            if e1 < 1e-14 {
                break;
            }
            fitted = fitted.max(e1 / (e0 * e0));
        }
        assert!(fitted <= 2.0, "fitted quadratic constant {fitted}");
        assert!(run.solved);
    }

    #[test]
    fn scaled_newton_dominates_plain_newton_smoke() {
        let cfgv = cfg(MatrixFunction::Sign);
        let tbl = table(MatrixFunction::Sign);
        for seed in 0..5 {
            let lam = sample_spectrum(&DistributionSpec::new(DistributionKind::Uniform, 64, seed))
                .unwrap();
            let plain = run_baseline(BaselineId::SignNewton, &lam, &cfgv, &tbl, 60).unwrap();
            let scaled =
                run_baseline(BaselineId::SignScaledNewton, &lam, &cfgv, &tbl, 60).unwrap();
            assert!(plain.solved && scaled.solved, "seed {seed}");
            assert!(
                scaled.steps_taken() <= plain.steps_taken(),
                "seed {seed}: scaled {} vs plain {}",
                scaled.steps_taken(),
                plain.steps_taken()
            );
        }
    }

    #[test]
    fn rollout_prepends_coupling_when_uncoupled() {
        let cfgv = cfg(MatrixFunction::Sqrt);
        let tbl = table(MatrixFunction::Sqrt);
        let lam = sample_spectrum(&DistributionSpec::new(DistributionKind::Wishart, 16, 9))
            .unwrap();
        let mut state = env::init_state(&cfgv, &lam);
        state.is_coupled = false; // as if an uncoupled iteration ran
        let outcome = rollout_baseline(BaselineId::SqrtScaledDb, &state, &cfgv, &tbl, 1e9);
        assert!(outcome.solved, "rollout should solve wishart sqrt");
        assert_eq!(outcome.steps[0].0, IterationId::SqrtCoupling);
        // coupling cost is charged
        let repriced: f64 = outcome
            .steps
            .iter()
            .map(|(id, _)| tbl.cost(*id).unwrap())
            .sum();
        assert!((outcome.value + repriced).abs() < 1e-12);
    }

    #[test]
    fn rollout_solved_state_is_free() {
        let cfgv = cfg(MatrixFunction::Sqrt);
        let tbl = table(MatrixFunction::Sqrt);
        let lam = Spectrum::new(vec![1.0, 4.0]).unwrap();
        let mut state = env::init_state(&cfgv, &lam);
        state.s1 = vec![1.0, 2.0];
        let outcome = rollout_baseline(BaselineId::SqrtNsv, &state, &cfgv, &tbl, 1e9);
        assert_eq!(outcome.value, 0.0);
        assert!(outcome.solved);
        assert!(outcome.steps.is_empty());
    }

    #[test]
    fn rollout_failure_pays_penalty() {
        let cfgv = cfg(MatrixFunction::Sign);
        let tbl = table(MatrixFunction::Sign);
        // a spectrum far outside every sign baseline's basin within the cap
        let lam = Spectrum::new(vec![1e300, 1.0]).unwrap();
        let state = env::init_state(&cfgv, &lam);
        let outcome = rollout_baseline(BaselineId::SignHalley, &state, &cfgv, &tbl, 1e9);
        assert!(!outcome.solved);
        assert_eq!(outcome.value, -1e9);
    }

    #[test]
    fn wrong_function_rejected() {
        let lam = Spectrum::new(vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            run_baseline(
                BaselineId::SqrtDb,
                &lam,
                &cfg(MatrixFunction::Sign),
                &table(MatrixFunction::Sign),
                5
            ),
            Err(BaselineError::WrongFunction { .. })
        ));
    }

    #[test]
    fn names_round_trip() {
        for b in ALL_BASELINES {
            assert_eq!(BaselineId::parse(b.name()), Some(b));
        }
    }
}
