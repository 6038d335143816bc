//! The sequential decision process over spectra.
//!
//! A state carries the iterate spectra `(s1, s2)` and the fixed input
//! spectrum. Actions are decoupled: from a *transitionable* state (no
//! parameter entry in progress) the move is choosing the next iteration;
//! the iteration's parameters are then fixed one per step, and the move
//! that fixes the last parameter applies the iteration's spectral map,
//! collects reward `-T_j`, and advances the depth. Zero-parameter coupling
//! steps apply at selection time.
//!
//! The `IsCoupled` flag gates the discrete choice set: a coupled state may
//! pick coupled or uncoupled iterations; an uncoupled state may pick the
//! coupling step or uncoupled iterations. The four legal
//! (flag, class) -> flag transitions live in [`next_coupled`].

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::costmodel::CostTable;
use crate::fm;
use crate::iterations::{
    apply_spectral, iteration, registry, CouplingClass, IterationId, IterationSpec,
    MatrixFunction,
};
use crate::spectra::Spectrum;

/// Loss used for the terminal test (residual form, no ground truth) versus
/// the reporting form (distance to `f(A)`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LossForm {
    Termination,
    Evaluation,
}

/// Environment configuration.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnvConfig {
    pub function: MatrixFunction,
    pub eps_tol: f64,
    pub loss_form: LossForm,
    pub max_depth: usize,
    pub divergence_cap: f64,
}

impl EnvConfig {
    pub fn new(function: MatrixFunction) -> Self {
        EnvConfig {
            function,
            eps_tol: 1e-6,
            loss_form: LossForm::Termination,
            max_depth: 60,
            divergence_cap: 1e6,
        }
    }
}

/// One move: pick the next iteration, or fix the next parameter of the
/// pending one.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ActionToken {
    ChooseIteration(IterationId),
    ChooseParam(f64),
}

/// Search/replay state: spectra plus the staged action entry.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvState {
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
    pub lam: Vec<f64>,
    pub pending_iteration: Option<IterationId>,
    pub pending_params: Vec<f64>,
    pub is_coupled: bool,
    pub depth: usize,
    pub failed: bool,
    /// The `A^{-2}` surcharge of the 1/3-root Newton step has been paid.
    pub newton_setup_charged: bool,
}

impl EnvState {
    /// Ready for an iteration choice: no parameter entry in progress.
    #[inline]
    pub fn is_transitionable(&self) -> bool {
        self.pending_iteration.is_none()
    }

    /// Stage within the pending iteration's parameter list.
    #[inline]
    pub fn stage(&self) -> usize {
        self.pending_params.len()
    }

    pub fn dim(&self) -> usize {
        self.lam.len()
    }
}

/// Outcome of the terminal test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermStatus {
    Nonterminal,
    Solved,
    Failed,
}

/// Legal moves from a state.
#[derive(Clone, Debug, PartialEq)]
pub enum LegalActions {
    Discrete(Vec<IterationId>),
    Continuous { lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnvError {
    IllegalAction(ActionToken),
    ParamOutOfRange { value: f64, lo: f64, hi: f64 },
    WrongFunction(IterationId),
    Terminal,
    MissingCost(IterationId),
}

impl fmt::Display for EnvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvError::IllegalAction(a) => write!(f, "illegal action {a:?}"),
            EnvError::ParamOutOfRange { value, lo, hi } => {
                write!(f, "parameter {value} outside [{lo}, {hi}]")
            }
            EnvError::WrongFunction(id) => {
                write!(f, "iteration {id} belongs to a different matrix function")
            }
            EnvError::Terminal => f.write_str("state is terminal"),
            EnvError::MissingCost(id) => write!(f, "no cost for iteration {id}"),
        }
    }
}

/// The `IsCoupled` automaton. Returns the next flag, or `None` for the two
/// unreachable pairs (coupling from a coupled state, coupled iteration from
/// an uncoupled state).
pub fn next_coupled(current: bool, class: CouplingClass) -> Option<bool> {
    match (current, class) {
        (true, CouplingClass::Coupled) => Some(true),
        (true, CouplingClass::Uncoupled) => Some(false),
        (true, CouplingClass::CouplingStep) => None,
        (false, CouplingClass::CouplingStep) => Some(true),
        (false, CouplingClass::Uncoupled) => Some(false),
        (false, CouplingClass::Coupled) => None,
    }
}

/// Initial state for a function on the given input spectrum.
///
/// Square root and sign start from `X0 = A` (with `Y0 = I` for the coupled
/// square-root family); the 1/3-root starts from `X0 = I, Y0 = A`; the
/// inverse starts from the contraction-safe `X0 = A / ||A||_F^2`.
pub fn init_state(config: &EnvConfig, lam: &Spectrum) -> EnvState {
    let vals = lam.values();
    let n = vals.len();
    let ones = vec![1.0; n];
    let (s1, s2) = match config.function {
        MatrixFunction::Sqrt | MatrixFunction::Sign => (vals.to_vec(), ones),
        MatrixFunction::Proot => (ones, vals.to_vec()),
        MatrixFunction::Inverse => {
            let norm2: f64 = vals.iter().map(|v| v * v).sum();
            (vals.iter().map(|v| v / norm2).collect(), ones)
        }
    };
    EnvState {
        s1,
        s2,
        lam: vals.to_vec(),
        pending_iteration: None,
        pending_params: Vec::new(),
        is_coupled: true,
        depth: 0,
        failed: false,
        newton_setup_charged: false,
    }
}

/// Iterations choosable from a transitionable state with the given flag.
pub fn eligible_iterations(function: MatrixFunction, is_coupled: bool) -> Vec<IterationId> {
    registry(function)
        .iter()
        .filter(|spec| match spec.coupling {
            CouplingClass::Uncoupled => true,
            CouplingClass::Coupled => is_coupled,
            CouplingClass::CouplingStep => !is_coupled,
        })
        .map(|spec| spec.id)
        .collect()
}

/// Moves legal from `state`.
pub fn legal_actions(state: &EnvState, config: &EnvConfig) -> LegalActions {
    match state.pending_iteration {
        None => LegalActions::Discrete(eligible_iterations(config.function, state.is_coupled)),
        Some(id) => {
            let spec = iteration(id);
            let (lo, hi) = spec.ranges[state.stage()];
            LegalActions::Continuous { lo, hi }
        }
    }
}

fn apply_pending(
    state: &EnvState,
    spec: &IterationSpec,
    params: &[f64],
    cost_table: &CostTable,
) -> Result<(EnvState, f64), EnvError> {
    let mut cost = cost_table
        .cost(spec.id)
        .map_err(|_| EnvError::MissingCost(spec.id))?;
    let mut charged = state.newton_setup_charged;
    if spec.setup_cost.is_some() && !charged {
        cost += cost_table.setup_cost(spec.id);
        charged = true;
    }
    let next_flag = next_coupled(state.is_coupled, spec.coupling)
        .ok_or(EnvError::IllegalAction(ActionToken::ChooseIteration(spec.id)))?;
    let mut next = state.clone();
    next.pending_iteration = None;
    next.pending_params = Vec::new();
    next.depth = state.depth + 1;
    next.is_coupled = next_flag;
    next.newton_setup_charged = charged;
    match apply_spectral(spec, &state.s1, &state.s2, &state.lam, params) {
        Ok((nx, ny)) => {
            next.s1 = nx;
            next.s2 = ny;
        }
        Err(_) => {
            // time was spent before the divergence surfaced; the state is
            // terminal-failed with its spectra left at the last finite value
            next.failed = true;
        }
    }
    Ok((next, -cost))
}

/// Apply one action. Parameter-entry moves cost nothing; the move that
/// completes an iteration (or a zero-parameter coupling choice) applies the
/// spectral map and is rewarded `-T_j`.
pub fn transition(
    state: &EnvState,
    action: ActionToken,
    config: &EnvConfig,
    cost_table: &CostTable,
) -> Result<(EnvState, f64), EnvError> {
    if is_terminal(state, config) != TermStatus::Nonterminal {
        return Err(EnvError::Terminal);
    }
    match action {
        ActionToken::ChooseIteration(id) => {
            if !state.is_transitionable() {
                return Err(EnvError::IllegalAction(action));
            }
            let spec = iteration(id);
            if spec.function != config.function {
                return Err(EnvError::WrongFunction(id));
            }
            if next_coupled(state.is_coupled, spec.coupling).is_none() {
                return Err(EnvError::IllegalAction(action));
            }
            if spec.n_params() == 0 {
                return apply_pending(state, spec, &[], cost_table);
            }
            let mut next = state.clone();
            next.pending_iteration = Some(id);
            next.pending_params = Vec::new();
            Ok((next, 0.0))
        }
        ActionToken::ChooseParam(value) => {
            let id = state
                .pending_iteration
                .ok_or(EnvError::IllegalAction(action))?;
            let spec = iteration(id);
            let (lo, hi) = spec.ranges[state.stage()];
            if !(value >= lo && value <= hi) {
                return Err(EnvError::ParamOutOfRange { value, lo, hi });
            }
            let mut params = state.pending_params.clone();
            params.push(value);
            if params.len() == spec.n_params() {
                apply_pending(state, spec, &params, cost_table)
            } else {
                let mut next = state.clone();
                next.pending_params = params;
                Ok((next, 0.0))
            }
        }
    }
}

/// Spectral termination loss (residual form).
pub fn termination_loss(x: &[f64], lam: &[f64], function: MatrixFunction) -> f64 {
    if x.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let denom = fm::sqrt(lam.iter().map(|l| l * l).sum());
    if denom == 0.0 {
        return f64::INFINITY;
    }
    let num2: f64 = x
        .iter()
        .zip(lam.iter())
        .map(|(&xi, &li)| {
            let r = match function {
                MatrixFunction::Inverse => li * xi - 1.0,
                MatrixFunction::Sign => xi * xi - 1.0,
                MatrixFunction::Sqrt => xi * xi - li,
                MatrixFunction::Proot => xi * xi * xi - li,
            };
            r * r
        })
        .sum();
    fm::sqrt(num2) / denom
}

/// Spectral evaluation loss (distance to `f(A)`; the sign form is scaled by
/// `1/sqrt(d)`, the others are relative to `||f(A)||`).
pub fn evaluation_loss(x: &[f64], lam: &[f64], function: MatrixFunction) -> f64 {
    if x.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let n = x.len();
    match function {
        MatrixFunction::Sign => {
            let num2: f64 = x
                .iter()
                .zip(lam.iter())
                .map(|(&xi, &li)| {
                    let r = xi - fm::signum0(li);
                    r * r
                })
                .sum();
            fm::sqrt(num2) / fm::sqrt(n as f64)
        }
        _ => {
            let mut num2 = 0.0;
            let mut den2 = 0.0;
            for (&xi, &li) in x.iter().zip(lam.iter()) {
                let target = function.scalar(li);
                let r = xi - target;
                num2 += r * r;
                den2 += target * target;
            }
            if den2 == 0.0 {
                return f64::INFINITY;
            }
            fm::sqrt(num2) / fm::sqrt(den2)
        }
    }
}

/// Loss of a state under the configured form.
pub fn loss(state: &EnvState, config: &EnvConfig) -> f64 {
    match config.loss_form {
        LossForm::Termination => termination_loss(&state.s1, &state.lam, config.function),
        LossForm::Evaluation => evaluation_loss(&state.s1, &state.lam, config.function),
    }
}

/// Terminal test: solved once the termination loss reaches `eps_tol`;
/// failed on divergence, a loss above the cap, or depth exhaustion.
pub fn is_terminal(state: &EnvState, config: &EnvConfig) -> TermStatus {
    let l = termination_loss(&state.s1, &state.lam, config.function);
    if l <= config.eps_tol {
        return TermStatus::Solved;
    }
    if state.failed || l > config.divergence_cap || state.depth >= config.max_depth {
        return TermStatus::Failed;
    }
    TermStatus::Nonterminal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costmodel::CostTable;
    use crate::spectra::Spectrum;

    fn sqrt_env() -> (EnvConfig, CostTable) {
        (
            EnvConfig::new(MatrixFunction::Sqrt),
            CostTable::static_default(MatrixFunction::Sqrt),
        )
    }

    #[test]
    fn init_states_per_function() {
        let lam = Spectrum::new(vec![1.0, 4.0]).unwrap();
        let (cfg, _) = sqrt_env();
        let s = init_state(&cfg, &lam);
        assert_eq!(s.s1, vec![1.0, 4.0]);
        assert_eq!(s.s2, vec![1.0, 1.0]);
        assert!(s.is_coupled);

        let lam = Spectrum::new(vec![8.0, 27.0]).unwrap();
        let s = init_state(&EnvConfig::new(MatrixFunction::Proot), &lam);
        assert_eq!(s.s1, vec![1.0, 1.0]);
        assert_eq!(s.s2, vec![8.0, 27.0]);

        let lam = Spectrum::new(vec![-1.0, 1.0]).unwrap();
        let s = init_state(&EnvConfig::new(MatrixFunction::Sign), &lam);
        assert_eq!(s.s1, vec![-1.0, 1.0]);

        let lam = Spectrum::new(vec![2.0]).unwrap();
        let s = init_state(&EnvConfig::new(MatrixFunction::Inverse), &lam);
        assert_eq!(s.s1, vec![0.5]); // 2 / 4
    }

    #[test]
    fn coupling_gates_discrete_choices() {
        let (cfg, _) = sqrt_env();
        let lam = Spectrum::new(vec![2.0, 3.0]).unwrap();
        let root = init_state(&cfg, &lam);
        // coupled root: everything but the coupling step
        match legal_actions(&root, &cfg) {
            LegalActions::Discrete(ids) => {
                assert_eq!(
                    ids,
                    vec![
                        IterationId::SqrtDb,
                        IterationId::SqrtNsv,
                        IterationId::SqrtVisser,
                        IterationId::SqrtVisserCoupled
                    ]
                );
            }
            other => panic!("expected discrete, got {other:?}"),
        }
        // uncoupled state: coupling step plus uncoupled iterations
        let mut uncoupled = root.clone();
        uncoupled.is_coupled = false;
        match legal_actions(&uncoupled, &cfg) {
            LegalActions::Discrete(ids) => {
                assert_eq!(ids, vec![IterationId::SqrtVisser, IterationId::SqrtCoupling]);
            }
            other => panic!("expected discrete, got {other:?}"),
        }
    }

    #[test]
    fn staged_parameter_entry() {
        let (cfg, table) = sqrt_env();
        let lam = Spectrum::new(vec![2.0, 3.0]).unwrap();
        let root = init_state(&cfg, &lam);
        let (s1, r1) = transition(
            &root,
            ActionToken::ChooseIteration(IterationId::SqrtVisser),
            &cfg,
            &table,
        )
        .unwrap();
        assert_eq!(r1, 0.0);
        assert!(!s1.is_transitionable());
        match legal_actions(&s1, &cfg) {
            LegalActions::Continuous { lo, hi } => assert_eq!((lo, hi), (0.0, 10.0)),
            other => panic!("expected continuous, got {other:?}"),
        }
        let (s2, r2) = transition(&s1, ActionToken::ChooseParam(1.0), &cfg, &table).unwrap();
        assert_eq!(r2, 0.0);
        assert_eq!(s2.stage(), 1);
        // completing parameter applies the map and charges the cost
        let (s3, r3) = transition(&s2, ActionToken::ChooseParam(0.5), &cfg, &table).unwrap();
        assert_eq!(r3, -table.cost(IterationId::SqrtVisser).unwrap());
        assert!(s3.is_transitionable());
        assert_eq!(s3.depth, 1);
        // Visser is uncoupled: flag flips off
        assert!(!s3.is_coupled);
        // x' = 1*2 + 0.5*(2 - 4) = 1 for lam = 2
        assert!((s3.s1[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sign_newton_transition_value() {
        let cfg = EnvConfig::new(MatrixFunction::Sign);
        let table = CostTable::static_default(MatrixFunction::Sign);
        let lam = Spectrum::new(vec![2.0]).unwrap();
        let root = init_state(&cfg, &lam);
        let (s1, _) = transition(
            &root,
            ActionToken::ChooseIteration(IterationId::SignNewton),
            &cfg,
            &table,
        )
        .unwrap();
        let (s2, r) = transition(&s1, ActionToken::ChooseParam(1.0), &cfg, &table).unwrap();
        assert!((s2.s1[0] - 1.25).abs() < 1e-15);
        assert_eq!(r, -3.0);
    }

    #[test]
    fn coupling_step_applies_at_choice() {
        let (cfg, table) = sqrt_env();
        let lam = Spectrum::new(vec![9.0]).unwrap();
        let mut state = init_state(&cfg, &lam);
        state.is_coupled = false;
        state.s1 = vec![2.0];
        let (next, r) = transition(
            &state,
            ActionToken::ChooseIteration(IterationId::SqrtCoupling),
            &cfg,
            &table,
        )
        .unwrap();
        assert!(next.is_coupled);
        assert!((next.s2[0] - 2.0 / 9.0).abs() < 1e-16);
        assert_eq!(r, -table.cost(IterationId::SqrtCoupling).unwrap());
    }

    #[test]
    fn illegal_actions_rejected() {
        let (cfg, table) = sqrt_env();
        let lam = Spectrum::new(vec![2.0]).unwrap();
        let root = init_state(&cfg, &lam);
        // coupling from a coupled state
        assert!(matches!(
            transition(
                &root,
                ActionToken::ChooseIteration(IterationId::SqrtCoupling),
                &cfg,
                &table
            ),
            Err(EnvError::IllegalAction(_))
        ));
        // coupled iteration from an uncoupled state
        let mut uncoupled = root.clone();
        uncoupled.is_coupled = false;
        assert!(matches!(
            transition(
                &uncoupled,
                ActionToken::ChooseIteration(IterationId::SqrtDb),
                &cfg,
                &table
            ),
            Err(EnvError::IllegalAction(_))
        ));
        // wrong function
        assert!(matches!(
            transition(
                &root,
                ActionToken::ChooseIteration(IterationId::SignNewton),
                &cfg,
                &table
            ),
            Err(EnvError::WrongFunction(_))
        ));
        // parameter out of range
        let (s1, _) = transition(
            &root,
            ActionToken::ChooseIteration(IterationId::SqrtVisser),
            &cfg,
            &table,
        )
        .unwrap();
        assert!(matches!(
            transition(&s1, ActionToken::ChooseParam(11.0), &cfg, &table),
            Err(EnvError::ParamOutOfRange { .. })
        ));
    }

    #[test]
    fn loss_forms() {
        // exact square root: zero loss
        assert_eq!(
            termination_loss(&[1.0, 2.0], &[1.0, 4.0], MatrixFunction::Sqrt),
            0.0
        );
        // sign termination form at X = I
        assert_eq!(
            termination_loss(&[1.0, 1.0, 1.0], &[0.5, -0.2, 0.8], MatrixFunction::Sign),
            0.0
        );
        // sqrt of zeros against ones: sqrt(2)/sqrt(2) = 1
        assert!((termination_loss(&[0.0, 0.0], &[1.0, 1.0], MatrixFunction::Sqrt) - 1.0).abs() < 1e-15);
        // non-finite spectrum
        assert_eq!(
            termination_loss(&[f64::NAN], &[1.0], MatrixFunction::Sqrt),
            f64::INFINITY
        );
        // sign evaluation form
        let e = evaluation_loss(&[2.125], &[4.0], MatrixFunction::Sign);
        assert!((e - 1.125).abs() < 1e-15);
    }

    #[test]
    fn terminal_rules() {
        let cfg = EnvConfig::new(MatrixFunction::Sqrt);
        let lam = Spectrum::new(vec![1.0, 4.0]).unwrap();
        let mut state = init_state(&cfg, &lam);
        state.s1 = vec![1.0, 2.0];
        assert_eq!(is_terminal(&state, &cfg), TermStatus::Solved);
        let mut fresh = init_state(&cfg, &lam);
        assert_eq!(is_terminal(&fresh, &cfg), TermStatus::Nonterminal);
        fresh.depth = cfg.max_depth;
        assert_eq!(is_terminal(&fresh, &cfg), TermStatus::Failed);
        let mut diverged = init_state(&cfg, &lam);
        diverged.failed = true;
        assert_eq!(is_terminal(&diverged, &cfg), TermStatus::Failed);
    }

    #[test]
    fn coupled_automaton_is_exhaustive() {
        use CouplingClass::*;
        assert_eq!(next_coupled(true, Coupled), Some(true));
        assert_eq!(next_coupled(true, Uncoupled), Some(false));
        assert_eq!(next_coupled(true, CouplingStep), None);
        assert_eq!(next_coupled(false, CouplingStep), Some(true));
        assert_eq!(next_coupled(false, Uncoupled), Some(false));
        assert_eq!(next_coupled(false, Coupled), None);
    }

    #[test]
    fn proot_newton_setup_charged_once() {
        let cfg = EnvConfig::new(MatrixFunction::Proot);
        let table = CostTable::static_default(MatrixFunction::Proot);
        let lam = Spectrum::new(vec![8.0, 27.0]).unwrap();
        let root = init_state(&cfg, &lam);
        let step = |state: &EnvState| -> (EnvState, f64) {
            let (s, _) = transition(
                state,
                ActionToken::ChooseIteration(IterationId::ProotNewton),
                &cfg,
                &table,
            )
            .unwrap();
            let (s, _) = transition(&s, ActionToken::ChooseParam(2.0), &cfg, &table).unwrap();
            transition(&s, ActionToken::ChooseParam(1.0), &cfg, &table).unwrap()
        };
        let (s1, r1) = step(&root);
        // first use pays steady + setup
        assert_eq!(r1, -(1.0 + 4.0));
        assert!(s1.newton_setup_charged);
        let (_, r2) = step(&s1);
        assert_eq!(r2, -1.0);
    }
}
